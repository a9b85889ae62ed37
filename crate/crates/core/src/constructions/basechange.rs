use crate::error::{Error, Result};
use crate::grobner::{module_member, smith_normal_form, ModuleBasis};
use crate::polyalg::univariate::UPoly;
use crate::polyalg::{Monomial, PolyMatrix, Polynomial, Rational};

use super::PolyMap;

/// How the generators of the pointwise pullback `Γ(f*D)` were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaSource {
    Supplied,
    /// Smith form of the pulled generators over a one-variable source.
    Smith,
    /// `f` is a submersion, so the pulled generators suffice.
    Submersion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseChangeReport {
    pub alpha_d_surjective_at_order_k: bool,
    /// Nonzero kernel of `α` for `V/D`, which is the cokernel of `α_D`.
    pub ker_alpha_nontrivial: bool,
    /// A generator of `Γ(f*D)` outside `f*⟨D⟩ + I_m^{k+1}`.
    pub witness: Option<Vec<Polynomial>>,
    pub pulled_generators: Vec<Vec<Polynomial>>,
    pub gamma_generators: Vec<Vec<Polynomial>>,
    pub gamma_source: GammaSource,
}

/// Compare the algebraic pullback `f*⟨D⟩` with the module of sections of
/// the pointwise pullback `f*D`, modulo `I_m^{k+1}` at the source point `m`.
/// `D` is a submodule of the free module of rank `v_rank` on the target.
pub fn base_change_comparison(
    v_rank: usize,
    d: &ModuleBasis,
    f: &PolyMap,
    m: &[Rational],
    k: u32,
    supplied: Option<Vec<Vec<Polynomial>>>,
) -> Result<BaseChangeReport> {
    if d.rank() != v_rank {
        return Err(Error::DimensionMismatch { expected: v_rank, found: d.rank() });
    }
    if d.nvars() != f.target_nvars() {
        return Err(Error::DimensionMismatch { expected: f.target_nvars(), found: d.nvars() });
    }
    let s = f.source_nvars();
    if m.len() != s {
        return Err(Error::DimensionMismatch { expected: s, found: m.len() });
    }
    let pulled: Vec<Vec<Polynomial>> =
        d.columns().iter().map(|c| c.iter().map(|e| f.pull(e)).collect::<Result<_>>()).collect::<Result<_>>()?;
    let (gamma, source) = match supplied {
        Some(g) => {
            for c in &g {
                if c.len() != v_rank || c.iter().any(|p| p.nvars() != s) {
                    return Err(Error::DimensionMismatch { expected: v_rank, found: c.len() });
                }
            }
            (g, GammaSource::Supplied)
        }
        None if s == 1 => (smith_sections(v_rank, &pulled)?, GammaSource::Smith),
        None if is_submersion(f)? => (pulled.clone(), GammaSource::Submersion),
        None => {
            return Err(Error::Unsupported(
                "sections of the pullback need a one-variable source, a submersion, or supplied generators".into(),
            ))
        }
    };
    let mut cols = pulled.clone();
    for mono in Monomial::all_of_degree(s, k + 1) {
        let centered = Polynomial::monomial(mono, Rational::from_integer(1.into()));
        let gen = centered.compose(
            &(0..s).map(|i| &Polynomial::var(s, i) - &Polynomial::constant(s, m[i].clone())).collect::<Vec<_>>(),
        )?;
        for r in 0..v_rank {
            let mut v = vec![Polynomial::zero(s); v_rank];
            v[r] = gen.clone();
            cols.push(v);
        }
    }
    let target = ModuleBasis::new(v_rank, s, cols)?;
    let mut witness = None;
    for g in &gamma {
        if !module_member(g, &target)? {
            witness = Some(g.clone());
            break;
        }
    }
    let surjective = witness.is_none();
    Ok(BaseChangeReport {
        alpha_d_surjective_at_order_k: surjective,
        ker_alpha_nontrivial: !surjective,
        witness,
        pulled_generators: pulled,
        gamma_generators: gamma,
        gamma_source: source,
    })
}

/// Over ℚ[y]: with `U·G·V = diag(dᵢ)`, a section lies pointwise in the span
/// iff its Smith coordinates are multiples of the real-rooted parts `ρ(dᵢ)`.
fn smith_sections(v_rank: usize, pulled: &[Vec<Polynomial>]) -> Result<Vec<Vec<Polynomial>>> {
    let g = PolyMatrix::from_columns(v_rank, 1, pulled)?;
    let snf = smith_normal_form(&g)?;
    let mut out = Vec::new();
    for (i, d) in snf.invariant_factors().iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let rho: UPoly = d.real_rooted_part();
        let rp = rho.to_polynomial(1, 0);
        out.push((0..v_rank).map(|r| snf.u_inv.get(r, i) * &rp).collect());
    }
    Ok(out)
}

/// Whether the maximal minors of the Jacobian generate the unit ideal.
fn is_submersion(f: &PolyMap) -> Result<bool> {
    let (t, s) = (f.target_nvars(), f.source_nvars());
    if t > s {
        return Ok(false);
    }
    if t == 0 {
        return Ok(true);
    }
    let minors: Vec<Polynomial> = f.jacobian().minors(t)?.into_iter().filter(|p| !p.is_zero()).collect();
    ModuleBasis::ideal(s, minors)?.is_everything()
}
