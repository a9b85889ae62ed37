//! Finitely presented modules `coker P` over ℚ[x₁..xₙ]: fibers, invisible
//! elements, univariate fiber-determination, and the passage to bundles.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::{BoxDomain, SubbundlePresentation};
use crate::error::{check_len, Error, Result};
use crate::grobner::{groebner_basis, module_member, radical_member, smith_normal_form, ModuleBasis};
use crate::polyalg::univariate::UPoly;
use crate::polyalg::{linalg, PolyMatrix, Point, Polynomial, Rational, DEFAULT_PIVOT_TOL};

pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_SEED: u64 = 0;

/// `Q = ℚ[x]ᵖ / im P` with `P` of shape `p × q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FPModule {
    presentation: PolyMatrix,
}

impl FPModule {
    pub fn new(free_rank: usize, presentation: PolyMatrix) -> Result<Self> {
        if presentation.rows() != free_rank {
            return Err(Error::DimensionMismatch { expected: free_rank, found: presentation.rows() });
        }
        Ok(FPModule { presentation })
    }

    pub fn free(nvars: usize, rank: usize) -> Self {
        FPModule { presentation: PolyMatrix::zeros(rank, 0, nvars) }
    }

    pub fn nvars(&self) -> usize {
        self.presentation.nvars()
    }

    pub fn free_rank(&self) -> usize {
        self.presentation.rows()
    }

    pub fn presentation(&self) -> &PolyMatrix {
        &self.presentation
    }

    pub fn relations(&self) -> ModuleBasis {
        ModuleBasis::from_matrix(&self.presentation)
    }

    /// Whether `v` is zero in `Q`.
    pub fn is_zero_element(&self, v: &[Polynomial]) -> Result<bool> {
        module_member(v, &self.relations())
    }

    pub fn fiber_dim(&self, m: &Point) -> Result<usize> {
        fp_fiber_dim(self, m)
    }
}

/// `p − rank P(m)`
pub fn fp_fiber_dim(q: &FPModule, m: &Point) -> Result<usize> {
    check_len(q.nvars(), m.len())?;
    Ok(q.free_rank() - q.presentation.rank_at(m, DEFAULT_PIVOT_TOL)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InvisibilityStatus {
    CertifiedInvisible,
    CertifiedVisible,
    SampledInvisibleUncertified,
}

impl InvisibilityStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvisibilityStatus::CertifiedInvisible => "certified_invisible",
            InvisibilityStatus::CertifiedVisible => "certified_visible",
            InvisibilityStatus::SampledInvisibleUncertified => "sampled_invisible_uncertified",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvisibilityVerdict {
    pub status: InvisibilityStatus,
    /// Rational point where the fiber image of `v` is nonzero.
    pub witness: Option<Vec<Rational>>,
    /// Minor sizes `k` whose radical-membership certificate was checked.
    pub certified_orders: Vec<usize>,
    /// Points tested on the sampling path.
    pub samples_checked: usize,
}

/// Whether the image of `v` in the fiber at `m` is nonzero.
pub fn visible_at(q: &FPModule, v: &[Polynomial], m: &[Rational]) -> Result<bool> {
    check_len(q.free_rank(), v.len())?;
    let p = q.presentation.eval_rational(m)?;
    let vm: Vec<Rational> = v.iter().map(|f| f.eval_rational(m)).collect::<Result<_>>()?;
    let base = linalg::rank_rational(&p);
    let aug: Vec<Vec<Rational>> = p.into_iter().zip(vm).map(|(mut row, x)| {
        row.push(x);
        row
    }).collect();
    Ok(linalg::rank_rational(&aug) > base)
}

/// Decide whether `v` vanishes in every real fiber of `q`. A symbolic
/// certificate (each `k`-minor of `[P | v]` through `v` lies in the radical
/// of the `k`-minor ideal of `P`) proves invisibility; otherwise seeded
/// sampling looks for a visible point.
pub fn invisible_test(q: &FPModule, v: &[Polynomial], samples: usize, seed: u64) -> Result<InvisibilityVerdict> {
    check_len(q.free_rank(), v.len())?;
    if let Some(orders) = invisibility_certificate(q, v)? {
        return Ok(InvisibilityVerdict {
            status: InvisibilityStatus::CertifiedInvisible,
            witness: None,
            certified_orders: orders,
            samples_checked: 0,
        });
    }
    let candidates = candidate_points(q, v);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = BoxDomain::unbounded(q.nvars());
    let mut checked = 0;
    let random = (0..samples).map(|_| window.sample(&mut rng)).collect::<Vec<_>>();
    for m in candidates.into_iter().chain(random) {
        checked += 1;
        if visible_at(q, v, &m)? {
            return Ok(InvisibilityVerdict {
                status: InvisibilityStatus::CertifiedVisible,
                witness: Some(m),
                certified_orders: vec![],
                samples_checked: checked,
            });
        }
    }
    Ok(InvisibilityVerdict {
        status: InvisibilityStatus::SampledInvisibleUncertified,
        witness: None,
        certified_orders: vec![],
        samples_checked: checked,
    })
}

fn invisibility_certificate(q: &FPModule, v: &[Polynomial]) -> Result<Option<Vec<usize>>> {
    let (p, cols, n) = (q.free_rank(), q.presentation.cols(), q.nvars());
    let pv = q.presentation.hstack(&PolyMatrix::from_columns(p, n, &[v.to_vec()])?)?;
    let mut orders = Vec::new();
    for k in 1..=p.min(cols + 1) {
        let ideal_gens: Vec<Polynomial> = if k <= cols {
            q.presentation.minors(k)?.into_iter().filter(|f| !f.is_zero()).collect()
        } else {
            vec![]
        };
        let ideal = groebner_basis(&ModuleBasis::ideal(n, ideal_gens)?);
        for rows in (0..p).combinations(k) {
            for sub in (0..cols).combinations(k - 1) {
                let mut cs = sub.clone();
                cs.push(cols);
                let f = pv.submatrix(&rows, &cs).determinant()?;
                if f.is_zero() || module_member(std::slice::from_ref(&f), &ideal)? {
                    continue;
                }
                if !radical_member(&f, &ideal)? {
                    return Ok(None);
                }
            }
        }
        orders.push(k);
    }
    Ok(Some(orders))
}

/// Deterministic points worth testing first: the origin and rational zeros
/// of the minors of `P` along the coordinate axes.
fn candidate_points(q: &FPModule, v: &[Polynomial]) -> Vec<Vec<Rational>> {
    let n = q.nvars();
    let zero = Rational::from_integer(0.into());
    let mut out = vec![vec![zero.clone(); n]];
    let mut polys: Vec<Polynomial> = v.to_vec();
    let g = &q.presentation;
    for k in 1..=g.rows().min(g.cols()) {
        polys.extend(g.minors(k).unwrap_or_default());
    }
    for f in polys.iter().filter(|f| !f.is_zero() && !f.is_constant()) {
        for var in 0..n {
            let subs: Vec<Polynomial> = (0..n)
                .map(|j| if j == var { Polynomial::var(1, 0) } else { Polynomial::zero(1) })
                .collect();
            let Ok(restricted) = f.compose(&subs) else { continue };
            let Ok(u) = UPoly::from_polynomial(&restricted) else { continue };
            if u.is_zero() {
                continue;
            }
            for r in u.rational_roots().unwrap_or_default() {
                let mut m = vec![zero.clone(); n];
                m[var] = r;
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// The invisible submodule of a univariate `Q` and the fiber-determined
/// quotient `Q / inv(Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberDetermination {
    /// Generators of `inv(Q)` as vectors in the free module.
    pub invisible_generators: Vec<Vec<Polynomial>>,
    pub quotient: FPModule,
}

/// Over ℚ[x], with `U·P·V = diag(d₁, …)`, the invisible submodule is
/// `⊕ (ρᵢ)/(dᵢ)` in Smith coordinates, where `ρᵢ` is the product of the
/// irreducible factors of `dᵢ` having a real root.
pub fn fiber_determination_univariate(q: &FPModule) -> Result<FiberDetermination> {
    if q.nvars() != 1 {
        return Err(Error::NotUnivariate(q.nvars()));
    }
    let p = q.free_rank();
    let snf = smith_normal_form(&q.presentation)?;
    let mut inv = Vec::new();
    let mut quotient_cols = Vec::new();
    for (i, d) in snf.invariant_factors().iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let rho = d.real_rooted_part();
        let col: Vec<Polynomial> = (0..p).map(|r| snf.u_inv.get(r, i) * &rho.to_polynomial(1, 0)).collect();
        if !d.divides(&rho) {
            inv.push(col.clone());
        }
        quotient_cols.push(col);
    }
    let quotient = FPModule::new(p, PolyMatrix::from_columns(p, 1, &quotient_cols)?)?;
    Ok(FiberDetermination { invisible_generators: inv, quotient })
}

/// The bundle `ℝᵖ / span D(m)` with `D` the reduced Gröbner basis of `im P`;
/// its fibers agree with those of `Q` at every point.
pub fn module_to_bundle(q: &FPModule) -> SubbundlePresentation {
    let gb = groebner_basis(&q.relations());
    let gens = PolyMatrix::from_columns(q.free_rank(), q.nvars(), gb.columns()).expect("Gröbner columns have rank p");
    SubbundlePresentation::new(q.free_rank(), gens, BoxDomain::unbounded(q.nvars())).expect("shapes agree")
}
