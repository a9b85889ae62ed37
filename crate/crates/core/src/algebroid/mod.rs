//! Anchored brackets on trivial bundles: axiom checks, ideals, bracket
//! synthesis from an anchor, and obstructions to quotient brackets.

use std::collections::BTreeMap;

use crate::error::{check_len, Error, Result};
use crate::grobner::{groebner_basis, lift_combination, module_member, ModuleBasis};
use crate::modules::{invisible_test, FPModule, InvisibilityStatus, DEFAULT_SAMPLES};
use crate::polyalg::{linalg, Monomial, PolyMatrix, Polynomial, Rational};

/// Default degree bound for multipliers in the obstruction search.
pub const DEFAULT_OBSTRUCTION_DEGREE: u32 = 2;
/// Bracket-and-adjoin rounds when suggesting an involutive closure.
pub const CLOSURE_ROUNDS: usize = 5;

/// `Σ Xₗ ∂ₗ f`
pub fn apply_field(field: &[Polynomial], f: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(f.nvars());
    for (l, x) in field.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        out += &(x * &f.derivative(l).expect("field length matches variables"));
    }
    out
}

/// Lie bracket of polynomial vector fields.
pub fn lie_bracket(x: &[Polynomial], y: &[Polynomial]) -> Vec<Polynomial> {
    x.iter().zip(y).map(|(xl, yl)| &apply_field(x, yl) - &apply_field(y, xl)).collect()
}

/// A bracket on sections of a trivial bundle of rank `N` over ℝⁿ together
/// with its anchor. Sections are coefficient vectors of length `N`.
pub trait SectionBracket {
    fn rank(&self) -> usize;
    fn nvars(&self) -> usize;
    /// The vector field `ρ(a)`.
    fn anchor_of(&self, a: &[Polynomial]) -> Vec<Polynomial>;
    fn bracket(&self, a: &[Polynomial], b: &[Polynomial]) -> Result<Vec<Polynomial>>;
}

/// Anchor matrix (`n × N`, column `j` is `ρ(eⱼ)`) and structure functions
/// `[eᵢ, eⱼ] = Σₖ c[i][j][k] eₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchoredBracket {
    anchor: PolyMatrix,
    c: Vec<Vec<Vec<Polynomial>>>,
}

impl AnchoredBracket {
    /// Structure functions from entries `(i, j, k, c_ij^k)` with `i < j`;
    /// the rest follows by antisymmetry.
    pub fn new(anchor: PolyMatrix, entries: Vec<(usize, usize, usize, Polynomial)>) -> Result<Self> {
        let (n, rank) = (anchor.nvars(), anchor.cols());
        if anchor.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: anchor.rows() });
        }
        let mut c = vec![vec![vec![Polynomial::zero(n); rank]; rank]; rank];
        for (i, j, k, p) in entries {
            if i >= j || j >= rank || k >= rank {
                return Err(Error::OutOfRange(format!("structure index ({i}, {j}, {k}) needs i < j < {rank}, k < {rank}")));
            }
            if p.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.nvars() });
            }
            c[j][i][k] = -&p;
            c[i][j][k] = p;
        }
        Ok(AnchoredBracket { anchor, c })
    }

    pub fn anchor(&self) -> &PolyMatrix {
        &self.anchor
    }

    pub fn structure(&self, i: usize, j: usize) -> &[Polynomial] {
        &self.c[i][j]
    }

    /// Nonzero entries `(i, j, k, c_ij^k)` with `i < j`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Polynomial)> {
        let r = self.rank();
        let mut out = Vec::new();
        for i in 0..r {
            for j in i + 1..r {
                for k in 0..r {
                    if !self.c[i][j][k].is_zero() {
                        out.push((i, j, k, self.c[i][j][k].clone()));
                    }
                }
            }
        }
        out
    }

    pub fn frame(&self, i: usize) -> Vec<Polynomial> {
        frame(self.rank(), self.nvars(), i)
    }
}

fn frame(rank: usize, nvars: usize, i: usize) -> Vec<Polynomial> {
    (0..rank).map(|k| if k == i { Polynomial::one(nvars) } else { Polynomial::zero(nvars) }).collect()
}

impl SectionBracket for AnchoredBracket {
    fn rank(&self) -> usize {
        self.anchor.cols()
    }

    fn nvars(&self) -> usize {
        self.anchor.nvars()
    }

    fn anchor_of(&self, a: &[Polynomial]) -> Vec<Polynomial> {
        self.anchor.mul_vec(a).expect("section length is the rank")
    }

    fn bracket(&self, a: &[Polynomial], b: &[Polynomial]) -> Result<Vec<Polynomial>> {
        let r = self.rank();
        check_len(r, a.len())?;
        check_len(r, b.len())?;
        let n = self.nvars();
        let (ra, rb) = (self.anchor_of(a), self.anchor_of(b));
        let mut out: Vec<Polynomial> = (0..r).map(|j| &apply_field(&ra, &b[j]) - &apply_field(&rb, &a[j])).collect();
        for i in 0..r {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..r {
                if b[j].is_zero() || i == j {
                    continue;
                }
                let fg = &a[i] * &b[j];
                for (k, c) in self.c[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] += &(&fg * c);
                    }
                }
            }
        }
        debug_assert!(out.iter().all(|p| p.nvars() == n));
        Ok(out)
    }
}

/// A failed Leibniz identity `[eᵢ, f·eⱼ] = f[eᵢ, eⱼ] + ρ(eᵢ)(f) eⱼ`
/// (or its mirror in the first slot).
#[derive(Clone, Debug, PartialEq)]
pub struct LeibnizFailure {
    pub i: usize,
    pub j: usize,
    pub f: Polynomial,
    pub first_slot: bool,
    pub residual: Vec<Polynomial>,
}

/// Check the Leibniz rule on frame pairs with `f` ranging over all
/// monomials of degree ≤ 2; the identity is linear in `f`, so this is the
/// same as checking a generic degree-2 polynomial.
pub fn check_leibniz<B: SectionBracket>(l: &B) -> Result<Option<LeibnizFailure>> {
    let (r, n) = (l.rank(), l.nvars());
    let tests: Vec<Polynomial> =
        Monomial::all_up_to_degree(n, 2).into_iter().map(|m| Polynomial::monomial(m, Rational::from_integer(1.into()))).collect();
    for i in 0..r {
        for j in 0..r {
            let (ei, ej) = (frame(r, n, i), frame(r, n, j));
            let base = l.bracket(&ei, &ej)?;
            for f in &tests {
                let fej: Vec<Polynomial> = ej.iter().map(|p| p * f).collect();
                let lhs = l.bracket(&ei, &fej)?;
                let df = apply_field(&l.anchor_of(&ei), f);
                let residual: Vec<Polynomial> =
                    (0..r).map(|k| &(&lhs[k] - &(f * &base[k])) - &(&df * &ej[k])).collect();
                if residual.iter().any(|p| !p.is_zero()) {
                    return Ok(Some(LeibnizFailure { i, j, f: f.clone(), first_slot: false, residual }));
                }
                let fei: Vec<Polynomial> = ei.iter().map(|p| p * f).collect();
                let lhs = l.bracket(&fei, &ej)?;
                let df = apply_field(&l.anchor_of(&ej), f);
                let residual: Vec<Polynomial> =
                    (0..r).map(|k| &(&lhs[k] - &(f * &base[k])) + &(&df * &ei[k])).collect();
                if residual.iter().any(|p| !p.is_zero()) {
                    return Ok(Some(LeibnizFailure { i, j, f: f.clone(), first_slot: true, residual }));
                }
            }
        }
    }
    Ok(None)
}

/// `Jac(a, b, c) = [a, [b, c]] + [b, [c, a]] + [c, [a, b]]`
pub fn jacobiator<B: SectionBracket>(l: &B, a: &[Polynomial], b: &[Polynomial], c: &[Polynomial]) -> Result<Vec<Polynomial>> {
    let t1 = l.bracket(a, &l.bracket(b, c)?)?;
    let t2 = l.bracket(b, &l.bracket(c, a)?)?;
    let t3 = l.bracket(c, &l.bracket(a, b)?)?;
    Ok((0..t1.len()).map(|k| &(&t1[k] + &t2[k]) + &t3[k]).collect())
}

/// Jacobiators of frame triples `i < j < k`.
pub fn check_jacobi<B: SectionBracket>(l: &B) -> Result<BTreeMap<(usize, usize, usize), Vec<Polynomial>>> {
    let (r, n) = (l.rank(), l.nvars());
    let mut out = BTreeMap::new();
    for i in 0..r {
        for j in i + 1..r {
            for k in j + 1..r {
                out.insert((i, j, k), jacobiator(l, &frame(r, n, i), &frame(r, n, j), &frame(r, n, k))?);
            }
        }
    }
    Ok(out)
}

pub fn jacobi_is_zero(table: &BTreeMap<(usize, usize, usize), Vec<Polynomial>>) -> bool {
    table.values().all(|v| v.iter().all(Polynomial::is_zero))
}

/// The first frame triple whose Jacobiator has a nonzero anchor image.
pub fn check_weak_jacobi<B: SectionBracket>(l: &B) -> Result<Option<(usize, usize, usize)>> {
    for (idx, jac) in check_jacobi(l)? {
        if l.anchor_of(&jac).iter().any(|p| !p.is_zero()) {
            return Ok(Some(idx));
        }
    }
    Ok(None)
}

/// Whether `ρ([a, b]) = [ρ(a), ρ(b)]` holds identically.
pub fn anchor_is_morphism<B: SectionBracket>(l: &B, a: &[Polynomial], b: &[Polynomial]) -> Result<bool> {
    let lhs = l.anchor_of(&l.bracket(a, b)?);
    let rhs = lie_bracket(&l.anchor_of(a), &l.anchor_of(b));
    Ok(lhs == rhs)
}

/// A frame section `e_j` and a generator `d` with `[e_j, d] ∉ ⟨D⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealWitness {
    pub frame: usize,
    pub generator: Vec<Polynomial>,
    pub bracket: Vec<Polynomial>,
}

/// Whether `[Γ(A), ⟨D⟩] ⊆ ⟨D⟩`, tested on Gröbner generators of `D` against
/// frame sections.
pub fn check_ideal<B: SectionBracket>(d: &ModuleBasis, l: &B) -> Result<Option<IdealWitness>> {
    check_len(l.rank(), d.rank())?;
    let gb = groebner_basis(d);
    for g in gb.columns() {
        for j in 0..l.rank() {
            let b = l.bracket(&frame(l.rank(), l.nvars(), j), g)?;
            if !module_member(&b, &gb)? {
                return Ok(Some(IdealWitness { frame: j, generator: g.clone(), bracket: b }));
            }
        }
    }
    Ok(None)
}

/// A pair `(e_a, σ)` with `σ ∈ ⟨D⟩` but `[e_a, σ]` outside `D` at `point`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionWitness {
    pub frame: usize,
    pub sigma: Vec<Polynomial>,
    pub bracket: Vec<Polynomial>,
    pub point: Vec<Rational>,
}

/// Search `σ = p·dᵢ` (monomial `p` of degree ≤ `degree_bound`, `dᵢ` a
/// column of `D`) against frame sections for a bracket that leaves `D`
/// pointwise. `None` means none up to the bound.
pub fn quotient_obstruction<B: SectionBracket>(
    d: &ModuleBasis,
    l: &B,
    degree_bound: u32,
    seed: u64,
) -> Result<Option<ObstructionWitness>> {
    let (r, n) = (l.rank(), l.nvars());
    check_len(r, d.rank())?;
    let dmat = PolyMatrix::from_columns(r, n, d.columns())?;
    let q = FPModule::new(r, dmat.clone())?;
    for deg in 0..=degree_bound {
        for mono in Monomial::all_of_degree(n, deg) {
            for col in d.columns() {
                let sigma: Vec<Polynomial> = col.iter().map(|p| p.mul_term(&mono, &Rational::from_integer(1.into()))).collect();
                if sigma.iter().all(Polynomial::is_zero) {
                    continue;
                }
                for a in 0..r {
                    let b = l.bracket(&frame(r, n, a), &sigma)?;
                    let verdict = invisible_test(&q, &b, DEFAULT_SAMPLES, seed)?;
                    if verdict.status != InvisibilityStatus::CertifiedVisible {
                        continue;
                    }
                    let m = verdict.witness.expect("visible verdicts carry a point");
                    if in_span_at(&dmat, &sigma, &m)? && !in_span_at(&dmat, &b, &m)? {
                        return Ok(Some(ObstructionWitness { frame: a, sigma, bracket: b, point: m }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Exact test `v(m) ∈ span D(m)`.
pub fn in_span_at(d: &PolyMatrix, v: &[Polynomial], m: &[Rational]) -> Result<bool> {
    let dm = d.eval_rational(m)?;
    let vm: Vec<Rational> = v.iter().map(|p| p.eval_rational(m)).collect::<Result<_>>()?;
    let base = linalg::rank_rational(&dm);
    let aug: Vec<Vec<Rational>> = dm
        .into_iter()
        .zip(vm)
        .map(|(mut row, x)| {
            row.push(x);
            row
        })
        .collect();
    Ok(linalg::rank_rational(&aug) == base)
}

/// Structure functions making the anchor a bracket morphism on frames:
/// lift `[ρeᵢ, ρeⱼ]` through the anchor columns and antisymmetrize. The
/// result is almost-Lie.
pub fn synthesize_bracket(anchor: &PolyMatrix) -> Result<AnchoredBracket> {
    let (n, r) = (anchor.nvars(), anchor.cols());
    if anchor.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: anchor.rows() });
    }
    let fields = anchor.columns();
    let module = ModuleBasis::new(n, n, fields.clone())?;
    let lift = |i: usize, j: usize| -> Result<Vec<Polynomial>> {
        let w = lie_bracket(&fields[i], &fields[j]);
        lift_combination(&w, &module)?.ok_or_else(|| Error::NotInvolutive {
            i,
            j,
            field: format!("{w:?}"),
        })
    };
    let half = Rational::new(1.into(), 2.into());
    let mut entries = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let cij = lift(i, j)?;
            let cji = lift(j, i)?;
            for k in 0..r {
                let c = (&cij[k] - &cji[k]).scale(&half);
                if !c.is_zero() {
                    entries.push((i, j, k, c));
                }
            }
        }
    }
    AnchoredBracket::new(anchor.clone(), entries)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoliationReport {
    /// Reduced Gröbner basis of the module generated by the anchor columns.
    pub basis: ModuleBasis,
    pub involutive: bool,
    /// First generator pair whose bracket leaves the module.
    pub failing_pair: Option<(usize, usize)>,
    /// Generators after bracket-and-adjoin, when the input was not
    /// involutive.
    pub closure: Option<Vec<Vec<Polynomial>>>,
    /// Whether the closure is involutive within the round limit.
    pub closure_involutive: bool,
}

fn first_unclosed(gens: &[Vec<Polynomial>], n: usize) -> Result<Vec<(usize, usize, Vec<Polynomial>)>> {
    let module = ModuleBasis::new(n, n, gens.to_vec())?;
    let gb = groebner_basis(&module);
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let w = lie_bracket(&gens[i], &gens[j]);
            if !module_member(&w, &gb)? {
                out.push((i, j, w));
            }
        }
    }
    Ok(out)
}

/// The singular foliation `ρ(Γ(A))`: its module, an involutivity verdict,
/// and a closure suggestion otherwise.
pub fn foliation_of(anchor: &PolyMatrix) -> Result<FoliationReport> {
    let n = anchor.nvars();
    if anchor.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: anchor.rows() });
    }
    let gens = anchor.columns();
    let basis = groebner_basis(&ModuleBasis::new(n, n, gens.clone())?);
    let missing = first_unclosed(&gens, n)?;
    if missing.is_empty() {
        return Ok(FoliationReport { basis, involutive: true, failing_pair: None, closure: None, closure_involutive: true });
    }
    let failing_pair = Some((missing[0].0, missing[0].1));
    let mut closure = gens;
    let mut pending = missing;
    for _ in 0..CLOSURE_ROUNDS {
        if pending.is_empty() {
            break;
        }
        for (_, _, w) in pending {
            let gb = groebner_basis(&ModuleBasis::new(n, n, closure.clone())?);
            if !module_member(&w, &gb)? {
                closure.push(w);
            }
        }
        pending = first_unclosed(&closure, n)?;
    }
    Ok(FoliationReport { basis, involutive: false, failing_pair, closure: Some(closure), closure_involutive: pending.is_empty() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{int, Variables};

    fn ring(names: &[&str]) -> Variables {
        Variables::new(names.iter().copied()).unwrap()
    }

    fn anchor(v: &Variables, rows: &[&[&str]]) -> PolyMatrix {
        PolyMatrix::from_rows(v.len(), rows.iter().map(|r| r.iter().map(|s| v.parse(s).unwrap()).collect()).collect()).unwrap()
    }

    fn section(v: &Variables, s: &[&str]) -> Vec<Polynomial> {
        s.iter().map(|p| v.parse(p).unwrap()).collect()
    }

    #[test]
    fn tangent_frame_bracket() {
        let v = ring(&["x"]);
        let l = AnchoredBracket::new(anchor(&v, &[&["1"]]), vec![]).unwrap();
        assert_eq!(l.bracket(&section(&v, &["1"]), &section(&v, &["x"])).unwrap(), section(&v, &["1"]));
        let a = section(&v, &["x^2 + 1"]);
        assert!(l.bracket(&a, &a).unwrap().iter().all(Polynomial::is_zero));
        assert!(check_leibniz(&l).unwrap().is_none());
    }

    #[test]
    fn twisted_bracket_is_lie() {
        let v = ring(&["x"]);
        let l = AnchoredBracket::new(anchor(&v, &[&["1", "0"]]), vec![]).unwrap();
        let b = l.bracket(&section(&v, &["x", "0"]), &section(&v, &["0", "x^3"])).unwrap();
        assert_eq!(b, section(&v, &["0", "3*x^3"]));
        assert!(jacobi_is_zero(&check_jacobi(&l).unwrap()));
        assert!(check_weak_jacobi(&l).unwrap().is_none());
    }

    #[test]
    fn so3_on_a_point() {
        let one = Polynomial::one(0);
        let l = AnchoredBracket::new(
            PolyMatrix::zeros(0, 3, 0),
            vec![(0, 1, 2, one.clone()), (1, 2, 0, one.clone()), (0, 2, 1, -&one)],
        )
        .unwrap();
        let table = check_jacobi(&l).unwrap();
        assert_eq!(table.len(), 1);
        assert!(jacobi_is_zero(&table));
    }

    #[test]
    fn weak_jacobi_violation() {
        // [e0,e1] = e2, [e1,e2] = e1: Jac(e0,e1,e2) = [e0,e1] = e2, and ρ(e2) = ∂_x
        let v = ring(&["x"]);
        let one = Polynomial::one(1);
        let l = AnchoredBracket::new(anchor(&v, &[&["0", "0", "1"]]), vec![(0, 1, 2, one.clone()), (1, 2, 1, one)]).unwrap();
        assert!(!jacobi_is_zero(&check_jacobi(&l).unwrap()));
        assert_eq!(check_weak_jacobi(&l).unwrap(), Some((0, 1, 2)));
    }

    struct Corrupted(AnchoredBracket);

    impl SectionBracket for Corrupted {
        fn rank(&self) -> usize {
            self.0.rank()
        }
        fn nvars(&self) -> usize {
            self.0.nvars()
        }
        fn anchor_of(&self, a: &[Polynomial]) -> Vec<Polynomial> {
            self.0.anchor_of(a)
        }
        fn bracket(&self, a: &[Polynomial], b: &[Polynomial]) -> Result<Vec<Polynomial>> {
            // derivation term dropped from the second slot
            let mut out = self.0.bracket(a, b)?;
            let ra = self.0.anchor_of(a);
            for (o, bj) in out.iter_mut().zip(b) {
                *o -= &apply_field(&ra, bj);
            }
            Ok(out)
        }
    }

    #[test]
    fn corrupted_bracket_fails_leibniz() {
        let v = ring(&["x"]);
        let l = Corrupted(AnchoredBracket::new(anchor(&v, &[&["1"]]), vec![]).unwrap());
        let w = check_leibniz(&l).unwrap().unwrap();
        assert_eq!((w.i, w.j), (0, 0));
        let zero = AnchoredBracket::new(PolyMatrix::zeros(1, 2, 1), vec![(0, 1, 1, Polynomial::from_int(1, 3))]).unwrap();
        assert!(check_leibniz(&zero).unwrap().is_none());
    }

    #[test]
    fn ideals() {
        let v = ring(&["x"]);
        let l = AnchoredBracket::new(anchor(&v, &[&["1"]]), vec![]).unwrap();
        let d = ModuleBasis::new(1, 1, vec![section(&v, &["x"])]).unwrap();
        let w = check_ideal(&d, &l).unwrap().unwrap();
        assert_eq!((w.frame, w.generator.clone(), w.bracket), (0, section(&v, &["x"]), section(&v, &["1"])));
        let d2 = ModuleBasis::new(1, 1, vec![section(&v, &["x^2"]), section(&v, &["x"])]).unwrap();
        assert!(check_ideal(&d2, &l).unwrap().is_some());
        assert!(check_ideal(&ModuleBasis::new(1, 1, vec![]).unwrap(), &l).unwrap().is_none());
    }

    #[test]
    fn obstruction() {
        let v = ring(&["y"]);
        let l = AnchoredBracket::new(anchor(&v, &[&["1", "0"]]), vec![]).unwrap();
        let d = ModuleBasis::new(2, 1, vec![section(&v, &["0", "y"])]).unwrap();
        let w = quotient_obstruction(&d, &l, DEFAULT_OBSTRUCTION_DEGREE, 0).unwrap().unwrap();
        assert_eq!((w.frame, w.sigma.clone(), w.point.clone()), (0, section(&v, &["0", "y"]), vec![int(0)]));
        assert_eq!(w.bracket, section(&v, &["0", "1"]));
        let d = ModuleBasis::new(2, 1, vec![section(&v, &["0", "y^2"])]).unwrap();
        assert!(quotient_obstruction(&d, &l, DEFAULT_OBSTRUCTION_DEGREE, 0).unwrap().is_none());
    }

    #[test]
    fn synthesis() {
        let v = ring(&["x"]);
        let l = synthesize_bracket(&anchor(&v, &[&["1", "x"]])).unwrap();
        assert_eq!(l.structure(0, 1), section(&v, &["1", "0"]).as_slice());
        assert!(check_leibniz(&l).unwrap().is_none());
        assert!(check_weak_jacobi(&l).unwrap().is_none());
        let v2 = ring(&["x", "y"]);
        let l = synthesize_bracket(&anchor(&v2, &[&["1", "0"], &["0", "1"]])).unwrap();
        assert!(l.entries().is_empty());
        let err = synthesize_bracket(&anchor(&v2, &[&["1", "0"], &["0", "x"]])).unwrap_err();
        assert!(matches!(err, Error::NotInvolutive { i: 0, j: 1, .. }));
    }

    #[test]
    fn foliations() {
        let v = ring(&["x"]);
        assert!(foliation_of(&anchor(&v, &[&["x"]])).unwrap().involutive);
        let v2 = ring(&["x", "y"]);
        let r = foliation_of(&anchor(&v2, &[&["1", "0"], &["0", "x"]])).unwrap();
        assert!(!r.involutive);
        assert_eq!(r.failing_pair, Some((0, 1)));
        let closure = r.closure.unwrap();
        assert_eq!(closure.len(), 3);
        assert_eq!(closure[2], section(&v2, &["0", "1"]));
        assert!(r.closure_involutive);
        assert!(foliation_of(&anchor(&v2, &[&["-y"], &["x"]])).unwrap().involutive);
    }
}
