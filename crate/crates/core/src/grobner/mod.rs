//! Gröbner bases of submodules of free modules over ℚ[x₁..xₙ], with
//! membership, lifts, syzygies, radical membership, and the Smith normal
//! form over ℚ[x].

mod smith;

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::error::{check_len, Error, Result};
use crate::polyalg::{Monomial, PolyMatrix, Polynomial, Rational};

pub use smith::{smith_normal_form, SmithForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum OrderKind {
    #[default]
    GrevLex,
    Lex,
}

/// A monomial order on polynomials, extended to free modules
/// position-over-term: a term in a lower-index component is larger than
/// any term in a higher-index component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct MonomialOrder {
    pub kind: OrderKind,
}

impl MonomialOrder {
    pub const GREVLEX: MonomialOrder = MonomialOrder { kind: OrderKind::GrevLex };
    pub const LEX: MonomialOrder = MonomialOrder { kind: OrderKind::Lex };

    pub fn cmp_monomials(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let (ea, eb) = (a.exponents(), b.exponents());
        match self.kind {
            OrderKind::Lex => ea.cmp(eb),
            OrderKind::GrevLex => a.degree().cmp(&b.degree()).then_with(|| {
                for (x, y) in ea.iter().zip(eb).rev() {
                    if x != y {
                        return y.cmp(x);
                    }
                }
                Ordering::Equal
            }),
        }
    }

    pub fn cmp_terms(&self, a: (usize, &Monomial), b: (usize, &Monomial)) -> Ordering {
        b.0.cmp(&a.0).then_with(|| self.cmp_monomials(a.1, b.1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Term {
    comp: usize,
    mono: Monomial,
    coeff: Rational,
}

/// Sparse module vector, terms in increasing order (leading term last).
type MVec = Vec<Term>;

fn to_mvec(v: &[Polynomial], order: &MonomialOrder) -> MVec {
    let mut out: MVec = v
        .iter()
        .enumerate()
        .flat_map(|(c, p)| p.terms().map(move |(m, a)| Term { comp: c, mono: m.clone(), coeff: a.clone() }))
        .collect();
    out.sort_by(|a, b| order.cmp_terms((a.comp, &a.mono), (b.comp, &b.mono)));
    out
}

fn from_mvec(v: &MVec, rank: usize, nvars: usize) -> Vec<Polynomial> {
    let mut out = vec![Polynomial::zero(nvars); rank];
    for t in v {
        out[t.comp].add_term(t.mono.clone(), t.coeff.clone());
    }
    out
}

/// `a - c·m·b`
fn sub_mul(a: &[Term], c: &Rational, m: &Monomial, b: &[Term], order: &MonomialOrder) -> MVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let shifted = |t: &Term| Term { comp: t.comp, mono: t.mono.mul(m), coeff: -(c * &t.coeff) };
    while i < a.len() || j < b.len() {
        if j == b.len() {
            out.push(a[i].clone());
            i += 1;
            continue;
        }
        let sb = shifted(&b[j]);
        if i == a.len() {
            out.push(sb);
            j += 1;
            continue;
        }
        match order.cmp_terms((a[i].comp, &a[i].mono), (sb.comp, &sb.mono)) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(sb);
                j += 1;
            }
            Ordering::Equal => {
                let s = &a[i].coeff + &sb.coeff;
                if !s.is_zero() {
                    out.push(Term { comp: sb.comp, mono: sb.mono, coeff: s });
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn make_monic(v: &mut MVec) {
    if let Some(lc) = v.last().map(|t| t.coeff.clone()) {
        if !lc.is_one() {
            let inv = lc.recip();
            for t in v.iter_mut() {
                t.coeff = &t.coeff * &inv;
            }
        }
    }
}

/// Full reduction of `f` modulo `basis`.
fn normal_form(f: MVec, basis: &[MVec], order: &MonomialOrder) -> MVec {
    let mut p = f;
    let mut rem: Vec<Term> = Vec::new();
    while let Some(lt) = p.last() {
        let reducer = basis.iter().find(|g| {
            let gl = g.last().unwrap();
            gl.comp == lt.comp && gl.mono.divides(&lt.mono)
        });
        match reducer {
            Some(g) => {
                let gl = g.last().unwrap();
                let q = lt.mono.div(&gl.mono).unwrap();
                let c = &lt.coeff / &gl.coeff;
                p = sub_mul(&p, &c, &q, g, order);
            }
            None => rem.push(p.pop().unwrap()),
        }
    }
    rem.reverse();
    rem
}

/// A list of generators of a submodule of the free module of rank `rank`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleBasis {
    rank: usize,
    nvars: usize,
    columns: Vec<Vec<Polynomial>>,
    order: MonomialOrder,
    is_groebner: bool,
}

impl ModuleBasis {
    pub fn new(rank: usize, nvars: usize, columns: Vec<Vec<Polynomial>>) -> Result<Self> {
        Self::with_order(rank, nvars, columns, MonomialOrder::default())
    }

    pub fn with_order(rank: usize, nvars: usize, columns: Vec<Vec<Polynomial>>, order: MonomialOrder) -> Result<Self> {
        for c in &columns {
            check_len(rank, c.len())?;
            for p in c {
                if p.nvars() != nvars {
                    return Err(Error::DimensionMismatch { expected: nvars, found: p.nvars() });
                }
            }
        }
        Ok(ModuleBasis { rank, nvars, columns, order, is_groebner: false })
    }

    /// The ideal generated by `gens` (free rank 1).
    pub fn ideal(nvars: usize, gens: Vec<Polynomial>) -> Result<Self> {
        Self::new(1, nvars, gens.into_iter().map(|g| vec![g]).collect())
    }

    pub fn from_matrix(m: &PolyMatrix) -> Self {
        ModuleBasis {
            rank: m.rows(),
            nvars: m.nvars(),
            columns: m.columns(),
            order: MonomialOrder::default(),
            is_groebner: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn columns(&self) -> &[Vec<Polynomial>] {
        &self.columns
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn is_groebner(&self) -> bool {
        self.is_groebner
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn to_matrix(&self) -> PolyMatrix {
        PolyMatrix::from_columns(self.rank, self.nvars, &self.columns).expect("columns have the ambient rank")
    }

    /// Whether the submodule is the whole free module.
    pub fn is_everything(&self) -> Result<bool> {
        let gb = groebner_basis(self);
        let lead = gb.leading_terms();
        Ok((0..self.rank).all(|c| lead.iter().any(|(lc, m)| *lc == c && m.is_one())))
    }

    /// Leading (component, monomial) of each column. Meaningful mostly for
    /// Gröbner bases.
    pub fn leading_terms(&self) -> Vec<(usize, Monomial)> {
        self.columns
            .iter()
            .filter_map(|c| to_mvec(c, &self.order).pop().map(|t| (t.comp, t.mono)))
            .collect()
    }

    fn mvecs(&self) -> Vec<MVec> {
        self.columns.iter().map(|c| to_mvec(c, &self.order)).filter(|v| !v.is_empty()).collect()
    }

    /// Remainder of `v` on division by the columns (a normal form when the
    /// basis is Gröbner).
    pub fn reduce(&self, v: &[Polynomial]) -> Result<Vec<Polynomial>> {
        check_len(self.rank, v.len())?;
        let r = normal_form(to_mvec(v, &self.order), &self.mvecs(), &self.order);
        Ok(from_mvec(&r, self.rank, self.nvars))
    }
}

fn buchberger(mut g: Vec<MVec>, rank: usize, order: &MonomialOrder) -> Vec<MVec> {
    for v in g.iter_mut() {
        make_monic(v);
    }
    g.retain(|v| !v.is_empty());
    let lead = |v: &MVec| {
        let t = v.last().unwrap();
        (t.comp, t.mono.clone())
    };
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..g.len() {
        for i in 0..j {
            if g[i].last().unwrap().comp == g[j].last().unwrap().comp {
                pairs.push((i, j));
            }
        }
    }
    while !pairs.is_empty() {
        let pos = (0..pairs.len())
            .min_by(|&a, &b| {
                let (ia, ja) = pairs[a];
                let (ib, jb) = pairs[b];
                let la = lead(&g[ia]).1.lcm(&lead(&g[ja]).1);
                let lb = lead(&g[ib]).1.lcm(&lead(&g[jb]).1);
                order.cmp_monomials(&la, &lb).then((ja, ia).cmp(&(jb, ib)))
            })
            .unwrap();
        let (i, j) = pairs.swap_remove(pos);
        let (ci, mi) = lead(&g[i]);
        let (_, mj) = lead(&g[j]);
        let l = mi.lcm(&mj);
        if rank == 1 && mi.is_coprime(&mj) {
            continue;
        }
        let in_pairs = |a: usize, b: usize| pairs.contains(&(a.min(b), a.max(b)));
        let chain = (0..g.len()).any(|k| {
            if k == i || k == j {
                return false;
            }
            let (ck, mk) = lead(&g[k]);
            ck == ci && mk.divides(&l) && !in_pairs(i, k) && !in_pairs(j, k)
        });
        if chain {
            continue;
        }
        let qi = l.div(&mi).unwrap();
        let qj = l.div(&mj).unwrap();
        let si: MVec = sub_mul(&[], &-Rational::one(), &qi, &g[i], order);
        let s = sub_mul(&si, &Rational::one(), &qj, &g[j], order);
        let mut r = normal_form(s, &g, order);
        if r.is_empty() {
            continue;
        }
        make_monic(&mut r);
        let n = g.len();
        let cr = r.last().unwrap().comp;
        g.push(r);
        for k in 0..n {
            if g[k].last().unwrap().comp == cr {
                pairs.push((k, n));
            }
        }
    }
    g
}

fn reduce_basis(g: Vec<MVec>, order: &MonomialOrder) -> Vec<MVec> {
    let leads: Vec<(usize, Monomial)> = g.iter().map(|v| (v.last().unwrap().comp, v.last().unwrap().mono.clone())).collect();
    let keep: Vec<usize> = (0..g.len())
        .filter(|&i| {
            !(0..g.len()).any(|j| {
                j != i
                    && leads[j].0 == leads[i].0
                    && leads[j].1.divides(&leads[i].1)
                    && (leads[j].1 != leads[i].1 || j < i)
            })
        })
        .collect();
    let minimal: Vec<MVec> = keep.iter().map(|&i| g[i].clone()).collect();
    let mut out: Vec<MVec> = (0..minimal.len())
        .map(|i| {
            let others: Vec<MVec> = minimal.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.clone()).collect();
            let mut v = minimal[i].clone();
            let lt = v.pop().unwrap();
            let mut tail = normal_form(v, &others, order);
            tail.push(lt);
            make_monic(&mut tail);
            tail
        })
        .collect();
    out.sort_by(|a, b| {
        let (ta, tb) = (a.last().unwrap(), b.last().unwrap());
        order.cmp_terms((tb.comp, &tb.mono), (ta.comp, &ta.mono))
    });
    out
}

/// Reduced Gröbner basis of the submodule generated by `gens`, under
/// `gens.order()`. Columns are monic and sorted by decreasing leading term.
pub fn groebner_basis(gens: &ModuleBasis) -> ModuleBasis {
    if gens.is_groebner {
        return gens.clone();
    }
    let order = gens.order;
    let g = reduce_basis(buchberger(gens.mvecs(), gens.rank, &order), &order);
    ModuleBasis {
        rank: gens.rank,
        nvars: gens.nvars,
        columns: g.iter().map(|v| from_mvec(v, gens.rank, gens.nvars)).collect(),
        order,
        is_groebner: true,
    }
}

/// Whether `v` lies in the submodule generated by `basis`.
pub fn module_member(v: &[Polynomial], basis: &ModuleBasis) -> Result<bool> {
    check_len(basis.rank, v.len())?;
    let gb = groebner_basis(basis);
    Ok(gb.reduce(v)?.iter().all(Polynomial::is_zero))
}

/// Augment each column `b_i` to `(b_i, e_i)` in rank `p + s`; a Gröbner
/// basis of this module under position-over-term eliminates the first `p`
/// components.
fn augmented_groebner(basis: &ModuleBasis) -> (Vec<MVec>, usize, usize) {
    let (p, s, n) = (basis.rank, basis.columns.len(), basis.nvars);
    let cols: Vec<Vec<Polynomial>> = basis
        .columns
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut v = b.clone();
            v.extend((0..s).map(|j| if i == j { Polynomial::one(n) } else { Polynomial::zero(n) }));
            v
        })
        .collect();
    let order = basis.order;
    let mv: Vec<MVec> = cols.iter().map(|c| to_mvec(c, &order)).filter(|v| !v.is_empty()).collect();
    (reduce_basis(buchberger(mv, p + s, &order), &order), p, s)
}

/// Coefficients `λ` with `Σ λᵢ bᵢ = v`, or `None` when `v` is not in the
/// submodule. The result is checked by re-expansion.
pub fn lift_combination(v: &[Polynomial], basis: &ModuleBasis) -> Result<Option<Vec<Polynomial>>> {
    check_len(basis.rank, v.len())?;
    let (p, s, n) = (basis.rank, basis.columns.len(), basis.nvars);
    if v.iter().all(Polynomial::is_zero) {
        return Ok(Some(vec![Polynomial::zero(n); s]));
    }
    if s == 0 {
        return Ok(None);
    }
    let (g, _, _) = augmented_groebner(basis);
    let mut ext = v.to_vec();
    ext.extend(std::iter::repeat_n(Polynomial::zero(n), s));
    let r = normal_form(to_mvec(&ext, &basis.order), &g, &basis.order);
    if r.iter().any(|t| t.comp < p) {
        return Ok(None);
    }
    let rv = from_mvec(&r, p + s, n);
    let lambda: Vec<Polynomial> = rv[p..].iter().map(|x| -x).collect();
    let mut check = vec![Polynomial::zero(n); p];
    for (l, b) in lambda.iter().zip(&basis.columns) {
        for (c, e) in check.iter_mut().zip(b) {
            *c += &(l * e);
        }
    }
    if check.as_slice() != v {
        return Err(Error::Invalid("lift failed re-expansion".into()));
    }
    Ok(Some(lambda))
}

/// Generators of the module of relations among the columns of `basis`,
/// returned as a reduced Gröbner basis in the free module of rank
/// `basis.len()`.
pub fn syzygies(basis: &ModuleBasis) -> ModuleBasis {
    let (s, n) = (basis.columns.len(), basis.nvars);
    if s == 0 {
        return ModuleBasis { rank: 0, nvars: n, columns: vec![], order: basis.order, is_groebner: true };
    }
    let (g, p, _) = augmented_groebner(basis);
    let columns: Vec<Vec<Polynomial>> = g
        .iter()
        .filter(|v| v.last().unwrap().comp >= p)
        .map(|v| from_mvec(v, p + s, n)[p..].to_vec())
        .collect();
    ModuleBasis { rank: s, nvars: n, columns, order: basis.order, is_groebner: true }
}

/// Whether `f` lies in the radical of the ideal `ideal`, via
/// `1 ∈ I + (1 − t·f)` in one extra variable `t`.
pub fn radical_member(f: &Polynomial, ideal: &ModuleBasis) -> Result<bool> {
    if ideal.rank != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: ideal.rank });
    }
    if f.nvars() != ideal.nvars {
        return Err(Error::DimensionMismatch { expected: ideal.nvars, found: f.nvars() });
    }
    if f.is_zero() {
        return Ok(true);
    }
    let n = ideal.nvars;
    let t = Polynomial::var(n + 1, n);
    let mut gens: Vec<Vec<Polynomial>> = ideal.columns.iter().map(|c| vec![c[0].extend_vars(n + 1)]).collect();
    gens.push(vec![&Polynomial::one(n + 1) - &(&t * &f.extend_vars(n + 1))]);
    let ext = ModuleBasis::with_order(1, n + 1, gens, ideal.order)?;
    ext.is_everything()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::Variables;

    fn vars(names: &[&str]) -> Variables {
        Variables::new(names.iter().copied()).unwrap()
    }

    fn ideal(v: &Variables, gens: &[&str]) -> ModuleBasis {
        ModuleBasis::ideal(v.len(), gens.iter().map(|g| v.parse(g).unwrap()).collect()).unwrap()
    }

    #[test]
    fn unit_ideal_detected() {
        let v = vars(&["x"]);
        let gb = groebner_basis(&ideal(&v, &["x^2", "x - 3"]));
        assert_eq!(gb.columns(), &[vec![Polynomial::one(1)]]);
        let gb = groebner_basis(&ideal(&v, &["x^2"]));
        assert_eq!(gb.columns(), &[vec![v.parse("x^2").unwrap()]]);
    }

    #[test]
    fn module_single_generator() {
        let v = vars(&["x", "y"]);
        let y = v.parse("y").unwrap();
        let b = ModuleBasis::new(2, 2, vec![vec![y.clone(), Polynomial::zero(2)]]).unwrap();
        assert_eq!(groebner_basis(&b).columns(), b.columns());
        let e2 = vec![Polynomial::zero(2), Polynomial::one(2)];
        let b2 = ModuleBasis::new(2, 2, vec![vec![Polynomial::zero(2), y]]).unwrap();
        assert!(!module_member(&e2, &b2).unwrap());
    }

    #[test]
    fn membership_and_lift() {
        let v = vars(&["x"]);
        let b = ideal(&v, &["x^2"]);
        let x3 = vec![v.parse("x^3").unwrap()];
        assert!(module_member(&x3, &b).unwrap());
        assert_eq!(lift_combination(&x3, &b).unwrap(), Some(vec![v.parse("x").unwrap()]));
        let x = vec![v.parse("x").unwrap()];
        assert!(!module_member(&x, &b).unwrap());
        assert_eq!(lift_combination(&x, &b).unwrap(), None);
        assert!(module_member(&[], &b).is_err());
    }

    #[test]
    fn lift_vector_fields() {
        // ∂_x and x∂_x in the plane as coefficient vectors
        let v = vars(&["x", "y"]);
        let p = |s: &str| v.parse(s).unwrap();
        let b = ModuleBasis::new(2, 2, vec![vec![p("1"), p("0")], vec![p("x"), p("0")]]).unwrap();
        let target = vec![p("1"), p("0")];
        let lam = lift_combination(&target, &b).unwrap().unwrap();
        let recon: Vec<Polynomial> =
            (0..2).map(|r| &(&lam[0] * &b.columns()[0][r]) + &(&lam[1] * &b.columns()[1][r])).collect();
        assert_eq!(recon, target);
    }

    #[test]
    fn radical_examples() {
        let v = vars(&["x", "y"]);
        assert!(radical_member(&v.parse("x").unwrap(), &ideal(&v, &["x^2"])).unwrap());
        assert!(!radical_member(&v.parse("1").unwrap(), &ideal(&v, &["x"])).unwrap());
        assert!(radical_member(&v.parse("x + y").unwrap(), &ideal(&v, &["x^2", "y^2"])).unwrap());
        assert!(!radical_member(&v.parse("x").unwrap(), &ideal(&v, &["x*y"])).unwrap());
        assert!(radical_member(&v.parse("0").unwrap(), &ideal(&v, &[])).unwrap());
        assert!(!radical_member(&v.parse("x").unwrap(), &ideal(&v, &[])).unwrap());
    }

    #[test]
    fn syzygy_examples() {
        let v = vars(&["x", "y"]);
        let p = |s: &str| v.parse(s).unwrap();
        let s = syzygies(&ideal(&v, &["x", "y"]));
        assert_eq!(s.columns(), &[vec![p("y"), p("-x")]]);
        assert!(syzygies(&ideal(&v, &["x^2"])).is_empty());
        let b = ModuleBasis::new(1, 2, vec![vec![p("1")], vec![p("x")]]).unwrap();
        assert_eq!(syzygies(&b).columns(), &[vec![p("x"), p("-1")]]);
    }

    #[test]
    fn grevlex_and_lex_orders() {
        let a = Monomial::from_exponents(vec![1, 0, 1]);
        let b = Monomial::from_exponents(vec![0, 2, 0]);
        assert_eq!(MonomialOrder::GREVLEX.cmp_monomials(&a, &b), Ordering::Less);
        assert_eq!(MonomialOrder::LEX.cmp_monomials(&a, &b), Ordering::Greater);
        let one = Monomial::one(3);
        assert_eq!(MonomialOrder::GREVLEX.cmp_terms((0, &one), (1, &a)), Ordering::Greater);
    }
}
