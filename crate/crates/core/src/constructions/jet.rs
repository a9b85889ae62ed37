use num_traits::{One, Zero};

use crate::bundle::{Bundle, Cell};
use crate::error::{Error, Result};
use crate::grobner::{groebner_basis, smith_normal_form, ModuleBasis};
use crate::modules::FPModule;
use crate::polyalg::univariate::{clear_radius, UPoly};
use crate::polyalg::{linalg, Monomial, PolyMatrix, Point, Polynomial, Rational};

/// Order-`k` jets at `m`: ℚ[x] / I_m^{k+1}, with basis the standard
/// monomials of a Gröbner basis of I_m^{k+1} in coordinates centered at `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetModel {
    center: Vec<Rational>,
    order: u32,
    basis: Vec<Monomial>,
}

impl JetModel {
    pub fn new(center: Vec<Rational>, order: u32) -> Self {
        let n = center.len();
        let gens = Monomial::all_of_degree(n, order + 1).into_iter().map(|m| Polynomial::monomial(m, Rational::one())).collect();
        let gb = groebner_basis(&ModuleBasis::ideal(n, gens).expect("monomials share the ring"));
        let leads = gb.leading_terms();
        let basis = Monomial::all_up_to_degree(n, order)
            .into_iter()
            .filter(|m| !leads.iter().any(|(_, l)| l.divides(m)))
            .collect();
        JetModel { center, order, basis }
    }

    pub fn center(&self) -> &[Rational] {
        &self.center
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Taylor coefficients of a polynomial already expressed in centered
    /// coordinates.
    fn truncate(&self, centered: &Polynomial) -> Vec<Rational> {
        self.basis.iter().map(|b| centered.coefficient(b)).collect()
    }

    pub fn jet(&self, f: &Polynomial) -> Result<Vec<Rational>> {
        Ok(self.truncate(&f.shift(&self.center)?))
    }

    /// Jets of the module generated by the columns of `p` (in centered
    /// coordinates), as vectors of length `rows · dim`.
    fn span_of_columns(&self, centered: &PolyMatrix) -> Vec<Vec<Rational>> {
        let mut out = Vec::new();
        for col in centered.columns() {
            for b in &self.basis {
                let shifted: Vec<Rational> = col
                    .iter()
                    .flat_map(|e| self.truncate(&e.mul_term(b, &Rational::one())))
                    .collect();
                if !linalg::is_zero_vector(&shifted) {
                    out.push(shifted);
                }
            }
        }
        out
    }
}

/// `dim Q / I_m^{k+1} Q`.
pub fn jet_dimension(q: &FPModule, m: &[Rational], k: u32) -> Result<usize> {
    if m.len() != q.nvars() {
        return Err(Error::DimensionMismatch { expected: q.nvars(), found: m.len() });
    }
    let model = JetModel::new(m.to_vec(), k);
    let centered = q.presentation().map_entries(q.nvars(), |e| e.shift(m))?;
    let total = q.free_rank() * model.dim();
    let span = model.span_of_columns(&centered);
    Ok(total - linalg::rank_rational(&span))
}

/// `coker [P ⊗ I | I ⊗ P′]`.
pub fn tensor_module(a: &FPModule, b: &FPModule) -> Result<FPModule> {
    if a.nvars() != b.nvars() {
        return Err(Error::DimensionMismatch { expected: a.nvars(), found: b.nvars() });
    }
    let n = a.nvars();
    let (p, p2) = (a.free_rank(), b.free_rank());
    let left = a.presentation().kronecker(&PolyMatrix::identity(p2, n))?;
    let right = PolyMatrix::identity(p, n).kronecker(b.presentation())?;
    FPModule::new(p * p2, left.hstack(&right)?)
}

/// Sections of the trivial rank-`rank` bundle modulo those vanishing on the
/// closed set `support`. Not finitely presented over the polynomials; only
/// its jets enter computations.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatSpec {
    pub support: Cell,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum JetFactor {
    Module(FPModule),
    Flat(FlatSpec),
}

impl FlatSpec {
    /// A finitely presented module with the same jets at `m`: free where
    /// `m` is a non-isolated point of the support, the skyscraper at an
    /// isolated point, zero off the support.
    fn jet_equivalent(&self, m: &[Rational]) -> Result<FPModule> {
        if m.len() != 1 {
            return Err(Error::Unsupported("flat factors in more than one variable".into()));
        }
        let r = self.rank;
        let point = Point::Rational(m.to_vec());
        if !self.support.contains(&point)? {
            return FPModule::new(r, PolyMatrix::identity(r, 1));
        }
        let polys: Vec<UPoly> = self.support.conditions.iter().map(|c| UPoly::from_polynomial(&c.poly)).collect::<Result<_>>()?;
        let eps = clear_radius(&polys, &m[0]);
        let near = [&m[0] + &eps, &m[0] - &eps];
        let mut isolated = true;
        for s in near {
            if self.support.contains(&Point::Rational(vec![s]))? {
                isolated = false;
            }
        }
        if isolated {
            let lin = &Polynomial::var(1, 0) - &Polynomial::constant(1, m[0].clone());
            let pres = PolyMatrix::identity(r, 1).map_entries(1, |e| Ok(e * &lin))?;
            return FPModule::new(r, pres);
        }
        Ok(FPModule::free(1, r))
    }
}

impl JetFactor {
    /// The section module of a bundle, as a jet factor. A polynomial
    /// presentation gives `coker(G)`; a cellwise bundle qualifies when one
    /// piece has `D = 0` and every other piece has `D` of full rank, giving
    /// the flat factor supported on the first piece's cell.
    pub fn of_bundle(e: &Bundle) -> Result<JetFactor> {
        let n = e.ambient_rank();
        match e {
            Bundle::Polynomial(b) => Ok(JetFactor::Module(FPModule::new(n, b.generators().clone())?)),
            Bundle::Cellwise(b) => {
                let mut support = None;
                for piece in b.pieces() {
                    let g = &piece.generators;
                    if g.is_zero() {
                        if support.replace(piece.cell.clone()).is_some() {
                            return Err(Error::Unsupported("several pieces with zero D".into()));
                        }
                    } else {
                        let full = g.cols() >= n && g.minors(n)?.iter().any(|d| d.is_constant() && !d.is_zero());
                        if !full {
                            return Err(Error::Unsupported("a piece whose D is neither zero nor constant full rank".into()));
                        }
                    }
                }
                let support = support.ok_or_else(|| Error::Unsupported("no piece with zero D".into()))?;
                Ok(JetFactor::Flat(FlatSpec { support, rank: n }))
            }
        }
    }

    fn at(&self, m: &[Rational]) -> Result<FPModule> {
        match self {
            JetFactor::Module(q) => Ok(q.clone()),
            JetFactor::Flat(f) => f.jet_equivalent(m),
        }
    }
}

/// Dimension of the order-`k` jet model at `m` of `Q ⊗ Q′`.
pub fn jet_module_tensor(a: &JetFactor, b: &JetFactor, m: &[Rational], k: u32) -> Result<usize> {
    jet_dimension(&tensor_module(&a.at(m)?, &b.at(m)?)?, m, k)
}

/// Dimension of the order-`k` jet model at `m` of the sections of a bundle
/// over the line. Sections of `D` have jets lying, on each side of `m`, in
/// the span of `tʲ·uᵢ` where `uᵢ` are the Smith columns spanning `D` there,
/// and take a value in `D_m` at `m`.
pub fn bundle_jet_dim(e: &Bundle, m: &Rational, k: u32) -> Result<usize> {
    if e.nvars() != 1 {
        return Err(Error::NotUnivariate(e.nvars()));
    }
    let n = e.ambient_rank();
    let width = k as usize + 1;
    let total = n * width;
    let here = Point::Rational(vec![m.clone()]);
    let g_m = e.generators_at(&here)?;
    let mut z: Vec<Vec<Rational>> = Vec::new();
    for i in 0..n {
        for j in 1..width {
            let mut v = vec![Rational::zero(); total];
            v[i * width + j] = Rational::one();
            z.push(v);
        }
    }
    let values = g_m.eval_rational(std::slice::from_ref(m))?;
    let mut cols: Vec<Vec<Rational>> = (0..g_m.cols()).map(|c| values.iter().map(|row| row[c].clone()).collect()).collect();
    for col in linalg::span_basis(&mut cols, n) {
        let mut v = vec![Rational::zero(); total];
        for i in 0..n {
            v[i * width] = col[i].clone();
        }
        z.push(v);
    }
    let polys: Vec<UPoly> = e
        .pieces()
        .iter()
        .flat_map(|p| p.cell.conditions.iter().map(|c| UPoly::from_polynomial(&c.poly)).collect::<Vec<_>>())
        .collect::<Result<_>>()?;
    let eps = clear_radius(&polys, m);
    let mut constraint = z;
    for side in [m + &eps, m - &eps] {
        let pt = Point::Rational(vec![side]);
        if !e.domain().contains(&pt)? {
            continue;
        }
        let g = e.generators_at(&pt)?.map_entries(1, |p| p.shift(std::slice::from_ref(m)))?;
        let w = side_jets(&g, n, k)?;
        constraint = linalg::intersection_basis(&constraint, &w, total);
    }
    Ok(total - constraint.len())
}

fn side_jets(g: &PolyMatrix, n: usize, k: u32) -> Result<Vec<Vec<Rational>>> {
    let width = k as usize + 1;
    if g.cols() == 0 {
        return Ok(vec![]);
    }
    let snf = smith_normal_form(g)?;
    let r = snf.rank();
    let mut out = Vec::new();
    for i in 0..r {
        let col = snf.u_inv.column(i);
        for j in 0..width {
            let mut v = vec![Rational::zero(); n * width];
            for (row, entry) in col.iter().enumerate() {
                for (mono, c) in entry.terms() {
                    let d = mono.exponents().first().copied().unwrap_or(0) as usize + j;
                    if d < width {
                        v[row * width + d] = c.clone();
                    }
                }
            }
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{BoxDomain, Piece, Relation, SignCondition, SubbundlePresentation};
    use crate::constructions::tensor;
    use crate::polyalg::{int, Variables};

    fn x(s: &str) -> Polynomial {
        Variables::new(["x"]).unwrap().parse(s).unwrap()
    }

    fn half(rel: Relation, other: Relation) -> Bundle {
        let pieces = vec![
            Piece { cell: Cell::new(vec![SignCondition::new(x("x"), rel)]), generators: PolyMatrix::zeros(1, 0, 1) },
            Piece { cell: Cell::new(vec![SignCondition::new(x("x"), other)]), generators: PolyMatrix::identity(1, 1) },
        ];
        Bundle::from_pieces(1, 1, pieces, BoxDomain::unbounded(1)).unwrap()
    }

    fn flat(rel: Relation) -> JetFactor {
        JetFactor::Flat(FlatSpec { support: Cell::new(vec![SignCondition::new(x("x"), rel)]), rank: 1 })
    }

    #[test]
    fn jet_model_dimension() {
        assert_eq!(JetModel::new(vec![int(0)], 3).dim(), 4);
        assert_eq!(JetModel::new(vec![int(1), int(2)], 2).dim(), 6);
        assert_eq!(JetModel::new(vec![int(0); 3], 0).dim(), 1);
        let j = JetModel::new(vec![int(1)], 2);
        assert_eq!(j.jet(&x("x^2")).unwrap(), vec![int(1), int(2), int(1)]);
    }

    #[test]
    fn module_jets() {
        let q = FPModule::new(1, PolyMatrix::from_rows(1, vec![vec![x("x^2")]]).unwrap()).unwrap();
        assert_eq!(jet_dimension(&q, &[int(0)], 5).unwrap(), 2);
        assert_eq!(jet_dimension(&q, &[int(0)], 0).unwrap(), 1);
        assert_eq!(jet_dimension(&q, &[int(3)], 5).unwrap(), 0);
    }

    #[test]
    fn not_monoidal_gap() {
        let t = tensor(&half(Relation::Ge, Relation::Lt), &half(Relation::Le, Relation::Gt)).unwrap();
        for k in 0..=5u32 {
            let module_side = jet_module_tensor(&flat(Relation::Ge), &flat(Relation::Le), &[int(0)], k).unwrap();
            assert_eq!(module_side, k as usize + 1);
            assert_eq!(bundle_jet_dim(&t, &int(0), k).unwrap(), 1);
        }
        assert_eq!(jet_module_tensor(&flat(Relation::Ge), &flat(Relation::Le), &[int(1)], 3).unwrap(), 0);
        assert_eq!(JetFactor::of_bundle(&half(Relation::Ge, Relation::Lt)).unwrap(), flat(Relation::Ge));
        let point = JetFactor::Flat(FlatSpec { support: Cell::new(vec![SignCondition::new(x("x"), Relation::Eq)]), rank: 1 });
        assert_eq!(jet_module_tensor(&point, &flat(Relation::Ge), &[int(0)], 4).unwrap(), 1);
    }

    #[test]
    fn polynomial_bundle_jets() {
        let cross: Bundle =
            SubbundlePresentation::new(1, PolyMatrix::from_rows(1, vec![vec![x("x")]]).unwrap(), BoxDomain::unbounded(1)).unwrap().into();
        assert_eq!(bundle_jet_dim(&cross, &int(0), 3).unwrap(), 1);
        assert_eq!(bundle_jet_dim(&cross, &int(2), 3).unwrap(), 0);
        let free: Bundle = SubbundlePresentation::new(2, PolyMatrix::zeros(2, 0, 1), BoxDomain::unbounded(1)).unwrap().into();
        assert_eq!(bundle_jet_dim(&free, &int(0), 2).unwrap(), 6);
    }

    #[test]
    fn multivariate_flat_rejected() {
        let v = Variables::new(["x", "y"]).unwrap();
        let f = JetFactor::Flat(FlatSpec { support: Cell::new(vec![SignCondition::new(v.parse("x").unwrap(), Relation::Ge)]), rank: 1 });
        assert!(jet_module_tensor(&f, &f, &[int(0), int(0)], 1).is_err());
    }
}
