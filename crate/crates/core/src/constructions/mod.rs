//! Direct sums, tensor products and pullbacks of bundles, jet models, and
//! the base-change comparison for pulled-back subbundles.

mod basechange;
mod jet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::{BoxDomain, Bundle, Piece, PARTITION_SEED};
use crate::error::{check_len, Error, Result};
use crate::polyalg::{PolyMatrix, Polynomial, Rational};

pub use basechange::{base_change_comparison, BaseChangeReport, GammaSource};
pub use jet::{bundle_jet_dim, jet_dimension, jet_module_tensor, tensor_module, FlatSpec, JetFactor, JetModel};

/// Samples used to check that a map sends its source domain into the
/// target bundle's domain.
pub const IMAGE_SAMPLES: usize = 200;

/// A polynomial map ℝˢ → ℝᵗ.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    source_nvars: usize,
    components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(source_nvars: usize, components: Vec<Polynomial>) -> Result<Self> {
        for c in &components {
            if c.nvars() != source_nvars {
                return Err(Error::DimensionMismatch { expected: source_nvars, found: c.nvars() });
            }
        }
        Ok(PolyMap { source_nvars, components })
    }

    pub fn identity(n: usize) -> Self {
        PolyMap { source_nvars: n, components: (0..n).map(|i| Polynomial::var(n, i)).collect() }
    }

    pub fn source_nvars(&self) -> usize {
        self.source_nvars
    }

    pub fn target_nvars(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn apply(&self, p: &[Rational]) -> Result<Vec<Rational>> {
        self.components.iter().map(|c| c.eval_rational(p)).collect()
    }

    /// `t × s` Jacobian matrix.
    pub fn jacobian(&self) -> PolyMatrix {
        let s = self.source_nvars;
        let entries = self
            .components
            .iter()
            .flat_map(|c| (0..s).map(move |j| c.derivative(j).expect("variable index in range")))
            .collect();
        PolyMatrix::new(self.target_nvars(), s, s, entries).expect("shape is consistent")
    }

    /// Substitute the map into a polynomial on the target.
    pub fn pull(&self, p: &Polynomial) -> Result<Polynomial> {
        p.compose(&self.components)
    }

    pub fn pull_matrix(&self, m: &PolyMatrix) -> Result<PolyMatrix> {
        check_len(self.target_nvars(), m.nvars())?;
        m.map_entries(self.source_nvars, |e| self.pull(e))
    }
}

fn refine(e: &Bundle, f: &Bundle, combine: impl Fn(&PolyMatrix, &PolyMatrix) -> Result<PolyMatrix>, rank: usize) -> Result<Bundle> {
    if e.nvars() != f.nvars() || e.domain() != f.domain() {
        return Err(Error::DomainMismatch);
    }
    let mut pieces = Vec::new();
    for a in e.pieces() {
        for b in f.pieces() {
            let cell = a.cell.intersect(&b.cell);
            if cell.is_trivially_empty() {
                continue;
            }
            pieces.push(Piece { cell, generators: combine(&a.generators, &b.generators)? });
        }
    }
    Bundle::from_pieces(e.nvars(), rank, pieces, e.domain().clone())
}

/// `E ⊕ E′`: block-diagonal generators on the common refinement of cells.
pub fn direct_sum(e: &Bundle, f: &Bundle) -> Result<Bundle> {
    refine(e, f, |a, b| a.block_diag(b), e.ambient_rank() + f.ambient_rank())
}

/// `E ⊗ E′ = (V ⊗ V′) / ⟨D ⊗ V′ + V ⊗ D′⟩`: generator columns
/// `gᵢ ⊗ e′ⱼ` followed by `eᵢ ⊗ g′ⱼ`.
pub fn tensor(e: &Bundle, f: &Bundle) -> Result<Bundle> {
    let (n, n2) = (e.ambient_rank(), f.ambient_rank());
    let nv = e.nvars();
    refine(
        e,
        f,
        |a, b| {
            let left = a.kronecker(&PolyMatrix::identity(n2, nv))?;
            let right = PolyMatrix::identity(n, nv).kronecker(b)?;
            left.hstack(&right)
        },
        n * n2,
    )
}

/// `f*E` over `source_domain`: generators and cell conditions composed
/// with `f`. Sampled points of the source domain must map into the domain
/// of `E`.
pub fn pullback(e: &Bundle, f: &PolyMap, source_domain: &BoxDomain) -> Result<Bundle> {
    if f.target_nvars() != e.nvars() {
        return Err(Error::DimensionMismatch { expected: e.nvars(), found: f.target_nvars() });
    }
    if source_domain.nvars() != f.source_nvars() {
        return Err(Error::DimensionMismatch { expected: f.source_nvars(), found: source_domain.nvars() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PARTITION_SEED);
    for _ in 0..IMAGE_SAMPLES {
        let p = source_domain.sample(&mut rng);
        e.domain().require(&f.apply(&p)?.into())?;
    }
    let pieces = e
        .pieces()
        .iter()
        .map(|p| {
            Ok(Piece { cell: p.cell.compose(f.components())?, generators: f.pull_matrix(&p.generators)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Bundle::from_pieces(f.source_nvars(), e.ambient_rank(), pieces, source_domain.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{Cell, Relation, SignCondition, SubbundlePresentation};
    use crate::polyalg::{int, rat, Point, Variables};

    fn x(s: &str) -> Polynomial {
        Variables::new(["x"]).unwrap().parse(s).unwrap()
    }

    fn cross() -> Bundle {
        SubbundlePresentation::new(1, PolyMatrix::from_rows(1, vec![vec![x("x")]]).unwrap(), BoxDomain::unbounded(1)).unwrap().into()
    }

    /// Fiber ℝ where `x REL 0`, zero elsewhere.
    fn half(rel: Relation, other: Relation) -> Bundle {
        let pieces = vec![
            Piece { cell: Cell::new(vec![SignCondition::new(x("x"), rel)]), generators: PolyMatrix::zeros(1, 0, 1) },
            Piece { cell: Cell::new(vec![SignCondition::new(x("x"), other)]), generators: PolyMatrix::identity(1, 1) },
        ];
        Bundle::from_pieces(1, 1, pieces, BoxDomain::unbounded(1)).unwrap()
    }

    fn dim(e: &Bundle, v: Rational) -> usize {
        e.fiber_dim(&Point::Rational(vec![v])).unwrap()
    }

    #[test]
    fn sums() {
        let s = direct_sum(&cross(), &cross()).unwrap();
        assert_eq!(s.ambient_rank(), 2);
        assert_eq!((dim(&s, int(0)), dim(&s, int(1))), (2, 0));
        let zero: Bundle = SubbundlePresentation::new(0, PolyMatrix::zeros(0, 0, 1), BoxDomain::unbounded(1)).unwrap().into();
        let s = direct_sum(&cross(), &zero).unwrap();
        assert_eq!((s.ambient_rank(), dim(&s, int(0)), dim(&s, int(2))), (1, 1, 0));
        let s = direct_sum(&half(Relation::Ge, Relation::Lt), &half(Relation::Le, Relation::Gt)).unwrap();
        assert_eq!((dim(&s, int(0)), dim(&s, int(1)), dim(&s, int(-1))), (2, 1, 1));
    }

    #[test]
    fn tensors() {
        let t = tensor(&half(Relation::Ge, Relation::Lt), &half(Relation::Le, Relation::Gt)).unwrap();
        assert_eq!((dim(&t, int(0)), dim(&t, rat(1, 2)), dim(&t, int(-3))), (1, 0, 0));
        let t = tensor(&cross(), &cross()).unwrap();
        assert_eq!((dim(&t, int(0)), dim(&t, int(2))), (1, 0));
        let line: Bundle = SubbundlePresentation::new(1, PolyMatrix::zeros(1, 0, 1), BoxDomain::unbounded(1)).unwrap().into();
        let t = tensor(&cross(), &line).unwrap();
        assert_eq!((dim(&t, int(0)), dim(&t, int(2))), (1, 0));
    }

    #[test]
    fn pullbacks() {
        let y2 = PolyMap::new(1, vec![x("x^2")]).unwrap();
        let p = pullback(&cross(), &y2, &BoxDomain::unbounded(1)).unwrap();
        match &p {
            Bundle::Polynomial(b) => assert_eq!(b.generators().get(0, 0), &x("x^2")),
            _ => panic!("expected a polynomial presentation"),
        }
        // D≤ pulled back along y²: fiber ℝ for y ≠ 0, zero at y = 0
        let d_le = half(Relation::Gt, Relation::Le);
        let p = pullback(&d_le, &y2, &BoxDomain::unbounded(1)).unwrap();
        assert_eq!((dim(&p, int(0)), dim(&p, int(1)), dim(&p, int(-1))), (0, 1, 1));
    }

    #[test]
    fn pullback_checks_image() {
        let bounded: Bundle = SubbundlePresentation::new(
            1,
            PolyMatrix::identity(1, 1),
            BoxDomain::new(vec![(Some(int(0)), None)]).unwrap(),
        )
        .unwrap()
        .into();
        let neg = PolyMap::new(1, vec![x("-x")]).unwrap();
        assert!(matches!(pullback(&bounded, &neg, &BoxDomain::unbounded(1)), Err(Error::OutsideDomain)));
    }
}
