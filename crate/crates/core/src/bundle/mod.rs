//! Presentations of quotient bundles `E = V/D` over boxes in ℝⁿ: a trivial
//! ambient bundle of rank `N` modulo the column span of a polynomial
//! generator matrix, either globally or per semialgebraic cell.

mod cell;
mod grid;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grobner::{groebner_basis, ModuleBasis};
use crate::polyalg::{PolyMatrix, Point, Polynomial, DEFAULT_PIVOT_TOL};

pub use cell::{small_rational, BoxDomain, Cell, Relation, SignCondition};
pub use grid::{mrank_grid, Grid, GridReport};

/// Number of seeded sample points used to validate that cells partition
/// the domain.
pub const PARTITION_SAMPLES: usize = 1000;
pub const PARTITION_SEED: u64 = 0;

/// `E = ℝᴺ / col-span G` over a box.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbundlePresentation {
    ambient_rank: usize,
    generators: PolyMatrix,
    domain: BoxDomain,
}

impl SubbundlePresentation {
    pub fn new(ambient_rank: usize, generators: PolyMatrix, domain: BoxDomain) -> Result<Self> {
        if generators.rows() != ambient_rank {
            return Err(Error::DimensionMismatch { expected: ambient_rank, found: generators.rows() });
        }
        if domain.nvars() != generators.nvars() {
            return Err(Error::DimensionMismatch { expected: generators.nvars(), found: domain.nvars() });
        }
        Ok(SubbundlePresentation { ambient_rank, generators, domain })
    }

    pub fn nvars(&self) -> usize {
        self.generators.nvars()
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn generators(&self) -> &PolyMatrix {
        &self.generators
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn fiber_dim(&self, m: &Point) -> Result<usize> {
        self.domain.require(m)?;
        Ok(self.ambient_rank - self.generators.rank_at(m, DEFAULT_PIVOT_TOL)?)
    }

    /// Largest `k` with a nonzero `k×k` minor.
    pub fn generic_rank(&self) -> usize {
        generic_rank_of(&self.generators)
    }

    /// Fiber dimension on the regular (open dense) set.
    pub fn generic_fiber_dim(&self) -> usize {
        self.ambient_rank - self.generic_rank()
    }

    /// For each `k`, the ideal of `k×k` minors: `rank G(m) < k` iff `m` is a
    /// common zero.
    pub fn rank_strata(&self) -> Vec<RankStratum> {
        let g = &self.generators;
        (1..=g.rows().min(g.cols()))
            .map(|k| {
                let minors = g.minors(k).expect("k is in range");
                let nonzero: Vec<Polynomial> = minors.iter().filter(|p| !p.is_zero()).cloned().collect();
                let ideal = groebner_basis(&ModuleBasis::ideal(g.nvars(), nonzero).expect("minors share the ring"));
                RankStratum { k, minors, ideal }
            })
            .collect()
    }
}

/// The determinantal ideal `I_k` of a generator matrix.
#[derive(Clone, Debug)]
pub struct RankStratum {
    pub k: usize,
    /// All `k×k` minors in lexicographic order.
    pub minors: Vec<Polynomial>,
    /// Reduced Gröbner basis of the ideal they generate.
    pub ideal: ModuleBasis,
}

pub(crate) fn generic_rank_of(g: &PolyMatrix) -> usize {
    let full = g.rows().min(g.cols());
    if full == 0 {
        return 0;
    }
    // A random evaluation bounds the rank from below; one round of minors
    // of the next size settles it.
    let mut rng = ChaCha8Rng::seed_from_u64(PARTITION_SEED);
    let window = BoxDomain::unbounded(g.nvars());
    let mut r = 0;
    for _ in 0..3 {
        let m = Point::Rational(window.sample(&mut rng));
        r = r.max(g.rank_at(&m, DEFAULT_PIVOT_TOL).expect("sample has the right length"));
    }
    while r < full {
        let minors = g.minors(r + 1).expect("k is in range");
        if minors.iter().all(Polynomial::is_zero) {
            break;
        }
        r += 1;
    }
    r
}

/// One cell of a cellwise bundle with its generator matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub cell: Cell,
    pub generators: PolyMatrix,
}

/// A bundle given by different generator matrices on the cells of a
/// partition of the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CellwiseBundle {
    nvars: usize,
    ambient_rank: usize,
    pieces: Vec<Piece>,
    domain: BoxDomain,
}

impl CellwiseBundle {
    /// Validates shapes, then checks on seeded samples that every point of
    /// the domain lies in exactly one cell.
    pub fn new(nvars: usize, ambient_rank: usize, pieces: Vec<Piece>, domain: BoxDomain) -> Result<Self> {
        if domain.nvars() != nvars {
            return Err(Error::DimensionMismatch { expected: nvars, found: domain.nvars() });
        }
        for p in &pieces {
            if p.generators.rows() != ambient_rank {
                return Err(Error::DimensionMismatch { expected: ambient_rank, found: p.generators.rows() });
            }
            if p.generators.nvars() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, found: p.generators.nvars() });
            }
            for c in &p.cell.conditions {
                if c.poly.nvars() != nvars {
                    return Err(Error::DimensionMismatch { expected: nvars, found: c.poly.nvars() });
                }
            }
        }
        let bundle = CellwiseBundle { nvars, ambient_rank, pieces, domain };
        bundle.validate_partition(PARTITION_SAMPLES, PARTITION_SEED)?;
        Ok(bundle)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn validate_partition(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let origin = Point::Rational(vec![num_traits::Zero::zero(); self.nvars]);
        if self.domain.contains(&origin)? {
            self.piece_index(&origin)?;
        }
        for _ in 0..samples {
            let m = Point::Rational(self.domain.sample(&mut rng));
            self.piece_index(&m)?;
        }
        Ok(())
    }

    fn piece_index(&self, m: &Point) -> Result<usize> {
        let mut found = None;
        let mut count = 0;
        for (i, p) in self.pieces.iter().enumerate() {
            if p.cell.contains(m)? {
                found.get_or_insert(i);
                count += 1;
            }
        }
        match (found, count) {
            (Some(i), 1) => Ok(i),
            (None, _) => Err(Error::NoCell(m.describe())),
            _ => Err(Error::OverlappingCells { point: m.describe(), count }),
        }
    }

    pub fn piece_at(&self, m: &Point) -> Result<&Piece> {
        self.domain.require(m)?;
        Ok(&self.pieces[self.piece_index(m)?])
    }

    pub fn fiber_dim(&self, m: &Point) -> Result<usize> {
        let piece = self.piece_at(m)?;
        Ok(self.ambient_rank - piece.generators.rank_at(m, DEFAULT_PIVOT_TOL)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Bundle {
    Polynomial(SubbundlePresentation),
    Cellwise(CellwiseBundle),
}

impl From<SubbundlePresentation> for Bundle {
    fn from(b: SubbundlePresentation) -> Self {
        Bundle::Polynomial(b)
    }
}

impl From<CellwiseBundle> for Bundle {
    fn from(b: CellwiseBundle) -> Self {
        Bundle::Cellwise(b)
    }
}

impl Bundle {
    /// A single piece with an empty cell becomes a polynomial presentation.
    pub fn from_pieces(nvars: usize, ambient_rank: usize, mut pieces: Vec<Piece>, domain: BoxDomain) -> Result<Bundle> {
        if pieces.len() == 1 && pieces[0].cell.is_everything() {
            let p = pieces.pop().unwrap();
            if p.generators.nvars() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, found: p.generators.nvars() });
            }
            return Ok(SubbundlePresentation::new(ambient_rank, p.generators, domain)?.into());
        }
        Ok(CellwiseBundle::new(nvars, ambient_rank, pieces, domain)?.into())
    }

    pub fn nvars(&self) -> usize {
        match self {
            Bundle::Polynomial(b) => b.nvars(),
            Bundle::Cellwise(b) => b.nvars(),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        match self {
            Bundle::Polynomial(b) => b.ambient_rank(),
            Bundle::Cellwise(b) => b.ambient_rank(),
        }
    }

    pub fn domain(&self) -> &BoxDomain {
        match self {
            Bundle::Polynomial(b) => b.domain(),
            Bundle::Cellwise(b) => b.domain(),
        }
    }

    /// Pieces of the bundle; a polynomial presentation is one piece whose
    /// cell is everything.
    pub fn pieces(&self) -> Vec<Piece> {
        match self {
            Bundle::Polynomial(b) => vec![Piece { cell: Cell::everything(), generators: b.generators.clone() }],
            Bundle::Cellwise(b) => b.pieces.clone(),
        }
    }

    pub fn generators_at(&self, m: &Point) -> Result<&PolyMatrix> {
        match self {
            Bundle::Polynomial(b) => {
                b.domain.require(m)?;
                Ok(&b.generators)
            }
            Bundle::Cellwise(b) => Ok(&b.piece_at(m)?.generators),
        }
    }

    pub fn fiber_dim(&self, m: &Point) -> Result<usize> {
        match self {
            Bundle::Polynomial(b) => b.fiber_dim(m),
            Bundle::Cellwise(b) => b.fiber_dim(m),
        }
    }

    pub fn generic_rank(&self) -> Result<usize> {
        match self {
            Bundle::Polynomial(b) => Ok(b.generic_rank()),
            Bundle::Cellwise(_) => Err(Error::Unsupported("generic rank of a cellwise bundle; query each piece".into())),
        }
    }

    pub fn rank_strata(&self) -> Result<Vec<RankStratum>> {
        match self {
            Bundle::Polynomial(b) => Ok(b.rank_strata()),
            Bundle::Cellwise(_) => Err(Error::Unsupported("rank strata of a cellwise bundle".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{int, rat, Variables};

    fn x() -> Variables {
        Variables::new(["x"]).unwrap()
    }

    fn cross() -> Bundle {
        let g = PolyMatrix::from_rows(1, vec![vec![x().parse("x").unwrap()]]).unwrap();
        SubbundlePresentation::new(1, g, BoxDomain::unbounded(1)).unwrap().into()
    }

    fn e_ge() -> Bundle {
        let v = x();
        let xp = v.parse("x").unwrap();
        let pieces = vec![
            Piece { cell: Cell::new(vec![SignCondition::new(xp.clone(), Relation::Ge)]), generators: PolyMatrix::zeros(1, 0, 1) },
            Piece { cell: Cell::new(vec![SignCondition::new(xp, Relation::Lt)]), generators: PolyMatrix::identity(1, 1) },
        ];
        Bundle::from_pieces(1, 1, pieces, BoxDomain::unbounded(1)).unwrap()
    }

    #[test]
    fn cross_bundle_fibers() {
        let e = cross();
        assert_eq!(e.fiber_dim(&vec![int(0)].into()).unwrap(), 1);
        assert_eq!(e.fiber_dim(&vec![rat(1, 2)].into()).unwrap(), 0);
        assert_eq!(e.generic_rank().unwrap(), 1);
        let strata = e.rank_strata().unwrap();
        assert_eq!(strata[0].ideal.columns(), &[vec![x().parse("x").unwrap()]]);
    }

    #[test]
    fn cellwise_fibers() {
        let e = e_ge();
        assert_eq!(e.fiber_dim(&vec![int(-1)].into()).unwrap(), 0);
        assert_eq!(e.fiber_dim(&vec![int(0)].into()).unwrap(), 1);
        assert_eq!(e.fiber_dim(&vec![0.25].into()).unwrap(), 1);
        assert!(e.generic_rank().is_err());
    }

    #[test]
    fn overlapping_cells_rejected() {
        let xp = x().parse("x").unwrap();
        let pieces = vec![
            Piece { cell: Cell::new(vec![SignCondition::new(xp.clone(), Relation::Ge)]), generators: PolyMatrix::zeros(1, 0, 1) },
            Piece { cell: Cell::new(vec![SignCondition::new(xp, Relation::Le)]), generators: PolyMatrix::zeros(1, 0, 1) },
        ];
        let err = CellwiseBundle::new(1, 1, pieces, BoxDomain::unbounded(1)).unwrap_err();
        assert!(matches!(err, Error::OverlappingCells { count: 2, .. }));
    }

    #[test]
    fn generic_rank_examples() {
        let v = Variables::new(["x", "y"]).unwrap();
        let z = SubbundlePresentation::new(2, PolyMatrix::zeros(2, 1, 2), BoxDomain::unbounded(2)).unwrap();
        assert_eq!((z.generic_rank(), z.generic_fiber_dim()), (0, 2));
        let g = PolyMatrix::from_rows(2, vec![vec![v.parse("x").unwrap()], vec![v.parse("y").unwrap()]]).unwrap();
        let b = SubbundlePresentation::new(2, g, BoxDomain::unbounded(2)).unwrap();
        assert_eq!((b.generic_rank(), b.generic_fiber_dim()), (1, 1));
        let g = PolyMatrix::from_rows(
            2,
            vec![vec![v.parse("x").unwrap(), Polynomial::zero(2)], vec![Polynomial::zero(2), v.parse("y").unwrap()]],
        )
        .unwrap();
        let strata = SubbundlePresentation::new(2, g, BoxDomain::unbounded(2)).unwrap().rank_strata();
        assert_eq!(strata[1].ideal.columns(), &[vec![v.parse("x*y").unwrap()]]);
        assert_eq!(strata[0].ideal.len(), 2);
    }

    #[test]
    fn outside_domain() {
        let g = PolyMatrix::identity(1, 1);
        let b = SubbundlePresentation::new(1, g, BoxDomain::new(vec![(Some(int(0)), Some(int(1)))]).unwrap()).unwrap();
        assert!(matches!(b.fiber_dim(&vec![int(2)].into()), Err(Error::OutsideDomain)));
    }
}
