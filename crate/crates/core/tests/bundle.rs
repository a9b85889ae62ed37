mod common;

use common::*;
use proptest::prelude::*;
use tepui_core::bundle::{mrank_grid, BoxDomain, Bundle, Cell, CellwiseBundle, Grid, Piece, Relation, SignCondition, SubbundlePresentation};
use tepui_core::polyalg::{int, rat, PolyMatrix, Point};

fn presentation(g: PolyMatrix) -> SubbundlePresentation {
    SubbundlePresentation::new(g.rows(), g.clone(), BoxDomain::unbounded(g.nvars())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fiber_dim_bounded_by_generic(g in matrix_strategy(3, 2, 2, 2), pts in proptest::collection::vec(point_strategy(2), 10)) {
        let e = presentation(g.clone());
        let r = e.generic_rank();
        let top = if r == 0 { vec![] } else { g.minors(r).unwrap() };
        for m in pts {
            let d = e.fiber_dim(&Point::Rational(m.clone())).unwrap();
            prop_assert!(d >= 3 - r);
            let regular = r == 0 || top.iter().any(|t| t.eval_rational(&m).unwrap() != int(0));
            if regular {
                prop_assert_eq!(d, 3 - r);
            }
        }
    }

    #[test]
    fn grid_semicontinuity_passes(g in matrix_strategy(2, 2, 1, 2)) {
        let e: Bundle = presentation(g).into();
        let grid = Grid::new(vec![int(-2)], vec![int(2)], rat(1, 4)).unwrap();
        let report = mrank_grid(&e, &grid).unwrap();
        prop_assert!(report.semicontinuous);
        prop_assert!(report.violations.is_empty());
    }

    #[test]
    fn cellwise_and_polynomial_agree(g in matrix_strategy(2, 2, 1, 2), pts in proptest::collection::vec(point_strategy(1), 20)) {
        let x = vars(&["x"]).parse("x").unwrap();
        let pieces = vec![
            Piece { cell: Cell::new(vec![SignCondition::new(x.clone(), Relation::Ge)]), generators: g.clone() },
            Piece { cell: Cell::new(vec![SignCondition::new(x, Relation::Lt)]), generators: g.clone() },
        ];
        let cw = CellwiseBundle::new(1, 2, pieces, BoxDomain::unbounded(1)).unwrap();
        let poly = presentation(g);
        for m in pts.into_iter().chain([vec![int(0)]]) {
            let p = Point::Rational(m);
            prop_assert_eq!(cw.fiber_dim(&p).unwrap(), poly.fiber_dim(&p).unwrap());
        }
    }
}

#[test]
fn partition_errors() {
    let x = vars(&["x"]).parse("x").unwrap();
    let overlap = vec![
        Piece { cell: Cell::new(vec![SignCondition::new(x.clone(), Relation::Ge)]), generators: PolyMatrix::zeros(1, 0, 1) },
        Piece { cell: Cell::new(vec![SignCondition::new(x.clone(), Relation::Le)]), generators: PolyMatrix::zeros(1, 0, 1) },
    ];
    assert!(CellwiseBundle::new(1, 1, overlap, BoxDomain::unbounded(1)).is_err());
    let gap = vec![
        Piece { cell: Cell::new(vec![SignCondition::new(x.clone(), Relation::Gt)]), generators: PolyMatrix::zeros(1, 0, 1) },
        Piece { cell: Cell::new(vec![SignCondition::new(x, Relation::Lt)]), generators: PolyMatrix::zeros(1, 0, 1) },
    ];
    let e = CellwiseBundle::new(1, 1, gap, BoxDomain::unbounded(1));
    // a gap at a single point is invisible to sampling; the query there fails instead
    if let Ok(e) = e {
        assert!(e.fiber_dim(&Point::Rational(vec![int(0)])).is_err());
    }
}
