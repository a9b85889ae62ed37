mod common;

use common::*;
use proptest::prelude::*;
use tepui_core::bundle::{BoxDomain, Bundle, Cell, Piece, Relation, SignCondition, SubbundlePresentation};
use tepui_core::constructions::{
    base_change_comparison, direct_sum, jet_dimension, jet_module_tensor, pullback, tensor, JetFactor, PolyMap,
};
use tepui_core::grobner::{module_member, ModuleBasis};
use tepui_core::modules::FPModule;
use tepui_core::polyalg::{int, PolyMatrix, Point, Rational};

fn poly_bundle(g: PolyMatrix) -> Bundle {
    SubbundlePresentation::new(g.rows(), g.clone(), BoxDomain::unbounded(g.nvars())).unwrap().into()
}

fn half(rel: Relation, other: Relation) -> Bundle {
    let x = vars(&["x"]).parse("x").unwrap();
    Bundle::from_pieces(
        1,
        1,
        vec![
            Piece { cell: Cell::new(vec![SignCondition::new(x.clone(), rel)]), generators: PolyMatrix::zeros(1, 0, 1) },
            Piece { cell: Cell::new(vec![SignCondition::new(x, other)]), generators: PolyMatrix::identity(1, 1) },
        ],
        BoxDomain::unbounded(1),
    )
    .unwrap()
}

fn with_boundary(pts: Vec<Vec<Rational>>) -> impl Iterator<Item = Point> {
    pts.into_iter().chain([vec![int(0)]]).map(Point::Rational)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tensor_multiplies_fibers(g in matrix_strategy(2, 1, 1, 2), pts in proptest::collection::vec(point_strategy(1), 20)) {
        let e = poly_bundle(g);
        let f = half(Relation::Ge, Relation::Lt);
        let t = tensor(&e, &f).unwrap();
        let s = direct_sum(&e, &f).unwrap();
        for m in with_boundary(pts) {
            let (a, b) = (e.fiber_dim(&m).unwrap(), f.fiber_dim(&m).unwrap());
            prop_assert_eq!(t.fiber_dim(&m).unwrap(), a * b);
            prop_assert_eq!(s.fiber_dim(&m).unwrap(), a + b);
        }
    }

    #[test]
    fn pullback_preserves_fibers(g in matrix_strategy(2, 2, 1, 2), comp in poly_strategy(2, 2), pts in proptest::collection::vec(point_strategy(2), 20)) {
        let e = poly_bundle(g);
        let f = PolyMap::new(2, vec![comp]).unwrap();
        let pulled = pullback(&e, &f, &BoxDomain::unbounded(2)).unwrap();
        for p in pts {
            let image = f.apply(&p).unwrap();
            prop_assert_eq!(pulled.fiber_dim(&Point::Rational(p)).unwrap(), e.fiber_dim(&Point::Rational(image)).unwrap());
        }
    }

    #[test]
    fn cellwise_pullback_preserves_fibers(pts in proptest::collection::vec(point_strategy(1), 20)) {
        let e = half(Relation::Ge, Relation::Lt);
        let f = PolyMap::new(1, vec![vars(&["t"]).parse("t^3 - t").unwrap()]).unwrap();
        let pulled = pullback(&e, &f, &BoxDomain::unbounded(1)).unwrap();
        for p in with_boundary(pts) {
            let Point::Rational(c) = &p else { unreachable!() };
            let image = Point::Rational(f.apply(c).unwrap());
            prop_assert_eq!(pulled.fiber_dim(&p).unwrap(), e.fiber_dim(&image).unwrap());
        }
    }

    #[test]
    fn jets_grow_with_order(p in matrix_strategy(2, 2, 1, 2), m in point_strategy(1)) {
        let q = FPModule::new(2, p).unwrap();
        let mut last = 0;
        for k in 0..4 {
            let d = jet_dimension(&q, &m, k).unwrap();
            prop_assert!(d >= last);
            last = d;
        }
        // tensoring with the free rank-one module changes nothing
        let free = JetFactor::Module(FPModule::free(1, 1));
        let expected = jet_dimension(&q, &m, 2).unwrap();
        prop_assert_eq!(jet_module_tensor(&JetFactor::Module(q), &free, &m, 2).unwrap(), expected);
    }

    #[test]
    // <D> itself can miss pointwise sections (x^2 vs x), but the module they
    // generate is saturated, so the identity comparison on it is surjective.
    fn identity_base_change_on_sections_is_surjective(gens in proptest::collection::vec(proptest::collection::vec(poly_strategy(1, 2), 2), 1..3), m in point_strategy(1)) {
        let d = ModuleBasis::new(2, 1, gens).unwrap();
        let first = base_change_comparison(2, &d, &PolyMap::identity(1), &m, 2, None).unwrap();
        if first.gamma_generators.is_empty() {
            return Ok(());
        }
        let sat = ModuleBasis::new(2, 1, first.gamma_generators.clone()).unwrap();
        let r = base_change_comparison(2, &sat, &PolyMap::identity(1), &m, 2, None).unwrap();
        prop_assert!(r.alpha_d_surjective_at_order_k);
        prop_assert!(!r.ker_alpha_nontrivial);
        for g in d.columns() {
            prop_assert!(module_member(g, &sat).unwrap());
        }
    }
}
