//! Acceptance suite: one line per criterion with its time budget. Exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tepui_core::algebroid::{check_leibniz, check_weak_jacobi, foliation_of, in_span_at, quotient_obstruction, synthesize_bracket, AnchoredBracket};
use tepui_core::bundle::{mrank_grid, BoxDomain, Bundle, Cell, Grid, Piece, Relation, SignCondition, SubbundlePresentation};
use tepui_core::constructions::{base_change_comparison, bundle_jet_dim, jet_module_tensor, pullback, tensor, JetFactor, PolyMap};
use tepui_core::dynamics::{bott_transport, flow, FPath, Segment, TransportConfig};
use tepui_core::grobner::{module_member, ModuleBasis};
use tepui_core::modules::{fiber_determination_univariate, fp_fiber_dim, invisible_test, module_to_bundle, FPModule, InvisibilityStatus};
use tepui_core::polyalg::{int, linalg, rat, Monomial, PolyMatrix, Point, Polynomial, Rational};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(x: Rational) -> Point {
    Point::Rational(vec![x])
}

fn cross() -> Bundle {
    let v = vars(&["x"]);
    SubbundlePresentation::new(1, PolyMatrix::from_rows(1, vec![vec![parse(&v, "x")]]).unwrap(), BoxDomain::unbounded(1))
        .unwrap()
        .into()
}

fn half(rel: Relation, other: Relation) -> Bundle {
    let x = parse(&vars(&["x"]), "x");
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

fn nonzero_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let r = rat(rng.gen_range(-1000..=1000), rng.gen_range(1..=97));
        if !r.is_zero() {
            return r;
        }
    }
}

fn criterion_1() -> Check {
    let e = cross();
    let at0 = e.fiber_dim(&q(int(0))).map_err(|e| e.to_string())?;
    ensure(at0 == 1, || format!("fiber at 0 is {at0}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let m = nonzero_rational(&mut rng);
        let d = e.fiber_dim(&q(m.clone())).map_err(|e| e.to_string())?;
        ensure(d == 0, || format!("fiber at {m} is {d}"))?;
    }
    Ok(())
}

fn criterion_2() -> Check {
    let (a, b) = (half(Relation::Ge, Relation::Lt), half(Relation::Le, Relation::Gt));
    let t = tensor(&a, &b).map_err(|e| e.to_string())?;
    let grid = Grid::new(vec![int(-1)], vec![int(1)], rat(1, 20)).unwrap();
    let report = mrank_grid(&t, &grid).map_err(|e| e.to_string())?;
    ensure(report.nodes.len() == 41, || format!("{} nodes", report.nodes.len()))?;
    for (node, d) in report.nodes.iter().zip(&report.dims) {
        let expected = usize::from(node[0].is_zero());
        ensure(*d == expected, || format!("fiber {d} at {}", node[0]))?;
    }
    let fa = JetFactor::of_bundle(&a).map_err(|e| e.to_string())?;
    let fb = JetFactor::of_bundle(&b).map_err(|e| e.to_string())?;
    for k in 0..=5u32 {
        let module_side = jet_module_tensor(&fa, &fb, &[int(0)], k).map_err(|e| e.to_string())?;
        let bundle_side = bundle_jet_dim(&t, &int(0), k).map_err(|e| e.to_string())?;
        ensure(module_side == k as usize + 1 && bundle_side == 1, || {
            format!("order {k}: module side {module_side}, bundle side {bundle_side}")
        })?;
    }
    Ok(())
}

fn criterion_3() -> Check {
    let v = vars(&["x"]);
    let x = parse(&v, "x");
    let m = FPModule::new(1, PolyMatrix::from_rows(1, vec![vec![parse(&v, "x^2")]]).unwrap()).unwrap();
    let verdict = invisible_test(&m, std::slice::from_ref(&x), 500, 0).map_err(|e| e.to_string())?;
    ensure(verdict.status == InvisibilityStatus::CertifiedInvisible, || format!("x: {}", verdict.status.as_str()))?;
    ensure(!module_member(std::slice::from_ref(&x), &m.relations()).unwrap(), || "x lies in (x^2)".into())?;
    let verdict = invisible_test(&m, &[Polynomial::one(1)], 500, 0).map_err(|e| e.to_string())?;
    ensure(verdict.status == InvisibilityStatus::CertifiedVisible && verdict.witness == Some(vec![int(0)]), || {
        format!("1: {} at {:?}", verdict.status.as_str(), verdict.witness)
    })?;
    let fd = fiber_determination_univariate(&m).map_err(|e| e.to_string())?;
    ensure(fd.invisible_generators == vec![vec![x.clone()]], || format!("inv(Q) = {:?}", fd.invisible_generators))?;
    ensure(fd.quotient.presentation() == &PolyMatrix::from_rows(1, vec![vec![x]]).unwrap(), || "quotient is not Q[x]/(x)".into())
}

fn criterion_4() -> Check {
    let f = PolyMap::new(1, vec![parse(&vars(&["y"]), "y^2")]).unwrap();
    let pulled = pullback(&cross(), &f, &BoxDomain::unbounded(1)).map_err(|e| e.to_string())?;
    let at0 = pulled.fiber_dim(&q(int(0))).map_err(|e| e.to_string())?;
    ensure(at0 == 1, || format!("pullback fiber {at0} at 0"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let m = nonzero_rational(&mut rng);
        let d = pulled.fiber_dim(&q(m.clone())).map_err(|e| e.to_string())?;
        ensure(d == 0, || format!("pullback fiber {d} at {m}"))?;
    }
    let d = ModuleBasis::new(1, 1, vec![vec![parse(&vars(&["x"]), "x")]]).unwrap();
    let r = base_change_comparison(1, &d, &f, &[int(0)], 1, None).map_err(|e| e.to_string())?;
    ensure(!r.alpha_d_surjective_at_order_k && r.ker_alpha_nontrivial, || {
        format!("surjective {}, kernel nontrivial {}", r.alpha_d_surjective_at_order_k, r.ker_alpha_nontrivial)
    })
}

fn criterion_5() -> Check {
    let v = vars(&["y"]);
    let anchor = PolyMatrix::from_rows(1, vec![vec![parse(&v, "1"), parse(&v, "0")]]).unwrap();
    let l = AnchoredBracket::new(anchor, vec![]).unwrap();
    let d = ModuleBasis::new(2, 1, vec![vec![parse(&v, "0"), parse(&v, "y")]]).unwrap();
    let w = quotient_obstruction(&d, &l, 2, 0).map_err(|e| e.to_string())?.ok_or("no witness")?;
    let sigma = vec![parse(&v, "0"), parse(&v, "y")];
    ensure(w.frame == 0 && w.sigma == sigma && w.point == vec![int(0)], || format!("witness (e{}, {:?}) at {:?}", w.frame, w.sigma, w.point))?;
    let dmat = PolyMatrix::from_columns(2, 1, d.columns()).unwrap();
    ensure(in_span_at(&dmat, &w.sigma, &w.point).unwrap() && !in_span_at(&dmat, &w.bracket, &w.point).unwrap(), || {
        "exact rank re-check failed".into()
    })
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..20 {
        let anchor = random_involutive_anchor(&mut rng);
        ensure(foliation_of(&anchor).unwrap().involutive, || format!("anchor {i} is not involutive"))?;
        let l = synthesize_bracket(&anchor).map_err(|e| format!("anchor {i}: {e}"))?;
        ensure(check_leibniz(&l).unwrap().is_none(), || format!("anchor {i}: Leibniz fails"))?;
        ensure(check_weak_jacobi(&l).unwrap().is_none(), || format!("anchor {i}: weak Jacobi fails"))?;
    }
    Ok(())
}

/// Is `v = Σ λᵢ bᵢ` solvable with `deg λᵢ ≤ bound`? Exact linear algebra on
/// coefficient vectors.
fn truncated_oracle(v: &Polynomial, gens: &[Polynomial], bound: u32) -> bool {
    let n = v.nvars();
    let lambda_monos = Monomial::all_up_to_degree(n, bound);
    let mut products: Vec<Polynomial> = Vec::new();
    for g in gens {
        for m in &lambda_monos {
            products.push(g.mul_term(m, &int(1)));
        }
    }
    let mut rows_index: Vec<Monomial> = products.iter().chain([v]).flat_map(|p| p.terms().map(|(m, _)| m.clone())).collect();
    rows_index.sort();
    rows_index.dedup();
    let column = |p: &Polynomial| -> Vec<Rational> { rows_index.iter().map(|m| p.coefficient(m)).collect() };
    let cols: Vec<Vec<Rational>> = products.iter().map(column).collect();
    let target = column(v);
    // rank of the span of the columns, with and without v
    let a: Vec<Vec<Rational>> = cols.clone();
    let mut b = cols;
    b.push(target);
    linalg::rank_rational(&a) == linalg::rank_rational(&b)
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..50 {
        let n = rng.gen_range(1..=3usize);
        let k = rng.gen_range(1..=2usize);
        // no constant terms, so anything with a nonzero constant term is outside
        let gens: Vec<Polynomial> = (0..k)
            .map(|_| loop {
                let p = random_poly(&mut rng, n, 3, 3);
                let p = &p - &Polynomial::constant(n, p.coefficient(&Monomial::one(n)));
                if !p.is_zero() {
                    break p;
                }
            })
            .collect();
        let basis = ModuleBasis::ideal(n, gens.clone()).unwrap();
        let coeffs: Vec<Polynomial> = (0..k).map(|_| random_poly(&mut rng, n, 1, 2)).collect();
        let member = gens.iter().zip(&coeffs).fold(Polynomial::zero(n), |acc, (g, c)| &acc + &(g * c));
        let outsider = &member + &Polynomial::one(n);
        let random = random_poly(&mut rng, n, 3, 3);
        ensure(module_member(std::slice::from_ref(&member), &basis).unwrap(), || format!("ideal {i}: constructed member rejected"))?;
        let bound = member.total_degree().unwrap_or(0) + 3;
        ensure(truncated_oracle(&member, &gens, bound), || format!("ideal {i}: oracle misses a constructed member"))?;
        ensure(!module_member(&[outsider], &basis).unwrap(), || format!("ideal {i}: constructed non-member accepted"))?;
        for v in [member, random] {
            let bound = v.total_degree().unwrap_or(0) + 3;
            if truncated_oracle(&v, &gens, bound) {
                ensure(module_member(std::slice::from_ref(&v), &basis).unwrap(), || format!("ideal {i}: oracle member {v:?} rejected"))?;
            }
        }
    }
    Ok(())
}

fn rotation() -> Vec<Vec<Polynomial>> {
    sections(&vars(&["x", "y"]), &[&["-y", "x"]])
}

fn fitted_order(steps: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn criterion_8() -> Check {
    let cfg = TransportConfig::default();
    let g = rotation();
    let loop_of = |t: f64| FPath { start: vec![1.0, 0.0], segments: vec![Segment { lambda: vec![1.0], t }] };
    let full = bott_transport(&g, &loop_of(2.0 * std::f64::consts::PI), &[1.0, 0.0], &cfg).map_err(|e| e.to_string())?;
    let c = &full.class_representative;
    ensure((c[0] - 1.0).abs() <= 1e-5 && c[1].abs() <= 1e-5, || format!("2π loop class {c:?}"))?;
    let half = bott_transport(&g, &loop_of(std::f64::consts::PI), &[1.0, 0.0], &cfg).map_err(|e| e.to_string())?;
    let c = &half.class_representative;
    ensure((c[0] + 1.0).abs() <= 1e-5 && c[1].abs() <= 1e-5, || format!("π loop class {c:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let u = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let w = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let p = loop_of(rng.gen_range(0.5..6.0));
        let tu = bott_transport(&g, &p, &u, &cfg).unwrap().class_representative;
        let tw = bott_transport(&g, &p, &w, &cfg).unwrap().class_representative;
        let mix = [a * u[0] + b * w[0], a * u[1] + b * w[1]];
        let tm = bott_transport(&g, &p, &mix, &cfg).unwrap().class_representative;
        for i in 0..2 {
            ensure((tm[i] - (a * tu[i] + b * tw[i])).abs() <= 1e-6, || format!("linearity off by {}", tm[i] - (a * tu[i] + b * tw[i])))?;
        }
    }

    let steps = [1e-1, 5e-2, 2.5e-2];
    let euler = sections(&vars(&["x"]), &[&["x"]]);
    let e1: Vec<f64> = steps.iter().map(|&h| (flow(&euler[0], &[1.0], 1.0, h).unwrap()[0] - 1f64.exp()).abs()).collect();
    let e2: Vec<f64> = steps
        .iter()
        .map(|&h| {
            let y = flow(&g[0], &[1.0, 0.0], 1.0, h).unwrap();
            (y[0] - 1f64.cos()).hypot(y[1] - 1f64.sin())
        })
        .collect();
    let (o1, o2) = (fitted_order(&steps, &e1), fitted_order(&steps, &e2));
    ensure(o1 >= 3.7 && o2 >= 3.7, || format!("fitted orders {o1:.3} and {o2:.3}"))
}

fn semicontinuous(e: &Bundle, lo: i64, hi: i64) -> Result<bool, String> {
    let n = e.nvars();
    let grid = Grid::new(vec![int(lo); n], vec![int(hi); n], if n == 1 { rat(1, 8) } else { rat(1, 2) }).map_err(|e| e.to_string())?;
    Ok(mrank_grid(e, &grid).map_err(|e| e.to_string())?.semicontinuous)
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..20 {
        let n = rng.gen_range(1..=2usize);
        let rows = rng.gen_range(1..=3usize);
        let cols = rng.gen_range(1..=3usize);
        let g = random_matrix(&mut rng, rows, cols, n, 2);
        let e: Bundle = SubbundlePresentation::new(rows, g, BoxDomain::unbounded(n)).unwrap().into();
        ensure(semicontinuous(&e, -2, 2)?, || format!("random bundle {i} fails"))?;
    }
    let y2 = PolyMap::new(1, vec![parse(&vars(&["y"]), "y^2")]).unwrap();
    let v = vars(&["x"]);
    let free2: Bundle = SubbundlePresentation::new(2, PolyMatrix::zeros(2, 0, 1), BoxDomain::unbounded(1)).unwrap().into();
    let constant: Bundle = SubbundlePresentation::new(2, PolyMatrix::from_rows(1, vec![vec![parse(&v, "1")], vec![parse(&v, "0")]]).unwrap(), BoxDomain::unbounded(1))
        .unwrap()
        .into();
    let (ge, le) = (half(Relation::Ge, Relation::Lt), half(Relation::Le, Relation::Gt));
    let fixtures = [
        ("cross", cross()),
        ("free2", free2),
        ("constant", constant),
        ("tensor", tensor(&ge, &le).unwrap()),
        ("pullback", pullback(&cross(), &y2, &BoxDomain::unbounded(1)).unwrap()),
        ("E>=", ge),
        ("E<=", le),
    ];
    for (name, e) in fixtures {
        ensure(semicontinuous(&e, -1, 1)?, || format!("fixture {name} fails"))?;
    }
    Ok(())
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..20 {
        let n = if i % 2 == 0 { 1 } else { 2 };
        let p = rng.gen_range(1..=2usize);
        let cols = rng.gen_range(1..=3usize);
        let q = FPModule::new(p, random_matrix(&mut rng, p, cols, n, 2)).unwrap();
        let e = module_to_bundle(&q);
        for _ in 0..200 {
            let m = Point::Rational(random_point(&mut rng, n));
            let (a, b) = (e.fiber_dim(&m).unwrap(), fp_fiber_dim(&q, &m).unwrap());
            ensure(a == b, || format!("presentation {i} at {}: bundle {a}, module {b}", m.describe()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Duration); 10] = [
        ("cross-bundle fibers", criterion_1, Duration::from_secs(1)),
        ("non-monoidal tensor", criterion_2, Duration::from_secs(5)),
        ("invisible element of Q[x]/(x^2)", criterion_3, Duration::from_secs(1)),
        ("base change along y^2", criterion_4, Duration::from_secs(2)),
        ("bracket obstruction witness", criterion_5, Duration::from_secs(2)),
        ("almost-Lie bracket synthesis", criterion_6, Duration::from_secs(30)),
        ("Groebner membership oracle", criterion_7, Duration::from_secs(60)),
        ("Bott transport", criterion_8, Duration::from_secs(10)),
        ("semicontinuity suite", criterion_9, Duration::from_secs(10)),
        ("module-to-bundle fiber round trip", criterion_10, Duration::from_secs(30)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            ensure(elapsed <= budget, || format!("took {:.2}s, budget {}s", elapsed.as_secs_f64(), budget.as_secs()))
        });
        let (status, detail) = match result {
            Ok(()) => ("PASS", String::new()),
            Err(e) => {
                failures += 1;
                ("FAIL", format!(": {e}"))
            }
        };
        println!("criterion {:>2} {status} {name} ({:.3}s / {}s){detail}", i + 1, elapsed.as_secs_f64(), budget.as_secs());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
