//! Built-in suite of worked examples, each checked against its known answer.

use std::path::PathBuf;

use serde_json::{json, Value};
use tepui_core::algebroid::{check_jacobi, check_leibniz, check_weak_jacobi, jacobi_is_zero, quotient_obstruction, synthesize_bracket};
use tepui_core::bundle::{mrank_grid, Grid};
use tepui_core::constructions::{base_change_comparison, bundle_jet_dim, jet_module_tensor, pullback, tensor, JetFactor};
use tepui_core::dynamics::{bott_transport, leaf_explore, TransportConfig, DEFAULT_STEP};
use tepui_core::modules::{fiber_determination_univariate, invisible_test, InvisibilityStatus, DEFAULT_SAMPLES};
use tepui_core::polyalg::{int, rat, PolyMatrix, Point, Rational};

use crate::commands::Outcome;
use crate::error::{CliError, CliResult};
use crate::format;

const FILES: &[(&str, &str)] = &[
    ("circle.json", include_str!("../fixtures/circle.json")),
    ("constant.json", include_str!("../fixtures/constant.json")),
    ("cross.json", include_str!("../fixtures/cross.json")),
    ("d_xe.json", include_str!("../fixtures/d_xe.json")),
    ("e_ge.json", include_str!("../fixtures/e_ge.json")),
    ("e_le.json", include_str!("../fixtures/e_le.json")),
    ("euler.json", include_str!("../fixtures/euler.json")),
    ("free2.json", include_str!("../fixtures/free2.json")),
    ("half_circle.json", include_str!("../fixtures/half_circle.json")),
    ("horrible.json", include_str!("../fixtures/horrible.json")),
    ("horrible_d.json", include_str!("../fixtures/horrible_d.json")),
    ("map_y2.json", include_str!("../fixtures/map_y2.json")),
    ("planar_fields.json", include_str!("../fixtures/planar_fields.json")),
    ("rotation.json", include_str!("../fixtures/rotation.json")),
    ("twisted.json", include_str!("../fixtures/twisted.json")),
    ("x_squared.json", include_str!("../fixtures/x_squared.json")),
    ("zero_algebroid.json", include_str!("../fixtures/zero_algebroid.json")),
];

/// Names of the built-in fixture files.
pub fn file_names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

/// Where fixture files are read from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Embedded,
    Dir(PathBuf),
}

impl Source {
    pub fn load(&self, name: &str) -> CliResult<Value> {
        match self {
            Source::Embedded => {
                let text = FILES
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, t)| *t)
                    .ok_or_else(|| CliError::Io(format!("no built-in fixture `{name}`")))?;
                format::parse_json(text)
            }
            Source::Dir(d) => format::read_json(&d.join(name)),
        }
    }
}

pub struct Fixture {
    pub name: &'static str,
    run: fn(&Source, u64) -> CliResult<()>,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture { name: "cross_fibers", run: cross_fibers },
    Fixture { name: "free_rank_two", run: free_rank_two },
    Fixture { name: "cross_rankmap", run: cross_rankmap },
    Fixture { name: "constant_rankmap", run: constant_rankmap },
    Fixture { name: "nonmonoidal_tensor", run: nonmonoidal_tensor },
    Fixture { name: "nonmonoidal_jets", run: nonmonoidal_jets },
    Fixture { name: "invisible_x_squared", run: invisible_x_squared },
    Fixture { name: "base_change_y_squared", run: base_change_y_squared },
    Fixture { name: "bracket_obstruction", run: bracket_obstruction },
    Fixture { name: "twisted_bracket_jacobi", run: twisted_bracket_jacobi },
    Fixture { name: "zero_algebroid", run: zero_algebroid },
    Fixture { name: "synthesis_planar", run: synthesis_planar },
    Fixture { name: "euler_leaf", run: euler_leaf },
    Fixture { name: "rotation_transport", run: rotation_transport },
];

fn expect(cond: bool, what: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Check(what()))
    }
}

fn q(x: i64) -> Point {
    Point::Rational(vec![int(x)])
}

fn dims_on(e: &tepui_core::bundle::Bundle, lo: i64, hi: i64, step: Rational) -> CliResult<(Vec<usize>, bool)> {
    let grid = Grid::new(vec![int(lo)], vec![int(hi)], step)?;
    let r = mrank_grid(e, &grid)?;
    Ok((r.dims, r.semicontinuous))
}

fn cross_fibers(s: &Source, _: u64) -> CliResult<()> {
    let e = format::bundle(&s.load("cross.json")?)?.bundle;
    let at0 = e.fiber_dim(&q(0))?;
    let off = e.fiber_dim(&Point::Rational(vec![rat(1, 2)]))?;
    expect(at0 == 1 && off == 0, || format!("fibers {at0} at 0 and {off} at 1/2, expected 1 and 0"))
}

fn free_rank_two(s: &Source, _: u64) -> CliResult<()> {
    let e = format::bundle(&s.load("free2.json")?)?.bundle;
    let d = e.fiber_dim(&q(1))?;
    expect(d == 2, || format!("fiber {d}, expected 2"))
}

fn cross_rankmap(s: &Source, _: u64) -> CliResult<()> {
    let e = format::bundle(&s.load("cross.json")?)?.bundle;
    let (dims, ok) = dims_on(&e, -1, 1, rat(1, 2))?;
    expect(dims == [0, 0, 1, 0, 0] && ok, || format!("dims {dims:?}, semicontinuous {ok}"))
}

fn constant_rankmap(s: &Source, _: u64) -> CliResult<()> {
    let e = format::bundle(&s.load("constant.json")?)?.bundle;
    let (dims, ok) = dims_on(&e, -1, 1, rat(1, 4))?;
    expect(dims.iter().all(|&d| d == 1) && ok, || format!("dims {dims:?}, semicontinuous {ok}"))
}

fn half_lines(s: &Source) -> CliResult<(tepui_core::bundle::Bundle, tepui_core::bundle::Bundle)> {
    Ok((format::bundle(&s.load("e_ge.json")?)?.bundle, format::bundle(&s.load("e_le.json")?)?.bundle))
}

fn nonmonoidal_tensor(s: &Source, _: u64) -> CliResult<()> {
    let (a, b) = half_lines(s)?;
    let t = tensor(&a, &b)?;
    let (dims, ok) = dims_on(&t, -1, 1, rat(1, 2))?;
    expect(dims == [0, 0, 1, 0, 0] && ok, || format!("dims {dims:?}, semicontinuous {ok}"))
}

fn nonmonoidal_jets(s: &Source, _: u64) -> CliResult<()> {
    let (a, b) = half_lines(s)?;
    let t = tensor(&a, &b)?;
    let (fa, fb) = (JetFactor::of_bundle(&a)?, JetFactor::of_bundle(&b)?);
    for k in 0..=5u32 {
        let module_side = jet_module_tensor(&fa, &fb, &[int(0)], k)?;
        let bundle_side = bundle_jet_dim(&t, &int(0), k)?;
        expect(module_side == k as usize + 1 && bundle_side == 1, || {
            format!("order {k}: module side {module_side}, bundle side {bundle_side}")
        })?;
    }
    Ok(())
}

fn invisible_x_squared(s: &Source, seed: u64) -> CliResult<()> {
    let m = format::module(&s.load("x_squared.json")?)?;
    let x = m.vars.parse("x")?;
    let one = m.vars.parse("1")?;
    let v = invisible_test(&m.module, std::slice::from_ref(&x), DEFAULT_SAMPLES, seed)?;
    expect(v.status == InvisibilityStatus::CertifiedInvisible, || format!("x is {}", v.status.as_str()))?;
    expect(!m.module.is_zero_element(&[x])?, || "x is zero in the module".into())?;
    let v = invisible_test(&m.module, &[one], DEFAULT_SAMPLES, seed)?;
    expect(v.status == InvisibilityStatus::CertifiedVisible && v.witness == Some(vec![int(0)]), || {
        format!("1 is {} with witness {:?}", v.status.as_str(), v.witness)
    })?;
    let fd = fiber_determination_univariate(&m.module)?;
    let x = m.vars.parse("x")?;
    expect(fd.quotient.presentation() == &PolyMatrix::from_rows(1, vec![vec![x.clone()]])?, || {
        "quotient is not Q[x]/(x)".into()
    })?;
    expect(fd.invisible_generators == vec![vec![x]], || "inv(Q) is not generated by x".into())
}

fn base_change_y_squared(s: &Source, _: u64) -> CliResult<()> {
    let d = format::sections(&s.load("d_xe.json")?)?;
    let f = format::poly_map(&s.load("map_y2.json")?)?;
    let r = base_change_comparison(d.rank, &d.basis()?, &f.map, &[int(0)], 1, None)?;
    expect(!r.alpha_d_surjective_at_order_k && r.ker_alpha_nontrivial, || {
        format!("surjective {}, kernel nontrivial {}", r.alpha_d_surjective_at_order_k, r.ker_alpha_nontrivial)
    })?;
    let e = format::bundle(&s.load("cross.json")?)?.bundle;
    let pulled = pullback(&e, &f.map, &f.source_domain)?;
    let dims = [pulled.fiber_dim(&q(-1))?, pulled.fiber_dim(&q(0))?, pulled.fiber_dim(&Point::Rational(vec![rat(1, 3)]))?];
    expect(dims == [0, 1, 0], || format!("pullback fibers {dims:?}"))
}

fn bracket_obstruction(s: &Source, seed: u64) -> CliResult<()> {
    let a = format::algebroid(&s.load("horrible.json")?)?;
    let d = format::sections(&s.load("horrible_d.json")?)?;
    let w = quotient_obstruction(&d.basis()?, &a.bracket, 2, seed)?.ok_or_else(|| CliError::Check("no witness found".into()))?;
    let sigma = vec![a.vars.parse("0")?, a.vars.parse("y")?];
    expect(w.frame == 0 && w.sigma == sigma && w.point == vec![int(0)], || {
        format!("witness (e{}, {:?}) at {:?}", w.frame, w.sigma, w.point)
    })
}

fn twisted_bracket_jacobi(s: &Source, _: u64) -> CliResult<()> {
    let a = format::algebroid(&s.load("twisted.json")?)?;
    expect(check_leibniz(&a.bracket)?.is_none(), || "Leibniz fails".into())?;
    expect(jacobi_is_zero(&check_jacobi(&a.bracket)?), || "Jacobiator nonzero".into())
}

fn zero_algebroid(s: &Source, _: u64) -> CliResult<()> {
    let a = format::algebroid(&s.load("zero_algebroid.json")?)?;
    expect(check_leibniz(&a.bracket)?.is_none(), || "Leibniz fails".into())?;
    expect(jacobi_is_zero(&check_jacobi(&a.bracket)?), || "Jacobiator nonzero".into())?;
    expect(check_weak_jacobi(&a.bracket)?.is_none(), || "weak Jacobi fails".into())
}

fn synthesis_planar(s: &Source, _: u64) -> CliResult<()> {
    let f = format::sections(&s.load("planar_fields.json")?)?;
    let anchor = PolyMatrix::from_columns(f.rank, f.vars.len(), &f.generators)?;
    let l = synthesize_bracket(&anchor)?;
    expect(check_leibniz(&l)?.is_none(), || "Leibniz fails".into())?;
    expect(check_weak_jacobi(&l)?.is_none(), || "weak Jacobi fails".into())
}

fn euler_leaf(s: &Source, _: u64) -> CliResult<()> {
    let f = format::sections(&s.load("euler.json")?)?;
    let c = leaf_explore(&f.generators, &[1.0], 0.5, 4, DEFAULT_STEP)?;
    expect(c.points.iter().all(|p| p[0] > 0.0) && c.constant_rank && c.ranks[0] == 1, || {
        format!("{} points, ranks {:?}", c.points.len(), c.ranks)
    })?;
    let c = leaf_explore(&f.generators, &[0.0], 0.5, 4, DEFAULT_STEP)?;
    expect(c.points.len() == 1 && c.ranks == [0], || format!("leaf of 0 has {} points", c.points.len()))
}

fn rotation_transport(s: &Source, _: u64) -> CliResult<()> {
    let f = format::sections(&s.load("rotation.json")?)?;
    let cfg = TransportConfig::default();
    for (file, sign) in [("circle.json", 1.0), ("half_circle.json", -1.0)] {
        let path = format::fpath(&s.load(file)?)?;
        let r = bott_transport(&f.generators, &path, &[1.0, 0.0], &cfg)?;
        let c = &r.class_representative;
        expect((c[0] - sign).abs() < 1e-5 && c[1].abs() < 1e-5 && r.residual_ok, || format!("{file}: class {c:?}"))?;
    }
    Ok(())
}

/// Run every fixture; the exit code is 1 when any fails.
pub fn run_all(source: &Source, seed: u64) -> Outcome {
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut failed = 0;
    let width = FIXTURES.iter().map(|f| f.name.len()).max().unwrap_or(0);
    for f in FIXTURES {
        let result = (f.run)(source, seed);
        let (status, detail) = match &result {
            Ok(()) => ("pass", String::new()),
            Err(e) => {
                failed += 1;
                ("fail", e.to_string())
            }
        };
        text.push_str(&format!("{:width$}  {status}", f.name));
        if !detail.is_empty() {
            text.push_str(&format!("  {detail}"));
        }
        text.push('\n');
        rows.push(json!({ "name": f.name, "status": status, "detail": detail }));
    }
    text.push_str(&format!("{} passed, {failed} failed", FIXTURES.len() - failed));
    Outcome {
        text,
        json: json!({ "fixtures": rows, "failed": failed }),
        exit: if failed > 0 { 1 } else { 0 },
    }
}
