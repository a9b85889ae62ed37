use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use tepui_core::algebroid::{
    check_ideal, check_jacobi, check_leibniz, check_weak_jacobi, foliation_of, jacobi_is_zero, quotient_obstruction,
    synthesize_bracket, DEFAULT_OBSTRUCTION_DEGREE,
};
use tepui_core::bundle::{mrank_grid, Grid};
use tepui_core::constructions::{base_change_comparison, bundle_jet_dim, direct_sum, jet_module_tensor, pullback, tensor, JetFactor};
use tepui_core::dynamics::{bott_transport, leaf_explore, TransportConfig, DEFAULT_RANK_NODES, DEFAULT_RESIDUAL_TOL, DEFAULT_STEP};
use tepui_core::modules::{fiber_determination_univariate, invisible_test, DEFAULT_SAMPLES};
use tepui_core::polyalg::{PolyMatrix, Point, Variables};

use crate::error::{CliError, CliResult};
use crate::fixtures;
use crate::format::{self, object, poly_vec, rational_vec, real, real_vec};

#[derive(Parser, Debug)]
#[command(name = "tepui", version, about = "Singular vector bundles, section modules and algebroids over polynomial data")]
pub struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Only parse and check the input files.
    #[arg(long, global = true)]
    pub validate: bool,
    /// Seed for sampled checks.
    #[arg(long, global = true, env = "TEPUI_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Cap on worker threads.
    #[arg(long, global = true, env = "TEPUI_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fiber dimension of a bundle (or module) at a point.
    Fiber {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Fiber dimensions on a grid, as CSV, with a semicontinuity verdict.
    Rankmap {
        file: PathBuf,
        /// `lo:hi` per variable, comma-separated; defaults to the domain.
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: Option<String>,
        #[arg(long, default_value = "1/10")]
        step: String,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tensor product (or direct sum) of two bundles over the same base.
    Tensor {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        sum: bool,
        /// Report the fiber dimension here instead of the bundle.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Pullback of a bundle along a polynomial map.
    Pullback {
        bundle: PathBuf,
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Whether an element of a module vanishes in every fiber.
    Invisible {
        module: PathBuf,
        /// Entries of the element, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Invisible submodule and fiber-determined quotient of a module over ℚ[x].
    Fibdet { module: PathBuf },
    /// Leibniz, Jacobi, ideal and quotient checks for an anchored bracket.
    Check {
        algebroid: PathBuf,
        /// Submodule (sections file) to test as an ideal.
        #[arg(long)]
        ideal: Option<PathBuf>,
        /// Search for a bracket leaving the ideal pointwise.
        #[arg(long, requires = "ideal")]
        obstruction: bool,
        #[arg(long, default_value_t = DEFAULT_OBSTRUCTION_DEGREE)]
        degree: u32,
    },
    /// Almost-Lie bracket for an involutive anchor.
    Synthesize { file: PathBuf },
    /// Compare f*⟨D⟩ with the sections of the pointwise pullback f*D.
    Basechange {
        /// Submodule D (sections file over the target).
        d: PathBuf,
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 1)]
        order: u32,
        /// Generators of the sections of f*D, when known.
        #[arg(long)]
        gamma: Option<PathBuf>,
    },
    /// Jet dimensions of the module tensor and of the tensor bundle.
    Jettensor {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Highest jet order reported.
        #[arg(long, default_value_t = 5)]
        order: u32,
    },
    /// Points reachable by composing generator flows, with fiber ranks.
    Leaf {
        fields: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 0.1)]
        step_time: f64,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        rk_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel transport of a normal vector along a foliated path.
    Transport {
        fields: PathBuf,
        path: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        rk_step: f64,
        #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
        residual_tol: f64,
        #[arg(long, default_value_t = DEFAULT_RANK_NODES)]
        nodes: usize,
    },
    /// Run the built-in example suite.
    Fixtures {
        #[arg(long)]
        list: bool,
        /// Read fixture files from this directory instead of the built-in copies.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

/// A finished command: text for humans, JSON for `--json`, and an exit code
/// (nonzero when a check failed).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub exit: i32,
}

impl Outcome {
    fn ok(text: impl Into<String>, json: Value) -> Self {
        Outcome { text: text.into(), json, exit: 0 }
    }

    fn valid() -> Self {
        Outcome::ok("valid", json!({ "valid": true }))
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            format::render(&self.json)
        } else {
            self.text.clone()
        }
    }
}

fn point_in(vars: &Variables, s: &str) -> CliResult<Vec<tepui_core::polyalg::Rational>> {
    let p = format::parse_point(s)?;
    if p.len() != vars.len() {
        return Err(CliError::Parse(format!("point has {} coordinates, expected {}", p.len(), vars.len())));
    }
    Ok(p)
}

fn reals_in(n: usize, s: &str, what: &str) -> CliResult<Vec<f64>> {
    let v = format::parse_reals(s)?;
    if v.len() != n {
        return Err(CliError::Parse(format!("{what} has {} coordinates, expected {n}", v.len())));
    }
    Ok(v)
}

fn same_vars(a: &Variables, b: &Variables) -> CliResult<()> {
    if a != b {
        return Err(CliError::Parse(format!("variables differ: {:?} vs {:?}", a.names(), b.names())));
    }
    Ok(())
}

fn write_out(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Bundle or module file; modules are read as the bundle of their fibers.
fn fibered(v: &Value) -> CliResult<format::BundleFile> {
    if v.get("presentation").is_some() {
        let m = format::module(v)?;
        let b = tepui_core::modules::module_to_bundle(&m.module);
        return Ok(format::BundleFile { vars: m.vars, bundle: b.into() });
    }
    format::bundle(v)
}

fn parse_box(s: &str, nvars: usize) -> CliResult<(Vec<tepui_core::polyalg::Rational>, Vec<tepui_core::polyalg::Rational>)> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in s.split(',') {
        let (a, b) = part.split_once(':').ok_or_else(|| CliError::Parse(format!("box interval `{part}` is not lo:hi")))?;
        lo.push(format::parse_rational(a)?);
        hi.push(format::parse_rational(b)?);
    }
    if lo.len() != nvars {
        return Err(CliError::Parse(format!("box has {} intervals, expected {nvars}", lo.len())));
    }
    Ok((lo, hi))
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let validate = cli.validate;
    match &cli.command {
        Command::Fiber { file, point } => {
            let b = fibered(&format::read_json(file)?)?;
            let p = point_in(&b.vars, point)?;
            if validate {
                return Ok(Outcome::valid());
            }
            let d = b.bundle.fiber_dim(&Point::Rational(p.clone()))?;
            Ok(Outcome::ok(d.to_string(), object([("point", rational_vec(&p)), ("fiber_dim", json!(d))])))
        }
        Command::Rankmap { file, bounds, step, out } => {
            let b = fibered(&format::read_json(file)?)?;
            let step = format::parse_rational(step)?;
            let (lo, hi) = match bounds {
                Some(s) => parse_box(s, b.vars.len())?,
                None => {
                    let d = &b.bundle.domain().bounds;
                    if d.iter().any(|(l, h)| l.is_none() || h.is_none()) {
                        return Err(CliError::Domain("unbounded domain; pass --box".into()));
                    }
                    d.iter().map(|(l, h)| (l.clone().unwrap(), h.clone().unwrap())).unzip()
                }
            };
            let grid = Grid::new(lo, hi, step).map_err(CliError::parse)?;
            if validate {
                return Ok(Outcome::valid());
            }
            let report = mrank_grid(&b.bundle, &grid)?;
            let csv = report.to_csv(b.vars.names());
            let verdict = format!("semicontinuity: {}", if report.semicontinuous { "pass" } else { "fail" });
            let text = match out {
                Some(path) => {
                    write_out(path, &csv)?;
                    verdict
                }
                None => format!("{csv}{verdict}"),
            };
            let nodes: Vec<Value> =
                report.nodes.iter().map(|n| real_vec(&n.iter().map(format::rational_f64).collect::<Vec<_>>())).collect();
            let json = object([
                ("nodes", Value::Array(nodes)),
                ("dims", json!(report.dims)),
                ("semicontinuous", json!(report.semicontinuous)),
                ("certified_pairs", json!(report.certified_pairs)),
                ("violations", json!(report.violations)),
            ]);
            Ok(Outcome::ok(text, json))
        }
        Command::Tensor { a, b, sum, point } => {
            let ea = format::bundle(&format::read_json(a)?)?;
            let eb = format::bundle(&format::read_json(b)?)?;
            same_vars(&ea.vars, &eb.vars)?;
            let p = point.as_deref().map(|s| point_in(&ea.vars, s)).transpose()?;
            if validate {
                return Ok(Outcome::valid());
            }
            let e = if *sum { direct_sum(&ea.bundle, &eb.bundle)? } else { tensor(&ea.bundle, &eb.bundle)? };
            bundle_or_fiber(&ea.vars, &e, p)
        }
        Command::Pullback { bundle, map, point } => {
            let e = format::bundle(&format::read_json(bundle)?)?;
            let f = format::poly_map(&format::read_json(map)?)?;
            same_vars(&e.vars, &f.target)?;
            let p = point.as_deref().map(|s| point_in(&f.source, s)).transpose()?;
            if validate {
                return Ok(Outcome::valid());
            }
            let pulled = pullback(&e.bundle, &f.map, &f.source_domain)?;
            bundle_or_fiber(&f.source, &pulled, p)
        }
        Command::Invisible { module, element, samples } => {
            let q = format::module(&format::read_json(module)?)?;
            let v = element.split(',').map(|s| q.vars.parse(s).map_err(CliError::parse)).collect::<CliResult<Vec<_>>>()?;
            if v.len() != q.module.free_rank() {
                return Err(CliError::Parse(format!("element has {} entries, expected {}", v.len(), q.module.free_rank())));
            }
            if validate {
                return Ok(Outcome::valid());
            }
            let verdict = invisible_test(&q.module, &v, *samples, cli.seed)?;
            let is_zero = q.module.is_zero_element(&v)?;
            let mut text = verdict.status.as_str().to_string();
            if let Some(w) = &verdict.witness {
                text.push_str(&format!(" at ({})", w.iter().map(tepui_core::polyalg::format_rational).collect::<Vec<_>>().join(", ")));
            }
            let json = object([
                ("status", json!(verdict.status.as_str())),
                ("witness", verdict.witness.as_deref().map_or(Value::Null, rational_vec)),
                ("certified_orders", json!(verdict.certified_orders)),
                ("samples_checked", json!(verdict.samples_checked)),
                ("module_member", json!(is_zero)),
            ]);
            Ok(Outcome::ok(text, json))
        }
        Command::Fibdet { module } => {
            let q = format::module(&format::read_json(module)?)?;
            if validate {
                return Ok(Outcome::valid());
            }
            let fd = fiber_determination_univariate(&q.module)?;
            let gens: Vec<Value> = fd.invisible_generators.iter().map(|g| poly_vec(&q.vars, g)).collect();
            let quotient = format::module_json(&q.vars, &fd.quotient);
            let text = format!(
                "invisible generators: {}\nquotient: {}",
                serde_json::to_string(&gens).unwrap(),
                serde_json::to_string(&quotient["presentation"]).unwrap()
            );
            Ok(Outcome::ok(text, object([("invisible_generators", Value::Array(gens)), ("quotient", quotient)])))
        }
        Command::Check { algebroid, ideal, obstruction, degree } => {
            let a = format::algebroid(&format::read_json(algebroid)?)?;
            let d = match ideal {
                Some(path) => {
                    let s = format::sections(&format::read_json(path)?)?;
                    same_vars(&a.vars, &s.vars)?;
                    if s.rank != a.bracket.anchor().cols() {
                        return Err(CliError::Parse(format!("ideal has rank {}, algebroid rank {}", s.rank, a.anchor.cols())));
                    }
                    Some(s.basis()?)
                }
                None => None,
            };
            if validate {
                return Ok(Outcome::valid());
            }
            check_report(&a, d.as_ref(), *obstruction, *degree, cli.seed)
        }
        Command::Synthesize { file } => {
            let v = format::read_json(file)?;
            let (vars, anchor) = if v.get("anchor").is_some() {
                let a = format::algebroid(&v)?;
                (a.vars, a.anchor)
            } else {
                let s = format::sections(&v)?;
                if s.rank != s.vars.len() {
                    return Err(CliError::Parse("vector fields need one entry per variable".into()));
                }
                let m = PolyMatrix::from_columns(s.rank, s.vars.len(), &s.generators).map_err(CliError::parse)?;
                (s.vars, m)
            };
            if validate {
                return Ok(Outcome::valid());
            }
            let l = synthesize_bracket(&anchor)?;
            let out = format::algebroid_json(&vars, &l);
            Ok(Outcome::ok(format::render(&out), out))
        }
        Command::Basechange { d, map, point, order, gamma } => {
            let d = format::sections(&format::read_json(d)?)?;
            let f = format::poly_map(&format::read_json(map)?)?;
            same_vars(&d.vars, &f.target)?;
            let m = point_in(&f.source, point)?;
            let supplied = match gamma {
                Some(path) => {
                    let g = format::sections(&format::read_json(path)?)?;
                    same_vars(&g.vars, &f.source)?;
                    Some(g.generators)
                }
                None => None,
            };
            let basis = d.basis()?;
            if validate {
                return Ok(Outcome::valid());
            }
            let r = base_change_comparison(d.rank, &basis, &f.map, &m, *order, supplied)?;
            let witness = r.witness.as_deref().map_or(Value::Null, |w| poly_vec(&f.source, w));
            let text = format!(
                "alpha_D surjective at order {order}: {}\nker alpha nontrivial: {}\nwitness: {}",
                r.alpha_d_surjective_at_order_k,
                r.ker_alpha_nontrivial,
                serde_json::to_string(&witness).unwrap()
            );
            let json = object([
                ("alpha_D_surjective_at_order_k", json!(r.alpha_d_surjective_at_order_k)),
                ("ker_alpha_nontrivial", json!(r.ker_alpha_nontrivial)),
                ("witness", witness),
                ("order", json!(order)),
            ]);
            Ok(Outcome::ok(text, json))
        }
        Command::Jettensor { a, b, point, order } => {
            let ea = fibered(&format::read_json(a)?)?;
            let eb = fibered(&format::read_json(b)?)?;
            same_vars(&ea.vars, &eb.vars)?;
            let m = point_in(&ea.vars, point)?;
            if validate {
                return Ok(Outcome::valid());
            }
            let fa = JetFactor::of_bundle(&ea.bundle)?;
            let fb = JetFactor::of_bundle(&eb.bundle)?;
            let t = tensor(&ea.bundle, &eb.bundle)?;
            let mut rows = Vec::new();
            let mut text = String::from("k,module,bundle\n");
            for k in 0..=*order {
                let module_side = jet_module_tensor(&fa, &fb, &m, k)?;
                let bundle_side = if m.len() == 1 { Some(bundle_jet_dim(&t, &m[0], k)?) } else { None };
                text.push_str(&format!("{k},{module_side},{}\n", bundle_side.map_or("-".into(), |d| d.to_string())));
                rows.push(object([("order", json!(k)), ("module_side", json!(module_side)), ("bundle_side", json!(bundle_side))]));
            }
            Ok(Outcome::ok(text.trim_end(), object([("point", rational_vec(&m)), ("jets", Value::Array(rows))])))
        }
        Command::Leaf { fields, start, step_time, depth, rk_step, out } => {
            let s = format::sections(&format::read_json(fields)?)?;
            let x0 = reals_in(s.vars.len(), start, "start")?;
            if s.rank != s.vars.len() {
                return Err(CliError::Parse("vector fields need one entry per variable".into()));
            }
            if validate {
                return Ok(Outcome::valid());
            }
            let cloud = leaf_explore(&s.generators, &x0, *step_time, *depth, *rk_step)?;
            let csv = cloud.to_csv(s.vars.names());
            let verdict = format!("constant rank: {}", if cloud.constant_rank { "yes" } else { "no" });
            let text = match out {
                Some(path) => {
                    write_out(path, &csv)?;
                    verdict
                }
                None => format!("{csv}{verdict}"),
            };
            let json = object([
                ("points", Value::Array(cloud.points.iter().map(|p| real_vec(p)).collect())),
                ("ranks", json!(cloud.ranks)),
                ("constant_rank", json!(cloud.constant_rank)),
            ]);
            Ok(Outcome::ok(text, json))
        }
        Command::Transport { fields, path, w, rk_step, residual_tol, nodes } => {
            let s = format::sections(&format::read_json(fields)?)?;
            let p = format::fpath(&format::read_json(path)?)?;
            let n = s.vars.len();
            if p.start.len() != n || s.rank != n {
                return Err(CliError::Parse(format!("path and fields must live in dimension {n}")));
            }
            p.validate(s.generators.len()).map_err(CliError::parse)?;
            let w0 = reals_in(n, w, "w")?;
            if validate {
                return Ok(Outcome::valid());
            }
            let config = TransportConfig { step: *rk_step, residual_tol: *residual_tol, rank_nodes: *nodes };
            let r = bott_transport(&s.generators, &p, &w0, &config)?;
            let text = format!(
                "point: {}\nclass: {}\nresidual: {:e} ({})",
                fmt_reals(&r.point),
                fmt_reals(&r.class_representative),
                r.residual,
                if r.residual_ok { "ok" } else { "above tolerance" }
            );
            let json = object([
                ("point", real_vec(&r.point)),
                ("w", real_vec(&r.w)),
                ("class_representative", real_vec(&r.class_representative)),
                ("residual", real(r.residual)),
                ("residual_ok", json!(r.residual_ok)),
                ("pivots", json!(r.pivots)),
            ]);
            let exit = if r.residual_ok { 0 } else { 1 };
            Ok(Outcome { text, json, exit })
        }
        Command::Fixtures { list, dir } => {
            let source = match dir {
                Some(d) => fixtures::Source::Dir(d.clone()),
                None => fixtures::Source::Embedded,
            };
            if *list {
                let names: Vec<&str> = fixtures::FIXTURES.iter().map(|f| f.name).collect();
                return Ok(Outcome::ok(names.join("\n"), json!(names)));
            }
            Ok(fixtures::run_all(&source, cli.seed))
        }
    }
}

fn fmt_reals(v: &[f64]) -> String {
    format!("({})", v.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(", "))
}

fn bundle_or_fiber(
    vars: &Variables,
    e: &tepui_core::bundle::Bundle,
    point: Option<Vec<tepui_core::polyalg::Rational>>,
) -> CliResult<Outcome> {
    match point {
        Some(p) => {
            let d = e.fiber_dim(&Point::Rational(p.clone()))?;
            Ok(Outcome::ok(d.to_string(), object([("point", rational_vec(&p)), ("fiber_dim", json!(d))])))
        }
        None => {
            let out = format::bundle_json(vars, e);
            Ok(Outcome::ok(format::render(&out), out))
        }
    }
}

pub(crate) fn check_report(
    a: &format::AlgebroidFile,
    d: Option<&tepui_core::grobner::ModuleBasis>,
    obstruction: bool,
    degree: u32,
    seed: u64,
) -> CliResult<Outcome> {
    let vars = &a.vars;
    let l = &a.bracket;
    let leibniz = check_leibniz(l)?;
    let jacobi = check_jacobi(l)?;
    let weak = check_weak_jacobi(l)?;
    let mut lines = Vec::new();
    let leibniz_json = match &leibniz {
        None => {
            lines.push("leibniz: pass".to_string());
            json!("pass")
        }
        Some(f) => {
            lines.push(format!("leibniz: fail at (e{}, {}·e{})", f.i, vars.format(&f.f), f.j));
            object([
                ("i", json!(f.i)),
                ("j", json!(f.j)),
                ("f", format::poly(vars, &f.f)),
                ("first_slot", json!(f.first_slot)),
                ("residual", poly_vec(vars, &f.residual)),
            ])
        }
    };
    let jacobi_zero = jacobi_is_zero(&jacobi);
    lines.push(format!("jacobi: {}", if jacobi_zero { "zero" } else { "nonzero" }));
    let weak_json = match weak {
        None => {
            lines.push("weak_jacobi: pass".into());
            json!("pass")
        }
        Some((i, j, k)) => {
            lines.push(format!("weak_jacobi: fail at (e{i}, e{j}, e{k})"));
            json!([i, j, k])
        }
    };
    let mut fields = vec![("leibniz", leibniz_json), ("jacobi", json!(if jacobi_zero { "zero" } else { "nonzero" })), ("weak_jacobi", weak_json)];
    if let Some(d) = d {
        let ideal = check_ideal(d, l)?;
        let ideal_json = match &ideal {
            None => {
                lines.push("ideal: pass".into());
                json!("pass")
            }
            Some(w) => {
                lines.push(format!("ideal: fail, [e{}, {}] leaves D", w.frame, serde_json::to_string(&poly_vec(vars, &w.generator)).unwrap()));
                object([
                    ("frame", json!(w.frame)),
                    ("generator", poly_vec(vars, &w.generator)),
                    ("bracket", poly_vec(vars, &w.bracket)),
                ])
            }
        };
        fields.push(("ideal", ideal_json));
        if obstruction {
            let w = quotient_obstruction(d, l, degree, seed)?;
            let wj = match &w {
                None => {
                    lines.push(format!("obstruction_witness: none up to degree {degree}"));
                    Value::Null
                }
                Some(w) => {
                    let at = w.point.iter().map(tepui_core::polyalg::format_rational).collect::<Vec<_>>().join(", ");
                    lines.push(format!(
                        "obstruction_witness: (e{}, {}) at ({at})",
                        w.frame,
                        serde_json::to_string(&poly_vec(vars, &w.sigma)).unwrap()
                    ));
                    object([
                        ("frame", json!(w.frame)),
                        ("sigma", poly_vec(vars, &w.sigma)),
                        ("bracket", poly_vec(vars, &w.bracket)),
                        ("point", rational_vec(&w.point)),
                    ])
                }
            };
            fields.push(("obstruction_witness", wj));
        }
    }
    let f = foliation_of(&a.anchor)?;
    lines.push(format!("anchor image involutive: {}", f.involutive));
    fields.push(("anchor_involutive", json!(f.involutive)));
    let exit = if leibniz.is_some() { 1 } else { 0 };
    Ok(Outcome { text: lines.join("\n"), json: object(fields), exit })
}
