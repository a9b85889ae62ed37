//! Flows of polynomial vector fields, leaf exploration, rank tracking along
//! foliated paths, and parallel transport for the Bott connection.

mod transport;

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::bundle::BoxDomain;
use crate::error::{Error, Result};
use crate::polyalg::{linalg, Point, Polynomial, DEFAULT_PIVOT_TOL};

pub use transport::{bott_transport, TransportConfig, TransportResult, DEFAULT_RESIDUAL_TOL};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Points of a leaf cloud closer than this are identified.
pub const DEDUP_TOL: f64 = 1e-6;
pub const DEFAULT_RANK_NODES: usize = 100;

/// A polynomial with floating coefficients, for fast evaluation.
#[derive(Clone, Debug)]
pub(crate) struct CompiledPoly {
    terms: Vec<(Vec<(usize, i32)>, f64)>,
}

impl CompiledPoly {
    pub(crate) fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let powers = m.exponents().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e as i32)).collect();
                (powers, c.to_f64().unwrap_or(f64::NAN))
            })
            .collect();
        CompiledPoly { terms }
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(powers, c)| powers.iter().fold(*c, |acc, &(i, e)| acc * x[i].powi(e)))
            .sum()
    }
}

/// A compiled vector field with its Jacobian.
#[derive(Clone, Debug)]
pub(crate) struct CompiledField {
    comps: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
}

impl CompiledField {
    pub(crate) fn new(field: &[Polynomial]) -> Result<Self> {
        let n = field.len();
        for p in field {
            if p.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.nvars() });
            }
        }
        let comps = field.iter().map(CompiledPoly::new).collect();
        let jac = field
            .iter()
            .map(|p| (0..n).map(|j| Ok(CompiledPoly::new(&p.derivative(j)?))).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        Ok(CompiledField { comps, jac })
    }

    pub(crate) fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }

    pub(crate) fn jacobian_times(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        self.jac.iter().map(|row| row.iter().zip(w).map(|(d, wi)| d.eval(x) * wi).sum()).collect()
    }
}

/// `Σ λᵢ gᵢ` over compiled generators.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Combination<'a> {
    fields: &'a [CompiledField],
    lambda: &'a [f64],
}

impl Combination<'_> {
    pub(crate) fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (f, &l) in self.fields.iter().zip(self.lambda) {
            if l != 0.0 {
                for (o, v) in out.iter_mut().zip(f.eval(x)) {
                    *o += l * v;
                }
            }
        }
        out
    }

    pub(crate) fn jacobian_times(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (f, &l) in self.fields.iter().zip(self.lambda) {
            if l != 0.0 {
                for (o, v) in out.iter_mut().zip(f.jacobian_times(x, w)) {
                    *o += l * v;
                }
            }
        }
        out
    }
}

fn check_state(x: &[f64], t: f64, domain: Option<&BoxDomain>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(t));
    }
    if let Some(d) = domain {
        if !d.contains(&Point::Real(x.to_vec()))? {
            return Err(Error::LeftDomain(t));
        }
    }
    Ok(())
}

/// Fixed-step classical RK4 for `y′ = f(y)` over time `t` (negative times
/// integrate backwards); the last step is shortened to land on `t`.
pub(crate) fn rk4<F: Fn(&[f64]) -> Vec<f64>>(
    f: F,
    y0: &[f64],
    t: f64,
    step: f64,
    mut check: impl FnMut(&[f64], f64) -> Result<()>,
) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Invalid("step must be positive".into()));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite(t));
    }
    let mut y = y0.to_vec();
    let steps = (t.abs() / step).ceil() as usize;
    let mut elapsed = 0.0f64;
    let axpy = |y: &[f64], a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(u, v)| u + a * v).collect() };
    for s in 0..steps {
        let remaining = t.abs() - s as f64 * step;
        let h = remaining.min(step) * t.signum();
        let k1 = f(&y);
        let k2 = f(&axpy(&y, h / 2.0, &k1));
        let k3 = f(&axpy(&y, h / 2.0, &k2));
        let k4 = f(&axpy(&y, h, &k3));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        elapsed += h;
        check(&y, elapsed)?;
    }
    Ok(y)
}

/// The time-`t` flow of `field` from `x0`.
pub fn flow(field: &[Polynomial], x0: &[f64], t: f64, step: f64) -> Result<Vec<f64>> {
    flow_in(field, x0, t, step, None)
}

pub fn flow_in(field: &[Polynomial], x0: &[f64], t: f64, step: f64, domain: Option<&BoxDomain>) -> Result<Vec<f64>> {
    if x0.len() != field.len() {
        return Err(Error::DimensionMismatch { expected: field.len(), found: x0.len() });
    }
    let cf = CompiledField::new(field)?;
    check_state(x0, 0.0, domain)?;
    rk4(|y| cf.eval(y), x0, t, step, |y, s| check_state(y, s, domain))
}

pub(crate) fn span_rank(gens: &[CompiledField], x: &[f64]) -> usize {
    let cols: Vec<Vec<f64>> = gens.iter().map(|g| g.eval(x)).collect();
    if cols.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<f64>> = (0..x.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    linalg::rank_f64(&rows, DEFAULT_PIVOT_TOL)
}

pub(crate) fn compile_fields(gens: &[Vec<Polynomial>], n: usize) -> Result<Vec<CompiledField>> {
    gens.iter()
        .map(|g| {
            if g.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g.len() });
            }
            CompiledField::new(g)
        })
        .collect()
}

/// Rank of `span{gᵢ(x)}` at a real point.
pub fn rank_at(gens: &[Vec<Polynomial>], x: &[f64]) -> Result<usize> {
    Ok(span_rank(&compile_fields(gens, x.len())?, x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafCloud {
    /// Points in discovery order.
    pub points: Vec<Vec<f64>>,
    pub ranks: Vec<usize>,
    pub constant_rank: bool,
}

impl LeafCloud {
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = names.iter().map(|n| format!("{n},")).collect::<String>();
        out.push_str("rank\n");
        for (p, r) in self.points.iter().zip(&self.ranks) {
            for c in p {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{r}\n"));
        }
        out
    }
}

struct Dedup {
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl Dedup {
    fn key(x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / DEDUP_TOL).floor() as i64).collect()
    }

    fn find(&self, x: &[f64], points: &[Vec<f64>]) -> bool {
        let k = Self::key(x);
        let n = k.len();
        let mut offsets = vec![vec![]];
        for _ in 0..n {
            offsets = offsets.into_iter().flat_map(|o: Vec<i64>| (-1..=1).map(move |d| [o.clone(), vec![d]].concat())).collect();
        }
        offsets.iter().any(|o| {
            let key: Vec<i64> = k.iter().zip(o).map(|(a, b)| a + b).collect();
            self.cells.get(&key).is_some_and(|ids| {
                ids.iter().any(|&i| points[i].iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= DEDUP_TOL)
            })
        })
    }

    fn insert(&mut self, x: &[f64], id: usize) {
        self.cells.entry(Self::key(x)).or_default().push(id);
    }
}

/// Breadth-first composition of time `±step_time` flows of the generators,
/// to depth `max_depth`.
pub fn leaf_explore(gens: &[Vec<Polynomial>], x0: &[f64], step_time: f64, max_depth: usize, rk_step: f64) -> Result<LeafCloud> {
    if gens.is_empty() {
        return Err(Error::Invalid("leaf exploration needs at least one generator".into()));
    }
    let compiled = compile_fields(gens, x0.len())?;
    check_state(x0, 0.0, None)?;
    let mut points = vec![x0.to_vec()];
    let mut dedup = Dedup { cells: HashMap::new() };
    dedup.insert(x0, 0);
    let mut frontier = vec![0usize];
    for _ in 0..max_depth {
        let children: Vec<Vec<Vec<f64>>> = frontier
            .par_iter()
            .map(|&i| {
                let mut out = Vec::with_capacity(2 * gens.len());
                for g in &compiled {
                    for sign in [1.0, -1.0] {
                        let y = rk4(|y| g.eval(y), &points[i], sign * step_time, rk_step, |y, s| check_state(y, s, None))?;
                        out.push(y);
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for y in children.into_iter().flatten() {
            if !dedup.find(&y, &points) {
                let id = points.len();
                dedup.insert(&y, id);
                points.push(y);
                next.push(id);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let ranks: Vec<usize> = points.iter().map(|p| span_rank(&compiled, p)).collect();
    let constant_rank = ranks.windows(2).all(|w| w[0] == w[1]);
    Ok(LeafCloud { points, ranks, constant_rank })
}

/// A piecewise path: on each segment the point flows along `Σ λᵢ gᵢ` for
/// time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FPath {
    pub start: Vec<f64>,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub lambda: Vec<f64>,
    pub t: f64,
}

impl FPath {
    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.t).sum()
    }

    pub fn validate(&self, ngens: usize) -> Result<()> {
        for s in &self.segments {
            if !(s.t > 0.0) || !s.t.is_finite() {
                return Err(Error::Invalid(format!("segment duration {} must be positive", s.t)));
            }
            if s.lambda.len() != ngens {
                return Err(Error::DimensionMismatch { expected: ngens, found: s.lambda.len() });
            }
        }
        Ok(())
    }

    /// Driving field of each segment.
    pub(crate) fn drivers<'a>(&'a self, fields: &'a [CompiledField]) -> Result<Vec<Combination<'a>>> {
        self.validate(fields.len())?;
        if self.start.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(0.0));
        }
        Ok(self.segments.iter().map(|s| Combination { fields, lambda: &s.lambda }).collect())
    }
}

/// Uniform grid of `nodes` times over `[0, total]`, each as (segment index,
/// time within the segment).
pub(crate) fn time_grid(path: &FPath, nodes: usize) -> Vec<(f64, usize, f64)> {
    let total = path.total_time();
    let nodes = nodes.max(2);
    let mut out = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let t = if total == 0.0 { 0.0 } else { total * i as f64 / (nodes - 1) as f64 };
        let mut acc = 0.0;
        let mut seg = 0;
        while seg + 1 < path.segments.len() && t > acc + path.segments[seg].t {
            acc += path.segments[seg].t;
            seg += 1;
        }
        out.push((t, seg, t - acc));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankTrace {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub ranks: Vec<usize>,
    pub constant: bool,
    /// Whether the velocity lay in the span of the generators at every node.
    pub velocity_in_span: bool,
}

impl RankTrace {
    /// Constant rank with tangent velocity.
    pub fn is_foliated(&self) -> bool {
        self.constant && self.velocity_in_span
    }
}

/// Sample `rank span{gᵢ(γ(t))}` on a uniform grid, where `γ` is driven by
/// `Σ λᵢ driverᵢ` on each segment.
pub fn rank_constancy_along(
    path: &FPath,
    driver: &[Vec<Polynomial>],
    gens: &[Vec<Polynomial>],
    nodes: usize,
    rk_step: f64,
) -> Result<RankTrace> {
    let n = path.start.len();
    let driver_fields = compile_fields(driver, n)?;
    let drivers = path.drivers(&driver_fields)?;
    let compiled = compile_fields(gens, n)?;
    let grid = time_grid(path, nodes);
    let mut times = Vec::new();
    let mut points = Vec::new();
    let mut ranks = Vec::new();
    let mut velocity_in_span = true;
    let mut seg_start = path.start.clone();
    let mut current_seg = 0;
    let mut pos = path.start.clone();
    let mut pos_time = 0.0;
    for (t, seg, local) in grid {
        while current_seg < seg {
            let len = path.segments[current_seg].t;
            seg_start = rk4(|y| drivers[current_seg].eval(y), &seg_start, len, rk_step, |y, s| check_state(y, s, None))?;
            current_seg += 1;
            pos = seg_start.clone();
            pos_time = 0.0;
        }
        if !drivers.is_empty() {
            pos = rk4(|y| drivers[seg].eval(y), &pos, local - pos_time, rk_step, |y, s| check_state(y, s, None))?;
            pos_time = local;
        }
        let r = span_rank(&compiled, &pos);
        if let Some(d) = drivers.get(seg) {
            let vel = d.eval(&pos);
            let mut cols: Vec<Vec<f64>> = compiled.iter().map(|g| g.eval(&pos)).collect();
            cols.push(vel);
            let rows: Vec<Vec<f64>> = (0..pos.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
            if linalg::rank_f64(&rows, DEFAULT_PIVOT_TOL) > r {
                velocity_in_span = false;
            }
        }
        times.push(t);
        points.push(pos.clone());
        ranks.push(r);
    }
    let constant = ranks.windows(2).all(|w| w[0] == w[1]);
    Ok(RankTrace { times, points, ranks, constant, velocity_in_span })
}
