use crate::error::{Error, Result};
use crate::polyalg::Polynomial;

use super::{check_state, compile_fields, rank_constancy_along, rk4, CompiledField, FPath, DEFAULT_RANK_NODES, DEFAULT_STEP};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-5;
/// Cached pivots are kept while `min |r_kk| / max |r_kk|` stays above this.
const PIVOT_CONDITIONING: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportConfig {
    pub step: f64,
    pub residual_tol: f64,
    pub rank_nodes: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig { step: DEFAULT_STEP, residual_tol: DEFAULT_RESIDUAL_TOL, rank_nodes: DEFAULT_RANK_NODES }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportResult {
    /// Endpoint of the path.
    pub point: Vec<f64>,
    /// The transported ambient vector.
    pub w: Vec<f64>,
    /// Projection of `w` onto the orthogonal complement of the distribution.
    pub class_representative: Vec<f64>,
    /// Largest normal component of the transported distribution basis,
    /// relative to its length.
    pub residual: f64,
    pub residual_ok: bool,
    /// Generator indices spanning the distribution at the endpoint.
    pub pivots: Vec<usize>,
}

/// Orthonormal frame of the span of the generators at a point.
struct Frame {
    q: Vec<Vec<f64>>,
    pivots: Vec<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(v: &mut [f64], q: &[Vec<f64>]) {
    // two passes for stability
    for _ in 0..2 {
        for qk in q {
            let c = dot(v, qk);
            for (vi, qi) in v.iter_mut().zip(qk) {
                *vi -= c * qi;
            }
        }
    }
}

/// Gram–Schmidt on the given columns, returning the frame and the diagonal of R.
fn gram_schmidt(cols: &[Vec<f64>], order: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut diag = Vec::new();
    for &j in order {
        let mut v = cols[j].clone();
        orthogonalize(&mut v, &q);
        let r = norm(&v);
        diag.push(r);
        if r > 0.0 {
            q.push(v.iter().map(|x| x / r).collect());
        }
    }
    (q, diag)
}

/// Column-pivoted Gram–Schmidt selecting `rank` columns.
fn pivoted(cols: &[Vec<f64>], rank: usize) -> Vec<usize> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for _ in 0..rank {
        let mut best = None;
        let mut best_norm = -1.0;
        for (j, c) in cols.iter().enumerate() {
            if chosen.contains(&j) {
                continue;
            }
            let mut v = c.clone();
            orthogonalize(&mut v, &q);
            let r = norm(&v);
            if r > best_norm {
                best_norm = r;
                best = Some((j, v));
            }
        }
        let Some((j, v)) = best else { break };
        chosen.push(j);
        if best_norm > 0.0 {
            q.push(v.iter().map(|x| x / best_norm).collect());
        }
    }
    chosen
}

fn conditioning(diag: &[f64]) -> f64 {
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if diag.is_empty() {
        1.0
    } else if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

fn frame_at(gens: &[CompiledField], x: &[f64], rank: usize, cache: &mut Vec<usize>) -> Frame {
    let cols: Vec<Vec<f64>> = gens.iter().map(|g| g.eval(x)).collect();
    if cache.len() == rank {
        let (q, diag) = gram_schmidt(&cols, cache);
        if q.len() == rank && conditioning(&diag) > PIVOT_CONDITIONING {
            return Frame { q, pivots: cache.clone() };
        }
    }
    *cache = pivoted(&cols, rank);
    let (q, _) = gram_schmidt(&cols, cache);
    Frame { q, pivots: cache.clone() }
}

fn normal_part(v: &[f64], frame: &Frame) -> Vec<f64> {
    let mut out = v.to_vec();
    orthogonalize(&mut out, &frame.q);
    out
}

fn relative_normal(v: &[f64], frame: &Frame) -> f64 {
    let n = norm(v);
    if n == 0.0 {
        0.0
    } else {
        norm(&normal_part(v, frame)) / n
    }
}

/// Parallel transport of `w0 ∈ T_{γ(0)}M` along an F-path for the flat
/// partial connection on the normal bundle: `w` evolves by the linearized
/// flow `w′ = J_X w`, and its class is the component orthogonal to the
/// distribution. Rank constancy is checked on `config.rank_nodes` uniform
/// time nodes.
pub fn bott_transport(gens: &[Vec<Polynomial>], path: &FPath, w0: &[f64], config: &TransportConfig) -> Result<TransportResult> {
    let n = path.start.len();
    if w0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w0.len() });
    }
    if w0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(0.0));
    }
    let trace = rank_constancy_along(path, gens, gens, config.rank_nodes, config.step)?;
    if !trace.constant {
        let (i, r) = trace.ranks.iter().enumerate().find(|(_, r)| **r != trace.ranks[0]).unwrap();
        return Err(Error::RankNotConstant(format!(
            "rank {} at t=0 but {} at t={}",
            trace.ranks[0], r, trace.times[i]
        )));
    }
    let rank = trace.ranks[0];
    let fields = compile_fields(gens, n)?;
    let drivers = path.drivers(&fields)?;

    let mut cache = Vec::new();
    let start = frame_at(&fields, &path.start, rank, &mut cache);
    // state: point, w, then the transported frame of the distribution
    let mut state: Vec<f64> = path.start.clone();
    state.extend_from_slice(w0);
    for q in &start.q {
        state.extend_from_slice(q);
    }
    let blocks = 1 + start.q.len();
    let mut residual = 0.0f64;
    let mut elapsed = 0.0;
    let mut frame = start;
    for (seg, d) in path.segments.iter().zip(&drivers) {
        let rhs = |y: &[f64]| {
            let x = &y[..n];
            let mut out = d.eval(x);
            for b in 0..blocks {
                out.extend(d.jacobian_times(x, &y[n * (b + 1)..n * (b + 2)]));
            }
            out
        };
        let offset = elapsed;
        state = rk4(rhs, &state, seg.t, config.step, |y, s| check_state(y, offset + s, None))?;
        elapsed += seg.t;
        frame = frame_at(&fields, &state[..n], rank, &mut cache);
        for b in 1..blocks {
            residual = residual.max(relative_normal(&state[n * (b + 1)..n * (b + 2)], &frame));
        }
    }
    let point = state[..n].to_vec();
    let w = state[n..2 * n].to_vec();
    let class_representative = normal_part(&w, &frame);
    Ok(TransportResult {
        point,
        w,
        class_representative,
        residual,
        residual_ok: residual <= config.residual_tol,
        pivots: frame.pivots,
    })
}
