use std::fmt::Write;

use itertools::Itertools;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::Bundle;
use crate::error::{check_len, Error, Result};
use crate::polyalg::{linalg, Point, Rational};

/// Upper bound on the number of grid nodes.
const MAX_NODES: usize = 4_000_000;

/// Regular grid `lo + i·step` inside the box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
    pub step: Rational,
}

impl Grid {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>, step: Rational) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        if step <= Rational::zero() {
            return Err(Error::Invalid("grid step must be positive".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::Invalid("grid box has lo > hi".into()));
        }
        let g = Grid { lo, hi, step };
        let total = g.shape().iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        if total.is_none_or(|t| t > MAX_NODES) {
            return Err(Error::Invalid(format!("grid exceeds {MAX_NODES} nodes")));
        }
        Ok(g)
    }

    /// Nodes per axis.
    pub fn shape(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| ((h - l) / &self.step).floor().to_integer().to_usize().unwrap_or(usize::MAX - 1) + 1)
            .collect()
    }

    /// Nodes in row-major order (last coordinate varies fastest).
    pub fn nodes(&self) -> Vec<Vec<Rational>> {
        self.shape()
            .iter()
            .map(|&n| 0..n)
            .multi_cartesian_product()
            .map(|idx| self.node(&idx))
            .collect()
    }

    fn node(&self, idx: &[usize]) -> Vec<Rational> {
        idx.iter().zip(&self.lo).map(|(&i, l)| l + &self.step * Rational::from_integer(i.into())).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridReport {
    pub nodes: Vec<Vec<Rational>>,
    pub dims: Vec<usize>,
    /// Whether every certified neighbor keeps fiber dimension at most that of
    /// the node certifying it.
    pub semicontinuous: bool,
    /// Number of (node, neighbor) pairs where the node's rank certificate
    /// applies.
    pub certified_pairs: usize,
    /// Pairs (node, neighbor) violating upper semicontinuity.
    pub violations: Vec<(usize, usize)>,
}

impl GridReport {
    /// One row per node: coordinates then fiber dimension.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = String::new();
        for n in names {
            out.push_str(n);
            out.push(',');
        }
        out.push_str("dim\n");
        for (node, d) in self.nodes.iter().zip(&self.dims) {
            for c in node {
                let _ = write!(out, "{},", c.to_f64().unwrap_or(f64::NAN));
            }
            let _ = writeln!(out, "{d}");
        }
        out
    }
}

/// Fiber dimension at every node, plus an exact semicontinuity check: at
/// each node a nonzero maximal minor of its cell's generators certifies rank
/// at neighbors in the same cell where that minor stays nonzero.
pub fn mrank_grid(e: &Bundle, grid: &Grid) -> Result<GridReport> {
    check_len(e.nvars(), grid.lo.len())?;
    let shape = grid.shape();
    let indices: Vec<Vec<usize>> = shape.iter().map(|&n| 0..n).multi_cartesian_product().collect();
    let indices = if e.nvars() == 0 { vec![vec![]] } else { indices };
    let nodes: Vec<Vec<Rational>> = indices.iter().map(|i| grid.node(i)).collect();
    let dims: Vec<usize> =
        nodes.par_iter().map(|m| e.fiber_dim(&Point::Rational(m.clone()))).collect::<Result<_>>()?;
    let n_rank = e.ambient_rank();
    let flat = |idx: &[usize]| idx.iter().zip(&shape).fold(0usize, |acc, (&i, &n)| acc * n + i);
    let offsets: Vec<Vec<i64>> = (0..e.nvars()).map(|_| -1i64..=1).multi_cartesian_product().filter(|o| o.iter().any(|&d| d != 0)).collect();
    let checks: Vec<(usize, Vec<(usize, usize)>)> = (0..nodes.len())
        .into_par_iter()
        .map(|a| -> Result<(usize, Vec<(usize, usize)>)> {
            let m = Point::Rational(nodes[a].clone());
            let rank = n_rank - dims[a];
            if rank == 0 {
                return Ok((0, vec![]));
            }
            let (cell, gens) = match e {
                Bundle::Polynomial(b) => (None, b.generators()),
                Bundle::Cellwise(b) => {
                    let p = b.piece_at(&m)?;
                    (Some(&p.cell), &p.generators)
                }
            };
            let (rows, cols) = linalg::rank_with_pivots(&gens.eval_rational(&nodes[a])?);
            let sub = gens.submatrix(&rows, &cols);
            let mut certified = 0;
            let mut bad = Vec::new();
            for off in &offsets {
                let nb: Option<Vec<usize>> = indices[a]
                    .iter()
                    .zip(off)
                    .zip(&shape)
                    .map(|((&i, &d), &n)| {
                        let j = i as i64 + d;
                        (0..n as i64).contains(&j).then_some(j as usize)
                    })
                    .collect();
                let Some(nb) = nb else { continue };
                let b = flat(&nb);
                let mb = Point::Rational(nodes[b].clone());
                if let Some(c) = cell {
                    if !c.contains(&mb)? {
                        continue;
                    }
                }
                if linalg::det_rational(&sub.eval_rational(&nodes[b])?).is_zero() {
                    continue;
                }
                certified += 1;
                if dims[b] > dims[a] {
                    bad.push((a, b));
                }
            }
            Ok((certified, bad))
        })
        .collect::<Result<_>>()?;
    let certified_pairs = checks.iter().map(|c| c.0).sum();
    let violations: Vec<(usize, usize)> = checks.into_iter().flat_map(|c| c.1).collect();
    Ok(GridReport { nodes, dims, semicontinuous: violations.is_empty(), certified_pairs, violations })
}
