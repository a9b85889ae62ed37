//! Dense linear algebra over the rationals and over `f64`.

use num_traits::{Signed, Zero};

use super::polynomial::Rational;

/// Default pivot threshold for floating-point rank decisions.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-9;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut().skip(c) {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_rational(m: &[Vec<Rational>]) -> usize {
    rank_with_pivots(m).0.len()
}

/// Rank together with pivot rows and pivot columns of a nonvanishing
/// maximal minor.
pub fn rank_with_pivots(m: &[Vec<Rational>]) -> (Vec<usize>, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut row_ids: Vec<usize> = (0..rows).collect();
    let mut prow = Vec::new();
    let mut pcol = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        row_ids.swap(r, p);
        for i in r + 1..rows {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[r][c];
                for j in c..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        prow.push(row_ids[r]);
        pcol.push(c);
        r += 1;
    }
    prow.sort_unstable();
    (prow, pcol)
}

pub fn det_rational(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::from_integer(1.into());
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return Rational::zero() };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    det
}

/// Basis of the right nullspace `{v : m v = 0}`.
pub fn nullspace(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::from_integer(1.into());
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Dimension of the intersection of the column spans of `a` and `b`, both
/// given as lists of vectors in the same space.
pub fn intersection_dim(a: &[Vec<Rational>], b: &[Vec<Rational>], dim: usize) -> usize {
    intersection_basis(a, b, dim).len()
}

pub fn intersection_basis(a: &[Vec<Rational>], b: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve sum x_i a_i - sum y_j b_j = 0.
    let n = a.len() + b.len();
    let sys: Vec<Vec<Rational>> = (0..dim)
        .map(|r| a.iter().map(|v| v[r].clone()).chain(b.iter().map(|v| -v[r].clone())).collect())
        .collect();
    let mut vecs: Vec<Vec<Rational>> = nullspace(&sys, n)
        .into_iter()
        .map(|sol| {
            let mut w = vec![Rational::zero(); dim];
            for (x, v) in sol.iter().zip(a) {
                if !x.is_zero() {
                    for r in 0..dim {
                        w[r] += x * &v[r];
                    }
                }
            }
            w
        })
        .collect();
    span_basis(&mut vecs, dim)
}

/// Independent subset spanning the same space, as an echelon basis.
pub fn span_basis(vecs: &mut [Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = vecs.to_vec();
    if rows.is_empty() {
        return rows;
    }
    let piv = rref(&mut rows);
    rows.truncate(piv.len());
    debug_assert!(rows.iter().all(|r| r.len() == dim));
    rows
}

/// Numerical rank by Gaussian elimination with complete pivoting; entries
/// whose magnitude falls to `tol` or below are treated as zero.
pub fn rank_f64(m: &[Vec<f64>], tol: f64) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.to_vec();
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0f64);
        for (i, row) in a.iter().enumerate().skip(step) {
            for (j, v) in row.iter().enumerate().skip(step) {
                if v.abs() > best.2 {
                    best = (i, j, v.abs());
                }
            }
        }
        if !(best.2 > tol) {
            break;
        }
        a.swap(step, best.0);
        for row in a.iter_mut() {
            row.swap(step, best.1);
        }
        for i in step + 1..rows {
            let f = a[i][step] / a[step][step];
            if f != 0.0 {
                for j in step..cols {
                    a[i][j] -= f * a[step][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn max_abs(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::polynomial::int;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn exact_rank_and_det() {
        assert_eq!(rank_rational(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank_rational(&m(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(det_rational(&m(&[&[1, 2], &[3, 4]])), int(-2));
        let (r, c) = rank_with_pivots(&m(&[&[0, 0], &[0, 3]]));
        assert_eq!((r, c), (vec![1], vec![1]));
    }

    #[test]
    fn nullspace_and_intersection() {
        let ns = nullspace(&m(&[&[1, 1, 0]]), 3);
        assert_eq!(ns.len(), 2);
        let a = m(&[&[1, 0, 0], &[0, 1, 0]]);
        let b = m(&[&[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(intersection_dim(&a, &b, 3), 1);
    }

    #[test]
    fn float_rank_threshold() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1e-12]];
        assert_eq!(rank_f64(&a, 1e-9), 1);
        assert_eq!(rank_f64(&a, 1e-15), 2);
        assert_eq!(rank_f64(&[], 1e-9), 0);
    }
}
