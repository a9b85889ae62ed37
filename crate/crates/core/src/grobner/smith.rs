use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::polyalg::univariate::UPoly;
use crate::polyalg::{PolyMatrix, Rational};

/// `u · p · v = d` with `u`, `v` invertible over ℚ[x] and `d` diagonal with
/// monic entries `d₁ | d₂ | …` (zeros last). `u_inv` is the inverse of `u`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: PolyMatrix,
    pub d: PolyMatrix,
    pub v: PolyMatrix,
    pub u_inv: PolyMatrix,
    factors: Vec<UPoly>,
}

impl SmithForm {
    /// Diagonal entries `d₁, …, d_min(rows, cols)`.
    pub fn invariant_factors(&self) -> &[UPoly] {
        &self.factors
    }

    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.factors.iter().filter(|f| !f.is_zero()).count()
    }
}

fn to_upoly_matrix(p: &PolyMatrix) -> Result<Vec<Vec<UPoly>>> {
    if p.nvars() > 1 {
        return Err(Error::NotUnivariate(p.nvars()));
    }
    (0..p.rows()).map(|r| (0..p.cols()).map(|c| UPoly::from_polynomial(p.get(r, c))).collect()).collect()
}

fn from_upoly_matrix(m: &[Vec<UPoly>], rows: usize, cols: usize, nvars: usize) -> PolyMatrix {
    let entries = m.iter().flat_map(|row| row.iter().map(|e| e.to_polynomial(nvars, 0))).collect();
    PolyMatrix::new(rows, cols, nvars, entries).expect("shape is consistent")
}

fn identity(n: usize) -> Vec<Vec<UPoly>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { UPoly::one() } else { UPoly::zero() }).collect()).collect()
}

struct State {
    a: Vec<Vec<UPoly>>,
    u: Vec<Vec<UPoly>>,
    u_inv: Vec<Vec<UPoly>>,
    v: Vec<Vec<UPoly>>,
}

impl State {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.u.swap(i, j);
        for row in self.u_inv.iter_mut() {
            row.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
    }

    /// row_i += q · row_t
    fn add_row(&mut self, i: usize, t: usize, q: &UPoly) {
        for m in [&mut self.a, &mut self.u] {
            let src = m[t].clone();
            for (x, s) in m[i].iter_mut().zip(&src) {
                *x = &*x + &(q * s);
            }
        }
        for row in self.u_inv.iter_mut() {
            row[t] = &row[t] - &(&row[i] * q);
        }
    }

    /// col_j += q · col_t
    fn add_col(&mut self, j: usize, t: usize, q: &UPoly) {
        for m in [&mut self.a, &mut self.v] {
            for row in m.iter_mut() {
                let add = &row[t] * q;
                row[j] = &row[j] + &add;
            }
        }
    }

    fn scale_row(&mut self, t: usize, c: &Rational) {
        for m in [&mut self.a, &mut self.u] {
            for x in m[t].iter_mut() {
                *x = x.scale(c);
            }
        }
        let inv = c.recip();
        for row in self.u_inv.iter_mut() {
            row[t] = row[t].scale(&inv);
        }
    }
}

/// Smith normal form of a matrix over ℚ[x] (at most one variable).
pub fn smith_normal_form(p: &PolyMatrix) -> Result<SmithForm> {
    let (rows, cols, nvars) = (p.rows(), p.cols(), p.nvars());
    let mut s = State { a: to_upoly_matrix(p)?, u: identity(rows), u_inv: identity(rows), v: identity(cols) };
    let n = rows.min(cols);
    for t in 0..n {
        loop {
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| !s.a[i][j].is_zero())
                .min_by_key(|&(i, j)| (s.a[i][j].degree(), i, j));
            let Some((pi, pj)) = pivot else { break };
            if pi != t {
                s.swap_rows(pi, t);
            }
            if pj != t {
                s.swap_cols(pj, t);
            }
            let mut clean = true;
            for i in t + 1..rows {
                if s.a[i][t].is_zero() {
                    continue;
                }
                let (q, r) = s.a[i][t].div_rem(&s.a[t][t]);
                s.add_row(i, t, &-&q);
                clean &= r.is_zero();
            }
            for j in t + 1..cols {
                if s.a[t][j].is_zero() {
                    continue;
                }
                let (q, r) = s.a[t][j].div_rem(&s.a[t][t]);
                s.add_col(j, t, &-&q);
                clean &= r.is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !s.a[t][t].divides(&s.a[i][j])));
            match bad {
                Some(i) => s.add_row(t, i, &UPoly::one()),
                None => break,
            }
        }
        let lc = s.a[t][t].leading();
        if !lc.is_zero() && !lc.is_one() {
            s.scale_row(t, &lc.recip());
        }
    }
    let factors: Vec<UPoly> = (0..n).map(|i| s.a[i][i].clone()).collect();
    Ok(SmithForm {
        u: from_upoly_matrix(&s.u, rows, rows, nvars.max(1)),
        d: from_upoly_matrix(&s.a, rows, cols, nvars.max(1)),
        v: from_upoly_matrix(&s.v, cols, cols, nvars.max(1)),
        u_inv: from_upoly_matrix(&s.u_inv, rows, rows, nvars.max(1)),
        factors,
    })
}
