use itertools::Itertools;
use num_traits::ToPrimitive;

use super::linalg;
use super::polynomial::{Polynomial, Rational};
use crate::error::{check_len, Error, Result};

/// A point of the base, either exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Rational(Vec<Rational>),
    Real(Vec<f64>),
}

impl Point {
    pub fn len(&self) -> usize {
        match self {
            Point::Rational(v) => v.len(),
            Point::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Point::Rational(v) => v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            Point::Real(v) => v.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Point::Rational(v) => format!("({})", v.iter().map(super::format_rational).join(", ")),
            Point::Real(v) => format!("({})", v.iter().map(|x| x.to_string()).join(", ")),
        }
    }
}

impl From<Vec<Rational>> for Point {
    fn from(v: Vec<Rational>) -> Self {
        Point::Rational(v)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Real(v)
    }
}

/// Value of a polynomial at a [`Point`].
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(Rational),
    Real(f64),
}

impl Polynomial {
    pub fn evaluate(&self, m: &Point) -> Result<Scalar> {
        match m {
            Point::Rational(v) => self.eval_rational(v).map(Scalar::Rational),
            Point::Real(v) => self.eval_f64(v).map(Scalar::Real),
        }
    }
}

/// Dense matrix of polynomials in a common ring, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, nvars: usize, entries: Vec<Polynomial>) -> Result<Self> {
        check_len(rows * cols, entries.len())?;
        for e in &entries {
            check_len(nvars, e.nvars())?;
        }
        Ok(PolyMatrix { rows, cols, nvars, entries })
    }

    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        PolyMatrix { rows, cols, nvars, entries: vec![Polynomial::zero(nvars); rows * cols] }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut m = Self::zeros(n, n, nvars);
        for i in 0..n {
            m.set(i, i, Polynomial::one(nvars));
        }
        m
    }

    /// Build from column vectors of length `rows`.
    pub fn from_columns(rows: usize, nvars: usize, columns: &[Vec<Polynomial>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len(), nvars);
        for (j, col) in columns.iter().enumerate() {
            check_len(rows, col.len())?;
            for (i, p) in col.iter().enumerate() {
                check_len(nvars, p.nvars())?;
                m.set(i, j, p.clone());
            }
        }
        Ok(m)
    }

    pub fn from_rows(nvars: usize, rows: Vec<Vec<Polynomial>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let r = rows.len();
        let mut entries = Vec::with_capacity(r * cols);
        for row in rows {
            check_len(cols, row.len())?;
            entries.extend(row);
        }
        Self::new(r, cols, nvars, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, r: usize, c: usize) -> &Polynomial {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Polynomial) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[r * self.cols + c] = p;
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn column(&self, c: usize) -> Vec<Polynomial> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Polynomial>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn row(&self, r: usize) -> Vec<Polynomial> {
        self.entries[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut t = Self::zeros(self.cols, self.rows, self.nvars);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        check_len(self.cols, other.rows)?;
        check_len(self.nvars, other.nvars)?;
        let mut out = Self::zeros(self.rows, other.cols, self.nvars);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = Polynomial::zero(self.nvars);
                for k in 0..self.cols {
                    let (a, b) = (self.get(r, k), other.get(k, c));
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Polynomial]) -> Result<Vec<Polynomial>> {
        check_len(self.cols, v.len())?;
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = Polynomial::zero(self.nvars);
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(r, k);
                    if !a.is_zero() && !x.is_zero() {
                        acc += &(a * x);
                    }
                }
                acc
            })
            .collect())
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn hstack(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        check_len(self.rows, other.rows)?;
        check_len(self.nvars, other.nvars)?;
        let mut cols = self.columns();
        cols.extend(other.columns());
        Self::from_columns(self.rows, self.nvars, &cols)
    }

    /// Apply a polynomial map to every entry.
    pub fn map_entries<F: FnMut(&Polynomial) -> Result<Polynomial>>(&self, nvars: usize, mut f: F) -> Result<PolyMatrix> {
        let entries = self.entries.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(self.rows, self.cols, nvars, entries)
    }

    pub fn eval_rational(&self, m: &[Rational]) -> Result<Vec<Vec<Rational>>> {
        check_len(self.nvars, m.len())?;
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).eval_rational(m)).collect())
            .collect()
    }

    pub fn eval_f64(&self, m: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len(self.nvars, m.len())?;
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).eval_f64(m)).collect())
            .collect()
    }

    /// Rank of `G(m)`: exact elimination at rational points, pivot threshold
    /// `tol` at real points.
    pub fn rank_at(&self, m: &Point, tol: f64) -> Result<usize> {
        if !(tol >= 0.0) {
            return Err(Error::OutOfRange(format!("tolerance {tol} must be nonnegative")));
        }
        match m {
            Point::Rational(v) => Ok(linalg::rank_rational(&self.eval_rational(v)?)),
            Point::Real(v) => Ok(linalg::rank_f64(&self.eval_f64(v)?, tol)),
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let mut out = Self::zeros(rows.len(), cols.len(), self.nvars);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Determinant of a square matrix by cofactor expansion.
    pub fn determinant(&self) -> Result<Polynomial> {
        check_len(self.rows, self.cols)?;
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.det_rec(&idx, &idx))
    }

    fn det_rec(&self, rows: &[usize], cols: &[usize]) -> Polynomial {
        match rows.len() {
            0 => Polynomial::one(self.nvars),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                let a = self.get(rows[0], cols[0]);
                let b = self.get(rows[0], cols[1]);
                let c = self.get(rows[1], cols[0]);
                let d = self.get(rows[1], cols[1]);
                &(a * d) - &(b * c)
            }
            _ => {
                let mut acc = Polynomial::zero(self.nvars);
                let r0 = rows[0];
                let rest = &rows[1..];
                for (k, &c) in cols.iter().enumerate() {
                    let e = self.get(r0, c);
                    if e.is_zero() {
                        continue;
                    }
                    let sub: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = e * &self.det_rec(rest, &sub);
                    if k % 2 == 0 {
                        acc += &term;
                    } else {
                        acc -= &term;
                    }
                }
                acc
            }
        }
    }

    /// All `k x k` minors, row subsets outermost, both in lexicographic order.
    pub fn minors(&self, k: usize) -> Result<Vec<Polynomial>> {
        if k == 0 || k > self.rows.min(self.cols) {
            return Err(Error::OutOfRange(format!(
                "minor size {k} not in 1..={}",
                self.rows.min(self.cols)
            )));
        }
        let mut out = Vec::new();
        for rs in (0..self.rows).combinations(k) {
            for cs in (0..self.cols).combinations(k) {
                out.push(self.det_rec(&rs, &cs));
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kronecker(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        check_len(self.nvars, other.nvars)?;
        let (r2, c2) = (other.rows, other.cols);
        let mut out = Self::zeros(self.rows * r2, self.cols * c2, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * r2 + k, j * c2 + l, a * b);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Block diagonal matrix `diag(self, other)`.
    pub fn block_diag(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        check_len(self.nvars, other.nvars)?;
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self.get(r, c).is_zero()))
    }
}
