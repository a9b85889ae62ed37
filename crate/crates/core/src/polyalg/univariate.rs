//! Dense univariate polynomials over the rationals, with Sturm-sequence real
//! root counting and isolation.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::polynomial::{int, Monomial, Polynomial, Rational};
use crate::error::{Error, Result};

/// Isolating intervals are refined to this width.
pub fn isolation_width() -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << 30)
}

/// Coefficients in increasing degree; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct UPoly {
    coeffs: Vec<Rational>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    /// `x - r`
    pub fn linear_root(r: &Rational) -> Self {
        Self::new(vec![-r.clone(), Rational::one()])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| int(v)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect())
    }

    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lc = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    let t = &c * dc;
                    r[i + j] -= t;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.div_rem(d).1
    }

    pub fn divides(&self, other: &UPoly) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.rem(self).is_zero()
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(a: &UPoly, b: &UPoly) -> UPoly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn pow(&self, e: u32) -> UPoly {
        let mut acc = UPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_polynomial(&self, nvars: usize, var: usize) -> Polynomial {
        Polynomial::from_terms(
            nvars,
            self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| {
                let mut e = vec![0u32; nvars];
                e[var] = i as u32;
                (Monomial::from_exponents(e), c.clone())
            }),
        )
    }

    /// Read a polynomial in a single variable.
    pub fn from_polynomial(p: &Polynomial) -> Result<UPoly> {
        if p.nvars() > 1 {
            return Err(Error::NotUnivariate(p.nvars()));
        }
        let deg = p.total_degree().unwrap_or(0) as usize;
        let mut c = vec![Rational::zero(); deg + 1];
        for (m, a) in p.terms() {
            let e = m.exponents().first().copied().unwrap_or(0) as usize;
            c[e] = a.clone();
        }
        Ok(UPoly::new(c))
    }

    /// `p / gcd(p, p')`, made monic.
    pub fn squarefree_part(&self) -> UPoly {
        if self.is_constant() {
            return UPoly::one();
        }
        let g = UPoly::gcd(self, &self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Primitive integer polynomial with the same roots.
    pub fn integer_primitive(&self) -> Vec<BigInt> {
        let lcm = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() {
            return ints;
        }
        let sign = if self.leading().is_negative() { -BigInt::one() } else { BigInt::one() };
        ints.into_iter().map(|c| c / &g * &sign).collect()
    }

    /// All distinct rational roots, sorted ascending. Returns `None` when
    /// trial division on the constant/leading coefficient would be too costly.
    pub fn rational_roots(&self) -> Option<Vec<Rational>> {
        if self.is_constant() {
            return Some(Vec::new());
        }
        let mut p = self.squarefree_part();
        let mut roots = Vec::new();
        if p.coeffs[0].is_zero() {
            roots.push(Rational::zero());
            p = p.div_rem(&UPoly::x()).0;
        }
        if p.is_constant() {
            return Some(roots);
        }
        let ints = p.integer_primitive();
        let a0 = ints[0].abs();
        let an = ints.last().unwrap().abs();
        let num_divs = divisors(&a0)?;
        let den_divs = divisors(&an)?;
        for q in &den_divs {
            for n in &num_divs {
                if n.gcd(q) != BigInt::one() {
                    continue;
                }
                for s in [1i32, -1] {
                    let r = Rational::new(n * BigInt::from(s), q.clone());
                    if p.eval(&r).is_zero() && !roots.contains(&r) {
                        roots.push(r);
                    }
                }
            }
        }
        roots.sort();
        Some(roots)
    }

    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(-&r);
        }
        seq
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots_in(&self, a: &Rational, b: &Rational) -> usize {
        if self.is_zero() || self.is_constant() {
            return 0;
        }
        let seq = self.squarefree_part().sturm_sequence();
        let va = sign_changes(seq.iter().map(|p| p.eval(a)));
        let vb = sign_changes(seq.iter().map(|p| p.eval(b)));
        va.saturating_sub(vb)
    }

    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        if self.is_zero() || self.is_constant() {
            return 0;
        }
        let seq = self.squarefree_part().sturm_sequence();
        let at_neg = seq.iter().map(|p| {
            let d = p.degree().unwrap_or(0);
            let lc = p.leading();
            if d % 2 == 0 { lc } else { -lc }
        });
        let at_pos = seq.iter().map(UPoly::leading);
        sign_changes(at_neg).saturating_sub(sign_changes(at_pos))
    }

    /// `1 + max |a_i / a_n|`: every root has absolute value below this.
    pub fn root_bound(&self) -> Rational {
        let lc = self.leading().abs();
        Rational::one() + self.coeffs.iter().map(|c| c.abs() / &lc).max().unwrap_or_else(Rational::zero)
    }

    /// Disjoint intervals `(lo, hi]`, each containing exactly one real root,
    /// of width at most 2^-30, sorted ascending. Rational roots are returned
    /// as degenerate intervals `(r, r)`.
    pub fn isolate_real_roots(&self) -> Vec<(Rational, Rational)> {
        if self.is_constant() {
            return Vec::new();
        }
        let p = self.squarefree_part();
        let width = isolation_width();
        let bound = p.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((lo, hi)) = stack.pop() {
            let n = p.count_roots_in(&lo, &hi);
            if n == 0 {
                continue;
            }
            if p.eval(&hi).is_zero() && n == 1 {
                out.push((hi.clone(), hi));
                continue;
            }
            if n == 1 && &hi - &lo <= width {
                out.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / int(2);
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
        out.sort();
        out
    }

    /// Product of the irreducible factors that have at least one real root,
    /// squarefree and monic. Rational roots are extracted exactly; for the
    /// remaining part, Sturm counting decides whether real roots exist and
    /// irrational real roots keep their whole irreducible factor.
    pub fn real_rooted_part(&self) -> UPoly {
        if self.is_constant() {
            return UPoly::one();
        }
        let sqf = self.squarefree_part();
        let mut rho = UPoly::one();
        let mut rest = sqf.clone();
        if let Some(roots) = sqf.rational_roots() {
            for r in &roots {
                let lin = UPoly::linear_root(r);
                rho = &rho * &lin;
                rest = rest.div_rem(&lin).0;
            }
        }
        let rest = rest.monic();
        let s = rest.count_real_roots();
        if s == 0 {
            return rho.monic();
        }
        let d = rest.degree().unwrap();
        if s == d {
            return (&rho * &rest).monic();
        }
        let h = real_factor_search(&rest, s).unwrap_or(rest);
        (&rho * &h).monic()
    }
}

/// A radius `ε ≤ 1` such that none of `polys` has a root in
/// `[m − ε, m) ∪ (m, m + ε]`.
pub fn clear_radius(polys: &[UPoly], m: &Rational) -> Rational {
    let mut eps = Rational::one();
    let nonzero: Vec<&UPoly> = polys.iter().filter(|p| !p.is_zero() && !p.is_constant()).collect();
    loop {
        let lo = m - &eps;
        let hi = m + &eps;
        let clear = nonzero.iter().all(|p| {
            let at_m = usize::from(p.eval(m).is_zero());
            let left = p.count_roots_in(&lo, m) - at_m + usize::from(p.eval(&lo).is_zero());
            p.count_roots_in(m, &hi) == 0 && left == 0
        });
        if clear {
            return eps;
        }
        eps /= int(2);
    }
}

fn sign_changes<I: Iterator<Item = Rational>>(vals: I) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for v in vals {
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    if n.is_zero() {
        return Some(vec![BigInt::one()]);
    }
    let limit = n.to_u64()?;
    if limit > 1_000_000_000_000 {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= limit {
        if limit % d == 0 {
            small.push(BigInt::from(d));
            if d * d != limit {
                large.push(BigInt::from(limit / d));
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    Some(small)
}

/// Find the minimal rational factor of the squarefree, rational-root-free
/// `q` whose roots include all `s` real roots of `q`. Roots are located
/// numerically, candidate factors are rounded to rationals and accepted only
/// after exact division and Sturm verification.
fn real_factor_search(q: &UPoly, s: usize) -> Option<UPoly> {
    let n = q.degree()?;
    let roots = complex_roots(q)?;
    let mut by_imag: Vec<Complex64> = roots;
    by_imag.sort_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap_or(std::cmp::Ordering::Equal));
    let real: Vec<f64> = by_imag[..s].iter().map(|z| z.re).collect();
    let mut upper: Vec<Complex64> = by_imag[s..].iter().copied().filter(|z| z.im > 0.0).collect();
    if upper.len() * 2 != n - s {
        return None;
    }
    upper.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    let ints = q.integer_primitive();
    let an = Rational::from_integer(ints.last()?.abs());
    let base: Vec<f64> = real.iter().fold(vec![1.0], |acc, &r| mul_f64(&acc, &[-r, 1.0]));
    use itertools::Itertools;
    for size in 0..upper.len() {
        for subset in (0..upper.len()).combinations(size) {
            let mut c = base.clone();
            for &i in &subset {
                let z = upper[i];
                c = mul_f64(&c, &[z.norm_sqr(), -2.0 * z.re, 1.0]);
            }
            let cand = UPoly::new(
                c.iter()
                    .map(|&v| {
                        let scaled = v * an.to_f64().unwrap_or(1.0);
                        let r = Rational::from_float(scaled.round()).unwrap_or_else(Rational::zero);
                        r / &an
                    })
                    .collect(),
            );
            if cand.degree() == Some(s + 2 * size) && cand.divides(q) && cand.count_real_roots() == s {
                return Some(cand.monic());
            }
        }
    }
    None
}

fn mul_f64(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Aberth–Ehrlich iteration for all complex roots of a squarefree polynomial.
fn complex_roots(p: &UPoly) -> Option<Vec<Complex64>> {
    let n = p.degree()?;
    let lc = p.leading().to_f64()?;
    let c: Vec<f64> = p.coeffs.iter().map(|v| v.to_f64().unwrap_or(f64::NAN) / lc).collect();
    let dc: Vec<f64> = (1..=n).map(|i| c[i] * i as f64).collect();
    let eval = |cs: &[f64], z: Complex64| cs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let radius = p.root_bound().to_f64()?.min(1e6);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let pv = eval(&c, z[i]);
            let dv = eval(&dc, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            delta = delta.max(w.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(z)
}

impl Add for &UPoly {
    type Output = UPoly;
    fn add(self, o: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        UPoly::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    let b = o.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    a + b
                })
                .collect(),
        )
    }
}

impl Sub for &UPoly {
    type Output = UPoly;
    fn sub(self, o: &UPoly) -> UPoly {
        self + &(-o)
    }
}

impl Neg for &UPoly {
    type Output = UPoly;
    fn neg(self) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl Mul for &UPoly {
    type Output = UPoly;
    fn mul(self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::polynomial::rat;

    fn up(c: &[i64]) -> UPoly {
        UPoly::from_ints(c)
    }

    #[test]
    fn division_and_gcd() {
        // (x^2 - 1) / (x - 1) = x + 1
        let (q, r) = up(&[-1, 0, 1]).div_rem(&up(&[-1, 1]));
        assert_eq!(q, up(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(UPoly::gcd(&up(&[-1, 0, 1]), &up(&[1, 2, 1])), up(&[1, 1]));
        assert_eq!(up(&[0, 0, 1, 1]).squarefree_part(), up(&[0, 1, 1]));
    }

    #[test]
    fn rational_roots_found() {
        // (2x - 1)(x + 3)(x^2 + 1)
        let p = &(&up(&[-1, 2]) * &up(&[3, 1])) * &up(&[1, 0, 1]);
        assert_eq!(p.rational_roots().unwrap(), vec![int(-3), rat(1, 2)]);
    }

    #[test]
    fn sturm_counts() {
        let p = up(&[-2, 0, 1]); // x^2 - 2
        assert_eq!(p.count_real_roots(), 2);
        assert_eq!(p.count_roots_in(&int(0), &int(2)), 1);
        assert_eq!(up(&[1, 0, 1]).count_real_roots(), 0);
        let iso = p.isolate_real_roots();
        assert_eq!(iso.len(), 2);
        for (lo, hi) in &iso {
            assert!(hi - lo <= isolation_width());
            assert!(p.eval(lo) * p.eval(hi) <= int(0));
        }
        let iso = up(&[0, 1]).isolate_real_roots();
        assert_eq!(iso, vec![(int(0), int(0))]);
    }

    #[test]
    fn real_rooted_part_examples() {
        assert_eq!(up(&[0, 0, 1]).real_rooted_part(), up(&[0, 1]));
        assert_eq!(up(&[1, 0, 1]).real_rooted_part(), UPoly::one());
        // (x^2 - 2)(x^2 + 1): only x^2 - 2 has real roots
        let p = &up(&[-2, 0, 1]) * &up(&[1, 0, 1]);
        assert_eq!(p.real_rooted_part(), up(&[-2, 0, 1]));
        // x^3 - 2 has one real root; irreducible, so it is kept whole
        assert_eq!(up(&[-2, 0, 0, 1]).real_rooted_part(), up(&[-2, 0, 0, 1]));
        // x (x^2+1)^2 (x - 1)^3
        let q = &(&up(&[0, 1]) * &up(&[1, 0, 1]).pow(2)) * &up(&[-1, 1]).pow(3);
        assert_eq!(q.real_rooted_part(), &up(&[0, 1]) * &up(&[-1, 1]));
        assert_eq!(UPoly::constant(int(5)).real_rooted_part(), UPoly::one());
    }

    #[test]
    fn clear_radius_avoids_nearby_roots() {
        // roots at 0, 1/3 and -1/5
        let p = &(&up(&[0, 1]) * &up(&[-1, 3])) * &up(&[1, 5]);
        let eps = clear_radius(std::slice::from_ref(&p), &int(0));
        assert!(eps <= rat(1, 5));
        assert_eq!(p.count_roots_in(&int(0), &eps), 0);
        assert_eq!(clear_radius(&[up(&[1, 0, 1])], &int(0)), int(1));
    }
}
