use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::polyalg::{Point, Polynomial, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Gt,
    Ge,
    Eq,
    Lt,
    Le,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }

    /// Whether a value with the given sign satisfies `value REL 0`.
    pub fn holds(&self, sign: Ordering) -> bool {
        match self {
            Relation::Gt => sign == Ordering::Greater,
            Relation::Ge => sign != Ordering::Less,
            Relation::Eq => sign == Ordering::Equal,
            Relation::Lt => sign == Ordering::Less,
            Relation::Le => sign != Ordering::Greater,
        }
    }

    /// The relation obtained by negating both sides.
    pub fn flipped(&self) -> Relation {
        match self {
            Relation::Gt => Relation::Lt,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
            Relation::Lt => Relation::Gt,
            Relation::Le => Relation::Ge,
        }
    }

    fn allowed(&self) -> [bool; 3] {
        [Ordering::Less, Ordering::Equal, Ordering::Greater].map(|s| self.holds(s))
    }
}

impl FromStr for Relation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            ">" => Relation::Gt,
            ">=" => Relation::Ge,
            "=" | "==" => Relation::Eq,
            "<" => Relation::Lt,
            "<=" => Relation::Le,
            other => return Err(Error::Invalid(format!("unknown relation `{other}`"))),
        })
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `poly REL 0`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignCondition {
    pub poly: Polynomial,
    pub relation: Relation,
}

impl SignCondition {
    pub fn new(poly: Polynomial, relation: Relation) -> Self {
        SignCondition { poly, relation }
    }

    pub fn holds_at(&self, m: &Point) -> Result<bool> {
        Ok(self.relation.holds(sign_at(&self.poly, m)?))
    }
}

pub(crate) fn sign_at(p: &Polynomial, m: &Point) -> Result<Ordering> {
    Ok(match p.evaluate(m)? {
        Scalar::Rational(v) => {
            if v.is_positive() {
                Ordering::Greater
            } else if v.is_negative() {
                Ordering::Less
            } else {
                Ordering::Equal
            }
        }
        Scalar::Real(v) => {
            if v.is_nan() {
                return Err(Error::NonFinite(v));
            }
            v.partial_cmp(&0.0).unwrap()
        }
    })
}

/// A conjunction of sign conditions; the empty cell is everything.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Cell {
    pub conditions: Vec<SignCondition>,
}

impl Cell {
    pub fn everything() -> Self {
        Cell::default()
    }

    pub fn new(conditions: Vec<SignCondition>) -> Self {
        Cell { conditions }
    }

    pub fn is_everything(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn contains(&self, m: &Point) -> Result<bool> {
        for c in &self.conditions {
            if !c.holds_at(m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, other: &Cell) -> Cell {
        let mut conditions = self.conditions.clone();
        for c in &other.conditions {
            if !conditions.contains(c) {
                conditions.push(c.clone());
            }
        }
        Cell { conditions }
    }

    /// Detects cells that are empty because two conditions on the same
    /// polynomial (up to sign) admit no common sign.
    pub fn is_trivially_empty(&self) -> bool {
        let n = self.conditions.len();
        (0..n).any(|i| {
            let allowed_i = self.conditions[i].relation.allowed();
            (0..n).any(|j| {
                let (a, b) = (&self.conditions[i], &self.conditions[j]);
                let rel = if a.poly == b.poly {
                    b.relation
                } else if a.poly == -&b.poly {
                    b.relation.flipped()
                } else {
                    return false;
                };
                let allowed_j = rel.allowed();
                !(0..3).any(|s| allowed_i[s] && allowed_j[s])
            })
        })
    }

    pub fn compose(&self, subs: &[Polynomial]) -> Result<Cell> {
        Ok(Cell {
            conditions: self
                .conditions
                .iter()
                .map(|c| Ok(SignCondition::new(c.poly.compose(subs)?, c.relation)))
                .collect::<Result<_>>()?,
        })
    }
}

/// Axis-aligned closed box with possibly infinite sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxDomain {
    pub bounds: Vec<(Option<Rational>, Option<Rational>)>,
}

/// Finite stand-in for infinite sides when sampling.
const SAMPLE_RADIUS: i64 = 16;

impl BoxDomain {
    pub fn unbounded(nvars: usize) -> Self {
        BoxDomain { bounds: vec![(None, None); nvars] }
    }

    pub fn new(bounds: Vec<(Option<Rational>, Option<Rational>)>) -> Result<Self> {
        for (lo, hi) in &bounds {
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return Err(Error::Invalid(format!("empty domain side [{l}, {h}]")));
                }
            }
        }
        Ok(BoxDomain { bounds })
    }

    pub fn nvars(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, m: &Point) -> Result<bool> {
        check_len(self.nvars(), m.len())?;
        Ok(match m {
            Point::Rational(v) => self.bounds.iter().zip(v).all(|((lo, hi), x)| {
                lo.as_ref().is_none_or(|l| l <= x) && hi.as_ref().is_none_or(|h| x <= h)
            }),
            Point::Real(v) => self.bounds.iter().zip(v).all(|((lo, hi), &x)| {
                use num_traits::ToPrimitive;
                lo.as_ref().is_none_or(|l| l.to_f64().unwrap() <= x) && hi.as_ref().is_none_or(|h| x <= h.to_f64().unwrap())
            }),
        })
    }

    pub fn require(&self, m: &Point) -> Result<()> {
        if self.contains(m)? {
            Ok(())
        } else {
            Err(Error::OutsideDomain)
        }
    }

    pub fn intersect(&self, other: &BoxDomain) -> Result<BoxDomain> {
        if self.nvars() != other.nvars() {
            return Err(Error::DomainMismatch);
        }
        let bounds = self
            .bounds
            .iter()
            .zip(&other.bounds)
            .map(|((l1, h1), (l2, h2))| {
                let lo = match (l1, l2) {
                    (Some(a), Some(b)) => Some(a.max(b).clone()),
                    (a, b) => a.clone().or(b.clone()),
                };
                let hi = match (h1, h2) {
                    (Some(a), Some(b)) => Some(a.min(b).clone()),
                    (a, b) => a.clone().or(b.clone()),
                };
                (lo, hi)
            })
            .collect();
        BoxDomain::new(bounds).map_err(|_| Error::DomainMismatch)
    }

    /// Finite sampling window for each side.
    pub fn window(&self) -> Vec<(Rational, Rational)> {
        self.bounds
            .iter()
            .map(|(lo, hi)| {
                let r = Rational::from_integer(BigInt::from(SAMPLE_RADIUS));
                let l = lo.clone().unwrap_or_else(|| hi.as_ref().map_or(-r.clone(), |h| h - &r));
                let h = hi.clone().unwrap_or_else(|| &l + &r + &r);
                (l, h)
            })
            .collect()
    }

    /// A random point with small denominators, uniformly spread over the
    /// sampling window.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Rational> {
        self.window().iter().map(|(lo, hi)| small_rational(rng, lo, hi)).collect()
    }
}

/// Random rational in `[lo, hi]` with denominator at most 8.
pub fn small_rational<R: Rng>(rng: &mut R, lo: &Rational, hi: &Rational) -> Rational {
    let d: i64 = rng.gen_range(1..=8);
    let db = Rational::from_integer(BigInt::from(d));
    let nlo = (lo * &db).ceil().to_integer();
    let nhi = (hi * &db).floor().to_integer();
    if nlo > nhi {
        return lo.clone();
    }
    let span = &nhi - &nlo;
    let span64: i64 = span.try_into().unwrap_or(i64::MAX - 1);
    let k = rng.gen_range(0..=span64);
    let n = nlo + BigInt::from(k);
    Rational::new(n, BigInt::from(d))
}
