#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use tepui_core::polyalg::{int, rat, Monomial, PolyMatrix, Polynomial, Rational, Variables};

pub fn vars(names: &[&str]) -> Variables {
    Variables::new(names.iter().copied()).unwrap()
}

pub fn parse(v: &Variables, s: &str) -> Polynomial {
    v.parse(s).unwrap()
}

pub fn sections(v: &Variables, rows: &[&[&str]]) -> Vec<Vec<Polynomial>> {
    rows.iter().map(|r| r.iter().map(|s| parse(v, s)).collect()).collect()
}

/// Random polynomial with at most `terms` terms, total degree ≤ `deg`,
/// integer coefficients in [-3, 3].
pub fn random_poly<R: Rng>(rng: &mut R, nvars: usize, deg: u32, terms: usize) -> Polynomial {
    let monos = Monomial::all_up_to_degree(nvars, deg);
    let k = rng.gen_range(0..=terms);
    Polynomial::from_terms(
        nvars,
        (0..k).map(|_| (monos[rng.gen_range(0..monos.len())].clone(), int(rng.gen_range(-3..=3)))),
    )
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, nvars: usize, deg: u32) -> PolyMatrix {
    let entries = (0..rows * cols).map(|_| random_poly(rng, nvars, deg, 3)).collect();
    PolyMatrix::new(rows, cols, nvars, entries).unwrap()
}

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-12..=12), rng.gen_range(1..=4))
}

pub fn random_point<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng)).collect()
}

pub fn poly_strategy(nvars: usize, deg: u32) -> impl Strategy<Value = Polynomial> {
    let monos = Monomial::all_up_to_degree(nvars, deg);
    let len = monos.len();
    proptest::collection::vec((0..len, -4i64..=4, 1i64..=3), 0..5).prop_map(move |terms| {
        Polynomial::from_terms(nvars, terms.into_iter().map(|(i, n, d)| (monos[i].clone(), rat(n, d))))
    })
}

pub fn point_strategy(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((-12i64..=12, 1i64..=4), n).prop_map(|v| v.into_iter().map(|(a, b)| rat(a, b)).collect())
}

pub fn matrix_strategy(rows: usize, cols: usize, nvars: usize, deg: u32) -> impl Strategy<Value = PolyMatrix> {
    proptest::collection::vec(poly_strategy(nvars, deg), rows * cols)
        .prop_map(move |e| PolyMatrix::new(rows, cols, nvars, e).unwrap())
}

/// Columns of an involutive family of polynomial vector fields on ℝⁿ,
/// n ≤ 3, at most 3 columns of degree ≤ 2, drawn from families closed
/// under bracket by construction.
pub fn random_involutive_anchor<R: Rng>(rng: &mut R) -> PolyMatrix {
    let n = rng.gen_range(1..=3usize);
    let names = ["x", "y", "z"];
    let v = Variables::new(names[..n].iter().copied()).unwrap();
    let zero = Polynomial::zero(n);
    let unit = |i: usize, p: Polynomial| -> Vec<Polynomial> {
        let mut f = vec![zero.clone(); n];
        f[i] = p;
        f
    };
    let mut fields: Vec<Vec<Polynomial>> = Vec::new();
    match rng.gen_range(0..5) {
        // a field and a function multiple of it
        0 => {
            let x: Vec<Polynomial> = (0..n).map(|_| random_poly(rng, n, 2, 2)).collect();
            let p = random_poly(rng, n, 1, 2);
            let px: Vec<Polynomial> = x.iter().map(|c| &p * c).collect();
            if px.iter().all(|c| c.total_degree().unwrap_or(0) <= 2) {
                fields.push(px);
            }
            fields.insert(0, x);
        }
        // commuting fields q_i(x_i) ∂_i
        1 => {
            for i in 0..n {
                let q = random_poly(rng, 1, 2, 3).compose(&[Polynomial::var(n, i)]).unwrap();
                fields.push(unit(i, q));
            }
        }
        // coordinate fields plus a multiple of one
        2 => {
            let k = rng.gen_range(1..=n);
            for i in 0..k {
                fields.push(unit(i, Polynomial::one(n)));
            }
            if k < 3 {
                let p = random_poly(rng, n, 2, 2);
                fields.push(unit(rng.gen_range(0..k), p));
            }
        }
        // linear Lie algebra actions
        3 => {
            let pick = rng.gen_range(0..3);
            match (n, pick) {
                (1, _) => fields.push(vec![v.parse("x").unwrap()]),
                (2, 0) => fields.extend([vec![v.parse("x").unwrap(), v.parse("y").unwrap()], vec![v.parse("-y").unwrap(), v.parse("x").unwrap()]]),
                (2, 1) => fields.extend([unit(0, v.parse("x").unwrap()), unit(1, v.parse("y").unwrap())]),
                (2, _) => fields.extend([unit(0, v.parse("x").unwrap()), unit(1, v.parse("x").unwrap())]),
                (_, _) => fields.extend([
                    vec![zero.clone(), v.parse("-z").unwrap(), v.parse("y").unwrap()],
                    vec![v.parse("z").unwrap(), zero.clone(), v.parse("-x").unwrap()],
                    vec![v.parse("-y").unwrap(), v.parse("x").unwrap(), zero.clone()],
                ]),
            }
        }
        // ∂_0 and a field independent of x_0 along the other axes
        _ => {
            fields.push(unit(0, Polynomial::one(n)));
            if n > 1 {
                let q = random_poly(rng, 1, 2, 3).compose(&[Polynomial::var(n, n - 1)]).unwrap();
                fields.push(unit(n - 1, q));
            }
        }
    }
    PolyMatrix::from_columns(n, n, &fields).unwrap()
}
