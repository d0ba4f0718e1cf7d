//! Multivariate polynomials with exact rational coefficients, and the
//! zero-set measurements built on them: restriction to lines, exact root
//! counts, neighborhood volume, directed area and grid-level components.
//!
//! Sign-based zero detection cannot see zeros without a sign change (for
//! example a squared factor), so every grid-based estimate carries
//! [`Flag::SignBlind`]. Square-free inputs avoid the blind spot.

mod area;
mod components;
mod uni;
mod volume;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{format_rational, parse_rational, to_f64, Line, Rational};

pub(crate) use area::perp_frame;
pub use area::{cylinder_directed_area, directed_area, AreaMode, DirectedArea};
pub use components::{connected_components, ComponentCount};
pub use uni::{count_real_roots, UniPoly};
pub use volume::{neighborhood_volume, neighborhood_volume_on_grid, neighborhood_volume_with, Metric, VolumeEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flag {
    /// Zeros without a sign change may be missed.
    #[serde(rename = "SIGN_BLIND")]
    SignBlind,
    /// Some fiber lines lay inside the zero set and were counted as zero
    /// crossings (a measure-zero event for a correct fiber grid).
    #[serde(rename = "CONTAINED_FIBERS")]
    ContainedFibers,
    /// Crossings counted by sign changes at sample points, not exact roots.
    #[serde(rename = "SAMPLED")]
    Sampled,
}

fn mul_linear(p: &[BigInt], s: &[BigInt; 2]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] += c * &s[0];
        out[i + 1] += c * &s[1];
    }
    out
}

fn mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Sparse polynomial in `n_vars` variables; exponent tuples map to nonzero
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
    degree: u32,
}

impl MultiPoly {
    pub fn zero(n_vars: usize) -> Self {
        MultiPoly {
            n_vars,
            terms: BTreeMap::new(),
            degree: 0,
        }
    }

    pub fn constant(n_vars: usize, c: Rational) -> Self {
        Self::from_terms(n_vars, [(vec![0; n_vars], c)])
    }

    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = 1;
        Self::from_terms(n_vars, [(e, Rational::one())])
    }

    /// `sum coeffs[i] * x_i + constant`
    pub fn linear(coeffs: &[Rational], constant: Rational) -> Self {
        let n = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut e = vec![0; n];
                e[i] = 1;
                (e, c.clone())
            })
            .chain(std::iter::once((vec![0; n], constant)));
        Self::from_terms(n, terms)
    }

    /// Sums repeated exponents and drops zero coefficients.
    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut map: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), n_vars, "exponent length must equal n_vars");
            *map.entry(e).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let degree = map.keys().map(|e| e.iter().sum()).max().unwrap_or(0);
        MultiPoly {
            n_vars,
            terms: map,
            degree,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_terms(self.n_vars, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.n_vars, Rational::one()), |acc, _| &acc * self)
    }

    pub fn product<'a>(n_vars: usize, factors: impl IntoIterator<Item = &'a MultiPoly>) -> Self {
        factors
            .into_iter()
            .fold(Self::constant(n_vars, Rational::one()), |acc, f| &acc * f)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        self.check_dim(x.len())?;
        let mut pows: Vec<Vec<Rational>> = x.iter().map(|xi| vec![Rational::one(), xi.clone()]).collect();
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while pows[i].len() <= k {
                    let next = pows[i].last().unwrap() * &x[i];
                    pows[i].push(next);
                }
                if k > 0 {
                    term *= &pows[i][k];
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// The homogeneous component of top total degree.
    pub fn highest_part(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let d = self.degree;
        Ok(Self::from_terms(
            self.n_vars,
            self.terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == d)
                .map(|(e, c)| (e.clone(), c.clone())),
        ))
    }

    /// `t -> Q(base + t dir)`.
    pub fn restrict(&self, base: &[Rational], dir: &[Rational]) -> Result<UniPoly> {
        self.check_dim(base.len())?;
        self.check_dim(dir.len())?;
        if self.is_zero() {
            return Ok(UniPoly::zero());
        }
        // Clear denominators: x_i = (B_i + D_i t) / L and coefficients c_e = C_e / K,
        // then L^deg K q(x) = Σ C_e L^{deg-|e|} Π (B_i + D_i t)^{e_i} over the integers.
        let l = base.iter().chain(dir).fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let k = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scaled = |v: &Rational| v.numer() * (&l / v.denom());
        let subs: Vec<[BigInt; 2]> = base.iter().zip(dir).map(|(b, d)| [scaled(b), scaled(d)]).collect();
        let deg = self.degree() as usize;
        let mut lpow = vec![BigInt::one()];
        for i in 0..deg {
            let next = &lpow[i] * &l;
            lpow.push(next);
        }
        let mut pows: Vec<Vec<Vec<BigInt>>> = subs.iter().map(|_| vec![vec![BigInt::one()]]).collect();
        let mut acc = vec![BigInt::zero(); deg + 1];
        for (e, c) in &self.terms {
            let mut term = vec![c.numer() * (&k / c.denom()) * &lpow[deg - e.iter().sum::<u32>() as usize]];
            for (i, &ei) in e.iter().enumerate() {
                let ei = ei as usize;
                while pows[i].len() <= ei {
                    let next = mul_linear(pows[i].last().unwrap(), &subs[i]);
                    pows[i].push(next);
                }
                if ei > 0 {
                    term = mul_int(&term, &pows[i][ei]);
                }
            }
            for (a, t) in acc.iter_mut().zip(term) {
                *a += t;
            }
        }
        let scale = Rational::new(BigInt::one(), &lpow[deg] * &k);
        Ok(UniPoly::new(acc.into_iter().map(|c| Rational::from_integer(c) * &scale).collect()))
    }

    /// Restriction along the line's canonical parametrization `base + t dir`.
    /// Identically zero exactly when the line lies in the zero set.
    pub fn restrict_to_line(&self, l: &Line) -> Result<UniPoly> {
        self.restrict(l.base().coords(), &l.dir().to_rationals())
    }

    /// Substitutes polynomial `subs[i]` for variable `x_i`.
    pub fn compose(&self, subs: &[MultiPoly]) -> Result<Self> {
        self.check_dim(subs.len())?;
        let m = subs.first().map_or(0, |s| s.n_vars);
        let mut acc = Self::zero(m);
        let mut pows: Vec<Vec<MultiPoly>> = subs
            .iter()
            .map(|s| vec![Self::constant(m, Rational::one()), s.clone()])
            .collect();
        for (e, c) in &self.terms {
            let mut term = Self::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while pows[i].len() <= k {
                    let next = pows[i].last().unwrap() * &subs[i];
                    pows[i].push(next);
                }
                if k > 0 {
                    term = &term * &pows[i][k];
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            n_vars: self.n_vars,
            degree: self.degree,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), to_f64(c))).collect(),
        }
    }

    /// One monomial per line, `"num/den e1 ... en"`.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            let zeros = vec!["0"; self.n_vars].join(" ");
            return format!("0/1 {zeros}\n");
        }
        self.terms
            .iter()
            .map(|(e, c)| {
                let es: Vec<String> = e.iter().map(u32::to_string).collect();
                format!("{} {}\n", format_rational(c), es.join(" "))
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n_vars = None;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let coeff = parse_rational(tokens.next().unwrap()).map_err(|e| Error::parse(i + 1, e))?;
            let exps = tokens
                .map(|t| t.parse::<u32>().map_err(|e| Error::parse(i + 1, format!("bad exponent {t:?}: {e}"))))
                .collect::<Result<Vec<u32>>>()?;
            match n_vars {
                None => n_vars = Some(exps.len()),
                Some(n) if n != exps.len() => {
                    return Err(Error::parse(i + 1, format!("expected {n} exponents, found {}", exps.len())))
                }
                _ => {}
            }
            terms.push((exps, coeff));
        }
        let n = n_vars.ok_or_else(|| Error::parse(0, "polynomial file has no monomials"))?;
        if n == 0 {
            return Err(Error::parse(0, "monomials need at least one exponent"));
        }
        Ok(Self::from_terms(n, terms))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{k}", i + 1) })
                    .collect();
                if mono.is_empty() {
                    format_rational(c)
                } else {
                    format!("{}*{}", format_rational(c), mono.join("*"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        MultiPoly::from_terms(
            self.n_vars,
            self.terms.iter().chain(&rhs.terms).map(|(e, c)| (e.clone(), c.clone())),
        )
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs.clone())
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        MultiPoly {
            n_vars: self.n_vars,
            degree: self.degree,
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;

    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                terms.push((e, ca * cb));
            }
        }
        MultiPoly::from_terms(self.n_vars, terms)
    }
}

/// Float image of a [`MultiPoly`] for grid sampling.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    n_vars: usize,
    degree: u32,
    terms: Vec<(Vec<u32>, f64)>,
}

impl FloatPoly {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let side = self.degree as usize + 1;
        let mut pows = vec![1.0; side * x.len()];
        for (i, &xi) in x.iter().enumerate() {
            for k in 1..side {
                pows[i * side + k] = pows[i * side + k - 1] * xi;
            }
        }
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &k)| if k == 0 { acc } else { acc * pows[i * side + k as usize] })
            })
            .sum()
    }

    /// Values at the nodes `j / m` of the `(m+1)^n` grid over the unit cube,
    /// last axis fastest.
    pub fn grid_values(&self, m: usize) -> Vec<f64> {
        let n = self.n_vars;
        let side = m + 1;
        let d = self.degree as usize;
        let pows: Vec<Vec<f64>> = (0..=d)
            .map(|k| (0..side).map(|j| (j as f64 / m as f64).powi(k as i32)).collect())
            .collect();
        let mut by_last: Vec<Vec<(&[u32], f64)>> = vec![Vec::new(); d + 1];
        for (e, c) in &self.terms {
            by_last[e[n - 1] as usize].push((&e[..n - 1], *c));
        }
        let prefixes = side.pow(n as u32 - 1);
        let mut out = vec![0.0; prefixes * side];
        out.par_chunks_mut(side).enumerate().for_each(|(prefix, row)| {
            let mut idx = vec![0usize; n - 1];
            let mut rem = prefix;
            for slot in idx.iter_mut().rev() {
                *slot = rem % side;
                rem /= side;
            }
            let coeffs: Vec<f64> = by_last
                .iter()
                .map(|ts| {
                    ts.iter()
                        .map(|(e, c)| {
                            e.iter()
                                .zip(&idx)
                                .fold(*c, |acc, (&k, &j)| if k == 0 { acc } else { acc * pows[k as usize][j] })
                        })
                        .sum()
                })
                .collect();
            for (j, slot) in row.iter_mut().enumerate() {
                let t = j as f64 / m as f64;
                *slot = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
            }
        });
        out
    }
}

/// Strides for a row-major grid of `side^n` entries, last axis fastest.
pub(crate) fn strides(side: usize, n: usize) -> Vec<usize> {
    let mut s = vec![1; n];
    for i in (0..n.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * side;
    }
    s
}

pub(crate) fn unravel(mut idx: usize, side: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % side;
        idx /= side;
    }
    out
}

pub(crate) fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Cells of an `m^n` grid whose `2^n` corner values are not all of one
/// strict sign. `values` are node values on the `(m+1)^n` grid.
pub(crate) fn zero_cells(values: &[f64], m: usize, n: usize) -> Vec<bool> {
    let node_strides = strides(m + 1, n);
    let corners: Vec<usize> = (0..1usize << n)
        .map(|mask| (0..n).filter(|b| mask >> b & 1 == 1).map(|b| node_strides[b]).sum())
        .collect();
    (0..m.pow(n as u32))
        .into_par_iter()
        .map(|cell| {
            let idx = unravel(cell, m, n);
            let origin: usize = idx.iter().zip(&node_strides).map(|(i, s)| i * s).sum();
            let first = sign(values[origin + corners[0]]);
            if first == 0 {
                return true;
            }
            corners[1..].iter().any(|&c| sign(values[origin + c]) != first)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{int, rat, Direction, Point};
    use proptest::prelude::*;

    fn circle() -> MultiPoly {
        // x1^2 + x2^2 - 1
        MultiPoly::from_terms(2, [(vec![2, 0], int(1)), (vec![0, 2], int(1)), (vec![0, 0], int(-1))])
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(circle().evaluate(&[rat(3, 5), rat(4, 5)]).unwrap(), int(0));
        assert_eq!(circle().evaluate(&[int(1), int(1)]).unwrap(), int(1));
        let xy = MultiPoly::from_terms(2, [(vec![1, 1], int(1))]);
        assert_eq!(xy.evaluate(&[rat(2, 3), rat(3, 2)]).unwrap(), int(1));
        assert!(matches!(xy.evaluate(&[int(1)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn highest_part_examples() {
        let q = MultiPoly::from_terms(2, [(vec![2, 0], int(1)), (vec![0, 1], int(1)), (vec![0, 0], int(1))]);
        assert_eq!(q.highest_part().unwrap(), MultiPoly::from_terms(2, [(vec![2, 0], int(1))]));
        let q = MultiPoly::from_terms(2, [(vec![1, 1], int(1)), (vec![1, 0], int(1)), (vec![0, 0], int(-5))]);
        assert_eq!(q.highest_part().unwrap(), MultiPoly::from_terms(2, [(vec![1, 1], int(1))]));
        let h = MultiPoly::from_terms(2, [(vec![1, 1], int(3)), (vec![2, 0], int(-1))]);
        assert_eq!(h.highest_part().unwrap(), h);
        assert!(matches!(MultiPoly::zero(2).highest_part(), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn restriction_examples() {
        let axis = Line::new(Point::from_ints(&[0, 0]), &Direction::from_ints(&[1, 0]).unwrap()).unwrap();
        assert_eq!(
            circle().restrict_to_line(&axis).unwrap(),
            UniPoly::new(vec![int(-1), int(0), int(1)])
        );
        let xy = MultiPoly::from_terms(2, [(vec![1, 1], int(1))]);
        // (t, 1 + t): restrict the raw parametrization, not the canonical one
        assert_eq!(
            xy.restrict(&[int(0), int(1)], &[int(1), int(1)]).unwrap(),
            UniPoly::new(vec![int(0), int(1), int(1)])
        );
        let diff = MultiPoly::linear(&[int(1), int(-1)], int(0));
        let diag = Line::new(Point::from_ints(&[0, 0]), &Direction::from_ints(&[1, 1]).unwrap()).unwrap();
        assert!(diff.restrict_to_line(&diag).unwrap().is_zero());
    }

    #[test]
    fn text_roundtrip() {
        let q = circle();
        assert_eq!(MultiPoly::parse(&q.to_text()).unwrap(), q);
        let z = MultiPoly::zero(3);
        assert_eq!(MultiPoly::parse(&z.to_text()).unwrap(), z);
        assert!(MultiPoly::parse("1/2 1 0\n3 1\n").is_err());
        let q = MultiPoly::parse("# slab\n1 1 0\n-1/2 0 0\n\n").unwrap();
        assert_eq!(q, MultiPoly::linear(&[int(1), int(0)], rat(-1, 2)));
    }

    #[test]
    fn grid_values_match_pointwise() {
        let q = MultiPoly::from_terms(
            3,
            [(vec![2, 1, 0], rat(3, 2)), (vec![0, 0, 3], int(-1)), (vec![1, 0, 1], int(2)), (vec![0, 0, 0], rat(1, 7))],
        )
        .to_float();
        let m = 4;
        let vals = q.grid_values(m);
        for (i, v) in vals.iter().enumerate() {
            let idx = unravel(i, m + 1, 3);
            let x: Vec<f64> = idx.iter().map(|&j| j as f64 / m as f64).collect();
            assert!((q.eval(&x) - v).abs() < 1e-12);
        }
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-9i64..10, 1i64..5).prop_map(|(n, d)| rat(n, d))
    }

    fn small_poly() -> impl Strategy<Value = MultiPoly> {
        proptest::collection::vec((0u32..3, 0u32..3, small_rat()), 1..6)
            .prop_map(|ts| MultiPoly::from_terms(2, ts.into_iter().map(|(a, b, c)| (vec![a, b], c))))
    }

    proptest! {
        // Q(x + t v) = t^deg Q_h(v) + lower terms.
        #[test]
        fn leading_coefficient_is_highest_part(
            q in small_poly(),
            base in proptest::collection::vec(small_rat(), 2),
            dir in proptest::collection::vec(-4i64..5, 2),
        ) {
            prop_assume!(!q.is_zero() && dir.iter().any(|&d| d != 0));
            let dir: Vec<Rational> = dir.into_iter().map(int).collect();
            let r = q.restrict(&base, &dir).unwrap();
            let h = q.highest_part().unwrap().evaluate(&dir).unwrap();
            if r.degree() == Some(q.degree() as usize) {
                prop_assert_eq!(r.leading().unwrap(), &h);
            } else {
                prop_assert!(h.is_zero());
            }
        }

        #[test]
        fn restriction_commutes_with_evaluation(
            q in small_poly(),
            base in proptest::collection::vec(small_rat(), 2),
            dir in proptest::collection::vec(small_rat(), 2),
            t in small_rat(),
        ) {
            let r = q.restrict(&base, &dir).unwrap();
            let x: Vec<Rational> = base.iter().zip(&dir).map(|(b, d)| b + &t * d).collect();
            prop_assert_eq!(r.eval(&t), q.evaluate(&x).unwrap());
        }
    }
}
