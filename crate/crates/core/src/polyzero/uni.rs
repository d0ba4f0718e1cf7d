//! Univariate polynomials over the rationals and exact real-root counting
//! with Sturm sequences.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geom::{format_rational, int, Rational};

/// Coefficients in ascending degree; the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `a + b t`
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::new(vec![a, b])
    }

    /// Monic product of `(t - r)` over the given roots.
    pub fn from_roots(roots: &[Rational]) -> Self {
        roots.iter().fold(Self::constant(Rational::one()), |acc, r| {
            &acc * &Self::linear(-r.clone(), Rational::one())
        })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let f = &rem[k + dd] / &lead;
            if f.is_zero() {
                continue;
            }
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &f * c;
            }
            quot[k] = f;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same distinct roots, all simple.
    pub fn square_free(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Number of distinct real roots in the closed interval `[lo, hi]`.
    pub fn count_roots(&self, lo: &Rational, hi: &Rational) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if lo > hi {
            return Err(Error::InvalidInterval);
        }
        let mut p = IntPoly::primitive(self);
        let mut count = 0;
        for end in [lo, hi] {
            if p.degree() > 0 && p.sign_at(end) == 0 {
                count += 1;
                while p.degree() > 0 && p.sign_at(end) == 0 {
                    p = p.deflate(end);
                }
            }
            if lo == hi {
                return Ok(count);
            }
        }
        if p.degree() == 0 {
            return Ok(count);
        }
        // The chain of a non-square-free p is the square-free chain times
        // gcd(p, p'), which has no root at either end after deflation.
        let chain = p.sturm_chain();
        Ok(count + IntPoly::variations(&chain, lo) - IntPoly::variations(&chain, hi))
    }

    /// Disjoint rational isolating intervals, one per distinct root in
    /// `[lo, hi]`, in increasing order. Exact roots found on bisection
    /// points come back as degenerate intervals `(r, r)`.
    pub fn isolate_roots(&self, lo: &Rational, hi: &Rational) -> Result<Vec<(Rational, Rational)>> {
        let total = self.count_roots(lo, hi)?;
        let q = self.square_free();
        let mut out = Vec::with_capacity(total);
        if q.eval(lo).is_zero() {
            out.push((lo.clone(), lo.clone()));
        }
        let inner = total - out.len() - usize::from(lo != hi && q.eval(hi).is_zero());
        isolate_open(&q, lo.clone(), hi.clone(), inner, &mut out);
        if lo != hi && q.eval(hi).is_zero() {
            out.push((hi.clone(), hi.clone()));
        }
        Ok(out)
    }
}

/// Integer coefficients, ascending, trimmed. Only positive multiples of the
/// rational polynomial are ever formed, so signs are preserved.
#[derive(Clone, Debug)]
struct IntPoly(Vec<BigInt>);

impl IntPoly {
    fn primitive(p: &UniPoly) -> Self {
        let den = p.coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = p.coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Self::trim(ints).content_free()
    }

    fn trim(mut c: Vec<BigInt>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        IntPoly(c)
    }

    fn content_free(self) -> Self {
        let g = self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g.is_zero() || g.is_one() {
            return self;
        }
        IntPoly(self.0.into_iter().map(|c| c / &g).collect())
    }

    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Sign of `p(t)`, via `den^d p(num/den)` with `den > 0`.
    fn sign_at(&self, t: &Rational) -> i8 {
        let (num, den) = (t.numer(), t.denom());
        let mut acc = BigInt::zero();
        let mut dpow = BigInt::one();
        for c in self.0.iter().rev() {
            acc = acc * num + c * &dpow;
            dpow *= den;
        }
        match acc.sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
        }
    }

    /// Exact quotient by `(den t - num)` for a root `t = num/den`.
    fn deflate(&self, t: &Rational) -> Self {
        let (num, den) = (t.numer(), t.denom());
        let d = self.degree();
        let mut q = vec![BigInt::zero(); d];
        let mut rem = self.0.clone();
        for k in (0..d).rev() {
            let f = &rem[k + 1] / den;
            rem[k] += &f * num;
            q[k] = f;
        }
        Self::trim(q).content_free()
    }

    fn derivative(&self) -> Self {
        Self::trim(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    /// A positive multiple of `rem(a, b)`.
    fn pseudo_rem(a: &Self, b: &Self) -> Self {
        let lead = b.0.last().expect("nonzero divisor").clone();
        let db = b.degree();
        let mut r = a.0.clone();
        let mut steps = 0u32;
        while r.len() > db && !r.is_empty() {
            let k = r.len() - 1 - db;
            let top = r.last().unwrap().clone();
            for c in r.iter_mut() {
                *c *= &lead;
            }
            for (i, c) in b.0.iter().enumerate() {
                r[k + i] -= &top * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
            steps += 1;
        }
        let mut out = Self::trim(r);
        if lead.is_negative() && steps % 2 == 1 {
            out.0.iter_mut().for_each(|c| *c = -c.clone());
        }
        out.content_free()
    }

    fn sturm_chain(&self) -> Vec<Self> {
        let mut chain = vec![self.clone(), self.derivative().content_free()];
        loop {
            let n = chain.len();
            let r = Self::pseudo_rem(&chain[n - 2], &chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(IntPoly(r.0.into_iter().map(|c| -c).collect()));
        }
        chain
    }

    fn variations(chain: &[Self], t: &Rational) -> usize {
        let mut last = 0i8;
        let mut count = 0;
        for p in chain {
            let s = p.sign_at(t);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }
}

/// Roots strictly inside `(lo, hi)`; `count` is known by the caller.
fn isolate_open(q: &UniPoly, lo: Rational, hi: Rational, count: usize, out: &mut Vec<(Rational, Rational)>) {
    if count == 0 {
        return;
    }
    if count == 1 && !q.eval(&lo).is_zero() && !q.eval(&hi).is_zero() {
        out.push((lo, hi));
        return;
    }
    let mid = (&lo + &hi) / int(2);
    let left = q.count_roots(&lo, &mid).expect("nonzero") - usize::from(q.eval(&lo).is_zero());
    let mid_root = q.eval(&mid).is_zero();
    let left_open = left - usize::from(mid_root);
    isolate_open(q, lo, mid.clone(), left_open, out);
    if mid_root {
        out.push((mid.clone(), mid.clone()));
    }
    isolate_open(q, mid, hi, count - left_open - usize::from(mid_root), out);
}

/// Distinct real roots of `p` in `[lo, hi]`.
pub fn count_real_roots(p: &UniPoly, lo: &Rational, hi: &Rational) -> Result<usize> {
    p.count_roots(lo, hi)
}

impl Add for &UniPoly {
    type Output = UniPoly;

    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        UniPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;

    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs.clone())
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;

    fn neg(self) -> UniPoly {
        UniPoly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;

    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

impl std::fmt::Display for UniPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{}*t^{i}", format_rational(c)))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
