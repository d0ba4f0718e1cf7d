//! Exact rational linear geometry: points, primitive directions, canonical
//! lines, incidence and stereographic projection.
//!
//! A line is stored as `(base, dir)` where `dir` is a primitive integer
//! vector whose first nonzero entry is positive and `base` is the foot of
//! the perpendicular from the origin. Both parts are exactly computable, so
//! two representations of the same geometric line always compare equal.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Nearest rational with denominator `2^bits`. Used wherever a float must
/// be turned into exact data without dragging a 1074-bit denominator along.
pub fn dyadic(x: f64, bits: u32) -> Rational {
    let scale = (1u64 << bits) as f64;
    let num = (x * scale).round();
    let den = BigInt::one() << bits;
    Rational::new(BigInt::from(num as i128), den)
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    let parse_int = |t: &str| BigInt::from_str(t.trim()).map_err(|e| format!("bad integer {t:?}: {e}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(Rational::new(parse_int(n)?, d))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let coords = s
            .split(',')
            .map(parse_rational)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Point(coords))
    }
}

/// Primitive integer direction, identified with its negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction(Vec<BigInt>);

impl Direction {
    pub fn new(v: Vec<BigInt>) -> Result<Self> {
        let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if g.is_zero() {
            return Err(Error::ZeroDirection);
        }
        let flip = v
            .iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.sign() == Sign::Minus);
        let v = v
            .into_iter()
            .map(|x| {
                let y = x / &g;
                if flip {
                    -y
                } else {
                    y
                }
            })
            .collect();
        Ok(Direction(v))
    }

    pub fn from_ints(v: &[i64]) -> Result<Self> {
        Self::new(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Scales a rational vector to the primitive integer vector on the same line.
    pub fn from_rationals(v: &[Rational]) -> Result<Self> {
        let lcm = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        Self::new(
            v.iter()
                .map(|x| (x * Rational::from_integer(lcm.clone())).to_integer())
                .collect(),
        )
    }

    pub fn axis(n: usize, i: usize) -> Self {
        Direction((0..n).map(|j| BigInt::from((i == j) as i64)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[BigInt] {
        &self.0
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.0.iter().cloned().map(Rational::from_integer).collect()
    }

    pub fn norm_squared(&self) -> BigInt {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn to_unit_f64(&self) -> Vec<f64> {
        let v: Vec<f64> = self.0.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    }

    /// The rational unit vector `dir/|dir|`, when `|dir|` is an integer.
    pub fn rational_unit(&self) -> Option<Vec<Rational>> {
        let n2 = self.norm_squared();
        let root = n2.sqrt();
        if &root * &root != n2 {
            return None;
        }
        Some(
            self.0
                .iter()
                .map(|x| Rational::new(x.clone(), root.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    base: Point,
    dir: Direction,
}

/// Canonical form of the line `base + t * dir_raw`.
pub fn canonicalize_line(base: Point, dir_raw: &[Rational]) -> Result<Line> {
    if base.dim() != dir_raw.len() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: dir_raw.len(),
        });
    }
    let dir = Direction::from_rationals(dir_raw)?;
    let d = dir.to_rationals();
    let t = dot(base.coords(), &d) / Rational::from_integer(dir.norm_squared());
    let foot = base
        .coords()
        .iter()
        .zip(&d)
        .map(|(b, di)| b - &t * di)
        .collect();
    Ok(Line {
        base: Point(foot),
        dir,
    })
}

impl Line {
    pub fn new(base: Point, dir: &Direction) -> Result<Self> {
        canonicalize_line(base, &dir.to_rationals())
    }

    pub fn through(p: &Point, q: &Point) -> Result<Self> {
        let d: Vec<Rational> = q.coords().iter().zip(p.coords()).map(|(a, b)| a - b).collect();
        canonicalize_line(p.clone(), &d)
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn dir(&self) -> &Direction {
        &self.dir
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn point_at(&self, t: &Rational) -> Point {
        Point(
            self.base
                .coords()
                .iter()
                .zip(self.dir.components())
                .map(|(b, d)| b + t * Rational::from_integer(d.clone()))
                .collect(),
        )
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        point_on_line(p, self)
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "base: {} | dir: {}", self.base, self.dir)
    }
}

impl FromStr for Line {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (base, dir) = s
            .split_once('|')
            .ok_or_else(|| format!("missing '|' in line record {s:?}"))?;
        let base = base
            .trim()
            .strip_prefix("base:")
            .ok_or("line record must start with 'base:'")?;
        let dir = dir
            .trim()
            .strip_prefix("dir:")
            .ok_or("missing 'dir:' field")?;
        let base: Point = base.trim().parse()?;
        let dir = dir
            .split(',')
            .map(|t| BigInt::from_str(t.trim()).map_err(|e| format!("bad direction entry {t:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let dir: Vec<Rational> = dir.into_iter().map(Rational::from_integer).collect();
        canonicalize_line(base, &dir).map_err(|e| e.to_string())
    }
}

/// Exact incidence: `p - base` is a rational multiple of `dir`.
pub fn point_on_line(p: &Point, l: &Line) -> Result<bool> {
    if p.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            got: p.dim(),
        });
    }
    let d = l.dir.components();
    let k = d.iter().position(|x| !x.is_zero()).expect("directions are nonzero");
    let t = (&p.0[k] - &l.base.0[k]) / Rational::from_integer(d[k].clone());
    Ok(p.0
        .iter()
        .zip(&l.base.0)
        .zip(d)
        .all(|((pi, bi), di)| *pi == bi + &t * Rational::from_integer(di.clone())))
}

/// Parameter interval `[lo, hi]` of `base + t dir` inside the closed unit cube.
pub fn cube_interval(base: &[Rational], dir: &[Rational]) -> Option<(Rational, Rational)> {
    let one = Rational::one();
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for (b, d) in base.iter().zip(dir) {
        if d.is_zero() {
            if b.is_negative() || *b > one {
                return None;
            }
            continue;
        }
        let a = -b / d;
        let c = (&one - b) / d;
        let (mn, mx) = if a <= c { (a, c) } else { (c, a) };
        if lo.as_ref().map_or(true, |l| mn > *l) {
            lo = Some(mn);
        }
        if hi.as_ref().map_or(true, |h| mx < *h) {
            hi = Some(mx);
        }
    }
    let (lo, hi) = (lo?, hi?);
    (lo <= hi).then_some((lo, hi))
}

#[derive(Clone, Copy, Debug)]
pub enum SphereInput<'a> {
    Direction(&'a Direction),
    Point(&'a [Rational]),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    Exact(Vec<Rational>),
    /// The direction has irrational length; the float image is flagged.
    Approximate(Vec<f64>),
}

/// Stereographic projection from the pole `(0, ..., 0, -1)`.
pub fn stereographic_project(input: SphereInput<'_>) -> Result<Projection> {
    match input {
        SphereInput::Point(v) => {
            let norm: Rational = dot(v, v);
            if !norm.is_one() {
                return Err(Error::NotOnSphere);
            }
            project_rational(v).map(Projection::Exact)
        }
        SphereInput::Direction(d) => match d.rational_unit() {
            Some(v) => project_rational(&v).map(Projection::Exact),
            None => {
                let v = d.to_unit_f64();
                let last = *v.last().expect("nonempty");
                if last <= -1.0 {
                    return Err(Error::AtPole);
                }
                Ok(Projection::Approximate(
                    v[..v.len() - 1].iter().map(|x| x / (1.0 + last)).collect(),
                ))
            }
        },
    }
}

fn project_rational(v: &[Rational]) -> Result<Vec<Rational>> {
    let (last, head) = v.split_last().ok_or(Error::DimensionMismatch { expected: 2, got: 0 })?;
    let denom = Rational::one() + last;
    if denom.is_zero() {
        return Err(Error::AtPole);
    }
    Ok(head.iter().map(|x| x / &denom).collect())
}

/// Inverse stereographic map `R^{n-1} -> S^{n-1}`.
pub fn stereographic_lift(y: &[Rational]) -> Vec<Rational> {
    let s: Rational = dot(y, y);
    let denom = Rational::one() + &s;
    let two = int(2);
    y.iter()
        .map(|yi| &two * yi / &denom)
        .chain(std::iter::once((Rational::one() - &s) / &denom))
        .collect()
}

/// Deduplicated points and lines of a common ambient dimension. Insertion
/// order of first occurrences is preserved so indices are stable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    pub n: usize,
    pub points: Vec<Point>,
    pub lines: Vec<Line>,
}

impl Config {
    pub fn new(n: usize, points: Vec<Point>, lines: Vec<Line>) -> Result<Self> {
        for p in &points {
            if p.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
            }
        }
        for l in &lines {
            if l.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
            }
        }
        Ok(Config {
            n,
            points: dedup(points),
            lines: dedup(lines),
        })
    }

    pub fn directions(&self) -> Vec<Direction> {
        dedup(self.lines.iter().map(|l| l.dir.clone()).collect())
    }

    pub fn points_text(&self) -> String {
        self.points.iter().map(|p| format!("{p}\n")).collect()
    }

    pub fn lines_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn from_text(points: &str, lines: &str) -> Result<Self> {
        let points = parse_points(points)?;
        let lines = parse_lines(lines)?;
        let n = points
            .first()
            .map(Point::dim)
            .or_else(|| lines.first().map(Line::dim))
            .unwrap_or(0);
        Config::new(n, points, lines)
    }
}

pub(crate) fn dedup<T: Clone + Eq + std::hash::Hash>(items: Vec<T>) -> Vec<T> {
    let mut seen = HashSet::with_capacity(items.len());
    items.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    records(text)
        .map(|(i, l)| l.parse::<Point>().map_err(|e| Error::parse(i, e)))
        .collect()
}

pub fn parse_lines(text: &str) -> Result<Vec<Line>> {
    records(text)
        .map(|(i, l)| l.parse::<Line>().map_err(|e| Error::parse(i, e)))
        .collect()
}

/// Serde helper: rationals travel as `"num/den"` strings.
pub mod rational_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LineRecord {
    pub base: String,
    pub dir: String,
}

impl From<&Line> for LineRecord {
    fn from(l: &Line) -> Self {
        LineRecord {
            base: l.base.to_string(),
            dir: l.dir.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[(i64, i64)]) -> Point {
        Point::new(c.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn canonicalize_examples() {
        let l = canonicalize_line(Point::from_ints(&[2, 2]), &ints(&[2, 2])).unwrap();
        assert_eq!(l.base(), &Point::from_ints(&[0, 0]));
        assert_eq!(l.dir(), &Direction::from_ints(&[1, 1]).unwrap());

        let l = canonicalize_line(Point::from_ints(&[1, 0]), &ints(&[0, -3])).unwrap();
        assert_eq!(l.base(), &Point::from_ints(&[1, 0]));
        assert_eq!(l.dir().components(), &[BigInt::from(0), BigInt::from(1)]);

        let l = canonicalize_line(Point::from_ints(&[1, 2]), &ints(&[2, 4])).unwrap();
        assert_eq!(l.base(), &Point::from_ints(&[0, 0]));
        assert_eq!(l.dir(), &Direction::from_ints(&[1, 2]).unwrap());
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(matches!(
            canonicalize_line(Point::from_ints(&[1, 1]), &ints(&[0, 0])),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn incidence_examples() {
        let diag = Line::new(Point::from_ints(&[0, 0]), &Direction::from_ints(&[1, 1]).unwrap()).unwrap();
        assert!(point_on_line(&pt(&[(1, 2), (1, 2)]), &diag).unwrap());

        // l_{2,3} of the M=4 family: x2 = (4*2*x1 + 3*(1-x1))/16 = (5 x1 + 3)/16
        let l = canonicalize_line(pt(&[(0, 1), (3, 16)]), &[int(1), rat(5, 16)]).unwrap();
        assert!(point_on_line(&pt(&[(1, 5), (1, 4)]), &l).unwrap());
        assert!(!point_on_line(&pt(&[(1, 5), (1, 3)]), &l).unwrap());

        assert!(matches!(
            point_on_line(&Point::from_ints(&[0, 0, 0]), &l),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stereographic_examples() {
        let p = |v: &[(i64, i64)]| -> Vec<Rational> { v.iter().map(|&(n, d)| rat(n, d)).collect() };
        let north = p(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(
            stereographic_project(SphereInput::Point(&north)).unwrap(),
            Projection::Exact(p(&[(0, 1), (0, 1)]))
        );
        let eq = p(&[(1, 1), (0, 1), (0, 1)]);
        assert_eq!(
            stereographic_project(SphereInput::Point(&eq)).unwrap(),
            Projection::Exact(p(&[(1, 1), (0, 1)]))
        );
        let v = p(&[(3, 5), (0, 1), (4, 5)]);
        assert_eq!(
            stereographic_project(SphereInput::Point(&v)).unwrap(),
            Projection::Exact(p(&[(1, 3), (0, 1)]))
        );
        let pole = p(&[(0, 1), (0, 1), (-1, 1)]);
        assert!(matches!(
            stereographic_project(SphereInput::Point(&pole)),
            Err(Error::AtPole)
        ));
    }

    #[test]
    fn direction_projection_lifts_when_norm_is_integral() {
        let d = Direction::from_ints(&[3, 0, 4]).unwrap();
        assert_eq!(
            stereographic_project(SphereInput::Direction(&d)).unwrap(),
            Projection::Exact(vec![rat(1, 3), int(0)])
        );
        let d = Direction::from_ints(&[1, 1]).unwrap();
        assert!(matches!(
            stereographic_project(SphereInput::Direction(&d)).unwrap(),
            Projection::Approximate(_)
        ));
    }

    #[test]
    fn text_formats_parse_back() {
        let l = canonicalize_line(pt(&[(1, 3), (2, 5), (0, 1)]), &ints(&[4, -2, 6])).unwrap();
        let s = l.to_string();
        assert!(s.starts_with("base: "));
        assert_eq!(s.parse::<Line>().unwrap(), l);
        assert!("base: 1/2,1 dir: 1,0".parse::<Line>().is_err());
        assert!(parse_points("# comment\n1/2,3/4\n\n5,6\n").unwrap().len() == 2);
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-20i64..20, 1i64..8).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(
            base in proptest::collection::vec(small_rat(), 3),
            dir in proptest::collection::vec(small_rat(), 3),
        ) {
            prop_assume!(dir.iter().any(|x| !x.is_zero()));
            let l = canonicalize_line(Point::new(base), &dir).unwrap();
            let again = canonicalize_line(l.base().clone(), &l.dir().to_rationals()).unwrap();
            prop_assert_eq!(&again, &l);
            prop_assert!(dot(l.base().coords(), &l.dir().to_rationals()).is_zero());
        }

        #[test]
        fn incidence_survives_reparametrisation(
            base in proptest::collection::vec(small_rat(), 3),
            dir in proptest::collection::vec(small_rat(), 3),
            t in small_rat(),
            s in small_rat(),
            scale in small_rat(),
        ) {
            prop_assume!(dir.iter().any(|x| !x.is_zero()) && !scale.is_zero());
            let p: Vec<Rational> = base.iter().zip(&dir).map(|(b, d)| b + &t * d).collect();
            let shifted: Vec<Rational> = base.iter().zip(&dir).map(|(b, d)| b + &s * d).collect();
            let scaled: Vec<Rational> = dir.iter().map(|d| d * &scale).collect();
            let l1 = canonicalize_line(Point::new(base), &dir).unwrap();
            let l2 = canonicalize_line(Point::new(shifted), &scaled).unwrap();
            prop_assert_eq!(&l1, &l2);
            prop_assert!(point_on_line(&Point::new(p), &l1).unwrap());
        }

        #[test]
        fn stereographic_inverse_roundtrip(y in proptest::collection::vec(small_rat(), 1..4)) {
            let v = stereographic_lift(&y);
            prop_assert!(dot(&v, &v).is_one());
            let back = stereographic_project(SphereInput::Point(&v)).unwrap();
            prop_assert_eq!(back, Projection::Exact(y));
        }
    }
}
