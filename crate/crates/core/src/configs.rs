//! Generators for the explicit constructions: the Furstenberg extremal
//! configuration, grid polynomials, random test polynomials, and exact
//! rational rotations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{canonicalize_line, dyadic, int, point_on_line, rat, rational_serde, Config, Direction, Line, Point, Rational};
use crate::linalg::{self, Matrix};
use crate::polyzero::MultiPoly;
use crate::seed::stream_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FurstenbergParams {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(with = "rational_serde")]
    pub beta: Rational,
}

impl FurstenbergParams {
    pub fn new(n: usize, m: u64, beta: Rational) -> Result<Self> {
        let p = FurstenbergParams { n, m, beta };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::BadParams(format!("n must be >= 2, got {}", self.n)));
        }
        if self.m < 2 {
            return Err(Error::BadParams(format!("M must be >= 2, got {}", self.m)));
        }
        if self.beta < Rational::zero() || self.beta > Rational::one() {
            return Err(Error::BadParams("beta must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// `⌊M^β⌋`, exactly: the largest `k` with `k^q <= M^p` for `β = p/q`.
    pub fn ab_max(&self) -> u64 {
        let p = self.beta.numer().to_u32().expect("beta numerator fits");
        let q = self.beta.denom().to_u32().expect("beta denominator fits");
        let target: BigInt = Pow::pow(BigInt::from(self.m), p);
        let (mut lo, mut hi) = (1u64, self.m);
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if Pow::pow(BigInt::from(mid), q) <= target {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }
}

fn line_tuples(n: usize, m: u64) -> Vec<Vec<u64>> {
    let len = 2 * (n - 1);
    let total = (m as usize).pow(len as u32);
    (0..total)
        .map(|mut k| {
            let mut t = vec![0u64; len];
            for slot in t.iter_mut().rev() {
                *slot = (k as u64 % m) + 1;
                k /= m as usize;
            }
            t
        })
        .collect()
}

/// The line `x_{i+1} = (M m_{i,1} x_1 + m_{i,2} (1 - x_1)) / M^2`.
fn furstenberg_line(n: usize, m: u64, t: &[u64]) -> Result<Line> {
    let mm = m as i64;
    let mut base = vec![Rational::zero(); n];
    let mut dir = vec![int(mm * mm); n];
    for i in 0..n - 1 {
        let (m1, m2) = (t[2 * i] as i64, t[2 * i + 1] as i64);
        base[i + 1] = rat(m2, mm * mm);
        dir[i + 1] = int(mm * m1 - m2);
    }
    canonicalize_line(Point::new(base), &dir)
}

fn furstenberg_point(n: usize, m: u64, t: &[u64], a: u64, b: u64) -> Point {
    let (a, b, mm) = (a as i64, b as i64, m as i64);
    let den = a + b * mm;
    let mut coords = Vec::with_capacity(n);
    coords.push(rat(a, den));
    for i in 0..n - 1 {
        let (m1, m2) = (t[2 * i] as i64, t[2 * i + 1] as i64);
        coords.push(rat(a * m1 + b * m2, den * mm));
    }
    Point::new(coords)
}

/// The configuration `(P_1, L_1)`: one line per tuple `m ∈ [1, M]^{2(n-1)}`
/// and on it the points indexed by `1 <= a, b <= ⌊M^β⌋`. Every point is
/// checked to lie on its line with exact arithmetic.
pub fn gen_furstenberg(params: &FurstenbergParams) -> Result<Config> {
    params.validate()?;
    let (n, m) = (params.n, params.m);
    let ab = params.ab_max();
    let per_line: Vec<(Line, Vec<Point>)> = line_tuples(n, m)
        .par_iter()
        .map(|t| {
            let line = furstenberg_line(n, m, t)?;
            let mut pts = Vec::with_capacity((ab * ab) as usize);
            for a in 1..=ab {
                for b in 1..=ab {
                    let p = furstenberg_point(n, m, t, a, b);
                    if !point_on_line(&p, &line)? {
                        return Err(Error::Internal(format!("point {p} is off its generating line {line}")));
                    }
                    pts.push(p);
                }
            }
            Ok((line, pts))
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut lines = Vec::with_capacity(per_line.len());
    for (l, pts) in per_line {
        lines.push(l);
        points.extend(pts);
    }
    Config::new(n, points, lines)
}

/// Number of distinct points of `gen_furstenberg(params)` without building
/// them. A point is fixed by the reduced ratio `a':b'` and, per coordinate,
/// by `a' m_1 + b' m_2`, so the count is `Σ |S(a',b')|^{n-1}` over coprime
/// pairs with `S(a',b') = {a' m_1 + b' m_2 : 1 <= m_1, m_2 <= M}`.
pub fn count_furstenberg_points(params: &FurstenbergParams) -> Result<u128> {
    params.validate()?;
    let (m, ab) = (params.m as usize, params.ab_max() as usize);
    let pairs: Vec<(usize, usize)> = (1..=ab)
        .flat_map(|a| (1..=ab).map(move |b| (a, b)))
        .filter(|&(a, b)| a.gcd(&b) == 1)
        .collect();
    let sizes: Vec<u128> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut seen = vec![false; (a + b) * m + 1];
            let mut count = 0u128;
            for m1 in 1..=m {
                for m2 in 1..=m {
                    let s = a * m1 + b * m2;
                    if !seen[s] {
                        seen[s] = true;
                        count += 1;
                    }
                }
            }
            count.pow(params.n as u32 - 1)
        })
        .collect();
    Ok(sizes.iter().sum())
}

/// `Π_i Π_{j=1..k} (x_i - j/(k+1))` with `k = ⌊d/n⌋`.
pub fn gen_grid_polynomial(n: usize, d: u32) -> Result<MultiPoly> {
    if n == 0 || (d as usize) < n {
        return Err(Error::BadParams(format!("grid polynomial needs d >= n, got d={d}, n={n}")));
    }
    let k = d as i64 / n as i64;
    let mut factors = Vec::new();
    for i in 0..n {
        for j in 1..=k {
            let mut c = vec![Rational::zero(); n];
            c[i] = Rational::one();
            factors.push(MultiPoly::linear(&c, -rat(j, k + 1)));
        }
    }
    Ok(MultiPoly::product(n, &factors))
}

/// Shifts `j/(k+1)` used by [`gen_grid_polynomial`].
pub fn grid_shifts(n: usize, d: u32) -> Vec<f64> {
    let k = d as usize / n.max(1);
    (1..=k).map(|j| j as f64 / (k + 1) as f64).collect()
}

/// Exact volume of the sup/Euclidean `alpha`-neighborhood of the grid zero
/// set in `I^n` (a union of slabs, so both metrics agree).
pub fn grid_neighborhood_volume(n: usize, d: u32, alpha: f64) -> f64 {
    let mut covered = 0.0;
    let mut last_end = 0.0f64;
    for s in grid_shifts(n, d) {
        let lo = (s - alpha).max(0.0).max(last_end);
        let hi = (s + alpha).min(1.0);
        if hi > lo {
            covered += hi - lo;
        }
        last_end = last_end.max(hi);
    }
    1.0 - (1.0 - covered).powi(n as i32)
}

/// Largest min-axis distance to the grid zero set over `samples` seeded
/// uniform points of `I^n`.
pub fn grid_density_probe(n: usize, d: u32, samples: usize, seed: u64) -> f64 {
    let shifts = grid_shifts(n, d);
    let mut rng = stream_rng(seed, "grid-probe", 0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let dist = (0..n)
            .map(|_| {
                let x: f64 = rng.gen();
                shifts.iter().map(|s| (x - s).abs()).fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(dist);
    }
    worst
}

/// Random polynomial of total degree `<= d` with coefficients drawn in the
/// centered variables `u = 2x - 1`, so the zero set tends to meet `I^n`.
pub fn random_dense_poly(n: usize, d: u32, seed: u64) -> MultiPoly {
    let mut rng = stream_rng(seed, "dense-poly", d as u64);
    let mut terms = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        if e.iter().sum::<u32>() <= d {
            terms.push((e.clone(), rat(rng.gen_range(-1000..=1000), 1000)));
        }
        let mut i = 0;
        loop {
            if i == n {
                let q = MultiPoly::from_terms(n, terms);
                let subs: Vec<MultiPoly> = (0..n)
                    .map(|j| {
                        let mut c = vec![Rational::zero(); n];
                        c[j] = int(2);
                        MultiPoly::linear(&c, int(-1))
                    })
                    .collect();
                let out = q.compose(&subs).expect("matching dimensions");
                return if out.is_zero() { MultiPoly::constant(n, Rational::one()) } else { out };
            }
            e[i] += 1;
            if e[i] <= d {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

/// Affine hyperplane `normal · x = offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<i64>,
    #[serde(with = "rational_serde")]
    pub offset: Rational,
}

impl Hyperplane {
    pub fn to_poly(&self) -> MultiPoly {
        let c: Vec<Rational> = self.normal.iter().map(|&a| int(a)).collect();
        MultiPoly::linear(&c, -self.offset.clone())
    }

    pub fn unit_normal(&self) -> Vec<f64> {
        let norm = self.normal.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt();
        self.normal.iter().map(|&a| a as f64 / norm).collect()
    }
}

/// `count` seeded points of `I^n` with 30-bit dyadic coordinates.
pub fn random_points(n: usize, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = stream_rng(seed, "points", 0);
    (0..count)
        .map(|_| Point::new((0..n).map(|_| dyadic(rng.gen::<f64>(), 30)).collect()))
        .collect()
}

/// `count` seeded hyperplanes with small integer normals, each through a
/// random dyadic point of `I^n`.
pub fn random_hyperplanes(n: usize, count: usize, seed: u64) -> Vec<Hyperplane> {
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, "hyperplane", i as u64);
            let normal: Vec<i64> = loop {
                let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-8..=8)).collect();
                if v.iter().any(|&x| x != 0) {
                    break v;
                }
            };
            let point: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(1..1024), 1024)).collect();
            let offset = normal.iter().zip(&point).map(|(&a, p)| int(a) * p).sum();
            Hyperplane { normal, offset }
        })
        .collect()
}

pub fn hyperplane_product(n: usize, planes: &[Hyperplane]) -> MultiPoly {
    let polys: Vec<MultiPoly> = planes.iter().map(Hyperplane::to_poly).collect();
    MultiPoly::product(n, &polys)
}

/// Product of `k` pairwise disjoint circles of radius `1/(4k)` centered on
/// the line `x_2 = 1/2`.
pub fn disjoint_circles(k: usize) -> MultiPoly {
    let k = k as i64;
    let circles: Vec<MultiPoly> = (0..k)
        .map(|i| {
            let x = &MultiPoly::var(2, 0) - &MultiPoly::constant(2, rat(2 * i + 1, 2 * k));
            let y = &MultiPoly::var(2, 1) - &MultiPoly::constant(2, rat(1, 2));
            &(&(&x * &x) + &(&y * &y)) - &MultiPoly::constant(2, rat(1, 16 * k * k))
        })
        .collect();
    MultiPoly::product(2, &circles)
}

/// Exact orthogonal matrix with determinant one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalRotation {
    matrix: Matrix,
}

impl RationalRotation {
    /// Cayley transform `(I - S)(I + S)^{-1}` of a skew-symmetric `S`.
    pub fn cayley(s: &Matrix) -> Result<Self> {
        let n = s.len();
        for (i, row) in s.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for j in 0..n {
                if row[j] != -s[j][i].clone() {
                    return Err(Error::BadParams("Cayley input must be skew-symmetric".into()));
                }
            }
        }
        let id = linalg::identity(n);
        let plus: Matrix = (0..n).map(|i| (0..n).map(|j| &id[i][j] + &s[i][j]).collect()).collect();
        let minus: Matrix = (0..n).map(|i| (0..n).map(|j| &id[i][j] - &s[i][j]).collect()).collect();
        let inv = linalg::inverse(&plus).ok_or(Error::SingularCayley)?;
        let matrix = linalg::mat_mul(&minus, &inv);
        if linalg::mat_mul(&linalg::transpose(&matrix), &matrix) != id {
            return Err(Error::Internal("Cayley transform is not orthogonal".into()));
        }
        Ok(RationalRotation { matrix })
    }

    pub fn identity(n: usize) -> Self {
        RationalRotation { matrix: linalg::identity(n) }
    }

    /// Cayley transform of a seeded skew matrix with entries in `{-3..3}/2`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, "rotation", n as u64);
        let mut s = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rat(rng.gen_range(-3..=3), 2);
                s[j][i] = -v.clone();
                s[i][j] = v;
            }
        }
        Self::cayley(&s).expect("I + S is invertible for real skew S")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RationalRotation) -> Self {
        RationalRotation { matrix: linalg::mat_mul(&self.matrix, &other.matrix) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn transpose(&self) -> Self {
        RationalRotation { matrix: linalg::transpose(&self.matrix) }
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        linalg::mat_vec(&self.matrix, v)
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        Point::new(self.apply(p.coords()))
    }

    pub fn apply_direction(&self, d: &Direction) -> Direction {
        Direction::from_rationals(&self.apply(&d.to_rationals())).expect("rotations keep vectors nonzero")
    }

    pub fn apply_line(&self, l: &Line) -> Line {
        canonicalize_line(self.apply_point(l.base()), &self.apply(&l.dir().to_rationals()))
            .expect("rotations keep vectors nonzero")
    }

    pub fn apply_config(&self, cfg: &Config) -> Config {
        Config {
            n: cfg.n,
            points: cfg.points.iter().map(|p| self.apply_point(p)).collect(),
            lines: cfg.lines.iter().map(|l| self.apply_line(l)).collect(),
        }
    }
}

/// `det R` computed exactly; one for every Cayley rotation.
pub fn rotation_determinant(r: &RationalRotation) -> Rational {
    linalg::determinant(r.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn params(n: usize, m: u64, beta: Rational) -> FurstenbergParams {
        FurstenbergParams::new(n, m, beta).unwrap()
    }

    fn points_per_line(cfg: &Config) -> Vec<usize> {
        cfg.lines
            .iter()
            .map(|l| cfg.points.iter().filter(|p| point_on_line(p, l).unwrap()).count())
            .collect()
    }

    fn distinct_ratios(k: i64) -> usize {
        let mut s = HashSet::new();
        for a in 1..=k {
            for b in 1..=k {
                s.insert(rat(a, b));
            }
        }
        s.len()
    }

    #[test]
    fn furstenberg_examples() {
        let cfg = gen_furstenberg(&params(2, 4, int(1))).unwrap();
        assert_eq!(cfg.lines.len(), 16);
        assert!(points_per_line(&cfg).iter().all(|&c| c == distinct_ratios(4)));
        assert_eq!(distinct_ratios(4), 11);

        let cfg = gen_furstenberg(&params(2, 2, int(1))).unwrap();
        assert_eq!(cfg.lines.len(), 4);
        assert!(points_per_line(&cfg).iter().all(|&c| c == 3));

        let cfg = gen_furstenberg(&params(2, 4, int(0))).unwrap();
        assert_eq!(cfg.lines.len(), 16);
        assert!(points_per_line(&cfg).iter().all(|&c| c == 1));
    }

    #[test]
    fn directions_match_construction() {
        let m = 4i64;
        let cfg = gen_furstenberg(&params(3, 4, int(1))).unwrap();
        assert_eq!(cfg.lines.len(), 256);
        for (t, l) in line_tuples(3, 4).iter().zip(&cfg.lines) {
            let want: Vec<Rational> = vec![
                int(1),
                rat(m * t[0] as i64 - t[1] as i64, m * m),
                rat(m * t[2] as i64 - t[3] as i64, m * m),
            ];
            assert_eq!(l.dir(), &Direction::from_rationals(&want).unwrap());
        }
    }

    #[test]
    fn fast_count_matches_dedup() {
        for (n, m, beta) in [(2, 2, int(1)), (2, 4, int(1)), (2, 5, rat(1, 2)), (3, 3, int(1)), (2, 6, int(1))] {
            let p = params(n, m, beta);
            let cfg = gen_furstenberg(&p).unwrap();
            assert_eq!(count_furstenberg_points(&p).unwrap(), cfg.points.len() as u128, "n={n} M={m}");
        }
    }

    #[test]
    fn floor_of_power() {
        assert_eq!(params(2, 16, rat(1, 2)).ab_max(), 4);
        assert_eq!(params(2, 17, rat(1, 2)).ab_max(), 4);
        assert_eq!(params(2, 27, rat(2, 3)).ab_max(), 9);
        assert_eq!(params(2, 26, rat(2, 3)).ab_max(), 8);
        assert_eq!(params(2, 9, int(0)).ab_max(), 1);
        assert!(FurstenbergParams::new(2, 1, int(1)).is_err());
    }

    #[test]
    fn grid_polynomial_examples() {
        let q = gen_grid_polynomial(2, 4).unwrap();
        assert_eq!(q.degree(), 4);
        for (x, y) in [(rat(1, 3), rat(1, 7)), (rat(5, 9), rat(2, 3))] {
            assert!(q.evaluate(&[x, y]).unwrap().is_zero());
        }
        assert_eq!(gen_grid_polynomial(2, 2).unwrap(), MultiPoly::product(2, &[
            MultiPoly::linear(&[int(1), int(0)], rat(-1, 2)),
            MultiPoly::linear(&[int(0), int(1)], rat(-1, 2)),
        ]));
        assert_eq!(gen_grid_polynomial(3, 3).unwrap().degree(), 3);
        assert!(matches!(gen_grid_polynomial(3, 2), Err(Error::BadParams(_))));
        assert!(grid_density_probe(2, 4, 10_000, 3) <= 1.0 / 3.0);
    }

    #[test]
    fn grid_volume_inclusion_exclusion() {
        // k = 2 slabs per axis of width 0.1: L = 0.2, volume 1 - 0.8^2.
        assert!((grid_neighborhood_volume(2, 4, 0.05) - 0.36).abs() < 1e-12);
    }

    #[test]
    fn cayley_examples() {
        let z = vec![vec![Rational::zero(); 3]; 3];
        assert_eq!(RationalRotation::cayley(&z).unwrap(), RationalRotation::identity(3));
        let s = vec![vec![int(0), int(1)], vec![int(-1), int(0)]];
        let r = RationalRotation::cayley(&s).unwrap();
        assert_eq!(r.matrix(), &vec![vec![int(0), int(-1)], vec![int(1), int(0)]]);
        let bad = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert!(RationalRotation::cayley(&bad).is_err());
    }

    #[test]
    fn random_rotations_are_orthogonal() {
        for seed in 0..5 {
            let r = RationalRotation::random(4, seed);
            let id = linalg::identity(4);
            assert_eq!(linalg::mat_mul(&linalg::transpose(r.matrix()), r.matrix()), id);
            assert_eq!(rotation_determinant(&r), int(1));
        }
    }

    #[test]
    fn rotation_preserves_incidence() {
        let cfg = gen_furstenberg(&params(2, 3, int(1))).unwrap();
        let r = RationalRotation::random(2, 9);
        let rot = r.apply_config(&cfg);
        assert_eq!(points_per_line(&cfg), points_per_line(&rot));
        assert_eq!(r.transpose().apply_config(&rot), cfg);
    }

    #[test]
    fn generators_have_requested_shape() {
        let q = random_dense_poly(2, 6, 1);
        assert!(q.degree() <= 6);
        assert_eq!(random_dense_poly(2, 6, 1), q);
        let hs = random_hyperplanes(2, 5, 2);
        assert_eq!(hyperplane_product(2, &hs).degree(), 5);
        let c = disjoint_circles(3);
        assert_eq!(c.degree(), 6);
        assert!(c.evaluate(&[rat(1, 6) + rat(1, 12), rat(1, 2)]).unwrap().is_zero());
    }
}
