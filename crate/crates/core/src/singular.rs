//! Scanning for singular directions: lines of a fixed direction that meet
//! many small cubes roughly bisected by a polynomial, plus the hairbrush
//! direction count in three dimensions.
//!
//! Candidate lines come from a base grid of spacing `s` on `v^⊥`. A line
//! meeting `k` cubes has a grid neighbour meeting at least `k / 3^n`, so a
//! result between the slack threshold and the literal one is reported as
//! ambiguous rather than rounded either way.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configs::Hyperplane;
use crate::error::{Error, Result};
use crate::polyzero::{perp_frame, sign, unravel, zero_cells, FloatPoly, MultiPoly};
use crate::seed::stream_rng;

const MAX_CUBES_PER_AXIS: usize = 10_000;
const MAX_CUBES: usize = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    #[serde(rename = "N")]
    pub n_param: usize,
    pub epsilon: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub bisect_fraction: f64,
    pub samples_per_cube: usize,
    pub seed: u64,
}

impl ScanParams {
    pub fn new(n_param: usize, epsilon: f64, h: f64) -> Self {
        ScanParams {
            n_param,
            epsilon,
            h,
            bisect_fraction: 0.1,
            samples_per_cube: 200,
            seed: 0,
        }
    }

    /// Cubes per axis, `⌈N^{1+ε}⌉`.
    pub fn cubes_per_axis(&self) -> Result<usize> {
        if self.n_param < 1 || !(self.epsilon >= 0.0) || !(self.h > 0.0) {
            return Err(Error::BadParams("need N >= 1, epsilon >= 0, H > 0".into()));
        }
        if !(self.bisect_fraction > 0.0 && self.bisect_fraction <= 0.5) {
            return Err(Error::BadParams(format!("bisect fraction {} outside (0, 1/2]", self.bisect_fraction)));
        }
        if self.samples_per_cube < 100 {
            return Err(Error::BadParams("need at least 100 samples per cube".into()));
        }
        let k = ((self.n_param as f64).powf(1.0 + self.epsilon) - 1e-9).ceil() as usize;
        if k > MAX_CUBES_PER_AXIS {
            return Err(Error::BudgetExceeded { needed: k as u128, budget: MAX_CUBES_PER_AXIS as u128 });
        }
        Ok(k.max(1))
    }

    /// Literal threshold `N^{1+ε} / H`.
    pub fn threshold(&self) -> f64 {
        (self.n_param as f64).powf(1.0 + self.epsilon) / self.h
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionEstimate {
    pub positive: f64,
    pub negative: f64,
    pub bisected: bool,
    /// 95% binomial confidence radius of each fraction.
    pub radius: f64,
}

fn estimate(qf: &FloatPoly, lo: &[f64], side: f64, samples: usize, fraction: f64, seed: u64, index: u64) -> BisectionEstimate {
    let mut rng = stream_rng(seed, "cube", index);
    let (mut pos, mut neg) = (0usize, 0usize);
    let mut x = vec![0.0; lo.len()];
    for _ in 0..samples {
        for (xi, l) in x.iter_mut().zip(lo) {
            *xi = l + side * rng.gen::<f64>();
        }
        match sign(qf.eval(&x)) {
            1 => pos += 1,
            -1 => neg += 1,
            _ => {}
        }
    }
    let (p, m) = (pos as f64 / samples as f64, neg as f64 / samples as f64);
    BisectionEstimate {
        positive: p,
        negative: m,
        bisected: p.min(m) >= fraction,
        radius: 1.96 * (0.25 / samples as f64).sqrt(),
    }
}

/// Monte Carlo sign fractions of `q` over the cube `lo + [0, side]^n`.
pub fn is_bisected_cube(q: &MultiPoly, lo: &[f64], side: f64, samples: usize, fraction: f64, seed: u64) -> Result<BisectionEstimate> {
    if samples < 100 {
        return Err(Error::BadParams("need at least 100 samples".into()));
    }
    if lo.len() != q.n_vars() {
        return Err(Error::DimensionMismatch { expected: q.n_vars(), got: lo.len() });
    }
    Ok(estimate(&q.to_float(), lo, side, samples, fraction, seed, 0))
}

/// Visits every cube of the `k^n` grid met by `p + t u`, in order.
pub fn traverse(p: &[f64], u: &[f64], k: usize, mut visit: impl FnMut(usize)) {
    let n = p.len();
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        if u[i].abs() < 1e-15 {
            if p[i] < 0.0 || p[i] > 1.0 {
                return;
            }
            continue;
        }
        let (a, b) = (-p[i] / u[i], (1.0 - p[i]) / u[i]);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    if !(t0 < t1) {
        return;
    }
    let kf = k as f64;
    let start = t0 + 1e-12 * (t1 - t0);
    let mut idx = vec![0i64; n];
    let mut t_max = vec![f64::INFINITY; n];
    let mut t_delta = vec![f64::INFINITY; n];
    let mut step = vec![0i64; n];
    for i in 0..n {
        let x = p[i] + start * u[i];
        idx[i] = ((x * kf).floor() as i64).clamp(0, k as i64 - 1);
        if u[i] > 1e-15 {
            step[i] = 1;
            t_max[i] = ((idx[i] + 1) as f64 / kf - p[i]) / u[i];
            t_delta[i] = 1.0 / (kf * u[i]);
        } else if u[i] < -1e-15 {
            step[i] = -1;
            t_max[i] = (idx[i] as f64 / kf - p[i]) / u[i];
            t_delta[i] = -1.0 / (kf * u[i]);
        }
    }
    let strides: Vec<usize> = (0..n).map(|i| k.pow((n - 1 - i) as u32)).collect();
    loop {
        visit(idx.iter().zip(&strides).map(|(&a, s)| a as usize * s).sum());
        let axis = (0..n).min_by(|&a, &b| t_max[a].total_cmp(&t_max[b])).unwrap();
        if t_max[axis] >= t1 {
            return;
        }
        idx[axis] += step[axis];
        if idx[axis] < 0 || idx[axis] >= k as i64 {
            return;
        }
        t_max[axis] += t_delta[axis];
    }
}

/// Base points of the candidate lines with direction `v`: a grid of spacing
/// `spacing` over the projection of `I^n` onto `v^⊥`.
pub fn base_grid(v: &[f64], spacing: f64) -> Vec<Vec<f64>> {
    let n = v.len();
    let frame = perp_frame(v);
    let window: Vec<(f64, f64, usize)> = frame
        .iter()
        .map(|f| {
            let lo: f64 = f.iter().map(|x| x.min(0.0)).sum();
            let hi: f64 = f.iter().map(|x| x.max(0.0)).sum();
            (lo, hi, ((hi - lo) / spacing - 1e-9).ceil().max(1.0) as usize)
        })
        .collect();
    let total: usize = window.iter().map(|w| w.2).product();
    (0..total)
        .map(|mut k| {
            let mut p = vec![0.0; n];
            for (f, &(lo, _, count)) in frame.iter().zip(&window).rev() {
                let y = lo + ((k % count) as f64 + 0.5) * spacing;
                k /= count;
                for (pi, fi) in p.iter_mut().zip(f) {
                    *pi += y * fi;
                }
            }
            p
        })
        .collect()
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionResult {
    pub direction: Vec<f64>,
    pub best_line: Vec<f64>,
    pub bisected_count: usize,
    pub singular: bool,
    /// Best count lies between the slack and literal thresholds.
    pub ambiguous: bool,
    /// `Σ_i min{1/(π/2 - θ_i), K}` over the hyperplanes, when known.
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub n: usize,
    pub params: ScanParams,
    pub cubes_per_axis: usize,
    pub bisected_cubes: usize,
    pub threshold: f64,
    pub slack_threshold: f64,
    pub sampled_directions: usize,
    pub singular_count: usize,
    pub ambiguous_count: usize,
    pub directions: Vec<DirectionResult>,
    pub flags: Vec<String>,
}

/// Precomputed bisection status of every cube.
pub struct Scanner {
    params: ScanParams,
    n: usize,
    k: usize,
    bisected: Vec<bool>,
    flags: Vec<String>,
}

impl Scanner {
    pub fn new(q: &MultiPoly, params: &ScanParams) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let k = params.cubes_per_axis()?;
        let n = q.n_vars();
        let total = k.checked_pow(n as u32).unwrap_or(usize::MAX);
        if total > MAX_CUBES {
            return Err(Error::BudgetExceeded { needed: total as u128, budget: MAX_CUBES as u128 });
        }
        let mut flags = vec!["GRID_SLACK".to_string()];
        if q.degree() as usize > params.n_param {
            flags.push("DEGREE_ABOVE_N".into());
        }
        let qf = q.to_float();
        let side = 1.0 / k as f64;
        let bisected = if q.degree() == 0 {
            vec![false; total]
        } else {
            (0..total)
                .into_par_iter()
                .map(|c| {
                    let lo: Vec<f64> = unravel(c, k, n).into_iter().map(|i| i as f64 * side).collect();
                    estimate(&qf, &lo, side, params.samples_per_cube, params.bisect_fraction, params.seed, c as u64).bisected
                })
                .collect()
        };
        Ok(Scanner { params: params.clone(), n, k, bisected, flags })
    }

    pub fn cubes_per_axis(&self) -> usize {
        self.k
    }

    pub fn is_bisected(&self, cube: usize) -> bool {
        self.bisected[cube]
    }

    /// Bisected cubes met by `base + t v`.
    pub fn count_along(&self, base: &[f64], v: &[f64]) -> usize {
        let mut count = 0;
        traverse(base, v, self.k, |c| count += usize::from(self.bisected[c]));
        count
    }

    pub fn test_direction(&self, v: &[f64]) -> Result<DirectionResult> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        let u = normalize(v);
        let thr = self.params.threshold();
        let slack = thr / 3f64.powi(self.n as i32);
        let (mut best, mut best_line) = (0usize, Vec::new());
        for b in base_grid(&u, 1.0 / self.k as f64) {
            let c = self.count_along(&b, &u);
            if c > best || best_line.is_empty() {
                best = c;
                best_line = b;
            }
        }
        let singular = best as f64 >= thr;
        Ok(DirectionResult {
            direction: u,
            best_line,
            bisected_count: best,
            singular,
            ambiguous: !singular && best as f64 >= slack,
            reference: None,
        })
    }

    pub fn scan(&self, dirs: &[Vec<f64>]) -> Result<ScanReport> {
        let results: Vec<DirectionResult> = dirs.par_iter().map(|v| self.test_direction(v)).collect::<Result<_>>()?;
        let thr = self.params.threshold();
        Ok(ScanReport {
            n: self.n,
            params: self.params.clone(),
            cubes_per_axis: self.k,
            bisected_cubes: self.bisected.iter().filter(|&&b| b).count(),
            threshold: thr,
            slack_threshold: thr / 3f64.powi(self.n as i32),
            sampled_directions: results.len(),
            singular_count: results.iter().filter(|r| r.singular).count(),
            ambiguous_count: results.iter().filter(|r| r.ambiguous).count(),
            directions: results,
            flags: self.flags.clone(),
        })
    }
}

pub fn singular_direction_test(q: &MultiPoly, params: &ScanParams, v: &[f64]) -> Result<DirectionResult> {
    Scanner::new(q, params)?.test_direction(v)
}

pub fn singular_scan(q: &MultiPoly, params: &ScanParams, dirs: &[Vec<f64>]) -> Result<ScanReport> {
    Scanner::new(q, params)?.scan(dirs)
}

/// Scan of a product of hyperplanes, with the per-direction reference
/// column `Σ_i min{1/(π/2 - θ_i), K}` (`θ_i` the angle between `±n_i` and
/// `±v`).
pub fn singular_scan_hyperplanes(planes: &[Hyperplane], params: &ScanParams, dirs: &[Vec<f64>]) -> Result<ScanReport> {
    let n = planes.first().map_or(2, |h| h.normal.len());
    let q = crate::configs::hyperplane_product(n, planes);
    let mut report = singular_scan(&q, params, dirs)?;
    for r in report.directions.iter_mut() {
        r.reference = Some(crossing_reference(planes, &r.direction, report.cubes_per_axis));
    }
    Ok(report)
}

pub fn crossing_reference(planes: &[Hyperplane], v: &[f64], k: usize) -> f64 {
    let u = normalize(v);
    planes
        .iter()
        .map(|h| {
            let c: f64 = h.unit_normal().iter().zip(&u).map(|(a, b)| a * b).sum::<f64>().abs().min(1.0);
            let gap = c.asin();
            if gap > 0.0 { (1.0 / gap).min(k as f64) } else { k as f64 }
        })
        .sum()
}

/// Uniform direction sample modulo sign: equally spaced angles on a half
/// circle for `n = 2`, a Fibonacci lattice on the upper hemisphere for
/// `n = 3`.
pub fn sample_directions(n: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    match n {
        2 => Ok((0..count)
            .map(|j| {
                let t = std::f64::consts::PI * (j as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|i| {
                    let z = (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// Greedy subset with pairwise sign-identified distance `>= sep`.
pub fn separated_subset(dirs: &[Vec<f64>], sep: f64) -> Vec<Vec<f64>> {
    let max_cos = 1.0 - sep * sep / 2.0;
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for d in dirs {
        let u = normalize(d);
        if kept.iter().all(|k| k.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>().abs() <= max_cos) {
            kept.push(u);
        }
    }
    kept
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub direction: Vec<f64>,
    pub base: Vec<f64>,
    /// Bisected cubes met, from the Monte Carlo classification.
    pub traversal: usize,
    /// Same count with exact area fractions.
    pub exact: usize,
    /// Cubes on the path whose exact fraction is within four standard
    /// errors of the bisection threshold.
    pub borderline: usize,
    /// `Σ_i` cubes on the path bisected by hyperplane `i` alone.
    pub per_plane_exact: usize,
    pub reference: f64,
}

impl SpotCheck {
    pub fn agrees(&self) -> bool {
        self.traversal.abs_diff(self.exact) <= self.borderline
    }
}

type Polygon = Vec<[f64; 2]>;

fn clip(poly: &Polygon, a: &[f64], c: f64, keep_positive: bool) -> Polygon {
    let f = |p: &[f64; 2]| {
        let v = a[0] * p[0] + a[1] * p[1] - c;
        if keep_positive { v } else { -v }
    };
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(&p), f(&q));
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn area(poly: &Polygon) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    s.abs() / 2.0
}

/// Exact positive-area fraction of a product of lines over a square.
fn exact_fraction(planes: &[(Vec<f64>, f64)], lo: [f64; 2], side: f64) -> f64 {
    let square: Polygon = vec![lo, [lo[0] + side, lo[1]], [lo[0] + side, lo[1] + side], [lo[0], lo[1] + side]];
    let mut pieces = vec![square];
    for (a, c) in planes {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for p in pieces {
            let vals: Vec<f64> = p.iter().map(|v| a[0] * v[0] + a[1] * v[1] - c).collect();
            if vals.iter().all(|&x| x >= 0.0) || vals.iter().all(|&x| x <= 0.0) {
                next.push(p);
                continue;
            }
            for side in [true, false] {
                let q = clip(&p, a, *c, side);
                if q.len() >= 3 {
                    next.push(q);
                }
            }
        }
        pieces = next;
    }
    let mut positive = 0.0;
    for p in &pieces {
        let k = p.len() as f64;
        let cx = p.iter().map(|v| v[0]).sum::<f64>() / k;
        let cy = p.iter().map(|v| v[1]).sum::<f64>() / k;
        let s: f64 = planes.iter().map(|(a, c)| (a[0] * cx + a[1] * cy - c).signum()).product();
        if s > 0.0 {
            positive += area(p);
        }
    }
    positive / (side * side)
}

/// Compares the Monte Carlo traversal count of one line with the count
/// obtained from exact area fractions (planar hyperplane products only).
pub fn spot_check(scanner: &Scanner, planes: &[Hyperplane], v: &[f64], base: &[f64]) -> Result<SpotCheck> {
    if scanner.n != 2 {
        return Err(Error::UnsupportedDimension(scanner.n));
    }
    let u = normalize(v);
    let k = scanner.k;
    let side = 1.0 / k as f64;
    let f = scanner.params.bisect_fraction;
    let sigma = (f * (1.0 - f) / scanner.params.samples_per_cube as f64).sqrt();
    let lines: Vec<(Vec<f64>, f64)> = planes
        .iter()
        .map(|h| (h.normal.iter().map(|&a| a as f64).collect(), crate::geom::to_f64(&h.offset)))
        .collect();
    let (mut traversal, mut exact, mut borderline, mut per_plane) = (0, 0, 0, 0);
    traverse(base, &u, k, |c| {
        let idx = unravel(c, k, 2);
        let lo = [idx[0] as f64 * side, idx[1] as f64 * side];
        traversal += usize::from(scanner.bisected[c]);
        let p = exact_fraction(&lines, lo, side);
        let m = p.min(1.0 - p);
        exact += usize::from(m >= f);
        borderline += usize::from((m - f).abs() <= 4.0 * sigma);
        for l in &lines {
            let p = exact_fraction(std::slice::from_ref(l), lo, side);
            per_plane += usize::from(p.min(1.0 - p) >= f);
        }
    });
    Ok(SpotCheck {
        direction: u.clone(),
        base: base.to_vec(),
        traversal,
        exact,
        borderline,
        per_plane_exact: per_plane,
        reference: crossing_reference(planes, &u, k),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HairbrushReport {
    #[serde(rename = "N")]
    pub n_param: usize,
    #[serde(rename = "D")]
    pub degree: u32,
    pub c: f64,
    pub directions_tested: usize,
    pub count: usize,
    pub bound: f64,
    pub flags: Vec<String>,
}

/// Number of directions in a `1/N`-separated sample admitting a line that
/// meets at least `c N` side-`1/N` cubes containing a detected zero.
pub fn hairbrush_direction_count(q: &MultiPoly, n_param: usize, degree: u32, c: f64) -> Result<HairbrushReport> {
    let n = q.n_vars();
    if n != 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if n_param < 2 {
        return Err(Error::BadParams("hairbrush needs N >= 2".into()));
    }
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut flags = vec!["SIGN_BLIND".to_string()];
    if q.degree() > degree {
        flags.push("DEGREE_ABOVE_D".into());
    }
    let nf = n_param as f64;
    let bound = 50.0 * (degree as f64).powi(2) * nf * nf.ln().powi(2);
    let zero = if q.degree() == 0 {
        vec![false; n_param.pow(3)]
    } else {
        zero_cells(&q.to_float().grid_values(n_param), n_param, 3)
    };
    let dirs = separated_subset(&sample_directions(3, 2 * n_param * n_param)?, 1.0 / nf);
    let need = (c * nf).ceil() as usize;
    let count = if zero.iter().any(|&z| z) {
        dirs.par_iter()
            .filter(|v| {
                base_grid(v, 1.0 / nf).iter().any(|b| {
                    let mut hits = 0;
                    traverse(b, v, n_param, |cell| hits += usize::from(zero[cell]));
                    hits >= need
                })
            })
            .count()
    } else {
        0
    };
    Ok(HairbrushReport {
        n_param,
        degree,
        c,
        directions_tested: dirs.len(),
        count,
        bound,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{int, rat};

    fn slab(c: crate::geom::Rational) -> MultiPoly {
        MultiPoly::linear(&[int(1), int(0)], -c)
    }

    #[test]
    fn bisection_examples() {
        let half = is_bisected_cube(&slab(rat(1, 2)), &[0.0, 0.0], 1.0, 2000, 0.1, 1).unwrap();
        assert!(half.bisected && (half.positive - 0.5).abs() < 3.0 * half.radius);
        let edge = is_bisected_cube(&slab(rat(1, 100)), &[0.0, 0.0], 1.0, 2000, 0.1, 1).unwrap();
        assert!(!edge.bisected && edge.negative < 0.05);
        let diag = MultiPoly::linear(&[int(1), int(1)], int(-1));
        assert!(is_bisected_cube(&diag, &[0.0, 0.0], 1.0, 2000, 0.1, 1).unwrap().bisected);
    }

    #[test]
    fn traversal_visits_expected_cells() {
        let mut seen = Vec::new();
        traverse(&[0.5, 0.0], &[0.0, 1.0], 4, |c| seen.push(c));
        assert_eq!(seen, vec![8, 9, 10, 11]);
        let mut diag = Vec::new();
        traverse(&[0.05, 0.0], &normalize(&[1.0, 1.0]), 4, |c| diag.push(c));
        assert_eq!(diag.first(), Some(&0));
        assert!(diag.len() >= 4 && diag.len() <= 7);
    }

    fn params() -> ScanParams {
        ScanParams { samples_per_cube: 200, ..ScanParams::new(13, 0.0, 1.0) }
    }

    #[test]
    fn slab_directions() {
        let q = slab(rat(1, 2));
        let s = Scanner::new(&q, &params()).unwrap();
        let e2 = s.test_direction(&[0.0, 1.0]).unwrap();
        assert!(e2.singular);
        assert_eq!(e2.bisected_count, 13);
        let e1 = s.test_direction(&[1.0, 0.0]).unwrap();
        assert!(!e1.singular && e1.bisected_count <= 1);
        let report = s.scan(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(report.singular_count, 1);
    }

    #[test]
    fn constant_has_no_singular_direction() {
        let q = MultiPoly::constant(2, int(1));
        let r = singular_scan(&q, &params(), &sample_directions(2, 8).unwrap()).unwrap();
        assert_eq!(r.singular_count, 0);
    }

    #[test]
    fn monotone_in_h_and_fraction() {
        let q = crate::configs::hyperplane_product(2, &crate::configs::random_hyperplanes(2, 4, 3));
        let dirs = sample_directions(2, 12).unwrap();
        let base = ScanParams { samples_per_cube: 100, ..ScanParams::new(16, 0.1, 4.0) };
        let a = singular_scan(&q, &base, &dirs).unwrap();
        let b = singular_scan(&q, &ScanParams { h: 8.0, ..base.clone() }, &dirs).unwrap();
        let c = singular_scan(&q, &ScanParams { bisect_fraction: 0.05, ..base.clone() }, &dirs).unwrap();
        for i in 0..dirs.len() {
            assert!(!a.directions[i].singular || b.directions[i].singular);
            assert!(!a.directions[i].singular || c.directions[i].singular);
        }
    }

    #[test]
    fn exact_fraction_of_halves() {
        let l = vec![(vec![1.0, 0.0], 0.5)];
        assert!((exact_fraction(&l, [0.0, 0.0], 1.0) - 0.5).abs() < 1e-12);
        let two = vec![(vec![1.0, 0.0], 0.5), (vec![0.0, 1.0], 0.5)];
        assert!((exact_fraction(&two, [0.0, 0.0], 1.0) - 0.5).abs() < 1e-12);
        let d = vec![(vec![1.0, 1.0], 0.5)];
        assert!((exact_fraction(&d, [0.0, 0.0], 1.0) - 0.875).abs() < 1e-12);
    }

    #[test]
    fn hairbrush_small_cases() {
        let one = MultiPoly::constant(3, int(1));
        assert_eq!(hairbrush_direction_count(&one, 8, 1, 0.5).unwrap().count, 0);
        let q = MultiPoly::linear(&[int(1), int(0), int(0)], rat(-1, 2));
        let r = hairbrush_direction_count(&q, 8, 1, 0.5).unwrap();
        assert!(r.count > 0 && (r.count as f64) <= r.bound);
        assert!(matches!(hairbrush_direction_count(&slab(rat(1, 2)), 8, 1, 0.5), Err(Error::UnsupportedDimension(2))));
    }
}
