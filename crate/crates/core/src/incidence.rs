//! Incidence counting, direction-set density and separation, and r-flat
//! concentration.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configs::RationalRotation;
use crate::error::{Error, Result};
use crate::geom::{from_f64, point_on_line, to_f64, Config, Direction, Line, Rational};
use crate::linalg::{self, Matrix};
use crate::seed::{derive, stream_rng};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub total: u64,
    pub per_line: Vec<(usize, u64)>,
    pub min_per_line: u64,
    pub max_per_line: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncidenceOptions {
    /// Skip pairs whose float distance is clearly nonzero before the exact test.
    pub prefilter: bool,
}

impl Default for IncidenceOptions {
    fn default() -> Self {
        IncidenceOptions { prefilter: true }
    }
}

pub fn count_incidences(cfg: &Config) -> IncidenceReport {
    count_incidences_with(cfg, IncidenceOptions::default())
}

pub fn count_incidences_with(cfg: &Config, opts: IncidenceOptions) -> IncidenceReport {
    let pts_f: Vec<Vec<f64>> = cfg.points.iter().map(|p| p.to_f64()).collect();
    let per_line: Vec<(usize, u64)> = cfg
        .lines
        .par_iter()
        .enumerate()
        .map(|(i, l)| {
            let base = l.base().to_f64();
            let dir = l.dir().to_unit_f64();
            let count = cfg
                .points
                .iter()
                .zip(&pts_f)
                .filter(|(p, pf)| {
                    if opts.prefilter && !near_line(pf, &base, &dir) {
                        return false;
                    }
                    point_on_line(p, l).expect("config dimensions agree")
                })
                .count() as u64;
            (i, count)
        })
        .collect();
    let total = per_line.iter().map(|x| x.1).sum();
    IncidenceReport {
        total,
        min_per_line: per_line.iter().map(|x| x.1).min().unwrap_or(0),
        max_per_line: per_line.iter().map(|x| x.1).max().unwrap_or(0),
        per_line,
    }
}

/// Conservative float test: false only when the point is clearly off the line.
fn near_line(p: &[f64], base: &[f64], dir: &[f64]) -> bool {
    let diff: Vec<f64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
    let along: f64 = diff.iter().zip(dir).map(|(a, b)| a * b).sum();
    let d2: f64 = diff.iter().map(|x| x * x).sum::<f64>() - along * along;
    let scale = 1.0 + p.iter().chain(base).map(|x| x * x).sum::<f64>();
    d2 <= 1e-6 * scale
}

/// Where density probes are drawn from. `frame` lets a rotated copy of a
/// region be expressed exactly: directions are mapped back by `frameᵀ`
/// before any floating-point work.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub kind: RegionKind,
    pub frame: Option<RationalRotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RegionKind {
    FullSphere,
    /// Directions `(1, s)/|(1, s)|` with `s` in the box `[lo, hi]` of
    /// `ℝ^{n-1}`.
    SlopeBox { lo: Vec<f64>, hi: Vec<f64> },
}

impl Region {
    pub fn full_sphere() -> Self {
        Region { kind: RegionKind::FullSphere, frame: None }
    }

    pub fn slope_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Region { kind: RegionKind::SlopeBox { lo, hi }, frame: None }
    }

    pub fn rotated(mut self, r: &RationalRotation) -> Self {
        self.frame = Some(match self.frame {
            Some(f) => r.compose(&f),
            None => r.clone(),
        });
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub epsilon: f64,
    pub region: RegionKind,
    pub probes: usize,
    pub max_gap: f64,
    /// Estimated covering radius of the probe set.
    pub mesh_estimate: f64,
    /// `max_gap + mesh_estimate`: the whole region is within this distance.
    pub certified_radius: f64,
    /// Whether the probe mesh met the `epsilon / 4` requirement.
    pub mesh_ok: bool,
    pub pass: bool,
}

const PRIMES: [u32; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let (mut f, mut r) = (1.0 / b, 0.0);
    while i > 0 {
        r += f * (i % base as u64) as f64;
        i /= base as u64;
        f /= b;
    }
    r
}

/// Halton point with a seeded Cranley–Patterson rotation.
fn halton(i: u64, dims: usize, shift: &[f64]) -> Vec<f64> {
    (0..dims)
        .map(|k| (radical_inverse(i + 1, PRIMES[k]) + shift[k]).fract())
        .collect()
}

fn sphere_probe(h: &[f64], n: usize) -> Vec<f64> {
    if n == 2 {
        let t = 2.0 * PI * h[0];
        return vec![t.cos(), t.sin()];
    }
    if n == 3 {
        let z = 2.0 * h[0] - 1.0;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let t = 2.0 * PI * h[1];
        return vec![r * t.cos(), r * t.sin(), z];
    }
    // Box–Muller on pairs of low-discrepancy coordinates.
    let mut g = Vec::with_capacity(n + 1);
    for pair in h.chunks(2) {
        let r = (-2.0 * (1.0 - pair[0]).max(1e-300).ln()).sqrt();
        let t = 2.0 * PI * pair[1];
        g.push(r * t.cos());
        g.push(r * t.sin());
    }
    g.truncate(n);
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.into_iter().map(|x| x / norm).collect()
}

fn unit_sphere_area(n: usize) -> f64 {
    // |S^{m+2}| = 2π |S^m| / (m + 1)
    let (mut a, mut k) = if n % 2 == 0 { (2.0 * PI, 2) } else { (4.0 * PI, 3) };
    if n == 1 {
        return 2.0;
    }
    while k < n {
        a *= 2.0 * PI / k as f64;
        k += 2;
    }
    a
}

/// Probe-based density check of `dirs` (with both signs) over `region`.
pub fn direction_density(
    dirs: &[Direction],
    epsilon: f64,
    region: &Region,
    probes: usize,
    seed: u64,
) -> Result<DensityReport> {
    if dirs.is_empty() {
        return Err(Error::EmptyDirections);
    }
    if probes < 1000 {
        return Err(Error::BadParams(format!("need at least 1000 probes, got {probes}")));
    }
    let n = dirs[0].dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if let Some(d) = dirs.iter().find(|d| d.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: d.dim() });
    }
    let back = region.frame.as_ref().map(RationalRotation::transpose);
    let units: Vec<Vec<f64>> = dirs
        .iter()
        .map(|d| match &back {
            Some(b) => b.apply_direction(d).to_unit_f64(),
            None => d.to_unit_f64(),
        })
        .collect();

    let (dims, measure) = match &region.kind {
        RegionKind::FullSphere => (if n <= 3 { n - 1 } else { 2 * n.div_ceil(2) }, unit_sphere_area(n)),
        RegionKind::SlopeBox { lo, hi } => {
            if lo.len() != n - 1 || hi.len() != n - 1 {
                return Err(Error::DimensionMismatch { expected: n - 1, got: lo.len() });
            }
            if lo.iter().zip(hi).any(|(a, b)| a > b) {
                return Err(Error::BadParams("slope box has lo > hi".into()));
            }
            // Upper bound on the sector's spherical measure.
            (n - 1, lo.iter().zip(hi).map(|(a, b)| (b - a).max(1e-12)).product())
        }
    };
    let mut rng = stream_rng(seed, "density-shift", 0);
    let shift: Vec<f64> = (0..dims).map(|_| rng.gen()).collect();
    let gaps: Vec<f64> = (0..probes as u64)
        .into_par_iter()
        .map(|i| {
            let h = halton(i, dims, &shift);
            let p = match &region.kind {
                RegionKind::FullSphere => sphere_probe(&h, n),
                RegionKind::SlopeBox { lo, hi } => {
                    let mut v = vec![1.0];
                    v.extend(h.iter().zip(lo.iter().zip(hi)).map(|(t, (a, b))| a + t * (b - a)));
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / norm).collect()
                }
            };
            let best = units
                .iter()
                .map(|u| u.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>().abs())
                .fold(0.0f64, f64::max)
                .min(1.0);
            (2.0 - 2.0 * best).max(0.0).sqrt()
        })
        .collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let mesh = (measure / probes as f64).powf(1.0 / (n - 1) as f64);
    Ok(DensityReport {
        epsilon,
        region: region.kind.clone(),
        probes,
        max_gap,
        mesh_estimate: mesh,
        certified_radius: max_gap + mesh,
        mesh_ok: mesh <= epsilon / 4.0,
        pass: max_gap <= epsilon,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub separated: bool,
    /// First violating pair in index order.
    pub witness: Option<(usize, usize)>,
    pub min_distance: f64,
}

fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// All pairwise sign-identified distances `>= epsilon`, decided exactly via
/// `(u·w)^2 <= κ^2 |u|^2 |w|^2` with `κ = 1 - ε^2/2`.
pub fn direction_separation(dirs: &[Direction], epsilon: f64) -> SeparationReport {
    let eps = from_f64(epsilon);
    let kappa = Rational::from_integer(1.into()) - &eps * &eps / Rational::from_integer(2.into());
    let kappa2 = &kappa * &kappa;
    let norms: Vec<BigInt> = dirs.iter().map(Direction::norm_squared).collect();
    let rows: Vec<(Option<usize>, f64)> = (0..dirs.len())
        .into_par_iter()
        .map(|i| {
            let mut first = None;
            let mut min_c2 = Rational::zero();
            for j in i + 1..dirs.len() {
                let d = dot_int(dirs[i].components(), dirs[j].components());
                let c2 = Rational::new(&d * &d, &norms[i] * &norms[j]);
                let ok = kappa >= Rational::zero() && c2 <= kappa2;
                if !ok && first.is_none() {
                    first = Some(j);
                }
                if c2 > min_c2 {
                    min_c2 = c2;
                }
            }
            let cos = to_f64(&min_c2).sqrt().min(1.0);
            (first, if i + 1 < dirs.len() { (2.0 - 2.0 * cos).max(0.0).sqrt() } else { f64::INFINITY })
        })
        .collect();
    let witness = rows.iter().enumerate().find_map(|(i, r)| r.0.map(|j| (i, j)));
    let min_distance = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    SeparationReport {
        separated: witness.is_none(),
        witness,
        min_distance: if min_distance.is_finite() { min_distance } else { 2f64.sqrt() },
    }
}

/// An affine flat in canonical form: RREF basis of its direction space and
/// the orthogonal foot from the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineFlat {
    pub basis: Matrix,
    pub foot: Vec<Rational>,
}

impl AffineFlat {
    pub fn new(point: &[Rational], spanning: &[Vec<Rational>]) -> Self {
        let basis = linalg::rref(spanning);
        let foot = linalg::orthogonal_residual(&basis, point);
        AffineFlat { basis, foot }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains_line(&self, l: &Line) -> bool {
        let diff: Vec<Rational> = l.base().coords().iter().zip(&self.foot).map(|(a, b)| a - b).collect();
        linalg::in_span(&self.basis, &l.dir().to_rationals()) && linalg::in_span(&self.basis, &diff)
    }

    fn span_of(lines: &[&Line]) -> Self {
        let p0 = lines[0].base().coords();
        let mut spanning = Vec::new();
        for l in lines {
            spanning.push(l.dir().to_rationals());
            spanning.push(l.base().coords().iter().zip(p0).map(|(a, b)| a - b).collect());
        }
        Self::new(p0, &spanning)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatReport {
    pub r: usize,
    pub max_count: usize,
    /// Indices of the lines in the witness flat, ascending.
    pub lines: Vec<usize>,
    /// `(basepoint, spanning directions)` of the witness.
    pub flat: Option<(Vec<String>, Vec<Vec<String>>)>,
    /// `EXACT` or `HEURISTIC`.
    pub flag: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlatOptions {
    /// Maximum number of line tuples examined for `r > 2`.
    pub budget: u128,
    pub seed: u64,
}

impl Default for FlatOptions {
    fn default() -> Self {
        FlatOptions { budget: 200_000, seed: 0 }
    }
}

fn flat_record(f: &AffineFlat) -> (Vec<String>, Vec<Vec<String>>) {
    let s = |v: &[Rational]| v.iter().map(crate::geom::format_rational).collect::<Vec<_>>();
    (s(&f.foot), f.basis.iter().map(|b| s(b)).collect())
}

fn better(count: usize, idx: &[usize], best: &Option<(usize, Vec<usize>, AffineFlat)>) -> bool {
    match best {
        None => true,
        Some((c, i, _)) => count > *c || (count == *c && idx < i.as_slice()),
    }
}

/// Largest number of lines in a common affine `r`-flat.
pub fn max_rflat_concentration(lines: &[Line], r: usize, opts: FlatOptions) -> Result<FlatReport> {
    let n = lines.first().map_or(r + 1, Line::dim);
    if r < 2 || r + 1 > n {
        return Err(Error::BadRank { r, max: n.saturating_sub(1) });
    }
    let (best, exact) = rflat_search(lines, r, opts)?;
    Ok(match best {
        None => FlatReport { r, max_count: 0, lines: vec![], flat: None, flag: "EXACT".into() },
        Some((count, idx, flat)) => FlatReport {
            r,
            max_count: count,
            lines: idx,
            flat: Some(flat_record(&flat)),
            flag: if exact { "EXACT" } else { "HEURISTIC" }.into(),
        },
    })
}

type Best = Option<(usize, Vec<usize>, AffineFlat)>;

fn rflat_search(lines: &[Line], r: usize, opts: FlatOptions) -> Result<(Best, bool)> {
    if lines.is_empty() {
        return Ok((None, true));
    }
    if r == 2 {
        return Ok((planes(lines), true));
    }
    let (lower, mut exact) = rflat_search(lines, r - 1, opts)?;
    let mut best: Best = lower.map(|(c, idx, f)| {
        // Any (r-1)-flat sits inside an r-flat; extend by a missing axis.
        let n = f.foot.len();
        let mut spanning = f.basis.clone();
        for k in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[k] = Rational::from_integer(1.into());
            if !linalg::in_span(&f.basis, &e) {
                spanning.push(e);
                break;
            }
        }
        (c, idx, AffineFlat::new(&f.foot, &spanning))
    });
    let total: u128 = (2..=r).map(|t| binom(lines.len() as u128, t as u128)).sum();
    let candidates: Vec<Vec<usize>> = if total <= opts.budget {
        (2..=r).flat_map(|t| combinations(lines.len(), t)).collect()
    } else {
        exact = false;
        (0..opts.budget as u64)
            .map(|i| {
                let mut rng = stream_rng(derive(opts.seed, "flat-tuple", r as u64), "tuple", i);
                let t = rng.gen_range(2..=r);
                let mut pick: Vec<usize> = Vec::with_capacity(t);
                while pick.len() < t {
                    let k = rng.gen_range(0..lines.len());
                    if !pick.contains(&k) {
                        pick.push(k);
                    }
                }
                pick.sort_unstable();
                pick
            })
            .collect()
    };
    let found: Vec<(usize, Vec<usize>, AffineFlat)> = candidates
        .par_iter()
        .filter_map(|t| {
            let ls: Vec<&Line> = t.iter().map(|&i| &lines[i]).collect();
            let flat = AffineFlat::span_of(&ls);
            if flat.dim() != r {
                return None;
            }
            let idx: Vec<usize> = (0..lines.len()).filter(|&i| flat.contains_line(&lines[i])).collect();
            Some((idx.len(), idx, flat))
        })
        .collect();
    for (c, idx, f) in found {
        if better(c, &idx, &best) {
            best = Some((c, idx, f));
        }
    }
    Ok((best, exact))
}

/// Exact maximum number of coplanar lines, by hashing the plane of every
/// coplanar pair.
fn planes(lines: &[Line]) -> Best {
    let n = lines[0].dim();
    let pairs: Vec<(AffineFlat, usize, usize)> = (0..lines.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..lines.len()).filter_map(move |j| {
                let f = AffineFlat::span_of(&[&lines[i], &lines[j]]);
                (f.dim() == 2).then_some((f, i, j))
            })
        })
        .collect();
    let mut groups: HashMap<AffineFlat, Vec<usize>> = HashMap::new();
    for (f, i, j) in pairs {
        let g = groups.entry(f).or_default();
        g.push(i);
        g.push(j);
    }
    let mut best: Best = None;
    for (f, mut idx) in groups {
        idx.sort_unstable();
        idx.dedup();
        if better(idx.len(), &idx, &best) {
            best = Some((idx.len(), idx, f));
        }
    }
    best.or_else(|| {
        // No coplanar pair: any plane through the first line holds one line.
        let l = &lines[0];
        let d = l.dir().to_rationals();
        let basis = linalg::rref(&[d.clone()]);
        let e = (0..n)
            .map(|k| {
                let mut e = vec![Rational::zero(); n];
                e[k] = Rational::from_integer(1.into());
                e
            })
            .find(|e| !linalg::in_span(&basis, e))
            .expect("n >= 2");
        Some((1, vec![0], AffineFlat::new(l.base().coords(), &[d, e])))
    })
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
