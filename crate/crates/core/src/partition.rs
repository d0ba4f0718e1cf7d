//! Polynomial partitioning by iterated simultaneous bisection.
//!
//! Stage `j` looks for one polynomial whose sign splits every current cell
//! into halves differing by at most one point. Candidates come from a
//! least-norm fixed-point iteration on the median conditions, are rounded to
//! dyadic coefficients and then checked with exact arithmetic. Cells are
//! sign-pattern classes of the accepted factors.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dyadic, to_f64, Line, Point, Rational};
use crate::polyzero::MultiPoly;
use crate::seed::stream_rng;

const COEFF_BITS: u32 = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionOptions {
    /// Total degree budget `D`.
    pub degree: u32,
    /// Slack `τ` in the cell bound `τ |P| / D^n`.
    pub slack: f64,
    /// Fixed-point iterations allowed per stage.
    pub effort: usize,
    pub seed: u64,
}

impl PartitionOptions {
    pub fn new(degree: u32) -> Self {
        PartitionOptions {
            degree,
            slack: 4.0,
            effort: 4000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub n: usize,
    pub degree_budget: u32,
    pub slack: f64,
    #[serde(with = "poly_text")]
    pub factors: Vec<MultiPoly>,
    pub product_degree: u32,
    /// Sign pattern (one `+`/`-` per factor) to point count.
    pub histogram: BTreeMap<String, usize>,
    pub wall_count: usize,
    pub max_cell: usize,
    pub bound: f64,
    pub verified: bool,
    pub seed: u64,
}

mod poly_text {
    use super::MultiPoly;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[MultiPoly], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(MultiPoly::to_text))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<MultiPoly>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| MultiPoly::parse(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl Partition {
    pub fn product(&self) -> MultiPoly {
        MultiPoly::product(self.n, &self.factors)
    }

    pub fn nonempty_cells(&self) -> usize {
        self.histogram.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellAssignment {
    Signs(Vec<i8>),
    Wall,
}

fn exact_sign(q: &Rational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

fn pattern(signs: &[i8]) -> String {
    signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn cell_of_point(part: &Partition, p: &Point) -> Result<CellAssignment> {
    let mut signs = Vec::with_capacity(part.factors.len());
    for f in &part.factors {
        let s = exact_sign(&f.evaluate(p.coords())?);
        if s == 0 {
            return Ok(CellAssignment::Wall);
        }
        signs.push(s);
    }
    Ok(CellAssignment::Signs(signs))
}

/// Exact certificate for an explicit factor list: histogram, walls and the
/// cell bound check.
pub fn verify_partition(points: &[Point], factors: Vec<MultiPoly>, opts: &PartitionOptions) -> Result<Partition> {
    let n = factors
        .first()
        .map(MultiPoly::n_vars)
        .or_else(|| points.first().map(Point::dim))
        .unwrap_or(0);
    let product_degree = factors.iter().map(MultiPoly::degree).sum();
    let mut part = Partition {
        n,
        degree_budget: opts.degree,
        slack: opts.slack,
        factors,
        product_degree,
        histogram: BTreeMap::new(),
        wall_count: 0,
        max_cell: 0,
        bound: opts.slack * points.len() as f64 / (opts.degree as f64).powi(n as i32),
        verified: false,
        seed: opts.seed,
    };
    let cells: Vec<CellAssignment> = points
        .par_iter()
        .map(|p| cell_of_point(&part, p))
        .collect::<Result<_>>()?;
    for c in cells {
        match c {
            CellAssignment::Wall => part.wall_count += 1,
            CellAssignment::Signs(s) => *part.histogram.entry(pattern(&s)).or_default() += 1,
        }
    }
    part.max_cell = part.histogram.values().copied().max().unwrap_or(0);
    part.verified = product_degree <= opts.degree && part.max_cell as f64 <= part.bound;
    Ok(part)
}

fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Smallest degree whose monomial space (minus constants) has room for a
/// simultaneous bisector of `subsets` sets.
fn stage_degree(n: usize, subsets: usize) -> u32 {
    (1..).find(|&d| binom(n as u64 + d as u64, n as u64) - 1 >= subsets as u64).unwrap()
}

struct Stage<'a> {
    feats: &'a [Vec<f64>],
    subsets: &'a [Vec<usize>],
}

impl Stage<'_> {
    fn score(&self, c: &[f64]) -> usize {
        self.subsets
            .iter()
            .map(|s| {
                let (mut neg, mut pos, mut zero) = (0usize, 0usize, 0usize);
                for &i in s {
                    let v: f64 = self.feats[i].iter().zip(c).map(|(a, b)| a * b).sum();
                    if v < 0.0 {
                        neg += 1;
                    } else if v > 0.0 {
                        pos += 1;
                    } else {
                        zero += 1;
                    }
                }
                neg.abs_diff(pos).saturating_sub(1) + zero
            })
            .sum()
    }

    /// One least-norm step toward `c · (φ(a_i) + φ(b_i)) = 0` for the middle
    /// pair `(a_i, b_i)` of every subset.
    fn step(&self, c: &[f64]) -> Vec<f64> {
        let dim = c.len();
        let rows: Vec<Vec<f64>> = self
            .subsets
            .iter()
            .filter(|s| s.len() >= 2)
            .map(|s| {
                let mut vals: Vec<(f64, usize)> = s
                    .iter()
                    .map(|&i| (self.feats[i].iter().zip(c).map(|(a, b)| a * b).sum(), i))
                    .collect();
                vals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let k = (s.len() + 1) / 2;
                let (a, b) = (vals[k - 1].1, vals[k].1);
                let w: Vec<f64> = self.feats[a].iter().zip(&self.feats[b]).map(|(x, y)| x + y).collect();
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                w.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let m = rows.len();
        let w = DMatrix::from_fn(m, dim, |i, j| rows[i][j]);
        let cv = DVector::from_column_slice(c);
        let gram = &w * w.transpose() + DMatrix::identity(m, m) * 1e-12;
        let rhs = &w * &cv;
        let y = gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(m));
        let next = cv - w.transpose() * y;
        let norm = next.norm();
        if norm < 1e-12 {
            return c.to_vec();
        }
        (next / norm).iter().copied().collect()
    }
}

fn features(u: &[f64], monos: &[Vec<u32>]) -> Vec<f64> {
    monos
        .iter()
        .map(|e| e.iter().zip(u).map(|(&k, &x)| x.powi(k as i32)).product())
        .collect()
}

/// Builds a partition whose cells hold at most `τ |P| / D^n` points, or
/// fails with the best certificate found.
pub fn build_partition(points: &[Point], opts: &PartitionOptions) -> Result<Partition> {
    if opts.degree < 1 {
        return Err(Error::BadParams("partition degree must be >= 1".into()));
    }
    if !(opts.slack >= 1.0) {
        return Err(Error::BadParams(format!("slack must be >= 1, got {}", opts.slack)));
    }
    let n = match points.first() {
        Some(p) => p.dim(),
        None => return verify_partition(points, Vec::new(), opts),
    };
    if n == 0 || n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if let Some(p) = points.iter().find(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
    }

    // Affine map of the bounding box onto [-1, 1]^n, exact.
    let two = Rational::from_integer(2.into());
    let mut scale = Vec::with_capacity(n);
    let mut shift = Vec::with_capacity(n);
    for i in 0..n {
        let lo = points.iter().map(|p| &p.coords()[i]).min().unwrap().clone();
        let hi = points.iter().map(|p| &p.coords()[i]).max().unwrap().clone();
        let width = &hi - &lo;
        if width.is_zero() {
            scale.push(Rational::one());
            shift.push(-lo);
        } else {
            scale.push(&two / &width);
            shift.push(-(&hi + &lo) / &width);
        }
    }
    let to_u: Vec<MultiPoly> = (0..n)
        .map(|i| {
            let mut coeffs = vec![Rational::zero(); n];
            coeffs[i] = scale[i].clone();
            MultiPoly::linear(&coeffs, shift[i].clone())
        })
        .collect();
    let u_exact: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| p.coords().iter().zip(&scale).zip(&shift).map(|((x, a), b)| x * a + b).collect())
        .collect();
    let u_float: Vec<Vec<f64>> = u_exact.iter().map(|u| u.iter().map(to_f64).collect()).collect();

    let mut subsets: Vec<Vec<usize>> = vec![(0..points.len()).collect()];
    let mut factors = Vec::new();
    let mut used = 0u32;
    for stage in 0u64.. {
        let splittable = subsets.iter().filter(|s| s.len() >= 2).count();
        if splittable == 0 {
            break;
        }
        let d = stage_degree(n, splittable);
        if used + d > opts.degree {
            break;
        }
        let monos = monomials(n, d);
        let feats: Vec<Vec<f64>> = u_float.iter().map(|u| features(u, &monos)).collect();
        let st = Stage { feats: &feats, subsets: &subsets };
        let (coeffs, _) = search_bisector(&st, &monos, &u_exact, opts, stage);
        let poly_u = MultiPoly::from_terms(n, monos.iter().cloned().zip(coeffs));
        // Refine cells by exact sign; exact zeros become walls.
        subsets = split_exact(&poly_u, &u_exact, &subsets);
        factors.push(poly_u.compose(&to_u)?);
        used += d;
    }

    let part = verify_partition(points, factors, opts)?;
    if part.verified {
        Ok(part)
    } else {
        Err(Error::PartitionNotAchieved {
            max_cell: part.max_cell,
            bound: part.bound,
            best: Box::new(part),
        })
    }
}

fn split_exact(poly_u: &MultiPoly, u_exact: &[Vec<Rational>], subsets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    subsets
        .par_iter()
        .flat_map_iter(|s| {
            let (mut neg, mut pos) = (Vec::new(), Vec::new());
            for &i in s {
                match exact_sign(&poly_u.evaluate(&u_exact[i]).expect("dimension checked")) {
                    1 => pos.push(i),
                    -1 => neg.push(i),
                    _ => {}
                }
            }
            [neg, pos]
        })
        .filter(|s| !s.is_empty())
        .collect()
}

fn exact_discrepancy(poly_u: &MultiPoly, u_exact: &[Vec<Rational>], subsets: &[Vec<usize>]) -> usize {
    subsets
        .par_iter()
        .map(|s| {
            let (mut neg, mut pos, mut zero) = (0usize, 0usize, 0usize);
            for &i in s {
                match exact_sign(&poly_u.evaluate(&u_exact[i]).expect("dimension checked")) {
                    1 => pos += 1,
                    -1 => neg += 1,
                    _ => zero += 1,
                }
            }
            neg.abs_diff(pos).saturating_sub(1) + zero
        })
        .sum()
}

fn round(c: &[f64]) -> Vec<Rational> {
    let m = c.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    c.iter().map(|x| dyadic(x / m, COEFF_BITS)).collect()
}

/// Returns dyadic coefficients and their exact discrepancy (0 on success).
fn search_bisector(
    st: &Stage<'_>,
    monos: &[Vec<u32>],
    u_exact: &[Vec<Rational>],
    opts: &PartitionOptions,
    stage: u64,
) -> (Vec<Rational>, usize) {
    let n = u_exact.first().map_or(0, Vec::len);
    let mut rng = stream_rng(opts.seed, "partition-stage", stage);
    let dim = monos.len();
    let mut c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut best: Option<(Vec<Rational>, usize)> = None;
    let mut best_float = usize::MAX;
    let mut stall = 0;
    for _ in 0..opts.effort.max(1) {
        c = st.step(&c);
        let s = st.score(&c);
        if s == 0 {
            let r = round(&c);
            let poly = MultiPoly::from_terms(n, monos.iter().cloned().zip(r.iter().cloned()));
            let exact = exact_discrepancy(&poly, u_exact, st.subsets);
            if best.as_ref().map_or(true, |b| exact < b.1) {
                best = Some((r, exact));
            }
            if exact == 0 {
                break;
            }
        }
        if s < best_float {
            best_float = s;
            stall = 0;
            if best.is_none() || s < best.as_ref().unwrap().1 {
                let r = round(&c);
                let poly = MultiPoly::from_terms(n, monos.iter().cloned().zip(r.iter().cloned()));
                let exact = exact_discrepancy(&poly, u_exact, st.subsets);
                if best.as_ref().map_or(true, |b| exact < b.1) {
                    best = Some((r, exact));
                }
            }
        } else {
            stall += 1;
            if stall > 25 {
                for x in c.iter_mut() {
                    *x += rng.gen_range(-0.2..0.2);
                }
                stall = 0;
            }
        }
    }
    best.unwrap_or_else(|| (round(&c), usize::MAX))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCrossings {
    pub root_count: usize,
    pub cells_entered: usize,
    pub contained: bool,
}

/// Distinct zeros of the partitioning polynomial on `base + t dir`,
/// `t ∈ [lo, hi]`. A line inside the zero set reports `contained` and no
/// cells.
pub fn line_cell_crossings(part: &Partition, l: &Line, segment: (&Rational, &Rational)) -> Result<LineCrossings> {
    let mut r = crate::polyzero::UniPoly::constant(Rational::one());
    for f in &part.factors {
        let g = f.restrict_to_line(l)?;
        if g.is_zero() {
            return Ok(LineCrossings {
                root_count: 0,
                cells_entered: 0,
                contained: true,
            });
        }
        r = &r * &g;
    }
    let root_count = r.count_roots(segment.0, segment.1)?;
    Ok(LineCrossings {
        root_count,
        cells_entered: root_count + 1,
        contained: false,
    })
}
