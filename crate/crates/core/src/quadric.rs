//! Lattice points on `{Q = 1}` and the lines they carry, for an integral
//! quadratic form. All boxes use the sup norm.
//!
//! The form is stored through its Gram matrix `G = 2A`, so `Q(x) = xᵀGx/2`
//! and `Q(x, v) = xᵀGv/2` stay integral.

use num_integer::{Integer, Roots};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{int, rat, Config, Direction, Line, Point, Rational};
use crate::linalg;

const MAX_BOX: u128 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadForm {
    pub n: usize,
    /// Symmetric integer matrix `2A`.
    pub gram: Vec<Vec<i64>>,
    /// Positive and negative inertia indices.
    pub inertia: (usize, usize),
}

impl QuadForm {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let n = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if (0..n).any(|j| row[j] != gram[j][i]) {
                return Err(Error::DegenerateInput("Gram matrix must be symmetric".into()));
            }
        }
        let m: linalg::Matrix = gram.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        if linalg::determinant(&m).is_zero() {
            return Err(Error::DegenerateInput("quadratic form is degenerate".into()));
        }
        let inertia = inertia(m);
        if inertia.0.abs_diff(inertia.1) > 1 {
            return Err(Error::DegenerateInput(format!("signature {inertia:?} is not balanced within one")));
        }
        Ok(QuadForm { n, gram, inertia })
    }

    /// `x₁x₂ + x₃x₄ + …`, plus `x_n²` when `n` is odd.
    pub fn hyperbolic(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        let mut g = vec![vec![0i64; n]; n];
        for k in 0..n / 2 {
            g[2 * k][2 * k + 1] = 1;
            g[2 * k + 1][2 * k] = 1;
        }
        if n % 2 == 1 {
            g[n - 1][n - 1] = 2;
        }
        Self::new(g)
    }

    /// `xᵀGy`, i.e. twice the bilinear form.
    pub fn gram_product(&self, x: &[i64], y: &[i64]) -> i64 {
        (0..self.n)
            .map(|i| x[i] * (0..self.n).map(|j| self.gram[i][j] * y[j]).sum::<i64>())
            .sum()
    }

    /// `Q(y)` for a rational vector.
    pub fn value(&self, y: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.gram[i][j] != 0 {
                    s += &y[i] * &y[j] * int(self.gram[i][j]);
                }
            }
        }
        s / int(2)
    }
}

/// Sylvester inertia by symmetric Gaussian elimination over the rationals.
fn inertia(mut m: linalg::Matrix) -> (usize, usize) {
    let n = m.len();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if m[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !m[j][j].is_zero()) {
                m.swap(k, j);
                for row in m.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !m[k][j].is_zero()) {
                // Row/col k += row/col j makes the pivot 2 m[k][j].
                for c in 0..n {
                    let v = m[j][c].clone();
                    m[k][c] += v;
                }
                for r in 0..n {
                    let v = m[r][j].clone();
                    m[r][k] += v;
                }
            } else {
                continue;
            }
        }
        let p = m[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            let f = &m[i][k] / &p;
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                let v = &f * &m[k][c];
                m[i][c] -= v;
            }
        }
        for i in k + 1..n {
            m[k][i] = Rational::zero();
            m[i][k] = Rational::zero();
        }
    }
    (pos, neg)
}

fn box_guard(n: usize, b: i64) -> Result<()> {
    let side = 2 * b as u128 + 1;
    let needed = side.checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > MAX_BOX {
        return Err(Error::BudgetExceeded { needed, budget: MAX_BOX });
    }
    Ok(())
}

fn box_vectors(len: usize, b: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * b + 1) as u64;
    let total = side.pow(len as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0i64; len];
        for slot in v.iter_mut().rev() {
            *slot = (k % side) as i64 - b;
            k /= side;
        }
        v
    })
}

/// All `x ∈ ℤⁿ` with `‖x‖_∞ ≤ B` and `Q(x) = 1`, in lexicographic order.
pub fn enumerate_quadric_points(form: &QuadForm, b: i64) -> Result<Vec<Vec<i64>>> {
    if b < 0 {
        return Err(Error::BadParams("box size must be >= 0".into()));
    }
    box_guard(form.n, b)?;
    let n = form.n;
    let g = &form.gram;
    let prefixes: Vec<Vec<i64>> = box_vectors(n - 1, b).collect();
    let chunks: Vec<Vec<Vec<i64>>> = prefixes
        .par_iter()
        .map(|x| {
            // xᵀGx = a t² + 2 l t + r with t the last coordinate.
            let a = g[n - 1][n - 1];
            let l: i64 = (0..n - 1).map(|j| g[n - 1][j] * x[j]).sum();
            let r: i64 = (0..n - 1).map(|i| x[i] * (0..n - 1).map(|j| g[i][j] * x[j]).sum::<i64>()).sum();
            let mut out = Vec::new();
            let mut push = |t: i64| {
                if t.abs() <= b {
                    let mut v = x.clone();
                    v.push(t);
                    out.push(v);
                }
            };
            let c = r - 2;
            if a == 0 {
                if l == 0 {
                    if c == 0 {
                        (-b..=b).for_each(&mut push);
                    }
                } else if (-c).rem_euclid(2 * l) == 0 {
                    push(-c / (2 * l));
                }
            } else {
                // a t² + 2 l t + c = 0  →  t = (-l ± √(l² - a c)) / a
                let disc = l as i128 * l as i128 - a as i128 * c as i128;
                if disc >= 0 {
                    let s = disc.sqrt();
                    if s * s == disc {
                        let mut roots = vec![(-(l as i128) - s, a as i128), (-(l as i128) + s, a as i128)];
                        roots.dedup();
                        let mut ts: Vec<i64> = roots
                            .into_iter()
                            .filter(|(num, den)| num % den == 0)
                            .map(|(num, den)| (num / den) as i64)
                            .collect();
                        ts.sort_unstable();
                        ts.dedup();
                        ts.into_iter().for_each(&mut push);
                    }
                }
            }
            out.sort();
            out
        })
        .collect();
    Ok(chunks.concat())
}

fn first_nonzero_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn primitive(v: &[i64]) -> bool {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

/// Primitive isotropic directions with `Vlo ≤ ‖v‖_∞ ≤ Vhi`, first nonzero
/// entry positive.
pub fn isotropic_directions(form: &QuadForm, vlo: i64, vhi: i64) -> Result<Vec<Vec<i64>>> {
    if vlo <= 0 {
        return Err(Error::BadParams("Vlo must be positive".into()));
    }
    if vlo > vhi {
        return Ok(Vec::new());
    }
    box_guard(form.n, vhi)?;
    Ok(box_vectors(form.n, vhi)
        .filter(|v| {
            let sup = v.iter().map(|x| x.abs()).max().unwrap_or(0);
            sup >= vlo && first_nonzero_positive(v) && primitive(v) && form.gram_product(v, v) == 0
        })
        .collect())
}

/// Canonical lines `x + t v` with `Q(x) = 1`, `Q(x, v) = 0` for one
/// isotropic `v`, given the point set of the box.
pub fn lines_for_direction(form: &QuadForm, points: &[Vec<i64>], v: &[i64]) -> Result<Vec<Line>> {
    let dir = Direction::from_ints(v)?;
    let mut out = Vec::new();
    for x in points.iter().filter(|x| form.gram_product(x, v) == 0) {
        out.push(Line::new(Point::from_ints(x), &dir)?);
    }
    Ok(crate::geom::dedup(out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadricConfig {
    pub form: QuadForm,
    #[serde(rename = "B")]
    pub b: i64,
    pub vlo: i64,
    pub vhi: i64,
    pub norm: String,
    pub points: Vec<Vec<i64>>,
    #[serde(skip)]
    pub lines: Vec<Line>,
    /// `(direction, number of lines)` per isotropic direction.
    pub families: Vec<(Vec<i64>, usize)>,
}

impl QuadricConfig {
    pub fn to_config(&self) -> Result<Config> {
        Config::new(self.form.n, self.points.iter().map(|x| Point::from_ints(x)).collect(), self.lines.clone())
    }
}

pub fn enumerate_quadric_lines(form: &QuadForm, b: i64, vlo: i64, vhi: i64) -> Result<QuadricConfig> {
    let points = enumerate_quadric_points(form, b)?;
    let dirs = isotropic_directions(form, vlo, vhi)?;
    let per_dir: Vec<Vec<Line>> = dirs
        .par_iter()
        .map(|v| lines_for_direction(form, &points, v))
        .collect::<Result<_>>()?;
    let families = dirs.iter().cloned().zip(per_dir.iter().map(Vec::len)).collect();
    let lines = crate::geom::dedup(per_dir.concat());
    Ok(QuadricConfig {
        form: form.clone(),
        b,
        vlo,
        vhi,
        norm: "sup".into(),
        points,
        lines,
        families,
    })
}

/// Independent re-check: `Q(base + t dir) = 1` at `t = 0, 1, 2`, which
/// pins down a quadratic in `t`.
pub fn check_quadric_line(form: &QuadForm, l: &Line) -> bool {
    (0..3).all(|t| form.value(l.point_at(&int(t)).coords()) == Rational::one())
}

pub fn check_quadric_point(form: &QuadForm, x: &[i64]) -> bool {
    let y: Vec<Rational> = x.iter().map(|&v| int(v)).collect();
    form.value(&y) == Rational::one()
}

/// `α = 3/(2n - 6)` for `n > 3`.
pub fn quadric_alpha(n: usize) -> Option<Rational> {
    (n > 3).then(|| rat(3, 2 * n as i64 - 6))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
}

/// Least-squares slope of `log count` against `log scale`.
pub fn fit_count_exponent(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateInput("need at least 3 samples".into()));
    }
    if samples.iter().any(|&(s, c)| !(s > 0.0) || !(c > 0.0)) {
        return Err(Error::DegenerateInput("scales and counts must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(s, c)| (s.ln(), c.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateInput("all scales are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(ExponentFit { slope, intercept, residual })
}

/// Exhaustive count over the full box, without the last-coordinate solve.
/// Slow; kept for cross-checking.
pub fn brute_force_point_count(form: &QuadForm, b: i64) -> Result<usize> {
    box_guard(form.n, b)?;
    Ok(box_vectors(form.n, b).filter(|x| form.gram_product(x, x) == 2).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h4() -> QuadForm {
        QuadForm::hyperbolic(4).unwrap()
    }

    #[test]
    fn point_examples() {
        assert!(enumerate_quadric_points(&h4(), 0).unwrap().is_empty());
        assert_eq!(enumerate_quadric_points(&h4(), 1).unwrap().len(), 20);
        for b in 0..=3 {
            assert_eq!(enumerate_quadric_points(&h4(), b).unwrap().len(), brute_force_point_count(&h4(), b).unwrap());
        }
    }

    #[test]
    fn line_family_at_e1() {
        let q = h4();
        let pts = enumerate_quadric_points(&q, 2).unwrap();
        let lines = lines_for_direction(&q, &pts, &[1, 0, 0, 0]).unwrap();
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| check_quadric_line(&q, l)));
    }

    #[test]
    fn band_and_checker() {
        let q = h4();
        assert!(enumerate_quadric_lines(&q, 2, 3, 2).unwrap().lines.is_empty());
        let cfg = enumerate_quadric_lines(&q, 2, 1, 1).unwrap();
        assert!(!cfg.lines.is_empty());
        assert!(cfg.lines.iter().all(|l| check_quadric_line(&q, l)));
        assert!(cfg.points.iter().all(|x| check_quadric_point(&q, x)));
    }

    #[test]
    fn inertia_and_validation() {
        assert_eq!(h4().inertia, (2, 2));
        assert_eq!(QuadForm::hyperbolic(5).unwrap().inertia, (3, 2));
        assert!(QuadForm::new(vec![vec![2, 0], vec![0, 2]]).is_err());
        assert!(QuadForm::new(vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(QuadForm::new(vec![vec![0, 1], vec![2, 0]]).is_err());
    }

    #[test]
    fn fits() {
        let f = fit_count_exponent(&[(2.0, 8.0), (4.0, 64.0), (8.0, 512.0)]).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12 && f.residual < 1e-12);
        let c = fit_count_exponent(&[(2.0, 5.0), (4.0, 5.0), (8.0, 5.0)]).unwrap();
        assert!(c.slope.abs() < 1e-12);
        assert!(fit_count_exponent(&[(2.0, 1.0), (4.0, 2.0)]).is_err());
    }

    #[test]
    fn counts_respect_symmetries() {
        let q = h4();
        let pts = enumerate_quadric_points(&q, 3).unwrap();
        let mut swapped: Vec<Vec<i64>> = pts.iter().map(|x| vec![x[1], x[0], x[3], x[2]]).collect();
        let mut planes: Vec<Vec<i64>> = pts.iter().map(|x| vec![x[2], x[3], x[0], x[1]]).collect();
        swapped.sort();
        planes.sort();
        assert_eq!(swapped, pts);
        assert_eq!(planes, pts);
    }

    #[test]
    fn alpha_value() {
        assert_eq!(quadric_alpha(6), Some(rat(1, 2)));
        assert_eq!(quadric_alpha(3), None);
    }
}
