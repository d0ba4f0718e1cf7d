//! Directed area `A_S(v) = ∫_{v^⊥} |S ∩ π_v^{-1}(y)| dy` of `S = Z(Q) ∩ I^n`,
//! computed as a Riemann sum over a grid of fiber lines parallel to `v`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sign, unravel, Flag, FloatPoly, MultiPoly};
use crate::error::{Error, Result};
use crate::geom::{cube_interval, dyadic, Direction, Rational};

/// Fiber base points are snapped to this many binary digits before the exact
/// restriction, which keeps denominators small.
const FIBER_BITS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaMode {
    /// Exact restriction and Sturm count on every fiber.
    ExactRoots,
    /// Sign changes between `samples` equally spaced points per fiber.
    Sampled { samples: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectedArea {
    pub value: f64,
    pub fibers_per_axis: usize,
    pub fiber_lines: usize,
    pub crossings: u64,
    pub contained_fibers: usize,
    pub mode: AreaMode,
    pub flags: Vec<Flag>,
}

/// Orthonormal basis of `v^⊥`, seeded from the coordinate axes least aligned
/// with `v`.
pub(crate) fn perp_frame(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(a.cmp(&b)));
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for &a in axes.iter().take(n - 1) {
        let mut e = vec![0.0; n];
        e[a] = 1.0;
        for b in std::iter::once(v).chain(frame.iter().map(Vec::as_slice)) {
            let d: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in e.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in e.iter_mut() {
            *x /= norm;
        }
        frame.push(e);
    }
    frame
}

struct Fiber<'a> {
    q: &'a MultiPoly,
    qf: FloatPoly,
    dir: Vec<Rational>,
    dir_f: Vec<f64>,
    mode: AreaMode,
}

impl Fiber<'_> {
    /// Parameter range of `base + t dir` inside the unit cube.
    fn t_range(base: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (&b, &d) in base.iter().zip(dir) {
            if d == 0.0 {
                if !(0.0..=1.0).contains(&b) {
                    return None;
                }
                continue;
            }
            let (a, c) = (-b / d, (1.0 - b) / d);
            lo = lo.max(a.min(c));
            hi = hi.min(a.max(c));
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Crossings of the zero set along one fiber and whether the fiber lies
    /// inside it.
    fn crossings(&self, base: &[f64]) -> (u64, bool) {
        match self.mode {
            AreaMode::ExactRoots => {
                let base: Vec<Rational> = base.iter().map(|&b| dyadic(b, FIBER_BITS)).collect();
                let Some((lo, hi)) = cube_interval(&base, &self.dir) else {
                    return (0, false);
                };
                let r = self.q.restrict(&base, &self.dir).expect("dimensions checked");
                if r.is_zero() {
                    return (0, true);
                }
                (r.count_roots(&lo, &hi).expect("nonzero restriction") as u64, false)
            }
            AreaMode::Sampled { samples } => {
                let Some((lo, hi)) = Self::t_range(base, &self.dir_f) else {
                    return (0, false);
                };
                let mut last = 0i8;
                let mut count = 0;
                let mut x = vec![0.0; base.len()];
                for k in 0..samples {
                    let t = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
                    for ((xi, b), d) in x.iter_mut().zip(base).zip(&self.dir_f) {
                        *xi = b + t * d;
                    }
                    let s = sign(self.qf.eval(&x));
                    if s != 0 {
                        if last != 0 && s != last {
                            count += 1;
                        }
                        last = s;
                    }
                }
                (count, false)
            }
        }
    }
}

fn setup<'a>(q: &'a MultiPoly, v: &Direction, fibers: usize, mode: AreaMode) -> Result<Fiber<'a>> {
    let n = q.n_vars();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if v.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
    }
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if fibers < 16 {
        return Err(Error::BadParams(format!("need at least 16 fibers per axis, got {fibers}")));
    }
    if let AreaMode::Sampled { samples } = mode {
        if samples < 2 {
            return Err(Error::BadParams("sampled mode needs at least 2 samples per fiber".into()));
        }
    }
    Ok(Fiber {
        q,
        qf: q.to_float(),
        dir: v.to_rationals(),
        dir_f: v.components().iter().map(|x| num_traits::ToPrimitive::to_f64(x).unwrap()).collect(),
        mode,
    })
}

fn finish(fiber: &Fiber<'_>, results: Vec<(u64, bool)>, cell_measure: f64, fibers: usize) -> DirectedArea {
    let crossings: u64 = results.iter().map(|r| r.0).sum();
    let contained = results.iter().filter(|r| r.1).count();
    let mut flags = Vec::new();
    if contained > 0 {
        flags.push(Flag::ContainedFibers);
    }
    if matches!(fiber.mode, AreaMode::Sampled { .. }) {
        flags.push(Flag::Sampled);
    }
    DirectedArea {
        value: cell_measure * crossings as f64,
        fibers_per_axis: fibers,
        fiber_lines: results.len(),
        crossings,
        contained_fibers: contained,
        mode: fiber.mode,
        flags,
    }
}

fn embed(frame: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = frame[0].len();
    let mut p = vec![0.0; n];
    for (f, &yk) in frame.iter().zip(y) {
        for (pi, fi) in p.iter_mut().zip(f) {
            *pi += yk * fi;
        }
    }
    p
}

/// Directed area over the whole projection window of `I^n` onto `v^⊥`,
/// sampled by a `fibers^(n-1)` grid of fiber lines.
pub fn directed_area(q: &MultiPoly, v: &Direction, fibers: usize, mode: AreaMode) -> Result<DirectedArea> {
    let fiber = setup(q, v, fibers, mode)?;
    let n = q.n_vars();
    let frame = perp_frame(&v.to_unit_f64());
    let window: Vec<(f64, f64)> = frame
        .iter()
        .map(|f| {
            let lo: f64 = f.iter().map(|x| x.min(0.0)).sum();
            let hi: f64 = f.iter().map(|x| x.max(0.0)).sum();
            (lo, hi)
        })
        .collect();
    let count = fibers.pow(n as u32 - 1);
    let results: Vec<(u64, bool)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let y: Vec<f64> = unravel(k, fibers, n - 1)
                .into_iter()
                .zip(&window)
                .map(|(j, &(lo, hi))| lo + (j as f64 + 0.5) * (hi - lo) / fibers as f64)
                .collect();
            fiber.crossings(&embed(&frame, &y))
        })
        .collect();
    let measure: f64 = window.iter().map(|(lo, hi)| hi - lo).product();
    Ok(finish(&fiber, results, measure / count as f64, fibers))
}

/// Directed area of `Z(Q) ∩ I^n ∩ T` where `T` is the radius-`radius`
/// cylinder whose axis has direction `axis` and passes through `center`.
pub fn cylinder_directed_area(
    q: &MultiPoly,
    axis: &Direction,
    center: &[f64],
    radius: f64,
    fibers: usize,
    mode: AreaMode,
) -> Result<DirectedArea> {
    let fiber = setup(q, axis, fibers, mode)?;
    let n = q.n_vars();
    if center.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: center.len() });
    }
    if !(radius > 0.0) {
        return Err(Error::BadParams(format!("cylinder radius must be positive, got {radius}")));
    }
    let frame = perp_frame(&axis.to_unit_f64());
    let c: Vec<f64> = frame
        .iter()
        .map(|f| f.iter().zip(center).map(|(a, b)| a * b).sum())
        .collect();
    let step = 2.0 * radius / fibers as f64;
    let results: Vec<(u64, bool)> = (0..fibers.pow(n as u32 - 1))
        .into_par_iter()
        .filter_map(|k| {
            let y: Vec<f64> = unravel(k, fibers, n - 1)
                .into_iter()
                .zip(&c)
                .map(|(j, &ck)| ck - radius + (j as f64 + 0.5) * step)
                .collect();
            let r2: f64 = y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            (r2 <= radius * radius).then(|| fiber.crossings(&embed(&frame, &y)))
        })
        .collect();
    Ok(finish(&fiber, results, step.powi(n as i32 - 1), fibers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{int, rat};

    fn slab() -> MultiPoly {
        MultiPoly::linear(&[int(1), int(0)], rat(-1, 2))
    }

    fn circle() -> MultiPoly {
        // (x1-1/2)^2 + (x2-1/2)^2 - 4/25
        MultiPoly::from_terms(
            2,
            [
                (vec![2, 0], int(1)),
                (vec![0, 2], int(1)),
                (vec![1, 0], int(-1)),
                (vec![0, 1], int(-1)),
                (vec![0, 0], rat(1, 2) - rat(4, 25)),
            ],
        )
    }

    #[test]
    fn slab_directed_area() {
        let e1 = Direction::axis(2, 0);
        let e2 = Direction::axis(2, 1);
        let a = directed_area(&slab(), &e1, 64, AreaMode::ExactRoots).unwrap();
        assert!((a.value - 1.0).abs() <= 0.02, "{}", a.value);
        let a = directed_area(&slab(), &e2, 64, AreaMode::ExactRoots).unwrap();
        assert!(a.value.abs() <= 0.02, "{}", a.value);
    }

    #[test]
    fn circle_directed_area() {
        let a = directed_area(&circle(), &Direction::axis(2, 0), 512, AreaMode::ExactRoots).unwrap();
        assert!((a.value - 1.6).abs() <= 0.032, "{}", a.value);
        let s = directed_area(&circle(), &Direction::axis(2, 0), 512, AreaMode::Sampled { samples: 400 }).unwrap();
        assert!((s.value - 1.6).abs() <= 0.032, "{}", s.value);
        assert!(s.flags.contains(&Flag::Sampled));
    }

    #[test]
    fn oblique_direction_matches_perimeter_projection() {
        // A circle's directed area is the same for every direction: twice its diameter.
        let v = Direction::from_ints(&[3, 4]).unwrap();
        let a = directed_area(&circle(), &v, 512, AreaMode::ExactRoots).unwrap();
        assert!((a.value - 1.6).abs() <= 0.032, "{}", a.value);
    }

    #[test]
    fn cylinder_slab() {
        let a = cylinder_directed_area(&slab(), &Direction::axis(2, 0), &[0.5, 0.5], 0.25, 64, AreaMode::ExactRoots).unwrap();
        assert!((a.value - 0.5).abs() <= 0.025, "{}", a.value);
        let empty = MultiPoly::from_terms(2, [(vec![2, 0], int(1)), (vec![0, 0], int(1))]);
        let a = cylinder_directed_area(&empty, &Direction::axis(2, 0), &[0.5, 0.5], 0.25, 64, AreaMode::ExactRoots).unwrap();
        assert_eq!(a.value, 0.0);
    }

    #[test]
    fn preconditions() {
        let e1 = Direction::axis(2, 0);
        assert!(matches!(directed_area(&MultiPoly::zero(2), &e1, 64, AreaMode::ExactRoots), Err(Error::ZeroPolynomial)));
        assert!(matches!(directed_area(&slab(), &e1, 8, AreaMode::ExactRoots), Err(Error::BadParams(_))));
    }

    #[test]
    fn frame_is_orthonormal() {
        let v = Direction::from_ints(&[1, 2, -2]).unwrap().to_unit_f64();
        let f = perp_frame(&v);
        for a in &f {
            assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(a.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>().abs() < 1e-12);
        }
        assert!(f[0].iter().zip(&f[1]).map(|(x, y)| x * y).sum::<f64>().abs() < 1e-12);
    }
}
