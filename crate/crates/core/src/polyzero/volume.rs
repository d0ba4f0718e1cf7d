use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sign, strides, unravel, Flag, MultiPoly};
use crate::error::{Error, Result};

const MAX_NODES: usize = 64_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Chebyshev,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub grid_side: f64,
    pub alpha: f64,
    pub resolution: u32,
    pub cells_per_axis: usize,
    pub zero_points: usize,
    pub metric: Metric,
    pub flags: Vec<Flag>,
}

/// Volume of `{x in I^n : dist(x, Z(Q) ∩ I^n) <= alpha}` with the Euclidean metric.
pub fn neighborhood_volume(q: &MultiPoly, alpha: f64, resolution: u32) -> Result<VolumeEstimate> {
    neighborhood_volume_with(q, alpha, resolution, Metric::Euclidean)
}

/// Grid of side `h <= alpha / resolution`. Zero-set witnesses are the exact
/// zero nodes plus the linearly interpolated crossing on every grid edge with
/// a sign change; a cell is counted when its center lies within `alpha` of a
/// witness.
pub fn neighborhood_volume_with(
    q: &MultiPoly,
    alpha: f64,
    resolution: u32,
    metric: Metric,
) -> Result<VolumeEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if resolution < 4 {
        return Err(Error::BadParams(format!("resolution must be >= 4, got {resolution}")));
    }
    let m = (resolution as f64 / alpha).ceil() as usize;
    let mut est = neighborhood_volume_on_grid(q, alpha, m, metric)?;
    est.resolution = resolution;
    Ok(est)
}

/// Same estimator on a caller-fixed grid of `m` cells per axis, which must
/// satisfy `1/m <= alpha/4`. On a fixed grid the estimate is monotone in
/// `alpha`.
pub fn neighborhood_volume_on_grid(q: &MultiPoly, alpha: f64, m: usize, metric: Metric) -> Result<VolumeEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if (m as f64) * alpha < 4.0 - 1e-9 {
        return Err(Error::BadParams(format!("grid side 1/{m} exceeds alpha/4")));
    }
    let n = q.n_vars();
    let nodes = (m + 1).checked_pow(n as u32).unwrap_or(usize::MAX);
    if nodes > MAX_NODES {
        return Err(Error::BudgetExceeded {
            needed: nodes as u128,
            budget: MAX_NODES as u128,
        });
    }
    let h = 1.0 / m as f64;
    let values = q.to_float().grid_values(m);
    let witnesses = zero_witnesses(&values, m, n);

    let buckets_per_axis = ((1.0 / alpha).floor() as usize).max(1);
    let bucket_of = |x: f64| ((x * buckets_per_axis as f64) as usize).min(buckets_per_axis - 1);
    let bstrides = strides(buckets_per_axis, n);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); buckets_per_axis.pow(n as u32)];
    for (k, w) in witnesses.chunks(n).enumerate() {
        let b: usize = w.iter().zip(&bstrides).map(|(&x, s)| bucket_of(x) * s).sum();
        buckets[b].push(k as u32);
    }
    let offsets: Vec<Vec<isize>> = (0..3usize.pow(n as u32))
        .map(|k| unravel(k, 3, n).into_iter().map(|o| o as isize - 1).collect())
        .collect();

    let covered: usize = (0..m.pow(n as u32))
        .into_par_iter()
        .map(|cell| {
            let center: Vec<f64> = unravel(cell, m, n)
                .into_iter()
                .map(|i| (i as f64 + 0.5) * h)
                .collect();
            let home: Vec<isize> = center.iter().map(|&x| bucket_of(x) as isize).collect();
            let hit = offsets.iter().any(|off| {
                let mut b = 0usize;
                for ((&c, &o), s) in home.iter().zip(off).zip(&bstrides) {
                    let j = c + o;
                    if j < 0 || j >= buckets_per_axis as isize {
                        return false;
                    }
                    b += j as usize * s;
                }
                buckets[b].iter().any(|&k| {
                    let w = &witnesses[k as usize * n..(k as usize + 1) * n];
                    within(&center, w, alpha, metric)
                })
            });
            usize::from(hit)
        })
        .sum();

    Ok(VolumeEstimate {
        value: covered as f64 * h.powi(n as i32),
        grid_side: h,
        alpha,
        resolution: (m as f64 * alpha).floor() as u32,
        cells_per_axis: m,
        zero_points: witnesses.len() / n,
        metric,
        flags: vec![Flag::SignBlind],
    })
}

fn within(a: &[f64], b: &[f64], r: f64, metric: Metric) -> bool {
    match metric {
        Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() <= r * r,
        Metric::Chebyshev => a.iter().zip(b).all(|(x, y)| (x - y).abs() <= r),
    }
}

/// Flattened coordinates of zero nodes and interpolated edge crossings.
fn zero_witnesses(values: &[f64], m: usize, n: usize) -> Vec<f64> {
    let side = m + 1;
    let node_strides = strides(side, n);
    let per_node: Vec<Vec<f64>> = (0..values.len())
        .into_par_iter()
        .map(|node| {
            let idx = unravel(node, side, n);
            let v = values[node];
            let pos: Vec<f64> = idx.iter().map(|&i| i as f64 / m as f64).collect();
            let mut out = Vec::new();
            if v == 0.0 {
                out.extend_from_slice(&pos);
                return out;
            }
            for axis in 0..n {
                if idx[axis] == m {
                    continue;
                }
                let w = values[node + node_strides[axis]];
                if sign(w) == -sign(v) {
                    let t = v / (v - w);
                    let mut p = pos.clone();
                    p[axis] += t / m as f64;
                    out.extend_from_slice(&p);
                }
            }
            out
        })
        .collect();
    per_node.concat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{int, rat};

    fn slab(c: Rational) -> MultiPoly {
        MultiPoly::linear(&[int(1), int(0)], -c)
    }

    use crate::geom::Rational;

    #[test]
    fn slab_volume() {
        let v = neighborhood_volume(&slab(rat(1, 2)), 0.1, 16).unwrap();
        assert!((v.value - 0.2).abs() <= 0.01, "{}", v.value);
        assert!(v.grid_side <= 0.1 / 4.0);
        assert!(v.flags.contains(&Flag::SignBlind));
    }

    #[test]
    fn two_slabs() {
        let q = &slab(rat(1, 3)) * &slab(rat(2, 3));
        let v = neighborhood_volume(&q, 0.05, 16).unwrap();
        assert!((v.value - 0.2).abs() <= 0.01, "{}", v.value);
    }

    #[test]
    fn empty_zero_set() {
        let q = MultiPoly::from_terms(2, [(vec![2, 0], int(1)), (vec![0, 2], int(1)), (vec![0, 0], int(1))]);
        for alpha in [0.5, 0.1] {
            assert_eq!(neighborhood_volume(&q, alpha, 4).unwrap().value, 0.0);
        }
    }

    #[test]
    fn chebyshev_dominates_euclidean() {
        let q = MultiPoly::from_terms(
            2,
            [(vec![2, 0], int(1)), (vec![0, 2], int(1)), (vec![1, 0], int(-1)), (vec![0, 1], int(-1)), (vec![0, 0], rat(7, 16))],
        );
        let e = neighborhood_volume_with(&q, 0.05, 8, Metric::Euclidean).unwrap();
        let c = neighborhood_volume_with(&q, 0.05, 8, Metric::Chebyshev).unwrap();
        assert!(c.value >= e.value);
    }

    #[test]
    fn alpha_range_checked() {
        assert!(matches!(neighborhood_volume(&slab(rat(1, 2)), 0.0, 8), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(neighborhood_volume(&slab(rat(1, 2)), 1.0, 8), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(neighborhood_volume(&slab(rat(1, 2)), 0.1, 2), Err(Error::BadParams(_))));
    }

    #[test]
    fn monotone_in_alpha_on_fixed_grid() {
        let q = MultiPoly::from_terms(
            2,
            [(vec![3, 0], int(4)), (vec![0, 2], int(-1)), (vec![1, 1], int(1)), (vec![0, 0], rat(1, 5))],
        );
        let mut last = 0.0;
        for k in 1..=12 {
            let alpha = 0.02 * k as f64;
            let v = neighborhood_volume_on_grid(&q, alpha, 400, Metric::Euclidean).unwrap().value;
            assert!(v >= last && v <= 1.0);
            last = v;
        }
    }

    #[test]
    fn monotone_in_alpha() {
        let q = MultiPoly::from_terms(
            2,
            [(vec![3, 0], int(4)), (vec![0, 2], int(-1)), (vec![1, 1], int(1)), (vec![0, 0], rat(1, 5))],
        );
        let mut last = 0.0;
        for alpha in [0.02, 0.04, 0.08, 0.16, 0.32] {
            let v = neighborhood_volume(&q, alpha, 8).unwrap().value;
            assert!(v + 1e-12 >= last && v <= 1.0);
            last = v;
        }
    }
}
