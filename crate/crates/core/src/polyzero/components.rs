use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::{strides, unravel, zero_cells, Flag, MultiPoly};
use crate::error::{Error, Result};

const MAX_CELLS: usize = 16_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub count: usize,
    pub zero_cells: usize,
    pub resolution: usize,
    pub flags: Vec<Flag>,
}

/// Connected components of the union of sign-change cells on a
/// `resolution^n` grid, with face adjacency.
pub fn connected_components(q: &MultiPoly, resolution: usize) -> Result<ComponentCount> {
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if resolution < 2 {
        return Err(Error::BadParams(format!("resolution must be >= 2, got {resolution}")));
    }
    let n = q.n_vars();
    let total = resolution.checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > MAX_CELLS {
        return Err(Error::BudgetExceeded { needed: total as u128, budget: MAX_CELLS as u128 });
    }
    let values = q.to_float().grid_values(resolution);
    let cells = zero_cells(&values, resolution, n);
    let cell_strides = strides(resolution, n);
    let mut uf = UnionFind::<usize>::new(total);
    for (c, _) in cells.iter().enumerate().filter(|(_, &z)| z) {
        let idx = unravel(c, resolution, n);
        for axis in 0..n {
            if idx[axis] + 1 < resolution && cells[c + cell_strides[axis]] {
                uf.union(c, c + cell_strides[axis]);
            }
        }
    }
    let mut roots: Vec<usize> = (0..total).filter(|&c| cells[c]).map(|c| uf.find(c)).collect();
    let zero = roots.len();
    roots.sort_unstable();
    roots.dedup();
    Ok(ComponentCount {
        count: roots.len(),
        zero_cells: zero,
        resolution,
        flags: vec![Flag::SignBlind],
    })
}
