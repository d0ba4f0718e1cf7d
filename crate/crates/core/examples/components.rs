//! Count connected components of planar zero sets on a sign grid.

use incidence_lab::configs::{disjoint_circles, random_dense_poly};
use incidence_lab::polyzero::connected_components;

fn main() -> incidence_lab::Result<()> {
    for k in 1..=4 {
        let c = connected_components(&disjoint_circles(k), 1024)?;
        println!("{k} circles -> {} components ({} zero cells)", c.count, c.zero_cells);
    }
    for d in [2u32, 4, 6, 8] {
        let c = connected_components(&random_dense_poly(2, d, 42), 512)?;
        println!("random degree {d}: {} components (bound {})", c.count, d * d);
    }
    Ok(())
}
