//! Polynomial partition of 4096 random points, then count how many cells a
//! few lines pass through.

use incidence_lab::configs::random_points;
use incidence_lab::geom::{cube_interval, Line};
use incidence_lab::partition::{build_partition, line_cell_crossings, PartitionOptions};

fn main() -> incidence_lab::Result<()> {
    let points = random_points(2, 4096, 2024);
    let mut opts = PartitionOptions::new(8);
    opts.seed = 2024;
    let part = build_partition(&points, &opts)?;
    println!(
        "degree {} with {} nonempty cells, max cell {} (bound {}), {} points on the wall",
        part.product_degree,
        part.nonempty_cells(),
        part.max_cell,
        part.bound,
        part.wall_count
    );
    for (i, pair) in points.chunks(2).take(5).enumerate() {
        let l = Line::through(&pair[0], &pair[1])?;
        if let Some((lo, hi)) = cube_interval(l.base().coords(), &l.dir().to_rationals()) {
            let c = line_cell_crossings(&part, &l, (&lo, &hi))?;
            println!("line {i} dir {}: {} zeros, {} cells", l.dir(), c.root_count, c.cells_entered);
        }
    }
    Ok(())
}
