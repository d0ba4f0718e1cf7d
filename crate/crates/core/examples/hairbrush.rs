//! Hairbrush direction counts for a plane and a grid of planes in R^3.

use incidence_lab::configs::gen_grid_polynomial;
use incidence_lab::polyzero::MultiPoly;
use incidence_lab::singular::hairbrush_direction_count;

fn main() -> incidence_lab::Result<()> {
    let slab = MultiPoly::parse("1 1 0 0\n-1/2 0 0 0\n")?;
    let grid = gen_grid_polynomial(3, 6)?;
    for n in [8usize, 16, 32] {
        for (name, q) in [("plane", &slab), ("grid", &grid)] {
            let r = hairbrush_direction_count(q, n, q.degree(), 0.5)?;
            println!("N={n:>2} {name:<5} {} of {} directions (bound {:.0})", r.count, r.directions_tested, r.bound);
        }
    }
    Ok(())
}
