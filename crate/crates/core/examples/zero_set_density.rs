//! Neighborhood volume of the grid polynomial against the exact value, and
//! the covering radius of its zero set.

use incidence_lab::configs::{gen_grid_polynomial, grid_density_probe, grid_neighborhood_volume, random_dense_poly};
use incidence_lab::polyzero::neighborhood_volume;

fn main() -> incidence_lab::Result<()> {
    for d in [4u32, 8, 16] {
        let alpha = 1.0 / (4.0 * d as f64);
        let q = gen_grid_polynomial(2, d)?;
        let est = neighborhood_volume(&q, alpha, 16)?;
        let exact = grid_neighborhood_volume(2, d, alpha);
        let probe = grid_density_probe(2, d, 10_000, 1);
        println!(
            "d={d:>2} alpha={alpha:.4}  volume {:.5} (exact {exact:.5})  vol/(alpha d) {:.3}  max dist {probe:.4}",
            est.value,
            est.value / (alpha * d as f64)
        );
    }
    let q = random_dense_poly(2, 10, 7);
    let est = neighborhood_volume(&q, 0.025, 16)?;
    println!("random degree 10: vol/(alpha d) {:.3}", est.value / 0.25);
    Ok(())
}
