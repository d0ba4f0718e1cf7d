//! Build the lattice Furstenberg configuration and watch |P| grow like M^4.

use incidence_lab::configs::{count_furstenberg_points, gen_furstenberg, FurstenbergParams};
use incidence_lab::geom::rat;
use incidence_lab::incidence::count_incidences;
use incidence_lab::quadric::fit_count_exponent;

fn main() -> incidence_lab::Result<()> {
    let small = gen_furstenberg(&FurstenbergParams::new(2, 4, rat(1, 1))?)?;
    let rep = count_incidences(&small);
    println!(
        "M=4: {} points, {} lines, {} incidences ({} per line)",
        small.points.len(),
        small.lines.len(),
        rep.total,
        rep.min_per_line
    );

    let mut samples = Vec::new();
    for m in [8u64, 16, 32, 64, 128] {
        let count = count_furstenberg_points(&FurstenbergParams::new(2, m, rat(1, 1))?)?;
        println!("M={m:>4}  |P| = {count}");
        samples.push((m as f64, count as f64));
    }
    let fit = fit_count_exponent(&samples)?;
    println!("log-log slope {:.3} (envelope 4)", fit.slope);
    Ok(())
}
