//! Singular-direction scan for a product of random lines in the plane, with
//! an exact check on a few of the best lines.

use incidence_lab::configs::{hyperplane_product, random_hyperplanes};
use incidence_lab::singular::{crossing_reference, sample_directions, spot_check, ScanParams, Scanner};

fn main() -> incidence_lab::Result<()> {
    let planes = random_hyperplanes(2, 16, 8);
    let q = hyperplane_product(2, &planes);
    let params = ScanParams::new(64, 0.25, 8.0);
    let scanner = Scanner::new(&q, &params)?;
    let dirs = sample_directions(2, 200)?;
    let report = scanner.scan(&dirs)?;
    println!(
        "{} x {} cubes, {} bisected; threshold {:.1}; {} of {} directions singular",
        report.cubes_per_axis,
        report.cubes_per_axis,
        report.bisected_cubes,
        report.threshold,
        report.singular_count,
        report.sampled_directions
    );
    for d in report.directions.iter().step_by(40) {
        let s = spot_check(&scanner, &planes, &d.direction, &d.best_line)?;
        let r = crossing_reference(&planes, &d.direction, scanner.cubes_per_axis());
        println!(
            "direction ({:+.3}, {:+.3}): traversal {} exact {} reference {r:.1}",
            d.direction[0], d.direction[1], s.traversal, s.exact
        );
    }
    Ok(())
}
