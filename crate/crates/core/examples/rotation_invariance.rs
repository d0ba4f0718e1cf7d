//! Rotate a configuration by an exact rational rotation and compare reports.

use incidence_lab::configs::{gen_furstenberg, rotation_determinant, FurstenbergParams, RationalRotation};
use incidence_lab::geom::rat;
use incidence_lab::incidence::{count_incidences, direction_separation, max_rflat_concentration, FlatOptions};

fn main() -> incidence_lab::Result<()> {
    let cfg = gen_furstenberg(&FurstenbergParams::new(3, 3, rat(1, 1))?)?;
    let r = RationalRotation::random(3, 5);
    println!("det = {}", rotation_determinant(&r));
    let rot = r.apply_config(&cfg);
    println!("base of first rotated line: {}", rot.lines[0].base());

    let (a, b) = (count_incidences(&cfg), count_incidences(&rot));
    println!("incidences {} vs {}", a.total, b.total);
    let (a, b) = (direction_separation(&cfg.directions(), 0.05), direction_separation(&rot.directions(), 0.05));
    println!("separated {} vs {}, min distance {:.6} vs {:.6}", a.separated, b.separated, a.min_distance, b.min_distance);
    let fa = max_rflat_concentration(&cfg.lines, 2, FlatOptions::default())?;
    let fb = max_rflat_concentration(&rot.lines, 2, FlatOptions::default())?;
    println!("lines in a common plane: {} vs {}", fa.max_count, fb.max_count);
    Ok(())
}
