//! Points and lines on x1 x2 + x3 x4 = 1.

use incidence_lab::quadric::{enumerate_quadric_lines, enumerate_quadric_points, fit_count_exponent, QuadForm};

fn main() -> incidence_lab::Result<()> {
    let form = QuadForm::hyperbolic(4)?;
    let qc = enumerate_quadric_lines(&form, 2, 1, 1)?;
    println!("B=2: {} points, {} lines", qc.points.len(), qc.lines.len());
    for (v, count) in qc.families.iter().take(6) {
        println!("  direction {v:?}: {count} lines");
    }
    let samples: Vec<(f64, f64)> = [4i64, 8, 16, 32]
        .iter()
        .map(|&b| Ok((b as f64, enumerate_quadric_points(&form, b)?.len() as f64)))
        .collect::<incidence_lab::Result<_>>()?;
    for (b, c) in &samples {
        println!("B={b:>2}: {c} points");
    }
    println!("slope {:.3}", fit_count_exponent(&samples)?.slope);
    Ok(())
}
