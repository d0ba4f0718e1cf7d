//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::Rng;

use incidence_lab::configs::{
    count_furstenberg_points, disjoint_circles, gen_furstenberg, gen_grid_polynomial, grid_density_probe,
    grid_neighborhood_volume, hyperplane_product, random_dense_poly, random_hyperplanes, random_points, FurstenbergParams,
    RationalRotation,
};
use incidence_lab::geom::{cube_interval, rat, Direction, Line, Point};
use incidence_lab::incidence::{
    count_incidences, direction_density, direction_separation, max_rflat_concentration, FlatOptions, Region,
};
use incidence_lab::partition::{build_partition, line_cell_crossings, PartitionOptions};
use incidence_lab::polyzero::{
    connected_components, cylinder_directed_area, directed_area, neighborhood_volume, AreaMode, MultiPoly,
};
use incidence_lab::quadric::{
    check_quadric_line, check_quadric_point, enumerate_quadric_points, fit_count_exponent, lines_for_direction, QuadForm,
};
use incidence_lab::seed::stream_rng;
use incidence_lab::singular::{
    hairbrush_direction_count, sample_directions, spot_check, ScanParams, Scanner,
};

/// Seed of the committed partition regression.
const PARTITION_SEED: u64 = 2024;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_furstenberg_exactness() -> Check {
    let mut notes = Vec::new();
    for (m, expected) in [(2u64, 3u64), (4, 11)] {
        let cfg = gen_furstenberg(&FurstenbergParams::new(2, m, rat(1, 1)).unwrap()).map_err(|e| e.to_string())?;
        // Oracle: distinct points on a line are the distinct reduced ratios a:b.
        let ratios: HashSet<(u64, u64)> =
            (1..=m).flat_map(|a| (1..=m).map(move |b| (a / a.gcd(&b), b / a.gcd(&b)))).collect();
        ensure(ratios.len() as u64 == expected, format!("oracle gives {} for M={m}", ratios.len()))?;
        let rep = count_incidences(&cfg);
        ensure(
            rep.min_per_line == expected && rep.max_per_line == expected,
            format!("M={m}: per-line counts {}..{}", rep.min_per_line, rep.max_per_line),
        )?;
        if m == 4 {
            ensure(rep.total == 176, format!("M=4 total {}", rep.total))?;
        }
        notes.push(format!("M={m}: {expected}/line, total {}", rep.total));
    }
    Ok(notes.join("; "))
}

fn c2_sharpness_exponent() -> Check {
    let samples: Vec<(f64, f64)> = [8u64, 16, 32, 64]
        .iter()
        .map(|&m| {
            let p = FurstenbergParams::new(2, m, rat(1, 1)).unwrap();
            (m as f64, count_furstenberg_points(&p).unwrap() as f64)
        })
        .collect();
    let fit = fit_count_exponent(&samples).map_err(|e| e.to_string())?;
    ensure((3.5..=4.0).contains(&fit.slope), format!("slope {:.4}", fit.slope))?;
    Ok(format!("slope {:.4}", fit.slope))
}

fn c3_volume_bound() -> Check {
    let mut notes = Vec::new();
    for d in [8u32, 16] {
        let alpha = 1.0 / (4.0 * d as f64);
        let q = gen_grid_polynomial(2, d).unwrap();
        let est = neighborhood_volume(&q, alpha, 16).map_err(|e| e.to_string())?;
        let exact = grid_neighborhood_volume(2, d, alpha);
        let rel = (est.value - exact).abs() / exact;
        let ratio = est.value / (alpha * d as f64);
        ensure(rel <= 0.05, format!("d={d}: estimate {:.5} vs analytic {exact:.5}", est.value))?;
        ensure(ratio <= 4.0, format!("d={d}: ratio {ratio:.3}"))?;
        notes.push(format!("d={d} rel err {rel:.4} ratio {ratio:.3}"));
    }
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let d = stream_rng(3, "volume-degree", i).gen_range(1..=16u32);
        let q = random_dense_poly(2, d, 300 + i);
        let alpha = 1.0 / (4.0 * d as f64);
        let est = neighborhood_volume(&q, alpha, 16).map_err(|e| e.to_string())?;
        worst = worst.max(est.value / (alpha * d as f64));
    }
    ensure(worst <= 10.0, format!("random max ratio {worst:.3}"))?;
    notes.push(format!("random max ratio {worst:.3}"));
    Ok(notes.join("; "))
}

fn c4_grid_sharpness() -> Check {
    let mut notes = Vec::new();
    for d in [8u32, 16] {
        let worst = grid_density_probe(2, d, 10_000, 4);
        let bound = 1.0 / ((d / 2) as f64 + 1.0);
        ensure(worst <= bound, format!("d={d}: {worst:.5} > {bound:.5}"))?;
        notes.push(format!("d={d} max dist {worst:.5} <= {bound:.5}"));
    }
    Ok(notes.join("; "))
}

fn circle() -> MultiPoly {
    // (x - 1/2)^2 + (y - 1/2)^2 = 4/25
    MultiPoly::parse("1 2 0\n1 0 2\n-1 1 0\n-1 0 1\n17/50 0 0\n").unwrap()
}

fn c5_directed_area() -> Check {
    let slab = MultiPoly::parse("1 1 0\n-1/2 0 0\n").unwrap();
    let across = directed_area(&slab, &Direction::axis(2, 0), 512, AreaMode::ExactRoots).map_err(|e| e.to_string())?;
    let along = directed_area(&slab, &Direction::axis(2, 1), 512, AreaMode::ExactRoots).map_err(|e| e.to_string())?;
    ensure((across.value - 1.0).abs() <= 0.02, format!("slab across {}", across.value))?;
    ensure(along.value.abs() <= 0.02, format!("slab along {}", along.value))?;
    let c = directed_area(&circle(), &Direction::axis(2, 0), 2048, AreaMode::ExactRoots).map_err(|e| e.to_string())?;
    ensure((c.value - 1.6).abs() <= 0.032, format!("circle {}", c.value))?;

    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let mut rng = stream_rng(5, "cylinder", i);
        let n = if i % 2 == 0 { 2 } else { 3 };
        let d = rng.gen_range(1..=6u32);
        let q = random_dense_poly(n, d, 500 + i);
        let axis = loop {
            let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            if let Ok(dir) = Direction::from_ints(&v) {
                break dir;
            }
        };
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.8)).collect();
        let r = rng.gen_range(0.05..0.3);
        let fibers = if n == 2 { 512 } else { 64 };
        let a = cylinder_directed_area(&q, &axis, &center, r, fibers, AreaMode::ExactRoots).map_err(|e| e.to_string())?;
        let ratio = a.value / (r.powi(n as i32 - 1) * d as f64);
        worst = worst.max(ratio);
    }
    ensure(worst <= 10.0, format!("cylinder ratio {worst:.3}"))?;
    Ok(format!(
        "slab {:.4}/{:.4}, circle {:.4}, cylinder max A/(R^(n-1) d) {worst:.3}",
        across.value, along.value, c.value
    ))
}

fn c6_components() -> Check {
    for k in 1..=3 {
        let c = connected_components(&disjoint_circles(k), 1024).map_err(|e| e.to_string())?;
        ensure(c.count == k, format!("{k} circles gave {} components", c.count))?;
    }
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let d = stream_rng(6, "components-degree", i).gen_range(1..=8u32);
        let q = random_dense_poly(2, d, 600 + i);
        let c = connected_components(&q, 512).map_err(|e| e.to_string())?;
        ensure(c.count <= (d * d) as usize, format!("degree {d}: {} components", c.count))?;
        worst = worst.max(c.count as f64 / (d * d) as f64);
    }
    Ok(format!("circles exact for k=1..3; random max components/d^2 {worst:.3}"))
}

fn c7_partition() -> Check {
    let points = random_points(2, 4096, PARTITION_SEED);
    let mut opts = PartitionOptions::new(8);
    opts.seed = PARTITION_SEED;
    let part = build_partition(&points, &opts).map_err(|e| e.to_string())?;
    ensure(part.verified && part.max_cell <= 256, format!("max cell {}", part.max_cell))?;
    let mut rng = stream_rng(PARTITION_SEED, "acceptance-lines", 0);
    let mut worst = 0;
    let mut tested = 0;
    while tested < 100 {
        let p = Point::new((0..2).map(|_| rat(rng.gen_range(0..1 << 20), 1 << 20)).collect());
        let q = Point::new((0..2).map(|_| rat(rng.gen_range(0..1 << 20), 1 << 20)).collect());
        let Ok(l) = Line::through(&p, &q) else { continue };
        let Some((lo, hi)) = cube_interval(l.base().coords(), &l.dir().to_rationals()) else { continue };
        let c = line_cell_crossings(&part, &l, (&lo, &hi)).map_err(|e| e.to_string())?;
        ensure(
            c.cells_entered <= part.product_degree as usize + 1,
            format!("line enters {} cells", c.cells_entered),
        )?;
        worst = worst.max(c.cells_entered);
        tested += 1;
    }
    Ok(format!(
        "max cell {} <= {} (degree {}), lines enter at most {worst} cells",
        part.max_cell, part.bound, part.product_degree
    ))
}

fn c8_singular_hyperplanes() -> Check {
    let planes = random_hyperplanes(2, 16, 8);
    let q = hyperplane_product(2, &planes);
    let mut params = ScanParams::new(64, 0.25, 8.0);
    params.seed = 8;
    let scanner = Scanner::new(&q, &params).map_err(|e| e.to_string())?;
    let dirs = sample_directions(2, 200).map_err(|e| e.to_string())?;
    let report = scanner.scan(&dirs).map_err(|e| e.to_string())?;
    let nonsingular = report.directions.iter().filter(|d| !d.singular).count();
    ensure(nonsingular >= 1, "every sampled direction is singular")?;
    let mut agree = 0;
    let mut ratio = (f64::INFINITY, 0.0f64);
    for (i, d) in report.directions.iter().enumerate().step_by(10).take(20) {
        let s = spot_check(&scanner, &planes, &dirs[i], &d.best_line).map_err(|e| e.to_string())?;
        if s.agrees() {
            agree += 1;
        }
        let r = s.reference / s.traversal.max(1) as f64;
        ratio = (ratio.0.min(r), ratio.1.max(r));
    }
    ensure(agree == 20, format!("{agree}/20 spot checks within sampling error"))?;
    Ok(format!(
        "{nonsingular}/200 non-singular ({} ambiguous), 20/20 spot checks agree, formula/traversal in [{:.2}, {:.2}]",
        report.ambiguous_count, ratio.0, ratio.1
    ))
}

fn c9_hairbrush() -> Check {
    let slab = MultiPoly::parse("1 1 0 0\n-1/2 0 0 0\n").unwrap();
    let grid = gen_grid_polynomial(3, 6).unwrap();
    let n = 32.0f64;
    let mut notes = Vec::new();
    for (q, d) in [(slab, 1u32), (grid, 6)] {
        let rep = hairbrush_direction_count(&q, 32, d, 0.5).map_err(|e| e.to_string())?;
        let bound = 50.0 * (d * d) as f64 * n * n.ln().powi(2);
        ensure((rep.count as f64) <= bound, format!("D={d}: {} > {bound:.0}", rep.count))?;
        notes.push(format!("D={d}: |V|={} <= {bound:.0}", rep.count));
    }
    Ok(notes.join("; "))
}

fn c10_quadric() -> Check {
    let form = QuadForm::hyperbolic(4).unwrap();
    let b1 = enumerate_quadric_points(&form, 1).map_err(|e| e.to_string())?;
    ensure(b1.len() == 20, format!("B=1 gives {} points", b1.len()))?;
    let b2 = enumerate_quadric_points(&form, 2).map_err(|e| e.to_string())?;
    let lines = lines_for_direction(&form, &b2, &[1, 0, 0, 0]).map_err(|e| e.to_string())?;
    ensure(lines.len() == 2, format!("e1 family has {} lines", lines.len()))?;
    ensure(b1.iter().chain(&b2).all(|x| check_quadric_point(&form, x)), "point fails re-check")?;
    ensure(lines.iter().all(|l| check_quadric_line(&form, l)), "line fails re-check")?;
    let samples: Vec<(f64, f64)> = [4i64, 8, 16]
        .iter()
        .map(|&b| (b as f64, enumerate_quadric_points(&form, b).unwrap().len() as f64))
        .collect();
    let fit = fit_count_exponent(&samples).map_err(|e| e.to_string())?;
    ensure((1.6..=2.4).contains(&fit.slope), format!("slope {:.4}", fit.slope))?;
    Ok(format!("20 points, 2 lines at e1, slope {:.4}", fit.slope))
}

fn c11_invariants() -> Check {
    let cfg = gen_furstenberg(&FurstenbergParams::new(3, 3, rat(1, 1)).unwrap()).unwrap();
    let r = RationalRotation::random(3, 11);
    let rot = r.apply_config(&cfg);
    ensure(count_incidences(&cfg) == count_incidences(&rot), "incidence report changed")?;
    let region = Region::slope_box(vec![0.0, 0.0], vec![1.0, 1.0]);
    let a = direction_density(&cfg.directions(), 0.2, &region, 2000, 11).map_err(|e| e.to_string())?;
    let b = direction_density(&rot.directions(), 0.2, &region.clone().rotated(&r), 2000, 11).map_err(|e| e.to_string())?;
    ensure(a == b, "density report changed")?;
    ensure(
        direction_separation(&cfg.directions(), 0.05) == direction_separation(&rot.directions(), 0.05),
        "separation report changed",
    )?;
    let fa = max_rflat_concentration(&cfg.lines, 2, FlatOptions::default()).map_err(|e| e.to_string())?;
    let fb = max_rflat_concentration(&rot.lines, 2, FlatOptions::default()).map_err(|e| e.to_string())?;
    ensure(fa.max_count == fb.max_count && fa.lines == fb.lines, "flat concentration changed")?;

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = tmp.path();
    fs::write(t.join("circle.poly"), circle().to_text()).unwrap();
    let runs: &[&[&str]] = &[
        &["furstenberg", "--n", "3", "--M", "3"],
        &["incidences", "--config", "CFG"],
        &["density", "--config", "CFG", "--epsilon", "0.3", "--probes", "2000"],
        &["flats", "--config", "CFG", "--r", "2"],
        &["nbhd-volume", "--poly", "circle.poly", "--alpha", "0.05"],
        &["directed-area", "--poly", "circle.poly", "--direction", "1,2"],
        &["components", "--poly", "circle.poly"],
        &["partition", "--random", "600", "--degree", "4"],
        &["singular-scan", "--hyperplanes", "6", "--N", "16", "--epsilon", "0.25", "--H", "4", "--directions", "40", "--spot-checks", "4"],
        &["quadric", "--B", "3"],
        &["fit", "--quadric-b", "2,4,6"],
    ];
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        for threads in ["1", "3"] {
            let out = format!("run{k}-t{threads}");
            let args: Vec<String> = args.iter().map(|a| if *a == "CFG" { "run0-t1".to_string() } else { a.to_string() }).collect();
            let status = Command::new(env!("CARGO_BIN_EXE_incidence-lab"))
                .current_dir(t)
                .args(&args)
                .args(["--seed", "17", "--threads", threads, "--out", &out])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        }
        files += compare_dirs(&t.join(format!("run{k}-t1")), &t.join(format!("run{k}-t3")))?;
    }
    Ok(format!("incidence/density/separation/flat reports unchanged under rotation; {files} CLI files byte-identical across 1 and 3 threads"))
}

fn compare_dirs(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<String> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    names.sort();
    for n in &names {
        let x = fs::read(a.join(n)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(n)).map_err(|e| format!("{n}: {e}"))?;
        ensure(x == y, format!("{} differs across thread counts", a.join(n).display()))?;
    }
    Ok(names.len())
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 11] = [
        ("furstenberg-exactness", Duration::from_secs(1), c1_furstenberg_exactness),
        ("sharpness-exponent", Duration::from_secs(120), c2_sharpness_exponent),
        ("neighborhood-volume-bound", Duration::from_secs(180), c3_volume_bound),
        ("grid-zero-set-density", Duration::from_secs(30), c4_grid_sharpness),
        ("directed-area", Duration::from_secs(180), c5_directed_area),
        ("component-bound", Duration::from_secs(120), c6_components),
        ("partition-certificate", Duration::from_secs(60), c7_partition),
        ("singular-directions-hyperplanes", Duration::from_secs(300), c8_singular_hyperplanes),
        ("hairbrush-bound", Duration::from_secs(300), c9_hairbrush),
        ("quadric-enumeration", Duration::from_secs(120), c10_quadric),
        ("global-invariants", Duration::from_secs(600), c11_invariants),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *limit => Err(format!("{msg}; over time limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} ({:.2}s): {msg}", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({:.2}s): {msg}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
