//! Command-line front end. Every subcommand writes its outputs plus a
//! `manifest.json` into `--out`; nothing is written when validation fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::configs::{self, FurstenbergParams, Hyperplane};
use crate::error::{Error, Result};
use crate::geom::{cube_interval, format_rational, parse_lines, parse_points, parse_rational, Config, Direction, Rational};
use crate::incidence::{self, FlatOptions, IncidenceOptions, Region};
use crate::partition::{self, Partition, PartitionOptions};
use crate::polyzero::{self, AreaMode, Metric, MultiPoly};
use crate::quadric::{self, QuadForm};
use crate::seed;
use crate::singular::{self, ScanParams, Scanner};

const SCHEMAS: &str = "\
Output files (all under --out):
  manifest.json     {subcommand, params, seed, threads, version, norm,
                     inputs: [{path, sha256}], outputs: [{file, sha256}], wall_time_ms}
  points.txt        one point per line, comma-separated rationals
  lines.txt         one line per row: `base: x,y | dir: a,b`
  poly.txt          one monomial per row: coefficient e_1 ... e_n
  config.json       furstenberg: {params, counts: {points, lines}, checksum}
  incidences.csv    line_id,count then a final row total,<sum>
  density.json      {epsilon, region, probes, max_gap, mesh_estimate,
                     certified_radius, mesh_ok, pass}
  separation.json   {separated, witness, min_distance}
  flats.json        {r, max_count, lines, flat: [foot, basis], flag}
  volume.json       {value, grid_side, alpha, resolution, cells_per_axis,
                     zero_points, metric, flags}
  area.json         {value, fibers_per_axis, fiber_lines, crossings,
                     contained_fibers, mode, flags}
  components.json   {count, zero_cells, resolution, flags}
  partition.json    {n, degree_budget, slack, factors, product_degree,
                     histogram, wall_count, max_cell, bound, verified, seed}
  cells.csv         pattern,count (pattern is one +/- per factor, last row wall)
  crossings.csv     line_id,root_count,cells_entered,contained
  scan.json         {n, params, cubes_per_axis, bisected_cubes, threshold,
                     slack_threshold, sampled_directions, singular_count,
                     ambiguous_count, directions, flags}
  directions.csv    index,direction,bisected_count,singular,ambiguous,reference
  spots.csv         index,direction,base,traversal,exact,borderline,
                    per_plane_exact,reference,agrees
  hairbrush.json    {N, D, c, directions_tested, count, bound, flags}
  quadric.json      {form, B, vlo, vhi, norm, points, families, alpha, counts}
  fit.json          {source, samples: [[x, y]], slope, intercept, residual}

Vectors inside CSV fields are joined with ';'.

Exit codes: 0 success, 2 invalid input, 3 verified failure (partition bound missed).

--params FILE reads a JSON object whose keys are flag names (without dashes);
flags given on the command line take precedence.";

#[derive(Parser, Debug)]
#[command(name = "incidence-lab", version, about = "Exact incidence geometry experiments", after_help = SCHEMAS, args_override_self = true)]
struct Cli {
    /// Master seed; every stochastic step derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// JSON file with flag values.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the lattice Furstenberg configuration.
    Furstenberg(FurstenbergArgs),
    /// Write the product of translated coordinate hyperplanes.
    Gridpoly(GridpolyArgs),
    /// Count exact point-line incidences of a configuration.
    Incidences(IncidencesArgs),
    /// Probe the direction set for density and separation.
    Density(DensityArgs),
    /// Largest number of lines in a common r-flat.
    Flats(FlatsArgs),
    /// Volume of the alpha-neighborhood of a zero set in the unit cube.
    NbhdVolume(NbhdArgs),
    /// Directed area of a zero set.
    DirectedArea(AreaArgs),
    /// Connected components of a planar zero set.
    Components(ComponentsArgs),
    /// Build and verify a polynomial partition of a point set.
    Partition(PartitionArgs),
    /// Count the partition cells entered by lines.
    Crossings(CrossingsArgs),
    /// Search sampled directions for singular lines.
    SingularScan(ScanArgs),
    /// Count hairbrush directions at scale N.
    Hairbrush(HairbrushArgs),
    /// Enumerate points and lines on a quadric Q(x) = 1.
    Quadric(QuadricArgs),
    /// Least-squares log-log exponent fit.
    Fit(FitArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Furstenberg(_) => "furstenberg",
            Command::Gridpoly(_) => "gridpoly",
            Command::Incidences(_) => "incidences",
            Command::Density(_) => "density",
            Command::Flats(_) => "flats",
            Command::NbhdVolume(_) => "nbhd-volume",
            Command::DirectedArea(_) => "directed-area",
            Command::Components(_) => "components",
            Command::Partition(_) => "partition",
            Command::Crossings(_) => "crossings",
            Command::SingularScan(_) => "singular-scan",
            Command::Hairbrush(_) => "hairbrush",
            Command::Quadric(_) => "quadric",
            Command::Fit(_) => "fit",
        }
    }

    fn params(&self) -> Value {
        let v = match self {
            Command::Furstenberg(a) => serde_json::to_value(a),
            Command::Gridpoly(a) => serde_json::to_value(a),
            Command::Incidences(a) => serde_json::to_value(a),
            Command::Density(a) => serde_json::to_value(a),
            Command::Flats(a) => serde_json::to_value(a),
            Command::NbhdVolume(a) => serde_json::to_value(a),
            Command::DirectedArea(a) => serde_json::to_value(a),
            Command::Components(a) => serde_json::to_value(a),
            Command::Partition(a) => serde_json::to_value(a),
            Command::Crossings(a) => serde_json::to_value(a),
            Command::SingularScan(a) => serde_json::to_value(a),
            Command::Hairbrush(a) => serde_json::to_value(a),
            Command::Quadric(a) => serde_json::to_value(a),
            Command::Fit(a) => serde_json::to_value(a),
        };
        v.unwrap_or(Value::Null)
    }
}

const SUBCOMMANDS: [&str; 14] = [
    "furstenberg",
    "gridpoly",
    "incidences",
    "density",
    "flats",
    "nbhd-volume",
    "directed-area",
    "components",
    "partition",
    "crossings",
    "singular-scan",
    "hairbrush",
    "quadric",
    "fit",
];

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct FurstenbergArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    m: u64,
    /// Rational exponent in [0, 1].
    #[arg(long, default_value = "1")]
    beta: String,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct GridpolyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct IncidencesArgs {
    /// Directory holding points.txt and lines.txt.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    no_prefilter: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RegionArg {
    Full,
    Slope,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct DensityArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 4096)]
    probes: usize,
    #[arg(long, value_enum, default_value = "full")]
    region: RegionArg,
    /// Lower slope corner for --region slope, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    slope_lo: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    slope_hi: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct FlatsArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 200_000)]
    budget: u128,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MetricArg {
    Euclidean,
    Chebyshev,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct NbhdArgs {
    #[arg(long)]
    poly: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// Grid cells per alpha.
    #[arg(long, default_value_t = 16)]
    resolution: u32,
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct AreaArgs {
    #[arg(long)]
    poly: PathBuf,
    /// Rational components, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    direction: String,
    #[arg(long, default_value_t = 512)]
    fibers: usize,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Sample points per fiber in sampled mode.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Restrict to the cylinder through this point (needs --radius).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Vec<f64>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct ComponentsArgs {
    #[arg(long)]
    poly: PathBuf,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct PartitionArgs {
    /// Points file; alternatively use --random.
    #[arg(long, conflicts_with = "random")]
    points: Option<PathBuf>,
    /// Number of seeded random points in the unit cube.
    #[arg(long)]
    random: Option<usize>,
    /// Dimension for --random.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    degree: u32,
    #[arg(long, default_value_t = 4.0)]
    slack: f64,
    #[arg(long, default_value_t = 4000)]
    effort: usize,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct CrossingsArgs {
    /// partition.json from the partition subcommand.
    #[arg(long)]
    partition: PathBuf,
    /// Lines file; alternatively use --random.
    #[arg(long, conflicts_with = "random")]
    lines: Option<PathBuf>,
    /// Number of seeded random lines through the unit cube.
    #[arg(long)]
    random: Option<usize>,
    /// Parameter interval lo,hi; defaults to each line's part inside the unit cube.
    #[arg(long, allow_hyphen_values = true)]
    segment: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct ScanArgs {
    /// Polynomial file; alternatively use --hyperplanes.
    #[arg(long, conflicts_with = "hyperplanes")]
    poly: Option<PathBuf>,
    /// Product of this many seeded random hyperplanes.
    #[arg(long)]
    hyperplanes: Option<usize>,
    /// Dimension for --hyperplanes.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n_param: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    h: f64,
    #[arg(long, default_value_t = 0.1)]
    bisect_fraction: f64,
    #[arg(long, default_value_t = 200)]
    samples_per_cube: usize,
    #[arg(long, default_value_t = 200)]
    directions: usize,
    /// Exact spot checks (planar hyperplane products only).
    #[arg(long, default_value_t = 0)]
    spot_checks: usize,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct HairbrushArgs {
    #[arg(long)]
    poly: PathBuf,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n_param: usize,
    /// Degree used in the bound; defaults to the polynomial's degree.
    #[arg(long = "D")]
    #[serde(rename = "D")]
    degree: Option<u32>,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct QuadricArgs {
    /// Gram matrix 2A as rows separated by ';', entries by ','.
    /// Defaults to the split form x1 x2 + x3 x4 + ... in --n variables.
    #[arg(long, allow_hyphen_values = true)]
    gram: Option<String>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    b: i64,
    #[arg(long, default_value_t = 1)]
    vlo: i64,
    #[arg(long, default_value_t = 1)]
    vhi: i64,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
struct FitArgs {
    /// Explicit samples x:y,x:y,...
    #[arg(long, conflicts_with_all = ["quadric_b", "furstenberg_m"])]
    data: Option<String>,
    /// Fit quadric point counts over these B values (split form, --n variables).
    #[arg(long, value_delimiter = ',', conflicts_with = "furstenberg_m")]
    quadric_b: Vec<i64>,
    /// Fit Furstenberg point counts over these M values (--n, --beta).
    #[arg(long, value_delimiter = ',')]
    furstenberg_m: Vec<u64>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value = "1")]
    beta: String,
}

/// Files produced by one subcommand, in write order.
struct Run {
    outputs: Vec<(String, Vec<u8>)>,
    inputs: Vec<PathBuf>,
    summary: Value,
    norm: Option<&'static str>,
    code: i32,
}

impl Run {
    fn new(summary: Value) -> Self {
        Run { outputs: Vec::new(), inputs: Vec::new(), summary, norm: None, code: 0 }
    }

    fn file(mut self, name: &str, bytes: impl Into<Vec<u8>>) -> Self {
        self.outputs.push((name.to_string(), bytes.into()));
        self
    }

    fn json(self, name: &str, v: &impl Serialize) -> Result<Self> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        Ok(self.file(name, s))
    }

    fn input(mut self, p: &Path) -> Self {
        self.inputs.push(p.to_path_buf());
        self
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let argv = match expand_params(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let start = Instant::now();
    let result = match cli.threads {
        Some(0) => Err(Error::BadParams("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::BadParams(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    match result.and_then(|r| write_outputs(&cli, r, start)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) => 1,
                _ => 2,
            }
        }
    }
}

/// Splice `--params` JSON into the argument list right after the subcommand,
/// moving earlier global flags behind it so command-line values win.
fn expand_params(argv: Vec<String>) -> Result<Vec<String>> {
    let mut file = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--params" {
            file = argv.get(i + 1).cloned();
        } else if let Some(v) = a.strip_prefix("--params=") {
            file = Some(v.to_string());
        }
    }
    let Some(file) = file else { return Ok(argv) };
    let text = fs::read_to_string(&file)?;
    let obj: Value = serde_json::from_str(&text)?;
    let Value::Object(map) = obj else {
        return Err(Error::BadParams(format!("{file}: expected a JSON object")));
    };
    let mut tokens = Vec::new();
    for (k, v) in map {
        if k == "params" {
            continue;
        }
        let flag = format!("--{k}");
        match v {
            Value::Bool(true) => tokens.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect();
                tokens.push(format!("{flag}={}", parts.join(",")));
            }
            other => tokens.push(format!("{flag}={}", scalar(&other))),
        }
    }
    let mut i = 1;
    while i < argv.len() && !SUBCOMMANDS.contains(&argv[i].as_str()) {
        let a = &argv[i];
        i += if a.starts_with("--") && !a.contains('=') && !matches!(a.as_str(), "--help" | "--version") {
            2
        } else {
            1
        };
    }
    if i >= argv.len() {
        return Ok(argv);
    }
    let mut out = vec![argv[0].clone(), argv[i].clone()];
    out.extend(tokens);
    out.extend_from_slice(&argv[1..i]);
    out.extend_from_slice(&argv[i + 1..]);
    Ok(out)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_outputs(cli: &Cli, run: Run, start: Instant) -> Result<i32> {
    fs::create_dir_all(&cli.out)?;
    let mut outputs = Vec::new();
    for (name, bytes) in &run.outputs {
        fs::write(cli.out.join(name), bytes)?;
        outputs.push(json!({ "file": name, "sha256": sha256_hex(bytes) }));
    }
    let mut inputs = Vec::new();
    for p in &run.inputs {
        inputs.push(json!({ "path": p.display().to_string(), "sha256": sha256_hex(&fs::read(p)?) }));
    }
    let manifest = json!({
        "subcommand": cli.command.name(),
        "params": cli.command.params(),
        "seed": cli.seed,
        "threads": cli.threads,
        "version": env!("CARGO_PKG_VERSION"),
        "norm": run.norm,
        "inputs": inputs,
        "outputs": outputs,
        "wall_time_ms": start.elapsed().as_millis() as u64,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(cli.out.join("manifest.json"), text)?;
    println!("{}", serde_json::to_string(&run.summary)?);
    Ok(run.code)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_poly(p: &Path) -> Result<MultiPoly> {
    MultiPoly::parse(&fs::read_to_string(p)?)
}

fn read_config(dir: &Path) -> Result<(Config, Vec<PathBuf>)> {
    let pp = dir.join("points.txt");
    let lp = dir.join("lines.txt");
    let cfg = Config::from_text(&fs::read_to_string(&pp)?, &fs::read_to_string(&lp)?)?;
    Ok((cfg, vec![pp, lp]))
}

fn rationals(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(|t| parse_rational(t.trim()).map_err(|e| Error::BadParams(format!("{t:?}: {e}"))))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn execute(cli: &Cli) -> Result<Run> {
    let sub_seed = seed::derive(cli.seed, cli.command.name(), 0);
    match &cli.command {
        Command::Furstenberg(a) => furstenberg(a),
        Command::Gridpoly(a) => {
            let q = configs::gen_grid_polynomial(a.n, a.d)?;
            Ok(Run::new(json!({ "n": a.n, "d": a.d, "terms": q.num_terms() })).file("poly.txt", q.to_text()))
        }
        Command::Incidences(a) => {
            let (cfg, inputs) = read_config(&a.config)?;
            let rep = incidence::count_incidences_with(&cfg, IncidenceOptions { prefilter: !a.no_prefilter });
            let mut csv = String::from("line_id,count\n");
            for (id, c) in &rep.per_line {
                csv.push_str(&format!("{id},{c}\n"));
            }
            csv.push_str(&format!("total,{}\n", rep.total));
            let summary = json!({ "total": rep.total, "min_per_line": rep.min_per_line, "max_per_line": rep.max_per_line });
            let mut run = Run::new(summary).file("incidences.csv", csv);
            run.inputs = inputs;
            Ok(run)
        }
        Command::Density(a) => {
            let (cfg, inputs) = read_config(&a.config)?;
            let region = match a.region {
                RegionArg::Full => Region::full_sphere(),
                RegionArg::Slope => Region::slope_box(a.slope_lo.clone(), a.slope_hi.clone()),
            };
            let dirs = cfg.directions();
            let rep = incidence::direction_density(&dirs, a.epsilon, &region, a.probes, sub_seed)?;
            let sep = incidence::direction_separation(&dirs, a.epsilon);
            let summary = json!({ "pass": rep.pass, "max_gap": rep.max_gap, "separated": sep.separated });
            let mut run = Run::new(summary).json("density.json", &rep)?.json("separation.json", &sep)?;
            run.inputs = inputs;
            Ok(run)
        }
        Command::Flats(a) => {
            let (cfg, inputs) = read_config(&a.config)?;
            let opts = FlatOptions { budget: a.budget, seed: sub_seed };
            let rep = incidence::max_rflat_concentration(&cfg.lines, a.r, opts)?;
            let summary = json!({ "r": rep.r, "max_count": rep.max_count, "flag": rep.flag });
            let mut run = Run::new(summary).json("flats.json", &rep)?;
            run.inputs = inputs;
            Ok(run)
        }
        Command::NbhdVolume(a) => {
            let q = read_poly(&a.poly)?;
            let metric = match a.metric {
                MetricArg::Euclidean => Metric::Euclidean,
                MetricArg::Chebyshev => Metric::Chebyshev,
            };
            let est = polyzero::neighborhood_volume_with(&q, a.alpha, a.resolution, metric)?;
            Ok(Run::new(json!({ "value": est.value })).json("volume.json", &est)?.input(&a.poly))
        }
        Command::DirectedArea(a) => {
            let q = read_poly(&a.poly)?;
            let v = Direction::from_rationals(&rationals(&a.direction)?)?;
            let mode = match a.mode {
                ModeArg::Exact => AreaMode::ExactRoots,
                ModeArg::Sampled => AreaMode::Sampled { samples: a.samples },
            };
            let area = match (a.radius, a.center.is_empty()) {
                (None, true) => polyzero::directed_area(&q, &v, a.fibers, mode)?,
                (Some(r), false) => polyzero::cylinder_directed_area(&q, &v, &a.center, r, a.fibers, mode)?,
                _ => return Err(Error::BadParams("--center and --radius go together".into())),
            };
            Ok(Run::new(json!({ "value": area.value })).json("area.json", &area)?.input(&a.poly))
        }
        Command::Components(a) => {
            let q = read_poly(&a.poly)?;
            let c = polyzero::connected_components(&q, a.resolution)?;
            Ok(Run::new(json!({ "count": c.count })).json("components.json", &c)?.input(&a.poly))
        }
        Command::Partition(a) => partition_cmd(a, sub_seed),
        Command::Crossings(a) => crossings(a, sub_seed),
        Command::SingularScan(a) => singular_scan(a, sub_seed),
        Command::Hairbrush(a) => {
            let q = read_poly(&a.poly)?;
            let d = a.degree.unwrap_or_else(|| q.degree());
            let rep = singular::hairbrush_direction_count(&q, a.n_param, d, a.c)?;
            let summary = json!({ "count": rep.count, "bound": rep.bound });
            Ok(Run::new(summary).json("hairbrush.json", &rep)?.input(&a.poly))
        }
        Command::Quadric(a) => quadric_cmd(a),
        Command::Fit(a) => fit(a),
    }
}

fn furstenberg(a: &FurstenbergArgs) -> Result<Run> {
    let beta = parse_rational(&a.beta).map_err(Error::BadParams)?;
    let params = FurstenbergParams::new(a.n, a.m, beta)?;
    let cfg = configs::gen_furstenberg(&params)?;
    let points = cfg.points_text();
    let lines = cfg.lines_text();
    let mut h = Sha256::new();
    h.update(points.as_bytes());
    h.update(lines.as_bytes());
    let counts = json!({ "points": cfg.points.len(), "lines": cfg.lines.len() });
    let meta = json!({ "params": params, "counts": counts, "checksum": hex::encode(h.finalize()) });
    Run::new(counts).file("points.txt", points).file("lines.txt", lines).json("config.json", &meta)
}

fn cells_csv(p: &Partition) -> String {
    let mut csv = String::from("pattern,count\n");
    for (k, v) in &p.histogram {
        csv.push_str(&format!("{k},{v}\n"));
    }
    csv.push_str(&format!("wall,{}\n", p.wall_count));
    csv
}

fn partition_cmd(a: &PartitionArgs, sub_seed: u64) -> Result<Run> {
    let (points, input) = match (&a.points, a.random) {
        (Some(p), None) => (parse_points(&fs::read_to_string(p)?)?, Some(p.clone())),
        (None, Some(k)) => (configs::random_points(a.dim, k, seed::derive(sub_seed, "points", 0)), None),
        _ => return Err(Error::BadParams("give exactly one of --points and --random".into())),
    };
    let opts = PartitionOptions { degree: a.degree, slack: a.slack, effort: a.effort, seed: sub_seed };
    let (part, code) = match partition::build_partition(&points, &opts) {
        Ok(p) => (p, 0),
        Err(Error::PartitionNotAchieved { max_cell, bound, best }) => {
            eprintln!("partition not achieved: max cell {max_cell} exceeds bound {bound:.3}");
            (*best, 3)
        }
        Err(e) => return Err(e),
    };
    let summary = json!({ "verified": part.verified, "max_cell": part.max_cell, "bound": part.bound });
    let mut run = Run::new(summary).file("partition.json", part.to_json()? + "\n").file("cells.csv", cells_csv(&part));
    if let Some(p) = input {
        run = run.input(&p);
    } else {
        let text: String = points.iter().map(|p| format!("{p}\n")).collect();
        run = run.file("points.txt", text);
    }
    run.code = code;
    Ok(run)
}

fn crossings(a: &CrossingsArgs, sub_seed: u64) -> Result<Run> {
    let part = Partition::from_json(&fs::read_to_string(&a.partition)?)?;
    let mut run = Run::new(Value::Null).input(&a.partition);
    let lines = match (&a.lines, a.random) {
        (Some(p), None) => {
            run = run.input(p);
            parse_lines(&fs::read_to_string(p)?)?
        }
        (None, Some(k)) => {
            let cfg = configs::random_points(part.n, 2 * k, seed::derive(sub_seed, "lines", 0));
            let ls = cfg
                .chunks(2)
                .filter_map(|pq| crate::geom::Line::through(&pq[0], &pq[1]).ok())
                .collect::<Vec<_>>();
            let text: String = ls.iter().map(|l| format!("{l}\n")).collect();
            run = run.file("lines.txt", text);
            ls
        }
        _ => return Err(Error::BadParams("give exactly one of --lines and --random".into())),
    };
    let segment = a.segment.as_deref().map(rationals).transpose()?;
    if let Some(s) = &segment {
        if s.len() != 2 {
            return Err(Error::BadParams("--segment takes lo,hi".into()));
        }
    }
    let mut csv = String::from("line_id,root_count,cells_entered,contained\n");
    let mut worst = 0;
    for (i, l) in lines.iter().enumerate() {
        let range = match &segment {
            Some(s) => Some((s[0].clone(), s[1].clone())),
            None => cube_interval(l.base().coords(), &l.dir().to_rationals()),
        };
        match range {
            Some((lo, hi)) => {
                let c = partition::line_cell_crossings(&part, l, (&lo, &hi))?;
                worst = worst.max(c.cells_entered);
                csv.push_str(&format!("{i},{},{},{}\n", c.root_count, c.cells_entered, c.contained));
            }
            None => csv.push_str(&format!("{i},0,0,false\n")),
        }
    }
    run.summary = json!({ "lines": lines.len(), "max_cells_entered": worst, "product_degree": part.product_degree });
    Ok(run.file("crossings.csv", csv))
}

fn fmt_vec(v: &[f64]) -> String {
    join(&v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>())
}

fn singular_scan(a: &ScanArgs, sub_seed: u64) -> Result<Run> {
    let mut params = ScanParams::new(a.n_param, a.epsilon, a.h);
    params.bisect_fraction = a.bisect_fraction;
    params.samples_per_cube = a.samples_per_cube;
    params.seed = sub_seed;
    let mut run = Run::new(Value::Null);
    let (q, planes): (MultiPoly, Option<Vec<Hyperplane>>) = match (&a.poly, a.hyperplanes) {
        (Some(p), None) => {
            run = run.input(p);
            (read_poly(p)?, None)
        }
        (None, Some(k)) => {
            let planes = configs::random_hyperplanes(a.dim, k, seed::derive(sub_seed, "planes", 0));
            run = run.json("hyperplanes.json", &planes)?;
            (configs::hyperplane_product(a.dim, &planes), Some(planes))
        }
        _ => return Err(Error::BadParams("give exactly one of --poly and --hyperplanes".into())),
    };
    let dirs = singular::sample_directions(q.n_vars(), a.directions)?;
    let scanner = Scanner::new(&q, &params)?;
    let mut report = scanner.scan(&dirs)?;
    if let Some(planes) = &planes {
        let k = scanner.cubes_per_axis();
        for d in &mut report.directions {
            d.reference = Some(singular::crossing_reference(planes, &d.direction, k));
        }
    }
    let mut csv = String::from("index,direction,bisected_count,singular,ambiguous,reference\n");
    for (i, d) in report.directions.iter().enumerate() {
        let r = d.reference.map(|x| format!("{x:.6}")).unwrap_or_default();
        csv.push_str(&format!("{i},{},{},{},{},{r}\n", fmt_vec(&d.direction), d.bisected_count, d.singular, d.ambiguous));
    }
    let mut agree = None;
    if a.spot_checks > 0 {
        let planes = planes
            .as_ref()
            .ok_or_else(|| Error::BadParams("--spot-checks needs --hyperplanes".into()))?;
        let mut spots = String::from("index,direction,base,traversal,exact,borderline,per_plane_exact,reference,agrees\n");
        let step = (report.directions.len() / a.spot_checks).max(1);
        let mut ok = 0;
        let mut total = 0;
        for (i, d) in report.directions.iter().enumerate().step_by(step).take(a.spot_checks) {
            let s = singular::spot_check(&scanner, planes, &d.direction, &d.best_line)?;
            ok += s.agrees() as usize;
            total += 1;
            spots.push_str(&format!(
                "{i},{},{},{},{},{},{},{:.6},{}\n",
                fmt_vec(&s.direction),
                fmt_vec(&s.base),
                s.traversal,
                s.exact,
                s.borderline,
                s.per_plane_exact,
                s.reference,
                s.agrees()
            ));
        }
        agree = Some(json!({ "agree": ok, "checked": total }));
        run = run.file("spots.csv", spots);
    }
    run.summary = json!({
        "sampled_directions": report.sampled_directions,
        "singular_count": report.singular_count,
        "ambiguous_count": report.ambiguous_count,
        "spot_checks": agree,
    });
    run.json("scan.json", &report).map(|r| r.file("directions.csv", csv))
}

fn quadric_cmd(a: &QuadricArgs) -> Result<Run> {
    let form = match &a.gram {
        Some(g) => QuadForm::new(parse_gram(g)?)?,
        None => QuadForm::hyperbolic(a.n)?,
    };
    let qc = quadric::enumerate_quadric_lines(&form, a.b, a.vlo, a.vhi)?;
    let cfg = qc.to_config()?;
    let alpha = quadric::quadric_alpha(form.n).map(|x| format_rational(&x));
    let counts = json!({ "points": qc.points.len(), "lines": qc.lines.len() });
    let meta = json!({
        "form": qc.form,
        "B": qc.b,
        "vlo": qc.vlo,
        "vhi": qc.vhi,
        "norm": qc.norm,
        "points": qc.points,
        "families": qc.families,
        "alpha": alpha,
        "counts": counts,
    });
    let mut run = Run::new(counts)
        .file("points.txt", cfg.points_text())
        .file("lines.txt", cfg.lines_text())
        .json("quadric.json", &meta)?;
    run.norm = Some("sup");
    Ok(run)
}

fn parse_gram(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|e| Error::BadParams(format!("gram entry {t:?}: {e}"))))
                .collect()
        })
        .collect()
}

fn fit(a: &FitArgs) -> Result<Run> {
    let (source, samples, norm): (&str, Vec<(f64, f64)>, Option<&'static str>) = if let Some(d) = &a.data {
        let s = d
            .split(',')
            .map(|pair| {
                let (x, y) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::BadParams(format!("sample {pair:?} is not x:y")))?;
                let p = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::BadParams(format!("{t:?}: {e}")));
                Ok((p(x)?, p(y)?))
            })
            .collect::<Result<Vec<_>>>()?;
        ("data", s, None)
    } else if !a.quadric_b.is_empty() {
        let form = QuadForm::hyperbolic(a.n)?;
        let s = a
            .quadric_b
            .iter()
            .map(|&b| Ok((b as f64, quadric::enumerate_quadric_points(&form, b)?.len() as f64)))
            .collect::<Result<Vec<_>>>()?;
        ("quadric", s, Some("sup"))
    } else if !a.furstenberg_m.is_empty() {
        let beta = parse_rational(&a.beta).map_err(Error::BadParams)?;
        let s = a
            .furstenberg_m
            .iter()
            .map(|&m| {
                let p = FurstenbergParams::new(a.n, m, beta.clone())?;
                Ok((m as f64, configs::count_furstenberg_points(&p)? as f64))
            })
            .collect::<Result<Vec<_>>>()?;
        ("furstenberg", s, None)
    } else {
        return Err(Error::BadParams("give --data, --quadric-b or --furstenberg-m".into()));
    };
    let f = quadric::fit_count_exponent(&samples)?;
    let out = json!({
        "source": source,
        "samples": samples,
        "slope": f.slope,
        "intercept": f.intercept,
        "residual": f.residual,
    });
    let mut run = Run::new(json!({ "slope": f.slope })).json("fit.json", &out)?;
    run.norm = norm;
    Ok(run)
}
