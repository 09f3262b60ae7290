//! The `lorlab` command line: argument parsing, dispatch to `lorlab_core`,
//! and CSV/JSON emission.

pub mod config;
pub mod error;
pub mod output;

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use lorlab_core::comparison::TriangleSides;
use lorlab_core::curvature::{self, ProfileInput};
use lorlab_core::gh::{self, SweepConfig};
use lorlab_core::hausdorff;
use lorlab_core::lp::{self, NormMode};
use lorlab_core::net::{fmt_real, grid_mesh, sample_net};
use lorlab_core::noldus;
use lorlab_core::{Exponent, LorentzVector, SpaceDescriptor};

pub use error::{CliError, EXIT_INCONCLUSIVE, EXIT_INTERNAL, EXIT_VALIDATION};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "lorlab",
    version,
    about = "Computations on L^p-type Lorentzian example spaces",
    after_help = "Pass --config <file> (key = value lines or a JSON object) to preset flags; \
                  flags on the command line take precedence. LORLAB_THREADS caps parallelism.\n\
                  Exit codes: 0 ok, 2 invalid input, 3 inconclusive numerics, 4 internal error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Time separation tau^p(a, b) = |b - a|^p on the plane or the cylinder
    Tau(TauArgs),
    /// Parallelogram defect 2|x|^2 + 2|y|^2 - |x+y|^2 - |x-y|^2
    Defect(DefectArgs),
    /// Median-defect scaling profile and curvature-bound violation certificates
    CurvatureScan(ScanArgs),
    /// Noldus metric and covering numbers of a cylinder net, or the Noldus^2 steepness probe
    Noldus(NoldusArgs),
    /// Gromov-Hausdorff bounds between nets of Cyl^p and Cyl^q across a list of exponents
    GhSweep(SweepArgs),
    /// Lorentzian Hausdorff dimension and measure of the unit diamond
    Hausdorff(HausdorffArgs),
    /// Sampled cylinder net with its time-separation matrix, as JSON
    Net(NetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pair(pub f64, pub f64);

fn parse_reals(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(format!("expected {n} comma-separated finite reals, got `{s}`")),
    }
}

fn parse_pair(s: &str) -> Result<Pair, String> {
    parse_reals(s, 2).map(|v| Pair(v[0], v[1]))
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    parse_reals(s, 3).map(|v| [v[0], v[1], v[2]])
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

fn parse_finite_p(s: &str) -> Result<f64, String> {
    match parse_exponent(s)? {
        Exponent::Finite(p) => Ok(p),
        Exponent::Infinite => Err("this command needs a finite p".to_string()),
    }
}

/// Comma-separated list given as a single flag value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

fn parse_exponent_list(s: &str) -> Result<List<Exponent>, String> {
    s.split(',').map(parse_exponent).collect::<Result<_, _>>().map(List)
}

fn parse_real_list(s: &str) -> Result<List<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("cannot parse `{x}` as a real")))
        .collect::<Result<_, _>>()
        .map(List)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive real, got `{s}`")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    /// Lorentzian plane R^{1,1}
    Plane,
    /// Flat cylinder Cyl^p
    Cylinder,
    /// Riemannian plane with the l^p norm
    Normed,
    /// Round sphere of curvature k (curvature-scan only)
    Sphere,
}

#[derive(Debug, Args, Serialize)]
pub struct CylinderArgs {
    /// Cylinder height
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub height: f64,
    /// Cylinder circumference
    #[arg(long, default_value_t = 2.0 * PI, value_parser = parse_positive)]
    pub circumference: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output file; printed to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run manifest path (default: <out>.manifest.json)
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct TauArgs {
    /// Exponent p >= 1 or `inf`
    #[arg(long, value_parser = parse_exponent)]
    pub p: Exponent,
    /// Start event `t,x`
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub from: Pair,
    /// End event `t,x`
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub to: Pair,
    #[arg(long, value_enum, default_value_t = SpaceKind::Plane)]
    pub space: SpaceKind,
    #[command(flatten)]
    pub cylinder: CylinderArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Lorentz,
    Riemann,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct DefectArgs {
    #[arg(long, value_parser = parse_exponent)]
    pub p: Exponent,
    /// Vector `x0,x1`
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub x: Pair,
    /// Vector `y0,y1`
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub y: Pair,
    #[arg(long, value_enum, default_value_t = ModeArg::Lorentz)]
    pub mode: ModeArg,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value_t = SpaceKind::Plane)]
    pub space: SpaceKind,
    /// Exponent (not used for the sphere)
    #[arg(long, value_parser = parse_exponent)]
    pub p: Option<Exponent>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "2,0")]
    pub x: Pair,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "1,0.25")]
    pub y: Pair,
    /// Sphere curvature
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Sphere triangle sides `ab,ac,bc`
    #[arg(long, value_parser = parse_triple, default_value = "1,1,1")]
    pub sides: [f64; 3],
    /// The lambda grid is 2^-from, ..., 2^-to
    #[arg(long, default_value_t = 1)]
    pub lambda_from: i32,
    #[arg(long, default_value_t = 20)]
    pub lambda_to: i32,
    /// Curvatures probed by the certificates
    #[arg(long, value_parser = parse_real_list, default_value = "1,-1,0.1,-0.1", allow_hyphen_values = true)]
    pub k_probe: List<f64>,
    #[command(flatten)]
    pub cylinder: CylinderArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoldusMode {
    /// Noldus metric of the sampled net
    Metric,
    /// Closed-form Noldus^2 witness bound and its slope
    Steepness,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct NoldusArgs {
    #[arg(long, value_parser = parse_exponent)]
    pub p: Exponent,
    #[arg(long, value_enum, default_value_t = NoldusMode::Metric)]
    pub mode: NoldusMode,
    #[arg(long, default_value_t = 3)]
    pub nt: usize,
    #[arg(long, default_value_t = 64)]
    pub nx: usize,
    /// Report the greedy covering number at this radius
    #[arg(long, value_parser = parse_positive)]
    pub radius: Option<f64>,
    /// Steepness grid 2^-from, ..., 2^-to
    #[arg(long, default_value_t = 3)]
    pub lambda_from: i32,
    #[arg(long, default_value_t = 20)]
    pub lambda_to: i32,
    #[command(flatten)]
    pub cylinder: CylinderArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct SweepArgs {
    /// Sorted exponents, e.g. `1,1.5,2`
    #[arg(long, value_parser = parse_exponent_list)]
    pub p_list: List<Exponent>,
    /// Compare every entry against this exponent instead of its successor
    #[arg(long, value_parser = parse_exponent)]
    pub reference: Option<Exponent>,
    #[arg(long, default_value_t = 8)]
    pub nt: usize,
    #[arg(long, default_value_t = 8)]
    pub nx: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub cylinder: CylinderArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct HausdorffArgs {
    #[arg(long, value_parser = parse_finite_p)]
    pub p: f64,
    #[arg(long, default_value_t = 20)]
    pub max_levels: u32,
    /// Trial dimensions to classify (default: the estimated dimension)
    #[arg(long, value_parser = parse_real_list)]
    pub d: Option<List<f64>>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct NetArgs {
    #[arg(long, value_parser = parse_exponent)]
    pub p: Exponent,
    #[arg(long, default_value_t = 2)]
    pub nt: usize,
    #[arg(long, default_value_t = 1)]
    pub nx: usize,
    #[command(flatten)]
    pub cylinder: CylinderArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// What a command produced.
struct Artifact {
    /// Main output (CSV with header row, JSON, or a scalar line).
    text: String,
    /// Machine-readable summary for the manifest.
    summary: serde_json::Value,
    /// Human-readable lines for stdout when writing to a file.
    notes: Vec<String>,
}

fn cylinder(p: Exponent, c: &CylinderArgs) -> Result<SpaceDescriptor, CliError> {
    Ok(SpaceDescriptor::cylinder_with(p, c.height, c.circumference)?)
}

fn vector(p: Pair) -> LorentzVector {
    LorentzVector::new(p.0, p.1)
}

fn run_tau(a: &TauArgs) -> Result<Artifact, CliError> {
    let space = match a.space {
        SpaceKind::Plane => SpaceDescriptor::lorentz_plane(a.p),
        SpaceKind::Cylinder => cylinder(a.p, &a.cylinder)?,
        other => return Err(CliError::Usage(format!("tau needs --space plane or cylinder, got {other:?}"))),
    };
    let from = space.event(a.from.0, a.from.1)?;
    let to = space.event(a.to.0, a.to.1)?;
    let v = lp::tau(&from, &to, &space)?;
    Ok(Artifact { text: format!("{v}\n"), summary: json!({ "tau": v }), notes: vec![] })
}

fn run_defect(a: &DefectArgs) -> Result<Artifact, CliError> {
    let mode = match a.mode {
        ModeArg::Lorentz => NormMode::Lorentz,
        ModeArg::Riemann => NormMode::Riemann,
    };
    let e = lp::parallelogram_defect(vector(a.x), vector(a.y), a.p, mode)?;
    Ok(Artifact { text: format!("{e}\n"), summary: json!({ "defect": e }), notes: vec![] })
}

fn run_scan(a: &ScanArgs) -> Result<Artifact, CliError> {
    let lambdas = curvature::dyadic_grid(a.lambda_from, a.lambda_to);
    let need_p = || a.p.ok_or_else(|| CliError::Usage("--p is required for this space".to_string()));
    let space = match a.space {
        SpaceKind::Plane => Some(SpaceDescriptor::lorentz_plane(need_p()?)),
        SpaceKind::Cylinder => Some(cylinder(need_p()?, &a.cylinder)?),
        SpaceKind::Normed => Some(SpaceDescriptor::normed_plane(need_p()?)),
        SpaceKind::Sphere => None,
    };
    let (x, y) = (vector(a.x), vector(a.y));
    let input = match space {
        Some(space) => ProfileInput::Vectors { space, x, y },
        None => {
            let [ab, ac, bc] = a.sides;
            ProfileInput::Sphere { k: a.k, sides: TriangleSides::riemann(ab, ac, bc)? }
        }
    };
    let profile = curvature::scaling_exponent(&input, &lambdas)?;
    let mut notes = vec![format!(
        "fitted_exponent={} sign={:?}",
        profile.fitted_exponent.map_or("none".to_string(), fmt_real),
        profile.fitted_sign
    )];
    let mut certs = Vec::new();
    if let Some(space) = space {
        for &k in &a.k_probe.0 {
            let (xy, uv) = curvature::certify_both_orientations(&space, x, y, k, &lambdas)?;
            notes.push(format!("k_probe={k} xy={:?} uv={:?}", xy.verdict, uv.verdict));
            certs.push(json!({ "kProbe": k, "xy": xy.verdict, "uv": uv.verdict }));
        }
    }
    let header = format!(
        "curvature-scan | units: lengths/time separations in chart units, lambda dimensionless | \
         mesh: lambda = 2^-{}..2^-{} | tolerance: defects below {:e} treated as zero | fitted_exponent={}",
        a.lambda_from,
        a.lambda_to,
        curvature::DEFECT_FLOOR,
        profile.fitted_exponent.map_or("none".to_string(), fmt_real)
    );
    Ok(Artifact {
        text: output::with_header(&header, &profile.to_csv()),
        summary: json!({
            "fittedExponent": profile.fitted_exponent,
            "fittedSign": profile.fitted_sign,
            "certificates": certs,
        }),
        notes,
    })
}

fn run_noldus(a: &NoldusArgs) -> Result<Artifact, CliError> {
    match a.mode {
        NoldusMode::Steepness => {
            let p = a.p.value().ok_or_else(|| CliError::Usage("steepness needs a finite p".into()))?;
            let rows = noldus::steepness_probe(p, &curvature::dyadic_grid(a.lambda_from, a.lambda_to))?;
            let header = format!(
                "noldus steepness | units: squared time separation per unit lambda | mesh: lambda = 2^-{}..2^-{} | \
                 tolerance: central difference with relative step 1e-4",
                a.lambda_from, a.lambda_to
            );
            let last = rows.last().map(|r| r.slope);
            Ok(Artifact {
                text: output::with_header(&header, &noldus::steepness_csv(&rows)),
                summary: json!({ "finestSlope": last }),
                notes: vec![format!("finest_slope={}", last.map_or("none".into(), fmt_real))],
            })
        }
        NoldusMode::Metric => {
            let space = cylinder(a.p, &a.cylinder)?;
            let net = sample_net(&space, a.nt, a.nx)?;
            let m = noldus::noldus_metric_net(&net)?;
            let (mt, mx) = grid_mesh(&space, a.nt, a.nx).unwrap_or((0.0, 0.0));
            let covering = a.radius.map(|r| noldus::covering_number(&m, r)).transpose()?;
            let header = format!(
                "noldus metric | units: time separation | mesh: dt={}, dx={} (nT={}, nX={}) | \
                 tolerance: supremum over net points only (a lower bound)",
                fmt_real(mt),
                fmt_real(mx),
                a.nt,
                a.nx
            );
            let mut notes = vec![format!("diameter={}", fmt_real(m.diameter()))];
            if let (Some(r), Some(c)) = (a.radius, covering) {
                notes.push(format!("covering_number(radius={r})={c}"));
            }
            Ok(Artifact {
                text: output::with_header(&header, &m.to_csv()),
                summary: json!({ "diameter": m.diameter(), "radius": a.radius, "coveringNumber": covering }),
                notes,
            })
        }
    }
}

fn run_sweep(a: &SweepArgs) -> Result<Artifact, CliError> {
    let cfg = SweepConfig {
        p_list: a.p_list.0.clone(),
        reference: a.reference,
        n_t: a.nt,
        n_x: a.nx,
        height: a.cylinder.height,
        circumference: a.cylinder.circumference,
        restarts: a.restarts,
        seed: a.seed,
    };
    let rows = gh::p_sweep(&cfg)?;
    let (mt, mx) = rows.first().map_or((0.0, 0.0), |r| (r.mesh_t, r.mesh_x));
    let header = format!(
        "gh-sweep | units: time separation | mesh: dt={}, dx={} (nT={}, nX={}) | tolerance: closed form to 1e-10; \
         search is an upper bound with {} restarts, seed {}",
        fmt_real(mt),
        fmt_real(mx),
        a.nt,
        a.nx,
        a.restarts,
        a.seed
    );
    Ok(Artifact {
        text: output::with_header(&header, &gh::sweep_csv(&rows)),
        summary: json!({ "rows": rows.len(), "seed": a.seed, "restarts": a.restarts }),
        notes: vec![format!("rows={}", rows.len())],
    })
}

fn run_hausdorff(a: &HausdorffArgs) -> Result<Artifact, CliError> {
    let dim = hausdorff::dimension_estimate(a.p, a.max_levels)?;
    let ds = a.d.clone().map_or_else(|| vec![dim], |l| l.0);
    let rows = ds
        .iter()
        .map(|&d| hausdorff::measure_estimate(a.p, d, a.max_levels))
        .collect::<Result<Vec<_>, _>>()?;
    let header = format!(
        "hausdorff | units: d-volume of the unit diamond | mesh: n, k = 2^0..2^{} | \
         tolerance: dimension bisection to 1e-9, limit trends over 3 doublings | dimension={}",
        a.max_levels,
        fmt_real(dim)
    );
    let mut notes = vec![format!("dimension={}", fmt_real(dim))];
    notes.extend(rows.iter().map(|r| format!("d={} measure={}", fmt_real(r.d), r.classification)));
    Ok(Artifact {
        text: output::with_header(&header, &hausdorff::measure_csv(&rows)),
        summary: json!({ "dimension": dim, "measures": rows }),
        notes,
    })
}

fn run_net(a: &NetArgs) -> Result<Artifact, CliError> {
    let space = cylinder(a.p, &a.cylinder)?;
    let net = sample_net(&space, a.nt, a.nx)?;
    Ok(Artifact {
        text: net.to_json(),
        summary: json!({ "points": net.len() }),
        notes: vec![format!("points={}", net.len())],
    })
}

fn out_args(c: &Command) -> Option<&OutArgs> {
    match c {
        Command::CurvatureScan(a) => Some(&a.out),
        Command::Noldus(a) => Some(&a.out),
        Command::GhSweep(a) => Some(&a.out),
        Command::Hausdorff(a) => Some(&a.out),
        Command::Net(a) => Some(&a.out),
        Command::Tau(_) | Command::Defect(_) => None,
    }
}

/// Parses `argv` (including the program name), runs the command and writes
/// user-facing text to `stdout`.
pub fn run(argv: Vec<String>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut argv = argv;
    let file = match config::take_config_path(&mut argv)? {
        Some(path) => config::read_config(Path::new(&path))?,
        None => Vec::new(),
    };
    let merged = config::merge(argv, file)?;
    let cli = match Cli::try_parse_from(merged) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{}", e.render())?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    let started = Instant::now();
    let artifact = match &cli.command {
        Command::Tau(a) => run_tau(a),
        Command::Defect(a) => run_defect(a),
        Command::CurvatureScan(a) => run_scan(a),
        Command::Noldus(a) => run_noldus(a),
        Command::GhSweep(a) => run_sweep(a),
        Command::Hausdorff(a) => run_hausdorff(a),
        Command::Net(a) => run_net(a),
    }?;
    match out_args(&cli.command).and_then(|o| o.out.as_ref().map(|p| (p, o.manifest.as_ref()))) {
        Some((out, manifest)) => {
            output::write_atomic(out, artifact.text.as_bytes())?;
            let manifest_path = manifest.cloned().unwrap_or_else(|| output::manifest_path(out));
            let m = output::Manifest {
                tool: "lorlab",
                version: env!("CARGO_PKG_VERSION"),
                config: &cli.command,
                outputs: vec![out.display().to_string()],
                threads: rayon::current_num_threads(),
                summary: artifact.summary,
                wall_time_seconds: started.elapsed().as_secs_f64(),
            };
            let text = serde_json::to_string_pretty(&m).map_err(|e| CliError::Internal(e.to_string()))?;
            output::write_atomic(&manifest_path, format!("{text}\n").as_bytes())?;
            for n in &artifact.notes {
                writeln!(stdout, "{n}")?;
            }
            writeln!(stdout, "wrote {}", out.display())?;
        }
        None => write!(stdout, "{}", artifact.text)?,
    }
    Ok(())
}

/// Sizes the global thread pool from `LORLAB_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("LORLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LORLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}
