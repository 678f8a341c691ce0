//! Command-line front end: figure-style data grids, parameter sweeps,
//! stochastic simulation runs, the cross-validation suite, and a gnuplot
//! script helper.
//!
//! Every command writes a `manifest.json` into the output directory (even on
//! failure) recording the command line, parameter echo in SI and
//! kappa-normalized form, seed, warnings, and the list of output files.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage/config error,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::langevin::{self, DriveMode, Scheme, SimConfig};
use crate::system::{SystemParams, HBAR, KB};
use crate::validate::{run_all, Tweaks};
use crate::{analytics, quadratures, spectrum};

#[derive(Parser)]
#[command(
    name = "optomech",
    version,
    about = "Laser phase noise in cavity optomechanics: back-action damping, \
             optical spring, cooling limits, and quadrature heating"
)]
struct Cli {
    /// Parameter file: flat `key = value` lines, or JSON if the extension is .json
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (created if missing)
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Override a parameter field in SI units, e.g. --set gamma_l=2e4 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads (fallback: OPTOMECH_JOBS, then all cores)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// RNG seed for stochastic commands
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output format for tabulated data
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate one of the built-in figure grids (fig2..fig7)
    Figure {
        /// fig2: damping ratio; fig3: sideband coefficient; fig4: normalized
        /// intensity; fig5: normalized spring shift; fig6: occupation ratio;
        /// fig7: quadrature heating ratio
        name: String,
        /// Points per axis
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Sweep a quantity over one or two parameter axes
    Sweep {
        /// Axis spec `field=lo:hi:n` or `field=value` in SI units
        /// (repeat once for a second axis)
        #[arg(long, required = true)]
        axis: Vec<String>,
        #[arg(long, value_enum)]
        quantity: Quantity,
    },
    /// Integrate stochastic trajectories of the mirror and the field
    Simulate {
        /// Total simulated time (s)
        #[arg(long)]
        duration: f64,
        /// Time step (s); default: half the stability bound
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1)]
        n_traj: usize,
        /// Initial ring-down amplitude in units of x_zpt
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::ExponentialVerlet)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = DriveArg::Constant)]
        drive: DriveArg,
        /// Hold the mirror at x = 0 (field-only run)
        #[arg(long)]
        freeze_mirror: bool,
        /// Draw (x, v) from the classical thermal distribution
        #[arg(long)]
        thermal_init: bool,
        /// Record every k-th step
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Post-processing estimate written to estimates.json
        #[arg(long, value_enum, default_value_t = EstimateArg::None)]
        estimate: EstimateArg,
        /// Number of trajectories written as CSV (estimates always use all)
        #[arg(long, default_value_t = 8)]
        save_trajectories: usize,
    },
    /// Run the cross-validation suite and write report.json
    Validate {
        /// Fault-injection hook: scales the finite-linewidth damping
        /// prediction so a deliberate error is caught by the suite
        #[arg(long, default_value_t = 1.0, hide = true)]
        gamma_opt_scale: f64,
    },
    /// Emit a gnuplot script for a CSV produced by figure, sweep, or simulate
    Gnuplot {
        /// Path to the CSV file to plot
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    EulerMaruyama,
    ExponentialVerlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DriveArg {
    Constant,
    SineModulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimateArg {
    None,
    Ringdown,
    Quadratures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    #[value(name = "gamma_opt")]
    GammaOpt,
    #[value(name = "delta_omega_opt")]
    DeltaOmegaOpt,
    #[value(name = "beta0_sq")]
    Beta0Sq,
    #[value(name = "n_min")]
    NMin,
    #[value(name = "s_n_integral")]
    SNIntegral,
    #[value(name = "var_x")]
    VarX,
    #[value(name = "var_y")]
    VarY,
    #[value(name = "heating_ratio")]
    HeatingRatio,
}

/// Record of one CLI run, written to `<out>/manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub seed: Option<u64>,
    pub params_si: Option<SystemParams>,
    pub params_kappa_normalized: Option<serde_json::Value>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    /// "ok", "partial" (some grid cells failed), or "failed".
    pub status: String,
    pub error: Option<String>,
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let jobs = cli.jobs.or_else(|| {
        std::env::var("OPTOMECH_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = jobs {
        // ignore failure: the global pool may already exist (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let mut manifest = RunManifest {
        command: std::env::args().collect::<Vec<_>>().join(" "),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        seed: cli.seed,
        params_si: None,
        params_kappa_normalized: None,
        warnings: Vec::new(),
        outputs: Vec::new(),
        status: "ok".to_string(),
        error: None,
    };

    let code = match execute(&cli, &mut manifest) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            manifest.status = "failed".to_string();
            manifest.error = Some(e.to_string());
            exit_code(&e)
        }
    };

    if let Err(e) = write_manifest(&cli.out, &manifest) {
        eprintln!("error: could not write manifest: {e}");
        return if code == 0 { 2 } else { code };
    }
    code
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::UnknownFigure(_)
        | Error::ConfigMissing(_)
        | Error::BadAxisSpec(_)
        | Error::ConfigParse { .. }
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 3,
    }
}

fn write_manifest(out_dir: &Path, manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(out_dir.join("manifest.json"), text)?;
    Ok(())
}

fn execute(cli: &Cli, manifest: &mut RunManifest) -> Result<i32> {
    fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Figure { name, points } => cmd_figure(cli, manifest, name, *points),
        Command::Sweep { axis, quantity } => cmd_sweep(cli, manifest, axis, *quantity),
        Command::Simulate {
            duration,
            dt,
            n_traj,
            x0,
            scheme,
            drive,
            freeze_mirror,
            thermal_init,
            record_every,
            estimate,
            save_trajectories,
        } => {
            let sim = SimArgs {
                duration: *duration,
                dt: *dt,
                n_traj: *n_traj,
                x0: *x0,
                scheme: *scheme,
                drive: *drive,
                freeze_mirror: *freeze_mirror,
                thermal_init: *thermal_init,
                record_every: *record_every,
                estimate: *estimate,
                save_trajectories: *save_trajectories,
            };
            cmd_simulate(cli, manifest, &sim)
        }
        Command::Validate { gamma_opt_scale } => cmd_validate(cli, manifest, *gamma_opt_scale),
        Command::Gnuplot { csv } => cmd_gnuplot(cli, manifest, csv),
    }
}

// ---------------------------------------------------------------------------
// parameter loading

/// Laboratory-scale default parameters: Omega = 4 kappa, red-detuned at
/// Delta = -Omega, Gamma = 1e-3 kappa, no laser linewidth, N_max = 1e6.
fn default_params() -> SystemParams {
    SystemParams::from_kappa_units(2e5, 4.0, 1e-3, 0.0, -4.0, 50.0, 1e6, 0.0)
        .expect("default parameters are valid")
}

/// Load parameters from --config (or take `base`) and apply --set overrides.
fn load_params(cli: &Cli, base: SystemParams, manifest: &mut RunManifest) -> Result<SystemParams> {
    let mut p = match &cli.config {
        Some(path) => {
            let (p, warnings) = SystemParams::from_file(path)?;
            for w in warnings {
                manifest.warnings.push(format!("{w:?}"));
            }
            p
        }
        None => base,
    };
    for spec in &cli.overrides {
        apply_override(&mut p, spec)?;
    }
    let p = p.validated()?;
    manifest.params_si = Some(p);
    let s = p.scaled();
    manifest.params_kappa_normalized = Some(serde_json::json!({
        "kappa": s.kappa,
        "omega_m_over_kappa": s.omega,
        "gamma_m_over_kappa": s.gamma,
        "gamma_l_over_kappa": s.gamma_l,
        "detuning_over_kappa": s.delta,
        "g0_over_kappa": s.g0,
        "b0_sq_over_kappa": s.b0_sq,
        "n_max": 4.0 * s.b0_sq,
        "n_th": s.n_th,
    }));
    Ok(p)
}

/// Set one SystemParams field by name (SI units). `t_eff` converts to `n_th`
/// using the current mechanical frequency.
fn apply_override(p: &mut SystemParams, spec: &str) -> Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidParams(format!("--set expects KEY=VALUE, got `{spec}`")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|e| Error::InvalidParams(format!("--set {key}: bad number `{value}`: {e}")))?;
    set_field(p, key.trim(), v)
}

fn set_field(p: &mut SystemParams, key: &str, v: f64) -> Result<()> {
    match key {
        "omega_m" => p.omega_m = v,
        "omega_c" => p.omega_c = v,
        "kappa" => p.kappa = v,
        "gamma_m" => p.gamma_m = v,
        "gamma_l" => p.gamma_l = v,
        "detuning" => p.detuning = v,
        "mass" => p.mass = v,
        "length" => p.length = v,
        "power" => p.power = v,
        "n_th" => p.n_th = v,
        "t_eff" => p.n_th = KB * v / (HBAR * p.omega_m),
        _ => {
            return Err(Error::InvalidParams(format!(
                "unknown parameter field `{key}`"
            )))
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// tabular output

#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => serde_json::json!(v),
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

/// Write a table as CSV or as a JSON array of records; returns the file name.
fn write_table(
    cli: &Cli,
    stem: &str,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> Result<String> {
    let name = match cli.format {
        OutputFormat::Csv => format!("{stem}.csv"),
        OutputFormat::Json => format!("{stem}.json"),
    };
    let path = cli.out.join(&name);
    match cli.format {
        OutputFormat::Csv => {
            let mut text = String::new();
            let _ = writeln!(text, "{}", header.join(","));
            for row in rows {
                let fields: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(text, "{}", fields.join(","));
            }
            fs::write(&path, text)?;
        }
        OutputFormat::Json => {
            let records: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let map: serde_json::Map<String, serde_json::Value> = header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.to_json()))
                        .collect();
                    serde_json::Value::Object(map)
                })
                .collect();
            fs::write(&path, serde_json::to_string_pretty(&records)?)?;
        }
    }
    Ok(name)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// figure command

fn cmd_figure(cli: &Cli, manifest: &mut RunManifest, name: &str, points: usize) -> Result<i32> {
    if points < 1 {
        return Err(Error::InvalidParams("--points must be >= 1".into()));
    }
    // caption-fixed parameters as defaults; --config replaces them entirely
    // and --set overrides individual fields
    let base = match name {
        "fig2" | "fig3" | "fig4" | "fig5" | "fig7" => default_params(),
        "fig6" => SystemParams::from_kappa_units(2e5, 40.0, 0.0, 0.0, -40.0, 50.0, 1e11, 0.0)?,
        other => return Err(Error::UnknownFigure(other.to_string())),
    };
    let p = load_params(cli, base, manifest)?;
    let k = p.kappa;

    // each figure: (axis1 name, axis2 name, value name, axis grids, cell fn)
    let (h1, h2, hv, a1, a2): (&str, &str, &str, Vec<f64>, Vec<f64>) = match name {
        "fig2" => (
            "detuning_over_kappa",
            "linewidth_over_kappa",
            "damping_ratio",
            linspace(-8.0, 8.0, points),
            linspace(0.0, 1.0, points),
        ),
        "fig3" => (
            "detuning_over_kappa",
            "linewidth_over_kappa",
            "a_minus_times_kappa",
            linspace(-8.0, 8.0, points),
            linspace(0.0, 1.0, points),
        ),
        "fig4" => (
            "linewidth_over_kappa",
            "detuning_over_kappa",
            "normalized_intensity",
            linspace(0.0, 3.0, points),
            linspace(-8.0, 8.0, points),
        ),
        "fig5" => (
            "detuning_over_kappa",
            "linewidth_over_kappa",
            "normalized_spring_shift",
            linspace(-8.0, 8.0, points),
            linspace(0.0, 1.0, points),
        ),
        "fig6" => (
            "linewidth_over_kappa",
            "detuning_over_kappa",
            "occupation_ratio",
            linspace(0.0, 5.0, points),
            linspace(-80.0, -10.0, points),
        ),
        "fig7" => (
            "omega_m_over_kappa",
            "linewidth_over_kappa",
            "heating_ratio",
            // the sine-quadrature excess has a zero at Omega = kappa/2,
            // gamma = 0, where the ratio diverges; start just above it
            linspace(0.6, 10.0, points),
            linspace(0.0, 0.3, points),
        ),
        _ => unreachable!("matched above"),
    };

    let cell = |x1: f64, x2: f64| -> Result<f64> {
        let mut q = p;
        match name {
            "fig2" => {
                q.detuning = x1 * k;
                q.gamma_l = x2 * k;
                let num = analytics::optical_damping(&q).value;
                let mut q0 = q;
                q0.gamma_l = 0.0;
                let den = analytics::optical_damping(&q0).value;
                Ok(if num == 0.0 && den == 0.0 {
                    f64::NAN
                } else {
                    num / den
                })
            }
            "fig3" => {
                q.detuning = x1 * k;
                q.gamma_l = x2 * k;
                Ok(analytics::coeff_a(&q, analytics::Sign::Minus) * k)
            }
            "fig4" => {
                q.gamma_l = x1 * k;
                q.detuning = x2 * k;
                Ok(analytics::intracavity_energy(&q) * k / (4.0 * q.power))
            }
            "fig5" => {
                q.detuning = x1 * k;
                q.gamma_l = x2 * k;
                // frequency shift normalized by 2 P omega_c / Omega^2 M L^2 kappa
                let u = 2.0 * q.power * q.omega_c
                    / (q.omega_m * q.omega_m * q.mass * q.length * q.length * k);
                Ok(analytics::frequency_shift(&q).value / u)
            }
            "fig6" => {
                q.gamma_l = x1 * k;
                q.detuning = x2 * k;
                let n = figure6_occupation(&q)?;
                let mut q0 = q;
                q0.gamma_l = 0.0;
                let n0 = figure6_occupation(&q0)?;
                Ok(n / n0)
            }
            "fig7" => {
                q.omega_m = x1 * k;
                q.gamma_l = x2 * k;
                Ok(quadratures::heating_ratio(&q))
            }
            _ => unreachable!("matched above"),
        }
    };

    let cells: Vec<Result<f64>> = a1
        .par_iter()
        .flat_map_iter(|&x1| a2.iter().map(move |&x2| (x1, x2)))
        .map(|(x1, x2)| cell(x1, x2))
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut n_failed = 0usize;
    let mut first_error: Option<Error> = None;
    for (idx, result) in cells.into_iter().enumerate() {
        let (i, j) = (idx / a2.len(), idx % a2.len());
        let value = match result {
            Ok(v) => v,
            Err(e) => {
                n_failed += 1;
                if first_error.is_none() {
                    first_error = Some(e);
                }
                f64::NAN
            }
        };
        rows.push(vec![Cell::Num(a1[i]), Cell::Num(a2[j]), Cell::Num(value)]);
    }

    let file = write_table(cli, name, &[h1, h2, hv], &rows)?;
    manifest.outputs.push(file);
    if n_failed > 0 {
        manifest.status = "partial".to_string();
        let e = first_error.expect("counted at least one failure");
        manifest
            .warnings
            .push(format!("{n_failed} grid cells failed; first error: {e}"));
        return Ok(3);
    }
    Ok(0)
}

/// Mean phonon number from the occupation-noise spectrum with a grid light
/// enough for figure-scale scans.
fn figure6_occupation(p: &SystemParams) -> Result<f64> {
    let mut spec = spectrum::GridSpec::default_for(p);
    spec.base_points = (1 << 13) + 1;
    spec.points_per_peak = 1501;
    let grid = spectrum::noise_spectrum(p, &spec)?;
    Ok(spectrum::mean_phonon_number(&grid).value)
}

// ---------------------------------------------------------------------------
// sweep command

fn cmd_sweep(
    cli: &Cli,
    manifest: &mut RunManifest,
    axis_specs: &[String],
    quantity: Quantity,
) -> Result<i32> {
    if axis_specs.is_empty() || axis_specs.len() > 2 {
        return Err(Error::BadAxisSpec(
            "expected one or two --axis specifications".into(),
        ));
    }
    let p = load_params(cli, default_params(), manifest)?;
    let axes: Vec<(String, Vec<f64>)> = axis_specs
        .iter()
        .map(|s| parse_axis(s))
        .collect::<Result<_>>()?;
    // validate the field names up front so typos are usage errors
    for (field, _) in &axes {
        let mut probe = p;
        set_field(&mut probe, field, 1.0)?;
    }

    // row-major over the declared axes; a single axis sweeps one column
    let second = axes.get(1);
    let grid: Vec<(f64, Option<f64>)> = match second {
        Some((_, vals2)) => axes[0]
            .1
            .iter()
            .flat_map(|&v1| vals2.iter().map(move |&v2| (v1, Some(v2))))
            .collect(),
        None => axes[0].1.iter().map(|&v1| (v1, None)).collect(),
    };

    let results: Vec<Result<(f64, String)>> = grid
        .par_iter()
        .map(|&(v1, v2)| {
            let mut q = p;
            set_field(&mut q, &axes[0].0, v1)?;
            if let (Some(v2), Some((f2, _))) = (v2, second) {
                set_field(&mut q, f2, v2)?;
            }
            let q = q.validated()?;
            quantity_value(quantity, &q)
        })
        .collect();

    let mut rows = Vec::with_capacity(grid.len());
    let mut n_failed = 0usize;
    let mut first_error: Option<Error> = None;
    for ((v1, v2), result) in grid.iter().zip(results) {
        let (value, validity) = match result {
            Ok(pair) => pair,
            Err(e) => {
                n_failed += 1;
                if first_error.is_none() {
                    first_error = Some(e);
                }
                (f64::NAN, "error".to_string())
            }
        };
        let mut row = vec![Cell::Num(*v1)];
        if let Some(v2) = v2 {
            row.push(Cell::Num(*v2));
        }
        row.push(Cell::Num(value));
        row.push(Cell::Text(validity));
        rows.push(row);
    }

    let mut header = vec![axes[0].0.as_str()];
    if let Some((f2, _)) = second {
        header.push(f2.as_str());
    }
    let qname = quantity
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    header.push(&qname);
    header.push("validity");

    let file = write_table(cli, "sweep", &header, &rows)?;
    manifest.outputs.push(file);
    if n_failed > 0 {
        manifest.status = "partial".to_string();
        let e = first_error.expect("counted at least one failure");
        manifest
            .warnings
            .push(format!("{n_failed} sweep cells failed; first error: {e}"));
        return Ok(3);
    }
    Ok(0)
}

/// Parse `field=lo:hi:n` (inclusive linear grid) or `field=value`.
fn parse_axis(spec: &str) -> Result<(String, Vec<f64>)> {
    let (field, rest) = spec
        .split_once('=')
        .ok_or_else(|| Error::BadAxisSpec(format!("expected `field=...`, got `{spec}`")))?;
    let parts: Vec<&str> = rest.split(':').collect();
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|e| Error::BadAxisSpec(format!("bad number `{s}` in `{spec}`: {e}")))
    };
    let values = match parts.as_slice() {
        [v] => vec![parse(v)?],
        [lo, hi, n] => {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|e| Error::BadAxisSpec(format!("bad count `{n}` in `{spec}`: {e}")))?;
            if n == 0 {
                return Err(Error::BadAxisSpec(format!("zero points in `{spec}`")));
            }
            linspace(parse(lo)?, parse(hi)?, n)
        }
        _ => {
            return Err(Error::BadAxisSpec(format!(
                "expected `field=value` or `field=lo:hi:n`, got `{spec}`"
            )))
        }
    };
    Ok((field.trim().to_string(), values))
}

fn validity_name(v: quadratures::Validity) -> &'static str {
    match v {
        quadratures::Validity::Ok => "ok",
        quadratures::Validity::Marginal => "marginal",
        quadratures::Validity::Outside => "outside",
    }
}

fn quantity_value(quantity: Quantity, p: &SystemParams) -> Result<(f64, String)> {
    let flag = |r: analytics::FlaggedRate| {
        let validity = if r.outside_validity { "outside" } else { "ok" };
        (r.value, validity.to_string())
    };
    Ok(match quantity {
        Quantity::GammaOpt => flag(analytics::optical_damping(p)),
        Quantity::DeltaOmegaOpt => flag(analytics::frequency_shift(p)),
        Quantity::Beta0Sq => (analytics::intracavity_energy(p), "ok".to_string()),
        Quantity::NMin => (spectrum::n_min_weak_coupling(p)?, "ok".to_string()),
        Quantity::SNIntegral => {
            let grid = spectrum::noise_spectrum(p, &spectrum::GridSpec::default_for(p))?;
            (spectrum::mean_phonon_number(&grid).value, "ok".to_string())
        }
        Quantity::VarX => {
            let v = quadratures::quadrature_variances(p);
            (v.var_x, validity_name(v.validity).to_string())
        }
        Quantity::VarY => {
            let v = quadratures::quadrature_variances(p);
            (v.var_y, validity_name(v.validity).to_string())
        }
        Quantity::HeatingRatio => {
            let v = quadratures::quadrature_variances(p);
            (
                quadratures::heating_ratio(p),
                validity_name(v.validity).to_string(),
            )
        }
    })
}

// ---------------------------------------------------------------------------
// simulate command

struct SimArgs {
    duration: f64,
    dt: Option<f64>,
    n_traj: usize,
    x0: f64,
    scheme: SchemeArg,
    drive: DriveArg,
    freeze_mirror: bool,
    thermal_init: bool,
    record_every: usize,
    estimate: EstimateArg,
    save_trajectories: usize,
}

fn cmd_simulate(cli: &Cli, manifest: &mut RunManifest, args: &SimArgs) -> Result<i32> {
    let p = load_params(cli, default_params(), manifest)?;
    let seed = cli.seed.unwrap_or(42);
    manifest.seed = Some(seed);

    let dt = match args.dt {
        Some(dt) => dt,
        None => {
            // half the integrator stability bound
            let mut bound = 1.0 / p.kappa / 50.0;
            if !args.freeze_mirror {
                bound = bound.min(1.0 / p.omega_m / 50.0);
                let gamma_eff = p.gamma_m + analytics::optical_damping(&p).value.abs();
                if gamma_eff > 0.0 {
                    bound = bound.min(1.0 / gamma_eff / 50.0);
                }
            }
            bound / 2.0
        }
    };
    let mut cfg = SimConfig::new(dt, args.duration, args.n_traj, seed, args.x0 * p.x_zpt());
    cfg.scheme = match args.scheme {
        SchemeArg::EulerMaruyama => Scheme::EulerMaruyama,
        SchemeArg::ExponentialVerlet => Scheme::ExponentialVerlet,
    };
    cfg.drive = match args.drive {
        DriveArg::Constant => DriveMode::Constant,
        DriveArg::SineModulated => DriveMode::SineModulated,
    };
    cfg.freeze_mirror = args.freeze_mirror;
    cfg.thermal_init = args.thermal_init;
    cfg.record_every = args.record_every;

    let ensemble = langevin::simulate_ensemble(&p, &cfg)?;

    for (k, traj) in ensemble.iter().take(args.save_trajectories).enumerate() {
        let name = format!("traj_{k:04}.csv");
        let file = fs::File::create(cli.out.join(&name))?;
        traj.write_csv(std::io::BufWriter::new(file))?;
        manifest.outputs.push(name);
    }
    if ensemble.len() > args.save_trajectories {
        manifest.warnings.push(format!(
            "wrote {} of {} trajectories (see --save-trajectories)",
            args.save_trajectories,
            ensemble.len()
        ));
    }

    let gamma_opt = analytics::optical_damping(&p);
    let shift = analytics::frequency_shift(&p);
    let gamma_eff = p.gamma_m + gamma_opt.value;
    let unstable = gamma_eff < 0.0;
    let mut estimates = serde_json::json!({
        "analytic": {
            "gamma_opt": gamma_opt.value,
            "delta_omega_opt": shift.value,
            "gamma_eff": gamma_eff,
            "omega_eff": p.omega_m + shift.value,
            "outside_validity": gamma_opt.outside_validity,
        },
        "unstable": unstable,
    });
    match args.estimate {
        EstimateArg::None => {}
        EstimateArg::Ringdown => {
            match langevin::estimate_damping_and_shift(&ensemble, &p, &cfg) {
                Ok((g, w)) => {
                    estimates["fitted"] = serde_json::json!({
                        "gamma_eff": g,
                        "omega_eff": w,
                    });
                }
                Err(e) => {
                    estimates["fit_error"] = serde_json::json!(e.to_string());
                    manifest.warnings.push(format!("ring-down fit failed: {e}"));
                }
            }
        }
        EstimateArg::Quadratures => {
            let analytic = quadratures::quadrature_variances(&p);
            estimates["analytic_quadratures"] = serde_json::to_value(analytic)?;
            match langevin::quadrature_variance_mc(&p, &cfg) {
                Ok((vx, vy)) => {
                    estimates["fitted"] = serde_json::json!({
                        "var_x": vx,
                        "var_y": vy,
                    });
                }
                Err(e) => {
                    estimates["fit_error"] = serde_json::json!(e.to_string());
                    manifest
                        .warnings
                        .push(format!("quadrature estimate failed: {e}"));
                }
            }
        }
    }
    fs::write(
        cli.out.join("estimates.json"),
        serde_json::to_string_pretty(&estimates)?,
    )?;
    manifest.outputs.push("estimates.json".to_string());
    Ok(0)
}

// ---------------------------------------------------------------------------
// validate command

fn cmd_validate(cli: &Cli, manifest: &mut RunManifest, gamma_opt_scale: f64) -> Result<i32> {
    let tweaks = Tweaks { gamma_opt_scale };
    let results = run_all(&tweaks);
    let mut all_passed = true;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} [{status}] {} ({:.2} s): {}",
            r.id, r.name, r.runtime_s, r.detail
        );
        all_passed &= r.passed;
    }
    fs::write(
        cli.out.join("report.json"),
        serde_json::to_string_pretty(&results)?,
    )?;
    manifest.outputs.push("report.json".to_string());
    if !all_passed {
        manifest.status = "failed".to_string();
        manifest.error = Some("one or more validation criteria failed".to_string());
        return Ok(1);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// gnuplot command

fn cmd_gnuplot(cli: &Cli, manifest: &mut RunManifest, csv: &Path) -> Result<i32> {
    let text = fs::read_to_string(csv)
        .map_err(|e| Error::ConfigMissing(format!("{}: {e}", csv.display())))?;
    let header = text
        .lines()
        .next()
        .ok_or_else(|| Error::InvalidParams(format!("{}: empty file", csv.display())))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "{}: need at least two CSV columns",
            csv.display()
        )));
    }

    let stem = csv
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot")
        .to_string();
    let mut script = String::new();
    let _ = writeln!(script, "# generated by optomech; run: gnuplot -p {stem}.gp");
    let _ = writeln!(script, "set datafile separator ','");
    let _ = writeln!(script, "set key off");
    let _ = writeln!(script, "set xlabel '{}'", columns[0]);
    let _ = writeln!(script, "set ylabel '{}'", columns[1]);
    if columns[0] == "t" {
        // time series: plot the second column against time
        let _ = writeln!(script, "plot '{}' skip 1 using 1:2 with lines", csv.display());
    } else {
        let value = columns.get(2).copied().unwrap_or(columns[1]);
        let _ = writeln!(script, "set cblabel '{value}'");
        let _ = writeln!(script, "set view map");
        let _ = writeln!(
            script,
            "splot '{}' skip 1 using 1:2:3 with points pointtype 5 pointsize 0.8 palette",
            csv.display()
        );
    }
    let name = format!("{stem}.gp");
    fs::write(cli.out.join(&name), script)?;
    manifest.outputs.push(name);
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_spec_single_value() {
        let (field, values) = parse_axis("gamma_l=2e4").unwrap();
        assert_eq!(field, "gamma_l");
        assert_eq!(values, vec![2e4]);
    }

    #[test]
    fn axis_spec_range() {
        let (field, values) = parse_axis("detuning=-8e5:8e5:5").unwrap();
        assert_eq!(field, "detuning");
        assert_eq!(values.len(), 5);
        assert_eq!(values[0], -8e5);
        assert_eq!(values[4], 8e5);
        assert_eq!(values[2], 0.0);
    }

    #[test]
    fn axis_spec_errors() {
        assert!(matches!(parse_axis("nocolon"), Err(Error::BadAxisSpec(_))));
        assert!(matches!(parse_axis("a=1:2"), Err(Error::BadAxisSpec(_))));
        assert!(matches!(parse_axis("a=1:2:0"), Err(Error::BadAxisSpec(_))));
        assert!(matches!(parse_axis("a=x:2:3"), Err(Error::BadAxisSpec(_))));
    }

    #[test]
    fn set_field_roundtrip() {
        let mut p = default_params();
        set_field(&mut p, "gamma_l", 12345.0).unwrap();
        assert_eq!(p.gamma_l, 12345.0);
        assert!(set_field(&mut p, "bogus", 1.0).is_err());
    }

    #[test]
    fn t_eff_override_sets_n_th() {
        let mut p = default_params();
        let t = 2.0 * HBAR * p.omega_m / KB; // n_th = 2
        set_field(&mut p, "t_eff", t).unwrap();
        assert!((p.n_th - 2.0).abs() < 1e-12);
    }
}
