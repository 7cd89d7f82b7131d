use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mmwave_relay::config::ConfigSource;
use mmwave_relay::sim::{estimate, Quantity, SimulationMode};
use mmwave_relay::sweep::{emit_plot_script, run_sweep, write_csv, SweepSpec};
use mmwave_relay::Scenario;

#[derive(Parser)]
#[command(
    name = "mmwave-relay",
    version,
    about = "Blockage and relay-strategy evaluation for mmWave street deployments"
)]
struct Cli {
    /// Master seed for simulated engines.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo drops per simulated point.
    #[arg(long, global = true)]
    drops: Option<u64>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep recipe; writes a CSV and a gnuplot script next to it.
    Sweep { spec: PathBuf },
    /// Check a configuration file against the model's admissibility rules.
    Validate {
        config: PathBuf,
        /// Override a value, e.g. `--set traffic.vehicle_density=6`.
        #[arg(long = "set", value_name = "PATH=VALUE")]
        overrides: Vec<String>,
    },
    /// Compare one analytic quantity with the simulator.
    Oracle {
        /// One of p_human, p_vehicle, p_joint, p_coverage, p_ue_cow, p_cow_ap,
        /// se_ue_ap, se_ue_cow, se_cow_ap, se_baseline, se_conservative, se_aggressive.
        quantity: String,
        /// Longitudinal position in meters, for quantities that take one.
        #[arg(allow_negative_numbers = true)]
        position: Option<f64>,
        /// Config file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a value, e.g. `--set traffic.vehicle_density=6`.
        #[arg(long = "set", value_name = "PATH=VALUE")]
        overrides: Vec<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Relaxed,
    Both,
}

#[derive(Serialize)]
struct OracleRow {
    quantity: String,
    mode: &'static str,
    analytic: f64,
    sim_mean: f64,
    half_width_95: f64,
    n_drops: u64,
    within_tolerance: bool,
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<Scenario> {
    let mut source = match path {
        Some(p) => ConfigSource::from_path(p)?,
        None => ConfigSource::default(),
    };
    for a in overrides {
        source.apply_assignment(a)?;
    }
    let (street, traffic) = source.resolve()?.into_parts()?;
    Ok(Scenario::checked(street, traffic)?)
}

fn cmd_sweep(cli: &Cli, path: &Path) -> Result<()> {
    let mut spec = SweepSpec::from_path(path)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(drops) = cli.drops {
        spec.drops = drops;
    }
    let out =
        cli.out.clone().or_else(|| spec.out.clone()).unwrap_or_else(|| {
            PathBuf::from(format!("{}.csv", path.file_stem().unwrap_or_default().to_string_lossy()))
        });
    let rows = run_sweep(&spec)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&rows, file)?;
    let csv_name = out.file_name().unwrap_or_default().to_string_lossy().into_owned();
    let script = emit_plot_script(&rows, &spec.template, &csv_name, &spec.x_label())?;
    let script_path = out.with_extension("gp");
    std::fs::write(&script_path, script).with_context(|| format!("writing {}", script_path.display()))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} rows -> {} (plot: {})", rows.len(), out.display(), script_path.display());
    if failed > 0 {
        eprintln!("warning: {failed} rows failed; see the error column");
    }
    Ok(())
}

fn cmd_validate(config: &Path, overrides: &[String]) -> Result<bool> {
    let mut source = ConfigSource::from_path(config)?;
    for a in overrides {
        source.apply_assignment(a)?;
    }
    let (street, traffic) = source.resolve()?.into_parts()?;
    let report = mmwave_relay::config::validate(&street, &traffic);
    if report.is_admissible() {
        println!("{}: admissible", config.display());
    } else {
        println!("{}: not admissible\n{report}", config.display());
    }
    Ok(report.is_admissible())
}

fn cmd_oracle(
    cli: &Cli,
    name: &str,
    position: Option<f64>,
    config: Option<&Path>,
    overrides: &[String],
    mode: ModeArg,
) -> Result<()> {
    let quantity = Quantity::parse(name, position).map_err(anyhow::Error::msg)?;
    let s = load_config(config, overrides)?;
    let analytic = quantity.analytic(&s)?;
    let drops = cli.drops.unwrap_or(100_000);
    if drops == 0 {
        bail!("--drops must be at least 1");
    }
    let seed = cli.seed.unwrap_or(1);
    let modes: &[(&str, SimulationMode)] = match mode {
        ModeArg::Analytic => &[("analytic", SimulationMode::analytic())],
        ModeArg::Relaxed => &[("relaxed", SimulationMode::relaxed())],
        ModeArg::Both => &[("analytic", SimulationMode::analytic()), ("relaxed", SimulationMode::relaxed())],
    };
    let mut rows = Vec::new();
    println!("{quantity}: analytic {analytic:.6}");
    for &(label, m) in modes {
        let e = estimate(&s, m, quantity, drops, seed);
        let tol = if quantity.is_probability() { 0.02 } else { 0.02 * analytic.abs() };
        let ok = (e.mean - analytic).abs() <= tol.max(2.0 * e.half_width_95);
        println!(
            "  sim ({label:8}) {:.6} +/- {:.6}  n={}  diff {:+.6}",
            e.mean,
            e.half_width_95,
            e.n_drops,
            e.mean - analytic
        );
        rows.push(OracleRow {
            quantity: quantity.to_string(),
            mode: label,
            analytic,
            sim_mean: e.mean,
            half_width_95: e.half_width_95,
            n_drops: e.n_drops,
            within_tolerance: ok,
        });
    }
    if let Some(out) = &cli.out {
        let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Sweep { spec } => cmd_sweep(cli, spec).map(|_| true),
        Command::Validate { config, overrides } => cmd_validate(config, overrides),
        Command::Oracle { quantity, position, config, overrides, mode } => {
            cmd_oracle(cli, quantity, *position, config.as_deref(), overrides, *mode).map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e:#}");
            ExitCode::from(2)
        }
    }
}
