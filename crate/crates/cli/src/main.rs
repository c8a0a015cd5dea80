use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use pdc_modes_cli::config::{ConfigError, ExperimentConfig};
use pdc_modes_cli::experiments::{self, RunError, RunResult};
use pdc_modes_cli::output::Table;
use pdc_modes_cli::selftest;

#[derive(Parser)]
#[command(name = "pdc-modes", version, about = "Spatial Schmidt modes of two-crystal PDC and their fiber filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Intrinsic loss versus pump width.
    Fig3(FigArgs),
    /// Low- and high-gain eigenvalue spectrum.
    Fig5(FigArgs),
    /// Coupling efficiency versus fiber angular width.
    Fig6a(FigArgs),
    /// Cross-correlation versus fiber waist for the double-Gauss model.
    Fig8(FigArgs),
    /// Run the built-in oracle checks.
    Selftest,
    /// Dump the full Schmidt spectrum and leading radial profiles.
    Decompose {
        #[command(flatten)]
        common: FigArgs,
        /// Number of radial profiles to write.
        #[arg(long, default_value_t = 6)]
        profiles: usize,
    },
}

#[derive(Args, Clone, Default)]
struct FigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    nq: Option<String>,
    #[arg(long)]
    nphi: Option<String>,
    #[arg(long)]
    qmax_scale: Option<String>,
    /// `two-crystal` or `double-gauss`.
    #[arg(long)]
    model: Option<String>,
    /// Parametric gain G.
    #[arg(long)]
    gain: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    /// Double-Gauss eigenvalue ratio.
    #[arg(long)]
    mu: Option<String>,
    /// Sweep start (units as in the config file).
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    count: Option<String>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl FigArgs {
    fn load(&self, sweep: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let mut overrides: Vec<(String, &str)> = Vec::new();
        let plain = [
            ("nq", &self.nq),
            ("nphi", &self.nphi),
            ("qmax_scale", &self.qmax_scale),
            ("model", &self.model),
            ("gain_G", &self.gain),
            ("threshold", &self.threshold),
            ("mu", &self.mu),
        ];
        for (key, value) in plain {
            if let Some(v) = value {
                overrides.push((key.to_string(), v));
            }
        }
        for (suffix, value) in [("start", &self.start), ("stop", &self.stop), ("count", &self.count)] {
            if let Some(v) = value {
                let fig = sweep.ok_or_else(|| {
                    ConfigError::Invalid(format!("--{suffix} is not meaningful for this subcommand"))
                })?;
                overrides.push((format!("{fig}_{suffix}"), v));
            }
        }
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, got `{item}`")))?;
            overrides.push((k.trim().to_string(), v.trim()));
        }
        for (key, value) in overrides {
            cfg.set(&key, value).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::Invalid(format!("unknown key `{key}`")),
                other => other,
            })?;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(table: &Table, dir: &Path, name: &str, cfg: &ExperimentConfig) -> RunResult<()> {
    let path = table.write(dir, name, &cfg.render())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn fig3(args: &FigArgs) -> RunResult<()> {
    let cfg = args.load(Some("fig3"))?;
    let report = experiments::run_fig3(&cfg)?;
    write(&report.table, &cfg.out_dir, "fig3.csv", &cfg)?;
    for row in &report.rows {
        match row.loss {
            Some(l) => println!("a = {:7.2} um  loss = {:.4} %", row.pump_fwhm * 1e6, 100.0 * l),
            None => println!("a = {:7.2} um  loss = nan (failed)", row.pump_fwhm * 1e6),
        }
    }
    match report.loss_at_110um {
        Some(l) => println!("loss at a = 110 um: {:.4} %", 100.0 * l),
        None => println!("loss at a = 110 um: unavailable"),
    }
    if report.rows.iter().any(|r| r.loss.is_none()) {
        return Err(RunError::Invariant("some pump widths failed; rows flagged nan".into()));
    }
    Ok(())
}

fn fig5(args: &FigArgs) -> RunResult<()> {
    let cfg = args.load(None)?;
    let report = experiments::run_fig5(&cfg)?;
    write(&report.table, &cfg.out_dir, "fig5.csv", &cfg)?;
    println!("modes retained: {}", report.mode_count);
    println!("truncated weight: {:.3e}", report.truncated_weight);
    println!("K = {:.4}", report.schmidt_number);
    println!("K' (G = {}) = {:.4}", cfg.params.gain, report.k_prime);
    println!("lambda_00 = {:.6}  lambda'_00 = {:.6}", report.lambda00, report.lambda_prime00);
    Ok(())
}

fn fig6a(args: &FigArgs) -> RunResult<()> {
    let cfg = args.load(Some("fig6a"))?;
    let report = experiments::run_fig6a(&cfg)?;
    write(&report.table, &cfg.out_dir, "fig6a.csv", &cfg)?;
    println!(
        "peak: delta_theta = {:.3} mrad  T = {:.6}",
        report.peak.delta_theta * 1e3,
        report.peak.efficiency
    );
    println!("lambda'_00 = {:.6}", report.lambda_prime00);
    if report.maxima > 1 {
        warn!("coupling curve has {} local maxima", report.maxima);
    }
    Ok(())
}

fn fig8(args: &FigArgs) -> RunResult<()> {
    let cfg = args.load(Some("fig8"))?;
    let report = experiments::run_fig8(&cfg)?;
    write(&report.table, &cfg.out_dir, "fig8.csv", &cfg)?;
    for c in &report.curves {
        println!(
            "G = {}: mu = {:.6}  K' = {:.4}  minimum at w/w0 = {:.4}  range = {:.6}",
            c.gain,
            c.mu,
            c.k_prime,
            c.minimum_at(),
            c.range()
        );
    }
    Ok(())
}

fn decompose(args: &FigArgs, profiles: usize) -> RunResult<()> {
    let cfg = args.load(None)?;
    let report = experiments::run_decompose(&cfg, profiles)?;
    write(&report.spectrum, &cfg.out_dir, "spectrum.csv", &cfg)?;
    for (stem, table) in &report.profiles {
        write(table, &cfg.out_dir, &format!("{stem}.csv"), &cfg)?;
    }
    println!("K = {:.4}", report.schmidt_number);
    println!("K' (G = {}) = {:.4}", cfg.params.gain, report.k_prime);
    println!("truncated weight: {:.3e}", report.truncated_weight);
    Ok(())
}

fn run_selftest() -> RunResult<()> {
    let checks = selftest::run_selftest();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failed += 1;
        }
    }
    println!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        return Err(RunError::Invariant(format!("{failed} self-test checks failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fig3(a) => fig3(a),
        Command::Fig5(a) => fig5(a),
        Command::Fig6a(a) => fig6a(a),
        Command::Fig8(a) => fig8(a),
        Command::Selftest => run_selftest(),
        Command::Decompose { common, profiles } => decompose(common, *profiles),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
