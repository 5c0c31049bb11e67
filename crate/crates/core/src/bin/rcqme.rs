use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rcqme::harness::{debug, m_convergence_report, preset, run_sweep, run_verification, SweepConfig, SweepKind};
use rcqme::methods::Method;
use rcqme::Error;

#[derive(Parser)]
#[command(name = "rcqme", version, about = "Heat current through a reaction-coordinate spin junction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write CSV.
    Sweep(Common),
    /// Tabulate the RC-QME current against the number of RC levels.
    ConvergeM(Common),
    /// Tabulate effective splitting and couplings against lambda.
    EffParams(Common),
    /// Run the built-in closed-form checks.
    Verify,
}

#[derive(Args)]
struct Common {
    /// Built-in recipe (fig3, fig4, fig5, fig6, fig7, fig8, fig9, fig11a, fig11b).
    #[arg(long)]
    preset: Option<String>,
    /// `key = value` file applied after the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single `key=value` override, applied last. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Convergence tolerance of the effective-parameter search.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest M tried by the effective-parameter search.
    #[arg(long)]
    m_max: Option<usize>,
    /// Write H, V, singular values and the steady state of the configured
    /// model into this directory.
    #[arg(long, value_name = "DIR")]
    dump_debug: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> rcqme::Result<SweepConfig> {
        let mut cfg = match &self.preset {
            Some(name) => preset(name)?,
            None => SweepConfig::default(),
        };
        if let Some(path) = &self.config {
            cfg.merge_text(&fs::read_to_string(path)?)?;
        }
        if let Some(tol) = self.tol {
            cfg.set("tol", &tol.to_string())?;
        }
        if let Some(m_max) = self.m_max {
            cfg.set("m_max", &m_max.to_string())?;
        }
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(out) = &self.output {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(cfg: &SweepConfig, text: &str) -> rcqme::Result<()> {
    match &cfg.output {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dump_if_requested(common: &Common, cfg: &SweepConfig) -> rcqme::Result<()> {
    if let Some(dir) = &common.dump_debug {
        let m = cfg
            .methods
            .iter()
            .find_map(|m| match m {
                Method::RcQme(m) => Some(*m),
                _ => None,
            })
            .unwrap_or(2);
        debug::dump(&cfg.model()?, m, dir)?;
        eprintln!("debug matrices for M = {m} written to {}", dir.display());
    }
    Ok(())
}

/// Returns `Ok(true)` when every point evaluated cleanly.
fn sweep(common: &Common, kind: Option<SweepKind>) -> rcqme::Result<bool> {
    let mut cfg = common.load()?;
    if let Some(kind) = kind {
        cfg.kind = kind;
    }
    dump_if_requested(common, &cfg)?;
    let out = run_sweep(&cfg, common.workers)?;
    emit(&cfg, &out.to_csv())?;
    eprintln!("{}", out.summary);
    Ok(!out.has_failures())
}

fn converge(common: &Common) -> rcqme::Result<bool> {
    let cfg = common.load()?;
    dump_if_requested(common, &cfg)?;
    let rows = m_convergence_report(&cfg.model()?, &cfg.m_list)?;
    let mut csv = String::from("M (1),J_h (Delta^2),rel_change (1),wall_time (s)\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.6e}\n",
            r.m, r.current, r.relative_change, r.wall_time_s
        ));
    }
    emit(&cfg, &csv)?;
    if let Some(last) = rows.last() {
        eprintln!("M = {}: J = {:.6e}, relative change {:.3e}", last.m, last.current, last.relative_change);
    }
    Ok(true)
}

fn verify() -> bool {
    let checks = run_verification();
    for c in &checks {
        println!("{c}");
    }
    checks.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sweep(c) => sweep(c, None),
        Command::EffParams(c) => sweep(c, Some(SweepKind::EffParams)),
        Command::ConvergeM(c) => converge(c),
        Command::Verify => Ok(verify()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        1
    } else {
        2
    }
}
