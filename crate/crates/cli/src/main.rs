use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use arc_audit::{
    cmd_audit, cmd_bounds, cmd_covering, cmd_estimate, cmd_experiment, cmd_gen_data, load_config, CliError, CliResult,
    Context,
};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "arc-audit", version, about = "Adversarial Rademacher complexity bounds, estimates and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config; unknown keys are rejected.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the report and any data, models or traces.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-draw or per-epoch traces.
    #[arg(long)]
    trace: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset CSV.
    GenData(Common),
    /// Evaluate the closed-form bounds and comparison bounds.
    Bounds(Common),
    /// Monte-Carlo estimate of RC or ARC.
    Estimate(Common),
    /// Estimate and check against the bounds; exits 1 on FAIL.
    Audit(Common),
    /// Standard vs adversarial training sweep.
    Experiment(Common),
    /// Covering numbers and the entropy integral.
    Covering(Common),
    /// Print the version.
    Version,
}

fn run<C, R>(
    common: &Common,
    set_seed: impl FnOnce(&mut C, u64),
    f: impl FnOnce(&C, &Context) -> CliResult<arc_audit::Report<C, R>>,
) -> CliResult<bool>
where
    C: DeserializeOwned + Serialize + Clone,
    R: Serialize,
{
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let mut cfg: C = load_config(&common.config)?;
    if let Some(s) = common.seed {
        set_seed(&mut cfg, s);
    }
    let ctx = Context { out: common.out.clone(), trace: common.trace };
    let report = f(&cfg, &ctx)?;
    emit(&report.to_json()?)?;
    Ok(true)
}

// A closed stdout (e.g. piping into `head`) is not an error.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Internal(e.to_string())),
        _ => Ok(()),
    }
}

fn dispatch(cmd: Command) -> CliResult<bool> {
    match cmd {
        Command::GenData(c) => run(&c, |cfg: &mut arc_audit::GenDataConfig, s| cfg.seed = s, cmd_gen_data),
        Command::Bounds(c) => run(&c, |cfg: &mut arc_audit::BoundsConfig, s| cfg.seed = s, cmd_bounds),
        Command::Estimate(c) => run(&c, |cfg: &mut arc_audit::EstimateConfig, s| cfg.seed = s, cmd_estimate),
        Command::Audit(c) => {
            let mut pass = true;
            run(
                &c,
                |cfg: &mut arc_audit::AuditConfig, s| cfg.estimate.seed = s,
                |cfg, ctx| {
                    let r = cmd_audit(cfg, ctx)?;
                    pass = r.result.pass;
                    eprintln!("audit: {}", if pass { "PASS" } else { "FAIL" });
                    Ok(r)
                },
            )?;
            Ok(pass)
        }
        Command::Experiment(c) => run(&c, |cfg: &mut arc_audit::ExperimentRunConfig, s| cfg.seed = s, cmd_experiment),
        Command::Covering(c) => run(&c, |cfg: &mut arc_audit::CoveringConfig, s| cfg.seed = s, cmd_covering),
        Command::Version => {
            emit(&format!("arc-audit {}", env!("CARGO_PKG_VERSION")))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
