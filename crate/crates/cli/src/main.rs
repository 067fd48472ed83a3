use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torus_ns_cli::config::{apply_text, RunConfig};
use torus_ns_cli::run::{self, RunStatus, EXIT_ERROR};
use torus_ns_cli::{CliError, Result};

/// Overrides the output directory from the config file and flags.
const OUTPUT_DIR_ENV: &str = "TORUS_NS_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "torus-ns",
    version,
    about = "Unit-interval induction solver for small-data Navier-Stokes on the 3-torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Induction run with certificate export and optional Picard cross-check.
    Run(Common),
    /// Bisection on delta for the empirical contraction threshold.
    BisectDelta(Common),
    /// Refit certificates from saved h/g history checkpoints.
    Check {
        #[command(flatten)]
        common: Common,
        /// Directory holding h_NNNN.ckpt and g_NNNN.ckpt files.
        #[arg(long)]
        fields: PathBuf,
    },
    /// Picard reference solve only.
    Oracle(Common),
}

/// Every flag mirrors the config key of the same name (dashes for underscores).
#[derive(Args, Debug)]
struct Common {
    /// Configuration file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generic override, repeatable: --set key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    decay_c: Option<String>,
    #[arg(long)]
    fp_tol: Option<String>,
    #[arg(long)]
    fp_max_iter: Option<String>,
    #[arg(long)]
    substeps: Option<String>,
    #[arg(long)]
    eps_div: Option<String>,
    #[arg(long)]
    k_max: Option<String>,
    #[arg(long)]
    truncation_rule: Option<String>,
    #[arg(long)]
    reality_symmetry: Option<String>,
    #[arg(long)]
    ic_kind: Option<String>,
    #[arg(long)]
    ic_checkpoint: Option<String>,
    #[arg(long)]
    rng_seed: Option<String>,
    #[arg(long)]
    horizon_m: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    emit: Option<String>,
    #[arg(long)]
    oracle_horizon: Option<String>,
    #[arg(long)]
    oracle_tol: Option<String>,
    #[arg(long)]
    bisect_steps: Option<String>,
    #[arg(long)]
    bisect_max_delta: Option<String>,
    #[arg(long)]
    bisect_horizon: Option<String>,
    #[arg(long)]
    threads: Option<String>,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("epsilon", &self.epsilon),
            ("beta", &self.beta),
            ("delta", &self.delta),
            ("decay_c", &self.decay_c),
            ("fp_tol", &self.fp_tol),
            ("fp_max_iter", &self.fp_max_iter),
            ("substeps", &self.substeps),
            ("eps_div", &self.eps_div),
            ("k_max", &self.k_max),
            ("truncation_rule", &self.truncation_rule),
            ("reality_symmetry", &self.reality_symmetry),
            ("ic_kind", &self.ic_kind),
            ("ic_checkpoint", &self.ic_checkpoint),
            ("rng_seed", &self.rng_seed),
            ("horizon_m", &self.horizon_m),
            ("output_dir", &self.output_dir),
            ("emit", &self.emit),
            ("oracle_horizon", &self.oracle_horizon),
            ("oracle_tol", &self.oracle_tol),
            ("bisect_steps", &self.bisect_steps),
            ("bisect_max_delta", &self.bisect_max_delta),
            ("bisect_horizon", &self.bisect_horizon),
            ("threads", &self.threads),
        ]
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            apply_text(&mut cfg, &text)?;
        }
        for (key, value) in self.flags() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) =
                kv.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects key=value, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        cfg.validate()?;
        if cfg.threads > 0 {
            // fails only if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
        }
        Ok(cfg)
    }
}

fn report_status(status: &RunStatus) -> i32 {
    if *status == RunStatus::Success {
        println!("status: success");
    } else {
        eprintln!("status: {}", status.describe());
    }
    status.exit_code()
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let report = run::run(&cfg)?;
            println!("steps completed: {} of {}", report.steps.len(), cfg.horizon_m);
            if let Some(last) = report.steps.last() {
                println!("phi envelope at m = {}: {:e}", last.record.m, last.record.phi_envelope);
            }
            if let Some(o) = &report.oracle {
                println!("oracle: {} Picard iterations, max difference {:e}", o.iterations, o.max_diff);
            }
            println!("outputs: {}", cfg.output_dir.display());
            Ok(report_status(&report.status))
        }
        Command::BisectDelta(common) => {
            let cfg = common.resolve()?;
            let res = run::bisect_delta(&cfg)?;
            match res.upper {
                Some(up) => println!("contraction threshold in [{:e}, {:e}]", res.lower, up),
                None => println!("contraction holds up to bisect_max_delta = {:e}", res.lower),
            }
            Ok(0)
        }
        Command::Check { common, fields } => {
            let cfg = common.resolve()?;
            let table = run::check(&cfg, &fields)?;
            println!("refitted {} history entries into {}", table.rows.len(), cfg.output_dir.display());
            Ok(0)
        }
        Command::Oracle(common) => {
            let cfg = common.resolve()?;
            let res = run::oracle_only(&cfg)?;
            if res.status == RunStatus::Success {
                println!("Picard converged in {} iterations", res.iterations);
            }
            Ok(report_status(&res.status))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
