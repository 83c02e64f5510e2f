use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavetrig::commands::{self, sweep_exit_code};
use wavetrig::config::{ModeSpec, Overrides, RunConfig};
use wavetrig::error::{exit, CliError, CliResult};
use wavetrig_core::grid::PoincareSource;
use wavetrig_core::trigger::Eta0Variant;

/// Event-triggered damping of the linear wave equation: certificate design,
/// simulation, parameter sweeps and a-posteriori verification.
#[derive(Debug, Parser)]
#[command(name = "wavetrig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design a stability certificate and write certificate.json.
    Design(RunArgs),
    /// Design, simulate and check one run; writes series, events and summary.
    Simulate(RunArgs),
    /// Run one cell per (alpha, length) pair and write sweep.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated damping gains.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        alphas: Vec<f64>,
        /// Comma-separated domain lengths.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        lengths: Vec<f64>,
    },
    /// Re-check a run directory written by `simulate`.
    Verify {
        dir: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration; defaults are used when omitted.
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Interval length, or side `a` of a rectangle (aspect ratio kept).
    #[arg(long)]
    length: Option<f64>,
    /// Interior points (per axis for a rectangle).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// event-triggered, continuous-damping, uncontrolled, periodic or periodic:<period>.
    #[arg(long)]
    mode: Option<ModeSpec>,
    /// v0 or energy-cross.
    #[arg(long)]
    eta0_variant: Option<Eta0Variant>,
    /// discrete, dirichlet-closed-form, wirtinger or user.
    #[arg(long)]
    comega_source: Option<PoincareSource>,
    /// Explicit Poincare constant (implies --comega-source user).
    #[arg(long)]
    comega: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> CliResult<RunConfig> {
        if let Some(p) = &self.config {
            if !p.is_file() {
                return Err(CliError::Usage(format!("config file {} not found", p.display())));
            }
        }
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        cfg.apply(&Overrides {
            alpha: self.alpha,
            length: self.length,
            n: self.n,
            dt: self.dt,
            t_end: self.t_end,
            mode: self.mode,
            eta0_variant: self.eta0_variant,
            comega_source: self.comega_source,
            comega: self.comega,
            out: self.out.clone(),
        });
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Design(args) => {
            let cfg = args.config()?;
            let c = commands::cmd_design(&cfg)?;
            println!(
                "certificate: C_omega={:.6} gamma0={:.6e} gamma1={:.6e} epsilon={:.6e} beta={:.6e} delta={:.6e} theta={:.6e} K={:.6e}",
                c.c_omega(),
                c.gamma0,
                c.gamma1,
                c.epsilon,
                c.beta,
                c.delta,
                c.theta,
                c.k
            );
            println!("wrote {}", cfg.out.join(wavetrig::output::CERTIFICATE_FILE).display());
            Ok(exit::OK)
        }
        Command::Simulate(args) => {
            let cfg = args.config()?;
            let o = commands::cmd_simulate(&cfg)?;
            let s = &o.summary;
            println!(
                "{}: {} updates over {} steps (ratio {:.4}), delta={:.4e}, delta_emp={}",
                s.run.mode.name(),
                s.event_count,
                s.step_count,
                s.update_ratio,
                s.certificate.delta,
                s.delta_emp.map_or("n/a".into(), |d| format!("{d:.4e}"))
            );
            for v in &s.checks.verdicts {
                println!("{:<18} {}  {}", v.check, if v.passed { "PASS" } else { "FAIL" }, v.detail);
            }
            println!("wrote {}", cfg.out.display());
            Ok(exit::OK)
        }
        Command::Sweep { run, alphas, lengths } => {
            let cfg = run.config()?;
            let rows = commands::cmd_sweep(&cfg, &alphas, &lengths)?;
            for r in &rows {
                println!(
                    "alpha={:<6} L={:<6} C_omega={:<10} {}",
                    r.alpha,
                    r.length,
                    r.c_omega.map_or("n/a".into(), |c| format!("{c:.6}")),
                    r.status
                );
            }
            println!("wrote {}", cfg.out.join("sweep.csv").display());
            Ok(sweep_exit_code(&rows))
        }
        Command::Verify { dir } => {
            let suite = commands::cmd_verify(&dir)?;
            for v in &suite.verdicts {
                println!("{:<18} {}  {}", v.check, if v.passed { "PASS" } else { "FAIL" }, v.detail);
            }
            if suite.passed() {
                println!("verdict: PASS");
                Ok(exit::OK)
            } else {
                println!("verdict: FAIL");
                Ok(exit::VERIFY_FAILED)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("wavetrig: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
