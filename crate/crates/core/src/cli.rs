//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 when a
//! simulation aborts at runtime.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{compare_special_solution, gain_relation_k2, is_odd_ratio_exponent, SpecialSolutionParams};
use crate::config::{load_config, ScenarioConfig};
use crate::csv::{emit_csv, format_number};
use crate::error::{Error, Result};
use crate::observer::{run_demo, settling_time, DemoObserver, DemoState, DEMO_INITIAL_ESTIMATES, DEMO_INITIAL_STATES};
use crate::sim::{run_simulation, sweep_tau, RunSummary, SimulationOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "formation", version, about = "Target-centric UAV formation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its trajectory CSV and summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "output")]
        out: PathBuf,
        /// Override the controller's tau.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[arg(long, value_enum)]
        observer: Option<Switch>,
    },
    /// Run a scenario once per tau value.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list, e.g. `-0.2,-0.1,0,0.1,0.2`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        taus: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the linear and fractional-power observers on the scalar demo system.
    DemoObserver {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
    },
    /// Compare the closed-form special solution with RK4 integration.
    OracleSpecial {
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long)]
        x0: f64,
        /// Proportional gain; the derivative gain follows from the gain relation.
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.3)]
        k1: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stem(config: &Path) -> String {
    config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn print_summary(out: &mut dyn Write, label: &str, s: &RunSummary) -> std::io::Result<()> {
    let fmt_list = |v: &[f64]| v.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(" ");
    writeln!(out, "{label}: tau={}", format_number(s.tau))?;
    match s.convergence_time {
        Some(t) => writeln!(out, "  converged at t={}", format_number(t))?,
        None => writeln!(out, "  not converged")?,
    }
    writeln!(
        out,
        "  min lambda2={} ({})",
        format_number(s.min_lambda2),
        if s.connectivity_maintained {
            "connected throughout"
        } else {
            "connectivity lost"
        }
    )?;
    writeln!(out, "  control effort: {}", fmt_list(&s.control_effort))?;
    writeln!(out, "  final separations: {}", fmt_list(&s.final_separations))?;
    if s.isolation_events > 0 {
        writeln!(out, "  isolation events: {}", s.isolation_events)?;
    }
    Ok(())
}

fn save_run(dir: &Path, name: &str, output: &SimulationOutput) -> Result<()> {
    emit_csv(&output.log, dir.join(format!("{name}.csv")))?;
    write_json(&dir.join(format!("{name}.summary.json")), &output.summary)
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match command {
        Command::Run {
            config,
            out,
            tau,
            observer,
        } => {
            let mut cfg: ScenarioConfig = load_config(&config)?;
            if let Some(tau) = tau {
                cfg = cfg.with_tau(tau)?;
            }
            if let Some(switch) = observer {
                cfg.observer.enabled = switch == Switch::On;
            }
            let output = run_simulation(&cfg)?;
            create_dir(&out)?;
            let name = format!("{}_tau{}", stem(&config), format_number(cfg.controller.tau()));
            save_run(&out, &name, &output)?;
            print_summary(stdout, &name, &output.summary).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { config, taus, out } => {
            let cfg = load_config(&config)?;
            for &tau in &taus {
                cfg.with_tau(tau)?;
            }
            create_dir(&out)?;
            let mut summaries = Vec::new();
            let mut failed = false;
            for (tau, result) in taus.iter().zip(sweep_tau(&cfg, &taus)) {
                let name = format!("{}_tau{}", stem(&config), format_number(*tau));
                match result {
                    Ok(output) => {
                        save_run(&out, &name, &output)?;
                        print_summary(stdout, &name, &output.summary).map_err(io)?;
                        summaries.push(output.summary);
                    }
                    Err(e) => {
                        failed = true;
                        writeln!(stderr, "{name}: {e}").map_err(io)?;
                    }
                }
            }
            write_json(&out.join(format!("{}_sweep.json", stem(&config))), &summaries)?;
            Ok(if failed { EXIT_RUNTIME } else { EXIT_OK })
        }
        Command::DemoObserver { out, dt, horizon } => {
            let initial = DemoState::new(DEMO_INITIAL_STATES, DEMO_INITIAL_ESTIMATES);
            let linear = run_demo(initial, DemoObserver::Linear, dt, horizon)?;
            let nonlinear = run_demo(initial, DemoObserver::Nonlinear, dt, horizon)?;
            create_dir(&out)?;
            let path = out.join("observer_demo.csv");
            let mut text = String::from(
                "t,y1,y2,linear_y1hat,linear_y2hat,linear_err,nonlinear_y1hat,nonlinear_y2hat,nonlinear_err\n",
            );
            for ((t, l), (_, n)) in linear.iter().zip(&nonlinear) {
                let fields = [
                    *t,
                    l.y1,
                    l.y2,
                    l.y1_hat,
                    l.y2_hat,
                    l.error_norm(),
                    n.y1_hat,
                    n.y2_hat,
                    n.error_norm(),
                ];
                text.push_str(&fields.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(","));
                text.push('\n');
            }
            std::fs::write(&path, text).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let at = |trace: &[(f64, DemoState)], t: f64| {
                trace
                    .iter()
                    .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
                    .map_or(f64::NAN, |(_, s)| s.error_norm())
            };
            for (label, trace) in [("linear", &linear), ("nonlinear", &nonlinear)] {
                let settle = settling_time(trace, 0.05).map_or("never".to_string(), format_number);
                writeln!(
                    stdout,
                    "{label}: error at t=5 {}, below 0.05 from t={settle}",
                    format_number(at(trace, 5.0))
                )
                .map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::OracleSpecial { tau, x0, k1, dt } => {
            let params = SpecialSolutionParams::new(x0, tau, k1, gain_relation_k2(tau, k1))?;
            if !is_odd_ratio_exponent(tau) {
                writeln!(
                    stderr,
                    "warning: (1+2tau)/(1+tau) is not a ratio of odd integers; (-1)^p is still taken as -1"
                )
                .map_err(io)?;
            }
            let touchdown = params.touchdown();
            let cmp = compare_special_solution(&params, dt, 0.96 * touchdown)?;
            writeln!(
                stdout,
                "k1={} k2={}",
                format_number(params.k1()),
                format_number(params.k2())
            )
            .map_err(io)?;
            writeln!(stdout, "touchdown t={}", format_number(touchdown)).map_err(io)?;
            writeln!(
                stdout,
                "max deviation on [0, {}] = {}",
                format_number(cmp.t_end),
                format_number(cmp.max_deviation)
            )
            .map_err(io)?;
            writeln!(
                stdout,
                "integrated state at touchdown = ({}, {})",
                format_number(cmp.state_at_touchdown.0),
                format_number(cmp.state_at_touchdown.1)
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}
