use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rissec::harness::mean_by_point;
use rissec::io::{emit_convergence_trace, emit_csv, load_experiment, load_system_config};
use rissec::oracle::{oracle_config, oracle_suite};
use rissec::seed::trial_seed;
use rissec::{draw_trial, run_monte_carlo};
use rissec_core::ao::AoSettings;
use rissec_core::{run_scheme, SchemeKind, SystemConfig};

/// Secrecy-rate optimization for a RIS-aided mmWave downlink with
/// low-resolution DACs.
#[derive(Parser)]
#[command(name = "rissec", version)]
struct Cli {
    /// Master seed; overrides the seed of the loaded configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a Monte-Carlo campaign described by a JSON file.
    Run { experiment: PathBuf },
    /// Trace the outer loop of one trial.
    Converge {
        /// System configuration JSON (defaults if omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "proposed", value_parser = parse_scheme)]
        scheme: SchemeKind,
        /// Trial index under the master seed.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Compare BCD with exhaustive phase search on small instances.
    Oracle {
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    rissec::io::scheme_from_name(s).ok_or_else(|| {
        let names: Vec<_> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown scheme {s:?}, expected one of {}", names.join(", "))
    })
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn run(cli: Cli) -> AnyResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.cmd {
        Cmd::Run { experiment } => {
            let mut exp = load_experiment(&experiment)?;
            if let Some(s) = cli.seed {
                exp.base.seed = s;
            }
            let out = cli
                .out
                .or_else(|| exp.output_path.clone())
                .unwrap_or_else(|| PathBuf::from("results.csv"));
            let records = run_monte_carlo(&exp);
            emit_csv(&records, &out)?;
            let failed = records.iter().filter(|r| r.warnings.starts_with("error:")).count();
            eprintln!(
                "{} records ({} trials per point) -> {}",
                records.len(),
                exp.n_trials,
                out.display()
            );
            if failed > 0 {
                eprintln!("warning: {failed} trials failed, see the warnings column");
            }
            for (si, row) in mean_by_point(&exp, &records).iter().enumerate() {
                for (ki, m) in row.iter().enumerate() {
                    eprintln!(
                        "  {:>8} {:<12} mean R_s {m:.4}",
                        exp.sweep.value(si),
                        exp.schemes[ki].name()
                    );
                }
            }
        }
        Cmd::Converge { config, scheme, trial } => {
            let mut cfg = match config {
                Some(p) => load_system_config(&p)?,
                None => SystemConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let input = draw_trial(&cfg, trial_seed(cfg.seed, trial))?;
            let res = run_scheme(scheme, &cfg, &input, &AoSettings::default())?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from("convergence.csv"));
            emit_convergence_trace(&res, &out)?;
            eprintln!(
                "{}: {} iterations, converged {}, R_s {:.6} -> {}",
                scheme.name(),
                res.iterations,
                res.converged,
                res.rates.secrecy,
                out.display()
            );
        }
        Cmd::Oracle { trials } => {
            let cfg = oracle_config();
            let recs = oracle_suite(&cfg, cli.seed.unwrap_or(cfg.seed), trials)?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from("oracle.csv"));
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_path(&out)?;
            w.write_record([
                "seed",
                "bcd_rate",
                "exhaustive_rate",
                "ratio",
                "bcd_us",
                "exhaustive_us",
            ])?;
            for r in &recs {
                w.write_record([
                    r.seed.to_string(),
                    r.bcd_rate.to_string(),
                    r.exhaustive_rate.to_string(),
                    r.ratio().to_string(),
                    r.bcd_us.to_string(),
                    r.exhaustive_us.to_string(),
                ])?;
            }
            w.flush()?;
            let good = recs.iter().filter(|r| r.ratio() >= 0.95).count();
            let bcd: f64 = recs.iter().map(|r| r.bcd_us).sum::<f64>() / recs.len().max(1) as f64;
            let ex: f64 = recs.iter().map(|r| r.exhaustive_us).sum::<f64>() / recs.len().max(1) as f64;
            eprintln!(
                "{good}/{} trials within 95% of exhaustive; mean time BCD {bcd:.1} us, exhaustive {ex:.1} us",
                recs.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
