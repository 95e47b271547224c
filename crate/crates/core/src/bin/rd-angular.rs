use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rd_angular::config::RunConfig;
use rd_angular::{driver, selftest, Error};

#[derive(Parser)]
#[command(name = "rd-angular", version, about = "Residual distribution Euler solver with angular momentum correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write ledger, snapshots and summary.
    Run { config: PathBuf },
    /// Convergence study over a list of grid resolutions.
    Study {
        config: PathBuf,
        /// Comma-separated cells per direction (rings for discs), e.g. 16,32,64.
        #[arg(long, value_delimiter = ',', required = true)]
        meshes: Vec<usize>,
    },
    /// Randomized exactness checks of the correction kernels.
    KernelsSelftest {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match driver::run(&cfg) {
                Ok(rep) => {
                    let s = &rep.summary;
                    println!(
                        "{} {} degree {} correction {}: {} steps to t = {} in {:.2}s, max |dJ| = {:.3e}",
                        s.case, s.scheme, s.degree, s.correction, s.steps, s.time, s.wall_seconds, s.max_dj
                    );
                    println!("artifacts in {}", cfg.output.dir.display());
                    match &s.blow_up_reason {
                        Some(reason) => {
                            eprintln!("blow-up after t = {}: {reason}", s.blow_up_time.unwrap_or(s.time));
                            ExitCode::from(4)
                        }
                        None => ExitCode::SUCCESS,
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Study { config, meshes } => {
            let cfg = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let rows = match driver::convergence_study(&cfg, &meshes) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            println!("{:>6} {:>11} {:>11} {:>7}", "cells", "h", "L2(rho)", "order");
            for r in &rows {
                let order = r.order.map_or("-".to_string(), |o| format!("{:.2}", o[0]));
                println!("{:>6} {:>11.4e} {:>11.4e} {:>7}", r.cells, r.h, r.l2[0], order);
            }
            if let Err(e) = std::fs::create_dir_all(&cfg.output.dir)
                .map_err(|e| Error::Io {
                    path: cfg.output.dir.clone(),
                    source: e,
                })
                .and_then(|_| driver::write_study_file(&rows, &cfg.output.dir.join("study.csv")))
            {
                return fail(e);
            }
            ExitCode::SUCCESS
        }
        Command::KernelsSelftest { samples, seed } => {
            let mut ok = true;
            for rep in selftest::run_all(samples, seed) {
                println!("{rep}");
                ok &= rep.passed();
            }
            let t = selftest::translation_suite(samples, seed.wrapping_add(4));
            let tr_ok = t.iter().all(|v| *v <= selftest::TRANSLATION_TOL);
            println!(
                "{} translation_invariance  samples={samples} triangle={:.2e} ho={:.2e} (tol {:.0e})",
                if tr_ok { "PASS" } else { "FAIL" },
                t[0],
                t[1],
                selftest::TRANSLATION_TOL
            );
            if ok && tr_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
