//! Command-line interface for FARO loss computation and FANGS estimation.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, missing files,
//! invalid penalty), 2 on data errors (malformed input files).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use farofangs::fangs::{draws_method, fangs, sifa_estimate, SearchConfig};
use farofangs::io::{
    format_samples, parse_csv_matrix, parse_samples, ConfigEcho, ResultDocument,
};
use farofangs::matrix::{FeatureAllocation, SampleSet};
use farofangs::{expected_loss, faro_loss, Error, LossParams};

#[derive(Parser)]
#[command(name = "farofangs", version, about = "Compare and summarize feature allocation matrices with FARO loss and the FANGS search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PenaltyArg {
    /// Penalty a in (0, 2); b = 2 - a. The first matrix argument is the
    /// estimate: a prices an entry asserted by the estimate but absent in
    /// the sample.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
}

#[derive(Args)]
struct InputFormatArg {
    /// Read inputs as CSV (one matrix per file, comma-separated 0/1 rows)
    /// instead of FAZ v1.
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// FARO loss between two matrices, with the optimal column alignment.
    Loss {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        penalty: PenaltyArg,
        #[command(flatten)]
        format: InputFormatArg,
    },
    /// Monte Carlo expected FARO loss of a candidate against a sample file.
    ExpectedLoss {
        candidate: PathBuf,
        samples: PathBuf,
        #[command(flatten)]
        penalty: PenaltyArg,
        #[command(flatten)]
        format: InputFormatArg,
    },
    /// FANGS point estimate from posterior samples.
    Estimate {
        samples: PathBuf,
        #[command(flatten)]
        penalty: PenaltyArg,
        #[arg(long, default_value_t = 16)]
        n_init: usize,
        #[arg(long, default_value_t = 4)]
        n_sweet: usize,
        #[arg(long, default_value_t = 1000)]
        n_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker count; 0 = auto. Defaults to $FAROFANGS_THREADS if set.
        #[arg(long)]
        threads: Option<usize>,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        format: InputFormatArg,
    },
    /// Draws-method estimate: the expected-loss-minimizing sample.
    Draws {
        samples: PathBuf,
        #[command(flatten)]
        penalty: PenaltyArg,
        #[command(flatten)]
        format: InputFormatArg,
    },
    /// SIFA-style estimate: sequential alignment plus elementwise mode.
    Sifa {
        samples: PathBuf,
        #[command(flatten)]
        penalty: PenaltyArg,
        #[command(flatten)]
        format: InputFormatArg,
    },
    /// Time the exhaustive-permutation alignment against the assignment
    /// solver on random instances.
    Bench {
        /// Comma-separated list of widths, each at most 12.
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate synthetic posterior samples by independent entrywise flips
    /// of a truth matrix.
    GenSynthetic {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        flip_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        format: InputFormatArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse { .. } | Error::Dimension(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn penalty(arg: &PenaltyArg) -> Result<LossParams, Error> {
    LossParams::new(arg.a)
}

/// Missing or unreadable input files are usage errors (exit 1), not data
/// errors.
fn read_samples(path: &Path, csv: bool) -> Result<SampleSet, Error> {
    if !path.exists() {
        return Err(Error::Config(format!("no such file: {}", path.display())));
    }
    if csv {
        let z = parse_csv_matrix(path)?;
        SampleSet::new(vec![z])
    } else {
        parse_samples(path)
    }
}

fn read_single(path: &Path, csv: bool) -> Result<FeatureAllocation, Error> {
    let set = read_samples(path, csv)?;
    if set.len() != 1 {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "{} holds {} matrices, expected exactly one",
                path.display(),
                set.len()
            ),
        });
    }
    Ok(set.get(0).clone())
}

fn threads_default(cli_value: Option<usize>) -> Result<usize, Error> {
    if let Some(t) = cli_value {
        return Ok(t);
    }
    match std::env::var("FAROFANGS_THREADS") {
        Ok(s) => s
            .parse()
            .map_err(|_| Error::Config(format!("FAROFANGS_THREADS is not a number: {s:?}"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Loss { x, y, penalty: pa, format } => {
            let p = penalty(&pa)?;
            let zx = read_single(&x, format.csv)?;
            let zy = read_single(&y, format.csv)?;
            let r = faro_loss(&zx, &zy, p)?;
            println!("faro_loss: {}", r.loss);
            println!("k_aligned: {}", r.k_aligned);
            let pairs: Vec<String> = r
                .alignment
                .perm
                .iter()
                .enumerate()
                .map(|(i, &j)| format!("{}->{}", i + 1, j + 1))
                .collect();
            println!("alignment: {}", pairs.join(" "));
            Ok(())
        }
        Command::ExpectedLoss { candidate, samples, penalty: pa, format } => {
            let p = penalty(&pa)?;
            let cand = read_single(&candidate, format.csv)?;
            let set = read_samples(&samples, false)?;
            let loss = expected_loss(&cand, &set, p)?;
            println!("expected_loss: {loss}");
            Ok(())
        }
        Command::Estimate {
            samples,
            penalty: pa,
            n_init,
            n_sweet,
            n_iter,
            seed,
            threads,
            out,
            format,
        } => {
            penalty(&pa)?;
            let set = read_samples(&samples, format.csv)?;
            let cfg = SearchConfig {
                n_init,
                n_sweet,
                n_iter,
                a: pa.a,
                seed,
                threads: threads_default(threads)?,
            };
            let result = fangs(&set, &cfg)?;
            let doc = ResultDocument::new(
                "estimate",
                ConfigEcho {
                    a: cfg.a,
                    n_init: Some(cfg.n_init),
                    n_sweet: Some(cfg.n_sweet),
                    n_iter: Some(cfg.n_iter),
                    seed: Some(cfg.seed),
                    threads: Some(cfg.threads),
                },
                &result.estimate,
                result.expected_loss,
                result.seconds,
            )
            .with_diagnostics(&result.trace, &result.baseline_losses);
            emit(&doc, out.as_deref())
        }
        Command::Draws { samples, penalty: pa, format } => {
            let p = penalty(&pa)?;
            let set = read_samples(&samples, format.csv)?;
            let t0 = Instant::now();
            let (estimate, loss) = draws_method(&set, p)?;
            let doc = ResultDocument::new(
                "draws",
                config_echo_loss_only(pa.a),
                &estimate,
                loss,
                t0.elapsed().as_secs_f64(),
            );
            emit(&doc, None)
        }
        Command::Sifa { samples, penalty: pa, format } => {
            let p = penalty(&pa)?;
            let set = read_samples(&samples, format.csv)?;
            let t0 = Instant::now();
            let estimate = sifa_estimate(&set, p)?;
            let loss = expected_loss(&estimate, &set, p)?;
            let doc = ResultDocument::new(
                "sifa",
                config_echo_loss_only(pa.a),
                &estimate,
                loss,
                t0.elapsed().as_secs_f64(),
            );
            emit(&doc, None)
        }
        Command::Bench { k, n, reps, seed } => {
            let rows = farofangs::lap::bench_alignment(&k, n, reps, seed)?;
            println!("{:>4} {:>22} {:>18}", "K", "exhaustive mean (ms)", "LAP mean (ms)");
            for row in rows {
                println!(
                    "{:>4} {:>22.4} {:>18.4}",
                    row.k, row.mean_ms_exhaustive, row.mean_ms_lap
                );
            }
            Ok(())
        }
        Command::GenSynthetic { truth, b, flip_prob, seed, out, format } => {
            if b == 0 {
                return Err(Error::Config("--b must be at least 1".into()));
            }
            if !(0.0..=1.0).contains(&flip_prob) {
                return Err(Error::Config(format!(
                    "--flip-prob must lie in [0, 1], got {flip_prob}"
                )));
            }
            let z = read_single(&truth, format.csv)?;
            let set = gen_synthetic(&z, b, flip_prob, seed)?;
            std::fs::write(&out, format_samples(&set))?;
            println!("wrote {} samples to {}", b, out.display());
            Ok(())
        }
    }
}

fn config_echo_loss_only(a: f64) -> ConfigEcho {
    ConfigEcho {
        a,
        n_init: None,
        n_sweet: None,
        n_iter: None,
        seed: None,
        threads: None,
    }
}

fn gen_synthetic(
    truth: &FeatureAllocation,
    b: usize,
    flip_prob: f64,
    seed: u64,
) -> Result<SampleSet, Error> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<FeatureAllocation> = (0..b)
        .map(|_| {
            let mut z = truth.clone();
            for j in 0..z.k() {
                for i in 0..z.n() {
                    if rng.random_bool(flip_prob) {
                        z.flip(i, j);
                    }
                }
            }
            z
        })
        .collect();
    SampleSet::new(samples)
}

fn emit(doc: &ResultDocument, out: Option<&Path>) -> Result<(), Error> {
    let json = doc.to_json();
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(())
}
