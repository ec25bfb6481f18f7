use std::path::PathBuf;
use std::process::ExitCode;

use adanewton_core::harness::{run_checks, run_experiment, summarize, ExperimentConfig};
use adanewton_core::model::{write_csv, write_libsvm};
use adanewton_core::{synth_logistic, Error};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adanewton", version, about = "Adaptive sample size Newton experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured solver and write trace CSVs.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set c=100`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory; wins over the config and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate passes and time to reach 1/N, 10/N and 100/N.
    Summarize { dir: PathBuf },
    /// Write a synthetic logistic dataset.
    GenSynth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long, value_enum, default_value_t = Format::Libsvm)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run derivative and certificate diagnostics on a slice of the data.
    Check {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Libsvm,
    Csv,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Io { .. } | Error::InvalidArgument(_) | Error::Config(_) => 2,
        _ => 1,
    }
}

fn parse_overrides(set: &[String], out: Option<&PathBuf>) -> Result<Vec<(String, String)>, Error> {
    let mut pairs = Vec::new();
    for s in set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{s}' is not KEY=VALUE")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(dir) = out {
        let quoted = toml_string(&dir.display().to_string());
        pairs.push(("out_dir".to_string(), quoted));
    }
    Ok(pairs)
}

fn toml_string(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "inf".into())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, set, out } => {
            let cfg = ExperimentConfig::load(&config, &parse_overrides(&set, out.as_ref())?)?;
            let report = run_experiment(&cfg)?;
            let total = report.n_total as f64;
            println!("N = {}, R_N* = {:e}", report.n_total, report.reference_value);
            for o in &report.outcomes {
                match &o.error {
                    Some(e) => println!("{:<11} aborted: {e}", o.solver.name()),
                    None => println!(
                        "{:<11} passes {:.3}  passes to 1/N {}  final subopt {:e}",
                        o.solver.name(),
                        o.work.passes(report.n_total),
                        fmt_opt(o.passes_to(1.0 / total)),
                        o.final_subopt().unwrap_or(f64::NAN)
                    ),
                }
            }
            println!("wrote {}", report.out_dir.display());
            Ok(report.exit_code() as u8)
        }
        Command::Summarize { dir } => {
            let s = summarize(&dir)?;
            println!("N = {}", s.n_total);
            println!("{:<11} {:>7} {:>10} {:>10}", "solver", "target", "passes", "time_s");
            for h in &s.hits {
                println!(
                    "{:<11} {:>5}/N {:>10} {:>10}",
                    h.solver,
                    h.multiple,
                    fmt_opt(h.passes),
                    fmt_opt(h.time_s)
                );
            }
            for (file, msg) in &s.errors {
                eprintln!("error: {file}: {msg}");
            }
            Ok(if s.errors.is_empty() { 0 } else { 2 })
        }
        Command::GenSynth {
            n,
            p,
            seed,
            separation,
            format,
            out,
        } => {
            let data = synth_logistic(n, p, seed, separation)?;
            match format {
                Format::Libsvm => write_libsvm(&data, &out)?,
                Format::Csv => write_csv(&data, &out)?,
            }
            println!("wrote {} rows to {}", n, out.display());
            Ok(0)
        }
        Command::Check { config, set } => {
            let cfg = ExperimentConfig::load(&config, &parse_overrides(&set, None)?)?;
            let results = run_checks(&cfg)?;
            let mut failed = false;
            for r in &results {
                println!("{} {:<22} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed |= !r.passed;
            }
            Ok(u8::from(failed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
