//! `jordantri`: command-line front end over the `jordantri` library.
//!
//! Every subcommand prints a JSON report (or a short table without `--json`)
//! and exits 0 when all checks pass, 2 on a hypothesis violation, 3 on a
//! residual failure and 4 on malformed input or I/O errors. Argument errors
//! exit 1.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jordantri::commands::{self, ClosureKind, CommandOptions, CommandReport, Status};
use jordantri::{gen_random, InstanceFile, ToleranceConfig, C64};

const DEFAULT_COND: f64 = 1e2;
const HARD_COND: f64 = 1e4;

#[derive(Parser)]
#[command(name = "jordantri", version, about = "Closures, spectral projections and triangularization for matrix sets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Relative cutoff for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_rank: f64,
    /// Eigenvalue clustering radius, scaled by 1 + ||A||.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_cluster: f64,
    /// Pass threshold for residual checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_residual: f64,
    /// Seed for generation and for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit the JSON report (default is a human-readable summary).
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random nilpotent instance with a hidden triangularizing conjugator.
    GenRandom {
        #[arg(short)]
        n: usize,
        #[arg(short, default_value_t = 1)]
        k: usize,
        /// Condition number cap of the hidden conjugator.
        #[arg(long, conflicts_with = "hard")]
        cond: Option<f64>,
        /// Stress setting: condition cap 1e4.
        #[arg(long)]
        hard: bool,
    },
    /// Closure of the generators under a product.
    Close {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Jordan)]
        kind: Kind,
    },
    /// Lie algebra J + [J, J] over the Jordan closure J.
    Lie { instance: PathBuf },
    /// Lie ideal generated by the Jordan closure inside its Lie hull.
    Ideal { instance: PathBuf },
    /// Traces of words in the Jordan closure basis.
    CheckTraces {
        instance: PathBuf,
        /// Also audit tr(B_i B_j) on the materialized ideal.
        #[arg(long)]
        ideal: bool,
    },
    /// Jordan word identities and norm inequalities on the generators.
    CheckIdentities { instance: PathBuf },
    /// Riesz decomposition of one generator.
    Riesz {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Riesz projection of ad(A) against the eigenvalue-pair formula.
    Adproj {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Eigenvalue of ad(A) as "re" or "re,im".
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: C64,
    },
    /// Trace-form hypothesis and nilpotency of the derived algebra.
    Cartan { instance: PathBuf },
    /// Unitary conjugator making every generator strictly upper triangular.
    Triangularize { instance: PathBuf },
    /// A common invariant subspace, or a certificate that none exists.
    Reduce { instance: PathBuf },
    /// All instance checks in one aggregate report.
    VerifyAll { instance: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Jordan,
    Lie,
    Assoc,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err("expected \"re\" or \"re,im\"".into()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summary(r: &CommandReport) -> String {
    let mut s = format!("{}: {:?} (exit {})\n", r.command, r.status, r.exit_code());
    if let Some(e) = &r.error {
        s += &format!("error: {e}\n");
    }
    if let Some(obj) = r.result.as_object() {
        for (k, v) in obj {
            match v {
                serde_json::Value::Object(sec) if sec.contains_key("status") => {
                    s += &format!("  {k}: {}\n", sec["status"].as_str().unwrap_or("?"));
                }
                serde_json::Value::Number(_) | serde_json::Value::Bool(_) | serde_json::Value::String(_) => {
                    s += &format!("  {k}: {v}\n");
                }
                _ => {}
            }
        }
    }
    if let Some(rows) = r.result.as_array() {
        for row in rows {
            s += &format!(
                "  {:<60} {:>11.3e} <= {:>9.3e}  {}\n",
                row["name"].as_str().unwrap_or(""),
                row["residual"].as_f64().unwrap_or(f64::NAN),
                row["threshold"].as_f64().unwrap_or(f64::NAN),
                if row["pass"].as_bool() == Some(true) { "pass" } else { "FAIL" }
            );
        }
    }
    for n in &r.notes {
        s += &format!("note: {n}\n");
    }
    s
}

fn load(path: &Path) -> Result<InstanceFile, CommandReport> {
    InstanceFile::load(path).map_err(|e| CommandReport {
        command: "load".into(),
        status: Status::InvalidInput,
        result: serde_json::Value::Null,
        error: Some(format!("{}: {e}", path.display())),
        notes: vec![],
    })
}

fn run(cli: Cli) -> i32 {
    let g = &cli.global;
    let opts = CommandOptions {
        tol: ToleranceConfig {
            rank_tol: g.tol_rank,
            cluster_tol: g.tol_cluster,
            residual_tol: g.tol_residual,
        },
        seed: g.seed,
        ..Default::default()
    };
    if let Err(e) = opts.tol.validate() {
        eprintln!("jordantri: {e}");
        return 1;
    }
    let out = g.out.as_deref();

    if let Command::GenRandom { n, k, cond, hard } = &cli.command {
        let cap = cond.unwrap_or(if *hard { HARD_COND } else { DEFAULT_COND });
        return match gen_random(g.seed, *n, *k, cap).and_then(|f| f.to_json()) {
            Ok(text) => match emit(out, &format!("{text}\n")) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("jordantri: {e}");
                    4
                }
            },
            Err(e) => {
                eprintln!("jordantri: {e}");
                1
            }
        };
    }

    let report = match &cli.command {
        Command::GenRandom { .. } => unreachable!(),
        Command::Close { instance, kind } => load(instance).map(|i| {
            let kind = match kind {
                Kind::Jordan => ClosureKind::Jordan,
                Kind::Lie => ClosureKind::Lie,
                Kind::Assoc => ClosureKind::Assoc,
            };
            commands::cmd_close(&i, kind, &opts)
        }),
        Command::Lie { instance } => load(instance).map(|i| commands::cmd_lie(&i, &opts)),
        Command::Ideal { instance } => load(instance).map(|i| commands::cmd_ideal(&i, &opts)),
        Command::CheckTraces { instance, ideal } => load(instance).map(|i| {
            let o = CommandOptions {
                ideal_pairing: *ideal,
                ..opts
            };
            commands::cmd_check_traces(&i, &o)
        }),
        Command::CheckIdentities { instance } => load(instance).map(|i| commands::cmd_check_identities(&i, &opts)),
        Command::Riesz { instance, index } => load(instance).map(|i| commands::cmd_riesz(&i, *index, &opts)),
        Command::Adproj { instance, index, lambda } => {
            load(instance).map(|i| commands::cmd_adproj(&i, *index, *lambda, &opts))
        }
        Command::Cartan { instance } => load(instance).map(|i| commands::cmd_cartan(&i, &opts)),
        Command::Triangularize { instance } => load(instance).map(|i| commands::cmd_triangularize(&i, &opts)),
        Command::Reduce { instance } => load(instance).map(|i| commands::cmd_reduce(&i, &opts)),
        Command::VerifyAll { instance } => load(instance).map(|i| commands::cmd_verify_all(&i, &opts)),
    }
    .unwrap_or_else(|r| r);

    let text = if g.json { report.to_json() } else { summary(&report) };
    if let Err(e) = emit(out, &text) {
        eprintln!("jordantri: {e}");
        return 4;
    }
    report.exit_code()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli) as u8)
}
