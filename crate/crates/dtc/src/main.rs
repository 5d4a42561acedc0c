//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on verification failure, 2 on usage or
//! parse errors (clap uses 2 for bad invocations as well).

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use dtc::harness::{self, FuzzConfig, VerifyMode};
use dtc::io::{export_dot, parse_relation_with_limit, write_relation};
use dtc::oracle::oracle_complexity;
use dtc::relation::{compose, iterate, tuple, Relation};
use dtc::solver::{solve, SolveOptions, WeightVector};

#[derive(Parser)]
#[command(
    name = "dtc",
    version,
    about = "Exact weighted decision tree complexity of relations over finite alphabets"
)]
struct Cli {
    /// Cap tables (composed, iterated, tupled, parsed) at 2^BITS entries.
    #[arg(long, global = true, default_value_t = 24, value_name = "BITS")]
    max_table_bits: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the weighted decision tree complexity of a relation.
    Complexity {
        file: PathBuf,
        /// Per-variable query costs, e.g. `--weights 2,1,3`. Default: all 1.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Emit an optimal decision tree as Graphviz DOT.
    Tree {
        file: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        /// Variable names for internal nodes, e.g. `--names a,b,c`.
        #[arg(long, value_delimiter = ',')]
        names: Option<Vec<String>>,
    },
    /// Compose an outer relation with inner relations (emits a relation file).
    Compose {
        outer: PathBuf,
        #[arg(required = true)]
        inners: Vec<PathBuf>,
    },
    /// k-fold self-composition of a total boolean function.
    Iterate {
        file: PathBuf,
        #[arg(short, long)]
        k: u32,
    },
    /// Joint evaluation of boolean relations on disjoint inputs.
    Tuple {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Check a complexity law on explicit relation files.
    #[command(group(ArgGroup::new("law").required(true).args([
        "theorem",
        "upper_bound",
        "iteration",
        "direct_sum",
    ])))]
    Verify {
        /// D(g∘fs) = D(ḡ, [D(f¹),…]) for boolean-valued inners: g.rel f1.rel …
        #[arg(long)]
        theorem: bool,
        /// D(g∘fs) ≤ D(ḡ, [D(f¹),…]) for any intermediate alphabet.
        #[arg(long)]
        upper_bound: bool,
        /// D(f⁽ᵏ⁾) = D(f)^k: f.rel with -k.
        #[arg(long)]
        iteration: bool,
        /// D((f¹,…,fⁿ)) = Σ D(fⁱ): f1.rel f2.rel …
        #[arg(long)]
        direct_sum: bool,
        #[arg(short, long)]
        k: Option<u32>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run seeded random verification instances.
    Fuzz {
        /// theorem | upper-bound | iteration | direct-sum
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the repro bundle on failure.
        #[arg(long)]
        bundle_dir: Option<PathBuf>,
    },
    /// Brute-force enumeration cross-check of the solver.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        /// Weighted-depth budget; defaults to the sum of the weights.
        #[arg(long)]
        budget: Option<u64>,
    },
}

/// Operational errors; all exit with status 2.
#[derive(Debug)]
enum CliError {
    Read(PathBuf, std::io::Error),
    Parse(PathBuf, dtc::io::ParseError),
    Weights(String),
    MissingK,
    Mode(String),
    Relation(dtc::RelationError),
    Solve(dtc::SolveError),
    Oracle(dtc::OracleError),
    Harness(harness::HarnessError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Read(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Parse(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Weights(s) => write!(f, "invalid --weights `{s}`"),
            CliError::MissingK => write!(f, "--iteration requires -k <K>"),
            CliError::Mode(s) => write!(f, "{s}"),
            CliError::Relation(e) => write!(f, "{e}"),
            CliError::Solve(e) => write!(f, "{e}"),
            CliError::Oracle(e) => write!(f, "{e}"),
            CliError::Harness(e) => write!(f, "{e}"),
        }
    }
}

impl From<dtc::RelationError> for CliError {
    fn from(e: dtc::RelationError) -> Self {
        CliError::Relation(e)
    }
}

impl From<dtc::SolveError> for CliError {
    fn from(e: dtc::SolveError) -> Self {
        CliError::Solve(e)
    }
}

impl From<dtc::OracleError> for CliError {
    fn from(e: dtc::OracleError) -> Self {
        CliError::Oracle(e)
    }
}

impl From<harness::HarnessError> for CliError {
    fn from(e: harness::HarnessError) -> Self {
        CliError::Harness(e)
    }
}

fn load_relation(path: &Path, max_table_bits: u32) -> Result<Relation, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read(path.to_path_buf(), e))?;
    parse_relation_with_limit(&text, max_table_bits)
        .map_err(|e| CliError::Parse(path.to_path_buf(), e))
}

fn load_relations(paths: &[PathBuf], max_table_bits: u32) -> Result<Vec<Relation>, CliError> {
    paths
        .iter()
        .map(|p| load_relation(p, max_table_bits))
        .collect()
}

fn parse_weights(spec: Option<&str>, arity: usize) -> Result<WeightVector, CliError> {
    match spec {
        None => Ok(WeightVector::unit(arity)),
        Some(s) => s
            .parse::<WeightVector>()
            .map_err(|_| CliError::Weights(s.to_string())),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let bits = cli.max_table_bits;
    let options = SolveOptions {
        max_table_bits: bits,
        ..SolveOptions::default()
    };
    match cli.command {
        Command::Complexity { file, weights } => {
            let rel = load_relation(&file, bits)?;
            let w = parse_weights(weights.as_deref(), rel.arity())?;
            let result = solve(&rel, &w, &options, false)?;
            println!("D = {}", result.value);
            Ok(ExitCode::SUCCESS)
        }
        Command::Tree {
            file,
            weights,
            names,
        } => {
            let rel = load_relation(&file, bits)?;
            let w = parse_weights(weights.as_deref(), rel.arity())?;
            let result = solve(&rel, &w, &options, true)?;
            let tree = result.tree.expect("tree was requested");
            print!("{}", export_dot(&tree, names.as_deref()));
            Ok(ExitCode::SUCCESS)
        }
        Command::Compose { outer, inners } => {
            let g = load_relation(&outer, bits)?;
            let fs = load_relations(&inners, bits)?;
            let h = compose(&g, &fs, bits)?;
            print!("{}", write_relation(&h));
            Ok(ExitCode::SUCCESS)
        }
        Command::Iterate { file, k } => {
            let f = load_relation(&file, bits)?;
            let fk = iterate(&f, k, bits)?;
            print!("{}", write_relation(&fk));
            Ok(ExitCode::SUCCESS)
        }
        Command::Tuple { files } => {
            let fs = load_relations(&files, bits)?;
            let joint = tuple(&fs, bits)?;
            print!("{}", write_relation(&joint));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            theorem,
            upper_bound,
            iteration,
            direct_sum,
            k,
            files,
        } => {
            let report = if theorem || upper_bound {
                let g = load_relation(&files[0], bits)?;
                let fs = load_relations(&files[1..], bits)?;
                if theorem {
                    harness::verify_theorem(&g, &fs)?
                } else {
                    harness::verify_upper_bound(&g, &fs)?
                }
            } else if iteration {
                let f = load_relation(&files[0], bits)?;
                let k = k.ok_or(CliError::MissingK)?;
                harness::verify_iteration(&f, k)?
            } else {
                debug_assert!(direct_sum);
                let fs = load_relations(&files, bits)?;
                harness::verify_direct_sum(&fs)?
            };
            let symbol = match report.verdict {
                harness::Verdict::Equal => "=",
                harness::Verdict::LhsLess => "<",
                harness::Verdict::LhsGreater => ">",
            };
            println!("{} {} {}", report.lhs, symbol, report.rhs);
            if report.passes() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Fuzz {
            mode,
            count,
            seed,
            bundle_dir,
        } => {
            let mode: VerifyMode = mode.parse().map_err(CliError::Mode)?;
            let mut config = FuzzConfig::new(mode, count, seed);
            config.bundle_dir =
                Some(bundle_dir.unwrap_or_else(|| PathBuf::from("dtc-fuzz-failure")));
            let summary = harness::fuzz(&config)?;
            println!(
                "mode={} count={} seed={} passed={} failed={} gaps={}",
                summary.mode,
                summary.requested,
                seed,
                summary.passed,
                summary.failed,
                summary.gap_instances
            );
            if let Some(failure) = &summary.failure {
                println!(
                    "FAIL instance={} seed={} {}",
                    failure.index, failure.seed, failure.detail
                );
                if let Some(bundle) = &failure.bundle {
                    println!("repro bundle: {}", bundle.display());
                }
            }
            if summary.ok() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Oracle {
            file,
            weights,
            budget,
        } => {
            let rel = load_relation(&file, bits)?;
            let w = parse_weights(weights.as_deref(), rel.arity())?;
            let budget = budget.unwrap_or_else(|| w.iter().sum());
            match oracle_complexity(&rel, &w, budget)? {
                Some(value) => {
                    println!("D = {value}");
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("no tree within budget {budget}");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
