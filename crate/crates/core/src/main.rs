use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use groupoid_avg::cli::{cmd_avg, cmd_check, cmd_cohomology, cmd_gen, cmd_metric, CohomologyMode, ExitStatus};
use groupoid_avg::io::{to_json_string, write_json, write_trace, MatrixList};
use groupoid_avg::scenario::{ActionKind, GroupoidGenerator, RepSource, ScenarioFile};
use groupoid_avg::{Error, Result};

#[derive(Parser)]
#[command(name = "groupoid-avg", version, about = "Haar averaging of pseudo-representations on finite groupoids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Pair,
    Action,
    Bundle,
}

#[derive(clap::Args)]
struct RunFlags {
    /// Stop once r ≤ tol.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Run past a failed near-representation gate; no certificate is claimed.
    #[arg(long)]
    force: bool,
    /// Object subset S, comma separated.
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
    /// Override the seed of the scenario's rep generator.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated groupoid as JSON.
    Gen {
        kind: GenKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_enum, default_value_t = ActionKind::Rotation)]
        action: ActionKind,
        /// Isotropy groups, e.g. `z2,z3,s3`.
        #[arg(long, value_delimiter = ',')]
        groups: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a scenario.
    Check { scenario: PathBuf },
    /// Iterate the mean ratio and certify the trace.
    Avg {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// CSV trace destination.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Final iterate as a rep file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report destination (stdout otherwise).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify contraction identities on seeded cochains.
    Cohomology {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: CohomologyMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Average the scenario metric along its representation.
    Metric {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Averaged metric as a Gram file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn emit<T: Serialize>(value: &T, dest: Option<&Path>) -> Result<()> {
    match dest {
        Some(path) => write_json(path, value),
        None => {
            print!("{}", to_json_string(value));
            Ok(())
        }
    }
}

fn load(path: &Path, flags: &RunFlags) -> Result<groupoid_avg::Scenario> {
    let mut file = ScenarioFile::read(path)?;
    if let Some(tol) = flags.tol {
        file.run.tol = tol;
    }
    if let Some(max_iter) = flags.max_iter {
        file.run.max_iter = max_iter;
    }
    file.run.force |= flags.force;
    if let Some(subset) = &flags.subset {
        file.run.subset = Some(subset.clone());
    }
    if let Some(seed) = flags.seed {
        match &mut file.rep {
            Some(RepSource::Generator { generator }) => generator.seed = seed,
            _ => return Err(Error::Precondition("--seed needs a scenario whose rep is a generator".into())),
        }
    }
    file.resolve(path.parent().unwrap_or_else(|| Path::new(".")))
}

fn generator(
    kind: GenKind,
    n: Option<usize>,
    group: Option<String>,
    points: Option<usize>,
    action: ActionKind,
    groups: Vec<String>,
) -> Result<GroupoidGenerator> {
    let missing = |flag: &str| Error::Precondition(format!("--{flag} is required for this generator"));
    Ok(match kind {
        GenKind::Pair => GroupoidGenerator::Pair { n: n.ok_or_else(|| missing("n"))? },
        GenKind::Action => GroupoidGenerator::Action {
            group: group.ok_or_else(|| missing("group"))?,
            points: points.ok_or_else(|| missing("points"))?,
            action,
        },
        GenKind::Bundle if groups.is_empty() => return Err(missing("groups")),
        GenKind::Bundle => GroupoidGenerator::Bundle { groups },
    })
}

fn run(cli: Cli) -> Result<ExitStatus> {
    match cli.command {
        Command::Gen { kind, n, group, points, action, groups, out } => {
            let file = cmd_gen(&generator(kind, n, group, points, action, groups)?)?;
            emit(&file, out.as_deref())?;
            Ok(ExitStatus::Success)
        }
        Command::Check { scenario } => {
            let file = ScenarioFile::read(&scenario)?;
            let report = file.check(scenario.parent().unwrap_or_else(|| Path::new(".")));
            emit(&report, None)?;
            Ok(cmd_check(&report))
        }
        Command::Avg { scenario, run, trace, out, report } => {
            let scenario = load(&scenario, &run)?;
            let result = cmd_avg(&scenario)?;
            if let (Some(path), Some(t)) = (&trace, &result.trace) {
                write_trace(fs::File::create(path)?, &t.rows)?;
            }
            if let (Some(path), Some(limit)) = (&out, &result.limit) {
                write_json(path, &MatrixList::from_matrices(limit.maps()))?;
            }
            emit(&result, report.as_deref())?;
            Ok(result.status())
        }
        Command::Cohomology { scenario, mode, seed, report } => {
            let file = ScenarioFile::read(&scenario)?;
            let scenario = file.resolve(scenario.parent().unwrap_or_else(|| Path::new(".")))?;
            let result = cmd_cohomology(&scenario, mode, seed)?;
            emit(&result, report.as_deref())?;
            Ok(result.status())
        }
        Command::Metric { scenario, run, out, report } => {
            let scenario = load(&scenario, &run)?;
            let result = cmd_metric(&scenario)?;
            if let Some(path) = &out {
                let gram = serde_json::json!({
                    "kind": "gram",
                    "matrices": MatrixList::from_matrices(result.metric().grams()).matrices,
                });
                write_json(path, &gram)?;
            }
            emit(&result, report.as_deref())?;
            Ok(result.status())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::for_error(&e).code())
        }
    }
}
