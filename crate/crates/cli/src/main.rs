use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use schemata_core::admissibility::{validate_problem, ValidationReport};
use schemata_core::basesolver::backend_from_spec;
use schemata_core::oracle::{
    differential_check, evidence, format_assignment, Consistency, Oracle, OracleError,
    OracleResult, ProverEvidence,
};
use schemata_core::render;
use schemata_core::tableau::{check_measure, prove, ProofRun, ProveError, ProverConfig, RuleTag, Verdict};
use schemata_core::{parse_problem, Problem};

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;

#[derive(Parser)]
#[command(name = "schemata", version, about = "Tableau prover for iterated schemata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem file against the admissibility conditions.
    Validate { file: PathBuf },
    /// Decide satisfiability of the conjunction of the assertions.
    Prove {
        file: PathBuf,
        /// Write the proof tree to this file.
        #[arg(long)]
        dump_tree: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long, default_value_t = 500_000)]
        max_nodes: usize,
        /// Check that every non-inductive rule decreases the measure.
        #[arg(long)]
        check_measure: bool,
        /// Print a ground model read off the satisfiable leaf.
        #[arg(long)]
        witness: bool,
        /// `builtin` or `bridge:CMD`.
        #[arg(long, default_value = "builtin")]
        backend: String,
    },
    /// Enumerate groundings up to a term depth.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Run the prover and the oracle and compare their answers.
    Diff {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 500_000)]
        max_nodes: usize,
    },
}

/// Failure carrying the exit code to report.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn load(path: &Path, builtin: bool) -> Result<Problem, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let problem = parse_problem(&text).map_err(|e| {
        Failure::new(EXIT_USAGE, anyhow::anyhow!("{}:{e}", path.display()))
    })?;
    let report = validate_problem(&problem, builtin);
    if !report.ok() {
        eprint!("{report}");
        let code = if report.admissible() {
            EXIT_UNSUPPORTED
        } else {
            EXIT_USAGE
        };
        return Err(Failure::new(code, anyhow::anyhow!("{} is not admissible", path.display())));
    }
    Ok(problem)
}

fn prove_error(e: ProveError) -> Failure {
    let code = match e {
        ProveError::Unsupported { .. } | ProveError::ImpureLeaf { .. } => EXIT_UNSUPPORTED,
        ProveError::Internal(_) => EXIT_USAGE,
    };
    Failure::new(code, e)
}

fn oracle_error(e: OracleError) -> Failure {
    let code = match e {
        OracleError::Budget { .. } => EXIT_LIMIT,
        OracleError::Unsupported(_) => EXIT_UNSUPPORTED,
        _ => EXIT_USAGE,
    };
    Failure::new(code, e)
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Sat { .. } => EXIT_SAT,
        Verdict::Unsat => EXIT_UNSAT,
        Verdict::ResourceLimit { .. } => EXIT_LIMIT,
    }
}

fn report_run(run: &ProofRun, elapsed: std::time::Duration) {
    match &run.verdict {
        Verdict::Sat { leaf, model } => {
            println!("sat");
            let atoms: Vec<String> = model
                .iter()
                .map(|(k, v)| if *v { k.clone() } else { format!("(not {k})") })
                .collect();
            println!("leaf {leaf}: {{{}}}", atoms.join(", "));
        }
        Verdict::Unsat => println!("unsat"),
        Verdict::ResourceLimit { nodes } => println!("unknown: node limit reached at {nodes} nodes"),
    }
    println!(
        "nodes {} loops {} time {:.3}s",
        run.tree.nodes.len(),
        run.tree.count(RuleTag::Loop),
        elapsed.as_secs_f64()
    );
    for v in &run.violations {
        println!("invariant violation: {v}");
    }
}

fn cmd_validate(file: &Path) -> CmdResult {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("cannot read {}", file.display()))
        .map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let problem = parse_problem(&text)
        .map_err(|e| Failure::new(EXIT_USAGE, anyhow::anyhow!("{}:{e}", file.display())))?;
    let report: ValidationReport = validate_problem(&problem, true);
    if report.ok() {
        println!("admissible");
        Ok(0)
    } else {
        print!("{report}");
        Ok(if report.admissible() {
            EXIT_UNSUPPORTED
        } else {
            EXIT_USAGE
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_prove(
    file: &Path,
    dump_tree: Option<&Path>,
    format: Format,
    max_nodes: usize,
    measure: bool,
    witness: bool,
    backend: &str,
) -> CmdResult {
    let solver = backend_from_spec(backend).ok_or_else(|| {
        Failure::new(EXIT_USAGE, anyhow::anyhow!("unknown backend `{backend}`"))
    })?;
    let problem = load(file, backend == "builtin")?;
    let config = ProverConfig {
        max_nodes,
        ..ProverConfig::default()
    };
    let t0 = Instant::now();
    let run = prove(&problem, solver.as_ref(), &config).map_err(prove_error)?;
    report_run(&run, t0.elapsed());
    if let Some(out) = dump_tree {
        let text = match format {
            Format::Dot => render::to_dot(&run.tree),
            Format::Json => render::to_json(&run.tree),
        };
        std::fs::write(out, text)
            .with_context(|| format!("cannot write {}", out.display()))
            .map_err(|e| Failure::new(EXIT_USAGE, e))?;
    }
    if measure {
        let violations = check_measure(&run, &problem, config.base_closure).map_err(prove_error)?;
        println!("measure violations {}", violations.len());
        for v in &violations {
            println!(
                "  {} at node {} -> {}",
                v.rule.name(),
                v.parent,
                v.child
            );
        }
    }
    if witness && matches!(run.verdict, Verdict::Sat { .. }) {
        match evidence(&run, &problem).map_err(oracle_error)? {
            ProverEvidence::Sat {
                witness: Some(w),
                holds,
                ..
            } => {
                println!("witness {}", format_assignment(&run.tree.sig, &w));
                println!(
                    "witness {}",
                    if holds == Some(true) {
                        "confirmed"
                    } else {
                        "REFUTED"
                    }
                );
            }
            _ => println!("witness unavailable"),
        }
    }
    Ok(verdict_code(&run.verdict))
}

fn print_oracle(oracle: &Oracle, result: &OracleResult) {
    match result {
        OracleResult::SatAtDepth { assignment, depth } => println!(
            "SatAtDepth({depth}) {}",
            format_assignment(oracle.sig(), assignment)
        ),
        OracleResult::UnsatUpTo { depth, groundings } => {
            println!("UnsatUpTo({depth}) groundings {groundings}")
        }
    }
}

fn cmd_oracle(file: &Path, depth: usize) -> CmdResult {
    let problem = load(file, true)?;
    let oracle = Oracle::new(&problem);
    let result = oracle.check(depth).map_err(oracle_error)?;
    print_oracle(&oracle, &result);
    Ok(match result {
        OracleResult::SatAtDepth { .. } => EXIT_SAT,
        OracleResult::UnsatUpTo { .. } => EXIT_UNSAT,
    })
}

fn cmd_diff(file: &Path, depth: usize, max_nodes: usize) -> CmdResult {
    let problem = load(file, true)?;
    let config = ProverConfig {
        max_nodes,
        ..ProverConfig::default()
    };
    let t0 = Instant::now();
    let run = prove(&problem, &schemata_core::basesolver::Builtin, &config).map_err(prove_error)?;
    report_run(&run, t0.elapsed());
    let ev = evidence(&run, &problem).map_err(oracle_error)?;
    let oracle = Oracle::new(&problem);
    let result = oracle.check(depth).map_err(oracle_error)?;
    print_oracle(&oracle, &result);
    let report = differential_check(&ev, &result, oracle.sig());
    println!("{report}");
    if let Some(c) = &report.counterexample {
        println!("counterexample {}", format_assignment(oracle.sig(), c));
    }
    Ok(match report.status {
        Consistency::Consistent => 0,
        Consistency::Contradiction => 1,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Validate { file } => cmd_validate(file),
        Command::Prove {
            file,
            dump_tree,
            format,
            max_nodes,
            check_measure,
            witness,
            backend,
        } => cmd_prove(
            file,
            dump_tree.as_deref(),
            *format,
            *max_nodes,
            *check_measure,
            *witness,
            backend,
        ),
        Command::Oracle { file, depth } => cmd_oracle(file, *depth),
        Command::Diff {
            file,
            depth,
            max_nodes,
        } => cmd_diff(file, *depth, *max_nodes),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
