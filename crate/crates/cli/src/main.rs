//! `nl2spatial` — command-line access to every pipeline stage.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or validation error,
//! 3 domain-negative result (the inputs were fine but the specification is
//! not satisfied: an unsatisfied monitor verdict, or a rollout winner whose
//! overall robustness is not positive).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nl2spatial::datagen::{generate_dataset, GenSpec};
use nl2spatial::formula::{parse_formula, serialize_formula, validate_formula, Formula};
use nl2spatial::gateway::MockBackend;
use nl2spatial::hlt::{
    compose_hlt, expand_frontier, hlt_from_json, hlt_to_json, AlignmentChecker, AlwaysAccept,
    GatewayChecker, Hlt, ReplayProposer,
};
use nl2spatial::monitor::{
    format_robustness, robustness_trace, satisfies, write_trace_csv,
};
use nl2spatial::render::{
    parse_controlled_english_with, render_canonical_with, RenderOptions, SymbolicDefaults,
};
use nl2spatial::rollout::{
    export_traces, score_rollouts_with, OverallMetric, RolloutSet,
};
use nl2spatial::scene::load_trajectory;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (dataset schema v1)");

#[derive(Parser)]
#[command(name = "nl2spatial", version = VERSION, about = "Spatio-temporal specification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit a single JSON document instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct RenderFlags {
    /// Print constant symbols (ε_c, ε_f, κ) instead of numeric values.
    #[arg(long)]
    symbolic_constants: bool,
    /// Trajectory steps per rendered second.
    #[arg(long, default_value_t = 1.0)]
    steps_per_second: f64,
}

impl RenderFlags {
    fn options(&self) -> RenderOptions {
        RenderOptions {
            symbolic_constants: self.symbolic_constants,
            steps_per_second: self.steps_per_second,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a specification over a trajectory.
    Monitor {
        /// Trajectory JSON file.
        #[arg(long)]
        traj: PathBuf,
        /// Specification: machine syntax, or a path to a file containing it.
        #[arg(long)]
        spec: String,
        /// Write the robustness trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Render a formula as canonical controlled English.
    Render {
        /// Formula in machine syntax, or a path to a file containing it.
        formula: String,
        #[command(flatten)]
        flags: RenderFlags,
        /// Render every subformula, one line per node.
        #[arg(long)]
        all_nodes: bool,
    },
    /// Parse canonical controlled English back into machine syntax.
    ParseNl {
        /// The sentence, or a path to a file containing it.
        text: String,
        #[command(flatten)]
        flags: RenderFlags,
    },
    /// Generate a JSON-lines corpus of formula/text records.
    GenDataset {
        /// Generation spec JSON file; defaults apply when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n: u64,
        /// Master seed; overrides the spec file's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score candidate rollouts against a specification and pick the best.
    SelectRollout {
        /// Specification: machine syntax, or a path to a file containing it.
        #[arg(long)]
        spec: String,
        /// Candidate trajectory JSON files, in order.
        #[arg(long, num_args = 1.., required = true)]
        rollouts: Vec<PathBuf>,
        /// Write all robustness traces as CSV.
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Overall metric: robustness at t=0 or the domain mean.
        #[arg(long, value_parser = ["start", "mean"], default_value = "start")]
        overall: String,
    },
    /// Compose a hierarchical tree file into its flat formula.
    ComposeHlt {
        #[arg(long)]
        hlt: PathBuf,
    },
    /// Expand an instruction into a tree by replaying a reference tree
    /// through the checker.
    ExpandHlt {
        /// Reference tree JSON whose proposals are replayed.
        #[arg(long)]
        replay: PathBuf,
        /// Instruction text file; defaults to the reference tree's own text.
        #[arg(long)]
        instruction: Option<PathBuf>,
        /// Candidate filter: `always` accepts everything, `mock` checks
        /// spans against canonical renderings offline.
        #[arg(long, value_parser = ["always", "mock"], default_value = "always")]
        checker: String,
        /// Maximum proposal requests.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Input or validation failure: exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with success status
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// Reads `value` as a file when it names one, otherwise returns it verbatim.
fn text_or_file(value: &str) -> Result<String, InputError> {
    let path = Path::new(value);
    if path.exists() {
        Ok(std::fs::read_to_string(path)?.trim_end().to_string())
    } else {
        Ok(value.to_string())
    }
}

fn parse_spec_formula(value: &str) -> Result<Formula, InputError> {
    let text = text_or_file(value)?;
    let formula = parse_formula(text.trim())?;
    let issues = validate_formula(&formula);
    if !issues.is_empty() {
        return Err(InputError(format!("invalid formula: {}", issues[0])));
    }
    Ok(formula)
}

/// Writes through a temp file in the target directory, then renames, so
/// partial output never lands under the final name.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), InputError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| InputError(e.to_string()))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, InputError> {
    match &cli.command {
        Command::Monitor { traj, spec, trace } => {
            let trajectory = load_trajectory(traj)?;
            let formula = parse_spec_formula(spec)?;
            let result = robustness_trace(&trajectory, &formula)?;
            let verdict = satisfies(&trajectory, &formula)?;
            if let Some(path) = trace {
                let mut buf = Vec::new();
                write_trace_csv(&result, &mut buf)?;
                write_atomic(path, &buf)?;
            }
            let robustness = result.values[0].1;
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "robustness": robustness,
                        "satisfied": verdict,
                        "trace_points": result.values.len(),
                    })
                );
            } else {
                println!("robustness at t=0: {}", format_robustness(robustness));
                println!("verdict: {}", if verdict { "SATISFIED" } else { "NOT SATISFIED" });
            }
            Ok(if verdict { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Render { formula, flags, all_nodes } => {
            let f = parse_spec_formula(formula)?;
            let opts = flags.options();
            if *all_nodes {
                let nodes = nl2spatial::render::render_all_nodes(&f, &opts);
                if cli.json {
                    let entries: Vec<serde_json::Value> = nodes
                        .iter()
                        .map(|(path, node, text)| {
                            serde_json::json!({
                                "path": path,
                                "formula": serialize_formula(node),
                                "canonical": text.text,
                            })
                        })
                        .collect();
                    println!("{}", serde_json::json!({ "nodes": entries }));
                } else {
                    for (path, _, text) in &nodes {
                        println!("{path:?}\t{}", text.text);
                    }
                }
            } else {
                let rendered = render_canonical_with(&f, &opts);
                if cli.json {
                    println!("{}", serde_json::json!({ "canonical": rendered.text }));
                } else {
                    println!("{}", rendered.text);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ParseNl { text, flags } => {
            let sentence = text_or_file(text)?;
            let formula = parse_controlled_english_with(
                &sentence,
                &flags.options(),
                &SymbolicDefaults::default(),
            )?;
            let machine = serialize_formula(&formula);
            if cli.json {
                println!("{}", serde_json::json!({ "formula": machine }));
            } else {
                println!("{machine}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GenDataset { spec, n, seed, out } => {
            let mut gen_spec = match spec {
                Some(path) => serde_json::from_str::<GenSpec>(&std::fs::read_to_string(path)?)?,
                None => GenSpec::default(),
            };
            if let Some(seed) = seed {
                gen_spec.seed = *seed;
            }
            let mut buf = Vec::new();
            let summary = generate_dataset(&gen_spec, *n, &mut buf, &MockBackend)?;
            write_atomic(out, &buf)?;
            if cli.json {
                println!("{}", serde_json::to_string(&summary)?);
            } else {
                println!(
                    "wrote {} records (seed {}) to {}",
                    summary.records,
                    summary.seed,
                    out.display()
                );
                for (depth, count) in &summary.depth_histogram {
                    println!("depth {depth}: {count}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SelectRollout { spec, rollouts, traces, overall } => {
            let formula = parse_spec_formula(spec)?;
            let candidates = rollouts
                .iter()
                .map(load_trajectory)
                .collect::<Result<Vec<_>, _>>()?;
            let rs = RolloutSet { candidates, spec: formula };
            let metric = match overall.as_str() {
                "mean" => OverallMetric::MeanOverDomain,
                _ => OverallMetric::RobustnessAtStart,
            };
            let scores = score_rollouts_with(&rs, metric)?;
            let best = scores
                .iter()
                .cloned()
                .reduce(|best, s| if s.overall > best.overall { s } else { best })
                .expect("at least one rollout is required");
            if let Some(path) = traces {
                let mut buf = Vec::new();
                export_traces(&scores, &mut buf)?;
                write_atomic(path, &buf)?;
            }
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "winner": best.index,
                        "overall": best.overall,
                        "file": rollouts[best.index],
                        "satisfied": best.overall > 0.0,
                    })
                );
            } else {
                println!(
                    "winner: candidate {} ({}) overall {}",
                    best.index,
                    rollouts[best.index].display(),
                    format_robustness(best.overall)
                );
            }
            Ok(if best.overall > 0.0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::ComposeHlt { hlt } => {
            let tree = hlt_from_json(&std::fs::read_to_string(hlt)?)?;
            let formula = compose_hlt(&tree)?;
            let machine = serialize_formula(&formula);
            if cli.json {
                println!("{}", serde_json::json!({ "formula": machine }));
            } else {
                println!("{machine}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExpandHlt { replay, instruction, checker, budget, out } => {
            let gold = hlt_from_json(&std::fs::read_to_string(replay)?)?;
            let instruction_text = match instruction {
                Some(path) => std::fs::read_to_string(path)?.trim_end().to_string(),
                None => gold.instruction.clone(),
            };
            let root_label = gold
                .node(gold.root)
                .ok_or_else(|| InputError("reference tree has no root node".into()))?
                .label
                .clone();
            let start = Hlt::root_only(instruction_text, root_label);
            let mut proposer = ReplayProposer::new(gold);
            let backend = MockBackend;
            let checker: Box<dyn AlignmentChecker> = match checker.as_str() {
                "mock" => Box::new(GatewayChecker { backend: &backend }),
                _ => Box::new(AlwaysAccept),
            };
            let outcome = expand_frontier(&start, &mut proposer, checker.as_ref(), *budget)?;
            write_atomic(out, hlt_to_json(&outcome.hlt).as_bytes())?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "nodes": outcome.hlt.nodes.len(),
                        "rounds": outcome.rounds,
                        "proposals": outcome.proposals_used,
                        "rejections": outcome.rejections.len(),
                    })
                );
            } else {
                println!(
                    "expanded to {} nodes in {} rounds ({} proposals, {} rejections)",
                    outcome.hlt.nodes.len(),
                    outcome.rounds,
                    outcome.proposals_used,
                    outcome.rejections.len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
