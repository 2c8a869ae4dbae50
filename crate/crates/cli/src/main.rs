//! `mcs` — evaluate, check and repair multi-context systems from the
//! command line.
//!
//! Exit codes: 0 consistent / non-empty result, 1 inconsistent or empty
//! result, 2 parse or validation error, 3 capped search or internal error.
//! Diagnostics and timing go to stderr; reports go to stdout.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use mcs_core::{
    all_diagnoses, all_explanations, classify_cycles, dependency_graph, faulty_rule_sets,
    filter_diagnoses, is_inconsistent, minimal_diagnoses, minimal_explanations, parse_asp_program,
    parse_mcs, preferred_diagnoses, totally_coherent, EngineError, EvalOptions, Mcs,
    ObserverProgram, PreferenceProgram,
};
use report::Report;

#[derive(Parser)]
#[command(name = "mcs", version, about = "Multi-context system engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Ceiling on search candidates; exceeding it aborts with exit code 3.
    #[arg(long, global = true, default_value_t = 1 << 20, value_parser = clap::value_parser!(u64).range(1..))]
    cap: u64,

    /// Worker threads for independent candidate checks.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Decide consistency: exit 0 when an equilibrium exists, 1 otherwise.
    Check { input: PathBuf },
    /// Enumerate all equilibria.
    Equilibria { input: PathBuf },
    /// Enumerate diagnoses (subset-minimal unless --all).
    Diagnose {
        input: PathBuf,
        /// Report every diagnosis instead of the subset-minimal ones.
        #[arg(long)]
        all: bool,
    },
    /// Enumerate inconsistency explanations (subset-minimal unless --all).
    Explain {
        input: PathBuf,
        /// Report every explanation instead of the subset-minimal ones.
        #[arg(long)]
        all: bool,
    },
    /// Keep only the minimal diagnoses an observer program accepts.
    Filter {
        input: PathBuf,
        /// Observer program (.lp) over rule/1, d1/1, d2/1.
        #[arg(long)]
        observer: PathBuf,
    },
    /// Select the most preferred diagnoses under a comparison program.
    Prefer {
        input: PathBuf,
        /// Preference program (.lp) over d1a/1, d2a/1, d1b/1, d2b/1
        /// deriving better_a.
        #[arg(long)]
        preference: PathBuf,
        /// Optional observer filter applied first.
        #[arg(long)]
        observer: Option<PathBuf>,
    },
    /// Print the context dependency graph and its cycle classification.
    Graph {
        input: PathBuf,
        /// Emit DOT (negative edges dashed) instead of a report.
        #[arg(long)]
        dot: bool,
    },
    /// Managed consistency plus total coherence and cycle classification.
    ManagedCheck { input: PathBuf },
}

/// A failure with its exit code; messages go to stderr.
struct Failure {
    code: u8,
    messages: Vec<String>,
}

impl Failure {
    fn input(message: String) -> Self {
        Self {
            code: 2,
            messages: vec![message],
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::ReservedPredicate(_) => 2,
            _ => 3,
        };
        Self {
            code,
            messages: vec![e.to_string()],
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<Mcs, Failure> {
    let text = read_input(path)?;
    parse_mcs(&text).map_err(|errors| Failure {
        code: 2,
        messages: errors
            .iter()
            .map(|e| {
                format!(
                    "{}:{}: {}: {}",
                    path.display(),
                    e.span,
                    e.kind.name(),
                    e.message
                )
            })
            .collect(),
    })
}

fn load_observer(path: &Path) -> Result<ObserverProgram, Failure> {
    let text = read_input(path)?;
    let program = parse_asp_program(&text).map_err(|errors| Failure {
        code: 2,
        messages: errors
            .iter()
            .map(|e| {
                format!(
                    "{}:{}: {}: {}",
                    path.display(),
                    e.span,
                    e.kind.name(),
                    e.message
                )
            })
            .collect(),
    })?;
    Ok(ObserverProgram::new(program)?)
}

fn load_preference(path: &Path) -> Result<PreferenceProgram, Failure> {
    let text = read_input(path)?;
    let program = parse_asp_program(&text).map_err(|errors| Failure {
        code: 2,
        messages: errors
            .iter()
            .map(|e| {
                format!(
                    "{}:{}: {}: {}",
                    path.display(),
                    e.span,
                    e.kind.name(),
                    e.message
                )
            })
            .collect(),
    })?;
    Ok(PreferenceProgram::new(program)?)
}

fn consistency_status(inconsistent: bool) -> (&'static str, u8) {
    if inconsistent {
        ("inconsistent", 1)
    } else {
        ("consistent", 0)
    }
}

fn list_status(len: usize) -> (&'static str, u8) {
    if len == 0 {
        ("empty", 1)
    } else {
        ("ok", 0)
    }
}

enum Output {
    Report(Box<Report>),
    Raw(String),
}

fn run(cli: &Cli) -> Result<(Output, u8), Failure> {
    let opts = EvalOptions {
        cap: cli.cap,
        jobs: cli.jobs as usize,
    };
    match &cli.command {
        Command::Check { input } => {
            let m = load_system(input)?;
            let (status, code) = consistency_status(is_inconsistent(&m, &opts)?);
            Ok((Output::Report(Box::new(Report::new(status))), code))
        }
        Command::Equilibria { input } => {
            let m = load_system(input)?;
            let states = if m.is_managed() {
                mcs_core::enumerate_equilibria_managed(&m, &opts)?
            } else {
                mcs_core::enumerate_equilibria(&m, &opts)?
            };
            let (status, code) = list_status(states.len());
            let mut report = Report::new(status);
            report.equilibria = Some(report::belief_states(&m, &states));
            Ok((Output::Report(Box::new(report)), code))
        }
        Command::Diagnose { input, all } => {
            let m = load_system(input)?;
            let list = if *all {
                all_diagnoses(&m, &opts)?
            } else {
                minimal_diagnoses(&m, &opts)?
            };
            let (status, code) = list_status(list.len());
            let mut report = Report::new(status);
            report.diagnoses = Some(report::diagnoses(&list));
            if !*all {
                report.faulty = Some(faulty_section(&m, &opts)?);
            }
            Ok((Output::Report(Box::new(report)), code))
        }
        Command::Explain { input, all } => {
            let m = load_system(input)?;
            let list = if *all {
                all_explanations(&m, &opts)?
            } else {
                minimal_explanations(&m, &opts)?
            };
            let (status, code) = list_status(list.len());
            let mut report = Report::new(status);
            report.explanations = Some(report::explanations(&list));
            if !*all {
                report.faulty = Some(faulty_section(&m, &opts)?);
            }
            Ok((Output::Report(Box::new(report)), code))
        }
        Command::Filter { input, observer } => {
            let m = load_system(input)?;
            let f = load_observer(observer)?;
            let list = filter_diagnoses(&m, &f, &opts)?;
            let (status, code) = list_status(list.len());
            let mut report = Report::new(status);
            report.diagnoses = Some(report::diagnoses(&list));
            Ok((Output::Report(Box::new(report)), code))
        }
        Command::Prefer {
            input,
            preference,
            observer,
        } => {
            let m = load_system(input)?;
            let p = load_preference(preference)?;
            let f = observer.as_deref().map(load_observer).transpose()?;
            let list = preferred_diagnoses(&m, &p, f.as_ref(), &opts)?;
            let (status, code) = list_status(list.len());
            let mut report = Report::new(status);
            report.diagnoses = Some(report::diagnoses(&list));
            Ok((Output::Report(Box::new(report)), code))
        }
        Command::Graph { input, dot } => {
            let m = load_system(input)?;
            let g = dependency_graph(&m);
            let nodes: Vec<String> = g.nodes.iter().map(|n| n.as_str().to_owned()).collect();
            let edges = report::edges(&g.edges);
            if *dot {
                return Ok((Output::Raw(report::render_dot(&nodes, &edges)), 0));
            }
            let mut report = Report::new("ok");
            report.nodes = Some(nodes);
            report.edges = Some(edges);
            report.classification = Some(report::classification(classify_cycles(&g)));
            Ok((Output::Report(Box::new(report)), 0))
        }
        Command::ManagedCheck { input } => {
            let m = load_system(input)?;
            let (status, code) = consistency_status(is_inconsistent(&m, &opts)?);
            let mut report = Report::new(status);
            report.classification = Some(report::classification(classify_cycles(
                &dependency_graph(&m),
            )));
            let mut coherence = Vec::new();
            for ctx in m.contexts() {
                coherence.push(report::CoherenceJson {
                    context: ctx.id.as_str().to_owned(),
                    coherent: totally_coherent(&m, &ctx.id, &opts)?,
                });
            }
            report.totally_coherent = Some(coherence);
            Ok((Output::Report(Box::new(report)), code))
        }
    }
}

fn faulty_section(m: &Mcs, opts: &EvalOptions) -> Result<report::FaultyJson, EngineError> {
    let (from_d, from_e) = faulty_rule_sets(m, opts)?;
    Ok(report::FaultyJson {
        from_diagnoses: from_d.iter().map(|r| r.as_str().to_owned()).collect(),
        from_explanations: from_e.iter().map(|r| r.as_str().to_owned()).collect(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    eprintln!("time_ms={}", start.elapsed().as_millis());
    match result {
        Ok((output, code)) => {
            match output {
                Output::Raw(text) => print!("{text}"),
                Output::Report(report) => match cli.format {
                    Format::Text => print!("{}", report::render_text(&report)),
                    Format::Json => {
                        println!("{}", serde_json::to_string_pretty(&report).unwrap())
                    }
                },
            }
            ExitCode::from(code)
        }
        Err(failure) => {
            for message in &failure.messages {
                eprintln!("error: {message}");
            }
            ExitCode::from(failure.code)
        }
    }
}
