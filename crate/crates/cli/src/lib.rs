//! Subcommands of the `choreo` tool. Each one returns an [`Outcome`]: a
//! text report, the same report as JSON, and whether the checked property
//! holds.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use choreo_core::conformance::{self, parse_cp, realizes_bounded, RealizabilityReport, Verdict};
use choreo_core::diagrams::{self, parse_ld, LamportDiagram, SendEvent};
use choreo_core::oracle::{self, OracleReport};
use choreo_core::sca::{self, bounded_chor_language, parse_sca, print_sca, RunChecker, Sca};
use choreo_core::semantics::models;
use choreo_core::syntax::{parse_global, Spec};
use choreo_core::synthesis::{build_reachable, build_sca, stats, synthesize, SynthesisStats};
use choreo_core::tableau::closure;
use choreo_core::FormatError;

#[derive(Debug, Parser)]
#[command(
    name = "choreo",
    version,
    about = "Synthesize and check communicating automata for local temporal logic choreographies"
)]
pub struct Cli {
    /// Print reports as JSON
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a formula and show its normal form and vocabulary
    Parse { formula: PathBuf },
    /// Show the closure sets of a formula
    Closure {
        formula: PathBuf,
        /// Also list every atom
        #[arg(long)]
        atoms: bool,
    },
    /// Build the automaton system of a formula
    Synth {
        formula: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Keep states that cannot take part in an accepting run
        #[arg(long)]
        no_prune: bool,
        /// With --no-prune: every atom/obligation pair, not only reachable ones
        #[arg(long, requires = "no_prune")]
        full: bool,
    },
    /// Check whether a diagram is a model of a formula
    Check { formula: PathBuf, diagram: PathBuf },
    /// Look for an accepting run of an automaton system on a diagram
    Run { sca: PathBuf, diagram: PathBuf },
    /// Compare models and synthesized runs on every small diagram
    Oracle {
        formula: PathBuf,
        /// Events per service
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
    /// Conversations of an automaton system on small diagrams
    Chor {
        sca: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
    /// Compare the conversations of an automaton system with a protocol
    Realizes {
        sca: PathBuf,
        protocol: PathBuf,
        /// Events per service, then word length
        #[arg(long, value_parser = parse_bounds, default_value = "2,6")]
        bounds: (usize, usize),
    },
    /// Synthesis statistics as a table row
    Stats { formula: PathBuf },
    /// Graphviz rendering of a .sca, .ld or .cp file
    ExportDot { input: PathBuf },
}

fn parse_bounds(s: &str) -> Result<(usize, usize), String> {
    let (b, l) = s.split_once(',').ok_or("expected B,L")?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(b)?, num(l)?))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn format(path: &Path, e: FormatError) -> Self {
        CliError::Parse { path: path.to_owned(), line: e.line, column: e.column, message: e.message }
    }
}

pub struct Outcome {
    pub text: String,
    pub json: serde_json::Value,
    /// Exit status 1 when false.
    pub holds: bool,
}

fn outcome<T: Serialize>(text: String, report: &T, holds: bool) -> Outcome {
    Outcome { text, json: serde_json::to_value(report).expect("reports serialize"), holds }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn load_formula(path: &Path) -> Result<Spec, CliError> {
    parse_global(&read(path)?).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: e.line,
        column: e.column,
        message: e.message,
    })
}

fn load_sca(path: &Path) -> Result<Sca, CliError> {
    parse_sca(&read(path)?).map_err(|e| CliError::format(path, e))
}

fn load_diagram(path: &Path) -> Result<LamportDiagram, CliError> {
    let d = parse_ld(&read(path)?).map_err(|e| CliError::format(path, e))?;
    diagrams::validate(&d).map_err(|v| CliError::Input(format!("{}: {v}", path.display())))?;
    Ok(d)
}

fn word_string(w: &[SendEvent]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub formula: String,
    pub size: usize,
    pub local_modalities: usize,
    pub spec: Spec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub models: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub accepted: bool,
    /// State after each event, ⊥ first, per service.
    pub witness: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChorReport {
    pub bound: usize,
    pub words: Vec<Vec<SendEvent>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub output: Option<PathBuf>,
    pub pruned: bool,
    pub stats: SynthesisStats,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Parse { formula } => {
            let spec = load_formula(formula)?;
            let report = ParseReport {
                formula: spec.formula.to_string(),
                size: spec.formula.size(),
                local_modalities: spec.formula.modality_count(),
                spec: spec.clone(),
            };
            let v = &spec.vocab;
            let mut text = format!(
                "formula: {}\nsize: {}\nlocal modalities: {}\n",
                report.formula, report.size, report.local_modalities
            );
            text += &format!("services: {}\n", v.services.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
            text += &format!("messages: {}\n", v.messages.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(" "));
            for (s, props) in v.props.iter().filter(|(_, p)| !p.is_empty()) {
                text += &format!("props of {s}: {}\n", props.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(" "));
            }
            Ok(outcome(text, &report, true))
        }
        Command::Closure { formula, atoms } => {
            let spec = load_formula(formula)?;
            let set = closure(&spec.formula).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(outcome(set.dump(*atoms), &set, true))
        }
        Command::Synth { formula, output, no_prune, full } => {
            let spec = load_formula(formula)?;
            let start = Instant::now();
            let syn = match (no_prune, full) {
                (false, _) => synthesize(&spec.formula),
                (true, false) => build_reachable(&spec.formula),
                (true, true) => build_sca(&spec.formula),
            }
            .map_err(|e| CliError::Input(e.to_string()))?;
            let st = stats(&spec.formula, &syn.sca, start.elapsed());
            let printed = print_sca(&syn.sca);
            let mut text = String::new();
            match output {
                Some(path) => {
                    fs::write(path, &printed).map_err(|source| CliError::Io { path: path.clone(), source })?
                }
                None => text.push_str(&printed),
            }
            text += &st.to_string();
            text.push('\n');
            Ok(outcome(text, &SynthReport { output: output.clone(), pruned: !no_prune, stats: st }, true))
        }
        Command::Check { formula, diagram } => {
            let spec = load_formula(formula)?;
            let d = load_diagram(diagram)?;
            let m = models(&d, &spec.formula).map_err(|e| CliError::Input(e.to_string()))?;
            let text = if m { "models: yes\n" } else { "models: no\n" };
            Ok(outcome(text.to_string(), &CheckReport { models: m }, m))
        }
        Command::Run { sca, diagram } => {
            let s = load_sca(sca)?;
            let d = load_diagram(diagram)?;
            let w = RunChecker::new(&s).accepts(&d).map_err(|e| CliError::Input(e.to_string()))?;
            let names = w.as_ref().map(|w| w.state_names(&s, &d));
            let mut text = String::new();
            match &names {
                Some(names) => {
                    text += "accepted: yes\n";
                    for (k, svc) in d.services().iter().enumerate() {
                        let steps: Vec<String> =
                            d.events(k).iter().zip(&names[k]).map(|(e, q)| format!("{}:{q}", e.name)).collect();
                        text += &format!("{svc}: {}\n", steps.join(" "));
                    }
                }
                None => text += "accepted: no\n",
            }
            let accepted = names.is_some();
            Ok(outcome(text, &RunReport { accepted, witness: names }, accepted))
        }
        Command::Oracle { formula, bound } => {
            let spec = load_formula(formula)?;
            let report: OracleReport = oracle::check(&spec.formula, *bound, oracle::thread_count())
                .map_err(|e| CliError::Input(e.to_string()))?;
            let mut text = format!(
                "diagrams: {}\nmodels: {}\nmismatches: {}\ntime: {:.0} ms\n",
                report.diagrams, report.models, report.mismatches, report.time_ms
            );
            if let Some(m) = &report.first {
                text += &format!("first mismatch (models: {}, accepted: {}):\n{}", m.models, m.accepts, m.diagram);
            }
            let holds = report.holds();
            Ok(outcome(text, &report, holds))
        }
        Command::Chor { sca, bound } => {
            let s = load_sca(sca)?;
            let mut words: Vec<Vec<SendEvent>> = bounded_chor_language(&s, *bound).into_iter().collect();
            words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            let text: String = words.iter().map(|w| word_string(w) + "\n").collect();
            Ok(outcome(text, &ChorReport { bound: *bound, words }, true))
        }
        Command::Realizes { sca, protocol, bounds } => {
            let s = load_sca(sca)?;
            let c = parse_cp(&read(protocol)?).map_err(|e| CliError::format(protocol, e))?;
            let report: RealizabilityReport = realizes_bounded(&s, &c, bounds.0, bounds.1);
            let text = match &report.verdict {
                Verdict::Equal => {
                    format!("realizes: yes (up to {} events per service, words of length {})\n", bounds.0, bounds.1)
                }
                Verdict::ScaExtra(w) => format!(
                    "realizes: no\nconversation not in the protocol: {}\nwitness: {}\n",
                    word_string(w),
                    diagrams::word_messages(w)
                ),
                Verdict::ChorMissing(w) => format!(
                    "realizes: no\nprotocol word never produced: {}\nwitness: {}\n",
                    word_string(w),
                    diagrams::word_messages(w)
                ),
            };
            let holds = report.verdict.holds();
            Ok(outcome(text, &report, holds))
        }
        Command::Stats { formula } => {
            let spec = load_formula(formula)?;
            let start = Instant::now();
            let syn = synthesize(&spec.formula).map_err(|e| CliError::Input(e.to_string()))?;
            let st = stats(&spec.formula, &syn.sca, start.elapsed());
            Ok(outcome(format!("{st}\n"), &st, true))
        }
        Command::ExportDot { input } => {
            let text = read(input)?;
            let dot = match input.extension().and_then(|e| e.to_str()) {
                Some("sca") => sca::to_dot(&parse_sca(&text).map_err(|e| CliError::format(input, e))?),
                Some("ld") => diagrams::to_dot(&parse_ld(&text).map_err(|e| CliError::format(input, e))?),
                Some("cp") => conformance::to_dot(&parse_cp(&text).map_err(|e| CliError::format(input, e))?),
                _ => return Err(CliError::Input(format!("{}: expected a .sca, .ld or .cp file", input.display()))),
            };
            Ok(outcome(dot.clone(), &serde_json::json!({ "dot": dot }), true))
        }
    }
}
