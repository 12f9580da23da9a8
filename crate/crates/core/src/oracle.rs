//! Exhaustive comparison of the formula semantics with the synthesized
//! automaton on every small diagram.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagrams::{enumerate_diagrams, print_ld, LamportDiagram};
use crate::sca::RunChecker;
use crate::semantics::models;
use crate::syntax::{GlobalFormula, Vocabulary};
use crate::synthesis::{synthesize, SynthesisError, Synthesized};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    /// The diagram in `.ld` form.
    pub diagram: String,
    pub models: bool,
    pub accepts: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub bound: usize,
    pub diagrams: usize,
    pub models: usize,
    pub mismatches: usize,
    /// Smallest mismatching diagram in enumeration order.
    pub first: Option<Mismatch>,
    pub time_ms: f64,
}

impl OracleReport {
    pub fn holds(&self) -> bool {
        self.mismatches == 0
    }
}

/// Worker count from `CHOREO_THREADS`, else the available parallelism.
pub fn thread_count() -> usize {
    std::env::var("CHOREO_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Compares `models(D, psi)` with acceptance by `syn` over every diagram of
/// the formula's vocabulary with at most `bound` events per service.
pub fn check_synthesized(psi: &GlobalFormula, syn: &Synthesized, bound: usize, threads: usize) -> OracleReport {
    let start = Instant::now();
    let vocab = Vocabulary::of(psi);
    let checker = RunChecker::new(&syn.sca);
    let threads = threads.max(1);
    let stop_early = AtomicBool::new(false);
    let shards: Vec<(usize, usize, Vec<(usize, Mismatch)>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|k| {
                let (vocab, checker, stop_early) = (&vocab, &checker, &stop_early);
                scope.spawn(move || {
                    let (mut seen, mut sat, mut bad) = (0, 0, Vec::new());
                    let diagrams = enumerate_diagrams(&vocab.services, &vocab.messages, &vocab.props, bound);
                    for (i, d) in diagrams.enumerate().filter(|(i, _)| i % threads == k) {
                        if stop_early.load(Ordering::Relaxed) {
                            break;
                        }
                        seen += 1;
                        let m = models(&d, psi).expect("diagram over the formula's vocabulary");
                        let a = matches!(checker.accepts(&d), Ok(Some(_)));
                        sat += usize::from(m);
                        if m != a {
                            bad.push((i, mismatch(&d, m, a)));
                        }
                    }
                    (seen, sat, bad)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle worker")).collect()
    });
    let mut report = OracleReport { bound, diagrams: 0, models: 0, mismatches: 0, first: None, time_ms: 0.0 };
    let mut first: Option<(usize, Mismatch)> = None;
    for (seen, sat, bad) in shards {
        report.diagrams += seen;
        report.models += sat;
        report.mismatches += bad.len();
        for (i, m) in bad {
            if first.as_ref().map_or(true, |(j, _)| i < *j) {
                first = Some((i, m));
            }
        }
    }
    report.first = first.map(|(_, m)| m);
    report.time_ms = start.elapsed().as_secs_f64() * 1000.0;
    report
}

fn mismatch(d: &LamportDiagram, models: bool, accepts: bool) -> Mismatch {
    Mismatch { diagram: print_ld(d), models, accepts }
}

/// Synthesizes and checks in one go.
pub fn check(psi: &GlobalFormula, bound: usize, threads: usize) -> Result<OracleReport, SynthesisError> {
    let syn = synthesize(psi)?;
    Ok(check_synthesized(psi, &syn, bound, threads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_global;

    #[test]
    fn small_formulas_agree() {
        for text in ["true @ s", "false @ s", "X x @ s", "F rcv(m,t) @ s & X snd(m,s) @ t"] {
            let psi = parse_global(text).unwrap().formula;
            let r = check(&psi, 2, 2).unwrap();
            assert!(r.holds(), "{text}: {:?}", r.first);
            assert!(r.diagrams > 0);
        }
    }

    #[test]
    fn sharding_does_not_change_counts() {
        let psi = parse_global("X G snd(a,c) @ p & X G rcv(a,p) @ c").unwrap().formula;
        let a = check(&psi, 2, 1).unwrap();
        let b = check(&psi, 2, 3).unwrap();
        assert_eq!((a.diagrams, a.models, a.mismatches), (b.diagrams, b.models, b.mismatches));
        assert_eq!(a.models, 2);
    }

    #[test]
    fn a_wrong_automaton_is_caught() {
        let psi = parse_global("X G snd(a,c) @ p & X G rcv(a,p) @ c").unwrap().formula;
        let mut syn = synthesize(&psi).unwrap();
        syn.sca.init.clear();
        let r = check_synthesized(&psi, &syn, 1, 2);
        assert_eq!(r.mismatches, 1);
        let first = r.first.unwrap();
        assert!(first.models && !first.accepts);
        assert!(first.diagram.contains("msg"));
    }
}
