//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use choreo_core::conformance::{realizes_bounded, Verdict};
use choreo_core::diagrams::{word_messages, LamportDiagram};
use choreo_core::fixtures;
use choreo_core::oracle::{check_synthesized, thread_count};
use choreo_core::sca::{accepts, bounded_chor_language, RunChecker};
use choreo_core::syntax::{parse_global, GlobalFormula, LocalFormula, Vocabulary};
use choreo_core::synthesis::{stats, synthesize, SynthesisStats};
use choreo_core::tableau::closure;

/// Events per service in the oracle check.
const ORACLE_BOUND: usize = 2;
/// Wall-clock budget for the oracle check.
const ORACLE_BUDGET: Duration = Duration::from_secs(600);
const RANDOM_FORMULAS: usize = 24;
const CORPUS_SEED: u64 = 2024;
/// Limits for the internal brute-force comparisons.
const NAIVE_CLOSURE_LIMIT: usize = 12;
const RUN_EVENTS: usize = 3;
const RUN_SCAS: u64 = 40;

type Outcome = Result<String, String>;

fn corpus() -> Vec<String> {
    common::corpus(CORPUS_SEED, RANDOM_FORMULAS)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn services_and_messages(psi: &GlobalFormula) -> (usize, usize) {
    let v = Vocabulary::of(psi);
    (v.services.len(), v.messages.len())
}

fn semantic_oracle() -> Outcome {
    let start = Instant::now();
    let threads = thread_count();
    let mut inputs: Vec<(String, String)> =
        fixtures::FORMULAS.iter().map(|(name, text)| (name.to_string(), text.to_string())).collect();
    for (k, text) in corpus().into_iter().enumerate() {
        let psi = parse_global(&text).map_err(|e| e.to_string())?.formula;
        let (s, m) = services_and_messages(&psi);
        ensure(s <= 2 && m <= 2, || format!("random formula {text} exceeds the vocabulary limits"))?;
        inputs.push((format!("random#{k}"), text));
    }
    let (mut diagrams, mut models) = (0, 0);
    for (name, text) in &inputs {
        let psi = parse_global(text).map_err(|e| e.to_string())?.formula;
        let syn = synthesize(&psi).map_err(|e| e.to_string())?;
        let report = check_synthesized(&psi, &syn, ORACLE_BOUND, threads);
        if let Some(m) = &report.first {
            return Err(format!(
                "{name} ({text}): {} mismatches; first (models={}, accepts={}):\n{}",
                report.mismatches, m.models, m.accepts, m.diagram
            ));
        }
        diagrams += report.diagrams;
        models += report.models;
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} formulas ({} random), {diagrams} diagrams with <= {ORACLE_BOUND} events/service, {models} models, 0 mismatches, {:.1}s",
        inputs.len(),
        RANDOM_FORMULAS,
        elapsed.as_secs_f64()
    ))
}

fn run_replay() -> Outcome {
    let sca = fixtures::sca(fixtures::PRODCONS_SCA);
    let d = fixtures::diagram(fixtures::BUFFER3);
    let w = accepts(&sca, &d).map_err(|e| e.to_string())?.ok_or("diagram (iii) rejected")?;
    let expected: BTreeMap<(&str, &str), (&str, &str)> = [
        (("⊥p", "⊥c"), ("q0", "q0'")),
        (("e1", "⊥c"), ("q1", "q0'")),
        (("e2", "⊥c"), ("q1", "q0'")),
        (("e1", "f1"), ("q1", "q1'")),
        (("e3", "⊥c"), ("q2", "q0'")),
        (("e2", "f1"), ("q1", "q1'")),
        (("e3", "f1"), ("q2", "q1'")),
        (("e2", "f2"), ("q1", "q1'")),
        (("e3", "f2"), ("q2", "q1'")),
        (("e3", "f3"), ("q2", "q2'")),
    ]
    .into();
    let names = w.state_names(&sca, &d);
    let got: BTreeMap<(String, String), (String, String)> = w
        .labelling(&d)
        .keys()
        .map(|c| {
            let ev = |s: usize| d.events(s)[c[s]].name.clone();
            ((ev(0), ev(1)), (names[0][c[0]].clone(), names[1][c[1]].clone()))
        })
        .collect();
    let want: BTreeMap<(String, String), (String, String)> =
        expected.iter().map(|(&(a, b), &(x, y))| ((a.into(), b.into()), (x.into(), y.into()))).collect();
    ensure(got == want, || format!("labelling differs: {got:?}"))?;
    Ok(format!("{} configurations labelled exactly as drawn", got.len()))
}

fn producer_consumer() -> Outcome {
    let sca = fixtures::sca(fixtures::PRODCONS_SCA);
    let checker = RunChecker::new(&sca);
    for (name, text) in [("(i)", fixtures::BUFFER1), ("(ii)", fixtures::BUFFER2), ("(iii)", fixtures::BUFFER3)] {
        let d = fixtures::diagram(text);
        ensure(matches!(checker.accepts(&d), Ok(Some(_))), || format!("{name} rejected"))?;
    }
    let empty = LamportDiagram::new(fixtures::diagram(fixtures::BUFFER1).services().to_vec(), ["a".to_string()].into());
    ensure(matches!(checker.accepts(&empty), Ok(None)), || "⊥-only diagram accepted".into())?;
    Ok("accepts (i), (ii), (iii); rejects the ⊥-only diagram".into())
}

fn c1_witness() -> Outcome {
    let sca = fixtures::sca(fixtures::C1_IMPL);
    let c1 = fixtures::protocol(fixtures::C1);
    let chor: BTreeSet<String> = bounded_chor_language(&sca, 2).iter().map(|w| word_messages(w)).collect();
    ensure(chor == BTreeSet::from(["a b".to_string(), "b a".to_string()]), || format!("Chor = {chor:?}"))?;
    let report = realizes_bounded(&sca, &c1, 1, 2);
    match &report.verdict {
        Verdict::ScaExtra(w) if word_messages(w) == "b a" => Ok("Chor = {a b, b a}; not realized, witness b a".into()),
        v => Err(format!("verdict {v:?}")),
    }
}

fn c2_emergent() -> Outcome {
    let sca = fixtures::sca(fixtures::C2_IMPL);
    let c2 = fixtures::protocol(fixtures::C2);
    let chor: BTreeSet<String> = bounded_chor_language(&sca, 3).iter().map(|w| word_messages(w)).collect();
    ensure(chor.contains("b a c"), || format!("Chor = {chor:?}"))?;
    let report = realizes_bounded(&sca, &c2, 3, 3);
    ensure(report.verdict.witness().map(word_messages).as_deref() == Some("b a c"), || {
        format!("{:?}", report.verdict)
    })?;
    Ok(format!("Chor = {chor:?}; b a c is not a protocol word"))
}

fn zero_couplings() -> Outcome {
    let mut quiet = 0;
    let texts: Vec<String> =
        corpus().into_iter().chain((0..20).map(|k| common::random_formula(CORPUS_SEED + 1000 + k, 6, false))).collect();
    for text in &texts {
        let psi = parse_global(text).map_err(|e| e.to_string())?.formula;
        let syn = synthesize(&psi).map_err(|e| e.to_string())?;
        if psi.comm_props().is_empty() {
            quiet += 1;
            ensure(syn.sca.num_couplings() == 0, || format!("{text}: {} couplings", syn.sca.num_couplings()))?;
        }
    }
    ensure(quiet >= 20, || format!("only {quiet} formulas without communication"))?;
    Ok(format!("{quiet} formulas without send/receive propositions, all with 0 couplings"))
}

fn table() -> Outcome {
    let mut rows = vec![SynthesisStats::HEADER.to_string()];
    let texts: Vec<String> = fixtures::FORMULAS.iter().map(|(_, t)| t.to_string()).chain(corpus()).collect();
    for text in &texts {
        let psi = parse_global(text).map_err(|e| e.to_string())?.formula;
        let start = Instant::now();
        let syn = synthesize(&psi).map_err(|e| e.to_string())?;
        let st = stats(&psi, &syn.sca, start.elapsed());
        let bound: usize = syn.closure.services.iter().map(|c| 1usize << (c.len() + c.eventualities().len())).sum();
        ensure(st.states <= bound, || format!("{text}: {} states above {bound}", st.states))?;
        if st.send_recv_props == 0 {
            ensure(st.couplings == 0, || format!("{text}: couplings without communication"))?;
        }
        for (s, a) in syn.sca.services.iter().enumerate() {
            let cl = &syn.closure.services[s];
            for t in &a.transitions {
                let b = syn.local[s][t.to].atom;
                let mut want: BTreeSet<String> = cl.atom_props(b).into_iter().map(|p| p.0.clone()).collect();
                if let Some(LocalFormula::Send { msg, .. } | LocalFormula::Recv { msg, .. }) = cl.atom_comm(b) {
                    want.insert(msg.0.clone());
                }
                ensure(a.letters[t.letter] == want, || format!("{text}: letter not determined by target"))?;
            }
        }
        rows.push(st.row());
    }
    ensure(rows[0].split_whitespace().count() >= 7, || "header".into())?;
    println!("{}", rows[..=fixtures::FORMULAS.len()].join("\n"));
    Ok(format!("{} rows; columns and structural bounds hold", rows.len() - 1))
}

fn internals() -> Outcome {
    let mut closures = 0;
    let texts: Vec<String> = fixtures::FORMULAS.iter().map(|(_, t)| t.to_string()).chain(corpus()).collect();
    for text in &texts {
        let set = closure(&parse_global(text).map_err(|e| e.to_string())?.formula).map_err(|e| e.to_string())?;
        for cl in set.services.iter().filter(|c| c.len() <= NAIVE_CLOSURE_LIMIT) {
            let mut fast = cl.atoms();
            fast.sort_unstable();
            let naive: Vec<u128> = (0..1u128 << cl.len()).filter(|&b| cl.is_atom(b)).collect();
            ensure(fast == naive, || format!("{text}: atoms of {} differ", cl.service))?;
            closures += 1;
        }
    }
    let all = common::brute::diagrams(RUN_EVENTS);
    let (mut pairs, mut accepted) = (0, 0);
    for seed in 0..RUN_SCAS {
        let sca = common::brute::random_sca(seed);
        let checker = RunChecker::new(&sca);
        for d in all.iter().skip(seed as usize % 7).step_by(7) {
            let fast = checker.accepts(d).map_err(|e| e.to_string())?.is_some();
            ensure(fast == common::brute::brute_force(&sca, d), || format!("seed {seed}: disagreement on\n{d:?}"))?;
            pairs += 1;
            accepted += usize::from(fast);
        }
    }
    for (k, d) in all.iter().enumerate().step_by(5) {
        let sca = common::brute::planted_sca(d, k as u64);
        for e in all.iter().skip(k % 11).step_by(97).chain([d]) {
            let fast = RunChecker::new(&sca).accepts(e).map_err(|e| e.to_string())?.is_some();
            ensure(fast == common::brute::brute_force(&sca, e), || format!("planted {k}: disagreement on\n{e:?}"))?;
            pairs += 1;
            accepted += usize::from(fast);
        }
    }
    Ok(format!("{closures} closures (<= {NAIVE_CLOSURE_LIMIT} members) match subset filtering; {pairs} automaton/diagram pairs (<= {RUN_EVENTS} events/service, <= 6 states/service, {accepted} accepted) match brute force"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 semantics vs synthesis oracle", semantic_oracle),
        ("2 accepting run replay", run_replay),
        ("3 producer-consumer conformance", producer_consumer),
        ("4 C1 unrealizability witness", c1_witness),
        ("5 C2 emergent behaviour", c2_emergent),
        ("6 zero-coupling law", zero_couplings),
        ("7 table format", table),
        ("8 oracle internals vs brute force", internals),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
