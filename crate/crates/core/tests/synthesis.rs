mod common;

use std::collections::BTreeSet;

use choreo_core::diagrams::enumerate_diagrams;
use choreo_core::fixtures;
use choreo_core::sca::{accepts, replay, Letter};
use choreo_core::semantics::models;
use choreo_core::syntax::{parse_global, LocalFormula, Vocabulary};
use choreo_core::synthesis::{build_sca, canonical_witness, prune_synthesized, synthesize, LocalState, Synthesized};

fn corpus() -> Vec<String> {
    common::corpus(0x5eed, 30)
}

fn expected_letter(syn: &Synthesized, s: usize, atom: u128) -> Letter {
    let cl = &syn.closure.services[s];
    let mut l: Letter = cl.atom_props(atom).into_iter().map(|p| p.0.clone()).collect();
    match cl.atom_comm(atom) {
        Some(LocalFormula::Send { msg, .. }) | Some(LocalFormula::Recv { msg, .. }) => {
            l.insert(msg.0.clone());
        }
        _ => {}
    }
    l
}

#[test]
fn producer_consumer_accepts_buffer_diagrams() {
    let syn = synthesize(&fixtures::formula(fixtures::PRODCONS)).unwrap();
    for text in [fixtures::BUFFER1, fixtures::BUFFER2, fixtures::BUFFER3] {
        let d = fixtures::diagram(text);
        let w = accepts(&syn.sca, &d).unwrap().expect("accepted");
        replay(&syn.sca, &d, &w).unwrap();
    }
    let literal = synthesize(&fixtures::formula(fixtures::PRODCONS_LITERAL)).unwrap();
    assert_eq!(literal.sca.num_init(), 0);
}

#[test]
fn letters_are_a_function_of_targets() {
    for text in corpus().iter().map(String::as_str).chain([fixtures::PRODCONS, fixtures::TRAVELLER]) {
        let syn = synthesize(&parse_global(text).unwrap().formula).unwrap();
        for (s, a) in syn.sca.services.iter().enumerate() {
            for t in &a.transitions {
                assert_eq!(a.letters[t.letter], expected_letter(&syn, s, syn.local[s][t.to].atom), "{text}");
            }
        }
    }
}

#[test]
fn state_counts_respect_the_construction_bound() {
    for text in corpus() {
        let psi = parse_global(&text).unwrap().formula;
        let full = build_sca(&psi).unwrap();
        let bound: usize = full.closure.services.iter().map(|c| 1usize << (c.len() + c.eventualities().len())).sum();
        let exact: usize = full.closure.services.iter().map(|c| c.atoms().len() << c.eventualities().len()).sum();
        assert_eq!(full.sca.num_states(), exact);
        assert!(synthesize(&psi).unwrap().sca.num_states() <= exact);
        assert!(exact <= bound);
    }
}

#[test]
fn pruning_full_and_reachable_constructions_agree() {
    let canon = |s: &Synthesized| {
        let states: Vec<BTreeSet<LocalState>> = s.local.iter().map(|v| v.iter().copied().collect()).collect();
        (states, s.sca.num_transitions(), s.sca.num_couplings(), s.sca.num_init())
    };
    for text in corpus() {
        let psi = parse_global(&text).unwrap().formula;
        let a = prune_synthesized(&build_sca(&psi).unwrap());
        let b = synthesize(&psi).unwrap();
        assert_eq!(canon(&a), canon(&b), "{text}");
    }
}

#[test]
fn formulas_without_communication_have_no_couplings() {
    for seed in 0..40 {
        let text = common::random_formula(seed, 6, false);
        let psi = parse_global(&text).unwrap().formula;
        assert!(psi.comm_props().is_empty());
        assert_eq!(build_sca(&psi).unwrap().sca.num_couplings(), 0, "{text}");
        assert_eq!(synthesize(&psi).unwrap().sca.num_couplings(), 0, "{text}");
    }
}

#[test]
fn models_yield_canonical_runs() {
    let mut witnessed = 0;
    for text in corpus().iter().map(String::as_str).chain([fixtures::PRODCONS]) {
        let psi = parse_global(text).unwrap().formula;
        let syn = synthesize(&psi).unwrap();
        let v = Vocabulary::of(&psi);
        for d in enumerate_diagrams(&v.services, &v.messages, &v.props, 2) {
            if models(&d, &psi).unwrap() {
                let w = canonical_witness(&syn, &d).unwrap().unwrap_or_else(|| panic!("{text}: no state for a model"));
                replay(&syn.sca, &d, &w).unwrap_or_else(|e| panic!("{text}: {e}"));
                witnessed += 1;
            }
        }
    }
    assert!(witnessed > 100);
}
