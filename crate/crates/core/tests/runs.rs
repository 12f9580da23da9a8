//! Run search against a brute-force search over configuration labellings.

mod common;

use std::sync::OnceLock;

use choreo_core::diagrams::{EventId, LamportDiagram};
use choreo_core::sca::{replay, RunChecker, Sca};
use common::brute::{diagrams, random_sca};

use proptest::prelude::*;

fn bound3() -> &'static [LamportDiagram] {
    static ALL: OnceLock<Vec<LamportDiagram>> = OnceLock::new();
    ALL.get_or_init(|| diagrams(3))
}

fn agree(sca: &Sca, d: &LamportDiagram) -> Result<(), TestCaseError> {
    let fast = RunChecker::new(sca).accepts(d).unwrap();
    prop_assert_eq!(fast.is_some(), common::brute::brute_force(sca, d), "diagram {:?}", d);
    if let Some(w) = fast {
        prop_assert!(replay(sca, d, &w).is_ok());
        prop_assert!(common::brute::is_accepting_run(sca, d, &w.states));
    }
    Ok(())
}

proptest! {
    #![proptest_config(common::config(48))]
    #[test]
    fn run_search_matches_brute_force(seed in any::<u64>(), picks in prop::collection::vec(any::<prop::sample::Index>(), 40)) {
        let sca = random_sca(seed);
        let all = bound3();
        for ix in picks {
            agree(&sca, &all[ix.index(all.len())])?;
        }
    }
}

proptest! {
    #![proptest_config(common::config(64))]
    #[test]
    fn planted_runs_are_found(pick in any::<prop::sample::Index>(), seed in any::<u64>(), others in prop::collection::vec(any::<prop::sample::Index>(), 10)) {
        let all = bound3();
        let d = &all[pick.index(all.len())];
        let sca = common::brute::planted_sca(d, seed);
        prop_assert!(RunChecker::new(&sca).accepts(d).unwrap().is_some());
        agree(&sca, d)?;
        for ix in others {
            agree(&sca, &all[ix.index(all.len())])?;
        }
    }
}

#[test]
fn every_small_diagram_on_fixed_automata() {
    let all = diagrams(2);
    let mut accepted = 0;
    for seed in 0..24 {
        let sca = random_sca(seed);
        for d in &all {
            agree(&sca, d).unwrap();
            accepted += usize::from(RunChecker::new(&sca).accepts(d).unwrap().is_some());
        }
    }
    assert!(accepted > 0, "the sample should contain accepted diagrams");
}

#[test]
fn diagram_bound_three_is_in_range() {
    let all = bound3();
    assert!(all.iter().all(|d| (0..2).all(|s| d.len(s) <= 3)));
    assert!(all.iter().any(|d| d.comm().len() == 3));
    let _ = EventId::new(0, 0);
}
