mod common;

use choreo_core::syntax::parse_global;
use choreo_core::tableau::{closure, ServiceClosure};
use proptest::prelude::*;

/// Every subset of the closure that passes the atom rules.
fn naive_atoms(cl: &ServiceClosure) -> Vec<u128> {
    let mut v: Vec<u128> = (0..1u128 << cl.len()).filter(|&b| cl.is_atom(b)).collect();
    v.sort_unstable();
    v
}

fn check(text: &str) -> Result<usize, TestCaseError> {
    let set = closure(&parse_global(text).unwrap().formula).unwrap();
    let mut checked = 0;
    for cl in set.services.iter().filter(|c| c.len() <= 12) {
        let mut fast = cl.atoms();
        fast.sort_unstable();
        prop_assert_eq!(&fast, &naive_atoms(cl), "{} / {}", text, cl.service);
        checked += 1;
    }
    Ok(checked)
}

proptest! {
    #![proptest_config(common::config(200))]
    #[test]
    fn atoms_match_subset_filtering(seed in any::<u64>(), comm in any::<bool>()) {
        check(&common::random_formula(seed, 6, comm))?;
    }
}

#[test]
fn fixed_formulas_match_subset_filtering() {
    let mut checked = 0;
    for text in ["X G snd(a,c) @ p & X G rcv(a,p) @ c", "F x @ s", "(Y x | X F y) @ s", "G (x -> X ~x) @ s"] {
        checked += check(text).unwrap();
    }
    assert!(checked >= 4);
}

#[test]
fn closure_grows_linearly() {
    let sizes: Vec<usize> = (1..=4)
        .map(|k| {
            let text = (0..k).map(|i| format!("F (x{i} | X x{i}) @ s")).collect::<Vec<_>>().join(" & ");
            closure(&parse_global(&text).unwrap().formula).unwrap().services[0].len()
        })
        .collect();
    let steps: Vec<usize> = sizes.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|&d| d == steps[0]), "{sizes:?}");
}
