//! Seeded random formulas over two services `s` and `t`, messages `m` and
//! `n`, and one proposition per service.
#![allow(dead_code)]

pub mod brute;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const S_ATOMS: [&str; 7] = ["x", "true", "false", "snd(m,t)", "rcv(m,t)", "snd(n,t)", "rcv(n,t)"];
const T_ATOMS: [&str; 7] = ["y", "true", "false", "snd(m,s)", "rcv(m,s)", "snd(n,s)", "rcv(n,s)"];
const QUIET: usize = 3;

fn local(rng: &mut ChaCha8Rng, budget: usize, svc: &str, comm: bool) -> String {
    let atoms: &[&str] = match (svc, comm) {
        ("s", true) => &S_ATOMS,
        ("s", false) => &S_ATOMS[..QUIET],
        (_, true) => &T_ATOMS,
        (_, false) => &T_ATOMS[..QUIET],
    };
    if budget <= 1 || rng.gen_bool(0.25) {
        return atoms.choose(rng).unwrap().to_string();
    }
    if budget == 2 || rng.gen_bool(0.55) {
        let op = ["~", "X ", "F ", "G ", "Y "].choose(rng).unwrap();
        return format!("{op}{}", local(rng, budget - 1, svc, comm));
    }
    let left = rng.gen_range(1..budget - 1);
    let op = ["&", "|", "->"].choose(rng).unwrap();
    format!("({} {op} {})", local(rng, left, svc, comm), local(rng, budget - 1 - left, svc, comm))
}

fn global(rng: &mut ChaCha8Rng, budget: usize, comm: bool) -> String {
    if budget <= 2 || rng.gen_bool(0.5) {
        let svc = if rng.gen_bool(0.5) { "s" } else { "t" };
        return format!("({}) @ {svc}", local(rng, budget, svc, comm));
    }
    if rng.gen_bool(0.2) {
        return format!("~{}", global(rng, budget - 1, comm));
    }
    let left = rng.gen_range(1..budget - 1);
    let op = ["&", "|", "->"].choose(rng).unwrap();
    format!("({} {op} {})", global(rng, left, comm), global(rng, budget - 1 - left, comm))
}

/// A formula with at most `nodes` operators and atoms (`@` not counted).
pub fn random_formula(seed: u64, nodes: usize, comm: bool) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = rng.gen_range(1..=nodes);
    global(&mut rng, budget, comm)
}

/// `count` formulas of at most six nodes; every third one has no
/// send/receive propositions.
pub fn corpus(seed: u64, count: usize) -> Vec<String> {
    (0..count as u64).map(|k| random_formula(seed.wrapping_add(k), 6, k % 3 != 0)).collect()
}

/// Proptest settings for integration tests: there is no `src/` next to these
/// files to persist failures into.
pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases, failure_persistence: None, ..Default::default() }
}
