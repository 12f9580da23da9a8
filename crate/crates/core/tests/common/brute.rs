//! Direct check of the run conditions, one configuration step at a time.

use std::collections::BTreeSet;

use choreo_core::diagrams::{configurations, enumerate_diagrams, successors, Endpoint, LamportDiagram};
use choreo_core::sca::{Letter, Sca, ServiceAutomaton};
use choreo_core::syntax::{Message, Prop, ServiceId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn has_transition(a: &ServiceAutomaton, from: usize, letter: &Letter, to: usize) -> bool {
    a.transitions.iter().any(|t| t.from == from && t.to == to && &a.letters[t.letter] == letter)
}

fn lambda_targets(sca: &Sca, s: usize, q: usize) -> BTreeSet<usize> {
    sca.couplings.iter().filter(|b| b.from_service == s && b.from.contains(&q)).map(|b| b.to_service).collect()
}

/// All state sequences of service `s` along its chain that respect its local
/// transitions, starting anywhere.
fn local_paths(sca: &Sca, d: &LamportDiagram, s: usize) -> Vec<Vec<usize>> {
    let a = &sca.services[s];
    let mut paths: Vec<Vec<usize>> = (0..a.num_states()).map(|q| vec![q]).collect();
    for ev in &d.events(s)[1..] {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                let last = *p.last().unwrap();
                (0..a.num_states()).filter(move |&q| has_transition(a, last, &ev.labels, q)).map(move |q| {
                    let mut p2 = p.clone();
                    p2.push(q);
                    p2
                })
            })
            .collect();
    }
    paths
}

/// Literal check of the run conditions on every configuration step.
pub fn is_accepting_run(sca: &Sca, d: &LamportDiagram, states: &[Vec<usize>]) -> bool {
    let rho = |c: &[usize]| -> Vec<usize> { c.iter().enumerate().map(|(s, &i)| states[s][i]).collect() };
    let init: BTreeSet<Vec<usize>> = sca
        .init
        .iter()
        .flat_map(|b| {
            let mut tuples = vec![vec![]];
            for set in b {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t: Vec<usize>| set.iter().map(move |&q| [t.clone(), vec![q]].concat()))
                    .collect();
            }
            tuples
        })
        .collect();
    if !init.contains(&rho(&d.initial_configuration())) {
        return false;
    }
    for c in configurations(d) {
        let before = rho(&c);
        for (e, next) in successors(&c, d) {
            let after = rho(&next);
            let i = e.service;
            if (0..before.len()).any(|j| j != i && before[j] != after[j]) {
                return false;
            }
            if !has_transition(&sca.services[i], before[i], &d.event(e).labels, after[i]) {
                return false;
            }
            let partner = d.endpoint(e);
            if let Some(Endpoint::RecvFrom(snd)) = partner {
                if !sca.has_coupling(snd.service, states[snd.service][snd.index], i, after[i]) {
                    return false;
                }
            }
            for j in lambda_targets(sca, i, after[i]) {
                if !matches!(partner, Some(Endpoint::SendTo(r)) if r.service == j) {
                    return false;
                }
            }
        }
    }
    let last = rho(&d.maximal_configuration());
    last.iter().enumerate().all(|(s, &q)| sca.services[s].finals[q])
}

pub fn brute_force(sca: &Sca, d: &LamportDiagram) -> bool {
    let p = local_paths(sca, d, 0);
    let c = local_paths(sca, d, 1);
    p.iter().any(|x| c.iter().any(|y| is_accepting_run(sca, d, &[x.clone(), y.clone()])))
}

pub fn services() -> Vec<ServiceId> {
    vec![ServiceId::new("p"), ServiceId::new("c")]
}

/// Diagrams over `p`, `c`, message `a` and proposition `x` of `p`.
pub fn diagrams(bound: usize) -> Vec<LamportDiagram> {
    let msgs: BTreeSet<Message> = [Message::new("a")].into();
    let props = [(ServiceId::new("p"), [Prop::new("x")].into())].into();
    enumerate_diagrams(&services(), &msgs, &props, bound).collect()
}

/// Two services of at most six states each, over the vocabulary of [`diagrams`].
pub fn random_sca(seed: u64) -> Sca {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sca = Sca::new(["a"]);
    let mut sizes = Vec::new();
    for name in ["p", "c"] {
        let mut a = ServiceAutomaton::new(name);
        let n = rng.gen_range(1..=6);
        a.symbols.insert("a".to_string());
        if name == "p" {
            a.symbols.insert("x".to_string());
        }
        for q in 0..n {
            a.add_state(format!("q{q}"), rng.gen_bool(0.6));
        }
        let letters: &[&[&str]] = if name == "p" { &[&["a"], &["x"], &[], &["a", "x"]] } else { &[&["a"], &[]] };
        for _ in 0..rng.gen_range(n..=3 * n + 3) {
            let l = letters[rng.gen_range(0..letters.len())];
            a.add_transition(rng.gen_range(0..n), l.iter().copied(), rng.gen_range(0..n));
        }
        sizes.push(n);
        sca.add_service(a);
    }
    for (s, t) in [(0, 1), (1, 0)] {
        // Only some states are post-send states; the others stay uncoupled.
        let senders: Vec<usize> = (0..sizes[s]).filter(|_| rng.gen_bool(0.4)).collect();
        for q in senders {
            for r in 0..sizes[t] {
                if rng.gen_bool(0.5) {
                    sca.couple(s, q, t, r);
                }
            }
        }
    }
    for _ in 0..rng.gen_range(1..=2) {
        sca.add_init(&[rng.gen_range(0..sizes[0]), rng.gen_range(0..sizes[1])]);
    }
    sca
}

/// An automaton pair that follows `d` event by event, plus a few random
/// extra transitions and couplings, so that runs exist but are not unique.
pub fn planted_sca(d: &LamportDiagram, seed: u64) -> Sca {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sca = Sca::new(["a"]);
    for s in 0..2 {
        let mut a = ServiceAutomaton::new(d.services()[s].0.clone());
        a.symbols.insert("a".to_string());
        if s == 0 {
            a.symbols.insert("x".to_string());
        }
        let n = d.events(s).len();
        for q in 0..n {
            a.add_state(format!("q{q}"), q + 1 == n || rng.gen_bool(0.2));
        }
        for (i, ev) in d.events(s).iter().enumerate().skip(1) {
            a.add_transition(i - 1, ev.labels.iter().cloned(), i);
        }
        for _ in 0..rng.gen_range(0..=3) {
            let ev = &d.events(s)[rng.gen_range(0..n)];
            a.add_transition(rng.gen_range(0..n), ev.labels.iter().cloned(), rng.gen_range(0..n));
        }
        sca.add_service(a);
    }
    for &(snd, rcv) in d.comm() {
        sca.couple(snd.service, snd.index, rcv.service, rcv.index);
    }
    // Extra couplings leave post-send states only, so the planted run survives.
    for _ in 0..rng.gen_range(0..=2) {
        if let Some(&(snd, _)) = d.comm().get(rng.gen_range(0..d.comm().len().max(1))) {
            let t = 1 - snd.service;
            sca.couple(snd.service, snd.index, t, rng.gen_range(0..d.events(t).len()));
        }
    }
    sca.add_init(&[0, 0]);
    sca
}
