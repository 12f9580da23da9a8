//! Systems of communicating automata.
//!
//! Each service runs a finite automaton over sets of symbols. Coupling
//! (λ) edges link the state a sender reaches after a send to the state the
//! receiver reaches after the matching receive. Couplings and initial
//! states are stored as products of state sets, which keeps the large
//! synthesized systems compact; a single edge is a 1×1 block.

mod format;
mod language;
mod run;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::syntax::ServiceId;

pub use format::{parse_sca, print_sca, to_dot};
pub use language::{bounded_chor_language, bounded_poset_language};
pub use run::{accepts, replay, FifoChannels, ReplayError, RunChecker, RunError, RunWitness};

pub type Letter = BTreeSet<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub letter: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceAutomaton {
    pub name: ServiceId,
    /// Symbols the letters are drawn from (`P_s ∪ M`).
    pub symbols: BTreeSet<String>,
    pub states: Vec<String>,
    pub finals: Vec<bool>,
    /// Interned letters; transitions refer to them by index.
    pub letters: Vec<Letter>,
    pub transitions: Vec<Transition>,
    #[serde(skip)]
    state_index: HashMap<String, usize>,
    #[serde(skip)]
    letter_index: HashMap<Letter, usize>,
}

impl ServiceAutomaton {
    pub fn new(name: impl Into<String>) -> Self {
        ServiceAutomaton {
            name: ServiceId::new(name),
            symbols: BTreeSet::new(),
            states: Vec::new(),
            finals: Vec::new(),
            letters: Vec::new(),
            transitions: Vec::new(),
            state_index: HashMap::new(),
            letter_index: HashMap::new(),
        }
    }

    /// Adds a state, or returns the existing one of that name.
    pub fn add_state(&mut self, name: impl Into<String>, is_final: bool) -> usize {
        let name = name.into();
        if let Some(&q) = self.state_index.get(&name) {
            self.finals[q] |= is_final;
            return q;
        }
        self.state_index.insert(name.clone(), self.states.len());
        self.states.push(name);
        self.finals.push(is_final);
        self.states.len() - 1
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn letter_id(&mut self, letter: Letter) -> usize {
        if let Some(&l) = self.letter_index.get(&letter) {
            return l;
        }
        self.symbols.extend(letter.iter().cloned());
        self.letter_index.insert(letter.clone(), self.letters.len());
        self.letters.push(letter);
        self.letters.len() - 1
    }

    pub fn find_letter(&self, letter: &Letter) -> Option<usize> {
        self.letter_index.get(letter).copied()
    }

    pub fn add_transition<I, S>(&mut self, from: usize, letter: I, to: usize)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let letter = self.letter_id(letter.into_iter().map(Into::into).collect());
        self.transitions.push(Transition { from, letter, to });
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    fn reindex(&mut self) {
        self.state_index = self.states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        self.letter_index = self.letters.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
    }
}

/// Every state of `from` is coupled to every state of `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingBlock {
    pub from_service: usize,
    pub from: Vec<usize>,
    pub to_service: usize,
    pub to: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sca {
    /// Symbols that are message names.
    pub messages: BTreeSet<String>,
    pub services: Vec<ServiceAutomaton>,
    pub couplings: Vec<CouplingBlock>,
    /// Initial global states as a union of products: `init[b][s]` is the
    /// set of states of service `s` in block `b`.
    pub init: Vec<Vec<Vec<usize>>>,
}

impl Sca {
    pub fn new<I, S>(messages: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Sca {
            messages: messages.into_iter().map(Into::into).collect(),
            services: Vec::new(),
            couplings: Vec::new(),
            init: Vec::new(),
        }
    }

    pub fn add_service(&mut self, automaton: ServiceAutomaton) -> usize {
        self.services.push(automaton);
        self.services.len() - 1
    }

    pub fn service_index(&self, name: &ServiceId) -> Option<usize> {
        self.services.iter().position(|a| &a.name == name)
    }

    pub fn couple(&mut self, from_service: usize, from: usize, to_service: usize, to: usize) {
        self.couplings.push(CouplingBlock { from_service, from: vec![from], to_service, to: vec![to] });
    }

    pub fn couple_block(&mut self, from_service: usize, mut from: Vec<usize>, to_service: usize, mut to: Vec<usize>) {
        from.sort_unstable();
        from.dedup();
        to.sort_unstable();
        to.dedup();
        if !from.is_empty() && !to.is_empty() {
            self.couplings.push(CouplingBlock { from_service, from, to_service, to });
        }
    }

    pub fn add_init(&mut self, tuple: &[usize]) {
        self.init.push(tuple.iter().map(|&q| vec![q]).collect());
    }

    pub fn add_init_block(&mut self, mut block: Vec<Vec<usize>>) {
        for set in &mut block {
            set.sort_unstable();
            set.dedup();
        }
        if block.iter().all(|s| !s.is_empty()) {
            self.init.push(block);
        }
    }

    pub fn num_states(&self) -> usize {
        self.services.iter().map(|a| a.states.len()).sum()
    }

    pub fn num_transitions(&self) -> usize {
        self.services.iter().map(|a| a.transitions.len()).sum()
    }

    /// Number of distinct λ edges.
    pub fn num_couplings(&self) -> usize {
        let mut edges = BTreeSet::new();
        let mut total = 0;
        for b in &self.couplings {
            if b.from.len() * b.to.len() > 64 {
                // Large blocks are produced only by synthesis, where blocks
                // are disjoint by construction.
                total += b.from.len() * b.to.len();
                continue;
            }
            for &q in &b.from {
                for &r in &b.to {
                    edges.insert((b.from_service, q, b.to_service, r));
                }
            }
        }
        total + edges.len()
    }

    /// Number of initial global states (blocks assumed disjoint).
    pub fn num_init(&self) -> usize {
        self.init.iter().map(|b| b.iter().map(Vec::len).product::<usize>()).sum()
    }

    /// Rebuilds name lookups, e.g. after deserialization.
    pub fn reindex(&mut self) {
        for a in &mut self.services {
            a.reindex();
        }
    }

    pub fn has_coupling(&self, i: usize, q: usize, j: usize, r: usize) -> bool {
        self.couplings
            .iter()
            .any(|b| b.from_service == i && b.to_service == j && b.from.contains(&q) && b.to.contains(&r))
    }
}

/// Lookup tables for run search.
pub(crate) struct ScaIndex {
    /// `out[s][q]`: `(letter, target)` pairs.
    pub out: Vec<Vec<Vec<(usize, usize)>>>,
    /// `lambda_out[s][q]`: bitmask of services reachable by a λ edge.
    pub lambda_out: Vec<Vec<u64>>,
    /// `blocks_from[s][q]`: coupling blocks with `q` among their sources.
    pub blocks_from: Vec<Vec<Vec<usize>>>,
    pub init_states: Vec<Vec<usize>>,
}

impl ScaIndex {
    pub fn new(sca: &Sca) -> Self {
        let n = sca.services.len();
        assert!(n <= 64, "at most 64 services are supported");
        let mut out: Vec<Vec<Vec<(usize, usize)>>> =
            sca.services.iter().map(|a| vec![Vec::new(); a.states.len()]).collect();
        for (s, a) in sca.services.iter().enumerate() {
            for t in &a.transitions {
                out[s][t.from].push((t.letter, t.to));
            }
            for list in &mut out[s] {
                list.sort_unstable();
                list.dedup();
            }
        }
        let mut lambda_out: Vec<Vec<u64>> = sca.services.iter().map(|a| vec![0; a.states.len()]).collect();
        let mut blocks_from: Vec<Vec<Vec<usize>>> =
            sca.services.iter().map(|a| vec![Vec::new(); a.states.len()]).collect();
        for (b, blk) in sca.couplings.iter().enumerate() {
            for &q in &blk.from {
                lambda_out[blk.from_service][q] |= 1 << blk.to_service;
                blocks_from[blk.from_service][q].push(b);
            }
        }
        let mut init_states = vec![BTreeSet::new(); n];
        for blk in &sca.init {
            for (s, set) in blk.iter().enumerate() {
                init_states[s].extend(set.iter().copied());
            }
        }
        ScaIndex {
            out,
            lambda_out,
            blocks_from,
            init_states: init_states.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn has_lambda(&self, sca: &Sca, i: usize, q: usize, j: usize, r: usize) -> bool {
        self.blocks_from[i][q].iter().any(|&b| {
            let blk = &sca.couplings[b];
            blk.to_service == j && blk.to.binary_search(&r).is_ok()
        })
    }
}
