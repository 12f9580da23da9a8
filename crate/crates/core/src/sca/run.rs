//! Accepting runs of an SCA on a Lamport diagram.
//!
//! A run labels every configuration with a global state. Because a
//! configuration's successor changes one component only, such a labelling
//! is determined by the state reached after each event, so the search
//! assigns states to events: per-service forward and backward domains are
//! computed first, then events are visited in a topological order with
//! backtracking, checking couplings at receives.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagrams::{self, Configuration, Endpoint, EventId, LamportDiagram, Violation};

use super::{Sca, ScaIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("diagram services {diagram:?} do not match automaton services {automaton:?}")]
    ServiceMismatch { diagram: Vec<String>, automaton: Vec<String> },
    #[error("label `{label}` of event `{event}` is not a symbol of service `{service}`")]
    OutsideAlphabet { service: String, event: String, label: String },
    #[error("invalid diagram: {0}")]
    InvalidDiagram(#[from] Violation),
}

/// The state reached after each event; `states[s][0]` is the initial state
/// of service `s`. Indexed by the diagram's service order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunWitness {
    pub states: Vec<Vec<usize>>,
}

impl RunWitness {
    /// The induced map from configurations to global states.
    pub fn labelling(&self, d: &LamportDiagram) -> BTreeMap<Configuration, Vec<usize>> {
        diagrams::configurations(d)
            .into_iter()
            .map(|c| {
                let q = c.iter().enumerate().map(|(s, &i)| self.states[s][i]).collect();
                (c, q)
            })
            .collect()
    }

    /// State names; `map[s]` is the automaton service of diagram service `s`.
    pub fn state_names(&self, sca: &Sca, d: &LamportDiagram) -> Vec<Vec<String>> {
        let map = service_map(sca, d).expect("witness belongs to this pair");
        self.states
            .iter()
            .enumerate()
            .map(|(s, qs)| qs.iter().map(|&q| sca.services[map[s]].states[q].clone()).collect())
            .collect()
    }
}

fn service_map(sca: &Sca, d: &LamportDiagram) -> Result<Vec<usize>, RunError> {
    let mismatch = || RunError::ServiceMismatch {
        diagram: d.services().iter().map(|s| s.0.clone()).collect(),
        automaton: sca.services.iter().map(|a| a.name.0.clone()).collect(),
    };
    if d.services().len() != sca.services.len() {
        return Err(mismatch());
    }
    d.services().iter().map(|s| sca.service_index(s).ok_or_else(mismatch)).collect()
}

/// Per-ordered-pair FIFO queues of sender states.
#[derive(Debug, Clone, Default)]
pub struct FifoChannels {
    queues: BTreeMap<(usize, usize), VecDeque<usize>>,
}

impl FifoChannels {
    pub fn push(&mut self, from: usize, to: usize, state: usize) {
        self.queues.entry((from, to)).or_default().push_back(state);
    }

    /// Removes the front of the queue from `from` to `to`.
    pub fn pop(&mut self, from: usize, to: usize) -> Option<usize> {
        self.queues.get_mut(&(from, to)).and_then(VecDeque::pop_front)
    }

    pub fn is_empty(&self) -> bool {
        self.queues.values().all(VecDeque::is_empty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("initial states are not an initial global state")]
    NotInitial,
    #[error("no transition for event `{0}`")]
    NoTransition(String),
    #[error("receive `{0}` found an empty channel")]
    EmptyChannel(String),
    #[error("receive `{0}` does not match the front of its channel")]
    WrongFront(String),
    #[error("receive `{0}` is not coupled to its send")]
    Uncoupled(String),
    #[error("state after `{0}` has couplings that the event does not honour")]
    CouplingObligation(String),
    #[error("final states not reached")]
    NotFinal,
    #[error("messages left in transit")]
    Undrained,
    #[error(transparent)]
    Run(#[from] RunError),
}

/// Replays a witness event by event through FIFO channels, checking every
/// run condition independently of the search.
pub fn replay(sca: &Sca, d: &LamportDiagram, w: &RunWitness) -> Result<(), ReplayError> {
    let map = service_map(sca, d)?;
    let idx = ScaIndex::new(sca);
    let n = map.len();
    let init_ok = sca.init.iter().any(|blk| (0..n).all(|s| blk[map[s]].contains(&w.states[s][0])));
    if !init_ok {
        return Err(ReplayError::NotInitial);
    }
    let order = diagrams::topological_order(d)
        .ok_or(RunError::InvalidDiagram(Violation { kind: diagrams::ViolationKind::Cycle, witnesses: vec![] }))?;
    let mut chans = FifoChannels::default();
    let mut sent_state = BTreeMap::new();
    for e in order.into_iter().filter(|e| !e.is_bottom()) {
        let (s, i) = (e.service, e.index);
        let a = map[s];
        let name = d.event(e).name.clone();
        let (from, to) = (w.states[s][i - 1], w.states[s][i]);
        let letter = sca.services[a].find_letter(&d.event(e).labels);
        let has_step = letter.is_some_and(|l| idx.out[a][from].contains(&(l, to)));
        if !has_step {
            return Err(ReplayError::NoTransition(name));
        }
        let obligations = idx.lambda_out[a][to];
        match d.endpoint(e) {
            Some(Endpoint::SendTo(r)) => {
                if obligations != 1 << map[r.service] {
                    return Err(ReplayError::CouplingObligation(name));
                }
                chans.push(s, r.service, to);
                sent_state.insert(e, to);
            }
            Some(Endpoint::RecvFrom(snd)) => {
                if obligations != 0 {
                    return Err(ReplayError::CouplingObligation(name));
                }
                let front = chans.pop(snd.service, s).ok_or_else(|| ReplayError::EmptyChannel(name.clone()))?;
                if front != sent_state[&snd] {
                    return Err(ReplayError::WrongFront(name));
                }
                if !idx.has_lambda(sca, map[snd.service], front, a, to) {
                    return Err(ReplayError::Uncoupled(name));
                }
            }
            None => {
                if obligations != 0 {
                    return Err(ReplayError::CouplingObligation(name));
                }
            }
        }
    }
    if !(0..n).all(|s| sca.services[map[s]].finals[*w.states[s].last().unwrap()]) {
        return Err(ReplayError::NotFinal);
    }
    if !chans.is_empty() {
        return Err(ReplayError::Undrained);
    }
    Ok(())
}

/// Reusable run search for one SCA.
pub struct RunChecker<'a> {
    sca: &'a Sca,
    idx: ScaIndex,
}

#[derive(Clone, Copy)]
enum Role {
    Internal,
    Send(usize),
    Recv(EventId),
}

struct Search<'s> {
    sca: &'s Sca,
    idx: &'s ScaIndex,
    map: Vec<usize>,
    order: Vec<EventId>,
    letters: Vec<Vec<usize>>,
    roles: Vec<Vec<Role>>,
    domains: Vec<Vec<Vec<usize>>>,
    states: Vec<Vec<usize>>,
    failed: HashSet<Vec<usize>>,
}

impl<'a> RunChecker<'a> {
    pub fn new(sca: &'a Sca) -> Self {
        RunChecker { sca, idx: ScaIndex::new(sca) }
    }

    /// An accepting run, if one exists.
    pub fn accepts(&self, d: &LamportDiagram) -> Result<Option<RunWitness>, RunError> {
        let sca = self.sca;
        let idx = &self.idx;
        let map = service_map(sca, d)?;
        let n = map.len();
        for s in 0..n {
            let a = &sca.services[map[s]];
            for e in d.events(s) {
                if let Some(l) = e.labels.iter().find(|l| !a.symbols.contains(*l)) {
                    return Err(RunError::OutsideAlphabet {
                        service: a.name.0.clone(),
                        event: e.name.clone(),
                        label: l.clone(),
                    });
                }
            }
        }
        diagrams::validate(d)?;

        let mut letters = vec![Vec::new(); n];
        let mut roles = vec![Vec::new(); n];
        for s in 0..n {
            letters[s].push(usize::MAX);
            roles[s].push(Role::Internal);
            for i in 1..d.events(s).len() {
                let e = EventId::new(s, i);
                match sca.services[map[s]].find_letter(&d.event(e).labels) {
                    Some(l) => letters[s].push(l),
                    None => return Ok(None),
                }
                roles[s].push(match d.endpoint(e) {
                    Some(Endpoint::SendTo(r)) => Role::Send(r.service),
                    Some(Endpoint::RecvFrom(snd)) => Role::Recv(snd),
                    None => Role::Internal,
                });
            }
        }

        // Forward domains, with the coupling obligations of each post-state.
        let mut domains: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
        for s in 0..n {
            let a = map[s];
            let mut cur = idx.init_states[a].clone();
            domains[s].push(cur.clone());
            for i in 1..d.events(s).len() {
                let want = match roles[s][i] {
                    Role::Send(t) => 1u64 << map[t],
                    _ => 0,
                };
                let mut next: Vec<usize> = cur
                    .iter()
                    .flat_map(|&q| idx.out[a][q].iter())
                    .filter(|&&(l, q2)| l == letters[s][i] && idx.lambda_out[a][q2] == want)
                    .map(|&(_, q2)| q2)
                    .collect();
                next.sort_unstable();
                next.dedup();
                domains[s].push(next.clone());
                cur = next;
            }
            // Backward pass from the final states.
            let k = d.events(s).len() - 1;
            domains[s][k].retain(|&q| sca.services[a].finals[q]);
            for i in (1..=k).rev() {
                let later = domains[s][i].clone();
                let l = letters[s][i];
                domains[s][i - 1]
                    .retain(|&q| idx.out[a][q].iter().any(|&(l2, q2)| l2 == l && later.binary_search(&q2).is_ok()));
            }
            if domains[s].iter().any(Vec::is_empty) {
                return Ok(None);
            }
        }

        let mut order: Vec<EventId> = (0..n).map(|s| EventId::new(s, 0)).collect();
        order.extend(diagrams::topological_order(d).expect("validated").into_iter().filter(|e| !e.is_bottom()));
        let base_domains = domains;
        for block in &sca.init {
            let mut domains = base_domains.clone();
            for s in 0..n {
                domains[s][0].retain(|q| block[map[s]].binary_search(q).is_ok());
            }
            if domains.iter().any(|ds| ds[0].is_empty()) {
                continue;
            }
            let mut search = Search {
                sca,
                idx,
                map: map.clone(),
                order: order.clone(),
                letters: letters.clone(),
                roles: roles.clone(),
                domains,
                states: (0..n).map(|s| vec![usize::MAX; d.events(s).len()]).collect(),
                failed: HashSet::new(),
            };
            if search.dfs(0) {
                return Ok(Some(RunWitness { states: search.states }));
            }
        }
        Ok(None)
    }
}

impl Search<'_> {
    fn key(&self, p: usize) -> Vec<usize> {
        let mut key = vec![p];
        // Current state of every service.
        let mut cur = vec![usize::MAX; self.states.len()];
        let mut pending = Vec::new();
        for &e in &self.order[..p] {
            cur[e.service] = self.states[e.service][e.index];
        }
        // States of sends whose receive is still ahead.
        for &e in &self.order[p..] {
            if let Role::Recv(snd) = self.roles[e.service][e.index] {
                if self.states[snd.service][snd.index] != usize::MAX {
                    pending.push(self.states[snd.service][snd.index]);
                }
            }
        }
        key.extend(cur);
        key.extend(pending);
        key
    }

    fn dfs(&mut self, p: usize) -> bool {
        if p == self.order.len() {
            return true;
        }
        let key = self.key(p);
        if self.failed.contains(&key) {
            return false;
        }
        let e = self.order[p];
        let (s, i) = (e.service, e.index);
        let a = self.map[s];
        let candidates: Vec<usize> = if i == 0 {
            self.domains[s][0].clone()
        } else {
            let from = self.states[s][i - 1];
            let mut c: Vec<usize> = self.idx.out[a][from]
                .iter()
                .filter(|&&(l, q)| l == self.letters[s][i] && self.domains[s][i].binary_search(&q).is_ok())
                .map(|&(_, q)| q)
                .collect();
            c.dedup();
            c
        };
        for q in candidates {
            if let Role::Recv(snd) = self.roles[s][i] {
                let sq = self.states[snd.service][snd.index];
                if !self.idx.has_lambda(self.sca, self.map[snd.service], sq, a, q) {
                    continue;
                }
            }
            self.states[s][i] = q;
            if self.dfs(p + 1) {
                return true;
            }
            self.states[s][i] = usize::MAX;
        }
        self.failed.insert(key);
        false
    }
}

/// One-shot form of [`RunChecker::accepts`].
pub fn accepts(sca: &Sca, d: &LamportDiagram) -> Result<Option<RunWitness>, RunError> {
    RunChecker::new(sca).accepts(d)
}
