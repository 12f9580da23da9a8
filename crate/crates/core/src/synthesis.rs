//! The automaton system of a formula.
//!
//! Local states are pairs of an atom and a set of pending eventualities.
//! [`build_sca`] generates every such pair; [`build_reachable`] applies the
//! same definition but only to states reachable from the initial ones.
//! [`prune`] then removes states that cannot take part in an accepting run.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagrams::LamportDiagram;
use crate::sca::{Letter, RunWitness, Sca, ScaIndex, ServiceAutomaton};
use crate::semantics::{LocalEvaluator, SemanticsError};
use crate::syntax::{GlobalFormula, LocalFormula};
use crate::tableau::{closure, ClosureSet, ServiceClosure, TableauError};

/// Refuse to materialize more local states than this in one service.
pub const MAX_STATES_PER_SERVICE: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("service `{service}` would need {states} states, more than {MAX_STATES_PER_SERVICE}")]
    TooManyStates { service: String, states: u128 },
}

/// An atom with its pending eventualities (bit `k` is the `k`-th `F a` of
/// the service's closure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocalState {
    pub atom: u128,
    pub obligations: u128,
}

#[derive(Debug, Clone)]
pub struct Synthesized {
    pub sca: Sca,
    pub closure: ClosureSet,
    /// `local[s][q]` describes state `q` of service `s`.
    pub local: Vec<Vec<LocalState>>,
}

struct ServiceData<'c> {
    cl: &'c ServiceClosure,
    atoms: Vec<u128>,
    atom_index: HashMap<u128, usize>,
    successors: HashMap<(u128, u128), Vec<usize>>,
    props: Vec<String>,
    messages: Vec<String>,
}

impl<'c> ServiceData<'c> {
    fn new(cl: &'c ServiceClosure, closure: &ClosureSet) -> Self {
        let atoms = cl.atoms();
        let atom_index = atoms.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut successors: HashMap<(u128, u128), Vec<usize>> = HashMap::new();
        for (i, &b) in atoms.iter().enumerate() {
            if !cl.is_initial(b) {
                successors.entry(cl.step_key_in(b)).or_default().push(i);
            }
        }
        let props = closure.vocab.props_of(&cl.service).into_iter().map(|p| p.0).collect();
        let messages = closure.vocab.messages.iter().map(|m| m.0.clone()).collect();
        ServiceData { cl, atoms, atom_index, successors, props, messages }
    }

    fn successors(&self, a: u128) -> &[usize] {
        self.successors.get(&self.cl.step_key_out(a)).map(Vec::as_slice).unwrap_or(&[])
    }

    fn letter(&self, b: u128) -> Letter {
        let mut l: Letter = self.cl.atom_props(b).into_iter().map(|p| p.0.clone()).collect();
        match self.cl.atom_comm(b) {
            Some(LocalFormula::Send { msg, .. }) | Some(LocalFormula::Recv { msg, .. }) => {
                l.insert(msg.0.clone());
            }
            _ => {}
        }
        l
    }

    fn update(&self, u: u128, b: u128) -> u128 {
        obligation_update(self.cl, u, b)
    }

    fn is_final(&self, st: LocalState) -> bool {
        self.cl.is_last(st.atom) && st.obligations == 0
    }

    fn automaton(&self) -> ServiceAutomaton {
        let mut a = ServiceAutomaton::new(self.cl.service.0.clone());
        a.symbols.extend(self.props.iter().cloned());
        a.symbols.extend(self.messages.iter().cloned());
        a
    }

    fn state_name(&self, st: LocalState) -> String {
        format!("a{}_u{}", self.atom_index[&st.atom], st.obligations)
    }
}

/// Members of `mask` (bits over the eventualities) whose argument is
/// false in `b`.
fn unfulfilled(cl: &ServiceClosure, mask: u128, b: u128) -> u128 {
    let mut v = 0;
    for (k, &i) in cl.eventualities().iter().enumerate() {
        if mask >> k & 1 == 1 {
            if let LocalFormula::Eventually(arg) = &cl.formulas[i] {
                if !cl.holds(b, arg) {
                    v |= 1 << k;
                }
            }
        }
    }
    v
}

/// Obligations after moving to atom `b` with pending set `u`: a non-empty
/// `u` is worked off, an empty one is refilled from the `F a` of `b`.
pub fn obligation_update(cl: &ServiceClosure, u: u128, b: u128) -> u128 {
    if u != 0 {
        return unfulfilled(cl, u, b);
    }
    let present = cl.eventualities().iter().enumerate().fold(0u128, |acc, (k, &i)| acc | (b >> i & 1) << k);
    unfulfilled(cl, present, b)
}

/// The run read off a model: each event is mapped to the atom of formulas
/// true there, paired with obligations tracked from `⊥`. `None` when some
/// such state is missing from the automaton.
pub fn canonical_witness(syn: &Synthesized, d: &LamportDiagram) -> Result<Option<RunWitness>, SemanticsError> {
    let mut states = Vec::new();
    for (s, svc) in d.services().iter().enumerate() {
        let Some(cs) = syn.closure.service_index(svc) else {
            return Err(SemanticsError::UnknownService(svc.clone()));
        };
        let Some(a) = syn.sca.service_index(svc) else {
            return Err(SemanticsError::UnknownService(svc.clone()));
        };
        let cl = &syn.closure.services[cs];
        let ids: HashMap<LocalState, usize> = syn.local[a].iter().enumerate().map(|(q, &st)| (st, q)).collect();
        let mut ev = LocalEvaluator::new(d, s);
        let mut atoms = vec![0u128; d.events(s).len()];
        for (k, f) in cl.formulas.iter().enumerate() {
            for (i, v) in ev.table(f)?.into_iter().enumerate() {
                atoms[i] |= u128::from(v) << k;
            }
        }
        let mut u = 0;
        let mut row = Vec::new();
        for (i, &atom) in atoms.iter().enumerate() {
            if i > 0 {
                u = obligation_update(cl, u, atom);
            }
            match ids.get(&LocalState { atom, obligations: u }) {
                Some(&q) => row.push(q),
                None => return Ok(None),
            }
        }
        states.push(row);
    }
    Ok(Some(RunWitness { states }))
}

/// Initial tuples grouped into products: initial atoms of a service are
/// interchangeable when they agree on every `a @ s` of the formula.
fn init_classes(closure: &ClosureSet, data: &[ServiceData<'_>]) -> Vec<Vec<Vec<u128>>> {
    let n = data.len();
    let mut anchored: Vec<Vec<LocalFormula>> = vec![Vec::new(); n];
    closure.formula.visit_locals(&mut |alpha, s| {
        let i = closure.service_index(s).expect("service of the closure");
        if !anchored[i].contains(alpha) {
            anchored[i].push(alpha.clone());
        }
    });
    let classes: Vec<Vec<Vec<u128>>> = (0..n)
        .map(|s| {
            let mut by_sig: BTreeMap<Vec<bool>, Vec<u128>> = BTreeMap::new();
            for &a in data[s].atoms.iter().filter(|&&a| data[s].cl.is_initial(a)) {
                let sig = anchored[s].iter().map(|f| data[s].cl.holds(a, f)).collect();
                by_sig.entry(sig).or_default().push(a);
            }
            by_sig.into_values().collect()
        })
        .collect();
    let mut out = Vec::new();
    if classes.iter().any(Vec::is_empty) {
        return out;
    }
    let mut pick = vec![0usize; n];
    loop {
        let reps: Vec<u128> = (0..n).map(|s| classes[s][pick[s]][0]).collect();
        if closure.global_contains(&reps, &closure.formula) {
            out.push((0..n).map(|s| classes[s][pick[s]].clone()).collect());
        }
        let mut s = 0;
        loop {
            if s == n {
                return out;
            }
            pick[s] += 1;
            if pick[s] < classes[s].len() {
                break;
            }
            pick[s] = 0;
            s += 1;
        }
    }
}

fn assemble(
    closure: ClosureSet,
    data: &[ServiceData<'_>],
    mut automata: Vec<ServiceAutomaton>,
    local: Vec<Vec<LocalState>>,
    init: Vec<Vec<Vec<u128>>>,
) -> Synthesized {
    let n = data.len();
    let ids: Vec<HashMap<LocalState, usize>> =
        local.iter().map(|qs| qs.iter().enumerate().map(|(i, &st)| (st, i)).collect()).collect();
    let mut sca = Sca::new(closure.vocab.messages.iter().map(|m| m.0.clone()));
    for a in automata.drain(..) {
        sca.add_service(a);
    }
    for blk in init {
        let sets = (0..n)
            .map(|s| {
                blk[s].iter().filter_map(|&a| ids[s].get(&LocalState { atom: a, obligations: 0 }).copied()).collect()
            })
            .collect();
        sca.add_init_block(sets);
    }
    for s in 0..n {
        for t in (0..n).filter(|&t| t != s) {
            for m in &closure.vocab.messages {
                let send = LocalFormula::send(m.as_str(), closure.vocab.services[t].as_str());
                let from: Vec<usize> =
                    (0..local[s].len()).filter(|&q| closure.services[s].holds(local[s][q].atom, &send)).collect();
                if from.is_empty() {
                    continue;
                }
                let probe = local[s][from[0]].atom;
                let to: Vec<usize> =
                    (0..local[t].len()).filter(|&r| closure.comm_step(s, probe, t, local[t][r].atom, m)).collect();
                sca.couple_block(s, from, t, to);
            }
        }
    }
    Synthesized { sca, closure, local }
}

fn closure_of(psi: &GlobalFormula) -> Result<ClosureSet, SynthesisError> {
    Ok(closure(psi)?)
}

/// The full construction: every atom paired with every obligation set.
pub fn build_sca(psi: &GlobalFormula) -> Result<Synthesized, SynthesisError> {
    let cl = closure_of(psi)?;
    let data: Vec<ServiceData<'_>> = cl.services.iter().map(|c| ServiceData::new(c, &cl)).collect();
    let mut automata = Vec::new();
    let mut local = Vec::new();
    for d in &data {
        let k = d.cl.eventualities().len();
        let total = (d.atoms.len() as u128) << k;
        if k >= 64 || total > MAX_STATES_PER_SERVICE as u128 {
            return Err(SynthesisError::TooManyStates { service: d.cl.service.0.clone(), states: total });
        }
        let mut a = d.automaton();
        let mut states = Vec::new();
        for &atom in &d.atoms {
            for u in 0..1u128 << k {
                let st = LocalState { atom, obligations: u };
                a.add_state(d.state_name(st), d.is_final(st));
                states.push(st);
            }
        }
        let id = |st: LocalState| (d.atom_index[&st.atom] << k) | st.obligations as usize;
        for &st in &states {
            for &bi in d.successors(st.atom) {
                let b = d.atoms[bi];
                let next = LocalState { atom: b, obligations: d.update(st.obligations, b) };
                a.add_transition(id(st), d.letter(b), id(next));
            }
        }
        automata.push(a);
        local.push(states);
    }
    let init = init_classes(&cl, &data);
    let out = assemble(cl.clone(), &data, automata, local, init);
    Ok(out)
}

/// The same construction restricted to states reachable from the initial
/// global states through local transitions.
pub fn build_reachable(psi: &GlobalFormula) -> Result<Synthesized, SynthesisError> {
    let cl = closure_of(psi)?;
    let data: Vec<ServiceData<'_>> = cl.services.iter().map(|c| ServiceData::new(c, &cl)).collect();
    let init = init_classes(&cl, &data);
    let mut automata = Vec::new();
    let mut local = Vec::new();
    for (s, d) in data.iter().enumerate() {
        let mut a = d.automaton();
        let mut ids: HashMap<LocalState, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut queue = VecDeque::new();
        let mut intern = |st: LocalState,
                          a: &mut ServiceAutomaton,
                          states: &mut Vec<LocalState>,
                          queue: &mut VecDeque<LocalState>| {
            *ids.entry(st).or_insert_with(|| {
                states.push(st);
                queue.push_back(st);
                a.add_state(d.state_name(st), d.is_final(st))
            })
        };
        for blk in &init {
            for &atom in &blk[s] {
                intern(LocalState { atom, obligations: 0 }, &mut a, &mut states, &mut queue);
            }
        }
        while let Some(st) = queue.pop_front() {
            if states.len() > MAX_STATES_PER_SERVICE {
                return Err(SynthesisError::TooManyStates {
                    service: d.cl.service.0.clone(),
                    states: states.len() as u128,
                });
            }
            let from = intern(st, &mut a, &mut states, &mut queue);
            for &bi in d.successors(st.atom) {
                let b = d.atoms[bi];
                let next = LocalState { atom: b, obligations: d.update(st.obligations, b) };
                let to = intern(next, &mut a, &mut states, &mut queue);
                a.add_transition(from, d.letter(b), to);
            }
        }
        automata.push(a);
        local.push(states);
    }
    Ok(assemble(cl.clone(), &data, automata, local, init))
}

/// Greatest sub-system in which every state is reachable from an initial
/// global state, can reach a final state, and keeps a coupling partner in
/// every service it was coupled to. Returns the pruned system and, per
/// service, the original index of each remaining state.
pub fn prune_with(sca: &Sca, required: &[Vec<u64>]) -> (Sca, Vec<Vec<usize>>) {
    let n = sca.services.len();
    let idx = ScaIndex::new(sca);
    let mut alive: Vec<Vec<bool>> = sca.services.iter().map(|a| vec![true; a.states.len()]).collect();
    let mut preds: Vec<Vec<Vec<usize>>> = sca.services.iter().map(|a| vec![Vec::new(); a.states.len()]).collect();
    for (s, a) in sca.services.iter().enumerate() {
        for t in &a.transitions {
            preds[s][t.to].push(t.from);
        }
    }
    loop {
        let live_blocks: Vec<&Vec<Vec<usize>>> =
            sca.init.iter().filter(|b| (0..n).all(|s| b[s].iter().any(|&q| alive[s][q]))).collect();
        let mut next: Vec<Vec<bool>> = sca.services.iter().map(|a| vec![false; a.states.len()]).collect();
        for s in 0..n {
            // Forward from live initial components.
            let mut reach = vec![false; alive[s].len()];
            let mut stack: Vec<usize> =
                live_blocks.iter().flat_map(|b| b[s].iter().copied()).filter(|&q| alive[s][q]).collect();
            for &q in &stack {
                reach[q] = true;
            }
            while let Some(q) = stack.pop() {
                for &(_, r) in &idx.out[s][q] {
                    if alive[s][r] && !reach[r] {
                        reach[r] = true;
                        stack.push(r);
                    }
                }
            }
            // Backward from live finals.
            let mut coreach = vec![false; alive[s].len()];
            let mut stack: Vec<usize> =
                (0..alive[s].len()).filter(|&q| alive[s][q] && sca.services[s].finals[q]).collect();
            for &q in &stack {
                coreach[q] = true;
            }
            while let Some(q) = stack.pop() {
                for &p in &preds[s][q] {
                    if alive[s][p] && !coreach[p] {
                        coreach[p] = true;
                        stack.push(p);
                    }
                }
            }
            for q in 0..alive[s].len() {
                next[s][q] = alive[s][q] && reach[q] && coreach[q];
            }
        }
        // Coupling obligations against the surviving targets.
        let block_live: Vec<bool> = sca.couplings.iter().map(|b| b.to.iter().any(|&r| next[b.to_service][r])).collect();
        for s in 0..n {
            for q in 0..next[s].len() {
                if !next[s][q] || required[s][q] == 0 {
                    continue;
                }
                let mut have = 0u64;
                for &b in &idx.blocks_from[s][q] {
                    if block_live[b] {
                        have |= 1 << sca.couplings[b].to_service;
                    }
                }
                if required[s][q] & !have != 0 {
                    next[s][q] = false;
                }
            }
        }
        if next == alive {
            break;
        }
        alive = next;
    }
    let kept: Vec<Vec<usize>> = alive.iter().map(|v| (0..v.len()).filter(|&q| v[q]).collect()).collect();
    let renum: Vec<HashMap<usize, usize>> =
        kept.iter().map(|ks| ks.iter().enumerate().map(|(new, &old)| (old, new)).collect()).collect();
    let mut out = Sca::new(sca.messages.iter().cloned());
    for (s, a) in sca.services.iter().enumerate() {
        let mut b = ServiceAutomaton::new(a.name.0.clone());
        b.symbols = a.symbols.clone();
        for &q in &kept[s] {
            b.add_state(a.states[q].clone(), a.finals[q]);
        }
        for t in &a.transitions {
            if let (Some(&f), Some(&to)) = (renum[s].get(&t.from), renum[s].get(&t.to)) {
                b.add_transition(f, a.letters[t.letter].iter().cloned(), to);
            }
        }
        out.add_service(b);
    }
    for blk in &sca.couplings {
        let from = blk.from.iter().filter_map(|q| renum[blk.from_service].get(q).copied()).collect();
        let to = blk.to.iter().filter_map(|q| renum[blk.to_service].get(q).copied()).collect();
        out.couple_block(blk.from_service, from, blk.to_service, to);
    }
    for blk in &sca.init {
        out.add_init_block((0..n).map(|s| blk[s].iter().filter_map(|q| renum[s].get(q).copied()).collect()).collect());
    }
    (out, kept)
}

/// [`prune_with`] where every state must keep a partner in each service it
/// is coupled to.
pub fn prune(sca: &Sca) -> Sca {
    let idx = ScaIndex::new(sca);
    prune_with(sca, &idx.lambda_out).0
}

/// Prunes a synthesized system. A state whose atom contains `snd(a,t)` must
/// keep a coupling into `t`.
pub fn prune_synthesized(syn: &Synthesized) -> Synthesized {
    let n = syn.sca.services.len();
    let required: Vec<Vec<u64>> = (0..n)
        .map(|s| {
            let cl = &syn.closure.services[s];
            syn.local[s]
                .iter()
                .map(|st| match cl.atom_comm(st.atom) {
                    Some(LocalFormula::Send { to, .. }) => 1u64 << syn.closure.service_index(to).expect("peer"),
                    _ => 0,
                })
                .collect()
        })
        .collect();
    let (sca, kept) = prune_with(&syn.sca, &required);
    let local = kept.iter().enumerate().map(|(s, ks)| ks.iter().map(|&q| syn.local[s][q]).collect()).collect();
    Synthesized { sca, closure: syn.closure.clone(), local }
}

/// Reachable construction followed by pruning.
pub fn synthesize(psi: &GlobalFormula) -> Result<Synthesized, SynthesisError> {
    Ok(prune_synthesized(&build_reachable(psi)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisStats {
    pub formula_size: usize,
    pub local_modalities: usize,
    pub send_recv_props: usize,
    pub states: usize,
    pub transitions: usize,
    pub couplings: usize,
    pub time_ms: f64,
}

pub fn stats(psi: &GlobalFormula, sca: &Sca, elapsed: Duration) -> SynthesisStats {
    SynthesisStats {
        formula_size: psi.size(),
        local_modalities: psi.modality_count(),
        send_recv_props: psi.comm_props().len(),
        states: sca.num_states(),
        transitions: sca.num_transitions(),
        couplings: sca.num_couplings(),
        time_ms: elapsed.as_secs_f64() * 1000.0,
    }
}

impl SynthesisStats {
    pub const HEADER: &'static str = "Size  Local  Send-Receive  States  Transitions  Couplings  Time (in ms)";

    pub fn row(&self) -> String {
        let time = if self.time_ms < 1.0 { "<1".to_string() } else { format!("{:.0}", self.time_ms) };
        format!(
            "{:<4}  {:<5}  {:<12}  {:<6}  {:<11}  {:<9}  {}",
            self.formula_size,
            self.local_modalities,
            self.send_recv_props,
            self.states,
            self.transitions,
            self.couplings,
            time
        )
    }
}

impl fmt::Display for SynthesisStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", Self::HEADER)?;
        write!(f, "{}", self.row())
    }
}
