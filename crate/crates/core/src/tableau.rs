//! Closure sets, atoms and the local/communication step relations.
//!
//! A closure is stored as its positive members only: `~x` is represented by
//! `x`, and `false` by `true`. An atom is then a bitset over those members,
//! which makes negation-completeness hold by construction.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{GlobalFormula, LocalFormula, Message, Prop, ServiceId, Vocabulary};

/// Atoms are `u128` bitsets, so closures are limited to this many pairs.
pub const MAX_CLOSURE: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("closure of service `{service}` has {size} formula pairs, more than the supported {MAX_CLOSURE}")]
    ClosureTooLarge { service: ServiceId, size: usize },
}

fn rep(f: &LocalFormula) -> LocalFormula {
    match f {
        LocalFormula::Not(x) => (**x).clone(),
        LocalFormula::False => LocalFormula::True,
        other => other.clone(),
    }
}

/// The closure set `CL_s` of one service.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceClosure {
    pub service: ServiceId,
    /// Positive members; member `i` is bit `i` of an atom.
    pub formulas: Vec<LocalFormula>,
    #[serde(skip)]
    index: HashMap<LocalFormula, usize>,
    /// `(index of X a, a)`.
    nexts: Vec<(usize, LocalFormula)>,
    /// `(index of Y a, a)`.
    prevs: Vec<(usize, LocalFormula)>,
    next_false: usize,
    prev_false: usize,
    props: Vec<usize>,
    comms: Vec<usize>,
    eventualities: Vec<usize>,
    /// Derived members in evaluation order (children before parents).
    derived: Vec<usize>,
}

impl ServiceClosure {
    fn build(service: &ServiceId, roots: &[LocalFormula], comm: &[LocalFormula]) -> Result<Self, TableauError> {
        let mut formulas: Vec<LocalFormula> = Vec::new();
        let mut index = HashMap::new();
        let mut work = Vec::new();
        let mut add = |f: &LocalFormula, formulas: &mut Vec<LocalFormula>, work: &mut Vec<usize>| {
            let r = rep(f);
            if !index.contains_key(&r) {
                index.insert(r.clone(), formulas.len());
                work.push(formulas.len());
                formulas.push(r);
            }
        };
        let seeds = [LocalFormula::True, LocalFormula::False.next(), LocalFormula::False.prev()];
        for f in seeds.iter().chain(roots).chain(comm) {
            add(f, &mut formulas, &mut work);
        }
        let mut at = 0;
        while at < work.len() {
            let f = formulas[work[at]].clone();
            at += 1;
            match &f {
                LocalFormula::Or(a, b) => {
                    add(a, &mut formulas, &mut work);
                    add(b, &mut formulas, &mut work);
                }
                LocalFormula::Next(a) | LocalFormula::Prev(a) => add(a, &mut formulas, &mut work),
                LocalFormula::Eventually(a) => {
                    add(a, &mut formulas, &mut work);
                    add(&f.clone().next(), &mut formulas, &mut work);
                }
                _ => {}
            }
        }
        if formulas.len() > MAX_CLOSURE {
            return Err(TableauError::ClosureTooLarge { service: service.clone(), size: formulas.len() });
        }
        let index: HashMap<LocalFormula, usize> = formulas.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let mut cl = ServiceClosure {
            service: service.clone(),
            next_false: index[&LocalFormula::False.next()],
            prev_false: index[&LocalFormula::False.prev()],
            formulas,
            index,
            nexts: Vec::new(),
            prevs: Vec::new(),
            props: Vec::new(),
            comms: Vec::new(),
            eventualities: Vec::new(),
            derived: Vec::new(),
        };
        for (i, f) in cl.formulas.iter().enumerate() {
            match f {
                LocalFormula::Next(a) => cl.nexts.push((i, (**a).clone())),
                LocalFormula::Prev(a) => cl.prevs.push((i, (**a).clone())),
                LocalFormula::Prop(_) => cl.props.push(i),
                LocalFormula::Send { .. } | LocalFormula::Recv { .. } => cl.comms.push(i),
                LocalFormula::Eventually(_) => {
                    cl.eventualities.push(i);
                    cl.derived.push(i);
                }
                LocalFormula::Or(..) | LocalFormula::True => cl.derived.push(i),
                LocalFormula::False | LocalFormula::Not(_) => unreachable!("closure stores positive members"),
            }
        }
        let sizes: Vec<usize> = cl.formulas.iter().map(|f| f.size()).collect();
        cl.derived.sort_by_key(|&i| (sizes[i], i));
        Ok(cl)
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn index_of(&self, f: &LocalFormula) -> Option<usize> {
        self.index.get(f).copied()
    }

    /// Whether `alpha` (a closure member or the negation of one) is in the atom.
    pub fn holds(&self, atom: u128, alpha: &LocalFormula) -> bool {
        match alpha {
            LocalFormula::True => true,
            LocalFormula::False => false,
            LocalFormula::Not(x) => !self.holds(atom, x),
            f => {
                let i = self.index[f];
                atom >> i & 1 == 1
            }
        }
    }

    /// `U_s`: closure indices of the `F a` members.
    pub fn eventualities(&self) -> &[usize] {
        &self.eventualities
    }

    pub fn is_initial(&self, atom: u128) -> bool {
        atom >> self.prev_false & 1 == 1
    }

    pub fn is_last(&self, atom: u128) -> bool {
        atom >> self.next_false & 1 == 1
    }

    /// Propositions of `P_s` in the atom.
    pub fn atom_props(&self, atom: u128) -> Vec<&Prop> {
        self.props
            .iter()
            .filter(|&&i| atom >> i & 1 == 1)
            .map(|&i| match &self.formulas[i] {
                LocalFormula::Prop(p) => p,
                _ => unreachable!(),
            })
            .collect()
    }

    /// The send/receive proposition of the atom, if any.
    pub fn atom_comm(&self, atom: u128) -> Option<&LocalFormula> {
        self.comms.iter().find(|&&i| atom >> i & 1 == 1).map(|&i| &self.formulas[i])
    }

    fn derive(&self, mut bits: u128) -> u128 {
        for &i in &self.derived {
            let v = match &self.formulas[i] {
                LocalFormula::True => true,
                LocalFormula::Or(a, b) => self.holds(bits, a) || self.holds(bits, b),
                LocalFormula::Eventually(a) => {
                    let xf = self.index[&self.formulas[i].clone().next()];
                    self.holds(bits, a) || bits >> xf & 1 == 1
                }
                _ => unreachable!(),
            };
            if v {
                bits |= 1 << i;
            } else {
                bits &= !(1 << i);
            }
        }
        bits
    }

    /// All atoms, generated from the free members (propositions, at most one
    /// communication proposition, `X` and `Y` members); the remaining members
    /// are determined by them.
    pub fn atoms(&self) -> Vec<u128> {
        let subsets = |idx: &[usize]| -> Vec<u128> {
            (0..1u64 << idx.len())
                .map(|m| {
                    idx.iter().enumerate().filter(|(k, _)| m >> k & 1 == 1).fold(0u128, |acc, (_, &i)| acc | 1 << i)
                })
                .collect()
        };
        let other_nexts: Vec<usize> = self.nexts.iter().map(|(i, _)| *i).filter(|&i| i != self.next_false).collect();
        let other_prevs: Vec<usize> = self.prevs.iter().map(|(i, _)| *i).filter(|&i| i != self.prev_false).collect();
        let mut next_choices = vec![1u128 << self.next_false];
        next_choices.extend(subsets(&other_nexts));
        let mut out = Vec::new();
        for initial in [true, false] {
            let prev_choices = if initial { vec![1u128 << self.prev_false] } else { subsets(&other_prevs) };
            let prop_choices = if initial { vec![0] } else { subsets(&self.props) };
            let mut comm_choices = vec![0u128];
            if !initial {
                comm_choices.extend(self.comms.iter().map(|&i| 1u128 << i));
            }
            for &pv in &prev_choices {
                for &pr in &prop_choices {
                    for &cm in &comm_choices {
                        for &nx in &next_choices {
                            out.push(self.derive(pv | pr | cm | nx));
                        }
                    }
                }
            }
        }
        out
    }

    /// Checks every atom rule on an arbitrary bitset.
    pub fn is_atom(&self, bits: u128) -> bool {
        let has = |i: usize| bits >> i & 1 == 1;
        if bits >> self.len() != 0 || !has(self.index[&LocalFormula::True]) {
            return false;
        }
        for (i, f) in self.formulas.iter().enumerate() {
            let ok = match f {
                LocalFormula::Or(a, b) => has(i) == (self.holds(bits, a) || self.holds(bits, b)),
                LocalFormula::Eventually(a) => has(i) == (self.holds(bits, a) || has(self.index[&f.clone().next()])),
                _ => true,
            };
            if !ok {
                return false;
            }
        }
        let initial = has(self.prev_false);
        if initial && self.prevs.iter().any(|&(i, _)| i != self.prev_false && has(i)) {
            return false;
        }
        if has(self.next_false) && self.nexts.iter().any(|&(i, _)| i != self.next_false && has(i)) {
            return false;
        }
        let comms = self.comms.iter().filter(|&&i| has(i)).count();
        if initial && (comms > 0 || self.props.iter().any(|&i| has(i))) {
            return false;
        }
        comms <= 1
    }

    /// `A ⇝ B`: `X a ∈ A` iff `a ∈ B`, and `Y a ∈ B` iff `a ∈ A`.
    pub fn loc_step(&self, a: u128, b: u128) -> bool {
        self.step_key_out(a) == self.step_key_in(b)
    }

    /// Key of an atom as a source of `⇝`: pairs with `step_key_in` of every
    /// successor.
    pub fn step_key_out(&self, a: u128) -> (u128, u128) {
        let next = self.nexts.iter().enumerate().fold(0u128, |acc, (k, (i, _))| acc | (a >> i & 1) << k);
        let prev =
            self.prevs.iter().enumerate().fold(0u128, |acc, (k, (_, arg))| acc | u128::from(self.holds(a, arg)) << k);
        (next, prev)
    }

    pub fn step_key_in(&self, b: u128) -> (u128, u128) {
        let next =
            self.nexts.iter().enumerate().fold(0u128, |acc, (k, (_, arg))| acc | u128::from(self.holds(b, arg)) << k);
        let prev = self.prevs.iter().enumerate().fold(0u128, |acc, (k, (i, _))| acc | (b >> i & 1) << k);
        (next, prev)
    }

    pub fn atom_string(&self, atom: u128) -> String {
        let members: Vec<String> = (0..self.len()).filter(|i| atom >> i & 1 == 1).map(|i| i.to_string()).collect();
        format!("{{{}}}", members.join(" "))
    }
}

/// `CL(psi)` together with the per-service closures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosureSet {
    pub formula: GlobalFormula,
    pub vocab: Vocabulary,
    pub services: Vec<ServiceClosure>,
    /// Positive members of the global closure.
    pub global: Vec<GlobalFormula>,
}

pub fn closure(psi: &GlobalFormula) -> Result<ClosureSet, TableauError> {
    let vocab = Vocabulary::of(psi);
    let mut roots: HashMap<ServiceId, Vec<LocalFormula>> = HashMap::new();
    let mut global = Vec::new();
    fn walk(g: &GlobalFormula, global: &mut Vec<GlobalFormula>, roots: &mut HashMap<ServiceId, Vec<LocalFormula>>) {
        let positive = match g {
            GlobalFormula::Not(inner) => (**inner).clone(),
            other => other.clone(),
        };
        if !global.contains(&positive) {
            global.push(positive.clone());
        }
        match &positive {
            GlobalFormula::At(alpha, s) => roots.entry(s.clone()).or_default().push(alpha.clone()),
            GlobalFormula::Or(a, b) => {
                walk(a, global, roots);
                walk(b, global, roots);
            }
            GlobalFormula::Not(_) => unreachable!("double negation is collapsed"),
        }
    }
    walk(psi, &mut global, &mut roots);
    let messages: Vec<&Message> = vocab.messages.iter().collect();
    let mut services = Vec::new();
    for s in &vocab.services {
        let mut comm = Vec::new();
        for m in &messages {
            for peer in vocab.services.iter().filter(|p| *p != s) {
                comm.push(LocalFormula::send(m.as_str(), peer.as_str()));
                comm.push(LocalFormula::recv(m.as_str(), peer.as_str()));
            }
        }
        let r = roots.remove(s).unwrap_or_default();
        services.push(ServiceClosure::build(s, &r, &comm)?);
    }
    Ok(ClosureSet { formula: psi.clone(), vocab, services, global })
}

impl ClosureSet {
    pub fn service_index(&self, s: &ServiceId) -> Option<usize> {
        self.vocab.service_index(s)
    }

    /// `psi ∈ (A_1, …, A_n)`.
    pub fn global_contains(&self, atoms: &[u128], psi: &GlobalFormula) -> bool {
        match psi {
            GlobalFormula::At(alpha, s) => {
                let i = self.service_index(s).expect("service of the closure");
                self.services[i].holds(atoms[i], alpha)
            }
            GlobalFormula::Not(g) => !self.global_contains(atoms, g),
            GlobalFormula::Or(a, b) => self.global_contains(atoms, a) || self.global_contains(atoms, b),
        }
    }

    /// `A ⇝λ B` for `A` of service `s`, `B` of service `t` and message `msg`:
    /// `snd(msg,t) ∈ A`, `rcv(msg,s) ∈ B`, and `B` is not initial.
    pub fn comm_step(&self, s: usize, a: u128, t: usize, b: u128, msg: &Message) -> bool {
        if s == t {
            return false;
        }
        let (cs, ct) = (&self.services[s], &self.services[t]);
        let send = LocalFormula::send(msg.as_str(), ct.service.as_str());
        let recv = LocalFormula::recv(msg.as_str(), cs.service.as_str());
        match (cs.index_of(&send), ct.index_of(&recv)) {
            (Some(i), Some(j)) => a >> i & 1 == 1 && b >> j & 1 == 1 && !ct.is_initial(b),
            _ => false,
        }
    }

    /// Human-readable listing of the closures and (optionally) the atoms.
    pub fn dump(&self, with_atoms: bool) -> String {
        let mut out = String::new();
        writeln!(out, "formula: {}", self.formula).unwrap();
        writeln!(out, "global closure ({} pairs):", self.global.len()).unwrap();
        for g in &self.global {
            writeln!(out, "  {g}").unwrap();
        }
        for cl in &self.services {
            writeln!(out, "service {} ({} pairs, {} eventualities):", cl.service, cl.len(), cl.eventualities.len())
                .unwrap();
            for (i, f) in cl.formulas.iter().enumerate() {
                writeln!(out, "  [{i}] {f}").unwrap();
            }
            if with_atoms {
                let atoms = cl.atoms();
                writeln!(out, "  atoms ({}):", atoms.len()).unwrap();
                for a in atoms {
                    let tag = if cl.is_initial(a) { " initial" } else { "" };
                    writeln!(out, "    {}{tag}", cl.atom_string(a)).unwrap();
                }
            }
        }
        out
    }

    /// Comm propositions per service, as closure indices.
    pub fn comm_members(&self, s: usize) -> BTreeSet<usize> {
        self.services[s].comms.iter().copied().collect()
    }
}
