//! Conversation protocols and bounded realizability checks.
//!
//! A conversation protocol is an NFA over send events. An SCA realizes it
//! when the conversations of its diagrams are exactly the protocol's words.
//! Both languages are infinite in general, so the check here compares them
//! up to explicit bounds.

mod format;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::diagrams::{word_messages, SendEvent};
use crate::sca::{bounded_chor_language, Sca, ServiceAutomaton};
use crate::syntax::ServiceId;

pub use format::{parse_cp, print_cp, to_dot};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTransition {
    pub from: usize,
    pub event: SendEvent,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationProtocol {
    pub services: Vec<ServiceId>,
    pub states: Vec<String>,
    pub finals: Vec<bool>,
    pub init: usize,
    pub transitions: Vec<ProtocolTransition>,
}

impl ConversationProtocol {
    pub fn messages(&self) -> BTreeSet<String> {
        self.transitions.iter().map(|t| t.event.msg.clone()).collect()
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// Whether `word` is accepted.
    pub fn accepts(&self, word: &[SendEvent]) -> bool {
        let mut current: BTreeSet<usize> = [self.init].into();
        for ev in word {
            current =
                self.transitions.iter().filter(|t| current.contains(&t.from) && &t.event == ev).map(|t| t.to).collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|&q| self.finals[q])
    }
}

/// Accepted words of length at most `max_len`.
pub fn nfa_language_bounded(c: &ConversationProtocol, max_len: usize) -> BTreeSet<Vec<SendEvent>> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<(Vec<SendEvent>, BTreeSet<usize>)> = vec![(Vec::new(), [c.init].into())];
    while let Some((word, states)) = stack.pop() {
        if states.iter().any(|&q| c.finals[q]) {
            out.insert(word.clone());
        }
        if word.len() == max_len {
            continue;
        }
        let mut next: BTreeMap<&SendEvent, BTreeSet<usize>> = BTreeMap::new();
        for t in c.transitions.iter().filter(|t| states.contains(&t.from)) {
            next.entry(&t.event).or_default().insert(t.to);
        }
        for (ev, qs) in next {
            let mut w = word.clone();
            w.push(ev.clone());
            stack.push((w, qs));
        }
    }
    out
}

/// Events each service takes part in: one per send and one per receive.
fn events_per_service(word: &[SendEvent]) -> BTreeMap<&ServiceId, usize> {
    let mut count = BTreeMap::new();
    for ev in word {
        *count.entry(&ev.from).or_insert(0) += 1;
        *count.entry(&ev.to).or_insert(0) += 1;
    }
    count
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "kebab-case")]
pub enum Verdict {
    Equal,
    /// A conversation of the automata that the protocol does not allow.
    ScaExtra(Vec<SendEvent>),
    /// A protocol word no diagram of the automata produces.
    ChorMissing(Vec<SendEvent>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Equal)
    }

    pub fn witness(&self) -> Option<&[SendEvent]> {
        match self {
            Verdict::Equal => None,
            Verdict::ScaExtra(w) | Verdict::ChorMissing(w) => Some(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizabilityReport {
    pub event_bound: usize,
    pub word_bound: usize,
    pub chor: Vec<String>,
    pub protocol: Vec<String>,
    pub verdict: Verdict,
}

fn shortest(words: impl Iterator<Item = Vec<SendEvent>>) -> Option<Vec<SendEvent>> {
    words.min_by(|a, b| {
        a.len().cmp(&b.len()).then_with(|| word_messages(a).cmp(&word_messages(b))).then_with(|| a.cmp(b))
    })
}

/// Compares the conversations of `sca` on diagrams with at most
/// `event_bound` events per service with the protocol words of length at
/// most `word_bound`. Protocol words that would need more than
/// `event_bound` events in some service are left out, and so are
/// conversations longer than `word_bound`.
pub fn realizes_bounded(
    sca: &Sca,
    c: &ConversationProtocol,
    event_bound: usize,
    word_bound: usize,
) -> RealizabilityReport {
    let chor: BTreeSet<Vec<SendEvent>> =
        bounded_chor_language(sca, event_bound).into_iter().filter(|w| w.len() <= word_bound).collect();
    let protocol: BTreeSet<Vec<SendEvent>> = nfa_language_bounded(c, word_bound)
        .into_iter()
        .filter(|w| events_per_service(w).values().all(|&n| n <= event_bound))
        .collect();
    let verdict = if let Some(w) = shortest(chor.difference(&protocol).cloned()) {
        Verdict::ScaExtra(w)
    } else if let Some(w) = shortest(protocol.difference(&chor).cloned()) {
        Verdict::ChorMissing(w)
    } else {
        Verdict::Equal
    };
    let render = |ws: &BTreeSet<Vec<SendEvent>>| {
        let mut v: Vec<_> = ws.iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v.into_iter().map(|w| word_messages(w)).collect()
    };
    RealizabilityReport { event_bound, word_bound, chor: render(&chor), protocol: render(&protocol), verdict }
}

/// Per-service projection of the protocol: each service keeps its own
/// sends and receives (other events become silent moves, which are then
/// eliminated) and every post-send state is coupled to every post-receive
/// state of the same message.
pub fn project(c: &ConversationProtocol) -> Sca {
    let n = c.states.len();
    let mut sca = Sca::new(c.messages());
    for svc in &c.services {
        // Own moves and silent moves of the protocol NFA.
        let mut own: Vec<Vec<(String, usize)>> = vec![Vec::new(); n];
        let mut silent: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in &c.transitions {
            if &t.event.from == svc || &t.event.to == svc {
                own[t.from].push((t.event.msg.clone(), t.to));
            } else {
                silent[t.from].push(t.to);
            }
        }
        let closure: Vec<BTreeSet<usize>> = (0..n)
            .map(|q| {
                let mut seen: BTreeSet<usize> = [q].into();
                let mut stack = vec![q];
                while let Some(p) = stack.pop() {
                    for &r in &silent[p] {
                        if seen.insert(r) {
                            stack.push(r);
                        }
                    }
                }
                seen
            })
            .collect();
        let mut a = ServiceAutomaton::new(svc.0.clone());
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut stack = vec![c.init];
        let is_final = |q: usize| closure[q].iter().any(|&p| c.finals[p]);
        ids.insert(c.init, a.add_state(c.states[c.init].clone(), is_final(c.init)));
        while let Some(q) = stack.pop() {
            let from = ids[&q];
            let moves: BTreeSet<(String, usize)> = closure[q].iter().flat_map(|&p| own[p].iter().cloned()).collect();
            for (msg, r) in moves {
                let to = *ids.entry(r).or_insert_with(|| {
                    stack.push(r);
                    a.add_state(c.states[r].clone(), is_final(r))
                });
                a.add_transition(from, [msg], to);
            }
        }
        sca.add_service(a);
    }
    // States entered by sending / receiving each message on each channel.
    let mut entered: BTreeMap<(usize, usize, String), (BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
    for ev in c.transitions.iter().map(|t| &t.event) {
        let s = c.services.iter().position(|x| x == &ev.from).expect("sender is a service");
        let t = c.services.iter().position(|x| x == &ev.to).expect("receiver is a service");
        entered.entry((s, t, ev.msg.clone())).or_default();
    }
    for ((s, t, msg), (sent, received)) in &mut entered {
        for (svc, set) in [(*s, &mut *sent), (*t, &mut *received)] {
            let a = &sca.services[svc];
            for tr in &a.transitions {
                if a.letters[tr.letter].contains(msg.as_str()) && entered_by(c, *s, *t, msg, &a.states[tr.to]) {
                    set.insert(tr.to);
                }
            }
        }
    }
    for ((s, t, _), (sent, received)) in entered {
        sca.couple_block(s, sent.into_iter().collect(), t, received.into_iter().collect());
    }
    let init = sca.services.iter().map(|a| vec![a.state(&c.states[c.init]).expect("initial state")]).collect();
    sca.add_init_block(init);
    sca
}

/// Whether protocol state `state` is the target of `msg[s->t]`.
fn entered_by(c: &ConversationProtocol, s: usize, t: usize, msg: &str, state: &str) -> bool {
    c.transitions.iter().any(|tr| {
        c.states[tr.to] == state
            && tr.event.msg == msg
            && tr.event.from == c.services[s]
            && tr.event.to == c.services[t]
    })
}
