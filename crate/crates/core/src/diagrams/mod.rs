//! Lamport diagrams: per-service event chains linked by message edges.

mod enumerate;
mod format;
mod order;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::ServiceId;

pub use enumerate::{enumerate_diagrams, DiagramIter};
pub use format::{parse_ld, print_ld, to_dot};
pub use order::{chor, configurations, is_consistent, linearizations, successors, topological_order};

/// Position of an event: service index and index in its chain (0 is ⊥).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventId {
    pub service: usize,
    pub index: usize,
}

impl EventId {
    pub fn new(service: usize, index: usize) -> Self {
        EventId { service, index }
    }

    pub fn is_bottom(&self) -> bool {
        self.index == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub labels: BTreeSet<String>,
}

/// A global state: the index of the last included event of every service.
pub type Configuration = Vec<usize>;

/// One send event of a conversation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SendEvent {
    pub msg: String,
    pub from: ServiceId,
    pub to: ServiceId,
}

impl SendEvent {
    pub fn new(msg: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        SendEvent { msg: msg.into(), from: ServiceId::new(from), to: ServiceId::new(to) }
    }
}

impl fmt::Display for SendEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}->{}]", self.msg, self.from, self.to)
    }
}

/// Messages of a word separated by spaces, e.g. `b a`.
pub fn word_messages(word: &[SendEvent]) -> String {
    word.iter().map(|e| e.msg.as_str()).collect::<Vec<_>>().join(" ")
}

/// Role of an event in the communication relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    SendTo(EventId),
    RecvFrom(EventId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LamportDiagram {
    services: Vec<ServiceId>,
    messages: BTreeSet<String>,
    events: Vec<Vec<Event>>,
    comm: Vec<(EventId, EventId)>,
}

impl LamportDiagram {
    /// A diagram containing only the ⊥ event of every service.
    pub fn new(services: Vec<ServiceId>, messages: BTreeSet<String>) -> Self {
        let events = services.iter().map(|s| vec![Event { name: format!("⊥{s}"), labels: BTreeSet::new() }]).collect();
        LamportDiagram { services, messages, events, comm: Vec::new() }
    }

    pub fn services(&self) -> &[ServiceId] {
        &self.services
    }

    pub fn service_index(&self, s: &ServiceId) -> Option<usize> {
        self.services.iter().position(|x| x == s)
    }

    /// Labels that denote messages rather than propositions.
    pub fn messages(&self) -> &BTreeSet<String> {
        &self.messages
    }

    /// Events of service `s`, ⊥ first.
    pub fn events(&self, s: usize) -> &[Event] {
        &self.events[s]
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id.service][id.index]
    }

    /// Number of non-⊥ events of service `s`.
    pub fn len(&self, s: usize) -> usize {
        self.events[s].len() - 1
    }

    pub fn total_events(&self) -> usize {
        self.events.iter().map(|e| e.len() - 1).sum()
    }

    pub fn comm(&self) -> &[(EventId, EventId)] {
        &self.comm
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> + '_ {
        self.events.iter().enumerate().flat_map(|(s, es)| (0..es.len()).map(move |i| EventId::new(s, i)))
    }

    pub fn find_event(&self, name: &str) -> Option<EventId> {
        self.event_ids().find(|id| self.event(*id).name == name)
    }

    pub fn push_event<I, S>(&mut self, service: usize, name: impl Into<String>, labels: I) -> EventId
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = labels.into_iter().map(Into::into).collect();
        self.events[service].push(Event { name: name.into(), labels });
        EventId::new(service, self.events[service].len() - 1)
    }

    pub fn add_message(&mut self, send: EventId, recv: EventId) {
        self.comm.push((send, recv));
        self.comm.sort();
    }

    pub fn endpoint(&self, e: EventId) -> Option<Endpoint> {
        self.comm.iter().find_map(|&(s, r)| {
            if s == e {
                Some(Endpoint::SendTo(r))
            } else if r == e {
                Some(Endpoint::RecvFrom(s))
            } else {
                None
            }
        })
    }

    /// The message carried by a communication event.
    pub fn message_of(&self, e: EventId) -> Option<&str> {
        self.event(e).labels.iter().find(|l| self.messages.contains(*l)).map(|s| s.as_str())
    }

    pub fn initial_configuration(&self) -> Configuration {
        vec![0; self.services.len()]
    }

    pub fn maximal_configuration(&self) -> Configuration {
        (0..self.services.len()).map(|s| self.len(s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    UnknownEvent,
    InitialCommunication,
    InitialLabel,
    SelfMessage,
    MultipleCommunication,
    MessageLabel,
    MessageMismatch,
    FifoCrossing,
    Cycle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::UnknownEvent => "unknown event",
            ViolationKind::InitialCommunication => "initial communication",
            ViolationKind::InitialLabel => "initial label",
            ViolationKind::SelfMessage => "message within one service",
            ViolationKind::MultipleCommunication => "multiple communication",
            ViolationKind::MessageLabel => "message label",
            ViolationKind::MessageMismatch => "message mismatch",
            ViolationKind::FifoCrossing => "FIFO non-crossing",
            ViolationKind::Cycle => "cycle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{kind}: {}", witnesses.join(", "))]
pub struct Violation {
    pub kind: ViolationKind,
    pub witnesses: Vec<String>,
}

/// Checks the diagram axioms and reports the first violated one.
pub fn validate(d: &LamportDiagram) -> Result<(), Violation> {
    let name = |e: EventId| d.event(e).name.clone();
    let fail = |kind, witnesses: Vec<String>| Err(Violation { kind, witnesses });

    for &(s, r) in &d.comm {
        for e in [s, r] {
            if e.service >= d.services.len() || e.index >= d.events[e.service].len() {
                return fail(ViolationKind::UnknownEvent, vec![format!("{}:{}", e.service, e.index)]);
            }
        }
    }
    for s in 0..d.services.len() {
        if !d.events[s][0].labels.is_empty() {
            return fail(ViolationKind::InitialLabel, vec![name(EventId::new(s, 0))]);
        }
    }
    for &(s, r) in &d.comm {
        if s.is_bottom() || r.is_bottom() {
            return fail(ViolationKind::InitialCommunication, vec![name(s), name(r)]);
        }
        if s.service == r.service {
            return fail(ViolationKind::SelfMessage, vec![name(s), name(r)]);
        }
    }
    let mut seen = BTreeSet::new();
    for &(s, r) in &d.comm {
        for e in [s, r] {
            if !seen.insert(e) {
                return fail(ViolationKind::MultipleCommunication, vec![name(e)]);
            }
        }
    }
    for e in d.event_ids() {
        let msgs = d.event(e).labels.iter().filter(|l| d.messages.contains(*l)).count();
        let expected = usize::from(seen.contains(&e));
        if msgs != expected {
            return fail(ViolationKind::MessageLabel, vec![name(e)]);
        }
    }
    for &(s, r) in &d.comm {
        if d.message_of(s) != d.message_of(r) {
            return fail(ViolationKind::MessageMismatch, vec![name(s), name(r)]);
        }
    }
    for &(s1, r1) in &d.comm {
        for &(s2, r2) in &d.comm {
            if s1.service == s2.service && r1.service == r2.service && s1.index < s2.index && r1.index > r2.index {
                return fail(ViolationKind::FifoCrossing, vec![name(s1), name(r1), name(s2), name(r2)]);
            }
        }
    }
    if topological_order(d).is_none() {
        let witnesses = d.comm.iter().map(|&(s, r)| format!("{}->{}", name(s), name(r))).collect();
        return fail(ViolationKind::Cycle, witnesses);
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn svc(names: &[&str]) -> Vec<ServiceId> {
        names.iter().map(|n| ServiceId::new(*n)).collect()
    }

    pub(crate) fn msgs(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|n| n.to_string()).collect()
    }

    /// p sends `k` messages `a` to c, received in order.
    pub(crate) fn prodcons(k: usize) -> LamportDiagram {
        let mut d = LamportDiagram::new(svc(&["p", "c"]), msgs(&["a"]));
        let sends: Vec<_> = (1..=k).map(|i| d.push_event(0, format!("e{i}"), ["a"])).collect();
        let recvs: Vec<_> = (1..=k).map(|i| d.push_event(1, format!("f{i}"), ["a"])).collect();
        for (s, r) in sends.into_iter().zip(recvs) {
            d.add_message(s, r);
        }
        d
    }

    #[test]
    fn single_exchange_is_valid() {
        assert_eq!(validate(&prodcons(1)), Ok(()));
        assert_eq!(validate(&prodcons(3)), Ok(()));
    }

    #[test]
    fn message_out_of_bottom() {
        let mut d = LamportDiagram::new(svc(&["p", "c"]), msgs(&["a"]));
        let f1 = d.push_event(1, "f1", ["a"]);
        d.add_message(EventId::new(0, 0), f1);
        assert_eq!(validate(&d).unwrap_err().kind, ViolationKind::InitialCommunication);
    }

    #[test]
    fn crossing_messages() {
        let mut d = LamportDiagram::new(svc(&["p", "c"]), msgs(&["a"]));
        let e1 = d.push_event(0, "e1", ["a"]);
        let e2 = d.push_event(0, "e2", ["a"]);
        let r1 = d.push_event(1, "r1", ["a"]);
        let r2 = d.push_event(1, "r2", ["a"]);
        d.add_message(e1, r2);
        d.add_message(e2, r1);
        assert_eq!(validate(&d).unwrap_err().kind, ViolationKind::FifoCrossing);
    }

    #[test]
    fn labelled_bottom_and_cycles() {
        let mut d = LamportDiagram::new(svc(&["p"]), msgs(&[]));
        d.events[0][0].labels.insert("x".into());
        assert_eq!(validate(&d).unwrap_err().kind, ViolationKind::InitialLabel);

        let mut d = LamportDiagram::new(svc(&["p", "c"]), msgs(&["a", "b"]));
        let p1 = d.push_event(0, "p1", ["a"]);
        let p2 = d.push_event(0, "p2", ["b"]);
        let c1 = d.push_event(1, "c1", ["b"]);
        let c2 = d.push_event(1, "c2", ["a"]);
        d.add_message(p2, c1);
        d.add_message(c2, p1);
        assert_eq!(validate(&d).unwrap_err().kind, ViolationKind::Cycle);
    }

    #[test]
    fn message_labels_must_match_edges() {
        let mut d = LamportDiagram::new(svc(&["p", "c"]), msgs(&["a", "b"]));
        d.push_event(0, "e1", ["a"]);
        assert_eq!(validate(&d).unwrap_err().kind, ViolationKind::MessageLabel);

        let mut d = LamportDiagram::new(svc(&["p", "c"]), msgs(&["a", "b"]));
        let e1 = d.push_event(0, "e1", ["a"]);
        let f1 = d.push_event(1, "f1", ["b"]);
        d.add_message(e1, f1);
        assert_eq!(validate(&d).unwrap_err().kind, ViolationKind::MessageMismatch);
    }
}
