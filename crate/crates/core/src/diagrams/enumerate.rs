//! Exhaustive enumeration of small diagrams.
//!
//! Every service independently picks a sequence of event kinds (internal,
//! send, receive) with a proposition subset per event. FIFO leaves no choice
//! in pairing the k-th send from i to j with the k-th receive at j from i, so
//! a combination of sequences determines at most one diagram.

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Message, Prop, ServiceId};

use super::{topological_order, LamportDiagram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Internal,
    Send { to: usize, msg: usize },
    Recv { from: usize, msg: usize },
}

type Step = (Kind, u32);

pub struct DiagramIter {
    services: Vec<ServiceId>,
    messages: Vec<String>,
    props: Vec<Vec<String>>,
    options: Vec<Vec<Vec<Step>>>,
    pos: Vec<usize>,
    done: bool,
}

/// Lazily yields every valid diagram with at most `bound` non-⊥ events per
/// service. Event `k` of service `s` is named `s.k`.
pub fn enumerate_diagrams(
    services: &[ServiceId],
    messages: &BTreeSet<Message>,
    props: &BTreeMap<ServiceId, BTreeSet<Prop>>,
    bound: usize,
) -> DiagramIter {
    let n = services.len();
    let messages: Vec<String> = messages.iter().map(|m| m.0.clone()).collect();
    let props: Vec<Vec<String>> = services
        .iter()
        .map(|s| props.get(s).map(|ps| ps.iter().map(|p| p.0.clone()).collect()).unwrap_or_default())
        .collect();
    let options = (0..n)
        .map(|s| {
            let mut kinds = vec![Kind::Internal];
            for peer in (0..n).filter(|&t| t != s) {
                for msg in 0..messages.len() {
                    kinds.push(Kind::Send { to: peer, msg });
                    kinds.push(Kind::Recv { from: peer, msg });
                }
            }
            let masks = 1u32 << props[s].len();
            let steps: Vec<Step> = kinds.iter().flat_map(|&k| (0..masks).map(move |m| (k, m))).collect();
            let mut seqs = vec![Vec::new()];
            let mut layer = vec![Vec::new()];
            for _ in 0..bound {
                layer = layer
                    .iter()
                    .flat_map(|prefix: &Vec<Step>| {
                        steps.iter().map(move |st| {
                            let mut v = prefix.clone();
                            v.push(*st);
                            v
                        })
                    })
                    .collect();
                seqs.extend(layer.iter().cloned());
            }
            seqs
        })
        .collect();
    DiagramIter { services: services.to_vec(), messages, props, options, pos: vec![0], done: n == 0 }
}

fn channel(seq: &[Step], peer: usize, sending: bool) -> Vec<usize> {
    seq.iter()
        .filter_map(|(k, _)| match *k {
            Kind::Send { to, msg } if sending && to == peer => Some(msg),
            Kind::Recv { from, msg } if !sending && from == peer => Some(msg),
            _ => None,
        })
        .collect()
}

impl DiagramIter {
    fn compatible(&self, k: usize) -> bool {
        let mine = &self.options[k][self.pos[k]];
        (0..k).all(|i| {
            let other = &self.options[i][self.pos[i]];
            channel(mine, i, true) == channel(other, k, false) && channel(other, k, true) == channel(mine, i, false)
        })
    }

    fn build(&self) -> LamportDiagram {
        let mut d = LamportDiagram::new(self.services.clone(), self.messages.iter().cloned().collect());
        let seqs: Vec<&Vec<Step>> = (0..self.services.len()).map(|s| &self.options[s][self.pos[s]]).collect();
        let mut sends: BTreeMap<(usize, usize), Vec<super::EventId>> = BTreeMap::new();
        let mut recvs: BTreeMap<(usize, usize), Vec<super::EventId>> = BTreeMap::new();
        for (s, seq) in seqs.iter().enumerate() {
            for (k, &(kind, mask)) in seq.iter().enumerate() {
                let mut labels: Vec<String> =
                    (0..self.props[s].len()).filter(|b| mask >> b & 1 == 1).map(|b| self.props[s][b].clone()).collect();
                match kind {
                    Kind::Internal => {}
                    Kind::Send { msg, .. } | Kind::Recv { msg, .. } => labels.push(self.messages[msg].clone()),
                }
                let id = d.push_event(s, format!("{}.{}", self.services[s], k + 1), labels);
                match kind {
                    Kind::Send { to, .. } => sends.entry((s, to)).or_default().push(id),
                    Kind::Recv { from, .. } => recvs.entry((from, s)).or_default().push(id),
                    Kind::Internal => {}
                }
            }
        }
        for (key, ss) in sends {
            for (snd, rcv) in ss.into_iter().zip(recvs.remove(&key).unwrap_or_default()) {
                d.add_message(snd, rcv);
            }
        }
        d
    }
}

impl Iterator for DiagramIter {
    type Item = LamportDiagram;

    fn next(&mut self) -> Option<LamportDiagram> {
        let n = self.services.len();
        loop {
            if self.done {
                return None;
            }
            let k = self.pos.len() - 1;
            if self.pos[k] >= self.options[k].len() {
                self.pos.pop();
                match self.pos.last_mut() {
                    Some(p) => *p += 1,
                    None => self.done = true,
                }
                continue;
            }
            if !self.compatible(k) {
                self.pos[k] += 1;
                continue;
            }
            if k + 1 < n {
                self.pos.push(0);
                continue;
            }
            let d = self.build();
            self.pos[k] += 1;
            if topological_order(&d).is_some() {
                return Some(d);
            }
        }
    }
}
