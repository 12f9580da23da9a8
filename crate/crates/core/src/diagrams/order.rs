use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{Configuration, EventId, LamportDiagram, SendEvent};

/// A topological order of all events (⊥ events included), or `None` if the
/// causal order has a cycle. Ties are broken by the smallest event id.
pub fn topological_order(d: &LamportDiagram) -> Option<Vec<EventId>> {
    let n = d.services().len();
    let mut next = vec![0usize; n];
    let mut out = Vec::with_capacity(d.total_events() + n);
    let mut done = BTreeSet::new();
    loop {
        let ready = (0..n).find(|&s| {
            next[s] < d.events(s).len() && {
                let e = EventId::new(s, next[s]);
                d.comm().iter().all(|&(snd, rcv)| rcv != e || done.contains(&snd))
            }
        });
        match ready {
            Some(s) => {
                let e = EventId::new(s, next[s]);
                done.insert(e);
                out.push(e);
                next[s] += 1;
            }
            None => break,
        }
    }
    (out.len() == d.total_events() + n).then_some(out)
}

/// Downward closure: a received event is only included with its send.
pub fn is_consistent(d: &LamportDiagram, c: &[usize]) -> bool {
    c.len() == d.services().len()
        && c.iter().enumerate().all(|(s, &i)| i <= d.len(s))
        && d.comm().iter().all(|&(snd, rcv)| rcv.index > c[rcv.service] || snd.index <= c[snd.service])
}

/// One-event extensions of `c` that are configurations.
pub fn successors(c: &[usize], d: &LamportDiagram) -> Vec<(EventId, Configuration)> {
    let mut out = Vec::new();
    for s in 0..c.len() {
        if c[s] < d.len(s) {
            let mut next = c.to_vec();
            next[s] += 1;
            let e = EventId::new(s, next[s]);
            let enabled = d.comm().iter().all(|&(snd, rcv)| rcv != e || snd.index <= next[snd.service]);
            if enabled {
                out.push((e, next));
            }
        }
    }
    out
}

/// All configurations, ordered by number of events and then lexicographically.
pub fn configurations(d: &LamportDiagram) -> Vec<Configuration> {
    let start = d.initial_configuration();
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for (_, next) in successors(&c, d) {
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort_by_key(|c| (c.iter().sum::<usize>(), c.clone()));
    out
}

/// All topological orders of the non-⊥ events.
pub fn linearizations(d: &LamportDiagram) -> Vec<Vec<EventId>> {
    fn go(d: &LamportDiagram, c: &mut Configuration, prefix: &mut Vec<EventId>, out: &mut Vec<Vec<EventId>>) {
        let succ = successors(c, d);
        if succ.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for (e, _) in succ {
            c[e.service] += 1;
            prefix.push(e);
            go(d, c, prefix, out);
            prefix.pop();
            c[e.service] -= 1;
        }
    }
    let mut out = Vec::new();
    go(d, &mut d.initial_configuration(), &mut Vec::new(), &mut out);
    out
}

/// Send projections of all linearizations.
pub fn chor(d: &LamportDiagram) -> BTreeSet<Vec<SendEvent>> {
    let sends: HashMap<EventId, SendEvent> = d
        .comm()
        .iter()
        .map(|&(s, r)| {
            let msg = d.message_of(s).unwrap_or_default().to_string();
            let ev = SendEvent { msg, from: d.services()[s.service].clone(), to: d.services()[r.service].clone() };
            (s, ev)
        })
        .collect();
    // Suffix words per configuration, shared between interleavings.
    fn go(
        d: &LamportDiagram,
        c: &Configuration,
        sends: &HashMap<EventId, SendEvent>,
        memo: &mut BTreeMap<Configuration, BTreeSet<Vec<SendEvent>>>,
    ) -> BTreeSet<Vec<SendEvent>> {
        if let Some(words) = memo.get(c) {
            return words.clone();
        }
        let succ = successors(c, d);
        let mut words = BTreeSet::new();
        if succ.is_empty() {
            words.insert(Vec::new());
        }
        for (e, next) in succ {
            for tail in go(d, &next, sends, memo) {
                match sends.get(&e) {
                    Some(ev) => {
                        let mut w = Vec::with_capacity(tail.len() + 1);
                        w.push(ev.clone());
                        w.extend(tail);
                        words.insert(w);
                    }
                    None => {
                        words.insert(tail);
                    }
                }
            }
        }
        memo.insert(c.clone(), words.clone());
        words
    }
    go(d, &d.initial_configuration(), &sends, &mut BTreeMap::new())
}
