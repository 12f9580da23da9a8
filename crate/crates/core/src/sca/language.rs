//! Bounded poset and conversation languages of an SCA.
//!
//! Rather than testing every diagram of the bound, candidates are built from
//! what each automaton can do on its own: a per-service path to a final
//! state fixes the labels and, through the couplings leaving each reached
//! state, whether an event is a send (and to whom), a receive or internal.
//! Candidates are then paired up FIFO-style and confirmed by run search.

use std::collections::BTreeSet;

use crate::diagrams::{self, EventId, LamportDiagram, SendEvent};

use super::{RunChecker, Sca, ScaIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Role {
    Internal,
    Send(usize),
    Recv,
}

type Skeleton = Vec<(usize, Role)>;

fn skeletons(sca: &Sca, idx: &ScaIndex, s: usize, bound: usize) -> BTreeSet<Skeleton> {
    let a = &sca.services[s];
    let role_of = |letter: usize, q: usize| -> Option<Role> {
        let msgs = a.letters[letter].iter().filter(|l| sca.messages.contains(*l)).count();
        let out = idx.lambda_out[s][q];
        match (out.count_ones(), msgs) {
            (0, 0) => Some(Role::Internal),
            (0, 1) => Some(Role::Recv),
            (1, 1) => Some(Role::Send(out.trailing_zeros() as usize)),
            _ => None,
        }
    };
    let mut out = BTreeSet::new();
    // Depth-first over label/role prefixes, carrying the set of reachable states.
    let mut stack: Vec<(Skeleton, Vec<usize>)> = vec![(Vec::new(), idx.init_states[s].clone())];
    while let Some((prefix, states)) = stack.pop() {
        if states.iter().any(|&q| a.finals[q]) {
            out.insert(prefix.clone());
        }
        if prefix.len() == bound {
            continue;
        }
        let mut next: std::collections::BTreeMap<(usize, Role), BTreeSet<usize>> = Default::default();
        for &q in &states {
            for &(l, q2) in &idx.out[s][q] {
                if let Some(r) = role_of(l, q2) {
                    next.entry((l, r)).or_default().insert(q2);
                }
            }
        }
        for ((l, r), qs) in next {
            let mut p = prefix.clone();
            p.push((l, r));
            stack.push((p, qs.into_iter().collect()));
        }
    }
    out
}

/// Diagrams with at most `bound` non-⊥ events per service on which `sca`
/// has an accepting run. Event `k` of service `s` is named `s.k`, as in
/// [`diagrams::enumerate_diagrams`].
pub fn bounded_poset_language(sca: &Sca, bound: usize) -> BTreeSet<LamportDiagram> {
    let idx = ScaIndex::new(sca);
    let n = sca.services.len();
    let per_service: Vec<Vec<Skeleton>> =
        (0..n).map(|s| skeletons(sca, &idx, s, bound).into_iter().collect()).collect();
    let checker = RunChecker::new(sca);
    let mut out = BTreeSet::new();
    if per_service.iter().any(Vec::is_empty) {
        return out;
    }
    let mut pick = vec![0usize; n];
    loop {
        let chosen: Vec<&Skeleton> = (0..n).map(|s| &per_service[s][pick[s]]).collect();
        let recvs: Vec<(usize, usize)> = (0..n)
            .flat_map(|s| chosen[s].iter().enumerate().filter(|(_, (_, r))| *r == Role::Recv).map(move |(k, _)| (s, k)))
            .collect();
        let mut senders = vec![0usize; recvs.len()];
        'senders: loop {
            let ok = recvs.iter().zip(&senders).all(|(&(s, _), &t)| t != s);
            if ok {
                if let Some(d) = build(sca, &chosen, &recvs, &senders) {
                    if diagrams::validate(&d).is_ok() && matches!(checker.accepts(&d), Ok(Some(_))) {
                        out.insert(d);
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == senders.len() {
                    break 'senders;
                }
                senders[k] += 1;
                if senders[k] < n {
                    break;
                }
                senders[k] = 0;
                k += 1;
            }
        }
        let mut s = 0;
        loop {
            if s == n {
                return out;
            }
            pick[s] += 1;
            if pick[s] < per_service[s].len() {
                break;
            }
            pick[s] = 0;
            s += 1;
        }
    }
}

fn build(sca: &Sca, chosen: &[&Skeleton], recvs: &[(usize, usize)], senders: &[usize]) -> Option<LamportDiagram> {
    let n = chosen.len();
    let mut d = LamportDiagram::new(sca.services.iter().map(|a| a.name.clone()).collect(), sca.messages.clone());
    let mut sends: std::collections::BTreeMap<(usize, usize), Vec<EventId>> = Default::default();
    let mut receives: std::collections::BTreeMap<(usize, usize), Vec<EventId>> = Default::default();
    let sender_of = |s: usize, k: usize| recvs.iter().position(|&x| x == (s, k)).map(|p| senders[p]);
    for s in 0..n {
        for (k, &(l, role)) in chosen[s].iter().enumerate() {
            let labels = sca.services[s].letters[l].clone();
            let id = d.push_event(s, format!("{}.{}", sca.services[s].name, k + 1), labels);
            match role {
                Role::Send(t) => sends.entry((s, t)).or_default().push(id),
                Role::Recv => receives.entry((sender_of(s, k)?, s)).or_default().push(id),
                Role::Internal => {}
            }
        }
    }
    let keys: BTreeSet<(usize, usize)> = sends.keys().chain(receives.keys()).copied().collect();
    for key in keys {
        let ss = sends.remove(&key).unwrap_or_default();
        let rs = receives.remove(&key).unwrap_or_default();
        if ss.len() != rs.len() {
            return None;
        }
        for (snd, rcv) in ss.into_iter().zip(rs) {
            d.add_message(snd, rcv);
        }
    }
    Some(d)
}

/// Union of the conversation sets of the bounded poset language.
pub fn bounded_chor_language(sca: &Sca, bound: usize) -> BTreeSet<Vec<SendEvent>> {
    bounded_poset_language(sca, bound).iter().flat_map(diagrams::chor).collect()
}
