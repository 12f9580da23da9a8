//! Truth of local and global formulas on Lamport diagrams.
//!
//! Local formulas are evaluated bottom-up: one truth vector over the events
//! of the owning service per subformula.

use std::collections::HashMap;

use thiserror::Error;

use crate::diagrams::{Configuration, Endpoint, EventId, LamportDiagram};
use crate::syntax::{GlobalFormula, LocalFormula, ServiceId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("service `{0}` does not occur in the diagram")]
    UnknownService(ServiceId),
    #[error("formula of `{0}` mentions communication with itself")]
    SelfCommunication(ServiceId),
    #[error("event {0:?} is not part of the diagram")]
    UnknownEvent(EventId),
    #[error("configuration {0:?} does not fit the diagram")]
    BadConfiguration(Configuration),
}

/// Memoized truth vectors of local formulas over one service's chain.
pub struct LocalEvaluator<'d> {
    d: &'d LamportDiagram,
    service: usize,
    memo: HashMap<LocalFormula, Vec<bool>>,
}

impl<'d> LocalEvaluator<'d> {
    pub fn new(d: &'d LamportDiagram, service: usize) -> Self {
        LocalEvaluator { d, service, memo: HashMap::new() }
    }

    fn peer(&self, s: &ServiceId) -> Result<usize, SemanticsError> {
        let idx = self.d.service_index(s).ok_or_else(|| SemanticsError::UnknownService(s.clone()))?;
        if idx == self.service {
            return Err(SemanticsError::SelfCommunication(s.clone()));
        }
        Ok(idx)
    }

    /// Truth of `alpha` at every event of the service, ⊥ first.
    pub fn table(&mut self, alpha: &LocalFormula) -> Result<Vec<bool>, SemanticsError> {
        if let Some(v) = self.memo.get(alpha) {
            return Ok(v.clone());
        }
        let d = self.d;
        let s = self.service;
        let n = d.events(s).len();
        let ids = (0..n).map(|i| EventId::new(s, i));
        let v: Vec<bool> = match alpha {
            LocalFormula::True => vec![true; n],
            LocalFormula::False => vec![false; n],
            LocalFormula::Prop(p) => ids.map(|e| d.event(e).labels.contains(p.as_str())).collect(),
            LocalFormula::Send { msg, to } => {
                let t = self.peer(to)?;
                ids.map(|e| {
                    matches!(d.endpoint(e), Some(Endpoint::SendTo(r)) if r.service == t)
                        && d.event(e).labels.contains(msg.as_str())
                })
                .collect()
            }
            LocalFormula::Recv { msg, from } => {
                let t = self.peer(from)?;
                ids.map(|e| {
                    matches!(d.endpoint(e), Some(Endpoint::RecvFrom(snd)) if snd.service == t)
                        && d.event(e).labels.contains(msg.as_str())
                })
                .collect()
            }
            LocalFormula::Not(a) => self.table(a)?.into_iter().map(|b| !b).collect(),
            LocalFormula::Or(a, b) => {
                let (x, y) = (self.table(a)?, self.table(b)?);
                x.into_iter().zip(y).map(|(p, q)| p || q).collect()
            }
            // `X false` marks the last event and `Y false` marks ⊥.
            LocalFormula::Next(a) if **a == LocalFormula::False => (0..n).map(|i| i + 1 == n).collect(),
            LocalFormula::Prev(a) if **a == LocalFormula::False => (0..n).map(|i| i == 0).collect(),
            LocalFormula::Next(a) => {
                let x = self.table(a)?;
                (0..n).map(|i| i + 1 < n && x[i + 1]).collect()
            }
            LocalFormula::Prev(a) => {
                let x = self.table(a)?;
                (0..n).map(|i| i > 0 && x[i - 1]).collect()
            }
            LocalFormula::Eventually(a) => {
                let x = self.table(a)?;
                let mut out = vec![false; n];
                let mut seen = false;
                for i in (0..n).rev() {
                    seen |= x[i];
                    out[i] = seen;
                }
                out
            }
        };
        self.memo.insert(alpha.clone(), v.clone());
        Ok(v)
    }
}

/// `D, e ⊨ alpha`, with `alpha` read as a formula of `e`'s service.
pub fn sat_local(d: &LamportDiagram, e: EventId, alpha: &LocalFormula) -> Result<bool, SemanticsError> {
    if e.service >= d.services().len() || e.index >= d.events(e.service).len() {
        return Err(SemanticsError::UnknownEvent(e));
    }
    Ok(LocalEvaluator::new(d, e.service).table(alpha)?[e.index])
}

/// `D, c ⊨ psi`.
pub fn sat_global(d: &LamportDiagram, c: &[usize], psi: &GlobalFormula) -> Result<bool, SemanticsError> {
    if !crate::diagrams::is_consistent(d, c) {
        return Err(SemanticsError::BadConfiguration(c.to_vec()));
    }
    let mut evals: HashMap<usize, LocalEvaluator<'_>> = HashMap::new();
    eval_global(d, c, psi, &mut evals)
}

fn eval_global<'d>(
    d: &'d LamportDiagram,
    c: &[usize],
    psi: &GlobalFormula,
    evals: &mut HashMap<usize, LocalEvaluator<'d>>,
) -> Result<bool, SemanticsError> {
    Ok(match psi {
        GlobalFormula::At(alpha, s) => {
            let idx = d.service_index(s).ok_or_else(|| SemanticsError::UnknownService(s.clone()))?;
            let ev = evals.entry(idx).or_insert_with(|| LocalEvaluator::new(d, idx));
            ev.table(alpha)?[c[idx]]
        }
        GlobalFormula::Not(g) => !eval_global(d, c, g, evals)?,
        GlobalFormula::Or(a, b) => eval_global(d, c, a, evals)? || eval_global(d, c, b, evals)?,
    })
}

/// Truth at the initial configuration.
pub fn models(d: &LamportDiagram, psi: &GlobalFormula) -> Result<bool, SemanticsError> {
    sat_global(d, &d.initial_configuration(), psi)
}
