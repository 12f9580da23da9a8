use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of a service (an agent taking part in the choreography).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServiceId(pub String);

/// Name of a message symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Message(pub String);

/// Name of a local proposition, owned by exactly one service.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prop(pub String);

macro_rules! name_impls {
    ($($t:ident),*) => {$(
        impl $t {
            pub fn new(name: impl Into<String>) -> Self {
                $t(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                $t(s.to_string())
            }
        }
    )*};
}

name_impls!(ServiceId, Message, Prop);

/// A formula local to one service.
///
/// Derived connectives (`&`, `->`, `G`) never appear here: they are expanded
/// by the smart constructors, which also collapse double negations and map
/// `~true`/`~false` onto the literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LocalFormula {
    True,
    False,
    Prop(Prop),
    Send { msg: Message, to: ServiceId },
    Recv { msg: Message, from: ServiceId },
    Not(Box<LocalFormula>),
    Or(Box<LocalFormula>, Box<LocalFormula>),
    Next(Box<LocalFormula>),
    Eventually(Box<LocalFormula>),
    Prev(Box<LocalFormula>),
}

impl LocalFormula {
    pub fn prop(name: impl Into<String>) -> Self {
        LocalFormula::Prop(Prop(name.into()))
    }

    pub fn send(msg: impl Into<String>, to: impl Into<String>) -> Self {
        LocalFormula::Send { msg: Message(msg.into()), to: ServiceId(to.into()) }
    }

    pub fn recv(msg: impl Into<String>, from: impl Into<String>) -> Self {
        LocalFormula::Recv { msg: Message(msg.into()), from: ServiceId(from.into()) }
    }

    /// Negation with `~~a = a`, `~true = false`, `~false = true`.
    pub fn negate(&self) -> Self {
        match self {
            LocalFormula::Not(inner) => (**inner).clone(),
            LocalFormula::True => LocalFormula::False,
            LocalFormula::False => LocalFormula::True,
            other => LocalFormula::Not(Box::new(other.clone())),
        }
    }

    pub fn or(self, rhs: Self) -> Self {
        LocalFormula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn and(self, rhs: Self) -> Self {
        self.negate().or(rhs.negate()).negate()
    }

    pub fn implies(self, rhs: Self) -> Self {
        self.negate().or(rhs)
    }

    pub fn next(self) -> Self {
        LocalFormula::Next(Box::new(self))
    }

    pub fn eventually(self) -> Self {
        LocalFormula::Eventually(Box::new(self))
    }

    /// `G a` is `~F~a`.
    pub fn globally(self) -> Self {
        self.negate().eventually().negate()
    }

    pub fn prev(self) -> Self {
        LocalFormula::Prev(Box::new(self))
    }

    pub fn at(self, service: impl Into<String>) -> GlobalFormula {
        GlobalFormula::At(self, ServiceId(service.into()))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            LocalFormula::True
            | LocalFormula::False
            | LocalFormula::Prop(_)
            | LocalFormula::Send { .. }
            | LocalFormula::Recv { .. } => 1,
            LocalFormula::Not(a) | LocalFormula::Next(a) | LocalFormula::Eventually(a) | LocalFormula::Prev(a) => {
                1 + a.size()
            }
            LocalFormula::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Number of temporal operator nodes (`X`, `F`, `Y`; a `G` counts once).
    pub fn modality_count(&self) -> usize {
        match self {
            LocalFormula::True
            | LocalFormula::False
            | LocalFormula::Prop(_)
            | LocalFormula::Send { .. }
            | LocalFormula::Recv { .. } => 0,
            LocalFormula::Not(a) => a.modality_count(),
            LocalFormula::Next(a) | LocalFormula::Eventually(a) | LocalFormula::Prev(a) => 1 + a.modality_count(),
            LocalFormula::Or(a, b) => a.modality_count() + b.modality_count(),
        }
    }

    /// Calls `f` on every subformula, outermost first.
    pub fn visit(&self, f: &mut impl FnMut(&LocalFormula)) {
        f(self);
        match self {
            LocalFormula::Not(a) | LocalFormula::Next(a) | LocalFormula::Eventually(a) | LocalFormula::Prev(a) => {
                a.visit(f)
            }
            LocalFormula::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn is_derived_free(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |g| {
            if let LocalFormula::Not(inner) = g {
                if matches!(**inner, LocalFormula::Not(_) | LocalFormula::True | LocalFormula::False) {
                    ok = false;
                }
            }
        });
        ok
    }
}

/// Boolean combination of service-anchored local formulas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GlobalFormula {
    At(LocalFormula, ServiceId),
    Not(Box<GlobalFormula>),
    Or(Box<GlobalFormula>, Box<GlobalFormula>),
}

impl GlobalFormula {
    pub fn negate(&self) -> Self {
        match self {
            GlobalFormula::Not(inner) => (**inner).clone(),
            other => GlobalFormula::Not(Box::new(other.clone())),
        }
    }

    pub fn or(self, rhs: Self) -> Self {
        GlobalFormula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn and(self, rhs: Self) -> Self {
        self.negate().or(rhs.negate()).negate()
    }

    pub fn implies(self, rhs: Self) -> Self {
        self.negate().or(rhs)
    }

    /// Number of AST nodes; service names are not counted.
    pub fn size(&self) -> usize {
        match self {
            GlobalFormula::At(a, _) => 1 + a.size(),
            GlobalFormula::Not(g) => 1 + g.size(),
            GlobalFormula::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn modality_count(&self) -> usize {
        match self {
            GlobalFormula::At(a, _) => a.modality_count(),
            GlobalFormula::Not(g) => g.modality_count(),
            GlobalFormula::Or(a, b) => a.modality_count() + b.modality_count(),
        }
    }

    /// Calls `f` on every anchored local formula.
    pub fn visit_locals(&self, f: &mut impl FnMut(&LocalFormula, &ServiceId)) {
        match self {
            GlobalFormula::At(a, s) => f(a, s),
            GlobalFormula::Not(g) => g.visit_locals(f),
            GlobalFormula::Or(a, b) => {
                a.visit_locals(f);
                b.visit_locals(f);
            }
        }
    }

    /// Distinct send/receive propositions occurring in the formula.
    pub fn comm_props(&self) -> BTreeSet<(ServiceId, LocalFormula)> {
        let mut out = BTreeSet::new();
        self.visit_locals(&mut |a, s| {
            a.visit(&mut |g| {
                if matches!(g, LocalFormula::Send { .. } | LocalFormula::Recv { .. }) {
                    out.insert((s.clone(), g.clone()));
                }
            })
        });
        out
    }

    pub fn is_derived_free(&self) -> bool {
        match self {
            GlobalFormula::At(a, _) => a.is_derived_free(),
            GlobalFormula::Not(g) => !matches!(**g, GlobalFormula::Not(_)) && g.is_derived_free(),
            GlobalFormula::Or(a, b) => a.is_derived_free() && b.is_derived_free(),
        }
    }
}

pub fn formula_size(psi: &GlobalFormula) -> usize {
    psi.size()
}

/// Symbols induced by a formula: services, messages, and per-service propositions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Services in order of first appearance.
    pub services: Vec<ServiceId>,
    pub messages: BTreeSet<Message>,
    pub props: BTreeMap<ServiceId, BTreeSet<Prop>>,
}

impl Vocabulary {
    /// Symbols occurring in `psi`: anchored services in order of appearance,
    /// then communication peers that are never anchored.
    pub fn of(psi: &GlobalFormula) -> Self {
        let mut v = Vocabulary::default();
        let mut peers = Vec::new();
        psi.visit_locals(&mut |alpha, s| {
            v.add_service(s);
            alpha.visit(&mut |g| match g {
                LocalFormula::Prop(p) => {
                    v.props.entry(s.clone()).or_default().insert(p.clone());
                }
                LocalFormula::Send { msg, to: peer } | LocalFormula::Recv { msg, from: peer } => {
                    v.messages.insert(msg.clone());
                    if !peers.contains(peer) {
                        peers.push(peer.clone());
                    }
                }
                _ => {}
            });
        });
        for p in &peers {
            v.add_service(p);
        }
        v
    }

    pub fn service_index(&self, s: &ServiceId) -> Option<usize> {
        self.services.iter().position(|x| x == s)
    }

    pub fn props_of(&self, s: &ServiceId) -> BTreeSet<Prop> {
        self.props.get(s).cloned().unwrap_or_default()
    }

    pub(crate) fn add_service(&mut self, s: &ServiceId) {
        if !self.services.contains(s) {
            self.services.push(s.clone());
            self.props.entry(s.clone()).or_default();
        }
    }
}

/// A parsed formula together with its induced vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spec {
    pub formula: GlobalFormula,
    pub vocab: Vocabulary,
}

impl fmt::Display for LocalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalFormula::True => f.write_str("true"),
            LocalFormula::False => f.write_str("false"),
            LocalFormula::Prop(p) => write!(f, "{p}"),
            LocalFormula::Send { msg, to } => write!(f, "snd({msg},{to})"),
            LocalFormula::Recv { msg, from } => write!(f, "rcv({msg},{from})"),
            LocalFormula::Not(a) => write!(f, "~{a}"),
            LocalFormula::Or(a, b) => write!(f, "({a} | {b})"),
            LocalFormula::Next(a) => write!(f, "X {a}"),
            LocalFormula::Eventually(a) => write!(f, "F {a}"),
            LocalFormula::Prev(a) => write!(f, "Y {a}"),
        }
    }
}

impl fmt::Display for GlobalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalFormula::At(a, s) => write!(f, "({a}) @ {s}"),
            GlobalFormula::Not(g) => write!(f, "~({g})"),
            GlobalFormula::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}
