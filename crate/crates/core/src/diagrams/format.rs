//! The `.ld` text format and DOT export.
//!
//! ```text
//! services: p c
//! messages: a
//! event e1 p {a}
//! event f1 c {a}
//! msg e1 -> f1
//! ```
//!
//! ⊥ events are implicit. Events are listed in local order; labels that are
//! declared under `messages:` are message names, all others propositions.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::syntax::ServiceId;
use crate::text::{Cursor, FormatError};

use super::LamportDiagram;

pub fn parse_ld(text: &str) -> Result<LamportDiagram, FormatError> {
    let mut cur = Cursor::new(text)?;
    let line = cur.line();
    cur.keyword("services")?;
    cur.punct(':')?;
    let services: Vec<ServiceId> = cur.words_on_line(line)?.into_iter().map(ServiceId).collect();
    if services.is_empty() {
        return Err(cur.error("at least one service is required"));
    }
    let mut messages = BTreeSet::new();
    if matches!(cur.peek(), crate::text::Tok::Word(w) if w == "messages") {
        let line = cur.line();
        cur.keyword("messages")?;
        cur.punct(':')?;
        messages.extend(cur.words_on_line(line)?);
    }
    let mut d = LamportDiagram::new(services, messages);
    while !cur.at_eof() {
        let kw = cur.word()?;
        match kw.as_str() {
            "event" => {
                let name = cur.word()?;
                if d.find_event(&name).is_some() {
                    return Err(cur.error(format!("duplicate event `{name}`")));
                }
                let svc = cur.word()?;
                let s = d
                    .service_index(&ServiceId::new(svc.as_str()))
                    .ok_or_else(|| cur.error(format!("unknown service `{svc}`")))?;
                let labels = cur.word_set()?;
                d.push_event(s, name, labels);
            }
            "msg" => {
                let endpoint = |cur: &mut Cursor| {
                    let name = cur.word()?;
                    d.find_event(&name).ok_or_else(|| cur.error(format!("unknown event `{name}`")))
                };
                let send = endpoint(&mut cur)?;
                cur.arrow()?;
                let recv = endpoint(&mut cur)?;
                d.add_message(send, recv);
            }
            other => return Err(cur.error(format!("expected `event` or `msg`, found `{other}`"))),
        }
    }
    Ok(d)
}

pub fn print_ld(d: &LamportDiagram) -> String {
    let mut out = String::new();
    let names: Vec<_> = d.services().iter().map(|s| s.as_str()).collect();
    writeln!(out, "services: {}", names.join(" ")).unwrap();
    if !d.messages().is_empty() {
        writeln!(out, "messages: {}", d.messages().iter().cloned().collect::<Vec<_>>().join(" ")).unwrap();
    }
    for (s, svc) in d.services().iter().enumerate() {
        for e in &d.events(s)[1..] {
            let labels: Vec<_> = e.labels.iter().map(|l| l.as_str()).collect();
            writeln!(out, "event {} {} {{{}}}", e.name, svc, labels.join(" ")).unwrap();
        }
    }
    for &(snd, rcv) in d.comm() {
        writeln!(out, "msg {} -> {}", d.event(snd).name, d.event(rcv).name).unwrap();
    }
    out
}

/// Services as vertical chains, messages as dashed cross edges.
pub fn to_dot(d: &LamportDiagram) -> String {
    let mut out = String::from(
        "digraph lamport {\n  rankdir=TB;\n  node [shape=circle, fixedsize=true, width=0.35, fontsize=9];\n",
    );
    let node = |s: usize, i: usize| format!("\"{}_{}\"", s, i);
    for (s, svc) in d.services().iter().enumerate() {
        writeln!(out, "  subgraph cluster_{s} {{\n    label=\"{svc}\";\n    color=white;").unwrap();
        for (i, e) in d.events(s).iter().enumerate() {
            let labels: Vec<_> = e.labels.iter().map(|l| l.as_str()).collect();
            let caption = if i == 0 { "⊥".to_string() } else { e.name.clone() };
            writeln!(out, "    {} [label=\"{}\", xlabel=\"{}\"];", node(s, i), caption, labels.join(",")).unwrap();
        }
        for i in 1..d.events(s).len() {
            writeln!(out, "    {} -> {} [arrowhead=none, penwidth=2];", node(s, i - 1), node(s, i)).unwrap();
        }
        out.push_str("  }\n");
    }
    for &(snd, rcv) in d.comm() {
        let msg = d.message_of(snd).unwrap_or("");
        writeln!(
            out,
            "  {} -> {} [style=dashed, label=\"{}\", constraint=false];",
            node(snd.service, snd.index),
            node(rcv.service, rcv.index),
            msg
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
