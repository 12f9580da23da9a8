//! The `.cp` text format and DOT export.
//!
//! ```text
//! services j a h;                   # optional; otherwise order of appearance
//! states g0 g1 g2 g3 g4* g5;        # `*` marks final states
//! init g0;
//! trans g0 -> g1 on query[j->a];
//! ```

use std::fmt::Write as _;

use crate::diagrams::SendEvent;
use crate::syntax::ServiceId;
use crate::text::{Cursor, FormatError};

use super::{ConversationProtocol, ProtocolTransition};

pub fn parse_cp(text: &str) -> Result<ConversationProtocol, FormatError> {
    let mut cur = Cursor::new(text)?;
    let mut c = ConversationProtocol {
        services: Vec::new(),
        states: Vec::new(),
        finals: Vec::new(),
        init: 0,
        transitions: Vec::new(),
    };
    let mut declared = false;
    let mut init = None;
    while !cur.at_eof() {
        let kw = cur.word()?;
        match kw.as_str() {
            "services" => {
                c.services = cur.words_until_semi()?.into_iter().map(ServiceId).collect();
                declared = true;
            }
            "states" => {
                while !cur.eat_punct(';') {
                    let st = cur.word()?;
                    if c.state(&st).is_some() {
                        return Err(cur.error(format!("duplicate state `{st}`")));
                    }
                    c.finals.push(cur.eat_punct('*'));
                    c.states.push(st);
                }
            }
            "init" => {
                let st = cur.word()?;
                init = Some(c.state(&st).ok_or_else(|| cur.error(format!("unknown state `{st}`")))?);
                cur.punct(';')?;
            }
            "trans" => {
                let from = cur.word()?;
                let from = c.state(&from).ok_or_else(|| cur.error(format!("unknown state `{from}`")))?;
                cur.arrow()?;
                let to = cur.word()?;
                let to = c.state(&to).ok_or_else(|| cur.error(format!("unknown state `{to}`")))?;
                cur.keyword("on")?;
                let msg = cur.word()?;
                cur.punct('[')?;
                let sender = cur.word()?;
                cur.arrow()?;
                let receiver = cur.word()?;
                cur.punct(']')?;
                cur.punct(';')?;
                if sender == receiver {
                    return Err(cur.error(format!("`{sender}` cannot send to itself")));
                }
                for svc in [&sender, &receiver] {
                    if !c.services.iter().any(|s| &s.0 == svc) {
                        if declared {
                            return Err(cur.error(format!("undeclared service `{svc}`")));
                        }
                        c.services.push(ServiceId::new(svc.as_str()));
                    }
                }
                c.transitions.push(ProtocolTransition { from, event: SendEvent::new(msg, sender, receiver), to });
            }
            other => {
                return Err(cur.error(format!("expected `services`, `states`, `init` or `trans`, found `{other}`")))
            }
        }
    }
    c.init = init.ok_or_else(|| cur.error("missing `init`"))?;
    Ok(c)
}

pub fn print_cp(c: &ConversationProtocol) -> String {
    let mut out = String::new();
    let services: Vec<&str> = c.services.iter().map(|s| s.as_str()).collect();
    writeln!(out, "services {};", services.join(" ")).unwrap();
    let states: Vec<String> =
        c.states.iter().zip(&c.finals).map(|(q, &f)| if f { format!("{q}*") } else { q.clone() }).collect();
    writeln!(out, "states {};", states.join(" ")).unwrap();
    writeln!(out, "init {};", c.states[c.init]).unwrap();
    for t in &c.transitions {
        writeln!(out, "trans {} -> {} on {};", c.states[t.from], c.states[t.to], t.event).unwrap();
    }
    out
}

pub fn to_dot(c: &ConversationProtocol) -> String {
    let mut out = String::from(
        "digraph protocol {\n  rankdir=LR;\n  node [shape=circle, fontsize=10];\n  start [shape=point];\n",
    );
    for (q, name) in c.states.iter().enumerate() {
        let shape = if c.finals[q] { "doublecircle" } else { "circle" };
        writeln!(out, "  \"{name}\" [shape={shape}];").unwrap();
    }
    writeln!(out, "  start -> \"{}\";", c.states[c.init]).unwrap();
    for t in &c.transitions {
        writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", c.states[t.from], c.states[t.to], t.event).unwrap();
    }
    out.push_str("}\n");
    out
}
