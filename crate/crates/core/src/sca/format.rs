//! The `.sca` text format and DOT export.
//!
//! ```text
//! messages a;
//! service p {
//!   symbols a;                 # optional, defaults to the symbols in letters
//!   states q0 q1 q2*;          # `*` marks final states
//!   trans q0 -> q1 on {a};
//! }
//! couple p.q1 -> c.q1';        # single coupling edge
//! couple p.{q1 q2} -> c.{q1'}; # every pair of the two sets
//! init (q0, q0');              # components in service order
//! init ({q0 q1}, q0');         # product of sets
//! ```
//!
//! State names are local to their service.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::syntax::ServiceId;
use crate::text::{Cursor, FormatError, Tok};

use super::{Sca, ServiceAutomaton};

pub fn parse_sca(text: &str) -> Result<Sca, FormatError> {
    let mut cur = Cursor::new(text)?;
    let mut sca = Sca::new(Vec::<String>::new());
    while !cur.at_eof() {
        let kw = cur.word()?;
        match kw.as_str() {
            "messages" => sca.messages.extend(cur.words_until_semi()?),
            "service" => {
                let name = cur.word()?;
                if name.contains('.') {
                    return Err(cur.error("service names cannot contain `.`"));
                }
                if sca.service_index(&ServiceId::new(name.as_str())).is_some() {
                    return Err(cur.error(format!("duplicate service `{name}`")));
                }
                let a = parse_service(&mut cur, name)?;
                sca.add_service(a);
            }
            "couple" => {
                let (i, from) = parse_endpoint(&mut cur, &sca)?;
                cur.arrow()?;
                let (j, to) = parse_endpoint(&mut cur, &sca)?;
                cur.punct(';')?;
                if i == j {
                    return Err(cur.error("couplings must link two different services"));
                }
                sca.couple_block(i, from, j, to);
            }
            "init" => {
                cur.punct('(')?;
                let mut block = Vec::new();
                loop {
                    let s = block.len();
                    let a = sca.services.get(s).ok_or_else(|| cur.error("more components than services"))?;
                    let names = if *cur.peek() == Tok::Punct('{') { cur.word_set()? } else { vec![cur.word()?] };
                    let mut set = Vec::new();
                    for nm in names {
                        set.push(
                            a.state(&nm).ok_or_else(|| cur.error(format!("unknown state `{nm}` of `{}`", a.name)))?,
                        );
                    }
                    block.push(set);
                    if cur.eat_punct(')') {
                        break;
                    }
                    cur.punct(',')?;
                }
                cur.punct(';')?;
                if block.len() != sca.services.len() {
                    return Err(cur.error(format!(
                        "expected {} components, found {}",
                        sca.services.len(),
                        block.len()
                    )));
                }
                sca.add_init_block(block);
            }
            other => {
                return Err(cur.error(format!("expected `messages`, `service`, `couple` or `init`, found `{other}`")))
            }
        }
    }
    Ok(sca)
}

fn parse_service(cur: &mut Cursor, name: String) -> Result<ServiceAutomaton, FormatError> {
    let mut a = ServiceAutomaton::new(name);
    cur.punct('{')?;
    while !cur.eat_punct('}') {
        let kw = cur.word()?;
        match kw.as_str() {
            "symbols" => {
                let syms = cur.words_until_semi()?;
                a.symbols.extend(syms);
            }
            "states" => {
                while !cur.eat_punct(';') {
                    let st = cur.word()?;
                    let fin = cur.eat_punct('*');
                    a.add_state(st, fin);
                }
            }
            "trans" => {
                let from = cur.word()?;
                let from = a.state(&from).ok_or_else(|| cur.error(format!("unknown state `{from}`")))?;
                cur.arrow()?;
                let to = cur.word()?;
                let to = a.state(&to).ok_or_else(|| cur.error(format!("unknown state `{to}`")))?;
                cur.keyword("on")?;
                let letter = cur.word_set()?;
                cur.punct(';')?;
                a.add_transition(from, letter, to);
            }
            other => return Err(cur.error(format!("expected `symbols`, `states` or `trans`, found `{other}`"))),
        }
    }
    Ok(a)
}

fn parse_endpoint(cur: &mut Cursor, sca: &Sca) -> Result<(usize, Vec<usize>), FormatError> {
    let word = cur.word()?;
    let (svc, state) =
        word.split_once('.').ok_or_else(|| cur.error(format!("expected `service.state`, found `{word}`")))?;
    let s = sca.service_index(&ServiceId::new(svc)).ok_or_else(|| cur.error(format!("unknown service `{svc}`")))?;
    let a = &sca.services[s];
    let names = if state.is_empty() { cur.word_set()? } else { vec![state.to_string()] };
    let mut out = Vec::new();
    for nm in names {
        out.push(a.state(&nm).ok_or_else(|| cur.error(format!("unknown state `{nm}` of `{svc}`")))?);
    }
    Ok((s, out))
}

fn set_str(names: &[&str]) -> String {
    if names.len() == 1 {
        names[0].to_string()
    } else {
        format!("{{{}}}", names.join(" "))
    }
}

pub fn print_sca(sca: &Sca) -> String {
    let mut out = String::new();
    if !sca.messages.is_empty() {
        writeln!(out, "messages {};", sca.messages.iter().cloned().collect::<Vec<_>>().join(" ")).unwrap();
    }
    for a in &sca.services {
        writeln!(out, "service {} {{", a.name).unwrap();
        if !a.symbols.is_empty() {
            writeln!(out, "  symbols {};", a.symbols.iter().cloned().collect::<Vec<_>>().join(" ")).unwrap();
        }
        let states: Vec<String> =
            a.states.iter().zip(&a.finals).map(|(q, &f)| if f { format!("{q}*") } else { q.clone() }).collect();
        writeln!(out, "  states {};", states.join(" ")).unwrap();
        for t in &a.transitions {
            let letter: Vec<_> = a.letters[t.letter].iter().map(|s| s.as_str()).collect();
            writeln!(out, "  trans {} -> {} on {{{}}};", a.states[t.from], a.states[t.to], letter.join(" ")).unwrap();
        }
        out.push_str("}\n");
    }
    for b in &sca.couplings {
        let (fa, ta) = (&sca.services[b.from_service], &sca.services[b.to_service]);
        let from: Vec<&str> = b.from.iter().map(|&q| fa.states[q].as_str()).collect();
        let to: Vec<&str> = b.to.iter().map(|&q| ta.states[q].as_str()).collect();
        writeln!(out, "couple {}.{} -> {}.{};", fa.name, set_str(&from), ta.name, set_str(&to)).unwrap();
    }
    for blk in &sca.init {
        let comps: Vec<String> = blk
            .iter()
            .enumerate()
            .map(|(s, set)| set_str(&set.iter().map(|&q| sca.services[s].states[q].as_str()).collect::<Vec<_>>()))
            .collect();
        writeln!(out, "init ({});", comps.join(", ")).unwrap();
    }
    out
}

/// Local transitions drawn bold; each coupling block becomes a small hub
/// node with thin arrows from its sources and to its targets.
pub fn to_dot(sca: &Sca) -> String {
    let mut out = String::from("digraph sca {\n  rankdir=LR;\n  node [shape=circle, fontsize=10];\n");
    let node = |s: usize, q: usize| format!("\"{}_{}\"", s, q);
    let init: BTreeSet<(usize, usize)> = sca
        .init
        .iter()
        .flat_map(|b| b.iter().enumerate().flat_map(|(s, set)| set.iter().map(move |&q| (s, q))))
        .collect();
    for (s, a) in sca.services.iter().enumerate() {
        writeln!(out, "  subgraph cluster_{s} {{\n    label=\"{}\";", a.name).unwrap();
        for (q, name) in a.states.iter().enumerate() {
            let shape = if a.finals[q] { "doublecircle" } else { "circle" };
            let style = if init.contains(&(s, q)) { ", style=bold" } else { "" };
            writeln!(out, "    {} [label=\"{}\", shape={shape}{style}];", node(s, q), name).unwrap();
        }
        for t in &a.transitions {
            let letter: Vec<_> = a.letters[t.letter].iter().map(|x| x.as_str()).collect();
            writeln!(
                out,
                "    {} -> {} [label=\"{{{}}}\", penwidth=2];",
                node(s, t.from),
                node(s, t.to),
                letter.join(",")
            )
            .unwrap();
        }
        out.push_str("  }\n");
    }
    for (b, blk) in sca.couplings.iter().enumerate() {
        if blk.from.len() == 1 && blk.to.len() == 1 {
            writeln!(
                out,
                "  {} -> {} [label=\"λ\", style=dashed, penwidth=0.6, constraint=false];",
                node(blk.from_service, blk.from[0]),
                node(blk.to_service, blk.to[0])
            )
            .unwrap();
            continue;
        }
        writeln!(out, "  lambda_{b} [shape=point, label=\"\"];").unwrap();
        for &q in &blk.from {
            writeln!(
                out,
                "  {} -> lambda_{b} [style=dashed, penwidth=0.6, arrowhead=none];",
                node(blk.from_service, q)
            )
            .unwrap();
        }
        for &q in &blk.to {
            writeln!(out, "  lambda_{b} -> {} [style=dashed, penwidth=0.6, label=\"λ\"];", node(blk.to_service, q))
                .unwrap();
        }
    }
    out.push_str("}\n");
    out
}
