//! Concrete grammar for global formulas.
//!
//! ```text
//! global  := imp
//! imp     := disj ( "->" imp )?
//! disj    := conj ( "|" conj )*
//! conj    := at ( "&" at )*
//! at      := unary ( "@" IDENT )?
//! unary   := ("~" | "X" | "F" | "G" | "Y") unary | primary
//! primary := "true" | "false" | IDENT
//!          | "snd" "(" IDENT "," IDENT ")" | "rcv" "(" IDENT "," IDENT ")"
//!          | "(" global ")"
//! ```
//!
//! `#` starts a comment running to the end of the line. A boolean
//! combination directly under `@` needs parentheses: `(p & q) @ s`.

use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{GlobalFormula, LocalFormula, Message, Prop, ServiceId, Spec, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind_str} error at {line}:{column}: {message}", kind_str = match .kind { ParseErrorKind::Syntax => "syntax", ParseErrorKind::Semantic => "semantic" })]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Snd,
    Rcv,
    Next,
    Eventually,
    Globally,
    Prev,
    Not,
    And,
    Or,
    Implies,
    At,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Snd => "`snd`".into(),
            Tok::Rcv => "`rcv`".into(),
            Tok::Next => "`X`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Globally => "`G`".into(),
            Tok::Prev => "`Y`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::At => "`@`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax, message: message.into(), line: pos.line, column: pos.column }
}

fn semantic(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError { kind: ParseErrorKind::Semantic, message: message.into(), line: pos.line, column: pos.column }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut pos = Pos { line: 1, column: 1 };
    while let Some(&c) = chars.peek() {
        let start = pos;
        let bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>, pos: &mut Pos| {
            let c = chars.next().unwrap();
            if c == '\n' {
                pos.line += 1;
                pos.column = 1;
            } else {
                pos.column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars, &mut pos);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars, &mut pos);
            }
            continue;
        }
        if is_ident_start(c) {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if !is_ident_char(c) {
                    break;
                }
                word.push(bump(&mut chars, &mut pos));
            }
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                "snd" => Tok::Snd,
                "rcv" => Tok::Rcv,
                "X" => Tok::Next,
                "F" => Tok::Eventually,
                "G" => Tok::Globally,
                "Y" => Tok::Prev,
                _ => Tok::Ident(word),
            };
            out.push((tok, start));
            continue;
        }
        bump(&mut chars, &mut pos);
        let tok = match c {
            '~' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '@' => Tok::At,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '-' => {
                if chars.peek() == Some(&'>') {
                    bump(&mut chars, &mut pos);
                    Tok::Implies
                } else {
                    return Err(syntax(start, "expected `->`"));
                }
            }
            other => return Err(syntax(start, format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, pos));
    Ok(out)
}

/// Untyped expression; the local/global split is decided after parsing.
#[derive(Debug)]
enum Expr {
    True,
    False,
    Ident(String, Pos),
    Send(String, String, Pos),
    Recv(String, String, Pos),
    Not(Box<Expr>),
    Next(Box<Expr>),
    Eventually(Box<Expr>),
    Globally(Box<Expr>),
    Prev(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    At(Box<Expr>, String, Pos),
    Temporal(Pos),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (tok, pos) = self.next();
        if tok == want {
            Ok(pos)
        } else {
            Err(syntax(pos, format!("expected {}, found {}", want.describe(), tok.describe())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.next() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (tok, p) => Err(syntax(p, format!("expected identifier, found {}", tok.describe()))),
        }
    }

    fn implication(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.next();
            let rhs = self.implication()?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.next();
            let rhs = self.conjunction()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.anchored()?;
        while *self.peek() == Tok::And {
            self.next();
            let rhs = self.anchored()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn anchored(&mut self) -> Result<Expr, ParseError> {
        let body = self.unary()?;
        if *self.peek() == Tok::At {
            self.next();
            let (s, p) = self.ident()?;
            return Ok(Expr::At(Box::new(body), s, p));
        }
        Ok(body)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let wrap: fn(Box<Expr>) -> Expr = match self.peek() {
            Tok::Not => Expr::Not,
            Tok::Next => Expr::Next,
            Tok::Eventually => Expr::Eventually,
            Tok::Globally => Expr::Globally,
            Tok::Prev => Expr::Prev,
            _ => return self.primary(),
        };
        let is_temporal = *self.peek() != Tok::Not;
        self.next();
        let inner = self.unary()?;
        let e = wrap(Box::new(inner));
        // Remember where temporal operators start so that misuse over a
        // global formula can be reported at the operator.
        if is_temporal {
            Ok(Expr::And(Box::new(Expr::Temporal(pos)), Box::new(e)))
        } else {
            Ok(e)
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.next();
        match tok {
            Tok::True => Ok(Expr::True),
            Tok::False => Ok(Expr::False),
            Tok::Ident(s) => Ok(Expr::Ident(s, pos)),
            Tok::Snd | Tok::Rcv => {
                self.expect(Tok::LParen)?;
                let (msg, _) = self.ident()?;
                self.expect(Tok::Comma)?;
                let (peer, _) = self.ident()?;
                self.expect(Tok::RParen)?;
                Ok(if tok == Tok::Snd { Expr::Send(msg, peer, pos) } else { Expr::Recv(msg, peer, pos) })
            }
            Tok::LParen => {
                let e = self.implication()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(syntax(pos, format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Strips the position markers inserted for temporal operators.
fn unmark(e: &Expr) -> Option<(Pos, &Expr)> {
    if let Expr::And(l, r) = e {
        if let Expr::Temporal(p) = **l {
            return Some((p, r));
        }
    }
    None
}

struct Typer {
    vocab: Vocabulary,
    prop_owner: BTreeMap<String, (ServiceId, Pos)>,
    first_message_pos: BTreeMap<String, Pos>,
    peers: Vec<ServiceId>,
}

impl Typer {
    fn global(&mut self, e: &Expr) -> Result<GlobalFormula, ParseError> {
        if let Some((pos, _)) = unmark(e) {
            return Err(semantic(pos, "temporal operator outside `@`: anchor the local formula with `@ service`"));
        }
        Ok(match e {
            Expr::At(body, s, _) => {
                let sid = ServiceId(s.clone());
                self.vocab.add_service(&sid);
                let local = self.local(body, &sid)?;
                GlobalFormula::At(local, sid)
            }
            Expr::Not(a) => self.global(a)?.negate(),
            Expr::Or(a, b) => self.global(a)?.or(self.global(b)?),
            Expr::And(a, b) => self.global(a)?.and(self.global(b)?),
            Expr::Implies(a, b) => self.global(a)?.implies(self.global(b)?),
            Expr::Ident(_, p) | Expr::Send(_, _, p) | Expr::Recv(_, _, p) => {
                return Err(semantic(*p, "local formula is not anchored to a service (missing `@ service`)"))
            }
            Expr::True | Expr::False => {
                return Err(semantic(Pos { line: 1, column: 1 }, "`true`/`false` must be anchored to a service"))
            }
            Expr::Next(_) | Expr::Eventually(_) | Expr::Globally(_) | Expr::Prev(_) | Expr::Temporal(_) => {
                unreachable!("temporal operators are always marked")
            }
        })
    }

    fn local(&mut self, e: &Expr, owner: &ServiceId) -> Result<LocalFormula, ParseError> {
        if let Some((_, inner)) = unmark(e) {
            return self.local(inner, owner);
        }
        Ok(match e {
            Expr::True => LocalFormula::True,
            Expr::False => LocalFormula::False,
            Expr::Ident(p, pos) => {
                match self.prop_owner.get(p) {
                    Some((other, _)) if other != owner => {
                        return Err(semantic(
                            *pos,
                            format!(
                                "proposition `{p}` already belongs to service `{other}`, cannot use it under `{owner}`"
                            ),
                        ))
                    }
                    Some(_) => {}
                    None => {
                        self.prop_owner.insert(p.clone(), (owner.clone(), *pos));
                        self.vocab.props.entry(owner.clone()).or_default().insert(Prop(p.clone()));
                    }
                }
                LocalFormula::Prop(Prop(p.clone()))
            }
            Expr::Send(m, peer, pos) | Expr::Recv(m, peer, pos) => {
                if peer == owner.as_str() {
                    return Err(semantic(*pos, format!("service `{owner}` cannot communicate with itself")));
                }
                let peer = ServiceId(peer.clone());
                if !self.peers.contains(&peer) {
                    self.peers.push(peer.clone());
                }
                self.vocab.messages.insert(Message(m.clone()));
                self.first_message_pos.entry(m.clone()).or_insert(*pos);
                if matches!(e, Expr::Send(..)) {
                    LocalFormula::Send { msg: Message(m.clone()), to: peer }
                } else {
                    LocalFormula::Recv { msg: Message(m.clone()), from: peer }
                }
            }
            Expr::Not(a) => self.local(a, owner)?.negate(),
            Expr::Or(a, b) => self.local(a, owner)?.or(self.local(b, owner)?),
            Expr::And(a, b) => self.local(a, owner)?.and(self.local(b, owner)?),
            Expr::Implies(a, b) => self.local(a, owner)?.implies(self.local(b, owner)?),
            Expr::Next(a) => self.local(a, owner)?.next(),
            Expr::Eventually(a) => self.local(a, owner)?.eventually(),
            Expr::Globally(a) => self.local(a, owner)?.globally(),
            Expr::Prev(a) => self.local(a, owner)?.prev(),
            Expr::At(_, _, pos) => {
                return Err(semantic(*pos, "nested `@`: a local formula cannot contain another anchor"))
            }
            Expr::Temporal(_) => unreachable!(),
        })
    }
}

/// Parses a global formula and records its vocabulary.
pub fn parse_global(text: &str) -> Result<Spec, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, at: 0 };
    let expr = parser.implication()?;
    let (tok, pos) = parser.next();
    if tok != Tok::Eof {
        return Err(syntax(pos, format!("unexpected {} after formula", tok.describe())));
    }
    let mut typer = Typer {
        vocab: Vocabulary::default(),
        prop_owner: BTreeMap::new(),
        first_message_pos: BTreeMap::new(),
        peers: Vec::new(),
    };
    let formula = typer.global(&expr)?;
    for peer in std::mem::take(&mut typer.peers) {
        typer.vocab.add_service(&peer);
    }
    for (m, pos) in &typer.first_message_pos {
        if let Some((owner, _)) = typer.prop_owner.get(m) {
            return Err(semantic(*pos, format!("`{m}` is used both as a message and as a proposition of `{owner}`")));
        }
    }
    Ok(Spec { formula, vocab: typer.vocab })
}
