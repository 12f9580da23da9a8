//! The example inputs shipped in the top-level `fixtures/` directory.

use crate::conformance::{parse_cp, ConversationProtocol};
use crate::diagrams::{parse_ld, LamportDiagram};
use crate::sca::{parse_sca, Sca};
use crate::syntax::{parse_global, GlobalFormula};

macro_rules! fixture {
    ($name:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/", $name))
    };
}

pub const PRODCONS: &str = fixture!("prodcons.pltl");
pub const PRODCONS_LITERAL: &str = fixture!("prodcons_literal.pltl");
pub const TRAVELLER: &str = fixture!("traveller.pltl");
pub const TRUE: &str = fixture!("true.pltl");
pub const FALSE: &str = fixture!("false.pltl");
pub const BUFFER1: &str = fixture!("buffer1.ld");
pub const BUFFER2: &str = fixture!("buffer2.ld");
pub const BUFFER3: &str = fixture!("buffer3.ld");
pub const PRODCONS_SCA: &str = fixture!("prodcons.sca");
pub const C0_IMPL: &str = fixture!("c0_impl.sca");
pub const C1_IMPL: &str = fixture!("c1_impl.sca");
pub const C2_IMPL: &str = fixture!("c2_impl.sca");
pub const C0: &str = fixture!("c0.cp");
pub const C1: &str = fixture!("c1.cp");
pub const C2: &str = fixture!("c2.cp");

/// Formulas of the oracle suite, by file stem.
pub const FORMULAS: [(&str, &str); 5] = [
    ("prodcons", PRODCONS),
    ("prodcons_literal", PRODCONS_LITERAL),
    ("traveller", TRAVELLER),
    ("true", TRUE),
    ("false", FALSE),
];

pub fn formula(text: &str) -> GlobalFormula {
    parse_global(text).expect("fixture formula parses").formula
}

pub fn diagram(text: &str) -> LamportDiagram {
    parse_ld(text).expect("fixture diagram parses")
}

pub fn sca(text: &str) -> Sca {
    parse_sca(text).expect("fixture automaton parses")
}

pub fn protocol(text: &str) -> ConversationProtocol {
    parse_cp(text).expect("fixture protocol parses")
}
