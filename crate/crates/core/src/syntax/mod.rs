//! p-LTL abstract syntax and its concrete text grammar.

mod ast;
mod parser;

pub use ast::{formula_size, GlobalFormula, LocalFormula, Message, Prop, ServiceId, Spec, Vocabulary};
pub use parser::{parse_global, ParseError, ParseErrorKind};
