//! Choreographies written in a local temporal logic over Lamport diagrams,
//! with synthesis of systems of communicating automata and bounded
//! realizability checks.

pub mod conformance;
pub mod diagrams;
pub mod fixtures;
pub mod oracle;
pub mod sca;
pub mod semantics;
pub mod syntax;
pub mod synthesis;
pub mod tableau;
mod text;

pub use text::FormatError;
