//! The `.bk` specification language: declarations of domains, alphabets,
//! views, systems, designs, secrets and policies, plus `check` queries.

pub mod ast;
pub mod diag;
pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use diag::{DiagKind, Diagnostic, Pos};
pub use elaborate::{elaborate, elaborate_with_limit, Check, Model, Outcome, Verdict};
pub use parser::{parse, parse_expr};

/// Parses and elaborates `src` in one step.
pub fn load(src: &str, limit: u64) -> Result<Model, Diagnostic> {
    elaborate_with_limit(&parse(src)?, limit)
}
