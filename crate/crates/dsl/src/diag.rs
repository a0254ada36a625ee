use std::fmt;

/// A source position, 1-based. Positions never take part in structural
/// equality of syntax trees.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }

    /// Field-wise comparison, for when positions do matter.
    pub fn same(&self, other: &Pos) -> bool {
        self.line == other.line && self.col == other.col
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagKind {
    Syntax,
    Elaboration,
    /// A state-space or search guard was exceeded.
    Guard,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            kind: DiagKind::Syntax,
            pos,
            message: message.into(),
        }
    }

    pub fn elab(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            kind: DiagKind::Elaboration,
            pos,
            message: message.into(),
        }
    }

    /// Wraps an algebra error raised while elaborating the node at `pos`.
    pub fn from_algebra(pos: Pos, e: viewcheck_core::AlgebraError) -> Self {
        use viewcheck_core::AlgebraError as E;
        let kind = match e {
            E::StateSpaceTooLarge { .. } | E::SearchTooLarge(_) => DiagKind::Guard,
            _ => DiagKind::Elaboration,
        };
        Diagnostic {
            kind,
            pos,
            message: e.to_string(),
        }
    }
}
