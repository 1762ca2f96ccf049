// SPDX-License-Identifier: Apache-2.0

//! Lexer, parser and printer for a synthesizable Verilog subset: one module
//! per file, unsigned `[N-1:0]` vectors up to 128 bits, continuous assigns,
//! level- and edge-sensitive `always` blocks, `if`/`case`, blocking and
//! nonblocking assignment.

pub mod ast;
mod lexer;
mod parser;
mod printer;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::parse_module;
pub use printer::print_module;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceLoc {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
}

impl Default for SourceLoc {
    fn default() -> Self {
        SourceLoc {
            file: Arc::from(""),
            line: 1,
            col: 1,
        }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{loc}: error: {message}")]
    Lex { loc: SourceLoc, message: String },
    #[error("{loc}: error: expected {expected}, found {found}")]
    Parse {
        loc: SourceLoc,
        expected: String,
        found: String,
    },
}

impl FrontendError {
    pub fn loc(&self) -> &SourceLoc {
        match self {
            FrontendError::Lex { loc, .. } | FrontendError::Parse { loc, .. } => loc,
        }
    }
}

/// Tokenizes and parses `source` in one step.
pub fn parse_source(file: &str, source: &str) -> Result<ast::ModuleAst, FrontendError> {
    let tokens = tokenize(file, source)?;
    parse_module(&tokens)
}
