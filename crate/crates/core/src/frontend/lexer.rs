// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::sync::Arc;

use super::{FrontendError, SourceLoc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Keyword),
    /// Numeric literal. Unsized literals are 32 bits wide with `sized == false`.
    Const {
        width: u32,
        value: u128,
        sized: bool,
    },
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Colon,
    Comma,
    At,
    Star,
    Question,
    Plus,
    Minus,
    Slash,
    Percent,
    Amp,
    Pipe,
    Caret,
    Tilde,
    Bang,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Shl,
    Shr,
    AndAnd,
    OrOr,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Keyword {
    Module,
    Endmodule,
    Input,
    Output,
    Inout,
    Wire,
    Reg,
    Assign,
    Always,
    Posedge,
    Negedge,
    Or,
    Begin,
    End,
    If,
    Else,
    Case,
    Endcase,
    Default,
    Signed,
    Casex,
    Casez,
    Initial,
    Parameter,
    Localparam,
    Generate,
    Integer,
}

impl Keyword {
    fn from_str(s: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match s {
            "module" => Module,
            "endmodule" => Endmodule,
            "input" => Input,
            "output" => Output,
            "inout" => Inout,
            "wire" => Wire,
            "reg" => Reg,
            "assign" => Assign,
            "always" => Always,
            "posedge" => Posedge,
            "negedge" => Negedge,
            "or" => Or,
            "begin" => Begin,
            "end" => End,
            "if" => If,
            "else" => Else,
            "case" => Case,
            "endcase" => Endcase,
            "default" => Default,
            "signed" => Signed,
            "casex" => Casex,
            "casez" => Casez,
            "initial" => Initial,
            "parameter" => Parameter,
            "localparam" => Localparam,
            "generate" => Generate,
            "integer" => Integer,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        use Keyword::*;
        match self {
            Module => "module",
            Endmodule => "endmodule",
            Input => "input",
            Output => "output",
            Inout => "inout",
            Wire => "wire",
            Reg => "reg",
            Assign => "assign",
            Always => "always",
            Posedge => "posedge",
            Negedge => "negedge",
            Or => "or",
            Begin => "begin",
            End => "end",
            If => "if",
            Else => "else",
            Case => "case",
            Endcase => "endcase",
            Default => "default",
            Signed => "signed",
            Casex => "casex",
            Casez => "casez",
            Initial => "initial",
            Parameter => "parameter",
            Localparam => "localparam",
            Generate => "generate",
            Integer => "integer",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        let s = match self {
            Ident(name) => return write!(f, "identifier `{name}`"),
            Keyword(k) => return write!(f, "`{}`", k.as_str()),
            Const {
                width,
                value,
                sized,
            } => {
                return if *sized {
                    write!(f, "`{width}'h{value:x}`")
                } else {
                    write!(f, "`{value}`")
                }
            }
            LParen => "(",
            RParen => ")",
            LBracket => "[",
            RBracket => "]",
            LBrace => "{",
            RBrace => "}",
            Semi => ";",
            Colon => ":",
            Comma => ",",
            At => "@",
            Star => "*",
            Question => "?",
            Plus => "+",
            Minus => "-",
            Slash => "/",
            Percent => "%",
            Amp => "&",
            Pipe => "|",
            Caret => "^",
            Tilde => "~",
            Bang => "!",
            Assign => "=",
            EqEq => "==",
            NotEq => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Shl => "<<",
            Shr => ">>",
            AndAnd => "&&",
            OrOr => "||",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: SourceLoc,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<str>,
}

impl<'a> Lexer<'a> {
    fn loc(&self) -> SourceLoc {
        SourceLoc {
            file: self.file.clone(),
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            // Count columns in characters, not UTF-8 continuation bytes.
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, loc: SourceLoc, message: impl Into<String>) -> FrontendError {
        FrontendError::Lex {
            loc,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'/'), Some(b'/')) => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let start = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek_at(1)) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(self.error(start, "unterminated block comment"))
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn digits(&mut self, allow: impl Fn(u8) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c == b'_' {
                self.bump();
            } else if allow(c) {
                s.push(c as char);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn number(&mut self) -> Result<TokenKind, FrontendError> {
        let start = self.loc();
        let mut size = None;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let text = self.digits(|c| c.is_ascii_digit());
            if self.peek() != Some(b'\'') {
                let value = text.parse::<u128>().map_err(|_| {
                    self.error(start.clone(), format!("literal `{text}` too large"))
                })?;
                if value > u32::MAX as u128 {
                    return Err(
                        self.error(start, format!("unsized literal `{text}` exceeds 32 bits"))
                    );
                }
                return Ok(TokenKind::Const {
                    width: 32,
                    value,
                    sized: false,
                });
            }
            let n: u32 = text
                .parse()
                .map_err(|_| self.error(start.clone(), format!("bad literal size `{text}`")))?;
            size = Some(n);
        }
        // At the apostrophe.
        self.bump();
        if matches!(self.peek(), Some(b's' | b'S')) {
            return Err(self.error(start, "signed literals are not supported"));
        }
        let base = match self.bump().map(|c| c.to_ascii_lowercase()) {
            Some(b'b') => 2,
            Some(b'o') => 8,
            Some(b'd') => 10,
            Some(b'h') => 16,
            _ => return Err(self.error(start, "expected base `b`, `o`, `d` or `h` after `'`")),
        };
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.bump();
        }
        let text = self.digits(|c| c.is_ascii_alphanumeric() || c == b'?');
        if text.is_empty() {
            return Err(self.error(start, "literal has no digits"));
        }
        if text
            .chars()
            .any(|c| matches!(c.to_ascii_lowercase(), 'x' | 'z' | '?'))
        {
            return Err(self.error(start, "x/z digits are not supported in two-state logic"));
        }
        let value = u128::from_str_radix(&text, base)
            .map_err(|_| self.error(start.clone(), format!("malformed literal digits `{text}`")))?;
        let width = size.unwrap_or(32);
        if width == 0 || width > crate::bv::MAX_WIDTH {
            return Err(self.error(start, format!("literal width {width} outside 1..=128")));
        }
        if value & !crate::bv::mask(width) != 0 {
            return Err(self.error(
                start,
                format!("literal value {value:#x} does not fit in {width} bits"),
            ));
        }
        Ok(TokenKind::Const {
            width,
            value,
            sized: size.is_some(),
        })
    }

    fn next_token(&mut self) -> Result<Option<Token>, FrontendError> {
        self.skip_trivia()?;
        let loc = self.loc();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let two = |a: u8, b: u8| c == a && self.peek_at(1) == Some(b);
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            let mut s = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' {
                    s.push(c as char);
                    self.bump();
                } else {
                    break;
                }
            }
            match Keyword::from_str(&s) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(s),
            }
        } else if c.is_ascii_digit() || c == b'\'' {
            self.number()?
        } else if c == b'`' {
            return Err(self.error(loc, "compiler directives are not supported"));
        } else {
            let (kind, len) = if two(b'=', b'=') {
                if self.peek_at(2) == Some(b'=') {
                    return Err(self.error(loc, "`===` is not supported in two-state logic"));
                }
                (TokenKind::EqEq, 2)
            } else if two(b'!', b'=') {
                if self.peek_at(2) == Some(b'=') {
                    return Err(self.error(loc, "`!==` is not supported in two-state logic"));
                }
                (TokenKind::NotEq, 2)
            } else if two(b'<', b'=') {
                (TokenKind::Le, 2)
            } else if two(b'>', b'=') {
                (TokenKind::Ge, 2)
            } else if two(b'<', b'<') {
                (TokenKind::Shl, 2)
            } else if two(b'>', b'>') {
                (TokenKind::Shr, 2)
            } else if two(b'&', b'&') {
                (TokenKind::AndAnd, 2)
            } else if two(b'|', b'|') {
                (TokenKind::OrOr, 2)
            } else {
                let k = match c {
                    b'(' => TokenKind::LParen,
                    b')' => TokenKind::RParen,
                    b'[' => TokenKind::LBracket,
                    b']' => TokenKind::RBracket,
                    b'{' => TokenKind::LBrace,
                    b'}' => TokenKind::RBrace,
                    b';' => TokenKind::Semi,
                    b':' => TokenKind::Colon,
                    b',' => TokenKind::Comma,
                    b'@' => TokenKind::At,
                    b'*' => TokenKind::Star,
                    b'?' => TokenKind::Question,
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'/' => TokenKind::Slash,
                    b'%' => TokenKind::Percent,
                    b'&' => TokenKind::Amp,
                    b'|' => TokenKind::Pipe,
                    b'^' => TokenKind::Caret,
                    b'~' => TokenKind::Tilde,
                    b'!' => TokenKind::Bang,
                    b'=' => TokenKind::Assign,
                    b'<' => TokenKind::Lt,
                    b'>' => TokenKind::Gt,
                    _ => {
                        let ch = std::str::from_utf8(&self.src[self.pos..])
                            .ok()
                            .and_then(|s| s.chars().next())
                            .unwrap_or('?');
                        return Err(self.error(loc, format!("illegal character `{ch}`")));
                    }
                };
                (k, 1)
            };
            for _ in 0..len {
                self.bump();
            }
            kind
        };
        Ok(Some(Token { kind, loc }))
    }
}

/// Splits `source` into tokens. Whitespace and comments are dropped.
pub fn tokenize(file: &str, source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        file: Arc::from(file),
    };
    let mut out = Vec::new();
    while let Some(t) = lx.next_token()? {
        out.push(t);
    }
    Ok(out)
}
