// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{Keyword, Token, TokenKind};
use super::{FrontendError, SourceLoc};

type PResult<T> = Result<T, FrontendError>;

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

/// Header-style declaration collected from the module body.
struct BodyPortDecl {
    direction: Direction,
    width: u32,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a TokenKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, off: usize) -> Option<&'a TokenKind> {
        self.toks.get(self.pos + off).map(|t| &t.kind)
    }

    fn loc(&self) -> SourceLoc {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(t) => t.loc.clone(),
            None => SourceLoc::default(),
        }
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let found = match self.peek() {
            Some(k) => k.to_string(),
            None => "end of input".to_string(),
        };
        Err(FrontendError::Parse {
            loc: self.loc(),
            expected: expected.into(),
            found,
        })
    }

    fn error_at<T>(
        &self,
        loc: SourceLoc,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> PResult<T> {
        Err(FrontendError::Parse {
            loc,
            expected: expected.into(),
            found: found.into(),
        })
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        self.eat(&TokenKind::Keyword(kw))
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            self.error(kind.to_string())
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<()> {
        self.expect(TokenKind::Keyword(kw))
    }

    fn ident(&mut self) -> PResult<(String, SourceLoc)> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let loc = self.loc();
                self.bump();
                Ok((name.clone(), loc))
            }
            _ => self.error("identifier"),
        }
    }

    fn constant(&mut self) -> PResult<u128> {
        match self.peek() {
            Some(TokenKind::Const { value, .. }) => {
                self.bump();
                Ok(*value)
            }
            _ => self.error("constant"),
        }
    }

    fn reject_unsupported(&self) -> PResult<()> {
        if let Some(TokenKind::Keyword(k)) = self.peek() {
            let what = match k {
                Keyword::Signed => "unsigned declaration (`signed` is not supported)",
                Keyword::Casex | Keyword::Casez => "`case` (casex/casez are not supported)",
                Keyword::Initial => "module item (`initial` is not supported)",
                Keyword::Parameter | Keyword::Localparam => {
                    "module item (parameters are not supported)"
                }
                Keyword::Generate => "module item (generate blocks are not supported)",
                Keyword::Integer => "module item (`integer` is not supported)",
                Keyword::Inout => "`input` or `output` (`inout` is not supported)",
                _ => return Ok(()),
            };
            return self.error(what);
        }
        Ok(())
    }

    /// Optional `[N-1:0]` range; absent means one bit.
    fn range(&mut self) -> PResult<u32> {
        if self.peek() != Some(&TokenKind::LBracket) {
            return Ok(1);
        }
        let loc = self.loc();
        self.bump();
        let msb = self.constant()?;
        self.expect(TokenKind::Colon)?;
        let lsb_loc = self.loc();
        let lsb = self.constant()?;
        self.expect(TokenKind::RBracket)?;
        if lsb != 0 {
            return self.error_at(lsb_loc, "range of the form [N-1:0]", format!("lsb {lsb}"));
        }
        if msb >= crate::bv::MAX_WIDTH as u128 {
            return self.error_at(loc, "range width at most 128 bits", format!("[{msb}:0]"));
        }
        Ok(msb as u32 + 1)
    }

    fn module(&mut self) -> PResult<ModuleAst> {
        let loc = self.loc();
        self.expect_kw(Keyword::Module)?;
        let (name, _) = self.ident()?;
        let mut ports: Vec<PortDecl> = Vec::new();
        let mut nets: Vec<NetDecl> = Vec::new();
        let mut header_names: Vec<(String, SourceLoc)> = Vec::new();
        let mut ansi = false;
        if self.eat(&TokenKind::LParen) {
            if self.peek() != Some(&TokenKind::RParen) {
                self.reject_unsupported()?;
                match self.peek() {
                    Some(TokenKind::Keyword(Keyword::Input | Keyword::Output)) => {
                        ansi = true;
                        self.ansi_ports(&mut ports, &mut nets)?;
                    }
                    Some(TokenKind::Ident(_)) => loop {
                        header_names.push(self.ident()?);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    },
                    _ => return self.error("port declaration or port name"),
                }
            }
            self.expect(TokenKind::RParen)?;
        }
        self.expect(TokenKind::Semi)?;

        let mut body_ports: HashMap<String, BodyPortDecl> = HashMap::new();
        let mut items = Vec::new();
        loop {
            self.reject_unsupported()?;
            match self.peek() {
                Some(TokenKind::Keyword(Keyword::Endmodule)) => {
                    self.bump();
                    break;
                }
                Some(TokenKind::Keyword(kw @ (Keyword::Input | Keyword::Output))) => {
                    let kw = *kw;
                    if ansi {
                        return self.error("module item (ports already declared in the header)");
                    }
                    self.bump();
                    let direction = if kw == Keyword::Input {
                        Direction::Input
                    } else {
                        Direction::Output
                    };
                    let net_kind = if self.eat_kw(Keyword::Reg) {
                        Some(NetKind::Reg)
                    } else if self.eat_kw(Keyword::Wire) {
                        Some(NetKind::Wire)
                    } else {
                        None
                    };
                    self.reject_unsupported()?;
                    let width = self.range()?;
                    loop {
                        let (pname, ploc) = self.ident()?;
                        if !header_names.iter().any(|(n, _)| n == &pname) {
                            return self.error_at(
                                ploc,
                                "a name from the module port list",
                                format!("identifier `{pname}`"),
                            );
                        }
                        if body_ports.contains_key(&pname) {
                            return self.error_at(
                                ploc,
                                "a single direction declaration per port",
                                format!("duplicate declaration of `{pname}`"),
                            );
                        }
                        if let Some(kind) = net_kind {
                            nets.push(NetDecl {
                                name: pname.clone(),
                                kind,
                                width,
                                loc: ploc.clone(),
                            });
                        }
                        body_ports.insert(pname, BodyPortDecl { direction, width });
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::Semi)?;
                }
                Some(TokenKind::Keyword(Keyword::Wire | Keyword::Reg)) => {
                    let kind = if self.peek() == Some(&TokenKind::Keyword(Keyword::Wire)) {
                        NetKind::Wire
                    } else {
                        NetKind::Reg
                    };
                    self.bump();
                    self.reject_unsupported()?;
                    let width = self.range()?;
                    loop {
                        let (nname, nloc) = self.ident()?;
                        nets.push(NetDecl {
                            name: nname.clone(),
                            kind,
                            width,
                            loc: nloc.clone(),
                        });
                        if kind == NetKind::Wire && self.peek() == Some(&TokenKind::Assign) {
                            self.bump();
                            let rhs = self.expr()?;
                            items.push(Item::ContinuousAssign(ContinuousAssign {
                                lhs: LValue {
                                    kind: LValueKind::Whole(nname),
                                    loc: nloc.clone(),
                                },
                                rhs,
                                loc: nloc,
                            }));
                        }
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::Semi)?;
                }
                Some(TokenKind::Keyword(Keyword::Assign)) => {
                    self.bump();
                    loop {
                        let aloc = self.loc();
                        let lhs = self.lvalue()?;
                        self.expect(TokenKind::Assign)?;
                        let rhs = self.expr()?;
                        items.push(Item::ContinuousAssign(ContinuousAssign {
                            lhs,
                            rhs,
                            loc: aloc,
                        }));
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::Semi)?;
                }
                Some(TokenKind::Keyword(Keyword::Always)) => {
                    let aloc = self.loc();
                    self.bump();
                    let sensitivity = self.sensitivity()?;
                    let body = self.stmt()?;
                    items.push(Item::Always(AlwaysBlock {
                        sensitivity,
                        body,
                        loc: aloc,
                    }));
                }
                Some(TokenKind::Keyword(Keyword::Module)) => {
                    return self.error("`endmodule` (nested modules are not supported)");
                }
                _ => return self.error("module item"),
            }
        }
        if self.peek().is_some() {
            return self.error("end of input (one module per file)");
        }

        if !ansi {
            for (pname, ploc) in &header_names {
                let Some(decl) = body_ports.get(pname) else {
                    return self.error_at(
                        ploc.clone(),
                        format!("an input or output declaration for port `{pname}`"),
                        "none",
                    );
                };
                ports.push(PortDecl {
                    name: pname.clone(),
                    direction: decl.direction,
                    width: decl.width,
                    loc: ploc.clone(),
                });
            }
        }

        let mut seen = HashSet::new();
        for p in &ports {
            if !seen.insert(p.name.as_str()) {
                return self.error_at(
                    p.loc.clone(),
                    "unique port names",
                    format!("duplicate port `{}`", p.name),
                );
            }
        }
        let mut seen_nets = HashSet::new();
        for n in &nets {
            if !seen_nets.insert(n.name.as_str()) {
                return self.error_at(
                    n.loc.clone(),
                    "unique net names",
                    format!("duplicate net `{}`", n.name),
                );
            }
            if let Some(p) = ports.iter().find(|p| p.name == n.name) {
                if p.width != n.width {
                    return self.error_at(
                        n.loc.clone(),
                        format!("width {} matching port `{}`", p.width, p.name),
                        format!("width {}", n.width),
                    );
                }
            }
        }

        Ok(ModuleAst {
            name,
            loc,
            ports,
            nets,
            items,
        })
    }

    fn ansi_ports(&mut self, ports: &mut Vec<PortDecl>, nets: &mut Vec<NetDecl>) -> PResult<()> {
        let mut current: Option<(Direction, Option<NetKind>, u32)> = None;
        loop {
            self.reject_unsupported()?;
            let group = match self.peek() {
                Some(TokenKind::Keyword(kw @ (Keyword::Input | Keyword::Output))) => {
                    let direction = if *kw == Keyword::Input {
                        Direction::Input
                    } else {
                        Direction::Output
                    };
                    self.bump();
                    let kind = if self.eat_kw(Keyword::Reg) {
                        Some(NetKind::Reg)
                    } else {
                        self.eat_kw(Keyword::Wire);
                        None
                    };
                    self.reject_unsupported()?;
                    let width = self.range()?;
                    (direction, kind, width)
                }
                Some(TokenKind::Ident(_)) => match current {
                    Some(g) => g,
                    None => return self.error("`input` or `output`"),
                },
                _ => return self.error("port declaration"),
            };
            current = Some(group);
            let (name, loc) = self.ident()?;
            let (direction, kind, width) = group;
            if let Some(kind) = kind {
                nets.push(NetDecl {
                    name: name.clone(),
                    kind,
                    width,
                    loc: loc.clone(),
                });
            }
            ports.push(PortDecl {
                name,
                direction,
                width,
                loc,
            });
            if !self.eat(&TokenKind::Comma) {
                return Ok(());
            }
        }
    }

    fn sensitivity(&mut self) -> PResult<Sensitivity> {
        self.expect(TokenKind::At)?;
        if self.eat(&TokenKind::Star) {
            return Ok(Sensitivity::Star);
        }
        self.expect(TokenKind::LParen)?;
        if self.eat(&TokenKind::Star) {
            self.expect(TokenKind::RParen)?;
            return Ok(Sensitivity::Star);
        }
        let mut level = Vec::new();
        let mut edges = Vec::new();
        loop {
            let edge = if self.eat_kw(Keyword::Posedge) {
                Some(Edge::Pos)
            } else if self.eat_kw(Keyword::Negedge) {
                Some(Edge::Neg)
            } else {
                None
            };
            let (name, loc) = self.ident()?;
            match edge {
                Some(e) => {
                    if !level.is_empty() {
                        return self.error_at(
                            loc,
                            "a level-sensitive signal (edge and level events cannot mix)",
                            format!("edge event on `{name}`"),
                        );
                    }
                    edges.push((e, name, loc));
                }
                None => {
                    if !edges.is_empty() {
                        return self.error_at(
                            loc,
                            "an edge event (edge and level events cannot mix)",
                            format!("identifier `{name}`"),
                        );
                    }
                    level.push((name, loc));
                }
            }
            if !(self.eat_kw(Keyword::Or) || self.eat(&TokenKind::Comma)) {
                break;
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(if edges.is_empty() {
            Sensitivity::Level(level)
        } else {
            Sensitivity::Edges(edges)
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        self.reject_unsupported()?;
        let kind = match self.peek() {
            Some(TokenKind::Keyword(Keyword::Begin)) => {
                self.bump();
                if self.eat(&TokenKind::Colon) {
                    self.ident()?;
                }
                let mut body = Vec::new();
                while !self.eat_kw(Keyword::End) {
                    if self.peek().is_none() {
                        return self.error("`end`");
                    }
                    body.push(self.stmt()?);
                }
                StmtKind::Block(body)
            }
            Some(TokenKind::Semi) => {
                self.bump();
                StmtKind::Block(Vec::new())
            }
            Some(TokenKind::Keyword(Keyword::If)) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let then = Box::new(self.stmt()?);
                let els = if self.eat_kw(Keyword::Else) {
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                StmtKind::If { cond, then, els }
            }
            Some(TokenKind::Keyword(Keyword::Case)) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let subject = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let mut arms = Vec::new();
                let mut default = None;
                let mut seen: HashSet<u128> = HashSet::new();
                while !self.eat_kw(Keyword::Endcase) {
                    if self.peek().is_none() {
                        return self.error("`endcase`");
                    }
                    if self.peek() == Some(&TokenKind::Keyword(Keyword::Default)) {
                        if default.is_some() {
                            return self.error("a single `default` arm");
                        }
                        self.bump();
                        self.eat(&TokenKind::Colon);
                        default = Some(Box::new(self.stmt()?));
                        continue;
                    }
                    let mut labels = Vec::new();
                    loop {
                        let lloc = self.loc();
                        let label = self.expr()?;
                        let ExprKind::Const { value, .. } = label.kind else {
                            return self.error_at(
                                lloc,
                                "a constant case label",
                                "a non-constant expression",
                            );
                        };
                        if !seen.insert(value) {
                            return self.error_at(
                                lloc,
                                "distinct case labels",
                                format!("duplicate label {value}"),
                            );
                        }
                        labels.push(label);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::Colon)?;
                    let body = self.stmt()?;
                    arms.push(CaseArm { labels, body });
                }
                StmtKind::Case {
                    subject,
                    arms,
                    default,
                }
            }
            Some(TokenKind::Ident(_) | TokenKind::LBrace) => {
                let lhs = self.lvalue()?;
                let nonblocking = match self.peek() {
                    Some(TokenKind::Assign) => false,
                    Some(TokenKind::Le) => true,
                    _ => return self.error("`=` or `<=`"),
                };
                self.bump();
                let rhs = self.expr()?;
                self.expect(TokenKind::Semi)?;
                if nonblocking {
                    StmtKind::NonblockingAssign { lhs, rhs }
                } else {
                    StmtKind::BlockingAssign { lhs, rhs }
                }
            }
            _ => return self.error("statement"),
        };
        Ok(Stmt { kind, loc })
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        let loc = self.loc();
        if self.eat(&TokenKind::LBrace) {
            let mut parts = Vec::new();
            loop {
                parts.push(self.lvalue()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::RBrace)?;
            return Ok(LValue {
                kind: LValueKind::Concat(parts),
                loc,
            });
        }
        let (name, _) = self.ident()?;
        let kind = match self.select()? {
            None => LValueKind::Whole(name),
            Some(Select::Bit(e)) => LValueKind::Bit(name, Box::new(e)),
            Some(Select::Part(h, l)) => LValueKind::Part(name, h, l),
        };
        Ok(LValue { kind, loc })
    }

    fn select(&mut self) -> PResult<Option<Select>> {
        if !self.eat(&TokenKind::LBracket) {
            return Ok(None);
        }
        let index = self.expr()?;
        if self.eat(&TokenKind::Colon) {
            let ExprKind::Const { value: hi, .. } = index.kind else {
                return self.error_at(
                    index.loc,
                    "a constant part-select bound",
                    "a non-constant expression",
                );
            };
            let lo_loc = self.loc();
            let lo = self.constant()?;
            self.expect(TokenKind::RBracket)?;
            if hi < lo {
                return self.error_at(
                    lo_loc,
                    "part select with msb >= lsb",
                    format!("[{hi}:{lo}]"),
                );
            }
            if hi >= crate::bv::MAX_WIDTH as u128 {
                return self.error_at(
                    lo_loc,
                    "part select within 128 bits",
                    format!("[{hi}:{lo}]"),
                );
            }
            return Ok(Some(Select::Part(hi as u32, lo as u32)));
        }
        self.expect(TokenKind::RBracket)?;
        Ok(Some(Select::Bit(index)))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.peek() == Some(&TokenKind::Question) {
            let loc = cond.loc.clone();
            self.bump();
            let then = self.expr()?;
            self.expect(TokenKind::Colon)?;
            let els = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Ternary(Box::new(cond), Box::new(then), Box::new(els)),
                loc,
            });
        }
        Ok(cond)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        use BinaryOp::*;
        Some(match self.peek()? {
            TokenKind::Star => Mul,
            TokenKind::Slash => Div,
            TokenKind::Percent => Mod,
            TokenKind::Plus => Add,
            TokenKind::Minus => Sub,
            TokenKind::Shl => Shl,
            TokenKind::Shr => Shr,
            TokenKind::Lt => Lt,
            TokenKind::Le => Le,
            TokenKind::Gt => Gt,
            TokenKind::Ge => Ge,
            TokenKind::EqEq => Eq,
            TokenKind::NotEq => Ne,
            TokenKind::Amp => And,
            TokenKind::Caret => Xor,
            TokenKind::Pipe => Or,
            TokenKind::AndAnd => LogAnd,
            TokenKind::OrOr => LogOr,
            _ => return None,
        })
    }

    /// Precedence climbing over left-associative binary operators.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let loc = lhs.loc.clone();
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                loc,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let op = match self.peek() {
            Some(TokenKind::Tilde) => Some(UnaryOp::Not),
            Some(TokenKind::Bang) => Some(UnaryOp::LogNot),
            Some(TokenKind::Minus) => Some(UnaryOp::Neg),
            Some(TokenKind::Amp) => Some(UnaryOp::RedAnd),
            Some(TokenKind::Pipe) => Some(UnaryOp::RedOr),
            Some(TokenKind::Caret) => Some(UnaryOp::RedXor),
            Some(TokenKind::Plus) => {
                self.bump();
                return self.unary();
            }
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Unary(op, Box::new(operand)),
                loc,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let kind = match self.peek() {
            Some(TokenKind::Const {
                width,
                value,
                sized,
            }) => {
                self.bump();
                ExprKind::Const {
                    width: *width,
                    value: *value,
                    sized: *sized,
                }
            }
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.bump();
                match self.select()? {
                    None => ExprKind::Ref(name),
                    Some(Select::Bit(e)) => ExprKind::BitSelect(name, Box::new(e)),
                    Some(Select::Part(h, l)) => ExprKind::PartSelect(name, h, l),
                }
            }
            Some(TokenKind::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                return Ok(e);
            }
            Some(TokenKind::LBrace) => {
                self.bump();
                // Replication `{n{a, b}}` desugars into a flat concatenation.
                if let (Some(TokenKind::Const { value, .. }), Some(TokenKind::LBrace)) =
                    (self.peek(), self.peek_at(1))
                {
                    let count = *value;
                    let cloc = self.loc();
                    self.bump();
                    self.bump();
                    let mut inner = Vec::new();
                    loop {
                        inner.push(self.expr()?);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::RBrace)?;
                    self.expect(TokenKind::RBrace)?;
                    if count == 0 || count > crate::bv::MAX_WIDTH as u128 {
                        return self.error_at(
                            cloc,
                            "replication count in 1..=128",
                            format!("{count}"),
                        );
                    }
                    let mut parts = Vec::new();
                    for _ in 0..count {
                        parts.extend(inner.iter().cloned());
                    }
                    ExprKind::Concat(parts)
                } else {
                    let mut parts = Vec::new();
                    loop {
                        parts.push(self.expr()?);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::RBrace)?;
                    ExprKind::Concat(parts)
                }
            }
            _ => return self.error("expression"),
        };
        Ok(Expr { kind, loc })
    }
}

enum Select {
    Bit(Expr),
    Part(u32, u32),
}

/// Parses exactly one `module ... endmodule` from `tokens`.
pub fn parse_module(tokens: &[Token]) -> Result<ModuleAst, FrontendError> {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
    };
    p.module()
}
