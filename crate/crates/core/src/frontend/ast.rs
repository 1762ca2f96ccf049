// SPDX-License-Identifier: Apache-2.0

//! Syntax tree for the supported Verilog subset. Every node carries the
//! location of its first token.

use super::SourceLoc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleAst {
    pub name: String,
    pub loc: SourceLoc,
    pub ports: Vec<PortDecl>,
    pub nets: Vec<NetDecl>,
    pub items: Vec<Item>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub direction: Direction,
    pub width: u32,
    pub loc: SourceLoc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NetKind {
    Wire,
    Reg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetDecl {
    pub name: String,
    pub kind: NetKind,
    pub width: u32,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    ContinuousAssign(ContinuousAssign),
    Always(AlwaysBlock),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuousAssign {
    pub lhs: LValue,
    pub rhs: Expr,
    pub loc: SourceLoc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Edge {
    Pos,
    Neg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sensitivity {
    /// `@*` or `@(*)`.
    Star,
    Level(Vec<(String, SourceLoc)>),
    Edges(Vec<(Edge, String, SourceLoc)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlwaysBlock {
    pub sensitivity: Sensitivity,
    pub body: Stmt,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Block(Vec<Stmt>),
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    Case {
        subject: Expr,
        arms: Vec<CaseArm>,
        default: Option<Box<Stmt>>,
    },
    BlockingAssign {
        lhs: LValue,
        rhs: Expr,
    },
    NonblockingAssign {
        lhs: LValue,
        rhs: Expr,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseArm {
    pub labels: Vec<Expr>,
    pub body: Stmt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LValue {
    pub kind: LValueKind,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LValueKind {
    Whole(String),
    Bit(String, Box<Expr>),
    Part(String, u32, u32),
    Concat(Vec<LValue>),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    /// `~`
    Not,
    /// `!`
    LogNot,
    /// unary `-`
    Neg,
    RedAnd,
    RedOr,
    RedXor,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "~",
            UnaryOp::LogNot => "!",
            UnaryOp::Neg => "-",
            UnaryOp::RedAnd => "&",
            UnaryOp::RedOr => "|",
            UnaryOp::RedXor => "^",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogAnd,
    LogOr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Mod => "%",
            And => "&",
            Or => "|",
            Xor => "^",
            Shl => "<<",
            Shr => ">>",
            Eq => "==",
            Ne => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            LogAnd => "&&",
            LogOr => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        use BinaryOp::*;
        match self {
            Mul | Div | Mod => 10,
            Add | Sub => 9,
            Shl | Shr => 8,
            Lt | Le | Gt | Ge => 7,
            Eq | Ne => 6,
            And => 5,
            Xor => 4,
            Or => 3,
            LogAnd => 2,
            LogOr => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Const {
        width: u32,
        value: u128,
        sized: bool,
    },
    Ref(String),
    BitSelect(String, Box<Expr>),
    PartSelect(String, u32, u32),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
}

/// Structural comparison that ignores every source location.
pub trait StripLocs {
    fn strip_locs(&self) -> Self;
}

fn blank() -> SourceLoc {
    SourceLoc::default()
}

impl StripLocs for ModuleAst {
    fn strip_locs(&self) -> Self {
        ModuleAst {
            name: self.name.clone(),
            loc: blank(),
            ports: self
                .ports
                .iter()
                .map(|p| PortDecl {
                    loc: blank(),
                    ..p.clone()
                })
                .collect(),
            nets: self
                .nets
                .iter()
                .map(|n| NetDecl {
                    loc: blank(),
                    ..n.clone()
                })
                .collect(),
            items: self
                .items
                .iter()
                .map(|i| match i {
                    Item::ContinuousAssign(a) => Item::ContinuousAssign(ContinuousAssign {
                        lhs: a.lhs.strip_locs(),
                        rhs: a.rhs.strip_locs(),
                        loc: blank(),
                    }),
                    Item::Always(b) => Item::Always(AlwaysBlock {
                        sensitivity: match &b.sensitivity {
                            Sensitivity::Star => Sensitivity::Star,
                            Sensitivity::Level(v) => Sensitivity::Level(
                                v.iter().map(|(n, _)| (n.clone(), blank())).collect(),
                            ),
                            Sensitivity::Edges(v) => Sensitivity::Edges(
                                v.iter().map(|(e, n, _)| (*e, n.clone(), blank())).collect(),
                            ),
                        },
                        body: b.body.strip_locs(),
                        loc: blank(),
                    }),
                })
                .collect(),
        }
    }
}

impl StripLocs for Stmt {
    fn strip_locs(&self) -> Self {
        let kind = match &self.kind {
            StmtKind::Block(v) => StmtKind::Block(v.iter().map(|s| s.strip_locs()).collect()),
            StmtKind::If { cond, then, els } => StmtKind::If {
                cond: cond.strip_locs(),
                then: Box::new(then.strip_locs()),
                els: els.as_ref().map(|e| Box::new(e.strip_locs())),
            },
            StmtKind::Case {
                subject,
                arms,
                default,
            } => StmtKind::Case {
                subject: subject.strip_locs(),
                arms: arms
                    .iter()
                    .map(|a| CaseArm {
                        labels: a.labels.iter().map(|l| l.strip_locs()).collect(),
                        body: a.body.strip_locs(),
                    })
                    .collect(),
                default: default.as_ref().map(|d| Box::new(d.strip_locs())),
            },
            StmtKind::BlockingAssign { lhs, rhs } => StmtKind::BlockingAssign {
                lhs: lhs.strip_locs(),
                rhs: rhs.strip_locs(),
            },
            StmtKind::NonblockingAssign { lhs, rhs } => StmtKind::NonblockingAssign {
                lhs: lhs.strip_locs(),
                rhs: rhs.strip_locs(),
            },
        };
        Stmt { kind, loc: blank() }
    }
}

impl StripLocs for LValue {
    fn strip_locs(&self) -> Self {
        let kind = match &self.kind {
            LValueKind::Whole(n) => LValueKind::Whole(n.clone()),
            LValueKind::Bit(n, i) => LValueKind::Bit(n.clone(), Box::new(i.strip_locs())),
            LValueKind::Part(n, h, l) => LValueKind::Part(n.clone(), *h, *l),
            LValueKind::Concat(v) => LValueKind::Concat(v.iter().map(|l| l.strip_locs()).collect()),
        };
        LValue { kind, loc: blank() }
    }
}

impl StripLocs for Expr {
    fn strip_locs(&self) -> Self {
        let kind = match &self.kind {
            ExprKind::Const { .. } | ExprKind::Ref(_) | ExprKind::PartSelect(..) => {
                self.kind.clone()
            }
            ExprKind::BitSelect(n, i) => ExprKind::BitSelect(n.clone(), Box::new(i.strip_locs())),
            ExprKind::Unary(op, a) => ExprKind::Unary(*op, Box::new(a.strip_locs())),
            ExprKind::Binary(op, a, b) => {
                ExprKind::Binary(*op, Box::new(a.strip_locs()), Box::new(b.strip_locs()))
            }
            ExprKind::Concat(v) => ExprKind::Concat(v.iter().map(|e| e.strip_locs()).collect()),
            ExprKind::Ternary(c, t, e) => ExprKind::Ternary(
                Box::new(c.strip_locs()),
                Box::new(t.strip_locs()),
                Box::new(e.strip_locs()),
            ),
        };
        Expr { kind, loc: blank() }
    }
}
