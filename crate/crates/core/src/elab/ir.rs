// SPDX-License-Identifier: Apache-2.0

//! Executable RTL IR. Every expression carries its computed width; operand
//! widening and assignment resizing are explicit nodes, so evaluators never
//! apply implicit width rules.

use std::collections::{BTreeSet, HashMap};

use crate::frontend::SourceLoc;

pub use crate::frontend::ast::Edge;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignalId(pub u32);

impl SignalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtId(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchId(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SignalKind {
    Input,
    Output,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signal {
    pub id: SignalId,
    pub name: String,
    pub width: u32,
    pub kind: SignalKind,
    pub loc: SourceLoc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    LogNot,
    RedAnd,
    RedOr,
    RedXor,
}

pub use crate::bv::BinaryOp;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub width: u32,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Const(u128),
    Signal(SignalId),
    Unary(UnaryOp, Box<Expr>),
    /// Operands are already widened as the operator requires. For `Div` and
    /// `Mod` the node width may be narrower than the operands; the result is
    /// computed at operand width and then truncated.
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// First element supplies the most significant bits.
    Concat(Vec<Expr>),
    /// Condition is any width; nonzero selects the first arm.
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Extract {
        hi: u32,
        lo: u32,
        arg: Box<Expr>,
    },
    ZeroExtend(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LValue {
    Whole(SignalId),
    Slice {
        signal: SignalId,
        hi: u32,
        lo: u32,
    },
    /// First element receives the most significant bits.
    Concat(Vec<LValue>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseArm {
    /// Label values at the comparison width (the subject's width).
    pub labels: Vec<u128>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    /// `rhs` is already resized to the target width.
    Assign {
        id: StmtId,
        lhs: LValue,
        rhs: Expr,
        nonblocking: bool,
    },
    /// Arm 0 is `then`, arm 1 is `else` (possibly empty).
    If {
        branch: BranchId,
        cond: Expr,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
    },
    /// Arms `0..arms.len()` are the labelled arms in order; arm `arms.len()`
    /// is the default (possibly empty). The subject is widened to cover
    /// every label.
    Case {
        branch: BranchId,
        subject: Expr,
        arms: Vec<CaseArm>,
        default: Vec<Stmt>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcessKind {
    Combinational { reads: BTreeSet<SignalId> },
    Clocked { edge: Edge, clock: SignalId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Process {
    pub id: usize,
    pub kind: ProcessKind,
    pub body: Vec<Stmt>,
    pub writes: BTreeSet<SignalId>,
    pub loc: SourceLoc,
}

impl Process {
    pub fn is_clocked(&self) -> bool {
        matches!(self.kind, ProcessKind::Clocked { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StmtInfo {
    pub id: StmtId,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchInfo {
    pub id: BranchId,
    pub loc: SourceLoc,
    /// One location per arm; an implicit `else`/`default` uses the branch's own location.
    pub arm_locs: Vec<SourceLoc>,
}

impl BranchInfo {
    pub fn arms(&self) -> usize {
        self.arm_locs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub loc: SourceLoc,
    pub message: String,
}

/// One elaborated top module. Combinational processes come first, in
/// dependency order; clocked processes follow in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RtlDesign {
    pub name: String,
    pub signals: Vec<Signal>,
    pub processes: Vec<Process>,
    pub num_combinational: usize,
    pub stmt_table: Vec<StmtInfo>,
    pub branch_table: Vec<BranchInfo>,
    pub warnings: Vec<Warning>,
    pub(crate) by_name: HashMap<String, SignalId>,
}

impl RtlDesign {
    pub fn signal(&self, id: SignalId) -> &Signal {
        &self.signals[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<SignalId> {
        self.by_name.get(name).copied()
    }

    pub fn combinational(&self) -> &[Process] {
        &self.processes[..self.num_combinational]
    }

    pub fn clocked(&self) -> &[Process] {
        &self.processes[self.num_combinational..]
    }

    /// The clock shared by all clocked processes, if any.
    pub fn clock(&self) -> Option<SignalId> {
        self.clocked().iter().find_map(|p| match p.kind {
            ProcessKind::Clocked { clock, .. } => Some(clock),
            _ => None,
        })
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Signal> {
        self.signals.iter().filter(|s| s.kind == SignalKind::Input)
    }

    pub fn total_branch_arms(&self) -> usize {
        self.branch_table.iter().map(|b| b.arms()).sum()
    }
}
