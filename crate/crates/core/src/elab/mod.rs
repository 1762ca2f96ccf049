// SPDX-License-Identifier: Apache-2.0

//! Lowers a parsed module into the executable IR: resolves names, assigns
//! widths, classifies processes, enumerates statements and branch arms, and
//! orders combinational logic by data dependency.

pub mod ir;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::bv::{mask, MAX_WIDTH};
use crate::frontend::ast::{self, Direction, Sensitivity};
use crate::frontend::SourceLoc;
pub use ir::*;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ElabError {
    #[error("{loc}: error: undeclared name `{name}`")]
    Undeclared { loc: SourceLoc, name: String },
    #[error("{loc}: error: `{name}` has unsupported width {width} (must be 1..=128)")]
    BadWidth {
        loc: SourceLoc,
        name: String,
        width: u32,
    },
    #[error("{loc}: error: literal value {value:#x} does not fit in {width} bits")]
    ConstOverflow {
        loc: SourceLoc,
        value: u128,
        width: u32,
    },
    #[error("{loc}: error: multiple drivers for `{name}`")]
    MultipleDrivers { loc: SourceLoc, name: String },
    #[error("{loc}: error: combinational cycle through {}", signals.join(", "))]
    CombinationalCycle {
        loc: SourceLoc,
        signals: Vec<String>,
    },
    #[error("{loc}: error: {detail}")]
    MixedAssign { loc: SourceLoc, detail: String },
    #[error("{loc}: error: assignment to input `{name}`")]
    AssignToInput { loc: SourceLoc, name: String },
    #[error("{loc}: error: {message}")]
    Invalid { loc: SourceLoc, message: String },
}

impl ElabError {
    pub fn loc(&self) -> &SourceLoc {
        match self {
            ElabError::Undeclared { loc, .. }
            | ElabError::BadWidth { loc, .. }
            | ElabError::ConstOverflow { loc, .. }
            | ElabError::MultipleDrivers { loc, .. }
            | ElabError::CombinationalCycle { loc, .. }
            | ElabError::MixedAssign { loc, .. }
            | ElabError::AssignToInput { loc, .. }
            | ElabError::Invalid { loc, .. } => loc,
        }
    }
}

fn invalid(loc: &SourceLoc, message: impl Into<String>) -> ElabError {
    ElabError::Invalid {
        loc: loc.clone(),
        message: message.into(),
    }
}

/// Name resolution and expression typing over a fixed signal table.
struct Scope<'a> {
    signals: &'a [Signal],
    by_name: &'a HashMap<String, SignalId>,
}

impl Scope<'_> {
    fn resolve(&self, name: &str, loc: &SourceLoc) -> Result<&Signal, ElabError> {
        match self.by_name.get(name) {
            Some(id) => Ok(&self.signals[id.index()]),
            None => Err(ElabError::Undeclared {
                loc: loc.clone(),
                name: name.to_string(),
            }),
        }
    }

    fn expr(&self, e: &ast::Expr) -> Result<Expr, ElabError> {
        use ast::ExprKind as K;
        Ok(match &e.kind {
            K::Const { width, value, .. } => {
                if *width == 0 || *width > MAX_WIDTH {
                    return Err(invalid(
                        &e.loc,
                        format!("literal width {width} out of range"),
                    ));
                }
                if *value > mask(*width) {
                    return Err(ElabError::ConstOverflow {
                        loc: e.loc.clone(),
                        value: *value,
                        width: *width,
                    });
                }
                Expr {
                    width: *width,
                    kind: ExprKind::Const(*value),
                }
            }
            K::Ref(name) => {
                let s = self.resolve(name, &e.loc)?;
                signal_expr(s)
            }
            K::BitSelect(name, idx) => {
                let s = self.resolve(name, &e.loc)?;
                let idx = self.expr(idx)?;
                if let ExprKind::Const(i) = idx.kind {
                    if i >= s.width as u128 {
                        return Err(invalid(
                            &e.loc,
                            format!("bit-select {i} out of range for `{}`", s.name),
                        ));
                    }
                    extract(i as u32, i as u32, signal_expr(s))
                } else {
                    // (s >> idx)[0]; an index past the top reads 0.
                    let shifted = Expr {
                        width: s.width,
                        kind: ExprKind::Binary(
                            BinaryOp::Shr,
                            Box::new(signal_expr(s)),
                            Box::new(idx),
                        ),
                    };
                    extract(0, 0, shifted)
                }
            }
            K::PartSelect(name, hi, lo) => {
                let s = self.resolve(name, &e.loc)?;
                check_range(s, *hi, *lo, &e.loc)?;
                extract(*hi, *lo, signal_expr(s))
            }
            K::Unary(op, a) => {
                let a = self.expr(a)?;
                let w = a.width;
                let op = match op {
                    ast::UnaryOp::Neg => {
                        return Ok(binary(BinaryOp::Sub, w, constant(w, 0), a));
                    }
                    ast::UnaryOp::Not => {
                        return Ok(Expr {
                            width: w,
                            kind: ExprKind::Unary(UnaryOp::Not, Box::new(a)),
                        })
                    }
                    ast::UnaryOp::LogNot => UnaryOp::LogNot,
                    ast::UnaryOp::RedAnd => UnaryOp::RedAnd,
                    ast::UnaryOp::RedOr => UnaryOp::RedOr,
                    ast::UnaryOp::RedXor => UnaryOp::RedXor,
                };
                Expr {
                    width: 1,
                    kind: ExprKind::Unary(op, Box::new(a)),
                }
            }
            K::Binary(op, a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                lower_binary(*op, a, b)
            }
            K::Concat(parts) => {
                let parts = parts
                    .iter()
                    .map(|p| self.expr(p))
                    .collect::<Result<Vec<_>, _>>()?;
                let width: u32 = parts.iter().map(|p| p.width).sum();
                if width > MAX_WIDTH {
                    return Err(invalid(
                        &e.loc,
                        format!("concatenation is {width} bits wide (limit {MAX_WIDTH})"),
                    ));
                }
                Expr {
                    width,
                    kind: ExprKind::Concat(parts),
                }
            }
            K::Ternary(c, t, f) => {
                let c = self.expr(c)?;
                let t = self.expr(t)?;
                let f = self.expr(f)?;
                let w = t.width.max(f.width);
                Expr {
                    width: w,
                    kind: ExprKind::Ternary(
                        Box::new(c),
                        Box::new(zext(t, w)),
                        Box::new(zext(f, w)),
                    ),
                }
            }
        })
    }

    fn lvalue(&self, l: &ast::LValue) -> Result<(LValue, u32), ElabError> {
        use ast::LValueKind as K;
        let target = |name: &str| -> Result<&Signal, ElabError> {
            let s = self.resolve(name, &l.loc)?;
            if s.kind == SignalKind::Input {
                return Err(ElabError::AssignToInput {
                    loc: l.loc.clone(),
                    name: s.name.clone(),
                });
            }
            Ok(s)
        };
        match &l.kind {
            K::Whole(name) => {
                let s = target(name)?;
                Ok((LValue::Whole(s.id), s.width))
            }
            K::Bit(name, idx) => {
                let s = target(name)?;
                let idx = self.expr(idx)?;
                let ExprKind::Const(i) = idx.kind else {
                    return Err(invalid(
                        &l.loc,
                        "left-hand bit-select index must be a constant",
                    ));
                };
                if i >= s.width as u128 {
                    return Err(invalid(
                        &l.loc,
                        format!("bit-select {i} out of range for `{}`", s.name),
                    ));
                }
                let i = i as u32;
                Ok((
                    LValue::Slice {
                        signal: s.id,
                        hi: i,
                        lo: i,
                    },
                    1,
                ))
            }
            K::Part(name, hi, lo) => {
                let s = target(name)?;
                check_range(s, *hi, *lo, &l.loc)?;
                Ok((
                    LValue::Slice {
                        signal: s.id,
                        hi: *hi,
                        lo: *lo,
                    },
                    hi - lo + 1,
                ))
            }
            K::Concat(parts) => {
                let mut out = Vec::with_capacity(parts.len());
                let mut width = 0;
                for p in parts {
                    let (lv, w) = self.lvalue(p)?;
                    width += w;
                    out.push(lv);
                }
                if width > MAX_WIDTH {
                    return Err(invalid(
                        &l.loc,
                        format!("concatenation is {width} bits wide (limit {MAX_WIDTH})"),
                    ));
                }
                Ok((LValue::Concat(out), width))
            }
        }
    }
}

fn check_range(s: &Signal, hi: u32, lo: u32, loc: &SourceLoc) -> Result<(), ElabError> {
    if hi < lo || hi >= s.width {
        return Err(invalid(
            loc,
            format!("part-select [{hi}:{lo}] out of range for `{}`", s.name),
        ));
    }
    Ok(())
}

fn signal_expr(s: &Signal) -> Expr {
    Expr {
        width: s.width,
        kind: ExprKind::Signal(s.id),
    }
}

fn constant(width: u32, value: u128) -> Expr {
    Expr {
        width,
        kind: ExprKind::Const(value),
    }
}

fn extract(hi: u32, lo: u32, arg: Expr) -> Expr {
    Expr {
        width: hi - lo + 1,
        kind: ExprKind::Extract {
            hi,
            lo,
            arg: Box::new(arg),
        },
    }
}

fn binary(op: BinaryOp, width: u32, a: Expr, b: Expr) -> Expr {
    Expr {
        width,
        kind: ExprKind::Binary(op, Box::new(a), Box::new(b)),
    }
}

fn zext(e: Expr, width: u32) -> Expr {
    if e.width >= width {
        e
    } else {
        Expr {
            width,
            kind: ExprKind::ZeroExtend(Box::new(e)),
        }
    }
}

/// Truncates or zero-extends to exactly `width`.
fn resize(e: Expr, width: u32) -> Expr {
    if e.width > width {
        extract(width - 1, 0, e)
    } else {
        zext(e, width)
    }
}

fn lower_binary(op: ast::BinaryOp, a: Expr, b: Expr) -> Expr {
    use ast::BinaryOp as A;
    let (wa, wb) = (a.width, b.width);
    let w = wa.max(wb);
    let bv_op = match op {
        A::Add => BinaryOp::Add,
        A::Sub => BinaryOp::Sub,
        A::Mul => BinaryOp::Mul,
        A::Div => BinaryOp::Div,
        A::Mod => BinaryOp::Mod,
        A::And => BinaryOp::And,
        A::Or => BinaryOp::Or,
        A::Xor => BinaryOp::Xor,
        A::Shl => BinaryOp::Shl,
        A::Shr => BinaryOp::Shr,
        A::Eq => BinaryOp::Eq,
        A::Ne => BinaryOp::Ne,
        A::Lt => BinaryOp::Lt,
        A::Le => BinaryOp::Le,
        A::Gt => BinaryOp::Gt,
        A::Ge => BinaryOp::Ge,
        A::LogAnd => BinaryOp::LogAnd,
        A::LogOr => BinaryOp::LogOr,
    };
    match op {
        A::Add | A::Sub | A::Mul | A::And | A::Or | A::Xor => {
            binary(bv_op, w, zext(a, w), zext(b, w))
        }
        // Quotient and remainder never exceed the dividend, so computing at
        // the wider width and keeping the dividend's width is exact.
        A::Div | A::Mod => binary(bv_op, wa, zext(a, w), zext(b, w)),
        A::Shl | A::Shr => binary(bv_op, wa, a, b),
        A::Eq | A::Ne | A::Lt | A::Le | A::Gt | A::Ge => binary(bv_op, 1, zext(a, w), zext(b, w)),
        A::LogAnd | A::LogOr => binary(bv_op, 1, a, b),
    }
}

/// Width of an AST expression resolved against `design`'s signals.
pub fn width_of(expr: &ast::Expr, design: &RtlDesign) -> Result<u32, ElabError> {
    let scope = Scope {
        signals: &design.signals,
        by_name: &design.by_name,
    };
    Ok(scope.expr(expr)?.width)
}

/// Statement/branch numbering in source preorder.
#[derive(Default)]
struct Tables {
    stmts: Vec<StmtInfo>,
    branches: Vec<BranchInfo>,
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum AssignStyle {
    Blocking,
    Nonblocking,
}

fn lower_stmt(
    scope: &Scope<'_>,
    tables: &mut Tables,
    style: AssignStyle,
    s: &ast::Stmt,
    out: &mut Vec<Stmt>,
) -> Result<(), ElabError> {
    use ast::StmtKind as K;
    match &s.kind {
        K::Block(body) => {
            for b in body {
                lower_stmt(scope, tables, style, b, out)?;
            }
        }
        K::BlockingAssign { lhs, rhs } | K::NonblockingAssign { lhs, rhs } => {
            let nonblocking = matches!(s.kind, K::NonblockingAssign { .. });
            match (style, nonblocking) {
                (AssignStyle::Blocking, true) => {
                    return Err(ElabError::MixedAssign {
                        loc: s.loc.clone(),
                        detail: "nonblocking assignment in a combinational block".into(),
                    })
                }
                (AssignStyle::Nonblocking, false) => {
                    return Err(ElabError::MixedAssign {
                        loc: s.loc.clone(),
                        detail: "blocking assignment in a clocked block".into(),
                    })
                }
                _ => {}
            }
            let (lhs, w) = scope.lvalue(lhs)?;
            let rhs = resize(scope.expr(rhs)?, w);
            let id = StmtId(tables.stmts.len() as u32);
            tables.stmts.push(StmtInfo {
                id,
                loc: s.loc.clone(),
            });
            out.push(Stmt::Assign {
                id,
                lhs,
                rhs,
                nonblocking,
            });
        }
        K::If { cond, then, els } => {
            let cond = scope.expr(cond)?;
            let branch = BranchId(tables.branches.len() as u32);
            tables.branches.push(BranchInfo {
                id: branch,
                loc: s.loc.clone(),
                arm_locs: vec![
                    then.loc.clone(),
                    els.as_ref().map_or(&s.loc, |e| &e.loc).clone(),
                ],
            });
            let mut t = Vec::new();
            lower_stmt(scope, tables, style, then, &mut t)?;
            let mut e = Vec::new();
            if let Some(els) = els {
                lower_stmt(scope, tables, style, els, &mut e)?;
            }
            out.push(Stmt::If {
                branch,
                cond,
                then: t,
                els: e,
            });
        }
        K::Case {
            subject,
            arms,
            default,
        } => {
            let subject = scope.expr(subject)?;
            let mut labels = Vec::with_capacity(arms.len());
            for arm in arms {
                let mut vals = Vec::with_capacity(arm.labels.len());
                for l in &arm.labels {
                    let l = scope.expr(l)?;
                    let ExprKind::Const(v) = l.kind else {
                        return Err(invalid(&s.loc, "case label must be a constant"));
                    };
                    vals.push((v, l.width));
                }
                labels.push(vals);
            }
            let cmp_width = labels
                .iter()
                .flatten()
                .map(|&(_, w)| w)
                .fold(subject.width, u32::max);
            let branch = BranchId(tables.branches.len() as u32);
            let mut arm_locs: Vec<SourceLoc> = arms
                .iter()
                .map(|a| a.labels.first().map_or(&a.body.loc, |l| &l.loc).clone())
                .collect();
            arm_locs.push(default.as_ref().map_or(&s.loc, |d| &d.loc).clone());
            tables.branches.push(BranchInfo {
                id: branch,
                loc: s.loc.clone(),
                arm_locs,
            });
            let mut ir_arms = Vec::with_capacity(arms.len());
            for (arm, vals) in arms.iter().zip(labels) {
                let mut body = Vec::new();
                lower_stmt(scope, tables, style, &arm.body, &mut body)?;
                ir_arms.push(CaseArm {
                    labels: vals.into_iter().map(|(v, _)| v).collect(),
                    body,
                });
            }
            let mut d = Vec::new();
            if let Some(default) = default {
                lower_stmt(scope, tables, style, default, &mut d)?;
            }
            out.push(Stmt::Case {
                branch,
                subject: zext(subject, cmp_width),
                arms: ir_arms,
                default: d,
            });
        }
    }
    Ok(())
}

fn lvalue_targets(l: &LValue, out: &mut BTreeSet<SignalId>) {
    match l {
        LValue::Whole(s) | LValue::Slice { signal: s, .. } => {
            out.insert(*s);
        }
        LValue::Concat(parts) => parts.iter().for_each(|p| lvalue_targets(p, out)),
    }
}

fn collect_writes(body: &[Stmt], out: &mut BTreeSet<SignalId>) {
    for s in body {
        match s {
            Stmt::Assign { lhs, .. } => lvalue_targets(lhs, out),
            Stmt::If { then, els, .. } => {
                collect_writes(then, out);
                collect_writes(els, out);
            }
            Stmt::Case { arms, default, .. } => {
                arms.iter().for_each(|a| collect_writes(&a.body, out));
                collect_writes(default, out);
            }
        }
    }
}

/// Per-signal mask of bits definitely written so far on every path.
type Assigned = HashMap<SignalId, u128>;

struct ReadCollector<'a> {
    signals: &'a [Signal],
    exposed: BTreeSet<SignalId>,
}

impl ReadCollector<'_> {
    fn note(&mut self, s: SignalId, bits: u128, assigned: &Assigned) {
        let have = assigned.get(&s).copied().unwrap_or(0);
        if bits & !have != 0 {
            self.exposed.insert(s);
        }
    }

    fn expr(&mut self, e: &Expr, assigned: &Assigned) {
        match &e.kind {
            ExprKind::Const(_) => {}
            ExprKind::Signal(s) => self.note(*s, mask(self.signals[s.index()].width), assigned),
            ExprKind::Extract { hi, lo, arg } => {
                if let ExprKind::Signal(s) = arg.kind {
                    self.note(s, mask(hi - lo + 1) << lo, assigned);
                } else {
                    self.expr(arg, assigned);
                }
            }
            ExprKind::Unary(_, a) | ExprKind::ZeroExtend(a) => self.expr(a, assigned),
            ExprKind::Binary(_, a, b) => {
                self.expr(a, assigned);
                self.expr(b, assigned);
            }
            ExprKind::Concat(parts) => parts.iter().for_each(|p| self.expr(p, assigned)),
            ExprKind::Ternary(c, t, f) => {
                self.expr(c, assigned);
                self.expr(t, assigned);
                self.expr(f, assigned);
            }
        }
    }

    fn assign(&self, l: &LValue, assigned: &mut Assigned) {
        match l {
            LValue::Whole(s) => {
                assigned.insert(*s, mask(self.signals[s.index()].width));
            }
            LValue::Slice { signal, hi, lo } => {
                *assigned.entry(*signal).or_insert(0) |= mask(hi - lo + 1) << lo;
            }
            LValue::Concat(parts) => parts.iter().for_each(|p| self.assign(p, assigned)),
        }
    }

    fn body(&mut self, body: &[Stmt], assigned: &mut Assigned) {
        for s in body {
            match s {
                Stmt::Assign { lhs, rhs, .. } => {
                    self.expr(rhs, assigned);
                    self.assign(lhs, assigned);
                }
                Stmt::If {
                    cond, then, els, ..
                } => {
                    self.expr(cond, assigned);
                    let mut a = assigned.clone();
                    self.body(then, &mut a);
                    let mut b = assigned.clone();
                    self.body(els, &mut b);
                    *assigned = intersect(&a, &[b]);
                }
                Stmt::Case {
                    subject,
                    arms,
                    default,
                    ..
                } => {
                    self.expr(subject, assigned);
                    let mut outs = Vec::with_capacity(arms.len() + 1);
                    for arm in arms {
                        let mut a = assigned.clone();
                        self.body(&arm.body, &mut a);
                        outs.push(a);
                    }
                    let mut d = assigned.clone();
                    self.body(default, &mut d);
                    *assigned = intersect(&d, &outs);
                }
            }
        }
    }
}

fn intersect(first: &Assigned, rest: &[Assigned]) -> Assigned {
    first
        .iter()
        .filter_map(|(s, &m)| {
            let m = rest
                .iter()
                .fold(m, |acc, r| acc & r.get(s).copied().unwrap_or(0));
            (m != 0).then_some((*s, m))
        })
        .collect()
}

/// Signals whose value on entry to `body` can influence it: reads of bits
/// not yet definitely written by an earlier statement on every path.
fn exposed_reads(signals: &[Signal], body: &[Stmt]) -> BTreeSet<SignalId> {
    let mut c = ReadCollector {
        signals,
        exposed: BTreeSet::new(),
    };
    c.body(body, &mut Assigned::new());
    c.exposed
}

struct Pending {
    kind: ProcessKind,
    body: Vec<Stmt>,
    writes: BTreeSet<SignalId>,
    loc: SourceLoc,
}

fn build_signals(
    m: &ast::ModuleAst,
) -> Result<(Vec<Signal>, HashMap<String, SignalId>), ElabError> {
    let mut signals: Vec<Signal> = Vec::new();
    let mut by_name = HashMap::new();
    let decls = m
        .ports
        .iter()
        .map(|p| {
            let kind = match p.direction {
                Direction::Input => SignalKind::Input,
                Direction::Output => SignalKind::Output,
            };
            (&p.name, p.width, kind, &p.loc)
        })
        .chain(
            m.nets
                .iter()
                .map(|n| (&n.name, n.width, SignalKind::Internal, &n.loc)),
        );
    for (name, width, kind, loc) in decls {
        if width == 0 || width > MAX_WIDTH {
            return Err(ElabError::BadWidth {
                loc: loc.clone(),
                name: name.clone(),
                width,
            });
        }
        if let Some(&id) = by_name.get(name) {
            let prev: &Signal = &signals[SignalId::index(id)];
            // A net declaration may restate a port (`output reg q`).
            if kind == SignalKind::Internal && prev.kind != SignalKind::Internal {
                if prev.width != width {
                    return Err(invalid(
                        loc,
                        format!("`{name}` redeclared with a different width"),
                    ));
                }
                continue;
            }
            return Err(invalid(loc, format!("`{name}` declared twice")));
        }
        let id = SignalId(signals.len() as u32);
        by_name.insert(name.clone(), id);
        signals.push(Signal {
            id,
            name: name.clone(),
            width,
            kind,
            loc: loc.clone(),
        });
    }
    Ok((signals, by_name))
}

/// Lowers `m` into an [`RtlDesign`], enforcing the static legality rules.
pub fn elaborate(m: &ast::ModuleAst) -> Result<RtlDesign, ElabError> {
    let (signals, by_name) = build_signals(m)?;
    let scope = Scope {
        signals: &signals,
        by_name: &by_name,
    };
    let mut tables = Tables::default();
    let mut pending: Vec<Pending> = Vec::new();
    let mut warnings = Vec::new();
    let mut clock_domain: Option<(SignalId, Edge, SourceLoc)> = None;

    for item in &m.items {
        match item {
            ast::Item::ContinuousAssign(a) => {
                let stmt = ast::Stmt {
                    kind: ast::StmtKind::BlockingAssign {
                        lhs: a.lhs.clone(),
                        rhs: a.rhs.clone(),
                    },
                    loc: a.loc.clone(),
                };
                let mut body = Vec::new();
                lower_stmt(&scope, &mut tables, AssignStyle::Blocking, &stmt, &mut body)?;
                pending.push(Pending {
                    kind: ProcessKind::Combinational {
                        reads: BTreeSet::new(),
                    },
                    body,
                    writes: BTreeSet::new(),
                    loc: a.loc.clone(),
                });
            }
            ast::Item::Always(b) => {
                let (kind, style) = match &b.sensitivity {
                    Sensitivity::Star | Sensitivity::Level(_) => (
                        ProcessKind::Combinational {
                            reads: BTreeSet::new(),
                        },
                        AssignStyle::Blocking,
                    ),
                    Sensitivity::Edges(edges) => {
                        if edges.len() != 1 {
                            return Err(invalid(
                                &b.loc,
                                "multiple edge events (asynchronous reset) are not supported",
                            ));
                        }
                        let (edge, name, loc) = &edges[0];
                        let clk = scope.resolve(name, loc)?;
                        if clk.kind != SignalKind::Input || clk.width != 1 {
                            return Err(invalid(
                                loc,
                                format!("clock `{name}` must be a 1-bit input"),
                            ));
                        }
                        match &clock_domain {
                            None => clock_domain = Some((clk.id, *edge, loc.clone())),
                            Some((c, e, _)) if *c == clk.id && e == edge => {}
                            Some(_) => {
                                return Err(invalid(
                                    loc,
                                    "all clocked blocks must share one clock and edge",
                                ))
                            }
                        }
                        (
                            ProcessKind::Clocked {
                                edge: *edge,
                                clock: clk.id,
                            },
                            AssignStyle::Nonblocking,
                        )
                    }
                };
                if let Sensitivity::Level(list) = &b.sensitivity {
                    for (name, loc) in list {
                        scope.resolve(name, loc)?;
                    }
                }
                let mut body = Vec::new();
                lower_stmt(&scope, &mut tables, style, &b.body, &mut body)?;
                if let Sensitivity::Level(list) = &b.sensitivity {
                    let listed: BTreeSet<&str> = list.iter().map(|(n, _)| n.as_str()).collect();
                    for s in exposed_reads(&signals, &body) {
                        let name = &signals[s.index()].name;
                        if !listed.contains(name.as_str()) {
                            warnings.push(Warning {
                                loc: b.loc.clone(),
                                message: format!(
                                    "sensitivity list omits `{name}`; block is treated as combinational"
                                ),
                            });
                        }
                    }
                }
                pending.push(Pending {
                    kind,
                    body,
                    writes: BTreeSet::new(),
                    loc: b.loc.clone(),
                });
            }
        }
    }

    // Single-driver rule and read/write sets.
    let mut driver: HashMap<SignalId, usize> = HashMap::new();
    for (i, p) in pending.iter_mut().enumerate() {
        collect_writes(&p.body, &mut p.writes);
        for &s in &p.writes {
            if driver.insert(s, i).is_some() {
                return Err(ElabError::MultipleDrivers {
                    loc: p.loc.clone(),
                    name: signals[s.index()].name.clone(),
                });
            }
        }
        if let ProcessKind::Combinational { reads } = &mut p.kind {
            *reads = exposed_reads(&signals, &p.body);
        }
    }

    let order = topo_order(&signals, &pending)?;
    let num_combinational = order.len();
    let clocked = (0..pending.len()).filter(|&i| pending[i].kind_is_clocked());
    let sequence: Vec<usize> = order.into_iter().chain(clocked).collect();
    let mut slots: Vec<Option<Pending>> = pending.into_iter().map(Some).collect();
    let processes = sequence
        .into_iter()
        .enumerate()
        .map(|(id, i)| {
            let p = slots[i].take().expect("each process placed once");
            Process {
                id,
                kind: p.kind,
                body: p.body,
                writes: p.writes,
                loc: p.loc,
            }
        })
        .collect();

    Ok(RtlDesign {
        name: m.name.clone(),
        signals,
        processes,
        num_combinational,
        stmt_table: tables.stmts,
        branch_table: tables.branches,
        warnings,
        by_name,
    })
}

impl Pending {
    fn kind_is_clocked(&self) -> bool {
        matches!(self.kind, ProcessKind::Clocked { .. })
    }
}

/// Kahn's algorithm over combinational processes, always releasing the
/// lowest source index first so the order is a function of the source alone.
fn topo_order(signals: &[Signal], pending: &[Pending]) -> Result<Vec<usize>, ElabError> {
    let comb: Vec<usize> = (0..pending.len())
        .filter(|&i| !pending[i].kind_is_clocked())
        .collect();
    let mut writer: HashMap<SignalId, usize> = HashMap::new();
    for &i in &comb {
        for &s in &pending[i].writes {
            writer.insert(s, i);
        }
    }
    let mut succs: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    let mut indeg: HashMap<usize, usize> = comb.iter().map(|&i| (i, 0)).collect();
    for &i in &comb {
        let ProcessKind::Combinational { reads } = &pending[i].kind else {
            unreachable!()
        };
        for s in reads {
            if let Some(&w) = writer.get(s) {
                if succs.entry(w).or_default().insert(i) {
                    *indeg.get_mut(&i).unwrap() += 1;
                }
            }
        }
    }
    let mut ready: BTreeSet<usize> = comb.iter().copied().filter(|i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(comb.len());
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in succs.get(&i).into_iter().flatten() {
            let d = indeg.get_mut(&j).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(j);
            }
        }
    }
    if order.len() == comb.len() {
        return Ok(order);
    }
    let stuck: BTreeSet<usize> = comb.iter().copied().filter(|i| indeg[i] > 0).collect();
    let mut involved = BTreeSet::new();
    for &i in &stuck {
        let ProcessKind::Combinational { reads } = &pending[i].kind else {
            unreachable!()
        };
        for s in reads {
            if writer.get(s).is_some_and(|w| stuck.contains(w)) {
                involved.insert(*s);
            }
        }
    }
    let first = *stuck.first().expect("nonempty when ordering fails");
    Err(ElabError::CombinationalCycle {
        loc: pending[first].loc.clone(),
        signals: involved
            .into_iter()
            .map(|s| signals[s.index()].name.clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn elab(src: &str) -> Result<RtlDesign, ElabError> {
        elaborate(&parse_source("t.v", src).expect("parses"))
    }

    const MUX: &str = "module mux(sel, din_0, din_1, mux_out);
input sel, din_0, din_1;
output mux_out;
reg mux_out;
always @ (sel or din_0 or din_1)
begin : MUX
  if (sel == 1'b0) begin
    mux_out = din_0;
  end else begin
    mux_out = din_1;
  end
end
endmodule
";

    #[test]
    fn mux_shape() {
        let d = elab(MUX).unwrap();
        assert_eq!(d.signals.len(), 4);
        assert_eq!(d.processes.len(), 1);
        assert_eq!(d.num_combinational, 1);
        assert_eq!(d.stmt_table.len(), 2);
        assert_eq!(d.branch_table.len(), 1);
        assert_eq!(d.branch_table[0].arms(), 2);
        assert!(d.warnings.is_empty());
        let ProcessKind::Combinational { reads } = &d.processes[0].kind else {
            panic!()
        };
        let names: Vec<&str> = reads.iter().map(|s| d.signal(*s).name.as_str()).collect();
        assert_eq!(names, ["sel", "din_0", "din_1"]);
    }

    #[test]
    fn driver_and_cycle_errors() {
        let e = elab("module m(input a, input b, output y); assign y = a; assign y = b; endmodule")
            .unwrap_err();
        assert!(
            matches!(e, ElabError::MultipleDrivers { ref name, .. } if name == "y"),
            "{e}"
        );
        let e = elab(
            "module m(output y); wire a, b; assign a = b; assign b = a; assign y = a; endmodule",
        )
        .unwrap_err();
        assert!(matches!(e, ElabError::CombinationalCycle { .. }), "{e}");
        let e = elab("module m(input a, output [1:0] y); assign y = y + a; endmodule").unwrap_err();
        assert!(matches!(e, ElabError::CombinationalCycle { .. }), "{e}");
    }

    #[test]
    fn partial_writes_are_not_cycles() {
        let d = elab(
            "module m(input a, output reg [1:0] y);
             always @* begin y[0] = a; y[1] = ~y[0]; end
             endmodule",
        )
        .unwrap();
        let ProcessKind::Combinational { reads } = &d.processes[0].kind else {
            panic!()
        };
        assert_eq!(reads.len(), 1);
    }

    #[test]
    fn topological_order_follows_data() {
        let d = elab(
            "module m(input a, output y); wire b, c;
             assign y = c; assign c = b; assign b = a; endmodule",
        )
        .unwrap();
        let firsts: Vec<String> = d
            .processes
            .iter()
            .map(|p| d.signal(*p.writes.first().unwrap()).name.clone())
            .collect();
        assert_eq!(firsts, ["b", "c", "y"]);
    }

    #[test]
    fn legality_errors() {
        let cases = [
            ("module m(input a, output y); assign y = z; endmodule", "undeclared"),
            ("module m(input a, output y); assign a = y; endmodule", "input"),
            (
                "module m(input clk, input a, output reg y); always @(posedge clk) y = a; endmodule",
                "blocking",
            ),
            (
                "module m(input a, output reg y); always @* y <= a; endmodule",
                "nonblocking",
            ),
            (
                "module m(input clk, input r, output reg y); always @(posedge clk or posedge r) y <= 1; endmodule",
                "asynchronous",
            ),
            ("module m(input [3:0] a, output y); assign y = a[4]; endmodule", "out of range"),
        ];
        for (src, needle) in cases {
            let e = elab(src).unwrap_err().to_string();
            assert!(e.contains(needle), "{src}: {e}");
        }
    }

    #[test]
    fn width_rules() {
        let d =
            elab("module m(input [3:0] a, input [7:0] b, output y); assign y = a[0]; endmodule")
                .unwrap();
        let w = |src: &str| {
            let wrapped = format!("module w(output y); assign y = {src}; endmodule");
            let m = parse_source("w.v", &wrapped).unwrap();
            let ast::Item::ContinuousAssign(a) = &m.items[0] else {
                panic!()
            };
            width_of(&a.rhs, &d).unwrap()
        };
        assert_eq!(w("a + b"), 8);
        assert_eq!(w("a == b"), 1);
        assert_eq!(w("{a, b}"), 12);
        assert_eq!(w("a << b"), 4);
        assert_eq!(w("a / b"), 4);
        assert_eq!(w("b % a"), 8);
        assert_eq!(w("&b"), 1);
        assert_eq!(w("a && b"), 1);
        assert_eq!(w("a[0] ? a : b"), 8);
        assert_eq!(w("-a"), 4);
        assert_eq!(w("~b"), 8);
        assert_eq!(w("{2{a}}"), 8);
        assert_eq!(w("5"), 32);
        assert_eq!(w("b[a]"), 1);
    }

    #[test]
    fn const_overflow_is_rejected() {
        let d = elab("module m(output y); assign y = 1'b0; endmodule").unwrap();
        let bad = ast::Expr {
            kind: ast::ExprKind::Const {
                width: 2,
                value: 4,
                sized: true,
            },
            loc: SourceLoc::default(),
        };
        assert!(matches!(
            width_of(&bad, &d),
            Err(ElabError::ConstOverflow { .. })
        ));
    }

    #[test]
    fn sensitivity_warning() {
        let d = elab("module m(input a, input b, output reg y); always @(a) y = a & b; endmodule")
            .unwrap();
        assert_eq!(d.warnings.len(), 1);
        assert!(d.warnings[0].message.contains("`b`"));
    }

    #[test]
    fn case_tables() {
        let d = elab(
            "module m(input [1:0] s, output reg [1:0] y);
             always @* case (s) 2'd0, 2'd1: y = 1; 2'd2: y = 2; endcase
             endmodule",
        )
        .unwrap();
        assert_eq!(d.branch_table[0].arms(), 3);
        assert_eq!(d.stmt_table.len(), 2);
    }
}
