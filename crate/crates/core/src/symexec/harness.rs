// SPDX-License-Identifier: Apache-2.0

//! Harness files: which inputs are symbolic, which are fixed, how reset is
//! driven, how many cycles to unroll, and exploration budgets.
//!
//! ```toml
//! top = "counter"
//! max_cycles = 2
//! clock = "clk"
//!
//! [reset]
//! signal = "rst"
//! active = 1
//! hold_cycles = 1
//!
//! [[symbolic]]
//! signal = "en"
//! bits = 1
//! mode = "fresh_per_cycle"   # or "hold" (default)
//!
//! [[fixed]]
//! signal = "din"
//! value = "0x1f"             # integer or "0x"/"0b"/decimal string
//!
//! [budgets]
//! max_paths = 100000
//! max_solver_calls = 1000000
//! wall_clock_s = 600
//! ```

use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::bv::mask;
use crate::elab::{RtlDesign, SignalId, SignalKind};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HarnessError {
    #[error("harness: {0}")]
    Syntax(String),
    #[error("harness: top `{found}` does not match design `{design}`")]
    TopMismatch { found: String, design: String },
    #[error("harness: unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("harness: `{0}` is not an input")]
    NotAnInput(String),
    #[error("harness: width mismatch for `{name}`: declared {declared}, harness gives {given}")]
    WidthMismatch {
        name: String,
        declared: u32,
        given: u32,
    },
    #[error("harness: value {value:#x} does not fit `{name}` ({width} bits)")]
    ValueTooWide {
        name: String,
        value: u128,
        width: u32,
    },
    #[error("harness: input `{0}` is not covered")]
    Uncovered(String),
    #[error("harness: input `{0}` is covered more than once")]
    Duplicate(String),
    #[error("harness: {0}")]
    Invalid(String),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// One symbol for the whole run.
    #[default]
    Hold,
    /// A new symbol every cycle.
    FreshPerCycle,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetSpec {
    pub signal: String,
    pub active: u8,
    pub hold_cycles: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolicSpec {
    pub signal: String,
    pub bits: u32,
    #[serde(default)]
    pub mode: InputMode,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Int(u64),
    Text(String),
}

impl ValueSpec {
    fn value(&self) -> Result<u128, HarnessError> {
        match self {
            ValueSpec::Int(v) => Ok(u128::from(*v)),
            ValueSpec::Text(t) => parse_number(t)
                .ok_or_else(|| HarnessError::Syntax(format!("bad numeric value `{t}`"))),
        }
    }
}

fn parse_number(t: &str) -> Option<u128> {
    let t = t.trim().replace('_', "");
    if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u128::from_str_radix(h, 16).ok()
    } else if let Some(b) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u128::from_str_radix(b, 2).ok()
    } else {
        t.parse().ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSpec {
    pub signal: String,
    pub value: ValueSpec,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub max_paths: u64,
    pub max_solver_calls: u64,
    pub wall_clock_s: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_paths: 100_000,
            max_solver_calls: 1_000_000,
            wall_clock_s: 600,
        }
    }
}

impl Budgets {
    pub fn wall_clock(&self) -> Duration {
        Duration::from_secs(self.wall_clock_s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harness {
    pub top: String,
    pub max_cycles: u32,
    #[serde(default)]
    pub clock: Option<String>,
    #[serde(default)]
    pub reset: Option<ResetSpec>,
    #[serde(default)]
    pub symbolic: Vec<SymbolicSpec>,
    #[serde(default)]
    pub fixed: Vec<FixedSpec>,
    #[serde(default)]
    pub budgets: Budgets,
}

impl Harness {
    pub fn parse(text: &str) -> Result<Harness, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Syntax(e.message().to_string()))
    }
}

/// How one input is driven.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputRole {
    /// Held at 0; each cycle is one active edge.
    Clock,
    Reset {
        active: u128,
        hold_cycles: u32,
    },
    Symbolic(InputMode),
    Fixed(u128),
}

/// A harness resolved against a design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputPlan {
    pub max_cycles: u32,
    pub budgets: Budgets,
    /// Role of every input, in declaration order.
    pub roles: Vec<(SignalId, InputRole)>,
}

impl InputPlan {
    /// Inputs carried in test vectors: everything but the clock, in declaration order.
    pub fn controlled(&self) -> impl Iterator<Item = (SignalId, &InputRole)> {
        self.roles
            .iter()
            .filter(|(_, r)| *r != InputRole::Clock)
            .map(|(s, r)| (*s, r))
    }

    pub fn clock(&self) -> Option<SignalId> {
        self.roles
            .iter()
            .find(|(_, r)| *r == InputRole::Clock)
            .map(|(s, _)| *s)
    }

    pub fn symbolic_bits(&self, design: &RtlDesign) -> u64 {
        self.roles
            .iter()
            .map(|(s, r)| match r {
                InputRole::Symbolic(InputMode::Hold) => u64::from(design.signal(*s).width),
                InputRole::Symbolic(InputMode::FreshPerCycle) => {
                    u64::from(design.signal(*s).width) * u64::from(self.max_cycles)
                }
                _ => 0,
            })
            .sum()
    }
}

/// Checks `h` against `design`: names exist and are inputs, widths agree,
/// fixed values fit, and every input has exactly one role.
pub fn validate(h: &Harness, design: &RtlDesign) -> Result<InputPlan, HarnessError> {
    if h.top != design.name {
        return Err(HarnessError::TopMismatch {
            found: h.top.clone(),
            design: design.name.clone(),
        });
    }
    if h.max_cycles == 0 {
        return Err(HarnessError::Invalid(
            "max_cycles must be at least 1".into(),
        ));
    }
    let b = &h.budgets;
    if b.max_paths == 0 || b.max_solver_calls == 0 || b.wall_clock_s == 0 {
        return Err(HarnessError::Invalid("budgets must be positive".into()));
    }
    let input = |name: &str| -> Result<SignalId, HarnessError> {
        let id = design
            .lookup(name)
            .ok_or_else(|| HarnessError::UnknownSignal(name.to_string()))?;
        if design.signal(id).kind != SignalKind::Input {
            return Err(HarnessError::NotAnInput(name.to_string()));
        }
        Ok(id)
    };
    let mut roles: Vec<Option<InputRole>> = vec![None; design.signals.len()];
    let mut assign = |id: SignalId, role: InputRole| -> Result<(), HarnessError> {
        let slot = &mut roles[id.index()];
        if slot.is_some() {
            return Err(HarnessError::Duplicate(design.signal(id).name.clone()));
        }
        *slot = Some(role);
        Ok(())
    };

    match (&h.clock, design.clock()) {
        (Some(name), Some(clk)) => {
            let id = input(name)?;
            if id != clk {
                return Err(HarnessError::Invalid(format!(
                    "clock `{name}` is not the design clock `{}`",
                    design.signal(clk).name
                )));
            }
            assign(id, InputRole::Clock)?;
        }
        (Some(name), None) => {
            let id = input(name)?;
            assign(id, InputRole::Clock)?;
        }
        (None, Some(clk)) => {
            return Err(HarnessError::Invalid(format!(
                "design is clocked by `{}` but the harness names no clock",
                design.signal(clk).name
            )))
        }
        (None, None) => {}
    }
    if let Some(r) = &h.reset {
        let id = input(&r.signal)?;
        let width = design.signal(id).width;
        if width != 1 {
            return Err(HarnessError::WidthMismatch {
                name: r.signal.clone(),
                declared: width,
                given: 1,
            });
        }
        if r.active > 1 {
            return Err(HarnessError::Invalid(
                "reset active level must be 0 or 1".into(),
            ));
        }
        assign(
            id,
            InputRole::Reset {
                active: u128::from(r.active),
                hold_cycles: r.hold_cycles,
            },
        )?;
    }
    for s in &h.symbolic {
        let id = input(&s.signal)?;
        let declared = design.signal(id).width;
        if s.bits != declared {
            return Err(HarnessError::WidthMismatch {
                name: s.signal.clone(),
                declared,
                given: s.bits,
            });
        }
        assign(id, InputRole::Symbolic(s.mode))?;
    }
    for f in &h.fixed {
        let id = input(&f.signal)?;
        let width = design.signal(id).width;
        let value = f.value.value()?;
        if value > mask(width) {
            return Err(HarnessError::ValueTooWide {
                name: f.signal.clone(),
                value,
                width,
            });
        }
        assign(id, InputRole::Fixed(value))?;
    }

    let mut out = Vec::new();
    for s in design.inputs() {
        match roles[s.id.index()].take() {
            Some(r) => out.push((s.id, r)),
            None => return Err(HarnessError::Uncovered(s.name.clone())),
        }
    }
    Ok(InputPlan {
        max_cycles: h.max_cycles,
        budgets: h.budgets,
        roles: out,
    })
}
