// SPDX-License-Identifier: Apache-2.0

pub mod bv;
pub mod cli;
pub mod elab;
pub mod flow;
pub mod frontend;
pub mod replay;
pub mod solver;
pub mod symexec;
