// SPDX-License-Identifier: Apache-2.0

//! External SMT backend: pipes an SMT-LIB script into a shell command and
//! reads back `sat`/`unsat`/`unknown` plus a `(get-model)` response.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::bv::{mask, smtlib, Assignment, BvPool, NodeId};

use super::{SolveResult, SolverError, UnknownReason};

fn kill_group(child: &mut std::process::Child) {
    #[cfg(unix)]
    if let Ok(pid) = libc::pid_t::try_from(child.id()) {
        // SAFETY: plain syscall on a process group we created.
        unsafe {
            libc::kill(-pid, libc::SIGKILL);
        }
    }
    let _ = child.kill();
}

pub(crate) fn check(
    pool: &BvPool,
    constraints: &[NodeId],
    cmd: &str,
    timeout: Option<Duration>,
) -> Result<SolveResult, SolverError> {
    let (script, symbols) = smtlib::script(pool, constraints);
    let err = |m: String| SolverError::External(m);

    let mut command = Command::new("sh");
    command
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null());
    // Own process group, so a timeout also reaches grandchildren that hold
    // the output pipe open.
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut command, 0);
    let mut child = command
        .spawn()
        .map_err(|e| err(format!("cannot start `{cmd}`: {e}")))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // A solver may exit before reading everything; that is not our error.
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut out = String::new();
        stdout.read_to_string(&mut out).map(|_| out)
    });

    let deadline = timeout.map(|t| Instant::now() + t);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    kill_group(&mut child);
                    let _ = child.wait();
                    let _ = writer.join();
                    let _ = reader.join();
                    return Ok(SolveResult::Unknown(UnknownReason::Timeout));
                }
                thread::sleep(Duration::from_millis(1));
            }
            Err(e) => return Err(err(format!("waiting for `{cmd}`: {e}"))),
        }
    };
    let _ = writer.join();
    let output = reader
        .join()
        .map_err(|_| err("reader thread panicked".into()))?
        .map_err(|e| err(format!("reading solver output: {e}")))?;

    let mut tokens = Tokens::new(&output);
    let verdict = tokens
        .next()
        .ok_or_else(|| err(format!("solver produced no output (exit status {status})")))?;
    match verdict {
        Tok::Atom("unsat") => Ok(SolveResult::Unsat),
        Tok::Atom("unknown") => Ok(SolveResult::Unknown(UnknownReason::Timeout)),
        Tok::Atom("sat") => {
            let values = parse_model(&mut tokens).map_err(err)?;
            let mut a = Assignment::new();
            for (sym, var) in &symbols {
                let width = pool.var_info(*var).width;
                let v = match values.iter().find(|(n, _)| n == sym) {
                    Some((_, (w, v))) if *w == width => *v,
                    Some((_, (w, _))) => {
                        return Err(err(format!(
                            "model gives `{sym}` width {w}, declared {width}"
                        )))
                    }
                    // Unconstrained symbols may be omitted from the model.
                    None => 0,
                };
                a.set(*var, v & mask(width));
            }
            Ok(SolveResult::Sat(a))
        }
        other => Err(err(format!("unexpected solver verdict {other:?}"))),
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Tokens<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(src: &'a str) -> Self {
        Tokens { src, pos: 0 }
    }
}

impl<'a> Iterator for Tokens<'a> {
    type Item = Tok<'a>;

    fn next(&mut self) -> Option<Tok<'a>> {
        let bytes = self.src.as_bytes();
        loop {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos] == b';' {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        match *bytes.get(start)? {
            b'(' => {
                self.pos += 1;
                Some(Tok::Open)
            }
            b')' => {
                self.pos += 1;
                Some(Tok::Close)
            }
            b'|' => {
                let end = self.src[start + 1..]
                    .find('|')
                    .map_or(bytes.len(), |i| start + 1 + i);
                self.pos = (end + 1).min(bytes.len());
                Some(Tok::Atom(&self.src[start + 1..end]))
            }
            _ => {
                while self.pos < bytes.len()
                    && !bytes[self.pos].is_ascii_whitespace()
                    && !matches!(bytes[self.pos], b'(' | b')' | b';')
                {
                    self.pos += 1;
                }
                Some(Tok::Atom(&self.src[start..self.pos]))
            }
        }
    }
}

#[derive(Debug)]
enum Sexp<'a> {
    Atom(&'a str),
    List(Vec<Sexp<'a>>),
}

fn read_sexp<'a>(tokens: &mut Tokens<'a>, first: Tok<'a>) -> Result<Sexp<'a>, String> {
    match first {
        Tok::Atom(a) => Ok(Sexp::Atom(a)),
        Tok::Close => Err("unbalanced `)` in model".into()),
        Tok::Open => {
            let mut items = Vec::new();
            loop {
                match tokens.next() {
                    None => return Err("unterminated list in model".into()),
                    Some(Tok::Close) => return Ok(Sexp::List(items)),
                    Some(t) => items.push(read_sexp(tokens, t)?),
                }
            }
        }
    }
}

/// `(width, value)` from `#b...`, `#x...` or `(_ bvN w)`.
fn parse_value(v: &Sexp<'_>) -> Result<(u32, u128), String> {
    match v {
        Sexp::Atom(a) => {
            let (digits, radix, bits_per) = if let Some(d) = a.strip_prefix("#b") {
                (d, 2, 1)
            } else if let Some(d) = a.strip_prefix("#x") {
                (d, 16, 4)
            } else {
                return Err(format!("unsupported model value `{a}`"));
            };
            let width = digits.len() as u32 * bits_per;
            if width == 0 || width > 128 {
                return Err(format!("model value `{a}` has unsupported width"));
            }
            let value = u128::from_str_radix(digits, radix)
                .map_err(|e| format!("bad model value `{a}`: {e}"))?;
            Ok((width, value))
        }
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom("_"), Sexp::Atom(bv), Sexp::Atom(w)] if bv.starts_with("bv") => {
                let value = bv[2..]
                    .parse::<u128>()
                    .map_err(|e| format!("bad model value `{bv}`: {e}"))?;
                let width = w
                    .parse::<u32>()
                    .map_err(|e| format!("bad width `{w}`: {e}"))?;
                Ok((width, value))
            }
            _ => Err(format!("unsupported model value {v:?}")),
        },
    }
}

/// Collects `(define-fun name () (_ BitVec w) value)` entries, accepting an
/// optional leading `model` keyword.
/// Symbol name to (width, value).
type Model = Vec<(String, (u32, u128))>;

fn parse_model(tokens: &mut Tokens<'_>) -> Result<Model, String> {
    let Some(first) = tokens.next() else {
        return Ok(Vec::new());
    };
    let Sexp::List(items) = read_sexp(tokens, first)? else {
        return Err("model is not a list".into());
    };
    let mut out = Vec::new();
    for item in &items {
        match item {
            Sexp::Atom("model") => continue,
            Sexp::List(def) => match def.as_slice() {
                [Sexp::Atom("define-fun"), Sexp::Atom(name), Sexp::List(args), _sort, value]
                    if args.is_empty() =>
                {
                    out.push((name.to_string(), parse_value(value)?));
                }
                _ => return Err(format!("unsupported model entry {def:?}")),
            },
            other => return Err(format!("unsupported model entry {other:?}")),
        }
    }
    Ok(out)
}
