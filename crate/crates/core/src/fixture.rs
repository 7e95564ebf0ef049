//! Trace fixture files.
//!
//! One sample per line. A line holds either a one-based phase index `1..=6`
//! (meaning `phase(i)`) or a raw three-letter triple such as `TTT` or `FTF`
//! for codes outside the table. `#` starts a comment; blank lines are skipped.

use std::fmt::Write as _;

use thiserror::Error;

use crate::encoder::{phase, PhaseCode};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FixtureError {
    pub line: usize,
    pub message: String,
}

/// Parses one token: a phase index or a raw `T`/`F` triple.
pub fn parse_token(token: &str) -> Result<PhaseCode, String> {
    if let Ok(i) = token.parse::<u64>() {
        return if (1..=6).contains(&i) { Ok(phase(i)) } else { Err(format!("phase index {i} is outside 1..6")) };
    }
    let bits: Vec<bool> = token
        .chars()
        .map(|c| match c {
            'T' | 't' | '1' => Ok(true),
            'F' | 'f' | '0' => Ok(false),
            _ => Err(()),
        })
        .collect::<Result<_, _>>()
        .map_err(|_| format!("`{token}` is neither a phase index nor a T/F triple"))?;
    match bits[..] {
        [c1, c2, c3] => Ok(PhaseCode::new(c1, c2, c3)),
        _ => Err(format!("`{token}` is neither a phase index nor a T/F triple")),
    }
}

/// The token a code is written as: its phase index, or the raw triple.
pub fn token(code: PhaseCode) -> String {
    match code.table_index() {
        Some(row) => (row + 1).to_string(),
        None => code.to_string(),
    }
}

pub fn parse_fixture(text: &str) -> Result<Vec<PhaseCode>, FixtureError> {
    let mut codes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tok = parts.next().expect("non-empty line");
        if parts.next().is_some() {
            return Err(FixtureError { line: i + 1, message: "expected one code per line".into() });
        }
        codes.push(parse_token(tok).map_err(|message| FixtureError { line: i + 1, message })?);
    }
    Ok(codes)
}

pub fn write_fixture(codes: &[PhaseCode], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    for &code in codes {
        let _ = writeln!(out, "{}", token(code));
    }
    out
}

/// Table row to initialise the odometer with when replaying `codes`: the row
/// of the first sample, so the first step stays at count 0.
pub fn replay_init(codes: &[PhaseCode]) -> u64 {
    codes.first().and_then(|c| c.table_index()).unwrap_or(0) as u64
}
