//! DIMACS CNF reading and canonical writing.
//!
//! The writer emits `p cnf V C` followed by one clause per line, literals
//! separated by single spaces and terminated by ` 0`. Parsing that text gives
//! back the same formula, and writing a parsed canonical file reproduces it
//! byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use mcsat_core::cnf::{Clause, CnfError, Formula};

#[derive(Debug, thiserror::Error)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: malformed header")]
    MalformedHeader { line: usize },
    #[error("line {line}: second header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: literal before the header")]
    ClauseBeforeHeader { line: usize },
    #[error("line {line}: `{token}` is not a literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: {source}")]
    Clause { line: usize, source: CnfError },
    #[error("last clause is not terminated by 0")]
    Unterminated,
    #[error("header announces {expected} clauses but {found} were read")]
    ClauseCount { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub fn parse_dimacs(text: &str) -> Result<Formula, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        // SATLIB files end with `%` and a stray `0`.
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line });
            }
            header = Some(parse_header(trimmed).ok_or(DimacsError::MalformedHeader { line })?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(DimacsError::ClauseBeforeHeader { line });
        };
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::BadToken {
                line,
                token: token.to_string(),
            })?;
            if value != 0 {
                current.push(value);
                continue;
            }
            let clause = Clause::from_dimacs(&current).map_err(|source| DimacsError::Clause { line, source })?;
            if let Some(var) = clause.lits().iter().map(|l| l.var().index()).find(|&v| v > num_vars) {
                return Err(DimacsError::Clause {
                    line,
                    source: CnfError::VariableOutOfRange { var, num_vars },
                });
            }
            clauses.push(clause);
            current.clear();
        }
    }
    let (num_vars, expected) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if clauses.len() != expected {
        return Err(DimacsError::ClauseCount {
            expected,
            found: clauses.len(),
        });
    }
    Ok(Formula::new(num_vars, clauses).expect("clauses were range-checked"))
}

fn parse_header(line: &str) -> Option<(u32, usize)> {
    let mut it = line.split_whitespace();
    if it.next()? != "p" || it.next()? != "cnf" {
        return None;
    }
    let vars = it.next()?.parse().ok()?;
    let clauses = it.next()?.parse().ok()?;
    it.next().is_none().then_some((vars, clauses))
}

pub fn write_dimacs(f: &Formula) -> String {
    let mut out = String::with_capacity(16 + 12 * f.num_clauses());
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses()).unwrap();
    for clause in f.clauses() {
        for lit in clause.lits() {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn read_dimacs_file(path: &Path) -> Result<Formula, DimacsError> {
    let text = std::fs::read_to_string(path).map_err(|source| DimacsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dimacs(&text)
}
