//! Backbones of satisfiable formulae.
//!
//! A variable is in the backbone when it takes the same value in every model.
//! After one solve gives a model σ, each variable `v` is tested by solving
//! `f ∧ ¬σ(v)` from scratch: UNSAT puts `v` in the backbone with value σ(v).
//! With filtering enabled, every model found along the way frees all variables
//! on which it differs from σ, which saves their tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cdcl::{solve_with_phases, PolarityMode, SolveError, SolverConfig, Verdict};
use crate::cnf::{Clause, Formula, Var};
use crate::polarity::PolarityHints;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackboneError {
    #[error("formula is unsatisfiable; its backbone is undefined")]
    Unsatisfiable,
    #[error("conflict budget exhausted while computing the backbone")]
    BudgetExhausted,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("hints cover {hints} variables but the report covers {report}")]
    Mismatch { hints: usize, report: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackboneStatus {
    True,
    False,
    Free,
}

impl BackboneStatus {
    pub fn value(self) -> Option<bool> {
        match self {
            BackboneStatus::True => Some(true),
            BackboneStatus::False => Some(false),
            BackboneStatus::Free => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackboneReport {
    pub id: String,
    pub statuses: Vec<BackboneStatus>,
    /// Solver invocations, including the initial one.
    pub solver_calls: usize,
}

impl BackboneReport {
    pub fn count(&self, status: BackboneStatus) -> usize {
        self.statuses.iter().filter(|&&s| s == status).count()
    }

    pub fn size(&self) -> usize {
        self.statuses.len() - self.count(BackboneStatus::Free)
    }

    pub fn status(&self, var: Var) -> BackboneStatus {
        self.statuses[var.offset()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HintScore {
    pub matched: usize,
    pub backbone_size: usize,
    /// `matched / backbone_size`; `None` for an empty backbone.
    pub accuracy: Option<f64>,
}

pub fn compute_backbone(f: &Formula, cfg: &SolverConfig) -> Result<BackboneReport, BackboneError> {
    compute_backbone_with(f, cfg, true)
}

pub fn compute_backbone_with(
    f: &Formula,
    cfg: &SolverConfig,
    filtering: bool,
) -> Result<BackboneReport, BackboneError> {
    let cfg = SolverConfig {
        polarity_mode: PolarityMode::AlwaysFalse,
        ..*cfg
    };
    let first = solve_with_phases(f, &cfg, None)?;
    let sigma = match first.verdict {
        Verdict::Sat => first.model.expect("SAT carries a model"),
        Verdict::Unsat => return Err(BackboneError::Unsatisfiable),
        Verdict::BudgetExhausted => return Err(BackboneError::BudgetExhausted),
    };
    let n = f.num_vars() as usize;
    let mut free = vec![false; n];
    let mut statuses = vec![BackboneStatus::Free; n];
    let mut calls = 1;
    for v in f.vars() {
        let i = v.offset();
        if free[i] {
            continue;
        }
        let flipped = Clause::new([v.lit(!sigma[i])]).expect("unit clause");
        let r = solve_with_phases(&f.with_clause(flipped).expect("same variables"), &cfg, None)?;
        calls += 1;
        match r.verdict {
            Verdict::Unsat => {
                statuses[i] = if sigma[i] {
                    BackboneStatus::True
                } else {
                    BackboneStatus::False
                };
            }
            Verdict::Sat => {
                free[i] = true;
                if filtering {
                    let model = r.model.expect("SAT carries a model");
                    for (j, (a, b)) in model.iter().zip(&sigma).enumerate() {
                        if a != b {
                            free[j] = true;
                        }
                    }
                }
            }
            Verdict::BudgetExhausted => return Err(BackboneError::BudgetExhausted),
        }
    }
    Ok(BackboneReport {
        id: String::new(),
        statuses,
        solver_calls: calls,
    })
}

/// How many backbone variables the hints set to their backbone value.
pub fn hint_accuracy(hints: &PolarityHints, report: &BackboneReport) -> Result<HintScore, BackboneError> {
    if hints.len() != report.statuses.len() {
        return Err(BackboneError::Mismatch {
            hints: hints.len(),
            report: report.statuses.len(),
        });
    }
    let mut matched = 0;
    let mut size = 0;
    for (entry, status) in hints.entries().iter().zip(&report.statuses) {
        if let Some(value) = status.value() {
            size += 1;
            if entry.value == value {
                matched += 1;
            }
        }
    }
    Ok(HintScore {
        matched,
        backbone_size: size,
        accuracy: (size > 0).then(|| matched as f64 / size as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use BackboneStatus::*;

    fn f(num_vars: u32, clauses: &[&[i64]]) -> Formula {
        Formula::from_dimacs_clauses(num_vars, clauses).unwrap()
    }

    #[test]
    fn unit_forces_backbone() {
        let r = compute_backbone(&f(2, &[&[1], &[1, 2]]), &SolverConfig::default()).unwrap();
        assert_eq!(r.statuses, [True, Free]);
    }

    #[test]
    fn example_formula_has_empty_backbone() {
        let f0 = f(4, &[&[1, 2, 4], &[-2, 3, -4], &[1, -3, -4]]);
        let r = compute_backbone(&f0, &SolverConfig::default()).unwrap();
        assert_eq!(r.statuses, [Free; 4]);
        assert_eq!(r.size(), 0);
    }

    #[test]
    fn unsat_is_an_error() {
        assert_eq!(
            compute_backbone(&f(1, &[&[1], &[-1]]), &SolverConfig::default()),
            Err(BackboneError::Unsatisfiable)
        );
    }

    #[test]
    fn filtering_only_saves_calls() {
        let formula = f(4, &[&[-1], &[2, 3], &[-2, -3], &[1, 4, 2]]);
        let with = compute_backbone_with(&formula, &SolverConfig::default(), true).unwrap();
        let without = compute_backbone_with(&formula, &SolverConfig::default(), false).unwrap();
        assert_eq!(with.statuses, without.statuses);
        assert_eq!(with.statuses[0], False);
        assert!(with.solver_calls <= without.solver_calls);
    }

    #[test]
    fn accuracy_cases() {
        let report = BackboneReport {
            id: String::new(),
            statuses: vec![True, False, Free],
            solver_calls: 0,
        };
        let agree = PolarityHints::from_assignment(&[true, false, true]);
        let s = hint_accuracy(&agree, &report).unwrap();
        assert_eq!((s.matched, s.backbone_size, s.accuracy), (2, 2, Some(1.0)));

        let disagree = PolarityHints::from_assignment(&[false, true, true]);
        assert_eq!(hint_accuracy(&disagree, &report).unwrap().accuracy, Some(0.0));

        let empty = BackboneReport { statuses: vec![Free; 3], ..report.clone() };
        let s = hint_accuracy(&agree, &empty).unwrap();
        assert_eq!((s.matched, s.backbone_size, s.accuracy), (0, 0, None));

        let short = PolarityHints::from_assignment(&[true]);
        assert!(matches!(hint_accuracy(&short, &report), Err(BackboneError::Mismatch { .. })));
    }
}
