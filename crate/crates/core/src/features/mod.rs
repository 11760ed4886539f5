//! The ten instance features fed to the satisfiability classifier.
//!
//! | # | name                         | definition                                          |
//! |---|------------------------------|-----------------------------------------------------|
//! | 1 | `clause_var_ratio`           | clauses / occurring variables                       |
//! | 2 | `frac_binary`                | share of clauses with exactly two literals          |
//! | 3 | `frac_horn`                  | share of clauses with at most one positive literal  |
//! | 4 | `posneg_ratio_var_max`       | max of `b_i = 2·|1/2 − p_i/(p_i+n_i)|`              |
//! | 5 | `posneg_ratio_var_min`       | min of `b_i`                                        |
//! | 6 | `posneg_ratio_var_mean`      | mean of `b_i`                                       |
//! | 7 | `posneg_ratio_var_std`       | population standard deviation of `b_i`              |
//! | 8 | `posneg_ratio_var_variation` | std / mean of `b_i` (0 when the mean is 0)          |
//! | 9 | `lpslack_mean`               | mean of `min(x_i, 1 − x_i)` at the LP optimum       |
//! |10 | `lpslack_coeff_variation`    | std / mean of the LP slacks (0 when the mean is 0)  |
//!
//! `p_i` and `n_i` count positive and negative occurrences of variable `i`.
//! All per-variable statistics range over variables that occur in some clause.
//! LP values come from an optimal vertex; when the optimum is not unique the
//! slack features depend on which vertex the simplex reaches.
//! A formula without clauses maps to the all-zero vector; an infeasible LP sets
//! both slack features to 0 and is reported through [`LpStatus::Infeasible`].

pub mod lp;

use alloc::vec;
use alloc::vec::Vec;

use crate::cnf::{Formula, Var};
pub use lp::{solve_lp_relaxation, ClauseLp, LpSolution, LpStatus};

pub const NUM_FEATURES: usize = 10;

/// Column names, in feature order.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "clause_var_ratio",
    "frac_binary",
    "frac_horn",
    "posneg_ratio_var_max",
    "posneg_ratio_var_min",
    "posneg_ratio_var_mean",
    "posneg_ratio_var_std",
    "posneg_ratio_var_variation",
    "lpslack_mean",
    "lpslack_coeff_variation",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("formula has no variables")]
    NoVariables,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    pub clause_var_ratio: f64,
    pub frac_binary: f64,
    pub frac_horn: f64,
    pub posneg_var_max: f64,
    pub posneg_var_min: f64,
    pub posneg_var_mean: f64,
    pub posneg_var_std: f64,
    pub posneg_var_variation: f64,
    pub lpslack_mean: f64,
    pub lpslack_coeff_variation: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.clause_var_ratio,
            self.frac_binary,
            self.frac_horn,
            self.posneg_var_max,
            self.posneg_var_min,
            self.posneg_var_mean,
            self.posneg_var_std,
            self.posneg_var_variation,
            self.lpslack_mean,
            self.lpslack_coeff_variation,
        ]
    }

    pub fn from_array(a: [f64; NUM_FEATURES]) -> FeatureVector {
        FeatureVector {
            clause_var_ratio: a[0],
            frac_binary: a[1],
            frac_horn: a[2],
            posneg_var_max: a[3],
            posneg_var_min: a[4],
            posneg_var_mean: a[5],
            posneg_var_std: a[6],
            posneg_var_variation: a[7],
            lpslack_mean: a[8],
            lpslack_coeff_variation: a[9],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Features together with the status of the LP that produced features 9-10.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extraction {
    pub features: FeatureVector,
    pub lp_status: LpStatus,
}

pub fn extract_features(f: &Formula) -> Result<FeatureVector, FeatureError> {
    analyze(f).map(|e| e.features)
}

/// Like [`extract_features`], but also tells whether the LP was infeasible,
/// in which case the formula is unsatisfiable.
pub fn analyze(f: &Formula) -> Result<Extraction, FeatureError> {
    if f.num_vars() == 0 {
        return Err(FeatureError::NoVariables);
    }
    if f.num_clauses() == 0 {
        return Ok(Extraction {
            features: FeatureVector::default(),
            lp_status: LpStatus::Optimal,
        });
    }
    let mut lp = ClauseLp::new(f);
    lp.optimize();
    Ok(compute(f, |var| lp_value(&lp, var)))
}

fn lp_value(lp: &ClauseLp, var: Var) -> Option<f64> {
    match lp.status() {
        LpStatus::Optimal => Some(lp.value(var)),
        LpStatus::Infeasible => None,
    }
}

/// Features of `f` (at least one clause), with LP values supplied per
/// variable of `f`; `None` means the LP is infeasible.
fn compute(f: &Formula, lp_value: impl Fn(Var) -> Option<f64>) -> Extraction {
    let n = f.num_vars() as usize;
    let mut pos = vec![0u32; n];
    let mut neg = vec![0u32; n];
    let mut binary = 0usize;
    let mut horn = 0usize;
    for clause in f.clauses() {
        if clause.len() == 2 {
            binary += 1;
        }
        if clause.num_positive() <= 1 {
            horn += 1;
        }
        for lit in clause.lits() {
            if lit.is_positive() {
                pos[lit.var().offset()] += 1;
            } else {
                neg[lit.var().offset()] += 1;
            }
        }
    }

    let occurring: Vec<usize> = (0..n).filter(|&i| pos[i] + neg[i] > 0).collect();
    let balance: Vec<f64> = occurring
        .iter()
        .map(|&i| {
            let p = f64::from(pos[i]);
            let total = p + f64::from(neg[i]);
            2.0 * (0.5 - p / total).abs()
        })
        .collect();
    let bal = Summary::of(&balance);

    let mut slack = Vec::with_capacity(occurring.len());
    let mut lp_status = LpStatus::Optimal;
    for &i in &occurring {
        match lp_value(Var::from_offset(i)) {
            Some(x) => slack.push(x.min(1.0 - x).max(0.0)),
            None => {
                lp_status = LpStatus::Infeasible;
                break;
            }
        }
    }
    let (slack_mean, slack_cv) = match lp_status {
        LpStatus::Optimal => {
            let s = Summary::of(&slack);
            (s.mean, s.variation)
        }
        LpStatus::Infeasible => (0.0, 0.0),
    };

    let clauses = f.num_clauses() as f64;
    Extraction {
        features: FeatureVector {
            clause_var_ratio: clauses / occurring.len() as f64,
            frac_binary: binary as f64 / clauses,
            frac_horn: horn as f64 / clauses,
            posneg_var_max: bal.max,
            posneg_var_min: bal.min,
            posneg_var_mean: bal.mean,
            posneg_var_std: bal.std,
            posneg_var_variation: bal.variation,
            lpslack_mean: slack_mean,
            lpslack_coeff_variation: slack_cv,
        },
        lp_status,
    }
}

struct Summary {
    max: f64,
    min: f64,
    mean: f64,
    std: f64,
    variation: f64,
}

impl Summary {
    fn of(xs: &[f64]) -> Summary {
        if xs.is_empty() {
            return Summary {
                max: 0.0,
                min: 0.0,
                mean: 0.0,
                std: 0.0,
                variation: 0.0,
            };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let std = libm::sqrt(var);
        Summary {
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            std,
            variation: if mean > 0.0 { std / mean } else { 0.0 },
        }
    }
}
