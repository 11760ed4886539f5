//! Monte-Carlo choice of initial branching polarities.
//!
//! To score a literal, it is asserted and the formula simplified. Each trial
//! then fixes a random `n%` of the variables still occurring in that residual
//! to random values, simplifies again, and asks the classifier how likely the
//! result is to be satisfiable. A variable's hint is the value whose literal
//! has the higher mean score, with ties going to `false`.
//!
//! Trial seeds are [`derive_seed`]`(root_seed, [variable, sign, trial])`, so
//! scores do not depend on evaluation order.

use alloc::vec::Vec;

use rand::Rng as _;

use crate::cnf::{apply_assignment, Formula, Lit, PartialAssignment, SimplifyOutcome, Var};
use crate::features::{self, LpStatus};
use crate::logit::{predict_proba, LogisticModel};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum McError {
    #[error("fix percent must lie in [0, 100]")]
    BadFixPercent,
    #[error("at least one trial per literal is required")]
    NoTrials,
    #[error("variable {0} does not occur in the formula")]
    VariableAbsent(u32),
    #[error("hint entry for variable {0} disagrees with its scores")]
    InconsistentHint(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Percentage of occurring variables fixed per trial.
    pub fix_percent: f64,
    pub trials: u32,
    pub root_seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            fix_percent: 4.0,
            trials: 100,
            root_seed: 0,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<(), McError> {
        if !(0.0..=100.0).contains(&self.fix_percent) {
            return Err(McError::BadFixPercent);
        }
        if self.trials == 0 {
            return Err(McError::NoTrials);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HintEntry {
    pub value: bool,
    pub mean_false: f64,
    pub mean_true: f64,
}

impl HintEntry {
    /// Entry whose value is the argmax of the two means, `false` on ties.
    pub fn from_scores(mean_false: f64, mean_true: f64) -> HintEntry {
        HintEntry {
            value: mean_true > mean_false,
            mean_false,
            mean_true,
        }
    }
}

/// One preferred value per formula variable, with the scores behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarityHints {
    entries: Vec<HintEntry>,
}

impl PolarityHints {
    /// Validates that every entry's value is the argmax of its means.
    pub fn new(entries: Vec<HintEntry>) -> Result<PolarityHints, McError> {
        for (i, e) in entries.iter().enumerate() {
            if e.value != (e.mean_true > e.mean_false) {
                return Err(McError::InconsistentHint(i as u32 + 1));
            }
        }
        Ok(PolarityHints { entries })
    }

    /// Hints that follow a fixed assignment, with scores 1 for the chosen
    /// value and 0 for the other.
    pub fn from_assignment(values: &[bool]) -> PolarityHints {
        PolarityHints {
            entries: values
                .iter()
                .map(|&v| {
                    if v {
                        HintEntry::from_scores(0.0, 1.0)
                    } else {
                        HintEntry::from_scores(1.0, 0.0)
                    }
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[HintEntry] {
        &self.entries
    }

    pub fn get(&self, var: Var) -> Option<&HintEntry> {
        self.entries.get(var.offset())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn choices(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

/// Number of variables fixed out of `count` at `percent`, rounded down.
pub fn fixed_count(percent: f64, count: usize) -> usize {
    let exact = percent * count as f64 / 100.0;
    // Absorb representation error such as 28.999999999999996.
    libm::floor(exact + 1e-9) as usize
}

/// Picks `k` distinct entries of `pool` uniformly and gives each a fair-coin
/// value. Draw order: for each pick, an index then a sign.
pub fn random_fixing(pool: &[Var], k: usize, seed: u64) -> PartialAssignment {
    let mut rng = rng_from_seed(seed);
    let mut pool = pool.to_vec();
    let mut a = PartialAssignment::new();
    for i in 0..k.min(pool.len()) {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
        a.assign(pool[i], rng.gen::<bool>());
    }
    a
}

/// One Monte-Carlo trial on `f`.
///
/// 1 if the random fixing satisfies every clause, 0 if it empties a clause or
/// the residual's LP relaxation is infeasible, otherwise the model's
/// probability for the residual.
pub fn trial_score(model: &LogisticModel, f: &Formula, fix_percent: f64, trial_seed: u64) -> f64 {
    let pool = f.occurring_vars();
    let k = fixed_count(fix_percent, pool.len());
    let fixing = random_fixing(&pool, k, trial_seed);
    let residual = match apply_assignment(f, &fixing).expect("fixing stays within the formula") {
        SimplifyOutcome::Satisfied => return 1.0,
        SimplifyOutcome::Conflict => return 0.0,
        SimplifyOutcome::Residual(r) => r,
    };
    let e = features::analyze(&residual.formula).expect("residual has variables");
    if e.lp_status == LpStatus::Infeasible {
        return 0.0;
    }
    predict_proba(model, &e.features).expect("features are finite")
}

/// Seed of trial `trial` for the literal `lit`.
pub fn trial_seed(root_seed: u64, lit: Lit, trial: u32) -> u64 {
    derive_seed(
        root_seed,
        &[u64::from(lit.var().index()), lit.is_positive() as u64, u64::from(trial)],
    )
}

/// Mean trial score after asserting `lit`.
pub fn score_literal(
    model: &LogisticModel,
    f: &Formula,
    lit: Lit,
    cfg: &McConfig,
) -> Result<f64, McError> {
    cfg.validate()?;
    let var = lit.var();
    if var.index() > f.num_vars() || !f.occurrence_mask()[var.offset()] {
        return Err(McError::VariableAbsent(var.index()));
    }
    Ok(score_occurring_literal(model, f, lit, cfg))
}

fn score_occurring_literal(model: &LogisticModel, f: &Formula, lit: Lit, cfg: &McConfig) -> f64 {
    let mut asserted = PartialAssignment::with_capacity(f.num_vars());
    asserted.assign_lit(lit);
    let residual = match apply_assignment(f, &asserted).expect("literal is in range") {
        SimplifyOutcome::Satisfied => return 1.0,
        SimplifyOutcome::Conflict => return 0.0,
        SimplifyOutcome::Residual(r) => r,
    };
    let mut sum = 0.0;
    for t in 0..cfg.trials {
        sum += trial_score(model, &residual.formula, cfg.fix_percent, trial_seed(cfg.root_seed, lit, t));
    }
    sum / f64::from(cfg.trials)
}

/// Runs the Monte-Carlo preprocessing for every variable of `f`.
///
/// Variables that occur in no clause get `false` with means `(0.5, 0.5)`.
pub fn compute_hints(
    model: &LogisticModel,
    f: &Formula,
    cfg: &McConfig,
) -> Result<PolarityHints, McError> {
    compute_hints_with(model, f, cfg, |_, _| {})
}

/// [`compute_hints`] with a callback invoked after each variable, receiving
/// the variable and the number of variables done so far.
pub fn compute_hints_with(
    model: &LogisticModel,
    f: &Formula,
    cfg: &McConfig,
    mut progress: impl FnMut(Var, usize),
) -> Result<PolarityHints, McError> {
    cfg.validate()?;
    let occurs = f.occurrence_mask();
    let mut entries = Vec::with_capacity(f.num_vars() as usize);
    for (done, var) in f.vars().enumerate() {
        let entry = if occurs[var.offset()] {
            let mean_true = score_occurring_literal(model, f, var.lit(true), cfg);
            let mean_false = score_occurring_literal(model, f, var.lit(false), cfg);
            HintEntry::from_scores(mean_false, mean_true)
        } else {
            HintEntry::from_scores(0.5, 0.5)
        };
        entries.push(entry);
        progress(var, done + 1);
    }
    Ok(PolarityHints { entries })
}
