//! Instance generation, labelled dataset construction and the train/test
//! split.
//!
//! Base instance `i` of a spec is `generate_random_3cnf` seeded with
//! `derive_seed(seed, [0, i])`; its variant for the `j`-th fix percentage fixes
//! variables with seed `derive_seed(seed, [1, i, j])`. The `gen` command uses
//! the same instance seeds, so a corpus and a dataset built from one spec
//! describe the same formulae.

use mcsat_core::cdcl::{solve, SolverConfig, Verdict};
use mcsat_core::cnf::{self, apply_assignment, generate_random_3cnf, Formula, SimplifyOutcome, Var};
use mcsat_core::features::{self, FeatureVector};
use mcsat_core::logit::{Dataset, Provenance, Row};
use mcsat_core::polarity::{fixed_count, random_fixing};
use mcsat_core::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub num_instances: usize,
    pub num_vars: u32,
    pub clause_var_ratio: f64,
    pub fix_percents: Vec<f64>,
    pub seed: u64,
    /// Conflicts allowed when labelling one row; rows that exceed it are
    /// dropped and counted.
    pub label_conflict_budget: Option<u64>,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            num_instances: 2000,
            num_vars: 150,
            clause_var_ratio: 4.26,
            fix_percents: vec![0.0, 2.0, 4.0],
            seed: 0,
            label_conflict_budget: Some(1_000_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("at least 3 variables are required, got {0}")]
    TooFewVariables(u32),
    #[error("clause/variable ratio must be positive and finite")]
    BadRatio,
    #[error("fix percentage {0} is outside [0, 100]")]
    BadFixPercent(f64),
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.num_vars < 3 {
            return Err(SpecError::TooFewVariables(self.num_vars));
        }
        if !(self.clause_var_ratio > 0.0 && self.clause_var_ratio.is_finite()) {
            return Err(SpecError::BadRatio);
        }
        if let Some(&p) = self.fix_percents.iter().find(|p| !(0.0..=100.0).contains(*p)) {
            return Err(SpecError::BadFixPercent(p));
        }
        Ok(())
    }

    pub fn num_clauses(&self) -> usize {
        cnf::clauses_for_ratio(self.num_vars, self.clause_var_ratio)
    }

    pub fn instance_seed(&self, instance: usize) -> u64 {
        derive_seed(self.seed, &[0, instance as u64])
    }

    pub fn fixing_seed(&self, instance: usize, percent_index: usize) -> u64 {
        derive_seed(self.seed, &[1, instance as u64, percent_index as u64])
    }

    pub fn instance(&self, instance: usize) -> Formula {
        generate_random_3cnf(self.num_vars, self.num_clauses(), self.instance_seed(instance))
            .expect("spec was validated")
    }
}

/// Name of instance `i` in a generated corpus.
pub fn instance_name(i: usize) -> String {
    format!("inst_{i:05}")
}

/// Rows of held-out instances: every fifth instance id.
pub fn is_test_instance(instance: u64) -> bool {
    instance % 5 == 4
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetBuild {
    pub dataset: Dataset,
    /// Rows whose labelling solve ran out of conflicts.
    pub dropped: usize,
    /// Rows whose fixing falsified a clause (label 0, zero features).
    pub conflicts: usize,
    /// Rows whose fixing satisfied every clause (label 1, zero features).
    pub satisfied: usize,
}

/// Builds one row per (instance, fix percentage), in that order.
pub fn build_dataset(spec: &GenSpec) -> Result<DatasetBuild, SpecError> {
    build_dataset_with(spec, |_| {})
}

/// [`build_dataset`] with a callback after each base instance, receiving the
/// number of instances done.
pub fn build_dataset_with(spec: &GenSpec, mut progress: impl FnMut(usize)) -> Result<DatasetBuild, SpecError> {
    spec.validate()?;
    let solver = SolverConfig {
        conflict_budget: spec.label_conflict_budget,
        ..SolverConfig::default()
    };
    let all_vars: Vec<Var> = (1..=spec.num_vars).map(|i| Var::new(i).unwrap()).collect();
    let mut build = DatasetBuild::default();
    for i in 0..spec.num_instances {
        let f = spec.instance(i);
        for (j, &percent) in spec.fix_percents.iter().enumerate() {
            let seed = spec.fixing_seed(i, j);
            let fixing = random_fixing(&all_vars, fixed_count(percent, all_vars.len()), seed);
            let provenance = Provenance {
                instance: i as u64,
                seed,
                fix_percent: percent,
            };
            let sentinel = |label| Row {
                features: FeatureVector::default(),
                label,
                provenance,
            };
            let row = match apply_assignment(&f, &fixing).expect("fixing uses the formula's own variables") {
                SimplifyOutcome::Conflict => {
                    build.conflicts += 1;
                    sentinel(false)
                }
                SimplifyOutcome::Satisfied => {
                    build.satisfied += 1;
                    sentinel(true)
                }
                SimplifyOutcome::Residual(r) => {
                    let label = match solve(&r.formula, &solver, None).expect("default polarity").verdict {
                        Verdict::Sat => true,
                        Verdict::Unsat => false,
                        Verdict::BudgetExhausted => {
                            build.dropped += 1;
                            continue;
                        }
                    };
                    Row {
                        features: features::extract_features(&r.formula).expect("residual has variables"),
                        label,
                        provenance,
                    }
                }
            };
            build.dataset.rows.push(row);
        }
        progress(i + 1);
    }
    Ok(build)
}

/// Splits rows by instance id into (train, test).
pub fn split_by_instance(d: &Dataset) -> (Dataset, Dataset) {
    (
        d.filter(|r| !is_test_instance(r.provenance.instance)),
        d.filter(|r| is_test_instance(r.provenance.instance)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenSpec {
        GenSpec {
            num_instances: 10,
            num_vars: 10,
            fix_percents: vec![0.0, 20.0],
            ..GenSpec::default()
        }
    }

    #[test]
    fn validation() {
        assert!(small().validate().is_ok());
        assert_eq!(
            GenSpec { num_vars: 2, ..small() }.validate(),
            Err(SpecError::TooFewVariables(2))
        );
        assert_eq!(
            GenSpec {
                clause_var_ratio: 0.0,
                ..small()
            }
            .validate(),
            Err(SpecError::BadRatio)
        );
        assert_eq!(
            GenSpec {
                fix_percents: vec![101.0],
                ..small()
            }
            .validate(),
            Err(SpecError::BadFixPercent(101.0))
        );
    }

    #[test]
    fn unfixed_rows_have_no_binary_clauses() {
        let build = build_dataset(&GenSpec {
            fix_percents: vec![0.0],
            ..small()
        })
        .unwrap();
        assert_eq!(build.dataset.len(), 10);
        assert!(build.dataset.rows.iter().all(|r| r.features.frac_binary == 0.0));
    }

    #[test]
    fn deterministic() {
        assert_eq!(build_dataset(&small()).unwrap(), build_dataset(&small()).unwrap());
    }

    #[test]
    fn split_is_by_instance() {
        let d = build_dataset(&small()).unwrap().dataset;
        let (train, test) = split_by_instance(&d);
        assert_eq!(train.len() + test.len(), d.len());
        assert!(test.rows.iter().all(|r| r.provenance.instance % 5 == 4));
        assert_eq!(test.len(), 4);
    }
}
