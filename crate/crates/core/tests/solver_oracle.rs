//! The CDCL solver and backbone computation checked against exhaustive
//! enumeration.

mod common;

use common::{all_models, is_satisfiable, random_instance};
use mcsat_core::backbone::{compute_backbone, BackboneStatus};
use mcsat_core::cdcl::{check_model, solve, PolarityMode, Solver, SolverConfig, Verdict};
use mcsat_core::cnf::{Clause, Formula};
use mcsat_core::polarity::PolarityHints;

fn configs() -> Vec<SolverConfig> {
    let base = SolverConfig::default();
    vec![
        base,
        SolverConfig { phase_saving: false, ..base },
        // Tiny restart and reduction limits exercise those code paths on
        // small formulas.
        SolverConfig {
            luby_base: 1,
            reduce_first: 2,
            reduce_increment: 1,
            keep_lbd: 0,
            ..base
        },
        SolverConfig {
            random_var_freq: 0.3,
            seed: 5,
            ..base
        },
    ]
}

#[test]
fn verdicts_match_enumeration() {
    let mut sat = 0;
    for seed in 0..400u64 {
        let f = random_instance(4 + (seed % 9) as u32, seed);
        let expected = is_satisfiable(&f);
        sat += expected as usize;
        for cfg in configs() {
            let r = solve(&f, &cfg, None).unwrap();
            assert_eq!(r.verdict == Verdict::Sat, expected, "seed {seed}, {cfg:?}");
            assert_ne!(r.verdict, Verdict::BudgetExhausted);
            if let Some(m) = &r.model {
                assert!(check_model(&f, m).unwrap());
            }
        }
    }
    // Small formulas at ratio 4.3 are mostly, but not all, satisfiable.
    assert!((40..380).contains(&sat), "{sat} satisfiable");
}

#[test]
fn hinted_solves_agree() {
    for seed in 0..200u64 {
        let f = random_instance(10, 1000 + seed);
        let expected = is_satisfiable(&f);
        let phases: Vec<bool> = (0..10).map(|i| (seed >> (i % 8)) & 1 == 1).collect();
        let hints = PolarityHints::from_assignment(&phases);
        let cfg = SolverConfig::default().with_hints();
        assert_eq!(cfg.polarity_mode, PolarityMode::Hints);
        let r = solve(&f, &cfg, Some(&hints)).unwrap();
        assert_eq!(r.verdict == Verdict::Sat, expected);
    }
}

#[test]
fn learned_clauses_are_implied() {
    for seed in 0..150u64 {
        let f = random_instance(11, 7000 + seed);
        let models = all_models(&f);
        let cfg = SolverConfig {
            reduce_first: 1_000_000,
            ..SolverConfig::default()
        };
        let mut solver = Solver::new(&f, &cfg, None).unwrap();
        solver.run();
        for learned in solver.learned_clauses() {
            // Implied: every model of f satisfies it.
            for m in &models {
                assert!(learned.is_satisfied_by(m), "seed {seed}: {learned:?}");
            }
        }
    }
}

#[test]
fn unsat_core_shapes() {
    let contradiction = Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
    assert_eq!(solve(&contradiction, &SolverConfig::default(), None).unwrap().verdict, Verdict::Unsat);

    // All eight sign patterns over three variables.
    let mut clauses = Vec::new();
    for bits in 0..8i64 {
        let lits: Vec<i64> = (0..3).map(|i| if bits >> i & 1 == 1 { i + 1 } else { -(i + 1) }).collect();
        clauses.push(Clause::from_dimacs(&lits).unwrap());
    }
    let full = Formula::new(3, clauses).unwrap();
    let r = solve(&full, &SolverConfig::default(), None).unwrap();
    assert_eq!(r.verdict, Verdict::Unsat);
    assert!(r.model.is_none());
}

#[test]
fn backbone_matches_enumeration() {
    let mut checked = 0;
    let mut nonempty = 0;
    let mut seed = 0u64;
    while checked < 150 {
        let f = random_instance(5 + (seed % 8) as u32, 50_000 + seed);
        seed += 1;
        let models = all_models(&f);
        if models.is_empty() {
            assert!(compute_backbone(&f, &SolverConfig::default()).is_err());
            continue;
        }
        let report = compute_backbone(&f, &SolverConfig::default()).unwrap();
        for v in 0..f.num_vars() as usize {
            let always_true = models.iter().all(|m| m[v]);
            let always_false = models.iter().all(|m| !m[v]);
            let expected = match (always_true, always_false) {
                (true, _) => BackboneStatus::True,
                (_, true) => BackboneStatus::False,
                _ => BackboneStatus::Free,
            };
            assert_eq!(report.statuses[v], expected, "seed {}, var {}", seed - 1, v + 1);
        }
        nonempty += (report.size() > 0) as usize;
        checked += 1;
    }
    assert!(nonempty > 20);
}

#[test]
fn model_hints_need_no_conflicts() {
    let mut tested = 0;
    for seed in 0..60u64 {
        let f = random_instance(60, 90_000 + seed);
        let r = solve(&f, &SolverConfig::default(), None).unwrap();
        let Some(model) = r.model else { continue };
        let hints = PolarityHints::from_assignment(&model);
        let again = solve(&f, &SolverConfig::default().with_hints(), Some(&hints)).unwrap();
        assert_eq!(again.verdict, Verdict::Sat);
        assert_eq!(again.stats.conflicts, 0, "seed {seed}");
        tested += 1;
    }
    assert!(tested > 5);
}
