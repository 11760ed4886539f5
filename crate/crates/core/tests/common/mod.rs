#![allow(dead_code)]

use mcsat_core::cnf::{generate_random_3cnf, Formula};

/// Every satisfying assignment of `f`, by exhaustive enumeration.
pub fn all_models(f: &Formula) -> Vec<Vec<bool>> {
    let n = f.num_vars() as usize;
    assert!(n <= 20, "enumeration is exponential");
    (0u32..1 << n)
        .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|m| f.is_satisfied_by(m))
        .collect()
}

pub fn is_satisfiable(f: &Formula) -> bool {
    let n = f.num_vars() as usize;
    (0u32..1 << n).any(|bits| {
        let m: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        f.is_satisfied_by(&m)
    })
}

/// Random 3-CNF at clause/variable ratio 4.3.
pub fn random_instance(num_vars: u32, seed: u64) -> Formula {
    let clauses = (4.3 * f64::from(num_vars)).round() as usize;
    generate_random_3cnf(num_vars, clauses, seed).unwrap()
}
