//! Clause data model, random 3-CNF generation and simplification.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Not;

use rand::Rng as _;

use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CnfError {
    #[error("variable index must be at least 1")]
    ZeroVariable,
    #[error("variable {var} exceeds the declared {num_vars} variables")]
    VariableOutOfRange { var: u32, num_vars: u32 },
    #[error("clause contains both {0} and its negation")]
    Tautology(i64),
    #[error("empty clause")]
    EmptyClause,
    #[error("random 3-CNF needs at least 3 variables, got {0}")]
    TooFewVariables(u32),
}

/// A propositional variable, numbered from 1 as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Result<Var, CnfError> {
        if index == 0 {
            Err(CnfError::ZeroVariable)
        } else {
            Ok(Var(index))
        }
    }

    /// Builds a variable from a 0-based offset.
    #[inline]
    pub fn from_offset(offset: usize) -> Var {
        Var(offset as u32 + 1)
    }

    /// The 1-based DIMACS index.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    /// The 0-based offset, handy for indexing per-variable vectors.
    #[inline]
    pub fn offset(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable or its negation.
///
/// Encoded as `2 * offset + negated`, so a literal and its negation differ in
/// the lowest bit and literal codes can index watch lists directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(((var.0 - 1) << 1) | (!positive) as u32)
    }

    #[inline]
    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Parses a nonzero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Result<Lit, CnfError> {
        let index = u32::try_from(value.unsigned_abs()).map_err(|_| CnfError::VariableOutOfRange {
            var: u32::MAX,
            num_vars: 0,
        })?;
        Ok(Lit::new(Var::new(index)?, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let index = i64::from(self.var().0);
        if self.is_positive() {
            index
        } else {
            -index
        }
    }

    /// Truth value of the literal under a value for its variable.
    #[inline]
    pub fn eval(self, var_value: bool) -> bool {
        var_value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals with no repeats and no complementary pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a clause, merging repeated literals (first occurrence wins) and
    /// rejecting tautologies and empty input.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Result<Clause, CnfError> {
        let mut out: Vec<Lit> = Vec::with_capacity(3);
        for lit in lits {
            if out.contains(&!lit) {
                return Err(CnfError::Tautology(lit.var().0 as i64));
            }
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        if out.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        Ok(Clause { lits: out })
    }

    /// Builds a clause from DIMACS integers.
    pub fn from_dimacs(values: &[i64]) -> Result<Clause, CnfError> {
        let lits = values
            .iter()
            .map(|&v| Lit::from_dimacs(v))
            .collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits)
    }

    // Caller guarantees the clause invariants.
    pub(crate) fn from_vec_unchecked(lits: Vec<Lit>) -> Clause {
        Clause { lits }
    }

    #[inline]
    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn num_positive(&self) -> usize {
        self.lits.iter().filter(|l| l.is_positive()).count()
    }

    /// True iff some literal is satisfied by the total assignment `model`
    /// (indexed by variable offset).
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.lits.iter().any(|l| l.eval(model[l.var().offset()]))
    }
}

/// A CNF formula over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Formula, CnfError> {
        for clause in &clauses {
            for lit in clause.lits() {
                if lit.var().0 > num_vars {
                    return Err(CnfError::VariableOutOfRange {
                        var: lit.var().0,
                        num_vars,
                    });
                }
            }
        }
        Ok(Formula { num_vars, clauses })
    }

    /// Convenience constructor from DIMACS-style integer clauses.
    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i64]]) -> Result<Formula, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>, _>>()?;
        Formula::new(num_vars, clauses)
    }

    #[inline]
    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    #[inline]
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.num_vars).map(Var)
    }

    /// Per-variable flag telling whether the variable appears in some clause.
    pub fn occurrence_mask(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_vars as usize];
        for clause in &self.clauses {
            for lit in clause.lits() {
                seen[lit.var().offset()] = true;
            }
        }
        seen
    }

    /// Variables that appear in at least one clause, in increasing order.
    pub fn occurring_vars(&self) -> Vec<Var> {
        self.occurrence_mask()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| Var::from_offset(i))
            .collect()
    }

    /// Returns a copy with one more clause appended.
    pub fn with_clause(&self, clause: Clause) -> Result<Formula, CnfError> {
        let mut clauses = self.clauses.clone();
        clauses.push(clause);
        Formula::new(self.num_vars, clauses)
    }

    /// Evaluates the formula under a total assignment indexed by offset.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied_by(model))
    }
}

/// Truth values for some of a formula's variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    values: Vec<Option<bool>>,
}

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    pub fn with_capacity(num_vars: u32) -> PartialAssignment {
        PartialAssignment {
            values: vec![None; num_vars as usize],
        }
    }

    /// Sets `var` to `value`, replacing any previous value.
    pub fn assign(&mut self, var: Var, value: bool) {
        let offset = var.offset();
        if offset >= self.values.len() {
            self.values.resize(offset + 1, None);
        }
        self.values[offset] = Some(value);
    }

    /// Makes `lit` true.
    pub fn assign_lit(&mut self, lit: Lit) {
        self.assign(lit.var(), lit.is_positive());
    }

    #[inline]
    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.offset()).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (Var::from_offset(i), b)))
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn max_assigned(&self) -> Option<Var> {
        self.values
            .iter()
            .rposition(Option::is_some)
            .map(Var::from_offset)
    }
}

impl FromIterator<(Var, bool)> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        let mut a = PartialAssignment::new();
        for (var, value) in iter {
            a.assign(var, value);
        }
        a
    }
}

/// The formula left after simplification, renumbered densely.
///
/// Residual variable `i` (1-based) corresponds to original variable
/// `var_map[i - 1]`; the map is increasing in the original index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    pub formula: Formula,
    pub var_map: Vec<Var>,
}

impl Residual {
    pub fn original(&self, var: Var) -> Var {
        self.var_map[var.offset()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplifyOutcome {
    Satisfied,
    Conflict,
    Residual(Residual),
}

/// Removes satisfied clauses and falsified literals.
///
/// No unit propagation happens here: unit clauses are kept as they are.
pub fn apply_assignment(
    f: &Formula,
    a: &PartialAssignment,
) -> Result<SimplifyOutcome, CnfError> {
    if let Some(var) = a.max_assigned() {
        if var.0 > f.num_vars {
            return Err(CnfError::VariableOutOfRange {
                var: var.0,
                num_vars: f.num_vars,
            });
        }
    }

    let mut kept: Vec<Vec<Lit>> = Vec::with_capacity(f.clauses.len());
    let mut renumber: Vec<u32> = vec![0; f.num_vars as usize];
    'clauses: for clause in &f.clauses {
        let mut lits = Vec::with_capacity(clause.len());
        for &lit in clause.lits() {
            match a.get(lit.var()) {
                Some(value) if lit.eval(value) => continue 'clauses,
                Some(_) => {}
                None => lits.push(lit),
            }
        }
        if lits.is_empty() {
            return Ok(SimplifyOutcome::Conflict);
        }
        for lit in &lits {
            renumber[lit.var().offset()] = 1;
        }
        kept.push(lits);
    }
    if kept.is_empty() {
        return Ok(SimplifyOutcome::Satisfied);
    }

    let mut var_map = Vec::new();
    for (offset, slot) in renumber.iter_mut().enumerate() {
        if *slot != 0 {
            var_map.push(Var::from_offset(offset));
            *slot = var_map.len() as u32;
        }
    }
    let clauses = kept
        .into_iter()
        .map(|lits| {
            Clause::from_vec_unchecked(
                lits.into_iter()
                    .map(|l| Lit::new(Var(renumber[l.var().offset()]), l.is_positive()))
                    .collect(),
            )
        })
        .collect();
    Ok(SimplifyOutcome::Residual(Residual {
        formula: Formula {
            num_vars: var_map.len() as u32,
            clauses,
        },
        var_map,
    }))
}

/// Clause count for a clause/variable ratio, rounded to nearest.
pub fn clauses_for_ratio(num_vars: u32, ratio: f64) -> usize {
    libm::round(ratio * f64::from(num_vars)) as usize
}

/// Uniform random 3-CNF: each clause draws three distinct variables uniformly
/// and negates each with probability 1/2. Duplicate clauses may occur.
///
/// The result is a pure function of the arguments; randomness comes from
/// [`crate::rng::rng_from_seed`].
pub fn generate_random_3cnf(
    num_vars: u32,
    num_clauses: usize,
    seed: u64,
) -> Result<Formula, CnfError> {
    if num_vars < 3 {
        return Err(CnfError::TooFewVariables(num_vars));
    }
    let mut rng = rng_from_seed(seed);
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let mut vars = [0u32; 3];
        let mut filled = 0;
        while filled < 3 {
            let v = rng.gen_range(1..=num_vars);
            if !vars[..filled].contains(&v) {
                vars[filled] = v;
                filled += 1;
            }
        }
        let lits = vars
            .iter()
            .map(|&v| Lit::new(Var(v), rng.gen::<bool>()))
            .collect();
        clauses.push(Clause::from_vec_unchecked(lits));
    }
    Ok(Formula { num_vars, clauses })
}
