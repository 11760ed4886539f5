//! Conflict-driven clause learning.
//!
//! Two watched literals with blockers, VSIDS branching (ties go to the lowest
//! variable index), first-UIP learning with local minimization, Luby restarts
//! and LBD-aware clause database reduction.
//!
//! The branching polarity is chosen in this order:
//! 1. the saved phase, when phase saving is on and the variable was assigned before;
//! 2. the hint, in [`PolarityMode::Hints`];
//! 3. `false`.
//!
//! Step 3 alone is the classic Minisat default.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::cnf::{Clause, Formula, Lit, Var};
use crate::polarity::PolarityHints;
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarityMode {
    AlwaysFalse,
    Hints,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub polarity_mode: PolarityMode,
    pub phase_saving: bool,
    /// VSIDS decay factor, in (0, 1).
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Conflicts per Luby unit.
    pub luby_base: u64,
    /// Learned clauses allowed before the first reduction.
    pub reduce_first: usize,
    /// Growth of that limit per reduction.
    pub reduce_increment: usize,
    /// Learned clauses with LBD at or below this survive every reduction.
    pub keep_lbd: u32,
    pub conflict_budget: Option<u64>,
    /// Probability of a random decision variable. 0 disables randomness.
    pub random_var_freq: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            polarity_mode: PolarityMode::AlwaysFalse,
            phase_saving: true,
            var_decay: 0.95,
            clause_decay: 0.999,
            luby_base: 100,
            reduce_first: 4000,
            reduce_increment: 1000,
            keep_lbd: 2,
            conflict_budget: None,
            random_var_freq: 0.0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_hints(mut self) -> Self {
        self.polarity_mode = PolarityMode::Hints;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("hints cover {got} variables but the formula has {expected}")]
    HintsMismatch { expected: usize, got: usize },
    #[error("polarity mode is hints but no hints were given")]
    MissingHints,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("model covers {got} variables but the formula has {expected}")]
    IncompleteModel { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Sat,
    Unsat,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
    pub reductions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    /// Total assignment indexed by variable offset, present iff SAT.
    pub model: Option<Vec<bool>>,
    pub stats: Stats,
}

/// Solves `f`. In hints mode the hints must cover every variable.
pub fn solve(
    f: &Formula,
    cfg: &SolverConfig,
    hints: Option<&PolarityHints>,
) -> Result<SolveResult, SolveError> {
    let phases = hints.map(PolarityHints::choices);
    solve_with_phases(f, cfg, phases.as_deref())
}

/// Like [`solve`], with hints given as one preferred value per variable.
pub fn solve_with_phases(
    f: &Formula,
    cfg: &SolverConfig,
    phases: Option<&[bool]>,
) -> Result<SolveResult, SolveError> {
    let mut solver = Solver::new(f, cfg, phases)?;
    Ok(solver.run())
}

/// True iff every clause of `f` has a literal satisfied by `model`.
pub fn check_model(f: &Formula, model: &[bool]) -> Result<bool, SolveError> {
    if model.len() < f.num_vars() as usize {
        return Err(SolveError::IncompleteModel {
            expected: f.num_vars() as usize,
            got: model.len(),
        });
    }
    Ok(f.is_satisfied_by(model))
}

/// Index of a clause inside the solver's clause store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseRef(u32);

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

#[derive(Debug)]
struct StoredClause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

/// Binary max-heap over variables keyed by activity, lowest index first on ties.
#[derive(Debug, Default)]
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarOrder {
    fn new(n: usize) -> VarOrder {
        let mut order = VarOrder {
            heap: Vec::with_capacity(n),
            pos: vec![None; n],
        };
        // Equal activities: index order is already a valid heap.
        for v in 0..n {
            order.pos[v] = Some(v);
            order.heap.push(v as u32);
        }
        order
    }

    #[inline]
    fn before(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn sift_up(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::before(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn sift_down(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && Self::before(act, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !Self::before(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn insert(&mut self, act: &[f64], v: usize) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v as u32);
        let i = self.heap.len() - 1;
        self.pos[v] = Some(i);
        self.sift_up(act, i);
    }

    fn increased(&mut self, act: &[f64], v: usize) {
        if let Some(i) = self.pos[v] {
            self.sift_up(act, i);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.sift_down(act, 0);
        }
        Some(top as usize)
    }
}

/// Minisat's Luby sequence value for restart number `x` (0-based).
pub fn luby(x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = x;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

pub struct Solver {
    cfg: SolverConfig,
    num_vars: usize,
    clauses: Vec<StoredClause>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarOrder,
    saved_phase: Vec<Option<bool>>,
    hints: Option<Vec<bool>>,
    seen: Vec<bool>,
    rng: Rng,
    stats: Stats,
    /// False once a level-0 conflict is known.
    ok: bool,
}

impl Solver {
    pub fn new(
        f: &Formula,
        cfg: &SolverConfig,
        phases: Option<&[bool]>,
    ) -> Result<Solver, SolveError> {
        if !(cfg.var_decay > 0.0 && cfg.var_decay < 1.0) {
            return Err(SolveError::InvalidConfig("var_decay must lie in (0, 1)"));
        }
        if cfg.luby_base == 0 {
            return Err(SolveError::InvalidConfig("luby_base must be at least 1"));
        }
        let n = f.num_vars() as usize;
        let hints = match (cfg.polarity_mode, phases) {
            (PolarityMode::Hints, None) => return Err(SolveError::MissingHints),
            (PolarityMode::Hints, Some(p)) if p.len() != n => {
                return Err(SolveError::HintsMismatch {
                    expected: n,
                    got: p.len(),
                })
            }
            (PolarityMode::Hints, Some(p)) => Some(p.to_vec()),
            (PolarityMode::AlwaysFalse, _) => None,
        };
        let mut solver = Solver {
            cfg: *cfg,
            num_vars: n,
            clauses: Vec::with_capacity(f.num_clauses()),
            learnts: Vec::new(),
            watches: (0..2 * n).map(|_| Vec::new()).collect(),
            assigns: vec![None; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarOrder::new(n),
            saved_phase: vec![None; n],
            hints,
            seen: vec![false; n],
            rng: rng_from_seed(cfg.seed),
            stats: Stats::default(),
            ok: true,
        };
        for clause in f.clauses() {
            solver.add_input_clause(clause);
        }
        Ok(solver)
    }

    fn add_input_clause(&mut self, clause: &Clause) {
        if !self.ok {
            return;
        }
        match clause.lits() {
            [] => self.ok = false,
            [unit] => match self.value(*unit) {
                Some(true) => {}
                Some(false) => self.ok = false,
                None => self.enqueue(*unit, None),
            },
            lits => {
                self.attach(lits.to_vec(), false, 0);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watcher { cref, blocker: lits[1] });
        self.watches[lits[1].code()].push(Watcher { cref, blocker: lits[0] });
        self.clauses.push(StoredClause {
            lits,
            learnt,
            deleted: false,
            lbd,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    #[inline]
    pub fn value(&self, lit: Lit) -> Option<bool> {
        self.assigns[lit.var().offset()].map(|v| lit.eval(v))
    }

    #[inline]
    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn level_of(&self, var: Var) -> Option<u32> {
        self.assigns[var.offset()].map(|_| self.level[var.offset()])
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn clause_lits(&self, c: ClauseRef) -> &[Lit] {
        &self.clauses[c.0 as usize].lits
    }

    /// Antecedent of an implied variable.
    pub fn reason_of(&self, var: Var) -> Option<ClauseRef> {
        self.reason[var.offset()].map(ClauseRef)
    }

    /// Learned clauses still in the database.
    pub fn learned_clauses(&self) -> Vec<Clause> {
        self.learnts
            .iter()
            .map(|&c| Clause::new(self.clauses[c as usize].lits.iter().copied()).unwrap())
            .collect()
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<u32>) {
        let v = lit.var().offset();
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(lit.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    /// Opens a new decision level and assigns `lit` there.
    pub fn decide(&mut self, lit: Lit) {
        self.trail_lim.push(self.trail.len());
        self.enqueue(lit, None);
    }

    /// Unit propagation to fixpoint. Returns the falsified clause, if any.
    pub fn propagate(&mut self) -> Option<ClauseRef> {
        if !self.ok {
            // Contradictory units at load time; `run` reports UNSAT itself.
            return None;
        }
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = core::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            'watchers: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                let lits = &mut self.clauses[cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let watcher = Watcher { cref: w.cref, blocker: first };
                if first != w.blocker && self.assigns[first.var().offset()].map(|v| first.eval(v)) == Some(true) {
                    ws[j] = watcher;
                    j += 1;
                    continue;
                }
                for k in 2..lits.len() {
                    let l = lits[k];
                    if self.assigns[l.var().offset()].map(|v| l.eval(v)) != Some(false) {
                        lits.swap(1, k);
                        self.watches[l.code()].push(watcher);
                        continue 'watchers;
                    }
                }
                ws[j] = watcher;
                j += 1;
                match self.value(first) {
                    Some(false) => {
                        conflict = Some(w.cref);
                        while i < ws.len() {
                            ws[j] = ws[i];
                            j += 1;
                            i += 1;
                        }
                    }
                    _ => self.enqueue(first, Some(w.cref)),
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if let Some(c) = conflict {
                self.qhead = self.trail.len();
                return Some(ClauseRef(c));
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(&self.activity, v);
    }

    fn bump_clause(&mut self, c: usize) {
        let cl = &mut self.clauses[c];
        cl.activity += self.cla_inc;
        if cl.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learned clause, with the
    /// asserting literal first and a literal of the backjump level second, and
    /// the backjump level.
    pub fn analyze(&mut self, conflict: ClauseRef) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        debug_assert!(current > 0);
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let mut confl = conflict.0 as usize;
        loop {
            if self.clauses[confl].learnt {
                self.bump_clause(confl);
            }
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].lits.len() {
                let q = self.clauses[confl].lits[k];
                let v = q.var().offset();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().offset()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var().offset()] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
            confl = self.reason[lit.var().offset()].expect("implied literal without reason") as usize;
        }
        learnt[0] = !p.unwrap();

        // Drop literals whose antecedent is covered by the rest of the clause.
        let marked: Vec<Lit> = learnt.clone();
        let mut kept = 1;
        for k in 1..learnt.len() {
            let q = learnt[k];
            let redundant = match self.reason[q.var().offset()] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|l| {
                    let v = l.var().offset();
                    self.seen[v] || self.level[v] == 0
                }),
            };
            if !redundant {
                learnt[kept] = q;
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in &marked {
            self.seen[l.var().offset()] = false;
        }

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().offset()] > self.level[learnt[best].var().offset()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            self.level[learnt[1].var().offset()]
        };

        debug_assert!(learnt.iter().all(|&l| self.value(l) == Some(false)));
        debug_assert_eq!(
            learnt
                .iter()
                .filter(|l| self.level[l.var().offset()] == current)
                .count(),
            1
        );
        (learnt, backjump)
    }

    fn lbd(&mut self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var().offset()]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    /// Undoes every assignment above `level`.
    pub fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let lit = self.trail[k];
            let v = lit.var().offset();
            if self.cfg.phase_saving {
                self.saved_phase[v] = Some(lit.is_positive());
            }
            self.assigns[v] = None;
            self.reason[v] = None;
            self.order.insert(&self.activity, v);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn locked(&self, cref: u32) -> bool {
        let lit = self.clauses[cref as usize].lits[0];
        self.value(lit) == Some(true) && self.reason[lit.var().offset()] == Some(cref)
    }

    fn reduce_db(&mut self) {
        let keep_lbd = self.cfg.keep_lbd;
        let mut candidates: Vec<u32> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| self.clauses[c as usize].lbd > keep_lbd && !self.locked(c))
            .collect();
        candidates.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            ca.activity
                .partial_cmp(&cb.activity)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let remove = candidates.len() / 2;
        for &c in &candidates[..remove] {
            let cl = &mut self.clauses[c as usize];
            cl.deleted = true;
            cl.lits = Vec::new();
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&c| !clauses[c as usize].deleted);
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
        self.stats.reductions += 1;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        let mut next: Option<usize> = None;
        if self.cfg.random_var_freq > 0.0
            && !self.order.heap.is_empty()
            && self.rng.gen::<f64>() < self.cfg.random_var_freq
        {
            let i = self.rng.gen_range(0..self.order.heap.len());
            let v = self.order.heap[i] as usize;
            if self.assigns[v].is_none() {
                next = Some(v);
            }
        }
        while next.is_none() {
            let v = self.order.pop(&self.activity)?;
            if self.assigns[v].is_none() {
                next = Some(v);
            }
        }
        let v = next.unwrap();
        let positive = match self.saved_phase[v] {
            Some(phase) if self.cfg.phase_saving => phase,
            _ => self.hints.as_ref().map(|h| h[v]).unwrap_or(false),
        };
        Some(Var::from_offset(v).lit(positive))
    }

    fn unsat(&self) -> SolveResult {
        SolveResult {
            verdict: Verdict::Unsat,
            model: None,
            stats: self.stats,
        }
    }

    /// Runs the search to completion or until the conflict budget is spent.
    pub fn run(&mut self) -> SolveResult {
        if !self.ok {
            return self.unsat();
        }
        let mut restart_index = 0u64;
        let mut restart_limit = luby(0) * self.cfg.luby_base;
        let mut since_restart = 0u64;
        let mut max_learnts = self.cfg.reduce_first;

        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return self.unsat();
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let lbd = self.lbd(&learnt);
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true, lbd);
                    self.bump_clause(cref as usize);
                    self.enqueue(asserting, Some(cref));
                }
                self.stats.learned += 1;
                self.var_inc /= self.cfg.var_decay;
                self.cla_inc /= self.cfg.clause_decay;
                if let Some(budget) = self.cfg.conflict_budget {
                    if self.stats.conflicts >= budget {
                        self.cancel_until(0);
                        return SolveResult {
                            verdict: Verdict::BudgetExhausted,
                            model: None,
                            stats: self.stats,
                        };
                    }
                }
            } else {
                if since_restart >= restart_limit {
                    self.cancel_until(0);
                    self.stats.restarts += 1;
                    restart_index += 1;
                    restart_limit = luby(restart_index) * self.cfg.luby_base;
                    since_restart = 0;
                }
                if self.learnts.len() >= max_learnts {
                    self.reduce_db();
                    max_learnts = self.cfg.reduce_first
                        + self.cfg.reduce_increment * self.stats.reductions as usize;
                }
                match self.pick_branch() {
                    None => {
                        let model: Vec<bool> =
                            self.assigns.iter().map(|v| v.expect("total assignment")).collect();
                        return SolveResult {
                            verdict: Verdict::Sat,
                            model: Some(model),
                            stats: self.stats,
                        };
                    }
                    Some(lit) => {
                        self.stats.decisions += 1;
                        self.decide(lit);
                    }
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(num_vars: u32, clauses: &[&[i64]]) -> Formula {
        Formula::from_dimacs_clauses(num_vars, clauses).unwrap()
    }

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn unit_chain_propagates() {
        let mut s = Solver::new(&f(2, &[&[1], &[-1, 2]]), &cfg(), None).unwrap();
        assert_eq!(s.propagate(), None);
        assert_eq!(s.value(lit(1)), Some(true));
        assert_eq!(s.value(lit(2)), Some(true));
        let r = s.reason_of(Var::new(2).unwrap()).unwrap();
        assert_eq!(s.clause_lits(r)[0], lit(2));
    }

    #[test]
    fn contradictory_units() {
        let r = solve(&f(1, &[&[1], &[-1]]), &cfg(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Unsat);
    }

    #[test]
    fn propagation_conflict_on_binary() {
        let mut s = Solver::new(&f(2, &[&[1, 2], &[1, -2]]), &cfg(), None).unwrap();
        assert_eq!(s.propagate(), None);
        s.decide(lit(-1));
        let c = s.propagate().expect("conflict");
        assert!(s.clause_lits(c).iter().all(|&l| s.value(l) == Some(false)));
    }

    #[test]
    fn nothing_to_propagate() {
        let mut s = Solver::new(&f(2, &[&[1, 2]]), &cfg(), None).unwrap();
        assert_eq!(s.propagate(), None);
        assert!(s.trail().is_empty());
    }

    #[test]
    fn first_uip_learns_unit() {
        let formula = f(4, &[&[1, 2], &[1, 3], &[-2, -3, 4], &[-2, -4]]);
        let mut s = Solver::new(&formula, &cfg(), None).unwrap();
        assert_eq!(s.propagate(), None);
        s.decide(lit(-1));
        let c = s.propagate().expect("conflict");
        let (learnt, level) = s.analyze(c);
        assert_eq!(learnt, [lit(1)]);
        assert_eq!(level, 0);
    }

    #[test]
    fn resolution_down_to_decision() {
        // x1@1, x2@2 ; (¬x1 ∨ ¬x2) conflicts with one level-2 literal.
        let formula = f(3, &[&[-1, -2, 3], &[-1, -2, -3]]);
        let mut s = Solver::new(&formula, &cfg(), None).unwrap();
        s.decide(lit(1));
        assert_eq!(s.propagate(), None);
        s.decide(lit(2));
        let c = s.propagate().expect("conflict");
        let before: Vec<Lit> = s.clause_lits(c).to_vec();
        let (learnt, level) = s.analyze(c);
        // x3 is the only implied literal; resolving it away leaves (¬x1 ∨ ¬x2).
        let mut got = learnt.clone();
        got.sort();
        let mut want = vec![lit(-1), lit(-2)];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(learnt[0], lit(-2));
        assert_eq!(level, 1);
        assert_eq!(before.len(), 3);
    }

    #[test]
    fn analysis_returns_clause_with_one_current_literal_unchanged() {
        // Decide x1@1 and x2@2 without propagating so that (¬x1 ∨ ¬x2) is
        // falsified with a single level-2 literal.
        let formula = f(2, &[&[-1, -2]]);
        let mut s = Solver::new(&formula, &cfg(), None).unwrap();
        s.decide(lit(1));
        s.decide(lit(2));
        let (learnt, level) = s.analyze(ClauseRef(0));
        assert_eq!(learnt, [lit(-2), lit(-1)]);
        assert_eq!(level, 1);
    }

    #[test]
    fn small_instances() {
        let r = solve(&f(1, &[&[1]]), &cfg(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert_eq!(r.model, Some(vec![true]));
        assert_eq!(r.stats.conflicts, 0);

        let f0 = f(4, &[&[1, 2, 4], &[-2, 3, -4], &[1, -3, -4]]);
        let r = solve(&f0, &cfg(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert!(check_model(&f0, r.model.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn check_model_examples() {
        let f0 = f(4, &[&[1, 2, 4], &[-2, 3, -4], &[1, -3, -4]]);
        assert!(check_model(&f0, &[true, false, false, false]).unwrap());
        assert!(!check_model(&f0, &[false; 4]).unwrap());
        assert!(check_model(&Formula::new(2, Vec::new()).unwrap(), &[false, true]).unwrap());
        assert!(check_model(&f0, &[true]).is_err());
    }

    #[test]
    fn hints_are_validated() {
        let f0 = f(2, &[&[1, 2]]);
        let c = cfg().with_hints();
        assert_eq!(solve_with_phases(&f0, &c, None), Err(SolveError::MissingHints));
        assert!(matches!(
            solve_with_phases(&f0, &c, Some(&[true])),
            Err(SolveError::HintsMismatch { expected: 2, got: 1 })
        ));
        let r = solve_with_phases(&f0, &c, Some(&[false, true])).unwrap();
        assert_eq!(r.model, Some(vec![false, true]));
        let r = solve_with_phases(&f0, &cfg(), None).unwrap();
        // x1=false decided first, x2 then forced true.
        assert_eq!(r.model, Some(vec![false, true]));
    }

    #[test]
    fn budget_is_honored() {
        let php = pigeonhole(6, 5);
        let c = SolverConfig { conflict_budget: Some(3), ..cfg() };
        let r = solve(&php, &c, None).unwrap();
        assert_eq!(r.verdict, Verdict::BudgetExhausted);
        assert_eq!(r.stats.conflicts, 3);
    }

    /// Pigeon `p` in hole `h` is variable `p * holes + h + 1`.
    pub(crate) fn pigeonhole(pigeons: u32, holes: u32) -> Formula {
        let var = |p: u32, h: u32| i64::from(p * holes + h + 1);
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for p in 0..pigeons {
            clauses.push((0..holes).map(|h| var(p, h)).collect());
        }
        for h in 0..holes {
            for a in 0..pigeons {
                for b in a + 1..pigeons {
                    clauses.push(vec![-var(a, h), -var(b, h)]);
                }
            }
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        Formula::from_dimacs_clauses(pigeons * holes, &refs).unwrap()
    }

    #[test]
    fn pigeonhole_is_unsat() {
        assert_eq!(solve(&pigeonhole(3, 2), &cfg(), None).unwrap().verdict, Verdict::Unsat);
        assert_eq!(solve(&pigeonhole(7, 6), &cfg(), None).unwrap().verdict, Verdict::Unsat);
    }
}
