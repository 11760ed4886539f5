//! LP relaxation of a CNF formula.
//!
//! ```text
//! maximize    Σ x_i
//! subject to  Σ_{i ∈ pos(c)} x_i + Σ_{i ∈ neg(c)} (1 - x_i) >= 1   for every clause c
//!             0 <= x_i <= 1
//! ```
//!
//! [`ClauseLp`] is a dense-dictionary dual simplex over bounded variables. The
//! start point puts every structural variable at its upper bound, which is dual
//! feasible because every objective coefficient is +1, so no phase one is
//! needed.
//!
//! Clause rows are generated lazily: the dictionary only holds rows of basic
//! structural variables and of clauses that were violated at some point. After
//! each dual simplex pass every inactive clause is checked at the current
//! point and the violated ones are added as cuts. Clauses left with a strictly
//! positive slack are dropped again once optimal, which keeps the tableau
//! small (a few dozen rows on random 3-CNF rather than one per clause).
//!
//! The leaving row is the most violated one, with a long-step ratio test that
//! flips boxed columns past their breakpoints. After a stall budget of pivots
//! the rule switches for good to Bland's smallest-index rule, which
//! guarantees termination.

use alloc::vec;
use alloc::vec::Vec;

use crate::cnf::{Clause, Formula, Var};

const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
/// Basic slacks above this are dropped from the dictionary once optimal.
const PURGE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// One value per variable of the formula (by offset), in `[0, 1]`.
    /// Empty when infeasible.
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves the clause-coverage LP of `f` from scratch.
pub fn solve_lp_relaxation(f: &Formula) -> LpSolution {
    let mut lp = ClauseLp::new(f);
    lp.optimize();
    lp.solution()
}

/// Left-hand side minus right-hand side of a clause constraint at `x`.
pub fn constraint_slack(clause: &Clause, x: &[f64]) -> f64 {
    clause
        .lits()
        .iter()
        .map(|l| {
            let v = x[l.var().offset()];
            if l.is_positive() {
                v
            } else {
                1.0 - v
            }
        })
        .sum::<f64>()
        - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Basic(u32),
    Nonbasic(u32),
    /// A clause slack whose row is not in the dictionary.
    Inactive,
}

/// `Σ coef·x_var >= rhs`.
#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(u32, f64)>,
    rhs: f64,
}

/// Simplex state for one formula. Variables `0..n` are the structural `x`,
/// `n..n+m` the clause slacks `s_c = lhs_c - rhs_c >= 0`.
#[derive(Debug, Clone)]
pub struct ClauseLp {
    n: usize,
    constraints: Vec<Row>,
    /// Dictionary, row-major with stride `n`: entry `(i, k)` is
    /// d x_{basic[i]} / d x_{nonbasic[k]}.
    tab: Vec<f64>,
    /// Reduced costs d z / d x_{nonbasic[k]}.
    cost: Vec<f64>,
    basic: Vec<u32>,
    basic_value: Vec<f64>,
    nonbasic: Vec<u32>,
    nonbasic_value: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    slot: Vec<Slot>,
    infeasible: bool,
    pivots: usize,
    scratch: Vec<f64>,
}

impl ClauseLp {
    pub fn new(f: &Formula) -> ClauseLp {
        let n = f.num_vars() as usize;
        let m = f.num_clauses();
        let constraints: Vec<Row> = f
            .clauses()
            .iter()
            .map(|clause| {
                let mut neg = 0.0;
                let terms = clause
                    .lits()
                    .iter()
                    .map(|lit| {
                        if lit.is_positive() {
                            (lit.var().offset() as u32, 1.0)
                        } else {
                            neg += 1.0;
                            (lit.var().offset() as u32, -1.0)
                        }
                    })
                    .collect();
                Row { terms, rhs: 1.0 - neg }
            })
            .collect();
        let lower = vec![0.0; n + m];
        let mut upper = vec![1.0; n];
        upper.extend(core::iter::repeat(f64::INFINITY).take(m));
        let slot = (0..n)
            .map(|k| Slot::Nonbasic(k as u32))
            .chain((0..m).map(|_| Slot::Inactive))
            .collect();
        ClauseLp {
            n,
            constraints,
            tab: Vec::new(),
            cost: vec![1.0; n],
            basic: Vec::new(),
            basic_value: Vec::new(),
            nonbasic: (0..n as u32).collect(),
            nonbasic_value: vec![1.0; n],
            lower,
            upper,
            slot,
            infeasible: false,
            pivots: 0,
            scratch: Vec::new(),
        }
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn raw_value(&self, j: usize) -> f64 {
        match self.slot[j] {
            Slot::Basic(i) => self.basic_value[i as usize],
            Slot::Nonbasic(k) => self.nonbasic_value[k as usize],
            Slot::Inactive => unreachable!("only clause slacks can be inactive"),
        }
    }

    /// Current value of a structural variable.
    pub fn value(&self, var: Var) -> f64 {
        self.raw_value(var.offset()).clamp(0.0, 1.0)
    }

    pub fn status(&self) -> LpStatus {
        if self.infeasible {
            LpStatus::Infeasible
        } else {
            LpStatus::Optimal
        }
    }

    pub fn solution(&self) -> LpSolution {
        if self.infeasible {
            return LpSolution {
                values: Vec::new(),
                objective: 0.0,
                status: LpStatus::Infeasible,
                pivots: self.pivots,
            };
        }
        let values: Vec<f64> = (0..self.n).map(|j| self.value(Var::from_offset(j))).collect();
        LpSolution {
            objective: values.iter().sum(),
            values,
            status: LpStatus::Optimal,
            pivots: self.pivots,
        }
    }

    fn rows(&self) -> usize {
        self.basic.len()
    }

    fn entry(&self, i: usize, k: usize) -> f64 {
        self.tab[i * self.n + k]
    }

    fn shift_nonbasic(&mut self, k: usize, delta: f64) {
        self.nonbasic_value[k] += delta;
        for i in 0..self.rows() {
            let a = self.tab[i * self.n + k];
            if a != 0.0 {
                self.basic_value[i] += a * delta;
            }
        }
    }

    fn violation(&self, i: usize) -> f64 {
        let v = self.basic_value[i];
        let var = self.basic[i] as usize;
        if v < self.lower[var] - FEAS_TOL {
            self.lower[var] - v
        } else if v > self.upper[var] + FEAS_TOL {
            v - self.upper[var]
        } else {
            0.0
        }
    }

    fn leaving_row(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows() {
            let viol = self.violation(i);
            if viol == 0.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, bv)) => {
                    if bland {
                        self.basic[i] < self.basic[b]
                    } else {
                        viol > bv || (viol == bv && self.basic[i] < self.basic[b])
                    }
                }
            };
            if better {
                best = Some((i, viol));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Dual ratio test on row `r`. Returns the entering column and the
    /// boxed columns whose breakpoints are passed; those get flipped to their
    /// opposite bound instead of entering (long-step ratio test). Bland mode
    /// never flips and picks the smallest index among the minimum ratios.
    fn entering_col(&self, r: usize, increase: bool, bland: bool, flips: &mut Vec<usize>) -> Option<usize> {
        flips.clear();
        let row = &self.tab[r * self.n..(r + 1) * self.n];
        let mut candidates: Vec<(f64, f64, usize)> = Vec::new();
        for (k, &a) in row.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let var = self.nonbasic[k] as usize;
            let x = self.nonbasic_value[k];
            let can_up = x < self.upper[var];
            let can_down = x > self.lower[var];
            // The move must push the leaving variable toward its violated bound.
            let eligible = if increase {
                (a > 0.0 && can_up) || (a < 0.0 && can_down)
            } else {
                (a < 0.0 && can_up) || (a > 0.0 && can_down)
            };
            if eligible {
                candidates.push((self.cost[k].abs() / a.abs(), a.abs(), k));
            }
        }
        if candidates.is_empty() {
            return None;
        }
        let tie = |x: &(f64, f64, usize), y: &(f64, f64, usize)| {
            if bland {
                self.nonbasic[x.2].cmp(&self.nonbasic[y.2])
            } else {
                y.1.total_cmp(&x.1).then(self.nonbasic[x.2].cmp(&self.nonbasic[y.2]))
            }
        };
        if bland {
            let min = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
            return candidates
                .iter()
                .filter(|c| c.0 <= min + 1e-12)
                .min_by(|x, y| tie(x, y))
                .map(|c| c.2);
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| tie(x, y)));
        let mut slope = self.violation(r);
        for &(_, a, k) in &candidates {
            let nb = self.nonbasic[k] as usize;
            let range = self.upper[nb] - self.lower[nb];
            if !range.is_finite() || slope - a * range <= FEAS_TOL {
                return Some(k);
            }
            slope -= a * range;
            flips.push(k);
        }
        // Every candidate flipped and the row is still infeasible.
        flips.clear();
        None
    }

    fn flip(&mut self, k: usize) {
        let var = self.nonbasic[k] as usize;
        let target = if self.nonbasic_value[k] == self.lower[var] {
            self.upper[var]
        } else {
            self.lower[var]
        };
        self.shift_nonbasic(k, target - self.nonbasic_value[k]);
    }

    fn pivot(&mut self, r: usize, q: usize, target: f64) {
        let n = self.n;
        let p = self.entry(r, q);
        let step = (target - self.basic_value[r]) / p;
        let entering_value = self.nonbasic_value[q] + step;

        for i in 0..self.rows() {
            if i != r {
                let a = self.entry(i, q);
                if a != 0.0 {
                    self.basic_value[i] += a * step;
                }
            }
        }

        let mut pivot_row = core::mem::take(&mut self.scratch);
        pivot_row.clear();
        pivot_row.extend_from_slice(&self.tab[r * n..(r + 1) * n]);
        for v in pivot_row.iter_mut() {
            *v = -*v / p;
        }
        pivot_row[q] = 1.0 / p;
        self.tab[r * n..(r + 1) * n].copy_from_slice(&pivot_row);

        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let row = &mut self.tab[i * n..(i + 1) * n];
            let factor = row[q];
            if factor != 0.0 {
                axpy(row, factor, &pivot_row);
                row[q] = factor * pivot_row[q];
            }
        }
        let factor = self.cost[q];
        if factor != 0.0 {
            axpy(&mut self.cost, factor, &pivot_row);
            self.cost[q] = factor * pivot_row[q];
        }
        self.scratch = pivot_row;

        let leaving = self.basic[r];
        let entering = self.nonbasic[q];
        self.basic[r] = entering;
        self.basic_value[r] = entering_value;
        self.nonbasic[q] = leaving;
        self.nonbasic_value[q] = target;
        self.slot[entering as usize] = Slot::Basic(r as u32);
        self.slot[leaving as usize] = Slot::Nonbasic(q as u32);
        self.pivots += 1;
    }

    /// Adds the row of clause `c`, whose slack becomes basic.
    fn activate(&mut self, c: usize) {
        let n = self.n;
        let terms = self.constraints[c].terms.clone();
        let start = self.tab.len();
        self.tab.resize(start + n, 0.0);
        let mut value = -self.constraints[c].rhs;
        for &(j, coef) in &terms {
            let j = j as usize;
            value += coef * self.raw_value(j);
            match self.slot[j] {
                Slot::Nonbasic(k) => self.tab[start + k as usize] += coef,
                Slot::Basic(i) => {
                    let src = i as usize * n;
                    for k in 0..n {
                        let a = self.tab[src + k];
                        if a != 0.0 {
                            self.tab[start + k] += coef * a;
                        }
                    }
                }
                Slot::Inactive => unreachable!("structural variables are always active"),
            }
        }
        let row = self.rows() as u32;
        self.basic.push((n + c) as u32);
        self.basic_value.push(value);
        self.slot[n + c] = Slot::Basic(row);
    }

    /// Activates every inactive clause violated at the current point.
    fn separate(&mut self) -> bool {
        let mut added = false;
        for c in 0..self.constraints.len() {
            if self.slot[self.n + c] != Slot::Inactive {
                continue;
            }
            let con = &self.constraints[c];
            let lhs: f64 = con.terms.iter().map(|&(j, coef)| coef * self.raw_value(j as usize)).sum();
            if lhs < con.rhs - FEAS_TOL {
                self.activate(c);
                added = true;
            }
        }
        added
    }

    /// Drops the rows of clause slacks that are comfortably positive.
    fn purge(&mut self) {
        let n = self.n;
        let mut i = 0;
        while i < self.rows() {
            let var = self.basic[i] as usize;
            if var >= n && self.basic_value[i] > PURGE_TOL {
                let last = self.rows() - 1;
                if i != last {
                    self.tab.copy_within(last * n..(last + 1) * n, i * n);
                    self.basic.swap(i, last);
                    self.basic_value.swap(i, last);
                    self.slot[self.basic[i] as usize] = Slot::Basic(i as u32);
                }
                self.tab.truncate(last * n);
                self.basic.pop();
                self.basic_value.pop();
                self.slot[var] = Slot::Inactive;
            } else {
                i += 1;
            }
        }
    }

    /// Runs the dual simplex until the current bounds and every clause are
    /// met or shown infeasible.
    pub fn optimize(&mut self) -> LpStatus {
        if self.infeasible {
            return LpStatus::Infeasible;
        }
        let stall_budget = 4 * (self.n + self.constraints.len()) + 100;
        let mut iterations = 0;
        let mut flips = Vec::new();
        loop {
            let bland = iterations >= stall_budget;
            let Some(r) = self.leaving_row(bland) else {
                if self.separate() {
                    continue;
                }
                self.purge();
                return LpStatus::Optimal;
            };
            let var = self.basic[r] as usize;
            let increase = self.basic_value[r] < self.lower[var];
            let target = if increase { self.lower[var] } else { self.upper[var] };
            let Some(q) = self.entering_col(r, increase, bland, &mut flips) else {
                self.infeasible = true;
                return LpStatus::Infeasible;
            };
            for i in 0..flips.len() {
                self.flip(flips[i]);
            }
            self.pivot(r, q, target);
            iterations += 1;
        }
    }
}

/// `y += a·x`, flushing entries that cancel to round-off.
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (y, &x) in y.iter_mut().zip(x) {
        let v = *y + a * x;
        *y = if v.abs() < DROP_TOL { 0.0 } else { v };
    }
}
