//! Paired benchmark: the default all-false polarity against hinted polarity
//! on the same satisfiable instances, with identical solver settings.
//!
//! Every instance is first solved once (untimed) to drop unsatisfiable ones.
//! Each kept instance is then solved four times: default and hinted, each with
//! phase saving on and off. The conflict delta of an instance is
//! `(default - hinted) / default` in percent; instances where the default run
//! has no conflicts are excluded from the mean and from the win-rate, and
//! counted separately.
//!
//! Wall-clock times go to a separate [`Timing`] table so that the main
//! report is a deterministic function of its inputs.

use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use mcsat_core::backbone::{compute_backbone, hint_accuracy};
use mcsat_core::cdcl::{solve, PolarityMode, SolveResult, SolverConfig, Verdict};
use mcsat_core::cnf::Formula;
use mcsat_core::logit::LogisticModel;
use mcsat_core::polarity::{compute_hints, McConfig, PolarityHints};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::formats::FormatError;

/// Published figures for 300-variable instances: mean conflict decrease and
/// share of instances where hinted polarity beat the default.
pub const REFERENCE_MEAN_DELTA_PCT: f64 = 23.0;
pub const REFERENCE_WIN_RATE_PCT: f64 = 55.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    /// Hints from Monte-Carlo preprocessing with a trained model.
    MonteCarlo,
    /// Hints set to a model of the instance.
    Oracle,
    /// The default configuration compared with itself.
    SelfCompare,
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMode::MonteCarlo => "mc",
            BenchMode::Oracle => "oracle",
            BenchMode::SelfCompare => "self",
        })
    }
}

impl FromStr for BenchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mc" => Ok(BenchMode::MonteCarlo),
            "oracle" => Ok(BenchMode::Oracle),
            "self" => Ok(BenchMode::SelfCompare),
            _ => Err(format!("unknown mode `{s}` (expected mc, oracle or self)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub mode: BenchMode,
    pub mc: McConfig,
    /// Shared by every run; the polarity mode and phase saving are set per run.
    pub solver: SolverConfig,
    pub backbone: bool,
}

pub struct Instance {
    pub id: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// A run hit the conflict budget; the row is left out of the aggregates.
    BudgetExhausted,
}

/// Conflicts of the default and the hinted run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub default: u64,
    pub hints: u64,
}

impl Pair {
    pub fn delta_pct(&self) -> Option<f64> {
        (self.default > 0).then(|| (self.default as f64 - self.hints as f64) / self.default as f64 * 100.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub id: String,
    pub status: RowStatus,
    pub phase_saving: Pair,
    pub no_phase_saving: Pair,
    /// (matched, backbone size) when the backbone was computed.
    pub backbone: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub id: String,
    pub preprocessing_ms: f64,
    pub default_ms: f64,
    pub hints_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub timings: Vec<Timing>,
    /// Instances dropped because the filtering solve proved them unsatisfiable.
    pub excluded_unsat: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("monte-carlo mode needs a model")]
    MissingModel,
    #[error("instance {id}: {message}")]
    Instance { id: String, message: String },
}

fn instance_error(id: &str, e: impl fmt::Display) -> BenchError {
    BenchError::Instance {
        id: id.to_string(),
        message: e.to_string(),
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn run_benchmark(
    instances: &[Instance],
    model: Option<&LogisticModel>,
    cfg: &BenchConfig,
    mut progress: impl FnMut(&str, usize),
) -> Result<BenchReport, BenchError> {
    if cfg.mode == BenchMode::MonteCarlo && model.is_none() {
        return Err(BenchError::MissingModel);
    }
    let default_cfg = SolverConfig {
        polarity_mode: PolarityMode::AlwaysFalse,
        ..cfg.solver
    };
    let mut report = BenchReport {
        rows: Vec::new(),
        timings: Vec::new(),
        excluded_unsat: Vec::new(),
    };
    for (done, inst) in instances.iter().enumerate() {
        let f = &inst.formula;
        let first = solve(f, &default_cfg, None).map_err(|e| instance_error(&inst.id, e))?;
        let model_found = match first.verdict {
            Verdict::Unsat => {
                report.excluded_unsat.push(inst.id.clone());
                progress(&inst.id, done + 1);
                continue;
            }
            Verdict::BudgetExhausted => {
                report.rows.push(BenchRow {
                    id: inst.id.clone(),
                    status: RowStatus::BudgetExhausted,
                    phase_saving: Pair { default: 0, hints: 0 },
                    no_phase_saving: Pair { default: 0, hints: 0 },
                    backbone: None,
                });
                progress(&inst.id, done + 1);
                continue;
            }
            Verdict::Sat => first.model.expect("SAT carries a model"),
        };

        let t = Instant::now();
        let hints = match cfg.mode {
            BenchMode::MonteCarlo => Some(
                compute_hints(model.expect("checked above"), f, &cfg.mc).map_err(|e| instance_error(&inst.id, e))?,
            ),
            BenchMode::Oracle => Some(PolarityHints::from_assignment(&model_found)),
            BenchMode::SelfCompare => None,
        };
        let preprocessing_ms = ms(t);

        let run = |phase_saving: bool, hinted: bool| -> Result<(SolveResult, f64), BenchError> {
            let mut c = SolverConfig {
                phase_saving,
                ..default_cfg
            };
            let h = if hinted { hints.as_ref() } else { None };
            if h.is_some() {
                c.polarity_mode = PolarityMode::Hints;
            }
            let t = Instant::now();
            let r = solve(f, &c, h).map_err(|e| instance_error(&inst.id, e))?;
            Ok((r, ms(t)))
        };
        let (d, default_ms) = run(true, false)?;
        let (h, hints_ms) = run(true, true)?;
        let (dn, _) = run(false, false)?;
        let (hn, _) = run(false, true)?;
        let exhausted = [&d, &h, &dn, &hn]
            .iter()
            .any(|r| r.verdict == Verdict::BudgetExhausted);

        let backbone = if cfg.backbone && !exhausted {
            let report = compute_backbone(f, &default_cfg).map_err(|e| instance_error(&inst.id, e))?;
            let scored = hints
                .clone()
                .unwrap_or_else(|| PolarityHints::from_assignment(&vec![false; f.num_vars() as usize]));
            let score = hint_accuracy(&scored, &report).map_err(|e| instance_error(&inst.id, e))?;
            Some((score.matched, score.backbone_size))
        } else {
            None
        };

        report.rows.push(BenchRow {
            id: inst.id.clone(),
            status: if exhausted {
                RowStatus::BudgetExhausted
            } else {
                RowStatus::Ok
            },
            phase_saving: Pair {
                default: d.stats.conflicts,
                hints: h.stats.conflicts,
            },
            no_phase_saving: Pair {
                default: dn.stats.conflicts,
                hints: hn.stats.conflicts,
            },
            backbone,
        });
        report.timings.push(Timing {
            id: inst.id.clone(),
            preprocessing_ms,
            default_ms,
            hints_ms,
        });
        progress(&inst.id, done + 1);
    }
    Ok(report)
}

/// Mean delta and win-rate over one family of paired runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairSummary {
    /// Rows with a positive default conflict count.
    pub compared: usize,
    /// Rows excluded because the default run had no conflicts.
    pub zero_default: usize,
    pub mean_delta_pct: Option<f64>,
    pub win_rate_pct: Option<f64>,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl PairSummary {
    fn of<'a>(pairs: impl Iterator<Item = &'a Pair>) -> PairSummary {
        let mut s = PairSummary::default();
        let mut sum = 0.0;
        for p in pairs {
            let Some(delta) = p.delta_pct() else {
                s.zero_default += 1;
                continue;
            };
            s.compared += 1;
            sum += delta;
            match p.hints.cmp(&p.default) {
                std::cmp::Ordering::Less => s.wins += 1,
                std::cmp::Ordering::Equal => s.ties += 1,
                std::cmp::Ordering::Greater => s.losses += 1,
            }
        }
        if s.compared > 0 {
            s.mean_delta_pct = Some(sum / s.compared as f64);
            s.win_rate_pct = Some(s.wins as f64 / s.compared as f64 * 100.0);
        }
        s
    }
}

/// Backbone-setting accuracy across instances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BackboneSummary {
    /// Instances with a nonempty backbone.
    pub instances: usize,
    pub matched: usize,
    pub backbone_vars: usize,
    /// `matched / backbone_vars`.
    pub micro_accuracy: Option<f64>,
    /// Mean of per-instance accuracies over nonempty backbones.
    pub macro_accuracy: Option<f64>,
    /// One-sided binomial p-value of `matched` against coin flips.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub rows: usize,
    pub flagged: usize,
    pub phase_saving: PairSummary,
    pub no_phase_saving: PairSummary,
    pub backbone: Option<BackboneSummary>,
}

/// `P(X >= k)` for `X ~ Binomial(n, p)`.
pub fn binomial_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    Binomial::new(p, n).expect("p in [0, 1]").sf(k - 1)
}

pub fn aggregate(rows: &[BenchRow]) -> Aggregates {
    let ok: Vec<&BenchRow> = rows.iter().filter(|r| r.status == RowStatus::Ok).collect();
    let with_backbone: Vec<(usize, usize)> = ok.iter().filter_map(|r| r.backbone).collect();
    let backbone = (!with_backbone.is_empty()).then(|| {
        let nonempty: Vec<&(usize, usize)> = with_backbone.iter().filter(|(_, size)| *size > 0).collect();
        let matched: usize = nonempty.iter().map(|(m, _)| m).sum();
        let size: usize = nonempty.iter().map(|(_, s)| s).sum();
        BackboneSummary {
            instances: nonempty.len(),
            matched,
            backbone_vars: size,
            micro_accuracy: (size > 0).then(|| matched as f64 / size as f64),
            macro_accuracy: (!nonempty.is_empty())
                .then(|| nonempty.iter().map(|(m, s)| *m as f64 / *s as f64).sum::<f64>() / nonempty.len() as f64),
            p_value: (size > 0).then(|| binomial_upper_tail(matched as u64, size as u64, 0.5)),
        }
    });
    Aggregates {
        rows: rows.len(),
        flagged: rows.len() - ok.len(),
        phase_saving: PairSummary::of(ok.iter().map(|r| &r.phase_saving)),
        no_phase_saving: PairSummary::of(ok.iter().map(|r| &r.no_phase_saving)),
        backbone,
    }
}

const CSV_HEADER: [&str; 11] = [
    "id",
    "status",
    "conflicts_default",
    "conflicts_hints",
    "delta_pct",
    "conflicts_default_nops",
    "conflicts_hints_nops",
    "delta_nops_pct",
    "backbone_size",
    "backbone_matched",
    "backbone_accuracy",
];

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_rows_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let status = match r.status {
            RowStatus::Ok => "ok",
            RowStatus::BudgetExhausted => "budget_exhausted",
        };
        let (size, matched) = match r.backbone {
            Some((m, s)) => (Some(s), Some(m)),
            None => (None, None),
        };
        let accuracy = r.backbone.and_then(|(m, s)| (s > 0).then(|| m as f64 / s as f64));
        w.write_record([
            r.id.clone(),
            status.to_string(),
            r.phase_saving.default.to_string(),
            r.phase_saving.hints.to_string(),
            opt(r.phase_saving.delta_pct()),
            r.no_phase_saving.default.to_string(),
            r.no_phase_saving.hints.to_string(),
            opt(r.no_phase_saving.delta_pct()),
            opt(size),
            opt(matched),
            opt(accuracy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows_csv<R: Read>(input: R) -> Result<Vec<BenchRow>, FormatError> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(CSV_HEADER) {
        return Err(FormatError::Invalid("unexpected bench header".into()));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let bad = |what: &str| FormatError::Syntax {
            line,
            message: format!("bad {what}"),
        };
        let int = |k: usize| record[k].parse::<u64>().map_err(|_| bad(CSV_HEADER[k]));
        let status = match &record[1] {
            "ok" => RowStatus::Ok,
            "budget_exhausted" => RowStatus::BudgetExhausted,
            _ => return Err(bad("status")),
        };
        let backbone = if record[8].is_empty() {
            None
        } else {
            Some((int(9)? as usize, int(8)? as usize))
        };
        rows.push(BenchRow {
            id: record[0].to_string(),
            status,
            phase_saving: Pair {
                default: int(2)?,
                hints: int(3)?,
            },
            no_phase_saving: Pair {
                default: int(5)?,
                hints: int(6)?,
            },
            backbone,
        });
    }
    Ok(rows)
}

pub fn write_timings_csv<W: Write>(timings: &[Timing], out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "preprocessing_ms", "runtime_default_ms", "runtime_hints_ms"])?;
    for t in timings {
        w.write_record([
            t.id.clone(),
            format!("{:.3}", t.preprocessing_ms),
            format!("{:.3}", t.default_ms),
            format!("{:.3}", t.hints_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable `key value` summary. `header` lines (settings) come first.
pub fn write_summary(report: &BenchReport, header: &[(&str, String)]) -> String {
    let a = aggregate(&report.rows);
    let mut out = String::new();
    for (k, v) in header {
        writeln!(out, "{k} {v}").unwrap();
    }
    writeln!(out, "instances {}", a.rows + report.excluded_unsat.len()).unwrap();
    writeln!(out, "excluded_unsat {}", report.excluded_unsat.len()).unwrap();
    writeln!(out, "flagged_budget {}", a.flagged).unwrap();
    let fmt_opt = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "n/a".into());
    for (suffix, s) in [("", &a.phase_saving), ("_no_phase_saving", &a.no_phase_saving)] {
        writeln!(out, "compared{suffix} {}", s.compared).unwrap();
        writeln!(out, "zero_conflict_default{suffix} {}", s.zero_default).unwrap();
        writeln!(out, "mean_conflict_delta_pct{suffix} {}", fmt_opt(s.mean_delta_pct)).unwrap();
        writeln!(out, "win_rate_pct{suffix} {}", fmt_opt(s.win_rate_pct)).unwrap();
        writeln!(out, "wins_ties_losses{suffix} {} {} {}", s.wins, s.ties, s.losses).unwrap();
    }
    if let Some(b) = a.backbone {
        writeln!(out, "backbone_instances {}", b.instances).unwrap();
        writeln!(out, "backbone_matched {} of {}", b.matched, b.backbone_vars).unwrap();
        writeln!(out, "backbone_micro_accuracy {}", fmt_opt(b.micro_accuracy)).unwrap();
        writeln!(out, "backbone_macro_accuracy {}", fmt_opt(b.macro_accuracy)).unwrap();
        writeln!(
            out,
            "backbone_binomial_p {}",
            b.p_value.map(|p| format!("{p:.3e}")).unwrap_or_else(|| "n/a".into())
        )
        .unwrap();
    }
    writeln!(
        out,
        "reference_mean_conflict_delta_pct {REFERENCE_MEAN_DELTA_PCT} (published, 300-variable instances)"
    )
    .unwrap();
    writeln!(out, "reference_win_rate_pct {REFERENCE_WIN_RATE_PCT} (published, 300-variable instances)").unwrap();
    out
}
