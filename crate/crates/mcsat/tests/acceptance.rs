//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Criteria 1-4, 8 and the harness gates of 7 are properties of the code and
//! make the run fail. Criteria 5 and 6 are statistical reproduction targets:
//! they are measured and reported as PASS or FAIL but do not fail the run.
//!
//! `MCSAT_ACCEPTANCE=1,3` restricts the run to the listed criteria.

use std::cell::OnceCell;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use mcsat::bench::{self, BenchConfig, BenchMode, Instance, RowStatus};
use mcsat::pipeline::{self, GenSpec};
use mcsat_core::backbone::{compute_backbone, hint_accuracy, BackboneStatus};
use mcsat_core::cdcl::{check_model, solve, SolverConfig, Verdict};
use mcsat_core::cnf::{generate_random_3cnf, Formula};
use mcsat_core::features::FeatureVector;
use mcsat_core::logit::{self, loss_and_gradient, predict_proba, Dataset, LogisticModel, Provenance, Row, TrainConfig, NUM_PARAMS};
use mcsat_core::polarity::{compute_hints, McConfig, PolarityHints};
use mcsat_core::rng::{derive_seed, rng_from_seed};
use rand::Rng;

const SEED: u64 = 20_240_601;
/// Trials per literal for the backbone-score run.
const BACKBONE_TRIALS: u32 = 20;
/// Trials per literal for the Monte-Carlo conflict benchmark at 150 variables.
const BENCH_TRIALS: u32 = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_instance(num_vars: u32, ratio: f64, seed: u64) -> Formula {
    let clauses = (ratio * f64::from(num_vars)).round() as usize;
    generate_random_3cnf(num_vars, clauses, seed).unwrap()
}

fn all_models(f: &Formula) -> Vec<Vec<bool>> {
    let n = f.num_vars() as usize;
    (0u32..1 << n)
        .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|m| f.is_satisfied_by(m))
        .collect()
}

fn solver_soundness() -> Outcome {
    let t = Instant::now();
    let (mut agree, mut sat, mut models_ok) = (0, 0, 0);
    const N: usize = 600;
    for i in 0..N {
        let n = 4 + (i % 9) as u32;
        let f = random_instance(n, 4.3, derive_seed(SEED, &[1, i as u64]));
        let expected = !all_models(&f).is_empty();
        let r = solve(&f, &SolverConfig::default(), None).unwrap();
        agree += ((r.verdict == Verdict::Sat) == expected && r.verdict != Verdict::BudgetExhausted) as usize;
        if let Some(m) = &r.model {
            sat += 1;
            models_ok += check_model(&f, m).unwrap() as usize;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        agree == N && models_ok == sat && secs < 60.0,
        format!("{agree}/{N} verdicts agree with enumeration, {models_ok}/{sat} models check, {secs:.1}s"),
    )
}

fn backbone_equivalence() -> Outcome {
    let t = Instant::now();
    let (mut checked, mut exact, mut nonempty) = (0, 0, 0);
    let mut i = 0u64;
    while checked < 250 {
        let f = random_instance(4 + (i % 9) as u32, 4.3, derive_seed(SEED, &[2, i]));
        i += 1;
        let models = all_models(&f);
        if models.is_empty() {
            continue;
        }
        let report = compute_backbone(&f, &SolverConfig::default()).unwrap();
        let matches = (0..f.num_vars() as usize).all(|v| {
            let expected = if models.iter().all(|m| m[v]) {
                BackboneStatus::True
            } else if models.iter().all(|m| !m[v]) {
                BackboneStatus::False
            } else {
                BackboneStatus::Free
            };
            report.statuses[v] == expected
        });
        exact += matches as usize;
        nonempty += (report.size() > 0) as usize;
        checked += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        exact == checked && secs < 120.0,
        format!("{exact}/{checked} satisfiable instances match enumeration ({nonempty} with nonempty backbone), {secs:.1}s"),
    )
}

fn gradient_check() -> Outcome {
    const H: f64 = 1e-5;
    let mut rng = rng_from_seed(derive_seed(SEED, &[3]));
    let mut worst: f64 = 0.0;
    let mut ok = 0;
    for _ in 0..100 {
        let rows: Vec<Row> = (0..rng.gen_range(5..80))
            .map(|i| Row {
                features: FeatureVector::from_array(std::array::from_fn(|_| rng.gen_range(-3.0..3.0))),
                label: rng.gen(),
                provenance: Provenance {
                    instance: i,
                    seed: 0,
                    fix_percent: 0.0,
                },
            })
            .collect();
        let d = Dataset::new(rows);
        let mut m = LogisticModel::zero();
        m.standardizer = logit::fit_standardizer(&d).unwrap();
        m.set_params(&std::array::from_fn(|_| rng.gen_range(-2.0..2.0)));
        let lambda = rng.gen_range(0.0..0.1);
        let (_, grad) = loss_and_gradient(&m, &d, lambda).unwrap();
        let p = m.params();
        let mut draw_worst: f64 = 0.0;
        for j in 0..NUM_PARAMS {
            let loss_at = |delta: f64| {
                let mut q = p;
                q[j] += delta;
                let mut shifted = m.clone();
                shifted.set_params(&q);
                loss_and_gradient(&shifted, &d, lambda).unwrap().0
            };
            let numeric = (loss_at(H) - loss_at(-H)) / (2.0 * H);
            // Relative to the larger magnitude, with an absolute floor for
            // components that are essentially zero.
            let rel = (numeric - grad[j]).abs() / grad[j].abs().max(numeric.abs()).max(1e-3);
            draw_worst = draw_worst.max(rel);
        }
        worst = worst.max(draw_worst);
        ok += (draw_worst <= 1e-5) as usize;
    }
    outcome(ok == 100, format!("{ok}/100 draws within 1e-5, worst relative error {worst:.2e}"))
}

fn zero_conflict_hints() -> Outcome {
    let (mut tested, mut zero) = (0, 0);
    let mut i = 0u64;
    while tested < 100 {
        let f = random_instance(100, 4.26, derive_seed(SEED, &[4, i]));
        i += 1;
        let Some(model) = solve(&f, &SolverConfig::default(), None).unwrap().model else {
            continue;
        };
        let hints = PolarityHints::from_assignment(&model);
        let r = solve(&f, &SolverConfig::default().with_hints(), Some(&hints)).unwrap();
        zero += (r.verdict == Verdict::Sat && r.stats.conflicts == 0) as usize;
        tested += 1;
    }
    outcome(zero == tested, format!("{zero}/{tested} hinted re-solves with 0 conflicts"))
}

fn accuracy_by_class(m: &LogisticModel, d: &Dataset) -> (f64, f64) {
    let recall = |label: bool| {
        let rows: Vec<_> = d.rows.iter().filter(|r| r.label == label).collect();
        let hit = rows
            .iter()
            .filter(|r| (predict_proba(m, &r.features).unwrap() >= 0.5) == label)
            .count();
        hit as f64 / rows.len().max(1) as f64
    };
    (recall(true), recall(false))
}

struct Trained {
    model: LogisticModel,
    outcome: Outcome,
}

fn prediction_accuracy() -> Trained {
    let t = Instant::now();
    let spec = GenSpec::default();
    let build = pipeline::build_dataset(&spec).unwrap();
    let (train, test) = pipeline::split_by_instance(&build.dataset);
    let model = logit::train(&train, &TrainConfig::default()).unwrap();
    let at = |p: f64| test.filter(|r| r.provenance.fix_percent == p);
    let (t0, t4) = (at(0.0), at(4.0));
    let (a0, a4) = (logit::accuracy(&model, &t0).unwrap(), logit::accuracy(&model, &t4).unwrap());
    let (r0, r4) = (accuracy_by_class(&model, &t0), accuracy_by_class(&model, &t4));
    let secs = t.elapsed().as_secs_f64();
    let pass = test.len() >= 400 && a0 >= 0.65 && a4 >= 0.70;
    let detail = format!(
        "n=0 {a0:.4} on {} rows (need 0.65; sat share {:.2}, balanced {:.4}), \
         n=4 {a4:.4} on {} rows (need 0.70; sat share {:.2}, balanced {:.4}), \
         overall {:.4} on {} test rows, {} rows dropped, {secs:.0}s",
        t0.len(),
        t0.positives() as f64 / t0.len() as f64,
        (r0.0 + r0.1) / 2.0,
        t4.len(),
        t4.positives() as f64 / t4.len() as f64,
        (r4.0 + r4.1) / 2.0,
        logit::accuracy(&model, &test).unwrap(),
        test.len(),
        build.dropped,
    );
    Trained {
        model,
        outcome: outcome(pass, detail),
    }
}

fn backbone_score(model: &LogisticModel) -> Outcome {
    let t = Instant::now();
    let mc = McConfig {
        fix_percent: 4.0,
        trials: BACKBONE_TRIALS,
        root_seed: derive_seed(SEED, &[6]),
    };
    let (mut instances, mut matched, mut total) = (0, 0usize, 0usize);
    let mut i = 0u64;
    while instances < 50 {
        let f = random_instance(100, 4.26, derive_seed(SEED, &[6, i]));
        i += 1;
        let Ok(report) = compute_backbone(&f, &SolverConfig::default()) else {
            continue;
        };
        if report.size() == 0 {
            continue;
        }
        let hints = compute_hints(model, &f, &mc).unwrap();
        let score = hint_accuracy(&hints, &report).unwrap();
        matched += score.matched;
        total += score.backbone_size;
        instances += 1;
    }
    let micro = matched as f64 / total as f64;
    let p = bench::binomial_upper_tail(matched as u64, total as u64, 0.5);
    let secs = t.elapsed().as_secs_f64();
    outcome(
        micro >= 0.60 && p < 0.01,
        format!(
            "micro accuracy {micro:.4} ({matched}/{total} backbone literals, {instances} instances, \
             T={BACKBONE_TRIALS}), one-sided binomial p={p:.3e}, {secs:.0}s"
        ),
    )
}

fn conflict_harness(model: &LogisticModel, out_dir: &Path) -> Outcome {
    let t = Instant::now();
    let spec = GenSpec {
        seed: derive_seed(SEED, &[7]),
        ..GenSpec::default()
    };
    let mut corpus = Vec::new();
    let mut i = 0;
    while corpus.len() < 100 {
        let f = spec.instance(i);
        if solve(&f, &SolverConfig::default(), None).unwrap().verdict == Verdict::Sat {
            corpus.push(Instance {
                id: pipeline::instance_name(i),
                formula: f,
            });
        }
        i += 1;
    }
    let run = |mode: BenchMode, trials: u32| {
        let cfg = BenchConfig {
            mode,
            mc: McConfig {
                fix_percent: 4.0,
                trials,
                root_seed: spec.seed,
            },
            solver: SolverConfig::default(),
            backbone: false,
        };
        let report = bench::run_benchmark(&corpus, Some(model), &cfg, |_, _| {}).unwrap();
        let summary = bench::write_summary(&report, &[("mode", mode.to_string()), ("trials", trials.to_string())]);
        fs::write(out_dir.join(format!("bench_{mode}.summary.txt")), &summary).unwrap();
        let mut csv = Vec::new();
        bench::write_rows_csv(&report.rows, &mut csv).unwrap();
        fs::write(out_dir.join(format!("bench_{mode}.csv")), csv).unwrap();
        report
    };

    let selfr = run(BenchMode::SelfCompare, 1);
    let s = bench::aggregate(&selfr.rows);
    let self_ok = selfr.rows.len() == 100
        && selfr.rows.iter().all(|r| r.status == RowStatus::Ok && r.phase_saving.hints == r.phase_saving.default)
        && s.phase_saving.mean_delta_pct == Some(0.0)
        && s.no_phase_saving.mean_delta_pct == Some(0.0);

    let oracle = run(BenchMode::Oracle, 1);
    let o = bench::aggregate(&oracle.rows);
    let oracle_ok = o.phase_saving.win_rate_pct == Some(100.0) && oracle.rows.iter().all(|r| r.phase_saving.hints == 0);

    let mc = run(BenchMode::MonteCarlo, BENCH_TRIALS);
    let a = bench::aggregate(&mc.rows);
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.1}%"));
    let secs = t.elapsed().as_secs_f64();
    outcome(
        self_ok && oracle_ok,
        format!(
            "self-comparison delta {} over {} instances; oracle win-rate {}; \
             Monte-Carlo (T={BENCH_TRIALS}) mean delta {} win-rate {} with phase saving, \
             {} / {} without (published: {}% / {}% at 300 variables); {secs:.0}s, reports in {}",
            fmt(s.phase_saving.mean_delta_pct),
            selfr.rows.len(),
            fmt(o.phase_saving.win_rate_pct),
            fmt(a.phase_saving.mean_delta_pct),
            fmt(a.phase_saving.win_rate_pct),
            fmt(a.no_phase_saving.mean_delta_pct),
            fmt(a.no_phase_saving.win_rate_pct),
            bench::REFERENCE_MEAN_DELTA_PCT,
            bench::REFERENCE_WIN_RATE_PCT,
            out_dir.display(),
        ),
    )
}

fn mcsat(dir: &Path, args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_mcsat"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("running mcsat");
    assert!(
        out.status.success() || matches!(out.status.code(), Some(10 | 20)),
        "mcsat {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Every regular file under `dir`, relative path and contents, sorted.
fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push((path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

/// Runs the whole CLI in `dir` and returns (subcommand, stdout) pairs.
fn cli_session(dir: &Path) -> Vec<(&'static str, Vec<u8>)> {
    let common = ["--vars", "20", "--ratio", "4.26", "--seed", "11"];
    let mut stdout = Vec::new();
    let mut run = |name: &'static str, args: &[&str]| {
        let out = mcsat(dir, args);
        stdout.push((name, out.stdout));
    };
    run("gen", &[&["gen", "--instances", "8", "--out", "corpus"][..], &common].concat());
    run(
        "dataset",
        &[&["dataset", "--instances", "60", "--fix-percents", "0,10", "--out", "data.csv"][..], &common].concat(),
    );
    run("train", &["train", "--data", "data.csv", "--out", "model.txt", "--epochs", "300"]);
    run("predict", &["predict", "--model", "model.txt", "--input", "corpus/inst_00000.cnf", "--out", "p.txt"]);
    run(
        "hints",
        &["hints", "--model", "model.txt", "--input", "corpus/inst_00000.cnf", "--trials", "5", "--seed", "3", "--out", "h.txt"],
    );
    run("solve", &["solve", "--input", "corpus/inst_00000.cnf", "--out", "s_default.txt"]);
    run("solve", &["solve", "--input", "corpus/inst_00000.cnf", "--hints", "h.txt", "--out", "s_hints.txt"]);
    run("backbone", &["backbone", "--input", "corpus/inst_00001.cnf", "--out", "bb.txt"]);
    run(
        "bench",
        &[
            "bench", "--corpus", "corpus", "--model", "model.txt", "--trials", "3", "--backbone", "--seed", "5", "--out",
            "bench.csv",
        ],
    );
    stdout
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (out_a, out_b) = (cli_session(a.path()), cli_session(b.path()));
    let (files_a, files_b) = (snapshot(a.path()), snapshot(b.path()));
    let differing: Vec<String> = files_a
        .iter()
        .zip(&files_b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.display().to_string())
        .chain(out_a.iter().zip(&out_b).filter(|(x, y)| x != y).map(|(x, _)| format!("{} stdout", x.0)))
        .collect();
    let same_names = files_a.iter().map(|f| &f.0).eq(files_b.iter().map(|f| &f.0));
    let subcommands: std::collections::BTreeSet<_> = out_a.iter().map(|(n, _)| *n).collect();
    outcome(
        same_names && differing.is_empty() && subcommands.len() == 8,
        format!(
            "{} subcommands, {} output files compared byte for byte, differing: {:?}",
            subcommands.len(),
            files_a.len(),
            differing
        ),
    )
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("MCSAT_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let selected = |k: u32| only.as_ref().map_or(true, |o| o.contains(&k));
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&out_dir).unwrap();

    let trained: OnceCell<Trained> = OnceCell::new();
    let model = || &trained.get_or_init(prediction_accuracy).model;

    let mut hard_failures = 0;
    let mut report = |k: u32, title: &str, hard: bool, o: &Outcome| {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let kind = if hard { "" } else { " [measured]" };
        println!("{verdict} criterion {k} ({title}){kind}: {}", o.detail);
        if hard && !o.pass {
            hard_failures += 1;
        }
    };
    if selected(1) {
        report(1, "solver soundness", true, &solver_soundness());
    }
    if selected(2) {
        report(2, "backbone vs enumeration", true, &backbone_equivalence());
    }
    if selected(3) {
        report(3, "gradient vs finite differences", true, &gradient_check());
    }
    if selected(4) {
        report(4, "zero-conflict oracle hints", true, &zero_conflict_hints());
    }
    if selected(5) {
        model();
        report(5, "prediction accuracy", false, &trained.get().unwrap().outcome);
    }
    if selected(6) {
        report(6, "backbone-setting score", false, &backbone_score(model()));
    }
    if selected(7) {
        report(7, "conflict-delta harness", true, &conflict_harness(model(), &out_dir));
    }
    if selected(8) {
        report(8, "CLI determinism", true, &determinism());
    }
    if hard_failures > 0 {
        eprintln!("{hard_failures} hard criteria failed");
        std::process::exit(1);
    }
}
