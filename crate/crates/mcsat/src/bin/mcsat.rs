use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mcsat::bench::{self, BenchConfig, BenchMode, Instance};
use mcsat::dimacs::{read_dimacs_file, write_dimacs};
use mcsat::formats;
use mcsat::pipeline::{self, GenSpec};
use mcsat_core::backbone::{compute_backbone_with, hint_accuracy};
use mcsat_core::cdcl::{solve, PolarityMode, SolverConfig, Verdict};
use mcsat_core::features::extract_features;
use mcsat_core::logit::{self, accuracy, TrainConfig};
use mcsat_core::polarity::{compute_hints_with, McConfig};

/// Monte-Carlo polarity initialization for CDCL SAT solving.
#[derive(Parser)]
#[command(name = "mcsat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a corpus of random 3-CNF instances as DIMACS files.
    Gen(GenArgs),
    /// Build a labelled feature dataset (CSV) from random instances.
    Dataset(DatasetArgs),
    /// Train the logistic model on a dataset.
    Train(TrainArgs),
    /// Print the model's probability that a formula is satisfiable.
    Predict(PredictArgs),
    /// Compute Monte-Carlo polarity hints for a formula.
    Hints(HintsArgs),
    /// Solve a formula. Exit code 10 for SAT, 20 for UNSAT.
    Solve(SolveArgs),
    /// Compute the backbone of a satisfiable formula.
    Backbone(BackboneArgs),
    /// Paired conflict benchmark of default against hinted polarity.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Number of base instances.
    #[arg(long, default_value_t = 2000)]
    instances: usize,
    #[arg(long, default_value_t = 150)]
    vars: u32,
    /// Clauses per variable.
    #[arg(long, default_value_t = 4.26)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    spec: InstanceArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DatasetArgs {
    #[command(flatten)]
    spec: InstanceArgs,
    /// Percentages of variables fixed per row, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,2,4")]
    fix_percents: Vec<f64>,
    /// Conflicts allowed per labelling solve; 0 means unlimited.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    /// Train on every row instead of holding out every fifth instance.
    #[arg(long)]
    all_rows: bool,
    /// Unused by training, which is deterministic; accepted for uniformity.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// DIMACS file.
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Unused; prediction is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct McArgs {
    /// Trials per literal.
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Percentage of residual variables fixed per trial.
    #[arg(long, default_value_t = 4.0)]
    fix_percent: f64,
}

#[derive(Args)]
struct HintsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    /// Decide with the hint/default polarity every time instead of the saved phase.
    #[arg(long)]
    no_phase_saving: bool,
    /// Conflict budget; unlimited when omitted.
    #[arg(long)]
    budget: Option<u64>,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            phase_saving: !self.no_phase_saving,
            conflict_budget: self.budget,
            seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// Hints file; enables hinted polarity.
    #[arg(long)]
    hints: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BackboneArgs {
    #[arg(long)]
    input: PathBuf,
    /// Hints file to score against the backbone; the score goes to stdout.
    #[arg(long)]
    hints: Option<PathBuf>,
    /// Test every variable even when a model already shows it free.
    #[arg(long)]
    no_filtering: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of DIMACS files, processed in file-name order.
    #[arg(long)]
    corpus: PathBuf,
    /// Model file, required in mc mode.
    #[arg(long)]
    model: Option<PathBuf>,
    /// mc, oracle or self.
    #[arg(long, default_value = "mc")]
    mode: BenchMode,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also compute backbones and score the hints against them.
    #[arg(long)]
    backbone: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-instance CSV.
    #[arg(long)]
    out: PathBuf,
    /// Summary file; `<out>.summary.txt` when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Wall-clock timings CSV (not deterministic, so kept apart).
    #[arg(long)]
    timings: Option<PathBuf>,
}

fn spec_of(a: &InstanceArgs) -> GenSpec {
    GenSpec {
        num_instances: a.instances,
        num_vars: a.vars,
        clause_var_ratio: a.ratio,
        seed: a.seed,
        ..GenSpec::default()
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn load_model(path: &Path) -> Result<logit::LogisticModel> {
    formats::parse_model(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_formula(path: &Path) -> Result<mcsat_core::cnf::Formula> {
    read_dimacs_file(path).with_context(|| format!("parsing {}", path.display()))
}

fn gen(a: GenArgs) -> Result<()> {
    let spec = spec_of(&a.spec);
    spec.validate()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for i in 0..spec.num_instances {
        let path = a.out.join(format!("{}.cnf", pipeline::instance_name(i)));
        write_file(&path, write_dimacs(&spec.instance(i)))?;
    }
    eprintln!("wrote {} instances to {}", spec.num_instances, a.out.display());
    Ok(())
}

fn dataset(a: DatasetArgs) -> Result<()> {
    let spec = GenSpec {
        fix_percents: a.fix_percents,
        label_conflict_budget: (a.budget > 0).then_some(a.budget),
        ..spec_of(&a.spec)
    };
    let total = spec.num_instances;
    let build = pipeline::build_dataset_with(&spec, |done| {
        if done % 100 == 0 || done == total {
            eprintln!("labelled {done}/{total} instances");
        }
    })?;
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    formats::write_dataset(&build.dataset, io::BufWriter::new(file))?;
    eprintln!(
        "{} rows ({} satisfiable); dropped over budget {}, conflict rows {}, satisfied rows {}",
        build.dataset.len(),
        build.dataset.positives(),
        build.dropped,
        build.conflicts,
        build.satisfied
    );
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let file = fs::File::open(&a.data).with_context(|| format!("opening {}", a.data.display()))?;
    let data = formats::read_dataset(io::BufReader::new(file))?;
    let (train_set, test_set) = if a.all_rows {
        (data.clone(), logit::Dataset::default())
    } else {
        pipeline::split_by_instance(&data)
    };
    let cfg = TrainConfig {
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        l2_lambda: a.lambda,
        ..TrainConfig::default()
    };
    let mut model = logit::train(&train_set, &cfg)?;
    let split = if a.all_rows { "none" } else { "instance_mod_5_eq_4_held_out" };
    model.metadata.insert("split".into(), split.into());
    if let Some(acc) = accuracy(&model, &train_set) {
        model.metadata.insert("train_accuracy".into(), format!("{acc:.6}"));
    }
    let mut report = Vec::new();
    if let Some(acc) = accuracy(&model, &test_set) {
        report.push(("test_accuracy".to_string(), acc, test_set.len()));
    }
    let mut percents: Vec<f64> = test_set.rows.iter().map(|r| r.provenance.fix_percent).collect();
    percents.sort_by(f64::total_cmp);
    percents.dedup();
    for p in percents {
        let subset = test_set.filter(|r| r.provenance.fix_percent == p);
        if let Some(acc) = accuracy(&model, &subset) {
            report.push((format!("test_accuracy_n{p}"), acc, subset.len()));
        }
    }
    for (key, acc, rows) in &report {
        model.metadata.insert(key.clone(), format!("{acc:.6}"));
        eprintln!("{key} {acc:.4} ({rows} rows)");
    }
    write_file(&a.out, formats::write_model(&model))
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let f = load_formula(&a.input)?;
    let p = logit::predict_proba(&model, &extract_features(&f)?)?;
    emit(a.out.as_deref(), &format!("{p}\n"))
}

fn hints(a: HintsArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let f = load_formula(&a.input)?;
    let cfg = McConfig {
        fix_percent: a.mc.fix_percent,
        trials: a.mc.trials,
        root_seed: a.seed,
    };
    let n = f.num_vars();
    let h = compute_hints_with(&model, &f, &cfg, |_, done| {
        if done % 25 == 0 || done == n as usize {
            eprintln!("scored {done}/{n} variables");
        }
    })?;
    write_file(&a.out, formats::write_hints(&h))
}

fn run_solve(a: SolveArgs) -> Result<ExitCode> {
    let f = load_formula(&a.input)?;
    let mut cfg = a.solver.config(a.seed);
    let hints = match &a.hints {
        Some(p) => {
            cfg.polarity_mode = PolarityMode::Hints;
            Some(formats::parse_hints(&read_file(p)?).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    let t = Instant::now();
    let r = solve(&f, &cfg, hints.as_ref())?;
    eprintln!("c wall_ms {:.3}", t.elapsed().as_secs_f64() * 1e3);
    emit(a.out.as_deref(), &formats::write_solve_output(&r))?;
    Ok(match r.verdict {
        Verdict::Sat => ExitCode::from(10),
        Verdict::Unsat => ExitCode::from(20),
        Verdict::BudgetExhausted => ExitCode::SUCCESS,
    })
}

fn backbone(a: BackboneArgs) -> Result<()> {
    let f = load_formula(&a.input)?;
    let cfg = SolverConfig {
        seed: a.seed,
        ..SolverConfig::default()
    };
    let mut report = compute_backbone_with(&f, &cfg, !a.no_filtering)?;
    report.id = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    write_file(&a.out, formats::write_backbone(&report))?;
    if let Some(p) = &a.hints {
        let h = formats::parse_hints(&read_file(p)?)?;
        let s = hint_accuracy(&h, &report)?;
        let acc = s.accuracy.map(|v| v.to_string()).unwrap_or_else(|| "undefined".into());
        println!("matched {} backbone_size {} accuracy {acc}", s.matched, s.backbone_size);
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&a.corpus)
        .with_context(|| format!("reading {}", a.corpus.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "cnf"));
    paths.sort();
    if paths.is_empty() {
        bail!("no .cnf files in {}", a.corpus.display());
    }
    let instances = paths
        .iter()
        .map(|p| {
            Ok(Instance {
                id: p.file_stem().unwrap().to_string_lossy().into_owned(),
                formula: load_formula(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    let cfg = BenchConfig {
        mode: a.mode,
        mc: McConfig {
            fix_percent: a.mc.fix_percent,
            trials: a.mc.trials,
            root_seed: a.seed,
        },
        solver: a.solver.config(a.seed),
        backbone: a.backbone,
    };
    let total = instances.len();
    let report = bench::run_benchmark(&instances, model.as_ref(), &cfg, |id, done| {
        eprintln!("[{done}/{total}] {id}");
    })?;

    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    bench::write_rows_csv(&report.rows, io::BufWriter::new(file))?;
    let header = [
        ("mode", a.mode.to_string()),
        ("seed", a.seed.to_string()),
        ("trials", a.mc.trials.to_string()),
        ("fix_percent", a.mc.fix_percent.to_string()),
        ("phase_saving_runs", "on and off".to_string()),
        (
            "conflict_budget",
            a.solver.budget.map_or("none".to_string(), |b| b.to_string()),
        ),
    ];
    let summary = bench::write_summary(&report, &header);
    let summary_path = a.summary.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".summary.txt");
        p.into()
    });
    write_file(&summary_path, &summary)?;
    eprint!("{summary}");
    if let Some(p) = &a.timings {
        let file = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        bench::write_timings_csv(&report.timings, io::BufWriter::new(file))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a).map(|_| ExitCode::SUCCESS),
        Command::Dataset(a) => dataset(a).map(|_| ExitCode::SUCCESS),
        Command::Train(a) => train(a).map(|_| ExitCode::SUCCESS),
        Command::Predict(a) => predict(a).map(|_| ExitCode::SUCCESS),
        Command::Hints(a) => hints(a).map(|_| ExitCode::SUCCESS),
        Command::Solve(a) => run_solve(a),
        Command::Backbone(a) => backbone(a).map(|_| ExitCode::SUCCESS),
        Command::Bench(a) => run_bench(a).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
