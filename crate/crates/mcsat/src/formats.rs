//! Line-oriented text formats for models, hints, backbone reports, datasets
//! and solver output.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! formatting, so every writer/reader pair reproduces values bit for bit.
//!
//! Model file:
//!
//! ```text
//! version 1
//! weight 1 0.25        (features 1..=10, in feature order)
//! bias -0.1
//! mean 1 3.9           (features 1..=10)
//! scale 1 0.12         (features 1..=10)
//! # key value          (metadata, sorted by key)
//! ```
//!
//! Hints file: one `<var> <0|1> <mean_false> <mean_true>` line per variable.
//!
//! Backbone report: `c id <name>` and `c summary ...` comment lines followed by
//! one `<var> <T|F|->` line per variable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use mcsat_core::backbone::{BackboneReport, BackboneStatus};
use mcsat_core::cdcl::{SolveResult, Verdict};
use mcsat_core::features::{FeatureVector, FEATURE_NAMES, NUM_FEATURES};
use mcsat_core::logit::{Dataset, LogisticModel, Provenance, Row, Standardizer};
use mcsat_core::polarity::{HintEntry, PolarityHints};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, token: Option<&str>) -> Result<f64, FormatError> {
    let token = token.ok_or_else(|| syntax(line, "missing number"))?;
    token
        .parse()
        .map_err(|_| syntax(line, format!("`{token}` is not a number")))
}

fn parse_index(line: usize, token: Option<&str>, max: usize) -> Result<usize, FormatError> {
    let token = token.ok_or_else(|| syntax(line, "missing index"))?;
    match token.parse::<usize>() {
        Ok(i) if (1..=max).contains(&i) => Ok(i),
        _ => Err(syntax(line, format!("index `{token}` outside 1..={max}"))),
    }
}

pub fn write_model(m: &LogisticModel) -> String {
    let mut out = String::new();
    writeln!(out, "version {MODEL_VERSION}").unwrap();
    for (j, w) in m.weights.iter().enumerate() {
        writeln!(out, "weight {} {}", j + 1, w).unwrap();
    }
    writeln!(out, "bias {}", m.bias).unwrap();
    for (j, v) in m.standardizer.mean.iter().enumerate() {
        writeln!(out, "mean {} {}", j + 1, v).unwrap();
    }
    for (j, v) in m.standardizer.scale.iter().enumerate() {
        writeln!(out, "scale {} {}", j + 1, v).unwrap();
    }
    for (k, v) in &m.metadata {
        writeln!(out, "# {k} {v}").unwrap();
    }
    out
}

pub fn parse_model(text: &str) -> Result<LogisticModel, FormatError> {
    let mut version = None;
    let mut weights = [None; NUM_FEATURES];
    let mut means = [None; NUM_FEATURES];
    let mut scales = [None; NUM_FEATURES];
    let mut bias = None;
    let mut metadata = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(meta) = trimmed.strip_prefix('#') {
            let meta = meta.trim_start();
            let (k, v) = meta.split_once(' ').unwrap_or((meta, ""));
            if !k.is_empty() {
                metadata.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let key = it.next().unwrap();
        let slot = match key {
            "version" => {
                let v = it.next().ok_or_else(|| syntax(line, "missing version"))?;
                version = Some(v.parse::<u32>().map_err(|_| syntax(line, "bad version"))?);
                None
            }
            "bias" => {
                bias = Some(parse_f64(line, it.next())?);
                None
            }
            "weight" => Some(&mut weights),
            "mean" => Some(&mut means),
            "scale" => Some(&mut scales),
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        };
        if let Some(slot) = slot {
            let j = parse_index(line, it.next(), NUM_FEATURES)? - 1;
            if slot[j].is_some() {
                return Err(syntax(line, format!("{key} {} given twice", j + 1)));
            }
            slot[j] = Some(parse_f64(line, it.next())?);
        }
        if it.next().is_some() {
            return Err(syntax(line, "trailing tokens"));
        }
    }
    match version {
        Some(MODEL_VERSION) => {}
        Some(v) => return Err(FormatError::Invalid(format!("unsupported model version {v}"))),
        None => return Err(FormatError::Invalid("missing version line".into())),
    }
    let complete = |xs: [Option<f64>; NUM_FEATURES], what: &str| {
        let mut out = [0.0; NUM_FEATURES];
        for (j, x) in xs.iter().enumerate() {
            out[j] = x.ok_or_else(|| FormatError::Invalid(format!("missing {what} {}", j + 1)))?;
        }
        Ok::<_, FormatError>(out)
    };
    let model = LogisticModel {
        weights: complete(weights, "weight")?,
        bias: bias.ok_or_else(|| FormatError::Invalid("missing bias".into()))?,
        standardizer: Standardizer {
            mean: complete(means, "mean")?,
            scale: complete(scales, "scale")?,
        },
        metadata,
    };
    if !model.is_finite() {
        return Err(FormatError::Invalid("model has non-finite values or nonpositive scales".into()));
    }
    Ok(model)
}

pub fn write_hints(h: &PolarityHints) -> String {
    let mut out = String::new();
    for (i, e) in h.entries().iter().enumerate() {
        writeln!(out, "{} {} {} {}", i + 1, e.value as u8, e.mean_false, e.mean_true).unwrap();
    }
    out
}

/// Parses a hints file; variables must be listed as 1, 2, 3, ...
pub fn parse_hints(text: &str) -> Result<PolarityHints, FormatError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let var = parse_index(line, it.next(), usize::MAX)?;
        if var != entries.len() + 1 {
            return Err(syntax(line, format!("expected variable {}, found {var}", entries.len() + 1)));
        }
        let value = match it.next() {
            Some("0") => false,
            Some("1") => true,
            _ => return Err(syntax(line, "value must be 0 or 1")),
        };
        let mean_false = parse_f64(line, it.next())?;
        let mean_true = parse_f64(line, it.next())?;
        if it.next().is_some() {
            return Err(syntax(line, "trailing tokens"));
        }
        entries.push(HintEntry {
            value,
            mean_false,
            mean_true,
        });
    }
    PolarityHints::new(entries).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_backbone(r: &BackboneReport) -> String {
    let mut out = String::new();
    if !r.id.is_empty() {
        writeln!(out, "c id {}", r.id).unwrap();
    }
    writeln!(
        out,
        "c summary vars {} true {} false {} free {} solver_calls {}",
        r.statuses.len(),
        r.count(BackboneStatus::True),
        r.count(BackboneStatus::False),
        r.count(BackboneStatus::Free),
        r.solver_calls
    )
    .unwrap();
    for (i, s) in r.statuses.iter().enumerate() {
        let c = match s {
            BackboneStatus::True => 'T',
            BackboneStatus::False => 'F',
            BackboneStatus::Free => '-',
        };
        writeln!(out, "{} {c}", i + 1).unwrap();
    }
    out
}

pub fn parse_backbone(text: &str) -> Result<BackboneReport, FormatError> {
    let mut id = String::new();
    let mut solver_calls = 0;
    let mut statuses = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("c id ") {
            id = rest.to_string();
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("c summary ") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            for pair in tokens.chunks(2) {
                if let [key, value] = pair {
                    if *key == "solver_calls" {
                        solver_calls = value.parse().map_err(|_| syntax(line, "bad solver_calls"))?;
                    }
                }
            }
            continue;
        }
        if trimmed.starts_with('c') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let var = parse_index(line, it.next(), usize::MAX)?;
        if var != statuses.len() + 1 {
            return Err(syntax(line, format!("expected variable {}, found {var}", statuses.len() + 1)));
        }
        statuses.push(match it.next() {
            Some("T") => BackboneStatus::True,
            Some("F") => BackboneStatus::False,
            Some("-") => BackboneStatus::Free,
            _ => return Err(syntax(line, "status must be T, F or -")),
        });
    }
    Ok(BackboneReport {
        id,
        statuses,
        solver_calls,
    })
}

/// `s` line, `v` lines (ten literals per line) and `c key value` statistics.
pub fn write_solve_output(r: &SolveResult) -> String {
    let mut out = String::new();
    let status = match r.verdict {
        Verdict::Sat => "SATISFIABLE",
        Verdict::Unsat => "UNSATISFIABLE",
        Verdict::BudgetExhausted => "UNKNOWN",
    };
    writeln!(out, "s {status}").unwrap();
    if let Some(model) = &r.model {
        let lits: Vec<String> = model
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let var = i as i64 + 1;
                (if v { var } else { -var }).to_string()
            })
            .chain(std::iter::once("0".to_string()))
            .collect();
        for chunk in lits.chunks(10) {
            writeln!(out, "v {}", chunk.join(" ")).unwrap();
        }
    }
    let s = &r.stats;
    for (k, v) in [
        ("conflicts", s.conflicts),
        ("decisions", s.decisions),
        ("propagations", s.propagations),
        ("restarts", s.restarts),
        ("learned", s.learned),
        ("reductions", s.reductions),
    ] {
        writeln!(out, "c {k} {v}").unwrap();
    }
    out
}

/// Column order: the ten features, then `label`, `instance`, `seed`,
/// `fix_percent`.
pub fn dataset_header() -> Vec<&'static str> {
    FEATURE_NAMES
        .iter()
        .copied()
        .chain(["label", "instance", "seed", "fix_percent"])
        .collect()
}

pub fn write_dataset<W: Write>(d: &Dataset, out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(dataset_header())?;
    for row in &d.rows {
        let mut record: Vec<String> = row.features.to_array().iter().map(f64::to_string).collect();
        record.push((row.label as u8).to_string());
        record.push(row.provenance.instance.to_string());
        record.push(row.provenance.seed.to_string());
        record.push(row.provenance.fix_percent.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(input: R) -> Result<Dataset, FormatError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != dataset_header() {
        return Err(FormatError::Invalid("unexpected dataset header".into()));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let field = |k: usize| record.get(k).ok_or_else(|| syntax(line, "missing column"));
        let mut x = [0.0; NUM_FEATURES];
        for (j, v) in x.iter_mut().enumerate() {
            *v = parse_f64(line, Some(field(j)?))?;
        }
        let label = match field(NUM_FEATURES)? {
            "0" => false,
            "1" => true,
            other => return Err(syntax(line, format!("label `{other}` is not 0 or 1"))),
        };
        let int = |k: usize| {
            field(k)?
                .parse::<u64>()
                .map_err(|_| syntax(line, "bad integer column"))
        };
        rows.push(Row {
            features: FeatureVector::from_array(x),
            label,
            provenance: Provenance {
                instance: int(NUM_FEATURES + 1)?,
                seed: int(NUM_FEATURES + 2)?,
                fix_percent: parse_f64(line, Some(field(NUM_FEATURES + 3)?))?,
            },
        });
    }
    Ok(Dataset::new(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcsat_core::cdcl::Stats;

    fn sample_model() -> LogisticModel {
        let mut m = LogisticModel::zero();
        m.weights = [0.1, -2.5, 1e-300, 3.0, 0.0, -0.0, 7.25, 1.0 / 3.0, 1e20, -1e-7];
        m.bias = -0.75;
        m.standardizer.mean[2] = 0.123456789;
        m.standardizer.scale[9] = 42.0;
        m.metadata.insert("rows".into(), "12".into());
        m.metadata.insert("note".into(), "two words".into());
        m
    }

    #[test]
    fn model_round_trip() {
        let m = sample_model();
        let text = write_model(&m);
        assert!(text.starts_with("version 1\nweight 1 0.1\n"));
        let back = parse_model(&text).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.weights.iter().zip(&m.weights) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(write_model(&back), text);
    }

    #[test]
    fn model_errors() {
        let text = write_model(&sample_model());
        assert!(parse_model(&text.replace("version 1", "version 2")).is_err());
        assert!(parse_model(&text.replace("bias -0.75\n", "")).is_err());
        assert!(parse_model(&text.replace("weight 3", "weight 11")).is_err());
        assert!(parse_model(&text.replace("scale 10 42", "scale 10 0")).is_err());
        assert!(parse_model(&format!("{text}weight 1 2\n")).is_err());
    }

    #[test]
    fn hints_round_trip() {
        let h = PolarityHints::new(vec![
            HintEntry::from_scores(0.5, 0.5),
            HintEntry::from_scores(0.25, 0.75),
            HintEntry::from_scores(1.0, 0.0),
        ])
        .unwrap();
        let text = write_hints(&h);
        assert_eq!(text, "1 0 0.5 0.5\n2 1 0.25 0.75\n3 0 1 0\n");
        assert_eq!(parse_hints(&text).unwrap(), h);
        assert!(parse_hints("1 1 0.5 0.5\n").is_err(), "value must be the argmax");
        assert!(parse_hints("2 0 0.5 0.5\n").is_err());
    }

    #[test]
    fn backbone_round_trip() {
        let r = BackboneReport {
            id: "inst_7".into(),
            statuses: vec![BackboneStatus::True, BackboneStatus::Free, BackboneStatus::False],
            solver_calls: 4,
        };
        let text = write_backbone(&r);
        assert_eq!(
            text,
            "c id inst_7\nc summary vars 3 true 1 false 1 free 1 solver_calls 4\n1 T\n2 -\n3 F\n"
        );
        assert_eq!(parse_backbone(&text).unwrap(), r);
    }

    #[test]
    fn solve_output_layout() {
        let r = SolveResult {
            verdict: Verdict::Sat,
            model: Some(vec![true, false, true]),
            stats: Stats {
                conflicts: 2,
                ..Stats::default()
            },
        };
        let text = write_solve_output(&r);
        assert!(text.starts_with("s SATISFIABLE\nv 1 -2 3 0\nc conflicts 2\n"));
        let unsat = SolveResult {
            verdict: Verdict::Unsat,
            model: None,
            stats: Stats::default(),
        };
        assert!(write_solve_output(&unsat).starts_with("s UNSATISFIABLE\nc conflicts 0\n"));
    }

    #[test]
    fn dataset_round_trip() {
        let rows = (0..5u64)
            .map(|i| Row {
                features: FeatureVector::from_array(core::array::from_fn(|j| (i as usize * 10 + j) as f64 / 7.0)),
                label: i % 2 == 0,
                provenance: Provenance {
                    instance: i,
                    seed: u64::MAX - i,
                    fix_percent: 2.5,
                },
            })
            .collect();
        let d = Dataset::new(rows);
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("clause_var_ratio,frac_binary,"));
        assert!(text.lines().next().unwrap().ends_with(",label,instance,seed,fix_percent"));
        assert_eq!(read_dataset(buf.as_slice()).unwrap(), d);
    }
}
