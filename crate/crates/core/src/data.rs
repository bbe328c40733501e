//! Datasets: CSV and FASTA ingestion, seeded synthetic generators, and the
//! Monte-Carlo harness that sweeps the trimming fraction.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, Payload, Sample};
use crate::outlyingness::DirectionPolicy;
use crate::pipeline::{self, CvConfig};
use crate::rng::Stream;

const SIMULATION_TAG: u64 = 0x0053_494d;
const TOY_TAG: u64 = 0x0054_4f59;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub labels: Vec<i8>,
    /// Source path or generator descriptor.
    pub provenance: String,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, labels: Vec<i8>, provenance: impl Into<String>) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::Dimension {
                expected: samples.len(),
                found: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::invalid("label", format!("{bad} is not -1 or +1")));
        }
        Ok(Self {
            samples,
            labels,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.samples.iter().map(|s| s.id.clone()).collect()
    }

    /// Positions of samples carrying `label`, ascending.
    pub fn group(&self, label: i8) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// Vector features followed by the label, one row per sample, no header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for (s, y) in self.samples.iter().zip(&self.labels) {
            let Payload::Vector(values) = &s.payload else {
                return Err(Error::KernelType("only vector datasets can be written as CSV".into()));
            };
            let mut record: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            record.push(y.to_string());
            writer.write_record(&record).map_err(csv_error)?;
        }
        writer.flush().map_err(|e| Error::io("<csv>", e))
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    First,
    Last,
    /// Zero-based.
    Index(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    /// `(negative, positive)` label values; `None` means the labels are `-1` and `1`.
    pub coding: Option<(String, String)>,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            coding: None,
            has_header: false,
        }
    }
}

fn decode_label(cell: &str, coding: &Option<(String, String)>, line: usize) -> Result<i8> {
    let cell = cell.trim();
    let label = match coding {
        Some((neg, _)) if cell == neg => Some(-1),
        Some((_, pos)) if cell == pos => Some(1),
        Some(_) => None,
        None => match cell.parse::<f64>() {
            Ok(v) if v == -1.0 => Some(-1),
            Ok(v) if v == 1.0 => Some(1),
            _ => None,
        },
    };
    label.ok_or_else(|| Error::Label {
        line,
        message: match coding {
            Some((neg, pos)) => format!("{cell:?} is neither {neg:?} nor {pos:?}"),
            None => format!("{cell:?} is not -1 or 1"),
        },
    })
}

/// Numeric CSV with one label column. Sample ids are 1-based row numbers.
pub fn read_csv<R: Read>(input: R, options: &CsvOptions, provenance: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                line,
                message: format!("expected {w} columns, found {}", record.len()),
            });
        }
        if w < 2 {
            return Err(Error::Parse {
                line,
                message: "need at least one feature and one label column".into(),
            });
        }
        let label_at = match options.label_column {
            LabelColumn::First => 0,
            LabelColumn::Last => w - 1,
            LabelColumn::Index(i) if i < w => i,
            LabelColumn::Index(i) => {
                return Err(Error::invalid("label-column", format!("{i} out of range for {w} columns")))
            }
        };
        let mut values = Vec::with_capacity(w - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_at {
                continue;
            }
            let v = cell.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: not a number: {cell:?}", col + 1),
            })?;
            values.push(v);
        }
        labels.push(decode_label(&record[label_at], &options.coding, line)?);
        samples.push(Sample::vector((samples.len() + 1).to_string(), values));
    }
    Dataset::new(samples, labels, provenance)
}

pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(file), options, &path.display().to_string())
}

/// `(id, sequence)` records; the id is the first word of the header line.
pub fn read_fasta<R: BufRead>(input: R) -> Result<Vec<(String, String)>> {
    let mut records: Vec<(String, String)> = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<fasta>", e))?;
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(Error::Parse {
                    line: n + 1,
                    message: "empty record id".into(),
                });
            }
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            records.push((id, String::new()));
        } else if line.is_empty() || line.starts_with(';') {
            continue;
        } else {
            match records.last_mut() {
                Some((_, seq)) => seq.push_str(line.trim()),
                None => {
                    return Err(Error::Parse {
                        line: n + 1,
                        message: "sequence data before the first header".into(),
                    })
                }
            }
        }
    }
    Ok(records)
}

/// Two columns, `id label`, separated by whitespace or a comma.
pub fn read_label_map<R: BufRead>(input: R) -> Result<Vec<(String, i8, usize)>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<labels>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let [id, label] = fields.as_slice() else {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected `id label`, got {line:?}"),
            });
        };
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateId(id.to_string()));
        }
        out.push((id.to_string(), decode_label(label, &None, n + 1)?, n + 1));
    }
    Ok(out)
}

pub fn load_fasta(fasta: &Path, labels: &Path) -> Result<Dataset> {
    let f = File::open(fasta).map_err(|e| Error::io(fasta, e))?;
    let records = read_fasta(BufReader::new(f))?;
    let l = File::open(labels).map_err(|e| Error::io(labels, e))?;
    let label_map = read_label_map(BufReader::new(l))?;
    fasta_dataset(records, label_map, &fasta.display().to_string())
}

pub fn fasta_dataset(
    records: Vec<(String, String)>,
    label_map: Vec<(String, i8, usize)>,
    provenance: &str,
) -> Result<Dataset> {
    let ids: HashSet<&str> = records.iter().map(|(id, _)| id.as_str()).collect();
    if let Some((id, _, line)) = label_map.iter().find(|(id, _, _)| !ids.contains(id.as_str())) {
        return Err(Error::Label {
            line: *line,
            message: format!("id {id:?} has no FASTA record"),
        });
    }
    let by_id: HashMap<&str, i8> = label_map.iter().map(|(id, y, _)| (id.as_str(), *y)).collect();
    let mut samples = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (id, seq) in records {
        let y = *by_id.get(id.as_str()).ok_or_else(|| Error::MissingLabel(id.clone()))?;
        labels.push(y);
        samples.push(Sample::text(id, seq));
    }
    Dataset::new(samples, labels, provenance)
}

/// Two Gaussian groups in `d` dimensions, optionally with planted outliers.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSpec {
    pub n_per_group: usize,
    pub d: usize,
    /// Mean of every component of the positive group.
    pub shift: f64,
    pub outliers_per_group: usize,
    /// Component mean of outliers labeled -1.
    pub outlier_mean_negative: f64,
    /// Component mean of outliers labeled +1.
    pub outlier_mean_positive: f64,
    pub test_size: usize,
    pub runs: usize,
    pub kappas: Vec<f64>,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            n_per_group: 25,
            d: 1000,
            shift: 0.18,
            outliers_per_group: 0,
            outlier_mean_negative: 3.0,
            outlier_mean_positive: -3.0,
            test_size: 600,
            runs: 50,
            kappas: vec![0.5, 0.7, 0.9, 1.0],
            seed: 0,
        }
    }
}

impl SimulationSpec {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn contaminated() -> Self {
        Self {
            outliers_per_group: 4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n", self.n_per_group),
            ("d", self.d),
            ("test-size", self.test_size),
            ("runs", self.runs),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if self.test_size < 2 {
            return Err(Error::invalid("test-size", "must be at least 2"));
        }
        if self.kappas.is_empty() {
            return Err(Error::invalid("kappas", "must not be empty"));
        }
        for &k in &self.kappas {
            pipeline::check_kappa(k)?;
        }
        if !(self.shift.is_finite() && self.outlier_mean_negative.is_finite() && self.outlier_mean_positive.is_finite()) {
            return Err(Error::invalid("mean", "must be finite"));
        }
        Ok(())
    }

    /// Planted outlier positions in the training set (negative then positive).
    pub fn outlier_positions(&self) -> std::ops::Range<usize> {
        let start = 2 * self.n_per_group;
        start..start + 2 * self.outliers_per_group
    }

    pub fn describe(&self) -> String {
        format!(
            "simulation n={} d={} shift={} outliers={} seed={}",
            self.n_per_group, self.d, self.shift, self.outliers_per_group, self.seed
        )
    }
}

fn gaussian_block(
    stream: &mut Stream,
    count: usize,
    d: usize,
    mean: f64,
    label: i8,
    first_id: usize,
    samples: &mut Vec<Sample>,
    labels: &mut Vec<i8>,
) {
    for n in 0..count {
        let values = (0..d).map(|_| mean + stream.normal()).collect();
        samples.push(Sample::vector((first_id + n).to_string(), values));
        labels.push(label);
    }
}

/// Training and test sets for one run. Training ids run 1..: negatives,
/// positives, negative-labeled outliers, positive-labeled outliers.
pub fn gen_simulation(spec: &SimulationSpec, run: usize) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let root = Stream::new(spec.seed, &[SIMULATION_TAG, run as u64]);
    let n = spec.n_per_group;
    let d = spec.d;

    let (mut samples, mut labels) = (Vec::new(), Vec::new());
    gaussian_block(&mut root.child(0), n, d, 0.0, -1, 1, &mut samples, &mut labels);
    gaussian_block(&mut root.child(1), n, d, spec.shift, 1, n + 1, &mut samples, &mut labels);
    let m = spec.outliers_per_group;
    gaussian_block(&mut root.child(2), m, d, spec.outlier_mean_negative, -1, 2 * n + 1, &mut samples, &mut labels);
    gaussian_block(&mut root.child(3), m, d, spec.outlier_mean_positive, 1, 2 * n + m + 1, &mut samples, &mut labels);
    let desc = format!("{} run={run}", spec.describe());
    let train = Dataset::new(samples, labels, format!("{desc} train"))?;

    let neg = spec.test_size / 2;
    let pos = spec.test_size - neg;
    let (mut samples, mut labels) = (Vec::new(), Vec::new());
    gaussian_block(&mut root.child(4), neg, d, 0.0, -1, 1, &mut samples, &mut labels);
    gaussian_block(&mut root.child(5), pos, d, spec.shift, 1, neg + 1, &mut samples, &mut labels);
    let test = Dataset::new(samples, labels, format!("{desc} test"))?;
    Ok((train, test))
}

/// Standard deviation of the jitter around the planted toy outliers.
pub const TOY_JITTER_SD: f64 = 0.316_227_766_016_837_94; // sqrt(0.1)

/// Two bivariate Gaussian groups plus six planted outliers, ids 1..=66.
pub fn gen_toy(seed: u64) -> Dataset {
    let root = Stream::new(seed, &[TOY_TAG]);
    let mut samples = Vec::with_capacity(66);
    let mut labels = Vec::with_capacity(66);
    let mut push = |stream: &mut Stream, count: usize, center: (f64, f64), sd: f64, label: i8| {
        for _ in 0..count {
            let x = center.0 + sd * stream.normal();
            let y = center.1 + sd * stream.normal();
            samples.push(Sample::vector((samples.len() + 1).to_string(), vec![x, y]));
            labels.push(label);
        }
    };
    push(&mut root.child(0), 30, (0.0, 0.0), 1.0, -1);
    push(&mut root.child(1), 30, (1.5, 1.5), 1.0, 1);
    push(&mut root.child(2), 3, (5.0, 7.0), TOY_JITTER_SD, 1);
    push(&mut root.child(3), 2, (5.0, -5.0), TOY_JITTER_SD, 1);
    samples.push(Sample::vector("66", vec![0.0, 0.0]));
    labels.push(1);
    Dataset::new(samples, labels, format!("toy seed={seed}")).expect("labels are +-1")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRow {
    pub run: usize,
    pub kappa: f64,
    /// Test misclassification fraction, or the failure message.
    pub error: std::result::Result<f64, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSummary {
    pub kappa: f64,
    pub runs: usize,
    pub failures: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTable {
    pub rows: Vec<SimulationRow>,
}

impl SimulationTable {
    pub fn errors_for(&self, kappa: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.kappa == kappa)
            .filter_map(|r| r.error.as_ref().ok().copied())
            .collect()
    }

    pub fn summary(&self) -> Vec<SimulationSummary> {
        let mut kappas: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !kappas.contains(&r.kappa) {
                kappas.push(r.kappa);
            }
        }
        kappas
            .into_iter()
            .map(|kappa| {
                let rows: Vec<_> = self.rows.iter().filter(|r| r.kappa == kappa).collect();
                let mut errors = self.errors_for(kappa);
                errors.sort_by(f64::total_cmp);
                SimulationSummary {
                    kappa,
                    runs: rows.len(),
                    failures: rows.len() - errors.len(),
                    median: quantile(&errors, 0.5),
                    q1: quantile(&errors, 0.25),
                    q3: quantile(&errors, 0.75),
                }
            })
            .collect()
    }

    /// `run,kappa,error`; failed rows carry `NaN`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "run,kappa,error")?;
        for r in &self.rows {
            match &r.error {
                Ok(e) => writeln!(out, "{},{},{}", r.run, r.kappa, e)?,
                Err(_) => writeln!(out, "{},{},NaN", r.run, r.kappa)?,
            }
        }
        Ok(())
    }
}

/// Linearly interpolated quantile of sorted data; NaN when empty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fit every kappa on each run's training set and score it on the run's test set.
pub fn run_simulation(
    spec: &SimulationSpec,
    kernel: &KernelSpec,
    cv: &CvConfig,
    policy: DirectionPolicy,
    tol: f64,
) -> Result<SimulationTable> {
    spec.validate()?;
    kernel.validate()?;
    cv.validate()?;
    let per_run: Vec<Vec<SimulationRow>> = (0..spec.runs)
        .into_par_iter()
        .map(|run| simulate_run(spec, run, kernel, cv, policy, tol))
        .collect();
    Ok(SimulationTable {
        rows: per_run.into_iter().flatten().collect(),
    })
}

fn simulate_run(
    spec: &SimulationSpec,
    run: usize,
    kernel: &KernelSpec,
    cv: &CvConfig,
    policy: DirectionPolicy,
    tol: f64,
) -> Vec<SimulationRow> {
    let fail = |msg: String| -> Vec<SimulationRow> {
        spec.kappas
            .iter()
            .map(|&kappa| SimulationRow {
                run,
                kappa,
                error: Err(msg.clone()),
            })
            .collect()
    };
    let (train, test) = match gen_simulation(spec, run) {
        Ok(sets) => sets,
        Err(e) => return fail(e.to_string()),
    };
    let run_seed = crate::rng::derive_key(spec.seed, &[SIMULATION_TAG, run as u64, 0xF17]);
    let prepared = match pipeline::prepare(&train, kernel, policy.with_seed(run_seed)) {
        Ok(p) => p,
        Err(e) => return fail(e.to_string()),
    };
    let cv = CvConfig {
        seed: run_seed,
        ..cv.clone()
    };
    spec.kappas
        .iter()
        .map(|&kappa| {
            let error = pipeline::fit_prepared(&prepared, &train, kappa, &cv, tol)
                .and_then(|fit| fit.test_error(&test))
                .map_err(|e| e.to_string());
            SimulationRow { run, kappa, error }
        })
        .collect()
}
