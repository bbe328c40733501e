//! The trimmed classifier: per-group outlyingness, retention of the least
//! outlying `floor(kappa * n)` samples of each group, cross-validated choice
//! of `C`, and an ordinary SVM on what remains.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result, StageExt};
use crate::kernel::{kernel_matrix, kernel_row, KernelMatrix, KernelSpec, Sample};
use crate::outlyingness::{outlyingness, DirectionPolicy, OutlyingnessReport};
use crate::rng::{derive_key, Stream};
use crate::svm::{self, check_token, decision_value, parse_f64, sign_label, solve_dual, LabeledSet, SvmModel};

pub const DEFAULT_KAPPA: f64 = 0.5;
pub const DEFAULT_C: f64 = 0.1;
pub const DEFAULT_FOLDS: usize = 10;

const DIRECTION_TAG: u64 = 0xD1;
const FOLD_TAG: u64 = 0xF0;
const FIT_MAGIC: &str = "sdsvm-fit v1";

pub fn check_kappa(kappa: f64) -> Result<()> {
    if (0.5..=1.0).contains(&kappa) {
        Ok(())
    } else {
        Err(Error::invalid("kappa", format!("must lie in [0.5, 1], got {kappa}")))
    }
}

/// `floor(kappa * n)`, guarding against products like `0.29 * 100 = 28.999...`.
pub fn retained_count(kappa: f64, n: usize) -> usize {
    ((kappa * n as f64) + 1e-9).floor() as usize
}

/// 2^-5, 2^-3, ..., 2^15.
pub fn default_c_grid() -> Vec<f64> {
    (0..11).map(|i| 2f64.powi(-5 + 2 * i)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrimPlan {
    pub kappa: f64,
    pub h_minus: usize,
    pub h_plus: usize,
    /// Dataset positions, ascending.
    pub retained_minus: Vec<usize>,
    pub retained_plus: Vec<usize>,
    /// Within-group outlyingness, indexed by dataset position.
    pub outlyingness: Vec<f64>,
    pub trimmed: Vec<bool>,
}

impl TrimPlan {
    /// `T = T- u T+`, ascending dataset positions.
    pub fn retained(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.retained_minus.iter().chain(&self.retained_plus).copied().collect();
        all.sort_unstable();
        all
    }
}

fn retain_least_outlying(positions: &[usize], r: &[f64], h: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| r[a].total_cmp(&r[b]).then(positions[a].cmp(&positions[b])));
    let mut kept: Vec<usize> = order[..h].iter().map(|&o| positions[o]).collect();
    kept.sort_unstable();
    kept
}

/// Keep the `floor(kappa * n)` least outlying samples of each group. Ties at
/// the cut go to the lower dataset position.
///
/// `labels` covers the whole dataset; each report lists its group's samples in
/// ascending position order.
pub fn trim(
    report_minus: &OutlyingnessReport,
    report_plus: &OutlyingnessReport,
    labels: &LabeledSet,
    kappa: f64,
) -> Result<TrimPlan> {
    check_kappa(kappa)?;
    let group = |label: i8| -> Vec<usize> {
        labels
            .indices
            .iter()
            .zip(&labels.labels)
            .filter(|(_, &y)| y == label)
            .map(|(&i, _)| i)
            .collect()
    };
    let (minus, plus) = (group(-1), group(1));
    for (report, members) in [(report_minus, &minus), (report_plus, &plus)] {
        if report.r.len() != members.len() {
            return Err(Error::Dimension {
                expected: members.len(),
                found: report.r.len(),
            });
        }
    }
    let h_minus = retained_count(kappa, minus.len());
    let h_plus = retained_count(kappa, plus.len());
    for (label, h, n) in [(-1, h_minus, minus.len()), (1, h_plus, plus.len())] {
        if h == 0 {
            return Err(Error::GroupEmptyAfterTrim { label, n, kappa });
        }
    }

    let size = labels.indices.iter().copied().max().map_or(0, |m| m + 1);
    let mut outlying = vec![f64::NAN; size];
    for (members, report) in [(&minus, report_minus), (&plus, report_plus)] {
        for (&pos, &r) in members.iter().zip(&report.r) {
            outlying[pos] = r;
        }
    }
    let retained_minus = retain_least_outlying(&minus, &report_minus.r, h_minus);
    let retained_plus = retain_least_outlying(&plus, &report_plus.r, h_plus);
    let mut trimmed = vec![false; size];
    for &pos in labels.indices.iter() {
        trimmed[pos] = true;
    }
    for &pos in retained_minus.iter().chain(&retained_plus) {
        trimmed[pos] = false;
    }
    Ok(TrimPlan {
        kappa,
        h_minus,
        h_plus,
        retained_minus,
        retained_plus,
        outlyingness: outlying,
        trimmed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            grid: vec![DEFAULT_C],
            seed: 0,
            stratified: true,
        }
    }
}

impl CvConfig {
    pub fn fixed(c: f64) -> Self {
        Self {
            grid: vec![c],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid("folds", format!("must be >= 2, got {}", self.folds)));
        }
        if self.grid.is_empty() {
            return Err(Error::invalid("cv-grid", "must not be empty"));
        }
        if let Some(c) = self.grid.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::invalid("C", format!("must be > 0, got {c}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvRow {
    pub c: f64,
    /// Mean fold misclassification rate; `None` if a fold failed or CV was impossible.
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvOutcome {
    pub c: f64,
    pub table: Vec<CvRow>,
    pub folds_requested: usize,
    /// After clamping to the smallest class size; 0 when no CV ran.
    pub folds_used: usize,
}

/// Fold index per position of `labels`.
pub fn assign_folds(labels: &[i8], folds: usize, seed: u64, stratified: bool) -> Vec<usize> {
    let mut assignment = vec![0usize; labels.len()];
    let strata: Vec<Vec<usize>> = if stratified {
        [-1i8, 1]
            .iter()
            .map(|&y| (0..labels.len()).filter(|&i| labels[i] == y).collect())
            .collect()
    } else {
        vec![(0..labels.len()).collect()]
    };
    for (s, mut members) in strata.into_iter().enumerate() {
        Stream::new(seed, &[FOLD_TAG, s as u64]).shuffle(&mut members);
        for (rank, pos) in members.into_iter().enumerate() {
            assignment[pos] = rank % folds;
        }
    }
    assignment
}

fn fold_error(omega: &KernelMatrix, labels: &LabeledSet, folds: &[usize], fold: usize, c: f64, tol: f64) -> Result<(usize, usize)> {
    let train: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != fold).collect();
    let test: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == fold).collect();
    let model = solve_dual(&omega.submatrix(&train), &labels.subset(&train), c, tol)?;
    let wrong = test
        .iter()
        .filter(|&&t| {
            let row = omega.row(t);
            let kr: Vec<f64> = train.iter().map(|&j| row[j]).collect();
            let f = decision_value(&model, &kr).expect("row sized to the model");
            sign_label(f) != labels.labels[t]
        })
        .count();
    Ok((wrong, test.len()))
}

/// Cross-validated choice of `C` over `cv.grid`; ties go to the smallest `C`.
pub fn select_c(omega: &KernelMatrix, labels: &LabeledSet, cv: &CvConfig, tol: f64) -> Result<CvOutcome> {
    cv.validate()?;
    if labels.n_minus() == 0 || labels.n_plus() == 0 {
        return Err(Error::SingleClass);
    }
    let smallest = labels.n_minus().min(labels.n_plus());
    let folds_used = if cv.stratified { cv.folds.min(smallest) } else { cv.folds.min(labels.len()) };
    if folds_used < 2 {
        if cv.grid.len() == 1 {
            return Ok(CvOutcome {
                c: cv.grid[0],
                table: vec![CvRow { c: cv.grid[0], error: None }],
                folds_requested: cv.folds,
                folds_used: 0,
            });
        }
        return Err(Error::invalid("folds", "a class with one retained sample cannot be cross-validated"));
    }
    let assignment = assign_folds(&labels.labels, folds_used, cv.seed, cv.stratified);

    let jobs: Vec<(usize, usize)> = (0..cv.grid.len())
        .flat_map(|g| (0..folds_used).map(move |f| (g, f)))
        .collect();
    let results: Vec<Result<(usize, usize)>> = jobs
        .par_iter()
        .map(|&(g, f)| fold_error(omega, labels, &assignment, f, cv.grid[g], tol))
        .collect();

    let mut table = Vec::with_capacity(cv.grid.len());
    let mut last_error = None;
    for (g, &c) in cv.grid.iter().enumerate() {
        let mut rate_sum = 0.0;
        let mut failed = false;
        for f in 0..folds_used {
            match &results[g * folds_used + f] {
                Ok((wrong, total)) => rate_sum += *wrong as f64 / *total as f64,
                Err(e) => {
                    failed = true;
                    last_error = Some(e.to_string());
                }
            }
        }
        table.push(CvRow {
            c,
            error: (!failed).then(|| rate_sum / folds_used as f64),
        });
    }
    let best = table
        .iter()
        .filter_map(|row| row.error.map(|e| (e, row.c)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    match best {
        Some((_, c)) => Ok(CvOutcome {
            c,
            table,
            folds_requested: cv.folds,
            folds_used,
        }),
        None => match results.into_iter().find_map(|r| r.err()) {
            Some(e @ Error::Convergence { .. }) => Err(e),
            Some(other) => Err(other),
            None => Err(Error::invalid("cv", last_error.unwrap_or_default())),
        },
    }
}

/// Outlyingness bookkeeping for one group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub policy: DirectionPolicy,
    pub directions: usize,
    pub degenerate_pairs: usize,
}

impl From<&OutlyingnessReport> for GroupSummary {
    fn from(r: &OutlyingnessReport) -> Self {
        Self {
            policy: r.policy,
            directions: r.directions,
            degenerate_pairs: r.degenerate_pairs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub kernel: KernelSpec,
    /// As requested (may be `Auto`).
    pub policy: DirectionPolicy,
    pub groups: [GroupSummary; 2],
    pub tol: f64,
    pub cv: CvOutcome,
    pub cv_seed: u64,
    pub stratified: bool,
    pub plan: TrimPlan,
    /// Trained on the retained set; ids are dataset ids.
    pub model: SvmModel,
    pub ids: Vec<String>,
    pub labels: Vec<i8>,
    /// `f(x_j)` for every training sample, trimmed ones included.
    pub decision: Vec<f64>,
    /// Payloads of the retained samples; absent for fits read back from text.
    pub retained_samples: Option<Vec<Sample>>,
}

impl FitResult {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn c(&self) -> f64 {
        self.cv.c
    }

    pub fn decision_function(&self, x: &Sample) -> Result<f64> {
        let basis = self
            .retained_samples
            .as_ref()
            .ok_or_else(|| Error::invalid("fit", "training payloads are not available"))?;
        let row = kernel_row(&self.kernel, basis, x)?;
        decision_value(&self.model, &row)
    }

    pub fn predict(&self, x: &Sample) -> Result<i8> {
        self.decision_function(x).map(sign_label)
    }

    /// Misclassified fraction of `test`.
    pub fn test_error(&self, test: &Dataset) -> Result<f64> {
        if test.is_empty() {
            return Err(Error::EmptyInput);
        }
        let basis = self
            .retained_samples
            .as_ref()
            .ok_or_else(|| Error::invalid("fit", "training payloads are not available"))?;
        // Only support vectors contribute to f.
        let support: Vec<usize> = (0..self.model.len()).filter(|&i| self.model.alpha[i] != 0.0).collect();
        let wrong = test
            .samples
            .par_iter()
            .zip(&test.labels)
            .map(|(x, &y)| -> Result<usize> {
                let mut f = self.model.bias;
                let mut terms = 0.0;
                for &i in &support {
                    let k = crate::kernel::eval_kernel(&self.kernel, &basis[i], x)?;
                    terms += self.model.alpha[i] * self.model.labels[i] as f64 * k;
                }
                f += terms;
                Ok(usize::from(sign_label(f) != y))
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum::<usize>();
        Ok(wrong as f64 / test.len() as f64)
    }

    /// Plain-text report: provenance header, model block, per-sample table.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        let w = &mut out;
        writeln!(w, "{FIT_MAGIC}").unwrap();
        writeln!(w, "kernel\t{}", self.kernel).unwrap();
        writeln!(w, "kappa\t{}", self.plan.kappa).unwrap();
        writeln!(w, "policy\t{}", self.policy).unwrap();
        for (name, g) in ["negative", "positive"].iter().zip(&self.groups) {
            writeln!(w, "directions\t{name}\t{}\t{}\t{}", g.directions, g.degenerate_pairs, g.policy).unwrap();
        }
        writeln!(w, "retained\t{}\t{}", self.plan.h_minus, self.plan.h_plus).unwrap();
        writeln!(w, "tol\t{}", self.tol).unwrap();
        writeln!(
            w,
            "cv\tfolds={}\tused={}\tseed={}\tstratified={}",
            self.cv.folds_requested, self.cv.folds_used, self.cv_seed, self.stratified
        )
        .unwrap();
        for row in &self.cv.table {
            match row.error {
                Some(e) => writeln!(w, "cv_error\t{}\t{}", row.c, e).unwrap(),
                None => writeln!(w, "cv_error\t{}\tNA", row.c).unwrap(),
            }
        }
        writeln!(w, "C\t{}", self.cv.c).unwrap();
        writeln!(w, "[model]").unwrap();
        w.push_str(&self.model.to_text()?);
        writeln!(w, "[samples]").unwrap();
        writeln!(w, "id,label,outlyingness,trimmed,f").unwrap();
        for i in 0..self.len() {
            check_token(&self.ids[i])?;
            writeln!(
                w,
                "{},{},{},{},{}",
                self.ids[i], self.labels[i], self.plan.outlyingness[i], self.plan.trimmed[i], self.decision[i]
            )
            .unwrap();
        }
        Ok(out)
    }

    /// Inverse of [`FitResult::to_text`], without training payloads.
    pub fn from_text(text: &str) -> Result<Self> {
        FitParser::default().parse(text)
    }
}

#[derive(Default)]
struct FitParser {
    kernel: Option<String>,
    kappa: Option<f64>,
    policy: Option<DirectionPolicy>,
    groups: Vec<GroupSummary>,
    retained: Option<(usize, usize)>,
    tol: Option<f64>,
    folds: Option<(usize, usize, u64, bool)>,
    table: Vec<CvRow>,
    c: Option<f64>,
}

impl FitParser {
    fn parse(mut self, text: &str) -> Result<FitResult> {
        let lines: Vec<&str> = text.lines().collect();
        let err = |line: usize, message: String| Error::Parse { line: line + 1, message };
        if lines.first() != Some(&FIT_MAGIC) {
            return Err(err(0, format!("expected {FIT_MAGIC:?} header")));
        }
        let model_at = lines
            .iter()
            .position(|l| *l == "[model]")
            .ok_or_else(|| err(lines.len(), "missing [model] block".into()))?;
        let samples_at = lines
            .iter()
            .position(|l| *l == "[samples]")
            .ok_or_else(|| err(lines.len(), "missing [samples] block".into()))?;
        if samples_at < model_at {
            return Err(err(samples_at, "[samples] before [model]".into()));
        }

        for (n, line) in lines.iter().enumerate().take(model_at).skip(1) {
            let fields: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| parse_f64(s, n + 1);
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(n, format!("not an integer: {s:?}")));
            let kv = |s: &str, key: &str| -> Result<String> {
                s.strip_prefix(key)
                    .and_then(|r| r.strip_prefix('='))
                    .map(str::to_string)
                    .ok_or_else(|| err(n, format!("expected {key}=")))
            };
            match fields.as_slice() {
                ["kernel", k] => self.kernel = Some(k.to_string()),
                ["kappa", k] => self.kappa = Some(num(k)?),
                ["policy", p] => self.policy = Some(p.parse()?),
                ["directions", _, count, degenerate, policy] => self.groups.push(GroupSummary {
                    policy: policy.parse()?,
                    directions: int(count)?,
                    degenerate_pairs: int(degenerate)?,
                }),
                ["retained", a, b] => self.retained = Some((int(a)?, int(b)?)),
                ["tol", t] => self.tol = Some(num(t)?),
                ["cv", f, u, s, st] => {
                    let seed = kv(s, "seed")?
                        .parse::<u64>()
                        .map_err(|_| err(n, "bad cv seed".into()))?;
                    let stratified = kv(st, "stratified")? == "true";
                    self.folds = Some((int(&kv(f, "folds")?)?, int(&kv(u, "used")?)?, seed, stratified));
                }
                ["cv_error", c, e] => self.table.push(CvRow {
                    c: num(c)?,
                    error: if *e == "NA" { None } else { Some(num(e)?) },
                }),
                ["C", c] => self.c = Some(num(c)?),
                _ => return Err(err(n, format!("unrecognized line {line:?}"))),
            }
        }

        let missing = |what: &str| err(model_at, format!("missing {what}"));
        let kernel_text = self.kernel.ok_or_else(|| missing("kernel"))?;
        let kappa = self.kappa.ok_or_else(|| missing("kappa"))?;
        let (h_minus, h_plus) = self.retained.ok_or_else(|| missing("retained"))?;
        let (folds_requested, folds_used, cv_seed, stratified) = self.folds.ok_or_else(|| missing("cv"))?;
        let groups: [GroupSummary; 2] = self
            .groups
            .try_into()
            .map_err(|_| missing("two directions lines"))?;

        let mut model = SvmModel::from_text(&lines[model_at + 1..samples_at].join("\n"), None).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line: line + model_at + 1,
                message,
            },
            other => other,
        })?;
        let kernel = KernelSpec::parse(&kernel_text, None)?;
        model.kernel = kernel.clone();

        let header = samples_at + 1;
        if lines.get(header) != Some(&"id,label,outlyingness,trimmed,f") {
            return Err(err(header, "missing sample table header".into()));
        }
        let (mut ids, mut labels, mut outlying, mut trimmed, mut decision) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (n, line) in lines.iter().enumerate().skip(header + 1) {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let [id, y, r, t, f] = fields.as_slice() else {
                return Err(err(n, format!("expected 5 fields, got {}", fields.len())));
            };
            ids.push(id.to_string());
            labels.push(match *y {
                "-1" => -1,
                "1" => 1,
                other => {
                    return Err(Error::Label {
                        line: n + 1,
                        message: format!("{other:?} is not -1 or 1"),
                    })
                }
            });
            outlying.push(parse_f64(r, n + 1)?);
            trimmed.push(match *t {
                "true" => true,
                "false" => false,
                other => return Err(err(n, format!("bad trimmed flag {other:?}"))),
            });
            decision.push(parse_f64(f, n + 1)?);
        }
        let retained = |label: i8| -> Vec<usize> {
            (0..ids.len()).filter(|&i| labels[i] == label && !trimmed[i]).collect()
        };
        let plan = TrimPlan {
            kappa,
            h_minus,
            h_plus,
            retained_minus: retained(-1),
            retained_plus: retained(1),
            outlyingness: outlying,
            trimmed,
        };
        if plan.retained_minus.len() != h_minus || plan.retained_plus.len() != h_plus {
            return Err(err(header, "trimmed flags disagree with retained counts".into()));
        }
        Ok(FitResult {
            kernel,
            policy: self.policy.ok_or_else(|| missing("policy"))?,
            groups,
            tol: self.tol.ok_or_else(|| missing("tol"))?,
            cv: CvOutcome {
                c: self.c.ok_or_else(|| missing("C"))?,
                table: self.table,
                folds_requested,
                folds_used,
            },
            cv_seed,
            stratified,
            plan,
            model,
            ids,
            labels,
            decision,
            retained_samples: None,
        })
    }
}

/// Kernel matrix and per-group outlyingness, shared across trimming fractions.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub kernel: KernelSpec,
    pub policy: DirectionPolicy,
    pub omega: KernelMatrix,
    pub labels: LabeledSet,
    pub report_minus: OutlyingnessReport,
    pub report_plus: OutlyingnessReport,
}

/// Per-group direction seed; each group's pairs depend only on the group.
pub fn group_policy(policy: DirectionPolicy, label: i8) -> DirectionPolicy {
    match policy.seed() {
        Some(seed) => policy.with_seed(derive_key(seed, &[DIRECTION_TAG, (label + 1) as u64])),
        None => policy,
    }
}

pub fn prepare(dataset: &Dataset, kernel: &KernelSpec, policy: DirectionPolicy) -> Result<Prepared> {
    kernel.validate().stage("kernel")?;
    let labels = LabeledSet::new((0..dataset.len()).collect(), dataset.labels.clone())?;
    for label in [-1i8, 1] {
        let n = dataset.group(label).len();
        if n < 3 {
            return Err(Error::TooFewSamples(n)).stage(if label < 0 {
                "outlyingness (negative group)"
            } else {
                "outlyingness (positive group)"
            });
        }
    }
    let omega = kernel_matrix(kernel, &dataset.samples).stage("kernel")?;
    let minus = dataset.group(-1);
    let plus = dataset.group(1);
    let report_minus =
        outlyingness(&omega.submatrix(&minus), group_policy(policy, -1)).stage("outlyingness (negative group)")?;
    let report_plus =
        outlyingness(&omega.submatrix(&plus), group_policy(policy, 1)).stage("outlyingness (positive group)")?;
    Ok(Prepared {
        kernel: kernel.clone(),
        policy,
        omega,
        labels,
        report_minus,
        report_plus,
    })
}

pub fn fit_prepared(prepared: &Prepared, dataset: &Dataset, kappa: f64, cv: &CvConfig, tol: f64) -> Result<FitResult> {
    let plan = trim(&prepared.report_minus, &prepared.report_plus, &prepared.labels, kappa).stage("trim")?;
    let retained = plan.retained();
    let omega_t = prepared.omega.submatrix(&retained);
    let labels_t = prepared.labels.subset(&retained);
    let outcome = select_c(&omega_t, &labels_t, cv, tol).stage("cross-validation")?;
    let mut model = solve_dual(&omega_t, &labels_t, outcome.c, tol).stage("training")?;
    model.kernel = prepared.kernel.clone();
    model.ids = retained.iter().map(|&i| dataset.samples[i].id.clone()).collect();

    let decision = (0..dataset.len())
        .map(|j| {
            let row = prepared.omega.row(j);
            let kr: Vec<f64> = retained.iter().map(|&i| row[i]).collect();
            svm::decision_value(&model, &kr)
        })
        .collect::<Result<Vec<f64>>>()
        .stage("decision values")?;

    Ok(FitResult {
        kernel: prepared.kernel.clone(),
        policy: prepared.policy,
        groups: [(&prepared.report_minus).into(), (&prepared.report_plus).into()],
        tol,
        cv: outcome,
        cv_seed: cv.seed,
        stratified: cv.stratified,
        plan,
        model,
        ids: dataset.ids(),
        labels: dataset.labels.clone(),
        decision,
        retained_samples: Some(retained.iter().map(|&i| dataset.samples[i].clone()).collect()),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub kernel: KernelSpec,
    pub kappa: f64,
    pub cv: CvConfig,
    pub policy: DirectionPolicy,
    pub tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::Linear,
            kappa: DEFAULT_KAPPA,
            cv: CvConfig::default(),
            policy: DirectionPolicy::default(),
            tol: svm::DEFAULT_TOLERANCE,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        self.kernel.validate()?;
        self.cv.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", "must be > 0"));
        }
        Ok(())
    }
}

/// Per-group outlyingness, trimming, choice of `C`, training, and decision
/// values for every sample.
pub fn fit_sdsvm(dataset: &Dataset, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let prepared = prepare(dataset, &config.kernel, config.policy)?;
    fit_prepared(&prepared, dataset, config.kappa, &config.cv, config.tol)
}
