//! Soft-margin SVM dual, solved by two-variable decomposition.
//!
//! The problem is
//!
//! ```text
//! max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! with classifier `f(x) = sum_i a_i y_i K(x_i, x) + b`. Each step picks the
//! maximal violating pair and solves the two-variable subproblem exactly.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{KernelMatrix, KernelSpec};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_ITERATIONS: u64 = 10_000_000;
/// Relative (to C) margin used to call a coefficient free rather than at a bound.
pub const INTERIOR_TOLERANCE: f64 = 1e-8;
const TAU: f64 = 1e-12;

const MODEL_MAGIC: &str = "sdsvm-model v1";

/// Training labels, aligned with rows of the training kernel matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSet {
    /// Positions in the parent dataset.
    pub indices: Vec<usize>,
    pub labels: Vec<i8>,
}

impl LabeledSet {
    pub fn new(indices: Vec<usize>, labels: Vec<i8>) -> Result<Self> {
        if indices.len() != labels.len() {
            return Err(Error::Dimension {
                expected: indices.len(),
                found: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::invalid("label", format!("{bad} is not -1 or +1")));
        }
        Ok(Self { indices, labels })
    }

    /// Labels for positions `0..labels.len()`.
    pub fn from_labels(labels: Vec<i8>) -> Result<Self> {
        Self::new((0..labels.len()).collect(), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_minus(&self) -> usize {
        self.labels.iter().filter(|&&y| y == -1).count()
    }

    pub fn n_plus(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    /// Restrict to the given positions of this set.
    pub fn subset(&self, positions: &[usize]) -> LabeledSet {
        LabeledSet {
            indices: positions.iter().map(|&p| self.indices[p]).collect(),
            labels: positions.iter().map(|&p| self.labels[p]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub kernel: KernelSpec,
    pub c: f64,
    pub tol: f64,
    /// Ids of the training samples, in kernel-matrix order.
    pub ids: Vec<String>,
    pub labels: Vec<i8>,
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: u64,
}

impl SvmModel {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Dual objective `sum a - 1/2 a'Qa` against the training kernel matrix.
    pub fn objective(&self, omega: &KernelMatrix) -> f64 {
        dual_objective(omega, &self.labels, &self.alpha)
    }

    pub fn is_free(&self, i: usize) -> bool {
        let eps = INTERIOR_TOLERANCE * self.c;
        self.alpha[i] > eps && self.alpha[i] < self.c - eps
    }

    pub fn support_count(&self) -> usize {
        self.alpha.iter().filter(|&&a| a > 0.0).count()
    }

    /// Plain-text form: header, one `id label alpha` line per training sample, bias.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "{MODEL_MAGIC} C={} tol={} kernel: {}", self.c, self.tol, self.kernel).unwrap();
        for ((id, y), a) in self.ids.iter().zip(&self.labels).zip(&self.alpha) {
            check_token(id)?;
            writeln!(out, "{id}\t{y}\t{a}").unwrap();
        }
        writeln!(out, "bias\t{}", self.bias).unwrap();
        Ok(out)
    }

    /// Inverse of [`SvmModel::to_text`]. A precomputed kernel needs its matrix supplied.
    pub fn from_text(text: &str, precomputed: Option<Arc<KernelMatrix>>) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
        let parse_err = |line: usize, message: String| Error::Parse { line: line + 1, message };
        let rest = header
            .strip_prefix(MODEL_MAGIC)
            .ok_or_else(|| parse_err(0, format!("expected {MODEL_MAGIC:?} header")))?;
        let (params, kernel_text) = rest
            .split_once("kernel:")
            .ok_or_else(|| parse_err(0, "missing kernel".into()))?;
        let mut c = None;
        let mut tol = None;
        for part in params.split_whitespace() {
            match part.split_once('=') {
                Some(("C", v)) => c = Some(parse_f64(v, 1)?),
                Some(("tol", v)) => tol = Some(parse_f64(v, 1)?),
                _ => return Err(parse_err(0, format!("unexpected header field {part:?}"))),
            }
        }
        let kernel = KernelSpec::parse(kernel_text.trim(), precomputed)?;
        let mut model = SvmModel {
            kernel,
            c: c.ok_or_else(|| parse_err(0, "missing C".into()))?,
            tol: tol.ok_or_else(|| parse_err(0, "missing tol".into()))?,
            ids: Vec::new(),
            labels: Vec::new(),
            alpha: Vec::new(),
            bias: 0.0,
            iterations: 0,
        };
        let mut saw_bias = false;
        for (n, line) in lines {
            if saw_bias {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(parse_err(n, "content after bias line".into()));
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["bias", b] => {
                    model.bias = parse_f64(b, n + 1)?;
                    saw_bias = true;
                }
                [id, y, a] => {
                    let y: i8 = y.parse().map_err(|_| parse_err(n, format!("bad label {y:?}")))?;
                    if y != 1 && y != -1 {
                        return Err(Error::Label {
                            line: n + 1,
                            message: format!("{y} is not -1 or +1"),
                        });
                    }
                    model.ids.push(id.to_string());
                    model.labels.push(y);
                    model.alpha.push(parse_f64(a, n + 1)?);
                }
                _ => return Err(parse_err(n, format!("malformed line {line:?}"))),
            }
        }
        if !saw_bias {
            return Err(Error::Parse {
                line: text.lines().count(),
                message: "missing bias line".into(),
            });
        }
        Ok(model)
    }
}

pub(crate) fn check_token(id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == ',') {
        return Err(Error::invalid("id", format!("{id:?} must be non-empty without whitespace or commas")));
    }
    Ok(())
}

pub(crate) fn parse_f64(text: &str, line: usize) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {text:?}"),
    })
}

pub fn dual_objective(omega: &KernelMatrix, labels: &[i8], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        let row = omega.row(i);
        let inner: f64 = (0..n)
            .map(|j| alpha[j] * labels[j] as f64 * row[j])
            .sum();
        quad += alpha[i] * labels[i] as f64 * inner;
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Maximize the dual on `omega` for the given labels.
///
/// The returned model carries a precomputed kernel over `omega` and ids
/// taken from `labels.indices`; callers that know the real kernel and sample
/// ids overwrite those fields.
pub fn solve_dual(omega: &KernelMatrix, labels: &LabeledSet, c: f64, tol: f64) -> Result<SvmModel> {
    solve_dual_capped(omega, labels, c, tol, DEFAULT_MAX_ITERATIONS)
}

pub fn solve_dual_capped(
    omega: &KernelMatrix,
    labels: &LabeledSet,
    c: f64,
    tol: f64,
    max_iterations: u64,
) -> Result<SvmModel> {
    let n = labels.len();
    if omega.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: omega.len(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("C", format!("must be > 0, got {c}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    if labels.n_minus() == 0 || labels.n_plus() == 0 {
        return Err(Error::SingleClass);
    }

    let y: Vec<f64> = labels.labels.iter().map(|&v| v as f64).collect();
    let mut alpha = vec![0.0f64; n];
    // Gradient of 1/2 a'Qa - e'a.
    let mut grad = vec![-1.0f64; n];
    let mut iterations = 0u64;

    loop {
        let (i, j, violation) = select_pair(&alpha, &grad, &y, c);
        if violation < tol {
            break;
        }
        if iterations >= max_iterations {
            return Err(Error::Convergence {
                iterations,
                max_violation: violation,
            });
        }
        iterations += 1;
        let (i, j) = (i.expect("violating pair"), j.expect("violating pair"));

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (kii, kjj, kij) = (omega.get(i, i), omega.get(j, j), omega.get(i, j));
        let mut quad = kii + kjj - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (ri, rj) = (omega.row(i), omega.row(j));
        for t in 0..n {
            // Q[t][s] = y_t y_s K[t][s]
            grad[t] += y[t] * (y[i] * ri[t] * di + y[j] * rj[t] * dj);
        }
    }

    let bias = compute_bias(&alpha, &grad, &y, c);
    Ok(SvmModel {
        kernel: KernelSpec::Precomputed(Arc::new(omega.clone())),
        c,
        tol,
        ids: labels.indices.iter().map(|i| i.to_string()).collect(),
        labels: labels.labels.clone(),
        alpha,
        bias,
        iterations,
    })
}

/// Maximal violating pair and the violation `max_up(-yG) - min_low(-yG)`.
fn select_pair(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> (Option<usize>, Option<usize>, f64) {
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    let (mut i, mut j) = (None, None);
    for t in 0..alpha.len() {
        let score = -y[t] * grad[t];
        let in_up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
        let in_low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
        if in_up && score > up {
            up = score;
            i = Some(t);
        }
        if in_low && score < low {
            low = score;
            j = Some(t);
        }
    }
    (i, j, up - low)
}

fn compute_bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let eps = INTERIOR_TOLERANCE * c;
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c - eps {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= eps {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        0.5 * (upper + lower)
    };
    -rho
}

/// `f(x) = sum_i a_i y_i K(x_i, x) + b`, with `row[i] = K(x_i, x)`.
pub fn decision_value(model: &SvmModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.alpha.len() {
        return Err(Error::Dimension {
            expected: model.alpha.len(),
            found: row.len(),
        });
    }
    let sum: f64 = model
        .alpha
        .iter()
        .zip(&model.labels)
        .zip(row)
        .filter(|((&a, _), _)| a != 0.0)
        .map(|((&a, &y), &k)| a * y as f64 * k)
        .sum();
    Ok(sum + model.bias)
}

/// Sign of `f(x)`; zero maps to `+1`.
pub fn predict(model: &SvmModel, row: &[f64]) -> Result<i8> {
    decision_value(model, row).map(sign_label)
}

pub fn sign_label(f: f64) -> i8 {
    if f < 0.0 {
        -1
    } else {
        1
    }
}
