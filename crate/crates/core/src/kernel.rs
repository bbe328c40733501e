//! Kernel functions and Gram matrices.
//!
//! Feature vectors are never formed; everything downstream works from the
//! [`KernelMatrix`] alone.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense k-mer tables are used up to this many cells.
const DENSE_SPECTRUM_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Vector(Vec<f64>),
    Text(String),
    /// Row of a precomputed kernel matrix.
    Index(usize),
}

impl Payload {
    fn kind(&self) -> &'static str {
        match self {
            Payload::Vector(_) => "vector",
            Payload::Text(_) => "string",
            Payload::Index(_) => "index",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub payload: Payload,
}

impl Sample {
    pub fn vector(id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            payload: Payload::Vector(values),
        }
    }

    pub fn text(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            payload: Payload::Text(text.into()),
        }
    }

    pub fn index(id: impl Into<String>, row: usize) -> Self {
        Self {
            id: id.into(),
            payload: Payload::Index(row),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    Linear,
    /// `exp(-gamma * |a - b|^2)`
    Rbf { gamma: f64 },
    /// `(gamma * <a, b> + coef0)^degree`
    Polynomial { gamma: f64, degree: u32, coef0: f64 },
    /// Inner product of k-mer count vectors.
    Spectrum { kmer: usize },
    Precomputed(Arc<KernelMatrix>),
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polynomial(gamma: f64, degree: u32, coef0: f64) -> Result<Self> {
        let spec = KernelSpec::Polynomial {
            gamma,
            degree,
            coef0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn spectrum(kmer: usize) -> Result<Self> {
        let spec = KernelSpec::Spectrum { kmer };
        spec.validate()?;
        Ok(spec)
    }

    pub fn precomputed(matrix: KernelMatrix) -> Result<Self> {
        let spec = KernelSpec::Precomputed(Arc::new(matrix));
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } => {
                if gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")))
                }
            }
            KernelSpec::Polynomial {
                gamma,
                degree,
                coef0,
            } => {
                if degree < 1 {
                    Err(Error::invalid("degree", "must be >= 1"))
                } else if !gamma.is_finite() || !coef0.is_finite() {
                    Err(Error::invalid("gamma/coef0", "must be finite"))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Spectrum { kmer } => {
                if kmer >= 1 {
                    Ok(())
                } else {
                    Err(Error::invalid("kmer", "must be >= 1"))
                }
            }
            KernelSpec::Precomputed(ref m) => {
                if m.is_symmetric() {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "precomputed",
                        "kernel matrix must be square and symmetric",
                    ))
                }
            }
        }
    }

    /// Parse the descriptor produced by `Display`. Precomputed kernels carry
    /// their matrix out of band, so it must be supplied here.
    pub fn parse(text: &str, precomputed: Option<Arc<KernelMatrix>>) -> Result<Self> {
        let mut parts = text.split_whitespace();
        let kind = parts.next().ok_or(Error::EmptyInput)?;
        let mut params = BTreeMap::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid("kernel", format!("bad parameter {part:?}")))?;
            params.insert(k, v);
        }
        let num = |name: &'static str| -> Result<f64> {
            params
                .get(name)
                .ok_or_else(|| Error::invalid(name, "missing"))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(name, e.to_string()))
        };
        let int = |name: &'static str| -> Result<usize> {
            params
                .get(name)
                .ok_or_else(|| Error::invalid(name, "missing"))?
                .parse::<usize>()
                .map_err(|e| Error::invalid(name, e.to_string()))
        };
        match kind {
            "linear" => Ok(KernelSpec::Linear),
            "rbf" => KernelSpec::rbf(num("gamma")?),
            "polynomial" => {
                let degree = u32::try_from(int("degree")?)
                    .map_err(|e| Error::invalid("degree", e.to_string()))?;
                KernelSpec::polynomial(num("gamma")?, degree, num("coef0")?)
            }
            "spectrum" => KernelSpec::spectrum(int("kmer")?),
            "precomputed" => {
                let matrix = precomputed.ok_or_else(|| {
                    Error::invalid("kernel", "precomputed kernel needs its matrix")
                })?;
                let spec = KernelSpec::Precomputed(matrix);
                spec.validate()?;
                Ok(spec)
            }
            other => Err(Error::invalid("kernel", format!("unknown kind {other:?}"))),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf gamma={gamma}"),
            KernelSpec::Polynomial {
                gamma,
                degree,
                coef0,
            } => write!(f, "polynomial gamma={gamma} degree={degree} coef0={coef0}"),
            KernelSpec::Spectrum { kmer } => write!(f, "spectrum kmer={kmer}"),
            KernelSpec::Precomputed(m) => write!(f, "precomputed k={}", m.len()),
        }
    }
}

/// Symmetric k x k Gram matrix, dense row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self { k, entries })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    pub fn trace(&self) -> f64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.k).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> KernelMatrix {
        let k = indices.len();
        let mut entries = Vec::with_capacity(k * k);
        for &i in indices {
            let row = self.row(i);
            entries.extend(indices.iter().map(|&j| row[j]));
        }
        KernelMatrix { k, entries }
    }
}

/// Evaluate the kernel on one pair of samples.
pub fn eval_kernel(spec: &KernelSpec, a: &Sample, b: &Sample) -> Result<f64> {
    match (spec, &a.payload, &b.payload) {
        (KernelSpec::Linear, Payload::Vector(x), Payload::Vector(y)) => dot(x, y),
        (KernelSpec::Rbf { gamma }, Payload::Vector(x), Payload::Vector(y)) => {
            Ok((-gamma * squared_distance(x, y)?).exp())
        }
        (
            KernelSpec::Polynomial {
                gamma,
                degree,
                coef0,
            },
            Payload::Vector(x),
            Payload::Vector(y),
        ) => Ok((gamma * dot(x, y)? + coef0).powi(*degree as i32)),
        (KernelSpec::Spectrum { kmer }, Payload::Text(s), Payload::Text(t)) => {
            let alphabet = Alphabet::from_texts([s.as_str(), t.as_str()]);
            let ps = KmerProfile::new(s, *kmer, &alphabet);
            let pt = KmerProfile::new(t, *kmer, &alphabet);
            Ok(ps.dot(&pt))
        }
        (KernelSpec::Precomputed(m), Payload::Index(i), Payload::Index(j)) => {
            if *i >= m.len() || *j >= m.len() {
                return Err(Error::Dimension {
                    expected: m.len(),
                    found: (*i).max(*j) + 1,
                });
            }
            Ok(m.get(*i, *j))
        }
        (spec, pa, pb) => Err(Error::KernelType(format!(
            "{} kernel cannot take ({}, {}) payloads",
            kind_name(spec),
            pa.kind(),
            pb.kind()
        ))),
    }
}

fn kind_name(spec: &KernelSpec) -> &'static str {
    match spec {
        KernelSpec::Linear => "linear",
        KernelSpec::Rbf { .. } => "rbf",
        KernelSpec::Polynomial { .. } => "polynomial",
        KernelSpec::Spectrum { .. } => "spectrum",
        KernelSpec::Precomputed(_) => "precomputed",
    }
}

/// Kernel matrix over `samples`. Each unordered pair is evaluated once (as
/// `K(s_i, s_j)` with `i <= j`) and mirrored.
pub fn kernel_matrix(spec: &KernelSpec, samples: &[Sample]) -> Result<KernelMatrix> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_homogeneous(samples)?;
    let k = samples.len();

    let upper: Vec<Vec<f64>> = match spec {
        KernelSpec::Spectrum { kmer } => {
            let texts = samples
                .iter()
                .enumerate()
                .map(|(i, s)| match &s.payload {
                    Payload::Text(t) => Ok(t.as_str()),
                    other => Err(Error::KernelPair {
                        i,
                        j: i,
                        source: Box::new(Error::KernelType(format!(
                            "spectrum kernel cannot take {} payloads",
                            other.kind()
                        ))),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            let alphabet = Alphabet::from_texts(texts.iter().copied());
            let profiles: Vec<KmerProfile> = texts
                .par_iter()
                .map(|t| KmerProfile::new(t, *kmer, &alphabet))
                .collect();
            (0..k)
                .into_par_iter()
                .map(|i| (i..k).map(|j| profiles[i].dot(&profiles[j])).collect())
                .collect()
        }
        _ => (0..k)
            .into_par_iter()
            .map(|i| {
                (i..k)
                    .map(|j| {
                        eval_kernel(spec, &samples[i], &samples[j]).map_err(|e| {
                            Error::KernelPair {
                                i,
                                j,
                                source: Box::new(e),
                            }
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut entries = vec![0.0; k * k];
    for (i, row) in upper.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            let j = i + offset;
            entries[i * k + j] = value;
            entries[j * k + i] = value;
        }
    }
    Ok(KernelMatrix { k, entries })
}

/// Kernel values `K(basis_i, x)` for every basis sample.
pub fn kernel_row(spec: &KernelSpec, basis: &[Sample], x: &Sample) -> Result<Vec<f64>> {
    basis.iter().map(|b| eval_kernel(spec, b, x)).collect()
}

fn check_homogeneous(samples: &[Sample]) -> Result<()> {
    let first = &samples[0].payload;
    for (i, s) in samples.iter().enumerate().skip(1) {
        match (first, &s.payload) {
            (Payload::Vector(a), Payload::Vector(b)) if a.len() != b.len() => {
                return Err(Error::KernelPair {
                    i: 0,
                    j: i,
                    source: Box::new(Error::Dimension {
                        expected: a.len(),
                        found: b.len(),
                    }),
                })
            }
            (a, b) if std::mem::discriminant(a) != std::mem::discriminant(b) => {
                return Err(Error::KernelPair {
                    i: 0,
                    j: i,
                    source: Box::new(Error::KernelType(format!(
                        "mixed {} and {} payloads",
                        a.kind(),
                        b.kind()
                    ))),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

fn squared_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Byte alphabet, sorted, with a dense code per symbol.
struct Alphabet {
    codes: [u8; 256],
    size: u64,
}

impl Alphabet {
    fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut present = [false; 256];
        for t in texts {
            for &b in t.as_bytes() {
                present[b as usize] = true;
            }
        }
        let mut codes = [0u8; 256];
        let mut size = 0u64;
        for (byte, _) in present.iter().enumerate().filter(|(_, p)| **p) {
            codes[byte] = size as u8;
            size += 1;
        }
        Self {
            codes,
            size: size.max(1),
        }
    }
}

enum KmerProfile {
    Dense(Vec<u32>),
    /// Sorted by k-mer, counts > 0.
    Sparse(Vec<(Vec<u8>, u32)>),
}

impl KmerProfile {
    fn new(text: &str, kmer: usize, alphabet: &Alphabet) -> Self {
        let bytes = text.as_bytes();
        let cells = u32::try_from(kmer)
            .ok()
            .and_then(|e| alphabet.size.checked_pow(e))
            .filter(|&c| c <= DENSE_SPECTRUM_LIMIT);
        match cells {
            Some(cells) => {
                let mut table = vec![0u32; cells as usize];
                for window in bytes.windows(kmer) {
                    let code = window.iter().fold(0u64, |acc, &b| {
                        acc * alphabet.size + alphabet.codes[b as usize] as u64
                    });
                    table[code as usize] += 1;
                }
                KmerProfile::Dense(table)
            }
            None => {
                let mut windows: Vec<&[u8]> = bytes.windows(kmer).collect();
                windows.sort_unstable();
                let mut counts: Vec<(Vec<u8>, u32)> = Vec::new();
                for w in windows {
                    match counts.last_mut() {
                        Some((last, c)) if last.as_slice() == w => *c += 1,
                        _ => counts.push((w.to_vec(), 1)),
                    }
                }
                KmerProfile::Sparse(counts)
            }
        }
    }

    fn dot(&self, other: &KmerProfile) -> f64 {
        match (self, other) {
            (KmerProfile::Dense(a), KmerProfile::Dense(b)) => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| x as u64 * y as u64)
                .sum::<u64>() as f64,
            (KmerProfile::Sparse(a), KmerProfile::Sparse(b)) => {
                let (mut i, mut j, mut total) = (0, 0, 0u64);
                while i < a.len() && j < b.len() {
                    match a[i].0.cmp(&b[j].0) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            total += a[i].1 as u64 * b[j].1 as u64;
                            i += 1;
                            j += 1;
                        }
                    }
                }
                total as f64
            }
            _ => unreachable!("profiles built from one alphabet share a layout"),
        }
    }
}
