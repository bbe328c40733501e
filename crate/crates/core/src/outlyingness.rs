//! Stahel-Donoho outlyingness in a kernel-induced feature space.
//!
//! A direction through two feature vectors `Phi(z_i)` and `Phi(z_j)` projects
//! every sample onto
//!
//! ```text
//! v[l] = (K(z_i, z_l) - K(z_j, z_l)) / sqrt(K(z_i, z_i) - 2 K(z_i, z_j) + K(z_j, z_j))
//! ```
//!
//! so the outlyingness `r[l] = max |v[l] - median(v)| / mad(v)` over a set of
//! pairs needs nothing beyond the kernel matrix.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::rng::Stream;
use crate::robust::median_in_place;

/// Squared feature-space distances at or below this are treated as coincident points.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Largest sample count that gets every pair under [`DirectionPolicy::Auto`].
pub const AUTO_EXHAUSTIVE_LIMIT: usize = 100;
/// Number of sampled directions under [`DirectionPolicy::Auto`] for larger sets.
pub const AUTO_SAMPLED_COUNT: usize = 2000;

/// Which pairs `(i, j)` span the projection directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionPolicy {
    /// Exhaustive for `k <= 100`, otherwise 2000 sampled pairs.
    Auto { seed: u64 },
    Exhaustive,
    /// `count` distinct non-degenerate pairs, drawn without replacement.
    Sampled { count: usize, seed: u64 },
}

impl Default for DirectionPolicy {
    fn default() -> Self {
        DirectionPolicy::Auto { seed: 0 }
    }
}

impl DirectionPolicy {
    /// Concrete policy for `k` samples.
    pub fn resolve(self, k: usize) -> DirectionPolicy {
        match self {
            DirectionPolicy::Auto { .. } if k <= AUTO_EXHAUSTIVE_LIMIT => DirectionPolicy::Exhaustive,
            DirectionPolicy::Auto { seed } => DirectionPolicy::Sampled {
                count: AUTO_SAMPLED_COUNT,
                seed,
            },
            other => other,
        }
    }

    /// Same policy with a different seed (no-op for `Exhaustive`).
    pub fn with_seed(self, seed: u64) -> DirectionPolicy {
        match self {
            DirectionPolicy::Auto { .. } => DirectionPolicy::Auto { seed },
            DirectionPolicy::Sampled { count, .. } => DirectionPolicy::Sampled { count, seed },
            DirectionPolicy::Exhaustive => DirectionPolicy::Exhaustive,
        }
    }

    pub fn seed(self) -> Option<u64> {
        match self {
            DirectionPolicy::Auto { seed } | DirectionPolicy::Sampled { seed, .. } => Some(seed),
            DirectionPolicy::Exhaustive => None,
        }
    }
}

impl std::fmt::Display for DirectionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DirectionPolicy::Auto { seed } => write!(f, "auto seed={seed}"),
            DirectionPolicy::Exhaustive => write!(f, "exhaustive"),
            DirectionPolicy::Sampled { count, seed } => write!(f, "sampled count={count} seed={seed}"),
        }
    }
}

impl std::str::FromStr for DirectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let field = |part: Option<&str>, name: &'static str| -> Result<u64> {
            part.and_then(|p| p.strip_prefix(name))
                .and_then(|p| p.strip_prefix('='))
                .ok_or_else(|| Error::invalid("directions", format!("expected {name}= in {s:?}")))?
                .parse::<u64>()
                .map_err(|e| Error::invalid("directions", e.to_string()))
        };
        match parts.next() {
            Some("auto") => Ok(DirectionPolicy::Auto {
                seed: field(parts.next(), "seed")?,
            }),
            Some("exhaustive") => Ok(DirectionPolicy::Exhaustive),
            Some("sampled") => {
                let count = field(parts.next(), "count")? as usize;
                let seed = field(parts.next(), "seed")?;
                Ok(DirectionPolicy::Sampled { count, seed })
            }
            _ => Err(Error::invalid("directions", format!("unknown policy {s:?}"))),
        }
    }
}

/// Projections of all samples onto the direction through samples `pair.0` and `pair.1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionVector {
    pub pair: (usize, usize),
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutlyingnessReport {
    /// One entry per sample; `+inf` where a zero-mad direction separates the sample.
    pub r: Vec<f64>,
    /// Resolved (never `Auto`).
    pub policy: DirectionPolicy,
    pub directions: usize,
    pub degenerate_pairs: usize,
}

#[inline]
fn squared_distance(omega: &KernelMatrix, i: usize, j: usize) -> f64 {
    // Symmetric in (i, j) so that reversed pairs give bitwise-equal norms.
    (omega.get(i, i) + omega.get(j, j)) - 2.0 * omega.get(i, j)
}

pub fn projection_vector(omega: &KernelMatrix, i: usize, j: usize) -> Result<ProjectionVector> {
    let k = omega.len();
    if i >= k || j >= k {
        return Err(Error::Dimension {
            expected: k,
            found: i.max(j) + 1,
        });
    }
    if i == j {
        return Err(Error::InvalidPair(i));
    }
    let norm_sq = squared_distance(omega, i, j);
    if !(norm_sq > DEGENERACY_TOLERANCE) {
        return Err(Error::DegenerateDirection { i, j, norm_sq });
    }
    let norm = norm_sq.sqrt();
    let (ri, rj) = (omega.row(i), omega.row(j));
    let values = ri.iter().zip(rj).map(|(a, b)| (a - b) / norm).collect();
    Ok(ProjectionVector {
        pair: (i, j),
        values,
    })
}

fn pair_from_index(k: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..k {
        let row = k - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range")
}

fn is_degenerate(omega: &KernelMatrix, i: usize, j: usize) -> bool {
    !(squared_distance(omega, i, j) > DEGENERACY_TOLERANCE)
}

/// Pairs `(i, j)` with `i < j` spanning the projection directions.
pub fn enumerate_directions(
    k: usize,
    policy: DirectionPolicy,
    omega: &KernelMatrix,
) -> Result<Vec<(usize, usize)>> {
    if k < 2 {
        return Err(Error::TooFewSamples(k));
    }
    if omega.len() != k {
        return Err(Error::Dimension {
            expected: k,
            found: omega.len(),
        });
    }
    let all_pairs = || (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)));
    match policy.resolve(k) {
        DirectionPolicy::Exhaustive => {
            if all_pairs().all(|(i, j)| is_degenerate(omega, i, j)) {
                return Err(Error::NoValidDirections(k));
            }
            Ok(all_pairs().collect())
        }
        DirectionPolicy::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::invalid("directions", "sampled count must be >= 1"));
            }
            let total = k * (k - 1) / 2;
            if count >= total {
                let valid: Vec<_> = all_pairs().filter(|&(i, j)| !is_degenerate(omega, i, j)).collect();
                if valid.is_empty() {
                    return Err(Error::NoValidDirections(k));
                }
                return Ok(valid);
            }
            let mut stream = Stream::new(seed, &[]);
            let mut seen = HashSet::with_capacity(count);
            let mut pairs = Vec::with_capacity(count);
            let mut rejections = 0usize;
            while pairs.len() < count {
                let idx = stream.below(total as u64) as usize;
                let (i, j) = pair_from_index(k, idx);
                if seen.contains(&idx) || is_degenerate(omega, i, j) {
                    rejections += 1;
                    if rejections >= 100 * count {
                        break;
                    }
                    continue;
                }
                seen.insert(idx);
                pairs.push((i, j));
            }
            if pairs.is_empty() {
                return Err(Error::NoValidDirections(k));
            }
            Ok(pairs)
        }
        DirectionPolicy::Auto { .. } => unreachable!("resolved above"),
    }
}

/// Per-sample contributions of one direction; `None` if the pair is degenerate.
fn direction_scores(omega: &KernelMatrix, (i, j): (usize, usize), buf: &mut Vec<f64>) -> Option<Vec<f64>> {
    let proj = projection_vector(omega, i, j).ok()?;
    buf.clear();
    buf.extend_from_slice(&proj.values);
    let center = median_in_place(buf).expect("k >= 3");
    for (b, v) in buf.iter_mut().zip(&proj.values) {
        *b = (v - center).abs();
    }
    let scale = median_in_place(buf).expect("k >= 3");
    Some(
        proj.values
            .iter()
            .map(|v| {
                let dev = (v - center).abs();
                if scale > 0.0 {
                    dev / scale
                } else if dev == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .collect(),
    )
}

/// Outlyingness over a fixed pair list. Degenerate pairs are skipped.
pub fn outlyingness_over_pairs(omega: &KernelMatrix, pairs: &[(usize, usize)]) -> (Vec<f64>, usize) {
    let k = omega.len();
    let (r, degenerate) = pairs
        .par_iter()
        .fold(
            || (vec![0.0f64; k], 0usize, Vec::with_capacity(k)),
            |(mut acc, mut degenerate, mut buf), &pair| {
                match direction_scores(omega, pair, &mut buf) {
                    Some(scores) => {
                        for (a, s) in acc.iter_mut().zip(scores) {
                            *a = a.max(s);
                        }
                    }
                    None => degenerate += 1,
                }
                (acc, degenerate, buf)
            },
        )
        .map(|(acc, degenerate, _)| (acc, degenerate))
        .reduce(
            || (vec![0.0f64; k], 0usize),
            |(mut a, da), (b, db)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                (a, da + db)
            },
        );
    (r, degenerate)
}

pub fn outlyingness(omega: &KernelMatrix, policy: DirectionPolicy) -> Result<OutlyingnessReport> {
    let k = omega.len();
    if k < 3 {
        return Err(Error::TooFewSamples(k));
    }
    let pairs = enumerate_directions(k, policy, omega)?;
    let (r, degenerate_pairs) = outlyingness_over_pairs(omega, &pairs);
    Ok(OutlyingnessReport {
        r,
        policy: policy.resolve(k),
        directions: pairs.len(),
        degenerate_pairs,
    })
}
