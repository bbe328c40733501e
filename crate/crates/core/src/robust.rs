//! Univariate robust location and scale.

use crate::error::{Error, Result};

/// Median; the mean of the two middle order statistics for even lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    let mut sorted = values.to_vec();
    median_in_place(&mut sorted)
}

/// Raw median absolute deviation from the median (no consistency factor).
pub fn mad(values: &[f64]) -> Result<f64> {
    let (_, scale) = median_and_mad(values)?;
    Ok(scale)
}

pub fn median_and_mad(values: &[f64]) -> Result<(f64, f64)> {
    let mut buf = values.to_vec();
    let center = median_in_place(&mut buf)?;
    for (b, v) in buf.iter_mut().zip(values) {
        *b = (v - center).abs();
    }
    Ok((center, median_in_place(&mut buf)?))
}

/// Median of `buf`, reordering it.
pub(crate) fn median_in_place(buf: &mut [f64]) -> Result<f64> {
    let n = buf.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mid = n / 2;
    let (lower, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        Ok(upper)
    } else {
        let below = lower.iter().copied().max_by(f64::total_cmp).unwrap();
        Ok(0.5 * (below + upper))
    }
}
