//! Comparison metrics for solver results.

use msp_core::Error;

/// `reference / other * 100`, rounded to one decimal. Both values must be
/// positive; results above 100 are kept as computed.
pub fn accuracy(reference: f64, other: f64) -> msp_core::Result<f64> {
    if !(reference > 0.0 && other > 0.0) || !reference.is_finite() || !other.is_finite() {
        return Err(Error::UndefinedMetric(format!(
            "accuracy needs positive values, got {reference} and {other}"
        )));
    }
    Ok((reference / other * 1000.0).round() / 10.0)
}

/// Most frequent value, smallest on ties. `None` for an empty slice.
pub fn modal_value(values: &[f64]) -> Option<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(f64, usize)> = None;
    for run in sorted.chunk_by(|a, b| a == b) {
        if best.map_or(true, |(_, n)| run.len() > n) {
            best = Some((run[0], run.len()));
        }
    }
    best.map(|(v, _)| v)
}

/// Fraction of values within 0.1% of the modal value.
pub fn stability(values: &[f64]) -> f64 {
    let Some(mode) = modal_value(values) else {
        return 0.0;
    };
    let tol = 1e-3 * mode.abs();
    let close = values.iter().filter(|v| (*v - mode).abs() <= tol).count();
    close as f64 / values.len() as f64
}

/// Competition ranking, most stable first: equal frequencies share the
/// smaller rank and the next rank skips.
pub fn convergence_rank(frequencies: &[f64]) -> Vec<usize> {
    frequencies
        .iter()
        .map(|f| 1 + frequencies.iter().filter(|g| *g > f).count())
        .collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}
