use crate::error::{Error, Result};

/// Normalized weight deviation `‖h - w‖² / ‖h‖²`.
///
/// ```
/// use qvlms::experiment::nwd;
/// assert_eq!(nwd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
/// ```
pub fn nwd(h: &[f64], w: &[f64]) -> Result<f64> {
    Error::check_len("weights", h.len(), w.len())?;
    let norm: f64 = h.iter().map(|x| x * x).sum();
    if norm == 0.0 {
        return Err(Error::domain("NWD is undefined for an all-zero channel"));
    }
    Ok(squared_deviation(h, w) / norm)
}

#[inline]
pub(crate) fn squared_deviation(h: &[f64], w: &[f64]) -> f64 {
    h.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Pearson correlation of two equally long curves.
pub fn correlation_coefficient(a: &[f64], b: &[f64]) -> Result<f64> {
    Error::check_len("curve", a.len(), b.len())?;
    if a.len() < 2 {
        return Err(Error::domain("correlation needs at least two points"));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::domain(
            "correlation of a constant curve is undefined",
        ));
    }
    if !(sab.is_finite() && saa.is_finite() && sbb.is_finite()) {
        return Err(Error::NonFinite("curve value"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Mean of the trailing `fraction` of a curve (at least one point).
pub fn tail_mean(curve: &[f64], fraction: f64) -> Option<f64> {
    if curve.is_empty() {
        return None;
    }
    let n = ((curve.len() as f64 * fraction).round() as usize).clamp(1, curve.len());
    let tail = &curve[curve.len() - n..];
    Some(tail.iter().sum::<f64>() / n as f64)
}

/// Means over consecutive non-overlapping windows; a short final window is
/// dropped.
pub fn window_means(curve: &[f64], window: usize) -> Vec<f64> {
    if window == 0 {
        return Vec::new();
    }
    curve
        .chunks_exact(window)
        .map(|c| c.iter().sum::<f64>() / window as f64)
        .collect()
}

/// First index at which `curve` is at or below `target`.
pub fn iterations_to_reach(curve: &[f64], target: f64) -> Option<usize> {
    curve.iter().position(|&v| v <= target)
}
