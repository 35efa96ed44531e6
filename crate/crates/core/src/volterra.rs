//! Second-order Volterra systems in flattened form.
//!
//! A second-order kernel with memory length `M` is
//!
//! ```text
//! y(r) = h0 + Σ_d A(d) x(r-d) + Σ_d Σ_e B(d,e) x(r-d) x(r-e)
//! ```
//!
//! The quadratic part is symmetric, so only pairs `d <= e` are stored. The
//! adaptive weight vector holds the `M` linear taps followed by the
//! `M(M+1)/2` quadratic taps in lexicographic `(d, e)` order, for a total of
//! `K = M + M(M+1)/2` coefficients. The bias is kept outside that vector.
//!
//! Input windows are newest first: `window[0]` is `x(r)`, `window[d]` is
//! `x(r-d)`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of adaptive coefficients `K = M + M(M+1)/2`.
pub fn flat_len(memory_length: usize) -> usize {
    memory_length + memory_length * (memory_length + 1) / 2
}

/// Position of the quadratic pair `(d, e)`, `d <= e`, in the flattened
/// coefficient vector.
///
/// ```
/// use qvlms::volterra::flatten_index;
/// assert_eq!(flatten_index(0, 0, 3).unwrap(), 3);
/// assert_eq!(flatten_index(2, 2, 3).unwrap(), 8);
/// ```
pub fn flatten_index(d: usize, e: usize, memory_length: usize) -> Result<usize> {
    if d > e {
        return Err(Error::domain(format!(
            "quadratic pair ({d}, {e}) is not ordered d <= e"
        )));
    }
    if e >= memory_length {
        return Err(Error::domain(format!(
            "lag {e} out of range for memory length {memory_length}"
        )));
    }
    Ok(pair_offset(d, memory_length) + (e - d) + memory_length)
}

// Number of pairs (i, j), i <= j, with i < d.
#[inline]
fn pair_offset(d: usize, m: usize) -> usize {
    d * m - d * d.saturating_sub(1) / 2
}

/// Inverse of [`flatten_index`] over the whole flat vector: `Lag::Linear(d)`
/// for the first `M` slots, `Lag::Pair(d, e)` afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lag {
    Linear(usize),
    Pair(usize, usize),
}

impl Lag {
    pub fn is_square(self) -> bool {
        matches!(self, Lag::Pair(d, e) if d == e)
    }
}

/// Lags of every flat slot, in canonical order.
pub fn flat_lags(memory_length: usize) -> Vec<Lag> {
    let mut lags = Vec::with_capacity(flat_len(memory_length));
    lags.extend((0..memory_length).map(Lag::Linear));
    for d in 0..memory_length {
        for e in d..memory_length {
            lags.push(Lag::Pair(d, e));
        }
    }
    lags
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorMode {
    /// Products of the input samples as they are.
    Raw,
    /// Squared terms centered and divided by √2, so that white unit-variance
    /// Gaussian input gives an identity autocorrelation.
    Orthonormalized,
}

impl std::fmt::Display for RegressorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegressorMode::Raw => "raw",
            RegressorMode::Orthonormalized => "orthonormalized",
        })
    }
}

impl std::str::FromStr for RegressorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(RegressorMode::Raw),
            "orthonormalized" | "orth" => Ok(RegressorMode::Orthonormalized),
            other => Err(Error::domain(format!("unknown regressor mode `{other}`"))),
        }
    }
}

/// Expanded input vector `u(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    values: Vec<f64>,
    mode: RegressorMode,
}

impl Regressor {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> RegressorMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Expands a window of the `M` most recent samples into a [`Regressor`].
///
/// ```
/// use qvlms::volterra::{expand_regressor, RegressorMode};
/// let u = expand_regressor(&[2.0, 3.0], RegressorMode::Raw).unwrap();
/// assert_eq!(u.values(), &[2.0, 3.0, 4.0, 6.0, 9.0]);
/// ```
pub fn expand_regressor(window: &[f64], mode: RegressorMode) -> Result<Regressor> {
    if window.is_empty() {
        return Err(Error::domain("empty input window"));
    }
    let mut values = vec![0.0; flat_len(window.len())];
    expand_into(window, mode, &mut values)?;
    Ok(Regressor { values, mode })
}

/// Allocation-free form of [`expand_regressor`]; `out` must have length `K`.
pub fn expand_into(window: &[f64], mode: RegressorMode, out: &mut [f64]) -> Result<()> {
    let m = window.len();
    Error::check_len("regressor buffer", flat_len(m), out.len())?;
    out[..m].copy_from_slice(window);
    let mut k = m;
    for d in 0..m {
        let xd = window[d];
        out[k] = match mode {
            RegressorMode::Raw => xd * xd,
            RegressorMode::Orthonormalized => (xd * xd - 1.0) / SQRT_2,
        };
        k += 1;
        for &xe in &window[d + 1..] {
            out[k] = xd * xe;
            k += 1;
        }
    }
    Ok(())
}

/// Diagonal of the scaling matrix `S`: `√2` on squared-term slots, `1`
/// everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingDiag {
    entries: Vec<f64>,
}

impl ScalingDiag {
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `S⁻¹ v`, elementwise.
    pub fn apply_inverse(&self, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("scaling", self.entries.len(), v.len())?;
        Ok(v.iter().zip(&self.entries).map(|(x, s)| x / s).collect())
    }

    /// `S v`, elementwise.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("scaling", self.entries.len(), v.len())?;
        Ok(v.iter().zip(&self.entries).map(|(x, s)| x * s).collect())
    }
}

pub fn scaling_diag(memory_length: usize) -> Result<ScalingDiag> {
    if memory_length == 0 {
        return Err(Error::domain("memory length must be at least 1"));
    }
    let entries = flat_lags(memory_length)
        .into_iter()
        .map(|lag| if lag.is_square() { SQRT_2 } else { 1.0 })
        .collect();
    Ok(ScalingDiag { entries })
}

/// Second-order Volterra system coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraKernel {
    memory_length: usize,
    bias: f64,
    linear: Vec<f64>,
    /// Upper-triangular pairs `(d, e)`, `d <= e`, lexicographic.
    quadratic: Vec<f64>,
}

impl VolterraKernel {
    pub fn zeros(memory_length: usize) -> Result<Self> {
        if memory_length == 0 {
            return Err(Error::domain("memory length must be at least 1"));
        }
        Ok(Self {
            memory_length,
            bias: 0.0,
            linear: vec![0.0; memory_length],
            quadratic: vec![0.0; memory_length * (memory_length + 1) / 2],
        })
    }

    /// Builds a kernel from the canonical flat vector (linear then upper
    /// triangular quadratic taps).
    pub fn from_flat(memory_length: usize, bias: f64, flat: &[f64]) -> Result<Self> {
        if memory_length == 0 {
            return Err(Error::domain("memory length must be at least 1"));
        }
        Error::check_len("flattened kernel", flat_len(memory_length), flat.len())?;
        Ok(Self {
            memory_length,
            bias,
            linear: flat[..memory_length].to_vec(),
            quadratic: flat[memory_length..].to_vec(),
        })
    }

    /// Builds a kernel from a full row-major `M × M` quadratic matrix.
    /// `B(d,e)` and `B(e,d)` are summed into the single `(min, max)` slot.
    pub fn from_full(bias: f64, linear: &[f64], quadratic_full: &[f64]) -> Result<Self> {
        let m = linear.len();
        let mut kernel = Self::zeros(m)?;
        Error::check_len("full quadratic kernel", m * m, quadratic_full.len())?;
        kernel.bias = bias;
        kernel.linear.copy_from_slice(linear);
        for d in 0..m {
            for e in 0..m {
                let (lo, hi) = if d <= e { (d, e) } else { (e, d) };
                let slot = flatten_index(lo, hi, m)? - m;
                kernel.quadratic[slot] += quadratic_full[d * m + e];
            }
        }
        Ok(kernel)
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn memory_length(&self) -> usize {
        self.memory_length
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &[f64] {
        &self.quadratic
    }

    /// `B(d, e)` for `d <= e` as stored (already pre-summed).
    pub fn quadratic_at(&self, d: usize, e: usize) -> Result<f64> {
        let idx = flatten_index(d, e, self.memory_length)? - self.memory_length;
        Ok(self.quadratic[idx])
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(flat_len(self.memory_length));
        flat.extend_from_slice(&self.linear);
        flat.extend_from_slice(&self.quadratic);
        flat
    }

    pub fn flat_len(&self) -> usize {
        flat_len(self.memory_length)
    }

    /// Evaluates the system on one input window.
    pub fn output(&self, window: &[f64]) -> Result<f64> {
        Error::check_len("input window", self.memory_length, window.len())?;
        let u = expand_regressor(window, RegressorMode::Raw)?;
        let dot: f64 = self
            .flatten()
            .iter()
            .zip(u.values())
            .map(|(h, x)| h * x)
            .sum();
        Ok(self.bias + dot)
    }
}

/// Free-function form of [`VolterraKernel::output`].
pub fn kernel_output(kernel: &VolterraKernel, window: &[f64]) -> Result<f64> {
    kernel.output(window)
}
