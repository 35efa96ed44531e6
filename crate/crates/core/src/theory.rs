//! Mean-convergence analysis for Volterra LMS under white Gaussian input.
//!
//! With independent regressors the expected weight error obeys
//!
//! ```text
//! E[Δw(r)] = (I - μA)^r E[Δw(0)],      A = G S⁻¹ R S⁻¹
//! ```
//!
//! where `R` is the input autocorrelation and `S` the scaling diagonal. The
//! recursion is stable in the mean when every eigenvalue of `I - μA` lies
//! inside the unit circle, i.e. `μ < 2 / λ_max(A)`. The classical bound
//! `μ < 1 / max_i((q_i + 1) λ_i)` equals `1 / (2 λ_max(A))` for uniform q,
//! a quarter of the exact threshold.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::adapt::{step_size_bound, QParams};
use crate::error::{Error, Result};
use crate::volterra::{flat_lags, flat_len, scaling_diag, Lag, RegressorMode, ScalingDiag};

/// Condition number above which a linear solve is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// `E[x_{l_1} x_{l_2} ... x_{l_n}]` for i.i.d. zero-mean unit-variance
/// Gaussian samples indexed by lag, via Isserlis' pairing expansion.
pub fn isserlis_moment(lags: &[usize]) -> f64 {
    match lags {
        [] => 1.0,
        [_] => 0.0,
        [first, rest @ ..] => {
            if rest.len() % 2 == 0 {
                return 0.0;
            }
            let mut total = 0.0;
            let mut remaining = Vec::with_capacity(rest.len() - 1);
            for (j, lag) in rest.iter().enumerate() {
                if lag != first {
                    continue;
                }
                remaining.clear();
                remaining.extend(
                    rest.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != j)
                        .map(|(_, l)| *l),
                );
                total += isserlis_moment(&remaining);
            }
            total
        }
    }
}

// A regressor slot as a polynomial in the input samples: Σ coef · Π x_lag.
fn slot_polynomial(lag: Lag, mode: RegressorMode) -> Vec<(f64, Vec<usize>)> {
    match (lag, mode) {
        (Lag::Linear(d), _) => vec![(1.0, vec![d])],
        (Lag::Pair(d, e), RegressorMode::Orthonormalized) if d == e => {
            let c = std::f64::consts::FRAC_1_SQRT_2;
            vec![(c, vec![d, d]), (-c, vec![])]
        }
        (Lag::Pair(d, e), _) => vec![(1.0, vec![d, e])],
    }
}

/// `E[u uᵀ]` for the regressor in `mode`, evaluated term by term with
/// [`isserlis_moment`].
pub fn regressor_moment_matrix(memory_length: usize, mode: RegressorMode) -> Result<DMatrix<f64>> {
    if memory_length == 0 {
        return Err(Error::domain("memory length must be at least 1"));
    }
    let polys: Vec<_> = flat_lags(memory_length)
        .into_iter()
        .map(|lag| slot_polynomial(lag, mode))
        .collect();
    let k = polys.len();
    let mut r = DMatrix::zeros(k, k);
    let mut lags = Vec::with_capacity(4);
    for a in 0..k {
        for b in a..k {
            let mut v = 0.0;
            for (ca, la) in &polys[a] {
                for (cb, lb) in &polys[b] {
                    lags.clear();
                    lags.extend_from_slice(la);
                    lags.extend_from_slice(lb);
                    v += ca * cb * isserlis_moment(&lags);
                }
            }
            r[(a, b)] = v;
            r[(b, a)] = v;
        }
    }
    Ok(r)
}

/// Autocorrelation of the regressor for i.i.d. unit Gaussian input.
///
/// Orthonormalized regressors have identity autocorrelation; raw regressors
/// get the closed-form fourth-order moments (`E[x⁴] = 3`, and a unit
/// correlation between distinct squared terms).
pub fn gaussian_autocorrelation(memory_length: usize, mode: RegressorMode) -> Result<DMatrix<f64>> {
    match mode {
        RegressorMode::Orthonormalized if memory_length > 0 => {
            let k = flat_len(memory_length);
            Ok(DMatrix::identity(k, k))
        }
        _ => regressor_moment_matrix(memory_length, mode),
    }
}

fn check_square(what: &'static str, m: &DMatrix<f64>, k: usize) -> Result<()> {
    if m.nrows() != k || m.ncols() != k {
        return Err(Error::Dimension {
            what,
            expected: k,
            found: if m.nrows() != k { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

/// `S⁻¹ R S⁻¹`.
pub fn whiten(r: &DMatrix<f64>, s: &ScalingDiag) -> Result<DMatrix<f64>> {
    let k = s.len();
    check_square("autocorrelation", r, k)?;
    let e = s.entries();
    Ok(DMatrix::from_fn(k, k, |i, j| r[(i, j)] / e[i] / e[j]))
}

/// `G · M` for diagonal `G`.
pub fn apply_gain(qp: &QParams, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = qp.len();
    check_square("matrix", m, k)?;
    let g = qp.gains();
    Ok(DMatrix::from_fn(k, k, |i, j| g[i] * m[(i, j)]))
}

/// `A = G S⁻¹ R S⁻¹`.
pub fn build_a(qp: &QParams, r: &DMatrix<f64>, s: &ScalingDiag) -> Result<DMatrix<f64>> {
    Error::check_len("scaling", qp.len(), s.len())?;
    apply_gain(qp, &whiten(r, s)?)
}

/// Eigenvalues (ascending) of `G·W` with `W` symmetric positive
/// semi-definite. `G W` is similar to `G^½ W G^½`, which is symmetric.
pub fn gained_eigenvalues(qp: &QParams, w: &DMatrix<f64>) -> Result<Vec<f64>> {
    let k = qp.len();
    check_square("matrix", w, k)?;
    let root: Vec<f64> = qp.gains().iter().map(|g| g.sqrt()).collect();
    let sym = DMatrix::from_fn(k, k, |i, j| root[i] * w[(i, j)] * root[j]);
    Ok(sorted_symmetric_eigenvalues(sym))
}

pub fn sorted_symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Iterates `v <- (I - μA) v`.
#[derive(Debug, Clone)]
pub struct MeanTrajectory<'a> {
    a: &'a DMatrix<f64>,
    mu: f64,
    current: DVector<f64>,
}

impl<'a> MeanTrajectory<'a> {
    pub fn new(initial_error: &[f64], mu: f64, a: &'a DMatrix<f64>) -> Result<Self> {
        check_square("A", a, initial_error.len())?;
        Ok(Self {
            a,
            mu,
            current: DVector::from_column_slice(initial_error),
        })
    }

    pub fn current(&self) -> &[f64] {
        self.current.as_slice()
    }

    pub fn advance(&mut self) {
        let delta = self.a * &self.current;
        self.current.axpy(-self.mu, &delta, 1.0);
    }
}

/// `(I - μA)^t Δw(0)` for `t = 0..=iters`, by repeated application.
///
/// ```
/// use nalgebra::DMatrix;
/// use qvlms::theory::mean_weight_error_trajectory;
/// let a = DMatrix::<f64>::identity(2, 2);
/// let traj = mean_weight_error_trajectory(&[1.0, 1.0], 0.25, &a, 2).unwrap();
/// assert_eq!(traj[2], vec![0.5625, 0.5625]);
/// ```
pub fn mean_weight_error_trajectory(
    initial_error: &[f64],
    mu: f64,
    a: &DMatrix<f64>,
    iters: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut traj = MeanTrajectory::new(initial_error, mu, a)?;
    let mut out = Vec::with_capacity(iters + 1);
    out.push(traj.current().to_vec());
    for _ in 0..iters {
        traj.advance();
        out.push(traj.current().to_vec());
    }
    Ok(out)
}

/// Solves `R w = r_ud`. Refuses systems whose condition number exceeds
/// [`MAX_CONDITION`].
pub fn wiener_solution(r: &DMatrix<f64>, r_ud: &[f64]) -> Result<Vec<f64>> {
    let k = r_ud.len();
    check_square("autocorrelation", r, k)?;
    let sv = r.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| {
        (lo.min(s), hi.max(s))
    });
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let rhs = DVector::from_column_slice(r_ud);
    let w = match r.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => r
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(Error::IllConditioned { condition })?,
    };
    Ok(w.as_slice().to_vec())
}

/// Optimum in the scaled coordinates, `w_opt = S w*`.
pub fn scaled_optimum(s: &ScalingDiag, w_star: &[f64]) -> Result<Vec<f64>> {
    s.apply(w_star)
}

/// Minimum mean-square error at the optimum: the noise power.
pub fn minimum_error(noise_variance: f64) -> Result<f64> {
    if noise_variance.is_nan() || noise_variance < 0.0 {
        return Err(Error::domain(format!(
            "noise variance must be nonnegative, got {noise_variance}"
        )));
    }
    Ok(noise_variance)
}

/// `σ² = P · 10^(-snr/10)`; infinite SNR gives zero noise.
pub fn noise_variance_for_snr(signal_power: f64, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::domain("SNR is NaN"));
    }
    if !(signal_power >= 0.0 && signal_power.is_finite()) {
        return Err(Error::domain(format!(
            "signal power must be finite and nonnegative, got {signal_power}"
        )));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(signal_power * 10f64.powf(-snr_db / 10.0))
}

/// Analysis objects for one `(M, mode, q)` configuration.
#[derive(Debug, Clone)]
pub struct TheoryModel {
    mode: RegressorMode,
    /// Autocorrelation before scaling. For orthonormalized input this is the
    /// correlation of the centered squares, `S²`.
    r: DMatrix<f64>,
    scaling: Option<ScalingDiag>,
    whitened: DMatrix<f64>,
    a: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    a_eigenvalues: Vec<f64>,
    mu_bound: f64,
    noise_variance: f64,
}

impl TheoryModel {
    /// White unit-variance Gaussian input. Raw regressors are fed to the
    /// filter unscaled, so there `S = I`.
    pub fn gaussian(
        memory_length: usize,
        mode: RegressorMode,
        qp: &QParams,
        noise_variance: f64,
    ) -> Result<Self> {
        if memory_length == 0 {
            return Err(Error::domain("memory length must be at least 1"));
        }
        Error::check_len("q parameters", flat_len(memory_length), qp.len())?;
        let noise_variance = minimum_error(noise_variance)?;
        let (r, scaling, whitened) = match mode {
            RegressorMode::Orthonormalized => {
                let s = scaling_diag(memory_length)?;
                let whitened = gaussian_autocorrelation(memory_length, mode)?;
                let e = s.entries();
                let r = DMatrix::from_fn(whitened.nrows(), whitened.ncols(), |i, j| {
                    e[i] * whitened[(i, j)] * e[j]
                });
                (r, Some(s), whitened)
            }
            RegressorMode::Raw => {
                let r = gaussian_autocorrelation(memory_length, mode)?;
                (r.clone(), None, r)
            }
        };
        let a = apply_gain(qp, &whitened)?;

        let is_diagonal = (0..whitened.nrows())
            .all(|i| (0..whitened.ncols()).all(|j| i == j || whitened[(i, j)] == 0.0));
        let (eigenvalues, a_eigenvalues, mu_bound) = if is_diagonal {
            let diag: Vec<f64> = whitened.diagonal().iter().copied().collect();
            let bound = step_size_bound(qp, &diag)?;
            let mut a_ev: Vec<f64> = diag.iter().zip(qp.gains()).map(|(l, g)| g * l).collect();
            a_ev.sort_by(f64::total_cmp);
            let mut ev = diag;
            ev.sort_by(f64::total_cmp);
            (ev, a_ev, bound)
        } else {
            let ev = sorted_symmetric_eigenvalues(whitened.clone());
            let a_ev = gained_eigenvalues(qp, &whitened)?;
            let lmax = *a_ev.last().expect("non-empty");
            (ev, a_ev, 1.0 / (2.0 * lmax))
        };
        if eigenvalues[0] <= 0.0 {
            return Err(Error::domain("autocorrelation is not positive definite"));
        }

        Ok(Self {
            mode,
            r,
            scaling,
            whitened,
            a,
            eigenvalues,
            a_eigenvalues,
            mu_bound,
            noise_variance,
        })
    }

    pub fn mode(&self) -> RegressorMode {
        self.mode
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn scaling(&self) -> Option<&ScalingDiag> {
        self.scaling.as_ref()
    }

    /// `S⁻¹ R S⁻¹`, the autocorrelation of what the filter actually sees.
    pub fn whitened(&self) -> &DMatrix<f64> {
        &self.whitened
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Eigenvalues of `S⁻¹ R S⁻¹`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalues of `A`, ascending.
    pub fn a_eigenvalues(&self) -> &[f64] {
        &self.a_eigenvalues
    }

    pub fn lambda_max_a(&self) -> f64 {
        *self.a_eigenvalues.last().expect("non-empty")
    }

    /// Step-size bound `1 / max_i((q_i+1) λ_i)`; for non-diagonal `S⁻¹RS⁻¹`
    /// the equivalent `1 / (2 λ_max(A))`.
    pub fn mu_bound(&self) -> f64 {
        self.mu_bound
    }

    /// The step size at which the mean recursion stops converging,
    /// `2 / λ_max(A)`.
    pub fn mu_divergence(&self) -> f64 {
        2.0 / self.lambda_max_a()
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn minimum_error(&self) -> f64 {
        self.noise_variance
    }

    /// Spectral radius of `I - μA`.
    pub fn spectral_radius(&self, mu: f64) -> f64 {
        self.a_eigenvalues
            .iter()
            .map(|l| (1.0 - mu * l).abs())
            .fold(0.0, f64::max)
    }

    pub fn trajectory(
        &self,
        initial_error: &[f64],
        mu: f64,
        iters: usize,
    ) -> Result<Vec<Vec<f64>>> {
        mean_weight_error_trajectory(initial_error, mu, &self.a, iters)
    }
}
