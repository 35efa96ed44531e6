//! Adaptive Volterra LMS filters.
//!
//! All variants share the prediction `y = wᵀu` and the a-priori error
//! `e = d - y`, and differ only in how the correction is shaped:
//!
//! ```text
//! VLMS          w <- w + μ e u
//! q-VLMS        w <- w + μ e G u,     G = diag((q_i + 1) / 2)
//! matrix gain   w <- w + μ e Γ u,     Γ a full K×K matrix
//! ```
//!
//! Every step keeps multiplication and addition counters. For q-VLMS one
//! step costs exactly `3K + 1` multiplications (`K` for the prediction, one
//! for `μ·e`, then `g_i·(μe)` and `·u_i` per coefficient) and `2K` additions
//! (`K - 1` in the prediction sum, one for the error, `K` accumulations).
//! Plain VLMS skips the gain product and costs `2K + 1` multiplications.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Per-coefficient q values and the induced diagonal gain `g_i = (q_i+1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QParams {
    q: Vec<f64>,
    g: Vec<f64>,
}

impl QParams {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::domain("q vector is empty"));
        }
        if let Some(bad) = q.iter().find(|&&qi| !(qi.is_finite() && qi > 0.0)) {
            return Err(Error::domain(format!(
                "q values must be positive, got {bad}"
            )));
        }
        let g = q.iter().map(|qi| (qi + 1.0) / 2.0).collect();
        Ok(Self { q, g })
    }

    /// Broadcasts a scalar q to `len` coefficients.
    pub fn uniform(q: f64, len: usize) -> Result<Self> {
        Self::new(vec![q; len])
    }

    /// `q = 1` everywhere, i.e. `G = I`.
    pub fn ones(len: usize) -> Self {
        Self::uniform(1.0, len).expect("q = 1 is valid")
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn gains(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// The common q value if all entries agree.
    pub fn uniform_value(&self) -> Option<f64> {
        let first = self.q[0];
        self.q.iter().all(|&qi| qi == first).then_some(first)
    }

    pub fn gain_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.g))
    }
}

/// How the error-weighted regressor is shaped before it is added to the
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdateRule {
    Vlms,
    QVlms(QParams),
    MatrixGain(DMatrix<f64>),
}

impl UpdateRule {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            UpdateRule::Vlms => None,
            UpdateRule::QVlms(qp) => Some(qp.len()),
            UpdateRule::MatrixGain(m) => Some(m.nrows()),
        }
    }
}

/// Adaptive weights plus step size, iteration counter and op counters.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    weights: Vec<f64>,
    step_size: f64,
    iteration: u64,
    mul_count: u64,
    add_count: u64,
}

impl FilterState {
    /// Zero-initialized weights.
    pub fn new(len: usize, step_size: f64) -> Result<Self> {
        Self::with_weights(vec![0.0; len], step_size)
    }

    pub fn with_weights(weights: Vec<f64>, step_size: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("weight vector is empty"));
        }
        if !(step_size.is_finite() && step_size > 0.0) {
            return Err(Error::domain(format!(
                "step size must be positive, got {step_size}"
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("initial weight"));
        }
        Ok(Self {
            weights,
            step_size,
            iteration: 0,
            mul_count: 0,
            add_count: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn mul_count(&self) -> u64 {
        self.mul_count
    }

    pub fn add_count(&self) -> u64 {
        self.add_count
    }

    /// `y = wᵀu`.
    pub fn predict(&mut self, u: &[f64]) -> Result<f64> {
        Error::check_len("regressor", self.weights.len(), u.len())?;
        Ok(self.dot(u))
    }

    fn dot(&mut self, u: &[f64]) -> f64 {
        let k = self.weights.len();
        let y = self.weights[1..]
            .iter()
            .zip(&u[1..])
            .fold(self.weights[0] * u[0], |acc, (w, x)| acc + w * x);
        self.mul_count += k as u64;
        self.add_count += k as u64 - 1;
        y
    }

    fn a_priori_error(&mut self, u: &[f64], desired: f64) -> Result<f64> {
        Error::check_len("regressor", self.weights.len(), u.len())?;
        if !desired.is_finite() {
            return Err(Error::NonFinite("desired sample"));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("input sample"));
        }
        let y = self.dot(u);
        self.add_count += 1;
        Ok(desired - y)
    }

    /// One q-VLMS step; returns the a-priori error.
    pub fn qvlms_step(&mut self, u: &[f64], desired: f64, qp: &QParams) -> Result<f64> {
        Error::check_len("q parameters", self.weights.len(), qp.len())?;
        let e = self.a_priori_error(u, desired)?;
        let scaled = self.step_size * e;
        for ((w, g), x) in self.weights.iter_mut().zip(&qp.g).zip(u) {
            *w += g * scaled * x;
        }
        let k = self.weights.len() as u64;
        self.mul_count += 2 * k + 1;
        self.add_count += k;
        self.iteration += 1;
        Ok(e)
    }

    /// One conventional VLMS step. Produces the same weights as
    /// [`qvlms_step`](Self::qvlms_step) with `q = 1`, using `K` fewer
    /// multiplications.
    pub fn vlms_step(&mut self, u: &[f64], desired: f64) -> Result<f64> {
        let e = self.a_priori_error(u, desired)?;
        let scaled = self.step_size * e;
        for (w, x) in self.weights.iter_mut().zip(u) {
            *w += scaled * x;
        }
        let k = self.weights.len() as u64;
        self.mul_count += k + 1;
        self.add_count += k;
        self.iteration += 1;
        Ok(e)
    }

    /// One step with a full gain matrix `Γ`: `w <- w + μ e Γ u`.
    pub fn matrix_gain_step(
        &mut self,
        u: &[f64],
        desired: f64,
        gain: &DMatrix<f64>,
    ) -> Result<f64> {
        let k = self.weights.len();
        if gain.nrows() != k || gain.ncols() != k {
            return Err(Error::Dimension {
                what: "gain matrix",
                expected: k,
                found: gain.nrows().max(gain.ncols()),
            });
        }
        let e = self.a_priori_error(u, desired)?;
        let scaled = self.step_size * e;
        for i in 0..k {
            let mut shaped = gain[(i, 0)] * u[0];
            for j in 1..k {
                shaped += gain[(i, j)] * u[j];
            }
            self.weights[i] += scaled * shaped;
        }
        let k = k as u64;
        self.mul_count += k * k + k + 1;
        self.add_count += k * (k - 1) + k;
        self.iteration += 1;
        Ok(e)
    }

    pub fn step(&mut self, u: &[f64], desired: f64, rule: &UpdateRule) -> Result<f64> {
        match rule {
            UpdateRule::Vlms => self.vlms_step(u, desired),
            UpdateRule::QVlms(qp) => self.qvlms_step(u, desired, qp),
            UpdateRule::MatrixGain(gain) => self.matrix_gain_step(u, desired, gain),
        }
    }
}

/// Largest step size guaranteeing mean convergence,
/// `1 / max_i((q_i + 1) λ_i)`.
///
/// ```
/// use qvlms::adapt::{step_size_bound, QParams};
/// let qp = QParams::uniform(1.0, 3).unwrap();
/// assert_eq!(step_size_bound(&qp, &[1.0, 1.0, 1.0]).unwrap(), 0.5);
/// ```
pub fn step_size_bound(qp: &QParams, eigenvalues: &[f64]) -> Result<f64> {
    Error::check_len("eigenvalues", qp.len(), eigenvalues.len())?;
    if let Some(bad) = eigenvalues.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::domain(format!(
            "eigenvalues must be positive, got {bad}"
        )));
    }
    let worst = qp
        .q()
        .iter()
        .zip(eigenvalues)
        .map(|(q, l)| (q + 1.0) * l)
        .fold(f64::MIN, f64::max);
    Ok(1.0 / worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn qparams_gains() {
        let qp = QParams::new(vec![1.0, 3.0, 10.0]).unwrap();
        assert_eq!(qp.gains(), &[1.0, 2.0, 5.5]);
        assert_eq!(QParams::ones(4).gains(), &[1.0; 4]);
        assert_eq!(QParams::uniform(5.0, 2).unwrap().uniform_value(), Some(5.0));
        assert_eq!(qp.uniform_value(), None);
        assert!(QParams::new(vec![1.0, 0.0]).is_err());
        assert!(QParams::new(vec![-1.0]).is_err());
        assert!(QParams::new(vec![]).is_err());
    }

    #[test]
    fn predict_examples() {
        let mut s = FilterState::new(9, 0.1).unwrap();
        assert_eq!(s.predict(&[3.0; 9]).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = normals(&mut rng, 9);
        for i in 0..9 {
            let mut w = vec![0.0; 9];
            w[i] = 1.0;
            let mut s = FilterState::with_weights(w, 0.1).unwrap();
            assert_eq!(s.predict(&u).unwrap(), u[i]);
        }

        let w = normals(&mut rng, 9);
        let mut s = FilterState::with_weights(w.clone(), 0.1).unwrap();
        let mut oracle = 0.0;
        for i in 0..9 {
            oracle += w[i] * u[i];
        }
        assert_relative_eq!(s.predict(&u).unwrap(), oracle, epsilon = 1e-12);
        assert_eq!(s.mul_count(), 9);
        assert_eq!(s.add_count(), 8);
        assert!(s.predict(&u[..8]).is_err());
    }

    #[test]
    fn scalar_qvlms_step() {
        let mut s = FilterState::new(1, 0.1).unwrap();
        let e = s.qvlms_step(&[2.0], 1.0, &QParams::ones(1)).unwrap();
        assert_eq!(e, 1.0);
        assert_relative_eq!(s.weights()[0], 0.2, epsilon = 1e-15);
        assert_eq!(s.iteration(), 1);
    }

    #[test]
    fn zero_error_leaves_weights() {
        let w = vec![0.5, -1.0, 2.0];
        let u = [1.0, 2.0, 3.0];
        let d = 0.5 - 2.0 + 6.0;
        let qp = QParams::uniform(7.0, 3).unwrap();
        let mut s = FilterState::with_weights(w.clone(), 0.3).unwrap();
        assert_eq!(s.qvlms_step(&u, d, &qp).unwrap(), 0.0);
        assert_eq!(s.weights(), w.as_slice());
        assert_eq!(s.vlms_step(&u, d).unwrap(), 0.0);
        assert_eq!(s.weights(), w.as_slice());
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        let qp = QParams::ones(2);
        let mut s = FilterState::new(2, 0.1).unwrap();
        assert_eq!(
            s.qvlms_step(&[1.0, f64::NAN], 1.0, &qp),
            Err(Error::NonFinite("input sample"))
        );
        assert_eq!(
            s.qvlms_step(&[1.0, 1.0], f64::INFINITY, &qp),
            Err(Error::NonFinite("desired sample"))
        );
        assert_eq!(s.weights(), &[0.0, 0.0]);
        assert_eq!(s.iteration(), 0);
    }

    #[test]
    fn constructor_validation() {
        assert!(FilterState::new(3, 0.0).is_err());
        assert!(FilterState::new(3, f64::NAN).is_err());
        assert!(FilterState::new(0, 0.1).is_err());
        assert!(FilterState::with_weights(vec![f64::NAN], 0.1).is_err());
        let mut s = FilterState::new(3, 0.1).unwrap();
        assert!(s.qvlms_step(&[1.0; 3], 1.0, &QParams::ones(2)).is_err());
    }

    #[test]
    fn q_one_matches_plain_vlms_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let k = 9;
        let mu = 0.01;
        let mut q = FilterState::new(k, mu).unwrap();
        let mut v = FilterState::new(k, mu).unwrap();
        // Oracle: a textbook LMS loop written out independently.
        let mut oracle = vec![0.0; k];
        let qp = QParams::ones(k);
        for _ in 0..1000 {
            let u = normals(&mut rng, k);
            let d: f64 = rng.sample(StandardNormal);
            q.qvlms_step(&u, d, &qp).unwrap();
            v.vlms_step(&u, d).unwrap();
            let mut y = oracle[0] * u[0];
            for i in 1..k {
                y += oracle[i] * u[i];
            }
            let step = mu * (d - y);
            for i in 0..k {
                oracle[i] += step * u[i];
            }
            assert_eq!(q.weights(), v.weights());
            assert_eq!(q.weights(), oracle.as_slice());
        }
    }

    #[test]
    fn op_counts() {
        let k = 9u64;
        let qp = QParams::uniform(4.0, 9).unwrap();
        let mut q = FilterState::new(9, 0.01).unwrap();
        let mut v = FilterState::new(9, 0.01).unwrap();
        let mut g = FilterState::new(9, 0.01).unwrap();
        let gain = DMatrix::<f64>::identity(9, 9);
        for n in 1..=25u64 {
            q.qvlms_step(&[0.5; 9], 1.0, &qp).unwrap();
            v.vlms_step(&[0.5; 9], 1.0).unwrap();
            g.matrix_gain_step(&[0.5; 9], 1.0, &gain).unwrap();
            assert_eq!(q.mul_count(), n * (3 * k + 1));
            assert_eq!(q.add_count(), n * 2 * k);
            assert_eq!(v.mul_count(), n * (2 * k + 1));
            assert_eq!(v.add_count(), n * 2 * k);
            assert_eq!(g.mul_count(), n * (k * k + 2 * k + 1));
            assert_eq!(g.add_count(), n * (k * k + k));
        }
    }

    #[test]
    fn identity_matrix_gain_matches_vlms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let gain = DMatrix::<f64>::identity(5, 5);
        let mut a = FilterState::new(5, 0.05).unwrap();
        let mut b = FilterState::new(5, 0.05).unwrap();
        for _ in 0..200 {
            let u = normals(&mut rng, 5);
            let d: f64 = rng.sample(StandardNormal);
            a.matrix_gain_step(&u, d, &gain).unwrap();
            b.vlms_step(&u, d).unwrap();
        }
        for (x, y) in a.weights().iter().zip(b.weights()) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn noiseless_vlms_identifies_kernel() {
        use crate::volterra::{expand_into, flat_len, RegressorMode};
        let m = 3;
        let k = flat_len(m);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let h = normals(&mut rng, k);
        let norm2: f64 = h.iter().map(|x| x * x).sum();
        let mut s = FilterState::new(k, 0.02).unwrap();
        let mut window = vec![0.0; m];
        let mut u = vec![0.0; k];
        for _ in 0..20_000 {
            window.rotate_right(1);
            window[0] = rng.sample(StandardNormal);
            expand_into(&window, RegressorMode::Orthonormalized, &mut u).unwrap();
            let d: f64 = h.iter().zip(&u).map(|(a, b)| a * b).sum();
            s.vlms_step(&u, d).unwrap();
        }
        let dev: f64 = h
            .iter()
            .zip(s.weights())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        assert!(dev / norm2 < 1e-6, "nwd {}", dev / norm2);
    }

    #[test]
    fn bound_examples() {
        let ones = [1.0; 3];
        assert_eq!(step_size_bound(&QParams::ones(3), &ones).unwrap(), 0.5);
        assert_eq!(
            step_size_bound(&QParams::uniform(10.0, 3).unwrap(), &ones).unwrap(),
            1.0 / 11.0
        );
        let mixed = QParams::new(vec![1.0, 5.0, 10.0]).unwrap();
        let oracle = 1.0 / [2.0, 6.0, 11.0f64].into_iter().fold(0.0, f64::max);
        assert_eq!(step_size_bound(&mixed, &ones).unwrap(), oracle);
        assert!(step_size_bound(&mixed, &[1.0, 0.0, 1.0]).is_err());
        assert!(step_size_bound(&mixed, &[1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn counters_are_monotone(seed in any::<u64>(), steps in 1usize..50) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let qp = QParams::uniform(3.0, 4).unwrap();
            let mut s = FilterState::new(4, 0.01).unwrap();
            let (mut m0, mut a0) = (0, 0);
            for _ in 0..steps {
                let u = normals(&mut rng, 4);
                s.qvlms_step(&u, 0.3, &qp).unwrap();
                prop_assert!(s.mul_count() > m0 && s.add_count() > a0);
                m0 = s.mul_count();
                a0 = s.add_count();
            }
            prop_assert_eq!(s.iteration(), steps as u64);
        }
    }
}
