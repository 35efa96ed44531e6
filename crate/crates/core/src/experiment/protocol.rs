//! Experiment configuration and the two evaluation protocols.
//!
//! Protocol 1 checks the mean-convergence theory: for each q it overlays the
//! simulated mean absolute weight error on the prediction
//! `mean_i |(I - μA)^r Δw(0)|_i` and reports their Pearson correlation.
//!
//! Protocol 2 compares q-VLMS against conventional VLMS at a fixed step
//! size over several noise levels, reporting steady-state NWD in dB, the
//! advantage of each q-VLMS run over VLMS, and iterations needed to reach
//! fixed NWD targets.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::ChannelFamily;
use super::metrics::{correlation_coefficient, iterations_to_reach, tail_mean, to_db};
use super::trial::{monte_carlo, AveragedCurves, TrialConfig, WeightInit};
use crate::adapt::{QParams, UpdateRule};
use crate::error::{Error, Result};
use crate::theory::{sorted_symmetric_eigenvalues, wiener_solution, MeanTrajectory, TheoryModel};
use crate::volterra::{flat_len, RegressorMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Conventional Volterra LMS.
    Vlms,
    /// q-VLMS with diagonal gain `(q+1)/2`.
    Qvlms,
    /// Volterra LMS with the full gain matrix `S R⁻¹ S`.
    Whitened,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Vlms => "vlms",
            Algorithm::Qvlms => "qvlms",
            Algorithm::Whitened => "whitened",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vlms" => Ok(Algorithm::Vlms),
            "qvlms" => Ok(Algorithm::Qvlms),
            "whitened" => Ok(Algorithm::Whitened),
            other => Err(Error::domain(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Step size, either absolute or as a fraction of `1/λ_max(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Absolute(f64),
    FractionOfLambdaMax(f64),
}

/// Everything needed to reproduce a Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub memory_length: usize,
    pub regressor_mode: RegressorMode,
    /// Uniform q values; protocol 1 validates each, protocol 2 sweeps them.
    pub q_values: Vec<f64>,
    /// Absolute step size. Exactly one of `mu` and `mu_frac` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Step size as a fraction of `1/λ_max(A)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_frac: Option<f64>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub iterations: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Standard deviation of the random initial weights; `0` starts from
    /// zeros. Defaults to `1/√K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_std: Option<f64>,
    /// Fraction of the trailing iterations averaged for steady-state NWD.
    pub steady_state_fraction: f64,
    /// NWD levels for the iterations-to-target comparison.
    pub nwd_targets_db: Vec<f64>,
}

impl ExperimentConfig {
    pub fn protocol1_default() -> Self {
        Self {
            memory_length: 3,
            regressor_mode: RegressorMode::Orthonormalized,
            q_values: vec![1.0, 5.0, 10.0],
            mu: None,
            mu_frac: Some(0.25),
            snr_db: vec![20.0],
            trials: 1000,
            iterations: 500,
            seed: 2024,
            algorithms: vec![Algorithm::Qvlms],
            init_std: None,
            steady_state_fraction: 0.1,
            nwd_targets_db: vec![0.0, -10.0, -20.0],
        }
    }

    pub fn protocol2_default() -> Self {
        Self {
            q_values: vec![2.0, 5.0, 10.0],
            mu: Some(1e-3),
            mu_frac: None,
            snr_db: vec![10.0, 20.0, 30.0],
            iterations: 5000,
            algorithms: vec![Algorithm::Vlms, Algorithm::Qvlms],
            ..Self::protocol1_default()
        }
    }

    pub fn flat_len(&self) -> usize {
        flat_len(self.memory_length)
    }

    pub fn step_rule(&self) -> Result<StepRule> {
        match (self.mu, self.mu_frac) {
            (Some(mu), None) => Ok(StepRule::Absolute(mu)),
            (None, Some(frac)) => Ok(StepRule::FractionOfLambdaMax(frac)),
            _ => Err(Error::domain(
                "exactly one of `mu` and `mu_frac` must be set",
            )),
        }
    }

    pub fn weight_init(&self) -> WeightInit {
        let std = self
            .init_std
            .unwrap_or_else(|| 1.0 / (self.flat_len() as f64).sqrt());
        if std == 0.0 {
            WeightInit::Zeros
        } else {
            WeightInit::Gaussian { std }
        }
    }

    /// Checks every field; the message names the offending key.
    pub fn validate(&self) -> Result<()> {
        fn bad(key: &str, why: impl std::fmt::Display) -> Result<()> {
            Err(Error::domain(format!("`{key}` {why}")))
        }
        if self.memory_length == 0 {
            return bad("memory_length", "must be at least 1");
        }
        if self.q_values.is_empty() {
            return bad("q_values", "must not be empty");
        }
        if let Some(q) = self.q_values.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
            return bad("q_values", format!("must be positive, got {q}"));
        }
        if let Some(mu) = self.mu {
            if !(mu.is_finite() && mu > 0.0) {
                return bad("mu", format!("must be positive, got {mu}"));
            }
        }
        if let Some(frac) = self.mu_frac {
            if !(frac.is_finite() && frac > 0.0) {
                return bad("mu_frac", format!("must be positive, got {frac}"));
            }
        }
        if self.mu.is_some() == self.mu_frac.is_some() {
            return bad("mu", "and `mu_frac`: exactly one must be set");
        }
        if self.snr_db.is_empty() {
            return bad("snr_db", "must not be empty");
        }
        if let Some(s) = self
            .snr_db
            .iter()
            .find(|s| s.is_nan() || **s == f64::NEG_INFINITY)
        {
            return bad("snr_db", format!("is not a usable SNR: {s}"));
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1");
        }
        if self.iterations < 2 {
            return bad("iterations", "must be at least 2");
        }
        if self.algorithms.is_empty() {
            return bad("algorithms", "must not be empty");
        }
        if let Some(std) = self.init_std {
            if !(std.is_finite() && std >= 0.0) {
                return bad("init_std", format!("must be nonnegative, got {std}"));
            }
        }
        if !(self.steady_state_fraction > 0.0 && self.steady_state_fraction <= 1.0) {
            return bad("steady_state_fraction", "must lie in (0, 1]");
        }
        if self.nwd_targets_db.iter().any(|t| !t.is_finite()) {
            return bad("nwd_targets_db", "must be finite");
        }
        Ok(())
    }
}

/// One `(algorithm, q, SNR)` combination with its resolved step size.
#[derive(Debug, Clone)]
pub struct Cell {
    pub algorithm: Algorithm,
    /// `None` for the matrix-gain variant.
    pub q: Option<f64>,
    pub snr_db: f64,
    pub step_size: f64,
    /// Largest eigenvalue of the effective gain times input autocorrelation.
    pub lambda_max: f64,
    /// Mean-convergence bound `1 / (2 λ_max)`.
    pub mu_bound: f64,
    pub model: TheoryModel,
    pub rule: UpdateRule,
}

impl Cell {
    pub fn new(cfg: &ExperimentConfig, algorithm: Algorithm, q: f64, snr_db: f64) -> Result<Self> {
        let k = cfg.flat_len();
        let q_eff = if algorithm == Algorithm::Qvlms {
            q
        } else {
            1.0
        };
        let qp = QParams::uniform(q_eff, k)?;
        let noise = crate::theory::noise_variance_for_snr(1.0, snr_db)?;
        let model = TheoryModel::gaussian(cfg.memory_length, cfg.regressor_mode, &qp, noise)?;
        let (rule, lambda_max, mu_bound) = match algorithm {
            Algorithm::Vlms => (UpdateRule::Vlms, model.lambda_max_a(), model.mu_bound()),
            Algorithm::Qvlms => (
                UpdateRule::QVlms(qp),
                model.lambda_max_a(),
                model.mu_bound(),
            ),
            Algorithm::Whitened => {
                let gain = whitened_gain(&model)?;
                let lmax = gained_lambda_max(&gain, model.whitened())?;
                (UpdateRule::MatrixGain(gain), lmax, 1.0 / (2.0 * lmax))
            }
        };
        let step_size = match cfg.step_rule()? {
            StepRule::Absolute(mu) => mu,
            StepRule::FractionOfLambdaMax(frac) => frac / lambda_max,
        };
        Ok(Self {
            algorithm,
            q: (algorithm != Algorithm::Whitened).then_some(q_eff),
            snr_db,
            step_size,
            lambda_max,
            mu_bound,
            model,
            rule,
        })
    }

    pub fn trial_config(&self, cfg: &ExperimentConfig) -> TrialConfig {
        TrialConfig {
            iterations: cfg.iterations,
            step_size: self.step_size,
            rule: self.rule.clone(),
            init: cfg.weight_init(),
        }
    }

    pub fn family(&self, cfg: &ExperimentConfig) -> Result<ChannelFamily> {
        ChannelFamily::new(cfg.memory_length, self.snr_db, cfg.regressor_mode)
    }

    /// Runs the Monte-Carlo average for this cell. A cell whose trials all
    /// diverged yields `Ok(None)`.
    pub fn run(&self, cfg: &ExperimentConfig) -> Result<CellResult> {
        let curves = match monte_carlo(
            &self.trial_config(cfg),
            &self.family(cfg)?,
            cfg.seed,
            cfg.trials,
        ) {
            Ok(c) => Some(c),
            Err(Error::AllTrialsDiverged { .. }) => None,
            Err(e) => return Err(e),
        };
        let divergence_count = curves.as_ref().map_or(cfg.trials, |c| c.divergence_count);
        let steady_state_nwd_db = curves
            .as_ref()
            .and_then(|c| tail_mean(&c.nwd, cfg.steady_state_fraction))
            .map(to_db);
        let iterations_to_target = cfg
            .nwd_targets_db
            .iter()
            .map(|t| {
                curves
                    .as_ref()
                    .and_then(|c| iterations_to_reach(&c.nwd, 10f64.powf(t / 10.0)))
            })
            .collect();
        Ok(CellResult {
            algorithm: self.algorithm,
            q: self.q,
            snr_db: self.snr_db,
            step_size: self.step_size,
            mu_bound: self.mu_bound,
            lambda_max: self.lambda_max,
            trials: cfg.trials,
            divergence_count,
            steady_state_nwd_db,
            iterations_to_target,
            curves,
        })
    }
}

/// `S R⁻¹ S`, with `S = I` for raw regressors.
pub fn whitened_gain(model: &TheoryModel) -> Result<DMatrix<f64>> {
    let r = model.r();
    let k = r.nrows();
    let mut inv = DMatrix::zeros(k, k);
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let col = wiener_solution(r, &e)?;
        inv.set_column(j, &nalgebra::DVector::from_vec(col));
    }
    let inv = (&inv + inv.transpose()) * 0.5;
    Ok(match model.scaling() {
        Some(s) => {
            let e = s.entries();
            DMatrix::from_fn(k, k, |i, j| e[i] * inv[(i, j)] * e[j])
        }
        None => inv,
    })
}

/// `λ_max(Γ W)` for symmetric positive definite `Γ`, via `Lᵀ W L`.
fn gained_lambda_max(gain: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<f64> {
    let l = gain
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("gain matrix is not positive definite"))?
        .l();
    let sym = l.transpose() * w * &l;
    let sym = (&sym + sym.transpose()) * 0.5;
    Ok(*sorted_symmetric_eigenvalues(sym).last().expect("non-empty"))
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub algorithm: Algorithm,
    pub q: Option<f64>,
    pub snr_db: f64,
    pub step_size: f64,
    pub mu_bound: f64,
    pub lambda_max: f64,
    pub trials: usize,
    pub divergence_count: usize,
    pub steady_state_nwd_db: Option<f64>,
    /// One entry per configured target; `None` when never reached.
    pub iterations_to_target: Vec<Option<usize>>,
    pub curves: Option<AveragedCurves>,
}

impl CellResult {
    pub fn all_diverged(&self) -> bool {
        self.curves.is_none()
    }
}

/// Every `(algorithm, q, SNR)` cell of the configuration, in order: SNRs
/// outermost, then algorithms, then q values (q only varies for q-VLMS).
pub fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &snr in &cfg.snr_db {
        for &alg in &cfg.algorithms {
            match alg {
                Algorithm::Qvlms => {
                    for &q in &cfg.q_values {
                        out.push(Cell::new(cfg, alg, q, snr)?);
                    }
                }
                _ => out.push(Cell::new(cfg, alg, 1.0, snr)?),
            }
        }
    }
    Ok(out)
}

/// Runs every cell of the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cells(cfg)?.iter().map(|c| c.run(cfg)).collect()
}

#[derive(Debug, Clone)]
pub struct TheoryComparison {
    pub q: f64,
    pub result: CellResult,
    /// Predicted mean absolute weight error, one value per iteration.
    pub theory_mae: Vec<f64>,
    /// Predicted NWD of the mean weights, one value per iteration.
    pub theory_nwd: Vec<f64>,
    pub correlation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Protocol1Report {
    pub snr_db: f64,
    pub comparisons: Vec<TheoryComparison>,
    /// Mean of the per-q correlations; `None` if any q had no usable run.
    pub average_correlation: Option<f64>,
}

/// Theory curves for the trials that were averaged in `curves`.
pub fn theory_curves(
    model: &TheoryModel,
    mu: f64,
    curves: &AveragedCurves,
    iterations: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = model.a().nrows();
    let per_trial: Vec<Result<(Vec<f64>, Vec<f64>)>> = curves
        .initial_errors
        .par_iter()
        .zip(&curves.channels)
        .map(|(init, h)| {
            let norm: f64 = h.iter().map(|x| x * x).sum();
            let mut traj = MeanTrajectory::new(init, mu, model.a())?;
            let mut mae = Vec::with_capacity(iterations);
            let mut nwd = Vec::with_capacity(iterations);
            for _ in 0..iterations {
                let v = traj.current();
                mae.push(v.iter().map(|x| x.abs()).sum::<f64>() / k as f64);
                nwd.push(v.iter().map(|x| x * x).sum::<f64>() / norm);
                traj.advance();
            }
            Ok((mae, nwd))
        })
        .collect();
    let mut mae = vec![0.0; iterations];
    let mut nwd = vec![0.0; iterations];
    let n = per_trial.len() as f64;
    for r in per_trial {
        let (m, w) = r?;
        mae.iter_mut().zip(&m).for_each(|(a, b)| *a += b);
        nwd.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
    }
    mae.iter_mut().for_each(|x| *x /= n);
    nwd.iter_mut().for_each(|x| *x /= n);
    Ok((mae, nwd))
}

/// Theory-versus-simulation validation at a single SNR (the first entry of
/// `snr_db`) for every q in `q_values`.
pub fn protocol1(cfg: &ExperimentConfig) -> Result<Protocol1Report> {
    cfg.validate()?;
    let snr_db = cfg.snr_db[0];
    let mut comparisons = Vec::with_capacity(cfg.q_values.len());
    for &q in &cfg.q_values {
        let cell = Cell::new(cfg, Algorithm::Qvlms, q, snr_db)?;
        let result = cell.run(cfg)?;
        let (theory_mae, theory_nwd, correlation) = match &result.curves {
            Some(curves) => {
                let (mae, nwd) =
                    theory_curves(&cell.model, cell.step_size, curves, cfg.iterations)?;
                let corr = correlation_coefficient(&mae, &curves.mae).ok();
                (mae, nwd, corr)
            }
            None => (Vec::new(), Vec::new(), None),
        };
        comparisons.push(TheoryComparison {
            q,
            result,
            theory_mae,
            theory_nwd,
            correlation,
        });
    }
    let average_correlation = comparisons
        .iter()
        .map(|c| c.correlation)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64);
    Ok(Protocol1Report {
        snr_db,
        comparisons,
        average_correlation,
    })
}

#[derive(Debug, Clone)]
pub struct SnrComparison {
    pub snr_db: f64,
    pub cells: Vec<CellResult>,
    /// `VLMS steady-state dB - cell steady-state dB` for every q-VLMS cell,
    /// aligned with `q_values`. Positive means q-VLMS ends lower.
    pub advantage_db: Vec<Option<f64>>,
}

impl SnrComparison {
    pub fn baseline(&self) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.algorithm == Algorithm::Vlms)
    }

    pub fn qvlms(&self) -> impl Iterator<Item = &CellResult> {
        self.cells
            .iter()
            .filter(|c| c.algorithm == Algorithm::Qvlms)
    }
}

#[derive(Debug, Clone)]
pub struct Protocol2Report {
    pub targets_db: Vec<f64>,
    pub snrs: Vec<SnrComparison>,
    /// Mean of every available advantage figure.
    pub average_advantage_db: Option<f64>,
}

/// q-VLMS versus VLMS across SNRs. VLMS is always included as the baseline.
pub fn protocol2(cfg: &ExperimentConfig) -> Result<Protocol2Report> {
    let mut cfg = cfg.clone();
    if !cfg.algorithms.contains(&Algorithm::Vlms) {
        cfg.algorithms.insert(0, Algorithm::Vlms);
    }
    if !cfg.algorithms.contains(&Algorithm::Qvlms) {
        cfg.algorithms.push(Algorithm::Qvlms);
    }
    let results = run_experiment(&cfg)?;
    let mut snrs = Vec::with_capacity(cfg.snr_db.len());
    let mut advantages = Vec::new();
    for &snr in &cfg.snr_db {
        let cells: Vec<CellResult> = results
            .iter()
            .filter(|c| c.snr_db == snr)
            .cloned()
            .collect();
        let base = cells
            .iter()
            .find(|c| c.algorithm == Algorithm::Vlms)
            .and_then(|c| c.steady_state_nwd_db);
        let advantage_db: Vec<Option<f64>> = cells
            .iter()
            .filter(|c| c.algorithm == Algorithm::Qvlms)
            .map(|c| Some(base? - c.steady_state_nwd_db?))
            .collect();
        advantages.extend(advantage_db.iter().flatten().copied());
        snrs.push(SnrComparison {
            snr_db: snr,
            cells,
            advantage_db,
        });
    }
    let average_advantage_db =
        (!advantages.is_empty()).then(|| advantages.iter().sum::<f64>() / advantages.len() as f64);
    Ok(Protocol2Report {
        targets_db: cfg.nwd_targets_db.clone(),
        snrs,
        average_advantage_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mut cfg: ExperimentConfig) -> ExperimentConfig {
        cfg.trials = 16;
        cfg.iterations = 300;
        cfg
    }

    #[test]
    fn defaults_validate() {
        ExperimentConfig::protocol1_default().validate().unwrap();
        ExperimentConfig::protocol2_default().validate().unwrap();
    }

    #[test]
    fn validation_names_the_key() {
        let mut cfg = ExperimentConfig::protocol1_default();
        cfg.trials = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("`trials`"));
        let mut cfg = ExperimentConfig::protocol1_default();
        cfg.mu = Some(0.1);
        assert!(cfg.validate().unwrap_err().to_string().contains("`mu`"));
        let mut cfg = ExperimentConfig::protocol1_default();
        cfg.q_values = vec![1.0, -2.0];
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("`q_values`"));
    }

    #[test]
    fn fraction_rule_uses_lambda_max_of_a() {
        let cfg = ExperimentConfig::protocol1_default();
        for q in [1.0, 5.0, 10.0] {
            let cell = Cell::new(&cfg, Algorithm::Qvlms, q, 20.0).unwrap();
            assert!((cell.step_size - 0.25 / ((q + 1.0) / 2.0)).abs() < 1e-15);
            assert_eq!(cell.mu_bound, 1.0 / (q + 1.0));
        }
    }

    #[test]
    fn whitened_gain_is_identity_for_orthonormalized_input() {
        let cfg = ExperimentConfig::protocol2_default();
        let cell = Cell::new(&cfg, Algorithm::Whitened, 1.0, 20.0).unwrap();
        match &cell.rule {
            UpdateRule::MatrixGain(g) => {
                assert!((g - DMatrix::<f64>::identity(9, 9)).amax() < 1e-12)
            }
            other => panic!("unexpected rule {other:?}"),
        }
        assert!(cell.q.is_none());
    }

    #[test]
    fn whitened_gain_inverts_raw_autocorrelation() {
        let mut cfg = ExperimentConfig::protocol2_default();
        cfg.regressor_mode = RegressorMode::Raw;
        let cell = Cell::new(&cfg, Algorithm::Whitened, 1.0, 20.0).unwrap();
        let UpdateRule::MatrixGain(g) = &cell.rule else {
            panic!()
        };
        let prod = g * cell.model.whitened();
        assert!((prod - DMatrix::<f64>::identity(9, 9)).amax() < 1e-10);
        assert!((cell.lambda_max - 1.0).abs() < 1e-10);
    }

    #[test]
    fn protocol1_shape() {
        let report = protocol1(&small(ExperimentConfig::protocol1_default())).unwrap();
        assert_eq!(report.comparisons.len(), 3);
        for c in &report.comparisons {
            if let Some(curves) = &c.result.curves {
                assert_eq!(c.theory_mae.len(), curves.mae.len());
            }
        }
    }

    #[test]
    fn protocol1_q1_theory_is_geometric() {
        let mut cfg = small(ExperimentConfig::protocol1_default());
        cfg.mu_frac = Some(0.01);
        cfg.q_values = vec![1.0];
        let report = protocol1(&cfg).unwrap();
        let c = &report.comparisons[0];
        let mu = c.result.step_size;
        assert_eq!(mu, 0.01);
        let ratio = 1.0 - mu;
        for t in 1..c.theory_mae.len() {
            let got = c.theory_mae[t] / c.theory_mae[t - 1];
            assert!((got - ratio).abs() < 1e-12);
        }
        assert!(c.correlation.unwrap() > 0.9);
    }

    #[test]
    fn protocol2_shape_and_noiseless_sanity() {
        let mut cfg = small(ExperimentConfig::protocol2_default());
        cfg.snr_db = vec![f64::INFINITY];
        cfg.mu = Some(0.01);
        cfg.iterations = 4000;
        cfg.algorithms.push(Algorithm::Whitened);
        let report = protocol2(&cfg).unwrap();
        assert_eq!(report.snrs.len(), 1);
        let cells = &report.snrs[0].cells;
        assert_eq!(cells.len(), 1 + 3 + 1);
        for c in cells {
            let nwd = &c.curves.as_ref().unwrap().nwd;
            assert!(*nwd.last().unwrap() < 1e-6, "{} {:?}", c.algorithm, c.q);
        }
        assert_eq!(report.snrs[0].advantage_db.len(), 3);
        assert!(report.average_advantage_db.is_some());
    }
}
