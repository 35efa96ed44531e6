use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::channel::{ChannelFamily, ChannelSpec};
use super::metrics::{squared_deviation, to_db};
use crate::adapt::{FilterState, UpdateRule};
use crate::error::{Error, Result};
use crate::volterra::expand_into;

/// NWD above which a trial is declared diverged.
pub const DIVERGENCE_NWD: f64 = 1e6;

/// Trials handed to the thread pool at a time. Results are folded in trial
/// order, so the batch size never changes the output.
const BATCH: usize = 64;

/// Seed of trial `index` under `master`, via the SplitMix64 finalizer.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightInit {
    Zeros,
    /// i.i.d. `N(0, std²)` weights.
    Gaussian {
        std: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub iterations: usize,
    pub step_size: f64,
    pub rule: UpdateRule,
    pub init: WeightInit,
}

impl TrialConfig {
    fn validate(&self, k: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::domain("iterations must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::domain(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if let WeightInit::Gaussian { std } = self.init {
            if !(std >= 0.0 && std.is_finite()) {
                return Err(Error::domain(format!(
                    "initial weight std must be nonnegative, got {std}"
                )));
            }
        }
        if let Some(dim) = self.rule.dimension() {
            Error::check_len("update rule", k, dim)?;
        }
        Ok(())
    }
}

/// Learning curves of a single trial. Row `r` describes the weights `w(r)`
/// before step `r` and that step's a-priori error.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialCurves {
    pub nwd: Vec<f64>,
    /// Row-major `iterations × K` absolute weight errors `|h_i - w_i(r)|`.
    pub abs_error: Vec<f64>,
    /// Squared a-priori output error `e(r)²`.
    pub sq_error: Vec<f64>,
    pub channel: Vec<f64>,
    /// `h - w(0)`.
    pub initial_error: Vec<f64>,
    pub final_weights: Vec<f64>,
    pub diverged_at: Option<usize>,
    pub mul_count: u64,
    pub add_count: u64,
}

impl TrialCurves {
    pub fn nwd_db(&self) -> Vec<f64> {
        self.nwd.iter().map(|&x| to_db(x)).collect()
    }

    pub fn dim(&self) -> usize {
        self.channel.len()
    }

    /// Mean absolute weight error per iteration.
    pub fn mae(&self) -> Vec<f64> {
        let k = self.dim();
        self.abs_error
            .chunks_exact(k)
            .map(|row| row.iter().sum::<f64>() / k as f64)
            .collect()
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Runs one trial with a channel and initial weights drawn from `seed`.
///
/// Draw order: channel coefficients, initial weights, `M - 1` warm-up input
/// samples, then per iteration one input sample and one noise sample.
pub fn run_trial(config: &TrialConfig, family: &ChannelFamily, seed: u64) -> Result<TrialCurves> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channel = family.draw(&mut rng)?;
    run_with_rng(config, &channel, &mut rng)
}

/// Runs one trial against a fixed channel; only the initial weights and the
/// signals come from `seed`.
pub fn run_trial_with_channel(
    config: &TrialConfig,
    channel: &ChannelSpec,
    seed: u64,
) -> Result<TrialCurves> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_with_rng(config, channel, &mut rng)
}

fn run_with_rng(
    config: &TrialConfig,
    channel: &ChannelSpec,
    rng: &mut ChaCha8Rng,
) -> Result<TrialCurves> {
    let kernel = channel.kernel();
    let m = kernel.memory_length();
    let h = kernel.flatten();
    let k = h.len();
    config.validate(k)?;

    let draws: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
    let w0 = match config.init {
        WeightInit::Zeros => vec![0.0; k],
        WeightInit::Gaussian { std } => draws.iter().map(|x| std * x).collect(),
    };
    let initial_error: Vec<f64> = h.iter().zip(&w0).map(|(a, b)| a - b).collect();
    let mut state = FilterState::with_weights(w0, config.step_size)?;

    let mut window = vec![0.0; m];
    for _ in 1..m {
        window.rotate_right(1);
        window[0] = rng.sample(StandardNormal);
    }

    let norm = h.iter().map(|x| x * x).sum::<f64>();
    let noise_std = channel.noise_std();
    let bias = kernel.bias();
    let mode = channel.mode();
    let n = config.iterations;
    let mut nwd = Vec::with_capacity(n);
    let mut abs_error = Vec::with_capacity(n * k);
    let mut sq_error = Vec::with_capacity(n);
    let mut u = vec![0.0; k];
    let mut diverged_at = None;

    for r in 0..n {
        let dev = squared_deviation(&h, state.weights()) / norm;
        if dev.is_nan() || dev > DIVERGENCE_NWD {
            diverged_at = Some(r);
            break;
        }
        nwd.push(dev);
        abs_error.extend(h.iter().zip(state.weights()).map(|(a, b)| (a - b).abs()));

        window.rotate_right(1);
        window[0] = rng.sample(StandardNormal);
        expand_into(&window, mode, &mut u)?;
        let eta: f64 = rng.sample(StandardNormal);
        let clean: f64 = h.iter().zip(&u).map(|(a, b)| a * b).sum();
        let desired = bias + clean + noise_std * eta;
        let e = state.step(&u, desired, &config.rule)?;
        sq_error.push(e * e);
    }

    Ok(TrialCurves {
        nwd,
        abs_error,
        sq_error,
        channel: h,
        initial_error,
        final_weights: state.weights().to_vec(),
        diverged_at,
        mul_count: state.mul_count(),
        add_count: state.add_count(),
    })
}

/// Trial-averaged curves over the trials that did not diverge.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCurves {
    pub nwd: Vec<f64>,
    pub mae: Vec<f64>,
    /// Row-major `iterations × K` mean absolute weight error.
    pub abs_error: Vec<f64>,
    pub sq_error: Vec<f64>,
    pub trials: usize,
    pub divergence_count: usize,
    /// Channel of every averaged trial, in trial order.
    pub channels: Vec<Vec<f64>>,
    /// `h - w(0)` of every averaged trial, in trial order.
    pub initial_errors: Vec<Vec<f64>>,
}

impl AveragedCurves {
    pub fn averaged_trials(&self) -> usize {
        self.trials - self.divergence_count
    }

    pub fn nwd_db(&self) -> Vec<f64> {
        self.nwd.iter().map(|&x| to_db(x)).collect()
    }
}

#[derive(Debug)]
struct Accumulator {
    nwd: Vec<f64>,
    abs_error: Vec<f64>,
    sq_error: Vec<f64>,
    channels: Vec<Vec<f64>>,
    initial_errors: Vec<Vec<f64>>,
    diverged: usize,
}

impl Accumulator {
    fn add(&mut self, curves: TrialCurves) {
        if curves.is_diverged() {
            self.diverged += 1;
            return;
        }
        if self.nwd.is_empty() {
            self.nwd = curves.nwd;
            self.abs_error = curves.abs_error;
            self.sq_error = curves.sq_error;
        } else {
            add_into(&mut self.nwd, &curves.nwd);
            add_into(&mut self.abs_error, &curves.abs_error);
            add_into(&mut self.sq_error, &curves.sq_error);
        }
        self.channels.push(curves.channel);
        self.initial_errors.push(curves.initial_error);
    }
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

/// Runs `trials` independent trials (seeds from [`trial_seed`]) in parallel
/// and averages the non-diverged ones in trial order.
pub fn monte_carlo(
    config: &TrialConfig,
    family: &ChannelFamily,
    master_seed: u64,
    trials: usize,
) -> Result<AveragedCurves> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let mut acc = Accumulator {
        nwd: Vec::new(),
        abs_error: Vec::new(),
        sq_error: Vec::new(),
        channels: Vec::new(),
        initial_errors: Vec::new(),
        diverged: 0,
    };
    for start in (0..trials).step_by(BATCH) {
        let end = (start + BATCH).min(trials);
        let batch: Vec<Result<TrialCurves>> = (start..end)
            .into_par_iter()
            .map(|i| run_trial(config, family, trial_seed(master_seed, i as u64)))
            .collect();
        for curves in batch {
            acc.add(curves?);
        }
    }
    let kept = trials - acc.diverged;
    if kept == 0 {
        return Err(Error::AllTrialsDiverged { trials });
    }
    let scale = 1.0 / kept as f64;
    let k = family.flat_len();
    for v in [&mut acc.nwd, &mut acc.abs_error, &mut acc.sq_error] {
        v.iter_mut().for_each(|x| *x *= scale);
    }
    let mae = acc
        .abs_error
        .chunks_exact(k)
        .map(|row| row.iter().sum::<f64>() / k as f64)
        .collect();
    Ok(AveragedCurves {
        nwd: acc.nwd,
        mae,
        abs_error: acc.abs_error,
        sq_error: acc.sq_error,
        trials,
        divergence_count: acc.diverged,
        channels: acc.channels,
        initial_errors: acc.initial_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::QParams;
    use crate::experiment::{correlation_coefficient, window_means};
    use crate::volterra::RegressorMode;

    fn family(snr: f64) -> ChannelFamily {
        ChannelFamily::new(3, snr, RegressorMode::Orthonormalized).unwrap()
    }

    fn config(rule: UpdateRule, mu: f64, iterations: usize) -> TrialConfig {
        TrialConfig {
            iterations,
            step_size: mu,
            rule,
            init: WeightInit::Gaussian { std: 1.0 / 3.0 },
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
    }

    #[test]
    fn noiseless_trial_converges() {
        let cfg = config(
            UpdateRule::QVlms(QParams::uniform(5.0, 9).unwrap()),
            0.01,
            4000,
        );
        let c = run_trial(&cfg, &family(f64::INFINITY), 99).unwrap();
        assert!(!c.is_diverged());
        assert!(*c.nwd.last().unwrap() < 1e-6);
        assert_eq!(c.nwd.len(), 4000);
        assert_eq!(c.abs_error.len(), 4000 * 9);
        assert_eq!(c.mul_count, 4000 * 28);
        assert_eq!(c.add_count, 4000 * 18);
    }

    #[test]
    fn same_seed_same_curves() {
        let cfg = config(
            UpdateRule::QVlms(QParams::uniform(3.0, 9).unwrap()),
            0.01,
            300,
        );
        let a = run_trial(&cfg, &family(20.0), 5).unwrap();
        let b = run_trial(&cfg, &family(20.0), 5).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&cfg, &family(20.0), 6).unwrap();
        assert_ne!(a.channel, c.channel);
    }

    #[test]
    fn q_one_trial_equals_vlms_trial() {
        let q1 = config(UpdateRule::QVlms(QParams::ones(9)), 0.02, 500);
        let v = config(UpdateRule::Vlms, 0.02, 500);
        let a = run_trial(&q1, &family(10.0), 1234).unwrap();
        let b = run_trial(&v, &family(10.0), 1234).unwrap();
        assert_eq!(a.nwd, b.nwd);
        assert_eq!(a.final_weights, b.final_weights);
    }

    #[test]
    fn divergence_is_recorded() {
        let cfg = config(UpdateRule::Vlms, 1.5, 1000);
        let c = run_trial(&cfg, &family(20.0), 1).unwrap();
        assert!(c.is_diverged());
        assert_eq!(c.nwd.len(), c.diverged_at.unwrap());
        assert!(matches!(
            monte_carlo(&cfg, &family(20.0), 1, 4),
            Err(Error::AllTrialsDiverged { trials: 4 })
        ));
    }

    #[test]
    fn zero_init_starts_at_unit_nwd() {
        let mut cfg = config(UpdateRule::Vlms, 0.01, 10);
        cfg.init = WeightInit::Zeros;
        let c = run_trial(&cfg, &family(20.0), 3).unwrap();
        assert!((c.nwd[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = config(UpdateRule::QVlms(QParams::ones(5)), 0.01, 10);
        assert!(run_trial(&cfg, &family(20.0), 0).is_err());
        cfg.rule = UpdateRule::Vlms;
        cfg.iterations = 0;
        assert!(run_trial(&cfg, &family(20.0), 0).is_err());
        assert!(monte_carlo(&config(UpdateRule::Vlms, 0.01, 5), &family(20.0), 0, 0).is_err());
    }

    #[test]
    fn single_trial_average_is_the_trial() {
        let cfg = config(
            UpdateRule::QVlms(QParams::uniform(2.0, 9).unwrap()),
            0.01,
            200,
        );
        let avg = monte_carlo(&cfg, &family(20.0), 77, 1).unwrap();
        let one = run_trial(&cfg, &family(20.0), trial_seed(77, 0)).unwrap();
        assert_eq!(avg.nwd, one.nwd);
        assert_eq!(avg.mae, one.mae());
        assert_eq!(avg.sq_error, one.sq_error);
        assert_eq!(avg.divergence_count, 0);
    }

    #[test]
    fn averaging_identical_trials_is_idempotent() {
        let cfg = config(UpdateRule::Vlms, 0.01, 100);
        let one = run_trial(&cfg, &family(20.0), 11).unwrap();
        let mut acc = Accumulator {
            nwd: Vec::new(),
            abs_error: Vec::new(),
            sq_error: Vec::new(),
            channels: Vec::new(),
            initial_errors: Vec::new(),
            diverged: 0,
        };
        acc.add(one.clone());
        acc.add(one.clone());
        let avg: Vec<f64> = acc.nwd.iter().map(|x| x * 0.5).collect();
        assert_eq!(avg, one.nwd);
    }

    #[test]
    fn monte_carlo_is_thread_count_independent() {
        let cfg = config(
            UpdateRule::QVlms(QParams::uniform(4.0, 9).unwrap()),
            0.01,
            150,
        );
        let fam = family(20.0);
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let a = serial.install(|| monte_carlo(&cfg, &fam, 3, 130).unwrap());
        let b = monte_carlo(&cfg, &fam, 3, 130).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_nwd_trends_down() {
        let cfg = config(
            UpdateRule::QVlms(QParams::uniform(5.0, 9).unwrap()),
            0.005,
            1000,
        );
        let avg = monte_carlo(&cfg, &family(20.0), 21, 100).unwrap();
        let smooth = window_means(&avg.nwd, 50);
        // Strictly decreasing until the curve meets its noise floor.
        let floor = *smooth.last().unwrap();
        for pair in smooth.windows(2) {
            if pair[0] > 2.0 * floor {
                assert!(pair[1] < pair[0]);
            }
        }
        assert!(smooth[0] > 10.0 * floor);
    }

    #[test]
    fn trial_channels_are_independent() {
        let cfg = config(UpdateRule::Vlms, 0.01, 1);
        let avg = monte_carlo(&cfg, &family(20.0), 5, 1000).unwrap();
        let a: Vec<f64> = avg.channels[..500].iter().map(|h| h[0]).collect();
        let b: Vec<f64> = avg.channels[500..].iter().map(|h| h[0]).collect();
        assert!(correlation_coefficient(&a, &b).unwrap().abs() < 0.1);
        let c: Vec<f64> = avg.initial_errors.iter().map(|e| e[4]).collect();
        let d: Vec<f64> = avg.channels.iter().map(|h| h[4]).collect();
        // h and h - w0 share h, so compare consecutive trials instead.
        let lagged = correlation_coefficient(&c[1..], &d[..999]).unwrap();
        assert!(lagged.abs() < 0.1);
    }
}
