use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::theory::{gaussian_autocorrelation, noise_variance_for_snr};
use crate::volterra::{flat_len, RegressorMode, VolterraKernel};

/// A fixed nonlinear channel `d(r) = h0 + hᵀu(r) + η(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    kernel: VolterraKernel,
    snr_db: f64,
    mode: RegressorMode,
    signal_power: f64,
    noise_variance: f64,
}

impl ChannelSpec {
    /// Noise power is set from the SNR relative to `hᵀRh`, the power of the
    /// noiseless output under white unit Gaussian input.
    pub fn new(kernel: VolterraKernel, snr_db: f64, mode: RegressorMode) -> Result<Self> {
        let r = gaussian_autocorrelation(kernel.memory_length(), mode)?;
        let h = DVector::from_vec(kernel.flatten());
        let signal_power = h.dot(&(&r * &h));
        if signal_power <= 0.0 {
            return Err(Error::domain("channel has zero output power"));
        }
        let noise_variance = noise_variance_for_snr(signal_power, snr_db)?;
        Ok(Self {
            kernel,
            snr_db,
            mode,
            signal_power,
            noise_variance,
        })
    }

    pub fn kernel(&self) -> &VolterraKernel {
        &self.kernel
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn mode(&self) -> RegressorMode {
        self.mode
    }

    pub fn signal_power(&self) -> f64 {
        self.signal_power
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance.sqrt()
    }
}

/// Random channels of a given shape: i.i.d. unit Gaussian coefficients
/// normalized to `‖h‖ = 1`, zero bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelFamily {
    pub memory_length: usize,
    pub snr_db: f64,
    pub mode: RegressorMode,
}

impl ChannelFamily {
    pub fn new(memory_length: usize, snr_db: f64, mode: RegressorMode) -> Result<Self> {
        if memory_length == 0 {
            return Err(Error::domain("memory length must be at least 1"));
        }
        if snr_db.is_nan() {
            return Err(Error::domain("SNR is NaN"));
        }
        Ok(Self {
            memory_length,
            snr_db,
            mode,
        })
    }

    pub fn flat_len(&self) -> usize {
        flat_len(self.memory_length)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelSpec> {
        let mut h: Vec<f64> = (0..self.flat_len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("drew an all-zero channel"));
        }
        h.iter_mut().for_each(|x| *x /= norm);
        let kernel = VolterraKernel::from_flat(self.memory_length, 0.0, &h)?;
        ChannelSpec::new(kernel, self.snr_db, self.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::to_db;
    use crate::volterra::expand_into;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn drawn_channels_are_unit_norm() {
        let fam = ChannelFamily::new(3, 20.0, RegressorMode::Orthonormalized).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let ch = fam.draw(&mut rng).unwrap();
            let n: f64 = ch.kernel().flatten().iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
            assert!((ch.signal_power() - 1.0).abs() < 1e-12);
            assert!((ch.noise_variance() - 0.01).abs() < 1e-15);
            assert_eq!(ch.kernel().bias(), 0.0);
        }
    }

    #[test]
    fn infinite_snr_is_noiseless() {
        let fam = ChannelFamily::new(2, f64::INFINITY, RegressorMode::Raw).unwrap();
        let ch = fam.draw(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(ch.noise_variance(), 0.0);
        assert!(ChannelFamily::new(0, 10.0, RegressorMode::Raw).is_err());
        assert!(ChannelFamily::new(2, f64::NAN, RegressorMode::Raw).is_err());
    }

    #[test]
    fn empirical_snr_matches_configuration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for mode in [RegressorMode::Orthonormalized, RegressorMode::Raw] {
            for snr in [10.0, 20.0, 30.0] {
                let fam = ChannelFamily::new(3, snr, mode).unwrap();
                let ch = fam.draw(&mut rng).unwrap();
                let h = ch.kernel().flatten();
                let mut window = vec![0.0; 3];
                let mut u = vec![0.0; 9];
                let (mut ps, mut pn) = (0.0, 0.0);
                let n = 1_000_000;
                for _ in 0..n {
                    window.rotate_right(1);
                    window[0] = rng.sample(StandardNormal);
                    expand_into(&window, mode, &mut u).unwrap();
                    let s: f64 = h.iter().zip(&u).map(|(a, b)| a * b).sum();
                    let eta = ch.noise_std() * rng.sample::<f64, _>(StandardNormal);
                    ps += s * s;
                    pn += eta * eta;
                }
                let measured = to_db(ps / pn);
                assert!((measured - snr).abs() < 0.2, "{mode} {snr}: {measured}");
            }
        }
    }
}
