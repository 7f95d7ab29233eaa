//! Loss-budget arithmetic for the post-selected protocols: closed-form
//! success probability, expected time to the first heralded success, and a
//! seeded Monte Carlo cross-check.
//!
//! Losses enter as independent multiplicative efficiency factors; detector
//! dark counts are folded into one such factor rather than modeled as false
//! heralds. Attempts are independent Bernoulli trials fired at the photon
//! source rate, with photon travel time neglected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EfficiencyError {
    #[error("{name} must lie in {range} (got {value})")]
    OutOfRange { name: &'static str, range: &'static str, value: f64 },
    #[error("n_atoms must be >= 1 (got {0})")]
    NoAtoms(usize),
    #[error("success probability underflowed to zero")]
    ZeroProbability,
    #[error("n_trials must be >= 1 (got {0})")]
    NoTrials(u64),
}

/// Per-run inefficiency factors and the photon source rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget {
    /// Probability that a given atom decays during one attempt (e.g.
    /// `gamma / g`); enters once per atom.
    pub atom_decay_fraction: f64,
    /// Number of atoms the photon visits.
    pub n_atoms: usize,
    /// Detector efficiency factor left after discarding dark counts.
    pub detector_factor: f64,
    /// Fiber absorption plus mirror scattering, as one fraction.
    pub optical_loss_fraction: f64,
    /// Single-photon source rate, attempts per second.
    pub photon_rate: f64,
}

impl LossBudget {
    pub fn new(
        atom_decay_fraction: f64,
        n_atoms: usize,
        detector_factor: f64,
        optical_loss_fraction: f64,
        photon_rate: f64,
    ) -> Result<Self, EfficiencyError> {
        let budget = Self {
            atom_decay_fraction,
            n_atoms,
            detector_factor,
            optical_loss_fraction,
            photon_rate,
        };
        budget.validate()?;
        Ok(budget)
    }

    /// The published reference budget: 2% atomic decay per atom for two
    /// atoms, a 1e-4 detector factor, 6% optical loss, 1e4 photons/s.
    pub fn reference() -> Self {
        Self {
            atom_decay_fraction: 0.02,
            n_atoms: 2,
            detector_factor: 1e-4,
            optical_loss_fraction: 0.06,
            photon_rate: 1e4,
        }
    }

    pub fn validate(&self) -> Result<(), EfficiencyError> {
        let in_range =
            |name, range, value: f64, lo_open: bool, lo: f64, hi_closed: bool, hi: f64| {
                let lo_ok = if lo_open { value > lo } else { value >= lo };
                let hi_ok = if hi_closed { value <= hi } else { value < hi };
                if value.is_finite() && lo_ok && hi_ok {
                    Ok(())
                } else {
                    Err(EfficiencyError::OutOfRange { name, range, value })
                }
            };
        in_range(
            "atom_decay_fraction",
            "[0, 1)",
            self.atom_decay_fraction,
            false,
            0.0,
            false,
            1.0,
        )?;
        in_range("detector_factor", "(0, 1]", self.detector_factor, true, 0.0, true, 1.0)?;
        in_range(
            "optical_loss_fraction",
            "[0, 1)",
            self.optical_loss_fraction,
            false,
            0.0,
            false,
            1.0,
        )?;
        if self.n_atoms < 1 {
            return Err(EfficiencyError::NoAtoms(self.n_atoms));
        }
        if !self.photon_rate.is_finite() || self.photon_rate <= 0.0 {
            return Err(EfficiencyError::OutOfRange {
                name: "photon_rate",
                range: "(0, inf)",
                value: self.photon_rate,
            });
        }
        Ok(())
    }
}

/// Success statistics, closed-form and (optionally) Monte Carlo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessStats {
    pub p_success: f64,
    pub expected_attempts: f64,
    pub expected_time_s: f64,
    pub mc_mean_s: Option<f64>,
    pub mc_stddev_s: Option<f64>,
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
}

/// Per-attempt heralded success probability:
/// `(1 - atom_decay)^n_atoms * detector_factor * (1 - optical_loss)`.
pub fn success_probability(budget: &LossBudget) -> Result<f64, EfficiencyError> {
    budget.validate()?;
    let p = (1.0 - budget.atom_decay_fraction).powi(budget.n_atoms as i32)
        * budget.detector_factor
        * (1.0 - budget.optical_loss_fraction);
    if p <= 0.0 {
        return Err(EfficiencyError::ZeroProbability);
    }
    Ok(p)
}

/// Expected seconds until the first success: `1 / (rate * p)`.
pub fn expected_time(budget: &LossBudget) -> Result<f64, EfficiencyError> {
    let p = success_probability(budget)?;
    Ok(1.0 / (budget.photon_rate * p))
}

/// Closed-form statistics without a Monte Carlo run.
pub fn closed_form_stats(budget: &LossBudget) -> Result<SuccessStats, EfficiencyError> {
    let p = success_probability(budget)?;
    let expected_attempts = 1.0 / p;
    Ok(SuccessStats {
        p_success: p,
        expected_attempts,
        expected_time_s: expected_attempts / budget.photon_rate,
        mc_mean_s: None,
        mc_stddev_s: None,
        n_trials: None,
        seed: None,
    })
}

/// Simulate `n_trials` runs, each drawing a geometric number of attempts at
/// success probability `p` and costing `1/photon_rate` seconds per attempt.
/// Returns the sample mean and sample standard deviation of the
/// time-to-success; bit-identical for identical `(budget, seed, n_trials)`.
pub fn monte_carlo_time(
    budget: &LossBudget,
    seed: u64,
    n_trials: u64,
) -> Result<SuccessStats, EfficiencyError> {
    if n_trials < 1 {
        return Err(EfficiencyError::NoTrials(n_trials));
    }
    let p = success_probability(budget)?;
    let dt = 1.0 / budget.photon_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // ln(1 - p) without cancellation for small p
    let log_q = (-p).ln_1p();
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..n_trials {
        let attempts = if p >= 1.0 {
            1.0
        } else {
            // inverse-CDF sample of the attempt count on {1, 2, ...}
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            (u.ln() / log_q).floor() + 1.0
        };
        let t = attempts * dt;
        sum += t;
        sum_sq += t * t;
    }
    let n = n_trials as f64;
    let mean = sum / n;
    let variance = if n_trials > 1 { ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0) } else { 0.0 };
    let expected_attempts = 1.0 / p;
    Ok(SuccessStats {
        p_success: p,
        expected_attempts,
        expected_time_s: expected_attempts / budget.photon_rate,
        mc_mean_s: Some(mean),
        mc_stddev_s: Some(variance.sqrt()),
        n_trials: Some(n_trials),
        seed: Some(seed),
    })
}
