//! Canonical partition sums and thermodynamic potentials.
//!
//! Sums run ascending from the spectrum origin with compensated (Kahan)
//! accumulation, after shifting every energy by the ground level so the
//! largest Boltzmann weight is exactly 1. Three stopping rules apply, in
//! the order they are checked at each level:
//!
//! 1. turnover: the next energy fails to increase. Corrected spectra are
//!    perturbative and eventually bend down; levels past the bend are
//!    artifacts, never populated. If the last kept level still carries more
//!    than `turnover_weight_tolerance` of the accumulated weight the state
//!    is outside the expansion's validity and the sum is refused (unless
//!    `respect_turnover` is off, which downgrades the refusal to a flag).
//! 2. convergence: the newest weight fell below `weight_epsilon` times the
//!    partial sum.
//! 3. `hard_cap`: absolute level budget, reported via `cap_hit`.
//!
//! Potentials are reported in shifted form where it matters numerically:
//! `ln_z` and `f` are exact even when the unshifted `z` would underflow to
//! zero (deep SI wells at low temperature do this).

use crate::spectra::{Level, Medium, SpectrumError, SpectrumModel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatmechError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("Boltzmann constant must be positive and finite, got {0}")]
    BadConstant(f64),
    #[error("invalid truncation policy: {0}")]
    BadPolicy(String),
    #[error("empty level table")]
    EmptyTable,
    #[error("non-finite energy {energy} at level {n}")]
    NonFiniteEnergy { n: u64, energy: f64 },
    #[error("strict printed-sign well spectrum is unbounded below; its canonical sum diverges")]
    StrictSignDivergent,
    #[error(
        "spectrum turns over at n = {cutoff} while that level still carries weight fraction \
         {last_weight_fraction:.3e} of the sum at T = {temperature}; the corrected spectrum is \
         outside its perturbative regime here (p/mc at cutoff: {})",
        .momentum_ratio.map_or_else(|| "unavailable".to_string(), |r| format!("{r:.3}"))
    )]
    PerturbativeRegimeViolation {
        temperature: f64,
        cutoff: u64,
        last_weight_fraction: f64,
        momentum_ratio: Option<f64>,
    },
    #[error("finite-difference relative step {0} outside [1e-8, 1e-2]")]
    BadStepSize(f64),
}

/// Stopping rules for level sums. Defaults: converge at 1e-16 relative
/// weight, cap at 1e6 levels, refuse turnovers whose last level holds more
/// than 1e-6 of the weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub weight_epsilon: f64,
    pub hard_cap: u64,
    pub respect_turnover: bool,
    pub turnover_weight_tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            weight_epsilon: 1e-16,
            hard_cap: 1_000_000,
            respect_turnover: true,
            turnover_weight_tolerance: 1e-6,
        }
    }
}

impl TruncationPolicy {
    fn check(&self) -> Result<(), StatmechError> {
        if !self.weight_epsilon.is_finite()
            || self.weight_epsilon < 0.0
            || self.weight_epsilon >= 1.0
        {
            return Err(StatmechError::BadPolicy(format!(
                "weight_epsilon must be in [0, 1), got {}",
                self.weight_epsilon
            )));
        }
        if self.hard_cap == 0 {
            return Err(StatmechError::BadPolicy(
                "hard_cap must be at least 1".into(),
            ));
        }
        if !self.turnover_weight_tolerance.is_finite()
            || self.turnover_weight_tolerance < 0.0
            || self.turnover_weight_tolerance > 1.0
        {
            return Err(StatmechError::BadPolicy(format!(
                "turnover_weight_tolerance must be in [0, 1], got {}",
                self.turnover_weight_tolerance
            )));
        }
        Ok(())
    }
}

/// Output of a partition sum at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionResult {
    /// Unshifted partition function. May underflow to 0 or overflow when
    /// `beta * ground_energy` is extreme; `ln_z` stays exact.
    pub z: f64,
    /// Ground-shifted partition function, sum of exp(-beta (E - E_0)); at
    /// least 1 by construction.
    pub z_shifted: f64,
    /// ln of the unshifted partition function, computed without forming it.
    pub ln_z: f64,
    /// Mean energy U.
    pub u: f64,
    /// Helmholtz free energy F = -k_B T ln Z.
    pub f: f64,
    pub temperature: f64,
    pub ground_energy: f64,
    /// Highest level index included.
    pub n_used: u64,
    pub levels_summed: u64,
    /// Weight fraction of the deepest included level. Of the order of the
    /// omitted tail after clean convergence; a lower bound on it when the
    /// sum stopped at a turnover or the cap.
    pub tail_weight_estimate: f64,
    pub turnover_hit: bool,
    pub cap_hit: bool,
    /// Diagnostic p/(mc) at the cutoff level, set when the sum stopped at a
    /// turnover or the cap.
    pub momentum_ratio_at_cutoff: Option<f64>,
}

#[derive(Clone, Copy, Default)]
struct KahanSum {
    s: f64,
    c: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s
    }
}

fn check_temperature(temperature: f64) -> Result<(), StatmechError> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(StatmechError::BadTemperature(temperature));
    }
    Ok(())
}

/// Canonical sum over a spectrum model at `temperature` (same temperature
/// scale as the model's `k_b`: kelvin in both unit systems shipped here).
pub fn partition_sum(
    model: &SpectrumModel,
    temperature: f64,
    policy: &TruncationPolicy,
) -> Result<PartitionResult, StatmechError> {
    check_temperature(temperature)?;
    policy.check()?;
    if model.strict_printed_sign && matches!(model.medium, Medium::Well | Medium::DoubleWell) {
        return Err(StatmechError::StrictSignDivergent);
    }
    let compiled = model.compile()?;
    let beta = 1.0 / (model.params.k_b * temperature);
    let origin = model.origin();
    let e0 = compiled.level(origin).energy;
    if !e0.is_finite() {
        return Err(StatmechError::NonFiniteEnergy {
            n: origin,
            energy: e0,
        });
    }

    let mut z = KahanSum::default();
    let mut weighted_de = KahanSum::default();
    let mut n = origin;
    let mut prev_energy = f64::NEG_INFINITY;
    let mut last_term = 0.0;
    let mut turnover_hit = false;
    let mut cap_hit = false;

    // Loop invariant: `n` is the next candidate level; on exit it is the
    // first index NOT included in the sum.
    loop {
        let level = compiled.level(n);
        if !level.energy.is_finite() {
            return Err(StatmechError::NonFiniteEnergy {
                n,
                energy: level.energy,
            });
        }
        if n > origin && level.energy <= prev_energy {
            turnover_hit = true;
            break;
        }
        let de = level.energy - e0;
        let term = level.degeneracy as f64 * (-beta * de).exp();
        z.add(term);
        weighted_de.add(term * de);
        last_term = term;
        if n > origin && term <= policy.weight_epsilon * z.value() {
            n += 1;
            break;
        }
        if n >= policy.hard_cap {
            cap_hit = true;
            n += 1;
            break;
        }
        prev_energy = level.energy;
        n += 1;
    }

    let n_used = n - 1;
    let z_shifted = z.value();
    let last_fraction = last_term / z_shifted;

    if turnover_hit && policy.respect_turnover && last_fraction > policy.turnover_weight_tolerance {
        return Err(StatmechError::PerturbativeRegimeViolation {
            temperature,
            cutoff: n_used,
            last_weight_fraction: last_fraction,
            momentum_ratio: model.momentum_ratio(n_used).ok(),
        });
    }

    let ln_z = z_shifted.ln() - beta * e0;
    Ok(PartitionResult {
        z: z_shifted * (-beta * e0).exp(),
        z_shifted,
        ln_z,
        u: e0 + weighted_de.value() / z_shifted,
        f: e0 - model.params.k_b * temperature * z_shifted.ln(),
        temperature,
        ground_energy: e0,
        n_used,
        levels_summed: n_used - origin + 1,
        tail_weight_estimate: last_fraction,
        turnover_hit,
        cap_hit,
        momentum_ratio_at_cutoff: if turnover_hit || cap_hit {
            model.momentum_ratio(n_used).ok()
        } else {
            None
        },
    })
}

/// Canonical sum over an explicit finite level table (no truncation: the
/// whole table is the system). The ground shift uses the table minimum, so
/// order does not matter.
pub fn partition_sum_table(
    levels: &[Level],
    temperature: f64,
    k_b: f64,
) -> Result<PartitionResult, StatmechError> {
    check_temperature(temperature)?;
    if !k_b.is_finite() || k_b <= 0.0 {
        return Err(StatmechError::BadConstant(k_b));
    }
    if levels.is_empty() {
        return Err(StatmechError::EmptyTable);
    }
    let mut e0 = f64::INFINITY;
    for level in levels {
        if !level.energy.is_finite() {
            return Err(StatmechError::NonFiniteEnergy {
                n: level.n,
                energy: level.energy,
            });
        }
        e0 = e0.min(level.energy);
    }
    let beta = 1.0 / (k_b * temperature);
    let mut z = KahanSum::default();
    let mut weighted_de = KahanSum::default();
    for level in levels {
        let de = level.energy - e0;
        let term = level.degeneracy as f64 * (-beta * de).exp();
        z.add(term);
        weighted_de.add(term * de);
    }
    let z_shifted = z.value();
    Ok(PartitionResult {
        z: z_shifted * (-beta * e0).exp(),
        z_shifted,
        ln_z: z_shifted.ln() - beta * e0,
        u: e0 + weighted_de.value() / z_shifted,
        f: e0 - k_b * temperature * z_shifted.ln(),
        temperature,
        ground_energy: e0,
        n_used: levels.iter().map(|l| l.n).max().unwrap_or(0),
        levels_summed: levels.len() as u64,
        tail_weight_estimate: 0.0,
        turnover_hit: false,
        cap_hit: false,
        momentum_ratio_at_cutoff: None,
    })
}

/// Independent route to the mean energy: central difference of ln Z in
/// beta, with relative step `rel_step` in [1e-8, 1e-2]. Used to cross-check
/// the accumulated `u`.
pub fn internal_energy_fd(
    model: &SpectrumModel,
    temperature: f64,
    policy: &TruncationPolicy,
    rel_step: f64,
) -> Result<f64, StatmechError> {
    if !rel_step.is_finite() || !(1e-8..=1e-2).contains(&rel_step) {
        return Err(StatmechError::BadStepSize(rel_step));
    }
    check_temperature(temperature)?;
    let k_b = model.params.k_b;
    let beta = 1.0 / (k_b * temperature);
    let beta_hi = beta * (1.0 + rel_step);
    let beta_lo = beta * (1.0 - rel_step);
    let ln_z_at_beta_hi = partition_sum(model, 1.0 / (k_b * beta_hi), policy)?.ln_z;
    let ln_z_at_beta_lo = partition_sum(model, 1.0 / (k_b * beta_lo), policy)?.ln_z;
    Ok(-(ln_z_at_beta_hi - ln_z_at_beta_lo) / (beta_hi - beta_lo))
}
