//! Unit systems, physical constants, and the dimensionless correction factor
//! that feeds every corrected spectrum.
//!
//! Two unit systems are supported. `Si` uses CODATA 2018 constants. `Natural`
//! sets `hbar = c = k_B = 1` and measures energy in kelvin-equivalents
//! (an energy E is represented by E / k_B); masses are then rest energies in
//! the same unit, lengths are `hbar c / k_B` multiples, and frequencies are
//! kelvin-equivalents of `hbar omega`. Dimensionless outputs (efficiencies,
//! correction factors) must agree between the two systems for the same
//! physical situation.

use thiserror::Error;

/// Speed of light in vacuum, m/s (exact).
pub const C_SI: f64 = 299_792_458.0;
/// Planck constant, J s (exact).
pub const H_PLANCK_SI: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR_SI: f64 = H_PLANCK_SI / (2.0 * std::f64::consts::PI);
/// Boltzmann constant, J/K (exact).
pub const K_B_SI: f64 = 1.380_649e-23;
/// Electron mass, kg (CODATA 2018).
pub const ELECTRON_MASS_SI: f64 = 9.109_383_701_5e-31;
/// Planck mass, kg (CODATA 2018).
pub const PLANCK_MASS_SI: f64 = 2.176_434e-8;

/// Electron mass in natural units: rest energy in kelvin, m_e c^2 / k_B.
pub const ELECTRON_MASS_NATURAL: f64 = ELECTRON_MASS_SI * C_SI * C_SI / K_B_SI;
/// Planck mass in natural units: rest energy in kelvin, M_pl c^2 / k_B.
pub const PLANCK_MASS_NATURAL: f64 = PLANCK_MASS_SI * C_SI * C_SI / K_B_SI;

/// Deformation strengths above this trigger a validation warning; the
/// perturbative treatment is not trusted past it.
pub const ALPHA_SOFT_MAX: f64 = 1e41;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSystem {
    Si,
    Natural,
}

impl std::fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitSystem::Si => write!(f, "si"),
            UnitSystem::Natural => write!(f, "natural"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
}

/// Constants and deformation parameters for one computation.
///
/// `zeta` is stored explicitly. The constructors derive it as
/// `1 / (c * m_planck)`; [`PhysicalParams::with_zeta`] overrides it for
/// unit-scaling experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub units: UnitSystem,
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
    /// Particle mass (kg in SI, rest energy in kelvin in natural units).
    pub m: f64,
    pub m_planck: f64,
    /// Non-commutative deformation strength, dimensionless knob.
    pub alpha: f64,
    /// Inverse momentum scale entering the correction factor.
    pub zeta: f64,
}

impl PhysicalParams {
    /// SI setup with the electron as the default particle and `alpha = 0`.
    pub fn si() -> Self {
        PhysicalParams {
            units: UnitSystem::Si,
            hbar: HBAR_SI,
            c: C_SI,
            k_b: K_B_SI,
            m: ELECTRON_MASS_SI,
            m_planck: PLANCK_MASS_SI,
            alpha: 0.0,
            zeta: 1.0 / (C_SI * PLANCK_MASS_SI),
        }
    }

    /// Natural-unit setup (`hbar = c = k_B = 1`, kelvin energy unit) with a
    /// unit particle mass and `alpha = 0`.
    pub fn natural() -> Self {
        PhysicalParams {
            units: UnitSystem::Natural,
            hbar: 1.0,
            c: 1.0,
            k_b: 1.0,
            m: 1.0,
            m_planck: PLANCK_MASS_NATURAL,
            alpha: 0.0,
            zeta: 1.0 / PLANCK_MASS_NATURAL,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Replaces the particle mass. `zeta` is left untouched: it is a property
    /// of the background, not of the particle.
    pub fn with_mass(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    /// Overrides the derived `zeta = 1/(c * m_planck)`.
    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    /// Dimensionless deformation factor `g = alpha * zeta^2 * m^2 * c^2`.
    ///
    /// Linear in `alpha`, quadratic in each of `zeta`, `m`, `c`; zero iff
    /// `alpha = 0` (for finite positive inputs).
    pub fn correction_factor(&self) -> Result<f64, ParamsError> {
        for (name, value) in [
            ("alpha", self.alpha),
            ("zeta", self.zeta),
            ("m", self.m),
            ("c", self.c),
        ] {
            if !value.is_finite() {
                return Err(ParamsError::NonFinite { name, value });
            }
        }
        if self.alpha < 0.0 {
            return Err(ParamsError::Negative {
                name: "alpha",
                value: self.alpha,
            });
        }
        if self.zeta < 0.0 {
            return Err(ParamsError::Negative {
                name: "zeta",
                value: self.zeta,
            });
        }
        let g = self.alpha * self.zeta * self.zeta * self.m * self.m * self.c * self.c;
        if !g.is_finite() {
            return Err(ParamsError::NonFinite {
                name: "correction factor",
                value: g,
            });
        }
        Ok(g)
    }

    /// Structural validation. Hard failures are errors; `alpha` beyond the
    /// trusted range is only a warning, returned as human-readable strings.
    pub fn validate(&self) -> Result<Vec<String>, ParamsError> {
        for (name, value) in [
            ("hbar", self.hbar),
            ("c", self.c),
            ("k_B", self.k_b),
            ("m", self.m),
            ("m_planck", self.m_planck),
        ] {
            if !value.is_finite() {
                return Err(ParamsError::NonFinite { name, value });
            }
            if value <= 0.0 {
                return Err(ParamsError::NonPositive { name, value });
            }
        }
        self.correction_factor()?;
        let mut warnings = Vec::new();
        if self.alpha > ALPHA_SOFT_MAX {
            warnings.push(format!(
                "alpha = {:e} exceeds the trusted range [0, {:e}]; corrected spectra are extrapolations there",
                self.alpha, ALPHA_SOFT_MAX
            ));
        }
        Ok(warnings)
    }
}
