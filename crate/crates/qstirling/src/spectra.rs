//! Energy level tables for the three working media.
//!
//! * `Well`: particle in a 1-D infinite well of full width `l0`, levels
//!   indexed from n = 1.
//! * `DoubleWell`: the same well with an impenetrable barrier at the
//!   midpoint. Its levels are exactly the even levels of the parent well,
//!   each with degeneracy 2 (left/right symmetric and antisymmetric pairs
//!   collapse onto the parent's even eigenvalues).
//! * `Oscillator`: harmonic oscillator of frequency `omega`, levels from
//!   n = 0.
//!
//! With both correction flags off the tables are the textbook spectra. The
//! `ncgup` flag turns on the non-commutative/GUP deformation through the
//! dimensionless factor `g` of [`PhysicalParams::correction_factor`]; the
//! `relativistic` flag adds the first relativistic correction, which is
//! negative and quartic in the level index for the well and negative and
//! quadratic for the oscillator. A corrected spectrum therefore turns over
//! at a finite index: [`turnover_cutoff`] locates the last index up to which
//! the table is strictly increasing. Beyond that point the perturbative
//! expansion has left its domain of validity; the statistical layer refuses
//! to thermally populate such levels unless told otherwise.
//!
//! Well energies (`g` gated by `ncgup`, the quartic term by `relativistic`):
//!
//! ```text
//! E_n = (n^2 hbar^2 pi^2 / (2 m L^2)) (1 + (3/2) g)  -  hbar^4 (n pi / L)^4 / (8 m^3 c^2)
//! ```
//!
//! `L` is the physical width: `l0 (1 + g)` by default, bare `l0` when
//! `use_physical_length` is off. Oscillator energies:
//!
//! ```text
//! E_n = hbar omega (n + 1/2) (1 - g/2)  -  (hbar^2 omega^2 / (32 m c^2)) (1 - 4 g) (5 n (n + 1) + 3)
//! ```

use crate::params::{ParamsError, PhysicalParams};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("well width must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("oscillator frequency must be positive and finite, got {0}")]
    BadFrequency(f64),
    #[error("energy offset must be finite, got {0}")]
    BadOffset(f64),
    #[error("quantum number {n} is below the first level {origin} of this medium")]
    BelowOrigin { n: u64, origin: u64 },
}

/// Which correction terms enter the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Corrections {
    pub relativistic: bool,
    pub ncgup: bool,
}

impl Corrections {
    pub const TEXTBOOK: Corrections = Corrections {
        relativistic: false,
        ncgup: false,
    };
    pub const RELATIVISTIC: Corrections = Corrections {
        relativistic: true,
        ncgup: false,
    };
    pub const NCGUP_FULL: Corrections = Corrections {
        relativistic: true,
        ncgup: true,
    };
    /// Deformation only. Used where the temperature is not small against the
    /// particle rest energy, so the relativistic expansion term would be
    /// meaningless while the deformation factor is still well defined.
    pub const NCGUP_ONLY: Corrections = Corrections {
        relativistic: false,
        ncgup: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellGeometry {
    /// Coordinate (bare) full width of the well.
    pub l0: f64,
    /// Use the deformation-rescaled width `l0 (1 + g)` in the spectrum.
    pub use_physical_length: bool,
}

impl WellGeometry {
    pub fn new(l0: f64) -> Self {
        WellGeometry {
            l0,
            use_physical_length: true,
        }
    }

    pub fn with_bare_length(mut self) -> Self {
        self.use_physical_length = false;
        self
    }

    /// Width actually entering the spectrum, given the active corrections.
    pub fn effective_length(
        &self,
        params: &PhysicalParams,
        corrections: Corrections,
    ) -> Result<f64, SpectrumError> {
        if !self.l0.is_finite() || self.l0 <= 0.0 {
            return Err(SpectrumError::BadLength(self.l0));
        }
        let g = gated_factor(params, corrections)?;
        Ok(if self.use_physical_length {
            self.l0 * (1.0 + g)
        } else {
            self.l0
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorGeometry {
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Medium {
    Well,
    DoubleWell,
    Oscillator,
}

impl std::fmt::Display for Medium {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Medium::Well => write!(f, "well"),
            Medium::DoubleWell => write!(f, "double-well"),
            Medium::Oscillator => write!(f, "oscillator"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Well(WellGeometry),
    Oscillator(OscillatorGeometry),
}

/// One energy level: index, energy, degeneracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub n: u64,
    pub energy: f64,
    pub degeneracy: u32,
}

/// A medium with its geometry, corrections, and physical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    pub medium: Medium,
    pub corrections: Corrections,
    pub geometry: Geometry,
    pub params: PhysicalParams,
    /// Uniform shift added to every level. Heats and efficiencies are
    /// invariant under it; kept as an explicit diagnostic/testing knob.
    pub energy_offset: f64,
    /// Reproduce the sign convention some derivations print for the well
    /// (negative leading term). Level tables only: the statistical layer
    /// rejects such spectra because their canonical sums diverge.
    pub strict_printed_sign: bool,
}

impl SpectrumModel {
    pub fn well(
        geometry: WellGeometry,
        params: PhysicalParams,
        corrections: Corrections,
    ) -> Result<Self, SpectrumError> {
        let model = SpectrumModel {
            medium: Medium::Well,
            corrections,
            geometry: Geometry::Well(geometry),
            params,
            energy_offset: 0.0,
            strict_printed_sign: false,
        };
        model.compile().map(|_| model)
    }

    pub fn double_well(
        parent: WellGeometry,
        params: PhysicalParams,
        corrections: Corrections,
    ) -> Result<Self, SpectrumError> {
        let model = SpectrumModel {
            medium: Medium::DoubleWell,
            corrections,
            geometry: Geometry::Well(parent),
            params,
            energy_offset: 0.0,
            strict_printed_sign: false,
        };
        model.compile().map(|_| model)
    }

    pub fn oscillator(
        geometry: OscillatorGeometry,
        params: PhysicalParams,
        corrections: Corrections,
    ) -> Result<Self, SpectrumError> {
        let model = SpectrumModel {
            medium: Medium::Oscillator,
            corrections,
            geometry: Geometry::Oscillator(geometry),
            params,
            energy_offset: 0.0,
            strict_printed_sign: false,
        };
        model.compile().map(|_| model)
    }

    pub fn with_energy_offset(mut self, offset: f64) -> Self {
        self.energy_offset = offset;
        self
    }

    pub fn with_strict_printed_sign(mut self) -> Self {
        self.strict_printed_sign = true;
        self
    }

    /// First level index of the medium: 1 for wells, 0 for the oscillator.
    pub fn origin(&self) -> u64 {
        match self.medium {
            Medium::Well | Medium::DoubleWell => 1,
            Medium::Oscillator => 0,
        }
    }

    pub fn level(&self, n: u64) -> Result<Level, SpectrumError> {
        let origin = self.origin();
        if n < origin {
            return Err(SpectrumError::BelowOrigin { n, origin });
        }
        Ok(self.compile()?.level(n))
    }

    /// Levels from the origin through `n_max` inclusive.
    pub fn levels_up_to(&self, n_max: u64) -> Result<Vec<Level>, SpectrumError> {
        let compiled = self.compile()?;
        Ok((self.origin()..=n_max.max(self.origin()))
            .map(|n| compiled.level(n))
            .collect())
    }

    /// Characteristic momentum of level `n` over `m c`. Values approaching 1
    /// mean the relativistic expansion no longer applies at that level.
    pub fn momentum_ratio(&self, n: u64) -> Result<f64, SpectrumError> {
        let origin = self.origin();
        if n < origin {
            return Err(SpectrumError::BelowOrigin { n, origin });
        }
        let p = &self.params;
        match (&self.geometry, self.medium) {
            (Geometry::Well(w), medium) => {
                let l = w.effective_length(p, self.corrections)?;
                let n_eff = if medium == Medium::DoubleWell {
                    2 * n
                } else {
                    n
                };
                Ok(n_eff as f64 * PI * p.hbar / (l * p.m * p.c))
            }
            (Geometry::Oscillator(o), _) => {
                let rest = p.m * p.c * p.c;
                Ok((2.0 * p.hbar * o.omega * (n as f64 + 0.5) / rest).sqrt())
            }
        }
    }

    pub(crate) fn compile(&self) -> Result<CompiledSpectrum, SpectrumError> {
        if !self.energy_offset.is_finite() {
            return Err(SpectrumError::BadOffset(self.energy_offset));
        }
        let p = &self.params;
        p.validate()?;
        match (&self.geometry, self.medium) {
            (Geometry::Well(w), medium) => {
                let coeffs = WellCoeffs::build(w, p, self.corrections, self.strict_printed_sign)?;
                Ok(CompiledSpectrum {
                    kind: CompiledKind::Well {
                        coeffs,
                        doubled: medium == Medium::DoubleWell,
                    },
                    offset: self.energy_offset,
                })
            }
            (Geometry::Oscillator(o), _) => {
                if !o.omega.is_finite() || o.omega <= 0.0 {
                    return Err(SpectrumError::BadFrequency(o.omega));
                }
                let g = gated_factor(p, self.corrections)?;
                let lin = p.hbar * o.omega * (1.0 - 0.5 * g);
                let quad = if self.corrections.relativistic {
                    p.hbar * p.hbar * o.omega * o.omega * (1.0 - 4.0 * g) / (32.0 * p.m * p.c * p.c)
                } else {
                    0.0
                };
                Ok(CompiledSpectrum {
                    kind: CompiledKind::Oscillator { lin, quad },
                    offset: self.energy_offset,
                })
            }
        }
    }
}

fn gated_factor(params: &PhysicalParams, corrections: Corrections) -> Result<f64, ParamsError> {
    if corrections.ncgup {
        params.correction_factor()
    } else {
        Ok(0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct WellCoeffs {
    /// Coefficient of n^2; negative under the strict printed-sign mode.
    quad: f64,
    /// Coefficient of n^4 (subtracted); zero with relativistic off.
    quart: f64,
}

impl WellCoeffs {
    fn build(
        w: &WellGeometry,
        p: &PhysicalParams,
        corrections: Corrections,
        strict_sign: bool,
    ) -> Result<Self, SpectrumError> {
        let g = gated_factor(p, corrections)?;
        let l = w.effective_length(p, corrections)?;
        let quad = p.hbar * p.hbar * PI * PI * (1.0 + 1.5 * g) / (2.0 * p.m * l * l);
        let quart = if corrections.relativistic {
            let k = PI / l;
            p.hbar.powi(4) * k.powi(4) / (8.0 * p.m.powi(3) * p.c * p.c)
        } else {
            0.0
        };
        Ok(WellCoeffs {
            quad: if strict_sign { -quad } else { quad },
            quart,
        })
    }

    fn energy(&self, n: u64) -> f64 {
        let n2 = (n as f64) * (n as f64);
        self.quad * n2 - self.quart * (n2 * n2)
    }
}

#[derive(Debug, Clone, Copy)]
enum CompiledKind {
    Well { coeffs: WellCoeffs, doubled: bool },
    Oscillator { lin: f64, quad: f64 },
}

/// Validated, constant-folded level evaluator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CompiledSpectrum {
    kind: CompiledKind,
    offset: f64,
}

impl CompiledSpectrum {
    pub(crate) fn level(&self, n: u64) -> Level {
        match self.kind {
            CompiledKind::Well { coeffs, doubled } => {
                if doubled {
                    // Identity with the parent well: same evaluator at index
                    // 2n, degeneracy 2.
                    Level {
                        n,
                        energy: coeffs.energy(2 * n) + self.offset,
                        degeneracy: 2,
                    }
                } else {
                    Level {
                        n,
                        energy: coeffs.energy(n) + self.offset,
                        degeneracy: 1,
                    }
                }
            }
            CompiledKind::Oscillator { lin, quad } => {
                let nf = n as f64;
                Level {
                    n,
                    energy: lin * (nf + 0.5) - quad * (5.0 * nf * (nf + 1.0) + 3.0) + self.offset,
                    degeneracy: 1,
                }
            }
        }
    }
}

/// Energy of well level `n >= 1`.
pub fn energy_well(
    n: u64,
    geometry: &WellGeometry,
    params: &PhysicalParams,
    corrections: Corrections,
) -> Result<f64, SpectrumError> {
    if n < 1 {
        return Err(SpectrumError::BelowOrigin { n, origin: 1 });
    }
    let coeffs = WellCoeffs::build(geometry, params, corrections, false)?;
    Ok(coeffs.energy(n))
}

/// Level `n >= 1` of the barrier-inserted well built over `parent`: the
/// parent's even level `2n` with degeneracy 2, bit for bit.
pub fn energy_double_well(
    n: u64,
    parent: &WellGeometry,
    params: &PhysicalParams,
    corrections: Corrections,
) -> Result<Level, SpectrumError> {
    if n < 1 {
        return Err(SpectrumError::BelowOrigin { n, origin: 1 });
    }
    Ok(Level {
        n,
        energy: energy_well(2 * n, parent, params, corrections)?,
        degeneracy: 2,
    })
}

/// Energy of oscillator level `n >= 0`.
pub fn energy_oscillator(
    n: u64,
    geometry: &OscillatorGeometry,
    params: &PhysicalParams,
    corrections: Corrections,
) -> Result<f64, SpectrumError> {
    let model = SpectrumModel::oscillator(*geometry, *params, corrections)?;
    Ok(model.compile()?.level(n).energy)
}

/// Last index up to which the spectrum is strictly increasing, scanning
/// linearly from the origin; `hard_cap` if no turnover is found below it.
pub fn turnover_cutoff(model: &SpectrumModel, hard_cap: u64) -> Result<u64, SpectrumError> {
    let compiled = model.compile()?;
    let mut n = model.origin();
    let mut e = compiled.level(n).energy;
    while n < hard_cap {
        let e_next = compiled.level(n + 1).energy;
        if e_next <= e {
            return Ok(n);
        }
        e = e_next;
        n += 1;
    }
    Ok(hard_cap)
}
