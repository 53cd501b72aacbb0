//! Four-stroke Stirling cycle over two spectra and two temperatures.
//!
//! Corners: A = starting spectrum at `t_hot`, B = ending spectrum at
//! `t_hot` (the spectrum change is the isothermal "expansion"), C = ending
//! spectrum at `t_cold`, D = starting spectrum at `t_cold`. For the well
//! medium the spectrum change is inserting the midpoint barrier; for the
//! oscillator it is lowering the frequency.
//!
//! Heats are signed absorbed-positive:
//!
//! * isothermal legs: Q = dU - dF, which equals T dS at fixed temperature;
//! * isochoric legs: Q = dU (the spectrum is frozen, no work is done).
//!
//! Net work is the sum of the four heats (first law around a closed loop).
//! Efficiency follows the heat-engine convention eta = W / Q_in with
//! Q_in = Q_DA + Q_AB, the legs that absorb heat in the engine regime.
//! When the cycle is not an engine in that sense (equal temperatures, or
//! Q_in <= 0 as in a temperature-reversed run) the efficiency is reported
//! as `None` rather than as a misleading ratio.

use crate::params::PhysicalParams;
use crate::spectra::{Corrections, Medium, OscillatorGeometry, SpectrumModel, WellGeometry};
use crate::statmech::{partition_sum, PartitionResult, StatmechError, TruncationPolicy};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CycleError {
    #[error(transparent)]
    Statmech(#[from] StatmechError),
    #[error("cycle temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("cycle endpoints use different physical parameters")]
    MismatchedParams,
    #[error("cycle endpoints use different correction settings")]
    MismatchedCorrections,
    #[error("cycle cannot connect a {start} spectrum to a {end} spectrum")]
    MismatchedMedia { start: Medium, end: Medium },
    #[error("isothermal heat requires equal temperatures, got {from} and {to}")]
    TemperatureMismatch { from: f64, to: f64 },
}

/// Heat absorbed along an isothermal spectrum change, dU - dF. The two
/// states must come from partition sums at the bit-identical temperature.
pub fn heat_isothermal(from: &PartitionResult, to: &PartitionResult) -> Result<f64, CycleError> {
    if from.temperature.to_bits() != to.temperature.to_bits() {
        return Err(CycleError::TemperatureMismatch {
            from: from.temperature,
            to: to.temperature,
        });
    }
    Ok((to.u - from.u) - (to.f - from.f))
}

/// Heat absorbed along an isochoric temperature change of a frozen
/// spectrum: just dU.
pub fn heat_isochoric(from: &PartitionResult, to: &PartitionResult) -> f64 {
    to.u - from.u
}

/// What kind of thermodynamic device the four heats describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleRegime {
    /// Positive net work from positive heat input: a heat engine.
    Engine,
    /// Positive heat input but non-positive net work.
    WorkConsuming,
    /// Equal temperatures or non-positive heat input; the engine
    /// efficiency has no meaning here.
    Degenerate,
}

impl std::fmt::Display for CycleRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CycleRegime::Engine => write!(f, "engine"),
            CycleRegime::WorkConsuming => write!(f, "work-consuming"),
            CycleRegime::Degenerate => write!(f, "degenerate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StirlingCycleSpec {
    pub hot_start: SpectrumModel,
    pub hot_end: SpectrumModel,
    pub t_hot: f64,
    pub t_cold: f64,
    pub policy: TruncationPolicy,
}

impl StirlingCycleSpec {
    /// Pair two spectra into a cycle. The endpoints must share physical
    /// parameters and corrections and belong to the same medium family.
    pub fn from_models(
        hot_start: SpectrumModel,
        hot_end: SpectrumModel,
        t_hot: f64,
        t_cold: f64,
    ) -> Result<Self, CycleError> {
        for t in [t_hot, t_cold] {
            if !t.is_finite() || t <= 0.0 {
                return Err(CycleError::BadTemperature(t));
            }
        }
        if hot_start.params != hot_end.params {
            return Err(CycleError::MismatchedParams);
        }
        if hot_start.corrections != hot_end.corrections {
            return Err(CycleError::MismatchedCorrections);
        }
        let well_family = |m: Medium| matches!(m, Medium::Well | Medium::DoubleWell);
        let compatible = (well_family(hot_start.medium) && well_family(hot_end.medium))
            || (hot_start.medium == Medium::Oscillator && hot_end.medium == Medium::Oscillator);
        if !compatible {
            return Err(CycleError::MismatchedMedia {
                start: hot_start.medium,
                end: hot_end.medium,
            });
        }
        Ok(StirlingCycleSpec {
            hot_start,
            hot_end,
            t_hot,
            t_cold,
            policy: TruncationPolicy::default(),
        })
    }

    /// Well cycle: full well <-> midpoint-barrier well of the same width.
    pub fn well(
        geometry: WellGeometry,
        params: PhysicalParams,
        corrections: Corrections,
        t_hot: f64,
        t_cold: f64,
    ) -> Result<Self, CycleError> {
        let start =
            SpectrumModel::well(geometry, params, corrections).map_err(StatmechError::from)?;
        let end = SpectrumModel::double_well(geometry, params, corrections)
            .map_err(StatmechError::from)?;
        Self::from_models(start, end, t_hot, t_cold)
    }

    /// Oscillator cycle: frequency `omega_start` at the hot corner A,
    /// `omega_end` after the hot isothermal stroke.
    pub fn oscillator(
        omega_start: f64,
        omega_end: f64,
        params: PhysicalParams,
        corrections: Corrections,
        t_hot: f64,
        t_cold: f64,
    ) -> Result<Self, CycleError> {
        let start = SpectrumModel::oscillator(
            OscillatorGeometry { omega: omega_start },
            params,
            corrections,
        )
        .map_err(StatmechError::from)?;
        let end =
            SpectrumModel::oscillator(OscillatorGeometry { omega: omega_end }, params, corrections)
                .map_err(StatmechError::from)?;
        Self::from_models(start, end, t_hot, t_cold)
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }
}

/// The four heats, net work, and efficiency of one cycle, with the corner
/// thermodynamics kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleResult {
    /// Heat absorbed A -> B (isothermal at t_hot).
    pub q_ab: f64,
    /// Heat absorbed B -> C (isochoric cooling).
    pub q_bc: f64,
    /// Heat absorbed C -> D (isothermal at t_cold).
    pub q_cd: f64,
    /// Heat absorbed D -> A (isochoric heating).
    pub q_da: f64,
    /// Net work output, the sum of the four heats.
    pub work: f64,
    /// Q_DA + Q_AB, the nominal input legs.
    pub q_in: f64,
    /// W / Q_in when that ratio means something; None in the degenerate
    /// regime. Negative values (work-consuming cycles) are reported as-is.
    pub eta: Option<f64>,
    /// Carnot ceiling 1 - t_cold / t_hot for these temperatures.
    pub eta_carnot: f64,
    pub regime: CycleRegime,
    /// Corner states in A, B, C, D order.
    pub corners: [PartitionResult; 4],
}

impl CycleResult {
    /// True if any corner's level sum stopped at a spectrum turnover.
    pub fn any_turnover(&self) -> bool {
        self.corners.iter().any(|c| c.turnover_hit)
    }
}

pub fn run_cycle(spec: &StirlingCycleSpec) -> Result<CycleResult, CycleError> {
    let a = partition_sum(&spec.hot_start, spec.t_hot, &spec.policy)?;
    let b = partition_sum(&spec.hot_end, spec.t_hot, &spec.policy)?;
    let c = partition_sum(&spec.hot_end, spec.t_cold, &spec.policy)?;
    let d = partition_sum(&spec.hot_start, spec.t_cold, &spec.policy)?;

    let q_ab = heat_isothermal(&a, &b)?;
    let q_bc = heat_isochoric(&b, &c);
    let q_cd = heat_isothermal(&c, &d)?;
    let q_da = heat_isochoric(&d, &a);
    let work = q_ab + q_bc + q_cd + q_da;
    let q_in = q_da + q_ab;

    let (eta, regime) = if spec.t_hot.to_bits() == spec.t_cold.to_bits() || q_in <= 0.0 {
        (None, CycleRegime::Degenerate)
    } else if work > 0.0 {
        (Some(work / q_in), CycleRegime::Engine)
    } else {
        (Some(work / q_in), CycleRegime::WorkConsuming)
    };

    Ok(CycleResult {
        q_ab,
        q_bc,
        q_cd,
        q_da,
        work,
        q_in,
        eta,
        eta_carnot: 1.0 - spec.t_cold / spec.t_hot,
        regime,
        corners: [a, b, c, d],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{C_SI, ELECTRON_MASS_NATURAL, HBAR_SI, K_B_SI};

    fn textbook_oscillator_cycle() -> StirlingCycleSpec {
        StirlingCycleSpec::oscillator(
            4.0,
            3.0,
            PhysicalParams::natural(),
            Corrections::TEXTBOOK,
            2.0,
            1.0,
        )
        .unwrap()
    }

    fn textbook_well_cycle() -> StirlingCycleSpec {
        StirlingCycleSpec::well(
            WellGeometry::new(5.0),
            PhysicalParams::natural(),
            Corrections::TEXTBOOK,
            2.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn oscillator_cycle_frozen_values() {
        // omega 4 -> 3, T = 2 / 1, natural units. All eight numbers frozen
        // from a 40-digit oracle.
        let r = run_cycle(&textbook_oscillator_cycle()).unwrap();
        let close = |x: f64, want: f64| (x - want).abs() <= 1e-11 * want.abs();
        assert!(close(r.q_ab, 0.449718181481132), "q_ab = {}", r.q_ab);
        assert!(close(r.q_bc, -0.7044636608928369), "q_bc = {}", r.q_bc);
        assert!(close(r.q_cd, -0.11514138213548669), "q_cd = {}", r.q_cd);
        assert!(close(r.q_da, 0.5514411295435664), "q_da = {}", r.q_da);
        assert!(close(r.work, 0.18155426799637485), "work = {}", r.work);
        assert!(
            close(r.eta.unwrap(), 0.18134403385865923),
            "eta = {:?}",
            r.eta
        );
        assert_eq!(r.regime, CycleRegime::Engine);
        assert!(r.eta.unwrap() < r.eta_carnot);
        assert!(!r.any_turnover());
    }

    #[test]
    fn well_cycle_frozen_values() {
        // Full width 5, unit mass, T = 2 / 1: the barrier cycle consumes
        // work at these temperatures. Flagged, not hidden.
        let r = run_cycle(&textbook_well_cycle()).unwrap();
        let close = |x: f64, want: f64| (x - want).abs() <= 1e-11 * want.abs();
        assert!(close(r.q_ab, -0.15150167241000584), "q_ab = {}", r.q_ab);
        assert!(close(r.q_bc, -0.5467005037234951), "q_bc = {}", r.q_bc);
        assert!(close(r.q_cd, 0.07201317982965032), "q_cd = {}", r.q_cd);
        assert!(close(r.q_da, 0.5481728523873497), "q_da = {}", r.q_da);
        assert!(close(r.work, -0.07801614391650093), "work = {}", r.work);
        assert!(close(r.q_in, 0.39667117997734385), "q_in = {}", r.q_in);
        assert!(
            close(r.eta.unwrap(), -0.1966771166005982),
            "eta = {:?}",
            r.eta
        );
        assert_eq!(r.regime, CycleRegime::WorkConsuming);
    }

    #[test]
    fn efficiency_identity_holds() {
        // eta = 1 + (Q_BC + Q_CD) / (Q_DA + Q_AB) whenever eta is defined.
        for spec in [textbook_oscillator_cycle(), textbook_well_cycle()] {
            let r = run_cycle(&spec).unwrap();
            let lhs = r.eta.unwrap();
            let rhs = 1.0 + (r.q_bc + r.q_cd) / (r.q_da + r.q_ab);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn deep_quantum_electron_well_reaches_carnot() {
        // 5 nm electron well at 2 K / 1 K: only the lowest level of each
        // spectrum is populated, the heats collapse to k_B T ln 2 on the
        // isothermal legs, and eta hits the Carnot value 1/2.
        let spec = StirlingCycleSpec::well(
            WellGeometry::new(5e-9),
            PhysicalParams::si().with_alpha(1e41),
            Corrections::NCGUP_FULL,
            2.0,
            1.0,
        )
        .unwrap();
        let r = run_cycle(&spec).unwrap();
        assert_eq!(r.regime, CycleRegime::Engine);
        let eta = r.eta.unwrap();
        assert!((eta - 0.5).abs() < 1e-9, "eta = {eta}");
        let ln2 = std::f64::consts::LN_2;
        assert!((r.q_ab - K_B_SI * 2.0 * ln2).abs() < 1e-6 * r.q_ab);
        assert!((r.q_cd + K_B_SI * 1.0 * ln2).abs() < 1e-6 * r.q_cd.abs());
        assert!(eta <= r.eta_carnot + 1e-12);
    }

    #[test]
    fn swapping_temperatures_reverses_every_leg() {
        let fwd = run_cycle(&textbook_oscillator_cycle()).unwrap();
        let spec = textbook_oscillator_cycle();
        let rev = run_cycle(&StirlingCycleSpec {
            t_hot: spec.t_cold,
            t_cold: spec.t_hot,
            ..spec
        })
        .unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1e-300);
        assert!(close(rev.q_ab, -fwd.q_cd));
        assert!(close(rev.q_bc, -fwd.q_bc));
        assert!(close(rev.q_cd, -fwd.q_ab));
        assert!(close(rev.q_da, -fwd.q_da));
        assert!(close(rev.work, -fwd.work));
    }

    #[test]
    fn reversed_well_cycle_is_degenerate_not_an_engine() {
        // Swapped temperatures on the work-consuming well cycle yield
        // positive work but the nominal input legs expel heat; a ratio of
        // the two would be meaningless.
        let spec = textbook_well_cycle();
        let rev = run_cycle(&StirlingCycleSpec {
            t_hot: spec.t_cold,
            t_cold: spec.t_hot,
            ..spec
        })
        .unwrap();
        assert!(rev.work > 0.0);
        assert!(rev.q_in < 0.0);
        assert_eq!(rev.regime, CycleRegime::Degenerate);
        assert_eq!(rev.eta, None);
        assert!(rev.eta_carnot < 0.0);
    }

    #[test]
    fn equal_temperatures_are_degenerate_with_vanishing_work() {
        let spec = textbook_oscillator_cycle();
        let r = run_cycle(&StirlingCycleSpec {
            t_cold: 2.0,
            ..spec
        })
        .unwrap();
        assert_eq!(r.regime, CycleRegime::Degenerate);
        assert_eq!(r.eta, None);
        assert!(r.work.abs() <= 1e-14);
        assert_eq!(r.eta_carnot, 0.0);
    }

    #[test]
    fn uniform_energy_shift_leaves_all_heats_unchanged() {
        let base = run_cycle(&textbook_well_cycle()).unwrap();
        let spec = textbook_well_cycle();
        let delta = 1e3;
        let shifted = run_cycle(&StirlingCycleSpec {
            hot_start: spec.hot_start.clone().with_energy_offset(delta),
            hot_end: spec.hot_end.clone().with_energy_offset(delta),
            ..spec
        })
        .unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(1e-12);
        assert!(close(shifted.q_ab, base.q_ab));
        assert!(close(shifted.q_bc, base.q_bc));
        assert!(close(shifted.q_cd, base.q_cd));
        assert!(close(shifted.q_da, base.q_da));
        assert!(close(shifted.eta.unwrap(), base.eta.unwrap()));
    }

    #[test]
    fn unit_systems_agree_on_the_same_physical_cycle() {
        // One electron in a 5 nm well with both corrections, 100 K / 50 K,
        // expressed in SI and in natural units.
        let si = StirlingCycleSpec::well(
            WellGeometry::new(5e-9),
            PhysicalParams::si().with_alpha(1e41),
            Corrections::NCGUP_FULL,
            100.0,
            50.0,
        )
        .unwrap();
        let unit_length = HBAR_SI * C_SI / K_B_SI;
        let nat = StirlingCycleSpec::well(
            WellGeometry::new(5e-9 / unit_length),
            PhysicalParams::natural()
                .with_mass(ELECTRON_MASS_NATURAL)
                .with_alpha(1e41),
            Corrections::NCGUP_FULL,
            100.0,
            50.0,
        )
        .unwrap();
        let r_si = run_cycle(&si).unwrap();
        let r_nat = run_cycle(&nat).unwrap();
        let eta_si = r_si.eta.unwrap();
        let eta_nat = r_nat.eta.unwrap();
        assert!(
            (eta_si - eta_nat).abs() <= 1e-10 * eta_si.abs(),
            "eta_si = {eta_si}, eta_nat = {eta_nat}"
        );
        // Heats agree after converting joules to kelvin-equivalents.
        assert!((r_si.q_ab / K_B_SI - r_nat.q_ab).abs() <= 1e-9 * r_nat.q_ab.abs());
    }

    #[test]
    fn engine_points_respect_the_carnot_ceiling() {
        for (t_hot, t_cold) in [(2.0, 1.0), (3.0, 1.0), (5.0, 4.0), (1.5, 0.3)] {
            let spec = StirlingCycleSpec::oscillator(
                4.0,
                3.0,
                PhysicalParams::natural(),
                Corrections::TEXTBOOK,
                t_hot,
                t_cold,
            )
            .unwrap();
            let r = run_cycle(&spec).unwrap();
            if r.regime == CycleRegime::Engine {
                assert!(
                    r.eta.unwrap() <= r.eta_carnot + 1e-12,
                    "Carnot violated at ({t_hot}, {t_cold})"
                );
            }
        }
    }

    #[test]
    fn perturbative_violations_propagate_out_of_the_cycle() {
        // Unit mass in natural units is ultra-relativistic in a width-5
        // well; every corner's sum is refused.
        let spec = StirlingCycleSpec::well(
            WellGeometry::new(5.0),
            PhysicalParams::natural(),
            Corrections::RELATIVISTIC,
            2.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            run_cycle(&spec),
            Err(CycleError::Statmech(
                StatmechError::PerturbativeRegimeViolation { .. }
            ))
        ));
    }

    #[test]
    fn invalid_pairings_are_rejected() {
        let p = PhysicalParams::natural();
        let well = SpectrumModel::well(WellGeometry::new(5.0), p, Corrections::TEXTBOOK).unwrap();
        let osc =
            SpectrumModel::oscillator(OscillatorGeometry { omega: 4.0 }, p, Corrections::TEXTBOOK)
                .unwrap();
        assert!(matches!(
            StirlingCycleSpec::from_models(well.clone(), osc.clone(), 2.0, 1.0),
            Err(CycleError::MismatchedMedia { .. })
        ));

        let other_mass = SpectrumModel::well(
            WellGeometry::new(5.0),
            p.with_mass(2.0),
            Corrections::TEXTBOOK,
        )
        .unwrap();
        assert!(matches!(
            StirlingCycleSpec::from_models(well.clone(), other_mass, 2.0, 1.0),
            Err(CycleError::MismatchedParams)
        ));

        let corrected =
            SpectrumModel::well(WellGeometry::new(5.0), p, Corrections::NCGUP_ONLY).unwrap();
        assert!(matches!(
            StirlingCycleSpec::from_models(well.clone(), corrected, 2.0, 1.0),
            Err(CycleError::MismatchedCorrections)
        ));

        for t in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                StirlingCycleSpec::from_models(well.clone(), well.clone(), t, 1.0),
                Err(CycleError::BadTemperature(_))
            ));
        }

        let states = run_cycle(&textbook_oscillator_cycle()).unwrap().corners;
        assert!(matches!(
            heat_isothermal(&states[0], &states[2]),
            Err(CycleError::TemperatureMismatch { .. })
        ));
    }

    #[test]
    fn isochoric_heats_are_plain_energy_differences() {
        let r = run_cycle(&textbook_oscillator_cycle()).unwrap();
        let [a, b, c, d] = r.corners;
        assert_eq!(r.q_bc, c.u - b.u);
        assert_eq!(r.q_da, a.u - d.u);
        assert_eq!(heat_isochoric(&b, &c), r.q_bc);
        assert_eq!(heat_isochoric(&d, &a), r.q_da);
    }
}
