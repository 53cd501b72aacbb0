//! Numerical engine for quantum Stirling heat cycles with two working media:
//! a particle in a 1-D infinite well (with a midpoint-barrier variant) and a
//! harmonic oscillator. Energy spectra optionally carry first-order
//! relativistic corrections and a non-commutative/GUP correction controlled
//! by a deformation parameter `alpha`.
//!
//! Layering, bottom to top:
//!
//! * [`params`]: unit systems, physical constants, the dimensionless
//!   correction factor.
//! * [`spectra`]: level tables for the three media, turnover detection.
//! * [`statmech`]: truncated canonical sums (`Z`, `lnZ`, `U`, `F`) with
//!   explicit truncation policy and regime diagnostics.
//! * [`cycle`]: four-stroke Stirling assembly, heats, work, efficiency.
//! * [`oracles`]: error function and closed-form partition expressions used
//!   to audit the direct sums.
//! * [`cli`]: parameter sweeps, CSV/JSON emission, the command-line surface.

pub mod cli;
pub mod cycle;
pub mod oracles;
pub mod params;
pub mod spectra;
pub mod statmech;
