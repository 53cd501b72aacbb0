//! Command-line front end.
//!
//! Four subcommands: `sweep` (alpha grid, one cycle per point), `cycle`
//! (single run), `levels` (spectrum inspection), `oracle` (closed-form
//! audit). Every long flag has a matching `key = value` line in an
//! optional config file (`--config`); explicit flags override file
//! values, file values override built-in defaults. Unknown config keys
//! are rejected.
//!
//! Data goes to stdout, diagnostics to stderr. Exit codes: 0 on success,
//! 2 for configuration errors (clap uses the same code for flag errors),
//! 3 when every requested point failed.
//!
//! Number formatting is plain shortest-round-trip decimal inside
//! [1e-3, 1e6] in magnitude and scientific outside, so output re-parses
//! to the exact same bits. Output for a fixed spec is byte-identical
//! across runs: points are computed sequentially in ascending alpha and
//! nothing is timestamped.

use crate::cycle::{run_cycle, CycleError, CycleRegime, CycleResult, StirlingCycleSpec};
use crate::oracles::{audit_z_ho, audit_z_well, OracleReport};
use crate::params::{PhysicalParams, UnitSystem, ELECTRON_MASS_NATURAL, ELECTRON_MASS_SI};
use crate::spectra::{Corrections, Medium, OscillatorGeometry, SpectrumModel, WellGeometry};
use crate::statmech::{partition_sum, TruncationPolicy};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    PointsFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::PointsFailed(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qstirling",
    version,
    about = "Stirling-cycle thermodynamics of deformed quantum spectra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep the deformation strength alpha and tabulate one cycle per point
    Sweep(SweepArgs),
    /// Run a single cycle and print its row
    Cycle(CycleArgs),
    /// Print a level table with cumulative thermal weights
    Levels(LevelsArgs),
    /// Audit the closed-form partition functions against direct sums
    Oracle(OracleArgs),
}

/// Flags shared by all subcommands. Everything is optional here; defaults
/// are applied after config-file merging, in [`resolve_common`].
#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Config file of `key = value` lines mirroring the long flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Unit system: "natural" (hbar = c = k_B = 1, kelvin energies) or "si"
    #[arg(long)]
    pub units: Option<String>,
    /// Particle mass in the active units, or the keyword "electron".
    /// The default particle is the electron in either unit system.
    #[arg(long)]
    pub mass: Option<String>,
    /// Deformation length scale; defaults to 1/(c m_Planck) in the active units
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Correction preset: "textbook", "relativistic", or "ncgup-full"
    #[arg(long)]
    pub preset: Option<String>,
    /// Force the relativistic spectrum term on or off (overrides the preset)
    #[arg(long)]
    pub relativistic: Option<bool>,
    /// Force the deformation factor on or off (overrides the preset)
    #[arg(long)]
    pub ncgup: Option<bool>,
    /// Working medium: "well" or "oscillator" ("double-well" only in `levels`)
    #[arg(long)]
    pub medium: Option<String>,
    /// Full well width (defaults: 5 in natural units, 5e-9 m in SI)
    #[arg(long)]
    pub l0: Option<f64>,
    /// Keep the bare width instead of the deformation-rescaled width
    #[arg(long)]
    pub bare_length: Option<bool>,
    /// Oscillator frequency at the start corner
    #[arg(long)]
    pub omega: Option<f64>,
    /// Oscillator frequency after the hot isothermal stroke
    #[arg(long)]
    pub omega_prime: Option<f64>,
    /// Convergence threshold for level sums
    #[arg(long)]
    pub weight_epsilon: Option<f64>,
    /// Absolute level budget per sum
    #[arg(long)]
    pub hard_cap: Option<u64>,
    /// Refuse sums truncated at a spectrum turnover that still carries weight
    #[arg(long)]
    pub respect_turnover: Option<bool>,
    /// Weight fraction a turnover level may carry before refusal
    #[arg(long)]
    pub turnover_tolerance: Option<f64>,
    /// Output format: "csv" or "json"
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Smallest nonzero alpha (left endpoint on a linear grid)
    #[arg(long)]
    pub alpha_min: Option<f64>,
    /// Largest alpha
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Number of grid points (a log grid adds one alpha = 0 anchor row)
    #[arg(long)]
    pub steps: Option<u64>,
    /// Grid scale: "log" or "linear"
    #[arg(long)]
    pub scale: Option<String>,
    /// Hot reservoir temperature, kelvin
    #[arg(long)]
    pub t_hot: Option<f64>,
    /// Cold reservoir temperature, kelvin
    #[arg(long)]
    pub t_cold: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CycleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Deformation strength
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Hot reservoir temperature, kelvin
    #[arg(long)]
    pub t_hot: Option<f64>,
    /// Cold reservoir temperature, kelvin
    #[arg(long)]
    pub t_cold: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct LevelsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Deformation strength
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Temperature for the cumulative Boltzmann weights, kelvin
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Highest level index to print
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Deformation strength
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated audit temperatures, kelvin
    #[arg(long)]
    pub temperatures: Option<String>,
}

// ---------------------------------------------------------------------
// Config file handling. A file is a list of `key = value` lines; keys are
// the long flag names. Flags that were given explicitly keep their value,
// so the precedence is flags, then file, then defaults.

fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                idx + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_into<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| {
        CliError::Config(format!(
            "config key `{key}`: cannot parse `{value}` as {}",
            std::any::type_name::<T>()
        ))
    })
}

/// Fill `slot` from a config value unless a flag already set it.
fn fill<T: std::str::FromStr>(
    slot: &mut Option<T>,
    key: &str,
    value: &str,
) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(parse_into(key, value)?);
    }
    Ok(())
}

fn fill_string(slot: &mut Option<String>, value: &str) {
    if slot.is_none() {
        *slot = Some(value.to_string());
    }
}

impl CommonArgs {
    /// Apply one config pair if it names a shared flag. Returns false for
    /// keys this struct does not own.
    fn apply_pair(&mut self, key: &str, value: &str) -> Result<bool, CliError> {
        match key {
            "units" => fill_string(&mut self.units, value),
            "mass" => fill_string(&mut self.mass, value),
            "zeta" => fill(&mut self.zeta, key, value)?,
            "preset" => fill_string(&mut self.preset, value),
            "relativistic" => fill(&mut self.relativistic, key, value)?,
            "ncgup" => fill(&mut self.ncgup, key, value)?,
            "medium" => fill_string(&mut self.medium, value),
            "l0" => fill(&mut self.l0, key, value)?,
            "bare-length" => fill(&mut self.bare_length, key, value)?,
            "omega" => fill(&mut self.omega, key, value)?,
            "omega-prime" => fill(&mut self.omega_prime, key, value)?,
            "weight-epsilon" => fill(&mut self.weight_epsilon, key, value)?,
            "hard-cap" => fill(&mut self.hard_cap, key, value)?,
            "respect-turnover" => fill(&mut self.respect_turnover, key, value)?,
            "turnover-tolerance" => fill(&mut self.turnover_tolerance, key, value)?,
            "output" => fill_string(&mut self.output, value),
            _ => return Ok(false),
        }
        Ok(true)
    }
}

fn unknown_key(key: &str) -> CliError {
    CliError::Config(format!("unknown config key `{key}`"))
}

impl SweepArgs {
    pub fn apply_config(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        for (key, value) in pairs {
            if self.common.apply_pair(key, value)? {
                continue;
            }
            match key.as_str() {
                "alpha-min" => fill(&mut self.alpha_min, key, value)?,
                "alpha-max" => fill(&mut self.alpha_max, key, value)?,
                "steps" => fill(&mut self.steps, key, value)?,
                "scale" => fill_string(&mut self.scale, value),
                "t-hot" => fill(&mut self.t_hot, key, value)?,
                "t-cold" => fill(&mut self.t_cold, key, value)?,
                _ => return Err(unknown_key(key)),
            }
        }
        Ok(())
    }
}

impl CycleArgs {
    pub fn apply_config(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        for (key, value) in pairs {
            if self.common.apply_pair(key, value)? {
                continue;
            }
            match key.as_str() {
                "alpha" => fill(&mut self.alpha, key, value)?,
                "t-hot" => fill(&mut self.t_hot, key, value)?,
                "t-cold" => fill(&mut self.t_cold, key, value)?,
                _ => return Err(unknown_key(key)),
            }
        }
        Ok(())
    }
}

impl LevelsArgs {
    pub fn apply_config(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        for (key, value) in pairs {
            if self.common.apply_pair(key, value)? {
                continue;
            }
            match key.as_str() {
                "alpha" => fill(&mut self.alpha, key, value)?,
                "temperature" => fill(&mut self.temperature, key, value)?,
                "n-max" => fill(&mut self.n_max, key, value)?,
                _ => return Err(unknown_key(key)),
            }
        }
        Ok(())
    }
}

impl OracleArgs {
    pub fn apply_config(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        for (key, value) in pairs {
            if self.common.apply_pair(key, value)? {
                continue;
            }
            match key.as_str() {
                "alpha" => fill(&mut self.alpha, key, value)?,
                "temperatures" => fill_string(&mut self.temperatures, value),
                _ => return Err(unknown_key(key)),
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Resolution: merged options to validated runtime values.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

/// Validated shared settings with all defaults applied.
#[derive(Debug, Clone)]
pub struct ResolvedCommon {
    pub units: UnitSystem,
    /// Base parameters at alpha = 0; per-point alpha is applied on top.
    pub base_params: PhysicalParams,
    pub corrections: Corrections,
    pub medium: Medium,
    pub well: WellGeometry,
    pub omega: f64,
    pub omega_prime: f64,
    pub policy: TruncationPolicy,
    pub output: OutputFormat,
}

pub fn resolve_common(
    args: &CommonArgs,
    allow_double_well: bool,
) -> Result<ResolvedCommon, CliError> {
    let units = match args.units.as_deref().unwrap_or("natural") {
        "natural" => UnitSystem::Natural,
        "si" => UnitSystem::Si,
        other => {
            return Err(CliError::Config(format!(
                "units must be \"natural\" or \"si\", got `{other}`"
            )))
        }
    };
    let mut params = match units {
        UnitSystem::Natural => PhysicalParams::natural(),
        UnitSystem::Si => PhysicalParams::si(),
    };
    // The default particle is the electron regardless of unit system; an
    // explicit number replaces it.
    let m = match args.mass.as_deref().unwrap_or("electron") {
        "electron" => match units {
            UnitSystem::Natural => ELECTRON_MASS_NATURAL,
            UnitSystem::Si => ELECTRON_MASS_SI,
        },
        number => parse_into::<f64>("mass", number)?,
    };
    params = params.with_mass(m);
    if let Some(zeta) = args.zeta {
        params = params.with_zeta(zeta);
    }

    let mut corrections = match args.preset.as_deref().unwrap_or("textbook") {
        "textbook" => Corrections::TEXTBOOK,
        "relativistic" => Corrections::RELATIVISTIC,
        "ncgup-full" => Corrections::NCGUP_FULL,
        other => {
            return Err(CliError::Config(format!(
                "preset must be \"textbook\", \"relativistic\", or \"ncgup-full\", got `{other}`"
            )))
        }
    };
    if let Some(rel) = args.relativistic {
        corrections.relativistic = rel;
    }
    if let Some(nc) = args.ncgup {
        corrections.ncgup = nc;
    }

    let medium = match args.medium.as_deref().unwrap_or("well") {
        "well" => Medium::Well,
        "oscillator" => Medium::Oscillator,
        "double-well" if allow_double_well => Medium::DoubleWell,
        "double-well" => {
            return Err(CliError::Config(
                "medium \"double-well\" is only available to `levels`; cycles build the \
                 barrier phase automatically"
                    .into(),
            ))
        }
        other => {
            return Err(CliError::Config(format!(
                "medium must be \"well\" or \"oscillator\", got `{other}`"
            )))
        }
    };

    let l0 = args.l0.unwrap_or(match units {
        UnitSystem::Natural => 5.0,
        UnitSystem::Si => 5e-9,
    });
    let well = WellGeometry {
        l0,
        use_physical_length: !args.bare_length.unwrap_or(false),
    };

    let defaults = TruncationPolicy::default();
    let policy = TruncationPolicy {
        weight_epsilon: args.weight_epsilon.unwrap_or(defaults.weight_epsilon),
        hard_cap: args.hard_cap.unwrap_or(defaults.hard_cap),
        respect_turnover: args.respect_turnover.unwrap_or(defaults.respect_turnover),
        turnover_weight_tolerance: args
            .turnover_tolerance
            .unwrap_or(defaults.turnover_weight_tolerance),
    };

    let output = match args.output.as_deref().unwrap_or("csv") {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        other => {
            return Err(CliError::Config(format!(
                "output must be \"csv\" or \"json\", got `{other}`"
            )))
        }
    };

    Ok(ResolvedCommon {
        units,
        base_params: params,
        corrections,
        medium,
        well,
        omega: args.omega.unwrap_or(4.0),
        omega_prime: args.omega_prime.unwrap_or(3.0),
        policy,
        output,
    })
}

fn check_cli_temperature(name: &str, t: f64) -> Result<(), CliError> {
    if !t.is_finite() || t <= 0.0 {
        return Err(CliError::Config(format!(
            "{name} must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Number and row formatting.

/// Shortest-round-trip formatting: plain decimal while |x| is inside
/// [1e-3, 1e6], scientific outside, `nan`/`inf` spelled lowercase.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let magnitude = x.abs();
    if (1e-3..=1e6).contains(&magnitude) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn sanitize_note(s: &str) -> String {
    s.replace(',', ";").replace('\n', " ")
}

/// One sweep (or single-cycle) output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    /// None when the efficiency is undefined (degenerate regime or a
    /// failed point); emitted as `nan` in CSV and `null` in JSON.
    pub eta: Option<f64>,
    pub work: f64,
    pub q_ab: f64,
    pub q_bc: f64,
    pub q_cd: f64,
    pub q_da: f64,
    pub eta_carnot: f64,
    pub turnover_a: bool,
    pub turnover_b: bool,
    pub turnover_c: bool,
    pub turnover_d: bool,
    pub warnings: String,
}

pub const SWEEP_HEADER: &str =
    "alpha,eta,work,q_ab,q_bc,q_cd,q_da,eta_carnot,turnover_a,turnover_b,turnover_c,turnover_d,warnings";

fn row_from_result(alpha: f64, r: &CycleResult) -> SweepRow {
    let warnings = match r.regime {
        CycleRegime::Engine => String::new(),
        CycleRegime::WorkConsuming => "work-consuming cycle".to_string(),
        CycleRegime::Degenerate => "degenerate cycle; efficiency undefined".to_string(),
    };
    SweepRow {
        alpha,
        eta: r.eta,
        work: r.work,
        q_ab: r.q_ab,
        q_bc: r.q_bc,
        q_cd: r.q_cd,
        q_da: r.q_da,
        eta_carnot: r.eta_carnot,
        turnover_a: r.corners[0].turnover_hit,
        turnover_b: r.corners[1].turnover_hit,
        turnover_c: r.corners[2].turnover_hit,
        turnover_d: r.corners[3].turnover_hit,
        warnings,
    }
}

fn row_from_error(alpha: f64, err: &CycleError) -> SweepRow {
    SweepRow {
        alpha,
        eta: None,
        work: f64::NAN,
        q_ab: f64::NAN,
        q_bc: f64::NAN,
        q_cd: f64::NAN,
        q_da: f64::NAN,
        eta_carnot: f64::NAN,
        turnover_a: false,
        turnover_b: false,
        turnover_c: false,
        turnover_d: false,
        warnings: sanitize_note(&err.to_string()),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let eta = r.eta.map_or_else(|| "nan".to_string(), fmt_float);
        let _ = writeln!(
            out,
            "{},{eta},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_float(r.alpha),
            fmt_float(r.work),
            fmt_float(r.q_ab),
            fmt_float(r.q_bc),
            fmt_float(r.q_cd),
            fmt_float(r.q_da),
            fmt_float(r.eta_carnot),
            r.turnover_a,
            r.turnover_b,
            r.turnover_c,
            r.turnover_d,
            r.warnings,
        );
    }
    out
}

pub fn to_json<T: Serialize>(rows: &[T]) -> String {
    let mut s = serde_json::to_string(rows).expect("rows are always serializable");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------
// Grids and sweep execution.

/// Ascending alpha grid. Linear grids span [min, max] in exactly `steps`
/// points. Log grids cannot contain 0, so they prepend an alpha = 0
/// anchor row to `steps` log-spaced points (giving steps + 1 values);
/// the commutative limit is always present for comparison. Endpoints are
/// exact in both scales.
pub fn alpha_grid(min: f64, max: f64, steps: u64, scale: GridScale) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::Config(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    if !min.is_finite() || !max.is_finite() || min < 0.0 {
        return Err(CliError::Config(format!(
            "alpha bounds must be finite and non-negative, got [{min}, {max}]"
        )));
    }
    if min > max {
        return Err(CliError::Config(format!(
            "alpha-min {min} exceeds alpha-max {max}"
        )));
    }
    let last = steps - 1;
    match scale {
        GridScale::Linear => Ok((0..steps)
            .map(|i| {
                if i == 0 {
                    min
                } else if i == last {
                    max
                } else {
                    min + (max - min) * (i as f64 / last as f64)
                }
            })
            .collect()),
        GridScale::Log => {
            if min <= 0.0 {
                return Err(CliError::Config(
                    "log scale requires alpha-min > 0 (an alpha = 0 anchor row is added automatically)"
                        .into(),
                ));
            }
            let ratio = max / min;
            let mut grid = Vec::with_capacity(steps as usize + 1);
            grid.push(0.0);
            for i in 0..steps {
                grid.push(if i == 0 {
                    min
                } else if i == last {
                    max
                } else {
                    min * ratio.powf(i as f64 / last as f64)
                });
            }
            Ok(grid)
        }
    }
}

fn cycle_spec_at(
    common: &ResolvedCommon,
    t_hot: f64,
    t_cold: f64,
    alpha: f64,
) -> Result<StirlingCycleSpec, CycleError> {
    let params = common.base_params.with_alpha(alpha);
    let spec = match common.medium {
        Medium::Well => {
            StirlingCycleSpec::well(common.well, params, common.corrections, t_hot, t_cold)?
        }
        Medium::Oscillator => StirlingCycleSpec::oscillator(
            common.omega,
            common.omega_prime,
            params,
            common.corrections,
            t_hot,
            t_cold,
        )?,
        Medium::DoubleWell => unreachable!("rejected during option resolution"),
    };
    Ok(spec.with_policy(common.policy))
}

/// Compute one row per alpha. Per-point failures become rows with NaN
/// values and a warning field; the failure count and diagnostic lines are
/// returned for the caller to report.
pub fn sweep_rows(
    common: &ResolvedCommon,
    t_hot: f64,
    t_cold: f64,
    alphas: &[f64],
) -> (Vec<SweepRow>, usize, Vec<String>) {
    let mut rows = Vec::with_capacity(alphas.len());
    let mut failed = 0;
    let mut diagnostics = Vec::new();

    if let Some(&alpha_top) = alphas.last() {
        // A validation error here surfaces per point below; only the
        // soft-range warnings are worth announcing once up front.
        if let Ok(warnings) = common.base_params.with_alpha(alpha_top).validate() {
            diagnostics.extend(warnings);
        }
    }

    for &alpha in alphas {
        match cycle_spec_at(common, t_hot, t_cold, alpha).and_then(|spec| run_cycle(&spec)) {
            Ok(result) => rows.push(row_from_result(alpha, &result)),
            Err(err) => {
                failed += 1;
                diagnostics.push(format!("alpha = {}: {err}", fmt_float(alpha)));
                rows.push(row_from_error(alpha, &err));
            }
        }
    }
    (rows, failed, diagnostics)
}

// ---------------------------------------------------------------------
// Levels and oracle tables.

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub n: u64,
    pub energy: f64,
    pub degeneracy: u32,
    /// Population fraction of all levels up to and including this one.
    pub cumulative_weight: f64,
}

pub const LEVELS_HEADER: &str = "n,energy,degeneracy,cumulative_weight";

pub fn levels_csv(rows: &[LevelRow]) -> String {
    let mut out = String::from(LEVELS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.n,
            fmt_float(r.energy),
            r.degeneracy,
            fmt_float(r.cumulative_weight)
        );
    }
    out
}

fn spectrum_model(common: &ResolvedCommon, alpha: f64) -> Result<SpectrumModel, CliError> {
    let params = common.base_params.with_alpha(alpha);
    match common.medium {
        Medium::Well => SpectrumModel::well(common.well, params, common.corrections),
        Medium::DoubleWell => SpectrumModel::double_well(common.well, params, common.corrections),
        Medium::Oscillator => SpectrumModel::oscillator(
            OscillatorGeometry {
                omega: common.omega,
            },
            params,
            common.corrections,
        ),
    }
    .map_err(|e| CliError::Config(e.to_string()))
}

pub fn level_rows(
    common: &ResolvedCommon,
    alpha: f64,
    temperature: f64,
    n_max: u64,
) -> Result<(Vec<LevelRow>, Vec<String>), CliError> {
    check_cli_temperature("temperature", temperature)?;
    if n_max > common.policy.hard_cap {
        return Err(CliError::Config(format!(
            "n-max {n_max} exceeds the hard level cap {}",
            common.policy.hard_cap
        )));
    }
    let model = spectrum_model(common, alpha)?;
    // Inspection must be able to look at sick spectra, so the normalizing
    // sum never refuses a turnover here.
    let tolerant = TruncationPolicy {
        respect_turnover: false,
        ..common.policy
    };
    let part = partition_sum(&model, temperature, &tolerant)
        .map_err(|e| CliError::PointsFailed(e.to_string()))?;
    let beta = 1.0 / (model.params.k_b * temperature);

    let mut diagnostics = Vec::new();
    if part.turnover_hit && n_max > part.n_used {
        diagnostics.push(format!(
            "levels beyond n = {} lie past the spectrum turnover; their weights are \
             artifacts of the expansion and cumulative fractions there exceed 1",
            part.n_used
        ));
    }

    let mut rows = Vec::new();
    let mut cumulative = 0.0;
    for n in model.origin()..=n_max.max(model.origin()) {
        let level = model
            .level(n)
            .map_err(|e| CliError::Config(e.to_string()))?;
        cumulative += level.degeneracy as f64 * (-beta * (level.energy - part.ground_energy)).exp();
        rows.push(LevelRow {
            n,
            energy: level.energy,
            degeneracy: level.degeneracy,
            cumulative_weight: cumulative / part.z_shifted,
        });
    }
    Ok((rows, diagnostics))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub temperature: f64,
    pub closed_form_value: f64,
    pub direct_sum_value: f64,
    pub relative_gap: f64,
    pub regime_valid: bool,
    pub regime_notes: String,
}

pub const ORACLE_HEADER: &str =
    "temperature,closed_form_value,direct_sum_value,relative_gap,regime_valid,regime_notes";

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::from(ORACLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(r.temperature),
            fmt_float(r.closed_form_value),
            fmt_float(r.direct_sum_value),
            fmt_float(r.relative_gap),
            r.regime_valid,
            sanitize_note(&r.regime_notes),
        );
    }
    out
}

pub fn parse_temperature_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let mut temps = Vec::new();
    for piece in spec.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let t: f64 = parse_into("temperatures", piece)?;
        check_cli_temperature("temperatures", t)?;
        temps.push(t);
    }
    if temps.is_empty() {
        return Err(CliError::Config("temperatures list is empty".into()));
    }
    Ok(temps)
}

pub fn oracle_rows(
    common: &ResolvedCommon,
    alpha: f64,
    temperatures: &[f64],
) -> Result<Vec<OracleRow>, CliError> {
    let params = common.base_params.with_alpha(alpha);
    let mut rows = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        let report: OracleReport = match common.medium {
            Medium::Well | Medium::DoubleWell => {
                audit_z_well(&common.well, &params, t, &common.policy)
            }
            Medium::Oscillator => audit_z_ho(
                &OscillatorGeometry {
                    omega: common.omega,
                },
                &params,
                t,
                &common.policy,
            ),
        }
        .map_err(|e| CliError::PointsFailed(format!("audit at T = {t} failed: {e}")))?;
        rows.push(OracleRow {
            temperature: t,
            closed_form_value: report.closed_form_value,
            direct_sum_value: report.direct_sum_value,
            relative_gap: report.relative_gap,
            regime_valid: report.regime_valid,
            regime_notes: report.regime_notes,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------
// Top-level dispatch.

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(mut args) => {
            if let Some(path) = args.common.config.clone() {
                let pairs = parse_config_file(&path)?;
                args.apply_config(&pairs)?;
            }
            let common = resolve_common(&args.common, false)?;
            let t_hot = args.t_hot.unwrap_or(2.0);
            let t_cold = args.t_cold.unwrap_or(1.0);
            check_cli_temperature("t-hot", t_hot)?;
            check_cli_temperature("t-cold", t_cold)?;
            let scale = match args.scale.as_deref().unwrap_or("log") {
                "log" => GridScale::Log,
                "linear" => GridScale::Linear,
                other => {
                    return Err(CliError::Config(format!(
                        "scale must be \"log\" or \"linear\", got `{other}`"
                    )))
                }
            };
            let alphas = alpha_grid(
                args.alpha_min.unwrap_or(1e30),
                args.alpha_max.unwrap_or(1e41),
                args.steps.unwrap_or(100),
                scale,
            )?;
            let (rows, failed, diagnostics) = sweep_rows(&common, t_hot, t_cold, &alphas);
            for d in &diagnostics {
                eprintln!("warning: {d}");
            }
            if failed == rows.len() {
                return Err(CliError::PointsFailed(format!(
                    "all {failed} sweep points failed"
                )));
            }
            match common.output {
                OutputFormat::Csv => print!("{}", sweep_csv(&rows)),
                OutputFormat::Json => print!("{}", to_json(&rows)),
            }
            Ok(())
        }
        Command::Cycle(mut args) => {
            if let Some(path) = args.common.config.clone() {
                let pairs = parse_config_file(&path)?;
                args.apply_config(&pairs)?;
            }
            let common = resolve_common(&args.common, false)?;
            let t_hot = args.t_hot.unwrap_or(2.0);
            let t_cold = args.t_cold.unwrap_or(1.0);
            check_cli_temperature("t-hot", t_hot)?;
            check_cli_temperature("t-cold", t_cold)?;
            let alpha = args.alpha.unwrap_or(0.0);
            let (rows, failed, diagnostics) = sweep_rows(&common, t_hot, t_cold, &[alpha]);
            for d in &diagnostics {
                eprintln!("warning: {d}");
            }
            if failed == rows.len() {
                return Err(CliError::PointsFailed(rows[0].warnings.clone()));
            }
            match common.output {
                OutputFormat::Csv => print!("{}", sweep_csv(&rows)),
                OutputFormat::Json => print!("{}", to_json(&rows)),
            }
            Ok(())
        }
        Command::Levels(mut args) => {
            if let Some(path) = args.common.config.clone() {
                let pairs = parse_config_file(&path)?;
                args.apply_config(&pairs)?;
            }
            let common = resolve_common(&args.common, true)?;
            let (rows, diagnostics) = level_rows(
                &common,
                args.alpha.unwrap_or(0.0),
                args.temperature.unwrap_or(1.0),
                args.n_max.unwrap_or(10),
            )?;
            for d in &diagnostics {
                eprintln!("warning: {d}");
            }
            match common.output {
                OutputFormat::Csv => print!("{}", levels_csv(&rows)),
                OutputFormat::Json => print!("{}", to_json(&rows)),
            }
            Ok(())
        }
        Command::Oracle(mut args) => {
            if let Some(path) = args.common.config.clone() {
                let pairs = parse_config_file(&path)?;
                args.apply_config(&pairs)?;
            }
            let common = resolve_common(&args.common, true)?;
            let temps =
                parse_temperature_list(args.temperatures.as_deref().unwrap_or("1,2,5,10,20"))?;
            let rows = oracle_rows(&common, args.alpha.unwrap_or(0.0), &temps)?;
            match common.output {
                OutputFormat::Csv => print!("{}", oracle_csv(&rows)),
                OutputFormat::Json => print!("{}", to_json(&rows)),
            }
            Ok(())
        }
    }
}
