//! Command-line front end for the `lowq` binary: flag and config-file
//! parsing into a validated [`RunConfig`], dispatch to the simulation
//! modules, and CSV/JSON report emission.
//!
//! All frequencies and rates are taken in units of the cavity linewidth
//! (`kappa = 1` by default) and the probe defaults to the protocol
//! operating point `omega_c - kappa/2`. Every command writes one report
//! file and prints a one-line summary to stdout; identical inputs (flags,
//! config, seed) produce byte-identical outputs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::cavity::{sweep_reflection, CavityParams};
use crate::efficiency::{monte_carlo_time, LossBudget};
use crate::polarization::NORM_PRE_TOL;
use crate::protocol::{
    entangle_pair, entangle_three, fidelity, pair_target_h, pair_target_v, transfer_atom_to_atom,
    transfer_photon_to_atom, triple_target_minus, triple_target_plus, MeasurementRecord,
    PhaseModel, TransferBranch,
};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "LOWQ_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation or configuration: exit status 2.
    #[error("{0}")]
    Usage(String),
    /// Failure while executing a valid configuration: exit status 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lowq",
    version,
    about = "Single-photon input-output simulator for low-Q atom-cavity nodes",
    subcommand_required = true,
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate reflection coefficients over a detuning grid
    Sweep(SweepArgs),
    /// Herald entanglement between two atoms with one photon
    Entangle2(Entangle2Args),
    /// Herald entanglement between three atoms with one photon
    Entangle3(Entangle3Args),
    /// Teleport a photon polarization state onto atom 2
    TransferPhoton(TransferPhotonArgs),
    /// Teleport atom 1's qubit state onto atom 2
    TransferAtom(TransferAtomArgs),
    /// Loss-budget success statistics, closed form plus Monte Carlo
    Montecarlo(MontecarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFormat::Csv => write!(f, "csv"),
            OutputFormat::Json => write!(f, "json"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Designed phases: r = -1, r0 = i
    Ideal,
    /// Complex reflection amplitudes from the cavity parameters
    Exact,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Ideal => write!(f, "ideal"),
            Mode::Exact => write!(f, "exact"),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
struct CavityArgs {
    /// Cavity damping rate; sets the frequency unit
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Cavity mode frequency
    #[arg(long, allow_negative_numbers = true)]
    omega_c: Option<f64>,
    /// Atomic transition frequency [default: omega-c]
    #[arg(long, allow_negative_numbers = true)]
    omega_0: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
struct IoArgs {
    /// Flat key-value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report file path [default: <command>.<ext> under $LOWQ_OUT_DIR or .]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    cavity: CavityArgs,
    /// Atom-cavity coupling
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Atomic decay rate
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Grid start, (omega_p - omega_c)/kappa
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Grid end, (omega_p - omega_c)/kappa
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of grid points (>= 2)
    #[arg(long)]
    points: Option<usize>,
    /// Report format
    #[arg(long)]
    format: Option<OutputFormat>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct Entangle2Args {
    #[command(flatten)]
    cavity: CavityArgs,
    /// Probe frequency [default: omega-c - kappa/2]
    #[arg(long, allow_negative_numbers = true)]
    omega_p: Option<f64>,
    /// Phase model
    #[arg(long)]
    mode: Option<Mode>,
    /// Atom 1 |0> coefficient, "re" or "re,im" [default: 1/sqrt(2)]
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<String>,
    /// Atom 1 |1> coefficient [default: 1/sqrt(2)]
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<String>,
    /// Atom 2 |0> coefficient [default: 1/sqrt(2)]
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<String>,
    /// Atom 2 |1> coefficient [default: 1/sqrt(2)]
    #[arg(long, allow_hyphen_values = true)]
    beta2: Option<String>,
    /// Coupling for both cavities
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Decay rate for both cavities
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Cavity 1 coupling override
    #[arg(long, allow_negative_numbers = true)]
    g1: Option<f64>,
    /// Cavity 1 decay override
    #[arg(long, allow_negative_numbers = true)]
    gamma1: Option<f64>,
    /// Cavity 2 coupling override
    #[arg(long, allow_negative_numbers = true)]
    g2: Option<f64>,
    /// Cavity 2 decay override
    #[arg(long, allow_negative_numbers = true)]
    gamma2: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct Entangle3Args {
    #[command(flatten)]
    cavity: CavityArgs,
    /// Probe frequency [default: omega-c - kappa/2]
    #[arg(long, allow_negative_numbers = true)]
    omega_p: Option<f64>,
    /// Phase model
    #[arg(long)]
    mode: Option<Mode>,
    /// Atom n |0> and |1> coefficients [default: 1/sqrt(2)]
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta3: Option<String>,
    /// Coupling for all cavities
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Decay rate for all cavities
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g3: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma3: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct TransferPhotonArgs {
    #[command(flatten)]
    cavity: CavityArgs,
    /// Probe frequency [default: omega-c - kappa/2]
    #[arg(long, allow_negative_numbers = true)]
    omega_p: Option<f64>,
    /// Phase model
    #[arg(long)]
    mode: Option<Mode>,
    /// Photon |h> coefficient, "re" or "re,im" (required)
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Photon |v> coefficient (required)
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Cavity 1 coupling
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Cavity 1 decay rate
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct TransferAtomArgs {
    #[command(flatten)]
    cavity: CavityArgs,
    /// Probe frequency [default: omega-c - kappa/2]
    #[arg(long, allow_negative_numbers = true)]
    omega_p: Option<f64>,
    /// Phase model
    #[arg(long)]
    mode: Option<Mode>,
    /// Atom 1 |0> coefficient, "re" or "re,im" (required)
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<String>,
    /// Atom 1 |1> coefficient (required)
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<String>,
    /// Coupling for both cavities
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Decay rate for both cavities
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma2: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Args)]
struct MontecarloArgs {
    /// Per-atom decay failure fraction
    #[arg(long, allow_negative_numbers = true)]
    atom_decay: Option<f64>,
    /// Number of atoms the photon visits
    #[arg(long)]
    n_atoms: Option<usize>,
    /// Detector efficiency factor
    #[arg(long, allow_negative_numbers = true)]
    detector_factor: Option<f64>,
    /// Fiber/mirror loss fraction
    #[arg(long, allow_negative_numbers = true)]
    optical_loss: Option<f64>,
    /// Photon source rate per second
    #[arg(long, allow_negative_numbers = true)]
    rate: Option<f64>,
    /// Number of Monte Carlo trials (required)
    #[arg(long)]
    trials: Option<u64>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    io: IoArgs,
}

/// A fully validated run: everything numeric is checked before any
/// computation starts.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandConfig,
    pub output: PathBuf,
}

#[derive(Debug, Clone)]
pub enum CommandConfig {
    Sweep { params: CavityParams, from: f64, to: f64, points: usize, format: OutputFormat },
    Entangle2 { coeffs: [(C64, C64); 2], model: PhaseModel, mode: Mode },
    Entangle3 { coeffs: [(C64, C64); 3], model: PhaseModel, mode: Mode },
    TransferPhoton { x: C64, y: C64, model: PhaseModel, mode: Mode },
    TransferAtom { alpha1: C64, beta1: C64, model: PhaseModel, mode: Mode },
    Montecarlo { budget: LossBudget, trials: u64, seed: u64 },
}

/// Parse an argument vector (including the binary name) into a validated
/// [`RunConfig`]. Flags override config-file values; unknown config keys
/// are rejected by name.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::usage(e.to_string()))?;
    finish(cli)
}

/// Validate a parsed command line (after merging any config file).
pub fn finish(cli: Cli) -> Result<RunConfig, CliError> {
    match cli.command {
        Command::Sweep(args) => finish_sweep(args),
        Command::Entangle2(args) => finish_entangle2(args),
        Command::Entangle3(args) => finish_entangle3(args),
        Command::TransferPhoton(args) => finish_transfer_photon(args),
        Command::TransferAtom(args) => finish_transfer_atom(args),
        Command::Montecarlo(args) => finish_montecarlo(args),
    }
}

// ---------------------------------------------------------------------------
// config-file loading

/// Key-value pairs from a flat config file: `key = value` per line, `#`
/// comments allowed.
fn load_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "config file {}:{}: expected `key = value`, got `{raw}`",
                path.display(),
                lineno + 1
            )));
        };
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn parse_value<V: std::str::FromStr>(key: &str, value: &str, kind: &str) -> Result<V, CliError>
where
    V::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::usage(format!("config key `{key}`: invalid {kind} `{value}`: {e}")))
}

/// Fill `slot` from the config file unless a flag already set it. The value
/// is parsed either way so malformed files never pass silently.
fn fill<V: std::str::FromStr>(
    slot: &mut Option<V>,
    key: &str,
    value: &str,
    kind: &str,
) -> Result<(), CliError>
where
    V::Err: fmt::Display,
{
    let parsed: V = parse_value(key, value, kind)?;
    if slot.is_none() {
        *slot = Some(parsed);
    }
    Ok(())
}

fn fill_f64(slot: &mut Option<f64>, key: &str, value: &str) -> Result<(), CliError> {
    fill(slot, key, value, "number")
}

fn fill_string(slot: &mut Option<String>, value: &str) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(value.to_string());
    }
    Ok(())
}

fn fill_format(slot: &mut Option<OutputFormat>, key: &str, value: &str) -> Result<(), CliError> {
    let parsed = match value {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        other => {
            return Err(CliError::usage(format!(
                "config key `{key}`: invalid format `{other}` (expected csv or json)"
            )))
        }
    };
    if slot.is_none() {
        *slot = Some(parsed);
    }
    Ok(())
}

fn fill_mode(slot: &mut Option<Mode>, key: &str, value: &str) -> Result<(), CliError> {
    let parsed = match value {
        "ideal" => Mode::Ideal,
        "exact" => Mode::Exact,
        other => {
            return Err(CliError::usage(format!(
                "config key `{key}`: invalid mode `{other}` (expected ideal or exact)"
            )))
        }
    };
    if slot.is_none() {
        *slot = Some(parsed);
    }
    Ok(())
}

fn fill_output(slot: &mut Option<PathBuf>, value: &str) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(PathBuf::from(value));
    }
    Ok(())
}

fn unknown_key(command: &str, key: &str) -> CliError {
    CliError::usage(format!("config file: unknown key `{key}` for command {command}"))
}

fn fill_cavity(cavity: &mut CavityArgs, key: &str, value: &str) -> Result<bool, CliError> {
    match key {
        "kappa" => fill_f64(&mut cavity.kappa, key, value)?,
        "omega-c" => fill_f64(&mut cavity.omega_c, key, value)?,
        "omega-0" => fill_f64(&mut cavity.omega_0, key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// shared validation helpers

fn require<V>(slot: Option<V>, name: &str) -> Result<V, CliError> {
    slot.ok_or_else(|| CliError::usage(format!("missing required field: {name}")))
}

fn parse_complex(name: &str, text: &str) -> Result<C64, CliError> {
    let bad = || CliError::usage(format!("{name}: expected `re` or `re,im`, got `{text}`"));
    let mut parts = text.split(',');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(s) => s.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

fn coefficient(slot: &Option<String>, name: &str) -> Result<C64, CliError> {
    match slot {
        Some(text) => parse_complex(name, text),
        None => Ok(C64::new(FRAC_1_SQRT_2, 0.0)),
    }
}

fn check_pair_normalized(name: &str, a: C64, b: C64) -> Result<(), CliError> {
    let norm_sq = a.norm_sqr() + b.norm_sqr();
    if (norm_sq - 1.0).abs() > NORM_PRE_TOL {
        return Err(CliError::usage(format!(
            "{name} must be normalized: |a|^2 + |b|^2 = {norm_sq}"
        )));
    }
    Ok(())
}

struct CavityDefaults {
    kappa: f64,
    omega_c: f64,
    omega_0: f64,
}

impl CavityDefaults {
    fn from_args(cavity: &CavityArgs) -> Self {
        let kappa = cavity.kappa.unwrap_or(1.0);
        let omega_c = cavity.omega_c.unwrap_or(0.0);
        let omega_0 = cavity.omega_0.unwrap_or(omega_c);
        Self { kappa, omega_c, omega_0 }
    }

    fn params(&self, g: f64, gamma: f64) -> Result<CavityParams, CliError> {
        CavityParams::new(self.omega_c, self.omega_0, self.kappa, gamma, g)
            .map_err(|e| CliError::usage(e.to_string()))
    }

    fn default_omega_p(&self) -> f64 {
        self.omega_c - self.kappa / 2.0
    }
}

const DEFAULT_G: f64 = 0.5;
const DEFAULT_GAMMA: f64 = 0.01;

fn build_model(
    base: &CavityDefaults,
    mode: Mode,
    omega_p: Option<f64>,
    per_cavity: &[(Option<f64>, Option<f64>)],
    shared_g: Option<f64>,
    shared_gamma: Option<f64>,
) -> Result<PhaseModel, CliError> {
    let omega_p = omega_p.unwrap_or_else(|| base.default_omega_p());
    if !omega_p.is_finite() {
        return Err(CliError::usage(format!("omega-p must be finite (got {omega_p})")));
    }
    match mode {
        Mode::Ideal => Ok(PhaseModel::Ideal),
        Mode::Exact => {
            let mut cavities = Vec::with_capacity(per_cavity.len());
            for (g_i, gamma_i) in per_cavity {
                let g = g_i.or(shared_g).unwrap_or(DEFAULT_G);
                let gamma = gamma_i.or(shared_gamma).unwrap_or(DEFAULT_GAMMA);
                cavities.push(base.params(g, gamma)?);
            }
            Ok(PhaseModel::Exact { cavities, omega_p })
        }
    }
}

fn resolve_output(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    match explicit {
        Some(path) => path,
        None => {
            let dir = std::env::var_os(OUTPUT_DIR_ENV).unwrap_or_else(|| ".".into());
            Path::new(&dir).join(default_name)
        }
    }
}

// ---------------------------------------------------------------------------
// per-command merge + validation

fn finish_sweep(mut args: SweepArgs) -> Result<RunConfig, CliError> {
    if let Some(config) = args.io.config.clone() {
        for (key, value) in load_config_file(&config)? {
            if fill_cavity(&mut args.cavity, &key, &value)? {
                continue;
            }
            match key.as_str() {
                "g" => fill_f64(&mut args.g, &key, &value)?,
                "gamma" => fill_f64(&mut args.gamma, &key, &value)?,
                "from" => fill_f64(&mut args.from, &key, &value)?,
                "to" => fill_f64(&mut args.to, &key, &value)?,
                "points" => fill(&mut args.points, &key, &value, "integer")?,
                "format" => fill_format(&mut args.format, &key, &value)?,
                "output" => fill_output(&mut args.io.output, &value)?,
                _ => return Err(unknown_key("sweep", &key)),
            }
        }
    }

    let base = CavityDefaults::from_args(&args.cavity);
    let params = base.params(args.g.unwrap_or(DEFAULT_G), args.gamma.unwrap_or(DEFAULT_GAMMA))?;
    let from = require(args.from, "from")?;
    let to = require(args.to, "to")?;
    let points = require(args.points, "points")?;
    if !from.is_finite() || !to.is_finite() || from >= to {
        return Err(CliError::usage(format!(
            "sweep range requires from < to (got {from} .. {to})"
        )));
    }
    if points < 2 {
        return Err(CliError::usage(format!("points must be at least 2 (got {points})")));
    }
    let format = args.format.unwrap_or(OutputFormat::Csv);
    let default_name = match format {
        OutputFormat::Csv => "sweep.csv",
        OutputFormat::Json => "sweep.json",
    };
    Ok(RunConfig {
        command: CommandConfig::Sweep { params, from, to, points, format },
        output: resolve_output(args.io.output, default_name),
    })
}

fn finish_entangle2(mut args: Entangle2Args) -> Result<RunConfig, CliError> {
    if let Some(config) = args.io.config.clone() {
        for (key, value) in load_config_file(&config)? {
            if fill_cavity(&mut args.cavity, &key, &value)? {
                continue;
            }
            match key.as_str() {
                "omega-p" => fill_f64(&mut args.omega_p, &key, &value)?,
                "mode" => fill_mode(&mut args.mode, &key, &value)?,
                "alpha1" => fill_string(&mut args.alpha1, &value)?,
                "beta1" => fill_string(&mut args.beta1, &value)?,
                "alpha2" => fill_string(&mut args.alpha2, &value)?,
                "beta2" => fill_string(&mut args.beta2, &value)?,
                "g" => fill_f64(&mut args.g, &key, &value)?,
                "gamma" => fill_f64(&mut args.gamma, &key, &value)?,
                "g1" => fill_f64(&mut args.g1, &key, &value)?,
                "gamma1" => fill_f64(&mut args.gamma1, &key, &value)?,
                "g2" => fill_f64(&mut args.g2, &key, &value)?,
                "gamma2" => fill_f64(&mut args.gamma2, &key, &value)?,
                "output" => fill_output(&mut args.io.output, &value)?,
                _ => return Err(unknown_key("entangle2", &key)),
            }
        }
    }

    let alpha1 = coefficient(&args.alpha1, "alpha1")?;
    let beta1 = coefficient(&args.beta1, "beta1")?;
    let alpha2 = coefficient(&args.alpha2, "alpha2")?;
    let beta2 = coefficient(&args.beta2, "beta2")?;
    check_pair_normalized("atom 1 coefficients", alpha1, beta1)?;
    check_pair_normalized("atom 2 coefficients", alpha2, beta2)?;

    let base = CavityDefaults::from_args(&args.cavity);
    let mode = args.mode.unwrap_or(Mode::Ideal);
    let model = build_model(
        &base,
        mode,
        args.omega_p,
        &[(args.g1, args.gamma1), (args.g2, args.gamma2)],
        args.g,
        args.gamma,
    )?;
    Ok(RunConfig {
        command: CommandConfig::Entangle2 {
            coeffs: [(alpha1, beta1), (alpha2, beta2)],
            model,
            mode,
        },
        output: resolve_output(args.io.output, "entangle2.json"),
    })
}

fn finish_entangle3(mut args: Entangle3Args) -> Result<RunConfig, CliError> {
    if let Some(config) = args.io.config.clone() {
        for (key, value) in load_config_file(&config)? {
            if fill_cavity(&mut args.cavity, &key, &value)? {
                continue;
            }
            match key.as_str() {
                "omega-p" => fill_f64(&mut args.omega_p, &key, &value)?,
                "mode" => fill_mode(&mut args.mode, &key, &value)?,
                "alpha1" => fill_string(&mut args.alpha1, &value)?,
                "beta1" => fill_string(&mut args.beta1, &value)?,
                "alpha2" => fill_string(&mut args.alpha2, &value)?,
                "beta2" => fill_string(&mut args.beta2, &value)?,
                "alpha3" => fill_string(&mut args.alpha3, &value)?,
                "beta3" => fill_string(&mut args.beta3, &value)?,
                "g" => fill_f64(&mut args.g, &key, &value)?,
                "gamma" => fill_f64(&mut args.gamma, &key, &value)?,
                "g1" => fill_f64(&mut args.g1, &key, &value)?,
                "gamma1" => fill_f64(&mut args.gamma1, &key, &value)?,
                "g2" => fill_f64(&mut args.g2, &key, &value)?,
                "gamma2" => fill_f64(&mut args.gamma2, &key, &value)?,
                "g3" => fill_f64(&mut args.g3, &key, &value)?,
                "gamma3" => fill_f64(&mut args.gamma3, &key, &value)?,
                "output" => fill_output(&mut args.io.output, &value)?,
                _ => return Err(unknown_key("entangle3", &key)),
            }
        }
    }

    let alpha1 = coefficient(&args.alpha1, "alpha1")?;
    let beta1 = coefficient(&args.beta1, "beta1")?;
    let alpha2 = coefficient(&args.alpha2, "alpha2")?;
    let beta2 = coefficient(&args.beta2, "beta2")?;
    let alpha3 = coefficient(&args.alpha3, "alpha3")?;
    let beta3 = coefficient(&args.beta3, "beta3")?;
    check_pair_normalized("atom 1 coefficients", alpha1, beta1)?;
    check_pair_normalized("atom 2 coefficients", alpha2, beta2)?;
    check_pair_normalized("atom 3 coefficients", alpha3, beta3)?;

    let base = CavityDefaults::from_args(&args.cavity);
    let mode = args.mode.unwrap_or(Mode::Ideal);
    let model = build_model(
        &base,
        mode,
        args.omega_p,
        &[(args.g1, args.gamma1), (args.g2, args.gamma2), (args.g3, args.gamma3)],
        args.g,
        args.gamma,
    )?;
    Ok(RunConfig {
        command: CommandConfig::Entangle3 {
            coeffs: [(alpha1, beta1), (alpha2, beta2), (alpha3, beta3)],
            model,
            mode,
        },
        output: resolve_output(args.io.output, "entangle3.json"),
    })
}

fn finish_transfer_photon(mut args: TransferPhotonArgs) -> Result<RunConfig, CliError> {
    if let Some(config) = args.io.config.clone() {
        for (key, value) in load_config_file(&config)? {
            if fill_cavity(&mut args.cavity, &key, &value)? {
                continue;
            }
            match key.as_str() {
                "omega-p" => fill_f64(&mut args.omega_p, &key, &value)?,
                "mode" => fill_mode(&mut args.mode, &key, &value)?,
                "x" => fill_string(&mut args.x, &value)?,
                "y" => fill_string(&mut args.y, &value)?,
                "g" => fill_f64(&mut args.g, &key, &value)?,
                "gamma" => fill_f64(&mut args.gamma, &key, &value)?,
                "output" => fill_output(&mut args.io.output, &value)?,
                _ => return Err(unknown_key("transfer-photon", &key)),
            }
        }
    }

    let x = parse_complex("x", &require(args.x, "x")?)?;
    let y = parse_complex("y", &require(args.y, "y")?)?;
    check_pair_normalized("photon coefficients", x, y)?;

    let base = CavityDefaults::from_args(&args.cavity);
    let mode = args.mode.unwrap_or(Mode::Ideal);
    let model = build_model(&base, mode, args.omega_p, &[(None, None)], args.g, args.gamma)?;
    Ok(RunConfig {
        command: CommandConfig::TransferPhoton { x, y, model, mode },
        output: resolve_output(args.io.output, "transfer-photon.json"),
    })
}

fn finish_transfer_atom(mut args: TransferAtomArgs) -> Result<RunConfig, CliError> {
    if let Some(config) = args.io.config.clone() {
        for (key, value) in load_config_file(&config)? {
            if fill_cavity(&mut args.cavity, &key, &value)? {
                continue;
            }
            match key.as_str() {
                "omega-p" => fill_f64(&mut args.omega_p, &key, &value)?,
                "mode" => fill_mode(&mut args.mode, &key, &value)?,
                "alpha1" => fill_string(&mut args.alpha1, &value)?,
                "beta1" => fill_string(&mut args.beta1, &value)?,
                "g" => fill_f64(&mut args.g, &key, &value)?,
                "gamma" => fill_f64(&mut args.gamma, &key, &value)?,
                "g1" => fill_f64(&mut args.g1, &key, &value)?,
                "gamma1" => fill_f64(&mut args.gamma1, &key, &value)?,
                "g2" => fill_f64(&mut args.g2, &key, &value)?,
                "gamma2" => fill_f64(&mut args.gamma2, &key, &value)?,
                "output" => fill_output(&mut args.io.output, &value)?,
                _ => return Err(unknown_key("transfer-atom", &key)),
            }
        }
    }

    let alpha1 = parse_complex("alpha1", &require(args.alpha1, "alpha1")?)?;
    let beta1 = parse_complex("beta1", &require(args.beta1, "beta1")?)?;
    check_pair_normalized("atom 1 coefficients", alpha1, beta1)?;

    let base = CavityDefaults::from_args(&args.cavity);
    let mode = args.mode.unwrap_or(Mode::Ideal);
    let model = build_model(
        &base,
        mode,
        args.omega_p,
        &[(args.g1, args.gamma1), (args.g2, args.gamma2)],
        args.g,
        args.gamma,
    )?;
    Ok(RunConfig {
        command: CommandConfig::TransferAtom { alpha1, beta1, model, mode },
        output: resolve_output(args.io.output, "transfer-atom.json"),
    })
}

fn finish_montecarlo(mut args: MontecarloArgs) -> Result<RunConfig, CliError> {
    if let Some(config) = args.io.config.clone() {
        for (key, value) in load_config_file(&config)? {
            match key.as_str() {
                "atom-decay" => fill_f64(&mut args.atom_decay, &key, &value)?,
                "n-atoms" => fill(&mut args.n_atoms, &key, &value, "integer")?,
                "detector-factor" => fill_f64(&mut args.detector_factor, &key, &value)?,
                "optical-loss" => fill_f64(&mut args.optical_loss, &key, &value)?,
                "rate" => fill_f64(&mut args.rate, &key, &value)?,
                "trials" => fill(&mut args.trials, &key, &value, "integer")?,
                "seed" => fill(&mut args.seed, &key, &value, "integer")?,
                "output" => fill_output(&mut args.io.output, &value)?,
                _ => return Err(unknown_key("montecarlo", &key)),
            }
        }
    }

    let reference = LossBudget::reference();
    let budget = LossBudget::new(
        args.atom_decay.unwrap_or(reference.atom_decay_fraction),
        args.n_atoms.unwrap_or(reference.n_atoms),
        args.detector_factor.unwrap_or(reference.detector_factor),
        args.optical_loss.unwrap_or(reference.optical_loss_fraction),
        args.rate.unwrap_or(reference.photon_rate),
    )
    .map_err(|e| CliError::usage(e.to_string()))?;
    let trials = require(args.trials, "trials")?;
    if trials < 1 {
        return Err(CliError::usage(format!("trials must be at least 1 (got {trials})")));
    }
    Ok(RunConfig {
        command: CommandConfig::Montecarlo { budget, trials, seed: args.seed.unwrap_or(1) },
        output: resolve_output(args.io.output, "montecarlo.json"),
    })
}

// ---------------------------------------------------------------------------
// execution and reports

#[derive(Serialize)]
struct BranchReport {
    outcome: String,
    probability: f64,
    amplitudes: Vec<[f64; 2]>,
    fidelity_to_target: Option<f64>,
    correction: Option<&'static str>,
}

#[derive(Serialize)]
struct ProtocolReport {
    protocol: &'static str,
    mode: String,
    success_probability: f64,
    branches: Vec<BranchReport>,
}

fn re_im(amps: &[C64]) -> Vec<[f64; 2]> {
    amps.iter().map(|a| [a.re, a.im]).collect()
}

fn record_report(
    record: &MeasurementRecord,
    target: Option<&[C64]>,
) -> Result<BranchReport, CliError> {
    let fidelity_to_target = match target {
        Some(t) if record.probability > 0.0 => Some(
            fidelity(record.post_state.amplitudes(), t)
                .map_err(|e| CliError::runtime(e.to_string()))?,
        ),
        _ => None,
    };
    Ok(BranchReport {
        outcome: record.outcome.clone(),
        probability: record.probability,
        amplitudes: re_im(record.post_state.amplitudes()),
        fidelity_to_target,
        correction: None,
    })
}

fn transfer_report(
    branches: &[TransferBranch],
    target: [C64; 2],
) -> Result<Vec<BranchReport>, CliError> {
    branches
        .iter()
        .map(|b| {
            let f = fidelity(&b.recovered_state, &target)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            Ok(BranchReport {
                outcome: format!("{}{}", b.photon.label(), b.atom.label()),
                probability: b.probability,
                amplitudes: re_im(&b.recovered_state),
                fidelity_to_target: Some(f),
                correction: Some(b.correction),
            })
        })
        .collect()
}

fn to_json_line(value: &impl Serialize) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("report serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn write_report(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

/// Execute a validated configuration: write the report file and return the
/// one-line summary for stdout.
pub fn run(config: &RunConfig) -> Result<String, CliError> {
    match &config.command {
        CommandConfig::Sweep { params, from, to, points, format } => {
            let table = sweep_reflection(params, *from, *to, *points)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            let content = match format {
                OutputFormat::Csv => table.to_csv(),
                OutputFormat::Json => table.to_json(),
            };
            write_report(&config.output, &content)?;
            let min_mag = table.with_atom.iter().map(|r| r.magnitude).fold(f64::INFINITY, f64::min);
            Ok(format!(
                "sweep: {points} points in [{from}, {to}] (units of kappa); min |r_atom| = {min_mag:.6}; wrote {}",
                config.output.display()
            ))
        }
        CommandConfig::Entangle2 { coeffs, model, mode } => {
            let [(a1, b1), (a2, b2)] = *coeffs;
            let out = entangle_pair(a1, b1, a2, b2, model)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            let h_target = pair_target_h(a1, b1, a2, b2);
            let v_target = pair_target_v(a1, b1, a2, b2);
            let report = ProtocolReport {
                protocol: "entangle2",
                mode: mode.to_string(),
                success_probability: out.success_probability(),
                branches: vec![
                    record_report(&out.h, h_target.as_ref().map(|t| t.as_slice()))?,
                    record_report(&out.v, v_target.as_ref().map(|t| t.as_slice()))?,
                ],
            };
            write_report(&config.output, &to_json_line(&report)?)?;
            Ok(format!(
                "entangle2 ({mode}): P(h) = {:.6}, P(v) = {:.6}, success = {:.6}; wrote {}",
                out.h.probability,
                out.v.probability,
                out.success_probability(),
                config.output.display()
            ))
        }
        CommandConfig::Entangle3 { coeffs, model, mode } => {
            let out =
                entangle_three(coeffs, model).map_err(|e| CliError::runtime(e.to_string()))?;
            let plus_target = triple_target_plus(coeffs);
            let minus_target = triple_target_minus(coeffs);
            let report = ProtocolReport {
                protocol: "entangle3",
                mode: mode.to_string(),
                success_probability: out.success_probability(),
                branches: vec![
                    record_report(&out.plus, plus_target.as_ref().map(|t| t.as_slice()))?,
                    record_report(&out.minus, minus_target.as_ref().map(|t| t.as_slice()))?,
                ],
            };
            write_report(&config.output, &to_json_line(&report)?)?;
            Ok(format!(
                "entangle3 ({mode}): P(plus) = {:.6}, P(minus) = {:.6}, success = {:.6}; wrote {}",
                out.plus.probability,
                out.minus.probability,
                out.success_probability(),
                config.output.display()
            ))
        }
        CommandConfig::TransferPhoton { x, y, model, mode } => {
            let branches = transfer_photon_to_atom(*x, *y, model)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            summarize_transfer("transfer-photon", *mode, &branches, [*x, *y], config)
        }
        CommandConfig::TransferAtom { alpha1, beta1, model, mode } => {
            let branches = transfer_atom_to_atom(*alpha1, *beta1, model)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            summarize_transfer("transfer-atom", *mode, &branches, [*alpha1, *beta1], config)
        }
        CommandConfig::Montecarlo { budget, trials, seed } => {
            let stats = monte_carlo_time(budget, *seed, *trials)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            write_report(&config.output, &to_json_line(&stats)?)?;
            Ok(format!(
                "montecarlo: p_success = {:.6e}, expected_time = {:.6} s, mc_mean = {:.6} s ({} trials, seed {}); wrote {}",
                stats.p_success,
                stats.expected_time_s,
                stats.mc_mean_s.unwrap_or(f64::NAN),
                trials,
                seed,
                config.output.display()
            ))
        }
    }
}

fn summarize_transfer(
    name: &'static str,
    mode: Mode,
    branches: &[TransferBranch],
    target: [C64; 2],
    config: &RunConfig,
) -> Result<String, CliError> {
    let rows = transfer_report(branches, target)?;
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    let min_fidelity =
        rows.iter().filter_map(|r| r.fidelity_to_target).fold(f64::INFINITY, f64::min);
    let report = ProtocolReport {
        protocol: name,
        mode: mode.to_string(),
        success_probability: total,
        branches: rows,
    };
    write_report(&config.output, &to_json_line(&report)?)?;
    Ok(format!(
        "{name} ({mode}): 4 branches, success = {total:.6}, min fidelity = {min_fidelity:.6}; wrote {}",
        config.output.display()
    ))
}

/// Full binary entry point: parse, validate, run, map errors to exit codes.
/// Clap handles its own errors (usage text on stderr, exit status 2).
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match finish(cli).and_then(|config| run(&config)) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_style_sweep_flags_parse() {
        let config = parse_config([
            "lowq", "sweep", "--g", "0.5", "--gamma", "0.01", "--from", "-3", "--to", "3",
            "--points", "601",
        ])
        .unwrap();
        match config.command {
            CommandConfig::Sweep { params, from, to, points, format } => {
                assert_eq!(params.g, 0.5);
                assert_eq!(params.gamma, 0.01);
                assert_eq!(params.kappa, 1.0);
                assert_eq!((from, to, points), (-3.0, 3.0, 601));
                assert_eq!(format, OutputFormat::Csv);
            }
            other => panic!("unexpected command {other:?}"),
        }
    }

    #[test]
    fn sweep_with_one_point_names_the_field() {
        let err = parse_config(["lowq", "sweep", "--from", "-3", "--to", "3", "--points", "1"])
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("points"), "{err}");
    }

    #[test]
    fn missing_required_fields_are_named() {
        let err = parse_config(["lowq", "sweep", "--from", "-3", "--to", "3"]).unwrap_err();
        assert!(err.to_string().contains("missing required field: points"), "{err}");
        let err = parse_config(["lowq", "montecarlo"]).unwrap_err();
        assert!(err.to_string().contains("missing required field: trials"), "{err}");
    }

    #[test]
    fn malformed_numbers_are_usage_errors() {
        let err = parse_config(["lowq", "sweep", "--from", "-3", "--to", "3", "--points", "lots"])
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err =
            parse_config(["lowq", "transfer-photon", "--x", "1", "--y", "0,0,0"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("y"), "{err}");
    }

    #[test]
    fn unknown_commands_are_rejected() {
        let err = parse_config(["lowq", "entangle9"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unnormalized_coefficients_are_rejected() {
        let err = parse_config(["lowq", "entangle2", "--alpha1", "1", "--beta1", "1"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("normalized"), "{err}");
    }

    #[test]
    fn exact_mode_builds_per_cavity_parameters() {
        let config = parse_config([
            "lowq",
            "entangle2",
            "--mode",
            "exact",
            "--g",
            "0.5",
            "--gamma",
            "0.01",
            "--g2",
            "0.6",
        ])
        .unwrap();
        match config.command {
            CommandConfig::Entangle2 { model: PhaseModel::Exact { cavities, omega_p }, .. } => {
                assert_eq!(cavities.len(), 2);
                assert_eq!(cavities[0].g, 0.5);
                assert_eq!(cavities[1].g, 0.6);
                assert_eq!(cavities[1].gamma, 0.01);
                assert_eq!(omega_p, -0.5);
            }
            other => panic!("unexpected command {other:?}"),
        }
    }

    #[test]
    fn config_file_fills_gaps_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# reference sweep\nfrom = -3\nto = 3\npoints = 11\ng = 0.9\n")
            .unwrap();
        let config =
            parse_config(["lowq", "sweep", "--config", path.to_str().unwrap(), "--points", "5"])
                .unwrap();
        match config.command {
            CommandConfig::Sweep { params, points, .. } => {
                assert_eq!(points, 5); // flag beats file
                assert_eq!(params.g, 0.9); // file fills the gap
            }
            other => panic!("unexpected command {other:?}"),
        }
    }

    #[test]
    fn unknown_config_keys_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "pointz = 601\n").unwrap();
        let err = parse_config(["lowq", "sweep", "--config", path.to_str().unwrap()]).unwrap_err();
        assert!(err.to_string().contains("pointz"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn complex_coefficients_accept_imaginary_parts() {
        let config =
            parse_config(["lowq", "transfer-photon", "--x", "0.6", "--y", "0,-0.8"]).unwrap();
        match config.command {
            CommandConfig::TransferPhoton { x, y, .. } => {
                assert_eq!(x, C64::new(0.6, 0.0));
                assert_eq!(y, C64::new(0.0, -0.8));
            }
            other => panic!("unexpected command {other:?}"),
        }
    }
}
