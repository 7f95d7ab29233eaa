//! Frequency-domain reflection of a single photon off a single-sided cavity,
//! with or without a resonantly coupled two-level atom inside.
//!
//! Everything here is steady-state: a monochromatic input at `omega_p` picks
//! up a complex reflection amplitude and nothing else. The atom-loaded
//! response shows vacuum Rabi splitting; the empty cavity is a pure phase
//! shifter. The difference between the two phase shifts is the Faraday
//! rotation angle used by the entanglement protocols.

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Numerical tolerance for "equals 1" magnitude checks.
pub const MAGNITUDE_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum CavityError {
    #[error("cavity damping rate kappa must be > 0 (got {0})")]
    NonPositiveKappa(f64),
    #[error("{name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be >= 0 (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("detuning range requires min < max (got {min} >= {max})")]
    EmptyRange { min: f64, max: f64 },
    #[error("sweep requires n_points >= 2 (got {0})")]
    TooFewPoints(usize),
}

/// Physical parameters of one atom-cavity node.
///
/// All frequencies and rates are in the same arbitrary unit; the CLI uses
/// units of `kappa`. `g = 0` describes an empty cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Cavity mode frequency.
    pub omega_c: f64,
    /// Atomic transition frequency.
    pub omega_0: f64,
    /// Cavity damping rate (> 0).
    pub kappa: f64,
    /// Atomic decay rate (>= 0).
    pub gamma: f64,
    /// Atom-cavity coupling strength (>= 0).
    pub g: f64,
}

impl CavityParams {
    pub fn new(
        omega_c: f64,
        omega_0: f64,
        kappa: f64,
        gamma: f64,
        g: f64,
    ) -> Result<Self, CavityError> {
        let params = Self { omega_c, omega_0, kappa, gamma, g };
        params.validate()?;
        Ok(params)
    }

    /// Resonant parameters (`omega_0 = omega_c = 0`) in units of `kappa = 1`.
    pub fn resonant(gamma: f64, g: f64) -> Result<Self, CavityError> {
        Self::new(0.0, 0.0, 1.0, gamma, g)
    }

    pub fn validate(&self) -> Result<(), CavityError> {
        for (name, value) in [
            ("omega_c", self.omega_c),
            ("omega_0", self.omega_0),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("g", self.g),
        ] {
            if !value.is_finite() {
                return Err(CavityError::NonFinite { name, value });
            }
        }
        if self.kappa <= 0.0 {
            return Err(CavityError::NonPositiveKappa(self.kappa));
        }
        if self.gamma < 0.0 {
            return Err(CavityError::Negative { name: "gamma", value: self.gamma });
        }
        if self.g < 0.0 {
            return Err(CavityError::Negative { name: "g", value: self.g });
        }
        Ok(())
    }

    /// True when the single-excitation treatment is strained: the weak-drive
    /// assumption behind the reflection formula wants a large cavity decay,
    /// so `gamma > kappa` or `g > 10 kappa` is flagged (not rejected).
    pub fn strained(&self) -> bool {
        self.gamma > self.kappa || self.g > 10.0 * self.kappa
    }

    /// Default operating frequency for the protocols: `omega_c - kappa/2`.
    pub fn operating_frequency(&self) -> f64 {
        self.omega_c - self.kappa / 2.0
    }
}

/// Complex reflection amplitude, with magnitude and principal phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionResult {
    pub amplitude: C64,
    /// `|amplitude|`, <= 1 for physical parameters.
    pub magnitude: f64,
    /// Principal argument of `amplitude`, in (-pi, pi]. The branch at
    /// exactly 180 degrees is fixed to +pi.
    pub phase: f64,
    /// Weak-excitation validity advisory from [`CavityParams::strained`].
    pub strained: bool,
}

impl ReflectionResult {
    fn new(amplitude: C64, strained: bool) -> Self {
        Self { amplitude, magnitude: amplitude.norm(), phase: principal_phase(amplitude), strained }
    }
}

/// Principal argument in (-pi, pi]: `atan2` returns -pi for a negative real
/// with a negatively signed zero imaginary part, which we fold to +pi.
fn principal_phase(z: C64) -> f64 {
    let p = z.arg();
    if p == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        p
    }
}

fn check_omega_p(omega_p: f64) -> Result<(), CavityError> {
    if !omega_p.is_finite() {
        return Err(CavityError::NonFinite { name: "omega_p", value: omega_p });
    }
    Ok(())
}

/// Reflection amplitude of the atom-loaded cavity at probe frequency `omega_p`:
///
/// ```text
/// r = { [i(omega_c - omega_p) - kappa/2][i(omega_0 - omega_p) + gamma/2] + g^2 }
///     { [i(omega_c - omega_p) + kappa/2][i(omega_0 - omega_p) + gamma/2] + g^2 }
/// ```
///
/// `g = 0` decouples the atom and routes through [`reflection_empty`], which
/// also covers the degenerate `gamma = 0`, `omega_p = omega_0` point where
/// the quotient above is 0/0.
pub fn reflection_with_atom(
    params: &CavityParams,
    omega_p: f64,
) -> Result<ReflectionResult, CavityError> {
    params.validate()?;
    check_omega_p(omega_p)?;
    if params.g == 0.0 {
        let empty = reflection_empty(params, omega_p)?;
        return Ok(ReflectionResult { strained: params.strained(), ..empty });
    }
    let cavity_det = params.omega_c - omega_p;
    let atom = C64::new(params.gamma / 2.0, params.omega_0 - omega_p);
    let g_sq = C64::new(params.g * params.g, 0.0);
    let num = C64::new(-params.kappa / 2.0, cavity_det) * atom + g_sq;
    let den = C64::new(params.kappa / 2.0, cavity_det) * atom + g_sq;
    Ok(ReflectionResult::new(num / den, params.strained()))
}

/// Reflection amplitude of the bare cavity:
///
/// ```text
/// r0 = [i(omega_c - omega_p) - kappa/2] / [i(omega_c - omega_p) + kappa/2]
/// ```
///
/// Numerator and denominator have equal modulus, so `|r0| = 1` up to
/// floating-point rounding: the empty cavity only shifts the phase.
pub fn reflection_empty(
    params: &CavityParams,
    omega_p: f64,
) -> Result<ReflectionResult, CavityError> {
    params.validate()?;
    check_omega_p(omega_p)?;
    let cavity_det = params.omega_c - omega_p;
    let num = C64::new(-params.kappa / 2.0, cavity_det);
    let den = C64::new(params.kappa / 2.0, cavity_det);
    Ok(ReflectionResult::new(num / den, params.strained()))
}

/// Faraday rotation angle picked up by a linearly polarized photon.
///
/// The atomic qubit decides which circular component sees the atom, so the
/// rotation flips sign with the qubit: `atom_bit = false` (qubit |0>) gives
/// `phi0 - phi`, `atom_bit = true` gives `phi - phi0`, with `phi` the
/// atom-loaded phase and `phi0` the empty-cavity phase.
pub fn faraday_rotation(
    params: &CavityParams,
    omega_p: f64,
    atom_bit: bool,
) -> Result<f64, CavityError> {
    let phi = reflection_with_atom(params, omega_p)?.phase;
    let phi0 = reflection_empty(params, omega_p)?.phase;
    let theta_minus = phi0 - phi;
    Ok(if atom_bit { -theta_minus } else { theta_minus })
}

/// Reflection coefficients tabulated over a uniform detuning grid.
///
/// Detunings are `(omega_p - omega_c)` in units of `kappa`.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub detuning_over_kappa: Vec<f64>,
    pub with_atom: Vec<ReflectionResult>,
    pub empty: Vec<ReflectionResult>,
}

#[derive(Debug, serde::Serialize)]
struct SweepRow {
    detuning_over_kappa: f64,
    abs_r_atom: f64,
    phase_r_atom: f64,
    abs_r_empty: f64,
    phase_r_empty: f64,
}

impl SweepTable {
    pub fn len(&self) -> usize {
        self.detuning_over_kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning_over_kappa.is_empty()
    }

    fn rows(&self) -> Vec<SweepRow> {
        (0..self.len())
            .map(|i| SweepRow {
                detuning_over_kappa: self.detuning_over_kappa[i],
                abs_r_atom: self.with_atom[i].magnitude,
                phase_r_atom: self.with_atom[i].phase,
                abs_r_empty: self.empty[i].magnitude,
                phase_r_empty: self.empty[i].phase,
            })
            .collect()
    }

    /// CSV with a fixed header, 15 significant digits, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("detuning_over_kappa,abs_r_atom,phase_r_atom,abs_r_empty,phase_r_empty\n");
        for row in self.rows() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                sig15(row.detuning_over_kappa),
                sig15(row.abs_r_atom),
                sig15(row.phase_r_atom),
                sig15(row.abs_r_empty),
                sig15(row.phase_r_empty),
            ));
        }
        out
    }

    /// JSON array of row objects with the same keys as the CSV columns.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.rows()).expect("sweep rows are finite");
        out.push('\n');
        out
    }
}

/// 15 significant digits in scientific notation.
fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Evaluate both reflection coefficients on a uniform grid of
/// `(omega_p - omega_c) / kappa` between `detuning_min` and `detuning_max`.
pub fn sweep_reflection(
    params: &CavityParams,
    detuning_min: f64,
    detuning_max: f64,
    n_points: usize,
) -> Result<SweepTable, CavityError> {
    params.validate()?;
    for (name, value) in [("detuning_min", detuning_min), ("detuning_max", detuning_max)] {
        if !value.is_finite() {
            return Err(CavityError::NonFinite { name, value });
        }
    }
    if detuning_min >= detuning_max {
        return Err(CavityError::EmptyRange { min: detuning_min, max: detuning_max });
    }
    if n_points < 2 {
        return Err(CavityError::TooFewPoints(n_points));
    }

    let mut detuning_over_kappa = Vec::with_capacity(n_points);
    let mut with_atom = Vec::with_capacity(n_points);
    let mut empty = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let t = i as f64 / (n_points - 1) as f64;
        let delta = detuning_min * (1.0 - t) + detuning_max * t;
        let omega_p = params.omega_c + delta * params.kappa;
        detuning_over_kappa.push(delta);
        with_atom.push(reflection_with_atom(params, omega_p)?);
        empty.push(reflection_empty(params, omega_p)?);
    }
    Ok(SweepTable { detuning_over_kappa, with_atom, empty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn fig1_params() -> CavityParams {
        CavityParams::resonant(0.01, 0.5).unwrap()
    }

    #[test]
    fn empty_cavity_on_resonance_is_minus_one() {
        let params = CavityParams::resonant(0.0, 0.0).unwrap();
        let r = reflection_empty(&params, 0.0).unwrap();
        assert_eq!(r.amplitude, C64::new(-1.0, 0.0));
        assert_eq!(r.phase, PI);
    }

    #[test]
    fn empty_cavity_at_half_linewidth_below_is_plus_i() {
        let params = CavityParams::resonant(0.0, 0.0).unwrap();
        let r = reflection_empty(&params, -0.5).unwrap();
        assert!((r.amplitude - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((r.phase - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn empty_cavity_phase_vanishes_far_from_resonance() {
        let params = CavityParams::resonant(0.0, 0.0).unwrap();
        for delta in [50.0, -50.0, 120.0, -1000.0] {
            let r = reflection_empty(&params, delta).unwrap();
            assert!(r.phase.abs() < 0.05, "phase {} at detuning {delta}", r.phase);
        }
    }

    #[test]
    fn atom_loaded_operating_point_is_exactly_minus_one() {
        // gamma = 0, g = kappa/2, probe at omega_c - kappa/2: the phase is pi.
        let params = CavityParams::resonant(0.0, 0.5).unwrap();
        let r = reflection_with_atom(&params, -0.5).unwrap();
        assert_eq!(r.amplitude, C64::new(-1.0, 0.0));
        assert_eq!(r.phase, PI);
    }

    #[test]
    fn atom_loaded_phase_near_pi_with_small_gamma() {
        let r = reflection_with_atom(&fig1_params(), -0.5).unwrap();
        assert!((r.phase - PI).abs() < 0.05, "phase {}", r.phase);
    }

    #[test]
    fn strong_coupling_resonant_reflection_approaches_unity() {
        let mut last = f64::INFINITY;
        for g in [1.0, 10.0, 100.0, 1000.0] {
            let params = CavityParams::resonant(0.0, g).unwrap();
            let r = reflection_with_atom(&params, 0.0).unwrap();
            let dist = (r.amplitude - C64::new(1.0, 0.0)).norm();
            assert!(dist <= last + 1e-15, "not monotone at g={g}");
            if g >= 100.0 {
                assert!(dist < 1e-3, "|r - 1| = {dist} at g={g}");
            }
            last = dist;
        }
    }

    #[test]
    fn decoupled_atom_matches_empty_cavity() {
        let params = CavityParams::new(0.3, -0.2, 2.0, 0.7, 0.0).unwrap();
        for omega_p in [-3.0, -0.5, 0.0, 0.9, 4.0] {
            let with = reflection_with_atom(&params, omega_p).unwrap();
            let empty = reflection_empty(&params, omega_p).unwrap();
            assert_eq!(with.amplitude, empty.amplitude);
        }
    }

    #[test]
    fn decoupled_dark_atom_at_atomic_resonance_is_finite() {
        // g = 0 and gamma = 0 with the probe exactly on the atomic line:
        // without the empty-cavity route this would be 0/0.
        let params = CavityParams::resonant(0.0, 0.0).unwrap();
        let r = reflection_with_atom(&params, 0.0).unwrap();
        assert!(r.amplitude.re.is_finite() && r.amplitude.im.is_finite());
        assert_eq!(r.amplitude, C64::new(-1.0, 0.0));
    }

    #[test]
    fn faraday_rotation_at_operating_point() {
        let params = CavityParams::resonant(0.0, 0.5).unwrap();
        let theta = faraday_rotation(&params, -0.5, false).unwrap();
        assert!((theta - (-FRAC_PI_2)).abs() < 1e-15);
    }

    #[test]
    fn faraday_rotation_is_antisymmetric_in_the_atom_bit() {
        let params = fig1_params();
        for omega_p in [-2.0, -0.5, 0.1, 1.7] {
            let minus = faraday_rotation(&params, omega_p, false).unwrap();
            let plus = faraday_rotation(&params, omega_p, true).unwrap();
            assert_eq!(plus, -minus);
        }
    }

    #[test]
    fn faraday_rotation_vanishes_without_coupling() {
        let params = CavityParams::new(0.0, 0.4, 1.0, 0.3, 0.0).unwrap();
        for omega_p in [-1.2, 0.0, 2.3] {
            assert_eq!(faraday_rotation(&params, omega_p, false).unwrap(), 0.0);
        }
    }

    #[test]
    fn sweep_endpoints_only_for_two_points() {
        let table = sweep_reflection(&fig1_params(), -3.0, 3.0, 2).unwrap();
        assert_eq!(table.detuning_over_kappa, vec![-3.0, 3.0]);
        assert_eq!(table.with_atom.len(), 2);
        assert_eq!(table.empty.len(), 2);
    }

    #[test]
    fn sweep_grid_is_strictly_increasing() {
        let table = sweep_reflection(&fig1_params(), -3.0, 3.0, 601).unwrap();
        assert_eq!(table.len(), 601);
        for w in table.detuning_over_kappa.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn sweep_empty_magnitudes_are_unit() {
        let table = sweep_reflection(&fig1_params(), -3.0, 3.0, 601).unwrap();
        for r in &table.empty {
            assert!((r.magnitude - 1.0).abs() < MAGNITUDE_TOL);
        }
    }

    #[test]
    fn sweep_shows_two_split_resonance_dips() {
        let table = sweep_reflection(&fig1_params(), -3.0, 3.0, 601).unwrap();
        let mags: Vec<f64> = table.with_atom.iter().map(|r| r.magnitude).collect();
        let minima =
            (1..mags.len() - 1).filter(|&i| mags[i] < mags[i - 1] && mags[i] < mags[i + 1]).count();
        assert_eq!(minima, 2);
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        let params = fig1_params();
        assert_eq!(
            sweep_reflection(&params, -3.0, 3.0, 1).unwrap_err(),
            CavityError::TooFewPoints(1)
        );
        assert_eq!(
            sweep_reflection(&params, 3.0, -3.0, 10).unwrap_err(),
            CavityError::EmptyRange { min: 3.0, max: -3.0 }
        );
    }

    #[test]
    fn csv_has_header_and_one_row_per_point() {
        let table = sweep_reflection(&fig1_params(), -1.0, 1.0, 5).unwrap();
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(
            lines[0],
            "detuning_over_kappa,abs_r_atom,phase_r_atom,abs_r_empty,phase_r_empty"
        );
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn json_rows_carry_the_csv_keys() {
        let table = sweep_reflection(&fig1_params(), -1.0, 1.0, 3).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&table.to_json()).unwrap();
        let rows = parsed.as_array().unwrap();
        assert_eq!(rows.len(), 3);
        for key in
            ["detuning_over_kappa", "abs_r_atom", "phase_r_atom", "abs_r_empty", "phase_r_empty"]
        {
            assert!(rows[0].get(key).is_some(), "missing key {key}");
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(matches!(
            CavityParams::new(0.0, 0.0, 0.0, 0.0, 0.5),
            Err(CavityError::NonPositiveKappa(_))
        ));
        assert!(matches!(
            CavityParams::new(0.0, 0.0, 1.0, -0.1, 0.5),
            Err(CavityError::Negative { name: "gamma", .. })
        ));
        assert!(matches!(
            CavityParams::new(0.0, f64::NAN, 1.0, 0.0, 0.5),
            Err(CavityError::NonFinite { name: "omega_0", .. })
        ));
        let params = fig1_params();
        assert!(matches!(
            reflection_with_atom(&params, f64::INFINITY),
            Err(CavityError::NonFinite { name: "omega_p", .. })
        ));
    }

    #[test]
    fn strained_advisory_flags_extreme_parameters() {
        let hot_atom = CavityParams::new(0.0, 0.0, 1.0, 1.5, 0.5).unwrap();
        assert!(reflection_with_atom(&hot_atom, -0.5).unwrap().strained);
        let huge_g = CavityParams::new(0.0, 0.0, 1.0, 0.0, 20.0).unwrap();
        assert!(reflection_with_atom(&huge_g, -0.5).unwrap().strained);
        assert!(!reflection_with_atom(&fig1_params(), -0.5).unwrap().strained);
    }

    /// Log-uniform draw over [1e-3, 1e3].
    fn log_uniform() -> impl Strategy<Value = f64> {
        (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn empty_reflection_is_unimodular(detuning in -1e3f64..1e3, kappa in log_uniform()) {
            let params = CavityParams::new(0.0, 0.0, kappa, 0.0, 0.0).unwrap();
            let r = reflection_empty(&params, detuning * kappa).unwrap();
            prop_assert!((r.magnitude - 1.0).abs() < MAGNITUDE_TOL);
        }

        #[test]
        fn lossless_atom_is_unimodular(
            g in log_uniform(),
            det_c in log_uniform(),
            det_a in log_uniform(),
            sign_c in proptest::bool::ANY,
            sign_a in proptest::bool::ANY,
        ) {
            let omega_0 = if sign_a { det_a } else { -det_a };
            let params = CavityParams::new(
                if sign_c { det_c } else { -det_c }, omega_0, 1.0, 0.0, g).unwrap();
            let r = reflection_with_atom(&params, 0.0).unwrap();
            prop_assert!((r.magnitude - 1.0).abs() < MAGNITUDE_TOL);
        }

        #[test]
        fn decaying_atom_is_passive(
            g in log_uniform(),
            gamma in log_uniform(),
            det_c in log_uniform(),
            det_a in log_uniform(),
            sign_c in proptest::bool::ANY,
            sign_a in proptest::bool::ANY,
        ) {
            let params = CavityParams::new(
                if sign_c { det_c } else { -det_c },
                if sign_a { det_a } else { -det_a },
                1.0, gamma, g).unwrap();
            let r = reflection_with_atom(&params, 0.0).unwrap();
            prop_assert!(r.magnitude <= 1.0 + MAGNITUDE_TOL);
        }

        #[test]
        fn zero_coupling_reduces_to_empty_cavity(
            gamma in log_uniform(),
            det_c in -1e3f64..1e3,
            omega_0 in -1e3f64..1e3,
        ) {
            let params = CavityParams::new(det_c, omega_0, 1.0, gamma, 0.0).unwrap();
            let with = reflection_with_atom(&params, 0.0).unwrap();
            let empty = reflection_empty(&params, 0.0).unwrap();
            prop_assert!((with.amplitude - empty.amplitude).norm() < 1e-14);
        }
    }
}
