//! Heralded entanglement of two or three atoms by a single photon, plus the
//! conversion of an entangled atom pair into a photon pair.

use num_complex::Complex64 as C64;

use super::state::{MeasurementRecord, Plate, SystemState};
use super::{check_normalized, PhaseModel, ProtocolError};
use crate::polarization::{Basis, PolarizationState};

/// Both heralding branches of the two-atom protocol.
///
/// Detecting `h` projects the atoms onto the odd-parity state
/// `a1 b2 |01> + b1 a2 |10>`, detecting `v` onto `a1 a2 |00> - b1 b2 |11>`
/// (up to global phases and normalization).
#[derive(Debug, Clone)]
pub struct PairBranches {
    pub h: MeasurementRecord,
    pub v: MeasurementRecord,
}

impl PairBranches {
    /// Probability that the heralding photon survives to the detector.
    pub fn success_probability(&self) -> f64 {
        self.h.probability + self.v.probability
    }
}

/// Scatter one diagonally polarized photon off both cavities in turn and
/// detect it behind the diagonal-basis plate.
pub fn entangle_pair(
    alpha1: C64,
    beta1: C64,
    alpha2: C64,
    beta2: C64,
    model: &PhaseModel,
) -> Result<PairBranches, ProtocolError> {
    check_normalized("atom 1 coefficients", alpha1, beta1)?;
    check_normalized("atom 2 coefficients", alpha2, beta2)?;
    let state = SystemState::product(
        &PolarizationState::diagonal_circular(),
        &[[alpha1, beta1], [alpha2, beta2]],
    )?
    .scatter(1, model)?
    .scatter(2, model)?
    .qwp_photon()?;
    let mut records = state.detect_photon(Plate::Diag)?.into_iter();
    Ok(PairBranches {
        h: records.next().expect("two detection branches"),
        v: records.next().expect("two detection branches"),
    })
}

/// Both heralding branches of the three-atom protocol. `plus` corresponds to
/// detecting the photon in `(|h> + i|v>)/sqrt(2)`, `minus` in
/// `(|h> - i|v>)/sqrt(2)`.
#[derive(Debug, Clone)]
pub struct TripleBranches {
    pub plus: MeasurementRecord,
    pub minus: MeasurementRecord,
}

impl TripleBranches {
    pub fn success_probability(&self) -> f64 {
        self.plus.probability + self.minus.probability
    }
}

/// Scatter one photon off three cavities in turn and detect it behind the
/// circular-basis plate.
pub fn entangle_three(
    coeffs: &[(C64, C64); 3],
    model: &PhaseModel,
) -> Result<TripleBranches, ProtocolError> {
    for (i, (alpha, beta)) in coeffs.iter().enumerate() {
        check_normalized(ATOM_NAMES[i], *alpha, *beta)?;
    }
    let atoms: Vec<[C64; 2]> = coeffs.iter().map(|&(a, b)| [a, b]).collect();
    let mut state = SystemState::product(&PolarizationState::diagonal_circular(), &atoms)?;
    for atom_index in 1..=3 {
        state = state.scatter(atom_index, model)?;
    }
    let state = state.qwp_photon()?;
    let mut records = state.detect_photon(Plate::Circ)?.into_iter();
    let mut plus = records.next().expect("two detection branches");
    let mut minus = records.next().expect("two detection branches");
    plus.outcome = "plus".to_string();
    minus.outcome = "minus".to_string();
    Ok(TripleBranches { plus, minus })
}

const ATOM_NAMES: [&str; 3] = ["atom 1 coefficients", "atom 2 coefficients", "atom 3 coefficients"];

fn normalized<const N: usize>(amps: [C64; N]) -> Option<[C64; N]> {
    let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm_sq <= 0.0 {
        return None;
    }
    let scale = C64::new(1.0 / norm_sq.sqrt(), 0.0);
    Some(amps.map(|a| a * scale))
}

/// Normalized target of the `h` branch, `a1 b2 |01> + b1 a2 |10>`, or `None`
/// when that branch has zero weight.
pub fn pair_target_h(alpha1: C64, beta1: C64, alpha2: C64, beta2: C64) -> Option<[C64; 4]> {
    let zero = C64::new(0.0, 0.0);
    normalized([zero, alpha1 * beta2, beta1 * alpha2, zero])
}

/// Normalized target of the `v` branch, `a1 a2 |00> - b1 b2 |11>`.
pub fn pair_target_v(alpha1: C64, beta1: C64, alpha2: C64, beta2: C64) -> Option<[C64; 4]> {
    let zero = C64::new(0.0, 0.0);
    normalized([alpha1 * alpha2, zero, zero, -(beta1 * beta2)])
}

/// Normalized target of the three-atom `plus` branch:
/// `a1 a2 a3 |000> - a1 b2 b3 |011> - b1 a2 b3 |101> - b1 b2 a3 |110>`.
pub fn triple_target_plus(coeffs: &[(C64, C64); 3]) -> Option<[C64; 8]> {
    let [(a1, b1), (a2, b2), (a3, b3)] = *coeffs;
    let zero = C64::new(0.0, 0.0);
    normalized([
        a1 * a2 * a3,
        zero,
        zero,
        -(a1 * b2 * b3),
        zero,
        -(b1 * a2 * b3),
        -(b1 * b2 * a3),
        zero,
    ])
}

/// Normalized target of the three-atom `minus` branch:
/// `b1 b2 b3 |111> - a1 a2 b3 |001> - a1 b2 a3 |010> - b1 a2 a3 |100>`.
pub fn triple_target_minus(coeffs: &[(C64, C64); 3]) -> Option<[C64; 8]> {
    let [(a1, b1), (a2, b2), (a3, b3)] = *coeffs;
    let zero = C64::new(0.0, 0.0);
    normalized([
        zero,
        -(a1 * a2 * b3),
        -(a1 * b2 * a3),
        zero,
        -(b1 * a2 * a3),
        zero,
        zero,
        b1 * b2 * b3,
    ])
}

/// A two-photon polarization state, indexed `|p1 p2>` with photon 1 as the
/// slower bit. Slot order follows the basis tag: (L, R) or (h, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonPair {
    basis: Basis,
    amplitudes: [C64; 4],
}

impl PhotonPair {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Quarter-wave plates on both photons: relabel circular <-> linear.
    pub fn qwp_both(&self) -> PhotonPair {
        PhotonPair { basis: self.basis.toggled(), amplitudes: self.amplitudes }
    }
}

/// Read out an entangled atom pair as a photon pair.
///
/// The atoms are pumped to their excited states and re-emit into the cavity
/// modes, mapping `a01 |01> + a10 |10>` onto `a01 |R>|L> + a10 |L>|R>`; the
/// quarter-wave plates then relabel to the linear basis. Input amplitudes
/// are ordered `[a00, a01, a10, a11]` and must be supported on the middle
/// two slots only.
pub fn convert_to_photons(atomic: &[C64; 4]) -> Result<PhotonPair, ProtocolError> {
    let support = atomic[0].norm() + atomic[3].norm();
    if support > 1e-12 {
        return Err(ProtocolError::UnsupportedAmplitudes { weight: support });
    }
    let norm_sq: f64 = atomic.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > crate::polarization::NORM_PRE_TOL {
        return Err(ProtocolError::NotNormalized { what: "atomic amplitudes", norm_sq });
    }
    let zero = C64::new(0.0, 0.0);
    // a01 -> |R>|L> (slot 2), a10 -> |L>|R> (slot 1), then L->h, R->v.
    Ok(PhotonPair { basis: Basis::Linear, amplitudes: [zero, atomic[2], atomic[1], zero] })
}
