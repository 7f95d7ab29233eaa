//! Single-photon polarization algebra: circular/linear basis states, Stokes
//! vectors, and the two fixed wave-plate transforms the protocols use.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

/// Norm tolerance for states that must be normalized before a measurement.
pub const NORM_PRE_TOL: f64 = 1e-9;
/// Slack allowed on the sub-normalization invariant `norm^2 <= 1`.
pub const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PolarizationError {
    #[error("operation requires the {expected:?} basis (state is {found:?})")]
    WrongBasis { expected: Basis, found: Basis },
    #[error("state must be normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("squared norm {norm_sq} exceeds 1")]
    Overnormalized { norm_sq: f64 },
    #[error("amplitudes must be finite")]
    NonFinite,
}

/// Which pair of basis states the two amplitude slots refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Slots are (L, R): left/right circular.
    Circular,
    /// Slots are (h, v): horizontal/vertical linear.
    Linear,
}

impl Basis {
    pub fn toggled(self) -> Basis {
        match self {
            Basis::Circular => Basis::Linear,
            Basis::Linear => Basis::Circular,
        }
    }
}

/// A (possibly sub-normalized) single-photon polarization state.
///
/// Sub-normalization encodes photon loss: `norm_sq` is the probability that
/// the photon is still there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolarizationStateRepr", into = "PolarizationStateRepr")]
pub struct PolarizationState {
    basis: Basis,
    amplitudes: [C64; 2],
}

/// JSON shape: `{"basis": "circular", "amplitudes": [[re,im],[re,im]]}`.
#[derive(Serialize, Deserialize)]
struct PolarizationStateRepr {
    basis: Basis,
    amplitudes: [[f64; 2]; 2],
}

impl From<PolarizationState> for PolarizationStateRepr {
    fn from(s: PolarizationState) -> Self {
        Self {
            basis: s.basis,
            amplitudes: [
                [s.amplitudes[0].re, s.amplitudes[0].im],
                [s.amplitudes[1].re, s.amplitudes[1].im],
            ],
        }
    }
}

impl TryFrom<PolarizationStateRepr> for PolarizationState {
    type Error = PolarizationError;

    fn try_from(r: PolarizationStateRepr) -> Result<Self, PolarizationError> {
        PolarizationState::new(
            r.basis,
            [
                C64::new(r.amplitudes[0][0], r.amplitudes[0][1]),
                C64::new(r.amplitudes[1][0], r.amplitudes[1][1]),
            ],
        )
    }
}

impl PolarizationState {
    pub fn new(basis: Basis, amplitudes: [C64; 2]) -> Result<Self, PolarizationError> {
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(PolarizationError::NonFinite);
        }
        let state = Self { basis, amplitudes };
        let norm_sq = state.norm_sq();
        if norm_sq > 1.0 + NORM_SLACK {
            return Err(PolarizationError::Overnormalized { norm_sq });
        }
        Ok(state)
    }

    pub fn circular(l: C64, r: C64) -> Result<Self, PolarizationError> {
        Self::new(Basis::Circular, [l, r])
    }

    pub fn linear(h: C64, v: C64) -> Result<Self, PolarizationError> {
        Self::new(Basis::Linear, [h, v])
    }

    /// `(|L> + |R>)/sqrt(2)`: linear polarization along x.
    pub fn diagonal_circular() -> Self {
        Self {
            basis: Basis::Circular,
            amplitudes: [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes[0].norm_sqr() + self.amplitudes[1].norm_sqr()
    }
}

/// Stokes expectation values of a one-photon state. A normalized pure state
/// sits on a sphere of radius 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StokesVector {
    pub s_x: f64,
    pub s_y: f64,
    pub s_z: f64,
}

impl StokesVector {
    /// Polarization-plane angle `atan2(s_y, s_x)`.
    pub fn azimuth(&self) -> f64 {
        self.s_y.atan2(self.s_x)
    }
}

/// Stokes vector of a normalized circular-basis state `(c_L, c_R)`:
/// `s_x = Re(c_L* c_R)`, `s_y = Im(c_L* c_R)`, `s_z = (|c_L|^2 - |c_R|^2)/2`.
pub fn stokes(state: &PolarizationState) -> Result<StokesVector, PolarizationError> {
    if state.basis != Basis::Circular {
        return Err(PolarizationError::WrongBasis {
            expected: Basis::Circular,
            found: state.basis,
        });
    }
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > NORM_PRE_TOL {
        return Err(PolarizationError::NotNormalized { norm_sq });
    }
    let [c_l, c_r] = state.amplitudes;
    let cross = c_l.conj() * c_r;
    Ok(StokesVector { s_x: cross.re, s_y: cross.im, s_z: (c_l.norm_sqr() - c_r.norm_sqr()) / 2.0 })
}

/// Quarter-wave plate: the lossless relabeling `L <-> h`, `R <-> v`.
/// Involutive; amplitudes are untouched, only the basis tag flips.
pub fn qwp(state: &PolarizationState) -> PolarizationState {
    PolarizationState { basis: state.basis.toggled(), amplitudes: state.amplitudes }
}

/// Half-wave plate mapping the diagonal basis onto `{h, v}`:
/// `(|h>+|v>)/sqrt(2) -> |h>` and `(|h>-|v>)/sqrt(2) -> |v>`
/// (the Hadamard matrix on the linear amplitudes).
pub fn hwp_diag(state: &PolarizationState) -> Result<PolarizationState, PolarizationError> {
    require_linear(state)?;
    let [h, v] = state.amplitudes;
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    Ok(PolarizationState { basis: Basis::Linear, amplitudes: [s * (h + v), s * (h - v)] })
}

/// The tilted plate mapping the circular-looking superpositions onto `{h, v}`:
/// `(|h>+i|v>)/sqrt(2) -> |h>` and `(|h>-i|v>)/sqrt(2) -> |v>`, i.e.
/// `h' = (h - i v)/sqrt(2)`, `v' = (h + i v)/sqrt(2)`.
pub fn hwp_circ(state: &PolarizationState) -> Result<PolarizationState, PolarizationError> {
    require_linear(state)?;
    let [h, v] = state.amplitudes;
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let i = C64::i();
    Ok(PolarizationState { basis: Basis::Linear, amplitudes: [s * (h - i * v), s * (h + i * v)] })
}

fn require_linear(state: &PolarizationState) -> Result<(), PolarizationError> {
    if state.basis != Basis::Linear {
        return Err(PolarizationError::WrongBasis { expected: Basis::Linear, found: state.basis });
    }
    Ok(())
}
