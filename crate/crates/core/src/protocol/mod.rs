//! Photon-atom protocol engine: sequential cavity scattering of one photon,
//! post-selected detection, entanglement generation, and state transfer.
//!
//! Comparisons against target states are made with [`fidelity`], which is
//! blind to global phases; the protocol outputs carry convention-dependent
//! phase factors that no measurement can see.

mod corrections;
mod entangle;
mod state;
mod transfer;

pub use corrections::{apply, AtomOutcome, Correction, CorrectionTable, Mat2, PhotonOutcome};
pub use entangle::{
    convert_to_photons, entangle_pair, entangle_three, pair_target_h, pair_target_v,
    triple_target_minus, triple_target_plus, PairBranches, PhotonPair, TripleBranches,
};
pub use state::{sample_outcome, MeasurementRecord, Plate, SystemState};
pub use transfer::{transfer_atom_to_atom, transfer_photon_to_atom, TransferBranch};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::cavity::{reflection_empty, reflection_with_atom, CavityError, CavityParams};
use crate::polarization::{Basis, NORM_PRE_TOL};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("state has no photon qubit")]
    PhotonAbsent,
    #[error("photon must be in the {expected:?} basis (state is {found:?})")]
    WrongPhotonBasis { expected: Basis, found: Basis },
    #[error("atom index {index} out of range (state has {n_atoms} atoms)")]
    AtomIndexOutOfRange { index: usize, n_atoms: usize },
    #[error("no cavity parameters for cavity {index} (model has {available})")]
    MissingCavity { index: usize, available: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{what} must be normalized (norm^2 = {norm_sq})")]
    NotNormalized { what: &'static str, norm_sq: f64 },
    #[error("squared norm {norm_sq} exceeds 1")]
    Overnormalized { norm_sq: f64 },
    #[error("amplitudes must be finite")]
    NonFinite,
    #[error("amplitudes have weight {weight} outside the |01>,|10> subspace")]
    UnsupportedAmplitudes { weight: f64 },
    #[error("correction {label} is not unitary")]
    NonUnitaryCorrection { label: &'static str },
    #[error("no outcome to sample (empty set or zero total probability)")]
    NoOutcomes,
    #[error(transparent)]
    Cavity(#[from] CavityError),
}

/// How the scattering phases are produced.
#[derive(Debug, Clone)]
pub enum PhaseModel {
    /// Designed operating point: `r = exp(i pi) = -1`, `r0 = exp(i pi/2) = i`.
    Ideal,
    /// Full complex reflection amplitudes per cavity at probe `omega_p`;
    /// the photon norm shrinks by the atom-induced absorption.
    Exact { cavities: Vec<CavityParams>, omega_p: f64 },
}

impl PhaseModel {
    /// Exact model with the same parameters for every cavity.
    pub fn uniform_exact(params: CavityParams, omega_p: f64, n_cavities: usize) -> Self {
        PhaseModel::Exact { cavities: vec![params; n_cavities], omega_p }
    }

    /// Reflection amplitudes `(r, r0)` seen at the given cavity (1-based).
    pub fn reflection_factors(&self, cavity_index: usize) -> Result<(C64, C64), ProtocolError> {
        match self {
            PhaseModel::Ideal => Ok((C64::new(-1.0, 0.0), C64::new(0.0, 1.0))),
            PhaseModel::Exact { cavities, omega_p } => {
                let params = cavities.get(cavity_index.wrapping_sub(1)).ok_or(
                    ProtocolError::MissingCavity { index: cavity_index, available: cavities.len() },
                )?;
                let r = reflection_with_atom(params, *omega_p)?.amplitude;
                let r0 = reflection_empty(params, *omega_p)?.amplitude;
                Ok((r, r0))
            }
        }
    }
}

/// `|<a|b>|^2` for equal-length amplitude vectors. Both inputs are expected
/// to be normalized; the only checked failure is a dimension mismatch.
pub fn fidelity(a: &[C64], b: &[C64]) -> Result<f64, ProtocolError> {
    if a.len() != b.len() {
        return Err(ProtocolError::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr())
}

fn check_normalized(what: &'static str, a: C64, b: C64) -> Result<(), ProtocolError> {
    let norm_sq = a.norm_sqr() + b.norm_sqr();
    if (norm_sq - 1.0).abs() > NORM_PRE_TOL {
        return Err(ProtocolError::NotNormalized { what, norm_sq });
    }
    Ok(())
}
