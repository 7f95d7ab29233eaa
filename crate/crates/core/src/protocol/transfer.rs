//! State transfer onto a remote atom through a shared entangled pair:
//! either an unknown photon polarization or an unknown atomic qubit is
//! teleported onto atom 2 with heralding measurements and a conditional
//! single-qubit correction.

use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use super::corrections::{apply, AtomOutcome, CorrectionTable, PhotonOutcome};
use super::state::{kron, Plate, SystemState};
use super::{check_normalized, PhaseModel, ProtocolError};
use crate::polarization::{Basis, PolarizationState};

/// One of the four equally likely heralding outcomes of a transfer run.
#[derive(Debug, Clone)]
pub struct TransferBranch {
    pub photon: PhotonOutcome,
    pub atom: AtomOutcome,
    /// Joint probability of this (photon, atom) outcome.
    pub probability: f64,
    /// Atom-2 state right after both measurements, before the correction.
    pub measured_state: [C64; 2],
    /// Atom-2 state after the conditional correction.
    pub recovered_state: [C64; 2],
    /// Label of the applied correction.
    pub correction: &'static str,
}

fn branches_from(
    detected: Vec<super::state::MeasurementRecord>,
    table: &CorrectionTable,
) -> Result<Vec<TransferBranch>, ProtocolError> {
    let mut out = Vec::with_capacity(4);
    for (photon, record) in [PhotonOutcome::H, PhotonOutcome::V].into_iter().zip(detected) {
        let after_h = record.post_state.hadamard_atom(1)?;
        for (atom, atom_record) in
            [AtomOutcome::Plus, AtomOutcome::Minus].into_iter().zip(after_h.measure_atom_z(1)?)
        {
            let amps = atom_record.post_state.amplitudes();
            let measured = [amps[0], amps[1]];
            let correction = table.get(photon, atom);
            out.push(TransferBranch {
                photon,
                atom,
                probability: record.probability * atom_record.probability,
                measured_state: measured,
                recovered_state: apply(&correction.matrix, measured),
                correction: correction.label,
            });
        }
    }
    Ok(out)
}

/// Teleport an unknown photon polarization `x|h> + y|v>` onto atom 2.
///
/// The atoms start in the Bell state `(|01> + |10>)/sqrt(2)`; the photon
/// only visits cavity 1. Each of the four heralding branches occurs with
/// probability 1/4 and recovers `x|0> + y|1>` on atom 2 (up to a global
/// phase) after its table correction.
pub fn transfer_photon_to_atom(
    x: C64,
    y: C64,
    model: &PhaseModel,
) -> Result<Vec<TransferBranch>, ProtocolError> {
    check_normalized("photon coefficients", x, y)?;
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let zero = C64::new(0.0, 0.0);
    let bell = [zero, s, s, zero];
    let amps = kron(&[x, y], &bell);
    let state = SystemState::with_photon(Basis::Linear, 2, amps)?
        .qwp_photon()?
        .scatter(1, model)?
        .qwp_photon()?;
    let detected = state.detect_photon(Plate::Diag)?;
    branches_from(detected, &CorrectionTable::photon_to_atom())
}

/// Teleport the unknown qubit `alpha1|0> + beta1|1>` of atom 1 onto atom 2.
///
/// Runs the pair-entangling scattering with atom 2 prepared in `|+>`, then a
/// Hadamard on atom 1, photon detection behind the diagonal plate and a z
/// measurement on atom 1. Corrections come from the atom-to-atom table.
pub fn transfer_atom_to_atom(
    alpha1: C64,
    beta1: C64,
    model: &PhaseModel,
) -> Result<Vec<TransferBranch>, ProtocolError> {
    check_normalized("atom 1 coefficients", alpha1, beta1)?;
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let state =
        SystemState::product(&PolarizationState::diagonal_circular(), &[[alpha1, beta1], [s, s]])?
            .scatter(1, model)?
            .scatter(2, model)?
            .qwp_photon()?;
    // the Hadamard on atom 1 happens inside the branch expansion
    let detected = state.detect_photon(Plate::Diag)?;
    branches_from(detected, &CorrectionTable::atom_to_atom())
}
