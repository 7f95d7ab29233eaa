//! Simulator for single-photon input-output processes on low-Q optical
//! cavities holding single atoms.
//!
//! The crate computes exact reflection coefficients and Faraday rotations
//! ([`cavity`], [`polarization`]), evolves joint photon-atom states through
//! chained cavities with post-selected detection ([`protocol`]), and
//! estimates success rates and times under a loss budget ([`efficiency`]).
//! The [`cli`] module backs the `lowq` binary.

pub mod cavity;
pub mod cli;
pub mod efficiency;
pub mod polarization;
pub mod protocol;

pub use cavity::{
    faraday_rotation, reflection_empty, reflection_with_atom, sweep_reflection, CavityError,
    CavityParams, ReflectionResult, SweepTable,
};
pub use efficiency::{
    expected_time, monte_carlo_time, success_probability, EfficiencyError, LossBudget, SuccessStats,
};
pub use polarization::{
    hwp_circ, hwp_diag, qwp, stokes, Basis, PolarizationError, PolarizationState, StokesVector,
};
pub use protocol::{
    convert_to_photons, entangle_pair, entangle_three, fidelity, transfer_atom_to_atom,
    transfer_photon_to_atom, MeasurementRecord, PhaseModel, Plate, ProtocolError, SystemState,
};
