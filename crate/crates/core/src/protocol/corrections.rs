//! Conditional single-qubit corrections applied to the receiving atom after
//! the heralding measurements of the state-transfer protocols.

use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use super::ProtocolError;

pub type Mat2 = [[C64; 2]; 2];

/// Outcome of the photon detection behind the wave plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonOutcome {
    H,
    V,
}

impl PhotonOutcome {
    pub fn label(self) -> &'static str {
        match self {
            PhotonOutcome::H => "h",
            PhotonOutcome::V => "v",
        }
    }
}

/// Outcome of the z measurement on the sending atom after its Hadamard:
/// `Plus` is the qubit-0 result (the atom was in `|+>` beforehand).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomOutcome {
    Plus,
    Minus,
}

impl AtomOutcome {
    pub fn label(self) -> &'static str {
        match self {
            AtomOutcome::Plus => "+",
            AtomOutcome::Minus => "-",
        }
    }
}

/// A named 2x2 unitary.
#[derive(Debug, Clone, Copy)]
pub struct Correction {
    pub label: &'static str,
    pub matrix: Mat2,
}

pub fn apply(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn is_unitary(m: &Mat2, tol: f64) -> bool {
    // rows of m times columns of m^dagger
    let dot = |a: [C64; 2], b: [C64; 2]| a[0] * b[0].conj() + a[1] * b[1].conj();
    let r0 = [m[0][0], m[0][1]];
    let r1 = [m[1][0], m[1][1]];
    (dot(r0, r0) - C64::new(1.0, 0.0)).norm() < tol
        && (dot(r1, r1) - C64::new(1.0, 0.0)).norm() < tol
        && dot(r0, r1).norm() < tol
}

/// Map from (photon outcome, atom outcome) to the correction for the
/// receiving atom. Entries are unitary within 1e-12 by construction.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    entries: [Correction; 4],
}

impl CorrectionTable {
    pub fn new(entries: [Correction; 4]) -> Result<Self, ProtocolError> {
        for e in &entries {
            if !is_unitary(&e.matrix, 1e-12) {
                return Err(ProtocolError::NonUnitaryCorrection { label: e.label });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, photon: PhotonOutcome, atom: AtomOutcome) -> &Correction {
        let row = match photon {
            PhotonOutcome::H => 0,
            PhotonOutcome::V => 1,
        };
        let col = match atom {
            AtomOutcome::Plus => 0,
            AtomOutcome::Minus => 1,
        };
        &self.entries[2 * row + col]
    }

    pub fn entries(&self) -> &[Correction; 4] {
        &self.entries
    }

    /// Corrections for transferring a photon state onto the remote atom:
    /// x-axis rotations by +-90 degrees, two of them followed by a sigma_y.
    /// Global phases (+-i) cancel in the fidelity and are kept only to match
    /// the recovered state exactly.
    pub fn photon_to_atom() -> Self {
        let s = FRAC_1_SQRT_2;
        let table = [
            // h;+  ->  -i exp(-i pi/4 sigma_x)
            Correction {
                label: "rx90",
                matrix: [
                    [C64::new(0.0, -s), C64::new(-s, 0.0)],
                    [C64::new(-s, 0.0), C64::new(0.0, -s)],
                ],
            },
            // h;-  ->  -i sigma_y exp(-i pi/4 sigma_x)
            Correction {
                label: "y_rx90",
                matrix: [
                    [C64::new(0.0, s), C64::new(-s, 0.0)],
                    [C64::new(s, 0.0), C64::new(0.0, -s)],
                ],
            },
            // v;+  ->  -i sigma_y exp(i pi/4 sigma_x)
            Correction {
                label: "y_rxm90",
                matrix: [
                    [C64::new(0.0, -s), C64::new(-s, 0.0)],
                    [C64::new(s, 0.0), C64::new(0.0, s)],
                ],
            },
            // v;-  ->  i exp(i pi/4 sigma_x)
            Correction {
                label: "rxm90",
                matrix: [
                    [C64::new(0.0, s), C64::new(-s, 0.0)],
                    [C64::new(-s, 0.0), C64::new(0.0, s)],
                ],
            },
        ];
        Self::new(table).expect("built-in corrections are unitary")
    }

    /// Corrections for transferring one atomic qubit onto another; derived
    /// by expanding the post-measurement branches: the four residual states
    /// are `beta|0> + alpha|1>`, `-beta|0> + alpha|1>`, `alpha|0> - beta|1>`
    /// and `alpha|0> + beta|1>`, fixed by X, ZX, Z and the identity.
    pub fn atom_to_atom() -> Self {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let table = [
            Correction { label: "x", matrix: [[zero, one], [one, zero]] },
            Correction { label: "zx", matrix: [[zero, one], [-one, zero]] },
            Correction { label: "z", matrix: [[one, zero], [zero, -one]] },
            Correction { label: "identity", matrix: [[one, zero], [zero, one]] },
        ];
        Self::new(table).expect("built-in corrections are unitary")
    }
}
