//! Joint photon-atom state vectors and the measurement machinery.
//!
//! A [`SystemState`] holds the complex amplitudes of one (optional) photon
//! qubit and `n_atoms` atomic qubits, indexed with the photon as the most
//! significant bit and atoms in cavity-visit order after it. States are
//! immutable; every operation returns a new value. The squared norm may be
//! below one: it is the conditional probability that the photon has not
//! been absorbed along the way.

use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{PhaseModel, ProtocolError};
use crate::polarization::{Basis, PolarizationState, NORM_SLACK};

/// Which half-wave plate sits in front of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plate {
    /// Maps `(|h> +- |v>)/sqrt(2)` onto `{h, v}`.
    Diag,
    /// Maps `(|h> +- i|v>)/sqrt(2)` onto `{h, v}`.
    Circ,
}

impl Plate {
    /// 2x2 unitary acting on the (h, v) amplitudes.
    fn matrix(self) -> [[C64; 2]; 2] {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let i = C64::i();
        match self {
            Plate::Diag => [[s, s], [s, -s]],
            Plate::Circ => [[s, -s * i], [s, s * i]],
        }
    }
}

/// One branch of a projective measurement.
///
/// `probability` is taken against the pre-measurement state (so a complete
/// outcome set sums to its squared norm, not necessarily to one), while
/// `post_state` is renormalized. A zero-probability branch carries an
/// all-zero post state.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome: String,
    pub probability: f64,
    pub post_state: SystemState,
}

/// Draw one outcome from a set of measurement records, weighted by their
/// probabilities. Deterministic given the RNG stream; this is the sampling
/// wrapper for Monte Carlo runs on top of the all-branches default.
pub fn sample_outcome<'a, R: rand::Rng>(
    records: &'a [MeasurementRecord],
    rng: &mut R,
) -> Result<&'a MeasurementRecord, ProtocolError> {
    let total: f64 = records.iter().map(|r| r.probability).sum();
    if records.is_empty() || total <= 0.0 {
        return Err(ProtocolError::NoOutcomes);
    }
    let mut u = rng.gen::<f64>() * total;
    for record in records {
        u -= record.probability;
        if u <= 0.0 {
            return Ok(record);
        }
    }
    Ok(records.last().expect("records checked non-empty"))
}

/// Kronecker product with `a` as the slower (more significant) factor.
pub(crate) fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Joint state of one optional photon qubit and `n_atoms` atomic qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    photon: Option<Basis>,
    n_atoms: usize,
    amps: Vec<C64>,
    norm_sq: f64,
}

impl SystemState {
    fn build(photon: Option<Basis>, n_atoms: usize, amps: Vec<C64>) -> Result<Self, ProtocolError> {
        let qubits = n_atoms + usize::from(photon.is_some());
        let dim = 1usize << qubits;
        if amps.len() != dim {
            return Err(ProtocolError::DimensionMismatch { left: amps.len(), right: dim });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(ProtocolError::NonFinite);
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq > 1.0 + NORM_SLACK {
            return Err(ProtocolError::Overnormalized { norm_sq });
        }
        Ok(Self { photon, n_atoms, amps, norm_sq })
    }

    /// State with a photon qubit (most significant bit) and `n_atoms` atoms.
    pub fn with_photon(
        basis: Basis,
        n_atoms: usize,
        amps: Vec<C64>,
    ) -> Result<Self, ProtocolError> {
        Self::build(Some(basis), n_atoms, amps)
    }

    /// Atoms-only register (photon already detected or never present).
    pub fn atoms_only(n_atoms: usize, amps: Vec<C64>) -> Result<Self, ProtocolError> {
        Self::build(None, n_atoms, amps)
    }

    /// Product state `photon (x) atom_1 (x) ... (x) atom_n`.
    pub fn product(photon: &PolarizationState, atoms: &[[C64; 2]]) -> Result<Self, ProtocolError> {
        let mut amps: Vec<C64> = photon.amplitudes().to_vec();
        for atom in atoms {
            amps = kron(&amps, atom);
        }
        Self::build(Some(photon.basis()), atoms.len(), amps)
    }

    pub fn photon_basis(&self) -> Option<Basis> {
        self.photon
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Cached squared norm: the conditional success probability of every
    /// post-selection that led to this state.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn require_photon(&self, basis: Basis) -> Result<(), ProtocolError> {
        match self.photon {
            None => Err(ProtocolError::PhotonAbsent),
            Some(b) if b != basis => {
                Err(ProtocolError::WrongPhotonBasis { expected: basis, found: b })
            }
            Some(_) => Ok(()),
        }
    }

    fn atom_bit(&self, atom_index: usize) -> Result<usize, ProtocolError> {
        if atom_index == 0 || atom_index > self.n_atoms {
            return Err(ProtocolError::AtomIndexOutOfRange {
                index: atom_index,
                n_atoms: self.n_atoms,
            });
        }
        Ok(self.n_atoms - atom_index)
    }

    /// Bounce the photon off the cavity holding atom `atom_index` (1-based).
    ///
    /// Acts diagonally on the (photon, atom) pair: when the circular photon
    /// component matches the qubit value it sees the atom-loaded reflection
    /// `r`, otherwise the empty-cavity reflection `r0`. In the ideal model
    /// `r = -1` and `r0 = i`; in the exact model the amplitudes also shrink
    /// the norm (photon absorption).
    pub fn scatter(&self, atom_index: usize, model: &PhaseModel) -> Result<Self, ProtocolError> {
        self.require_photon(Basis::Circular)?;
        let abit = self.atom_bit(atom_index)?;
        let (r, r0) = model.reflection_factors(atom_index)?;
        let pbit = self.n_atoms;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(idx, &a)| {
                let photon = (idx >> pbit) & 1;
                let atom = (idx >> abit) & 1;
                if photon == atom {
                    a * r
                } else {
                    a * r0
                }
            })
            .collect();
        Self::build(self.photon, self.n_atoms, amps)
    }

    /// Quarter-wave plate on the photon slot: relabels circular <-> linear.
    pub fn qwp_photon(&self) -> Result<Self, ProtocolError> {
        let basis = self.photon.ok_or(ProtocolError::PhotonAbsent)?;
        Ok(Self { photon: Some(basis.toggled()), ..self.clone() })
    }

    fn apply_photon_gate(&self, m: [[C64; 2]; 2]) -> Self {
        let stride = 1usize << self.n_atoms;
        let mut amps = self.amps.clone();
        for j in 0..stride {
            let a0 = self.amps[j];
            let a1 = self.amps[stride + j];
            amps[j] = m[0][0] * a0 + m[0][1] * a1;
            amps[stride + j] = m[1][0] * a0 + m[1][1] * a1;
        }
        let norm_sq = amps.iter().map(|a| a.norm_sqr()).sum();
        Self { photon: self.photon, n_atoms: self.n_atoms, amps, norm_sq }
    }

    /// Send the photon through a wave plate and detect it in the linear
    /// basis. Returns the `h` and `v` branches (in that order) with the
    /// photon removed from the register.
    pub fn detect_photon(&self, plate: Plate) -> Result<Vec<MeasurementRecord>, ProtocolError> {
        self.require_photon(Basis::Linear)?;
        let rotated = self.apply_photon_gate(plate.matrix());
        let stride = 1usize << self.n_atoms;
        let mut records = Vec::with_capacity(2);
        for (bit, outcome) in [(0usize, "h"), (1usize, "v")] {
            let branch: Vec<C64> = rotated.amps[bit * stride..(bit + 1) * stride].to_vec();
            records.push(Self::branch_record(outcome, branch, None, self.n_atoms));
        }
        Ok(records)
    }

    /// Hadamard on the atom at `atom_index` (1-based).
    pub fn hadamard_atom(&self, atom_index: usize) -> Result<Self, ProtocolError> {
        let abit = self.atom_bit(atom_index)?;
        let mask = 1usize << abit;
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let mut amps = self.amps.clone();
        for idx in 0..self.amps.len() {
            if idx & mask == 0 {
                let a0 = self.amps[idx];
                let a1 = self.amps[idx | mask];
                amps[idx] = s * (a0 + a1);
                amps[idx | mask] = s * (a0 - a1);
            }
        }
        Self::build(self.photon, self.n_atoms, amps)
    }

    /// Projective measurement of the atom at `atom_index` in the qubit
    /// basis. Returns the `0` and `1` branches with that atom removed.
    pub fn measure_atom_z(
        &self,
        atom_index: usize,
    ) -> Result<Vec<MeasurementRecord>, ProtocolError> {
        let abit = self.atom_bit(atom_index)?;
        let low_mask = (1usize << abit) - 1;
        let mut records = Vec::with_capacity(2);
        for (bit, outcome) in [(0usize, "0"), (1usize, "1")] {
            let mut branch = vec![C64::new(0.0, 0.0); self.amps.len() / 2];
            for (idx, &a) in self.amps.iter().enumerate() {
                if (idx >> abit) & 1 == bit {
                    let reduced = ((idx >> (abit + 1)) << abit) | (idx & low_mask);
                    branch[reduced] = a;
                }
            }
            records.push(Self::branch_record(outcome, branch, self.photon, self.n_atoms - 1));
        }
        Ok(records)
    }

    fn branch_record(
        outcome: &str,
        mut branch: Vec<C64>,
        photon: Option<Basis>,
        n_atoms: usize,
    ) -> MeasurementRecord {
        let probability: f64 = branch.iter().map(|a| a.norm_sqr()).sum();
        if probability > 0.0 {
            let scale = C64::new(1.0 / probability.sqrt(), 0.0);
            for a in &mut branch {
                *a *= scale;
            }
        }
        let norm_sq: f64 = branch.iter().map(|a| a.norm_sqr()).sum();
        MeasurementRecord {
            outcome: outcome.to_string(),
            probability,
            post_state: SystemState { photon, n_atoms, amps: branch, norm_sq },
        }
    }
}
