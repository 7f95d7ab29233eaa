//! Brute-force oracle shared by the integration suites.
//!
//! Everything here replays the protocol pipelines with dense matrix
//! arithmetic on the full register: scattering as explicit diagonal
//! matrices assembled from Kronecker products, wave plates as 2x2 blocks
//! lifted to the register, and measurements as projectors. No code from the
//! incremental engine is used on this path, so agreement between the two is
//! a real cross-check.

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

pub type Matrix = Vec<Vec<C64>>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(n: usize) -> Matrix {
    vec![vec![c(0.0, 0.0); n]; n]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = zeros(ra * rb);
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matvec(m: &Matrix, v: &[C64]) -> Vec<C64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub fn normalize(v: &[C64]) -> Vec<C64> {
    let n = norm_sq(v).sqrt();
    v.iter().map(|a| a / n).collect()
}

/// `|<a|b>|^2` for normalized vectors.
pub fn fid(a: &[C64], b: &[C64]) -> f64 {
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    overlap.norm_sqr()
}

fn diag2(d0: C64, d1: C64) -> Matrix {
    vec![vec![d0, c(0.0, 0.0)], vec![c(0.0, 0.0), d1]]
}

fn proj2(bit: usize) -> Matrix {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    if bit == 0 {
        vec![vec![one, zero], vec![zero, zero]]
    } else {
        vec![vec![zero, zero], vec![zero, one]]
    }
}

fn add_into(acc: &mut Matrix, m: &Matrix) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (a, b) in ra.iter_mut().zip(rm) {
            *a += b;
        }
    }
}

/// Full scattering matrix on a register of one photon plus `n_atoms` atoms:
/// the circular photon component matching atom `k`'s qubit picks up `r`,
/// the other one `r0`.
pub fn scatter_matrix(n_atoms: usize, k: usize, r: C64, r0: C64) -> Matrix {
    let dim = 1 << (n_atoms + 1);
    let mut out = zeros(dim);
    for photon in 0..2 {
        let atom_diag = if photon == 0 { diag2(r, r0) } else { diag2(r0, r) };
        let left = identity(1 << (k - 1));
        let right = identity(1 << (n_atoms - k));
        let atoms = kron(&kron(&left, &atom_diag), &right);
        add_into(&mut out, &kron(&proj2(photon), &atoms));
    }
    out
}

pub fn hadamard2() -> Matrix {
    let s = c(FRAC_1_SQRT_2, 0.0);
    vec![vec![s, s], vec![s, -s]]
}

/// Plate mapping `(|h> +- i|v>)/sqrt(2)` onto `{h, v}`.
pub fn circ_plate2() -> Matrix {
    let s = c(FRAC_1_SQRT_2, 0.0);
    let i = C64::i();
    vec![vec![s, -s * i], vec![s, s * i]]
}

/// Lift a 2x2 photon matrix to the full register.
pub fn on_photon(n_atoms: usize, m2: &Matrix) -> Matrix {
    kron(m2, &identity(1 << n_atoms))
}

/// Lift a 2x2 matrix onto atom `k` of a register that still holds the photon.
pub fn on_atom_with_photon(n_atoms: usize, k: usize, m2: &Matrix) -> Matrix {
    let left = identity(1 << k); // photon plus atoms 1..k-1
    let right = identity(1 << (n_atoms - k));
    kron(&kron(&left, m2), &right)
}

/// Lift a 2x2 matrix onto atom `k` of an atoms-only register.
pub fn on_atom(n_atoms: usize, k: usize, m2: &Matrix) -> Matrix {
    let left = identity(1 << (k - 1));
    let right = identity(1 << (n_atoms - k));
    kron(&kron(&left, m2), &right)
}

/// Split a register vector on the photon bit: `(h branch, v branch)`,
/// both unnormalized.
pub fn split_photon(v: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let half = v.len() / 2;
    (v[..half].to_vec(), v[half..].to_vec())
}

/// Split an atoms-only register vector on atom 1's bit.
pub fn split_atom1(v: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let half = v.len() / 2;
    (v[..half].to_vec(), v[half..].to_vec())
}

/// One branch after projection: `(probability, renormalized state)`.
pub fn branch(v: Vec<C64>) -> (f64, Vec<C64>) {
    let p = norm_sq(&v);
    if p == 0.0 {
        return (0.0, v);
    }
    let s = 1.0 / p.sqrt();
    (p, v.iter().map(|a| a * s).collect())
}

/// Uniformly random normalized qubit pair with every component's modulus
/// at least `floor` (rejection sampled).
pub fn random_qubit<R: Rng>(rng: &mut R, floor: f64) -> (C64, C64) {
    loop {
        let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n < 1e-3 {
            continue;
        }
        let (a, b) = (a / n, b / n);
        if a.norm() >= floor && b.norm() >= floor {
            return (a, b);
        }
    }
}

/// Ideal-model reflection factors.
pub fn ideal_factors() -> (C64, C64) {
    (c(-1.0, 0.0), c(0.0, 1.0))
}

/// Reflection factors recomputed from the closed-form response, written out
/// here independently of the library.
pub fn exact_factors(
    omega_c: f64,
    omega_0: f64,
    kappa: f64,
    gamma: f64,
    g: f64,
    omega_p: f64,
) -> (C64, C64) {
    let dc = c(0.0, omega_c - omega_p);
    let da = c(gamma / 2.0, omega_0 - omega_p);
    let half_k = c(kappa / 2.0, 0.0);
    let g_sq = c(g * g, 0.0);
    let r = ((dc - half_k) * da + g_sq) / ((dc + half_k) * da + g_sq);
    let r0 = (dc - half_k) / (dc + half_k);
    (r, r0)
}
