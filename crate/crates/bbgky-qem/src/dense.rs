//! Dense reference matrices for small systems.
//!
//! Pauli strings and Hamiltonians are expanded into full `2^n x 2^n` complex
//! matrices. The simulator uses this for ground-state preparation; the test
//! suites use it as an independent oracle for the sparse algebra and the
//! BBGKY equations (matrix products here never touch the sparse bracket
//! rules).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::hamiltonian::Hamiltonian;
use crate::pauli::{Axis, BracketKind, PauliString, ScaledPauli};

/// Basis convention: site `j` (1-based) is bit `j - 1` of the basis index,
/// bit value 1 meaning the spin-down state `|1>`.
pub fn pauli_matrix(p: &PauliString, nqubits: usize) -> DMatrix<Complex64> {
    assert!(p.max_site() as usize <= nqubits, "string exceeds system");
    let dim = 1usize << nqubits;
    let mut m = DMatrix::zeros(dim, dim);
    let (mask, zy_mask, ny) = string_masks(p);
    for col in 0..dim {
        let row = col ^ mask;
        m[(row, col)] = basis_phase(col, zy_mask, ny);
    }
    m
}

/// Bit masks controlling the action of a string on basis states: flip mask
/// (X and Y sites), sign mask (Y and Z sites) and the Y count.
pub(crate) fn string_masks(p: &PauliString) -> (usize, usize, u32) {
    let mut mask = 0usize;
    let mut zy = 0usize;
    let mut ny = 0u32;
    for &(site, axis) in p.support() {
        let bit = 1usize << (site - 1);
        match axis {
            Axis::X => mask |= bit,
            Axis::Y => {
                mask |= bit;
                zy |= bit;
                ny += 1;
            }
            Axis::Z => zy |= bit,
        }
    }
    (mask, zy, ny)
}

/// Phase of `P|y> = phase * |y ^ mask>`.
pub(crate) fn basis_phase(y: usize, zy_mask: usize, ny: u32) -> Complex64 {
    let sign = if (y & zy_mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let i_pow = match ny % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    i_pow * sign
}

/// Dense Hamiltonian matrix at time `t`.
pub fn hamiltonian_matrix(h: &Hamiltonian, t: f64) -> DMatrix<Complex64> {
    let dim = 1usize << h.nqubits();
    let mut m = DMatrix::zeros(dim, dim);
    for (index, (string, _)) in h.terms().iter().enumerate() {
        let c = h.coupling_at(index, t).expect("index in range");
        if c == 0.0 {
            continue;
        }
        let (mask, zy_mask, ny) = string_masks(string);
        for col in 0..dim {
            m[(col ^ mask, col)] += basis_phase(col, zy_mask, ny) * c;
        }
    }
    m
}

/// Largest deviation from hermiticity, for validation.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Asserts that sparse product and brackets of `(p, q)` match dense matrix
/// arithmetic exactly. Entries of Pauli matrices are Gaussian integers, so
/// `==` comparisons are exact.
pub fn check_pair_against_dense(p: &PauliString, q: &PauliString, nqubits: usize) {
    let mp = pauli_matrix(p, nqubits);
    let mq = pauli_matrix(q, nqubits);
    let product = &mp * &mq;
    assert_matrix_is(&product, &crate::pauli::multiply(p, q), nqubits);
    let comm = &product - &mq * &mp;
    assert_matrix_is(
        &comm,
        &crate::pauli::bracket(p, q, BracketKind::Commutator),
        nqubits,
    );
    let anti = &product + &mq * &mp;
    assert_matrix_is(
        &anti,
        &crate::pauli::bracket(p, q, BracketKind::Anticommutator),
        nqubits,
    );
}

fn assert_matrix_is(m: &DMatrix<Complex64>, expected: &ScaledPauli, nqubits: usize) {
    let dim = 1usize << nqubits;
    let target = match &expected.string {
        Some(s) => pauli_matrix(s, nqubits) * expected.coeff.to_complex(),
        None => DMatrix::identity(dim, dim) * expected.coeff.to_complex(),
    };
    assert_eq!(m, &target, "dense mismatch for {expected:?}");
}
