//! Trotterized spin-chain simulation, ideal and noisy.
//!
//! Ideal evolution acts on statevectors, noisy evolution on density matrices
//! with a per-qubit per-slice depolarizing channel. Pauli-string exponentials
//! are applied sparsely: a string permutes and phases basis states, so
//! `exp(-i theta P)` mixes amplitude pairs in a 2x2 rotation and no dense
//! matrix is ever built during evolution. Measurement tables combine shot
//! sampling of both branches with the geometric attenuation
//! `(1 - eta^s) noisy + eta^s ideal`.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use crate::seeds;

const GROUND_STATE_GUARD: usize = 12;

/// Pure state over `2^nqubits` amplitudes; unit norm within 1e-12.
#[derive(Debug, Clone)]
pub struct StateVector {
    nqubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(nqubits: usize, amps: Vec<Complex64>) -> Result<StateVector> {
        if amps.len() != 1 << nqubits {
            return Err(Error::config("amplitude count must be 2^nqubits"));
        }
        let state = StateVector { nqubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::numerical(format!(
                "statevector norm {norm} deviates from 1"
            )));
        }
        Ok(state)
    }

    /// Computational basis state `|index>`.
    pub fn basis(nqubits: usize, index: usize) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << nqubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { nqubits, amps }
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real part of `<psi|P|psi>`, clamped to `[-1, 1]`.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let (mask, zy_mask, ny) = dense::string_masks(p);
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..self.amps.len() {
            let x = y ^ mask;
            acc += self.amps[x].conj() * dense::basis_phase(y, zy_mask, ny) * self.amps[y];
        }
        acc.re.clamp(-1.0, 1.0)
    }

    /// Applies `exp(-i theta P)` in place.
    fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) {
        let (mask, zy_mask, ny) = dense::string_masks(p);
        let (sin, cos) = theta.sin_cos();
        if mask == 0 {
            // Diagonal string: pure phases.
            let plus = Complex64::new(cos, -sin);
            let minus = Complex64::new(cos, sin);
            for (y, amp) in self.amps.iter_mut().enumerate() {
                *amp *= if (y & zy_mask).count_ones() % 2 == 0 {
                    plus
                } else {
                    minus
                };
            }
            return;
        }
        let m_i_sin = Complex64::new(0.0, -sin);
        for y in 0..self.amps.len() {
            let partner = y ^ mask;
            if partner < y {
                continue;
            }
            let phase_y = dense::basis_phase(y, zy_mask, ny);
            let phase_p = dense::basis_phase(partner, zy_mask, ny);
            let (a, b) = (self.amps[y], self.amps[partner]);
            self.amps[y] = a * cos + b * (m_i_sin * phase_p);
            self.amps[partner] = b * cos + a * (m_i_sin * phase_y);
        }
    }
}

/// Mixed state as a dense Hermitian matrix, row-major.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    nqubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> DensityMatrix {
        let dim = state.amps.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = state.amps[r] * state.amps[c].conj();
            }
        }
        DensityMatrix {
            nqubits: state.nqubits,
            dim,
            data,
        }
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Real part of `Tr(rho P)`, clamped to `[-1, 1]`.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let (mask, zy_mask, ny) = dense::string_masks(p);
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..self.dim {
            acc += self.entry(y, y ^ mask) * dense::basis_phase(y, zy_mask, ny);
        }
        acc.re.clamp(-1.0, 1.0)
    }

    /// Checks hermiticity, unit trace and spectrum positivity.
    pub fn validate(&self) -> Result<()> {
        for r in 0..self.dim {
            for c in r..self.dim {
                if (self.entry(r, c) - self.entry(c, r).conj()).norm() > 1e-10 {
                    return Err(Error::numerical("density matrix not Hermitian"));
                }
            }
        }
        if (self.trace() - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::numerical("density matrix trace deviates from 1"));
        }
        let m = nalgebra::DMatrix::from_fn(self.dim, self.dim, |r, c| self.entry(r, c));
        let eigen = m.symmetric_eigen();
        if eigen.eigenvalues.iter().any(|&l| l < -1e-9) {
            return Err(Error::numerical("density matrix has negative eigenvalues"));
        }
        Ok(())
    }

    /// Applies `U rho U^dag` for `U = exp(-i theta P)` in place.
    fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) {
        let (mask, zy_mask, ny) = dense::string_masks(p);
        let (sin, cos) = theta.sin_cos();
        let dim = self.dim;
        if mask == 0 {
            for r in 0..dim {
                let sr = (r & zy_mask).count_ones() % 2;
                for c in 0..dim {
                    let sc = (c & zy_mask).count_ones() % 2;
                    // exp(-i theta (s_r - s_c)) with s in {+1, -1}.
                    let delta =
                        (if sr == 0 { 1.0 } else { -1.0 }) - (if sc == 0 { 1.0 } else { -1.0 });
                    if delta != 0.0 {
                        let phase = Complex64::new((theta * delta).cos(), -(theta * delta).sin());
                        self.data[r * dim + c] *= phase;
                    }
                }
            }
            return;
        }
        let m_i_sin = Complex64::new(0.0, -sin);
        // Left factor U: mix row pairs.
        for y in 0..dim {
            let partner = y ^ mask;
            if partner < y {
                continue;
            }
            let phase_y = m_i_sin * dense::basis_phase(y, zy_mask, ny);
            let phase_p = m_i_sin * dense::basis_phase(partner, zy_mask, ny);
            for c in 0..dim {
                let a = self.data[y * dim + c];
                let b = self.data[partner * dim + c];
                self.data[y * dim + c] = a * cos + b * phase_p;
                self.data[partner * dim + c] = b * cos + a * phase_y;
            }
        }
        // Right factor U^dag: mix column pairs with conjugated coefficients.
        for y in 0..dim {
            let partner = y ^ mask;
            if partner < y {
                continue;
            }
            let phase_y = (m_i_sin * dense::basis_phase(y, zy_mask, ny)).conj();
            let phase_p = (m_i_sin * dense::basis_phase(partner, zy_mask, ny)).conj();
            for r in 0..dim {
                let a = self.data[r * dim + y];
                let b = self.data[r * dim + partner];
                self.data[r * dim + y] = a * cos + b * phase_p;
                self.data[r * dim + partner] = b * cos + a * phase_y;
            }
        }
    }

    /// Depolarizing channel on one qubit:
    /// `rho -> (1 - p) rho + p/3 (X rho X + Y rho Y + Z rho Z)`.
    fn depolarize_qubit(&mut self, site: u32, p: f64) {
        if p == 0.0 {
            return;
        }
        let bit = 1usize << (site - 1);
        let dim = self.dim;
        let keep = 1.0 - 2.0 * p / 3.0;
        let mix = 2.0 * p / 3.0;
        let damp = 1.0 - 4.0 * p / 3.0;
        for r in 0..dim {
            if r & bit != 0 {
                continue;
            }
            for c in 0..dim {
                if c & bit != 0 {
                    continue;
                }
                let (r1, c1) = (r | bit, c | bit);
                let d00 = self.data[r * dim + c];
                let d11 = self.data[r1 * dim + c1];
                self.data[r * dim + c] = d00 * keep + d11 * mix;
                self.data[r1 * dim + c1] = d11 * keep + d00 * mix;
                self.data[r * dim + c1] *= damp;
                self.data[r1 * dim + c] *= damp;
            }
        }
    }
}

/// Noise model parameters: per-qubit per-slice depolarizing probability, the
/// attenuation factor mixing noisy and ideal branches, and the master seed of
/// the shot-sampling streams.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct NoiseSpec {
    pub p_dep: f64,
    pub eta: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_dep) {
            return Err(Error::config("p_dep must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::config("eta must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Ground state of `H(0)` by dense Hermitian eigendecomposition.
///
/// Degenerate ground spaces (within `1e-9 * max(1, |E0|)`) return the
/// normalized equal-weight sum of the eigenbasis. Phase convention: the
/// largest-magnitude amplitude is made real positive.
pub fn ground_state(h: &Hamiltonian) -> Result<StateVector> {
    if h.nqubits() > GROUND_STATE_GUARD {
        return Err(Error::guard(format!(
            "dense ground-state preparation is limited to {GROUND_STATE_GUARD} qubits \
             (requested {})",
            h.nqubits()
        )));
    }
    let m = dense::hamiltonian_matrix(h, 0.0);
    let eigen = m.symmetric_eigen();
    let min = eigen
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * min.abs().max(1.0);
    let dim = 1usize << h.nqubits();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (k, &lambda) in eigen.eigenvalues.iter().enumerate() {
        if lambda > min + tol {
            continue;
        }
        let col = eigen.eigenvectors.column(k);
        let fixed = phase_fix(col.iter().cloned().collect());
        for (a, f) in amps.iter_mut().zip(fixed) {
            *a += f;
        }
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::numerical(
            "degenerate ground states cancelled; cannot form uniform superposition",
        ));
    }
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::new(h.nqubits(), phase_fix(amps))
}

fn phase_fix(mut amps: Vec<Complex64>) -> Vec<Complex64> {
    let mut best = 0usize;
    for (i, a) in amps.iter().enumerate() {
        if a.norm_sqr() > amps[best].norm_sqr() {
            best = i;
        }
    }
    let leading = amps[best];
    if leading.norm() > 0.0 {
        let phase = leading / leading.norm();
        for a in &mut amps {
            *a /= phase;
        }
    }
    amps
}

fn check_grid(ntrotter: usize, total_time: f64) -> Result<f64> {
    if ntrotter == 0 {
        return Err(Error::config("need at least one Trotter slice"));
    }
    if total_time <= 0.0 {
        return Err(Error::config("total time must be positive"));
    }
    Ok(total_time / ntrotter as f64)
}

/// First-order Trotter evolution; returns the state at every time point
/// `t_s = s dt` for `s = 0..=ntrotter`. Slice `s` applies
/// `exp(-i dt h(t_s) P)` for every term in the Hamiltonian's stored order.
pub fn trotter_evolve(
    initial: &StateVector,
    h: &Hamiltonian,
    ntrotter: usize,
    total_time: f64,
) -> Result<Vec<StateVector>> {
    let dt = check_grid(ntrotter, total_time)?;
    let mut states = Vec::with_capacity(ntrotter + 1);
    states.push(initial.clone());
    let mut current = initial.clone();
    for s in 1..=ntrotter {
        let t = s as f64 * dt;
        for (index, (string, _)) in h.terms().iter().enumerate() {
            let coupling = h.coupling_at(index, t)?;
            if coupling != 0.0 {
                current.apply_pauli_rotation(string, dt * coupling);
            }
        }
        let norm = current.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::numerical(format!(
                "norm drifted to {norm} at slice {s}"
            )));
        }
        states.push(current.clone());
    }
    Ok(states)
}

/// Noisy evolution: the slice unitary acts as `U rho U^dag`, followed by the
/// depolarizing channel on every qubit.
pub fn noisy_evolve(
    initial: &StateVector,
    h: &Hamiltonian,
    ntrotter: usize,
    total_time: f64,
    noise: &NoiseSpec,
) -> Result<Vec<DensityMatrix>> {
    let dt = check_grid(ntrotter, total_time)?;
    noise.validate()?;
    let mut states = Vec::with_capacity(ntrotter + 1);
    let mut rho = DensityMatrix::from_pure(initial);
    states.push(rho.clone());
    for s in 1..=ntrotter {
        let t = s as f64 * dt;
        for (index, (string, _)) in h.terms().iter().enumerate() {
            let coupling = h.coupling_at(index, t)?;
            if coupling != 0.0 {
                rho.apply_pauli_rotation(string, dt * coupling);
            }
        }
        for site in 1..=h.nqubits() as u32 {
            rho.depolarize_qubit(site, noise.p_dep);
        }
        states.push(rho.clone());
    }
    Ok(states)
}

/// Mean of `nshots` independent ±1 draws with `P(+1) = (1 + truth)/2`; the
/// result lies on the grid `{-1 + 2k/nshots}`.
pub fn sample_shots(truth: f64, nshots: u64, rng: &mut impl Rng) -> f64 {
    assert!(nshots >= 1, "need at least one shot");
    let p = ((1.0 + truth.clamp(-1.0, 1.0)) / 2.0).clamp(0.0, 1.0);
    let ups = Binomial::new(nshots, p)
        .expect("valid binomial")
        .sample(rng);
    // mean = (ups - downs) / nshots
    (2.0 * ups as f64 - nshots as f64) / nshots as f64
}

/// Geometric attenuation of accumulated noise:
/// `(1 - eta^s) noisy + eta^s ideal`.
pub fn attenuate(noisy: f64, ideal: f64, eta: f64, s: usize) -> f64 {
    let w = eta.powi(s as i32);
    (1.0 - w) * noisy + w * ideal
}

/// Modified single-shot deviation attached to a measured mean: `1 - xbar^2`,
/// with a saturated mean first pulled inward by one extra opposite shot so
/// the result stays positive.
pub fn modified_deviation(xbar: f64, nshots: u64) -> f64 {
    let x = if xbar.abs() >= 1.0 {
        (nshots as f64 * xbar - xbar.signum()) / (nshots as f64 + 1.0)
    } else {
        xbar
    };
    1.0 - x * x
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TableMeta {
    pub nqubits: usize,
    pub ntrotter: usize,
    pub nshots: u64,
    pub total_time: f64,
    pub eta: f64,
    pub p_dep: f64,
    pub seed: u64,
    pub strings: Vec<String>,
}

/// Grid of measured means and modified deviations over (quantity, time
/// point). Column `s = 0` holds exact initial-state expectations; columns
/// `s >= 1` hold attenuated shot averages.
#[derive(Debug, Clone)]
pub struct MeasurementTable {
    pub strings: Vec<PauliString>,
    /// `xbar[q][s]`, `s = 0..=ntrotter`.
    pub xbar: Vec<Vec<f64>>,
    /// `y[q][s]`, always positive.
    pub y: Vec<Vec<f64>>,
    pub meta: TableMeta,
}

impl MeasurementTable {
    pub fn quantities(&self) -> usize {
        self.strings.len()
    }

    pub fn ntrotter(&self) -> usize {
        self.meta.ntrotter
    }

    pub fn dt(&self) -> f64 {
        self.meta.total_time / self.meta.ntrotter as f64
    }

    /// Fixed boundary values `xbar[q][0]`.
    pub fn boundary(&self) -> Vec<f64> {
        self.xbar.iter().map(|row| row[0]).collect()
    }

    /// Shot-noise error estimate of `xbar[q][s]` (zero for the exact `s = 0`
    /// column): the standard deviation of the mean of `nshots` single shots.
    pub fn shot_error(&self, q: usize, s: usize) -> f64 {
        if s == 0 {
            0.0
        } else {
            ((1.0 - self.xbar[q][s].powi(2)).max(0.0) / self.meta.nshots as f64).sqrt()
        }
    }

    /// CSV body `q,s,xbar,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,s,xbar,y\n");
        for (q, (xrow, yrow)) in self.xbar.iter().zip(&self.y).enumerate() {
            for s in 0..xrow.len() {
                out.push_str(&format!("{q},{s},{},{}\n", xrow[s], yrow[s]));
            }
        }
        out
    }

    /// Parses the CSV body back, given the meta header.
    pub fn from_csv(csv: &str, meta: TableMeta) -> Result<MeasurementTable> {
        let strings: Result<Vec<PauliString>> =
            meta.strings.iter().map(|s| PauliString::parse(s)).collect();
        let strings = strings?;
        let nq = strings.len();
        let cols = meta.ntrotter + 1;
        let mut xbar = vec![vec![f64::NAN; cols]; nq];
        let mut y = vec![vec![f64::NAN; cols]; nq];
        for (i, line) in csv.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::parse(i + 1, 1, "expected q,s,xbar,y"));
            }
            let q: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(i + 1, 1, "bad quantity index"))?;
            let s: usize = fields[1]
                .parse()
                .map_err(|_| Error::parse(i + 1, 1, "bad time index"))?;
            if q >= nq || s >= cols {
                return Err(Error::parse(i + 1, 1, "index out of range"));
            }
            xbar[q][s] = fields[2]
                .parse()
                .map_err(|_| Error::parse(i + 1, 1, "bad xbar"))?;
            y[q][s] = fields[3]
                .parse()
                .map_err(|_| Error::parse(i + 1, 1, "bad y"))?;
        }
        if xbar.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::config("measurement table has missing cells"));
        }
        Ok(MeasurementTable {
            strings,
            xbar,
            y,
            meta,
        })
    }
}

/// Runs both evolution branches and assembles the measurement table for the
/// given quantities.
///
/// The `s = 0` column is evaluated exactly on the initial state (no shots, no
/// noise). For `s >= 1`, the noisy and ideal expectations are each averaged
/// over `nshots` independent shots (independent substreams per quantity, time
/// point and branch, derived from `noise.seed`), then mixed by the
/// attenuation factor.
pub fn measure_table(
    h: &Hamiltonian,
    strings: &[PauliString],
    ntrotter: usize,
    total_time: f64,
    nshots: u64,
    noise: &NoiseSpec,
    initial: &StateVector,
) -> Result<MeasurementTable> {
    noise.validate()?;
    if nshots == 0 {
        return Err(Error::config("need at least one shot"));
    }
    if strings.is_empty() {
        return Err(Error::config("no quantities to measure"));
    }
    let ideal = trotter_evolve(initial, h, ntrotter, total_time)?;
    let noisy = noisy_evolve(initial, h, ntrotter, total_time, noise)?;
    let mut xbar = vec![vec![0.0; ntrotter + 1]; strings.len()];
    let mut y = vec![vec![0.0; ntrotter + 1]; strings.len()];
    for (q, string) in strings.iter().enumerate() {
        xbar[q][0] = initial.expectation(string);
        y[q][0] = modified_deviation(xbar[q][0], nshots);
        for s in 1..=ntrotter {
            let truth_noisy = noisy[s].expectation(string);
            let truth_ideal = ideal[s].expectation(string);
            let mut rng_noisy =
                ChaCha12Rng::seed_from_u64(seeds::substream(noise.seed, &[q as u64, s as u64, 0]));
            let mut rng_ideal =
                ChaCha12Rng::seed_from_u64(seeds::substream(noise.seed, &[q as u64, s as u64, 1]));
            let sampled_noisy = sample_shots(truth_noisy, nshots, &mut rng_noisy);
            let sampled_ideal = sample_shots(truth_ideal, nshots, &mut rng_ideal);
            xbar[q][s] = attenuate(sampled_noisy, sampled_ideal, noise.eta, s);
            y[q][s] = modified_deviation(xbar[q][s], nshots);
        }
    }
    Ok(MeasurementTable {
        strings: strings.to_vec(),
        xbar,
        y,
        meta: TableMeta {
            nqubits: h.nqubits(),
            ntrotter,
            nshots,
            total_time,
            eta: noise.eta,
            p_dep: noise.p_dep,
            seed: noise.seed,
            strings: strings.iter().map(|s| s.to_string()).collect(),
        },
    })
}
