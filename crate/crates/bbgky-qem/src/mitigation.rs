//! Configuration sampling against the physics-constrained action.
//!
//! A configuration is the real vector of candidate expectation values over
//! all quantities and time points. The quantum action pins it to the noisy
//! measurements through Gaussian penalties; the BBGKY action penalizes
//! finite-difference residuals of the selected equations of motion. An
//! annealed Metropolis-Hastings chain samples the mixed action and the mean
//! of the selected configurations is the mitigated trajectory.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::hierarchy::{HierarchyGraph, ZMode};
use crate::simulator::MeasurementTable;

/// Candidate expectation values `x[q][s]` for `s = 1..=nt`, with the fixed
/// `s = 0` boundary column.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    nq: usize,
    nt: usize,
    x: Vec<f64>,
    boundary: Vec<f64>,
}

impl Configuration {
    pub fn new(nq: usize, nt: usize, boundary: Vec<f64>) -> Result<Configuration> {
        if boundary.len() != nq {
            return Err(Error::config("boundary length must match quantity count"));
        }
        if nt == 0 {
            return Err(Error::config("need at least one time point"));
        }
        Ok(Configuration {
            nq,
            nt,
            x: vec![0.0; nq * nt],
            boundary,
        })
    }

    pub fn quantities(&self) -> usize {
        self.nq
    }

    pub fn time_points(&self) -> usize {
        self.nt
    }

    /// Coordinate value; `s = 0` resolves to the boundary.
    pub fn value(&self, q: usize, s: usize) -> f64 {
        if s == 0 {
            self.boundary[q]
        } else {
            self.x[q * self.nt + s - 1]
        }
    }

    /// Sets a free coordinate (`s >= 1`).
    pub fn set(&mut self, q: usize, s: usize, v: f64) {
        assert!(s >= 1, "the s = 0 column is fixed");
        self.x[q * self.nt + s - 1] = v;
    }

    pub fn boundary(&self) -> &[f64] {
        &self.boundary
    }

    fn coord(&self, q: usize, s: usize) -> usize {
        q * self.nt + s - 1
    }
}

/// Sources and dependency structure of the selected BBGKY equations, compiled
/// against a fixed quantity ordering and time grid.
///
/// `rhs[i][s]` lists `(target quantity, coefficient at t_s)` for source `i`,
/// couplings pre-evaluated and merged per target. `dependents[coord]` inverts
/// the map: all residuals whose value changes when that coordinate moves,
/// with the exact (affine) change per unit shift.
#[derive(Debug, Clone)]
pub struct CompiledEquations {
    nq: usize,
    nt: usize,
    dt: f64,
    /// `|Q_{r+1}| / |Q_r|` normalization of the BBGKY action.
    prefactor: f64,
    source_q: Vec<usize>,
    rhs: Vec<Vec<Vec<(usize, f64)>>>,
    dependents: Vec<Vec<(u32, f64)>>,
}

impl CompiledEquations {
    /// Compiles the equations of the `Q_r` sources over the `Q_{r+1}`
    /// quantities of an expanded hierarchy graph.
    pub fn compile(
        graph: &HierarchyGraph,
        h: &Hamiltonian,
        r: usize,
        nt: usize,
        total_time: f64,
    ) -> Result<CompiledEquations> {
        let n_sources = graph.layer_size(r)?;
        let nq = graph.layer_size(r + 1)?;
        if nt == 0 || total_time <= 0.0 {
            return Err(Error::config("need a positive time grid"));
        }
        let dt = total_time / nt as f64;
        let mut rhs = Vec::with_capacity(n_sources);
        for i in 0..n_sources {
            let eq = graph
                .equation(i)
                .ok_or_else(|| Error::numerical(format!("equation of source {i} not expanded")))?;
            let mut per_s = Vec::with_capacity(nt + 1);
            for s in 0..=nt {
                let t = s as f64 * dt;
                let mut merged: Vec<(usize, f64)> = Vec::new();
                for term in &eq.rhs {
                    let target = graph.index_of(&term.target).ok_or_else(|| {
                        Error::numerical("rhs target missing from graph".to_string())
                    })?;
                    if target >= nq {
                        return Err(Error::numerical(format!(
                            "rhs target {} outside the Q_{} quantity set",
                            term.target,
                            r + 1
                        )));
                    }
                    let c = term.coefficient_at(h, t);
                    match merged.iter_mut().find(|(tq, _)| *tq == target) {
                        Some(entry) => entry.1 += c,
                        None => merged.push((target, c)),
                    }
                }
                merged.sort_by_key(|&(tq, _)| tq);
                per_s.push(merged);
            }
            rhs.push(per_s);
        }
        let mut eqs = CompiledEquations {
            nq,
            nt,
            dt,
            prefactor: nq as f64 / n_sources as f64,
            source_q: (0..n_sources).collect(),
            rhs,
            dependents: Vec::new(),
        };
        eqs.build_dependents();
        Ok(eqs)
    }

    pub fn quantities(&self) -> usize {
        self.nq
    }

    pub fn sources(&self) -> usize {
        self.source_q.len()
    }

    pub fn time_points(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    fn residual_index(&self, i: usize, s: usize) -> usize {
        i * (self.nt + 1) + s
    }

    fn residual_count(&self) -> usize {
        self.source_q.len() * (self.nt + 1)
    }

    /// Inverts the forward dependency: RHS terms touch the residual at the
    /// same time point; the derivative stencil of a source quantity touches
    /// its neighbors (the forward stencil at `s = 0` reaches `s = 1`, the
    /// special `s = 1` stencil reaches `s = 2`, the backward end stencil
    /// reaches `nt` and `nt - 1`).
    fn build_dependents(&mut self) {
        let nt = self.nt;
        let mut deps: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.nq * nt];
        let mut add = |coord: usize, res: usize, c: f64| {
            let row = &mut deps[coord];
            match row.iter_mut().find(|(r, _)| *r == res as u32) {
                Some(entry) => entry.1 += c,
                None => row.push((res as u32, c)),
            }
        };
        for (i, &qi) in self.source_q.iter().enumerate() {
            for s in 0..=nt {
                let res = self.residual_index(i, s);
                for &(tq, c) in &self.rhs[i][s] {
                    if s >= 1 && c != 0.0 {
                        add(tq * nt + s - 1, res, c);
                    }
                }
                // Minus the derivative stencil's partials.
                if s == 0 {
                    add(qi * nt, res, -1.0 / self.dt);
                } else if s == nt {
                    add(qi * nt + nt - 1, res, -1.0 / self.dt);
                    if nt >= 2 {
                        add(qi * nt + nt - 2, res, 1.0 / self.dt);
                    }
                } else if s == 1 {
                    add(qi * nt + 1, res, -0.5 / self.dt);
                } else {
                    add(qi * nt + s, res, -0.5 / self.dt);
                    add(qi * nt + s - 2, res, 0.5 / self.dt);
                }
            }
        }
        for row in &mut deps {
            row.sort_by_key(|&(r, _)| r);
        }
        self.dependents = deps;
    }

    /// Residuals whose value depends on coordinate `(q, s)`, as
    /// `(source index, time point)` pairs.
    pub fn dependent_residuals(&self, q: usize, s: usize) -> Vec<(usize, usize)> {
        self.dependents[q * self.nt + s - 1]
            .iter()
            .map(|&(res, _)| (res as usize / (self.nt + 1), res as usize % (self.nt + 1)))
            .collect()
    }

    /// Finite-difference approximation of the time derivative of source `i`
    /// at time point `s`.
    fn derivative(&self, i: usize, s: usize, cfg: &Configuration) -> f64 {
        let q = self.source_q[i];
        let nt = self.nt;
        if s == 0 {
            (cfg.value(q, 1) - cfg.boundary[q]) / self.dt
        } else if s == nt {
            (cfg.value(q, nt) - cfg.value(q, nt - 1)) / self.dt
        } else if s == 1 {
            (cfg.value(q, 2) - cfg.boundary[q]) / (2.0 * self.dt)
        } else {
            (cfg.value(q, s + 1) - cfg.value(q, s - 1)) / (2.0 * self.dt)
        }
    }

    /// Discretized equation residual
    /// `E(i, s) = sum_rhs c(t_s) x(q', s) - D(i, s)`.
    pub fn residual(&self, i: usize, s: usize, cfg: &Configuration) -> f64 {
        let mut acc = 0.0;
        for &(tq, c) in &self.rhs[i][s] {
            acc += c * cfg.value(tq, s);
        }
        acc - self.derivative(i, s, cfg)
    }

    fn all_residuals(&self, cfg: &Configuration) -> Vec<f64> {
        let mut out = vec![0.0; self.residual_count()];
        for i in 0..self.source_q.len() {
            for s in 0..=self.nt {
                out[self.residual_index(i, s)] = self.residual(i, s, cfg);
            }
        }
        out
    }
}

/// BBGKY action: `(|Q_{r+1}|/|Q_r|) dt sum_i sum_s E(i, s)^2`.
pub fn action_bbgky(eqs: &CompiledEquations, cfg: &Configuration) -> f64 {
    let mut acc = 0.0;
    for i in 0..eqs.sources() {
        for s in 0..=eqs.nt {
            let e = eqs.residual(i, s, cfg);
            acc += e * e;
        }
    }
    eqs.prefactor * eqs.dt * acc
}

/// Quantum action: `(dt/2) sum_q sum_s ((x - xbar)/y)^2`; the `s = 0` term is
/// identically zero because the boundary is pinned.
pub fn action_quantum(cfg: &Configuration, table: &MeasurementTable) -> f64 {
    let dt = table.dt();
    let mut acc = 0.0;
    for q in 0..cfg.nq {
        for s in 1..=cfg.nt {
            let d = (cfg.value(q, s) - table.xbar[q][s]) / table.y[q][s];
            acc += d * d;
        }
    }
    0.5 * dt * acc
}

/// Interpolated action `(1 - z) S_Q + z S_B`.
pub fn action_total(
    eqs: &CompiledEquations,
    cfg: &Configuration,
    table: &MeasurementTable,
    z: f64,
) -> f64 {
    (1.0 - z) * action_quantum(cfg, table) + z * action_bbgky(eqs, cfg)
}

/// Action change from shifting coordinate `(q, s)` by `h`, computed from the
/// single quantum penalty term and the residuals that depend on the
/// coordinate. Matches full recomputation to rounding.
pub fn local_delta(
    eqs: &CompiledEquations,
    cfg: &Configuration,
    table: &MeasurementTable,
    z: f64,
    q: usize,
    s: usize,
    h: f64,
) -> f64 {
    let x = cfg.value(q, s);
    let xbar = table.xbar[q][s];
    let y = table.y[q][s];
    let dq = 0.5 * table.dt() * ((x + h - xbar).powi(2) - (x - xbar).powi(2)) / (y * y);
    let mut db = 0.0;
    for &(res, c) in &eqs.dependents[cfg.coord(q, s)] {
        let i = res as usize / (eqs.nt + 1);
        let sp = res as usize % (eqs.nt + 1);
        let e = eqs.residual(i, sp, cfg);
        db += c * h * (2.0 * e + c * h);
    }
    (1.0 - z) * dq + z * eqs.prefactor * eqs.dt * db
}

/// Annealing schedule: `sweeps` Metropolis-Hastings sweeps with the inverse
/// temperature raised by `dlambda` after each one; `samples` equispaced
/// configurations are kept after `thermalization` sweeps.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub thermalization: usize,
    pub samples: usize,
    pub dlambda: f64,
    /// Standard deviation of the Gaussian coordinate shifts.
    pub proposal_scale: f64,
    pub seed: u64,
    /// Visit coordinates in shuffled order instead of ascending `(q, s)`;
    /// for autocorrelation studies.
    #[serde(default)]
    pub randomize_order: bool,
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.thermalization >= self.sweeps {
            return Err(Error::config(
                "thermalization must be shorter than the sweep count",
            ));
        }
        if self.samples == 0 {
            return Err(Error::config("need at least one sample"));
        }
        if (self.sweeps - self.thermalization) % self.samples != 0 {
            return Err(Error::config(format!(
                "samples ({}) must divide the post-thermalization sweeps ({}) evenly",
                self.samples,
                self.sweeps - self.thermalization
            )));
        }
        if self.dlambda < 0.0 {
            return Err(Error::config("dlambda must be nonnegative"));
        }
        if self.proposal_scale <= 0.0 {
            return Err(Error::config("proposal scale must be positive"));
        }
        Ok(())
    }
}

/// Chain record: acceptance and action traces plus the effective settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub schedule: AnnealSchedule,
    pub z: f64,
    pub final_lambda: f64,
    pub overall_acceptance: f64,
    /// `(sweep, acceptance rate since the previous entry)`, recorded at sweep
    /// 1 and every 100 sweeps.
    pub acceptance_trace: Vec<(usize, f64)>,
    /// `(sweep, total action)` on the same grid.
    pub action_trace: Vec<(usize, f64)>,
}

/// Mitigated trajectories: per-coordinate mean and standard deviation of the
/// selected configurations. Column `s = 0` carries the fixed boundary with
/// zero spread.
#[derive(Debug, Clone)]
pub struct MitigationResult {
    pub chi: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub diagnostics: ChainDiagnostics,
}

impl MitigationResult {
    pub fn quantities(&self) -> usize {
        self.chi.len()
    }

    /// CSV body `q,s,chi,sigma`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,s,chi,sigma\n");
        for (q, (crow, srow)) in self.chi.iter().zip(&self.sigma).enumerate() {
            for s in 0..crow.len() {
                out.push_str(&format!("{q},{s},{},{}\n", crow[s], srow[s]));
            }
        }
        out
    }
}

/// Cached residual values kept in lockstep with the configuration; proposals
/// only touch the affected entries, and a periodic full refresh caps
/// floating-point drift.
const RESIDUAL_REFRESH_SWEEPS: usize = 16;

fn hot_start(nq: usize, nt: usize, boundary: Vec<f64>, rngs: &mut [ChaCha12Rng]) -> Configuration {
    let mut cfg = Configuration::new(nq, nt, boundary).expect("validated dims");
    for q in 0..nq {
        for s in 1..=nt {
            let v = rngs[q * nt + s - 1].gen_range(-2.0..2.0);
            cfg.set(q, s, v);
        }
    }
    cfg
}

/// Runs the annealed Metropolis-Hastings chain.
///
/// Without `x0`, the chain begins from a random hot start with every
/// coordinate uniform in `[-2, 2]`. Each coordinate owns a deterministic RNG
/// substream derived from the schedule seed, so results are reproducible and
/// relabeling quantities (with the matching stream keys and visit order)
/// permutes the output exactly.
pub fn run_chain(
    table: &MeasurementTable,
    eqs: &CompiledEquations,
    z: f64,
    schedule: &AnnealSchedule,
    x0: Option<Configuration>,
) -> Result<MitigationResult> {
    run_chain_keyed(table, eqs, z, schedule, x0, None, None)
}

pub(crate) fn run_chain_keyed(
    table: &MeasurementTable,
    eqs: &CompiledEquations,
    z: f64,
    schedule: &AnnealSchedule,
    x0: Option<Configuration>,
    stream_keys: Option<&[u64]>,
    visit_order: Option<&[u32]>,
) -> Result<MitigationResult> {
    schedule.validate()?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::config("z must lie in [0, 1]"));
    }
    let nq = eqs.nq;
    let nt = eqs.nt;
    if table.quantities() < nq {
        return Err(Error::config(format!(
            "table covers {} quantities, equations need {}",
            table.quantities(),
            nq
        )));
    }
    if table.ntrotter() != nt {
        return Err(Error::config("table and equations disagree on the grid"));
    }
    let n_coords = nq * nt;

    let mut rngs: Vec<ChaCha12Rng> = (0..n_coords)
        .map(|c| {
            let key = match stream_keys {
                Some(keys) => keys[c],
                None => c as u64,
            };
            ChaCha12Rng::seed_from_u64(crate::seeds::substream(schedule.seed, &[key]))
        })
        .collect();
    let mut order_rng = ChaCha12Rng::seed_from_u64(crate::seeds::split(schedule.seed, "order"));

    let mut cfg = match x0 {
        Some(cfg) => {
            if cfg.nq != nq || cfg.nt != nt {
                return Err(Error::config("initial configuration dimensions mismatch"));
            }
            cfg
        }
        None => hot_start(nq, nt, table.boundary()[..nq].to_vec(), &mut rngs),
    };

    // Per-coordinate quantum weights (dt/2) / y^2 and measurement targets.
    let dtq = 0.5 * eqs.dt * (1.0 - z);
    let weights: Vec<f64> = (0..n_coords)
        .map(|c| {
            let (q, s) = (c / nt, c % nt + 1);
            dtq / (table.y[q][s] * table.y[q][s])
        })
        .collect();
    let targets: Vec<f64> = (0..n_coords)
        .map(|c| {
            let (q, s) = (c / nt, c % nt + 1);
            table.xbar[q][s]
        })
        .collect();

    let bbgky_weight = z * eqs.prefactor * eqs.dt;
    let mut residuals = eqs.all_residuals(&cfg);

    let normal = Normal::new(0.0, schedule.proposal_scale).expect("positive scale");
    let mut lambda = 0.0f64;
    let mut accepted_total = 0usize;
    let mut accepted_window = 0usize;
    let mut window_proposals = 0usize;
    let mut acceptance_trace = Vec::new();
    let mut action_trace = Vec::new();

    let sample_step = (schedule.sweeps - schedule.thermalization) / schedule.samples;
    let mut sum = vec![0.0f64; n_coords];
    let mut sumsq = vec![0.0f64; n_coords];
    let mut n_samples = 0usize;

    let mut order: Vec<u32> = match visit_order {
        Some(v) => {
            if v.len() != n_coords {
                return Err(Error::config("visit order must cover every coordinate"));
            }
            v.to_vec()
        }
        None => (0..n_coords as u32).collect(),
    };

    for sweep in 1..=schedule.sweeps {
        if schedule.randomize_order {
            order.shuffle(&mut order_rng);
        }
        for &coord in &order {
            let coord = coord as usize;
            let (q, s) = (coord / nt, coord % nt + 1);
            let rng = &mut rngs[coord];
            let shift = normal.sample(rng);
            let u: f64 = rng.gen();

            let x = cfg.x[coord];
            let mut delta = weights[coord] * shift * (2.0 * (x - targets[coord]) + shift);
            if bbgky_weight != 0.0 {
                let mut db = 0.0;
                for &(res, c) in &eqs.dependents[coord] {
                    let e = residuals[res as usize];
                    db += c * shift * (2.0 * e + c * shift);
                }
                delta += bbgky_weight * db;
            }

            let accept = delta <= 0.0 || u < (-lambda * delta).exp();
            if accept {
                cfg.x[coord] = x + shift;
                for &(res, c) in &eqs.dependents[coord] {
                    residuals[res as usize] += c * shift;
                }
                accepted_total += 1;
                accepted_window += 1;
            }
            window_proposals += 1;
            let _ = (q, s);
        }
        lambda += schedule.dlambda;

        if sweep % RESIDUAL_REFRESH_SWEEPS == 0 {
            residuals = eqs.all_residuals(&cfg);
        }
        if sweep == 1 || sweep % 100 == 0 {
            acceptance_trace.push((sweep, accepted_window as f64 / window_proposals as f64));
            accepted_window = 0;
            window_proposals = 0;
            action_trace.push((sweep, action_total(eqs, &cfg, table, z)));
        }
        if sweep > schedule.thermalization && (sweep - schedule.thermalization) % sample_step == 0 {
            for (c, &v) in cfg.x.iter().enumerate() {
                sum[c] += v;
                sumsq[c] += v * v;
            }
            n_samples += 1;
        }
    }
    debug_assert_eq!(n_samples, schedule.samples);

    let overall = accepted_total as f64 / (schedule.sweeps * n_coords) as f64;
    if overall == 0.0 {
        return Err(Error::numerical(
            "chain froze: no proposal was ever accepted",
        ));
    }

    let n = n_samples as f64;
    let mut chi = vec![vec![0.0; nt + 1]; nq];
    let mut sigma = vec![vec![0.0; nt + 1]; nq];
    for q in 0..nq {
        chi[q][0] = cfg.boundary[q];
        for s in 1..=nt {
            let c = q * nt + s - 1;
            let mean = sum[c] / n;
            chi[q][s] = mean;
            let var = if n_samples > 1 {
                ((sumsq[c] - sum[c] * sum[c] / n) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            sigma[q][s] = var.sqrt();
        }
    }

    Ok(MitigationResult {
        chi,
        sigma,
        diagnostics: ChainDiagnostics {
            schedule: schedule.clone(),
            z,
            final_lambda: lambda,
            overall_acceptance: overall,
            acceptance_trace,
            action_trace,
        },
    })
}

/// Full scheme: compile the `Q_r` equations over the `Q_{r+1}` quantities of
/// the graph, take `z` from the layer ratio, and run the chain from a hot
/// start against the table.
pub fn mitigate(
    table: &MeasurementTable,
    graph: &HierarchyGraph,
    h: &Hamiltonian,
    r: usize,
    schedule: &AnnealSchedule,
    zmode: ZMode,
) -> Result<MitigationResult> {
    let eqs = CompiledEquations::compile(graph, h, r, table.ntrotter(), table.meta.total_time)?;
    // The table rows must follow the graph's quantity ordering.
    for (q, node) in graph.nodes().iter().take(eqs.nq).enumerate() {
        if table.strings[q] != *node {
            return Err(Error::config(format!(
                "table row {q} holds {}, the hierarchy expects {node}",
                table.strings[q]
            )));
        }
    }
    let z = graph.z_ratio(r, zmode)?;
    run_chain(table, &eqs, z, schedule, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Hamiltonian, TimeCoupling};
    use crate::pauli::PauliString;
    use crate::simulator::{measure_table, trotter_evolve, NoiseSpec, StateVector, TableMeta};
    use approx::assert_abs_diff_eq;
    use rand_chacha::ChaCha12Rng;

    fn ps(text: &str) -> PauliString {
        PauliString::parse(text).unwrap()
    }

    /// Single-qubit model H = omega X with Q_0 = {Z1}: the subhierarchy is
    /// {Z1, Y1} with R = 1 and the exact dynamics Z = cos(2wt), Y = -sin(2wt)
    /// from |0>.
    fn single_qubit_setup(omega: f64) -> (Hamiltonian, HierarchyGraph) {
        let h = Hamiltonian::new(1, vec![(ps("X1"), TimeCoupling::Constant(omega))])
            .unwrap()
            .0;
        let (_, g) = HierarchyGraph::subhierarchy_radius(&[ps("Z1")], &h).unwrap();
        (h, g)
    }

    fn synthetic_table(
        strings: Vec<PauliString>,
        xbar: Vec<Vec<f64>>,
        nt: usize,
        total_time: f64,
    ) -> MeasurementTable {
        let y = xbar
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| crate::simulator::modified_deviation(x, 1000))
                    .collect()
            })
            .collect();
        let meta = TableMeta {
            nqubits: 1,
            ntrotter: nt,
            nshots: 1000,
            total_time,
            eta: 1.0,
            p_dep: 0.0,
            seed: 0,
            strings: strings.iter().map(|s| s.to_string()).collect(),
        };
        MeasurementTable {
            strings,
            xbar,
            y,
            meta,
        }
    }

    /// Conserved quantity (empty rhs) with a constant configuration has zero
    /// residual everywhere.
    #[test]
    fn conserved_constant_residuals_vanish() {
        let h = Hamiltonian::new(1, vec![(ps("Z1"), TimeCoupling::Constant(1.0))])
            .unwrap()
            .0;
        let (_, g) = HierarchyGraph::subhierarchy_radius(&[ps("Z1")], &h).unwrap();
        let eqs = CompiledEquations::compile(&g, &h, 0, 6, 1.8).unwrap();
        let mut cfg = Configuration::new(1, 6, vec![0.4]).unwrap();
        for s in 1..=6 {
            cfg.set(0, s, 0.4);
        }
        for s in 0..=6 {
            assert_abs_diff_eq!(eqs.residual(0, s, &cfg), 0.0);
        }
        assert_abs_diff_eq!(action_bbgky(&eqs, &cfg), 0.0);
    }

    #[test]
    fn forward_stencil_arithmetic() {
        // Empty rhs, s = 0: E = -(x1 - b)/dt = -(0.5 - 0.2)/0.3 = -1.
        let h = Hamiltonian::new(1, vec![(ps("Z1"), TimeCoupling::Constant(1.0))])
            .unwrap()
            .0;
        let (_, g) = HierarchyGraph::subhierarchy_radius(&[ps("Z1")], &h).unwrap();
        let nt = 10;
        let eqs = CompiledEquations::compile(&g, &h, 0, nt, 3.0).unwrap();
        let mut cfg = Configuration::new(1, nt, vec![0.2]).unwrap();
        cfg.set(0, 1, 0.5);
        assert_abs_diff_eq!(eqs.residual(0, 0, &cfg), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_solution_has_second_order_interior_residuals() {
        let omega = 1.0;
        let (h, g) = single_qubit_setup(omega);
        for nt in [10usize, 20, 40] {
            let total = 2.0;
            let dt = total / nt as f64;
            let eqs = CompiledEquations::compile(&g, &h, 1, nt, total).unwrap();
            // Quantity order: Z1 (q0), Y1.
            let zq = g.index_of(&ps("Z1")).unwrap();
            let yq = g.index_of(&ps("Y1")).unwrap();
            let mut cfg = Configuration::new(2, nt, vec![1.0, 0.0]).unwrap();
            for s in 1..=nt {
                let t = s as f64 * dt;
                cfg.set(zq, s, (2.0 * omega * t).cos());
                cfg.set(yq, s, -(2.0 * omega * t).sin());
            }
            let mut worst_interior = 0.0f64;
            for i in 0..eqs.sources() {
                for s in 2..nt {
                    worst_interior = worst_interior.max(eqs.residual(i, s, &cfg).abs());
                }
            }
            // Centered differences: interior residual = O(dt^2).
            assert!(
                worst_interior < 2.0 * dt * dt,
                "nt={nt}: {worst_interior} vs dt^2={}",
                dt * dt
            );
        }
    }

    #[test]
    fn action_values() {
        let (h, g) = single_qubit_setup(1.0);
        let nt = 5;
        let eqs = CompiledEquations::compile(&g, &h, 1, nt, 1.5).unwrap();
        let dt = 0.3;
        let strings = vec![ps("Z1"), ps("Y1")];
        let xbar = vec![vec![0.1; nt + 1], vec![-0.2; nt + 1]];
        let table = synthetic_table(strings, xbar, nt, 1.5);

        // Configuration equal to the measurements: S_Q = 0.
        let mut cfg = Configuration::new(2, nt, table.boundary()).unwrap();
        for q in 0..2 {
            for s in 1..=nt {
                cfg.set(q, s, table.xbar[q][s]);
            }
        }
        assert_abs_diff_eq!(action_quantum(&cfg, &table), 0.0);

        // One offset coordinate: S_Q = (dt/2) (delta/y)^2.
        let mut off = cfg.clone();
        off.set(0, 3, table.xbar[0][3] + 0.25);
        let y = table.y[0][3];
        assert_abs_diff_eq!(
            action_quantum(&off, &table),
            0.5 * dt * (0.25 / y).powi(2),
            epsilon = 1e-12
        );

        // Interpolation endpoints and midpoint.
        let sq = action_quantum(&off, &table);
        let sb = action_bbgky(&eqs, &off);
        assert_abs_diff_eq!(action_total(&eqs, &off, &table, 0.0), sq);
        assert_abs_diff_eq!(action_total(&eqs, &off, &table, 1.0), sb);
        assert_abs_diff_eq!(action_total(&eqs, &off, &table, 0.5), 0.5 * (sq + sb));
        assert!(sq >= 0.0 && sb >= 0.0);
    }

    #[test]
    fn empty_rhs_stencil_footprint() {
        // A shift of a conserved quantity's interior coordinate feeds exactly
        // the two neighbor stencils (s-1 and s+1); the residual at s itself
        // uses the centered difference and skips the coordinate.
        let h = Hamiltonian::new(1, vec![(ps("Z1"), TimeCoupling::Constant(1.0))])
            .unwrap()
            .0;
        let (_, g) = HierarchyGraph::subhierarchy_radius(&[ps("Z1")], &h).unwrap();
        let nt = 10;
        let eqs = CompiledEquations::compile(&g, &h, 0, nt, 3.0).unwrap();
        let deps = eqs.dependent_residuals(0, 5);
        assert_eq!(deps, vec![(0, 4), (0, 6)]);
        // Edge coordinates: s = 1 feeds the forward stencil at 0 and the
        // centered one at 2; s = nt feeds nt - 1 and the backward end.
        assert_eq!(eqs.dependent_residuals(0, 1), vec![(0, 0), (0, 2)]);
        assert_eq!(eqs.dependent_residuals(0, nt), vec![(0, nt - 1), (0, nt)]);
        assert_eq!(eqs.dependent_residuals(0, 2), vec![(0, 1), (0, 3)]);
    }

    #[test]
    fn local_delta_matches_global_recompute() {
        let (h, g) = single_qubit_setup(0.8);
        let nt = 8;
        let eqs = CompiledEquations::compile(&g, &h, 1, nt, 2.4).unwrap();
        let strings = vec![ps("Z1"), ps("Y1")];
        let xbar: Vec<Vec<f64>> = (0..2)
            .map(|q| {
                (0..=nt)
                    .map(|s| ((q + 1) as f64 * (s as f64) * 0.37).sin() * 0.8)
                    .collect()
            })
            .collect();
        let table = synthetic_table(strings, xbar, nt, 2.4);

        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut cfg = Configuration::new(2, nt, table.boundary()).unwrap();
        for q in 0..2 {
            for s in 1..=nt {
                cfg.set(q, s, rng.gen_range(-1.5..1.5));
            }
        }
        for z in [0.0, 0.3, 1.0] {
            for _ in 0..200 {
                let q = rng.gen_range(0..2);
                let s = rng.gen_range(1..=nt);
                let shift = rng.gen_range(-0.5..0.5);
                let fast = local_delta(&eqs, &cfg, &table, z, q, s, shift);
                let before = action_total(&eqs, &cfg, &table, z);
                let mut moved = cfg.clone();
                moved.set(q, s, cfg.value(q, s) + shift);
                let after = action_total(&eqs, &moved, &table, z);
                let slow = after - before;
                let tol = 1e-9 * slow.abs().max(1e-6);
                assert!(
                    (fast - slow).abs() <= tol,
                    "z={z} q={q} s={s} h={shift}: {fast} vs {slow}"
                );
            }
        }
        // Zero shift changes nothing.
        assert_abs_diff_eq!(local_delta(&eqs, &cfg, &table, 0.5, 0, 3, 0.0), 0.0);
    }

    fn quick_schedule(seed: u64) -> AnnealSchedule {
        AnnealSchedule {
            sweeps: 2000,
            thermalization: 500,
            samples: 30,
            dlambda: 1.0,
            proposal_scale: 0.05,
            seed,
            randomize_order: false,
        }
    }

    #[test]
    fn schedule_validation() {
        let mut s = quick_schedule(1);
        s.validate().unwrap();
        s.thermalization = 2000;
        assert!(s.validate().is_err());
        s.thermalization = 500;
        s.samples = 7; // 1500 % 7 != 0
        assert!(s.validate().is_err());
        s.samples = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn pure_quantum_chain_recovers_measurements() {
        // z = 0: the action is minimized exactly at the measurements, so the
        // chain mean lands within a few sample deviations of each target.
        let (h, g) = single_qubit_setup(1.0);
        let nt = 6;
        let strings = vec![ps("Z1"), ps("Y1")];
        let xbar: Vec<Vec<f64>> = (0..2)
            .map(|q| {
                (0..=nt)
                    .map(|s| 0.6 * ((q as f64 + 0.5) * s as f64 * 0.45).cos())
                    .collect()
            })
            .collect();
        let table = synthetic_table(strings, xbar, nt, 1.8);
        let eqs = CompiledEquations::compile(&g, &h, 1, nt, 1.8).unwrap();
        let result = run_chain(&table, &eqs, 0.0, &quick_schedule(5), None).unwrap();
        for q in 0..2 {
            for s in 1..=nt {
                let sigma = result.sigma[q][s].max(1e-6);
                assert!(
                    (result.chi[q][s] - table.xbar[q][s]).abs() < 3.0 * sigma,
                    "q={q} s={s}: chi={} xbar={} sigma={sigma}",
                    result.chi[q][s],
                    table.xbar[q][s]
                );
            }
        }
        // Boundary column is passed through untouched.
        assert_abs_diff_eq!(result.chi[0][0], table.xbar[0][0]);
        assert_abs_diff_eq!(result.sigma[0][0], 0.0);
    }

    #[test]
    fn first_sweep_accepts_everything() {
        let (h, g) = single_qubit_setup(1.0);
        let nt = 4;
        let table = synthetic_table(
            vec![ps("Z1"), ps("Y1")],
            vec![vec![0.0; nt + 1], vec![0.0; nt + 1]],
            nt,
            1.2,
        );
        let eqs = CompiledEquations::compile(&g, &h, 1, nt, 1.2).unwrap();
        let result = run_chain(&table, &eqs, 0.5, &quick_schedule(2), None).unwrap();
        let (sweep, rate) = result.diagnostics.acceptance_trace[0];
        assert_eq!(sweep, 1);
        assert_abs_diff_eq!(rate, 1.0);
        assert!(result.diagnostics.overall_acceptance > 0.0);
        assert_abs_diff_eq!(
            result.diagnostics.final_lambda,
            quick_schedule(2).sweeps as f64
        );
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let (h, g) = single_qubit_setup(1.0);
        let nt = 5;
        let table = synthetic_table(
            vec![ps("Z1"), ps("Y1")],
            vec![vec![0.3; nt + 1], vec![-0.4; nt + 1]],
            nt,
            1.5,
        );
        let eqs = CompiledEquations::compile(&g, &h, 1, nt, 1.5).unwrap();
        let a = run_chain(&table, &eqs, 0.4, &quick_schedule(77), None).unwrap();
        let b = run_chain(&table, &eqs, 0.4, &quick_schedule(77), None).unwrap();
        assert_eq!(a.chi, b.chi);
        assert_eq!(a.sigma, b.sigma);
        let c = run_chain(&table, &eqs, 0.4, &quick_schedule(78), None).unwrap();
        assert_ne!(a.chi, c.chi);
    }

    #[test]
    fn relabeling_quantities_permutes_chi() {
        // Swap the two quantities everywhere (table rows, hierarchy order)
        // and give each coordinate the stream key of its preimage: the chain
        // output must permute identically.
        let omega = 0.9;
        let h = Hamiltonian::new(1, vec![(ps("X1"), TimeCoupling::Constant(omega))])
            .unwrap()
            .0;
        let nt = 5;
        let (_, g_fwd) = HierarchyGraph::subhierarchy_radius(&[ps("Z1")], &h).unwrap();
        let (_, g_rev) = HierarchyGraph::subhierarchy_radius(&[ps("Y1")], &h).unwrap();
        assert_eq!(g_fwd.nodes()[0], ps("Z1"));
        assert_eq!(g_rev.nodes()[0], ps("Y1"));

        let xz: Vec<f64> = (0..=nt).map(|s| 0.5 * (s as f64 * 0.4).cos()).collect();
        let xy: Vec<f64> = (0..=nt).map(|s| -0.5 * (s as f64 * 0.4).sin()).collect();
        let table_fwd = synthetic_table(
            vec![ps("Z1"), ps("Y1")],
            vec![xz.clone(), xy.clone()],
            nt,
            1.5,
        );
        let table_rev = synthetic_table(vec![ps("Y1"), ps("Z1")], vec![xy, xz], nt, 1.5);

        let eqs_fwd = CompiledEquations::compile(&g_fwd, &h, 1, nt, 1.5).unwrap();
        let eqs_rev = CompiledEquations::compile(&g_rev, &h, 1, nt, 1.5).unwrap();

        let schedule = quick_schedule(13);
        let keys_fwd: Vec<u64> = (0..2 * nt as u64).collect();
        // Quantity 0 <-> 1 swap, same time points: every coordinate of the
        // relabeled run keeps the stream key of its preimage and the sweep
        // visits the same physical sequence.
        let keys_rev: Vec<u64> = (0..2 * nt as u64)
            .map(|c| (c + nt as u64) % (2 * nt as u64))
            .collect();
        let visit_rev: Vec<u32> = (0..2 * nt as u32)
            .map(|c| (c + nt as u32) % (2 * nt as u32))
            .collect();
        let a = run_chain_keyed(
            &table_fwd,
            &eqs_fwd,
            0.6,
            &schedule,
            None,
            Some(&keys_fwd),
            None,
        )
        .unwrap();
        let b = run_chain_keyed(
            &table_rev,
            &eqs_rev,
            0.6,
            &schedule,
            None,
            Some(&keys_rev),
            Some(&visit_rev),
        )
        .unwrap();
        for s in 0..=nt {
            assert_abs_diff_eq!(a.chi[0][s], b.chi[1][s]);
            assert_abs_diff_eq!(a.chi[1][s], b.chi[0][s]);
        }
    }

    /// Least-squares minimizer of the (quadratic) total action, solved by
    /// normal equations: an oracle for where the annealed chain must settle.
    fn action_minimizer(
        eqs: &CompiledEquations,
        table: &MeasurementTable,
        z: f64,
        boundary: &[f64],
    ) -> Vec<f64> {
        use nalgebra::{DMatrix, DVector};
        let (nq, nt) = (eqs.quantities(), eqs.time_points());
        let ncoord = nq * nt;
        let nres = eqs.sources() * (nt + 1);
        let cfg0 = Configuration::new(nq, nt, boundary.to_vec()).unwrap();
        let mut base = Vec::with_capacity(nres);
        for i in 0..eqs.sources() {
            for s in 0..=nt {
                base.push(eqs.residual(i, s, &cfg0));
            }
        }
        // Rows: residuals weighted by sqrt(z pref dt); then the quantum
        // penalties weighted by sqrt((1-z) dt/2)/y.
        let wb = (z * eqs.prefactor() * eqs.dt()).sqrt();
        let wq = ((1.0 - z) * eqs.dt() / 2.0).sqrt();
        let mut a = DMatrix::<f64>::zeros(nres + ncoord, ncoord);
        let mut b = DVector::<f64>::zeros(nres + ncoord);
        for c in 0..ncoord {
            let (q, s) = (c / nt, c % nt + 1);
            let mut cfg1 = cfg0.clone();
            cfg1.set(q, s, 1.0);
            let mut k = 0;
            for i in 0..eqs.sources() {
                for sp in 0..=nt {
                    a[(k, c)] = wb * (eqs.residual(i, sp, &cfg1) - base[k]);
                    k += 1;
                }
            }
        }
        for (k, &e) in base.iter().enumerate() {
            b[k] = -wb * e;
        }
        for c in 0..ncoord {
            let (q, s) = (c / nt, c % nt + 1);
            let w = wq / table.y[q][s];
            a[(nres + c, c)] = w;
            b[nres + c] = w * table.xbar[q][s];
        }
        let ata = a.transpose() * &a;
        let atb = a.transpose() * b;
        let x = ata.lu().solve(&atb).expect("nondegenerate action");
        x.iter().cloned().collect()
    }

    #[test]
    fn annealed_chain_finds_the_action_minimum() {
        // z = 1 with exact boundaries: the chain must settle at the
        // least-squares solution of the discretized equations (computed
        // independently by normal equations), within a few sample sigma.
        let omega = 1.0;
        let (h, g) = single_qubit_setup(omega);
        let nt = 10;
        let total = 3.0;
        let strings: Vec<PauliString> = g.nodes().to_vec();
        // Boundary Z(0) = 1, Y(0) = 0; measurement columns deliberately
        // arbitrary (they must be ignored at z = 1).
        let zq = g.index_of(&ps("Z1")).unwrap();
        let yq = g.index_of(&ps("Y1")).unwrap();
        let mut xbar = vec![vec![0.123; nt + 1]; 2];
        xbar[zq][0] = 1.0;
        xbar[yq][0] = 0.0;
        let table = synthetic_table(strings, xbar, nt, total);
        let eqs = CompiledEquations::compile(&g, &h, 1, nt, total).unwrap();
        let schedule = AnnealSchedule {
            sweeps: 8000,
            thermalization: 2000,
            samples: 30,
            dlambda: 1.0,
            proposal_scale: 0.05,
            seed: 3,
            randomize_order: false,
        };
        let result = run_chain(&table, &eqs, 1.0, &schedule, None).unwrap();
        let minimum = action_minimizer(&eqs, &table, 1.0, &table.boundary());
        for q in 0..2 {
            for s in 1..=nt {
                let target = minimum[q * nt + s - 1];
                let tol = 3.0 * result.sigma[q][s] + 5e-3;
                assert!(
                    (result.chi[q][s] - target).abs() < tol,
                    "q={q} s={s}: chi={} lsq={target}",
                    result.chi[q][s]
                );
            }
        }
    }

    #[test]
    fn mitigate_checks_table_alignment() {
        let (h, g) = single_qubit_setup(1.0);
        let nt = 4;
        // Table rows swapped relative to the graph order.
        let table = synthetic_table(
            vec![ps("Y1"), ps("Z1")],
            vec![vec![0.0; nt + 1], vec![1.0; nt + 1]],
            nt,
            1.2,
        );
        assert!(mitigate(&table, &g, &h, 1, &quick_schedule(1), ZMode::Next).is_err());
    }

    #[test]
    fn mitigate_full_pipeline_noiseless() {
        // Gentle dynamics, noiseless measurements: they already satisfy the
        // constraints up to shot noise and the stencil discretization, so chi
        // stays within a few sigma of xbar.
        let omega = 0.3;
        let (h, g) = single_qubit_setup(omega);
        let nt = 10;
        let init = StateVector::basis(1, 0);
        let noise = NoiseSpec {
            p_dep: 0.0,
            eta: 1.0,
            seed: 21,
        };
        let strings: Vec<PauliString> = g.nodes().to_vec();
        let table = measure_table(&h, &strings, nt, 3.0, 100_000, &noise, &init).unwrap();
        let result = mitigate(&table, &g, &h, 0, &quick_schedule(4), ZMode::Next).unwrap();
        let ideal = trotter_evolve(&init, &h, nt, 3.0).unwrap();
        for (q, string) in strings.iter().enumerate() {
            for s in 1..=nt {
                let truth = ideal[s].expectation(string);
                let tol = 3.0 * result.sigma[q][s] + 0.05;
                assert!(
                    (result.chi[q][s] - truth).abs() < tol,
                    "{string} s={s}: chi={} truth={truth}",
                    result.chi[q][s]
                );
            }
        }
    }

}
