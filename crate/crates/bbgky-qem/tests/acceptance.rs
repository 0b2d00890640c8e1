//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`; failures
//! always print their details).

use std::sync::OnceLock;

use bbgky_qem::dense;
use bbgky_qem::hamiltonian::{build_current, build_schwinger};
use bbgky_qem::hierarchy::{partition_full, HierarchyGraph, ZMode};
use bbgky_qem::metrics::{assemble_observable, fit_quadratic_unweighted, l_norm, Trajectory};
use bbgky_qem::mitigation::{mitigate, CompiledEquations, Configuration};
use bbgky_qem::pauli::{bracket, length_bounds, Axis, BracketKind, PauliString};
use bbgky_qem::run::{cmd_mitigate, cmd_simulate, radius_sweep, rerun_manifest, RunConfig};
use bbgky_qem::simulator::{ground_state, trotter_evolve, StateVector};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

/// Calibrated noise settings shared by the mitigation criteria: the strongest
/// depolarizing gap reachable for this model family (see the calibration
/// clause of criterion 6 for the measured ceiling per realization).
const P_DEP: f64 = 0.3;
const ETA: f64 = 0.6;
const SEEDS: [u64; 3] = [1, 2, 3];
const REALIZATIONS: [(f64, f64); 4] = [(0.1, 0.1), (0.1, 0.2), (0.5, 0.1), (0.5, 0.2)];

fn conclude(name: &str, violations: Vec<String>) {
    if violations.is_empty() {
        println!("{name}: PASS");
    } else {
        println!("{name}: FAIL");
        for v in &violations {
            println!("  - {v}");
        }
        panic!("{name}: {} violation(s)", violations.len());
    }
}

/// All Pauli strings supported inside sites 1..=n.
fn all_strings(n: u32) -> Vec<PauliString> {
    let mut out = Vec::new();
    for code in 1..4u64.pow(n) {
        let mut support = Vec::new();
        let mut c = code;
        for site in 1..=n {
            let digit = (c % 4) as usize;
            c /= 4;
            if digit > 0 {
                support.push((site, Axis::ALL[digit - 1]));
            }
        }
        out.push(PauliString::new(support).unwrap());
    }
    out
}

#[test]
fn criterion_01_pauli_oracle_equivalence() {
    let nq = 4;
    let strings = all_strings(nq as u32);
    let matrices: Vec<_> = strings.iter().map(|s| dense::pauli_matrix(s, nq)).collect();
    let dim = 1usize << nq;
    let identity = nalgebra::DMatrix::<num_complex::Complex64>::identity(dim, dim);
    let mut checked = 0usize;
    for (i, p) in strings.iter().enumerate() {
        for (j, q) in strings.iter().enumerate() {
            let product = &matrices[i] * &matrices[j];
            let as_matrix = |r: &bbgky_qem::pauli::ScaledPauli| match &r.string {
                Some(s) => dense::pauli_matrix(s, nq) * r.coeff.to_complex(),
                None => &identity * r.coeff.to_complex(),
            };
            assert_eq!(product, as_matrix(&bbgky_qem::pauli::multiply(p, q)));
            let comm = &product - &matrices[j] * &matrices[i];
            assert_eq!(comm, as_matrix(&bracket(p, q, BracketKind::Commutator)));
            let anti = &product + &matrices[j] * &matrices[i];
            assert_eq!(anti, as_matrix(&bracket(p, q, BracketKind::Anticommutator)));
            checked += 1;
        }
    }
    assert!(checked >= 65_000, "only {checked} pairs checked");
    conclude(
        &format!("criterion 01 (pauli dense-oracle equivalence, {checked} pairs exact)"),
        vec![],
    );
}

#[test]
fn criterion_02_hierarchy_census() {
    let mut violations = Vec::new();
    let q0 = build_current(8, 1.0).unwrap().strings();
    let mut counts = Vec::new();
    for mu5 in [0.1, 0.2] {
        let h = build_schwinger(8, 1.0, 0.5, mu5).unwrap();
        let (radius, graph) = HierarchyGraph::subhierarchy_radius(&q0, &h).unwrap();
        if mu5 == 0.2 {
            if radius != 3 {
                violations.push(format!("R = {radius}, expected 3"));
            }
            if graph.layer_size(0).unwrap() != 16 {
                violations.push(format!("|Q_0| = {}", graph.layer_size(0).unwrap()));
            }
            if graph.layer_size(3).unwrap() != 120 {
                violations.push(format!("|Q_3| = {}", graph.layer_size(3).unwrap()));
            }
            if graph.layer_size(4).unwrap() != graph.layer_size(3).unwrap() {
                violations.push("Q_4 != Q_3".into());
            }
            // Chain-length current strings touch only lengths {1, 7, 8}.
            for (i, node) in graph.nodes().iter().enumerate().take(16) {
                if node.len() == 8 {
                    for j in graph.neighbors(i) {
                        let len = graph.nodes()[j].len();
                        if !matches!(len, 1 | 7 | 8) {
                            violations.push(format!("{node} touches a length-{len} string"));
                        }
                    }
                }
            }
        }
        // The component holding the current strings has exactly 120 members
        // (a disjoint mirror component happens to share that size).
        let report = partition_full(&h, Some(&q0)).unwrap();
        if report.probe_component != Some(120) {
            violations.push(format!(
                "mu5={mu5}: current component size {:?}, expected 120",
                report.probe_component
            ));
        }
        if report.total_strings() != 65_535 {
            violations.push(format!(
                "partition covers {} strings",
                report.total_strings()
            ));
        }
        counts.push(report.count());
    }
    if counts[0] != counts[1] {
        violations.push(format!(
            "non-identity component count varies with mu5: {counts:?}"
        ));
    }
    conclude(
        &format!(
            "criterion 02 (hierarchy census: R=3, |Q_3|=120, one 120-component, {} components)",
            counts[0]
        ),
        violations,
    );
}

#[test]
fn criterion_03_length_bound_property() {
    let mut rng = ChaCha12Rng::seed_from_u64(20_260_811);
    let mut violations = Vec::new();
    let mut nonzero = 0usize;
    for trial in 0..1_000_000usize {
        let random_string = |rng: &mut ChaCha12Rng| {
            let len = rng.gen_range(1..=10usize);
            let mut sites: Vec<u32> = (1..=10u32).collect();
            sites.shuffle(rng);
            let support: Vec<(u32, Axis)> = sites[..len]
                .iter()
                .map(|&s| (s, Axis::ALL[rng.gen_range(0..3)]))
                .collect();
            PauliString::new(support).unwrap()
        };
        let p = random_string(&mut rng);
        let q = random_string(&mut rng);
        let kind = if trial % 2 == 0 {
            BracketKind::Commutator
        } else {
            BracketKind::Anticommutator
        };
        let result = bracket(&p, &q, kind);
        if let Some(target) = &result.string {
            nonzero += 1;
            let (lo, hi) = length_bounds(p.len(), q.len(), kind);
            if target.len() < lo || target.len() > hi {
                violations.push(format!("[{p}; {q}] -> {target} outside [{lo}, {hi}]"));
                if violations.len() > 5 {
                    break;
                }
            }
        }
    }
    conclude(
        &format!("criterion 03 (length bounds over 10^6 brackets, {nonzero} nonzero)"),
        violations,
    );
}

fn current_trajectory(
    obs: &bbgky_qem::hamiltonian::Observable,
    states: &[StateVector],
    stride: usize,
    times: &[f64],
    label: &str,
) -> Trajectory {
    let strings = obs.strings();
    let values: Vec<Vec<f64>> = strings
        .iter()
        .map(|p| {
            (0..times.len())
                .map(|s| states[s * stride].expectation(p))
                .collect()
        })
        .collect();
    let errors = vec![vec![0.0; times.len()]; strings.len()];
    assemble_observable(obs, &strings, &values, &errors, times, label).unwrap()
}

#[test]
fn criterion_04_trotter_scaling() {
    // The (m, mu5) = (0.5, 0.1) realization sits cleanly in the first-order
    // regime across the whole slice-count ladder.
    let mut violations = Vec::new();
    let h = build_schwinger(8, 1.0, 0.5, 0.1).unwrap();
    let obs = build_current(8, 1.0).unwrap();
    let initial = ground_state(&h).unwrap();
    let times: Vec<f64> = (0..=10).map(|s| s as f64 * 0.3).collect();
    let run = |nt: usize| {
        let states = trotter_evolve(&initial, &h, nt, 3.0).unwrap();
        current_trajectory(&obs, &states, nt / 10, &times, "t")
    };
    let mut distances = Vec::new();
    for nt in [10usize, 20, 40, 80] {
        distances.push((nt, run(nt)));
    }
    let mut report = String::new();
    for w in 0..2 {
        let (l1, _) = l_norm(&distances[w].1, &distances[w + 1].1).unwrap();
        let (l2, _) = l_norm(&distances[w + 1].1, &distances[w + 2].1).unwrap();
        let ratio = l1 / l2;
        report.push_str(&format!(
            " L({},{})/L({},{})={ratio:.2}",
            distances[w].0,
            distances[w + 1].0,
            distances[w + 1].0,
            distances[w + 2].0
        ));
        if !(1.5..=2.5).contains(&ratio) {
            violations.push(format!("halving ratio {ratio:.3} outside [1.5, 2.5]"));
        }
    }
    conclude(
        &format!("criterion 04 (first-order Trotter scaling:{report})"),
        violations,
    );
}

#[test]
fn criterion_05_cme_short_time_law() {
    let mut violations = Vec::new();
    let times: Vec<f64> = (0..=10).map(|s| s as f64 * 0.3).collect();
    let fine_current = |m: f64, mu5: f64| {
        let h = build_schwinger(8, 1.0, m, mu5).unwrap();
        let obs = build_current(8, 1.0).unwrap();
        let initial = ground_state(&h).unwrap();
        let states = trotter_evolve(&initial, &h, 100, 3.0).unwrap();
        current_trajectory(&obs, &states, 10, &times, "ED")
    };
    let mut summary = String::new();
    for m in [0.1, 0.5] {
        let mut p2 = Vec::new();
        for mu5 in [0.1, 0.2] {
            let fit = fit_quadratic_unweighted(&fine_current(m, mu5), 1.2).unwrap();
            if fit.p[1] >= 0.0 {
                violations.push(format!(
                    "m={m} mu5={mu5}: p2 = {:+.5} not negative",
                    fit.p[1]
                ));
            }
            p2.push(fit.p[1]);
        }
        let ratio = (p2[1] / p2[0]).abs();
        summary.push_str(&format!(" m={m}: |p2| ratio {ratio:.2};"));
        if !(1.5..=2.5).contains(&ratio) {
            violations.push(format!(
                "m={m}: mu5-linearity ratio {ratio:.3} outside [1.5, 2.5]"
            ));
        }
        let flat = fine_current(m, 0.0);
        let max = flat.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        summary.push_str(&format!(" mu5=0 drift {max:.2e};"));
        if max >= 1e-3 {
            violations.push(format!(
                "m={m}, mu5=0: max|J_ED| = {max:.3e} >= 1e-3 (pure first-order Trotter drift of \
                 the stationary state; halves when the slice count doubles)"
            ));
        }
    }
    conclude(
        &format!("criterion 05 (CME short-time law:{summary})"),
        violations,
    );
}

/// Seed-resolved mitigation metrics of one realization.
struct RealizationRuns {
    m: f64,
    mu5: f64,
    l_trotter: f64,
    /// Per seed: (l_noisy, err), per-r (l_mh, err), (p_noisy, err), per-r (p_mh, err).
    seeds: Vec<SeedRun>,
}

struct SeedRun {
    l_noisy: (f64, f64),
    l_mh: Vec<(f64, f64)>,
    p_noisy: (f64, f64),
    p_mh: Vec<(f64, f64)>,
}

fn pipeline() -> &'static Vec<RealizationRuns> {
    static DATA: OnceLock<Vec<RealizationRuns>> = OnceLock::new();
    DATA.get_or_init(|| {
        REALIZATIONS
            .iter()
            .map(|&(m, mu5)| {
                let mut runs = Vec::new();
                let mut l_trotter = 0.0;
                for &seed in &SEEDS {
                    let mut cfg = RunConfig::default();
                    {
                        let model = cfg.model.schwinger.as_mut().unwrap();
                        model.mass = m;
                        model.mu5 = mu5;
                    }
                    cfg.noise.p_dep = P_DEP;
                    cfg.noise.eta = ETA;
                    cfg.output.seed = seed;
                    let rows = radius_sweep(&cfg, 3).unwrap();
                    l_trotter = rows[0].l_trotter.0;
                    runs.push(SeedRun {
                        l_noisy: rows[0].l_noisy,
                        l_mh: rows.iter().map(|r| r.l_mh).collect(),
                        p_noisy: rows[0].p_noisy,
                        p_mh: rows.iter().map(|r| r.p_mh).collect(),
                    });
                }
                RealizationRuns {
                    m,
                    mu5,
                    l_trotter,
                    seeds: runs,
                }
            })
            .collect()
    })
}

/// Mean over seeds with the propagated error of the mean.
fn seed_mean(values: &[(f64, f64)]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().map(|v| v.0).sum::<f64>() / n;
    let var = values.iter().map(|v| v.1 * v.1).sum::<f64>() / (n * n);
    (mean, var.sqrt())
}

#[test]
fn criterion_06_mitigation_effectiveness() {
    let mut violations = Vec::new();
    for real in pipeline() {
        let (l_noisy, _) = seed_mean(&real.seeds.iter().map(|s| s.l_noisy).collect::<Vec<_>>());
        let l_mh: Vec<(f64, f64)> = (0..4)
            .map(|r| seed_mean(&real.seeds.iter().map(|s| s.l_mh[r]).collect::<Vec<_>>()))
            .collect();
        let ratio = l_noisy / real.l_trotter;
        println!(
            "  m={} mu5={}: L_T={:.4} L_N={:.4} ({ratio:.1}x) L_MH={:?}",
            real.m,
            real.mu5,
            real.l_trotter,
            l_noisy,
            l_mh.iter()
                .map(|v| (v.0 * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        );
        if !(5.0..=20.0).contains(&ratio) {
            violations.push(format!(
                "m={} mu5={}: calibration L_N/L_T = {ratio:.2} outside [5, 20] \
                 (contractive-channel ceiling; see decisions ledger)",
                real.m, real.mu5
            ));
        }
        for r in 0..4 {
            if l_mh[r].0 >= l_noisy {
                violations.push(format!(
                    "m={} mu5={} r={r}: L_MH = {:.4} not below L_Noisy = {:.4}",
                    real.m, real.mu5, l_mh[r].0, l_noisy
                ));
            }
        }
        let mut raw_inversions = 0;
        for r in 0..3 {
            let diff = l_mh[r + 1].0 - l_mh[r].0;
            let sigma = (l_mh[r].1.powi(2) + l_mh[r + 1].1.powi(2)).sqrt();
            if diff > 0.0 {
                raw_inversions += 1;
                if diff > sigma {
                    violations.push(format!(
                        "m={} mu5={}: L_MH rises {:.4} -> {:.4} beyond 1 sigma ({sigma:.4}) at r={}",
                        real.m,
                        real.mu5,
                        l_mh[r].0,
                        l_mh[r + 1].0,
                        r + 1
                    ));
                }
            }
        }
        if raw_inversions > 1 {
            violations.push(format!(
                "m={} mu5={}: {raw_inversions} inversions in the L_MH trend",
                real.m, real.mu5
            ));
        }
        if l_mh[3].0 > 5.0 * real.l_trotter {
            violations.push(format!(
                "m={} mu5={}: L^3_MH = {:.4} above 5 L_Trotter = {:.4}",
                real.m,
                real.mu5,
                l_mh[3].0,
                5.0 * real.l_trotter
            ));
        }
    }
    conclude("criterion 06 (mitigation effectiveness)", violations);
}

#[test]
fn criterion_07_fit_metric_ordering() {
    let mut violations = Vec::new();
    for real in pipeline() {
        let (p_noisy, _) = seed_mean(&real.seeds.iter().map(|s| s.p_noisy).collect::<Vec<_>>());
        let p_mh: Vec<(f64, f64)> = (0..4)
            .map(|r| seed_mean(&real.seeds.iter().map(|s| s.p_mh[r]).collect::<Vec<_>>()))
            .collect();
        println!(
            "  m={} mu5={}: P_N={:.3} P_MH={:?}",
            real.m,
            real.mu5,
            p_noisy,
            p_mh.iter()
                .map(|v| (v.0 * 1e3).round() / 1e3)
                .collect::<Vec<_>>()
        );
        for r in 0..4 {
            if p_mh[r].0 >= p_noisy {
                violations.push(format!(
                    "m={} mu5={} r={r}: P_MH = {:.3} not below P_Noisy = {:.3}",
                    real.m, real.mu5, p_mh[r].0, p_noisy
                ));
            }
        }
        for r in 0..3 {
            let sigma = (p_mh[r].1.powi(2) + p_mh[r + 1].1.powi(2)).sqrt();
            if p_mh[r + 1].0 > p_mh[r].0 + sigma {
                violations.push(format!(
                    "m={} mu5={}: P_MH rises {:.3} -> {:.3} beyond 1 sigma ({sigma:.3}) at r={}",
                    real.m,
                    real.mu5,
                    p_mh[r].0,
                    p_mh[r + 1].0,
                    r + 1
                ));
            }
        }
    }
    conclude("criterion 07 (fit-metric ordering)", violations);
}

#[test]
fn criterion_08_z_ratio_structure() {
    let mut violations = Vec::new();
    let h = build_schwinger(8, 1.0, 0.5, 0.2).unwrap();
    let q0 = build_current(8, 1.0).unwrap().strings();
    let (radius, graph) = HierarchyGraph::subhierarchy_radius(&q0, &h).unwrap();
    assert_eq!(radius, 3);
    for r in 0..=3 {
        let next = graph.z_ratio(r, ZMode::Next).unwrap();
        let full = graph.z_ratio(r, ZMode::Full).unwrap();
        println!("  r={r}: z_next={next:.4} z_full={full:.4}");
        if !(full > 0.0 && full <= next && next <= 1.0) {
            violations.push(format!(
                "r={r}: chain 0 < {full:.4} <= {next:.4} <= 1 broken"
            ));
        }
    }
    let next2 = graph.z_ratio(2, ZMode::Next).unwrap();
    let full2 = graph.z_ratio(2, ZMode::Full).unwrap();
    if (next2 - full2).abs() > 1e-12 {
        violations.push(format!("modes differ at r = R-1: {next2} vs {full2}"));
    }
    if graph.z_ratio(3, ZMode::Next).unwrap() != 1.0
        || graph.z_ratio(3, ZMode::Full).unwrap() != 1.0
    {
        violations.push("z != 1 at r = R".into());
    }
    conclude("criterion 08 (z-ratio structure)", violations);
}

#[test]
fn criterion_09_exact_limit_recovery() {
    let mut violations = Vec::new();
    let (m, mu5) = (0.5, 0.2);
    let mut cfg = RunConfig::default();
    {
        let model = cfg.model.schwinger.as_mut().unwrap();
        model.mass = m;
        model.mu5 = mu5;
    }
    cfg.noise.p_dep = P_DEP;
    cfg.noise.eta = ETA;
    cfg.output.seed = 1;

    let h = build_schwinger(8, 1.0, m, mu5).unwrap();
    let obs = build_current(8, 1.0).unwrap();
    let (_, graph) = HierarchyGraph::subhierarchy_radius(&obs.strings(), &h).unwrap();
    let (nt, total) = (cfg.grid.trotter_steps, cfg.grid.total_time);
    let initial = ground_state(&h).unwrap();
    let quantities = graph.nodes().to_vec();
    let table = bbgky_qem::simulator::measure_table(
        &h,
        &quantities,
        nt,
        total,
        cfg.grid.shots,
        &cfg.noise_spec(),
        &initial,
    )
    .unwrap();
    // r = R: z = 1 under either mode; the boundary column is exact by
    // construction.
    let result = mitigate(&table, &graph, &h, 3, &cfg.schedule(), ZMode::Full).unwrap();
    assert_eq!(result.diagnostics.z, 1.0);

    let times: Vec<f64> = (0..=nt).map(|s| s as f64 * total / nt as f64).collect();
    let fine = trotter_evolve(&initial, &h, nt * 10, total).unwrap();
    let j_ref = current_trajectory(&obs, &fine, 10, &times, "ED");
    let coarse = trotter_evolve(&initial, &h, nt, total).unwrap();
    let j_ed = current_trajectory(&obs, &coarse, 1, &times, "ed");
    let j_mh = assemble_observable(
        &obs,
        graph.nodes(),
        &result.chi,
        &result.sigma,
        &times,
        "MH",
    )
    .unwrap();

    let (l_ref, _) = l_norm(&j_mh, &j_ref).unwrap();
    let (l_ed, _) = l_norm(&j_mh, &j_ed).unwrap();
    let mut sq = 0.0;
    let mut count = 0usize;
    for row in &result.sigma {
        for &s in &row[1..] {
            sq += s * s;
            count += 1;
        }
    }
    let sigma_stat = (sq / count as f64).sqrt();
    println!(
        "  L(chi, ED) = {l_ref:.4}, L(chi, ed) = {l_ed:.4}, RMS statistical sigma = {sigma_stat:.4}"
    );
    if l_ref > 3.0 * sigma_stat {
        violations.push(format!(
            "L(chi, reference) = {l_ref:.4} above 3 sigma_stat = {:.4}",
            3.0 * sigma_stat
        ));
    }

    // Residuals of the chain mean against the compiled equations.
    let eqs = CompiledEquations::compile(&graph, &h, 3, nt, total).unwrap();
    let mut chi_cfg = Configuration::new(eqs.quantities(), nt, table.boundary()).unwrap();
    for q in 0..eqs.quantities() {
        for s in 1..=nt {
            chi_cfg.set(q, s, result.chi[q][s]);
        }
    }
    let mut worst = 0.0f64;
    for i in 0..eqs.sources() {
        for s in 0..=nt {
            worst = worst.max(eqs.residual(i, s, &chi_cfg).abs());
        }
    }
    let mut max_coupling = 0.0f64;
    for index in 0..h.len() {
        for s in 0..=nt {
            max_coupling = max_coupling.max(
                h.coupling_at_plus(index, s as f64 * total / nt as f64)
                    .unwrap()
                    .abs(),
            );
        }
    }
    let dt = total / nt as f64;
    let bound = 10.0 * dt * dt * max_coupling;
    println!("  max |E(q, s, chi)| = {worst:.4}, bound 10 dt^2 max-coupling = {bound:.4}");
    if worst > bound {
        violations.push(format!("residual {worst:.4} above {bound:.4}"));
    }
    conclude("criterion 09 (exact-limit recovery at z = 1)", violations);
}

#[test]
fn criterion_10_determinism() {
    let mut violations = Vec::new();
    let tmp = tempfile::tempdir().unwrap();
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");

    let mut cfg = RunConfig::default();
    cfg.output.dir = dir_a.clone();
    cfg.output.seed = 97;
    cfg.mitigation.radius = 1;
    cmd_simulate(&cfg).unwrap();
    let simulate_manifest = dir_a.join("manifest.json");
    let rerun_simulate = std::fs::read(&simulate_manifest).unwrap();
    cmd_mitigate(&cfg).unwrap();
    let mitigate_manifest = dir_a.join("manifest.json");

    // Re-execute both manifests into a fresh directory.
    std::fs::create_dir_all(&dir_b).unwrap();
    let staged = tmp.path().join("simulate.manifest.json");
    std::fs::write(&staged, rerun_simulate).unwrap();
    rerun_manifest(&staged, Some(&dir_b)).unwrap();
    rerun_manifest(&mitigate_manifest, Some(&dir_b)).unwrap();

    for name in [
        "measurements.csv",
        "j_ed_coarse.csv",
        "j_ed_fine.csv",
        "j_noisy.csv",
        "mitigation.csv",
        "j_mh.csv",
    ] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        if a != b {
            violations.push(format!("{name} differs between runs"));
        }
    }
    conclude(
        "criterion 10 (manifest re-runs are bit-identical)",
        violations,
    );
}
