//! Ideal Trotterized dynamics of the chiral quench: ground-state
//! preparation, current trajectories and the first-order convergence of the
//! Trotter error.
//!
//! ```bash
//! cargo run --release --example trotter_dynamics
//! ```

use bbgky_qem::hamiltonian::{build_current, build_schwinger, Observable};
use bbgky_qem::metrics::{assemble_observable, fit_quadratic_unweighted, l_norm, Trajectory};
use bbgky_qem::simulator::{ground_state, trotter_evolve, StateVector};

fn current_trajectory(
    obs: &Observable,
    states: &[StateVector],
    stride: usize,
    times: &[f64],
    label: &str,
) -> bbgky_qem::Result<Trajectory> {
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
    assemble_observable(obs, &strings, &values, &errors, times, label)
}

fn main() -> bbgky_qem::Result<()> {
    let (mass, mu5) = (0.5, 0.2);
    let h = build_schwinger(8, 1.0, mass, mu5)?;
    let obs = build_current(8, 1.0)?;
    let initial = ground_state(&h)?;
    println!(
        "ground state prepared; <J(0)> = {:+.2e}",
        obs.terms()
            .iter()
            .map(|(c, p)| c * initial.expectation(p))
            .sum::<f64>()
    );

    let (nt, total) = (10usize, 3.0);
    let times: Vec<f64> = (0..=nt).map(|s| s as f64 * total / nt as f64).collect();
    let coarse = trotter_evolve(&initial, &h, nt, total)?;
    let fine = trotter_evolve(&initial, &h, nt * 10, total)?;
    let j_coarse = current_trajectory(&obs, &coarse, 1, &times, "ed")?;
    let j_fine = current_trajectory(&obs, &fine, 10, &times, "ED")?;

    println!("\n  t      J ({} slices)   J ({} slices)", nt, nt * 10);
    for s in 0..=nt {
        println!(
            "{:5.2}   {:+12.5}   {:+12.5}",
            times[s], j_coarse.values[s], j_fine.values[s]
        );
    }
    let (l_trotter, _) = l_norm(&j_coarse, &j_fine)?;
    println!("accumulated Trotter distance L = {l_trotter:.5}");

    // Short-time quadratic response of the induced current.
    let fit = fit_quadratic_unweighted(&j_fine, 1.2)?;
    println!(
        "short-time fit J(t) ~ {:+.4} t {:+.4} t^2 (quadratic term drives the quench current)",
        fit.p[0], fit.p[1]
    );

    // First-order convergence: doubling the slice count halves the distance.
    println!("\nslices   L(n, 2n)");
    let mut previous: Option<f64> = None;
    for n in [10usize, 20, 40] {
        let a = current_trajectory(
            &obs,
            &trotter_evolve(&initial, &h, n, total)?,
            n / 10,
            &times,
            "a",
        )?;
        let b = current_trajectory(
            &obs,
            &trotter_evolve(&initial, &h, 2 * n, total)?,
            n / 5,
            &times,
            "b",
        )?;
        let (l, _) = l_norm(&a, &b)?;
        match previous {
            Some(prev) => println!("{n:6}   {l:.5}   (ratio {:.2})", prev / l),
            None => println!("{n:6}   {l:.5}"),
        }
        previous = Some(l);
    }
    Ok(())
}
