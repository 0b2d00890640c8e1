//! The periodic Schwinger spin chain under a sudden chiral quench, and its
//! electric-current observable.
//!
//! ```bash
//! cargo run --example schwinger_model
//! ```

use bbgky_qem::hamiltonian::{build_current, build_schwinger, term_count_bound, TimeCoupling};

fn main() -> bbgky_qem::Result<()> {
    let (nqubits, omega, mass, mu5) = (8, 1.0, 0.5, 0.2);
    let h = build_schwinger(nqubits, omega, mass, mu5)?;

    println!("Schwinger chain: {nqubits} qubits, omega={omega}, m={mass}, mu5={mu5}");
    println!(
        "{} active terms (bound for maxlen {}: {})",
        h.len(),
        h.maxlen(),
        term_count_bound(h.maxlen(), nqubits)
    );

    let census = |len: usize| h.terms().iter().filter(|(s, _)| s.len() == len).count();
    println!(
        "term lengths: {} single-site (staggered mass), {} two-site (hopping + quench current), {} chain-length (boundary)",
        census(1),
        census(2),
        census(nqubits)
    );

    // The quench switches the current-generating terms on at t = 0+.
    for (index, (string, coupling)) in h.terms().iter().enumerate() {
        if matches!(coupling, TimeCoupling::SchwingerThetaDot { .. }) {
            println!(
                "first quench term {string}: h(0) = {}, h(0+) = {}, h(1.5) = {}",
                h.coupling_at(index, 0.0)?,
                h.coupling_at_plus(index, 0.0)?,
                h.coupling_at(index, 1.5)?
            );
            break;
        }
    }

    // Dropping mu5 freezes the chiral angle and deactivates those terms.
    let h0 = build_schwinger(nqubits, omega, mass, 0.0)?;
    println!(
        "mu5 = 0: {} terms, time-independent: {}",
        h0.len(),
        h0.is_time_independent()
    );

    let current = build_current(nqubits, omega)?;
    println!(
        "\nelectric current observable ({} strings):",
        current.terms().len()
    );
    for (coeff, string) in current.terms().iter().take(3) {
        println!("  {coeff:+.4} * {string}");
    }
    println!("  ... and {} more", current.terms().len() - 3);
    Ok(())
}
