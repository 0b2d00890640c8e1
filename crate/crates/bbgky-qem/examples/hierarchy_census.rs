//! Building the immediate-connection hierarchy around the current
//! observable: layer census, subhierarchy radius, z-ratios, the full
//! partition and graph export.
//!
//! ```bash
//! cargo run --release --example hierarchy_census
//! ```

use bbgky_qem::hamiltonian::{build_current, build_schwinger};
use bbgky_qem::hierarchy::{bbgky_equation, partition_full, HierarchyGraph, ZMode};

fn main() -> bbgky_qem::Result<()> {
    let h = build_schwinger(8, 1.0, 0.5, 0.2)?;
    let observable = build_current(8, 1.0)?;
    let q0 = observable.strings();

    // One equation of motion, spelled out.
    let eq = bbgky_equation(&q0[0], &h);
    println!(
        "d<{}>/dt couples to {} correlators, e.g.:",
        eq.source,
        eq.rhs.len()
    );
    for term in eq.rhs.iter().take(4) {
        println!(
            "  {:+} * h[{}](t) * <{}>",
            term.static_coeff, term.ham_index, term.target
        );
    }

    let (radius, graph) = HierarchyGraph::subhierarchy_radius(&q0, &h)?;
    println!("\nsubhierarchy radius R = {radius}");
    for r in 0..=radius {
        println!(
            "  |Q_{r}| = {:3}   z_next = {:.4}   z_full = {:.4}",
            graph.layer_size(r)?,
            graph.z_ratio(r, ZMode::Next)?,
            graph.z_ratio(r, ZMode::Full)?
        );
    }
    println!("  edges: {}", graph.edges().len());

    // Node lengths reachable from the chain-length current strings.
    for (i, node) in graph.nodes().iter().enumerate().take(16) {
        if node.len() == 8 {
            let mut lengths: Vec<usize> =
                graph.neighbors(i).map(|j| graph.nodes()[j].len()).collect();
            lengths.sort_unstable();
            lengths.dedup();
            println!("  {node} touches correlator lengths {lengths:?}");
        }
    }

    // Full partition of all 4^8 - 1 non-identity strings.
    let report = partition_full(&h, Some(&q0))?;
    println!(
        "\nfull hierarchy: {} components over {} strings ({} counting the identity alone)",
        report.count(),
        report.total_strings(),
        report.count_with_identity()
    );
    println!(
        "current subhierarchy size: {:?}; largest components: {:?}",
        report.probe_component,
        &report.component_sizes[..6.min(report.component_sizes.len())]
    );

    let dot = graph.to_dot();
    println!(
        "\nDOT export starts with:\n{}",
        dot.lines().take(3).collect::<Vec<_>>().join("\n")
    );
    Ok(())
}
