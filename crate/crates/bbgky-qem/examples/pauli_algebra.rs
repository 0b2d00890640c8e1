//! Sparse Pauli-string algebra: parsing, products, brackets and the length
//! bounds that shape the hierarchy.
//!
//! ```bash
//! cargo run --example pauli_algebra
//! ```

use bbgky_qem::pauli::{
    bracket, difference_count, f_factor, length_bounds, multiply, BracketKind, PauliString,
};

fn show(label: &str, result: &bbgky_qem::pauli::ScaledPauli) {
    match &result.string {
        _ if result.is_zero() => println!("{label} = 0"),
        Some(s) => println!("{label} = ({}) {s}", result.coeff),
        None => println!("{label} = ({}) I", result.coeff),
    }
}

fn main() -> bbgky_qem::Result<()> {
    let x1 = PauliString::parse("X1")?;
    let y1 = PauliString::parse("Y1")?;
    let long = PauliString::parse("X1 Y2 Z5")?;

    println!("parsed `X1 Y2 Z5` back to `{long}` (length {})", long.len());

    show("X1 * Y1", &multiply(&x1, &y1));
    show("[X1, Y1]", &bracket(&x1, &y1, BracketKind::Commutator));
    show("{X1, Y1}", &bracket(&x1, &y1, BracketKind::Anticommutator));

    // Disjoint supports commute; equal strings square to identity.
    let z2 = PauliString::parse("Z2")?;
    show("[X1, Z2]", &bracket(&x1, &z2, BracketKind::Commutator));
    show("X1 * X1", &multiply(&x1, &x1));

    // The parity of the difference count decides which bracket survives.
    let a = PauliString::parse("X1 Y2 Z3")?;
    let b = PauliString::parse("Y1 Y2 X3")?;
    let d = difference_count(&a, &b);
    println!(
        "difference count d({a}; {b}) = {d}: f- = {}, f+ = {}",
        f_factor(d, BracketKind::Commutator),
        f_factor(d, BracketKind::Anticommutator),
    );
    show(
        "[X1 Y2 Z3, Y1 Y2 X3]",
        &bracket(&a, &b, BracketKind::Commutator),
    );
    show(
        "{X1 Y2 Z3, Y1 Y2 X3}",
        &bracket(&a, &b, BracketKind::Anticommutator),
    );

    // Bracket lengths always fall inside the closed-form bounds.
    let (lo, hi) = length_bounds(2, 8, BracketKind::Commutator);
    println!("a 2-string against an 8-string commutes into lengths {lo}..={hi}");
    Ok(())
}
