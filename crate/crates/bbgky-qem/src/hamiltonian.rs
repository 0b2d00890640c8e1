//! Time-dependent Pauli-sum Hamiltonians and observables.
//!
//! Couplings are closed-form evaluators with a symbolic activity check, so the
//! term set contains exactly the interactions that are nonzero somewhere on
//! `[0, T]`. Includes the periodic lattice Schwinger-model builder under a
//! sudden chiral quench, its electric-current observable, and a line-oriented
//! file format for generic models.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pauli::{parse_pauli_tokens, Axis, PauliString};

/// Chiral angle of the sudden quench: 0 for `t <= 0`, `-2 mu5 t` after.
fn theta(mu5: f64, t: f64) -> f64 {
    if t > 0.0 {
        -2.0 * mu5 * t
    } else {
        0.0
    }
}

/// Time-dependent coupling attached to one Hamiltonian term.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeCoupling {
    Constant(f64),
    /// `c[0] + c[1] t + c[2] t^2 + ...`
    Poly(Vec<f64>),
    /// `amp * sin(freq t + phase)` or the cosine analog.
    Trig {
        cosine: bool,
        amp: f64,
        freq: f64,
        phase: f64,
    },
    /// Linear interpolation through `(t, value)` knots; constant outside.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    /// Schwinger hopping `prefactor * (omega - ksign (m/2) sin theta(t)) / 2`.
    SchwingerHopping {
        omega: f64,
        mass: f64,
        mu5: f64,
        ksign: f64,
        prefactor: f64,
    },
    /// Schwinger quench current term `prefactor * mu5 / 4` for `t > 0`
    /// (`-theta_dot/8` with `theta_dot = -2 mu5`), zero at `t <= 0`.
    SchwingerThetaDot {
        mu5: f64,
        prefactor: f64,
    },
    /// Schwinger staggered mass `-ksign (m/2) cos theta(t)`.
    SchwingerMass {
        mass: f64,
        mu5: f64,
        ksign: f64,
    },
}

impl TimeCoupling {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            TimeCoupling::Constant(c) => *c,
            TimeCoupling::Poly(coeffs) => {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
            TimeCoupling::Trig {
                cosine,
                amp,
                freq,
                phase,
            } => {
                let arg = freq * t + phase;
                amp * if *cosine { arg.cos() } else { arg.sin() }
            }
            TimeCoupling::Tabulated { times, values } => {
                if times.is_empty() {
                    return 0.0;
                }
                if t <= times[0] {
                    return values[0];
                }
                if t >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let hi = times.partition_point(|&u| u <= t);
                let (t0, t1) = (times[hi - 1], times[hi]);
                let (v0, v1) = (values[hi - 1], values[hi]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
            TimeCoupling::SchwingerHopping {
                omega,
                mass,
                mu5,
                ksign,
                prefactor,
            } => prefactor * 0.5 * (omega - ksign * 0.5 * mass * theta(*mu5, t).sin()),
            TimeCoupling::SchwingerThetaDot { mu5, prefactor } => {
                if t > 0.0 {
                    prefactor * mu5 / 4.0
                } else {
                    0.0
                }
            }
            TimeCoupling::SchwingerMass { mass, mu5, ksign } => {
                -ksign * 0.5 * mass * theta(*mu5, t).cos()
            }
        }
    }

    /// Right-continuous evaluation: at a coupling discontinuity (the sudden
    /// quench at `t = 0`) this returns the `t -> t+` limit. Equations of
    /// motion evaluated on the simulation window use this form, while state
    /// preparation at `t = 0` uses the plain pre-quench [`Self::value_at`].
    pub fn value_at_plus(&self, t: f64) -> f64 {
        match self {
            TimeCoupling::SchwingerThetaDot { mu5, prefactor } => {
                if t >= 0.0 {
                    prefactor * mu5 / 4.0
                } else {
                    0.0
                }
            }
            other => other.value_at(t),
        }
    }

    /// Symbolic membership test for the interaction set: is the coupling
    /// nonzero somewhere on `[0, T]`? Exact for every closed-form kind
    /// (degenerate trig forms are normalized away at construction).
    pub fn is_active(&self) -> bool {
        match self {
            TimeCoupling::Constant(c) => *c != 0.0,
            TimeCoupling::Poly(coeffs) => coeffs.iter().any(|&c| c != 0.0),
            TimeCoupling::Trig {
                cosine,
                amp,
                freq,
                phase,
            } => {
                *amp != 0.0
                    && (*freq != 0.0 || (if *cosine { phase.cos() } else { phase.sin() }) != 0.0)
            }
            TimeCoupling::Tabulated { values, .. } => values.iter().any(|&v| v != 0.0),
            TimeCoupling::SchwingerHopping {
                omega,
                mass,
                mu5,
                prefactor,
                ..
            } => *prefactor != 0.0 && (*omega != 0.0 || (*mass != 0.0 && *mu5 != 0.0)),
            TimeCoupling::SchwingerThetaDot { mu5, prefactor } => *mu5 != 0.0 && *prefactor != 0.0,
            TimeCoupling::SchwingerMass { mass, .. } => *mass != 0.0,
        }
    }

    /// True when the evaluator cannot depend on `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            TimeCoupling::Constant(_) => true,
            TimeCoupling::Poly(coeffs) => coeffs.iter().skip(1).all(|&c| c == 0.0),
            TimeCoupling::Trig { amp, freq, .. } => *amp == 0.0 || *freq == 0.0,
            TimeCoupling::Tabulated { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
            TimeCoupling::SchwingerHopping { mass, mu5, .. } => *mass == 0.0 || *mu5 == 0.0,
            TimeCoupling::SchwingerThetaDot { mu5, prefactor } => *mu5 == 0.0 || *prefactor == 0.0,
            TimeCoupling::SchwingerMass { mass, mu5, .. } => *mass == 0.0 || *mu5 == 0.0,
        }
    }

    /// Merges two couplings of compatible kinds; `None` when no closed form
    /// covers the sum.
    fn merge(&self, other: &TimeCoupling) -> Option<TimeCoupling> {
        use TimeCoupling::*;
        match (self, other) {
            (Constant(a), Constant(b)) => Some(Constant(a + b)),
            (Constant(a), Poly(p)) | (Poly(p), Constant(a)) => {
                let mut q = p.clone();
                if q.is_empty() {
                    q.push(0.0);
                }
                q[0] += a;
                Some(Poly(q))
            }
            (Poly(p), Poly(q)) => {
                let mut out = vec![0.0; p.len().max(q.len())];
                for (i, &c) in p.iter().enumerate() {
                    out[i] += c;
                }
                for (i, &c) in q.iter().enumerate() {
                    out[i] += c;
                }
                Some(Poly(out))
            }
            (
                Trig {
                    cosine: c1,
                    amp: a1,
                    freq: f1,
                    phase: p1,
                },
                Trig {
                    cosine: c2,
                    amp: a2,
                    freq: f2,
                    phase: p2,
                },
            ) if c1 == c2 && f1 == f2 && p1 == p2 => Some(Trig {
                cosine: *c1,
                amp: a1 + a2,
                freq: *f1,
                phase: *p1,
            }),
            _ => None,
        }
    }
}

/// Report of non-fatal events during Hamiltonian/observable construction.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    /// Strings whose duplicate occurrences were merged into one term.
    pub merged: Vec<String>,
    /// Strings dropped because their coupling is identically zero on `[0, T]`.
    pub inactive: Vec<String>,
}

/// A time-dependent Hamiltonian as a list of active Pauli-string terms.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    nqubits: usize,
    terms: Vec<(PauliString, TimeCoupling)>,
    maxlen: usize,
}

impl Hamiltonian {
    /// Merges duplicate strings, drops inactive couplings and validates
    /// supports against `nqubits`.
    pub fn new(
        nqubits: usize,
        terms: Vec<(PauliString, TimeCoupling)>,
    ) -> Result<(Hamiltonian, LoadReport)> {
        if nqubits == 0 {
            return Err(Error::config("Hamiltonian needs at least one qubit"));
        }
        let mut report = LoadReport::default();
        let mut merged: Vec<(PauliString, TimeCoupling)> = Vec::new();
        for (string, coupling) in terms {
            if string.max_site() as usize > nqubits {
                return Err(Error::config(format!(
                    "term {string} exceeds the {nqubits}-qubit system"
                )));
            }
            if let Some(existing) = merged.iter_mut().find(|(s, _)| *s == string) {
                let sum = existing.1.merge(&coupling).ok_or_else(|| {
                    Error::config(format!(
                        "cannot merge duplicate term {string}: incompatible coupling kinds"
                    ))
                })?;
                existing.1 = sum;
                report.merged.push(string.to_string());
            } else {
                merged.push((string, coupling));
            }
        }
        let mut active = Vec::new();
        for (string, coupling) in merged {
            if coupling.is_active() {
                active.push((string, coupling));
            } else {
                report.inactive.push(string.to_string());
            }
        }
        let maxlen = active.iter().map(|(s, _)| s.len()).max().unwrap_or(0);
        Ok((
            Hamiltonian {
                nqubits,
                terms: active,
                maxlen,
            },
            report,
        ))
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn terms(&self) -> &[(PauliString, TimeCoupling)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximal Pauli-string length among the terms.
    pub fn maxlen(&self) -> usize {
        self.maxlen
    }

    /// Coupling value of term `index` at time `t`.
    pub fn coupling_at(&self, index: usize, t: f64) -> Result<f64> {
        self.terms
            .get(index)
            .map(|(_, c)| c.value_at(t))
            .ok_or_else(|| Error::config(format!("term index {index} out of range")))
    }

    /// Right-continuous coupling value, see [`TimeCoupling::value_at_plus`].
    pub fn coupling_at_plus(&self, index: usize, t: f64) -> Result<f64> {
        self.terms
            .get(index)
            .map(|(_, c)| c.value_at_plus(t))
            .ok_or_else(|| Error::config(format!("term index {index} out of range")))
    }

    /// True when every coupling evaluator is constant in `t`.
    pub fn is_time_independent(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_constant())
    }
}

/// An observable as a real linear combination of Pauli strings; its string
/// set defines the seed layer of a subhierarchy.
#[derive(Debug, Clone)]
pub struct Observable {
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    /// Merges duplicate strings and drops zero coefficients.
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Observable> {
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        for (coeff, string) in terms {
            if let Some(existing) = merged.iter_mut().find(|(_, s)| *s == string) {
                existing.0 += coeff;
            } else {
                merged.push((coeff, string));
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        if merged.is_empty() {
            return Err(Error::config("observable has no nonzero terms"));
        }
        Ok(Observable { terms: merged })
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn strings(&self) -> Vec<PauliString> {
        self.terms.iter().map(|(_, s)| s.clone()).collect()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, s)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c} * ({s})")?;
        }
        Ok(())
    }
}

fn require_even(nqubits: usize) -> Result<()> {
    if nqubits % 2 != 0 || nqubits < 4 {
        return Err(Error::config(format!(
            "the periodic Schwinger chain needs an even qubit count >= 4, got {nqubits}"
        )));
    }
    Ok(())
}

/// Periodic lattice Schwinger-model spin-chain Hamiltonian under the sudden
/// chiral quench `theta(t) = -2 mu5 t` (`theta(0) = 0`).
///
/// Term order is fixed (it also fixes the Trotter slice order): odd-pair bulk
/// terms `(2k+1, 2k+2)` as XX, YY, XY, YX per pair; even-pair bulk terms
/// `(2k, 2k+1)` likewise; the four boundary strings carrying the Z-chain on
/// sites `2..nqubits-1`; the staggered mass terms `Z_1..Z_{nqubits}`.
/// Identically-zero couplings (all XY/YX strings when `mu5 = 0`, mass strings
/// when `m = 0`) are excluded.
pub fn build_schwinger(nqubits: usize, omega: f64, mass: f64, mu5: f64) -> Result<Hamiltonian> {
    require_even(nqubits)?;
    if omega <= 0.0 {
        return Err(Error::config("omega must be positive"));
    }
    if mass < 0.0 {
        return Err(Error::config("mass must be nonnegative"));
    }
    let n = nqubits as u32;
    let mut terms = Vec::new();

    let hopping = |k: usize, prefactor: f64| TimeCoupling::SchwingerHopping {
        omega,
        mass,
        mu5,
        ksign: if k % 2 == 0 { 1.0 } else { -1.0 },
        prefactor,
    };
    let theta_dot = |prefactor: f64| TimeCoupling::SchwingerThetaDot { mu5, prefactor };
    let two_site = |a: u32, ax: Axis, b: u32, bx: Axis| {
        PauliString::new(vec![(a, ax), (b, bx)]).expect("valid pair")
    };
    let mut pair_terms = |a: u32, b: u32, k: usize| {
        terms.push((two_site(a, Axis::X, b, Axis::X), hopping(k, 1.0)));
        terms.push((two_site(a, Axis::Y, b, Axis::Y), hopping(k, 1.0)));
        // -theta_dot/8 (XY - YX)
        terms.push((two_site(a, Axis::X, b, Axis::Y), theta_dot(1.0)));
        terms.push((two_site(a, Axis::Y, b, Axis::X), theta_dot(-1.0)));
    };

    for k in 0..nqubits / 2 {
        let (a, b) = (2 * k as u32 + 1, 2 * k as u32 + 2);
        pair_terms(a, b, k);
    }
    for k in 1..nqubits / 2 {
        let (a, b) = (2 * k as u32, 2 * k as u32 + 1);
        pair_terms(a, b, k);
    }

    // Boundary strings with the Z-chain on sites 2..n-1 and the global
    // (-1)^(nqubits/2) sign; a_{nqubits-1} has odd index.
    let boundary_sign = if (nqubits / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let chain = |first: Axis, last: Axis| {
        let mut support = vec![(1u32, first), (n, last)];
        for site in 2..n {
            support.push((site, Axis::Z));
        }
        PauliString::new(support).expect("valid boundary string")
    };
    terms.push((chain(Axis::X, Axis::X), hopping(nqubits - 1, boundary_sign)));
    terms.push((chain(Axis::Y, Axis::Y), hopping(nqubits - 1, boundary_sign)));
    // -(-1)^(nqubits/2) theta_dot/8 (Y1 Xn - X1 Yn) Z-chain
    terms.push((chain(Axis::Y, Axis::X), theta_dot(boundary_sign)));
    terms.push((chain(Axis::X, Axis::Y), theta_dot(-boundary_sign)));

    for site in 1..=n {
        terms.push((
            PauliString::single(site, Axis::Z),
            TimeCoupling::SchwingerMass {
                mass,
                mu5,
                ksign: if site % 2 == 0 { 1.0 } else { -1.0 },
            },
        ));
    }

    let (h, _report) = Hamiltonian::new(nqubits, terms)?;
    Ok(h)
}

/// Spatially averaged electric-current observable of the periodic Schwinger
/// chain: `omega/(2 nqubits)` times the signed XY-YX pairs plus the two
/// boundary strings of length `nqubits`.
pub fn build_current(nqubits: usize, omega: f64) -> Result<Observable> {
    require_even(nqubits)?;
    if omega <= 0.0 {
        return Err(Error::config("omega must be positive"));
    }
    let n = nqubits as u32;
    let j = omega / (2.0 * nqubits as f64);
    let mut terms = Vec::new();
    let two_site = |a: u32, ax: Axis, b: u32, bx: Axis| {
        PauliString::new(vec![(a, ax), (b, bx)]).expect("valid pair")
    };
    for k in 0..nqubits / 2 {
        let (a, b) = (2 * k as u32 + 1, 2 * k as u32 + 2);
        terms.push((j, two_site(a, Axis::X, b, Axis::Y)));
        terms.push((-j, two_site(a, Axis::Y, b, Axis::X)));
    }
    for k in 1..nqubits / 2 {
        let (a, b) = (2 * k as u32, 2 * k as u32 + 1);
        terms.push((j, two_site(a, Axis::X, b, Axis::Y)));
        terms.push((-j, two_site(a, Axis::Y, b, Axis::X)));
    }
    let boundary_sign = if (nqubits / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let chain = |first: Axis, last: Axis| {
        let mut support = vec![(1u32, first), (n, last)];
        for site in 2..n {
            support.push((site, Axis::Z));
        }
        PauliString::new(support).expect("valid boundary string")
    };
    terms.push((boundary_sign * j, chain(Axis::Y, Axis::X)));
    terms.push((-boundary_sign * j, chain(Axis::X, Axis::Y)));
    Observable::new(terms)
}

/// Upper bound on the number of distinct active terms: the count of all Pauli
/// strings of length at most `maxlen` on `nqubits` sites.
pub fn term_count_bound(maxlen: usize, nqubits: usize) -> u128 {
    assert!(
        maxlen >= 1 && maxlen <= nqubits,
        "need 1 <= maxlen <= nqubits"
    );
    let mut total: u128 = 0;
    let mut binom: u128 = 1; // C(nqubits, 0)
    let mut pow3: u128 = 1;
    for l in 1..=maxlen {
        binom = binom * (nqubits - l + 1) as u128 / l as u128;
        pow3 *= 3;
        total += pow3 * binom;
    }
    total
}

// ---------------------------------------------------------------------------
// File format: one term per line, `<pauli string> : <coupling spec>`,
// `#` comments. Coupling specs:
//   const <c>
//   poly <c0> <c1> ...
//   sin  amp=<a> freq=<b> phase=<c>      (a * sin(b t + c); `cos` likewise)
//   tab  <t0>:<v0> <t1>:<v1> ...
// Observable files use the same line shape restricted to `const`.
// ---------------------------------------------------------------------------

fn parse_coupling(spec: &str, line_no: usize, col: usize) -> Result<TimeCoupling> {
    let mut parts = spec.split_whitespace();
    let kind = parts
        .next()
        .ok_or_else(|| Error::parse(line_no, col, "missing coupling spec"))?;
    let parse_f64 = |tok: &str| -> Result<f64> {
        tok.parse()
            .map_err(|_| Error::parse(line_no, col, format!("bad number `{tok}`")))
    };
    match kind {
        "const" => {
            let c = parse_f64(
                parts
                    .next()
                    .ok_or_else(|| Error::parse(line_no, col, "const needs a value"))?,
            )?;
            if parts.next().is_some() {
                return Err(Error::parse(line_no, col, "const takes one value"));
            }
            Ok(TimeCoupling::Constant(c))
        }
        "poly" => {
            let coeffs: Result<Vec<f64>> = parts.map(parse_f64).collect();
            let coeffs = coeffs?;
            if coeffs.is_empty() {
                return Err(Error::parse(line_no, col, "poly needs coefficients"));
            }
            Ok(TimeCoupling::Poly(coeffs))
        }
        "sin" | "cos" => {
            let mut amp = None;
            let mut freq = None;
            let mut phase = None;
            for tok in parts {
                let (key, value) = tok.split_once('=').ok_or_else(|| {
                    Error::parse(line_no, col, format!("expected key=value, got `{tok}`"))
                })?;
                let v = parse_f64(value)?;
                match key {
                    "amp" => amp = Some(v),
                    "freq" => freq = Some(v),
                    "phase" => phase = Some(v),
                    _ => return Err(Error::parse(line_no, col, format!("unknown key `{key}`"))),
                }
            }
            let coupling = TimeCoupling::Trig {
                cosine: kind == "cos",
                amp: amp.ok_or_else(|| Error::parse(line_no, col, "missing amp="))?,
                freq: freq.unwrap_or(0.0),
                phase: phase.unwrap_or(0.0),
            };
            // A frequency-0 oscillation is a constant; normalize so the
            // symbolic activity check stays exact.
            if let TimeCoupling::Trig {
                cosine,
                amp,
                freq,
                phase,
            } = coupling
            {
                if freq == 0.0 {
                    let v = amp * if cosine { phase.cos() } else { phase.sin() };
                    return Ok(TimeCoupling::Constant(v));
                }
                Ok(TimeCoupling::Trig {
                    cosine,
                    amp,
                    freq,
                    phase,
                })
            } else {
                unreachable!()
            }
        }
        "tab" => {
            let mut times = Vec::new();
            let mut values = Vec::new();
            for tok in parts {
                let (t, v) = tok.split_once(':').ok_or_else(|| {
                    Error::parse(line_no, col, format!("expected t:v, got `{tok}`"))
                })?;
                times.push(parse_f64(t)?);
                values.push(parse_f64(v)?);
            }
            if times.is_empty() {
                return Err(Error::parse(line_no, col, "tab needs knots"));
            }
            if times.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse(line_no, col, "tab knots must be increasing"));
            }
            Ok(TimeCoupling::Tabulated { times, values })
        }
        other => Err(Error::parse(
            line_no,
            col,
            format!("unknown coupling kind `{other}`"),
        )),
    }
}

fn split_term_line(line: &str, line_no: usize) -> Result<Option<(PauliString, &str, usize)>> {
    let stripped = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    if stripped.trim().is_empty() {
        return Ok(None);
    }
    let colon = stripped
        .find(':')
        .ok_or_else(|| Error::parse(line_no, stripped.len() + 1, "missing `:` separator"))?;
    let string = parse_pauli_tokens(&stripped[..colon], line_no, 1)?;
    Ok(Some((string, stripped[colon + 1..].trim(), colon + 2)))
}

/// Parses the Hamiltonian text format; duplicates are merged and inactive
/// terms dropped, with notices in the report.
pub fn parse_hamiltonian(text: &str, nqubits: usize) -> Result<(Hamiltonian, LoadReport)> {
    let mut terms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some((string, spec, col)) = split_term_line(line, i + 1)? {
            let coupling = parse_coupling(spec, i + 1, col)?;
            terms.push((string, coupling));
        }
    }
    Hamiltonian::new(nqubits, terms)
}

/// Loads a Hamiltonian file, inferring the qubit count from the largest site
/// when `nqubits` is `None`.
pub fn load_hamiltonian(path: &Path, nqubits: Option<usize>) -> Result<(Hamiltonian, LoadReport)> {
    let text = std::fs::read_to_string(path)?;
    let n = match nqubits {
        Some(n) => n,
        None => infer_nqubits(&text)?,
    };
    parse_hamiltonian(&text, n)
}

fn infer_nqubits(text: &str) -> Result<usize> {
    let mut max_site = 0u32;
    for (i, line) in text.lines().enumerate() {
        if let Some((string, _, _)) = split_term_line(line, i + 1)? {
            max_site = max_site.max(string.max_site());
        }
    }
    if max_site == 0 {
        return Err(Error::config("file defines no terms"));
    }
    Ok(max_site as usize)
}

/// Parses the observable format (constant real coefficients only).
pub fn parse_observable(text: &str) -> Result<Observable> {
    let mut terms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some((string, spec, col)) = split_term_line(line, i + 1)? {
            match parse_coupling(spec, i + 1, col)? {
                TimeCoupling::Constant(c) => terms.push((c, string)),
                _ => {
                    return Err(Error::parse(
                        i + 1,
                        col,
                        "observable coefficients must be `const`",
                    ))
                }
            }
        }
    }
    Observable::new(terms)
}

pub fn load_observable(path: &Path) -> Result<Observable> {
    parse_observable(&std::fs::read_to_string(path)?)
}
