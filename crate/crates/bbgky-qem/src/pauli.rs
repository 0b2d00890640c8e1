//! Exact symbolic algebra of Pauli strings.
//!
//! A Pauli string is a tensor product of single-site Pauli operators over a
//! nonempty set of sites, kept in a canonical site-sorted sparse form. The
//! closed-form product and commutator/anticommutator rules keep all
//! coefficients as exact Gaussian integers, so the algebra layer is free of
//! rounding.

use std::fmt;

use crate::error::{Error, Result};

/// Pauli axis, ordered X < Y < Z for canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X = 1,
    Y = 2,
    Z = 3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Axis> {
        match c {
            'X' | 'x' => Some(Axis::X),
            'Y' | 'y' => Some(Axis::Y),
            'Z' | 'z' => Some(Axis::Z),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize - 1
    }
}

/// The axis missing from `{a, b}`, for `a != b`.
fn third_axis(a: Axis, b: Axis) -> Axis {
    debug_assert_ne!(a, b);
    match (a as usize) + (b as usize) {
        3 => Axis::Z, // X+Y
        4 => Axis::Y, // X+Z
        5 => Axis::X, // Y+Z
        _ => unreachable!(),
    }
}

/// Levi-Civita sign of the permutation (a, b, third(a, b)).
fn epsilon(a: Axis, b: Axis) -> i32 {
    // eps[a][b] with the third index implied.
    const EPS: [[i32; 3]; 3] = [[0, 1, -1], [-1, 0, 1], [1, -1, 0]];
    EPS[a.index()][b.index()]
}

/// Exact coefficient arising from Pauli products and brackets.
///
/// Closed under the operations of this module: products produce units
/// `{±1, ±i}`, brackets produce `{0, ±2, ±2i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussInt {
    pub re: i32,
    pub im: i32,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
    pub const I: GaussInt = GaussInt { re: 0, im: 1 };

    pub fn new(re: i32, im: i32) -> Self {
        GaussInt { re, im }
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn mul(self, other: GaussInt) -> GaussInt {
        GaussInt {
            re: self.re * other.re - self.im * other.im,
            im: self.re * other.im + self.im * other.re,
        }
    }

    pub fn neg(self) -> GaussInt {
        GaussInt {
            re: -self.re,
            im: -self.im,
        }
    }

    pub fn scale(self, k: i32) -> GaussInt {
        GaussInt {
            re: self.re * k,
            im: self.im * k,
        }
    }

    /// i^k for k >= 0.
    pub fn i_pow(k: u32) -> GaussInt {
        match k % 4 {
            0 => GaussInt::new(1, 0),
            1 => GaussInt::new(0, 1),
            2 => GaussInt::new(-1, 0),
            _ => GaussInt::new(0, -1),
        }
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re as f64, self.im as f64)
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re, self.im) {
            (re, 0) => write!(f, "{re}"),
            (0, 1) => write!(f, "i"),
            (0, -1) => write!(f, "-i"),
            (0, im) => write!(f, "{im}i"),
            (re, im) if im > 0 => write!(f, "{re}+{im}i"),
            (re, im) => write!(f, "{re}{im}i"),
        }
    }
}

/// Commutator (`[A,B] = AB - BA`) or anticommutator (`{A,B} = AB + BA`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BracketKind {
    Commutator,
    Anticommutator,
}

impl BracketKind {
    /// 1 for the commutator, 0 for the anticommutator.
    pub fn delta(self) -> u32 {
        match self {
            BracketKind::Commutator => 1,
            BracketKind::Anticommutator => 0,
        }
    }
}

/// Canonical sparse Pauli string: strictly ascending 1-based sites, each with
/// an axis. The support is never empty; identity appears only inside
/// [`ScaledPauli`] as a product/bracket result.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    support: Vec<(u32, Axis)>,
}

impl PauliString {
    /// Builds a canonical string from (site, axis) pairs in any order.
    /// Rejects empty support, duplicate sites and site 0.
    pub fn new(mut support: Vec<(u32, Axis)>) -> Result<PauliString> {
        if support.is_empty() {
            return Err(Error::config("Pauli string must have nonempty support"));
        }
        support.sort_by_key(|&(site, _)| site);
        for pair in support.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::config(format!(
                    "duplicate site {} in Pauli string",
                    pair[0].0
                )));
            }
        }
        if support[0].0 == 0 {
            return Err(Error::config("Pauli sites are 1-based"));
        }
        Ok(PauliString { support })
    }

    /// Single-site string.
    pub fn single(site: u32, axis: Axis) -> PauliString {
        PauliString {
            support: vec![(site, axis)],
        }
    }

    pub fn support(&self) -> &[(u32, Axis)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> impl Iterator<Item = u32> + '_ {
        self.support.iter().map(|&(site, _)| site)
    }

    pub fn axis_at(&self, site: u32) -> Option<Axis> {
        self.support
            .binary_search_by_key(&site, |&(s, _)| s)
            .ok()
            .map(|i| self.support[i].1)
    }

    pub fn max_site(&self) -> u32 {
        self.support.last().unwrap().0
    }

    /// Parses the textual notation, e.g. `X1 Y2 Z5`.
    pub fn parse(text: &str) -> Result<PauliString> {
        parse_pauli_tokens(text, 1, 1)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &(site, axis)) in self.support.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", axis.letter(), site)?;
        }
        Ok(())
    }
}

/// Parses `X1 Y2 ...` starting at the given (line, column) for error reporting.
pub(crate) fn parse_pauli_tokens(text: &str, line: usize, start_col: usize) -> Result<PauliString> {
    let mut support = Vec::new();
    let mut col = start_col;
    for token in text.split_whitespace() {
        // Track the column of the token inside the original text.
        let offset = text[col.saturating_sub(start_col)..]
            .find(token)
            .map(|o| o + col.saturating_sub(start_col))
            .unwrap_or(0);
        let token_col = start_col + offset;
        let mut chars = token.chars();
        let letter = chars.next().unwrap();
        let axis = Axis::from_letter(letter)
            .ok_or_else(|| Error::parse(line, token_col, format!("unknown axis `{letter}`")))?;
        let site: u32 = chars.as_str().parse().map_err(|_| {
            Error::parse(
                line,
                token_col,
                format!("bad site index `{}`", chars.as_str()),
            )
        })?;
        if site == 0 {
            return Err(Error::parse(line, token_col, "sites are 1-based"));
        }
        if support.iter().any(|&(s, _)| s == site) {
            return Err(Error::parse(
                line,
                token_col,
                format!("duplicate site {site}"),
            ));
        }
        support.push((site, axis));
        col = token_col + token.len();
    }
    if support.is_empty() {
        return Err(Error::parse(line, start_col, "empty Pauli string"));
    }
    PauliString::new(support)
}

/// A Pauli string (or identity) with an exact scalar coefficient.
///
/// The canonical zero is `coeff = 0` with `string = None`; identity results
/// (`string = None` with a nonzero coefficient) occur only as products or
/// anticommutators of equal strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScaledPauli {
    pub coeff: GaussInt,
    pub string: Option<PauliString>,
}

impl ScaledPauli {
    pub const ZERO: ScaledPauli = ScaledPauli {
        coeff: GaussInt::ZERO,
        string: None,
    };

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn identity(coeff: GaussInt) -> ScaledPauli {
        ScaledPauli {
            coeff,
            string: None,
        }
    }
}

/// Number of sites in the overlap where the two strings carry different axes
/// (`d` of the bracket rules).
pub fn difference_count(p: &PauliString, q: &PauliString) -> usize {
    let mut d = 0;
    let mut i = 0;
    let mut j = 0;
    let ps = p.support();
    let qs = q.support();
    while i < ps.len() && j < qs.len() {
        match ps[i].0.cmp(&qs[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if ps[i].1 != qs[j].1 {
                    d += 1;
                }
                i += 1;
                j += 1;
            }
        }
    }
    d
}

/// The scalar factor controlling brackets: `2(-1)^((d - delta)/2)` when
/// `d - delta` is even and nonnegative, else 0.
pub fn f_factor(d: usize, kind: BracketKind) -> i32 {
    let delta = kind.delta() as usize;
    if d < delta || (d - delta) % 2 != 0 {
        return 0;
    }
    if (d - delta) / 2 % 2 == 0 {
        2
    } else {
        -2
    }
}

/// Tightest (lower, upper) bounds on the length of a nonzero bracket of
/// strings with the given lengths.
pub fn length_bounds(len_a: usize, len_b: usize, kind: BracketKind) -> (usize, usize) {
    let delta = kind.delta() as usize;
    (len_a.abs_diff(len_b) + delta, len_a + len_b - delta)
}

/// Walks both supports, producing the target support of a product or bracket
/// together with the Levi-Civita sign over differing overlap sites and the
/// number of differing sites.
fn combine_supports(p: &PauliString, q: &PauliString) -> (Vec<(u32, Axis)>, i32, usize) {
    let ps = p.support();
    let qs = q.support();
    let mut out = Vec::with_capacity(ps.len() + qs.len());
    let mut sign = 1i32;
    let mut d = 0usize;
    let mut i = 0;
    let mut j = 0;
    while i < ps.len() || j < qs.len() {
        if j == qs.len() || (i < ps.len() && ps[i].0 < qs[j].0) {
            out.push(ps[i]);
            i += 1;
        } else if i == ps.len() || qs[j].0 < ps[i].0 {
            out.push(qs[j]);
            j += 1;
        } else {
            let (site, a) = ps[i];
            let b = qs[j].1;
            if a != b {
                out.push((site, third_axis(a, b)));
                sign *= epsilon(a, b);
                d += 1;
            }
            // Matching axes square to identity and drop out.
            i += 1;
            j += 1;
        }
    }
    (out, sign, d)
}

/// Exact product `p * q = coeff * string`, with `coeff` in `{±1, ±i}`.
pub fn multiply(p: &PauliString, q: &PauliString) -> ScaledPauli {
    let (support, sign, d) = combine_supports(p, q);
    let coeff = GaussInt::i_pow(d as u32).scale(sign);
    if support.is_empty() {
        ScaledPauli::identity(coeff)
    } else {
        ScaledPauli {
            coeff,
            string: Some(PauliString { support }),
        }
    }
}

/// Exact commutator or anticommutator `[p, q]_± = coeff * string`.
///
/// Nonzero results carry `coeff = i^δ± · f± · s_ε` with `f± ∈ {±2}`, the
/// support rule being: sites only in `p` keep their axes, sites only in `q`
/// keep theirs, overlap sites with differing axes get the third axis, and
/// matching overlap sites drop out.
pub fn bracket(p: &PauliString, q: &PauliString, kind: BracketKind) -> ScaledPauli {
    let d = difference_count(p, q);
    let f = f_factor(d, kind);
    if f == 0 {
        return ScaledPauli::ZERO;
    }
    let (support, sign, _) = combine_supports(p, q);
    let coeff = GaussInt::i_pow(kind.delta()).scale(f * sign);
    if support.is_empty() {
        ScaledPauli::identity(coeff)
    } else {
        ScaledPauli {
            coeff,
            string: Some(PauliString { support }),
        }
    }
}
