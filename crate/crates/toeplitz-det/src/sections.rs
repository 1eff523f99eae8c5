//! Dense finite sections of Toeplitz and Hankel operators on `l^2(N)`.
//!
//! Index convention is 1-based, matching the operator entries
//!
//! ```text
//! T(phi)_{jk} = phi_{j-k},   H(phi)_{jk} = phi_{j+k-1},
//! H(phi~)_{jk} = phi_{-j-k+1},          j, k = 1, 2, ...
//! ```
//!
//! A [`FiniteSection`] is the upper-left `level x level` corner of such an
//! operator (or of a product of them). Products carry an `inner_level`: the
//! dimension the middle index was summed over. For the Hankel product
//! `K = H(b) H(c~)` the inner dimension is chosen so that the Frobenius norm
//! of the discarded tail factors is below the policy tolerance, and the bound
//! actually achieved is recorded in `tail_bound`. Since stored symbol
//! supports are finite, the inner sum usually covers them entirely, making
//! the section entries exact and the bound zero.
//!
//! Projections `Q_k` (drop the first `k` coordinates) act by zeroing rows
//! and/or columns, never by shrinking matrices, so levels stay aligned across
//! a computation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::Symbol;

/// Dense complex matrix alias used throughout the crate.
pub type CMat = DMatrix<Complex64>;

/// Largest entry modulus (the max-norm of the entry list; zero for empty
/// matrices).
pub fn max_modulus(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hard cap on inner truncation dimensions for operator products.
pub const INNER_CAP: usize = 4096;

/// How large finite sections are allowed to be and how carefully products
/// must resolve their inner tails.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TruncationPolicy {
    /// Requested outer section level.
    pub target_level: usize,
    /// Frobenius-norm tolerance for discarded inner tails.
    pub tail_tol: f64,
    /// Re-run products and resolvent formulas at doubled dimensions and
    /// demand agreement.
    pub doubling_check: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { target_level: 64, tail_tol: 1e-12, doubling_check: true }
    }
}

impl TruncationPolicy {
    /// Policy with a different target level, keeping the other knobs.
    pub fn with_level(self, target_level: usize) -> Self {
        TruncationPolicy { target_level, ..self }
    }
}

/// The upper-left corner of an operator on `l^2(N)`, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSection {
    /// Dense `level x level` entries.
    pub entries: CMat,
    /// Outer dimension.
    pub level: usize,
    /// Dimension the middle index of a product ranged over (`level` for
    /// plain Toeplitz/Hankel sections).
    pub inner_level: usize,
    /// Upper bound, computed from coefficient tails, for the Frobenius norm
    /// of what the inner truncation discarded.
    pub tail_bound: f64,
}

impl FiniteSection {
    /// Wraps an explicit square matrix as an exact section.
    pub fn from_matrix(entries: CMat) -> Self {
        let level = entries.nrows();
        assert_eq!(level, entries.ncols(), "sections are square");
        FiniteSection { entries, level, inner_level: level, tail_bound: 0.0 }
    }
}

/// Which side of a section a projection acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Zero the first `k` rows (apply `Q_k` from the left).
    Left,
    /// Zero the first `k` columns (apply `Q_k` from the right).
    Right,
    /// Both of the above.
    Both,
}

/// Rectangular block `(phi_{j-k})`, `j = 1..rows`, `k = 1..cols`.
pub fn toeplitz_block(phi: &Symbol, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| phi.coeff(i as i64 - j as i64))
}

/// Rectangular block `(phi_{j+k-1})`, `j = 1..rows`, `k = 1..cols`.
pub fn hankel_block(phi: &Symbol, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| phi.coeff(i as i64 + j as i64 + 1))
}

/// Rectangular block `(phi_{-j-k+1})`, `j = 1..rows`, `k = 1..cols`.
pub fn hankel_tilde_block(phi: &Symbol, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| phi.coeff(-(i as i64 + j as i64 + 1)))
}

/// The `n x n` Toeplitz section `T_n(phi)`.
pub fn toeplitz_section(phi: &Symbol, n: usize) -> FiniteSection {
    FiniteSection::from_matrix(toeplitz_block(phi, n, n))
}

/// The `n x n` Hankel section of `H(phi)`.
pub fn hankel_section(phi: &Symbol, n: usize) -> FiniteSection {
    FiniteSection::from_matrix(hankel_block(phi, n, n))
}

/// The `n x n` Hankel section of `H(phi~)`.
pub fn hankel_tilde_section(phi: &Symbol, n: usize) -> FiniteSection {
    FiniteSection::from_matrix(hankel_tilde_block(phi, n, n))
}

/// Section of the Hankel product `K = H(b) H(c~)` at the policy's target
/// level, with the inner dimension enlarged until the discarded tail bound
/// drops below `policy.tail_tol`.
///
/// The bound for inner dimension `L` is
/// `|| P_N H(b) Q_L ||_F * || Q_L H(c~) P_N ||_F`, evaluated exactly on the
/// stored coefficients. Fails with [`Error::TailNotResolved`] if no
/// `L <= INNER_CAP` achieves the tolerance, and (when the policy asks for it)
/// cross-checks the entries against an inner dimension of `2L`.
pub fn k_section(b: &Symbol, c: &Symbol, policy: &TruncationPolicy) -> Result<FiniteSection> {
    let n = policy.target_level;
    assert!(n >= 1, "target level must be positive");

    // Squared moduli of the coefficients each factor reads: b_m and c_{-m},
    // m >= 1.
    let b_sq: Vec<(i64, f64)> =
        b.iter().filter(|&(k, _)| k >= 1).map(|(k, z)| (k, z.norm_sqr())).collect();
    let c_sq: Vec<(i64, f64)> =
        c.iter().filter(|&(k, _)| k <= -1).map(|(k, z)| (-k, z.norm_sqr())).collect();

    let tail = |coeffs: &[(i64, f64)], level: usize| -> f64 {
        coeffs
            .iter()
            .filter(|&&(m, _)| m > level as i64)
            .map(|&(m, w)| ((m - level as i64) as f64).min(n as f64) * w)
            .sum::<f64>()
            .sqrt()
    };
    let bound_at = |level: usize| tail(&b_sq, level) * tail(&c_sq, level);

    let mut inner = n;
    let mut bound = bound_at(inner);
    while bound >= policy.tail_tol && inner < INNER_CAP {
        inner = (inner + 16).min(INNER_CAP);
        bound = bound_at(inner);
    }
    if bound >= policy.tail_tol {
        return Err(Error::TailNotResolved { bound, inner });
    }

    let product =
        |l: usize| -> CMat { hankel_block(b, n, l) * hankel_tilde_block(c, l, n) };
    let entries = product(inner);

    if policy.doubling_check && bound > 0.0 {
        let wide = product(2 * inner);
        let gap = max_modulus(&(&wide - &entries));
        if gap > 1e-12 {
            return Err(Error::TailNotResolved { bound: gap, inner });
        }
    }

    Ok(FiniteSection { entries, level: n, inner_level: inner, tail_bound: bound })
}

/// Applies the projection `Q_k` (zero the first `k` rows and/or columns).
pub fn apply_q(section: &FiniteSection, k: usize, side: Side) -> Result<FiniteSection> {
    if k > section.level {
        return Err(Error::IndexOutOfRange { k, level: section.level });
    }
    let mut entries = section.entries.clone();
    if matches!(side, Side::Left | Side::Both) {
        for i in 0..k {
            entries.row_mut(i).fill(Complex64::ZERO);
        }
    }
    if matches!(side, Side::Right | Side::Both) {
        for j in 0..k {
            entries.column_mut(j).fill(Complex64::ZERO);
        }
    }
    Ok(FiniteSection { entries, ..section.clone() })
}

/// Singular values of the `n x n` Hankel section of `H(phi)`, in
/// nonincreasing order.
pub fn hankel_singular_decay(phi: &Symbol, n: usize) -> Vec<f64> {
    let mut sv: Vec<f64> = hankel_block(phi, n, n)
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Exact Frobenius norm of `Q_n H(phi)` computed from stored coefficients:
/// `sqrt( sum_{m > n} (m - n) |phi_m|^2 )`.
pub fn hankel_tail_frobenius(phi: &Symbol, n: usize) -> f64 {
    phi.iter()
        .filter(|&(m, _)| m > n as i64)
        .map(|(m, z)| (m - n as i64) as f64 * z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}
