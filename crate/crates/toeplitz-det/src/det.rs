//! Determinants, LU factorization, minors, and two classical determinant
//! identities used as cross-checks throughout the crate.
//!
//! The first is Jacobi's theorem on minors of the inverse: for invertible
//! `A` and index sets `R = {r_1 < ... < r_s}`, `C = {c_1 < ... < c_s}`,
//!
//! ```text
//! det (A^{-1})[R, C]
//!     = (-1)^{sum R + sum C} det A[C', R'] / det A,
//! ```
//!
//! where primes denote complements in `{1, ..., m}` and `[X, Y]` keeps rows
//! `X` and columns `Y`. Note the complementary minor has its index sets
//! swapped relative to the left-hand side.
//!
//! The second identity is the trace formula
//!
//! ```text
//! det( e^A e^B e^{-A} e^{-B} ) = exp( tr(AB - BA) )
//! ```
//!
//! valid when `AB - BA` is trace class. Any finite truncation of all four
//! exponentials has determinant exactly one, so the finite-dimensional check
//! evaluates the determinant of an upper-left corner of the product while
//! the traces are accumulated over the full sections; the corner then
//! converges to the operator determinant as levels grow.
//!
//! All factorizations are dense complex LU with partial pivoting. `DetResult`
//! carries the smallest pivot modulus and a pivot-ratio condition estimate so
//! callers can reject near-singular inputs instead of trusting garbage.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sections::{apply_q, max_modulus, CMat, FiniteSection, Side};

/// Determinant of a dense complex matrix together with diagnostics from the
/// elimination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetResult {
    /// The determinant.
    pub value: Complex64,
    /// `sum log |pivot|`; finite even when `value` under- or overflows.
    pub log_modulus: f64,
    /// Smallest pivot modulus encountered.
    pub pivot_min: f64,
    /// `pivot_min / pivot_max`: a cheap reciprocal-condition proxy. Zero for
    /// an exactly singular elimination.
    pub rcond_estimate: f64,
}

/// Dense LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: CMat,
    perm: Vec<usize>,
    sign: f64,
    n: usize,
}

impl LuFactor {
    /// Factors `a` (square). Singular matrices factor fine; their zero
    /// pivots show up in the diagnostics.
    pub fn new(a: &CMat) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_mag = lu[(col, col)].norm();
            for row in col + 1..n {
                let mag = lu[(row, col)].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = row;
                }
            }
            if pivot_row != col {
                lu.swap_rows(pivot_row, col);
                perm.swap(pivot_row, col);
                sign = -sign;
            }
            let pivot = lu[(col, col)];
            if pivot.norm() == 0.0 {
                continue;
            }
            for row in col + 1..n {
                let factor = lu[(row, col)] / pivot;
                lu[(row, col)] = factor;
                for k in col + 1..n {
                    let delta = factor * lu[(col, k)];
                    lu[(row, k)] -= delta;
                }
            }
        }
        LuFactor { lu, perm, sign, n }
    }

    /// Dimension of the factored matrix.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Determinant and pivot diagnostics.
    pub fn det(&self) -> DetResult {
        let mut value = Complex64::new(self.sign, 0.0);
        let mut log_modulus = 0.0;
        let mut pivot_min = f64::INFINITY;
        let mut pivot_max: f64 = 0.0;
        for i in 0..self.n {
            let p = self.lu[(i, i)];
            value *= p;
            log_modulus += p.norm().ln();
            pivot_min = pivot_min.min(p.norm());
            pivot_max = pivot_max.max(p.norm());
        }
        if self.n == 0 {
            // Empty determinant is 1 by convention.
            return DetResult { value: Complex64::ONE, log_modulus: 0.0, pivot_min: 1.0, rcond_estimate: 1.0 };
        }
        let rcond_estimate = if pivot_max > 0.0 { pivot_min / pivot_max } else { 0.0 };
        DetResult { value, log_modulus, pivot_min, rcond_estimate }
    }

    /// Solves `A X = B` in place using the stored factors.
    pub fn solve_in_place(&self, rhs: &mut CMat) -> Result<()> {
        assert_eq!(rhs.nrows(), self.n, "rhs row count must match");
        let det = self.det();
        if det.pivot_min == 0.0 {
            return Err(Error::NearSingular { rcond: 0.0 });
        }
        // Apply the row permutation: P A = L U, so solve L U x = P b.
        let mut permuted = rhs.clone();
        for (dst, &src) in self.perm.iter().enumerate() {
            permuted.row_mut(dst).copy_from(&rhs.row(src));
        }
        *rhs = permuted;
        let m = rhs.ncols();
        for col in 0..m {
            // Forward substitution with unit lower-triangular L.
            for i in 0..self.n {
                let mut acc = rhs[(i, col)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * rhs[(k, col)];
                }
                rhs[(i, col)] = acc;
            }
            // Back substitution with U.
            for i in (0..self.n).rev() {
                let mut acc = rhs[(i, col)];
                for k in i + 1..self.n {
                    acc -= self.lu[(i, k)] * rhs[(k, col)];
                }
                rhs[(i, col)] = acc / self.lu[(i, i)];
            }
        }
        Ok(())
    }

    /// Dense inverse via solving against the identity.
    pub fn inverse(&self) -> Result<CMat> {
        let mut rhs = CMat::identity(self.n, self.n);
        self.solve_in_place(&mut rhs)?;
        Ok(rhs)
    }
}

/// Determinant of a dense matrix with diagnostics.
pub fn det_lu(a: &CMat) -> DetResult {
    LuFactor::new(a).det()
}

/// A minor selection: 1-based, strictly increasing row and column index
/// lists of equal length inside an `ambient x ambient` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorSpec {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub ambient: usize,
}

impl MinorSpec {
    /// Builds and validates a selection.
    pub fn new(rows: Vec<usize>, cols: Vec<usize>, ambient: usize) -> Result<Self> {
        let spec = MinorSpec { rows, cols, ambient };
        spec.validate()?;
        Ok(spec)
    }

    /// Contiguous row band / column band selection (1-based, inclusive).
    pub fn block(row_start: usize, col_start: usize, size: usize, ambient: usize) -> Result<Self> {
        MinorSpec::new(
            (row_start..row_start + size).collect(),
            (col_start..col_start + size).collect(),
            ambient,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.rows.len() != self.cols.len() {
            return Err(Error::BadSpec(format!(
                "row and column selections differ in length: {} vs {}",
                self.rows.len(),
                self.cols.len()
            )));
        }
        if self.rows.is_empty() {
            return Err(Error::BadSpec("empty minor selection".into()));
        }
        for list in [&self.rows, &self.cols] {
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::BadSpec(format!(
                        "indices must be strictly increasing, got {} then {}",
                        w[0], w[1]
                    )));
                }
            }
            if list[0] < 1 || *list.last().unwrap() > self.ambient {
                return Err(Error::BadSpec(format!(
                    "indices must lie in 1..={}, got {:?}",
                    self.ambient, list
                )));
            }
        }
        Ok(())
    }

    /// Number of selected rows (= columns).
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// The complement of a 1-based index list in `1..=ambient`.
    fn complement(list: &[usize], ambient: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(ambient - list.len());
        let mut it = list.iter().peekable();
        for i in 1..=ambient {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }

    fn extract(&self, a: &CMat) -> CMat {
        CMat::from_fn(self.rows.len(), self.cols.len(), |i, j| {
            a[(self.rows[i] - 1, self.cols[j] - 1)]
        })
    }
}

/// Determinant of the selected minor of `a`.
pub fn minor_det(a: &CMat, spec: &MinorSpec) -> Result<Complex64> {
    spec.validate()?;
    if spec.ambient != a.nrows() || spec.ambient != a.ncols() {
        return Err(Error::BadSpec(format!(
            "ambient dimension {} does not match a {}x{} matrix",
            spec.ambient,
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(det_lu(&spec.extract(a)).value)
}

/// Minimum reciprocal-condition estimate below which identity checks refuse
/// to divide by a determinant.
const RCOND_FLOOR: f64 = 1e-12;

/// Evaluates both sides of Jacobi's identity on minors of the inverse.
///
/// Returns `(lhs, rhs)` where `lhs = det (A^{-1})[rows, cols]` and
/// `rhs = (-1)^{sum rows + sum cols} det A[cols', rows'] / det A` (an empty
/// complementary minor contributes the factor one).
pub fn jacobi_check(a: &CMat, spec: &MinorSpec) -> Result<(Complex64, Complex64)> {
    spec.validate()?;
    if spec.ambient != a.nrows() || spec.ambient != a.ncols() {
        return Err(Error::BadSpec(format!(
            "ambient dimension {} does not match a {}x{} matrix",
            spec.ambient,
            a.nrows(),
            a.ncols()
        )));
    }
    let lu = LuFactor::new(a);
    let det = lu.det();
    if det.rcond_estimate < RCOND_FLOOR {
        return Err(Error::NearSingular { rcond: det.rcond_estimate });
    }
    let inv = lu.inverse()?;
    let lhs = det_lu(&spec.extract(&inv)).value;

    let comp_rows = MinorSpec::complement(&spec.cols, spec.ambient);
    let comp_cols = MinorSpec::complement(&spec.rows, spec.ambient);
    let comp = if comp_rows.is_empty() {
        Complex64::ONE
    } else {
        let comp_spec =
            MinorSpec { rows: comp_rows, cols: comp_cols, ambient: spec.ambient };
        det_lu(&comp_spec.extract(a)).value
    };
    let exponent: usize = spec.rows.iter().sum::<usize>() + spec.cols.iter().sum::<usize>();
    let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
    Ok((lhs, sign * comp / det.value))
}

/// Evaluates both sides of the leading-corner resolvent identity
///
/// ```text
/// det P_n (I - K)^{-1} P_n = det(I - Q_n K Q_n) / det(I - K)
/// ```
///
/// at the section level of `k`. Returns `(lhs, rhs)`.
pub fn corollary22_check(k: &FiniteSection, n: usize) -> Result<(Complex64, Complex64)> {
    let m = k.level;
    if n > m {
        return Err(Error::IndexOutOfRange { k: n, level: m });
    }
    let eye = CMat::identity(m, m);
    let a = &eye - &k.entries;
    let lu = LuFactor::new(&a);
    let det_a = lu.det();
    if det_a.rcond_estimate < RCOND_FLOOR {
        return Err(Error::NearSingular { rcond: det_a.rcond_estimate });
    }
    let lhs = if n == 0 {
        Complex64::ONE
    } else {
        let inv = lu.inverse()?;
        det_lu(&inv.view((0, 0), (n, n)).into_owned()).value
    };
    let projected = apply_q(k, n, Side::Both)?;
    let rhs = det_lu(&(&eye - &projected.entries)).value / det_a.value;
    Ok((lhs, rhs))
}

/// Evaluates the two sides of the commutator-trace determinant identity on
/// finite sections: the determinant of the upper-left `level/2` corner of
/// `e^A e^B e^{-A} e^{-B}` against `exp` of the fused trace
/// `sum_{j <= level/2} sum_{l <= level} (A_{jl} B_{lj} - B_{jl} A_{lj})`.
///
/// Returns `(corner_det, exp_trace)`. Sections must share a level of at
/// least 2; the corner dimension is `level / 2`.
pub fn phh_check(a: &FiniteSection, b: &FiniteSection) -> Result<(Complex64, Complex64)> {
    if a.level != b.level {
        return Err(Error::BadSpec(format!(
            "section levels differ: {} vs {}",
            a.level, b.level
        )));
    }
    if a.level < 2 {
        return Err(Error::BadSpec("need level >= 2 for a nontrivial corner".into()));
    }
    let l = a.level;
    let half = l / 2;

    let ea = expm(&a.entries);
    let eb = expm(&b.entries);
    let ea_inv = expm(&(-&a.entries));
    let eb_inv = expm(&(-&b.entries));
    let product = &ea * &eb * &ea_inv * &eb_inv;
    let corner = det_lu(&product.view((0, 0), (half, half)).into_owned()).value;

    let mut trace = Complex64::ZERO;
    for j in 0..half {
        for k in 0..l {
            trace += a.entries[(j, k)] * b.entries[(k, j)]
                - b.entries[(j, k)] * a.entries[(k, j)];
        }
    }
    Ok((corner, trace.exp()))
}

/// Dense matrix exponential by scaling and squaring with a Taylor kernel.
///
/// Accurate to near machine precision for the moderate-norm sections used
/// here; the scaled series is truncated once terms fall below `1e-16`
/// relative to the running sum.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = max_modulus(a) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);

    let mut sum = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..100 {
        term = (&term * &scaled) / Complex64::new(k as f64, 0.0);
        let t_norm = max_modulus(&term);
        sum += &term;
        if t_norm < 1e-16 * max_modulus(&sum) {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
