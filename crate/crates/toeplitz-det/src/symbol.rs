//! Finitely supported symbols on the unit circle.
//!
//! A [`Symbol`] is a Laurent polynomial `x(t) = sum_k x_k t^k` identified with
//! its coefficient sequence `{x_k}`. All analytic operations (multiplication,
//! winding numbers, logarithms, exponentials, reciprocals) go through uniform
//! sampling at the `M`-th roots of unity `t_j = exp(2 pi i j / M)` and exact
//! trigonometric interpolation back to coefficients, so a power-of-two grid
//! that dominates the support width makes the round trip exact up to rounding.
//!
//! Coefficients with modulus below a trim tolerance are dropped eagerly, so a
//! symbol's stored support is always finite and canonical. Operations whose
//! result is not band-limited (logarithms, exponentials, reciprocals) enlarge
//! the grid adaptively until the recovered coefficients decay cleanly inside
//! the representable band.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Coefficients with modulus below this are dropped from symbols.
pub const DEFAULT_TRIM_TOL: f64 = 1e-15;

/// Samples with modulus below this count as zeros of the symbol.
pub const ZERO_TOL: f64 = 1e-12;

/// Hard cap on adaptive sampling grids.
const MAX_GRID: usize = 1 << 18;

/// Relative threshold for "the coefficient band decays cleanly at the edge".
const EDGE_REL_TOL: f64 = 1e-13;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// A finitely supported two-sided coefficient sequence `{x_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    coeffs: BTreeMap<i64, Complex64>,
    trim_tol: f64,
}

impl Symbol {
    /// Builds a symbol from `(index, coefficient)` pairs, summing duplicates
    /// and trimming entries below [`DEFAULT_TRIM_TOL`].
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        Self::from_pairs_with_tol(pairs, DEFAULT_TRIM_TOL)
    }

    /// Same as [`Symbol::from_pairs`] with an explicit trim tolerance.
    pub fn from_pairs_with_tol<I>(pairs: I, trim_tol: f64) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (k, z) in pairs {
            *coeffs.entry(k).or_insert(Complex64::ZERO) += z;
        }
        coeffs.retain(|_, z| z.norm() >= trim_tol);
        Symbol { coeffs, trim_tol }
    }

    /// The zero symbol.
    pub fn zero() -> Self {
        Symbol { coeffs: BTreeMap::new(), trim_tol: DEFAULT_TRIM_TOL }
    }

    /// The constant symbol `z`.
    pub fn constant(z: Complex64) -> Self {
        Self::from_pairs([(0, z)])
    }

    /// The monomial `t^k`.
    pub fn monomial(k: i64) -> Self {
        Self::from_pairs([(k, Complex64::ONE)])
    }

    /// Coefficient `x_k` (zero when outside the stored support).
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or(Complex64::ZERO)
    }

    /// Lower support bound, clamped so that `k_min <= 0`.
    pub fn k_min(&self) -> i64 {
        self.coeffs.keys().next().copied().unwrap_or(0).min(0)
    }

    /// Upper support bound, clamped so that `k_max >= 0`.
    pub fn k_max(&self) -> i64 {
        self.coeffs.keys().next_back().copied().unwrap_or(0).max(0)
    }

    /// Support width `k_max - k_min`.
    pub fn width(&self) -> usize {
        (self.k_max() - self.k_min()) as usize
    }

    /// Number of stored (nonzero) coefficients.
    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    /// True when no coefficient survived trimming.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Trim tolerance this symbol was canonicalized with.
    pub fn trim_tol(&self) -> f64 {
        self.trim_tol
    }

    /// Iterates over stored `(index, coefficient)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &z)| (k, z))
    }

    /// `sum_k |x_k|`, an upper bound for `sup |x|` on the circle.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|z| z.norm()).sum()
    }

    /// Largest stored coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Multiplies by the monomial `t^p` (shifts every index by `p`).
    pub fn shift(&self, p: i64) -> Symbol {
        Symbol {
            coeffs: self.coeffs.iter().map(|(&k, &z)| (k + p, z)).collect(),
            trim_tol: self.trim_tol,
        }
    }

    /// Scales every coefficient by `z`.
    pub fn scale(&self, z: Complex64) -> Symbol {
        Symbol::from_pairs_with_tol(
            self.coeffs.iter().map(|(&k, &c)| (k, c * z)),
            self.trim_tol,
        )
    }

    /// The reflected symbol `x~(t) = x(1/t)`, i.e. index map `k -> -k`.
    pub fn reflect(&self) -> Symbol {
        Symbol {
            coeffs: self.coeffs.iter().map(|(&k, &z)| (-k, z)).collect(),
            trim_tol: self.trim_tol,
        }
    }

    /// Values `x(t_j)` at the `M`-th roots of unity, `j = 0..M`.
    ///
    /// Exact (up to rounding) whenever `M` exceeds the support width; smaller
    /// grids fold coefficients modulo `M` as usual.
    pub fn sample(&self, m: usize) -> Vec<Complex64> {
        assert!(m >= 1, "sampling grid must be nonempty");
        let mut buf = vec![Complex64::ZERO; m];
        for (&k, &z) in &self.coeffs {
            let slot = (k.rem_euclid(m as i64)) as usize;
            buf[slot] += z;
        }
        fft_in_place(&mut buf, true);
        buf
    }

    /// Default power-of-two sampling grid for this symbol:
    /// the smallest power of two `>= 8 * (width + 1)`, at least 64.
    pub fn default_grid(&self) -> usize {
        default_grid(self.width())
    }

    /// Winding number of the symbol around the origin.
    ///
    /// Samples at `M` points, accumulates phase increments, and requires every
    /// single-step increment to stay below `pi/2`. `M` must be a power of two
    /// exceeding eight times the support width.
    pub fn winding_number(&self, m: usize) -> Result<i64> {
        validate_grid(m)?;
        if m <= 8 * self.width() {
            return Err(Error::GridTooCoarse { step: PI });
        }
        let samples = self.sample(m);
        let (_, total) = unwrap_phases(&samples)?;
        let w = (total / (2.0 * PI)).round();
        if (total / (2.0 * PI) - w).abs() > 0.25 {
            return Err(Error::GridTooCoarse { step: total / m as f64 });
        }
        Ok(w as i64)
    }

    /// Coefficients of `log x`, for symbols with winding number zero.
    ///
    /// The branch is fixed by unwrapping the phase along the circle; the
    /// imaginary part of `(log x)_0` lies in `(-pi, pi]`. The grid starts at
    /// `m` and doubles until the recovered coefficients decay below
    /// `1e-13 * max` inside the band, so the caller's `m` is a floor, not a
    /// promise.
    pub fn log(&self, m: usize) -> Result<Symbol> {
        validate_grid(m)?;
        if m <= 8 * self.width() {
            return Err(Error::GridTooCoarse { step: PI });
        }
        recover_adaptive(m, self.trim_tol, |grid| {
            let samples = self.sample(grid);
            let (phases, total) = unwrap_phases(&samples)?;
            let w = (total / (2.0 * PI)).round() as i64;
            if w != 0 {
                return Err(Error::NonzeroWinding { winding: w });
            }
            if total.abs() > 1e-8 {
                return Err(Error::PhaseClosure { gap: total.abs() });
            }
            Ok(samples
                .iter()
                .zip(phases)
                .map(|(z, theta)| Complex64::new(z.norm().ln(), theta))
                .collect())
        })
    }

    /// Convenience wrapper: [`Symbol::log`] on the default grid.
    pub fn log_default(&self) -> Result<Symbol> {
        self.log(self.default_grid())
    }
}

impl std::ops::Mul for &Symbol {
    type Output = Symbol;

    fn mul(self, rhs: &Symbol) -> Symbol {
        multiply(self, rhs)
    }
}

/// Laurent product `x * y` by direct convolution of the stored coefficients.
///
/// Exact for finitely supported inputs; cost is `O(nnz(x) * nnz(y))`.
pub fn multiply(x: &Symbol, y: &Symbol) -> Symbol {
    let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
    for (kx, zx) in x.iter() {
        for (ky, zy) in y.iter() {
            *acc.entry(kx + ky).or_insert(Complex64::ZERO) += zx * zy;
        }
    }
    Symbol::from_pairs_with_tol(acc, x.trim_tol().max(y.trim_tol()))
}

/// Pointwise sum `x + y`.
pub fn add(x: &Symbol, y: &Symbol) -> Symbol {
    Symbol::from_pairs_with_tol(
        x.iter().chain(y.iter()),
        x.trim_tol().max(y.trim_tol()),
    )
}

/// Recovers a symbol from `M` equispaced samples `values[j] = x(t_j)`.
///
/// Returns coefficients indexed in `(-M/2, M/2]`; `M` must be a power of two,
/// at least 2.
pub fn coefficients_from_samples(values: &[Complex64]) -> Result<Symbol> {
    let m = values.len();
    validate_grid(m)?;
    let mut buf = values.to_vec();
    fft_in_place(&mut buf, false);
    let half = (m / 2) as i64;
    let scale = 1.0 / m as f64;
    Ok(Symbol::from_pairs(buf.iter().enumerate().map(|(bin, z)| {
        let k = if bin as i64 <= half { bin as i64 } else { bin as i64 - m as i64 };
        (k, z * scale)
    })))
}

/// `exp x` computed by sampling and exponentiating, with adaptive grids.
pub fn exp_symbol(x: &Symbol, m: usize) -> Result<Symbol> {
    validate_grid(m)?;
    recover_adaptive(m, x.trim_tol(), |grid| {
        Ok(x.sample(grid).into_iter().map(Complex64::exp).collect())
    })
}

/// `1 / x` computed by sampling, for symbols with no zeros on the circle.
pub fn reciprocal(x: &Symbol, m: usize) -> Result<Symbol> {
    validate_grid(m)?;
    recover_adaptive(m, x.trim_tol(), |grid| {
        x.sample(grid)
            .into_iter()
            .enumerate()
            .map(|(index, z)| {
                let modulus = z.norm();
                if modulus < ZERO_TOL {
                    Err(Error::ZeroOnCircle { index, modulus })
                } else {
                    Ok(z.inv())
                }
            })
            .collect()
    })
}

/// Smallest power of two `>= 8 * (width + 1)`, at least 64.
pub fn default_grid(width: usize) -> usize {
    let target = 8 * (width + 1);
    let mut m = 64;
    while m < target {
        m *= 2;
    }
    m
}

fn validate_grid(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        Err(Error::InvalidGrid { m })
    } else {
        Ok(())
    }
}

/// Unwrapped phases along the sampled circle plus the total increment over a
/// full loop (closure step included). Errors on near-zeros and on any single
/// step exceeding `pi/2`.
fn unwrap_phases(samples: &[Complex64]) -> Result<(Vec<f64>, f64)> {
    let m = samples.len();
    for (index, z) in samples.iter().enumerate() {
        let modulus = z.norm();
        if modulus < ZERO_TOL {
            return Err(Error::ZeroOnCircle { index, modulus });
        }
    }
    let mut phases = Vec::with_capacity(m);
    let mut theta = samples[0].arg();
    phases.push(theta);
    let mut total = 0.0;
    for j in 1..=m {
        let step = (samples[j % m] / samples[j - 1]).arg();
        if step.abs() > PI / 2.0 {
            return Err(Error::GridTooCoarse { step: step.abs() });
        }
        total += step;
        if j < m {
            theta += step;
            phases.push(theta);
        }
    }
    Ok((phases, total))
}

/// Runs `make_samples` on grids `m, 2m, 4m, ...` until the recovered
/// coefficients decay cleanly at the edge of the representable band
/// `(-M/2, M/2]`, then returns the recovery.
fn recover_adaptive<F>(m0: usize, trim_tol: f64, make_samples: F) -> Result<Symbol>
where
    F: Fn(usize) -> Result<Vec<Complex64>>,
{
    let mut m = m0;
    let mut prev_edge = f64::INFINITY;
    loop {
        let samples = make_samples(m)?;
        let sym = {
            let mut s = coefficients_from_samples(&samples)?;
            s.trim_tol = trim_tol;
            s.coeffs.retain(|_, z| z.norm() >= trim_tol);
            s
        };
        let edge = (3 * m / 8) as i64;
        let edge_max = sym
            .iter()
            .filter(|(k, _)| k.abs() > edge)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        let threshold = (EDGE_REL_TOL * sym.max_coeff()).max(10.0 * trim_tol);
        if edge_max <= threshold {
            return Ok(sym);
        }
        // Aliasing shrinks when the grid is refined; rounding noise does
        // not. Once a doubling fails to cut the edge mass by 3x, the edge
        // sits at the attainable floor for these samples (set by the
        // dynamic range of the sampled values), so further refinement is
        // pointless and the recovery is as converged as it will get.
        if edge_max > prev_edge / 3.0 {
            return Ok(sym);
        }
        if m >= MAX_GRID {
            return Err(Error::GridTooCoarse { step: 2.0 * PI / m as f64 });
        }
        prev_edge = edge_max;
        m *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// First-order symbol (1 - r t)(1 - s/t) used throughout the suite.
    fn first_order(r: f64, s: f64) -> Symbol {
        multiply(
            &Symbol::from_pairs([(0, c(1.0, 0.0)), (1, c(-r, 0.0))]),
            &Symbol::from_pairs([(0, c(1.0, 0.0)), (-1, c(-s, 0.0))]),
        )
    }

    /// Independent evaluation of `x` at the `M`-th roots of unity by direct
    /// summation (no FFT).
    fn eval_naive(x: &Symbol, m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|j| {
                let t = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
                x.iter().map(|(k, z)| z * t.powi(k as i32)).sum()
            })
            .collect()
    }

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!(
            (a - b).norm() <= tol,
            "expected {b} within {tol:.1e}, got {a} (gap {:.3e})",
            (a - b).norm()
        );
    }

    #[test]
    fn multiply_matches_hand_expansion() {
        // (1 - 0.5 t)(1 - 0.3/t) = -0.3 t^{-1} + 1.15 - 0.5 t
        let a = first_order(0.5, 0.3);
        assert_eq!(a.nnz(), 3);
        assert_close(a.coeff(-1), c(-0.3, 0.0), 1e-15);
        assert_close(a.coeff(0), c(1.15, 0.0), 1e-15);
        assert_close(a.coeff(1), c(-0.5, 0.0), 1e-15);
        assert_eq!((a.k_min(), a.k_max()), (-1, 1));
    }

    #[test]
    fn multiply_by_zero_is_zero() {
        let a = first_order(0.5, 0.3);
        assert!(multiply(&a, &Symbol::zero()).is_zero());
    }

    #[test]
    fn support_bounds_clamp_to_zero() {
        let x = Symbol::monomial(3);
        assert_eq!((x.k_min(), x.k_max()), (0, 3));
        let y = Symbol::monomial(-2);
        assert_eq!((y.k_min(), y.k_max()), (-2, 0));
    }

    #[test]
    fn sample_matches_naive_evaluation() {
        let a = first_order(0.5, 0.3);
        let fast = a.sample(16);
        let slow = eval_naive(&a, 16);
        for (u, v) in fast.iter().zip(&slow) {
            assert_close(*u, *v, 1e-13);
        }
    }

    #[test]
    fn recovery_from_naive_samples_round_trips() {
        // Oracle: samples produced by direct summation, recovery must return
        // the original coefficients up to rounding.
        let a = first_order(0.5, 0.3);
        let rec = coefficients_from_samples(&eval_naive(&a, 64)).unwrap();
        assert_eq!(rec.nnz(), 3);
        for k in [-1, 0, 1] {
            assert_close(rec.coeff(k), a.coeff(k), 1e-13);
        }
    }

    #[test]
    fn recovery_rejects_bad_grids() {
        let v = vec![Complex64::ONE; 3];
        assert!(matches!(
            coefficients_from_samples(&v),
            Err(Error::InvalidGrid { m: 3 })
        ));
        let v = vec![Complex64::ONE; 1];
        assert!(matches!(
            coefficients_from_samples(&v),
            Err(Error::InvalidGrid { m: 1 })
        ));
    }

    #[test]
    fn recovery_index_convention_covers_half_open_band() {
        // M = 8 can represent indices -3..=4; t^4 must come back at +4.
        let x = Symbol::monomial(4);
        let rec = coefficients_from_samples(&x.sample(8)).unwrap();
        assert_close(rec.coeff(4), Complex64::ONE, 1e-13);
        assert_eq!(rec.nnz(), 1);
    }

    #[test]
    fn reflect_is_an_involution_and_flips_indices() {
        let a = first_order(0.5, 0.3);
        let r = a.reflect();
        assert_close(r.coeff(1), c(-0.3, 0.0), 1e-15);
        assert_close(r.coeff(-1), c(-0.5, 0.0), 1e-15);
        assert_eq!(r.reflect(), a);
        assert_eq!(Symbol::monomial(3).reflect(), Symbol::monomial(-3));
    }

    #[test]
    fn winding_of_zero_free_first_order_symbol_is_zero() {
        let a = first_order(0.5, 0.3);
        assert_eq!(a.winding_number(64).unwrap(), 0);
    }

    #[test]
    fn winding_counts_monomial_twists() {
        let a = first_order(0.5, 0.3);
        assert_eq!(a.shift(-2).winding_number(64).unwrap(), -2);
        assert_eq!(Symbol::monomial(3).winding_number(64).unwrap(), 3);
        assert_eq!(Symbol::constant(c(2.0, 0.0)).winding_number(64).unwrap(), 0);
    }

    #[test]
    fn winding_rejects_vanishing_symbols() {
        // 1 - t vanishes at t = 1.
        let x = Symbol::from_pairs([(0, Complex64::ONE), (1, -Complex64::ONE)]);
        assert!(matches!(
            x.winding_number(64),
            Err(Error::ZeroOnCircle { .. })
        ));
        assert!(matches!(
            Symbol::zero().winding_number(64),
            Err(Error::ZeroOnCircle { .. })
        ));
    }

    #[test]
    fn winding_enforces_grid_margin() {
        let a = first_order(0.5, 0.3); // width 2, needs M > 16
        assert!(matches!(
            a.winding_number(16),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(matches!(a.winding_number(24), Err(Error::InvalidGrid { m: 24 })));
    }

    #[test]
    fn log_matches_mercator_series() {
        // log(1 - r t) = -sum r^k t^k / k and log(1 - s/t) likewise.
        let (r, s) = (0.5, 0.3);
        let l = first_order(r, s).log(64).unwrap();
        for k in 1..=6i64 {
            let rk = r.powi(k as i32) / k as f64;
            let sk = s.powi(k as i32) / k as f64;
            assert_close(l.coeff(k), c(-rk, 0.0), 1e-12);
            assert_close(l.coeff(-k), c(-sk, 0.0), 1e-12);
        }
        assert_close(l.coeff(0), Complex64::ZERO, 1e-12);
    }

    #[test]
    fn log_of_constant_is_its_scalar_log() {
        let l = Symbol::constant(c(2.0, 0.0)).log(64).unwrap();
        assert_eq!(l.nnz(), 1);
        assert_close(l.coeff(0), c(2.0f64.ln(), 0.0), 1e-14);
    }

    #[test]
    fn log_requires_winding_zero() {
        let x = first_order(0.5, 0.3).shift(1);
        assert!(matches!(x.log(64), Err(Error::NonzeroWinding { winding: 1 })));
    }

    #[test]
    fn exp_of_log_reproduces_the_symbol() {
        let a = first_order(0.5, 0.3);
        let back = exp_symbol(&a.log(64).unwrap(), 64).unwrap();
        for k in -1..=1 {
            assert_close(back.coeff(k), a.coeff(k), 1e-12);
        }
        // On the grid as well.
        let m = 64;
        for (u, v) in back.sample(m).iter().zip(a.sample(m)) {
            assert!((u - v).norm() <= 1e-10 * v.norm().max(1.0));
        }
    }

    #[test]
    fn exp_matches_power_series() {
        // exp(0.4 t): coefficients 0.4^k / k!.
        let x = Symbol::from_pairs([(1, c(0.4, 0.0))]);
        let e = exp_symbol(&x, 64).unwrap();
        let mut factorial = 1.0;
        for k in 0..=8i64 {
            if k > 0 {
                factorial *= k as f64;
            }
            assert_close(e.coeff(k), c(0.4f64.powi(k as i32) / factorial, 0.0), 1e-13);
        }
        assert!(e.coeff(-1).norm() < 1e-13);
    }

    #[test]
    fn reciprocal_of_one_minus_rt_is_geometric() {
        let x = Symbol::from_pairs([(0, Complex64::ONE), (1, c(-0.5, 0.0))]);
        let inv = reciprocal(&x, 64).unwrap();
        for k in 0..10i64 {
            assert_close(inv.coeff(k), c(0.5f64.powi(k as i32), 0.0), 1e-12);
        }
        assert!(multiply(&x, &inv).coeff(0).re - 1.0 < 1e-12);
    }

    #[test]
    fn reciprocal_rejects_zeros_on_circle() {
        let x = Symbol::from_pairs([(0, Complex64::ONE), (1, -Complex64::ONE)]);
        assert!(matches!(reciprocal(&x, 64), Err(Error::ZeroOnCircle { .. })));
    }

    #[test]
    fn adaptive_grid_widens_until_tails_fit() {
        // 1/(1 - 0.9 t) has coefficients 0.9^k, which need k ~ 300 to reach
        // the trim tolerance; a 64-point request must silently widen.
        let x = Symbol::from_pairs([(0, Complex64::ONE), (1, c(-0.9, 0.0))]);
        let inv = reciprocal(&x, 64).unwrap();
        assert_close(inv.coeff(120), c(0.9f64.powi(120), 0.0), 1e-14);
    }

    #[test]
    fn default_grid_scales_with_width() {
        assert_eq!(default_grid(0), 64);
        assert_eq!(default_grid(2), 64);
        assert_eq!(default_grid(100), 1024);
        assert_eq!(default_grid(512), 8192);
    }

    #[test]
    fn shift_and_scale_compose() {
        let a = first_order(0.5, 0.3);
        let y = a.shift(2).scale(c(0.0, 1.0));
        assert_close(y.coeff(1), c(0.0, -0.3), 1e-15);
        assert_close(y.coeff(3), c(0.0, -0.5), 1e-15);
    }
}
