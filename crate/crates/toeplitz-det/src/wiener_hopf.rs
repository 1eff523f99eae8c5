//! Wiener-Hopf factorization of zero-winding symbols.
//!
//! For `a` with no zeros on the circle and winding number zero,
//!
//! ```text
//! a = a_minus * a_plus,
//! a_minus = mu^{-1} exp( sum_{k>=1} (log a)_{-k} t^{-k} ),
//! a_plus  = mu     exp( sum_{k>=0} (log a)_k t^k ),
//! ```
//!
//! so `a_minus` is analytic outside the circle with `a_minus(inf) = mu^{-1}`,
//! and `a_plus` is analytic inside. The scalar `mu != 0` is a normalization
//! knob: changing it moves a constant between the factors without changing
//! the product. The derived quotients
//!
//! ```text
//! b = a_minus / a_plus = mu^{-2} b(1),    c = a_plus / a_minus = mu^2 c(1),
//! ```
//!
//! satisfy `b c = 1` identically and feed every Hankel product downstream.
//! `G(a) = exp((log a)_0)` is the geometric mean, independent of `mu`.
//!
//! Exponentials of one-sided log series are computed by sampling and
//! exponentiating on an adaptively sized grid, then re-extracting
//! coefficients; the factors are then projected back onto their half-line
//! supports (the discarded dribble sits at rounding level).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::{exp_symbol, Symbol};

/// The factorization `a = a_minus * a_plus` plus derived data.
#[derive(Debug, Clone)]
pub struct Factorization {
    /// Coefficients of `log a` on the sampling grid's band.
    pub log_coeffs: Symbol,
    /// Outer factor, support in `k <= 0`, value `mu^{-1}` at infinity.
    pub a_minus: Symbol,
    /// Inner factor, support in `k >= 0`, `a_plus(0) = mu * G(a)`.
    pub a_plus: Symbol,
    /// Geometric mean `G(a) = exp((log a)_0)`.
    pub g_mean: Complex64,
    /// Quotient `a_minus / a_plus`.
    pub b: Symbol,
    /// Quotient `a_plus / a_minus`; satisfies `b * c = 1`.
    pub c: Symbol,
    /// Normalization used for this factorization.
    pub mu: Complex64,
}

impl Factorization {
    /// Largest stored index of `b` (the positive tail that Hankel sections
    /// of `H(b)` actually read).
    pub fn b_bandwidth(&self) -> usize {
        self.b.k_max().max(0) as usize
    }

    /// Largest stored index of `c` on the negative side.
    pub fn c_bandwidth(&self) -> usize {
        (-self.c.k_min()).max(0) as usize
    }
}

/// Computes the Wiener-Hopf data of `a` with normalization `mu`.
///
/// Fails with [`Error::NonzeroWinding`] when `a` winds around the origin and
/// with [`Error::ZeroOnCircle`] when it vanishes on the circle.
pub fn factorize(a: &Symbol, mu: Complex64) -> Result<Factorization> {
    if mu.norm() == 0.0 || !mu.is_finite() {
        return Err(Error::InvalidParams("mu must be nonzero and finite".into()));
    }
    let grid = a.default_grid();
    let log_coeffs = a.log(grid)?;
    let g_mean = log_coeffs.coeff(0).exp();

    let l_minus = Symbol::from_pairs_with_tol(
        log_coeffs.iter().filter(|&(k, _)| k < 0),
        log_coeffs.trim_tol(),
    );
    let l_plus = Symbol::from_pairs_with_tol(
        log_coeffs.iter().filter(|&(k, _)| k >= 0),
        log_coeffs.trim_tol(),
    );

    let a_minus = restrict(exp_symbol(&l_minus, grid)?, |k| k <= 0).scale(mu.inv());
    let a_plus = restrict(exp_symbol(&l_plus, grid)?, |k| k >= 0).scale(mu);

    // log b = l_minus - l_plus; sampling once keeps b and c exact reciprocals.
    let log_b = crate::symbol::add(&l_minus, &l_plus.scale(-Complex64::ONE));
    let mu2 = mu * mu;
    let b = exp_symbol(&log_b, grid)?.scale(mu2.inv());
    let c = exp_symbol(&log_b.scale(-Complex64::ONE), grid)?.scale(mu2);

    Ok(Factorization { log_coeffs, a_minus, a_plus, g_mean, b, c, mu })
}

/// The quotient pair `(b, c)` of a factorization.
pub fn bc_coefficients(f: &Factorization) -> (Symbol, Symbol) {
    (f.b.clone(), f.c.clone())
}

/// Geometric mean `G(x) = exp((log x)_0)` of a zero-winding symbol.
pub fn g_mean_of(x: &Symbol) -> Result<Complex64> {
    Ok(x.log_default()?.coeff(0).exp())
}

fn restrict(x: Symbol, keep: impl Fn(i64) -> bool) -> Symbol {
    Symbol::from_pairs_with_tol(x.iter().filter(|&(k, _)| keep(k)), x.trim_tol())
}
