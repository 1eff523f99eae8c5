//! Toeplitz determinants and their operator-theoretic evaluations.
//!
//! For a symbol `a(t) = sum_k a_k t^k` on the unit circle, the crate computes
//! the determinants `D_n(a) = det (a_{j-k})_{j,k=1..n}` both directly and
//! through the identities that explain their asymptotics:
//!
//! * the Borodin-Okounkov formula
//!   `D_n(a) = G(a)^n det(I - Q_n K Q_n) / det(I - K)` with
//!   `K = H(b) H(c~)` built from the Wiener-Hopf quotients `b`, `c` of `a`;
//! * the strong Szego limit theorem, with the constant `E(a)` evaluated four
//!   independent ways;
//! * exact and asymptotic corrections for symbols with nonzero winding
//!   number, expressed through `kappa x kappa` determinants of resolvent
//!   compressions, a Jacobi minor identity, and a doubly infinite lattice
//!   determinant.
//!
//! Everything is dense linear algebra over `Complex64`: symbols have finite
//! stored support, Hankel products are evaluated with inner dimensions chosen
//! from coefficient tails, and every identity is checked at two section sizes
//! before it is trusted.

pub mod det;
pub mod error;
pub mod preset;
pub mod sections;
pub mod symbol;
pub mod szego;
pub mod wiener_hopf;
pub mod winding;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use preset::{preset, PresetParams};
pub use sections::{FiniteSection, TruncationPolicy};
pub use symbol::{coefficients_from_samples, multiply, Symbol};
pub use wiener_hopf::{factorize, Factorization};
