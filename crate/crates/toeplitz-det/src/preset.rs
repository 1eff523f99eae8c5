//! Named symbol families used by tests, sweeps, and the CLI.
//!
//! Each preset builds a concrete [`Symbol`]:
//!
//! * `geom(r, s)`: the first-order symbol `(1 - r t)(1 - s/t)`, `|r|, |s| < 1`.
//!   Everything about it is available in closed form, which makes it the
//!   workhorse oracle of the test suite.
//! * `exp2(alpha, beta_coef)`: `exp(alpha t + beta_coef t^{-1})`, an entire
//!   symbol with factorially decaying coefficients.
//! * `cbeta(beta_smooth, seed, amplitude)`: `exp(g)` with
//!   `g_k = amplitude * (1+|k|)^{-(beta_smooth+1)} * exp(i theta_k)` and
//!   deterministic pseudo-random phases `theta_k`. The polynomial coefficient
//!   decay emulates a symbol of finite smoothness; the sequence is truncated
//!   at `|k| = 256`, far beyond every index range the sweeps fit rates on.
//!   No conjugate symmetry is imposed, so the symbol is genuinely
//!   complex-valued on the circle.
//! * `monomial(power)`: `t^power`, the minimal symbol with nonzero winding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{exp_symbol, multiply, Symbol};

/// Support cutoff for the `cbeta` coefficient sequence.
pub const CBETA_SUPPORT: i64 = 256;

/// Parameters selecting one of the built-in symbol families.
///
/// The serde representation is `{"name": "...", "params": {...}}` with
/// complex numbers written as `[re, im]` (a bare number is accepted on input).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "lowercase")]
pub enum PresetParams {
    Geom {
        #[serde(with = "complex_pair")]
        r: Complex64,
        #[serde(with = "complex_pair")]
        s: Complex64,
    },
    Exp2 {
        #[serde(with = "complex_pair")]
        alpha: Complex64,
        #[serde(with = "complex_pair")]
        beta_coef: Complex64,
    },
    Cbeta {
        beta_smooth: f64,
        seed: u64,
        amplitude: f64,
    },
    Monomial {
        power: i64,
    },
}

impl PresetParams {
    /// Short family name, as used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            PresetParams::Geom { .. } => "geom",
            PresetParams::Exp2 { .. } => "exp2",
            PresetParams::Cbeta { .. } => "cbeta",
            PresetParams::Monomial { .. } => "monomial",
        }
    }

    /// Convenience constructor for real `geom` parameters.
    pub fn geom(r: f64, s: f64) -> Self {
        PresetParams::Geom { r: Complex64::new(r, 0.0), s: Complex64::new(s, 0.0) }
    }

    /// Convenience constructor for real `exp2` parameters.
    pub fn exp2(alpha: f64, beta_coef: f64) -> Self {
        PresetParams::Exp2 {
            alpha: Complex64::new(alpha, 0.0),
            beta_coef: Complex64::new(beta_coef, 0.0),
        }
    }

    /// Convenience constructor for `cbeta` parameters.
    pub fn cbeta(beta_smooth: f64, seed: u64, amplitude: f64) -> Self {
        PresetParams::Cbeta { beta_smooth, seed, amplitude }
    }
}

/// Builds the symbol selected by `params`.
pub fn preset(params: &PresetParams) -> Result<Symbol> {
    match *params {
        PresetParams::Geom { r, s } => {
            if r.norm() >= 1.0 || s.norm() >= 1.0 {
                return Err(Error::InvalidParams(format!(
                    "geom requires |r| < 1 and |s| < 1, got |r| = {}, |s| = {}",
                    r.norm(),
                    s.norm()
                )));
            }
            let one = Complex64::ONE;
            Ok(multiply(
                &Symbol::from_pairs([(0, one), (1, -r)]),
                &Symbol::from_pairs([(0, one), (-1, -s)]),
            ))
        }
        PresetParams::Exp2 { alpha, beta_coef } => {
            // exp(alpha t) * exp(beta_coef / t), each factor by power series.
            Ok(multiply(
                &exp_series(alpha, 1),
                &exp_series(beta_coef, -1),
            ))
        }
        PresetParams::Cbeta { beta_smooth, seed, amplitude } => {
            if beta_smooth <= 0.0 || beta_smooth.fract() == 0.0 {
                return Err(Error::InvalidParams(format!(
                    "cbeta requires a positive non-integer smoothness, got {beta_smooth}"
                )));
            }
            if !amplitude.is_finite() {
                return Err(Error::InvalidParams("cbeta amplitude must be finite".into()));
            }
            let mut rng = SplitMix64::new(seed);
            let mut g = Vec::with_capacity((2 * CBETA_SUPPORT + 1) as usize);
            for k in -CBETA_SUPPORT..=CBETA_SUPPORT {
                let theta = rng.next_angle();
                let magnitude =
                    amplitude * (1.0 + k.abs() as f64).powf(-(beta_smooth + 1.0));
                g.push((k, Complex64::from_polar(magnitude, theta)));
            }
            let g = Symbol::from_pairs(g);
            exp_symbol(&g, g.default_grid())
        }
        PresetParams::Monomial { power } => Ok(Symbol::monomial(power)),
    }
}

/// `exp(z t^step)` as a power series truncated at the trim tolerance.
fn exp_series(z: Complex64, step: i64) -> Symbol {
    let mut pairs = Vec::new();
    let mut term = Complex64::ONE;
    let mut k = 0i64;
    while term.norm() >= crate::symbol::DEFAULT_TRIM_TOL / 10.0 && k < 200 {
        pairs.push((k * step, term));
        k += 1;
        term *= z / Complex64::new(k as f64, 0.0);
    }
    Symbol::from_pairs(pairs)
}

/// SplitMix64: tiny deterministic generator for preset phases.
///
/// The stream depends only on the seed, never on platform or build, which is
/// what pins down the `cbeta` symbols byte for byte.
#[derive(Debug, Clone)]
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform angle in `[0, 2 pi)`.
    fn next_angle(&mut self) -> f64 {
        let u = self.next_u64() as f64 / (u64::MAX as f64 + 1.0);
        2.0 * std::f64::consts::PI * u
    }
}


mod complex_pair {
    //! Serialize complex scalars as `[re, im]`; accept a bare number too.

    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut tup = ser.serialize_tuple(2)?;
        tup.serialize_element(&z.re)?;
        tup.serialize_element(&z.im)?;
        tup.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Complex64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        match Repr::deserialize(de)? {
            Repr::Real(re) => Ok(Complex64::new(re, 0.0)),
            Repr::Pair([re, im]) => {
                if !re.is_finite() || !im.is_finite() {
                    return Err(D::Error::custom("complex components must be finite"));
                }
                Ok(Complex64::new(re, im))
            }
        }
    }
}
