//! Sweep driver and rate analysis for Toeplitz determinant identities.
//!
//! A [`SweepConfig`] names a preset symbol together with lists of section
//! sizes `n`, winding offsets `kappa`, and factorization normalizations
//! `mu`. [`run_sweep`] evaluates every determinant identity the library
//! exposes at each grid point and emits one [`ConvergenceRecord`] per
//! quantity: the computed value, the reference it must match (or converge
//! to), and the gap between them. Records serialize to a fixed CSV schema
//! with [`render_csv`], feed the least-squares rate classifier
//! [`fit_rate`], and roll up into a pass/fail [`report`].
//!
//! A failure at a single grid point (a violated hypothesis, a section the
//! doubling check refused to confirm) never aborts the sweep; it lands in
//! that row's `status` column, and hard errors flip the report to FAIL.
//! Given the same configuration, the sweep is deterministic down to the
//! output bytes regardless of how many worker threads evaluate it.

pub mod acceptance;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use toeplitz_det::szego::{dn_exact, e_four_ways, szego_sweep};
use toeplitz_det::wiener_hopf::g_mean_of;
use toeplitz_det::winding::{winding_sign, working_level, WindingContext};
use toeplitz_det::{preset, Complex64, Error, PresetParams, Symbol, TruncationPolicy};

/// Scale-aware tolerance for the identity gates in [`report`].
pub const GATE_TOL: f64 = 1e-7;

/// Largest `n + kappa` for which a sweep evaluates the lattice determinant;
/// beyond it the `y_det` row is emitted as `SKIPPED(window)`.
pub const Y_DET_BUDGET: usize = 32;

/// The frozen CSV header; [`render_csv`] must never drift from it.
pub const CSV_HEADER: &str = "preset,param_json,n,kappa,mu_re,mu_im,level,quantity,\
value_re,value_im,ref_re,ref_im,abs_err,rel_err,status";

fn default_mu_list() -> Vec<Complex64> {
    vec![Complex64::ONE]
}

/// `mu_list` entries are written as `[re, im]` pairs; bare numbers are
/// accepted on input as real values.
mod mu_list_serde {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use toeplitz_det::Complex64;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Re(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(|e| {
                let z = match e {
                    Entry::Re(re) => Complex64::new(re, 0.0),
                    Entry::Pair([re, im]) => Complex64::new(re, im),
                };
                if z.re.is_finite() && z.im.is_finite() {
                    Ok(z)
                } else {
                    Err(D::Error::custom("mu entries must be finite"))
                }
            })
            .collect()
    }
}

/// One experiment: a preset crossed with `(n, kappa, mu)` grids.
///
/// `kappa_list` may be empty, which restricts the sweep to the
/// winding-zero rows (`d_exact`, `bo_rhs`, `szego_rel_err`, `e_spread`).
/// Entries equal to zero are ignored for the same reason: the `kappa = 0`
/// story *is* the winding-zero story, and its rows are always emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Symbol family and parameters.
    pub preset: PresetParams,
    /// Section sizes, strictly increasing, all positive.
    pub n_list: Vec<usize>,
    /// Winding offsets applied as `t^{-kappa} a`.
    #[serde(default)]
    pub kappa_list: Vec<usize>,
    /// Factorization normalizations `a_-(inf) = 1/mu`, as `[re, im]` pairs.
    #[serde(default = "default_mu_list", with = "mu_list_serde")]
    pub mu_list: Vec<Complex64>,
    /// Truncation policy shared by every operator evaluation.
    #[serde(default)]
    pub level_policy: TruncationPolicy,
    /// Overrides the phase seed of a `cbeta` preset; the other families
    /// carry no random state and ignore it.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Where the CSV goes; `None` means stdout.
    #[serde(default)]
    pub out_path: Option<String>,
}

impl SweepConfig {
    /// A sweep over `n_list` with everything else defaulted.
    pub fn new(preset: PresetParams, n_list: Vec<usize>) -> Self {
        SweepConfig {
            preset,
            n_list,
            kappa_list: Vec::new(),
            mu_list: default_mu_list(),
            level_policy: TruncationPolicy::default(),
            seed: None,
            out_path: None,
        }
    }

    /// Parses and validates a JSON configuration.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: SweepConfig =
            serde_json::from_str(text).context("invalid sweep configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks that do not require building the symbol.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n_list.is_empty() {
            bail!("n_list must not be empty");
        }
        if self.n_list[0] == 0 {
            bail!("n_list entries must be positive");
        }
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            bail!("n_list must be strictly increasing");
        }
        if self.mu_list.is_empty() {
            bail!("mu_list must not be empty");
        }
        if let Some(mu) = self.mu_list.iter().find(|m| m.norm() < 1e-12) {
            bail!("mu must be nonzero, got {mu}");
        }
        if self.level_policy.target_level < 2 {
            bail!("level_policy.target_level must be at least 2");
        }
        if !self.level_policy.tail_tol.is_finite() || self.level_policy.tail_tol <= 0.0 {
            bail!("level_policy.tail_tol must be positive and finite");
        }
        Ok(())
    }

    /// The preset with the sweep's seed override applied.
    pub fn effective_preset(&self) -> PresetParams {
        match (&self.preset, self.seed) {
            (PresetParams::Cbeta { beta_smooth, amplitude, .. }, Some(seed)) => {
                PresetParams::Cbeta { beta_smooth: *beta_smooth, seed, amplitude: *amplitude }
            }
            (p, _) => p.clone(),
        }
    }

    /// A ready-to-edit example, printed by `tdet presets`.
    pub fn example() -> Self {
        SweepConfig {
            preset: PresetParams::geom(0.5, 0.3),
            n_list: vec![1, 2, 3, 4, 6, 8],
            kappa_list: vec![1, 2],
            mu_list: default_mu_list(),
            level_policy: TruncationPolicy::default(),
            seed: None,
            out_path: Some("sweep.csv".into()),
        }
    }
}

/// The quantities a sweep records, one CSV row each per grid point.
///
/// Winding-zero rows (`kappa = 0`, one set per `n`, always at `mu = 1`
/// because both sides are normalization-invariant):
///
/// * `d_exact` — `D_n(a)` against the determinant identity's right-hand
///   side at the working level;
/// * `bo_rhs` — the same pair with the roles swapped, so either column can
///   be read as the reference;
/// * `szego_rel_err` — `|D_n / (G^n E) - 1|` in `value_re`, with `G^n E`
///   in the reference columns and `|D_n - G^n E|` in `abs_err`;
/// * `e_spread` — the normalized spread of the four `E(a)` evaluations in
///   `value_re` (and `rel_err`), the series value in the reference columns.
///
/// Winding rows (one set per `(n, kappa >= 1, mu)`, `F` denoting
/// `F_{n,kappa}` for the `mu`-normalized factorization):
///
/// * `d_exact` — brute `D_n(t^{-kappa} a)` against the reconstruction
///   `(-1)^{n kappa} D_{n+kappa}(a) G(a)^{-kappa} G(c)^{kappa} F`;
/// * `f_11` — the first resolvent formula against the second;
/// * `f_12` — the second resolvent formula against the value the exact
///   identity forces, `(-1)^{n kappa} D_n(t^{-kappa} a) / (D_{n+kappa}(a)
///   G(a)^{-kappa} G(c)^{kappa})`;
/// * `f_tilde` — the variant formula against `f_12`; requires `n > kappa`,
///   otherwise `SKIPPED(hypothesis)`;
/// * `leading` — `det T_kappa(t^{-n} b)` against `f_12`; `abs_err` is the
///   asymptotic residual, not an identity gap;
/// * `y_det` — the lattice determinant against `f_12`, emitted as
///   `SKIPPED(window)` once `n + kappa` exceeds [`Y_DET_BUDGET`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    DExact,
    BoRhs,
    SzegoRelErr,
    ESpread,
    F11,
    F12,
    FTilde,
    Leading,
    YDet,
}

impl Quantity {
    /// CSV spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::DExact => "d_exact",
            Quantity::BoRhs => "bo_rhs",
            Quantity::SzegoRelErr => "szego_rel_err",
            Quantity::ESpread => "e_spread",
            Quantity::F11 => "f_11",
            Quantity::F12 => "f_12",
            Quantity::FTilde => "f_tilde",
            Quantity::Leading => "leading",
            Quantity::YDet => "y_det",
        }
    }

    fn rank(self) -> u8 {
        self as u8
    }
}

/// One CSV row. The field order *is* the schema; `csv::Writer` derives the
/// header from it and it must stay in sync with [`CSV_HEADER`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub preset: String,
    pub param_json: String,
    pub n: usize,
    pub kappa: usize,
    pub mu_re: f64,
    pub mu_im: f64,
    pub level: usize,
    pub quantity: String,
    pub value_re: f64,
    pub value_im: f64,
    pub ref_re: f64,
    pub ref_im: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub status: String,
}

impl ConvergenceRecord {
    /// The recorded value as a complex number.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }

    /// The reference as a complex number.
    pub fn reference(&self) -> Complex64 {
        Complex64::new(self.ref_re, self.ref_im)
    }

    /// Gap normalized the way the identity gates read it.
    pub fn scaled_gap(&self) -> f64 {
        self.abs_err / self.value().norm().max(1.0)
    }
}

/// Maps a library error to a row status. Violated theorem hypotheses
/// (nonzero winding, a zero on the circle, a singular section) are skips --
/// the identity makes no claim there -- while numerical failures are errors
/// that fail the sweep.
fn status_for(err: &Error) -> String {
    let short = match err {
        Error::NonzeroWinding { .. } | Error::ZeroOnCircle { .. } | Error::NearSingular { .. } => {
            return "SKIPPED(hypothesis)".into()
        }
        Error::WindowTooSmall { .. } => "window",
        Error::GridTooCoarse { .. } | Error::InvalidGrid { .. } => "grid",
        Error::TailNotResolved { .. } => "tail",
        Error::SeriesDiverges { .. } => "series",
        Error::InvalidParams(_) | Error::BadSpec(_) => "params",
        _ => "internal",
    };
    format!("ERROR({short})")
}

/// Shared row context: the preset identification columns.
struct SweepCx {
    preset: String,
    param_json: String,
}

type SortKey = (usize, usize, usize, u8);

impl SweepCx {
    #[allow(clippy::too_many_arguments)]
    fn row(
        &self,
        n: usize,
        kappa: usize,
        mu: Complex64,
        level: usize,
        q: Quantity,
        value: Complex64,
        reference: Complex64,
        abs_err: f64,
        rel_err: f64,
        status: &str,
    ) -> ConvergenceRecord {
        ConvergenceRecord {
            preset: self.preset.clone(),
            param_json: self.param_json.clone(),
            n,
            kappa,
            mu_re: mu.re,
            mu_im: mu.im,
            level,
            quantity: q.as_str().into(),
            value_re: value.re,
            value_im: value.im,
            ref_re: reference.re,
            ref_im: reference.im,
            abs_err,
            rel_err,
            status: status.into(),
        }
    }

    /// Row comparing a value against a reference.
    fn ok_row(
        &self,
        n: usize,
        kappa: usize,
        mu: Complex64,
        level: usize,
        q: Quantity,
        value: Complex64,
        reference: Complex64,
    ) -> ConvergenceRecord {
        let abs_err = (value - reference).norm();
        let rel_err = abs_err / reference.norm().max(1e-300);
        self.row(n, kappa, mu, level, q, value, reference, abs_err, rel_err, "OK")
    }

    /// Row whose computation failed or was skipped: numeric columns NaN.
    fn bare_row(
        &self,
        n: usize,
        kappa: usize,
        mu: Complex64,
        level: usize,
        q: Quantity,
        status: &str,
    ) -> ConvergenceRecord {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        self.row(n, kappa, mu, level, q, nan, nan, f64::NAN, f64::NAN, status)
    }

    /// Row that has a value but whose reference could not be computed.
    #[allow(clippy::too_many_arguments)]
    fn value_only_row(
        &self,
        n: usize,
        kappa: usize,
        mu: Complex64,
        level: usize,
        q: Quantity,
        value: Complex64,
        status: &str,
    ) -> ConvergenceRecord {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        self.row(n, kappa, mu, level, q, value, nan, f64::NAN, f64::NAN, status)
    }
}

/// Winding-zero rows for every `n`, all from one amortized factorization.
fn szego_rows(
    cx: &SweepCx,
    a: &Symbol,
    ns: &[usize],
    policy: &TruncationPolicy,
) -> Vec<(SortKey, ConvergenceRecord)> {
    let max_n = ns.iter().copied().max().unwrap_or(0);
    // Mirrors the level rule inside the sweep itself.
    let level = policy.target_level.max(max_n + 16);
    let mu = Complex64::ONE;
    let key = |n: usize, q: Quantity| (n, 0usize, 0usize, q.rank());
    let mut out = Vec::new();

    match szego_sweep(a, ns, policy) {
        Ok(reports) => {
            for rep in &reports {
                out.push((
                    key(rep.n, Quantity::DExact),
                    cx.ok_row(rep.n, 0, mu, level, Quantity::DExact, rep.d_n, rep.bo_rhs),
                ));
                out.push((
                    key(rep.n, Quantity::BoRhs),
                    cx.ok_row(rep.n, 0, mu, level, Quantity::BoRhs, rep.bo_rhs, rep.d_n),
                ));
                out.push((
                    key(rep.n, Quantity::SzegoRelErr),
                    cx.row(
                        rep.n,
                        0,
                        mu,
                        level,
                        Quantity::SzegoRelErr,
                        Complex64::new(rep.rel_err, 0.0),
                        rep.g_pow_e,
                        (rep.d_n - rep.g_pow_e).norm(),
                        rep.rel_err,
                        "OK",
                    ),
                ));
            }
        }
        Err(e) => {
            let status = status_for(&e);
            for &n in ns {
                for q in [Quantity::DExact, Quantity::BoRhs, Quantity::SzegoRelErr] {
                    out.push((key(n, q), cx.bare_row(n, 0, mu, level, q, &status)));
                }
            }
        }
    }

    match e_four_ways(a, policy) {
        Ok(b) => {
            let scale = b
                .e_op
                .norm()
                .max(b.e_ta.norm())
                .max(b.e_series_a.norm())
                .max(b.e_series_bc.norm());
            for &n in ns {
                out.push((
                    key(n, Quantity::ESpread),
                    cx.row(
                        n,
                        0,
                        mu,
                        policy.target_level,
                        Quantity::ESpread,
                        Complex64::new(b.spread, 0.0),
                        b.e_series_a,
                        b.spread * scale,
                        b.spread,
                        "OK",
                    ),
                ));
            }
        }
        Err(e) => {
            let status = status_for(&e);
            for &n in ns {
                out.push((
                    key(n, Quantity::ESpread),
                    cx.bare_row(n, 0, mu, policy.target_level, Quantity::ESpread, &status),
                ));
            }
        }
    }

    out
}

/// Per-`mu` state shared across all `(n, kappa)` of a sweep.
struct MuBundle {
    ctx: WindingContext,
    g_a: Complex64,
    g_c: Complex64,
}

fn mu_bundle(a: &Symbol, mu: Complex64) -> Result<MuBundle, Error> {
    let ctx = WindingContext::new(a, mu)?;
    let g_a = ctx.fact.g_mean;
    let g_c = g_mean_of(&ctx.fact.c)?;
    Ok(MuBundle { ctx, g_a, g_c })
}

const WINDING_QUANTITIES: [Quantity; 6] = [
    Quantity::DExact,
    Quantity::F11,
    Quantity::F12,
    Quantity::FTilde,
    Quantity::Leading,
    Quantity::YDet,
];

/// Winding rows for one `(n, kappa, mu)` grid point.
#[allow(clippy::too_many_arguments)]
fn winding_rows(
    cx: &SweepCx,
    a: &Symbol,
    bundle: &Result<MuBundle, Error>,
    mu_idx: usize,
    mu: Complex64,
    n: usize,
    kappa: usize,
    policy: &TruncationPolicy,
) -> Vec<(SortKey, ConvergenceRecord)> {
    let level = working_level(n, kappa, policy);
    let key = |q: Quantity| (n, kappa, mu_idx, q.rank());
    let mut out = Vec::new();

    let bundle = match bundle {
        Ok(b) => b,
        Err(e) => {
            let status = status_for(e);
            for q in WINDING_QUANTITIES {
                out.push((key(q), cx.bare_row(n, kappa, mu, level, q, &status)));
            }
            return out;
        }
    };

    let brute = dn_exact(&a.shift(-(kappa as i64)), n);
    let d_big = dn_exact(a, n + kappa);
    let sign = Complex64::new(winding_sign(n, kappa) as f64, 0.0);
    // G(a)^{-kappa} G(c)^{kappa}; equals mu^{2 kappa} but is measured, not
    // assumed.
    let g_ratio = (bundle.g_c / bundle.g_a).powi(kappa as i32);

    let f12 = match bundle.ctx.f_via_12(n, kappa, policy) {
        Ok(f12) => f12,
        Err(e) => {
            // Everything downstream compares against f_12; without it only
            // the brute determinant is worth reporting.
            let status = status_for(&e);
            out.push((
                key(Quantity::DExact),
                cx.value_only_row(n, kappa, mu, level, Quantity::DExact, brute, &status),
            ));
            for q in WINDING_QUANTITIES.into_iter().skip(1) {
                out.push((key(q), cx.bare_row(n, kappa, mu, level, q, &status)));
            }
            return out;
        }
    };

    let reconstructed = sign * d_big * g_ratio * f12;
    out.push((
        key(Quantity::DExact),
        cx.ok_row(n, kappa, mu, level, Quantity::DExact, brute, reconstructed),
    ));

    match bundle.ctx.f_via_11(n, kappa, policy) {
        Ok(f11) => out.push((
            key(Quantity::F11),
            cx.ok_row(n, kappa, mu, level, Quantity::F11, f11, f12),
        )),
        Err(e) => out.push((
            key(Quantity::F11),
            cx.bare_row(n, kappa, mu, level, Quantity::F11, &status_for(&e)),
        )),
    }

    let denom = d_big * g_ratio;
    if denom.norm() > 1e-300 {
        let forced = sign * brute / denom;
        out.push((
            key(Quantity::F12),
            cx.ok_row(n, kappa, mu, level, Quantity::F12, f12, forced),
        ));
    } else {
        // D_{n+kappa}(a) = 0: the exact identity degenerates to 0 = 0 and
        // pins no value of F.
        out.push((
            key(Quantity::F12),
            cx.value_only_row(n, kappa, mu, level, Quantity::F12, f12, "SKIPPED(hypothesis)"),
        ));
    }

    if n > kappa {
        match bundle.ctx.f_tilde(n, kappa, policy) {
            Ok(ft) => out.push((
                key(Quantity::FTilde),
                cx.ok_row(n, kappa, mu, level, Quantity::FTilde, ft, f12),
            )),
            Err(e) => out.push((
                key(Quantity::FTilde),
                cx.bare_row(n, kappa, mu, level, Quantity::FTilde, &status_for(&e)),
            )),
        }
    } else {
        out.push((
            key(Quantity::FTilde),
            cx.bare_row(n, kappa, mu, level, Quantity::FTilde, "SKIPPED(hypothesis)"),
        ));
    }

    match bundle.ctx.leading_term(n, kappa) {
        Ok(lead) => out.push((
            key(Quantity::Leading),
            cx.ok_row(n, kappa, mu, level, Quantity::Leading, lead, f12),
        )),
        Err(e) => out.push((
            key(Quantity::Leading),
            cx.bare_row(n, kappa, mu, level, Quantity::Leading, &status_for(&e)),
        )),
    }

    if n + kappa <= Y_DET_BUDGET {
        let window = level.min(128).max(n + kappa + 1);
        match bundle.ctx.y_matrix_det(n, kappa, window) {
            Ok(y) => out.push((
                key(Quantity::YDet),
                cx.ok_row(n, kappa, mu, level, Quantity::YDet, y, f12),
            )),
            Err(e) => out.push((
                key(Quantity::YDet),
                cx.bare_row(n, kappa, mu, level, Quantity::YDet, &status_for(&e)),
            )),
        }
    } else {
        out.push((
            key(Quantity::YDet),
            cx.bare_row(n, kappa, mu, level, Quantity::YDet, "SKIPPED(window)"),
        ));
    }

    out
}

/// Runs the whole grid and returns the records in their canonical order
/// (by `n`, then `kappa`, then the `mu_list` position, then quantity).
///
/// Row-level failures are statuses, not errors; `Err` here means the
/// configuration itself is unusable.
pub fn run_sweep(config: &SweepConfig) -> anyhow::Result<Vec<ConvergenceRecord>> {
    config.validate()?;
    let params = config.effective_preset();
    let a = preset(&params).map_err(|e| anyhow::anyhow!("preset: {e}"))?;
    let cx = SweepCx {
        preset: params.name().into(),
        param_json: serde_json::to_string(&params).context("serializing preset")?,
    };
    let policy = config.level_policy;

    let mut kappas: Vec<usize> = config.kappa_list.iter().copied().filter(|&k| k > 0).collect();
    kappas.sort_unstable();
    kappas.dedup();

    // One factorization per mu, shared by every (n, kappa) task.
    let bundles: Vec<(Complex64, Result<MuBundle, Error>)> = config
        .mu_list
        .iter()
        .map(|&mu| (mu, mu_bundle(&a, mu)))
        .collect();

    enum Task {
        Szego,
        Winding { mu_idx: usize, n: usize, kappa: usize },
    }

    let mut tasks = vec![Task::Szego];
    for mu_idx in 0..bundles.len() {
        for &kappa in &kappas {
            for &n in &config.n_list {
                tasks.push(Task::Winding { mu_idx, n, kappa });
            }
        }
    }

    let mut rows: Vec<(SortKey, ConvergenceRecord)> = tasks
        .par_iter()
        .map(|task| match *task {
            Task::Szego => szego_rows(&cx, &a, &config.n_list, &policy),
            Task::Winding { mu_idx, n, kappa } => {
                let (mu, ref bundle) = bundles[mu_idx];
                winding_rows(&cx, &a, bundle, mu_idx, mu, n, kappa, &policy)
            }
        })
        .reduce(Vec::new, |mut acc, mut part| {
            acc.append(&mut part);
            acc
        });

    rows.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Serializes records to CSV bytes (header included). Identical record
/// lists produce identical bytes.
pub fn render_csv(records: &[ConvergenceRecord]) -> anyhow::Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for rec in records {
        wtr.serialize(rec).context("serializing record")?;
    }
    Ok(wtr.into_inner().context("flushing csv")?)
}

/// Which record column a fit reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitField {
    N,
    Level,
    ValueRe,
    AbsErr,
    RelErr,
}

fn fit_field(rec: &ConvergenceRecord, f: FitField) -> f64 {
    match f {
        FitField::N => rec.n as f64,
        FitField::Level => rec.level as f64,
        FitField::ValueRe => rec.value_re,
        FitField::AbsErr => rec.abs_err,
        FitField::RelErr => rec.rel_err,
    }
}

/// How a positive sequence decays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    /// `y ~ C x^slope`: log-log linear.
    Power,
    /// `y ~ C exp(slope x)`: log-linear.
    Exponential,
    /// Everything already at the noise floor (`|y| < 1e-13`).
    Flat,
}

impl RateClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RateClass::Power => "power",
            RateClass::Exponential => "exponential",
            RateClass::Flat => "flat",
        }
    }
}

/// Least-squares decay fit: slope and intercept in the winning model's
/// log coordinates, coefficient of determination in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub classification: RateClass,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // All-equal ys fit exactly; otherwise r^2 = sxy^2 / (sxx syy) in [0, 1].
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r_squared)
}

/// Filtering shared by the fits: finite pairs, positive `x` and `y`, at
/// least four points over at least two distinct abscissas.
fn positive_points(points: &[(f64, f64)]) -> toeplitz_det::Result<Vec<(f64, f64)>> {
    let pos: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| x.is_finite() && x > 0.0 && y.is_finite() && y > 0.0)
        .collect();
    if pos.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: pos.len() });
    }
    let mut distinct = pos.iter().map(|&(x, _)| x).collect::<Vec<_>>();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InsufficientData { needed: 4, got: 1 });
    }
    Ok(pos)
}

/// Regression core over already-filtered positive points.
fn regress(pos: &[(f64, f64)], class: RateClass) -> RateFit {
    let ys: Vec<f64> = pos.iter().map(|&(_, y)| y.ln()).collect();
    let xs: Vec<f64> = match class {
        RateClass::Power => pos.iter().map(|&(x, _)| x.ln()).collect(),
        _ => pos.iter().map(|&(x, _)| x).collect(),
    };
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    RateFit { slope, intercept, r_squared, classification: class }
}

/// Least-squares fit of one fixed model class, no model selection:
/// [`RateClass::Power`] regresses `log y` on `log x`,
/// [`RateClass::Exponential`] regresses `log y` on `x`. Use this when the
/// expected decay law is known and the slope is the thing under test;
/// on short grids the two models can have nearly equal fit quality, so
/// selection by `r^2` would make the reported slope's meaning unstable.
pub fn fit_model(points: &[(f64, f64)], class: RateClass) -> toeplitz_det::Result<RateFit> {
    if class == RateClass::Flat {
        return Err(Error::InvalidParams("flat is a verdict, not a fittable model".into()));
    }
    Ok(regress(&positive_points(points)?, class))
}

/// Fits a decay law to `(x, y)` pairs.
///
/// Nonfinite pairs and nonpositive `x` are dropped. If every surviving
/// `|y|` sits below `1e-13` the data is classified [`RateClass::Flat`];
/// otherwise at least four strictly positive `y` values are required, a
/// power law (`log y` vs `log x`) and an exponential law (`log y` vs `x`)
/// are both fitted, and the better coefficient of determination wins (ties
/// go to the power law).
pub fn fit_points(points: &[(f64, f64)]) -> toeplitz_det::Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| x.is_finite() && x > 0.0 && y.is_finite())
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientData { needed: 4, got: 0 });
    }
    if usable.iter().all(|&(_, y)| y.abs() < 1e-13) {
        return Ok(RateFit {
            slope: 0.0,
            intercept: 0.0,
            r_squared: 1.0,
            classification: RateClass::Flat,
        });
    }
    let pos = positive_points(points)?;
    let power = regress(&pos, RateClass::Power);
    let expo = regress(&pos, RateClass::Exponential);
    Ok(if power.r_squared >= expo.r_squared { power } else { expo })
}

/// [`fit_points`] over record columns, using only `OK` rows.
pub fn fit_rate(
    records: &[ConvergenceRecord],
    x: FitField,
    y: FitField,
) -> toeplitz_det::Result<RateFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.status == "OK")
        .map(|r| (fit_field(r, x), fit_field(r, y)))
        .collect();
    fit_points(&points)
}

/// Standard fits a sweep report prints when the data supports them,
/// pooled across `kappa` and `mu` (filter the records first for
/// per-slice rates).
pub fn default_fits(records: &[ConvergenceRecord]) -> Vec<(String, RateFit)> {
    let mut fits = Vec::new();
    for (label, quantity, field) in [
        ("szego_rel_err vs n", "szego_rel_err", FitField::ValueRe),
        ("|f_tilde - f_12| vs n", "f_tilde", FitField::AbsErr),
        ("|leading - f_12| vs n", "leading", FitField::AbsErr),
    ] {
        let rows: Vec<ConvergenceRecord> = records
            .iter()
            .filter(|r| r.quantity == quantity)
            .cloned()
            .collect();
        if let Ok(fit) = fit_rate(&rows, FitField::N, field) {
            fits.push((label.to_string(), fit));
        }
    }
    fits
}

/// Rollup of a record set: identity gates, fits, and error rows.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    /// `false` when any row errored or any identity gate failed.
    pub passed: bool,
}

/// Summarizes records into a pass/fail report.
///
/// The gated quantities are the exact identities (`d_exact`, `bo_rhs`,
/// `f_11`, `f_12`, `y_det` at [`GATE_TOL`], scale-aware) plus `e_spread`;
/// `szego_rel_err`, `f_tilde`, and `leading` converge rather than vanish
/// and are reported through the fits instead. An empty record list is an
/// error (nothing was measured, so neither PASS nor FAIL is honest).
pub fn report(records: &[ConvergenceRecord], fits: &[(String, RateFit)]) -> anyhow::Result<Report> {
    if records.is_empty() {
        bail!("no records to report");
    }
    let ok = records.iter().filter(|r| r.status == "OK").count();
    let skipped = records.iter().filter(|r| r.status.starts_with("SKIPPED")).count();
    let errors = records.iter().filter(|r| r.status.starts_with("ERROR")).count();

    let mut text = String::new();
    let _ = writeln!(text, "records: {} ({ok} ok, {skipped} skipped, {errors} error)", records.len());
    let mut passed = errors == 0;

    let _ = writeln!(text, "identity gates (|value - ref| / max(1, |value|) <= {GATE_TOL:.0e}):");
    for q in [
        Quantity::DExact,
        Quantity::BoRhs,
        Quantity::F11,
        Quantity::F12,
        Quantity::YDet,
        Quantity::ESpread,
    ] {
        let gaps: Vec<f64> = records
            .iter()
            .filter(|r| r.status == "OK" && r.quantity == q.as_str())
            .map(|r| if q == Quantity::ESpread { r.value_re } else { r.scaled_gap() })
            .collect();
        if gaps.is_empty() {
            let _ = writeln!(text, "  {:<13} no rows", q.as_str());
            continue;
        }
        let worst = gaps.iter().cloned().fold(0.0f64, f64::max);
        let gate_ok = worst <= GATE_TOL;
        passed &= gate_ok;
        let _ = writeln!(
            text,
            "  {:<13} {:>4} rows  worst {:9.3e}  {}",
            q.as_str(),
            gaps.len(),
            worst,
            if gate_ok { "PASS" } else { "FAIL" },
        );
    }

    if !fits.is_empty() {
        let _ = writeln!(text, "rates:");
        for (label, fit) in fits {
            let _ = writeln!(
                text,
                "  {label}: {} slope {:+.3} (r^2 {:.4})",
                fit.classification.as_str(),
                fit.slope,
                fit.r_squared,
            );
        }
    }

    if errors > 0 {
        let _ = writeln!(text, "error rows:");
        for r in records.iter().filter(|r| r.status.starts_with("ERROR")).take(8) {
            let _ = writeln!(
                text,
                "  n={} kappa={} mu=({},{}) {}: {}",
                r.n, r.kappa, r.mu_re, r.mu_im, r.quantity, r.status,
            );
        }
        if errors > 8 {
            let _ = writeln!(text, "  ... {} more", errors - 8);
        }
    }

    let _ = writeln!(text, "overall: {}", if passed { "PASS" } else { "FAIL" });
    Ok(Report { text, passed })
}
