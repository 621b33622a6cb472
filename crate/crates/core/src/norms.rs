//! Lower-bound certificates for operator norms and growth scans across `N`.
//!
//! Every ratio here is `‖Tf‖_p / ‖f‖_p` for an explicit witness `f`, so it
//! bounds the discrete operator norm from below. Norms carry the cell-area
//! weight. Random starts use `ChaCha8Rng::seed_from_u64`.

use std::io::Write;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::directions::{gen_cantor, gen_lacunary, gen_uniform, ratio, DirectionSet};
use crate::error::{Error, Result};
use crate::grid::{forward_dft, inverse_dft, multiply_inverse, FreqLattice, GridField};
use crate::operators::{
    directional_table, lacunary_square_function, maximal_avg_directional, maximal_directional_with_argmax,
    MultiplierSpec,
};
use crate::stats::linear_fit;

/// Indicator of the closed disk of the given radius centred at
/// `(side/2, side/2)`.
pub fn extremizer_ball(n: usize, side: f64, radius: f64) -> Result<GridField> {
    if !(radius > 0.0) || radius > side / 8.0 {
        return Err(Error::InvalidArgument(format!(
            "ball radius {radius} must lie in (0, side/8 = {}]",
            side / 8.0
        )));
    }
    let h = side / n as f64;
    let c = side / 2.0;
    GridField::from_fn(n, side, |i, j| {
        let (x, y) = (i as f64 * h - c, j as f64 * h - c);
        Complex64::new(if x * x + y * y <= radius * radius { 1.0 } else { 0.0 }, 0.0)
    })
}

/// Bound on `|‖ball‖₁ − πr²|`: every cell whose sample disagrees with the
/// disk meets the circle, and at most `4(2r/h + 2)` cells do.
pub fn ball_area_error_bound(n: usize, side: f64, radius: f64) -> f64 {
    let h = side / n as f64;
    8.0 * radius * h + 8.0 * h * h
}

/// Serializable operator description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Identity,
    /// `sup_{v∈V} |T_v f|`; with `m = sign` this is `H_V`.
    MaximalMultiplier { directions: serde_json::Value, multiplier: String },
    /// `M_V f`.
    MaximalAverage { directions: serde_json::Value },
    /// `(Σ_k |T_V S_k f|²)^{1/2}`.
    LacunarySquare { directions: serde_json::Value, multiplier: String },
}

fn set_value(set: &DirectionSet) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(&set.to_json()?)?)
}

fn set_from(v: &serde_json::Value) -> Result<DirectionSet> {
    DirectionSet::from_json(&v.to_string())
}

impl OperatorSpec {
    pub fn hilbert(set: &DirectionSet) -> Result<Self> {
        Self::multiplier(set, &MultiplierSpec::sign())
    }

    pub fn multiplier(set: &DirectionSet, m: &MultiplierSpec) -> Result<Self> {
        Ok(OperatorSpec::MaximalMultiplier {
            directions: set_value(set)?,
            multiplier: m.name(),
        })
    }

    pub fn maximal_average(set: &DirectionSet) -> Result<Self> {
        Ok(OperatorSpec::MaximalAverage { directions: set_value(set)? })
    }

    pub fn lacunary_square(set: &DirectionSet, m: &MultiplierSpec) -> Result<Self> {
        Ok(OperatorSpec::LacunarySquare {
            directions: set_value(set)?,
            multiplier: m.name(),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            OperatorSpec::Identity => "identity",
            OperatorSpec::MaximalMultiplier { multiplier, .. } if multiplier == "sign" => "hilbert",
            OperatorSpec::MaximalMultiplier { .. } => "multiplier",
            OperatorSpec::MaximalAverage { .. } => "maximal_average",
            OperatorSpec::LacunarySquare { .. } => "lacunary_square",
        }
    }

    pub fn apply(&self, f: &GridField) -> Result<GridField> {
        match self {
            OperatorSpec::Identity => Ok(f.clone()),
            OperatorSpec::MaximalMultiplier { directions, multiplier } => Ok(maximal_directional_with_argmax(
                f,
                &set_from(directions)?,
                &MultiplierSpec::parse(multiplier)?,
            )?
            .values),
            OperatorSpec::MaximalAverage { directions } => Ok(maximal_avg_directional(f, &set_from(directions)?)),
            OperatorSpec::LacunarySquare { directions, multiplier } => {
                lacunary_square_function(f, &set_from(directions)?, &MultiplierSpec::parse(multiplier)?)
            }
        }
    }
}

/// SHA-256 of the DSF1 encoding, hex.
pub fn witness_hash(f: &GridField) -> String {
    hex::encode(Sha256::digest(f.to_dsf1_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub operator: OperatorSpec,
    pub p: f64,
    pub witness_hash: String,
    pub witness_path: Option<String>,
    pub ratio: f64,
    pub n: usize,
    pub side: f64,
}

impl NormCertificate {
    /// Recomputes the ratio from the witness: hash must match and the ratio
    /// must agree to `1e-8` relative.
    pub fn verify(&self, witness: &GridField) -> Result<bool> {
        if witness_hash(witness) != self.witness_hash || witness.n() != self.n {
            return Ok(false);
        }
        let again = lower_bound_certificate(&self.operator, witness, self.p)?;
        Ok((again.ratio - self.ratio).abs() <= 1e-8 * self.ratio.abs().max(f64::MIN_POSITIVE))
    }
}

/// `‖op(f)‖_p / ‖f‖_p`.
pub fn lower_bound_certificate(op: &OperatorSpec, f: &GridField, p: f64) -> Result<NormCertificate> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be at least 1, got {p}")));
    }
    let nf = f.norm_lp(p);
    if nf == 0.0 {
        return Err(Error::ZeroInput);
    }
    let tf = op.apply(f)?;
    Ok(NormCertificate {
        operator: op.clone(),
        p,
        witness_hash: witness_hash(f),
        witness_path: None,
        ratio: tf.norm_lp(p) / nf,
        n: f.n(),
        side: f.side(),
    })
}

/// Knobs for [`alternating_maximization`].
#[derive(Clone, Copy, Debug)]
pub struct AltOptions {
    pub iterations: usize,
    /// Power steps per outer iteration.
    pub inner_steps: usize,
    /// Relative change of the inner Rayleigh quotient counted as converged.
    pub inner_tol: f64,
}

impl Default for AltOptions {
    fn default() -> Self {
        Self {
            iterations: 4,
            inner_steps: 8,
            inner_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AltResult {
    pub certificate: NormCertificate,
    pub witness: GridField,
    /// Ratio of the nonlinear operator after each outer iteration, starting
    /// with the initial field.
    pub ratios: Vec<f64>,
    /// `false` when some inner power iteration hit the step cap first.
    pub converged: bool,
}

/// The linear operator `f ↦ T_{v(x)} f(x)` for a fixed selection.
struct Selected<'a> {
    tables: &'a [Vec<Complex64>],
    sel: &'a [u32],
}

impl Selected<'_> {
    fn used(&self) -> Vec<bool> {
        let mut used = vec![false; self.tables.len()];
        for &d in self.sel {
            used[d as usize] = true;
        }
        used
    }

    fn apply(&self, f: &GridField) -> GridField {
        let spec = forward_dft(f);
        let mut data = vec![Complex64::new(0.0, 0.0); self.sel.len()];
        for (d, used) in self.used().into_iter().enumerate() {
            if !used {
                continue;
            }
            let part = multiply_inverse(&spec, &self.tables[d]);
            data.par_iter_mut()
                .zip(self.sel.par_iter())
                .zip(part.data().par_iter())
                .for_each(|((x, &s), y)| {
                    if s as usize == d {
                        *x = *y;
                    }
                });
        }
        f.with_data(data)
    }

    fn adjoint(&self, g: &GridField) -> GridField {
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = vec![zero; self.sel.len()];
        for (d, used) in self.used().into_iter().enumerate() {
            if !used {
                continue;
            }
            let masked: Vec<Complex64> = g
                .data()
                .par_iter()
                .zip(self.sel.par_iter())
                .map(|(v, &s)| if s as usize == d { *v } else { zero })
                .collect();
            let spec = forward_dft(&g.with_data(masked));
            acc.par_iter_mut()
                .zip(spec.data().par_iter().zip(self.tables[d].par_iter()))
                .for_each(|(a, (x, t))| *a += x * t.conj());
        }
        inverse_dft(&g.with_data(acc))
    }
}

/// Coordinate ascent for `‖T_V‖_{2→2}`: fix `f` and take the maximizing
/// direction field; fix the selection and power-iterate `T_sel* T_sel`.
/// The ratio sequence never decreases: a step that would lower it is
/// discarded.
pub fn alternating_maximization(
    set: &DirectionSet,
    m: &MultiplierSpec,
    p: f64,
    start: StartField,
    opts: AltOptions,
) -> Result<AltResult> {
    if p != 2.0 {
        return Err(Error::InvalidArgument("alternating maximization needs p = 2".into()));
    }
    if opts.iterations == 0 || opts.inner_steps == 0 {
        return Err(Error::InvalidArgument("iterations must be positive".into()));
    }
    let mut f = start.realize()?;
    let op = OperatorSpec::multiplier(set, m)?;
    let lat = FreqLattice::of(&f);
    let tables = set
        .dirs()
        .iter()
        .map(|v| directional_table(lat, v, m))
        .collect::<Result<Vec<_>>>()?;
    let mut cert = lower_bound_certificate(&op, &f, 2.0)?;
    let mut ratios = vec![cert.ratio];
    let mut converged = true;
    for _ in 0..opts.iterations {
        let sel = maximal_directional_with_argmax(&f, set, m)?.argmax;
        let lin = Selected { tables: &tables, sel: &sel };
        let mut g = f.clone();
        let mut rq = 0.0f64;
        let mut inner_done = false;
        for _ in 0..opts.inner_steps {
            let tg = lin.apply(&g);
            let next = (tg.norm_l2() / g.norm_l2()).powi(2);
            let h = lin.adjoint(&tg);
            let nh = h.norm_l2();
            if nh == 0.0 {
                inner_done = true;
                break;
            }
            g = h.scale(Complex64::new(1.0 / nh, 0.0));
            if (next - rq).abs() <= opts.inner_tol * next {
                inner_done = true;
                break;
            }
            rq = next;
        }
        converged &= inner_done;
        let c = lower_bound_certificate(&op, &g, 2.0)?;
        if c.ratio >= cert.ratio {
            f = g;
            cert = c;
        }
        ratios.push(cert.ratio);
    }
    Ok(AltResult {
        certificate: cert,
        witness: f,
        ratios,
        converged,
    })
}

/// Initial field for [`alternating_maximization`].
pub enum StartField {
    /// Independent uniform real and imaginary parts in `[−1, 1)`.
    Random { n: usize, side: f64, seed: u64 },
    Given(GridField),
}

impl StartField {
    fn realize(self) -> Result<GridField> {
        match self {
            StartField::Given(f) => Ok(f),
            StartField::Random { n, side, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                GridField::from_fn(n, side, |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Uniform,
    /// `{2^{−j}}`, node `0`.
    Lacunary,
    /// Cantor set with `q = 3`; `N` must be a power of two.
    Cantor,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(FamilyKind::Uniform),
            "lacunary" => Ok(FamilyKind::Lacunary),
            "cantor" => Ok(FamilyKind::Cantor),
            _ => Err(Error::InvalidArgument(format!("unknown family {s:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Uniform => "uniform",
            FamilyKind::Lacunary => "lacunary",
            FamilyKind::Cantor => "cantor",
        }
    }

    /// The `N`-element member, or `None` when the family has none.
    pub fn generate(&self, count: usize) -> Result<Option<DirectionSet>> {
        match self {
            FamilyKind::Uniform => gen_uniform(count).map(Some),
            FamilyKind::Lacunary => {
                gen_lacunary(&ratio(1, 2), count, &BigRational::from_integer(0.into())).map(Some)
            }
            FamilyKind::Cantor => {
                if !count.is_power_of_two() || count < 2 {
                    return Ok(None);
                }
                gen_cantor(3, count.trailing_zeros()).map(Some)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Hilbert,
    MaximalAverage,
    LacunarySquare,
    Multiplier(String),
}

impl OpKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hilbert" => Ok(OpKind::Hilbert),
            "maximal" | "average" | "maximal_average" => Ok(OpKind::MaximalAverage),
            "lacunary_square" | "square" => Ok(OpKind::LacunarySquare),
            other => {
                MultiplierSpec::parse(other)?;
                Ok(OpKind::Multiplier(other.to_string()))
            }
        }
    }

    fn spec(&self, set: &DirectionSet) -> Result<OperatorSpec> {
        match self {
            OpKind::Hilbert => OperatorSpec::hilbert(set),
            OpKind::MaximalAverage => OperatorSpec::maximal_average(set),
            OpKind::LacunarySquare => OperatorSpec::lacunary_square(set, &MultiplierSpec::sign()),
            OpKind::Multiplier(m) => OperatorSpec::multiplier(set, &MultiplierSpec::parse(m)?),
        }
    }

    fn multiplier(&self) -> Option<MultiplierSpec> {
        match self {
            OpKind::Hilbert => Some(MultiplierSpec::sign()),
            OpKind::Multiplier(m) => MultiplierSpec::parse(m).ok(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub family: FamilyKind,
    pub n_list: Vec<usize>,
    pub p: f64,
    pub op: OpKind,
    pub n: usize,
    pub side: f64,
    pub radius: f64,
    /// Alternating maximization started from the ball, run for `p = 2`
    /// directional multipliers when `use_alt` is set; the better of the
    /// two certificates is kept.
    pub alt: AltOptions,
    pub use_alt: bool,
}

impl ScanConfig {
    pub fn new(family: FamilyKind, n_list: Vec<usize>, p: f64, op: OpKind, n: usize) -> Self {
        Self {
            family,
            n_list,
            p,
            op,
            n,
            side: 1.0,
            radius: 1.0 / 32.0,
            alt: AltOptions {
                iterations: 2,
                inner_steps: 3,
                inner_tol: 1e-6,
            },
            use_alt: true,
        }
    }
}

/// `y ≈ a·g(N) + b`; `None` fields when the fit is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub r2: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn fit(model: &str, pts: &[(f64, f64)]) -> ModelFit {
    let f = linear_fit(pts);
    ModelFit {
        model: model.to_string(),
        a: finite(f.slope),
        b: finite(f.intercept),
        r2: finite(f.r2),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub count: usize,
    pub certificate: NormCertificate,
    /// `"ball"` or `"alternating"`.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthScan {
    pub family: FamilyKind,
    pub operator: String,
    pub p: f64,
    pub grid_n: usize,
    pub entries: Vec<ScanEntry>,
    /// `log N`, `√log N`, `N^{1/p}`.
    pub fits: Vec<ModelFit>,
    /// Slope of `log ratio` against `log N`.
    pub loglog: ModelFit,
    /// Best model when its `R²` leads the runner-up by at least `0.02`.
    pub winner: Option<String>,
    pub warnings: Vec<String>,
}

/// Required `R²` lead to declare a model winner.
pub const WINNER_MARGIN: f64 = 0.02;

impl GrowthScan {
    pub fn counts(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.count).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.certificate.ratio).collect()
    }

    pub fn fit(&self, model: &str) -> Option<&ModelFit> {
        self.fits.iter().find(|f| f.model == model)
    }

    /// `family,N,p,operator,ratio,witness_hash,grid_n` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Format(e.to_string());
        wtr.write_record(["family", "N", "p", "operator", "ratio", "witness_hash", "grid_n"])
            .map_err(err)?;
        for e in &self.entries {
            wtr.write_record([
                self.family.name().to_string(),
                e.count.to_string(),
                self.p.to_string(),
                self.operator.clone(),
                e.certificate.ratio.to_string(),
                e.certificate.witness_hash.clone(),
                self.grid_n.to_string(),
            ])
            .map_err(err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn select_winner(fits: &[ModelFit]) -> Option<String> {
    let mut scored: Vec<(f64, &str)> = fits.iter().filter_map(|f| Some((f.r2?, f.model.as_str()))).collect();
    if scored.len() < fits.len() || scored.is_empty() {
        return None;
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    match scored.get(1) {
        Some(second) if scored[0].0 - second.0 < WINNER_MARGIN => None,
        _ => Some(scored[0].1.to_string()),
    }
}

/// Certificates for each `N` from the ball extremizer and, when enabled,
/// alternating maximization started at the ball; the larger ratio is kept.
/// `N > n/4` and counts the family cannot produce are skipped with a warning.
pub fn growth_scan(cfg: &ScanConfig) -> Result<GrowthScan> {
    if cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N list must be strictly increasing".into()));
    }
    let ball = extremizer_ball(cfg.n, cfg.side, cfg.radius)?;
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for &count in &cfg.n_list {
        if count > cfg.n / 4 {
            warnings.push(format!("N = {count} exceeds n/4 = {}; skipped", cfg.n / 4));
            continue;
        }
        let Some(set) = cfg.family.generate(count)? else {
            warnings.push(format!("{} family has no member with N = {count}; skipped", cfg.family.name()));
            continue;
        };
        let op = cfg.op.spec(&set)?;
        let mut best = ScanEntry {
            count,
            certificate: lower_bound_certificate(&op, &ball, cfg.p)?,
            source: "ball".into(),
        };
        if let (true, 2.0, Some(m)) = (cfg.use_alt, cfg.p, cfg.op.multiplier()) {
            let alt = alternating_maximization(&set, &m, 2.0, StartField::Given(ball.clone()), cfg.alt)?;
            if !alt.converged {
                warnings.push(format!("N = {count}: inner power iteration hit its step cap"));
            }
            if alt.certificate.ratio > best.certificate.ratio {
                best = ScanEntry {
                    count,
                    certificate: alt.certificate,
                    source: "alternating".into(),
                };
            }
        }
        entries.push(best);
    }
    let pts = |g: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
        entries
            .iter()
            .map(|e| (g(e.count as f64), e.certificate.ratio))
            .collect()
    };
    let fits = vec![
        fit("log", &pts(&|n: f64| n.ln())),
        fit("sqrt_log", &pts(&|n: f64| n.ln().sqrt())),
        fit("power", &pts(&|n: f64| n.powf(1.0 / cfg.p))),
    ];
    let loglog = fit(
        "loglog",
        &entries
            .iter()
            .map(|e| ((e.count as f64).ln(), e.certificate.ratio.ln()))
            .collect::<Vec<_>>(),
    );
    let winner = select_winner(&fits);
    let operator = entries
        .first()
        .map(|e| e.certificate.operator.name().to_string())
        .unwrap_or_else(|| format!("{:?}", cfg.op).to_lowercase());
    Ok(GrowthScan {
        family: cfg.family,
        operator,
        p: cfg.p,
        grid_n: cfg.n,
        entries,
        fits,
        loglog,
        winner,
        warnings,
    })
}
