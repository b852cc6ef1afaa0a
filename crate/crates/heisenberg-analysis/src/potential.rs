//! Nonnegative potentials, reverse Hölder checks and the critical radius
//! function `ρ(u) = sup{ r : r^{2-Q} ∫_{B(u,r)} V ≤ 1 }`.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::hgroup::{homogeneous_dimension, unit_ball_volume, HBall, HPoint};
use crate::measure::{unit_ball_samples, QuadratureSpec};

/// Declarative potential description used by experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `V ≡ 0`: classical mode, `ρ ≡ ∞`.
    Zero,
    Constant { value: f64 },
    /// `coefficient · |u|^exponent`.
    GaugePower {
        #[serde(default = "one")]
        coefficient: f64,
        exponent: f64,
    },
    /// `χ_{B(0, radius)}`.
    Indicator { radius: f64 },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    Constant { value: f64 },
    GaugePower { coefficient: f64, exponent: f64 },
    Custom,
}

type RhoFn = Arc<dyn Fn(&HPoint) -> Option<f64> + Send + Sync>;

/// A nonnegative potential with metadata.
#[derive(Clone)]
pub struct Potential {
    label: String,
    n: usize,
    kind: PotentialKind,
    eval: Arc<dyn Fn(&HPoint) -> f64 + Send + Sync>,
    claimed_rh_exponent: Option<f64>,
    closed_form_rho: Option<RhoFn>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("claimed_rh_exponent", &self.claimed_rh_exponent)
            .finish()
    }
}

impl Potential {
    /// `V ≡ 0`, the classical mode.
    pub fn zero(n: usize) -> Self {
        Self {
            label: "zero".into(),
            n,
            kind: PotentialKind::Zero,
            eval: Arc::new(|_| 0.0),
            claimed_rh_exponent: None,
            closed_form_rho: Some(Arc::new(|_| Some(f64::INFINITY))),
        }
    }

    /// `V ≡ c` with `c > 0`; `ρ = (c |B(0,1)|)^{-1/2}`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        if c == 0.0 {
            return Err(Error::ZeroPotential);
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NegativePotential { value: c });
        }
        let rho = (c * unit_ball_volume(n)).powf(-0.5);
        Ok(Self {
            label: format!("constant({c})"),
            n,
            kind: PotentialKind::Constant { value: c },
            eval: Arc::new(move |_| c),
            claimed_rh_exponent: Some(f64::INFINITY),
            closed_form_rho: Some(Arc::new(move |_| Some(rho))),
        })
    }

    /// `V(u) = coefficient · |u|^σ` with `σ > 0`; the closed-form ρ is known
    /// at the origin: `ρ(0) = (coefficient · Q|B(0,1)|/(Q+σ))^{-1/(2+σ)}`.
    pub fn gauge_power(n: usize, coefficient: f64, sigma: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return Err(invalid("coefficient", "must be positive"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("exponent", "must be positive"));
        }
        let q = homogeneous_dimension(n) as f64;
        let rho0 = (coefficient * q * unit_ball_volume(n) / (q + sigma)).powf(-1.0 / (2.0 + sigma));
        Ok(Self {
            label: format!("{coefficient}*|u|^{sigma}"),
            n,
            kind: PotentialKind::GaugePower { coefficient, exponent: sigma },
            eval: Arc::new(move |u| coefficient * u.norm().powf(sigma)),
            claimed_rh_exponent: Some(f64::INFINITY),
            closed_form_rho: Some(Arc::new(move |u| if u.is_origin() { Some(rho0) } else { None })),
        })
    }

    /// `χ_B`: not in any reverse Hölder class uniformly over balls.
    pub fn indicator(ball: HBall) -> Self {
        let b = ball.clone();
        Self::custom(ball.n(), format!("indicator(r={})", ball.radius), move |u| if b.contains(u) { 1.0 } else { 0.0 })
    }

    pub fn custom<F>(n: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&HPoint) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            n,
            kind: PotentialKind::Custom,
            eval: Arc::new(f),
            claimed_rh_exponent: None,
            closed_form_rho: None,
        }
    }

    pub fn from_spec(n: usize, spec: &PotentialSpec) -> Result<Self> {
        match *spec {
            PotentialSpec::Zero => Ok(Self::zero(n)),
            PotentialSpec::Constant { value } => Self::constant(n, value),
            PotentialSpec::GaugePower { coefficient, exponent } => Self::gauge_power(n, coefficient, exponent),
            PotentialSpec::Indicator { radius } => Ok(Self::indicator(HBall::centered(n, radius)?)),
        }
    }

    pub fn with_claimed_rh_exponent(mut self, s: f64) -> Self {
        self.claimed_rh_exponent = Some(s);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn is_classical(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    /// `Some(c)` for constant potentials (`Some(0)` in classical mode).
    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Zero => Some(0.0),
            PotentialKind::Constant { value } => Some(value),
            _ => None,
        }
    }

    pub fn claimed_rh_exponent(&self) -> Option<f64> {
        self.claimed_rh_exponent
    }

    /// Closed-form `ρ(u)` when known.
    pub fn closed_form_rho(&self, u: &HPoint) -> Option<f64> {
        self.closed_form_rho.as_ref().and_then(|f| f(u))
    }

    pub fn eval(&self, u: &HPoint) -> f64 {
        (self.eval)(u)
    }

    /// Evaluates and rejects negative values.
    pub fn eval_checked(&self, u: &HPoint) -> Result<f64> {
        let v = self.eval(u);
        if v < 0.0 || v.is_nan() {
            return Err(Error::NegativePotential { value: v });
        }
        Ok(v)
    }
}

/// Outcome of a reverse Hölder check over a ball family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhCheck {
    pub worst_constant: f64,
    pub witness: HBall,
    pub per_ball: Vec<f64>,
}

/// `max_B (avg_B V^s)^{1/s} / avg_B V` over `balls`, by Monte-Carlo with a
/// common template of uniform unit-ball samples.
///
/// A ball on which `V` averages to 0 gives an infinite constant.
pub fn rh_check(v: &Potential, s: f64, balls: &[HBall], spec: &QuadratureSpec) -> Result<RhCheck> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(invalid("s", "reverse Hölder exponent must lie in (1, ∞)"));
    }
    if balls.is_empty() {
        return Err(invalid("balls", "empty ball family"));
    }
    spec.validate()?;
    let template = unit_ball_samples(v.n(), spec.mc_samples, spec.seed, 0);
    let mut per_ball = Vec::with_capacity(balls.len());
    for b in balls {
        let (mut m1, mut ms) = (0.0, 0.0);
        for w in &template {
            let x = v.eval_checked(&b.map_from_unit(w))?;
            m1 += x;
            ms += x.powf(s);
        }
        m1 /= template.len() as f64;
        ms /= template.len() as f64;
        per_ball.push(if m1 > 0.0 { ms.powf(1.0 / s) / m1 } else { f64::INFINITY });
    }
    let (idx, worst) = per_ball
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
    Ok(RhCheck { worst_constant: worst, witness: balls[idx].clone(), per_ball })
}

/// Search window and resolution for `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RhoSearch {
    pub r_min: f64,
    pub r_max: f64,
    pub grid_points: usize,
    /// Iteration cap of the root refinement inside the bracketing grid cell.
    pub root_steps: usize,
}

impl Default for RhoSearch {
    fn default() -> Self {
        Self { r_min: 1e-3, r_max: 1e3, grid_points: 60, root_steps: 40 }
    }
}

impl RhoSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min) {
            return Err(invalid("rho window", "need 0 < r_min < r_max"));
        }
        if self.grid_points < 2 {
            return Err(invalid("grid_points", "need at least 2"));
        }
        Ok(())
    }
}

/// A critical radius with its noise bracket and window flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub rho: f64,
    /// Interval where `g` is within two standard errors of 1.
    pub bracket: (f64, f64),
    /// `g(r_max) ≤ 1`: ρ is at least the window top.
    pub saturated_high: bool,
    /// `g(r_min) > 1`: ρ is below the window bottom.
    pub saturated_low: bool,
    /// Relative standard error of `g` at the root.
    pub rel_stderr: f64,
}

impl RhoEstimate {
    /// Noise exceeds the distance to the root resolution.
    pub fn is_interval(&self) -> bool {
        self.bracket.1 / self.bracket.0 > 1.0 + 1e-9
    }
}

/// `g(r) = r^{2-Q} ∫_{B(u,r)} V = r² |B(0,1)| · mean_i V(u · δ_r w_i)`.
fn g_with_stderr(u: &HPoint, v: &Potential, r: f64, template: &[HPoint]) -> Result<(f64, f64)> {
    let n = v.n();
    let (mut s1, mut s2) = (0.0, 0.0);
    for w in template {
        let x = v.eval_checked(&u.mul(&w.dilate(r)))?;
        s1 += x;
        s2 += x * x;
    }
    let m = template.len() as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0);
    let scale = r * r * unit_ball_volume(n);
    Ok((scale * mean, scale * (var / m).sqrt()))
}

/// Critical radius by log-grid scan for the last crossing of `g = 1`
/// followed by regula falsi, with a fresh template from `spec`.
pub fn critical_radius(u: &HPoint, v: &Potential, spec: &QuadratureSpec) -> Result<RhoEstimate> {
    spec.validate()?;
    let template = unit_ball_samples(v.n(), spec.mc_samples, spec.seed, 1);
    critical_radius_with(u, v, &RhoSearch::default(), &template)
}

/// Critical radius using a caller-provided template of unit-ball samples.
pub fn critical_radius_with(u: &HPoint, v: &Potential, search: &RhoSearch, template: &[HPoint]) -> Result<RhoEstimate> {
    search.validate()?;
    if v.is_classical() {
        return Err(Error::ZeroPotential);
    }
    if u.n() != v.n() {
        return Err(Error::DimensionMismatch { left: u.n(), right: v.n() });
    }
    if template.is_empty() {
        return Err(invalid("template", "empty sample template"));
    }
    let k = search.grid_points;
    let ratio = (search.r_max / search.r_min).ln() / (k - 1) as f64;
    let grid: Vec<f64> = (0..k).map(|i| search.r_min * (ratio * i as f64).exp()).collect();
    let g_at = |r: f64| g_with_stderr(u, v, r, template).map(|x| x.0);
    // Scan down from the top: the first grid point with g ≤ 1 starts the last crossing.
    let mut above = g_at(grid[k - 1])?;
    if above <= 1.0 {
        return Ok(RhoEstimate {
            rho: search.r_max,
            bracket: (search.r_max, f64::INFINITY),
            saturated_high: true,
            saturated_low: false,
            rel_stderr: 0.0,
        });
    }
    let mut last = None;
    for i in (0..k - 1).rev() {
        let g = g_at(grid[i])?;
        if g <= 1.0 {
            last = Some((i, g));
            break;
        }
        above = g;
    }
    let Some((last, below)) = last else {
        return Ok(RhoEstimate {
            rho: search.r_min,
            bracket: (0.0, search.r_min),
            saturated_high: false,
            saturated_low: true,
            rel_stderr: 0.0,
        });
    };
    // Illinois regula falsi on ln g(e^x) over the bracketing grid cell.
    let lg = |g: f64| g.max(1e-300).ln();
    let (mut lo, mut hi) = (grid[last].ln(), grid[last + 1].ln());
    let (mut flo, mut fhi) = (lg(below), lg(above));
    let slope = (fhi - flo) / ratio;
    let mut side = 0i8;
    for _ in 0..search.root_steps {
        if hi - lo < 1e-13 {
            break;
        }
        let mut mid = if fhi > flo { lo - flo * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let g = g_at(mid.exp())?;
        if g <= 1.0 {
            lo = mid;
            flo = lg(g);
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = lg(g);
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    let rho = lo.exp();
    let (g, se) = g_with_stderr(u, v, rho, template)?;
    let rel = if g > 0.0 { se / g } else { 0.0 };
    let bracket = if rel > 0.0 && slope > 0.0 {
        let f = (1.0 + 2.0 * rel).powf(1.0 / slope);
        (rho / f, rho * f)
    } else {
        (rho, rho)
    };
    Ok(RhoEstimate { rho, bracket, saturated_high: false, saturated_low: false, rel_stderr: rel })
}

type CacheKey = SmallVec<[i64; 7]>;

/// Cached `ρ` evaluations for one potential plus fitted comparison constants.
pub struct CriticalRadiusField {
    potential: Potential,
    search: RhoSearch,
    template: Arc<Vec<HPoint>>,
    pitch: f64,
    cache: RwLock<HashMap<CacheKey, f64>>,
    constants: RwLock<Option<(f64, f64)>>,
    saturated: AtomicUsize,
}

impl fmt::Debug for CriticalRadiusField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CriticalRadiusField")
            .field("potential", &self.potential)
            .field("search", &self.search)
            .field("pitch", &self.pitch)
            .field("cached", &self.cache.read().map(|c| c.len()).unwrap_or(0))
            .finish()
    }
}

impl CriticalRadiusField {
    /// Field with a template of `spec.mc_samples` unit-ball samples.
    pub fn new(potential: Potential, search: RhoSearch, spec: &QuadratureSpec) -> Result<Self> {
        search.validate()?;
        spec.validate()?;
        let template = if potential.is_classical() {
            Vec::new()
        } else {
            unit_ball_samples(potential.n(), spec.mc_samples, spec.seed, 1)
        };
        Ok(Self {
            potential,
            search,
            template: Arc::new(template),
            pitch: 1e-6,
            cache: RwLock::new(HashMap::new()),
            constants: RwLock::new(None),
            saturated: AtomicUsize::new(0),
        })
    }

    /// `ρ ≡ ∞`: every bracket factor is 1.
    pub fn classical(n: usize) -> Self {
        Self::new(Potential::zero(n), RhoSearch::default(), &QuadratureSpec::default()).expect("classical field")
    }

    /// Lattice pitch used to quantize cache keys.
    pub fn with_pitch(mut self, pitch: f64) -> Result<Self> {
        if !(pitch > 0.0) {
            return Err(invalid("pitch", "must be positive"));
        }
        self.pitch = pitch;
        Ok(self)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn n(&self) -> usize {
        self.potential.n()
    }

    pub fn is_classical(&self) -> bool {
        self.potential.is_classical()
    }

    pub fn search(&self) -> &RhoSearch {
        &self.search
    }

    /// Number of evaluations that hit the search window edge.
    pub fn saturated_count(&self) -> usize {
        self.saturated.load(Ordering::Relaxed)
    }

    fn quantize(&self, u: &HPoint) -> (CacheKey, HPoint) {
        // a constant potential gives the same ball integrals at every center
        if self.potential.constant_value().is_some() {
            return (CacheKey::new(), HPoint::origin(u.n()));
        }
        let key: CacheKey = u.coords().iter().map(|c| (c / self.pitch).round() as i64).collect();
        let coords: SmallVec<[f64; 7]> = key.iter().map(|&k| k as f64 * self.pitch).collect();
        (key, HPoint::from_coords(coords).expect("finite lattice point"))
    }

    /// Full estimate at the lattice point nearest to `u`.
    pub fn estimate(&self, u: &HPoint) -> Result<RhoEstimate> {
        if self.is_classical() {
            return Ok(RhoEstimate {
                rho: f64::INFINITY,
                bracket: (f64::INFINITY, f64::INFINITY),
                saturated_high: false,
                saturated_low: false,
                rel_stderr: 0.0,
            });
        }
        let (_, p) = self.quantize(u);
        critical_radius_with(&p, &self.potential, &self.search, &self.template)
    }

    /// `ρ(u)`, cached; infinite in classical mode. Window saturation returns
    /// the window edge and is counted.
    pub fn rho(&self, u: &HPoint) -> Result<f64> {
        if self.is_classical() {
            return Ok(f64::INFINITY);
        }
        let (key, p) = self.quantize(u);
        if let Some(&r) = self.cache.read().expect("rho cache").get(&key) {
            return Ok(r);
        }
        let est = critical_radius_with(&p, &self.potential, &self.search, &self.template)?;
        if est.saturated_high || est.saturated_low {
            self.saturated.fetch_add(1, Ordering::Relaxed);
        }
        self.cache.write().expect("rho cache").insert(key, est.rho);
        Ok(est.rho)
    }

    /// `[1 + r/ρ(u)]^θ`; 1 in classical mode.
    pub fn bracket(&self, u: &HPoint, r: f64, theta: f64) -> Result<f64> {
        if theta == 0.0 || self.is_classical() {
            return Ok(1.0);
        }
        Ok((1.0 + r / self.rho(u)?).powf(theta))
    }

    pub fn set_constants(&self, c0: f64, n0: f64) {
        *self.constants.write().expect("constants") = Some((c0, n0));
    }

    /// Fitted `(C0, N0)`, if any.
    pub fn constants(&self) -> Option<(f64, f64)> {
        *self.constants.read().expect("constants")
    }
}

/// `[1 + r/ρ(u)]^θ`.
pub fn rho_factor(u: &HPoint, r: f64, theta: f64, field: &CriticalRadiusField) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("r", "radius must be positive"));
    }
    field.bracket(u, r, theta)
}

/// Parameter grid for the `(C0, N0)` fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RhoFitGrid {
    pub n0_values: Vec<f64>,
    /// `C0` candidates are `2^{k/steps_per_octave}`, `k = 0..=octaves·steps_per_octave`.
    pub c0_octaves: u32,
    pub c0_steps_per_octave: u32,
    /// How many times the `C0` range may be doubled before giving up.
    pub max_enlargements: u32,
}

impl Default for RhoFitGrid {
    fn default() -> Self {
        Self {
            n0_values: vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0],
            c0_octaves: 12,
            c0_steps_per_octave: 4,
            max_enlargements: 3,
        }
    }
}

/// Fitted comparison constants and their validation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoLemmaFit {
    pub c0: f64,
    pub n0: f64,
    /// Worst `requirement / C0` over calibration pairs (≤ 1 by construction).
    pub calibration_violation: f64,
    /// Worst `requirement / C0` over held-out pairs; pass iff ≤ 1.
    pub max_violation: f64,
    pub c0_axis: Vec<f64>,
    pub n0_axis: Vec<f64>,
    /// `feasible[i][j]` for `c0_axis[i]`, `n0_axis[j]` on the calibration set.
    pub feasible: Vec<Vec<bool>>,
    pub enlargements: u32,
    pub calibration_pairs: usize,
    pub held_out_pairs: usize,
}

/// Smallest `C0` making both sides of the comparison hold for one pair:
/// `ρ(v)/ρ(u) ≤ C0 [1+|v⁻¹u|/ρ(u)]^{N0/(N0+1)}` and
/// `ρ(v)/ρ(u) ≥ C0⁻¹ [1+|v⁻¹u|/ρ(u)]^{-N0}`.
fn pair_requirement(ratio: f64, bracket: f64, n0: f64) -> f64 {
    let upper = ratio / bracket.powf(n0 / (n0 + 1.0));
    let lower = 1.0 / (ratio * bracket.powf(n0));
    upper.max(lower).max(1.0)
}

fn pair_terms(field: &CriticalRadiusField, pairs: &[(HPoint, HPoint)]) -> Result<Vec<(f64, f64)>> {
    pairs
        .iter()
        .map(|(u, v)| {
            let ru = field.rho(u)?;
            let rv = field.rho(v)?;
            Ok((rv / ru, 1.0 + u.distance(v) / ru))
        })
        .collect()
}

/// Fits `(C0, N0)`: the smallest grid `C0` for which some grid `N0` makes
/// every calibration pair feasible, then the smallest such `N0`; validates
/// on held-out pairs. Stores the constants in the field.
pub fn rho_compare_fit(
    field: &CriticalRadiusField,
    calibration: &[(HPoint, HPoint)],
    held_out: &[(HPoint, HPoint)],
    grid: &RhoFitGrid,
) -> Result<RhoLemmaFit> {
    if field.is_classical() {
        return Err(Error::ZeroPotential);
    }
    if calibration.is_empty() || grid.n0_values.is_empty() {
        return Err(invalid("pairs", "need calibration pairs and N0 candidates"));
    }
    let cal = pair_terms(field, calibration)?;
    let held = pair_terms(field, held_out)?;
    let need: Vec<f64> = grid
        .n0_values
        .iter()
        .map(|&n0| cal.iter().map(|&(r, b)| pair_requirement(r, b, n0)).fold(1.0, f64::max))
        .collect();
    let mut octaves = grid.c0_octaves;
    for enlargement in 0..=grid.max_enlargements {
        let steps = octaves * grid.c0_steps_per_octave;
        let c0_axis: Vec<f64> = (0..=steps).map(|k| 2f64.powf(k as f64 / grid.c0_steps_per_octave as f64)).collect();
        let feasible: Vec<Vec<bool>> =
            c0_axis.iter().map(|&c| need.iter().map(|&q| q <= c * (1.0 + 1e-12)).collect()).collect();
        if let Some(i) = feasible.iter().position(|row| row.iter().any(|&b| b)) {
            let j = feasible[i].iter().position(|&b| b).expect("feasible entry");
            let (c0, n0) = (c0_axis[i], grid.n0_values[j]);
            let violation = |set: &[(f64, f64)]| set.iter().map(|&(r, b)| pair_requirement(r, b, n0) / c0).fold(0.0, f64::max);
            field.set_constants(c0, n0);
            return Ok(RhoLemmaFit {
                c0,
                n0,
                calibration_violation: violation(&cal),
                max_violation: violation(&held),
                c0_axis,
                n0_axis: grid.n0_values.clone(),
                feasible,
                enlargements: enlargement,
                calibration_pairs: cal.len(),
                held_out_pairs: held.len(),
            });
        }
        octaves *= 2;
    }
    Err(Error::Hypothesis(format!(
        "no (C0, N0) on the grid satisfies all calibration pairs (C0 up to 2^{octaves})"
    )))
}

/// One case of the doubling-ball comparison check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Com2Case {
    pub u: HPoint,
    pub r: f64,
    pub k: u32,
    pub v: HPoint,
    /// `[1+2^k r/ρ(v)] / (C0⁻¹ [1+r/ρ(u)]^{-N0/(N0+1)} [1+2^k r/ρ(u)])`; holds iff ≥ 1.
    pub margin: f64,
}

/// Checks `[1+2^k r/ρ(v)] ≥ C0⁻¹[1+r/ρ(u)]^{-N0/(N0+1)}[1+2^k r/ρ(u)]` for
/// `v ∈ B(u, 2^k r)` on the given cases.
pub fn com2_spot_check(field: &CriticalRadiusField, c0: f64, n0: f64, cases: &[(HPoint, f64, u32, HPoint)]) -> Result<Vec<Com2Case>> {
    cases
        .iter()
        .map(|(u, r, k, v)| {
            let big = 2f64.powi(*k as i32) * r;
            if u.distance(v) >= big {
                return Err(Error::Hypothesis(format!("v is not in B(u, 2^{k} r)")));
            }
            let (ru, rv) = (field.rho(u)?, field.rho(v)?);
            let lhs = 1.0 + big / rv;
            let rhs = (1.0 + r / ru).powf(-n0 / (n0 + 1.0)) * (1.0 + big / ru) / c0;
            Ok(Com2Case { u: u.clone(), r: *r, k: *k, v: v.clone(), margin: lhs / rhs })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi() -> f64 {
        std::f64::consts::PI
    }

    #[test]
    fn constant_potential_radius_is_exact() {
        let spec = QuadratureSpec::default().with_samples(256);
        for (c, expect) in [(1.0, 2f64.sqrt() / pi()), (4.0, 1.0 / (2f64.sqrt() * pi()))] {
            let v = Potential::constant(1, c).unwrap();
            let est = critical_radius(&HPoint::h1(0.3, 1.0, -2.0), &v, &spec).unwrap();
            assert!((est.rho / expect - 1.0).abs() < 1e-10, "{est:?}");
            let closed = v.closed_form_rho(&HPoint::origin(1)).unwrap();
            assert!((closed / expect - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gauge_square_at_origin() {
        let spec = QuadratureSpec::default().with_samples(1 << 15);
        let v = Potential::gauge_power(1, 1.0, 2.0).unwrap();
        let est = critical_radius(&HPoint::origin(1), &v, &spec).unwrap();
        let exact = v.closed_form_rho(&HPoint::origin(1)).unwrap();
        assert!((exact - (pi() * pi() / 3.0).powf(-0.25)).abs() < 1e-12);
        assert!((est.rho / exact - 1.0).abs() < 0.005, "{est:?} vs {exact}");
    }

    #[test]
    fn window_saturation_flags() {
        let spec = QuadratureSpec::default().with_samples(64);
        let tiny = Potential::constant(1, 1e-12).unwrap();
        assert!(critical_radius(&HPoint::origin(1), &tiny, &spec).unwrap().saturated_high);
        let huge = Potential::constant(1, 1e12).unwrap();
        assert!(critical_radius(&HPoint::origin(1), &huge, &spec).unwrap().saturated_low);
        assert!(matches!(Potential::constant(1, 0.0), Err(Error::ZeroPotential)));
    }

    #[test]
    fn rh_examples() {
        let spec = QuadratureSpec::default().with_samples(4096);
        let balls: Vec<HBall> = [0.5, 1.0, 4.0].iter().map(|&r| HBall::centered(1, r).unwrap()).collect();
        let c = rh_check(&Potential::constant(1, 1.0).unwrap(), 2.0, &balls, &spec).unwrap();
        assert!((c.worst_constant - 1.0).abs() < 1e-12);
        let far = vec![HBall::new(HPoint::h1(10.0, 0.0, 0.0), 1.0).unwrap()];
        let ind = rh_check(&Potential::indicator(HBall::centered(1, 1.0).unwrap()), 2.0, &far, &spec).unwrap();
        assert!(ind.worst_constant.is_infinite());
        let neg = Potential::custom(1, "neg", |_| -1.0);
        assert!(matches!(rh_check(&neg, 2.0, &balls, &spec), Err(Error::NegativePotential { .. })));
    }

    #[test]
    fn classical_bracket_is_one() {
        let field = CriticalRadiusField::classical(1);
        assert_eq!(rho_factor(&HPoint::h1(1.0, 2.0, 3.0), 5.0, 3.0, &field).unwrap(), 1.0);
        let spec = QuadratureSpec::default().with_samples(128);
        let f1 = CriticalRadiusField::new(Potential::constant(1, 1.0).unwrap(), RhoSearch::default(), &spec).unwrap();
        let r = 2f64.sqrt() / pi();
        assert!((rho_factor(&HPoint::origin(1), r, 1.0, &f1).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(rho_factor(&HPoint::origin(1), r, 0.0, &f1).unwrap(), 1.0);
    }

    #[test]
    fn constant_potential_fit_is_trivial() {
        let spec = QuadratureSpec::default().with_samples(128);
        let field = CriticalRadiusField::new(Potential::constant(1, 1.0).unwrap(), RhoSearch::default(), &spec).unwrap();
        let pairs: Vec<(HPoint, HPoint)> = (0..6)
            .map(|i| (HPoint::h1(i as f64, 0.0, 0.0), HPoint::h1(0.0, -(i as f64), 1.0)))
            .collect();
        let fit = rho_compare_fit(&field, &pairs[..3], &pairs[3..], &RhoFitGrid::default()).unwrap();
        assert_eq!(fit.c0, 1.0);
        assert!(fit.max_violation <= 1.0);
        assert_eq!(field.constants(), Some((fit.c0, fit.n0)));
    }
}
