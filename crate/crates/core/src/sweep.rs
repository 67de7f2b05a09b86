//! Input-power optimisation and declarative 1-D parameter sweeps.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    resolve_channel, BeamGeometry, Carrier, ChannelError, ChannelPoint, ExclusionZoneGeometry, Geometry,
};
use crate::rate::{lb_asymptotic, lower_bounds, rate_point, upper_bound, EveNoiseModel, RateError, RateParams, Reconciliation};
use crate::table::{ResultRow, ResultTable, RowFlag};

/// Thermal occupation below which the `n_e -> 0` asymptote is reported for
/// unbounded optima.
const NEGLIGIBLE_NOISE: f64 = 1e-9;

/// A single validation failure: which field, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep specification: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

pub(crate) fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Which bound an optimisation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Direct,
    Reverse,
    /// `max(0, direct, reverse)`.
    Best,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Direct => "direct",
            Scheme::Reverse => "reverse",
            Scheme::Best => "best",
        }
    }
}

/// Coarse log-scan range and refinement tolerance for [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSearch {
    pub lo: f64,
    pub hi: f64,
    pub points_per_decade: usize,
    /// Relative tolerance on the optimal `mu`.
    pub rel_tol: f64,
}

impl Default for MuSearch {
    fn default() -> Self {
        Self {
            lo: 1e-4,
            hi: 1e7,
            points_per_decade: 10,
            rel_tol: 1e-6,
        }
    }
}

impl MuSearch {
    fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.lo.log10(), self.hi.log10());
        let n = ((b - a) * self.points_per_decade as f64).round() as usize;
        (0..=n)
            .map(|k| 10f64.powf(a + (b - a) * k as f64 / n as f64))
            .collect()
    }
}

/// Outcome of an input-power optimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumReport {
    /// Optimal mean photon number; `+inf` when the optimum is unbounded.
    pub mu_star: f64,
    pub rate_at_star: f64,
    pub unbounded: bool,
}

fn objective(base: &RateParams, scheme: Scheme, mu: f64) -> Result<f64, RateError> {
    let (direct, reverse) = lower_bounds(&base.with_mu(mu)?)?;
    Ok(match scheme {
        Scheme::Direct => direct,
        Scheme::Reverse => reverse,
        Scheme::Best => direct.max(reverse).max(0.0),
    })
}

fn asymptote(channel: &ChannelPoint, scheme: Scheme) -> Result<f64, RateError> {
    Ok(match scheme {
        Scheme::Direct => lb_asymptotic(channel, Reconciliation::Direct)?,
        Scheme::Reverse => lb_asymptotic(channel, Reconciliation::Reverse)?,
        Scheme::Best => lb_asymptotic(channel, Reconciliation::Direct)?
            .max(lb_asymptotic(channel, Reconciliation::Reverse)?)
            .max(0.0),
    })
}

/// Maximises the chosen bound over `mu`; `base.mu` is ignored.
///
/// A logarithmic scan brackets the best point, golden-section search refines
/// it in `ln mu`. When the scan peaks at its upper edge with a positive slope
/// over the last decade, `beta = 1`, and the large-`mu` limit is at least
/// the edge value, the optimum is reported as unbounded at that limit.
pub fn optimize_mu(base: &RateParams, scheme: Scheme, search: &MuSearch) -> Result<OptimumReport, RateError> {
    let grid = search.grid();
    let rates = grid
        .iter()
        .map(|&mu| objective(base, scheme, mu))
        .collect::<Result<Vec<_>, _>>()?;

    let (best_idx, best_rate) = rates
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    if best_rate <= 0.0 {
        return Ok(OptimumReport {
            mu_star: 0.0,
            rate_at_star: 0.0,
            unbounded: false,
        });
    }

    let last = grid.len() - 1;
    if best_idx == last && base.beta == 1.0 {
        let decade_back = last.saturating_sub(search.points_per_decade);
        let slope_up = rates[last] > rates[decade_back];
        if slope_up {
            if let Ok(limit) = asymptote(&base.channel, scheme) {
                if limit > rates[last] - 1e-9 {
                    let rate_at_star = if base.channel.n_e < NEGLIGIBLE_NOISE {
                        limit
                    } else {
                        rates[last]
                    };
                    return Ok(OptimumReport {
                        mu_star: f64::INFINITY,
                        rate_at_star,
                        unbounded: true,
                    });
                }
            }
        }
    }

    let lo = grid[best_idx.saturating_sub(1)];
    let hi = grid[(best_idx + 1).min(last)];
    let (mu, rate) = golden_section_max(|mu| objective(base, scheme, mu), lo, hi, search.rel_tol)?;
    let (mu_star, rate_at_star) = if rate >= best_rate {
        (mu, rate)
    } else {
        (grid[best_idx], best_rate)
    };
    Ok(OptimumReport {
        mu_star,
        rate_at_star,
        unbounded: false,
    })
}

/// Golden-section maximisation of `f` over `[lo, hi]` in log space.
fn golden_section_max<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, f64), RateError>
where
    F: Fn(f64) -> Result<f64, RateError>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    let tol = rel_tol.ln_1p();
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp())?;
        }
    }
    Ok(if fc >= fd { (c.exp(), fc) } else { (d.exp(), fd) })
}

/// Geometry fields in the units used by run configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometrySpec {
    ExclusionZone {
        r_a_m: f64,
        r_b_m: f64,
        r_ex_m: f64,
        l_km: f64,
    },
    Beam {
        w0_m: f64,
        r_a_m: f64,
        r_b_m: f64,
        r_e_m: f64,
        r_ex_m: f64,
        l_km: f64,
        /// `None` means tangent to the exclusion zone.
        eve_offset_m: Option<f64>,
    },
}

impl GeometrySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeometrySpec::ExclusionZone { .. } => "exclusion_zone",
            GeometrySpec::Beam { .. } => "beam",
        }
    }

    pub fn resolve(&self) -> Result<Geometry, ChannelError> {
        Ok(match *self {
            GeometrySpec::ExclusionZone {
                r_a_m,
                r_b_m,
                r_ex_m,
                l_km,
            } => Geometry::ExclusionZone(ExclusionZoneGeometry::new(r_a_m, r_b_m, r_ex_m, l_km * 1e3)?),
            GeometrySpec::Beam {
                w0_m,
                r_a_m,
                r_b_m,
                r_e_m,
                r_ex_m,
                l_km,
                eve_offset_m,
            } => Geometry::Beam(BeamGeometry::new(
                w0_m,
                r_a_m,
                r_b_m,
                r_e_m,
                r_ex_m,
                l_km * 1e3,
                eve_offset_m,
            )?),
        })
    }

    fn set_distance(&mut self, km: f64) {
        match self {
            GeometrySpec::ExclusionZone { l_km, .. } | GeometrySpec::Beam { l_km, .. } => *l_km = km,
        }
    }

    fn set_exclusion_radius(&mut self, m: f64) {
        match self {
            GeometrySpec::ExclusionZone { r_ex_m, .. } | GeometrySpec::Beam { r_ex_m, .. } => *r_ex_m = m,
        }
    }
}

/// Carrier in configuration units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CarrierSpec {
    WavelengthNm(f64),
    FrequencyHz(f64),
}

impl CarrierSpec {
    pub fn carrier(&self) -> Carrier {
        match *self {
            CarrierSpec::WavelengthNm(nm) => Carrier::Wavelength(nm * 1e-9),
            CarrierSpec::FrequencyHz(hz) => Carrier::Frequency(hz),
        }
    }
}

/// Complete physical parameter record for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParams {
    pub geometry: GeometrySpec,
    pub carrier: CarrierSpec,
    pub temperature_k: f64,
    pub beta: f64,
    pub eve_noise_model: EveNoiseModel,
    /// Input power, when not optimised or swept.
    pub mu: Option<f64>,
    /// Replaces the geometric `kappa` (e.g. `1` for an unrestricted Eve).
    pub kappa_override: Option<f64>,
}

impl FixedParams {
    pub fn channel(&self) -> Result<ChannelPoint, ChannelError> {
        let point = resolve_channel(&self.geometry.resolve()?, self.carrier.carrier(), self.temperature_k)?;
        match self.kappa_override {
            Some(k) => point.with_kappa(k),
            None => Ok(point),
        }
    }

    /// Rate parameters at `mu` on this record's channel.
    pub fn rate_params(&self, mu: f64) -> Result<RateParams, RateError> {
        RateParams::new(mu, self.beta, self.channel()?, self.eve_noise_model)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        fn positive(out: &mut Vec<Violation>, field: &str, v: f64) {
            if !(v > 0.0 && v.is_finite()) {
                out.push(Violation::new(field, format!("must be positive, got {v}")));
            }
        }
        match self.geometry {
            GeometrySpec::ExclusionZone {
                r_a_m,
                r_b_m,
                r_ex_m,
                l_km,
            } => {
                positive(&mut out, "r_a_m", r_a_m);
                positive(&mut out, "r_b_m", r_b_m);
                positive(&mut out, "r_ex_m", r_ex_m);
                positive(&mut out, "L_km", l_km);
            }
            GeometrySpec::Beam {
                w0_m,
                r_a_m,
                r_b_m,
                r_e_m,
                r_ex_m,
                l_km,
                eve_offset_m,
            } => {
                positive(&mut out, "w0_m", w0_m);
                positive(&mut out, "r_a_m", r_a_m);
                positive(&mut out, "r_b_m", r_b_m);
                positive(&mut out, "r_e_m", r_e_m);
                positive(&mut out, "r_ex_m", r_ex_m);
                positive(&mut out, "L_km", l_km);
                if let Some(off) = eve_offset_m {
                    if off < r_ex_m + r_e_m {
                        out.push(Violation::new(
                            "eve_offset_m",
                            format!("{off} places Eve inside the exclusion zone (needs >= r_ex_m + r_e_m)"),
                        ));
                    }
                }
            }
        }
        match self.carrier {
            CarrierSpec::WavelengthNm(v) => positive(&mut out, "lambda_nm", v),
            CarrierSpec::FrequencyHz(v) => positive(&mut out, "frequency_hz", v),
        }
        positive(&mut out, "temperature_k", self.temperature_k);
        let (r_b, r_ex) = match self.geometry {
            GeometrySpec::ExclusionZone { r_b_m, r_ex_m, .. } | GeometrySpec::Beam { r_b_m, r_ex_m, .. } => {
                (r_b_m, r_ex_m)
            }
        };
        if r_ex < r_b {
            out.push(Violation::new(
                "r_ex_m",
                format!("exclusion zone radius {r_ex} must be >= Bob's aperture radius r_b_m = {r_b}"),
            ));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            out.push(Violation::new("beta", format!("must be in (0, 1], got {}", self.beta)));
        }
        if let Some(mu) = self.mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                out.push(Violation::new("mu", format!("must be >= 0, got {mu}")));
            }
        }
        if let Some(k) = self.kappa_override {
            if !(0.0..=1.0).contains(&k) {
                out.push(Violation::new("kappa_override", format!("must be in [0, 1], got {k}")));
            }
        }
        out
    }
}

/// The swept parameter. Grid values use the axis units in [`Self::unit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    Mu,
    Distance,
    Frequency,
    ExclusionRadius,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::Mu => "mu",
            SweepVariable::Distance => "distance",
            SweepVariable::Frequency => "frequency",
            SweepVariable::ExclusionRadius => "exclusion_radius",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            SweepVariable::Mu => "photons",
            SweepVariable::Distance => "km",
            SweepVariable::Frequency => "Hz",
            SweepVariable::ExclusionRadius => "m",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mu" => SweepVariable::Mu,
            "distance" => SweepVariable::Distance,
            "frequency" => SweepVariable::Frequency,
            "exclusion_radius" => SweepVariable::ExclusionRadius,
            _ => return None,
        })
    }
}

/// Curve a sweep is meant to display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeColumn {
    Direct,
    Reverse,
    Best,
    Upper,
}

impl SchemeColumn {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeColumn::Direct => "direct",
            SchemeColumn::Reverse => "reverse",
            SchemeColumn::Best => "best",
            SchemeColumn::Upper => "upper",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "direct" => SchemeColumn::Direct,
            "reverse" => SchemeColumn::Reverse,
            "best" => SchemeColumn::Best,
            "upper" => SchemeColumn::Upper,
            _ => return None,
        })
    }
}

/// A 1-D scan over one parameter with everything else fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub label: Option<String>,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub fixed: FixedParams,
    pub optimize_mu: bool,
    pub schemes: Vec<SchemeColumn>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let mut out = self.fixed.validate();
        if self.grid.len() < 2 {
            out.push(Violation::new("grid", format!("needs at least 2 points, got {}", self.grid.len())));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            out.push(Violation::new("grid", "values must be finite"));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            out.push(Violation::new("grid", "values must be strictly increasing"));
        }
        let min = self.grid.first().copied().unwrap_or(0.0);
        match self.variable {
            SweepVariable::Mu if min < 0.0 => out.push(Violation::new("grid", "mu values must be >= 0")),
            SweepVariable::Distance | SweepVariable::Frequency if min <= 0.0 => {
                out.push(Violation::new("grid", format!("{} values must be > 0", self.variable.as_str())))
            }
            SweepVariable::ExclusionRadius => {
                let r_b = match self.fixed.geometry {
                    GeometrySpec::ExclusionZone { r_b_m, .. } | GeometrySpec::Beam { r_b_m, .. } => r_b_m,
                };
                if min < r_b {
                    out.push(Violation::new(
                        "grid",
                        format!("exclusion radius {min} is smaller than r_b_m = {r_b}"),
                    ));
                }
            }
            _ => {}
        }
        if self.variable == SweepVariable::Mu && self.optimize_mu {
            out.push(Violation::new("optimize_mu", "cannot optimise mu while sweeping it"));
        }
        if self.variable != SweepVariable::Mu && !self.optimize_mu && self.fixed.mu.is_none() {
            out.push(Violation::new("mu", "required unless optimize_mu is set or mu is swept"));
        }
        if self.schemes.is_empty() {
            out.push(Violation::new("schemes", "at least one scheme is required"));
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(SweepError::Invalid(out))
        }
    }

    /// The fixed record with the swept variable set to `value`.
    pub fn params_at(&self, value: f64) -> FixedParams {
        let mut p = self.fixed;
        match self.variable {
            SweepVariable::Mu => p.mu = Some(value),
            SweepVariable::Distance => p.geometry.set_distance(value),
            SweepVariable::Frequency => p.carrier = CarrierSpec::FrequencyHz(value),
            SweepVariable::ExclusionRadius => p.geometry.set_exclusion_radius(value),
        }
        p
    }
}

/// Evaluation of one operating point, optionally optimising `mu` separately
/// for each reconciliation direction.
pub fn evaluate_point(params: &FixedParams, optimize: bool, search: &MuSearch) -> Result<ResultRow, RateError> {
    let channel = params.channel()?;
    let mut flags = Vec::new();
    let base = RateParams::new(params.mu.unwrap_or(0.0), params.beta, channel, params.eve_noise_model)?;
    let ub = upper_bound(&channel)?;
    let (lb_direct, lb_reverse, mu_used) = if optimize {
        let direct = optimize_mu(&base, Scheme::Direct, search)?;
        let reverse = optimize_mu(&base, Scheme::Reverse, search)?;
        let winner = if direct.rate_at_star > reverse.rate_at_star {
            direct
        } else {
            reverse
        };
        if winner.unbounded {
            flags.push(RowFlag::Unbounded);
        }
        (direct.rate_at_star, reverse.rate_at_star, winner.mu_star)
    } else {
        let r = rate_point(&base)?;
        (r.lb_direct, r.lb_reverse, base.mu)
    };
    if ub.is_infinite() {
        flags.push(RowFlag::UpperBoundDiverged);
    }
    flags.push(RowFlag::SurrogateUpperBound);
    Ok(ResultRow {
        var: 0.0,
        channel: Some(channel),
        lb_direct,
        lb_reverse,
        lb_best: lb_direct.max(lb_reverse).max(0.0),
        ub,
        mu_used,
        flags,
    })
}

/// How many worker threads a sweep may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Rayon's global pool.
    #[default]
    Auto,
    Threads(usize),
}

impl Parallelism {
    /// `0` means automatic.
    pub fn from_count(n: usize) -> Self {
        if n == 0 {
            Parallelism::Auto
        } else {
            Parallelism::Threads(n)
        }
    }
}

/// Evaluates every grid point. Points whose channel cannot be evaluated
/// (far-field violation, degenerate geometry) become error rows; rows keep
/// grid order regardless of parallelism.
pub fn run_sweep(spec: &SweepSpec, parallelism: Parallelism) -> Result<ResultTable, SweepError> {
    spec.validate()?;
    let search = MuSearch::default();
    let eval = |&value: &f64| {
        let params = spec.params_at(value);
        match evaluate_point(&params, spec.optimize_mu, &search) {
            Ok(mut row) => {
                row.var = value;
                row
            }
            Err(e) => ResultRow::error(value, error_kind(&e)),
        }
    };
    let rows: Vec<ResultRow> = match parallelism {
        Parallelism::Auto => spec.grid.par_iter().map(eval).collect(),
        Parallelism::Threads(1) => spec.grid.iter().map(eval).collect(),
        Parallelism::Threads(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SweepError::ThreadPool(e.to_string()))?
            .install(|| spec.grid.par_iter().map(eval).collect()),
    };
    Ok(ResultTable {
        variable: spec.variable,
        comments: Vec::new(),
        rows,
    })
}

fn error_kind(e: &RateError) -> String {
    match e {
        RateError::Channel(ChannelError::FarFieldViolation { .. }) => "far_field".into(),
        RateError::Channel(ChannelError::DegenerateChannel { .. }) => "degenerate".into(),
        RateError::Channel(ChannelError::Quadrature(_)) => "quadrature".into(),
        RateError::Gaussian(_) => "numerical".into(),
        _ => "domain".into(),
    }
}
