//! `key = value` run configurations.
//!
//! Blank lines and `#` comments are ignored. Unknown, duplicate, missing or
//! inapplicable keys are all reported at once.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::rate::EveNoiseModel;
use crate::sweep::{
    join_violations, CarrierSpec, FixedParams, GeometrySpec, Scheme, SchemeColumn, SweepError, SweepSpec,
    SweepVariable, Violation,
};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration: {}", join_violations(.0))]
pub struct ConfigError(pub Vec<Violation>);

impl From<SweepError> for ConfigError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Invalid(v) => ConfigError(v),
            other => ConfigError(vec![Violation::new("sweep", other.to_string())]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Rate,
    Sweep,
    Optimize,
    Figure,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Rate => "rate",
            Mode::Sweep => "sweep",
            Mode::Optimize => "optimize",
            Mode::Figure => "figure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Sweep grid, kept in the form it was written so it serialises back.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        spacing: Spacing,
    },
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GridSpec::Values(ref v) => v.clone(),
            GridSpec::Range {
                start,
                stop,
                points,
                spacing,
            } => {
                if points < 2 {
                    return vec![start; points];
                }
                let (a, b) = match spacing {
                    Spacing::Linear => (start, stop),
                    Spacing::Log => (start.log10(), stop.log10()),
                };
                let mut out: Vec<f64> = (0..points)
                    .map(|k| {
                        let t = a + (b - a) * k as f64 / (points - 1) as f64;
                        match spacing {
                            Spacing::Linear => t,
                            Spacing::Log => 10f64.powf(t),
                        }
                    })
                    .collect();
                out[0] = start;
                out[points - 1] = stop;
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub grid: GridSpec,
    pub optimize_mu: bool,
    pub schemes: Vec<SchemeColumn>,
    pub label: Option<String>,
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub fixed: FixedParams,
    /// Target of `optimize`.
    pub scheme: Scheme,
    pub sweep: Option<SweepConfig>,
    pub output: Option<String>,
}

const DEFAULT_SCHEMES: [SchemeColumn; 4] = [
    SchemeColumn::Direct,
    SchemeColumn::Reverse,
    SchemeColumn::Best,
    SchemeColumn::Upper,
];

const KNOWN_KEYS: &[&str] = &[
    "mode",
    "geometry",
    "r_a_m",
    "r_b_m",
    "r_ex_m",
    "r_e_m",
    "w0_m",
    "eve_offset_m",
    "L_km",
    "lambda_nm",
    "frequency_hz",
    "temperature_k",
    "beta",
    "eve_noise_model",
    "mu",
    "kappa_override",
    "scheme",
    "sweep_var",
    "sweep_values",
    "sweep_start",
    "sweep_stop",
    "sweep_points",
    "sweep_spacing",
    "optimize_mu",
    "schemes",
    "label",
    "output",
];

const BEAM_ONLY: &[&str] = &["w0_m", "r_e_m", "eve_offset_m"];
const SWEEP_ONLY: &[&str] = &[
    "sweep_values",
    "sweep_start",
    "sweep_stop",
    "sweep_points",
    "sweep_spacing",
    "optimize_mu",
    "schemes",
    "label",
];

struct Entries {
    map: BTreeMap<String, (String, usize)>,
    problems: Vec<Violation>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn at(&self, key: &str) -> String {
        match self.map.get(key) {
            Some((_, line)) => format!("{key} (line {line})"),
            None => key.to_string(),
        }
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        let raw = self.raw(key)?.to_string();
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                let at = self.at(key);
                self.problems.push(Violation::new(at, format!("expected a finite number, got {raw:?}")));
                None
            }
        }
    }

    fn required_float(&mut self, key: &str) -> f64 {
        if self.map.contains_key(key) {
            self.float(key).unwrap_or(f64::NAN)
        } else {
            self.problems.push(Violation::new(key, "missing required key"));
            f64::NAN
        }
    }

    fn choice<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, expected: &str) -> Option<T> {
        let raw = self.raw(key)?.to_string();
        let v = parse(&raw);
        if v.is_none() {
            let at = self.at(key);
            self.problems
                .push(Violation::new(at, format!("expected one of {expected}, got {raw:?}")));
        }
        v
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_mode(s: &str) -> Option<Mode> {
    Some(match s {
        "rate" => Mode::Rate,
        "sweep" => Mode::Sweep,
        "optimize" => Mode::Optimize,
        "figure" => Mode::Figure,
        _ => return None,
    })
}

fn parse_scheme(s: &str) -> Option<Scheme> {
    Some(match s {
        "direct" => Scheme::Direct,
        "reverse" => Scheme::Reverse,
        "best" => Scheme::Best,
        _ => return None,
    })
}

fn parse_noise_model(s: &str) -> Option<EveNoiseModel> {
    Some(match s {
        "consistent" => EveNoiseModel::Consistent,
        "printed" => EveNoiseModel::Printed,
        _ => return None,
    })
}

/// Parses configuration text and validates the resulting parameters.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries = Entries {
        map: BTreeMap::new(),
        problems: Vec::new(),
    };
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            entries
                .problems
                .push(Violation::new(format!("line {lineno}"), "expected key = value"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            entries
                .problems
                .push(Violation::new(format!("{key} (line {lineno})"), "unknown key"));
            continue;
        }
        if let Some((_, first)) = entries.map.get(key) {
            let msg = format!("duplicate key, first set on line {first}");
            entries.problems.push(Violation::new(format!("{key} (line {lineno})"), msg));
            continue;
        }
        entries.map.insert(key.to_string(), (value.to_string(), lineno));
    }

    let mode = entries.choice("mode", parse_mode, "rate, sweep, optimize, figure");
    let is_beam = match entries.raw("geometry") {
        None => {
            entries.problems.push(Violation::new("geometry", "missing required key"));
            false
        }
        Some("beam") => true,
        Some("exclusion_zone") => false,
        Some(other) => {
            let msg = format!("expected one of exclusion_zone, beam, got {other:?}");
            let at = entries.at("geometry");
            entries.problems.push(Violation::new(at, msg));
            false
        }
    };

    let r_a_m = entries.required_float("r_a_m");
    let r_b_m = entries.required_float("r_b_m");
    let r_ex_m = entries.required_float("r_ex_m");
    let l_km = entries.required_float("L_km");
    let geometry = if is_beam {
        GeometrySpec::Beam {
            w0_m: entries.required_float("w0_m"),
            r_a_m,
            r_b_m,
            r_e_m: entries.required_float("r_e_m"),
            r_ex_m,
            l_km,
            eve_offset_m: entries.float("eve_offset_m"),
        }
    } else {
        for key in BEAM_ONLY {
            if entries.map.contains_key(*key) {
                let at = entries.at(key);
                entries
                    .problems
                    .push(Violation::new(at, "only applies to geometry = beam"));
            }
        }
        GeometrySpec::ExclusionZone {
            r_a_m,
            r_b_m,
            r_ex_m,
            l_km,
        }
    };

    let carrier = match (entries.float("lambda_nm"), entries.float("frequency_hz")) {
        (Some(_), Some(_)) => {
            entries
                .problems
                .push(Violation::new("lambda_nm", "give either lambda_nm or frequency_hz, not both"));
            CarrierSpec::WavelengthNm(f64::NAN)
        }
        (Some(nm), None) => CarrierSpec::WavelengthNm(nm),
        (None, Some(hz)) => CarrierSpec::FrequencyHz(hz),
        (None, None) => {
            if !entries.map.contains_key("lambda_nm") && !entries.map.contains_key("frequency_hz") {
                entries
                    .problems
                    .push(Violation::new("lambda_nm", "one of lambda_nm or frequency_hz is required"));
            }
            CarrierSpec::WavelengthNm(f64::NAN)
        }
    };

    let fixed = FixedParams {
        geometry,
        carrier,
        temperature_k: entries.float("temperature_k").unwrap_or(crate::channel::SPACE_TEMPERATURE),
        beta: entries.float("beta").unwrap_or(1.0),
        eve_noise_model: entries
            .choice("eve_noise_model", parse_noise_model, "consistent, printed")
            .unwrap_or_default(),
        mu: entries.float("mu"),
        kappa_override: entries.float("kappa_override"),
    };
    let scheme = entries
        .choice("scheme", parse_scheme, "direct, reverse, best")
        .unwrap_or(Scheme::Best);
    let output = entries.raw("output").map(str::to_string);
    let sweep = parse_sweep(&mut entries);

    let mut problems = entries.problems;
    // Field-level checks only make sense once every field parsed.
    if problems.is_empty() {
        problems.extend(fixed.validate());
    }
    let config = RunConfig {
        mode,
        fixed,
        scheme,
        sweep,
        output,
    };
    if problems.is_empty() {
        if let Some(spec) = config.sweep_spec() {
            if let Err(e) = spec.validate() {
                problems.extend(ConfigError::from(e).0);
            }
        }
    }
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError(problems))
    }
}

fn parse_sweep(entries: &mut Entries) -> Option<SweepConfig> {
    if !entries.map.contains_key("sweep_var") {
        for key in SWEEP_ONLY {
            if entries.map.contains_key(*key) {
                let at = entries.at(key);
                entries.problems.push(Violation::new(at, "requires sweep_var"));
            }
        }
        return None;
    }
    let variable = entries.choice(
        "sweep_var",
        SweepVariable::parse,
        "mu, distance, frequency, exclusion_radius",
    );
    let range_keys = ["sweep_start", "sweep_stop", "sweep_points", "sweep_spacing"];
    let has_range = range_keys.iter().any(|k| entries.map.contains_key(*k));
    let grid = match (entries.raw("sweep_values").map(str::to_string), has_range) {
        (Some(_), true) => {
            entries
                .problems
                .push(Violation::new("sweep_values", "cannot be combined with sweep_start/stop/points"));
            None
        }
        (Some(list), false) => {
            let parsed: Result<Vec<f64>, _> = list.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) => Some(GridSpec::Values(v)),
                Err(_) => {
                    let at = entries.at("sweep_values");
                    entries
                        .problems
                        .push(Violation::new(at, format!("expected comma-separated numbers, got {list:?}")));
                    None
                }
            }
        }
        (None, _) => {
            let start = entries.required_float("sweep_start");
            let stop = entries.required_float("sweep_stop");
            let points = match entries.raw("sweep_points").map(str::to_string) {
                None => {
                    entries.problems.push(Violation::new("sweep_points", "missing required key"));
                    0
                }
                Some(raw) => raw.parse::<usize>().unwrap_or_else(|_| {
                    let at = entries.at("sweep_points");
                    entries
                        .problems
                        .push(Violation::new(at, format!("expected a positive integer, got {raw:?}")));
                    0
                }),
            };
            let spacing = entries
                .choice(
                    "sweep_spacing",
                    |s| match s {
                        "linear" => Some(Spacing::Linear),
                        "log" => Some(Spacing::Log),
                        _ => None,
                    },
                    "linear, log",
                )
                .unwrap_or(Spacing::Linear);
            if spacing == Spacing::Log && (start <= 0.0 || stop <= 0.0) {
                entries
                    .problems
                    .push(Violation::new("sweep_start", "log spacing needs positive endpoints"));
            }
            Some(GridSpec::Range {
                start,
                stop,
                points,
                spacing,
            })
        }
    };
    let optimize_mu = entries
        .choice("optimize_mu", parse_bool, "true, false")
        .unwrap_or(false);
    let schemes = match entries.raw("schemes").map(str::to_string) {
        None => DEFAULT_SCHEMES.to_vec(),
        Some(list) => list
            .split(',')
            .filter_map(|s| {
                let s = s.trim();
                let v = SchemeColumn::parse(s);
                if v.is_none() {
                    let at = entries.at("schemes");
                    let msg = format!("unknown scheme {s:?}; expected direct, reverse, best, upper");
                    entries.problems.push(Violation::new(at, msg));
                }
                v
            })
            .collect(),
    };
    let label = entries.raw("label").map(str::to_string);
    Some(SweepConfig {
        variable: variable?,
        grid: grid?,
        optimize_mu,
        schemes,
        label,
    })
}

impl RunConfig {
    /// The sweep this configuration describes, if it has one.
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        let s = self.sweep.as_ref()?;
        Some(SweepSpec {
            label: s.label.clone(),
            variable: s.variable,
            grid: s.grid.values(),
            fixed: self.fixed,
            optimize_mu: s.optimize_mu,
            schemes: s.schemes.clone(),
        })
    }

    /// Serialises back to configuration text that parses to an equal value.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(m) = self.mode {
            kv("mode", m.as_str().into());
        }
        kv("geometry", self.fixed.geometry.kind().into());
        match self.fixed.geometry {
            GeometrySpec::ExclusionZone {
                r_a_m,
                r_b_m,
                r_ex_m,
                l_km,
            } => {
                kv("r_a_m", num(r_a_m));
                kv("r_b_m", num(r_b_m));
                kv("r_ex_m", num(r_ex_m));
                kv("L_km", num(l_km));
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
                kv("w0_m", num(w0_m));
                kv("r_a_m", num(r_a_m));
                kv("r_b_m", num(r_b_m));
                kv("r_e_m", num(r_e_m));
                kv("r_ex_m", num(r_ex_m));
                kv("L_km", num(l_km));
                if let Some(off) = eve_offset_m {
                    kv("eve_offset_m", num(off));
                }
            }
        }
        match self.fixed.carrier {
            CarrierSpec::WavelengthNm(nm) => kv("lambda_nm", num(nm)),
            CarrierSpec::FrequencyHz(hz) => kv("frequency_hz", num(hz)),
        }
        kv("temperature_k", num(self.fixed.temperature_k));
        kv("beta", num(self.fixed.beta));
        kv("eve_noise_model", self.fixed.eve_noise_model.as_str().into());
        if let Some(mu) = self.fixed.mu {
            kv("mu", num(mu));
        }
        if let Some(k) = self.fixed.kappa_override {
            kv("kappa_override", num(k));
        }
        kv("scheme", self.scheme.as_str().into());
        if let Some(s) = &self.sweep {
            kv("sweep_var", s.variable.as_str().into());
            match &s.grid {
                GridSpec::Values(v) => kv("sweep_values", v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ")),
                GridSpec::Range {
                    start,
                    stop,
                    points,
                    spacing,
                } => {
                    kv("sweep_start", num(*start));
                    kv("sweep_stop", num(*stop));
                    kv("sweep_points", points.to_string());
                    kv(
                        "sweep_spacing",
                        match spacing {
                            Spacing::Linear => "linear",
                            Spacing::Log => "log",
                        }
                        .into(),
                    );
                }
            }
            kv("optimize_mu", s.optimize_mu.to_string());
            kv(
                "schemes",
                s.schemes.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(","),
            );
            if let Some(l) = &s.label {
                kv("label", l.clone());
            }
        }
        if let Some(o) = &self.output {
            kv("output", o.clone());
        }
        out
    }
}

/// Shortest exact decimal, in exponent form outside `[1e-3, 1e7)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EZ: &str = "\
# far-field scenario
geometry = exclusion_zone
r_a_m = 0.05
r_b_m = 0.05
r_ex_m = 0.1   # trailing comment
L_km = 100
lambda_nm = 1550
mu = 10
";

    fn problems(text: &str) -> Vec<String> {
        parse_config(text).unwrap_err().0.into_iter().map(|v| v.to_string()).collect()
    }

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = parse_config(EZ).unwrap();
        assert_eq!(c.fixed.beta, 1.0);
        assert_eq!(c.fixed.temperature_k, 3.0);
        assert_eq!(c.fixed.eve_noise_model, EveNoiseModel::Consistent);
        assert_eq!(c.fixed.mu, Some(10.0));
        assert_eq!(c.scheme, Scheme::Best);
        assert!(c.sweep.is_none());
        assert_eq!(c.fixed.carrier, CarrierSpec::WavelengthNm(1550.0));
    }

    #[test]
    fn reports_all_key_problems() {
        let text = format!("{EZ}mu = 3\nfoo = 1\nw0_m = 0.05\nfrequency_hz = 1e14\n");
        let p = problems(&text);
        assert!(p.iter().any(|s| s.contains("duplicate")), "{p:?}");
        assert!(p.iter().any(|s| s.contains("foo") && s.contains("unknown")), "{p:?}");
        assert!(p.iter().any(|s| s.contains("w0_m") && s.contains("beam")), "{p:?}");
        assert!(p.iter().any(|s| s.contains("not both")), "{p:?}");
    }

    #[test]
    fn reports_missing_keys() {
        let p = problems("geometry = beam\nlambda_nm = 1550\n");
        for key in ["r_a_m", "r_b_m", "r_ex_m", "L_km", "w0_m", "r_e_m"] {
            assert!(p.iter().any(|s| s.starts_with(key)), "{key}: {p:?}");
        }
    }

    #[test]
    fn rejects_zone_smaller_than_bob() {
        let p = problems(&EZ.replace("r_ex_m = 0.1", "r_ex_m = 0.01"));
        assert!(p.iter().any(|s| s.starts_with("r_ex_m")), "{p:?}");
    }

    #[test]
    fn rejects_bad_values() {
        let p = problems(&EZ.replace("mu = 10", "mu = lots\nbeta = 2"));
        assert!(p.iter().any(|s| s.starts_with("mu")), "{p:?}");
        let p = problems(&EZ.replace("mu = 10", "beta = 2"));
        assert!(p.iter().any(|s| s.starts_with("beta")), "{p:?}");
        let p = problems(&format!("{EZ}optimize_mu = true\n"));
        assert!(p.iter().any(|s| s.contains("requires sweep_var")), "{p:?}");
    }

    #[test]
    fn sweep_grids() {
        let lin = GridSpec::Range {
            start: 2.0,
            stop: 100.0,
            points: 50,
            spacing: Spacing::Linear,
        };
        let v = lin.values();
        assert_eq!(v.len(), 50);
        assert!((v[1] - 4.0).abs() < 1e-12);
        assert_eq!(v[49], 100.0);
        let log = GridSpec::Range {
            start: 1e-2,
            stop: 1e6,
            points: 9,
            spacing: Spacing::Log,
        };
        let v = log.values();
        assert!((v[1] - 0.1).abs() < 1e-15);
        assert_eq!(v[8], 1e6);
    }

    #[test]
    fn sweep_config_round_trips() {
        let text = format!(
            "{}sweep_var = distance\nsweep_start = 2\nsweep_stop = 100\nsweep_points = 50\n\
             optimize_mu = true\nschemes = best,upper\nlabel = test curve\n",
            EZ.replace("mu = 10\n", "")
        );
        let c = parse_config(&text).unwrap();
        let s = c.sweep.as_ref().unwrap();
        assert_eq!(s.schemes, vec![SchemeColumn::Best, SchemeColumn::Upper]);
        assert_eq!(s.label.as_deref(), Some("test curve"));
        assert_eq!(parse_config(&c.to_config_string()).unwrap(), c);
    }

    #[test]
    fn sweep_spec_validation_surfaces() {
        let text = format!("{EZ}sweep_var = mu\nsweep_values = 1, 0.5\n");
        let p = problems(&text);
        assert!(p.iter().any(|s| s.contains("increasing")), "{p:?}");
    }

    #[test]
    fn number_formatting_round_trips() {
        for x in [0.05, 1550.0, 1e-9, 3.0e14, 1.0 / 3.0, 1e7, 0.001] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
