//! Curve families behind each published figure.
//!
//! Captions leave some values open. Those chosen here are listed in each
//! preset's `notes` and emitted as CSV comments.

use crate::config::{GridSpec, Mode, RunConfig, Spacing, SweepConfig};
use crate::rate::EveNoiseModel;
use crate::sweep::{CarrierSpec, FixedParams, GeometrySpec, Scheme, SchemeColumn, SweepVariable};

pub const FIGURE_IDS: [&str; 10] = [
    "fig2", "fig3", "fig4", "fig5", "fig10", "fig11", "fig12", "fig13", "fig14", "fig15",
];

/// All curves of one figure plus the assumptions behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: &'static str,
    pub title: &'static str,
    pub notes: Vec<&'static str>,
    pub curves: Vec<RunConfig>,
}

const APERTURE: f64 = 0.05;
const LAMBDA_NM: f64 = 1550.0;

fn zone(r_ex_m: f64, l_km: f64) -> GeometrySpec {
    GeometrySpec::ExclusionZone {
        r_a_m: APERTURE,
        r_b_m: APERTURE,
        r_ex_m,
        l_km,
    }
}

fn beam(r_ex_m: f64, l_km: f64) -> GeometrySpec {
    GeometrySpec::Beam {
        w0_m: APERTURE,
        r_a_m: APERTURE,
        r_b_m: APERTURE,
        r_e_m: APERTURE,
        r_ex_m,
        l_km,
        eve_offset_m: None,
    }
}

fn fixed(geometry: GeometrySpec, beta: f64) -> FixedParams {
    FixedParams {
        geometry,
        carrier: CarrierSpec::WavelengthNm(LAMBDA_NM),
        temperature_k: crate::channel::SPACE_TEMPERATURE,
        beta,
        eve_noise_model: EveNoiseModel::Consistent,
        mu: None,
        kappa_override: None,
    }
}

fn log_grid(start: f64, stop: f64) -> GridSpec {
    GridSpec::Range {
        start,
        stop,
        points: 50,
        spacing: Spacing::Log,
    }
}

fn lin_grid(start: f64, stop: f64) -> GridSpec {
    GridSpec::Range {
        start,
        stop,
        points: 50,
        spacing: Spacing::Linear,
    }
}

fn curve(
    label: String,
    fixed: FixedParams,
    variable: SweepVariable,
    grid: GridSpec,
    schemes: &[SchemeColumn],
) -> RunConfig {
    RunConfig {
        mode: Some(Mode::Figure),
        fixed,
        scheme: Scheme::Best,
        sweep: Some(SweepConfig {
            variable,
            grid,
            optimize_mu: variable != SweepVariable::Mu,
            schemes: schemes.to_vec(),
            label: Some(label),
        }),
        output: None,
    }
}

use SchemeColumn::{Best, Direct, Reverse, Upper};

fn mu_family(beta: f64) -> Vec<RunConfig> {
    [APERTURE, APERTURE + 0.05]
        .iter()
        .map(|&r_ex| {
            curve(
                format!("r_ex = {r_ex} m, L = 100 km, beta = {beta}"),
                fixed(zone(r_ex, 100.0), beta),
                SweepVariable::Mu,
                log_grid(1e-2, 1e6),
                &[Direct, Reverse],
            )
        })
        .collect()
}

fn beam_mu_family(l_km: f64, beta: f64) -> Vec<RunConfig> {
    [APERTURE, 0.5]
        .iter()
        .map(|&r_ex| {
            curve(
                format!("r_ex = {r_ex} m, L = {l_km} km, beta = {beta}"),
                fixed(beam(r_ex, l_km), beta),
                SweepVariable::Mu,
                log_grid(1e-2, 1e6),
                &[Direct, Reverse],
            )
        })
        .collect()
}

/// Two exclusion radii plus the unrestricted-Eve reference (`kappa = 1`).
fn beam_optimized_family(variable: SweepVariable, grid: GridSpec, l_km: f64, schemes: &[SchemeColumn]) -> Vec<RunConfig> {
    let mut out: Vec<RunConfig> = [APERTURE, 0.5]
        .iter()
        .map(|&r_ex| {
            curve(
                format!("r_ex = {r_ex} m"),
                fixed(beam(r_ex, l_km), 1.0),
                variable,
                grid.clone(),
                schemes,
            )
        })
        .collect();
    let mut unrestricted = fixed(beam(APERTURE, l_km), 1.0);
    unrestricted.kappa_override = Some(1.0);
    out.push(curve("unrestricted Eve (kappa = 1)".into(), unrestricted, variable, grid, schemes));
    out
}

const ASSUMED_RADII: &str = "aperture radii r_a = r_b = 0.05 m (not stated in the caption)";
const OPT_MU: &str = "input power optimised per point; unbounded optima report the large-mu limit";

/// The preset for `id`, or `None` for an unknown id.
pub fn figure_preset(id: &str) -> Option<FigurePreset> {
    let p = match id {
        "fig2" => FigurePreset {
            id: "fig2",
            title: "SKR lower bound vs input power, beta = 1",
            notes: vec![ASSUMED_RADII, "mu grid 1e-2..1e6, 50 log-spaced points"],
            curves: mu_family(1.0),
        },
        "fig3" => FigurePreset {
            id: "fig3",
            title: "SKR lower bound vs input power, beta = 0.95",
            notes: vec![ASSUMED_RADII, "mu grid 1e-2..1e6, 50 log-spaced points"],
            curves: mu_family(0.95),
        },
        "fig4" => FigurePreset {
            id: "fig4",
            title: "SKR bounds vs exclusion zone radius",
            notes: vec![
                ASSUMED_RADII,
                "L = 100 km (not stated in the caption)",
                "r_ex grid 0.05..0.9 m, 50 points; the far-field model breaks down near 0.99 m",
                OPT_MU,
            ],
            curves: vec![curve(
                "L = 100 km".into(),
                fixed(zone(APERTURE, 100.0), 1.0),
                SweepVariable::ExclusionRadius,
                lin_grid(0.05, 0.9),
                &[Direct, Reverse, Upper],
            )],
        },
        "fig5" => FigurePreset {
            id: "fig5",
            title: "SKR lower bound vs center frequency",
            notes: vec![
                ASSUMED_RADII,
                "frequency grid 1e13..1e15 Hz, 50 log-spaced points",
                OPT_MU,
            ],
            curves: [100.0, 150.0]
                .iter()
                .flat_map(|&l_km| {
                    [APERTURE, APERTURE + 0.1].map(move |r_ex| {
                        curve(
                            format!("L = {l_km} km, r_ex = {r_ex} m"),
                            fixed(zone(r_ex, l_km), 1.0),
                            SweepVariable::Frequency,
                            log_grid(1e13, 1e15),
                            &[Reverse, Best],
                        )
                    })
                })
                .collect(),
        },
        "fig10" => FigurePreset {
            id: "fig10",
            title: "SKR lower bounds vs input power, L = 10 km",
            notes: vec!["mu grid 1e-2..1e6, 50 log-spaced points", "Eve tangent to the exclusion zone"],
            curves: beam_mu_family(10.0, 1.0),
        },
        "fig11" => FigurePreset {
            id: "fig11",
            title: "SKR lower bounds vs input power, L = 30 km",
            notes: vec!["mu grid 1e-2..1e6, 50 log-spaced points", "Eve tangent to the exclusion zone"],
            curves: beam_mu_family(30.0, 1.0),
        },
        "fig12" => FigurePreset {
            id: "fig12",
            title: "SKR lower bounds vs input power, L = 30 km, beta = 0.85",
            notes: vec!["mu grid 1e-2..1e6, 50 log-spaced points", "Eve tangent to the exclusion zone"],
            curves: beam_mu_family(30.0, 0.85),
        },
        "fig13" => FigurePreset {
            id: "fig13",
            title: "SKR lower bounds vs distance",
            notes: vec!["distance grid 2..100 km in 2 km steps", OPT_MU, "Eve tangent to the exclusion zone"],
            curves: beam_optimized_family(SweepVariable::Distance, lin_grid(2.0, 100.0), 2.0, &[Direct, Reverse]),
        },
        "fig14" => FigurePreset {
            id: "fig14",
            title: "SKR lower and upper bounds vs distance",
            notes: vec![
                "distance grid 2..100 km in 2 km steps",
                OPT_MU,
                "upper bound is the pure-loss surrogate -log2(kappa (1 - eta))",
            ],
            curves: beam_optimized_family(SweepVariable::Distance, lin_grid(2.0, 100.0), 2.0, &[Best, Upper]),
        },
        "fig15" => FigurePreset {
            id: "fig15",
            title: "SKR lower and upper bounds vs frequency",
            notes: vec![
                "L = 30 km (not stated in the caption)",
                "frequency grid 1e13..1e15 Hz, 50 log-spaced points",
                OPT_MU,
                "upper bound is the pure-loss surrogate -log2(kappa (1 - eta))",
            ],
            curves: beam_optimized_family(SweepVariable::Frequency, log_grid(1e13, 1e15), 30.0, &[Best, Upper]),
        },
        _ => return None,
    };
    Some(p)
}
