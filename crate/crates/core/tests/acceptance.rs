//! Acceptance checks, one PASS/FAIL line each. Run with
//! `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use skr_core::channel::{
    blackbody_ne, farfield_channel, p_bob_fraction, p_eve_fraction, BeamGeometry, Carrier, ChannelPoint,
    ExclusionZoneGeometry,
};
use skr_core::gaussian::{g_entropy, heterodyne_condition, partial_state, tmsv_state, von_neumann_entropy};
use skr_core::presets::figure_preset;
use skr_core::rate::{lb_direct, lb_reverse, EveNoiseModel, RateParams};
use skr_core::sweep::{optimize_mu, run_sweep, MuSearch, Parallelism, Scheme};
use skr_core::table::ResultTable;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name}: got {got:.12e}, want {want:.12e} (tol {tol:e})")
    })
}

fn rel_close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure(((got - want) / want).abs() <= tol, || {
        format!("{name}: got {got:.12e}, want {want:.12e} (rel tol {tol:e})")
    })
}

/// `(x+1) log2(x+1) - x log2 x`, written independently of the library.
fn g_oracle(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

fn criterion_1() -> Outcome {
    ensure(g_entropy(0.0).unwrap() == 0.0, || "g(0) != 0".into())?;
    ensure(g_entropy(1.0).unwrap() == 2.0, || format!("g(1) = {} != 2", g_entropy(1.0).unwrap()))?;
    for mu in [0.1, 1.0, 10.0] {
        let s = tmsv_state(mu).unwrap();
        let global = von_neumann_entropy(&s).unwrap();
        ensure(global <= 1e-9, || format!("TMSV({mu}) global entropy {global:e}"))?;
        let reduced = von_neumann_entropy(&partial_state(&s, &[0]).unwrap()).unwrap();
        close(&format!("S(A) of TMSV({mu})"), reduced, g_oracle(mu), 1e-9)?;
        let conditioned = von_neumann_entropy(&heterodyne_condition(&s, 1).unwrap()).unwrap();
        ensure(conditioned <= 1e-9, || format!("TMSV({mu}) conditioned entropy {conditioned:e}"))?;
    }
    Ok("g anchors exact; purity, reduced and conditioned entropies within 1e-9".into())
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for eta in [0.01, 0.1, 0.5, 0.9] {
        for kappa in [0.01, 0.1, 1.0] {
            let ch = ChannelPoint::new(eta, kappa, 0.0).unwrap();
            let p = RateParams::new(1e7, 1.0, ch, EveNoiseModel::Consistent).unwrap();
            let eve = kappa * (1.0 - eta);
            let direct_limit = (eta / eve).log2();
            let reverse_limit = (1.0 / eve).log2() - g_oracle((1.0 - eta) / eta) + g_oracle(eve / eta);
            let d = lb_direct(&p).unwrap();
            let r = lb_reverse(&p).unwrap();
            close(&format!("direct eta={eta} kappa={kappa}"), d, direct_limit, 1e-3)?;
            close(&format!("reverse eta={eta} kappa={kappa}"), r, reverse_limit, 1e-3)?;
            worst = worst.max((d - direct_limit).abs()).max((r - reverse_limit).abs());
        }
    }
    let ch = ChannelPoint::new(0.5, 1.0, 0.0).unwrap();
    let p = RateParams::new(1e7, 1.0, ch, EveNoiseModel::Consistent).unwrap();
    let r = lb_reverse(&p).unwrap();
    close("reverse at eta=0.5, kappa=1", r, 1.0, 1e-3)?;
    Ok(format!("12 grid points, worst deviation {worst:.2e} (tol 1e-3); eta=0.5 reverse = {r:.6}"))
}

/// Gaussian beam intensity normalised to unit total power.
fn intensity(x: f64, y: f64, w: f64) -> f64 {
    2.0 / (PI * w * w) * (-2.0 * (x * x + y * y) / (w * w)).exp()
}

/// Jittered-stratified Monte Carlo over a disc: an `n x n` grid on the unit
/// square, one uniform sample per cell, mapped area-preservingly onto the
/// disc. `n = 10^4` gives 10^8 samples.
fn disc_power_mc(cx: f64, radius: f64, w: f64, n: u64, seed: u64) -> f64 {
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut acc = 0.0;
            for j in 0..n {
                let u = (i as f64 + rng.random::<f64>()) / n as f64;
                let v = (j as f64 + rng.random::<f64>()) / n as f64;
                let r = radius * u.sqrt();
                let (s, c) = (2.0 * PI * v).sin_cos();
                acc += intensity(cx + r * c, r * s, w);
            }
            acc
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    PI * radius * radius * total / (n * n) as f64
}

fn criterion_3() -> Outcome {
    const N: u64 = 10_000;
    let lambda = 1550e-9;
    let cases = [
        ("L=10km r_ex=0.05", BeamGeometry::new(0.05, 0.05, 0.05, 0.05, 0.05, 10e3, None)),
        ("L=10km r_ex=0.5", BeamGeometry::new(0.05, 0.05, 0.05, 0.05, 0.5, 10e3, None)),
        ("L=30km r_ex=0.05", BeamGeometry::new(0.05, 0.05, 0.05, 0.05, 0.05, 30e3, None)),
        ("L=30km r_ex=0.5", BeamGeometry::new(0.05, 0.05, 0.05, 0.05, 0.5, 30e3, None)),
        ("L=5km off-tangent", BeamGeometry::new(0.03, 0.05, 0.04, 0.1, 0.2, 5e3, Some(0.45))),
    ];
    let mut worst: f64 = 0.0;
    for (k, (name, geom)) in cases.into_iter().enumerate() {
        let geom = geom.unwrap();
        let z0 = PI * geom.w0 * geom.w0 / lambda;
        let w = geom.w0 * (1.0 + (geom.distance / z0).powi(2)).sqrt();
        let bob_mc = disc_power_mc(0.0, geom.r_b, w, N, 1000 + k as u64);
        let eve_mc = disc_power_mc(geom.eve_offset, geom.r_e, w, N, 2000 + k as u64);
        let bob = p_bob_fraction(&geom, lambda).unwrap();
        let eve = p_eve_fraction(&geom, lambda).unwrap();
        rel_close(&format!("{name} p_bob"), bob, bob_mc, 1e-4)?;
        rel_close(&format!("{name} p_eve"), eve, eve_mc, 1e-4)?;
        worst = worst.max(((bob - bob_mc) / bob_mc).abs()).max(((eve - eve_mc) / eve_mc).abs());
    }
    let at_waist = BeamGeometry::new(0.05, 0.05, 0.05, 0.05, 0.05, 0.0, None).unwrap();
    let p0 = p_bob_fraction(&at_waist, lambda).unwrap();
    close("p_bob(L=0, r_b=w0)", p0, 1.0 - (-2.0f64).exp(), 1e-8)?;
    Ok(format!("5 geometries x 1e8 samples, worst rel deviation {worst:.2e} (tol 1e-4); L=0 anchor ok"))
}

fn criterion_4() -> Outcome {
    let lambda: f64 = 1550e-9;
    let omega = Carrier::Wavelength(lambda).angular_frequency();
    let area = PI * 0.05f64.powi(2);
    // eta = (omega/omega0)^2 = A_a A_b / (lambda L)^2.
    let eta_hand = area * area / (lambda * 100e3).powi(2);
    let ch = farfield_channel(&ExclusionZoneGeometry::new(0.05, 0.05, 0.10, 100e3).unwrap(), omega).unwrap();
    rel_close("eta", ch.eta, 2.57e-3, 1e-2)?;
    rel_close("eta vs hand evaluation", ch.eta, eta_hand, 1e-9)?;
    close("kappa", ch.kappa, 0.992, 1e-3)?;
    let n_optical = blackbody_ne(3e8 / lambda, 3.0).unwrap();
    ensure(n_optical == 0.0, || format!("n_e(1550 nm, 3 K) = {n_optical:e}"))?;
    let n_ghz = blackbody_ne(1e9, 3.0).unwrap();
    close("n_e(1 GHz, 3 K)", n_ghz, 62.0, 0.1)?;
    Ok(format!("eta = {:.6e}, kappa = {:.6}, n_e(1 GHz) = {n_ghz:.3}", ch.eta, ch.kappa))
}

fn preset_tables(id: &str) -> Vec<ResultTable> {
    figure_preset(id)
        .unwrap()
        .curves
        .iter()
        .map(|c| run_sweep(&c.sweep_spec().unwrap(), Parallelism::Auto).unwrap())
        .collect()
}

fn row_at(t: &ResultTable, var: f64) -> &skr_core::table::ResultRow {
    t.rows
        .iter()
        .find(|r| ((r.var - var) / var).abs() < 1e-9)
        .unwrap_or_else(|| panic!("grid has no point at {var}"))
}

fn criterion_5a() -> Result<(), String> {
    let fig2 = figure_preset("fig2").unwrap();
    let rate_at = |curve: usize, mu: f64| {
        let p = fig2.curves[curve].fixed.rate_params(mu).unwrap();
        lb_reverse(&p).unwrap()
    };
    let (r5, r6) = (rate_at(0, 1e5), rate_at(0, 1e6));
    close("5a saturation lb_reverse(1e5) vs (1e6)", r5, r6, 1e-3)?;
    let enlarged = {
        let p = fig2.curves[1].fixed.rate_params(1e6).unwrap();
        lb_direct(&p).unwrap().max(lb_reverse(&p).unwrap())
    };
    ensure(enlarged > r6, || format!("5a: r_ex = r_b + 5 cm gives {enlarged} <= saturation {r6}"))
}

fn criterion_5b() -> Result<(), String> {
    let fig3 = figure_preset("fig3").unwrap();
    let p = fig3.curves[0].fixed.rate_params(1.0).unwrap();
    let search = MuSearch::default();
    let rep = optimize_mu(&p, Scheme::Best, &search).unwrap();
    ensure(!rep.unbounded, || "5b: optimum reported unbounded".into())?;
    ensure(rep.mu_star > search.lo && rep.mu_star < search.hi, || {
        format!("5b: mu_star {} not interior", rep.mu_star)
    })?;
    ensure(rep.rate_at_star > 0.0, || "5b: zero optimal rate".into())
}

fn criterion_5c() -> Result<(), String> {
    let t = &preset_tables("fig4")[0];
    let lb: Vec<f64> = t.rows.iter().map(|r| r.lb_best).collect();
    for i in 1..lb.len() {
        ensure(lb[i] > lb[i - 1], || format!("5c: not increasing at r_ex = {}", t.rows[i].var))?;
    }
    for i in 1..lb.len() - 1 {
        let d2 = lb[i + 1] - 2.0 * lb[i] + lb[i - 1];
        ensure(d2 > 0.0, || format!("5c: second difference {d2:e} at r_ex = {}", t.rows[i].var))?;
    }
    Ok(())
}

/// First grid value where the curve reaches `target`, linearly interpolated.
fn first_crossing(t: &ResultTable, target: f64) -> Option<f64> {
    let rows = &t.rows;
    if rows[0].lb_best >= target {
        return Some(rows[0].var);
    }
    rows.windows(2).find(|w| w[1].lb_best >= target).map(|w| {
        let (a, b) = (&w[0], &w[1]);
        a.var + (target - a.lb_best) / (b.lb_best - a.lb_best) * (b.var - a.var)
    })
}

fn criterion_5d() -> Result<(), String> {
    // Curves: (100 km, r_b), (100 km, r_b + 0.1), (150 km, r_b), (150 km, r_b + 0.1).
    let tables = preset_tables("fig5");
    for t in &tables {
        ensure(!t.has_errors(), || "5d: far-field violation inside the preset grid".into())?;
        for w in t.rows.windows(2) {
            ensure(w[1].lb_best >= w[0].lb_best, || format!("5d: lb_best decreases at f = {}", w[1].var))?;
        }
    }
    for pair in [(0, 1), (2, 3)] {
        let (base, enlarged) = (&tables[pair.0], &tables[pair.1]);
        let lo = base.rows[0].lb_best.max(enlarged.rows[0].lb_best);
        let hi = base.rows.last().unwrap().lb_best.min(enlarged.rows.last().unwrap().lb_best);
        for k in 1..20 {
            let target = lo * (hi / lo).powf(k as f64 / 20.0);
            let (fb, fe) = (first_crossing(base, target).unwrap(), first_crossing(enlarged, target).unwrap());
            ensure(fe < fb, || format!("5d: target {target:e} reached at {fe:e} Hz (enlarged) vs {fb:e} Hz"))?;
        }
    }
    Ok(())
}

fn criterion_5e() -> Result<(), String> {
    let check = |id: &str, curve: usize, direct_wins: bool| -> Result<(), String> {
        let preset = figure_preset(id).unwrap();
        let fixed = &preset.curves[curve].fixed;
        // Optimised input power and the largest plotted one.
        let p = fixed.rate_params(1.0).unwrap();
        let d = optimize_mu(&p, Scheme::Direct, &MuSearch::default()).unwrap().rate_at_star;
        let r = optimize_mu(&p, Scheme::Reverse, &MuSearch::default()).unwrap().rate_at_star;
        let p6 = fixed.rate_params(1e6).unwrap();
        let (d6, r6) = (lb_direct(&p6).unwrap(), lb_reverse(&p6).unwrap());
        ensure((d > r) == direct_wins && (d6 > r6) == direct_wins, || {
            format!("5e: {id} curve {curve}: direct {d} / {d6}, reverse {r} / {r6}")
        })
    };
    check("fig10", 1, true)?;
    check("fig11", 0, false)?;
    check("fig11", 1, true)
}

fn criterion_5f() -> Result<(), String> {
    // Curves: r_ex = r_b, r_ex = 0.5 m, unrestricted (kappa = 1).
    let tables = preset_tables("fig13");
    let near = row_at(&tables[0], 80.0).lb_reverse;
    let far = row_at(&tables[0], 100.0).lb_reverse;
    ensure(far > 0.0 && (near - far).abs() <= 5e-2 * far, || {
        format!("5f: lb_reverse(80 km) = {near}, lb_reverse(100 km) = {far}")
    })?;
    let reference = &tables[2];
    for t in &tables[..2] {
        for (row, unrestricted) in t.rows.iter().zip(&reference.rows) {
            ensure(row.channel.unwrap().eta == unrestricted.channel.unwrap().eta, || "5f: eta mismatch".into())?;
            for (a, b, what) in [
                (row.lb_direct, unrestricted.lb_direct, "direct"),
                (row.lb_reverse, unrestricted.lb_reverse, "reverse"),
                (row.lb_best, unrestricted.lb_best, "best"),
            ] {
                ensure(a >= b, || format!("5f: {what} {a} below unrestricted {b} at L = {}", row.var))?;
            }
        }
    }
    for t in &tables {
        for row in &t.rows {
            ensure(row.ub >= row.lb_best, || format!("5f: ub {} < lb_best {} at L = {}", row.ub, row.lb_best, row.var))?;
        }
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    criterion_5a()?;
    criterion_5b()?;
    criterion_5c()?;
    criterion_5d()?;
    criterion_5e()?;
    criterion_5f()?;
    Ok("sub-claims a-f hold".into())
}

fn run_figure(dir: &Path, threads: Option<&str>) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skr"));
    cmd.args(["figure", "fig10", "-o"]).arg(dir);
    match threads {
        Some(n) => cmd.env("SKR_THREADS", n),
        None => cmd.env_remove("SKR_THREADS"),
    };
    let status = cmd.status().map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("skr figure exited with {status}"))?;
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    Ok(files)
}

fn criterion_6() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: Vec<_> = [("a", None), ("b", None), ("serial", Some("1")), ("parallel", Some("8"))]
        .into_iter()
        .map(|(name, threads)| run_figure(&tmp.path().join(name), threads))
        .collect::<Result<_, _>>()?;
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    ensure(names == ["fig10_curve1.csv", "fig10_curve2.csv"], || format!("6: unexpected files {names:?}"))?;
    ensure(runs[0] == runs[1], || "6: repeated runs differ".into())?;
    ensure(runs[2] == runs[3], || "6: SKR_THREADS=1 and 8 differ".into())?;
    ensure(runs[0] == runs[2], || "6: auto and serial differ".into())?;
    Ok("repeat, SKR_THREADS=1 and SKR_THREADS=8 outputs byte-identical".into())
}

fn main() {
    let criteria: [(&str, &str, Duration, fn() -> Outcome); 6] = [
        ("1", "entropy core", Duration::from_secs(1), criterion_1),
        ("2", "asymptote anchors", Duration::from_secs(10), criterion_2),
        ("3", "quadrature vs Monte Carlo", Duration::from_secs(120), criterion_3),
        ("4", "far-field channel", Duration::from_secs(1), criterion_4),
        ("5", "figure-shape claims", Duration::from_secs(300), criterion_5),
        ("6", "determinism", Duration::from_secs(120), criterion_6),
    ];
    let mut failed = 0;
    for (id, title, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= limit {
                Ok(detail)
            } else {
                Err(format!("took {:.1} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs()))
            }
        });
        match result {
            Ok(detail) => println!("PASS criterion {id} ({title}): {detail} [{:.2} s]", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id} ({title}): {why} [{:.2} s]", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
