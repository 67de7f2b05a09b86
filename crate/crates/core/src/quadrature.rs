//! Adaptive 21-point Gauss-Kronrod quadrature on finite intervals.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("quadrature did not converge within depth {max_depth}: estimate {estimate:e}, error {error:e}")]
pub struct QuadratureError {
    pub estimate: f64,
    pub error: f64,
    pub max_depth: u32,
}

// Kronrod abscissae and weights of the 21-point rule; odd indices are the
// embedded 10-point Gauss nodes (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const ROUNDOFF: f64 = 50.0 * f64::EPSILON;

/// Adaptive bisection driver around the 21-point Gauss-Kronrod rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_depth: 60,
        }
    }
}

/// Integral estimate with its accumulated error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Quadrature {
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<Estimate, QuadratureError>
    where
        F: Fn(f64) -> f64,
    {
        if a == b {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        let whole = gauss_kronrod_21(&f, a, b);
        let tol = self.abs_tol.max(self.rel_tol * whole.value.abs());
        let mut converged = true;
        let est = self.refine(&f, a, b, whole, tol, 0, &mut converged);
        if !converged {
            return Err(QuadratureError {
                estimate: est.value,
                error: est.error,
                max_depth: self.max_depth,
            });
        }
        Ok(est)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        est: Estimate,
        tol: f64,
        depth: u32,
        converged: &mut bool,
    ) -> Estimate
    where
        F: Fn(f64) -> f64,
    {
        // Past round-off level, further bisection cannot shrink the error.
        if est.error <= tol || est.error <= ROUNDOFF * est.value.abs() || est.error < f64::MIN_POSITIVE {
            return est;
        }
        if depth >= self.max_depth {
            *converged = false;
            return est;
        }
        let mid = 0.5 * (a + b);
        let left = gauss_kronrod_21(f, a, mid);
        let right = gauss_kronrod_21(f, mid, b);
        let l = self.refine(f, a, mid, left, 0.5 * tol, depth + 1, converged);
        let r = self.refine(f, mid, b, right, 0.5 * tol, depth + 1, converged);
        Estimate {
            value: l.value + r.value,
            error: l.error + r.error,
        }
    }
}

/// Fixed 10-point Gauss-Legendre rule on `[a, b]`, for short smooth integrals.
pub(crate) fn gauss_legendre_10<F>(f: F, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sum: f64 = (0..5)
        .map(|k| {
            let dx = half * XGK[2 * k + 1];
            WG[k] * (f(center - dx) + f(center + dx))
        })
        .sum();
    sum * half
}

fn gauss_kronrod_21<F>(f: &F, a: f64, b: f64) -> Estimate
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let est = q.integrate(|x| x.powi(7) - 3.0 * x * x + 1.0, -1.0, 2.0).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0) + 3.0;
        assert!((est.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_integral() {
        let q = Quadrature::default();
        let est = q.integrate(|x| (-x * x).exp(), -8.0, 8.0).unwrap();
        assert!((est.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sharp_peak_needs_subdivision() {
        let q = Quadrature::default();
        let eps = 1e-4;
        let est = q.integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((est.value - exact).abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        let q = Quadrature::default();
        assert_eq!(q.integrate(|x| x, 3.0, 3.0).unwrap().value, 0.0);
        let fwd = q.integrate(f64::sin, 0.0, 1.0).unwrap().value;
        let rev = q.integrate(f64::sin, 1.0, 0.0).unwrap().value;
        assert!((fwd + rev).abs() < 1e-15);
    }

    #[test]
    fn relative_tolerance_on_vanishing_integrand_terminates() {
        let q = Quadrature {
            abs_tol: 0.0,
            ..Quadrature::default()
        };
        let est = q.integrate(|x| (-1e4 * (x + 30.0) * (x + 30.0)).exp(), 0.0, 1.0).unwrap();
        assert_eq!(est.value, 0.0);
        let tiny = q.integrate(|x| 1e-300 * (-(x * x)).exp() * 1e-10, 0.0, 1.0).unwrap();
        assert!((tiny.value / 7.468241328124270e-311 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fixed_gauss_rule_integrates_degree_19() {
        let v = gauss_legendre_10(|x| x.powi(19) + x.powi(18), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let q = Quadrature {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_depth: 2,
        };
        let err = q.integrate(|x| x.abs().sqrt(), -1.0, 1.0).unwrap_err();
        assert!((err.estimate - 4.0 / 3.0).abs() < 1e-3);
        assert_eq!(err.max_depth, 2);
    }
}
