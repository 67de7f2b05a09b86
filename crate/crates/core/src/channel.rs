//! Channel geometry: from apertures, distances and carrier frequency to the
//! transmissivity `eta`, the eavesdropper's restriction factor `kappa`, and
//! the thermal background `n_e`.
//!
//! Two scenarios are modelled:
//!
//! * [`ExclusionZoneGeometry`]: far-field diffraction between circular
//!   apertures. Eve collects everything that lands outside a disc (the
//!   exclusion zone) centred on Bob.
//! * [`BeamGeometry`]: a Gaussian beam captured by Bob's disc and by a
//!   finite Eve disc in Bob's plane, by default tangent to the exclusion zone.

use std::f64::consts::PI;

use thiserror::Error;

use crate::quadrature::{Quadrature, QuadratureError};

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.38064852e-23;
/// Speed of light used for every wavelength/frequency conversion, m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;
/// Background temperature of space, K.
pub const SPACE_TEMPERATURE: f64 = 3.0;

/// `hf/kT` beyond which the occupation number is reported as exactly zero.
const BLACKBODY_UNDERFLOW: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("far-field model violated: {quantity} = {ratio} exceeds 1")]
    FarFieldViolation { quantity: &'static str, ratio: f64 },
    #[error("degenerate channel: 1 - eta = {one_minus_eta:e}, Eve's fraction is undefined")]
    DegenerateChannel { one_minus_eta: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

fn require(name: &'static str, value: f64, ok: bool, expected: &'static str) -> Result<(), ChannelError> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(ChannelError::Domain { name, value, expected })
    }
}

/// Carrier of the optical signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Carrier {
    /// Wavelength in meters.
    Wavelength(f64),
    /// Frequency in Hz.
    Frequency(f64),
}

impl Carrier {
    pub fn wavelength(&self) -> f64 {
        match *self {
            Carrier::Wavelength(l) => l,
            Carrier::Frequency(f) => SPEED_OF_LIGHT / f,
        }
    }

    pub fn frequency(&self) -> f64 {
        match *self {
            Carrier::Wavelength(l) => SPEED_OF_LIGHT / l,
            Carrier::Frequency(f) => f,
        }
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.frequency()
    }

    fn validate(&self) -> Result<(), ChannelError> {
        match *self {
            Carrier::Wavelength(l) => require("lambda", l, l > 0.0 && l.is_finite(), "> 0"),
            Carrier::Frequency(f) => require("frequency", f, f > 0.0 && f.is_finite(), "> 0"),
        }
    }
}

/// Resolved channel at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    /// Alice-to-Bob power transmissivity.
    pub eta: f64,
    /// Fraction of the light missed by Bob that Eve collects.
    pub kappa: f64,
    /// Thermal background, mean photons per mode.
    pub n_e: f64,
}

impl ChannelPoint {
    pub fn new(eta: f64, kappa: f64, n_e: f64) -> Result<Self, ChannelError> {
        require("eta", eta, (0.0..=1.0).contains(&eta), "0 <= eta <= 1")?;
        require("kappa", kappa, (0.0..=1.0).contains(&kappa), "0 <= kappa <= 1")?;
        require("n_e", n_e, n_e >= 0.0 && n_e.is_finite(), ">= 0")?;
        Ok(Self { eta, kappa, n_e })
    }

    pub fn with_noise(self, n_e: f64) -> Result<Self, ChannelError> {
        Self::new(self.eta, self.kappa, n_e)
    }

    pub fn with_kappa(self, kappa: f64) -> Result<Self, ChannelError> {
        Self::new(self.eta, kappa, self.n_e)
    }

    /// Fraction of the transmitted light that reaches Eve, `kappa (1 - eta)`.
    pub fn eve_transmissivity(&self) -> f64 {
        self.kappa * (1.0 - self.eta)
    }
}

/// Far-field scenario with an infinite-aperture eavesdropper kept outside
/// an exclusion disc around Bob. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusionZoneGeometry {
    pub r_a: f64,
    pub r_b: f64,
    pub r_ex: f64,
    pub distance: f64,
}

impl ExclusionZoneGeometry {
    pub fn new(r_a: f64, r_b: f64, r_ex: f64, distance: f64) -> Result<Self, ChannelError> {
        require("r_a", r_a, r_a > 0.0, "> 0")?;
        require("r_b", r_b, r_b > 0.0, "> 0")?;
        require("r_ex", r_ex, r_ex >= r_b, ">= r_b (the zone contains Bob's aperture)")?;
        require("L", distance, distance > 0.0, "> 0")?;
        Ok(Self {
            r_a,
            r_b,
            r_ex,
            distance,
        })
    }
}

/// Gaussian-beam scenario with a finite eavesdropper aperture in Bob's plane.
/// All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    /// Beam waist radius at the transmitter.
    pub w0: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub r_e: f64,
    pub r_ex: f64,
    pub distance: f64,
    /// Distance between the centres of Bob's and Eve's apertures.
    pub eve_offset: f64,
}

impl BeamGeometry {
    /// `eve_offset = None` places Eve tangent to the exclusion zone.
    pub fn new(
        w0: f64,
        r_a: f64,
        r_b: f64,
        r_e: f64,
        r_ex: f64,
        distance: f64,
        eve_offset: Option<f64>,
    ) -> Result<Self, ChannelError> {
        require("w0", w0, w0 > 0.0, "> 0")?;
        require("r_a", r_a, r_a > 0.0, "> 0")?;
        require("r_b", r_b, r_b > 0.0, "> 0")?;
        require("r_e", r_e, r_e > 0.0, "> 0")?;
        require("r_ex", r_ex, r_ex >= r_b, ">= r_b (the zone contains Bob's aperture)")?;
        require("L", distance, distance >= 0.0 && distance.is_finite(), ">= 0")?;
        let tangential = r_ex + r_e;
        let eve_offset = eve_offset.unwrap_or(tangential);
        require(
            "eve_offset",
            eve_offset,
            eve_offset >= tangential * (1.0 - 1e-12),
            ">= r_ex + r_e (Eve stays outside the exclusion zone)",
        )?;
        Ok(Self {
            w0,
            r_a,
            r_b,
            r_e,
            r_ex,
            distance,
            eve_offset,
        })
    }

    pub fn is_tangential(&self) -> bool {
        self.eve_offset == self.r_ex + self.r_e
    }
}

/// Mean thermal photon number per mode at frequency `f` (Hz) and temperature
/// `t` (K). Returns exactly 0 once `hf/kT > 700`.
pub fn blackbody_ne(f: f64, t: f64) -> Result<f64, ChannelError> {
    require("f", f, f > 0.0, "> 0")?;
    require("T", t, t > 0.0, "> 0")?;
    let x = PLANCK * f / (BOLTZMANN * t);
    if x > BLACKBODY_UNDERFLOW {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Far-field transmissivities for the exclusion-zone scenario; `n_e` is left
/// at zero.
///
/// With `w0 = 2 pi c L / sqrt(A_a A_b)` the Bob transmissivity is
/// `(omega / w0)^2`; the same expression with the exclusion-zone area gives
/// the fraction landing inside the zone, and Eve takes the remainder.
pub fn farfield_channel(geom: &ExclusionZoneGeometry, omega: f64) -> Result<ChannelPoint, ChannelError> {
    require("omega", omega, omega > 0.0 && omega.is_finite(), "> 0")?;
    let area = |r: f64| PI * r * r;
    let a_a = area(geom.r_a);
    let omega0 = 2.0 * PI * SPEED_OF_LIGHT * geom.distance / (a_a * area(geom.r_b)).sqrt();
    let omega0_ex = 2.0 * PI * SPEED_OF_LIGHT * geom.distance / (a_a * area(geom.r_ex)).sqrt();
    let eta = (omega / omega0).powi(2);
    let eta_zone = (omega / omega0_ex).powi(2);
    if eta > 1.0 {
        return Err(ChannelError::FarFieldViolation {
            quantity: "eta",
            ratio: eta,
        });
    }
    if eta_zone > 1.0 {
        return Err(ChannelError::FarFieldViolation {
            quantity: "eta_zone",
            ratio: eta_zone,
        });
    }
    if eta == 1.0 {
        return Err(ChannelError::DegenerateChannel { one_minus_eta: 0.0 });
    }
    let kappa = ((1.0 - eta_zone) / (1.0 - eta)).clamp(0.0, 1.0);
    ChannelPoint::new(eta, kappa, 0.0)
}

/// Beam radius after propagating `distance` from a waist `w0` at wavelength
/// `lambda`: `w0 sqrt(1 + (L/z0)^2)` with `z0 = pi w0^2 / lambda`.
pub fn beam_waist_at(w0: f64, distance: f64, lambda: f64) -> Result<f64, ChannelError> {
    require("w0", w0, w0 > 0.0, "> 0")?;
    require("L", distance, distance >= 0.0, ">= 0")?;
    require("lambda", lambda, lambda > 0.0, "> 0")?;
    let z0 = rayleigh_range(w0, lambda);
    Ok(w0 * (1.0 + (distance / z0).powi(2)).sqrt())
}

/// Rayleigh range `pi w0^2 / lambda`.
pub fn rayleigh_range(w0: f64, lambda: f64) -> f64 {
    PI * w0 * w0 / lambda
}

// erf(c + h) - erf(c - h) without cancellation when both arguments sit on
// the same tail or the window is narrow.
fn erf_window(center: f64, half_width: f64) -> f64 {
    if half_width * (center.abs() + 1.0) < 0.5 {
        // exp(-(c + t)^2) = exp(-c^2) exp(-t^2) exp(-2ct), symmetric in t.
        let c = center;
        let inner = crate::quadrature::gauss_legendre_10(|t| (-t * t).exp() * (2.0 * c * t).cosh(), 0.0, half_width);
        return 4.0 / PI.sqrt() * (-c * c).exp() * inner;
    }
    let (lo, hi) = (center - half_width, center + half_width);
    if lo >= 0.0 {
        libm::erfc(lo) - libm::erfc(hi)
    } else if hi <= 0.0 {
        libm::erfc(-hi) - libm::erfc(-lo)
    } else {
        libm::erf(hi) - libm::erf(lo)
    }
}

/// Fraction of the total beam power captured by Bob's centred disc.
///
/// The inner integral over `x` is done analytically (an erf); the remaining
/// integral over `y` runs on `y = r_b sin(theta)`, which removes the square-root
/// endpoint behaviour of the chord length.
pub fn p_bob_fraction(geom: &BeamGeometry, lambda: f64) -> Result<f64, ChannelError> {
    let w = beam_waist_at(geom.w0, geom.distance, lambda)?;
    let r = geom.r_b;
    let scale = 2f64.sqrt() / w;
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let y = r * s;
        let half_chord = r * c;
        (-(scale * y).powi(2)).exp() * libm::erf(scale * half_chord) * half_chord
    };
    let est = Quadrature::default().integrate(integrand, -PI / 2.0, PI / 2.0)?;
    Ok(((2.0 / PI).sqrt() / w * est.value).clamp(0.0, 1.0))
}

/// Fraction of the total beam power captured by Eve's disc of radius `r_e`
/// whose centre sits `eve_offset` from the beam axis.
pub fn p_eve_fraction(geom: &BeamGeometry, lambda: f64) -> Result<f64, ChannelError> {
    let w = beam_waist_at(geom.w0, geom.distance, lambda)?;
    let r = geom.r_e;
    let offset = geom.eve_offset;
    let scale = 2f64.sqrt() / w;
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let x = r * s;
        let half_chord = r * c;
        (-(scale * x).powi(2)).exp() * erf_window(scale * offset, scale * half_chord) * half_chord
    };
    // Eve's share can be 1e-40 of the beam; only a relative tolerance means
    // anything there.
    let quad = Quadrature {
        abs_tol: 0.0,
        ..Quadrature::default()
    };
    let est = quad.integrate(integrand, -PI / 2.0, PI / 2.0)?;
    Ok(((2.0 / PI).sqrt() / (2.0 * w) * est.value).clamp(0.0, 1.0))
}

/// `eta = P_Bob / P_total`, `kappa = P_Eve / ((1 - eta) P_total)`; `n_e` is
/// left at zero.
pub fn beam_channel(geom: &BeamGeometry, lambda: f64) -> Result<ChannelPoint, ChannelError> {
    let eta = p_bob_fraction(geom, lambda)?;
    let eve = p_eve_fraction(geom, lambda)?;
    let one_minus_eta = 1.0 - eta;
    if one_minus_eta < 1e-15 {
        return Err(ChannelError::DegenerateChannel { one_minus_eta });
    }
    let kappa = (eve / one_minus_eta).clamp(0.0, 1.0);
    ChannelPoint::new(eta, kappa, 0.0)
}

/// Geometry of either scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    ExclusionZone(ExclusionZoneGeometry),
    Beam(BeamGeometry),
}

/// Resolves geometry, carrier and temperature into a full [`ChannelPoint`].
pub fn resolve_channel(geometry: &Geometry, carrier: Carrier, temperature: f64) -> Result<ChannelPoint, ChannelError> {
    carrier.validate()?;
    let point = match geometry {
        Geometry::ExclusionZone(g) => farfield_channel(g, carrier.angular_frequency())?,
        Geometry::Beam(g) => beam_channel(g, carrier.wavelength())?,
    };
    point.with_noise(blackbody_ne(carrier.frequency(), temperature)?)
}
