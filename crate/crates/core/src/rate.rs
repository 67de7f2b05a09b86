//! Secret-key-rate bounds for the thermal-noise wiretap channel.
//!
//! The channel is realised as an explicit pure Gaussian state
//! ([`wiretap_state`]): Alice keeps one arm of a TMSV, the other arm is mixed
//! with thermal noise at transmissivity `eta` (Bob gets the transmitted port),
//! and the lost light is split again at `kappa` so that Eve holds a single
//! mode carrying the fraction `kappa` of it. Every Holevo term in the bounds
//! is an entropy of a reduced or heterodyne-conditioned state of that model.

use thiserror::Error;

use crate::channel::{ChannelError, ChannelPoint};
use crate::gaussian::{
    beamsplitter, derived_entropy, g_unchecked, heterodyne_condition, partial_state, tmsv_state, von_neumann_entropy,
    GaussianError, GaussianState,
};

/// Mode layout of [`wiretap_state`].
pub mod modes {
    /// Alice's retained arm of the TMSV.
    pub const ALICE: usize = 0;
    pub const BOB: usize = 1;
    pub const EVE: usize = 2;
    /// Lost light Eve does not collect.
    pub const RESIDUAL: usize = 3;
    /// Purification of the thermal background.
    pub const PURIFIER: usize = 4;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// How the conditional Eve term of the direct bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EveNoiseModel {
    /// Conditional entropy of Eve's mode from the explicit wiretap state.
    #[default]
    Consistent,
    /// The scalar `g(n_e (1 - eta kappa))`.
    Printed,
}

impl EveNoiseModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            EveNoiseModel::Consistent => "consistent",
            EveNoiseModel::Printed => "printed",
        }
    }
}

/// Reconciliation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reconciliation {
    Direct,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// Mean photon number per input mode.
    pub mu: f64,
    /// Reconciliation efficiency in (0, 1].
    pub beta: f64,
    pub channel: ChannelPoint,
    pub eve_noise_model: EveNoiseModel,
}

impl RateParams {
    pub fn new(mu: f64, beta: f64, channel: ChannelPoint, eve_noise_model: EveNoiseModel) -> Result<Self, RateError> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(RateError::Domain {
                name: "mu",
                value: mu,
                expected: "finite and >= 0",
            });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(RateError::Domain {
                name: "beta",
                value: beta,
                expected: "0 < beta <= 1",
            });
        }
        Ok(Self {
            mu,
            beta,
            channel,
            eve_noise_model,
        })
    }

    pub fn with_mu(self, mu: f64) -> Result<Self, RateError> {
        Self::new(mu, self.beta, self.channel, self.eve_noise_model)
    }
}

/// Bounds at one operating point, in bits per mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    /// Raw direct-reconciliation bound (may be negative).
    pub lb_direct: f64,
    /// Raw reverse-reconciliation bound (may be negative).
    pub lb_reverse: f64,
    /// `max(0, lb_direct, lb_reverse)`.
    pub lb_best: f64,
    /// Pure-loss surrogate upper bound; `+inf` when Eve collects nothing.
    pub ub: f64,
    pub diverged: bool,
}

/// Pure five-mode state behind the bounds, ordered as in [`modes`].
pub fn wiretap_state(mu: f64, channel: &ChannelPoint) -> Result<GaussianState, RateError> {
    let source = tmsv_state(mu)?;
    // Thermal background purified by its own TMSV partner. Built as
    // [A, S, T, F, V] and reordered so the vacuum port lands before the
    // purifier: A, B, E, G, F.
    let background = tmsv_state(channel.n_e)?;
    let product = source.tensor(&background).tensor(&GaussianState::vacuum(1));
    let mut state = partial_state(&product, &[0, 1, 2, 4, 3])?;
    state = beamsplitter(&state, modes::BOB, modes::EVE, channel.eta)?;
    state = beamsplitter(&state, modes::EVE, modes::RESIDUAL, channel.kappa)?;
    Ok(state)
}

/// Eve's entropy terms: unconditioned, given Alice's heterodyne, and given
/// Bob's heterodyne.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveEntropies {
    pub eve: f64,
    pub eve_given_alice: f64,
    pub eve_given_bob: f64,
}

pub fn eve_entropies(params: &RateParams) -> Result<EveEntropies, RateError> {
    let state = wiretap_state(params.mu, &params.channel)?;
    let scale = state.covariance().amax();
    let eve = von_neumann_entropy(&partial_state(&state, &[modes::EVE])?)?;
    let with_alice = partial_state(&state, &[modes::ALICE, modes::EVE])?;
    let eve_given_alice = match params.eve_noise_model {
        EveNoiseModel::Consistent => derived_entropy(&heterodyne_condition(&with_alice, 0)?, scale)?,
        EveNoiseModel::Printed => {
            let ch = &params.channel;
            g_unchecked(ch.n_e * (1.0 - ch.eta * ch.kappa))
        }
    };
    let with_bob = partial_state(&state, &[modes::BOB, modes::EVE])?;
    let eve_given_bob = derived_entropy(&heterodyne_condition(&with_bob, 0)?, scale)?;
    Ok(EveEntropies {
        eve,
        eve_given_alice,
        eve_given_bob,
    })
}

fn direct_from(params: &RateParams, eve: &EveEntropies) -> f64 {
    let ch = &params.channel;
    let noise = ch.n_e * (1.0 - ch.eta);
    params.beta * g_unchecked(noise + ch.eta * params.mu) - eve.eve - params.beta * g_unchecked(noise)
        + eve.eve_given_alice
}

fn reverse_from(params: &RateParams, eve: &EveEntropies) -> f64 {
    let ch = &params.channel;
    let mu = params.mu;
    // Alice's photon number given Bob's heterodyne outcome,
    // mu - eta mu (1 + mu) / (1 + n_e - n_e eta + eta mu), rearranged to avoid
    // cancellation at large mu.
    let conditional = mu * (1.0 - ch.eta) * (1.0 + ch.n_e) / (1.0 + ch.n_e * (1.0 - ch.eta) + ch.eta * mu);
    params.beta * g_unchecked(mu) - eve.eve - params.beta * g_unchecked(conditional) + eve.eve_given_bob
}

/// Direct-reconciliation lower bound, bits per mode (raw, may be negative).
pub fn lb_direct(params: &RateParams) -> Result<f64, RateError> {
    Ok(direct_from(params, &eve_entropies(params)?))
}

/// Reverse-reconciliation lower bound, bits per mode (raw, may be negative).
pub fn lb_reverse(params: &RateParams) -> Result<f64, RateError> {
    Ok(reverse_from(params, &eve_entropies(params)?))
}

/// Closed-form `mu -> inf`, `n_e -> 0`, `beta = 1` limit of either bound.
///
/// Direct: `log2(eta / (kappa (1 - eta)))`, clamped at 0.
/// Reverse: `-log2(kappa (1 - eta)) - [g((1-eta)/eta) - g(kappa (1-eta)/eta)]`.
/// Both are `+inf` when `kappa = 0`.
pub fn lb_asymptotic(channel: &ChannelPoint, scheme: Reconciliation) -> Result<f64, RateError> {
    let (eta, kappa) = (channel.eta, channel.kappa);
    if !(eta > 0.0 && eta < 1.0) {
        return Err(RateError::Domain {
            name: "eta",
            value: eta,
            expected: "0 < eta < 1",
        });
    }
    if kappa == 0.0 {
        return Ok(f64::INFINITY);
    }
    let eve = kappa * (1.0 - eta);
    Ok(match scheme {
        Reconciliation::Direct => (eta / eve).log2().max(0.0),
        Reconciliation::Reverse => {
            let x = (1.0 - eta) / eta;
            -eve.log2() - (g_unchecked(x) - g_unchecked(kappa * x))
        }
    })
}

/// Pure-loss surrogate upper bound `-log2(kappa (1 - eta))`, independent of
/// `n_e`. Returns `+inf` when Eve's share of the light is zero.
pub fn upper_bound(channel: &ChannelPoint) -> Result<f64, RateError> {
    let eve = channel.eve_transmissivity();
    if eve >= 1.0 {
        return Err(RateError::Domain {
            name: "kappa (1 - eta)",
            value: eve,
            expected: "< 1",
        });
    }
    if eve <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-eve.log2())
}

/// Raw `(direct, reverse)` lower bounds from one state construction.
pub fn lower_bounds(params: &RateParams) -> Result<(f64, f64), RateError> {
    let eve = eve_entropies(params)?;
    Ok((direct_from(params, &eve), reverse_from(params, &eve)))
}

/// All bounds at one point.
pub fn rate_point(params: &RateParams) -> Result<RateResult, RateError> {
    let (lb_direct, lb_reverse) = lower_bounds(params)?;
    let ub = upper_bound(&params.channel)?;
    Ok(RateResult {
        lb_direct,
        lb_reverse,
        lb_best: lb_direct.max(lb_reverse).max(0.0),
        ub,
        diverged: ub.is_infinite(),
    })
}
