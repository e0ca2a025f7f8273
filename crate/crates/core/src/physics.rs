//! Propagation quantities: effective dispersion, loss profiles, span and
//! link power transfer, and SRS parameter fitting.
//!
//! Pure functions over immutable inputs; safe to evaluate concurrently.

use crate::model::{FiberParams, FreqTable, Link, LossModel, LumpedGain, Span, WdmComb};
use std::f64::consts::PI;
use std::ops::Range;
use thiserror::Error;

/// Per-channel-pair effective dispersion:
/// `beta2 + pi * beta3 * (f_nch + f_cut - 2 * f_c)`, in s²/m.
///
/// Symmetric in the exchange of `f_nch` and `f_cut`.
pub fn beta2_eff(fiber: &FiberParams, f_nch: f64, f_cut: f64) -> f64 {
    fiber.beta2 + PI * fiber.beta3 * (f_nch + f_cut - 2.0 * fiber.f_c)
}

/// Pointwise field-loss coefficient
/// `alpha0(f) + alpha1(f) * exp(-sigma(f) * z)`, sampled at the nearest
/// table frequency.
pub fn alpha_profile(loss: &LossModel, f: f64, z: f64) -> f64 {
    let s = loss.sample_nearest(f);
    s.alpha0 + s.alpha1 * (-s.sigma * z).exp()
}

/// Power transfer of the bare fiber over the whole span at frequency `f`:
/// `exp(-2 alpha0 L) * exp(2 alpha1 (exp(-sigma L) - 1) / sigma)`.
pub fn fiber_power_transfer(loss: &LossModel, length: f64, f: f64) -> f64 {
    let s = loss.sample_nearest(f);
    ((-s.sigma * length).exp_m1() * 2.0 * s.alpha1 / s.sigma - 2.0 * s.alpha0 * length).exp()
}

/// End-to-end power transfer of one span, lumped gain included.
///
/// With [`LumpedGain::Transparent`] this is exactly 1 at every channel
/// center, by construction.
pub fn span_power_transfer(span: &Span, f: f64) -> f64 {
    match &span.lumped_gain {
        LumpedGain::Transparent => 1.0,
        LumpedGain::Table(gain) => {
            gain.nearest(f) * fiber_power_transfer(&span.loss, span.fiber.length, f)
        }
    }
}

/// Lumped gain of the span at `f`. For transparent spans this is the
/// reciprocal of the fiber power transfer at `f`.
pub fn lumped_gain_value(span: &Span, f: f64) -> f64 {
    match &span.lumped_gain {
        LumpedGain::Transparent => 1.0 / fiber_power_transfer(&span.loss, span.fiber.length, f),
        LumpedGain::Table(gain) => gain.nearest(f),
    }
}

/// Power transfer through a contiguous run of spans (0-based, half-open).
///
/// The empty range is the identity: `link_transfer(link, f, k..k) == 1`,
/// which encodes "output coincident with input".
pub fn link_transfer(link: &Link, f: f64, spans: Range<usize>) -> Result<f64, PhysicsError> {
    if spans.start > spans.end || spans.end > link.spans.len() {
        return Err(PhysicsError::SpanRangeOutOfBounds {
            start: spans.start,
            end: spans.end,
            spans: link.spans.len(),
        });
    }
    Ok(link.spans[spans]
        .iter()
        .map(|s| span_power_transfer(s, f))
        .product())
}

/// Errors from span-indexed operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhysicsError {
    #[error("span range {start}..{end} out of bounds for {spans} spans")]
    SpanRangeOutOfBounds {
        start: usize,
        end: usize,
        spans: usize,
    },
}

/// How the SRS decay constant is assigned per channel.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaPolicy {
    /// `sigma = 2 * mean(alpha0)`, the power-weighted average of the
    /// baseline loss: the pump power that drives the tilt decays at twice
    /// the mean field loss.
    UniformAverage,
    /// User-provided sigma table in 1/m over frequency.
    PerChannelOverride(FreqTable),
}

/// Inputs of the triangular-gain SRS fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsFitConfig {
    /// Raman gain slope `C_r` of the linear (triangular) gain
    /// approximation, 1/(W·m·Hz).
    pub raman_slope: f64,
    pub sigma_policy: SigmaPolicy,
}

/// Fitted SRS loss-perturbation samples at the comb's channel centers.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsFit {
    /// `alpha1` samples, 1/m. Negative values are SRS gain.
    pub alpha1: FreqTable,
    /// `sigma` samples, 1/m.
    pub sigma: FreqTable,
    /// Channels where the fitted `|alpha1|` reaches or exceeds `alpha0`;
    /// closed-form evaluation refuses such inputs downstream.
    pub flagged: Vec<usize>,
}

/// SRS fit failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SrsFitError {
    #[error("comb has zero total power; nothing drives SRS")]
    ZeroTotalPower,
    #[error("baseline alpha0 has {got} entries for {channels} channels")]
    BaselineLengthMismatch { got: usize, channels: usize },
    #[error("raman slope must be non-negative, got {0}")]
    NegativeRamanSlope(f64),
}

/// First-order triangular-gain SRS fit.
///
/// For channel `i` with per-channel powers `P_j = psd_j * bandwidth_j`:
/// `alpha1_i = -(C_r / 2) * sum_j P_j * (f_j - f_i)` (field convention,
/// half the power-domain coefficient). Low-frequency channels come out
/// with `alpha1 < 0`, i.e. SRS gain, and the power-weighted sum of
/// `alpha1` over the comb is zero.
pub fn fit_srs_params(
    comb: &WdmComb,
    baseline_alpha0: &[f64],
    cfg: &SrsFitConfig,
) -> Result<SrsFit, SrsFitError> {
    if cfg.raman_slope < 0.0 {
        return Err(SrsFitError::NegativeRamanSlope(cfg.raman_slope));
    }
    if baseline_alpha0.len() != comb.channels.len() {
        return Err(SrsFitError::BaselineLengthMismatch {
            got: baseline_alpha0.len(),
            channels: comb.channels.len(),
        });
    }
    let total_power = comb.total_power();
    if total_power <= 0.0 {
        return Err(SrsFitError::ZeroTotalPower);
    }

    let mean_alpha0 = comb
        .channels
        .iter()
        .zip(baseline_alpha0)
        .map(|(ch, a0)| ch.power() * a0)
        .sum::<f64>()
        / total_power;

    let mut order: Vec<usize> = (0..comb.channels.len()).collect();
    order.sort_by(|&a, &b| {
        comb.channels[a]
            .center
            .partial_cmp(&comb.channels[b].center)
            .unwrap()
    });

    let mut alpha1_points = Vec::with_capacity(order.len());
    let mut sigma_points = Vec::with_capacity(order.len());
    let mut flagged = Vec::new();
    for &i in &order {
        let f_i = comb.channels[i].center;
        let tilt: f64 = comb
            .channels
            .iter()
            .map(|ch| ch.power() * (ch.center - f_i))
            .sum();
        let alpha1 = -0.5 * cfg.raman_slope * tilt;
        let sigma = match &cfg.sigma_policy {
            SigmaPolicy::UniformAverage => 2.0 * mean_alpha0,
            SigmaPolicy::PerChannelOverride(table) => table.nearest(f_i),
        };
        if alpha1.abs() >= baseline_alpha0[i] {
            flagged.push(i);
        }
        alpha1_points.push((f_i, alpha1));
        sigma_points.push((f_i, sigma));
    }

    Ok(SrsFit {
        alpha1: FreqTable::new(alpha1_points).expect("channel centers are distinct and sorted"),
        sigma: FreqTable::new(sigma_points).expect("channel centers are distinct and sorted"),
        flagged,
    })
}
