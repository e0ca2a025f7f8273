//! Quadrature-based reference implementations of the NLI integrals at three
//! approximation tiers, used to validate the closed forms and to quantify
//! each analytical approximation separately.
//!
//! Tier ladder, from most to least approximate:
//! * [`OracleTier::Rational`] — the first-order-in-`alpha1` rational
//!   integrand the closed forms integrate exactly; pairing it against
//!   [`crate::engine`] checks the closed-form algebra alone.
//! * [`OracleTier::Matched`] — per-island-sampled loss and dispersion with
//!   the exact SRS spatial kernel, integrated over an effectively infinite
//!   span length.
//! * [`OracleTier::Full`] — exact four-frequency phase and loss mismatch,
//!   per-frequency interpolated loss, finite span length.
//!
//! The oracle is deliberately slow: the spatial integral is done by capped
//! oscillation-resolving panels and the frequency integrals by nested
//! per-axis adaptive quadrature, with no reuse of the closed form's change
//! of variables.

use crate::engine::IslandParams;
use crate::model::{LossSample, Span};
use crate::physics::{beta2_eff, fiber_power_transfer, span_power_transfer};
use num_complex::Complex64;
use rayon::prelude::*;
use std::cell::Cell;
use std::f64::consts::{FRAC_PI_4, PI};

pub use crate::quad::QuadError;
use crate::quad::{adaptive, adaptive_panels, capped_seeds, Panel};

/// Which integrand the oracle evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleTier {
    /// First-order-in-`alpha1` rational integrand; no spatial integral.
    Rational,
    /// Island-sampled parameters, exact SRS kernel, infinite-length
    /// spatial integral.
    Matched,
    /// Exact four-frequency mismatches, interpolated loss, finite span.
    Full,
}

/// Reading of the four-frequency loss-mismatch combination in the full
/// tier. Deriving it from the propagation-constant combination negates the
/// probe-frequency loss as a whole; one printed expansion of the same
/// quantity flips only its flat part and adds the SRS part. Both readings
/// are exposed; they coincide whenever `alpha1` vanishes at the probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaAlphaConvention {
    /// `alpha(f1,z) + alpha(f2,z) + alpha(f1+f2-f,z) - alpha(f,z)`.
    #[default]
    SubtractFull,
    /// Same, except the probe's SRS term is added instead of subtracted.
    SubtractFlatOnly,
}

/// Upper limit of the matched-tier spatial integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpatialLimit {
    /// `30 / (2 alpha0)`, far past the last relevant decay scale.
    #[default]
    Infinite,
    /// The physical span length, for quantifying the infinite-length
    /// approximation.
    SpanLength,
}

/// Quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Target relative tolerance.
    pub rel_tol: f64,
    /// Maximum refinement splits per integration axis.
    pub max_subdivisions: u32,
    /// Full-tier loss-mismatch sign reading.
    pub delta_alpha: DeltaAlphaConvention,
    /// Matched-tier spatial limit.
    pub matched_limit: SpatialLimit,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_subdivisions: 4000,
            delta_alpha: DeltaAlphaConvention::SubtractFull,
            matched_limit: SpatialLimit::Infinite,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// The rational integrand the closed forms integrate exactly, as a function
/// of the frequency product `u = f1' * f2'`.
fn rational_integrand(p: &IslandParams, u: f64) -> f64 {
    let v = u * u * p.big_b * p.big_b;
    let a = 4.0 * p.alpha0 * p.alpha0;
    let b = (2.0 * p.alpha0 + p.sigma).powi(2);
    let c = (2.0 * p.alpha0 - 2.0 * p.alpha1 + p.sigma).powi(2);
    (c + v) / ((a + v) * (b + v))
}

/// `int_0^z (a0 + a1 exp(-s t)) dt = a0 z - a1 expm1(-s z) / s`.
fn loss_integral(s: &LossSample, z: f64) -> f64 {
    s.alpha0 * z - s.alpha1 * (-s.sigma * z).exp_m1() / s.sigma
}

/// Squared magnitude of the spatial kernel
/// `int_0^zmax exp(-j dbeta z) exp(-W(z)) dz` where `W` is the accumulated
/// loss mismatch. Panels are capped at `pi / (4 |dbeta|)` wherever the
/// envelope still matters, so oscillations are always resolved; past the
/// live region panels widen to a couple of decay constants.
fn spatial_kernel_sq(
    delta_beta: f64,
    envelope_rate: f64,
    w: &dyn Fn(f64) -> f64,
    z_max: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadError> {
    let z_live = if envelope_rate > 0.0 {
        ((100.0 / cfg.rel_tol).ln() / envelope_rate).min(z_max)
    } else {
        z_max
    };

    let mut seeds = if delta_beta == 0.0 {
        vec![Panel::new(0.0, z_live)]
    } else {
        capped_seeds(0.0, z_live, FRAC_PI_4 / delta_beta.abs())
    };
    if z_live < z_max {
        seeds.extend(capped_seeds(z_live, z_max, 2.0 / envelope_rate));
    }

    let integrand = |z: f64| Complex64::from_polar((-w(z)).exp(), -delta_beta * z);
    let (value, _err): (Complex64, f64) =
        adaptive_panels(&integrand, &seeds, cfg.rel_tol * 0.5, cfg.max_subdivisions)?;
    Ok(value.norm_sqr())
}

/// Matched-tier squared kernel at frequency product `u`: the loss mismatch
/// is twice the interfering channel's profile.
fn matched_kernel_sq(
    p: &IslandParams,
    span_length: f64,
    u: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadError> {
    let delta_beta = -p.big_b * u;
    let sample = LossSample {
        alpha0: p.alpha0,
        alpha1: p.alpha1,
        sigma: p.sigma,
    };
    let z_max = match cfg.matched_limit {
        SpatialLimit::Infinite => 30.0 / (2.0 * p.alpha0),
        SpatialLimit::SpanLength => span_length,
    };
    spatial_kernel_sq(
        delta_beta,
        2.0 * p.alpha0,
        &|z| 2.0 * loss_integral(&sample, z),
        z_max,
        cfg,
    )
}

/// Full-tier squared kernel at absolute frequencies `(f1, f2)` with probe
/// frequency `f`, over the finite span length.
fn full_kernel_sq(
    span: &Span,
    f1: f64,
    f2: f64,
    f: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadError> {
    let delta_beta = -4.0
        * PI
        * PI
        * (f - f1)
        * (f - f2)
        * (span.fiber.beta2 + PI * span.fiber.beta3 * (f1 + f2 - 2.0 * span.fiber.f_c));

    let plus = [
        span.loss.sample_linear(f1),
        span.loss.sample_linear(f2),
        span.loss.sample_linear(f1 + f2 - f),
    ];
    let probe = span.loss.sample_linear(f);
    let delta_alpha = cfg.delta_alpha;
    let w = move |z: f64| {
        let added: f64 = plus.iter().map(|s| loss_integral(s, z)).sum();
        let probe_flat = probe.alpha0 * z;
        let probe_srs = -probe.alpha1 * (-probe.sigma * z).exp_m1() / probe.sigma;
        match delta_alpha {
            DeltaAlphaConvention::SubtractFull => added - probe_flat - probe_srs,
            DeltaAlphaConvention::SubtractFlatOnly => added - probe_flat + probe_srs,
        }
    };

    let rate = plus.iter().map(|s| s.alpha0).sum::<f64>() - probe.alpha0;
    spatial_kernel_sq(delta_beta, rate, &w, span.fiber.length, cfg)
}

/// Squared outer loss factor of the span at the probe frequency:
/// `exp(-2 int_0^L alpha(f, z) dz)`.
fn outer_loss_sq(span: &Span, f: f64) -> f64 {
    fiber_power_transfer(&span.loss, span.fiber.length, f)
}

/// Channel whose samples represent a `(f1, f2)` pair in the island-sampled
/// tiers: the channel nearest to whichever frequency sits farther from the
/// CUT. Symmetric under `(f1, f2)` exchange.
fn sampling_channel(span: &Span, f1: f64, f2: f64) -> usize {
    let f_cut = span.comb.cut().center;
    let d1 = (f1 - f_cut).abs();
    let d2 = (f2 - f_cut).abs();
    let f_int = if d1 > d2 {
        f1
    } else if d2 > d1 {
        f2
    } else {
        f1.max(f2)
    };
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, ch) in span.comb.channels.iter().enumerate() {
        let d = (ch.center - f_int).abs();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn island_like_params(span: &Span, channel: usize) -> IslandParams {
    let cut = span.comb.cut();
    let ch = &span.comb.channels[channel];
    let sample = span.loss.sample_nearest(ch.center);
    IslandParams {
        alpha0: sample.alpha0,
        alpha1: sample.alpha1,
        sigma: sample.sigma,
        big_b: 4.0 * PI * PI * beta2_eff(&span.fiber, ch.center, cut.center),
        f_offset: ch.center - cut.center,
        b_nch: ch.bandwidth,
        b_cut: cut.bandwidth,
    }
}

/// FWM efficiency factor `|rho(f1, f2, f_cut)|^2` in m², outer loss factor
/// included, at the requested tier.
pub fn rho_sq(
    f1: f64,
    f2: f64,
    span: &Span,
    tier: OracleTier,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadError> {
    let f_cut = span.comb.cut().center;
    let outer = outer_loss_sq(span, f_cut);
    let kernel = match tier {
        OracleTier::Full => full_kernel_sq(span, f1, f2, f_cut, cfg)?,
        OracleTier::Matched => {
            let p = island_like_params(span, sampling_channel(span, f1, f2));
            matched_kernel_sq(&p, span.fiber.length, (f1 - f_cut) * (f2 - f_cut), cfg)?
        }
        OracleTier::Rational => {
            let p = island_like_params(span, sampling_channel(span, f1, f2));
            rational_integrand(&p, (f1 - f_cut) * (f2 - f_cut))
        }
    };
    Ok(outer * kernel)
}

/// 2-D adaptive quadrature of the tier integrand over the island rectangle,
/// m²·Hz². Excludes the outer loss factor, so the rational tier pairs
/// directly with the closed-form island integrals.
pub fn island_quadrature(
    p: &IslandParams,
    span: &Span,
    tier: OracleTier,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadError> {
    let f_cut = span.comb.cut().center;
    let (lo2, hi2) = (p.f_offset - 0.5 * p.b_nch, p.f_offset + 0.5 * p.b_nch);
    let half_cut = 0.5 * p.b_cut;
    let axis_tol = cfg.rel_tol / 2.0;

    // Inner failures surface after the fact; the integrand signature
    // cannot carry a Result.
    let failure: Cell<Option<QuadError>> = Cell::new(None);

    let outer = |f1p: f64| -> f64 {
        let g = |f2p: f64| -> f64 {
            let r = match tier {
                OracleTier::Rational => return rational_integrand(p, f1p * f2p),
                OracleTier::Matched => matched_kernel_sq(p, span.fiber.length, f1p * f2p, cfg),
                OracleTier::Full => full_kernel_sq(span, f_cut + f1p, f_cut + f2p, f_cut, cfg),
            };
            r.unwrap_or_else(|e| {
                failure.set(Some(e));
                0.0
            })
        };
        match adaptive(&g, Panel::new(lo2, hi2), axis_tol, cfg.max_subdivisions) {
            Ok((v, _)) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };

    let result = adaptive(
        &outer,
        Panel::new(-half_cut, half_cut),
        axis_tol,
        cfg.max_subdivisions,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    result.map(|(v, _)| v)
}

/// Oracle assembly of one span's NLI PSD at the CUT center, W/Hz:
/// `(16/27) gamma^2 T(f_cut) [ sum 2 G_cut G_nch^2 I_nch + G_cut^3 I_cut ]`
/// where `T` is the span power transfer (lumped gain times the outer loss
/// factor) and every island integral is done at the requested tier.
/// Island quadratures run in parallel.
pub fn span_nli_quadrature(
    span: &Span,
    tier: OracleTier,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadError> {
    let comb = &span.comb;
    let cut = comb.cut();
    let g_cut = cut.psd;

    let weighted: Result<Vec<f64>, QuadError> = (0..comb.channels.len())
        .into_par_iter()
        .map(|idx| {
            let p = island_like_params(span, idx);
            let integral = island_quadrature(&p, span, tier, cfg)?;
            let weight = if idx == comb.cut_index {
                g_cut * g_cut * g_cut
            } else {
                let g = comb.channels[idx].psd;
                2.0 * g_cut * g * g
            };
            Ok(weight * integral)
        })
        .collect();

    let total: f64 = weighted?.iter().sum();
    let prefactor =
        16.0 / 27.0 * span.fiber.gamma * span.fiber.gamma * span_power_transfer(span, cut.center);
    Ok(prefactor * total)
}
