//! Domain model: fibers, loss profiles, combs, spans, links and reports.
//!
//! Everything in this module is expressed in SI base units: Hz, m, 1/m,
//! W/Hz. Conversions from conventional units (THz, km, dB/km, dBm) happen
//! only in [`crate::config`] and in [`db_per_km_to_field_alpha`].
//!
//! Loss coefficients follow the field convention: power decays as
//! `exp(-2 * alpha * z)`.
//!
//! All types are immutable after construction and safe to share across
//! threads.

use thiserror::Error;

/// Converts a power attenuation in dB/km to a field-loss coefficient in 1/m.
///
/// Negative input is allowed and models distributed gain.
pub fn db_per_km_to_field_alpha(a_db_per_km: f64) -> f64 {
    a_db_per_km * std::f64::consts::LN_10 / 20.0 / 1.0e3
}

/// Inverse of [`db_per_km_to_field_alpha`].
pub fn field_alpha_to_db_per_km(alpha: f64) -> f64 {
    alpha * 20.0 / std::f64::consts::LN_10 * 1.0e3
}

/// Sorted `(frequency, value)` samples of a per-frequency quantity.
///
/// The closed form only ever needs values at channel centers, so lookups are
/// nearest-sample by default; the full oracle tier interpolates linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqTable {
    points: Vec<(f64, f64)>,
}

impl FreqTable {
    /// Builds a table from `(frequency, value)` pairs sorted by frequency.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, TableError> {
        if points.is_empty() {
            return Err(TableError::Empty);
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(TableError::Unsorted);
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(TableError::NonFinite);
        }
        Ok(Self { points })
    }

    /// A frequency-flat table.
    pub fn constant(value: f64) -> Self {
        Self {
            points: vec![(0.0, value)],
        }
    }

    /// Value of the sample nearest to `f`.
    pub fn nearest(&self, f: f64) -> f64 {
        let idx = match self
            .points
            .binary_search_by(|p| p.0.partial_cmp(&f).unwrap())
        {
            Ok(i) => i,
            Err(i) => {
                if i == 0 {
                    0
                } else if i == self.points.len() {
                    self.points.len() - 1
                } else if f - self.points[i - 1].0 <= self.points[i].0 - f {
                    i - 1
                } else {
                    i
                }
            }
        };
        self.points[idx].1
    }

    /// Linear interpolation at `f`, clamped to the end values outside the
    /// table support.
    pub fn linear(&self, f: f64) -> f64 {
        match self
            .points
            .binary_search_by(|p| p.0.partial_cmp(&f).unwrap())
        {
            Ok(i) => self.points[i].1,
            Err(i) => {
                if i == 0 {
                    self.points[0].1
                } else if i == self.points.len() {
                    self.points[self.points.len() - 1].1
                } else {
                    let (f0, v0) = self.points[i - 1];
                    let (f1, v1) = self.points[i];
                    v0 + (v1 - v0) * (f - f0) / (f1 - f0)
                }
            }
        }
    }

    /// The raw `(frequency, value)` samples.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Iterator over the sample values.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }
}

/// Invalid frequency-table data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("frequency table must not be empty")]
    Empty,
    #[error("frequency table must be strictly sorted by frequency")]
    Unsorted,
    #[error("frequency table entries must be finite")]
    NonFinite,
}

/// Per-span fiber physics.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberParams {
    /// Nonlinearity coefficient, 1/(W·m).
    pub gamma: f64,
    /// Group-velocity dispersion at `f_c`, s²/m. Any sign, including zero.
    pub beta2: f64,
    /// Dispersion slope at `f_c`, s³/m. Any sign, including zero.
    pub beta3: f64,
    /// Dispersion expansion center frequency, Hz.
    pub f_c: f64,
    /// Span length, m.
    pub length: f64,
}

/// Three-parameter frequency-dependent loss profile of a span:
/// `alpha(f, z) = alpha0(f) + alpha1(f) * exp(-sigma(f) * z)`.
///
/// `alpha1 < 0` models SRS gain; the closed form assumes the perturbative
/// regime `|alpha1| < alpha0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossModel {
    /// Baseline field-loss coefficient, 1/m.
    pub alpha0: FreqTable,
    /// SRS perturbation amplitude at z = 0, 1/m.
    pub alpha1: FreqTable,
    /// SRS decay constant, 1/m. Strictly positive.
    pub sigma: FreqTable,
}

/// Loss parameters sampled at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSample {
    pub alpha0: f64,
    pub alpha1: f64,
    pub sigma: f64,
}

impl LossModel {
    /// A frequency-flat profile.
    pub fn flat(alpha0: f64, alpha1: f64, sigma: f64) -> Self {
        Self {
            alpha0: FreqTable::constant(alpha0),
            alpha1: FreqTable::constant(alpha1),
            sigma: FreqTable::constant(sigma),
        }
    }

    /// Nearest-sample lookup, the convention used by the closed form.
    pub fn sample_nearest(&self, f: f64) -> LossSample {
        LossSample {
            alpha0: self.alpha0.nearest(f),
            alpha1: self.alpha1.nearest(f),
            sigma: self.sigma.nearest(f),
        }
    }

    /// Linearly interpolated lookup, used by the full oracle tier.
    pub fn sample_linear(&self, f: f64) -> LossSample {
        LossSample {
            alpha0: self.alpha0.linear(f),
            alpha1: self.alpha1.linear(f),
            sigma: self.sigma.linear(f),
        }
    }
}

/// One rectangular-spectrum WDM channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Center frequency, Hz.
    pub center: f64,
    /// Rectangular bandwidth, Hz.
    pub bandwidth: f64,
    /// Launch power spectral density at span input, W/Hz.
    pub psd: f64,
}

impl Channel {
    /// Channel power in W.
    pub fn power(&self) -> f64 {
        self.psd * self.bandwidth
    }
}

/// Per-span set of channels with a designated channel under test.
#[derive(Debug, Clone, PartialEq)]
pub struct WdmComb {
    pub channels: Vec<Channel>,
    pub cut_index: usize,
}

impl WdmComb {
    /// The channel under test. Callers must hold the comb invariants
    /// (see [`validate_link`]).
    pub fn cut(&self) -> &Channel {
        &self.channels[self.cut_index]
    }

    /// Total comb power in W.
    pub fn total_power(&self) -> f64 {
        self.channels.iter().map(Channel::power).sum()
    }
}

/// Lumped end-of-span power gain.
#[derive(Debug, Clone, PartialEq)]
pub enum LumpedGain {
    /// Gain set per channel to the reciprocal of the span fiber power
    /// transfer at the channel center, making the span transfer exactly 1.
    Transparent,
    /// Dimensionless power gain sampled over frequency.
    Table(FreqTable),
}

/// One span: fiber, loss profile, lumped end gain and the signal comb at
/// the span input.
#[derive(Debug, Clone, PartialEq)]
pub struct Span {
    pub fiber: FiberParams,
    pub loss: LossModel,
    pub lumped_gain: LumpedGain,
    pub comb: WdmComb,
}

/// Ordered sequence of spans. NLI produced per span adds in power at the
/// link end.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub spans: Vec<Span>,
}

/// Closed-form branch actually used for one integration island.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaBranch {
    /// Exact inverse-tangent-integral kernel.
    Li2,
    /// asinh approximant of the kernel.
    Asinh,
    /// Zero-effective-dispersion limit.
    Degenerate,
}

impl FormulaBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaBranch::Li2 => "li2",
            FormulaBranch::Asinh => "asinh",
            FormulaBranch::Degenerate => "degenerate",
        }
    }
}

/// Contribution of one span to the end-of-link NLI PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanContribution {
    /// 0-based span index.
    pub span_index: usize,
    /// NLI PSD produced in this span, assessed at its own end, W/Hz.
    pub nli_psd: f64,
    /// Power transfer from the end of this span to the end of the link.
    pub transfer_to_end: f64,
    /// Formula branch used per comb channel (interferers plus the CUT
    /// itself for the self-channel island).
    pub branches: Vec<(usize, FormulaBranch)>,
}

/// Result of an end-of-link NLI evaluation at the CUT center frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct NliReport {
    /// CUT center frequency, Hz.
    pub cut_frequency: f64,
    /// CUT bandwidth, Hz.
    pub cut_bandwidth: f64,
    /// Total NLI PSD at the end of the link, W/Hz.
    pub nli_psd_end: f64,
    /// Per-span breakdown; `nli_psd_end` is the transfer-weighted sum.
    pub per_span: Vec<SpanContribution>,
    /// Optional generalized SNR.
    pub gsnr: Option<f64>,
}

/// A structural defect found by [`validate_link`]. Violations are data,
/// not exceptions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("link has no spans")]
    EmptyLink,
    #[error("span {span}: comb has no channels")]
    EmptyComb { span: usize },
    #[error("span {span}: cut index {index} out of range for {channels} channels")]
    CutIndexOutOfRange {
        span: usize,
        index: usize,
        channels: usize,
    },
    #[error("CUT frequency varies across spans (span {span}: {found} Hz, expected {expected} Hz)")]
    CutFrequencyVaries {
        span: usize,
        found: f64,
        expected: f64,
    },
    #[error("CUT bandwidth varies across spans (span {span}: {found} Hz, expected {expected} Hz)")]
    CutBandwidthVaries {
        span: usize,
        found: f64,
        expected: f64,
    },
    #[error("span {span}: channels {first} and {second} overlap")]
    ChannelsOverlap {
        span: usize,
        first: usize,
        second: usize,
    },
    #[error("span {span}, channel {channel}: bandwidth must be positive")]
    NonPositiveBandwidth { span: usize, channel: usize },
    #[error("span {span}, channel {channel}: PSD must be non-negative")]
    NegativePsd { span: usize, channel: usize },
    #[error("span {span}, channel {channel}: center frequency must exceed half the bandwidth")]
    CenterBelowHalfBandwidth { span: usize, channel: usize },
    #[error("span {span}: fiber length must be positive")]
    NonPositiveLength { span: usize },
    #[error("span {span}: nonlinearity coefficient must be non-negative")]
    NegativeGamma { span: usize },
    #[error("span {span}: dispersion expansion frequency must be positive")]
    NonPositiveExpansionFrequency { span: usize },
    #[error("span {span}, channel {channel}: alpha0 must be positive at the channel center")]
    NonPositiveAlpha0 { span: usize, channel: usize },
    #[error("span {span}: sigma must be positive everywhere")]
    NonPositiveSigma { span: usize },
    #[error("span {span}, channel {channel}: perturbative regime violated (|alpha1| >= alpha0)")]
    PerturbativeRegime { span: usize, channel: usize },
}

/// Checks every structural invariant the closed form relies on.
///
/// An empty result means every downstream operation's structural
/// preconditions hold.
pub fn validate_link(link: &Link) -> Vec<Violation> {
    let mut out = Vec::new();
    if link.spans.is_empty() {
        out.push(Violation::EmptyLink);
        return out;
    }

    let mut link_cut: Option<(f64, f64)> = None;
    for (s, span) in link.spans.iter().enumerate() {
        if span.fiber.length <= 0.0 {
            out.push(Violation::NonPositiveLength { span: s });
        }
        if span.fiber.gamma < 0.0 {
            out.push(Violation::NegativeGamma { span: s });
        }
        if span.fiber.f_c <= 0.0 {
            out.push(Violation::NonPositiveExpansionFrequency { span: s });
        }
        if span.loss.sigma.values().any(|v| v <= 0.0) {
            out.push(Violation::NonPositiveSigma { span: s });
        }

        let comb = &span.comb;
        if comb.channels.is_empty() {
            out.push(Violation::EmptyComb { span: s });
            continue;
        }
        if comb.cut_index >= comb.channels.len() {
            out.push(Violation::CutIndexOutOfRange {
                span: s,
                index: comb.cut_index,
                channels: comb.channels.len(),
            });
            continue;
        }

        for (c, ch) in comb.channels.iter().enumerate() {
            if ch.bandwidth <= 0.0 {
                out.push(Violation::NonPositiveBandwidth { span: s, channel: c });
            }
            if ch.psd < 0.0 {
                out.push(Violation::NegativePsd { span: s, channel: c });
            }
            if ch.center <= ch.bandwidth / 2.0 {
                out.push(Violation::CenterBelowHalfBandwidth { span: s, channel: c });
            }
            let sample = span.loss.sample_nearest(ch.center);
            if sample.alpha0 <= 0.0 {
                out.push(Violation::NonPositiveAlpha0 { span: s, channel: c });
            }
            if sample.alpha1.abs() >= sample.alpha0 {
                out.push(Violation::PerturbativeRegime { span: s, channel: c });
            }
        }

        // Pairwise non-overlap; checking frequency-sorted neighbours is
        // enough for rectangular spectra.
        let mut order: Vec<usize> = (0..comb.channels.len()).collect();
        order.sort_by(|&a, &b| {
            comb.channels[a]
                .center
                .partial_cmp(&comb.channels[b].center)
                .unwrap()
        });
        for pair in order.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (ca, cb) = (&comb.channels[a], &comb.channels[b]);
            if (cb.center - ca.center).abs() < (ca.bandwidth + cb.bandwidth) / 2.0 {
                out.push(Violation::ChannelsOverlap {
                    span: s,
                    first: a,
                    second: b,
                });
            }
        }

        let cut = comb.cut();
        match link_cut {
            None => link_cut = Some((cut.center, cut.bandwidth)),
            Some((f, b)) => {
                if cut.center != f {
                    out.push(Violation::CutFrequencyVaries {
                        span: s,
                        found: cut.center,
                        expected: f,
                    });
                }
                if cut.bandwidth != b {
                    out.push(Violation::CutBandwidthVaries {
                        span: s,
                        found: cut.bandwidth,
                        expected: b,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_channel_span(alpha1_scale: f64) -> Span {
        let alpha0 = db_per_km_to_field_alpha(0.2);
        Span {
            fiber: FiberParams {
                gamma: 1.3e-3,
                beta2: -21.3e-27,
                beta3: 0.12e-39,
                f_c: 193.1e12,
                length: 80e3,
            },
            loss: LossModel::flat(alpha0, alpha1_scale * alpha0, 2.0 * alpha0),
            lumped_gain: LumpedGain::Transparent,
            comb: WdmComb {
                channels: vec![Channel {
                    center: 193.1e12,
                    bandwidth: 100e9,
                    psd: 1e-14,
                }],
                cut_index: 0,
            },
        }
    }

    #[test]
    fn db_conversion_zero() {
        assert_eq!(db_per_km_to_field_alpha(0.0), 0.0);
    }

    #[test]
    fn db_conversion_smf() {
        // 0.2 dB/km -> 0.2 * ln(10)/20 / 1000
        let a = db_per_km_to_field_alpha(0.2);
        assert!((a - 2.302585092994046e-5).abs() < 1e-18);
    }

    #[test]
    fn db_conversion_sign_symmetry() {
        assert_eq!(
            db_per_km_to_field_alpha(-0.2),
            -db_per_km_to_field_alpha(0.2)
        );
    }

    #[test]
    fn db_conversion_round_trip() {
        let a = db_per_km_to_field_alpha(0.17);
        assert!((field_alpha_to_db_per_km(a) - 0.17).abs() < 1e-15);
    }

    #[test]
    fn validate_single_span_passes() {
        let link = Link {
            spans: vec![one_channel_span(0.1)],
        };
        assert!(validate_link(&link).is_empty());
    }

    #[test]
    fn validate_flags_cut_frequency_mismatch() {
        let mut second = one_channel_span(0.1);
        second.comb.channels[0].center += 1e9;
        let link = Link {
            spans: vec![one_channel_span(0.1), second],
        };
        let violations = validate_link(&link);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::CutFrequencyVaries { span: 1, .. })));
    }

    #[test]
    fn validate_flags_perturbative_regime() {
        let link = Link {
            spans: vec![one_channel_span(1.5)],
        };
        let violations = validate_link(&link);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::PerturbativeRegime { span: 0, channel: 0 })));
    }

    #[test]
    fn validate_flags_overlap() {
        let mut span = one_channel_span(0.0);
        span.comb.channels.push(Channel {
            center: 193.15e12,
            bandwidth: 100e9,
            psd: 1e-14,
        });
        let link = Link { spans: vec![span] };
        let violations = validate_link(&link);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::ChannelsOverlap { .. })));
    }

    #[test]
    fn freq_table_lookups() {
        let t = FreqTable::new(vec![(1.0, 10.0), (3.0, 30.0)]).unwrap();
        assert_eq!(t.nearest(0.0), 10.0);
        assert_eq!(t.nearest(1.9), 10.0);
        assert_eq!(t.nearest(2.1), 30.0);
        assert_eq!(t.nearest(5.0), 30.0);
        assert_eq!(t.linear(2.0), 20.0);
        assert_eq!(t.linear(0.0), 10.0);
        assert_eq!(t.linear(9.0), 30.0);
        assert!(FreqTable::new(vec![]).is_err());
        assert!(FreqTable::new(vec![(2.0, 0.0), (1.0, 0.0)]).is_err());
    }
}
