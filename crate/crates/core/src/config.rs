//! Link-description documents and report output.
//!
//! The document is YAML with unit-suffixed field names; every numeric field
//! carries its unit in its name. [`parse_link_spec`] converts everything to
//! the SI-space [`Link`], resolves `transparent` gains and `fit` SRS
//! profiles, and rejects documents whose materialized link fails
//! [`validate_link`].
//!
//! ```yaml
//! metadata: { name: demo, version: nli-spec/1 }
//! comb:
//!   channels:
//!     - { center_THz: 193.1, bandwidth_GHz: 75, power_dBm: 0 }
//!   cut: 0
//! srs_fit: { raman_slope_per_W_km_THz: 0.5, sigma_policy: uniform_average }
//! spans:
//!   - length_km: 80
//!     fiber: { gamma_per_W_km: 1.3, beta2_ps2_km: -21.3, beta3_ps3_km: 0.12, fc_THz: 193.1 }
//!     loss: { alpha0_dB_km: 0.2, srs: fit }
//!     lumped_gain: transparent
//! ```

use crate::model::{
    db_per_km_to_field_alpha, field_alpha_to_db_per_km, validate_link, Channel, FiberParams,
    FreqTable, Link, LossModel, LumpedGain, NliReport, Span, TableError, Violation, WdmComb,
};
use crate::physics::{fit_srs_params, SigmaPolicy, SrsFitConfig, SrsFitError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// The only recognized document version.
pub const SPEC_VERSION: &str = "nli-spec/1";

const THZ: f64 = 1.0e12;
const GHZ: f64 = 1.0e9;
const KM: f64 = 1.0e3;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LinkSpecDoc {
    metadata: MetadataDoc,
    comb: CombDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    srs_fit: Option<SrsFitDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    fiber_profiles: BTreeMap<String, FiberDoc>,
    spans: Vec<SpanDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MetadataDoc {
    name: String,
    version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CombDoc {
    channels: Vec<ChannelDoc>,
    cut: CutDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum CutDoc {
    Index(usize),
    Frequency {
        #[serde(rename = "center_THz")]
        center_thz: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelDoc {
    #[serde(rename = "center_THz")]
    center_thz: f64,
    #[serde(rename = "bandwidth_GHz")]
    bandwidth_ghz: f64,
    #[serde(rename = "power_dBm", default, skip_serializing_if = "Option::is_none")]
    power_dbm: Option<f64>,
    #[serde(
        rename = "psd_W_per_Hz",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    psd_w_per_hz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SrsFitDoc {
    #[serde(rename = "raman_slope_per_W_km_THz")]
    raman_slope_per_w_km_thz: f64,
    sigma_policy: SigmaPolicyDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SigmaPolicyDoc {
    Named(String),
    Override {
        per_channel_override: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FiberDoc {
    #[serde(rename = "gamma_per_W_km")]
    gamma_per_w_km: f64,
    #[serde(rename = "beta2_ps2_km")]
    beta2_ps2_km: f64,
    #[serde(rename = "beta3_ps3_km")]
    beta3_ps3_km: f64,
    #[serde(rename = "fc_THz")]
    fc_thz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpanDoc {
    length_km: f64,
    fiber: FiberRefDoc,
    loss: LossDoc,
    lumped_gain: GainDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    comb: Option<SpanCombDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FiberRefDoc {
    Named(String),
    Inline(FiberDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LossDoc {
    #[serde(rename = "alpha0_dB_km")]
    alpha0_db_km: ScalarOrTable,
    srs: SrsDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarOrTable {
    Scalar(f64),
    /// `(THz, value)` pairs sorted by frequency.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SrsDoc {
    Named(String),
    Explicit {
        #[serde(rename = "alpha1_dB_km")]
        alpha1_db_km: Vec<(f64, f64)>,
        sigma_per_km: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GainDoc {
    Named(String),
    /// `(THz, dB)` pairs sorted by frequency.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SpanCombDoc {
    Named(String),
    Inline { channels: Vec<ChannelDoc> },
}

/// Document parsing and materialization failures.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("document syntax: {0}")]
    Syntax(#[from] serde_yaml::Error),
    #[error("unsupported document version {found:?} (expected {SPEC_VERSION:?})")]
    Version { found: String },
    #[error("CUT frequency not found")]
    CutFrequencyNotFound { center_thz: f64 },
    #[error("cut index {index} out of range for {channels} channels")]
    CutIndexOutOfRange { index: usize, channels: usize },
    #[error("channel {index}: specify exactly one of power_dBm, psd_W_per_Hz")]
    AmbiguousChannelPower { index: usize },
    #[error("span {span}: unknown fiber profile {name:?}")]
    UnknownFiberProfile { span: usize, name: String },
    #[error("span 1 cannot inherit its comb; the top-level comb already defines it")]
    InheritOnFirstSpan,
    #[error("span {span}: comb must be \"inherit\" or an inline channel list")]
    BadSpanComb { span: usize },
    #[error("span {span}: srs must be \"fit\" or explicit alpha1/sigma tables")]
    BadSrs { span: usize },
    #[error("span {span}: lumped_gain must be \"transparent\" or a (THz, dB) table")]
    BadGain { span: usize },
    #[error("span {span} uses srs: fit but the document has no srs_fit section")]
    MissingSrsFit { span: usize },
    #[error("srs_fit sigma_policy must be \"uniform_average\" or a per_channel_override table")]
    BadSigmaPolicy,
    #[error("span {span}: comb does not contain the link CUT frequency")]
    SpanCombMissingCut { span: usize },
    #[error("span {span}: {context}: {source}")]
    Table {
        span: usize,
        context: &'static str,
        source: TableError,
    },
    #[error("span {span}: SRS fit failed: {source}")]
    SrsFit { span: usize, source: SrsFitError },
    #[error("link validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn channel_from_doc(index: usize, doc: &ChannelDoc) -> Result<Channel, ParseError> {
    let center = doc.center_thz * THZ;
    let bandwidth = doc.bandwidth_ghz * GHZ;
    let psd = match (doc.power_dbm, doc.psd_w_per_hz) {
        (Some(dbm), None) => 1.0e-3 * 10f64.powf(dbm / 10.0) / bandwidth,
        (None, Some(psd)) => psd,
        _ => return Err(ParseError::AmbiguousChannelPower { index }),
    };
    Ok(Channel {
        center,
        bandwidth,
        psd,
    })
}

fn channels_from_docs(docs: &[ChannelDoc]) -> Result<Vec<Channel>, ParseError> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| channel_from_doc(i, d))
        .collect()
}

fn table_si(
    pairs: &[(f64, f64)],
    span: usize,
    context: &'static str,
    convert: impl Fn(f64) -> f64,
) -> Result<FreqTable, ParseError> {
    FreqTable::new(
        pairs
            .iter()
            .map(|&(thz, v)| (thz * THZ, convert(v)))
            .collect(),
    )
    .map_err(|source| ParseError::Table {
        span,
        context,
        source,
    })
}

/// Parses and materializes a link description in SI units. `transparent`
/// gains stay symbolic (the span transfer is exactly 1) and `fit` SRS
/// profiles are resolved through the triangular-gain fit against each
/// span's own comb.
pub fn parse_link_spec(document: &str) -> Result<Link, ParseError> {
    let (link, violations) = parse_link_spec_lenient(document)?;
    if !violations.is_empty() {
        return Err(ParseError::Validation(violations));
    }
    Ok(link)
}

/// Like [`parse_link_spec`], but hands structural violations back with the
/// materialized link instead of failing, so callers can report them.
pub fn parse_link_spec_lenient(document: &str) -> Result<(Link, Vec<Violation>), ParseError> {
    let doc: LinkSpecDoc = serde_yaml::from_str(document)?;
    if doc.metadata.version != SPEC_VERSION {
        return Err(ParseError::Version {
            found: doc.metadata.version,
        });
    }

    let top_channels = channels_from_docs(&doc.comb.channels)?;
    let cut_index = match doc.comb.cut {
        CutDoc::Index(i) => {
            if i >= top_channels.len() {
                return Err(ParseError::CutIndexOutOfRange {
                    index: i,
                    channels: top_channels.len(),
                });
            }
            i
        }
        CutDoc::Frequency { center_thz } => {
            let f = center_thz * THZ;
            top_channels
                .iter()
                .position(|ch| ch.center == f)
                .ok_or(ParseError::CutFrequencyNotFound { center_thz })?
        }
    };
    let cut_frequency = top_channels[cut_index].center;

    let srs_fit_cfg = match &doc.srs_fit {
        None => None,
        Some(s) => {
            let sigma_policy = match &s.sigma_policy {
                SigmaPolicyDoc::Named(name) if name == "uniform_average" => {
                    SigmaPolicy::UniformAverage
                }
                SigmaPolicyDoc::Named(_) => return Err(ParseError::BadSigmaPolicy),
                SigmaPolicyDoc::Override {
                    per_channel_override,
                } => SigmaPolicy::PerChannelOverride(
                    table_si(per_channel_override, 0, "sigma override", |v| v / KM).map_err(
                        |_| ParseError::BadSigmaPolicy,
                    )?,
                ),
            };
            Some(SrsFitConfig {
                raman_slope: s.raman_slope_per_w_km_thz / KM / THZ,
                sigma_policy,
            })
        }
    };

    let mut spans = Vec::with_capacity(doc.spans.len());
    let mut previous_channels = top_channels.clone();
    for (s, span_doc) in doc.spans.iter().enumerate() {
        let fiber_doc = match &span_doc.fiber {
            FiberRefDoc::Inline(f) => f.clone(),
            FiberRefDoc::Named(name) => doc
                .fiber_profiles
                .get(name)
                .cloned()
                .ok_or_else(|| ParseError::UnknownFiberProfile {
                    span: s,
                    name: name.clone(),
                })?,
        };
        let fiber = FiberParams {
            gamma: fiber_doc.gamma_per_w_km / KM,
            beta2: fiber_doc.beta2_ps2_km * 1.0e-27,
            beta3: fiber_doc.beta3_ps3_km * 1.0e-39,
            f_c: fiber_doc.fc_thz * THZ,
            length: span_doc.length_km * KM,
        };

        let channels = match &span_doc.comb {
            None => previous_channels.clone(),
            Some(SpanCombDoc::Named(name)) if name == "inherit" => {
                if s == 0 {
                    return Err(ParseError::InheritOnFirstSpan);
                }
                previous_channels.clone()
            }
            Some(SpanCombDoc::Named(_)) => return Err(ParseError::BadSpanComb { span: s }),
            Some(SpanCombDoc::Inline { channels }) => channels_from_docs(channels)?,
        };
        let span_cut_index = channels
            .iter()
            .position(|ch| ch.center == cut_frequency)
            .ok_or(ParseError::SpanCombMissingCut { span: s })?;
        let comb = WdmComb {
            channels: channels.clone(),
            cut_index: span_cut_index,
        };

        let alpha0 = match &span_doc.loss.alpha0_db_km {
            ScalarOrTable::Scalar(v) => FreqTable::constant(db_per_km_to_field_alpha(*v)),
            ScalarOrTable::Table(pairs) => {
                table_si(pairs, s, "alpha0 table", db_per_km_to_field_alpha)?
            }
        };

        let (alpha1, sigma) = match &span_doc.loss.srs {
            SrsDoc::Named(name) if name == "fit" => {
                let cfg = srs_fit_cfg
                    .as_ref()
                    .ok_or(ParseError::MissingSrsFit { span: s })?;
                let baseline: Vec<f64> =
                    comb.channels.iter().map(|ch| alpha0.nearest(ch.center)).collect();
                let fit = fit_srs_params(&comb, &baseline, cfg)
                    .map_err(|source| ParseError::SrsFit { span: s, source })?;
                (fit.alpha1, fit.sigma)
            }
            SrsDoc::Named(_) => return Err(ParseError::BadSrs { span: s }),
            SrsDoc::Explicit {
                alpha1_db_km,
                sigma_per_km,
            } => (
                table_si(alpha1_db_km, s, "alpha1 table", db_per_km_to_field_alpha)?,
                table_si(sigma_per_km, s, "sigma table", |v| v / KM)?,
            ),
        };

        let lumped_gain = match &span_doc.lumped_gain {
            GainDoc::Named(name) if name == "transparent" => LumpedGain::Transparent,
            GainDoc::Named(_) => return Err(ParseError::BadGain { span: s }),
            GainDoc::Table(pairs) => LumpedGain::Table(table_si(pairs, s, "gain table", |db| {
                10f64.powf(db / 10.0)
            })?),
        };

        previous_channels = channels;
        spans.push(Span {
            fiber,
            loss: LossModel {
                alpha0,
                alpha1,
                sigma,
            },
            lumped_gain,
            comb,
        });
    }

    let link = Link { spans };
    let violations = validate_link(&link);
    Ok((link, violations))
}

fn channel_to_doc(ch: &Channel) -> ChannelDoc {
    ChannelDoc {
        center_thz: ch.center / THZ,
        bandwidth_ghz: ch.bandwidth / GHZ,
        power_dbm: None,
        psd_w_per_hz: Some(ch.psd),
    }
}

fn table_doc(table: &FreqTable, convert: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    table
        .points()
        .iter()
        .map(|&(f, v)| (f / THZ, convert(v)))
        .collect()
}

/// Serializes a link back into document form. SRS profiles and per-channel
/// PSDs are written out explicitly, so `parse_link_spec` is an identity on
/// the SI-space link up to unit-conversion rounding.
pub fn serialize_link_spec(link: &Link) -> String {
    let spans = link
        .spans
        .iter()
        .enumerate()
        .map(|(s, span)| SpanDoc {
            length_km: span.fiber.length / KM,
            fiber: FiberRefDoc::Inline(FiberDoc {
                gamma_per_w_km: span.fiber.gamma * KM,
                beta2_ps2_km: span.fiber.beta2 / 1.0e-27,
                beta3_ps3_km: span.fiber.beta3 / 1.0e-39,
                fc_thz: span.fiber.f_c / THZ,
            }),
            loss: LossDoc {
                alpha0_db_km: ScalarOrTable::Table(table_doc(
                    &span.loss.alpha0,
                    field_alpha_to_db_per_km,
                )),
                srs: SrsDoc::Explicit {
                    alpha1_db_km: table_doc(&span.loss.alpha1, field_alpha_to_db_per_km),
                    sigma_per_km: table_doc(&span.loss.sigma, |v| v * KM),
                },
            },
            lumped_gain: match &span.lumped_gain {
                LumpedGain::Transparent => GainDoc::Named("transparent".to_string()),
                LumpedGain::Table(t) => GainDoc::Table(table_doc(t, |g| 10.0 * g.log10())),
            },
            comb: if s == 0 {
                None
            } else {
                Some(SpanCombDoc::Inline {
                    channels: span.comb.channels.iter().map(channel_to_doc).collect(),
                })
            },
        })
        .collect();

    let first = &link.spans[0].comb;
    let doc = LinkSpecDoc {
        metadata: MetadataDoc {
            name: "serialized".to_string(),
            version: SPEC_VERSION.to_string(),
        },
        comb: CombDoc {
            channels: first.channels.iter().map(channel_to_doc).collect(),
            cut: CutDoc::Index(first.cut_index),
        },
        srs_fit: None,
        fiber_profiles: BTreeMap::new(),
        spans,
    };
    serde_yaml::to_string(&doc).expect("link document serializes")
}

/// Formats a value with 9 significant digits.
pub fn sig9(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        format!("{v}")
    }
}

/// CSV report over one or more CUT evaluations, ordered by CUT frequency.
///
/// Header: `cut_frequency_THz,nli_psd_end_W_per_Hz,nli_power_dBm,gsnr_dB,spans,branch_summary`.
/// `gsnr_dB` is blank when absent.
pub fn emit_report_csv(reports: &[NliReport]) -> String {
    let mut rows: Vec<&NliReport> = reports.iter().collect();
    rows.sort_by(|a, b| a.cut_frequency.partial_cmp(&b.cut_frequency).unwrap());

    let mut out = String::from(
        "cut_frequency_THz,nli_psd_end_W_per_Hz,nli_power_dBm,gsnr_dB,spans,branch_summary\n",
    );
    for r in rows {
        let nli_power_dbm = 10.0 * (r.nli_psd_end * r.cut_bandwidth / 1.0e-3).log10();
        let gsnr_db = r
            .gsnr
            .map(|g| sig9(10.0 * g.log10()))
            .unwrap_or_default();
        let mut counts = [0usize; 3];
        for span in &r.per_span {
            for (_, branch) in &span.branches {
                counts[match branch {
                    crate::model::FormulaBranch::Li2 => 0,
                    crate::model::FormulaBranch::Asinh => 1,
                    crate::model::FormulaBranch::Degenerate => 2,
                }] += 1;
            }
        }
        out.push_str(&format!(
            "{},{},{},{},{},li2={};asinh={};degenerate={}\n",
            sig9(r.cut_frequency / THZ),
            sig9(r.nli_psd_end),
            sig9(nli_power_dbm),
            gsnr_db,
            r.per_span.len(),
            counts[0],
            counts[1],
            counts[2],
        ));
    }
    out
}
