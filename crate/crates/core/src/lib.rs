//! Closed-form incoherent GN-model estimate of nonlinear interference (NLI)
//! in multi-span WDM links.
//!
//! The model handles arbitrary combs and span sequences with
//! frequency-dependent dispersion, frequency-dependent loss and an
//! SRS-induced power tilt expressed as an exponentially decaying loss
//! perturbation. Per-span contributions accumulate in power at the link end.
//!
//! Modules:
//! * [`model`] — domain types (spans, combs, loss profiles) and validation
//! * [`specfun`] — the inverse-tangent-integral kernel and its approximants
//! * [`physics`] — dispersion/loss sampling, span and link power transfer,
//!   SRS parameter fitting
//! * [`engine`] — closed-form per-span NLI integrals and link accumulation
//! * [`quad`] — adaptive Gauss-Kronrod panels shared by the oracle
//! * [`oracle`] — quadrature reference implementations at three
//!   approximation tiers
//! * [`config`] — link description files and CSV reports

pub mod config;
pub mod engine;
pub mod model;
pub mod oracle;
pub mod physics;
pub mod quad;
pub mod specfun;

pub use config::{
    emit_report_csv, parse_link_spec, parse_link_spec_lenient, serialize_link_spec, sig9,
    ParseError,
};
pub use engine::{
    gsnr, i_cut_asinh, i_cut_li2, i_degenerate, i_xci_asinh, i_xci_li2, island_integral,
    island_params, link_nli_psd, span_nli_psd, BranchPolicy, EngineError, IslandParams, SpanNli,
};
pub use model::{
    db_per_km_to_field_alpha, validate_link, Channel, FiberParams, FormulaBranch, FreqTable,
    Link, LossModel, LumpedGain, NliReport, Span, SpanContribution, Violation, WdmComb,
};
pub use oracle::{
    island_quadrature, rho_sq, span_nli_quadrature, DeltaAlphaConvention, OracleTier, QuadError,
    QuadratureConfig, SpatialLimit,
};
pub use physics::{
    alpha_profile, beta2_eff, fiber_power_transfer, fit_srs_params, link_transfer,
    span_power_transfer, PhysicsError, SigmaPolicy, SrsFit, SrsFitConfig,
};
pub use specfun::{li2_diff_asinh_approx, li2_diff_log_approx, li2_imag_diff};
