//! Command-line front end: compute NLI/GSNR for one CUT or sweep every
//! channel, compare the closed form against the oracle tiers, print fitted
//! SRS parameters, and validate link files.
//!
//! Exit codes: 0 on success, 1 on validation failure, 2 on computation or
//! I/O errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ignli::{
    emit_report_csv, gsnr, island_integral, island_params, link_nli_psd, parse_link_spec,
    parse_link_spec_lenient, sig9, span_power_transfer, BranchPolicy, IslandParams, Link,
    NliReport, OracleTier, ParseError, QuadratureConfig,
};
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ignli",
    about = "Closed-form incoherent GN-model NLI estimator for WDM links",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Auto,
    Li2,
    Asinh,
}

impl From<BranchArg> for BranchPolicy {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Auto => BranchPolicy::Auto,
            BranchArg::Li2 => BranchPolicy::Li2,
            BranchArg::Asinh => BranchPolicy::Asinh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Rational,
    Matched,
    Full,
}

impl From<TierArg> for OracleTier {
    fn from(t: TierArg) -> Self {
        match t {
            TierArg::Rational => OracleTier::Rational,
            TierArg::Matched => OracleTier::Matched,
            TierArg::Full => OracleTier::Full,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Link description file.
    #[arg(long)]
    pub link: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Closed-form branch selection.
    #[arg(long, value_enum, default_value_t = BranchArg::Auto)]
    pub branch: BranchArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// NLI at one channel under test.
    Compute {
        #[command(flatten)]
        common: CommonArgs,
        /// CUT as a channel index or a center frequency in THz; defaults
        /// to the file's designation.
        #[arg(long)]
        cut: Option<String>,
        /// Per-channel ASE power in dBm; enables the GSNR column.
        #[arg(long)]
        ase_dbm: Option<f64>,
    },
    /// NLI with every channel taking its turn as the CUT.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Per-channel ASE power in dBm; enables the GSNR column.
        #[arg(long)]
        ase_dbm: Option<f64>,
    },
    /// Closed form vs quadrature oracle, island by island.
    CompareOracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Oracle integrand tier.
        #[arg(long, value_enum, default_value_t = TierArg::Rational)]
        tier: TierArg,
        /// Oracle relative tolerance.
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
        /// CUT as a channel index or a center frequency in THz.
        #[arg(long)]
        cut: Option<String>,
    },
    /// Materialized per-channel SRS parameters.
    FitSrs {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Structural validation of a link file.
    Validate {
        /// Link description file.
        #[arg(long)]
        link: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Computation(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Computation(_) => EXIT_COMPUTATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Computation(m) => m,
        }
    }
}

fn computation(err: impl std::fmt::Display) -> Failure {
    Failure::Computation(err.to_string())
}

fn load_link(path: &Path) -> Result<Link, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| computation(format!("cannot read {}: {e}", path.display())))?;
    parse_link_spec(&text).map_err(|e| match e {
        ParseError::Validation(_) => Failure::Validation(e.to_string()),
        other => computation(other),
    })
}

/// Re-designates the CUT on every span, by channel index or THz center.
fn with_cut(link: &Link, selector: &str) -> Result<Link, Failure> {
    let mut out = link.clone();
    if let Ok(index) = selector.parse::<usize>() {
        for span in &mut out.spans {
            if index >= span.comb.channels.len() {
                return Err(computation(format!(
                    "cut index {index} out of range for a {}-channel span",
                    span.comb.channels.len()
                )));
            }
            span.comb.cut_index = index;
        }
        return Ok(out);
    }
    let thz: f64 = selector
        .parse()
        .map_err(|_| computation(format!("cannot parse cut {selector:?} as index or THz")))?;
    let f = thz * 1.0e12;
    for span in &mut out.spans {
        span.comb.cut_index = span
            .comb
            .channels
            .iter()
            .position(|ch| ch.center == f)
            .ok_or_else(|| computation(format!("CUT frequency not found: {thz} THz")))?;
    }
    Ok(out)
}

fn with_cut_index(link: &Link, index: usize) -> Link {
    let mut out = link.clone();
    for span in &mut out.spans {
        span.comb.cut_index = index;
    }
    out
}

/// End-of-link CUT power for the GSNR ratio: the last span's CUT launch
/// power times that span's transfer.
fn cut_power_at_link_end(link: &Link) -> f64 {
    let last = link.spans.last().expect("validated link has spans");
    let cut = last.comb.cut();
    cut.power() * span_power_transfer(last, cut.center)
}

fn report_for(link: &Link, policy: BranchPolicy, ase_dbm: Option<f64>) -> Result<NliReport, Failure> {
    let mut report = link_nli_psd(link, policy).map_err(computation)?;
    if let Some(dbm) = ase_dbm {
        let ase_power = 1.0e-3 * 10f64.powf(dbm / 10.0);
        let ratio =
            gsnr(&report, cut_power_at_link_end(link), ase_power).map_err(computation)?;
        report.gsnr = Some(ratio);
    }
    Ok(report)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => fs::write(path, text)
            .map_err(|e| computation(format!("cannot write {}: {e}", path.display()))),
    }
}

fn run_compute(
    common: &CommonArgs,
    cut: &Option<String>,
    ase_dbm: Option<f64>,
) -> Result<(), Failure> {
    let link = load_link(&common.link)?;
    let link = match cut {
        Some(sel) => with_cut(&link, sel)?,
        None => link,
    };
    let report = report_for(&link, common.branch.into(), ase_dbm)?;
    emit(&common.out, &emit_report_csv(&[report]))
}

/// Sweeps every channel as CUT. The output is byte-identical for any job
/// count: per-channel work is independent and rows are merged in frequency
/// order.
pub fn sweep_csv(
    link: &Link,
    policy: BranchPolicy,
    jobs: usize,
    ase_dbm: Option<f64>,
) -> Result<String, String> {
    let n_channels = link.spans[0].comb.channels.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| e.to_string());
    let pool = match pool {
        Ok(p) => p,
        Err(e) => return Err(e),
    };
    let reports: Result<Vec<NliReport>, String> = pool.install(|| {
        use rayon::prelude::*;
        (0..n_channels)
            .into_par_iter()
            .map(|k| {
                let designated = with_cut_index(link, k);
                report_for(&designated, policy, ase_dbm)
                    .map_err(|f| f.message().to_string())
            })
            .collect()
    });
    Ok(emit_report_csv(&reports?))
}

fn run_sweep(
    common: &CommonArgs,
    jobs: usize,
    ase_dbm: Option<f64>,
) -> Result<(), Failure> {
    let link = load_link(&common.link)?;
    let csv = sweep_csv(&link, common.branch.into(), jobs, ase_dbm)
        .map_err(Failure::Computation)?;
    emit(&common.out, &csv)
}

fn island_kind(p: &IslandParams) -> &'static str {
    if p.is_sci() {
        "sci"
    } else {
        "xci"
    }
}

fn run_compare_oracle(
    common: &CommonArgs,
    tier: TierArg,
    rel_tol: f64,
    cut: &Option<String>,
) -> Result<(), Failure> {
    let link = load_link(&common.link)?;
    let link = match cut {
        Some(sel) => with_cut(&link, sel)?,
        None => link,
    };
    let cfg = QuadratureConfig::with_rel_tol(rel_tol);
    let mut out =
        String::from("span,channel,kind,branch,closed_form,oracle,rel_error,tier\n");
    let tier_name = match tier {
        TierArg::Rational => "rational",
        TierArg::Matched => "matched",
        TierArg::Full => "full",
    };
    for (s, span) in link.spans.iter().enumerate() {
        for idx in 0..span.comb.channels.len() {
            let p = island_params(span, idx).map_err(computation)?;
            let (closed, branch) =
                island_integral(&p, common.branch.into()).map_err(computation)?;
            let oracle =
                ignli::island_quadrature(&p, span, tier.into(), &cfg).map_err(computation)?;
            let rel = ((closed - oracle) / oracle).abs();
            out.push_str(&format!(
                "{s},{idx},{},{},{},{},{},{tier_name}\n",
                island_kind(&p),
                branch.as_str(),
                sig9(closed),
                sig9(oracle),
                sig9(rel),
            ));
        }
    }
    emit(&common.out, &out)
}

fn run_fit_srs(common: &CommonArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&common.link)
        .map_err(|e| computation(format!("cannot read {}: {e}", common.link.display())))?;
    let (link, violations) = parse_link_spec_lenient(&text).map_err(computation)?;
    let mut out = String::from("span,channel,center_THz,alpha1_dB_km,sigma_per_km,flagged\n");
    for (s, span) in link.spans.iter().enumerate() {
        for (idx, ch) in span.comb.channels.iter().enumerate() {
            let sample = span.loss.sample_nearest(ch.center);
            let flagged = sample.alpha1.abs() >= sample.alpha0;
            out.push_str(&format!(
                "{s},{idx},{},{},{},{}\n",
                sig9(ch.center / 1.0e12),
                sig9(ignli::model::field_alpha_to_db_per_km(sample.alpha1)),
                sig9(sample.sigma * 1.0e3),
                flagged,
            ));
        }
    }
    emit(&common.out, &out)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        ))
    }
}

fn run_validate(link_path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(link_path)
        .map_err(|e| computation(format!("cannot read {}: {e}", link_path.display())))?;
    match parse_link_spec_lenient(&text) {
        Err(e) => Err(computation(e)),
        Ok((_, violations)) if violations.is_empty() => {
            println!("OK");
            Ok(())
        }
        Ok((_, violations)) => Err(Failure::Validation(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        )),
    }
}

/// Runs one invocation, mapping failures to the exit-code contract.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Compute {
            common,
            cut,
            ase_dbm,
        } => run_compute(common, cut, *ase_dbm),
        Command::Sweep {
            common,
            jobs,
            ase_dbm,
        } => run_sweep(common, *jobs, *ase_dbm),
        Command::CompareOracle {
            common,
            tier,
            rel_tol,
            cut,
        } => run_compare_oracle(common, *tier, *rel_tol, cut),
        Command::FitSrs { common } => run_fit_srs(common),
        Command::Validate { link } => run_validate(link),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("{}", failure.message());
            failure.code()
        }
    }
}
