//! Shared scenario builders for the benchmark targets.

use ignli::{Channel, FiberParams, FreqTable, Link, LossModel, LumpedGain, Span, WdmComb};

/// SMF-like span with `n` channels on a 100 GHz grid, middle channel as
/// CUT, and a linear SRS tilt at a tenth of the baseline loss.
pub fn smf_span(n: usize) -> Span {
    let alpha0 = ignli::db_per_km_to_field_alpha(0.2);
    let channels: Vec<Channel> = (0..n)
        .map(|i| Channel {
            center: 193.1e12 + 100e9 * (i as f64 - (n as f64 - 1.0) / 2.0),
            bandwidth: 75e9,
            psd: 1e-14,
        })
        .collect();
    let tilt: Vec<(f64, f64)> = channels
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let x = i as f64 - (n as f64 - 1.0) / 2.0;
            (ch.center, 0.1 * alpha0 * x / ((n as f64 - 1.0) / 2.0).max(1.0))
        })
        .collect();
    Span {
        fiber: FiberParams {
            gamma: 1.3e-3,
            beta2: -21.3e-27,
            beta3: 0.12e-39,
            f_c: 193.1e12,
            length: 80e3,
        },
        loss: LossModel {
            alpha0: FreqTable::constant(alpha0),
            alpha1: FreqTable::new(tilt).expect("sorted centers"),
            sigma: FreqTable::constant(2.0 * alpha0),
        },
        lumped_gain: LumpedGain::Transparent,
        comb: WdmComb {
            channels,
            cut_index: n / 2,
        },
    }
}

/// Multi-span transparent link over [`smf_span`].
pub fn smf_link(spans: usize, channels: usize) -> Link {
    Link {
        spans: vec![smf_span(channels); spans],
    }
}
