//! Special-function kernel of the closed-form integrals.
//!
//! The closed forms need the odd real function
//! `j * [Li2(-j x) - Li2(j x)] = 2 * Ti2(x)` where `Ti2` is the inverse
//! tangent integral, plus the two approximants `pi * asinh(x / 2)` and
//! `pi * ln(1 + x)`.
//!
//! Evaluation strategy for the exact kernel, all in real arithmetic:
//! * `|x| <= 0.9` — alternating power series `2 * sum (-1)^k x^(2k+1) / (2k+1)^2`
//! * `0.9 < |x| < 1/0.9` — Taylor expansion about `x = 1`, where the power
//!   series converges too slowly for full double precision
//! * `|x| >= 1/0.9` — inversion identity `Ti2(x) = pi/2 * ln(x) + Ti2(1/x)`
//!
//! All functions here are pure and reentrant.

use std::f64::consts::PI;
use thiserror::Error;

/// Catalan's constant, `Ti2(1)`.
const CATALAN: f64 = 0.915_965_594_177_219_0;

/// Series truncation: stop when the next term falls below this fraction of
/// the partial sum.
const SERIES_EPS: f64 = 1e-17;
/// Term-count cap for the alternating series.
const MAX_TERMS: usize = 200;
/// Switch radius between the power series / inversion identity and the
/// Taylor expansion about 1.
const NEAR_ONE: f64 = 0.9;

/// `j * [Li2(-j x) - Li2(j x)]`, the exact kernel `2 * Ti2(x)`.
///
/// Odd and strictly increasing; grows as `pi * ln(x)` for large `x`.
pub fn li2_imag_diff(x: f64) -> f64 {
    if x < 0.0 {
        return -li2_imag_diff(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x <= NEAR_ONE {
        2.0 * ti2_series(x)
    } else if x < 1.0 / NEAR_ONE {
        2.0 * ti2_near_one(x)
    } else {
        // Ti2(x) = pi/2 * ln(x) + Ti2(1/x); 1/x lands in the series range.
        PI * x.ln() + 2.0 * ti2_series(1.0 / x)
    }
}

/// First approximant of the kernel: `pi * asinh(x / 2)`.
pub fn li2_diff_asinh_approx(x: f64) -> f64 {
    PI * (x / 2.0).asinh()
}

/// Second approximant of the kernel: `pi * ln(1 + x)`, stated for the
/// magnitude form only.
pub fn li2_diff_log_approx(x: f64) -> Result<f64, NegativeArgument> {
    if x < 0.0 {
        return Err(NegativeArgument(x));
    }
    Ok(PI * x.ln_1p())
}

/// The log approximant rejects negative arguments.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("log approximant requires a non-negative argument, got {0}")]
pub struct NegativeArgument(pub f64);

/// `Ti2(x) = sum (-1)^k x^(2k+1) / (2k+1)^2` for `0 < x <= NEAR_ONE`.
fn ti2_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for k in 1..MAX_TERMS {
        term *= -x2;
        let n = (2 * k + 1) as f64;
        let contrib = term / (n * n);
        sum += contrib;
        if contrib.abs() < SERIES_EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// `Ti2(x)` for `x` near 1 via the Taylor expansion about 1.
///
/// `arctan(t)` about `t = 1 + s` satisfies `(2 + 2s + s^2) * arctan'(t) = 1`,
/// which gives a stable three-term recurrence for its Taylor coefficients;
/// dividing the series by `(1 + s)` and integrating termwise yields the
/// expansion of `Ti2`. The nearest singularities sit at `t = ±j`, distance
/// `sqrt(2)`, so the expansion converges fast over the whole patch band.
fn ti2_near_one(x: f64) -> f64 {
    const N: usize = 36;
    // arctan(1 + s) = pi/4 + sum a[n] s^(n+1) / (n+1)
    let mut a = [0.0f64; N];
    a[0] = 0.5;
    a[1] = -0.5;
    for n in 2..N {
        a[n] = -a[n - 1] - 0.5 * a[n - 2];
    }
    // arctan coefficients over s^m, then divide by (1 + s):
    // g[m] = A[m] - g[m-1] where A[0] = pi/4, A[m] = a[m-1] / m.
    let mut g = [0.0f64; N];
    g[0] = std::f64::consts::FRAC_PI_4;
    for m in 1..N {
        g[m] = a[m - 1] / (m as f64) - g[m - 1];
    }
    // Ti2(1 + s) = Catalan + sum g[m] s^(m+1) / (m+1)
    let s = x - 1.0;
    let mut acc = 0.0;
    let mut s_pow = s;
    for (m, gm) in g.iter().enumerate() {
        acc += gm * s_pow / ((m + 1) as f64);
        s_pow *= s;
    }
    CATALAN + acc
}
