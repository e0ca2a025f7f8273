//! Adaptive Gauss-Kronrod quadrature shared by the oracle tiers.
//!
//! 15-point Kronrod panels with embedded 7-point Gauss error estimates,
//! refined worst-first. Callers may seed the panel set themselves, which is
//! how the oracle caps panel widths against oscillatory spatial integrands.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Kronrod abscissae for the G7-K15 rule (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
/// Gauss weights of the embedded 7-point rule.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];
/// Kronrod weights.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Scalar type a panel rule can integrate.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

/// One integration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
}

impl Panel {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// Quadrature failed to reach the requested tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("quadrature did not converge: achieved relative error {achieved:.3e}, requested {requested:.3e}")]
pub struct QuadError {
    pub achieved: f64,
    pub requested: f64,
}

/// G7-K15 rule on one panel: returns (value, error estimate).
pub fn gk15<V, F>(f: &F, a: f64, b: f64) -> (V, f64)
where
    V: QuadValue,
    F: Fn(f64) -> V + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center.scale(WGK[7]);
    let mut gauss = f_center.scale(WG[3]);

    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        let pair = lo.add(hi);
        kronrod = kronrod.add(pair.scale(WGK[j]));
        if j % 2 == 1 {
            gauss = gauss.add(pair.scale(WG[j / 2]));
        }
    }

    let value = kronrod.scale(half);
    let err = kronrod.add(gauss.scale(-1.0)).norm() * half.abs();
    (value, err)
}

struct HeapItem<V> {
    err: f64,
    panel: Panel,
    value: V,
}

impl<V> PartialEq for HeapItem<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for HeapItem<V> {}
impl<V> PartialOrd for HeapItem<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for HeapItem<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Worst-first adaptive refinement over caller-provided seed panels.
///
/// Panels only ever shrink, so any width cap enforced by the seeding
/// survives refinement. Returns (value, error estimate).
pub fn adaptive_panels<V, F>(
    f: &F,
    seeds: &[Panel],
    rel_tol: f64,
    max_subdivisions: u32,
) -> Result<(V, f64), QuadError>
where
    V: QuadValue,
    F: Fn(f64) -> V + ?Sized,
{
    let mut heap: BinaryHeap<HeapItem<V>> = BinaryHeap::with_capacity(seeds.len() + 64);
    let mut total = V::zero();
    let mut total_err = 0.0;

    for p in seeds {
        if p.width() <= 0.0 {
            continue;
        }
        let (v, e) = gk15(f, p.a, p.b);
        total = total.add(v);
        total_err += e;
        heap.push(HeapItem {
            err: e,
            panel: *p,
            value: v,
        });
    }

    let tol_of = |value: V| rel_tol * value.norm() + f64::MIN_POSITIVE;

    let mut splits = 0;
    while total_err > tol_of(total) && splits < max_subdivisions {
        let worst = match heap.pop() {
            Some(w) => w,
            None => break,
        };
        let mid = 0.5 * (worst.panel.a + worst.panel.b);
        if mid <= worst.panel.a || mid >= worst.panel.b {
            // Interval at floating-point resolution; nothing left to gain.
            heap.push(worst);
            break;
        }
        let (v_lo, e_lo) = gk15(f, worst.panel.a, mid);
        let (v_hi, e_hi) = gk15(f, mid, worst.panel.b);
        total = total.add(v_lo).add(v_hi).add(worst.value.scale(-1.0));
        total_err += e_lo + e_hi - worst.err;
        heap.push(HeapItem {
            err: e_lo,
            panel: Panel::new(worst.panel.a, mid),
            value: v_lo,
        });
        heap.push(HeapItem {
            err: e_hi,
            panel: Panel::new(mid, worst.panel.b),
            value: v_hi,
        });
        splits += 1;
    }

    // Rebuild the error sum to shed incremental-update drift.
    total_err = heap.iter().map(|i| i.err).sum();
    if total_err > tol_of(total) {
        return Err(QuadError {
            achieved: total_err / total.norm().max(f64::MIN_POSITIVE),
            requested: rel_tol,
        });
    }
    Ok((total, total_err))
}

/// Adaptive integration of `f` over a single interval.
pub fn adaptive<V, F>(
    f: &F,
    panel: Panel,
    rel_tol: f64,
    max_subdivisions: u32,
) -> Result<(V, f64), QuadError>
where
    V: QuadValue,
    F: Fn(f64) -> V + ?Sized,
{
    adaptive_panels(f, &[panel], rel_tol, max_subdivisions)
}

/// Seeds `[a, b]` with panels no wider than `max_width`.
pub fn capped_seeds(a: f64, b: f64, max_width: f64) -> Vec<Panel> {
    if b <= a {
        return Vec::new();
    }
    let span = b - a;
    if !max_width.is_finite() || max_width <= 0.0 || max_width >= span {
        return vec![Panel::new(a, b)];
    }
    let n = (span / max_width).ceil() as usize;
    let n = n.clamp(1, 4_000_000);
    let step = span / n as f64;
    (0..n)
        .map(|i| {
            let lo = a + step * i as f64;
            let hi = if i + 1 == n { b } else { a + step * (i + 1) as f64 };
            Panel::new(lo, hi)
        })
        .collect()
}
