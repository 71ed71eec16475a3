//! One-dimensional quadrature rules used for the radial constants.
//!
//! Two independent rules are provided so that every constant can be
//! cross-checked: a globally adaptive Gauss–Kronrod (7/15) rule on finite
//! intervals, and a tanh–sinh (double exponential) rule on the half line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut values = [(0.0, 0.0); 7];
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(center - half * x);
        let f2 = f(center + half * x);
        values[j] = (f1, f2);
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    // Error heuristic of QUADPACK's qk15.
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error,
    }
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Parameter(format!("bad interval [{a}, {b}]")));
    }
    let first = kronrod_panel(&f, a, b);
    let mut heap = BinaryHeap::new();
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut evaluations = 15;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= max_panels {
            return Err(Error::Quadrature(format!(
                "{} panels on [{a}, {b}], estimate {value:.6e} ± {error:.3e}",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod_panel(&f, worst.a, mid);
        let right = kronrod_panel(&f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum in a fixed order so the result does not depend on heap layout.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Tanh–sinh quadrature of `f` over the half line `[0, ∞)`.
///
/// Uses the substitution `r = s/(1-s)` followed by the double-exponential
/// map on `s ∈ (0, 1)`. Levels are halved until two successive estimates
/// agree to `tol`.
pub fn tanh_sinh_half_line<F: Fn(f64) -> f64>(f: F, tol: f64, max_level: usize) -> Result<QuadResult> {
    use std::f64::consts::FRAC_PI_2;
    // s = 1/(1 + e^{-2u}), 1 - s = 1/(1 + e^{2u}), u = (π/2) sinh τ
    let g = |tau: f64| -> f64 {
        let u = FRAC_PI_2 * tau.sinh();
        let du = FRAC_PI_2 * tau.cosh();
        if u.abs() > 350.0 {
            return 0.0;
        }
        let s = 1.0 / (1.0 + (-2.0 * u).exp());
        let one_minus = 1.0 / (1.0 + (2.0 * u).exp());
        // ds/du = 2 s (1 - s)
        let ds = 2.0 * s * one_minus * du;
        let r = s / one_minus;
        let jac = ds / (one_minus * one_minus);
        if !jac.is_finite() || jac == 0.0 {
            return 0.0;
        }
        let v = f(r) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let tau_max = 4.5;
    let mut h = 0.5;
    let mut evaluations = 0;
    let mut sum = g(0.0);
    let mut k = 1;
    while (k as f64) * h <= tau_max {
        sum += g(k as f64 * h) + g(-(k as f64) * h);
        evaluations += 2;
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..max_level {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tau_max {
            sum += g(k as f64 * h) + g(-(k as f64) * h);
            evaluations += 2;
            k += 2;
        }
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= tol.max(1e-15 * estimate.abs()) {
            return Ok(QuadResult {
                value: estimate,
                error: diff,
                evaluations,
            });
        }
    }
    Err(Error::Quadrature(format!(
        "tanh-sinh did not settle after {max_level} levels (estimate {estimate:.6e})"
    )))
}
