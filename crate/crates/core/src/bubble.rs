//! Bubble profiles and the dimension-dependent constants of the energy
//! expansion.
//!
//! The standard bubble is
//! `U(x) = α_N (μ / (μ² + |x−ξ|²))^{(N−2)/2}` with `μ = λ ε^{1/(N−2)}` and
//! `α_N = (N(N−2))^{(N−2)/4}`. The constants are radial integrals of the
//! unit bubble `U = α_N (1+r²)^{−(N−2)/2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_kronrod, tanh_sinh_half_line};

/// Area of the unit sphere `S^{N−1}` in `R^N`, `2π^{N/2}/Γ(N/2)`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// `α_N = (N(N−2))^{(N−2)/4}`.
pub fn alpha_n(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

/// Critical exponent `2* = 2N/(N−2)`.
pub fn critical_exponent(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * nf / (nf - 2.0)
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Parameter(format!("N ≥ 3 required, got N = {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub dim: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub center: Vec<f64>,
}

impl BubbleParams {
    pub fn new(dim: usize, epsilon: f64, lambda: f64, center: Vec<f64>) -> Result<Self> {
        let p = Self {
            dim,
            epsilon,
            lambda,
            center,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.dim)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!("ε must be positive, got {}", self.epsilon)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("λ must be positive, got {}", self.lambda)));
        }
        if self.center.len() != self.dim || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter(format!(
                "center must be a finite point of R^{}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Concentration width `μ = λ ε^{1/(N−2)}`.
    pub fn mu(&self) -> f64 {
        self.lambda * self.epsilon.powf(1.0 / (self.dim as f64 - 2.0))
    }

    /// Value of the bubble at squared distance `d2` from its center.
    pub fn profile(&self, d2: f64) -> f64 {
        let mu = self.mu();
        let e = (self.dim as f64 - 2.0) / 2.0;
        alpha_n(self.dim) * (mu / (mu * mu + d2)).powf(e)
    }

    fn dist2(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Parameter(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.dim
            )));
        }
        Ok(x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

pub fn eval_bubble(p: &BubbleParams, x: &[f64]) -> Result<f64> {
    p.validate()?;
    let d2 = p.dist2(x)?;
    Ok(p.profile(d2))
}

/// `∇U = −α_N (N−2) μ^{(N−2)/2} (μ² + |x−ξ|²)^{−N/2} (x−ξ)`.
pub fn eval_bubble_gradient(p: &BubbleParams, x: &[f64]) -> Result<Vec<f64>> {
    p.validate()?;
    let d2 = p.dist2(x)?;
    let nf = p.dim as f64;
    let mu = p.mu();
    let factor = -alpha_n(p.dim) * (nf - 2.0) * mu.powf((nf - 2.0) / 2.0) * (mu * mu + d2).powf(-nf / 2.0);
    Ok(x.iter().zip(&p.center).map(|(a, b)| factor * (a - b)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    /// Split point between adaptive quadrature and the analytic tail.
    pub r_cut: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Terms kept in each tail series.
    pub tail_terms: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            r_cut: 50.0,
            abs_tol: 1e-15,
            max_panels: 4000,
            tail_terms: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "alphaN")]
    pub alpha_n: f64,
    #[serde(rename = "CN")]
    pub c_big: f64,
    #[serde(rename = "cN")]
    pub c_small: f64,
    #[serde(rename = "omegaN")]
    pub omega: f64,
    #[serde(rename = "gammaN")]
    pub gamma: f64,
    /// Energy of one unit bubble, `(1/2 − 1/2*) ∫U^{2*}`.
    pub bubble_energy: f64,
    /// `∫U^{2*}` over `R^N`.
    pub int_u_crit: f64,
    /// `∫U^{2*−1}` over `R^N`.
    pub int_u_crit_minus_one: f64,
    /// `∫|∇U|²` over `R^N`.
    pub int_grad_sq: f64,
    /// `∫U^{2*} log U` over `R^N`.
    pub int_u_crit_log_u: f64,
    /// Summed error estimate of the primary rule, or the disagreement with
    /// the tanh–sinh cross-check if that is larger.
    pub quad_error: f64,
    pub provenance: String,
}

/// Generalised binomial coefficients `binom(−q, m)` for `m < terms`.
fn neg_binomials(q: f64, terms: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(terms);
    let mut b = 1.0;
    for m in 0..terms {
        out.push(b);
        b *= (-q - m as f64) / (m as f64 + 1.0);
    }
    out
}

/// `∫_{R}^{∞} r^e dr` for `e < −1`.
fn power_tail(e: f64, r: f64) -> f64 {
    -r.powf(e + 1.0) / (e + 1.0)
}

/// `∫_{R}^{∞} r^e log r dr` for `e < −1`.
fn power_log_tail(e: f64, r: f64) -> f64 {
    let e1 = e + 1.0;
    r.powf(e1) * (-r.ln() / e1 + 1.0 / (e1 * e1))
}

/// Tail `∫_{R}^{∞} r^p (1+r²)^{−q} [log(1+r²)]^j dr`, `j ∈ {0, 1}`, with a
/// truncation estimate. Uses the expansions in powers of `r^{−2}`.
fn moment_tail(p: f64, q: f64, with_log: bool, r: f64, terms: usize) -> (f64, f64) {
    let b = neg_binomials(q, terms);
    let mut sum = 0.0;
    let mut last = 0.0;
    for (m, bm) in b.iter().enumerate() {
        let e = p - 2.0 * q - 2.0 * m as f64;
        let term = if with_log {
            let mut inner = 2.0 * power_log_tail(e, r);
            for k in 1..terms {
                let ck = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                inner += ck * power_tail(e - 2.0 * k as f64, r);
            }
            bm * inner
        } else {
            bm * power_tail(e, r)
        };
        sum += term;
        last = term.abs();
    }
    (sum, last)
}

/// `r^p (1+r²)^{−q} [log(1+r²)]^j`, evaluated without overflow for large r.
fn moment_integrand(p: f64, q: f64, with_log: bool, r: f64) -> f64 {
    if r <= 0.0 {
        return if p == 0.0 && !with_log { 1.0 } else { 0.0 };
    }
    let (base, log1p) = if r > 1.0 {
        let inv2 = 1.0 / (r * r);
        (
            r.powf(p - 2.0 * q) * (1.0 + inv2).powf(-q),
            2.0 * r.ln() + inv2.ln_1p(),
        )
    } else {
        (r.powf(p) * (1.0 + r * r).powf(-q), (r * r).ln_1p())
    };
    if with_log {
        base * log1p
    } else {
        base
    }
}

#[derive(Debug, Clone, Copy)]
struct Moment {
    value: f64,
    error: f64,
    discrepancy: f64,
}

fn radial_moment(p: f64, q: f64, with_log: bool, quad: &QuadSettings) -> Result<Moment> {
    if p - 2.0 * q >= -1.0 {
        return Err(Error::Parameter(format!("moment r^{p}(1+r²)^-{q} diverges")));
    }
    let f = |r: f64| moment_integrand(p, q, with_log, r);
    let core = gauss_kronrod(f, 0.0, quad.r_cut, quad.abs_tol, 0.0, quad.max_panels)?;
    let (tail, tail_err) = moment_tail(p, q, with_log, quad.r_cut, quad.tail_terms);
    let value = core.value + tail;
    let check = tanh_sinh_half_line(f, 1e-14 * value.abs().max(1.0), 14)?;
    Ok(Moment {
        value,
        error: core.error + tail_err,
        discrepancy: (check.value - value).abs(),
    })
}

pub fn compute_constants(n: usize, quad: &QuadSettings) -> Result<ConstantsTable> {
    check_dimension(n)?;
    if !(quad.r_cut > 1.0 && quad.abs_tol > 0.0 && quad.tail_terms >= 2) {
        return Err(Error::Parameter("quadrature settings out of range".into()));
    }
    let nf = n as f64;
    let sigma = sphere_area(n);
    let alpha = alpha_n(n);
    let ps = critical_exponent(n);

    let a = radial_moment(nf - 1.0, nf, false, quad)?;
    let b = radial_moment(nf - 1.0, (nf + 2.0) / 2.0, false, quad)?;
    let g = radial_moment(nf + 1.0, nf, false, quad)?;
    let l = radial_moment(nf - 1.0, nf, true, quad)?;

    let int_crit = sigma * alpha.powf(ps) * a.value;
    let int_crit1 = sigma * alpha.powf(ps - 1.0) * b.value;
    let int_grad = sigma * alpha * alpha * (nf - 2.0) * (nf - 2.0) * g.value;
    let int_log = sigma * alpha.powf(ps) * (alpha.ln() * a.value - 0.5 * (nf - 2.0) * l.value);

    let omega = int_crit / ps;
    let c_small = omega / (int_crit1 * int_crit1);
    let c_big = int_grad - int_crit / ps;
    let gamma = int_crit / (ps * ps) - int_log / ps + 0.5 * omega * c_small.ln();
    let bubble_energy = (0.5 - 1.0 / ps) * int_crit;

    // Propagate the relative error of each moment onto the constants.
    let rel = |m: &Moment| (m.error.max(m.discrepancy)) / m.value.abs();
    let worst_rel = [a, b, g, l].iter().map(rel).fold(0.0, f64::max);
    let scale = [int_crit, int_grad, int_log.abs(), omega, gamma.abs()]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(*v));
    let quad_error = 3.0 * worst_rel * scale;

    let table = ConstantsTable {
        n,
        alpha_n: alpha,
        c_big,
        c_small,
        omega,
        gamma,
        bubble_energy,
        int_u_crit: int_crit,
        int_u_crit_minus_one: int_crit1,
        int_grad_sq: int_grad,
        int_u_crit_log_u: int_log,
        quad_error,
        provenance: "computed by radial quadrature (adaptive Gauss-Kronrod with analytic tail, tanh-sinh cross-check)".into(),
    };
    if !(table.c_big.is_finite() && table.gamma.is_finite() && table.c_small > 0.0) {
        return Err(Error::Quadrature(format!("non-finite constants for N = {n}")));
    }
    Ok(table)
}

/// Scaling `λ = (c_N Λ²)^{1/(N−2)}` that pairs with the reduced energy.
///
/// With this normalisation the single-bubble energy expands as
/// `E_N − ½ ω_N ε log ε − γ_N ε + ω_N ε Ψ₁(Λ) + o(ε)`.
pub fn lambda_of_big_lambda(big_lambda: f64, table: &ConstantsTable) -> Result<f64> {
    if !(big_lambda > 0.0 && big_lambda.is_finite()) {
        return Err(Error::Parameter(format!("Λ must be positive, got {big_lambda}")));
    }
    check_dimension(table.n)?;
    Ok((table.c_small * big_lambda * big_lambda).powf(1.0 / (table.n as f64 - 2.0)))
}

/// Inverse of [`lambda_of_big_lambda`].
pub fn big_lambda_of_lambda(lambda: f64, table: &ConstantsTable) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("λ must be positive, got {lambda}")));
    }
    check_dimension(table.n)?;
    Ok((lambda.powf(table.n as f64 - 2.0) / table.c_small).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(n: usize) -> BubbleParams {
        BubbleParams::new(n, 1.0, 1.0, vec![0.0; n]).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn peak_and_unit_distance_values() {
        let p = unit(3);
        assert!((eval_bubble(&p, &[0.0; 3]).unwrap() - 3f64.powf(0.25)).abs() < 1e-12);
        let v = eval_bubble(&p, &[1.0, 0.0, 0.0]).unwrap();
        assert!((v - 3f64.powf(0.25) * 0.5f64.sqrt()).abs() < 1e-12);
        assert!((v - 0.930605).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BubbleParams::new(3, 0.0, 1.0, vec![0.0; 3]).is_err());
        assert!(BubbleParams::new(3, 1.0, -1.0, vec![0.0; 3]).is_err());
        assert!(BubbleParams::new(2, 1.0, 1.0, vec![0.0; 2]).is_err());
        assert!(eval_bubble(&unit(3), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn gradient_vanishes_at_center() {
        let g = eval_bubble_gradient(&unit(4), &[0.0; 4]).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tail_series_matches_direct_integration() {
        let q = QuadSettings::default();
        for (p, qq, log) in [(2.0, 3.0, false), (4.0, 3.0, false), (2.0, 3.0, true), (3.0, 3.0, true)] {
            let (tail, _) = moment_tail(p, qq, log, 5.0, 30);
            let direct = gauss_kronrod(|r| moment_integrand(p, qq, log, r), 5.0, 5000.0, 1e-15, 0.0, q.max_panels)
                .unwrap()
                .value
                + moment_tail(p, qq, log, 5000.0, 30).0;
            assert!((tail - direct).abs() < 1e-12 * direct.abs().max(1e-3), "{p} {qq} {log}: {tail} {direct}");
        }
    }

    #[test]
    fn lambda_map_round_trip() {
        let t = compute_constants(3, &QuadSettings::default()).unwrap();
        let l = lambda_of_big_lambda(1.0 / t.c_small.sqrt(), &t).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let l1 = lambda_of_big_lambda(1.0, &t).unwrap();
        assert!((l1 - t.c_small).abs() < 1e-15);
        assert!((big_lambda_of_lambda(l1, &t).unwrap() - 1.0).abs() < 1e-12);
        assert!(lambda_of_big_lambda(0.0, &t).is_err());
    }
}
