//! Reduced energies on the symmetry axis.
//!
//! For a configuration `(a, Λ, t)` of `k` signed bubbles on the axis,
//!
//! ```text
//! Ψ_k = ½ Σ Λᵢ² h(tᵢ) − Σ_{i<j} aᵢaⱼ ΛᵢΛⱼ g(tᵢ,tⱼ) − Σ log Λᵢ
//! Φ   = ½ Σ Λᵢ² h(tᵢ) + Σ_{i<j} ΛᵢΛⱼ g(tᵢ,tⱼ) − Σ log Λᵢ
//! ```
//!
//! and `Ψ̃` is `Ψ_4` with signs `(+,−,+,−)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::AxisGreen;

pub const ALTERNATING: [i32; 4] = [1, -1, 1, -1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub k: usize,
    pub signs: Vec<i32>,
    #[serde(rename = "Lambda")]
    pub lambda: Vec<f64>,
    pub t: Vec<f64>,
}

impl Configuration {
    pub fn new(signs: Vec<i32>, lambda: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            k: signs.len(),
            signs,
            lambda,
            t,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Four bubbles with signs `(+,−,+,−)`.
    pub fn alternating(lambda: [f64; 4], t: [f64; 4]) -> Result<Self> {
        Self::new(ALTERNATING.to_vec(), lambda.to_vec(), t.to_vec())
    }

    /// Checks lengths, signs and positivity; ordering is not required.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("k ≥ 1 required".into()));
        }
        if self.signs.len() != self.k || self.lambda.len() != self.k || self.t.len() != self.k {
            return Err(Error::Parameter(format!(
                "k = {} but {} signs, {} scalings, {} positions",
                self.k,
                self.signs.len(),
                self.lambda.len(),
                self.t.len()
            )));
        }
        if self.signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Parameter(format!("signs must be ±1, got {:?}", self.signs)));
        }
        if self.lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Parameter(format!("scalings must be positive, got {:?}", self.lambda)));
        }
        if self.t.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter(format!("positions must be finite, got {:?}", self.t)));
        }
        Ok(())
    }

    /// Membership in the configuration space: positive scalings and strictly
    /// increasing positions inside the section.
    pub fn in_m(&self, axis: &AxisGreen) -> bool {
        self.validate().is_ok()
            && self.t.iter().all(|t| axis.section.contains(*t))
            && self.t.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_alternating(&self) -> bool {
        self.signs == ALTERNATING
    }

    /// `(Λ₁, …, Λ_k, t₁, …, t_k)`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.lambda.iter().chain(&self.t).copied().collect()
    }

    pub fn from_vec(signs: &[i32], x: &[f64]) -> Result<Self> {
        let k = signs.len();
        if x.len() != 2 * k {
            return Err(Error::Parameter(format!("expected {} coordinates, got {}", 2 * k, x.len())));
        }
        Self::new(signs.to_vec(), x[..k].to_vec(), x[k..].to_vec())
    }

    /// Image under `t ↦ 2c − t` with the index order reversed.
    pub fn reflected(&self, center: f64) -> Self {
        Self {
            k: self.k,
            signs: self.signs.iter().rev().copied().collect(),
            lambda: self.lambda.iter().rev().copied().collect(),
            t: self.t.iter().rev().map(|t| 2.0 * center - t).collect(),
        }
    }
}

fn check_positions(cfg: &Configuration, axis: &AxisGreen) -> Result<()> {
    cfg.validate()?;
    for (i, t) in cfg.t.iter().enumerate() {
        if !axis.section.contains(*t) {
            return Err(Error::Domain(format!(
                "t[{i}] = {t} outside ({}, {})",
                axis.section.a, axis.section.b
            )));
        }
        if cfg.t[..i].contains(t) {
            return Err(Error::Singularity(format!("coincident positions t = {t}")));
        }
    }
    Ok(())
}

/// `½ΣΛᵢ²h − Σ_{i<j} c_ij ΛᵢΛⱼ g − Σ log Λᵢ` with interaction weights `c_ij`.
fn energy<C: Fn(usize, usize) -> f64>(cfg: &Configuration, axis: &AxisGreen, coupling: C) -> Result<f64> {
    check_positions(cfg, axis)?;
    let (l, t) = (&cfg.lambda, &cfg.t);
    let mut v = 0.0;
    for i in 0..cfg.k {
        v += 0.5 * l[i] * l[i] * axis.h(t[i])? - l[i].ln();
        for j in i + 1..cfg.k {
            v -= coupling(i, j) * l[i] * l[j] * axis.g(t[i], t[j])?;
        }
    }
    Ok(v)
}

fn energy_gradient<C: Fn(usize, usize) -> f64>(
    cfg: &Configuration,
    axis: &AxisGreen,
    coupling: C,
) -> Result<Vec<f64>> {
    check_positions(cfg, axis)?;
    let k = cfg.k;
    let (l, t) = (&cfg.lambda, &cfg.t);
    let mut grad = vec![0.0; 2 * k];
    for i in 0..k {
        let mut dl = l[i] * axis.h(t[i])? - 1.0 / l[i];
        let mut dt = 0.5 * l[i] * l[i] * axis.dh(t[i])?;
        for j in (0..k).filter(|j| *j != i) {
            let c = coupling(i.min(j), i.max(j));
            dl -= c * l[j] * axis.g(t[i], t[j])?;
            dt -= c * l[i] * l[j] * axis.dg_dt(t[i], t[j])?;
        }
        grad[i] = dl;
        grad[k + i] = dt;
    }
    Ok(grad)
}

pub fn psi_k(cfg: &Configuration, axis: &AxisGreen) -> Result<f64> {
    let a = &cfg.signs;
    energy(cfg, axis, |i, j| (a[i] * a[j]) as f64)
}

/// Gradient of `Ψ_k`, `(∂/∂Λ₁, …, ∂/∂Λ_k, ∂/∂t₁, …, ∂/∂t_k)`.
pub fn grad_psi_k(cfg: &Configuration, axis: &AxisGreen) -> Result<Vec<f64>> {
    let a = &cfg.signs;
    energy_gradient(cfg, axis, |i, j| (a[i] * a[j]) as f64)
}

fn check_tilde(cfg: &Configuration, axis: &AxisGreen) -> Result<()> {
    if cfg.k != 4 || !cfg.is_alternating() {
        return Err(Error::Parameter(format!(
            "Ψ̃ needs k = 4 with signs (+,−,+,−), got k = {} signs {:?}",
            cfg.k, cfg.signs
        )));
    }
    check_positions(cfg, axis)?;
    if !cfg.t.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config(format!("positions {:?} are not increasing", cfg.t)));
    }
    Ok(())
}

pub fn psi_tilde(cfg: &Configuration, axis: &AxisGreen) -> Result<f64> {
    check_tilde(cfg, axis)?;
    psi_k(cfg, axis)
}

pub fn grad_psi_tilde(cfg: &Configuration, axis: &AxisGreen) -> Result<Vec<f64>> {
    check_tilde(cfg, axis)?;
    grad_psi_k(cfg, axis)
}

/// Penalty `Φ`, all interactions attractive.
pub fn phi_penalty(cfg: &Configuration, axis: &AxisGreen) -> Result<f64> {
    energy(cfg, axis, |_, _| -1.0)
}

pub fn grad_phi_penalty(cfg: &Configuration, axis: &AxisGreen) -> Result<Vec<f64>> {
    energy_gradient(cfg, axis, |_, _| -1.0)
}

/// `Φ < M`.
pub fn in_d(cfg: &Configuration, axis: &AxisGreen, m: f64) -> Result<bool> {
    Ok(phi_penalty(cfg, axis)? < m)
}

/// Stationarity identities `Λᵢ ∂Ψ_k/∂Λᵢ + 1`, i.e.
/// `Λᵢ²h(tᵢ) − Σ_{j≠i} aᵢaⱼΛᵢΛⱼ g(tᵢ,tⱼ)`, which equal `1` at a critical point.
pub fn stationarity_identities(cfg: &Configuration, axis: &AxisGreen) -> Result<Vec<f64>> {
    let g = grad_psi_k(cfg, axis)?;
    Ok((0..cfg.k).map(|i| cfg.lambda[i] * g[i] + 1.0).collect())
}

pub fn log_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

/// Both sides of the single-bubble coercivity inequality
/// `½Λ²h − log Λ ≥ ¼Λ²h + |log Λ| − 2 log⁺(2/√H₀)`.
pub fn single_coercivity_sides(lambda: f64, h: f64, h0: f64) -> (f64, f64) {
    let lhs = 0.5 * lambda * lambda * h - lambda.ln();
    let rhs = 0.25 * lambda * lambda * h + lambda.ln().abs() - 2.0 * log_plus(2.0 / h0.sqrt());
    (lhs, rhs)
}

/// Lower bound for `Φ`:
/// `¼ΣΛᵢ²h + Σ|log Λᵢ| + Σ_{i<j}ΛᵢΛⱼg − 8 log⁺(2/√H₀)` (for k = 4).
pub fn phi_lower_bound(cfg: &Configuration, axis: &AxisGreen) -> Result<f64> {
    check_positions(cfg, axis)?;
    let h0 = axis.domain.robin_minimum();
    let (l, t) = (&cfg.lambda, &cfg.t);
    let mut v = -2.0 * cfg.k as f64 * log_plus(2.0 / h0.sqrt());
    for i in 0..cfg.k {
        v += 0.25 * l[i] * l[i] * axis.h(t[i])? + l[i].ln().abs();
        for j in i + 1..cfg.k {
            v += l[i] * l[j] * axis.g(t[i], t[j])?;
        }
    }
    Ok(v)
}

/// `(μ₁, μ, μ₄, t) ↦ (μ₁/√μ, √μ, √μ, μ₄/√μ, t)` with alternating signs.
pub fn mu_embed(mu1: f64, mu: f64, mu4: f64, t: [f64; 4]) -> Result<Configuration> {
    for (name, v) in [("μ₁", mu1), ("μ", mu), ("μ₄", mu4)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
        }
    }
    let s = mu.sqrt();
    Configuration::alternating([mu1 / s, s, s, mu4 / s], t)
}

/// `(Λ₁Λ₂, Λ₂Λ₃, Λ₃Λ₄, t)`, inverting [`mu_embed`] on its image.
pub fn mu_coords(cfg: &Configuration) -> Result<(f64, f64, f64, [f64; 4])> {
    if cfg.k != 4 {
        return Err(Error::Parameter(format!("k = 4 required, got {}", cfg.k)));
    }
    let l = &cfg.lambda;
    Ok((l[0] * l[1], l[1] * l[2], l[2] * l[3], [cfg.t[0], cfg.t[1], cfg.t[2], cfg.t[3]]))
}

/// Both sides of
/// `−Σ_{i<j}(−1)^{i+j}ΛᵢΛⱼg(tᵢ,tⱼ) ≥ Λ₂Λ₃g(t₂,t₃) + Λ₁Λ₄g(t₁,t₄)`.
pub fn kappa0_sides(cfg: &Configuration, axis: &AxisGreen) -> Result<(f64, f64)> {
    check_tilde(cfg, axis)?;
    let (l, t) = (&cfg.lambda, &cfg.t);
    let mut lhs = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            lhs -= s * l[i] * l[j] * axis.g(t[i], t[j])?;
        }
    }
    let rhs = l[1] * l[2] * axis.g(t[1], t[2])? + l[0] * l[3] * axis.g(t[0], t[3])?;
    Ok((lhs, rhs))
}

/// `t⁰ = (t0, t0+r0, t0+2r0, t0+3r0)`.
pub fn t_zero(t0: f64, r0: f64) -> [f64; 4] {
    [t0, t0 + r0, t0 + 2.0 * r0, t0 + 3.0 * r0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T0R0Options {
    /// Pair-grid points on `[t0−4r0, t0+4r0]` for the coarse check.
    pub coarse_points: usize,
    /// Refinement factor of the re-validation grid.
    pub refine: usize,
    /// Fraction of the largest admissible `r0` that is returned.
    pub safety: f64,
}

impl Default for T0R0Options {
    fn default() -> Self {
        Self {
            coarse_points: 33,
            refine: 10,
            safety: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T0R0 {
    pub t0: f64,
    pub r0: f64,
    /// `−max(½h(t)+½h(s)−g(t,s))` on the coarse grid.
    pub margin: f64,
    /// Same quantity on the refined grid.
    pub fine_margin: f64,
    /// Distance of `[t0−4r0, t0+4r0]` from the section endpoints.
    pub containment_margin: f64,
}

/// Largest value of `½h(t)+½h(s)−g(t,s)` over distinct pairs of a uniform
/// grid on `[t0−4r0, t0+4r0]`. Negative means the pair condition holds.
pub fn pair_condition_max(axis: &AxisGreen, t0: f64, r0: f64, points: usize) -> Result<f64> {
    let lo = t0 - 4.0 * r0;
    let hi = t0 + 4.0 * r0;
    if !(axis.section.contains(lo) && axis.section.contains(hi)) {
        return Err(Error::Domain(format!(
            "[{lo}, {hi}] not inside ({}, {})",
            axis.section.a, axis.section.b
        )));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let hs: Vec<f64> = grid.iter().map(|t| axis.h(*t)).collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..points {
        for j in i + 1..points {
            let v = 0.5 * hs[i] + 0.5 * hs[j] - axis.g(grid[i], grid[j])?;
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

/// Grid search for `(t0, r0)` with `[t0−4r0, t0+4r0] ⊂ (a,b)` and
/// `½h(t)+½h(s) − g(t,s) < 0` for all distinct `t, s` in that interval.
///
/// Candidates for `t0` are tried from the section midpoint outwards; for
/// each, `r0` decreases geometrically from `(b−a)/8`. The first admissible
/// `r0` is scaled by `safety` and re-validated on both grids.
pub fn find_t0_r0(axis: &AxisGreen, opts: &T0R0Options) -> Result<T0R0> {
    if opts.coarse_points < 3 || opts.refine < 1 || !(opts.safety > 0.0 && opts.safety <= 1.0) {
        return Err(Error::Config(format!("bad search options {opts:?}")));
    }
    let (a, b) = (axis.section.a, axis.section.b);
    let len = b - a;
    let mid = 0.5 * (a + b);
    let mut t0s = vec![mid];
    for k in 1..=16 {
        let off = len * k as f64 / 48.0;
        t0s.push(mid - off);
        t0s.push(mid + off);
    }
    let fine_points = (opts.coarse_points - 1) * opts.refine + 1;
    let mut tried = 0;
    for &t0 in &t0s {
        let room = (t0 - a).min(b - t0);
        let mut r0 = (len / 8.0).min(room / 4.0) * (1.0 - 1e-9);
        while r0 > len * 1e-5 {
            tried += 1;
            if pair_condition_max(axis, t0, r0, opts.coarse_points)? < 0.0 {
                let r = r0 * opts.safety;
                let margin = -pair_condition_max(axis, t0, r, opts.coarse_points)?;
                let fine_margin = -pair_condition_max(axis, t0, r, fine_points)?;
                if margin > 0.0 && fine_margin > 0.0 {
                    return Ok(T0R0 {
                        t0,
                        r0: r,
                        margin,
                        fine_margin,
                        containment_margin: (t0 - 4.0 * r - a).min(b - t0 - 4.0 * r),
                    });
                }
            }
            r0 *= 0.9;
        }
    }
    Err(Error::Search(format!(
        "no (t0, r0) satisfies the pair condition after {tried} candidates; \
         try a finer candidate grid"
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    #[serde(rename = "H0")]
    pub h0: f64,
    pub lower: f64,
    pub upper: f64,
    pub t0: f64,
    pub r0: f64,
    pub t_zero: [f64; 4],
}

/// `upper = g(t₁⁰,t₂⁰) + g(t₂⁰,t₃⁰) + g(t₃⁰,t₄⁰) + g(t₁⁰,t₄⁰)` and
/// `lower = −8 log⁺(2/√H₀)`.
pub fn bounds_report(axis: &AxisGreen, t0: f64, r0: f64) -> Result<BoundsReport> {
    if !(r0 > 0.0) {
        return Err(Error::Parameter(format!("r0 must be positive, got {r0}")));
    }
    let tz = t_zero(t0, r0);
    let upper = axis.g(tz[0], tz[1])? + axis.g(tz[1], tz[2])? + axis.g(tz[2], tz[3])? + axis.g(tz[0], tz[3])?;
    let h0 = axis.domain.robin_minimum();
    Ok(BoundsReport {
        h0,
        lower: -8.0 * log_plus(2.0 / h0.sqrt()),
        upper,
        t0,
        r0,
        t_zero: tz,
    })
}
