//! Green's function, regular part and Robin function of a ball, their
//! restrictions to the symmetry axis, and sampled validators.
//!
//! With `x̂ = x − c`, `ŷ = y − c` and `Q = |x̂|²|ŷ|²/R² − 2x̂·ŷ + R²`
//! (so `Q = |x − y*|²|ŷ|²/R²` for the image point `y*`), the regular part is
//! `H(x,y) = Q^{(2−N)/2} / ((N−2)σ_N)`. The expression stays smooth at
//! `ŷ = 0`, where it reduces to `R^{2−N}/((N−2)σ_N)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bubble::sphere_area;
use crate::error::{Error, Result};

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallDomain {
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub sigma: f64,
}

impl BallDomain {
    pub fn new(dim: usize, center: Vec<f64>, radius: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Parameter(format!("N ≥ 3 required, got N = {dim}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
        }
        if center.len() != dim || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter(format!("center must be a finite point of R^{dim}")));
        }
        Ok(Self {
            dim,
            center,
            radius,
            sigma: sphere_area(dim),
        })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; dim], 1.0)
    }

    fn offset(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Parameter(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.dim
            )));
        }
        Ok(x.iter().zip(&self.center).map(|(a, c)| a - c).collect())
    }

    /// Signed distance to the sphere, positive inside.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        let xh = self.offset(x)?;
        Ok(self.radius - norm(&xh))
    }

    fn on_boundary(&self, dist: f64) -> bool {
        dist.abs() <= BOUNDARY_TOL * self.radius
    }

    fn check_closed(&self, x: &[f64]) -> Result<f64> {
        let dist = self.boundary_distance(x)?;
        if dist < -BOUNDARY_TOL * self.radius {
            return Err(Error::Domain(format!("{x:?} lies outside the ball")));
        }
        Ok(dist)
    }

    fn check_open(&self, x: &[f64]) -> Result<()> {
        let dist = self.boundary_distance(x)?;
        if dist <= BOUNDARY_TOL * self.radius {
            return Err(Error::Domain(format!("{x:?} is not in the open ball")));
        }
        Ok(())
    }

    /// Fundamental solution `Γ(ρ) = ρ^{2−N}/((N−2)σ_N)`.
    pub fn fundamental(&self, rho: f64) -> f64 {
        let nf = self.dim as f64;
        rho.powf(2.0 - nf) / ((nf - 2.0) * self.sigma)
    }

    fn image_q(&self, xh: &[f64], yh: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        dot(xh, xh) * dot(yh, yh) / r2 - 2.0 * dot(xh, yh) + r2
    }

    /// Minimum of the Robin function, attained at the center:
    /// `H₀ = R^{2−N}/((N−2)σ_N)`.
    pub fn robin_minimum(&self) -> f64 {
        self.fundamental(self.radius)
    }

    /// Nearest boundary point `p(x)` and outward unit normal there.
    pub fn project_to_boundary(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let xh = self.offset(x)?;
        let n = norm(&xh);
        if n == 0.0 {
            return Err(Error::Singularity("the center has no nearest boundary point".into()));
        }
        let nu: Vec<f64> = xh.iter().map(|v| v / n).collect();
        let p = self.center.iter().zip(&nu).map(|(c, v)| c + self.radius * v).collect();
        Ok((p, nu))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Dirichlet Green's function of `−Δ` on the ball.
pub fn green_g(d: &BallDomain, x: &[f64], y: &[f64]) -> Result<f64> {
    let dx = d.check_closed(x)?;
    let dy = d.check_closed(y)?;
    let rho = dist(x, y);
    if rho == 0.0 {
        return Err(Error::Singularity(format!("G evaluated on the diagonal at {x:?}")));
    }
    if d.on_boundary(dx) || d.on_boundary(dy) {
        return Ok(0.0);
    }
    let xh = d.offset(x)?;
    let yh = d.offset(y)?;
    let nf = d.dim as f64;
    let h = d.image_q(&xh, &yh).powf((2.0 - nf) / 2.0) / ((nf - 2.0) * d.sigma);
    Ok(d.fundamental(rho) - h)
}

/// Regular part `H(x,y) = Γ(|x−y|) − G(x,y)`; the diagonal is allowed.
pub fn robin_h(d: &BallDomain, x: &[f64], y: &[f64]) -> Result<f64> {
    d.check_open(x)?;
    d.check_open(y)?;
    let xh = d.offset(x)?;
    let yh = d.offset(y)?;
    let nf = d.dim as f64;
    Ok(d.image_q(&xh, &yh).powf((2.0 - nf) / 2.0) / ((nf - 2.0) * d.sigma))
}

/// Robin function `H(x,x)`.
pub fn robin(d: &BallDomain, x: &[f64]) -> Result<f64> {
    robin_h(d, x, x)
}

/// `∇_x H(x,y) = −Q^{−N/2} (x̂|ŷ|²/R² − ŷ)/σ_N`.
pub fn grad_x_h(d: &BallDomain, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    d.check_open(x)?;
    d.check_open(y)?;
    let xh = d.offset(x)?;
    let yh = d.offset(y)?;
    let nf = d.dim as f64;
    let q = d.image_q(&xh, &yh).powf(-nf / 2.0) / d.sigma;
    let s = dot(&yh, &yh) / (d.radius * d.radius);
    Ok(xh.iter().zip(&yh).map(|(a, b)| -q * (a * s - b)).collect())
}

/// `∇_x G(x,y) = −(x−y)/(σ_N|x−y|^N) − ∇_x H(x,y)`.
pub fn grad_x_g(d: &BallDomain, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let rho = dist(x, y);
    if rho == 0.0 {
        return Err(Error::Singularity(format!("∇G evaluated on the diagonal at {x:?}")));
    }
    let gh = grad_x_h(d, x, y)?;
    let nf = d.dim as f64;
    let c = 1.0 / (d.sigma * rho.powf(nf));
    Ok(x.iter().zip(y).zip(&gh).map(|((a, b), g)| -c * (a - b) - g).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSection {
    pub a: f64,
    pub b: f64,
}

impl AxisSection {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Parameter(format!("empty section ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    /// Chord of the `x₁`-axis through the ball. Requires the center to lie
    /// on that axis.
    pub fn of_ball(d: &BallDomain) -> Result<Self> {
        if d.center[1..].iter().any(|c| *c != 0.0) {
            return Err(Error::Domain(
                "the x₁-axis must pass through the center of the ball".into(),
            ));
        }
        Self::new(d.center[0] - d.radius, d.center[0] + d.radius)
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.a && t < self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// `∂g/∂t(t,s)` together with the second derivative of `t ↦ h(t,t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisDerivatives {
    pub dg_dt: f64,
    pub d2h: f64,
}

/// Closed-form kernels restricted to the symmetry axis of a ball.
///
/// With `τ = t − c₁` the axis kernels are
/// `h(t,s) = (R/(R² − τσ))^{N−2}/((N−2)σ_N)` and `g = Γ(|t−s|) − h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisGreen {
    pub domain: BallDomain,
    pub section: AxisSection,
}

impl AxisGreen {
    pub fn new(domain: BallDomain) -> Result<Self> {
        let section = AxisSection::of_ball(&domain)?;
        Ok(Self { domain, section })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(BallDomain::unit(dim)?)
    }

    fn nf(&self) -> f64 {
        self.domain.dim as f64
    }

    fn local(&self, t: f64) -> Result<f64> {
        if !self.section.contains(t) {
            return Err(Error::Domain(format!(
                "t = {t} outside ({}, {})",
                self.section.a, self.section.b
            )));
        }
        Ok(t - self.domain.center[0])
    }

    /// Axis point `(t, 0, …, 0)`.
    pub fn point(&self, t: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.domain.dim];
        p[0] = t;
        p
    }

    /// Regular part `h(t,s)`; `t = s` is allowed.
    pub fn h2(&self, t: f64, s: f64) -> Result<f64> {
        let (tau, sig) = (self.local(t)?, self.local(s)?);
        let r = self.domain.radius;
        let nf = self.nf();
        Ok((r / (r * r - tau * sig)).powf(nf - 2.0) / ((nf - 2.0) * self.domain.sigma))
    }

    /// Robin function on the axis, `h(t) = h(t,t)`.
    pub fn h(&self, t: f64) -> Result<f64> {
        self.h2(t, t)
    }

    pub fn g(&self, t: f64, s: f64) -> Result<f64> {
        if t == s {
            return Err(Error::Singularity(format!("g evaluated at t = s = {t}")));
        }
        Ok(self.domain.fundamental((t - s).abs()) - self.h2(t, s)?)
    }

    /// `∂h/∂t(t,s) = σ R^{N−2}/(σ_N (R² − τσ)^{N−1})` with `σ = s − c₁`.
    pub fn dh2_dt(&self, t: f64, s: f64) -> Result<f64> {
        let (tau, sig) = (self.local(t)?, self.local(s)?);
        let r = self.domain.radius;
        let nf = self.nf();
        Ok(sig * r.powf(nf - 2.0) / (self.domain.sigma * (r * r - tau * sig).powf(nf - 1.0)))
    }

    pub fn dg_dt(&self, t: f64, s: f64) -> Result<f64> {
        if t == s {
            return Err(Error::Singularity(format!("∂g/∂t evaluated at t = s = {t}")));
        }
        let nf = self.nf();
        let diff = t - s;
        let singular = -diff.signum() * diff.abs().powf(1.0 - nf) / self.domain.sigma;
        Ok(singular - self.dh2_dt(t, s)?)
    }

    /// `d/dt h(t,t) = 2τ R^{N−2}/(σ_N (R² − τ²)^{N−1})`.
    pub fn dh(&self, t: f64) -> Result<f64> {
        Ok(2.0 * self.dh2_dt(t, t)?)
    }

    /// `d²/dt² h(t,t) = 2R^{N−2}((R²−τ²) + 2(N−1)τ²)/(σ_N (R²−τ²)^N)`.
    pub fn d2h(&self, t: f64) -> Result<f64> {
        let tau = self.local(t)?;
        let r = self.domain.radius;
        let nf = self.nf();
        let w = r * r - tau * tau;
        Ok(2.0 * r.powf(nf - 2.0) * (w + 2.0 * (nf - 1.0) * tau * tau) / (self.domain.sigma * w.powf(nf)))
    }

    pub fn axis_derivatives(&self, t: f64, s: f64) -> Result<AxisDerivatives> {
        Ok(AxisDerivatives {
            dg_dt: self.dg_dt(t, s)?,
            d2h: self.d2h(t)?,
        })
    }

    /// Uniform sample grid of the interior `(a + margin, b − margin)`,
    /// endpoints included.
    pub fn sample_grid(&self, margin: f64, points: usize) -> Result<Vec<f64>> {
        let lo = self.section.a + margin;
        let hi = self.section.b - margin;
        if !(margin >= 0.0) || lo >= hi {
            return Err(Error::Config(format!(
                "margin {margin} leaves no sample interval in ({}, {})",
                self.section.a, self.section.b
            )));
        }
        if margin == 0.0 {
            return Err(Error::Config("margin must be positive; h is unbounded at the endpoints".into()));
        }
        if points < 2 {
            return Err(Error::Config("at least two sample points required".into()));
        }
        Ok((0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect())
    }

    /// Writes `(t, h(t,t), h''(t))` rows.
    pub fn write_h_table(&self, path: &Path, margin: f64, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(io_error)?;
        w.write_record(["t", "h", "d2h"]).map_err(io_error)?;
        for t in self.sample_grid(margin, points)? {
            w.serialize((t, self.h(t)?, self.d2h(t)?)).map_err(io_error)?;
        }
        w.flush().map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes `(t, s, g, ∂g/∂t)` rows for all off-diagonal grid pairs.
    pub fn write_g_table(&self, path: &Path, margin: f64, points: usize) -> Result<()> {
        let grid = self.sample_grid(margin, points)?;
        let mut w = csv::Writer::from_path(path).map_err(io_error)?;
        w.write_record(["t", "s", "g", "dg_dt"]).map_err(io_error)?;
        for &t in &grid {
            for &s in grid.iter().filter(|s| **s != t) {
                w.serialize((t, s, self.g(t, s)?, self.dg_dt(t, s)?)).map_err(io_error)?;
            }
        }
        w.flush().map_err(|e| Error::Config(e.to_string()))
    }
}

fn io_error(e: csv::Error) -> Error {
    Error::Config(format!("csv output: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub check: String,
    pub sample_count: usize,
    pub worst_value: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A3Report {
    /// Minimum of `h''` over the sample grid.
    pub convexity: ValidationReport,
    /// Maximum of `(t−s)∂g/∂t` over off-diagonal grid pairs.
    pub monotonicity: ValidationReport,
    /// `h''` at the midpoint of the section, where a ball's axis Robin
    /// function attains its smallest curvature.
    pub d2h_midpoint: f64,
}

impl A3Report {
    pub fn pass(&self) -> bool {
        self.convexity.pass && self.monotonicity.pass
    }
}

pub const DEFAULT_MARGIN_FRACTION: f64 = 0.02;

/// Samples convexity of the axis Robin function and the sign of
/// `(t−s)∂g/∂t` on a uniform grid. `margin` defaults to `0.02·(b−a)`.
pub fn validate_a3(axis: &AxisGreen, resolution: usize, margin: Option<f64>) -> Result<A3Report> {
    if resolution < 16 {
        return Err(Error::Config(format!("grid resolution {resolution} < 16")));
    }
    let margin = margin.unwrap_or(DEFAULT_MARGIN_FRACTION * axis.section.length());
    if margin >= axis.section.length() / 2.0 {
        return Err(Error::Config(format!(
            "margin {margin} ≥ half the section length {}",
            axis.section.length() / 2.0
        )));
    }
    let grid = axis.sample_grid(margin, resolution)?;
    let mut min_d2h = f64::INFINITY;
    let mut convex_notes = Vec::new();
    for &t in &grid {
        let v = axis.d2h(t)?;
        if v <= 0.0 {
            convex_notes.push(format!("h''({t}) = {v:e}"));
        }
        min_d2h = min_d2h.min(v);
    }
    let mut max_mono = f64::NEG_INFINITY;
    let mut pairs = 0;
    let mut mono_notes = Vec::new();
    for &t in &grid {
        for &s in &grid {
            if t == s {
                continue;
            }
            let v = (t - s) * axis.dg_dt(t, s)?;
            if v >= 0.0 && mono_notes.len() < 20 {
                mono_notes.push(format!("(t−s)∂g/∂t at ({t}, {s}) = {v:e}"));
            }
            max_mono = max_mono.max(v);
            pairs += 1;
        }
    }
    Ok(A3Report {
        convexity: ValidationReport {
            check: "robin_axis_convexity".into(),
            sample_count: grid.len(),
            worst_value: min_d2h,
            pass: min_d2h > 0.0,
            notes: convex_notes,
        },
        monotonicity: ValidationReport {
            check: "green_axis_monotonicity".into(),
            sample_count: pairs,
            worst_value: max_mono,
            pass: max_mono < 0.0,
            notes: mono_notes,
        },
        d2h_midpoint: axis.d2h(0.5 * (axis.section.a + axis.section.b))?,
    })
}

/// One sample of the near-boundary expansion of `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub family: usize,
    pub depth: f64,
    /// `|H − lead|·|x̄−y|^{N−2}/d(x)`.
    pub value_constant: f64,
    /// `|∂_ν H − lead_ν|·|x̄−y|^{N−2}`.
    pub normal_constant: f64,
    /// `H·(N−2)σ_N|x̄−y|^{N−2}`.
    pub leading_ratio: f64,
}

/// Evaluates the near-boundary expansion at a single `(x, y)`.
///
/// `x̄ = 2p(x) − x` is the reflection of `x` through the sphere's nearest
/// point. Errors if `x̄ = y`.
pub fn expansion_row(d: &BallDomain, x: &[f64], y: &[f64], family: usize) -> Result<ExpansionRow> {
    let depth = d.boundary_distance(x)?;
    let (p, nu) = d.project_to_boundary(x)?;
    let xbar: Vec<f64> = p.iter().zip(x).map(|(pi, xi)| 2.0 * pi - xi).collect();
    let rho = dist(&xbar, y);
    if rho <= 1e-12 * d.radius {
        return Err(Error::Singularity(format!("reflection of {x:?} coincides with y")));
    }
    let nf = d.dim as f64;
    let h = robin_h(d, x, y)?;
    let lead = d.fundamental(rho);
    let grad = grad_x_h(d, x, y)?;
    let dnu_h = dot(&grad, &nu);
    let diff: Vec<f64> = xbar.iter().zip(y).map(|(a, b)| a - b).collect();
    let lead_nu = dot(&diff, &nu) / (d.sigma * rho.powf(nf));
    let rn = rho.powf(nf - 2.0);
    Ok(ExpansionRow {
        family,
        depth,
        value_constant: (h - lead).abs() * rn / depth,
        normal_constant: (dnu_h - lead_nu).abs() * rn,
        leading_ratio: h * (nf - 2.0) * d.sigma * rn,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub value_stability: ValidationReport,
    pub normal_stability: ValidationReport,
    pub leading_ratio: ValidationReport,
    pub rows: Vec<ExpansionRow>,
}

impl ExpansionReport {
    pub fn pass(&self) -> bool {
        self.value_stability.pass && self.normal_stability.pass && self.leading_ratio.pass
    }
}

/// Near-boundary sample family: `x = p − depth·ν` for the boundary point
/// `p = c + R·direction`, paired with a fixed `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFamily {
    pub direction: Vec<f64>,
    pub y: Vec<f64>,
}

/// Checks the near-boundary expansions of `H` and `∂_νH`.
///
/// For each family, the fitted constants at successive depths must stay
/// within a factor `2` of each other, and the leading ratio at the smallest
/// depth must lie within `ratio_tol` of `1`. Depths at or beyond the strip
/// width `R/4` are skipped with a note.
pub fn check_boundary_expansion(
    d: &BallDomain,
    families: &[BoundaryFamily],
    depths: &[f64],
    ratio_tol: f64,
) -> Result<ExpansionReport> {
    let strip = d.radius / 4.0;
    let mut notes = Vec::new();
    let mut rows = Vec::new();
    let mut value_worst: f64 = 1.0;
    let mut normal_worst: f64 = 1.0;
    let mut ratio_worst: f64 = 0.0;
    let mut compared = 0;
    let min_depth = depths.iter().copied().filter(|v| *v < strip).fold(f64::INFINITY, f64::min);
    for (fi, fam) in families.iter().enumerate() {
        let n = norm(&fam.direction);
        if fam.direction.len() != d.dim || n == 0.0 {
            return Err(Error::Parameter(format!("family {fi}: bad direction")));
        }
        let nu: Vec<f64> = fam.direction.iter().map(|v| v / n).collect();
        let mut fam_rows: Vec<ExpansionRow> = Vec::new();
        for &depth in depths {
            if !(depth > 0.0 && depth < strip) {
                notes.push(format!("family {fi}: depth {depth} outside the strip (0, {strip}) skipped"));
                continue;
            }
            let x: Vec<f64> = d
                .center
                .iter()
                .zip(&nu)
                .map(|(c, v)| c + (d.radius - depth) * v)
                .collect();
            match expansion_row(d, &x, &fam.y, fi) {
                Ok(row) => fam_rows.push(ExpansionRow { depth, ..row }),
                Err(e) => notes.push(format!("family {fi}, depth {depth}: rejected ({e})")),
            }
        }
        for pair in fam_rows.windows(2) {
            let rv = ratio_spread(pair[0].value_constant, pair[1].value_constant);
            let rn = ratio_spread(pair[0].normal_constant, pair[1].normal_constant);
            value_worst = value_worst.max(rv);
            normal_worst = normal_worst.max(rn);
            compared += 1;
        }
        for row in fam_rows.iter().filter(|r| r.depth == min_depth) {
            ratio_worst = ratio_worst.max((row.leading_ratio - 1.0).abs());
        }
        rows.extend(fam_rows);
    }
    let ratio_count = rows.iter().filter(|r| r.depth == min_depth).count();
    Ok(ExpansionReport {
        value_stability: ValidationReport {
            check: "boundary_expansion_value_constant".into(),
            sample_count: compared,
            worst_value: value_worst,
            pass: compared > 0 && value_worst <= 2.0,
            notes: notes.clone(),
        },
        normal_stability: ValidationReport {
            check: "boundary_expansion_normal_constant".into(),
            sample_count: compared,
            worst_value: normal_worst,
            pass: compared > 0 && normal_worst <= 2.0,
            notes: Vec::new(),
        },
        leading_ratio: ValidationReport {
            check: "boundary_expansion_leading_ratio".into(),
            sample_count: ratio_count,
            worst_value: ratio_worst,
            pass: ratio_count > 0 && ratio_worst <= ratio_tol,
            notes: Vec::new(),
        },
        rows,
    })
}

/// `max(a,b)/min(a,b)`, or infinity if either vanishes.
fn ratio_spread(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo <= 0.0 {
        if hi <= 1e-14 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        hi / lo
    }
}

/// Checks `(x−y)·∇_x G(x,y) < 0` on every pair.
pub fn check_directional_monotonicity(d: &BallDomain, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<ValidationReport> {
    let mut worst = f64::NEG_INFINITY;
    let mut notes = Vec::new();
    for (x, y) in pairs {
        let g = grad_x_g(d, x, y)?;
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let v = dot(&diff, &g);
        if v >= 0.0 && notes.len() < 20 {
            notes.push(format!("(x−y)·∇G = {v:e} at x = {x:?}, y = {y:?}"));
        }
        worst = worst.max(v);
    }
    Ok(ValidationReport {
        check: "green_directional_monotonicity".into(),
        sample_count: pairs.len(),
        worst_value: worst,
        pass: !pairs.is_empty() && worst < 0.0,
        notes,
    })
}

/// Uniform random point of the open ball, shrunk by `shrink` in radius.
pub fn random_interior_point<R: rand::Rng>(d: &BallDomain, shrink: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n < 1.0 && n > 0.0 {
            return d
                .center
                .iter()
                .zip(&v)
                .map(|(c, vi)| c + shrink * d.radius * vi)
                .collect();
        }
    }
}

/// Sampled check of the ordering inequalities
/// `g(t₁,t₄) ≤ g(t₁,t₃) ≤ g(t₁,t₂)` and `g(t₂,t₄), g(t₁,t₃) ≤ g(t₂,t₃)` on
/// increasing quadruples.
pub fn check_interaction_ordering(axis: &AxisGreen, quadruples: &[[f64; 4]]) -> Result<ValidationReport> {
    let mut worst = f64::NEG_INFINITY;
    let mut notes = Vec::new();
    for q in quadruples {
        let [t1, t2, t3, t4] = *q;
        if !(t1 < t2 && t2 < t3 && t3 < t4) {
            return Err(Error::Parameter(format!("quadruple {q:?} is not increasing")));
        }
        let g12 = axis.g(t1, t2)?;
        let g13 = axis.g(t1, t3)?;
        let g14 = axis.g(t1, t4)?;
        let g23 = axis.g(t2, t3)?;
        let g24 = axis.g(t2, t4)?;
        let v = (g14 - g13).max(g13 - g12).max(g24 - g23).max(g13 - g23);
        if v > 0.0 && notes.len() < 20 {
            notes.push(format!("violation {v:e} at {q:?}"));
        }
        worst = worst.max(v);
    }
    Ok(ValidationReport {
        check: "axis_interaction_ordering".into(),
        sample_count: quadruples.len(),
        worst_value: worst,
        pass: !quadruples.is_empty() && worst <= 0.0,
        notes,
    })
}
