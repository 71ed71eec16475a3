//! Critical points of the reduced energy.
//!
//! The max-min critical point of `Ψ̃` has Morse index one, so the solver
//! follows eigenvectors: it ascends along the lowest Hessian mode and
//! descends along the others (partitioned rational-function steps inside
//! a trust radius). Once the Hessian shows the target inertia and the
//! gradient is small, it switches to full Newton steps with backtracking on
//! `‖∇Ψ̃‖²`. Every trial point is kept inside the configuration space by
//! halving the step; positions are never reordered.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::AxisGreen;
use crate::reduced::{
    grad_psi_k, mu_embed, phi_penalty, psi_k, stationarity_identities, BoundsReport, Configuration, ALTERNATING,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guards {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Minimum distance of every position from the section endpoints.
    pub t_margin: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            lambda_min: 1e-6,
            lambda_max: 1e6,
            t_margin: 1e-6,
        }
    }
}

impl Guards {
    pub fn admits(&self, cfg: &Configuration, axis: &AxisGreen) -> bool {
        let (a, b) = (axis.section.a, axis.section.b);
        cfg.validate().is_ok()
            && cfg.lambda.iter().all(|l| *l >= self.lambda_min && *l <= self.lambda_max)
            && cfg.t.iter().all(|t| *t > a + self.t_margin && *t < b - self.t_margin)
            && cfg.t.windows(2).all(|w| w[0] < w[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Eigenvector following towards `target_index` ascent directions, then
    /// Newton near convergence.
    EigenvectorFollowing,
    /// Newton steps with backtracking on `‖∇Ψ‖²` throughout; converges to
    /// whichever nondegenerate critical point attracts the start.
    DampedNewton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleOptions {
    pub method: Method,
    /// Convergence threshold on `‖∇Ψ̃‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Trust radius for eigenvector-following steps.
    pub trust_radius: f64,
    /// Number of ascent directions (Morse index) sought.
    pub target_index: usize,
    /// Gradient norm below which Newton steps are tried.
    pub newton_switch: f64,
    pub guards: Guards,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self {
            method: Method::EigenvectorFollowing,
            tol: 1e-8,
            max_iter: 50,
            trust_radius: 0.1,
            target_index: 1,
            newton_switch: 1e-1,
            guards: Guards::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleReport {
    pub config: Configuration,
    pub value: f64,
    pub grad_norm: f64,
    /// `(n₊, n₋, n₀)`.
    pub inertia: [usize; 3],
    pub eigenvalues: Vec<f64>,
    /// Set by [`verify_bounds`]; `false` until checked.
    pub bounds_ok: bool,
    pub iterations: usize,
    /// `Λᵢ²h(tᵢ) − Σ_{j≠i} aᵢaⱼΛᵢΛⱼg(tᵢ,tⱼ)` for each `i`.
    pub identities: Vec<f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Symmetrised Hessian with its relative asymmetry before symmetrisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian {
    pub matrix: DMatrix<f64>,
    pub asymmetry: f64,
}

/// Central differences of the analytic gradient with one Richardson step.
/// The base step is `1e−4·max(|x_k|, 1)`, reduced if it would leave the
/// configuration space.
pub fn hessian_psi_k(cfg: &Configuration, axis: &AxisGreen) -> Result<Hessian> {
    let x = cfg.to_vec();
    let n = x.len();
    let k = cfg.k;
    let min_gap = cfg
        .t
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .chain(cfg.t.iter().map(|t| (t - axis.section.a).min(axis.section.b - t)))
        .fold(f64::INFINITY, f64::min);
    let grad_at = |y: &[f64]| -> Result<DVector<f64>> {
        let c = Configuration::from_vec(&cfg.signs, y)?;
        Ok(DVector::from_vec(grad_psi_k(&c, axis)?))
    };
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut h = 1e-4 * x[j].abs().max(1.0);
        if j >= k {
            h = h.min(0.25 * min_gap);
        } else {
            h = h.min(0.25 * x[j]);
        }
        if !(h > 1e3 * f64::EPSILON * x[j].abs().max(1e-300)) {
            return Err(Error::Numerical(format!("finite-difference step underflow in coordinate {j}")));
        }
        let diff = |h: f64| -> Result<DVector<f64>> {
            let mut p = x.clone();
            let mut q = x.clone();
            p[j] += h;
            q[j] -= h;
            Ok((grad_at(&p)? - grad_at(&q)?) / (2.0 * h))
        };
        let coarse = diff(h)?;
        let fine = diff(0.5 * h)?;
        let col = (fine * 4.0 - coarse) / 3.0;
        m.set_column(j, &col);
    }
    let asym = (&m - m.transpose()).norm() / m.norm().max(f64::MIN_POSITIVE);
    let sym = (&m + m.transpose()) * 0.5;
    Ok(Hessian { matrix: sym, asymmetry: asym })
}

pub fn hessian_psi_tilde(cfg: &Configuration, axis: &AxisGreen) -> Result<Hessian> {
    if cfg.k != 4 || !cfg.is_alternating() {
        return Err(Error::Parameter("Ψ̃ needs k = 4 with signs (+,−,+,−)".into()));
    }
    hessian_psi_k(cfg, axis)
}

/// Sorted eigenvalues and `(n₊, n₋, n₀)`; eigenvalues within
/// `rel_tol·max|λ|` of zero count as null.
pub fn inertia(h: &DMatrix<f64>, rel_tol: f64) -> (Vec<f64>, [usize; 3]) {
    let eig = SymmetricEigen::new(h.clone());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let scale = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zero = rel_tol * scale;
    let pos = ev.iter().filter(|v| **v > zero).count();
    let neg = ev.iter().filter(|v| **v < -zero).count();
    (ev.clone(), [pos, neg, ev.len() - pos - neg])
}

fn sorted_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let vals = idx.iter().map(|i| eig.eigenvalues[*i]).collect();
    let vecs = DMatrix::from_columns(&idx.iter().map(|i| eig.eigenvectors.column(*i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

/// Partitioned rational-function step: maximise along the lowest `m` modes,
/// minimise along the rest.
fn prfo_step(w: &[f64], v: &DMatrix<f64>, g: &DVector<f64>, m: usize) -> DVector<f64> {
    let gk = v.transpose() * g;
    let n = w.len();
    let mut st = DVector::zeros(n);
    if m > 0 {
        // Ascent block: largest root of ν = Σ g²/(ν − w) above w[m−1].
        let f = |nu: f64| nu - (0..m).map(|k| gk[k] * gk[k] / (nu - w[k])).sum::<f64>();
        let gnorm: f64 = (0..m).map(|k| gk[k] * gk[k]).sum::<f64>().sqrt();
        let mut lo = w[m - 1] + 1e-300_f64.max(1e-14 * w[m - 1].abs());
        let mut hi = w[m - 1].max(0.0) + gnorm + 1.0;
        while f(hi) < 0.0 {
            hi = 2.0 * hi + 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let nu = 0.5 * (lo + hi);
        for k in 0..m {
            let den = w[k] - nu;
            st[k] = if den != 0.0 { -gk[k] / den } else { 0.0 };
        }
    }
    if m < n {
        let f = |nu: f64| nu - (m..n).map(|k| gk[k] * gk[k] / (nu - w[k])).sum::<f64>();
        let gnorm: f64 = (m..n).map(|k| gk[k] * gk[k]).sum::<f64>().sqrt();
        let hi0 = w[m] - 1e-14 * w[m].abs().max(1e-300);
        let mut lo = w[m].min(0.0) - gnorm - 1.0;
        while f(lo) > 0.0 {
            lo = 2.0 * lo - 1.0;
        }
        let mut hi = hi0;
        if f(hi) < 0.0 {
            // Degenerate: no pole contribution at w[m]; take the edge.
            lo = hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let nu = 0.5 * (lo + hi);
        for k in m..n {
            let den = w[k] - nu;
            st[k] = if den != 0.0 { -gk[k] / den } else { 0.0 };
        }
    }
    v * st
}

/// Locates a critical point of `Ψ_k` with `opts.target_index` ascent
/// directions, starting from `init`.
pub fn solve_critical_point(axis: &AxisGreen, init: &Configuration, opts: &SaddleOptions) -> Result<SaddleReport> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 || !(opts.trust_radius > 0.0) {
        return Err(Error::Config(format!("bad solver options {opts:?}")));
    }
    if !opts.guards.admits(init, axis) {
        return Err(Error::Config(format!("initial configuration outside the admissible set: {init:?}")));
    }
    let signs = init.signs.clone();
    let mut x = init.to_vec();
    let mirror = mirror_map(axis, init);
    let mut trace = Vec::new();
    let cfg_of = |y: &[f64]| Configuration::from_vec(&signs, y);
    let admissible = |y: &[f64]| cfg_of(y).map(|c| opts.guards.admits(&c, axis)).unwrap_or(false);
    let grad_of = |y: &[f64]| -> Result<Vec<f64>> { grad_psi_k(&cfg_of(y)?, axis) };
    let fail = |iterations: usize, reason: String, trace: &[TraceRow]| {
        let last = trace
            .last()
            .map(|r| format!("; last iterate Ψ = {:.10}, ‖∇Ψ‖ = {:.3e}", r.value, r.grad_norm))
            .unwrap_or_default();
        Error::Divergence {
            iterations,
            reason: format!("{reason}{last}"),
        }
    };

    let mut g = grad_of(&x)?;
    let mut gn = norm(&g);
    let mut radius = opts.trust_radius;
    let mut iterations = 0;
    trace.push(TraceRow {
        iter: 0,
        value: psi_k(&cfg_of(&x)?, axis)?,
        grad_norm: gn,
        step: 0.0,
    });
    while gn > opts.tol {
        if iterations >= opts.max_iter {
            return Err(fail(iterations, format!("no convergence within {} iterations", opts.max_iter), &trace));
        }
        iterations += 1;
        let cfg = cfg_of(&x)?;
        let hess = hessian_psi_k(&cfg, axis)?.matrix;
        let (w, v) = sorted_eigen(&hess);
        let gv = DVector::from_vec(g.clone());
        let negatives = w.iter().filter(|l| **l < 0.0).count();
        let mut step_len = 0.0;
        let mut accepted = false;

        let newton = match opts.method {
            Method::DampedNewton => true,
            Method::EigenvectorFollowing => negatives == opts.target_index && gn < opts.newton_switch,
        };
        if newton {
            // Newton step, capped in length, with backtracking on ‖∇Ψ‖².
            if let Some(inv) = hess.clone().try_inverse() {
                let mut d = -(inv * &gv);
                if opts.method == Method::DampedNewton {
                    let cap = 4.0 * opts.trust_radius;
                    if d.norm() > cap {
                        d *= cap / d.norm();
                    }
                }
                let mut s = 1.0;
                while s > 1e-6 {
                    let y = symmetrize(x.iter().zip(d.iter()).map(|(a, b)| a + s * b).collect(), &mirror);
                    if admissible(&y) {
                        let gy = grad_of(&y)?;
                        let gny = norm(&gy);
                        if gny < (1.0 - 1e-4 * s) * gn {
                            step_len = s * d.norm();
                            x = y;
                            g = gy;
                            gn = gny;
                            accepted = true;
                            break;
                        }
                    }
                    s *= 0.5;
                }
            }
        }
        if !accepted && opts.method == Method::DampedNewton {
            // Steepest descent on ½‖∇Ψ‖², whose gradient is H∇Ψ.
            let mut d = -(&hess * &gv);
            let cap = opts.trust_radius;
            if d.norm() > cap {
                d *= cap / d.norm();
            }
            let mut s = 1.0;
            while s > 1e-10 {
                let y = symmetrize(x.iter().zip(d.iter()).map(|(a, b)| a + s * b).collect(), &mirror);
                if admissible(&y) {
                    let gy = grad_of(&y)?;
                    let gny = norm(&gy);
                    if gny < gn {
                        step_len = s * d.norm();
                        x = y;
                        g = gy;
                        gn = gny;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                return Err(fail(iterations, "line search failed to reduce ‖∇Ψ‖".into(), &trace));
            }
        }
        if !accepted {
            let d = prfo_step(&w, &v, &gv, opts.target_index.min(w.len()));
            let dn = d.norm();
            if !(dn.is_finite()) || dn == 0.0 {
                return Err(fail(iterations, "degenerate eigenvector-following step".into(), &trace));
            }
            let mut s = (radius / dn).min(1.0);
            loop {
                let y = symmetrize(x.iter().zip(d.iter()).map(|(a, b)| a + s * b).collect(), &mirror);
                if admissible(&y) {
                    step_len = s * dn;
                    x = y;
                    g = grad_of(&x)?;
                    gn = norm(&g);
                    break;
                }
                s *= 0.5;
                if s * dn < 1e-14 {
                    return Err(fail(iterations, "step halving could not keep the iterate admissible".into(), &trace));
                }
            }
            // Full-length steps that stayed short of the radius need no growth;
            // steps cut by the radius grow it gently up to the configured cap.
            if step_len >= 0.99 * radius {
                radius = (radius * 1.5).min(4.0 * opts.trust_radius);
            }
        }
        if !gn.is_finite() {
            return Err(fail(iterations, "non-finite gradient".into(), &trace));
        }
        trace.push(TraceRow {
            iter: iterations,
            value: psi_k(&cfg_of(&x)?, axis)?,
            grad_norm: gn,
            step: step_len,
        });
    }
    let config = cfg_of(&x)?;
    finish_report(axis, config, gn, iterations, trace)
}

/// Reflection `t ↦ a + b − t` with reversed indices, as a coordinate map,
/// when `init` is invariant under it on a ball symmetric about the section
/// midpoint. Iterates from such a start are averaged with their mirror image
/// so that rounding cannot break the symmetry.
fn mirror_map(axis: &AxisGreen, init: &Configuration) -> Option<(Vec<usize>, f64)> {
    let (a, b) = (axis.section.a, axis.section.b);
    let c = 0.5 * (a + b);
    let centered = (c - axis.domain.center[0]).abs() <= 1e-14 * axis.domain.radius
        && axis.domain.center[1..].iter().all(|v| *v == 0.0);
    let k = init.k;
    let flipped: Vec<i32> = init.signs.iter().rev().copied().collect();
    let neg: Vec<i32> = flipped.iter().map(|s| -s).collect();
    if !centered || (flipped != init.signs && neg != init.signs) {
        return None;
    }
    let r = init.reflected(c);
    let x = init.to_vec();
    let y = r.to_vec();
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if x.iter().zip(&y).any(|(p, q)| (p - q).abs() > 1e-12 * scale) {
        return None;
    }
    Some(((0..k).rev().chain((k..2 * k).rev()).collect(), c))
}

fn symmetrize(mut y: Vec<f64>, mirror: &Option<(Vec<usize>, f64)>) -> Vec<f64> {
    if let Some((p, c)) = mirror {
        let k = p.len() / 2;
        let src = y.clone();
        for i in 0..k {
            y[i] = 0.5 * (src[i] + src[p[i]]);
            y[k + i] = c + 0.5 * (src[k + i] - src[p[k + i]]);
        }
    }
    y
}

fn finish_report(
    axis: &AxisGreen,
    config: Configuration,
    grad_norm: f64,
    iterations: usize,
    trace: Vec<TraceRow>,
) -> Result<SaddleReport> {
    let hess = hessian_psi_k(&config, axis)?;
    let (eigenvalues, inertia) = inertia(&hess.matrix, 1e-8);
    let mut warnings = Vec::new();
    if inertia[2] > 0 {
        warnings.push(format!(
            "degenerate critical point: {} numerically null Hessian eigenvalue(s)",
            inertia[2]
        ));
    }
    Ok(SaddleReport {
        value: psi_k(&config, axis)?,
        identities: stationarity_identities(&config, axis)?,
        config,
        grad_norm,
        inertia,
        eigenvalues,
        bounds_ok: false,
        iterations,
        warnings,
        trace,
    })
}

/// Index-one critical point of `Ψ̃` from `init`.
pub fn solve_saddle(axis: &AxisGreen, init: &Configuration, opts: &SaddleOptions) -> Result<SaddleReport> {
    if init.k != 4 || !init.is_alternating() {
        return Err(Error::Parameter("Ψ̃ needs k = 4 with signs (+,−,+,−)".into()));
    }
    solve_critical_point(axis, init, opts)
}

/// `lower ≤ value ≤ upper`.
pub fn verify_bounds(report: &SaddleReport, bounds: &BoundsReport) -> bool {
    bounds.lower <= report.value && report.value <= bounds.upper
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartReport {
    pub points: Vec<SaddleReport>,
    pub failures: Vec<String>,
}

/// Runs the solver from each start and keeps the distinct converged points
/// (coordinate distance above `1e−4`), in order of discovery.
pub fn multi_start(axis: &AxisGreen, starts: &[Configuration], opts: &SaddleOptions) -> MultiStartReport {
    let mut points: Vec<SaddleReport> = Vec::new();
    let mut failures = Vec::new();
    for (i, s) in starts.iter().enumerate() {
        match solve_critical_point(axis, s, opts) {
            Ok(r) => {
                let x = r.config.to_vec();
                let new = points.iter().all(|p| {
                    let y = p.config.to_vec();
                    norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>()) > 1e-4
                });
                if new {
                    points.push(r);
                }
            }
            Err(e) => failures.push(format!("start {i}: {e}")),
        }
    }
    MultiStartReport { points, failures }
}

/// Deterministic fallback starts around `t⁰`: rescaled spacings and
/// perturbed scalings on the μ-embedded family.
pub fn fallback_starts(axis: &AxisGreen, t0: f64, r0: f64) -> Vec<Configuration> {
    let mut out = Vec::new();
    for scale in [1.0, 0.75, 1.25, 0.5] {
        for (m1, m, m4) in [(1.0, 1.0, 1.0), (2.0, 1.0, 2.0), (1.0, 2.0, 1.0), (0.5, 1.0, 2.0)] {
            let r = r0 * scale;
            let t = [t0, t0 + r, t0 + 2.0 * r, t0 + 3.0 * r];
            if t.iter().all(|v| axis.section.contains(*v)) {
                if let Ok(c) = mu_embed(m1, m, m4, t) {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Map from `w = (log μ₁, log μ, log μ₄, log(d₁/d₅), …, log(d₄/d₅))` to a
/// μ-embedded configuration, where `dᵢ` are the five gaps
/// `t₁−a, t₂−t₁, t₃−t₂, t₄−t₃, b−t₄`.
pub fn embed_coordinates(axis: &AxisGreen, w: &[f64]) -> Result<Configuration> {
    if w.len() != 7 {
        return Err(Error::Parameter(format!("7 coordinates expected, got {}", w.len())));
    }
    let (a, b) = (axis.section.a, axis.section.b);
    let top = w[3..].iter().fold(0.0f64, |m, v| m.max(*v));
    let e: Vec<f64> = w[3..].iter().map(|v| (v - top).exp()).chain([(-top).exp()]).collect();
    let total: f64 = e.iter().sum();
    let mut t = [0.0; 4];
    let mut acc = a;
    for i in 0..4 {
        acc += e[i] / total * (b - a);
        t[i] = acc;
    }
    mu_embed(w[0].exp(), w[1].exp(), w[2].exp(), t)
}

/// Inverse of [`embed_coordinates`] on μ-embedded configurations.
pub fn coordinates_of(axis: &AxisGreen, cfg: &Configuration) -> Result<Vec<f64>> {
    let (m1, m, m4, t) = crate::reduced::mu_coords(cfg)?;
    let (a, b) = (axis.section.a, axis.section.b);
    let d = [t[0] - a, t[1] - t[0], t[2] - t[1], t[3] - t[2], b - t[3]];
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Config("positions must be increasing inside the section".into()));
    }
    let mut w = vec![m1.ln(), m.ln(), m4.ln()];
    w.extend(d[..4].iter().map(|v| (v / d[4]).ln()));
    Ok(w)
}

struct Objective<F: Fn(&[f64]) -> f64> {
    f: F,
}

impl<F: Fn(&[f64]) -> f64> CostFunction for Objective<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.f)(p))
    }
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, max_iter: u64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(tol)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let res = Executor::new(Objective { f }, solver)
        .configure(|s| s.max_iters(max_iter))
        .run()
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let state = res.state();
    let best = state
        .get_best_param()
        .cloned()
        .ok_or_else(|| Error::Numerical("Nelder-Mead returned no point".into()))?;
    Ok((best, state.get_best_cost()))
}

/// Minimiser of `Φ` over the μ-embedded family, found by Nelder–Mead in
/// [`embed_coordinates`] from `start`.
pub fn phi_minimizer(axis: &AxisGreen, start: &Configuration) -> Result<(Configuration, f64)> {
    let w0 = coordinates_of(axis, start)?;
    let f = |w: &[f64]| {
        embed_coordinates(axis, w)
            .and_then(|c| phi_penalty(&c, axis))
            .unwrap_or(f64::INFINITY)
    };
    let mut w = w0;
    let mut best = f(&w);
    // Restarts guard against premature simplex collapse.
    for _ in 0..4 {
        let (nw, v) = nelder_mead(f, &w, 0.3, 20_000, 1e-12)?;
        let done = (best - v).abs() < 1e-12;
        w = nw;
        best = v;
        if done {
            break;
        }
    }
    Ok((embed_coordinates(axis, &w)?, best))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityRow {
    #[serde(rename = "M")]
    pub m: f64,
    /// Smallest `Ψ̃` found on the level set `Φ = M/2`; absent if skipped.
    pub minimum: Option<f64>,
    pub samples: usize,
    pub config: Option<Configuration>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityTable {
    pub base: Configuration,
    pub base_phi: f64,
    pub rows: Vec<CoercivityRow>,
    /// Reported minima strictly increase across the non-skipped levels.
    pub increasing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityOptions {
    pub samples: usize,
    pub seed: u64,
    /// Best random directions handed to local refinement.
    pub refine_best: usize,
}

impl Default for CoercivityOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 7,
            refine_best: 3,
        }
    }
}

/// First point along the ray `w_base + s·dir` where `Φ` exceeds `level`.
fn level_crossing<F: Fn(&[f64]) -> f64>(phi: &F, base: &[f64], dir: &[f64], level: f64) -> Option<Vec<f64>> {
    let at = |s: f64| -> Vec<f64> { base.iter().zip(dir).map(|(b, d)| b + s * d).collect() };
    let mut s = 0.0;
    let mut ds = 0.02;
    while s < 200.0 {
        let s2 = s + ds;
        if phi(&at(s2)) > level {
            let (mut lo, mut hi) = (s, s2);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if phi(&at(mid)) > level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(at(hi));
        }
        s = s2;
        ds *= 1.05;
    }
    None
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n == 0.0 {
        let mut e = vec![0.0; v.len()];
        e[0] = 1.0;
        return e;
    }
    v.iter().map(|x| x / n).collect()
}

/// Minimum of `Ψ̃` over μ-embedded configurations with `Φ = M/2`.
///
/// Rays leave the `Φ`-minimiser of the μ-embedded family in random
/// directions of [`embed_coordinates`]; the level is hit by bisection along
/// each ray. The best directions are then refined by Nelder–Mead over the
/// direction sphere. Levels at or below the base value of `Φ` are skipped.
pub fn coercivity_scan(
    axis: &AxisGreen,
    start: &Configuration,
    m_list: &[f64],
    opts: &CoercivityOptions,
) -> Result<CoercivityTable> {
    if m_list.windows(2).any(|w| !(w[0] < w[1])) || m_list.is_empty() {
        return Err(Error::Config(format!("M list must be increasing, got {m_list:?}")));
    }
    if opts.samples == 0 {
        return Err(Error::Config("at least one sample per level required".into()));
    }
    let (base, base_phi) = phi_minimizer(axis, start)?;
    let wb = coordinates_of(axis, &base)?;
    let phi = |w: &[f64]| {
        embed_coordinates(axis, w)
            .and_then(|c| phi_penalty(&c, axis))
            .unwrap_or(f64::INFINITY)
    };
    let psi_at = |w: &[f64]| {
        embed_coordinates(axis, w)
            .and_then(|c| psi_k(&c, axis))
            .unwrap_or(f64::INFINITY)
    };
    let mut rows = Vec::new();
    for &m in m_list {
        let level = 0.5 * m;
        if level <= base_phi {
            rows.push(CoercivityRow {
                m,
                minimum: None,
                samples: 0,
                config: None,
                note: Some(format!("level set empty: M/2 = {level} ≤ min Φ = {base_phi:.6}")),
            });
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let normal = rand_distr_normal();
        let mut cands: Vec<(f64, Vec<f64>)> = Vec::with_capacity(opts.samples);
        for _ in 0..opts.samples {
            let d = unit(&(0..7).map(|_| normal(&mut rng)).collect::<Vec<_>>());
            if let Some(w) = level_crossing(&phi, &wb, &d, level) {
                cands.push((psi_at(&w), d));
            }
        }
        if cands.is_empty() {
            rows.push(CoercivityRow {
                m,
                minimum: None,
                samples: opts.samples,
                config: None,
                note: Some("no ray reached the level set".into()),
            });
            continue;
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let on_level = |d: &[f64]| level_crossing(&phi, &wb, &unit(d), level);
        let objective = |d: &[f64]| on_level(d).map(|w| psi_at(&w)).unwrap_or(f64::INFINITY);
        let mut best = cands[0].0;
        let mut best_dir = cands[0].1.clone();
        for (v, d) in cands.iter().take(opts.refine_best) {
            let (nd, nv) = nelder_mead(objective, d, 0.1, 3000, 1e-9)?;
            let (cand_v, cand_d) = if nv < *v { (nv, nd) } else { (*v, d.clone()) };
            if cand_v < best {
                best = cand_v;
                best_dir = cand_d;
            }
        }
        let config = on_level(&best_dir).and_then(|w| embed_coordinates(axis, &w).ok());
        rows.push(CoercivityRow {
            m,
            minimum: Some(best),
            samples: opts.samples,
            config,
            note: None,
        });
    }
    let minima: Vec<f64> = rows.iter().filter_map(|r| r.minimum).collect();
    let increasing = minima.len() >= 2 && minima.windows(2).all(|w| w[0] < w[1]);
    Ok(CoercivityTable {
        base,
        base_phi,
        rows,
        increasing,
    })
}

/// Standard normal sampler by the Box–Muller transform.
fn rand_distr_normal() -> impl Fn(&mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    |rng: &mut ChaCha8Rng| {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// `(Λ, t)` start on the μ-embedded family at `μ = (1,1,1)`, `t = t⁰`.
pub fn k0_start(t0: f64, r0: f64) -> Result<Configuration> {
    mu_embed(1.0, 1.0, 1.0, crate::reduced::t_zero(t0, r0))
}

/// Alternating signs, re-exported for callers that build raw vectors.
pub fn alternating_signs() -> Vec<i32> {
    ALTERNATING.to_vec()
}
