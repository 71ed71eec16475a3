//! Projected bubbles, the approximate solution `V = Σ aᵢ P U_i`, its PDE
//! residual and energy, and the comparison of that energy against the
//! reduced expansion.

use serde::{Deserialize, Serialize};

use crate::bubble::{alpha_n, critical_exponent, lambda_of_big_lambda, sphere_area, BubbleParams, ConstantsTable};
use crate::error::{Error, Result};
use crate::green::{robin_h, AxisGreen, BallDomain};
use crate::pde::grid::{AxisymGrid, Field, Focus};
use crate::pde::laplace::Laplacian;
use crate::reduced::{psi_k, Configuration};

/// Minimum number of grid cells across a bubble core `μ`.
pub const MIN_CORE_CELLS: f64 = 6.0;
/// Minimum number of local cells between a bubble center and the boundary.
pub const BOUNDARY_CELLS: f64 = 4.0;

/// Node counts of a harness grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nz: usize,
    pub nr: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nz: 513, nr: 257 }
    }
}

impl GridSpec {
    /// The grid with every cell halved.
    pub fn doubled(&self) -> Self {
        Self {
            nz: 2 * self.nz - 1,
            nr: 2 * self.nr - 1,
        }
    }
}

/// Axial position and core width of one bubble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub z: f64,
    pub mu: f64,
}

#[derive(Debug)]
pub struct Harness {
    pub domain: BallDomain,
    pub lap: Laplacian,
}

/// Bubble centered at the axis point `z`.
pub fn axis_bubble(domain: &BallDomain, epsilon: f64, lambda: f64, z: f64) -> Result<BubbleParams> {
    let mut center = domain.center.clone();
    center[0] = z;
    BubbleParams::new(domain.dim, epsilon, lambda, center)
}

fn axis_point(domain: &BallDomain, z: f64, r: f64) -> Vec<f64> {
    let mut x = domain.center.clone();
    x[0] = z;
    if domain.dim > 1 {
        x[1] += r;
    }
    x
}

impl Harness {
    pub fn new(domain: BallDomain, grid: AxisymGrid) -> Result<Self> {
        if grid.dim != domain.dim || grid.radius != domain.radius || grid.z_center != domain.center[0] {
            return Err(Error::Config("grid does not belong to the domain".into()));
        }
        Ok(Self {
            domain,
            lap: Laplacian::new(grid)?,
        })
    }

    pub fn uniform(domain: &BallDomain, spec: GridSpec) -> Result<Self> {
        Self::new(domain.clone(), AxisymGrid::uniform(domain, spec.nz, spec.nr)?)
    }

    /// Grid refined around each site axially and around the axis radially.
    pub fn for_sites(domain: &BallDomain, spec: GridSpec, sites: &[Site]) -> Result<Self> {
        if sites.is_empty() {
            return Self::uniform(domain, spec);
        }
        for s in sites {
            if !(s.mu > 0.0 && s.mu.is_finite() && s.z.is_finite()) {
                return Err(Error::Parameter(format!("invalid bubble site {s:?}")));
            }
        }
        let z_foci: Vec<Focus> = sites
            .iter()
            .map(|s| Focus {
                position: s.z,
                width: s.mu,
            })
            .collect();
        let w = sites.iter().map(|s| s.mu).fold(f64::INFINITY, f64::min);
        let r_foci = [Focus {
            position: 0.0,
            width: w,
        }];
        Self::new(
            domain.clone(),
            AxisymGrid::graded(domain, spec.nz, spec.nr, &z_foci, &r_foci)?,
        )
    }

    pub fn grid(&self) -> &AxisymGrid {
        &self.lap.grid
    }

    /// Harmonic extension of the boundary data `g(z, r)` on the sphere.
    pub fn solve_dirichlet_laplace<F: Fn(f64, f64) -> f64>(&self, g: F) -> Result<Field> {
        self.lap.harmonic_extension(g)
    }

    /// Smallest number of cells across the core of any site.
    pub fn core_cells(&self, sites: &[Site]) -> f64 {
        let hr = self.grid().r_spacing_at(0.0);
        sites
            .iter()
            .map(|s| s.mu / self.grid().z_spacing_at(s.z).max(hr))
            .fold(f64::INFINITY, f64::min)
    }

    /// Resolution guard on the bubble cores and their boundary distance.
    pub fn check_sites(&self, sites: &[Site]) -> Result<()> {
        let g = self.grid();
        for s in sites {
            let room = self.domain.radius - (s.z - g.z_center).abs();
            let h = g.z_spacing_at(s.z);
            if room < BOUNDARY_CELLS * h {
                return Err(Error::Resolution(format!(
                    "bubble center z = {} lies within {BOUNDARY_CELLS} cells (h = {h:.3e}) of the boundary",
                    s.z
                )));
            }
        }
        let cells = self.core_cells(sites);
        if cells < MIN_CORE_CELLS {
            let need = |n: usize| 1 + ((n - 1) as f64 * MIN_CORE_CELLS / cells).ceil() as usize;
            return Err(Error::Resolution(format!(
                "bubble core resolved by {cells:.2} cells, {MIN_CORE_CELLS} required; \
                 use at least --grid-nz {} --grid-nr {}",
                need(g.nz),
                need(g.nr)
            )));
        }
        Ok(())
    }

    /// Bubble sampled at interior nodes, zero elsewhere.
    pub fn sample_bubble(&self, p: &BubbleParams) -> Result<Field> {
        let zc = self.on_axis(p)?;
        Ok(Field::interior_from_fn(self.grid(), |z, r| p.profile((z - zc).powi(2) + r * r)))
    }

    fn on_axis(&self, p: &BubbleParams) -> Result<f64> {
        p.validate()?;
        if p.dim != self.domain.dim {
            return Err(Error::Parameter(format!(
                "bubble lives in R^{}, domain in R^{}",
                p.dim, self.domain.dim
            )));
        }
        let off: f64 = p
            .center
            .iter()
            .zip(&self.domain.center)
            .skip(1)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if off > 1e-12 * self.domain.radius {
            return Err(Error::Domain(format!("bubble center {:?} is off the axis", p.center)));
        }
        if (p.center[0] - self.domain.center[0]).abs() >= self.domain.radius {
            return Err(Error::Domain(format!("bubble center {:?} is outside the ball", p.center)));
        }
        Ok(p.center[0])
    }

    /// Signed sum of projections `Σ aᵢ P U_i` computed with one solve.
    fn project_sum(&self, bubbles: &[(f64, BubbleParams)]) -> Result<Field> {
        let mut centers = Vec::with_capacity(bubbles.len());
        let mut sites = Vec::with_capacity(bubbles.len());
        for (_, p) in bubbles {
            let z = self.on_axis(p)?;
            centers.push(z);
            sites.push(Site { z, mu: p.mu() });
        }
        self.check_sites(&sites)?;
        let eval = |z: f64, r: f64| -> f64 {
            bubbles
                .iter()
                .zip(&centers)
                .map(|((a, p), c)| a * p.profile((z - c).powi(2) + r * r))
                .sum()
        };
        let correction = self.solve_dirichlet_laplace(eval)?;
        let grid = self.grid();
        let mut out = Field::zeros(grid);
        for (k, inside) in grid.mask.iter().enumerate() {
            if *inside {
                let (i, j) = (k / grid.nr, k % grid.nr);
                out.values[k] = eval(grid.z[i], grid.r[j]) - correction.values[k];
            }
        }
        Ok(out)
    }

    /// `P U = U − h` with `h` harmonic and `h = U` on the sphere.
    pub fn project_bubble(&self, p: &BubbleParams) -> Result<Field> {
        self.project_sum(&[(1.0, p.clone())])
    }

    /// `V = Σ aᵢ P U_{ε,λᵢ,tᵢ}` with `λᵢ` from the `Λᵢ` of `cfg`.
    pub fn assemble_v(&self, cfg: &Configuration, epsilon: f64, table: &ConstantsTable) -> Result<Field> {
        cfg.validate()?;
        if table.n != self.domain.dim {
            return Err(Error::Parameter("constants table dimension differs from the domain".into()));
        }
        let mut bubbles = Vec::with_capacity(cfg.k);
        for i in 0..cfg.k {
            let lambda = lambda_of_big_lambda(cfg.lambda[i], table)?;
            bubbles.push((
                cfg.signs[i] as f64,
                axis_bubble(&self.domain, epsilon, lambda, cfg.t[i])?,
            ));
        }
        self.project_sum(&bubbles)
    }

    fn interior_values(&self, u: &Field) -> Result<Vec<f64>> {
        u.check_grid(self.grid())?;
        if !u.is_finite() {
            return Err(Error::Parameter("field has non-finite values".into()));
        }
        for (k, inside) in self.grid().mask.iter().enumerate() {
            if !inside && u.values[k] != 0.0 {
                return Err(Error::Parameter("field is not zero on boundary nodes".into()));
            }
        }
        Ok(self.lap.gather(u))
    }

    fn check_epsilon(&self, epsilon: f64) -> Result<f64> {
        let p = critical_exponent(self.domain.dim);
        if !(epsilon >= 0.0 && epsilon < p - 2.0) {
            return Err(Error::Parameter(format!("ε must lie in [0, 2*−2), got {epsilon}")));
        }
        Ok(p - epsilon)
    }

    /// `I_ε(u) = ½∫|∇u|² − (2*−ε)^{−1}∫|u|^{2*−ε}` for `u` vanishing on
    /// the boundary.
    pub fn energy_i(&self, u: &Field, epsilon: f64) -> Result<f64> {
        let q = self.check_epsilon(epsilon)?;
        let v = self.interior_values(u)?;
        let power: f64 = v.iter().zip(&self.lap.volume).map(|(x, w)| w * x.abs().powf(q)).sum();
        Ok(self.lap.dirichlet_energy(&v) - power / q)
    }

    /// Nodal residual `−Δ_h u − |u|^{2*−2−ε}u` with its volume weights.
    pub fn residual(&self, u: &Field, epsilon: f64) -> Result<Vec<f64>> {
        let q = self.check_epsilon(epsilon)?;
        let v = self.interior_values(u)?;
        let lap = self.lap.neg_laplacian(&v);
        Ok(lap
            .iter()
            .zip(&v)
            .map(|(l, x)| l - x.abs().powf(q - 2.0) * x)
            .collect())
    }

    fn weighted_norm(&self, r: &[f64], p: f64) -> f64 {
        r.iter()
            .zip(&self.lap.volume)
            .map(|(x, w)| w * x.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Discrete `L²` norm of the residual.
    pub fn residual_norm(&self, u: &Field, epsilon: f64) -> Result<f64> {
        Ok(self.weighted_norm(&self.residual(u, epsilon)?, 2.0))
    }

    /// Discrete `L^{2N/(N+2)}` norm of the residual, the dual exponent of
    /// the Sobolev embedding, which bounds its size as a functional on
    /// `H¹₀`.
    pub fn residual_dual_norm(&self, u: &Field, epsilon: f64) -> Result<f64> {
        let n = self.domain.dim as f64;
        Ok(self.weighted_norm(&self.residual(u, epsilon)?, 2.0 * n / (n + 2.0)))
    }
}

/// Bubble sites of a configuration at a given `ε`.
pub fn config_sites(cfg: &Configuration, epsilon: f64, table: &ConstantsTable) -> Result<Vec<Site>> {
    let e = epsilon.powf(1.0 / (table.n as f64 - 2.0));
    cfg.lambda
        .iter()
        .zip(&cfg.t)
        .map(|(l, t)| {
            Ok(Site {
                z: *t,
                mu: lambda_of_big_lambda(*l, table)? * e,
            })
        })
        .collect()
}

fn check_eps_list(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Config("ε list is empty".into()));
    }
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Config(format!("ε values must be positive, got {eps:?}")));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config(format!("ε list must be strictly decreasing, got {eps:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub epsilon: f64,
    pub mu: f64,
    /// `‖P U − U‖∞` over the grid.
    pub sup_error: f64,
    /// `sup_error / √ε`.
    pub fitted_constant: f64,
    /// `‖P U − U + α_N μ^{(N−2)/2}(N−2)σ_N H(·,ξ)‖∞`.
    pub corrected_error: f64,
    pub reduction: f64,
    pub core_cells: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub lambda: f64,
    pub center: f64,
    pub rows: Vec<ProjectionRow>,
    /// Largest over smallest fitted constant.
    pub constant_spread: f64,
}

/// Projection error of one bubble across `ε`, each on a grid refined
/// around its core.
pub fn projection_rate(
    domain: &BallDomain,
    lambda: f64,
    center: f64,
    eps: &[f64],
    spec: GridSpec,
) -> Result<ProjectionReport> {
    check_eps_list(eps)?;
    let n = domain.dim;
    let nf = n as f64;
    let xi = axis_point(domain, center, 0.0);
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        let p = axis_bubble(domain, e, lambda, center)?;
        let mu = p.mu();
        let h = Harness::for_sites(domain, spec, &[Site { z: center, mu }])?;
        let pu = h.project_bubble(&p)?;
        let u = h.sample_bubble(&p)?;
        let lead = alpha_n(n) * mu.powf((nf - 2.0) / 2.0) * (nf - 2.0) * sphere_area(n);
        let grid = h.grid();
        let (mut sup, mut corrected) = (0.0f64, 0.0f64);
        for (k, inside) in grid.mask.iter().enumerate() {
            if !inside {
                continue;
            }
            let (i, j) = (k / grid.nr, k % grid.nr);
            let diff = pu.values[k] - u.values[k];
            let hx = robin_h(domain, &axis_point(domain, grid.z[i], grid.r[j]), &xi)?;
            sup = sup.max(diff.abs());
            corrected = corrected.max((diff + lead * hx).abs());
        }
        rows.push(ProjectionRow {
            epsilon: e,
            mu,
            sup_error: sup,
            fitted_constant: sup / e.sqrt(),
            corrected_error: corrected,
            reduction: sup / corrected,
            core_cells: h.core_cells(&[Site { z: center, mu }]),
        });
    }
    let hi = rows.iter().map(|r| r.fitted_constant).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.fitted_constant).fold(f64::INFINITY, f64::min);
    Ok(ProjectionReport {
        lambda,
        center,
        rows,
        constant_spread: hi / lo,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub epsilon: f64,
    pub energy: f64,
    pub gap: f64,
    pub core_cells: f64,
    /// Gap recomputed on the doubled grid.
    pub gap_refined: Option<f64>,
    pub refinement_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub k: usize,
    pub psi_k: f64,
    pub grid: GridSpec,
    pub rows: Vec<ExpansionRow>,
    /// `|gap|` strictly decreases along the ε list.
    pub decreasing: bool,
    /// Every refinement change is below the neighbouring `|gap|` decrements.
    pub refinement_ok: Option<bool>,
}

/// `I_ε(V)` on a grid refined around the bubbles of `cfg`.
pub fn energy_of_config(
    domain: &BallDomain,
    cfg: &Configuration,
    epsilon: f64,
    table: &ConstantsTable,
    spec: GridSpec,
) -> Result<(f64, f64)> {
    let sites = config_sites(cfg, epsilon, table)?;
    let h = Harness::for_sites(domain, spec, &sites)?;
    let v = h.assemble_v(cfg, epsilon, table)?;
    Ok((h.energy_i(&v, epsilon)?, h.core_cells(&sites)))
}

/// `gap(ε) = (I_ε(V) − k E_N + (k/2)ω_N ε log ε + kγ_N ε)/(ω_N ε) − Ψ_k`,
/// where `E_N = (½ − 1/2*)∫U^{2*}` is the bubble energy.
pub fn expansion_gap(
    axis: &AxisGreen,
    cfg: &Configuration,
    eps: &[f64],
    table: &ConstantsTable,
    spec: GridSpec,
    refine: bool,
) -> Result<ExpansionReport> {
    check_eps_list(eps)?;
    let psi = psi_k(cfg, axis)?;
    let kf = cfg.k as f64;
    let gap_of = |e: f64, energy: f64| {
        (energy - kf * table.bubble_energy + 0.5 * kf * table.omega * e * e.ln() + kf * table.gamma * e)
            / (table.omega * e)
            - psi
    };
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        let (energy, cells) = energy_of_config(&axis.domain, cfg, e, table, spec)?;
        let gap = gap_of(e, energy);
        let refined = if refine {
            let (fine, _) = energy_of_config(&axis.domain, cfg, e, table, spec.doubled())?;
            Some(gap_of(e, fine))
        } else {
            None
        };
        rows.push(ExpansionRow {
            epsilon: e,
            energy,
            gap,
            core_cells: cells,
            gap_refined: refined,
            refinement_change: refined.map(|g| (g - gap).abs()),
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].gap.abs() < w[0].gap.abs());
    let refinement_ok = refine.then(|| {
        let dec: Vec<f64> = rows.windows(2).map(|w| (w[0].gap.abs() - w[1].gap.abs()).abs()).collect();
        rows.iter().enumerate().all(|(i, row)| {
            let change = row.refinement_change.unwrap_or(f64::INFINITY);
            let left = if i > 0 { dec[i - 1] } else { f64::INFINITY };
            let right = dec.get(i).copied().unwrap_or(f64::INFINITY);
            change < left.min(right)
        })
    });
    Ok(ExpansionReport {
        k: cfg.k,
        psi_k: psi,
        grid: spec,
        rows,
        decreasing,
        refinement_ok,
    })
}

/// `∇_{(Λ,t)} I_ε(V) / (ω_N ε)` by central differences on this harness's
/// fixed grid. At leading order it equals `∇Ψ_k`, so it vanishes near a
/// critical point of the reduced energy even though the pointwise residual
/// does not.
pub fn reduced_gradient(
    harness: &Harness,
    cfg: &Configuration,
    epsilon: f64,
    table: &ConstantsTable,
    step: f64,
) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Parameter(format!("step must be positive, got {step}")));
    }
    let x = cfg.to_vec();
    let energy = |y: &[f64]| -> Result<f64> {
        let c = Configuration::from_vec(&cfg.signs, y)?;
        harness.energy_i(&harness.assemble_v(&c, epsilon, table)?, epsilon)
    };
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = step * x[i].abs().max(1.0);
        let mut y = x.clone();
        y[i] = x[i] + h;
        let up = energy(&y)?;
        y[i] = x[i] - h;
        let down = energy(&y)?;
        grad.push((up - down) / (2.0 * h) / (table.omega * epsilon));
    }
    Ok(grad)
}
