//! Finite-volume Dirichlet Laplacian in axisymmetric coordinates.
//!
//! In `(z, r)` with `r = |x'|` the volume element of `R^N` is
//! `|S^{N−2}| r^{N−2} dr dz`, and the operator is the Hessian of the discrete
//! Dirichlet energy
//! `½ Σ_edges κ_e (u_p − u_q)²`. Each node owns the dual cell bounded by the
//! midpoints to its neighbours. Edges that leave the ball are cut at the
//! sphere: the far value is replaced by the boundary value at the crossing
//! point and the edge length by the distance `θ` to it, which gives a
//! symmetric operator converging at second order. The axis `r = 0` needs no
//! special stencil because its faces have zero area.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::bubble::sphere_area;
use crate::error::{Error, Result};
use crate::pde::grid::{AxisymGrid, Field};

/// Target relative residual of the linear solves.
pub const SOLVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Edge {
    p: usize,
    q: usize,
    coef: f64,
}

/// Cut edge from unknown `p` to the boundary point `(z, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutEdge {
    pub p: usize,
    pub coef: f64,
    pub z: f64,
    pub r: f64,
}

pub struct Laplacian {
    pub grid: AxisymGrid,
    /// Node index of each unknown.
    pub nodes: Vec<usize>,
    /// Unknown index of each node, if interior.
    pub unknown: Vec<Option<usize>>,
    /// Dual-cell measure of each unknown.
    pub volume: Vec<f64>,
    edges: Vec<Edge>,
    pub cuts: Vec<CutEdge>,
    diag: Vec<f64>,
    llt: Llt<usize, f64>,
}

impl std::fmt::Debug for Laplacian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Laplacian")
            .field("nz", &self.grid.nz)
            .field("nr", &self.grid.nr)
            .field("unknowns", &self.nodes.len())
            .finish()
    }
}

fn dual_bounds(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut h = Vec::with_capacity(n + 1);
    h.push(x[0]);
    for k in 1..n {
        h.push(0.5 * (x[k - 1] + x[k]));
    }
    h.push(x[n - 1]);
    h
}

impl Laplacian {
    pub fn new(grid: AxisymGrid) -> Result<Self> {
        let (nz, nr) = (grid.nz, grid.nr);
        let nf = grid.dim as f64;
        let shell = sphere_area(grid.dim - 1);
        let radial = |lo: f64, hi: f64| shell * (hi.powf(nf - 1.0) - lo.powf(nf - 1.0)) / (nf - 1.0);
        let zh = dual_bounds(&grid.z);
        let rh = dual_bounds(&grid.r);
        let c = grid.z_center;
        let rad = grid.radius;

        let mut unknown = vec![None; grid.len()];
        let mut nodes = Vec::new();
        for (k, m) in grid.mask.iter().enumerate() {
            if *m {
                unknown[k] = Some(nodes.len());
                nodes.push(k);
            }
        }
        if nodes.is_empty() {
            return Err(Error::Config("grid has no interior nodes".into()));
        }
        let mut volume = vec![0.0; nodes.len()];
        let mut edges = Vec::new();
        let mut cuts = Vec::new();
        for i in 0..nz {
            let bz = zh[i + 1] - zh[i];
            for j in 0..nr {
                let Some(p) = unknown[grid.index(i, j)] else { continue };
                let area_z = radial(rh[j], rh[j + 1]);
                volume[p] = bz * area_z;
                // Axial neighbours.
                for (step, ni) in [(1i64, i + 1), (-1, i.wrapping_sub(1))] {
                    if ni >= nz {
                        continue;
                    }
                    let len = (grid.z[ni] - grid.z[i]).abs();
                    match unknown[grid.index(ni, j)] {
                        Some(q) => {
                            if step > 0 {
                                edges.push(Edge {
                                    p,
                                    q,
                                    coef: area_z / len,
                                });
                            }
                        }
                        None => {
                            let half = (rad * rad - grid.r[j] * grid.r[j]).max(0.0).sqrt();
                            let zb = c + step as f64 * half;
                            let theta = (zb - grid.z[i]).abs().clamp(1e-10 * len, len);
                            cuts.push(CutEdge {
                                p,
                                coef: area_z / theta,
                                z: zb,
                                r: grid.r[j],
                            });
                        }
                    }
                }
                // Outward radial neighbour; the inward one is always inside.
                if j + 1 < nr {
                    let len = grid.r[j + 1] - grid.r[j];
                    let face = shell * (0.5 * (grid.r[j] + grid.r[j + 1])).powf(nf - 2.0) * bz;
                    match unknown[grid.index(i, j + 1)] {
                        Some(q) => edges.push(Edge { p, q, coef: face / len }),
                        None => {
                            let rb = (rad * rad - (grid.z[i] - c).powi(2)).max(0.0).sqrt();
                            let theta = (rb - grid.r[j]).clamp(1e-10 * len, len);
                            cuts.push(CutEdge {
                                p,
                                coef: face / theta,
                                z: grid.z[i],
                                r: rb,
                            });
                        }
                    }
                }
            }
        }
        let n = nodes.len();
        let mut diag = vec![0.0; n];
        for e in &edges {
            diag[e.p] += e.coef;
            diag[e.q] += e.coef;
        }
        for cut in &cuts {
            diag[cut.p] += cut.coef;
        }
        let mut trip = Vec::with_capacity(n + 2 * edges.len());
        for (k, d) in diag.iter().enumerate() {
            trip.push(Triplet::new(k, k, *d));
        }
        for e in &edges {
            let (a, b) = if e.p > e.q { (e.p, e.q) } else { (e.q, e.p) };
            trip.push(Triplet::new(a, b, -e.coef));
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Numerical(format!("sparse assembly failed: {e:?}")))?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Numerical(format!("Cholesky factorisation failed: {e:?}")))?;
        Ok(Self {
            grid,
            nodes,
            unknown,
            volume,
            edges,
            cuts,
            diag,
            llt,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    /// `K u` on the unknowns.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.diag.iter().zip(u).map(|(d, x)| d * x).collect();
        for e in &self.edges {
            out[e.p] -= e.coef * u[e.q];
            out[e.q] -= e.coef * u[e.p];
        }
        out
    }

    /// `Σ_cut κ g(z_b, r_b)` per unknown.
    pub fn boundary_load<F: Fn(f64, f64) -> f64>(&self, g: F) -> Vec<f64> {
        let mut b = vec![0.0; self.unknowns()];
        for c in &self.cuts {
            b[c.p] += c.coef * g(c.z, c.r);
        }
        b
    }

    /// Solves `K u = b` with iterative refinement to [`SOLVE_TOL`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.unknowns();
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        let sol = self.llt.solve(&rhs);
        let mut u: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
        let mut rel = f64::INFINITY;
        for _ in 0..4 {
            let ku = self.apply(&u);
            let res: Vec<f64> = b.iter().zip(&ku).map(|(x, y)| x - y).collect();
            rel = norm(&res) / bnorm;
            if rel <= SOLVE_TOL {
                return Ok(u);
            }
            let r = Mat::<f64>::from_fn(n, 1, |i, _| res[i]);
            let d = self.llt.solve(&r);
            for (i, x) in u.iter_mut().enumerate() {
                *x += d[(i, 0)];
            }
        }
        let ku = self.apply(&u);
        let res: Vec<f64> = b.iter().zip(&ku).map(|(x, y)| x - y).collect();
        rel = rel.min(norm(&res) / bnorm);
        if rel <= SOLVE_TOL {
            Ok(u)
        } else {
            Err(Error::Numerical(format!(
                "linear solve stalled at relative residual {rel:.3e}"
            )))
        }
    }

    /// Unknown values of a field.
    pub fn gather(&self, f: &Field) -> Vec<f64> {
        self.nodes.iter().map(|k| f.values[*k]).collect()
    }

    /// Field with the given interior values and `outside` elsewhere.
    pub fn scatter<F: Fn(f64, f64) -> f64>(&self, u: &[f64], outside: F) -> Field {
        let mut f = Field::from_fn(&self.grid, |z, r| outside(z, r));
        for (p, k) in self.nodes.iter().enumerate() {
            f.values[*k] = u[p];
        }
        for (k, m) in self.grid.mask.iter().enumerate() {
            if !m {
                continue;
            }
            debug_assert!(self.unknown[k].is_some());
        }
        f
    }

    /// Harmonic function with boundary values `g` on the sphere. Exterior
    /// nodes receive `g` evaluated at their own position.
    pub fn harmonic_extension<F: Fn(f64, f64) -> f64>(&self, g: F) -> Result<Field> {
        let b = self.boundary_load(&g);
        let u = self.solve(&b)?;
        Ok(self.scatter(&u, g))
    }

    /// `½ Σ κ_e (u_p − u_q)²` with zero boundary values.
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        let ku = self.apply(u);
        0.5 * ku.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `−Δ_h u` at the unknowns for zero boundary values.
    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u).iter().zip(&self.volume).map(|(a, v)| a / v).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::BallDomain;

    #[test]
    fn constants_are_reproduced() {
        let g = AxisymGrid::uniform(&BallDomain::unit(3).unwrap(), 41, 21).unwrap();
        let lap = Laplacian::new(g).unwrap();
        let f = lap.harmonic_extension(|_, _| 2.5).unwrap();
        for v in &f.values {
            assert!((v - 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn volumes_sum_to_ball_volume() {
        let g = AxisymGrid::uniform(&BallDomain::unit(3).unwrap(), 401, 201).unwrap();
        let lap = Laplacian::new(g).unwrap();
        let v: f64 = lap.volume.iter().sum();
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 2e-2, "{v}");
    }
}
