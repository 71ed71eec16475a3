//! Tensor-product `(z, r)` grids on the half cross-section of a ball, and
//! nodal fields over them.
//!
//! Node coordinates are graded: in each direction they are equidistant in
//! `S(x) = Σᵢ asinh((x − cᵢ)/wᵢ) + β(x − x₀)/R`, which puts spacing about
//! `δ·wᵢ` at a focus `cᵢ` of width `wᵢ` and grows it geometrically away from
//! it. Without foci the grid is uniform.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::BallDomain;

/// Background density of the grading map, per unit radius.
const BACKGROUND: f64 = 5.0;

/// A point of refinement along one grid direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Focus {
    pub position: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisymGrid {
    pub dim: usize,
    /// Axial coordinate of the ball center.
    pub z_center: f64,
    pub radius: f64,
    pub nz: usize,
    pub nr: usize,
    /// Mean axial and radial steps, `2R/(nz−1)` and `R/(nr−1)`.
    pub hz: f64,
    pub hr: f64,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    /// `true` for nodes strictly inside the ball; all others carry
    /// Dirichlet data.
    pub mask: Vec<bool>,
}

fn grading_map(x: f64, lo: f64, radius: f64, foci: &[Focus]) -> f64 {
    foci.iter().map(|f| ((x - f.position) / f.width).asinh()).sum::<f64>() + BACKGROUND * (x - lo) / radius
}

fn graded_nodes(lo: f64, hi: f64, n: usize, radius: f64, foci: &[Focus]) -> Vec<f64> {
    let s_lo = grading_map(lo, lo, radius, foci);
    let s_hi = grading_map(hi, lo, radius, foci);
    let mut x = Vec::with_capacity(n);
    x.push(lo);
    for k in 1..n - 1 {
        let target = s_lo + (s_hi - s_lo) * k as f64 / (n - 1) as f64;
        let (mut a, mut b) = (lo, hi);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if grading_map(m, lo, radius, foci) < target {
                a = m;
            } else {
                b = m;
            }
        }
        x.push(0.5 * (a + b));
    }
    x.push(hi);
    x
}

impl AxisymGrid {
    /// Uniform `nz × nr` grid over `[c₁−R, c₁+R] × [0, R]`.
    pub fn uniform(domain: &BallDomain, nz: usize, nr: usize) -> Result<Self> {
        Self::graded(domain, nz, nr, &[], &[])
    }

    /// Graded grid with `nz × nr` nodes refined around the given foci.
    pub fn graded(domain: &BallDomain, nz: usize, nr: usize, z_foci: &[Focus], r_foci: &[Focus]) -> Result<Self> {
        if domain.center[1..].iter().any(|c| *c != 0.0) {
            return Err(Error::Domain("axisymmetric grids need the ball center on the x₁-axis".into()));
        }
        if nz < 5 || nr < 3 {
            return Err(Error::Config(format!("grid {nz}×{nr} too small (need nz ≥ 5, nr ≥ 3)")));
        }
        for f in z_foci.iter().chain(r_foci) {
            if !(f.width > 0.0 && f.width.is_finite() && f.position.is_finite()) {
                return Err(Error::Parameter(format!("bad focus {f:?}")));
            }
        }
        let c = domain.center[0];
        let radius = domain.radius;
        let z = graded_nodes(c - radius, c + radius, nz, radius, z_foci);
        let r = graded_nodes(0.0, radius, nr, radius, r_foci);
        if z.windows(2).chain(r.windows(2)).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!(
                "grid {nz}×{nr} cannot resolve the requested foci (coincident nodes)"
            )));
        }
        let tol = 1e-12 * radius;
        let mut mask = Vec::with_capacity(nz * nr);
        for zi in &z {
            for rj in &r {
                let rho = ((zi - c).powi(2) + rj * rj).sqrt();
                mask.push(rho < radius - tol);
            }
        }
        Ok(Self {
            dim: domain.dim,
            z_center: c,
            radius,
            nz,
            nr,
            hz: 2.0 * radius / (nz - 1) as f64,
            hr: radius / (nr - 1) as f64,
            z,
            r,
            mask,
        })
    }

    pub fn len(&self) -> usize {
        self.nz * self.nr
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, `z` outermost.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nr + j
    }

    pub fn interior_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Largest of the two axial steps adjacent to `z`.
    pub fn z_spacing_at(&self, z: f64) -> f64 {
        spacing_at(&self.z, z)
    }

    /// Largest of the two radial steps adjacent to `r`.
    pub fn r_spacing_at(&self, r: f64) -> f64 {
        spacing_at(&self.r, r)
    }

    /// Same grading with `2n−1` nodes per direction.
    pub fn node_counts_doubled(&self) -> (usize, usize) {
        (2 * self.nz - 1, 2 * self.nr - 1)
    }
}

fn spacing_at(x: &[f64], p: f64) -> f64 {
    let k = x.partition_point(|v| *v < p).clamp(1, x.len() - 1);
    let right = x[k] - x[k - 1];
    let left = if k >= 2 { x[k - 1] - x[k - 2] } else { right };
    let next = if k + 1 < x.len() { x[k + 1] - x[k] } else { right };
    // p lies in [x[k−1], x[k]]; both neighbouring intervals count.
    right.max(if p <= x[k - 1] { left } else { 0.0 }).max(if p >= x[k] { next } else { 0.0 })
}

/// Nodal values on an [`AxisymGrid`], row-major with `z` outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub nz: usize,
    pub nr: usize,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &AxisymGrid) -> Self {
        Self {
            nz: grid.nz,
            nr: grid.nr,
            values: vec![0.0; grid.len()],
        }
    }

    /// `f(z, r)` at every node.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &AxisymGrid, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for zi in &grid.z {
            for rj in &grid.r {
                values.push(f(*zi, *rj));
            }
        }
        Self {
            nz: grid.nz,
            nr: grid.nr,
            values,
        }
    }

    /// `f(z, r)` at interior nodes, zero elsewhere.
    pub fn interior_from_fn<F: Fn(f64, f64) -> f64>(grid: &AxisymGrid, f: F) -> Self {
        let mut out = Self::from_fn(grid, f);
        for (v, m) in out.values.iter_mut().zip(&grid.mask) {
            if !m {
                *v = 0.0;
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nr + j]
    }

    pub fn check_grid(&self, grid: &AxisymGrid) -> Result<()> {
        if self.nz != grid.nz || self.nr != grid.nr || self.values.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "field is {}×{}, grid is {}×{}",
                self.nz, self.nr, grid.nz, grid.nr
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn axpy(&mut self, a: f64, other: &Field) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::Parameter("field sizes differ".into()));
        }
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            nz: self.nz,
            nr: self.nr,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// CSV with columns `z, r, value`.
    pub fn write_csv(&self, grid: &AxisymGrid, path: &Path) -> Result<()> {
        self.check_grid(grid)?;
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        w.write_record(["z", "r", "value"]).map_err(csv_err)?;
        for i in 0..self.nz {
            for j in 0..self.nr {
                w.serialize((grid.z[i], grid.r[j], self.get(i, j))).map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Binary dump: `nz`, `nr` as little-endian `u64`, `hz`, `hr` as
    /// little-endian `f64`, then the values row-major as little-endian `f64`.
    pub fn write_binary(&self, grid: &AxisymGrid, path: &Path) -> Result<()> {
        self.check_grid(grid)?;
        let file = File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        let io = |e: std::io::Error| Error::Config(e.to_string());
        w.write_all(&(self.nz as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.nr as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&grid.hz.to_le_bytes()).map_err(io)?;
        w.write_all(&grid.hr.to_le_bytes()).map_err(io)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a binary dump, returning `(field, hz, hr)`.
    pub fn read_binary(path: &Path) -> Result<(Self, f64, f64)> {
        let file = File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut rd = BufReader::new(file);
        let io = |e: std::io::Error| Error::Config(e.to_string());
        let mut b = [0u8; 8];
        let mut next = |rd: &mut BufReader<File>| -> Result<[u8; 8]> {
            rd.read_exact(&mut b).map_err(io)?;
            Ok(b)
        };
        let nz = u64::from_le_bytes(next(&mut rd)?) as usize;
        let nr = u64::from_le_bytes(next(&mut rd)?) as usize;
        let hz = f64::from_le_bytes(next(&mut rd)?);
        let hr = f64::from_le_bytes(next(&mut rd)?);
        let n = nz
            .checked_mul(nr)
            .filter(|n| *n < (1 << 32))
            .ok_or_else(|| Error::Config(format!("implausible header {nz}×{nr}")))?;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_le_bytes(next(&mut rd)?));
        }
        Ok((Self { nz, nr, values }, hz, hr))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(e.to_string())
}
