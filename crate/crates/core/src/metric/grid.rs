//! Conformal grid metrics: a positive density on a regular grid, with a
//! wide-stencil graph whose edge weights approximate geodesic length.
//!
//! Edges connect nodes whose integer offset has Chebyshev norm at most the
//! stencil radius and coprime components; the weight is the Euclidean
//! offset length times the mean density at the endpoints.

use super::space::{dijkstra_field, Neighbors, Space};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridDomain {
    /// Unit cube with boundary nodes, `m + 1` nodes per axis.
    Cube,
    /// Periodic unit cell, `m` nodes per axis.
    Torus,
}

/// Default stencil radius per dimension.
pub fn default_stencil(dim: usize) -> usize {
    if dim >= 3 {
        2
    } else {
        3
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StencilOffset {
    pub d: [i32; 3],
    /// Euclidean length in node steps.
    pub len: f64,
}

/// Signed primitive offsets with Chebyshev norm at most `k`.
///
/// Radius 1 keeps axis moves only: that stencil is the taxicab graph, kept
/// as the non-Riemannian counter-fixture, while `k >= 2` includes every
/// coprime direction of the Chebyshev box.
pub(crate) fn stencil_offsets(dim: usize, k: usize) -> Vec<StencilOffset> {
    let axis_only = k == 1;
    let k = k as i32;
    let range = |active: bool| if active { -k..=k } else { 0..=0 };
    let mut out = Vec::new();
    for dx in range(true) {
        for dy in range(dim >= 2) {
            for dz in range(dim >= 3) {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                if axis_only && (dx != 0) as u8 + (dy != 0) as u8 + (dz != 0) as u8 > 1 {
                    continue;
                }
                let g = gcd(gcd(dx.unsigned_abs(), dy.unsigned_abs()), dz.unsigned_abs());
                if g != 1 {
                    continue;
                }
                let len = ((dx * dx + dy * dy + dz * dz) as f64).sqrt();
                out.push(StencilOffset { d: [dx, dy, dz], len });
            }
        }
    }
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Conformal metric `g = phi^2 * Euclidean` discretized on a grid.
#[derive(Debug, Clone)]
pub struct GridMetric {
    dim: usize,
    resolution: usize,
    domain: GridDomain,
    stencil_radius: usize,
    density: Vec<f64>,
    origin: Vec<f64>,
    extent: f64,
    offsets: Vec<StencilOffset>,
    nodes_per_axis: usize,
}

impl GridMetric {
    pub fn new(
        dim: usize,
        resolution: usize,
        domain: GridDomain,
        stencil_radius: usize,
        density: Vec<f64>,
    ) -> Result<Self> {
        Self::with_box(dim, resolution, domain, stencil_radius, density, vec![0.0; dim], 1.0)
    }

    /// Grid over a box `origin + [0, extent]^dim` (cube domains only; the
    /// torus cell is always the unit cell).
    pub fn with_box(
        dim: usize,
        resolution: usize,
        domain: GridDomain,
        stencil_radius: usize,
        density: Vec<f64>,
        origin: Vec<f64>,
        extent: f64,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if resolution < 2 {
            return Err(Error::invalid("resolution must be at least 2"));
        }
        if stencil_radius == 0 || stencil_radius >= resolution {
            return Err(Error::invalid("stencil radius must be in 1..resolution"));
        }
        if origin.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: origin.len() });
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::invalid("extent must be positive"));
        }
        if domain == GridDomain::Torus && (extent != 1.0 || origin.iter().any(|&v| v != 0.0)) {
            return Err(Error::invalid("torus cells use the unit box"));
        }
        let nodes_per_axis = match domain {
            GridDomain::Cube => resolution + 1,
            GridDomain::Torus => resolution,
        };
        let expected = nodes_per_axis.pow(dim as u32);
        if density.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: density.len() });
        }
        if density.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("density must be strictly positive and finite"));
        }
        let offsets = stencil_offsets(dim, stencil_radius);
        Ok(GridMetric {
            dim,
            resolution,
            domain,
            stencil_radius,
            density,
            origin,
            extent,
            offsets,
            nodes_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn domain(&self) -> GridDomain {
        self.domain
    }

    pub fn stencil_radius(&self) -> usize {
        self.stencil_radius
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn min_density(&self) -> f64 {
        self.density.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().cloned().fold(0.0, f64::max)
    }

    /// Node spacing in physical units.
    pub fn spacing(&self) -> f64 {
        self.extent / self.resolution as f64
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub(crate) fn offsets(&self) -> &[StencilOffset] {
        &self.offsets
    }

    pub fn coord(&self, u: usize) -> [usize; 3] {
        let a = self.nodes_per_axis;
        let x = u % a;
        let y = (u / a) % a;
        let z = if self.dim >= 3 { u / (a * a) } else { 0 };
        [x, y, z]
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        let a = self.nodes_per_axis;
        c[0] + a * c[1] + if self.dim >= 3 { a * a * c[2] } else { 0 }
    }

    pub fn position(&self, u: usize) -> Vec<f64> {
        let c = self.coord(u);
        (0..self.dim)
            .map(|i| self.origin[i] + c[i] as f64 * self.spacing())
            .collect()
    }

    /// Density value at periodic node coordinates (used by covering
    /// windows of torus cells).
    pub(crate) fn density_periodic(&self, g: [i64; 3]) -> f64 {
        debug_assert_eq!(self.domain, GridDomain::Torus);
        let m = self.resolution as i64;
        let mut c = [0usize; 3];
        for i in 0..self.dim {
            c[i] = g[i].rem_euclid(m) as usize;
        }
        self.density[self.index(c)]
    }

    /// Midpoint-style quadrature `sum phi^n h^n` over nodes selected by the
    /// predicate, which receives the node index and physical position.
    pub fn volume(&self, mut region: impl FnMut(usize, &[f64]) -> bool) -> f64 {
        let h = self.spacing();
        let cell = h.powi(self.dim as i32);
        let mut total = 0.0;
        for u in 0..self.node_count() {
            let pos = self.position(u);
            if region(u, &pos) {
                total += self.density[u].powi(self.dim as i32) * cell;
            }
        }
        total
    }

    pub fn total_volume(&self) -> f64 {
        self.volume(|_, _| true)
    }

    /// Nodes of the cube face `{x_axis = side}`.
    pub fn face_nodes(&self, axis: usize, upper: bool) -> Result<Vec<usize>> {
        if self.domain != GridDomain::Cube {
            return Err(Error::invalid("faces exist on cube domains only"));
        }
        if axis >= self.dim {
            return Err(Error::invalid("face axis out of range"));
        }
        let want = if upper { self.resolution } else { 0 };
        Ok((0..self.node_count())
            .filter(|&u| self.coord(u)[axis] == want)
            .collect())
    }
}

impl Neighbors for GridMetric {
    fn num_nodes(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    #[inline]
    fn for_each_neighbor(&self, u: usize, mut f: impl FnMut(usize, f64)) {
        let c = self.coord(u);
        let phi_u = self.density[u];
        let scale = self.spacing() * 0.5;
        let a = self.nodes_per_axis as i64;
        match self.domain {
            GridDomain::Cube => {
                for o in &self.offsets {
                    let mut t = [0usize; 3];
                    let mut ok = true;
                    for i in 0..self.dim {
                        let v = c[i] as i64 + o.d[i] as i64;
                        if v < 0 || v >= a {
                            ok = false;
                            break;
                        }
                        t[i] = v as usize;
                    }
                    if ok {
                        let v = self.index(t);
                        f(v, o.len * scale * (phi_u + self.density[v]));
                    }
                }
            }
            GridDomain::Torus => {
                for o in &self.offsets {
                    let mut t = [0usize; 3];
                    for i in 0..self.dim {
                        t[i] = (c[i] as i64 + o.d[i] as i64).rem_euclid(a) as usize;
                    }
                    let v = self.index(t);
                    f(v, o.len * scale * (phi_u + self.density[v]));
                }
            }
        }
    }
}

impl Space for GridMetric {
    fn node_count(&self) -> usize {
        self.num_nodes()
    }

    fn value_field(&self, seeds: &[(usize, f64)], cap: Option<f64>) -> Vec<f64> {
        dijkstra_field(self, seeds, cap)
    }

    fn max_slope(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for u in 0..self.num_nodes() {
            self.for_each_neighbor(u, |v, w| {
                worst = worst.max((values[u] - values[v]).abs() / w);
            });
        }
        worst
    }

    fn for_each_bond(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for u in 0..self.num_nodes() {
            self.for_each_neighbor(u, |v, w| {
                if u < v {
                    f(u, v, w);
                }
            });
        }
    }
}

/// Stencil accuracy of the flat metric: worst relative overshoot of graph
/// distance against Euclidean distance over sampled directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub dim: usize,
    pub stencil_radius: usize,
    pub resolution: usize,
    pub eps: f64,
    /// Per-direction `(unit direction, graph/Euclid - 1)`.
    pub per_direction: Vec<(Vec<f64>, f64)>,
}

/// Measures the stencil error on a flat grid: one Dijkstra from the center
/// node, compared against exact node-to-node Euclidean distances along
/// `directions` rays.
pub fn stencil_calibration(
    dim: usize,
    stencil_radius: usize,
    resolution: usize,
    directions: usize,
) -> Result<Calibration> {
    let nodes = (resolution + 1).pow(dim as u32);
    let gm = GridMetric::new(dim, resolution, GridDomain::Cube, stencil_radius, vec![1.0; nodes])?;
    let mid = resolution / 2;
    let center = gm.index([mid, mid, if dim >= 3 { mid } else { 0 }]);
    let field = dijkstra_field(&gm, &[(center, 0.0)], None);

    let radius = 0.45 * resolution as f64;
    let mut per_direction = Vec::with_capacity(directions);
    let mut eps = 0.0f64;
    for i in 0..directions {
        let u = ray_direction(dim, i, directions);
        let mut c = [mid, mid, if dim >= 3 { mid } else { 0 }];
        let mut euclid2 = 0.0;
        for (axis, comp) in u.iter().enumerate() {
            let step = (radius * comp).round() as i64;
            let v = c[axis] as i64 + step;
            c[axis] = v.clamp(0, resolution as i64) as usize;
            let d = c[axis] as f64 - mid as f64;
            euclid2 += d * d;
        }
        if euclid2 == 0.0 {
            continue;
        }
        let target = gm.index(c);
        let euclid = euclid2.sqrt() * gm.spacing();
        let ratio = field[target] / euclid - 1.0;
        eps = eps.max(ratio.abs());
        per_direction.push((u, ratio));
    }
    Ok(Calibration { dim, stencil_radius, resolution, eps, per_direction })
}

fn ray_direction(dim: usize, i: usize, total: usize) -> Vec<f64> {
    if dim == 2 {
        let theta = std::f64::consts::PI * i as f64 / total as f64;
        vec![theta.cos(), theta.sin()]
    } else {
        // spherical Fibonacci points on the upper hemisphere
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        let z = (i as f64 + 0.5) / total as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = std::f64::consts::TAU * (i as f64 / golden).fract();
        vec![r * phi.cos(), r * phi.sin(), z]
    }
}

/// On-disk schema: JSON header with a row-major density array; files ending
/// in `.gz` are gzip-compressed.
#[derive(Debug, Serialize, Deserialize)]
pub struct GridFile {
    pub dim: usize,
    pub resolution: usize,
    pub domain: GridDomain,
    #[serde(default)]
    pub stencil: Option<usize>,
    pub density: Vec<f64>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default)]
    pub extent: Option<f64>,
}

impl GridFile {
    pub fn into_metric(self) -> Result<GridMetric> {
        let stencil = self.stencil.unwrap_or_else(|| default_stencil(self.dim));
        GridMetric::with_box(
            self.dim,
            self.resolution,
            self.domain,
            stencil,
            self.density,
            self.origin.unwrap_or_else(|| vec![0.0; self.dim]),
            self.extent.unwrap_or(1.0),
        )
    }

    pub fn from_metric(gm: &GridMetric) -> Self {
        GridFile {
            dim: gm.dim,
            resolution: gm.resolution,
            domain: gm.domain,
            stencil: Some(gm.stencil_radius),
            density: gm.density.clone(),
            origin: Some(gm.origin.clone()),
            extent: Some(gm.extent),
        }
    }
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<GridMetric> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let text = if path.extension().is_some_and(|e| e == "gz") {
        let mut s = String::new();
        flate2::read::GzDecoder::new(&bytes[..]).read_to_string(&mut s)?;
        s
    } else {
        String::from_utf8(bytes).map_err(|e| Error::invalid(format!("not utf-8: {e}")))?
    };
    let file: GridFile = serde_json::from_str(&text)?;
    file.into_metric()
}

pub fn save_grid(gm: &GridMetric, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&GridFile::from_metric(gm))?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut enc =
            flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        std::io::Write::write_all(&mut enc, text.as_bytes())?;
        std::fs::write(path, enc.finish()?)?;
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::multi_dijkstra;

    #[test]
    fn axis_neighbor_distance_is_one_step() {
        let gm = crate::fixtures::flat_cube(2, 16, 3);
        let d = multi_dijkstra(&gm, &[gm.index([0, 0, 0])]).unwrap();
        assert!((d[gm.index([1, 0, 0])] - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn flat_volume_examples() {
        let m = 64;
        let gm = crate::fixtures::flat_cube(2, m, 3);
        let v = gm.total_volume();
        assert!((v - 1.0).abs() < 2.0 * 2.0 / m as f64, "vol {v}");

        let c = 1.7;
        let gm = GridMetric::new(2, m, GridDomain::Cube, 3, vec![c; (m + 1) * (m + 1)]).unwrap();
        assert!((gm.total_volume() - c * c).abs() < c * c * 3.0 / m as f64);
    }

    #[test]
    fn linear_density_volume() {
        // phi = 1 + x integrates to 7/3 on the unit square
        let m = 128;
        let density: Vec<f64> = (0..(m + 1) * (m + 1))
            .map(|u| 1.0 + (u % (m + 1)) as f64 / m as f64)
            .collect();
        let gm = GridMetric::new(2, m, GridDomain::Cube, 3, density).unwrap();
        let v = gm.total_volume();
        assert!((v - 7.0 / 3.0).abs() < 8.0 / m as f64, "vol {v}");
    }

    #[test]
    fn diagonal_distance_within_stencil_error() {
        let m = 64;
        let gm = crate::fixtures::flat_cube(2, m, 3);
        let d = multi_dijkstra(&gm, &[gm.index([0, 0, 0])]).unwrap();
        let diag = d[gm.index([m, m, 0])];
        let euclid = 2.0f64.sqrt();
        assert!(diag >= euclid - 1e-9);
        assert!(diag / euclid - 1.0 < 0.02, "diagonal overshoot {}", diag / euclid - 1.0);
    }

    #[test]
    fn calibration_2d_k3_is_tight() {
        let cal = stencil_calibration(2, 3, 128, 64).unwrap();
        assert!(cal.eps <= 0.02, "eps {}", cal.eps);
        // graph distance never undershoots Euclidean on a flat grid
        for (_, r) in &cal.per_direction {
            assert!(*r >= -1e-9);
        }
    }

    #[test]
    fn taxicab_stencil_is_coarse() {
        let cal = stencil_calibration(2, 1, 64, 32).unwrap();
        assert!(cal.eps > 0.3, "taxicab eps {}", cal.eps);
    }

    #[test]
    fn torus_wraps() {
        let m = 8;
        let gm = crate::fixtures::flat_cell(2, m, 1);
        let d = multi_dijkstra(&gm, &[gm.index([0, 0, 0])]).unwrap();
        // one step back wraps around
        assert!((d[gm.index([m - 1, 0, 0])] - 1.0 / m as f64).abs() < 1e-12);
    }

    #[test]
    fn grid_file_round_trip() {
        let dir = std::env::temp_dir().join("hilbvol_grid_test");
        std::fs::create_dir_all(&dir).unwrap();
        let gm = crate::fixtures::flat_cell(2, 8, 2);
        for name in ["cell.json", "cell.json.gz"] {
            let path = dir.join(name);
            save_grid(&gm, &path).unwrap();
            let back = load_grid(&path).unwrap();
            assert_eq!(back.resolution(), 8);
            assert_eq!(back.density(), gm.density());
        }
    }
}
