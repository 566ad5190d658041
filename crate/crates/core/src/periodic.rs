//! Stable norms of periodic metrics and the asymptotic ball-growth
//! comparison.
//!
//! The periodic space is one torus cell unrolled over the integer lattice.
//! Distances `d(0, k v)` along a lattice direction are subadditive in `k`,
//! which yields two-sided brackets around the homogenized norm; sampling
//! directions produces a polytopal outer model of the stable unit ball that
//! feeds the John machinery.

use crate::banach::PolytopeNorm;
use crate::john::{john_form, john_volume_of_unit_ball, JohnParams, JohnResult, VolumeParams};
use crate::linalg::norm2;
use crate::metric::{
    dijkstra_field, stencil_calibration, GridDomain, GridMetric, Neighbors,
};
use crate::{unit_ball_volume, Error, Result};
use serde::{Deserialize, Serialize};

/// Z^n-periodic conformal metric given by one torus cell.
#[derive(Debug, Clone)]
pub struct PeriodicMetric {
    cell: GridMetric,
}

impl PeriodicMetric {
    pub fn new(cell: GridMetric) -> Result<Self> {
        if cell.domain() != GridDomain::Torus {
            return Err(Error::invalid("periodic metrics take a torus cell"));
        }
        Ok(PeriodicMetric { cell })
    }

    pub fn cell(&self) -> &GridMetric {
        &self.cell
    }

    pub fn dim(&self) -> usize {
        self.cell.dim()
    }

    /// Metric diameter bound of one fundamental cell: twice the worst
    /// distance from a corner node to the cell, measured on a 3^n window.
    pub fn cell_diameter_bound(&self) -> f64 {
        let dim = self.dim();
        let m = self.cell.resolution() as i64;
        let lo = [-m, -m, if dim >= 3 { -m } else { 0 }];
        let hi = [2 * m, 2 * m, if dim >= 3 { 2 * m } else { 1 }];
        let window = CoverWindow::new(&self.cell, lo, hi);
        let origin = window.index_of([0, 0, 0]).unwrap();
        let field = dijkstra_field(&window, &[(origin, 0.0)], None);
        let mut worst = 0.0f64;
        for u in 0..window.num_nodes() {
            let g = window.coord_of(u);
            if (0..dim).all(|i| g[i] >= 0 && g[i] < m) {
                worst = worst.max(field[u]);
            }
        }
        2.0 * worst
    }
}

/// Finite box of the lattice cover of a torus cell. Node coordinates run
/// over `lo..hi` per axis in node units (cell `i` holds nodes
/// `i*m..(i+1)*m`).
pub(crate) struct CoverWindow<'a> {
    cell: &'a GridMetric,
    lo: [i64; 3],
    span: [i64; 3],
    density: Vec<f64>,
}

impl<'a> CoverWindow<'a> {
    pub(crate) fn new(cell: &'a GridMetric, lo: [i64; 3], hi: [i64; 3]) -> Self {
        let dim = cell.dim();
        let mut span = [1i64; 3];
        for i in 0..dim {
            span[i] = (hi[i] - lo[i]).max(1);
        }
        let count = (span[0] * span[1] * span[2]) as usize;
        let mut density = vec![0.0; count];
        let mut g = [0i64; 3];
        for (u, d) in density.iter_mut().enumerate() {
            let mut rem = u as i64;
            for i in 0..3 {
                g[i] = lo[i] + rem % span[i];
                rem /= span[i];
            }
            *d = cell.density_periodic(g);
        }
        CoverWindow { cell, lo, span, density }
    }

    pub(crate) fn nodes(lo: [i64; 3], hi: [i64; 3]) -> usize {
        let mut n = 1usize;
        for i in 0..3 {
            n = n.saturating_mul((hi[i] - lo[i]).max(1) as usize);
        }
        n
    }

    pub(crate) fn index_of(&self, g: [i64; 3]) -> Option<usize> {
        let mut idx = 0i64;
        let mut stride = 1i64;
        for i in 0..3 {
            let rel = g[i] - self.lo[i];
            if rel < 0 || rel >= self.span[i] {
                return None;
            }
            idx += rel * stride;
            stride *= self.span[i];
        }
        Some(idx as usize)
    }

    pub(crate) fn coord_of(&self, u: usize) -> [i64; 3] {
        let mut g = [0i64; 3];
        let mut rem = u as i64;
        for i in 0..3 {
            g[i] = self.lo[i] + rem % self.span[i];
            rem /= self.span[i];
        }
        g
    }
}

impl Neighbors for CoverWindow<'_> {
    fn num_nodes(&self) -> usize {
        (self.span[0] * self.span[1] * self.span[2]) as usize
    }

    #[inline]
    fn for_each_neighbor(&self, u: usize, mut f: impl FnMut(usize, f64)) {
        let g = self.coord_of(u);
        let phi_u = self.density[u];
        let h = self.cell.spacing() * 0.5;
        for o in self.cell.offsets() {
            let t = [g[0] + o.d[0] as i64, g[1] + o.d[1] as i64, g[2] + o.d[2] as i64];
            if let Some(v) = self.index_of(t) {
                f(v, o.len * h * (phi_u + self.density[v]));
            }
        }
    }
}

/// Certified estimate of the stable norm along one lattice direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StableNormEstimate {
    pub direction: Vec<i64>,
    /// `d(0, k_max v) / k_max`.
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub k_used: usize,
    /// The sequence `d(0, k v) / k` for `k = 1..=k_max`.
    pub per_k: Vec<f64>,
    /// Diameter bound of the fundamental cell used by the bracket.
    pub d_cell: f64,
    pub window_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct StableNormParams {
    /// Node budget for one unrolled window.
    pub window_budget: usize,
    /// Reuse of a precomputed cell diameter bound.
    pub d_cell: Option<f64>,
}

impl Default for StableNormParams {
    fn default() -> Self {
        StableNormParams { window_budget: 40_000_000, d_cell: None }
    }
}

/// Distances `d(0, k v)` for `k = 1..=k_max` on windows certified to
/// contain every candidate geodesic, with the subadditivity bracket.
pub fn stable_norm(
    pm: &PeriodicMetric,
    v: &[i64],
    k_max: usize,
    params: &StableNormParams,
) -> Result<StableNormEstimate> {
    let dim = pm.dim();
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
    }
    if v.iter().all(|&c| c == 0) {
        return Err(Error::invalid("direction must be nonzero"));
    }
    if k_max == 0 {
        return Err(Error::invalid("k_max must be positive"));
    }
    let m = pm.cell.resolution() as i64;
    let phi_min = pm.cell.min_density();
    let d_cell = params.d_cell.unwrap_or_else(|| pm.cell_diameter_bound());

    let mut vv = [0i64; 3];
    for i in 0..dim {
        vv[i] = v[i];
    }
    let vlen = ((vv[0] * vv[0] + vv[1] * vv[1] + vv[2] * vv[2]) as f64).sqrt();

    // start from a thin box around the segment and enlarge until the
    // reachable ellipse of the measured distance fits inside
    let mut margin = vec![2.0 + d_cell / phi_min; dim];
    let mut window_nodes = 0;
    let mut dists: Vec<f64> = Vec::new();
    for _pass in 0..8 {
        let (lo, hi) = segment_box(&vv, k_max, m, &margin, dim);
        let needed = CoverWindow::nodes(lo, hi);
        if needed > params.window_budget {
            return Err(Error::WindowBudget { needed, budget: params.window_budget });
        }
        window_nodes = needed;
        let window = CoverWindow::new(&pm.cell, lo, hi);
        let origin = window.index_of([0, 0, 0]).expect("origin inside window");
        let field = dijkstra_field(&window, &[(origin, 0.0)], None);
        dists = (1..=k_max)
            .map(|k| {
                let g = [vv[0] * k as i64 * m, vv[1] * k as i64 * m, vv[2] * k as i64 * m];
                field[window.index_of(g).expect("endpoint inside window")]
            })
            .collect();
        if dists.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("window disconnected; increase the budget"));
        }
        // required reach in cell units for the worst endpoint
        let mut needed_margin = vec![0.0f64; dim];
        for (ki, &d) in dists.iter().enumerate() {
            let k = (ki + 1) as f64;
            let a = d / phi_min / 2.0;
            let c = k * vlen / 2.0;
            let reach = (a * a - c * c).max(0.0).sqrt() + (a - c).max(0.0);
            for nm in needed_margin.iter_mut() {
                *nm = nm.max(reach);
            }
        }
        let enough = needed_margin
            .iter()
            .zip(&margin)
            .all(|(need, have)| need + 1.5 <= *have);
        if enough {
            break;
        }
        for (mg, need) in margin.iter_mut().zip(&needed_margin) {
            *mg = mg.max(need + 2.0);
        }
    }

    let mut est = bracket_from_distances(&dists, d_cell);
    est.direction = v.to_vec();
    est.window_nodes = window_nodes;
    Ok(est)
}

/// Subadditivity bracket around the homogenized value from the sequence
/// `dists[k-1] = d(0, (k) v)`.
fn bracket_from_distances(dists: &[f64], d_cell: f64) -> StableNormEstimate {
    let k_max = dists.len();
    let per_k: Vec<f64> = dists.iter().enumerate().map(|(ki, d)| d / (ki + 1) as f64).collect();
    let estimate = per_k[k_max - 1];
    let hi = (dists[k_max - 1] + d_cell) / k_max as f64;
    // lower bound from approximate superadditivity: chaining doublings
    // gives limit >= (d(0, m v) - D) / m for every m
    let mut lo: f64 = 0.0;
    for (mi, d) in dists.iter().enumerate() {
        lo = lo.max((d - d_cell) / (mi + 1) as f64);
    }
    let lo = lo.min(estimate);
    StableNormEstimate {
        direction: Vec::new(),
        estimate,
        lo,
        hi,
        k_used: k_max,
        per_k,
        d_cell,
        window_nodes: 0,
    }
}

fn segment_box(
    v: &[i64; 3],
    k_max: usize,
    m: i64,
    margin_cells: &[f64],
    dim: usize,
) -> ([i64; 3], [i64; 3]) {
    let mut lo = [0i64; 3];
    let mut hi = [1i64; 3];
    for i in 0..dim {
        let end = v[i] * k_max as i64;
        let pad = (margin_cells[i].ceil() as i64) * m + 2;
        lo[i] = end.min(0) * m - pad;
        hi[i] = end.max(0) * m + pad + 1;
    }
    (lo, hi)
}

/// Primitive lattice directions of height at most `h`, one per +/- pair,
/// sorted by angle.
pub fn primitive_directions(dim: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    let gcd3 = |a: i64, b: i64, c: i64| -> i64 {
        fn g(a: i64, b: i64) -> i64 {
            if b == 0 {
                a.abs()
            } else {
                g(b, a % b)
            }
        }
        g(g(a, b), c)
    };
    let zr = if dim >= 3 { -h..=h } else { 0..=0 };
    for z in zr {
        for y in -h..=h {
            for x in -h..=h {
                if gcd3(x, y, z) != 1 {
                    continue;
                }
                // canonical representative of the +/- pair
                let lead = if x != 0 { x } else if y != 0 { y } else { z };
                if lead < 0 {
                    continue;
                }
                let mut v = vec![x, y];
                if dim >= 3 {
                    v.push(z);
                }
                out.push(v);
            }
        }
    }
    out.sort_by(|a, b| {
        let ang = |v: &[i64]| (v[1] as f64).atan2(v[0] as f64);
        ang(a).total_cmp(&ang(b)).then_with(|| a.cmp(b))
    });
    out
}

#[derive(Debug, Clone)]
pub struct StableBallParams {
    /// Lattice direction height cap; directions are primitive vectors.
    pub height: i64,
    /// Target segment length in cells; per-direction `k_max` adapts to it.
    pub target_cells: f64,
    /// Resolution of the dual-sampling grid producing the facets.
    pub dual_grid: usize,
    pub norm_params: StableNormParams,
}

impl Default for StableBallParams {
    fn default() -> Self {
        StableBallParams {
            height: 7,
            target_cells: 24.0,
            dual_grid: 128,
            norm_params: StableNormParams::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StableBallReport {
    pub directions: Vec<StableNormEstimate>,
    /// Relative Hausdorff slack of the direction sampling.
    pub sampling_gap: f64,
    /// Worst relative bracket width among the sampled directions.
    pub max_bracket_rel: f64,
}

/// Samples the stable norm over low-height lattice directions and returns
/// the polytopal outer model of the unit ball built from dual-norm samples.
///
/// All directions read one shared distance field on a window sized by
/// `target_cells`, with per-direction certification of the readout depth.
pub fn stable_unit_ball(
    pm: &PeriodicMetric,
    direction_count: usize,
    params: &StableBallParams,
) -> Result<(PolytopeNorm, StableBallReport)> {
    let w_cells = params.target_cells.ceil() as i64 + 2;
    let (window, field) =
        cover_field(pm, w_cells, params.norm_params.window_budget, None)?;
    stable_ball_from_field(pm, &window, &field, direction_count, params)
}

fn select_directions(dim: usize, direction_count: usize, height: i64) -> Result<Vec<Vec<i64>>> {
    if direction_count < 2 * dim {
        return Err(Error::invalid(format!(
            "need at least {} directions, got {direction_count}",
            2 * dim
        )));
    }
    let mut height = if dim >= 3 { height.min(3) } else { height };
    let mut dirs = primitive_directions(dim, height);
    while dirs.len() < direction_count && height < 11 {
        height += 1;
        dirs = primitive_directions(dim, height);
    }
    if dirs.len() > direction_count {
        let stride = dirs.len() as f64 / direction_count as f64;
        dirs = (0..direction_count)
            .map(|i| dirs[(i as f64 * stride) as usize].clone())
            .collect();
    }
    Ok(dirs)
}

fn stable_ball_from_field(
    pm: &PeriodicMetric,
    window: &CoverWindow<'_>,
    field: &[f64],
    direction_count: usize,
    params: &StableBallParams,
) -> Result<(PolytopeNorm, StableBallReport)> {
    let dim = pm.dim();
    let dirs = select_directions(dim, direction_count, params.height)?;
    let d_cell = pm.cell_diameter_bound();
    let estimates = directions_from_field(pm, window, field, &dirs, d_cell, params)?;
    check_triangle_consistency(&estimates)?;

    // dual-norm samples over a fine direction grid
    let unit_points: Vec<Vec<f64>> = estimates
        .iter()
        .map(|e| {
            e.direction
                .iter()
                .map(|&c| c as f64 / e.estimate.max(1e-300))
                .collect()
        })
        .collect();
    let mut facets = Vec::new();
    for gi in 0..params.dual_grid {
        let u = grid_direction(dim, gi, params.dual_grid);
        let support = unit_points
            .iter()
            .map(|p| crate::linalg::dot(&u, p).abs())
            .fold(0.0f64, f64::max);
        if support > 0.0 {
            facets.push(u.iter().map(|c| c / support).collect::<Vec<f64>>());
        }
    }
    let norm = PolytopeNorm::from_rows(&facets)?;

    let sampling_gap = direction_sampling_gap(&estimates, dim);
    let max_bracket_rel = estimates
        .iter()
        .map(|e| (e.hi - e.lo) / e.estimate.max(1e-300))
        .fold(0.0f64, f64::max);
    Ok((norm, StableBallReport { directions: estimates, sampling_gap, max_bracket_rel }))
}

/// One uncapped distance field from the origin on a symmetric window of
/// `w_cells` cells per side, shared by every direction readout.
fn cover_field<'a>(
    pm: &'a PeriodicMetric,
    w_cells: i64,
    budget: usize,
    cap: Option<f64>,
) -> Result<(CoverWindow<'a>, Vec<f64>)> {
    let dim = pm.dim();
    let m = pm.cell.resolution() as i64;
    let lo = [-w_cells * m, -w_cells * m, if dim >= 3 { -w_cells * m } else { 0 }];
    let hi = [
        w_cells * m + 1,
        w_cells * m + 1,
        if dim >= 3 { w_cells * m + 1 } else { 1 },
    ];
    let needed = CoverWindow::nodes(lo, hi);
    if needed > budget {
        return Err(Error::WindowBudget { needed, budget });
    }
    let window = CoverWindow::new(&pm.cell, lo, hi);
    let origin = window.index_of([0, 0, 0]).expect("origin inside window");
    let field = dijkstra_field(&window, &[(origin, 0.0)], cap);
    Ok((window, field))
}

/// Stable-norm estimates along `dirs` read from a shared field. For each
/// direction the multiple count is cut to the largest `k` whose candidate
/// geodesics provably stay inside the window (any path of the measured
/// length fits the ellipse bound); directions that cannot certify even
/// `k = 2` fall back to a dedicated window.
fn directions_from_field(
    pm: &PeriodicMetric,
    window: &CoverWindow<'_>,
    field: &[f64],
    dirs: &[Vec<i64>],
    d_cell: f64,
    params: &StableBallParams,
) -> Result<Vec<StableNormEstimate>> {
    let m = pm.cell.resolution() as i64;
    let phi_min = pm.cell.min_density();
    let w_cells = {
        // symmetric window: recover the half-width in cells
        (-window.lo[0] / m) as f64
    };
    let mut out = Vec::with_capacity(dirs.len());
    for v in dirs {
        let vlen = norm2(&v.iter().map(|&c| c as f64).collect::<Vec<_>>());
        let k_cap = ((params.target_cells / vlen).round() as usize).clamp(2, 32);
        let mut dists = Vec::new();
        for k in 1..=k_cap {
            let mut g = [0i64; 3];
            for (i, &c) in v.iter().enumerate() {
                g[i] = c * k as i64 * m;
            }
            let Some(node) = window.index_of(g) else { break };
            let d = field[node];
            if !d.is_finite() {
                break;
            }
            // every path of length d stays within (d/phi_min + k|v|)/2 of
            // the origin in the sup norm
            let reach = (d / phi_min + k as f64 * vlen) / 2.0;
            if reach + 1.0 > w_cells {
                break;
            }
            dists.push(d);
        }
        if dists.len() >= 2 {
            let mut est = bracket_from_distances(&dists, d_cell);
            est.direction = v.clone();
            est.window_nodes = field.len();
            out.push(est);
        } else {
            let norm_params = StableNormParams {
                d_cell: Some(d_cell),
                ..params.norm_params.clone()
            };
            out.push(stable_norm(pm, v, 2, &norm_params)?);
        }
    }
    Ok(out)
}

fn grid_direction(dim: usize, i: usize, total: usize) -> Vec<f64> {
    if dim == 2 {
        let theta = std::f64::consts::PI * i as f64 / total as f64;
        vec![theta.cos(), theta.sin()]
    } else {
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        let z = (i as f64 + 0.5) / total as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = std::f64::consts::TAU * (i as f64 / golden).fract();
        vec![r * phi.cos(), r * phi.sin(), z]
    }
}

/// Certified triangle-inequality check: `lo(v+w) <= hi(v) + hi(w)` whenever
/// all three directions were sampled. A violation beyond the brackets means
/// some window was too small.
fn check_triangle_consistency(estimates: &[StableNormEstimate]) -> Result<()> {
    use std::collections::HashMap;
    let mut by_dir: HashMap<Vec<i64>, usize> = HashMap::new();
    for (i, e) in estimates.iter().enumerate() {
        by_dir.insert(e.direction.clone(), i);
    }
    for (i, a) in estimates.iter().enumerate() {
        for b in estimates.iter().skip(i) {
            for sign in [1i64, -1] {
                let sum: Vec<i64> = a
                    .direction
                    .iter()
                    .zip(&b.direction)
                    .map(|(x, y)| x + sign * y)
                    .collect();
                if let Some(&k) = by_dir.get(&sum) {
                    let c = &estimates[k];
                    if c.lo > a.hi + b.hi + 1e-9 {
                        return Err(Error::InconsistentSamples(format!(
                            "||{:?}|| = [{:.4},{:.4}] exceeds ||{:?}|| + ||{:?}|| = {:.4}",
                            c.direction,
                            c.lo,
                            c.hi,
                            a.direction,
                            b.direction,
                            a.hi + b.hi
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn direction_sampling_gap(estimates: &[StableNormEstimate], dim: usize) -> f64 {
    if dim == 2 {
        let mut angles: Vec<f64> = estimates
            .iter()
            .flat_map(|e| {
                let a = (e.direction[1] as f64).atan2(e.direction[0] as f64);
                [a, a + std::f64::consts::PI]
            })
            .map(|a| a.rem_euclid(std::f64::consts::TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        let mut worst: f64 = 0.0;
        for i in 0..angles.len() {
            let next = if i + 1 == angles.len() {
                angles[0] + std::f64::consts::TAU
            } else {
                angles[i + 1]
            };
            worst = worst.max(next - angles[i]);
        }
        1.0 / (worst / 2.0).cos().max(1e-6) - 1.0
    } else {
        // coarse bound from the count of sampled directions
        let count = estimates.len().max(1) as f64 * 2.0;
        let cap_angle = (2.0 / count.sqrt()).asin();
        1.0 / cap_angle.cos().max(1e-6) - 1.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub r: f64,
    pub volume: f64,
    /// `volume / (omega_n r^n)`.
    pub ratio: f64,
}

/// Riemannian volume of metric balls around the origin of the cover, from
/// one capped distance field on the unrolled window.
pub fn ball_growth(pm: &PeriodicMetric, radii: &[f64], budget: usize) -> Result<Vec<GrowthPoint>> {
    let rs = sorted_radii(radii)?;
    let r_max = *rs.last().unwrap();
    let reach = (r_max / pm.cell.min_density()).ceil() as i64 + 2;
    let (window, field) = cover_field(pm, reach, budget, Some(r_max))?;
    Ok(growth_from_field(pm, &window, &field, &rs))
}

fn sorted_radii(radii: &[f64]) -> Result<Vec<f64>> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("radii must be positive"));
    }
    let mut rs = radii.to_vec();
    rs.sort_by(f64::total_cmp);
    Ok(rs)
}

/// Ball volumes read off a distance field whose window provably contains
/// every ball up to the largest radius.
fn growth_from_field(
    pm: &PeriodicMetric,
    window: &CoverWindow<'_>,
    field: &[f64],
    rs: &[f64],
) -> Vec<GrowthPoint> {
    let dim = pm.dim();
    let r_max = *rs.last().unwrap();
    let cell_vol = pm.cell.spacing().powi(dim as i32);
    let mut vols = vec![0.0f64; rs.len()];
    for (u, &d) in field.iter().enumerate() {
        if d > r_max {
            continue;
        }
        let mass = window.density[u].powi(dim as i32) * cell_vol;
        // contributes to every radius at least d
        let first = rs.partition_point(|&r| r < d);
        for v in &mut vols[first..] {
            *v += mass;
        }
    }
    let omega = unit_ball_volume(dim);
    rs.iter()
        .zip(vols)
        .map(|(&r, volume)| GrowthPoint { r, volume, ratio: volume / (omega * r.powi(dim as i32)) })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum BiVerdict {
    Pass,
    Fail,
    /// The hypothesis of the growth bound fails for graph-like stencils.
    Refused { reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiErrorBudget {
    pub eps_stencil: f64,
    /// Ball shrinkage from stencil overshoot, `1 - (1+eps)^{-n}`.
    pub stencil_term: f64,
    /// Quadrature slack at the smallest gated radius.
    pub quadrature_term: f64,
    pub bracket_term: f64,
    pub sampling_term: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JohnSide {
    pub hdia: Vec<Vec<f64>>,
    /// Hilbertian volume of the sampled stable unit ball.
    pub ball_volume: f64,
    pub omega_n: f64,
    /// `ball_volume - omega_n`; nonnegative up to the budget.
    pub margin: f64,
    pub sampling_gap: f64,
    pub max_bracket_rel: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiReport {
    pub verdict: BiVerdict,
    pub growth: Vec<GrowthPoint>,
    /// Minimum ratio over the largest three radii.
    pub liminf_proxy: f64,
    pub error_budget: BiErrorBudget,
    pub john: Option<JohnSide>,
}

#[derive(Debug, Clone)]
pub struct BiParams {
    pub radii: Vec<f64>,
    pub direction_count: usize,
    pub ball: StableBallParams,
    pub growth_budget: usize,
    /// Resolution for the flat stencil calibration backing the budget.
    pub calibration_resolution: usize,
    pub volume: VolumeParams,
}

impl Default for BiParams {
    fn default() -> Self {
        BiParams {
            radii: vec![10.0, 15.0, 20.0, 21.0, 22.0],
            direction_count: 48,
            ball: StableBallParams::default(),
            growth_budget: 60_000_000,
            calibration_resolution: 128,
            volume: VolumeParams::default(),
        }
    }
}

/// Assembles the volume-growth comparison: stable unit ball, its John form
/// and Hilbertian volume, and the measured growth curve, with every error
/// source reported. Taxicab stencils are refused: the growth bound is a
/// statement about Riemannian metrics and fails for the graph metric.
pub fn burago_ivanov_report(pm: &PeriodicMetric, params: &BiParams) -> Result<BiReport> {
    let dim = pm.dim();
    let rs = sorted_radii(&params.radii)?;
    let r_max = *rs.last().unwrap();
    let phi_min = pm.cell.min_density();

    let cal = stencil_calibration(
        dim,
        pm.cell.stencil_radius(),
        params.calibration_resolution,
        64,
    )?;
    let eps = cal.eps;
    let stencil_term = 1.0 - (1.0 + eps).powi(-(dim as i32));

    if pm.cell.stencil_radius() == 1 {
        let growth = ball_growth(pm, &rs, params.growth_budget)?;
        let top = growth.len().saturating_sub(3);
        let liminf_proxy =
            growth[top..].iter().map(|g| g.ratio).fold(f64::INFINITY, f64::min);
        let r_gate = growth[top..].first().map(|g| g.r).unwrap_or(1.0);
        let quadrature_term = 8.0 * dim as f64 * pm.cell.max_density().powi(dim as i32)
            / (pm.cell.resolution() as f64 * r_gate);
        let reason = format!(
            "stencil radius 1 is the taxicab graph metric, not a Riemannian \
             discretization; the Euclidean growth bound does not apply to it \
             (flat taxicab balls have ratio 2/pi in the plane). Measured ratio \
             at the largest radius: {:.4}",
            growth.last().map(|g| g.ratio).unwrap_or(f64::NAN),
        );
        return Ok(BiReport {
            verdict: BiVerdict::Refused { reason },
            growth,
            liminf_proxy,
            error_budget: BiErrorBudget {
                eps_stencil: eps,
                stencil_term,
                quadrature_term,
                bracket_term: 0.0,
                sampling_term: 0.0,
                total: f64::NAN,
            },
            john: None,
        });
    }

    // one shared field serves the growth curve and every stable-norm
    // direction
    let growth_reach = (r_max / phi_min).ceil() as i64 + 2;
    let ball_reach = params.ball.target_cells.ceil() as i64 + 2;
    let (window, field) = cover_field(
        pm,
        growth_reach.max(ball_reach),
        params.growth_budget,
        None,
    )?;
    let growth = growth_from_field(pm, &window, &field, &rs);
    let top = growth.len().saturating_sub(3);
    let liminf_proxy = growth[top..]
        .iter()
        .map(|g| g.ratio)
        .fold(f64::INFINITY, f64::min);
    let r_gate = growth[top..].first().map(|g| g.r).unwrap_or(1.0);
    let quadrature_term = 8.0 * dim as f64 * pm.cell.max_density().powi(dim as i32)
        / (pm.cell.resolution() as f64 * r_gate);

    let (ball_norm, ball_report) =
        stable_ball_from_field(pm, &window, &field, params.direction_count, &params.ball)?;
    let john: JohnResult = john_form(&ball_norm, &JohnParams::default())?;
    let volume = john_volume_of_unit_ball(&ball_norm, &john.form, &params.volume)?;
    let omega = unit_ball_volume(dim);

    let budget = BiErrorBudget {
        eps_stencil: eps,
        stencil_term,
        quadrature_term,
        bracket_term: ball_report.max_bracket_rel,
        sampling_term: ball_report.sampling_gap,
        total: stencil_term
            + quadrature_term
            + ball_report.max_bracket_rel
            + ball_report.sampling_gap,
    };
    let verdict = if liminf_proxy >= 1.0 - budget.total {
        BiVerdict::Pass
    } else {
        BiVerdict::Fail
    };
    let hdia: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| john.form.matrix()[(i, j)]).collect())
        .collect();
    Ok(BiReport {
        verdict,
        growth,
        liminf_proxy,
        error_budget: budget,
        john: Some(JohnSide {
            hdia,
            ball_volume: volume.value,
            omega_n: omega,
            margin: volume.value - omega,
            sampling_gap: ball_report.sampling_gap,
            max_bracket_rel: ball_report.max_bracket_rel,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{flat_cell, stripe_cell};

    fn flat_pm(m: usize, k: usize) -> PeriodicMetric {
        PeriodicMetric::new(flat_cell(2, m, k)).unwrap()
    }

    #[test]
    fn flat_axis_direction_is_exact() {
        let pm = flat_pm(16, 3);
        let e = stable_norm(&pm, &[1, 0], 4, &StableNormParams::default()).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-12, "estimate {}", e.estimate);
        for a in &e.per_k {
            assert!((a - 1.0).abs() < 1e-12);
        }
        assert!(e.lo <= e.estimate && e.estimate <= e.hi);
        assert!(e.hi - e.lo <= 2.0 * e.d_cell / e.k_used as f64 + 1e-12);
    }

    #[test]
    fn flat_diagonal_within_stencil_error() {
        let pm = flat_pm(16, 3);
        let e = stable_norm(&pm, &[1, 1], 4, &StableNormParams::default()).unwrap();
        let root2 = 2.0f64.sqrt();
        assert!(e.estimate >= root2 - 1e-9);
        assert!(e.estimate / root2 - 1.0 < 0.02, "estimate {}", e.estimate);
    }

    #[test]
    fn stripe_prefers_cheap_column_and_matches_oracle() {
        let pm = PeriodicMetric::new(stripe_cell(16, 3, 2.0)).unwrap();
        let e = stable_norm(&pm, &[0, 1], 4, &StableNormParams::default()).unwrap();
        assert!(e.estimate <= 1.0 + 1e-9, "cheap column gives cost 1, got {}", e.estimate);
        // direct oracle on a long window
        let oracle = stable_norm(&pm, &[0, 1], 16, &StableNormParams::default()).unwrap();
        assert!(
            oracle.estimate >= e.lo - 1e-12 && oracle.estimate <= e.hi + 1e-12,
            "oracle {} outside [{}, {}]",
            oracle.estimate,
            e.lo,
            e.hi
        );
    }

    #[test]
    fn scaling_equivariance_is_exact() {
        let pm = PeriodicMetric::new(stripe_cell(12, 2, 1.7)).unwrap();
        let scaled_cell = GridMetric::new(
            2,
            12,
            GridDomain::Torus,
            2,
            pm.cell().density().iter().map(|v| 3.0 * v).collect(),
        )
        .unwrap();
        let scaled = PeriodicMetric::new(scaled_cell).unwrap();
        let p = StableNormParams::default();
        let a = stable_norm(&pm, &[2, 1], 4, &p).unwrap();
        let b = stable_norm(&scaled, &[2, 1], 4, &p).unwrap();
        assert!((b.estimate - 3.0 * a.estimate).abs() <= 1e-12 * b.estimate.max(1.0));
    }

    #[test]
    fn lattice_homogeneity_within_brackets() {
        let pm = PeriodicMetric::new(stripe_cell(12, 3, 1.5)).unwrap();
        let p = StableNormParams::default();
        let e1 = stable_norm(&pm, &[1, 0], 8, &p).unwrap();
        let e2 = stable_norm(&pm, &[2, 0], 4, &p).unwrap();
        // d(0, 2v)/2 measures the same limit
        assert!(e2.estimate / 2.0 <= e1.hi + 1e-12);
        assert!(e2.estimate / 2.0 >= e1.lo - 1e-12);
    }

    #[test]
    fn primitive_direction_counts() {
        let dirs = primitive_directions(2, 2);
        // (1,0),(0,1),(1,1),(1,-1),(1,2),(2,1),(1,-2),(2,-1)
        assert_eq!(dirs.len(), 8);
        assert!(primitive_directions(2, 7).len() >= 40);
    }

    #[test]
    fn flat_growth_ratio_near_one() {
        let pm = flat_pm(8, 3);
        let g = ball_growth(&pm, &[4.0, 8.0], 20_000_000).unwrap();
        let last = g.last().unwrap();
        assert!((last.ratio - 1.0).abs() < 0.06, "ratio {}", last.ratio);
    }

    #[test]
    fn taxicab_growth_ratio_is_two_over_pi() {
        let pm = flat_pm(8, 1);
        let g = ball_growth(&pm, &[10.0], 20_000_000).unwrap();
        let want = 2.0 / std::f64::consts::PI;
        assert!((g[0].ratio - want).abs() < 0.05, "ratio {}", g[0].ratio);
    }

    #[test]
    fn taxicab_report_is_refused() {
        let pm = flat_pm(8, 1);
        let params = BiParams {
            radii: vec![4.0, 6.0, 8.0, 10.0],
            direction_count: 8,
            ..Default::default()
        };
        let report = burago_ivanov_report(&pm, &params).unwrap();
        match report.verdict {
            BiVerdict::Refused { reason } => {
                assert!(reason.contains("taxicab"));
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn growth_scale_invariance_is_exact() {
        // replacing phi by c*phi rescales distances exactly, so the ratio
        // curve reparametrizes: ratio_c(c r) = ratio_1(r)
        let flat = flat_pm(8, 2);
        let c = 2.0;
        let scaled = PeriodicMetric::new(
            GridMetric::new(2, 8, GridDomain::Torus, 2, vec![c; 64]).unwrap(),
        )
        .unwrap();
        let budget = 20_000_000;
        let base = ball_growth(&flat, &[3.0, 5.0], budget).unwrap();
        let big = ball_growth(&scaled, &[3.0 * c, 5.0 * c], budget).unwrap();
        for (a, b) in base.iter().zip(&big) {
            assert!((a.ratio - b.ratio).abs() <= 1e-12, "{} vs {}", a.ratio, b.ratio);
            assert!((b.volume - c * c * a.volume).abs() <= 1e-9 * b.volume);
        }
    }

    #[test]
    fn stripe_ball_is_anisotropic() {
        // travel across the stripes pays the expensive band, travel along
        // the cheap column does not
        let pm = PeriodicMetric::new(stripe_cell(12, 3, 2.0)).unwrap();
        // height 2 keeps all eight primitive directions, axes included
        let (norm, _) = stable_unit_ball(
            &pm,
            8,
            &StableBallParams { height: 2, target_cells: 12.0, ..Default::default() },
        )
        .unwrap();
        let along = norm.eval(&[0.0, 1.0]).unwrap();
        let across = norm.eval(&[1.0, 0.0]).unwrap();
        assert!((along - 1.0).abs() < 0.1, "cheap direction cost {along}");
        assert!(across > along * 1.2, "across {across} vs along {along}");
    }

    #[test]
    fn flat_stable_ball_is_near_euclidean() {
        let pm = flat_pm(8, 3);
        let (norm, report) = stable_unit_ball(
            &pm,
            16,
            &StableBallParams { target_cells: 12.0, ..Default::default() },
        )
        .unwrap();
        // the unit circle lies close to the sampled ball
        for i in 0..16 {
            let t = std::f64::consts::PI * i as f64 / 8.0;
            let x = [t.cos(), t.sin()];
            let v = norm.eval(&x).unwrap();
            assert!((v - 1.0).abs() < 0.08, "norm at angle {t}: {v}");
        }
        assert!(report.sampling_gap < 0.05);
    }
}
