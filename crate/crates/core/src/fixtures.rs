//! Seeded generators for test corpora: random norms, exact partitions,
//! conformal grid densities and polytope families. Used by the unit tests,
//! the acceptance suite and the CLI selftest.

use crate::acute::HPolytope;
use crate::banach::{Atom, Functional, PartitionOfUnity, PolytopeNorm, QuadForm};
use crate::linalg::{gaussian, random_orthogonal, Matrix};
use crate::metric::{GridDomain, GridMetric};
use rand::Rng;

/// Exact decomposition of the identity form: convex mixture of rotated
/// orthonormal frames, optionally with split atoms.
pub fn random_exact_partition(n: usize, rng: &mut impl Rng) -> PartitionOfUnity {
    let frames = 2 + (rng.gen::<u32>() % 3) as usize;
    let mut weights: Vec<f64> = (0..frames).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut atoms = Vec::new();
    for &w in &weights {
        let q = random_orthogonal(n, rng);
        for i in 0..n {
            let col: Vec<f64> = (0..n).map(|r| q[(r, i)]).collect();
            atoms.push(Atom { weight: w, functional: Functional::new(col).unwrap() });
        }
    }
    PartitionOfUnity::with_tolerance(atoms, QuadForm::identity(n), 1e-10).unwrap()
}

/// Random symmetric polytopal norm with `pairs` facet representatives.
pub fn random_symmetric_polytope(dim: usize, pairs: usize, rng: &mut impl Rng) -> PolytopeNorm {
    loop {
        let rows: Vec<Vec<f64>> = (0..pairs)
            .map(|_| {
                let dir: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
                let len = crate::linalg::norm2(&dir);
                let scale = rng.gen_range(0.5..2.0) / len.max(1e-12);
                dir.into_iter().map(|v| v * scale).collect()
            })
            .collect();
        if let Ok(norm) = PolytopeNorm::from_rows(&rows) {
            return norm;
        }
    }
}

/// Smooth positive conformal factor on the unit cube or torus cell:
/// exponential of a low-frequency trigonometric polynomial, so values and
/// gradients stay modest.
pub fn smooth_density(dim: usize, nodes_per_axis: usize, periodic: bool, rng: &mut impl Rng) -> Vec<f64> {
    let mut terms = Vec::new();
    let max_freq = 3i32;
    let n_terms = 6;
    for _ in 0..n_terms {
        let freq: Vec<f64> = (0..dim)
            .map(|_| {
                let f = rng.gen_range(-max_freq..=max_freq) as f64;
                if periodic {
                    f * std::f64::consts::TAU
                } else {
                    f * std::f64::consts::PI
                }
            })
            .collect();
        let amp = rng.gen_range(-0.25..0.25);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        terms.push((freq, amp, phase));
    }
    let count = nodes_per_axis.pow(dim as u32);
    let denom = if periodic { nodes_per_axis } else { nodes_per_axis - 1 } as f64;
    (0..count)
        .map(|idx| {
            let mut rem = idx;
            let mut pos = vec![0.0; dim];
            for p in pos.iter_mut() {
                *p = (rem % nodes_per_axis) as f64 / denom;
                rem /= nodes_per_axis;
            }
            let mut s = 0.0;
            for (freq, amp, phase) in &terms {
                let arg: f64 = freq.iter().zip(&pos).map(|(f, x)| f * x).sum::<f64>() + phase;
                s += amp * arg.cos();
            }
            s.exp()
        })
        .collect()
}

/// Flat unit cell on the torus.
pub fn flat_cell(dim: usize, m: usize, k: usize) -> GridMetric {
    GridMetric::new(dim, m, GridDomain::Torus, k, vec![1.0; m.pow(dim as u32)]).unwrap()
}

/// Flat metric on the unit cube.
pub fn flat_cube(dim: usize, m: usize, k: usize) -> GridMetric {
    GridMetric::new(dim, m, GridDomain::Cube, k, vec![1.0; (m + 1).pow(dim as u32)]).unwrap()
}

/// Torus cell with density 1 on `x_1 < 1/2` and `hi` on `x_1 >= 1/2`.
pub fn stripe_cell(m: usize, k: usize, hi: f64) -> GridMetric {
    let density: Vec<f64> = (0..m * m)
        .map(|idx| if (idx % m) * 2 < m { 1.0 } else { hi })
        .collect();
    GridMetric::new(2, m, GridDomain::Torus, k, density).unwrap()
}

/// Torus cell with smooth bumps: density 1 outside, up to `peak` inside a
/// few random discs.
pub fn bump_cell(m: usize, k: usize, bumps: usize, peak: f64, rng: &mut impl Rng) -> GridMetric {
    let centers: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.08..0.2)))
        .collect();
    let density: Vec<f64> = (0..m * m)
        .map(|idx| {
            let x = (idx % m) as f64 / m as f64;
            let y = (idx / m) as f64 / m as f64;
            let mut v: f64 = 1.0;
            for &(cx, cy, r) in &centers {
                // torus distance to the bump center
                let dx = (x - cx).abs().min(1.0 - (x - cx).abs());
                let dy = (y - cy).abs().min(1.0 - (y - cy).abs());
                let d = (dx * dx + dy * dy).sqrt();
                if d < r {
                    let t = (std::f64::consts::PI * d / r).cos() * 0.5 + 0.5;
                    v = v.max(1.0 + (peak - 1.0) * t);
                }
            }
            v
        })
        .collect();
    GridMetric::new(2, m, GridDomain::Torus, k, density).unwrap()
}

/// Random smooth conformal metric on the unit cube.
pub fn random_conformal_cube(dim: usize, m: usize, k: usize, rng: &mut impl Rng) -> GridMetric {
    let density = smooth_density(dim, m + 1, false, rng);
    GridMetric::new(dim, m, GridDomain::Cube, k, density).unwrap()
}

/// Random smooth periodic cell.
pub fn random_conformal_cell(dim: usize, m: usize, k: usize, rng: &mut impl Rng) -> GridMetric {
    let density = smooth_density(dim, m, true, rng);
    GridMetric::new(dim, m, GridDomain::Torus, k, density).unwrap()
}

/// Random smooth conformal metric on the regular simplex: a low-frequency
/// trigonometric field evaluated at the barycentric node positions.
pub fn random_conformal_simplex(
    n: usize,
    m: usize,
    stencil: usize,
    rng: &mut impl Rng,
) -> crate::besicovitch::SimplexSpace {
    let flat = crate::besicovitch::SimplexSpace::flat(n, m, stencil);
    let mut terms = Vec::new();
    for _ in 0..6 {
        let freq: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-3..=3i32) as f64 * std::f64::consts::PI)
            .collect();
        terms.push((freq, rng.gen_range(-0.25..0.25), rng.gen_range(0.0..std::f64::consts::TAU)));
    }
    let density: Vec<f64> = flat
        .positions()
        .iter()
        .map(|pos| {
            let mut s = 0.0;
            for (freq, amp, phase) in &terms {
                let arg: f64 =
                    freq.iter().zip(pos).map(|(f, x)| f * x).sum::<f64>() + phase;
                s += amp * arg.cos();
            }
            s.exp()
        })
        .collect();
    crate::besicovitch::SimplexSpace::new(n, m, stencil, density).unwrap()
}

/// H-representation of a simplex from its vertex list.
pub fn simplex_from_vertices(vertices: &[Vec<f64>]) -> HPolytope {
    let n = vertices[0].len();
    assert_eq!(vertices.len(), n + 1);
    let mut facets = Vec::new();
    for opposite in 0..=n {
        let base: Vec<&Vec<f64>> = (0..=n).filter(|&j| j != opposite).map(|j| &vertices[j]).collect();
        // normal orthogonal to the facet, oriented away from the opposite vertex
        let rows: Vec<Vec<f64>> = base[1..]
            .iter()
            .map(|v| v.iter().zip(base[0]).map(|(a, b)| a - b).collect())
            .collect();
        let normal = null_direction(&rows, n);
        let offset = crate::linalg::dot(&normal, base[0]);
        let side = crate::linalg::dot(&normal, &vertices[opposite]);
        let (normal, offset) = if side > offset {
            (normal.iter().map(|v| -v).collect::<Vec<f64>>(), -offset)
        } else {
            (normal, offset)
        };
        facets.push((normal, offset));
    }
    HPolytope::new(n, facets).unwrap()
}

/// Unit vector orthogonal to all given rows (rows span an (n-1)-space):
/// eigenvector of `M^T M` with the smallest eigenvalue.
fn null_direction(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mtm = Matrix::from_fn(n, n, |i, j| rows.iter().map(|r| r[i] * r[j]).sum::<f64>());
    let eig = crate::linalg::sym_eigen(&mtm);
    let v: Vec<f64> = (0..n).map(|r| eig.vectors[(r, 0)]).collect();
    let len = crate::linalg::norm2(&v);
    v.into_iter().map(|x| x / len).collect()
}

/// Random simplex with vertices in the unit box, resampled until it is
/// reasonably non-degenerate.
pub fn random_simplex(n: usize, rng: &mut impl Rng) -> HPolytope {
    loop {
        let vertices: Vec<Vec<f64>> =
            (0..=n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let edges: Vec<Vec<f64>> = vertices[1..]
            .iter()
            .map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect())
            .collect();
        let vol = Matrix::from_rows(&edges).unwrap().det().abs();
        if vol > 0.05 {
            return simplex_from_vertices(&vertices);
        }
    }
}

/// Random acute simplex: perturbation of the regular one, resampled until
/// all dihedral angles stay below a right angle.
pub fn random_acute_simplex(n: usize, rng: &mut impl Rng) -> HPolytope {
    let regular = crate::besicovitch::regular_simplex_vertices(n);
    loop {
        let vertices: Vec<Vec<f64>> = regular
            .iter()
            .map(|v| v.iter().map(|&c| c + 0.10 * gaussian(rng)).collect())
            .collect();
        let p = simplex_from_vertices(&vertices);
        if crate::acute::is_acute(&p, 1e-9).unwrap_or(false) {
            return p;
        }
    }
}

/// Cartesian product of simplex blocks embedded in orthogonal coordinate
/// subspaces, then rotated by a random orthogonal map.
pub fn rotated_simplex_product(blocks: &[HPolytope], rng: &mut impl Rng) -> HPolytope {
    let n: usize = blocks.iter().map(|b| b.dim()).sum();
    let q = random_orthogonal(n, rng);
    let mut facets = Vec::new();
    let mut at = 0;
    for b in blocks {
        for f in b.facets() {
            let mut normal = vec![0.0; n];
            normal[at..at + b.dim()].copy_from_slice(f.normal());
            let rotated = q.matvec(&normal);
            facets.push((rotated, f.offset()));
        }
        at += b.dim();
    }
    HPolytope::new(n, facets).unwrap()
}

/// Random bounded polytope that is neither acute nor a product: Gaussian
/// facet directions at distance about 1, resampled until it has a vertex
/// and at least `dim + 2` essential facets and is not acute.
pub fn random_obtuse_polytope(n: usize, rng: &mut impl Rng) -> HPolytope {
    loop {
        let m = n + 2 + (rng.gen::<u32>() % 4) as usize;
        let mut facets: Vec<(Vec<f64>, f64)> = (0..m)
            .map(|_| {
                let dir: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
                let len = crate::linalg::norm2(&dir);
                let dir: Vec<f64> = dir.into_iter().map(|v| v / len).collect();
                (dir, rng.gen_range(0.6..1.4))
            })
            .collect();
        // box the polytope so it is always bounded
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; n];
                d[i] = s;
                facets.push((d, 2.0));
            }
        }
        let Ok(p) = HPolytope::new(n, facets) else { continue };
        let Ok(report) = crate::acute::validate(&p) else { continue };
        if !report.bounded || report.essential_count() < n + 2 {
            continue;
        }
        match crate::acute::is_acute(&p, 1e-9) {
            Ok(false) => return p,
            _ => continue,
        }
    }
}
