//! Small H-polytopes: vertex enumeration, interior dihedral angles and the
//! factorization of acute polytopes into Cartesian products of simplices.

use crate::linalg::{axpy, dot, norm2, sym_eigen, Matrix};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Half-space facet `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Facet {
    normal: Vec<f64>,
    offset: f64,
}

impl Facet {
    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// Bounded polytope `{x : <u_j, x> <= b_j}` in dimension at most 4.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HPolytope {
    dim: usize,
    facets: Vec<Facet>,
}

impl HPolytope {
    /// Normals are normalized to unit length on construction.
    pub fn new(dim: usize, facets: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if !(1..=4).contains(&dim) {
            return Err(Error::invalid("polytope dimension must be in 1..=4"));
        }
        if facets.len() < dim + 1 {
            return Err(Error::Degenerate("too few facets to bound a polytope".into()));
        }
        let facets = facets
            .into_iter()
            .map(|(normal, offset)| {
                if normal.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: normal.len() });
                }
                let len = norm2(&normal);
                if len == 0.0 || !offset.is_finite() {
                    return Err(Error::invalid("facet normal must be nonzero"));
                }
                Ok(Facet {
                    normal: normal.into_iter().map(|v| v / len).collect(),
                    offset: offset / len,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HPolytope { dim, facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset + tol)
    }
}

/// Vertex with the facets active at it.
#[derive(Debug, Clone)]
pub struct Vertex {
    pub point: Vec<f64>,
    pub incident: Vec<usize>,
}

/// All vertices by solving the facet n-subsets, keeping feasible solutions
/// and deduplicating. Errors when the polytope is empty or unbounded.
pub fn enumerate_vertices(p: &HPolytope) -> Result<Vec<Vertex>> {
    let n = p.dim;
    let m = p.facets.len();
    let scale = p.facets.iter().map(|f| f.offset.abs()).fold(1.0f64, f64::max);
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = Matrix::from_fn(n, n, |i, j| p.facets[idx[i]].normal[j]);
        if a.det().abs() > 1e-10 {
            let b: Vec<f64> = idx.iter().map(|&j| p.facets[j].offset).collect();
            if let Ok(x) = a.solve(&b) {
                if p.contains(&x, 1e-9 * scale)
                    && !vertices.iter().any(|v| {
                        v.point.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                            < (1e-8 * scale) * (1e-8 * scale)
                    })
                {
                    let incident: Vec<usize> = (0..m)
                        .filter(|&j| {
                            (dot(&p.facets[j].normal, &x) - p.facets[j].offset).abs()
                                <= 1e-8 * scale
                        })
                        .collect();
                    vertices.push(Vertex { point: x, incident });
                }
            }
        }
        // next combination
        let mut i = n;
        let done = loop {
            if i == 0 {
                break true;
            }
            i -= 1;
            if idx[i] != i + m - n {
                idx[i] += 1;
                for k in (i + 1)..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break false;
            }
        };
        if done {
            break;
        }
    }
    if vertices.is_empty() {
        return Err(Error::Degenerate("no vertex: empty or unbounded".into()));
    }
    // bounded iff every coordinate direction has a finite maximum
    let start = vertices[0].point.clone();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut c = vec![0.0; n];
            c[i] = s;
            if lp_maximize(p, &c, &start, None)?.is_none() {
                return Err(Error::Degenerate(format!(
                    "unbounded in coordinate direction {i}"
                )));
            }
        }
    }
    Ok(vertices)
}

/// Consistency report of an H-representation.
#[derive(Debug, Clone)]
pub struct PolytopeReport {
    pub bounded: bool,
    pub vertex_count: usize,
    /// Facets whose removal does not change the polytope.
    pub redundant: Vec<usize>,
    pub total_facets: usize,
}

impl PolytopeReport {
    pub fn essential_count(&self) -> usize {
        self.total_facets - self.redundant.len()
    }
}

/// Boundedness and redundancy analysis via the feasibility oracle: facet
/// `j` is redundant when maximizing its functional over the others stays
/// within its offset.
pub fn validate(p: &HPolytope) -> Result<PolytopeReport> {
    let vertices = enumerate_vertices(p)?;
    let start = vertices[0].point.clone();
    let mut redundant = Vec::new();
    for j in 0..p.facets.len() {
        let best = lp_maximize(p, &p.facets[j].normal, &start, Some(j))?;
        match best {
            Some(value) => {
                if value <= p.facets[j].offset + 1e-9 {
                    redundant.push(j);
                }
            }
            // unbounded without facet j: certainly essential
            None => {}
        }
    }
    Ok(PolytopeReport {
        bounded: true,
        vertex_count: vertices.len(),
        redundant,
        total_facets: p.facets.len(),
    })
}

/// Active-set walk maximizing `<c, x>` from a feasible point; `skip` drops
/// one facet. Returns `None` when unbounded.
fn lp_maximize(
    p: &HPolytope,
    c: &[f64],
    start: &[f64],
    skip: Option<usize>,
) -> Result<Option<f64>> {
    let n = p.dim;
    let live: Vec<usize> =
        (0..p.facets.len()).filter(|&j| Some(j) != skip).collect();
    let scale = norm2(c).max(1e-300);
    let mut x = start.to_vec();
    let mut active: Vec<usize> = Vec::new();
    let max_iter = 400 * (live.len() + n) + 1000;
    for iter in 0..max_iter {
        let rows: Vec<Vec<f64>> = active.iter().map(|&j| p.facets[j].normal.clone()).collect();
        let (d, mult) = split_against_span(c, &rows);
        let dn = norm2(&d);
        if dn > 1e-11 * scale {
            let mut alpha = f64::INFINITY;
            let mut blocker = None;
            for &j in &live {
                if active.contains(&j) {
                    continue;
                }
                let g = &p.facets[j].normal;
                let slope = dot(g, &d);
                if slope > 1e-13 {
                    let room = p.facets[j].offset - dot(g, &x);
                    let a = room / slope;
                    if a < alpha - 1e-15 {
                        alpha = a;
                        blocker = Some(j);
                    }
                }
            }
            let Some(j) = blocker else {
                return Ok(None);
            };
            axpy(&mut x, alpha.max(0.0), &d);
            active.push(j);
        } else {
            let negatives: Vec<usize> =
                (0..mult.len()).filter(|&i| mult[i] < -1e-11 * scale).collect();
            if negatives.is_empty() {
                return Ok(Some(dot(c, &x)));
            }
            let drop_pos = if iter < max_iter / 2 {
                *negatives
                    .iter()
                    .min_by(|&&a, &&b| mult[a].total_cmp(&mult[b]))
                    .unwrap()
            } else {
                *negatives.iter().min_by_key(|&&i| active[i]).unwrap()
            };
            active.remove(drop_pos);
        }
    }
    Err(Error::IterationLimit("polytope walk".into()))
}

fn split_against_span(c: &[f64], rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let k = rows.len();
    if k == 0 {
        return (c.to_vec(), Vec::new());
    }
    let gram = Matrix::from_fn(k, k, |i, j| dot(&rows[i], &rows[j]));
    let b: Vec<f64> = rows.iter().map(|r| dot(r, c)).collect();
    let mult = crate::linalg::sym_pinv_solve(&gram, &b, 1e-12);
    let mut d = c.to_vec();
    for (i, r) in rows.iter().enumerate() {
        axpy(&mut d, -mult[i], r);
    }
    (d, mult)
}

/// Interior dihedral angles over facet pairs sharing an (n-2)-face:
/// `pi - angle(u_i, u_j)`.
pub fn dihedral_angles(p: &HPolytope) -> Result<Vec<(usize, usize, f64)>> {
    let vertices = enumerate_vertices(p)?;
    let n = p.dim;
    let m = p.facets.len();
    let mut out = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let common: Vec<&Vertex> = vertices
                .iter()
                .filter(|v| v.incident.contains(&i) && v.incident.contains(&j))
                .collect();
            if common.is_empty() {
                continue;
            }
            // the shared face must have affine dimension n - 2
            let base = &common[0].point;
            let rows: Vec<Vec<f64>> = common[1..]
                .iter()
                .map(|v| v.point.iter().zip(base).map(|(a, b)| a - b).collect())
                .collect();
            let rank = if rows.is_empty() {
                0
            } else {
                Matrix::from_rows(&rows)?.rank(1e-8)
            };
            if rank != n - 2 {
                continue;
            }
            let cos = dot(&p.facets[i].normal, &p.facets[j].normal).clamp(-1.0, 1.0);
            out.push((i, j, std::f64::consts::PI - cos.acos()));
        }
    }
    Ok(out)
}

/// All interior dihedral angles at most a right angle.
pub fn is_acute(p: &HPolytope, tol: f64) -> Result<bool> {
    let angles = dihedral_angles(p)?;
    Ok(angles.iter().all(|&(_, _, a)| a <= std::f64::consts::FRAC_PI_2 + tol))
}

/// One factor of a simplex-product decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Block {
    pub facet_indices: Vec<usize>,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Factorization {
    Product(Vec<Block>),
    NotAProduct { reason: String },
}

/// Orthogonality tolerance for grouping facet normals.
pub const ORTHO_TOL: f64 = 1e-8;

/// Groups the essential facet normals into mutually orthogonal spans and
/// checks that each group bounds a simplex in its span: a group spanning
/// `d` dimensions must hold exactly `d + 1` facets whose normals admit a
/// strictly positive linear dependence.
pub fn simplex_product_factorization(p: &HPolytope) -> Result<Factorization> {
    let report = validate(p)?;
    let essential: Vec<usize> =
        (0..p.facets.len()).filter(|j| !report.redundant.contains(j)).collect();
    let n = p.dim;

    // union-find over the non-orthogonality relation
    let mut parent: Vec<usize> = (0..essential.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for a in 0..essential.len() {
        for b in (a + 1)..essential.len() {
            let cos = dot(&p.facets[essential[a]].normal, &p.facets[essential[b]].normal);
            if cos.abs() > ORTHO_TOL {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..essential.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(essential[i]);
    }

    let mut blocks = Vec::new();
    let mut dim_total = 0;
    for group in groups.values() {
        let rows: Vec<Vec<f64>> =
            group.iter().map(|&j| p.facets[j].normal.clone()).collect();
        let d = Matrix::from_rows(&rows)?.rank(1e-8);
        if group.len() != d + 1 {
            return Ok(Factorization::NotAProduct {
                reason: format!(
                    "a group of {} facets spans {d} dimensions; a simplex block needs {}",
                    group.len(),
                    d + 1
                ),
            });
        }
        // positive dependence: the kernel of the normal matrix is spanned
        // by a strictly positive vector
        let k = group.len();
        let gram = Matrix::from_fn(k, k, |a, b| dot(&rows[a], &rows[b]));
        let eig = sym_eigen(&gram);
        let kernel: Vec<f64> = (0..k).map(|r| eig.vectors[(r, 0)]).collect();
        if eig.values[0].abs() > 1e-8 {
            return Ok(Factorization::NotAProduct {
                reason: "group normals have no linear dependence".into(),
            });
        }
        let max_abs = kernel.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let all_pos = kernel.iter().all(|&v| v > ORTHO_TOL * max_abs);
        let all_neg = kernel.iter().all(|&v| v < -ORTHO_TOL * max_abs);
        if !(all_pos || all_neg) {
            return Ok(Factorization::NotAProduct {
                reason: "group normals do not positively span their space".into(),
            });
        }
        dim_total += d;
        blocks.push(Block { facet_indices: group.clone(), dim: d });
    }
    if dim_total != n {
        return Ok(Factorization::NotAProduct {
            reason: format!("block dimensions sum to {dim_total}, not {n}"),
        });
    }
    Ok(Factorization::Product(blocks))
}

/// Vertices of the product reconstructed block by block: each block is a
/// simplex in its span, and product vertices are sums of block vertices.
pub fn reconstruct_product_vertices(
    p: &HPolytope,
    blocks: &[Block],
) -> Result<Vec<Vec<f64>>> {
    let n = p.dim;
    let mut per_block: Vec<Vec<Vec<f64>>> = Vec::new();
    for block in blocks {
        let d = block.dim;
        let k = block.facet_indices.len();
        // orthonormal basis of the block span
        let rows: Vec<Vec<f64>> = block
            .facet_indices
            .iter()
            .map(|&j| p.facets[j].normal.clone())
            .collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for r in &rows {
            let mut v = r.clone();
            for b in &basis {
                let proj = dot(&v, b);
                axpy(&mut v, -proj, b);
            }
            let len = norm2(&v);
            if len > 1e-8 {
                basis.push(v.into_iter().map(|x| x / len).collect());
            }
        }
        if basis.len() != d {
            return Err(Error::Degenerate("block basis collapsed".into()));
        }
        // block simplex vertices: solve each d-subset of the k facets
        let mut verts = Vec::new();
        for drop in 0..k {
            let sel: Vec<usize> = (0..k).filter(|&i| i != drop).collect();
            let a = Matrix::from_fn(d, d, |r, c| {
                dot(&rows[sel[r]], &basis[c])
            });
            let b: Vec<f64> =
                sel.iter().map(|&i| p.facets[block.facet_indices[i]].offset).collect();
            let y = a.solve(&b)?;
            let mut x = vec![0.0; n];
            for (c, base) in basis.iter().enumerate() {
                axpy(&mut x, y[c], base);
            }
            verts.push(x);
        }
        per_block.push(verts);
    }
    // cartesian sums
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for verts in &per_block {
        let mut next = Vec::with_capacity(out.len() * verts.len());
        for base in &out {
            for v in verts {
                let mut x = base.clone();
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += vi;
                }
                next.push(x);
            }
        }
        out = next;
    }
    Ok(out)
}

/// On-disk schema for a polytope.
#[derive(Debug, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub dim: usize,
    pub facets: Vec<PolytopeFacetFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PolytopeFacetFile {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl PolytopeFile {
    pub fn into_polytope(self) -> Result<HPolytope> {
        HPolytope::new(
            self.dim,
            self.facets.into_iter().map(|f| (f.normal, f.offset)).collect(),
        )
    }
}

pub fn load_polytope(path: impl AsRef<std::path::Path>) -> Result<HPolytope> {
    let text = std::fs::read_to_string(path)?;
    let file: PolytopeFile = serde_json::from_str(&text)?;
    file.into_polytope()
}

/// Axis-aligned unit cube `[0,1]^n`.
pub fn unit_cube(n: usize) -> HPolytope {
    let mut facets = Vec::new();
    for i in 0..n {
        let mut up = vec![0.0; n];
        up[i] = 1.0;
        facets.push((up.clone(), 1.0));
        let down: Vec<f64> = up.iter().map(|v| -v).collect();
        facets.push((down, 0.0));
    }
    HPolytope::new(n, facets).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        random_acute_simplex, random_obtuse_polytope, random_simplex, rotated_simplex_product,
        simplex_from_vertices,
    };
    use rand::SeedableRng;

    #[test]
    fn cube_vertices_and_angles() {
        for n in 2..=4usize {
            let cube = unit_cube(n);
            let verts = enumerate_vertices(&cube).unwrap();
            assert_eq!(verts.len(), 1 << n);
            let angles = dihedral_angles(&cube).unwrap();
            assert_eq!(angles.len(), n * (n - 1) * 2);
            for (_, _, a) in angles {
                assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
            }
            assert!(is_acute(&cube, 1e-9).unwrap());
        }
    }

    #[test]
    fn regular_simplex_is_acute() {
        for n in 2..=3usize {
            let p = simplex_from_vertices(&crate::besicovitch::regular_simplex_vertices(n));
            let verts = enumerate_vertices(&p).unwrap();
            assert_eq!(verts.len(), n + 1);
            assert!(is_acute(&p, 1e-9).unwrap());
            // equilateral triangle angles are pi/3
            if n == 2 {
                for (_, _, a) in dihedral_angles(&p).unwrap() {
                    assert!((a - std::f64::consts::FRAC_PI_3).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn obtuse_triangle_detected() {
        let p = simplex_from_vertices(&[
            vec![0.0, 0.0],
            vec![4.0, 0.0],
            vec![3.9, 0.2],
        ]);
        let angles = dihedral_angles(&p).unwrap();
        assert!(angles.iter().any(|&(_, _, a)| a > std::f64::consts::FRAC_PI_2));
        assert!(!is_acute(&p, 1e-9).unwrap());
        // a triangle, obtuse or not, is itself a one-block simplex product
        match simplex_product_factorization(&p).unwrap() {
            Factorization::Product(blocks) => {
                assert_eq!(blocks.len(), 1);
                assert_eq!(blocks[0].dim, 2);
            }
            other => panic!("triangle is a single simplex block, got {other:?}"),
        }
    }

    #[test]
    fn obtuse_hexagon_is_not_a_product() {
        // non-regular hexagon with an obtuse corner
        let rows: Vec<(Vec<f64>, f64)> = (0..6)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 6.0 + 0.19 * ((i % 2) as f64);
                (vec![t.cos(), t.sin()], 1.0)
            })
            .collect();
        let p = HPolytope::new(2, rows).unwrap();
        assert!(!is_acute(&p, 1e-9).unwrap());
        assert!(matches!(
            simplex_product_factorization(&p).unwrap(),
            Factorization::NotAProduct { .. }
        ));
    }

    #[test]
    fn redundant_facet_reported() {
        let mut facets = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![-1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
            (vec![0.0, -1.0], 1.0),
        ];
        facets.push((vec![1.0, 1.0], 5.0));
        let p = HPolytope::new(2, facets).unwrap();
        let report = validate(&p).unwrap();
        assert_eq!(report.redundant, vec![4]);
        assert!(report.bounded);
    }

    #[test]
    fn unbounded_polytope_rejected() {
        // a quadrant has a vertex but recedes to infinity
        let p = HPolytope::new(
            2,
            vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![-1.0, -1.0], 0.5)],
        )
        .unwrap();
        assert!(matches!(enumerate_vertices(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn cube_factorizes_into_segments() {
        for n in 2..=4usize {
            let cube = unit_cube(n);
            match simplex_product_factorization(&cube).unwrap() {
                Factorization::Product(blocks) => {
                    assert_eq!(blocks.len(), n);
                    assert!(blocks.iter().all(|b| b.dim == 1));
                }
                other => panic!("cube should factor, got {other:?}"),
            }
        }
    }

    #[test]
    fn prism_factorizes_into_triangle_and_segment() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let tri = simplex_from_vertices(&crate::besicovitch::regular_simplex_vertices(2));
        let seg = HPolytope::new(1, vec![(vec![1.0], 1.0), (vec![-1.0], 0.0)]).unwrap();
        let prism = rotated_simplex_product(&[tri, seg], &mut rng);
        match simplex_product_factorization(&prism).unwrap() {
            Factorization::Product(blocks) => {
                let mut dims: Vec<usize> = blocks.iter().map(|b| b.dim).collect();
                dims.sort();
                assert_eq!(dims, vec![1, 2]);
            }
            other => panic!("prism should factor, got {other:?}"),
        }
    }

    #[test]
    fn factorization_soundness_via_vertices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let a = random_simplex(2, &mut rng);
            let b = random_simplex(1, &mut rng);
            let p = rotated_simplex_product(&[a, b], &mut rng);
            let blocks = match simplex_product_factorization(&p).unwrap() {
                Factorization::Product(blocks) => blocks,
                other => panic!("expected product, got {other:?}"),
            };
            let rebuilt = reconstruct_product_vertices(&p, &blocks).unwrap();
            let direct = enumerate_vertices(&p).unwrap();
            assert_eq!(rebuilt.len(), direct.len());
            for v in &direct {
                let matched = rebuilt.iter().any(|w| {
                    w.iter().zip(&v.point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < 1e-16
                });
                assert!(matched, "vertex {:?} not reconstructed", v.point);
            }
        }
    }

    #[test]
    fn acute_products_factor() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        for _ in 0..10 {
            let a = random_acute_simplex(2, &mut rng);
            let b = random_acute_simplex(1, &mut rng);
            let p = rotated_simplex_product(&[a, b], &mut rng);
            assert!(is_acute(&p, 1e-7).unwrap());
            assert!(matches!(
                simplex_product_factorization(&p).unwrap(),
                Factorization::Product(_)
            ));
        }
    }

    #[test]
    fn obtuse_random_polytopes_are_not_products() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(66);
        for _ in 0..10 {
            let p = random_obtuse_polytope(2, &mut rng);
            assert!(!is_acute(&p, 1e-9).unwrap());
            assert!(matches!(
                simplex_product_factorization(&p).unwrap(),
                Factorization::NotAProduct { .. }
            ));
        }
    }

    #[test]
    fn rotation_invariance_of_block_dims() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(88);
        let a = random_simplex(2, &mut rng);
        let b = random_simplex(1, &mut rng);
        let mut dims_seen = Vec::new();
        for _ in 0..5 {
            let p = rotated_simplex_product(&[a.clone(), b.clone()], &mut rng);
            if let Factorization::Product(blocks) = simplex_product_factorization(&p).unwrap() {
                let mut dims: Vec<usize> = blocks.iter().map(|x| x.dim).collect();
                dims.sort();
                dims_seen.push(dims);
            } else {
                panic!("should factor");
            }
        }
        assert!(dims_seen.iter().all(|d| *d == vec![1, 2]));
    }
}
