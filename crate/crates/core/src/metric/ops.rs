//! Metric-space operations: minimal Lipschitz extension, Busemann values
//! along rays, separated nets, net-based straightening and discrete centers
//! of mass.

use super::space::Space;
use crate::banach::{PartitionOfUnity, VecN};
use crate::linalg::{axpy, Matrix};
use crate::{Error, Result};

/// Scalar data on a subset of nodes.
#[derive(Debug, Clone)]
pub struct PartialFunction {
    pub domain: Vec<usize>,
    pub values: Vec<f64>,
}

impl PartialFunction {
    pub fn new(domain: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::invalid("domain must be nonempty"));
        }
        if domain.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: domain.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values must be finite"));
        }
        Ok(PartialFunction { domain, values })
    }
}

#[derive(Debug, Clone)]
pub struct McShaneExtension {
    pub values: Vec<f64>,
    /// Measured Lipschitz constant of the extension over the space.
    pub lipschitz: f64,
}

/// Pointwise-minimal `lambda`-Lipschitz extension
/// `f(x) = sup_i (f0_i - lambda * d(x, x_i))`.
///
/// Computed by one value-initialized sweep; the partial data must itself be
/// `lambda`-Lipschitz, which is checked through agreement on the domain.
pub fn mcshane_extend<S: Space + ?Sized>(
    space: &S,
    f0: &PartialFunction,
    lambda: f64,
) -> Result<McShaneExtension> {
    let values = mcshane_values(space, f0, lambda)?;
    check_domain_agreement(f0, &values, lambda)?;
    let lipschitz = space.max_slope(&values);
    Ok(McShaneExtension { values, lipschitz })
}

fn mcshane_values<S: Space + ?Sized>(
    space: &S,
    f0: &PartialFunction,
    lambda: f64,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda must be positive"));
    }
    for &i in &f0.domain {
        if i >= space.node_count() {
            return Err(Error::invalid(format!("domain node {i} out of range")));
        }
    }
    let seeds: Vec<(usize, f64)> = f0
        .domain
        .iter()
        .zip(&f0.values)
        .map(|(&i, &v)| (i, -v / lambda))
        .collect();
    let g = space.value_field(&seeds, None);
    Ok(g.into_iter().map(|v| -lambda * v).collect())
}

/// The extension agrees with the data exactly when the data is
/// `lambda`-Lipschitz; any excess is the worst violation.
fn check_domain_agreement(f0: &PartialFunction, ext: &[f64], lambda: f64) -> Result<()> {
    let scale = f0.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for (&i, &v) in f0.domain.iter().zip(&f0.values) {
        worst = worst.max(ext[i] - v);
    }
    if worst > 1e-9 * scale {
        return Err(Error::NotLipschitz { lambda, violation: worst });
    }
    Ok(())
}

/// Reference implementation: the defining supremum evaluated against one
/// distance field per domain node. Kept as the oracle for the fast path.
pub fn mcshane_extend_naive<S: Space + ?Sized>(
    space: &S,
    f0: &PartialFunction,
    lambda: f64,
) -> Result<McShaneExtension> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda must be positive"));
    }
    let n = space.node_count();
    let mut values = vec![f64::NEG_INFINITY; n];
    for (&i, &v) in f0.domain.iter().zip(&f0.values) {
        let d = space.value_field(&[(i, 0.0)], None);
        for (x, val) in values.iter_mut().enumerate() {
            *val = val.max(v - lambda * d[x]);
        }
    }
    check_domain_agreement(f0, &values, lambda)?;
    let lipschitz = space.max_slope(&values);
    Ok(McShaneExtension { values, lipschitz })
}

#[derive(Debug, Clone)]
pub struct BusemannValue {
    /// `d(a(r_max), y) - r_max`.
    pub value: f64,
    /// `(r_t, d(a(r_t), y) - r_t)` over ray prefixes, for convergence
    /// inspection.
    pub sequence: Vec<(f64, f64)>,
}

/// Busemann-style projection value of `y` against a finite ray given as
/// nodes with increasing parameters.
pub fn busemann<S: Space + ?Sized>(
    space: &S,
    ray: &[(usize, f64)],
    y: usize,
) -> Result<BusemannValue> {
    if ray.is_empty() {
        return Err(Error::invalid("ray must be nonempty"));
    }
    if ray.len() < 2 {
        return Err(Error::invalid("ray needs at least two points"));
    }
    if !ray.windows(2).all(|w| w[1].1 > w[0].1) {
        return Err(Error::invalid("ray parameters must be increasing"));
    }
    let field = space.value_field(&[(y, 0.0)], None);
    let sequence: Vec<(f64, f64)> = ray.iter().map(|&(node, r)| (r, field[node] - r)).collect();
    let value = sequence.last().unwrap().1;
    Ok(BusemannValue { value, sequence })
}

/// Greedy maximal `min_separation`-separated subset in node order: pairwise
/// distances at least the bound, every node strictly within it of the net.
pub fn separated_net<S: Space + ?Sized>(space: &S, min_separation: f64) -> Result<Vec<usize>> {
    if !(min_separation > 0.0) {
        return Err(Error::invalid("separation must be positive"));
    }
    let n = space.node_count();
    let mut to_net = vec![f64::INFINITY; n];
    let mut net = Vec::new();
    for i in 0..n {
        if to_net[i] >= min_separation {
            net.push(i);
            let field = space.value_field(&[(i, 0.0)], Some(min_separation));
            for (t, &f) in to_net.iter_mut().zip(&field) {
                if f < *t {
                    *t = f;
                }
            }
        }
    }
    Ok(net)
}

#[derive(Debug, Clone)]
pub struct Straightened {
    /// Straightened map, node-major target points.
    pub points: Vec<Vec<f64>>,
    /// Per-atom net Lipschitz constants.
    pub lambdas: Vec<f64>,
    /// `sqrt(sum_i c_i lambda_i^2)`, an upper bound on the L2-dilation of
    /// the output.
    pub l2_bound: f64,
}

/// Extends a map sampled on a separated net to the whole space, one
/// coordinate per atom of the partition, and reassembles target points
/// through the weighted atoms.
pub fn straighten_via_net<S: Space + ?Sized>(
    space: &S,
    net: &[usize],
    samples: &[VecN],
    mu: &PartitionOfUnity,
    min_separation: f64,
) -> Result<Straightened> {
    if net.is_empty() || net.len() != samples.len() {
        return Err(Error::DimensionMismatch { expected: net.len(), got: samples.len() });
    }
    let dim = mu.dim();
    for s in samples {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: s.dim() });
        }
    }
    // the reassembly step needs an exact decomposition of the Euclidean form
    let id_residual = mu.form().matrix().sub(&Matrix::identity(dim)).frobenius();
    if id_residual > 1e-8 || mu.residual() > 1e-8 {
        return Err(Error::InexactPartition {
            residual: id_residual.max(mu.residual()),
            tol: 1e-8,
        });
    }

    // pairwise distances on the net
    let fields: Vec<Vec<f64>> = net
        .iter()
        .map(|&s| space.value_field(&[(s, 0.0)], None))
        .collect();
    let mut closest = f64::INFINITY;
    for (i, fi) in fields.iter().enumerate() {
        for (j, &oj) in net.iter().enumerate() {
            if i < j {
                closest = closest.min(fi[oj]);
            }
        }
    }
    if net.len() > 1 && closest < min_separation * (1.0 - 1e-12) {
        return Err(Error::NetNotSeparated(min_separation, closest));
    }

    let n_nodes = space.node_count();
    let mut points = vec![vec![0.0; dim]; n_nodes];
    let mut lambdas = Vec::with_capacity(mu.atoms().len());
    for atom in mu.atoms() {
        let coord: Vec<f64> = samples.iter().map(|p| atom.functional.eval(p.coords())).collect();
        // net Lipschitz constant of this coordinate
        let mut lam = 0.0f64;
        for (i, fi) in fields.iter().enumerate() {
            for (j, &oj) in net.iter().enumerate() {
                if i < j && fi[oj] > 0.0 {
                    lam = lam.max((coord[i] - coord[j]).abs() / fi[oj]);
                }
            }
        }
        let extended = if lam > 0.0 {
            let pf = PartialFunction::new(net.to_vec(), coord.clone())?;
            mcshane_values(space, &pf, lam)?
        } else {
            vec![coord.first().copied().unwrap_or(0.0); n_nodes]
        };
        for (p, &v) in points.iter_mut().zip(&extended) {
            axpy(p, atom.weight * v, atom.functional.coeffs());
        }
        lambdas.push(lam);
    }
    let l2_bound = mu
        .atoms()
        .iter()
        .zip(&lambdas)
        .map(|(a, &l)| a.weight * l * l)
        .sum::<f64>()
        .sqrt();
    Ok(Straightened { points, lambdas, l2_bound })
}

/// Node minimizing the weighted sum of squared distances; ties break to the
/// lowest index.
pub fn center_of_mass<S: Space + ?Sized>(space: &S, weighted: &[(usize, f64)]) -> Result<usize> {
    if weighted.is_empty() {
        return Err(Error::invalid("weighted node set must be nonempty"));
    }
    if weighted.iter().any(|&(_, w)| w < 0.0 || !w.is_finite()) {
        return Err(Error::invalid("weights must be nonnegative"));
    }
    if weighted.iter().all(|&(_, w)| w == 0.0) {
        return Err(Error::invalid("weights must not all vanish"));
    }
    let n = space.node_count();
    let mut energy = vec![0.0f64; n];
    for &(y, w) in weighted {
        if w == 0.0 {
            continue;
        }
        if y >= n {
            return Err(Error::invalid(format!("node {y} out of range")));
        }
        let field = space.value_field(&[(y, 0.0)], None);
        for (e, d) in energy.iter_mut().zip(field) {
            *e += w * d * d;
        }
    }
    let mut best = 0;
    for i in 1..n {
        if energy[i] < energy[best] {
            best = i;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::space::AdjGraph;
    use crate::metric::{multi_dijkstra, GridMetric};

    fn path_graph(n: usize) -> AdjGraph {
        let edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        AdjGraph::new(n, &edges).unwrap()
    }

    #[test]
    fn mcshane_single_point_collapses_to_cone() {
        let g = path_graph(5);
        let f0 = PartialFunction::new(vec![2], vec![7.0]).unwrap();
        let ext = mcshane_extend(&g, &f0, 1.0).unwrap();
        let d = multi_dijkstra(&g, &[2]).unwrap();
        for (v, d) in ext.values.iter().zip(d) {
            assert!((v - (7.0 - d)).abs() < 1e-12);
        }
    }

    #[test]
    fn mcshane_two_points_interpolates() {
        let g = path_graph(6);
        let f0 = PartialFunction::new(vec![0, 5], vec![0.0, 5.0]).unwrap();
        let ext = mcshane_extend(&g, &f0, 1.0).unwrap();
        for (i, v) in ext.values.iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-12);
        }
        assert!(ext.lipschitz <= 1.0 + 1e-12);
    }

    #[test]
    fn mcshane_rejects_non_lipschitz_data() {
        let g = path_graph(4);
        let f0 = PartialFunction::new(vec![0, 1], vec![0.0, 5.0]).unwrap();
        assert!(matches!(mcshane_extend(&g, &f0, 1.0), Err(Error::NotLipschitz { .. })));
    }

    #[test]
    fn mcshane_idempotent_on_total_data() {
        let g = path_graph(7);
        let values: Vec<f64> = (0..7).map(|i| (i as f64 * 0.7).sin()).collect();
        let f0 = PartialFunction::new((0..7).collect(), values.clone()).unwrap();
        let ext = mcshane_extend(&g, &f0, 1.0).unwrap();
        for (a, b) in ext.values.iter().zip(&values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mcshane_monotone_in_data() {
        let g = path_graph(6);
        let lo = PartialFunction::new(vec![0, 5], vec![0.0, 1.0]).unwrap();
        let hi = PartialFunction::new(vec![0, 5], vec![0.5, 1.5]).unwrap();
        let e_lo = mcshane_extend(&g, &lo, 1.0).unwrap();
        let e_hi = mcshane_extend(&g, &hi, 1.0).unwrap();
        for (a, b) in e_lo.values.iter().zip(&e_hi.values) {
            assert!(a <= b);
        }
    }

    #[test]
    fn mcshane_fast_equals_naive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(5..40);
            let mut edges = Vec::new();
            for i in 1..n {
                edges.push((i, rng.gen_range(0..i), rng.gen_range(0.1..2.0)));
            }
            for _ in 0..n {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b {
                    edges.push((a, b, rng.gen_range(0.1..2.0)));
                }
            }
            let g = AdjGraph::new(n, &edges).unwrap();
            let dom: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            if dom.is_empty() {
                continue;
            }
            // build Lipschitz data from a distance field
            let field = multi_dijkstra(&g, &[dom[0]]).unwrap();
            let lambda = rng.gen_range(0.5..2.0);
            let vals: Vec<f64> = dom.iter().map(|&i| lambda * 0.9 * field[i]).collect();
            let f0 = PartialFunction::new(dom, vals).unwrap();
            let fast = mcshane_extend(&g, &f0, lambda).unwrap();
            let naive = mcshane_extend_naive(&g, &f0, lambda).unwrap();
            for (a, b) in fast.values.iter().zip(&naive.values) {
                assert!((a - b).abs() < 1e-12, "fast {a} naive {b}");
            }
        }
    }

    #[test]
    fn mcshane_grid_axis_matches_busemann_profile() {
        let m = 48;
        let gm = crate::fixtures::flat_cube(2, m, 3);
        // identity values on the bottom edge
        let dom: Vec<usize> = (0..=m).map(|x| gm.index([x, 0, 0])).collect();
        let vals: Vec<f64> = (0..=m).map(|x| x as f64 / m as f64).collect();
        let ray: Vec<(usize, f64)> = dom.iter().copied().zip(vals.iter().copied()).collect();
        let ext = mcshane_extend(&gm, &PartialFunction::new(dom, vals).unwrap(), 1.0).unwrap();
        // the minimal extension of identity data on the ray is the
        // Busemann profile of the ray with the opposite sign
        let probe = gm.index([m / 2, m / 8, 0]);
        let b = busemann(&gm, &ray, probe).unwrap();
        let best = b.sequence.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
        assert!(
            (ext.values[probe] + best).abs() < 1e-12,
            "extension {} vs busemann {}",
            ext.values[probe],
            -best
        );
        // near the ray both approach the first coordinate
        assert!((ext.values[probe] - 0.5).abs() < 0.03, "got {}", ext.values[probe]);
    }

    #[test]
    fn busemann_on_ray_is_minus_parameter() {
        let g = path_graph(10);
        let ray: Vec<(usize, f64)> = (0..10).map(|i| (i, i as f64)).collect();
        let b = busemann(&g, &ray, 4).unwrap();
        assert!((b.value - (-4.0)).abs() < 1e-12);
        // prefix sequence reaches the limit monotonically here
        assert!(b.sequence.iter().skip(4).all(|&(_, v)| (v + 4.0).abs() < 1e-12));
    }

    #[test]
    fn busemann_flat_grid_k3() {
        let m = 64;
        let gm = crate::fixtures::flat_cube(2, m, 3);
        let ray: Vec<(usize, f64)> =
            (0..=m).map(|x| (gm.index([x, 0, 0]), x as f64 / m as f64)).collect();
        // the limit -y_1 needs the ray to outrun the lateral offset
        let y = gm.index([m / 4, m / 8, 0]);
        let b = busemann(&gm, &ray, y).unwrap();
        let y1 = (m / 4) as f64 / m as f64;
        assert!((b.value + y1).abs() < 0.04, "value {} expected {}", b.value, -y1);
        // prefix values decrease toward the limit
        for w in b.sequence.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }

    #[test]
    fn busemann_taxicab_geometry() {
        let m = 64;
        let gm = crate::fixtures::flat_cube(2, m, 1);
        let ray: Vec<(usize, f64)> =
            (0..=m).map(|x| (gm.index([x, 0, 0]), x as f64 / m as f64)).collect();
        let y = gm.index([m / 4, m / 3, 0]);
        let b = busemann(&gm, &ray, y).unwrap();
        let expect = -((m / 4) as f64) / m as f64 + (m / 3) as f64 / m as f64;
        assert!((b.value - expect).abs() < 2.0 / m as f64, "value {}", b.value);
    }

    #[test]
    fn busemann_rejects_bad_rays() {
        let g = path_graph(4);
        assert!(busemann(&g, &[], 0).is_err());
        assert!(busemann(&g, &[(0, 0.0)], 0).is_err());
        assert!(busemann(&g, &[(0, 1.0), (1, 0.5)], 0).is_err());
    }

    #[test]
    fn net_extremes() {
        let g = path_graph(5);
        // separation beyond the diameter keeps one point
        let net = separated_net(&g, 100.0).unwrap();
        assert_eq!(net, vec![0]);
        // separation below the smallest edge keeps everything
        let net = separated_net(&g, 0.5).unwrap();
        assert_eq!(net.len(), 5);
    }

    #[test]
    fn net_separation_and_covering() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let n = rng.gen_range(10..60);
            let mut edges = Vec::new();
            for i in 1..n {
                edges.push((i, rng.gen_range(0..i), rng.gen_range(0.2..1.5)));
            }
            let g = AdjGraph::new(n, &edges).unwrap();
            let sep = rng.gen_range(0.5..3.0);
            let net = separated_net(&g, sep).unwrap();
            // exhaustive verification of both properties
            let mut cover = vec![f64::INFINITY; n];
            for (ai, &a) in net.iter().enumerate() {
                let field = multi_dijkstra(&g, &[a]).unwrap();
                for (bi, &b) in net.iter().enumerate() {
                    if ai < bi {
                        assert!(field[b] >= sep - 1e-12);
                    }
                }
                for (c, f) in cover.iter_mut().zip(&field) {
                    *c = c.min(*f);
                }
            }
            assert!(cover.iter().all(|&c| c < sep));
        }
    }

    #[test]
    fn center_of_mass_examples() {
        let g = path_graph(7);
        assert_eq!(center_of_mass(&g, &[(3, 1.0)]).unwrap(), 3);
        // two equal weights on an odd path meet in the middle
        assert_eq!(center_of_mass(&g, &[(0, 1.0), (6, 1.0)]).unwrap(), 3);
        assert!(center_of_mass(&g, &[]).is_err());
        assert!(center_of_mass(&g, &[(0, 0.0)]).is_err());
    }

    #[test]
    fn center_of_mass_grid_matches_euclidean_mean() {
        let m = 32;
        let gm = crate::fixtures::flat_cube(2, m, 3);
        // weight cloud around (0.25, 0.5) and (0.75, 0.5) with equal mass
        let pts = [(gm.index([8, 16, 0]), 1.0), (gm.index([24, 16, 0]), 1.0)];
        let c = center_of_mass(&gm, &pts).unwrap();
        let pos = gm.position(c);
        assert!((pos[0] - 0.5).abs() <= 1.5 / m as f64 + 1e-12);
        assert!((pos[1] - 0.5).abs() <= 1.5 / m as f64 + 1e-12);
    }

    #[test]
    fn straighten_identity_on_net() {
        let m = 32;
        let gm: GridMetric = crate::fixtures::flat_cube(2, m, 3);
        let sep = 0.2;
        let net = separated_net(&gm, sep).unwrap();
        let samples: Vec<VecN> = net
            .iter()
            .map(|&u| VecN::new(gm.position(u)).unwrap())
            .collect();
        let mu = PartitionOfUnity::coordinate(2);
        let s = straighten_via_net(&gm, &net, &samples, &mu, sep).unwrap();
        // coordinates extend 1-Lipschitz data, certificate close to sqrt(2)
        for l in &s.lambdas {
            assert!(*l <= 1.0 + 0.03, "lambda {l}");
        }
        assert!(s.l2_bound <= (2.0f64).sqrt() * 1.03);
        // output stays within the covering radius of the identity
        for (u, p) in s.points.iter().enumerate() {
            let pos = gm.position(u);
            let err = ((p[0] - pos[0]).powi(2) + (p[1] - pos[1]).powi(2)).sqrt();
            assert!(err <= sep * 1.5, "node {u} displaced {err}");
        }
    }

    #[test]
    fn straighten_constant_map() {
        let g = path_graph(9);
        let net = separated_net(&g, 2.0).unwrap();
        let samples: Vec<VecN> =
            net.iter().map(|_| VecN::new(vec![1.0, -2.0]).unwrap()).collect();
        let mu = PartitionOfUnity::coordinate(2);
        let s = straighten_via_net(&g, &net, &samples, &mu, 2.0).unwrap();
        assert!(s.lambdas.iter().all(|&l| l == 0.0));
        assert_eq!(s.l2_bound, 0.0);
        for p in &s.points {
            assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn straighten_fold_map_certificate() {
        // fold the flat square across x = 1/2; pointwise Lipschitz constant
        // of the fold is 1, the straightened map obeys the net certificate
        let m = 40;
        let gm = crate::fixtures::flat_cube(2, m, 3);
        let sep = 0.15;
        let net = separated_net(&gm, sep).unwrap();
        let fold = |p: &[f64]| -> Vec<f64> {
            vec![0.5 - (p[0] - 0.5).abs(), p[1]]
        };
        let samples: Vec<VecN> = net
            .iter()
            .map(|&u| VecN::new(fold(&gm.position(u))).unwrap())
            .collect();
        let mu = PartitionOfUnity::coordinate(2);
        let s = straighten_via_net(&gm, &net, &samples, &mu, sep).unwrap();
        let eps = 0.03;
        assert!(s.l2_bound <= (2.0f64).sqrt() * (1.0 + eps), "bound {}", s.l2_bound);
        // certificate dominates the measured per-edge dilation
        let mut worst: f64 = 0.0;
        let mut check = |u: usize, v: usize, w: f64| {
            let du: f64 = s.points[u]
                .iter()
                .zip(&s.points[v])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(du / w);
        };
        gm.for_each_bond(&mut |u, v, w| check(u, v, w));
        assert!(worst <= s.l2_bound * (1.0 + 1e-9), "worst {worst} bound {}", s.l2_bound);
        // straightened map stays near the fold
        for (u, p) in s.points.iter().enumerate() {
            let f = fold(&gm.position(u));
            for (a, b) in p.iter().zip(&f) {
                assert!((a - b).abs() <= 2.0 * sep + 1e-9);
            }
        }
    }

    #[test]
    fn straighten_rejects_unseparated_net() {
        let g = path_graph(5);
        let mu = PartitionOfUnity::coordinate(2);
        let samples: Vec<VecN> = vec![VecN::new(vec![0.0, 0.0]).unwrap(); 2];
        let err = straighten_via_net(&g, &[0, 1], &samples, &mu, 5.0);
        assert!(matches!(err, Err(Error::NetNotSeparated(_, _))));
    }
}
