//! Dilation invariants of linear maps: Hilbert-Schmidt norms, weighted
//! L_q-dilations against a decomposition of the target form, exterior-power
//! Jacobians and the determinant inequalities they satisfy.

use crate::banach::{PartitionOfUnity, PolytopeNorm};
use crate::linalg::{norm2, singular_values, Matrix};
use crate::{Error, Result};

/// Geometry of the source space when evaluating `Lip(l o D)`.
#[derive(Debug, Clone, Copy)]
pub enum SourceGeometry<'a> {
    Euclidean,
    Polytope(&'a PolytopeNorm),
}

/// Hilbert-Schmidt norm `sqrt(trace(D^T D))`.
pub fn hs_norm(d: &Matrix) -> f64 {
    d.frobenius()
}

/// Weighted L_q-dilation `(sum_i c_i Lip(l_i o D)^q)^{1/q}` of a linear map
/// against a decomposition `mu` of the target form; `q = inf` takes the max.
///
/// `Lip(l_i o D)` is the dual source norm of `D^T l_i`.
pub fn lq_dilation(
    d: &Matrix,
    mu: &PartitionOfUnity,
    q: f64,
    source: SourceGeometry<'_>,
) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::invalid(format!("q must be in [1, inf], got {q}")));
    }
    if mu.dim() != d.rows() {
        return Err(Error::DimensionMismatch { expected: d.rows(), got: mu.dim() });
    }
    if let SourceGeometry::Polytope(norm) = source {
        if norm.dim() != d.cols() {
            return Err(Error::DimensionMismatch { expected: d.cols(), got: norm.dim() });
        }
    }
    let mut lips = Vec::with_capacity(mu.atoms().len());
    for atom in mu.atoms() {
        let pullback = d.tvec(atom.functional.coeffs());
        let lip = match source {
            SourceGeometry::Euclidean => norm2(&pullback),
            SourceGeometry::Polytope(norm) => {
                if norm2(&pullback) == 0.0 {
                    0.0
                } else {
                    let f = crate::banach::Functional::new(pullback)?;
                    norm.dual_norm(&f)?.value
                }
            }
        };
        lips.push((atom.weight, lip));
    }
    if q.is_infinite() {
        return Ok(lips.iter().fold(0.0f64, |m, &(_, l)| m.max(l)));
    }
    let sum: f64 = lips.iter().map(|&(c, l)| c * l.powf(q)).sum();
    Ok(sum.powf(1.0 / q))
}

/// Product of the `k` largest singular values: the norm of the k-th
/// exterior power of the map.
pub fn jacobian_k(d: &Matrix, k: usize) -> Result<f64> {
    let max_k = d.rows().min(d.cols());
    if k == 0 || k > max_k {
        return Err(Error::invalid(format!("k = {k} out of range 1..={max_k}")));
    }
    let s = singular_values(d);
    Ok(s[..k].iter().product())
}

#[derive(Debug, Clone)]
pub struct HadamardCheck {
    /// `Jac^{[n]}(D)` for `n` the target dimension.
    pub lhs: f64,
    /// `(n^{-1/2} |D|_HS)^n`.
    pub rhs: f64,
    pub holds: bool,
}

/// Determinant-versus-trace inequality `Jac^{[n]}(D) <= (n^{-1/2} |D|_HS)^n`
/// for maps into an n-dimensional Hilbert space.
pub fn hadamard_check(d: &Matrix) -> Result<HadamardCheck> {
    let n = d.rows();
    if d.cols() < n {
        return Err(Error::DimensionMismatch { expected: n, got: d.cols() });
    }
    let lhs = jacobian_k(d, n)?;
    let rhs = (hs_norm(d) / (n as f64).sqrt()).powi(n as i32);
    Ok(HadamardCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) })
}

#[derive(Debug, Clone)]
pub struct WeightedHadamardCheck {
    pub det_abs: f64,
    pub row_norm_product: f64,
    pub holds: bool,
}

/// Row-wise Hadamard bound `|det D| <= prod_i |row_i|_2`.
pub fn weighted_hadamard_check(d: &Matrix) -> Result<WeightedHadamardCheck> {
    if d.rows() != d.cols() {
        return Err(Error::DimensionMismatch { expected: d.rows(), got: d.cols() });
    }
    let det_abs = d.det().abs();
    let row_norm_product = (0..d.rows()).map(|i| norm2(d.row(i))).product();
    Ok(WeightedHadamardCheck {
        det_abs,
        row_norm_product,
        holds: det_abs <= row_norm_product * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone)]
pub struct InverseLipIdentity {
    /// `Lip(D^{-1}) = 1 / sigma_min(D)`.
    pub inverse_lip: f64,
    /// `C * Jac^{[n-1]}(D)` with `C = 1 / |det D|`.
    pub bound: f64,
    pub relative_gap: f64,
}

/// For an invertible linear map the co-Lipschitz bound through the
/// (n-1)-Jacobian is an identity; the two routes are computed independently
/// and their relative gap is reported.
pub fn inverse_lip_identity(d: &Matrix) -> Result<InverseLipIdentity> {
    if d.rows() != d.cols() {
        return Err(Error::DimensionMismatch { expected: d.rows(), got: d.cols() });
    }
    let n = d.rows();
    let det = d.det();
    let row_prod: f64 = (0..n).map(|i| norm2(d.row(i))).product();
    if det.abs() <= 1e-12 * row_prod.max(f64::MIN_POSITIVE) {
        return Err(Error::NearSingular { det: det.abs() });
    }
    // route one: top singular value of the explicit inverse
    let inv = d.inverse()?;
    let inverse_lip = singular_values(&inv)[0];
    // route two: volume-ratio constant times the (n-1)-Jacobian of D
    let bound = if n == 1 {
        1.0 / det.abs()
    } else {
        jacobian_k(d, n - 1)? / det.abs()
    };
    let relative_gap = (inverse_lip - bound).abs() / inverse_lip;
    Ok(InverseLipIdentity { inverse_lip, bound, relative_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banach::{Atom, QuadForm};

    fn diag(entries: &[f64]) -> Matrix {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    #[test]
    fn hs_norm_examples() {
        assert!((hs_norm(&Matrix::identity(3)) - 3.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(hs_norm(&Matrix::zeros(2, 2)), 0.0);
        assert!((hs_norm(&diag(&[3.0, 4.0])) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn lq_dilation_identity_is_mass_power() {
        for n in 1..=4usize {
            let mu = PartitionOfUnity::coordinate(n);
            for q in [1.0, 2.0, 3.5] {
                let v = lq_dilation(&Matrix::identity(n), &mu, q, SourceGeometry::Euclidean)
                    .unwrap();
                assert!((v - (n as f64).powf(1.0 / q)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lq_dilation_isometric_embedding() {
        // isometric R^2 -> R^3 has L_2-dilation sqrt(2) for any exact partition
        let d = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let mu = PartitionOfUnity::coordinate(3);
        let v = lq_dilation(&d, &mu, 2.0, SourceGeometry::Euclidean).unwrap();
        assert!((v - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lq_dilation_sup_path() {
        let d = diag(&[2.0, 0.0]);
        let mu = PartitionOfUnity::coordinate(2);
        let v = lq_dilation(&d, &mu, f64::INFINITY, SourceGeometry::Euclidean).unwrap();
        assert_eq!(v, 2.0);
        assert!(lq_dilation(&d, &mu, 0.5, SourceGeometry::Euclidean).is_err());
    }

    #[test]
    fn lq_dilation_polytope_source() {
        // rows of D^T l are measured in the dual of the source norm
        let linf = PolytopeNorm::linf(2);
        let mu = PartitionOfUnity::coordinate(2);
        let v = lq_dilation(&Matrix::identity(2), &mu, f64::INFINITY, SourceGeometry::Polytope(&linf))
            .unwrap();
        // dual of e_i in linf is 1
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_examples() {
        assert!((jacobian_k(&diag(&[2.0, 3.0]), 2).unwrap() - 6.0).abs() < 1e-12);
        let theta: f64 = 0.7;
        let rot = Matrix::from_rows(&[
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(), theta.cos()],
        ])
        .unwrap();
        for k in 1..=2 {
            assert!((jacobian_k(&rot, k).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(jacobian_k(&rot, 3).is_err());
    }

    #[test]
    fn jacobian_dominates_coordinate_minors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let d = Matrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
            let jac3 = jacobian_k(&d, 3).unwrap();
            // bounded by the Lipschitz constant cubed
            let smax = crate::linalg::singular_values(&d)[0];
            assert!(jac3 <= smax.powi(3) * (1.0 + 1e-12));
            // max |det| over 3x3 coordinate minors never exceeds Jac^{[3]}
            let mut best = 0.0f64;
            for ri in 0..4 {
                for ci in 0..4 {
                    let minor = Matrix::from_fn(3, 3, |i, j| {
                        let r = if i >= ri { i + 1 } else { i };
                        let c = if j >= ci { j + 1 } else { j };
                        d[(r, c)]
                    });
                    best = best.max(minor.det().abs());
                }
            }
            assert!(jac3 >= best - 1e-10, "jac3 {jac3} < best coordinate minor {best}");
        }
    }

    #[test]
    fn hadamard_examples() {
        // homothety is the equality case
        let c = 1.7;
        let hc = hadamard_check(&diag(&[c, c, c])).unwrap();
        assert!(hc.holds && (hc.lhs - hc.rhs).abs() < 1e-12 * hc.rhs);

        let hc = hadamard_check(&diag(&[1.0, 2.0])).unwrap();
        assert!((hc.lhs - 2.0).abs() < 1e-12);
        assert!((hc.rhs - 2.5).abs() < 1e-12);
        assert!(hc.holds);
    }

    #[test]
    fn weighted_hadamard_examples() {
        let wh = weighted_hadamard_check(&Matrix::identity(3)).unwrap();
        assert!(wh.holds && (wh.det_abs - wh.row_norm_product).abs() < 1e-12);
        // orthogonal rows give equality
        let wh = weighted_hadamard_check(
            &Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap(),
        )
        .unwrap();
        assert!((wh.det_abs - 2.0).abs() < 1e-12);
        assert!((wh.row_norm_product - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_lip_examples() {
        let r = inverse_lip_identity(&Matrix::identity(2)).unwrap();
        assert!((r.inverse_lip - 1.0).abs() < 1e-12 && r.relative_gap < 1e-12);
        let r = inverse_lip_identity(&diag(&[2.0, 3.0])).unwrap();
        assert!((r.inverse_lip - 0.5).abs() < 1e-12);
        assert!((r.bound - 0.5).abs() < 1e-12);
        // nearly dependent rows trip the row-product-relative cutoff
        let tiny = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-13]]).unwrap();
        assert!(matches!(inverse_lip_identity(&tiny), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn partition_independence_of_l2_dilation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 3;
        let d = Matrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
        let hs = hs_norm(&d);
        for _ in 0..10 {
            let mu = crate::fixtures::random_exact_partition(n, &mut rng);
            let v = lq_dilation(&d, &mu, 2.0, SourceGeometry::Euclidean).unwrap();
            assert!((v - hs).abs() < 1e-9 * hs.max(1.0));
        }
    }

    #[test]
    fn lq_mass_one_partitions_are_monotone_nondecreasing_in_q() {
        // power means of the atom Lipschitz constants grow with q once the
        // total mass is normalized to one
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 3;
        let d = Matrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
        let mu = crate::fixtures::random_exact_partition(n, &mut rng);
        let scaled: Vec<Atom> = mu
            .atoms()
            .iter()
            .map(|a| Atom { weight: a.weight / mu.total_mass(), functional: a.functional.clone() })
            .collect();
        let form = QuadForm::new(mu.form().matrix().scaled(1.0 / mu.total_mass())).unwrap();
        let mass_one = PartitionOfUnity::with_tolerance(scaled, form, 1e-9).unwrap();
        let qs = [1.0, 1.5, 2.0, 4.0, 16.0];
        let vals: Vec<f64> = qs
            .iter()
            .map(|&q| lq_dilation(&d, &mass_one, q, SourceGeometry::Euclidean).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "power mean decreased: {:?}", vals);
        }
        let sup = lq_dilation(&d, &mass_one, f64::INFINITY, SourceGeometry::Euclidean).unwrap();
        assert!(sup >= vals[vals.len() - 1] - 1e-12);
    }
}
