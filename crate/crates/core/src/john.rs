//! Maximal inscribed (John) ellipsoid of a polytopal unit ball.
//!
//! The facet functionals of the norm are the extreme points of the dual
//! ball, so the polar of their minimum-volume enclosing ellipsoid is the
//! maximal ellipsoid inscribed in the primal ball. The enclosing ellipsoid
//! is computed by multiplicative-weight ascent on the log-det design
//! objective, with away steps for support identification.

use crate::banach::{Atom, PartitionOfUnity, PolytopeNorm, QuadForm, VecN};
use crate::linalg::{dot, sym_pinv_solve, Matrix};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct MveeParams {
    /// Bound on the log-det optimality gap at convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// Wolfe-Atwood away steps; plain ascent steps when false.
    pub away_steps: bool,
    /// Optional initial design weights (must match the point count).
    pub initial_weights: Option<Vec<f64>>,
}

impl Default for MveeParams {
    fn default() -> Self {
        MveeParams { tol: 1e-9, max_iter: 500_000, away_steps: true, initial_weights: None }
    }
}

/// Minimum-volume ellipsoid `{x : x^T M x <= 1}` enclosing a symmetric
/// point set, with the design weights that witness it.
#[derive(Debug, Clone)]
pub struct Mvee {
    pub form: QuadForm,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Certified bound on the remaining log-det gap.
    pub logdet_gap: f64,
}

/// Minimum-volume origin-centered ellipsoid of the symmetric set
/// `{+/- p : p in points}`; `points` holds one representative per pair.
pub fn lowner_mvee(points: &[VecN], params: &MveeParams) -> Result<Mvee> {
    if points.is_empty() {
        return Err(Error::invalid("empty point set"));
    }
    let n = points[0].dim();
    let m = points.len();
    for p in points {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
        }
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|p| p.coords().to_vec()).collect();
    let rank = Matrix::from_rows(&rows)?.rank(1e-10);
    if rank < n {
        return Err(Error::NonSpanning { rank, dim: n });
    }

    let mut w = match &params.initial_weights {
        Some(init) => {
            if init.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: init.len() });
            }
            let total: f64 = init.iter().sum();
            if total <= 0.0 || init.iter().any(|&v| v < 0.0) {
                return Err(Error::invalid("initial weights must be nonnegative with positive sum"));
            }
            init.iter().map(|v| v / total).collect::<Vec<f64>>()
        }
        None => vec![1.0 / m as f64; m],
    };
    // keep the design nondegenerate under arbitrary initials
    let floor = 1e-12 / m as f64;
    for v in &mut w {
        *v = v.max(floor);
    }
    renormalize(&mut w);

    let design = |w: &[f64]| -> Matrix {
        let mut v = Matrix::zeros(n, n);
        for (wi, p) in w.iter().zip(points) {
            if *wi > 0.0 {
                v.add_outer(*wi, p.coords());
            }
        }
        v
    };

    let mut vinv = design(&w).inverse()?;
    let nf = n as f64;
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;

    while iterations < params.max_iter {
        iterations += 1;
        // leverage scores against the current design
        let mut omega_max = f64::NEG_INFINITY;
        let mut omega_min = f64::INFINITY;
        let mut j_max = 0;
        let mut j_min = 0;
        for (j, p) in points.iter().enumerate() {
            let vx = vinv.matvec(p.coords());
            let om = dot(&vx, p.coords());
            if om > omega_max {
                omega_max = om;
                j_max = j;
            }
            if params.away_steps && w[j] > floor * 2.0 && om < omega_min {
                omega_min = om;
                j_min = j;
            }
        }
        let eps_plus = omega_max / nf - 1.0;
        let eps_minus = if params.away_steps { 1.0 - omega_min / nf } else { 0.0 };
        gap = nf * eps_plus.max(0.0).ln_1p();
        if gap <= params.tol && nf * eps_minus <= params.tol {
            converged = true;
            break;
        }

        let (j, omega, away) = if params.away_steps && eps_minus > eps_plus {
            (j_min, omega_min, true)
        } else {
            (j_max, omega_max, false)
        };
        let lambda = if away {
            // the ascent is unbounded in the away direction when the
            // leverage drops below one; take the full drop then
            let cap = -w[j] / (1.0 - w[j]).max(1e-300);
            if omega > 1.0 + 1e-15 {
                ((omega - nf) / (nf * (omega - 1.0))).max(cap).min(0.0)
            } else {
                cap
            }
        } else {
            if (omega - 1.0).abs() < 1e-15 {
                break;
            }
            ((omega - nf) / (nf * (omega - 1.0))).clamp(0.0, 1.0 - 1e-12)
        };
        if lambda.abs() < 1e-17 {
            break;
        }
        // w <- (1 - lambda) w + lambda e_j
        for v in &mut w {
            *v *= 1.0 - lambda;
        }
        w[j] += lambda;

        // Sherman-Morrison update of the design inverse
        let u = points[j].coords();
        let vu = vinv.matvec(u);
        let denom = (1.0 - lambda) + lambda * omega;
        let coef = lambda / ((1.0 - lambda) * denom);
        for r in 0..n {
            for c in 0..n {
                vinv[(r, c)] = vinv[(r, c)] / (1.0 - lambda) - coef * vu[r] * vu[c];
            }
        }
        if iterations % 512 == 0 {
            renormalize(&mut w);
            vinv = match design(&w).inverse() {
                Ok(v) => v,
                Err(_) => {
                    // a degenerate drop left the design rank-deficient;
                    // remix a sliver of the uniform design and continue
                    for v in &mut w {
                        *v = 0.99 * *v + 0.01 / m as f64;
                    }
                    design(&w).inverse()?
                }
            };
        }
    }

    renormalize(&mut w);
    let v = design(&w);
    let m_mat = v.inverse()?.scaled(1.0 / nf);
    let sym = m_mat.add(&m_mat.transpose()).scaled(0.5);
    let form = QuadForm::with_tolerances(sym, 1e-9, 1e-8)?;
    Ok(Mvee { form, weights: w, iterations, converged, logdet_gap: gap })
}

fn renormalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
}

#[derive(Debug, Clone)]
pub struct JohnParams {
    pub mvee: MveeParams,
    /// Weights below `cutoff * max weight` are dropped from the support.
    pub weight_cutoff: f64,
    /// Sample count for the domination residual.
    pub domination_samples: usize,
    pub seed: u64,
}

impl Default for JohnParams {
    fn default() -> Self {
        JohnParams {
            mvee: MveeParams::default(),
            weight_cutoff: 1e-9,
            domination_samples: 1024,
            seed: 0x6a6f686e,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JohnResiduals {
    /// Frobenius residual of the contact decomposition.
    pub decomposition: f64,
    /// `|sum c_i - n|`.
    pub mass_gap: f64,
    /// Worst `||x||_Y - ||x||_h` over sampled unit directions.
    pub max_domination_violation: f64,
}

/// John form of a norm with its contact-functional decomposition.
#[derive(Debug, Clone)]
pub struct JohnResult {
    pub form: QuadForm,
    pub partition: PartitionOfUnity,
    /// Indices of the surviving contact facets.
    pub support: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: JohnResiduals,
}

/// Computes the Hilbertian form dominating the norm with maximal volume,
/// together with the weighted contact functionals decomposing it.
pub fn john_form(norm: &PolytopeNorm, params: &JohnParams) -> Result<JohnResult> {
    let n = norm.dim();
    let points: Vec<VecN> = norm
        .facets()
        .iter()
        .map(|f| VecN::new(f.coeffs().to_vec()))
        .collect::<Result<_>>()?;
    let mvee = lowner_mvee(&points, &params.mvee)?;

    // polar of the enclosing ellipsoid of the dual extreme points
    let a = mvee.form.matrix().inverse()?;
    let a = a.add(&a.transpose()).scaled(0.5);
    let form = QuadForm::with_tolerances(a.clone(), 1e-9, 1e-8)?;

    // contact support and one least-squares pass to make the
    // decomposition exact after the cutoff
    let w_max = mvee.weights.iter().cloned().fold(0.0f64, f64::max);
    let support: Vec<usize> = (0..points.len())
        .filter(|&j| mvee.weights[j] > params.weight_cutoff * w_max)
        .collect();
    let g = Matrix::from_fn(support.len(), support.len(), |i, j| {
        let d = dot(points[support[i]].coords(), points[support[j]].coords());
        d * d
    });
    let b: Vec<f64> = support
        .iter()
        .map(|&j| {
            let x = points[j].coords();
            dot(&a.matvec(x), x)
        })
        .collect();
    let mut c = sym_pinv_solve(&g, &b, 1e-12);
    // fall back to the raw design weights if the projection misbehaves
    if c.iter().any(|&v| !(v > 0.0)) {
        c = support.iter().map(|&j| n as f64 * mvee.weights[j]).collect();
    }

    let atoms: Vec<Atom> = support
        .iter()
        .zip(&c)
        .map(|(&j, &weight)| Atom { weight, functional: norm.facets()[j].clone() })
        .collect();
    let partition = PartitionOfUnity::with_tolerance(atoms, form.clone(), 1e-5)?;

    let decomposition = partition.residual();
    let mass_gap = (partition.total_mass() - n as f64).abs();
    let max_domination_violation =
        john_domination_check(norm, &form, params.domination_samples, params.seed)?;

    Ok(JohnResult {
        form,
        partition,
        support,
        iterations: mvee.iterations,
        converged: mvee.converged,
        residuals: JohnResiduals { decomposition, mass_gap, max_domination_violation },
    })
}

/// Maximal violation of `||x||_h >= ||x||_Y` over `samples` random
/// directions scaled to the unit sphere of the norm; nonpositive output
/// means domination holds on the sample.
pub fn john_domination_check(
    norm: &PolytopeNorm,
    form: &QuadForm,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if form.dim() != norm.dim() {
        return Err(Error::DimensionMismatch { expected: norm.dim(), got: form.dim() });
    }
    let n = norm.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    // facet contact directions are the tight spots; always include the
    // gradients of the form at the facet functionals
    let ainv = form.matrix().inverse()?;
    for f in norm.facets() {
        let x = ainv.matvec(f.coeffs());
        if let Some(v) = violation_at(norm, form, &x) {
            worst = worst.max(v);
        }
    }
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| crate::linalg::gaussian(&mut rng)).collect();
        if let Some(v) = violation_at(norm, form, &x) {
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

fn violation_at(norm: &PolytopeNorm, form: &QuadForm, x: &[f64]) -> Option<f64> {
    let ny = norm.eval_unchecked(x);
    if ny <= 0.0 {
        return None;
    }
    let scaled: Vec<f64> = x.iter().map(|v| v / ny).collect();
    Some(1.0 - form.norm(&scaled))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMethod {
    /// Exact planar area by vertex walk.
    Polygon,
    /// Stratified Monte Carlo in the scaled ellipsoid box.
    MonteCarlo,
    Interval,
}

#[derive(Debug, Clone)]
pub struct BallVolume {
    /// Hilbertian volume `sqrt(det A) * Leb(B)`.
    pub value: f64,
    /// Lebesgue volume of the unit ball of the norm.
    pub lebesgue: f64,
    pub sqrt_det: f64,
    pub std_error: Option<f64>,
    pub method: VolumeMethod,
}

#[derive(Debug, Clone)]
pub struct VolumeParams {
    pub samples: usize,
    pub seed: u64,
}

impl Default for VolumeParams {
    fn default() -> Self {
        VolumeParams { samples: 1_000_000, seed: 0x766f6c }
    }
}

/// Volume of the unit ball measured in the John metric. Dimension 2 uses
/// the exact polygon area; dimensions 3..=6 stratified Monte Carlo over the
/// bounding box of the `sqrt(n)`-scaled ellipsoid, which contains the ball.
pub fn john_volume_of_unit_ball(
    norm: &PolytopeNorm,
    form: &QuadForm,
    params: &VolumeParams,
) -> Result<BallVolume> {
    let n = norm.dim();
    if form.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: form.dim() });
    }
    let sqrt_det = form.det().max(0.0).sqrt();
    match n {
        1 => {
            let a_max = norm.facets().iter().map(|f| f.coeffs()[0].abs()).fold(0.0f64, f64::max);
            let leb = 2.0 / a_max;
            Ok(BallVolume {
                value: sqrt_det * leb,
                lebesgue: leb,
                sqrt_det,
                std_error: None,
                method: VolumeMethod::Interval,
            })
        }
        2 => {
            let leb = polygon_ball_area(norm)?;
            Ok(BallVolume {
                value: sqrt_det * leb,
                lebesgue: leb,
                sqrt_det,
                std_error: None,
                method: VolumeMethod::Polygon,
            })
        }
        3..=6 => {
            let (leb, se) = monte_carlo_ball_volume(norm, form, params)?;
            Ok(BallVolume {
                value: sqrt_det * leb,
                lebesgue: leb,
                sqrt_det,
                std_error: Some(sqrt_det * se),
                method: VolumeMethod::MonteCarlo,
            })
        }
        _ => Err(Error::invalid(format!("ball volume supports dim 1..=6, got {n}"))),
    }
}

/// Exact area of a planar polytopal unit ball: enumerate facet-pair
/// intersections, keep the feasible ones, walk them in angular order.
pub fn polygon_ball_area(norm: &PolytopeNorm) -> Result<f64> {
    if norm.dim() != 2 {
        return Err(Error::invalid("polygon area needs dim 2"));
    }
    let mut vertices: Vec<(f64, [f64; 2])> = Vec::new();
    norm.for_each_ball_vertex(|v| {
        vertices.push((v[1].atan2(v[0]), [v[0], v[1]]));
    })?;
    vertices.sort_by(|a, b| a.0.total_cmp(&b.0));
    vertices.dedup_by(|a, b| {
        (a.1[0] - b.1[0]).abs() < 1e-9 && (a.1[1] - b.1[1]).abs() < 1e-9
    });
    if vertices.len() < 3 {
        return Err(Error::Degenerate("fewer than three ball vertices".into()));
    }
    let mut area = 0.0;
    for i in 0..vertices.len() {
        let [x1, y1] = vertices[i].1;
        let [x2, y2] = vertices[(i + 1) % vertices.len()].1;
        area += x1 * y2 - x2 * y1;
    }
    Ok(area.abs() / 2.0)
}

/// Stratified hit-or-miss estimate of the Lebesgue volume. Samples are
/// indexed by a counter-based generator, so any parallel chunking yields
/// the sequential stream.
fn monte_carlo_ball_volume(
    norm: &PolytopeNorm,
    form: &QuadForm,
    params: &VolumeParams,
) -> Result<(f64, f64)> {
    let n = norm.dim();
    let ainv = form.matrix().inverse()?;
    // the ball lies inside the John ellipsoid scaled by sqrt(n)
    let half: Vec<f64> = (0..n).map(|i| (n as f64).sqrt() * ainv[(i, i)].max(0.0).sqrt()).collect();
    let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let strata = (params.samples as f64).powf(1.0 / n as f64).floor().max(1.0) as usize;
    let cells = strata.pow(n as u32);
    // whole rounds over the strata keep the estimator unbiased
    let samples = (params.samples / cells).max(1) * cells;

    let hits: usize = crate::parallel::sum_over_indices(samples, |idx| {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(idx as u64 + 1);
        let mut cell = idx % cells;
        let mut x = vec![0.0; n];
        for (i, xi) in x.iter_mut().enumerate() {
            let c = cell % strata;
            cell /= strata;
            let u: f64 = rng.gen::<f64>();
            let unit = (c as f64 + u) / strata as f64;
            *xi = (2.0 * unit - 1.0) * half[i];
        }
        usize::from(norm.eval_unchecked(&x) <= 1.0)
    });

    let p = hits as f64 / samples as f64;
    let volume = box_vol * p;
    let se = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
    Ok((volume, se))
}

/// Randomized initial design weights for restart probes.
pub fn random_initial_weights(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..count).map(|_| -(rng.gen_range(f64::MIN_POSITIVE..1.0f64)).ln()).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linf2() -> PolytopeNorm {
        PolytopeNorm::linf(2)
    }

    fn l1_square() -> PolytopeNorm {
        PolytopeNorm::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    fn hexagon() -> PolytopeNorm {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let t = std::f64::consts::PI * (i as f64) / 1.5;
                vec![t.cos(), t.sin()]
            })
            .collect();
        PolytopeNorm::from_rows(&rows).unwrap()
    }

    #[test]
    fn mvee_coordinate_axes() {
        for n in 1..=4usize {
            let points: Vec<VecN> = (0..n)
                .map(|i| {
                    let mut c = vec![0.0; n];
                    c[i] = 1.0;
                    VecN::new(c).unwrap()
                })
                .collect();
            let mvee = lowner_mvee(&points, &MveeParams::default()).unwrap();
            assert!(mvee.converged);
            assert!(mvee.form.matrix().sub(&Matrix::identity(n)).frobenius() < 1e-7);
            for w in &mvee.weights {
                assert!((w - 1.0 / n as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn mvee_square_corners() {
        let points = vec![
            VecN::new(vec![1.0, 1.0]).unwrap(),
            VecN::new(vec![1.0, -1.0]).unwrap(),
        ];
        let mvee = lowner_mvee(&points, &MveeParams::default()).unwrap();
        // circle of radius sqrt(2)
        assert!(mvee.form.matrix().sub(&Matrix::identity(2).scaled(0.5)).frobenius() < 1e-7);
    }

    #[test]
    fn mvee_single_pair_1d() {
        let points = vec![VecN::new(vec![3.0]).unwrap()];
        let mvee = lowner_mvee(&points, &MveeParams::default()).unwrap();
        assert!((mvee.form.matrix()[(0, 0)] - 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn mvee_rejects_non_spanning() {
        let points = vec![VecN::new(vec![1.0, 0.0]).unwrap(), VecN::new(vec![2.0, 0.0]).unwrap()];
        assert!(matches!(lowner_mvee(&points, &MveeParams::default()), Err(Error::NonSpanning { .. })));
    }

    #[test]
    fn john_of_linf_is_identity() {
        let r = john_form(&linf2(), &JohnParams::default()).unwrap();
        assert!(r.form.matrix().sub(&Matrix::identity(2)).frobenius() < 1e-8);
        assert!((r.partition.total_mass() - 2.0).abs() < 1e-8);
        for a in r.partition.atoms() {
            assert!((a.weight - 1.0).abs() < 1e-7);
        }
        assert!(r.residuals.max_domination_violation <= 1e-9);
    }

    #[test]
    fn john_of_l1_square() {
        let r = john_form(&l1_square(), &JohnParams::default()).unwrap();
        assert!(r.form.matrix().sub(&Matrix::identity(2).scaled(2.0)).frobenius() < 1e-7);
        for a in r.partition.atoms() {
            assert!((a.weight - 1.0).abs() < 1e-7);
        }
        assert!((r.partition.total_mass() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn john_of_hexagon() {
        let r = john_form(&hexagon(), &JohnParams::default()).unwrap();
        assert!(r.form.matrix().sub(&Matrix::identity(2)).frobenius() < 1e-7);
        assert_eq!(r.partition.atoms().len(), 3);
        for a in r.partition.atoms() {
            assert!((a.weight - 2.0 / 3.0).abs() < 1e-7);
        }
    }

    #[test]
    fn domination_flags_wrong_form() {
        // identity form does not dominate the l1-square norm
        let v = john_domination_check(&l1_square(), &QuadForm::identity(2), 2000, 7).unwrap();
        assert!((v - (1.0 - 1.0 / 2.0f64.sqrt())).abs() < 1e-6, "violation {v}");
    }

    #[test]
    fn contact_functionals_have_unit_dual_norms() {
        for norm in [linf2(), l1_square(), hexagon()] {
            let r = john_form(&norm, &JohnParams::default()).unwrap();
            for atom in r.partition.atoms() {
                let dual_y = norm.dual_norm(&atom.functional).unwrap().value;
                assert!((dual_y - 1.0).abs() < 1e-6, "Y-dual {dual_y}");
                let dual_h = r.form.dual_norm(&atom.functional).unwrap();
                assert!((dual_h - 1.0).abs() < 1e-6, "h-dual {dual_h}");
            }
        }
    }

    #[test]
    fn ball_volumes_2d() {
        let r = john_form(&linf2(), &JohnParams::default()).unwrap();
        let v = john_volume_of_unit_ball(&linf2(), &r.form, &VolumeParams::default()).unwrap();
        assert!((v.value - 4.0).abs() < 1e-8, "square: {v:?}");

        let l1 = l1_square();
        let r = john_form(&l1, &JohnParams::default()).unwrap();
        let v = john_volume_of_unit_ball(&l1, &r.form, &VolumeParams::default()).unwrap();
        assert!((v.lebesgue - 2.0).abs() < 1e-8);
        assert!((v.value - 4.0).abs() < 1e-7, "cross: {v:?}");
    }

    #[test]
    fn ball_volume_3d_cube() {
        let norm = PolytopeNorm::linf(3);
        let r = john_form(&norm, &JohnParams::default()).unwrap();
        let v = john_volume_of_unit_ball(
            &norm,
            &r.form,
            &VolumeParams { samples: 200_000, seed: 3 },
        )
        .unwrap();
        assert!((v.value - 8.0).abs() < 0.15, "cube volume {v:?}");
        assert!(v.std_error.unwrap() > 0.0);
    }

    #[test]
    fn monte_carlo_deterministic_for_fixed_seed() {
        let norm = PolytopeNorm::linf(3);
        let r = john_form(&norm, &JohnParams::default()).unwrap();
        let p = VolumeParams { samples: 50_000, seed: 99 };
        let a = john_volume_of_unit_ball(&norm, &r.form, &p).unwrap();
        let b = john_volume_of_unit_ball(&norm, &r.form, &p).unwrap();
        assert_eq!(a.value, b.value);
    }
}
