//! Finite-dimensional Banach substrate: vectors, functionals, Hilbertian
//! quadratic forms, polytopal norms and weighted decompositions of a form
//! into squares of functionals.
//!
//! Norms are stored facet-first: the unit ball is the intersection of slabs
//! `|<a_j, x>| <= 1`, one representative functional per +/- pair.

use crate::linalg::{axpy, dot, norm2, sym_eigenvalues, Matrix};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default relative tolerance for the positive-semidefiniteness check.
pub const PSD_REL_TOL: f64 = 1e-10;
/// Default relative tolerance for the symmetry check.
pub const SYM_REL_TOL: f64 = 1e-12;
/// Default Frobenius tolerance for partition-of-unity exactness.
pub const PARTITION_TOL: f64 = 1e-8;

/// Point of an n-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecN {
    coords: Vec<f64>,
}

impl VecN {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("vector must have positive dimension"));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("vector entries must be finite"));
        }
        Ok(VecN { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl AsRef<[f64]> for VecN {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// Linear functional `x -> <a, x>`, stored unnormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    coeffs: VecN,
}

impl Functional {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let v = VecN::new(coeffs)?;
        if norm2(v.coords()) == 0.0 {
            return Err(Error::invalid("functional must be nonzero"));
        }
        Ok(Functional { coeffs: v })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn coeffs(&self) -> &[f64] {
        self.coeffs.coords()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(self.coeffs(), x)
    }

    pub fn euclidean_norm(&self) -> f64 {
        norm2(self.coeffs())
    }
}

/// Hilbertian quadratic form `h(x) = x^T A x`, with `A` symmetric positive
/// semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    matrix: Matrix,
}

impl QuadForm {
    pub fn new(matrix: Matrix) -> Result<Self> {
        Self::with_tolerances(matrix, SYM_REL_TOL, PSD_REL_TOL)
    }

    pub fn with_tolerances(matrix: Matrix, sym_tol: f64, psd_tol: f64) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch { expected: matrix.rows(), got: matrix.cols() });
        }
        let asym = matrix.asymmetry();
        if asym > sym_tol {
            return Err(Error::NotSymmetric(asym));
        }
        let eigs = sym_eigenvalues(&matrix);
        let radius = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(&min) = eigs.first() {
            if min < -psd_tol * radius {
                return Err(Error::NotPositiveSemidefinite(min));
            }
        }
        Ok(QuadForm { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        QuadForm { matrix: Matrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Form value `x^T A x`.
    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.matrix.matvec(x), x)
    }

    /// Norm `sqrt(x^T A x)` induced by the form.
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.value(x).max(0.0).sqrt()
    }

    /// Dual norm `sqrt(l^T A^{-1} l)` of a functional.
    pub fn dual_norm(&self, l: &Functional) -> Result<f64> {
        let sol = self.matrix.solve(l.coeffs())?;
        Ok(dot(&sol, l.coeffs()).max(0.0).sqrt())
    }

    pub fn det(&self) -> f64 {
        self.matrix.det()
    }
}

/// Polytopal norm `||x|| = max_j |<a_j, x>|`; facets span the space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeNorm {
    dim: usize,
    facets: Vec<Functional>,
}

/// Outcome of a dual-norm evaluation with its optimality certificate.
#[derive(Debug, Clone)]
pub struct DualNorm {
    pub value: f64,
    /// Point of the unit ball attaining (or lower-bounding) the value.
    pub maximizer: Vec<f64>,
    /// Certified bracket `[primal, dual]` around the exact value.
    pub bracket: (f64, f64),
}

impl PolytopeNorm {
    pub fn new(dim: usize, facets: Vec<Functional>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if facets.len() < dim {
            return Err(Error::NonSpanning { rank: facets.len(), dim });
        }
        for f in &facets {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: f.dim() });
            }
        }
        let rows: Vec<Vec<f64>> = facets.iter().map(|f| f.coeffs().to_vec()).collect();
        let rank = Matrix::from_rows(&rows)?.rank(1e-10);
        if rank < dim {
            return Err(Error::NonSpanning { rank, dim });
        }
        Ok(PolytopeNorm { dim, facets })
    }

    /// Builds a norm from plain coefficient rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        let facets = rows.iter().map(|r| Functional::new(r.clone())).collect::<Result<_>>()?;
        PolytopeNorm::new(dim, facets)
    }

    /// The l_inf norm on `R^n` (facets are the coordinate functionals).
    pub fn linf(dim: usize) -> Self {
        let facets = (0..dim)
            .map(|i| {
                let mut c = vec![0.0; dim];
                c[i] = 1.0;
                Functional::new(c).unwrap()
            })
            .collect();
        PolytopeNorm { dim, facets }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Functional] {
        &self.facets
    }

    /// Norm value `max_j |<a_j, x>|`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.facets.iter().fold(0.0f64, |m, f| m.max(f.eval(x).abs()))
    }

    /// Dual norm `sup { <l, x> : ||x|| <= 1 }`.
    ///
    /// Dimensions up to 4 are solved by vertex enumeration of the unit ball;
    /// larger dimensions by constraint-projected ascent on the ball, which
    /// terminates with a matching dual certificate.
    pub fn dual_norm(&self, l: &Functional) -> Result<DualNorm> {
        if l.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: l.dim() });
        }
        if self.dim <= 4 {
            self.dual_norm_by_vertices(l)
        } else {
            self.dual_norm_by_ascent(l)
        }
    }

    /// Dual norms of many functionals, sharing one vertex enumeration in
    /// low dimension.
    pub fn dual_norms(&self, ls: &[Functional]) -> Result<Vec<f64>> {
        for l in ls {
            if l.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: l.dim() });
            }
        }
        if self.dim <= 4 {
            let mut best = vec![0.0f64; ls.len()];
            self.for_each_ball_vertex(|v| {
                for (b, l) in best.iter_mut().zip(ls) {
                    *b = b.max(l.eval(v).abs());
                }
            })?;
            Ok(best)
        } else {
            ls.iter().map(|l| self.dual_norm_by_ascent(l).map(|d| d.value)).collect()
        }
    }

    fn dual_norm_by_vertices(&self, l: &Functional) -> Result<DualNorm> {
        let mut best = 0.0f64;
        let mut arg = vec![0.0; self.dim];
        self.for_each_ball_vertex(|v| {
            let val = l.eval(v).abs();
            if val > best {
                best = val;
                arg.copy_from_slice(v);
            }
        })?;
        if l.eval(&arg) < 0.0 {
            for c in &mut arg {
                *c = -*c;
            }
        }
        Ok(DualNorm { value: best, maximizer: arg, bracket: (best, best) })
    }

    /// Visits every vertex of the unit ball (dim <= 4). Vertices may repeat
    /// when more than `dim` facets meet at a point.
    ///
    /// Allocation-free hot path: one Gauss-Jordan inverse per facet subset,
    /// sign patterns as signed column sums of the inverse.
    pub fn for_each_ball_vertex(&self, mut visit: impl FnMut(&[f64])) -> Result<()> {
        let n = self.dim;
        if n > 4 {
            return Err(Error::invalid("vertex enumeration is limited to dim <= 4"));
        }
        let m = self.facets.len();
        let mut idx = [0usize; 4];
        for (i, v) in idx.iter_mut().enumerate().take(n) {
            *v = i;
        }
        let mut a = [0.0f64; 16];
        let mut inv = [0.0f64; 16];
        let mut x = [0.0f64; 4];
        let mut neg = [0.0f64; 4];
        loop {
            let mut scale = 1.0f64;
            for i in 0..n {
                let row = self.facets[idx[i]].coeffs();
                a[i * n..i * n + n].copy_from_slice(row);
                scale *= self.facets[idx[i]].euclidean_norm();
            }
            if invert_small(&mut a, &mut inv, n, 1e-12 * scale.max(f64::MIN_POSITIVE)) {
                for signs in 0..(1u32 << (n - 1)) {
                    // x = A^{-1} s with s_0 = +1; the mirrored vertex is -x
                    for (r, xr) in x.iter_mut().enumerate().take(n) {
                        let mut acc = inv[r * n];
                        for i in 1..n {
                            let s = if signs >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
                            acc += s * inv[r * n + i];
                        }
                        *xr = acc;
                    }
                    let mut feasible = true;
                    'facets: for (j, f) in self.facets.iter().enumerate() {
                        if idx[..n].contains(&j) {
                            continue;
                        }
                        let mut v = 0.0;
                        for (c, xi) in f.coeffs().iter().zip(&x[..n]) {
                            v += c * xi;
                        }
                        if v.abs() > 1.0 + 1e-9 {
                            feasible = false;
                            break 'facets;
                        }
                    }
                    if feasible {
                        visit(&x[..n]);
                        for (ni, xi) in neg.iter_mut().zip(&x[..n]) {
                            *ni = -xi;
                        }
                        visit(&neg[..n]);
                    }
                }
            }
            // next combination
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(());
                }
                i -= 1;
                if idx[i] != i + m - n {
                    idx[i] += 1;
                    for k in (i + 1)..n {
                        idx[k] = idx[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Active-set ascent: walks the unit ball along faces of increasing
    /// `<l, x>` until the KKT multipliers certify optimality.
    fn dual_norm_by_ascent(&self, l: &Functional) -> Result<DualNorm> {
        let n = self.dim;
        let c = l.coeffs();
        let cnorm = norm2(c);
        if cnorm == 0.0 {
            return Ok(DualNorm { value: 0.0, maximizer: vec![0.0; n], bracket: (0.0, 0.0) });
        }
        // constraints <g_k, x> <= 1 for g_k = +/- a_j
        let m = self.facets.len();
        let grad = |k: usize| -> Vec<f64> {
            let f = self.facets[k % m].coeffs();
            if k < m {
                f.to_vec()
            } else {
                f.iter().map(|v| -v).collect()
            }
        };
        let mut x = vec![0.0; n];
        let mut active: Vec<usize> = Vec::new();
        let max_iter = 200 * (m + n) + 1000;
        let bland_switch = max_iter / 2;
        for iter in 0..max_iter {
            // project l onto the null space of the active gradients
            let rows: Vec<Vec<f64>> = active.iter().map(|&k| grad(k)).collect();
            let (d, mult) = project_onto_null(c, &rows);
            let dn = norm2(&d);
            if dn > 1e-11 * cnorm {
                // line search against inactive constraints
                let mut alpha = f64::INFINITY;
                let mut blocker = None;
                for k in 0..2 * m {
                    if active.contains(&k) {
                        continue;
                    }
                    let g = grad(k);
                    let slope = dot(&g, &d);
                    if slope > 1e-13 * cnorm {
                        let room = 1.0 - dot(&g, &x);
                        let a = room / slope;
                        if a < alpha - 1e-15 {
                            alpha = a;
                            blocker = Some(k);
                        }
                    }
                }
                let Some(k) = blocker else {
                    return Err(Error::NonSpanning { rank: 0, dim: n });
                };
                let alpha = alpha.max(0.0);
                axpy(&mut x, alpha, &d);
                active.push(k);
            } else {
                // stationary on the face; check multipliers
                let negatives: Vec<usize> = (0..mult.len())
                    .filter(|&i| mult[i] < -1e-11 * cnorm)
                    .collect();
                if negatives.is_empty() {
                    let primal = dot(c, &x);
                    let dual: f64 = mult.iter().map(|v| v.max(0.0)).sum();
                    return Ok(DualNorm {
                        value: primal,
                        maximizer: x,
                        bracket: (primal.min(dual), primal.max(dual)),
                    });
                }
                // drop the most negative; fall back to the lowest constraint
                // index if the walk runs long (anti-cycling)
                let drop_pos = if iter < bland_switch {
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
        Err(Error::IterationLimit("dual-norm ascent".into()))
    }
}

/// In-place Gauss-Jordan inverse for n <= 4; returns false when a pivot
/// falls below the threshold. `a` is destroyed.
fn invert_small(a: &mut [f64; 16], inv: &mut [f64; 16], n: usize, tol: f64) -> bool {
    inv.fill(0.0);
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a[i * n + k].abs() > a[piv * n + k].abs() {
                piv = i;
            }
        }
        if a[piv * n + k].abs() <= tol {
            return false;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
                inv.swap(k * n + j, piv * n + j);
            }
        }
        let p = a[k * n + k];
        for j in 0..n {
            a[k * n + j] /= p;
            inv[k * n + j] /= p;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[i * n + k];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[i * n + j] -= f * a[k * n + j];
                inv[i * n + j] -= f * inv[k * n + j];
            }
        }
    }
    true
}

/// Splits `c` into a component in the span of `rows` (with coefficients
/// `mult`) and the orthogonal remainder `d`.
fn project_onto_null(c: &[f64], rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
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

/// Weighted atom of a partition: `weight * l^2` contributes to the form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    pub functional: Functional,
}

/// Weighted family of functionals decomposing a Hilbertian form into
/// squares: `sum_i c_i l_i l_i^T = A(h)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionOfUnity {
    atoms: Vec<Atom>,
    form: QuadForm,
}

impl PartitionOfUnity {
    pub fn new(atoms: Vec<Atom>, form: QuadForm) -> Result<Self> {
        Self::with_tolerance(atoms, form, PARTITION_TOL)
    }

    pub fn with_tolerance(atoms: Vec<Atom>, form: QuadForm, tol: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("partition must have at least one atom"));
        }
        for a in &atoms {
            if a.weight <= 0.0 || !a.weight.is_finite() {
                return Err(Error::invalid("atom weights must be strictly positive"));
            }
            if a.functional.dim() != form.dim() {
                return Err(Error::DimensionMismatch { expected: form.dim(), got: a.functional.dim() });
            }
        }
        let p = PartitionOfUnity { atoms, form };
        let residual = p.residual();
        let scale = p.form.matrix().frobenius().max(1.0);
        if residual > tol * scale {
            return Err(Error::InexactPartition { residual, tol: tol * scale });
        }
        Ok(p)
    }

    /// Coordinate partition of the identity form: unit weights on the
    /// coordinate functionals.
    pub fn coordinate(dim: usize) -> Self {
        let atoms = (0..dim)
            .map(|i| {
                let mut c = vec![0.0; dim];
                c[i] = 1.0;
                Atom { weight: 1.0, functional: Functional::new(c).unwrap() }
            })
            .collect();
        PartitionOfUnity { atoms, form: QuadForm::identity(dim) }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn form(&self) -> &QuadForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    /// Total mass `sum_i c_i`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Frobenius norm of `sum_i c_i l_i l_i^T - A(h)`; zero means the
    /// decomposition is exact.
    pub fn residual(&self) -> f64 {
        let n = self.dim();
        let mut acc = Matrix::zeros(n, n);
        for a in &self.atoms {
            acc.add_outer(a.weight, a.functional.coeffs());
        }
        acc.sub(self.form.matrix()).frobenius()
    }
}

/// On-disk schema for a polytopal norm.
#[derive(Debug, Serialize, Deserialize)]
pub struct NormFile {
    pub dim: usize,
    pub facets: Vec<Vec<f64>>,
}

impl NormFile {
    pub fn into_norm(self) -> Result<PolytopeNorm> {
        let facets = self
            .facets
            .iter()
            .map(|c| Functional::new(c.clone()))
            .collect::<Result<Vec<_>>>()?;
        PolytopeNorm::new(self.dim, facets)
    }

    pub fn from_norm(norm: &PolytopeNorm) -> Self {
        NormFile {
            dim: norm.dim(),
            facets: norm.facets().iter().map(|f| f.coeffs().to_vec()).collect(),
        }
    }
}

/// Loads a norm from JSON, rejecting non-spanning facet sets.
pub fn load_norm(path: impl AsRef<Path>) -> Result<PolytopeNorm> {
    let text = std::fs::read_to_string(path)?;
    let file: NormFile = serde_json::from_str(&text)?;
    file.into_norm()
}

pub fn save_norm(norm: &PolytopeNorm, path: impl AsRef<Path>) -> Result<()> {
    let file = NormFile::from_norm(norm);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1_square() -> PolytopeNorm {
        PolytopeNorm::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    #[test]
    fn norm_eval_examples() {
        let linf = PolytopeNorm::linf(2);
        assert_eq!(linf.eval(&[3.0, -4.0]).unwrap(), 4.0);
        assert_eq!(linf.eval(&[0.0, 0.0]).unwrap(), 0.0);
        let l1 = l1_square();
        assert!((l1.eval(&[0.3, 0.7]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_eval_dimension_mismatch() {
        let linf = PolytopeNorm::linf(2);
        assert!(linf.eval(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        let linf = PolytopeNorm::linf(2);
        let d = linf.dual_norm(&Functional::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert!((d.value - 2.0).abs() < 1e-9, "dual of (1,1) in linf is 2, got {}", d.value);

        // dual of l2 is l2: sample the Euclidean ball with many facets
        let m = 256;
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let ball = PolytopeNorm::from_rows(&rows).unwrap();
        let d = ball.dual_norm(&Functional::new(vec![3.0, 4.0]).unwrap()).unwrap();
        assert!((d.value - 5.0).abs() < 5e-3, "got {}", d.value);
    }

    #[test]
    fn dual_norm_of_facets_touches_ball() {
        let l1 = l1_square();
        for f in l1.facets() {
            let d = l1.dual_norm(f).unwrap();
            assert!(d.value >= 1.0 - 1e-9);
            assert!((d.value - 1.0).abs() < 1e-9, "exposed facet has dual norm 1");
        }
    }

    #[test]
    fn ascent_matches_vertex_enumeration() {
        // same polytope evaluated through both routes
        let rows = vec![
            vec![1.0, 0.2, -0.3],
            vec![-0.1, 1.0, 0.4],
            vec![0.3, -0.2, 1.0],
            vec![0.5, 0.5, 0.5],
            vec![-0.4, 0.8, 0.1],
        ];
        let norm = PolytopeNorm::from_rows(&rows).unwrap();
        for l in &[vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 0.2], vec![0.0, 0.0, 1.0]] {
            let f = Functional::new(l.clone()).unwrap();
            let by_vertices = norm.dual_norm_by_vertices(&f).unwrap();
            let by_ascent = norm.dual_norm_by_ascent(&f).unwrap();
            assert!(
                (by_vertices.value - by_ascent.value).abs() < 1e-9 * by_vertices.value.max(1.0),
                "{} vs {}",
                by_vertices.value,
                by_ascent.value
            );
            assert!((by_ascent.bracket.1 - by_ascent.bracket.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_functional_rejected_but_dual_of_zero_is_zero() {
        assert!(Functional::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn partition_residual_examples() {
        let coord = PartitionOfUnity::coordinate(3);
        assert!(coord.residual() < 1e-15);
        assert!((coord.total_mass() - 3.0).abs() < 1e-15);

        // single atom misses e2 e2^T
        let single = PartitionOfUnity {
            atoms: vec![Atom { weight: 1.0, functional: Functional::new(vec![1.0, 0.0]).unwrap() }],
            form: QuadForm::identity(2),
        };
        assert!((single.residual() - 1.0).abs() < 1e-15);

        // n+1 unit normals of the regular simplex with weights n/(n+1)
        for n in 2..=3usize {
            let normals = crate::besicovitch::regular_simplex_outward_normals(n);
            let atoms: Vec<Atom> = normals
                .iter()
                .map(|u| Atom { weight: n as f64 / (n as f64 + 1.0), functional: Functional::new(u.clone()).unwrap() })
                .collect();
            let p = PartitionOfUnity::with_tolerance(atoms, QuadForm::identity(n), 1e-12).unwrap();
            assert!(p.residual() < 1e-12);
        }
    }

    #[test]
    fn partition_residual_invariant_under_atom_split() {
        let coord = PartitionOfUnity::coordinate(2);
        let mut atoms = coord.atoms().to_vec();
        let first = atoms.remove(0);
        atoms.push(Atom { weight: first.weight / 2.0, functional: first.functional.clone() });
        atoms.push(Atom { weight: first.weight / 2.0, functional: first.functional });
        let split = PartitionOfUnity::new(atoms, QuadForm::identity(2)).unwrap();
        assert!((split.residual() - coord.residual()).abs() < 1e-15);
    }

    #[test]
    fn loader_rejects_non_spanning() {
        let file = NormFile { dim: 2, facets: vec![vec![1.0, 0.0], vec![2.0, 0.0]] };
        assert!(matches!(file.into_norm(), Err(Error::NonSpanning { .. })));
    }

    #[test]
    fn psd_validation() {
        let bad = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(QuadForm::new(bad), Err(Error::NotPositiveSemidefinite(_))));
        let asym = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(QuadForm::new(asym), Err(Error::NotSymmetric(_))));
    }
}
