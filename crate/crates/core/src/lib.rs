//! Desk-scale numerical checks for volume inequalities in finite-dimensional
//! Banach spaces and grid-discretized Riemannian metrics.
//!
//! The library is organized around a few pipelines:
//!
//! * [`banach`] holds the linear substrate: polytopal norms, quadratic forms,
//!   functionals and weighted decompositions of a form into squares.
//! * [`dilation`] evaluates Hilbert-Schmidt norms, L_q-dilations and the
//!   Hadamard-type determinant bounds for linear maps.
//! * [`john`] computes the maximal inscribed (John) ellipsoid of a polytopal
//!   unit ball together with its contact-functional decomposition, and the
//!   Hilbertian volume of the ball.
//! * [`metric`] provides finite metric spaces and conformal grid metrics with
//!   wide-stencil shortest paths, Lipschitz extension, Busemann values,
//!   separated nets, net-based straightening and centers of mass.
//! * [`periodic`] estimates stable norms of periodic metrics with certified
//!   subadditivity brackets, ball growth curves and the asymptotic volume
//!   growth report.
//! * [`besicovitch`] runs the cube and simplex volume checks with
//!   distance-built straightening certificates, and the filling bound for
//!   norm balls.
//! * [`acute`] analyzes small H-polytopes: vertex enumeration, dihedral
//!   angles and the factorization of acute polytopes into simplex products.
//!
//! All operations are pure functions of their inputs; randomized routines
//! take explicit seeds and are deterministic for a fixed seed.

pub mod acute;
pub mod banach;
pub mod besicovitch;
pub mod dilation;
mod error;
pub mod fixtures;
pub mod john;
pub mod linalg;
pub mod metric;
pub mod parallel;
pub mod periodic;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-15);
    }
}
