//! The model manifold CP^n (n = 1, 2): points, distances, weights with
//! closed-form curvature, and product quadrature rules.

mod point;
mod quad;
mod weight;

pub use point::{fs_distance, ProjPoint, ProjPointData};
pub use quad::{
    ball_rule, gauss_legendre_01, uniform_grid, unitary_pole_to, BallRegion, QuadNode,
    QuadratureRule,
};
pub use weight::{Weight, WeightSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("homogeneous vector is zero or non-finite")]
    ZeroVector,
    #[error("perturbation coefficients are not a Hermitian array")]
    NonHermitian,
    #[error("exponent {0} exceeds the denominator degree m = {1}")]
    ExponentTooLarge(usize, usize),
    #[error("weight has non-positive curvature (margin {0:.3e})")]
    NotPositive(f64),
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("quadrature rule has degree {have}, need {need}")]
    DegreeTooLow { have: usize, need: usize },
    #[error("ball radius {0} outside (0, pi/2]")]
    BadRadius(f64),
    #[error("malformed weight spec: {0}")]
    BadSpec(String),
}
