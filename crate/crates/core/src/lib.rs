//! Numerical laboratory for Fekete configurations, Bergman kernels,
//! concentration operators, sampling/interpolation frames and optimal
//! transport on complex projective space with perturbed Fubini-Study weights.

pub mod bergman;
pub mod cache;
pub mod fekete;
pub mod frames;
pub mod geometry;
pub mod landau;
pub mod report;
pub mod transport;
