use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// A point of CP^n, stored as a unit homogeneous representative with a
/// canonical phase (the largest-modulus coordinate is real and positive).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    homogeneous: Vec<Complex64>,
}

impl ProjPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self, GeometryError> {
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-14 {
            return Err(GeometryError::ZeroVector);
        }
        let mut homogeneous: Vec<Complex64> = coords.iter().map(|c| c / norm).collect();
        // canonical phase: rotate so the largest coordinate is real positive
        let c = homogeneous
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .unwrap();
        let phase = homogeneous[c].conj() / homogeneous[c].norm();
        for z in &mut homogeneous {
            *z *= phase;
        }
        Ok(ProjPoint { homogeneous })
    }

    /// Standard basis point e_i of CP^n.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n + 1];
        v[i] = Complex64::new(1.0, 0.0);
        ProjPoint { homogeneous: v }
    }

    /// Point with affine-chart coordinates z around [1:0:...:0].
    pub fn from_chart(z: &[Complex64]) -> Self {
        let mut v = Vec::with_capacity(z.len() + 1);
        v.push(Complex64::new(1.0, 0.0));
        v.extend_from_slice(z);
        ProjPoint::new(v).expect("chart coordinates are finite")
    }

    pub fn dim(&self) -> usize {
        self.homogeneous.len() - 1
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.homogeneous
    }

    /// Hermitian pairing sum_i x_i conj(y_i) of the unit representatives.
    pub fn inner(&self, other: &ProjPoint) -> Complex64 {
        self.homogeneous
            .iter()
            .zip(&other.homogeneous)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Index of the largest-modulus homogeneous coordinate.
    pub fn chart_index(&self) -> usize {
        self.homogeneous
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .unwrap()
    }

    /// Affine coordinates zeta_j = Z_j / Z_c (j != c) in the given chart.
    pub fn chart_coords(&self, chart: usize) -> Vec<Complex64> {
        let zc = self.homogeneous[chart];
        self.homogeneous
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != chart)
            .map(|(_, z)| z / zc)
            .collect()
    }

    /// Apply a unitary matrix (rows of `u`, length (n+1)^2, row-major).
    pub fn rotate(&self, u: &nalgebra::DMatrix<Complex64>) -> ProjPoint {
        let v = nalgebra::DVector::from_column_slice(&self.homogeneous);
        let w = u * v;
        ProjPoint::new(w.as_slice().to_vec()).expect("unitary image is nonzero")
    }

    pub fn projectively_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= tol
    }
}

/// Fubini-Study geodesic distance d(x,y) = arccos |<x,y>|, in [0, pi/2].
pub fn fs_distance(x: &ProjPoint, y: &ProjPoint) -> f64 {
    let c = x.inner(y).norm().clamp(0.0, 1.0);
    c.acos()
}

/// Serializable form: interleaved re/im of the homogeneous coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjPointData(pub Vec<f64>);

impl From<&ProjPoint> for ProjPointData {
    fn from(p: &ProjPoint) -> Self {
        ProjPointData(p.coords().iter().flat_map(|c| [c.re, c.im]).collect())
    }
}

impl TryFrom<&ProjPointData> for ProjPoint {
    type Error = GeometryError;
    fn try_from(d: &ProjPointData) -> Result<Self, GeometryError> {
        let coords = d
            .0
            .chunks(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        ProjPoint::new(coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn distance_identity_orthogonal_diagonal() {
        let e0 = ProjPoint::basis(1, 0);
        let e1 = ProjPoint::basis(1, 1);
        let mid = ProjPoint::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(fs_distance(&e0, &e0), 0.0);
        assert_abs_diff_eq!(fs_distance(&e0, &e1), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(fs_distance(&e0, &mid), FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn unit_scalar_gives_projective_equality() {
        let p = ProjPoint::new(vec![c(0.3, -0.4), c(1.2, 0.9)]).unwrap();
        let phase = Complex64::from_polar(1.0, 2.1317);
        let q = ProjPoint::new(p.coords().iter().map(|z| z * phase).collect()).unwrap();
        assert!(p.projectively_eq(&q, 1e-12));
        assert_abs_diff_eq!(fs_distance(&p, &q), 0.0, epsilon = 1e-7);
        // canonical phase makes the representatives identical too
        for (a, b) in p.coords().iter().zip(q.coords()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn constructor_normalizes() {
        let p = ProjPoint::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        let norm: f64 = p.coords().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        assert!(ProjPoint::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn chart_roundtrip() {
        let p = ProjPoint::new(vec![c(0.8, 0.1), c(-0.3, 0.5)]).unwrap();
        let z = p.chart_coords(0);
        let q = ProjPoint::from_chart(&z);
        assert!(p.projectively_eq(&q, 1e-12));
    }
}
