//! Concentration operators on geodesic balls: spectrum, trace and
//! Hilbert-Schmidt identities, eigenvalue counting, and the comparison of
//! eigenvalue counts with point counts of sampling/interpolation arrays.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bergman::SectionSpace;
use crate::geometry::{ball_rule, fs_distance, BallRegion, GeometryError, ProjPoint};

/// The compression T = P 1_B P of the identity to a geodesic ball, as an
/// N x N Hermitian matrix in the orthonormal basis.
#[derive(Debug, Clone)]
pub struct ConcentrationOperator {
    pub matrix: DMatrix<Complex64>,
    pub region: BallRegion,
    pub k: usize,
    pub manifold_dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub k: usize,
    pub radius: f64,
    /// sorted descending
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub hs2: f64,
    /// (gamma, strict count above gamma)
    pub counts: Vec<(f64, usize)>,
}

/// Default gamma thresholds for eigenvalue counting.
pub const DEFAULT_GAMMAS: [f64; 3] = [0.1, 0.5, 0.9];

/// Assemble T_{ij} = int_B e_i conj(e_j) dV by ball quadrature, then average
/// with the adjoint to absorb quadrature asymmetry.
pub fn build_concentration(
    s: &SectionSpace,
    region: &BallRegion,
) -> Result<ConcentrationOperator, GeometryError> {
    let n = s.manifold_dim();
    let nn = s.dimension();
    let rule = ball_rule(n, s.rule().degree, region);
    let mut t = DMatrix::<Complex64>::zeros(nn, nn);
    for node in &rule.nodes {
        let v = s.eval_onb(&node.point);
        for i in 0..nn {
            let wi = v[i] * node.weight;
            for j in 0..nn {
                t[(i, j)] += wi * v[j].conj();
            }
        }
    }
    let adj = t.adjoint();
    let herm = (t + adj) * Complex64::new(0.5, 0.0);
    Ok(ConcentrationOperator {
        matrix: herm,
        region: region.clone(),
        k: s.degree(),
        manifold_dim: n,
    })
}

/// Eigen-decomposition summary; counts use strict inequality.
pub fn spectral_report(op: &ConcentrationOperator, gammas: &[f64]) -> SpectralReport {
    let mut eigs: Vec<f64> = op
        .matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let trace = eigs.iter().sum();
    let hs2 = eigs.iter().map(|l| l * l).sum();
    let counts = gammas
        .iter()
        .map(|&g| (g, eigs.iter().filter(|&&l| l > g).count()))
        .collect();
    SpectralReport {
        k: op.k,
        radius: op.region.radius,
        eigenvalues: eigs,
        trace,
        hs2,
        counts,
    }
}

/// Off-diagonal kernel mass over B x B^c, computed by quadrature from the
/// reproducing identity: int_B Pi(x,x) dV - iint_{B x B} |Pi|^2. Uses its
/// own rules (degree bumped) so it is an independent check against
/// trace - HS^2 of the assembled operator.
pub fn offdiag_mass(s: &SectionSpace, region: &BallRegion) -> f64 {
    let n = s.manifold_dim();
    let rule = ball_rule(n, s.rule().degree + 7, region);
    let mut acc = 0.0;
    for node in &rule.nodes {
        let inner = rule.integrate_real(|y| s.kernel(&node.point, y).norm_sqr());
        acc += node.weight * (s.bergman_function(&node.point) - inner);
    }
    acc
}

/// Eigenvalue-count sandwich: for any 0 < gamma < 1,
/// trace - offdiag/(1-gamma) <= n(B,gamma) <= trace + offdiag/gamma.
pub fn count_bounds(trace: f64, offdiag: f64, gamma: f64) -> (f64, f64) {
    (
        trace - offdiag / (1.0 - gamma),
        trace + offdiag / gamma,
    )
}

/// Empirical submean constant: the largest observed ratio
/// |s(x)|^2 / (k^n int_{B(x, rho)} |s|^2) over a seeded random-section
/// ensemble and a point sample, with a safety factor. rho = (delta/2)/sqrt(k)
/// where delta is the scaled separation of the array under study.
pub fn submean_constant(s: &SectionSpace, delta_scaled: f64, seed: u64) -> f64 {
    let n = s.manifold_dim();
    let k = s.degree().max(1);
    let rho = (0.5 * delta_scaled / (k as f64).sqrt()).min(std::f64::consts::FRAC_PI_2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nn = s.dimension();
    let probes = crate::geometry::uniform_grid(n, 20);
    let mut worst: f64 = 0.0;
    for x in &probes {
        let ball = BallRegion::new(x.clone(), rho).unwrap();
        let rule = ball_rule(n, s.rule().degree, &ball);
        for _ in 0..16 {
            let c: Vec<Complex64> = (0..nn)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let c = nalgebra::DVector::from_vec(c);
            let at_x = s.eval_onb(x).dot(&c).norm_sqr();
            let mass = rule.integrate_real(|y| s.eval_onb(y).dot(&c).norm_sqr());
            if mass > 0.0 {
                worst = worst.max(at_x / ((k as f64).powi(n as i32) * mass));
            }
        }
    }
    1.5 * worst
}

#[derive(Debug, Clone, Serialize)]
pub struct CountComparison {
    pub scaled_radius: f64,
    pub gamma: f64,
    pub array_count: usize,
    pub eigen_count: usize,
    pub holds: bool,
}

/// Sampling-side count inequality: #(Lambda cap B(z,(r+delta)/sqrt(k)))
/// >= n(B(z, r/sqrt(k)), gamma) with gamma = 1 - 1/(K B).
pub fn sampling_count_check(
    s: &SectionSpace,
    points: &[ProjPoint],
    center: &ProjPoint,
    r_scaled: f64,
    delta_scaled: f64,
    b_constant: f64,
    submean: f64,
) -> CountComparison {
    let k = s.degree().max(1) as f64;
    let gamma = (1.0 - 1.0 / (submean * b_constant)).clamp(1e-6, 1.0 - 1e-9);
    let outer = ((r_scaled + delta_scaled) / k.sqrt()).min(std::f64::consts::FRAC_PI_2);
    let inner = (r_scaled / k.sqrt()).min(std::f64::consts::FRAC_PI_2);
    let array_count = points
        .iter()
        .filter(|p| fs_distance(p, center) <= outer)
        .count();
    let region = BallRegion::new(center.clone(), inner).unwrap();
    let op = build_concentration(s, &region).unwrap();
    let rep = spectral_report(&op, &[gamma]);
    let eigen_count = rep.counts[0].1;
    CountComparison {
        scaled_radius: r_scaled,
        gamma,
        array_count,
        eigen_count,
        holds: array_count >= eigen_count,
    }
}

/// Interpolation-side count inequality: #(Lambda cap B(z,(r-delta)/sqrt(k)))
/// <= n(B(z, r/sqrt(k)), gamma) with gamma = 1/(K C).
pub fn interpolation_count_check(
    s: &SectionSpace,
    points: &[ProjPoint],
    center: &ProjPoint,
    r_scaled: f64,
    delta_scaled: f64,
    c_constant: f64,
    submean: f64,
) -> CountComparison {
    let k = s.degree().max(1) as f64;
    let gamma = (1.0 / (submean * c_constant)).clamp(1e-9, 1.0 - 1e-6);
    let inner_r = ((r_scaled - delta_scaled).max(0.0)) / k.sqrt();
    let ball_r = (r_scaled / k.sqrt()).min(std::f64::consts::FRAC_PI_2);
    let array_count = points
        .iter()
        .filter(|p| fs_distance(p, center) <= inner_r)
        .count();
    let region = BallRegion::new(center.clone(), ball_r).unwrap();
    let op = build_concentration(s, &region).unwrap();
    let rep = spectral_report(&op, &[gamma]);
    let eigen_count = rep.counts[0].1;
    CountComparison {
        scaled_radius: r_scaled,
        gamma,
        array_count,
        eigen_count,
        holds: array_count <= eigen_count,
    }
}
