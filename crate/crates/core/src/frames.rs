//! Sampling/interpolation frame constants, array constructors (perturbed
//! Fekete and spiral families), Beurling-Landau density scans, localized
//! interpolation, and the simultaneity probe.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::bergman::SectionSpace;
use crate::cache;
use crate::fekete::{evaluation_matrix, lagrange_sections, SolveOptions};
use crate::geometry::{ball_rule, fs_distance, uniform_grid, BallRegion, ProjPoint, Weight};

#[derive(Debug, Error)]
pub enum FramesError {
    #[error("array is empty")]
    EmptyArray,
    #[error("missing level {0}")]
    MissingLevel(usize),
    #[error("level mismatch: nodes {nodes} + 2*kernel {kernel} != total {total}")]
    LevelMismatch {
        nodes: usize,
        kernel: usize,
        total: usize,
    },
    #[error(transparent)]
    Bergman(#[from] crate::bergman::BergmanError),
    #[error(transparent)]
    Fekete(#[from] crate::fekete::FeketeError),
}

#[derive(Debug, Clone, Serialize)]
pub enum Provenance {
    Fekete,
    PerturbedFekete { eps: f64, sign: i8 },
    Spiral { density: f64 },
    Custom(String),
}

/// A family of point sets indexed by level k.
#[derive(Debug, Clone)]
pub struct ArrayFamily {
    pub levels: BTreeMap<usize, Vec<ProjPoint>>,
    pub provenance: Provenance,
    /// min over levels of (min pairwise distance) * sqrt(k)
    pub separation: f64,
}

impl ArrayFamily {
    pub fn new(levels: BTreeMap<usize, Vec<ProjPoint>>, provenance: Provenance) -> Self {
        let mut sep = f64::INFINITY;
        for (&k, pts) in &levels {
            sep = sep.min(scaled_separation(pts, k));
        }
        ArrayFamily {
            levels,
            provenance,
            separation: sep,
        }
    }
}

pub fn scaled_separation(pts: &[ProjPoint], k: usize) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d = d.min(fs_distance(&pts[i], &pts[j]));
        }
    }
    d * (k.max(1) as f64).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelConstants {
    pub k: usize,
    pub count: usize,
    /// lower L2 sampling constant
    pub a: f64,
    /// upper L2 sampling constant (INFINITY if rank-deficient)
    pub b: f64,
    /// L2 interpolation constant (INFINITY if overdetermined/singular)
    pub c: f64,
}

/// A_k = k^n / lambda_max(E*E), B_k = k^n / lambda_min(E*E).
pub fn l2_constants(s: &SectionSpace, pts: &[ProjPoint]) -> Result<(f64, f64), FramesError> {
    if pts.is_empty() {
        return Err(FramesError::EmptyArray);
    }
    let e = evaluation_matrix(s, pts);
    let gram = e.adjoint() * &e;
    let eigs = gram.symmetric_eigen().eigenvalues;
    let lmax = eigs.iter().cloned().fold(0.0f64, f64::max);
    let lmin = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let kn = (s.degree().max(1) as f64).powi(s.manifold_dim() as i32);
    let a = kn / lmax;
    let b = if lmin > 1e-12 * lmax.max(1.0) {
        kn / lmin
    } else {
        f64::INFINITY
    };
    Ok((a, b))
}

/// C_k = k^n / lambda_min(E E*): the least-norm interpolant is the exact
/// minimizer, so this is the sharp finite-level interpolation constant.
pub fn l2_interp_constant(s: &SectionSpace, pts: &[ProjPoint]) -> Result<f64, FramesError> {
    if pts.is_empty() {
        return Err(FramesError::EmptyArray);
    }
    let e = evaluation_matrix(s, pts);
    let gram = &e * e.adjoint();
    let eigs = gram.symmetric_eigen().eigenvalues;
    let lmax = eigs.iter().cloned().fold(0.0f64, f64::max);
    let lmin = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let kn = (s.degree().max(1) as f64).powi(s.manifold_dim() as i32);
    if lmin > 1e-12 * lmax.max(1.0) {
        Ok(kn / lmin)
    } else {
        Ok(f64::INFINITY)
    }
}

pub fn level_constants(s: &SectionSpace, pts: &[ProjPoint]) -> Result<LevelConstants, FramesError> {
    let (a, b) = l2_constants(s, pts)?;
    let c = l2_interp_constant(s, pts)?;
    Ok(LevelConstants {
        k: s.degree(),
        count: pts.len(),
        a,
        b,
        c,
    })
}

/// Estimated sup-norm sampling constant sup_X |s| / sup_Lambda |s|,
/// maximized over a seeded random-section ensemble (an estimator, not a
/// certified constant).
pub fn linf_constant(
    s: &SectionSpace,
    pts: &[ProjPoint],
    grid: &[ProjPoint],
    seed: u64,
    ensemble: usize,
) -> Result<f64, FramesError> {
    if pts.is_empty() {
        return Err(FramesError::EmptyArray);
    }
    let nn = s.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = DMatrix::from_fn(nn, ensemble, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let gvals = stacked_eval(s, grid) * &coeffs;
    let pvals = stacked_eval(s, pts) * &coeffs;
    let mut worst: f64 = 0.0;
    for j in 0..ensemble {
        let sup_grid = gvals.column(j).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let sup_pts = pvals.column(j).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup_pts > 0.0 {
            worst = worst.max(sup_grid / sup_pts);
        } else {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

/// L1 interpolation constant by duality: sup_x k^{-n} sum_lambda
/// |Pi_k(x, lambda)|, exact on the supplied grid (the optimal phases are
/// attainable, so the grid sup is the true dual value there).
pub fn l1_dual_constant(s: &SectionSpace, pts: &[ProjPoint], grid: &[ProjPoint]) -> f64 {
    let pvals = stacked_eval(s, pts);
    let kn = (s.degree().max(1) as f64).powi(s.manifold_dim() as i32);
    let mut sup: f64 = 0.0;
    for x in grid {
        let v = s.eval_onb(x);
        let total: f64 = (0..pts.len())
            .map(|l| pvals.row(l).transpose().dotc(&v).norm())
            .sum();
        sup = sup.max(total / kn);
    }
    sup
}

fn stacked_eval(s: &SectionSpace, pts: &[ProjPoint]) -> DMatrix<Complex64> {
    let nn = s.dimension();
    let mut m = DMatrix::zeros(pts.len(), nn);
    for (i, x) in pts.iter().enumerate() {
        let v = s.eval_onb(x);
        for j in 0..nn {
            m[(i, j)] = v[j];
        }
    }
    m
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    /// rows (R, nu_minus(R), nu_plus(R))
    pub nu: Vec<(f64, f64, f64)>,
    /// median of nu_minus over the top third of the R grid
    pub d_minus: f64,
    pub d_plus: f64,
    /// fitted M(R): the smallest constant making ratio > critical - M/(r
    /// sqrt(k)) hold on every scanned instance with scaled radius >= R,
    /// i.e. the sup of (critical - ratio) * r sqrt(k) over the class
    pub fitted_m: Vec<(f64, f64)>,
}

/// Beurling-Landau scan: for each R, inf/sup over levels k, centers x and
/// radii r >= R/sqrt(k) of k^{-n} #(Lambda_k cap B(x,r)) / m_phi(B(x,r)).
pub fn density_report(
    w: &Weight,
    family: &ArrayFamily,
    big_r: &[f64],
    centers: usize,
) -> DensityReport {
    let n = w.dimension();
    let crit = std::f64::consts::PI.powi(-(n as i32));
    let xs = uniform_grid(n, centers);
    let diam = std::f64::consts::FRAC_PI_2;
    let mut lows = vec![f64::INFINITY; big_r.len()];
    let mut highs = vec![0.0f64; big_r.len()];
    let mut worst_m = vec![0.0f64; big_r.len()];
    for (&k, pts) in &family.levels {
        let kf = k.max(1) as f64;
        let kn = kf.powi(n as i32);
        for x in &xs {
            // the count is piecewise constant in r, so the exact inf/sup
            // over r >= r0 is attained at the entry radii of the points
            let mut dists: Vec<f64> = pts.iter().map(|p| fs_distance(p, x)).collect();
            dists.sort_by(|a, b| a.total_cmp(b));
            let mass_at = |r: f64| {
                let ball = BallRegion::new(x.clone(), r.min(diam)).unwrap();
                ball_mass(w, &ball)
            };
            let masses: Vec<f64> = dists.iter().map(|&d| mass_at(d)).collect();
            for (ri, &r_big) in big_r.iter().enumerate() {
                let r0 = (r_big / kf.sqrt()).min(diam);
                let mass0 = mass_at(r0);
                let count0 = dists.iter().filter(|&&d| d <= r0).count();
                let mut scan = |ratio: f64, r: f64| {
                    lows[ri] = lows[ri].min(ratio);
                    highs[ri] = highs[ri].max(ratio);
                    worst_m[ri] = worst_m[ri].max((crit - ratio) * r * kf.sqrt());
                };
                if mass0 > 0.0 {
                    scan(count0 as f64 / (kn * mass0), r0);
                }
                for (i, &d) in dists.iter().enumerate() {
                    if d <= r0 || masses[i] <= 0.0 {
                        continue;
                    }
                    // just inside the entry radius: i points strictly closer
                    if i == 0 || dists[i - 1] < d {
                        scan(i as f64 / (kn * masses[i]), d);
                    }
                    // just past it: all tied points included
                    if i + 1 == dists.len() || dists[i + 1] > d {
                        scan((i + 1) as f64 / (kn * masses[i]), d);
                    }
                }
            }
        }
    }
    let mut nu = Vec::new();
    let mut deficits = Vec::new();
    for (ri, &r_big) in big_r.iter().enumerate() {
        nu.push((r_big, lows[ri], highs[ri]));
        deficits.push(worst_m[ri]);
    }
    let top = nu.len().div_ceil(3);
    let d_minus = median(nu.iter().rev().take(top).map(|t| t.1));
    let d_plus = median(nu.iter().rev().take(top).map(|t| t.2));
    let fitted_m = nu
        .iter()
        .zip(&deficits)
        .map(|(&(r_big, _, _), &m)| (r_big, m))
        .collect();
    DensityReport {
        nu,
        d_minus,
        d_plus,
        fitted_m,
    }
}

fn median(vals: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = vals.collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Monge-Ampere mass of a geodesic ball.
pub fn ball_mass(w: &Weight, ball: &BallRegion) -> f64 {
    let degree = if w.is_fubini_study() { 8 } else { 16 };
    ball_rule(w.dimension(), degree, ball).integrate_real(|x| w.ma_density_dv(x))
}

/// Fekete configurations at levels round((1 +/- eps) k) reported as level-k
/// arrays; eps = 0 degenerates to the Fekete family itself.
pub fn make_perturbed_fekete(
    w: &Weight,
    eps: f64,
    sign: i8,
    ks: &[usize],
    opts: &SolveOptions,
) -> Result<ArrayFamily, FramesError> {
    let mut levels = BTreeMap::new();
    for &k in ks {
        let factor = 1.0 + f64::from(sign.signum()) * eps;
        let kp = (factor * k as f64).round_ties_even().max(0.0) as usize;
        let cfg = cache::fekete_config(w, kp, opts)?;
        levels.insert(k, cfg.points.clone());
    }
    let provenance = if eps == 0.0 {
        Provenance::Fekete
    } else {
        Provenance::PerturbedFekete { eps, sign }
    };
    Ok(ArrayFamily::new(levels, provenance))
}

pub fn make_fekete_family(
    w: &Weight,
    ks: &[usize],
    opts: &SolveOptions,
) -> Result<ArrayFamily, FramesError> {
    make_perturbed_fekete(w, 0.0, 1, ks, opts)
}

/// Golden-angle spiral with ceil(density * (k+1)) points, radially placed by
/// inverting the s-marginal of the Monge-Ampere measure so the counting
/// density is uniform with respect to m_phi. Dimension 1 only.
pub fn make_spiral(w: &Weight, density: f64, ks: &[usize]) -> ArrayFamily {
    assert_eq!(w.dimension(), 1, "spiral arrays are one-dimensional");
    let cdf = s_marginal_cdf(w);
    let mut levels = BTreeMap::new();
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for &k in ks {
        let m = (density * (k + 1) as f64).ceil() as usize;
        let mut pts = Vec::with_capacity(m);
        for i in 0..m {
            let q = (i as f64 + 0.5) / m as f64;
            let s = invert_cdf(&cdf, q);
            let theta = 2.0 * std::f64::consts::PI * ((i as f64 * phi) % 1.0);
            let r = (s / (1.0 - s)).sqrt();
            pts.push(ProjPoint::from_chart(&[Complex64::from_polar(r, theta)]));
        }
        levels.insert(k, pts);
    }
    ArrayFamily::new(levels, Provenance::Spiral { density })
}

/// Cumulative s-marginal of m_phi on [0,1], tabulated.
fn s_marginal_cdf(w: &Weight) -> Vec<(f64, f64)> {
    let grid = 512usize;
    let angles = 64usize;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut cdf = Vec::with_capacity(grid + 1);
    cdf.push((0.0, 0.0));
    let mut acc = 0.0;
    for i in 0..grid {
        let s = (i as f64 + 0.5) / grid as f64;
        let r = (s / (1.0 - s)).sqrt();
        let mut g = 0.0;
        for j in 0..angles {
            let th = two_pi * j as f64 / angles as f64;
            let x = ProjPoint::from_chart(&[Complex64::from_polar(r, th)]);
            g += w.ma_density_dv(&x);
        }
        acc += g * two_pi / angles as f64 / grid as f64;
        cdf.push(((i as f64 + 1.0) / grid as f64, acc));
    }
    let total = acc;
    for p in &mut cdf {
        p.1 /= total;
    }
    cdf
}

fn invert_cdf(cdf: &[(f64, f64)], q: f64) -> f64 {
    let pos = cdf.partition_point(|p| p.1 < q);
    if pos == 0 {
        return cdf[0].0;
    }
    if pos >= cdf.len() {
        return cdf[cdf.len() - 1].0;
    }
    let (s0, c0) = cdf[pos - 1];
    let (s1, c1) = cdf[pos];
    if c1 > c0 {
        s0 + (s1 - s0) * (q - c0) / (c1 - c0)
    } else {
        s0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolantReport {
    pub node_level: usize,
    pub kernel_level: usize,
    pub total_level: usize,
    pub max_node_error: f64,
    /// ||Q||^2 k^n / sum |v|^2
    pub ratio: f64,
}

/// Localized interpolant Q = sum_j v_j l_j (Pi_k2(., x_j)/Pi_k2(x_j,x_j))^2
/// at total level k = node_level + 2*kernel_level; exact at the nodes.
pub fn localized_interpolant(
    s_total: &SectionSpace,
    s_nodes: &SectionSpace,
    s_kernel: &SectionSpace,
    points: &[ProjPoint],
    values: &[Complex64],
) -> Result<InterpolantReport, FramesError> {
    let (m, k2, k) = (s_nodes.degree(), s_kernel.degree(), s_total.degree());
    if m + 2 * k2 != k {
        return Err(FramesError::LevelMismatch {
            nodes: m,
            kernel: k2,
            total: k,
        });
    }
    if points.len() != s_nodes.dimension() || values.len() != points.len() {
        return Err(FramesError::MissingLevel(m));
    }
    let lagr = lagrange_sections(s_nodes, points)?;
    let diag: Vec<f64> = points.iter().map(|x| s_kernel.bergman_function(x)).collect();
    let n = s_total.manifold_dim();
    let kn = (k.max(1) as f64).powi(n as i32);

    let eval_q = |x: &ProjPoint| -> Complex64 {
        let lv = lagr.eval_all(s_nodes, x);
        let mut q = Complex64::new(0.0, 0.0);
        for (j, lam) in points.iter().enumerate() {
            let bump = s_kernel.kernel(x, lam) / diag[j];
            q += values[j] * lv[j] * bump * bump;
        }
        q
    };

    let mut max_err: f64 = 0.0;
    for (i, x) in points.iter().enumerate() {
        max_err = max_err.max((eval_q(x) - values[i]).norm());
    }
    let norm2 = s_total.rule().integrate_real(|x| eval_q(x).norm_sqr());
    let mass: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    Ok(InterpolantReport {
        node_level: m,
        kernel_level: k2,
        total_level: k,
        max_node_error: max_err,
        ratio: norm2 * kn / mass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub k: usize,
    pub b_over_a: f64,
    pub c: f64,
    pub m: f64,
}

/// Simultaneity probe on the exact Fekete family: m_k = max(B_k/A_k,
/// C_k/A_k); a bounded m_k would mean simultaneous sampling and
/// interpolation quality, so the sweep should be increasing.
pub fn simultaneity_probe(
    w: &Weight,
    ks: &[usize],
    opts: &SolveOptions,
) -> Result<Vec<ProbePoint>, FramesError> {
    let mut out = Vec::new();
    for &k in ks {
        let s = cache::section_space(w, k)?;
        let cfg = cache::fekete_config(w, k, opts)?;
        let (a, b) = l2_constants(&s, &cfg.points)?;
        let c = l2_interp_constant(&s, &cfg.points)?;
        let m = (b / a).max(c / a);
        out.push(ProbePoint {
            k,
            b_over_a: b / a,
            c,
            m,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use std::f64::consts::PI;

    fn fs_space(k: usize) -> std::sync::Arc<SectionSpace> {
        cache::section_space(&Weight::fubini_study(1), k).unwrap()
    }

    #[test]
    fn too_few_points_not_sampling() {
        let s = fs_space(4);
        let pts = uniform_grid(1, 3); // N = 5 needs at least 5 points
        let (_, b) = l2_constants(&s, &pts).unwrap();
        assert!(b.is_infinite());
    }

    #[test]
    fn too_many_points_not_interpolating() {
        let s = fs_space(4);
        let pts = uniform_grid(1, 9);
        let c = l2_interp_constant(&s, &pts).unwrap();
        assert!(c.is_infinite());
    }

    #[test]
    fn exact_fekete_both_finite() {
        let w = Weight::fubini_study(1);
        let s = fs_space(6);
        let cfg = cache::fekete_config(&w, 6, &SolveOptions::default()).unwrap();
        let lc = level_constants(&s, &cfg.points).unwrap();
        assert!(lc.a.is_finite() && lc.b.is_finite() && lc.c.is_finite());
        assert!(lc.a <= lc.b);
    }

    #[test]
    fn linf_of_grid_itself_is_one() {
        let s = fs_space(3);
        let grid = uniform_grid(1, 200);
        let a = linf_constant(&s, &grid, &grid, 1, 32).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn linf_single_point_large() {
        let s = fs_space(4);
        let pts = vec![ProjPoint::basis(1, 0)];
        let grid = uniform_grid(1, 400);
        let a = linf_constant(&s, &pts, &grid, 2, 64).unwrap();
        assert!(a > 10.0, "a = {a}");
    }

    #[test]
    fn l1_dual_bounded_for_fekete() {
        let w = Weight::fubini_study(1);
        let grid = uniform_grid(1, 600);
        let mut vals = Vec::new();
        for k in [8usize, 16] {
            let s = fs_space(k);
            let cfg = cache::fekete_config(&w, k, &SolveOptions::default()).unwrap();
            vals.push(l1_dual_constant(&s, &cfg.points, &grid));
        }
        let hi = vals.iter().cloned().fold(0.0f64, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 2.0, "l1 dual spread {lo}..{hi}");
    }

    #[test]
    fn ball_mass_fs_closed_form() {
        let w = Weight::fubini_study(1);
        let ball = BallRegion::new(uniform_grid(1, 3)[1].clone(), 0.7).unwrap();
        // m_phi(B) = pi sin^2(r) for the unperturbed weight
        assert_abs_diff_eq!(ball_mass(&w, &ball), PI * 0.7f64.sin().powi(2), epsilon = 1e-10);
    }

    #[test]
    fn spiral_counts_and_separation() {
        let w = Weight::fubini_study(1);
        let fam = make_spiral(&w, 1.25, &[16, 32]);
        assert_eq!(fam.levels[&16].len(), (1.25f64 * 17.0).ceil() as usize);
        assert_eq!(fam.levels[&32].len(), (1.25f64 * 33.0).ceil() as usize);
        assert!(fam.separation > 0.2, "separation {}", fam.separation);
    }

    #[test]
    fn spiral_density_matches_factor() {
        let w = Weight::fubini_study(1);
        let fam = make_spiral(&w, 1.25, &[32, 64]);
        let rep = density_report(&w, &fam, &[4.0, 8.0], 40);
        let target = 1.25 / PI;
        assert!(
            (rep.d_minus - target).abs() / target < 0.12,
            "d_minus {} vs {target}",
            rep.d_minus
        );
    }

    #[test]
    fn eps_zero_is_fekete() {
        let w = Weight::fubini_study(1);
        let opts = SolveOptions::default();
        let fam = make_perturbed_fekete(&w, 0.0, 1, &[4], &opts).unwrap();
        let cfg = cache::fekete_config(&w, 4, &opts).unwrap();
        assert_eq!(fam.levels[&4].len(), cfg.points.len());
        for (a, b) in fam.levels[&4].iter().zip(&cfg.points) {
            assert!(a.projectively_eq(b, 1e-12));
        }
        assert!(matches!(fam.provenance, Provenance::Fekete));
    }

    #[test]
    fn localized_interpolant_delta_data() {
        let w = Weight::fubini_study(1);
        let opts = SolveOptions::default();
        let k = 8usize;
        let k2 = 2usize;
        let m = k - 2 * k2;
        let s_total = fs_space(k);
        let s_nodes = fs_space(m);
        let s_kernel = fs_space(k2);
        let cfg = cache::fekete_config(&w, m, &opts).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); cfg.points.len()];
        v[1] = Complex64::new(1.0, 0.0);
        let rep =
            localized_interpolant(&s_total, &s_nodes, &s_kernel, &cfg.points, &v).unwrap();
        assert!(rep.max_node_error <= 1e-8, "err {}", rep.max_node_error);
        // least-norm minimality: the explicit interpolant can't beat C_k
        let e = evaluation_matrix(&s_total, &cfg.points);
        let gram = &e * e.adjoint();
        let least = {
            // least-norm interpolant norm^2 = v^H (E E^*)^{-1} v
            let vv = DVector::from_vec(v.clone());
            let sol = gram.clone().lu().solve(&vv).unwrap();
            (vv.dotc(&sol)).re * k as f64
        };
        assert!(rep.ratio >= least - 1e-9, "ratio {} < least {}", rep.ratio, least);
    }

    #[test]
    fn level_mismatch_rejected() {
        let s_total = fs_space(9);
        let s_nodes = fs_space(4);
        let s_kernel = fs_space(2);
        let pts = uniform_grid(1, 5);
        let v = vec![Complex64::new(1.0, 0.0); 5];
        let err = localized_interpolant(&s_total, &s_nodes, &s_kernel, &pts, &v);
        assert!(matches!(err, Err(FramesError::LevelMismatch { .. })));
    }

    #[test]
    fn adding_points_improves_sampling() {
        let w = Weight::fubini_study(1);
        let s = fs_space(5);
        let cfg = cache::fekete_config(&w, 5, &SolveOptions::default()).unwrap();
        let (_, b0) = l2_constants(&s, &cfg.points).unwrap();
        let mut more = cfg.points.clone();
        more.extend(uniform_grid(1, 6));
        let (_, b1) = l2_constants(&s, &more).unwrap();
        assert!(b1 <= b0 + 1e-9, "b grew: {b0} -> {b1}");
        // and destroys exact interpolation
        let c = l2_interp_constant(&s, &more).unwrap();
        assert!(c.is_infinite());
    }
}
