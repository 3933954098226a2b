//! Fekete configurations: weighted log-determinant objective, multistart
//! solver (rejection-sampled starts, grid exchange, Riemannian gradient
//! polish), Lagrange sections, dual sections, and optimality certificates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bergman::SectionSpace;
use crate::geometry::{fs_distance, uniform_grid, ProjPoint};

#[derive(Debug, Error)]
pub enum FeketeError {
    #[error("configuration is singular (coincident or degenerate points)")]
    SingularConfiguration,
    #[error("evaluation matrix is singular")]
    SingularEvaluation,
    #[error("no restart made progress; check tolerances")]
    NoProgress,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub restarts: usize,
    pub seed: u64,
    /// certificate slack tau: accept when every Lagrange section has grid
    /// sup-norm <= 1 + tau
    pub tol: f64,
    /// certificate/exchange grid size (default max(40k, 800) for n=1,
    /// max(40k, 2000) for n=2)
    pub grid_size: Option<usize>,
    pub max_rounds: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            restarts: 0, // 0 = use 8 + 2n
            seed: 1,
            tol: 1e-3,
            grid_size: None,
            max_rounds: 40,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Certificate {
    pub grid_size: usize,
    /// max over j of the grid sup of |l_j|
    pub max_lagrange_sup: f64,
    /// min pairwise distance times sqrt(k)
    pub separation_scaled: f64,
    /// covering radius times sqrt(k)
    pub covering_scaled: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SolveMeta {
    pub seed: u64,
    pub restarts: usize,
    pub exchanges: usize,
    pub gradient_steps: usize,
}

#[derive(Debug, Clone)]
pub struct FeketeConfig {
    pub k: usize,
    pub points: Vec<ProjPoint>,
    pub objective: f64,
    pub certificate: Certificate,
    pub meta: SolveMeta,
}

/// Lagrange sections l_j in ONB coordinates: l_j = sum_m coeffs[(m, j)] e_m,
/// with l_j(x_i) = delta_ij exactly (coeffs = E^{-1}).
#[derive(Debug, Clone)]
pub struct LagrangeSystem {
    pub coeffs: DMatrix<Complex64>,
}

impl LagrangeSystem {
    /// Values (l_1(x), ..., l_N(x)) in the unitarized frame.
    pub fn eval_all(&self, s: &SectionSpace, x: &ProjPoint) -> DVector<Complex64> {
        self.coeffs.tr_mul(&s.eval_onb(x))
    }
}

/// Dual sections Phi_lambda = sum_j conj(e_j(lambda)) e_j, one per
/// configuration point; |Phi_lambda(x)| = |Pi_k(x, lambda)| by construction.
#[derive(Debug, Clone)]
pub struct DualSystem {
    /// column lambda holds the ONB coefficients of Phi_lambda
    pub coeffs: DMatrix<Complex64>,
}

impl DualSystem {
    pub fn eval_all(&self, s: &SectionSpace, x: &ProjPoint) -> DVector<Complex64> {
        self.coeffs.tr_mul(&s.eval_onb(x))
    }
}

/// Evaluation matrix E_{ij} = e_j(x_i) in unitarized frames.
pub fn evaluation_matrix(s: &SectionSpace, points: &[ProjPoint]) -> DMatrix<Complex64> {
    let nn = s.dimension();
    let mut e = DMatrix::zeros(points.len(), nn);
    for (i, x) in points.iter().enumerate() {
        let v = s.eval_onb(x);
        for j in 0..nn {
            e[(i, j)] = v[j];
        }
    }
    e
}

/// log |det E|^2 for the unitarized evaluation matrix (the weighted Fekete
/// objective); -inf sentinel for singular/coincident configurations.
pub fn objective(s: &SectionSpace, points: &[ProjPoint]) -> f64 {
    assert_eq!(points.len(), s.dimension(), "need N = dim H^0 points");
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if fs_distance(&points[i], &points[j]) < 1e-12 {
                return f64::NEG_INFINITY;
            }
        }
    }
    log_abs_det(&evaluation_matrix(s, points)).map_or(f64::NEG_INFINITY, |v| 2.0 * v)
}

fn log_abs_det(e: &DMatrix<Complex64>) -> Option<f64> {
    let lu = e.clone().lu();
    let mut acc = 0.0;
    for i in 0..e.nrows() {
        let d = lu.u()[(i, i)].norm();
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        acc += d.ln();
    }
    Some(acc)
}

/// Wirtinger gradient of the objective with respect to each point's unit
/// homogeneous representative, projected onto the (complex) tangent space
/// (radial and phase directions removed). The ascent direction at point i is
/// the conjugate of the returned vector.
pub fn objective_gradient(
    s: &SectionSpace,
    points: &[ProjPoint],
) -> Result<Vec<DVector<Complex64>>, FeketeError> {
    let e = evaluation_matrix(s, points);
    let einv = e
        .clone()
        .try_inverse()
        .ok_or(FeketeError::SingularEvaluation)?;
    let mut out = Vec::with_capacity(points.len());
    for (i, x) in points.iter().enumerate() {
        let lcoef = einv.column(i).into_owned();
        out.push(restricted_gradient(s, &lcoef, x));
    }
    Ok(out)
}

/// Gradient of f(Z) = 2 log |sum_m c_m e_m(Z)| at the unit representative of
/// x, for a section given by ONB coefficients c. Projected tangent.
fn restricted_gradient(
    s: &SectionSpace,
    onb_coeffs: &DVector<Complex64>,
    x: &ProjPoint,
) -> DVector<Complex64> {
    let w = s.weight();
    let k = s.degree();
    let z = x.coords();
    let dim = z.len();
    // monomial coefficients of the holomorphic part
    let q = s.onb_transform().tr_mul(onb_coeffs);
    // Q(Z) and dQ/dZ_a at the unit representative
    let mut qval = Complex64::new(0.0, 0.0);
    let mut dq = vec![Complex64::new(0.0, 0.0); dim];
    for (b, exps) in s.exponents().iter().enumerate() {
        let mut v = q[b];
        if v.norm() == 0.0 {
            continue;
        }
        for (i, &ei) in exps.iter().enumerate() {
            if ei > 0 {
                v *= z[i].powu(ei as u32);
            }
        }
        qval += v;
        for a in 0..dim {
            if exps[a] == 0 {
                continue;
            }
            let mut dv = q[b] * exps[a] as f64;
            for (i, &ei) in exps.iter().enumerate() {
                let e = if i == a { ei - 1 } else { ei };
                if e > 0 {
                    dv *= z[i].powu(e as u32);
                }
            }
            dq[a] += dv;
        }
    }
    let ug = w.u_grad_homogeneous(z);
    let kt = k as f64 * w.amplitude();
    let mut g = DVector::from_fn(dim, |a, _| dq[a] / qval - kt * ug[a]);
    // project so the conjugate (the ascent direction) is tangent to the
    // unit sphere modulo phase: df = 2 Re(sum G_a W_a) with <W, Z> = 0
    let inner: Complex64 = (0..dim).map(|a| g[a] * z[a]).sum();
    for a in 0..dim {
        g[a] -= inner * z[a].conj();
    }
    g
}

fn section_log_modulus(
    s: &SectionSpace,
    onb_coeffs: &DVector<Complex64>,
    x: &ProjPoint,
) -> f64 {
    2.0 * s.eval_onb(x).dot(onb_coeffs).norm().max(1e-300).ln()
}

/// Maximize f(Z) = 2 log |section(Z)| over the manifold, starting at x,
/// by projected Wirtinger ascent with backtracking. Returns the improved
/// point and the number of accepted steps.
fn ascend_point(
    s: &SectionSpace,
    onb_coeffs: &DVector<Complex64>,
    x0: &ProjPoint,
    max_iter: usize,
) -> (ProjPoint, usize) {
    let mut x = x0.clone();
    let mut fx = section_log_modulus(s, onb_coeffs, &x);
    let mut steps = 0;
    let k = s.degree().max(1) as f64;
    for _ in 0..max_iter {
        let g = restricted_gradient(s, onb_coeffs, &x);
        let gnorm = g.norm();
        if gnorm < 1e-10 {
            break;
        }
        // ascent direction: conjugate of the Wirtinger gradient
        let dir: Vec<Complex64> = g.iter().map(|c| c.conj()).collect();
        let mut t = 1.0 / (k * gnorm.max(1.0));
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<Complex64> = x
                .coords()
                .iter()
                .zip(&dir)
                .map(|(z, d)| z + d * t)
                .collect();
            if let Ok(y) = ProjPoint::new(cand) {
                let fy = section_log_modulus(s, onb_coeffs, &y);
                if fy > fx + 0.25 * t * gnorm * gnorm {
                    x = y;
                    fx = fy;
                    accepted = true;
                    steps += 1;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, steps)
}

/// Draw a point from the m_phi-proportional probability measure by rejection
/// against the reference volume.
pub fn sample_ma_point(w: &crate::geometry::Weight, rng: &mut impl Rng) -> ProjPoint {
    let n = w.dimension();
    // crude sup bound for the density against dV, refreshed cheaply
    let sup = (0..64)
        .map(|i| w.ma_density_dv(&uniform_grid(n, 64)[i]))
        .fold(0.0f64, f64::max)
        * 1.5;
    loop {
        let x = random_dv_point(n, rng);
        let u: f64 = rng.gen();
        if u * sup <= w.ma_density_dv(&x) {
            return x;
        }
    }
}

fn random_dv_point(n: usize, rng: &mut impl Rng) -> ProjPoint {
    let two_pi = 2.0 * std::f64::consts::PI;
    match n {
        1 => {
            let s: f64 = rng.gen();
            let th: f64 = rng.gen::<f64>() * two_pi;
            let r = (s / (1.0 - s)).sqrt();
            ProjPoint::from_chart(&[Complex64::from_polar(r, th)])
        }
        _ => {
            let s = rng.gen::<f64>().sqrt();
            let v: f64 = rng.gen();
            let th1 = rng.gen::<f64>() * two_pi;
            let th2 = rng.gen::<f64>() * two_pi;
            let r = (s / (1.0 - s)).sqrt();
            ProjPoint::from_chart(&[
                Complex64::from_polar(r * (1.0 - v).sqrt(), th1),
                Complex64::from_polar(r * v.sqrt(), th2),
            ])
        }
    }
}

pub fn default_grid_size(n: usize, k: usize) -> usize {
    if n == 1 {
        (40 * k).max(800)
    } else {
        (40 * k).max(2000)
    }
}

/// Multistart Fekete solver. Each restart: rejection-sampled start, global
/// grid-exchange sweeps (each exchange multiplies |det| by the replaced
/// Lagrange section's modulus, so the objective increases monotonically),
/// interleaved with per-point gradient polish. The final configuration
/// carries the grid certificate sup_j sup_grid |l_j| <= 1 + tol.
pub fn solve(s: &SectionSpace, opts: &SolveOptions) -> Result<FeketeConfig, FeketeError> {
    let n = s.manifold_dim();
    let k = s.degree();
    let nn = s.dimension();
    let restarts = if opts.restarts == 0 {
        8 + 2 * n
    } else {
        opts.restarts
    };
    let grid_size = opts.grid_size.unwrap_or_else(|| default_grid_size(n, k));
    let grid = uniform_grid(n, grid_size);
    // grid evaluations of the ONB, rows = grid points
    let mut v = DMatrix::<Complex64>::zeros(grid.len(), nn);
    for (g, x) in grid.iter().enumerate() {
        let vals = s.eval_onb(x);
        for j in 0..nn {
            v[(g, j)] = vals[j];
        }
    }

    let mut best: Option<FeketeConfig> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        let mut points: Vec<ProjPoint> = Vec::with_capacity(nn);
        while points.len() < nn {
            let x = sample_ma_point(s.weight(), &mut rng);
            if points
                .iter()
                .all(|p| fs_distance(p, &x) > 1e-6)
            {
                points.push(x);
            }
        }
        match refine(s, &grid, &v, points, opts, grid_size) {
            Some(cfg) => {
                let better = match &best {
                    None => true,
                    Some(b) => cfg.objective > b.objective + 1e-12,
                };
                if better {
                    let mut cfg = cfg;
                    cfg.meta.seed = opts.seed;
                    cfg.meta.restarts = restarts;
                    best = Some(cfg);
                }
            }
            None => continue,
        }
    }
    best.ok_or(FeketeError::NoProgress)
}

fn refine(
    s: &SectionSpace,
    grid: &[ProjPoint],
    v: &DMatrix<Complex64>,
    mut points: Vec<ProjPoint>,
    opts: &SolveOptions,
    grid_size: usize,
) -> Option<FeketeConfig> {
    let nn = s.dimension();
    let k = s.degree();
    let mut exchanges = 0;
    let mut gradient_steps = 0;
    // accept an exchange only if it improves |det| by at least this factor
    let improve = 1.0 + 0.5 * opts.tol;

    let mut einv = evaluation_matrix(s, &points).try_inverse()?;
    for _round in 0..opts.max_rounds {
        let mut changed = false;
        // grid-exchange sweep
        for j in 0..nn {
            // |l_j| over the grid: (V * einv[:, j])
            let col = einv.column(j).into_owned();
            let vals = v * &col;
            let mut candidates: Vec<(f64, usize)> = vals
                .iter()
                .enumerate()
                .filter_map(|(g, val)| {
                    let m = val.norm();
                    (m > improve).then_some((m, g))
                })
                .collect();
            candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
            for (_, g) in candidates {
                // skip grid nodes already occupied by another point
                let collides = points
                    .iter()
                    .enumerate()
                    .any(|(i, p)| i != j && fs_distance(p, &grid[g]) < 1e-9);
                if collides {
                    continue;
                }
                let prev = std::mem::replace(&mut points[j], grid[g].clone());
                match evaluation_matrix(s, &points).try_inverse() {
                    Some(inv) => {
                        einv = inv;
                        exchanges += 1;
                        changed = true;
                    }
                    None => {
                        points[j] = prev;
                    }
                }
                break;
            }
        }
        // gradient polish sweep
        for j in 0..nn {
            let col = einv.column(j).into_owned();
            let (improved, steps) = ascend_point(s, &col, &points[j], 50);
            if steps > 0 {
                let prev = std::mem::replace(&mut points[j], improved);
                match evaluation_matrix(s, &points).try_inverse() {
                    Some(inv) => {
                        einv = inv;
                        gradient_steps += steps;
                        changed = true;
                    }
                    None => {
                        points[j] = prev;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let lagr = LagrangeSystem {
        coeffs: einv.clone(),
    };
    let mut max_sup: f64 = 0.0;
    for j in 0..nn {
        let col = einv.column(j).into_owned();
        let vals = v * &col;
        for val in vals.iter() {
            max_sup = max_sup.max(val.norm());
        }
    }
    drop(lagr);
    let (sep, cov) = diagnostics(&points, grid);
    let objective = objective(s, &points);
    let sqrt_k = (k.max(1) as f64).sqrt();
    Some(FeketeConfig {
        k,
        points,
        objective,
        certificate: Certificate {
            grid_size,
            max_lagrange_sup: max_sup,
            separation_scaled: sep * sqrt_k,
            covering_scaled: cov * sqrt_k,
            certified: max_sup <= 1.0 + opts.tol,
        },
        meta: SolveMeta {
            seed: 0,
            restarts: 0,
            exchanges,
            gradient_steps,
        },
    })
}

/// (separation, covering radius) of a configuration, unscaled.
pub fn diagnostics(points: &[ProjPoint], grid: &[ProjPoint]) -> (f64, f64) {
    let mut sep = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            sep = sep.min(fs_distance(&points[i], &points[j]));
        }
    }
    if points.len() < 2 {
        sep = std::f64::consts::FRAC_PI_2;
    }
    let mut cov: f64 = 0.0;
    for g in grid {
        let d = points
            .iter()
            .map(|p| fs_distance(p, g))
            .fold(f64::INFINITY, f64::min);
        cov = cov.max(d);
    }
    (sep, cov)
}

pub fn lagrange_sections(
    s: &SectionSpace,
    points: &[ProjPoint],
) -> Result<LagrangeSystem, FeketeError> {
    let e = evaluation_matrix(s, points);
    let coeffs = e.try_inverse().ok_or(FeketeError::SingularEvaluation)?;
    Ok(LagrangeSystem { coeffs })
}

/// Dual sections per the Lagrange-frame construction: since l_lambda has
/// unitarized value exactly 1 at lambda, the frame coefficients are
/// f_{j,lambda}(lambda) = e_j(lambda), giving Phi_lambda = sum_j
/// conj(e_j(lambda)) e_j.
pub fn dual_sections(s: &SectionSpace, points: &[ProjPoint]) -> DualSystem {
    let nn = s.dimension();
    let mut coeffs = DMatrix::zeros(nn, points.len());
    for (l, x) in points.iter().enumerate() {
        let v = s.eval_onb(x);
        for j in 0..nn {
            coeffs[(j, l)] = v[j].conj();
        }
    }
    DualSystem { coeffs }
}
