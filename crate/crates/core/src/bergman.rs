//! The space H^0(O(k)) over CP^n with the weighted L^2 inner product:
//! orthonormalized monomial basis, Bergman kernel, and kernel diagnostics
//! (off-diagonal decay, Tian-type first-order asymptotics, Bargmann-Fock
//! rescaling limit).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{
    fs_distance, uniform_grid, BallRegion, GeometryError, ProjPoint, QuadratureRule, Weight,
};

#[derive(Debug, Error)]
pub enum BergmanError {
    #[error("Gram matrix not positive definite (quadrature underresolved or weight inadmissible)")]
    GramNotPd,
    #[error("decay fit degenerate: all sampled pairs near the diagonal")]
    FitDegenerate,
    #[error("curvature not positive definite at the rescaling center")]
    NormalizationFailed,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Monomial exponent list for H^0(O(k)): all homogeneous multi-indices of
/// length n+1 summing to k, in lexicographic order.
pub fn monomial_exponents(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match n {
        1 => {
            for j in 0..=k {
                out.push(vec![k - j, j]);
            }
        }
        2 => {
            for a in 0..=k {
                for b in 0..=(k - a) {
                    out.push(vec![k - a - b, a, b]);
                }
            }
        }
        _ => panic!("dimension must be 1 or 2"),
    }
    out
}

pub fn space_dimension(n: usize, k: usize) -> usize {
    match n {
        1 => k + 1,
        _ => (k + 1) * (k + 2) / 2,
    }
}

/// H^0(O(k)) with Gram factorization against a quadrature rule.
///
/// Section values are reported in per-point unitary frames: the value of the
/// homogeneous polynomial at the canonical unit representative, times
/// e^{-k t u / 2}. Magnitudes and same-point inner products of such values
/// are frame-independent.
#[derive(Debug, Clone)]
pub struct SectionSpace {
    weight: Weight,
    k: usize,
    exponents: Vec<Vec<usize>>,
    rule: QuadratureRule,
    gram: DMatrix<Complex64>,
    chol_l: DMatrix<Complex64>,
    /// ONB transform B = L^{-1}: e_i = sum_a B[(i,a)] * monomial_a.
    onb: DMatrix<Complex64>,
    gram_cond: f64,
}

impl SectionSpace {
    /// Quadrature degree that resolves degree-2k integrands plus the
    /// perturbation factor e^{-ktu} with a safety margin.
    pub fn default_degree(w: &Weight, k: usize) -> usize {
        if w.is_fubini_study() {
            2 * k + 6
        } else {
            3 * k + 8 * w.denominator_degree() + 24
        }
    }

    pub fn with_default_rule(weight: Weight, k: usize) -> Result<SectionSpace, BergmanError> {
        let degree = Self::default_degree(&weight, k);
        let rule = QuadratureRule::full(weight.dimension(), degree);
        SectionSpace::build(weight, k, rule)
    }

    pub fn build(
        weight: Weight,
        k: usize,
        rule: QuadratureRule,
    ) -> Result<SectionSpace, BergmanError> {
        rule.require_degree(2 * k + weight.perturbation_degree())?;
        let exponents = monomial_exponents(weight.dimension(), k);
        match Self::try_assemble(&weight, k, &exponents, &rule) {
            Some((gram, chol_l, onb, gram_cond)) => Ok(SectionSpace {
                weight,
                k,
                exponents,
                rule,
                gram,
                chol_l,
                onb,
                gram_cond,
            }),
            None => {
                // one retry with a doubled quadrature degree
                let rule2 = QuadratureRule::full(weight.dimension(), 2 * rule.degree);
                match Self::try_assemble(&weight, k, &exponents, &rule2) {
                    Some((gram, chol_l, onb, gram_cond)) => Ok(SectionSpace {
                        weight,
                        k,
                        exponents,
                        rule: rule2,
                        gram,
                        chol_l,
                        onb,
                        gram_cond,
                    }),
                    None => Err(BergmanError::GramNotPd),
                }
            }
        }
    }

    fn try_assemble(
        weight: &Weight,
        k: usize,
        exponents: &[Vec<usize>],
        rule: &QuadratureRule,
    ) -> Option<(DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>, f64)> {
        let nn = exponents.len();
        let mut gram = DMatrix::<Complex64>::zeros(nn, nn);
        // blocked accumulation G += B^H diag(w) B over node chunks
        const CHUNK: usize = 2048;
        let mut block = DMatrix::<Complex64>::zeros(CHUNK, nn);
        let mut idx = 0;
        while idx < rule.nodes.len() {
            let hi = (idx + CHUNK).min(rule.nodes.len());
            let rows = hi - idx;
            for (r, node) in rule.nodes[idx..hi].iter().enumerate() {
                let vals = eval_unitarized_monomials(weight, k, exponents, &node.point);
                let sw = node.weight.sqrt();
                for a in 0..nn {
                    // store conjugates so that (block^H block)_{ab}
                    // = sum_x w(x) m_a(x) conj(m_b(x)) = <m_a, m_b>
                    block[(r, a)] = vals[a].conj() * sw;
                }
            }
            let view = block.rows(0, rows);
            gram += view.adjoint() * view;
            idx = hi;
        }
        // enforce exact Hermitian symmetry
        let gram = (gram.clone() + gram.adjoint()) * Complex64::new(0.5, 0.0);
        // the diagonal spreads like the central binomial coefficient, so
        // factor the Jacobi-preconditioned correlation matrix instead and
        // rescale: G = (D^{1/2} L_c)(D^{1/2} L_c)^H
        let mut dsqrt = vec![0.0f64; nn];
        for a in 0..nn {
            let d = gram[(a, a)].re;
            if !(d > 0.0) {
                return None;
            }
            dsqrt[a] = d.sqrt();
        }
        let mut corr = gram.clone();
        for a in 0..nn {
            for b in 0..nn {
                corr[(a, b)] /= Complex64::from(dsqrt[a] * dsqrt[b]);
            }
        }
        let chol = nalgebra::linalg::Cholesky::new(corr.clone())?;
        let mut chol_l: DMatrix<Complex64> = chol.l();
        for a in 0..nn {
            for b in 0..=a {
                chol_l[(a, b)] *= Complex64::from(dsqrt[a]);
            }
        }
        let onb = chol_l
            .clone()
            .solve_lower_triangular(&DMatrix::<Complex64>::identity(nn, nn))?;
        let eigs = corr.symmetric_eigenvalues();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for e in eigs.iter() {
            lo = lo.min(*e);
            hi = hi.max(*e);
        }
        if lo <= 0.0 {
            return None;
        }
        let dmax = dsqrt.iter().cloned().fold(0.0f64, f64::max);
        let dmin = dsqrt.iter().cloned().fold(f64::INFINITY, f64::min);
        // upper estimate cond(G) <= cond(D) cond(C)
        Some((gram, chol_l, onb, (hi / lo) * (dmax / dmin).powi(2)))
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.exponents.len()
    }

    pub fn manifold_dim(&self) -> usize {
        self.weight.dimension()
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn exponents(&self) -> &[Vec<usize>] {
        &self.exponents
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    pub fn cholesky_l(&self) -> &DMatrix<Complex64> {
        &self.chol_l
    }

    /// e_i = sum_a onb_transform[(i,a)] monomial_a (also valid for the raw
    /// homogeneous polynomials, since the unitarizing factor is a common
    /// scalar at each point).
    pub fn onb_transform(&self) -> &DMatrix<Complex64> {
        &self.onb
    }

    pub fn gram_condition(&self) -> f64 {
        self.gram_cond
    }

    /// Unitarized monomial values at x.
    pub fn eval_monomials(&self, x: &ProjPoint) -> DVector<Complex64> {
        eval_unitarized_monomials(&self.weight, self.k, &self.exponents, x)
    }

    /// Raw values of the homogeneous monomials at an arbitrary coordinate
    /// vector (no normalization, no weight factor).
    pub fn eval_monomials_raw(&self, zvec: &[Complex64]) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.exponents.len());
        for (a, exps) in self.exponents.iter().enumerate() {
            let mut v = Complex64::new(1.0, 0.0);
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    v *= zvec[i].powu(e as u32);
                }
            }
            out[a] = v;
        }
        out
    }

    /// Unitarized values of the orthonormal basis at x.
    pub fn eval_onb(&self, x: &ProjPoint) -> DVector<Complex64> {
        &self.onb * self.eval_monomials(x)
    }

    /// Bergman kernel Pi_k(x,y) = sum_j e_j(x) conj(e_j(y)), unitarized.
    pub fn kernel(&self, x: &ProjPoint, y: &ProjPoint) -> Complex64 {
        self.eval_onb(y).dotc(&self.eval_onb(x))
    }

    /// Bergman function Pi_k(x,x) = sum_j |e_j(x)|^2.
    pub fn bergman_function(&self, x: &ProjPoint) -> f64 {
        self.eval_onb(x).norm_squared()
    }
}

fn eval_unitarized_monomials(
    weight: &Weight,
    k: usize,
    exponents: &[Vec<usize>],
    x: &ProjPoint,
) -> DVector<Complex64> {
    let z = x.coords();
    let factor = if weight.is_fubini_study() {
        1.0
    } else {
        (-0.5 * k as f64 * weight.amplitude() * weight.u_value(x)).exp()
    };
    let mut out = DVector::zeros(exponents.len());
    for (a, exps) in exponents.iter().enumerate() {
        let mut v = Complex64::new(factor, 0.0);
        for (i, &e) in exps.iter().enumerate() {
            if e > 0 {
                v *= z[i].powu(e as u32);
            }
        }
        out[a] = v;
    }
    out
}

/// Least-squares fit of log |Pi_k(x,y)| ~ log A - c sqrt(k) d(x,y) over
/// moderately separated point pairs; returns (c, rms residual).
pub fn decay_profile(s: &SectionSpace) -> Result<(f64, f64), BergmanError> {
    let k = s.degree() as f64;
    let pts = uniform_grid(s.manifold_dim(), 160);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = fs_distance(&pts[i], &pts[j]);
            let t = d * k.sqrt();
            if !(0.8..=3.5).contains(&t) {
                continue;
            }
            let m = s.kernel(&pts[i], &pts[j]).norm();
            if m < 1e-14 {
                continue;
            }
            xs.push(t);
            ys.push(m.ln());
            if xs.len() >= 400 {
                break;
            }
        }
        if xs.len() >= 400 {
            break;
        }
    }
    if xs.len() < 10 || xs.iter().cloned().fold(f64::MIN, f64::max) < 1.5 {
        return Err(BergmanError::FitDegenerate);
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    Ok((-slope, (ss / xs.len() as f64).sqrt()))
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// The three L^1 kernel functionals:
/// (i) sup_x int |Pi_k(x,y)| dV(y),
/// (ii) k^n double-int over Omega x Omega^c of |Pi_k|, Omega = B(z, R/sqrt(k)),
/// (iii) sup_x int d(x,y) |Pi_k(x,y)| dV(y).
pub struct L1Bounds {
    pub sup_integral: f64,
    pub offdiag_l1: f64,
    pub moment: f64,
}

pub fn l1_bounds(s: &SectionSpace, center: &ProjPoint, big_r: f64) -> L1Bounds {
    let n = s.manifold_dim();
    let k = s.degree() as f64;
    let nn = s.dimension();
    // evaluate the ONB at every quadrature node once; row y holds e_a(y)
    let nodes = &s.rule().nodes;
    let mut evals = DMatrix::<Complex64>::zeros(nodes.len(), nn);
    for (r, node) in nodes.iter().enumerate() {
        let v = s.eval_onb(&node.point);
        for a in 0..nn {
            evals[(r, a)] = v[a];
        }
    }
    let kernel_row = |ex: &DVector<Complex64>| -> DVector<Complex64> {
        // |Pi(x, y)| = |sum_a conj(e_a(y)) e_a(x)| = |(E conj(ex))_y|
        &evals * ex.map(|c| c.conj())
    };

    let sample = uniform_grid(n, 24);
    let mut sup_integral: f64 = 0.0;
    let mut moment: f64 = 0.0;
    for x in &sample {
        let row = kernel_row(&s.eval_onb(x));
        let mut i1 = 0.0;
        let mut i3 = 0.0;
        for (y, node) in nodes.iter().enumerate() {
            let m = node.weight * row[y].norm();
            i1 += m;
            i3 += m * fs_distance(x, &node.point);
        }
        sup_integral = sup_integral.max(i1);
        moment = moment.max(i3);
    }

    // (ii): low-degree ball rule over Omega (the integrand is smooth at
    // scale 1/sqrt(k) across a ball of comparable size), full rule
    // restricted to the complement
    let radius = (big_r / k.sqrt()).min(std::f64::consts::FRAC_PI_2);
    let ball = BallRegion::new(center.clone(), radius).unwrap();
    let cap = crate::geometry::ball_rule(n, 24, &ball);
    let outside: Vec<usize> = (0..nodes.len())
        .filter(|&y| !ball.contains(&nodes[y].point))
        .collect();
    let mut off = 0.0;
    for node in &cap.nodes {
        let row = kernel_row(&s.eval_onb(&node.point));
        let inner: f64 = outside
            .iter()
            .map(|&y| nodes[y].weight * row[y].norm())
            .sum();
        off += node.weight * inner;
    }
    L1Bounds {
        sup_integral,
        offdiag_l1: k.powi(n as i32) * off,
        moment,
    }
}

/// Sup over a scan grid of |k^{-n} Pi_k(x,x) - pi^{-n} * (m_phi density wrt
/// dV)(x)|; Tian's theorem makes this O(1/k).
pub fn tian_error(s: &SectionSpace) -> f64 {
    let n = s.manifold_dim();
    let k = s.degree() as f64;
    let pi = std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    for x in uniform_grid(n, 200) {
        let lhs = s.bergman_function(&x) / k.powi(n as i32);
        let rhs = s.weight().ma_density_dv(&x) / pi.powi(n as i32);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Sup over |zeta|, |xi| <= window of the difference between the rescaled
/// Bergman kernel in normalized coordinates at `center` and the
/// Bargmann-Fock kernel pi^{-n} exp(<zeta,xi> - |zeta|^2/2 - |xi|^2/2).
pub fn fock_error(
    s: &SectionSpace,
    center: &ProjPoint,
    window: f64,
) -> Result<f64, BergmanError> {
    let n = s.manifold_dim();
    let k = s.degree() as f64;
    let w = s.weight();
    let chart = center.chart_index();
    let zeta0 = center.chart_coords(chart);

    let h = w.hessian_chart(chart, &zeta0);
    let eig = h.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|e| *e <= 0.0) {
        return Err(BergmanError::NormalizationFailed);
    }
    // S = H^{-1/2}
    let mut d = DMatrix::<Complex64>::zeros(n, n);
    let mut det_s2 = 1.0;
    for i in 0..n {
        let ev = eig.eigenvalues[i];
        d[(i, i)] = Complex64::new(1.0 / ev.sqrt(), 0.0);
        det_s2 *= 1.0 / ev;
    }
    let smat = &eig.eigenvectors * d * eig.eigenvectors.adjoint();

    let phi0 = w.phi_chart(chart, &zeta0);
    let grad = w.grad_chart(chart, &zeta0);
    let holo = w.holo_hessian_chart(chart, &zeta0);
    let s0 = 1.0 + zeta0.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let rho = 2.0 * s0.powi(-(n as i32 + 1)); // dV / dLebesgue at the center

    // normalized-frame ONB values at a rescaled point zeta in C^n
    let g_vals = |zeta: &DVector<Complex64>| -> DVector<Complex64> {
        let delta = &smat * zeta / Complex64::new(k.sqrt(), 0.0);
        let z: Vec<Complex64> = zeta0.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        // homogeneous vector with 1 in the chart slot, then normalized with
        // a *positive real* scale only (phase must stay holomorphic in z)
        let mut hom = Vec::with_capacity(n + 1);
        let mut zi = z.iter();
        for i in 0..=n {
            if i == chart {
                hom.push(Complex64::new(1.0, 0.0));
            } else {
                hom.push(*zi.next().unwrap());
            }
        }
        let norm = hom.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let unit: Vec<Complex64> = hom.iter().map(|c| c / norm).collect();
        let mono = s.eval_monomials_raw(&unit);
        // exponent (k/2) log(1+|z|^2) - k (phi0/2 + a.delta + delta^T b delta / 2)
        let mut lin = Complex64::new(0.0, 0.0);
        for (a, dz) in grad.iter().zip(delta.iter()) {
            lin += a * dz;
        }
        let mut quad = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                quad += holo[(i, j)] * delta[i] * delta[j];
            }
        }
        let expo = Complex64::new(k * norm.ln() - k * phi0 / 2.0, 0.0) - k * (lin + quad / 2.0);
        (s.onb_transform() * mono) * expo.exp()
    };

    // grid of Fock coordinates with |zeta| <= window
    let mut zs: Vec<DVector<Complex64>> = Vec::new();
    if n == 1 {
        for ir in 0..=4 {
            let r = window * ir as f64 / 4.0;
            let nth = if ir == 0 { 1 } else { 8 };
            for it in 0..nth {
                let th = 2.0 * std::f64::consts::PI * it as f64 / nth as f64;
                zs.push(DVector::from_vec(vec![Complex64::from_polar(r, th)]));
            }
        }
    } else {
        for ir in 0..=2 {
            let r = window * ir as f64 / 2.0;
            let nth = if ir == 0 { 1 } else { 4 };
            for it1 in 0..nth {
                for it2 in 0..nth {
                    let t1 = 2.0 * std::f64::consts::PI * it1 as f64 / nth as f64;
                    let t2 = 2.0 * std::f64::consts::PI * it2 as f64 / nth as f64;
                    let c = std::f64::consts::FRAC_1_SQRT_2;
                    zs.push(DVector::from_vec(vec![
                        Complex64::from_polar(r * c, t1),
                        Complex64::from_polar(r * c, t2),
                    ]));
                }
            }
        }
    }
    let gv: Vec<DVector<Complex64>> = zs.iter().map(&g_vals).collect();

    let pi = std::f64::consts::PI;
    let scale = det_s2 * rho / k.powi(n as i32);
    let mut worst: f64 = 0.0;
    for (i, zi) in zs.iter().enumerate() {
        for (j, zj) in zs.iter().enumerate() {
            let dot = gv[j].dotc(&gv[i]); // sum g(zeta_i) conj(g(zeta_j))
            let pair = zj.dotc(zi); // <zeta_i, zeta_j> = sum zeta_i conj(zeta_j)
            let target = (pair
                - Complex64::new((zi.norm_squared() + zj.norm_squared()) / 2.0, 0.0))
            .exp()
                / pi.powi(n as i32);
            let got = dot * scale
                * Complex64::new(
                    (-(zi.norm_squared() + zj.norm_squared()) / 2.0).exp(),
                    0.0,
                );
            worst = worst.max((got - target).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Weight;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn fact(m: usize) -> f64 {
        (1..=m).map(|i| i as f64).product()
    }

    #[test]
    fn fs_gram_closed_form_n1() {
        // oracle: ||z^j||^2 = 2 pi j!(k-j)!/(k+1)!
        let k = 6;
        let s = SectionSpace::with_default_rule(Weight::fubini_study(1), k).unwrap();
        for j in 0..=k {
            let oracle = 2.0 * PI * fact(j) * fact(k - j) / fact(k + 1);
            assert_relative_eq!(s.gram()[(j, j)].re, oracle, max_relative = 1e-10);
        }
        for i in 0..=k {
            for j in 0..=k {
                if i != j {
                    assert_abs_diff_eq!(s.gram()[(i, j)].norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
        // k = 1 special case: diag(pi, pi)
        let s1 = SectionSpace::with_default_rule(Weight::fubini_study(1), 1).unwrap();
        assert_relative_eq!(s1.gram()[(0, 0)].re, PI, max_relative = 1e-12);
        assert_relative_eq!(s1.gram()[(1, 1)].re, PI, max_relative = 1e-12);
    }

    #[test]
    fn fs_gram_closed_form_n2() {
        // oracle: ||Z0^{k-a-b} Z1^a Z2^b||^2 = 2 pi^2 a! b! (k-a-b)!/(k+2)!
        let k = 3;
        let s = SectionSpace::with_default_rule(Weight::fubini_study(2), k).unwrap();
        for (idx, e) in s.exponents().iter().enumerate() {
            let oracle = 2.0 * PI * PI * fact(e[1]) * fact(e[2]) * fact(e[0]) / fact(k + 2);
            assert_relative_eq!(s.gram()[(idx, idx)].re, oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn fs_bergman_function_constant() {
        for k in [1usize, 4, 9] {
            let s = SectionSpace::with_default_rule(Weight::fubini_study(1), k).unwrap();
            let expect = (k as f64 + 1.0) / (2.0 * PI);
            for x in uniform_grid(1, 25) {
                assert_relative_eq!(s.bergman_function(&x), expect, max_relative = 1e-10);
            }
        }
        // n = 2: constant N / Vol = N / pi^2
        let k = 3;
        let s2 = SectionSpace::with_default_rule(Weight::fubini_study(2), k).unwrap();
        let expect = space_dimension(2, k) as f64 / (PI * PI);
        for x in uniform_grid(2, 10) {
            assert_relative_eq!(s2.bergman_function(&x), expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn fs_kernel_closed_form() {
        // |Pi_k(x,y)| = ((k+1)/(2 pi)) cos^k d(x,y)
        let k = 7;
        let s = SectionSpace::with_default_rule(Weight::fubini_study(1), k).unwrap();
        let pts = uniform_grid(1, 12);
        for i in 0..pts.len() {
            for j in i..pts.len() {
                let d = fs_distance(&pts[i], &pts[j]);
                let oracle = (k as f64 + 1.0) / (2.0 * PI) * d.cos().powi(k as i32);
                let got = s.kernel(&pts[i], &pts[j]).norm();
                assert_abs_diff_eq!(got, oracle, epsilon = 1e-10);
                // Hermitian symmetry of moduli
                assert_abs_diff_eq!(
                    got,
                    s.kernel(&pts[j], &pts[i]).norm(),
                    epsilon = 1e-12
                );
            }
        }
        // antipodal pair
        let e0 = ProjPoint::basis(1, 0);
        let e1 = ProjPoint::basis(1, 1);
        assert_abs_diff_eq!(s.kernel(&e0, &e1).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reproducing_identity_independent_rule() {
        // int_X |Pi(x,y)|^2 dV(y) = Pi(x,x), checked with a finer rule than
        // the one that built the space
        let k = 8;
        for weight in [Weight::fubini_study(1), crate::testutil::bumpy_weight()] {
            let s = SectionSpace::with_default_rule(weight.clone(), k).unwrap();
            let fine = QuadratureRule::full(1, s.rule().degree + 17);
            for x in uniform_grid(1, 20) {
                let ex = s.eval_onb(&x);
                let lhs = fine.integrate_real(|y| s.eval_onb(&y).dotc(&ex).norm_sqr());
                assert_abs_diff_eq!(lhs, s.bergman_function(&x), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn bergman_trace_is_dimension() {
        for weight in [Weight::fubini_study(1), crate::testutil::bumpy_weight()] {
            let k = 10;
            let s = SectionSpace::with_default_rule(weight, k).unwrap();
            let total = s.rule().integrate_real(|x| s.bergman_function(&x));
            assert_relative_eq!(total, (k + 1) as f64, max_relative = 1e-10);
        }
    }

    #[test]
    fn perturbed_gram_near_fs_for_small_amplitude() {
        let base = crate::testutil::bumpy_weight();
        let k = 5;
        let fs = SectionSpace::with_default_rule(Weight::fubini_study(1), k).unwrap();
        for t in [0.05, 0.1] {
            let spec = {
                let mut sp = base.to_spec();
                sp.amplitude = t;
                sp
            };
            let s = SectionSpace::with_default_rule(spec.build().unwrap(), k).unwrap();
            let diff = (s.gram() - fs.gram()).norm();
            assert!(
                diff < 4.0 * t * fs.gram().norm(),
                "t = {t}: Gram moved by {diff}"
            );
        }
    }

    #[test]
    fn gram_self_convergence_perturbed() {
        // doubling the quadrature degree leaves the Gram unchanged
        let w = crate::testutil::bumpy_weight();
        let k = 8;
        let d = SectionSpace::default_degree(&w, k);
        let a = SectionSpace::build(w.clone(), k, QuadratureRule::full(1, d)).unwrap();
        let b = SectionSpace::build(w, k, QuadratureRule::full(1, 2 * d)).unwrap();
        let rel = (a.gram() - b.gram()).norm() / b.gram().norm();
        assert!(rel < 1e-12, "Gram relative drift {rel}");
    }

    #[test]
    fn decay_profile_positive_and_stable() {
        let c8 = decay_profile(
            &SectionSpace::with_default_rule(Weight::fubini_study(1), 8).unwrap(),
        )
        .unwrap()
        .0;
        let c16 = decay_profile(
            &SectionSpace::with_default_rule(Weight::fubini_study(1), 16).unwrap(),
        )
        .unwrap()
        .0;
        assert!(c8 > 0.0 && c16 > 0.0);
        assert!(c16 / c8 < 1.25 && c8 / c16 < 1.25, "c8={c8} c16={c16}");
    }

    #[test]
    fn tian_error_shrinks() {
        let w = crate::testutil::bumpy_weight();
        let e8 = tian_error(&SectionSpace::with_default_rule(w.clone(), 8).unwrap());
        let e16 = tian_error(&SectionSpace::with_default_rule(w, 16).unwrap());
        // C/k bound: the products k * err should be comparable
        assert!(16.0 * e16 < 2.0 * 8.0 * e8, "e8={e8} e16={e16}");
    }

    #[test]
    fn fock_limit_fs_origin() {
        let e16 = fock_error(
            &SectionSpace::with_default_rule(Weight::fubini_study(1), 16).unwrap(),
            &ProjPoint::basis(1, 0),
            2.0,
        )
        .unwrap();
        let e32 = fock_error(
            &SectionSpace::with_default_rule(Weight::fubini_study(1), 32).unwrap(),
            &ProjPoint::basis(1, 0),
            2.0,
        )
        .unwrap();
        assert!(e32 < e16, "e16={e16} e32={e32}");
        assert!(e32 < 0.1, "e32={e32}");
    }

    #[test]
    fn fock_limit_perturbed_generic_center() {
        let w = crate::testutil::bumpy_weight();
        let x0 = ProjPoint::from_chart(&[Complex64::new(0.4, -0.3)]);
        let e16 = fock_error(
            &SectionSpace::with_default_rule(w.clone(), 16).unwrap(),
            &x0,
            1.5,
        )
        .unwrap();
        let e32 = fock_error(&SectionSpace::with_default_rule(w, 32).unwrap(), &x0, 1.5).unwrap();
        assert!(e32 < e16, "e16={e16} e32={e32}");
    }

    #[test]
    fn sub_mean_value_property() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cs: Vec<f64> = Vec::new();
        for k in [8usize, 16] {
            let s = SectionSpace::with_default_rule(Weight::fubini_study(1), k).unwrap();
            let coeffs = random_section(&mut rng, s.dimension());
            for delta in [0.3, 0.6] {
                let r = delta / (k as f64).sqrt();
                for z in uniform_grid(1, 6) {
                    let ball = BallRegion::new(z.clone(), r).unwrap();
                    let cap = crate::geometry::ball_rule(1, s.rule().degree, &ball);
                    let val = |x: &ProjPoint| s.eval_onb(x).dot(&coeffs).norm_sqr();
                    let local = cap.integrate_real(|x| val(x));
                    // C in |s(z)|^2 <= C r^{-2n} int_B |s|^2, r = delta/sqrt(k)
                    let c = val(&z) * r * r / local;
                    assert!(c.is_finite());
                    cs.push(c);
                }
            }
        }
        let max = cs.iter().cloned().fold(f64::MIN, f64::max);
        assert!(max < 2.0, "sub-mean constant {max}");
    }

    #[test]
    fn plancherel_polya_property() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [8usize, 16] {
            let s = SectionSpace::with_default_rule(Weight::fubini_study(1), k).unwrap();
            let coeffs = random_section(&mut rng, s.dimension());
            let norm2 = coeffs.norm_squared(); // ONB coefficients: L2 norm exactly
            // greedy 0.5/sqrt(k)-separated subset of a dense grid
            let sep = 0.5 / (k as f64).sqrt();
            let mut picked: Vec<ProjPoint> = Vec::new();
            for x in uniform_grid(1, 600) {
                if picked.iter().all(|p| fs_distance(p, &x) >= sep) {
                    picked.push(x);
                }
            }
            let sum: f64 = picked
                .iter()
                .map(|x| s.eval_onb(x).dot(&coeffs).norm_sqr())
                .sum();
            let lhs = sum / k as f64;
            assert!(
                lhs < 6.0 * norm2,
                "Plancherel-Polya violated: {lhs} vs {norm2}"
            );
        }
    }

    fn random_section(
        rng: &mut impl rand::Rng,
        n: usize,
    ) -> DVector<Complex64> {
        use rand_distr::StandardNormal;
        DVector::from_fn(n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) / 2f64.sqrt()
        })
    }
}
