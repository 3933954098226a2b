use num_complex::Complex64;

use super::{fs_distance, GeometryError, ProjPoint, Weight};

/// Gauss-Legendre nodes and weights on [0, 1], exact for polynomials of
/// degree <= 2n - 1. Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // initial guess (Chebyshev-like) on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0)); // map to [0,1]
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Debug, Clone)]
pub struct QuadNode {
    pub point: ProjPoint,
    pub weight: f64,
    pub chart: usize,
}

/// A geodesic ball B(center, radius) of CP^n; radius in Fubini-Study
/// geodesic units, at most the diameter pi/2.
#[derive(Debug, Clone)]
pub struct BallRegion {
    pub center: ProjPoint,
    pub radius: f64,
}

impl BallRegion {
    pub fn new(center: ProjPoint, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius <= std::f64::consts::FRAC_PI_2 + 1e-12) {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(BallRegion { center, radius })
    }

    pub fn contains(&self, x: &ProjPoint) -> bool {
        fs_distance(&self.center, x) <= self.radius
    }

    /// Reference volume of the ball: 2*pi*sin^2(r) for n = 1,
    /// pi^2*sin^4(r) for n = 2 (closed forms under dV).
    pub fn reference_volume(&self, n: usize) -> f64 {
        let s = self.radius.sin();
        match n {
            1 => 2.0 * std::f64::consts::PI * s * s,
            _ => std::f64::consts::PI.powi(2) * s.powi(4),
        }
    }
}

/// Product quadrature on CP^n for the reference volume dV with
/// Vol(CP^1) = 2pi, Vol(CP^2) = pi^2. In the radial substitution
/// s = r^2/(1+r^2) the volume form is polynomial in s, so Gauss-Legendre in s
/// plus trapezoid in the angles integrates |P(Z)|^2 (1+|z|^2)^{-k} exactly
/// for deg P <= k <= D.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<QuadNode>,
    pub degree: usize,
    n: usize,
}

impl QuadratureRule {
    /// Rule over all of CP^n exact through monomial degree `degree`.
    pub fn full(n: usize, degree: usize) -> QuadratureRule {
        Self::cap(n, degree, std::f64::consts::FRAC_PI_2)
    }

    /// Rule over the polar cap {d(x, e0) <= radius}. The cap is exactly
    /// s <= sin^2(radius) in the radial substitution, so exactness degrees
    /// carry over.
    pub fn cap(n: usize, degree: usize, radius: f64) -> QuadratureRule {
        let smax = radius.sin().powi(2);
        let n_s = degree / 2 + 2;
        let n_th = degree + 4;
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut nodes = Vec::new();
        match n {
            1 => {
                for (s, ws) in gauss_legendre_01(n_s) {
                    let s = s * smax;
                    let ws = ws * smax;
                    let r = (s / (1.0 - s)).sqrt();
                    for it in 0..n_th {
                        let th = two_pi * it as f64 / n_th as f64;
                        let z = Complex64::from_polar(r, th);
                        let point = ProjPoint::from_chart(&[z]);
                        let chart = point.chart_index();
                        // dV = ds dtheta in (s, theta) coordinates
                        nodes.push(QuadNode {
                            point,
                            weight: ws * two_pi / n_th as f64,
                            chart,
                        });
                    }
                }
            }
            2 => {
                let n_v = degree / 2 + 2;
                for (s, ws) in gauss_legendre_01(n_s) {
                    let s = s * smax;
                    let ws = ws * smax;
                    let r = (s / (1.0 - s)).sqrt();
                    for (v, wv) in gauss_legendre_01(n_v) {
                        let (r1, r2) = (r * (1.0 - v).sqrt(), r * v.sqrt());
                        for it1 in 0..n_th {
                            let th1 = two_pi * it1 as f64 / n_th as f64;
                            for it2 in 0..n_th {
                                let th2 = two_pi * it2 as f64 / n_th as f64;
                                let z1 = Complex64::from_polar(r1, th1);
                                let z2 = Complex64::from_polar(r2, th2);
                                let point = ProjPoint::from_chart(&[z1, z2]);
                                let chart = point.chart_index();
                                // dV = (s/2) ds dv dtheta1 dtheta2
                                nodes.push(QuadNode {
                                    point,
                                    weight: (s / 2.0) * ws * wv * (two_pi / n_th as f64).powi(2),
                                    chart,
                                });
                            }
                        }
                    }
                }
            }
            _ => panic!("dimension must be 1 or 2"),
        }
        QuadratureRule { nodes, degree, n }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn require_degree(&self, need: usize) -> Result<(), GeometryError> {
        if self.degree < need {
            Err(GeometryError::DegreeTooLow {
                have: self.degree,
                need,
            })
        } else {
            Ok(())
        }
    }

    /// Deterministic fixed-order integration of a complex-valued integrand.
    pub fn integrate<F: FnMut(&ProjPoint) -> Complex64>(&self, mut f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for node in &self.nodes {
            acc += f(&node.point) * node.weight;
        }
        acc
    }

    pub fn integrate_real<F: FnMut(&ProjPoint) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for node in &self.nodes {
            acc += f(&node.point) * node.weight;
        }
        acc
    }

    /// Total Monge-Ampere mass of a weight via this rule.
    pub fn ma_mass<F: Fn(&ProjPoint) -> bool>(&self, w: &Weight, indicator: F) -> f64 {
        self.integrate_real(|x| if indicator(x) { w.ma_density_dv(x) } else { 0.0 })
    }
}

/// Unitary of C^{n+1} whose first column is the center's representative;
/// it maps the pole e0 to the center, for ball quadrature by rotation.
pub fn unitary_pole_to(center: &ProjPoint) -> nalgebra::DMatrix<Complex64> {
    let d = center.coords().len();
    let mut cols: Vec<nalgebra::DVector<Complex64>> =
        vec![nalgebra::DVector::from_column_slice(center.coords())];
    // Gram-Schmidt against the standard basis, skipping near-dependent picks
    for i in 0..d {
        if cols.len() == d {
            break;
        }
        let mut v = nalgebra::DVector::zeros(d);
        v[i] = Complex64::new(1.0, 0.0);
        for c in &cols {
            let proj = c.dotc(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= Complex64::new(norm, 0.0);
            cols.push(v);
        }
    }
    assert_eq!(cols.len(), d, "Gram-Schmidt completion failed");
    nalgebra::DMatrix::from_columns(&cols)
}

/// Quadrature rule over an arbitrary geodesic ball: polar cap rotated so the
/// pole lands on the ball's center. dV is unitarily invariant, so the
/// weights are unchanged; weighted integrands are evaluated post-rotation.
pub fn ball_rule(n: usize, degree: usize, ball: &BallRegion) -> QuadratureRule {
    let cap = QuadratureRule::cap(n, degree, ball.radius);
    let u = unitary_pole_to(&ball.center);
    let nodes = cap
        .nodes
        .iter()
        .map(|node| {
            let point = node.point.rotate(&u);
            let chart = point.chart_index();
            QuadNode {
                point,
                weight: node.weight,
                chart,
            }
        })
        .collect();
    QuadratureRule {
        nodes,
        degree,
        n,
    }
}

/// Deterministic low-discrepancy point set, asymptotically uniform with
/// respect to the reference volume dV (Kronecker sequence in coordinates in
/// which dV is a product measure). Used for sup-norm scans and certificates.
pub fn uniform_grid(n: usize, count: usize) -> Vec<ProjPoint> {
    // generalized golden ratios (plastic-number family)
    let frac = |x: f64| x - x.floor();
    let mut out = Vec::with_capacity(count);
    match n {
        1 => {
            let (a1, a2) = (0.7548776662466927, 0.5698402909980532);
            for i in 0..count {
                let s = frac(0.5 + a1 * i as f64);
                let th = 2.0 * std::f64::consts::PI * frac(0.5 + a2 * i as f64);
                let r = (s / (1.0 - s)).sqrt();
                out.push(ProjPoint::from_chart(&[Complex64::from_polar(r, th)]));
            }
        }
        2 => {
            let a = [
                0.8566748838545029,
                0.7338918566271259,
                0.6287067210378087,
                0.5385972572236101,
            ];
            for i in 0..count {
                // dV = (s/2) ds dv dtheta1 dtheta2: s-marginal CDF is s^2
                let s = frac(0.5 + a[0] * i as f64).sqrt();
                let v = frac(0.5 + a[1] * i as f64);
                let th1 = 2.0 * std::f64::consts::PI * frac(0.5 + a[2] * i as f64);
                let th2 = 2.0 * std::f64::consts::PI * frac(0.5 + a[3] * i as f64);
                let r = (s / (1.0 - s)).sqrt();
                out.push(ProjPoint::from_chart(&[
                    Complex64::from_polar(r * (1.0 - v).sqrt(), th1),
                    Complex64::from_polar(r * v.sqrt(), th2),
                ]));
            }
        }
        _ => panic!("dimension must be 1 or 2"),
    }
    out
}
