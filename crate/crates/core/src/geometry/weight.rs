use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GeometryError, ProjPoint};

/// One term `coef * zeta^a * conj(zeta)^b * (1 + |zeta|^2)^(-mpow)` of a
/// chart expression. The family is closed under Wirtinger derivatives, which
/// gives exact curvature Hessians without numerical differentiation.
#[derive(Debug, Clone)]
struct ChartTerm {
    coef: Complex64,
    a: Vec<usize>,
    b: Vec<usize>,
    mpow: usize,
}

#[derive(Debug, Clone, Default)]
struct TermSum {
    terms: Vec<ChartTerm>,
}

impl TermSum {
    fn simplify(mut self) -> TermSum {
        let mut map: HashMap<(Vec<usize>, Vec<usize>, usize), Complex64> = HashMap::new();
        for t in self.terms.drain(..) {
            *map.entry((t.a, t.b, t.mpow))
                .or_insert(Complex64::new(0.0, 0.0)) += t.coef;
        }
        let mut keys: Vec<_> = map.into_iter().collect();
        keys.sort_by(|x, y| x.0.cmp(&y.0));
        TermSum {
            terms: keys
                .into_iter()
                .filter(|(_, c)| c.norm() > 1e-300)
                .map(|((a, b, mpow), coef)| ChartTerm { coef, a, b, mpow })
                .collect(),
        }
    }

    /// d/d zeta_j
    fn d_z(&self, j: usize) -> TermSum {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.a[j] > 0 {
                let mut a = t.a.clone();
                a[j] -= 1;
                out.push(ChartTerm {
                    coef: t.coef * t.a[j] as f64,
                    a,
                    b: t.b.clone(),
                    mpow: t.mpow,
                });
            }
            if t.mpow > 0 {
                let mut b = t.b.clone();
                b[j] += 1;
                out.push(ChartTerm {
                    coef: -t.coef * t.mpow as f64,
                    a: t.a.clone(),
                    b,
                    mpow: t.mpow + 1,
                });
            }
        }
        TermSum { terms: out }.simplify()
    }

    /// d/d conj(zeta_j)
    fn d_zbar(&self, j: usize) -> TermSum {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.b[j] > 0 {
                let mut b = t.b.clone();
                b[j] -= 1;
                out.push(ChartTerm {
                    coef: t.coef * t.b[j] as f64,
                    a: t.a.clone(),
                    b,
                    mpow: t.mpow,
                });
            }
            if t.mpow > 0 {
                let mut a = t.a.clone();
                a[j] += 1;
                out.push(ChartTerm {
                    coef: -t.coef * t.mpow as f64,
                    a,
                    b: t.b.clone(),
                    mpow: t.mpow + 1,
                });
            }
        }
        TermSum { terms: out }.simplify()
    }

    fn eval(&self, zeta: &[Complex64]) -> Complex64 {
        let s = 1.0 + zeta.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.coef * s.powi(-(t.mpow as i32));
            for (j, z) in zeta.iter().enumerate() {
                if t.a[j] > 0 {
                    v *= z.powu(t.a[j] as u32);
                }
                if t.b[j] > 0 {
                    v *= z.conj().powu(t.b[j] as u32);
                }
            }
            acc += v;
        }
        acc
    }
}

/// Exact chart derivatives of the perturbation in one affine chart.
#[derive(Debug, Clone)]
struct ChartData {
    u: TermSum,
    /// du[j] = d u / d zeta_j
    du: Vec<TermSum>,
    /// hess[j][l] = d^2 u / d zeta_j d conj(zeta_l)
    hess: Vec<Vec<TermSum>>,
    /// d2[j][l] = d^2 u / d zeta_j d zeta_l (holomorphic-holomorphic)
    d2: Vec<Vec<TermSum>>,
}

/// A weight phi = log(1 + |z|^2) + t * u(z) on CP^n, with the perturbation
/// u(z) = sum c_{pq} z^p conj(z)^q / (1 + |z|^2)^m given by a Hermitian
/// coefficient array. Stored homogeneously, so u is smooth on all of CP^n
/// and evaluable in every affine chart.
#[derive(Debug, Clone)]
pub struct Weight {
    n: usize,
    m: usize,
    amplitude: f64,
    coeffs: Vec<(Vec<usize>, Vec<usize>, Complex64)>,
    charts: Vec<ChartData>,
    margin: f64,
}

impl Weight {
    pub fn fubini_study(n: usize) -> Weight {
        Weight::new(n, 0, 0.0, vec![]).expect("FS weight is admissible")
    }

    /// `coeffs`: (p, q, c) with p, q exponent vectors of length n and
    /// |p|, |q| <= m. Requires the array to be Hermitian (c_{qp} = conj(c_{pq}))
    /// and the resulting curvature to stay positive.
    pub fn new(
        n: usize,
        m: usize,
        amplitude: f64,
        coeffs: Vec<(Vec<usize>, Vec<usize>, Complex64)>,
    ) -> Result<Weight, GeometryError> {
        if n != 1 && n != 2 {
            return Err(GeometryError::BadDimension(n));
        }
        let mut map: HashMap<(Vec<usize>, Vec<usize>), Complex64> = HashMap::new();
        for (p, q, c) in &coeffs {
            if p.len() != n || q.len() != n {
                return Err(GeometryError::BadSpec(format!(
                    "exponent vectors must have length {n}"
                )));
            }
            let (dp, dq) = (p.iter().sum::<usize>(), q.iter().sum::<usize>());
            if dp > m {
                return Err(GeometryError::ExponentTooLarge(dp, m));
            }
            if dq > m {
                return Err(GeometryError::ExponentTooLarge(dq, m));
            }
            *map.entry((p.clone(), q.clone()))
                .or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        for ((p, q), c) in &map {
            let mirror = map
                .get(&(q.clone(), p.clone()))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            if (mirror - c.conj()).norm() > 1e-12 {
                return Err(GeometryError::NonHermitian);
            }
        }
        let mut flat: Vec<_> = map
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|((p, q), c)| (p, q, c))
            .collect();
        flat.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));

        let charts = (0..=n).map(|c| build_chart(n, m, &flat, c)).collect();
        let mut w = Weight {
            n,
            m,
            amplitude,
            coeffs: flat,
            charts,
            margin: 0.0,
        };
        w.margin = w.compute_margin();
        if !w.coeffs.is_empty() && amplitude != 0.0 && w.margin <= 0.0 {
            return Err(GeometryError::NotPositive(w.margin));
        }
        Ok(w)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn denominator_degree(&self) -> usize {
        self.m
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn is_fubini_study(&self) -> bool {
        self.coeffs.is_empty() || self.amplitude == 0.0
    }

    /// Extra polynomial degree the perturbation contributes to integrands
    /// (each factor e^{-ktu} is handled by quadrature margin, not exactness;
    /// this reports the rational degree of u itself).
    pub fn perturbation_degree(&self) -> usize {
        if self.is_fubini_study() {
            0
        } else {
            2 * self.m
        }
    }

    pub fn positivity_margin(&self) -> f64 {
        self.margin
    }

    /// The perturbation u at a point (chart-independent).
    pub fn u_value(&self, x: &ProjPoint) -> f64 {
        if self.is_fubini_study() {
            return 0.0;
        }
        let c = x.chart_index();
        self.charts[c].u.eval(&x.chart_coords(c)).re
    }

    /// Full chart potential phi = log(1+|zeta|^2) + t*u in the given chart.
    pub fn phi_chart(&self, chart: usize, zeta: &[Complex64]) -> f64 {
        let s = 1.0 + zeta.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let u = if self.is_fubini_study() {
            0.0
        } else {
            self.charts[chart].u.eval(zeta).re
        };
        s.ln() + self.amplitude * u
    }

    /// Complex Hessian d^2 phi / d zeta_j d conj(zeta_l) in the given chart.
    pub fn hessian_chart(
        &self,
        chart: usize,
        zeta: &[Complex64],
    ) -> nalgebra::DMatrix<Complex64> {
        let n = self.n;
        let s = 1.0 + zeta.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut h = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            for l in 0..n {
                let fs = if j == l {
                    Complex64::new(1.0 / s, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                } - zeta[j].conj() * zeta[l] / (s * s);
                let pert = if self.is_fubini_study() {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.charts[chart].hess[j][l].eval(zeta) * self.amplitude
                };
                h[(j, l)] = fs + pert;
            }
        }
        h
    }

    /// First Wirtinger derivatives d phi / d zeta_j.
    pub fn grad_chart(&self, chart: usize, zeta: &[Complex64]) -> Vec<Complex64> {
        let s = 1.0 + zeta.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (0..self.n)
            .map(|j| {
                let fs = zeta[j].conj() / s;
                let pert = if self.is_fubini_study() {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.charts[chart].du[j].eval(zeta) * self.amplitude
                };
                fs + pert
            })
            .collect()
    }

    /// Holomorphic-holomorphic second derivatives d^2 phi / d zeta_j d zeta_l.
    pub fn holo_hessian_chart(
        &self,
        chart: usize,
        zeta: &[Complex64],
    ) -> nalgebra::DMatrix<Complex64> {
        let n = self.n;
        let s = 1.0 + zeta.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut h = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            for l in 0..n {
                let fs = -zeta[j].conj() * zeta[l].conj() / (s * s);
                let pert = if self.is_fubini_study() {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.charts[chart].d2[j][l].eval(zeta) * self.amplitude
                };
                h[(j, l)] = fs + pert;
            }
        }
        h
    }

    /// Monge-Ampere density det(d^2 phi / d zeta d conj(zeta)) per unit
    /// Lebesgue area of the chart containing the largest homogeneous
    /// coordinate (so |zeta| <= sqrt(n) always).
    pub fn ma_density(&self, x: &ProjPoint) -> f64 {
        let c = x.chart_index();
        let h = self.hessian_chart(c, &x.chart_coords(c));
        match self.n {
            1 => h[(0, 0)].re,
            _ => (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re,
        }
    }

    /// Monge-Ampere density relative to the reference volume dV,
    /// dV = 2 (1+|zeta|^2)^{-(n+1)} d(Lebesgue). Chart-independent.
    pub fn ma_density_dv(&self, x: &ProjPoint) -> f64 {
        let c = x.chart_index();
        let s = 1.0
            + x.chart_coords(c)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>();
        self.ma_density(x) * s.powi(self.n as i32 + 1) / 2.0
    }

    /// Total Monge-Ampere mass m_phi(X) = pi^n / n! for every admissible
    /// weight (the perturbation is exact). Used for density normalizations.
    pub fn total_ma_mass(&self) -> f64 {
        let nfact = (1..=self.n).map(|i| i as f64).product::<f64>();
        std::f64::consts::PI.powi(self.n as i32) / nfact
    }

    /// Wirtinger gradient d u / d Z_a of the perturbation as a homogeneous
    /// function of the unit representative Z (each coefficient (p, q)
    /// corresponds to Z^A conj(Z)^B with A_0 = m - |p|, A_j = p_j).
    pub fn u_grad_homogeneous(&self, z: &[Complex64]) -> Vec<Complex64> {
        let dim = z.len();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        if self.is_fubini_study() {
            return out;
        }
        for (p, q, coef) in &self.coeffs {
            let mut hol = vec![self.m - p.iter().sum::<usize>()];
            hol.extend_from_slice(p);
            let mut anti = vec![self.m - q.iter().sum::<usize>()];
            anti.extend_from_slice(q);
            let mut base = *coef;
            for i in 0..dim {
                if anti[i] > 0 {
                    base *= z[i].conj().powu(anti[i] as u32);
                }
            }
            for a in 0..dim {
                if hol[a] == 0 {
                    continue;
                }
                let mut v = base * hol[a] as f64;
                for i in 0..dim {
                    let e = if i == a { hol[i] - 1 } else { hol[i] };
                    if e > 0 {
                        v *= z[i].powu(e as u32);
                    }
                }
                out[a] += v;
            }
        }
        out
    }

    fn compute_margin(&self) -> f64 {
        let mut min_eig = f64::INFINITY;
        for chart in 0..=self.n {
            for zeta in margin_grid(self.n) {
                let h = self.hessian_chart(chart, &zeta);
                let eig = match self.n {
                    1 => h[(0, 0)].re,
                    _ => {
                        // smallest eigenvalue of a 2x2 Hermitian matrix
                        let tr = h[(0, 0)].re + h[(1, 1)].re;
                        let det = (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re;
                        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
                        tr / 2.0 - disc
                    }
                };
                min_eig = min_eig.min(eig);
            }
        }
        min_eig
    }

    pub fn to_spec(&self) -> WeightSpec {
        WeightSpec {
            dimension: self.n,
            m: self.m,
            amplitude: self.amplitude,
            coefficients: self
                .coeffs
                .iter()
                .map(|(p, q, c)| {
                    let mut row: Vec<f64> = p.iter().map(|&e| e as f64).collect();
                    row.extend(q.iter().map(|&e| e as f64));
                    row.push(c.re);
                    row.push(c.im);
                    row
                })
                .collect(),
        }
    }
}

/// Grid of chart coordinates with |zeta| <= 1 per coordinate, dense enough
/// for the positivity margin scan.
fn margin_grid(n: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::new();
    if n == 1 {
        for ir in 0..=12 {
            let r = ir as f64 / 12.0;
            let nth = if ir == 0 { 1 } else { 24 };
            for it in 0..nth {
                let th = 2.0 * std::f64::consts::PI * it as f64 / nth as f64;
                out.push(vec![Complex64::from_polar(r, th)]);
            }
        }
    } else {
        for ir1 in 0..=5 {
            for ir2 in 0..=5 {
                let (r1, r2) = (ir1 as f64 / 5.0, ir2 as f64 / 5.0);
                let n1 = if ir1 == 0 { 1 } else { 8 };
                let n2 = if ir2 == 0 { 1 } else { 8 };
                for it1 in 0..n1 {
                    for it2 in 0..n2 {
                        let t1 = 2.0 * std::f64::consts::PI * it1 as f64 / n1 as f64;
                        let t2 = 2.0 * std::f64::consts::PI * it2 as f64 / n2 as f64;
                        out.push(vec![
                            Complex64::from_polar(r1, t1),
                            Complex64::from_polar(r2, t2),
                        ]);
                    }
                }
            }
        }
    }
    out
}

/// Express u in affine chart `c`. Each coefficient (p, q) corresponds to the
/// homogeneous term Z^A conj(Z)^B with A_0 = m - |p|, A_j = p_j (similarly B);
/// dividing by |Z_c|^{2m} yields a ChartTerm with denominator power m.
fn build_chart(
    n: usize,
    m: usize,
    coeffs: &[(Vec<usize>, Vec<usize>, Complex64)],
    c: usize,
) -> ChartData {
    let mut u = TermSum::default();
    for (p, q, coef) in coeffs {
        let mut hol = vec![m - p.iter().sum::<usize>()];
        hol.extend_from_slice(p);
        let mut anti = vec![m - q.iter().sum::<usize>()];
        anti.extend_from_slice(q);
        let a: Vec<usize> = (0..=n).filter(|&j| j != c).map(|j| hol[j]).collect();
        let b: Vec<usize> = (0..=n).filter(|&j| j != c).map(|j| anti[j]).collect();
        u.terms.push(ChartTerm {
            coef: *coef,
            a,
            b,
            mpow: m,
        });
    }
    let u = u.simplify();
    let du: Vec<TermSum> = (0..n).map(|j| u.d_z(j)).collect();
    let hess = (0..n)
        .map(|j| (0..n).map(|l| du[j].d_zbar(l)).collect())
        .collect();
    let d2 = (0..n)
        .map(|j| (0..n).map(|l| du[j].d_z(l)).collect())
        .collect();
    ChartData { u, du, hess, d2 }
}

/// JSON wire form of a Weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub dimension: usize,
    pub m: usize,
    pub amplitude: f64,
    /// Rows [p.., q.., re, im] with n exponents for p and for q.
    pub coefficients: Vec<Vec<f64>>,
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight, GeometryError> {
        let n = self.dimension;
        let mut coeffs = Vec::new();
        for row in &self.coefficients {
            if row.len() != 2 * n + 2 {
                return Err(GeometryError::BadSpec(format!(
                    "coefficient row must have {} entries, got {}",
                    2 * n + 2,
                    row.len()
                )));
            }
            let exp = |v: f64| -> Result<usize, GeometryError> {
                if v < 0.0 || v.fract() != 0.0 {
                    Err(GeometryError::BadSpec(format!("bad exponent {v}")))
                } else {
                    Ok(v as usize)
                }
            };
            let p: Vec<usize> = row[..n].iter().map(|&v| exp(v)).collect::<Result<_, _>>()?;
            let q: Vec<usize> = row[n..2 * n]
                .iter()
                .map(|&v| exp(v))
                .collect::<Result<_, _>>()?;
            coeffs.push((p, q, Complex64::new(row[2 * n], row[2 * n + 1])));
        }
        Weight::new(n, self.m, self.amplitude, coeffs)
    }
}
