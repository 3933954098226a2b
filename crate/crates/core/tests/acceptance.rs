//! Acceptance suite: one test per acceptance criterion, each printing a
//! single pass/fail line. Expensive artifacts (section spaces, Fekete
//! configurations) are shared through the process-wide cache.

use std::time::Instant;

use num_complex::Complex64;

use fekete_lab::bergman::{fock_error, l1_bounds, least_squares, tian_error, SectionSpace};
use fekete_lab::cache;
use fekete_lab::fekete::{dual_sections, lagrange_sections, SolveOptions};
use fekete_lab::frames::{
    self, density_report, l2_constants, l2_interp_constant, localized_interpolant,
    make_perturbed_fekete, make_spiral, scaled_separation, simultaneity_probe,
};
use fekete_lab::geometry::{
    ball_rule, fs_distance, uniform_grid, BallRegion, ProjPoint, QuadratureRule, Weight,
};
use fekete_lab::landau::{
    build_concentration, count_bounds, interpolation_count_check, offdiag_mass,
    sampling_count_check, spectral_report, submean_constant,
};
use fekete_lab::report::equidistribution_table;
use fekete_lab::transport::{
    bergman_measure, coupling_upper, emd_atoms_vs_cells, equilibrium_measure, lipschitz_lower,
    AtomicMeasure,
};

const PI: f64 = std::f64::consts::PI;

fn opts() -> SolveOptions {
    SolveOptions {
        restarts: 2,
        seed: 1,
        ..Default::default()
    }
}

fn bumpy() -> Weight {
    let c = Complex64::new;
    Weight::new(
        1,
        2,
        1.0,
        vec![
            (vec![1], vec![0], c(0.10, 0.02)),
            (vec![0], vec![1], c(0.10, -0.02)),
            (vec![1], vec![1], c(0.15, 0.0)),
            (vec![2], vec![0], c(0.0, 0.05)),
            (vec![0], vec![2], c(0.0, -0.05)),
        ],
    )
    .unwrap()
}

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {name} failed: {detail}");
}

fn band(vals: &[f64]) -> f64 {
    let hi = vals.iter().cloned().fold(0.0f64, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn binomial(k: usize, j: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..j.min(k - j) {
        acc = acc * (k - i) as f64 / (i + 1) as f64;
    }
    acc
}

struct IdentityErrors {
    lagrange: f64,
    dual_pairing: f64,
    dual_tiling: f64,
    dual_modulus: f64,
    reproducing: f64,
}

fn identity_errors(s: &SectionSpace, points: &[ProjPoint]) -> IdentityErrors {
    let lagr = lagrange_sections(s, points).unwrap();
    let dual = dual_sections(s, points);
    let n = s.manifold_dim();

    let mut lagrange: f64 = 0.0;
    for (i, x) in points.iter().enumerate() {
        let vals = lagr.eval_all(s, x);
        for (j, v) in vals.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            lagrange = lagrange.max((v.norm() - expect).abs());
        }
    }

    let mut dual_pairing: f64 = 0.0;
    for l in 0..points.len() {
        let lc = lagr.coeffs.column(l).into_owned();
        let dc = dual.coeffs.column(l).into_owned();
        let val = s.rule().integrate(|x| {
            let v = s.eval_onb(x);
            v.dot(&lc) * v.dot(&dc).conj()
        });
        dual_pairing = dual_pairing.max((val - Complex64::from(1.0)).norm());
    }

    let sample = uniform_grid(n, 50);
    let mut dual_tiling: f64 = 0.0;
    let mut dual_modulus: f64 = 0.0;
    for x in &sample {
        let lv = lagr.eval_all(s, x);
        let pv = dual.eval_all(s, x);
        let lhs: Complex64 = lv.iter().zip(pv.iter()).map(|(a, b)| a * b.conj()).sum();
        dual_tiling = dual_tiling.max((lhs - Complex64::from(s.bergman_function(x))).norm());
        for (l, lam) in points.iter().enumerate() {
            dual_modulus = dual_modulus.max((pv[l].norm() - s.kernel(x, lam).norm()).abs());
        }
    }

    let mut reproducing: f64 = 0.0;
    for x in uniform_grid(n, 10) {
        let direct = s.rule().integrate_real(|y| s.kernel(&x, y).norm_sqr());
        reproducing = reproducing.max((direct - s.bergman_function(&x)).abs());
    }

    IdentityErrors {
        lagrange,
        dual_pairing,
        dual_tiling,
        dual_modulus,
        reproducing,
    }
}

#[test]
fn criterion_01_exact_identities() {
    let started = Instant::now();
    let cases = [(Weight::fubini_study(1), 16usize), (bumpy(), 10)];
    let mut worst = IdentityErrors {
        lagrange: 0.0,
        dual_pairing: 0.0,
        dual_tiling: 0.0,
        dual_modulus: 0.0,
        reproducing: 0.0,
    };
    let mut worst_trace: f64 = 0.0;
    let mut worst_hs: f64 = 0.0;
    for (w, k) in cases {
        let s = cache::section_space(&w, k).unwrap();
        let cfg = cache::fekete_config(&w, k, &opts()).unwrap();
        let e = identity_errors(&s, &cfg.points);
        worst.lagrange = worst.lagrange.max(e.lagrange);
        worst.dual_pairing = worst.dual_pairing.max(e.dual_pairing);
        worst.dual_tiling = worst.dual_tiling.max(e.dual_tiling);
        worst.dual_modulus = worst.dual_modulus.max(e.dual_modulus);
        worst.reproducing = worst.reproducing.max(e.reproducing);
        // concentration trace/HS identities on 5 caps
        let centers = uniform_grid(1, 11);
        for i in 0..5 {
            let region = BallRegion::new(centers[2 * i + 1].clone(), 0.3 + 0.12 * i as f64).unwrap();
            let op = build_concentration(&s, &region).unwrap();
            let rep = spectral_report(&op, &[0.5]);
            let rule = ball_rule(1, s.rule().degree + 9, &region);
            let trace_direct = rule.integrate_real(|x| s.bergman_function(x));
            worst_trace = worst_trace.max((rep.trace - trace_direct).abs());
            let mut hs_direct = 0.0;
            for node in &rule.nodes {
                hs_direct +=
                    node.weight * rule.integrate_real(|y| s.kernel(&node.point, y).norm_sqr());
            }
            worst_hs = worst_hs.max((rep.hs2 - hs_direct).abs());
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst.lagrange <= 1e-10
        && worst.dual_pairing <= 1e-8
        && worst.dual_modulus <= 1e-10
        && worst.dual_tiling <= 1e-8
        && worst.reproducing <= 1e-8
        && worst_trace <= 1e-8
        && worst_hs <= 1e-6
        && elapsed < 300.0;
    verdict(
        "01 exact-identities",
        pass,
        &format!(
            "lagrange {:.2e}, pairing {:.2e}, modulus {:.2e}, tiling {:.2e}, reproducing {:.2e}, trace {:.2e}, hs {:.2e}, {:.0}s",
            worst.lagrange,
            worst.dual_pairing,
            worst.dual_modulus,
            worst.dual_tiling,
            worst.reproducing,
            worst_trace,
            worst_hs,
            elapsed
        ),
    );
}

#[test]
fn criterion_02_fs_closed_forms() {
    let w = Weight::fubini_study(1);
    let mut worst_bergman: f64 = 0.0;
    let mut worst_gram: f64 = 0.0;
    for k in [1usize, 2, 4, 8, 16, 32, 64] {
        let s = cache::section_space(&w, k).unwrap();
        let target = (k + 1) as f64 / (2.0 * PI);
        for x in uniform_grid(1, 100) {
            worst_bergman = worst_bergman.max((s.bergman_function(&x) - target).abs());
        }
        let g = s.gram();
        for (idx, e) in s.exponents().iter().enumerate() {
            let closed = 2.0 * PI / ((k + 1) as f64 * binomial(k, e[0]));
            worst_gram = worst_gram.max((g[(idx, idx)].re - closed).abs() / closed);
            for l in 0..=k {
                if l != idx {
                    worst_gram = worst_gram.max(g[(idx, l)].norm() / closed);
                }
            }
        }
    }
    let mass = QuadratureRule::full(1, 30).integrate_real(|x| w.ma_density_dv(x));
    let mass_err = (mass - PI).abs();
    let pass = worst_bergman <= 1e-8 && worst_gram <= 1e-10 && mass_err <= 1e-10;
    verdict(
        "02 fs-closed-forms",
        pass,
        &format!("bergman {worst_bergman:.2e}, gram rel {worst_gram:.2e}, mass {mass_err:.2e}"),
    );
}

#[test]
fn criterion_03_equidistribution() {
    let started = Instant::now();
    let ks = [16usize, 32, 64];
    let mut detail = String::new();
    let mut pass = true;
    for (label, w) in [("fs", Weight::fubini_study(1)), ("perturbed", bumpy())] {
        let (_, sups) = equidistribution_table(&w, &ks, &opts(), 100).unwrap();
        for pair in sups.windows(2) {
            let ratio = pair[1].1 / pair[0].1;
            pass &= ratio < 2.0 && ratio > 0.5;
        }
        detail.push_str(&format!(
            "{label} sups {:?}; ",
            sups.iter().map(|s| (s.0, (s.1 * 100.0).round() / 100.0)).collect::<Vec<_>>()
        ));
    }
    let elapsed = started.elapsed().as_secs_f64();
    pass &= elapsed < 1800.0;
    verdict(
        "03 equidistribution",
        pass,
        &format!("{detail}{elapsed:.0}s"),
    );
}

#[test]
fn criterion_04_wasserstein_rate() {
    let w = Weight::fubini_study(1);
    let ks = [8usize, 16, 32, 64];
    let nu = equilibrium_measure(&w, 30 * (ks.iter().max().unwrap() + 1));
    let mut values = Vec::new();
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    let mut sandwich = true;
    for &k in &ks {
        let s = cache::section_space(&w, k).unwrap();
        let cfg = cache::fekete_config(&w, k, &opts()).unwrap();
        let mu = AtomicMeasure::new(cfg.points.clone());
        let plan = emd_atoms_vs_cells(&mu, &nu).unwrap();
        assert!(plan.duality_gap < 1e-8 && plan.dual_infeasibility < 1e-8);
        let lower = lipschitz_lower(&mu, &nu);
        let lagr = lagrange_sections(&s, &cfg.points).unwrap();
        let dual = dual_sections(&s, &cfg.points);
        let upper = coupling_upper(&s, &cfg.points, &lagr, &dual);
        // the explicit coupling bounds transport to the Bergman measure
        let nuk = bergman_measure(&s, 30 * cfg.points.len());
        let vk = emd_atoms_vs_cells(&mu, &nuk).unwrap().value;
        sandwich &= lower <= plan.value + 1e-9 && vk <= upper + 1e-9;
        values.push(plan.value);
        lowers.push(lower * (k as f64).sqrt());
        uppers.push(upper * (k as f64).sqrt());
    }
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    let min_lower = lowers.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = (-0.65..=-0.35).contains(&slope)
        && min_lower >= 0.05
        && band(&uppers) < 2.0
        && sandwich;
    verdict(
        "04 wasserstein-rate",
        pass,
        &format!(
            "slope {slope:.3}, min lower*sqrt(k) {min_lower:.3}, upper band {:.2}, sandwich {sandwich}",
            band(&uppers)
        ),
    );
}

#[test]
fn criterion_05_landau_counting() {
    let w = Weight::fubini_study(1);
    let centers = uniform_grid(1, 23);
    let mut pass = true;
    let mut fails = 0usize;
    for &k in &[16usize, 32] {
        let s = cache::section_space(&w, k).unwrap();
        let samp = cache::fekete_config(&w, 3 * k / 2, &opts()).unwrap();
        let interp = cache::fekete_config(&w, 3 * k / 4, &opts()).unwrap();
        let (_, b_const) = l2_constants(&s, &samp.points).unwrap();
        let c_const = l2_interp_constant(&s, &interp.points).unwrap();
        let delta_s = scaled_separation(&samp.points, k);
        let delta_i = scaled_separation(&interp.points, k);
        let ks_sub = submean_constant(&s, delta_s, 7 + k as u64);
        let ki_sub = submean_constant(&s, delta_i, 11 + k as u64);
        for i in 0..10 {
            let z = centers[(3 * i + k as usize) % centers.len()].clone();
            let r = 0.8 + 0.2 * i as f64;
            let rec = sampling_count_check(&s, &samp.points, &z, r, delta_s, b_const, ks_sub);
            if !rec.holds {
                fails += 1;
            }
            pass &= rec.holds;
            let rec =
                interpolation_count_check(&s, &interp.points, &z, r, delta_i, c_const, ki_sub);
            if !rec.holds {
                fails += 1;
            }
            pass &= rec.holds;
        }
        // eigenvalue-count sandwich with quadrature error terms
        for i in 0..3 {
            let region =
                BallRegion::new(centers[(5 * i + 2) % centers.len()].clone(), 0.35 + 0.2 * i as f64)
                    .unwrap();
            let op = build_concentration(&s, &region).unwrap();
            let rep = spectral_report(&op, &[0.5]);
            let mass = offdiag_mass(&s, &region);
            let (lo, hi) = count_bounds(rep.trace, mass, 0.5);
            let count = rep.counts[0].1 as f64;
            pass &= count >= lo - 1e-9 && count <= hi + 1e-9;
        }
    }
    verdict(
        "05 landau-counting",
        pass,
        &format!("count inequalities at 2x10 random (z,r) with {fails} violations; sandwich at 6 caps"),
    );
}

#[test]
fn criterion_06_density() {
    let w = Weight::fubini_study(1);
    let fekete = frames::make_fekete_family(&w, &[16, 32, 64, 128], &opts()).unwrap();
    let big_r = [2.0, 4.0, 8.0];
    let fr = density_report(&w, &fekete, &big_r, 96);
    let crit = 1.0 / PI;
    let estimate = 0.5 * (fr.d_minus + fr.d_plus);
    let fekete_ok = (estimate - crit).abs() / crit < 0.10;
    let spiral = make_spiral(&w, 1.25, &[32, 64]);
    let sr = density_report(&w, &spiral, &big_r, 96);
    let target = 1.25 / PI;
    let spiral_ok = (sr.d_minus - target).abs() / target < 0.10;
    let ms: Vec<f64> = fr.fitted_m.iter().map(|&(_, m)| m.abs().max(1e-9)).collect();
    let step = ms
        .windows(2)
        .map(|p| (p[1] / p[0]).max(p[0] / p[1]))
        .fold(1.0f64, f64::max);
    let m_ok = ms.iter().all(|m| m.is_finite()) && step < 2.0;
    let pass = fekete_ok && spiral_ok && m_ok;
    verdict(
        "06 density",
        pass,
        &format!(
            "fekete estimate {estimate:.4} vs {crit:.4}, spiral d- {:.4} vs {target:.4}, M successive step {step:.2} ({:?})",
            sr.d_minus,
            ms.iter().map(|m| (m * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_07_perturbed_fekete_constants() {
    let w = Weight::fubini_study(1);
    let ks = [8usize, 16, 24, 32, 40, 48];
    let samp = make_perturbed_fekete(&w, 0.5, 1, &ks, &opts()).unwrap();
    let interp = make_perturbed_fekete(&w, 0.25, -1, &ks, &opts()).unwrap();
    let mut ratios = Vec::new();
    let mut cs = Vec::new();
    for &k in &ks {
        let s = cache::section_space(&w, k).unwrap();
        let (a, b) = l2_constants(&s, &samp.levels[&k]).unwrap();
        ratios.push(b / a);
        cs.push(l2_interp_constant(&s, &interp.levels[&k]).unwrap());
    }
    // localized interpolant scaling in eps at a fixed total level
    let k = 16usize;
    let ratio_at = |eps: f64| {
        let k2 = ((eps * k as f64) / 2.0).round() as usize;
        let m = k - 2 * k2;
        let s_total = cache::section_space(&w, k).unwrap();
        let s_nodes = cache::section_space(&w, m).unwrap();
        let s_kernel = cache::section_space(&w, k2).unwrap();
        let cfg = cache::fekete_config(&w, m, &opts()).unwrap();
        let v: Vec<Complex64> = (0..cfg.points.len())
            .map(|i| Complex64::from_polar(1.0, 2.4 * i as f64))
            .collect();
        let rep =
            localized_interpolant(&s_total, &s_nodes, &s_kernel, &cfg.points, &v).unwrap();
        assert!(rep.max_node_error <= 1e-8);
        rep.ratio
    };
    let r25 = ratio_at(0.25);
    let r50 = ratio_at(0.5);
    let pass = band(&ratios) < 2.0 && band(&cs) < 2.0 && r25 / r50 <= 8.0;
    verdict(
        "07 perturbed-fekete-constants",
        pass,
        &format!(
            "B/A band {:.2}, C band {:.2}, interpolant ratio(0.25)/ratio(0.5) {:.2}",
            band(&ratios),
            band(&cs),
            r25 / r50
        ),
    );
}

#[test]
fn criterion_08_dim1_thresholds() {
    let w = Weight::fubini_study(1);
    let ks = [8usize, 16, 32, 64];
    let over = make_spiral(&w, 1.25, &ks);
    let under = make_spiral(&w, 0.8, &ks);
    let mut bs = Vec::new();
    let mut cs = Vec::new();
    for &k in &ks {
        let s = cache::section_space(&w, k).unwrap();
        let (_, b) = l2_constants(&s, &over.levels[&k]).unwrap();
        bs.push(b);
        cs.push(l2_interp_constant(&s, &under.levels[&k]).unwrap());
    }
    let probe = simultaneity_probe(&w, &ks, &opts()).unwrap();
    let increasing = probe.windows(2).all(|p| p[1].m > p[0].m);
    let pass = bs.iter().all(|b| b.is_finite())
        && band(&bs) < 2.0
        && cs.iter().all(|c| c.is_finite())
        && band(&cs) < 2.0
        && increasing;
    verdict(
        "08 dim1-thresholds",
        pass,
        &format!(
            "spiral(1.25) B band {:.2}, spiral(0.8) C band {:.2}, probe m_k {:?} increasing {increasing}",
            band(&bs),
            band(&cs),
            probe.iter().map(|p| (p.k, (p.m * 100.0).round() / 100.0)).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_09_kernel_asymptotics() {
    let w = bumpy();
    let ks = [16usize, 32, 64];
    let center = uniform_grid(1, 7)[3].clone();
    let mut tian_cs = Vec::new();
    let mut fock_errors = Vec::new();
    let mut sup_ints = Vec::new();
    let mut offdiags = Vec::new();
    let mut moments = Vec::new();
    for &k in &ks {
        let s = cache::section_space(&w, k).unwrap();
        tian_cs.push(tian_error(&s) * k as f64);
        fock_errors.push(fock_error(&s, &center, 2.0).unwrap());
        let lb = l1_bounds(&s, &center, 2.0);
        sup_ints.push(lb.sup_integral);
        offdiags.push(lb.offdiag_l1 / 2.0); // divided by R^{2n-1} with R = 2, n = 1
        moments.push(lb.moment * (k as f64).sqrt());
    }
    let fock_decreasing = fock_errors.windows(2).all(|w| w[1] < w[0]);
    let pass = band(&tian_cs) < 2.0
        && fock_decreasing
        && band(&sup_ints) < 2.0
        && band(&offdiags) < 2.0
        && band(&moments) < 2.0;
    verdict(
        "09 kernel-asymptotics",
        pass,
        &format!(
            "tian C band {:.2}, fock {:?} decreasing {fock_decreasing}, L1 bands {:.2}/{:.2}/{:.2}",
            band(&tian_cs),
            fock_errors.iter().map(|e| (e * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            band(&sup_ints),
            band(&offdiags),
            band(&moments)
        ),
    );
}

#[test]
fn criterion_10_cp2_smoke() {
    let started = Instant::now();
    let w = Weight::fubini_study(2);
    let pi2 = PI * PI;

    // Bergman function constant = dim / Vol(CP^2)
    let mut worst_bergman: f64 = 0.0;
    for k in [2usize, 6] {
        let s = cache::section_space(&w, k).unwrap();
        let target = s.dimension() as f64 / pi2;
        for x in uniform_grid(2, 100) {
            worst_bergman = worst_bergman.max((s.bergman_function(&x) - target).abs());
        }
    }

    // monomial Gram closed form at k = 4
    let s4 = cache::section_space(&w, 4).unwrap();
    let mut worst_gram: f64 = 0.0;
    let g = s4.gram();
    let fact = |x: usize| (1..=x).map(|i| i as f64).product::<f64>();
    for (idx, e) in s4.exponents().iter().enumerate() {
        let (a, b) = (e[1], e[2]);
        let closed = 2.0 * pi2 * fact(a) * fact(b) * fact(4 - a - b) / fact(6);
        worst_gram = worst_gram.max((g[(idx, idx)].re - closed).abs() / closed);
        for l in 0..s4.dimension() {
            if l != idx {
                worst_gram = worst_gram.max(g[(idx, l)].norm() / closed);
            }
        }
    }

    // total curvature mass
    let mass = QuadratureRule::full(2, 24).integrate_real(|x| w.ma_density_dv(x));
    let mass_err = (mass - pi2 / 2.0).abs();

    // identities at a Fekete configuration, k = 3
    let s3 = cache::section_space(&w, 3).unwrap();
    let cfg3 = cache::fekete_config(&w, 3, &opts()).unwrap();
    let e = identity_errors(&s3, &cfg3.points);
    let rule = QuadratureRule::full(2, 20);
    let trace_err =
        (rule.integrate_real(|x| s3.bergman_function(x)) - s3.dimension() as f64).abs();

    // density constant against 1/pi^2: ball counts of the k = 8 Fekete
    // configuration, with k^n replaced by the exact n! N_k normalization
    let s8 = cache::section_space(&w, 8).unwrap();
    let cfg8 = cache::fekete_config(&w, 8, &opts()).unwrap();
    let nk = s8.dimension() as f64;
    let mut est = Vec::new();
    for x in uniform_grid(2, 20) {
        for r in [0.7f64, 1.0] {
            let ball = BallRegion::new(x.clone(), r).unwrap();
            let m = frames::ball_mass(&w, &ball);
            let count = cfg8.points.iter().filter(|p| fs_distance(p, &x) <= r).count();
            est.push(count as f64 / (2.0 * nk * m));
        }
    }
    let density = est.iter().sum::<f64>() / est.len() as f64;
    let density_ok = (density - 1.0 / pi2).abs() * pi2 < 0.10;

    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_bergman <= 1e-8
        && worst_gram <= 1e-10
        && mass_err <= 1e-10
        && e.lagrange <= 1e-10
        && e.dual_pairing <= 1e-8
        && e.dual_tiling <= 1e-8
        && e.dual_modulus <= 1e-10
        && e.reproducing <= 1e-8
        && trace_err <= 1e-8
        && density_ok
        && elapsed < 1200.0;
    verdict(
        "10 cp2-smoke",
        pass,
        &format!(
            "bergman {worst_bergman:.2e}, gram {worst_gram:.2e}, mass {mass_err:.2e}, lagrange {:.2e}, tiling {:.2e}, trace {trace_err:.2e}, density {density:.4} vs {:.4}, {elapsed:.0}s",
            e.lagrange,
            e.dual_tiling,
            1.0 / pi2
        ),
    );
}
