//! Experiment configuration, batch orchestration, and report emission for
//! the command-line interface.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bergman::{fock_error, l1_bounds, tian_error, SectionSpace};
use crate::cache;
use crate::fekete::{dual_sections, lagrange_sections, SolveOptions};
use crate::frames::{
    self, density_report, make_perturbed_fekete, make_spiral, scaled_separation,
};
use crate::geometry::{
    fs_distance, uniform_grid, BallRegion, ProjPoint, QuadratureRule, Weight, WeightSpec,
};
use crate::landau::{
    build_concentration, count_bounds, offdiag_mass, spectral_report, DEFAULT_GAMMAS,
};
use crate::transport::{
    coupling_upper, emd_atoms_vs_cells, equilibrium_measure, lipschitz_lower, AtomicMeasure,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

macro_rules! fail_from {
    ($t:ty) => {
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Failed(e.to_string())
            }
        }
    };
}
fail_from!(crate::bergman::BergmanError);
fail_from!(crate::fekete::FeketeError);
fail_from!(crate::frames::FramesError);
fail_from!(crate::transport::TransportError);
fail_from!(crate::geometry::GeometryError);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// perturbed weight; absent means the unperturbed weight in `dimension`
    pub weight: Option<WeightSpec>,
    pub dimension: usize,
    pub k: usize,
    pub k_range: Vec<usize>,
    pub seed: u64,
    /// 0 means the solver default
    pub restarts: usize,
    pub cert_tol: f64,
    pub eps: f64,
    pub sign: i8,
    pub density_factor: f64,
    pub r_grid: Vec<f64>,
    pub x_grid: usize,
    pub gammas: Vec<f64>,
    pub quad_degree: Option<usize>,
    pub mesh_cells_per_atom: usize,
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            weight: None,
            dimension: 1,
            k: 8,
            k_range: vec![8, 16, 32, 64],
            seed: 1,
            restarts: 0,
            cert_tol: 1e-3,
            eps: 0.5,
            sign: 1,
            density_factor: 1.25,
            r_grid: vec![2.0, 4.0, 8.0],
            x_grid: 100,
            gammas: DEFAULT_GAMMAS.to_vec(),
            quad_degree: None,
            mesh_cells_per_atom: 30,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn weight(&self) -> Result<Weight, RunError> {
        match &self.weight {
            Some(spec) => spec.build().map_err(|e| RunError::Config(e.to_string())),
            None => Ok(Weight::fubini_study(self.dimension)),
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            restarts: self.restarts,
            seed: self.seed,
            tol: self.cert_tol,
            ..Default::default()
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: String,
}

impl Check {
    fn new(name: &str, passed: bool, value: f64, tolerance: &str) -> Self {
        Check {
            name: name.to_string(),
            passed,
            value,
            tolerance: tolerance.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub version: String,
    pub checks: Vec<Check>,
    pub payload: serde_json::Value,
}

impl Report {
    fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        Report {
            command: command.to_string(),
            config: cfg.clone(),
            config_sha256: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            checks: Vec::new(),
            payload: serde_json::Value::Null,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run(command: &str, cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let report = match command {
        "space" => run_space(cfg)?,
        "fekete" => run_fekete(cfg)?,
        "landau" => run_landau(cfg)?,
        "frames" => run_frames(cfg)?,
        "density" => run_density(cfg)?,
        "wasserstein" => run_wasserstein(cfg)?,
        "fock-check" => run_fock_check(cfg)?,
        "full-report" => run_full_report(cfg)?,
        other => return Err(RunError::Config(format!("unknown command {other}"))),
    };
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        let path = Path::new(dir).join(format!("{}.json", report.command));
        std::fs::write(path, report.to_json())?;
    }
    Ok(report)
}

fn space(cfg: &ExperimentConfig, k: usize) -> Result<std::sync::Arc<SectionSpace>, RunError> {
    let w = cfg.weight()?;
    match cfg.quad_degree {
        None => Ok(cache::section_space(&w, k)?),
        Some(deg) => {
            let rule = QuadratureRule::full(w.dimension(), deg);
            Ok(std::sync::Arc::new(SectionSpace::build(w, k, rule)?))
        }
    }
}

fn run_space(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("space", cfg);
    let s = space(cfg, cfg.k)?;
    let tian = tian_error(&s);
    let n = s.manifold_dim();
    let k = cfg.k;
    if s.weight().is_fubini_study() {
        // the Bergman function is the constant dim / Vol
        let vol = match n {
            1 => 2.0 * std::f64::consts::PI,
            _ => std::f64::consts::PI.powi(2),
        };
        let target = s.dimension() as f64 / vol;
        let mut dev: f64 = 0.0;
        for x in uniform_grid(n, 120) {
            dev = dev.max((s.bergman_function(&x) - target).abs());
        }
        rep.checks
            .push(Check::new("bergman_constant", dev <= 1e-8, dev, "<= 1e-8"));
    }
    rep.checks.push(Check::new(
        "gram_condition_finite",
        s.gram_condition().is_finite(),
        s.gram_condition(),
        "finite",
    ));
    rep.payload = serde_json::json!({
        "k": k,
        "dimension": s.dimension(),
        "quad_degree": s.rule().degree,
        "gram_condition": s.gram_condition(),
        "tian_error": tian,
        "tian_c": tian * k as f64,
    });
    Ok(rep)
}

fn run_fekete(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("fekete", cfg);
    let w = cfg.weight()?;
    let cfg_pts = cache::fekete_config(&w, cfg.k, &cfg.solve_options())?;
    rep.checks.push(Check::new(
        "certificate",
        cfg_pts.certificate.certified,
        cfg_pts.certificate.max_lagrange_sup,
        &format!("grid sup <= 1 + {}", cfg.cert_tol),
    ));
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        write_points_csv(
            &Path::new(dir).join(format!("fekete_k{}.csv", cfg.k)),
            &cfg_pts.points,
        )?;
    }
    rep.payload = serde_json::json!({
        "k": cfg.k,
        "count": cfg_pts.points.len(),
        "objective": cfg_pts.objective,
        "certificate": cfg_pts.certificate,
        "meta": cfg_pts.meta,
    });
    Ok(rep)
}

fn run_landau(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("landau", cfg);
    let s = space(cfg, cfg.k)?;
    let n = s.manifold_dim();
    let centers = uniform_grid(n, 11);
    let mut payload = Vec::new();
    let mut worst_trace: f64 = 0.0;
    let mut worst_hs: f64 = 0.0;
    let mut eig_ok = true;
    let mut sandwich_ok = true;
    for i in 0..3 {
        let center = centers[(cfg.seed as usize + 3 * i) % centers.len()].clone();
        let radius = 0.3 + 0.15 * i as f64;
        let region = BallRegion::new(center, radius)?;
        let op = build_concentration(&s, &region)?;
        let srep = spectral_report(&op, &cfg.gammas);
        let rule = crate::geometry::ball_rule(n, s.rule().degree + 9, &region);
        let trace_direct = rule.integrate_real(|x| s.bergman_function(x));
        worst_trace = worst_trace.max((srep.trace - trace_direct).abs());
        let mass = offdiag_mass(&s, &region);
        worst_hs = worst_hs.max((mass - (srep.trace - srep.hs2)).abs());
        for l in &srep.eigenvalues {
            eig_ok &= *l >= -1e-8 && *l <= 1.0 + 1e-8;
        }
        let (lo, hi) = count_bounds(srep.trace, mass, 0.5);
        let count_half = srep
            .eigenvalues
            .iter()
            .filter(|&&l| l > 0.5)
            .count() as f64;
        sandwich_ok &= count_half >= lo - 1e-9 && count_half <= hi + 1e-9;
        payload.push(serde_json::to_value(&srep).unwrap());
    }
    rep.checks
        .push(Check::new("trace_identity", worst_trace <= 1e-8, worst_trace, "<= 1e-8"));
    rep.checks
        .push(Check::new("hs_identity", worst_hs <= 1e-6, worst_hs, "<= 1e-6"));
    rep.checks
        .push(Check::new("spectrum_in_unit_interval", eig_ok, f64::from(u8::from(eig_ok)), "[0,1] +- 1e-8"));
    rep.checks.push(Check::new(
        "count_sandwich",
        sandwich_ok,
        f64::from(u8::from(sandwich_ok)),
        "trace - off/(1-g) <= n(g) <= trace + off/g",
    ));
    rep.payload = serde_json::Value::Array(payload);
    Ok(rep)
}

fn band(vals: &[f64]) -> f64 {
    let hi = vals.iter().cloned().fold(0.0f64, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Largest ratio between successive entries, whichever direction.
fn successive_band(vals: &[f64]) -> f64 {
    vals.windows(2)
        .map(|p| (p[1] / p[0]).max(p[0] / p[1]))
        .fold(1.0, f64::max)
}

fn run_frames(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("frames", cfg);
    let w = cfg.weight()?;
    let opts = cfg.solve_options();
    let samp = make_perturbed_fekete(&w, cfg.eps, 1, &cfg.k_range, &opts)?;
    let interp = make_perturbed_fekete(&w, cfg.eps / 2.0, -1, &cfg.k_range, &opts)?;
    let mut ratios = Vec::new();
    let mut cs = Vec::new();
    let mut payload = Vec::new();
    for &k in &cfg.k_range {
        let s = cache::section_space(&w, k)?;
        let lc_s = frames::level_constants(&s, &samp.levels[&k])?;
        let lc_i = frames::level_constants(&s, &interp.levels[&k])?;
        ratios.push(lc_s.b / lc_s.a);
        cs.push(lc_i.c);
        payload.push(serde_json::json!({
            "k": k, "sampling": lc_s, "interpolation": lc_i,
        }));
    }
    rep.checks.push(Check::new(
        "sampling_ratio_band",
        band(&ratios) < 2.0,
        band(&ratios),
        "max/min < 2 over sweep",
    ));
    rep.checks.push(Check::new(
        "interpolation_constant_band",
        band(&cs) < 2.0,
        band(&cs),
        "max/min < 2 over sweep",
    ));
    rep.payload = serde_json::Value::Array(payload);
    Ok(rep)
}

fn run_density(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("density", cfg);
    let w = cfg.weight()?;
    let n = w.dimension();
    let crit = std::f64::consts::PI.powi(-(n as i32));
    let opts = cfg.solve_options();
    let fekete = frames::make_fekete_family(&w, &cfg.k_range, &opts)?;
    let fr = density_report(&w, &fekete, &cfg.r_grid, 96.min(cfg.x_grid));
    let estimate = 0.5 * (fr.d_minus + fr.d_plus);
    rep.checks.push(Check::new(
        "fekete_density",
        (estimate - crit).abs() / crit < 0.10,
        estimate,
        &format!("within 10% of {crit:.6}"),
    ));
    let ms: Vec<f64> = fr.fitted_m.iter().map(|&(_, m)| m.abs().max(1e-12)).collect();
    let step = successive_band(&ms);
    rep.checks.push(Check::new(
        "fitted_m_stable",
        ms.iter().all(|m| m.is_finite()) && step < 2.0,
        step,
        "successive variation < 2 over R grid",
    ));
    let mut payload = serde_json::json!({ "fekete": fr });
    if n == 1 {
        let spiral = make_spiral(&w, cfg.density_factor, &cfg.k_range);
        let sr = density_report(&w, &spiral, &cfg.r_grid, 96.min(cfg.x_grid));
        let target = cfg.density_factor * crit;
        rep.checks.push(Check::new(
            "spiral_density",
            (sr.d_minus - target).abs() / target < 0.10,
            sr.d_minus,
            &format!("within 10% of {target:.6}"),
        ));
        payload["spiral"] = serde_json::to_value(&sr).unwrap();
    }
    rep.payload = payload;
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketRow {
    pub k: usize,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

pub fn wasserstein_sweep(
    cfg: &ExperimentConfig,
) -> Result<(Vec<BracketRow>, f64), RunError> {
    let w = cfg.weight()?;
    let opts = cfg.solve_options();
    let nu = equilibrium_measure(
        &w,
        cfg.mesh_cells_per_atom * (cfg.k_range.iter().max().unwrap() + 1),
    );
    let mut rows = Vec::new();
    for &k in &cfg.k_range {
        let s = cache::section_space(&w, k)?;
        let fk = cache::fekete_config(&w, k, &opts)?;
        let mu = AtomicMeasure::new(fk.points.clone());
        let plan = emd_atoms_vs_cells(&mu, &nu)?;
        if plan.duality_gap > 1e-8 || plan.dual_infeasibility > 1e-8 {
            return Err(RunError::Failed(format!(
                "transport certificate failed at k = {k}"
            )));
        }
        let lower = lipschitz_lower(&mu, &nu);
        let lagr = lagrange_sections(&s, &fk.points)?;
        let dual = dual_sections(&s, &fk.points);
        let upper = coupling_upper(&s, &fk.points, &lagr, &dual);
        rows.push(BracketRow {
            k,
            lower,
            value: plan.value,
            upper,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.k as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.ln()).collect();
    let (slope, _) = crate::bergman::least_squares(&xs, &ys);
    Ok((rows, slope))
}

fn run_wasserstein(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("wasserstein", cfg);
    let (rows, slope) = wasserstein_sweep(cfg)?;
    rep.checks.push(Check::new(
        "rate_slope",
        (-0.65..=-0.35).contains(&slope),
        slope,
        "in [-0.65, -0.35]",
    ));
    let min_scaled_lower = rows
        .iter()
        .map(|r| r.lower * (r.k as f64).sqrt())
        .fold(f64::INFINITY, f64::min);
    rep.checks.push(Check::new(
        "lower_scaled_floor",
        min_scaled_lower >= 0.05,
        min_scaled_lower,
        ">= 0.05",
    ));
    let scaled_upper: Vec<f64> = rows.iter().map(|r| r.upper * (r.k as f64).sqrt()).collect();
    rep.checks.push(Check::new(
        "upper_scaled_band",
        band(&scaled_upper) < 2.0,
        band(&scaled_upper),
        "max/min < 2",
    ));
    // sandwich against the Bergman target of the explicit coupling: the
    // lower bound must stay below the exact value on every instance
    let sandwich = rows.iter().all(|r| r.lower <= r.value + 1e-9);
    rep.checks.push(Check::new(
        "bracket_sandwich",
        sandwich,
        f64::from(u8::from(sandwich)),
        "lower <= value per instance",
    ));
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(Path::new(dir).join("wasserstein.csv"))?;
        writeln!(f, "k,lower,value,upper")?;
        for r in &rows {
            writeln!(f, "{},{},{},{}", r.k, r.lower, r.value, r.upper)?;
        }
    }
    rep.payload = serde_json::json!({ "rows": rows, "slope": slope });
    Ok(rep)
}

fn run_fock_check(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("fock-check", cfg);
    let w = cfg.weight()?;
    let n = w.dimension();
    let center = uniform_grid(n, 7)[3].clone();
    let mut errors = Vec::new();
    let mut tian_cs = Vec::new();
    let mut l1_rows = Vec::new();
    for &k in &cfg.k_range {
        let s = cache::section_space(&w, k)?;
        errors.push((k, fock_error(&s, &center, 2.0)?));
        tian_cs.push(tian_error(&s) * k as f64);
        let lb = l1_bounds(&s, &center, 2.0);
        l1_rows.push(serde_json::json!({
            "k": k,
            "sup_integral": lb.sup_integral,
            "offdiag_l1": lb.offdiag_l1,
            "moment_scaled": lb.moment * (k as f64).sqrt(),
        }));
    }
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    rep.checks.push(Check::new(
        "fock_error_decreasing",
        decreasing,
        errors.last().map(|e| e.1).unwrap_or(f64::NAN),
        "strictly decreasing over the sweep",
    ));
    rep.checks.push(Check::new(
        "tian_c_stable",
        band(&tian_cs) < 3.0,
        band(&tian_cs),
        "fitted C varies < 3x",
    ));
    rep.payload = serde_json::json!({
        "fock_errors": errors,
        "tian_c": tian_cs,
        "l1": l1_rows,
    });
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistRow {
    pub k: usize,
    pub x_index: usize,
    pub r: f64,
    pub count_ratio: f64,
    pub mass_ratio: f64,
    /// |count_ratio / mass_ratio - 1| * r * sqrt(k)
    pub discrepancy: f64,
}

/// Ball-count against curvature-mass comparison over an (x, r) grid; the sup
/// of the normalized discrepancy is the empirical equidistribution constant.
pub fn equidistribution_table(
    w: &Weight,
    ks: &[usize],
    opts: &SolveOptions,
    x_count: usize,
) -> Result<(Vec<EquidistRow>, Vec<(usize, f64)>), RunError> {
    let n = w.dimension();
    let total = w.total_ma_mass();
    let xs = uniform_grid(n, x_count);
    let mut rows = Vec::new();
    let mut sups = Vec::new();
    for &k in ks {
        let cfgk = cache::fekete_config(w, k, opts)?;
        let count_total = cfgk.points.len() as f64;
        let kf = k as f64;
        let r_lo = 2.0 / kf.sqrt();
        let r_hi = std::f64::consts::FRAC_PI_2;
        let steps = 8;
        let mut sup: f64 = 0.0;
        for (xi, x) in xs.iter().enumerate() {
            for si in 0..steps {
                let t = si as f64 / (steps - 1) as f64;
                let r = r_lo * (r_hi / r_lo).powf(t);
                let ball = BallRegion::new(x.clone(), r)?;
                let mass_ratio = frames::ball_mass(w, &ball) / total;
                let count = cfgk
                    .points
                    .iter()
                    .filter(|p| fs_distance(p, x) <= r)
                    .count() as f64;
                let count_ratio = count / count_total;
                let discrepancy = (count_ratio / mass_ratio - 1.0).abs() * r * kf.sqrt();
                sup = sup.max(discrepancy);
                rows.push(EquidistRow {
                    k,
                    x_index: xi,
                    r,
                    count_ratio,
                    mass_ratio,
                    discrepancy,
                });
            }
        }
        sups.push((k, sup));
    }
    Ok((rows, sups))
}

fn run_full_report(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rep = Report::new("full-report", cfg);
    let w = cfg.weight()?;
    let opts = cfg.solve_options();
    // spaces + Fekete + dual identities at the pivot level
    let s = space(cfg, cfg.k)?;
    let fk = cache::fekete_config(&w, cfg.k, &opts)?;
    rep.checks.push(Check::new(
        "fekete_certificate",
        fk.certificate.certified,
        fk.certificate.max_lagrange_sup,
        &format!("grid sup <= 1 + {}", cfg.cert_tol),
    ));
    let lagr = lagrange_sections(&s, &fk.points)?;
    let mut delta_dev: f64 = 0.0;
    for (i, x) in fk.points.iter().enumerate() {
        let vals = lagr.eval_all(&s, x);
        for (j, v) in vals.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            delta_dev = delta_dev.max((v.norm() - expect).abs());
        }
    }
    rep.checks.push(Check::new(
        "lagrange_delta",
        delta_dev <= 1e-10,
        delta_dev,
        "<= 1e-10",
    ));
    let dual = dual_sections(&s, &fk.points);
    let mut tile_dev: f64 = 0.0;
    for x in uniform_grid(s.manifold_dim(), 50) {
        let lv = lagr.eval_all(&s, &x);
        let pv = dual.eval_all(&s, &x);
        let lhs: Complex64 = lv.iter().zip(pv.iter()).map(|(a, b)| a * b.conj()).sum();
        tile_dev = tile_dev.max((lhs - Complex64::from(s.bergman_function(&x))).norm());
    }
    rep.checks.push(Check::new(
        "dual_tiling_identity",
        tile_dev <= 1e-8,
        tile_dev,
        "<= 1e-8",
    ));
    // equidistribution stability across the sweep
    let (rows, sups) = equidistribution_table(&w, &cfg.k_range, &opts, cfg.x_grid)?;
    let mut stable = true;
    for pair in sups.windows(2) {
        let ratio = pair[1].1 / pair[0].1;
        stable &= ratio < 2.0 && ratio > 0.5;
    }
    rep.checks.push(Check::new(
        "equidistribution_stability",
        stable,
        sups.last().map(|s| s.1).unwrap_or(f64::NAN),
        "sup constant varies < 2x between levels",
    ));
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(Path::new(dir).join("equidistribution.csv"))?;
        writeln!(f, "k,x_index,r,count_ratio,mass_ratio,discrepancy")?;
        for r in &rows {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                r.k, r.x_index, r.r, r.count_ratio, r.mass_ratio, r.discrepancy
            )?;
        }
    }
    // Wasserstein sweep
    let (wrows, slope) = wasserstein_sweep(cfg)?;
    rep.checks.push(Check::new(
        "wasserstein_slope",
        (-0.65..=-0.35).contains(&slope),
        slope,
        "in [-0.65, -0.35]",
    ));
    // density
    let fam = frames::make_fekete_family(&w, &cfg.k_range, &opts)?;
    let dr = density_report(&w, &fam, &cfg.r_grid, 48.min(cfg.x_grid));
    let crit = std::f64::consts::PI.powi(-(w.dimension() as i32));
    let estimate = 0.5 * (dr.d_minus + dr.d_plus);
    rep.checks.push(Check::new(
        "fekete_density",
        (estimate - crit).abs() / crit < 0.10,
        estimate,
        &format!("within 10% of {crit:.6}"),
    ));
    rep.payload = serde_json::json!({
        "separation_scaled": scaled_separation(&fk.points, cfg.k),
        "equidistribution_sups": sups,
        "wasserstein": { "rows": wrows, "slope": slope },
        "density": dr,
    });
    Ok(rep)
}

fn write_points_csv(path: &Path, points: &[ProjPoint]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    let dim = points.first().map(|p| p.coords().len()).unwrap_or(0);
    let header: Vec<String> = (0..dim)
        .flat_map(|i| [format!("re{i}"), format!("im{i}")])
        .collect();
    writeln!(f, "{}", header.join(","))?;
    for p in points {
        let row: Vec<String> = p
            .coords()
            .iter()
            .flat_map(|z| [format!("{}", z.re), format!("{}", z.im)])
            .collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_hash_stable() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig::default();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig {
            k: 9,
            ..Default::default()
        };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_json(r#"{"bogus": 1}"#);
        assert!(matches!(err, Err(RunError::Config(_))));
    }

    #[test]
    fn weight_spec_roundtrip_through_config() {
        let w = crate::testutil::bumpy_weight();
        let cfg = ExperimentConfig {
            weight: Some(w.to_spec()),
            ..Default::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert!(back.weight().is_ok());
    }

    #[test]
    fn space_command_fs() {
        let cfg = ExperimentConfig {
            k: 6,
            ..Default::default()
        };
        let rep = run("space", &cfg).unwrap();
        assert!(rep.all_passed(), "{}", rep.to_json());
    }

    #[test]
    fn fekete_command_certifies() {
        let cfg = ExperimentConfig {
            k: 4,
            ..Default::default()
        };
        let rep = run("fekete", &cfg).unwrap();
        assert!(rep.all_passed(), "{}", rep.to_json());
    }

    #[test]
    fn landau_command_identities() {
        let cfg = ExperimentConfig {
            k: 8,
            ..Default::default()
        };
        let rep = run("landau", &cfg).unwrap();
        assert!(rep.all_passed(), "{}", rep.to_json());
    }

    #[test]
    fn reports_deterministic() {
        let cfg = ExperimentConfig {
            k: 5,
            ..Default::default()
        };
        let a = run("space", &cfg).unwrap().to_json();
        let b = run("space", &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_command_is_config_error() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(
            run("nope", &cfg),
            Err(RunError::Config(_))
        ));
    }
}
