use clap::Parser;
use fekete_lab::report::{run, ExperimentConfig, RunError};

/// Numerical experiments with Fekete points, Bergman kernels, concentration
/// operators, sampling/interpolation frames and optimal transport on complex
/// projective space.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// space | fekete | landau | frames | density | wasserstein | fock-check
    /// | full-report
    command: String,

    /// JSON configuration file (defaults apply when omitted)
    #[arg(long)]
    config: Option<String>,

    #[arg(long)]
    k: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// output directory for reports and CSV artifacts
    #[arg(long)]
    out: Option<String>,

    #[arg(long)]
    eps: Option<f64>,

    /// +1 or -1: direction of the perturbed-Fekete level shift
    #[arg(long)]
    sign: Option<i8>,

    #[arg(long)]
    density_factor: Option<f64>,

    /// comma-separated levels, e.g. 8,16,32,64
    #[arg(long)]
    k_range: Option<String>,

    /// comma-separated R values for density scans
    #[arg(long = "R-grid")]
    r_grid: Option<String>,

    #[arg(long)]
    quad_degree: Option<usize>,
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, RunError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| RunError::Config(format!("bad list entry {t}")))
        })
        .collect()
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("{path}: {e}")))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(k) = cli.k {
        cfg.k = k;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(eps) = cli.eps {
        cfg.eps = eps;
    }
    if let Some(sign) = cli.sign {
        cfg.sign = sign;
    }
    if let Some(d) = cli.density_factor {
        cfg.density_factor = d;
    }
    if let Some(ks) = &cli.k_range {
        cfg.k_range = parse_list(ks)?;
    }
    if let Some(rs) = &cli.r_grid {
        cfg.r_grid = parse_list(rs)?;
    }
    if let Some(q) = cli.quad_degree {
        cfg.quad_degree = Some(q);
    }
    Ok(cfg)
}

fn main() {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let code = match build_config(&cli) {
        Err(e) => {
            eprintln!("{e}");
            2
        }
        Ok(cfg) => match run(&cli.command, &cfg) {
            Err(e @ RunError::Config(_)) => {
                eprintln!("{e}");
                2
            }
            Err(e) => {
                eprintln!("{e}");
                3
            }
            Ok(report) => {
                println!("{}", report.to_json());
                if report.all_passed() {
                    0
                } else {
                    3
                }
            }
        },
    };
    // wall time goes to stderr so stdout stays byte-identical across runs
    eprintln!("wall time: {:.3}s", started.elapsed().as_secs_f64());
    std::process::exit(code);
}
