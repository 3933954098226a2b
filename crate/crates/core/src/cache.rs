//! Process-wide memoization of the expensive artifacts (section spaces and
//! Fekete configurations) so sweeps and parallel test threads share work.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex, OnceLock};

use crate::bergman::{BergmanError, SectionSpace};
use crate::fekete::{solve, FeketeConfig, FeketeError, SolveOptions};
use crate::geometry::Weight;

type SpaceKey = (String, usize);
type SpaceCell = Arc<OnceLock<Arc<SectionSpace>>>;
type ConfigKey = (String, usize, usize, u64, u64, usize, usize);
type ConfigCell = Arc<OnceLock<Arc<FeketeConfig>>>;

static SPACES: LazyLock<Mutex<HashMap<SpaceKey, SpaceCell>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));
static CONFIGS: LazyLock<Mutex<HashMap<ConfigKey, ConfigCell>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn weight_key(w: &Weight) -> String {
    serde_json::to_string(&w.to_spec()).expect("weight spec serializes")
}

/// Memoized section space with the default quadrature rule.
pub fn section_space(w: &Weight, k: usize) -> Result<Arc<SectionSpace>, BergmanError> {
    let key = (weight_key(w), k);
    let cell = {
        let mut map = SPACES.lock().unwrap();
        map.entry(key).or_default().clone()
    };
    if let Some(v) = cell.get() {
        return Ok(v.clone());
    }
    let built = Arc::new(SectionSpace::with_default_rule(w.clone(), k)?);
    let _ = cell.set(built);
    Ok(cell.get().unwrap().clone())
}

/// Memoized Fekete configuration for the given solve options.
pub fn fekete_config(
    w: &Weight,
    k: usize,
    opts: &SolveOptions,
) -> Result<Arc<FeketeConfig>, FeketeError> {
    let key = (
        weight_key(w),
        k,
        opts.restarts,
        opts.seed,
        opts.tol.to_bits(),
        opts.grid_size.unwrap_or(0),
        opts.max_rounds,
    );
    let cell = {
        let mut map = CONFIGS.lock().unwrap();
        map.entry(key).or_default().clone()
    };
    if let Some(v) = cell.get() {
        return Ok(v.clone());
    }
    let space = section_space(w, k).map_err(|_| FeketeError::NoProgress)?;
    let built = Arc::new(solve(&space, opts)?);
    let _ = cell.set(built);
    Ok(cell.get().unwrap().clone())
}
