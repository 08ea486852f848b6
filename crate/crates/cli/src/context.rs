use std::path::PathBuf;

use rayon::prelude::*;

use randbeam::distributions::{CoefficientTable, UserChannelProfile};
use randbeam::rates::{RateEngine, RateOptions};

use crate::config::bad;

pub const CACHE_FILE: &str = "xi-table.json";

/// Rate options plus the shared coefficient table and where it is cached.
pub struct RateContext {
    pub opts: RateOptions,
    pub table: CoefficientTable,
    cache_dir: Option<PathBuf>,
}

/// `--tol` sets the quadrature relative tolerance; closed forms may lose
/// up to a hundred times that before falling back.
pub fn rate_options(tol: Option<f64>) -> anyhow::Result<RateOptions> {
    let mut opts = RateOptions::default();
    if let Some(t) = tol {
        if !(t > 0.0 && t < 0.1) {
            return Err(bad(format!("--tol must lie in (0, 0.1), got {t}")));
        }
        opts.quadrature.rel_tol = t;
        opts.precision_tol = 100.0 * t;
    }
    Ok(opts)
}

impl RateContext {
    /// Loads the cached table if there is one. A damaged cache is reported
    /// and ignored; it is rewritten on save.
    pub fn new(opts: RateOptions, cache_dir: Option<PathBuf>) -> Self {
        let table = match &cache_dir {
            Some(dir) => CoefficientTable::load(&dir.join(CACHE_FILE)).unwrap_or_else(|e| {
                eprintln!("warning: ignoring coefficient cache: {e}");
                CoefficientTable::new()
            }),
            None => CoefficientTable::new(),
        };
        RateContext { opts, table, cache_dir }
    }

    pub fn save(&self) -> anyhow::Result<()> {
        if let Some(dir) = &self.cache_dir {
            if !self.table.is_empty() {
                self.table.save(&dir.join(CACHE_FILE))?;
            }
        }
        Ok(())
    }

    /// Runs `f` for every group on its own engine, in parallel, and returns
    /// the results in group order. Coefficient rows computed along the way
    /// are folded back into the shared table.
    pub fn par_groups<G, R, P, F>(&mut self, groups: &[G], profile: P, f: F) -> anyhow::Result<Vec<R>>
    where
        G: Sync,
        R: Send,
        P: Fn(&G) -> UserChannelProfile + Sync,
        F: Fn(&G, &mut RateEngine) -> anyhow::Result<R> + Sync,
    {
        let opts = self.opts;
        let table = &self.table;
        let out: Vec<anyhow::Result<(R, CoefficientTable)>> = groups
            .par_iter()
            .map(|g| {
                let p = profile(g);
                p.validate().map_err(|e| bad(e.to_string()))?;
                let mut e = RateEngine::new(p, opts)?.with_table(table.clone());
                let r = f(g, &mut e)?;
                Ok((r, e.into_table()))
            })
            .collect();
        let mut results = Vec::with_capacity(out.len());
        for o in out {
            let (r, t) = o?;
            self.table.merge(t);
            results.push(r);
        }
        Ok(results)
    }
}

/// `RANDBEAM_CACHE_DIR` (or `--cache-dir`) wins; otherwise the usual per-user
/// cache location, if one can be found.
pub fn default_cache_dir() -> Option<PathBuf> {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(x).join("randbeam"));
    }
    std::env::var_os("HOME")
        .filter(|v| !v.is_empty())
        .map(|h| PathBuf::from(h).join(".cache").join("randbeam"))
}
