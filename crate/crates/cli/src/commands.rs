use std::path::{Path, PathBuf};

use serde_json::json;

use randbeam::distributions::{db_to_linear, UserChannelProfile};
use randbeam::rates::{Method, RateResult};
use randbeam::scaling::{gumbel_diagnostic, normalizing_constants_with, scaling_ratio_report, Convention};
use randbeam::simulator::DropSimulator;
use randbeam::validation::{run_all, ValidationOptions};
use randbeam::{FeedbackScheme, SchedulerKind, SystemConfig};

use crate::config::{bad, ExperimentFile, GridSection, Overrides, SystemSection, DEFAULT_SEED};
use crate::context::{rate_options, RateContext};
use crate::figures::{self, FigureId};
use crate::output::{csv_body, csv_table, tolerances_json, write_atomic, write_bundle, ResultRow, Sidecar, FIGURE_SCHEMA, ROWS_SCHEMA};

/// How a command ended when it did not error out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ValidationFailed,
}

/// Arguments shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Common {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub cache_dir: Option<PathBuf>,
}

impl Common {
    fn file(&self) -> anyhow::Result<ExperimentFile> {
        match &self.config {
            Some(p) => ExperimentFile::load(p),
            None => Ok(ExperimentFile::default()),
        }
    }

    fn context(&self) -> anyhow::Result<RateContext> {
        Ok(RateContext::new(rate_options(self.overrides.tol)?, self.cache_dir.clone()))
    }
}

fn fmt_db(db: f64) -> String {
    format!("{db}")
}

fn row(metric: &str, scheme: FeedbackScheme, method: &str, k: u32, p: &UserChannelProfile, db: Option<f64>) -> ResultRow {
    ResultRow {
        metric: metric.to_string(),
        scheme: scheme.name().to_string(),
        method: method.to_string(),
        k,
        m: p.m,
        n: p.n,
        l: p.l,
        rho_db: db,
        user_id: None,
        value: f64::NAN,
        stderr: None,
    }
}

fn rate_row(metric: &str, k: u32, p: &UserChannelProfile, db: f64, r: &RateResult) -> ResultRow {
    ResultRow {
        value: r.value,
        stderr: Some(r.error_estimate),
        ..row(metric, r.scheme, r.method.name(), k, p, Some(db))
    }
}

/// One rate engine per (scheme, M, ρ, L). Full and spatial rates are per
/// resource block and do not depend on N, so they are tabulated at N = 1.
#[derive(Clone, Copy, Debug)]
struct Group {
    scheme: FeedbackScheme,
    m: u32,
    db: f64,
    n: u32,
    l: u32,
}

fn groups(grid: &GridSection) -> Vec<Group> {
    let mut out = Vec::new();
    for &scheme in &grid.schemes {
        for &m in &grid.m {
            for &db in &grid.rho_db {
                match scheme {
                    FeedbackScheme::BestL => {
                        for &l in &grid.l {
                            out.push(Group { scheme, m, db, n: grid.n, l });
                        }
                    }
                    _ => out.push(Group { scheme, m, db, n: 1, l: 1 }),
                }
            }
        }
    }
    out
}

fn profile_of(g: &Group) -> UserChannelProfile {
    UserChannelProfile {
        m: g.m,
        rho: db_to_linear(g.db),
        n: g.n,
        l: g.l,
    }
}

fn has_approx(scheme: FeedbackScheme) -> bool {
    scheme != FeedbackScheme::FullFeedback
}

fn finish(out: &Path, stem: &str, rows: &[ResultRow], sidecar: Sidecar) -> anyhow::Result<()> {
    let path = write_bundle(out, stem, &csv_body(rows)?, &sidecar)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

pub fn rate_table(c: &Common) -> anyhow::Result<Outcome> {
    let grid = c.file()?.grid.unwrap_or_else(GridSection::default_rate_table);
    grid.validate()?;
    let mut ctx = c.context()?;
    let gs = groups(&grid);
    let blocks = ctx.par_groups(&gs, profile_of, |g, e| {
        let p = profile_of(g);
        let mut rows = Vec::new();
        for &k in &grid.k {
            rows.push(rate_row("individual_sum_rate", k, &p, g.db, &e.individual_sum_rate(g.scheme, k, false)?));
            if has_approx(g.scheme) {
                rows.push(rate_row("individual_sum_rate", k, &p, g.db, &e.individual_sum_rate(g.scheme, k, true)?));
            }
        }
        Ok(rows)
    })?;
    ctx.save()?;
    let rows = blocks.concat();
    let sidecar = Sidecar {
        schema: ROWS_SCHEMA,
        command: "rate-table".into(),
        seed: c.overrides.seed.or(grid.seed).unwrap_or(DEFAULT_SEED),
        extra: json!({ "grid": grid }),
        tolerances: tolerances_json(&ctx.opts),
        rows: rows.len(),
    };
    finish(&c.out, "rate_table", &rows, sidecar)?;
    Ok(Outcome::Success)
}

pub fn simulate(c: &Common) -> anyhow::Result<Outcome> {
    let section = c.file()?.system.unwrap_or_else(SystemSection::default_simulation);
    let cfg = section.to_system_config(&c.overrides)?;
    let dbs = section.rho_db_per_user()?;
    let homogeneous = dbs.windows(2).all(|w| w[0] == w[1]);
    let common_db = homogeneous.then(|| dbs[0]);
    let est = DropSimulator::new(&cfg)?.run();
    let p = cfg.profile(0);
    let mc = Method::MonteCarlo.name();
    let mut rows = Vec::new();
    for u in 0..cfg.k as usize {
        let base = |metric: &str, value: f64, se: f64| ResultRow {
            user_id: Some(u as u32),
            value,
            stderr: Some(se),
            ..row(metric, cfg.scheme, mc, cfg.k, &p, Some(dbs[u]))
        };
        rows.push(base("user_rate", est.user_rate[u], est.user_rate_se[u]));
        rows.push(base("individual_sum_rate", est.individual_sum_rate[u], est.individual_sum_rate_se[u]));
        rows.push(base("selection_frequency", est.selection_frequency[u], est.selection_frequency_se[u]));
    }
    let aggregate = |metric: &str, value: f64, se: Option<f64>| ResultRow {
        value,
        stderr: se,
        ..row(metric, cfg.scheme, mc, cfg.k, &p, common_db)
    };
    rows.push(aggregate("sum_rate", est.sum_rate, Some(est.sum_rate_se)));
    rows.push(aggregate(
        "mean_individual_sum_rate",
        est.mean_individual_sum_rate,
        Some(est.mean_individual_sum_rate_se),
    ));
    let slots = est.outage_fraction.len() as f64;
    rows.push(aggregate("outage_fraction", est.outage_fraction.iter().sum::<f64>() / slots, None));
    rows.push(aggregate("multi_beam_fraction", est.multi_beam_fraction, None));

    let mut ctx = c.context()?;
    // The analytic rate describes the CDF-based scheduler with identical users.
    if let (Some(db), SchedulerKind::CdfBased) = (common_db, cfg.scheduler) {
        let scheme = cfg.scheme;
        let analytic = ctx.par_groups(&[p], |q| *q, |q, e| {
            let mut v = vec![rate_row("individual_sum_rate", cfg.k, q, db, &e.individual_sum_rate(scheme, cfg.k, false)?)];
            if has_approx(scheme) {
                v.push(rate_row("individual_sum_rate", cfg.k, q, db, &e.individual_sum_rate(scheme, cfg.k, true)?));
            }
            Ok(v)
        })?;
        rows.extend(analytic.concat());
        ctx.save()?;
    }

    println!(
        "sum rate {:.6} +/- {:.6} bits/s/Hz per block over {} drops",
        est.sum_rate, est.sum_rate_se, est.drops
    );
    let sidecar = Sidecar {
        schema: ROWS_SCHEMA,
        command: "simulate".into(),
        seed: cfg.seed,
        extra: json!({
            "system": section,
            "drops": cfg.drops,
            "batches": est.batches,
            "outage_fraction_per_slot": est.outage_fraction,
            "feedback_count_histogram": est.feedback_count_histogram,
        }),
        tolerances: tolerances_json(&ctx.opts),
        rows: rows.len(),
    };
    finish(&c.out, "simulate", &rows, sidecar)?;
    Ok(Outcome::Success)
}

pub fn scaling(c: &Common) -> anyhow::Result<Outcome> {
    let grid = c.file()?.grid.unwrap_or_else(GridSection::default_scaling);
    grid.validate()?;
    let seed = c.overrides.seed.or(grid.seed).unwrap_or(DEFAULT_SEED);
    let drops = c.overrides.drops.or(grid.drops).unwrap_or(0);
    let mut ctx = c.context()?;
    let gs = groups(&grid);
    let blocks = ctx.par_groups(&gs, profile_of, |g, e| {
        let p = profile_of(g);
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        let variants: &[bool] = if has_approx(g.scheme) { &[false, true] } else { &[false] };
        for &approx in variants {
            let rates = grid
                .k
                .iter()
                .map(|&k| e.individual_sum_rate(g.scheme, k, approx))
                .collect::<randbeam::Result<Vec<_>>>()?;
            let report = scaling_ratio_report(g.scheme, approx, &grid.k, &p, &rates).map_err(|e| bad(e.to_string()))?;
            let users_method = if approx { Method::Approximation } else { Method::ClosedForm };
            for (i, &k) in grid.k.iter().enumerate() {
                rows.push(rate_row("individual_sum_rate", k, &p, g.db, &rates[i]));
                rows.push(ResultRow {
                    value: report.ratio[i],
                    ..row("scaling_ratio", g.scheme, rates[i].method.name(), k, &p, Some(g.db))
                });
                rows.push(ResultRow {
                    value: report.effective_k[i],
                    ..row("effective_users", g.scheme, users_method.name(), k, &p, Some(g.db))
                });
            }
            summary.push(format!(
                "{} {} M={} {} dB N={} L={}: ratio {:?}{}",
                g.scheme.name(),
                if approx { "approx" } else { "exact" },
                g.m,
                fmt_db(g.db),
                g.n,
                g.l,
                report.ratio,
                if report.moves_toward_one() { " (toward 1)" } else { " (not toward 1)" }
            ));
        }
        if drops > 0 {
            for &k in &grid.k {
                let mut cfg = SystemConfig::homogeneous(g.m, k, p.rho, g.scheme).with_blocks(g.n, g.l);
                cfg.seed = seed;
                let maxima = DropSimulator::new(&cfg)?.scheduler_maxima(drops);
                for conv in Convention::ALL {
                    let nc = normalizing_constants_with(g.scheme, k, &p, conv)?;
                    rows.push(ResultRow {
                        value: gumbel_diagnostic(&maxima, &nc)?,
                        ..row(&format!("gumbel_ks_{}", conv.name()), g.scheme, Method::MonteCarlo.name(), k, &p, Some(g.db))
                    });
                }
            }
        }
        Ok((rows, summary))
    })?;
    ctx.save()?;
    let mut rows = Vec::new();
    for (r, s) in blocks {
        rows.extend(r);
        for line in s {
            println!("{line}");
        }
    }
    let sidecar = Sidecar {
        schema: ROWS_SCHEMA,
        command: "scaling".into(),
        seed,
        extra: json!({ "grid": grid, "gumbel_drops": drops }),
        tolerances: tolerances_json(&ctx.opts),
        rows: rows.len(),
    };
    finish(&c.out, "scaling", &rows, sidecar)?;
    Ok(Outcome::Success)
}

pub fn figure(c: &Common, id: FigureId) -> anyhow::Result<Outcome> {
    if c.config.is_some() {
        return Err(bad("figures use fixed parameters; --config does not apply"));
    }
    let seed = c.overrides.seed.unwrap_or(DEFAULT_SEED);
    let mut ctx = c.context()?;
    let data = figures::generate(id, &mut ctx, seed, c.overrides.drops)?;
    ctx.save()?;
    let body = csv_table(&data.header, &data.rows)?;
    let sidecar = Sidecar {
        schema: FIGURE_SCHEMA,
        command: format!("figure {id}"),
        seed,
        extra: data.parameters,
        tolerances: tolerances_json(&ctx.opts),
        rows: data.rows.len(),
    };
    let path = write_bundle(&c.out, id.name(), &body, &sidecar)?;
    println!("wrote {} ({} rows)", path.display(), data.rows.len());
    Ok(Outcome::Success)
}

pub fn validate(c: &Common) -> anyhow::Result<Outcome> {
    if c.config.is_some() || c.overrides.tol.is_some() {
        return Err(bad("validate runs fixed cases at pinned tolerances; --config and --tol do not apply"));
    }
    let mut opts = ValidationOptions::default();
    if let Some(s) = c.overrides.seed {
        opts.seed = s;
    }
    if let Some(d) = c.overrides.drops {
        if d == 0 {
            return Err(bad("--drops must be positive"));
        }
        opts = opts.with_drop_cap(d);
    }
    let results = run_all(&opts);
    let mut all = true;
    for r in &results {
        all &= r.passed();
        println!(
            "{} {} - {} ({:.1} s)",
            if r.passed() { "PASS" } else { "FAIL" },
            r.id,
            r.title,
            r.seconds
        );
        for ch in &r.checks {
            println!("    [{}] {}: {}", if ch.passed { "ok" } else { "FAIL" }, ch.name, ch.detail);
        }
    }
    let report = json!({
        "version": crate::output::version_string(),
        "seed": opts.seed,
        "passed": all,
        "criteria": results,
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    let path = c.out.join("validate.json");
    write_atomic(&path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(if all { Outcome::Success } else { Outcome::ValidationFailed })
}
