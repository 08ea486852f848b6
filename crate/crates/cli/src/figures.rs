//! Data behind the reference figures.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use randbeam::distributions::{db_to_linear, LawKind, SinrLaw, UserChannelProfile};
use randbeam::rates::{Method, RateResult};
use randbeam::simulator::sample_report_variable;
use randbeam::FeedbackScheme;

use crate::config::{bad, ConfigError};
use crate::context::RateContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [FigureId::Fig1, FigureId::Fig2, FigureId::Fig4, FigureId::Fig5, FigureId::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown figure {s:?}; expected one of fig1, fig2, fig4, fig5, fig6")))
    }
}

/// Evenly spaced abscissae `lo, lo + step, ..., hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl XGrid {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| (self.lo * (last - i as f64) + self.hi * i as f64) / last)
            .collect()
    }
}

/// Parameters of one figure as given in its caption.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureSpec {
    pub id: FigureId,
    pub title: &'static str,
    pub m: Vec<u32>,
    pub n: Option<u32>,
    pub l: Vec<u32>,
    pub k: Vec<u32>,
    pub rho_db: Vec<f64>,
    pub x: Option<XGrid>,
    pub curves: Vec<&'static str>,
}

pub fn figure_catalog() -> Vec<FigureSpec> {
    let depths = vec![1, 2, 4, 10];
    vec![
        FigureSpec {
            id: FigureId::Fig1,
            title: "CDF of the best-beam SINR and its bounds",
            m: vec![4],
            n: None,
            l: vec![],
            k: vec![],
            rho_db: vec![10.0],
            x: Some(XGrid {
                lo: 0.0,
                hi: 10.0,
                points: 201,
            }),
            curves: vec!["empirical F_Y", "exact F_Y", "Frechet bound F_Z", "approximation F_Z^M"],
        },
        FigureSpec {
            id: FigureId::Fig2,
            title: "spatial selective feedback, individual sum rate against the number of users",
            m: vec![2, 4],
            n: None,
            l: vec![],
            k: (1..=50).collect(),
            rho_db: vec![0.0, 10.0, 20.0],
            x: None,
            curves: vec!["exact", "approximation"],
        },
        FigureSpec {
            id: FigureId::Fig4,
            title: "best-L feedback, individual sum rate against the number of users",
            m: vec![4],
            n: Some(10),
            l: depths.clone(),
            k: (1..=30).collect(),
            rho_db: vec![10.0],
            x: None,
            curves: vec!["exact", "approximation"],
        },
        FigureSpec {
            id: FigureId::Fig5,
            title: "best-L feedback, individual sum rate against the average SNR",
            m: vec![4],
            n: Some(10),
            l: depths.clone(),
            k: vec![20],
            rho_db: (0..=20).map(f64::from).collect(),
            x: None,
            curves: vec!["exact", "approximation"],
        },
        FigureSpec {
            id: FigureId::Fig6,
            title: "CDF of the best-L SINR and its tail equivalent",
            m: vec![4],
            n: Some(10),
            l: depths,
            k: vec![],
            rho_db: vec![10.0],
            x: Some(XGrid {
                lo: 0.0,
                hi: 20.0,
                points: 401,
            }),
            curves: vec!["F_W", "tail equivalent F_Y^eta"],
        },
    ]
}

pub fn figure_spec(id: FigureId) -> FigureSpec {
    figure_catalog()
        .into_iter()
        .find(|s| s.id == id)
        .expect("catalog covers every id")
}

/// A rendered table plus what the sidecar should say about it.
pub struct FigureData {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub parameters: Value,
}

/// Default number of Monte Carlo draws behind the empirical fig1 curve.
pub const FIG1_SAMPLES: u64 = 200_000;

fn cell(x: f64) -> String {
    format!("{x}")
}

pub fn generate(id: FigureId, ctx: &mut RateContext, seed: u64, drops: Option<u64>) -> anyhow::Result<FigureData> {
    let spec = figure_spec(id);
    match id {
        FigureId::Fig1 => fig1(&spec, seed, drops.unwrap_or(FIG1_SAMPLES)),
        FigureId::Fig2 => fig2(&spec, ctx),
        FigureId::Fig4 | FigureId::Fig5 => best_l_sweep(&spec, ctx),
        FigureId::Fig6 => fig6(&spec),
    }
}

fn fig1(spec: &FigureSpec, seed: u64, samples: u64) -> anyhow::Result<FigureData> {
    if samples == 0 {
        return Err(bad("fig1 needs at least one Monte Carlo draw"));
    }
    let p = UserChannelProfile::narrowband(spec.m[0], db_to_linear(spec.rho_db[0]))?;
    let mut draws = sample_report_variable(&p, FeedbackScheme::SpatialSelective, samples as usize, seed, 0);
    draws.sort_by(f64::total_cmp);
    let y = SinrLaw::new(LawKind::BestBeamY, p)?;
    let z = SinrLaw::new(LawKind::PerBeamZ, p)?;
    let zm = SinrLaw::new(LawKind::BestBeamApprox, p)?;
    let n = draws.len() as f64;
    let rows = spec
        .x
        .expect("fig1 has an x grid")
        .values()
        .into_iter()
        .map(|x| {
            let below = draws.partition_point(|&d| d <= x) as f64;
            vec![
                cell(x),
                cell(below / n),
                cell(y.cdf(x)),
                cell(z.cdf(x)),
                cell(zm.cdf(x)),
                Method::MonteCarlo.name().to_string(),
                Method::ClosedForm.name().to_string(),
                Method::ClosedForm.name().to_string(),
                Method::Approximation.name().to_string(),
            ]
        })
        .collect();
    Ok(FigureData {
        header: vec![
            "x",
            "empirical_cdf_y",
            "exact_cdf_y",
            "frechet_cdf_z",
            "approx_cdf_z_pow_m",
            "empirical_method",
            "exact_method",
            "frechet_method",
            "approx_method",
        ],
        rows,
        parameters: json!({ "figure": spec, "samples": samples }),
    })
}

fn rate_cells(exact: &RateResult, approx: &RateResult) -> [String; 4] {
    [
        cell(exact.value),
        cell(approx.value),
        exact.method.name().to_string(),
        approx.method.name().to_string(),
    ]
}

fn fig2(spec: &FigureSpec, ctx: &mut RateContext) -> anyhow::Result<FigureData> {
    let groups: Vec<(u32, f64)> = spec
        .m
        .iter()
        .flat_map(|&m| spec.rho_db.iter().map(move |&db| (m, db)))
        .collect();
    let blocks = ctx.par_groups(
        &groups,
        |&(m, db)| UserChannelProfile {
            m,
            rho: db_to_linear(db),
            n: 1,
            l: 1,
        },
        |&(m, db), e| {
            let mut rows = Vec::new();
            for &k in &spec.k {
                let ex = e.spatial_exact(k)?;
                let ap = e.spatial_approx(k)?;
                let mut r = vec![k.to_string(), m.to_string(), cell(db)];
                r.extend(rate_cells(&ex, &ap));
                rows.push(r);
            }
            Ok(rows)
        },
    )?;
    Ok(FigureData {
        header: vec!["K", "M", "rho_dB", "exact_rate", "approx_rate", "exact_method", "approx_method"],
        rows: blocks.concat(),
        parameters: json!({ "figure": spec }),
    })
}

/// Figures 4 and 5 share one layout; only the swept axis differs.
fn best_l_sweep(spec: &FigureSpec, ctx: &mut RateContext) -> anyhow::Result<FigureData> {
    let m = spec.m[0];
    let n = spec.n.expect("best-L figures fix N");
    let groups: Vec<(u32, f64)> = spec
        .l
        .iter()
        .flat_map(|&l| spec.rho_db.iter().map(move |&db| (l, db)))
        .collect();
    let blocks = ctx.par_groups(
        &groups,
        |&(l, db)| UserChannelProfile {
            m,
            rho: db_to_linear(db),
            n,
            l,
        },
        |&(l, db), e| {
            let mut rows = Vec::new();
            for &k in &spec.k {
                let ex = e.best_l_exact(k)?;
                let ap = e.best_l_approx(k)?;
                let mut r = vec![k.to_string(), m.to_string(), n.to_string(), l.to_string(), cell(db)];
                r.extend(rate_cells(&ex, &ap));
                rows.push(r);
            }
            Ok(rows)
        },
    )?;
    Ok(FigureData {
        header: vec![
            "K",
            "M",
            "N",
            "L",
            "rho_dB",
            "exact_rate",
            "approx_rate",
            "exact_method",
            "approx_method",
        ],
        rows: blocks.concat(),
        parameters: json!({ "figure": spec }),
    })
}

fn fig6(spec: &FigureSpec) -> anyhow::Result<FigureData> {
    let xs = spec.x.expect("fig6 has an x grid").values();
    let mut rows = Vec::new();
    let mut etas = Vec::new();
    for &l in &spec.l {
        let p = UserChannelProfile::new(spec.m[0], db_to_linear(spec.rho_db[0]), spec.n.unwrap(), l)?;
        let w = SinrLaw::new(LawKind::BestLW, p)?;
        let t = SinrLaw::new(LawKind::TailEquivalentW, p)?;
        etas.push(json!({ "L": l, "eta": w.eta() }));
        for &x in &xs {
            rows.push(vec![
                cell(x),
                cell(w.cdf(x)),
                cell(t.cdf(x)),
                l.to_string(),
                Method::ClosedForm.name().to_string(),
                Method::Approximation.name().to_string(),
            ]);
        }
    }
    Ok(FigureData {
        header: vec!["x", "cdf_w", "cdf_tail_equivalent", "L", "w_method", "tail_method"],
        rows,
        parameters: json!({ "figure": spec, "eta": etas }),
    })
}
