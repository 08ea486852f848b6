use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randbeam::distributions::{pdf_z, sf_z, tail_equivalent_exponent, LawKind, SinrLaw, UserChannelProfile};
use randbeam::scaling::{
    base_law, compute_scaling_report, effective_users, gumbel_cdf, gumbel_diagnostic, gumbel_power_residual,
    gumbel_power_shift, growth_function, growth_function_of, normalizing_constants, normalizing_constants_with,
    random_sample_extreme_cdf, random_sample_extreme_cdf_mixed, scaling_ratio_report, Convention,
    NormalizingConstants,
};
use randbeam::simulator::DropSimulator;
use randbeam::stats::{ks_critical, ks_statistic};
use randbeam::{FeedbackScheme, SystemConfig};

const SCHEMES: [FeedbackScheme; 3] = [
    FeedbackScheme::FullFeedback,
    FeedbackScheme::SpatialSelective,
    FeedbackScheme::BestL,
];

fn nb(m: u32, rho: f64) -> UserChannelProfile {
    UserChannelProfile::narrowband(m, rho).unwrap()
}

#[test]
fn growth_function_examples() {
    for x in [0.0, 0.3, 5.0, 1e4] {
        assert_eq!(growth_function(x, &nb(1, 7.0)), 7.0);
    }
    assert_relative_eq!(growth_function(0.0, &nb(2, 1.0)), 1.0 / 3.0, max_relative = 1e-15);
    let p = nb(3, 4.0);
    for x in [0.1, 1.0, 10.0] {
        assert_relative_eq!(growth_function(x, &p), sf_z(x, &p) / pdf_z(x, &p), max_relative = 1e-12);
    }
}

#[test]
fn growth_function_at_100_is_near_rho() {
    let g = growth_function(100.0, &nb(4, 10.0));
    assert!((g - 10.0).abs() <= 0.5, "g(100) = {g}, not within 5% of ρ = 10");
}

#[test]
fn growth_function_tends_to_rho_over_m() {
    let p = nb(4, 10.0);
    assert_relative_eq!(growth_function(1e10, &p), 2.5, max_relative = 1e-8);
    let mut prev = 0.0;
    for i in 0..60 {
        let g = growth_function(10f64.powf(-3.0 + 0.2 * i as f64), &p);
        assert!(g > prev && g < 2.5);
        prev = g;
    }
}

#[test]
fn printed_constants_examples() {
    let p = nb(4, 10.0);
    let full = normalizing_constants(FeedbackScheme::FullFeedback, 100, &p).unwrap();
    let ll = 100f64.log2().log2();
    assert_relative_eq!(full.location, 10.0 * 100f64.log2() - 30.0 * ll, max_relative = 1e-14);
    let sp = normalizing_constants(FeedbackScheme::SpatialSelective, 100, &p).unwrap();
    assert_relative_eq!(sp.location, 10.0 * 25f64.log2() - 30.0 * ll, max_relative = 1e-14);
    let q = UserChannelProfile::new(4, 10.0, 6, 6).unwrap();
    let bl = normalizing_constants(FeedbackScheme::BestL, 100, &q).unwrap();
    assert!((bl.location - sp.location).abs() <= 1e-12 * sp.location.abs());
    assert!(normalizing_constants(FeedbackScheme::FullFeedback, 2, &p).is_err());
}

#[test]
fn scale_is_rho_for_every_scheme() {
    for rho in [0.5, 1.0, 10.0, 123.0] {
        for (n, l) in [(1, 1), (4, 1), (6, 3), (10, 10)] {
            let p = UserChannelProfile::new(3, rho, n, l).unwrap();
            for scheme in SCHEMES {
                for conv in [Convention::PrintedLog2, Convention::NaturalLog] {
                    assert_eq!(normalizing_constants_with(scheme, 50, &p, conv).unwrap().scale, rho);
                }
            }
        }
    }
}

#[test]
fn location_ordering() {
    let rho = 10.0;
    for m in [2, 4] {
        for n in 1..=8u32 {
            for l in 1..=n {
                let p = UserChannelProfile::new(m, rho, n, l).unwrap();
                let eta = tail_equivalent_exponent(n, l).unwrap();
                for k in [3, 20, 1000] {
                    let loc = |s| normalizing_constants(s, k, &p).unwrap().location;
                    let (f, s, b) = (
                        loc(FeedbackScheme::FullFeedback),
                        loc(FeedbackScheme::SpatialSelective),
                        loc(FeedbackScheme::BestL),
                    );
                    assert!(f >= s);
                    if l == 1 || l == n {
                        assert!((b - s).abs() <= 1e-12 * s.abs().max(1.0), "N={n} L={l} K={k}: {b} vs {s}");
                    } else if l as f64 * eta <= n as f64 {
                        assert!(s >= b - 1e-12 * s.abs().max(1.0), "N={n} L={l} K={k}");
                    }
                }
            }
        }
    }
}

fn location_increasing(conv: Convention) -> Vec<String> {
    let mut bad = Vec::new();
    for m in 1..=4 {
        let p = UserChannelProfile::new(m, 10.0, 4, 1).unwrap();
        for scheme in SCHEMES {
            let mut prev = f64::NEG_INFINITY;
            for k in 3..=300 {
                let Ok(nc) = normalizing_constants_with(scheme, k, &p, conv) else {
                    continue;
                };
                if nc.location <= prev {
                    bad.push(format!("{} M={m} K={k}", scheme.name()));
                    break;
                }
                prev = nc.location;
            }
        }
    }
    bad
}

#[test]
fn printed_location_increasing_in_k() {
    let bad = location_increasing(Convention::PrintedLog2);
    assert!(bad.is_empty(), "first decrease at {bad:?}");
}

#[test]
fn tail_quantile_location_increasing_in_k() {
    let bad = location_increasing(Convention::TailQuantile);
    assert!(bad.is_empty(), "first decrease at {bad:?}");
}

#[test]
fn gumbel_power_shift_solution() {
    let xs: Vec<f64> = (0..20).map(|i| -3.0 + 0.4 * i as f64).collect();
    for m in [1, 2, 3, 4, 8, 16] {
        let (a, b) = gumbel_power_shift(m, &xs);
        assert!((a + (m as f64).ln()).abs() <= 1e-12, "M={m}: A={a}");
        assert!((b - 1.0).abs() <= 1e-12, "M={m}: B={b}");
        for &x in &xs {
            assert!(gumbel_power_residual(m, x) <= 1e-12);
        }
    }
}

#[test]
fn gumbel_null_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 20_000;
    let nc = NormalizingConstants {
        location: 4.5,
        scale: 2.0,
        scheme: FeedbackScheme::FullFeedback,
        k: 100,
        profile: nb(2, 2.0),
        convention: Convention::PrintedLog2,
    };
    let samples: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            nc.location + nc.scale * -(-u.ln()).ln()
        })
        .collect();
    let d = gumbel_diagnostic(&samples, &nc).unwrap();
    assert!(d <= 1.36 / (n as f64).sqrt(), "KS {d}");
    assert!(gumbel_diagnostic(&[], &nc).is_err());
    assert_eq!(gumbel_cdf(0.0), (-1.0f64).exp());
}

fn maxima_ks(scheme: FeedbackScheme, k: u32, p: &UserChannelProfile, conv: Convention, drops: u64) -> f64 {
    let cfg = SystemConfig::homogeneous(p.m, k, p.rho, scheme)
        .with_blocks(p.n, p.l)
        .with_seed(202);
    let maxima = DropSimulator::new(&cfg).unwrap().scheduler_maxima(drops);
    let nc = normalizing_constants_with(scheme, k, p, conv).unwrap();
    gumbel_diagnostic(&maxima, &nc).unwrap()
}

fn full_feedback_ks_pair(conv: Convention) -> (f64, f64) {
    let p = nb(2, 10.0);
    let small = maxima_ks(FeedbackScheme::FullFeedback, 100, &p, conv, 10_000);
    let large = maxima_ks(FeedbackScheme::FullFeedback, 10_000, &p, conv, 10_000);
    (small, large)
}

#[test]
fn full_feedback_gumbel_converges_printed_log2() {
    let (small, large) = full_feedback_ks_pair(Convention::PrintedLog2);
    assert!(large < small, "K=1e4 {large} !< K=1e2 {small}");
}

#[test]
fn full_feedback_gumbel_converges_natural_log() {
    let (small, large) = full_feedback_ks_pair(Convention::NaturalLog);
    assert!(large < small, "K=1e4 {large} !< K=1e2 {small}");
}

#[test]
fn full_feedback_gumbel_converges_tail_quantile() {
    let (small, large) = full_feedback_ks_pair(Convention::TailQuantile);
    assert!(large < small, "K=1e4 {large} !< K=1e2 {small}");
}

#[test]
fn best_one_gumbel_comparable_to_spatial() {
    // Same K/M virtual users; "comparable" taken as within a factor of two.
    let bl = maxima_ks(FeedbackScheme::BestL, 10_000, &UserChannelProfile::new(2, 10.0, 4, 1).unwrap(), Convention::TailQuantile, 10_000);
    let sp = maxima_ks(FeedbackScheme::SpatialSelective, 10_000, &nb(2, 10.0), Convention::TailQuantile, 10_000);
    assert!(bl <= 2.0 * sp && sp <= 2.0 * bl, "best-1 {bl} vs spatial {sp}");
}

#[test]
fn full_feedback_ratio_for_single_antenna() {
    let r = compute_scaling_report(FeedbackScheme::FullFeedback, false, &[100, 10_000], &nb(1, 1.0)).unwrap();
    assert!(
        (r.ratio[1] - 1.0).abs() < (r.ratio[0] - 1.0).abs(),
        "ratios {:?} move away from 1",
        r.ratio
    );
}

#[test]
fn ratio_degeneracy() {
    let grid = [10, 100, 1000];
    let p = UserChannelProfile::new(3, 10.0, 1, 1).unwrap();
    for approx in [false, true] {
        let sp = compute_scaling_report(FeedbackScheme::SpatialSelective, approx, &grid, &p).unwrap();
        let bl = compute_scaling_report(FeedbackScheme::BestL, approx, &grid, &p).unwrap();
        for (a, b) in sp.ratio.iter().zip(&bl.ratio) {
            assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
        }
        assert_eq!(sp.effective_k, bl.effective_k);
    }
}

#[test]
fn ratio_rho_invariance() {
    let grid = [100, 10_000];
    for scheme in SCHEMES {
        let p = |rho| UserChannelProfile::new(2, rho, 4, 1).unwrap();
        let lo = compute_scaling_report(scheme, false, &grid, &p(1.0)).unwrap();
        let hi = compute_scaling_report(scheme, false, &grid, &p(100.0)).unwrap();
        let gap = |i: usize| (lo.ratio[i] - hi.ratio[i]).abs();
        assert!(gap(1) < gap(0), "{}: {:?} vs {:?}", scheme.name(), lo.ratio, hi.ratio);
    }
}

#[test]
fn ratio_report_shape() {
    let p = UserChannelProfile::new(2, 10.0, 4, 2).unwrap();
    let grid = [5, 50, 500];
    let r = compute_scaling_report(FeedbackScheme::BestL, true, &grid, &p).unwrap();
    let eta = tail_equivalent_exponent(4, 2).unwrap();
    for (i, &k) in grid.iter().enumerate() {
        assert_relative_eq!(r.effective_k[i], eta * 2.0 * k as f64 / 4.0, max_relative = 1e-14);
        assert!(r.ratio[i].is_finite());
    }
    assert_eq!(effective_users(FeedbackScheme::SpatialSelective, false, 40, &p).unwrap(), 20.0);
    assert_eq!(effective_users(FeedbackScheme::SpatialSelective, true, 40, &p).unwrap(), 40.0);
    assert!(scaling_ratio_report(FeedbackScheme::BestL, true, &[50, 5], &p, &[]).is_err());
    let with = r.clone().with_ks(vec![0.3, 0.2, 0.1]).unwrap();
    assert_eq!(with.ks_strictly_decreasing(), Some(true));
    assert!(r.with_ks(vec![0.3, 1.2, 0.1]).is_err());
}

#[test]
fn random_sample_extreme_examples() {
    let law = base_law(FeedbackScheme::FullFeedback, &nb(2, 10.0)).unwrap();
    for x in [0.5, 3.0, 20.0] {
        assert_relative_eq!(random_sample_extreme_cdf(x, &law, 7, 1.0), law.cdf(x).powi(7), max_relative = 1e-13);
    }
    // A point mass reporting fraction recovers the degenerate form.
    let law = base_law(FeedbackScheme::SpatialSelective, &nb(4, 10.0)).unwrap();
    let w = 1e-3;
    let mixed = random_sample_extreme_cdf_mixed(8.0, &law, 40, |_| 1.0 / w, 0.25 - w / 2.0, 0.25 + w / 2.0).unwrap();
    assert!((mixed - random_sample_extreme_cdf(8.0, &law, 40, 0.25)).abs() < 1e-6);
}

struct Extremes {
    maxima: Vec<f64>,
    law: SinrLaw,
    p_success: f64,
}

fn extremes(scheme: FeedbackScheme, p: UserChannelProfile, base: LawKind) -> Extremes {
    let cfg = SystemConfig::homogeneous(p.m, 40, p.rho, scheme)
        .with_blocks(p.n, p.l)
        .with_seed(91);
    Extremes {
        maxima: DropSimulator::new(&cfg).unwrap().scheduler_maxima(100_000),
        law: SinrLaw::new(base, p).unwrap(),
        p_success: scheme.report_probability(p.m, p.n, p.l),
    }
}

impl Extremes {
    // Against F^{K p}.
    fn ks_power(&mut self) -> f64 {
        let (law, ps) = (&self.law, self.p_success);
        ks_statistic(&mut self.maxima, |x| random_sample_extreme_cdf(x, law, 40, ps))
    }

    // Against the exact law of the maximum over a Binomial(K, p) number of
    // reporters, given at least one: ((1 − p + pF)^K − (1 − p)^K)/(1 − (1 − p)^K).
    fn ks_binomial(&mut self) -> f64 {
        let (law, ps) = (&self.law, self.p_success);
        let empty = (1.0 - ps).powi(40);
        ks_statistic(&mut self.maxima, |x| {
            ((1.0 - ps + ps * law.cdf(x)).powi(40) - empty) / (1.0 - empty)
        })
    }
}

#[test]
fn spatial_maxima_follow_power_of_y() {
    let mut e = extremes(FeedbackScheme::SpatialSelective, nb(4, 10.0), LawKind::BestBeamY);
    assert_eq!(40.0 * e.p_success, 10.0);
    let d = e.ks_power();
    assert!(d <= 0.01, "KS against F_Y^10: {d}");
}

#[test]
fn best_l_maxima_follow_power_of_w() {
    let mut e = extremes(FeedbackScheme::BestL, UserChannelProfile::new(4, 10.0, 10, 2).unwrap(), LawKind::BestLW);
    assert_eq!(40.0 * e.p_success, 2.0);
    let d = e.ks_power();
    assert!(d <= 0.01, "KS against F_W^2: {d}");
}

#[test]
fn scheduler_maxima_follow_binomial_mixture() {
    for (scheme, p, base) in [
        (FeedbackScheme::SpatialSelective, nb(4, 10.0), LawKind::BestBeamY),
        (FeedbackScheme::BestL, UserChannelProfile::new(4, 10.0, 10, 2).unwrap(), LawKind::BestLW),
    ] {
        let mut e = extremes(scheme, p, base);
        let d = e.ks_binomial();
        assert!(d <= 0.01, "{}: KS {d}", scheme.name());
    }
}

fn feedback_counts(cfg: &SystemConfig, drops: u64) -> Vec<f64> {
    let sim = DropSimulator::new(cfg).unwrap();
    let slots = (cfg.m * cfg.n) as usize;
    let mut fractions = Vec::new();
    for t in 0..drops {
        let rec = sim.drop(t);
        let mut count = vec![0u32; slots];
        for r in &rec.reports {
            count[(r.rb * cfg.m + r.beam) as usize] += 1;
        }
        fractions.extend(count.iter().map(|&c| c as f64 / cfg.k as f64));
    }
    fractions
}

#[test]
fn reporting_fraction_concentrates() {
    for (scheme, n, l) in [
        (FeedbackScheme::SpatialSelective, 1, 1),
        (FeedbackScheme::BestL, 4, 1),
        (FeedbackScheme::BestL, 4, 2),
    ] {
        let cfg = SystemConfig::homogeneous(2, 1000, 10.0, scheme)
            .with_blocks(n, l)
            .with_seed(5);
        let p = cfg.report_probability();
        let drops = 400;
        let f = feedback_counts(&cfg, drops);
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        // Mean over drops of one slot; the slots of a drop share users.
        let bound = 4.0 * (p * (1.0 - p) / (1000.0 * drops as f64)).sqrt();
        assert!((mean - p).abs() <= bound, "{}: {mean} vs {p}", scheme.name());
        let var = f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (f.len() - 1) as f64;
        let clt = p * (1.0 - p) / 1000.0;
        assert!((var / clt - 1.0).abs() <= 0.10, "{}: variance {var} vs {clt}", scheme.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn growth_ratio_matches_closed_form(m in 1u32..=8, lrho in -1.0f64..2.0, lx in -3.0f64..2.0) {
        let p = nb(m, 10f64.powf(lrho));
        let x = 10f64.powf(lx);
        let law = SinrLaw::new(LawKind::PerBeamZ, p).unwrap();
        // The ratio form is 0/0 once the density underflows.
        prop_assume!(law.pdf(x) > 1e-290);
        let g = growth_function(x, &p);
        prop_assert!(g > 0.0);
        prop_assert!((g - growth_function_of(&law, x)).abs() <= 1e-10 * g);
    }

    #[test]
    fn tail_quantile_constants_sit_on_the_quantile(m in 1u32..=4, k in 10u32..5000, lrho in -1.0f64..2.0) {
        let p = nb(m, 10f64.powf(lrho));
        let nc = normalizing_constants_with(FeedbackScheme::FullFeedback, k, &p, Convention::TailQuantile).unwrap();
        prop_assert!(nc.scale > 0.0);
        prop_assert!((sf_z(nc.location, &p) * k as f64 - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn ks_is_a_distance(n in 1usize..200, shift in -3.0f64..3.0) {
        let mut xs: Vec<f64> = (0..n).map(|i| shift + i as f64 / n as f64).collect();
        let d = ks_statistic(&mut xs, gumbel_cdf);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(ks_critical(n, 0.05) > 0.0);
    }
}
