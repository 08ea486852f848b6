use num::complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use randbeam::distributions::{cdf_z, feedback_count_pmf, db_to_linear, SinrLaw, UserChannelProfile};
use randbeam::rates::{individual_sum_rate_best_l_exact, individual_sum_rate_spatial_exact};
use randbeam::simulator::{
    apply_feedback, beam_gains, calibrate_empirical_cdf, complex_normal, compute_sinr, generate_beams, inner,
    run_drops, sample_report_variable, scheme_law_kind, DropSimulator, EmpiricalCdf, SimulationEstimate, SinrTable,
    BATCHES,
};
use randbeam::stats::{chi_square_test, ks_critical, ks_statistic};
use randbeam::{CdfSource, Error, FeedbackScheme, SchedulerKind, SystemConfig};

// mpmath: log₂(e)·e·E1(1).
const RAYLEIGH_RATE_1: f64 = 0.860_347_382_270_885_95;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn channel(m: usize, r: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..m).map(|_| complex_normal(r)).collect()
}

fn run(cfg: &SystemConfig) -> SimulationEstimate {
    run_drops(cfg).unwrap()
}

#[test]
fn beams_are_orthonormal() {
    let mut r = rng(1);
    for m in 1..=8 {
        for _ in 0..50 {
            let b = generate_beams(m, &mut r);
            assert_eq!(b.size(), m);
            let g = b.gram();
            for i in 0..m {
                for j in 0..m {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i * m + j] - want).norm() <= 1e-12, "M={m} ({i},{j})");
                }
            }
        }
    }
    let b = generate_beams(1, &mut r);
    assert!((b.beam(0)[0].norm() - 1.0).abs() <= 1e-15);
}

#[test]
fn beams_are_isotropic() {
    // For M = 2, |h†φ₁|²/‖h‖² is uniform on [0, 1].
    let mut r = rng(2);
    let h = channel(2, &mut r);
    let norm: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    let mut u: Vec<f64> = (0..100_000)
        .map(|_| {
            let b = generate_beams(2, &mut r);
            inner(&h, b.beam(0)).norm_sqr() / norm
        })
        .collect();
    let d = ks_statistic(&mut u, |x| x.clamp(0.0, 1.0));
    assert!(d <= 0.01, "KS {d}");
}

#[test]
fn sinr_single_antenna() {
    let mut r = rng(3);
    for _ in 0..100 {
        let h = channel(1, &mut r);
        let b = generate_beams(1, &mut r);
        let want = 7.0 * inner(&h, b.beam(0)).norm_sqr();
        assert!((compute_sinr(&h, &b, 0, 7.0) - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn sinr_follows_per_beam_law() {
    let (m, rho) = (4, 10.0);
    let p = UserChannelProfile::narrowband(m as u32, rho).unwrap();
    let mut r = rng(4);
    let mut s: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let b = generate_beams(m, &mut r);
            let h = channel(m, &mut r);
            compute_sinr(&h, &b, 0, rho)
        })
        .collect();
    let d = ks_statistic(&mut s, |x| cdf_z(x, &p));
    assert!(d <= 0.003, "KS {d}");
}

#[test]
fn gains_sum_to_channel_norm() {
    let mut r = rng(5);
    for m in 1..=6 {
        let b = generate_beams(m, &mut r);
        let h = channel(m, &mut r);
        let mut g = vec![0.0; m];
        beam_gains(&h, &b, &mut g);
        let norm: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        assert!((g.iter().sum::<f64>() - norm).abs() <= 1e-12 * norm);
    }
}

#[test]
fn feedback_examples() {
    let mut r = rng(6);
    let t = SinrTable::draw(&[1.0, 2.0, 3.0], 1, 2, &mut r);
    assert_eq!(apply_feedback(&t, FeedbackScheme::FullFeedback, 1).len(), 6);
    let sp = apply_feedback(&t, FeedbackScheme::SpatialSelective, 1);
    assert_eq!(sp.len(), 3);
    for rep in &sp {
        let row: Vec<f64> = (0..2).map(|b| t.get(rep.user as usize, 0, b)).collect();
        assert_eq!(rep.sinr, row.iter().cloned().fold(f64::MIN, f64::max));
    }

    // Best-L with L = N is spatial-selective feedback on every block.
    let t = SinrTable::draw(&[10.0; 4], 3, 4, &mut r);
    let key = |v: &mut Vec<randbeam::simulator::FeedbackReport>| {
        v.sort_by_key(|x| (x.user, x.rb));
        v.iter().map(|x| (x.user, x.rb, x.beam, x.sinr.to_bits())).collect::<Vec<_>>()
    };
    let mut a = apply_feedback(&t, FeedbackScheme::BestL, 3);
    let mut b = apply_feedback(&t, FeedbackScheme::SpatialSelective, 1);
    assert_eq!(key(&mut a), key(&mut b));

    // K = 9, N = 5, M = 4, L = 2.
    let t = SinrTable::draw(&[10.0; 9], 5, 4, &mut r);
    let reps = apply_feedback(&t, FeedbackScheme::BestL, 2);
    assert_eq!(reps.len(), 18);
    for u in 0..9u32 {
        let mine: Vec<_> = reps.iter().filter(|x| x.user == u).collect();
        assert_eq!(mine.len(), 2);
        assert_ne!(mine[0].rb, mine[1].rb);
        let best_per_rb: Vec<f64> = (0..5)
            .map(|rb| (0..4).map(|b| t.get(u as usize, rb, b)).fold(f64::MIN, f64::max))
            .collect();
        let mut sorted = best_per_rb.clone();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let mut got: Vec<f64> = mine.iter().map(|x| x.sinr).collect();
        got.sort_by(|x, y| y.total_cmp(x));
        assert_eq!(got, sorted[..2]);
    }
}

#[test]
fn drop_outcome_invariants() {
    for (scheme, n, l, k) in [
        (FeedbackScheme::FullFeedback, 1, 1, 3),
        (FeedbackScheme::SpatialSelective, 1, 1, 6),
        (FeedbackScheme::BestL, 4, 2, 5),
    ] {
        for scheduler in [SchedulerKind::CdfBased, SchedulerKind::Greedy] {
            let cfg = SystemConfig::homogeneous(3, k, 10.0, scheme)
                .with_blocks(n, l)
                .with_scheduler(scheduler);
            let sim = DropSimulator::new(&cfg).unwrap();
            for t in 0..300 {
                let rec = sim.drop(t);
                for rb in 0..n as usize {
                    for beam in 0..3 {
                        let s = rec.outcome.slot(rb, beam);
                        let reporters: Vec<_> = rec
                            .reports
                            .iter()
                            .filter(|r| r.rb as usize == rb && r.beam as usize == beam)
                            .collect();
                        assert_eq!(s.feedback_count as usize, reporters.len());
                        assert_eq!(s.selected_user.is_some(), s.feedback_count > 0);
                        match s.selected_user {
                            Some(u) => {
                                let want = (1.0 + s.sinr).log2();
                                // log2(1 + x) itself loses relative accuracy for tiny x.
                                assert!((s.rate_contribution - want).abs() <= 1e-15 * want + 1e-16);
                                let best = reporters.iter().map(|r| r.sinr).fold(f64::MIN, f64::max);
                                // Homogeneous users: CDF ranking is raw ranking.
                                assert_eq!(s.sinr, best);
                                assert_eq!(rec.table.get(u as usize, rb, beam), s.sinr);
                            }
                            None => assert_eq!(s.rate_contribution, 0.0),
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn single_reporter_wins() {
    // One user with spatial feedback reports exactly one beam per drop.
    let cfg = SystemConfig::homogeneous(3, 1, 10.0, FeedbackScheme::SpatialSelective);
    let sim = DropSimulator::new(&cfg).unwrap();
    for t in 0..100 {
        let rec = sim.drop(t);
        let rep = rec.reports[0];
        assert_eq!(rec.outcome.slot(0, rep.beam as usize).selected_user, Some(0));
    }
}

#[test]
fn round_robin_assignment() {
    let cfg = SystemConfig::homogeneous(2, 3, 10.0, FeedbackScheme::SpatialSelective)
        .with_scheduler(SchedulerKind::RoundRobin);
    let sim = DropSimulator::new(&cfg).unwrap();
    for t in 0..30u64 {
        let rec = sim.drop(t);
        for m in 0..2 {
            let s = rec.outcome.slot(0, m);
            let want = ((t * 2 + m as u64) % 3) as u32;
            assert_eq!(s.selected_user, Some(want));
            assert_eq!(s.sinr, rec.table.get(want as usize, 0, m));
        }
    }
}

#[test]
fn two_users_split_evenly() {
    let cfg = SystemConfig::homogeneous(2, 2, 10.0, FeedbackScheme::FullFeedback).with_drops(100_000);
    let e = run(&cfg);
    for u in 0..2 {
        let f = e.selection_frequency[u];
        assert!((f - 0.5).abs() <= 3.0 * e.selection_frequency_se[u], "user {u}: {f}");
    }
}

// M = 4 as in the other fairness checks.
fn two_snr_config() -> SystemConfig {
    let mut cfg = SystemConfig::homogeneous(4, 2, 1.0, FeedbackScheme::FullFeedback).with_drops(50_000);
    cfg.rho = vec![1.0, 100.0];
    cfg
}

#[test]
fn cdf_scheduling_is_fair_across_snr() {
    let cdf = run(&two_snr_config());
    let band = 4.0 * cdf.selection_frequency_se[0].hypot(cdf.selection_frequency_se[1]);
    assert!(
        (cdf.selection_frequency[0] - cdf.selection_frequency[1]).abs() <= band,
        "{:?}",
        cdf.selection_frequency
    );
}

#[test]
fn greedy_favours_the_strong_user() {
    let greedy = run(&two_snr_config().with_scheduler(SchedulerKind::Greedy));
    assert!(greedy.selection_frequency[1] > greedy.selection_frequency[0]);
    assert!(greedy.selection_frequency[1] > 0.9, "{:?}", greedy.selection_frequency);
}

#[test]
fn fairness_across_twenty_db() {
    for scheme in [FeedbackScheme::FullFeedback, FeedbackScheme::SpatialSelective] {
        let mut cfg = SystemConfig::homogeneous(4, 5, 1.0, scheme).with_drops(20_000);
        cfg.rho = [0.0, 5.0, 10.0, 15.0, 20.0].iter().map(|&d| db_to_linear(d)).collect();
        let e = run(&cfg);
        let mean = e.selection_frequency.iter().sum::<f64>() / 5.0;
        for (u, f) in e.selection_frequency.iter().enumerate() {
            assert!((f - mean).abs() <= 4.0 * e.selection_frequency_se[u], "{} user {u}: {f} vs {mean}", scheme.name());
        }
        let g = run(&cfg.clone().with_scheduler(SchedulerKind::Greedy));
        assert!(g.selection_frequency.windows(2).all(|w| w[0] < w[1]), "{:?}", g.selection_frequency);
    }
}

#[test]
fn rayleigh_capacity_by_simulation() {
    let cfg = SystemConfig::homogeneous(1, 1, 1.0, FeedbackScheme::FullFeedback).with_drops(100_000);
    let e = run(&cfg);
    assert!((e.user_rate[0] - RAYLEIGH_RATE_1).abs() <= 2.0 * e.user_rate_se[0], "{}", e.user_rate[0]);
}

#[test]
fn runs_are_deterministic() {
    let cfg = SystemConfig::homogeneous(3, 6, 10.0, FeedbackScheme::BestL)
        .with_blocks(3, 2)
        .with_drops(3000)
        .with_seed(44);
    let a = run(&cfg);
    assert_eq!(a, run(&cfg));
    let threaded = |t: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .unwrap()
            .install(|| run(&cfg))
    };
    assert_eq!(a, threaded(1));
    assert_eq!(a, threaded(3));
    assert_ne!(a, run(&cfg.clone().with_seed(45)));
}

#[test]
fn spatial_outage_fraction() {
    let cfg = SystemConfig::homogeneous(4, 10, 10.0, FeedbackScheme::SpatialSelective).with_drops(50_000);
    let e = run(&cfg);
    let want = 0.75f64.powi(10);
    assert!((want - 0.0563).abs() < 5e-5);
    for (s, (&f, &se)) in e.outage_fraction.iter().zip(&e.outage_fraction_se).enumerate() {
        assert!((f - want).abs() <= 3.0 * se, "beam {s}: {f}");
    }
}

#[test]
fn frequencies_and_outage_partition_slots() {
    let cfg = SystemConfig::homogeneous(4, 6, 10.0, FeedbackScheme::BestL)
        .with_blocks(4, 1)
        .with_drops(4000);
    let e = run(&cfg);
    let slots = 16.0;
    let won: f64 = e.selection_frequency.iter().sum();
    let out: f64 = e.outage_fraction.iter().sum::<f64>() / slots;
    assert!((won + out - 1.0).abs() <= 1e-12);
    assert!(e.batches >= 20 && BATCHES >= 20);
    assert!(e.user_rate_se.iter().all(|&s| s > 0.0));
}

#[test]
fn feedback_counts_are_binomial() {
    for (scheme, n, l) in [
        (FeedbackScheme::SpatialSelective, 1, 1),
        (FeedbackScheme::BestL, 4, 1),
        (FeedbackScheme::BestL, 4, 3),
    ] {
        let cfg = SystemConfig::homogeneous(2, 12, 10.0, scheme)
            .with_blocks(n, l)
            .with_drops(20_000);
        let e = run(&cfg);
        let p = cfg.report_probability();
        let probs: Vec<f64> = (0..=12).map(|t| feedback_count_pmf(t, 12, p)).collect();
        let (_, pval) = chi_square_test(&e.feedback_count_histogram, &probs);
        assert!(pval > 0.01, "{} N={n} L={l}: p = {pval}", scheme.name());
    }
}

#[test]
fn multi_beam_wins_become_rare() {
    let mut prev = 1.0;
    // Below K = 4 a user holding two of the four beams is forced.
    for k in [4, 6, 8, 12, 16, 24] {
        let cfg = SystemConfig::homogeneous(4, k, 10.0, FeedbackScheme::FullFeedback).with_drops(20_000);
        let f = run(&cfg).multi_beam_fraction;
        assert!(f < prev, "K={k}: {f} !< {prev}");
        prev = f;
    }
}

#[test]
fn empirical_calibration() {
    let cfg = SystemConfig::homogeneous(4, 1, 10.0, FeedbackScheme::FullFeedback);
    let n = 20_000;
    let cal = calibrate_empirical_cdf(&cfg, n).unwrap();
    assert_eq!(cal.cdfs.len(), 1);
    let p = UserChannelProfile::narrowband(4, 10.0).unwrap();
    let mut s = cal.cdfs[0].samples().to_vec();
    let d = ks_statistic(&mut s, |x| cdf_z(x, &p));
    assert!(d <= 1.36 / (n as f64).sqrt(), "KS {d}");
    let e = &cal.cdfs[0];
    assert!(e.cdf(0.5) <= e.cdf(1.0) && (e.cdf(1.0) + e.sf(1.0) - 1.0).abs() < 1e-12);

    assert!(matches!(calibrate_empirical_cdf(&cfg, 1), Err(Error::InsufficientSamples { .. })));
    assert!(EmpiricalCdf::new(Vec::new()).is_err());
}

#[test]
fn empirical_scheduling_matches_analytic() {
    let base = SystemConfig::homogeneous(4, 10, 10.0, FeedbackScheme::SpatialSelective)
        .with_drops(20_000)
        .with_seed(8);
    let mut mixed = base.clone();
    mixed.rho = (0..10).map(|i| db_to_linear(i as f64 * 2.0)).collect();
    for cfg in [base, mixed] {
        let analytic = run(&cfg);
        let empirical = run(&cfg.clone().with_cdf_source(CdfSource::Empirical { calibration_drops: 5000 }));
        for u in 0..10 {
            let (a, b) = (analytic.individual_sum_rate[u], empirical.individual_sum_rate[u]);
            let se = analytic.individual_sum_rate_se[u].max(empirical.individual_sum_rate_se[u]);
            assert!((a - b).abs() <= 2.0 * se, "user {u}: {a} vs {b} (se {se})");
        }
    }
}

#[test]
fn empirical_source_needs_calibration() {
    let cfg = SystemConfig::homogeneous(2, 3, 10.0, FeedbackScheme::FullFeedback)
        .with_cdf_source(CdfSource::Empirical { calibration_drops: 10 });
    assert!(run_drops(&cfg).is_err());
}

#[test]
fn probability_integral_transform_is_uniform() {
    let n = 100_000;
    for (scheme, nb, l) in [
        (FeedbackScheme::FullFeedback, 1, 1),
        (FeedbackScheme::SpatialSelective, 1, 1),
        (FeedbackScheme::BestL, 4, 2),
    ] {
        for rho in [1.0, 10.0, 100.0] {
            let p = UserChannelProfile::new(4, rho, nb, l).unwrap();
            let law = SinrLaw::new(scheme_law_kind(scheme), p).unwrap();
            let mut u: Vec<f64> = sample_report_variable(&p, scheme, n, 12, 0)
                .into_iter()
                .map(|x| law.cdf(x))
                .collect();
            let d = ks_statistic(&mut u, |x| x.clamp(0.0, 1.0));
            assert!(d <= ks_critical(n, 0.05), "{} ρ={rho}: KS {d}", scheme.name());
        }
    }
}

#[test]
fn spatial_rate_matches_simulation() {
    let cfg = SystemConfig::homogeneous(4, 10, 10.0, FeedbackScheme::SpatialSelective).with_drops(40_000);
    let e = run(&cfg);
    let exact = individual_sum_rate_spatial_exact(10, &cfg.profile(0)).unwrap().value;
    let ci = 2.576 * e.mean_individual_sum_rate_se;
    assert!((e.mean_individual_sum_rate - exact).abs() <= ci, "{} vs {exact} ± {ci}", e.mean_individual_sum_rate);
}

#[test]
fn best_l_rate_matches_simulation() {
    let cfg = SystemConfig::homogeneous(4, 20, 10.0, FeedbackScheme::BestL)
        .with_blocks(10, 2)
        .with_drops(20_000);
    let e = run(&cfg);
    let exact = individual_sum_rate_best_l_exact(20, &cfg.profile(0)).unwrap().value;
    let ci = 2.576 * e.mean_individual_sum_rate_se;
    assert!((e.mean_individual_sum_rate - exact).abs() <= ci, "{} vs {exact} ± {ci}", e.mean_individual_sum_rate);
}

#[test]
fn invalid_configs_are_rejected() {
    let good = SystemConfig::homogeneous(2, 3, 10.0, FeedbackScheme::BestL).with_blocks(4, 2);
    assert!(good.validate().is_ok());
    let mut bad = good.clone();
    bad.rho.pop();
    assert!(bad.validate().is_err());
    assert!(good.clone().with_blocks(4, 5).validate().is_err());
    assert!(good.clone().with_blocks(4, 0).validate().is_err());
    assert!(good.clone().with_drops(0).validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinr_increases_with_rho(seed in 0u64..1_000_000, m in 1usize..=6, lrho in -2.0f64..2.0, factor in 1.01f64..10.0) {
        let mut r = rng(seed);
        let b = generate_beams(m, &mut r);
        let h = channel(m, &mut r);
        let rho = 10f64.powf(lrho);
        for beam in 0..m {
            prop_assert!(compute_sinr(&h, &b, beam, rho * factor) > compute_sinr(&h, &b, beam, rho));
        }
    }
}
