//! End-to-end acceptance checks. Each test prints one pass or fail line;
//! all tolerances are pinned as constants here.

use std::sync::Arc;

use pseudonash::analysis;
use pseudonash::dominance::{
    em_dominance_score, exact_dominance_score, hoeffding_sample_threshold,
    mean_distinguisher_advantage, FiniteDist,
};
use pseudonash::games::{guessing, ht};
use pseudonash::rng::stream;
use pseudonash::runtime::{
    check_pseudo_nash, play_once, pseudo_nash_pass, substitute_functionality, utility_ensemble,
    Deviation, FunctionalityImpl,
};
use pseudonash::{DominanceParams, UtilityEnsemble, Verdict};
use rand::Rng;

const ALPHA: f64 = 1.0 / 3.0;
/// Criterion 3: Monte-Carlo score ceiling and exact-tail relative error.
const C3_SCORE_MAX: f64 = 0.01;
const C3_TAIL_REL: f64 = 1e-12;
/// Criterion 4: absolute tolerance on the stop probability at 10^4 plays.
const C4_TOL: f64 = 0.02;
/// Criteria 5 and 6: relative tolerance on the Monte-Carlo gaps.
const C56_REL: f64 = 0.10;
/// Criterion 7: score ceiling for the fast pseudo check at kappa = 400.
const C7_SCORE_MAX: f64 = 0.005;
/// Criterion 8: absolute tolerances on the guessing-game means.
const C8_MEAN_TOL: f64 = 0.5;
const C8_GAIN_TOL: f64 = 15.0;

fn criterion(n: u32, desc: &str, pass: bool) {
    println!("criterion {n}: {} - {desc}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {desc}");
}

fn mc_mean(plays: u64, seed: u64, tag: u64, mut f: impl FnMut(&mut pseudonash::rng::Stream) -> f64) -> f64 {
    let mut rng = stream(seed, &[tag]);
    let mut sum = 0.0;
    for _ in 0..plays {
        sum += f(&mut rng);
    }
    sum / plays as f64
}

#[test]
fn criterion_01_dominance_oracle_equivalence() {
    let ps = [0.2, 0.35, 0.5, 0.65, 0.8];
    let mut checked = 0;
    let mut pass = true;
    for (i, &p) in ps.iter().enumerate() {
        for (j, &q) in ps.iter().enumerate() {
            let x = FiniteDist::new(vec![(0.0, 1.0 - p), (1.0, p)]).unwrap();
            let y = FiniteDist::new(vec![
                (0.0, (1.0 - q) / 2.0),
                (0.6, 0.5),
                (1.4, q / 2.0),
            ])
            .unwrap();
            let m = 1 + ((i + j) % 4) as u64;
            let exact = exact_dominance_score(&x, &y, m).unwrap();
            let params = DominanceParams::new(4, 1, 2, 10_000, 90 + checked)
                .unwrap()
                .with_m(m);
            let report = em_dominance_score(
                &x.to_ensemble("x"),
                &y.to_ensemble("y"),
                &params,
            )
            .unwrap();
            pass &= (report.score - exact).abs() <= report.ci_half_width + 1e-12;
            checked += 1;
        }
    }
    criterion(
        1,
        &format!("{checked} finite pairs, Monte-Carlo score within 3 sigma of exact"),
        pass && checked == 25,
    );
}

#[test]
fn criterion_02_nash_pseudo_equivalence_on_fixed_games() {
    // random 2x2 games; the uniform mixed profile against each pure
    // deviation, with every expectation gap at least 0.3 on payoff range 1
    let mut rng = stream(42, &[2]);
    let mut agree = 0;
    let mut total = 0;
    for game_idx in 0..20u64 {
        let (payoffs, prof, devs) = loop {
            let draw: Vec<Vec<(f64, f64)>> = (0..2)
                .map(|_| {
                    (0..2)
                        .map(|_| {
                            (
                                rng.gen_range(0..=10) as f64 / 10.0,
                                rng.gen_range(0..=10) as f64 / 10.0,
                            )
                        })
                        .collect()
                })
                .collect();
            let pick = |player: usize, i: usize, j: usize| {
                if player == 0 {
                    draw[i][j].0
                } else {
                    draw[i][j].1
                }
            };
            // profile mean for a player under uniform play by both
            let prof: Vec<f64> = (0..2)
                .map(|p| (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| pick(p, i, j)).sum::<f64>() / 4.0)
                .collect();
            // deviation (player, action): that player goes pure
            let devs: Vec<(usize, usize, f64)> = (0..2)
                .flat_map(|p| (0..2).map(move |a| (p, a)))
                .map(|(p, a)| {
                    let mean = (0..2)
                        .map(|other| {
                            if p == 0 {
                                pick(0, a, other)
                            } else {
                                pick(1, other, a)
                            }
                        })
                        .sum::<f64>()
                        / 2.0;
                    (p, a, mean)
                })
                .collect();
            if devs.iter().all(|&(p, _, m)| (m - prof[p]).abs() >= 0.3) {
                break (draw, prof, devs);
            }
        };
        let pick = |player: usize, i: usize, j: usize| {
            if player == 0 {
                payoffs[i][j].0
            } else {
                payoffs[i][j].1
            }
        };
        for &(p, a, dev_mean) in &devs {
            let prof_dist = FiniteDist::new(
                (0..2)
                    .flat_map(|i| (0..2).map(move |j| (i, j)))
                    .map(|(i, j)| (pick(p, i, j), 0.25))
                    .collect(),
            )
            .unwrap();
            let dev_dist = FiniteDist::new(
                (0..2)
                    .map(|other| {
                        let v = if p == 0 { pick(0, a, other) } else { pick(1, other, a) };
                        (v, 0.5)
                    })
                    .collect(),
            )
            .unwrap();
            let delta = (dev_mean - prof[p]).abs();
            let threshold = hoeffding_sample_threshold(delta, 1.0).unwrap();
            let params = DominanceParams::new(4, 1, 2, 2000, 7000 + game_idx)
                .unwrap()
                .with_m(threshold.pow(4));
            let report = em_dominance_score(
                &prof_dist.to_ensemble("profile"),
                &dev_dist.to_ensemble("deviation"),
                &params,
            )
            .unwrap();
            let expectation_ok = dev_mean < prof[p];
            let dominance_ok = report.verdict == Verdict::Dominates;
            total += 1;
            if expectation_ok == dominance_ok {
                agree += 1;
            }
        }
    }
    criterion(
        2,
        &format!("expectation ordering and dominance verdict agree on {agree}/{total} pairs"),
        agree == total && total == 80,
    );
}

#[test]
fn criterion_03_example35_separation() {
    let x = UtilityEnsemble::example35_x();
    let y = UtilityEnsemble::example35_y();
    let params = DominanceParams::new(20, 1, 2, 10_000, 35).unwrap();
    let report = em_dominance_score(&x, &y, &params).unwrap();
    let mean_ratio = y.exact_mean(20).unwrap() / x.exact_mean(20).unwrap();

    // exact rational oracle for 1 - (1 - 2^-20)^400
    use num_bigint::BigInt;
    use num_rational::BigRational;
    let one = BigRational::from(BigInt::from(1));
    let q = &one - BigRational::new(BigInt::from(1), BigInt::from(2).pow(20));
    let mut pow = one.clone();
    for _ in 0..400 {
        pow *= &q;
    }
    let exact = &one - &pow;
    let scale = BigInt::from(10).pow(30);
    let exact_f = ((exact.numer() * &scale) / exact.denom())
        .to_string()
        .parse::<f64>()
        .unwrap()
        * 1e-30;
    let got = analysis::example35_tail_bounds(20, 400).p_y_nonzero;

    criterion(
        3,
        &format!(
            "score {:.4} <= {C3_SCORE_MAX}, mean ratio 2^20, tail to 12 digits",
            report.score
        ),
        report.score <= C3_SCORE_MAX
            && mean_ratio == 2f64.powi(20)
            && ((got - exact_f) / exact_f).abs() < C3_TAIL_REL,
    );
}

#[test]
fn criterion_04_ht_stop_time_law() {
    use rayon::prelude::*;
    let kappa = 10;
    let plays = 10_000u64;
    let game = ht::make_ht_game(ht::HtConfig::standard())
        .unwrap()
        .with_max_rounds(|_| 100_000);
    let profile = vec![ht::s_star(ALPHA); 3];
    let stopped: u64 = (0..plays)
        .into_par_iter()
        .map(|seed| {
            let t = play_once(&game, &profile, kappa, seed).unwrap();
            (ht::outcome_end_round(&t) <= 4 * kappa) as u64
        })
        .sum();
    let empirical = stopped as f64 / plays as f64;
    let closed = analysis::ht_stop_within(kappa, ALPHA).unwrap();
    criterion(
        4,
        &format!("empirical stop prob {empirical:.4} vs closed form {closed:.4} within {C4_TOL}"),
        (empirical - closed).abs() <= C4_TOL,
    );
}

#[test]
fn criterion_05_eps_nash_separation() {
    let crossing = analysis::eps_nash_gap(7) < 100.0
        && analysis::eps_nash_gap(8) > 100.0
        && analysis::eps_nash_threshold(100.0).unwrap() == 8;

    // unbounded play always reconstructs, so its mean is exactly 2^10
    let plays = 100_000;
    let hat = mc_mean(plays, 55, 0, |rng| ht::fast_sample_s_hat(10, ALPHA, rng));
    let gap = 2f64.powi(10) - hat;
    let closed = analysis::eps_nash_gap(10);
    criterion(
        5,
        &format!(
            "gap crosses 100 between kappa 7 and 8; MC gap {gap:.1} within 10% of {closed:.1}"
        ),
        crossing && (gap - closed).abs() <= C56_REL * closed,
    );
}

#[test]
fn criterion_06_computational_nash_failure_witness() {
    let plays = 100_000;
    let hat = mc_mean(plays, 66, 0, |rng| ht::fast_sample_s_hat(10, ALPHA, rng));
    let ext = mc_mean(plays, 66, 1, |rng| ht::fast_sample_extend(10, ALPHA, rng));
    let gap = ext - hat;
    let closed = analysis::comp_nash_gap(10);
    criterion(
        6,
        &format!("MC extension gap {gap:.1} within 10% of {closed:.1}"),
        (gap - closed).abs() <= C56_REL * closed,
    );
}

fn fast_ensemble(name: &'static str, f: fn(u32, f64, &mut pseudonash::rng::Stream) -> f64) -> UtilityEnsemble {
    UtilityEnsemble::new(name, move |k, rng| f(k, ALPHA, rng))
        .with_support_bound(|k| 2f64.powi(k as i32 + 1) + 2.0)
}

#[test]
fn criterion_07_pseudo_nash_of_s_hat_at_scale() {
    let kappa = 400;
    let params = DominanceParams::new(kappa, 1, 2, 1000, 7)
        .unwrap()
        .with_m(100);
    let hat = fast_ensemble("s-hat", ht::fast_sample_s_hat);
    let withhold = fast_ensemble("withhold:last", ht::fast_sample_withhold_last);
    let report = em_dominance_score(&hat, &withhold, &params).unwrap();
    let bound = analysis::ht_pseudo_failure_bound(kappa, 100);

    // round-level cross-validation on 100 plays: the honest profile
    // reconstructs at the same rate the fast sampler reports
    let game = ht::make_ht_game(ht::HtConfig::standard()).unwrap();
    let profile = vec![ht::s_hat(ALPHA); 3];
    let mut round_success = 0u32;
    for seed in 0..100 {
        let t = play_once(&game, &profile, kappa, seed).unwrap();
        round_success += (t.utilities[0] == 2f64.powi(kappa as i32)) as u32;
    }
    let mut rng = stream(7, &[700]);
    let mut fast_success = 0u32;
    for _ in 0..100 {
        fast_success +=
            (ht::fast_sample_s_hat(kappa, ALPHA, &mut rng) == 2f64.powi(kappa as i32)) as u32;
    }
    let rate_gap = (round_success as f64 - fast_success as f64).abs() / 100.0;

    criterion(
        7,
        &format!(
            "score {:.5} <= {C7_SCORE_MAX} (bound {bound:.1e}), verdict {:?}, round/fast success gap {rate_gap:.2}",
            report.score, report.verdict
        ),
        report.score <= C7_SCORE_MAX
            && report.verdict == Verdict::Dominates
            && rate_gap <= 0.05,
    );
}

#[test]
fn criterion_08_guessing_game() {
    // ideal variant: every guessing deviation keeps the guesser mean at 1
    let game = guessing::make_guessing_game();
    let kappa = 8;
    let guessers = [
        guessing::uniform_guesser(),
        guessing::fixed_guesser(0),
        guessing::fixed_guesser(7),
    ];
    let mut ideal_ok = true;
    for (i, guesser) in guessers.iter().enumerate() {
        let profile = vec![guessing::uniform_committer(), guesser.clone()];
        let ensemble = utility_ensemble(&game, &profile, 1).unwrap();
        let mean = mc_mean(20_000, 800 + i as u64, 0, |rng| ensemble.sample(kappa, rng));
        ideal_ok &= (mean - 1.0).abs() <= C8_MEAN_TOL;
    }

    // real variant at kappa = 8: budget 2^16 recovers the committed value
    let lambda = 8;
    let real = substitute_functionality(
        &game,
        guessing::COMMITMENT_SLOT,
        FunctionalityImpl::HashCommitment { lambda },
    )
    .unwrap();
    let brute = vec![
        guessing::uniform_committer(),
        guessing::brute_force_guesser(lambda, 1 << 16).unwrap(),
    ];
    let brute_ens = utility_ensemble(&real, &brute, 1).unwrap();
    let brute_mean = mc_mean(200, 801, 0, |rng| brute_ens.sample(kappa, rng));
    let honest = vec![guessing::uniform_committer(), guessing::uniform_guesser()];
    let honest_ens = utility_ensemble(&real, &honest, 1).unwrap();
    let honest_mean = mc_mean(2000, 802, 0, |rng| honest_ens.sample(kappa, rng));
    let gain = brute_mean - honest_mean;
    let gain_ok = (gain - 255.0).abs() <= C8_GAIN_TOL;

    // at kappa = 24 the same polynomial budgets recover nothing and the
    // uniform profile passes the pseudo check
    let params = DominanceParams::new(24, 1, 2, 200, 803).unwrap().with_m(32);
    let deviations = vec![
        Deviation {
            player: 1,
            strategy: guessing::fixed_guesser(0),
        },
        Deviation {
            player: 1,
            strategy: guessing::brute_force_guesser(lambda, 1 << 12).unwrap(),
        },
    ];
    let real24 = substitute_functionality(
        &game,
        guessing::COMMITMENT_SLOT,
        FunctionalityImpl::HashCommitment { lambda },
    )
    .unwrap();
    let honest24: Vec<Arc<dyn pseudonash::runtime::Strategy>> =
        vec![guessing::uniform_committer(), guessing::uniform_guesser()];
    let reports = check_pseudo_nash(&real24, &honest24, &deviations, &params).unwrap();
    let pseudo_ok = pseudo_nash_pass(&reports);

    criterion(
        8,
        &format!("ideal means at 1, brute gain {gain:.1} near 255, pseudo pass at kappa 24"),
        ideal_ok && gain_ok && pseudo_ok,
    );
}

#[test]
fn criterion_09_distinguisher_sanity() {
    let builtins: Vec<UtilityEnsemble> = vec![
        UtilityEnsemble::example35_x(),
        UtilityEnsemble::example35_y(),
        UtilityEnsemble::uniform_zero_two(),
        UtilityEnsemble::constant(0.0),
        UtilityEnsemble::constant(1.0),
        UtilityEnsemble::constant(2.5),
        UtilityEnsemble::bernoulli(0.3, 0.0, 1.0),
        UtilityEnsemble::bernoulli(0.5, -1.0, 1.0),
        UtilityEnsemble::bernoulli(0.8, 0.0, 2.0),
        UtilityEnsemble::bernoulli(0.5, 0.0, 1.0),
    ];
    let n = 10_000u32;
    let mut self_ok = true;
    for (i, e) in builtins.iter().enumerate() {
        let params = DominanceParams::new(4, 1, 2, n, 900 + i as u64)
            .unwrap()
            .with_m(4);
        let adv = mean_distinguisher_advantage(e, e, &params).unwrap();
        self_ok &= adv <= 3.0 / (n as f64).sqrt();
    }
    let params = DominanceParams::new(4, 1, 2, n, 950).unwrap().with_m(4);
    let disjoint = mean_distinguisher_advantage(
        &UtilityEnsemble::constant(0.0),
        &UtilityEnsemble::constant(1.0),
        &params,
    )
    .unwrap();
    criterion(
        9,
        "self-advantage below 3/sqrt(N) on 10 built-ins; disjoint constants at 1",
        self_ok && disjoint == 1.0,
    );
}

/// A representative slice of every report-producing path, serialized.
fn determinism_bundle() -> String {
    let mut out = String::new();
    let params = DominanceParams::new(20, 1, 2, 2000, 10).unwrap();
    let r = em_dominance_score(
        &UtilityEnsemble::example35_x(),
        &UtilityEnsemble::example35_y(),
        &params,
    )
    .unwrap();
    out.push_str(&serde_json::to_string(&r).unwrap());
    let params = DominanceParams::new(400, 1, 2, 1000, 7).unwrap().with_m(100);
    let r = em_dominance_score(
        &fast_ensemble("s-hat", ht::fast_sample_s_hat),
        &fast_ensemble("withhold:last", ht::fast_sample_withhold_last),
        &params,
    )
    .unwrap();
    out.push_str(&serde_json::to_string(&r).unwrap());
    let game = guessing::make_guessing_game();
    let profile: Vec<Arc<dyn pseudonash::runtime::Strategy>> =
        vec![guessing::uniform_committer(), guessing::uniform_guesser()];
    let deviations = vec![Deviation {
        player: 1,
        strategy: guessing::fixed_guesser(0),
    }];
    let params = DominanceParams::new(8, 1, 2, 200, 10).unwrap().with_m(16);
    let reports = check_pseudo_nash(&game, &profile, &deviations, &params).unwrap();
    out.push_str(&serde_json::to_string(&reports).unwrap());
    out
}

#[test]
fn criterion_10_determinism_across_worker_counts() {
    let run_with = |workers: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap()
            .install(determinism_bundle)
    };
    let one = run_with(1);
    let eight = run_with(8);
    criterion(
        10,
        "report bundle byte-identical at worker counts 1 and 8",
        one == eight && !one.is_empty(),
    );
}
