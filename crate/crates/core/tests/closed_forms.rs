//! Monte Carlo cross-check of the conditional withholding payoff against
//! full round-level play of the secret-sharing protocol.

use pseudonash::analysis::{ht_withhold_conditional_payoff, DEFAULT_ALPHA};
use pseudonash::games::ht::{make_ht_game, outcome_end_round, s_star, withhold_at, HtConfig};
use pseudonash::runtime::play_once;

#[test]
fn withhold_matches_conditional_closed_form() {
    let kappa = 6;
    let alpha = DEFAULT_ALPHA;
    let game = make_ht_game(HtConfig::standard()).unwrap();
    let profile = vec![withhold_at(alpha, |_| 0), s_star(alpha), s_star(alpha)];

    // condition on the reveal slot actually firing at iteration 0: those
    // plays end inside iteration 0, with the withholder either the sole
    // learner (round 3) or everyone empty-handed (abort at round 4)
    let expected = ht_withhold_conditional_payoff(kappa, alpha).unwrap();
    let sole = (1u64 << (kappa + 1)) as f64 + 2.0;

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut hits = 0u32;
    let mut seed = 0u64;
    while hits < 2000 {
        let t = play_once(&game, &profile, kappa, seed).unwrap();
        seed += 1;
        if outcome_end_round(&t) > 4 {
            continue;
        }
        let u = t.utilities[0];
        assert!(
            u == 1.0 || u == sole,
            "conditional payoff must be 1 or {sole}, got {u}"
        );
        sum += u;
        sum_sq += u * u;
        hits += 1;
    }
    let mean = sum / hits as f64;
    let var = (sum_sq / hits as f64 - mean * mean).max(0.0);
    let tol = 3.0 * (var / hits as f64).sqrt();
    assert!(
        (mean - expected).abs() <= tol,
        "conditional mean {mean} vs closed form {expected} (tol {tol})"
    );
}
