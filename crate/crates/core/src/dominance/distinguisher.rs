use rayon::prelude::*;

use super::score::draw_empirical_mean;
use super::{DominanceParams, UtilityEnsemble};
use crate::error::Result;
use crate::rng::stream;

const TAG_DIST: u64 = 2;

/// Advantage of the sample-mean distinguisher between X and Y.
///
/// A trial hands the distinguisher m samples of a challenge ensemble
/// Z ∈ {X, Y} plus m fresh reference samples of X; it outputs 1 iff
/// Z̄ > X̄ and abstains on exact ties. Both arms are run N trials each and
/// the estimate is |P[output 1 | Z = X] − P[output 1 | Z = Y]|.
pub fn mean_distinguisher_advantage(
    x: &UtilityEnsemble,
    y: &UtilityEnsemble,
    params: &DominanceParams,
) -> Result<f64> {
    let m = params.samples_per_trial()?;
    let n = params.trials;
    let kappa = params.kappa;
    let seed = params.master_seed;

    let ones_per_arm = |challenge: &UtilityEnsemble, arm: u64| -> u64 {
        (0..n)
            .into_par_iter()
            .map(|trial| {
                let t = trial as u64;
                let mut rng_z = stream(seed, &[TAG_DIST, kappa as u64, arm, t, 0]);
                let mut rng_ref = stream(seed, &[TAG_DIST, kappa as u64, arm, t, 1]);
                let z_bar = draw_empirical_mean(challenge, kappa, m, &mut rng_z);
                let x_bar = draw_empirical_mean(x, kappa, m, &mut rng_ref);
                (z_bar > x_bar) as u64
            })
            .sum()
    };

    let p1_x = ones_per_arm(x, 0) as f64 / n as f64;
    let p1_y = ones_per_arm(y, 1) as f64 / n as f64;
    Ok((p1_x - p1_y).abs())
}
