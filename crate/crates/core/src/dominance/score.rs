use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::UtilityEnsemble;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Op tag for seed-path separation between the engine's entry points.
pub(crate) const TAG_EM: u64 = 1;

/// Default per-trial sample cap; κ^ĉ explodes quickly otherwise.
pub const DEFAULT_SAMPLE_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DominanceParams {
    /// Security/size parameter κ.
    pub kappa: u32,
    /// Target exponent: the dominance threshold is 1/κ^c.
    pub c: u32,
    /// Sample exponent ĉ: each trial draws m = κ^ĉ samples per arm.
    pub c_hat: u32,
    /// Outer Monte-Carlo repetitions used to estimate the two probabilities.
    pub trials: u32,
    /// Reproducibility root; all trial streams derive from it.
    pub master_seed: u64,
    /// Hard cap on m; exceeding it is a capacity error, not a silent clamp.
    pub sample_cap: u64,
    /// When set, use this m instead of κ^ĉ (desk-scale runs pick m directly).
    pub m_override: Option<u64>,
}

impl DominanceParams {
    pub fn new(kappa: u32, c: u32, c_hat: u32, trials: u32, master_seed: u64) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::Domain("kappa must be positive".into()));
        }
        if c == 0 {
            return Err(Error::Domain("c must be positive".into()));
        }
        if c_hat <= c {
            return Err(Error::Domain(format!(
                "c_hat must exceed c (got c_hat={c_hat}, c={c})"
            )));
        }
        if trials < 100 {
            return Err(Error::Domain(format!(
                "need at least 100 trials for a meaningful confidence interval (got {trials})"
            )));
        }
        Ok(Self {
            kappa,
            c,
            c_hat,
            trials,
            master_seed,
            sample_cap: DEFAULT_SAMPLE_CAP,
            m_override: None,
        })
    }

    /// ĉ = 4c satisfies both the large-gap and the tie regime; the default.
    pub fn with_default_c_hat(kappa: u32, c: u32, trials: u32, master_seed: u64) -> Result<Self> {
        Self::new(kappa, c, 4 * c, trials, master_seed)
    }

    pub fn with_sample_cap(mut self, cap: u64) -> Self {
        self.sample_cap = cap;
        self
    }

    pub fn with_m(mut self, m: u64) -> Self {
        self.m_override = Some(m);
        self
    }

    /// m = κ^ĉ (or the override), checked against the cap.
    pub fn samples_per_trial(&self) -> Result<u64> {
        let required: u128 = match self.m_override {
            Some(m) => m as u128,
            None => (self.kappa as u128)
                .checked_pow(self.c_hat)
                .unwrap_or(u128::MAX),
        };
        if required == 0 {
            return Err(Error::Domain("samples per trial must be positive".into()));
        }
        if required > self.sample_cap as u128 {
            return Err(Error::Capacity {
                what: "samples per trial (m = kappa^c_hat)",
                required,
                cap: self.sample_cap as u128,
            });
        }
        Ok(required as u64)
    }

    /// The finite-κ dominance threshold 1/κ^c.
    pub fn threshold(&self) -> f64 {
        (self.kappa as f64).powi(-(self.c as i32))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Dominates,
    Inconclusive,
    Violated,
}

/// Outcome of one computational-dominance check at fixed (κ, c, ĉ).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DominanceReport {
    pub kappa: u32,
    pub c: u32,
    #[serde(rename = "cHat")]
    pub c_hat: u32,
    /// Samples per trial, m.
    pub m: u64,
    pub trials: u32,
    /// Estimate of P[Ȳ > X̄] − P[X̄ > Ȳ] ∈ [−1, 1].
    pub score: f64,
    /// 3σ binomial-difference half-width over the N trials.
    pub ci_half_width: f64,
    /// 1/κ^c.
    pub threshold: f64,
    pub verdict: Verdict,
    pub seed: u64,
}

impl DominanceReport {
    /// The stated decision rule, applied verbatim.
    pub fn decide(score: f64, ci_half_width: f64, threshold: f64) -> Verdict {
        if score + ci_half_width < threshold {
            Verdict::Dominates
        } else if score - ci_half_width >= threshold {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Arithmetic mean of m fresh samples of `ensemble` at parameter κ.
pub fn draw_empirical_mean(ensemble: &UtilityEnsemble, kappa: u32, m: u64, rng: &mut Stream) -> f64 {
    debug_assert!(m >= 1);
    let mut acc = 0.0;
    for _ in 0..m {
        acc += ensemble.sample(kappa, rng);
    }
    acc / m as f64
}

/// Estimate whether X's empirical mean dominates Y's at (κ, c, ĉ).
///
/// Each of N independent trials draws fresh m-sample means from both
/// ensembles and compares them with strict '>' in both directions; exact
/// ties count for neither side. X passes at (κ, c, ĉ) when the verdict is
/// `Dominates`.
pub fn em_dominance_score(
    x: &UtilityEnsemble,
    y: &UtilityEnsemble,
    params: &DominanceParams,
) -> Result<DominanceReport> {
    em_dominance_score_tagged(x, y, params, 0, 1)
}

/// Like [`em_dominance_score`] but with explicit arm tags for the trial
/// streams. Running (Y, X) with tags (1, 0) replays exactly the samples the
/// (X, Y) run drew, which makes antisymmetry exact rather than statistical.
pub fn em_dominance_score_tagged(
    x: &UtilityEnsemble,
    y: &UtilityEnsemble,
    params: &DominanceParams,
    tag_x: u64,
    tag_y: u64,
) -> Result<DominanceReport> {
    let m = params.samples_per_trial()?;
    let n = params.trials;
    let kappa = params.kappa;
    let seed = params.master_seed;

    // d_t ∈ {−1, 0, +1}: sign of ȳ − x̄ in trial t. Each trial derives its
    // own streams from (seed, trial, arm), so results are independent of
    // worker scheduling.
    let (y_wins, x_wins) = (0..n)
        .into_par_iter()
        .map(|trial| {
            let mut rng_x = stream(seed, &[TAG_EM, kappa as u64, trial as u64, tag_x]);
            let mut rng_y = stream(seed, &[TAG_EM, kappa as u64, trial as u64, tag_y]);
            let x_bar = draw_empirical_mean(x, kappa, m, &mut rng_x);
            let y_bar = draw_empirical_mean(y, kappa, m, &mut rng_y);
            if y_bar > x_bar {
                (1u64, 0u64)
            } else if x_bar > y_bar {
                (0, 1)
            } else {
                (0, 0)
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let nf = n as f64;
    let score = (y_wins as f64 - x_wins as f64) / nf;
    // Var(d) = E[d²] − E[d]²; E[d²] is the fraction of decided trials.
    let var = ((y_wins + x_wins) as f64 / nf - score * score).max(0.0);
    let ci_half_width = 3.0 * (var / nf).sqrt();
    let threshold = params.threshold();

    Ok(DominanceReport {
        kappa,
        c: params.c,
        c_hat: params.c_hat,
        m,
        trials: n,
        score,
        ci_half_width,
        threshold,
        verdict: DominanceReport::decide(score, ci_half_width, threshold),
        seed,
    })
}

/// One report per κ: the finite-κ trend table behind any negligibility claim.
pub fn dominance_trend(
    x: &UtilityEnsemble,
    y: &UtilityEnsemble,
    base: &DominanceParams,
    kappas: &[u32],
) -> Result<Vec<DominanceReport>> {
    kappas
        .iter()
        .map(|&kappa| {
            let params = DominanceParams { kappa, ..*base };
            em_dominance_score(x, y, &params)
        })
        .collect()
}
