use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::rng::Stream;

type SampleFn = dyn Fn(u32, &mut Stream) -> f64 + Send + Sync;
type KappaFn = dyn Fn(u32) -> f64 + Send + Sync;

/// A κ-indexed family of utility random variables, realized as a sampler.
///
/// `sample` must be deterministic in (κ, stream state) and safe to call from
/// multiple workers at once. The optional support bound gives, for each κ, a
/// width R such that all samples fall in an interval of width ≤ R; the
/// optional exact mean is an analytic expectation used only by oracles and
/// never by the dominance engine itself.
#[derive(Clone)]
pub struct UtilityEnsemble {
    name: String,
    sample: Arc<SampleFn>,
    support_bound: Option<Arc<KappaFn>>,
    exact_mean: Option<Arc<KappaFn>>,
}

impl fmt::Debug for UtilityEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UtilityEnsemble")
            .field("name", &self.name)
            .field("support_bound", &self.support_bound.is_some())
            .field("exact_mean", &self.exact_mean.is_some())
            .finish()
    }
}

impl UtilityEnsemble {
    pub fn new(
        name: impl Into<String>,
        sample: impl Fn(u32, &mut Stream) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            sample: Arc::new(sample),
            support_bound: None,
            exact_mean: None,
        }
    }

    pub fn with_support_bound(mut self, bound: impl Fn(u32) -> f64 + Send + Sync + 'static) -> Self {
        self.support_bound = Some(Arc::new(bound));
        self
    }

    pub fn with_exact_mean(mut self, mean: impl Fn(u32) -> f64 + Send + Sync + 'static) -> Self {
        self.exact_mean = Some(Arc::new(mean));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn sample(&self, kappa: u32, rng: &mut Stream) -> f64 {
        (self.sample)(kappa, rng)
    }

    /// Per-κ width of the utility support, when declared.
    pub fn support_bound(&self, kappa: u32) -> Option<f64> {
        self.support_bound.as_ref().map(|f| f(kappa))
    }

    /// Analytic expectation at κ, when declared. Oracle use only.
    pub fn exact_mean(&self, kappa: u32) -> Option<f64> {
        self.exact_mean.as_ref().map(|f| f(kappa))
    }

    // ---- built-ins ----------------------------------------------------

    pub fn constant(v: f64) -> Self {
        Self::new(format!("constant:{v}"), move |_, _| v)
            .with_support_bound(|_| 0.0)
            .with_exact_mean(move |_| v)
    }

    /// `hi` with probability p, `lo` otherwise.
    pub fn bernoulli(p: f64, lo: f64, hi: f64) -> Self {
        Self::new(format!("bernoulli:{p}:{lo}:{hi}"), move |_, rng| {
            if rng.gen::<f64>() < p {
                hi
            } else {
                lo
            }
        })
        .with_support_bound(move |_| (hi - lo).abs())
        .with_exact_mean(move |_| p * hi + (1.0 - p) * lo)
    }

    /// Fair coin over {0, 2}: mean 1, the running example everywhere.
    pub fn uniform_zero_two() -> Self {
        Self::bernoulli(0.5, 0.0, 2.0)
    }

    /// The light-tailed half of the heavy-tail separation pair:
    /// X_κ = 0 or 2, each with probability 1/2 (independent of κ).
    pub fn example35_x() -> Self {
        Self::new("example35-x", |_, rng| if rng.gen::<bool>() { 2.0 } else { 0.0 })
            .with_support_bound(|_| 2.0)
            .with_exact_mean(|_| 1.0)
    }

    /// The heavy-tailed half: Y_κ = 2^{2κ} with probability 2^{-κ}, else 0.
    /// E[Y_κ] = 2^κ, yet polynomially many samples are almost surely all zero.
    pub fn example35_y() -> Self {
        Self::new("example35-y", |kappa, rng| {
            let p = (0.5f64).powi(kappa as i32);
            if rng.gen::<f64>() < p {
                (2.0f64).powi(2 * kappa as i32)
            } else {
                0.0
            }
        })
        .with_support_bound(|kappa| (2.0f64).powi(2 * kappa as i32))
        .with_exact_mean(|kappa| (2.0f64).powi(kappa as i32))
    }
}
