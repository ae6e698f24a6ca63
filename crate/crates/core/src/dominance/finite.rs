use rand::Rng;

use crate::error::{Error, Result};

use super::UtilityEnsemble;

/// State cap for m-fold sum convolution; beyond it the oracle refuses.
pub const STATE_CAP: u128 = 10_000_000;

/// An explicit finite distribution, the brute-force counterpart of a
/// sampler. Values are kept sorted and distinct; probabilities sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDist {
    support: Vec<(f64, f64)>,
}

impl FiniteDist {
    pub fn new(mut support: Vec<(f64, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Domain("finite distribution needs at least one atom".into()));
        }
        for &(v, p) in &support {
            if !v.is_finite() {
                return Err(Error::Domain("atom values must be finite".into()));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::Domain("atom probabilities must be non-negative".into()));
            }
        }
        support.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        support = merge_equal_values(support);
        support.retain(|&(_, p)| p > 0.0);
        if support.is_empty() {
            return Err(Error::Domain("all atoms have zero probability".into()));
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        // renormalize away the accumulated float dust
        for atom in &mut support {
            atom.1 /= total;
        }
        Ok(Self { support })
    }

    pub fn degenerate(v: f64) -> Self {
        Self::new(vec![(v, 1.0)]).unwrap()
    }

    pub fn bernoulli(p: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("bernoulli p={p} outside [0,1]")));
        }
        Self::new(vec![(lo, 1.0 - p), (hi, p)])
    }

    /// Fair coin over {0, 2}.
    pub fn uniform_zero_two() -> Self {
        Self::bernoulli(0.5, 0.0, 2.0).unwrap()
    }

    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|&(v, p)| v * p).sum()
    }

    /// Central moment E[(V − E[V])^k] for small k; used by tie-bound oracles.
    pub fn central_abs_moment(&self, k: u32) -> f64 {
        let mu = self.mean();
        self.support
            .iter()
            .map(|&(v, p)| (v - mu).abs().powi(k as i32) * p)
            .sum()
    }

    /// Width of the support interval.
    pub fn range(&self) -> f64 {
        self.support.last().unwrap().0 - self.support.first().unwrap().0
    }

    /// Distribution of the sum of m independent copies, by repeated
    /// convolution. The intermediate state count is capped.
    pub fn m_fold_sum(&self, m: u64) -> Result<FiniteDist> {
        if m == 0 {
            return Err(Error::Domain("m must be positive".into()));
        }
        // worst-case state count grows like |support|^m before merging;
        // refuse early when even the merged grid cannot stay within cap
        let mut acc = self.support.clone();
        for _ in 1..m {
            let required = (acc.len() as u128) * (self.support.len() as u128);
            if required > STATE_CAP {
                return Err(Error::Capacity {
                    what: "m-fold sum convolution states",
                    required,
                    cap: STATE_CAP,
                });
            }
            let mut next: Vec<(f64, f64)> = Vec::with_capacity(acc.len() * self.support.len());
            for &(va, pa) in &acc {
                for &(vb, pb) in &self.support {
                    next.push((va + vb, pa * pb));
                }
            }
            next.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            acc = merge_equal_values(next);
        }
        Ok(FiniteDist { support: acc })
    }

    /// Distribution of the difference of two independent variables.
    pub fn difference(&self, other: &FiniteDist) -> Result<FiniteDist> {
        let required = (self.support.len() as u128) * (other.support.len() as u128);
        if required > STATE_CAP {
            return Err(Error::Capacity {
                what: "difference convolution states",
                required,
                cap: STATE_CAP,
            });
        }
        let mut out = Vec::with_capacity(self.support.len() * other.support.len());
        for &(va, pa) in &self.support {
            for &(vb, pb) in &other.support {
                out.push((va - vb, pa * pb));
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(FiniteDist {
            support: merge_equal_values(out),
        })
    }

    /// Wrap as a sampler. κ is ignored; the distribution is fixed.
    pub fn to_ensemble(&self, name: impl Into<String>) -> UtilityEnsemble {
        let atoms = self.support.clone();
        let lo = self.support.first().unwrap().0;
        let hi = self.support.last().unwrap().0;
        let mu = self.mean();
        UtilityEnsemble::new(name, move |_, rng| {
            let u: f64 = rng.gen();
            let mut cum = 0.0;
            for &(v, p) in &atoms {
                cum += p;
                if u < cum {
                    return v;
                }
            }
            atoms.last().unwrap().0
        })
        .with_support_bound(move |_| hi - lo)
        .with_exact_mean(move |_| mu)
    }
}

fn merge_equal_values(sorted: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (v, p) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

/// Exact value of P[Ȳ > X̄] − P[X̄ > Ȳ] for m-sample means of two finite
/// distributions. Comparing means is the same as comparing sums, so the
/// m-fold sum distributions are convolved and summed over the joint grid.
pub fn exact_dominance_score(x: &FiniteDist, y: &FiniteDist, m: u64) -> Result<f64> {
    let sx = x.m_fold_sum(m)?;
    let sy = y.m_fold_sum(m)?;
    let joint = (sx.support.len() as u128) * (sy.support.len() as u128);
    if joint > STATE_CAP {
        return Err(Error::Capacity {
            what: "joint comparison grid states",
            required: joint,
            cap: STATE_CAP,
        });
    }
    let mut p_y_wins = 0.0;
    let mut p_x_wins = 0.0;
    for &(vx, px) in &sx.support {
        for &(vy, py) in &sy.support {
            if vy > vx {
                p_y_wins += px * py;
            } else if vx > vy {
                p_x_wins += px * py;
            }
        }
    }
    Ok(p_y_wins - p_x_wins)
}
