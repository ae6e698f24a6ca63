use crate::error::{Error, Result};

use super::UtilityEnsemble;

/// Smallest κ₀ such that κ₀⁴ samples per trial stabilize the dominance
/// direction for a mean gap Δ over supports of width R:
/// κ₀ = ⌈(8R²/Δ² · ln 8)^{1/4}⌉.
pub fn hoeffding_sample_threshold(delta: f64, support_range: f64) -> Result<u64> {
    if !(support_range > 0.0) {
        return Err(Error::Domain(
            "support range must be positive; two degenerate constants with a gap cannot share a zero-width support".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(
            "mean gap must be positive; for equal means use the tie bound instead".into(),
        ));
    }
    let kappa0 = (8.0 * support_range * support_range / (delta * delta) * 8f64.ln()).powf(0.25);
    Ok(kappa0.ceil() as u64)
}

/// Upper bound 2Cρ/(σ³√m), C = 0.47, on the dominance score when
/// E[X] = E[Y]. σ and ρ are the second and third absolute central moments
/// of Z = X − Y.
pub fn berry_esseen_tie_bound(sigma: f64, rho: f64, m: u64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(
            "sigma must be positive; a degenerate difference has score exactly 0".into(),
        ));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain("rho must be positive".into()));
    }
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    const C: f64 = 0.47;
    Ok(2.0 * C * rho / (sigma.powi(3) * (m as f64).sqrt()))
}

/// Samples per trial sufficient for a pair of bounded ensembles whose exact
/// means differ by at least `delta` at parameter κ: hoeffding threshold⁴.
/// Refuses when either ensemble declares no support bound.
pub fn planned_samples(
    x: &UtilityEnsemble,
    y: &UtilityEnsemble,
    kappa: u32,
    delta: f64,
) -> Result<u64> {
    let rx = x.support_bound(kappa).ok_or_else(|| {
        Error::Domain(format!(
            "ensemble '{}' declares no support bound; Hoeffding planning needs one",
            x.name()
        ))
    })?;
    let ry = y.support_bound(kappa).ok_or_else(|| {
        Error::Domain(format!(
            "ensemble '{}' declares no support bound; Hoeffding planning needs one",
            y.name()
        ))
    })?;
    let r = rx.max(ry);
    let k0 = hoeffding_sample_threshold(delta, r)?;
    k0.checked_pow(4)
        .ok_or_else(|| Error::Domain("planned sample count overflows u64".into()))
}
