//! Sample re-weighting under a KL trust region.
//!
//! Given returns `R_1..R_N` of trajectories drawn from the current policy, the
//! re-weighted distribution maximizing expected return subject to
//! `KL(p || q) <= ε` puts weight `p_i ∝ exp(R_i / η)` on each sample, where the
//! temperature `η` minimizes the convex dual
//!
//! ```text
//! g(η) = η ε + η log( (1/N) Σ_i exp(R_i / η) )
//! ```
//!
//! All exponentials are taken of `R_i - max R`; the weights do not depend on
//! the shift and the dual only moves by the constant `max R`.

use super::RepsError;

/// Upper end of the temperature search bracket.
pub const ETA_MAX: f64 = 1e6;

/// Relative tolerance of the temperature search.
pub const ETA_TOLERANCE: f64 = 1e-8;

fn check_returns(returns: &[f64]) -> Result<f64, RepsError> {
    if returns.len() < 2 {
        return Err(RepsError::NotEnoughSamples(returns.len()));
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(RepsError::NonFinite("episode return".into()));
    }
    Ok(returns.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

// g(η) - max R
fn shifted_dual(returns: &[f64], max: f64, epsilon: f64, eta: f64) -> f64 {
    let n = returns.len() as f64;
    let sum: f64 = returns.iter().map(|r| ((r - max) / eta).exp()).sum();
    eta * epsilon + eta * (sum / n).ln()
}

/// Value of the dual `g(η)`.
pub fn dual_value(returns: &[f64], epsilon: f64, eta: f64) -> Result<f64, RepsError> {
    let max = check_returns(returns)?;
    Ok(shifted_dual(returns, max, epsilon, eta) + max)
}

/// True when every return is identical, so any temperature is optimal.
pub fn is_degenerate(returns: &[f64]) -> bool {
    returns.windows(2).all(|w| w[0] == w[1])
}

/// Minimizes the dual over `η ∈ [eta_min, ETA_MAX]` by golden-section search
/// on `log η`. Degenerate returns (all equal) give `ETA_MAX`.
pub fn solve_dual(returns: &[f64], epsilon: f64, eta_min: f64) -> Result<f64, RepsError> {
    let max = check_returns(returns)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(RepsError::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(eta_min.is_finite() && eta_min > 0.0 && eta_min < ETA_MAX) {
        return Err(RepsError::InvalidConfig(format!("eta_min must be in (0, {ETA_MAX}), got {eta_min}")));
    }
    if is_degenerate(returns) {
        return Ok(ETA_MAX);
    }

    let g = |x: f64| shifted_dual(returns, max, epsilon, x.exp());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (eta_min.ln(), ETA_MAX.ln());
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while hi - lo > ETA_TOLERANCE {
        if g1 <= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        }
    }
    // The bracket ends are candidates too: the minimum may sit on a boundary.
    let best = [(lo, g(lo)), (x1, g1), (x2, g2), (hi, g(hi))]
        .into_iter()
        .fold((lo, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
    Ok(best.0.exp().clamp(eta_min, ETA_MAX))
}

/// Normalized weights `p_i ∝ exp((R_i - max R) / η)`.
pub fn compute_weights(returns: &[f64], eta: f64) -> Result<Vec<f64>, RepsError> {
    if returns.is_empty() {
        return Err(RepsError::NotEnoughSamples(0));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(RepsError::InvalidConfig(format!("eta must be positive, got {eta}")));
    }
    let max = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() || returns.iter().any(|r| !r.is_finite()) {
        return Err(RepsError::NonFinite("episode return".into()));
    }
    let raw: Vec<f64> = returns.iter().map(|r| ((r - max) / eta).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// `KL(p || uniform)` for a weight vector on the simplex.
pub fn kl_to_uniform(weights: &[f64]) -> f64 {
    let n = weights.len() as f64;
    weights
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * (n * p).ln())
        .sum()
}

/// Solves the dual and returns the temperature and the resulting weights.
pub fn reweight(returns: &[f64], epsilon: f64, eta_min: f64) -> Result<(f64, Vec<f64>), RepsError> {
    let eta = solve_dual(returns, epsilon, eta_min)?;
    let weights = compute_weights(returns, eta)?;
    Ok((eta, weights))
}
