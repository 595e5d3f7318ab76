//! Benjamini-Hochberg and Storey step-up procedures on unordered p-values.

use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Default Storey tuning parameter.
pub const STOREY_LAMBDA: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionSet {
    pub count: usize,
    /// Rank (1-based, ascending p) of the last rejected p-value; 0 if none.
    pub threshold_index: usize,
    /// Original indices of rejected hypotheses, by ascending p then index.
    pub indices: Vec<usize>,
}

fn check_inputs(pvals: &[f64], alpha: f64) -> Result<()> {
    if pvals.is_empty() {
        bail!(Domain, "need at least one p-value");
    }
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        bail!(Validation, "p-value {p} is outside [0, 1]");
    }
    if !(0.0..=1.0).contains(&alpha) {
        bail!(Domain, "alpha must lie in [0, 1], got {alpha}");
    }
    Ok(())
}

/// Step-up rule: largest k with p_(k) ≤ α·k/m.
fn step_up(pvals: &[f64], alpha: f64, m: f64) -> RejectionSet {
    let mut order: Vec<usize> = (0..pvals.len()).collect();
    order.sort_by(|&i, &j| pvals[i].total_cmp(&pvals[j]).then(i.cmp(&j)));
    let k = order.iter().enumerate().rposition(|(r, &i)| pvals[i] <= alpha * (r + 1) as f64 / m).map_or(0, |r| r + 1);
    order.truncate(k);
    RejectionSet { count: k, threshold_index: k, indices: order }
}

pub fn bh_select(pvals: &[f64], alpha: f64) -> Result<RejectionSet> {
    check_inputs(pvals, alpha)?;
    Ok(step_up(pvals, alpha, pvals.len() as f64))
}

/// #{p > λ}/(1 − λ), clamped to [1, n].
pub fn storey_null_estimate(pvals: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        bail!(Domain, "lambda must lie in (0, 1), got {lambda}");
    }
    if pvals.is_empty() {
        bail!(Domain, "need at least one p-value");
    }
    let above = pvals.iter().filter(|&&p| p > lambda).count() as f64;
    Ok((above / (1.0 - lambda)).clamp(1.0, pvals.len() as f64))
}

/// BH with n replaced by the Storey null-count estimate.
pub fn storey_select(pvals: &[f64], alpha: f64, lambda: f64) -> Result<RejectionSet> {
    check_inputs(pvals, alpha)?;
    let m0 = storey_null_estimate(pvals, lambda)?;
    Ok(step_up(pvals, alpha, m0))
}
