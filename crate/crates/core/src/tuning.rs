//! Cut-count rule and tail-rate advisories.
//!
//! The default rule sets `iota = kappa = max(1, floor(C (m ln ln m)^0.6))` for
//! a subsample of size `m`. Larger `C` moves the cuts toward the centre of
//! the distribution.
//!
//! For log-concave tails, `-ln(1 - G(y)) ~ (y / s_G)^a_G` and likewise for
//! `H`, the bias condition on the right tail holds when `a_G < a_H`, or when
//! `a_G = a_H` and `s_G > s_H`; the left tail is the mirror image. Equal
//! shapes and scales, as in a Gaussian location mixture, fall outside these
//! conditions: the estimators stay consistent there but the normal
//! approximation is not justified.

use serde::{Deserialize, Serialize};

use crate::data::TuningConstants;
use crate::error::{Error, Result};

/// Smallest subsample size for which the cut rule is evaluated.
pub const MIN_RULE_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutSelection {
    pub n: usize,
    pub iota: usize,
    pub kappa: usize,
    /// `iota / n`
    pub q_ell: f64,
    /// `(n - kappa) / n`
    pub q_r: f64,
}

fn rule(n: usize, tuning: &TuningConstants) -> usize {
    let nf = n as f64;
    let raw = tuning.c * (nf * nf.ln().ln()).powf(tuning.exponent);
    (raw.floor() as usize).max(1)
}

fn feasible(n: usize, tuning: &TuningConstants) -> bool {
    let iota = tuning.iota_override.unwrap_or_else(|| rule(n, tuning));
    let kappa = tuning.kappa_override.unwrap_or_else(|| rule(n, tuning));
    kappa >= 1 && iota + 1 + kappa <= n
}

/// Smallest `n >= 16` for which the cuts do not overlap, if any exists
/// below `2^62`.
fn minimal_feasible(tuning: &TuningConstants) -> Option<usize> {
    let mut hi = MIN_RULE_SIZE;
    while !feasible(hi, tuning) {
        if hi > (1 << 62) {
            return None;
        }
        hi *= 2;
    }
    let mut lo = (hi / 2).max(MIN_RULE_SIZE);
    if feasible(lo, tuning) {
        return Some(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid, tuning) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Cut counts for a subsample of size `n`.
pub fn cut_counts(n: usize, tuning: &TuningConstants) -> Result<CutSelection> {
    tuning.validate()?;
    if n < MIN_RULE_SIZE {
        return Err(Error::Tuning(format!(
            "subsample size {n} is below the minimum of {MIN_RULE_SIZE} for the cut rule"
        )));
    }
    let iota = tuning.iota_override.unwrap_or_else(|| rule(n, tuning));
    let kappa = tuning.kappa_override.unwrap_or_else(|| rule(n, tuning));
    if kappa < 1 {
        return Err(Error::Tuning("kappa must be at least 1".into()));
    }
    if iota + 1 > n - kappa.min(n) {
        let hint = match minimal_feasible(tuning) {
            Some(m) => format!("smallest feasible subsample size is {m}"),
            None => "no feasible subsample size".to_string(),
        };
        return Err(Error::Tuning(format!(
            "cuts overlap at n = {n} (iota = {iota}, kappa = {kappa}); {hint}"
        )));
    }
    let nf = n as f64;
    Ok(CutSelection {
        n,
        iota,
        kappa,
        q_ell: iota as f64 / nf,
        q_r: (n - kappa) as f64 / nf,
    })
}

/// Rate advisory for Pareto-type right tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoAdvisory {
    /// Choose `kappa = o(n^gamma)`.
    pub gamma: f64,
    /// `alpha_H / alpha_G`
    pub tail_ratio: f64,
    /// The estimators converge at a rate close to `n^(-beta/2)`.
    pub beta: f64,
}

/// Admissible growth exponent for `kappa` when `1 - G ~ y^-alpha_G` and
/// `1 - H ~ y^-alpha_H` with `alpha_H > alpha_G`.
pub fn pareto_rate_exponent(alpha_g: f64, alpha_h: f64) -> Result<ParetoAdvisory> {
    if !(alpha_g.is_finite() && alpha_h.is_finite() && alpha_g > 0.0 && alpha_h > alpha_g) {
        return Err(Error::DominanceViolation { alpha_g, alpha_h });
    }
    let gamma = (alpha_h - alpha_g) / (alpha_h - alpha_g / 2.0);
    let c = alpha_h / alpha_g;
    Ok(ParetoAdvisory {
        gamma,
        tail_ratio: c,
        beta: 2.0 * (c - 1.0) / (2.0 * c - 1.0),
    })
}
