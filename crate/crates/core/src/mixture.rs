//! Mixing proportions and component distributions.
//!
//! With `A` the complement of `{x}`, the mixing proportion at `x` solves the
//! two tail-ratio equations:
//!
//! ```text
//! lambda(x) = (1 - zeta-(A,x)) / (zeta+(A,x) - zeta-(A,x))
//! ```
//!
//! For a partition `(A, B)` of the labels the components are
//!
//! ```text
//! H_n(y) = F_n(y|A) - (F_n(y|A) - F_n(y|B)) / (1 - zeta+(B,A))
//! G_n(y) = F_n(y|A) - (F_n(y|A) - F_n(y|B)) / (1 - zeta-(B,A))
//! ```
//!
//! Standard errors are delta-method plug-ins built from the tail-ratio
//! variance blocks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{LabelSet, Partition, Sample, TuningConstants};
use crate::empirical::Subset;
use crate::error::{Error, Result};
use crate::tail_ratio::{zeta_minus_subsets, zeta_plus_subsets, TailRatioEstimate, TailSide};
use crate::tuning::cut_counts;
use crate::Z95;

/// Gaps below this are treated as a singular tail-ratio system.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationOptions {
    /// Minimum number of observations in every subset involved.
    pub min_subset_size: usize,
    /// Sort component estimates and band edges along the grid.
    pub rearrange: bool,
    /// Evaluate the grid in parallel chunks.
    pub parallel_grid: bool,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        EstimationOptions {
            min_subset_size: 50,
            rearrange: false,
            parallel_grid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingProportionEstimate {
    /// The label, or the label set when estimating for a group of labels.
    pub x: String,
    pub lambda_hat: f64,
    pub lambda_clipped: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub iota: usize,
    pub kappa: usize,
    pub n_x: usize,
    pub q_ell: f64,
    pub q_r: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub zeta_minus: TailRatioEstimate,
    pub zeta_plus: TailRatioEstimate,
}

/// `lambda = (1 - zeta_minus) / (zeta_plus - zeta_minus)`.
pub fn lambda_from_ratios(zeta_minus: f64, zeta_plus: f64) -> f64 {
    (1.0 - zeta_minus) / (zeta_plus - zeta_minus)
}

/// Partial derivatives of [`lambda_from_ratios`] with respect to
/// `zeta_minus` and `zeta_plus`.
pub fn jacobians(zeta_minus: f64, zeta_plus: f64) -> Result<(f64, f64)> {
    let gap = zeta_plus - zeta_minus;
    if !(gap.abs() >= DEGENERACY_TOL) {
        return Err(Error::DegenerateDenominator {
            label: "x".into(),
            gap: gap.abs(),
        });
    }
    let g2 = gap * gap;
    Ok(((1.0 - zeta_plus) / g2, (zeta_minus - 1.0) / g2))
}

fn require_size(sub: &Subset<'_>, set: &LabelSet, min: usize) -> Result<()> {
    if sub.len() < min {
        return Err(Error::SampleSize {
            subset: set.to_string(),
            have: sub.len(),
            need: min,
        });
    }
    Ok(())
}

/// Mixing proportion for a single label, contrasting it with all other labels.
pub fn lambda_hat(
    sample: &Sample,
    x: &str,
    tuning: &TuningConstants,
    opts: &EstimationOptions,
) -> Result<MixingProportionEstimate> {
    let mut est = lambda_hat_subset(sample, &LabelSet::single(x), tuning, opts)?;
    est.x = crate::data::normalize_label(x);
    Ok(est)
}

/// Mixing proportion `lambda(S)` of a label set `S` against its complement.
pub fn lambda_hat_subset(
    sample: &Sample,
    set: &LabelSet,
    tuning: &TuningConstants,
    opts: &EstimationOptions,
) -> Result<MixingProportionEstimate> {
    let b_sub = sample.subset(set)?;
    let rest: Vec<&String> = sample.labels().iter().filter(|l| !set.contains(l)).collect();
    if rest.is_empty() {
        return Err(Error::Partition(format!(
            "{set} covers every label; lambda needs at least one other label"
        )));
    }
    let a_set = LabelSet::new(rest);
    let a_sub = sample.subset(&a_set)?;
    require_size(&b_sub, set, opts.min_subset_size)?;
    require_size(&a_sub, &a_set, opts.min_subset_size)?;

    let cuts = cut_counts(b_sub.len(), tuning)?;
    let zm = zeta_minus_subsets(&a_sub, &b_sub, cuts.iota)?;
    let zp = zeta_plus_subsets(&a_sub, &b_sub, cuts.kappa)?;
    let gap = zp.value - zm.value;
    if !(gap.abs() >= DEGENERACY_TOL) {
        return Err(Error::DegenerateDenominator {
            label: set.to_string(),
            gap: gap.abs(),
        });
    }
    let lambda = lambda_from_ratios(zm.value, zp.value);
    let (d_minus, d_plus) = jacobians(zm.value, zp.value)?;
    let var = d_minus * d_minus * zm.sigma2 / cuts.iota as f64
        + d_plus * d_plus * zp.sigma2 / cuts.kappa as f64;
    let se = var.sqrt();
    let clip = |v: f64| v.clamp(0.0, 1.0);
    let lambda_clipped = clip(lambda);
    Ok(MixingProportionEstimate {
        x: set.to_string(),
        lambda_hat: lambda,
        lambda_clipped,
        se,
        ci_low: clip(lambda - Z95 * se),
        ci_high: clip(lambda + Z95 * se),
        iota: cuts.iota,
        kappa: cuts.kappa,
        n_x: b_sub.len(),
        q_ell: cuts.q_ell,
        q_r: cuts.q_r,
        d_minus,
        d_plus,
        zeta_minus: zm,
        zeta_plus: zp,
    })
}

/// One estimated component on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCurve {
    /// Raw step-function values; not clipped.
    pub values: Vec<f64>,
    pub se: Vec<f64>,
    /// `value - 1.96 se`, clipped to `[0, 1]`.
    pub band_low: Vec<f64>,
    /// `value + 1.96 se`, clipped to `[0, 1]`.
    pub band_high: Vec<f64>,
    /// `zeta-(B,A)` for `G`, `zeta+(B,A)` for `H`.
    pub tail_ratio: TailRatioEstimate,
    /// `iota_{n_A}` for `G`, `kappa_{n_A}` for `H`.
    pub scale_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCdfEstimate {
    pub partition: Partition,
    pub grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ComponentCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<ComponentCurve>,
    /// Implied `lambda(A)`, when both tails were estimated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_a: Option<f64>,
    /// Implied `lambda(B) = lambda(A) zeta+(B,A)`, when both tails were estimated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_b: Option<f64>,
    pub rearranged: bool,
}

impl ComponentCdfEstimate {
    /// Step-function lookup: the value at the largest grid point `<= y`, or 0
    /// below the grid. Exact at every observation when the grid is the
    /// default pooled grid.
    pub fn value_at(curve: &ComponentCurve, grid: &[f64], y: f64) -> f64 {
        let k = grid.partition_point(|&g| g <= y);
        if k == 0 {
            0.0
        } else {
            curve.values[k - 1]
        }
    }
}

/// Sorted distinct pooled outcomes.
pub fn pooled_grid(sample: &Sample) -> Vec<f64> {
    let mut g = sample.sorted_pooled().to_vec();
    g.dedup();
    g
}

fn check_weight(side: TailSide, zeta: f64) -> Result<f64> {
    let one_minus = 1.0 - zeta;
    if !(one_minus.abs() >= DEGENERACY_TOL) {
        return Err(Error::DegenerateWeight {
            side: side.name(),
            value: zeta,
        });
    }
    Ok(one_minus)
}

fn curve(
    a: &Subset<'_>,
    b: &Subset<'_>,
    grid: &[f64],
    ratio: TailRatioEstimate,
    one_minus: f64,
    opts: &EstimationOptions,
) -> ComponentCurve {
    let sd = ratio.sigma2.sqrt() / (ratio.cut_count as f64).sqrt();
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let point = |y: f64| {
        let fa = a.count_le(y) as f64 / na;
        let fb = b.count_le(y) as f64 / nb;
        let value = fa - (fa - fb) / one_minus;
        let d = (fa - fb) / (one_minus * one_minus);
        (value, d.abs() * sd)
    };
    let pairs: Vec<(f64, f64)> = if opts.parallel_grid {
        grid.par_chunks(4096)
            .flat_map_iter(|chunk| chunk.iter().map(|&y| point(y)))
            .collect()
    } else {
        grid.iter().map(|&y| point(y)).collect()
    };
    let (mut values, se): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mut band_low: Vec<f64> = values
        .iter()
        .zip(&se)
        .map(|(v, s)| (v - Z95 * s).clamp(0.0, 1.0))
        .collect();
    let mut band_high: Vec<f64> = values
        .iter()
        .zip(&se)
        .map(|(v, s)| (v + Z95 * s).clamp(0.0, 1.0))
        .collect();
    if opts.rearrange {
        values.sort_by(f64::total_cmp);
        band_low.sort_by(f64::total_cmp);
        band_high.sort_by(f64::total_cmp);
    }
    ComponentCurve {
        values,
        se,
        band_low,
        band_high,
        scale_count: ratio.cut_count,
        tail_ratio: ratio,
    }
}

/// Component estimates for disjoint `A`, `B` without the covering check.
pub(crate) fn component_curves(
    sample: &Sample,
    a: &LabelSet,
    b: &LabelSet,
    tuning: &TuningConstants,
    grid: Option<&[f64]>,
    left: bool,
    right: bool,
    opts: &EstimationOptions,
) -> Result<ComponentCdfEstimate> {
    if !a.is_disjoint(b) {
        return Err(Error::Partition(format!("label sets {a} and {b} overlap")));
    }
    let a_sub = sample.subset(a)?;
    let b_sub = sample.subset(b)?;
    require_size(&a_sub, a, opts.min_subset_size)?;
    require_size(&b_sub, b, opts.min_subset_size)?;
    let owned;
    let grid = match grid {
        Some(g) => {
            if g.windows(2).any(|w| !(w[0] <= w[1])) || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("grid must be finite and ascending".into()));
            }
            g
        }
        None => {
            owned = pooled_grid(sample);
            &owned
        }
    };
    let cuts = cut_counts(a_sub.len(), tuning)?;

    let mut g_curve = None;
    let mut h_curve = None;
    let mut zm_value = None;
    let mut zp_value = None;
    if left {
        let zm = zeta_minus_subsets(&b_sub, &a_sub, cuts.iota)?;
        let one_minus = check_weight(TailSide::Left, zm.value)?;
        zm_value = Some(zm.value);
        g_curve = Some(curve(&a_sub, &b_sub, grid, zm, one_minus, opts));
    }
    if right {
        let zp = zeta_plus_subsets(&b_sub, &a_sub, cuts.kappa)?;
        let one_minus = check_weight(TailSide::Right, zp.value)?;
        zp_value = Some(zp.value);
        h_curve = Some(curve(&a_sub, &b_sub, grid, zp, one_minus, opts));
    }
    let (lambda_a, lambda_b) = match (zm_value, zp_value) {
        (Some(zm), Some(zp)) if (zp - zm).abs() >= DEGENERACY_TOL => {
            let la = lambda_from_ratios(zm, zp);
            (Some(la), Some(la * zp))
        }
        _ => (None, None),
    };
    Ok(ComponentCdfEstimate {
        partition: Partition::two(a.clone(), b.clone()),
        grid: grid.to_vec(),
        g: g_curve,
        h: h_curve,
        lambda_a,
        lambda_b,
        rearranged: opts.rearrange,
    })
}

/// `G_n` and `H_n` for a two-set partition `(A, B)` of the labels.
pub fn component_cdfs(
    sample: &Sample,
    a: &LabelSet,
    b: &LabelSet,
    tuning: &TuningConstants,
    grid: Option<&[f64]>,
    opts: &EstimationOptions,
) -> Result<ComponentCdfEstimate> {
    Partition::two(a.clone(), b.clone()).validate(sample, true)?;
    component_curves(sample, a, b, tuning, grid, true, true, opts)
}

/// Only the component identified by one tail: `G` from the left tail,
/// `H` from the right.
pub fn component_cdf_one_sided(
    sample: &Sample,
    a: &LabelSet,
    b: &LabelSet,
    tuning: &TuningConstants,
    side: TailSide,
    grid: Option<&[f64]>,
    opts: &EstimationOptions,
) -> Result<ComponentCdfEstimate> {
    Partition::two(a.clone(), b.clone()).validate(sample, true)?;
    let left = side == TailSide::Left;
    component_curves(sample, a, b, tuning, grid, left, !left, opts)
}
