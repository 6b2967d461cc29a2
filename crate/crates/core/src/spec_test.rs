//! Over-identification test comparing component estimates across partitions.
//!
//! With a three-set partition `(A, B, C)` of the labels, `G_n(.; A, B)` and
//! `G_n(.; A, C)` estimate the same `G`. The test standardizes the difference
//! of their `W`-weighted sample means,
//!
//! ```text
//! sqrt(iota_{n_A}) * (mean W G_n(A,B) - mean W G_n(A,C)) / sqrt(Sigma_G)
//! Sigma_G = d(A,C) [d(A,C) s2(C,A) - d(A,B) z(C,A) z(B,A)]
//!         + d(A,B) [d(A,B) s2(B,A) - d(A,C) z(C,A) z(B,A)]
//! ```
//!
//! where `d(A,S)` is the sample mean of `W(Y) (F_n(Y|A) - F_n(Y|S)) / (1 - z(S,A))^2`.
//! The `H` version uses the right tail and `kappa_{n_A}`.

use serde::{Deserialize, Serialize};

use crate::data::{Partition, Sample, TuningConstants};
use crate::error::{Error, Result};
use crate::mixture::{component_curves, pooled_grid, ComponentCdfEstimate, ComponentCurve, EstimationOptions};
use crate::skew_normal::{std_normal_quantile, std_normal_sf};

/// Significance levels reported in [`SpecTestResult::reject_at`].
pub const DEFAULT_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    G,
    H,
}

impl Component {
    fn curve(self, est: &ComponentCdfEstimate) -> Option<&ComponentCurve> {
        match self {
            Component::G => est.g.as_ref(),
            Component::H => est.h.as_ref(),
        }
    }
}

/// Built-in weight functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    /// `W = 1`.
    Uniform,
    /// Indicator of the pooled empirical quantile range `[lower, upper]`.
    Central { lower: f64, upper: f64 },
    /// Gaussian bump centred at the pooled median with the pooled
    /// IQR-based scale multiplied by `width`.
    Gauss { width: f64 },
}

impl Weight {
    pub fn central() -> Self {
        Weight::Central {
            lower: 0.1,
            upper: 0.9,
        }
    }

    pub fn gauss() -> Self {
        Weight::Gauss { width: 1.0 }
    }

    /// Resolves data-dependent constants against the pooled sample.
    pub fn bind(&self, sample: &Sample) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        let sorted = sample.sorted_pooled();
        let q = |p: f64| {
            let k = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            sorted[k - 1]
        };
        match *self {
            Weight::Uniform => Box::new(|_| 1.0),
            Weight::Central { lower, upper } => {
                let (lo, hi) = (q(lower), q(upper));
                Box::new(move |y| if y >= lo && y <= hi { 1.0 } else { 0.0 })
            }
            Weight::Gauss { width } => {
                let centre = q(0.5);
                let iqr = q(0.75) - q(0.25);
                let scale = if iqr > 0.0 { width * iqr / 1.349 } else { width };
                Box::new(move |y| {
                    let z = (y - centre) / scale;
                    (-0.5 * z * z).exp()
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub level: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecTestResult {
    pub component: Component,
    pub statistic: f64,
    pub p_value: f64,
    pub reject_at: Vec<Decision>,
    /// `mean W est(A,B) - mean W est(A,C)`
    pub weighted_diff: f64,
    pub mean_ab: f64,
    pub mean_ac: f64,
    pub variance_hat: f64,
    pub scale_count: usize,
    pub d_ab: f64,
    pub d_ac: f64,
    pub zeta_ba: f64,
    pub zeta_ca: f64,
    pub partition: Partition,
}

/// Mean of `W(Y_i) * est(Y_i)` over every observation in the sample.
pub fn weighted_mean_cdf<W>(
    sample: &Sample,
    estimate: &ComponentCdfEstimate,
    component: Component,
    weight: &W,
) -> Result<f64>
where
    W: Fn(f64) -> f64 + ?Sized,
{
    let curve = component.curve(estimate).ok_or_else(|| {
        Error::InvalidParameter(format!("estimate does not contain component {component:?}"))
    })?;
    let mut total = 0.0;
    for &y in sample.ys() {
        let w = weight(y);
        if !w.is_finite() {
            return Err(Error::Weight(format!("W({y}) = {w} is not finite")));
        }
        total += w * ComponentCdfEstimate::value_at(curve, &estimate.grid, y);
    }
    Ok(total / sample.len() as f64)
}

/// Sample mean of `W(Y_i) (F_n(Y_i|A) - F_n(Y_i|S)) / (1 - zeta)^2`, recovered
/// from the component values: `F_A - F_S = (F_A - est) (1 - zeta)`.
fn mean_jacobian<W>(sample: &Sample, a_ecdf: &[f64], grid: &[f64], curve: &ComponentCurve, weight: &W) -> f64
where
    W: Fn(f64) -> f64 + ?Sized,
{
    let one_minus = 1.0 - curve.tail_ratio.value;
    let mut total = 0.0;
    for &y in sample.ys() {
        let k = grid.partition_point(|&g| g <= y) - 1;
        let diff = (a_ecdf[k] - curve.values[k]) * one_minus;
        total += weight(y) * diff / (one_minus * one_minus);
    }
    total / sample.len() as f64
}

/// Runs the test for one component on a three-set partition.
pub fn run_spec_test<W>(
    sample: &Sample,
    partition: &Partition,
    tuning: &TuningConstants,
    weight: &W,
    component: Component,
    opts: &EstimationOptions,
) -> Result<SpecTestResult>
where
    W: Fn(f64) -> f64 + ?Sized,
{
    let c = partition
        .c
        .as_ref()
        .ok_or_else(|| Error::Partition("the specification test needs three label sets A|B|C".into()))?;
    partition.validate(sample, true)?;
    let a = &partition.a;
    let b = &partition.b;
    let grid = pooled_grid(sample);
    let (left, right) = (component == Component::G, component == Component::H);
    let mut opts = *opts;
    opts.rearrange = false;
    let ab = component_curves(sample, a, b, tuning, Some(&grid), left, right, &opts)?;
    let ac = component_curves(sample, a, c, tuning, Some(&grid), left, right, &opts)?;
    let mean_ab = weighted_mean_cdf(sample, &ab, component, weight)?;
    let mean_ac = weighted_mean_cdf(sample, &ac, component, weight)?;

    let a_sub = sample.subset(a)?;
    let a_ecdf: Vec<f64> = grid.iter().map(|&y| a_sub.ecdf(y)).collect();
    let curve_ab = component.curve(&ab).expect("component requested");
    let curve_ac = component.curve(&ac).expect("component requested");
    let d_ab = mean_jacobian(sample, &a_ecdf, &grid, curve_ab, weight);
    let d_ac = mean_jacobian(sample, &a_ecdf, &grid, curve_ac, weight);
    let zb = curve_ab.tail_ratio.value;
    let zc = curve_ac.tail_ratio.value;
    let cross = zb * zc;
    let variance_hat = d_ac * (d_ac * curve_ac.tail_ratio.sigma2 - d_ab * cross)
        + d_ab * (d_ab * curve_ab.tail_ratio.sigma2 - d_ac * cross);

    let weighted_diff = mean_ab - mean_ac;
    let scale_count = curve_ab.scale_count;
    let statistic = if weighted_diff == 0.0 {
        0.0
    } else {
        if !(variance_hat > 0.0) {
            return Err(Error::DegenerateVariance(format!(
                "estimated variance {variance_hat:e} is not positive (d_AB = {d_ab:e}, d_AC = {d_ac:e}, \
                 zeta_BA = {zb}, zeta_CA = {zc})"
            )));
        }
        (scale_count as f64).sqrt() * weighted_diff / variance_hat.sqrt()
    };
    let p_value = (2.0 * std_normal_sf(statistic.abs())).min(1.0);
    let reject_at = DEFAULT_LEVELS
        .iter()
        .map(|&level| Decision {
            level,
            reject: statistic.abs() > std_normal_quantile(1.0 - level / 2.0),
        })
        .collect();
    Ok(SpecTestResult {
        component,
        statistic,
        p_value,
        reject_at,
        weighted_diff,
        mean_ab,
        mean_ac,
        variance_hat,
        scale_count,
        d_ab,
        d_ac,
        zeta_ba: zb,
        zeta_ca: zc,
        partition: partition.clone(),
    })
}

/// Runs the `G` and `H` tests; a failure of one does not stop the other.
pub fn run_spec_tests<W>(
    sample: &Sample,
    partition: &Partition,
    tuning: &TuningConstants,
    weight: &W,
    opts: &EstimationOptions,
) -> Vec<(Component, Result<SpecTestResult>)>
where
    W: Fn(f64) -> f64 + Sync + ?Sized,
{
    let (g, h) = rayon::join(
        || run_spec_test(sample, partition, tuning, weight, Component::G, opts),
        || run_spec_test(sample, partition, tuning, weight, Component::H, opts),
    );
    vec![(Component::G, g), (Component::H, h)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabelSet;
    use crate::mixture::ComponentCurve;
    use crate::skew_normal::SkewNormalParams;
    use crate::tail_ratio::{TailRatioEstimate, TailSide};
    use rand::{Rng, SeedableRng};

    fn three_label(seed: u64, n_per: usize) -> Sample {
        let g = SkewNormalParams::new(0.0, 1.0, 5.0).unwrap();
        let h = SkewNormalParams::new(0.0, 1.0, -5.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        for (lambda, label) in [(0.5, "0"), (0.25, "1"), (0.75, "2")] {
            for _ in 0..n_per {
                let y = if rng.random::<f64>() < lambda { g.draw(&mut rng) } else { h.draw(&mut rng) };
                pairs.push((y, label));
            }
        }
        Sample::from_pairs(pairs).unwrap()
    }

    fn dummy_ratio() -> TailRatioEstimate {
        TailRatioEstimate {
            side: TailSide::Left,
            value: 0.5,
            cut_count: 1,
            rho_hat: 1.0,
            sigma2: 0.75,
            se: Some(0.75f64.sqrt()),
            cut_point: 0.0,
            n_a: 1,
            n_b: 1,
            zero_tail: false,
            tie_at_cut: false,
        }
    }

    fn fabricated(sample: &Sample, values: Vec<f64>) -> ComponentCdfEstimate {
        let grid = pooled_grid(sample);
        let n = values.len();
        ComponentCdfEstimate {
            partition: Partition::two(LabelSet::single("a"), LabelSet::single("b")),
            grid,
            g: Some(ComponentCurve {
                values,
                se: vec![0.0; n],
                band_low: vec![0.0; n],
                band_high: vec![0.0; n],
                tail_ratio: dummy_ratio(),
                scale_count: 1,
            }),
            h: None,
            lambda_a: None,
            lambda_b: None,
            rearranged: false,
        }
    }

    #[test]
    fn weighted_mean_identities() {
        let ys = [0.3, -1.2, 2.5, 0.9, 1.7, -0.4, 3.3];
        let sample = Sample::from_pairs(ys.iter().map(|&y| (y, "a"))).unwrap();
        let n = ys.len();
        let ones = fabricated(&sample, vec![1.0; n]);
        assert_eq!(weighted_mean_cdf(&sample, &ones, Component::G, &|_| 1.0).unwrap(), 1.0);
        assert_eq!(weighted_mean_cdf(&sample, &ones, Component::G, &|_| 0.0).unwrap(), 0.0);

        // pooled ECDF at the sample points: brute-force rank computation
        let ecdf_vals: Vec<f64> = pooled_grid(&sample)
            .iter()
            .map(|&g| ys.iter().filter(|&&y| y <= g).count() as f64 / n as f64)
            .collect();
        let rank_sum: usize = ys.iter().map(|&y| ys.iter().filter(|&&v| v <= y).count()).sum();
        let expected = rank_sum as f64 / (n * n) as f64;
        assert!((expected - (n + 1) as f64 / (2 * n) as f64).abs() < 1e-15);
        let est = fabricated(&sample, ecdf_vals);
        let got = weighted_mean_cdf(&sample, &est, Component::G, &|_| 1.0).unwrap();
        assert!((got - expected).abs() < 1e-15);

        assert!(matches!(
            weighted_mean_cdf(&sample, &ones, Component::G, &|_| f64::NAN),
            Err(Error::Weight(_))
        ));
        assert!(weighted_mean_cdf(&sample, &ones, Component::H, &|_| 1.0).is_err());
    }

    #[test]
    fn identical_b_and_c_give_zero_statistic() {
        let base = three_label(4, 400);
        // relabel: C gets an exact copy of B's outcomes
        let mut pairs: Vec<(f64, String)> = base
            .observations()
            .filter(|o| o.x != "2")
            .map(|o| (o.y, o.x.to_string()))
            .collect();
        let copies: Vec<(f64, String)> = pairs
            .iter()
            .filter(|(_, x)| x == "1")
            .map(|(y, _)| (*y, "2".to_string()))
            .collect();
        pairs.extend(copies);
        let s = Sample::from_pairs(pairs).unwrap();
        let p = Partition::parse("0|1|2").unwrap();
        for comp in [Component::G, Component::H] {
            let r = run_spec_test(&s, &p, &TuningConstants::default(), &|_| 1.0, comp, &Default::default()).unwrap();
            assert_eq!(r.weighted_diff, 0.0);
            assert_eq!(r.statistic, 0.0);
            assert_eq!(r.p_value, 1.0);
            assert!(r.reject_at.iter().all(|d| !d.reject));
        }
    }

    #[test]
    fn swapping_b_and_c_negates() {
        let s = three_label(9, 1500);
        let p1 = Partition::parse("0|1|2").unwrap();
        let p2 = Partition::parse("0|2|1").unwrap();
        let t = TuningConstants::default();
        for comp in [Component::G, Component::H] {
            let r1 = run_spec_test(&s, &p1, &t, &|_| 1.0, comp, &Default::default()).unwrap();
            let r2 = run_spec_test(&s, &p2, &t, &|_| 1.0, comp, &Default::default()).unwrap();
            assert_eq!(r1.statistic, -r2.statistic);
            assert_eq!(r1.p_value, r2.p_value);
            assert_eq!(r1.variance_hat, r2.variance_hat);
        }
    }

    #[test]
    fn weight_scaling_leaves_statistic() {
        let s = three_label(12, 1500);
        let p = Partition::parse("0|1|2").unwrap();
        let t = TuningConstants::default();
        let w = Weight::gauss().bind(&s);
        let w3 = |y: f64| 3.5 * w(y);
        for comp in [Component::G, Component::H] {
            let r1 = run_spec_test(&s, &p, &t, &*w, comp, &Default::default()).unwrap();
            let r2 = run_spec_test(&s, &p, &t, &w3, comp, &Default::default()).unwrap();
            assert!((r1.statistic - r2.statistic).abs() < 1e-10 * r1.statistic.abs().max(1.0));
        }
    }

    #[test]
    fn p_value_and_decisions_agree() {
        let s = three_label(2, 1500);
        let p = Partition::parse("0|1|2").unwrap();
        for weight in [Weight::Uniform, Weight::central(), Weight::gauss()] {
            let w = weight.bind(&s);
            for (_, r) in run_spec_tests(&s, &p, &TuningConstants::default(), &*w, &Default::default()) {
                let r = r.unwrap();
                assert!((0.0..=1.0).contains(&r.p_value));
                let phi = crate::skew_normal::std_normal_cdf(r.statistic.abs());
                assert!((r.p_value - 2.0 * (1.0 - phi)).abs() < 1e-12);
                for d in &r.reject_at {
                    assert_eq!(d.reject, r.p_value < d.level);
                }
            }
        }
    }

    #[test]
    fn needs_three_sets() {
        let s = three_label(2, 200);
        let p = Partition::parse("0,1|2").unwrap();
        assert!(matches!(
            run_spec_test(&s, &p, &TuningConstants::default(), &|_| 1.0, Component::G, &Default::default()),
            Err(Error::Partition(_))
        ));
        let p = Partition::parse("0|1|1,2").unwrap();
        assert!(run_spec_test(&s, &p, &TuningConstants::default(), &|_| 1.0, Component::G, &Default::default()).is_err());
    }
}
