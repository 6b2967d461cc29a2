//! Left and right tail ratios of two subsample CDFs.
//!
//! For disjoint label sets `A` and `B`, with cuts taken on the `B`-subsample,
//!
//! ```text
//! zeta-(A,B) = F_n(ell | A) / F_n(ell | B)
//! zeta+(A,B) = (1 - F_n(r | A)) / (1 - F_n(r | B))
//! ```
//!
//! Each estimate carries the plug-in variance building block
//! `sigma2 = zeta^2 + rho * zeta` with `rho = n_B / n_A`, and the standard
//! error `sqrt(sigma2 / cut_count)`.

use serde::{Deserialize, Serialize};

use crate::data::{LabelSet, Sample};
use crate::empirical::Subset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    Left,
    Right,
}

impl TailSide {
    pub fn name(self) -> &'static str {
        match self {
            TailSide::Left => "left",
            TailSide::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRatioEstimate {
    pub side: TailSide,
    pub value: f64,
    /// `iota` for the left tail, `kappa` for the right.
    pub cut_count: usize,
    /// `n_B / n_A`
    pub rho_hat: f64,
    pub sigma2: f64,
    /// Absent when `cut_count == 0`.
    pub se: Option<f64>,
    /// `ell` or `r` on the `B`-subsample.
    pub cut_point: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// No `A` observation lies beyond the cut.
    pub zero_tail: bool,
    /// The cut order statistic is tied with its neighbour.
    pub tie_at_cut: bool,
}

fn disjoint(a: &LabelSet, b: &LabelSet) -> Result<()> {
    if a.is_disjoint(b) {
        Ok(())
    } else {
        Err(Error::Partition(format!("label sets {a} and {b} overlap")))
    }
}

fn finish(
    side: TailSide,
    value: f64,
    cut_count: usize,
    cut_point: f64,
    tie: bool,
    num: &Subset<'_>,
    den: &Subset<'_>,
) -> TailRatioEstimate {
    let rho_hat = den.len() as f64 / num.len() as f64;
    let sigma2 = value * value + rho_hat * value;
    let se = (cut_count >= 1).then(|| (sigma2 / cut_count as f64).sqrt());
    let zero_tail = value == 0.0;
    if zero_tail {
        log::warn!("{} tail ratio is zero: no numerator observations beyond the cut", side.name());
    }
    TailRatioEstimate {
        side,
        value,
        cut_count,
        rho_hat,
        sigma2,
        se,
        cut_point,
        n_a: num.len(),
        n_b: den.len(),
        zero_tail,
        tie_at_cut: tie,
    }
}

pub(crate) fn zeta_minus_subsets(num: &Subset<'_>, den: &Subset<'_>, iota: usize) -> Result<TailRatioEstimate> {
    let (ell, tie) = den.left_cut(iota)?;
    let fa = num.count_le(ell) as f64 / num.len() as f64;
    let fb = den.count_le(ell) as f64 / den.len() as f64;
    if fb == 0.0 {
        return Err(Error::DegenerateTail("F_n(ell | B) is zero".into()));
    }
    Ok(finish(TailSide::Left, fa / fb, iota, ell, tie, num, den))
}

pub(crate) fn zeta_plus_subsets(num: &Subset<'_>, den: &Subset<'_>, kappa: usize) -> Result<TailRatioEstimate> {
    let (r, tie) = den.right_cut(kappa)?;
    let fa = num.count_le(r) as f64 / num.len() as f64;
    let fb = den.count_le(r) as f64 / den.len() as f64;
    if 1.0 - fb == 0.0 {
        return Err(Error::DegenerateTail("1 - F_n(r | B) is zero".into()));
    }
    Ok(finish(TailSide::Right, (1.0 - fa) / (1.0 - fb), kappa, r, tie, num, den))
}

/// Left tail ratio `zeta-(A,B)` with the cut at the `(iota+1)`-th order
/// statistic of the `B`-subsample.
pub fn zeta_minus_hat(sample: &Sample, a: &LabelSet, b: &LabelSet, iota: usize) -> Result<TailRatioEstimate> {
    disjoint(a, b)?;
    zeta_minus_subsets(&sample.subset(a)?, &sample.subset(b)?, iota)
}

/// Right tail ratio `zeta+(A,B)` with the cut at the `(n_B - kappa)`-th
/// order statistic of the `B`-subsample.
pub fn zeta_plus_hat(sample: &Sample, a: &LabelSet, b: &LabelSet, kappa: usize) -> Result<TailRatioEstimate> {
    disjoint(a, b)?;
    zeta_plus_subsets(&sample.subset(a)?, &sample.subset(b)?, kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> (LabelSet, LabelSet) {
        (LabelSet::single("a"), LabelSet::single("b"))
    }

    #[test]
    fn identical_multisets_give_one() {
        let vals = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.0, 3.5];
        let sample = Sample::from_pairs(vals.iter().map(|&v| (v, "a")).chain(vals.iter().map(|&v| (v, "b")))).unwrap();
        let (a, b) = ab();
        assert_eq!(zeta_minus_hat(&sample, &a, &b, 2).unwrap().value, 1.0);
        assert_eq!(zeta_plus_hat(&sample, &a, &b, 2).unwrap().value, 1.0);
    }

    #[test]
    fn twenty_point_hand_count() {
        // A: 10 points, B: 10 points; third-smallest B value is 0.25.
        let a_vals = [0.1, 0.2, 0.3, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        let b_vals = [0.05, 0.15, 0.25, 0.35, 0.55, 0.65, 0.75, 0.85, 0.95, 1.05];
        let sample = Sample::from_pairs(
            a_vals.iter().map(|&v| (v, "a")).chain(b_vals.iter().map(|&v| (v, "b"))),
        )
        .unwrap();
        // brute force: double loop over every observation
        let ell = 0.25;
        let (mut ca, mut cb, mut na, mut nb) = (0usize, 0usize, 0usize, 0usize);
        for o in sample.observations() {
            if o.x == "a" {
                na += 1;
                if o.y <= ell {
                    ca += 1;
                }
            } else {
                nb += 1;
                if o.y <= ell {
                    cb += 1;
                }
            }
        }
        assert_eq!((ca, cb), (2, 3));
        let expected = (ca as f64 / na as f64) / (cb as f64 / nb as f64);
        let (a, b) = ab();
        let est = zeta_minus_hat(&sample, &a, &b, 2).unwrap();
        assert_eq!(est.cut_point, ell);
        assert_eq!(est.value, expected);
        assert_eq!(est.rho_hat, 1.0);
        assert_eq!(est.sigma2, expected * expected + expected);
        assert_eq!(est.se, Some((est.sigma2 / 2.0).sqrt()));
    }

    #[test]
    fn sigma2_substitution() {
        let s2 = |z: f64, rho: f64| z * z + rho * z;
        assert_eq!(s2(1.0, 1.0), 2.0);
        assert!((s2(1.0 / 3.0, 1.0) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn zero_tail_is_a_valid_estimate() {
        let sample = Sample::from_pairs(
            [(5.0, "a"), (6.0, "a"), (7.0, "a"), (1.0, "b"), (2.0, "b"), (3.0, "b"), (8.0, "b")],
        )
        .unwrap();
        let (a, b) = ab();
        let est = zeta_minus_hat(&sample, &a, &b, 1).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.sigma2, 0.0);
        assert!(est.zero_tail);
    }

    #[test]
    fn se_absent_at_zero_cut() {
        let sample = Sample::from_pairs([(1.0, "a"), (2.0, "b"), (0.5, "a"), (3.0, "b")]).unwrap();
        let (a, b) = ab();
        let est = zeta_minus_hat(&sample, &a, &b, 0).unwrap();
        assert_eq!(est.se, None);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let sample = Sample::from_pairs([(1.0, "a"), (2.0, "b")]).unwrap();
        let a = LabelSet::new(["a", "b"]);
        let b = LabelSet::single("b");
        assert!(matches!(zeta_minus_hat(&sample, &a, &b, 0), Err(Error::Partition(_))));
    }

    #[test]
    fn degenerate_right_tail() {
        // all B values tied at the top: 1 - F_n(r|B) = 0
        let sample = Sample::from_pairs([(1.0, "a"), (2.0, "a"), (5.0, "b"), (5.0, "b"), (5.0, "b")]).unwrap();
        let (a, b) = ab();
        assert!(matches!(zeta_plus_hat(&sample, &a, &b, 1), Err(Error::DegenerateTail(_))));
    }

    proptest! {
        #[test]
        fn monotone_transform_invariance(
            a in prop::collection::vec(-5f64..5.0, 20..60),
            b in prop::collection::vec(-5f64..5.0, 20..60),
        ) {
            let build = |f: &dyn Fn(f64) -> f64| {
                Sample::from_pairs(a.iter().map(|&v| (f(v), "a")).chain(b.iter().map(|&v| (f(v), "b")))).unwrap()
            };
            let s1 = build(&|v| v);
            let s2 = build(&|v| (0.7 * v).exp() * 3.0 - 1.0);
            let (la, lb) = ab();
            let m1 = zeta_minus_hat(&s1, &la, &lb, 3).unwrap();
            let m2 = zeta_minus_hat(&s2, &la, &lb, 3).unwrap();
            prop_assert_eq!(m1.value, m2.value);
            let p1 = zeta_plus_hat(&s1, &la, &lb, 3);
            let p2 = zeta_plus_hat(&s2, &la, &lb, 3);
            match (p1, p2) {
                (Ok(p1), Ok(p2)) => prop_assert_eq!(p1.value, p2.value),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "transform changed the outcome"),
            }
        }
    }
}
