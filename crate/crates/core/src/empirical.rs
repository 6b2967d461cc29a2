//! Subset empirical CDFs and intermediate order statistics.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::data::{LabelSet, Sample, SubsetIndex};
use crate::error::{Error, Result};

/// The left and right rank cuts of one subsample.
///
/// `ell` is the `(iota + 1)`-th and `r` the `(m - kappa)`-th ascending order
/// statistic, both 1-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderStatCuts {
    pub iota: usize,
    pub kappa: usize,
    pub m: usize,
    pub ell: f64,
    pub r: f64,
    /// The `(iota+1)`-th and `(iota+2)`-th order statistics coincide.
    pub left_tie: bool,
    /// The `(m-kappa)`-th and `(m-kappa+1)`-th order statistics coincide.
    pub right_tie: bool,
}

/// A view of the observations whose label lies in a given set.
#[derive(Debug, Clone)]
pub struct Subset<'a> {
    sample: &'a Sample,
    index: SubsetIndex,
}

impl Sample {
    pub fn subset(&self, set: &LabelSet) -> Result<Subset<'_>> {
        Ok(Subset {
            sample: self,
            index: self.resolve(set)?,
        })
    }
}

impl<'a> Subset<'a> {
    pub fn len(&self) -> usize {
        self.index.n
    }

    pub fn is_empty(&self) -> bool {
        self.index.n == 0
    }

    /// Number of subset observations with `y_i <= y`.
    pub fn count_le(&self, y: f64) -> usize {
        self.index
            .members
            .iter()
            .map(|&i| self.sample.sorted_label(i).partition_point(|&v| v <= y))
            .sum()
    }

    /// Right-continuous empirical CDF of the subset.
    pub fn ecdf(&self, y: f64) -> f64 {
        self.count_le(y) as f64 / self.index.n as f64
    }

    /// Ascending outcomes of the subset.
    pub fn sorted(&self) -> Cow<'a, [f64]> {
        if let [only] = self.index.members[..] {
            return Cow::Borrowed(self.sample.sorted_label(only));
        }
        let mut v = Vec::with_capacity(self.index.n);
        for &i in &self.index.members {
            v.extend_from_slice(self.sample.sorted_label(i));
        }
        v.sort_unstable_by(f64::total_cmp);
        Cow::Owned(v)
    }

    /// Left cut: the `(iota+1)`-th order statistic and whether it is tied
    /// with its successor.
    pub fn left_cut(&self, iota: usize) -> Result<(f64, bool)> {
        let m = self.index.n;
        if iota + 1 > m {
            return Err(Error::Tuning(format!(
                "left cut iota = {iota} needs at least {} observations, subset has {m}",
                iota + 1
            )));
        }
        let sorted = self.sorted();
        let ell = sorted[iota];
        let tie = sorted.get(iota + 1).is_some_and(|&next| next == ell);
        if tie {
            log::warn!("tied outcomes at the left cut (rank {}); using positional ranks", iota + 1);
        }
        Ok((ell, tie))
    }

    /// Right cut: the `(m-kappa)`-th order statistic and whether it is tied
    /// with its successor.
    pub fn right_cut(&self, kappa: usize) -> Result<(f64, bool)> {
        let m = self.index.n;
        if kappa < 1 {
            return Err(Error::Tuning("right cut kappa must be at least 1".into()));
        }
        if kappa >= m {
            return Err(Error::Tuning(format!(
                "right cut kappa = {kappa} needs more than {kappa} observations, subset has {m}"
            )));
        }
        let sorted = self.sorted();
        let r = sorted[m - kappa - 1];
        let tie = sorted[m - kappa] == r;
        if tie {
            log::warn!("tied outcomes at the right cut (rank {}); using positional ranks", m - kappa);
        }
        Ok((r, tie))
    }

    pub fn order_stats(&self, iota: usize, kappa: usize) -> Result<OrderStatCuts> {
        let m = self.index.n;
        if kappa < 1 {
            return Err(Error::Tuning("kappa must be at least 1".into()));
        }
        if iota + 1 > m.saturating_sub(kappa) {
            return Err(Error::Tuning(format!(
                "cuts overlap: iota + 1 = {} exceeds m - kappa = {} (m = {m})",
                iota + 1,
                m as i64 - kappa as i64
            )));
        }
        let (ell, left_tie) = self.left_cut(iota)?;
        let (r, right_tie) = self.right_cut(kappa)?;
        Ok(OrderStatCuts {
            iota,
            kappa,
            m,
            ell,
            r,
            left_tie,
            right_tie,
        })
    }
}

/// `F_n(y | S)`.
pub fn ecdf(sample: &Sample, set: &LabelSet, y: f64) -> Result<f64> {
    Ok(sample.subset(set)?.ecdf(y))
}

/// Intermediate order statistics of the `S`-subsample.
pub fn order_stats(sample: &Sample, set: &LabelSet, iota: usize, kappa: usize) -> Result<OrderStatCuts> {
    sample.subset(set)?.order_stats(iota, kappa)
}
