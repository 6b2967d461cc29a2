//! Observations, samples, label sets and CSV ingestion.
//!
//! A [`Sample`] is stored column-wise: outcomes in one vector and interned
//! label indices in another. Per-label sorted copies of the outcomes are
//! built lazily, once, and shared by every estimator that touches the
//! sample afterwards.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One `(y, x)` pair borrowed from a [`Sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<'a> {
    pub y: f64,
    pub x: &'a str,
}

/// Normalizes a raw label token: surrounding whitespace is dropped and
/// integer tokens are rewritten in canonical decimal form (`"007"` -> `"7"`).
pub fn normalize_label(raw: &str) -> String {
    let t = raw.trim();
    match t.parse::<i64>() {
        Ok(v) => v.to_string(),
        Err(_) => t.to_string(),
    }
}

/// Integer labels sort numerically and before any non-integer label.
pub fn label_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// A nonempty set of instrument labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSet(BTreeSet<String>);

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        LabelSet(labels.into_iter().map(|s| normalize_label(s.as_ref())).collect())
    }

    pub fn single(label: &str) -> Self {
        Self::new([label])
    }

    /// Parses a comma-separated label list such as `"a,b"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let set = Self::new(spec.split(',').filter(|t| !t.trim().is_empty()));
        if set.is_empty() {
            return Err(Error::Partition(format!("empty label set in {spec:?}")));
        }
        Ok(set)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_disjoint(&self, other: &LabelSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        LabelSet(self.0.union(&other.0).cloned().collect())
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut labels: Vec<&str> = self.iter().collect();
        labels.sort_by(|a, b| label_cmp(a, b));
        write!(f, "{{{}}}", labels.join(","))
    }
}

impl<S: AsRef<str>> FromIterator<S> for LabelSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        LabelSet::new(iter)
    }
}

/// Disjoint label sets `A`, `B` and optionally `C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub a: LabelSet,
    pub b: LabelSet,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<LabelSet>,
}

impl Partition {
    pub fn two(a: LabelSet, b: LabelSet) -> Self {
        Partition { a, b, c: None }
    }

    pub fn three(a: LabelSet, b: LabelSet, c: LabelSet) -> Self {
        Partition { a, b, c: Some(c) }
    }

    /// Parses `"a,b|c"` or `"a|b|c"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let sets = spec
            .split('|')
            .map(LabelSet::parse)
            .collect::<Result<Vec<_>>>()?;
        match sets.len() {
            2 => {
                let mut it = sets.into_iter();
                Ok(Partition::two(it.next().unwrap(), it.next().unwrap()))
            }
            3 => {
                let mut it = sets.into_iter();
                Ok(Partition::three(
                    it.next().unwrap(),
                    it.next().unwrap(),
                    it.next().unwrap(),
                ))
            }
            k => Err(Error::Partition(format!(
                "expected 2 or 3 '|'-separated label sets, got {k}"
            ))),
        }
    }

    pub fn sets(&self) -> Vec<&LabelSet> {
        let mut v = vec![&self.a, &self.b];
        if let Some(c) = &self.c {
            v.push(c);
        }
        v
    }

    /// Checks pairwise disjointness and label validity; with `require_cover`
    /// the sets must also exhaust the sample's label set.
    pub fn validate(&self, sample: &Sample, require_cover: bool) -> Result<()> {
        let sets = self.sets();
        for s in &sets {
            sample.resolve(s)?;
        }
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if !sets[i].is_disjoint(sets[j]) {
                    return Err(Error::Partition(format!(
                        "label sets {} and {} overlap",
                        sets[i], sets[j]
                    )));
                }
            }
        }
        if require_cover {
            let covered: usize = sets.iter().map(|s| s.len()).sum();
            if covered != sample.labels().len() {
                return Err(Error::Partition(format!(
                    "sets cover {covered} of {} labels; they must partition the label set",
                    sample.labels().len()
                )));
            }
        }
        Ok(())
    }
}

/// Tuning-rule constants for the cut counts `C (n ln ln n)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningConstants {
    pub c: f64,
    pub exponent: f64,
    /// Fixed left cut count, bypassing the rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota_override: Option<usize>,
    /// Fixed right cut count, bypassing the rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_override: Option<usize>,
}

impl Default for TuningConstants {
    fn default() -> Self {
        TuningConstants {
            c: 0.5,
            exponent: 0.6,
            iota_override: None,
            kappa_override: None,
        }
    }
}

impl TuningConstants {
    pub fn new(c: f64) -> Result<Self> {
        let t = TuningConstants {
            c,
            ..Default::default()
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Tuning(format!("C must be positive, got {}", self.c)));
        }
        if !(self.exponent > 0.0 && self.exponent < 1.0) {
            return Err(Error::Tuning(format!(
                "exponent must lie in (0,1), got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

/// Resolved label indices of a subset together with its size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SubsetIndex {
    pub(crate) members: Vec<usize>,
    pub(crate) n: usize,
}

/// Immutable `(Y, X)` sample with discrete instrument labels.
#[derive(Debug, Clone)]
pub struct Sample {
    ys: Vec<f64>,
    xs: Vec<u32>,
    labels: Vec<String>,
    counts: Vec<usize>,
    sorted: Vec<OnceLock<Vec<f64>>>,
    pooled: OnceLock<Vec<f64>>,
}

impl PartialEq for Sample {
    fn eq(&self, other: &Self) -> bool {
        self.ys.len() == other.ys.len()
            && self.labels == other.labels
            && self.xs == other.xs
            && self
                .ys
                .iter()
                .zip(&other.ys)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Sample {
    /// Builds a sample from `(y, label)` pairs, rejecting non-finite outcomes.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, S)>,
        S: AsRef<str>,
    {
        let mut ys = Vec::new();
        let mut raw = Vec::new();
        for (i, (y, x)) in pairs.into_iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::Data {
                    row: i + 1,
                    message: format!("non-finite outcome {y}"),
                });
            }
            ys.push(y);
            raw.push(normalize_label(x.as_ref()));
        }
        if ys.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self::from_normalized(ys, raw))
    }

    fn from_normalized(ys: Vec<f64>, raw: Vec<String>) -> Self {
        let mut labels: Vec<String> = raw
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        labels.sort_by(|a, b| label_cmp(a, b));
        let index: BTreeMap<&str, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let xs: Vec<u32> = raw.iter().map(|l| index[l.as_str()]).collect();
        Self::from_parts(ys, xs, labels)
    }

    /// Builds a sample from pre-interned label indices. `labels` must be in
    /// [`label_cmp`] order; labels that never occur are dropped.
    pub(crate) fn from_parts(ys: Vec<f64>, mut xs: Vec<u32>, mut labels: Vec<String>) -> Self {
        let mut counts = vec![0usize; labels.len()];
        for &x in &xs {
            counts[x as usize] += 1;
        }
        if counts.iter().any(|&c| c == 0) {
            let mut remap = vec![u32::MAX; labels.len()];
            let mut next = 0u32;
            for (i, &c) in counts.iter().enumerate() {
                if c > 0 {
                    remap[i] = next;
                    next += 1;
                }
            }
            for x in xs.iter_mut() {
                *x = remap[*x as usize];
            }
            labels = labels
                .into_iter()
                .zip(&counts)
                .filter(|(_, &c)| c > 0)
                .map(|(l, _)| l)
                .collect();
            counts.retain(|&c| c > 0);
        }
        let sorted = (0..labels.len()).map(|_| OnceLock::new()).collect();
        Sample {
            ys,
            xs,
            labels,
            counts,
            sorted,
            pooled: OnceLock::new(),
        }
    }

    /// Total number of observations `n`.
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// Declared labels, in [`label_cmp`] order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn all_labels(&self) -> LabelSet {
        LabelSet::new(&self.labels)
    }

    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        self.labels
            .iter()
            .cloned()
            .zip(self.counts.iter().copied())
            .collect()
    }

    pub fn count(&self, label: &str) -> usize {
        self.label_index(label).map_or(0, |i| self.counts[i])
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation<'_>> + '_ {
        self.ys.iter().zip(&self.xs).map(move |(&y, &x)| Observation {
            y,
            x: &self.labels[x as usize],
        })
    }

    fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub(crate) fn resolve(&self, set: &LabelSet) -> Result<SubsetIndex> {
        if set.is_empty() {
            return Err(Error::Partition("empty label set".into()));
        }
        let mut members = Vec::with_capacity(set.len());
        for label in set.iter() {
            match self.label_index(label) {
                Some(i) => members.push(i),
                None => {
                    return Err(Error::Partition(format!(
                        "unknown label {label:?} (declared: {})",
                        self.labels.join(",")
                    )))
                }
            }
        }
        members.sort_unstable();
        let n = members.iter().map(|&i| self.counts[i]).sum();
        Ok(SubsetIndex { members, n })
    }

    /// Ascending outcomes of one label; built on first use.
    pub(crate) fn sorted_label(&self, idx: usize) -> &[f64] {
        self.sorted[idx].get_or_init(|| {
            let mut v: Vec<f64> = self
                .ys
                .iter()
                .zip(&self.xs)
                .filter(|(_, &x)| x as usize == idx)
                .map(|(&y, _)| y)
                .collect();
            v.sort_unstable_by(f64::total_cmp);
            v
        })
    }

    /// Ascending outcomes of the whole sample; built on first use.
    pub fn sorted_pooled(&self) -> &[f64] {
        self.pooled.get_or_init(|| {
            let mut v = self.ys.clone();
            v.sort_unstable_by(f64::total_cmp);
            v
        })
    }

    /// Outcomes with `X` in `set`, in row order.
    pub fn subset_view(&self, set: &LabelSet) -> Result<Vec<f64>> {
        let idx = self.resolve(set)?;
        let mut mask = vec![false; self.labels.len()];
        for &m in &idx.members {
            mask[m] = true;
        }
        Ok(self
            .ys
            .iter()
            .zip(&self.xs)
            .filter(|(_, &x)| mask[x as usize])
            .map(|(&y, _)| y)
            .collect())
    }
}

/// Reads a header-bearing, comma-delimited UTF-8 file into a [`Sample`].
pub fn ingest_csv(path: impl AsRef<Path>, y_column: &str, x_column: &str) -> Result<Sample> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(std::io::BufReader::new(file), y_column, x_column)
}

/// Same as [`ingest_csv`] over any reader.
pub fn ingest_reader<R: std::io::Read>(reader: R, y_column: &str, x_column: &str) -> Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column {name:?} not found in header")))
    };
    let yi = find(y_column)?;
    let xi = find(x_column)?;

    let mut ys = Vec::new();
    let mut raw = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                return Err(Error::Data {
                    row: row + 1,
                    message: e.to_string(),
                })
            }
        }
        row += 1;
        let field = |i: usize| {
            record.get(i).ok_or_else(|| Error::Data {
                row,
                message: format!("missing field {}", i + 1),
            })
        };
        let y_raw = field(yi)?.trim();
        let y: f64 = y_raw.parse().map_err(|_| Error::Data {
            row,
            message: format!("cannot parse {y_raw:?} as a real number"),
        })?;
        if !y.is_finite() {
            return Err(Error::Data {
                row,
                message: format!("non-finite outcome {y_raw:?}"),
            });
        }
        let x = normalize_label(field(xi)?);
        if x.is_empty() {
            return Err(Error::Data {
                row,
                message: "empty label".into(),
            });
        }
        ys.push(y);
        raw.push(x);
    }
    if ys.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(Sample::from_normalized(ys, raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Sample {
        Sample::from_pairs([(1.0, "a"), (2.0, "b"), (3.0, "a")]).unwrap()
    }

    #[test]
    fn ingest_counts_labels() {
        let csv = "y,x\n0.5,0\n1.5,1\n-2,0\n3,1\n";
        let s = ingest_reader(csv.as_bytes(), "y", "x").unwrap();
        assert_eq!(s.len(), 4);
        let counts = s.label_counts();
        assert_eq!(counts["0"], 2);
        assert_eq!(counts["1"], 2);
        assert_eq!(s.ys(), &[0.5, 1.5, -2.0, 3.0]);
    }

    #[test]
    fn ingest_reports_bad_row() {
        let csv = "y,x\n1,0\n2,1\nabc,0\n";
        match ingest_reader(csv.as_bytes(), "y", "x") {
            Err(Error::Data { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_non_finite() {
        let csv = "y,x\n1,0\ninf,1\n";
        assert!(matches!(
            ingest_reader(csv.as_bytes(), "y", "x"),
            Err(Error::Data { row: 2, .. })
        ));
        let csv = "y,x\nNaN,0\n";
        assert!(matches!(
            ingest_reader(csv.as_bytes(), "y", "x"),
            Err(Error::Data { row: 1, .. })
        ));
    }

    #[test]
    fn ingest_empty_and_schema() {
        assert!(matches!(
            ingest_reader("y,x\n".as_bytes(), "y", "x"),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            ingest_reader("y,z\n1,2\n".as_bytes(), "y", "x"),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn integer_labels_are_normalized() {
        let csv = "x,y\n01,1\n1,2\n 2 ,3\n";
        let s = ingest_reader(csv.as_bytes(), "y", "x").unwrap();
        assert_eq!(s.labels(), &["1".to_string(), "2".to_string()]);
        assert_eq!(s.count("1"), 2);
    }

    #[test]
    fn labels_sort_numerically() {
        let s = Sample::from_pairs([(0.0, "10"), (0.0, "9"), (0.0, "b"), (0.0, "a")]).unwrap();
        assert_eq!(s.labels(), &["9", "10", "a", "b"]);
    }

    #[test]
    fn subset_view_filters() {
        let s = small();
        assert_eq!(s.subset_view(&LabelSet::single("a")).unwrap(), vec![1.0, 3.0]);
        assert_eq!(s.subset_view(&s.all_labels()).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            s.subset_view(&LabelSet::single("z")),
            Err(Error::Partition(_))
        ));
        assert!(matches!(
            s.subset_view(&LabelSet::new(Vec::<&str>::new())),
            Err(Error::Partition(_))
        ));
    }

    #[test]
    fn partition_parsing_and_validation() {
        let s = Sample::from_pairs([(0.0, "a"), (1.0, "b"), (2.0, "c"), (3.0, "d")]).unwrap();
        let p = Partition::parse("a,b|c|d").unwrap();
        assert_eq!(p.a, LabelSet::new(["a", "b"]));
        p.validate(&s, true).unwrap();
        assert!(Partition::parse("a|b|c|d").is_err());
        assert!(Partition::parse("a||b").is_err());
        let overlap = Partition::parse("a,b|b,c,d").unwrap();
        assert!(overlap.validate(&s, false).is_err());
        let short = Partition::parse("a|b").unwrap();
        short.validate(&s, false).unwrap();
        assert!(short.validate(&s, true).is_err());
    }

    #[test]
    fn tuning_validation() {
        assert!(TuningConstants::new(0.5).is_ok());
        assert!(TuningConstants::new(0.0).is_err());
        let bad = TuningConstants {
            exponent: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ingest_is_deterministic() {
        let csv = "y,x\n0.1,a\n0.2,b\n0.3,a\n";
        let a = ingest_reader(csv.as_bytes(), "y", "x").unwrap();
        let b = ingest_reader(csv.as_bytes(), "y", "x").unwrap();
        assert_eq!(a, b);
    }
}
