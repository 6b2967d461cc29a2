//! Skew-normal simulation studies.
//!
//! Each replication draws `X ~ Bernoulli(p_x1)`, a latent `T | X` with
//! `P(T = 1 | X = x) = lambda(x)`, and `Y = T V_G + (1 - T) V_H` where
//! `V_G ~ SN(mu, sigma, beta)` and `V_H ~ SN(-mu, sigma, -beta)`.
//!
//! Replication `i` uses its own ChaCha8 stream seeded from
//! `mix(master_seed, i)`, and results are folded in replication order, so a
//! report depends only on the design and never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{label_cmp, LabelSet, Partition, Sample, TuningConstants};
use crate::error::{Error, Result};
use crate::mixture::{component_cdfs, lambda_hat, ComponentCurve, EstimationOptions};
use crate::skew_normal::SkewNormalParams;
use crate::spec_test::{run_spec_test, Component, Weight};
use crate::Z95;

/// Replications evaluated per parallel batch before folding.
const BATCH: usize = 256;

/// Number of points in the figure lattice.
pub const FIGURE_POINTS: usize = 201;

/// Seed of replication `rep`: the splitmix64 finalizer applied to the
/// master seed and the golden-ratio-spaced replication counter.
pub fn rep_seed(master_seed: u64, rep: u64) -> u64 {
    let mut z = master_seed ^ rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rep_rng(master_seed: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(rep_seed(master_seed, rep))
}

/// Runs `f` over `0..reps` in parallel batches and folds the results in
/// replication order.
fn fold_reps<T, A, F, G>(reps: usize, init: A, f: F, mut fold: G) -> A
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    G: FnMut(&mut A, T),
{
    let mut acc = init;
    let mut start = 0;
    while start < reps {
        let end = (start + BATCH).min(reps);
        let out: Vec<T> = (start..end).into_par_iter().map(&f).collect();
        for item in out {
            fold(&mut acc, item);
        }
        start = end;
    }
    acc
}

/// A finite-label mixture of two skew-normal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMixture {
    pub g: SkewNormalParams,
    pub h: SkewNormalParams,
    pub labels: Vec<String>,
    /// `P(X = label)`
    pub p_x: Vec<f64>,
    /// `P(T = 1 | X = label)`
    pub lambda: Vec<f64>,
}

impl LabelMixture {
    pub fn new(
        g: SkewNormalParams,
        h: SkewNormalParams,
        labels: Vec<String>,
        p_x: Vec<f64>,
        lambda: Vec<f64>,
    ) -> Result<Self> {
        if labels.is_empty() || labels.len() != p_x.len() || labels.len() != lambda.len() {
            return Err(Error::InvalidParameter(
                "labels, label probabilities and mixing proportions must have equal nonzero length".into(),
            ));
        }
        if p_x.iter().chain(&lambda).any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("probabilities must lie in [0, 1]".into()));
        }
        if (p_x.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("label probabilities must sum to one".into()));
        }
        let labels: Vec<String> = labels.iter().map(|l| crate::data::normalize_label(l)).collect();
        if labels.windows(2).any(|w| label_cmp(&w[0], &w[1]) != std::cmp::Ordering::Less) {
            return Err(Error::InvalidParameter("labels must be distinct and in ascending order".into()));
        }
        Ok(LabelMixture {
            g,
            h,
            labels,
            p_x,
            lambda,
        })
    }

    /// Three equally likely labels `0, 1, 2` with `lambda = 0.25, 0.5, 0.75`
    /// and the skew-normal components `SN(0, 1, 5)`, `SN(0, 1, -5)`.
    pub fn null_three_label() -> Self {
        LabelMixture::new(
            SkewNormalParams::new(0.0, 1.0, 5.0).unwrap(),
            SkewNormalParams::new(0.0, 1.0, -5.0).unwrap(),
            vec!["0".into(), "1".into(), "2".into()],
            vec![1.0 / 3.0; 3],
            vec![0.25, 0.5, 0.75],
        )
        .unwrap()
    }

    /// As [`null_three_label`](Self::null_three_label) but with
    /// `G = N(0, 1)` and `H = N(0, sigma_h^2)`, `sigma_h > 1`, so that `H`
    /// has the heavier tail on both sides.
    pub fn misspecified_three_label(sigma_h: f64) -> Result<Self> {
        if !(sigma_h > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_h must exceed 1 for H to dominate both tails, got {sigma_h}"
            )));
        }
        LabelMixture::new(
            SkewNormalParams::new(0.0, 1.0, 0.0)?,
            SkewNormalParams::new(0.0, sigma_h, 0.0)?,
            vec!["0".into(), "1".into(), "2".into()],
            vec![1.0 / 3.0; 3],
            vec![0.25, 0.5, 0.75],
        )
    }

    /// `n` i.i.d. draws of `(Y, X)`.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Sample {
        let mut ys = Vec::with_capacity(n);
        let mut xs = Vec::with_capacity(n);
        let last = self.labels.len() - 1;
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut x = last;
            for (i, p) in self.p_x.iter().enumerate() {
                acc += p;
                if u < acc {
                    x = i;
                    break;
                }
            }
            let t = rng.random::<f64>() < self.lambda[x];
            let y = if t { self.g.draw(rng) } else { self.h.draw(rng) };
            ys.push(y);
            xs.push(x as u32);
        }
        Sample::from_parts(ys, xs, self.labels.clone())
    }

    /// `F(y | label index)`
    pub fn conditional_cdf(&self, idx: usize, y: f64) -> f64 {
        let l = self.lambda[idx];
        l * self.g.cdf(y) + (1.0 - l) * self.h.cdf(y)
    }

    pub fn pooled_cdf(&self, y: f64) -> f64 {
        (0..self.labels.len())
            .map(|i| self.p_x[i] * self.conditional_cdf(i, y))
            .sum()
    }

    /// Quantile of the pooled mixture by bisection.
    pub fn pooled_quantile(&self, p: f64) -> f64 {
        let lo0 = self.g.quantile(p).min(self.h.quantile(p));
        let hi0 = self.g.quantile(p).max(self.h.quantile(p));
        let (mut lo, mut hi) = (lo0, hi0);
        if lo == hi {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.pooled_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// `FIGURE_POINTS` equally spaced points between the 0.1% and 99.9%
    /// quantiles of the pooled mixture.
    pub fn figure_lattice(&self) -> Vec<f64> {
        let lo = self.pooled_quantile(0.001);
        let hi = self.pooled_quantile(0.999);
        let step = (hi - lo) / (FIGURE_POINTS - 1) as f64;
        (0..FIGURE_POINTS)
            .map(|i| if i == FIGURE_POINTS - 1 { hi } else { lo + step * i as f64 })
            .collect()
    }
}

/// Two-label simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    /// `mu_G = mu = -mu_H`
    pub mu: f64,
    /// `beta_G = beta = -beta_H`
    pub beta: f64,
    pub sigma: f64,
    /// `P(X = 1)`
    pub p_x1: f64,
    /// `[P(T = 1 | X = 0), P(T = 1 | X = 1)]`
    pub p_t1_given_x: [f64; 2],
    pub n: usize,
    pub reps: usize,
    pub tuning: TuningConstants,
    pub master_seed: u64,
    pub min_subset_size: usize,
    /// Also estimate `G_n`, `H_n` on the figure lattice.
    pub figures: bool,
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec {
            mu: 0.0,
            beta: 5.0,
            sigma: 1.0,
            p_x1: 0.5,
            p_t1_given_x: [0.25, 0.75],
            n: 1_000,
            reps: 1_000,
            tuning: TuningConstants::default(),
            master_seed: 0,
            min_subset_size: crate::tuning::MIN_RULE_SIZE,
            figures: false,
        }
    }
}

impl DesignSpec {
    pub fn new(mu: f64, beta: f64, c: f64, n: usize, reps: usize, master_seed: u64) -> Result<Self> {
        let d = DesignSpec {
            mu,
            beta,
            n,
            reps,
            master_seed,
            tuning: TuningConstants::new(c)?,
            ..Default::default()
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        if self.n < 100 {
            return Err(Error::InvalidParameter(format!("n must be at least 100, got {}", self.n)));
        }
        let probs = [self.p_x1, self.p_t1_given_x[0], self.p_t1_given_x[1]];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("design probabilities must lie in [0, 1]".into()));
        }
        self.tuning.validate()?;
        SkewNormalParams::new(self.mu, self.sigma, self.beta)?;
        Ok(())
    }

    pub fn g(&self) -> SkewNormalParams {
        SkewNormalParams {
            mu: self.mu,
            sigma: self.sigma,
            beta: self.beta,
        }
    }

    pub fn h(&self) -> SkewNormalParams {
        SkewNormalParams {
            mu: -self.mu,
            sigma: self.sigma,
            beta: -self.beta,
        }
    }

    pub fn mixture(&self) -> Result<LabelMixture> {
        LabelMixture::new(
            self.g(),
            self.h(),
            vec!["0".into(), "1".into()],
            vec![1.0 - self.p_x1, self.p_x1],
            self.p_t1_given_x.to_vec(),
        )
    }
}

/// One dataset of a design.
pub fn generate_dataset<R: Rng + ?Sized>(design: &DesignSpec, rng: &mut R) -> Result<Sample> {
    design.validate()?;
    Ok(design.mixture()?.generate(design.n, rng))
}

/// True `G`, `H`, `F(.|0)` and `F(.|1)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueCurves {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

pub fn true_curves(design: &DesignSpec, grid: &[f64]) -> Result<TrueCurves> {
    design.validate()?;
    let m = design.mixture()?;
    Ok(TrueCurves {
        g: grid.iter().map(|&y| m.g.cdf(y)).collect(),
        h: grid.iter().map(|&y| m.h.cdf(y)).collect(),
        f0: grid.iter().map(|&y| m.conditional_cdf(0, y)).collect(),
        f1: grid.iter().map(|&y| m.conditional_cdf(1, y)).collect(),
    })
}

/// Table row for one mixing proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    /// `lambda(0)` or `lambda(1)`
    pub target: String,
    pub truth: f64,
    pub used_reps: usize,
    pub excluded_reps: usize,
    pub mean_estimate: Option<f64>,
    pub bias: Option<f64>,
    /// Monte Carlo standard deviation; absent with fewer than two usable
    /// replications.
    pub sd: Option<f64>,
    pub mean_se: Option<f64>,
    pub se_over_sd: Option<f64>,
    pub ci95: Option<f64>,
    pub mean_q_ell: Option<f64>,
    pub mean_q_r: Option<f64>,
}

/// Replication summary of one component on the figure lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub truth: Vec<f64>,
    pub mean_estimate: Vec<f64>,
    /// Mean over replications of the unclipped plug-in band edges.
    pub mean_band_low: Vec<f64>,
    pub mean_band_high: Vec<f64>,
    pub mc_sd: Vec<f64>,
    /// `mean_estimate - 1.96 mc_sd`
    pub mc_band_low: Vec<f64>,
    /// `mean_estimate + 1.96 mc_sd`
    pub mc_band_high: Vec<f64>,
    /// Share of replications whose plug-in band contains the truth.
    pub pointwise_coverage: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    /// Partition used for the component estimates: `A = {0}`, `B = {1}`.
    pub partition: Partition,
    pub grid: Vec<f64>,
    pub used_reps: usize,
    pub excluded_reps: usize,
    pub g: Option<CurveSummary>,
    pub h: Option<CurveSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub design: DesignSpec,
    pub rows: Vec<TargetRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figures: Option<FigureData>,
}

#[derive(Debug, Clone, Copy)]
struct LambdaDraw {
    value: f64,
    se: f64,
    covered: bool,
    q_ell: f64,
    q_r: f64,
}

struct CurveDraw {
    g: Vec<f64>,
    g_low: Vec<f64>,
    g_high: Vec<f64>,
    h: Vec<f64>,
    h_low: Vec<f64>,
    h_high: Vec<f64>,
}

struct RepOutcome {
    lambdas: [Option<LambdaDraw>; 2],
    curves: Option<Option<CurveDraw>>,
}

#[derive(Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn sd(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.m2 / (self.n - 1) as f64).sqrt())
    }
}

#[derive(Default)]
struct TargetAcc {
    est: Welford,
    se_sum: f64,
    covered: usize,
    q_ell_sum: f64,
    q_r_sum: f64,
    excluded: usize,
}

impl TargetAcc {
    fn push(&mut self, draw: Option<LambdaDraw>) {
        match draw {
            Some(d) => {
                self.est.push(d.value);
                self.se_sum += d.se;
                self.covered += d.covered as usize;
                self.q_ell_sum += d.q_ell;
                self.q_r_sum += d.q_r;
            }
            None => self.excluded += 1,
        }
    }

    fn row(&self, target: &str, truth: f64) -> TargetRow {
        let used = self.est.n;
        let mean = |s: f64| (used > 0).then(|| s / used as f64);
        let mean_se = mean(self.se_sum);
        let sd = self.est.sd();
        TargetRow {
            target: target.to_string(),
            truth,
            used_reps: used,
            excluded_reps: self.excluded,
            mean_estimate: (used > 0).then_some(self.est.mean),
            bias: (used > 0).then(|| self.est.mean - truth),
            sd,
            mean_se,
            se_over_sd: match (mean_se, sd) {
                (Some(se), Some(sd)) if sd > 0.0 => Some(se / sd),
                _ => None,
            },
            ci95: mean(self.covered as f64),
            mean_q_ell: mean(self.q_ell_sum),
            mean_q_r: mean(self.q_r_sum),
        }
    }
}

struct CurveAcc {
    est: Vec<Welford>,
    low_sum: Vec<f64>,
    high_sum: Vec<f64>,
    covered: Vec<usize>,
}

impl CurveAcc {
    fn new(k: usize) -> Self {
        CurveAcc {
            est: (0..k).map(|_| Welford::default()).collect(),
            low_sum: vec![0.0; k],
            high_sum: vec![0.0; k],
            covered: vec![0; k],
        }
    }

    fn push(&mut self, values: &[f64], low: &[f64], high: &[f64], truth: &[f64]) {
        for i in 0..values.len() {
            self.est[i].push(values[i]);
            self.low_sum[i] += low[i];
            self.high_sum[i] += high[i];
            self.covered[i] += (low[i] <= truth[i] && truth[i] <= high[i]) as usize;
        }
    }

    fn summary(&self, truth: Vec<f64>) -> Option<CurveSummary> {
        let used = self.est.first().map_or(0, |w| w.n);
        if used == 0 {
            return None;
        }
        let u = used as f64;
        let mean_estimate: Vec<f64> = self.est.iter().map(|w| w.mean).collect();
        let mc_sd: Vec<f64> = self.est.iter().map(|w| w.sd().unwrap_or(0.0)).collect();
        Some(CurveSummary {
            mc_band_low: mean_estimate.iter().zip(&mc_sd).map(|(m, s)| m - Z95 * s).collect(),
            mc_band_high: mean_estimate.iter().zip(&mc_sd).map(|(m, s)| m + Z95 * s).collect(),
            mean_band_low: self.low_sum.iter().map(|s| s / u).collect(),
            mean_band_high: self.high_sum.iter().map(|s| s / u).collect(),
            pointwise_coverage: self.covered.iter().map(|&c| c as f64 / u).collect(),
            truth,
            mean_estimate,
            mc_sd,
        })
    }
}

fn lambda_draw(sample: &Sample, label: &str, truth: f64, tuning: &TuningConstants, opts: &EstimationOptions) -> Option<LambdaDraw> {
    match lambda_hat(sample, label, tuning, opts) {
        Ok(e) => Some(LambdaDraw {
            value: e.lambda_hat,
            se: e.se,
            covered: e.lambda_hat - Z95 * e.se <= truth && truth <= e.lambda_hat + Z95 * e.se,
            q_ell: e.q_ell,
            q_r: e.q_r,
        }),
        Err(err) => {
            log::debug!("replication excluded for lambda({label}): {err}");
            None
        }
    }
}

/// Unclipped `value -/+ 1.96 se`; averaging clipped edges would bias the
/// mean band away from a true curve sitting at 0 or 1.
fn raw_band(c: &ComponentCurve) -> (Vec<f64>, Vec<f64>) {
    c.values
        .iter()
        .zip(&c.se)
        .map(|(v, s)| (v - Z95 * s, v + Z95 * s))
        .unzip()
}

/// Runs every replication of a two-label design.
pub fn run_study(design: &DesignSpec) -> Result<StudyReport> {
    design.validate()?;
    let mixture = design.mixture()?;
    let opts = EstimationOptions {
        min_subset_size: design.min_subset_size,
        ..Default::default()
    };
    let truth = design.p_t1_given_x;
    let a = LabelSet::single("0");
    let b = LabelSet::single("1");
    let grid = design.figures.then(|| mixture.figure_lattice());
    let truth_curves = match &grid {
        Some(g) => Some(true_curves(design, g)?),
        None => None,
    };

    let one_rep = |rep: usize| -> RepOutcome {
        let mut rng = rep_rng(design.master_seed, rep as u64);
        let sample = mixture.generate(design.n, &mut rng);
        let lambdas = [
            lambda_draw(&sample, "0", truth[0], &design.tuning, &opts),
            lambda_draw(&sample, "1", truth[1], &design.tuning, &opts),
        ];
        let curves = grid.as_ref().map(|g| match component_cdfs(&sample, &a, &b, &design.tuning, Some(g), &opts) {
            Ok(est) => {
                let gc = est.g.expect("both tails requested");
                let hc = est.h.expect("both tails requested");
                let (g_low, g_high) = raw_band(&gc);
                let (h_low, h_high) = raw_band(&hc);
                Some(CurveDraw {
                    g: gc.values,
                    g_low,
                    g_high,
                    h: hc.values,
                    h_low,
                    h_high,
                })
            }
            Err(err) => {
                log::debug!("replication {rep} excluded from figures: {err}");
                None
            }
        });
        RepOutcome { lambdas, curves }
    };

    let k = grid.as_ref().map_or(0, |g| g.len());
    let init = ([TargetAcc::default(), TargetAcc::default()], CurveAcc::new(k), CurveAcc::new(k), 0usize);
    let tc = truth_curves.as_ref();
    let (targets, g_acc, h_acc, fig_excluded) = fold_reps(design.reps, init, one_rep, |acc, out| {
        let [l0, l1] = out.lambdas;
        acc.0[0].push(l0);
        acc.0[1].push(l1);
        match out.curves {
            Some(Some(c)) => {
                let t = tc.expect("truth computed with the grid");
                acc.1.push(&c.g, &c.g_low, &c.g_high, &t.g);
                acc.2.push(&c.h, &c.h_low, &c.h_high, &t.h);
            }
            Some(None) => acc.3 += 1,
            None => {}
        }
    });

    let rows = vec![targets[0].row("lambda(0)", truth[0]), targets[1].row("lambda(1)", truth[1])];
    let figures = match (grid, truth_curves) {
        (Some(grid), Some(t)) => Some(FigureData {
            partition: Partition::two(a, b),
            used_reps: design.reps - fig_excluded,
            excluded_reps: fig_excluded,
            g: g_acc.summary(t.g),
            h: h_acc.summary(t.h),
            grid,
        }),
        _ => None,
    };
    Ok(StudyReport {
        design: *design,
        rows,
        figures,
    })
}

pub const CSV_HEADER: &str =
    "mu,beta,sigma,p_x1,p_t1_given_x0,p_t1_given_x1,n,C,q_ell,q_r,target,bias,sd,se_over_sd,ci95,excluded_reps";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl StudyReport {
    /// CSV rows, one per target, without the header.
    pub fn csv_rows(&self) -> Vec<String> {
        let d = &self.design;
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    d.mu,
                    d.beta,
                    d.sigma,
                    d.p_x1,
                    d.p_t1_given_x[0],
                    d.p_t1_given_x[1],
                    d.n,
                    d.tuning.c,
                    opt(r.mean_q_ell),
                    opt(r.mean_q_r),
                    r.target,
                    opt(r.bias),
                    opt(r.sd),
                    opt(r.se_over_sd),
                    opt(r.ci95),
                    r.excluded_reps
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// Human-readable table in the layout `n q_ell q_r | bias sd se/sd ci95`.
    pub fn table(&self) -> String {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut out = format!(
            "mu = {}, beta = {}, C = {}, n = {}, reps = {}\n{:<10} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>5}\n",
            self.design.mu,
            self.design.beta,
            self.design.tuning.c,
            self.design.n,
            self.design.reps,
            "target",
            "q_ell",
            "q_r",
            "bias",
            "sd",
            "se/sd",
            "ci95",
            "excl"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>5}\n",
                r.target,
                f(r.mean_q_ell),
                f(r.mean_q_r),
                f(r.bias),
                f(r.sd),
                f(r.se_over_sd),
                f(r.ci95),
                r.excluded_reps
            ));
        }
        out
    }
}

/// The published designs: `(mu, beta) = (0, 5)` with `C` in `{.5, 1, 1.5}`,
/// `(0, 2.5)` and `(1, 0)` with `C = .5`, `(.5, 0)` with `C = .75`, each at
/// `n` in `{1000, 10000}`.
pub fn published_designs(reps: usize, master_seed: u64) -> Result<Vec<DesignSpec>> {
    let blocks = [
        (0.0, 5.0, 0.5),
        (0.0, 5.0, 1.0),
        (0.0, 5.0, 1.5),
        (0.0, 2.5, 0.5),
        (1.0, 0.0, 0.5),
        (0.5, 0.0, 0.75),
    ];
    let mut out = Vec::new();
    for (mu, beta, c) in blocks {
        for n in [1_000, 10_000] {
            out.push(DesignSpec::new(mu, beta, c, n, reps, master_seed)?);
        }
    }
    Ok(out)
}

/// Runs a list of designs one after another.
pub fn run_sweep(designs: &[DesignSpec]) -> Result<Vec<StudyReport>> {
    designs.iter().map(run_study).collect()
}

/// Repeated specification tests on a label mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecTestStudy {
    pub mixture: LabelMixture,
    pub n: usize,
    pub reps: usize,
    pub tuning: TuningConstants,
    pub master_seed: u64,
    pub partition: Partition,
    pub weight: Weight,
    pub level: f64,
    pub min_subset_size: usize,
}

impl SpecTestStudy {
    pub fn new(mixture: LabelMixture, n: usize, reps: usize, master_seed: u64) -> Result<Self> {
        let partition = Partition::parse("0|1|2")?;
        let s = SpecTestStudy {
            mixture,
            n,
            reps,
            tuning: TuningConstants::default(),
            master_seed,
            partition,
            weight: Weight::Uniform,
            level: 0.05,
            min_subset_size: crate::tuning::MIN_RULE_SIZE,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        if self.n < 100 {
            return Err(Error::InvalidParameter(format!("n must be at least 100, got {}", self.n)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.partition.c.is_none() {
            return Err(Error::Partition("the specification test needs three label sets".into()));
        }
        self.tuning.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub component: Component,
    pub used_reps: usize,
    pub excluded_reps: usize,
    pub rejections: usize,
    pub rejection_rate: Option<f64>,
    pub mean_statistic: Option<f64>,
    pub sd_statistic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecTestStudyReport {
    pub n: usize,
    pub reps: usize,
    pub level: f64,
    pub components: Vec<RejectionSummary>,
}

/// Rejection rates of the `G` and `H` tests across replications.
pub fn run_spec_test_study(study: &SpecTestStudy) -> Result<SpecTestStudyReport> {
    study.validate()?;
    let opts = EstimationOptions {
        min_subset_size: study.min_subset_size,
        ..Default::default()
    };
    let crit = crate::skew_normal::std_normal_quantile(1.0 - study.level / 2.0);
    let comps = [Component::G, Component::H];
    let one_rep = |rep: usize| -> [Option<f64>; 2] {
        let mut rng = rep_rng(study.master_seed, rep as u64);
        let sample = study.mixture.generate(study.n, &mut rng);
        let w = study.weight.bind(&sample);
        comps.map(|c| match run_spec_test(&sample, &study.partition, &study.tuning, &*w, c, &opts) {
            Ok(r) => Some(r.statistic),
            Err(err) => {
                log::debug!("replication {rep} excluded for {c:?}: {err}");
                None
            }
        })
    };
    let init: [(Welford, usize, usize); 2] = [(Welford::default(), 0, 0), (Welford::default(), 0, 0)];
    let accs = fold_reps(study.reps, init, one_rep, |acc, stats| {
        for (slot, s) in acc.iter_mut().zip(stats) {
            match s {
                Some(z) => {
                    slot.0.push(z);
                    slot.1 += (z.abs() > crit) as usize;
                }
                None => slot.2 += 1,
            }
        }
    });
    let components = comps
        .iter()
        .zip(accs.iter())
        .map(|(&component, (w, rej, excl))| RejectionSummary {
            component,
            used_reps: w.n,
            excluded_reps: *excl,
            rejections: *rej,
            rejection_rate: (w.n > 0).then(|| *rej as f64 / w.n as f64),
            mean_statistic: (w.n > 0).then_some(w.mean),
            sd_statistic: w.sd(),
        })
        .collect();
    Ok(SpecTestStudyReport {
        n: study.n,
        reps: study.reps,
        level: study.level,
        components,
    })
}
