//! Skew-normal distribution: density, CDF via Owen's T, moments and sampling.
//!
//! The density with location `mu`, scale `sigma` and shape `beta` is
//! `(2 / sigma) phi(z) Phi(beta z)` with `z = (y - mu) / sigma`; its CDF is
//! `Phi(z) - 2 T(z, beta)` where `T` is Owen's T function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF through `erfc`, accurate in both tails.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(z)`.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation followed by one Halley step against the
/// `erfc`-based CDF, giving close to full double precision.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement; use the smaller tail to keep relative accuracy.
    let e = if x < 0.0 {
        std_normal_cdf(x) - p
    } else {
        (1.0 - p) - std_normal_sf(x)
    };
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

const GL_ORDER: usize = 20;
const GL_PANELS: usize = 2;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed once by Newton
/// iteration on the Legendre polynomial.
fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

/// `(1 / 2pi) * integral_0^a exp(-h^2 (1+x^2) / 2) / (1+x^2) dx` for `0 <= a <= 1`.
fn owen_t_quadrature(h: f64, a: f64) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let half_h2 = 0.5 * h * h;
    let width = a / GL_PANELS as f64;
    let mut total = 0.0;
    for panel in 0..GL_PANELS {
        let lo = panel as f64 * width;
        let mid = lo + 0.5 * width;
        let mut s = 0.0;
        for (&t, &w) in nodes.iter().zip(weights) {
            let x = mid + 0.5 * width * t;
            let q = 1.0 + x * x;
            s += w * (-half_h2 * q).exp() / q;
        }
        total += 0.5 * width * s;
    }
    total / (2.0 * PI)
}

/// Owen's T function `T(h, a)`.
pub fn owen_t(h: f64, a: f64) -> f64 {
    if a == 0.0 || h.is_infinite() {
        return 0.0;
    }
    let h = h.abs();
    let abs_a = a.abs();
    let t = if h == 0.0 {
        abs_a.atan() / (2.0 * PI)
    } else if abs_a <= 1.0 {
        owen_t_quadrature(h, abs_a)
    } else {
        // T(h,a) + T(ah,1/a) = [Phi(h) Q(ah) + Phi(ah) Q(h)] / 2 for h >= 0
        let ah = abs_a * h;
        let reflected = if ah.is_infinite() {
            0.0
        } else {
            owen_t_quadrature(ah, 1.0 / abs_a)
        };
        0.5 * (std_normal_cdf(h) * std_normal_sf(ah) + std_normal_cdf(ah) * std_normal_sf(h)) - reflected
    };
    if a < 0.0 {
        -t
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalParams {
    pub mu: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl SkewNormalParams {
    pub fn new(mu: f64, sigma: f64, beta: f64) -> Result<Self> {
        if !(mu.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "skew-normal location and shape must be finite (mu = {mu}, beta = {beta})"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "skew-normal scale must be positive, got {sigma}"
            )));
        }
        Ok(SkewNormalParams { mu, sigma, beta })
    }

    /// `delta = beta / sqrt(1 + beta^2)`
    pub fn delta(&self) -> f64 {
        self.beta / (1.0 + self.beta * self.beta).sqrt()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.sigma;
        2.0 * std_normal_pdf(z) * std_normal_cdf(self.beta * z) / self.sigma
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y == f64::NEG_INFINITY {
            return 0.0;
        }
        if y == f64::INFINITY {
            return 1.0;
        }
        let z = (y - self.mu) / self.sigma;
        (std_normal_cdf(z) - 2.0 * owen_t(z, self.beta)).clamp(0.0, 1.0)
    }

    /// `(mean, variance)`
    pub fn moments(&self) -> (f64, f64) {
        let d = self.delta();
        let mean = self.mu + self.sigma * d * (2.0 / PI).sqrt();
        let var = self.sigma * self.sigma * (1.0 - 2.0 * d * d / PI);
        (mean, var)
    }

    /// One draw via `mu + sigma (delta |U0| + sqrt(1 - delta^2) U1)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.delta();
        let u0: f64 = StandardNormal.sample(rng);
        let u1: f64 = StandardNormal.sample(rng);
        self.mu + self.sigma * (d * u0.abs() + (1.0 - d * d).sqrt() * u1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    /// Quantile by bracketing and bisection on [`cdf`](Self::cdf).
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let (mut lo, mut hi) = (self.mu - self.sigma, self.mu + self.sigma);
        while self.cdf(lo) > p {
            lo -= 2.0 * (hi - lo);
        }
        while self.cdf(hi) < p {
            hi += 2.0 * (hi - lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}
