//! Per-step price distributions: the facilitator-to-device information
//! channel. Each step is an independent distribution, stored in discretized
//! form so that conditional expectations are exact sums over support points.

use alloc::vec::Vec;
use rand_core::RngCore;

/// Number of equal-probability quantile points used to discretize a
/// log-normal step distribution.
pub const DISCRETIZATION_POINTS: usize = 101;

/// Probability mass bookkeeping tolerance.
const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForecastError {
    #[error("step {t} is outside the forecast window [{start}, {end})")]
    Horizon { t: usize, start: usize, end: usize },
    #[error("invalid distribution: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    LogNormal,
    PointMass,
    Empirical,
}

/// Discretized distribution of the price at one step.
///
/// `support` is sorted ascending; `probs` sum to one. Prefix sums over the
/// support make `P(X <= x)` and partial expectations O(log n).
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    pub mean: f64,
    pub sd: f64,
    pub family: Family,
    support: Vec<f64>,
    probs: Vec<f64>,
    cum_prob: Vec<f64>,
    cum_weighted: Vec<f64>,
}

impl StepDistribution {
    pub fn point_mass(x: f64) -> Self {
        let mut d = Self {
            mean: x,
            sd: 0.0,
            family: Family::PointMass,
            support: alloc::vec![x],
            probs: alloc::vec![1.0],
            cum_prob: Vec::new(),
            cum_weighted: Vec::new(),
        };
        d.build_prefix();
        d
    }

    /// Log-normal with arithmetic mean `mean` and arithmetic standard
    /// deviation `sd`, discretized to equal-probability quantile midpoints.
    /// `sd <= 0` collapses to a point mass, as does `mean == 0` (log-normal
    /// is undefined there; matches zero-price curtailment semantics).
    pub fn log_normal(mean: f64, sd: f64) -> Result<Self, ForecastError> {
        if !(mean >= 0.0) || !mean.is_finite() {
            return Err(ForecastError::Invalid("log-normal mean must be finite and >= 0"));
        }
        if sd <= 0.0 || mean == 0.0 {
            return Ok(Self::point_mass(mean));
        }
        let (mu, sigma) = log_normal_params(mean, sd);
        let n = DISCRETIZATION_POINTS;
        let mut support = Vec::with_capacity(n);
        for j in 0..n {
            let p = (j as f64 + 0.5) / n as f64;
            support.push(libm::exp(mu + sigma * normal_quantile(p)));
        }
        let mut d = Self {
            mean,
            sd,
            family: Family::LogNormal,
            support,
            probs: alloc::vec![1.0 / n as f64; n],
            cum_prob: Vec::new(),
            cum_weighted: Vec::new(),
        };
        d.build_prefix();
        Ok(d)
    }

    /// Arbitrary discrete distribution from `(value, probability)` pairs.
    pub fn empirical(mut points: Vec<(f64, f64)>, mean: f64, sd: f64) -> Result<Self, ForecastError> {
        if points.is_empty() {
            return Err(ForecastError::Invalid("empirical distribution needs support points"));
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if points.iter().any(|(v, p)| !(*v >= 0.0) || !(*p >= 0.0)) {
            return Err(ForecastError::Invalid("support values and probabilities must be >= 0"));
        }
        let total: f64 = points.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(ForecastError::Invalid("probabilities must sum to 1"));
        }
        let mut d = Self {
            mean,
            sd,
            family: Family::Empirical,
            support: points.iter().map(|(v, _)| *v).collect(),
            probs: points.iter().map(|(_, p)| *p).collect(),
            cum_prob: Vec::new(),
            cum_weighted: Vec::new(),
        };
        d.build_prefix();
        Ok(d)
    }

    fn build_prefix(&mut self) {
        let mut cp = Vec::with_capacity(self.support.len());
        let mut cw = Vec::with_capacity(self.support.len());
        let (mut p_acc, mut w_acc) = (0.0, 0.0);
        for (v, p) in self.support.iter().zip(&self.probs) {
            p_acc += p;
            w_acc += p * v;
            cp.push(p_acc);
            cw.push(w_acc);
        }
        self.cum_prob = cp;
        self.cum_weighted = cw;
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn max_support(&self) -> f64 {
        *self.support.last().unwrap()
    }

    /// Supremum of the underlying (continuous) distribution's support.
    /// A log-normal has an unbounded upper tail even though its
    /// discretization is finite; point-mass and empirical families are
    /// genuinely bounded.
    pub fn upper_bound(&self) -> f64 {
        match self.family {
            Family::LogNormal => f64::INFINITY,
            Family::PointMass | Family::Empirical => self.max_support(),
        }
    }

    /// True for prices strictly above the distribution's whole support:
    /// `P(X >= x) = 0` under the underlying distribution, not its
    /// discretization. The boundary case `x == upper_bound` is excluded on
    /// purpose — there the realized price can still tie `x`, and rationing
    /// at that tie must stay with the market.
    pub fn always_below(&self, x: f64) -> bool {
        self.upper_bound() < x
    }

    /// Mean of the discretized support (may differ slightly from the nominal
    /// `mean` for log-normal families).
    pub fn discretized_mean(&self) -> f64 {
        *self.cum_weighted.last().unwrap()
    }

    /// Index of the last support point `<= x`, if any.
    fn last_le(&self, x: f64) -> Option<usize> {
        if x.is_infinite() && x > 0.0 {
            return Some(self.support.len() - 1);
        }
        match self.support.partition_point(|v| *v <= x) {
            0 => None,
            k => Some(k - 1),
        }
    }

    pub fn prob_le(&self, x: f64) -> f64 {
        match self.last_le(x) {
            None => 0.0,
            Some(i) => self.cum_prob[i],
        }
    }

    pub fn prob_gt(&self, x: f64) -> f64 {
        (1.0 - self.prob_le(x)).max(0.0)
    }

    /// Partial expectation `E[X; X <= x]` (unconditional, i.e. already
    /// weighted by `P(X <= x)`).
    pub fn partial_expectation_le(&self, x: f64) -> f64 {
        match self.last_le(x) {
            None => 0.0,
            Some(i) => self.cum_weighted[i],
        }
    }

    /// Inverse-CDF sample from the discretized support.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = uniform_open01(rng);
        let i = self.cum_prob.partition_point(|c| *c < u);
        self.support[i.min(self.support.len() - 1)]
    }
}

/// Per-step independent price distributions covering steps
/// `start .. start + steps.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceForecast {
    pub start: usize,
    pub steps: Vec<StepDistribution>,
}

impl PriceForecast {
    pub fn new(start: usize, steps: Vec<StepDistribution>) -> Self {
        Self { start, steps }
    }

    pub fn end(&self) -> usize {
        self.start + self.steps.len()
    }

    pub fn step(&self, t: usize) -> Result<&StepDistribution, ForecastError> {
        if t < self.start || t >= self.end() {
            return Err(ForecastError::Horizon { t, start: self.start, end: self.end() });
        }
        Ok(&self.steps[t - self.start])
    }

    pub fn mean(&self, t: usize) -> Result<f64, ForecastError> {
        Ok(self.step(t)?.mean)
    }

    /// Point-mass counterpart carrying only the expected prices (the
    /// information a point-forecast agent receives).
    pub fn to_point_mass(&self) -> Self {
        Self {
            start: self.start,
            steps: self.steps.iter().map(|d| StepDistribution::point_mass(d.mean)).collect(),
        }
    }
}

/// Log-space parameters from arithmetic mean `m > 0` and SD `s > 0`:
/// `sigma^2 = ln(1 + s^2/m^2)`, `mu = ln m - sigma^2/2`.
pub fn log_normal_params(m: f64, s: f64) -> (f64, f64) {
    let sigma2 = libm::log(1.0 + (s * s) / (m * m));
    (libm::log(m) - 0.5 * sigma2, libm::sqrt(sigma2))
}

/// One continuous draw from the log-normal with arithmetic mean `m` and
/// arithmetic SD `s` (point mass cases return `m`).
pub fn sample_log_normal<R: RngCore + ?Sized>(m: f64, s: f64, rng: &mut R) -> f64 {
    if s <= 0.0 || m == 0.0 {
        return m;
    }
    let (mu, sigma) = log_normal_params(m, s);
    libm::exp(mu + sigma * normal_quantile(uniform_open01(rng)))
}

/// Uniform draw in the open interval (0, 1).
pub fn uniform_open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard normal quantile function.
///
/// Acklam's rational approximation refined with one Halley step using
/// `erfc`, accurate to full double precision over (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
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
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement against the exact CDF.
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}
