//! Membership functions and rule firing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FelmError, Result};
use crate::rng;

/// Interval membership degree `[lower, upper]`, also used for rule firing strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiringInterval {
    pub lower: f64,
    pub upper: f64,
}

impl FiringInterval {
    /// Builds an interval, rejecting anything outside `0 <= lower <= upper <= 1`.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(FelmError::NonFinite("firing interval"));
        }
        if !(0.0..=1.0).contains(&lower) || !(0.0..=1.0).contains(&upper) || lower > upper {
            return Err(FelmError::InvalidConfig(format!(
                "firing interval [{lower}, {upper}] violates 0 <= lower <= upper <= 1"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub const fn crisp(value: f64) -> Self {
        Self { lower: value, upper: value }
    }

    /// `upper - lower`, the per-rule uncertainty used by the reducers.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Gaussian primary membership with a fixed mean and an uncertain width
/// `[sigma_lo, sigma_hi]`. The narrow width yields the lower membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct It2Gaussian {
    mean: f64,
    sigma_lo: f64,
    sigma_hi: f64,
}

impl It2Gaussian {
    /// Widths supplied out of order are swapped.
    pub fn new(mean: f64, sigma_a: f64, sigma_b: f64) -> Result<Self> {
        if !mean.is_finite() || !sigma_a.is_finite() || !sigma_b.is_finite() {
            return Err(FelmError::NonFinite("gaussian membership parameters"));
        }
        let (sigma_lo, sigma_hi) = if sigma_a <= sigma_b { (sigma_a, sigma_b) } else { (sigma_b, sigma_a) };
        if sigma_lo <= 0.0 {
            return Err(FelmError::InvalidConfig(format!("gaussian width must be positive, got {sigma_lo}")));
        }
        Ok(Self { mean, sigma_lo, sigma_hi })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sigma_lo(&self) -> f64 {
        self.sigma_lo
    }

    pub fn sigma_hi(&self) -> f64 {
        self.sigma_hi
    }

    /// Same mean, both widths set to `sigma`.
    pub fn collapsed(&self, sigma: f64) -> Result<Self> {
        Self::new(self.mean, sigma, sigma)
    }

    pub fn eval(&self, x: f64) -> Result<FiringInterval> {
        if !x.is_finite() {
            return Err(FelmError::NonFinite("membership input"));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> FiringInterval {
        let d = x - self.mean;
        let lo = d / self.sigma_lo;
        let hi = d / self.sigma_hi;
        FiringInterval {
            lower: (-0.5 * lo * lo).exp().max(0.0),
            upper: (-0.5 * hi * hi).exp().max(0.0),
        }
    }
}

/// Free-function form of [`It2Gaussian::eval`].
pub fn eval_it2_gaussian(mf: &It2Gaussian, x: f64) -> Result<FiringInterval> {
    mf.eval(x)
}

/// Triangle with feet `a`, `c` and peak `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangular {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Triangular {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(FelmError::NonFinite("triangular membership parameters"));
        }
        if !(a <= b && b <= c) {
            return Err(FelmError::InvalidConfig(format!("triangle needs a <= b <= c, got ({a}, {b}, {c})")));
        }
        Ok(Self { a, b, c })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.c {
            0.0
        } else if x == self.b {
            1.0
        } else if x < self.b {
            ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
        } else {
            ((self.c - x) / (self.c - self.b)).clamp(0.0, 1.0)
        }
    }
}

pub fn eval_triangular(mf: &Triangular, x: f64) -> f64 {
    mf.eval(x)
}

/// Interval triangle: the upper membership has feet pushed out by `spread`,
/// the lower one pulled in by the same amount. Both peak at `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct It2Triangular {
    pub upper: Triangular,
    pub lower: Triangular,
}

impl It2Triangular {
    pub fn new(a: f64, b: f64, c: f64, spread: f64) -> Result<Self> {
        if !(spread >= 0.0) || !spread.is_finite() {
            return Err(FelmError::InvalidConfig(format!("FOU spread must be finite and >= 0, got {spread}")));
        }
        let lower = Triangular::new(a + spread, b, c - spread)?;
        let upper = Triangular::new(a - spread, b, c + spread)?;
        Ok(Self { upper, lower })
    }

    pub fn eval(&self, x: f64) -> FiringInterval {
        let upper = self.upper.eval(x);
        let lower = self.lower.eval(x).min(upper);
        FiringInterval { lower, upper }
    }
}

/// Product t-norm firing of one rule: `prod_k mu_k(x_k)` on both bounds.
pub fn firing_interval(row: &[It2Gaussian], x: &[f64]) -> Result<FiringInterval> {
    if row.len() != x.len() {
        return Err(FelmError::DimensionMismatch { expected: row.len(), got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(FelmError::NonFinite("rule input"));
    }
    Ok(firing_unchecked(row, x))
}

#[inline]
pub(crate) fn firing_unchecked(row: &[It2Gaussian], x: &[f64]) -> FiringInterval {
    product_meet(row.iter().zip(x).map(|(mf, &xk)| mf.eval_unchecked(xk)))
}

/// Algebraic-product meet of per-input membership intervals.
pub fn product_meet(memberships: impl IntoIterator<Item = FiringInterval>) -> FiringInterval {
    memberships.into_iter().fold(FiringInterval::crisp(1.0), |acc, mu| FiringInterval {
        lower: acc.lower * mu.lower,
        upper: acc.upper * mu.upper,
    })
}

/// M rules by N inputs of interval Gaussian antecedents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntecedentGrid {
    rows: Vec<Vec<It2Gaussian>>,
}

impl AntecedentGrid {
    pub fn new(rows: Vec<Vec<It2Gaussian>>) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 {
            return Err(FelmError::InvalidConfig("antecedent grid needs at least one rule and one input".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(FelmError::DimensionMismatch { expected: n, got: bad.len() });
        }
        Ok(Self { rows })
    }

    pub fn rules(&self) -> usize {
        self.rows.len()
    }

    pub fn inputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<It2Gaussian>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[It2Gaussian] {
        &self.rows[j]
    }

    /// Firing interval of every rule for input `x`.
    pub fn firings(&self, x: &[f64]) -> Result<Vec<FiringInterval>> {
        if x.len() != self.inputs() {
            return Err(FelmError::DimensionMismatch { expected: self.inputs(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FelmError::NonFinite("rule input"));
        }
        Ok(self.rows.iter().map(|row| firing_unchecked(row, x)).collect())
    }

    /// Type-1 version of the grid: each MF keeps its mean and uses the midpoint width.
    pub fn collapsed(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|mf| It2Gaussian { sigma_lo: 0.5 * (mf.sigma_lo + mf.sigma_hi), sigma_hi: 0.5 * (mf.sigma_lo + mf.sigma_hi), ..*mf })
                    .collect()
            })
            .collect();
        Self { rows }
    }
}

/// Sampling ranges for random antecedent initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    /// Base width as a fraction of the feature range.
    pub width_factor: (f64, f64),
    /// Relative FOU half-spread `delta`: `sigma = s * (1 -+ delta)`.
    pub fou_spread: (f64, f64),
}

impl Default for InitConfig {
    fn default() -> Self {
        Self { width_factor: (0.1, 1.0), fou_spread: (0.1, 0.3) }
    }
}

impl InitConfig {
    /// Same width distribution with a zero FOU, i.e. type-1 antecedents.
    pub fn type1(&self) -> Self {
        Self { fou_spread: (0.0, 0.0), ..*self }
    }

    fn validate(&self) -> Result<()> {
        let (w0, w1) = self.width_factor;
        let (d0, d1) = self.fou_spread;
        if !(w0 > 0.0 && w0 <= w1 && w1.is_finite()) {
            return Err(FelmError::InvalidConfig(format!("width factor range ({w0}, {w1}) must satisfy 0 < lo <= hi")));
        }
        if !(d0 >= 0.0 && d0 <= d1 && d1 < 1.0) {
            return Err(FelmError::InvalidConfig(format!("FOU spread range ({d0}, {d1}) must satisfy 0 <= lo <= hi < 1")));
        }
        Ok(())
    }
}

fn uniform(rng: &mut rng::StreamRng, (lo, hi): (f64, f64)) -> f64 {
    // the draw is consumed even for a point range so streams stay aligned
    let u: f64 = rng.gen();
    lo + (hi - lo) * u
}

/// Random antecedents: means uniform over each feature range, base width
/// uniform in `width_factor * range`, FOU spread uniform in `fou_spread`.
/// Pure function of its arguments.
pub fn random_init_antecedents(
    rules: usize,
    inputs: usize,
    feature_ranges: &[(f64, f64)],
    seed: u64,
    cfg: &InitConfig,
) -> Result<AntecedentGrid> {
    if rules == 0 || inputs == 0 {
        return Err(FelmError::InvalidConfig("rule and input counts must be >= 1".into()));
    }
    if feature_ranges.len() != inputs {
        return Err(FelmError::DimensionMismatch { expected: inputs, got: feature_ranges.len() });
    }
    for (index, &(min, max)) in feature_ranges.iter().enumerate() {
        if !(min.is_finite() && max.is_finite()) {
            return Err(FelmError::NonFinite("feature range"));
        }
        if min >= max {
            return Err(FelmError::DegenerateRange { index, min, max });
        }
    }
    cfg.validate()?;

    let mut rng = rng::stream(seed, rng::streams::INIT);
    let mut rows = Vec::with_capacity(rules);
    for _ in 0..rules {
        let mut row = Vec::with_capacity(inputs);
        for &(min, max) in feature_ranges {
            let span = max - min;
            let mean = uniform(&mut rng, (min, max));
            let base = uniform(&mut rng, cfg.width_factor) * span;
            let delta = uniform(&mut rng, cfg.fou_spread);
            row.push(It2Gaussian::new(mean, base * (1.0 - delta), base * (1.0 + delta))?);
        }
        rows.push(row);
    }
    AntecedentGrid::new(rows)
}
