//! Correlation, significance, rater reliability and seeded splitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Iteration cap for the incomplete-beta continued fraction.
pub const BETA_CF_MAX_ITER: usize = 200;
/// Relative convergence tolerance for the continued fraction.
pub const BETA_CF_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub p_two_tailed: f64,
}

impl CorrelationResult {
    /// Reports flag results below this threshold the way Tables 3/4 do.
    pub const SIGNIFICANCE_FLAG: f64 = 0.001;

    pub fn is_flagged(&self) -> bool {
        self.p_two_tailed < Self::SIGNIFICANCE_FLAG
    }
}

/// Pearson product-moment correlation with a two-tailed Student-t p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Argument(format!("pearson needs n >= 3, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite value in correlation input".into()));
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined(
            "correlation undefined for a constant input vector".into(),
        ));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let p = correlation_p_value(r, n)?;
    Ok(CorrelationResult {
        r,
        n,
        p_two_tailed: p,
    })
}

/// Two-tailed p-value for a sample correlation `r` over `n` pairs.
pub fn correlation_p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Argument(format!("p-value needs n >= 3, got {n}")));
    }
    let df = (n - 2) as f64;
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return Ok(0.0);
    }
    let t = r * (df / one_minus).sqrt();
    student_t_two_tailed(t, df)
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> Result<f64> {
    if df.is_nan() || df <= 0.0 || t.is_nan() {
        return Err(Error::Argument(format!("invalid t={t}, df={df}")));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let x = df / (df + t * t);
    Ok(regularized_incomplete_beta(x, df / 2.0, 0.5)?.clamp(0.0, 1.0))
}

/// Cumulative distribution function of Student's t.
pub fn student_t_cdf(t: f64, df: f64) -> Result<f64> {
    let tail = student_t_two_tailed(t, df)? / 2.0;
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

/// Regularized incomplete beta I_x(a, b) by continued fraction.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(Error::Argument(format!(
            "incomplete beta out of domain: x={x}, a={a}, b={b}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_continued_fraction(x, a, b)? / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a)? / b)
    }
}

// Modified Lentz evaluation.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::Numerical(format!(
        "incomplete beta continued fraction did not converge in {BETA_CF_MAX_ITER} iterations (x={x}, a={a}, b={b})"
    )))
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Complete items-by-raters matrix of Likert ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    n_items: usize,
    k_raters: usize,
    values: Vec<f64>,
}

impl RatingsMatrix {
    pub const MIN_RATING: f64 = 1.0;
    pub const MAX_RATING: f64 = 7.0;

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_items = rows.len();
        if n_items < 2 {
            return Err(Error::Validation(format!(
                "ratings matrix needs >= 2 items, got {n_items}"
            )));
        }
        let k_raters = rows[0].len();
        if k_raters < 2 {
            return Err(Error::Validation(format!(
                "ratings matrix needs >= 2 raters, got {k_raters}"
            )));
        }
        let mut values = Vec::with_capacity(n_items * k_raters);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k_raters {
                return Err(Error::Validation(format!(
                    "item {i} has {} ratings, expected {k_raters}",
                    row.len()
                )));
            }
            for v in row {
                if !(Self::MIN_RATING..=Self::MAX_RATING).contains(v) {
                    return Err(Error::Validation(format!(
                        "rating {v} for item {i} outside [1, 7]"
                    )));
                }
                values.push(*v);
            }
        }
        Ok(Self {
            n_items,
            k_raters,
            values,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn k_raters(&self) -> usize {
        self.k_raters
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k_raters..(i + 1) * self.k_raters]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IccForm {
    /// ICC(1,1): reliability of a single rater.
    Single,
    /// ICC(1,k): reliability of the mean of k raters.
    Average,
}

/// Between- and within-item mean squares of the one-way ANOVA.
pub fn one_way_mean_squares(m: &RatingsMatrix) -> (f64, f64) {
    let n = m.n_items as f64;
    let k = m.k_raters as f64;
    let grand = m.values.iter().sum::<f64>() / (n * k);
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for i in 0..m.n_items {
        let row = m.row(i);
        let mean = row.iter().sum::<f64>() / k;
        ss_between += k * (mean - grand).powi(2);
        ss_within += row.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    (ss_between / (n - 1.0), ss_within / (n * (k - 1.0)))
}

/// One-way random-effects intraclass correlation.
///
/// When there is no between-item variance but raters disagree the
/// average-measures coefficient diverges; it is returned as negative infinity.
pub fn icc(m: &RatingsMatrix, form: IccForm) -> Result<f64> {
    let (msb, msw) = one_way_mean_squares(m);
    if msw == 0.0 {
        if msb == 0.0 {
            return Err(Error::Undefined(
                "ICC undefined: no between-item and no within-item variance".into(),
            ));
        }
        return Ok(1.0);
    }
    let k = m.k_raters as f64;
    Ok(match form {
        IccForm::Average => {
            if msb == 0.0 {
                f64::NEG_INFINITY
            } else {
                (msb - msw) / msb
            }
        }
        IccForm::Single => (msb - msw) / (msb + (k - 1.0) * msw),
    })
}

pub fn icc_average(m: &RatingsMatrix) -> Result<f64> {
    icc(m, IccForm::Average)
}

pub fn icc_single(m: &RatingsMatrix) -> Result<f64> {
    icc(m, IccForm::Single)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Default train/validation/test fractions.
pub const DEFAULT_SPLIT: (f64, f64, f64) = (0.8, 0.1, 0.1);

/// Sizes produced by [`split_dataset`] for `n` items.
pub fn split_sizes(n: usize, fractions: (f64, f64, f64)) -> Result<(usize, usize, usize)> {
    let (a, b, c) = fractions;
    if !(a > 0.0 && b > 0.0 && c > 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(Error::Argument(format!(
            "split fractions must be positive and sum to 1, got ({a}, {b}, {c})"
        )));
    }
    if n < 3 {
        return Err(Error::Argument(format!("need >= 3 items to split, got {n}")));
    }
    // The epsilon absorbs products like 0.7 * 10 landing just under 7.
    let n_train = (a * n as f64 + 1e-9).floor() as usize;
    let n_val = (b * n as f64 + 1e-9).floor() as usize;
    let n_test = n.saturating_sub(n_train + n_val);
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Argument(format!(
            "{n} items give an empty partition ({n_train}, {n_val}, {n_test})"
        )));
    }
    Ok((n_train, n_val, n_test))
}

/// Seeded shuffle, then contiguous train/validation/test slices.
pub fn split_dataset<T: Clone>(
    items: &[T],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<Split<T>> {
    let (n_train, n_val, _) = split_sizes(items.len(), fractions)?;
    let mut order: Vec<usize> = (0..items.len()).collect();
    SeededRng::new(seed).shuffle(&mut order);
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    Ok(Split {
        train: pick(&order[..n_train]),
        validation: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
    })
}
