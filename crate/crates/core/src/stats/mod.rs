//! Descriptive statistics used by the robustness tables and figures:
//! Welch two-sample t-tests, LOWESS smoothing, centered moving averages.

pub mod special;

use serde::Serialize;
use thiserror::Error;

pub use special::{student_t_cdf, student_t_two_sided_p};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 observations per sample (got {0} and {1})")]
    SampleTooSmall(usize, usize),
    #[error("both samples have zero variance; t statistic undefined")]
    BothVariancesZero,
    #[error("need at least 3 points to smooth (got {0})")]
    TooFewPoints(usize),
    #[error("window {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("moving-average window must be a positive even integer (got {0})")]
    WindowNotEven(usize),
    #[error("x values must be sorted ascending for smoothing")]
    XNotSorted,
    #[error("x and y lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("bandwidth must lie in (0, 1], got {0}")]
    BadBandwidth(f64),
}

/// Welch unequal-variance t-test summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub mean_a: f64,
    pub mean_b: f64,
    pub difference: f64,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
}

fn mean_and_sample_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Two-sample t-test without assuming equal variances, with the
/// Welch-Satterthwaite degrees-of-freedom approximation and a two-sided p.
pub fn welch_ttest(sample_a: &[f64], sample_b: &[f64]) -> Result<TTestResult, StatsError> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(StatsError::SampleTooSmall(sample_a.len(), sample_b.len()));
    }
    let (mean_a, var_a) = mean_and_sample_var(sample_a);
    let (mean_b, var_b) = mean_and_sample_var(sample_b);
    if var_a == 0.0 && var_b == 0.0 {
        return Err(StatsError::BothVariancesZero);
    }
    let (na, nb) = (sample_a.len() as f64, sample_b.len() as f64);
    let (qa, qb) = (var_a / na, var_b / nb);
    let difference = mean_a - mean_b;
    let se = (qa + qb).sqrt();
    let t_statistic = difference / se;
    let degrees_of_freedom =
        (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    let p_value = special::student_t_two_sided_p(t_statistic, degrees_of_freedom);
    Ok(TTestResult { mean_a, mean_b, difference, t_statistic, degrees_of_freedom, p_value })
}

/// Default LOWESS bandwidth used by the plotting pipeline.
pub const DEFAULT_LOWESS_BANDWIDTH: f64 = 0.4;

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let w = 1.0 - u * u * u;
        w * w * w
    }
}

/// Locally weighted linear smoother (tricube kernel, zero robustness passes).
///
/// At each point the nearest `ceil(bandwidth * n)` neighbours by |x distance|
/// are selected (ties broken toward lower index) and a weighted straight line
/// is fitted; the smoothed value is that line evaluated at the point. Falls
/// back to the weighted mean when the local design is degenerate, e.g. all
/// selected x equal.
pub fn lowess(x: &[f64], y: &[f64], bandwidth: f64) -> Result<Vec<f64>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewPoints(n));
    }
    if !(bandwidth > 0.0 && bandwidth <= 1.0) {
        return Err(StatsError::BadBandwidth(bandwidth));
    }
    if x.windows(2).any(|w| w[0] > w[1]) {
        return Err(StatsError::XNotSorted);
    }

    let q = ((bandwidth * n as f64).ceil() as usize).clamp(2, n);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend(0..n);
        let xi = x[i];
        order.sort_by(|&a, &b| {
            let da = (x[a] - xi).abs();
            let db = (x[b] - xi).abs();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        });
        let selected = &order[..q];
        let dmax = (x[selected[q - 1]] - xi).abs();

        // Weighted sums for the local straight line, centered at xi.
        let (mut sw, mut swx, mut swxx, mut swy, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &j in selected {
            let d = x[j] - xi;
            let w = if dmax == 0.0 { 1.0 } else { tricube((d / dmax).abs()) };
            sw += w;
            swx += w * d;
            swxx += w * d * d;
            swy += w * y[j];
            swxy += w * d * y[j];
        }
        let det = sw * swxx - swx * swx;
        let scale = sw * swxx;
        let fitted = if det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            swy / sw
        } else {
            // Intercept of the fit in centered coordinates = value at xi.
            (swxx * swy - swx * swxy) / det
        };
        out.push(fitted);
    }
    Ok(out)
}

/// Centered moving average with an even window: the two boundary terms get
/// half weight so the window stays centered on each observation. The first
/// and last `window/2` positions have no value.
pub fn centered_moving_average(
    series: &[f64],
    window: usize,
) -> Result<Vec<Option<f64>>, StatsError> {
    if window == 0 || !window.is_multiple_of(2) {
        return Err(StatsError::WindowNotEven(window));
    }
    if window > series.len() {
        return Err(StatsError::WindowTooLarge { window, len: series.len() });
    }
    let half = window / 2;
    let n = series.len();
    let mut out = vec![None; n];
    for t in half..n - half {
        let mut sum = 0.5 * (series[t - half] + series[t + half]);
        for v in &series[t - half + 1..t + half] {
            sum += v;
        }
        out[t] = Some(sum / window as f64);
    }
    Ok(out)
}

/// Conventional significance stars for a two-sided p-value:
/// `*` below 10%, `**` below 5%, `***` below 1%.
pub fn significance_stars(p_value: f64) -> &'static str {
    if p_value < 0.01 {
        "***"
    } else if p_value < 0.05 {
        "**"
    } else if p_value < 0.1 {
        "*"
    } else {
        ""
    }
}
