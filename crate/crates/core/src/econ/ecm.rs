//! Two-step error-correction model of monthly crossings on rescue
//! probability, plus the downstream uses of a fitted model: equilibrium
//! comparisons, expanding-window stability scans, and one-step-ahead
//! backtests.
//!
//! Stage 1 regresses the dependent variable on the rescue probability with a
//! constant (the long-run equilibrium). Stage 2 regresses the month-on-month
//! change on a constant, the lagged stage-1 residual, and optionally the
//! lagged rescue-probability change and the lagged dependent change.

use serde::Serialize;

use super::ols::{ols, OlsFit};
use super::EconError;
use crate::series::DerivedPoint;
use crate::time::{Month, MonthRange};

/// Which transform of monthly crossings acts as the dependent variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DepVariable {
    /// Crossings in thousands of persons.
    Level,
    /// ln(crossings in thousands).
    Log,
    /// ln(N / (M − N)) against the route's potential-population cap.
    LogOdds,
}

/// Specification switches for the second stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EcmSpec {
    pub dep: DepVariable,
    /// Include the lagged change in rescue probability.
    pub include_short_run: bool,
    /// Include the lagged change of the dependent variable.
    pub include_lagged_dep: bool,
}

impl EcmSpec {
    /// The headline specification: level dependent variable with the
    /// short-run rescue term, no lagged dependent change.
    pub fn headline() -> Self {
        EcmSpec { dep: DepVariable::Level, include_short_run: true, include_lagged_dep: false }
    }

    /// Observations lost at stage 2 beyond differencing: one extra month
    /// whenever any lagged-difference regressor is present.
    fn lag_loss(&self) -> usize {
        usize::from(self.include_short_run || self.include_lagged_dep)
    }

    /// Human-readable column names for the stage-2 regression, in order.
    pub fn stage2_names(&self) -> Vec<&'static str> {
        let mut names = vec!["const", "e_lag"];
        if self.include_short_run {
            names.push("d_rescue_lag");
        }
        if self.include_lagged_dep {
            names.push("d_dep_lag");
        }
        names
    }
}

/// A fitted two-step model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcmFit {
    pub stage1: OlsFit,
    pub stage2: OlsFit,
    /// Stage-2 constant.
    pub alpha0: f64,
    /// Adjustment speed: stage-2 coefficient on the lagged residual.
    pub alpha1: f64,
    /// Coefficient on the lagged rescue-probability change, when included.
    pub alpha2: Option<f64>,
    /// Coefficient on the lagged dependent change, when included.
    pub lagged_dep_coef: Option<f64>,
    pub dep_variable: DepVariable,
    pub spec: EcmSpec,
}

impl EcmFit {
    /// Long-run intercept from stage 1.
    pub fn beta0(&self) -> f64 {
        self.stage1.coefficients[0]
    }

    /// Long-run slope on the rescue probability from stage 1.
    pub fn beta1(&self) -> f64 {
        self.stage1.coefficients[1]
    }

    pub fn alpha1_se(&self) -> f64 {
        self.stage2.standard_errors[1]
    }

    pub fn alpha2_se(&self) -> Option<f64> {
        self.spec.include_short_run.then(|| self.stage2.standard_errors[2])
    }
}

/// Core estimator on pre-aligned columns: `dep` and `rescue` must cover the
/// same consecutive months in order.
pub fn fit_ecm_columns(dep: &[f64], rescue: &[f64], spec: EcmSpec) -> Result<EcmFit, EconError> {
    if dep.len() != rescue.len() {
        return Err(EconError::LengthMismatch(dep.len(), rescue.len()));
    }
    let n = dep.len();
    if n < 12 {
        return Err(EconError::InsufficientOverlap { months: n, needed: 12 });
    }

    let stage1 = ols(dep, &[rescue], true)?;
    let resid_var =
        stage1.residuals.iter().map(|e| e * e).sum::<f64>() / stage1.residuals.len() as f64;
    if resid_var < 1e-12 {
        return Err(EconError::DegenerateResiduals);
    }

    let start = 1 + spec.lag_loss();
    let rows = n - start;
    let mut d_dep = Vec::with_capacity(rows);
    let mut e_lag = Vec::with_capacity(rows);
    let mut d_rescue_lag = Vec::with_capacity(rows);
    let mut d_dep_lag = Vec::with_capacity(rows);
    for t in start..n {
        d_dep.push(dep[t] - dep[t - 1]);
        e_lag.push(stage1.residuals[t - 1]);
        if spec.include_short_run {
            d_rescue_lag.push(rescue[t - 1] - rescue[t - 2]);
        }
        if spec.include_lagged_dep {
            d_dep_lag.push(dep[t - 1] - dep[t - 2]);
        }
    }

    let mut columns: Vec<&[f64]> = vec![&e_lag];
    if spec.include_short_run {
        columns.push(&d_rescue_lag);
    }
    if spec.include_lagged_dep {
        columns.push(&d_dep_lag);
    }
    let stage2 = ols(&d_dep, &columns, true)?;

    let alpha2 = spec.include_short_run.then(|| stage2.coefficients[2]);
    let lagged_dep_coef = spec
        .include_lagged_dep
        .then(|| stage2.coefficients[2 + usize::from(spec.include_short_run)]);
    Ok(EcmFit {
        alpha0: stage2.coefficients[0],
        alpha1: stage2.coefficients[1],
        alpha2,
        lagged_dep_coef,
        dep_variable: spec.dep,
        spec,
        stage1,
        stage2,
    })
}

/// Dependent-route points aligned with the rescue route by month.
struct Aligned<'a> {
    months: Vec<Month>,
    dep: Vec<f64>,
    rescue: Vec<f64>,
    points: Vec<&'a DerivedPoint>,
}

fn dep_value(point: &DerivedPoint, dep: DepVariable) -> f64 {
    match dep {
        DepVariable::Level => point.n_cross_thousands,
        DepVariable::Log => point.log_n_cross,
        DepVariable::LogOdds => point.log_odds,
    }
}

/// Converts a dependent-variable value back to persons.
fn persons_from_dep(value: f64, dep: DepVariable, m: f64) -> f64 {
    match dep {
        DepVariable::Level => value * 1000.0,
        DepVariable::Log => value.exp() * 1000.0,
        DepVariable::LogOdds => m / (1.0 + (-value).exp()),
    }
}

fn align<'a>(
    series: &'a [DerivedPoint],
    rescue: &[DerivedPoint],
    dep: DepVariable,
) -> Result<Aligned<'a>, EconError> {
    let rescue_by_month: std::collections::BTreeMap<Month, f64> =
        rescue.iter().map(|p| (p.month, p.p_rescue)).collect();
    let mut aligned = Aligned { months: Vec::new(), dep: Vec::new(), rescue: Vec::new(), points: Vec::new() };
    for point in series {
        if let Some(&p) = rescue_by_month.get(&point.month) {
            aligned.months.push(point.month);
            aligned.dep.push(dep_value(point, dep));
            aligned.rescue.push(p);
            aligned.points.push(point);
        }
    }
    for pair in aligned.months.windows(2) {
        if pair[1].index() != pair[0].index() + 1 {
            return Err(EconError::NonContiguousMonths(pair[0]));
        }
    }
    Ok(aligned)
}

/// Fits the two-step model for a dependent route against the rescue
/// probability of the (possibly identical) rescue route, aligning by month.
pub fn fit_ecm(
    series: &[DerivedPoint],
    rescue: &[DerivedPoint],
    spec: EcmSpec,
) -> Result<EcmFit, EconError> {
    let aligned = align(series, rescue, spec.dep)?;
    if aligned.months.len() < 12 {
        return Err(EconError::InsufficientOverlap { months: aligned.months.len(), needed: 12 });
    }
    fit_ecm_columns(&aligned.dep, &aligned.rescue, spec)
}

/// Long-run difference in monthly crossings (persons) between two rescue
/// probabilities, read off the stage-1 equilibrium of a Level fit.
pub fn equilibrium_delta(fit: &EcmFit, p_from: f64, p_to: f64) -> Result<f64, EconError> {
    if fit.dep_variable != DepVariable::Level {
        return Err(EconError::WrongDepVariable(fit.dep_variable));
    }
    for p in [p_from, p_to] {
        if !(0.0..=1.0).contains(&p) {
            return Err(EconError::ProbabilityOutOfRange(p));
        }
    }
    Ok(fit.beta1() * (p_from - p_to) * 1000.0)
}

/// One expanding-window re-estimate, or the reason it was skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowEstimate {
    pub window_end: Month,
    pub window_len: usize,
    pub outcome: WindowOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WindowOutcome {
    Fit { alpha1: f64, se: f64 },
    Skipped { reason: String },
}

/// Re-estimates the adjustment speed on every expanding window from
/// `start_len` months (floored at 5) up to the full aligned sample.
/// Windows that cannot be fitted produce `Skipped` entries rather than
/// aborting the scan.
pub fn expanding_window(
    series: &[DerivedPoint],
    rescue: &[DerivedPoint],
    spec: EcmSpec,
    start_len: usize,
) -> Result<Vec<WindowEstimate>, EconError> {
    let aligned = align(series, rescue, spec.dep)?;
    let n = aligned.months.len();
    let start_len = start_len.max(5);
    let mut out = Vec::new();
    for len in start_len..=n {
        let outcome = match fit_ecm_columns(&aligned.dep[..len], &aligned.rescue[..len], spec) {
            Ok(fit) => WindowOutcome::Fit { alpha1: fit.alpha1, se: fit.alpha1_se() },
            Err(e) => WindowOutcome::Skipped { reason: e.to_string() },
        };
        out.push(WindowEstimate { window_end: aligned.months[len - 1], window_len: len, outcome });
    }
    Ok(out)
}

/// One backtested month.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BacktestPoint {
    pub month: Month,
    pub observed_persons: f64,
    pub predicted_persons: f64,
    pub naive_persons: f64,
    pub in_test_window: bool,
}

/// Train/test evaluation of one-step-ahead predictions. The model predicts
/// each month's change from the trained stage-2 equation evaluated at
/// observed regressors (true lagged values, not recursive forecasts); the
/// naive benchmark carries last month's level forward.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestReport {
    pub train_window: MonthRange,
    pub test_window: MonthRange,
    /// Mean absolute prediction error over test months, persons.
    pub model_mae_persons: f64,
    /// Mean absolute naive error over test months, persons.
    pub naive_mae_persons: f64,
    /// The same two quantities over the (predictable) training months.
    pub train_model_mae_persons: f64,
    pub train_naive_mae_persons: f64,
    pub predictions: Vec<BacktestPoint>,
    pub fit: EcmFit,
}

/// Splits the aligned sample after `split`, fits on the training side, and
/// evaluates one-step-ahead predictions on both sides. Each side must be
/// long enough to satisfy the estimator's 12-month floor.
pub fn backtest(
    series: &[DerivedPoint],
    rescue: &[DerivedPoint],
    spec: EcmSpec,
    split: Month,
) -> Result<BacktestReport, EconError> {
    let aligned = align(series, rescue, spec.dep)?;
    let n = aligned.months.len();
    let n_train = aligned.months.iter().filter(|m| **m <= split).count();
    let n_test = n - n_train;
    if n_train == 0 || n_test == 0 {
        return Err(EconError::EmptySplit);
    }
    if n_test < 12 {
        return Err(EconError::InsufficientOverlap { months: n_test, needed: 12 });
    }
    let fit = fit_ecm_columns(&aligned.dep[..n_train], &aligned.rescue[..n_train], spec)?;

    let start = 1 + spec.lag_loss();
    let mut predictions = Vec::with_capacity(n - start);
    let (mut test_model, mut test_naive, mut test_n) = (0.0, 0.0, 0usize);
    let (mut train_model, mut train_naive, mut train_n) = (0.0, 0.0, 0usize);
    for t in start..n {
        let e_lag = aligned.dep[t - 1] - fit.beta0() - fit.beta1() * aligned.rescue[t - 1];
        let mut d_hat = fit.alpha0 + fit.alpha1 * e_lag;
        if let Some(a2) = fit.alpha2 {
            d_hat += a2 * (aligned.rescue[t - 1] - aligned.rescue[t - 2]);
        }
        if let Some(g) = fit.lagged_dep_coef {
            d_hat += g * (aligned.dep[t - 1] - aligned.dep[t - 2]);
        }
        let m = aligned.points[t].m;
        let predicted_persons = persons_from_dep(aligned.dep[t - 1] + d_hat, spec.dep, m);
        let observed_persons = aligned.points[t].n_cross;
        let naive_persons = aligned.points[t - 1].n_cross;
        let in_test_window = aligned.months[t] > split;
        if in_test_window {
            test_model += (predicted_persons - observed_persons).abs();
            test_naive += (naive_persons - observed_persons).abs();
            test_n += 1;
        } else {
            train_model += (predicted_persons - observed_persons).abs();
            train_naive += (naive_persons - observed_persons).abs();
            train_n += 1;
        }
        predictions.push(BacktestPoint {
            month: aligned.months[t],
            observed_persons,
            predicted_persons,
            naive_persons,
            in_test_window,
        });
    }

    Ok(BacktestReport {
        train_window: MonthRange::new(aligned.months[0], aligned.months[n_train - 1])
            .expect("train side is nonempty"),
        test_window: MonthRange::new(aligned.months[n_train], aligned.months[n - 1])
            .expect("test side is nonempty"),
        model_mae_persons: test_model / test_n as f64,
        naive_mae_persons: test_naive / test_n as f64,
        train_model_mae_persons: train_model / train_n.max(1) as f64,
        train_naive_mae_persons: train_naive / train_n.max(1) as f64,
        predictions,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FlowRecord, FlowSeries, Route};
    use crate::series::{derive_series, CapPolicy};
    use approx::assert_abs_diff_eq;

    // Frozen 18-month fixture; expected values computed with an independent
    // linear-algebra implementation of both stages.
    const DEP: [f64; 18] = [
        5.1, 4.8, 5.6, 6.2, 5.9, 5.4, 6.8, 7.1, 6.5, 6.9, 7.4, 7.0, 6.2, 6.6, 7.8, 8.1, 7.5,
        7.9,
    ];
    const RESCUE: [f64; 18] = [
        0.60, 0.55, 0.65, 0.70, 0.68, 0.62, 0.75, 0.80, 0.72, 0.74, 0.82, 0.78, 0.66, 0.71,
        0.85, 0.88, 0.81, 0.84,
    ];

    fn spec(dep: DepVariable, sr: bool, ld: bool) -> EcmSpec {
        EcmSpec { dep, include_short_run: sr, include_lagged_dep: ld }
    }

    #[test]
    fn stage_one_matches_reference() {
        let fit =
            fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Level, false, false)).unwrap();
        assert_abs_diff_eq!(fit.beta0(), -0.93453972, epsilon = 1e-7);
        assert_abs_diff_eq!(fit.beta1(), 10.30560144, epsilon = 1e-7);
        assert_abs_diff_eq!(fit.stage1.standard_errors[0], 0.30430385, epsilon = 1e-7);
        assert_abs_diff_eq!(fit.stage1.standard_errors[1], 0.41305678, epsilon = 1e-7);
        assert_abs_diff_eq!(fit.stage1.r_squared, 0.9749405830352548, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.stage1.adj_r_squared, 0.9733743694749581, epsilon = 1e-10);
    }

    #[test]
    fn minimal_spec_matches_reference() {
        let fit =
            fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Level, false, false)).unwrap();
        assert_eq!(fit.stage2.n_obs, 17);
        assert_abs_diff_eq!(fit.alpha0, 0.189308868545079, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.alpha1, 2.351910020189688, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.stage2.standard_errors[0], 0.136818360210968, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.alpha1_se(), 0.924492215276731, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.stage2.r_squared, 0.301414041788156, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.stage2.adj_r_squared, 0.254841644574034, epsilon = 1e-10);
        assert_eq!(fit.alpha2, None);
        assert_eq!(fit.lagged_dep_coef, None);
    }

    #[test]
    fn short_run_spec_matches_reference() {
        let fit = fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Level, true, false)).unwrap();
        assert_eq!(fit.stage2.n_obs, 16);
        assert_abs_diff_eq!(fit.alpha0, 0.191201251185802, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.alpha1, 2.395725709654831, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.alpha2.unwrap(), 0.525181173181316, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.alpha1_se(), 1.098506522146342, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.alpha2_se().unwrap(), 2.134403034808168, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.stage2.r_squared, 0.283671065440585, epsilon = 1e-10);
    }

    #[test]
    fn full_spec_and_lagged_only_spec_match_reference() {
        let fit = fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Level, true, true)).unwrap();
        assert_eq!(fit.stage2.n_obs, 16);
        assert_abs_diff_eq!(fit.alpha1, 2.466594891858982, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.alpha2.unwrap(), 1.538865194661462, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.lagged_dep_coef.unwrap(), -0.115293333583932, epsilon = 1e-10);

        let fit = fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Level, false, true)).unwrap();
        assert_eq!(fit.stage2.n_obs, 16);
        assert_abs_diff_eq!(fit.alpha1, 2.35367008131214, epsilon = 1e-10);
        assert_eq!(fit.alpha2, None);
        assert_abs_diff_eq!(fit.lagged_dep_coef.unwrap(), 0.05486993758481, epsilon = 1e-10);
    }

    #[test]
    fn stage2_residuals_average_to_zero() {
        let fit = fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Level, true, false)).unwrap();
        let mean: f64 =
            fit.stage2.residuals.iter().sum::<f64>() / fit.stage2.residuals.len() as f64;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn row_accounting_follows_lag_structure() {
        // 48 months: 47 rows without lagged regressors, 46 with.
        let dep: Vec<f64> = (0..48).map(|i| 5.0 + ((i * 7 % 13) as f64) * 0.3).collect();
        let rescue: Vec<f64> = (0..48).map(|i| 0.4 + ((i * 5 % 11) as f64) * 0.04).collect();
        for (sr, ld, want) in [
            (false, false, 47),
            (true, false, 46),
            (false, true, 46),
            (true, true, 46),
        ] {
            let fit = fit_ecm_columns(&dep, &rescue, spec(DepVariable::Level, sr, ld)).unwrap();
            assert_eq!(fit.stage2.n_obs, want);
            assert_eq!(
                fit.stage2.n_obs,
                fit.stage1.n_obs - 1 - usize::from(sr || ld)
            );
        }
    }

    #[test]
    fn input_validation_and_degenerate_residuals() {
        let short = [1.0; 11];
        assert_eq!(
            fit_ecm_columns(&short, &short, spec(DepVariable::Level, true, false)).unwrap_err(),
            EconError::InsufficientOverlap { months: 11, needed: 12 }
        );
        // dep exactly linear in rescue: residuals vanish
        let rescue: Vec<f64> = (0..20).map(|i| 0.3 + 0.02 * i as f64).collect();
        let dep: Vec<f64> = rescue.iter().map(|p| 1.0 + 2.0 * p).collect();
        assert_eq!(
            fit_ecm_columns(&dep, &rescue, spec(DepVariable::Level, true, false)).unwrap_err(),
            EconError::DegenerateResiduals
        );
        assert_eq!(
            fit_ecm_columns(&dep[..19], &rescue, spec(DepVariable::Level, true, false))
                .unwrap_err(),
            EconError::LengthMismatch(19, 20)
        );
    }

    fn fixture_points(n: usize, route: Route, start: &str) -> Vec<DerivedPoint> {
        let start: Month = start.parse().unwrap();
        let records: Vec<FlowRecord> = (0..n)
            .map(|i| FlowRecord {
                route,
                month: Month::from_index(start.index() + i as i64),
                n_rescued: 4000 + 311 * (i as u32 % 9),
                n_intercepted: 900 + 77 * (i as u32 % 5),
                n_dead: 25 + (i as u32 % 4),
            })
            .collect();
        derive_series(&FlowSeries::new(route, records).unwrap(), CapPolicy::default()).unwrap()
    }

    #[test]
    fn month_alignment_intersects_and_requires_contiguity() {
        let central = fixture_points(30, Route::Central, "2016-01");
        let western = fixture_points(24, Route::Western, "2016-04");
        // overlap: 2016-04 .. 2018-03 = 24 and 30-3=27 -> 24 months
        let fit = fit_ecm(&western, &central, EcmSpec::headline()).unwrap();
        assert_eq!(fit.stage1.n_obs, 24);

        // too little overlap: 2018-02 .. 2018-06 is five months
        let late = fixture_points(20, Route::Western, "2018-02");
        assert_eq!(
            fit_ecm(&late, &central, EcmSpec::headline()).unwrap_err(),
            EconError::InsufficientOverlap { months: 5, needed: 12 }
        );

        // a hole in the dependent series breaks contiguity
        let mut holed = central.clone();
        holed.remove(15);
        assert!(matches!(
            fit_ecm(&holed, &central, EcmSpec::headline()).unwrap_err(),
            EconError::NonContiguousMonths(_)
        ));
    }

    #[test]
    fn equilibrium_delta_matches_closed_form() {
        let mut fit =
            fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Level, true, false)).unwrap();
        fit.stage1.coefficients[1] = 28.01;
        assert_abs_diff_eq!(equilibrium_delta(&fit, 0.9, 0.5).unwrap(), 11_204.0, epsilon = 1e-9);
        fit.stage1.coefficients[1] = -4.31;
        assert_abs_diff_eq!(equilibrium_delta(&fit, 0.9, 0.5).unwrap(), -1_724.0, epsilon = 1e-9);
        // identity and antisymmetry
        assert_eq!(equilibrium_delta(&fit, 0.7, 0.7).unwrap(), 0.0);
        assert_abs_diff_eq!(
            equilibrium_delta(&fit, 0.9, 0.5).unwrap(),
            -equilibrium_delta(&fit, 0.5, 0.9).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn equilibrium_delta_guards_inputs() {
        let mut fit =
            fit_ecm_columns(&DEP, &RESCUE, spec(DepVariable::Log, true, false)).unwrap();
        assert_eq!(
            equilibrium_delta(&fit, 0.9, 0.5).unwrap_err(),
            EconError::WrongDepVariable(DepVariable::Log)
        );
        fit.dep_variable = DepVariable::Level;
        assert_eq!(
            equilibrium_delta(&fit, 1.2, 0.5).unwrap_err(),
            EconError::ProbabilityOutOfRange(1.2)
        );
    }

    #[test]
    fn expanding_window_counts_skips_and_matches_full_fit() {
        let points = fixture_points(48, Route::Central, "2016-01");
        let windows = expanding_window(&points, &points, EcmSpec::headline(), 5).unwrap();
        assert_eq!(windows.len(), 44);

        // windows below the 12-month floor are skipped with a reason
        assert!(matches!(
            &windows[0].outcome,
            WindowOutcome::Skipped { reason } if reason.contains("aligned months")
        ));
        // the last window equals the full-sample fit exactly
        let full = fit_ecm(&points, &points, EcmSpec::headline()).unwrap();
        match &windows.last().unwrap().outcome {
            WindowOutcome::Fit { alpha1, se } => {
                assert_eq!(*alpha1, full.alpha1);
                assert_eq!(*se, full.alpha1_se());
            }
            other => panic!("expected a fit, got {other:?}"),
        }
        assert_eq!(windows.last().unwrap().window_end.to_string(), "2019-12");
        assert_eq!(windows.last().unwrap().window_len, 48);
    }

    fn near_constant_points(n: usize) -> Vec<DerivedPoint> {
        let start: Month = "2016-01".parse().unwrap();
        let records: Vec<FlowRecord> = (0..n)
            .map(|i| FlowRecord {
                route: Route::Central,
                month: Month::from_index(start.index() + i as i64),
                // one-person wiggle so stage-1 residuals are not degenerate
                n_rescued: 5000 + (i as u32 % 2),
                n_intercepted: 1000 + ((i / 2) as u32 % 2),
                n_dead: 10,
            })
            .collect();
        derive_series(&FlowSeries::new(Route::Central, records).unwrap(), CapPolicy::default())
            .unwrap()
    }

    #[test]
    fn backtest_on_near_constant_series_has_tiny_errors() {
        let points = near_constant_points(30);
        let split: Month = "2017-06".parse().unwrap();
        let report = backtest(&points, &points, EcmSpec::headline(), split).unwrap();
        // the integer person counts wiggle by one, so errors sit near one
        // person on a six-thousand-person level
        assert!(report.model_mae_persons < 2.0, "model mae {}", report.model_mae_persons);
        assert!(report.naive_mae_persons < 2.0);
        assert!(report.train_model_mae_persons < 2.0);
        assert_eq!(report.train_window.to_string(), "2016-01:2017-06");
        assert_eq!(report.test_window.to_string(), "2017-07:2018-06");
        // predictions cover every month with available regressors
        assert_eq!(report.predictions.len(), 28);
        assert_eq!(report.predictions.iter().filter(|p| p.in_test_window).count(), 12);
    }

    #[test]
    fn backtest_rejects_constant_series_and_bad_splits() {
        let start: Month = "2016-01".parse().unwrap();
        let records: Vec<FlowRecord> = (0..30)
            .map(|i| FlowRecord {
                route: Route::Central,
                month: Month::from_index(start.index() + i as i64),
                n_rescued: 5000,
                n_intercepted: 1000,
                n_dead: 10,
            })
            .collect();
        let points =
            derive_series(&FlowSeries::new(Route::Central, records).unwrap(), CapPolicy::default())
                .unwrap();
        let split: Month = "2017-06".parse().unwrap();
        assert_eq!(
            backtest(&points, &points, EcmSpec::headline(), split).unwrap_err(),
            EconError::DegenerateResiduals
        );

        let points = near_constant_points(30);
        assert_eq!(
            backtest(&points, &points, EcmSpec::headline(), "2020-06".parse().unwrap())
                .unwrap_err(),
            EconError::EmptySplit
        );
        assert_eq!(
            backtest(&points, &points, EcmSpec::headline(), "2018-01".parse().unwrap())
                .unwrap_err(),
            EconError::InsufficientOverlap { months: 5, needed: 12 }
        );
    }

    #[test]
    fn backtest_mae_recomputes_from_predictions() {
        let points = fixture_points(36, Route::Central, "2016-01");
        let split: Month = "2017-12".parse().unwrap();
        let report = backtest(&points, &points, EcmSpec::headline(), split).unwrap();
        let test: Vec<_> = report.predictions.iter().filter(|p| p.in_test_window).collect();
        let mae: f64 = test
            .iter()
            .map(|p| (p.predicted_persons - p.observed_persons).abs())
            .sum::<f64>()
            / test.len() as f64;
        assert_abs_diff_eq!(report.model_mae_persons, mae, epsilon = 1e-10);
        let naive: f64 = test
            .iter()
            .map(|p| (p.naive_persons - p.observed_persons).abs())
            .sum::<f64>()
            / test.len() as f64;
        assert_abs_diff_eq!(report.naive_mae_persons, naive, epsilon = 1e-10);
    }
}
