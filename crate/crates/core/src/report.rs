//! Stable export formats: JSON fit reports and the CSV table layouts the
//! command-line front end writes to disk.
//!
//! Numbers are rendered with Rust's shortest-round-trip float formatting,
//! so files are deterministic and parse back to the exact values.

use serde_json::{json, Value};

use crate::choice::{crossover_points, ChoiceFit, QuarterShares, ScenarioResult, Weighting};
use crate::econ::{BacktestReport, EcmFit, WindowEstimate, WindowOutcome};
use crate::series::{CoveragePoint, DerivedPoint, QuarterPoint};

/// One named estimate with its standard error.
fn coefficient(name: &str, estimate: f64, se: f64) -> Value {
    json!({ "name": name, "estimate": estimate, "se": se })
}

/// Two-step fit as JSON: stage-2 coefficients up front, the long-run
/// stage-1 regression nested under `stage1`.
pub fn ecm_fit_json(fit: &EcmFit) -> Value {
    let names = fit.spec.stage2_names();
    let coefficients: Vec<Value> = names
        .iter()
        .zip(&fit.stage2.coefficients)
        .zip(&fit.stage2.standard_errors)
        .map(|((name, est), se)| coefficient(name, *est, *se))
        .collect();
    json!({
        "spec": {
            "dep": fit.dep_variable,
            "include_short_run": fit.spec.include_short_run,
            "include_lagged_dep": fit.spec.include_lagged_dep,
        },
        "coefficients": coefficients,
        "r2": fit.stage2.r_squared,
        "adj_r2": fit.stage2.adj_r_squared,
        "n_obs": fit.stage2.n_obs,
        "stage1": {
            "coefficients": [
                coefficient("const", fit.beta0(), fit.stage1.standard_errors[0]),
                coefficient("p_rescue", fit.beta1(), fit.stage1.standard_errors[1]),
            ],
            "r2": fit.stage1.r_squared,
            "adj_r2": fit.stage1.adj_r_squared,
            "n_obs": fit.stage1.n_obs,
        },
    })
}

/// Choice fit as JSON, one entry per reported coefficient in display order
/// plus the fit statistics and utility crossover points.
pub fn choice_fit_json(fit: &ChoiceFit, weighting: Weighting) -> Value {
    let cross = crossover_points(fit);
    json!({
        "weighting": weighting,
        "coefficients": [
            coefficient("alpha_mid", fit.alpha.mid, fit.alpha_se.mid),
            coefficient("alpha_large", fit.alpha.large, fit.alpha_se.large),
            coefficient("beta_mid", fit.beta.mid, fit.beta_se.mid),
            coefficient("beta_large", fit.beta.large, fit.beta_se.large),
        ],
        "log_likelihood": fit.log_likelihood,
        "pseudo_r2": fit.pseudo_r2,
        "n_choices": fit.n_choices,
        "n_alternatives": fit.n_alternatives,
        "crossovers": {
            "small_mid": cross.small_mid,
            "small_large": cross.small_large,
            "mid_large": cross.mid_large,
        },
    })
}

pub fn derived_series_csv(points: &[DerivedPoint]) -> String {
    let mut out = String::from("month,n_cross_thousands,p_rescue,log_n_cross,log_odds\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.month, p.n_cross_thousands, p.p_rescue, p.log_n_cross, p.log_odds
        ));
    }
    out
}

pub fn quarter_table_csv(points: &[QuarterPoint]) -> String {
    let mut out = String::from("quarter,share_libya,p_interception\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            p.quarter, p.share_libya_rescue, p.p_interception
        ));
    }
    out
}

/// Per-month predictions, restricted to the held-out window.
pub fn backtest_csv(report: &BacktestReport) -> String {
    let mut out = String::from("month,observed,predicted,naive\n");
    for p in report.predictions.iter().filter(|p| p.in_test_window) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.month, p.observed_persons, p.predicted_persons, p.naive_persons
        ));
    }
    out
}

/// Model-implied bin shares at each quarter's observed interception level.
pub fn predicted_shares_csv(shares: &[QuarterShares]) -> String {
    let mut out = String::from("quarter,p_interception,share_small,share_mid,share_large\n");
    for q in shares {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            q.quarter, q.p_interception, q.shares[0], q.shares[1], q.shares[2]
        ));
    }
    out
}

pub fn scenario_csv(scenario: &ScenarioResult) -> String {
    let mut out = String::from(
        "quarter,p_base,p_cf,share_small_base,share_mid_base,share_large_base,\
         share_small_cf,share_mid_cf,share_large_cf\n",
    );
    for q in &scenario.quarters {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            q.quarter,
            q.p_baseline,
            q.p_counterfactual,
            q.baseline_shares[0],
            q.baseline_shares[1],
            q.baseline_shares[2],
            q.counterfactual_shares[0],
            q.counterfactual_shares[1],
            q.counterfactual_shares[2],
        ));
    }
    out
}

/// Expanding-window adjustment-speed estimates; windows that failed to fit
/// carry the reason in `status` and blank numeric cells.
pub fn window_csv(estimates: &[WindowEstimate]) -> String {
    let mut out = String::from("window_end,window_len,alpha1,se,status\n");
    for w in estimates {
        match &w.outcome {
            WindowOutcome::Fit { alpha1, se } => {
                out.push_str(&format!(
                    "{},{},{},{},ok\n",
                    w.window_end, w.window_len, alpha1, se
                ));
            }
            WindowOutcome::Skipped { reason } => {
                out.push_str(&format!(
                    "{},{},,,{}\n",
                    w.window_end,
                    w.window_len,
                    reason.replace(',', ";")
                ));
            }
        }
    }
    out
}

pub fn coverage_csv(points: &[CoveragePoint]) -> String {
    let mut out = String::from("quarter,incident_persons,flow_arrivals,ratio,flagged\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.quarter, p.incident_persons, p.flow_arrivals, p.ratio, p.flagged
        ));
    }
    out
}
