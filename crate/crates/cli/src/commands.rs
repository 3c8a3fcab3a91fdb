//! Command implementations. Each command loads what it needs, prints its
//! text report to stdout, and writes files for the requested formats into
//! the output directory; any error bubbles up and exits with code 2.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use chrono::NaiveDate;
use serde_json::{json, Value};

use crosslab_core::choice::{
    counterfactual, crossover_points, fit_conditional_logit, fit_intercepts_only,
    observations_from_incidents, predicted_quarterly_distribution, BinCoefficients, ChoiceFit,
    ChoiceObservation, Weighting,
};
use crosslab_core::dataset::{
    filter_choice_sample, flows_to_csv, ingest_flows, ingest_incidents, BoatType,
    DepartureCountry, FlowSchema, FlowSeries, IncidentRecord, IncidentSchema, Route,
};
use crosslab_core::econ::{
    backtest, equilibrium_delta, expanding_window, fit_ecm, DepVariable, EcmFit, EcmSpec,
    WindowOutcome,
};
use crosslab_core::report;
use crosslab_core::series::{
    coverage_diagnostic, derive_series, interception_series, CapPolicy, DerivedPoint,
};
use crosslab_core::stats::{
    centered_moving_average, lowess, student_t_two_sided_p, welch_ttest, TTestResult,
};
use crosslab_core::synth::{
    generate_choice_data, generate_ecm_data, ChoiceDgpSpec, EcmDgpSpec, QuarterSpec,
    RescueProcess,
};
use crosslab_core::{Month, MonthRange, Quarter};

use crate::svg;
use crate::table::{self, Column};
use crate::{
    BacktestArgs, ChoiceArgs, Cli, Command, CoverageArgs, DeriveArgs, EcmArgs, Format, SynthArgs,
    TtestArgs, WindowArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    let dir = cli
        .out
        .or_else(|| std::env::var_os("CROSSLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut out = Outputs { dir, formats: cli.format.iter().copied().collect() };
    let g = Globals { input: cli.input, incidents: cli.incidents, seed: cli.seed };

    match cli.command {
        Command::Derive(args) => cmd_derive(&g, &args, &mut out),
        Command::Ecm(args) => cmd_ecm(&g, &args, &mut out),
        Command::Choice(args) => cmd_choice(&g, &args, &mut out),
        Command::Backtest(args) => cmd_backtest(&g, &args, &mut out),
        Command::Window(args) => cmd_window(&g, &args, &mut out),
        Command::Ttest(args) => cmd_ttest(&g, &args, &mut out),
        Command::Synth(args) => cmd_synth(&g, &args, &mut out),
        Command::Coverage(args) => cmd_coverage(&g, &args, &mut out),
    }
}

struct Globals {
    input: Option<PathBuf>,
    incidents: Option<PathBuf>,
    seed: Option<u64>,
}

struct Outputs {
    dir: PathBuf,
    formats: BTreeSet<Format>,
}

impl Outputs {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn write(&self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_json(&self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON reports are serializable");
        text.push('\n');
        self.write(name, &text)
    }
}

fn load_flows(g: &Globals) -> Result<BTreeMap<Route, FlowSeries>> {
    let path = g
        .input
        .as_deref()
        .ok_or_else(|| anyhow!("this command needs --input <monthly flow CSV>"))?;
    ingest_flows(path, &FlowSchema::default())
        .with_context(|| format!("reading {}", path.display()))
}

fn load_incidents(g: &Globals) -> Result<Vec<IncidentRecord>> {
    let path = g
        .incidents
        .as_deref()
        .ok_or_else(|| anyhow!("this command needs --incidents <incident CSV>"))?;
    let (records, parse) = ingest_incidents(path, &IncidentSchema::default())
        .with_context(|| format!("reading {}", path.display()))?;
    if !parse.dropped.is_empty() {
        eprintln!(
            "note: dropped {} of {} incident rows (first: row {}, {})",
            parse.dropped.len(),
            parse.rows_read,
            parse.dropped[0].row,
            parse.dropped[0].reason
        );
    }
    Ok(records)
}

fn route_series(flows: &BTreeMap<Route, FlowSeries>, route: Route) -> Result<&FlowSeries> {
    flows.get(&route).ok_or_else(|| anyhow!("flow file has no {route} rows"))
}

fn derived_for(flows: &BTreeMap<Route, FlowSeries>, route: Route) -> Result<Vec<DerivedPoint>> {
    derive_series(route_series(flows, route)?, CapPolicy::TenNinthsOfMax)
        .with_context(|| format!("deriving the {route} series"))
}

fn route_slug(route: Route) -> String {
    route.to_string().to_ascii_lowercase()
}

/// Inclusive day window covering every day of the month range.
fn date_window(range: MonthRange) -> RangeInclusive<NaiveDate> {
    let first = |m: Month| {
        NaiveDate::from_ymd_opt(m.year(), m.month(), 1).expect("months are valid dates")
    };
    let start = first(range.start);
    let end = first(range.end.succ()).pred_opt().expect("bounded calendar");
    start..=end
}

/// Chart tick roughly every `step`th point, labelled with the month.
fn month_ticks(months: &[Month], step: usize) -> Vec<(f64, String)> {
    months
        .iter()
        .enumerate()
        .step_by(step.max(1))
        .map(|(i, m)| (i as f64, m.to_string()))
        .collect()
}

// ---------------------------------------------------------------- derive --

fn cmd_derive(g: &Globals, args: &DeriveArgs, out: &mut Outputs) -> Result<()> {
    let flows = load_flows(g)?;
    let cap = match args.cap {
        Some(c) => CapPolicy::Fixed(c),
        None => CapPolicy::TenNinthsOfMax,
    };
    for (route, series) in &flows {
        let derived = derive_series(series, cap)
            .with_context(|| format!("deriving the {route} series"))?;
        let slug = route_slug(*route);
        println!(
            "{route}: {} months, {} .. {}",
            derived.len(),
            derived[0].month,
            derived[derived.len() - 1].month
        );
        if out.wants(Format::Csv) {
            out.write(&format!("derived_{slug}.csv"), &report::derived_series_csv(&derived))?;
        }
        if out.wants(Format::Json) {
            let value = serde_json::to_value(&derived).expect("derived points serialize");
            out.write_json(&format!("derived_{slug}.json"), &value)?;
        }
        if out.wants(Format::Svg) {
            let months: Vec<Month> = derived.iter().map(|p| p.month).collect();
            let ticks = month_ticks(&months, 6);

            let crossings: Vec<(f64, f64)> =
                derived.iter().enumerate().map(|(i, p)| (i as f64, p.n_cross_thousands)).collect();
            let values: Vec<f64> = derived.iter().map(|p| p.n_cross_thousands).collect();
            let mut lines = vec![svg::Line { label: "crossings (000s)", points: crossings }];
            if let Ok(ma) = centered_moving_average(&values, 6) {
                let smooth: Vec<(f64, f64)> = ma
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| v.map(|v| (i as f64, v)))
                    .collect();
                lines.push(svg::Line { label: "6-month average", points: smooth });
            }
            let chart = svg::line_chart(&format!("{route} route crossings"), &ticks, &lines);
            out.write(&format!("derived_{slug}.svg"), &chart)?;

            let xs: Vec<f64> = (0..derived.len()).map(|i| i as f64).collect();
            let ps: Vec<f64> = derived.iter().map(|p| p.p_rescue).collect();
            let raw: Vec<(f64, f64)> = xs.iter().copied().zip(ps.iter().copied()).collect();
            let mut lines = vec![svg::Line { label: "p_rescue", points: raw }];
            if let Ok(fit) = lowess(&xs, &ps, args.bandwidth) {
                let smooth: Vec<(f64, f64)> =
                    xs.iter().copied().zip(fit.iter().copied()).collect();
                lines.push(svg::Line { label: "lowess", points: smooth });
            }
            let chart =
                svg::line_chart(&format!("{route} route rescue probability"), &ticks, &lines);
            out.write(&format!("rescue_{slug}.svg"), &chart)?;
        }
    }

    if g.incidents.is_some() {
        let incidents = load_incidents(g)?;
        let series = route_series(&flows, args.route)?;
        let quarters = interception_series(series, &incidents)
            .context("building the quarterly interception table")?;
        println!(
            "quarter table: {} quarters, p_interception {:.3} .. {:.3}",
            quarters.len(),
            quarters.iter().map(|q| q.p_interception).fold(f64::INFINITY, f64::min),
            quarters.iter().map(|q| q.p_interception).fold(f64::NEG_INFINITY, f64::max),
        );
        if out.wants(Format::Csv) {
            out.write("quarter_table.csv", &report::quarter_table_csv(&quarters))?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------------- ecm --

fn dep_label(dep: DepVariable) -> &'static str {
    match dep {
        DepVariable::Level => "level",
        DepVariable::Log => "log",
        DepVariable::LogOdds => "log-odds",
    }
}

const ECM_ROWS: [&str; 4] = ["e_lag", "d_rescue_lag", "d_dep_lag", "const"];
const ECM_STATS: [&str; 3] = ["R2", "Adj. R2", "N"];

fn ecm_column(fit: &EcmFit, header: Vec<String>) -> Column {
    let names = fit.spec.stage2_names();
    let ps = fit.stage2.p_values();
    let cells = ECM_ROWS
        .iter()
        .map(|row| {
            names.iter().position(|n| n == row).map(|i| {
                (fit.stage2.coefficients[i], fit.stage2.standard_errors[i], ps[i])
            })
        })
        .collect();
    let stats = vec![
        format!("{:.3}", fit.stage2.r_squared),
        format!("{:.3}", fit.stage2.adj_r_squared),
        table::count_cell(fit.stage2.n_obs),
    ];
    Column { header, cells, stats }
}

fn cmd_ecm(g: &Globals, args: &EcmArgs, out: &mut Outputs) -> Result<()> {
    let flows = load_flows(g)?;
    let dep = derived_for(&flows, args.route)?;
    let rescue = derived_for(&flows, args.rescue_route)?;

    if args.all_specs {
        let sets = [(false, false), (true, false), (true, true)];
        let set_label = |sr: bool, ld: bool| match (sr, ld) {
            (false, false) => "minimal",
            (true, false) => "short-run",
            _ => "full",
        };
        let mut fits = Vec::new();
        let mut columns = Vec::new();
        for dep_var in [DepVariable::Level, DepVariable::Log, DepVariable::LogOdds] {
            for (sr, ld) in sets {
                let spec =
                    EcmSpec { dep: dep_var, include_short_run: sr, include_lagged_dep: ld };
                let fit = fit_ecm(&dep, &rescue, spec).with_context(|| {
                    format!("fitting {} / {}", dep_label(dep_var), set_label(sr, ld))
                })?;
                columns.push(ecm_column(
                    &fit,
                    vec![
                        format!("({})", fits.len() + 1),
                        dep_label(dep_var).to_string(),
                        set_label(sr, ld).to_string(),
                    ],
                ));
                fits.push(fit);
            }
        }
        println!("error-correction fits, {} route (rescue: {})", args.route, args.rescue_route);
        print!("{}", table::coefficient_table(&ECM_ROWS, &ECM_STATS, &columns));
        if out.wants(Format::Json) {
            let value = Value::Array(fits.iter().map(report::ecm_fit_json).collect());
            out.write_json("ecm_grid.json", &value)?;
        }
        return Ok(());
    }

    let spec = args.spec();
    let fit = fit_ecm(&dep, &rescue, spec).context("fitting the error-correction model")?;
    println!(
        "error-correction fit, {} route (rescue: {}), dependent variable: {}",
        args.route,
        args.rescue_route,
        dep_label(spec.dep)
    );
    let column = ecm_column(&fit, vec!["(1)".to_string()]);
    print!("{}", table::coefficient_table(&ECM_ROWS, &ECM_STATS, &[column]));
    println!(
        "stage 1 (long run): dep = {:.2} + {:.2} p_rescue   (R2 {:.3}, N {})",
        fit.beta0(),
        fit.beta1(),
        fit.stage1.r_squared,
        fit.stage1.n_obs
    );
    if spec.dep == DepVariable::Level {
        let delta = equilibrium_delta(&fit, 0.9, 0.5).expect("level fit");
        println!("equilibrium shift for p_rescue 0.9 -> 0.5: {delta:.0} persons/month");
    }
    if out.wants(Format::Json) {
        out.write_json(&format!("ecm_{}.json", route_slug(args.route)), &report::ecm_fit_json(&fit))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- choice --

const CHOICE_ROWS: [&str; 4] = ["alpha_mid", "alpha_large", "beta_mid", "beta_large"];
const CHOICE_STATS: [&str; 4] = ["Log-likelihood", "Pseudo R2", "Choices", "Alternatives"];

fn choice_column(fit: &ChoiceFit, intercepts_only: bool, header: Vec<String>) -> Column {
    // p-values from t statistics on the estimation sample
    let df = (fit.n_choices - if intercepts_only { 2 } else { 4 }) as f64;
    let cell = |b: f64, s: f64| Some((b, s, student_t_two_sided_p(b / s, df)));
    let cells = vec![
        cell(fit.alpha.mid, fit.alpha_se.mid),
        cell(fit.alpha.large, fit.alpha_se.large),
        if intercepts_only { None } else { cell(fit.beta.mid, fit.beta_se.mid) },
        if intercepts_only { None } else { cell(fit.beta.large, fit.beta_se.large) },
    ];
    let stats = vec![
        format!("{:.1}", fit.log_likelihood),
        format!("{:.3}", fit.pseudo_r2),
        table::count_cell(fit.n_choices),
        table::count_cell(fit.n_alternatives),
    ];
    Column { header, cells, stats }
}

fn weighting_label(w: Weighting) -> &'static str {
    match w {
        Weighting::None => "none",
        Weighting::InverseRescue => "rescue",
        Weighting::Frequency => "frequency",
    }
}

fn cmd_choice(g: &Globals, args: &ChoiceArgs, out: &mut Outputs) -> Result<()> {
    let flows = load_flows(g)?;
    let incidents = load_incidents(g)?;
    let series = route_series(&flows, args.route)?;
    let quarters = interception_series(series, &incidents)
        .context("building the quarterly interception table")?;
    let sample = filter_choice_sample(&incidents, &date_window(args.window));
    let observations = observations_from_incidents(&sample, &quarters)
        .context("assembling the choice sample")?;
    println!(
        "choice sample: {} incidents in {} .. {}",
        observations.len(),
        args.window.start,
        args.window.end
    );

    let weighting: Weighting = args.weighting.into();
    let fit = fit_conditional_logit(&observations, weighting)
        .context("fitting the boat-size choice model")?;

    if args.all_weightings {
        let schemes = [Weighting::None, Weighting::InverseRescue, Weighting::Frequency];
        let mut columns = Vec::new();
        let mut entries = Vec::new();
        for (i, w) in schemes.iter().enumerate() {
            let f = fit_intercepts_only(&observations, *w)
                .with_context(|| format!("intercepts-only fit, {} weights", weighting_label(*w)))?;
            columns.push(choice_column(
                &f,
                true,
                vec![format!("({})", i + 1), "intercepts".into(), weighting_label(*w).into()],
            ));
            entries.push(json!({ "model": "intercepts-only", "fit": report::choice_fit_json(&f, *w) }));
        }
        for (i, w) in schemes.iter().enumerate() {
            let f = fit_conditional_logit(&observations, *w)
                .with_context(|| format!("full fit, {} weights", weighting_label(*w)))?;
            columns.push(choice_column(
                &f,
                false,
                vec![format!("({})", i + 4), "full".into(), weighting_label(*w).into()],
            ));
            entries.push(json!({ "model": "full", "fit": report::choice_fit_json(&f, *w) }));
        }
        println!("choice fits under alternative weighting schemes");
        print!("{}", table::coefficient_table(&CHOICE_ROWS, &CHOICE_STATS, &columns));
        if out.wants(Format::Json) {
            out.write_json("choice_grid.json", &Value::Array(entries))?;
        }
    } else {
        println!("boat-size choice fit, {} weights", weighting_label(weighting));
        let column = choice_column(&fit, false, vec!["(1)".to_string()]);
        print!("{}", table::coefficient_table(&CHOICE_ROWS, &CHOICE_STATS, &[column]));
        if out.wants(Format::Json) {
            out.write_json("choice.json", &report::choice_fit_json(&fit, weighting))?;
        }
    }

    let cross = crossover_points(&fit);
    let show = |c: Option<f64>| c.map_or("-".to_string(), |p| format!("{p:.3}"));
    println!("utility crossovers (interception probability):");
    println!("  small = mid    {}", show(cross.small_mid));
    println!("  small = large  {}", show(cross.small_large));
    println!("  mid = large    {}", show(cross.mid_large));

    if out.wants(Format::Csv) {
        let shares = predicted_quarterly_distribution(&fit, &quarters);
        out.write("predicted_shares.csv", &report::predicted_shares_csv(&shares))?;
    }
    if let Some(pp) = args.delta_pp {
        let scenario = counterfactual(&fit, &quarters, pp / 100.0);
        let n_clamped = scenario.quarters.iter().filter(|q| q.clamped).count();
        let small_shift: f64 = scenario
            .quarters
            .iter()
            .map(|q| q.counterfactual_shares[0] - q.baseline_shares[0])
            .sum::<f64>()
            / scenario.quarters.len() as f64;
        println!(
            "counterfactual {pp:+.1}pp interception: mean small-bin share shift {:+.3}{}",
            small_shift,
            if n_clamped > 0 { format!(" ({n_clamped} quarters clamped)") } else { String::new() }
        );
        if out.wants(Format::Csv) {
            out.write("scenario.csv", &report::scenario_csv(&scenario))?;
        }
    }
    if out.wants(Format::Svg) {
        let grid: Vec<f64> = (0..=50).map(|i| f64::from(i) / 50.0).collect();
        let share_line = |bin: usize, label: &'static str| svg::Line {
            label,
            points: grid
                .iter()
                .map(|p| {
                    (*p, crosslab_core::choice::choice_probabilities(fit.alpha, fit.beta, *p)[bin])
                })
                .collect(),
        };
        let ticks: Vec<(f64, String)> =
            [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|p| (*p, format!("{p:.2}"))).collect();
        let chart = svg::line_chart(
            "predicted bin shares by interception probability",
            &ticks,
            &[
                share_line(0, "small (1-50)"),
                share_line(1, "mid (51-100)"),
                share_line(2, "large (101+)"),
            ],
        );
        out.write("choice_shares.svg", &chart)?;
    }
    Ok(())
}

// -------------------------------------------------------------- backtest --

fn cmd_backtest(g: &Globals, args: &BacktestArgs, out: &mut Outputs) -> Result<()> {
    let flows = load_flows(g)?;
    let dep = derived_for(&flows, args.route)?;
    let rescue = derived_for(&flows, args.rescue_route)?;
    let spec = EcmSpec {
        dep: args.dep.into(),
        include_short_run: true,
        include_lagged_dep: false,
    };
    let report = backtest(&dep, &rescue, spec, args.split).context("backtesting")?;
    println!("train {}  test {}", report.train_window, report.test_window);
    println!(
        "test MAE: model {:.0} persons, carry-forward {:.0} persons",
        report.model_mae_persons, report.naive_mae_persons
    );
    println!(
        "train MAE: model {:.0} persons, carry-forward {:.0} persons",
        report.train_model_mae_persons, report.train_naive_mae_persons
    );

    if out.wants(Format::Csv) {
        let summary = format!(
            "train_window,test_window,model_mae_persons,naive_mae_persons,\
             train_model_mae_persons,train_naive_mae_persons\n{},{},{},{},{},{}\n",
            report.train_window,
            report.test_window,
            report.model_mae_persons,
            report.naive_mae_persons,
            report.train_model_mae_persons,
            report.train_naive_mae_persons
        );
        out.write("backtest_summary.csv", &summary)?;
        out.write("backtest_predictions.csv", &report::backtest_csv(&report))?;
    }
    if out.wants(Format::Json) {
        let value = serde_json::to_value(&report).expect("backtest report serializes");
        out.write_json("backtest.json", &value)?;
    }
    if out.wants(Format::Svg) {
        let months: Vec<Month> = report.predictions.iter().map(|p| p.month).collect();
        let ticks = month_ticks(&months, 6);
        let line = |label: &'static str, f: fn(&crosslab_core::econ::BacktestPoint) -> f64| {
            svg::Line {
                label,
                points: report
                    .predictions
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i as f64, f(p)))
                    .collect(),
            }
        };
        let chart = svg::line_chart(
            "one-step-ahead predictions (persons)",
            &ticks,
            &[
                line("observed", |p| p.observed_persons),
                line("model", |p| p.predicted_persons),
                line("carry-forward", |p| p.naive_persons),
            ],
        );
        out.write("backtest.svg", &chart)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- window --

fn cmd_window(g: &Globals, args: &WindowArgs, out: &mut Outputs) -> Result<()> {
    let flows = load_flows(g)?;
    let dep = derived_for(&flows, args.route)?;
    let rescue = derived_for(&flows, args.rescue_route)?;
    let spec = EcmSpec {
        dep: args.dep.into(),
        include_short_run: true,
        include_lagged_dep: false,
    };
    let estimates = expanding_window(&dep, &rescue, spec, args.start_len)
        .context("scanning expanding windows")?;
    let fitted = estimates
        .iter()
        .filter_map(|w| match &w.outcome {
            WindowOutcome::Fit { alpha1, se } => Some((w.window_end, *alpha1, *se)),
            WindowOutcome::Skipped { .. } => None,
        })
        .collect::<Vec<_>>();
    println!("{} windows from {} months, {} fitted", estimates.len(), args.start_len, fitted.len());
    if let Some((end, a1, se)) = fitted.last() {
        println!("full sample (through {end}): adjustment speed {a1:.3} (se {se:.3})");
    }

    if out.wants(Format::Csv) {
        out.write("window.csv", &report::window_csv(&estimates))?;
    }
    if out.wants(Format::Json) {
        let value = serde_json::to_value(&estimates).expect("window estimates serialize");
        out.write_json("window.json", &value)?;
    }
    if out.wants(Format::Svg) {
        let months: Vec<Month> = fitted.iter().map(|(m, _, _)| *m).collect();
        let ticks = month_ticks(&months, 6);
        let line = |label: &'static str, f: fn(&(Month, f64, f64)) -> f64| svg::Line {
            label,
            points: fitted.iter().enumerate().map(|(i, w)| (i as f64, f(w))).collect(),
        };
        let chart = svg::line_chart(
            "adjustment speed by expanding window",
            &ticks,
            &[
                line("estimate", |w| w.1),
                line("+1.96 se", |w| w.1 + 1.96 * w.2),
                line("-1.96 se", |w| w.1 - 1.96 * w.2),
            ],
        );
        out.write("window.svg", &chart)?;
    }
    Ok(())
}

// ----------------------------------------------------------------- ttest --

struct Contrast {
    variable: &'static str,
    phase2_n: usize,
    phase3_n: usize,
    result: TTestResult,
}

/// Pulls one numeric characteristic out of an incident, when defined.
type Extractor = fn(&IncidentRecord) -> Option<f64>;

const TTEST_VARIABLES: [(&str, Extractor); 6] = [
    ("People per transport", |r| match (r.n_people, r.n_vessels) {
        (Some(p), Some(v)) if v > 0 => Some(f64::from(p) / f64::from(v)),
        _ => None,
    }),
    ("Rubber boat (vs. wooden)", |r| match r.boat_type {
        BoatType::Rubber => Some(1.0),
        BoatType::Wooden => Some(0.0),
        _ => None,
    }),
    ("In operational area", |r| r.in_operational_area.map(f64::from)),
    ("Any dead or missing", |r| Some(f64::from(u8::from(r.n_dead > 0)))),
    ("Number dead or missing", |r| Some(f64::from(r.n_dead))),
    ("Fraction dead or missing", |r| match r.n_people {
        Some(p) if p > 0 => Some(f64::from(r.n_dead) / f64::from(p)),
        _ => None,
    }),
];

fn cmd_ttest(g: &Globals, args: &TtestArgs, out: &mut Outputs) -> Result<()> {
    let incidents = load_incidents(g)?;
    let in_phase = |window: MonthRange| {
        let days = date_window(window);
        incidents
            .iter()
            .filter(|r| r.departure_country == DepartureCountry::Libya && days.contains(&r.date))
            .collect::<Vec<_>>()
    };
    let phase2 = in_phase(args.phase2);
    let phase3 = in_phase(args.phase3);
    println!(
        "phase 2 ({}): {} incidents; phase 3 ({}): {} incidents",
        args.phase2,
        phase2.len(),
        args.phase3,
        phase3.len()
    );

    let mut contrasts = Vec::new();
    for (variable, extract) in TTEST_VARIABLES {
        let a: Vec<f64> = phase2.iter().filter_map(|r| extract(r)).collect();
        let b: Vec<f64> = phase3.iter().filter_map(|r| extract(r)).collect();
        let result = welch_ttest(&a, &b)
            .with_context(|| format!("t-test for {variable:?}"))?;
        contrasts.push(Contrast { variable, phase2_n: a.len(), phase3_n: b.len(), result });
    }

    let rows: Vec<Vec<String>> = contrasts
        .iter()
        .map(|c| {
            vec![
                c.variable.to_string(),
                format!("{:.3}", c.result.mean_a),
                format!("{:.3}", c.result.mean_b),
                table::estimate_cell(c.result.difference, c.result.p_value),
                format!("{:.4}", c.result.p_value),
            ]
        })
        .collect();
    print!(
        "{}",
        table::plain_table(
            &["Variable", "Phase 2 mean", "Phase 3 mean", "Difference", "P-value"],
            &rows
        )
    );

    if out.wants(Format::Csv) {
        let mut csv = String::from(
            "variable,n_phase2,n_phase3,mean_phase2,mean_phase3,difference,\
             t_statistic,degrees_of_freedom,p_value\n",
        );
        for c in &contrasts {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.variable.replace(',', ";"),
                c.phase2_n,
                c.phase3_n,
                c.result.mean_a,
                c.result.mean_b,
                c.result.difference,
                c.result.t_statistic,
                c.result.degrees_of_freedom,
                c.result.p_value
            ));
        }
        out.write("ttest.csv", &csv)?;
    }
    if out.wants(Format::Json) {
        let value = Value::Array(
            contrasts
                .iter()
                .map(|c| {
                    json!({
                        "variable": c.variable,
                        "n_phase2": c.phase2_n,
                        "n_phase3": c.phase3_n,
                        "mean_phase2": c.result.mean_a,
                        "mean_phase3": c.result.mean_b,
                        "difference": c.result.difference,
                        "t_statistic": c.result.t_statistic,
                        "degrees_of_freedom": c.result.degrees_of_freedom,
                        "p_value": c.result.p_value,
                    })
                })
                .collect(),
        );
        out.write_json("ttest.json", &value)?;
    }
    Ok(())
}

// ----------------------------------------------------------------- synth --

fn cmd_synth(g: &Globals, args: &SynthArgs, out: &mut Outputs) -> Result<()> {
    let seed = g.seed.ok_or_else(|| anyhow!("synth requires --seed <N>"))?;
    if args.mode.ecm {
        let spec = EcmDgpSpec {
            beta0: args.beta0,
            beta1: args.beta1,
            alpha0: args.alpha0,
            alpha1: args.alpha1,
            alpha2: args.alpha2,
            rescue_process: RescueProcess::RandomWalkClamped {
                start: args.walk_start,
                drift: args.walk_drift,
                step_sd: args.walk_sd,
            },
            noise_sd: args.noise_sd,
            length: args.length,
            seed,
        };
        let sample = generate_ecm_data(&spec).context("generating the flow sample")?;
        let series = sample.to_flow_series(args.route).context("rounding to flow counts")?;
        out.write("flows.csv", &flows_to_csv(&[&series]))?;
        println!(
            "{} months from seed {seed}; truth: dep = {} + {} p, adjustment {}",
            args.length, args.beta0, args.beta1, args.alpha1
        );
        return Ok(());
    }

    // choice mode: incidents plus a flow file that reproduces each
    // quarter's interception probability through the real pipeline
    let n = args.quarters.max(1);
    let mut quarter = Quarter::new(2016, 1).expect("valid quarter");
    let mut quarters = Vec::with_capacity(n as usize);
    for i in 0..n {
        let t = if n > 1 { f64::from(i) / f64::from(n - 1) } else { 0.0 };
        quarters.push(QuarterSpec {
            quarter,
            p_interception: args.p_start + (args.p_end - args.p_start) * t,
            n_incidents: args.per_quarter,
        });
        quarter = quarter.succ();
    }
    let spec = ChoiceDgpSpec {
        alpha: BinCoefficients { mid: args.alpha_mid, large: args.alpha_large },
        beta: BinCoefficients { mid: args.beta_mid, large: args.beta_large },
        quarters: quarters.clone(),
        seed,
    };
    let observations = generate_choice_data(&spec).context("generating the choice sample")?;
    out.write("incidents.csv", &synthetic_incident_csv(&observations))?;
    out.write("flows.csv", &synthetic_flow_csv(&quarters, args.route))?;
    println!(
        "{} incidents over {} quarters from seed {seed}; truth: alpha ({}, {}), beta ({}, {})",
        observations.len(),
        quarters.len(),
        args.alpha_mid,
        args.alpha_large,
        args.beta_mid,
        args.beta_large
    );
    Ok(())
}

/// One incident row per drawn choice, dated mid-quarter, with a
/// representative person count for the chosen bin.
fn synthetic_incident_csv(observations: &[ChoiceObservation]) -> String {
    use crosslab_core::choice::SizeBin;
    let mut out = String::from(
        "incident_id,date,departure_country,boat_type,n_people,n_dead,n_vessels,in_operational_area\n",
    );
    for obs in observations {
        let people = match obs.chosen_bin {
            SizeBin::Small => 30,
            SizeBin::Mid => 75,
            SizeBin::Large => 150,
        };
        let mid_month = obs.quarter.months()[1];
        out.push_str(&format!(
            "{},{}-15,Libya,Rubber,{},0,1,false\n",
            obs.incident_id, mid_month, people
        ));
    }
    out
}

/// Three identical months per quarter, scaled so that interceptions over
/// (rescues + interceptions) equals the quarter's target probability to
/// four decimal places.
fn synthetic_flow_csv(quarters: &[QuarterSpec], route: Route) -> String {
    const PERSONS_PER_MONTH: f64 = 10_000.0;
    let mut records = String::from("route,month,n_rescued,n_intercepted,n_dead\n");
    for q in quarters {
        let intercepted = (q.p_interception * PERSONS_PER_MONTH).round() as u32;
        let rescued = PERSONS_PER_MONTH as u32 - intercepted;
        for month in q.quarter.months() {
            records.push_str(&format!("{route},{month},{rescued},{intercepted},0\n"));
        }
    }
    records
}

// -------------------------------------------------------------- coverage --

fn cmd_coverage(g: &Globals, args: &CoverageArgs, out: &mut Outputs) -> Result<()> {
    let flows = load_flows(g)?;
    let incidents = load_incidents(g)?;
    let series = route_series(&flows, args.route)?;
    let points = coverage_diagnostic(series, &incidents).context("computing coverage")?;
    let flagged: Vec<&crosslab_core::series::CoveragePoint> =
        points.iter().filter(|p| p.flagged).collect();
    println!("{} quarters, {} outside the [0.7, 1.1] coverage band", points.len(), flagged.len());
    for p in &flagged {
        println!("  {}: incident persons / arrivals = {:.3}", p.quarter, p.ratio);
    }
    if out.wants(Format::Csv) {
        out.write("coverage.csv", &report::coverage_csv(&points))?;
    }
    Ok(())
}
