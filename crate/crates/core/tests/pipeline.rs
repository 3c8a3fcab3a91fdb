//! End-to-end round trips: synthetic data out through the CSV schemas,
//! back in through ingestion, and on to estimation. The fits on ingested
//! data must match fits on the in-memory originals.

use std::io::Write as _;

use chrono::NaiveDate;
use crosslab_core::choice::{
    fit_conditional_logit, observations_from_incidents, SizeBin, Weighting,
};
use crosslab_core::dataset::{
    filter_choice_sample, flows_to_csv, ingest_flows, ingest_incidents, FlowSchema,
    IncidentSchema, Route,
};
use crosslab_core::econ::{fit_ecm, EcmSpec};
use crosslab_core::series::{derive_series, CapPolicy, QuarterPoint};
use crosslab_core::synth::{
    generate_choice_data, generate_ecm_data, ChoiceDgpSpec, EcmDgpSpec, QuarterSpec,
    RescueProcess,
};
use crosslab_core::time::Quarter;
use crosslab_core::choice::BinCoefficients;

fn write_temp(content: &str, name: &str) -> tempfile::TempPath {
    let mut file = tempfile::Builder::new().suffix(name).tempfile().unwrap();
    file.write_all(content.as_bytes()).unwrap();
    file.into_temp_path()
}

#[test]
fn flow_csv_round_trip_preserves_the_fitted_model() {
    let spec = EcmDgpSpec {
        beta0: 5.0,
        beta1: 10.0,
        alpha0: 0.0,
        alpha1: -0.45,
        alpha2: -2.0,
        rescue_process: RescueProcess::Ar1Clamped {
            mean: 0.5,
            rho: 0.8,
            innovation_sd: 0.04,
            start: 0.5,
        },
        noise_sd: 0.3,
        length: 48,
        seed: 424_242,
    };
    let sample = generate_ecm_data(&spec).unwrap();
    let series = sample.to_flow_series(Route::Central).unwrap();
    let csv_text = flows_to_csv(&[&series]);
    let path = write_temp(&csv_text, "flows.csv");

    let ingested = ingest_flows(path.as_ref(), &FlowSchema::default()).unwrap();
    let central = &ingested[&Route::Central];

    // ingestion reproduces the table byte-for-byte
    assert_eq!(flows_to_csv(&[central]), csv_text);

    let direct = derive_series(&series, CapPolicy::TenNinthsOfMax).unwrap();
    let round_tripped = derive_series(central, CapPolicy::TenNinthsOfMax).unwrap();
    assert_eq!(direct, round_tripped);

    let fit_direct = fit_ecm(&direct, &direct, EcmSpec::headline()).unwrap();
    let fit_round = fit_ecm(&round_tripped, &round_tripped, EcmSpec::headline()).unwrap();
    assert_eq!(fit_direct.alpha1, fit_round.alpha1);
    assert_eq!(fit_direct.beta1(), fit_round.beta1());
    assert_eq!(fit_direct.stage2.n_obs, 46); // 48 months, differenced, one lag
}

#[test]
fn incident_csv_round_trip_preserves_the_choice_fit() {
    let quarters: Vec<QuarterSpec> = [0.08, 0.15, 0.24, 0.33, 0.45, 0.55, 0.64, 0.72]
        .into_iter()
        .enumerate()
        .map(|(i, p)| QuarterSpec {
            quarter: Quarter::new(2016 + i as i32 / 4, i as u32 % 4 + 1).unwrap(),
            p_interception: p,
            n_incidents: 40,
        })
        .collect();
    let spec = ChoiceDgpSpec {
        alpha: BinCoefficients { mid: 1.5, large: 3.5 },
        beta: BinCoefficients { mid: -3.0, large: -6.0 },
        quarters: quarters.clone(),
        seed: 99,
    };
    let generated = generate_choice_data(&spec).unwrap();

    // render the drawn choices as an incident table in the canonical schema
    let mut csv_text = String::from(
        "incident_id,date,departure_country,boat_type,n_people,n_dead,n_vessels,in_operational_area\n",
    );
    for obs in &generated {
        let people = match obs.chosen_bin {
            SizeBin::Small => 30,
            SizeBin::Mid => 75,
            SizeBin::Large => 150,
        };
        let month = obs.quarter.first_month();
        csv_text.push_str(&format!(
            "{},{}-15,Libya,Rubber,{},0,1,true\n",
            obs.incident_id, month, people
        ));
    }
    let path = write_temp(&csv_text, "incidents.csv");

    let (records, report) = ingest_incidents(path.as_ref(), &IncidentSchema::default()).unwrap();
    assert_eq!(report.rows_read, generated.len());
    assert!(report.dropped.is_empty());

    let window = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap()
        ..=NaiveDate::from_ymd_opt(2017, 12, 31).unwrap();
    let sample = filter_choice_sample(&records, &window);
    assert_eq!(sample.len(), generated.len());

    let quarter_table: Vec<QuarterPoint> = quarters
        .iter()
        .map(|q| QuarterPoint {
            quarter: q.quarter,
            share_libya_rescue: 1.0,
            n_interception_libya: 0,
            n_rescue_total: 0,
            p_interception: q.p_interception,
        })
        .collect();
    let rebuilt = observations_from_incidents(&sample, &quarter_table).unwrap();
    assert_eq!(rebuilt.len(), generated.len());

    // binning the person counts recovers every original choice
    for (a, b) in rebuilt.iter().zip(&generated) {
        assert_eq!(a.chosen_bin, b.chosen_bin);
        assert_eq!(a.quarter, b.quarter);
        assert_eq!(a.p_interception, b.p_interception);
    }

    let fit_direct = fit_conditional_logit(&generated, Weighting::Frequency).unwrap();
    let fit_round = fit_conditional_logit(&rebuilt, Weighting::Frequency).unwrap();
    assert!((fit_direct.alpha.mid - fit_round.alpha.mid).abs() < 1e-12);
    assert!((fit_direct.alpha.large - fit_round.alpha.large).abs() < 1e-12);
    assert!((fit_direct.beta.mid - fit_round.beta.mid).abs() < 1e-12);
    assert!((fit_direct.beta.large - fit_round.beta.large).abs() < 1e-12);
    assert!((fit_direct.log_likelihood - fit_round.log_likelihood).abs() < 1e-10);
}
