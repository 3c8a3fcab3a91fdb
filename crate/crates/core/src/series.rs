//! Derived monthly and quarterly quantities feeding the estimators:
//! crossing totals, rescue probabilities, log and log-odds transforms,
//! quarterly interception probabilities, and coverage diagnostics.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{DepartureCountry, FlowSeries, IncidentRecord, Route};
use crate::time::{Month, Quarter};

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("{0} has zero attempted crossings; rescue probability undefined")]
    ZeroCrossingMonth(Month),
    #[error("{0} has no usable incidents (known departure and person count)")]
    EmptyQuarter(Quarter),
    #[error("{0} has a zero denominator; probability undefined")]
    ZeroDenominator(Quarter),
    #[error("potential-population cap {cap} does not exceed max observed crossings {max_observed}")]
    CapNotAboveMax { cap: f64, max_observed: u32 },
}

/// How to pick the potential monthly population M used by the log-odds
/// transform. The default scales the route's own busiest month by 10/9,
/// i.e. the observed maximum is taken to be 90% of the potential pool.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CapPolicy {
    #[default]
    TenNinthsOfMax,
    Fixed(f64),
}

/// One month of derived regression inputs for a route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedPoint {
    pub month: Month,
    /// Persons attempting the crossing, in thousands.
    pub n_cross_thousands: f64,
    /// Share of attempted crossers who were rescued.
    pub p_rescue: f64,
    /// ln(crossings in thousands).
    pub log_n_cross: f64,
    /// ln(N / (M − N)) against the potential population cap.
    pub log_odds: f64,
    /// Raw person count, kept for reporting and backtesting.
    #[serde(skip)]
    pub n_cross: f64,
    /// The cap M (persons) used for this route's log-odds.
    #[serde(skip)]
    pub m: f64,
}

/// Computes the full derived series for one route.
pub fn derive_series(
    flows: &FlowSeries,
    cap_policy: CapPolicy,
) -> Result<Vec<DerivedPoint>, SeriesError> {
    let max_observed = flows.months().iter().map(|r| r.n_cross()).max().unwrap_or(0);
    if let Some(zero) = flows.months().iter().find(|r| r.n_cross() == 0) {
        return Err(SeriesError::ZeroCrossingMonth(zero.month));
    }
    let m = match cap_policy {
        CapPolicy::TenNinthsOfMax => f64::from(max_observed) * 10.0 / 9.0,
        CapPolicy::Fixed(cap) => {
            if cap <= f64::from(max_observed) {
                return Err(SeriesError::CapNotAboveMax { cap, max_observed });
            }
            cap
        }
    };

    Ok(flows
        .months()
        .iter()
        .map(|r| {
            let n = f64::from(r.n_cross());
            DerivedPoint {
                month: r.month,
                n_cross_thousands: n / 1000.0,
                p_rescue: f64::from(r.n_rescued) / n,
                log_n_cross: (n / 1000.0).ln(),
                log_odds: (n / (m - n)).ln(),
                n_cross: n,
                m,
            }
        })
        .collect())
}

/// One quarter of the reconstructed interception-probability series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarterPoint {
    pub quarter: Quarter,
    /// Person-weighted share of incidents departing Libya (unknowns excluded).
    pub share_libya_rescue: f64,
    /// Interceptions on the route that quarter, persons.
    pub n_interception_libya: u32,
    /// Rescues on the route that quarter, persons.
    pub n_rescue_total: u32,
    /// N_int / (share × N_rescue + N_int).
    pub p_interception: f64,
}

/// Complete calendar quarters covered by the flow series, in order.
fn complete_quarters(flows: &FlowSeries) -> Vec<Quarter> {
    let range = flows.range();
    let mut quarters = Vec::new();
    let mut q = range.start.quarter();
    loop {
        let months = q.months();
        if months[0] > range.end {
            break;
        }
        if months.iter().all(|m| range.contains(*m)) {
            quarters.push(q);
        }
        q = q.succ();
    }
    quarters
}

/// Reconstructs the quarterly probability that a departing boat is
/// intercepted rather than rescued: incident person-shares identify how many
/// route rescues departed the origin country, and interceptions are taken
/// from the flow series.
pub fn interception_series(
    flows: &FlowSeries,
    incidents: &[IncidentRecord],
) -> Result<Vec<QuarterPoint>, SeriesError> {
    // person-weighted Libya share per quarter, unknown departures excluded
    let mut libya: BTreeMap<Quarter, f64> = BTreeMap::new();
    let mut total: BTreeMap<Quarter, f64> = BTreeMap::new();
    for inc in incidents {
        let (Some(people), false) =
            (inc.n_people, inc.departure_country == DepartureCountry::Unknown)
        else {
            continue;
        };
        let month = Month::new(
            chrono::Datelike::year(&inc.date),
            chrono::Datelike::month(&inc.date),
        )
        .expect("chrono months are 1-12");
        let q = month.quarter();
        *total.entry(q).or_insert(0.0) += f64::from(people);
        if inc.departure_country == DepartureCountry::Libya {
            *libya.entry(q).or_insert(0.0) += f64::from(people);
        }
    }

    let mut out = Vec::new();
    for q in complete_quarters(flows) {
        let persons = total.get(&q).copied().unwrap_or(0.0);
        if persons <= 0.0 {
            return Err(SeriesError::EmptyQuarter(q));
        }
        let share = libya.get(&q).copied().unwrap_or(0.0) / persons;

        let (mut n_rescue, mut n_int) = (0u32, 0u32);
        for r in flows.months() {
            if r.month.quarter() == q {
                n_rescue += r.n_rescued;
                n_int += r.n_intercepted;
            }
        }
        let denom = share * f64::from(n_rescue) + f64::from(n_int);
        if denom <= 0.0 {
            return Err(SeriesError::ZeroDenominator(q));
        }
        out.push(QuarterPoint {
            quarter: q,
            share_libya_rescue: share,
            n_interception_libya: n_int,
            n_rescue_total: n_rescue,
            p_interception: f64::from(n_int) / denom,
        });
    }
    Ok(out)
}

/// Quarterly ratio of incident-recorded persons to flow arrivals, with a
/// flag when the ratio leaves the plausible [0.7, 1.1] band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub quarter: Quarter,
    pub incident_persons: f64,
    pub flow_arrivals: f64,
    pub ratio: f64,
    pub flagged: bool,
}

/// Compares incident person-counts against flow arrivals per quarter as a
/// completeness check on the incident data.
pub fn coverage_diagnostic(
    flows: &FlowSeries,
    incidents: &[IncidentRecord],
) -> Result<Vec<CoveragePoint>, SeriesError> {
    let mut persons: BTreeMap<Quarter, f64> = BTreeMap::new();
    for inc in incidents {
        if let Some(p) = inc.n_people {
            let month = Month::new(
                chrono::Datelike::year(&inc.date),
                chrono::Datelike::month(&inc.date),
            )
            .expect("chrono months are 1-12");
            *persons.entry(month.quarter()).or_insert(0.0) += f64::from(p);
        }
    }

    let mut out = Vec::new();
    for q in complete_quarters(flows) {
        let arrivals: f64 = flows
            .months()
            .iter()
            .filter(|r| r.month.quarter() == q)
            .map(|r| f64::from(r.n_rescued))
            .sum();
        if arrivals <= 0.0 {
            return Err(SeriesError::ZeroDenominator(q));
        }
        let incident_persons = persons.get(&q).copied().unwrap_or(0.0);
        let ratio = incident_persons / arrivals;
        out.push(CoveragePoint {
            quarter: q,
            incident_persons,
            flow_arrivals: arrivals,
            ratio,
            flagged: !(0.7..=1.1).contains(&ratio),
        });
    }
    Ok(out)
}

/// One nationality-route-month arrival count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalCount {
    pub nationality: String,
    pub route: Route,
    pub month: Month,
    pub count: u32,
}

/// Shares over the three routes, in Central/Western/Eastern order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteShares {
    pub central: f64,
    pub western: f64,
    pub eastern: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NationalityMonthShare {
    pub nationality: String,
    pub month: Month,
    /// Absent when the nationality-month has zero arrivals on all routes.
    pub shares: Option<RouteShares>,
}

/// Monthly route shares per nationality; duplicate cells are summed.
pub fn route_share_by_nationality(counts: &[ArrivalCount]) -> Vec<NationalityMonthShare> {
    let mut cells: BTreeMap<(String, Month), [f64; 3]> = BTreeMap::new();
    for c in counts {
        let entry = cells.entry((c.nationality.clone(), c.month)).or_insert([0.0; 3]);
        let slot = match c.route {
            Route::Central => 0,
            Route::Western => 1,
            Route::Eastern => 2,
        };
        entry[slot] += f64::from(c.count);
    }
    cells
        .into_iter()
        .map(|((nationality, month), totals)| {
            let sum: f64 = totals.iter().sum();
            let shares = (sum > 0.0).then(|| RouteShares {
                central: totals[0] / sum,
                western: totals[1] / sum,
                eastern: totals[2] / sum,
            });
            NationalityMonthShare { nationality, month, shares }
        })
        .collect()
}
