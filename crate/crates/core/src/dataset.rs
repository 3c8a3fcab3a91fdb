//! Ingestion and validation of flow-level (route × month person counts) and
//! incident-level (per-detection attributes) delimited text files.
//!
//! Canonical flow columns: `route,month,n_rescued,n_intercepted,n_dead`
//! (month as YYYY-MM). Canonical incident columns: `incident_id,date,
//! departure_country,boat_type,n_people,n_dead,n_vessels,in_operational_area`
//! (date as YYYY-MM-DD, booleans as true/false, blanks meaning absent).
//! A schema mapping lets real-world headers differ from the canonical names.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::time::{Month, MonthRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Route {
    Central,
    Western,
    Eastern,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Central, Route::Western, Route::Eastern];
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Central => "Central",
            Route::Western => "Western",
            Route::Eastern => "Eastern",
        })
    }
}

impl FromStr for Route {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "central" => Ok(Route::Central),
            "western" => Ok(Route::Western),
            "eastern" => Ok(Route::Eastern),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DepartureCountry {
    Libya,
    Tunisia,
    Other,
    Unknown,
}

impl DepartureCountry {
    /// Blank means unknown; any unrecognised country is grouped as Other.
    fn parse_lenient(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "" => DepartureCountry::Unknown,
            "unknown" => DepartureCountry::Unknown,
            "libya" => DepartureCountry::Libya,
            "tunisia" => DepartureCountry::Tunisia,
            _ => DepartureCountry::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoatType {
    Rubber,
    Wooden,
    Other,
    Unknown,
}

impl BoatType {
    fn parse_lenient(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "" => BoatType::Unknown,
            "unknown" => BoatType::Unknown,
            "rubber" => BoatType::Rubber,
            "wooden" => BoatType::Wooden,
            _ => BoatType::Other,
        }
    }
}

/// One route-month of aggregate person counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FlowRecord {
    pub route: Route,
    pub month: Month,
    pub n_rescued: u32,
    pub n_intercepted: u32,
    pub n_dead: u32,
}

impl FlowRecord {
    /// Total persons attempting the crossing that month.
    pub fn n_cross(&self) -> u32 {
        self.n_rescued + self.n_intercepted + self.n_dead
    }
}

/// One detected incident (a boat or group of boats handled together).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidentRecord {
    pub incident_id: String,
    pub date: NaiveDate,
    pub departure_country: DepartureCountry,
    pub boat_type: BoatType,
    pub n_people: Option<u32>,
    pub n_dead: u32,
    pub n_vessels: Option<u32>,
    pub in_operational_area: Option<bool>,
}

/// A validated, gap-free monthly series for one route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSeries {
    route: Route,
    months: Vec<FlowRecord>,
}

impl FlowSeries {
    /// Sorts by month and checks uniqueness, contiguity, and route agreement.
    pub fn new(route: Route, mut records: Vec<FlowRecord>) -> Result<Self, DatasetError> {
        if records.is_empty() {
            return Err(DatasetError::EmptySeries(route));
        }
        records.sort_by_key(|r| r.month);
        for pair in records.windows(2) {
            let gap = pair[1].month.index() - pair[0].month.index();
            if gap == 0 {
                return Err(DatasetError::DuplicateMonth { route, month: pair[0].month });
            }
            if gap > 1 {
                return Err(DatasetError::NonContiguousMonths {
                    route,
                    missing: pair[0].month.succ(),
                });
            }
        }
        if let Some(bad) = records.iter().find(|r| r.route != route) {
            return Err(DatasetError::MixedRoutes { expected: route, found: bad.route });
        }
        Ok(FlowSeries { route, months: records })
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn months(&self) -> &[FlowRecord] {
        &self.months
    }

    pub fn range(&self) -> MonthRange {
        MonthRange::new(self.months[0].month, self.months[self.months.len() - 1].month)
            .expect("validated series is nonempty and ordered")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("missing column {0:?} in header")]
    MissingColumn(String),
    #[error("{route} series skips {missing}; months must be contiguous")]
    NonContiguousMonths { route: Route, missing: Month },
    #[error("negative count in column {column:?} at data row {row}")]
    NegativeCount { row: usize, column: String },
    #[error("{route} series lists {month} more than once")]
    DuplicateMonth { route: Route, month: Month },
    #[error("unrecognised route {value:?} at data row {row}")]
    UnknownRoute { row: usize, value: String },
    #[error("unparseable month {value:?} at data row {row} (expected YYYY-MM)")]
    UnparseableMonth { row: usize, value: String },
    #[error("unparseable count {value:?} in column {column:?} at data row {row}")]
    UnparseableCount { row: usize, column: String, value: String },
    #[error("no rows for route {0}")]
    EmptySeries(Route),
    #[error("series for {expected} contains a {found} row")]
    MixedRoutes { expected: Route, found: Route },
    #[error("failed to read input: {0}")]
    Io(String),
    #[error("malformed delimited text: {0}")]
    Csv(String),
}

impl From<std::io::Error> for DatasetError {
    fn from(e: std::io::Error) -> Self {
        DatasetError::Io(e.to_string())
    }
}

impl From<csv::Error> for DatasetError {
    fn from(e: csv::Error) -> Self {
        DatasetError::Csv(e.to_string())
    }
}

/// Maps canonical flow column roles to the header names actually present.
#[derive(Debug, Clone)]
pub struct FlowSchema {
    pub route: String,
    pub month: String,
    pub n_rescued: String,
    pub n_intercepted: String,
    pub n_dead: String,
    pub delimiter: u8,
}

impl Default for FlowSchema {
    fn default() -> Self {
        FlowSchema {
            route: "route".into(),
            month: "month".into(),
            n_rescued: "n_rescued".into(),
            n_intercepted: "n_intercepted".into(),
            n_dead: "n_dead".into(),
            delimiter: b',',
        }
    }
}

/// Maps canonical incident column roles to the header names actually present.
#[derive(Debug, Clone)]
pub struct IncidentSchema {
    pub incident_id: String,
    pub date: String,
    pub departure_country: String,
    pub boat_type: String,
    pub n_people: String,
    pub n_dead: String,
    pub n_vessels: String,
    pub in_operational_area: String,
    pub delimiter: u8,
}

impl Default for IncidentSchema {
    fn default() -> Self {
        IncidentSchema {
            incident_id: "incident_id".into(),
            date: "date".into(),
            departure_country: "departure_country".into(),
            boat_type: "boat_type".into(),
            n_people: "n_people".into(),
            n_dead: "n_dead".into(),
            n_vessels: "n_vessels".into(),
            in_operational_area: "in_operational_area".into(),
            delimiter: b',',
        }
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, DatasetError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
}

fn parse_count(field: &str, row: usize, column: &str) -> Result<u32, DatasetError> {
    let value: i64 = field.trim().parse().map_err(|_| DatasetError::UnparseableCount {
        row,
        column: column.to_string(),
        value: field.to_string(),
    })?;
    if value < 0 {
        return Err(DatasetError::NegativeCount { row, column: column.to_string() });
    }
    Ok(value as u32)
}

/// Reads a flow CSV and returns one validated series per route present,
/// keyed and iterated in a fixed route order.
pub fn ingest_flows(
    path: &Path,
    schema: &FlowSchema,
) -> Result<BTreeMap<Route, FlowSeries>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) => DatasetError::Io(io.to_string()),
            _ => DatasetError::Csv(e.to_string()),
        })?;
    let headers = reader.headers()?.clone();
    let idx_route = column_index(&headers, &schema.route)?;
    let idx_month = column_index(&headers, &schema.month)?;
    let idx_rescued = column_index(&headers, &schema.n_rescued)?;
    let idx_intercepted = column_index(&headers, &schema.n_intercepted)?;
    let idx_dead = column_index(&headers, &schema.n_dead)?;

    let mut by_route: BTreeMap<Route, Vec<FlowRecord>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1; // 1-based data row, header excluded
        let record = record?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let route: Route = field(idx_route).parse().map_err(|()| DatasetError::UnknownRoute {
            row,
            value: field(idx_route).to_string(),
        })?;
        let month: Month =
            field(idx_month).parse().map_err(|_| DatasetError::UnparseableMonth {
                row,
                value: field(idx_month).to_string(),
            })?;
        let n_rescued = parse_count(field(idx_rescued), row, &schema.n_rescued)?;
        let n_intercepted = parse_count(field(idx_intercepted), row, &schema.n_intercepted)?;
        let n_dead = parse_count(field(idx_dead), row, &schema.n_dead)?;
        by_route.entry(route).or_default().push(FlowRecord {
            route,
            month,
            n_rescued,
            n_intercepted,
            n_dead,
        });
    }

    let mut out = BTreeMap::new();
    for (route, records) in by_route {
        out.insert(route, FlowSeries::new(route, records)?);
    }
    Ok(out)
}

/// Serialises flow series back to the canonical CSV layout. Values written
/// from a just-ingested canonical file are byte-identical to the input.
pub fn flows_to_csv(series: &[&FlowSeries]) -> String {
    let mut out = String::from("route,month,n_rescued,n_intercepted,n_dead\n");
    for s in series {
        for r in s.months() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.route, r.month, r.n_rescued, r.n_intercepted, r.n_dead
            ));
        }
    }
    out
}

/// Row-level ingestion outcome: every input data row is either returned as a
/// record or accounted for in `dropped`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseReport {
    pub rows_read: usize,
    pub dropped: Vec<DroppedRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedRow {
    pub row: usize,
    pub reason: String,
}

fn parse_optional_count(field: &str) -> Option<u32> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        return None;
    }
    // A malformed optional field degrades to absent rather than killing the row.
    trimmed.parse::<i64>().ok().filter(|v| *v >= 0).map(|v| v as u32)
}

fn parse_optional_bool(field: &str) -> Option<bool> {
    match field.trim().to_ascii_lowercase().as_str() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Reads an incident CSV. Rows with unusable mandatory fields are dropped
/// and recorded in the report; optional fields degrade to absent.
pub fn ingest_incidents(
    path: &Path,
    schema: &IncidentSchema,
) -> Result<(Vec<IncidentRecord>, ParseReport), DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) => DatasetError::Io(io.to_string()),
            _ => DatasetError::Csv(e.to_string()),
        })?;
    let headers = reader.headers()?.clone();
    let idx_id = column_index(&headers, &schema.incident_id)?;
    let idx_date = column_index(&headers, &schema.date)?;
    let idx_departure = column_index(&headers, &schema.departure_country)?;
    let idx_boat = column_index(&headers, &schema.boat_type)?;
    let idx_people = column_index(&headers, &schema.n_people)?;
    let idx_dead = column_index(&headers, &schema.n_dead)?;
    let idx_vessels = column_index(&headers, &schema.n_vessels)?;
    let idx_area = column_index(&headers, &schema.in_operational_area)?;

    let mut records = Vec::new();
    let mut report = ParseReport::default();
    let mut seen_ids: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        report.rows_read += 1;
        let record = record?;
        let field = |idx: usize| record.get(idx).unwrap_or("");

        let date = match NaiveDate::parse_from_str(field(idx_date).trim(), "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                report.dropped.push(DroppedRow {
                    row,
                    reason: format!("unparseable date {:?}", field(idx_date)),
                });
                continue;
            }
        };
        let n_dead = match field(idx_dead).trim() {
            "" => 0, // no deaths reported
            raw => match raw.parse::<i64>() {
                Ok(v) if v >= 0 => v as u32,
                _ => {
                    report.dropped.push(DroppedRow {
                        row,
                        reason: format!("unusable n_dead {:?}", raw),
                    });
                    continue;
                }
            },
        };
        let n_people = parse_optional_count(field(idx_people));
        if let Some(p) = n_people {
            if n_dead > p {
                report.dropped.push(DroppedRow {
                    row,
                    reason: format!("n_dead {} exceeds n_people {}", n_dead, p),
                });
                continue;
            }
        }
        // zero vessels is as unusable as a blank
        let n_vessels = parse_optional_count(field(idx_vessels)).filter(|v| *v > 0);

        let incident_id = field(idx_id).trim().to_string();
        if !incident_id.is_empty() && !seen_ids.insert(incident_id.clone()) {
            report
                .warnings
                .push(format!("duplicate incident_id {:?} at data row {}", incident_id, row));
        }

        records.push(IncidentRecord {
            incident_id,
            date,
            departure_country: DepartureCountry::parse_lenient(field(idx_departure)),
            boat_type: BoatType::parse_lenient(field(idx_boat)),
            n_people,
            n_dead,
            n_vessels,
            in_operational_area: parse_optional_bool(field(idx_area)),
        });
    }
    Ok((records, report))
}

/// Restricts incidents to the estimation sample for the boat-size model:
/// dated within `window`, rubber boats, with both persons and vessel counts
/// recorded. Order is preserved and the filter is idempotent.
pub fn filter_choice_sample(
    records: &[IncidentRecord],
    window: &RangeInclusive<NaiveDate>,
) -> Vec<IncidentRecord> {
    records
        .iter()
        .filter(|r| {
            window.contains(&r.date)
                && r.boat_type == BoatType::Rubber
                && r.n_people.is_some()
                && r.n_vessels.is_some()
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn month(s: &str) -> Month {
        s.parse().unwrap()
    }

    #[test]
    fn well_formed_flow_file_round_trips() {
        let mut csv = String::from("route,month,n_rescued,n_intercepted,n_dead\n");
        let start = month("2016-01");
        for i in 0..48 {
            let m = Month::from_index(start.index() + i);
            csv.push_str(&format!("Central,{},{},{},{}\n", m, 1000 + i, 200, 30));
        }
        let f = write_temp(&csv);
        let flows = ingest_flows(f.path(), &FlowSchema::default()).unwrap();
        let central = &flows[&Route::Central];
        assert_eq!(central.months().len(), 48);
        assert_eq!(central.range().to_string(), "2016-01:2019-12");
        assert_eq!(central.months()[0].n_cross(), 1230);

        // serialisation reproduces the canonical input byte for byte
        assert_eq!(flows_to_csv(&[central]), csv);
    }

    #[test]
    fn flow_gap_is_reported_at_the_missing_month() {
        let csv = "route,month,n_rescued,n_intercepted,n_dead\n\
                   Central,2016-01,10,1,0\n\
                   Central,2016-02,11,1,0\n\
                   Central,2016-04,12,1,0\n";
        let f = write_temp(csv);
        let err = ingest_flows(f.path(), &FlowSchema::default()).unwrap_err();
        assert_eq!(
            err,
            DatasetError::NonContiguousMonths {
                route: Route::Central,
                missing: month("2016-03")
            }
        );
    }

    #[test]
    fn negative_and_malformed_counts_are_rejected() {
        let csv = "route,month,n_rescued,n_intercepted,n_dead\n\
                   Central,2016-01,10,1,-1\n";
        let f = write_temp(csv);
        assert_eq!(
            ingest_flows(f.path(), &FlowSchema::default()).unwrap_err(),
            DatasetError::NegativeCount { row: 1, column: "n_dead".into() }
        );

        let csv = "route,month,n_rescued,n_intercepted,n_dead\n\
                   Central,2016-01,ten,1,0\n";
        let f = write_temp(csv);
        assert!(matches!(
            ingest_flows(f.path(), &FlowSchema::default()).unwrap_err(),
            DatasetError::UnparseableCount { row: 1, .. }
        ));
    }

    #[test]
    fn duplicate_month_and_unknown_route_are_rejected() {
        let csv = "route,month,n_rescued,n_intercepted,n_dead\n\
                   Western,2016-01,10,1,0\n\
                   Western,2016-01,11,1,0\n";
        let f = write_temp(csv);
        assert_eq!(
            ingest_flows(f.path(), &FlowSchema::default()).unwrap_err(),
            DatasetError::DuplicateMonth { route: Route::Western, month: month("2016-01") }
        );

        let csv = "route,month,n_rescued,n_intercepted,n_dead\n\
                   Atlantic,2016-01,10,1,0\n";
        let f = write_temp(csv);
        assert_eq!(
            ingest_flows(f.path(), &FlowSchema::default()).unwrap_err(),
            DatasetError::UnknownRoute { row: 1, value: "Atlantic".into() }
        );
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "route,month,n_rescued,n_dead\nCentral,2016-01,10,0\n";
        let f = write_temp(csv);
        assert_eq!(
            ingest_flows(f.path(), &FlowSchema::default()).unwrap_err(),
            DatasetError::MissingColumn("n_intercepted".into())
        );
    }

    #[test]
    fn schema_mapping_and_tab_delimiter_work() {
        let csv = "corridor\tperiod\trescued\tintercepted\tdead\n\
                   Central\t2016-01\t10\t1\t0\n";
        let f = write_temp(csv);
        let schema = FlowSchema {
            route: "corridor".into(),
            month: "period".into(),
            n_rescued: "rescued".into(),
            n_intercepted: "intercepted".into(),
            n_dead: "dead".into(),
            delimiter: b'\t',
        };
        let flows = ingest_flows(f.path(), &schema).unwrap();
        assert_eq!(flows[&Route::Central].months()[0].n_rescued, 10);
    }

    const INCIDENT_HEADER: &str = "incident_id,date,departure_country,boat_type,n_people,n_dead,n_vessels,in_operational_area\n";

    #[test]
    fn incident_rows_parse_with_optional_fields() {
        let csv = format!(
            "{INCIDENT_HEADER}\
             A1,2017-03-05,Libya,Rubber,120,2,1,true\n\
             A2,2017-03-06,Tunisia,Wooden,,0,,\n\
             A3,2017-03-07,,fishing boat,40,0,2,false\n"
        );
        let f = write_temp(&csv);
        let (records, report) = ingest_incidents(f.path(), &IncidentSchema::default()).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(report.rows_read, 3);
        assert!(report.dropped.is_empty());

        assert_eq!(records[0].n_people, Some(120));
        assert_eq!(records[0].in_operational_area, Some(true));
        assert_eq!(records[1].n_people, None);
        assert_eq!(records[1].n_vessels, None);
        assert_eq!(records[1].in_operational_area, None);
        assert_eq!(records[2].departure_country, DepartureCountry::Unknown);
        assert_eq!(records[2].boat_type, BoatType::Other);
    }

    #[test]
    fn bad_incident_rows_are_dropped_and_counted() {
        let csv = format!(
            "{INCIDENT_HEADER}\
             A1,2017-03-05,Libya,Rubber,120,2,1,true\n\
             A2,not-a-date,Libya,Rubber,120,2,1,true\n\
             A3,2017-03-07,Libya,Rubber,10,25,1,true\n"
        );
        let f = write_temp(&csv);
        let (records, report) = ingest_incidents(f.path(), &IncidentSchema::default()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(report.rows_read, 3);
        assert_eq!(report.dropped.len(), 2);
        assert_eq!(records.len() + report.dropped.len(), report.rows_read);
        assert_eq!(report.dropped[0].row, 2);
        assert!(report.dropped[1].reason.contains("exceeds"));
    }

    #[test]
    fn empty_incident_file_gives_empty_list_and_clean_report() {
        let f = write_temp(INCIDENT_HEADER);
        let (records, report) = ingest_incidents(f.path(), &IncidentSchema::default()).unwrap();
        assert!(records.is_empty());
        assert_eq!(report.rows_read, 0);
        assert!(report.dropped.is_empty());
    }

    #[test]
    fn duplicate_incident_id_warns_but_keeps_both_rows() {
        let csv = format!(
            "{INCIDENT_HEADER}\
             A1,2017-03-05,Libya,Rubber,120,2,1,true\n\
             A1,2017-03-05,Libya,Rubber,80,0,1,true\n"
        );
        let f = write_temp(&csv);
        let (records, report) = ingest_incidents(f.path(), &IncidentSchema::default()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("A1"));
    }

    fn incident(date: &str, boat: BoatType, people: Option<u32>, vessels: Option<u32>) -> IncidentRecord {
        IncidentRecord {
            incident_id: String::new(),
            date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            departure_country: DepartureCountry::Libya,
            boat_type: boat,
            n_people: people,
            n_dead: 0,
            n_vessels: vessels,
            in_operational_area: None,
        }
    }

    #[test]
    fn choice_sample_filter_applies_all_three_conditions() {
        let window = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap()
            ..=NaiveDate::from_ymd_opt(2019, 12, 31).unwrap();
        let records = vec![
            incident("2015-12-31", BoatType::Rubber, Some(100), Some(1)), // before window
            incident("2017-06-01", BoatType::Wooden, Some(100), Some(1)), // wrong boat
            incident("2017-06-02", BoatType::Rubber, None, Some(1)),      // no people
            incident("2017-06-03", BoatType::Rubber, Some(100), None),    // no vessels
            incident("2017-06-04", BoatType::Rubber, Some(100), Some(1)), // kept
            incident("2019-12-31", BoatType::Rubber, Some(50), Some(2)),  // boundary kept
        ];
        let kept = filter_choice_sample(&records, &window);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].date.to_string(), "2017-06-04");

        // idempotent
        let again = filter_choice_sample(&kept, &window);
        assert_eq!(again, kept);
    }
}
