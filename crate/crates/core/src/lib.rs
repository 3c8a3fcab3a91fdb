//! Quantitative toolkit for studying irregular sea-crossing dynamics:
//! derived monthly flow series, error-correction models of departures on
//! rescue probability, a discrete-choice model of smuggler boat sizing,
//! and the synthetic-data generators used to validate all of the above.

pub mod choice;
pub mod dataset;
pub mod econ;
pub mod report;
pub mod series;
pub mod stats;
pub mod synth;
pub mod time;

pub use time::{Month, MonthRange, Quarter};
