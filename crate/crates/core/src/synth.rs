//! Synthetic-data generators and brute-force oracles.
//!
//! Every estimator in this crate can be exercised without field data: the
//! generators here simulate from the same equations the estimators fit, and
//! the grid-search oracle maximizes the logit likelihood by exhaustion so
//! Newton results can be cross-checked against something dumber.
//!
//! All randomness flows through an explicitly seeded ChaCha20 stream;
//! repeated calls with the same spec are bit-identical and no test touches
//! system entropy.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::Serialize;
use thiserror::Error;

use crate::choice::{choice_probabilities, BinCoefficients, ChoiceObservation, SizeBin};
use crate::dataset::{FlowRecord, FlowSeries, Route};
use crate::time::{Month, Quarter};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("adjustment coefficient {0} is outside (-2, 0); the recursion would not settle")]
    UnstableSpec(f64),
    #[error("noise standard deviation {0} must be nonnegative and finite")]
    InvalidNoiseSd(f64),
    #[error("sample length must be at least 1 month")]
    EmptyLength,
    #[error("interception probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("{0} requests zero incidents")]
    ZeroIncidents(Quarter),
    #[error("simulated crossings for {month} round to {persons}; cannot form a flow table")]
    NonPositiveCrossings { month: Month, persons: i64 },
}

/// Driving process for the monthly rescue probability. Values are clamped
/// to [0.01, 0.99], which keeps every derived transform finite just as the
/// 10/9 crossings cap does for the observed series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RescueProcess {
    RandomWalkClamped { start: f64, drift: f64, step_sd: f64 },
    Ar1Clamped { mean: f64, rho: f64, innovation_sd: f64, start: f64 },
}

const RESCUE_FLOOR: f64 = 0.01;
const RESCUE_CEIL: f64 = 0.99;
const BURN_IN: usize = 50;

/// Generative counterpart of the two-equation crossing model: a long-run
/// level `beta0 + beta1·p` and an adjustment equation with coefficient
/// `alpha1` on the lagged gap, `alpha2` on the lagged rescue change, and
/// Gaussian innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EcmDgpSpec {
    pub beta0: f64,
    pub beta1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub rescue_process: RescueProcess,
    pub noise_sd: f64,
    /// Number of months kept after the 50-month burn-in.
    pub length: usize,
    pub seed: u64,
}

/// A simulated monthly panel, aligned so index 0 is `start`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcmSample {
    pub start: Month,
    pub n_cross_thousands: Vec<f64>,
    pub p_rescue: Vec<f64>,
}

impl EcmSample {
    /// Rounds the sample into integer flow counts (`rescued = p·N`, the
    /// rest intercepted, none dead) so it can drive the ingestion pipeline.
    /// Fails if any month's crossings round below one person.
    pub fn to_flow_series(&self, route: Route) -> Result<FlowSeries, SynthError> {
        let mut records = Vec::with_capacity(self.p_rescue.len());
        let mut month = self.start;
        for (thousands, p) in self.n_cross_thousands.iter().zip(&self.p_rescue) {
            let persons = (thousands * 1000.0).round() as i64;
            if persons < 1 {
                return Err(SynthError::NonPositiveCrossings { month, persons });
            }
            let n_rescued = ((p * persons as f64).round() as i64).clamp(0, persons) as u32;
            records.push(FlowRecord {
                route,
                month,
                n_rescued,
                n_intercepted: persons as u32 - n_rescued,
                n_dead: 0,
            });
            month = month.succ();
        }
        Ok(FlowSeries::new(route, records).expect("synthetic months are contiguous"))
    }
}

fn clamp_rescue(p: f64) -> f64 {
    p.clamp(RESCUE_FLOOR, RESCUE_CEIL)
}

/// Simulates the rescue path and the crossing level it drives, discarding
/// the first 50 burn-in months. Deterministic given the spec's seed.
pub fn generate_ecm_data(spec: &EcmDgpSpec) -> Result<EcmSample, SynthError> {
    if !(-2.0 < spec.alpha1 && spec.alpha1 < 0.0) {
        return Err(SynthError::UnstableSpec(spec.alpha1));
    }
    if !(spec.noise_sd >= 0.0 && spec.noise_sd.is_finite()) {
        return Err(SynthError::InvalidNoiseSd(spec.noise_sd));
    }
    if spec.length == 0 {
        return Err(SynthError::EmptyLength);
    }

    let total = BURN_IN + spec.length;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let standard = Normal::new(0.0, 1.0).expect("unit normal");

    // draw the full rescue path first, then the adjustment noise, so the
    // stream layout is stable under parameter changes
    let mut p = Vec::with_capacity(total);
    match spec.rescue_process {
        RescueProcess::RandomWalkClamped { start, drift, step_sd } => {
            p.push(clamp_rescue(start));
            for t in 1..total {
                let z: f64 = standard.sample(&mut rng);
                p.push(clamp_rescue(p[t - 1] + drift + step_sd * z));
            }
        }
        RescueProcess::Ar1Clamped { mean, rho, innovation_sd, start } => {
            p.push(clamp_rescue(start));
            for t in 1..total {
                let z: f64 = standard.sample(&mut rng);
                p.push(clamp_rescue(mean + rho * (p[t - 1] - mean) + innovation_sd * z));
            }
        }
    }

    // start on the long-run line and let the adjustment equation move it
    let mut dep = Vec::with_capacity(total);
    dep.push(spec.beta0 + spec.beta1 * p[0]);
    for t in 1..total {
        let gap = dep[t - 1] - spec.beta0 - spec.beta1 * p[t - 1];
        let rescue_change_lag = if t >= 2 { p[t - 1] - p[t - 2] } else { 0.0 };
        let z: f64 = standard.sample(&mut rng);
        let delta =
            spec.alpha0 + spec.alpha1 * gap + spec.alpha2 * rescue_change_lag + spec.noise_sd * z;
        dep.push(dep[t - 1] + delta);
    }

    Ok(EcmSample {
        start: Month::new(2015, 1).expect("fixed origin"),
        n_cross_thousands: dep.split_off(BURN_IN),
        p_rescue: p.split_off(BURN_IN),
    })
}

/// One quarter of the choice DGP: every incident in the quarter faces the
/// same interception probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarterSpec {
    pub quarter: Quarter,
    pub p_interception: f64,
    pub n_incidents: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceDgpSpec {
    pub alpha: BinCoefficients,
    pub beta: BinCoefficients,
    pub quarters: Vec<QuarterSpec>,
    pub seed: u64,
}

/// Draws each incident's size bin from the logit probabilities at its
/// quarter's interception level. Deterministic given the spec's seed.
pub fn generate_choice_data(spec: &ChoiceDgpSpec) -> Result<Vec<ChoiceObservation>, SynthError> {
    for q in &spec.quarters {
        if !(0.0..=1.0).contains(&q.p_interception) {
            return Err(SynthError::BadProbability(q.p_interception));
        }
        if q.n_incidents == 0 {
            return Err(SynthError::ZeroIncidents(q.quarter));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let unit = Uniform::new(0.0f64, 1.0).expect("unit interval");
    let mut out = Vec::new();
    for q in &spec.quarters {
        let shares = choice_probabilities(spec.alpha, spec.beta, q.p_interception);
        for k in 0..q.n_incidents {
            let u: f64 = unit.sample(&mut rng);
            let chosen_bin = if u < shares[0] {
                SizeBin::Small
            } else if u < shares[0] + shares[1] {
                SizeBin::Mid
            } else {
                SizeBin::Large
            };
            out.push(ChoiceObservation {
                incident_id: format!("synth-{}-{}", q.quarter, k),
                quarter: q.quarter,
                chosen_bin,
                p_interception: q.p_interception,
                weight: 1.0,
            });
        }
    }
    Ok(out)
}

/// Axis for the exhaustive grid: `min, min+step, …, max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridSpec {
    fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step).round() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub alpha_mid: f64,
    pub alpha_large: f64,
    pub beta_mid: f64,
    pub beta_large: f64,
    pub log_likelihood: f64,
    /// Cleared when other grid points tie the maximum (an identification
    /// ridge, e.g. a single interception level).
    pub unique: bool,
    /// Set when any argmax coordinate sits on the grid boundary
    /// (the likelihood wants to leave the box, e.g. under separation).
    pub at_bound: bool,
}

/// Exhaustively maximizes the weighted log-likelihood over the 4-D grid.
/// Slow by design: this is the oracle the Newton path is audited against.
pub fn brute_force_logit_mle(
    observations: &[ChoiceObservation],
    grid: GridSpec,
) -> GridSearchResult {
    // collapse to weighted bin counts per distinct interception level;
    // the likelihood depends on the data only through these
    let mut levels: Vec<f64> = Vec::new();
    let mut counts: Vec<[f64; 3]> = Vec::new();
    for obs in observations {
        let idx = match levels.iter().position(|&p| p == obs.p_interception) {
            Some(i) => i,
            None => {
                levels.push(obs.p_interception);
                counts.push([0.0; 3]);
                levels.len() - 1
            }
        };
        let bin = match obs.chosen_bin {
            SizeBin::Small => 0,
            SizeBin::Mid => 1,
            SizeBin::Large => 2,
        };
        counts[idx][bin] += obs.weight;
    }
    let totals: Vec<f64> = counts.iter().map(|c| c[0] + c[1] + c[2]).collect();

    let axis = grid.values();
    // cache exp(a + b·p) for every (a, b) pair and level; the same table
    // serves the Mid and Large axes
    let n_axis = axis.len();
    let n_levels = levels.len();
    let mut exp_v = vec![0.0f64; n_axis * n_axis * n_levels];
    let mut v = vec![0.0f64; n_axis * n_axis * n_levels];
    for (ai, &a) in axis.iter().enumerate() {
        for (bi, &b) in axis.iter().enumerate() {
            for (li, &p) in levels.iter().enumerate() {
                let util = a + b * p;
                let slot = (ai * n_axis + bi) * n_levels + li;
                v[slot] = util;
                exp_v[slot] = util.exp();
            }
        }
    }

    let mut best = f64::NEG_INFINITY;
    let mut best_point = [0.0f64; 4];
    let mut ties = 0usize;
    let mut at_bound = false;
    let is_edge = |val: f64| val == grid.min || val == grid.max;

    for (mi, &alpha_mid) in axis.iter().enumerate() {
        for (mj, &beta_mid) in axis.iter().enumerate() {
            let mid_base = (mi * n_axis + mj) * n_levels;
            for (li, &alpha_large) in axis.iter().enumerate() {
                for (lj, &beta_large) in axis.iter().enumerate() {
                    let large_base = (li * n_axis + lj) * n_levels;
                    let mut ll = 0.0;
                    for q in 0..n_levels {
                        let vm = v[mid_base + q];
                        let vl = v[large_base + q];
                        let lse = (1.0 + exp_v[mid_base + q] + exp_v[large_base + q]).ln();
                        ll += counts[q][1] * vm + counts[q][2] * vl - totals[q] * lse;
                    }
                    // tolerance from the finite candidate: `best` starts
                    // at -inf and an infinite tolerance would never shrink
                    let tol = 1e-9 * (1.0 + ll.abs());
                    if ll > best + tol {
                        best = ll;
                        best_point = [alpha_mid, alpha_large, beta_mid, beta_large];
                        ties = 1;
                        at_bound = is_edge(alpha_mid)
                            || is_edge(alpha_large)
                            || is_edge(beta_mid)
                            || is_edge(beta_large);
                    } else if (ll - best).abs() <= tol {
                        ties += 1;
                    }
                }
            }
        }
    }

    GridSearchResult {
        alpha_mid: best_point[0],
        alpha_large: best_point[1],
        beta_mid: best_point[2],
        beta_large: best_point[3],
        log_likelihood: best,
        unique: ties == 1,
        at_bound,
    }
}
