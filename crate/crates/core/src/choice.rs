//! Weighted conditional-logit model of boat-size choice against the
//! interception probability, with crossover and counterfactual analysis.
//!
//! Utilities are linear in the interception probability, V_n = α_n + β_n·p,
//! with the Small bin normalized to zero. Estimation is Newton's method on
//! the weighted log-likelihood, which is globally concave here.

use serde::Serialize;
use thiserror::Error;

use crate::dataset::IncidentRecord;
use crate::series::QuarterPoint;
use crate::time::{Month, Quarter};

/// Boat-size bins with right-closed edges: 1–50, 51–100, 101+ persons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SizeBin {
    Small,
    Mid,
    Large,
}

impl SizeBin {
    /// Bins a positive person count; zero persons do not constitute a choice.
    pub fn from_people(n_people: u32) -> Option<SizeBin> {
        match n_people {
            0 => None,
            1..=50 => Some(SizeBin::Small),
            51..=100 => Some(SizeBin::Mid),
            _ => Some(SizeBin::Large),
        }
    }

    fn index(self) -> usize {
        match self {
            SizeBin::Small => 0,
            SizeBin::Mid => 1,
            SizeBin::Large => 2,
        }
    }
}

/// One incident as a discrete choice among the three size bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceObservation {
    pub incident_id: String,
    pub quarter: Quarter,
    pub chosen_bin: SizeBin,
    /// Quarter-level interception probability faced by the smuggler.
    pub p_interception: f64,
    pub weight: f64,
}

/// A (Mid, Large) coefficient pair; Small is normalized to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinCoefficients {
    pub mid: f64,
    pub large: f64,
}

/// Fitted conditional logit. Parameter order in `covariance` is
/// (α_Mid, α_Large, β_Mid, β_Large).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceFit {
    pub alpha: BinCoefficients,
    pub beta: BinCoefficients,
    pub alpha_se: BinCoefficients,
    pub beta_se: BinCoefficients,
    pub covariance: [[f64; 4]; 4],
    pub log_likelihood: f64,
    pub pseudo_r2: f64,
    pub n_choices: usize,
    pub n_alternatives: usize,
    pub iterations: usize,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Weighting {
    /// Unit weights.
    None,
    /// w = 1 / (1 − p_interception): upweights quarters where departures
    /// are mostly intercepted and hence underrepresented among detections.
    InverseRescue,
    /// w = 1 / (incidents in the observation's quarter): equalizes quarters.
    Frequency,
}

#[derive(Debug, Error, PartialEq)]
pub enum ChoiceError {
    #[error("no observations")]
    Empty,
    #[error("bin {0:?} is never chosen; its utility is unidentified")]
    BinNeverChosen(SizeBin),
    #[error("all observations share one interception probability; slopes unidentified")]
    NoPriceVariation,
    #[error("perfect separation: likelihood unbounded along a coefficient ray")]
    Separation,
    #[error("Newton iteration failed to converge within {0} iterations")]
    NoConvergence(usize),
    #[error("weights must be positive and finite")]
    DegenerateWeights,
    #[error("{0} groups zero observations")]
    ZeroQuarterCount(Quarter),
    #[error("{0} has interception probability 1; inverse-rescue weight undefined")]
    RescueProbabilityZero(Quarter),
    #[error("{0} is missing from the quarter table")]
    QuarterMissingFromTable(Quarter),
}

/// Numerically safe three-way softmax (max-subtraction before exp).
fn softmax3(v: [f64; 3]) -> [f64; 3] {
    let vmax = v[0].max(v[1]).max(v[2]);
    let e = [(v[0] - vmax).exp(), (v[1] - vmax).exp(), (v[2] - vmax).exp()];
    let sum = e[0] + e[1] + e[2];
    [e[0] / sum, e[1] / sum, e[2] / sum]
}

fn utilities(alpha: BinCoefficients, beta: BinCoefficients, p: f64) -> [f64; 3] {
    [0.0, alpha.mid + beta.mid * p, alpha.large + beta.large * p]
}

/// Choice probabilities (Small, Mid, Large) at interception probability `p`.
pub fn choice_probabilities(alpha: BinCoefficients, beta: BinCoefficients, p: f64) -> [f64; 3] {
    softmax3(utilities(alpha, beta, p))
}

/// Builds one choice observation per incident, reading the quarter-level
/// interception probability from the table. Incidents without a positive
/// person count carry no size choice and are excluded.
pub fn observations_from_incidents(
    records: &[IncidentRecord],
    quarter_table: &[QuarterPoint],
) -> Result<Vec<ChoiceObservation>, ChoiceError> {
    let by_quarter: std::collections::BTreeMap<Quarter, f64> =
        quarter_table.iter().map(|q| (q.quarter, q.p_interception)).collect();
    let mut out = Vec::new();
    for r in records {
        let Some(bin) = r.n_people.and_then(SizeBin::from_people) else {
            continue;
        };
        let month = Month::new(
            chrono::Datelike::year(&r.date),
            chrono::Datelike::month(&r.date),
        )
        .expect("chrono months are 1-12");
        let quarter = month.quarter();
        let p = *by_quarter
            .get(&quarter)
            .ok_or(ChoiceError::QuarterMissingFromTable(quarter))?;
        out.push(ChoiceObservation {
            incident_id: r.incident_id.clone(),
            quarter,
            chosen_bin: bin,
            p_interception: p,
            weight: 1.0,
        });
    }
    Ok(out)
}

/// Groups observations by quarter, preserving within-quarter order.
pub fn group_by_quarter(
    observations: &[ChoiceObservation],
) -> Vec<(Quarter, Vec<ChoiceObservation>)> {
    let mut groups: std::collections::BTreeMap<Quarter, Vec<ChoiceObservation>> =
        std::collections::BTreeMap::new();
    for obs in observations {
        groups.entry(obs.quarter).or_default().push(obs.clone());
    }
    groups.into_iter().collect()
}

/// Attaches scheme-specific weights to grouped observations, reading
/// inverse-rescue probabilities from the quarter table. Returns the
/// flattened weighted observations in group order.
pub fn make_weights(
    groups: &[(Quarter, Vec<ChoiceObservation>)],
    weighting: Weighting,
    quarter_table: &[QuarterPoint],
) -> Result<Vec<ChoiceObservation>, ChoiceError> {
    let table: std::collections::BTreeMap<Quarter, f64> =
        quarter_table.iter().map(|q| (q.quarter, q.p_interception)).collect();
    let mut out = Vec::new();
    for (quarter, members) in groups {
        if members.is_empty() {
            return Err(ChoiceError::ZeroQuarterCount(*quarter));
        }
        let w = match weighting {
            Weighting::None => 1.0,
            Weighting::Frequency => 1.0 / members.len() as f64,
            Weighting::InverseRescue => {
                let p = *table
                    .get(quarter)
                    .ok_or(ChoiceError::QuarterMissingFromTable(*quarter))?;
                if p >= 1.0 {
                    return Err(ChoiceError::RescueProbabilityZero(*quarter));
                }
                1.0 / (1.0 - p)
            }
        };
        for obs in members {
            out.push(ChoiceObservation { weight: w, ..obs.clone() });
        }
    }
    Ok(out)
}

/// Attaches scheme weights derived from the observations' own fields
/// (quarter counts for Frequency, the per-observation p for InverseRescue).
fn apply_weighting(
    observations: &[ChoiceObservation],
    weighting: Weighting,
) -> Vec<ChoiceObservation> {
    let mut counts: std::collections::BTreeMap<Quarter, usize> =
        std::collections::BTreeMap::new();
    for obs in observations {
        *counts.entry(obs.quarter).or_insert(0) += 1;
    }
    observations
        .iter()
        .map(|obs| {
            let weight = match weighting {
                Weighting::None => 1.0,
                Weighting::Frequency => 1.0 / counts[&obs.quarter] as f64,
                Weighting::InverseRescue => 1.0 / (1.0 - obs.p_interception),
            };
            ChoiceObservation { weight, ..obs.clone() }
        })
        .collect()
}

/// Derives weights per the scheme and fits the full model.
pub fn fit_conditional_logit(
    observations: &[ChoiceObservation],
    weighting: Weighting,
) -> Result<ChoiceFit, ChoiceError> {
    fit_weighted(&apply_weighting(observations, weighting))
}

/// Bin intercepts alone, slopes pinned at zero. The likelihood then depends
/// only on the weighted bin shares, so the maximum is closed-form:
/// α̂_n = ln(S_n/S_Small), with the classical multinomial covariance.
pub fn fit_intercepts_only(
    observations: &[ChoiceObservation],
    weighting: Weighting,
) -> Result<ChoiceFit, ChoiceError> {
    let weighted = apply_weighting(observations, weighting);
    if weighted.is_empty() {
        return Err(ChoiceError::Empty);
    }
    if weighted.iter().any(|o| !(o.weight > 0.0 && o.weight.is_finite())) {
        return Err(ChoiceError::DegenerateWeights);
    }
    let mut mass = [0.0f64; 3];
    for obs in &weighted {
        mass[obs.chosen_bin.index()] += obs.weight;
    }
    for (bin, m) in [SizeBin::Small, SizeBin::Mid, SizeBin::Large].into_iter().zip(mass) {
        if m == 0.0 {
            return Err(ChoiceError::BinNeverChosen(bin));
        }
    }
    let total: f64 = mass.iter().sum();
    let shares = [mass[0] / total, mass[1] / total, mass[2] / total];

    let alpha =
        BinCoefficients { mid: (shares[1] / shares[0]).ln(), large: (shares[2] / shares[0]).ln() };
    // Var(α̂_n) = (1/S_n + 1/S_Small)/W, Cov = 1/(W·S_Small)
    let var_mid = (1.0 / shares[1] + 1.0 / shares[0]) / total;
    let var_large = (1.0 / shares[2] + 1.0 / shares[0]) / total;
    let cov_cross = 1.0 / (total * shares[0]);
    let mut covariance = [[0.0; 4]; 4];
    covariance[0][0] = var_mid;
    covariance[1][1] = var_large;
    covariance[0][1] = cov_cross;
    covariance[1][0] = cov_cross;

    let log_likelihood: f64 = total * shares.iter().map(|s| s * s.ln()).sum::<f64>();
    let ll_null = total * (1.0f64 / 3.0).ln();
    Ok(ChoiceFit {
        alpha,
        beta: BinCoefficients { mid: 0.0, large: 0.0 },
        alpha_se: BinCoefficients { mid: var_mid.sqrt(), large: var_large.sqrt() },
        beta_se: BinCoefficients { mid: 0.0, large: 0.0 },
        covariance,
        log_likelihood,
        pseudo_r2: 1.0 - log_likelihood / ll_null,
        n_choices: weighted.len(),
        n_alternatives: 3 * weighted.len(),
        iterations: 0,
        gradient_norm: 0.0,
    })
}

/// Compact estimation input: per-observation p, chosen index, and weight.
struct Design {
    p: Vec<f64>,
    chosen: Vec<usize>,
    w: Vec<f64>,
}

impl Design {
    /// Validation for point evaluation: likelihood and score are defined
    /// even on samples the estimator itself would refuse.
    fn for_evaluation(observations: &[ChoiceObservation]) -> Result<Design, ChoiceError> {
        if observations.is_empty() {
            return Err(ChoiceError::Empty);
        }
        if observations.iter().any(|o| !(o.weight > 0.0 && o.weight.is_finite())) {
            return Err(ChoiceError::DegenerateWeights);
        }
        Ok(Design {
            p: observations.iter().map(|o| o.p_interception).collect(),
            chosen: observations.iter().map(|o| o.chosen_bin.index()).collect(),
            w: observations.iter().map(|o| o.weight).collect(),
        })
    }

    fn from_observations(observations: &[ChoiceObservation]) -> Result<Design, ChoiceError> {
        if observations.is_empty() {
            return Err(ChoiceError::Empty);
        }
        for bin in [SizeBin::Small, SizeBin::Mid, SizeBin::Large] {
            if !observations.iter().any(|o| o.chosen_bin == bin) {
                return Err(ChoiceError::BinNeverChosen(bin));
            }
        }
        let first_p = observations[0].p_interception;
        if observations.iter().all(|o| (o.p_interception - first_p).abs() < 1e-15) {
            return Err(ChoiceError::NoPriceVariation);
        }
        if observations.iter().any(|o| !(o.weight > 0.0 && o.weight.is_finite())) {
            return Err(ChoiceError::DegenerateWeights);
        }
        Ok(Design {
            p: observations.iter().map(|o| o.p_interception).collect(),
            chosen: observations.iter().map(|o| o.chosen_bin.index()).collect(),
            w: observations.iter().map(|o| o.weight).collect(),
        })
    }

    fn log_likelihood(&self, theta: &[f64; 4]) -> f64 {
        let (alpha, beta) = unpack(theta);
        let mut ll = 0.0;
        for i in 0..self.p.len() {
            let v = utilities(alpha, beta, self.p[i]);
            let vmax = v[0].max(v[1]).max(v[2]);
            let lse = vmax
                + ((v[0] - vmax).exp() + (v[1] - vmax).exp() + (v[2] - vmax).exp()).ln();
            ll += self.w[i] * (v[self.chosen[i]] - lse);
        }
        ll
    }

    /// Weighted gradient and negative Hessian of the log-likelihood.
    fn gradient_neg_hessian(&self, theta: &[f64; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
        let (alpha, beta) = unpack(theta);
        let mut g = [0.0; 4];
        let mut nh = [[0.0; 4]; 4];
        for i in 0..self.p.len() {
            let p = self.p[i];
            let w = self.w[i];
            let prob = choice_probabilities(alpha, beta, p);
            // score terms for Mid (n=1) and Large (n=2)
            for (slot, n) in [(0usize, 1usize), (1, 2)] {
                let d = if self.chosen[i] == n { 1.0 } else { 0.0 };
                g[slot] += w * (d - prob[n]);
                g[slot + 2] += w * p * (d - prob[n]);
            }
            // information: w · x xᵀ ⊗ (diag(P) − P Pᵀ) over the free bins
            for (r, n) in [(0usize, 1usize), (1, 2)] {
                for (c, m) in [(0usize, 1usize), (1, 2)] {
                    let kernel =
                        w * prob[n] * (if n == m { 1.0 } else { 0.0 } - prob[m]);
                    nh[r][c] += kernel;
                    nh[r][c + 2] += kernel * p;
                    nh[r + 2][c] += kernel * p;
                    nh[r + 2][c + 2] += kernel * p * p;
                }
            }
        }
        (g, nh)
    }
}

fn unpack(theta: &[f64; 4]) -> (BinCoefficients, BinCoefficients) {
    (
        BinCoefficients { mid: theta[0], large: theta[1] },
        BinCoefficients { mid: theta[2], large: theta[3] },
    )
}

/// Weighted log-likelihood at an arbitrary coefficient point, using the
/// observations' stored weights. Exposed for diagnostics and audits.
pub fn weighted_log_likelihood(
    observations: &[ChoiceObservation],
    alpha: BinCoefficients,
    beta: BinCoefficients,
) -> Result<f64, ChoiceError> {
    let design = Design::for_evaluation(observations)?;
    Ok(design.log_likelihood(&[alpha.mid, alpha.large, beta.mid, beta.large]))
}

/// Analytic gradient of the weighted log-likelihood in the order
/// (α_Mid, α_Large, β_Mid, β_Large). Exposed for diagnostics and audits.
pub fn weighted_score(
    observations: &[ChoiceObservation],
    alpha: BinCoefficients,
    beta: BinCoefficients,
) -> Result<[f64; 4], ChoiceError> {
    let design = Design::for_evaluation(observations)?;
    let (g, _) = design.gradient_neg_hessian(&[alpha.mid, alpha.large, beta.mid, beta.large]);
    Ok(g)
}

const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;
const GRADIENT_TOL: f64 = 1e-8;
// Utilities beyond this scale only arise when the likelihood is unbounded.
const SEPARATION_BOUND: f64 = 50.0;

fn solve_spd(a: &[[f64; 4]; 4], b: &[f64; 4]) -> Option<([f64; 4], [[f64; 4]; 4])> {
    let m = nalgebra::Matrix4::from_fn(|r, c| a[r][c]);
    let chol = nalgebra::Cholesky::new(m)?;
    let x = chol.solve(&nalgebra::Vector4::from_column_slice(b));
    let inv = chol.inverse();
    let mut x_arr = [0.0; 4];
    let mut inv_arr = [[0.0; 4]; 4];
    for r in 0..4 {
        x_arr[r] = x[r];
        for c in 0..4 {
            inv_arr[r][c] = inv[(r, c)];
        }
    }
    Some((x_arr, inv_arr))
}

/// Newton maximization using the observations' stored weights as-is.
pub fn fit_weighted(observations: &[ChoiceObservation]) -> Result<ChoiceFit, ChoiceError> {
    let design = Design::from_observations(observations)?;
    let mut theta = [0.0; 4];
    let mut ll = design.log_likelihood(&theta);
    let mut converged_at = None;
    let mut grad_norm = f64::INFINITY;

    for iter in 0..MAX_ITERATIONS {
        let (g, nh) = design.gradient_neg_hessian(&theta);
        grad_norm = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if grad_norm < GRADIENT_TOL {
            converged_at = Some(iter);
            break;
        }
        let (direction, _) = solve_spd(&nh, &g).ok_or(ChoiceError::Separation)?;
        // step-halved ascent: shrink until the likelihood improves. Near
        // the optimum the true gain drops below the likelihood's own
        // floating-point resolution, so a rounding-level decrease must
        // still count as acceptance or the final iterations stall.
        let noise = 1e-12 * (1.0 + ll.abs());
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let candidate = [
                theta[0] + step * direction[0],
                theta[1] + step * direction[1],
                theta[2] + step * direction[2],
                theta[3] + step * direction[3],
            ];
            let cand_ll = design.log_likelihood(&candidate);
            if cand_ll.is_finite() && cand_ll >= ll - noise {
                theta = candidate;
                ll = cand_ll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(ChoiceError::NoConvergence(iter + 1));
        }
        if theta.iter().any(|t| t.abs() > SEPARATION_BOUND) {
            return Err(ChoiceError::Separation);
        }
    }

    let iterations = match converged_at {
        Some(iter) => iter,
        none @ None => {
            // the loop ran out before the gradient criterion was met
            let _ = none;
            return Err(ChoiceError::NoConvergence(MAX_ITERATIONS));
        }
    };

    let (_, nh) = design.gradient_neg_hessian(&theta);
    let (_, covariance) = solve_spd(&nh, &[0.0; 4]).ok_or(ChoiceError::Separation)?;
    let se = |i: usize| covariance[i][i].sqrt();
    let (alpha, beta) = unpack(&theta);

    let total_weight: f64 = design.w.iter().sum();
    let ll_null = total_weight * (1.0f64 / 3.0).ln();
    Ok(ChoiceFit {
        alpha,
        beta,
        alpha_se: BinCoefficients { mid: se(0), large: se(1) },
        beta_se: BinCoefficients { mid: se(2), large: se(3) },
        covariance,
        log_likelihood: ll,
        pseudo_r2: 1.0 - ll / ll_null,
        n_choices: observations.len(),
        n_alternatives: 3 * observations.len(),
        iterations,
        gradient_norm: grad_norm,
    })
}

/// Interception probabilities at which two bins' utilities cross, when the
/// crossing lies inside [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverPoints {
    pub small_mid: Option<f64>,
    pub small_large: Option<f64>,
    pub mid_large: Option<f64>,
}

fn crossing(alpha_a: f64, beta_a: f64, alpha_b: f64, beta_b: f64) -> Option<f64> {
    if beta_a == beta_b {
        return None;
    }
    let p = (alpha_a - alpha_b) / (beta_b - beta_a);
    (0.0..=1.0).contains(&p).then_some(p)
}

/// Solves V_a(p) = V_b(p) for each bin pair.
pub fn crossover_points(fit: &ChoiceFit) -> CrossoverPoints {
    CrossoverPoints {
        small_mid: crossing(0.0, 0.0, fit.alpha.mid, fit.beta.mid),
        small_large: crossing(0.0, 0.0, fit.alpha.large, fit.beta.large),
        mid_large: crossing(fit.alpha.mid, fit.beta.mid, fit.alpha.large, fit.beta.large),
    }
}

/// Predicted shares for one quarter under baseline and shifted interception.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarterScenario {
    pub quarter: Quarter,
    pub p_baseline: f64,
    pub p_counterfactual: f64,
    /// Set when p + delta left [0,1] and was clamped.
    pub clamped: bool,
    pub baseline_shares: [f64; 3],
    pub counterfactual_shares: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    /// The applied shift, in probability units.
    pub delta: f64,
    pub quarters: Vec<QuarterScenario>,
}

/// Shifts every quarter's interception probability by `delta` (probability
/// units, clamped to [0,1]) and reports both share vectors.
pub fn counterfactual(
    fit: &ChoiceFit,
    quarter_table: &[QuarterPoint],
    delta: f64,
) -> ScenarioResult {
    let quarters = quarter_table
        .iter()
        .map(|q| {
            let p0 = q.p_interception;
            let shifted = p0 + delta;
            let p1 = shifted.clamp(0.0, 1.0);
            QuarterScenario {
                quarter: q.quarter,
                p_baseline: p0,
                p_counterfactual: p1,
                clamped: shifted != p1,
                baseline_shares: choice_probabilities(fit.alpha, fit.beta, p0),
                counterfactual_shares: choice_probabilities(fit.alpha, fit.beta, p1),
            }
        })
        .collect();
    ScenarioResult { delta, quarters }
}

/// Per-quarter predicted share vectors at observed interception levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarterShares {
    pub quarter: Quarter,
    pub p_interception: f64,
    pub shares: [f64; 3],
}

pub fn predicted_quarterly_distribution(
    fit: &ChoiceFit,
    quarter_table: &[QuarterPoint],
) -> Vec<QuarterShares> {
    quarter_table
        .iter()
        .map(|q| QuarterShares {
            quarter: q.quarter,
            p_interception: q.p_interception,
            shares: choice_probabilities(fit.alpha, fit.beta, q.p_interception),
        })
        .collect()
}
