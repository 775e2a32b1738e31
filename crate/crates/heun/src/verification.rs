//! Independent correctness oracles: the Heun ODE residual, direct adaptive
//! Runge-Kutta integration of the equation, and the Wronskian of two
//! solutions.

use serde::Serialize;

use crate::error::{HeunError, Result};
use crate::params::HeunParameters;
use crate::solutions::SolutionForm;

/// Margin around the singular points 0, 1, a for residual evaluation.
pub const RESIDUAL_MARGIN: f64 = 1e-2;
/// Default local error tolerance (per unit step) of the integrator.
pub const DEFAULT_INTEGRATION_TOL: f64 = 1e-10;
/// The relative error estimate cannot be trusted below this; acceptance
/// bottoms out here so that very tight tolerances saturate instead of
/// rejecting forever.
const ROUNDOFF_FLOOR: f64 = 32.0 * f64::EPSILON;
/// Normalized residual threshold for a Pass verdict.
pub const RESIDUAL_PASS_THRESHOLD: f64 = 1e-8;
/// Absolute series-vs-integration deviation threshold for a Pass verdict.
pub const DEVIATION_PASS_THRESHOLD: f64 = 1e-6;

/// Left-hand side of the Heun equation at z for given u, u', u''.
pub fn heun_residual(u: f64, u_prime: f64, u_double_prime: f64, p: &HeunParameters, z: f64) -> Result<f64> {
    if z.abs() < RESIDUAL_MARGIN
        || (z - 1.0).abs() < RESIDUAL_MARGIN
        || (z - p.a()).abs() < RESIDUAL_MARGIN
    {
        return Err(HeunError::DomainError {
            value: z,
            context: "residual undefined within margin of a singular point",
        });
    }
    let pcoef = p.gamma() / z + p.delta() / (z - 1.0) + p.epsilon() / (z - p.a());
    let rcoef = (p.alpha() * p.beta() * z - p.q()) / (z * (z - 1.0) * (z - p.a()));
    Ok(u_double_prime + pcoef * u_prime + rcoef * u)
}

/// One sampled point of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub z: f64,
    pub u: f64,
    pub u_prime: f64,
}

fn heun_rhs(p: &HeunParameters, z: f64, y: [f64; 2]) -> [f64; 2] {
    let pcoef = p.gamma() / z + p.delta() / (z - 1.0) + p.epsilon() / (z - p.a());
    let rcoef = (p.alpha() * p.beta() * z - p.q()) / (z * (z - 1.0) * (z - p.a()));
    [y[1], -pcoef * y[1] - rcoef * y[0]]
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step from (z, y) with size h: returns (y5, error estimate).
fn dopri_step(p: &HeunParameters, z: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let mut k = [[0.0f64; 2]; 7];
    k[0] = heun_rhs(p, z, y);
    for stage in 1..7 {
        let mut yi = y;
        for j in 0..stage {
            let aij = A[stage][j];
            if aij != 0.0 {
                yi[0] += h * aij * k[j][0];
                yi[1] += h * aij * k[j][1];
            }
        }
        k[stage] = heun_rhs(p, z + C[stage] * h, yi);
    }
    let mut y5 = y;
    let mut err = [0.0f64; 2];
    for j in 0..7 {
        y5[0] += h * B5[j] * k[j][0];
        y5[1] += h * B5[j] * k[j][1];
        let d = B5[j] - B4[j];
        err[0] += h * d * k[j][0];
        err[1] += h * d * k[j][1];
    }
    (y5, err)
}

/// Scale-invariant error measure: max_i |e_i| / max(|y_i|, |y5_i|).
/// Components that are exactly zero on both ends contribute only through
/// their (then necessarily zero) error.
fn error_norm(y: [f64; 2], y5: [f64; 2], err: [f64; 2]) -> f64 {
    let mut norm: f64 = 0.0;
    for i in 0..2 {
        let scale = y[i].abs().max(y5[i].abs());
        if scale > 0.0 {
            norm = norm.max(err[i].abs() / scale);
        } else if err[i] != 0.0 {
            return f64::INFINITY;
        }
    }
    norm
}

/// Integrates the Heun equation as a first-order system from z0 to z1
/// (forward only) with initial data (u0, u0'), landing exactly on each of
/// the requested `samples` (which must lie in [z0, z1] in increasing
/// order). Error control is relative, per unit step.
pub fn integrate_heun(
    p: &HeunParameters,
    z0: f64,
    z1: f64,
    u0: f64,
    u0_prime: f64,
    samples: &[f64],
) -> Result<Vec<TrajectoryPoint>> {
    integrate_heun_with_tol(p, z0, z1, u0, u0_prime, samples, DEFAULT_INTEGRATION_TOL)
}

/// [`integrate_heun`] with an explicit local error tolerance.
pub fn integrate_heun_with_tol(
    p: &HeunParameters,
    z0: f64,
    z1: f64,
    u0: f64,
    u0_prime: f64,
    samples: &[f64],
    tol: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if z1.partial_cmp(&z0) != Some(std::cmp::Ordering::Greater) {
        return Err(HeunError::DomainError {
            value: z1,
            context: "integration requires z1 > z0",
        });
    }
    for w in samples.windows(2) {
        if w[1] <= w[0] {
            return Err(HeunError::DomainError {
                value: w[1],
                context: "sample points must be strictly increasing",
            });
        }
    }
    if let (Some(first), Some(last)) = (samples.first(), samples.last()) {
        if *first < z0 || *last > z1 {
            return Err(HeunError::DomainError {
                value: *first,
                context: "sample points must lie inside [z0, z1]",
            });
        }
    }

    let span = z1 - z0;
    let h_min = 1e-12 * span;
    let mut h = span / 50.0;
    let mut z = z0;
    let mut y = [u0, u0_prime];
    let mut out = Vec::with_capacity(samples.len());
    let mut next_sample = 0usize;

    // Samples coinciding with the start point.
    while next_sample < samples.len() && samples[next_sample] <= z0 {
        out.push(TrajectoryPoint {
            z: samples[next_sample],
            u: y[0],
            u_prime: y[1],
        });
        next_sample += 1;
    }

    let mut steps = 0usize;
    while z < z1 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(HeunError::StepFailure { z });
        }
        let mut h_step = h.min(z1 - z);
        if next_sample < samples.len() {
            h_step = h_step.min(samples[next_sample] - z);
        }
        let (y5, err) = dopri_step(p, z, y, h_step);
        let norm = error_norm(y, y5, err);
        let threshold = (tol * h_step).max(ROUNDOFF_FLOOR);
        if norm <= threshold {
            z += h_step;
            y = y5;
            if next_sample < samples.len() && (samples[next_sample] - z).abs() <= 1e-13 * span {
                out.push(TrajectoryPoint {
                    z: samples[next_sample],
                    u: y[0],
                    u_prime: y[1],
                });
                next_sample += 1;
            }
            let factor = if norm == 0.0 {
                5.0
            } else {
                (0.9 * (threshold / norm).powf(0.25)).clamp(0.2, 5.0)
            };
            h = h_step * factor;
        } else {
            let factor = (0.9 * (threshold / norm).powf(0.25)).clamp(0.2, 0.9);
            h = h_step * factor;
            if h < h_min {
                return Err(HeunError::StepFailure { z });
            }
        }
    }
    Ok(out)
}

/// Wronskian u1 u2' - u1' u2 of two solution forms at z.
pub fn wronskian(f1: &SolutionForm, f2: &SolutionForm, z: f64) -> Result<f64> {
    let (u1, u1p, _) = f1.evaluate(z)?;
    let (u2, u2p, _) = f2.evaluate(z)?;
    Ok(u1 * u2p - u1p * u2)
}

/// Outcome of verifying one solution form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Residual and integration-oracle report for a solution form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Max over the grid of |Heun LHS| / (|u| + |u'| + |u''|).
    pub residual_sup: f64,
    /// Max |u_series - u_integrated| over the oracle interval, when the
    /// integration ran.
    pub oracle_max_deviation: Option<f64>,
    /// Filled by callers that compare two solutions; not set here.
    pub wronskian_at_half: Option<f64>,
    /// Grid points actually used.
    pub grid: Vec<f64>,
    pub verdict: Verdict,
    pub residual_threshold: f64,
    pub deviation_threshold: f64,
    /// Why the verdict is Inconclusive, when it is.
    pub reason: Option<String>,
}

impl VerificationReport {
    fn inconclusive(grid: Vec<f64>, reason: String, thresholds: (f64, f64)) -> Self {
        VerificationReport {
            residual_sup: f64::NAN,
            oracle_max_deviation: None,
            wronskian_at_half: None,
            grid,
            verdict: Verdict::Inconclusive,
            residual_threshold: thresholds.0,
            deviation_threshold: thresholds.1,
            reason: Some(reason),
        }
    }
}

/// Evaluation grid 0.05, 0.10, ..., 0.95 minus the margin neighborhood
/// of a when a falls inside (0, 1).
pub fn default_grid(a: f64) -> Vec<f64> {
    (1..=19)
        .map(|i| i as f64 * 0.05)
        .filter(|z| (z - a).abs() >= RESIDUAL_MARGIN)
        .collect()
}

/// The comparison interval for the integration oracle: [0.1, 0.45] by
/// default, shifted to the largest singular-free subinterval of
/// [0.05, 0.95] (length >= 0.2, capped at 0.35) when a lies inside (0, 1).
pub fn oracle_interval(a: f64) -> Option<(f64, f64)> {
    let margin = 0.02;
    if !(margin..=1.0 - margin).contains(&a) {
        return Some((0.1, 0.45));
    }
    let candidates = [(0.05, a - margin), (a + margin, 0.95)];
    let best = candidates
        .into_iter()
        .filter(|(lo, hi)| hi - lo >= 0.2)
        .max_by(|x, y| (x.1 - x.0).partial_cmp(&(y.1 - y.0)).unwrap())?;
    let (lo, hi) = best;
    Some((lo, hi.min(lo + 0.35)))
}

/// Verifies a solution form against the Heun equation with parameters `p`:
/// normalized residual over the default grid, plus direct integration
/// seeded from the series at the start of the oracle interval.
pub fn verify_solution(form: &SolutionForm, p: &HeunParameters) -> VerificationReport {
    verify_solution_with_thresholds(
        form,
        p,
        RESIDUAL_PASS_THRESHOLD,
        DEVIATION_PASS_THRESHOLD,
    )
}

/// [`verify_solution`] with caller-chosen Pass thresholds (recorded in the
/// report).
pub fn verify_solution_with_thresholds(
    form: &SolutionForm,
    p: &HeunParameters,
    residual_threshold: f64,
    deviation_threshold: f64,
) -> VerificationReport {
    let thresholds = (residual_threshold, deviation_threshold);
    let grid = default_grid(p.a());
    let mut residual_sup: f64 = 0.0;
    for &z in &grid {
        let (u, up, upp) = match form.evaluate(z) {
            Ok(v) => v,
            Err(e) => {
                return VerificationReport::inconclusive(
                    grid,
                    format!("evaluation at z = {z}: {e}"),
                    thresholds,
                )
            }
        };
        let res = match heun_residual(u, up, upp, p, z) {
            Ok(r) => r,
            Err(e) => {
                return VerificationReport::inconclusive(
                    grid,
                    format!("residual at z = {z}: {e}"),
                    thresholds,
                )
            }
        };
        let scale = (u.abs() + up.abs() + upp.abs()).max(f64::MIN_POSITIVE);
        residual_sup = residual_sup.max(res.abs() / scale);
    }

    let Some((lo, hi)) = oracle_interval(p.a()) else {
        return VerificationReport::inconclusive(
            grid,
            "no singular-free oracle interval of length 0.2".into(),
            thresholds,
        );
    };
    let samples: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|z| *z > lo && *z <= hi)
        .collect();
    let seed = match form.evaluate(lo) {
        Ok(v) => v,
        Err(e) => {
            return VerificationReport::inconclusive(
                grid,
                format!("oracle seed at z = {lo}: {e}"),
                thresholds,
            )
        }
    };
    let trajectory = match integrate_heun(p, lo, hi, seed.0, seed.1, &samples) {
        Ok(t) => t,
        Err(e) => {
            return VerificationReport::inconclusive(grid, format!("integration: {e}"), thresholds)
        }
    };
    let mut deviation: f64 = 0.0;
    for point in &trajectory {
        let (u, _, _) = match form.evaluate(point.z) {
            Ok(v) => v,
            Err(e) => {
                return VerificationReport::inconclusive(
                    grid,
                    format!("evaluation at z = {}: {e}", point.z),
                    thresholds,
                )
            }
        };
        deviation = deviation.max((u - point.u).abs());
    }

    let verdict = if residual_sup <= residual_threshold && deviation <= deviation_threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    VerificationReport {
        residual_sup,
        oracle_max_deviation: Some(deviation),
        wronskian_at_half: None,
        grid,
        verdict,
        residual_threshold,
        deviation_threshold,
        reason: None,
    }
}
