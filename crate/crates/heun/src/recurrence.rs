//! The three-term recurrence R_n a_n + Q_n a_{n-1} + P_n a_{n-2} = 0
//! generating the expansion coefficients, with
//!
//! ```text
//! R_n = -a (gamma - gamma0 + n) (delta + epsilon + gamma - gamma0 + n - 1
//!                                 - alpha beta / (gamma0 - n)),
//! Q_n = -(a-1)(epsilon + gamma - gamma0 + n - 1)(gamma0 - n)
//!       + a (gamma - gamma0 + n - 1)(delta + epsilon + gamma - gamma0 + n - 2)
//!       + (alpha beta a - q),
//! P_n = (a-1)(epsilon + gamma - gamma0 + n - 2)(gamma0 - n + 1).
//! ```
//!
//! Starting from a_{-2} = a_{-1} = 0 the choice gamma0 in {gamma, alpha,
//! beta} makes R_0 vanish, so a_0 is free; it is normalized to 1 here.
//! Q_n is linear in q with coefficient -1, which is what turns the
//! termination condition a_{N+1}(q) = 0 into a degree-(N+1) polynomial.
//!
//! Caveat for non-terminating q: forward generation tracks the DOMINANT
//! solution of the recurrence (asymptotic ratio max(1, |(a-1)/a|)); the
//! truncated sequence is best-effort, with [`CoefficientSequence::tail_ratio`]
//! as the decay diagnostic. Backward (Miller-type) extraction of the
//! minimal solution is out of scope.

use serde::Serialize;

use crate::error::{HeunError, Result};
use crate::params::{ExpansionSpec, Gamma0Choice, HeunParameters};

/// Termination detection threshold, relative to the running coefficient
/// maximum: two consecutive coefficients below it count as zero.
pub const TERMINATION_TOL: f64 = 1e-10;

/// Parameters plus a resolved gamma0 value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceContext {
    params: HeunParameters,
    gamma0: f64,
}

impl RecurrenceContext {
    /// gamma0 must coincide with gamma, alpha or beta of the parameter set.
    pub fn new(params: HeunParameters, gamma0: f64) -> Result<Self> {
        let ok = [params.gamma(), params.alpha(), params.beta()]
            .iter()
            .any(|v| (v - gamma0).abs() <= 1e-12);
        if !ok {
            return Err(HeunError::DomainError {
                value: gamma0,
                context: "gamma0 must equal gamma, alpha or beta",
            });
        }
        Ok(Self { params, gamma0 })
    }

    pub fn from_choice(params: HeunParameters, choice: Gamma0Choice) -> Self {
        Self {
            params,
            gamma0: choice.resolve(&params),
        }
    }

    pub fn from_spec(params: HeunParameters, spec: &ExpansionSpec) -> Self {
        Self::from_choice(params, spec.gamma0)
    }

    pub fn params(&self) -> &HeunParameters {
        &self.params
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
}

/// Scale-aware breakdown threshold for R_n, which grows like n^2.
fn breakdown_threshold(a: f64, n: usize) -> f64 {
    let nf = n as f64;
    1e-12 * (1.0 + a.abs()) * (1.0 + nf) * (1.0 + nf)
}

/// R_n of the recurrence. Fails when gamma0 - n vanishes (the formula
/// divides by it).
pub fn coeff_r(n: usize, ctx: &RecurrenceContext) -> Result<f64> {
    let p = ctx.params();
    let g0 = ctx.gamma0();
    let nf = n as f64;
    let g0n = g0 - nf;
    if g0n.abs() < 1e-12 {
        return Err(HeunError::DivisionByZero { n: n as i64 });
    }
    let bracket = p.delta() + p.epsilon() + p.gamma() - g0 + nf - 1.0 - p.alpha() * p.beta() / g0n;
    Ok(-p.a() * (p.gamma() - g0 + nf) * bracket)
}

/// Q_n of the recurrence; linear in q with coefficient -1.
pub fn coeff_q(n: usize, ctx: &RecurrenceContext) -> f64 {
    let p = ctx.params();
    let g0 = ctx.gamma0();
    let nf = n as f64;
    -(p.a() - 1.0) * (p.epsilon() + p.gamma() - g0 + nf - 1.0) * (g0 - nf)
        + p.a() * (p.gamma() - g0 + nf - 1.0) * (p.delta() + p.epsilon() + p.gamma() - g0 + nf - 2.0)
        + (p.alpha() * p.beta() * p.a() - p.q())
}

/// P_n of the recurrence.
pub fn coeff_p(n: usize, ctx: &RecurrenceContext) -> f64 {
    let p = ctx.params();
    let g0 = ctx.gamma0();
    let nf = n as f64;
    (p.a() - 1.0) * (p.epsilon() + p.gamma() - g0 + nf - 2.0) * (g0 - nf + 1.0)
}

/// Expansion coefficients a_0..a_K with termination metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSequence {
    /// a_0, a_1, ... (generation stops two entries past a detected
    /// termination index).
    pub coefficients: Vec<f64>,
    pub gamma0: f64,
    /// Index N of the last nonzero coefficient, when the two following
    /// coefficients dropped below [`TERMINATION_TOL`] relative to the
    /// running maximum.
    pub terminated_at: Option<usize>,
}

impl CoefficientSequence {
    /// |a_{n+1}/a_n| averaged over the last `window` steps; the
    /// Poincare-Perron candidates for this limit are 1 and |(a-1)/a|.
    pub fn tail_ratio(&self, window: usize) -> Option<f64> {
        let n = self.coefficients.len();
        if n < window + 1 {
            return None;
        }
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in (n - window - 1)..(n - 1) {
            let denom = self.coefficients[i].abs();
            if denom > 0.0 {
                acc += self.coefficients[i + 1].abs() / denom;
                count += 1;
            }
        }
        if count == 0 {
            None
        } else {
            Some(acc / count as f64)
        }
    }
}

/// The two Poincare-Perron candidate limits of |a_{n+1}/a_n|.
pub fn poincare_perron_candidates(p: &HeunParameters) -> [f64; 2] {
    [1.0, ((p.a() - 1.0) / p.a()).abs()]
}

/// Forward generation of a_0..a_K with a_0 = 1.
pub fn generate_coefficients(ctx: &RecurrenceContext, k: usize) -> Result<CoefficientSequence> {
    generate_coefficients_scaled(ctx, k, 1.0)
}

/// Forward generation with an explicit a_0; the recurrence is linear, so
/// this equals the a_0 = 1 sequence scaled by `a0`.
pub fn generate_coefficients_scaled(
    ctx: &RecurrenceContext,
    k: usize,
    a0: f64,
) -> Result<CoefficientSequence> {
    let a = ctx.params().a();
    let mut coeffs = Vec::with_capacity(k + 1);
    coeffs.push(a0);
    let mut running_max = a0.abs();
    let mut terminated_at = None;
    for n in 1..=k {
        let r = coeff_r(n, ctx)?;
        if r.abs() <= breakdown_threshold(a, n) {
            return Err(HeunError::RecurrenceBreakdown { n });
        }
        let q = coeff_q(n, ctx);
        let p = coeff_p(n, ctx);
        let prev1 = coeffs[n - 1];
        let prev2 = if n >= 2 { coeffs[n - 2] } else { 0.0 };
        let next = -(q * prev1 + p * prev2) / r;
        coeffs.push(next);
        if n >= 2 {
            // max over a_0..a_{n-2}: the two candidates being tested for
            // zero must not feed their own threshold.
            let max_prior = running_max;
            if next.abs() <= TERMINATION_TOL * max_prior
                && prev1.abs() <= TERMINATION_TOL * max_prior
            {
                terminated_at = Some(n - 2);
                break;
            }
        }
        running_max = running_max.max(coeffs[n - 1].abs());
    }
    Ok(CoefficientSequence {
        coefficients: coeffs,
        gamma0: ctx.gamma0(),
        terminated_at,
    })
}
