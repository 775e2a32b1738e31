//! Evaluation of the Gauss hypergeometric function 2F1 on the real
//! interval needed by the expansions, its z-derivative, and the two
//! contiguous relations in the lower parameter used to derive the
//! coefficient recurrence.
//!
//! Strategy: direct power series everywhere the series converges fast
//! enough (the expansions only ever evaluate at real z strictly inside
//! (-1, 1)), with the Pfaff transformation
//!
//! ```text
//! 2F1(a, b; c; z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1))
//! ```
//!
//! applied for z in (-1, -1/2], where it maps the argument into (1/3, 1/2)
//! and removes the sign alternation. Terminating series (a numerator
//! parameter at a nonpositive integer) are always summed directly: they are
//! exact finite polynomials for any argument in the domain.

use serde::{Deserialize, Serialize};

use crate::error::{HeunError, Result};

/// Maximum number of series terms before giving up.
pub const TERM_BUDGET: usize = 10_000;
/// A term is "negligible" when its relative contribution drops below this.
const STAGNATION_TOL: f64 = 1e-16;
/// Number of consecutive negligible terms required to stop.
const STAGNATION_RUN: usize = 3;
/// Distance within which a parameter counts as a nonpositive integer.
const NEAR_INT_TOL: f64 = 1e-9;

/// Argument pack for [`hyp2f1`] and friends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyp2F1Args {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub z: f64,
}

impl Hyp2F1Args {
    pub fn new(alpha: f64, beta: f64, c: f64, z: f64) -> Self {
        Self { alpha, beta, c, z }
    }
}

/// Index m such that x is (within tolerance) the nonpositive integer -m.
fn nonpositive_integer_index(x: f64) -> Option<u64> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= NEAR_INT_TOL {
        Some((-r) as u64)
    } else {
        None
    }
}

/// Termination index of the series: smallest m with a numerator parameter
/// at -m, if any.
fn termination_index(a: f64, b: f64) -> Option<u64> {
    match (nonpositive_integer_index(a), nonpositive_integer_index(b)) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Rejects lower parameters sitting on a pole that the series reaches.
///
/// A pole at c = -j is harmless only when the series terminates at index
/// m <= j before the factor (c + j) is ever used.
fn check_pole(a: f64, b: f64, c: f64) -> Result<Option<u64>> {
    let m = termination_index(a, b);
    if let Some(j) = nonpositive_integer_index(c) {
        match m {
            Some(m) if j >= m => {}
            _ => return Err(HeunError::PoleAtC { c }),
        }
    }
    Ok(m)
}

/// Direct power series; assumes the pole check already passed.
fn direct_series(a: f64, b: f64, c: f64, z: f64, m: Option<u64>) -> Result<f64> {
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    let mut run = 0usize;
    for k in 0..TERM_BUDGET {
        if let Some(m) = m {
            if k as u64 >= m {
                return Ok(sum);
            }
        }
        let kf = k as f64;
        let numer = (a + kf) * (b + kf);
        if numer == 0.0 {
            return Ok(sum);
        }
        term *= numer / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= STAGNATION_TOL * sum.abs().max(f64::MIN_POSITIVE) {
            run += 1;
            if run >= STAGNATION_RUN {
                return Ok(sum);
            }
        } else {
            run = 0;
        }
    }
    Err(HeunError::NoConvergence { terms: TERM_BUDGET })
}

/// Gauss hypergeometric function 2F1(alpha, beta; c; z) for real z in (-1, 1).
///
/// Symmetric in (alpha, beta) bit-for-bit: the pair is sorted before
/// evaluation.
pub fn hyp2f1(args: Hyp2F1Args) -> Result<f64> {
    let Hyp2F1Args { alpha, beta, c, z } = args;
    for (v, name) in [(alpha, "alpha"), (beta, "beta"), (c, "c"), (z, "z")] {
        if !v.is_finite() {
            return Err(HeunError::DomainError {
                value: v,
                context: name,
            });
        }
    }
    if z.abs() >= 1.0 {
        return Err(HeunError::DomainError {
            value: z,
            context: "2F1 argument must lie in (-1, 1)",
        });
    }
    let (a, b) = if alpha <= beta {
        (alpha, beta)
    } else {
        (beta, alpha)
    };
    let m = check_pole(a, b, c)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    if m.is_some() || z > -0.5 {
        direct_series(a, b, c, z, m)
    } else {
        // Pfaff: argument w = z/(z-1) lies in (1/3, 1/2) for z in (-1, -1/2).
        let w = z / (z - 1.0);
        let m2 = termination_index(a, c - b);
        let inner = direct_series(a, c - b, c, w, m2)?;
        Ok((1.0 - z).powf(-a) * inner)
    }
}

/// d/dz 2F1(alpha, beta; c; z) via the parameter-shifted identity
/// (alpha beta / c) 2F1(alpha+1, beta+1; c+1; z).
pub fn hyp2f1_derivative(args: Hyp2F1Args) -> Result<f64> {
    let Hyp2F1Args { alpha, beta, c, z } = args;
    if c.abs() <= NEAR_INT_TOL {
        return Err(HeunError::PoleAtC { c });
    }
    let factor = alpha * beta / c;
    if factor == 0.0 {
        return Ok(0.0);
    }
    let shifted = hyp2f1(Hyp2F1Args::new(alpha + 1.0, beta + 1.0, c + 1.0, z))?;
    Ok(factor * shifted)
}

/// Second derivative from the hypergeometric differential equation,
/// given already-computed values of the function and first derivative:
///
/// ```text
/// z (1-z) F'' = ((alpha+beta+1) z - c) F' + alpha beta F.
/// ```
pub fn hyp2f1_second_derivative(args: Hyp2F1Args, f: f64, f_prime: f64) -> Result<f64> {
    let Hyp2F1Args { alpha, beta, c, z } = args;
    let denom = z * (1.0 - z);
    if denom.abs() < 1e-14 {
        return Err(HeunError::DomainError {
            value: z,
            context: "second derivative undefined at z = 0 or 1",
        });
    }
    Ok((((alpha + beta + 1.0) * z - c) * f_prime + alpha * beta * f) / denom)
}

/// Residual of the lower-parameter contiguous relation
///
/// ```text
/// z F'(alpha, beta; c; z) = (c-1) [F(alpha, beta; c-1; z) - F(alpha, beta; c; z)],
/// ```
///
/// i.e. LHS - RHS; zero for exact arithmetic.
pub fn contiguous_lower_c(args: Hyp2F1Args) -> Result<f64> {
    let Hyp2F1Args { alpha, beta, c, z } = args;
    let lhs = z * hyp2f1_derivative(args)?;
    let f_c = hyp2f1(args)?;
    let f_cm1 = hyp2f1(Hyp2F1Args::new(alpha, beta, c - 1.0, z))?;
    Ok(lhs - (c - 1.0) * (f_cm1 - f_c))
}

/// Residual of the raising contiguous relation
///
/// ```text
/// (z-1) F'(alpha, beta; c; z) = -(alpha+beta-c) F(alpha, beta; c; z)
///     + (alpha+beta-c - alpha beta / c) F(alpha, beta; c+1; z),
/// ```
///
/// i.e. LHS - RHS; zero for exact arithmetic.
pub fn contiguous_raise_c(args: Hyp2F1Args) -> Result<f64> {
    let Hyp2F1Args { alpha, beta, c, z } = args;
    if c.abs() <= NEAR_INT_TOL {
        return Err(HeunError::PoleAtC { c });
    }
    let lhs = (z - 1.0) * hyp2f1_derivative(args)?;
    let f_c = hyp2f1(args)?;
    let f_cp1 = hyp2f1(Hyp2F1Args::new(alpha, beta, c + 1.0, z))?;
    let s = alpha + beta - c;
    Ok(lhs - (-s * f_c + (s - alpha * beta / c) * f_cp1))
}
