//! Hypergeometric series solutions of the general Heun equation.
//!
//! The Heun equation
//!
//! ```text
//! u'' + (gamma/z + delta/(z-1) + epsilon/(z-a)) u'
//!     + (alpha beta z - q) / (z (z-1) (z-a)) u = 0
//! ```
//!
//! admits expansions `u = sum_n a_n 2F1(alpha, beta; gamma0 - n; z)` with
//! gamma0 equal to gamma, alpha or beta. The coefficients obey a three-term
//! recurrence; for special accessory-parameter values q — the roots of a
//! polynomial of degree N + 1 — the expansion terminates and yields a
//! closed-form finite sum. This crate builds those expansions, finds the
//! terminating q values, assembles evaluable solution forms (including the
//! complementary 1-z-frame solution, the (1-z)^(1-delta)-prefactored
//! reduced forms and the positive-integer-epsilon lift), and verifies every
//! assembled solution against the differential equation itself with an
//! independent adaptive Runge-Kutta integration oracle.
//!
//! Modules:
//! - [`params`]: the seven-parameter record, validation, frame maps.
//! - [`gauss2f1`]: 2F1 evaluation, derivative, contiguous relations.
//! - [`recurrence`]: R_n, Q_n, P_n and coefficient generation.
//! - [`accessory`]: termination classes, accessory polynomial, roots,
//!   continued-fraction condition.
//! - [`solutions`]: evaluable finite-sum solution forms.
//! - [`verification`]: ODE residual, integration oracle, Wronskian.
//!
//! ```
//! use heun::accessory::{q_polynomial, solve_q};
//! use heun::solutions::build_finite_solution;
//! use heun::verification::{verify_solution, Verdict};
//! use heun::{make_params, ExpansionSpec, Gamma0Choice};
//!
//! // epsilon = -1 puts the equation in the two-term termination class.
//! let p = make_params(1.3, 0.8, -1.0, 0.6, -0.5, 0.0, 2.0)?;
//! let poly = q_polynomial(&p, Gamma0Choice::Gamma, 1)?;
//! let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, 1);
//! for root in solve_q(&poly).iter().filter(|r| r.is_real) {
//!     let form = build_finite_solution(&p, &spec, root.re)?;
//!     let report = verify_solution(&form, &form.params);
//!     assert_eq!(report.verdict, Verdict::Pass);
//! }
//! # Ok::<(), heun::HeunError>(())
//! ```

pub mod accessory;
pub mod error;
pub mod gauss2f1;
pub mod params;
pub mod recurrence;
pub mod solutions;
pub mod verification;

pub use error::{HeunError, Result};
pub use params::{
    derive_delta, derive_epsilon, make_params, ExpansionMode, ExpansionSpec, Frame, Gamma0Choice,
    HeunParameters,
};
