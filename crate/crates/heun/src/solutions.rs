//! Evaluable solution forms: finite hypergeometric sums, the complementary
//! solution in the 1-z frame, the (1-z)^(1-delta)-prefactored reduced forms
//! for gamma0 = alpha or beta, and the lift of the positive-integer-epsilon
//! case.
//!
//! A [`SolutionForm`] is a product of power prefactors with a finite sum of
//! hypergeometric terms, each term
//!
//! ```text
//! coefficient * (1 - x)^p * 2F1(n1, n2; lower_parameter; x)
//! ```
//!
//! where x is z or 1-z depending on the frame. For the forms built directly
//! from the expansion the numerator pair is (alpha, beta) of the parameter
//! record and p = 0; the reduced forms carry explicit numerators and
//! per-term powers produced by the Euler transformation
//! `2F1(a, b; c; z) = (1-z)^(c-a-b) 2F1(c-a, c-b; c; z)`.

use serde::{Deserialize, Serialize};

use crate::accessory::{termination_class_residual, CLASS_TOL};
use crate::error::{HeunError, Result};
use crate::gauss2f1::{hyp2f1, hyp2f1_derivative, hyp2f1_second_derivative, Hyp2F1Args};
use crate::params::{ExpansionMode, ExpansionSpec, Frame, Gamma0Choice, HeunParameters};
use crate::recurrence::{generate_coefficients, RecurrenceContext};

/// Exclusion margin around the singular points for evaluation.
pub const EVAL_MARGIN: f64 = 1e-2;

/// Base of a power prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrefactorBase {
    OneMinusZ,
    ZMinusA,
}

/// A factor base^exponent multiplying the whole sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prefactor {
    pub base: PrefactorBase,
    pub exponent: f64,
}

fn power_is_zero(p: &f64) -> bool {
    *p == 0.0
}

/// One hypergeometric term of a solution form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionTerm {
    pub coefficient: f64,
    pub lower_parameter: f64,
    /// Explicit numerator pair; `None` means (alpha, beta) of the record.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub numerator: Option<(f64, f64)>,
    /// Extra integer power of (1 - x) folded into the term by the Euler
    /// transformation (reduced forms only).
    #[serde(skip_serializing_if = "power_is_zero", default)]
    pub one_minus_z_power: f64,
}

/// An evaluable closed-form (or truncated) solution of the Heun equation.
///
/// `params` always refers to the ORIGINAL equation the form solves, which
/// is what [`crate::verification::verify_solution`] checks against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionForm {
    pub frame: Frame,
    pub prefactors: Vec<Prefactor>,
    pub terms: Vec<SolutionTerm>,
    pub params: HeunParameters,
    /// Equivalent reduced representation, attached for gamma0 = alpha/beta.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reduced: Option<Box<SolutionForm>>,
}

impl SolutionForm {
    /// The leading lower parameter gamma0 of the expansion.
    pub fn gamma0(&self) -> f64 {
        self.terms[0].lower_parameter
    }

    /// Number of hypergeometric terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// u, u', u'' at z; see [`evaluate`].
    pub fn evaluate(&self, z: f64) -> Result<(f64, f64, f64)> {
        evaluate(self, z)
    }
}

/// Builds the terminating finite-sum solution for the accessory parameter
/// `q_root`, which must be a root of the accessory polynomial for this
/// gamma0 choice and order N (spec.mode = Terminating(N)).
pub fn build_finite_solution(
    p: &HeunParameters,
    spec: &ExpansionSpec,
    q_root: f64,
) -> Result<SolutionForm> {
    let n = match spec.mode {
        ExpansionMode::Terminating(n) => n,
        ExpansionMode::Truncated(_) => {
            return Err(HeunError::InvalidInput(
                "build_finite_solution requires a Terminating expansion spec".into(),
            ))
        }
    };
    let class_residual = termination_class_residual(p, spec.gamma0, n);
    if class_residual.abs() > CLASS_TOL {
        return Err(HeunError::TerminationClassMismatch { class_residual });
    }
    let pw = p.with_q(q_root);
    let ctx = RecurrenceContext::from_choice(pw, spec.gamma0);
    let seq = generate_coefficients(&ctx, n + 2)?;
    if seq.terminated_at != Some(n) {
        return Err(HeunError::NotTerminated { expected: n });
    }
    let gamma0 = ctx.gamma0();
    let terms: Vec<SolutionTerm> = (0..=n)
        .map(|k| SolutionTerm {
            coefficient: seq.coefficients[k],
            lower_parameter: gamma0 - k as f64,
            numerator: None,
            one_minus_z_power: 0.0,
        })
        .collect();
    let mut form = SolutionForm {
        frame: Frame::DirectZ,
        prefactors: vec![],
        terms,
        params: pw,
        reduced: None,
    };
    if matches!(spec.gamma0, Gamma0Choice::Alpha | Gamma0Choice::Beta) {
        form.reduced = Some(Box::new(reduce_to_polynomial_form(&form)?));
    }
    Ok(form)
}

/// The complementary solution in the 1-z frame: the same expansion applied
/// to the transformed equation with gamma0 = delta. It terminates at the
/// same accessory-parameter values as the direct-frame epsilon = -N
/// expansion, with the same N.
pub fn build_second_solution(p: &HeunParameters, q_root: f64) -> Result<SolutionForm> {
    let n_real = -p.epsilon();
    let n_round = n_real.round();
    if (n_real - n_round).abs() > CLASS_TOL || n_round < 0.0 {
        return Err(HeunError::TerminationClassMismatch {
            class_residual: n_real - n_round,
        });
    }
    let n = n_round as usize;
    let original = p.with_q(q_root);
    let mapped = original.map_to_one_minus_z()?;
    let ctx = RecurrenceContext::from_choice(mapped, Gamma0Choice::Gamma);
    let seq = generate_coefficients(&ctx, n + 2)?;
    if seq.terminated_at != Some(n) {
        return Err(HeunError::NotTerminated { expected: n });
    }
    let gamma0 = ctx.gamma0(); // = delta of the original equation
    let terms: Vec<SolutionTerm> = (0..=n)
        .map(|k| SolutionTerm {
            coefficient: seq.coefficients[k],
            lower_parameter: gamma0 - k as f64,
            numerator: None,
            one_minus_z_power: 0.0,
        })
        .collect();
    Ok(SolutionForm {
        frame: Frame::OneMinusZ,
        prefactors: vec![],
        terms,
        params: original,
        reduced: None,
    })
}

/// Rewrites a gamma0 = alpha (or beta) finite sum as (1-z)^(1-delta) times
/// terminating (polynomial) hypergeometric factors via the Euler
/// transformation; the per-term powers (1-z)^(-beta-n) combine with the
/// class condition into the single 1-delta prefactor plus nonnegative
/// integer leftovers.
pub fn reduce_to_polynomial_form(form: &SolutionForm) -> Result<SolutionForm> {
    if form.frame != Frame::DirectZ
        || form
            .terms
            .iter()
            .any(|t| t.numerator.is_some() || t.one_minus_z_power != 0.0)
    {
        return Err(HeunError::InvalidInput(
            "reduce_to_polynomial_form expects an unreduced direct-frame sum".into(),
        ));
    }
    let p = &form.params;
    let gamma0 = form.gamma0();
    // The non-gamma0 numerator parameter.
    let other = if (gamma0 - p.alpha()).abs() <= 1e-9 {
        p.beta()
    } else if (gamma0 - p.beta()).abs() <= 1e-9 {
        p.alpha()
    } else {
        return Err(HeunError::WrongGamma0);
    };
    let n = form.terms.len() - 1;
    let class_residual = p.epsilon() + p.gamma() - gamma0 + n as f64;
    if class_residual.abs() > CLASS_TOL {
        return Err(HeunError::TerminationClassMismatch { class_residual });
    }
    let terms: Vec<SolutionTerm> = form
        .terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let kf = k as f64;
            SolutionTerm {
                coefficient: t.coefficient,
                lower_parameter: t.lower_parameter,
                numerator: Some((-kf, gamma0 - other - kf)),
                one_minus_z_power: (n - k) as f64,
            }
        })
        .collect();
    let mut prefactors = form.prefactors.clone();
    prefactors.push(Prefactor {
        base: PrefactorBase::OneMinusZ,
        exponent: 1.0 - p.delta(),
    });
    Ok(SolutionForm {
        frame: Frame::DirectZ,
        prefactors,
        terms,
        params: *p,
        reduced: None,
    })
}

/// Builds a solution of the ORIGINAL equation for positive integer
/// epsilon >= 2 as u = (z-a)^(1-epsilon) v, where v solves the transformed
/// equation (epsilon -> 2-epsilon <= 0) and terminates at
/// `q_root_of_transformed`, a root of the transformed accessory polynomial
/// of degree epsilon - 1. The resulting expansion has epsilon - 1 terms.
pub fn build_positive_epsilon_solution(
    p: &HeunParameters,
    q_root_of_transformed: f64,
) -> Result<SolutionForm> {
    let eps = p.epsilon();
    let m = eps.round();
    if (eps - m).abs() > CLASS_TOL || m < 2.0 {
        return Err(HeunError::DomainError {
            value: eps,
            context: "positive-epsilon lift requires integer epsilon >= 2",
        });
    }
    let transformed = p.map_positive_epsilon()?;
    let n1 = (m - 2.0) as usize;
    let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, n1);
    let v_form = build_finite_solution(&transformed, &spec, q_root_of_transformed)?;
    let numerator = Some((transformed.alpha(), transformed.beta()));
    let terms: Vec<SolutionTerm> = v_form
        .terms
        .iter()
        .map(|t| SolutionTerm { numerator, ..*t })
        .collect();
    let q_original = q_root_of_transformed + p.gamma() * (eps - 1.0);
    Ok(SolutionForm {
        frame: Frame::DirectZ,
        prefactors: vec![Prefactor {
            base: PrefactorBase::ZMinusA,
            exponent: 1.0 - eps,
        }],
        terms,
        params: p.with_q(q_original),
        reduced: None,
    })
}

/// base^exponent with integer exponents evaluated exactly (negative bases
/// allowed); fractional exponents require a positive base.
fn power(base: f64, exponent: f64) -> Result<f64> {
    let r = exponent.round();
    if (exponent - r).abs() <= 1e-9 && r.abs() <= i32::MAX as f64 {
        Ok(base.powi(r as i32))
    } else if base > 0.0 {
        Ok(base.powf(exponent))
    } else {
        Err(HeunError::DomainError {
            value: base,
            context: "fractional power of a nonpositive prefactor base",
        })
    }
}

/// u, u' and u'' of the solution form at z.
///
/// The second derivative of each 2F1 comes from the hypergeometric
/// differential equation rather than a third evaluation path. Domain:
/// z in (0, 1) excluding [`EVAL_MARGIN`] neighborhoods of 0, 1 and a.
pub fn evaluate(form: &SolutionForm, z: f64) -> Result<(f64, f64, f64)> {
    let p = &form.params;
    if !(EVAL_MARGIN..=1.0 - EVAL_MARGIN).contains(&z) || (z - p.a()).abs() < EVAL_MARGIN {
        return Err(HeunError::DomainError {
            value: z,
            context: "evaluation point outside (0,1) or too close to a singular point",
        });
    }
    let (arg, darg) = match form.frame {
        Frame::DirectZ => (z, 1.0),
        Frame::OneMinusZ => (1.0 - z, -1.0),
    };

    // Sum of terms and its first/second derivatives with respect to arg.
    let mut s = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for term in &form.terms {
        let (n1, n2) = term.numerator.unwrap_or((p.alpha(), p.beta()));
        let args = Hyp2F1Args::new(n1, n2, term.lower_parameter, arg);
        let f = hyp2f1(args)?;
        let fp = hyp2f1_derivative(args)?;
        let fpp = hyp2f1_second_derivative(args, f, fp)?;
        let (g, g1, g2) = if term.one_minus_z_power == 0.0 {
            (1.0, 0.0, 0.0)
        } else {
            let pw = term.one_minus_z_power;
            let base = 1.0 - arg;
            let g = power(base, pw)?;
            let g1 = -pw * power(base, pw - 1.0)?;
            let g2 = pw * (pw - 1.0) * power(base, pw - 2.0)?;
            (g, g1, g2)
        };
        s += term.coefficient * g * f;
        s1 += term.coefficient * (g1 * f + g * fp);
        s2 += term.coefficient * (g2 * f + 2.0 * g1 * fp + g * fpp);
    }
    // Chain rule to z-derivatives (darg^2 = 1).
    let sz1 = s1 * darg;
    let sz2 = s2;

    // Prefactor product and its logarithmic derivatives in z.
    let mut pf = 1.0;
    let mut l1 = 0.0; // P'/P
    let mut curv = 0.0; // sum of e * (b'/b)^2
    for pre in &form.prefactors {
        let (b, db) = match pre.base {
            PrefactorBase::OneMinusZ => (1.0 - z, -1.0),
            PrefactorBase::ZMinusA => (z - p.a(), 1.0),
        };
        if b == 0.0 {
            return Err(HeunError::DomainError {
                value: z,
                context: "prefactor base vanishes",
            });
        }
        pf *= power(b, pre.exponent)?;
        let ratio = db / b;
        l1 += pre.exponent * ratio;
        curv += pre.exponent * ratio * ratio;
    }
    let l2 = l1 * l1 - curv; // P''/P

    let u = pf * s;
    let u1 = pf * (l1 * s + sz1);
    let u2 = pf * (l2 * s + 2.0 * l1 * sz1 + sz2);
    Ok((u, u1, u2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accessory::{q_polynomial, solve_q};
    use crate::params::make_params;
    use crate::recurrence::{coeff_p, coeff_q, coeff_r};

    fn gamma_class_params(n: usize) -> HeunParameters {
        let eps = -(n as f64);
        let (gm, dl, al, a) = (0.5, 0.7, -1.2, 3.0);
        let be = gm + dl + eps - 1.0 - al;
        make_params(gm, dl, eps, al, be, 0.0, a).unwrap()
    }

    #[test]
    fn epsilon_zero_single_term() {
        let p = gamma_class_params(0);
        let q = p.a() * p.alpha() * p.beta();
        let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, 0);
        let form = build_finite_solution(&p, &spec, q).unwrap();
        assert_eq!(form.term_count(), 1);
        assert_eq!(form.terms[0].coefficient, 1.0);
        assert_eq!(form.terms[0].lower_parameter, p.gamma());
        // u coincides with the single hypergeometric function.
        let z = 0.37;
        let (u, up, _) = form.evaluate(z).unwrap();
        let args = Hyp2F1Args::new(p.alpha(), p.beta(), p.gamma(), z);
        assert_eq!(u, hyp2f1(args).unwrap());
        assert_eq!(up, hyp2f1_derivative(args).unwrap());
    }

    #[test]
    fn epsilon_minus_two_coefficients_from_ratios() {
        let p = gamma_class_params(2);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 2).unwrap();
        let root = solve_q(&poly)
            .into_iter()
            .find(|r| r.is_real)
            .expect("a real root");
        let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, 2);
        let form = build_finite_solution(&p, &spec, root.re).unwrap();
        assert_eq!(form.term_count(), 3);
        let ctx = RecurrenceContext::from_choice(p.with_q(root.re), Gamma0Choice::Gamma);
        let a1 = -coeff_q(1, &ctx) / coeff_r(1, &ctx).unwrap();
        let a2 = -(coeff_q(2, &ctx) * a1 + coeff_p(2, &ctx)) / coeff_r(2, &ctx).unwrap();
        assert!((form.terms[1].coefficient - a1).abs() <= 1e-12 * a1.abs().max(1.0));
        assert!((form.terms[2].coefficient - a2).abs() <= 1e-12 * a2.abs().max(1.0));
    }

    #[test]
    fn wrong_q_fails_to_terminate() {
        let p = gamma_class_params(1);
        let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, 1);
        let err = build_finite_solution(&p, &spec, 123.456).unwrap_err();
        assert_eq!(err, HeunError::NotTerminated { expected: 1 });
    }

    #[test]
    fn reduced_n0_is_pure_power() {
        // epsilon + gamma - alpha = 0, i.e. beta = delta - 1: u = (1-z)^(1-delta).
        let (gm, dl, eps, a) = (0.45, 2.3, -0.7, 3.0);
        let al = eps + gm;
        let be = dl - 1.0;
        let p = make_params(gm, dl, eps, al, be, 0.0, a).unwrap();
        let q = a * gm * (dl - 1.0);
        let spec = ExpansionSpec::terminating(Gamma0Choice::Alpha, 0);
        let form = build_finite_solution(&p, &spec, q).unwrap();
        let reduced = form.reduced.as_ref().expect("reduced form attached");
        assert_eq!(reduced.prefactors.len(), 1);
        assert!((reduced.prefactors[0].exponent - (1.0 - dl)).abs() < 1e-12);
        let z = 0.5;
        let (u, _, _) = reduced.evaluate(z).unwrap();
        let want = 0.5f64.powf(1.0 - dl);
        assert!(
            (u - want).abs() <= 1e-12 * want.abs(),
            "u = {u}, want {want}"
        );
        // The unreduced representation agrees pointwise.
        let (u0, _, _) = form.evaluate(z).unwrap();
        assert!((u0 - want).abs() <= 1e-10 * want.abs(), "unreduced {u0}");
    }

    #[test]
    fn reduced_matches_unreduced_pointwise() {
        // gamma0 = alpha, N = 1 (beta = delta - 2).
        let (gm, dl, eps, a) = (0.45, 2.3, -0.7, 3.0);
        let al = eps + gm + 1.0;
        let be = dl - 2.0;
        let p = make_params(gm, dl, eps, al, be, 0.0, a).unwrap();
        let poly = q_polynomial(&p, Gamma0Choice::Alpha, 1).unwrap();
        for root in solve_q(&poly) {
            assert!(root.is_real);
            let spec = ExpansionSpec::terminating(Gamma0Choice::Alpha, 1);
            let form = build_finite_solution(&p, &spec, root.re).unwrap();
            let reduced = form.reduced.as_ref().unwrap();
            for k in 1..20 {
                let z = 0.05 + 0.9 * (k as f64) / 20.0;
                if (z - p.a()).abs() < EVAL_MARGIN {
                    continue;
                }
                let (u, _, _) = form.evaluate(z).unwrap();
                let (v, _, _) = reduced.evaluate(z).unwrap();
                assert!(
                    (u - v).abs() <= 1e-10 * u.abs().max(1e-3),
                    "z = {z}: unreduced {u} vs reduced {v}"
                );
            }
        }
    }

    #[test]
    fn reduce_rejects_gamma_form() {
        let p = gamma_class_params(0);
        let q = p.a() * p.alpha() * p.beta();
        let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, 0);
        let form = build_finite_solution(&p, &spec, q).unwrap();
        assert_eq!(
            reduce_to_polynomial_form(&form).unwrap_err(),
            HeunError::WrongGamma0
        );
    }

    #[test]
    fn positive_epsilon_trivial_constant_case() {
        // epsilon = 2 with alpha*beta = gamma + delta: the transformed
        // equation has alpha1*beta1 = 0 and root q1 = 0, so v = 1 and
        // u = (z-a)^(-1).
        let (gm, dl, a) = (0.6f64, 0.9f64, 2.0f64);
        let eps = 2.0;
        // Need alpha + beta = gm + dl + eps - 1 and alpha*beta = gm + dl.
        let s = gm + dl + eps - 1.0;
        let prod = gm + dl;
        let disc = (s * s - 4.0 * prod).sqrt();
        let al = (s + disc) / 2.0;
        let be = (s - disc) / 2.0;
        let p = make_params(gm, dl, eps, al, be, 0.0, a).unwrap();
        let transformed = p.map_positive_epsilon().unwrap();
        assert!((transformed.alpha() * transformed.beta()).abs() < 1e-12);
        let form = build_positive_epsilon_solution(&p, 0.0).unwrap();
        assert_eq!(form.term_count(), 1); // epsilon - 1 = 1 term
        assert!((form.params.q() - gm).abs() < 1e-12); // q = gamma + a*0
        let z = 0.4;
        let (u, up, _) = form.evaluate(z).unwrap();
        let want = 1.0 / (z - a);
        assert!((u - want).abs() <= 1e-13 * want.abs());
        let want_up = -1.0 / ((z - a) * (z - a));
        assert!((up - want_up).abs() <= 1e-12 * want_up.abs());
    }

    #[test]
    fn evaluate_derivatives_match_finite_differences() {
        let p = gamma_class_params(1);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 1).unwrap();
        let root = solve_q(&poly)[0];
        let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, 1);
        let form = build_finite_solution(&p, &spec, root.re).unwrap();
        let h = 1e-6;
        for k in 1..=10 {
            let z = 0.08 + 0.08 * k as f64;
            let (_, up, upp) = form.evaluate(z).unwrap();
            let (u_plus, up_plus, _) = form.evaluate(z + h).unwrap();
            let (u_minus, up_minus, _) = form.evaluate(z - h).unwrap();
            let fd1 = (u_plus - u_minus) / (2.0 * h);
            let fd2 = (up_plus - up_minus) / (2.0 * h);
            assert!(
                (up - fd1).abs() <= 1e-6 * up.abs().max(1e-3),
                "z = {z}: u' = {up} vs fd {fd1}"
            );
            assert!(
                (upp - fd2).abs() <= 1e-5 * upp.abs().max(1e-2),
                "z = {z}: u'' = {upp} vs fd {fd2}"
            );
        }
    }

    #[test]
    fn evaluate_domain_guard() {
        let p = gamma_class_params(0);
        let q = p.a() * p.alpha() * p.beta();
        let spec = ExpansionSpec::terminating(Gamma0Choice::Gamma, 0);
        let form = build_finite_solution(&p, &spec, q).unwrap();
        for z in [0.0, 0.005, 0.995, 1.0, -0.3, 1.5] {
            assert!(matches!(
                form.evaluate(z),
                Err(HeunError::DomainError { .. })
            ));
        }
    }
}
