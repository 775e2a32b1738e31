//! The accessory-parameter polynomial whose roots make an expansion
//! terminate, and the equivalent finite continued-fraction condition.
//!
//! Termination at index N requires two things: the class condition (one of
//! epsilon, epsilon + gamma - alpha, epsilon + gamma - beta equals -N,
//! matching the gamma0 choice), which makes P_{N+2} vanish identically, and
//! a_{N+1}(q) = 0. Each Q_n is linear in q with slope -1 while R_n, P_n are
//! q-free, so a_{N+1}(q) is a polynomial of degree exactly N + 1; its roots
//! are the terminating accessory-parameter values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HeunError, Result};
use crate::params::{Gamma0Choice, HeunParameters};
use crate::recurrence::{coeff_p, coeff_q, coeff_r, RecurrenceContext};

/// Tolerance on the class condition epsilon(+gamma-alpha|beta) = -N.
pub const CLASS_TOL: f64 = 1e-9;

/// Which of the three termination classes a polynomial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TerminationClass {
    EpsilonEqMinusN,
    EpsGammaMinusAlphaEqMinusN,
    EpsGammaMinusBetaEqMinusN,
}

impl From<Gamma0Choice> for TerminationClass {
    fn from(choice: Gamma0Choice) -> Self {
        match choice {
            Gamma0Choice::Gamma => TerminationClass::EpsilonEqMinusN,
            Gamma0Choice::Alpha => TerminationClass::EpsGammaMinusAlphaEqMinusN,
            Gamma0Choice::Beta => TerminationClass::EpsGammaMinusBetaEqMinusN,
        }
    }
}

/// Signed residual of the termination class condition for order `n`.
pub fn termination_class_residual(p: &HeunParameters, gamma0: Gamma0Choice, n: usize) -> f64 {
    let nf = n as f64;
    match gamma0 {
        Gamma0Choice::Gamma => p.epsilon() + nf,
        Gamma0Choice::Alpha => p.epsilon() + p.gamma() - p.alpha() + nf,
        Gamma0Choice::Beta => p.epsilon() + p.gamma() - p.beta() + nf,
    }
}

/// True iff the class condition for this gamma0 choice and order holds
/// within [`CLASS_TOL`].
pub fn validate_termination_class(p: &HeunParameters, gamma0: Gamma0Choice, n: usize) -> bool {
    termination_class_residual(p, gamma0, n).abs() <= CLASS_TOL
}

/// Monic polynomial in q whose roots terminate the expansion at index N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessoryPolynomial {
    /// Monic coefficients, lowest degree first; length N + 2.
    pub coefficients: Vec<f64>,
    /// N + 1.
    pub degree: usize,
    pub termination_class: TerminationClass,
    pub n: usize,
    /// Leading coefficient of the unnormalized a_{N+1}(q); equals the
    /// product of the 1/R_n extraction factors for n = 1..N+1.
    pub raw_leading: f64,
}

impl AccessoryPolynomial {
    /// Evaluate the monic polynomial at a real point.
    pub fn eval(&self, q: f64) -> f64 {
        horner_real(&self.coefficients, q)
    }

    /// Evaluate at a complex point, returning (value, derivative).
    pub fn eval_complex(&self, q: Complex64) -> (Complex64, Complex64) {
        horner_complex(&self.coefficients, q)
    }

    /// Sum of |c_k| |q|^k, the natural residual scale at q.
    pub fn scale_at(&self, q: f64) -> f64 {
        let mut s = 0.0;
        let mut p = 1.0;
        for c in &self.coefficients {
            s += c.abs() * p;
            p *= q.abs();
        }
        s
    }
}

fn horner_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn horner_complex(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        deriv = deriv * x + value;
        value = value * x + c;
    }
    (value, deriv)
}

/// Builds the monic accessory polynomial by running the coefficient
/// recurrence with q kept symbolic (dense polynomial arithmetic).
///
/// The q field of `p` is ignored; only the six structural parameters enter.
pub fn q_polynomial(
    p: &HeunParameters,
    gamma0: Gamma0Choice,
    n: usize,
) -> Result<AccessoryPolynomial> {
    let residual = termination_class_residual(p, gamma0, n);
    if residual.abs() > CLASS_TOL {
        return Err(HeunError::TerminationClassMismatch {
            class_residual: residual,
        });
    }
    let ctx = RecurrenceContext::from_choice(p.with_q(0.0), gamma0);
    // a_k(q) as dense coefficient vectors, lowest degree first.
    let mut prev2: Vec<f64> = vec![]; // a_{-1} = 0
    let mut prev1: Vec<f64> = vec![1.0]; // a_0 = 1
    for k in 1..=(n + 1) {
        let r = coeff_r(k, &ctx)?;
        let threshold = 1e-12 * (1.0 + p.a().abs()) * (1.0 + k as f64) * (1.0 + k as f64);
        if r.abs() <= threshold {
            return Err(HeunError::RecurrenceBreakdown { n: k });
        }
        // Q_k(q) = q0 - q, with q0 the value at q = 0.
        let q0 = coeff_q(k, &ctx);
        let pk = coeff_p(k, &ctx);
        let mut next = vec![0.0; k + 1];
        for (i, &c) in prev1.iter().enumerate() {
            next[i] += q0 * c; // q-free part of Q_k * a_{k-1}
            next[i + 1] -= c; // the -q part shifts the degree up
        }
        for (i, &c) in prev2.iter().enumerate() {
            next[i] += pk * c;
        }
        for c in next.iter_mut() {
            *c /= -r;
        }
        prev2 = std::mem::replace(&mut prev1, next);
    }
    let raw_leading = *prev1.last().expect("degree N+1 polynomial");
    let coefficients: Vec<f64> = prev1.iter().map(|c| c / raw_leading).collect();
    Ok(AccessoryPolynomial {
        coefficients,
        degree: n + 1,
        termination_class: gamma0.into(),
        n,
        raw_leading,
    })
}

/// One root of the accessory polynomial. Real roots (within 1e-8 relative
/// imaginary part) are flagged usable for real solution assembly; complex
/// roots are reported but flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccessoryRoot {
    pub re: f64,
    pub im: f64,
    pub is_real: bool,
}

impl AccessoryRoot {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn real_value(&self) -> Option<f64> {
        if self.is_real {
            Some(self.re)
        } else {
            None
        }
    }
}

/// All N+1 roots (with multiplicity) via companion-matrix eigenvalues
/// followed by Newton polishing.
pub fn solve_q(poly: &AccessoryPolynomial) -> Vec<AccessoryRoot> {
    let d = poly.degree;
    debug_assert_eq!(poly.coefficients.len(), d + 1);
    let companion = DMatrix::<f64>::from_fn(d, d, |i, j| {
        if j + 1 == d {
            -poly.coefficients[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eigen = companion.complex_eigenvalues();
    let mut roots: Vec<AccessoryRoot> = eigen
        .iter()
        .map(|&ev| polish_root(poly, Complex64::new(ev.re, ev.im)))
        .collect();
    roots.sort_by(|x, y| {
        (x.re, x.im)
            .partial_cmp(&(y.re, y.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    roots
}

fn polish_root(poly: &AccessoryPolynomial, start: Complex64) -> AccessoryRoot {
    let mut x = start;
    let mut best = x;
    let mut best_res = f64::INFINITY;
    for _ in 0..30 {
        let (value, deriv) = poly.eval_complex(x);
        let scale = poly.scale_at(x.norm()).max(f64::MIN_POSITIVE);
        let res = value.norm() / scale;
        if res < best_res {
            best_res = res;
            best = x;
        }
        if res <= 1e-16 || deriv.norm() == 0.0 {
            break;
        }
        let step = value / deriv;
        x -= step;
        if step.norm() <= 1e-16 * x.norm().max(1.0) {
            let (value, _) = poly.eval_complex(x);
            if value.norm() / scale < best_res {
                best = x;
            }
            break;
        }
    }
    let x = best;
    let is_real = x.im.abs() <= 1e-8 * x.re.abs().max(1.0);
    AccessoryRoot {
        re: x.re,
        im: if is_real { 0.0 } else { x.im },
        is_real,
    }
}

/// Value of the finite continued fraction
///
/// ```text
/// Q_1 - R_1 P_2 / (Q_2 - R_2 P_3 / (... - R_N P_{N+1} / Q_{N+1}))
/// ```
///
/// at the accessory parameter carried by `p`. Vanishes exactly at the
/// terminating q values; kept as a cross-check of [`q_polynomial`] because
/// intermediate denominators can vanish spuriously.
pub fn continued_fraction_residual(
    p: &HeunParameters,
    gamma0: Gamma0Choice,
    n: usize,
) -> Result<f64> {
    let residual = termination_class_residual(p, gamma0, n);
    if residual.abs() > CLASS_TOL {
        return Err(HeunError::TerminationClassMismatch {
            class_residual: residual,
        });
    }
    let ctx = RecurrenceContext::from_choice(*p, gamma0);
    let mut denom = coeff_q(n + 1, &ctx);
    for k in (1..=n).rev() {
        let numer = coeff_r(k, &ctx)? * coeff_p(k + 1, &ctx);
        if denom == 0.0 {
            return Err(HeunError::ZeroDenominator { depth: k + 1 });
        }
        denom = coeff_q(k, &ctx) - numer / denom;
        if !denom.is_finite() {
            return Err(HeunError::ZeroDenominator { depth: k });
        }
    }
    Ok(denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_delta, make_params};

    /// epsilon = -N class parameters with the remaining exponents fixed.
    fn gamma_class_params(n: usize) -> HeunParameters {
        let eps = -(n as f64);
        let (gm, dl, al, a) = (0.5, 0.7, -1.2, 3.0);
        let be = gm + dl + eps - 1.0 - al;
        make_params(gm, dl, eps, al, be, 0.0, a).unwrap()
    }

    /// epsilon + gamma - alpha = -N class parameters.
    fn alpha_class_params(n: usize) -> HeunParameters {
        let (gm, dl, eps, a) = (0.45, 2.3, -0.7, 3.0);
        let al = eps + gm + n as f64;
        let be = dl - 1.0 - n as f64;
        let dl_check = derive_delta(gm, eps, al, be);
        assert!((dl_check - dl).abs() < 1e-12);
        make_params(gm, dl, eps, al, be, 0.0, a).unwrap()
    }

    #[test]
    fn class_validation_examples() {
        let p = gamma_class_params(2);
        assert!(validate_termination_class(&p, Gamma0Choice::Gamma, 2));
        assert!(!validate_termination_class(&p, Gamma0Choice::Gamma, 1));
        let p = alpha_class_params(0);
        assert!(validate_termination_class(&p, Gamma0Choice::Alpha, 0));
        // epsilon + gamma - alpha = 0 forces beta = delta - 1.
        assert!((p.beta() - (p.delta() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn n0_polynomial_is_q_minus_a_alphabeta() {
        let p = gamma_class_params(0);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 0).unwrap();
        assert_eq!(poly.degree, 1);
        let want = -p.a() * p.alpha() * p.beta();
        assert!((poly.coefficients[0] - want).abs() <= 1e-12 * want.abs().max(1.0));
        assert_eq!(poly.coefficients[1], 1.0);
    }

    #[test]
    fn alpha_class_n0_polynomial() {
        let p = alpha_class_params(0);
        let poly = q_polynomial(&p, Gamma0Choice::Alpha, 0).unwrap();
        assert_eq!(poly.degree, 1);
        let want = -p.a() * p.gamma() * (p.delta() - 1.0);
        assert!(
            (poly.coefficients[0] - want).abs() <= 1e-11 * want.abs().max(1.0),
            "constant term {} vs {want}",
            poly.coefficients[0]
        );
    }

    #[test]
    fn n1_polynomial_matches_explicit_quadratic() {
        let p = gamma_class_params(1);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 1).unwrap();
        // (q - s)^2 + B (q - s) + C with s = a alpha beta expanded in q.
        let (a, al, be, gm, dl) = (p.a(), p.alpha(), p.beta(), p.gamma(), p.delta());
        let s = a * al * be;
        let b_coef = (1.0 - a) * (gm - 1.0) + a * (1.0 - dl);
        let c_coef = -a * (1.0 - a) * al * be;
        let want = [s * s - b_coef * s + c_coef, -2.0 * s + b_coef, 1.0];
        let scale = want.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for (got, want) in poly.coefficients.iter().zip(want) {
            assert!(
                (got - want).abs() <= 1e-10 * scale,
                "coefficient {got} vs {want}"
            );
        }
    }

    #[test]
    fn raw_leading_is_product_of_inverse_r() {
        let p = gamma_class_params(2);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 2).unwrap();
        let ctx = RecurrenceContext::from_choice(p.with_q(0.0), Gamma0Choice::Gamma);
        let mut prod = 1.0;
        for k in 1..=3 {
            prod /= coeff_r(k, &ctx).unwrap();
        }
        assert!(
            (poly.raw_leading - prod).abs() <= 1e-12 * prod.abs(),
            "raw leading {} vs {prod}",
            poly.raw_leading
        );
    }

    #[test]
    fn solve_single_root() {
        let p = gamma_class_params(0);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 0).unwrap();
        let roots = solve_q(&poly);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].is_real);
        let want = p.a() * p.alpha() * p.beta();
        assert!((roots[0].re - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn solve_quadratic_roots_match_formula() {
        let p = gamma_class_params(1);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 1).unwrap();
        let roots = solve_q(&poly);
        assert_eq!(roots.len(), 2);
        let (a, al, be, gm, dl) = (p.a(), p.alpha(), p.beta(), p.gamma(), p.delta());
        let s = a * al * be;
        let b_coef = (1.0 - a) * (gm - 1.0) + a * (1.0 - dl);
        let c_coef = -a * (1.0 - a) * al * be;
        let disc = (b_coef * b_coef - 4.0 * c_coef).sqrt();
        let mut want = [s + (-b_coef - disc) / 2.0, s + (-b_coef + disc) / 2.0];
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (root, want) in roots.iter().zip(want) {
            assert!(root.is_real);
            assert!(
                (root.re - want).abs() <= 1e-10 * want.abs().max(1.0),
                "root {} vs {want}",
                root.re
            );
            // Residual at the polished root.
            assert!(poly.eval(root.re).abs() <= 1e-12 * poly.scale_at(root.re));
        }
    }

    #[test]
    fn quadratic_with_zero_alphabeta_has_trivial_roots() {
        // alpha*beta = 0 kills the constant term of the quadratic:
        // roots x = 0 and x = -B (with s = a alpha beta = 0, so x = q).
        let eps = -1.0;
        let (gm, dl, a) = (0.5, 0.7, 3.0);
        let al = 0.0;
        let be = gm + dl + eps - 1.0 - al;
        let p = make_params(gm, dl, eps, al, be, 0.0, a).unwrap();
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 1).unwrap();
        let roots = solve_q(&poly);
        let b_coef = (1.0 - a) * (gm - 1.0) + a * (1.0 - dl);
        let mut got: Vec<f64> = roots.iter().map(|r| r.re).collect();
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut want = [0.0, -b_coef];
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-10 * w.abs().max(1.0), "{g} vs {w}");
        }
    }

    #[test]
    fn continued_fraction_n0_is_q1() {
        let p = gamma_class_params(0).with_q(0.4);
        let r = continued_fraction_residual(&p, Gamma0Choice::Gamma, 0).unwrap();
        let want = p.a() * p.alpha() * p.beta() - p.q();
        assert!((r - want).abs() <= 1e-13 * want.abs().max(1.0));
        let at_root = gamma_class_params(0).with_q(p.a() * p.alpha() * p.beta());
        let r = continued_fraction_residual(&at_root, Gamma0Choice::Gamma, 0).unwrap();
        assert!(r.abs() <= 1e-12);
    }

    #[test]
    fn continued_fraction_vanishes_at_polynomial_roots() {
        let p = gamma_class_params(1);
        let poly = q_polynomial(&p, Gamma0Choice::Gamma, 1).unwrap();
        for root in solve_q(&poly) {
            let at_root = p.with_q(root.re);
            let r = continued_fraction_residual(&at_root, Gamma0Choice::Gamma, 1).unwrap();
            let scale = poly.scale_at(root.re);
            assert!(r.abs() <= 1e-9 * scale, "residual {r} at q = {}", root.re);
            // Away from the root the residual is bounded away from zero.
            let off = p.with_q(root.re + 1.0);
            let r_off = continued_fraction_residual(&off, Gamma0Choice::Gamma, 1).unwrap();
            assert!(r_off.abs() > 1e-3 * scale, "off-root residual {r_off}");
        }
    }

    #[test]
    fn class_mismatch_is_rejected() {
        let p = gamma_class_params(1);
        let err = q_polynomial(&p, Gamma0Choice::Gamma, 2).unwrap_err();
        assert!(matches!(err, HeunError::TerminationClassMismatch { .. }));
    }

    #[test]
    fn root_count_with_multiplicity() {
        for n in 0..4usize {
            let p = gamma_class_params(n);
            let poly = q_polynomial(&p, Gamma0Choice::Gamma, n).unwrap();
            assert_eq!(solve_q(&poly).len(), n + 1);
        }
    }
}
