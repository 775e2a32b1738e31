//! Parameter set of the general Heun equation and the parameter maps
//! between the frames used by the expansions.
//!
//! The equation
//!
//! ```text
//! u'' + (gamma/z + delta/(z-1) + epsilon/(z-a)) u'
//!     + (alpha*beta*z - q) / (z (z-1) (z-a)) u = 0
//! ```
//!
//! has regular singular points at 0, 1, a and infinity provided the
//! Fuchsian condition `1 + alpha + beta = gamma + delta + epsilon` holds.
//! All types here are immutable values; all operations are pure.

use serde::{Deserialize, Serialize};

use crate::error::{HeunError, Result};

/// Absolute tolerance for parameter validation.
pub const VALIDATION_TOL: f64 = 1e-12;

/// The seven parameters of the general Heun equation.
///
/// Constructed through [`make_params`] (or [`HeunParameters::new`]), which
/// enforces the Fuchsian condition and `a` being distinct from the other
/// finite singular points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeunParameters {
    gamma: f64,
    delta: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    q: f64,
    a: f64,
}

impl HeunParameters {
    /// Validating constructor; see [`make_params`].
    pub fn new(
        gamma: f64,
        delta: f64,
        epsilon: f64,
        alpha: f64,
        beta: f64,
        q: f64,
        a: f64,
    ) -> Result<Self> {
        let residual = fuchsian_residual(gamma, delta, epsilon, alpha, beta);
        if residual > VALIDATION_TOL {
            return Err(HeunError::FuchsianViolation { residual });
        }
        if a.abs() <= VALIDATION_TOL || (a - 1.0).abs() <= VALIDATION_TOL {
            return Err(HeunError::SingularA { a });
        }
        for (v, name) in [
            (gamma, "gamma"),
            (delta, "delta"),
            (epsilon, "epsilon"),
            (alpha, "alpha"),
            (beta, "beta"),
            (q, "q"),
            (a, "a"),
        ] {
            if !v.is_finite() {
                return Err(HeunError::DomainError {
                    value: v,
                    context: name,
                });
            }
        }
        Ok(Self {
            gamma,
            delta,
            epsilon,
            alpha,
            beta,
            q,
            a,
        })
    }

    /// Bypasses validation; test-only escape hatch for exercising the raw
    /// mapping arithmetic on records that fail the Fuchsian check.
    #[cfg(test)]
    pub(crate) fn new_unchecked(
        gamma: f64,
        delta: f64,
        epsilon: f64,
        alpha: f64,
        beta: f64,
        q: f64,
        a: f64,
    ) -> Self {
        Self {
            gamma,
            delta,
            epsilon,
            alpha,
            beta,
            q,
            a,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Same parameters with the accessory parameter replaced.
    pub fn with_q(&self, q: f64) -> Self {
        Self { q, ..*self }
    }

    /// Residual of the Fuchsian condition for this record.
    pub fn fuchsian_residual(&self) -> f64 {
        fuchsian_residual(self.gamma, self.delta, self.epsilon, self.alpha, self.beta)
    }

    /// Parameters of the equation obtained by the variable change
    /// z -> 1 - z: gamma and delta swap, q -> -q + alpha*beta, a -> 1 - a.
    ///
    /// The map is an involution and preserves the Fuchsian residual.
    pub fn map_to_one_minus_z(&self) -> Result<Self> {
        let mapped = Self {
            gamma: self.delta,
            delta: self.gamma,
            epsilon: self.epsilon,
            alpha: self.alpha,
            beta: self.beta,
            q: -self.q + self.alpha * self.beta,
            a: 1.0 - self.a,
        };
        let a = mapped.a;
        if a.abs() <= VALIDATION_TOL || (a - 1.0).abs() <= VALIDATION_TOL {
            return Err(HeunError::SingularA { a });
        }
        Ok(mapped)
    }

    /// Parameters of the equation satisfied by v where u = (z-a)^(1-epsilon) v.
    ///
    /// epsilon -> 2 - epsilon, q -> q - gamma (epsilon - 1), and the
    /// exponents at infinity shift: the pair (alpha', beta') consists of the
    /// two roots of
    ///
    /// ```text
    /// x^2 - (alpha + beta - 2 (epsilon - 1)) x
    ///     + alpha*beta - (epsilon - 1)(gamma + delta) = 0,
    /// ```
    ///
    /// whose discriminant equals (alpha - beta)^2 for Fuchsian input, so the
    /// roots are alpha - (epsilon - 1) and beta - (epsilon - 1).
    pub fn map_positive_epsilon(&self) -> Result<Self> {
        let shift = self.epsilon - 1.0;
        let product = self.alpha * self.beta - shift * (self.gamma + self.delta);
        self.shift_infinity_exponents(
            shift,
            2.0 - self.epsilon,
            self.delta,
            self.q - self.gamma * shift,
            product,
        )
    }

    /// Parameters of the equation satisfied by v where u = (1-z)^(1-delta) v.
    ///
    /// delta -> 2 - delta, q -> q - a gamma (delta - 1), and the exponents at
    /// infinity shift by delta - 1 by the same quadratic argument as in
    /// [`Self::map_positive_epsilon`].
    pub fn map_one_minus_delta_transform(&self) -> Result<Self> {
        let shift = self.delta - 1.0;
        let product = self.alpha * self.beta - shift * (self.gamma + self.epsilon);
        self.shift_infinity_exponents(
            shift,
            self.epsilon,
            2.0 - self.delta,
            self.q - self.a * self.gamma * shift,
            product,
        )
    }

    /// The transformed exponents at infinity are only constrained through
    /// their sum (Fuchsian condition) and product, i.e. they are the two
    /// roots of x^2 - sum x + product = 0; the pair is unordered and is
    /// returned sorted descending. For Fuchsian input the discriminant
    /// equals (alpha - beta)^2, so the roots are the shifted originals.
    fn shift_infinity_exponents(
        &self,
        shift: f64,
        new_epsilon: f64,
        new_delta: f64,
        new_q: f64,
        product_target: f64,
    ) -> Result<Self> {
        let sum = self.alpha + self.beta - 2.0 * shift;
        let discriminant = sum * sum - 4.0 * product_target;
        let scale = 1.0 + sum * sum + product_target.abs();
        if discriminant < -1e-9 * scale {
            return Err(HeunError::ComplexExponents { discriminant });
        }
        let root = discriminant.max(0.0).sqrt();
        let r1 = if sum >= 0.0 {
            (sum + root) / 2.0
        } else {
            (sum - root) / 2.0
        };
        let r2 = if r1 != 0.0 { product_target / r1 } else { 0.0 };
        let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
        Ok(Self {
            gamma: self.gamma,
            delta: new_delta,
            epsilon: new_epsilon,
            alpha: hi,
            beta: lo,
            q: new_q,
            a: self.a,
        })
    }
}

impl<'de> Deserialize<'de> for HeunParameters {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            gamma: f64,
            delta: f64,
            epsilon: f64,
            alpha: f64,
            beta: f64,
            q: f64,
            a: f64,
        }
        let r = Raw::deserialize(deserializer)?;
        HeunParameters::new(r.gamma, r.delta, r.epsilon, r.alpha, r.beta, r.q, r.a)
            .map_err(serde::de::Error::custom)
    }
}

/// Residual of the Fuchsian condition `1 + alpha + beta = gamma + delta + epsilon`.
pub fn fuchsian_residual(gamma: f64, delta: f64, epsilon: f64, alpha: f64, beta: f64) -> f64 {
    (1.0 + alpha + beta - (gamma + delta + epsilon)).abs()
}

/// Validating constructor for [`HeunParameters`].
pub fn make_params(
    gamma: f64,
    delta: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    q: f64,
    a: f64,
) -> Result<HeunParameters> {
    HeunParameters::new(gamma, delta, epsilon, alpha, beta, q, a)
}

/// The delta value forced by the Fuchsian condition given the other four
/// exponent parameters.
pub fn derive_delta(gamma: f64, epsilon: f64, alpha: f64, beta: f64) -> f64 {
    1.0 + alpha + beta - gamma - epsilon
}

/// The epsilon value forced by the Fuchsian condition given the other four
/// exponent parameters.
pub fn derive_epsilon(gamma: f64, delta: f64, alpha: f64, beta: f64) -> f64 {
    1.0 + alpha + beta - gamma - delta
}

/// Which of the three admissible values the leading lower parameter
/// gamma0 takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gamma0Choice {
    Gamma,
    Alpha,
    Beta,
}

impl Gamma0Choice {
    /// The numeric gamma0 for a given parameter record.
    pub fn resolve(&self, p: &HeunParameters) -> f64 {
        match self {
            Gamma0Choice::Gamma => p.gamma(),
            Gamma0Choice::Alpha => p.alpha(),
            Gamma0Choice::Beta => p.beta(),
        }
    }
}

impl std::fmt::Display for Gamma0Choice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gamma0Choice::Gamma => write!(f, "gamma"),
            Gamma0Choice::Alpha => write!(f, "alpha"),
            Gamma0Choice::Beta => write!(f, "beta"),
        }
    }
}

/// Variable frame of an expansion: argument z or 1 - z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    DirectZ,
    OneMinusZ,
}

/// Whether an expansion is truncated at K terms or expected to terminate
/// at index N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionMode {
    /// Keep coefficients a_0..a_K of the (generally infinite) expansion.
    Truncated(usize),
    /// Expect a finite sum with last nonzero coefficient a_N.
    Terminating(usize),
}

/// Full description of one expansion: gamma0 choice, frame and mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionSpec {
    pub gamma0: Gamma0Choice,
    pub frame: Frame,
    pub mode: ExpansionMode,
}

impl ExpansionSpec {
    pub fn truncated(gamma0: Gamma0Choice, k: usize) -> Self {
        Self {
            gamma0,
            frame: Frame::DirectZ,
            mode: ExpansionMode::Truncated(k),
        }
    }

    pub fn terminating(gamma0: Gamma0Choice, n: usize) -> Self {
        Self {
            gamma0,
            frame: Frame::DirectZ,
            mode: ExpansionMode::Terminating(n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_symmetric_exponents() {
        let p = make_params(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 2.0).unwrap();
        assert_eq!(p.gamma(), 1.0);
        assert_eq!(p.a(), 2.0);
    }

    #[test]
    fn accepts_generic_fuchsian_set() {
        // 1 + alpha + beta = 0.2 = gamma + delta + epsilon
        let p = make_params(0.5, 0.7, -1.0, -1.3, 0.5, 0.3, 3.0).unwrap();
        assert!(p.fuchsian_residual() <= VALIDATION_TOL);
    }

    #[test]
    fn rejects_singular_a() {
        let err = make_params(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap_err();
        assert_eq!(err, HeunError::SingularA { a: 1.0 });
        let err = make_params(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, HeunError::SingularA { .. }));
    }

    #[test]
    fn rejects_fuchsian_violation() {
        let err = make_params(1.0, 1.0, 1.0, 1.0, 1.5, 0.0, 2.0).unwrap_err();
        assert!(matches!(err, HeunError::FuchsianViolation { .. }));
    }

    #[test]
    fn derive_helpers_close_the_condition() {
        let delta = derive_delta(0.5, -1.0, -1.3, 0.5);
        assert!((delta - 0.7).abs() < 1e-14);
        let eps = derive_epsilon(0.5, 0.7, -1.3, 0.5);
        assert!((eps - (-1.0)).abs() < 1e-14);
    }

    #[test]
    fn one_minus_z_map_follows_stated_rules() {
        // The mapping arithmetic itself, exercised on the raw record
        // (gamma=1, delta=2, epsilon=-1, alpha=0.5, beta=2.5, q=1, a=3).
        let p = HeunParameters::new_unchecked(1.0, 2.0, -1.0, 0.5, 2.5, 1.0, 3.0);
        let m = p.map_to_one_minus_z().unwrap();
        assert_eq!(m.gamma(), 2.0);
        assert_eq!(m.delta(), 1.0);
        assert_eq!(m.epsilon(), -1.0);
        assert_eq!(m.alpha(), 0.5);
        assert_eq!(m.beta(), 2.5);
        assert!((m.q() - 0.25).abs() < 1e-15); // -1 + 0.5*2.5
        assert_eq!(m.a(), -2.0);
        // Residual is preserved exactly (gamma + delta swap).
        assert!((m.fuchsian_residual() - p.fuchsian_residual()).abs() < 1e-15);
    }

    #[test]
    fn one_minus_z_map_is_involution() {
        let p = make_params(0.5, 0.7, -1.0, -1.3, 0.5, 0.3, 3.0).unwrap();
        let back = p.map_to_one_minus_z().unwrap().map_to_one_minus_z().unwrap();
        assert!((back.gamma() - p.gamma()).abs() <= 1e-13);
        assert!((back.delta() - p.delta()).abs() <= 1e-13);
        assert!((back.q() - p.q()).abs() <= 1e-13);
        assert!((back.a() - p.a()).abs() <= 1e-13);
    }

    #[test]
    fn positive_epsilon_map_example() {
        let p = make_params(1.0, 1.0, 2.0, 2.0, 1.0, 0.0, 2.0).unwrap();
        let m = p.map_positive_epsilon().unwrap();
        assert_eq!(m.epsilon(), 0.0);
        assert!((m.q() - (-1.0)).abs() < 1e-15);
        assert!((m.alpha() * m.beta()).abs() < 1e-15); // alpha*beta - (eps-1)(gamma+delta) = 0
        assert!(m.fuchsian_residual() <= 1e-12);
        // Shifted pair {alpha - 1, beta - 1} = {1, 0} in some order.
        let mut pair = [m.alpha(), m.beta()];
        pair.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((pair[0] - 0.0).abs() < 1e-15 && (pair[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn positive_epsilon_map_gamma_zero_keeps_q() {
        let p = make_params(0.0, 2.0, 2.0, 2.0, 1.0, 0.7, 2.0).unwrap();
        let m = p.map_positive_epsilon().unwrap();
        assert_eq!(m.q(), 0.7);
    }

    #[test]
    fn delta_transform_examples() {
        // delta = 1 acts as identity on (delta, q, alpha*beta).
        let p = make_params(0.5, 1.0, -1.0, -1.0, 0.5, 0.3, 3.0).unwrap();
        let m = p.map_one_minus_delta_transform().unwrap();
        assert_eq!(m.delta(), 1.0);
        assert_eq!(m.q(), p.q());
        assert!((m.alpha() * m.beta() - p.alpha() * p.beta()).abs() < 1e-15);

        // delta=2, gamma=1, epsilon=-1, a=2, q=3, alpha*beta=5:
        // q1 = q - a*gamma*(delta-1) = 1 and
        // alpha1*beta1 = alpha*beta - (delta-1)(gamma+eps) = 5.
        let (gm, dl, eps, a, q, alphabeta) = (1.0, 2.0, -1.0, 2.0, 3.0, 5.0);
        let q1 = q - a * gm * (dl - 1.0);
        let prod1 = alphabeta - (dl - 1.0) * (gm + eps);
        assert_eq!(q1, 1.0);
        assert_eq!(prod1, 5.0);
        // No real exponent pair has that sum and product; the map reports it.
        let raw = HeunParameters::new_unchecked(gm, dl, eps, 2.5, 2.0, q, a);
        let err = raw.map_one_minus_delta_transform().unwrap_err();
        assert!(matches!(err, HeunError::ComplexExponents { .. }));
    }

    #[test]
    fn delta_transform_restores_q_and_product() {
        let p = make_params(0.5, 2.3, -1.0, 0.3, 0.5, 0.3, 3.0).unwrap();
        let back = p
            .map_one_minus_delta_transform()
            .unwrap()
            .map_one_minus_delta_transform()
            .unwrap();
        assert!((back.q() - p.q()).abs() <= 1e-13);
        assert!((back.delta() - p.delta()).abs() <= 1e-13);
        let prod = p.alpha() * p.beta();
        assert!((back.alpha() * back.beta() - prod).abs() <= 1e-13 * prod.abs().max(1.0));
        // The pair itself returns as a set.
        let mut orig = [p.alpha(), p.beta()];
        let mut round = [back.alpha(), back.beta()];
        orig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        round.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((orig[0] - round[0]).abs() <= 1e-13 && (orig[1] - round[1]).abs() <= 1e-13);
    }

    #[test]
    fn maps_preserve_fuchsian_condition() {
        let p = make_params(0.5, 0.7, 3.0, 2.7, 0.5, 0.3, -2.0).unwrap();
        for m in [
            p.map_to_one_minus_z().unwrap(),
            p.map_positive_epsilon().unwrap(),
            p.map_one_minus_delta_transform().unwrap(),
        ] {
            assert!(
                m.fuchsian_residual() <= 1e-12,
                "residual {}",
                m.fuchsian_residual()
            );
        }
    }

    #[test]
    fn gamma0_resolution() {
        let p = make_params(0.5, 0.7, -1.0, -1.3, 0.5, 0.3, 3.0).unwrap();
        assert_eq!(Gamma0Choice::Gamma.resolve(&p), 0.5);
        assert_eq!(Gamma0Choice::Alpha.resolve(&p), -1.3);
        assert_eq!(Gamma0Choice::Beta.resolve(&p), 0.5);
    }
}
