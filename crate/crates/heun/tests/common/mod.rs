//! Shared test-only helpers: double-double arithmetic, an independent
//! extended-precision 2F1 series oracle, and seeded parameter sampling.
//!
//! Everything here is deliberately independent of the evaluation paths in
//! the crate under test: the oracle sums the defining series term by term
//! in ~106-bit arithmetic with no transformations and no branch logic.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use heun::params::{make_params, HeunParameters};
use heun::Gamma0Choice;

/// Unevaluated double-double value hi + lo.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p, e)
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles as a Dd.
    pub fn exact_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::new(q1)));
        let q2 = (r.hi + r.lo) / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs_hi(self) -> f64 {
        self.hi.abs()
    }
}

/// Direct power-series evaluation of 2F1 in double-double arithmetic:
/// the brute-force oracle against which the production evaluator is
/// checked. Returns the sum with its absolute term mass (condition
/// denominator), so callers can express tolerances honestly for
/// cancellation-heavy cases.
pub fn hyp2f1_oracle(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> (f64, f64) {
    let zd = Dd::new(z);
    let mut sum = Dd::new(1.0);
    let mut term = Dd::new(1.0);
    let mut mass = 1.0f64;
    let mut small_run = 0;
    for k in 0..max_terms {
        let kf = k as f64;
        let na = Dd::exact_sum(a, kf);
        let nb = Dd::exact_sum(b, kf);
        if (na.hi == 0.0 && na.lo == 0.0) || (nb.hi == 0.0 && nb.lo == 0.0) {
            break;
        }
        let dc = Dd::exact_sum(c, kf);
        let dk = Dd::new(kf + 1.0);
        term = term.mul(na).mul(nb).div(dc).div(dk).mul(zd);
        sum = sum.add(term);
        mass += term.abs_hi();
        if term.abs_hi() <= 1e-26 * sum.abs_hi().max(f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    (sum.to_f64(), mass)
}

/// Derivative oracle via term-wise differentiation of the series.
pub fn hyp2f1_derivative_oracle(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> f64 {
    let (value, _) = hyp2f1_oracle(a + 1.0, b + 1.0, c + 1.0, z, max_terms);
    a * b / c * value
}

/// Deterministic RNG for a named test case.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn near_integer(x: f64, margin: f64) -> bool {
    (x - x.round()).abs() < margin
}

/// Random parameter set in the termination class for `gamma0` and order
/// `n`, rejecting sets that sit close to the structural degeneracies
/// (integer gamma/delta near the stepped lower parameters, vanishing
/// recurrence factors, a near the unit interval edges).
pub fn sample_class_params(
    rng: &mut ChaCha8Rng,
    gamma0: Gamma0Choice,
    n: usize,
) -> HeunParameters {
    loop {
        let a = if rng.gen_bool(0.5) {
            rng.gen_range(1.5..4.0)
        } else {
            rng.gen_range(-3.0..-0.5)
        };
        let (gm, dl, eps, al, be) = match gamma0 {
            Gamma0Choice::Gamma => {
                let eps = -(n as f64);
                let gm: f64 = rng.gen_range(-5.0..5.0);
                let dl: f64 = rng.gen_range(-5.0..5.0);
                let al: f64 = rng.gen_range(-5.0..5.0);
                let be = gm + dl + eps - 1.0 - al;
                (gm, dl, eps, al, be)
            }
            Gamma0Choice::Alpha => {
                let gm: f64 = rng.gen_range(-5.0..5.0);
                let dl: f64 = rng.gen_range(-5.0..5.0);
                let eps: f64 = rng.gen_range(-5.0..5.0);
                let al = eps + gm + n as f64;
                let be = dl - 1.0 - n as f64;
                (gm, dl, eps, al, be)
            }
            Gamma0Choice::Beta => {
                let gm: f64 = rng.gen_range(-5.0..5.0);
                let dl: f64 = rng.gen_range(-5.0..5.0);
                let eps: f64 = rng.gen_range(-5.0..5.0);
                let be = eps + gm + n as f64;
                let al = dl - 1.0 - n as f64;
                (gm, dl, eps, al, be)
            }
        };
        if [gm, dl, eps, al, be].iter().any(|v| v.abs() > 5.0) {
            continue;
        }
        // Keep the stepped lower parameters and the mapped-frame recurrence
        // away from integer degeneracies.
        if near_integer(gm, 0.05) || near_integer(dl, 0.05) {
            continue;
        }
        let Ok(p) = make_params(gm, dl, eps, al, be, 0.0, a) else {
            continue;
        };
        if !conditioned(&p, gamma0, n) {
            continue;
        }
        return p;
    }
}

/// Rejects parameter sets whose recurrence factors R_k come close to zero
/// over the working range (they would produce wildly scaled coefficients,
/// not wrong ones).
fn conditioned(p: &HeunParameters, gamma0: Gamma0Choice, n: usize) -> bool {
    use heun::recurrence::{coeff_r, RecurrenceContext};
    let ctx = RecurrenceContext::from_choice(*p, gamma0);
    for k in 1..=(n + 2) {
        match coeff_r(k, &ctx) {
            Ok(r) if r.abs() > 0.05 => {}
            _ => return false,
        }
    }
    true
}
