//! Seeded parameter sampling for catalog sweeps and the acceptance suite.
//!
//! Every sampled set is deterministic in (base seed, class, N, seed index)
//! and independent of evaluation order, so catalog rows can be computed by
//! a worker pool and still come out byte-identical.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use heun::recurrence::{coeff_r, RecurrenceContext};
use heun::{Gamma0Choice, HeunParameters};

/// Independent RNG stream for one work item.
pub fn item_rng(base_seed: u64, class_idx: u64, n: u64, seed: u64) -> ChaCha8Rng {
    let mut x = base_seed
        ^ class_idx.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ n.wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ seed.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    ChaCha8Rng::seed_from_u64(x)
}

fn near_integer(x: f64, margin: f64) -> bool {
    (x - x.round()).abs() < margin
}

/// Draw a from the acceptance ranges [1.5, 4] or [-3, -0.5].
fn sample_a(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(1.5..4.0)
    } else {
        rng.gen_range(-3.0..-0.5)
    }
}

/// Random parameter set (q = 0) in the termination class for `gamma0` and
/// order `n`: the class condition fixes one exponent, the Fuchsian
/// condition another; |parameters| <= 5. Structural degeneracies only are
/// rejected: gamma/delta near integers (which collide with the stepped
/// lower parameters or the mapped-frame recurrence) and out-of-range
/// derived exponents.
pub fn sample_class_params(rng: &mut ChaCha8Rng, gamma0: Gamma0Choice, n: usize) -> HeunParameters {
    loop {
        let a = sample_a(rng);
        let (gm, dl, eps, al, be) = match gamma0 {
            Gamma0Choice::Gamma => {
                let eps = -(n as f64) + 0.0; // +0.0 folds -0.0 into 0.0
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
        if near_integer(gm, 0.05) || near_integer(dl, 0.05) {
            continue;
        }
        let Ok(p) = HeunParameters::new(gm, dl, eps, al, be, 0.0, a) else {
            continue;
        };
        return p;
    }
}

/// True when the recurrence factors R_k stay safely away from zero over
/// the working range for this class, in both the direct and the 1-z frame.
pub fn well_conditioned(p: &HeunParameters, gamma0: Gamma0Choice, n: usize) -> bool {
    let direct = RecurrenceContext::from_choice(*p, gamma0);
    let frames: [RecurrenceContext; 2] = match p.map_to_one_minus_z() {
        Ok(mapped) => [direct, RecurrenceContext::from_choice(mapped, Gamma0Choice::Gamma)],
        Err(_) => return false,
    };
    for (idx, ctx) in frames.iter().enumerate() {
        // The mapped frame matters only for the second solution of the
        // gamma class; skip it otherwise.
        if idx == 1 && gamma0 != Gamma0Choice::Gamma {
            continue;
        }
        for k in 1..=(n + 2) {
            match coeff_r(k, ctx) {
                Ok(r) if r.abs() > 0.05 => {}
                _ => return false,
            }
        }
    }
    true
}

/// Class sample with the conditioning guard, for acceptance-style runs
/// where every set must survive the full pipeline at tight tolerances.
pub fn sample_conditioned_params(
    rng: &mut ChaCha8Rng,
    gamma0: Gamma0Choice,
    n: usize,
) -> HeunParameters {
    loop {
        let p = sample_class_params(rng, gamma0, n);
        if well_conditioned(&p, gamma0, n) {
            return p;
        }
    }
}

/// Random parameter set with positive integer epsilon for the lift, the
/// other exponents free; conditioning applies to the transformed equation.
pub fn sample_positive_epsilon_params(rng: &mut ChaCha8Rng, eps_int: usize) -> HeunParameters {
    loop {
        let gm: f64 = rng.gen_range(-4.0..4.0);
        let dl: f64 = rng.gen_range(-4.0..4.0);
        let al: f64 = rng.gen_range(-4.0..4.0);
        let eps = eps_int as f64;
        let be = gm + dl + eps - 1.0 - al;
        if be.abs() > 5.0 {
            continue;
        }
        if near_integer(gm, 0.05) || near_integer(dl, 0.05) {
            continue;
        }
        let a = sample_a(rng);
        let Ok(p) = HeunParameters::new(gm, dl, eps, al, be, 0.0, a) else {
            continue;
        };
        let Ok(transformed) = p.map_positive_epsilon() else {
            continue;
        };
        if !well_conditioned(&transformed, Gamma0Choice::Gamma, eps_int.saturating_sub(2)) {
            continue;
        }
        return p;
    }
}
