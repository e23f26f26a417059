//! Shared sampling helpers for the unit tests: parameter draws from the
//! annuli the verification harness uses, with genericity rejection and,
//! for lattice sums, an a-priori shell-decay margin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::indexsets::{genericity_check, ParameterSet, DEFAULT_GENERICITY};
use crate::qnum::{Complex, PrecisionContext};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|q|^e * exp(i phase)` with `e` uniform in `[lo, hi]`.
pub fn rand_q_exp(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, lo: f64, hi: f64) -> Complex {
    let e = rng.gen_range(lo..hi);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    from_exp_phase(ctx, e, phase)
}

pub fn from_exp_phase(ctx: &PrecisionContext, e: f64, phase: f64) -> Complex {
    let r = ctx.abs_q().to_f64().powf(e);
    ctx.complex(r * phase.cos(), r * phase.sin())
}

pub fn rand_point(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, n: usize) -> Vec<Complex> {
    (0..n).map(|_| rand_q_exp(rng, ctx, 0.05, 0.25)).collect()
}

/// Parameter set from the documented sampling domains, resampled until the
/// genericity check passes.
pub fn sample_params(
    rng: &mut ChaCha8Rng,
    ctx: &PrecisionContext,
    s: usize,
    n: usize,
) -> ParameterSet {
    sample_params_in(rng, ctx, s, n, 0.05, 0.3)
}

fn sample_params_in(
    rng: &mut ChaCha8Rng,
    ctx: &PrecisionContext,
    s: usize,
    n: usize,
    a_lo: f64,
    a_hi: f64,
) -> ParameterSet {
    for _ in 0..200 {
        let t = rand_q_exp(rng, ctx, 0.02, 0.2);
        let a = (0..2 * s + 2)
            .map(|_| rand_q_exp(rng, ctx, a_lo, a_hi))
            .collect();
        let x = (0..s).map(|_| rand_q_exp(rng, ctx, 0.05, 0.25)).collect();
        let p = ParameterSet::new(s, n, t, a, x).unwrap();
        if genericity_check(&p, DEFAULT_GENERICITY, ctx).generic {
            return p;
        }
    }
    panic!("failed to sample generic parameters in 200 draws");
}

/// Sample a parameter set whose lattice shells decay at least like
/// `|q|^margin` per unit radius when the integrand carries a Laurent
/// weight of degree `phi_degree` per coordinate:
/// `s - phi_degree - sum_m e(a_m) - 2(n-1) e(t) >= margin`.
pub fn sample_jackson_params(
    rng: &mut ChaCha8Rng,
    ctx: &PrecisionContext,
    s: usize,
    n: usize,
    phi_degree: u32,
    margin: f64,
) -> ParameterSet {
    let chars = (2 * s + 2) as f64;
    for _ in 0..2000 {
        let head = s as f64 - phi_degree as f64 - margin;
        let e_t_hi = ((head - chars * 0.021) / (2.0 * (n as f64 - 1.0)))
            .min(0.06)
            .max(0.021);
        let e_t = rng.gen_range(0.02..e_t_hi.max(0.0201));
        let budget = head - 2.0 * (n as f64 - 1.0) * e_t;
        let per_char_hi = (budget / chars).min(0.3);
        if per_char_hi <= 0.021 {
            panic!("no room for characters at s={s} n={n} phi_degree={phi_degree} margin={margin}");
        }
        let t = from_exp_phase(ctx, e_t, rng.gen_range(0.0..std::f64::consts::TAU));
        let mut e_sum = 0.0;
        let a: Vec<Complex> = (0..2 * s + 2)
            .map(|_| {
                let e = rng.gen_range(0.02..per_char_hi);
                e_sum += e;
                from_exp_phase(ctx, e, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        if e_sum + 2.0 * (n as f64 - 1.0) * e_t > head {
            continue;
        }
        let x = (0..s).map(|_| rand_q_exp(rng, ctx, 0.05, 0.25)).collect();
        let p = ParameterSet::new(s, n, t, a, x).unwrap();
        if genericity_check(&p, DEFAULT_GENERICITY, ctx).generic {
            return p;
        }
    }
    panic!("failed to sample convergent jackson parameters");
}
