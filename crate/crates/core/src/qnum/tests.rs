use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use super::*;
use crate::error::Error;

fn ctx256(q: f64) -> PrecisionContext {
    PrecisionContext::real(256, q).unwrap()
}

/// Independent oracle: the plain truncated product
/// `prod_{l=0}^{terms-1} (1 - u q^l)` at the precision of the inputs,
/// with a fixed term count instead of the adaptive tail bound.
fn qpoch_product_oracle(u: &Complex, q: &Complex, terms: u32) -> Complex {
    let p = u.prec();
    let one = Complex::one(p);
    let mut prod = Complex::one(p);
    let mut uq = u.clone();
    for _ in 0..terms {
        prod = &prod * &(&one - &uq);
        uq = &uq * q;
    }
    prod
}

fn cpx(ctx: &PrecisionContext, re: f64, im: f64) -> Complex {
    ctx.complex(re, im)
}

/// Random point with `|u| = |q|^e`, `e` uniform in `[lo, hi]`, uniform phase.
fn rand_annulus(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, lo: f64, hi: f64) -> Complex {
    let e = rng.gen_range(lo..hi);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = ctx.abs_q().to_f64().powf(e);
    ctx.complex(r * phase.cos(), r * phase.sin())
}

fn rel(a: &Complex, b: &Complex) -> f64 {
    crate::rel_residual(a, b)
}

#[test]
fn context_rejects_bad_q() {
    assert!(matches!(
        PrecisionContext::real(256, 1.0),
        Err(Error::InvalidContext(_))
    ));
    assert!(matches!(
        PrecisionContext::real(256, 0.0),
        Err(Error::InvalidContext(_))
    ));
    let ok = PrecisionContext::real(256, -0.5).unwrap();
    assert!(ok.abs_q().to_f64() == 0.5);
}

#[test]
fn sqrt_q_squares_back() {
    let ctx = ctx256(0.37);
    let sq = ctx.sqrt_q();
    assert!(rel(&(sq * sq), ctx.q()) < 1e-75);
    // complex q as well
    let ctx2 = PrecisionContext::new(256, Complex::new(Float::with_val(256, 0.2), Float::with_val(256, 0.4))).unwrap();
    let sq2 = ctx2.sqrt_q();
    assert!(rel(&(sq2 * sq2), ctx2.q()) < 1e-75);
}

#[test]
fn qpoch_inf_at_zero_is_one() {
    let ctx = ctx256(0.5);
    let v = qpoch_inf(&ctx.zero(), &ctx);
    assert_eq!(v.re.to_f64(), 1.0);
    assert!(v.im.is_zero());
}

#[test]
fn qpoch_inf_at_one_is_zero() {
    let ctx = ctx256(0.5);
    let v = qpoch_inf(&ctx.one(), &ctx);
    assert!(v.is_zero());
}

// 200-term product oracle at 512 bits for u = q, q = 1/2, frozen to 70
// digits. The stored value carries the oracle's own truncation error
// (~2^-200), so the comparison tolerance sits just above it.
const QPOCH_HALF_GOLDEN: &str =
    "2.88788095086602421278899721929230780088911904840685784114741245898175020e-1";

#[test]
fn qpoch_inf_golden_q_half() {
    let ctx = ctx256(0.5);
    let oracle_ctx = PrecisionContext::real(512, 0.5).unwrap();
    let oracle = qpoch_product_oracle(oracle_ctx.q(), oracle_ctx.q(), 200);
    let golden = oracle_ctx.complex_from_str(QPOCH_HALF_GOLDEN, "0").unwrap();
    assert!(
        rel(&oracle, &golden) < 1e-65,
        "oracle drifted from frozen value: {}",
        oracle.re.to_string_radix(10, Some(75))
    );
    let v = qpoch_inf(ctx.q(), &ctx);
    assert!(rel(&v, &golden) < 1e-58);
}

#[test]
fn qpoch_int_basic_values() {
    let ctx = ctx256(0.5);
    let u = cpx(&ctx, 0.3, 0.1);
    assert_eq!(qpoch_int(&u, 0, &ctx).unwrap().re.to_f64(), 1.0);
    let one_minus_u = &ctx.one() - &u;
    assert!(rel(&qpoch_int(&u, 1, &ctx).unwrap(), &one_minus_u) < 1e-75);
    // (u)_{-1} = 1 / (1 - u/q)
    let expect = (&ctx.one() - &(&u * ctx.q_inv())).inv();
    assert!(rel(&qpoch_int(&u, -1, &ctx).unwrap(), &expect) < 1e-75);
}

#[test]
fn qpoch_int_pole_detected() {
    let ctx = ctx256(0.5);
    // u = q so that 1 - u q^-1 = 0
    assert!(matches!(
        qpoch_int(ctx.q(), -1, &ctx),
        Err(Error::Pole(_))
    ));
}

#[test]
fn qpoch_quotient_identity_both_signs() {
    let ctx = ctx256(0.45);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let u = rand_annulus(&mut rng, &ctx, -0.5, 0.5);
        for nu in [-5i64, -2, -1, 1, 3, 6] {
            let lhs = &qpoch_int(&u, nu, &ctx).unwrap() * &qpoch_inf(&(&u * &ctx.q_pow(nu)), &ctx);
            let rhs = qpoch_inf(&u, &ctx);
            assert!(rel(&lhs, &rhs) < 1e-65, "nu = {nu}");
        }
    }
}

// theta(-1) at q = 1/2 via two 512-bit product oracles, frozen to 70 digits.
const THETA_MINUS_ONE_GOLDEN: &str =
    "11.3691151995919874346076424953205271431626679886065394872773053143623081";

#[test]
fn theta_golden_minus_one() {
    let ctx = ctx256(0.5);
    let oracle_ctx = PrecisionContext::real(512, 0.5).unwrap();
    let m1 = oracle_ctx.complex(-1.0, 0.0);
    let oracle = &qpoch_product_oracle(&m1, oracle_ctx.q(), 400)
        * &qpoch_product_oracle(&(oracle_ctx.q() / &m1), oracle_ctx.q(), 400);
    let golden = oracle_ctx.complex_from_str(THETA_MINUS_ONE_GOLDEN, "0").unwrap();
    assert!(
        rel(&oracle, &golden) < 1e-65,
        "oracle drifted from frozen value: {}",
        oracle.re.to_string_radix(10, Some(75))
    );
    let v = theta(&ctx.complex(-1.0, 0.0), &ctx).unwrap();
    assert!(rel(&v, &golden) < 1e-65);
}

#[test]
fn theta_zero_rejected_and_one_vanishes() {
    let ctx = ctx256(0.5);
    assert!(matches!(
        theta(&ctx.zero(), &ctx),
        Err(Error::ZeroArgument(_))
    ));
    assert!(theta(&ctx.one(), &ctx).unwrap().is_zero());
}

#[test]
fn theta_quasi_periodicity() {
    let ctx = ctx256(0.41);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let u = rand_annulus(&mut rng, &ctx, -0.5, 0.5);
        // theta(qu) * u + theta(u) = 0
        let lhs = &(&theta(&(ctx.q() * &u), &ctx).unwrap() * &u) + &theta(&u, &ctx).unwrap();
        let scale = theta(&u, &ctx).unwrap().abs().to_f64();
        assert!(lhs.abs().to_f64() / scale < 1e-70);
    }
}

#[test]
fn theta_inversion_invariance() {
    let ctx = ctx256(0.33);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        // exercise the renormalization on far-out arguments too
        let far = rng.gen_range(-6.0..6.0);
        let u = rand_annulus(&mut rng, &ctx, far - 0.5, far + 0.5);
        let a = theta(&u, &ctx).unwrap();
        let b = theta(&(ctx.q() / &u), &ctx).unwrap();
        assert!(rel(&a, &b) < 1e-68);
    }
}

#[test]
fn e_symbol_relations() {
    let ctx = ctx256(0.52);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..8 {
        let a = rand_annulus(&mut rng, &ctx, -0.4, 0.4);
        let b = rand_annulus(&mut rng, &ctx, -0.4, 0.4);
        // e(a;a) = 0
        assert!(e_symbol(&a, &a, &ctx).unwrap().is_zero());
        // e(a;b) = -e(b;a)
        let ab = e_symbol(&a, &b, &ctx).unwrap();
        let ba = e_symbol(&b, &a, &ctx).unwrap();
        assert!(rel(&ab, &(-&ba)) < 1e-70);
        // e(1/a;b) = e(a;b)
        let inv = e_symbol(&a.inv(), &b, &ctx).unwrap();
        assert!(rel(&ab, &inv) < 1e-68);
        // e(qa;b) = (q a^2)^-1 e(a;b)
        let shifted = e_symbol(&(ctx.q() * &a), &b, &ctx).unwrap();
        let expect = &ab * &(&(ctx.q() * &(&a * &a))).inv();
        assert!(rel(&shifted, &expect) < 1e-68);
    }
}

#[test]
fn e_symbol_zero_args() {
    let ctx = ctx256(0.5);
    let a = cpx(&ctx, 0.5, 0.0);
    assert!(matches!(
        e_symbol(&ctx.zero(), &a, &ctx),
        Err(Error::ZeroArgument(_))
    ));
    assert!(matches!(
        e_symbol(&a, &ctx.zero(), &ctx),
        Err(Error::ZeroArgument(_))
    ));
}

#[test]
fn e_factorial_small_orders() {
    let ctx = ctx256(0.47);
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let a = rand_annulus(&mut rng, &ctx, -0.3, 0.3);
    let b = rand_annulus(&mut rng, &ctx, -0.3, 0.3);
    let t = rand_annulus(&mut rng, &ctx, 0.05, 0.2);
    assert_eq!(e_factorial(&a, &b, 0, &t, &ctx).unwrap().re.to_f64(), 1.0);
    assert!(
        rel(
            &e_factorial(&a, &b, 1, &t, &ctx).unwrap(),
            &e_symbol(&a, &b, &ctx).unwrap()
        ) < 1e-72
    );
    // e(a;b)_2 against the term-by-term two-factor product
    let direct = &e_symbol(&a, &b, &ctx).unwrap() * &e_symbol(&(&a * &t), &b, &ctx).unwrap();
    assert!(rel(&e_factorial(&a, &b, 2, &t, &ctx).unwrap(), &direct) < 1e-70);
}

#[test]
fn precision_monotonicity() {
    // doubling the precision must cut relation residuals by >= 2^(prec/2)
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..5 {
        let e = rng.gen_range(-0.5..0.5);
        let ph = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut res = Vec::new();
        for prec in [128u32, 256] {
            let ctx = PrecisionContext::real(prec, 0.43).unwrap();
            let r = ctx.abs_q().to_f64().powf(e);
            let u = ctx.complex(r * ph.cos(), r * ph.sin());
            let a = theta(&u, &ctx).unwrap();
            let b = theta(&(ctx.q() / &u), &ctx).unwrap();
            let num = (&a - &b).abs().to_f64();
            let den = a.abs().to_f64() + b.abs().to_f64();
            res.push(num / den);
        }
        // pass when the 256-bit residual improves by >= 2^64 or already
        // sits at the 256-bit rounding floor (the 128-bit residual can be
        // exactly zero when both values round identically)
        let bound = res[0] * 2f64.powi(-64) + 1e-74;
        worst_ratio = worst_ratio.max(res[1] / bound);
    }
    assert!(worst_ratio < 1.0, "ratio {worst_ratio:.3e}");
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn annulus_input() -> impl Strategy<Value = (f64, f64)> {
        (-0.5f64..0.5, 0.0f64..std::f64::consts::TAU)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quotient_identity((e, ph) in annulus_input(), nu in -6i64..7) {
            let ctx = ctx256(0.5);
            let r = 0.5f64.powf(e);
            let u = ctx.complex(r * ph.cos(), r * ph.sin());
            let lhs = &qpoch_int(&u, nu, &ctx).unwrap()
                * &qpoch_inf(&(&u * &ctx.q_pow(nu)), &ctx);
            let rhs = qpoch_inf(&u, &ctx);
            prop_assert!(rel(&lhs, &rhs) < 1e-63);
        }

        #[test]
        fn theta_inversion((e, ph) in annulus_input()) {
            let ctx = ctx256(0.5);
            let r = 0.5f64.powf(e);
            let u = ctx.complex(r * ph.cos(), r * ph.sin());
            let a = theta(&u, &ctx).unwrap();
            let b = theta(&(ctx.q() / &u), &ctx).unwrap();
            prop_assert!(rel(&a, &b) < 1e-68);
        }

        #[test]
        fn e_shift_relation((ea, pa) in annulus_input(), (eb, pb) in annulus_input()) {
            let ctx = ctx256(0.5);
            let ra = 0.5f64.powf(ea);
            let rb = 0.5f64.powf(eb);
            let a = ctx.complex(ra * pa.cos(), ra * pa.sin());
            let b = ctx.complex(rb * pb.cos(), rb * pb.sin());
            let lhs = e_symbol(&(ctx.q() * &a), &b, &ctx).unwrap();
            let rhs = &e_symbol(&a, &b, &ctx).unwrap() * &(&(ctx.q() * &(&a * &a))).inv();
            prop_assert!(rel(&lhs, &rhs) < 1e-66);
        }
    }
}
