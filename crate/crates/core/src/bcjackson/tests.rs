use rug::Float;

use super::*;
use crate::testutil::{from_exp_phase, rand_point, rand_q_exp, rng, sample_jackson_params, sample_params};

fn ctx_fast() -> PrecisionContext {
    // small |q| gives fast shell decay in the lattice tests
    PrecisionContext::real(256, 0.2).unwrap()
}

fn zb(entries: &[u32]) -> MultiIndex {
    MultiIndex::new(IndexKind::B, entries.to_vec())
}

#[test]
fn weyl_denominator_values_and_antisymmetry() {
    let ctx = ctx_fast();
    // n = 1, z = 2: (1 - 4)/2 = -3/2
    let v = weyl_denominator(&[ctx.complex(2.0, 0.0)], &ctx).unwrap();
    assert_eq!(v.re.to_f64(), -1.5);
    assert!(v.im.is_zero());

    let mut r = rng(301);
    let z = rand_point(&mut r, &ctx, 3);
    let base = weyl_denominator(&z, &ctx).unwrap();
    // transposition flips the sign
    let swapped = vec![z[1].clone(), z[0].clone(), z[2].clone()];
    let v1 = weyl_denominator(&swapped, &ctx).unwrap();
    assert!(crate::rel_residual(&v1, &(-&base)) < 1e-70);
    // coordinate inversion flips the sign
    let mut inv = z.clone();
    inv[2] = inv[2].inv();
    let v2 = weyl_denominator(&inv, &ctx).unwrap();
    assert!(crate::rel_residual(&v2, &(-&base)) < 1e-70);

    assert!(matches!(
        weyl_denominator(&[ctx.zero()], &ctx),
        Err(Error::ZeroArgument(_))
    ));
}

#[test]
fn schur_trivial_and_n1() {
    let ctx = ctx_fast();
    let mut r = rng(307);
    // lambda = 0 -> 1 for every n
    for n in 1..=3usize {
        let z = rand_point(&mut r, &ctx, n);
        let lam = zb(&vec![0; n]);
        let v = symplectic_schur(&lam, &z, &ctx).unwrap();
        assert!(
            crate::rel_residual(&v, &ctx.one()) < 1e-70,
            "chi_0 must be 1 at n={n}"
        );
    }
    // n = 1, lambda = (1): z + 1/z
    let z = rand_point(&mut r, &ctx, 1);
    let v = symplectic_schur(&zb(&[1]), &z, &ctx).unwrap();
    let expect = &z[0] + &z[0].inv();
    assert!(crate::rel_residual(&v, &expect) < 1e-70);
}

#[test]
fn schur_matches_determinant_quotient_oracle() {
    // the production path divides by (-1)^n Delta; the oracle divides by
    // the dense denominator determinant
    let ctx = ctx_fast();
    let mut r = rng(311);
    for n in 1..=3usize {
        let z = rand_point(&mut r, &ctx, n);
        let lam = zb(&(0..n as u32).rev().collect::<Vec<_>>());
        let got = symplectic_schur(&lam, &z, &ctx).unwrap();
        let num = ComplexMatrix::from_fn(n, ctx.prec(), |i, j| {
            let e = lam.entries()[j] as i64 + (n - j) as i64;
            &z[i].pow_i(e) - &z[i].pow_i(-e)
        });
        let den = ComplexMatrix::from_fn(n, ctx.prec(), |i, j| {
            let e = (n - j) as i64;
            &z[i].pow_i(e) - &z[i].pow_i(-e)
        });
        let oracle = &num.det().unwrap() / &den.det().unwrap();
        assert!(
            crate::rel_residual(&got, &oracle) < 1e-65,
            "sign convention drifted at n={n}"
        );
    }
}

#[test]
fn schur_weyl_invariance_and_degenerate_rejection() {
    let ctx = ctx_fast();
    let mut r = rng(313);
    let z = rand_point(&mut r, &ctx, 2);
    let lam = zb(&[2, 1]);
    let base = symplectic_schur(&lam, &z, &ctx).unwrap();
    let swapped = vec![z[1].clone(), z[0].clone()];
    assert!(crate::rel_residual(&symplectic_schur(&lam, &swapped, &ctx).unwrap(), &base) < 1e-65);
    let inverted = vec![z[0].inv(), z[1].clone()];
    assert!(crate::rel_residual(&symplectic_schur(&lam, &inverted, &ctx).unwrap(), &base) < 1e-65);

    let degenerate = vec![z[0].clone(), z[0].clone()];
    assert!(matches!(
        symplectic_schur(&lam, &degenerate, &ctx),
        Err(Error::DegenerateZ(_))
    ));
}

/// Principal-branch power for positive real bases, test-only.
fn real_pow(base: &Float, expo: &Float) -> Float {
    let p = base.prec();
    let mut ln = base.clone();
    ln.ln_mut();
    let mut out = Float::with_val(p, expo * &ln);
    out.exp_mut();
    out
}

/// Direct principal-branch evaluation of `Phi(z)/Theta(z)` for `n = 1`
/// and real positive parameters, fractional powers and all.
fn phi_theta_direct_n1(z: &Float, p: &ParameterSet, ctx: &PrecisionContext) -> Float {
    let prec = ctx.prec();
    let q = ctx.q().re.clone();
    let mut lnq = q.clone();
    lnq.ln_mut();
    let zc = Complex::new(z.clone(), Float::new(prec));
    let mut out = Float::with_val(prec, 1);
    for am in &p.a {
        let a = am.re.clone();
        let mut alpha = a.clone();
        alpha.ln_mut();
        alpha /= &lnq;
        // z^{1/2 - alpha_m} * z^{alpha_m} from Phi and 1/Theta
        let half = Float::with_val(prec, 0.5);
        out *= real_pow(z, &Float::with_val(prec, &half - &alpha));
        out *= real_pow(z, &alpha);
        let poch_num = qpoch_inf(&(&(ctx.q() / am) * &zc), ctx);
        let poch_den = qpoch_inf(&(am * &zc), ctx);
        let th = theta(&(am * &zc), ctx).unwrap();
        out *= Float::with_val(prec, &poch_num.re / &poch_den.re);
        out *= &th.re;
    }
    // divide by z^s theta(z^2)
    let th2 = theta(&(&zc * &zc), ctx).unwrap();
    out /= real_pow(z, &Float::with_val(prec, p.s as f64));
    out /= &th2.re;
    out
}

fn real_positive_params(ctx: &PrecisionContext, s: usize, n: usize) -> ParameterSet {
    // fixed real-positive parameters, exponents small enough to converge
    let exps = [0.06, 0.08, 0.11, 0.07, 0.09, 0.05, 0.12, 0.10];
    let a: Vec<Complex> = (0..2 * s + 2)
        .map(|m| from_exp_phase(ctx, exps[m % exps.len()], 0.0))
        .collect();
    let t = from_exp_phase(ctx, 0.03, 0.0);
    let x = (0..s)
        .map(|i| from_exp_phase(ctx, 0.13 + 0.04 * i as f64, 0.0))
        .collect();
    ParameterSet::new(s, n, t, a, x).unwrap()
}

#[test]
fn phi_theta_ratio_matches_principal_branch_oracle_n1() {
    let ctx = ctx_fast();
    let p = real_positive_params(&ctx, 1, 1);
    let z = from_exp_phase(&ctx, 0.17, 0.0);
    let got = phi_theta_ratio(&[z.clone()], &p, &ctx).unwrap();
    let direct = phi_theta_direct_n1(&z.re, &p, &ctx);
    assert!(got.im.to_f64().abs() < 1e-70);
    let rel = (Float::with_val(ctx.prec(), &got.re - &direct) / &direct)
        .abs()
        .to_f64()
        .abs();
    assert!(rel < 1e-68, "cancelled form vs direct branch: {rel:.3e}");

    // s = 2 as well (more characters, still n = 1)
    let p2 = real_positive_params(&ctx, 2, 1);
    let got2 = phi_theta_ratio(&[z.clone()], &p2, &ctx).unwrap();
    let direct2 = phi_theta_direct_n1(&z.re, &p2, &ctx);
    let rel2 = (Float::with_val(ctx.prec(), &got2.re - &direct2) / &direct2)
        .abs()
        .to_f64();
    assert!(rel2.abs() < 1e-68);
}

#[test]
fn phi_theta_ratio_finite_nonzero_generic() {
    let ctx = ctx_fast();
    let mut r = rng(317);
    let p = sample_params(&mut r, &ctx, 2, 2);
    let z = rand_point(&mut r, &ctx, 2);
    let v = phi_theta_ratio(&z, &p, &ctx).unwrap();
    let mag = v.abs().to_f64();
    assert!(mag.is_finite() && mag > 0.0);
}

#[test]
fn lattice_shift_factor_identities() {
    let ctx = ctx_fast();
    let mut r = rng(331);
    let p = sample_jackson_params(&mut r, &ctx, 1, 2, 0, 0.3);
    let z = rand_point(&mut r, &ctx, 2);
    // nu = 0 -> 1
    let at_zero = lattice_shift_factor(&z, &[0, 0], &p, &ctx).unwrap();
    assert_eq!(at_zero.re.to_f64(), 1.0);
    // telescoping: factor(z, nu + e_i) = factor(z, nu) factor(z q^nu, e_i)
    for (nu, i) in [([2i64, -1], 0usize), ([-3, 1], 1), ([1, 4], 0)] {
        let mut nu_next = nu;
        nu_next[i] += 1;
        let lhs = lattice_shift_factor(&z, &nu_next, &p, &ctx).unwrap();
        let zq: Vec<Complex> = z
            .iter()
            .zip(nu.iter())
            .map(|(zi, &k)| zi * &ctx.q_pow(k))
            .collect();
        let mut step = vec![0i64; 2];
        step[i] = 1;
        let rhs = &lattice_shift_factor(&z, &nu, &p, &ctx).unwrap()
            * &lattice_shift_factor(&zq, &step, &p, &ctx).unwrap();
        assert!(crate::rel_residual(&lhs, &rhs) < 1e-60, "telescoping at {nu:?}+e_{i}");
    }
}

#[test]
fn lattice_shift_factor_matches_direct_phi_ratio_n1() {
    let ctx = ctx_fast();
    let p = real_positive_params(&ctx, 1, 1);
    let z = from_exp_phase(&ctx, 0.14, 0.0);
    let got = lattice_shift_factor(&[z.clone()], &[1], &p, &ctx).unwrap();
    // Phi(qz)/Phi(z) by principal-branch powers
    let prec = ctx.prec();
    let q = ctx.q().re.clone();
    let mut lnq = q.clone();
    lnq.ln_mut();
    let zc = Complex::new(z.re.clone(), Float::new(prec));
    let qz = ctx.q() * &zc;
    let mut direct = Float::with_val(prec, 1);
    for am in &p.a {
        let mut alpha = am.re.clone();
        alpha.ln_mut();
        alpha /= &lnq;
        let half = Float::with_val(prec, 0.5);
        let e = Float::with_val(prec, &half - &alpha);
        direct *= real_pow(&qz.re, &e);
        direct /= real_pow(&z.re, &e);
        direct *= &qpoch_inf(&(&(ctx.q() / am) * &qz), &ctx).re;
        direct /= &qpoch_inf(&(&(ctx.q() / am) * &zc), &ctx).re;
        direct *= &qpoch_inf(&(am * &zc), &ctx).re;
        direct /= &qpoch_inf(&(am * &qz), &ctx).re;
    }
    assert!(got.im.to_f64().abs() < 1e-70);
    let rel = (Float::with_val(prec, &got.re - &direct) / &direct).abs().to_f64();
    assert!(rel < 1e-66, "shift factor vs principal-branch ratio: {rel:.3e}");
}

fn trunc_fast() -> LatticeTruncation {
    LatticeTruncation::new(40, 1e-12, 1_000_000)
}

#[test]
fn s1_n1_summation_matches_closed_product() {
    let ctx = ctx_fast();
    let mut r = rng(337);
    let p = sample_jackson_params(&mut r, &ctx, 1, 1, 0, 0.5);
    let z = rand_point(&mut r, &ctx, 1);
    let rep = vandiejen_residual(&p, &z, &trunc_fast(), &ctx).unwrap();
    assert!(
        rep.passes(1e-25),
        "residual {:.3e} shell {:.3e}",
        rep.residual,
        rep.shell_error
    );
}

#[test]
fn s1_result_independent_of_z() {
    let ctx = ctx_fast();
    let mut r = rng(347);
    let p = sample_jackson_params(&mut r, &ctx, 1, 1, 0, 0.5);
    let one = ctx.one();
    let phi = |_w: &[Complex]| Ok(one.clone());
    let z1 = rand_point(&mut r, &ctx, 1);
    let z2 = rand_point(&mut r, &ctx, 1);
    let v1 = regularized_integral(&phi, &z1, &p, &trunc_fast(), &ctx).unwrap();
    let v2 = regularized_integral(&phi, &z2, &p, &trunc_fast(), &ctx).unwrap();
    let res = crate::rel_residual(&v1.value, &v2.value);
    assert!(
        res < 20.0 * (v1.last_shell_rel + v2.last_shell_rel).max(1e-24),
        "z-independence violated: {res:.3e}"
    );
}

#[test]
fn lattice_shift_and_quasi_periodicity() {
    let ctx = ctx_fast();
    let mut r = rng(353);
    // s = 2, n = 1: one-dimensional lattice, six characters
    let p = sample_jackson_params(&mut r, &ctx, 2, 1, 0, 0.7);
    let one = ctx.one();
    let phi = |_w: &[Complex]| Ok(one.clone());
    let z = rand_point(&mut r, &ctx, 1);
    let base = regularized_integral(&phi, &z, &p, &trunc_fast(), &ctx).unwrap();
    // z -> qz: <<phi>> picks up (q z^2)^{-(s-1)}
    let zq = vec![ctx.q() * &z[0]];
    let shifted = regularized_integral(&phi, &zq, &p, &trunc_fast(), &ctx).unwrap();
    let factor = (&(ctx.q() * &(&z[0] * &z[0]))).pow_i((p.s - 1) as i64);
    let res = crate::rel_residual(&(&shifted.value * &factor), &base.value);
    assert!(
        res < 20.0 * (base.last_shell_rel + shifted.last_shell_rel).max(1e-24),
        "quasi-periodicity violated: {res:.3e}"
    );
    // W-invariance: z -> 1/z
    let zi = vec![z[0].inv()];
    let flipped = regularized_integral(&phi, &zi, &p, &trunc_fast(), &ctx).unwrap();
    let res2 = crate::rel_residual(&flipped.value, &base.value);
    assert!(
        res2 < 20.0 * (base.last_shell_rel + flipped.last_shell_rel).max(1e-24),
        "inversion invariance violated: {res2:.3e}"
    );
}

#[test]
fn vandiejen_n2_and_depth_monotonicity() {
    let ctx = ctx_fast();
    let mut r = rng(359);
    let p = sample_jackson_params(&mut r, &ctx, 1, 2, 0, 0.7);
    let z = rand_point(&mut r, &ctx, 2);
    // deeper truncation (larger radius budget, lower stop threshold)
    // must not increase the residual envelope
    let mut last = f64::INFINITY;
    for (radius, stop) in [(20u32, 1e-6), (30, 1e-9), (40, 1e-12)] {
        let trunc = LatticeTruncation::new(radius, stop, 2_000_000);
        let rep = vandiejen_residual(&p, &z, &trunc, &ctx).unwrap();
        assert!(
            rep.residual <= last * 1.5 + 1e-30,
            "residual grew with depth: {:.3e} after {:.3e}",
            rep.residual,
            last
        );
        assert!(rep.passes(1e-20), "identity fails at radius {radius}");
        last = rep.residual.max(1e-30);
    }
}

#[test]
fn shell_decay_is_geometric_for_accepted_values() {
    let ctx = ctx_fast();
    let mut r = rng(367);
    let p = sample_jackson_params(&mut r, &ctx, 1, 2, 0, 0.6);
    let one = ctx.one();
    let phi = |_w: &[Complex]| Ok(one.clone());
    let z = rand_point(&mut r, &ctx, 2);
    let v = regularized_integral(&phi, &z, &p, &trunc_fast(), &ctx).unwrap();
    let k = v.shell_rels.len();
    assert!(k >= 6, "expected several shells, got {k}");
    for w in v.shell_rels[k - 5..].windows(2) {
        assert!(
            w[1] < 0.9 * w[0] || w[1] < 1e-14,
            "shell decay not geometric: {:?}",
            &v.shell_rels[k - 5..]
        );
    }
}

#[test]
fn divergent_configuration_reports_unconverged() {
    let ctx = ctx_fast();
    let mut r = rng(373);
    // characters with |q|-exponent sum far above s: shells grow
    let t = rand_q_exp(&mut r, &ctx, 0.02, 0.05);
    let a: Vec<Complex> = (0..4).map(|_| rand_q_exp(&mut r, &ctx, 0.45, 0.5)).collect();
    let x = vec![rand_q_exp(&mut r, &ctx, 0.05, 0.25)];
    let p = ParameterSet::new(1, 1, t, a, x).unwrap();
    let z = rand_point(&mut r, &ctx, 1);
    let one = ctx.one();
    let phi = |_w: &[Complex]| Ok(one.clone());
    let trunc = LatticeTruncation::new(25, 1e-12, 1_000_000);
    assert!(matches!(
        regularized_integral(&phi, &z, &p, &trunc, &ctx),
        Err(Error::Unconverged { .. })
    ));
}

#[test]
fn wronskian_s2_n1_matrix_determinant() {
    let ctx = ctx_fast();
    let mut r = rng(379);
    let p = sample_jackson_params(&mut r, &ctx, 2, 1, 1, 0.6);
    let rep = wronskian_residual(&p, &p.x.clone(), &trunc_fast(), &ctx).unwrap();
    assert!(
        rep.passes(1e-12),
        "wronskian residual {:.3e} shell {:.3e}",
        rep.residual,
        rep.shell_error
    );
}

#[test]
fn connection_s2_n1_phi_one() {
    let ctx = ctx_fast();
    let mut r = rng(383);
    let p = sample_jackson_params(&mut r, &ctx, 2, 1, 0, 0.8);
    let z = rand_point(&mut r, &ctx, 1);
    let rep = connection_residual(&PhiSelector::One, &z, &p, &p.x.clone(), &trunc_fast(), &ctx)
        .unwrap();
    assert!(
        rep.passes(1e-12),
        "connection residual {:.3e} shell {:.3e}",
        rep.residual,
        rep.shell_error
    );
    // z = x_mu collapses both sides through the delta property
    let mu = MultiIndex::new(IndexKind::Z, vec![0, 1]);
    let at_node = point_x_mu(&p, &mu);
    let rep2 = connection_residual(
        &PhiSelector::One,
        &at_node,
        &p,
        &p.x.clone(),
        &trunc_fast(),
        &ctx,
    )
    .unwrap();
    assert!(rep2.passes(1e-15));
}
