//! Identity-check drivers: one per [`Identity`], plus the batch runner
//! that samples parameters, invokes the library operation and aggregates
//! a verification report.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bcjack_core::bcjackson::{
    connection_residual, regularized_integral, vandiejen_residual, wronskian_residual,
    LatticeTruncation, PhiSelector,
};
use bcjack_core::indexsets::{enumerate, point_x_mu, IndexKind, MultiIndex, ParameterSet};
use bcjack_core::interp::{duality_residual, InterpBasis, InterpMethod};
use bcjack_core::qnum::{Complex, PrecisionContext};
use bcjack_core::qseries::{bailey_residual, slater_residual};
use bcjack_core::transition::{
    one_coordinate_factor, transition_det_closed, transition_det_closed_theta,
    transition_det_residual,
};
use bcjack_core::{rel_residual, Error, Result};

use crate::config::{CheckConfig, Identity};
use crate::report::{ComplexRepr, ParameterEcho, SampleRecord, SampleStatus, VerificationReport};
use crate::sampling::{
    self, bailey_params, draw_q, interp_params, jackson_params, rand_point, required_margin,
    sample_rng, slater_params,
};

/// Residual-check outcome of one sample before thresholding.
struct Measurement {
    residual: f64,
    shell_error: f64,
    terms: u64,
    parameters: ParameterEcho,
    /// Extra context (test-function choice, sub-check breakdown).
    note: Option<String>,
    /// A hard failure detected by the driver itself (e.g. a sub-check with
    /// its own tolerance); overrides the threshold comparison.
    hard_fail: Option<String>,
}

impl Measurement {
    fn new(residual: f64, parameters: ParameterEcho) -> Self {
        Measurement {
            residual,
            shell_error: 0.0,
            terms: 0,
            parameters,
            note: None,
            hard_fail: None,
        }
    }
}

fn echo(items: &[(&str, &Complex)]) -> ParameterEcho {
    items
        .iter()
        .map(|(name, v)| (name.to_string(), ComplexRepr::from(*v)))
        .collect()
}

fn echo_params(p: &ParameterSet, z: Option<&[Complex]>) -> ParameterEcho {
    let mut out: ParameterEcho = vec![("t".to_string(), ComplexRepr::from(&p.t))];
    for (i, a) in p.a.iter().enumerate() {
        out.push((format!("a{}", i + 1), ComplexRepr::from(a)));
    }
    for (i, x) in p.x.iter().enumerate() {
        out.push((format!("x{}", i + 1), ComplexRepr::from(x)));
    }
    if let Some(z) = z {
        for (i, zi) in z.iter().enumerate() {
            out.push((format!("z{}", i + 1), ComplexRepr::from(zi)));
        }
    }
    out
}

/// How many fresh parameter draws a sample may burn on unconverged or
/// non-generic configurations before reporting UNCONVERGED.
const SAMPLE_ATTEMPTS: u32 = 8;

/// Lattice shell-stop target per dimension. Determinant checks get an
/// extra order of headroom: conditioning amplifies entry truncation
/// errors beyond the summed tail estimates.
fn shell_stop_for(identity: Identity, n: usize) -> f64 {
    if n >= 3 {
        1e-8
    } else {
        match identity {
            Identity::Wronskian | Identity::Connection => 3e-11,
            _ => 1e-12,
        }
    }
}

/// The q band an identity samples from when `--q` is not fixed.
fn q_band(identity: Identity, n: usize) -> (f64, f64) {
    if identity.uses_lattice() {
        if n >= 3 {
            (0.18, 0.22)
        } else {
            (0.2, 0.26)
        }
    } else {
        (0.2, 0.6)
    }
}

pub fn run_check(cfg: &CheckConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let samples: Vec<SampleRecord> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| run_sample(cfg, i))
        .collect();
    Ok(VerificationReport::new(cfg.clone(), samples))
}

fn run_sample(cfg: &CheckConfig, index: usize) -> SampleRecord {
    let start = Instant::now();
    let mut rng = sample_rng(cfg.seed, index as u64);
    let (lo, hi) = q_band(cfg.identity, cfg.n);
    let q = draw_q(&mut rng, cfg.q, lo, hi);
    let ctx = match PrecisionContext::real(cfg.precision_bits, q) {
        Ok(c) => c,
        Err(e) => return error_record(index, q, start, &e.to_string()),
    };
    let floor = cfg.effective_tolerance();
    let mut last_err: Option<Error> = None;
    for _attempt in 0..SAMPLE_ATTEMPTS {
        match dispatch(cfg, &ctx, &mut rng) {
            Ok(m) => {
                let effective_threshold = floor.max(20.0 * m.shell_error);
                let pass = m.hard_fail.is_none() && m.residual < effective_threshold;
                return SampleRecord {
                    index,
                    q,
                    parameters: m.parameters,
                    residual: Some(m.residual),
                    shell_error: m.shell_error,
                    effective_threshold,
                    terms: m.terms,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    status: if pass { SampleStatus::Pass } else { SampleStatus::Fail },
                    message: m.hard_fail.or(m.note),
                };
            }
            Err(e @ (Error::Unconverged { .. } | Error::NonGeneric(_) | Error::DegenerateZ(_))) => {
                // reject the draw and resample deterministically
                last_err = Some(e);
            }
            Err(e) => return error_record(index, q, start, &e.to_string()),
        }
    }
    SampleRecord {
        index,
        q,
        parameters: Vec::new(),
        residual: None,
        shell_error: 0.0,
        effective_threshold: floor,
        terms: 0,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        status: SampleStatus::Unconverged,
        message: last_err.map(|e| e.to_string()),
    }
}

fn error_record(index: usize, q: f64, start: Instant, message: &str) -> SampleRecord {
    SampleRecord {
        index,
        q,
        parameters: Vec::new(),
        residual: None,
        shell_error: 0.0,
        effective_threshold: 0.0,
        terms: 0,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        status: SampleStatus::Error,
        message: Some(message.to_string()),
    }
}

fn dispatch(cfg: &CheckConfig, ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    match cfg.identity {
        Identity::Bailey => check_bailey(ctx, rng),
        Identity::Slater => check_slater(cfg.r, ctx, rng),
        Identity::Duality => check_duality(cfg, ctx, rng),
        Identity::Delta => check_delta(cfg, ctx, rng),
        Identity::MethodAgreement => check_method_agreement(cfg, ctx, rng),
        Identity::QuasiPeriodicity => check_quasi_periodicity(cfg, ctx, rng),
        Identity::TransitionDet => check_transition_det(cfg, ctx, rng),
        Identity::OneCoordinate => check_one_coordinate(cfg, ctx, rng),
        Identity::Vandiejen => check_vandiejen(cfg, ctx, rng),
        Identity::Wronskian => check_wronskian(cfg, ctx, rng),
        Identity::Connection => check_connection(cfg, ctx, rng),
        Identity::LatticeInvariance => check_lattice_invariance(cfg, ctx, rng),
    }
}

fn check_bailey(ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    let (a, b, c, d, e) = bailey_params(rng, ctx);
    let residual = bailey_residual(&a, &b, &c, &d, &e, ctx)?;
    Ok(Measurement::new(
        residual,
        echo(&[("a", &a), ("b", &b), ("c", &c), ("d", &d), ("e", &e)]),
    ))
}

fn check_slater(r: usize, ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    let (a, a_vec, b_vec) = slater_params(rng, ctx, r);
    let residual = slater_residual(r, &a, &a_vec, &b_vec, ctx)?;
    let mut parameters = echo(&[("a", &a)]);
    for (i, v) in a_vec.iter().enumerate() {
        parameters.push((format!("a{}", i + 3), ComplexRepr::from(v)));
    }
    for (i, v) in b_vec.iter().enumerate() {
        parameters.push((format!("b{}", i + 3), ComplexRepr::from(v)));
    }
    Ok(Measurement::new(residual, parameters))
}

fn need_generic(
    p: Option<ParameterSet>,
) -> Result<ParameterSet> {
    p.ok_or_else(|| Error::NonGeneric("sampler failed to find a generic draw".into()))
}

fn check_duality(cfg: &CheckConfig, ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    let p = need_generic(interp_params(rng, ctx, cfg.s, cfg.n))?;
    let z = rand_point(rng, ctx, cfg.n);
    let y = rand_point(rng, ctx, cfg.s - 1);
    let residual = duality_residual(&z, &y, &p, ctx)?;
    let mut parameters = echo_params(&p, Some(&z));
    for (i, yi) in y.iter().enumerate() {
        parameters.push((format!("y{}", i + 1), ComplexRepr::from(yi)));
    }
    Ok(Measurement::new(residual, parameters))
}

fn check_delta(cfg: &CheckConfig, ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    let p = need_generic(interp_params(rng, ctx, cfg.s, cfg.n))?;
    let basis = InterpBasis::new(&p, ctx)?;
    let zs = enumerate(IndexKind::Z, cfg.s, cfg.n);
    let mut max_dev = 0.0f64;
    for lambda in &zs {
        for mu in &zs {
            let v = basis.eval(lambda, &point_x_mu(&p, mu), InterpMethod::Explicit)?;
            let dev = if lambda == mu {
                (&v - &ctx.one()).abs().to_f64()
            } else {
                v.abs().to_f64()
            };
            max_dev = max_dev.max(dev);
        }
    }
    let mut m = Measurement::new(max_dev, echo_params(&p, None));
    m.note = Some(format!("exhaustive over {0}x{0} index pairs", zs.len()));
    Ok(m)
}

fn random_index(rng: &mut ChaCha8Rng, kind: IndexKind, s: usize, n: usize) -> MultiIndex {
    use rand::Rng;
    let all = enumerate(kind, s, n);
    all[rng.gen_range(0..all.len())].clone()
}

fn check_method_agreement(
    cfg: &CheckConfig,
    ctx: &PrecisionContext,
    rng: &mut ChaCha8Rng,
) -> Result<Measurement> {
    let p = need_generic(interp_params(rng, ctx, cfg.s, cfg.n))?;
    let lambda = random_index(rng, IndexKind::Z, cfg.s, cfg.n);
    let z = rand_point(rng, ctx, cfg.n);
    let basis = InterpBasis::new(&p, ctx)?;
    let a = basis.eval(&lambda, &z, InterpMethod::Explicit)?;
    let b = basis.eval(&lambda, &z, InterpMethod::Recursive)?;
    let c = basis.eval(&lambda, &z, InterpMethod::Triangular)?;
    let residual = rel_residual(&a, &b)
        .max(rel_residual(&a, &c))
        .max(rel_residual(&b, &c));
    let mut m = Measurement::new(residual, echo_params(&p, Some(&z)));
    m.note = Some(format!("lambda = {lambda}"));
    Ok(m)
}

fn check_quasi_periodicity(
    cfg: &CheckConfig,
    ctx: &PrecisionContext,
    rng: &mut ChaCha8Rng,
) -> Result<Measurement> {
    use rand::Rng;
    let p = need_generic(interp_params(rng, ctx, cfg.s, cfg.n))?;
    let lambda = random_index(rng, IndexKind::Z, cfg.s, cfg.n);
    let z = rand_point(rng, ctx, cfg.n);
    let basis = InterpBasis::new(&p, ctx)?;
    let base = basis.eval(&lambda, &z, InterpMethod::Explicit)?;
    let mut residual = 0.0f64;
    // T_{z_i}: multiply back by (q z_i^2)^(s-1)
    for i in 0..cfg.n {
        let mut shifted = z.clone();
        shifted[i] = ctx.q() * &shifted[i];
        let v = basis.eval(&lambda, &shifted, InterpMethod::Explicit)?;
        let factor = (&(ctx.q() * &(&z[i] * &z[i]))).pow_i(cfg.s as i64 - 1);
        residual = residual.max(rel_residual(&(&v * &factor), &base));
    }
    // random permutation + one inversion
    let mut permuted = z.clone();
    for i in (1..permuted.len()).rev() {
        let j = rng.gen_range(0..=i);
        permuted.swap(i, j);
    }
    let flip = rng.gen_range(0..permuted.len());
    permuted[flip] = permuted[flip].inv();
    let v = basis.eval(&lambda, &permuted, InterpMethod::Explicit)?;
    residual = residual.max(rel_residual(&v, &base));
    let mut m = Measurement::new(residual, echo_params(&p, Some(&z)));
    m.note = Some(format!("lambda = {lambda}"));
    Ok(m)
}

fn check_transition_det(
    cfg: &CheckConfig,
    ctx: &PrecisionContext,
    rng: &mut ChaCha8Rng,
) -> Result<Measurement> {
    let p = need_generic(interp_params(rng, ctx, cfg.s, cfg.n))?;
    let y = rand_point(rng, ctx, cfg.s);
    // the target base must be generic as well
    let p_y = p.with_x(y.clone())?;
    InterpBasis::new(&p_y, ctx)?;
    let residual = transition_det_residual(&p, &y, ctx)?;
    let e_form = transition_det_closed(&p, &y, ctx)?;
    let theta_form = transition_det_closed_theta(&p, &y, ctx)?;
    let forms = rel_residual(&e_form, &theta_form);
    let mut parameters = echo_params(&p, None);
    for (i, yi) in y.iter().enumerate() {
        parameters.push((format!("y{}", i + 1), ComplexRepr::from(yi)));
    }
    let mut m = Measurement::new(residual, parameters);
    m.note = Some(format!("closed-form agreement {forms:.3e}"));
    if forms >= 1e-30 {
        m.hard_fail = Some(format!(
            "e-symbol and theta closed forms disagree: {forms:.3e}"
        ));
    }
    Ok(m)
}

fn check_one_coordinate(
    cfg: &CheckConfig,
    ctx: &PrecisionContext,
    rng: &mut ChaCha8Rng,
) -> Result<Measurement> {
    let p = need_generic(interp_params(rng, ctx, cfg.s, cfg.n))?;
    let y_new = sampling::rand_q_exp(rng, ctx, 0.05, 0.25);
    let oc = one_coordinate_factor(&p, &y_new, ctx)?;
    let m_size = oc.matrix.entries.size();
    let mut forbidden_max = 0.0f64;
    let mut diag_max = 0.0f64;
    for (row, alpha) in oc.matrix.indices.iter().enumerate() {
        let mut row_norm = 0.0f64;
        for col in 0..m_size {
            row_norm += oc.matrix.entries[(row, col)].abs().to_f64();
        }
        for (col, beta) in oc.matrix.indices.iter().enumerate() {
            let forbidden = (0..cfg.s - 1).any(|i| alpha.entries()[i] < beta.entries()[i]);
            if forbidden {
                forbidden_max = forbidden_max
                    .max(oc.matrix.entries[(row, col)].abs().to_f64() / row_norm);
            }
        }
        diag_max = diag_max.max(rel_residual(
            &oc.matrix.entries[(row, row)],
            &oc.closed_diagonal[row],
        ));
    }
    let mut parameters = echo_params(&p, None);
    parameters.push(("y_s".to_string(), ComplexRepr::from(&y_new)));
    let mut m = Measurement::new(diag_max.max(forbidden_max), parameters);
    m.note = Some(format!(
        "forbidden entries {forbidden_max:.3e}, diagonal {diag_max:.3e}"
    ));
    if forbidden_max >= 1e-28 {
        m.hard_fail = Some(format!(
            "forbidden entry magnitude {forbidden_max:.3e} above 1e-28"
        ));
    }
    Ok(m)
}

fn check_vandiejen(cfg: &CheckConfig, ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    let stop = shell_stop_for(cfg.identity, cfg.n);
    let margin = required_margin(ctx.abs_q().to_f64(), cfg.radius, stop);
    let p = need_generic(jackson_params(rng, ctx, 1, cfg.n, 0, margin))?;
    let z = rand_point(rng, ctx, cfg.n);
    let trunc = LatticeTruncation::new(cfg.radius, stop, 5_000_000);
    let rep = vandiejen_residual(&p, &z, &trunc, ctx)?;
    let mut m = Measurement::new(rep.residual, echo_params(&p, Some(&z)));
    m.shell_error = rep.shell_error;
    m.terms = rep.terms_used;
    Ok(m)
}

fn check_wronskian(cfg: &CheckConfig, ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    let stop = shell_stop_for(cfg.identity, cfg.n);
    let margin = required_margin(ctx.abs_q().to_f64(), cfg.radius, stop);
    let p = need_generic(jackson_params(
        rng,
        ctx,
        cfg.s,
        cfg.n,
        cfg.s as u32 - 1,
        margin,
    ))?;
    let trunc = LatticeTruncation::new(cfg.radius, stop, 5_000_000);
    let rep = wronskian_residual(&p, &p.x.clone(), &trunc, ctx)?;
    let mut m = Measurement::new(rep.residual, echo_params(&p, None));
    m.shell_error = rep.shell_error;
    m.terms = rep.terms_used;
    Ok(m)
}

fn check_connection(cfg: &CheckConfig, ctx: &PrecisionContext, rng: &mut ChaCha8Rng) -> Result<Measurement> {
    use rand::Rng;
    let stop = shell_stop_for(cfg.identity, cfg.n);
    let margin = required_margin(ctx.abs_q().to_f64(), cfg.radius, stop);
    // margin for the worst-case Schur weight keeps both phi choices safe
    let p = need_generic(jackson_params(
        rng,
        ctx,
        cfg.s,
        cfg.n,
        cfg.s as u32 - 1,
        margin,
    ))?;
    let z = rand_point(rng, ctx, cfg.n);
    let use_schur: bool = rng.gen();
    let phi = if use_schur {
        PhiSelector::Schur(random_index(rng, IndexKind::B, cfg.s, cfg.n))
    } else {
        PhiSelector::One
    };
    let trunc = LatticeTruncation::new(cfg.radius, stop, 5_000_000);
    let rep = connection_residual(&phi, &z, &p, &p.x.clone(), &trunc, ctx)?;
    let mut m = Measurement::new(rep.residual, echo_params(&p, Some(&z)));
    m.shell_error = rep.shell_error;
    m.terms = rep.terms_used;
    m.note = Some(match &phi {
        PhiSelector::One => "phi = 1".to_string(),
        PhiSelector::Schur(l) => format!("phi = chi_{l}"),
    });
    Ok(m)
}

fn check_lattice_invariance(
    cfg: &CheckConfig,
    ctx: &PrecisionContext,
    rng: &mut ChaCha8Rng,
) -> Result<Measurement> {
    use rand::Rng;
    let stop = shell_stop_for(cfg.identity, cfg.n);
    let margin = required_margin(ctx.abs_q().to_f64(), cfg.radius, stop);
    let p = need_generic(jackson_params(rng, ctx, cfg.s, cfg.n, 0, margin))?;
    let z = rand_point(rng, ctx, cfg.n);
    let one = ctx.one();
    let phi = |_w: &[Complex]| Ok(one.clone());
    let trunc = LatticeTruncation::new(cfg.radius, stop, 5_000_000);
    let base = regularized_integral(&phi, &z, &p, &trunc, ctx)?;
    let mut shell = base.tail_estimate;
    let mut terms = base.terms_used;
    let mut residual = 0.0f64;
    // lattice shift z -> z q^{e_1}, corrected by the H_{s-1,n} factor
    let mut zq = z.clone();
    zq[0] = ctx.q() * &zq[0];
    let shifted = regularized_integral(&phi, &zq, &p, &trunc, ctx)?;
    let factor = (&(ctx.q() * &(&z[0] * &z[0]))).pow_i(cfg.s as i64 - 1);
    residual = residual.max(rel_residual(&(&shifted.value * &factor), &base.value));
    shell += shifted.tail_estimate;
    terms += shifted.terms_used;
    // W_n action: permutation and one inversion
    let mut moved = z.clone();
    if cfg.n > 1 {
        moved.reverse();
    }
    let flip = rng.gen_range(0..moved.len());
    moved[flip] = moved[flip].inv();
    let acted = regularized_integral(&phi, &moved, &p, &trunc, ctx)?;
    residual = residual.max(rel_residual(&acted.value, &base.value));
    shell += acted.tail_estimate;
    terms += acted.terms_used;
    let mut m = Measurement::new(residual, echo_params(&p, Some(&z)));
    m.shell_error = shell;
    m.terms = terms;
    Ok(m)
}
