//! One-shot expression evaluation for goldens and debugging.
//!
//! Complex scalars are written `re` or `re,im`; lists separate elements
//! with `;`. Integer vectors (multi-indices) separate entries with `,`.

use bcjack_core::bcjackson::{regularized_integral, symplectic_schur, LatticeTruncation, PhiSelector};
use bcjack_core::indexsets::{IndexKind, MultiIndex, ParameterSet};
use bcjack_core::interp::{e_interp, InterpMethod};
use bcjack_core::qnum::{e_symbol, theta, Complex, PrecisionContext};
use bcjack_core::{Error, Result};

use crate::report::ComplexRepr;

/// Value plus evaluation metadata, ready for printing.
#[derive(Debug)]
pub struct EvalOutput {
    pub value: ComplexRepr,
    pub precision_bits: u32,
    pub details: Vec<(String, String)>,
}

pub fn parse_complex(ctx: &PrecisionContext, text: &str) -> Result<Complex> {
    let mut parts = text.split(',');
    let re = parts.next().unwrap_or("").trim();
    let im = parts.next().unwrap_or("0").trim();
    if parts.next().is_some() {
        return Err(Error::Config(format!("malformed complex number {text:?}")));
    }
    ctx.complex_from_str(re, if im.is_empty() { "0" } else { im })
}

pub fn parse_complex_list(ctx: &PrecisionContext, text: &str) -> Result<Vec<Complex>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_complex(ctx, s.trim()))
        .collect()
}

pub fn parse_index(kind: IndexKind, text: &str) -> Result<MultiIndex> {
    let entries: std::result::Result<Vec<u32>, _> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<u32>())
        .collect();
    let entries = entries.map_err(|e| Error::Config(format!("bad index {text:?}: {e}")))?;
    if entries.is_empty() {
        return Err(Error::Config("empty multi-index".into()));
    }
    Ok(MultiIndex::new(kind, entries))
}

fn output(value: &Complex, ctx: &PrecisionContext, details: Vec<(String, String)>) -> EvalOutput {
    EvalOutput {
        value: ComplexRepr::from(value),
        precision_bits: ctx.prec(),
        details,
    }
}

pub fn eval_theta(ctx: &PrecisionContext, u: &str) -> Result<EvalOutput> {
    let uc = parse_complex(ctx, u)?;
    let v = theta(&uc, ctx)?;
    Ok(output(&v, ctx, vec![("eps_product".into(), format!("{:e}", ctx.eps_product().to_f64()))]))
}

pub fn eval_e_symbol(ctx: &PrecisionContext, a: &str, b: &str) -> Result<EvalOutput> {
    let ac = parse_complex(ctx, a)?;
    let bc = parse_complex(ctx, b)?;
    let v = e_symbol(&ac, &bc, ctx)?;
    Ok(output(&v, ctx, Vec::new()))
}

pub fn eval_schur(ctx: &PrecisionContext, lambda: &str, z: &str) -> Result<EvalOutput> {
    let lam = parse_index(IndexKind::B, lambda)?;
    let zc = parse_complex_list(ctx, z)?;
    let v = symplectic_schur(&lam, &zc, ctx)?;
    Ok(output(&v, ctx, vec![("lambda".into(), format!("{lam}"))]))
}

/// Characters do not enter the interpolation functions; when the caller
/// does not supply them, fill the parameter set with fixed placeholders.
fn interp_parameter_set(
    ctx: &PrecisionContext,
    s: usize,
    n: usize,
    t: &str,
    x: &str,
    a: Option<&str>,
) -> Result<ParameterSet> {
    let tc = parse_complex(ctx, t)?;
    let xc = parse_complex_list(ctx, x)?;
    let ac = match a {
        Some(text) => parse_complex_list(ctx, text)?,
        None => (0..2 * s + 2)
            .map(|m| ctx.complex(0.5 + 0.03 * m as f64, 0.0))
            .collect(),
    };
    ParameterSet::new(s, n, tc, ac, xc)
}

#[allow(clippy::too_many_arguments)]
pub fn eval_interp(
    ctx: &PrecisionContext,
    t: &str,
    x: &str,
    lambda: &str,
    z: &str,
    method: InterpMethod,
    a: Option<&str>,
) -> Result<EvalOutput> {
    let lam = parse_index(IndexKind::Z, lambda)?;
    let zc = parse_complex_list(ctx, z)?;
    let s = lam.len();
    let n = lam.sum() as usize;
    if zc.len() != n {
        return Err(Error::Config(format!(
            "lambda sums to n = {n} but z has {} coordinates",
            zc.len()
        )));
    }
    let p = interp_parameter_set(ctx, s, n, t, x, a)?;
    let v = e_interp(&lam, &zc, method, &p, ctx)?;
    Ok(output(
        &v,
        ctx,
        vec![
            ("lambda".into(), format!("{lam}")),
            ("method".into(), format!("{method:?}")),
        ],
    ))
}

#[allow(clippy::too_many_arguments)]
pub fn eval_jackson(
    ctx: &PrecisionContext,
    s: usize,
    n: usize,
    t: &str,
    a: &str,
    x: &str,
    z: &str,
    phi: &str,
    radius: u32,
    shell_stop: f64,
) -> Result<EvalOutput> {
    let tc = parse_complex(ctx, t)?;
    let ac = parse_complex_list(ctx, a)?;
    let xc = parse_complex_list(ctx, x)?;
    let zc = parse_complex_list(ctx, z)?;
    let p = ParameterSet::new(s, n, tc, ac, xc)?;
    let selector = if phi == "one" || phi == "1" {
        PhiSelector::One
    } else if let Some(rest) = phi.strip_prefix("schur:") {
        PhiSelector::Schur(parse_index(IndexKind::B, rest)?)
    } else {
        return Err(Error::Config(format!(
            "phi must be 'one' or 'schur:<lambda>', got {phi:?}"
        )));
    };
    let trunc = LatticeTruncation::new(radius, shell_stop, 5_000_000);
    let one = ctx.one();
    let value = match &selector {
        PhiSelector::One => {
            regularized_integral(&|_w: &[Complex]| Ok(one.clone()), &zc, &p, &trunc, ctx)?
        }
        PhiSelector::Schur(lam) => {
            let lam = lam.clone();
            regularized_integral(&move |w: &[Complex]| symplectic_schur(&lam, w, ctx), &zc, &p, &trunc, ctx)?
        }
    };
    Ok(output(
        &value.value,
        ctx,
        vec![
            ("terms".into(), value.terms_used.to_string()),
            ("last_shell_rel".into(), format!("{:e}", value.last_shell_rel)),
            ("tail_estimate".into(), format!("{:e}", value.tail_estimate)),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_at_one_prints_zero() {
        let ctx = PrecisionContext::real(128, 0.5).unwrap();
        let out = eval_theta(&ctx, "1").unwrap();
        assert_eq!(out.value.0, "0");
        assert_eq!(out.precision_bits, 128);
    }

    #[test]
    fn schur_trivial_index() {
        let ctx = PrecisionContext::real(128, 0.5).unwrap();
        let out = eval_schur(&ctx, "0,0", "2;3").unwrap();
        // exactly 1
        assert!(out.value.0.starts_with('1'));
    }

    #[test]
    fn interp_delta_at_node() {
        let ctx = PrecisionContext::real(192, 0.4).unwrap();
        // z = x_(1,0) = x_1
        let out = eval_interp(
            &ctx,
            "0.9375",
            "0.8125;0.625,0.125",
            "1,0",
            "0.8125",
            InterpMethod::Explicit,
            None,
        )
        .unwrap();
        let v: f64 = out.value.0.parse().unwrap_or(f64::NAN);
        assert!((v - 1.0).abs() < 1e-20);
    }

    #[test]
    fn malformed_input_rejected() {
        let ctx = PrecisionContext::real(128, 0.5).unwrap();
        assert!(parse_complex(&ctx, "1,2,3").is_err());
        assert!(parse_index(IndexKind::Z, "1,x").is_err());
        assert!(eval_jackson(&ctx, 1, 1, "0.9", "0.9;0.9;0.9;0.9", "0.8", "0.7", "nope", 10, 1e-6).is_err());
    }
}
