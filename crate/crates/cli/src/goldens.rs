//! Golden-value regression storage.
//!
//! A fixed battery of expressions is evaluated at high precision (512
//! bits by default) and stored as decimal strings; `verify` recomputes
//! the battery at the current precision and demands relative agreement
//! within `2^-200`. All battery inputs are binary-exact decimals so the
//! parsed values are identical at every precision.

use std::path::Path;

use serde::{Deserialize, Serialize};

use bcjack_core::bcjackson::{regularized_integral, symplectic_schur, LatticeTruncation};
use bcjack_core::indexsets::{IndexKind, MultiIndex, ParameterSet};
use bcjack_core::interp::{e_interp, InterpMethod};
use bcjack_core::qnum::{e_factorial, e_symbol, qpoch_inf, qpoch_int, theta, Complex, PrecisionContext};
use bcjack_core::qseries::bailey_rhs;
use bcjack_core::{Error, Result};

pub const GOLDEN_BITS: u32 = 512;
/// Relative agreement demanded by `verify`.
pub fn verify_tolerance() -> f64 {
    2f64.powi(-200)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub name: String,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldenFile {
    pub schema: u32,
    pub produced_bits: u32,
    pub entries: Vec<GoldenEntry>,
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub name: String,
    pub relative: f64,
}

/// The battery: every expression family the library exposes, at fixed
/// binary-exact inputs.
pub fn battery(bits: u32) -> Result<Vec<(String, Complex)>> {
    let mut out = Vec::new();
    let ctx = PrecisionContext::real(bits, 0.4375)?;

    out.push(("qpoch_inf(q)".to_string(), qpoch_inf(ctx.q(), &ctx)));
    out.push((
        "qpoch_int(0.3125, -7)".to_string(),
        qpoch_int(&ctx.complex(0.3125, 0.0), -7, &ctx)?,
    ));
    out.push(("theta(-1)".to_string(), theta(&ctx.complex(-1.0, 0.0), &ctx)?));
    out.push((
        "theta(0.3125+0.40625i)".to_string(),
        theta(&ctx.complex(0.3125, 0.40625), &ctx)?,
    ));
    let a = ctx.complex(0.8125, 0.25);
    let b = ctx.complex(0.59375, -0.125);
    out.push(("e_symbol(a;b)".to_string(), e_symbol(&a, &b, &ctx)?));
    let t = ctx.complex(0.90625, 0.0);
    out.push((
        "e_factorial(a;b)_3".to_string(),
        e_factorial(&a, &b, 3, &t, &ctx)?,
    ));
    out.push((
        "schur_(2,1)(2, 3.5)".to_string(),
        symplectic_schur(
            &MultiIndex::new(IndexKind::B, vec![2, 1]),
            &[ctx.complex(2.0, 0.0), ctx.complex(3.5, 0.0)],
            &ctx,
        )?,
    ));
    out.push((
        "bailey_rhs".to_string(),
        bailey_rhs(
            &ctx.complex(1.125, 0.0),
            &ctx.complex(1.0625, 0.0),
            &ctx.complex(0.9375, 0.0),
            &ctx.complex(1.1875, 0.0),
            &ctx.complex(0.8125, 0.0),
            &ctx,
        )?,
    ));
    {
        // E_(1,1)(x; z) at s = n = 2
        let p = ParameterSet::new(
            2,
            2,
            t.clone(),
            vec![
                ctx.complex(0.53125, 0.0),
                ctx.complex(0.5625, 0.0),
                ctx.complex(0.59375, 0.0),
                ctx.complex(0.625, 0.0),
                ctx.complex(0.65625, 0.0),
                ctx.complex(0.6875, 0.0),
            ],
            vec![ctx.complex(0.875, 0.0), ctx.complex(0.65625, 0.09375)],
        )?;
        let z = [ctx.complex(0.71875, 0.0), ctx.complex(0.0, 0.84375)];
        out.push((
            "interp_E_(1,1)".to_string(),
            e_interp(
                &MultiIndex::new(IndexKind::Z, vec![1, 1]),
                &z,
                InterpMethod::Explicit,
                &p,
                &ctx,
            )?,
        ));
    }
    {
        // <<1, z>> at s = 1, n = 1: fixed truncation so the stored value is
        // a well-defined finite sum
        let jctx = PrecisionContext::real(bits, 0.203125)?;
        let p = ParameterSet::new(
            1,
            1,
            jctx.complex(0.953125, 0.0),
            vec![
                jctx.complex(0.90625, 0.0),
                jctx.complex(0.890625, 0.0),
                jctx.complex(0.921875, 0.0),
                jctx.complex(0.875, 0.0),
            ],
            vec![jctx.complex(0.78125, 0.0)],
        )?;
        let z = [jctx.complex(0.75, 0.0)];
        let one = jctx.one();
        let v = regularized_integral(
            &|_w: &[Complex]| Ok(one.clone()),
            &z,
            &p,
            &LatticeTruncation::new(40, 1e-12, 1_000_000),
            &jctx,
        )?;
        out.push(("jackson_s1_n1".to_string(), v.value));
    }
    Ok(out)
}

pub fn update(path: &Path, bits: u32) -> Result<GoldenFile> {
    let entries = battery(bits)?
        .into_iter()
        .map(|(name, v)| GoldenEntry {
            name,
            re: v.re.to_string_radix(10, None),
            im: v.im.to_string_radix(10, None),
        })
        .collect();
    let file = GoldenFile {
        schema: 1,
        produced_bits: bits,
        entries,
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Config(format!("golden serialization failed: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {path:?}: {e}")))?;
    Ok(file)
}

pub fn load(path: &Path) -> Result<GoldenFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {path:?}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("corrupted golden file {path:?}: {e}")))
}

/// Recompute the battery at `bits` and compare against the stored values.
/// Returns the mismatches above tolerance; empty means PASS.
pub fn verify(path: &Path, bits: u32) -> Result<Vec<Mismatch>> {
    let stored = load(path)?;
    let fresh = battery(bits)?;
    if stored.entries.len() != fresh.len() {
        return Err(Error::Config(format!(
            "golden file has {} entries, battery has {}",
            stored.entries.len(),
            fresh.len()
        )));
    }
    let ctx = PrecisionContext::real(bits.max(GOLDEN_BITS), 0.5)?;
    let tol = verify_tolerance();
    let mut mismatches = Vec::new();
    for (entry, (name, value)) in stored.entries.iter().zip(&fresh) {
        if entry.name != *name {
            return Err(Error::Config(format!(
                "golden entry order mismatch: {} vs {name}",
                entry.name
            )));
        }
        let stored_value = ctx.complex_from_str(&entry.re, &entry.im)?;
        let lifted = ctx.complex_from_str(
            &value.re.to_string_radix(10, None),
            &value.im.to_string_radix(10, None),
        )?;
        let rel = bcjack_core::rel_residual(&lifted, &stored_value);
        if rel > tol {
            mismatches.push(Mismatch {
                name: name.clone(),
                relative: rel,
            });
        }
    }
    Ok(mismatches)
}
