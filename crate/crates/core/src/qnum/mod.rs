//! Precision context and the scalar building blocks: q-shifted factorials,
//! the theta function `theta(u) = (u)_inf (q/u)_inf`, the antisymmetric
//! symbol `e(a;b) = a^-1 theta(ab) theta(a/b)` and its t-shifted factorials.

mod complex;

pub use complex::{Complex, CompensatedSum};

use rug::Float;

use crate::error::{Error, Result};

/// Working precision, the base `q` with its fixed square-root branch, and
/// the two tolerance knobs used throughout the crate.
///
/// `eps_product` is the relative accuracy target of infinite-product tails;
/// `eps_identity` is the default pass threshold for identity residuals.
/// Construction enforces `0 < |q| < 1` and `eps_product < eps_identity`.
#[derive(Clone)]
pub struct PrecisionContext {
    prec: u32,
    q: Complex,
    sqrt_q: Complex,
    q_inv: Complex,
    abs_q: Float,
    one_minus_abs_q: Float,
    eps_product: Float,
    eps_identity: f64,
    /// Upper bound for `|theta(u)|` on the annulus `|q| <= |u| < 1`,
    /// used to normalize genericity scores.
    theta_bound: Float,
}

impl PrecisionContext {
    /// Default identity threshold at 256 bits.
    pub const DEFAULT_EPS_IDENTITY: f64 = 1e-25;

    /// Context with default tolerances: `eps_product = 2^-(prec-12)`,
    /// `eps_identity = 1e-25`.
    pub fn new(prec: u32, q: Complex) -> Result<Self> {
        let eps_product = Float::with_val(prec, Float::i_exp(1, -(prec as i32 - 12)));
        Self::with_tolerances(prec, q, eps_product, Self::DEFAULT_EPS_IDENTITY)
    }

    /// Context over a real base `q`.
    pub fn real(prec: u32, q: f64) -> Result<Self> {
        let qc = Complex::new(Float::with_val(prec, q), Float::new(prec));
        Self::new(prec, qc)
    }

    /// Fully explicit constructor.
    pub fn with_tolerances(
        prec: u32,
        q: Complex,
        eps_product: Float,
        eps_identity: f64,
    ) -> Result<Self> {
        if prec < 8 {
            return Err(Error::InvalidContext(format!(
                "precision {prec} below minimum of 8 bits"
            )));
        }
        let abs_q = q.abs();
        if abs_q.is_zero() || abs_q >= 1u32 {
            return Err(Error::InvalidContext(format!(
                "|q| = {} outside (0, 1)",
                abs_q.to_f64()
            )));
        }
        if !(eps_product.to_f64() < eps_identity) {
            return Err(Error::InvalidContext(format!(
                "eps_product {} must be below eps_identity {}",
                eps_product.to_f64(),
                eps_identity
            )));
        }
        let sqrt_q = q.sqrt();
        let q_inv = q.inv();
        let one_minus_abs_q = Float::with_val(prec, 1u32 - &abs_q);
        // (-1; |q|)_inf^2 caps |(u)_inf (q/u)_inf| on the annulus.
        let mut theta_bound = Float::with_val(prec, 1u32);
        let mut pw = Float::with_val(prec, 1u32);
        loop {
            let factor = Float::with_val(prec, 1u32 + &pw);
            theta_bound *= &factor;
            pw *= &abs_q;
            if Float::with_val(prec, &pw / &one_minus_abs_q) < eps_product {
                break;
            }
        }
        theta_bound.square_mut();
        Ok(PrecisionContext {
            prec,
            q,
            sqrt_q,
            q_inv,
            abs_q,
            one_minus_abs_q,
            eps_product,
            eps_identity,
            theta_bound,
        })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn q(&self) -> &Complex {
        &self.q
    }

    /// The fixed branch of `q^(1/2)` (principal root).
    pub fn sqrt_q(&self) -> &Complex {
        &self.sqrt_q
    }

    pub fn q_inv(&self) -> &Complex {
        &self.q_inv
    }

    pub fn abs_q(&self) -> &Float {
        &self.abs_q
    }

    pub fn one_minus_abs_q(&self) -> &Float {
        &self.one_minus_abs_q
    }

    pub fn eps_product(&self) -> &Float {
        &self.eps_product
    }

    pub fn eps_identity(&self) -> f64 {
        self.eps_identity
    }

    pub(crate) fn theta_bound(&self) -> &Float {
        &self.theta_bound
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(&self, k: i64) -> Complex {
        self.q.pow_i(k)
    }

    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.prec, v)
    }

    pub fn complex(&self, re: f64, im: f64) -> Complex {
        Complex::new(Float::with_val(self.prec, re), Float::with_val(self.prec, im))
    }

    pub fn one(&self) -> Complex {
        Complex::one(self.prec)
    }

    pub fn zero(&self) -> Complex {
        Complex::zero(self.prec)
    }

    /// Parse a complex number from decimal strings for the two parts.
    pub fn complex_from_str(&self, re: &str, im: &str) -> Result<Complex> {
        let pre = Float::parse(re)
            .map_err(|e| Error::Config(format!("bad real part {re:?}: {e}")))?;
        let pim = Float::parse(im)
            .map_err(|e| Error::Config(format!("bad imaginary part {im:?}: {e}")))?;
        Ok(Complex::new(
            Float::with_val(self.prec, pre),
            Float::with_val(self.prec, pim),
        ))
    }
}

/// Infinite q-shifted factorial `(u)_inf = prod_{l>=0} (1 - u q^l)`.
///
/// The product is truncated adaptively: it stops at the first `L` whose
/// geometric tail bound `|u| |q|^L / (1 - |q|)` drops below
/// `eps_product * max(1, |partial product|)`.
pub fn qpoch_inf(u: &Complex, ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    let one = Complex::one(p);
    let mut prod = Complex::one(p);
    let mut uq = u.clone();
    loop {
        let tail = Float::with_val(p, uq.abs() / ctx.one_minus_abs_q());
        let mut bound = ctx.eps_product().clone();
        let pm = prod.abs();
        if pm > 1u32 {
            bound *= &pm;
        }
        if tail < bound {
            break;
        }
        prod = &prod * &(&one - &uq);
        uq = &uq * ctx.q();
    }
    prod
}

/// Finite / bilateral q-shifted factorial `(u)_nu` for any integer `nu`,
/// evaluated as a finite product:
/// `prod_{l=0}^{nu-1} (1 - u q^l)` for `nu >= 0` and
/// `prod_{l=1}^{-nu} (1 - u q^-l)^-1` for `nu < 0`.
pub fn qpoch_int(u: &Complex, nu: i64, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    let one = Complex::one(p);
    let mut prod = Complex::one(p);
    if nu >= 0 {
        let mut uq = u.clone();
        for _ in 0..nu {
            prod = &prod * &(&one - &uq);
            uq = &uq * ctx.q();
        }
    } else {
        let mut uq = u.clone();
        for _ in 0..(-nu) {
            uq = &uq * ctx.q_inv();
            let factor = &one - &uq;
            let mut bound = ctx.eps_product().clone();
            let um = uq.abs();
            if um > 1u32 {
                bound *= &um;
            }
            if factor.abs() < bound {
                return Err(Error::Pole(format!(
                    "(u)_nu denominator factor 1 - u q^-l vanishes at |u q^-l| = {}",
                    um.to_f64()
                )));
            }
            prod = &prod / &factor;
        }
    }
    Ok(prod)
}

/// `theta(u) = (u)_inf (q/u)_inf`, with the argument first renormalized
/// into the annulus `|q| <= |u| < 1` through `theta(qu) = -u^-1 theta(u)`
/// so that both infinite products are evaluated at well-scaled arguments.
pub fn theta(u: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    theta_with_scale(u, ctx).map(|(v, _)| v)
}

/// Like [`theta`], but also returns `|theta(u')|` at the annulus
/// representative `u' = q^k u`. That magnitude is scale-free and serves as
/// a genericity score: it is small precisely when `u` sits near the zero
/// set `q^Z` of theta.
pub fn theta_with_scale(u: &Complex, ctx: &PrecisionContext) -> Result<(Complex, Float)> {
    if u.is_zero() {
        return Err(Error::ZeroArgument("theta"));
    }
    let mut v = u.clone();
    let mut k: i64 = 0;
    let mut mag = v.abs();
    while mag >= 1u32 {
        v = &v * ctx.q();
        k += 1;
        mag = v.abs();
    }
    while mag < *ctx.abs_q() {
        v = &v * ctx.q_inv();
        k -= 1;
        mag = v.abs();
    }
    let qv = ctx.q() / &v;
    let theta_ann = &qpoch_inf(&v, ctx) * &qpoch_inf(&qv, ctx);
    let ann_mag = theta_ann.abs();
    if k == 0 {
        return Ok((theta_ann, ann_mag));
    }
    // theta(u) = theta(q^k u) * (-1)^k q^{k(k-1)/2} u^k
    let mut factor = &ctx.q_pow(k * (k - 1) / 2) * &u.pow_i(k);
    if k % 2 != 0 {
        factor = -&factor;
    }
    Ok((&theta_ann * &factor, ann_mag))
}

/// The antisymmetric symbol `e(a;b) = a^-1 theta(ab) theta(a/b)`.
pub fn e_symbol(a: &Complex, b: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument("e_symbol"));
    }
    let t1 = theta(&(a * b), ctx)?;
    let t2 = theta(&(a / b), ctx)?;
    Ok(&(&a.inv() * &t1) * &t2)
}

/// t-shifted e-factorial `e(a;b)_r = e(a;b) e(at;b) ... e(at^{r-1};b)`.
pub fn e_factorial(
    a: &Complex,
    b: &Complex,
    r: u32,
    t: &Complex,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let mut prod = Complex::one(ctx.prec());
    let mut at = a.clone();
    for _ in 0..r {
        prod = &prod * &e_symbol(&at, b, ctx)?;
        at = &at * t;
    }
    Ok(prod)
}

#[cfg(test)]
mod tests;
