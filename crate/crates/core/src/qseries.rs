//! Bilateral basic hypergeometric series with convergence-checked
//! truncation, and residual checks for the classical summation and
//! transformation identities of very-well-poised series.
//!
//! Terms are generated by one-step ratio recurrences in both lattice
//! directions; each tail stops after three consecutive terms fall below
//! `eps_product` relative to the running partial sum, and the final
//! combination order (negative tail, then the central term, then the
//! positive tail) is fixed for bit-reproducibility.

use crate::error::{Error, Result};
use crate::qnum::{qpoch_inf, Complex, CompensatedSum, PrecisionContext};

/// Parameters of a bilateral series: equal-length numerator and
/// denominator lists and the argument.
#[derive(Clone, Debug)]
pub struct BilateralSeriesSpec {
    pub numerators: Vec<Complex>,
    pub denominators: Vec<Complex>,
    pub argument: Complex,
}

impl BilateralSeriesSpec {
    pub fn new(numerators: Vec<Complex>, denominators: Vec<Complex>, argument: Complex) -> Self {
        BilateralSeriesSpec {
            numerators,
            denominators,
            argument,
        }
    }
}

const TAIL_ITERATION_CAP: usize = 200_000;

/// Single term of a bilateral series, evaluated directly through finite
/// q-shifted factorials (no recurrence): `prod_i (a_i)_nu / (b_i)_nu * x^nu`.
/// Independent of the ratio-recurrence path in [`bilateral_psi`]; the
/// central term `nu = 0` is an empty product.
pub fn bilateral_term(
    spec: &BilateralSeriesSpec,
    nu: i64,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let mut out = spec.argument.pow_i(nu);
    for a in &spec.numerators {
        out = &out * &crate::qnum::qpoch_int(a, nu, ctx)?;
    }
    for b in &spec.denominators {
        let d = crate::qnum::qpoch_int(b, nu, ctx)?;
        if d.is_zero() {
            return Err(Error::Pole(format!("(b)_nu vanished at nu = {nu}")));
        }
        out = &out / &d;
    }
    Ok(out)
}
const QUIET_TERMS_TO_STOP: u32 = 3;

/// Sum of `prod_i (a_i)_nu / (b_i)_nu * x^nu` over all integers `nu`,
/// summed outward from `nu = 0`.
pub fn bilateral_psi(spec: &BilateralSeriesSpec, ctx: &PrecisionContext) -> Result<Complex> {
    let r = spec.numerators.len();
    if r == 0 || spec.denominators.len() != r {
        return Err(Error::Domain(format!(
            "need equal nonempty parameter lists, got {} and {}",
            r,
            spec.denominators.len()
        )));
    }
    if spec.numerators.iter().any(Complex::is_zero) || spec.denominators.iter().any(Complex::is_zero)
    {
        return Err(Error::ZeroArgument("bilateral series parameter"));
    }
    // convergence strip |b_1...b_r / a_1...a_r| < |x| < 1
    let mut ratio = ctx.one();
    for (b, a) in spec.denominators.iter().zip(&spec.numerators) {
        ratio = &ratio * &(b / a);
    }
    let rho_low = ratio.abs().to_f64();
    let x_mag = spec.argument.abs().to_f64();
    if !(rho_low < x_mag && x_mag < 1.0) {
        return Err(Error::DivergentSeries(format!(
            "strip condition requires {rho_low:.6e} < |x| = {x_mag:.6e} < 1"
        )));
    }

    let one = ctx.one();
    let near_zero = |v: &Complex| -> bool {
        let mut bound = ctx.eps_product().clone();
        let m = v.abs();
        if m > 1u32 {
            bound *= &m;
        }
        (&one - v).abs() < bound
    };

    // positive tail: term(nu+1) = term(nu) * x * prod (1 - a q^nu)/(1 - b q^nu)
    let mut pos = CompensatedSum::new(ctx.prec());
    let mut term = one.clone();
    let mut quiet = 0u32;
    for step in 0..TAIL_ITERATION_CAP {
        let mut next = &term * &spec.argument;
        for (a, b) in spec.numerators.iter().zip(&spec.denominators) {
            let aq = &(a * &ctx.q_pow(step as i64));
            let bq = &(b * &ctx.q_pow(step as i64));
            if near_zero(bq) {
                return Err(Error::Pole(format!(
                    "(b)_nu vanished in the positive tail at nu = {}",
                    step + 1
                )));
            }
            next = &next * &(&(&one - aq) / &(&one - bq));
        }
        term = next;
        pos.add(&term);
        let partial_mag = (&one + &pos.value()).abs().to_f64();
        if term.abs().to_f64() < ctx.eps_product().to_f64() * partial_mag.max(1.0) {
            quiet += 1;
            if quiet >= QUIET_TERMS_TO_STOP {
                break;
            }
        } else {
            quiet = 0;
        }
        if step + 1 == TAIL_ITERATION_CAP {
            return Err(Error::DivergentSeries(
                "positive tail failed to converge within the iteration cap".into(),
            ));
        }
    }

    // negative tail: term(nu-1) = term(nu) / x * prod (1 - b q^{nu-1})/(1 - a q^{nu-1})
    let mut neg = CompensatedSum::new(ctx.prec());
    term = one.clone();
    quiet = 0;
    for step in 0..TAIL_ITERATION_CAP {
        let expo = -(step as i64) - 1;
        let mut next = &term / &spec.argument;
        for (a, b) in spec.numerators.iter().zip(&spec.denominators) {
            let aq = &(a * &ctx.q_pow(expo));
            let bq = &(b * &ctx.q_pow(expo));
            if near_zero(aq) {
                return Err(Error::Pole(format!(
                    "(a)_nu vanished in the negative tail at nu = {expo}"
                )));
            }
            next = &next * &(&(&one - bq) / &(&one - aq));
        }
        term = next;
        neg.add(&term);
        let partial_mag = (&(&one + &neg.value()) + &pos.value()).abs().to_f64();
        if term.abs().to_f64() < ctx.eps_product().to_f64() * partial_mag.max(1.0) {
            quiet += 1;
            if quiet >= QUIET_TERMS_TO_STOP {
                break;
            }
        } else {
            quiet = 0;
        }
        if step + 1 == TAIL_ITERATION_CAP {
            return Err(Error::DivergentSeries(
                "negative tail failed to converge within the iteration cap".into(),
            ));
        }
    }

    // fixed combination order: negative tail + central term + positive tail
    let mut total = CompensatedSum::new(ctx.prec());
    total.add(&neg.value());
    total.add(&one);
    total.add(&pos.value());
    Ok(total.value())
}

fn require_nonzero(vals: &[&Complex]) -> Result<()> {
    if vals.iter().any(|v| v.is_zero()) {
        return Err(Error::ZeroArgument("series parameter"));
    }
    Ok(())
}

/// The very-well-poised parameter block: numerators
/// `q sqrt(a), -q sqrt(a), b_3, ..`, denominators
/// `sqrt(a), -sqrt(a), aq/b_3, ..`. The square-root branch is the
/// principal one, fixed once per evaluation.
fn very_well_poised_spec(
    a: &Complex,
    rest: &[Complex],
    argument: Complex,
    ctx: &PrecisionContext,
) -> BilateralSeriesSpec {
    let sqrt_a = a.sqrt();
    let aq = a * ctx.q();
    let mut numerators = vec![ctx.q() * &sqrt_a, -&(ctx.q() * &sqrt_a)];
    let mut denominators = vec![sqrt_a.clone(), -&sqrt_a];
    for b in rest {
        numerators.push(b.clone());
        denominators.push(&aq / b);
    }
    BilateralSeriesSpec::new(numerators, denominators, argument)
}

/// Left side of the very-well-poised 6psi6 summation: the bilateral series
/// with parameter pairs `(q sqrt a, -q sqrt a; sqrt a, -sqrt a)` and
/// `(b, c, d, e; aq/b, aq/c, aq/d, aq/e)` at argument `a^2 q / (bcde)`.
pub fn bailey_lhs(
    a: &Complex,
    b: &Complex,
    c: &Complex,
    d: &Complex,
    e: &Complex,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    require_nonzero(&[a, b, c, d, e])?;
    let x = bailey_argument(a, b, c, d, e, ctx);
    let spec = very_well_poised_spec(a, &[b.clone(), c.clone(), d.clone(), e.clone()], x, ctx);
    bilateral_psi(&spec, ctx)
}

fn bailey_argument(
    a: &Complex,
    b: &Complex,
    c: &Complex,
    d: &Complex,
    e: &Complex,
    ctx: &PrecisionContext,
) -> Complex {
    let num = &(a * a) * ctx.q();
    let den = &(&(b * c) * d) * e;
    &num / &den
}

/// Product side of the summation:
/// `(aq, aq/bc, aq/bd, aq/be, aq/cd, aq/ce, aq/de, q, q/a)_inf /
///  (aq/b, aq/c, aq/d, aq/e, q/b, q/c, q/d, q/e, a^2 q/bcde)_inf`.
pub fn bailey_rhs(
    a: &Complex,
    b: &Complex,
    c: &Complex,
    d: &Complex,
    e: &Complex,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    require_nonzero(&[a, b, c, d, e])?;
    let x = bailey_argument(a, b, c, d, e, ctx);
    if x.abs().to_f64() >= 1.0 {
        return Err(Error::Domain(format!(
            "|a^2 q/(bcde)| = {:.6e} must be below 1",
            x.abs().to_f64()
        )));
    }
    let q = ctx.q();
    let aq = a * q;
    let mut num = ctx.one();
    for u in [
        aq.clone(),
        &aq / &(b * c),
        &aq / &(b * d),
        &aq / &(b * e),
        &aq / &(c * d),
        &aq / &(c * e),
        &aq / &(d * e),
        q.clone(),
        q / a,
    ] {
        num = &num * &qpoch_inf(&u, ctx);
    }
    let mut den = ctx.one();
    for u in [
        &aq / b,
        &aq / c,
        &aq / d,
        &aq / e,
        q / b,
        q / c,
        q / d,
        q / e,
        x,
    ] {
        den = &den * &qpoch_inf(&u, ctx);
    }
    if den.is_zero() {
        return Err(Error::Pole("denominator product vanished".into()));
    }
    Ok(&num / &den)
}

/// Relative residual `|lhs - rhs| / (|lhs| + |rhs|)` of the 6psi6
/// summation at the given parameters.
pub fn bailey_residual(
    a: &Complex,
    b: &Complex,
    c: &Complex,
    d: &Complex,
    e: &Complex,
    ctx: &PrecisionContext,
) -> Result<f64> {
    let lhs = bailey_lhs(a, b, c, d, e, ctx)?;
    let rhs = bailey_rhs(a, b, c, d, e, ctx)?;
    Ok(crate::rel_residual(&lhs, &rhs))
}

/// Left side of the `2r psi 2r` transformation: the very-well-poised
/// series over `b_3..b_{2r}` at argument `a^{r-1} q^{r-2} / (b_3 ... b_{2r})`.
pub fn slater_lhs(a: &Complex, b: &[Complex], ctx: &PrecisionContext) -> Result<Complex> {
    let r = slater_order(b)?;
    require_nonzero(&[a])?;
    require_nonzero(&b.iter().collect::<Vec<_>>())?;
    let x = slater_argument(a, b, r, ctx);
    let spec = very_well_poised_spec(a, b, x, ctx);
    bilateral_psi(&spec, ctx)
}

fn slater_order(b: &[Complex]) -> Result<usize> {
    if b.len() < 4 || b.len() % 2 != 0 {
        return Err(Error::Domain(format!(
            "need 2r-2 >= 4 lower parameters, got {}",
            b.len()
        )));
    }
    Ok(b.len() / 2 + 1)
}

fn slater_argument(a: &Complex, b: &[Complex], r: usize, ctx: &PrecisionContext) -> Complex {
    let mut den = ctx.one();
    for bm in b {
        den = &den * bm;
    }
    &(&a.pow_i(r as i64 - 1) * &ctx.q_pow(r as i64 - 2)) / &den
}

/// One term of the transformation's right side: the prefactor quotient of
/// infinite products times the transformed series, with `alpha` in the
/// distinguished role and `others` the remaining free parameters.
fn slater_rhs_term(
    a: &Complex,
    alpha: &Complex,
    others: &[Complex],
    b: &[Complex],
    x: &Complex,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let q = ctx.q();
    let aq = a * q;
    let alpha_sq = alpha * alpha;
    let mut num = &qpoch_inf(&aq, ctx) * &qpoch_inf(&(q / a), ctx);
    for c in others {
        num = &num * &qpoch_inf(c, ctx);
        num = &num * &qpoch_inf(&(q / c), ctx);
        num = &num * &qpoch_inf(&(c / a), ctx);
        num = &num * &qpoch_inf(&(&aq / c), ctx);
    }
    for bm in b {
        num = &num * &qpoch_inf(&(&(alpha * q) / bm), ctx);
        num = &num * &qpoch_inf(&(&aq / &(alpha * bm)), ctx);
    }
    let mut den = &qpoch_inf(&(&(&alpha_sq * q) / a), ctx) * &qpoch_inf(&(&aq / &alpha_sq), ctx);
    for bm in b {
        den = &den * &qpoch_inf(&(q / bm), ctx);
        den = &den * &qpoch_inf(&(&aq / bm), ctx);
    }
    for c in others {
        den = &den * &qpoch_inf(&(c / alpha), ctx);
        den = &den * &qpoch_inf(&(&(alpha * q) / c), ctx);
        den = &den * &qpoch_inf(&(&(alpha * c) / a), ctx);
        den = &den * &qpoch_inf(&(&aq / &(alpha * c)), ctx);
    }
    if den.is_zero() {
        return Err(Error::Pole("transformation prefactor denominator vanished".into()));
    }

    // transformed series: very well poised at a -> alpha^2/a with
    // numerator parameters alpha b_m / a
    let a_new = &alpha_sq / a;
    let rest: Vec<Complex> = b.iter().map(|bm| &(alpha * bm) / a).collect();
    let spec = very_well_poised_spec(&a_new, &rest, x.clone(), ctx);
    let series = bilateral_psi(&spec, ctx)?;
    Ok(&(&num / &den) * &series)
}

/// Relative residual of the `2r psi 2r` transformation: the series on the
/// left against the sum of `r - 2` transformed terms, the k-th obtained
/// from the printed one by interchanging the distinguished parameter with
/// the k-th free parameter.
pub fn slater_residual(
    r: usize,
    a: &Complex,
    a_vec: &[Complex],
    b_vec: &[Complex],
    ctx: &PrecisionContext,
) -> Result<f64> {
    if r < 3 {
        return Err(Error::Domain("transformation needs r >= 3".into()));
    }
    if a_vec.len() != r - 2 || b_vec.len() != 2 * r - 2 {
        return Err(Error::Domain(format!(
            "expected r-2 = {} free parameters and 2r-2 = {} lower parameters, got {} and {}",
            r - 2,
            2 * r - 2,
            a_vec.len(),
            b_vec.len()
        )));
    }
    require_nonzero(&a_vec.iter().collect::<Vec<_>>())?;
    let x = slater_argument(a, b_vec, r, ctx);
    if x.abs().to_f64() >= 1.0 {
        return Err(Error::Domain(format!(
            "|a^(r-1) q^(r-2) / prod b| = {:.6e} must be below 1",
            x.abs().to_f64()
        )));
    }
    let lhs = slater_lhs(a, b_vec, ctx)?;
    let mut rhs = CompensatedSum::new(ctx.prec());
    for k in 0..a_vec.len() {
        let mut swapped = a_vec.to_vec();
        swapped.swap(0, k);
        let (alpha, others) = swapped.split_first().expect("r >= 3 checked");
        rhs.add(&slater_rhs_term(a, alpha, others, b_vec, &x, ctx)?);
    }
    Ok(crate::rel_residual(&lhs, &rhs.value()))
}
