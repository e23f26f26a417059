//! Transition matrices `E(x;y) = (E_mu(x; y_nu))` between interpolation
//! bases at different base points, their closed-form determinant in both
//! the e-symbol and theta forms, and the one-coordinate triangular factors
//! of the chain decomposition.

use crate::error::{Error, Result};
use crate::indexsets::{binom, enumerate, point_x_mu, IndexKind, MultiIndex, ParameterSet};
use crate::interp::{InterpBasis, InterpMethod};
use crate::matrix::ComplexMatrix;
use crate::qnum::{e_factorial, e_symbol, theta, Complex, PrecisionContext};

/// Transition matrix from the basis at `x` to the basis at `y`, rows and
/// columns in lexicographic order of `Z_{s,n}`.
#[derive(Clone)]
pub struct TransitionMatrix {
    pub x: Vec<Complex>,
    pub y: Vec<Complex>,
    pub indices: Vec<MultiIndex>,
    pub entries: ComplexMatrix,
}

/// Entries `C_{mu nu}(x;y) = E_mu(x; y_nu)`, each computed by the explicit
/// partition sum at the point `y_nu`.
pub fn transition_matrix(
    p: &ParameterSet,
    y: &[Complex],
    ctx: &PrecisionContext,
) -> Result<TransitionMatrix> {
    let p_y = p.with_x(y.to_vec())?;
    let basis = InterpBasis::new(p, ctx)?;
    let indices = enumerate(IndexKind::Z, p.s, p.n);
    let m = indices.len();
    let mut entries = ComplexMatrix::zeros(m, ctx.prec());
    for (c, nu) in indices.iter().enumerate() {
        let point = point_x_mu(&p_y, nu);
        for (r, mu) in indices.iter().enumerate() {
            entries[(r, c)] = basis.eval(mu, &point, InterpMethod::Explicit)?;
        }
    }
    Ok(TransitionMatrix {
        x: p.x.clone(),
        y: y.to_vec(),
        indices,
        entries,
    })
}

/// Closed determinant, e-symbol form:
/// `prod_{k=1}^n [prod_{r=0}^{n-k} prod_{i<j} e(y_i t^r; y_j t^{(n-k)-r}) / e(x_i t^r; x_j t^{(n-k)-r})]^binom(s+k-3, k-1)`.
pub fn transition_det_closed(
    p: &ParameterSet,
    y: &[Complex],
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let n = p.n as i64;
    let s = p.s as i64;
    let mut out = ctx.one();
    for k in 1..=n {
        let mut inner = ctx.one();
        for r in 0..=(n - k) {
            let gap = (n - k) - r;
            for i in 0..p.s {
                for j in i + 1..p.s {
                    let num = e_symbol(
                        &(&y[i] * &p.t_pow(r)),
                        &(&y[j] * &p.t_pow(gap)),
                        ctx,
                    )?;
                    let den = e_symbol(
                        &(&p.x[i] * &p.t_pow(r)),
                        &(&p.x[j] * &p.t_pow(gap)),
                        ctx,
                    )?;
                    if den.is_zero() {
                        return Err(Error::NonGeneric(
                            "transition determinant denominator e-symbol vanished".into(),
                        ));
                    }
                    inner = &inner * &(&num / &den);
                }
            }
        }
        out = &out * &inner.pow_i(binom(s + k - 3, k - 1));
    }
    Ok(out)
}

/// Closed determinant, theta form:
/// `prod_{k,r,i<j} [x_i theta(t^{2r-(n-k)} y_i/y_j) theta(t^{n-k} y_i y_j) / (y_i theta(t^{2r-(n-k)} x_i/x_j) theta(t^{n-k} x_i x_j))]^binom(s+k-3,k-1)`.
pub fn transition_det_closed_theta(
    p: &ParameterSet,
    y: &[Complex],
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let n = p.n as i64;
    let s = p.s as i64;
    let mut out = ctx.one();
    for k in 1..=n {
        let mut inner = ctx.one();
        for r in 0..=(n - k) {
            let skew = 2 * r - (n - k);
            for i in 0..p.s {
                for j in i + 1..p.s {
                    let ty1 = theta(&(&p.t_pow(skew) * &(&y[i] / &y[j])), ctx)?;
                    let ty2 = theta(&(&p.t_pow(n - k) * &(&y[i] * &y[j])), ctx)?;
                    let tx1 = theta(&(&p.t_pow(skew) * &(&p.x[i] / &p.x[j])), ctx)?;
                    let tx2 = theta(&(&p.t_pow(n - k) * &(&p.x[i] * &p.x[j])), ctx)?;
                    let num = &(&p.x[i] * &ty1) * &ty2;
                    let den = &(&y[i] * &tx1) * &tx2;
                    if den.is_zero() {
                        return Err(Error::NonGeneric(
                            "transition determinant denominator theta vanished".into(),
                        ));
                    }
                    inner = &inner * &(&num / &den);
                }
            }
        }
        out = &out * &inner.pow_i(binom(s + k - 3, k - 1));
    }
    Ok(out)
}

/// One-coordinate transition factor `E(x; (x_1,...,x_{s-1}, y_s))` with
/// its closed diagonal and closed determinant.
#[derive(Clone)]
pub struct OneCoordinateFactor {
    pub matrix: TransitionMatrix,
    /// Diagonal entries `prod_{i<s} e(y_s; x_i t^{alpha_i})_{alpha_s} / e(x_s; x_i t^{alpha_i})_{alpha_s}`
    /// in lexicographic order of `alpha`.
    pub closed_diagonal: Vec<Complex>,
    /// The product of the closed diagonal.
    pub closed_det: Complex,
}

/// Replace the last coordinate of `x` by `y_s_new` and build the
/// triangular transition factor together with its closed diagonal.
pub fn one_coordinate_factor(
    p: &ParameterSet,
    y_s_new: &Complex,
    ctx: &PrecisionContext,
) -> Result<OneCoordinateFactor> {
    if y_s_new.is_zero() {
        return Err(Error::ZeroArgument("one_coordinate_factor"));
    }
    let mut y = p.x.clone();
    let last = y.len() - 1;
    y[last] = y_s_new.clone();
    let matrix = transition_matrix(p, &y, ctx)?;
    let mut closed_diagonal = Vec::with_capacity(matrix.indices.len());
    let mut closed_det = ctx.one();
    for alpha in &matrix.indices {
        let a_s = alpha.entries()[p.s - 1];
        let mut d = ctx.one();
        for i in 0..p.s - 1 {
            let xi_shift = &p.x[i] * &p.t_pow(alpha.entries()[i] as i64);
            let num = e_factorial(y_s_new, &xi_shift, a_s, &p.t, ctx)?;
            let den = e_factorial(&p.x[p.s - 1], &xi_shift, a_s, &p.t, ctx)?;
            if den.is_zero() {
                return Err(Error::NonGeneric(
                    "one-coordinate diagonal denominator vanished".into(),
                ));
            }
            d = &d * &(&num / &den);
        }
        closed_det = &closed_det * &d;
        closed_diagonal.push(d);
    }
    Ok(OneCoordinateFactor {
        matrix,
        closed_diagonal,
        closed_det,
    })
}

/// Relative residual between the numeric determinant of the transition
/// matrix and the closed product, combined (as a maximum) with the
/// residual of the chain decomposition
/// `det E(x;y) = prod_l det E(w^(l); w^(l-1))` over the interpolating
/// bases `w^(i) = (x_1..x_i, y_{i+1}..y_s)`.
pub fn transition_det_residual(
    p: &ParameterSet,
    y: &[Complex],
    ctx: &PrecisionContext,
) -> Result<f64> {
    let full = transition_matrix(p, y, ctx)?;
    let det = full.entries.det()?;
    let closed = transition_det_closed(p, y, ctx)?;
    let main = crate::rel_residual(&det, &closed);

    let mut chain = ctx.one();
    for l in 1..=p.s {
        // w^(l) = (x_1..x_l, y_{l+1}..y_s), w^(l-1) differs in slot l
        let mut w_hi: Vec<Complex> = Vec::with_capacity(p.s);
        let mut w_lo: Vec<Complex> = Vec::with_capacity(p.s);
        for i in 0..p.s {
            if i < l {
                w_hi.push(p.x[i].clone());
            } else {
                w_hi.push(y[i].clone());
            }
            if i < l - 1 {
                w_lo.push(p.x[i].clone());
            } else {
                w_lo.push(y[i].clone());
            }
        }
        let p_hi = p.with_x(w_hi)?;
        let factor = transition_matrix(&p_hi, &w_lo, ctx)?;
        chain = &chain * &factor.entries.det()?;
    }
    let chain_res = crate::rel_residual(&det, &chain);
    Ok(main.max(chain_res))
}
