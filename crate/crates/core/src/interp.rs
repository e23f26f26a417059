//! Elliptic Lagrange interpolation functions `E_lambda(x;z)` of type
//! `BC_n`, computed along three genuinely independent routes, together
//! with the dual functions `F_mu(x;y)`, the dual Cauchy kernel `Psi` and
//! the triangular linear system connecting them.
//!
//! The three routes are cross-validating implementations of the same
//! object: the explicit partition sum is the default, the split recursion
//! is the memoized fast path for repeated indices, and the triangular
//! solve against the `F`-matrix (the existence construction) doubles as an
//! independent oracle.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::indexsets::{
    enumerate, enumerate_partitions, genericity_check, GenericityReport, IndexKind, MultiIndex,
    ParameterSet, DEFAULT_GENERICITY,
};
use crate::matrix::ComplexMatrix;
use crate::qnum::{e_factorial, e_symbol, Complex, CompensatedSum, PrecisionContext};

/// Evaluation route for [`e_interp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterpMethod {
    /// Partition sum over ordered set partitions (the default).
    Explicit,
    /// One-variable peeling with memoization on the shift vector.
    Recursive,
    /// Triangular solve through the `F`-matrix and the kernel.
    Triangular,
}

/// One evaluation record: index, point, value and the route that
/// produced it.
#[derive(Clone, Debug)]
pub struct InterpEvaluation {
    pub lambda: MultiIndex,
    pub z: Vec<Complex>,
    pub value: Complex,
    pub method: InterpMethod,
}

/// Cached e-symbol tables for a fixed parameter set.
///
/// Holds `e(x_i t^a; x_j t^b)` for all `i, j` and `0 <= a, b <= n` (with
/// inverses for `i != j`), which is every base-point factor that the
/// explicit sum, the recursion, the `F`-matrix and the transition entries
/// can ask for. Per-point tables `e(z_k; x_j t^b)` are built on demand.
pub struct InterpBasis<'a> {
    pub p: &'a ParameterSet,
    ctx: &'a PrecisionContext,
    pub genericity: GenericityReport,
    stride: usize,
    exx: Vec<Complex>,
    exx_inv: Vec<Option<Complex>>,
}

/// Per-point table of `e(z_k; x_j t^b)` values.
pub struct PointTables {
    s: usize,
    depth: usize,
    ezx: Vec<Complex>,
}

impl PointTables {
    #[inline]
    fn at(&self, k: usize, j: usize, b: usize) -> &Complex {
        &self.ezx[(k * self.s + j) * self.depth + b]
    }
}

impl<'a> InterpBasis<'a> {
    /// Build the base-point tables; fails fast when the genericity score
    /// of `x` falls below `delta`.
    pub fn with_delta(
        p: &'a ParameterSet,
        delta: f64,
        ctx: &'a PrecisionContext,
    ) -> Result<Self> {
        let genericity = genericity_check(p, delta, ctx);
        if !genericity.generic {
            return Err(Error::NonGeneric(format!(
                "{} scored {:.3e} (threshold {delta:.1e})",
                genericity.worst, genericity.min_score
            )));
        }
        let s = p.s;
        let depth = p.n + 1;
        let mut exx = Vec::with_capacity(s * s * depth * depth);
        let mut exx_inv = Vec::with_capacity(s * s * depth * depth);
        for i in 0..s {
            for a in 0..depth {
                let xi = &p.x[i] * &p.t_pow(a as i64);
                for j in 0..s {
                    for b in 0..depth {
                        let xj = &p.x[j] * &p.t_pow(b as i64);
                        let v = if i == j && a == b {
                            ctx.zero()
                        } else {
                            e_symbol(&xi, &xj, ctx)?
                        };
                        exx_inv.push(if i == j { None } else { Some(v.inv()) });
                        exx.push(v);
                    }
                }
            }
        }
        Ok(InterpBasis {
            p,
            ctx,
            genericity,
            stride: depth,
            exx,
            exx_inv,
        })
    }

    pub fn new(p: &'a ParameterSet, ctx: &'a PrecisionContext) -> Result<Self> {
        Self::with_delta(p, DEFAULT_GENERICITY, ctx)
    }

    #[inline]
    fn idx(&self, i: usize, a: usize, j: usize, b: usize) -> usize {
        ((i * self.stride + a) * self.p.s + j) * self.stride + b
    }

    /// `e(x_i t^a; x_j t^b)`.
    #[inline]
    pub fn exx(&self, i: usize, a: usize, j: usize, b: usize) -> &Complex {
        &self.exx[self.idx(i, a, j, b)]
    }

    #[inline]
    fn exx_inv(&self, i: usize, a: usize, j: usize, b: usize) -> &Complex {
        self.exx_inv[self.idx(i, a, j, b)]
            .as_ref()
            .expect("inverse requested for an i == j entry")
    }

    /// Build `e(z_k; x_j t^b)` tables for one evaluation point.
    pub fn point_tables(&self, z: &[Complex]) -> Result<PointTables> {
        let s = self.p.s;
        let depth = self.p.n + 1;
        let mut ezx = Vec::with_capacity(z.len() * s * depth);
        for zk in z {
            if zk.is_zero() {
                return Err(Error::ZeroArgument("interpolation point coordinate"));
            }
            for j in 0..s {
                for b in 0..depth {
                    let xj = &self.p.x[j] * &self.p.t_pow(b as i64);
                    ezx.push(e_symbol(zk, &xj, self.ctx)?);
                }
            }
        }
        Ok(PointTables { s, depth, ezx })
    }

    /// `E_lambda(x; z)` by the chosen route.
    pub fn eval(&self, lambda: &MultiIndex, z: &[Complex], method: InterpMethod) -> Result<Complex> {
        self.validate_lambda(lambda)?;
        if z.len() != self.p.n {
            return Err(Error::Domain(format!(
                "expected {} point coordinates, got {}",
                self.p.n,
                z.len()
            )));
        }
        if self.p.s == 1 {
            // H_{0,n} is one-dimensional and E_(n) is identically 1.
            return Ok(self.ctx.one());
        }
        let tables = self.point_tables(z)?;
        match method {
            InterpMethod::Explicit => self.eval_explicit(lambda, &tables),
            InterpMethod::Recursive => self.eval_recursive(lambda, &tables),
            InterpMethod::Triangular => self.eval_triangular(lambda, &tables),
        }
    }

    fn validate_lambda(&self, lambda: &MultiIndex) -> Result<()> {
        if lambda.kind() != IndexKind::Z
            || lambda.len() != self.p.s
            || lambda.sum() as usize != self.p.n
        {
            return Err(Error::Domain(format!(
                "lambda {lambda} is not an element of Z_{{{},{}}}",
                self.p.s, self.p.n
            )));
        }
        Ok(())
    }

    fn eval_explicit(&self, lambda: &MultiIndex, tables: &PointTables) -> Result<Complex> {
        let s = self.p.s;
        let n = self.p.n;
        let mut sum = CompensatedSum::new(self.ctx.prec());
        for part in enumerate_partitions(lambda) {
            let mut term = self.ctx.one();
            for k in 0..n {
                let ik = part.assignment[k];
                let prof = &part.profile[k];
                let a = prof[ik] as usize;
                for j in 0..s {
                    if j == ik {
                        continue;
                    }
                    let b = prof[j] as usize;
                    term = &term * tables.at(k, j, b);
                    term = &term * self.exx_inv(ik, a, j, b);
                }
            }
            sum.add(&term);
        }
        Ok(sum.value())
    }

    /// `E_{eps_i}(x t^mu; z_k)` assembled from the cached tables.
    fn peel_factor(&self, i: usize, mu: &[u32], k: usize, tables: &PointTables) -> Complex {
        let mut out = self.ctx.one();
        for j in 0..self.p.s {
            if j == i {
                continue;
            }
            let b = mu[j] as usize;
            out = &out * tables.at(k, j, b);
            out = &out * self.exx_inv(i, mu[i] as usize, j, b);
        }
        out
    }

    fn eval_recursive(&self, lambda: &MultiIndex, tables: &PointTables) -> Result<Complex> {
        let mut memo: HashMap<Vec<u32>, Complex> = HashMap::new();
        let start = vec![0u32; self.p.s];
        Ok(self.rec(&start, 0, lambda, tables, &mut memo))
    }

    fn rec(
        &self,
        mu: &[u32],
        consumed: usize,
        lambda: &MultiIndex,
        tables: &PointTables,
        memo: &mut HashMap<Vec<u32>, Complex>,
    ) -> Complex {
        if consumed == self.p.n {
            return self.ctx.one();
        }
        if let Some(v) = memo.get(mu) {
            return v.clone();
        }
        let mut acc = self.ctx.zero();
        for i in 0..self.p.s {
            if mu[i] >= lambda.entries()[i] {
                continue;
            }
            let factor = self.peel_factor(i, mu, consumed, tables);
            let mut next = mu.to_vec();
            next[i] += 1;
            let rest = self.rec(&next, consumed + 1, lambda, tables, memo);
            acc += &(&factor * &rest);
        }
        memo.insert(mu.to_vec(), acc.clone());
        acc
    }

    /// `Psi(z; eta_mu(x))` from the point tables.
    fn psi_at_eta(&self, mu: &MultiIndex, tables: &PointTables) -> Complex {
        let mut out = self.ctx.one();
        for k in 0..self.p.n {
            for j in 0..self.p.s - 1 {
                out = &out * tables.at(k, j, mu.entries()[j] as usize);
            }
        }
        out
    }

    fn eval_triangular(&self, lambda: &MultiIndex, tables: &PointTables) -> Result<Complex> {
        let zs = enumerate(IndexKind::Z, self.p.s, self.p.n);
        let f = self.f_matrix_ordered(&zs)?;
        let g = f.inverse_upper_triangular()?;
        let col = zs
            .iter()
            .position(|m| m == lambda)
            .expect("lambda validated against Z_{s,n}");
        let mut sum = CompensatedSum::new(self.ctx.prec());
        for (row, mu) in zs.iter().enumerate() {
            if row > col {
                break; // G is upper triangular: only mu <= lambda contribute
            }
            let term = &self.psi_at_eta(mu, tables) * &g[(row, col)];
            sum.add(&term);
        }
        Ok(sum.value())
    }

    /// The matrix `F = (F_mu(x; eta_nu(x)))` over `Z_{s,n} x Z_{s,n}` in
    /// lexicographic order.
    pub fn f_matrix(&self) -> Result<ComplexMatrix> {
        let zs = enumerate(IndexKind::Z, self.p.s, self.p.n);
        self.f_matrix_ordered(&zs)
    }

    fn f_matrix_ordered(&self, zs: &[MultiIndex]) -> Result<ComplexMatrix> {
        if self.p.s < 2 {
            return Err(Error::Domain("F-matrix needs s >= 2".into()));
        }
        let m = zs.len();
        let mut out = ComplexMatrix::zeros(m, self.ctx.prec());
        for (r, mu) in zs.iter().enumerate() {
            for (c, nu) in zs.iter().enumerate() {
                out[(r, c)] = self.f_entry(mu, nu);
            }
        }
        for d in 0..m {
            if out[(d, d)].is_zero() {
                return Err(Error::NonGeneric(format!(
                    "F diagonal vanished at {}",
                    zs[d]
                )));
            }
        }
        Ok(out)
    }

    /// `F_mu(x; eta_nu(x)) = prod_{i,j} e(x_i; x_j t^{nu_j})_{mu_i}`.
    fn f_entry(&self, mu: &MultiIndex, nu: &MultiIndex) -> Complex {
        let mut out = self.ctx.one();
        for i in 0..self.p.s {
            for j in 0..self.p.s - 1 {
                let b = nu.entries()[j] as usize;
                for l in 0..mu.entries()[i] as usize {
                    out = &out * self.exx(i, l, j, b);
                    if out.is_zero() {
                        return out;
                    }
                }
            }
        }
        out
    }

    /// Inverse `G = F^-1` by back-substitution on the triangular matrix.
    pub fn g_matrix(&self) -> Result<ComplexMatrix> {
        self.f_matrix()?.inverse_upper_triangular()
    }
}

/// Dual Cauchy kernel `Psi(z;y) = prod_i prod_j e(z_i; y_j)`.
pub fn kernel_psi(
    z: &[Complex],
    y: &[Complex],
    ctx: &PrecisionContext,
    _p: &ParameterSet,
) -> Result<Complex> {
    let mut out = ctx.one();
    for zi in z {
        for yj in y {
            out = &out * &e_symbol(zi, yj, ctx)?;
        }
    }
    Ok(out)
}

/// Dual function `F_mu(x;y) = prod_{i=1}^s prod_{j=1}^{s-1} e(x_i; y_j)_{mu_i}`.
pub fn f_dual(
    mu: &MultiIndex,
    y: &[Complex],
    ctx: &PrecisionContext,
    p: &ParameterSet,
) -> Result<Complex> {
    if y.len() + 1 != p.s {
        return Err(Error::Domain(format!(
            "expected s-1 = {} dual coordinates, got {}",
            p.s - 1,
            y.len()
        )));
    }
    let mut out = ctx.one();
    for (i, xi) in p.x.iter().enumerate() {
        let r = mu.entries()[i];
        for yj in y {
            out = &out * &e_factorial(xi, yj, r, &p.t, ctx)?;
        }
    }
    Ok(out)
}

/// `F = (F_mu(x; eta_nu(x)))`, rows and columns in lexicographic order.
pub fn f_matrix(p: &ParameterSet, ctx: &PrecisionContext) -> Result<ComplexMatrix> {
    InterpBasis::new(p, ctx)?.f_matrix()
}

/// `G = F^-1` via back-substitution. The Neumann path-sum route lives in
/// [`ComplexMatrix::neumann_inverse_upper_triangular`] and is exercised as
/// an independent oracle on small instances by the test suite.
pub fn g_matrix(p: &ParameterSet, ctx: &PrecisionContext) -> Result<ComplexMatrix> {
    InterpBasis::new(p, ctx)?.g_matrix()
}

/// `E_lambda(x;z)` by the chosen route. One-shot convenience around
/// [`InterpBasis`]; batch callers should hold on to the basis.
pub fn e_interp(
    lambda: &MultiIndex,
    z: &[Complex],
    method: InterpMethod,
    p: &ParameterSet,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    InterpBasis::new(p, ctx)?.eval(lambda, z, method)
}

/// Relative residual of the duality
/// `Psi(z;y) = sum_{lambda in Z_{s,n}} E_lambda(x;z) F_lambda(x;y)`.
pub fn duality_residual(
    z: &[Complex],
    y: &[Complex],
    p: &ParameterSet,
    ctx: &PrecisionContext,
) -> Result<f64> {
    let lhs = kernel_psi(z, y, ctx, p)?;
    let basis = InterpBasis::new(p, ctx)?;
    let mut sum = CompensatedSum::new(ctx.prec());
    for lambda in enumerate(IndexKind::Z, p.s, p.n) {
        let e = basis.eval(&lambda, z, InterpMethod::Explicit)?;
        let f = f_dual(&lambda, y, ctx, p)?;
        sum.add(&(&e * &f));
    }
    Ok(crate::rel_residual(&lhs, &sum.value()))
}
