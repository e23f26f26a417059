//! Dense matrices of arbitrary-precision complex values.
//!
//! Provides exactly the linear algebra the identity checks need: LU
//! decomposition with partial pivoting for determinants and inverses, a
//! cheap pivot-ratio condition estimate, back-substitution inversion for
//! upper-triangular matrices, and the alternating path-sum (Neumann)
//! inverse used as an independent oracle on small instances.

use crate::error::{Error, Result};
use crate::qnum::Complex;

/// Row-major square matrix of [`Complex`] entries.
#[derive(Clone)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex>,
}

/// Determinant together with the pivot-ratio condition estimate
/// `max |pivot| / min |pivot|` from the LU factorization.
#[derive(Clone, Debug)]
pub struct DetReport {
    pub det: Complex,
    pub pivot_ratio: f64,
}

impl ComplexMatrix {
    pub fn zeros(n: usize, prec: u32) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex::zero(prec); n * n],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, prec);
        for i in 0..n {
            m[(i, i)] = Complex::one(prec);
        }
        m
    }

    /// Build from a generator on (row, col).
    pub fn from_fn(n: usize, prec: u32, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut m = Self::zeros(n, prec);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        let prec = self.data[0].prec();
        let mut out = ComplexMatrix::zeros(self.n, prec);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = Complex::zero(prec);
                for k in 0..self.n {
                    acc += &(&self[(i, k)] * &rhs[(k, j)]);
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Largest row sum of entry magnitudes (infinity norm).
    pub fn norm_inf(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            let mut row = 0.0f64;
            for j in 0..self.n {
                row += self[(i, j)].abs().to_f64();
            }
            best = best.max(row);
        }
        best
    }

    /// Determinant via LU with partial pivoting, plus the pivot-ratio
    /// condition estimate.
    pub fn det_with_cond(&self) -> Result<DetReport> {
        let n = self.n;
        if n == 0 {
            return Ok(DetReport {
                det: Complex::one(2),
                pivot_ratio: 1.0,
            });
        }
        let prec = self.data[0].prec();
        let mut a = self.data.clone();
        let mut det = Complex::one(prec);
        let mut max_piv = f64::MIN_POSITIVE;
        let mut min_piv = f64::MAX;
        for col in 0..n {
            // pick the largest pivot in this column
            let mut piv_row = col;
            let mut piv_mag = a[col * n + col].abs();
            for r in col + 1..n {
                let m = a[r * n + col].abs();
                if m > piv_mag {
                    piv_mag = m;
                    piv_row = r;
                }
            }
            if piv_mag.is_zero() {
                return Ok(DetReport {
                    det: Complex::zero(prec),
                    pivot_ratio: f64::INFINITY,
                });
            }
            if piv_row != col {
                for j in 0..n {
                    a.swap(col * n + j, piv_row * n + j);
                }
                det = -&det;
            }
            let piv_f = piv_mag.to_f64();
            max_piv = max_piv.max(piv_f);
            min_piv = min_piv.min(piv_f);
            let pivot = a[col * n + col].clone();
            det = &det * &pivot;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &pivot;
                for j in col + 1..n {
                    let delta = &factor * &a[col * n + j];
                    let cell = &a[r * n + j] - &delta;
                    a[r * n + j] = cell;
                }
                a[r * n + col] = Complex::zero(prec);
            }
        }
        Ok(DetReport {
            det,
            pivot_ratio: max_piv / min_piv,
        })
    }

    pub fn det(&self) -> Result<Complex> {
        self.det_with_cond().map(|r| r.det)
    }

    /// Inverse via Gauss-Jordan with partial pivoting.
    pub fn inverse(&self) -> Result<ComplexMatrix> {
        let n = self.n;
        let prec = self.data[0].prec();
        let mut a = self.data.clone();
        let mut inv = ComplexMatrix::identity(n, prec);
        for col in 0..n {
            let mut piv_row = col;
            let mut piv_mag = a[col * n + col].abs();
            for r in col + 1..n {
                let m = a[r * n + col].abs();
                if m > piv_mag {
                    piv_mag = m;
                    piv_row = r;
                }
            }
            if piv_mag.is_zero() {
                return Err(Error::Domain("matrix is singular".into()));
            }
            if piv_row != col {
                for j in 0..n {
                    a.swap(col * n + j, piv_row * n + j);
                    inv.data.swap(col * n + j, piv_row * n + j);
                }
            }
            let pivot = a[col * n + col].clone();
            let pinv = pivot.inv();
            for j in 0..n {
                a[col * n + j] = &a[col * n + j] * &pinv;
                inv.data[col * n + j] = &inv.data[col * n + j] * &pinv;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    let d = &factor * &a[col * n + j];
                    a[r * n + j] = &a[r * n + j] - &d;
                    let d2 = &factor * &inv.data[col * n + j];
                    inv.data[r * n + j] = &inv.data[r * n + j] - &d2;
                }
            }
        }
        Ok(inv)
    }

    /// Inverse of an upper-triangular matrix by back-substitution.
    /// Fails if a diagonal entry vanishes.
    pub fn inverse_upper_triangular(&self) -> Result<ComplexMatrix> {
        let n = self.n;
        let prec = self.data[0].prec();
        let mut inv = ComplexMatrix::zeros(n, prec);
        for j in 0..n {
            if self[(j, j)].is_zero() {
                return Err(Error::Domain(format!(
                    "triangular matrix has zero diagonal at {j}"
                )));
            }
        }
        for col in 0..n {
            // solve U g = e_col, from the bottom up; g_i = 0 for i > col
            inv[(col, col)] = self[(col, col)].inv();
            for i in (0..col).rev() {
                let mut acc = Complex::zero(prec);
                for k in i + 1..=col {
                    acc += &(&self[(i, k)] * &inv[(k, col)]);
                }
                inv[(i, col)] = &(-&acc) / &self[(i, i)];
            }
        }
        Ok(inv)
    }

    /// Inverse of an upper-triangular matrix via the alternating sum over
    /// strictly increasing index chains
    /// `(A^-1)_ij = sum_r (-1)^r sum_{i=k_0<...<k_r=j} prod a_{k_l k_{l+1}} / prod a_{k_l k_l}`.
    ///
    /// Exponential in the index distance; intended as an independent
    /// oracle on small matrices.
    pub fn neumann_inverse_upper_triangular(&self) -> Result<ComplexMatrix> {
        let n = self.n;
        let prec = self.data[0].prec();
        for j in 0..n {
            if self[(j, j)].is_zero() {
                return Err(Error::Domain(format!(
                    "triangular matrix has zero diagonal at {j}"
                )));
            }
        }
        let mut inv = ComplexMatrix::zeros(n, prec);
        for i in 0..n {
            for j in i..n {
                inv[(i, j)] = self.chain_sum(i, j);
            }
        }
        Ok(inv)
    }

    fn chain_sum(&self, i: usize, j: usize) -> Complex {
        let prec = self.data[0].prec();
        if i == j {
            return self[(i, i)].inv();
        }
        // depth-first over chains i = k_0 < k_1 < ... < k_r = j
        fn rec(m: &ComplexMatrix, cur: usize, j: usize, partial: Complex, acc: &mut Complex) {
            if cur == j {
                *acc += &(&partial / &m[(j, j)]);
                return;
            }
            for next in cur + 1..=j {
                if m[(cur, next)].is_zero() {
                    continue;
                }
                let step = &(&partial * &m[(cur, next)]) / &m[(cur, cur)];
                rec(m, next, j, -&step, acc);
            }
        }
        let mut acc = Complex::zero(prec);
        // the leading (-1)^r sign is carried by negating at each step;
        // start from +1 and let the first hop introduce the first -1
        let one = Complex::one(prec);
        for next in i + 1..=j {
            if self[(i, next)].is_zero() {
                continue;
            }
            let step = &(&one * &self[(i, next)]) / &self[(i, i)];
            rec(self, next, j, -&step, &mut acc);
        }
        acc
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }
}
