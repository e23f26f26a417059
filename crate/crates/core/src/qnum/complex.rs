//! Arbitrary-precision complex numbers on top of MPFR reals.
//!
//! Only the operations the library actually needs are implemented: field
//! arithmetic, conjugation, absolute value, principal square root and
//! integer powers. Every operation is carried out at the precision of its
//! operands (results take the larger of the two), so values created from a
//! [`super::PrecisionContext`] stay at the context precision throughout.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Round;
use rug::ops::NegAssign;
use rug::Float;

/// A complex number with arbitrary-precision real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    /// Build from parts; the parts keep their own precision.
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    /// Zero at the given precision.
    pub fn zero(prec: u32) -> Self {
        Complex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    /// One at the given precision.
    pub fn one(prec: u32) -> Self {
        Complex {
            re: Float::with_val(prec, 1),
            im: Float::new(prec),
        }
    }

    /// Real integer value at the given precision.
    pub fn from_i64(prec: u32, v: i64) -> Self {
        Complex {
            re: Float::with_val(prec, v),
            im: Float::new(prec),
        }
    }

    /// Working precision (of the real part).
    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Complex {
        let mut im = self.im.clone();
        im.neg_assign();
        Complex {
            re: self.re.clone(),
            im,
        }
    }

    /// `re^2 + im^2`.
    pub fn norm_sq(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    /// `|z| = hypot(re, im)`.
    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    /// Multiplicative inverse. The caller guarantees `self != 0`.
    pub fn inv(&self) -> Complex {
        let p = self.prec();
        let d = self.norm_sq();
        let mut im = Float::with_val(p, &self.im / &d);
        im.neg_assign();
        Complex {
            re: Float::with_val(p, &self.re / &d),
            im,
        }
    }

    /// Principal square root (branch cut along the negative real axis,
    /// root with nonnegative real part).
    pub fn sqrt(&self) -> Complex {
        let p = self.prec();
        if self.im.is_zero() {
            if self.re.is_sign_negative() && !self.re.is_zero() {
                let mut m = Float::with_val(p, self.re.abs_ref());
                m.sqrt_mut();
                return Complex {
                    re: Float::new(p),
                    im: m,
                };
            }
            let mut r = self.re.clone();
            r.sqrt_mut();
            return Complex {
                re: r,
                im: Float::new(p),
            };
        }
        let r = self.abs();
        // w = sqrt((|z| + |re|)/2); the other component is |im|/(2w).
        let mut w = Float::with_val(p, &r + Float::with_val(p, self.re.abs_ref()));
        w /= 2u32;
        w.sqrt_mut();
        let mut other = Float::with_val(p, self.im.abs_ref());
        other /= Float::with_val(p, &w * 2u32);
        if self.re.is_sign_negative() {
            let re = other;
            let mut im = w;
            if self.im.is_sign_negative() {
                im.neg_assign();
            }
            Complex { re, im }
        } else {
            let re = w;
            let mut im = other;
            if self.im.is_sign_negative() {
                im.neg_assign();
            }
            Complex { re, im }
        }
    }

    /// Integer power by binary exponentiation; negative exponents invert.
    pub fn pow_i(&self, e: i64) -> Complex {
        let p = self.prec();
        if e == 0 {
            return Complex::one(p);
        }
        let (mut base, mut k) = if e < 0 {
            (self.inv(), e.unsigned_abs())
        } else {
            (self.clone(), e as u64)
        };
        let mut acc = Complex::one(p);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Scale by an integer.
    pub fn scale_i(&self, v: i64) -> Complex {
        let p = self.prec();
        Complex {
            re: Float::with_val(p, &self.re * v),
            im: Float::with_val(p, &self.im * v),
        }
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} {:+e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = self.re.to_string_radix(10, None);
        let im = self.im.to_string_radix(10, None);
        write!(f, "{re} {im}")
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        let mut out = self.clone();
        out.re.neg_assign();
        out.im.neg_assign();
        out
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

impl Add for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        Complex {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl Sub for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        Complex {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl Mul for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += Float::with_val(p, &self.im * &rhs.re);
        Complex { re, im }
    }
}

impl Div for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        let d = rhs.norm_sq();
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re += Float::with_val(p, &self.im * &rhs.im);
        re /= &d;
        let mut im = Float::with_val(p, &self.im * &rhs.re);
        im -= Float::with_val(p, &self.re * &rhs.im);
        im /= &d;
        Complex { re, im }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                (&self).$method(rhs)
            }
        }
        impl $trait<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Complex> for Complex {
    fn add_assign(&mut self, rhs: &Complex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Complex> for Complex {
    fn sub_assign(&mut self, rhs: &Complex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Complex> for Complex {
    fn mul_assign(&mut self, rhs: &Complex) {
        *self = &*self * rhs;
    }
}

/// Neumaier-compensated summation over [`Complex`] terms.
///
/// Terms must be fed in a fixed order for bit-reproducible results; the
/// compensation only reduces rounding loss, it does not make the sum
/// order-independent.
#[derive(Clone)]
pub struct CompensatedSum {
    sum: Complex,
    comp: Complex,
}

impl CompensatedSum {
    pub fn new(prec: u32) -> Self {
        CompensatedSum {
            sum: Complex::zero(prec),
            comp: Complex::zero(prec),
        }
    }

    pub fn add(&mut self, term: &Complex) {
        neumaier_step(&mut self.sum.re, &mut self.comp.re, &term.re);
        neumaier_step(&mut self.sum.im, &mut self.comp.im, &term.im);
    }

    /// Current compensated total.
    pub fn value(&self) -> Complex {
        &self.sum + &self.comp
    }
}

fn neumaier_step(sum: &mut Float, comp: &mut Float, x: &Float) {
    let p = sum.prec();
    let t = Float::with_val(p, &*sum + x);
    let lost = if sum.cmp_abs(x) != Some(Ordering::Less) {
        Float::with_val(p, &*sum - &t) + x
    } else {
        Float::with_val(p, x - &t) + &*sum
    };
    *comp += lost;
    sum.assign_round(t, Round::Nearest);
}

use rug::ops::AssignRound;
