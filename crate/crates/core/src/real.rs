//! Real and complex numerics shared by the period and symbol code.
//!
//! The analytic layer is generic over [`Real`]: `f64` carries the bulk
//! q-expansion work, [`MpFloat`] (arbitrary precision, backed by
//! `astro-float`) serves the high-precision cross-checks.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_rational::BigRational;
use num_traits::{Float, FloatConst};

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Working precision; `()` for hardware floats.
    type Precision: Copy + fmt::Debug + Send + Sync;

    fn precision_for_digits(digits: u32) -> Self::Precision;
    fn precision(&self) -> Self::Precision;
    /// Decimal digits actually carried at `prec`.
    fn digits(prec: Self::Precision) -> u32;

    fn from_f64(x: f64, prec: Self::Precision) -> Self;
    fn from_i64(x: i64, prec: Self::Precision) -> Self;
    fn from_rational(x: &BigRational, prec: Self::Precision) -> Self;
    fn pi(prec: Self::Precision) -> Self;

    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin_cos(&self) -> (Self, Self);
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;

    fn zero(prec: Self::Precision) -> Self {
        Self::from_i64(0, prec)
    }
    fn one(prec: Self::Precision) -> Self {
        Self::from_i64(1, prec)
    }
    /// `10^-digits(prec)`.
    fn epsilon(prec: Self::Precision) -> Self {
        let d = Self::digits(prec) as i32;
        let ten = Self::from_i64(10, prec);
        let mut x = Self::one(prec);
        for _ in 0..d {
            x = x / ten.clone();
        }
        x
    }
}

macro_rules! hardware_real {
    ($t:ty, $digits:expr) => {
        impl Real for $t {
            type Precision = ();

            fn precision_for_digits(_: u32) {}
            fn precision(&self) {}
            fn digits(_: ()) -> u32 {
                $digits
            }
            fn from_f64(x: f64, _: ()) -> Self {
                x as $t
            }
            fn from_i64(x: i64, _: ()) -> Self {
                x as $t
            }
            fn from_rational(x: &BigRational, _: ()) -> Self {
                crate::scalar::rational_to_f64(x) as $t
            }
            fn pi(_: ()) -> Self {
                <$t as FloatConst>::PI()
            }
            fn sqrt(&self) -> Self {
                Float::sqrt(*self)
            }
            fn exp(&self) -> Self {
                Float::exp(*self)
            }
            fn sin_cos(&self) -> (Self, Self) {
                Float::sin_cos(*self)
            }
            fn abs(&self) -> Self {
                Float::abs(*self)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

hardware_real!(f64, 15);
hardware_real!(f32, 6);

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Arbitrary-precision binary float with its working precision in bits.
#[derive(Clone)]
pub struct MpFloat {
    value: BigFloat,
    bits: usize,
}

impl MpFloat {
    pub fn new(value: BigFloat, bits: usize) -> Self {
        MpFloat { value, bits }
    }

    pub fn inner(&self) -> &BigFloat {
        &self.value
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(&self) -> String {
        with_consts(|cc| self.value.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }

    fn wrap(&self, value: BigFloat) -> MpFloat {
        MpFloat { value, bits: self.bits }
    }

    fn joint(&self, other: &MpFloat) -> usize {
        self.bits.max(other.bits)
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl PartialEq for MpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! mp_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for MpFloat {
            type Output = MpFloat;
            fn $method(self, rhs: MpFloat) -> MpFloat {
                let bits = self.joint(&rhs);
                MpFloat { value: self.value.$method(&rhs.value, bits, RM), bits }
            }
        }
    };
}

mp_binop!(Add, add);
mp_binop!(Sub, sub);
mp_binop!(Mul, mul);
mp_binop!(Div, div);

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat { value: self.value.neg(), bits: self.bits }
    }
}

fn bits_for_digits(digits: u32) -> usize {
    // a guard word on top
    ((digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64).div_ceil(64) * 64
}

impl Real for MpFloat {
    type Precision = usize;

    fn precision_for_digits(digits: u32) -> usize {
        bits_for_digits(digits)
    }
    fn precision(&self) -> usize {
        self.bits
    }
    fn digits(bits: usize) -> u32 {
        ((bits.saturating_sub(64)) as f64 / std::f64::consts::LOG2_10).floor() as u32
    }
    fn from_f64(x: f64, bits: usize) -> Self {
        MpFloat { value: BigFloat::from_f64(x, bits), bits }
    }
    fn from_i64(x: i64, bits: usize) -> Self {
        MpFloat { value: BigFloat::from_i64(x, bits), bits }
    }
    fn from_rational(x: &BigRational, bits: usize) -> Self {
        let (n, d) = with_consts(|cc| {
            (
                BigFloat::parse(&x.numer().to_string(), Radix::Dec, bits, RM, cc),
                BigFloat::parse(&x.denom().to_string(), Radix::Dec, bits, RM, cc),
            )
        });
        MpFloat { value: n.div(&d, bits, RM), bits }
    }
    fn pi(bits: usize) -> Self {
        MpFloat { value: with_consts(|cc| cc.pi(bits, RM)), bits }
    }
    fn sqrt(&self) -> Self {
        self.wrap(self.value.sqrt(self.bits, RM))
    }
    fn exp(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.exp(self.bits, RM, cc)))
    }
    fn sin_cos(&self) -> (Self, Self) {
        let (s, c) = with_consts(|cc| (self.value.sin(self.bits, RM, cc), self.value.cos(self.bits, RM, cc)));
        (self.wrap(s), self.wrap(c))
    }
    fn abs(&self) -> Self {
        self.wrap(self.value.abs())
    }
    fn to_f64(&self) -> f64 {
        // Mantissa words are normalized: value = 0.m × 2^e.
        let Some((words, _, sign, exp, _)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        if self.value.is_zero() {
            return 0.0;
        }
        let mut m = 0.0f64;
        for w in words.iter().rev().take(2) {
            m = m * 2f64.powi(64) + *w as f64;
        }
        let used = words.len().min(2) as i32;
        let v = m * 2f64.powi(exp - 64 * used);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }
}

/// Minimal complex number over a [`Real`] type.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex<R> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Complex<R> {
    pub fn new(re: R, im: R) -> Self {
        Complex { re, im }
    }

    pub fn real(re: R) -> Self {
        let z = R::zero(re.precision());
        Complex { re, im: z }
    }

    pub fn zero(prec: R::Precision) -> Self {
        Complex { re: R::zero(prec), im: R::zero(prec) }
    }

    pub fn one(prec: R::Precision) -> Self {
        Complex { re: R::one(prec), im: R::zero(prec) }
    }

    /// `e^{iθ}`.
    pub fn cis(theta: &R) -> Self {
        let (s, c) = theta.sin_cos();
        Complex { re: c, im: s }
    }

    /// `e^{2πi·num/den}`.
    pub fn root_of_unity(num: i64, den: u64, prec: R::Precision) -> Self {
        let k = num.rem_euclid(den as i64);
        let two_pi = R::pi(prec) * R::from_i64(2, prec);
        Self::cis(&(two_pi * R::from_i64(k, prec) / R::from_i64(den as i64, prec)))
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> R {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn abs(&self) -> R {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &R) -> Self {
        Complex { re: self.re.clone() * k.clone(), im: self.im.clone() * k.clone() }
    }

    pub fn exp(&self) -> Self {
        Self::cis(&self.im).scale(&self.re.exp())
    }

    /// Principal square root (branch cut on the negative real axis).
    pub fn sqrt(&self) -> Self {
        let prec = self.re.precision();
        let zero = R::zero(prec);
        let two = R::from_i64(2, prec);
        let r = self.abs();
        if r == zero {
            return Self::zero(prec);
        }
        let a = ((r.clone() + self.re.clone()) / two.clone()).sqrt();
        let b = ((r - self.re.clone()) / two).sqrt();
        if self.im < zero {
            Complex { re: a, im: -b }
        } else {
            Complex { re: a, im: b }
        }
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        Complex { re: self.re.clone() / n.clone(), im: -self.im.clone() / n }
    }
}

impl<R: Real> Add for Complex<R> {
    type Output = Complex<R>;
    fn add(self, o: Self) -> Self {
        Complex { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<R: Real> Sub for Complex<R> {
    type Output = Complex<R>;
    fn sub(self, o: Self) -> Self {
        Complex { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<R: Real> Mul for Complex<R> {
    type Output = Complex<R>;
    fn mul(self, o: Self) -> Self {
        Complex {
            re: self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone(),
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl<R: Real> Div for Complex<R> {
    type Output = Complex<R>;
    fn div(self, o: Self) -> Self {
        self * o.inv()
    }
}

impl<R: Real> Neg for Complex<R> {
    type Output = Complex<R>;
    fn neg(self) -> Self {
        Complex { re: -self.re, im: -self.im }
    }
}

/// Arithmetic–geometric mean with the "right" choice of square root at
/// every step, which converges to the lattice-generating value.
pub fn complex_agm<R: Real>(a: Complex<R>, b: Complex<R>) -> Complex<R> {
    let prec = a.re.precision();
    let two = R::from_i64(2, prec);
    let tol = R::epsilon(prec) * R::from_f64(1e-3, prec);
    let (mut a, mut b) = (a, b);
    for _ in 0..200 {
        let next_a = (a.clone() + b.clone()).scale(&(R::one(prec) / two.clone()));
        let mut g = (a.clone() * b.clone()).sqrt();
        if (next_a.clone() - g.clone()).norm_sqr() > (next_a.clone() + g.clone()).norm_sqr() {
            g = -g;
        }
        let diff = (next_a.clone() - g.clone()).abs();
        a = next_a;
        b = g;
        if diff <= tol.clone() * a.abs() {
            break;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mp_pi_and_conversion() {
        let bits = MpFloat::precision_for_digits(40);
        let pi = MpFloat::pi(bits);
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-15);
        let third = MpFloat::from_rational(&BigRational::new(1.into(), 3.into()), bits);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert!(MpFloat::digits(bits) >= 40);
    }

    #[test]
    fn mp_transcendentals_agree_with_f64() {
        let bits = MpFloat::precision_for_digits(30);
        let x = MpFloat::from_f64(0.7, bits);
        let (s, c) = x.sin_cos();
        assert!((s.to_f64() - 0.7f64.sin()).abs() < 1e-15);
        assert!((c.to_f64() - 0.7f64.cos()).abs() < 1e-15);
        assert!((x.exp().to_f64() - 0.7f64.exp()).abs() < 1e-15);
        assert!((x.sqrt().to_f64() - 0.7f64.sqrt()).abs() < 1e-15);
        assert!(((-x).abs().to_f64() - 0.7).abs() < 1e-16);
    }

    #[test]
    fn complex_sqrt_is_principal() {
        let z = Complex::new(-4.0f64, 0.0).sqrt();
        assert!((z.re).abs() < 1e-15 && (z.im - 2.0).abs() < 1e-15);
        let w = Complex::new(3.0f64, -4.0).sqrt();
        assert!((w.re - 2.0).abs() < 1e-15 && (w.im + 1.0).abs() < 1e-15);
    }

    #[test]
    fn agm_of_reals() {
        // AGM(1, √2) = 1.19814023473559220744...
        let g = complex_agm(Complex::real(1.0f64), Complex::real(2f64.sqrt()));
        assert!((g.re - 1.198_140_234_735_592_2).abs() < 1e-14);
    }
}
