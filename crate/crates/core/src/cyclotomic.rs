//! Exact arithmetic in prime-power cyclotomic fields `Q(ζ_{p^n})`.
//!
//! An element of level `n` is a coefficient vector of length `φ(p^n)` in
//! the power basis `1, ζ, …, ζ^{φ-1}` of `ζ = ζ_{p^n} = e^{2πi/p^n}`,
//! reduced modulo `Φ_{p^n}(x) = Σ_{j<p} x^{j·p^{n-1}}`. The reduction is
//! canonical, so equal field elements have identical vectors once brought
//! to a common level.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::real::{Complex, Real};
use crate::scalar::{integral_form, vp_int, RationalScalar, Scalar, Valuation};

/// `p^e` as a `usize`.
pub fn ipow(p: u32, e: u32) -> usize {
    (p as usize).pow(e)
}

/// Number of roots of unity at `level`, i.e. `p^level`.
pub fn order(p: u32, level: u32) -> usize {
    ipow(p, level)
}

/// Degree `φ(p^level)` of `Q(ζ_{p^level})` (1 at level 0).
pub fn degree(p: u32, level: u32) -> usize {
    if level == 0 {
        1
    } else {
        ipow(p, level) - ipow(p, level - 1)
    }
}

/// Reduce a vector of length `p^level` (a residue mod `x^{p^level} − 1`)
/// to the canonical basis.
fn reduce_cyclic<Q: Scalar>(p: u32, level: u32, mut buf: Vec<Q>) -> Vec<Q> {
    if level == 0 {
        debug_assert_eq!(buf.len(), 1);
        return buf;
    }
    let s = ipow(p, level - 1);
    let phi = degree(p, level);
    for r in 0..s {
        let c = std::mem::replace(&mut buf[phi + r], Q::zero());
        if c.is_zero() {
            continue;
        }
        // x^{(p-1)s + r} = −Σ_{j<p-1} x^{js + r}
        for j in 0..(p as usize - 1) {
            buf[j * s + r].sub_ref(&c);
        }
    }
    buf.truncate(phi);
    buf
}

/// An element of `Q(ζ_{p^level})` with coefficients in `Q`.
#[derive(Clone, Debug)]
pub struct Cyclotomic<Q> {
    prime: u32,
    level: u32,
    coeffs: Vec<Q>,
}

impl<Q: Scalar> Cyclotomic<Q> {
    pub fn zero(p: u32, level: u32) -> Self {
        Cyclotomic { prime: p, level, coeffs: vec![Q::zero(); degree(p, level)] }
    }

    pub fn one(p: u32, level: u32) -> Self {
        Self::from_scalar(p, level, Q::one())
    }

    pub fn from_scalar(p: u32, level: u32, q: Q) -> Self {
        let mut x = Self::zero(p, level);
        x.coeffs[0] = q;
        x
    }

    pub fn from_i64(p: u32, level: u32, n: i64) -> Self {
        Self::from_scalar(p, level, Q::from_i64(n))
    }

    /// Takes a canonical coefficient vector of length `φ(p^level)`.
    pub fn from_coeffs(p: u32, level: u32, coeffs: Vec<Q>) -> Result<Self> {
        let expected = degree(p, level);
        if coeffs.len() != expected {
            return Err(Error::BadLength { got: coeffs.len(), expected });
        }
        Ok(Cyclotomic { prime: p, level, coeffs })
    }

    /// Takes any residue mod `x^{p^level} − 1` and reduces it.
    pub fn from_cyclic(p: u32, level: u32, buf: Vec<Q>) -> Result<Self> {
        let expected = order(p, level);
        if buf.len() != expected {
            return Err(Error::BadLength { got: buf.len(), expected });
        }
        Ok(Cyclotomic { prime: p, level, coeffs: reduce_cyclic(p, level, buf) })
    }

    /// `ζ_{p^level}^k` for any integer `k`.
    pub fn zeta_power(p: u32, level: u32, k: i64) -> Self {
        let n = order(p, level);
        let mut buf = vec![Q::zero(); n];
        buf[k.rem_euclid(n as i64) as usize] = Q::one();
        Cyclotomic { prime: p, level, coeffs: reduce_cyclic(p, level, buf) }
    }

    /// `ζ_{p^level}^k − 1`.
    pub fn zeta_minus_one(p: u32, level: u32, k: i64) -> Self {
        Self::zeta_power(p, level, k) - Self::one(p, level)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Q> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational value if the element lies in `Q`.
    pub fn as_scalar(&self) -> Option<&Q> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// Image under `ζ_{p^n} ↦ ζ_{p^{n'}}^{p^{n'−n}}`.
    pub fn embed_to_level(&self, new_level: u32) -> Result<Self> {
        if new_level < self.level {
            return Err(Error::LevelMismatch { from: self.level, to: new_level });
        }
        Ok(self.embed_unchecked(new_level))
    }

    fn embed_unchecked(&self, new_level: u32) -> Self {
        if new_level == self.level {
            return self.clone();
        }
        let stride = ipow(self.prime, new_level - self.level);
        let mut coeffs = vec![Q::zero(); degree(self.prime, new_level)];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[k * stride] = c.clone();
            }
        }
        Cyclotomic { prime: self.prime, level: new_level, coeffs }
    }

    /// Both operands at their common level.
    fn aligned(&self, other: &Self) -> (Self, Self) {
        assert_eq!(self.prime, other.prime, "cyclotomic prime mismatch");
        let l = self.level.max(other.level);
        (self.embed_unchecked(l), other.embed_unchecked(l))
    }

    /// The element of the level just below, if it lies there.
    pub fn descend(&self) -> Option<Self> {
        if self.level == 0 {
            return None;
        }
        let p = self.prime as usize;
        let lower = self.level - 1;
        let mut coeffs = vec![Q::zero(); degree(self.prime, lower)];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if lower == 0 {
                if k != 0 {
                    return None;
                }
                coeffs[0] = c.clone();
            } else {
                if k % p != 0 {
                    return None;
                }
                coeffs[k / p] = c.clone();
            }
        }
        Some(Cyclotomic { prime: self.prime, level: lower, coeffs })
    }

    /// The same element at the smallest level containing it.
    pub fn normalized(&self) -> Self {
        let mut x = self.clone();
        while let Some(y) = x.descend() {
            x = y;
        }
        x
    }

    /// Image under `ζ ↦ ζ^a`.
    pub fn galois_conjugate(&self, a: i64) -> Result<Self> {
        if a.rem_euclid(self.prime as i64) == 0 {
            return Err(Error::NotCoprime(a, self.prime as u64));
        }
        Ok(self.galois_unchecked(a))
    }

    fn galois_unchecked(&self, a: i64) -> Self {
        let n = order(self.prime, self.level);
        let a = a.rem_euclid(n as i64) as usize;
        let mut buf = vec![Q::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                buf[(k * a) % n] = c.clone();
            }
        }
        Cyclotomic { prime: self.prime, level: self.level, coeffs: reduce_cyclic(self.prime, self.level, buf) }
    }

    /// Complex conjugate `σ_{−1}`.
    pub fn conj(&self) -> Self {
        self.galois_unchecked(-1)
    }

    /// Multiplication by `ζ_{p^level}^k` (a rotation followed by reduction).
    pub fn mul_zeta_power(&self, k: i64) -> Self {
        let n = order(self.prime, self.level);
        let shift = k.rem_euclid(n as i64) as usize;
        let mut buf = vec![Q::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                buf[(i + shift) % n] = c.clone();
            }
        }
        Cyclotomic { prime: self.prime, level: self.level, coeffs: reduce_cyclic(self.prime, self.level, buf) }
    }

    pub fn scale(&self, q: &Q) -> Self {
        Cyclotomic {
            prime: self.prime,
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c.clone() * q.clone()).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prime, self.level);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exponents `a` of the nontrivial automorphisms fixing the level below.
    fn relative_galois_group(&self) -> Vec<i64> {
        let p = self.prime as i64;
        if self.level <= 1 {
            (2..p).collect()
        } else {
            let s = ipow(self.prime, self.level - 1) as i64;
            (1..p).map(|k| 1 + k * s).collect()
        }
    }

    /// `N_{K_n/K_{n−1}}(x)` as an element of the level below (level 0
    /// stays put).
    pub fn relative_norm(&self) -> Self {
        if self.level == 0 {
            return self.clone();
        }
        let mut y = self.clone();
        for a in self.relative_galois_group() {
            y = &y * &self.galois_unchecked(a);
        }
        y.descend().expect("relative norm lies in the subfield")
    }

    /// Absolute norm down to `Q`.
    pub fn norm(&self) -> Q {
        let mut x = self.clone();
        while x.level > 0 {
            x = x.relative_norm();
        }
        x.coeffs[0].clone()
    }

    /// Multiplicative inverse by the tower of relative norms.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if degree(self.prime, self.level) == 1 {
            let c = Q::one() / self.coeffs[0].clone();
            return Ok(Cyclotomic { prime: self.prime, level: self.level, coeffs: vec![c] });
        }
        let mut cofactor = Self::one(self.prime, self.level);
        for a in self.relative_galois_group() {
            cofactor = &cofactor * &self.galois_unchecked(a);
        }
        let lower = (self * &cofactor).descend().expect("relative norm lies in the subfield");
        let lower_inv = lower.inverse()?.embed_unchecked(self.level);
        Ok(&cofactor * &lower_inv)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(self * &other.inverse()?)
    }

    /// Complex value under `ζ_{p^n} ↦ e^{2πi/p^n}`.
    pub fn to_complex<R: Real>(&self, prec: R::Precision) -> Complex<R>
    where
        Q: RationalScalar,
    {
        let n = order(self.prime, self.level) as u64;
        let mut acc = Complex::<R>::zero(prec);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = Complex::<R>::root_of_unity(k as i64, n, prec);
            acc = acc + w.scale(&R::from_rational(&c.to_big_rational(), prec));
        }
        acc
    }

    /// Maps every coefficient through `f` (e.g. between scalar types).
    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&Q) -> T) -> Cyclotomic<T> {
        Cyclotomic { prime: self.prime, level: self.level, coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl<Q: RationalScalar> Cyclotomic<Q> {
    /// The p-adic valuation normalized by `v_p(p) = 1`.
    ///
    /// After clearing the content, the primitive integral part `x'` is
    /// expanded in `π = ζ − 1` modulo `p`: `x' ≡ Σ d_j π^j` with `j < φ`.
    /// The terms have pairwise distinct fractional valuations `j/φ`, so
    /// `v(x') = j₀/φ` for the least `j₀` with `p ∤ d_j`.
    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            return Valuation::Infinite;
        }
        let p = self.prime;
        let rationals: Vec<BigRational> = self.coeffs.iter().map(|c| c.to_big_rational()).collect();
        let (nums, den) = integral_form(&rationals);
        let content = nums.iter().fold(BigInt::zero(), |g, n| g.gcd(n));
        let base = vp_int(&content, p) as i64 - vp_int(&den, p) as i64;
        if self.level == 0 {
            return Valuation::integer(base);
        }
        let pb = BigInt::from(p);
        let size = order(p, self.level);
        let mut residues = vec![0u32; size];
        for (k, n) in nums.iter().enumerate() {
            if !n.is_zero() {
                let r = (n / &content).mod_floor(&pb);
                residues[k] = r.try_into().expect("residue fits u32");
            }
        }
        let shifted = taylor_shift_mod_p(&residues, p);
        let j0 = shifted.iter().position(|&d| d != 0).expect("primitive element has a unit digit");
        let phi = degree(p, self.level) as i64;
        Valuation::Finite(BigRational::from_integer(base.into()) + BigRational::new((j0 as i64).into(), phi.into()))
    }

    /// Independent route: `v_p(N(x)) / φ(p^n)` through the absolute norm.
    pub fn valuation_via_norm(&self) -> Valuation {
        if self.is_zero() {
            return Valuation::Infinite;
        }
        let n = self.norm().to_big_rational();
        let v = crate::scalar::vp_rational(&n, self.prime);
        Valuation::ratio(v, degree(self.prime, self.level) as i64)
    }

    /// Converts the coefficients to [`BigRational`].
    pub fn to_big(&self) -> Cyclotomic<BigRational> {
        self.map_coeffs(|c| c.to_big_rational())
    }
}

/// Coefficients of `c(1 + y)` modulo `p`, for `c` of length a power of `p`.
///
/// Uses `(1+y)^p ≡ 1 + y^p (mod p)` to recurse on the `p` interleaved
/// sub-polynomials, so the cost is `O(p·n·log_p n)` rather than `O(n²)`.
pub fn taylor_shift_mod_p(c: &[u32], p: u32) -> Vec<u32> {
    let n = c.len();
    let pu = p as usize;
    if n <= pu {
        let mut out = vec![0u32; n];
        for &ck in c.iter().rev() {
            for i in (1..n).rev() {
                out[i] = (out[i] + out[i - 1]) % p;
            }
            out[0] = (out[0] + ck) % p;
        }
        return out;
    }
    debug_assert_eq!(n % pu, 0, "length must be a power of p");
    let m = n / pu;
    let binom = binomial_row_mod_p(p);
    let mut out = vec![0u32; n];
    let mut sub = vec![0u32; m];
    for r in 0..pu {
        for (t, s) in sub.iter_mut().enumerate() {
            *s = c[r + pu * t];
        }
        let shifted = taylor_shift_mod_p(&sub, p);
        for (t, &s) in shifted.iter().enumerate() {
            if s == 0 {
                continue;
            }
            for i in 0..=r {
                let k = pu * t + i;
                out[k] = (out[k] + s * binom[r][i]) % p;
            }
        }
    }
    out
}

/// Pascal's triangle mod `p` for rows `0..p`.
fn binomial_row_mod_p(p: u32) -> Vec<Vec<u32>> {
    let pu = p as usize;
    let mut rows = vec![vec![0u32; pu]; pu];
    for r in 0..pu {
        rows[r][0] = 1;
        for i in 1..=r {
            rows[r][i] = (rows[r - 1][i - 1] + if i < r { rows[r - 1][i] } else { 0 }) % p;
        }
    }
    rows
}

/// Binary operation selector for [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked field arithmetic with promotion to the larger level.
pub fn arith<Q: Scalar>(a: &Cyclotomic<Q>, b: &Cyclotomic<Q>, op: ArithOp) -> Result<Cyclotomic<Q>> {
    if a.prime != b.prime {
        return Err(Error::PrimeMismatch(a.prime, b.prime));
    }
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

impl<Q: Scalar> PartialEq for Cyclotomic<Q> {
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime {
            return false;
        }
        let (a, b) = self.aligned(other);
        a.coeffs == b.coeffs
    }
}

impl<Q: Scalar + Eq> Eq for Cyclotomic<Q> {}

impl<'a, Q: Scalar> Add<&'a Cyclotomic<Q>> for &'a Cyclotomic<Q> {
    type Output = Cyclotomic<Q>;
    fn add(self, rhs: &Cyclotomic<Q>) -> Cyclotomic<Q> {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl<'a, Q: Scalar> Sub<&'a Cyclotomic<Q>> for &'a Cyclotomic<Q> {
    type Output = Cyclotomic<Q>;
    fn sub(self, rhs: &Cyclotomic<Q>) -> Cyclotomic<Q> {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl<'a, Q: Scalar> Mul<&'a Cyclotomic<Q>> for &'a Cyclotomic<Q> {
    type Output = Cyclotomic<Q>;
    fn mul(self, rhs: &Cyclotomic<Q>) -> Cyclotomic<Q> {
        assert_eq!(self.prime, rhs.prime, "cyclotomic prime mismatch");
        let level = self.level.max(rhs.level);
        let p = self.prime;
        // Fast paths: scalars.
        if let Some(c) = rhs.as_scalar() {
            return self.scale(c).embed_unchecked(level);
        }
        if let Some(c) = self.as_scalar() {
            return rhs.scale(c).embed_unchecked(level);
        }
        let (a, b) = (self.embed_unchecked(level), rhs.embed_unchecked(level));
        let buf = Q::cyclic_product(&a.coeffs, &b.coeffs, order(p, level));
        Cyclotomic { prime: p, level, coeffs: reduce_cyclic(p, level, buf) }
    }
}

impl<Q: Scalar> Neg for &Cyclotomic<Q> {
    type Output = Cyclotomic<Q>;
    fn neg(self) -> Cyclotomic<Q> {
        Cyclotomic {
            prime: self.prime,
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl<Q: Scalar> $tr for Cyclotomic<Q> {
            type Output = Cyclotomic<Q>;
            fn $m(self, rhs: Cyclotomic<Q>) -> Cyclotomic<Q> {
                (&self).$m(&rhs)
            }
        }
        impl<'a, Q: Scalar> $tr<&'a Cyclotomic<Q>> for Cyclotomic<Q> {
            type Output = Cyclotomic<Q>;
            fn $m(self, rhs: &Cyclotomic<Q>) -> Cyclotomic<Q> {
                (&self).$m(rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl<Q: Scalar> Neg for Cyclotomic<Q> {
    type Output = Cyclotomic<Q>;
    fn neg(self) -> Cyclotomic<Q> {
        -&self
    }
}

impl<Q: Scalar> Cyclotomic<Q> {
    /// `self += rhs` without materializing the embedding of `rhs`.
    pub fn add_assign_ref(&mut self, rhs: &Cyclotomic<Q>) {
        self.combine(rhs, false);
    }

    pub fn sub_assign_ref(&mut self, rhs: &Cyclotomic<Q>) {
        self.combine(rhs, true);
    }

    fn combine(&mut self, rhs: &Cyclotomic<Q>, negate: bool) {
        assert_eq!(self.prime, rhs.prime, "cyclotomic prime mismatch");
        if rhs.level > self.level {
            *self = self.embed_unchecked(rhs.level);
        }
        let stride = ipow(self.prime, self.level - rhs.level);
        for (k, c) in rhs.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let slot = &mut self.coeffs[k * stride];
            if negate {
                slot.sub_ref(c);
            } else {
                slot.add_ref(c);
            }
        }
    }
}

impl<Q: Scalar> fmt::Display for Cyclotomic<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = order(self.prime, self.level);
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*z{n}")?,
                _ => write!(f, "({c})*z{n}^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Accumulates `Σ q_j·ζ^{k_j}` in the unreduced cyclic representation and
/// reduces once at the end.
#[derive(Clone, Debug)]
pub struct CyclicAccumulator<Q> {
    prime: u32,
    level: u32,
    buf: Vec<Q>,
}

impl<Q: Scalar> CyclicAccumulator<Q> {
    pub fn new(p: u32, level: u32) -> Self {
        CyclicAccumulator { prime: p, level, buf: vec![Q::zero(); order(p, level)] }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Adds `q·ζ_{p^level}^k`.
    pub fn add_scalar_at(&mut self, q: &Q, k: i64) {
        if q.is_zero() {
            return;
        }
        let n = self.buf.len() as i64;
        let i = k.rem_euclid(n) as usize;
        self.buf[i] = self.buf[i].clone() + q.clone();
    }

    /// Adds `x·ζ_{p^level}^k`; `x` may live at any level up to ours.
    pub fn add_rotated(&mut self, x: &Cyclotomic<Q>, k: i64) {
        assert_eq!(x.prime, self.prime, "cyclotomic prime mismatch");
        assert!(x.level <= self.level, "accumulator level too small");
        let n = self.buf.len();
        let stride = ipow(self.prime, self.level - x.level);
        let shift = k.rem_euclid(n as i64) as usize;
        for (j, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let i = (j * stride + shift) % n;
            self.buf[i] = self.buf[i].clone() + c.clone();
        }
    }

    pub fn finish(self) -> Cyclotomic<Q> {
        Cyclotomic { prime: self.prime, level: self.level, coeffs: reduce_cyclic(self.prime, self.level, self.buf) }
    }
}

#[derive(Serialize, Deserialize)]
struct CyclotomicRepr {
    prime: u32,
    level: u32,
    coeffs: Vec<String>,
}

impl<Q: Scalar> Serialize for Cyclotomic<Q> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CyclotomicRepr {
            prime: self.prime,
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de, Q: Scalar> Deserialize<'de> for Cyclotomic<Q> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CyclotomicRepr::deserialize(d)?;
        let coeffs = r
            .coeffs
            .iter()
            .map(|s| s.parse::<Q>().map_err(|_| serde::de::Error::custom(format!("bad coefficient `{s}`"))))
            .collect::<std::result::Result<Vec<Q>, D::Error>>()?;
        Cyclotomic::from_coeffs(r.prime, r.level, coeffs).map_err(serde::de::Error::custom)
    }
}

impl<Q: Scalar> Cyclotomic<Q> {
    /// Coefficients as strings, for the table formats.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

/// Convenience constructor for exact elements.
pub fn rational(p: u32, level: u32, n: i64, d: i64) -> Cyclotomic<BigRational> {
    Cyclotomic::from_scalar(p, level, BigRational::new(n.into(), d.into()))
}

impl Cyclotomic<BigRational> {
    /// True when every coefficient is `p`-integral.
    pub fn is_p_integral(&self) -> bool {
        let pb = BigInt::from(self.prime);
        self.coeffs.iter().all(|c| !c.denom().is_multiple_of(&pb))
    }

    pub fn is_one(&self) -> bool {
        self.as_scalar().is_some_and(|c| c.is_one())
    }
}
