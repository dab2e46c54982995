//! Newton data of truncated Amice polynomials and synthetic measures with
//! planted `(μ, λ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{degree, ipow, Cyclotomic};
use crate::digit::{horizontalize, AmicePolynomial};
use crate::error::{Error, Result};
use crate::measure::{GroupShape, Measure};
use crate::scalar::{RationalScalar, Scalar, Valuation};

/// `μ` is on the `v_p` scale (the uniformizer count divided by `e`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeierstrassInvariants {
    pub mu: Valuation,
    pub lambda: u64,
    pub certified: bool,
    pub note: String,
}

impl WeierstrassInvariants {
    /// `μ` counted in powers of a uniformizer of valuation `1/e`.
    pub fn mu_in_uniformizers(&self, e: u32) -> Valuation {
        match &self.mu {
            Valuation::Finite(v) => Valuation::Finite(v * num_bigint::BigInt::from(e)),
            Valuation::Infinite => Valuation::Infinite,
        }
    }
}

/// Smallest coefficient valuation and the first index attaining it;
/// `(∞, 0)` for the zero polynomial.
pub fn newton_data<Q: RationalScalar>(f: &AmicePolynomial<Q>) -> (Valuation, u64) {
    let mut best = (Valuation::Infinite, 0u64);
    for (k, c) in f.coeffs().iter().enumerate() {
        let v = c.valuation();
        if v < best.0 {
            best = (v, k as u64);
        }
    }
    best
}

/// Invariants of a polynomial known to be exact (not a truncation).
pub fn weierstrass_invariants_exact<Q: RationalScalar>(f: &AmicePolynomial<Q>) -> WeierstrassInvariants {
    let (mu, lambda) = newton_data(f);
    let note = if mu.is_infinite() { "exact zero" } else { "exact polynomial" };
    WeierstrassInvariants { mu, lambda, certified: true, note: note.into() }
}

/// Invariants read off a tower of truncations at increasing `M`.
///
/// Certified when the top two levels agree, `λ < p^{M_low}`, and the
/// minimum survives the truncation ideal: every coefficient before `λ`
/// is strictly above `μ` and the measure is divisible by `p^{⌊μ⌋}`, so
/// the ideal only moves coefficients by terms of valuation `≥ ⌊μ⌋ + 1 > μ`.
pub fn weierstrass_invariants<Q: RationalScalar>(levels: &[AmicePolynomial<Q>]) -> Result<WeierstrassInvariants> {
    if levels.len() < 2 {
        return Err(Error::IncompatibleLevels("at least two truncation levels are needed".into()));
    }
    for w in levels.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        if lo.prime() != hi.prime() {
            return Err(Error::PrimeMismatch(lo.prime(), hi.prime()));
        }
        if hi.truncation() <= lo.truncation() {
            return Err(Error::IncompatibleLevels("truncation levels must increase".into()));
        }
        if hi.reduce_to(lo.truncation())?.coeffs() != lo.coeffs() {
            return Err(Error::IncompatibleLevels(format!(
                "level {} does not reduce to level {}",
                hi.truncation(),
                lo.truncation()
            )));
        }
    }
    let lo = &levels[levels.len() - 2];
    let hi = &levels[levels.len() - 1];
    let (mu_lo, lambda_lo) = newton_data(lo);
    let (mu, lambda) = newton_data(hi);
    if mu.is_infinite() {
        return Ok(WeierstrassInvariants {
            mu,
            lambda: 0,
            certified: false,
            note: "all truncations vanish; the full measure is not known to be zero".into(),
        });
    }
    let mut problems = Vec::new();
    if lambda >= ipow(lo.prime(), lo.truncation()) as u64 {
        problems.push(format!("lambda {lambda} is not below p^{}", lo.truncation()));
    }
    if (mu_lo.clone(), lambda_lo) != (mu.clone(), lambda) {
        problems.push(format!("levels disagree: ({mu_lo}, {lambda_lo}) vs ({mu}, {lambda})"));
    }
    let mu_value = mu.finite().expect("finite").clone();
    if mu_value < num_rational::BigRational::from_integer(0.into()) {
        problems.push(format!("non-integral coefficients (mu = {mu})"));
    } else {
        let floor = Valuation::Finite(mu_value.floor());
        let vertical = hi.to_vertical();
        if vertical.coeffs().iter().any(|c| c.valuation() < floor) {
            problems.push(format!("measure is not divisible by p^{floor}"));
        }
    }
    let certified = problems.is_empty();
    let note = if certified {
        let peeled = mu.finite().map(|v| v.floor().to_integer()).unwrap_or_default();
        if peeled > 0.into() {
            format!("two levels agree after peeling p^{peeled}")
        } else {
            "two levels agree".to_string()
        }
    } else {
        problems.join("; ")
    };
    Ok(WeierstrassInvariants { mu, lambda, certified, note })
}

/// An element of valuation `1/e` in a cyclotomic field: `p` for `e = 1`,
/// otherwise `(ζ_{p^k} − 1)^{φ(p^k)/e}` for the least `k` with `e | φ(p^k)`.
pub fn uniformizer<Q: Scalar>(p: u32, e: u32) -> Result<Cyclotomic<Q>> {
    if e == 0 {
        return Err(Error::InvalidInvariants("scale e must be at least 1".into()));
    }
    if e == 1 {
        return Ok(Cyclotomic::from_i64(p, 0, p as i64));
    }
    for k in 1..=12u32 {
        let phi = degree(p, k);
        if phi % e as usize == 0 {
            return Ok(Cyclotomic::zeta_minus_one(p, k, 1).pow((phi / e as usize) as u64));
        }
    }
    Err(Error::InvalidInvariants(format!("no small cyclotomic level has ramification divisible by {e}")))
}

/// `π^μ·(T^λ + Σ_{i<λ} π r_i T^i)·u(T)` with `u(0)` a unit, truncated below
/// `p^M`. `mu` counts powers of the uniformizer.
pub fn synthetic_polynomial<Q: Scalar>(
    p: u32,
    truncation: u32,
    mu: u32,
    lambda: u64,
    e: u32,
    seed: u64,
) -> Result<AmicePolynomial<Q>> {
    let size = ipow(p, truncation);
    if lambda as usize >= size {
        return Err(Error::InvalidInvariants(format!("lambda {lambda} must be below p^{truncation}")));
    }
    let pi = uniformizer::<Q>(p, e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = p as i64;
    let lambda = lambda as usize;

    let mut g: Vec<Cyclotomic<Q>> = (0..lambda).map(|_| pi.scale(&Q::from_i64(rng.gen_range(-bound..=bound)))).collect();
    g.push(Cyclotomic::one(p, 0));

    let u_len = size - lambda;
    let mut u = Vec::with_capacity(u_len);
    u.push(Cyclotomic::from_i64(p, 0, if p == 2 { 1 } else { rng.gen_range(1..p as i64) }));
    for _ in 1..u_len {
        u.push(Cyclotomic::from_i64(p, 0, rng.gen_range(-bound..=bound)));
    }

    let head = pi.pow(mu as u64);
    let mut coeffs = vec![Cyclotomic::zero(p, 0); size];
    for (i, gi) in g.iter().enumerate() {
        let gi = &head * gi;
        for (j, uj) in u.iter().enumerate() {
            if i + j < size && !uj.is_zero() {
                coeffs[i + j].add_assign_ref(&(&gi * uj));
            }
        }
    }
    AmicePolynomial::new(p, truncation, e, coeffs)
}

/// A measure on `shape` whose Amice polynomial has the planted invariants.
pub fn synthetic_measure<Q: Scalar>(shape: &GroupShape, mu: u32, lambda: u64, e: u32, seed: u64) -> Result<Measure<Q>> {
    let f = synthetic_polynomial::<Q>(shape.prime(), shape.total_exponent(), mu, lambda, e, seed)?;
    horizontalize(&f.to_vertical(), shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digit::{amice, verticalize};
    use num_rational::BigRational;

    type C = Cyclotomic<BigRational>;

    fn poly(p: u32, m: u32, c: &[i64]) -> AmicePolynomial<BigRational> {
        AmicePolynomial::from_partial(p, m, 1, c.iter().map(|&x| C::from_i64(p, 0, x)).collect()).unwrap()
    }

    #[test]
    fn newton_examples() {
        let one = weierstrass_invariants_exact(&poly(3, 2, &[1]));
        assert_eq!((one.mu, one.lambda), (Valuation::integer(0), 0));
        let d = weierstrass_invariants_exact(&poly(3, 2, &[0, 3, 1]));
        assert_eq!((d.mu, d.lambda), (Valuation::integer(0), 2));
        let z = weierstrass_invariants_exact(&poly(3, 2, &[]));
        assert_eq!((z.mu, z.lambda), (Valuation::Infinite, 0));
    }

    #[test]
    fn uniformizer_valuations() {
        for (p, e) in [(3u32, 1u32), (3, 2), (5, 2), (5, 4), (2, 2), (3, 3)] {
            assert_eq!(uniformizer::<BigRational>(p, e).unwrap().valuation(), Valuation::ratio(1, e as i64));
        }
    }

    #[test]
    fn planted_invariants_are_recovered() {
        let shape = GroupShape::uniform(3, 1, 3).unwrap();
        for (mu, lambda, e) in [(0u32, 0u64, 1u32), (1, 2, 1), (2, 3, 2), (1, 1, 2)] {
            let nu: Measure<BigRational> = synthetic_measure(&shape, mu, lambda, e, 7).unwrap();
            let hi = amice(&verticalize(&nu));
            let lo = hi.reduce_to(2).unwrap();
            let w = weierstrass_invariants(&[lo, hi]).unwrap();
            assert!(w.certified, "{mu} {lambda} {e}: {}", w.note);
            assert_eq!(w.mu, Valuation::ratio(mu as i64, e as i64));
            assert_eq!(w.lambda, lambda);
            assert_eq!(w.mu_in_uniformizers(e), Valuation::integer(mu as i64));
        }
    }

    #[test]
    fn level_checks() {
        let f = poly(3, 2, &[1, 2, 0, 1]);
        assert!(weierstrass_invariants(&[f.clone()]).is_err());
        let bad = poly(3, 1, &[5]);
        assert!(matches!(weierstrass_invariants(&[bad, f.clone()]), Err(Error::IncompatibleLevels(_))));
        let lo = f.reduce_to(1).unwrap();
        assert!(weierstrass_invariants(&[lo, f]).is_ok());
    }

    #[test]
    fn lambda_too_large() {
        assert!(synthetic_polynomial::<BigRational>(3, 1, 0, 3, 1, 0).is_err());
    }
}
