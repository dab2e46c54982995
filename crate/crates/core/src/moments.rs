//! Weighted moment sums, the moment identity, invariant fitting and the
//! Kato–Kolyvagin derivative criteria.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{degree, ipow, Cyclotomic};
use crate::digit::{amice, unit_weight_twisted, verticalize, RootOfUnity};
use crate::error::{Error, Result};
use crate::measure::{FactorMap, GroupShape, Measure};
use crate::scalar::{RationalScalar, Scalar, Valuation};
use crate::weierstrass::{weierstrass_invariants, WeierstrassInvariants};

/// Common exponent `m` of a shape `(m, …, m)`.
pub fn uniform_exponent(shape: &GroupShape) -> Result<u32> {
    let m = *shape
        .exponents()
        .first()
        .ok_or_else(|| Error::ShapeMismatch("moment sums need at least one factor".into()))?;
    if shape.exponents().iter().any(|&x| x != m) {
        return Err(Error::ShapeMismatch(format!("shape {:?} is not of the form (m, …, m)", shape.exponents())));
    }
    Ok(m)
}

fn check_last_character(p: u32, k0: u64) -> Result<()> {
    if k0 % p as u64 == 0 {
        return Err(Error::InvalidCharacter(format!("χ_0(1) = ζ^{k0} does not have full order")));
    }
    Ok(())
}

/// Pushforward onto the first `factors` factors.
pub fn truncate<Q: Scalar>(nu: &Measure<Q>, factors: usize) -> Result<Measure<Q>> {
    let shape = nu.shape();
    if factors == 0 || factors > shape.rank() {
        return Err(Error::IndexOutOfRange(format!("cannot keep {factors} of {} factors", shape.rank())));
    }
    if factors == shape.rank() {
        return Ok(nu.clone());
    }
    let maps: Vec<FactorMap> = shape
        .exponents()
        .iter()
        .enumerate()
        .map(|(i, &m)| if i < factors { FactorMap::Reduce(m) } else { FactorMap::Delete })
        .collect();
    nu.pushforward(&shape.prefix(factors), &maps)
}

/// Values `ν(χ_1, …, χ_n, χ_0)` for every `(χ_1, …, χ_n)`, row-major.
fn slice_at_last<Q: Scalar>(nu: &Measure<Q>, k0: u64) -> Vec<Cyclotomic<Q>> {
    let values = nu.transform();
    let q = nu.shape().factor_order(nu.shape().rank() - 1);
    values.into_iter().skip(k0 as usize % q).step_by(q).collect()
}

/// Weight of the `i`-th factor (1-based) among `n`:
/// `(ψ(p^{m(i−1)}) − 1)/(ψ(p^{m(i−1)})·χ̄_i(1) − 1)` with `ψ(1) = ζ_{p^{m(n+1)}}^{k0}`.
fn factor_weight<Q: Scalar>(p: u32, m: u32, n: usize, i: usize, k0: u64, k: u64) -> Result<Cyclotomic<Q>> {
    let j = m * (n as u32 + 2 - i as u32);
    unit_weight_twisted(p, j, k0 as i64, RootOfUnity::new(m, k as i64))
}

/// `p^{−mn} Σ_{χ_1..χ_n} ∏ u_{m,n−i}(χ_i)·ν(χ_1, …, χ_n, χ_0)` for `ν` on
/// `(m, …, m)` with `n + 1` factors and `χ_0(1) = ζ_{p^m}^{k0}`.
///
/// The sum is folded one factor at a time from the last, so each weight
/// multiplies a table that shrinks by `p^m` per step.
pub fn moment_sum<Q: Scalar>(nu: &Measure<Q>, k0: u64) -> Result<Cyclotomic<Q>> {
    let shape = nu.shape();
    let p = shape.prime();
    let m = uniform_exponent(shape)?;
    check_last_character(p, k0)?;
    let n = shape.rank() - 1;
    let q = ipow(p, m);
    let mut table = slice_at_last(nu, k0);
    for i in (1..=n).rev() {
        let weights: Vec<Cyclotomic<Q>> = (0..q as u64).map(|k| factor_weight(p, m, n, i, k0, k)).collect::<Result<_>>()?;
        table = table
            .chunks(q)
            .map(|row| {
                let mut acc = Cyclotomic::zero(p, 0);
                for (w, v) in weights.iter().zip(row) {
                    if !v.is_zero() {
                        acc.add_assign_ref(&(w * v));
                    }
                }
                acc
            })
            .collect();
    }
    debug_assert_eq!(table.len(), 1);
    let scale = Q::one() / Q::from_i64(ipow(p, m * n as u32) as i64);
    Ok(table.pop().expect("one entry").scale(&scale))
}

/// The same sum assembled term by term with the full weight product.
pub fn moment_sum_flat<Q: Scalar>(nu: &Measure<Q>, k0: u64) -> Result<Cyclotomic<Q>> {
    let shape = nu.shape();
    let p = shape.prime();
    let m = uniform_exponent(shape)?;
    check_last_character(p, k0)?;
    let n = shape.rank() - 1;
    let slice = slice_at_last(nu, k0);
    let front = shape.prefix(n);
    let mut acc = Cyclotomic::zero(p, 0);
    for (idx, chi) in front.elements().enumerate() {
        let mut w = Cyclotomic::one(p, 0);
        for (i, &k) in chi.iter().enumerate() {
            w = &w * &factor_weight(p, m, n, i + 1, k0, k)?;
        }
        acc.add_assign_ref(&(&w * &slice[idx]));
    }
    Ok(acc.scale(&(Q::one() / Q::from_i64(ipow(p, m * n as u32) as i64))))
}

/// Both sides of the moment identity.
#[derive(Clone, Debug)]
pub struct IdentityCheck<Q: Scalar> {
    pub moment: Cyclotomic<Q>,
    /// `f_ν(ψ(1) − 1)` from the Amice polynomial.
    pub amice_value: Cyclotomic<Q>,
    pub holds: bool,
}

/// `moment·(ψ(p^{mn}) − 1) = (ψ(1) − 1)·f_ν(ψ(1) − 1)`, i.e. the moment is
/// the unit prefactor `(ψ(1) − 1)/(ψ(p^{mn}) − 1)` times the Amice value.
pub fn identity_check<Q: Scalar>(nu: &Measure<Q>, k0: u64) -> Result<IdentityCheck<Q>> {
    let moment = moment_sum(nu, k0)?;
    let f = amice(&verticalize(nu));
    let p = nu.shape().prime();
    let m = uniform_exponent(nu.shape())?;
    let top = m * nu.shape().rank() as u32;
    let amice_value = f.evaluate_at_root(top, k0 as i64);
    let holds = identity_holds(&moment, &amice_value, p, m, nu.shape().rank(), k0);
    Ok(IdentityCheck { moment, amice_value, holds })
}

/// The cross-multiplied identity for given moment and Amice values.
pub fn identity_holds<Q: Scalar>(
    moment: &Cyclotomic<Q>,
    amice_value: &Cyclotomic<Q>,
    p: u32,
    m: u32,
    factors: usize,
    k0: u64,
) -> bool {
    let top = m * factors as u32;
    let psi_one = Cyclotomic::zeta_minus_one(p, top, k0 as i64);
    let psi_last = Cyclotomic::zeta_minus_one(p, m, k0 as i64);
    moment * &psi_last == &psi_one * amice_value
}

/// `μ − 1/φ(p^m) + (λ+1)/φ(p^{mK})` for a moment over `K` factors.
pub fn predicted_valuation(mu: &BigRational, lambda: u64, p: u32, m: u32, factors: usize) -> BigRational {
    let phi = |e: u32| BigRational::from_integer(BigInt::from(degree(p, e) as u64));
    mu - BigRational::one() / phi(m) + BigRational::from_integer(BigInt::from(lambda + 1)) / phi(m * factors as u32)
}

/// `(μ, λ)` solved from moment valuations at two factor counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantFit {
    pub mu: Valuation,
    /// Exact solution for `λ`, possibly non-integral outside the regime.
    pub lambda: Valuation,
    pub in_asymptotic_regime: bool,
    pub note: String,
}

impl InvariantFit {
    pub fn lambda_integer(&self) -> Option<u64> {
        let v = self.lambda.finite()?;
        (v.is_integer() && !v.is_negative()).then(|| v.to_integer().try_into().ok()).flatten()
    }

    pub fn mu_value(&self) -> Option<&BigRational> {
        self.mu.finite()
    }
}

/// Fits `v(K) = μ − 1/φ(p^m) + (λ+1)/φ(p^{mK})` through the first two
/// points; further points must reproduce the fit for the regime flag.
pub fn fit_invariants(points: &[(usize, Valuation)], p: u32, m: u32, e: u32) -> Result<InvariantFit> {
    if points.len() < 2 {
        return Err(Error::InvalidInvariants("need valuations at two levels".into()));
    }
    let finite: Vec<(usize, BigRational)> = points
        .iter()
        .map(|(k, v)| {
            v.finite()
                .cloned()
                .map(|x| (*k, x))
                .ok_or_else(|| Error::InvalidInvariants(format!("valuation at {k} factors is infinite")))
        })
        .collect::<Result<_>>()?;
    let (k1, v1) = &finite[0];
    let (k2, v2) = &finite[1];
    if k1 == k2 {
        return Err(Error::InvalidInvariants("levels must differ".into()));
    }
    let inv_phi = |k: usize| BigRational::new(BigInt::one(), BigInt::from(degree(p, m * k as u32) as u64));
    let lambda_plus_one = (v1 - v2) / (inv_phi(*k1) - inv_phi(*k2));
    let lambda = &lambda_plus_one - BigRational::one();
    let mu = v1 + BigRational::new(BigInt::one(), BigInt::from(degree(p, m) as u64)) - &lambda_plus_one * inv_phi(*k1);

    let mut problems = Vec::new();
    if !lambda.is_integer() || lambda.is_negative() {
        problems.push(format!("lambda = {lambda} is not a non-negative integer"));
    }
    let scaled = &mu * BigInt::from(e);
    if !scaled.is_integer() || mu.is_negative() {
        problems.push(format!("mu = {mu} is not in (1/{e})Z≥0"));
    }
    for (k, v) in &finite[2..] {
        let predicted = &mu - BigRational::new(BigInt::one(), BigInt::from(degree(p, m) as u64)) + &lambda_plus_one * inv_phi(*k);
        if &predicted != v {
            problems.push(format!("level {k} gives {v}, fit predicts {predicted}"));
        }
    }
    let in_regime = problems.is_empty();
    Ok(InvariantFit {
        mu: Valuation::Finite(mu),
        lambda: Valuation::Finite(lambda),
        in_asymptotic_regime: in_regime,
        note: if in_regime { "fit consistent".into() } else { problems.join("; ") },
    })
}

/// `D^r ν = Σ_{a_i ∈ {1..p}} (∏ a_i)·ν(fiber over (a_1 mod p, …))`.
///
/// Only `r ≤ 1` carries the congruence theory; larger `r` is computed but
/// should be treated as experimental.
pub fn kolyvagin_derivative<Q: Scalar>(nu: &Measure<Q>, r: usize) -> Result<Cyclotomic<Q>> {
    let shape = nu.shape();
    if r > shape.rank() || shape.exponents()[..r].iter().any(|&m| m != 1) {
        return Err(Error::ShapeMismatch(format!("the first {r} factors must have order p")));
    }
    let p = shape.prime() as u64;
    let mut total = Cyclotomic::zero(shape.prime(), 0);
    let head = shape.prefix(r);
    for reps in head.elements() {
        // residue 0 is represented by p
        let weight: i64 = reps.iter().map(|&a| if a == 0 { p as i64 } else { a as i64 }).product();
        let mass = nu.fiber_mass(&reps)?;
        total.add_assign_ref(&mass.scale(&Q::from_i64(weight)));
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    /// `f_ν(0) = ν(1)` exactly.
    pub constant_term: bool,
    /// `f'_ν(0) ≡ Dν mod p`.
    pub derivative: bool,
}

impl DerivativeCheck {
    pub fn passed(&self) -> bool {
        self.constant_term && self.derivative
    }
}

fn check_order_p(shape: &GroupShape) -> Result<()> {
    if shape.exponents().iter().any(|&m| m != 1) {
        return Err(Error::ShapeMismatch(format!("shape {:?} must have every exponent 1", shape.exponents())));
    }
    Ok(())
}

pub fn derivative_congruence_check<Q: RationalScalar>(nu: &Measure<Q>) -> Result<DerivativeCheck> {
    check_order_p(nu.shape())?;
    let f = amice(&verticalize(nu));
    let constant_term = f.constant_term() == &kolyvagin_derivative(nu, 0)?;
    let diff = &f.derivative_at_zero() - &kolyvagin_derivative(nu, 1)?;
    let derivative = diff.valuation() >= Valuation::integer(1);
    Ok(DerivativeCheck { constant_term, derivative })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitClass {
    /// `D⁰ν` is a unit: `μ = λ = 0`.
    MuZeroLambdaZero,
    /// `D⁰ν` is not a unit but `Dν` is: `μ = 0, λ = 1`.
    MuZeroLambdaOne,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitCriteria {
    pub d0_unit: bool,
    pub d1_unit: bool,
    pub class: UnitClass,
    pub invariants: Option<WeierstrassInvariants>,
    /// Agreement with the invariants when they are certified.
    pub agrees: Option<bool>,
}

pub fn unit_criteria<Q: RationalScalar>(nu: &Measure<Q>) -> Result<UnitCriteria> {
    check_order_p(nu.shape())?;
    let zero = Valuation::integer(0);
    let d0_unit = kolyvagin_derivative(nu, 0)?.valuation() == zero;
    let d1_unit = nu.shape().rank() >= 1 && kolyvagin_derivative(nu, 1)?.valuation() == zero;
    let class = if d0_unit {
        UnitClass::MuZeroLambdaZero
    } else if d1_unit {
        UnitClass::MuZeroLambdaOne
    } else {
        UnitClass::Indeterminate
    };
    let invariants = if nu.shape().rank() >= 2 {
        let hi = amice(&verticalize(nu));
        let lo = hi.reduce_to(hi.truncation() - 1)?;
        Some(weierstrass_invariants(&[lo, hi])?)
    } else {
        None
    };
    let agrees = invariants.as_ref().filter(|w| w.certified).map(|w| match class {
        UnitClass::MuZeroLambdaZero => w.mu == zero && w.lambda == 0,
        UnitClass::MuZeroLambdaOne => w.mu == zero && w.lambda == 1,
        UnitClass::Indeterminate => !(w.mu == zero && w.lambda <= 1),
    });
    Ok(UnitCriteria { d0_unit, d1_unit, class, invariants, agrees })
}

/// One level of a moment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// Number of factors `K` (characters on `K − 1` primes plus the last).
    pub factors: usize,
    pub exact_value: Cyclotomic<BigRational>,
    pub valuation: Valuation,
    pub predicted_valuation: Option<Valuation>,
    pub fitted_mu: Option<Valuation>,
    pub fitted_lambda: Option<Valuation>,
    pub in_asymptotic_regime: Option<bool>,
    pub identity_check: bool,
    pub conventions: BTreeMap<String, String>,
}

impl MomentReport {
    pub fn new(factors: usize, value: Cyclotomic<BigRational>, identity_check: bool) -> Self {
        let valuation = value.valuation();
        MomentReport {
            factors,
            exact_value: value,
            valuation,
            predicted_valuation: None,
            fitted_mu: None,
            fitted_lambda: None,
            in_asymptotic_regime: None,
            identity_check,
            conventions: BTreeMap::new(),
        }
    }

    /// Attaches a fit and the valuation it predicts at this level.
    pub fn with_fit(mut self, fit: &InvariantFit, p: u32, m: u32) -> Self {
        if let (Some(mu), Some(lambda)) = (fit.mu_value(), fit.lambda_integer()) {
            self.predicted_valuation = Some(Valuation::Finite(predicted_valuation(mu, lambda, p, m, self.factors)));
        }
        self.fitted_mu = Some(fit.mu.clone());
        self.fitted_lambda = Some(fit.lambda.clone());
        self.in_asymptotic_regime = Some(fit.in_asymptotic_regime);
        self
    }
}

/// True iff `ν` is the zero measure.
pub fn is_zero_measure<Q: Scalar>(nu: &Measure<Q>) -> bool {
    nu.coeffs().iter().all(|c| c.is_zero())
}
