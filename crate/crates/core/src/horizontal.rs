//! Finite levels of the horizontal `p`-adic `L`-function of an elliptic
//! curve, rebuilt from its interpolation values by Fourier inversion.
//!
//! The `i`-th factor `Z/p^{m_i}` is the `p`-part of `(Z/ℓ_i)^×` with the
//! chosen generator `b_i` sent to `1`, so the measure character with
//! exponent `k_i` is the Dirichlet character with `χ_i(b_i) = ζ_{p^{m_i}}^{k_i}`.

use std::collections::{BTreeSet, HashMap};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{is_prime, prime_factors, EllipticCurve, ModularSymbols};
use crate::cyclotomic::{ipow, CyclicAccumulator, Cyclotomic};
use crate::error::{Error, Result};
use crate::measure::{CharacterTuple, GroupShape, Measure};
use crate::real::{Complex, Real};
use crate::scalar::{vp_rational, Valuation};

type Cyc = Cyclotomic<BigRational>;

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

pub fn is_primitive_root(g: u64, ell: u64) -> bool {
    if g % ell == 0 {
        return false;
    }
    prime_factors(ell - 1).into_iter().all(|q| pow_mod(g, (ell - 1) / q, ell) != 1)
}

pub fn smallest_primitive_root(ell: u64) -> u64 {
    (1..ell).find(|&g| is_primitive_root(g, ell)).unwrap_or(1)
}

/// `x` with `g^x ≡ h (mod ℓ)` by baby-step giant-step.
pub fn discrete_log_bsgs(g: u64, h: u64, ell: u64) -> Option<u64> {
    let order = ell - 1;
    let m = (order as f64).sqrt().ceil() as u64 + 1;
    let mut baby = HashMap::with_capacity(m as usize);
    let mut cur = 1u64;
    for j in 0..m {
        baby.entry(cur).or_insert(j);
        cur = cur * g % ell;
    }
    let giant = pow_mod(g, order - m % order, ell);
    let mut gamma = h % ell;
    for i in 0..=m {
        if let Some(&j) = baby.get(&gamma) {
            return Some((i * m + j) % order);
        }
        gamma = gamma * giant % ell;
    }
    None
}

/// `log_g` of every residue mod `ℓ` (index 0 unused).
pub fn discrete_log_table(g: u64, ell: u64) -> Vec<u64> {
    let mut table = vec![0u64; ell as usize];
    let mut cur = 1u64;
    for x in 0..ell - 1 {
        table[cur as usize] = x;
        cur = cur * g % ell;
    }
    table
}

/// The primes `ℓ_1, …, ℓ_n`, their generators and the count `r` of
/// leading primes exempt from the Taylor–Wiles condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSequence {
    p: u32,
    primes: Vec<u64>,
    generators: Vec<u64>,
    r: usize,
    exponents: Vec<u32>,
    #[serde(skip)]
    logs: Vec<Vec<u64>>,
}

impl PrimeSequence {
    /// Validates the sequence against `curve`; missing generators default
    /// to the smallest primitive root.
    pub fn new(curve: &EllipticCurve, p: u32, primes: &[u64], generators: Option<&[u64]>, r: usize) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidSequence(msg));
        if !is_prime(p as u64) {
            return bad(format!("p = {p} is not prime"));
        }
        if primes.is_empty() {
            return bad("no primes given".into());
        }
        if r > primes.len() {
            return bad(format!("r = {r} exceeds the number of primes"));
        }
        let distinct: BTreeSet<u64> = primes.iter().copied().collect();
        if distinct.len() != primes.len() {
            return bad("primes must be distinct".into());
        }
        if let Some(g) = generators {
            if g.len() != primes.len() {
                return bad(format!("{} generators for {} primes", g.len(), primes.len()));
            }
        }
        let n_cond = curve.conductor();
        let mut gens = Vec::with_capacity(primes.len());
        let mut exponents = Vec::with_capacity(primes.len());
        for (i, &ell) in primes.iter().enumerate() {
            if !is_prime(ell) {
                return bad(format!("{ell} is not prime"));
            }
            if ell % p as u64 != 1 {
                return bad(format!("{ell} is not 1 mod {p}"));
            }
            if ell.gcd(&(n_cond * p as u64)) != 1 {
                return bad(format!("{ell} divides N·p"));
            }
            let b = generators.map(|g| g[i]).unwrap_or_else(|| smallest_primitive_root(ell));
            if !is_primitive_root(b, ell) {
                return bad(format!("{b} does not generate (Z/{ell})^×"));
            }
            if i >= r && !curve.is_taylor_wiles(p as u64, ell) {
                return bad(format!("{ell} is not a Taylor–Wiles prime for p = {p}"));
            }
            let mut m = 0;
            let mut t = ell - 1;
            while t % p as u64 == 0 {
                t /= p as u64;
                m += 1;
            }
            gens.push(b);
            exponents.push(m);
        }
        let logs = primes.iter().zip(&gens).map(|(&ell, &b)| discrete_log_table(b, ell)).collect();
        Ok(PrimeSequence { p, primes: primes.to_vec(), generators: gens, r, exponents, logs })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `m_i = v_p(ℓ_i − 1)`.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn shape(&self) -> GroupShape {
        GroupShape::new(self.p, self.exponents.clone()).expect("validated exponents")
    }

    /// The first `k` primes.
    pub fn prefix(&self, k: usize) -> Self {
        let k = k.min(self.len());
        PrimeSequence {
            p: self.p,
            primes: self.primes[..k].to_vec(),
            generators: self.generators[..k].to_vec(),
            r: self.r.min(k),
            exponents: self.exponents[..k].to_vec(),
            logs: self.logs[..k].to_vec(),
        }
    }

    /// Largest `m_i`; every character value lives in `Q(ζ_{p^level})`.
    pub fn level(&self) -> u32 {
        self.exponents.iter().copied().max().unwrap_or(0)
    }

    fn log(&self, i: usize, x: u64) -> u64 {
        self.logs[i][(x % self.primes[i]) as usize]
    }
}

/// A character of the `p`-parts, `χ_i(b_i) = ζ_{p^{m_i}}^{k_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirichletCharacterSpec {
    pub exponents: Vec<u64>,
}

impl DirichletCharacterSpec {
    pub fn new(seq: &PrimeSequence, exponents: Vec<u64>) -> Result<Self> {
        if exponents.len() != seq.len() {
            return Err(Error::InvalidCharacter(format!("{} exponents for {} primes", exponents.len(), seq.len())));
        }
        for (i, &k) in exponents.iter().enumerate() {
            if k >= ipow(seq.p, seq.exponents[i]) as u64 {
                return Err(Error::InvalidCharacter(format!("exponent {k} out of range at factor {i}")));
            }
        }
        Ok(DirichletCharacterSpec { exponents })
    }

    pub fn from_tuple(seq: &PrimeSequence, chi: &CharacterTuple) -> Result<Self> {
        Self::new(seq, chi.exponents().to_vec())
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    /// Indices in the support.
    pub fn support(&self) -> Vec<usize> {
        (0..self.exponents.len()).filter(|&i| self.exponents[i] != 0).collect()
    }

    /// `D_χ`, the product of the primes where `χ` is ramified.
    pub fn conductor(&self, seq: &PrimeSequence) -> u64 {
        self.support().iter().map(|&i| seq.primes[i]).product()
    }

    /// `e` with `χ(x) = ζ_{p^L}^e` restricted to the factors in `factors`
    /// (`None` if `x` is not a unit there).
    fn exponent_on(&self, seq: &PrimeSequence, factors: &[usize], x: u64) -> Option<i64> {
        let level = seq.level();
        let n = ipow(seq.p, level) as u64;
        let mut e = 0u64;
        for &i in factors {
            if x % seq.primes[i] == 0 {
                return None;
            }
            let k = self.exponents[i];
            let lift = ipow(seq.p, level - seq.exponents[i]) as u64;
            e = (e + (k * (seq.log(i, x) % n)) % n * lift) % n;
        }
        Some(e as i64)
    }

    /// `χ(x)` as an exponent of `ζ_{p^L}`, `L = seq.level()`.
    pub fn value_exponent(&self, seq: &PrimeSequence, x: u64) -> Option<i64> {
        self.exponent_on(seq, &self.support(), x)
    }

    /// `χ(x)` as a complex number.
    pub fn value_complex<R: Real>(&self, seq: &PrimeSequence, x: u64, prec: R::Precision) -> Option<Complex<R>> {
        self.value_exponent(seq, x).map(|e| Complex::root_of_unity(e, ipow(seq.p, seq.level()) as u64, prec))
    }
}

/// `a_ℓ − ζ^e − ζ^{−e}` in `Q(ζ_{p^level})`.
pub fn euler_factor(a_ell: i64, p: u32, level: u32, e: i64) -> Cyc {
    let mut acc = CyclicAccumulator::new(p, level);
    acc.add_scalar_at(&BigRational::from_integer(a_ell.into()), 0);
    acc.add_scalar_at(&BigRational::from_integer((-1).into()), e);
    acc.add_scalar_at(&BigRational::from_integer((-1).into()), -e);
    acc.finish()
}

/// `Σ_{a mod D} χ̄(a)·⟨a/D⟩⁺`, which is `τ(χ̄)L(E, χ, 1)/Ω⁺`.
pub fn birch_sum<R: Real>(symbols: &ModularSymbols<R>, seq: &PrimeSequence, chi: &DirichletCharacterSpec) -> Result<Cyc> {
    let d = chi.conductor(seq);
    let level = seq.level();
    let row = symbols.plus_row(d)?;
    let mut acc = CyclicAccumulator::new(seq.p, level);
    for (a, s) in row.iter().enumerate() {
        if let Some(e) = chi.value_exponent(seq, a as u64) {
            acc.add_scalar_at(s, -e);
        }
    }
    Ok(acc.finish())
}

/// Both Euler-product corrections of the interpolation formula:
/// `(∏_{i<r, ℓ_i ∤ D} factor_i, ∏_{i≥r, ℓ_i | D} factor_i)`.
pub fn euler_corrections(curve: &EllipticCurve, seq: &PrimeSequence, chi: &DirichletCharacterSpec) -> (Cyc, Cyc) {
    let level = seq.level();
    let support = chi.support();
    let mut multiply = Cyc::one(seq.p, level);
    let mut divide = Cyc::one(seq.p, level);
    for (i, &ell) in seq.primes.iter().enumerate() {
        let ramified = chi.exponents[i] != 0;
        let a = curve.a_prime(ell);
        if i < seq.r && !ramified {
            let e = chi.exponent_on(seq, &support, ell).expect("ℓ_i is prime to D");
            multiply = &multiply * &euler_factor(a, seq.p, level, e);
        } else if i >= seq.r && ramified {
            let rest: Vec<usize> = support.iter().copied().filter(|&j| j != i).collect();
            let e = chi.exponent_on(seq, &rest, ell).expect("ℓ_i is prime to D/ℓ_i");
            divide = &divide * &euler_factor(a, seq.p, level, e);
        }
    }
    (multiply, divide)
}

/// The modified twisted `L`-value `L^*(χ)`.
pub fn lstar<R: Real>(
    curve: &EllipticCurve,
    symbols: &ModularSymbols<R>,
    seq: &PrimeSequence,
    chi: &DirichletCharacterSpec,
) -> Result<Cyc> {
    if seq.p != 2 && chi.value_exponent(seq, seq.primes.iter().product::<u64>() - 1) != Some(0) {
        return Err(Error::InvalidCharacter("odd character for odd p".into()));
    }
    let birch = birch_sum(symbols, seq, chi)?;
    let (multiply, divide) = euler_corrections(curve, seq, chi);
    if divide.is_zero() {
        return Err(Error::DivisionByZero);
    }
    (&birch * &multiply).checked_div(&divide)
}

/// The measure on `(m_1, …, m_n)` whose value at every character is `L^*`.
pub fn build_measure<R: Real>(
    curve: &EllipticCurve,
    symbols: &ModularSymbols<R>,
    seq: &PrimeSequence,
) -> Result<Measure<BigRational>> {
    let shape = seq.shape();
    let characters: Vec<CharacterTuple> = shape.characters().collect();
    let mut conductors: Vec<u64> = characters
        .iter()
        .map(|c| DirichletCharacterSpec::from_tuple(seq, c).map(|s| s.conductor(seq)))
        .collect::<Result<_>>()?;
    conductors.sort_unstable();
    conductors.dedup();
    let mut needed = BTreeSet::new();
    for d in &conductors {
        for q in 1..=*d {
            if d % q == 0 {
                needed.insert(q);
            }
        }
    }
    symbols.prefetch(&needed.into_iter().collect::<Vec<_>>())?;
    let level = seq.level();
    let values: Vec<Cyc> = characters
        .par_iter()
        .map(|c| {
            let spec = DirichletCharacterSpec::from_tuple(seq, c)?;
            lstar(curve, symbols, seq, &spec)?.embed_to_level(level)
        })
        .collect::<Result<_>>()?;
    Measure::fourier_inverse_dense(&shape, values)
}

/// `true` iff deleting the last factor of `upper` gives `lower`.
pub fn level_compatibility_check(upper: &Measure<BigRational>, lower: &Measure<BigRational>) -> Result<bool> {
    let (hi, lo) = (upper.shape(), lower.shape());
    if hi.prime() != lo.prime() || hi.rank() != lo.rank() + 1 || hi.prefix(lo.rank()) != *lo {
        return Err(Error::ShapeMismatch(format!(
            "{:?} is not a one-factor extension of {:?}",
            hi.exponents(),
            lo.exponents()
        )));
    }
    Ok(upper.delete_last_factor()? == *lower)
}

/// Exact Birch sum against the complex-analytic `τ(χ̄)L(E, χ, 1)/Ω⁺`.
#[derive(Clone, Debug)]
pub struct TwistComparison<R: Real> {
    pub birch: Complex<R>,
    pub analytic: Complex<R>,
    pub difference: R,
}

pub fn compare_twist<R: Real>(
    symbols: &ModularSymbols<R>,
    seq: &PrimeSequence,
    chi: &DirichletCharacterSpec,
) -> Result<TwistComparison<R>> {
    let prec = symbols.precision();
    let exact = birch_sum(symbols, seq, chi)?;
    let birch = exact.to_complex::<R>(prec);
    let d = chi.conductor(seq);
    let analytic = symbols.analytic_twist(d, |n| chi.value_complex::<R>(seq, n, prec))?;
    let difference = (birch.clone() - analytic.clone()).abs();
    Ok(TwistComparison { birch, analytic, difference })
}

/// Status of one prime in a Taylor–Wiles scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwStatus {
    TaylorWiles,
    NotTaylorWiles,
    DividesLevel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwRow {
    pub ell: u64,
    pub a_ell: Option<i64>,
    pub status: TwStatus,
}

/// Classifies every prime `ℓ ≤ bound` with `ℓ ≡ 1 mod p`.
pub fn tw_scan(curve: &EllipticCurve, p: u64, bound: u64) -> Vec<TwRow> {
    (2..=bound)
        .filter(|&l| l % p == 1 && is_prime(l))
        .map(|ell| {
            if curve.conductor() % ell == 0 {
                TwRow { ell, a_ell: None, status: TwStatus::DividesLevel }
            } else {
                let status =
                    if curve.is_taylor_wiles(p, ell) { TwStatus::TaylorWiles } else { TwStatus::NotTaylorWiles };
                TwRow { ell, a_ell: Some(curve.a_prime(ell)), status }
            }
        })
        .collect()
}

/// Outcome of the mod-`p` test on `Σ a·⟨b^a/q⟩⁺`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KuriharaResult {
    pub q: u64,
    pub generator: u64,
    /// `Σ_{a=1}^{q} a·⟨b^a/q⟩⁺`, the sum with the stated bounds.
    #[serde(with = "crate::scalar::rational_string")]
    pub sum: BigRational,
    /// `Σ_{a=1}^{q−1} a·⟨b^a/q⟩⁺`, one term per unit.
    #[serde(with = "crate::scalar::rational_string")]
    pub unit_sum: BigRational,
    pub valuation: Valuation,
    pub holds: bool,
}

/// Tests `p ∤ Σ_{a=1}^{q} a·⟨b^a/q⟩⁺`: the sum must be a nonzero `p`-adic
/// unit.
pub fn kurihara_check<R: Real>(symbols: &ModularSymbols<R>, p: u32, q: u64, generator: Option<u64>) -> Result<KuriharaResult> {
    if q % p as u64 != 1 || !is_prime(q) {
        return Err(Error::InvalidSequence(format!("{q} is not a prime that is 1 mod {p}")));
    }
    if symbols.curve().conductor() % q == 0 {
        return Err(Error::InvalidSequence(format!("{q} divides the conductor")));
    }
    let b = generator.unwrap_or_else(|| smallest_primitive_root(q));
    if !is_primitive_root(b, q) {
        return Err(Error::InvalidSequence(format!("{b} does not generate (Z/{q})^×")));
    }
    let row = symbols.plus_row(q)?;
    let mut sum = BigRational::zero();
    let mut unit_sum = BigRational::zero();
    let mut x = 1u64;
    for a in 1..=q {
        x = x * b % q;
        let term = &row[x as usize] * BigRational::from_integer(a.into());
        if a < q {
            unit_sum += &term;
        }
        sum += term;
    }
    let valuation = if sum.is_zero() { Valuation::Infinite } else { Valuation::integer(vp_rational(&sum, p)) };
    let holds = valuation == Valuation::integer(0);
    Ok(KuriharaResult { q, generator: b, sum, unit_sum, valuation, holds })
}

/// First `q ≤ bound` (prime, `q ≡ 1 mod p`, `q ∤ N`) passing the check,
/// together with every result examined.
pub fn kurihara_search<R: Real>(
    symbols: &ModularSymbols<R>,
    p: u32,
    bound: u64,
) -> Result<(Option<KuriharaResult>, Vec<KuriharaResult>)> {
    let n = symbols.curve().conductor();
    let candidates: Vec<u64> = (2..=bound).filter(|&q| q % p as u64 == 1 && is_prime(q) && n % q != 0).collect();
    symbols.prefetch(&candidates)?;
    let mut seen = Vec::new();
    for q in candidates {
        let res = kurihara_check(symbols, p, q, None)?;
        let hit = res.holds;
        seen.push(res.clone());
        if hit {
            return Ok((Some(res), seen));
        }
    }
    Ok((None, seen))
}

/// Whether `v` is a unit numerator at `p` (`v_p = 0`).
pub fn is_p_unit(v: &BigRational, p: u32) -> bool {
    !v.is_zero() && vp_rational(&v.abs(), p) == 0
}
