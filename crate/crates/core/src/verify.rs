//! Seeded property suites behind `verify`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{EllipticCurve, ModularSymbols, Sign};
use crate::cyclotomic::{degree, ipow, Cyclotomic};
use crate::digit::{
    amice, closed_form_fourier, corollary_evaluation, digit_forward, digit_inverse, fourier_coefficient_direct,
    verticalize, vertical_evaluation, AdditiveCharacter,
};
use crate::error::{Error, Result};
use crate::measure::{GroupShape, Measure};
use crate::moments::{derivative_congruence_check, identity_check, moment_sum, moment_sum_flat};
use crate::real::Real;
use crate::scalar::{Scalar, Valuation};
use crate::weierstrass::{synthetic_measure, weierstrass_invariants};

type Cyc = Cyclotomic<BigRational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Digit,
    Measure,
    Symbols,
    Cyclo,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "digit" => Ok(Suite::Digit),
            "measure" => Ok(Suite::Measure),
            "symbols" => Ok(Suite::Symbols),
            "cyclo" => Ok(Suite::Cyclo),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Digit => "digit",
            Suite::Measure => "measure",
            Suite::Symbols => "symbols",
            Suite::Cyclo => "cyclo",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Every composition of `1..=total` into positive parts.
pub fn shapes_up_to(p: u32, total: u32) -> Vec<GroupShape> {
    fn rec(left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for m in 1..=left {
            cur.push(m);
            rec(left - m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, &mut Vec::new(), &mut out);
    out.into_iter().map(|e| GroupShape::new(p, e).expect("positive exponents")).collect()
}

/// A measure with integer coefficients in `[-bound, bound]`, optionally
/// spread over `Q(ζ_{p^level})`.
pub fn random_measure<Q: Scalar>(shape: &GroupShape, rng: &mut impl Rng, level: u32, bound: i64) -> Measure<Q> {
    let p = shape.prime();
    Measure::from_fn(shape, |_| {
        let coeffs = (0..degree(p, level)).map(|_| Q::from_i64(rng.gen_range(-bound..=bound))).collect();
        Cyclotomic::from_coeffs(p, level, coeffs).expect("degree-sized vector")
    })
}

fn units_mod(p: u32, n: u32) -> Vec<u64> {
    let q = ipow(p, n) as u64;
    (1..q).filter(|u| u % p as u64 != 0).collect()
}

/// Closed form against the brute-force sum for every shape with
/// `Σ m_i ≤ total`, every conductor in the window and every character.
/// When `all_units` is false only units `≤ 4` (and `−1`) are used for `ψ`.
pub fn closed_form_agreement(p: u32, total: u32, all_units: bool) -> Result<Check> {
    let mut compared = 0usize;
    for shape in shapes_up_to(p, total) {
        let sums: Vec<u32> = shape.exponents().iter().scan(0, |s, &m| { *s += m; Some(*s) }).collect();
        let n = shape.rank();
        let low = if n >= 2 { sums[n - 2] } else { 0 };
        for cond in low + 1..=sums[n - 1] {
            let units: Vec<u64> = if all_units {
                units_mod(p, cond)
            } else {
                let q = ipow(p, cond) as u64;
                let mut u: Vec<u64> = [1, 2, 3, 4, q - 1].into_iter().filter(|u| u % p as u64 != 0 && *u < q).collect();
                u.dedup();
                u
            };
            for unit in units {
                let psi = AdditiveCharacter::new(p, cond, unit)?;
                let mut valuation: Option<Valuation> = None;
                for chi in shape.characters() {
                    let fast = closed_form_fourier::<BigRational>(&shape, &psi, &chi)?;
                    let slow = fourier_coefficient_direct::<BigRational>(&shape, &psi, &chi)?;
                    compared += 1;
                    if fast != slow {
                        return Ok(Check::new(
                            format!("closed form p={p}"),
                            false,
                            format!("shape {:?}, ψ(1)=ζ^{unit} (level {cond}), χ {:?}", shape.exponents(), chi.exponents()),
                        ));
                    }
                    if !fast.is_zero() {
                        let v = fast.valuation();
                        match &valuation {
                            None => valuation = Some(v),
                            Some(w) if *w != v => {
                                return Ok(Check::new(
                                    format!("closed form p={p}"),
                                    false,
                                    format!("valuations {w} and {v} for one ψ on shape {:?}", shape.exponents()),
                                ));
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    Ok(Check::new(format!("closed form p={p}, sum m <= {total}"), true, format!("{compared} coefficients")))
}

pub fn digit_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for p in [2u32, 3] {
        checks.push(closed_form_agreement(p, 4, true)?);
    }
    checks.push(closed_form_agreement(5, 3, true)?);

    let mut bijective = true;
    for shape in shapes_up_to(3, 4) {
        for x in 0..shape.size() as u64 {
            let t = digit_inverse(&shape, x);
            bijective &= digit_forward(&shape, &t)? == x;
        }
    }
    checks.push(Check::new("digit map is a bijection", bijective, "p = 3, sum m <= 4"));

    let mut agree = 0usize;
    let mut ok = true;
    for shape in [GroupShape::new(3, vec![1, 2])?, GroupShape::new(2, vec![2, 1, 1])?, GroupShape::new(5, vec![1, 1])?] {
        let nu: Measure<BigRational> = random_measure(&shape, &mut rng, 0, 5);
        let v = verticalize(&nu);
        for cond in 0..=shape.total_exponent() {
            for unit in if cond == 0 { vec![0] } else { units_mod(shape.prime(), cond) } {
                let psi = AdditiveCharacter::new(shape.prime(), cond, unit)?;
                ok &= corollary_evaluation(&nu, &psi)? == vertical_evaluation(&v, &psi);
                agree += 1;
            }
        }
    }
    checks.push(Check::new("evaluation through characters", ok, format!("{agree} additive characters")));
    Ok(checks)
}

pub fn measure_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut round_trip = true;
    for shape in [GroupShape::new(3, vec![1, 2])?, GroupShape::new(5, vec![1, 1])?] {
        let nu: Measure<BigRational> = random_measure(&shape, &mut rng, 1, 4);
        let back = Measure::fourier_inverse_dense(&shape, nu.transform())?;
        round_trip &= back == nu;
    }
    checks.push(Check::new("fourier round trip", round_trip, ""));

    let mut identity = 0usize;
    let mut identity_ok = true;
    let mut folded_ok = true;
    for (p, m, k) in [(3u32, 1u32, 2usize), (3, 1, 3), (5, 1, 2), (3, 2, 2)] {
        let shape = GroupShape::uniform(p, m, k)?;
        for _ in 0..6 {
            let nu: Measure<BigRational> = random_measure(&shape, &mut rng, 0, 6);
            identity_ok &= identity_check(&nu, 1)?.holds;
            folded_ok &= moment_sum(&nu, 1)? == moment_sum_flat(&nu, 1)?;
            identity += 1;
        }
    }
    checks.push(Check::new("moment identity", identity_ok, format!("{identity} measures")));
    checks.push(Check::new("folded moment equals flat moment", folded_ok, ""));

    let shape = GroupShape::uniform(3, 1, 3)?;
    let mut congruence = true;
    for _ in 0..20 {
        let nu: Measure<BigRational> = random_measure(&shape, &mut rng, 0, 9);
        congruence &= derivative_congruence_check(&nu)?.passed();
    }
    checks.push(Check::new("derivative congruences", congruence, "20 measures on (Z/3)^3"));

    let mut planted = true;
    let mut detail = String::new();
    for (mu, lambda, e) in [(0u32, 0u64, 1u32), (1, 2, 1), (2, 1, 2), (0, 3, 2)] {
        let nu: Measure<BigRational> = synthetic_measure(&shape, mu, lambda, e, rng.gen())?;
        let hi = amice(&verticalize(&nu));
        let w = weierstrass_invariants(&[hi.reduce_to(2)?, hi])?;
        let ok = w.certified && w.mu == Valuation::ratio(mu as i64, e as i64) && w.lambda == lambda;
        if !ok {
            detail = format!("planted ({mu}/{e}, {lambda}) read ({}, {})", w.mu, w.lambda);
        }
        planted &= ok;
    }
    checks.push(Check::new("planted invariants recovered", planted, detail));

    let zero: Measure<BigRational> = Measure::zero(&shape);
    let zero_ok = moment_sum(&zero, 1)?.is_zero() && !moment_sum(&Measure::<BigRational>::dirac(&shape, &[1, 0, 2])?, 1)?.is_zero();
    checks.push(Check::new("zero measure has zero moments", zero_ok, ""));
    Ok(checks)
}

pub fn cyclo_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inverse_ok = true;
    let mut valuation_ok = true;
    for (p, level) in [(2u32, 3u32), (3, 2), (5, 1), (3, 3)] {
        for _ in 0..10 {
            let coeffs = (0..degree(p, level)).map(|_| BigRational::from_integer(rng.gen_range(-9i64..=9).into())).collect();
            let x = Cyc::from_coeffs(p, level, coeffs)?;
            if x.is_zero() {
                continue;
            }
            inverse_ok &= (&x * &x.inverse()?) == Cyc::one(p, level);
            valuation_ok &= x.valuation() == x.valuation_via_norm();
        }
    }
    Ok(vec![
        Check::new("inverse", inverse_ok, ""),
        Check::new("valuation by Taylor shift equals valuation by norm", valuation_ok, ""),
    ])
}

/// `a_ℓ⟨x⟩⁺ − Σ_j ⟨(x+j)/ℓ⟩⁺ − [ℓ ∤ N]⟨ℓx⟩⁺` at `x = a/q`.
pub fn hecke_defect<R: Real>(ms: &ModularSymbols<R>, ell: u64, a: i64, q: u64) -> Result<BigRational> {
    let e = ms.curve();
    let a_ell = BigRational::from_integer(e.a_prime(ell).into());
    let mut rhs = BigRational::zero();
    for j in 0..ell as i64 {
        rhs += ms.symbol(a + j * q as i64, q * ell, Sign::Plus)?;
    }
    if e.conductor() % ell != 0 {
        rhs += ms.symbol(a * ell as i64, q, Sign::Plus)?;
    }
    Ok(a_ell * ms.symbol(a, q, Sign::Plus)? - rhs)
}

pub fn symbols_suite<R: Real>(ms: &ModularSymbols<R>, max_q: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let e: &EllipticCurve = ms.curve();
    if e.label() == "11a1" {
        let v = ms.symbol(0, 1, Sign::Plus)?;
        checks.push(Check::new("<0>+ = 1/5", v == BigRational::new(1.into(), 5.into()), format!("{v}")));
    }
    let qs: Vec<u64> = (1..=max_q).collect();
    let mut all_q = qs.clone();
    all_q.extend(qs.iter().flat_map(|q| [2 * q, 3 * q]));
    ms.prefetch(&all_q)?;
    let (mut parity, mut period) = (true, true);
    let mut hecke = true;
    let mut detail = String::new();
    for &q in &qs {
        for a in 0..q as i64 {
            let s = ms.symbol(a, q, Sign::Plus)?;
            parity &= ms.symbol(-a, q, Sign::Plus)? == s;
            period &= ms.symbol(a + q as i64, q, Sign::Plus)? == s;
            for ell in [2u64, 3] {
                let d = hecke_defect(ms, ell, a, q)?;
                if !d.is_zero() && hecke {
                    hecke = false;
                    detail = format!("T_{ell} at {a}/{q}: defect {d}");
                }
            }
        }
    }
    checks.push(Check::new("parity <-x>+ = <x>+", parity, format!("q <= {max_q}")));
    checks.push(Check::new("periodicity <x+1>+ = <x>+", period, format!("q <= {max_q}")));
    checks.push(Check::new("Hecke relations for 2 and 3", hecke, detail));
    Ok(checks)
}

/// Runs one suite (or all) and collects the reports.
pub fn run_suite<R: Real>(suite: Suite, seed: u64, symbols: &ModularSymbols<R>) -> Result<Vec<SuiteReport>> {
    let order = match suite {
        Suite::All => vec![Suite::Digit, Suite::Measure, Suite::Symbols, Suite::Cyclo],
        s => vec![s],
    };
    let mut out = Vec::new();
    for s in order {
        let checks = match s {
            Suite::Digit => digit_suite(seed)?,
            Suite::Measure => measure_suite(seed)?,
            Suite::Symbols => symbols_suite(symbols, 30)?,
            Suite::Cyclo => cyclo_suite(seed)?,
            Suite::All => unreachable!(),
        };
        out.push(SuiteReport { suite: s, seed, checks });
    }
    Ok(out)
}
