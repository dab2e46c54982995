//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every check recomputes its reference values here, by brute
//! force or from first principles, and compares exactly.
//!
//! `ACCEPTANCE_SKIP_EXTENDED=1` skips the Kurihara pipeline (criterion 7);
//! `ACCEPTANCE_ONLY=1,3` runs a subset.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use padic_moments::curve::{preset, EllipticCurve, Sign};
use padic_moments::cyclotomic::Cyclotomic;
use padic_moments::digit::{amice, closed_form_fraction, closed_form_fourier, ClosedForm, corollary_evaluation, verticalize, AdditiveCharacter};
use padic_moments::horizontal::{
    build_measure, compare_twist, kurihara_search, smallest_primitive_root, tw_scan, DirichletCharacterSpec, PrimeSequence,
    TwStatus,
};
use padic_moments::measure::{CharacterTuple, GroupShape, Measure};
use padic_moments::moments::{
    derivative_congruence_check, identity_check, kolyvagin_derivative, moment_sum, moment_sum_flat, unit_criteria, UnitClass,
};
use padic_moments::pipeline::{arithmetic_run, moment_series};
use padic_moments::real::{MpFloat, Real};
use padic_moments::scalar::Valuation;
use padic_moments::verify::random_measure;
use padic_moments::weierstrass::{synthetic_measure, weierstrass_invariants, weierstrass_invariants_exact};
use padic_moments::ModularSymbols;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = BigRational;
type C = Cyclotomic<Q>;
type Res<T> = Result<T, String>;

struct Outcome {
    passed: bool,
    detail: String,
    /// Deterministic transcript of every computed value that matters.
    report: String,
}

impl Outcome {
    fn from(result: Res<(String, String)>) -> Self {
        match result {
            Ok((detail, report)) => Outcome { passed: true, detail, report },
            Err(e) => Outcome { passed: false, detail: e.clone(), report: e },
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn lib<T, E: std::fmt::Display>(r: Result<T, E>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

fn pow(p: u64, e: u32) -> u64 {
    p.pow(e)
}

fn vp(mut x: i64, p: i64) -> u32 {
    let mut v = 0;
    while x != 0 && x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn phi(p: u64, k: u32) -> u64 {
    if k == 0 {
        1
    } else {
        (p - 1) * pow(p, k - 1)
    }
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// `#E(F_ℓ)` including the point at infinity, by trying every `(x, y)`.
fn points(a: [i64; 5], l: i64) -> i64 {
    let m = |x: i64| x.rem_euclid(l);
    let mut n = 1;
    for x in 0..l {
        let rhs = m(m(m(x * x) * x) + m(a[1] * m(x * x)) + m(a[3] * x) + a[4]);
        for y in 0..l {
            if m(y * y + a[0] * x * y + a[2] * y) == rhs {
                n += 1;
            }
        }
    }
    n
}

fn a_ell(a: [i64; 5], l: i64) -> i64 {
    l + 1 - points(a, l)
}

// ---------------------------------------------------------------------
// Exact arithmetic in Z[x]/(x^n − 1), n = p^L, as an oracle ring.

/// Zero in `Q(ζ_{p^L})` iff constant on every coset `r + p^{L−1}Z`,
/// i.e. divisible by `Φ_{p^L}(x) = Σ_j x^{j p^{L−1}}`.
fn vanishes_in_field(buf: &[i64], p: usize) -> bool {
    let s = buf.len() / p;
    (0..s).all(|r| (1..p).all(|j| buf[r + j * s] == buf[r]))
}

/// `buf·(x^b − 1)`.
fn times_root_minus_one(buf: &[i64], b: i64) -> Vec<i64> {
    let n = buf.len() as i64;
    let b = b.rem_euclid(n);
    (0..n).map(|k| buf[(k - b).rem_euclid(n) as usize] - buf[k as usize]).collect()
}

/// A library element at level `≤ l` as a cyclic buffer at level `l`.
fn to_cyclic(x: &C, p: u64, l: u32) -> Res<Vec<i64>> {
    let mut buf = vec![0i64; pow(p, l) as usize];
    let stride = pow(p, l - x.level()) as usize;
    for (k, c) in x.coeffs().iter().enumerate() {
        ensure!(c.is_integer(), "non-integral coefficient {c}");
        buf[k * stride] = c.to_integer().to_i64().ok_or("coefficient overflow")?;
    }
    Ok(buf)
}

/// `v_p(ζ_{p^level}^e − 1)`.
fn root_minus_one_valuation(p: u64, level: u32, e: i64) -> Res<Ratio<i64>> {
    let e = e.rem_euclid(pow(p, level) as i64);
    ensure!(e != 0, "ζ^0 − 1 appears in the closed form at level {level}");
    let order = level - vp(e, p as i64);
    Ok(Ratio::new(1, phi(p, order) as i64))
}

// ---------------------------------------------------------------------
// Criterion 1: closed-form Fourier coefficients against brute force.

fn compositions(total: u32) -> Vec<Vec<u32>> {
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
    out
}

/// Every tuple of `Π Z/p^{m_i}`, first coordinate fastest.
fn tuples(p: u64, exps: &[u32]) -> Vec<Vec<u64>> {
    let size: u64 = exps.iter().map(|&m| pow(p, m)).product();
    (0..size)
        .map(|mut x| {
            exps.iter()
                .map(|&m| {
                    let n = pow(p, m);
                    let a = x % n;
                    x /= n;
                    a
                })
                .collect()
        })
        .collect()
}

#[derive(Default)]
struct ClosedFormTally {
    pairs: u64,
    nonzero: u64,
    division_free: u64,
    brute_force: u64,
    conjugate: u64,
}

/// Checks `hist == closed form` by cross-multiplying and returns the valuation the
/// exponents predict.
fn cross_check(hist: &[i64], f: &ClosedForm, p: u64, lift: i64, here: &dyn Fn() -> String) -> Res<Ratio<i64>> {
    let mut lhs = hist.to_vec();
    let mut rhs = vec![0i64; hist.len()];
    rhs[0] = f.scalar;
    let mut v = Ratio::from_integer(vp(f.scalar, p as i64) as i64);
    for &b in &f.denominators {
        v -= root_minus_one_valuation(p, f.level, b)?;
        lhs = times_root_minus_one(&lhs, b * lift);
    }
    for &a in &f.numerators {
        v += root_minus_one_valuation(p, f.level, a)?;
        rhs = times_root_minus_one(&rhs, a * lift);
    }
    let diff: Vec<i64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
    ensure!(vanishes_in_field(&diff, p as usize), "closed form differs from the sum: {}", here());
    Ok(v)
}

/// The closed form for `(ψ_u, χ)` is the image of the one for `(ψ_1, χ^{1/u})` under
/// `ζ ↦ ζ^u` when its scalar agrees and its exponents are the `u`-multiples.
fn conjugate_form(base: &ClosedForm, f: &ClosedForm, u: u64) -> bool {
    let modulus = pow(base.prime as u64, base.level) as i64;
    let same = |xs: &[i64], ys: &[i64]| {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(&x, &y)| (x * u as i64 - y).rem_euclid(modulus) == 0)
    };
    base.scalar == f.scalar
        && base.level == f.level
        && same(&base.numerators, &f.numerators)
        && same(&base.denominators, &f.denominators)
}

/// `σ_u` on `Z[x]/(x^n − 1)`: `x^k ↦ x^{uk}`.
fn galois(buf: &[i64], u: u64) -> Vec<i64> {
    let n = buf.len() as u64;
    let mut out = vec![0i64; buf.len()];
    for (k, &c) in buf.iter().enumerate() {
        out[(u * k as u64 % n) as usize] = c;
    }
    out
}

fn inverse_mod(u: u64, n: u64) -> u64 {
    (1..n).find(|v| u * v % n == 1).expect("unit")
}

/// Brute force runs only at `ψ(1) = ζ`; every other `ψ_u` is reached by conjugation,
/// which sends `Σ ψ_1(d(g)) χ'(g)^{-1}` to the sum for `(ψ_u, χ'^u)`.
fn closed_form_shape(p: u64, exps: &[u32], division_free: bool, tally: &mut ClosedFormTally) -> Res<()> {
    let shape = lib(GroupShape::new(p as u32, exps.to_vec()))?;
    let n = exps.len();
    let sums: Vec<u32> = std::iter::once(0).chain(exps.iter().scan(0, |s, &m| { *s += m; Some(*s) })).collect();
    let lmax = *exps.iter().max().unwrap();
    let elements = tuples(p, exps);
    let characters = tuples(p, exps);
    let strides: Vec<u64> = sums[..n].iter().map(|&s| pow(p, s)).collect();
    let orders: Vec<u64> = exps.iter().map(|&m| pow(p, m)).collect();
    let tuples_lib = characters.iter().map(|k| lib(CharacterTuple::new(&shape, k.clone()))).collect::<Res<Vec<_>>>()?;
    // the digit map with the first factor as lowest digit
    let digits: Vec<u64> = elements.iter().map(|a| a.iter().zip(&strides).map(|(x, s)| x * s).sum()).collect();
    // χ(a) = ζ_{p^lmax}^{chi_e}
    let chi_e: Vec<Vec<u64>> = characters
        .iter()
        .map(|k| {
            elements
                .iter()
                .map(|a| (0..n).map(|i| k[i] * a[i] % pow(p, exps[i]) * pow(p, lmax - exps[i])).sum::<u64>() % pow(p, lmax))
                .collect()
        })
        .collect();
    for cond in sums[n - 1] + 1..=sums[n] {
        let l = cond.max(lmax);
        let size = pow(p, l);
        let modulus = pow(p, cond);
        let (psi_lift, chi_lift) = (pow(p, l - cond), pow(p, l - lmax));
        let psi_e: Vec<u64> = digits.iter().map(|d| d % modulus * psi_lift).collect();
        let psi_one = lib(AdditiveCharacter::new(p as u32, cond, 1))?;
        let mut hists = Vec::with_capacity(characters.len());
        let mut forms = Vec::with_capacity(characters.len());
        let mut valuations = Vec::with_capacity(characters.len());
        let mut valuation: Option<Ratio<i64>> = None;
        for ((k, chi), row) in characters.iter().zip(&tuples_lib).zip(&chi_e) {
            let mut hist = vec![0i64; size as usize];
            for (&x, &c) in psi_e.iter().zip(row) {
                hist[((x + size - c * chi_lift) % size) as usize] += 1;
            }
            tally.pairs += 1;
            tally.brute_force += 1;
            let form = lib(closed_form_fraction(&shape, &psi_one, chi))?;
            let here = || format!("shape {exps:?}, ψ(1) = ζ_{{{p}^{cond}}}, χ {k:?}");
            match &form {
                None => ensure!(vanishes_in_field(&hist, p as usize), "closed form vanishes, sum does not: {}", here()),
                Some(f) => {
                    ensure!(f.level == cond, "closed form at level {} for {}", f.level, here());
                    let v = cross_check(&hist, f, p, psi_lift as i64, &here)?;
                    tally.nonzero += 1;
                    let w = valuation.get_or_insert(v);
                    ensure!(*w == v, "valuations {w} and {v} for one ψ: {}", here());
                }
            }
            valuations.push(valuation);
            if division_free {
                let value = lib(closed_form_fourier::<Q>(&shape, &psi_one, chi))?;
                let diff: Vec<i64> = to_cyclic(&value, p, l)?.iter().zip(&hist).map(|(x, y)| x - y).collect();
                ensure!(vanishes_in_field(&diff, p as usize), "division-free evaluation differs: {}", here());
                tally.division_free += 1;
            }
            hists.push(hist);
            forms.push(form);
        }
        for u in (2..modulus).filter(|u| u % p != 0) {
            let psi = lib(AdditiveCharacter::new(p as u32, cond, u))?;
            let inv = inverse_mod(u % pow(p, lmax), pow(p, lmax));
            let mut valuation: Option<Ratio<i64>> = None;
            for (k, chi) in characters.iter().zip(&tuples_lib) {
                tally.pairs += 1;
                let j = k.iter().zip(&orders).zip(&strides).map(|((&x, &o), s)| x * inv % o * s).sum::<u64>() as usize;
                let form = lib(closed_form_fraction(&shape, &psi, chi))?;
                let here = || format!("shape {exps:?}, ψ(1) = ζ_{{{p}^{cond}}}^{u}, χ {k:?}");
                let conjugated = || galois(&hists[j], u % size);
                match (&forms[j], &form) {
                    (None, None) => {}
                    (None, Some(_)) => ensure!(false, "closed form is nonzero, sum vanishes: {}", here()),
                    (Some(_), None) => ensure!(false, "closed form vanishes, sum does not: {}", here()),
                    (Some(b), Some(f)) => {
                        ensure!(f.level == cond, "closed form at level {} for {}", f.level, here());
                        // conjugation preserves valuations
                        let v = if conjugate_form(b, f, u) {
                            tally.conjugate += 1;
                            valuations[j].expect("nonzero base form has a valuation")
                        } else {
                            cross_check(&conjugated(), f, p, psi_lift as i64, &here)?
                        };
                        tally.nonzero += 1;
                        let w = valuation.get_or_insert(v);
                        ensure!(*w == v, "valuations {w} and {v} for one ψ: {}", here());
                    }
                }
                if division_free {
                    let value = lib(closed_form_fourier::<Q>(&shape, &psi, chi))?;
                    let diff: Vec<i64> = to_cyclic(&value, p, l)?.iter().zip(&conjugated()).map(|(x, y)| x - y).collect();
                    ensure!(vanishes_in_field(&diff, p as usize), "division-free evaluation differs: {}", here());
                    tally.division_free += 1;
                }
            }
        }
    }
    Ok(())
}

fn criterion_1() -> Res<(String, String)> {
    let mut report = String::new();
    let mut totals = ClosedFormTally::default();
    for p in [2u64, 3, 5] {
        for total in 1..=5 {
            let mut t = ClosedFormTally::default();
            for exps in compositions(total).into_iter().filter(|e| e.iter().sum::<u32>() == total) {
                closed_form_shape(p, &exps, total <= 3, &mut t)?;
            }
            writeln!(
                report,
                "p={p} sum={total}: pairs {} brute-force {} conjugate {} nonzero {} division-free {}",
                t.pairs, t.brute_force, t.conjugate, t.nonzero, t.division_free
            )
            .unwrap();
            totals.pairs += t.pairs;
            totals.nonzero += t.nonzero;
            totals.division_free += t.division_free;
            totals.brute_force += t.brute_force;
            totals.conjugate += t.conjugate;
        }
    }
    let detail = format!(
        "{} (ψ, χ) pairs ({} brute force at ψ(1) = ζ, {} matched as conjugates), {} nonzero, {} via division-free evaluation",
        totals.pairs, totals.brute_force, totals.conjugate, totals.nonzero, totals.division_free
    );
    Ok((detail, report))
}

// ---------------------------------------------------------------------
// Criterion 2: evaluation and moment identities on random measures.

/// `Σ_g ν(g)·ψ(d(g))` straight from the definition.
fn pushforward_at(nu: &Measure<Q>, psi_unit: u64, cond: u32) -> Res<C> {
    let shape = nu.shape();
    let p = shape.prime() as u64;
    let exps = shape.exponents().to_vec();
    let mut acc = C::zero(p as u32, 0);
    for a in tuples(p, &exps) {
        let mut place = 1u64;
        let mut d = 0u64;
        for (x, &m) in a.iter().zip(&exps) {
            d += x * place;
            place *= pow(p, m);
        }
        let c = lib(nu.coeff(&a))?;
        if !c.is_zero() {
            let z = C::zeta_power(p as u32, cond, ((psi_unit * d) % pow(p, cond)) as i64);
            acc = &acc + &(c * &z);
        }
    }
    Ok(acc)
}

fn criterion_2() -> Res<(String, String)> {
    let mut report = String::new();
    let mut count = 0usize;
    for (p, m, n_max, per) in [(3u32, 1u32, 3usize, 16usize), (3, 2, 2, 16), (5, 1, 3, 16), (5, 2, 1, 16)] {
        for n in 0..=n_max {
            let shape = lib(GroupShape::uniform(p, m, n + 1))?;
            for j in 0..per {
                let seed = (p as u64) << 32 | (m as u64) << 24 | (n as u64) << 16 | j as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let nu: Measure<Q> = random_measure(&shape, &mut rng, (j % 2) as u32, 5);
                let k0 = if j % 3 == 0 { p as u64 - 1 } else { 1 };
                let top = m * (n as u32 + 1);
                let here = format!("p={p} m={m} n={n} seed {seed:#x}");

                let moment = lib(moment_sum(&nu, k0))?;
                ensure!(moment == lib(moment_sum_flat(&nu, k0))?, "folded and flat moment sums differ: {here}");
                // moment·(ψ(p^{mn}) − 1) = (ψ(1) − 1)·f(ψ(1) − 1), with Horner at a generic point
                let t = C::zeta_minus_one(p, top, k0 as i64);
                let f_value = amice(&verticalize(&nu)).evaluate(&t);
                let psi_low = C::zeta_minus_one(p, m, k0 as i64);
                ensure!(&moment * &psi_low == &t * &f_value, "moment identity fails: {here}");
                ensure!(lib(identity_check(&nu, k0))?.holds, "identity_check disagrees: {here}");

                // the weighted character sum against the pushforward, at every conductor
                for cond in 1..=top {
                    let psi = lib(AdditiveCharacter::new(p, cond, k0))?;
                    let lhs = lib(corollary_evaluation(&nu, &psi))?;
                    ensure!(lhs == pushforward_at(&nu, k0, cond)?, "evaluation identity fails at conductor {cond}: {here}");
                }
                writeln!(report, "{here}: moment {moment}").unwrap();
                count += 1;
            }
        }
    }
    Ok((format!("{count} measures, identities exact at every conductor"), report))
}

// ---------------------------------------------------------------------
// Criterion 3: planted invariants on synthetic measures.

fn criterion_3() -> Res<(String, String)> {
    let mut report = String::new();
    let mut checked = 0usize;
    for p in [3u32, 5] {
        for e in [1u32, 2] {
            for mu in 0..=2u32 {
                for lambda in 0..=3u64 {
                    let top = 4usize;
                    let seed = 1000 * p as u64 + 100 * e as u64 + 10 * mu as u64 + lambda;
                    let shape = lib(GroupShape::uniform(p, 1, top))?;
                    let nu: Measure<Q> = lib(synthetic_measure(&shape, mu, lambda, e, seed))?;
                    let here = format!("p={p} e={e} mu={mu} lambda={lambda}");
                    let mu_v = Ratio::new(mu as i64, e as i64);
                    // the formula is exact once λ·e < φ(p^{n+1})
                    let regime: Vec<usize> = (1..=top).filter(|&k| lambda * (e as u64) < phi(p as u64, k as u32)).collect();
                    ensure!(regime.len() >= 2, "fewer than two levels in the regime: {here}");
                    let out = lib(moment_series(&nu, &regime, 1, e))?;
                    for r in &out.reports {
                        let n = r.factors as u32 - 1;
                        let pp = p as i64;
                        let expected = mu_v - Ratio::new(1, pp - 1) + Ratio::new(lambda as i64 + 1, pp.pow(n + 1) - pp.pow(n));
                        let expected = Valuation::ratio(*expected.numer(), *expected.denom());
                        ensure!(r.identity_check, "identity fails at n={n}: {here}");
                        ensure!(r.valuation == expected, "n={n}: valuation {} but formula gives {expected}: {here}", r.valuation);
                        checked += 1;
                    }
                    let fit = out.fit.as_ref().ok_or("no fit")?;
                    ensure!(fit.in_asymptotic_regime, "fit outside regime: {here}: {}", fit.note);
                    ensure!(
                        fit.mu == Valuation::ratio(mu as i64, e as i64) && fit.lambda == Valuation::integer(lambda as i64),
                        "fit ({}, {}) for {here}",
                        fit.mu,
                        fit.lambda
                    );
                    // Newton data of the two top truncations
                    let hi = amice(&verticalize(&nu));
                    let lo = lib(hi.reduce_to(top as u32 - 1))?;
                    let w = lib(weierstrass_invariants(&[lo, hi]))?;
                    ensure!(w.certified, "not certified: {here}: {}", w.note);
                    ensure!(w.mu == fit.mu && w.lambda == lambda, "Weierstrass ({}, {}) for {here}", w.mu, w.lambda);
                    writeln!(report, "{here}: levels {regime:?} valuations {:?}", out.reports.iter().map(|r| r.valuation.to_string()).collect::<Vec<_>>()).unwrap();
                }
            }
        }
    }

    // μ = ∞ exactly when the pushforward vanishes
    let shape = lib(GroupShape::new(3, vec![1, 2]))?;
    let zero = Measure::<Q>::zero(&shape);
    ensure!(weierstrass_invariants_exact(&amice(&verticalize(&zero))).mu.is_infinite(), "zero measure has finite μ");
    let mut examples = Vec::new();
    examples.push(lib(Measure::<Q>::dirac(&shape, &[0, 0]))?);
    // vanishes after deleting the last factor, not before
    let a = lib(Measure::<Q>::dirac(&shape, &[1, 0]))?;
    let b = lib(Measure::<Q>::dirac(&shape, &[1, 4]))?;
    examples.push(lib(a.add(&b.scale(&C::from_i64(3, 0, -1))))?);
    examples.push(lib(Measure::<Q>::dirac(&shape, &[2, 8]))?.scale(&C::from_i64(3, 0, 9)));
    for (i, nu) in examples.iter().enumerate() {
        let pushed = verticalize(nu);
        ensure!(pushed.coeffs().iter().any(|c| !c.is_zero()), "example {i} has zero pushforward");
        let w = weierstrass_invariants_exact(&amice(&pushed));
        ensure!(!w.mu.is_infinite(), "example {i}: nonzero pushforward but μ = ∞");
        writeln!(report, "nonzero example {i}: mu {}", w.mu).unwrap();
    }
    ensure!(lib(examples[1].delete_last_factor())?.is_zero(), "example 1 should vanish on the first factor");
    Ok((format!("48 planted measures, {checked} exact valuations; μ = ∞ iff zero on 4 examples"), report))
}

// ---------------------------------------------------------------------
// Criterion 4: constant term, derivative congruence, unit criteria.

fn derivative_oracle(nu: &Measure<Q>, label: &str, report: &mut String) -> Res<()> {
    let shape = nu.shape().clone();
    let p = shape.prime() as u64;
    let exps = shape.exponents().to_vec();
    let mut mass = C::zero(p as u32, 0);
    let mut moment = C::zero(p as u32, 0);
    let mut d1 = C::zero(p as u32, 0);
    for a in tuples(p, &exps) {
        let c = lib(nu.coeff(&a))?.clone();
        let d: u64 = a.iter().enumerate().map(|(i, &x)| x * pow(p, i as u32)).sum();
        let lead = if a[0] == 0 { p } else { a[0] };
        mass = &mass + &c;
        moment = &moment + &c.scale(&Q::from_integer(d.into()));
        d1 = &d1 + &c.scale(&Q::from_integer(lead.into()));
    }
    let f = amice(&verticalize(nu));
    ensure!(f.constant_term() == &mass, "{label}: f(0) is not the total mass");
    ensure!(lib(kolyvagin_derivative(nu, 0))? == mass, "{label}: D^0 is not the total mass");
    ensure!(f.derivative_at_zero() == moment, "{label}: f'(0) is not Σ d(g)ν(g)");
    ensure!(lib(kolyvagin_derivative(nu, 1))? == d1, "{label}: D differs from the fiber sum");
    let gap = &moment - &d1;
    ensure!(gap.is_zero() || gap.valuation() >= Valuation::integer(1), "{label}: f'(0) ≢ Dν mod p");
    ensure!(lib(derivative_congruence_check(nu))?.passed(), "{label}: library check disagrees");
    writeln!(report, "{label}: f(0) = {mass}, Dν = {d1}").unwrap();
    Ok(())
}

fn criterion_4() -> Res<(String, String)> {
    let mut report = String::new();
    for i in 0..100u64 {
        let p = if i % 2 == 0 { 3 } else { 5 };
        let rank = 1 + (i as usize / 2) % 3;
        let shape = lib(GroupShape::uniform(p, 1, rank))?;
        let mut rng = ChaCha8Rng::seed_from_u64(40_000 + i);
        let nu: Measure<Q> = random_measure(&shape, &mut rng, (i % 3 == 0) as u32, 7);
        derivative_oracle(&nu, &format!("random {i} (p={p}, rank {rank})"), &mut report)?;
    }

    let curve = lib(EllipticCurve::new(preset("11a1").unwrap()))?;
    let symbols = lib(ModularSymbols::new(&curve, MpFloat::precision_for_digits(30)))?;
    let seq = lib(PrimeSequence::new(&curve, 3, &[7, 13, 19], None, 0))?;
    let nu = lib(lib(build_measure(&curve, &symbols, &seq))?.reduce_uniform(1))?;
    derivative_oracle(&nu, "11a1 (7,13,19)", &mut report)?;

    let mut classified = 0;
    for p in [3u32, 5] {
        for rank in [2usize, 3] {
            for seed in 0..3u64 {
                let shape = lib(GroupShape::uniform(p, 1, rank))?;
                for (lambda, want) in [(0u64, UnitClass::MuZeroLambdaZero), (1, UnitClass::MuZeroLambdaOne)] {
                    let nu: Measure<Q> = lib(synthetic_measure(&shape, 0, lambda, 1, seed))?;
                    let u = lib(unit_criteria(&nu))?;
                    ensure!(u.class == want, "p={p} rank {rank} seed {seed}: lambda {lambda} classified {:?}", u.class);
                    ensure!(u.agrees != Some(false), "p={p} rank {rank}: unit criteria contradict certified invariants");
                    classified += 1;
                }
            }
        }
    }
    writeln!(report, "{classified} synthetic measures classified").unwrap();
    Ok((format!("101 measures satisfy both congruences; {classified} synthetic classifications correct"), report))
}

// ---------------------------------------------------------------------
// Criterion 5: modular symbols of 11a1 and the Birch sum.

fn criterion_5() -> Res<(String, String)> {
    let curve = lib(EllipticCurve::new(preset("11a1").unwrap()))?;
    let prec = MpFloat::precision_for_digits(40);
    let ms = lib(ModularSymbols::new(&curve, prec))?;
    let sym = |a: i64, d: u64| lib(ms.symbol(a, d, Sign::Plus));
    let mut report = String::new();
    ensure!(sym(0, 1)? == q(1, 5), "<0>+ = {}", sym(0, 1)?);

    let ainvs = curve.ainvs();
    let mut relations = 0usize;
    for d in 1..=30u64 {
        let row = lib(ms.plus_row(d))?;
        for a in 0..d as i64 {
            let x = &row[a as usize];
            ensure!(sym(-a, d)? == *x, "parity fails at {a}/{d}");
            ensure!(sym(a + d as i64, d)? == *x, "periodicity fails at {a}/{d}");
            ensure!(sym(a + 5 * d as i64, d)? == *x, "periodicity fails at {a}/{d}");
            relations += 3;
            for l in [2i64, 3] {
                // a_ℓ⟨a/d⟩ = ⟨ℓa/d⟩ + Σ_k ⟨(a + kd)/(ℓd)⟩
                let mut rhs = sym(l * a, d)?;
                for k in 0..l {
                    rhs += sym(a + k * d as i64, l as u64 * d)?;
                }
                let al = Q::from_integer(a_ell(ainvs, l).into());
                ensure!(al * x == rhs, "Hecke relation for ell={l} fails at {a}/{d}");
                relations += 1;
            }
        }
        writeln!(report, "row {d}: {}", row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
    }

    // an order-3 character of conductor 7
    let seq = lib(PrimeSequence::new(&curve, 3, &[7], Some(&[3]), 0))?;
    let chi = lib(DirichletCharacterSpec::new(&seq, vec![1]))?;
    let cmp = lib(compare_twist(&ms, &seq, &chi))?;
    let diff = cmp.difference.to_f64();
    ensure!(diff < 1e-20, "Birch sum and analytic twist differ by {diff:e}");
    let size = cmp.analytic.abs().to_f64();
    ensure!(size > 1e-3, "analytic twist is unexpectedly tiny ({size:e})");
    writeln!(report, "birch {:.15} {:.15}", cmp.birch.re.to_f64(), cmp.birch.im.to_f64()).unwrap();
    Ok((format!("<0>+ = 1/5, {relations} relations exact, Birch vs analytic |diff| = {diff:.1e}"), report))
}

// ---------------------------------------------------------------------
// Criterion 6: 11a1 at p = 3 end to end.

fn criterion_6() -> Res<(String, String)> {
    let curve = lib(EllipticCurve::new(preset("11a1").unwrap()))?;
    let ainvs = curve.ainvs();
    let primes = [7u64, 13, 19];
    for &l in &primes {
        let a = a_ell(ainvs, l as i64);
        ensure!(l % 3 == 1 && 11 % l != 0 && (a - 2).rem_euclid(3) != 0, "{l} is not Taylor-Wiles (a = {a})");
        ensure!(curve.is_taylor_wiles(3, l), "library disagrees on {l}");
    }
    let symbols = lib(ModularSymbols::new(&curve, MpFloat::precision_for_digits(30)))?;
    let seq = lib(PrimeSequence::new(&curve, 3, &primes, None, 0))?;
    let roots: Vec<u64> = primes
        .iter()
        .map(|&l| (2..l).find(|&g| (1..l - 1).all(|k| (0..k).fold(1u64, |x, _| x * g % l) != 1)).unwrap())
        .collect();
    ensure!(seq.generators() == roots.as_slice(), "generators {:?}, smallest primitive roots {roots:?}", seq.generators());
    let (out, _) = lib(arithmetic_run(&curve, &symbols, &seq, &[2, 3], 1))?;
    ensure!(out.tower_compatible == vec![true, true], "tower {:?}", out.tower_compatible);
    let mut report = String::new();
    for r in &out.reports {
        let n = r.factors as u32;
        let expected = Ratio::new(-1i64, 2) + Ratio::new(1, 3i64.pow(n) - 3i64.pow(n - 1));
        ensure!(r.identity_check, "identity fails at n={n}");
        ensure!(
            r.valuation == Valuation::ratio(*expected.numer(), *expected.denom()),
            "n={n}: valuation {} expected {expected}",
            r.valuation
        );
        writeln!(report, "n={n}: {} valuation {}", r.exact_value, r.valuation).unwrap();
    }
    let fit = out.fit.as_ref().ok_or("no fit")?;
    ensure!(fit.mu == Valuation::integer(0) && fit.lambda == Valuation::integer(0), "fit ({}, {})", fit.mu, fit.lambda);
    let vals: Vec<String> = out.reports.iter().map(|r| r.valuation.to_string()).collect();
    Ok((format!("valuations {vals:?}, fit (0, 0), tower exact, generators {roots:?}"), report))
}

// ---------------------------------------------------------------------
// Criterion 7: Kurihara witness and the rank-one run for 37a1 at p = 5.

fn criterion_7() -> Res<(String, String)> {
    let curve = lib(EllipticCurve::new(preset("37a1").unwrap()))?;
    let symbols = lib(ModularSymbols::new(&curve, MpFloat::precision_for_digits(30)))?;
    let (witness, seen) = lib(kurihara_search(&symbols, 5, 200))?;
    let mut report = String::new();
    for s in &seen {
        // recompute the sum from the symbols
        let mut sum = Q::zero();
        let mut x = 1u64;
        for a in 1..=s.q {
            x = x * s.generator % s.q;
            sum += lib(symbols.symbol(x as i64, s.q, Sign::Plus))? * Q::from_integer(a.into());
        }
        ensure!(sum == s.sum, "sum for q={} recomputes to {sum}", s.q);
        let unit = !sum.is_zero() && !(sum.numer() % BigInt::from(5)).is_zero();
        ensure!(unit == s.holds, "q={}: unit test {unit} but search says {}", s.q, s.holds);
        writeln!(report, "q={} b={} sum={} holds={}", s.q, s.generator, s.sum, s.holds).unwrap();
    }
    let Some(w) = witness else {
        return Ok(("no witness up to 200 (exhaustive negative)".into(), report));
    };
    ensure!(is_prime(w.q) && w.q % 5 == 1, "witness {} is not a prime 1 mod 5", w.q);
    ensure!(w.generator == smallest_primitive_root(w.q), "witness generator");
    let next = tw_scan(&curve, 5, 1000)
        .into_iter()
        .find(|r| r.status == TwStatus::TaylorWiles && r.ell != w.q)
        .ok_or("no Taylor-Wiles prime below 1000")?;
    let a = a_ell(curve.ainvs(), next.ell as i64);
    ensure!((a - 2).rem_euclid(5) != 0, "{} is not Taylor-Wiles (a = {a})", next.ell);
    let seq = lib(PrimeSequence::new(&curve, 5, &[w.q, next.ell], None, 1))?;
    let (out, nu) = lib(arithmetic_run(&curve, &symbols, &seq, &[1, 2], 1))?;
    ensure!(out.identities_hold(), "identity fails");
    ensure!(out.tower_compatible.iter().all(|&b| b), "tower {:?}", out.tower_compatible);
    let fit = out.fit.as_ref().ok_or("no fit")?;
    ensure!(fit.mu == Valuation::integer(0) && fit.lambda == Valuation::integer(1), "fit ({}, {})", fit.mu, fit.lambda);
    let u = lib(unit_criteria(&lib(nu.reduce_uniform(1))?))?;
    ensure!(u.class == UnitClass::MuZeroLambdaOne, "unit criteria give {:?}", u.class);
    for r in &out.reports {
        writeln!(report, "n={}: valuation {}", r.factors, r.valuation).unwrap();
    }
    Ok((format!("witness q1 = {} (sum {}), sequence ({}, {}), fit (0, 1), D-criterion agrees", w.q, w.sum, w.q, next.ell), report))
}

// ---------------------------------------------------------------------

type Criterion = fn() -> Res<(String, String)>;

fn line(n: u32, passed: bool, elapsed: Duration, detail: &str) -> bool {
    println!("criterion {n}: {} ({:.1}s) {detail}", if passed { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    passed
}

fn main() -> ExitCode {
    let skip_extended = std::env::var_os("ACCEPTANCE_SKIP_EXTENDED").is_some_and(|v| v != "0");
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let selected = |n: u32| only.as_ref().map_or(true, |o| o.contains(&n));
    let criteria: [(u32, Criterion, Duration); 6] = [
        (1, criterion_1, Duration::from_secs(30)),
        (2, criterion_2, Duration::from_secs(120)),
        (3, criterion_3, Duration::from_secs(120)),
        (4, criterion_4, Duration::from_secs(60)),
        (5, criterion_5, Duration::from_secs(120)),
        (6, criterion_6, Duration::from_secs(600)),
    ];
    let mut all_passed = true;

    let mut reports = BTreeMap::new();
    for (n, f, limit) in criteria.iter().filter(|c| selected(c.0)) {
        let start = Instant::now();
        let out = Outcome::from(f());
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let detail = if in_time { out.detail } else { format!("{} [over the {}s limit]", out.detail, limit.as_secs()) };
        all_passed &= line(*n, out.passed && in_time, elapsed, &detail);
        reports.insert(*n, out.report);
    }

    if selected(7) && skip_extended {
        println!("criterion 7: SKIP (ACCEPTANCE_SKIP_EXTENDED set)");
    } else if selected(7) {
        let start = Instant::now();
        let out = Outcome::from(criterion_7());
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(1800);
        all_passed &= line(7, out.passed && in_time, elapsed, &out.detail);
    }

    if selected(8) {
        let start = Instant::now();
        let differing: Vec<u32> = criteria
            .iter()
            .filter(|(n, f, _)| reports.get(n).is_some_and(|first| Outcome::from(f()).report != *first))
            .map(|c| c.0)
            .collect();
        let detail = if differing.is_empty() {
            let keys: Vec<u32> = reports.keys().copied().collect();
            format!("criteria {keys:?} rerun: {} report bytes identical", reports.values().map(String::len).sum::<usize>())
        } else {
            format!("reports differ on rerun for criteria {differing:?}")
        };
        all_passed &= line(8, differing.is_empty(), start.elapsed(), &detail);
    }

    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
