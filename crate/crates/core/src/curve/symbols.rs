//! Plus/minus modular symbols `⟨a/q⟩^±` from period integrals.
//!
//! `⟨a/q⟩` is `F(a/q) = Σ a_n/n·e^{2πina/q}` read through the Fricke
//! involution: at the interior point `τ = a/q + it` the involution maps
//! `τ` to a point `a'/q + it` at the same height, so one table of
//! residue-class sums at height `t` serves every numerator `a` mod `q`.
//! Values are divided by `Ω^±` and rationally reconstructed.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digit::mod_inverse;
use crate::error::{Error, Result};
use crate::real::{Complex, Real};

use super::{EllipticCurve, Periods};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "1" | "+1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            other => Err(Error::Config(format!("bad sign `{other}`"))),
        }
    }
}

/// Best rational with denominator at most `bound` by continued fractions.
pub fn best_rational(x: f64, bound: u64) -> BigRational {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > bound as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    BigRational::new(BigInt::from(h1), BigInt::from(k1.max(1)))
}

/// Rational with denominator at most `bound` within `tol` of `x`.
pub fn reconstruct<R: Real>(x: &R, bound: u64, tol: &R) -> Option<BigRational> {
    let q = best_rational(x.to_f64(), bound);
    let approx = R::from_rational(&q, x.precision());
    ((x.clone() - approx).abs() < *tol).then_some(q)
}

/// `(a mod q, q, sign) → value`, persisted as `a,q,sign,num,den` rows in a
/// file whose name carries the curve, its conductor and the bound.
#[derive(Debug, Default)]
pub struct SymbolCache {
    entries: Mutex<BTreeMap<(u64, u64, Sign), BigRational>>,
    path: Option<PathBuf>,
}

impl SymbolCache {
    pub fn in_memory() -> Self {
        SymbolCache::default()
    }

    pub fn file_name(label: &str, conductor: u64, bound: u64) -> String {
        format!("symbols-{label}-N{conductor}-B{bound}.csv")
    }

    /// Opens (or prepares) the cache file in `dir`.
    pub fn open(dir: &Path, label: &str, conductor: u64, bound: u64) -> Result<Self> {
        let path = dir.join(Self::file_name(label, conductor, bound));
        let cache = SymbolCache { entries: Mutex::new(BTreeMap::new()), path: Some(path.clone()) };
        if path.exists() {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(&path)?;
            let mut map = cache.entries.lock().expect("symbol cache");
            for rec in reader.records() {
                let rec = rec?;
                let parse = |i: usize| -> Result<&str> {
                    rec.get(i).ok_or_else(|| Error::Config(format!("short row in {}", path.display())))
                };
                let bad = |what: &str| Error::Config(format!("bad {what} in {}", path.display()));
                let q: u64 = parse(1)?.parse().map_err(|_| bad("q"))?;
                let a: i64 = parse(0)?.parse().map_err(|_| bad("a"))?;
                let sign: Sign = parse(2)?.parse()?;
                let num: BigInt = parse(3)?.parse().map_err(|_| bad("numerator"))?;
                let den: BigInt = parse(4)?.parse().map_err(|_| bad("denominator"))?;
                if den == BigInt::from(0) || q == 0 {
                    return Err(bad("row"));
                }
                map.insert((a.rem_euclid(q as i64) as u64, q, sign), BigRational::new(num, den));
            }
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, a: u64, q: u64, sign: Sign) -> Option<BigRational> {
        self.entries.lock().expect("symbol cache").get(&(a, q, sign)).cloned()
    }

    pub fn contains_denominator(&self, q: u64, sign: Sign) -> bool {
        let map = self.entries.lock().expect("symbol cache");
        map.range((0, q, Sign::Plus)..).any(|(&(_, qq, s), _)| qq == q && s == sign)
    }

    pub fn insert_all(&self, rows: impl IntoIterator<Item = ((u64, u64, Sign), BigRational)>) {
        let mut map = self.entries.lock().expect("symbol cache");
        for (k, v) in rows {
            map.entry(k).or_insert(v);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("symbol cache").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the whole cache, sorted, to its file (if any).
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let map = self.entries.lock().expect("symbol cache");
        let tmp = path.with_extension("csv.tmp");
        {
            let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            writeln!(out, "a,q,sign,num,den")?;
            let mut rows: Vec<_> = map.iter().collect();
            rows.sort_by_key(|((a, q, s), _)| (*q, *a, *s));
            for ((a, q, s), v) in rows {
                writeln!(out, "{a},{q},{s},{},{}", v.numer(), v.denom())?;
            }
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Numerically computed symbols for one curve at one working precision.
pub struct ModularSymbols<R: Real> {
    curve: EllipticCurve,
    prec: R::Precision,
    periods: Periods<R>,
    fricke: i8,
    bound: u64,
    tolerance: R,
    cache: SymbolCache,
}

/// Which branch of the involution trick applies to `q`.
enum Cusp {
    /// `gcd(q, N) = 1`: Fricke involution, height `1/(q√N)`.
    Coprime,
    /// `N | q`: an element of `Γ_0(N)`, height `1/q`.
    Multiple,
}

impl<R: Real> ModularSymbols<R> {
    /// Symbols with the default denominator bound `8·T²·N`.
    pub fn new(curve: &EllipticCurve, prec: R::Precision) -> Result<Self> {
        Self::with_bound(curve, prec, curve.default_denominator_bound())
    }

    pub fn with_bound(curve: &EllipticCurve, prec: R::Precision, bound: u64) -> Result<Self> {
        let periods = Periods::compute(curve, prec)?;
        let digits = R::digits(prec) as i32;
        let tolerance = R::from_f64(10f64.powi(-(2 * digits / 3).max(6)), prec);
        let mut engine = ModularSymbols {
            curve: curve.clone(),
            prec,
            periods,
            fricke: curve.fricke_sign().unwrap_or(0),
            bound,
            tolerance,
            cache: SymbolCache::in_memory(),
        };
        if engine.fricke == 0 {
            engine.fricke = engine.detect_fricke_sign()?;
        }
        Ok(engine)
    }

    /// Attaches a persistent cache in `dir`.
    pub fn with_cache_dir(mut self, dir: &Path) -> Result<Self> {
        self.cache = SymbolCache::open(dir, self.curve.label(), self.curve.conductor(), self.bound)?;
        Ok(self)
    }

    pub fn curve(&self) -> &EllipticCurve {
        &self.curve
    }

    pub fn periods(&self) -> &Periods<R> {
        &self.periods
    }

    pub fn precision(&self) -> R::Precision {
        self.prec
    }

    pub fn fricke_sign(&self) -> i8 {
        self.fricke
    }

    pub fn denominator_bound(&self) -> u64 {
        self.bound
    }

    pub fn cache(&self) -> &SymbolCache {
        &self.cache
    }

    pub fn save_cache(&self) -> Result<()> {
        self.cache.save()
    }

    fn cusp_kind(&self, q: u64) -> Result<Cusp> {
        let n = self.curve.conductor();
        match q.gcd(&n) {
            1 => Ok(Cusp::Coprime),
            g if g == n => Ok(Cusp::Multiple),
            _ => Err(Error::InvalidCurve(format!("cusps with gcd(q, N) = {} are not supported (q = {q})", q.gcd(&n)))),
        }
    }

    /// Tries both involution signs and keeps the one under which a few
    /// small symbols all reconstruct.
    fn detect_fricke_sign(&mut self) -> Result<i8> {
        let n = self.curve.conductor();
        let probes: Vec<u64> = (1..40u64).filter(|q| q.gcd(&n) == 1).take(4).collect();
        let mut good = Vec::new();
        for eps in [1i8, -1] {
            self.fricke = eps;
            let ok = probes.iter().all(|&q| {
                self.raw_table(q)
                    .map(|rows| {
                        rows.iter().all(|(_, v)| {
                            reconstruct(&(v.re.clone() / self.periods.omega_plus.clone()), self.bound, &self.tolerance)
                                .is_some()
                        })
                    })
                    .unwrap_or(false)
            });
            if ok {
                good.push(eps);
            }
        }
        self.fricke = 0;
        match good.as_slice() {
            [eps] => Ok(*eps),
            [] => Err(Error::FrickeSign("no sign gives rational symbols".into())),
            _ => Err(Error::FrickeSign("both signs give rational symbols".into())),
        }
    }

    /// Unnormalized values `F(a/q)` (complex) for every `a` coprime to `q`.
    pub fn raw_table(&self, q: u64) -> Result<Vec<(u64, Complex<R>)>> {
        if q == 0 {
            return Err(Error::Config("denominator must be positive".into()));
        }
        let prec = self.prec;
        let n_cond = self.curve.conductor();
        let kind = self.cusp_kind(q)?;
        let q_r = R::from_i64(q as i64, prec);
        let t = match kind {
            Cusp::Coprime => R::one(prec) / (q_r * R::from_i64(n_cond as i64, prec).sqrt()),
            Cusp::Multiple => R::one(prec) / q_r,
        };
        let two_pi = R::pi(prec) * R::from_i64(2, prec);
        let decay = (two_pi.clone() * t.clone()).to_f64();
        let eps = R::epsilon(prec).to_f64().max(1e-300);
        // 2|x|^n/(1 − |x|) < eps, with a little slack for the a_n/n growth
        let x_f = (-decay).exp();
        let terms = ((eps * (1.0 - x_f) / 2.0).ln() / -decay).ceil() as usize + 16;
        let an = self.curve.an_table(terms);

        // c_r = Σ_{n ≡ r (q)} a_n/n·x^n, powers re-anchored every 1024 terms
        let x = (-(two_pi.clone() * t.clone())).exp();
        let mut classes: Vec<R> = vec![R::zero(prec); q as usize];
        let mut power = R::one(prec);
        for n in 1..=terms {
            if n % 1024 == 0 {
                power = (-(two_pi.clone() * t.clone() * R::from_i64(n as i64, prec))).exp();
            } else {
                power = power * x.clone();
            }
            if an[n] != 0 {
                let term = power.clone() * R::from_i64(an[n], prec) / R::from_i64(n as i64, prec);
                let r = n % q as usize;
                classes[r] = classes[r].clone() + term;
            }
        }
        let roots: Vec<Complex<R>> = (0..q).map(|k| Complex::root_of_unity(k as i64, q, prec)).collect();
        let coprime: Vec<u64> = (0..q).filter(|a| a.gcd(&q) == 1).collect();
        let g = |a: u64| -> Complex<R> {
            let mut acc = Complex::zero(prec);
            for (r, c) in classes.iter().enumerate() {
                let w = &roots[((r as u64 * a) % q) as usize];
                acc = acc + w.scale(c);
            }
            acc
        };
        let values: BTreeMap<u64, Complex<R>> = coprime.par_iter().map(|&a| (a, g(a))).collect();
        let eps_w = R::from_i64(self.fricke as i64, prec);
        let qi = q as i64;
        Ok(coprime
            .iter()
            .map(|&a| {
                let v = match kind {
                    Cusp::Coprime => {
                        let partner = (-mod_inverse((n_cond as i64 % qi) * a as i64 % qi, qi)).rem_euclid(qi) as u64;
                        values[&a].clone() - values[&partner].scale(&eps_w)
                    }
                    Cusp::Multiple => {
                        let partner = (-mod_inverse(a as i64, qi)).rem_euclid(qi) as u64;
                        values[&a].clone() - values[&partner].clone()
                    }
                };
                (a, v)
            })
            .collect())
    }

    /// Fills the cache for denominator `q` (both signs where possible).
    fn fill(&self, q: u64) -> Result<()> {
        let rows = self.raw_table(q)?;
        let mut out = Vec::with_capacity(2 * rows.len());
        for (a, v) in rows {
            let plus = v.re.clone() / self.periods.omega_plus.clone();
            match reconstruct(&plus, self.bound, &self.tolerance) {
                Some(x) => out.push(((a, q, Sign::Plus), x)),
                None => {
                    return Err(Error::Reconstruction { a: a as i64, q, sign: 1, value: plus.to_f64() });
                }
            }
            let minus = v.im.clone() / self.periods.omega_minus.clone();
            if let Some(x) = reconstruct(&minus, self.bound, &self.tolerance) {
                out.push(((a, q, Sign::Minus), x));
            }
        }
        self.cache.insert_all(out);
        Ok(())
    }

    /// Computes every missing denominator, in parallel.
    pub fn prefetch(&self, qs: &[u64]) -> Result<()> {
        let mut missing: Vec<u64> = qs.iter().copied().filter(|&q| !self.cache.contains_denominator(q, Sign::Plus)).collect();
        missing.sort_unstable();
        missing.dedup();
        missing.par_iter().map(|&q| self.fill(q)).collect::<Result<Vec<()>>>()?;
        Ok(())
    }

    /// `⟨a/q⟩^±` for any integers (reduced to lowest terms first).
    pub fn symbol(&self, a: i64, q: u64, sign: Sign) -> Result<BigRational> {
        if q == 0 {
            return Err(Error::Config("denominator must be positive".into()));
        }
        let g = (a.unsigned_abs()).gcd(&q).max(1);
        let (q, a) = (q / g, a / g as i64);
        let a = a.rem_euclid(q as i64) as u64;
        if let Some(v) = self.cache.get(a, q, sign) {
            return Ok(v);
        }
        if !self.cache.contains_denominator(q, Sign::Plus) {
            self.fill(q)?;
        }
        self.cache.get(a, q, sign).ok_or_else(|| {
            let v = self.raw_table(q).ok().and_then(|rows| rows.into_iter().find(|(b, _)| *b == a)).map(|(_, v)| {
                match sign {
                    Sign::Plus => (v.re / self.periods.omega_plus.clone()).to_f64(),
                    Sign::Minus => (v.im / self.periods.omega_minus.clone()).to_f64(),
                }
            });
            Error::Reconstruction { a: a as i64, q, sign: sign.as_i8(), value: v.unwrap_or(f64::NAN) }
        })
    }

    /// `⟨a/q⟩^+` for `a = 0..q` (all residues, lowest terms taken per entry).
    pub fn plus_row(&self, q: u64) -> Result<Vec<BigRational>> {
        let mut qs: Vec<u64> = (1..=q).filter(|d| q % d == 0).collect();
        qs.sort_unstable();
        self.prefetch(&qs)?;
        (0..q as i64).map(|a| self.symbol(a, q, Sign::Plus)).collect()
    }

    /// `τ(χ̄)·L(E, χ, 1)/Ω⁺` straight from the twisted Dirichlet series and
    /// its functional equation, for a character of conductor `D` prime to
    /// `N`; `chi(n)` is `None` when `gcd(n, D) > 1`.
    pub fn analytic_twist(&self, d: u64, chi: impl Fn(u64) -> Option<Complex<R>> + Sync) -> Result<Complex<R>> {
        let prec = self.prec;
        let n_cond = self.curve.conductor();
        if d.gcd(&n_cond) != 1 {
            return Err(Error::InvalidCharacter("conductor must be prime to N".into()));
        }
        let w = self.curve.root_number().map(|s| s as i64).unwrap_or(-(self.fricke as i64));
        let two_pi = R::pi(prec) * R::from_i64(2, prec);
        let h = two_pi.clone() / (R::from_i64(d as i64, prec) * R::from_i64(n_cond as i64, prec).sqrt());
        let eps = R::epsilon(prec).to_f64().max(1e-300);
        let decay = h.to_f64();
        let terms = ((eps * (1.0 - (-decay).exp()) / 2.0).ln() / -decay).ceil() as usize + 16;
        let an = self.curve.an_table(terms);
        let mut s1 = Complex::zero(prec);
        let mut s2 = Complex::zero(prec);
        let x = (-h.clone()).exp();
        let mut power = R::one(prec);
        for n in 1..=terms {
            if n % 1024 == 0 {
                power = (-(h.clone() * R::from_i64(n as i64, prec))).exp();
            } else {
                power = power * x.clone();
            }
            if an[n] == 0 {
                continue;
            }
            if let Some(c) = chi(n as u64) {
                let coeff = power.clone() * R::from_i64(an[n], prec) / R::from_i64(n as i64, prec);
                s1 = s1 + c.scale(&coeff);
                s2 = s2 + c.conj().scale(&coeff);
            }
        }
        let gauss = |conj: bool| {
            let mut acc = Complex::zero(prec);
            for a in 1..d {
                if let Some(c) = chi(a) {
                    let c = if conj { c.conj() } else { c };
                    acc = acc + c * Complex::root_of_unity(a as i64, d, prec);
                }
            }
            acc
        };
        let tau = gauss(false);
        let tau_bar = gauss(true);
        let chi_n = chi(n_cond % d).ok_or_else(|| Error::InvalidCharacter("χ(N) undefined".into()))?;
        let factor = (chi_n * tau.clone() * tau).scale(&(R::from_i64(w, prec) / R::from_i64(d as i64, prec)));
        let l_value = s1 + factor * s2;
        Ok((tau_bar * l_value).scale(&(R::one(prec) / self.periods.omega_plus.clone())))
    }
}
