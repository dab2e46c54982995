//! Elliptic curves over `Q`: Fourier coefficients by point counting,
//! Taylor–Wiles classification, periods and modular symbols.

mod period;
mod symbols;

pub use period::{cubic_roots, Periods};
pub use symbols::{reconstruct, ModularSymbols, Sign, SymbolCache};

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::RwLock;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk curve description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub label: String,
    pub ainvs: [i64; 5],
    pub conductor: u64,
    /// `a_ℓ ∈ {0, ±1}` at each prime dividing the conductor.
    #[serde(default)]
    pub bad_primes: BTreeMap<u64, i64>,
    #[serde(default = "one")]
    pub torsion_order: u64,
    /// Eigenvalue of the Fricke involution `W_N`.
    #[serde(default)]
    pub fricke_sign: Option<i8>,
    #[serde(default)]
    pub rank: Option<u32>,
}

fn one() -> u64 {
    1
}

impl CurveConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("curve config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read curve config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn vp_i128(mut n: i128, p: i128) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Standard invariants `b2, b4, b6, b8, c4, c6, Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: i128,
    pub b4: i128,
    pub b6: i128,
    pub b8: i128,
    pub c4: i128,
    pub c6: i128,
    pub disc: i128,
}

impl Invariants {
    pub fn of(a: [i64; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = a.map(|x| x as i128);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = b2 * b2 - 24 * b4;
        let c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
        let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
        Invariants { b2, b4, b6, b8, c4, c6, disc }
    }
}

/// Whether some change of variables with `u = p` keeps the model integral.
fn reducible_at(a: [i64; 5], p: i128) -> bool {
    let [a1, a2, a3, a4, a6] = a.map(|x| x as i128);
    let u = p;
    let (u2, u3) = (u * u, u * u * u);
    let (u4, u6) = (u2 * u2, u3 * u3);
    for s in 0..u {
        if (a1 + 2 * s) % u != 0 {
            continue;
        }
        for r in 0..u2 {
            if (a2 - s * a1 + 3 * r - s * s) % u2 != 0 {
                continue;
            }
            for t in 0..u3 {
                if (a3 + r * a1 + 2 * t) % u3 != 0 {
                    continue;
                }
                let a4p = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
                let a6p = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
                if a4p % u4 == 0 && a6p % u6 == 0 {
                    return true;
                }
            }
        }
    }
    false
}

/// A curve with its coefficient caches.
#[derive(Debug)]
pub struct EllipticCurve {
    config: CurveConfig,
    invariants: Invariants,
    an: RwLock<Vec<i64>>,
}

impl Clone for EllipticCurve {
    fn clone(&self) -> Self {
        EllipticCurve {
            config: self.config.clone(),
            invariants: self.invariants,
            an: RwLock::new(self.an.read().expect("an cache").clone()),
        }
    }
}

impl EllipticCurve {
    /// Validates the configuration: nonsingular, bad primes consistent
    /// with the discriminant, and a minimal model.
    pub fn new(config: CurveConfig) -> Result<Self> {
        let invariants = Invariants::of(config.ainvs);
        if invariants.disc == 0 {
            return Err(Error::InvalidCurve(format!("{}: singular model", config.label)));
        }
        if config.conductor == 0 {
            return Err(Error::InvalidCurve("conductor must be positive".into()));
        }
        for ell in prime_factors(config.conductor) {
            if invariants.disc % ell as i128 != 0 {
                return Err(Error::InvalidCurve(format!("{ell} divides the conductor but not the discriminant")));
            }
            match config.bad_primes.get(&ell) {
                None => return Err(Error::MissingBadPrime(ell)),
                Some(a) if !(-1..=1).contains(a) => {
                    return Err(Error::InvalidCurve(format!("a_{ell} = {a} is not in {{0, ±1}}")))
                }
                _ => {}
            }
        }
        for &ell in config.bad_primes.keys() {
            if config.conductor % ell != 0 {
                return Err(Error::InvalidCurve(format!("bad prime {ell} does not divide the conductor")));
            }
        }
        if let Some(s) = config.fricke_sign {
            if s != 1 && s != -1 {
                return Err(Error::InvalidCurve(format!("fricke_sign must be ±1, got {s}")));
            }
        }
        let curve = EllipticCurve { config, invariants, an: RwLock::new(vec![0, 1]) };
        curve.check_minimal()?;
        Ok(curve)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        Self::new(CurveConfig::load(path)?)
    }

    pub fn config(&self) -> &CurveConfig {
        &self.config
    }

    pub fn label(&self) -> &str {
        &self.config.label
    }

    pub fn conductor(&self) -> u64 {
        self.config.conductor
    }

    pub fn ainvs(&self) -> [i64; 5] {
        self.config.ainvs
    }

    pub fn invariants(&self) -> &Invariants {
        &self.invariants
    }

    pub fn discriminant(&self) -> i128 {
        self.invariants.disc
    }

    pub fn torsion_order(&self) -> u64 {
        self.config.torsion_order
    }

    /// `8·T²·N`.
    pub fn default_denominator_bound(&self) -> u64 {
        8 * self.config.torsion_order.pow(2) * self.config.conductor
    }

    pub fn is_minimal_at(&self, p: u64) -> bool {
        let inv = &self.invariants;
        let p = p as i128;
        if vp_i128(inv.disc, p) < 12 {
            return true;
        }
        if p >= 5 {
            return !(vp_i128(inv.c4, p) >= 4 && vp_i128(inv.c6, p) >= 6);
        }
        !reducible_at(self.config.ainvs, p)
    }

    pub fn check_minimal(&self) -> Result<()> {
        let d = self.invariants.disc.unsigned_abs();
        for p in prime_factors(d.min(u64::MAX as u128) as u64) {
            if !self.is_minimal_at(p) {
                return Err(Error::NonMinimalModel(p));
            }
        }
        Ok(())
    }

    /// `#E(F_ℓ)` including the point at infinity.
    pub fn point_count(&self, ell: u64) -> u64 {
        let [a1, a2, a3, a4, a6] = self.config.ainvs.map(|x| x.rem_euclid(ell as i64) as u64);
        let l = ell;
        let rhs = |x: u64| ((x * x % l) * x + a2 * (x * x % l) + a4 * x + a6) % l;
        if ell == 2 {
            let mut count = 1;
            for x in 0..2 {
                for y in 0..2 {
                    if (y * y + a1 * x * y + a3 * y) % 2 == rhs(x) {
                        count += 1;
                    }
                }
            }
            return count;
        }
        // y² + (a1 x + a3) y = rhs  ⇔  (2y + a1 x + a3)² = (a1 x + a3)² + 4 rhs
        let mut is_square = vec![false; l as usize];
        for y in 0..l {
            is_square[(y * y % l) as usize] = true;
        }
        let mut count = 1;
        for x in 0..l {
            let h = (a1 * x + a3) % l;
            let d = (h * h + 4 * rhs(x)) % l;
            count += if d == 0 {
                1
            } else if is_square[d as usize] {
                2
            } else {
                0
            };
        }
        count
    }

    /// `a_ℓ = ℓ + 1 − #E(F_ℓ)` at a good prime.
    pub fn ap(&self, ell: u64) -> Result<i64> {
        if self.config.conductor % ell == 0 {
            return Err(Error::BadPrime(ell));
        }
        Ok(ell as i64 + 1 - self.point_count(ell) as i64)
    }

    /// `a_ℓ` at any prime.
    pub fn a_prime(&self, ell: u64) -> i64 {
        match self.config.bad_primes.get(&ell) {
            Some(&a) => a,
            None => self.ap(ell).expect("good prime"),
        }
    }

    /// Replaces the coefficient cache with externally supplied values
    /// (`n, a_n` rows); missing entries are recomputed on demand.
    pub fn load_an_csv(&self, path: &Path) -> Result<()> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let mut rows: Vec<(usize, i64)> = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            if rec.get(0).map(|s| s.starts_with('#') || s == "n").unwrap_or(true) {
                continue;
            }
            let n: usize = rec[0].parse().map_err(|_| Error::Config(format!("bad n in {}", path.display())))?;
            let a: i64 = rec
                .get(1)
                .ok_or_else(|| Error::Config("missing a_n column".into()))?
                .parse()
                .map_err(|_| Error::Config(format!("bad a_n in {}", path.display())))?;
            rows.push((n, a));
        }
        rows.sort();
        let mut table = vec![0i64];
        for (i, (n, a)) in rows.into_iter().enumerate() {
            if n != i + 1 {
                return Err(Error::Config(format!("a_n table must list n = 1, 2, … without gaps (found {n})")));
            }
            table.push(a);
        }
        *self.an.write().expect("an cache") = table;
        Ok(())
    }

    /// `a_1, …, a_bound` (index 0 unused), extending the cache if needed.
    pub fn an_table(&self, bound: usize) -> Vec<i64> {
        {
            let cached = self.an.read().expect("an cache");
            if cached.len() > bound {
                return cached[..=bound].to_vec();
            }
        }
        let mut cache = self.an.write().expect("an cache");
        if cache.len() <= bound {
            *cache = self.compute_an(bound, &cache);
        }
        cache[..=bound].to_vec()
    }

    pub fn an(&self, n: usize) -> i64 {
        self.an_table(n)[n]
    }

    fn compute_an(&self, bound: usize, known: &[i64]) -> Vec<i64> {
        let mut spf = vec![0u32; bound + 1];
        for i in 2..=bound {
            if spf[i] == 0 {
                let mut j = i;
                while j <= bound {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let primes: Vec<u64> = (2..=bound).filter(|&i| spf[i] as usize == i).map(|i| i as u64).collect();
        let ap: BTreeMap<u64, i64> = primes
            .par_iter()
            .map(|&l| {
                let a = if (l as usize) < known.len() { known[l as usize] } else { self.a_prime(l) };
                (l, a)
            })
            .collect();
        let n_cond = self.config.conductor;
        let mut an = vec![0i64; bound + 1];
        an[1] = 1;
        for n in 2..=bound {
            if n < known.len() {
                an[n] = known[n];
                continue;
            }
            let l = spf[n] as usize;
            let mut m = n;
            let mut lk = 1usize;
            while m % l == 0 {
                m /= l;
                lk *= l;
            }
            an[n] = if m > 1 {
                an[m] * an[lk]
            } else if lk == l {
                ap[&(l as u64)]
            } else {
                let good = n_cond % l as u64 != 0;
                ap[&(l as u64)] * an[n / l] - if good { l as i64 * an[n / (l * l)] } else { 0 }
            };
        }
        an
    }

    /// `ℓ ∤ N`, `ℓ ≡ 1 mod p` and `a_ℓ ≢ 2 mod p`.
    pub fn is_taylor_wiles(&self, p: u64, ell: u64) -> bool {
        if !is_prime(ell) || self.config.conductor % ell == 0 || ell % p != 1 {
            return false;
        }
        (self.a_prime(ell) - 2).rem_euclid(p as i64) != 0
    }

    /// The `W_N` eigenvalue: configured, or `−a_N` for prime conductor.
    pub fn fricke_sign(&self) -> Option<i8> {
        if let Some(s) = self.config.fricke_sign {
            return Some(s);
        }
        let n = self.config.conductor;
        is_prime(n).then(|| -self.config.bad_primes[&n] as i8)
    }

    /// Sign of the functional equation, `−ε_N`.
    pub fn root_number(&self) -> Option<i8> {
        self.fricke_sign().map(|s| -s)
    }

    pub fn has_good_ordinary_reduction(&self, p: u64) -> bool {
        self.config.conductor % p != 0 && self.a_prime(p).rem_euclid(p as i64) != 0
    }

    /// Cheap sanity data: Hasse bound and torsion divisibility at primes
    /// up to `bound`.
    pub fn sanity_failures(&self, bound: u64) -> Vec<String> {
        let mut out = Vec::new();
        for ell in (2..=bound).filter(|&l| is_prime(l) && self.config.conductor % l != 0) {
            let a = self.a_prime(ell);
            if (a * a) as u64 > 4 * ell {
                out.push(format!("Hasse bound fails at {ell}: a = {a}"));
            }
            let count = self.point_count(ell);
            let t = self.config.torsion_order;
            if ell.gcd(&t) == 1 && ell > 2 && count % t != 0 {
                out.push(format!("#E(F_{ell}) = {count} is not divisible by the torsion order {t}"));
            }
        }
        out
    }
}

/// Built-in curve data.
pub fn preset(label: &str) -> Option<CurveConfig> {
    let (ainvs, conductor, bad, torsion, fricke, rank) = match label {
        "11a1" => ([0, -1, 1, -10, -20], 11, (11u64, 1i64), 5, -1, 0),
        "37a1" => ([0, 0, 1, -1, 0], 37, (37, -1), 1, 1, 1),
        _ => return None,
    };
    Some(CurveConfig {
        label: label.to_string(),
        ainvs,
        conductor,
        bad_primes: BTreeMap::from([bad]),
        torsion_order: torsion,
        fricke_sign: Some(fricke),
        rank: Some(rank),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e11() -> EllipticCurve {
        EllipticCurve::new(preset("11a1").unwrap()).unwrap()
    }

    /// Count by trying every `(x, y)`.
    fn naive_count(a: [i64; 5], l: i64) -> i64 {
        let [a1, a2, a3, a4, a6] = a;
        let mut c = 1;
        for x in 0..l {
            for y in 0..l {
                if (y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6).rem_euclid(l) == 0 {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn ap_matches_naive_count() {
        let e = e11();
        for l in [2i64, 3, 5, 7, 13, 17, 19, 23, 31] {
            assert_eq!(e.ap(l as u64).unwrap(), l + 1 - naive_count(e.ainvs(), l), "ℓ = {l}");
        }
        assert_eq!(e.ap(2).unwrap(), -2);
        assert_eq!(e.ap(7).unwrap(), -2);
        assert_eq!(e.ap(13).unwrap(), 4);
        assert!(matches!(e.ap(11), Err(Error::BadPrime(11))));
    }

    #[test]
    fn an_recurrences() {
        let e = e11();
        let t = e.an_table(50);
        assert_eq!(t[1], 1);
        assert_eq!(t[4], 2);
        assert_eq!(t[14], 4);
        assert_eq!(t[11], 1);
        assert_eq!(e.an_table(121)[121], 1);
        for m in 1..50usize {
            for n in 1..50usize {
                if m * n <= 50 && m.gcd(&n) == 1 {
                    assert_eq!(t[m * n], t[m] * t[n]);
                }
            }
        }
    }

    #[test]
    fn taylor_wiles_examples() {
        let e = e11();
        assert!(e.is_taylor_wiles(3, 7));
        assert!(!e.is_taylor_wiles(5, 31));
        assert!(!e.is_taylor_wiles(3, 5));
        assert!(!e.is_taylor_wiles(5, 11));
    }

    #[test]
    fn validation() {
        let mut c = preset("11a1").unwrap();
        c.bad_primes.clear();
        assert!(matches!(EllipticCurve::new(c), Err(Error::MissingBadPrime(11))));
        let mut s = preset("11a1").unwrap();
        s.ainvs = [0, 0, 0, 0, 0];
        assert!(EllipticCurve::new(s).is_err());
        // y² = x³ + 5⁴x + 5⁶ is a scaled copy of y² = x³ + x + 1
        let scaled = CurveConfig {
            label: "scaled".into(),
            ainvs: [0, 0, 0, 625, 15625],
            conductor: 496,
            bad_primes: BTreeMap::from([(2, 0), (31, 1)]),
            torsion_order: 1,
            fricke_sign: None,
            rank: None,
        };
        assert!(matches!(EllipticCurve::new(scaled), Err(Error::NonMinimalModel(5))));
        // same idea at p = 3 needs the brute-force search
        let mut cfg = preset("11a1").unwrap();
        cfg.ainvs = [0, 0, 0, 81, 729];
        let e = EllipticCurve { config: cfg, invariants: Invariants::of([0, 0, 0, 81, 729]), an: RwLock::new(vec![0, 1]) };
        assert!(!e.is_minimal_at(3));
        assert!(e11().is_minimal_at(11));
    }

    #[test]
    fn sanity_and_signs() {
        let e = e11();
        assert!(e.sanity_failures(200).is_empty());
        assert_eq!(e.fricke_sign(), Some(-1));
        assert_eq!(e.discriminant(), -161051);
        let e37 = EllipticCurve::new(preset("37a1").unwrap()).unwrap();
        assert_eq!(e37.root_number(), Some(-1));
        assert_eq!(e37.discriminant(), 37);
    }
}
