//! The digit map `∏ Z/p^{m_i} → Z/p^{Σ m_i}` and what it transports:
//! vertical measures, truncated Amice polynomials, the closed-form Fourier
//! coefficients of `ψ∘d`, the weighted evaluation identity and the
//! cyclotomic unit weights.

use serde::{Deserialize, Serialize};

use crate::cyclotomic::{ipow, CyclicAccumulator, Cyclotomic};
use crate::error::{Error, Result};
use crate::measure::{CharacterTuple, FactorMap, GroupShape, Measure};
use crate::scalar::Scalar;

/// `d(a) = Σ a_i p^{m_1+…+m_{i−1}}`: the first factor is the lowest digit.
pub fn digit_forward(shape: &GroupShape, tuple: &[u64]) -> Result<u64> {
    shape.index_of(tuple)?;
    let mut x = 0u64;
    let mut place = 1u64;
    for (i, &a) in tuple.iter().enumerate() {
        x += a * place;
        place *= shape.factor_order(i) as u64;
    }
    Ok(x)
}

/// Inverse of [`digit_forward`]; `x` is read modulo `p^{Σ m_i}`.
pub fn digit_inverse(shape: &GroupShape, x: u64) -> Vec<u64> {
    let mut x = x % shape.size() as u64;
    let mut t = Vec::with_capacity(shape.rank());
    for i in 0..shape.rank() {
        let n = shape.factor_order(i) as u64;
        t.push(x % n);
        x /= n;
    }
    t
}

/// `M_i = m_1 + … + m_i` for `i = 0..=n`.
fn partial_sums(shape: &GroupShape) -> Vec<u32> {
    let mut s = vec![0u32];
    for &m in shape.exponents() {
        s.push(s.last().unwrap() + m);
    }
    s
}

/// A measure on `Z/p^M`, coefficient of `[a]` at index `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalMeasure<Q: Scalar> {
    prime: u32,
    exponent: u32,
    coeffs: Vec<Cyclotomic<Q>>,
}

impl<Q: Scalar> VerticalMeasure<Q> {
    pub fn new(prime: u32, exponent: u32, coeffs: Vec<Cyclotomic<Q>>) -> Result<Self> {
        let n = ipow(prime, exponent);
        if coeffs.len() != n {
            return Err(Error::BadLength { got: coeffs.len(), expected: n });
        }
        Ok(VerticalMeasure { prime, exponent, coeffs })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn coeffs(&self) -> &[Cyclotomic<Q>] {
        &self.coeffs
    }

    pub fn total_mass(&self) -> Cyclotomic<Q> {
        let mut acc = Cyclotomic::zero(self.prime, 0);
        for c in &self.coeffs {
            acc.add_assign_ref(c);
        }
        acc
    }

    /// Pushforward along `Z/p^M → Z/p^{M'}`.
    pub fn reduce_to(&self, exponent: u32) -> Result<Self> {
        if exponent > self.exponent {
            return Err(Error::InvalidMap(format!("cannot reduce Z/p^{} to Z/p^{exponent}", self.exponent)));
        }
        let n = ipow(self.prime, exponent);
        let mut coeffs = vec![Cyclotomic::zero(self.prime, 0); n];
        for (a, c) in self.coeffs.iter().enumerate() {
            coeffs[a % n].add_assign_ref(c);
        }
        Ok(VerticalMeasure { prime: self.prime, exponent, coeffs })
    }
}

/// Relabels coefficients along the digit map.
pub fn verticalize<Q: Scalar>(nu: &Measure<Q>) -> VerticalMeasure<Q> {
    let shape = nu.shape();
    let mut coeffs = vec![Cyclotomic::zero(shape.prime(), 0); shape.size()];
    for (i, c) in nu.coeffs().iter().enumerate() {
        let g = shape.tuple_of(i);
        let d = digit_forward(shape, &g).expect("valid tuple") as usize;
        coeffs[d] = c.clone();
    }
    VerticalMeasure { prime: shape.prime(), exponent: shape.total_exponent(), coeffs }
}

/// Inverse of [`verticalize`] for a shape with `Σ m_i = M`.
pub fn horizontalize<Q: Scalar>(v: &VerticalMeasure<Q>, shape: &GroupShape) -> Result<Measure<Q>> {
    if shape.prime() != v.prime || shape.total_exponent() != v.exponent {
        return Err(Error::ShapeMismatch(format!(
            "shape {:?} does not have total exponent {}",
            shape.exponents(),
            v.exponent
        )));
    }
    Ok(Measure::from_fn(shape, |g| {
        v.coeffs[digit_forward(shape, g).expect("valid tuple") as usize].clone()
    }))
}

/// Truncated power series `Σ b_k T^k` (`k < p^M`) standing for a residue
/// modulo `(1+T)^{p^M} − 1`.
///
/// `scale` is the ramification index `e` of the coefficient ring: the
/// synthetic layer uses it to report `μ` on the `v_p` scale.
#[derive(Clone, Debug, PartialEq)]
pub struct AmicePolynomial<Q: Scalar> {
    prime: u32,
    truncation: u32,
    scale: u32,
    coeffs: Vec<Cyclotomic<Q>>,
}

impl<Q: Scalar> AmicePolynomial<Q> {
    pub fn new(prime: u32, truncation: u32, scale: u32, coeffs: Vec<Cyclotomic<Q>>) -> Result<Self> {
        let n = ipow(prime, truncation);
        if coeffs.len() != n {
            return Err(Error::BadLength { got: coeffs.len(), expected: n });
        }
        if scale == 0 {
            return Err(Error::InvalidInvariants("scale e must be at least 1".into()));
        }
        Ok(AmicePolynomial { prime, truncation, scale, coeffs })
    }

    /// From a possibly shorter coefficient list, padded with zeros.
    pub fn from_partial(prime: u32, truncation: u32, scale: u32, mut coeffs: Vec<Cyclotomic<Q>>) -> Result<Self> {
        let n = ipow(prime, truncation);
        if coeffs.len() > n {
            return Err(Error::BadLength { got: coeffs.len(), expected: n });
        }
        coeffs.resize(n, Cyclotomic::zero(prime, 0));
        Self::new(prime, truncation, scale, coeffs)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn with_scale(mut self, scale: u32) -> Self {
        self.scale = scale.max(1);
        self
    }

    pub fn coeffs(&self) -> &[Cyclotomic<Q>] {
        &self.coeffs
    }

    pub fn coefficient_level(&self) -> u32 {
        self.coeffs.iter().map(|c| c.level()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `f(0)`.
    pub fn constant_term(&self) -> &Cyclotomic<Q> {
        &self.coeffs[0]
    }

    /// `f'(0)`, the coefficient of `T`.
    pub fn derivative_at_zero(&self) -> Cyclotomic<Q> {
        self.coeffs.get(1).cloned().unwrap_or_else(|| Cyclotomic::zero(self.prime, 0))
    }

    /// Horner evaluation at an arbitrary cyclotomic `T`.
    pub fn evaluate(&self, t: &Cyclotomic<Q>) -> Cyclotomic<Q> {
        let mut acc = Cyclotomic::zero(self.prime, 0);
        for b in self.coeffs.iter().rev() {
            acc = &(&acc * t) + b;
        }
        acc
    }

    /// `f(ζ_{p^level}^unit − 1)`.
    ///
    /// Horner's rule in `Q[x]/(x^{p^level} − 1)`, where multiplying by
    /// `ζ^unit − 1` is a rotation minus the identity; one reduction at the end.
    pub fn evaluate_at_root(&self, level: u32, unit: i64) -> Cyclotomic<Q> {
        if self.coeffs.iter().any(|c| c.level() > level) {
            return self.evaluate(&Cyclotomic::zeta_minus_one(self.prime, level, unit));
        }
        let n = ipow(self.prime, level);
        let shift = unit.rem_euclid(n as i64) as usize;
        let mut acc = vec![Q::zero(); n];
        let mut scratch = vec![Q::zero(); n];
        for b in self.coeffs.iter().rev() {
            for i in 0..n {
                let mut v = acc[(i + n - shift) % n].clone();
                v.sub_ref(&acc[i]);
                scratch[i] = v;
            }
            std::mem::swap(&mut acc, &mut scratch);
            let stride = ipow(self.prime, level - b.level());
            for (k, c) in b.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    acc[k * stride].add_ref(c);
                }
            }
        }
        Cyclotomic::from_cyclic(self.prime, level, acc).expect("buffer has the cyclic length")
    }

    /// Back to Dirac coefficients by substituting `T = S − 1`.
    pub fn to_vertical(&self) -> VerticalMeasure<Q> {
        let n = self.coeffs.len();
        let mut g: Vec<Cyclotomic<Q>> = vec![Cyclotomic::zero(self.prime, 0); n];
        for (step, b) in self.coeffs.iter().rev().enumerate() {
            // g ← g·(S − 1) + b; only the first `step` entries can be nonzero
            for a in (1..=step.min(n - 1)).rev() {
                let (lo, hi) = g.split_at_mut(a);
                let mut v = lo[a - 1].clone();
                v.sub_assign_ref(&hi[0]);
                hi[0] = v;
            }
            g[0] = -&g[0];
            g[0].add_assign_ref(b);
        }
        VerticalMeasure { prime: self.prime, exponent: self.truncation, coeffs: g }
    }

    /// Residue modulo `(1+T)^{p^{M'}} − 1`.
    pub fn reduce_to(&self, truncation: u32) -> Result<Self> {
        let v = self.to_vertical().reduce_to(truncation)?;
        Ok(amice(&v).with_scale(self.scale))
    }
}

/// `Σ_a c_a (1+T)^a`.
pub fn amice<Q: Scalar>(v: &VerticalMeasure<Q>) -> AmicePolynomial<Q> {
    let n = v.coeffs.len();
    let mut f: Vec<Cyclotomic<Q>> = vec![Cyclotomic::zero(v.prime, 0); n];
    for c in v.coeffs.iter().rev() {
        // f ← f·(1+T) + c
        for k in (1..n).rev() {
            let (lo, hi) = f.split_at_mut(k);
            if !lo[k - 1].is_zero() {
                hi[0].add_assign_ref(&lo[k - 1]);
            }
        }
        f[0].add_assign_ref(c);
    }
    AmicePolynomial { prime: v.prime, truncation: v.exponent, scale: 1, coeffs: f }
}

/// On-disk form of an Amice polynomial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmiceFile {
    pub prime: u32,
    pub truncation: u32,
    pub scale: u32,
    pub level: u32,
    pub coefficients: Vec<Vec<String>>,
}

impl<Q: Scalar> AmicePolynomial<Q> {
    pub fn to_file(&self) -> AmiceFile {
        let level = self.coefficient_level();
        AmiceFile {
            prime: self.prime,
            truncation: self.truncation,
            scale: self.scale,
            level,
            coefficients: self.coeffs.iter().map(|c| c.embed_to_level(level).unwrap().coeff_strings()).collect(),
        }
    }

    pub fn from_file(file: &AmiceFile) -> Result<Self> {
        let coeffs = file
            .coefficients
            .iter()
            .map(|row| {
                let parsed = row
                    .iter()
                    .map(|s| s.parse::<Q>().map_err(|_| Error::Config(format!("bad coefficient `{s}`"))))
                    .collect::<Result<Vec<Q>>>()?;
                Ok(Cyclotomic::from_coeffs(file.prime, file.level, parsed)?.normalized())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.prime, file.truncation, file.scale, coeffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("polynomial serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }
}

/// Additive character of `Z_p` with `ψ(1) = ζ_{p^N}^unit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdditiveCharacter {
    pub prime: u32,
    pub conductor: u32,
    pub unit: u64,
}

impl AdditiveCharacter {
    pub fn new(prime: u32, conductor: u32, unit: u64) -> Result<Self> {
        if conductor > 0 && unit % prime as u64 == 0 {
            return Err(Error::NotCoprime(unit as i64, prime as u64));
        }
        let n = ipow(prime, conductor) as u64;
        Ok(AdditiveCharacter { prime, conductor, unit: unit % n.max(1) })
    }

    /// The character with `ψ(1) = ζ_{p^N}`.
    pub fn standard(prime: u32, conductor: u32) -> Self {
        AdditiveCharacter { prime, conductor, unit: if conductor == 0 { 0 } else { 1 } }
    }

    /// Exponent `e` with `ψ(x) = ζ_{p^N}^e`.
    pub fn exponent_at(&self, x: u64) -> i64 {
        let n = ipow(self.prime, self.conductor) as u128;
        ((self.unit as u128 * x as u128) % n) as i64
    }

    pub fn value<Q: Scalar>(&self, x: u64) -> Cyclotomic<Q> {
        Cyclotomic::zeta_power(self.prime, self.conductor, self.exponent_at(x))
    }

    /// `ψ(p^k)` as `(level, exponent)`: a root of unity of order `p^{N−k}`.
    pub fn at_prime_power(&self, k: u32) -> (u32, i64) {
        if k >= self.conductor {
            (0, 0)
        } else {
            (self.conductor - k, self.unit as i64)
        }
    }
}

/// `(ζ^a − 1)/(ζ^b − 1)` at `level`, exactly and without division,
/// whenever `ζ^a` lies in the group generated by `ζ^b ≠ 1`: writing
/// `ζ^a = (ζ^b)^t` it is the geometric sum `Σ_{k<t} ζ^{bk}`.
pub fn geometric_ratio<Q: Scalar>(p: u32, level: u32, a: i64, b: i64) -> Result<Cyclotomic<Q>> {
    let n = ipow(p, level) as i64;
    let (a, b) = (a.rem_euclid(n), b.rem_euclid(n));
    if b == 0 {
        return Err(Error::DegenerateUnit("denominator ζ^0 − 1 vanishes".into()));
    }
    // b = p^v·u with u a unit; ⟨ζ^b⟩ = ⟨ζ^{p^v}⟩.
    let mut v = 0u32;
    let mut u = b;
    while u % p as i64 == 0 {
        u /= p as i64;
        v += 1;
    }
    let pv = ipow(p, v) as i64;
    if a % pv != 0 {
        return Err(Error::DegenerateUnit(format!("ζ^{a} is not a power of ζ^{b} at level {level}")));
    }
    let modulus = n / pv;
    let t = ((a / pv) % modulus * mod_inverse(u % modulus, modulus)).rem_euclid(modulus);
    let mut acc = CyclicAccumulator::new(p, level);
    for k in 0..t {
        acc.add_scalar_at(&Q::one(), b * k);
    }
    Ok(acc.finish())
}

/// Inverse of `a` modulo `m` (`gcd(a, m) = 1`).
pub fn mod_inverse(a: i64, m: i64) -> i64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert_eq!(old_r, 1, "{a} is not invertible mod {m}");
    old_s.rem_euclid(m)
}

/// A root of unity `ζ_{p^level}^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootOfUnity {
    pub level: u32,
    pub exponent: i64,
}

impl RootOfUnity {
    pub fn new(level: u32, exponent: i64) -> Self {
        RootOfUnity { level, exponent }
    }

    /// Exponent at a finer level.
    fn exponent_at(&self, p: u32, level: u32) -> i64 {
        self.exponent * ipow(p, level - self.level) as i64
    }
}

/// `(ζ_{p^j} − 1)/(ζ_{p^j}·ζ̄ − 1)` for a root of unity `ζ` of order
/// smaller than `p^j`: a cyclotomic unit.
pub fn unit_weight<Q: Scalar>(p: u32, j: u32, zeta: RootOfUnity) -> Result<Cyclotomic<Q>> {
    unit_weight_twisted(p, j, 1, zeta)
}

/// As [`unit_weight`] with `ζ_{p^j}` replaced by `ζ_{p^j}^s`.
pub fn unit_weight_twisted<Q: Scalar>(p: u32, j: u32, s: i64, zeta: RootOfUnity) -> Result<Cyclotomic<Q>> {
    let level = j.max(zeta.level);
    let z = zeta.exponent_at(p, level).rem_euclid(ipow(p, level) as i64);
    if z == 0 {
        return Ok(Cyclotomic::one(p, 0));
    }
    if j < 1 || zeta.level >= j && !root_order_below(p, zeta, j) {
        return Err(Error::DegenerateUnit(format!(
            "ζ_{{{p}^{}}}^{} does not have order below p^{j}",
            zeta.level, zeta.exponent
        )));
    }
    let a = s * ipow(p, level - j) as i64;
    geometric_ratio(p, level, a, a - z)
}

fn root_order_below(p: u32, zeta: RootOfUnity, j: u32) -> bool {
    // order of ζ_{p^l}^e is p^{l − v_p(e)}
    let mut e = zeta.exponent.rem_euclid(ipow(p, zeta.level) as i64);
    if e == 0 {
        return true;
    }
    let mut l = zeta.level;
    while e % p as i64 == 0 {
        e /= p as i64;
        l -= 1;
    }
    l < j
}

/// Brute-force Fourier coefficient `Σ_a ψ(d(a))·χ̄(a)` over the group.
pub fn fourier_coefficient_direct<Q: Scalar>(
    shape: &GroupShape,
    psi: &AdditiveCharacter,
    chi: &CharacterTuple,
) -> Result<Cyclotomic<Q>> {
    shape.index_of(chi.exponents())?;
    let p = shape.prime();
    let l = psi.conductor.max(shape.max_exponent());
    let n = ipow(p, l) as i64;
    let psi_lift = ipow(p, l - psi.conductor) as i64;
    let chi_lift = ipow(p, l - shape.max_exponent()) as i64;
    let mut hist = vec![0i64; n as usize];
    for g in shape.elements() {
        let d = digit_forward(shape, &g)?;
        let e = psi.exponent_at(d) * psi_lift - chi.value_exponent(shape, &g) * chi_lift;
        hist[e.rem_euclid(n) as usize] += 1;
    }
    Cyclotomic::from_cyclic(p, l, hist.into_iter().map(Q::from_i64).collect())
}

/// The closed form as an unevaluated fraction
/// `scalar·∏(ζ^{a_i} − 1) / ∏(ζ^{b_i} − 1)` with `ζ = ζ_{p^level}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub prime: u32,
    pub level: u32,
    pub scalar: i64,
    /// The exponents `a_i`.
    pub numerators: Vec<i64>,
    /// The exponents `b_i`.
    pub denominators: Vec<i64>,
}

impl ClosedForm {
    pub fn numerator_values<Q: Scalar>(&self) -> Vec<Cyclotomic<Q>> {
        self.numerators.iter().map(|&a| Cyclotomic::zeta_minus_one(self.prime, self.level, a)).collect()
    }

    pub fn denominator_values<Q: Scalar>(&self) -> Vec<Cyclotomic<Q>> {
        self.denominators.iter().map(|&b| Cyclotomic::zeta_minus_one(self.prime, self.level, b)).collect()
    }
}

/// `M_{n−1}`, the lower end of the conductor window.
fn check_window(shape: &GroupShape, psi: &AdditiveCharacter) -> Result<u32> {
    let n = shape.rank();
    if n == 0 || psi.prime != shape.prime() {
        return Err(Error::ShapeMismatch("closed form needs a nonempty shape over the same prime".into()));
    }
    let high = shape.total_exponent();
    let low = high - shape.exponents()[n - 1];
    if psi.conductor <= low || psi.conductor > high {
        return Err(Error::ConductorWindow { conductor: psi.conductor, low, high });
    }
    Ok(low)
}

/// `χ_n = ψ^{p^{M_{n−1}}}`, the only case where the coefficient survives.
fn last_factor_matches(shape: &GroupShape, psi: &AdditiveCharacter, chi: &CharacterTuple, low: u32) -> bool {
    let n = shape.rank();
    let p = shape.prime();
    let m_n = shape.exponents()[n - 1];
    let k = psi.conductor - low;
    let target = (psi.unit as u128 * ipow(p, m_n - k) as u128 % ipow(p, m_n) as u128) as u64;
    chi.exponents()[n - 1] == target
}

pub fn closed_form_fraction(shape: &GroupShape, psi: &AdditiveCharacter, chi: &CharacterTuple) -> Result<Option<ClosedForm>> {
    let low = check_window(shape, psi)?;
    shape.index_of(chi.exponents())?;
    if !last_factor_matches(shape, psi, chi, low) {
        return Ok(None);
    }
    let sums = partial_sums(shape);
    let p = shape.prime();
    let level = psi.conductor;
    let mut numerators = Vec::new();
    let mut denominators = Vec::new();
    for i in 0..shape.rank() - 1 {
        // ψ(p^{M_i}) − 1 over ψ(p^{M_{i−1}})·χ̄_i(1) − 1
        let chi_bar = -(chi.exponents()[i] as i64) * ipow(p, level - shape.exponents()[i]) as i64;
        numerators.push(psi.unit as i64 * ipow(p, sums[i + 1]) as i64);
        denominators.push(psi.unit as i64 * ipow(p, sums[i]) as i64 + chi_bar);
    }
    let scalar = ipow(p, shape.exponents()[shape.rank() - 1]) as i64;
    Ok(Some(ClosedForm { prime: p, level, scalar, numerators, denominators }))
}

/// `⟨ψ∘d, χ⟩` from the closed form, evaluated division-free.
pub fn closed_form_fourier<Q: Scalar>(
    shape: &GroupShape,
    psi: &AdditiveCharacter,
    chi: &CharacterTuple,
) -> Result<Cyclotomic<Q>> {
    let p = shape.prime();
    let Some(form) = closed_form_fraction(shape, psi, chi)? else {
        return Ok(Cyclotomic::zero(p, 0));
    };
    let mut acc = Cyclotomic::from_i64(p, 0, form.scalar);
    for (&a, &b) in form.numerators.iter().zip(&form.denominators) {
        acc = &acc * &geometric_ratio(p, form.level, a, b)?;
    }
    Ok(acc)
}

/// `d_*(ν)(ψ)` through the weighted character sum over the first `n`
/// factors, where `p^{M_n} < conductor(ψ) ≤ p^{M_{n+1}}`.
pub fn corollary_evaluation<Q: Scalar>(nu: &Measure<Q>, psi: &AdditiveCharacter) -> Result<Cyclotomic<Q>> {
    let shape = nu.shape();
    let p = shape.prime();
    let sums = partial_sums(shape);
    let big_n = psi.conductor;
    if big_n == 0 {
        return Ok(nu.total_mass());
    }
    let Some(n) = (0..shape.rank()).find(|&n| sums[n] < big_n && big_n <= sums[n + 1]) else {
        return Err(Error::ConductorWindow { conductor: big_n, low: 0, high: shape.total_exponent() });
    };
    // Push forward to the first n+1 factors.
    let maps: Vec<FactorMap> = shape
        .exponents()
        .iter()
        .enumerate()
        .map(|(i, &m)| if i <= n { FactorMap::Reduce(m) } else { FactorMap::Delete })
        .collect();
    let head = shape.prefix(n + 1);
    let pushed = nu.pushforward(&head, &maps)?;
    let values = pushed.transform();

    let m_last = head.exponents()[n];
    let k = big_n - sums[n];
    let last = psi.unit as u128 * ipow(p, m_last - k) as u128 % ipow(p, m_last) as u128;
    let mut total = Cyclotomic::zero(p, 0);
    let front = head.prefix(n);
    for chi in front.elements() {
        let mut exps = chi.clone();
        exps.push(last as u64);
        let value = &values[head.index_of(&exps)?];
        if value.is_zero() {
            continue;
        }
        let mut weight = Cyclotomic::one(p, 0);
        for i in 0..n {
            let a = psi.unit as i64 * ipow(p, sums[i]) as i64;
            let chi_bar = -(chi[i] as i64) * ipow(p, big_n - head.exponents()[i]) as i64;
            weight = &weight * &geometric_ratio(p, big_n, a, a + chi_bar)?;
        }
        total.add_assign_ref(&(&weight * value));
    }
    let prefactor = geometric_ratio::<Q>(
        p,
        big_n,
        psi.unit as i64 * ipow(p, sums[n]) as i64,
        psi.unit as i64,
    )?
    .scale(&(Q::one() / Q::from_i64(ipow(p, sums[n]) as i64)));
    Ok(&prefactor * &total)
}

/// `Σ_a c_a ψ(a)`: the defining value of `d_*(ν)` at `ψ`.
pub fn vertical_evaluation<Q: Scalar>(v: &VerticalMeasure<Q>, psi: &AdditiveCharacter) -> Cyclotomic<Q> {
    let level = psi.conductor.max(v.coeffs.iter().map(|c| c.level()).max().unwrap_or(0));
    let lift = ipow(v.prime, level - psi.conductor) as i64;
    let mut acc = CyclicAccumulator::new(v.prime, level);
    for (a, c) in v.coeffs.iter().enumerate() {
        acc.add_rotated(c, psi.exponent_at(a as u64) * lift);
    }
    acc.finish()
}
