//! Finite-level horizontal measures on `∏ Z/p^{m_i}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cyclotomic::{ipow, CyclicAccumulator, Cyclotomic};
use crate::error::{Error, Result};
use crate::scalar::{RationalScalar, Scalar};

/// The group `∏_{i} Z/p^{m_i}`; elements are tuples `(a_1, …, a_n)`.
///
/// Dense tables are indexed row-major: the last factor varies fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupShape {
    prime: u32,
    exponents: Vec<u32>,
}

impl GroupShape {
    pub fn new(prime: u32, exponents: Vec<u32>) -> Result<Self> {
        if prime < 2 {
            return Err(Error::ShapeMismatch(format!("prime {prime} < 2")));
        }
        if exponents.contains(&0) {
            return Err(Error::ShapeMismatch("factor exponents must be at least 1".into()));
        }
        Ok(GroupShape { prime, exponents })
    }

    /// `(Z/p^m)^n`.
    pub fn uniform(prime: u32, m: u32, n: usize) -> Result<Self> {
        Self::new(prime, vec![m; n])
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Number of factors.
    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    pub fn factor_order(&self, i: usize) -> usize {
        ipow(self.prime, self.exponents[i])
    }

    pub fn size(&self) -> usize {
        ipow(self.prime, self.total_exponent())
    }

    pub fn total_exponent(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn max_exponent(&self) -> u32 {
        self.exponents.iter().copied().max().unwrap_or(0)
    }

    /// The first `k` factors.
    pub fn prefix(&self, k: usize) -> GroupShape {
        GroupShape { prime: self.prime, exponents: self.exponents[..k].to_vec() }
    }

    fn strides(&self) -> Vec<usize> {
        let n = self.rank();
        let mut s = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.factor_order(i + 1);
        }
        s
    }

    pub fn index_of(&self, tuple: &[u64]) -> Result<usize> {
        if tuple.len() != self.rank() {
            return Err(Error::ShapeMismatch(format!("tuple of length {} for {} factors", tuple.len(), self.rank())));
        }
        let mut idx = 0usize;
        for (i, &a) in tuple.iter().enumerate() {
            let n = self.factor_order(i);
            if a as usize >= n {
                return Err(Error::IndexOutOfRange(format!("coordinate {a} in Z/{n}")));
            }
            idx = idx * n + a as usize;
        }
        Ok(idx)
    }

    pub fn tuple_of(&self, mut index: usize) -> Vec<u64> {
        let mut t = vec![0u64; self.rank()];
        for i in (0..self.rank()).rev() {
            let n = self.factor_order(i);
            t[i] = (index % n) as u64;
            index /= n;
        }
        t
    }

    /// All elements in table order.
    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.size()).map(move |i| self.tuple_of(i))
    }

    /// All characters in table order.
    pub fn characters(&self) -> impl Iterator<Item = CharacterTuple> + '_ {
        self.elements().map(|e| CharacterTuple { exponents: e })
    }
}

/// A character `χ(a) = ∏ ζ_{p^{m_i}}^{k_i a_i}` given by its exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterTuple {
    exponents: Vec<u64>,
}

impl CharacterTuple {
    pub fn new(shape: &GroupShape, exponents: Vec<u64>) -> Result<Self> {
        shape.index_of(&exponents)?;
        Ok(CharacterTuple { exponents })
    }

    pub fn trivial(shape: &GroupShape) -> Self {
        CharacterTuple { exponents: vec![0; shape.rank()] }
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    /// `χ̄`.
    pub fn conj(&self, shape: &GroupShape) -> Self {
        let exponents = self
            .exponents
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let n = shape.factor_order(i) as u64;
                (n - k % n) % n
            })
            .collect();
        CharacterTuple { exponents }
    }

    /// `e` with `χ(g) = ζ_{p^L}^e`, `L` the largest factor exponent.
    pub fn value_exponent(&self, shape: &GroupShape, g: &[u64]) -> i64 {
        let l = shape.max_exponent();
        let n = ipow(shape.prime(), l) as u128;
        let mut e: u128 = 0;
        for (i, (&k, &a)) in self.exponents.iter().zip(g).enumerate() {
            let lift = ipow(shape.prime(), l - shape.exponents()[i]) as u128;
            e = (e + (k as u128 * a as u128 % n) * lift) % n;
        }
        e as i64
    }

    /// `χ(g)` as a cyclotomic number.
    pub fn value<Q: Scalar>(&self, shape: &GroupShape, g: &[u64]) -> Cyclotomic<Q> {
        Cyclotomic::zeta_power(shape.prime(), shape.max_exponent(), self.value_exponent(shape, g))
    }
}

/// Per-factor surjection used by [`Measure::pushforward`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorMap {
    /// Reduction `Z/p^m → Z/p^{m'}` with the given `m'`.
    Reduce(u32),
    /// Projection away from this factor.
    Delete,
}

/// Dense coefficient table on a [`GroupShape`].
#[derive(Clone, Debug)]
pub struct Measure<Q> {
    shape: GroupShape,
    coeffs: Vec<Cyclotomic<Q>>,
}

impl<Q: Scalar> PartialEq for Measure<Q> {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.coeffs == other.coeffs
    }
}

impl<Q: Scalar> Measure<Q> {
    pub fn zero(shape: &GroupShape) -> Self {
        let z = Cyclotomic::zero(shape.prime(), 0);
        Measure { shape: shape.clone(), coeffs: vec![z; shape.size()] }
    }

    pub fn dirac(shape: &GroupShape, g: &[u64]) -> Result<Self> {
        let mut m = Self::zero(shape);
        let i = shape.index_of(g)?;
        m.coeffs[i] = Cyclotomic::one(shape.prime(), 0);
        Ok(m)
    }

    pub fn from_coeffs(shape: &GroupShape, coeffs: Vec<Cyclotomic<Q>>) -> Result<Self> {
        if coeffs.len() != shape.size() {
            return Err(Error::BadLength { got: coeffs.len(), expected: shape.size() });
        }
        if let Some(c) = coeffs.iter().find(|c| c.prime() != shape.prime()) {
            return Err(Error::PrimeMismatch(c.prime(), shape.prime()));
        }
        Ok(Measure { shape: shape.clone(), coeffs })
    }

    pub fn from_fn(shape: &GroupShape, mut f: impl FnMut(&[u64]) -> Cyclotomic<Q>) -> Self {
        let coeffs = shape.elements().map(|g| f(&g)).collect();
        Measure { shape: shape.clone(), coeffs }
    }

    pub fn shape(&self) -> &GroupShape {
        &self.shape
    }

    pub fn coeffs(&self) -> &[Cyclotomic<Q>] {
        &self.coeffs
    }

    pub fn coeff(&self, g: &[u64]) -> Result<&Cyclotomic<Q>> {
        Ok(&self.coeffs[self.shape.index_of(g)?])
    }

    pub fn set_coeff(&mut self, g: &[u64], value: Cyclotomic<Q>) -> Result<()> {
        let i = self.shape.index_of(g)?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Largest level among the coefficients.
    pub fn coefficient_level(&self) -> u32 {
        self.coeffs.iter().map(|c| c.level()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check_shape(&self, chi_shape: &GroupShape) -> Result<()> {
        if *chi_shape != self.shape {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", chi_shape.exponents(), self.shape.exponents())));
        }
        Ok(())
    }

    /// `Σ_g ν(g)·χ(g)`.
    pub fn evaluate(&self, chi: &CharacterTuple) -> Result<Cyclotomic<Q>> {
        if chi.exponents().len() != self.shape.rank() {
            return Err(Error::ShapeMismatch(format!("character with {} factors", chi.exponents().len())));
        }
        self.shape.index_of(chi.exponents())?;
        let level = self.shape.max_exponent().max(self.coefficient_level());
        let lift = ipow(self.shape.prime(), level - self.shape.max_exponent()) as i64;
        let mut acc = CyclicAccumulator::new(self.shape.prime(), level);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let g = self.shape.tuple_of(i);
            acc.add_rotated(c, chi.value_exponent(&self.shape, &g) * lift);
        }
        Ok(acc.finish())
    }

    /// Total mass `ν(1)`, the value at the trivial character.
    pub fn total_mass(&self) -> Cyclotomic<Q> {
        let mut acc = Cyclotomic::zero(self.shape.prime(), 0);
        for c in &self.coeffs {
            acc.add_assign_ref(c);
        }
        acc
    }

    /// Values at every character, in table order, by a separable transform.
    pub fn transform(&self) -> Vec<Cyclotomic<Q>> {
        let mut data = self.coeffs.clone();
        for axis in 0..self.shape.rank() {
            data = transform_axis(&self.shape, &data, axis, 1);
        }
        data
    }

    /// The unique measure with the given value at every character.
    pub fn fourier_inverse(shape: &GroupShape, values: &HashMap<CharacterTuple, Cyclotomic<Q>>) -> Result<Self> {
        let mut dense = Vec::with_capacity(shape.size());
        for chi in shape.characters() {
            match values.get(&chi) {
                Some(v) => dense.push(v.clone()),
                None => return Err(Error::MissingCharacter(chi.exponents().to_vec())),
            }
        }
        Self::fourier_inverse_dense(shape, dense)
    }

    /// As [`Measure::fourier_inverse`] with values listed in table order.
    pub fn fourier_inverse_dense(shape: &GroupShape, values: Vec<Cyclotomic<Q>>) -> Result<Self> {
        if values.len() != shape.size() {
            return Err(Error::BadLength { got: values.len(), expected: shape.size() });
        }
        let mut data = values;
        for axis in 0..shape.rank() {
            data = transform_axis(shape, &data, axis, -1);
        }
        let inv = Q::one() / Q::from_i64(shape.size() as i64);
        let coeffs = data.into_iter().map(|c| c.scale(&inv)).collect();
        Measure::from_coeffs(shape, coeffs)
    }

    /// Image under per-factor reductions or deletions.
    pub fn pushforward(&self, target: &GroupShape, maps: &[FactorMap]) -> Result<Self> {
        if maps.len() != self.shape.rank() {
            return Err(Error::InvalidMap(format!("{} maps for {} factors", maps.len(), self.shape.rank())));
        }
        let mut derived = Vec::new();
        for (i, map) in maps.iter().enumerate() {
            match *map {
                FactorMap::Delete => {}
                FactorMap::Reduce(m) => {
                    if m == 0 || m > self.shape.exponents()[i] {
                        return Err(Error::InvalidMap(format!(
                            "cannot reduce Z/{}^{} to Z/{}^{}",
                            self.shape.prime(),
                            self.shape.exponents()[i],
                            self.shape.prime(),
                            m
                        )));
                    }
                    derived.push(m);
                }
            }
        }
        if target.prime() != self.shape.prime() || target.exponents() != derived.as_slice() {
            return Err(Error::InvalidMap(format!(
                "maps induce exponents {:?}, target has {:?}",
                derived,
                target.exponents()
            )));
        }
        let mut out = Self::zero(target);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let g = self.shape.tuple_of(i);
            let image: Vec<u64> = g
                .iter()
                .zip(maps)
                .filter_map(|(&a, map)| match map {
                    FactorMap::Delete => None,
                    FactorMap::Reduce(m) => Some(a % ipow(self.shape.prime(), *m) as u64),
                })
                .collect();
            let j = target.index_of(&image)?;
            out.coeffs[j].add_assign_ref(c);
        }
        Ok(out)
    }

    /// Pushforward deleting the last factor.
    pub fn delete_last_factor(&self) -> Result<Self> {
        let n = self.shape.rank();
        if n == 0 {
            return Err(Error::InvalidMap("no factor to delete".into()));
        }
        let mut maps: Vec<FactorMap> = self.shape.exponents().iter().map(|&m| FactorMap::Reduce(m)).collect();
        maps[n - 1] = FactorMap::Delete;
        self.pushforward(&self.shape.prefix(n - 1), &maps)
    }

    /// Pushforward reducing every factor to `Z/p^m`.
    pub fn reduce_uniform(&self, m: u32) -> Result<Self> {
        let maps: Vec<FactorMap> = self.shape.exponents().iter().map(|_| FactorMap::Reduce(m)).collect();
        self.pushforward(&GroupShape::uniform(self.shape.prime(), m, self.shape.rank())?, &maps)
    }

    /// Group-algebra product.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_shape(&other.shape)?;
        let mut out = Self::zero(&self.shape);
        let shape = &self.shape;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let g = shape.tuple_of(i);
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let h = shape.tuple_of(j);
                let sum: Vec<u64> =
                    (0..shape.rank()).map(|k| (g[k] + h[k]) % shape.factor_order(k) as u64).collect();
                let idx = shape.index_of(&sum)?;
                let prod = a * b;
                out.coeffs[idx].add_assign_ref(&prod);
            }
        }
        Ok(out)
    }

    /// Mass of the fibre over `prefix` of the projection to the first
    /// `prefix.len()` factors.
    pub fn fiber_mass(&self, prefix: &[u64]) -> Result<Cyclotomic<Q>> {
        let r = prefix.len();
        if r > self.shape.rank() {
            return Err(Error::IndexOutOfRange(format!("r = {r} exceeds {} factors", self.shape.rank())));
        }
        self.shape.prefix(r).index_of(prefix)?;
        let mut acc = Cyclotomic::zero(self.shape.prime(), 0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let g = self.shape.tuple_of(i);
            if g[..r] == *prefix {
                acc.add_assign_ref(c);
            }
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(&other.shape)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Measure { shape: self.shape.clone(), coeffs })
    }

    pub fn scale(&self, c: &Cyclotomic<Q>) -> Self {
        Measure { shape: self.shape.clone(), coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&Q) -> T) -> Measure<T> {
        Measure { shape: self.shape.clone(), coeffs: self.coeffs.iter().map(|c| c.map_coeffs(&f)).collect() }
    }
}

/// One-dimensional transform along `axis`: `out[k] = Σ_a in[a]·ζ^{sign·k·a}`.
fn transform_axis<Q: Scalar>(shape: &GroupShape, data: &[Cyclotomic<Q>], axis: usize, sign: i64) -> Vec<Cyclotomic<Q>> {
    let p = shape.prime();
    let n = shape.factor_order(axis);
    let m = shape.exponents()[axis];
    let stride = shape.strides()[axis];
    let level = data.iter().map(|c| c.level()).max().unwrap_or(0).max(m);
    let lift = ipow(p, level - m) as i64;
    let mut out = vec![Cyclotomic::zero(p, 0); data.len()];
    for base in 0..data.len() {
        if (base / stride) % n != 0 {
            continue;
        }
        for k in 0..n {
            let mut acc = CyclicAccumulator::new(p, level);
            for a in 0..n {
                let c = &data[base + a * stride];
                if !c.is_zero() {
                    acc.add_rotated(c, sign * (k * a % n) as i64 * lift);
                }
            }
            out[base + k * stride] = acc.finish();
        }
    }
    out
}

impl<Q: RationalScalar> Measure<Q> {
    /// True when every coefficient has rational (level-0) value.
    pub fn is_rational_valued(&self) -> bool {
        self.coeffs.iter().all(|c| c.as_scalar().is_some())
    }

    /// True when every coefficient is `p`-integral.
    pub fn is_p_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.to_big().is_p_integral())
    }
}

/// On-disk form of a measure: shape header plus row-major coefficients,
/// each a list of rational strings in the power basis of `ζ_{p^level}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureFile {
    pub prime: u32,
    pub exponents: Vec<u32>,
    pub level: u32,
    pub coefficients: Vec<Vec<String>>,
}

impl<Q: Scalar> Measure<Q> {
    pub fn to_file(&self) -> MeasureFile {
        let level = self.coefficient_level();
        let coefficients = self
            .coeffs
            .iter()
            .map(|c| c.embed_to_level(level).expect("level is maximal").coeff_strings())
            .collect();
        MeasureFile { prime: self.shape.prime(), exponents: self.shape.exponents().to_vec(), level, coefficients }
    }

    pub fn from_file(file: &MeasureFile) -> Result<Self> {
        let shape = GroupShape::new(file.prime, file.exponents.clone())?;
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
        Measure::from_coeffs(&shape, coeffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("measure serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }
}

/// The uniform measure `Σ_g [g]`.
pub fn uniform_measure<Q: Scalar>(shape: &GroupShape) -> Measure<Q> {
    Measure::from_fn(shape, |_| Cyclotomic::one(shape.prime(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type M = Measure<BigRational>;
    type C = Cyclotomic<BigRational>;

    fn shape(p: u32, e: &[u32]) -> GroupShape {
        GroupShape::new(p, e.to_vec()).unwrap()
    }

    #[test]
    fn dirac_evaluations() {
        let s = shape(3, &[1, 2]);
        let chi = CharacterTuple::new(&s, vec![1, 4]).unwrap();
        assert!(M::dirac(&s, &[0, 0]).unwrap().evaluate(&chi).unwrap().is_one());
        let d = M::dirac(&s, &[2, 5]).unwrap();
        // ζ_3^{2} ζ_9^{20} = ζ_9^{6+20}
        assert_eq!(d.evaluate(&chi).unwrap(), C::zeta_power(3, 2, 26));
        assert!(uniform_measure::<BigRational>(&s).evaluate(&chi).unwrap().is_zero());
    }

    #[test]
    fn pushforward_examples() {
        let s = shape(3, &[1, 1]);
        let d = M::dirac(&s, &[2, 1]).unwrap();
        assert_eq!(d.delete_last_factor().unwrap(), M::dirac(&shape(3, &[1]), &[2]).unwrap());
        let d9 = M::dirac(&shape(3, &[2]), &[5]).unwrap();
        let r = d9.pushforward(&shape(3, &[1]), &[FactorMap::Reduce(1)]).unwrap();
        assert_eq!(r, M::dirac(&shape(3, &[1]), &[2]).unwrap());
        assert!(d9.pushforward(&shape(3, &[1]), &[FactorMap::Reduce(3)]).is_err());
        assert!(d9.pushforward(&shape(3, &[2]), &[FactorMap::Reduce(1)]).is_err());
    }

    #[test]
    fn convolution_examples() {
        let s = shape(5, &[1, 1]);
        let a = M::dirac(&s, &[3, 4]).unwrap();
        let b = M::dirac(&s, &[4, 2]).unwrap();
        assert_eq!(a.convolve(&b).unwrap(), M::dirac(&s, &[2, 1]).unwrap());
        assert_eq!(M::dirac(&s, &[0, 0]).unwrap().convolve(&a).unwrap(), a);
    }

    #[test]
    fn inverse_examples() {
        let s = shape(3, &[1, 1]);
        let ones: HashMap<_, _> = s.characters().map(|c| (c, C::one(3, 0))).collect();
        assert_eq!(M::fourier_inverse(&s, &ones).unwrap(), M::dirac(&s, &[0, 0]).unwrap());
        let g = [2u64, 1];
        let vals: HashMap<_, _> = s.characters().map(|c| (c.clone(), c.value(&s, &g))).collect();
        assert_eq!(M::fourier_inverse(&s, &vals).unwrap(), M::dirac(&s, &g).unwrap());
        let mut missing = vals.clone();
        missing.remove(&CharacterTuple::trivial(&s));
        assert!(matches!(M::fourier_inverse(&s, &missing), Err(Error::MissingCharacter(_))));
    }

    #[test]
    fn fiber_examples() {
        let s = shape(3, &[1, 1]);
        let d = M::dirac(&s, &[2, 1]).unwrap();
        assert!(d.fiber_mass(&[2]).unwrap().is_one());
        assert!(d.fiber_mass(&[0]).unwrap().is_zero());
        assert_eq!(d.fiber_mass(&[]).unwrap(), d.evaluate(&CharacterTuple::trivial(&s)).unwrap());
        assert!(d.fiber_mass(&[3]).is_err());
        assert!(d.fiber_mass(&[0, 0, 0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = shape(3, &[1, 1]);
        let m = M::from_fn(&s, |g| C::zeta_power(3, 1, g[0] as i64).scale(&BigRational::new((g[1] as i64 + 1).into(), 7.into())));
        let back = M::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
