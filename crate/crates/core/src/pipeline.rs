//! Level-by-level moment runs on arithmetic and synthetic measures.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{EllipticCurve, ModularSymbols};
use crate::error::{Error, Result};
use crate::horizontal::{build_measure, level_compatibility_check, PrimeSequence};
use crate::measure::{GroupShape, Measure};
use crate::moments::{fit_invariants, identity_check, truncate, InvariantFit, MomentReport};
use crate::real::Real;
use crate::weierstrass::synthetic_measure;

/// Everything a moment run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub reports: Vec<MomentReport>,
    pub fit: Option<InvariantFit>,
    /// `ν_{k+1} → ν_k` checks, lowest first.
    pub tower_compatible: Vec<bool>,
    pub conventions: BTreeMap<String, String>,
}

impl RunOutcome {
    pub fn identities_hold(&self) -> bool {
        self.reports.iter().all(|r| r.identity_check)
    }
}

fn check_levels(levels: &[usize], available: usize) -> Result<Vec<usize>> {
    if levels.is_empty() {
        return Err(Error::Config("no levels requested".into()));
    }
    let mut ls = levels.to_vec();
    ls.sort_unstable();
    ls.dedup();
    if ls[0] == 0 || *ls.last().expect("non-empty") > available {
        return Err(Error::Config(format!("levels must lie in 1..={available}")));
    }
    Ok(ls)
}

/// Moments of `ν` restricted to the first `K` factors, for each `K`, with
/// every factor first reduced to `Z/p^m`.
pub fn moment_series(nu: &Measure<BigRational>, levels: &[usize], m: u32, e: u32) -> Result<RunOutcome> {
    let levels = check_levels(levels, nu.shape().rank())?;
    let p = nu.shape().prime();
    if nu.shape().exponents().iter().any(|&x| x < m) {
        return Err(Error::ShapeMismatch(format!("every factor needs exponent at least {m}")));
    }
    let uniform = nu.reduce_uniform(m)?;
    let reports: Vec<MomentReport> = levels
        .par_iter()
        .map(|&k| {
            let part = truncate(&uniform, k)?;
            let check = identity_check(&part, 1)?;
            Ok(MomentReport::new(k, check.moment, check.holds))
        })
        .collect::<Result<_>>()?;
    let fit = if reports.len() >= 2 && reports.iter().all(|r| !r.valuation.is_infinite()) {
        let points: Vec<_> = reports.iter().map(|r| (r.factors, r.valuation.clone())).collect();
        Some(fit_invariants(&points, p, m, e)?)
    } else {
        None
    };
    let reports = match &fit {
        Some(f) => reports.into_iter().map(|r| r.with_fit(f, p, m)).collect(),
        None => reports,
    };
    let mut conventions = BTreeMap::new();
    conventions.insert("last_character".into(), "chi_0(1) = zeta_{p^m}".into());
    conventions.insert("root_indexing".into(), "psi(1) = zeta_{p^{mK}}, K = number of factors".into());
    conventions.insert("digit_exponent".into(), m.to_string());
    conventions.insert("mu_scale".into(), "v_p".into());
    Ok(RunOutcome { reports, fit, tower_compatible: Vec::new(), conventions })
}

/// The arithmetic pipeline: measures for every prefix of `seq` up to the
/// largest level, tower checks between consecutive prefixes, then moments.
pub fn arithmetic_run<R: Real>(
    curve: &EllipticCurve,
    symbols: &ModularSymbols<R>,
    seq: &PrimeSequence,
    levels: &[usize],
    m: u32,
) -> Result<(RunOutcome, Measure<BigRational>)> {
    let levels = check_levels(levels, seq.len())?;
    let top = *levels.last().expect("non-empty");
    let seq = seq.prefix(top);
    let mut measures = Vec::with_capacity(top);
    for k in 1..=top {
        measures.push(build_measure(curve, symbols, &seq.prefix(k))?);
    }
    let tower = measures.windows(2).map(|w| level_compatibility_check(&w[1], &w[0])).collect::<Result<Vec<_>>>()?;
    let nu = measures.pop().expect("at least one level");
    let mut outcome = moment_series(&nu, &levels, m, 1)?;
    outcome.tower_compatible = tower;
    let c = &mut outcome.conventions;
    c.insert("curve".into(), curve.label().to_string());
    c.insert("period".into(), "Omega^+ = real Neron period (doubled when disc > 0)".into());
    c.insert("symbol".into(), "<x>^+ = Re F(x)/Omega^+, F(z) = sum a_n/n e^{2 pi i n z}, <0>^+ = L(E,1)/Omega^+".into());
    c.insert("primes".into(), format!("{:?}", seq.primes()));
    c.insert("generators".into(), format!("{:?}", seq.generators()));
    c.insert("r".into(), seq.r().to_string());
    c.insert("fricke_sign".into(), symbols.fricke_sign().to_string());
    c.insert("denominator_bound".into(), symbols.denominator_bound().to_string());
    Ok((outcome, nu))
}

/// Moment series of a synthetic measure with planted invariants on
/// `(m, …, m)` with `top` factors.
pub fn synthetic_run(p: u32, m: u32, top: usize, mu: u32, lambda: u64, e: u32, seed: u64, levels: &[usize]) -> Result<RunOutcome> {
    let shape = GroupShape::uniform(p, m, top)?;
    let nu: Measure<BigRational> = synthetic_measure(&shape, mu, lambda, e, seed)?;
    let mut out = moment_series(&nu, levels, m, e)?;
    out.conventions.insert("seed".into(), seed.to_string());
    out.conventions.insert("planted".into(), format!("mu = {mu}/{e}, lambda = {lambda}"));
    Ok(out)
}
