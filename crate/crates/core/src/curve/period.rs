use crate::error::Result;
use crate::real::{complex_agm, Complex, Real};

use super::EllipticCurve;

/// Real and imaginary periods of a minimal model.
///
/// `omega_plus` is the full real period (twice the real lattice generator
/// when `Δ > 0`, since the real locus then has two components);
/// `omega_minus` is the imaginary part of the second AGM generator.
#[derive(Clone, Debug)]
pub struct Periods<R: Real> {
    pub omega_plus: R,
    pub omega_minus: R,
    pub positive_discriminant: bool,
}

/// Roots of `4x³ + b2x² + 2b4x + b6` in `C`, by Durand–Kerner in
/// hardware floats followed by Newton refinement at full precision.
///
/// Ordered as `e1 > e2 > e3` when all are real; otherwise `e1` is the real
/// root and `e2` has negative imaginary part.
pub fn cubic_roots<R: Real>(b2: i128, b4: i128, b6: i128, prec: R::Precision) -> Vec<Complex<R>> {
    let c = [b2 as f64 / 4.0, 2.0 * b4 as f64 / 4.0, b6 as f64 / 4.0];
    let eval = |z: (f64, f64)| {
        // ((z + c0) z + c1) z + c2
        let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
        let mut acc = (z.0 + c[0], z.1);
        acc = mul(acc, z);
        acc.0 += c[1];
        acc = mul(acc, z);
        acc.0 += c[2];
        acc
    };
    let scale = 1.0 + c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut z: Vec<(f64, f64)> = (0..3)
        .map(|k| {
            let t = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            (scale * t.cos(), scale * t.sin())
        })
        .collect();
    for _ in 0..500 {
        for i in 0..3 {
            let num = eval(z[i]);
            let mut den = (1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    let d = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                    den = (den.0 * d.0 - den.1 * d.1, den.0 * d.1 + den.1 * d.0);
                }
            }
            let n2 = den.0 * den.0 + den.1 * den.1;
            let q = ((num.0 * den.0 + num.1 * den.1) / n2, (num.1 * den.0 - num.0 * den.1) / n2);
            z[i] = (z[i].0 - q.0, z[i].1 - q.1);
        }
    }
    let (b2r, b4r, b6r) = (R::from_i64(b2 as i64, prec), R::from_i64(b4 as i64, prec), R::from_i64(b6 as i64, prec));
    let four = R::from_i64(4, prec);
    let two = R::from_i64(2, prec);
    let f = |x: &Complex<R>| {
        let x2 = x.clone() * x.clone();
        let x3 = x2.clone() * x.clone();
        x3.scale(&four) + x2.scale(&b2r) + x.scale(&(two.clone() * b4r.clone())) + Complex::real(b6r.clone())
    };
    let df = |x: &Complex<R>| {
        let x2 = x.clone() * x.clone();
        x2.scale(&R::from_i64(12, prec)) + x.scale(&(two.clone() * b2r.clone())) + Complex::real(two.clone() * b4r.clone())
    };
    let real_roots = z.iter().all(|r| r.1.abs() < 1e-9 * scale);
    let mut roots: Vec<Complex<R>> = z
        .iter()
        .map(|&(re, im)| {
            let im = if real_roots { 0.0 } else { im };
            let mut x = Complex::new(R::from_f64(re, prec), R::from_f64(im, prec));
            for _ in 0..12 {
                x = x.clone() - f(&x) / df(&x);
            }
            if real_roots {
                x.im = R::zero(prec);
            }
            x
        })
        .collect();
    if real_roots {
        roots.sort_by(|a, b| b.re.partial_cmp(&a.re).expect("finite"));
    } else {
        let zero = R::zero(prec);
        roots.sort_by_key(|r| {
            if r.im.clone().abs() < R::from_f64(1e-9, prec) * R::from_f64(scale, prec) {
                0
            } else if r.im < zero {
                1
            } else {
                2
            }
        });
        roots[0].im = zero;
    }
    roots
}

impl<R: Real> Periods<R> {
    pub fn compute(curve: &EllipticCurve, prec: R::Precision) -> Result<Self> {
        curve.check_minimal()?;
        let inv = curve.invariants();
        let roots = cubic_roots::<R>(inv.b2, inv.b4, inv.b6, prec);
        let (e1, e2, e3) = (roots[0].clone(), roots[1].clone(), roots[2].clone());
        let pi = Complex::real(R::pi(prec));
        let i_pi = Complex::new(R::zero(prec), R::pi(prec));
        let w1 = pi / complex_agm((e1.clone() - e3.clone()).sqrt(), (e1 - e2.clone()).sqrt());
        let w2 = i_pi / complex_agm((roots[0].clone() - e3.clone()).sqrt(), (e2 - e3).sqrt());
        let positive = inv.disc > 0;
        let real = w1.re.abs();
        let omega_plus = if positive { real.clone() + real } else { real };
        Ok(Periods { omega_plus, omega_minus: w2.im.abs(), positive_discriminant: positive })
    }
}
