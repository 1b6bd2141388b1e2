//! Angular-momentum algebra on exact half-integers.
//!
//! Wigner symbols use the Racah single sums. Each sum is accumulated exactly
//! in big integers (every term is scaled by the product of the largest
//! factorials in its denominator) and only the square-root prefactor is
//! handled in log space, so values stay accurate well past j = 20.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// A non-negative or signed multiple of 1/2, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// The projections `j, j-1, ..., -j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (0..=j.max(-1)).map(move |k| HalfInt(j - 2 * k))
    }

    /// Integer value when `self` is integral.
    pub fn as_int(self) -> Option<i32> {
        self.is_integer().then_some(self.0 / 2)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = String;

    /// Accepts `3`, `-1/2`, `3/2` or `1.5`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let bad = || format!("`{s}` is not a half-integer");
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => Ok(HalfInt(2 * num)),
                "2" => Ok(HalfInt(num)),
                _ => Err(bad()),
            };
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        let twice = (2.0 * v).round();
        if (2.0 * v - twice).abs() > 1e-9 || twice.abs() > f64::from(i32::MAX) {
            return Err(bad());
        }
        Ok(HalfInt(twice as i32))
    }
}

fn triangle(a: i32, b: i32, c: i32) -> bool {
    // twice-values
    a >= 0 && b >= 0 && c >= 0 && c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0
}

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn factorial(n: i64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        let digits = x.to_u64_digits();
        return digits
            .iter()
            .rev()
            .fold(0.0_f64, |acc, &d| acc * 18_446_744_073_709_551_616.0 + d as f64)
            .ln();
    }
    let shift = bits - 900;
    ln_biguint(&(x >> shift)) + shift as f64 * std::f64::consts::LN_2
}

/// `Σ_k (-1)^k num_k! / Π_s den_{k,s}!` as `(sign, ln|sum|)`, or `None` if
/// the sum vanishes. `num_k` and `den_k` are plain integers.
fn racah_sum<const D: usize>(
    ks: std::ops::RangeInclusive<i64>,
    num: impl Fn(i64) -> i64,
    den: impl Fn(i64) -> [i64; D],
) -> Option<(f64, f64)> {
    let ks: Vec<i64> = ks.collect();
    if ks.is_empty() {
        return None;
    }
    let mut max_den = [0_i64; D];
    for &k in &ks {
        for (m, d) in max_den.iter_mut().zip(den(k)) {
            *m = (*m).max(d);
        }
    }
    let mut total = BigInt::zero();
    for &k in &ks {
        let mut term = factorial(num(k));
        for (m, d) in max_den.iter().zip(den(k)) {
            // m!/d! as a falling product
            for v in (d + 1)..=*m {
                term *= v;
            }
        }
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    let sign = match total.sign() {
        Sign::NoSign => return None,
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let ln = ln_biguint(total.magnitude())
        - max_den.iter().map(|&m| ln_factorial(m)).sum::<f64>();
    Some((sign, ln))
}

fn ln_delta(a: i32, b: i32, c: i32) -> f64 {
    // twice-values, triangle already checked
    let (a, b, c) = (i64::from(a), i64::from(b), i64::from(c));
    ln_factorial((a + b - c) / 2) + ln_factorial((a - b + c) / 2) + ln_factorial((-a + b + c) / 2)
        - ln_factorial((a + b + c) / 2 + 1)
}

/// The Wigner 3j symbol. Zero whenever a selection rule fails.
pub fn wigner3j(j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> f64 {
    let (tj1, tj2, tj3) = (j1.0, j2.0, j3.0);
    let (tm1, tm2, tm3) = (m1.0, m2.0, m3.0);
    if !triangle(tj1, tj2, tj3) || tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    for (j, m) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        if m.abs() > j || (j - m) % 2 != 0 {
            return 0.0;
        }
    }
    let h = |x: i32| i64::from(x) / 2;
    // all of these are integers once parity is checked
    let a = h(tj1 + tj2 - tj3);
    let b = h(tj1 - tm1);
    let c = h(tj2 + tm2);
    let d = h(tj3 - tj2 + tm1);
    let e = h(tj3 - tj1 - tm2);
    let kmin = 0.max(-d).max(-e);
    let kmax = a.min(b).min(c);
    let Some((sign, ln_sum)) = racah_sum(kmin..=kmax, |_| 0, |k| [k, a - k, b - k, c - k, d + k, e + k])
    else {
        return 0.0;
    };
    let ln_pref = ln_delta(tj1, tj2, tj3)
        + [tj1 + tm1, tj1 - tm1, tj2 + tm2, tj2 - tm2, tj3 + tm3, tj3 - tm3]
            .iter()
            .map(|&x| ln_factorial(h(x)))
            .sum::<f64>();
    let phase = if h(tj1 - tj2 - tm3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * sign * (0.5 * ln_pref + ln_sum).exp()
}

/// The Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`. Zero when a triad fails.
pub fn wigner6j(j1: HalfInt, j2: HalfInt, j3: HalfInt, j4: HalfInt, j5: HalfInt, j6: HalfInt) -> f64 {
    let t = [j1.0, j2.0, j3.0, j4.0, j5.0, j6.0];
    let triads = [(t[0], t[1], t[2]), (t[0], t[4], t[5]), (t[3], t[1], t[5]), (t[3], t[4], t[2])];
    if triads.iter().any(|&(a, b, c)| !triangle(a, b, c)) {
        return 0.0;
    }
    let h = |x: i32| i64::from(x) / 2;
    let a: Vec<i64> = triads.iter().map(|&(x, y, z)| h(x + y + z)).collect();
    let b = [
        h(t[0] + t[1] + t[3] + t[4]),
        h(t[1] + t[2] + t[4] + t[5]),
        h(t[2] + t[0] + t[5] + t[3]),
    ];
    let kmin = *a.iter().max().unwrap();
    let kmax = *b.iter().min().unwrap();
    let Some((sign, ln_sum)) = racah_sum(
        kmin..=kmax,
        |k| k + 1,
        |k| [k - a[0], k - a[1], k - a[2], k - a[3], b[0] - k, b[1] - k, b[2] - k],
    ) else {
        return 0.0;
    };
    let ln_pref: f64 = triads.iter().map(|&(x, y, z)| ln_delta(x, y, z)).sum();
    sign * (0.5 * ln_pref + ln_sum).exp()
}

/// `⟨j1 m1; j2 m2 | J M⟩` in the Condon-Shortley convention.
pub fn clebsch_gordan(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> f64 {
    if m1 + m2 != m {
        return 0.0;
    }
    let w = wigner3j(j1, j2, j, m1, m2, -m);
    if w == 0.0 {
        return 0.0;
    }
    let phase_twice = j1.0 - j2.0 + m.0;
    let phase = if (phase_twice / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * (f64::from(j.0) + 1.0).sqrt() * w
}

/// `Y_2^m(θ, φ)` with the Condon-Shortley phase.
pub fn sph_harm_rank2(m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    let (s, c) = theta.sin_cos();
    let e = |k: f64| Complex64::from_polar(1.0, k * phi);
    let a = (15.0 / (2.0 * PI)).sqrt();
    Ok(match m {
        0 => Complex64::new(0.25 * (5.0 / PI).sqrt() * (3.0 * c * c - 1.0), 0.0),
        1 => -0.5 * a * s * c * e(1.0),
        -1 => 0.5 * a * s * c * e(-1.0),
        2 => 0.25 * a * s * s * e(2.0),
        -2 => 0.25 * a * s * s * e(-2.0),
        _ => return Err(Error::InvalidArgument(format!("Y_2^m needs |m| <= 2, got m = {m}"))),
    })
}

/// Angular factor of the dipole matrix element `⟨La Ja ma| r_q |Lc Jc mc⟩`
/// for a single-valence-electron atom:
///
/// `(-1)^(2Jc + 1/2 + ma) √((2Ja+1)(2Jc+1)(2La+1)(2Lc+1))
///   · (Jc 1 Ja; mc q -ma) · (La 1 Lc; 0 0 0) · {Ja 1 Jc; Lc 1/2 La}`
pub fn dipole_angular(
    la: HalfInt,
    ja: HalfInt,
    ma: HalfInt,
    q: i32,
    lc: HalfInt,
    jc: HalfInt,
    mc: HalfInt,
) -> f64 {
    if !(-1..=1).contains(&q) || (la.0 - lc.0).abs() != 2 || mc.0 + 2 * q != ma.0 {
        return 0.0;
    }
    let one = HalfInt::ONE;
    let w1 = wigner3j(jc, one, ja, mc, HalfInt::int(q), -ma);
    if w1 == 0.0 {
        return 0.0;
    }
    let w2 = wigner3j(la, one, lc, HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO);
    let w3 = wigner6j(ja, one, jc, lc, HalfInt::HALF, la);
    // 2Jc + 1/2 + ma is an integer because ma is a half-integer
    let phase_twice = 2 * jc.0 + 1 + ma.0;
    let phase = if (phase_twice / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let dims = [ja, jc, la, lc].iter().map(|x| f64::from(x.0) + 1.0).product::<f64>();
    phase * dims.sqrt() * w1 * w2 * w3
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    /// Floating-point Racah formula, written out term by term.
    fn racah3j_oracle(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> f64 {
        let f = |x: f64| -> f64 { (1..=x.round() as i64).map(|k| k as f64).product() };
        if (m1 + m2 + m3).abs() > 1e-9 {
            return 0.0;
        }
        let tri = f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3) / f(j1 + j2 + j3 + 1.0);
        let pre = (tri * f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3)).sqrt();
        let mut s = 0.0;
        for k in 0..100 {
            let k = k as f64;
            let d = [k, j1 + j2 - j3 - k, j1 - m1 - k, j2 + m2 - k, j3 - j2 + m1 + k, j3 - j1 - m2 + k];
            if d.iter().any(|&x| x < -1e-9) {
                continue;
            }
            let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign / d.iter().map(|&x| f(x)).product::<f64>();
        }
        let ph = if ((j1 - j2 - m3).round() as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        ph * pre * s
    }

    #[test]
    fn halfint_parsing_and_display() {
        assert_eq!("1/2".parse::<HalfInt>().unwrap(), HalfInt::HALF);
        assert_eq!("1.5".parse::<HalfInt>().unwrap(), h(3));
        assert_eq!("-3/2".parse::<HalfInt>().unwrap(), h(-3));
        assert_eq!("2".parse::<HalfInt>().unwrap(), HalfInt::int(2));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.3".parse::<HalfInt>().is_err());
        assert_eq!(h(3).to_string(), "3/2");
        assert_eq!(h(4).to_string(), "2");
        assert_eq!(h(3).projections().collect::<Vec<_>>(), vec![h(3), h(1), h(-1), h(-3)]);
    }

    #[test]
    fn three_j_known_values() {
        // (1 1 2; 0 0 0) = sqrt(2/15)
        let v = wigner3j(h(2), h(2), h(4), h(0), h(0), h(0));
        assert!((v - (2.0_f64 / 15.0).sqrt()).abs() < 1e-14);
        assert_eq!(wigner3j(h(2), h(2), h(6), h(0), h(0), h(0)), 0.0);
        assert_eq!(wigner3j(h(2), h(2), h(2), h(2), h(0), h(0)), 0.0);
        assert_eq!(wigner3j(h(1), h(1), h(2), h(3), h(-3), h(0)), 0.0);
    }

    #[test]
    fn three_j_matches_float_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 20 {
            let t1 = rng.random_range(0..8);
            let t2 = rng.random_range(0..8);
            let t3 = rng.random_range(0..8);
            if !triangle(t1, t2, t3) {
                continue;
            }
            let m1 = t1 - 2 * rng.random_range(0..=t1);
            let m2 = t2 - 2 * rng.random_range(0..=t2);
            let m3 = -m1 - m2;
            if m3.abs() > t3 {
                continue;
            }
            let v = wigner3j(h(t1), h(t2), h(t3), h(m1), h(m2), h(m3));
            let o = racah3j_oracle(
                f64::from(t1) / 2.0,
                f64::from(t2) / 2.0,
                f64::from(t3) / 2.0,
                f64::from(m1) / 2.0,
                f64::from(m2) / 2.0,
                f64::from(m3) / 2.0,
            );
            assert!((v - o).abs() < 1e-12, "{t1} {t2} {t3} {m1} {m2}: {v} vs {o}");
            checked += 1;
        }
    }

    #[test]
    fn six_j_known_values() {
        // zero-argument reduction: {a b c; 0 c b} = (-1)^(a+b+c) / sqrt((2b+1)(2c+1))
        let v = wigner6j(h(2), h(2), h(0), h(2), h(2), h(2));
        // {1 1 0; 1 1 1}: a=1,b=1,c=0 with the zero in position 3 -> use symmetry form
        let expect = -1.0 / 3.0;
        assert!((v - expect).abs() < 1e-14, "{v}");
        let v = wigner6j(h(4), h(2), h(6), h(0), h(6), h(2));
        // {2 1 3; 0 3 1}: (-1)^(2+1+3)/sqrt(3*7)
        assert!((v - 1.0 / 21.0_f64.sqrt()).abs() < 1e-14, "{v}");
        // {1/2 1/2 1; 1/2 1/2 1} = 1/6 (Racah sum by hand)
        let v = wigner6j(h(1), h(1), h(2), h(1), h(1), h(2));
        assert!((v - 1.0 / 6.0).abs() < 1e-14, "{v}");
        assert_eq!(wigner6j(h(2), h(2), h(6), h(2), h(2), h(2)), 0.0);
    }

    #[test]
    fn six_j_matches_float_racah_oracle() {
        let f = |x: i32| -> f64 { (1..=x).map(f64::from).product() };
        let delta = |a: i32, b: i32, c: i32| {
            f((a + b - c) / 2) * f((a - b + c) / 2) * f((-a + b + c) / 2) / f((a + b + c) / 2 + 1)
        };
        let oracle = |t: [i32; 6]| {
            let pre = (delta(t[0], t[1], t[2]) * delta(t[0], t[4], t[5]) * delta(t[3], t[1], t[5]) * delta(t[3], t[4], t[2])).sqrt();
            let mut s = 0.0;
            for k in 0..40 {
                let d = [
                    k - (t[0] + t[1] + t[2]) / 2,
                    k - (t[0] + t[4] + t[5]) / 2,
                    k - (t[3] + t[1] + t[5]) / 2,
                    k - (t[3] + t[4] + t[2]) / 2,
                    (t[0] + t[1] + t[3] + t[4]) / 2 - k,
                    (t[1] + t[2] + t[4] + t[5]) / 2 - k,
                    (t[2] + t[0] + t[5] + t[3]) / 2 - k,
                ];
                if d.iter().any(|&x| x < 0) {
                    continue;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * f(k + 1) / d.iter().map(|&x| f(x)).product::<f64>();
            }
            pre * s
        };
        for t in [[1, 1, 2, 1, 1, 2], [2, 3, 1, 4, 1, 3], [3, 2, 1, 2, 3, 2], [4, 4, 4, 2, 2, 2], [5, 3, 4, 3, 5, 4]] {
            let v = wigner6j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5]));
            assert!((v - oracle(t)).abs() < 1e-13, "{t:?}: {v} vs {}", oracle(t));
        }
    }

    #[test]
    fn clebsch_gordan_values_and_orthogonality() {
        assert!((clebsch_gordan(h(1), h(1), h(1), h(1), h(2), h(2)) - 1.0).abs() < 1e-14);
        // <1 0 1 0|2 0> = sqrt(2/3)
        assert!((clebsch_gordan(h(2), h(0), h(2), h(0), h(4), h(0)) - (2.0_f64 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(clebsch_gordan(h(2), h(0), h(2), h(2), h(4), h(0)), 0.0);
        let (j1, j2) = (h(3), h(2));
        for jj in [h(1), h(3), h(5)] {
            for jp in [h(1), h(3), h(5)] {
                for m in jj.projections() {
                    for mp in jp.projections() {
                        let mut s = 0.0;
                        for m1 in j1.projections() {
                            for m2 in j2.projections() {
                                s += clebsch_gordan(j1, m1, j2, m2, jj, m) * clebsch_gordan(j1, m1, j2, m2, jp, mp);
                            }
                        }
                        let expect = if jj == jp && m == mp { 1.0 } else { 0.0 };
                        assert!((s - expect).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn rank2_harmonics() {
        // Y_2^0(0) = (1/4)√(5/π)·2 = √(5/4π)
        let y = sph_harm_rank2(0, 0.0, 0.3).unwrap();
        assert!((y.re - (5.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        for m in [-2, -1, 1, 2] {
            assert!(sph_harm_rank2(m, 0.0, 1.1).unwrap().norm() < 1e-15);
        }
        // associated Legendre P_2^2(0) = 3, normalization sqrt(5/(4π) · 0!/4!)
        let expect = (5.0 / (4.0 * PI) / 24.0).sqrt() * 3.0;
        let y = sph_harm_rank2(2, PI / 2.0, 0.0).unwrap();
        assert!((y.re - expect).abs() < 1e-15 && y.im.abs() < 1e-15);
        assert!((expect - 0.25 * (15.0 / (2.0 * PI)).sqrt()).abs() < 1e-15);
        assert!(sph_harm_rank2(3, 0.1, 0.1).is_err());
        // Y_l^{-m} = (-1)^m conj(Y_l^m)
        let (t, p) = (0.7, 1.9);
        for m in 1..=2 {
            let a = sph_harm_rank2(-m, t, p).unwrap();
            let b = sph_harm_rank2(m, t, p).unwrap().conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn dipole_selection_rules() {
        let s = HalfInt::ZERO;
        let half = HalfInt::HALF;
        assert_eq!(dipole_angular(s, half, half, 0, s, half, half), 0.0);
        assert_eq!(dipole_angular(s, half, half, 0, HalfInt::ONE, half, -half), 0.0);
        assert_eq!(dipole_angular(s, half, half, 2, HalfInt::ONE, half, half), 0.0);
    }

    #[test]
    fn dipole_s_to_p_value() {
        // S1/2 m=1/2 -> P1/2 m=-1/2 with q=+1: ma = mc + q.
        // phase (-1)^(1+1/2+1/2) = +1; sqrt(2*2*1*3)=sqrt(12);
        // (1/2 1 1/2; -1/2 1 -1/2) = -sqrt(1/3); (0 1 1; 0 0 0) = -sqrt(1/3);
        // {1/2 1 1/2; 1 1/2 0} = (-1)^(1/2+1+1/2)... = 1/sqrt(6) by zero reduction with sign +.
        let v = dipole_angular(HalfInt::ZERO, h(1), h(1), 1, HalfInt::ONE, h(1), h(-1));
        let w1 = wigner3j(h(1), h(2), h(1), h(-1), h(2), h(-1));
        let w2 = wigner3j(h(0), h(2), h(2), h(0), h(0), h(0));
        let w3 = wigner6j(h(1), h(2), h(1), h(2), h(1), h(0));
        assert!((w1 + (1.0_f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((w2 + (1.0_f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((w3 - 1.0 / 6.0_f64.sqrt()).abs() < 1e-14);
        assert!((v - 12.0_f64.sqrt() * w1 * w2 * w3).abs() < 1e-14);
        assert!((v - 12.0_f64.sqrt() / 3.0 / 6.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn line_strength_ratio_p32_to_p12() {
        let strength = |jc: HalfInt| {
            let mut s = 0.0;
            for q in -1..=1 {
                for mc in jc.projections() {
                    s += dipole_angular(HalfInt::ZERO, h(1), h(1), q, HalfInt::ONE, jc, mc).powi(2);
                }
            }
            s
        };
        let r = strength(h(3)) / strength(h(1));
        assert!((r - 2.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn dipole_hermiticity_phase() {
        // measured convention: J^q(a->c) = (-1)^q J^{-q}(c->a), the
        // spherical-tensor adjoint relation; the Ja - Jc phase cancels.
        let levels = [(0, 1), (2, 1), (2, 3), (4, 3), (4, 5)];
        for &(la, ja) in &levels {
            for &(lc, jc) in &levels {
                for ma in h(ja).projections() {
                    for mc in h(jc).projections() {
                        for q in -1..=1 {
                            let f = dipole_angular(h(la), h(ja), ma, q, h(lc), h(jc), mc);
                            let b = dipole_angular(h(lc), h(jc), mc, -q, h(la), h(ja), ma);
                            let ph = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                            assert!((f - ph * b).abs() < 1e-13, "{la} {ja} {ma} {q} {lc} {jc} {mc}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn large_j_stays_finite() {
        let j = h(40);
        let v = wigner3j(j, j, h(40), h(2), h(-4), h(2));
        assert!(v.is_finite() && v.abs() < 1.0);
        let v = wigner6j(j, j, j, j, j, j);
        assert!(v.is_finite() && v.abs() < 1.0);
        // orthogonality at j = 20
        let (j1, j2) = (h(40), h(38));
        let mut s = 0.0;
        for m1 in j1.projections() {
            let m2 = -m1 + h(2);
            if m2.abs() > j2 {
                continue;
            }
            let w = wigner3j(j1, j2, h(4), m1, m2, h(-2));
            s += 5.0 * w * w;
        }
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    fn valid_triple() -> impl Strategy<Value = (i32, i32, i32, i32, i32)> {
        (0..10i32, 0..10i32, 0..20i32)
            .prop_filter_map("triangle", |(a, b, c)| triangle(a, b, c).then_some((a, b, c)))
            .prop_flat_map(|(a, b, c)| (Just(a), Just(b), Just(c), 0..=a, 0..=b))
            .prop_map(|(a, b, c, k1, k2)| (a, b, c, a - 2 * k1, b - 2 * k2))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn three_j_permutation_symmetry((a, b, c, m1, m2) in valid_triple()) {
            let m3 = -m1 - m2;
            let v = wigner3j(h(a), h(b), h(c), h(m1), h(m2), h(m3));
            let even = wigner3j(h(b), h(c), h(a), h(m2), h(m3), h(m1));
            let even2 = wigner3j(h(c), h(a), h(b), h(m3), h(m1), h(m2));
            let odd = wigner3j(h(b), h(a), h(c), h(m2), h(m1), h(m3));
            let sign = if ((a + b + c) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((v - even).abs() < 1e-13);
            prop_assert!((v - even2).abs() < 1e-13);
            prop_assert!((v - sign * odd).abs() < 1e-13);
            // sign flip of all m
            let flipped = wigner3j(h(a), h(b), h(c), h(-m1), h(-m2), h(-m3));
            prop_assert!((v - sign * flipped).abs() < 1e-13);
        }

        #[test]
        fn three_j_orthogonality((a, b, c, _m1, _m2) in valid_triple()) {
            for m3 in h(c).projections() {
                for m3p in h(c).projections() {
                    let mut s = 0.0;
                    for m1 in h(a).projections() {
                        for m2 in h(b).projections() {
                            s += (f64::from(c) + 1.0)
                                * wigner3j(h(a), h(b), h(c), m1, m2, m3)
                                * wigner3j(h(a), h(b), h(c), m1, m2, m3p);
                        }
                    }
                    let expect = if m3 == m3p { 1.0 } else { 0.0 };
                    prop_assert!((s - expect).abs() < 1e-12);
                }
            }
        }
    }
}
