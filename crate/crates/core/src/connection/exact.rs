//! Exact arithmetic in ℚ(i, √m : m squarefree) for the threshold constants.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: i128,
    pub den: i128,
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Self { num: s * num / g, den: s * den / g }
    }
    pub fn int(n: i128) -> Self {
        Self::new(n, 1)
    }
    pub fn is_zero(&self) -> bool {
        self.num == 0
    }
    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Add for Rational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }
}

impl Mul for Rational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.num * o.num, self.den * o.den)
    }
}

/// Split `m` into `s²·f` with `f` squarefree.
fn squarefree(m: u64) -> (u64, u64) {
    let (mut s, mut f, mut rest, mut p) = (1u64, 1u64, m, 2u64);
    while p * p <= rest {
        while rest % (p * p) == 0 {
            rest /= p * p;
            s *= p;
        }
        if rest % p == 0 {
            rest /= p;
            f *= p;
        }
        p += 1;
    }
    (s, f * rest)
}

/// Finite sum `Σ q·iᵉ·√m` keyed by `(m, e)` with `m` squarefree, `e ∈ {0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Exact {
    terms: BTreeMap<(u64, u8), Rational>,
}

impl Exact {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `q·√m`, or `q·i·√m` when `imag`.
    pub fn surd(q: Rational, m: u64, imag: bool) -> Self {
        let (s, f) = squarefree(m);
        let mut e = Self::zero();
        e.push((f, imag as u8), q * Rational::int(s as i128));
        e
    }

    pub fn rational(q: Rational) -> Self {
        Self::surd(q, 1, false)
    }

    pub fn int(n: i128) -> Self {
        Self::rational(Rational::int(n))
    }

    pub fn i() -> Self {
        Self::surd(Rational::int(1), 1, true)
    }

    fn push(&mut self, key: (u64, u8), q: Rational) {
        let v = self.terms.get(&key).copied().unwrap_or(Rational::int(0)) + q;
        if v.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Inverse of a single-term value.
    pub fn recip(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&(m, e), &q) = self.terms.iter().next()?;
        // 1/(q iᵉ √m) = (−i)ᵉ √m / (q m)
        let sign = if e == 1 { -1 } else { 1 };
        let inv = Rational::new(sign * q.den, q.num * m as i128);
        Some(Self::surd(inv, m, e == 1))
    }

    pub fn to_complex(&self) -> Complex64 {
        self.terms.iter().fold(Complex64::new(0.0, 0.0), |acc, (&(m, e), &q)| {
            let v = q.to_f64() * (m as f64).sqrt();
            acc + if e == 1 { Complex64::new(0.0, v) } else { Complex64::new(v, 0.0) }
        })
    }
}

impl Add for &Exact {
    type Output = Exact;
    fn add(self, o: &Exact) -> Exact {
        let mut out = self.clone();
        for (&k, &q) in &o.terms {
            out.push(k, q);
        }
        out
    }
}

impl Neg for &Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        let mut out = Exact::zero();
        for (&k, &q) in &self.terms {
            out.push(k, Rational::new(-q.num, q.den));
        }
        out
    }
}

impl Sub for &Exact {
    type Output = Exact;
    fn sub(self, o: &Exact) -> Exact {
        self + &(-o)
    }
}

impl Mul for &Exact {
    type Output = Exact;
    fn mul(self, o: &Exact) -> Exact {
        let mut out = Exact::zero();
        for (&(m1, e1), &q1) in &self.terms {
            for (&(m2, e2), &q2) in &o.terms {
                let (s, f) = squarefree(m1 * m2);
                let mut q = q1 * q2 * Rational::int(s as i128);
                let e = e1 + e2;
                if e == 2 {
                    q = Rational::new(-q.num, q.den);
                }
                out.push((f, e % 2), q);
            }
        }
        out
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(m, e), q)| {
                let mut s = if q.den == 1 { format!("{}", q.num) } else { format!("{}/{}", q.num, q.den) };
                if e == 1 {
                    s.push('i');
                }
                if m != 1 {
                    s.push_str(&format!("√{m}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let s17 = Exact::surd(Rational::int(1), 17, false);
        assert_eq!(&s17 * &s17, Exact::int(17));
        let i = Exact::i();
        assert_eq!(&i * &i, Exact::int(-1));
        let x = Exact::surd(Rational::new(54, 17), 2, false);
        assert_eq!(x.recip().unwrap(), Exact::surd(Rational::new(17, 108), 2, false));
        assert_eq!(Exact::surd(Rational::int(1), 8, false), Exact::surd(Rational::int(2), 2, false));
        let y = Exact::surd(Rational::new(3, 2), 2, true);
        assert_eq!(&y.recip().unwrap() * &y, Exact::int(1));
        assert!((y.to_complex() - Complex64::new(0.0, 1.5 * 2f64.sqrt())).norm() < 1e-15);
    }
}
