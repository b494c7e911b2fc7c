//! Truncated Taylor series in one complex variable.
//!
//! A [`Jet`] of order `n` holds the coefficients `f_0, ..., f_n` of
//! `f(t0 + h) = sum f_j h^j`, i.e. `f_j = f^(j)(t0) / j!`. Arithmetic on jets
//! is exact up to truncation, which is how every kernel and coefficient
//! function in this crate gets its analytic derivatives.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    coeffs: Vec<C>,
}

impl Jet {
    pub fn constant(value: C, order: usize) -> Self {
        let mut coeffs = vec![C::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// The identity function expanded at `t0`.
    pub fn variable(t0: C, order: usize) -> Self {
        let mut j = Jet::constant(t0, order);
        if order >= 1 {
            j.coeffs[1] = C::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "jet needs at least one coefficient");
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn value(&self) -> C {
        self.coeffs[0]
    }

    /// `f^(k)(t0)`, i.e. `k! * f_k`.
    pub fn derivative(&self, k: usize) -> C {
        self.coeffs[k] * factorial(k)
    }

    /// All derivatives `f(t0), f'(t0), ..., f^(n)(t0)`.
    pub fn derivatives(&self) -> Vec<C> {
        (0..self.coeffs.len()).map(|k| self.derivative(k)).collect()
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        self
    }

    /// Series of `f'`, one order shorter.
    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Jet::constant(C::new(0.0, 0.0), 0);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(j, c)| c * (j as f64 + 1.0))
            .collect();
        Jet { coeffs }
    }

    /// Drops the leading coefficient, i.e. the series of `(f - f_0) / h`
    /// (one order shorter). Used when `f` is known to vanish at `t0`.
    pub fn deflate(&self) -> Self {
        assert!(self.coeffs.len() > 1, "cannot deflate an order-0 jet");
        Jet {
            coeffs: self.coeffs[1..].to_vec(),
        }
    }

    pub fn conj(&self) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Evaluates the truncated polynomial at offset `h`.
    pub fn eval_at(&self, h: C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, c| acc * h + c)
    }

    pub fn div(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        let b0 = other.coeffs[0];
        let mut q = vec![C::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Jet { coeffs: q }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(C::new(1.0, 0.0), self.order()).div(self)
    }

    pub fn exp(&self) -> Jet {
        let f = &self.coeffs;
        let mut g = vec![C::new(0.0, 0.0); f.len()];
        g[0] = f[0].exp();
        for n in 1..f.len() {
            let mut acc = C::new(0.0, 0.0);
            for k in 1..=n {
                acc += f[k] * g[n - k] * k as f64;
            }
            g[n] = acc / n as f64;
        }
        Jet { coeffs: g }
    }

    /// `(sinh f, cosh f)` via the coupled recurrence `s' = c f'`, `c' = s f'`,
    /// which keeps full relative accuracy when `f(t0)` is small.
    pub fn sinh_cosh(&self) -> (Jet, Jet) {
        let f = &self.coeffs;
        let len = f.len();
        let mut s = vec![C::new(0.0, 0.0); len];
        let mut c = vec![C::new(0.0, 0.0); len];
        s[0] = f[0].sinh();
        c[0] = f[0].cosh();
        for n in 1..len {
            let mut acc_s = C::new(0.0, 0.0);
            let mut acc_c = C::new(0.0, 0.0);
            for k in 1..=n {
                let w = f[k] * k as f64;
                acc_s += w * c[n - k];
                acc_c += w * s[n - k];
            }
            s[n] = acc_s / n as f64;
            c[n] = acc_c / n as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    pub fn sqrt(&self) -> Jet {
        let f = &self.coeffs;
        let mut g = vec![C::new(0.0, 0.0); f.len()];
        g[0] = f[0].sqrt();
        for n in 1..f.len() {
            let mut acc = f[n];
            for k in 1..n {
                acc -= g[k] * g[n - k];
            }
            g[n] = acc / (g[0] * 2.0);
        }
        Jet { coeffs: g }
    }

    pub fn powi(&self, p: u32) -> Jet {
        let mut out = Jet::constant(C::new(1.0, 0.0), self.order());
        for _ in 0..p {
            out = &out * self;
        }
        out
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet {
            coeffs: (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet {
            coeffs: (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![C::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Jet { coeffs: out }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn exp_of_variable_matches_factorials() {
        let x = Jet::variable(c(0.0), 8);
        let e = x.exp();
        for (k, v) in e.coeffs().iter().enumerate() {
            assert!((v.re - 1.0 / factorial(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn sinh_cosh_derivatives_alternate() {
        let t0 = C::new(0.3, -0.2);
        let x = Jet::variable(t0, 6);
        let (s, ch) = x.sinh_cosh();
        for k in 0..=6 {
            let expect = if k % 2 == 0 { t0.sinh() } else { t0.cosh() };
            assert!((s.derivative(k) - expect).norm() < 1e-13);
            let expect = if k % 2 == 0 { t0.cosh() } else { t0.sinh() };
            assert!((ch.derivative(k) - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Jet::variable(c(0.4), 7);
        let a = x.exp();
        let (b, _) = x.sinh_cosh();
        let q = (&a * &b).div(&b);
        for (u, v) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((u - v).norm() < 1e-11, "{u} {v}");
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let x = Jet::variable(c(0.5), 6);
        let f = &Jet::constant(c(1.0), 6) - &(&x * &x);
        let r = f.sqrt();
        let back = &r * &r;
        for (u, v) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn deflate_recovers_removable_quotient() {
        // sinh(z)/z at 0 has series 1 + z^2/6 + z^4/120.
        let z = Jet::variable(c(0.0), 6);
        let (s, _) = z.sinh_cosh();
        let q = s.deflate().div(&z.deflate());
        assert!((q.coeffs()[0].re - 1.0).abs() < 1e-15);
        assert!((q.coeffs()[2].re - 1.0 / 6.0).abs() < 1e-15);
        assert!((q.coeffs()[4].re - 1.0 / 120.0).abs() < 1e-15);
    }
}
