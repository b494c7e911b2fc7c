//! Evaluatable convolution kernels `k(z) = prefactor * N(z) / D(z)`.
//!
//! `N` is entire and `D` is either `z` or `sinh(s z)`, which covers every
//! family of the classification. Near a zero of `D` the quotient is replaced
//! by its Taylor (removable zero) or Laurent (pole at 0) expansion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;

type C = Complex64;

/// Number of stored expansion coefficients.
pub const SERIES_ORDER: usize = 12;
/// Distance (in the denominator's argument) from a zero below which the
/// expansion replaces the closed form.
pub const SWITCH_RADIUS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub enum Denominator {
    /// `D(z) = z`
    Linear,
    /// `D(z) = sinh(s z)`
    Sinh(C),
}

impl Denominator {
    fn expr(&self) -> Expr {
        match self {
            Denominator::Linear => Expr::var(),
            Denominator::Sinh(s) => (Expr::var() * *s).sinh(),
        }
    }

    /// Nearest zero of `D` to `z` and the distance to it measured in the
    /// argument of `D`.
    fn nearest_zero(&self, z: C) -> (C, f64) {
        match self {
            Denominator::Linear => (C::new(0.0, 0.0), z.norm()),
            Denominator::Sinh(s) => {
                let w = s * z;
                let n = (w.im / std::f64::consts::PI).round();
                let w0 = C::new(0.0, std::f64::consts::PI * n);
                let z0 = if n == 0.0 { C::new(0.0, 0.0) } else { w0 / s };
                (z0, (w - w0).norm())
            }
        }
    }
}

/// Expansion of `k` about a zero `z0` of the denominator.
#[derive(Clone, Debug)]
struct Expansion {
    z0: C,
    /// Coefficients `q_n`; `k(z0 + h) = sum q_n h^n`, or `sum q_n h^(n-1)`
    /// when `pole` is set.
    q: Vec<C>,
    pole: bool,
}

impl Expansion {
    fn derivatives(&self, h: C, nd: usize) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); nd + 1];
        for (n, qn) in self.q.iter().enumerate() {
            let p = if self.pole { n as i32 - 1 } else { n as i32 };
            for (m, slot) in out.iter_mut().enumerate() {
                // d^m/dh^m h^p = p (p-1) ... (p-m+1) h^(p-m)
                let falling: f64 = (0..m as i32).map(|i| (p - i) as f64).product();
                if falling == 0.0 {
                    continue;
                }
                *slot += qn * falling * h.powi(p - m as i32);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct KernelSpec {
    numerator: Expr,
    denominator: Denominator,
    prefactor: C,
    singular: bool,
    trivial: bool,
    /// Taylor coefficients at 0 of `k` (regular) or `z k` (singular).
    series: Vec<C>,
}

impl KernelSpec {
    pub(crate) fn new(
        numerator: Expr,
        denominator: Denominator,
        prefactor: C,
        singular: bool,
        trivial: bool,
    ) -> Self {
        let mut k = KernelSpec {
            numerator,
            denominator,
            prefactor,
            singular,
            trivial,
            series: Vec::new(),
        };
        k.series = k.expansion_at(C::new(0.0, 0.0), true).q;
        k
    }

    pub fn singular(&self) -> bool {
        self.singular
    }

    pub fn trivial(&self) -> bool {
        self.trivial
    }

    /// Taylor coefficients (n-th derivative over n!) of `k` at 0, or of
    /// `z k(z)` when the kernel has a pole.
    pub fn series(&self) -> &[C] {
        &self.series
    }

    /// Replaces the stored expansion at 0. Meant for sensitivity experiments;
    /// evaluation near 0 uses whatever is stored.
    pub fn with_series(mut self, series: Vec<C>) -> Self {
        self.series = series;
        self
    }

    /// Derivatives `k^(n)(0)` of a regular kernel, i.e. `n! * series[n]`.
    pub fn derivatives_at_zero(&self) -> Result<Vec<C>> {
        if self.singular {
            return Err(Error::SingularKernel);
        }
        Ok(Jet::from_coeffs(self.series.clone()).derivatives())
    }

    /// Residue at the simple pole (`series[0]`), if any.
    pub fn residue(&self) -> Option<C> {
        self.singular.then(|| self.series[0])
    }

    fn expansion_at(&self, z0: C, at_origin: bool) -> Expansion {
        let order = SERIES_ORDER;
        let mut num = self.numerator.jet(z0, order).into_coeffs();
        let mut den = self.denominator.expr().jet(z0, order).into_coeffs();
        den[0] = C::new(0.0, 0.0);
        let pole = at_origin && self.singular;
        if !pole {
            num[0] = C::new(0.0, 0.0);
        }
        let den = Jet::from_coeffs(den).deflate();
        let num = if pole {
            Jet::from_coeffs(num).truncate(order - 1)
        } else {
            Jet::from_coeffs(num).deflate()
        };
        let q = num.div(&den).scale(self.prefactor).into_coeffs();
        Expansion { z0, q, pole }
    }

    fn expansion_near(&self, z: C) -> Option<Expansion> {
        let (z0, dist) = self.denominator.nearest_zero(z);
        if dist >= SWITCH_RADIUS {
            return None;
        }
        if z0.norm() == 0.0 {
            Some(Expansion {
                z0,
                q: self.series.clone(),
                pole: self.singular,
            })
        } else {
            Some(self.expansion_at(z0, false))
        }
    }

    /// `[k(z), k'(z), ..., k^(nd)(z)]`.
    pub fn derivatives(&self, z: C, nd: usize) -> Result<Vec<C>> {
        if self.singular && z.norm() == 0.0 {
            return Err(Error::Pole);
        }
        if let Some(e) = self.expansion_near(z) {
            return Ok(e.derivatives(z - e.z0, nd));
        }
        let num = self.numerator.jet(z, nd);
        let den = self.denominator.expr().jet(z, nd);
        Ok(num.div(&den).scale(self.prefactor).derivatives())
    }

    pub fn eval(&self, z: C) -> Result<C> {
        Ok(self.derivatives(z, 0)?[0])
    }

    pub fn eval_real(&self, z: f64) -> Result<C> {
        self.eval(C::new(z, 0.0))
    }

    /// The closed form without any series switching (diagnostics only).
    pub fn eval_direct(&self, z: C) -> C {
        self.prefactor * self.numerator.eval_complex(z) / self.denominator.expr().eval_complex(z)
    }

    /// `k(z) - r/z` for a singular kernel with residue `r`, continuous at 0.
    pub fn regular_part(&self, z: f64) -> Result<C> {
        let r = self.residue().ok_or(Error::RegularKernel)?;
        if z.abs() > 0.1 {
            return Ok(self.eval_real(z)? - r / z);
        }
        let z = C::new(z, 0.0);
        Ok(self.series[1..]
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, t| acc * z + t))
    }

    /// Kernel multiplied by `scale * exp(tau z)`.
    pub(crate) fn gauged(&self, tau: C, scale: C) -> KernelSpec {
        let numerator = if tau == C::new(0.0, 0.0) {
            self.numerator.clone()
        } else {
            self.numerator.clone() * (Expr::var() * tau).exp()
        };
        KernelSpec::new(
            numerator,
            self.denominator.clone(),
            self.prefactor * scale,
            self.singular,
            self.trivial,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn one_over_z_is_exact() {
        let k = KernelSpec::new(Expr::one(), Denominator::Linear, c(1.0), true, false);
        for z in [1e-5, 5e-4, 0.3, -1.7] {
            let d = k.derivatives(c(z), 2).unwrap();
            assert!((d[0] - 1.0 / z).norm() <= 1e-15 / z.abs());
            assert!((d[1] + 1.0 / (z * z)).norm() <= 1e-15 / (z * z));
            assert!((d[2] - 2.0 / (z * z * z)).norm() <= 1e-15 / (z * z * z).abs());
        }
        assert!(matches!(k.eval(c(0.0)), Err(Error::Pole)));
        assert_eq!(k.residue(), Some(c(1.0)));
    }

    #[test]
    fn removable_zero_series_matches_closed_form() {
        // k = sinh(z)/sinh(z/2) = 2 cosh(z/2)
        let k = KernelSpec::new(
            Expr::var().sinh(),
            Denominator::Sinh(c(0.5)),
            c(1.0),
            false,
            false,
        );
        for z in [0.0, 1e-4, 1.999e-3, 2.001e-3, 0.4] {
            let d = k.derivatives(c(z), 2).unwrap();
            let exact = [
                2.0 * (z / 2.0).cosh(),
                (z / 2.0).sinh(),
                0.5 * (z / 2.0).cosh(),
            ];
            assert!((d[0] - exact[0]).norm() < 1e-12, "z={z}");
            for (u, v) in d.iter().zip(exact) {
                assert!((u - v).norm() < 1e-10, "z={z} {u} {v}");
            }
        }
    }
}
