use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::Expr;

type C = Complex64;

/// Accumulated gauge applied to a pair: kernel multiplied by
/// `scale * exp(tau z)`, operator conjugated by `exp(tau y)` and shifted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub tau: C,
    pub scale: C,
    pub shift: C,
}

impl Default for Gauge {
    fn default() -> Self {
        Gauge {
            tau: C::new(0.0, 0.0),
            scale: C::new(1.0, 0.0),
            shift: C::new(0.0, 0.0),
        }
    }
}

/// Second-order operator `L u = a u'' + b u' + c u`.
#[derive(Clone, Debug)]
pub struct DiffOp {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub gauge: Gauge,
}

/// Derivatives of the three coefficients at one point, index = order.
#[derive(Clone, Debug)]
pub struct CoeffDerivs {
    pub a: Vec<C>,
    pub b: Vec<C>,
    pub c: Vec<C>,
}

impl DiffOp {
    pub fn new(a: Expr, b: Expr, c: Expr) -> Self {
        DiffOp {
            a,
            b,
            c,
            gauge: Gauge::default(),
        }
    }

    pub fn at(&self, y: f64, order: usize) -> CoeffDerivs {
        CoeffDerivs {
            a: self.a.derivatives(y, order),
            b: self.b.derivatives(y, order),
            c: self.c.derivatives(y, order),
        }
    }

    /// Applies `L` to a function given as an expression.
    pub fn apply(&self, u: &Expr) -> Expr {
        let du = u.deriv();
        &(&self.a * &du.deriv()) + &(&(&self.b * &du) + &(&self.c * u))
    }

    /// Largest violation of `a(+-1) = 0` and `b(+-1) = a'(+-1)`.
    pub fn boundary_defect(&self) -> f64 {
        [-1.0, 1.0]
            .iter()
            .map(|&y| {
                let a = self.a.derivatives(y, 1);
                let b = self.b.eval(y);
                a[0].norm().max((b - a[1]).norm())
            })
            .fold(0.0, f64::max)
    }

    /// `M L M^-1` for `M` = multiplication by `exp(tau y)`, then `c += shift`.
    pub fn conjugated(&self, tau: C, shift: C) -> DiffOp {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let b_new = b.clone() - a.scale(tau * 2.0);
        let c_new = c.clone() - b.scale(tau) + a.scale(tau * tau) + Expr::constant(shift);
        DiffOp {
            a: a.clone(),
            b: b_new,
            c: c_new,
            gauge: Gauge {
                tau: self.gauge.tau + tau,
                scale: self.gauge.scale,
                shift: self.gauge.shift + shift,
            },
        }
    }

    /// `L + s` (constant added to `c`).
    pub fn shifted(&self, s: C) -> DiffOp {
        DiffOp {
            c: self.c.clone() + s,
            ..self.clone()
        }
    }

    pub fn scaled(&self, s: C) -> DiffOp {
        DiffOp {
            a: self.a.scale(s),
            b: self.b.scale(s),
            c: self.c.scale(s),
            gauge: self.gauge,
        }
    }
}
