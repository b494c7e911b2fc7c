//! Closed-form functions of one variable with exact derivatives of any order.
//!
//! Kernels `k(z)` and operator coefficients `a(y), b(y), c(y)` are built as
//! small expression trees. Evaluating a tree as a [`Jet`] yields the value
//! together with its Taylor coefficients, so no derivative is ever taken by
//! finite differences.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::jet::Jet;

type C = Complex64;

#[derive(Clone)]
pub struct Expr(Arc<Node>);

enum Node {
    Const(C),
    Var,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Exp(Expr),
    Sinh(Expr),
    Cosh(Expr),
    Sqrt(Expr),
    /// Pointwise complex conjugate. Only meaningful on the real axis.
    Conj(Expr),
    Deriv(Expr),
}

impl Expr {
    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(c: C) -> Self {
        Expr::node(Node::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Expr::constant(C::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Expr::real(0.0)
    }

    pub fn one() -> Self {
        Expr::real(1.0)
    }

    /// The independent variable.
    pub fn var() -> Self {
        Expr::node(Node::Var)
    }

    /// `sum p[j] * t^j` in Horner form.
    pub fn poly(p: &[C]) -> Self {
        let t = Expr::var();
        let mut acc = Expr::zero();
        for (i, c) in p.iter().rev().enumerate() {
            acc = if i == 0 {
                Expr::constant(*c)
            } else {
                acc * t.clone() + Expr::constant(*c)
            };
        }
        acc
    }

    pub fn exp(&self) -> Self {
        Expr::node(Node::Exp(self.clone()))
    }

    pub fn sinh(&self) -> Self {
        Expr::node(Node::Sinh(self.clone()))
    }

    pub fn cosh(&self) -> Self {
        Expr::node(Node::Cosh(self.clone()))
    }

    pub fn sqrt(&self) -> Self {
        Expr::node(Node::Sqrt(self.clone()))
    }

    pub fn conj(&self) -> Self {
        Expr::node(Node::Conj(self.clone()))
    }

    pub fn deriv(&self) -> Self {
        Expr::node(Node::Deriv(self.clone()))
    }

    pub fn scale(&self, s: C) -> Self {
        Expr::constant(s) * self.clone()
    }

    /// Taylor expansion at `t0` truncated after `order`.
    pub fn jet(&self, t0: C, order: usize) -> Jet {
        match &*self.0 {
            Node::Const(c) => Jet::constant(*c, order),
            Node::Var => Jet::variable(t0, order),
            Node::Add(a, b) => &a.jet(t0, order) + &b.jet(t0, order),
            Node::Sub(a, b) => &a.jet(t0, order) - &b.jet(t0, order),
            Node::Mul(a, b) => &a.jet(t0, order) * &b.jet(t0, order),
            Node::Div(a, b) => a.jet(t0, order).div(&b.jet(t0, order)),
            Node::Neg(a) => -&a.jet(t0, order),
            Node::Exp(a) => a.jet(t0, order).exp(),
            Node::Sinh(a) => a.jet(t0, order).sinh_cosh().0,
            Node::Cosh(a) => a.jet(t0, order).sinh_cosh().1,
            Node::Sqrt(a) => a.jet(t0, order).sqrt(),
            Node::Conj(a) => a.jet(t0, order).conj(),
            Node::Deriv(a) => a.jet(t0, order + 1).differentiate(),
        }
    }

    pub fn eval(&self, t: f64) -> C {
        self.eval_complex(C::new(t, 0.0))
    }

    pub fn eval_complex(&self, t: C) -> C {
        self.jet(t, 0).value()
    }

    /// `[f(t), f'(t), ..., f^(n)(t)]`.
    pub fn derivatives(&self, t: f64, n: usize) -> Vec<C> {
        self.jet(C::new(t, 0.0), n).derivatives()
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var => write!(f, "t"),
            Node::Add(a, b) => write!(f, "({a:?} + {b:?})"),
            Node::Sub(a, b) => write!(f, "({a:?} - {b:?})"),
            Node::Mul(a, b) => write!(f, "{a:?}*{b:?}"),
            Node::Div(a, b) => write!(f, "{a:?}/{b:?}"),
            Node::Neg(a) => write!(f, "-{a:?}"),
            Node::Exp(a) => write!(f, "exp({a:?})"),
            Node::Sinh(a) => write!(f, "sinh({a:?})"),
            Node::Cosh(a) => write!(f, "cosh({a:?})"),
            Node::Sqrt(a) => write!(f, "sqrt({a:?})"),
            Node::Conj(a) => write!(f, "conj({a:?})"),
            Node::Deriv(a) => write!(f, "d({a:?})"),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $node:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::node(Node::$node(self, rhs))
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::node(Node::$node(self.clone(), rhs.clone()))
            }
        }
        impl $tr<C> for Expr {
            type Output = Expr;
            fn $m(self, rhs: C) -> Expr {
                Expr::node(Node::$node(self, Expr::constant(rhs)))
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::node(Node::$node(self, Expr::real(rhs)))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::node(Node::Neg(self))
    }
}

impl Mul<Expr> for C {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::constant(self) * rhs
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::real(self) * rhs
    }
}
