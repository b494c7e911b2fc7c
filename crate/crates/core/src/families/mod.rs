//! The commuting pairs `(k, L)` of the classification.
//!
//! General family:
//!
//! ```text
//! k(z) = lambda / sinh(lambda z / 2) * (alpha1 sinh(mu z)/mu + alpha2 cosh(mu z))
//! a(y) = (cosh(lambda y) - cosh(lambda)) / lambda^2,  b = a',  c = (lambda^2/4 - mu^2) a
//! ```
//!
//! plus four special parameter choices for which `L` may be more general.

mod diffop;
mod kernel;
mod params;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use diffop::{CoeffDerivs, DiffOp, Gauge};
pub use kernel::{Denominator, KernelSpec, SERIES_ORDER, SWITCH_RADIUS};
pub use params::FamilyParams;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::residual::{residual_r1, ResidualGrid};

type C = Complex64;

/// Below this magnitude `lambda` (resp. `mu`) is replaced by its limit.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub struct CommutingPair {
    pub kernel: KernelSpec,
    pub op: DiffOp,
    pub params: FamilyParams,
    /// `c = nu * a`, when that holds.
    pub nu: Option<C>,
}

impl CommutingPair {
    pub fn eval_kernel(&self, z: C) -> Result<C> {
        self.kernel.eval(z)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub ok: bool,
    pub reason: String,
}

impl Admissibility {
    fn accept(reason: &str) -> Self {
        Admissibility {
            ok: true,
            reason: reason.to_string(),
        }
    }

    fn reject(reason: &str) -> Self {
        Admissibility {
            ok: false,
            reason: reason.to_string(),
        }
    }
}

fn is_imaginary_axis(lambda: C) -> bool {
    lambda.re.abs() <= 1e-12 * lambda.norm().max(1.0)
}

fn nearest_integer(x: C) -> Option<i64> {
    let r = x.re.round();
    ((x - C::new(r, 0.0)).norm() <= 1e-9).then_some(r as i64)
}

fn admissible_lambda(lambda: C, mu: C, alpha1: C, general: bool) -> Admissibility {
    if !is_imaginary_axis(lambda) {
        return Admissibility::accept("lambda off the imaginary axis");
    }
    let modulus = lambda.norm();
    if general && modulus >= DEGENERACY_THRESHOLD {
        if let Some(n) = nearest_integer(C::new(modulus / PI, 0.0)) {
            if n != 0 {
                return Admissibility::reject(
                    "lambda in pi*i*Z is excluded from the general family (see case1)",
                );
            }
        }
    }
    if modulus < PI {
        return Admissibility::accept("|lambda| < pi");
    }
    if modulus < 2.0 * PI && alpha1 == ZERO {
        // mu = lambda (2m+1)/4  <=>  (4 mu / lambda - 1)/2 is an integer
        if nearest_integer((mu * 4.0 / lambda - 1.0) / 2.0).is_some() {
            return Admissibility::accept(
                "pi <= |lambda| < 2 pi with alpha1 = 0 and mu = lambda (2m+1)/4",
            );
        }
    }
    Admissibility::reject("non-removable singularity inside [-2,2]")
}

/// Parameter restrictions keeping `k` free of poles on `[-2,2] \ {0}`.
pub fn check_admissibility(params: &FamilyParams) -> Admissibility {
    match params {
        FamilyParams::General {
            lambda, mu, alpha1, ..
        } => admissible_lambda(*lambda, *mu, *alpha1, true),
        FamilyParams::Case1 { .. } => Admissibility::accept("lambda = pi i, mu = lambda (2m+1)/4"),
        FamilyParams::Case2 { lambda, .. } => admissible_lambda(*lambda, ZERO, ZERO, false),
        FamilyParams::Case3 { .. } | FamilyParams::Case4 { .. } => {
            Admissibility::accept("lambda = 0")
        }
    }
}

/// True when the kernel is an exponential polynomial (finite-rank `K`).
pub fn classify_trivial(params: &FamilyParams) -> bool {
    match params {
        FamilyParams::General {
            lambda, mu, alpha2, ..
        } => {
            if *alpha2 != ZERO {
                return false;
            }
            if lambda.norm() < DEGENERACY_THRESHOLD {
                // 2 sinh(mu z)/(mu z) is entire but not exponential unless mu = 0
                return mu.norm() < DEGENERACY_THRESHOLD;
            }
            // sinh(l w)/sinh(w), w = lambda z/2, is a Laurent polynomial in e^w
            matches!(nearest_integer(*mu * 2.0 / lambda), Some(l) if l != 0)
        }
        _ => false,
    }
}

struct RawPair {
    kernel: KernelSpec,
    op: DiffOp,
    nu: Option<C>,
}

fn general_unchecked(lambda: C, mu: C, alpha1: C, alpha2: C, trivial: bool) -> RawPair {
    let z = Expr::var();
    let second = if mu.norm() < DEGENERACY_THRESHOLD {
        z.clone() * alpha1 + Expr::constant(alpha2)
    } else {
        (z.clone() * mu).sinh() * (alpha1 / mu) + (z.clone() * mu).cosh() * alpha2
    };
    let (kernel, a) = if lambda.norm() < DEGENERACY_THRESHOLD {
        let k = KernelSpec::new(
            second,
            Denominator::Linear,
            C::new(2.0, 0.0),
            alpha2 != ZERO,
            trivial,
        );
        let y = Expr::var();
        (k, (y.clone() * y - 1.0) * 0.5)
    } else {
        let k = KernelSpec::new(
            second,
            Denominator::Sinh(lambda / 2.0),
            lambda,
            alpha2 != ZERO,
            trivial,
        );
        let y = Expr::var();
        (
            k,
            ((y * lambda).cosh() - Expr::constant(lambda.cosh())) * (ONE / (lambda * lambda)),
        )
    };
    let nu = if lambda.norm() < DEGENERACY_THRESHOLD {
        -mu * mu
    } else {
        lambda * lambda / 4.0 - mu * mu
    };
    let op = DiffOp::new(a.clone(), a.deriv(), a.scale(nu));
    RawPair {
        kernel,
        op,
        nu: Some(nu),
    }
}

pub fn make_general_pair(lambda: C, mu: C, alpha1: C, alpha2: C) -> Result<CommutingPair> {
    let params = FamilyParams::General {
        lambda,
        mu,
        alpha1,
        alpha2,
    };
    if alpha1 == ZERO && alpha2 == ZERO {
        return Err(Error::Degenerate("alpha1 = alpha2 = 0".into()));
    }
    let adm = check_admissibility(&params);
    if !adm.ok {
        return Err(Error::Admissibility(adm.reason));
    }
    let raw = general_unchecked(lambda, mu, alpha1, alpha2, classify_trivial(&params));
    Ok(CommutingPair {
        kernel: raw.kernel,
        op: raw.op,
        params,
        nu: raw.nu,
    })
}

fn poly_coeffs(p: &[C]) -> Result<[C; 3]> {
    if p.iter().skip(3).any(|c| *c != ZERO) {
        return Err(Error::InvalidPolynomial(format!(
            "degree {} > 2",
            p.len() - 1
        )));
    }
    let mut out = [ZERO; 3];
    for (o, c) in out.iter_mut().zip(p) {
        *o = *c;
    }
    Ok(out)
}

/// Checks that an item display reduces to the general family:
/// same kernel, and `(a, b, c)` equal to `ratio` times the general triple.
fn check_recovered(item: &RawPair, general: &RawPair, ratio: C, what: &str) -> Result<()> {
    let mut worst: f64 = 0.0;
    for z in [-1.7, -0.6, 0.45, 1.3] {
        let k1 = item.kernel.eval_real(z)?;
        let k2 = general.kernel.eval_real(z)?;
        worst = worst.max((k1 - k2).norm() / k2.norm().max(1.0));
    }
    for y in [-0.9, -0.3, 0.2, 0.7, 1.0] {
        let u = item.op.at(y, 0);
        let v = general.op.at(y, 0);
        for (p, q) in [(u.a[0], v.a[0]), (u.b[0], v.b[0]), (u.c[0], v.c[0])] {
            let q = q * ratio;
            worst = worst.max((p - q).norm() / q.norm().max(1.0));
        }
    }
    if worst > 1e-12 {
        return Err(Error::Recovery(format!("{what}: mismatch {worst:e}")));
    }
    Ok(())
}

pub fn make_special_pair(params: &FamilyParams) -> Result<CommutingPair> {
    let y = Expr::var();
    let z = Expr::var();
    let raw = match params {
        FamilyParams::General { .. } => {
            return Err(Error::Degenerate(
                "make_special_pair needs case1..case4".into(),
            ))
        }
        FamilyParams::Case1 { m, alpha, beta } => {
            if *alpha == ZERO && *beta == ZERO {
                return Err(Error::Degenerate("alpha = beta = 0 gives L = 0".into()));
            }
            let lambda = C::new(0.0, PI);
            let odd = (2 * m + 1) as f64;
            let mu = lambda * odd / 4.0;
            // cos(odd pi z/4) / sin(pi z/2) = i cosh(mu z) / sinh(lambda z/2)
            let kernel = KernelSpec::new(
                (z * mu).cosh(),
                Denominator::Sinh(lambda / 2.0),
                I,
                true,
                false,
            );
            let a = ((y.clone() * lambda).exp() - Expr::constant(lambda.exp())) * *alpha
                + ((y * (-lambda)).exp() - Expr::constant((-lambda).exp())) * *beta;
            let nu = C::new(PI * PI / 4.0 * (odd * odd / 4.0 - 1.0), 0.0);
            let op = DiffOp::new(a.clone(), a.deriv(), a.scale(nu));
            let raw = RawPair {
                kernel,
                op,
                nu: Some(nu),
            };
            if alpha == beta {
                let g = general_unchecked(lambda, mu, ZERO, C::new(1.0 / PI, 0.0), false);
                check_recovered(
                    &raw,
                    &g,
                    *alpha * (-2.0 * PI * PI),
                    "case1 with alpha = beta",
                )?;
            }
            raw
        }
        FamilyParams::Case2 {
            lambda,
            alpha,
            beta,
        } => {
            if lambda.norm() < DEGENERACY_THRESHOLD {
                return Err(Error::Degenerate("case2 needs lambda != 0".into()));
            }
            if *alpha == ZERO && *beta == ZERO {
                return Err(Error::Degenerate("alpha = beta = 0 gives L = 0".into()));
            }
            let adm = check_admissibility(params);
            if !adm.ok {
                return Err(Error::Admissibility(adm.reason));
            }
            let kernel = KernelSpec::new(
                Expr::one(),
                Denominator::Sinh(*lambda / 2.0),
                ONE,
                true,
                false,
            );
            let a0 = (y * *lambda).cosh() - Expr::constant(lambda.cosh());
            let da0 = a0.deriv();
            let a = a0.scale(*alpha);
            let b = da0.scale(*alpha) + a0.scale(*beta);
            let c = da0.scale(*beta / 2.0) + a0.scale(*alpha * lambda * lambda / 4.0);
            let nu = (*beta == ZERO).then(|| lambda * lambda / 4.0);
            let raw = RawPair {
                kernel,
                op: DiffOp::new(a, b, c),
                nu,
            };
            if *beta == ZERO {
                let g = general_unchecked(*lambda, ZERO, ZERO, ONE / lambda, false);
                check_recovered(&raw, &g, *alpha * lambda * lambda, "case2 with beta = 0")?;
            }
            raw
        }
        FamilyParams::Case3 { beta, p } => {
            let p = poly_coeffs(p)?;
            if p[1] != ZERO {
                return Err(Error::InvalidPolynomial("case3 requires p'(0) = 0".into()));
            }
            if *beta == ZERO {
                return Err(Error::DivisionByZero(
                    "case3 kernel 1/beta + 1/z needs beta != 0".into(),
                ));
            }
            if p.iter().all(|c| *c == ZERO) {
                return Err(Error::Degenerate("p = 0 gives L = 0".into()));
            }
            let kernel = KernelSpec::new(
                z * (ONE / beta) + 1.0,
                Denominator::Linear,
                ONE,
                true,
                false,
            );
            let pe = Expr::poly(&p);
            let dp = pe.deriv();
            let a = (y.clone() * y.clone() - 1.0) * pe.clone();
            let b = a.deriv() + y * dp.clone() * *beta - dp.deriv().scale(*beta);
            let c = dp.scale(*beta);
            let constant = p[2] == ZERO;
            let raw = RawPair {
                kernel,
                op: DiffOp::new(a, b, c),
                nu: constant.then_some(ZERO),
            };
            if constant {
                let g = general_unchecked(ZERO, ZERO, ONE / (beta * 2.0), C::new(0.5, 0.0), false);
                check_recovered(&raw, &g, p[0] * 2.0, "case3 with constant p")?;
            }
            raw
        }
        FamilyParams::Case4 { beta, p } => {
            let p = poly_coeffs(p)?;
            if p.iter().all(|c| *c == ZERO) && *beta == ZERO {
                return Err(Error::Degenerate("p = 0 and beta = 0 give L = 0".into()));
            }
            let kernel = KernelSpec::new(Expr::one(), Denominator::Linear, ONE, true, false);
            let pe = Expr::poly(&p);
            let q = y.clone() * y.clone() - 1.0;
            let a = q.clone() * pe.clone();
            let b = a.deriv() + q.scale(*beta);
            let c = y.clone() * pe.deriv() + y.scale(*beta);
            let recovers = p[1] == ZERO && p[2] == ZERO && *beta == ZERO;
            let raw = RawPair {
                kernel,
                op: DiffOp::new(a, b, c),
                nu: recovers.then_some(ZERO),
            };
            if recovers {
                let g = general_unchecked(ZERO, ZERO, ZERO, C::new(0.5, 0.0), false);
                check_recovered(&raw, &g, p[0] * 2.0, "case4 with constant p, beta = 0")?;
            }
            raw
        }
    };
    Ok(CommutingPair {
        kernel: raw.kernel,
        op: raw.op,
        params: params.clone(),
        nu: raw.nu,
    })
}

/// Builds the pair for any parameter set.
pub fn make_pair(params: &FamilyParams) -> Result<CommutingPair> {
    match params {
        FamilyParams::General {
            lambda,
            mu,
            alpha1,
            alpha2,
        } => make_general_pair(*lambda, *mu, *alpha1, *alpha2),
        _ => make_special_pair(params),
    }
}

/// Conjugation by `exp(tau y)`, kernel rescaling and constant shift of `c`.
///
/// Fails only if the transform turns a passing identity check into a failing
/// one, which would indicate a bug in the conjugation formulas.
pub fn gauge_transform(pair: &CommutingPair, tau: C, scale: C, shift: C) -> Result<CommutingPair> {
    let kernel = pair.kernel.gauged(tau, scale);
    let mut op = pair.op.conjugated(tau, shift);
    op.gauge.scale = pair.op.gauge.scale * scale;
    let nu = if tau == ZERO && shift == ZERO {
        pair.nu
    } else {
        None
    };
    let out = CommutingPair {
        kernel,
        op,
        params: pair.params.clone(),
        nu,
    };

    let grid = ResidualGrid::standard();
    let before = residual_r1(pair, &grid)?;
    let after = residual_r1(&out, &grid)?;
    if before.relative() <= 1e-9 && after.relative() > 1e-9 {
        return Err(Error::GaugeBroken(after.relative()));
    }
    Ok(out)
}
