//! Pointwise certification of the commutation identities.
//!
//! The central object is
//!
//! ```text
//! F(y,z) = [a(y+z)-a(y)] k''(z) + [2a'(y) + b(y+z)-b(y)] k'(z)
//!        + [c(y+z)-c(y) + b'(y) - a''(y)] k(z)
//! ```
//!
//! which vanishes identically exactly when `KL = LK`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::families::{gauge_transform, CommutingPair, DiffOp, KernelSpec};
use crate::jet::{binomial, Jet};

type C = Complex64;

/// Number of sample points used by the coefficient-relation checks.
pub const RELATION_POINTS: usize = 21;

/// Chebyshev-Lobatto points on `[lo, hi]`, ascending.
pub fn chebyshev_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|j| {
            let t = -(std::f64::consts::PI * j as f64 / (n - 1) as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * t
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualGrid {
    pub ny: usize,
    pub nz: usize,
    /// Points with `|z| <= z_exclusion` are skipped for singular kernels.
    pub z_exclusion: f64,
}

impl ResidualGrid {
    /// 41 x 41 tensor grid with exclusion radius 1e-2.
    pub fn standard() -> Self {
        ResidualGrid {
            ny: 41,
            nz: 41,
            z_exclusion: 1e-2,
        }
    }
}

impl Default for ResidualGrid {
    fn default() -> Self {
        ResidualGrid::standard()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub rms: f64,
    /// `(y, z)` where `max_abs` is attained.
    pub argmax: (f64, f64),
    pub n_points: usize,
    /// `max |k|` over the sampled `z`.
    pub scale: f64,
}

impl ResidualReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_abs / self.scale
        } else {
            self.max_abs
        }
    }
}

/// `f(t0 + h) - f(t0)` without cancellation for small `h`.
struct Increment {
    expr: Expr,
    t0: f64,
    jet: Jet,
}

const INCREMENT_ORDER: usize = 30;
const INCREMENT_RADIUS: f64 = 0.25;

impl Increment {
    fn new(expr: &Expr, t0: f64) -> Self {
        Increment {
            expr: expr.clone(),
            t0,
            jet: expr.jet(C::new(t0, 0.0), INCREMENT_ORDER),
        }
    }

    fn value(&self) -> C {
        self.jet.value()
    }

    fn at(&self, h: f64) -> C {
        if h.abs() <= INCREMENT_RADIUS {
            let h = C::new(h, 0.0);
            self.jet.coeffs()[1..]
                .iter()
                .rev()
                .fold(C::new(0.0, 0.0), |acc, c| (acc + c) * h)
        } else {
            self.expr.eval(self.t0 + h) - self.value()
        }
    }
}

/// `(R2)` residual with `L2` evaluated at `y+z` and `L1` at `y`.
pub fn residual_r2(
    kernel: &KernelSpec,
    l1: &DiffOp,
    l2: &DiffOp,
    grid: &ResidualGrid,
) -> Result<ResidualReport> {
    if grid.ny < 2 || grid.nz < 2 {
        return Err(Error::Grid(format!(
            "need ny, nz >= 2 (got {} x {})",
            grid.ny, grid.nz
        )));
    }
    let mut max_abs: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut argmax = (0.0, 0.0);
    let mut n_points = 0;
    let mut scale: f64 = 0.0;

    for y in chebyshev_points(grid.ny, -1.0, 1.0) {
        let a1 = l1.a.derivatives(y, 2);
        let b1 = l1.b.derivatives(y, 1);
        let c1 = l1.c.eval(y);
        let a2 = Increment::new(&l2.a, y);
        let b2 = Increment::new(&l2.b, y);
        let c2 = Increment::new(&l2.c, y);
        // L2 - L1 at the same point, zero when L1 = L2
        let (da, db, dc) = (a2.value() - a1[0], b2.value() - b1[0], c2.value() - c1);

        for z in chebyshev_points(grid.nz, -1.0 - y, 1.0 - y) {
            if kernel.singular() && z.abs() <= grid.z_exclusion {
                continue;
            }
            let k = kernel.derivatives(C::new(z, 0.0), 2)?;
            let f = (a2.at(z) + da) * k[2]
                + (a1[1] * 2.0 + b2.at(z) + db) * k[1]
                + (c2.at(z) + dc + b1[1] - a1[2]) * k[0];
            let r = f.norm();
            if r > max_abs || n_points == 0 {
                max_abs = r;
                argmax = (y, z);
            }
            sum_sq += r * r;
            scale = scale.max(k[0].norm());
            n_points += 1;
        }
    }
    if n_points == 0 {
        return Err(Error::Grid(
            "no sample points survive the exclusion radius".into(),
        ));
    }
    Ok(ResidualReport {
        max_abs,
        rms: (sum_sq / n_points as f64).sqrt(),
        argmax,
        n_points,
        scale,
    })
}

pub fn residual_r1(pair: &CommutingPair, grid: &ResidualGrid) -> Result<ResidualReport> {
    residual_r2(&pair.kernel, &pair.op, &pair.op, grid)
}

/// Rows `n = 0..=n_max` of the `n`-th `z`-derivative of (R1) at `z = 0`,
/// given `k_n = k^(n)(0)`. Each entry is the max over the sample points.
pub fn taylor_relation_residuals(op: &DiffOp, k: &[C], n_max: usize) -> Result<Vec<f64>> {
    if n_max + 2 > k.len() {
        return Err(Error::Grid(format!(
            "order {n_max} needs {} kernel derivatives, have {}",
            n_max + 2,
            k.len()
        )));
    }
    let points = chebyshev_points(RELATION_POINTS, -1.0, 1.0);
    let derivs: Vec<_> = points.iter().map(|&y| op.at(y, n_max.max(2))).collect();
    Ok((0..=n_max)
        .map(|n| {
            derivs
                .iter()
                .map(|d| {
                    let mut s = d.a[1] * 2.0 * k[n + 1] + (d.b[1] - d.a[2]) * k[n];
                    for j in 0..n {
                        let cnj = binomial(n, j);
                        s += (d.a[n - j] * k[j + 2] + d.b[n - j] * k[j + 1] + d.c[n - j] * k[j])
                            * cnj;
                    }
                    s.norm()
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

pub fn taylor_relation_check(pair: &CommutingPair, n_max: usize) -> Result<Vec<f64>> {
    let k = pair.kernel.derivatives_at_zero()?;
    taylor_relation_residuals(&pair.op, &k, n_max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub b_eq_aprime: f64,
    pub c_eq_nu_a: f64,
    pub a_ode: f64,
    /// Fitted constant in `a''' + alpha a' = 0`.
    pub alpha: C,
    pub nu: C,
    /// `k_0 .. k_3` (derivatives at 0).
    pub k: [C; 4],
}

/// Applies the gauge `tau = -k_1/k_0` so that `k'(0) = 0`; for singular
/// kernels also rescales so that the residue is 1.
pub fn normalize_gauge(pair: &CommutingPair) -> Result<CommutingPair> {
    let s = pair.kernel.series();
    let tau = -s[1] / s[0];
    let scale = if pair.kernel.singular() {
        C::new(1.0, 0.0) / s[0]
    } else {
        C::new(1.0, 0.0)
    };
    gauge_transform(pair, tau, scale, C::new(0.0, 0.0))
}

/// Least-squares `alpha` minimizing `sum |u + alpha v|^2`.
fn fit_scalar(u: &[C], v: &[C]) -> C {
    let num: C = u.iter().zip(v).map(|(u, v)| v.conj() * u).sum();
    let den: f64 = v.iter().map(|v| v.norm_sqr()).sum();
    if den == 0.0 {
        C::new(0.0, 0.0)
    } else {
        -num / den
    }
}

pub fn lemma_coeff_check(pair: &CommutingPair) -> Result<LemmaReport> {
    let k = pair.kernel.derivatives_at_zero()?;
    if (k[1] / k[0]).norm() > 1e-10 {
        return Err(Error::Gauge(format!(
            "|k1/k0| = {:e}; apply normalize_gauge first",
            (k[1] / k[0]).norm()
        )));
    }
    let nu = -k[2] * 3.0 / k[0];
    let points = chebyshev_points(RELATION_POINTS, -1.0, 1.0);
    let mut b_eq_aprime: f64 = 0.0;
    let mut c_eq_nu_a: f64 = 0.0;
    let mut a1 = Vec::new();
    let mut a3 = Vec::new();
    for &y in &points {
        let d = pair.op.at(y, 3);
        b_eq_aprime = b_eq_aprime.max((d.b[0] - d.a[1]).norm());
        c_eq_nu_a = c_eq_nu_a.max((d.c[0] - nu * d.a[0]).norm());
        a1.push(d.a[1]);
        a3.push(d.a[3]);
    }
    let alpha = fit_scalar(&a3, &a1);
    let a_ode = a3
        .iter()
        .zip(&a1)
        .map(|(u, v)| (u + alpha * v).norm())
        .fold(0.0, f64::max);
    Ok(LemmaReport {
        b_eq_aprime,
        c_eq_nu_a,
        a_ode,
        alpha,
        nu,
        k: [k[0], k[1], k[2], k[3]],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularRelation {
    pub residual: f64,
    pub fitted_const: C,
}

/// `c + a''/3 + 2 k_2 a - b'/2 = const`, with `k_2` the `z^2` coefficient
/// of `z k(z)` (normalized so that `k_0 = 1`, `k_1 = 0`).
pub fn singular_relation_check(pair: &CommutingPair) -> Result<SingularRelation> {
    if !pair.kernel.singular() {
        return Err(Error::RegularKernel);
    }
    let s = pair.kernel.series();
    if (s[0] - 1.0).norm() > 1e-10 || s[1].norm() > 1e-10 {
        return Err(Error::Gauge(format!(
            "need k0 = 1, k1 = 0 (have {}, {}); apply normalize_gauge first",
            s[0], s[1]
        )));
    }
    let k2 = s[2];
    let g: Vec<C> = chebyshev_points(RELATION_POINTS, -1.0, 1.0)
        .into_iter()
        .map(|y| {
            let d = pair.op.at(y, 2);
            d.c[0] + d.a[2] / 3.0 + k2 * 2.0 * d.a[0] - d.b[1] / 2.0
        })
        .collect();
    let fitted_const = g.iter().sum::<C>() / g.len() as f64;
    let residual = g
        .iter()
        .map(|v| (v - fitted_const).norm())
        .fold(0.0, f64::max);
    Ok(SingularRelation {
        residual,
        fitted_const,
    })
}

/// Boundary defect of the principal-value integration by parts around the
/// excluded interval `(x - eps, x + eps)`.
pub fn phi_defect(pair: &CommutingPair, u: &Expr, x: f64, eps: f64) -> Result<C> {
    if !pair.kernel.singular() {
        return Err(Error::RegularKernel);
    }
    if !(eps > 0.0 && x - eps >= -1.0 && x + eps <= 1.0) {
        return Err(Error::Domain(format!(
            "x = {x}, eps = {eps}: x +- eps must stay in [-1,1]"
        )));
    }
    let a = Increment::new(&pair.op.a, x);
    let b = Increment::new(&pair.op.b, x);
    let da = pair.op.a.deriv();
    let du = u.deriv();
    let kp = pair.kernel.derivatives(C::new(eps, 0.0), 1)?;
    let km = pair.kernel.derivatives(C::new(-eps, 0.0), 1)?;

    let (xm, xp) = (x - eps, x + eps);
    let left = kp[0] * (a.at(-eps) * du.eval(xm) + (b.at(-eps) - da.eval(xm)) * u.eval(xm));
    let right = km[0] * (a.at(eps) * du.eval(xp) + (b.at(eps) - da.eval(xp)) * u.eval(xp));
    let tail = kp[1] * u.eval(xm) * a.at(-eps) - km[1] * u.eval(xp) * a.at(eps);
    Ok(left - right + tail)
}

/// Least-squares slope of `log|phi|` against `log eps`.
pub fn phi_decay_slope(pair: &CommutingPair, u: &Expr, x: f64, eps: &[f64]) -> Result<f64> {
    let mut pts = Vec::with_capacity(eps.len());
    for &e in eps {
        pts.push((e.ln(), phi_defect(pair, u, x, e)?.norm().ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
