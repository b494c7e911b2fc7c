//! Nyström images of `K` and collocation images of `L` on a shared grid.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{CommutingPair, DiffOp};

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    GaussLegendre,
    LegendreGaussLobatto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: GridKind,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Indices of nodes strictly inside `(-1, 1)`.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.nodes[i].abs() < 1.0)
            .collect()
    }

    /// Indices of nodes with `|x| <= 1 - margin`.
    pub fn interior_within(&self, margin: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.nodes[i].abs() <= 1.0 - margin)
            .collect()
    }

    /// Spectral differentiation matrix on the nodes.
    pub fn diff_matrix(&self) -> Mat<C> {
        diff_matrix(&self.nodes)
    }
}

/// `(P_n(x), P_{n-1}(x))`
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, pm) = legendre_pair(n, x);
            let dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, pm) = legendre_pair(n, x);
        let dp = n as f64 * (x * p - pm) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    let order = n - 1;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for j in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * j as f64 / order as f64).cos();
        if j > 0 {
            for _ in 0..100 {
                let (p, pm) = legendre_pair(order, x);
                let dx = (x * p - pm) / (n as f64 * p);
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        let (p, _) = legendre_pair(order, x);
        let w = 2.0 / ((order * n) as f64 * p * p);
        nodes[j] = -x;
        nodes[n - 1 - j] = x;
        weights[j] = w;
        weights[n - 1 - j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

pub fn build_grid(n: usize, kind: GridKind) -> Result<Grid> {
    if n < 2 {
        return Err(Error::Size(n));
    }
    let (nodes, weights) = match kind {
        GridKind::GaussLegendre => gauss_legendre(n),
        GridKind::LegendreGaussLobatto => gauss_lobatto(n),
    };
    Ok(Grid {
        nodes,
        weights,
        kind,
    })
}

/// Barycentric differentiation matrix; rows sum to zero by construction.
pub fn diff_matrix(x: &[f64]) -> Mat<C> {
    let n = x.len();
    // log |w_j| and sign of w_j = 1 / prod (x_j - x_k)
    let mut logw = vec![0.0; n];
    let mut sign = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let d = x[j] - x[k];
                logw[j] -= d.abs().ln();
                if d < 0.0 {
                    sign[j] = -sign[j];
                }
            }
        }
    }
    let mut d = Mat::<C>::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = sign[i] * sign[j] * (logw[j] - logw[i]).exp() / (x[i] - x[j]);
                d[(i, j)] = C::new(v, 0.0);
                diag -= v;
            }
        }
        d[(i, i)] = C::new(diag, 0.0);
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    K,
    L,
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub entries: Mat<C>,
    pub grid: Grid,
    pub role: Role,
    /// Set when endpoint rows of a principal-value matrix omit the
    /// divergent logarithmic term.
    pub endpoint_rows_truncated: bool,
}

impl OperatorMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, u: &[C]) -> Vec<C> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[(i, j)] * u[j]).sum())
            .collect()
    }

    /// Row-major CSV, each cell a quoted `"re,im"` pair.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.n())
                .map(|j| {
                    let v = self.entries[(i, j)];
                    format!("\"{:.16e},{:.16e}\"", v.re, v.im)
                })
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn nystrom_k(pair: &CommutingPair, grid: &Grid) -> Result<OperatorMatrix> {
    if pair.kernel.singular() {
        return Err(Error::SingularKernel);
    }
    let n = grid.len();
    let mut k = Mat::<C>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = pair.kernel.eval_real(grid.nodes[i] - grid.nodes[j])? * grid.weights[j];
        }
    }
    Ok(OperatorMatrix {
        entries: k,
        grid: grid.clone(),
        role: Role::K,
        endpoint_rows_truncated: false,
    })
}

/// Principal-value Nyström matrix by singularity subtraction:
///
/// ```text
/// pv int r u(y)/(x-y) dy = int r (u(y)-u(x))/(x-y) dy + r u(x) ln((1+x)/(1-x))
/// ```
///
/// The subtracted integrand equals `-r u'(x)` at `y = x`, which is supplied by
/// the differentiation matrix. At `x = +-1` the logarithm is dropped and
/// `endpoint_rows_truncated` is set.
pub fn nystrom_k_pv(pair: &CommutingPair, grid: &Grid) -> Result<OperatorMatrix> {
    let r = pair.kernel.residue().ok_or(Error::RegularKernel)?;
    let (x, w) = (&grid.nodes, &grid.weights);
    let n = grid.len();
    let d = grid.diff_matrix();
    let kreg0 = pair.kernel.regular_part(0.0)?;
    let mut k = Mat::<C>::zeros(n, n);
    let mut truncated = false;
    for i in 0..n {
        let mut pole_sum = 0.0;
        for j in 0..n {
            if i != j {
                k[(i, j)] = pair.kernel.eval_real(x[i] - x[j])? * w[j];
                pole_sum += w[j] / (x[i] - x[j]);
            }
        }
        let log = if x[i].abs() < 1.0 {
            ((1.0 + x[i]) / (1.0 - x[i])).ln()
        } else {
            truncated = true;
            0.0
        };
        k[(i, i)] = kreg0 * w[i] + r * (log - pole_sum);
        for j in 0..n {
            k[(i, j)] -= r * w[i] * d[(i, j)];
        }
    }
    Ok(OperatorMatrix {
        entries: k,
        grid: grid.clone(),
        role: Role::K,
        endpoint_rows_truncated: truncated,
    })
}

/// Routes to `nystrom_k` or `nystrom_k_pv` by the kernel type.
pub fn kernel_matrix(pair: &CommutingPair, grid: &Grid) -> Result<OperatorMatrix> {
    if pair.kernel.singular() {
        nystrom_k_pv(pair, grid)
    } else {
        nystrom_k(pair, grid)
    }
}

pub fn collocation_l(op: &DiffOp, grid: &Grid) -> Result<OperatorMatrix> {
    if grid.kind != GridKind::LegendreGaussLobatto {
        return Err(Error::GridKind);
    }
    let n = grid.len();
    let d = grid.diff_matrix();
    let d2 = &d * &d;
    let mut l = Mat::<C>::zeros(n, n);
    for i in 0..n {
        let y = grid.nodes[i];
        let (a, b, c) = (op.a.eval(y), op.b.eval(y), op.c.eval(y));
        for j in 0..n {
            l[(i, j)] = a * d2[(i, j)] + b * d[(i, j)];
        }
        l[(i, i)] += c;
    }
    Ok(OperatorMatrix {
        entries: l,
        grid: grid.clone(),
        role: Role::L,
        endpoint_rows_truncated: false,
    })
}
