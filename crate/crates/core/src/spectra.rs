//! Commutator norms and joint diagonalization of `K` by eigenvectors of `L`.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::OperatorMatrix;
use crate::error::{Error, Result};

type C = Complex64;

pub const POWER_ITERATIONS: usize = 50;
pub const POWER_TOLERANCE: f64 = 1e-10;
/// Relative gap below which two `L` eigenvalues count as one cluster.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Spectral norm estimate by power iteration on `A^H A`.
pub fn spectral_norm(a: &Mat<C>) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut v = Mat::<C>::from_fn(n, 1, |i, _| {
        C::new(1.0 + 0.5 * (i as f64).sin(), 0.25 * (i as f64).cos())
    });
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let nv = v.norm_l2();
        if nv == 0.0 {
            return 0.0;
        }
        v *= faer::Scale(C::new(1.0 / nv, 0.0));
        let av = a * &v;
        let next = av.norm_l2();
        v = a.adjoint() * &av;
        let done = (next - sigma).abs() <= POWER_TOLERANCE * next;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}

fn same_grid(k: &OperatorMatrix, l: &OperatorMatrix) -> Result<()> {
    if k.grid.nodes != l.grid.nodes || k.n() != l.n() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn submatrix(a: &Mat<C>, idx: &[usize]) -> Mat<C> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

fn relative_commutator(k: &Mat<C>, l: &Mat<C>, c: &Mat<C>) -> f64 {
    spectral_norm(c) / (spectral_norm(k) * spectral_norm(l) + f64::MIN_POSITIVE)
}

/// `||KL - LK|| / (||K|| ||L||)` in the spectral norm.
pub fn commutator_norm(k: &OperatorMatrix, l: &OperatorMatrix) -> Result<f64> {
    same_grid(k, l)?;
    let (k, l) = (&k.entries, &l.entries);
    let c = k * l - l * k;
    Ok(relative_commutator(k, l, &c))
}

/// As `commutator_norm`, with all three matrices restricted to the rows and
/// columns of interior nodes after forming the products.
pub fn commutator_norm_interior(k: &OperatorMatrix, l: &OperatorMatrix) -> Result<f64> {
    same_grid(k, l)?;
    let idx = k.grid.interior();
    let c = &k.entries * &l.entries - &l.entries * &k.entries;
    Ok(relative_commutator(
        &submatrix(&k.entries, &idx),
        &submatrix(&l.entries, &idx),
        &submatrix(&c, &idx),
    ))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeOrder {
    /// Smallest `|lambda|` first.
    #[default]
    Magnitude,
    /// Smallest real part first.
    RealPart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    #[serde(rename = "L_eigenvalues")]
    pub l_eigenvalues: Vec<C>,
    pub rayleigh: Vec<C>,
    pub mode_residuals: Vec<f64>,
    pub offdiag_energy: f64,
    #[serde(rename = "K_eigenvalues_direct")]
    pub k_eigenvalues_direct: Vec<C>,
    pub degenerate_spectrum: bool,
    /// Max relative distance between the Rayleigh quotients and the direct
    /// eigenvalues, both sorted by decreasing magnitude.
    pub rayleigh_vs_direct: f64,
    /// Same comparison divided by the largest direct eigenvalue magnitude.
    pub rayleigh_vs_direct_scaled: f64,
}

impl SpectralReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "idx,re_L,im_L,re_rayleigh,im_rayleigh,residual")?;
        for (i, ((l, r), res)) in self
            .l_eigenvalues
            .iter()
            .zip(&self.rayleigh)
            .zip(&self.mode_residuals)
            .enumerate()
        {
            writeln!(
                w,
                "{i},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                l.re, l.im, r.re, r.im, res
            )?;
        }
        Ok(())
    }
}

fn eigen(a: &Mat<C>) -> Result<(Vec<C>, Mat<C>)> {
    let e = a.eigen().map_err(|e| Error::EigFailure(format!("{e:?}")))?;
    let s = e.S().column_vector();
    let vals: Vec<C> = (0..a.nrows()).map(|i| s[i]).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigFailure("non-finite eigenvalue".into()));
    }
    Ok((vals, e.U().to_owned()))
}

pub fn eigenvalues(a: &Mat<C>) -> Result<Vec<C>> {
    let vals = a
        .eigenvalues()
        .map_err(|e| Error::EigFailure(format!("{e:?}")))?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigFailure("non-finite eigenvalue".into()));
    }
    Ok(vals)
}

fn weighted_dot(w: &[f64], u: &[C], v: &[C]) -> C {
    w.iter()
        .zip(u)
        .zip(v)
        .map(|((w, u), v)| u.conj() * v * *w)
        .sum()
}

fn sorted_by_magnitude_desc(mut v: Vec<C>) -> Vec<C> {
    v.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    v
}

/// Uses the `m` lowest eigenvectors of `L` as an approximate eigenbasis of `K`.
pub fn joint_diagonalization(
    k: &OperatorMatrix,
    l: &OperatorMatrix,
    m: usize,
    order: ModeOrder,
) -> Result<SpectralReport> {
    same_grid(k, l)?;
    let n = k.n();
    if m == 0 || m > n {
        return Err(Error::Size(m));
    }
    let w = &k.grid.weights;
    let (vals, vecs) = eigen(&l.entries)?;
    let mut idx: Vec<usize> = (0..n).collect();
    match order {
        ModeOrder::Magnitude => idx.sort_by(|&i, &j| vals[i].norm().total_cmp(&vals[j].norm())),
        ModeOrder::RealPart => idx.sort_by(|&i, &j| vals[i].re.total_cmp(&vals[j].re)),
    }
    idx.truncate(m);

    let scale = vals
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let cluster = |i: usize, j: usize| (vals[i] - vals[j]).norm() <= DEGENERACY_GAP * scale;
    let degenerate_spectrum = idx
        .iter()
        .enumerate()
        .any(|(p, &i)| idx[..p].iter().any(|&j| cluster(i, j)));

    let modes: Vec<Vec<C>> = idx
        .iter()
        .map(|&c| {
            let v: Vec<C> = (0..n).map(|r| vecs[(r, c)]).collect();
            let nv = weighted_dot(w, &v, &v).re.sqrt();
            v.into_iter().map(|x| x / nv).collect()
        })
        .collect();
    let images: Vec<Vec<C>> = modes.iter().map(|v| k.apply(v)).collect();

    let mut rayleigh = Vec::with_capacity(m);
    let mut mode_residuals = Vec::with_capacity(m);
    for (v, kv) in modes.iter().zip(&images) {
        let rho = weighted_dot(w, v, kv);
        let diff: Vec<C> = kv.iter().zip(v).map(|(a, b)| a - rho * b).collect();
        let denom = weighted_dot(w, kv, kv).re.sqrt();
        let res = weighted_dot(w, &diff, &diff).re.sqrt();
        rayleigh.push(rho);
        mode_residuals.push(if denom > 0.0 { res / denom } else { res });
    }

    let mut max_diag: f64 = 0.0;
    let mut max_off: f64 = 0.0;
    for (p, v) in modes.iter().enumerate() {
        for (q, kv) in images.iter().enumerate() {
            let e = weighted_dot(w, v, kv).norm();
            if p == q {
                max_diag = max_diag.max(e);
            } else if !cluster(idx[p], idx[q]) {
                max_off = max_off.max(e);
            }
        }
    }
    let offdiag_energy = if max_diag > 0.0 {
        max_off / max_diag
    } else {
        max_off
    };

    let direct = sorted_by_magnitude_desc(eigenvalues(&k.entries)?);
    let k_eigenvalues_direct: Vec<C> = direct.into_iter().take(m).collect();
    let from_modes = sorted_by_magnitude_desc(rayleigh.clone());
    let rayleigh_vs_direct = from_modes
        .iter()
        .zip(&k_eigenvalues_direct)
        .map(|(a, b)| (a - b).norm() / b.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let top = k_eigenvalues_direct
        .first()
        .map_or(0.0, |v| v.norm())
        .max(f64::MIN_POSITIVE);
    let rayleigh_vs_direct_scaled = from_modes
        .iter()
        .zip(&k_eigenvalues_direct)
        .map(|(a, b)| (a - b).norm() / top)
        .fold(0.0, f64::max);

    Ok(SpectralReport {
        l_eigenvalues: idx.iter().map(|&i| vals[i]).collect(),
        rayleigh,
        mode_residuals,
        offdiag_energy,
        k_eigenvalues_direct,
        degenerate_spectrum,
        rayleigh_vs_direct,
        rayleigh_vs_direct_scaled,
    })
}
