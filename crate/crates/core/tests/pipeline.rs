use std::f64::consts::PI;

use commutant_lab::discretization::{build_grid, collocation_l, kernel_matrix, GridKind};
use commutant_lab::families::{
    gauge_transform, make_general_pair, make_special_pair, FamilyParams,
};
use commutant_lab::residual::{residual_r1, ResidualGrid};
use commutant_lab::spectra::{
    commutator_norm, commutator_norm_interior, joint_diagonalization, ModeOrder,
};
use commutant_lab::{Error, C};

fn r(x: f64) -> C {
    C::new(x, 0.0)
}

#[test]
fn gauge_preserves_identity_and_commutation() {
    let p = make_general_pair(r(1.0), r(0.5), r(1.0), r(0.0)).unwrap();
    let g = gauge_transform(&p, C::new(0.3, -0.2), C::new(2.0, 1.0), r(-4.0)).unwrap();
    assert!(
        residual_r1(&g, &ResidualGrid::standard())
            .unwrap()
            .relative()
            <= 1e-10
    );
    let grid = build_grid(48, GridKind::LegendreGaussLobatto).unwrap();
    let c = commutator_norm(
        &kernel_matrix(&g, &grid).unwrap(),
        &collocation_l(&g.op, &grid).unwrap(),
    )
    .unwrap();
    assert!(c <= 1e-10, "{c}");
}

#[test]
fn regular_commutator_small_for_complex_pair() {
    let p = make_general_pair(C::new(0.5, 1.0), C::new(-0.2, 0.7), r(1.0), r(0.0)).unwrap();
    let grid = build_grid(48, GridKind::LegendreGaussLobatto).unwrap();
    let c = commutator_norm(
        &kernel_matrix(&p, &grid).unwrap(),
        &collocation_l(&p.op, &grid).unwrap(),
    )
    .unwrap();
    assert!(c <= 1e-10, "{c}");
}

#[test]
fn singular_commutator_decreases_with_n() {
    let p = make_special_pair(&FamilyParams::Case4 {
        beta: r(0.0),
        p: vec![r(1.0)],
    })
    .unwrap();
    let norms: Vec<f64> = [16, 64]
        .into_iter()
        .map(|n| {
            let g = build_grid(n, GridKind::LegendreGaussLobatto).unwrap();
            commutator_norm_interior(
                &kernel_matrix(&p, &g).unwrap(),
                &collocation_l(&p.op, &g).unwrap(),
            )
            .unwrap()
        })
        .collect();
    assert!(norms[1] < norms[0], "{norms:?}");
}

#[test]
fn sinc_modes_diagonalize_k() {
    let p = make_general_pair(r(0.0), C::new(0.0, PI / 2.0), r(1.0), r(0.0)).unwrap();
    let g = build_grid(48, GridKind::LegendreGaussLobatto).unwrap();
    let rep = joint_diagonalization(
        &kernel_matrix(&p, &g).unwrap(),
        &collocation_l(&p.op, &g).unwrap(),
        6,
        ModeOrder::Magnitude,
    )
    .unwrap();
    assert!(rep.offdiag_energy <= 1e-8);
    assert!(
        rep.mode_residuals.iter().all(|&x| x <= 1e-6),
        "{:?}",
        rep.mode_residuals
    );
    assert!(rep.rayleigh_vs_direct_scaled <= 1e-10);
    assert!(!rep.degenerate_spectrum);
}

#[test]
fn collocation_needs_lobatto_nodes() {
    let p = make_general_pair(r(1.0), r(0.5), r(1.0), r(0.0)).unwrap();
    let g = build_grid(16, GridKind::GaussLegendre).unwrap();
    assert!(matches!(collocation_l(&p.op, &g), Err(Error::GridKind)));
}
