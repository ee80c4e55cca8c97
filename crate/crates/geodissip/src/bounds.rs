//! Geometric, topological, and asymmetric lower bounds on the averaged
//! dissipation, the corresponding upper bound, and the supporting torus
//! integrals. All averages carry the 1/(4 pi^2) measure.

use std::f64::consts::PI;

use crate::bloch::{quality_factor, DissipatorParams};
use crate::error::Result;
use crate::geometry::{chern_number, gap_range, qgt_sample, TorusGrid};
use crate::model::PhaseField;

/// All bound values and supporting quantities for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct BoundsReport {
    /// Geometric bound omega1 omega2 avg[gamma |Omega_12|].
    pub w_gb: f64,
    /// Topological bound (omega1 omega2 / 2 pi) gamma_min |C|.
    pub w_tb: f64,
    /// Asymmetric bound omega1 omega2 gamma_min Delta_min^2 C^2 / (8 pi^2 (P1 + P2)).
    pub w_fb: f64,
    /// Upper bound 2 gamma_max (omega1^2 P1 + omega2^2 P2) / Delta_min^2.
    pub w_ub: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub delta_min: f64,
    /// Smoothness measures P_i = avg[(del_phi_i d)^2], full d derivatives.
    pub p1: f64,
    pub p2: f64,
    pub chern: i64,
    pub g12_avg: f64,
}

impl BoundsReport {
    pub fn compute(
        field: &impl PhaseField,
        params: &DissipatorParams,
        n_grid: usize,
    ) -> Result<Self> {
        gap_range(field, TorusGrid::new(n_grid))?;
        let grid = TorusGrid::new(n_grid);
        let mut gamma_min = f64::INFINITY;
        let mut gamma_max = 0.0_f64;
        let mut delta_min = f64::INFINITY;
        let mut gamma_abs_berry = 0.0;
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        let mut g12_avg = 0.0;
        for p in grid.iter() {
            let s = qgt_sample(field, p)?;
            let gamma = quality_factor(s.gap, params.tau2());
            gamma_min = gamma_min.min(gamma);
            gamma_max = gamma_max.max(gamma);
            delta_min = delta_min.min(s.gap);
            gamma_abs_berry += gamma * s.berry.abs();
            p1 += s.d_1.norm_squared();
            p2 += s.d_2.norm_squared();
            g12_avg += s.g12;
        }
        let norm = (n_grid * n_grid) as f64;
        gamma_abs_berry /= norm;
        p1 /= norm;
        p2 /= norm;
        g12_avg /= norm;
        let chern = chern_number(field, n_grid / 2)?;
        let omega12 = field.omega1() * field.omega2();
        let c = chern as f64;
        Ok(Self {
            w_gb: omega12 * gamma_abs_berry,
            w_tb: omega12 / (2.0 * PI) * gamma_min * c.abs(),
            w_fb: omega12 * gamma_min * delta_min * delta_min * c * c / (8.0 * PI * PI * (p1 + p2)),
            w_ub: 2.0 * gamma_max * (field.omega1().powi(2) * p1 + field.omega2().powi(2) * p2)
                / (delta_min * delta_min),
            gamma_min,
            gamma_max,
            delta_min,
            p1,
            p2,
            chern,
            g12_avg,
        })
    }
}

/// Geometric lower bound, Eq.-(11) style.
pub fn geometric_bound(
    field: &impl PhaseField,
    params: &DissipatorParams,
    n_grid: usize,
) -> Result<f64> {
    Ok(BoundsReport::compute(field, params, n_grid)?.w_gb)
}

/// Purely topological lower bound.
pub fn topological_bound(
    field: &impl PhaseField,
    params: &DissipatorParams,
    n_grid: usize,
) -> Result<f64> {
    Ok(BoundsReport::compute(field, params, n_grid)?.w_tb)
}

/// Asymmetric ("smoothness") lower bound.
pub fn fb_bound(field: &impl PhaseField, params: &DissipatorParams, n_grid: usize) -> Result<f64> {
    Ok(BoundsReport::compute(field, params, n_grid)?.w_fb)
}

/// Upper bound on the averaged dissipation.
pub fn upper_bound(
    field: &impl PhaseField,
    params: &DissipatorParams,
    n_grid: usize,
) -> Result<f64> {
    Ok(BoundsReport::compute(field, params, n_grid)?.w_ub)
}

/// The inequality chain |C|/(4 pi) <= avg[sqrt(g11 g22)] <= (P1+P2)/(2 Delta_min^2).
/// Returns (lhs, mid, rhs); the ordering is asserted.
pub fn inequality_chain_r(field: &impl PhaseField, n_grid: usize) -> Result<(f64, f64, f64)> {
    let grid = TorusGrid::new(n_grid);
    gap_range(field, grid)?;
    let mut mid = 0.0;
    let mut p_sum = 0.0;
    let mut delta_min = f64::INFINITY;
    for p in grid.iter() {
        let s = qgt_sample(field, p)?;
        mid += (s.g11 * s.g22).max(0.0).sqrt();
        p_sum += s.d_1.norm_squared() + s.d_2.norm_squared();
        delta_min = delta_min.min(s.gap);
    }
    let norm = (n_grid * n_grid) as f64;
    mid /= norm;
    p_sum /= norm;
    let chern = chern_number(field, n_grid / 2)?;
    let lhs = chern.abs() as f64 / (4.0 * PI);
    let rhs = p_sum / (2.0 * delta_min * delta_min);
    assert!(
        lhs <= mid * (1.0 + 1e-9) && mid <= rhs * (1.0 + 1e-9),
        "inequality chain violated: {lhs} <= {mid} <= {rhs}"
    );
    Ok((lhs, mid, rhs))
}

/// Torus-averaged off-diagonal metric component, 1/(4 pi^2) measure.
pub fn averaged_g12(field: &impl PhaseField, n_grid: usize) -> Result<f64> {
    let grid = TorusGrid::new(n_grid);
    gap_range(field, grid)?;
    grid.average(|p| Ok(qgt_sample(field, p)?.g12))
}

/// Torus-averaged diagonal metric scale max(avg g11, avg g22), the reference
/// against which a vanishing averaged g12 is judged.
pub fn diagonal_metric_scale(field: &impl PhaseField, n_grid: usize) -> Result<f64> {
    let grid = TorusGrid::new(n_grid);
    let g11 = grid.average(|p| Ok(qgt_sample(field, p)?.g11))?;
    let g22 = grid.average(|p| Ok(qgt_sample(field, p)?.g22))?;
    Ok(g11.max(g22))
}
