//! Time- and torus-averaged dissipation and frequency-conversion rates, the
//! W12 power decomposition, and the commensurate (Lissajous) frequency-ratio
//! sweep.

use std::f64::consts::{PI, TAU};

use crate::bloch::{quality_factor, steady_state, DissipatorParams};
use crate::error::Result;
use crate::geometry::{qgt_sample, GeomSample, TorusGrid};
use crate::model::{PhaseField, PhasePoint};

/// Golden-ratio conjugate 1/phi, the "most irrational" frequency ratio.
const GOLDEN_RATIO_CONJ: f64 = 0.618_033_988_749_894_9;

/// Phase offset of the second drive along trajectory paths. A generic offset
/// keeps low-n Lissajous curves off the high-symmetry points where the
/// curvature integrand peaks, which would otherwise dominate the resonant
/// sampling error.
const PATH_OFFSET: f64 = 3.4;

/// How the phase-space average is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AverageMode {
    /// Trajectory quadrature along phi = (omega1 t, omega2' t) with
    /// omega2'/omega1 = n/(n+1), over one full period T = (n+1) 2 pi / omega1.
    Commensurate { n: u32 },
    /// Uniform average over the phase torus (the incommensurate limit).
    Incommensurate,
    /// Long trajectory at omega2'/omega1 = 1/phi, for cross-checking the
    /// torus average against an explicit incommensurate drive.
    GoldenRatio { periods: u32 },
}

/// Quadrature resolution.
#[derive(Debug, Clone, Copy)]
pub struct RateNumerics {
    /// Points per direction for torus averages.
    pub n_grid: usize,
    /// Samples per omega1 period for trajectory averages.
    pub n_per_period: usize,
}

impl Default for RateNumerics {
    fn default() -> Self {
        Self {
            n_grid: 256,
            n_per_period: 400,
        }
    }
}

/// Averaged rates and their normalized versions.
#[derive(Debug, Clone, Copy)]
pub struct RateReport {
    /// Metric-form dissipation avg[gamma g_ab] omega_a omega_b.
    pub w_d: f64,
    /// Dissipation from the full Eq. (6)-type integrand.
    pub w_d_exact: f64,
    /// Conversion power avg[tau2^2 Delta^2 / (1 + tau2^2 Delta^2) Omega_12] w1 w2.
    pub w_c: f64,
    /// Adiabatic asymmetry part of the W12 decomposition.
    pub w_ad: f64,
    /// Normalization W0 = omega1 omega2 / (2 pi).
    pub w0: f64,
    pub w_d_bar: f64,
    pub w_c_bar: f64,
}

/// Pointwise integrands at one phase point, for drive weights (omega1, omega2).
#[derive(Debug, Clone, Copy)]
struct PointRates {
    w_d_metric: f64,
    w_d_exact: f64,
    w_c: f64,
    w_ad: f64,
}

fn point_rates(
    sample: &GeomSample,
    params: &DissipatorParams,
    omega1: f64,
    omega2: f64,
) -> PointRates {
    let s0 = params.s0(sample.gap);
    let gamma = quality_factor(sample.gap, params.tau2());
    let quad = sample.g11 * omega1 * omega1
        + 2.0 * sample.g12 * omega1 * omega2
        + sample.g22 * omega2 * omega2;
    let speed_sq = 4.0 * quad;
    let x = sample.gap * params.tau2();
    let w_d_exact = 0.5 * s0 * params.tau2() * sample.gap * speed_sq
        / (1.0 + speed_sq * params.tau1() * params.tau2() + x * x);
    let conv = x * x / (1.0 + x * x);
    PointRates {
        w_d_metric: s0 * gamma * quad,
        w_d_exact,
        w_c: s0 * conv * sample.berry * omega1 * omega2,
        w_ad: -0.5 * s0 * gamma * (omega1 * omega1 * sample.g11 - omega2 * omega2 * sample.g22),
    }
}

/// Average of the pointwise integrands under `mode`. Trajectory modes replace
/// the model's omega2 by the mode's ratio times omega1, both in the sampling
/// path and in the integrand weights.
fn averaged_point_rates(
    field: &impl PhaseField,
    params: &DissipatorParams,
    mode: AverageMode,
    numerics: &RateNumerics,
) -> Result<(PointRates, f64, f64)> {
    let omega1 = field.omega1();
    match mode {
        AverageMode::Incommensurate => {
            let omega2 = field.omega2();
            let grid = TorusGrid::new(numerics.n_grid);
            crate::geometry::gap_range(field, grid)?;
            let mut acc = PointRates {
                w_d_metric: 0.0,
                w_d_exact: 0.0,
                w_c: 0.0,
                w_ad: 0.0,
            };
            for p in grid.iter() {
                let s = qgt_sample(field, p)?;
                let r = point_rates(&s, params, omega1, omega2);
                acc.w_d_metric += r.w_d_metric;
                acc.w_d_exact += r.w_d_exact;
                acc.w_c += r.w_c;
                acc.w_ad += r.w_ad;
            }
            let norm = (numerics.n_grid * numerics.n_grid) as f64;
            acc.w_d_metric /= norm;
            acc.w_d_exact /= norm;
            acc.w_c /= norm;
            acc.w_ad /= norm;
            Ok((acc, omega1, omega2))
        }
        AverageMode::Commensurate { n } => {
            assert!(n >= 1, "commensurate mode requires n >= 1");
            let ratio = n as f64 / (n + 1) as f64;
            trajectory_average(field, params, numerics, ratio, (n + 1) as usize, true)
        }
        AverageMode::GoldenRatio { periods } => trajectory_average(
            field,
            params,
            numerics,
            GOLDEN_RATIO_CONJ,
            periods as usize,
            false,
        ),
    }
}

/// Average along the Lissajous path phi = (omega1 t, ratio * omega1 t + offset).
/// The path ratio selects which curve is sampled; the integrand keeps the
/// model's physical (omega1, omega2) weights so that the n -> infinity limit
/// is the torus average by construction.
fn trajectory_average(
    field: &impl PhaseField,
    params: &DissipatorParams,
    numerics: &RateNumerics,
    ratio: f64,
    periods: usize,
    closed: bool,
) -> Result<(PointRates, f64, f64)> {
    let omega1 = field.omega1();
    let omega2 = field.omega2();
    let t_total = periods as f64 * TAU / omega1;
    let n = periods * numerics.n_per_period;
    let mut acc = PointRates {
        w_d_metric: 0.0,
        w_d_exact: 0.0,
        w_c: 0.0,
        w_ad: 0.0,
    };
    // Rectangle rule when the path is exactly periodic, trapezoid otherwise.
    let count = if closed { n } else { n + 1 };
    let mut weight_sum = 0.0;
    for k in 0..count {
        let t = k as f64 * t_total / n as f64;
        let p = PhasePoint::new(omega1 * t, ratio * omega1 * t + PATH_OFFSET);
        let s = qgt_sample(field, p)?;
        let r = point_rates(&s, params, omega1, omega2);
        let w = if !closed && (k == 0 || k == n) {
            0.5
        } else {
            1.0
        };
        acc.w_d_metric += w * r.w_d_metric;
        acc.w_d_exact += w * r.w_d_exact;
        acc.w_c += w * r.w_c;
        acc.w_ad += w * r.w_ad;
        weight_sum += w;
    }
    acc.w_d_metric /= weight_sum;
    acc.w_d_exact /= weight_sum;
    acc.w_c /= weight_sum;
    acc.w_ad /= weight_sum;
    Ok((acc, omega1, omega2))
}

/// Full averaged rate report under `mode`.
pub fn rate_report(
    field: &impl PhaseField,
    params: &DissipatorParams,
    mode: AverageMode,
    numerics: &RateNumerics,
) -> Result<RateReport> {
    let (acc, omega1, omega2) = averaged_point_rates(field, params, mode, numerics)?;
    let w0 = omega1 * omega2 / (2.0 * PI);
    Ok(RateReport {
        w_d: acc.w_d_metric,
        w_d_exact: acc.w_d_exact,
        w_c: acc.w_c,
        w_ad: acc.w_ad,
        w0,
        w_d_bar: acc.w_d_metric / w0,
        w_c_bar: acc.w_c / w0,
    })
}

/// Averaged metric-form dissipation avg[gamma g_ab] omega_a omega_b.
pub fn dissipation_metric_avg(
    field: &impl PhaseField,
    params: &DissipatorParams,
    mode: AverageMode,
    numerics: &RateNumerics,
) -> Result<f64> {
    Ok(averaged_point_rates(field, params, mode, numerics)?
        .0
        .w_d_metric)
}

/// Averaged dissipation with the full denominator retained.
pub fn dissipation_exact_avg(
    field: &impl PhaseField,
    params: &DissipatorParams,
    mode: AverageMode,
    numerics: &RateNumerics,
) -> Result<f64> {
    Ok(averaged_point_rates(field, params, mode, numerics)?
        .0
        .w_d_exact)
}

/// Averaged frequency-conversion power.
pub fn conversion_avg(
    field: &impl PhaseField,
    params: &DissipatorParams,
    mode: AverageMode,
    numerics: &RateNumerics,
) -> Result<f64> {
    Ok(averaged_point_rates(field, params, mode, numerics)?.0.w_c)
}

/// Pointwise (w_ad, w_c) of the W12 = W_ad + W_c decomposition, where
/// W12 is half the difference of power drawn from drive 2 and drive 1.
pub fn power_decomposition(
    field: &impl PhaseField,
    params: &DissipatorParams,
    p: PhasePoint,
) -> Result<(f64, f64)> {
    let s = qgt_sample(field, p)?;
    let r = point_rates(&s, params, field.omega1(), field.omega2());
    Ok((r.w_ad, r.w_c))
}

/// W12 evaluated directly from the steady state:
/// (1/2)[(del_phi2 d . S_st) omega2 - (del_phi1 d . S_st) omega1] negated per
/// drive, i.e. half the drive-2 minus drive-1 power input. Equals the torus
/// average of w_ad + w_c after averaging (the gradient-of-|d| piece drops).
pub fn w12_direct(
    field: &impl PhaseField,
    params: &DissipatorParams,
    p: PhasePoint,
) -> Result<f64> {
    let d = field.d(p)?;
    let (d1, d2) = field.d_derivatives(p)?;
    let omega1 = field.omega1();
    let omega2 = field.omega2();
    let d_dot = d1 * omega1 + d2 * omega2;
    let s = steady_state(d, d_dot, params)?;
    let power1 = -omega1 * d1.dot(s);
    let power2 = -omega2 * d2.dot(s);
    Ok(0.5 * (power2 - power1))
}

/// One row of the commensurate frequency-ratio sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub n: u32,
    pub w_d_bar: f64,
    pub w_c_bar: f64,
    /// Relative deviation of w_d_bar from the incommensurate value.
    pub delta_w_d: f64,
    /// Absolute deviation of w_c_bar from the incommensurate value
    /// (w_c_bar is already in Chern units).
    pub delta_w_c: f64,
}

/// Sweep of commensurate path ratios n/(n+1) against the incommensurate
/// torus average they converge to.
pub fn commensurate_sweep(
    field: &impl PhaseField,
    params: &DissipatorParams,
    n_values: &[u32],
    numerics: &RateNumerics,
) -> Result<Vec<SweepRow>> {
    let reference = rate_report(field, params, AverageMode::Incommensurate, numerics)?;
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let r = rate_report(field, params, AverageMode::Commensurate { n }, numerics)?;
        rows.push(SweepRow {
            n,
            w_d_bar: r.w_d_bar,
            w_c_bar: r.w_c_bar,
            delta_w_d: r.w_d_bar / reference.w_d_bar - 1.0,
            delta_w_c: r.w_c_bar - reference.w_c_bar,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::toy_model_dissipation;
    use crate::model::{DriveEllipse, SpinModel};
    use crate::vec3::Vec3;

    fn coarse() -> RateNumerics {
        RateNumerics {
            n_grid: 96,
            n_per_period: 400,
        }
    }

    #[test]
    fn static_drive_dissipates_nothing() {
        let drive = DriveEllipse::in_xz_plane(0.0, 0.0).unwrap();
        let model = SpinModel::new(drive, drive, Vec3::new(0.1, 0.2, 0.9), 1.0, 0.8, None).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let w = dissipation_metric_avg(&model, &params, AverageMode::Incommensurate, &coarse())
            .unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn toy_model_exact_average() {
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let model = SpinModel::circular_toy(1.0, 0.1).unwrap();
        let exact =
            dissipation_exact_avg(&model, &params, AverageMode::Incommensurate, &coarse()).unwrap();
        assert!((exact - 4.9020e-4).abs() < 1e-7);
        assert!((exact - toy_model_dissipation(1.0, 0.1, &params)).abs() < 1e-15);
    }

    #[test]
    fn toy_model_metric_vs_exact_gap() {
        // The neglected |dhat_dot|^2 tau1 tau2 term is 1/101 of the
        // denominator here, so the two averages differ by about 1%.
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let model = SpinModel::circular_toy(1.0, 0.1).unwrap();
        let metric =
            dissipation_metric_avg(&model, &params, AverageMode::Incommensurate, &coarse())
                .unwrap();
        let exact =
            dissipation_exact_avg(&model, &params, AverageMode::Incommensurate, &coarse()).unwrap();
        assert!((metric - 4.9505e-4).abs() < 1e-7);
        let rel = (metric - exact) / exact;
        assert!(rel > 0.0 && rel <= 1.0 / 101.0 + 1e-12, "rel = {rel}");
    }

    #[test]
    fn conversion_tends_to_chern() {
        let model = SpinModel::standard(1.0, 0.0, 0.0, 0.01, 0.008).unwrap();
        let params = DissipatorParams::isotropic(1000.0).unwrap();
        let r = rate_report(&model, &params, AverageMode::Incommensurate, &coarse()).unwrap();
        let c = crate::geometry::chern_number(&model, 48).unwrap();
        assert_eq!(c, -1);
        assert!(
            (r.w_c_bar - c as f64).abs() <= 0.01,
            "w_c_bar = {}",
            r.w_c_bar
        );
    }

    #[test]
    fn conversion_at_moderate_tau_is_partial() {
        let model = SpinModel::standard(1.0, 0.0, 0.0, 0.01, 0.008).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let r = rate_report(&model, &params, AverageMode::Incommensurate, &coarse()).unwrap();
        assert!(
            r.w_c_bar < 0.0 && r.w_c_bar > -1.0,
            "w_c_bar = {}",
            r.w_c_bar
        );
    }

    #[test]
    fn decomposition_matches_direct_steady_state_average() {
        let model = SpinModel::standard(1.0, 0.0, 0.0, 0.02, 0.016).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let grid = TorusGrid::new(96);
        let mut avg_decomp = 0.0;
        let mut avg_direct = 0.0;
        let mut avg_wd = 0.0;
        for p in grid.iter() {
            let (w_ad, w_c) = power_decomposition(&model, &params, p).unwrap();
            avg_decomp += w_ad + w_c;
            avg_direct += w12_direct(&model, &params, p).unwrap();
            let s = qgt_sample(&model, p).unwrap();
            avg_wd += point_rates(&s, &params, 0.02, 0.016).w_d_metric;
        }
        let n = (96 * 96) as f64;
        avg_decomp /= n;
        avg_direct /= n;
        avg_wd /= n;
        // Gap minimum is 1 (m = 1 transition distance 0.5, Delta = 2|d|);
        // the conversion part can exceed the dissipation, so scale by both.
        let tol = 5.0 * (0.02_f64 / 1.0).powi(2) * avg_wd.max(avg_direct.abs());
        assert!(
            (avg_decomp - avg_direct).abs() <= tol,
            "decomp {avg_decomp} direct {avg_direct} tol {tol}"
        );
    }

    #[test]
    fn symmetric_drive_has_zero_w_ad() {
        // Equal frequencies and a configuration with g11 = g22 on average.
        let model = SpinModel::two_tone(1.0, 0.5, 1.0, 0.5, 1.5, 0.0, 0.0, 0.01, 0.01).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let r = rate_report(&model, &params, AverageMode::Incommensurate, &coarse()).unwrap();
        assert!(r.w_ad.abs() < 1e-12 * r.w_d, "w_ad = {}", r.w_ad);
    }

    #[test]
    fn label_swap_antisymmetry() {
        #[derive(Clone)]
        struct Swapped(SpinModel);
        impl PhaseField for Swapped {
            fn d(&self, p: PhasePoint) -> Result<Vec3> {
                self.0.d(PhasePoint::new(p.phi2(), p.phi1()))
            }
            fn omega1(&self) -> f64 {
                self.0.omega2()
            }
            fn omega2(&self) -> f64 {
                self.0.omega1()
            }
            fn d_derivatives(&self, p: PhasePoint) -> Result<(Vec3, Vec3)> {
                let (d1, d2) = self.0.d_derivatives(PhasePoint::new(p.phi2(), p.phi1()))?;
                Ok((d2, d1))
            }
        }
        let model = SpinModel::standard(1.0, 0.0, 0.0, 0.01, 0.008).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let a = rate_report(&model, &params, AverageMode::Incommensurate, &coarse()).unwrap();
        let b = rate_report(
            &Swapped(model),
            &params,
            AverageMode::Incommensurate,
            &coarse(),
        )
        .unwrap();
        assert!((a.w_d - b.w_d).abs() <= 1e-12 * a.w_d);
        assert!((a.w_c + b.w_c).abs() <= 1e-12 * a.w_c.abs());
        assert!((a.w_ad + b.w_ad).abs() <= 1e-10 * a.w_d);
    }

    #[test]
    fn commensurate_converges_to_torus_average() {
        let model = SpinModel::standard(1.0, 0.0, 0.0, 0.01, 0.01).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let rows = commensurate_sweep(&model, &params, &[1, 3, 5, 8, 12], &coarse()).unwrap();
        for row in &rows {
            if row.n >= 5 {
                assert!(
                    row.delta_w_d.abs() < 0.01 && row.delta_w_c.abs() < 0.01,
                    "n = {}: {} {}",
                    row.n,
                    row.delta_w_d,
                    row.delta_w_c
                );
            }
        }
        let d1 = rows[0].delta_w_d.abs();
        let d_last = rows.last().unwrap().delta_w_d.abs();
        assert!(d_last < d1);
    }

    #[test]
    fn golden_ratio_trajectory_matches_torus_average() {
        let model = SpinModel::standard(1.0, 0.0, 0.0, 0.01, 0.01).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let torus = dissipation_metric_avg(&model, &params, AverageMode::Incommensurate, &coarse())
            .unwrap();
        let traj = dissipation_metric_avg(
            &model,
            &params,
            AverageMode::GoldenRatio { periods: 200 },
            &coarse(),
        )
        .unwrap();
        assert!(
            (traj / torus - 1.0).abs() < 0.005,
            "traj {traj} torus {torus}"
        );
    }

    #[test]
    fn report_normalization() {
        let model = SpinModel::standard(1.0, 0.0, 0.0, 0.01, 0.008).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let r = rate_report(&model, &params, AverageMode::Incommensurate, &coarse()).unwrap();
        assert!((r.w0 - 0.01 * 0.008 / (2.0 * PI)).abs() < 1e-18);
        assert!((r.w_d_bar * r.w0 - r.w_d).abs() < 1e-18);
        assert!(r.w_d >= 0.0 && r.w_d_exact >= 0.0);
        assert!(r.w_d_exact <= r.w_d);
    }
}
