//! Bloch equation with the isotropic dissipator: analytic quasi-adiabatic
//! steady state, the rotating-frame 3x3 solve, the exactly solvable circular
//! toy model, and a fixed-step RK4 integrator used as the validation oracle.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::model::{PhaseField, PhasePoint, GAP_TOLERANCE};
use crate::vec3::Vec3;

/// Equilibrium polarization of the dissipator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum S0Mode {
    /// Low-temperature limit, s0 = 1.
    Unity,
    /// Instantaneous thermal equilibrium, s0 = tanh(beta * Delta / 2).
    Thermal { beta: f64 },
}

/// Relaxation times and equilibrium polarization of the isotropic dissipator.
#[derive(Debug, Clone, Copy)]
pub struct DissipatorParams {
    tau1: f64,
    tau2: f64,
    s0_mode: S0Mode,
}

impl DissipatorParams {
    pub fn new(tau1: f64, tau2: f64, s0_mode: S0Mode) -> Result<Self> {
        if !(tau1 > 0.0) || !(tau2 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "relaxation times must be > 0, got (tau1={tau1}, tau2={tau2})"
            )));
        }
        if tau2 > 2.0 * tau1 * (1.0 + 1e-12) {
            return Err(Error::InvalidModel(format!(
                "tau2 <= 2*tau1 required, got tau1={tau1}, tau2={tau2}"
            )));
        }
        if let S0Mode::Thermal { beta } = s0_mode {
            if !(beta > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "thermal mode requires beta > 0, got {beta}"
                )));
            }
        }
        Ok(Self {
            tau1,
            tau2,
            s0_mode,
        })
    }

    /// Equal relaxation times and s0 = 1, the default used in the sweeps.
    pub fn isotropic(tau: f64) -> Result<Self> {
        Self::new(tau, tau, S0Mode::Unity)
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn s0_mode(&self) -> S0Mode {
        self.s0_mode
    }

    /// Equilibrium polarization magnitude at spectral gap `delta`.
    pub fn s0(&self, delta: f64) -> f64 {
        match self.s0_mode {
            S0Mode::Unity => 1.0,
            S0Mode::Thermal { beta } => (beta * delta / 2.0).tanh(),
        }
    }
}

/// Instantaneous orthonormal frame (e_hat, f_hat, d_hat) with
/// f_hat along the normalized time derivative of d_hat and e_hat = f_hat x d_hat.
#[derive(Debug, Clone, Copy)]
pub struct InstantFrame {
    pub d_hat: Vec3,
    pub f_hat: Vec3,
    pub e_hat: Vec3,
}

impl InstantFrame {
    /// Frame at a point with field `d` and full time derivative `d_dot`.
    /// Fails with `DegenerateField` when |d| is below tolerance and with
    /// `NotUnit` when the transverse part of d_dot vanishes (f_hat undefined).
    pub fn from_field(d: Vec3, d_dot: Vec3) -> Result<Self> {
        let norm = d.norm();
        if norm < GAP_TOLERANCE {
            return Err(Error::DegenerateField {
                magnitude: norm,
                phi1: f64::NAN,
                phi2: f64::NAN,
            });
        }
        let d_hat = d * (1.0 / norm);
        let dhat_dot = (d_dot - d_hat * d_hat.dot(d_dot)) * (1.0 / norm);
        let speed = dhat_dot.norm();
        if speed == 0.0 {
            return Err(Error::NotUnit { norm: 0.0 });
        }
        let f_hat = dhat_dot * (1.0 / speed);
        let e_hat = f_hat.cross(d_hat);
        Ok(Self {
            d_hat,
            f_hat,
            e_hat,
        })
    }
}

/// Relaxation matrix Gamma_ij = d_i d_j / tau1 + (delta_ij - d_i d_j) / tau2
/// for a unit vector d_hat.
pub fn relaxation_matrix(d_hat: Vec3, params: &DissipatorParams) -> Result<Matrix3<f64>> {
    let norm = d_hat.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotUnit { norm });
    }
    let d = Vector3::new(d_hat.x, d_hat.y, d_hat.z);
    let proj = d * d.transpose();
    Ok(proj * (1.0 / params.tau1) + (Matrix3::identity() - proj) * (1.0 / params.tau2))
}

/// Normalized transverse velocity dhat_dot = (d_dot - d_hat (d_hat . d_dot)) / |d|.
fn dhat_dot_of(d: Vec3, d_dot: Vec3) -> Result<(Vec3, Vec3, f64)> {
    let norm = d.norm();
    if norm < GAP_TOLERANCE {
        return Err(Error::DegenerateField {
            magnitude: norm,
            phi1: f64::NAN,
            phi2: f64::NAN,
        });
    }
    let d_hat = d * (1.0 / norm);
    let dhat_dot = (d_dot - d_hat * d_hat.dot(d_dot)) * (1.0 / norm);
    Ok((d_hat, dhat_dot, norm))
}

/// Quasi-adiabatic instantaneous steady state of the Bloch equation.
///
/// In the (e_hat, f_hat, d_hat) frame the components carry signs (+, -, +):
/// the spin lags the Hamiltonian along -f_hat and is pushed along
/// e_hat = f_hat x d_hat. The overall signs are pinned by the RK4 oracle.
pub fn steady_state(d: Vec3, d_dot: Vec3, params: &DissipatorParams) -> Result<Vec3> {
    let (d_hat, dhat_dot, norm) = dhat_dot_of(d, d_dot)?;
    let delta = 2.0 * norm;
    let (tau1, tau2) = (params.tau1, params.tau2);
    let x = delta * tau2;
    let denom = 1.0 + dhat_dot.norm_squared() * tau1 * tau2 + x * x;
    let s = d_hat * (1.0 + x * x) - dhat_dot * tau2 - d_hat.cross(dhat_dot) * (delta * tau2 * tau2);
    Ok(s * (params.s0(delta) / denom))
}

/// Steady state via the explicit rotating-frame 3x3 linear solve.
/// Algebraically identical to [`steady_state`]; kept as an independent route.
pub fn steady_state_matrix_solve(d: Vec3, d_dot: Vec3, params: &DissipatorParams) -> Result<Vec3> {
    let (d_hat, dhat_dot, norm) = dhat_dot_of(d, d_dot)?;
    let delta = 2.0 * norm;
    let s0 = params.s0(delta);
    let speed = dhat_dot.norm();
    if speed == 0.0 {
        return Ok(d_hat * s0);
    }
    let f_hat = dhat_dot * (1.0 / speed);
    // Rotating frame chosen so that d_hat -> z, f_hat -> y, and the spin
    // angular-velocity vector d_hat x dhat_dot -> -speed * x.
    let m = Matrix3::new(
        1.0 / params.tau2,
        delta,
        0.0,
        -delta,
        1.0 / params.tau2,
        speed,
        0.0,
        -speed,
        1.0 / params.tau1,
    );
    let det = m.determinant();
    let rhs = Vector3::new(0.0, 0.0, s0 / params.tau1);
    let sp = m.lu().solve(&rhs).ok_or(Error::SingularMatrix { det })?;
    let e_s = d_hat.cross(f_hat);
    Ok(e_s * (-sp.x) + f_hat * sp.y + d_hat * sp.z)
}

/// Bloch trajectory sampled on a uniform time grid.
#[derive(Debug, Clone)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub spins: Vec<Vec3>,
    pub step: f64,
}

fn bloch_rhs(field: &impl PhaseField, params: &DissipatorParams, t: f64, s: Vec3) -> Result<Vec3> {
    let p = PhasePoint::new(field.omega1() * t, field.omega2() * t);
    let d = field.d(p)?;
    let d_hat = d.normalized();
    let s0 = params.s0(2.0 * d.norm());
    let dev = s - d_hat * s0;
    let along = d_hat * d_hat.dot(dev);
    let relax = along * (1.0 / params.tau1) + (dev - along) * (1.0 / params.tau2);
    Ok(d.cross(s) * 2.0 - relax)
}

/// Largest gap on a coarse phase grid, used for the step-size check.
fn max_gap(field: &impl PhaseField) -> Result<f64> {
    let n = 32;
    let mut max = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let p = PhasePoint::new(TAU * i as f64 / n as f64, TAU * j as f64 / n as f64);
            max = max.max(field.gap(p)?);
        }
    }
    Ok(max)
}

/// Fixed-step classical RK4 integration of the Bloch equation
/// S' = 2 d x S - Gamma (S - s0 d_hat), sampled every `dt`.
pub fn integrate_bloch(
    field: &impl PhaseField,
    params: &DissipatorParams,
    s_init: Vec3,
    t_end: f64,
    dt: f64,
) -> Result<BlochTrajectory> {
    let limit = (TAU / (10.0 * max_gap(field)?)).min(params.tau2 / 10.0);
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let n_steps = (t_end / dt).ceil() as usize;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut spins = Vec::with_capacity(n_steps + 1);
    let mut s = s_init;
    let mut t = 0.0;
    times.push(t);
    spins.push(s);
    for _ in 0..n_steps {
        let k1 = bloch_rhs(field, params, t, s)?;
        let k2 = bloch_rhs(field, params, t + 0.5 * dt, s + k1 * (0.5 * dt))?;
        let k3 = bloch_rhs(field, params, t + 0.5 * dt, s + k2 * (0.5 * dt))?;
        let k4 = bloch_rhs(field, params, t + dt, s + k3 * dt)?;
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        t += dt;
        times.push(t);
        spins.push(s);
    }
    Ok(BlochTrajectory {
        times,
        spins,
        step: dt,
    })
}

/// Cycle-averaged dissipation from the RK4 trajectory: the system is relaxed
/// for max(10 tau1, 5 periods), then d . S' is averaged over one period of
/// length `period`. This is the brute-force oracle the closed forms are
/// validated against.
pub fn cycle_dissipation(
    field: &impl PhaseField,
    params: &DissipatorParams,
    period: f64,
    dt: f64,
) -> Result<f64> {
    let t_relax = (10.0 * params.tau1).max(5.0 * period);
    let n_relax = (t_relax / dt).ceil() as usize;
    let n_cycle = (period / dt).round() as usize;
    let t_end = (n_relax + n_cycle) as f64 * dt;
    let traj = integrate_bloch(field, params, Vec3::unit_z(), t_end, dt)?;
    // Trapezoidal average of d(t) . S'(t) over the final cycle.
    let mut acc = 0.0;
    for k in n_relax..=(n_relax + n_cycle) {
        let t = traj.times[k];
        let s = traj.spins[k];
        let p = PhasePoint::new(field.omega1() * t, field.omega2() * t);
        let d = field.d(p)?;
        let w = d.dot(bloch_rhs(field, params, t, s)?);
        let weight = if k == n_relax || k == n_relax + n_cycle {
            0.5
        } else {
            1.0
        };
        acc += weight * w;
    }
    Ok(acc / n_cycle as f64)
}

/// Spin at the end of a relaxation run, for steady-state comparisons.
pub fn relaxed_spin(
    field: &impl PhaseField,
    params: &DissipatorParams,
    t_end: f64,
    dt: f64,
) -> Result<(f64, Vec3)> {
    let traj = integrate_bloch(field, params, Vec3::unit_z(), t_end, dt)?;
    let t = *traj.times.last().unwrap();
    Ok((t, *traj.spins.last().unwrap()))
}

/// Exact cycle-averaged dissipation of the circular constant-gap toy model:
/// W_d = (1/2) Delta0 tau2 omega^2 / (1 + tau1 tau2 omega^2 + Delta0^2 tau2^2).
pub fn toy_model_dissipation(delta0: f64, omega: f64, params: &DissipatorParams) -> f64 {
    assert!(delta0 > 0.0, "toy model requires delta0 > 0");
    let num = 0.5 * delta0 * params.tau2 * omega * omega * params.s0(delta0);
    num / (1.0
        + params.tau1 * params.tau2 * omega * omega
        + delta0 * delta0 * params.tau2 * params.tau2)
}

/// Effective quality factor gamma = 2 tau2 Delta / (1 + Delta^2 tau2^2).
pub fn quality_factor(delta: f64, tau2: f64) -> f64 {
    let x = delta * tau2;
    2.0 * x / (1.0 + x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpinModel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 {
                return v * (1.0 / n);
            }
        }
    }

    #[test]
    fn relaxation_matrix_isotropic_case() {
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let g = relaxation_matrix(Vec3::unit_z(), &params).unwrap();
        assert!((g - Matrix3::identity() * 0.1).norm() < 1e-14);
    }

    #[test]
    fn relaxation_matrix_axis_aligned() {
        let params = DissipatorParams::new(2.0, 1.0, S0Mode::Unity).unwrap();
        let g = relaxation_matrix(Vec3::unit_z(), &params).unwrap();
        assert!((g - Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.5))).norm() < 1e-14);
    }

    #[test]
    fn relaxation_matrix_eigenvalues() {
        let params = DissipatorParams::new(3.0, 1.7, S0Mode::Unity).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d_hat = rand_unit(&mut rng);
            let g = relaxation_matrix(d_hat, &params).unwrap();
            assert!((g - g.transpose()).norm() < 1e-14);
            let mut eig: Vec<f64> = g.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            assert!((eig[0] - 1.0 / 3.0).abs() < 1e-12);
            assert!((eig[1] - 1.0 / 1.7).abs() < 1e-12);
            assert!((eig[2] - 1.0 / 1.7).abs() < 1e-12);
            // Gamma d_hat = d_hat / tau1.
            let v = Vector3::new(d_hat.x, d_hat.y, d_hat.z);
            assert!((g * v - v / 3.0).norm() < 1e-12);
        }
    }

    #[test]
    fn relaxation_matrix_rejects_non_unit() {
        let params = DissipatorParams::isotropic(1.0).unwrap();
        assert!(matches!(
            relaxation_matrix(Vec3::new(0.0, 0.0, 1.1), &params),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn tau_ordering_enforced() {
        assert!(DissipatorParams::new(1.0, 2.5, S0Mode::Unity).is_err());
        assert!(DissipatorParams::new(1.0, 2.0, S0Mode::Unity).is_ok());
    }

    #[test]
    fn adiabatic_limit_aligns_with_field() {
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let s = steady_state(Vec3::new(0.3, -0.2, 0.9), Vec3::ZERO, &params).unwrap();
        let d_hat = Vec3::new(0.3, -0.2, 0.9).normalized();
        assert!(s.max_abs_diff(d_hat) < 1e-14);
    }

    #[test]
    fn toy_model_closed_form_values() {
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let w = toy_model_dissipation(1.0, 0.1, &params);
        assert!((w - 0.05 / 102.0).abs() < 1e-18);
        assert!((w - 4.9020e-4).abs() < 1e-7);
        assert_eq!(toy_model_dissipation(1.0, 0.0, &params), 0.0);
    }

    #[test]
    fn toy_model_vanishes_with_tau2() {
        // numerator scales with tau2: shrink tau2 below the peak and the
        // dissipation falls monotonically to zero.
        let mut prev = f64::INFINITY;
        for tau2 in [1.0, 0.5, 0.1, 0.01, 1e-4] {
            let params = DissipatorParams::new(1.0, tau2, S0Mode::Unity).unwrap();
            let w = toy_model_dissipation(1.0, 0.1, &params);
            assert!(w < prev);
            prev = w;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn quality_factor_values() {
        assert!((quality_factor(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((quality_factor(1.0, 10.0) - 20.0 / 101.0).abs() < 1e-15);
        let gamma = quality_factor(62.832, 1.0);
        assert!((gamma - 0.031823).abs() < 1e-5);
    }

    #[test]
    fn matrix_solve_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let tau1 = rng.gen_range(0.5..20.0);
            let tau2 = rng.gen_range(0.2..1.9) * tau1;
            let params = DissipatorParams::new(tau1, tau2.min(2.0 * tau1), S0Mode::Unity).unwrap();
            let d = rand_unit(&mut rng) * rng.gen_range(0.2..3.0);
            let d_dot = rand_unit(&mut rng) * rng.gen_range(0.0..0.5);
            let a = steady_state(d, d_dot, &params).unwrap();
            let b = steady_state_matrix_solve(d, d_dot, &params).unwrap();
            let scale = a.norm().max(1e-30);
            assert!(a.max_abs_diff(b) / scale <= 1e-12, "a={a:?} b={b:?}");
        }
    }

    #[test]
    fn matrix_solve_adiabatic_limit() {
        let params = DissipatorParams::isotropic(5.0).unwrap();
        let d = Vec3::new(0.1, 0.2, 0.4);
        let s = steady_state_matrix_solve(d, Vec3::ZERO, &params).unwrap();
        assert!(s.max_abs_diff(d.normalized()) < 1e-14);
    }

    #[test]
    fn toy_model_rotating_frame_components() {
        // Circular toy model, Delta0 = 1, omega = 0.1, tau = 10 at t = 0:
        // d = (0.5, 0, 0), dhat_dot = 0.1 y, frame e = f x d = -z.
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let d = Vec3::new(0.5, 0.0, 0.0);
        let d_dot = Vec3::new(0.0, 0.05, 0.0);
        let s = steady_state(d, d_dot, &params).unwrap();
        let frame = InstantFrame::from_field(d, d_dot).unwrap();
        let denom = 102.0;
        assert!((s.dot(frame.d_hat) - 101.0 / denom).abs() < 1e-12);
        assert!((s.dot(frame.f_hat) - (-1.0 / denom)).abs() < 1e-12);
        assert!((s.dot(frame.e_hat) - 10.0 / denom).abs() < 1e-12);
    }

    #[test]
    fn frame_sign_pattern() {
        // (e, f, d) components are (+, -, +) for any slow drive.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = DissipatorParams::isotropic(7.0).unwrap();
        for _ in 0..50 {
            let d = rand_unit(&mut rng) * rng.gen_range(0.3..2.0);
            let d_dot = rand_unit(&mut rng) * rng.gen_range(0.01..0.3);
            let frame = match InstantFrame::from_field(d, d_dot) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let s = steady_state(d, d_dot, &params).unwrap();
            assert!(s.dot(frame.e_hat) > 0.0);
            assert!(s.dot(frame.f_hat) < 0.0);
            assert!(s.dot(frame.d_hat) > 0.0);
        }
    }

    #[test]
    fn steady_state_norm_bound_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let tau1: f64 = rng.gen_range(0.5..20.0);
            let tau2 = (rng.gen_range(0.2..2.0) * tau1).min(2.0 * tau1);
            let params = DissipatorParams::new(tau1, tau2, S0Mode::Unity).unwrap();
            let d = rand_unit(&mut rng) * rng.gen_range(0.1..3.0);
            let d_dot = rand_unit(&mut rng) * rng.gen_range(0.0..1.0);
            let s = steady_state(d, d_dot, &params).unwrap();
            assert!(s.norm() <= 1.0 + 1e-12, "|S| = {}", s.norm());
        }
        // tau1 = tau2 norm identity.
        for _ in 0..200 {
            let tau = rng.gen_range(0.2..30.0);
            let params = DissipatorParams::isotropic(tau).unwrap();
            let d = rand_unit(&mut rng) * rng.gen_range(0.1..3.0);
            let d_dot = rand_unit(&mut rng) * rng.gen_range(0.0..1.0);
            let (d_hat, dhat_dot, norm) = dhat_dot_of(d, d_dot).unwrap();
            let _ = d_hat;
            let delta = 2.0 * norm;
            let s = steady_state(d, d_dot, &params).unwrap();
            let lhs = s.norm_squared()
                * (1.0 + dhat_dot.norm_squared() * tau * tau + delta * delta * tau * tau);
            let rhs = 1.0 + delta * delta * tau * tau;
            assert!((lhs - rhs).abs() / rhs <= 1e-12);
        }
    }

    #[test]
    fn thermal_s0_monotone_in_beta() {
        let mut prev = 0.0;
        for beta in [0.1, 0.5, 1.0, 5.0, 20.0] {
            let params = DissipatorParams::new(10.0, 10.0, S0Mode::Thermal { beta }).unwrap();
            let s0 = params.s0(1.0);
            assert!(s0 > prev && s0 < 1.0);
            prev = s0;
        }
    }

    #[test]
    fn static_field_relaxes_to_equilibrium() {
        // Static d = (0, 0, 0.5): transverse components decay as exp(-t/tau2).
        let drive = crate::model::DriveEllipse::in_yz_plane(0.0, 0.0).unwrap();
        let model = SpinModel::new(drive, drive, Vec3::new(0.0, 0.0, 0.5), 1.0, 1.0, None).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let tau2 = 10.0;
        let traj = integrate_bloch(&model, &params, Vec3::unit_x(), 3.0 * tau2, 0.02).unwrap();
        let idx = traj.times.iter().position(|&t| t >= tau2).unwrap();
        let s = traj.spins[idx];
        let transverse = (s.x * s.x + s.y * s.y).sqrt();
        let expected = (-traj.times[idx] / tau2).exp();
        assert!((transverse - expected).abs() / expected < 0.01);
        let end = *traj.spins.last().unwrap();
        assert!((end.z - 1.0).abs() < 0.05);
        for s in &traj.spins {
            assert!(s.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn integrator_rejects_large_steps() {
        let model = SpinModel::circular_toy(1.0, 0.1).unwrap();
        let params = DissipatorParams::isotropic(10.0).unwrap();
        assert!(matches!(
            integrate_bloch(&model, &params, Vec3::unit_z(), 1.0, 10.0),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn ode_matches_toy_closed_form() {
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let model = SpinModel::circular_toy(1.0, 0.1).unwrap();
        let period = TAU / 0.1;
        let w_ode = cycle_dissipation(&model, &params, period, 0.05).unwrap();
        let w_exact = toy_model_dissipation(1.0, 0.1, &params);
        assert!(
            (w_ode - w_exact).abs() / w_exact < 0.01,
            "{w_ode} vs {w_exact}"
        );
    }

    #[test]
    fn rk4_order_of_convergence() {
        // Richardson estimate on the toy model relaxed-spin endpoint.
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let model = SpinModel::circular_toy(1.0, 0.1).unwrap();
        let t_end = 20.0;
        let run = |dt: f64| {
            integrate_bloch(&model, &params, Vec3::unit_z(), t_end, dt)
                .unwrap()
                .spins
                .pop()
                .unwrap()
        };
        let s1 = run(0.2);
        let s2 = run(0.1);
        let s3 = run(0.05);
        let e1 = s1.max_abs_diff(s2);
        let e2 = s2.max_abs_diff(s3);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn steady_state_tracks_ode_for_slow_drive() {
        // |dhat_dot| / Delta = 0.02: agreement to 5 (|dhat_dot|/Delta)^2.
        let params = DissipatorParams::isotropic(10.0).unwrap();
        let omega = 0.02;
        let model = SpinModel::circular_toy(1.0, omega).unwrap();
        let t_end = (10.0 * params.tau1()).max(5.0 * TAU / omega);
        let (t, s_ode) = relaxed_spin(&model, &params, t_end, 0.05).unwrap();
        let p = PhasePoint::new(omega * t, 0.0);
        let d = model.d(p).unwrap();
        let d_dot = model.d_dot(p).unwrap();
        let s_analytic = steady_state(d, d_dot, &params).unwrap();
        let tol = 5.0 * (omega / 1.0) * (omega / 1.0);
        assert!(
            s_ode.max_abs_diff(s_analytic) <= tol,
            "diff = {}",
            s_ode.max_abs_diff(s_analytic)
        );
    }
}
