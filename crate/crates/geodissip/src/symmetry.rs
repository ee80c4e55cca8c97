//! Sufficient symmetry conditions for the phase-averaged g12 to vanish: the
//! drive angular momenta S_a = B_a x d(B_a)/dphi_a and the Zeeman vector must
//! form a right-angle triad (S1 perp S2, and at least one of them perp m).
//! The conditions are sufficient, not necessary; every verdict is
//! cross-checked against the quadrature average.

use crate::bounds::{averaged_g12, diagonal_metric_scale};
use crate::error::Result;
use crate::model::{DriveEllipse, SpinModel};
use crate::vec3::Vec3;

/// Tolerance on normalized dot products for perpendicularity verdicts.
pub const PERP_TOLERANCE: f64 = 1e-10;

/// Relative tolerance on the numeric averaged g12 whenever the sufficient
/// conditions hold, in units of the diagonal metric scale.
pub const G12_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct SymmetryVerdict {
    pub s1: Vec3,
    pub s2: Vec3,
    pub s1_perp_s2: bool,
    pub s1_perp_m: bool,
    pub s2_perp_m: bool,
    /// s1_perp_s2 AND (s1_perp_m OR s2_perp_m); either m-condition suffices.
    pub sufficient: bool,
    pub g12_avg_numeric: f64,
}

/// Angular momentum of an elliptic drive, B x dB/dphi. Constant in phi:
/// equals -amp_sin * amp_cos * (axis_sin x axis_cos). Zero for linear
/// polarization.
pub fn drive_angular_momentum(drive: &DriveEllipse) -> Vec3 {
    drive.axis_sin().cross(drive.axis_cos()) * (-drive.amp_sin() * drive.amp_cos())
}

/// Zero vectors count as perpendicular to everything: a vanishing drive
/// angular momentum (linear polarization) kills the relevant cross-terms by
/// parity.
fn perpendicular(a: Vec3, b: Vec3) -> bool {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return true;
    }
    (a.dot(b) / (na * nb)).abs() <= PERP_TOLERANCE
}

/// Evaluate the right-angle-triad conditions and cross-check them against the
/// quadrature-averaged g12 on an `n_grid` x `n_grid` phase grid.
///
/// Panics if the sufficient conditions hold but the numeric average does not
/// vanish — that would falsify the symmetry argument itself.
pub fn check_sufficient_conditions(model: &SpinModel, n_grid: usize) -> Result<SymmetryVerdict> {
    let s1 = drive_angular_momentum(model.drive1());
    let s2 = drive_angular_momentum(model.drive2());
    let m = model.zeeman();
    let s1_perp_s2 = perpendicular(s1, s2);
    let s1_perp_m = perpendicular(s1, m);
    let s2_perp_m = perpendicular(s2, m);
    let sufficient = s1_perp_s2 && (s1_perp_m || s2_perp_m);
    let g12_avg_numeric = averaged_g12(model, n_grid)?;
    if sufficient {
        let scale = diagonal_metric_scale(model, n_grid)?;
        assert!(
            g12_avg_numeric.abs() <= G12_TOLERANCE * scale,
            "sufficient conditions hold but averaged g12 = {g12_avg_numeric:.3e} \
             exceeds {G12_TOLERANCE:.0e} x scale {scale:.3e}"
        );
    }
    Ok(SymmetryVerdict {
        s1,
        s2,
        s1_perp_s2,
        s1_perp_m,
        s2_perp_m,
        sufficient,
        g12_avg_numeric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn angular_momentum_examples() {
        // y-z ellipse, sin amplitude 1 on y, cos amplitude 0.5 on z.
        let yz = DriveEllipse::in_yz_plane(1.0, 0.5).unwrap();
        assert!(drive_angular_momentum(&yz).max_abs_diff(Vec3::new(-0.5, 0.0, 0.0)) < 1e-15);

        let linear = DriveEllipse::in_xz_plane(1.0, 0.0).unwrap();
        assert_eq!(drive_angular_momentum(&linear).norm(), 0.0);

        let circular = DriveEllipse::new(1.0, 1.0, Vec3::unit_x(), Vec3::unit_y()).unwrap();
        assert!(drive_angular_momentum(&circular).max_abs_diff(Vec3::new(0.0, 0.0, -1.0)) < 1e-15);
    }

    #[test]
    fn angular_momentum_matches_field_cross_derivative() {
        let drive = DriveEllipse::in_xz_plane(0.7, 0.3).unwrap();
        let s = drive_angular_momentum(&drive);
        for phi in [0.0, 0.9, 2.5, 5.1] {
            let direct = drive.field(phi).cross(drive.dfield(phi));
            assert!(s.max_abs_diff(direct) < 1e-14, "phi = {phi}");
        }
    }

    #[test]
    fn standard_theta_zero_is_sufficient() {
        // S1 = 0.5 y, S2 = -0.5 x, m along z: a right-angle triad, so the
        // vanishing of the averaged g12 at theta = 0 follows from the
        // sufficient conditions directly.
        let model = SpinModel::standard(1.0, 0.0, 0.0, 1.0, 0.8).unwrap();
        let v = check_sufficient_conditions(&model, 64).unwrap();
        assert!(v.s1.max_abs_diff(Vec3::new(0.0, 0.5, 0.0)) < 1e-15);
        assert!(v.s2.max_abs_diff(Vec3::new(-0.5, 0.0, 0.0)) < 1e-15);
        assert!(v.s1_perp_s2 && v.s1_perp_m && v.s2_perp_m && v.sufficient);
    }

    #[test]
    fn tilted_zeeman_is_not_sufficient() {
        let model = SpinModel::standard(1.2, 0.2 * std::f64::consts::PI, 1.0, 1.0, 0.8).unwrap();
        let v = check_sufficient_conditions(&model, 64).unwrap();
        assert!(v.s1_perp_s2);
        assert!(!v.s1_perp_m && !v.s2_perp_m && !v.sufficient);
        let scale = diagonal_metric_scale(&model, 64).unwrap();
        assert!(
            v.g12_avg_numeric.abs() > G12_TOLERANCE * scale,
            "generic tilt should leave a nonzero averaged g12, got {:.3e}",
            v.g12_avg_numeric
        );
    }

    #[test]
    fn random_right_angle_triads_are_sufficient() {
        // Drive 1 in x-y (S1 along z), drive 2 spanned by z and x (S2 along
        // y), Zeeman vector in the x-z plane so S2 perp m. The assertion
        // inside check_sufficient_conditions verifies the numeric average.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let a = (rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0));
            let b = (rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0));
            let margin = a.0 + a.1 + b.0 + b.1 + rng.gen_range(0.3..1.0);
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let model = SpinModel::new(
                DriveEllipse::new(a.0, a.1, Vec3::unit_x(), Vec3::unit_y()).unwrap(),
                DriveEllipse::new(b.0, b.1, Vec3::unit_z(), Vec3::unit_x()).unwrap(),
                Vec3::new(margin * angle.cos(), 0.0, margin * angle.sin()),
                1.0,
                0.8,
                None,
            )
            .unwrap();
            let v = check_sufficient_conditions(&model, 48).unwrap();
            assert!(v.sufficient);
        }
    }

    #[test]
    fn linear_polarization_counts_as_perpendicular() {
        // amp_cos = 0 on drive 2 makes S2 = 0; zero vectors are perpendicular
        // to everything, so only the S1-m condition decides.
        let model = SpinModel::new(
            DriveEllipse::new(0.6, 0.4, Vec3::unit_x(), Vec3::unit_y()).unwrap(),
            DriveEllipse::new(0.5, 0.0, Vec3::unit_y(), Vec3::unit_z()).unwrap(),
            Vec3::new(2.5, 0.0, 0.0),
            1.0,
            0.8,
            None,
        )
        .unwrap();
        let v = check_sufficient_conditions(&model, 48).unwrap();
        assert!(v.s1_perp_s2 && v.s1_perp_m && v.sufficient);
    }
}
