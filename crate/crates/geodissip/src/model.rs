//! Driven two-level Hamiltonian H(t) = h0 + d·sigma, its two-tone
//! parametrization, and derivatives with respect to the drive phases.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Absolute gap tolerance (units of omega1): below this |d| the steady-state
/// formulas divide by ~0 and operations report `DegenerateField`.
pub const GAP_TOLERANCE: f64 = 1e-10;

/// Default central-difference step for user-supplied fields, in radians.
pub const FD_STEP: f64 = 1e-5;

const UNIT_TOL: f64 = 1e-12;

/// A point on the (phi1, phi2) phase torus. Phases are reduced modulo 2*pi
/// on construction so that evaluation is bit-for-bit periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    phi1: f64,
    phi2: f64,
}

impl PhasePoint {
    pub fn new(phi1: f64, phi2: f64) -> Self {
        assert!(
            phi1.is_finite() && phi2.is_finite(),
            "phases must be finite"
        );
        Self {
            phi1: phi1.rem_euclid(TAU),
            phi2: phi2.rem_euclid(TAU),
        }
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }
}

/// One elliptically polarized drive field,
/// B(phi) = amp_sin * sin(phi) * axis_sin + amp_cos * cos(phi) * axis_cos,
/// with orthonormal principal axes.
#[derive(Debug, Clone, Copy)]
pub struct DriveEllipse {
    amp_sin: f64,
    amp_cos: f64,
    axis_sin: Vec3,
    axis_cos: Vec3,
}

impl DriveEllipse {
    pub fn new(amp_sin: f64, amp_cos: f64, axis_sin: Vec3, axis_cos: Vec3) -> Result<Self> {
        if !(amp_sin >= 0.0 && amp_cos >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "drive amplitudes must be >= 0, got ({amp_sin}, {amp_cos})"
            )));
        }
        for (name, axis) in [("axis_sin", axis_sin), ("axis_cos", axis_cos)] {
            if (axis.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidModel(format!(
                    "{name} must be a unit vector, |{name}| = {}",
                    axis.norm()
                )));
            }
        }
        if axis_sin.dot(axis_cos).abs() > UNIT_TOL {
            return Err(Error::InvalidModel(format!(
                "ellipse principal axes must be orthogonal, dot = {}",
                axis_sin.dot(axis_cos)
            )));
        }
        Ok(Self {
            amp_sin,
            amp_cos,
            axis_sin,
            axis_cos,
        })
    }

    /// Ellipse in the x-z plane: B(phi) = (b_sin * sin(phi), 0, b_cos * cos(phi)).
    pub fn in_xz_plane(b_sin: f64, b_cos: f64) -> Result<Self> {
        Self::new(b_sin, b_cos, Vec3::unit_x(), Vec3::unit_z())
    }

    /// Ellipse in the y-z plane: B(phi) = (0, b_sin * sin(phi), b_cos * cos(phi)).
    pub fn in_yz_plane(b_sin: f64, b_cos: f64) -> Result<Self> {
        Self::new(b_sin, b_cos, Vec3::unit_y(), Vec3::unit_z())
    }

    pub fn amp_sin(&self) -> f64 {
        self.amp_sin
    }

    pub fn amp_cos(&self) -> f64 {
        self.amp_cos
    }

    pub fn axis_sin(&self) -> Vec3 {
        self.axis_sin
    }

    pub fn axis_cos(&self) -> Vec3 {
        self.axis_cos
    }

    pub fn field(&self, phi: f64) -> Vec3 {
        self.axis_sin * (self.amp_sin * phi.sin()) + self.axis_cos * (self.amp_cos * phi.cos())
    }

    pub fn dfield(&self, phi: f64) -> Vec3 {
        self.axis_sin * (self.amp_sin * phi.cos()) - self.axis_cos * (self.amp_cos * phi.sin())
    }
}

/// Static Zeeman vector plus two elliptically polarized drives.
///
/// `h0` is a scalar energy shift accepted for completeness; it commutes with
/// everything and is ignored by all dynamics.
#[derive(Debug, Clone, Copy)]
pub struct SpinModel {
    drive1: DriveEllipse,
    drive2: DriveEllipse,
    zeeman: Vec3,
    omega1: f64,
    omega2: f64,
    fixed_gap: Option<f64>,
    pub h0: f64,
}

impl SpinModel {
    pub fn new(
        drive1: DriveEllipse,
        drive2: DriveEllipse,
        zeeman: Vec3,
        omega1: f64,
        omega2: f64,
        fixed_gap: Option<f64>,
    ) -> Result<Self> {
        if !(omega1 > 0.0) || !(omega2 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "drive frequencies must be > 0, got ({omega1}, {omega2})"
            )));
        }
        if let Some(d0) = fixed_gap {
            if !(d0 > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "fixed_gap must be > 0, got {d0}"
                )));
            }
        }
        Ok(Self {
            drive1,
            drive2,
            zeeman,
            omega1,
            omega2,
            fixed_gap,
            h0: 0.0,
        })
    }

    /// Two-tone spin model: drive 1 elliptical in the x-z plane, drive 2 in
    /// the y-z plane, Zeeman vector of magnitude `m` at spherical angles
    /// (theta, phi). This is the configuration whose topological transitions
    /// sit at m = +/-0.5 and +/-1.5 for b11 = b22 = 1, b12 = b21 = 0.5.
    #[allow(clippy::too_many_arguments)]
    pub fn two_tone(
        b11: f64,
        b12: f64,
        b21: f64,
        b22: f64,
        m: f64,
        theta: f64,
        phi: f64,
        omega1: f64,
        omega2: f64,
    ) -> Result<Self> {
        let zeeman = Vec3::new(
            m * theta.sin() * phi.cos(),
            m * theta.sin() * phi.sin(),
            m * theta.cos(),
        );
        Self::new(
            DriveEllipse::in_xz_plane(b11, b12)?,
            DriveEllipse::in_yz_plane(b21, b22)?,
            zeeman,
            omega1,
            omega2,
            None,
        )
    }

    /// The standard configuration used throughout: b11 = b22 = 1,
    /// b12 = b21 = 0.5.
    pub fn standard(m: f64, theta: f64, phi: f64, omega1: f64, omega2: f64) -> Result<Self> {
        Self::two_tone(1.0, 0.5, 0.5, 1.0, m, theta, phi, omega1, omega2)
    }

    /// Circularly rotating field at constant gap:
    /// d = (delta0/2) (cos phi1, sin phi1, 0). The second drive has zero
    /// amplitude. This is the exactly solvable model used as an oracle.
    pub fn circular_toy(delta0: f64, omega: f64) -> Result<Self> {
        let drive1 = DriveEllipse::new(delta0 / 2.0, delta0 / 2.0, Vec3::unit_y(), Vec3::unit_x())?;
        let drive2 = DriveEllipse::new(0.0, 0.0, Vec3::unit_y(), Vec3::unit_z())?;
        Self::new(drive1, drive2, Vec3::ZERO, omega, omega, None)
    }

    pub fn with_fixed_gap(mut self, delta0: f64) -> Result<Self> {
        if !(delta0 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "fixed_gap must be > 0, got {delta0}"
            )));
        }
        self.fixed_gap = Some(delta0);
        Ok(self)
    }

    pub fn with_omegas(mut self, omega1: f64, omega2: f64) -> Result<Self> {
        if !(omega1 > 0.0) || !(omega2 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "drive frequencies must be > 0, got ({omega1}, {omega2})"
            )));
        }
        self.omega1 = omega1;
        self.omega2 = omega2;
        Ok(self)
    }

    pub fn drive1(&self) -> &DriveEllipse {
        &self.drive1
    }

    pub fn drive2(&self) -> &DriveEllipse {
        &self.drive2
    }

    pub fn zeeman(&self) -> Vec3 {
        self.zeeman
    }

    pub fn fixed_gap(&self) -> Option<f64> {
        self.fixed_gap
    }

    fn raw_d(&self, p: PhasePoint) -> Vec3 {
        self.zeeman + self.drive1.field(p.phi1()) + self.drive2.field(p.phi2())
    }
}

/// A field d(phi1, phi2) on the phase torus, driven at (omega1, omega2).
///
/// Implementors supply `d`; derivatives default to central finite differences
/// with step [`FD_STEP`].
pub trait PhaseField {
    fn d(&self, p: PhasePoint) -> Result<Vec3>;

    fn omega1(&self) -> f64;

    fn omega2(&self) -> f64;

    /// (d(d)/d(phi1), d(d)/d(phi2)) at `p`.
    fn d_derivatives(&self, p: PhasePoint) -> Result<(Vec3, Vec3)> {
        let h = FD_STEP;
        let dp1 = self.d(PhasePoint::new(p.phi1() + h, p.phi2()))?;
        let dm1 = self.d(PhasePoint::new(p.phi1() - h, p.phi2()))?;
        let dp2 = self.d(PhasePoint::new(p.phi1(), p.phi2() + h))?;
        let dm2 = self.d(PhasePoint::new(p.phi1(), p.phi2() - h))?;
        Ok(((dp1 - dm1) * (0.5 / h), (dp2 - dm2) * (0.5 / h)))
    }

    /// Spectral gap Delta = 2|d|.
    fn gap(&self, p: PhasePoint) -> Result<f64> {
        Ok(2.0 * self.d(p)?.norm())
    }

    /// Full time derivative of d along the trajectory phi_a = omega_a t.
    fn d_dot(&self, p: PhasePoint) -> Result<Vec3> {
        let (d1, d2) = self.d_derivatives(p)?;
        Ok(d1 * self.omega1() + d2 * self.omega2())
    }
}

impl PhaseField for SpinModel {
    fn d(&self, p: PhasePoint) -> Result<Vec3> {
        let raw = self.raw_d(p);
        let norm = raw.norm();
        if norm < GAP_TOLERANCE {
            return Err(Error::DegenerateField {
                magnitude: norm,
                phi1: p.phi1(),
                phi2: p.phi2(),
            });
        }
        match self.fixed_gap {
            None => Ok(raw),
            Some(d0) => Ok(raw * (0.5 * d0 / norm)),
        }
    }

    fn omega1(&self) -> f64 {
        self.omega1
    }

    fn omega2(&self) -> f64 {
        self.omega2
    }

    fn d_derivatives(&self, p: PhasePoint) -> Result<(Vec3, Vec3)> {
        let db1 = self.drive1.dfield(p.phi1());
        let db2 = self.drive2.dfield(p.phi2());
        match self.fixed_gap {
            None => Ok((db1, db2)),
            Some(d0) => {
                // d = (d0/2) r_hat, so each derivative is the projection of
                // the raw derivative transverse to r_hat, rescaled.
                let raw = self.raw_d(p);
                let norm = raw.norm();
                if norm < GAP_TOLERANCE {
                    return Err(Error::DegenerateField {
                        magnitude: norm,
                        phi1: p.phi1(),
                        phi2: p.phi2(),
                    });
                }
                let r_hat = raw * (1.0 / norm);
                let scale = 0.5 * d0 / norm;
                let proj = |v: Vec3| (v - r_hat * r_hat.dot(v)) * scale;
                Ok((proj(db1), proj(db2)))
            }
        }
    }
}

/// Smooth degree-one map from the phase torus onto a sphere of radius
/// `radius`: d = radius * normalize(sin phi1, sin phi2, mass + cos phi1 + cos phi2).
///
/// Constant |d| makes the quality factor constant on the torus, which
/// collapses the geometric bound onto the topological one.
#[derive(Debug, Clone, Copy)]
pub struct SphereMap {
    pub radius: f64,
    pub mass: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl SphereMap {
    pub fn new(radius: f64, omega1: f64, omega2: f64) -> Self {
        Self {
            radius,
            mass: 1.0,
            omega1,
            omega2,
        }
    }
}

impl PhaseField for SphereMap {
    fn d(&self, p: PhasePoint) -> Result<Vec3> {
        let raw = Vec3::new(
            p.phi1().sin(),
            p.phi2().sin(),
            self.mass + p.phi1().cos() + p.phi2().cos(),
        );
        let norm = raw.norm();
        if norm < GAP_TOLERANCE {
            return Err(Error::DegenerateField {
                magnitude: norm,
                phi1: p.phi1(),
                phi2: p.phi2(),
            });
        }
        Ok(raw * (self.radius / norm))
    }

    fn omega1(&self) -> f64 {
        self.omega1
    }

    fn omega2(&self) -> f64 {
        self.omega2
    }

    fn d_derivatives(&self, p: PhasePoint) -> Result<(Vec3, Vec3)> {
        let raw = Vec3::new(
            p.phi1().sin(),
            p.phi2().sin(),
            self.mass + p.phi1().cos() + p.phi2().cos(),
        );
        let norm = raw.norm();
        if norm < GAP_TOLERANCE {
            return Err(Error::DegenerateField {
                magnitude: norm,
                phi1: p.phi1(),
                phi2: p.phi2(),
            });
        }
        let r_hat = raw * (1.0 / norm);
        let raw1 = Vec3::new(p.phi1().cos(), 0.0, -p.phi1().sin());
        let raw2 = Vec3::new(0.0, p.phi2().cos(), -p.phi2().sin());
        let scale = self.radius / norm;
        let proj = |v: Vec3| (v - r_hat * r_hat.dot(v)) * scale;
        Ok((proj(raw1), proj(raw2)))
    }
}
