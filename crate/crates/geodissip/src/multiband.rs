//! N-level generalization: instantaneous eigenbasis, gauge-invariant
//! Berry-connection pair products, diabatic density-matrix corrections, and
//! the dissipation metric Lambda_ij, reducing to the two-level gamma G result.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::FD_STEP;

type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for adjacent-level degeneracy, in units of the
/// spectral width.
const DEGENERACY_TOLERANCE: f64 = 1e-8;

const HERMITICITY_TOLERANCE: f64 = 1e-12;

pub type HamiltonianFn = Box<dyn Fn(&[f64]) -> CMatrix>;
pub type DerivativeFn = Box<dyn Fn(&[f64], usize) -> CMatrix>;

/// Parametrized Hermitian Hamiltonian with inter-band relaxation times.
pub struct MultibandModel {
    dim: usize,
    n_params: usize,
    hamiltonian: HamiltonianFn,
    derivative: Option<DerivativeFn>,
    /// Symmetric table of tau_mn; the diagonal is unused by the metric but
    /// kept for population relaxation in ODE oracles.
    relaxation_times: DMatrix<f64>,
}

impl MultibandModel {
    pub fn new(
        dim: usize,
        n_params: usize,
        hamiltonian: HamiltonianFn,
        relaxation_times: DMatrix<f64>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidModel(format!("dim must be >= 2, got {dim}")));
        }
        if relaxation_times.nrows() != dim || relaxation_times.ncols() != dim {
            return Err(Error::InvalidModel(format!(
                "relaxation table must be {dim}x{dim}"
            )));
        }
        for m in 0..dim {
            for n in 0..dim {
                let tau = relaxation_times[(m, n)];
                if !(tau > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "relaxation times must be > 0, got tau[{m}][{n}] = {tau}"
                    )));
                }
                if (tau - relaxation_times[(n, m)]).abs() > 1e-12 * tau {
                    return Err(Error::InvalidModel(format!(
                        "relaxation table must be symmetric at ({m}, {n})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            n_params,
            hamiltonian,
            derivative: None,
            relaxation_times,
        })
    }

    /// Uniform tau_mn = tau for all pairs.
    pub fn with_uniform_tau(
        dim: usize,
        n_params: usize,
        hamiltonian: HamiltonianFn,
        tau: f64,
    ) -> Result<Self> {
        Self::new(
            dim,
            n_params,
            hamiltonian,
            DMatrix::from_element(dim, dim, tau),
        )
    }

    pub fn with_derivative(mut self, derivative: DerivativeFn) -> Self {
        self.derivative = Some(derivative);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn tau(&self, m: usize, n: usize) -> f64 {
        self.relaxation_times[(m, n)]
    }

    /// Evaluate H(alpha), verifying Hermiticity.
    pub fn hamiltonian(&self, alpha: &[f64]) -> Result<CMatrix> {
        assert_eq!(alpha.len(), self.n_params, "parameter count mismatch");
        let h = (self.hamiltonian)(alpha);
        let defect = (&h - h.adjoint()).norm();
        if defect > HERMITICITY_TOLERANCE * (1.0 + h.norm()) {
            return Err(Error::InvalidModel(format!(
                "Hamiltonian is not Hermitian: defect {defect:.3e}"
            )));
        }
        Ok(h)
    }

    /// del H / del alpha^i, analytic if supplied, else central differences.
    pub fn dh(&self, alpha: &[f64], i: usize) -> Result<CMatrix> {
        assert!(i < self.n_params, "parameter index out of range");
        if let Some(d) = &self.derivative {
            return Ok(d(alpha, i));
        }
        let mut plus = alpha.to_vec();
        let mut minus = alpha.to_vec();
        plus[i] += FD_STEP;
        minus[i] -= FD_STEP;
        let hp = self.hamiltonian(&plus)?;
        let hm = self.hamiltonian(&minus)?;
        Ok((hp - hm) * Complex64::new(0.5 / FD_STEP, 0.0))
    }
}

/// Fixed instantaneous-band occupations.
#[derive(Debug, Clone)]
pub struct OccupationProfile {
    rho_eq: Vec<f64>,
}

impl OccupationProfile {
    pub fn new(rho_eq: Vec<f64>) -> Result<Self> {
        let sum: f64 = rho_eq.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!(
                "occupations must sum to 1, got {sum}"
            )));
        }
        if rho_eq.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
            return Err(Error::InvalidModel("occupations must lie in [0, 1]".into()));
        }
        Ok(Self { rho_eq })
    }

    /// All population in the lowest band.
    pub fn ground(dim: usize) -> Self {
        let mut rho_eq = vec![0.0; dim];
        rho_eq[0] = 1.0;
        Self { rho_eq }
    }

    pub fn rho(&self, m: usize) -> f64 {
        self.rho_eq[m]
    }

    pub fn dim(&self) -> usize {
        self.rho_eq.len()
    }
}

/// Eigen-decomposition with energies ascending. Errors on (near-)degenerate
/// adjacent levels, relative to the spectral width.
pub fn eig_sorted(h: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    let eig = h.clone().symmetric_eigen();
    let dim = h.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = DVector::from_fn(dim, |k, _| eig.eigenvalues[order[k]]);
    let mut vectors = CMatrix::zeros(dim, dim);
    for (k, &src) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(src));
    }
    let width = energies[dim - 1] - energies[0];
    for k in 0..dim - 1 {
        let gap = energies[k + 1] - energies[k];
        if gap < DEGENERACY_TOLERANCE * width || width == 0.0 {
            return Err(Error::DegenerateSpectrum {
                gap,
                lower: k,
                upper: k + 1,
            });
        }
    }
    Ok((energies, vectors))
}

/// Matrix element <m| del_i H |n> in the sorted eigenbasis.
fn dh_element(dh: &CMatrix, vectors: &CMatrix, m: usize, n: usize) -> Complex64 {
    let vm = vectors.column(m);
    let vn = vectors.column(n);
    (vm.adjoint() * dh * vn)[(0, 0)]
}

/// Gauge-invariant product A^i_mn A^j_nm of Berry connections, computed via
/// <m|del_i H|n><n|del_j H|m> / (E_n - E_m)^2 so no eigenvector phases enter
/// the result.
pub fn berry_connection_product(
    model: &MultibandModel,
    alpha: &[f64],
    i: usize,
    j: usize,
    m: usize,
    n: usize,
) -> Result<Complex64> {
    assert!(m != n, "Berry connection requires m != n");
    let h = model.hamiltonian(alpha)?;
    let (energies, vectors) = eig_sorted(&h)?;
    let dhi = model.dh(alpha, i)?;
    let dhj = model.dh(alpha, j)?;
    let denom = energies[n] - energies[m];
    Ok(dh_element(&dhi, &vectors, m, n) * dh_element(&dhj, &vectors, n, m) / (denom * denom))
}

/// Diabatic first-order correction to the steady-state density matrix in the
/// instantaneous eigenbasis:
/// delta rho_mn = A^i_mn alphadot^i (rho_m - rho_n) / (E_m - E_n - i / tau_mn),
/// zero diagonal.
pub fn diabatic_correction(
    model: &MultibandModel,
    alpha: &[f64],
    alpha_dot: &[f64],
    occ: &OccupationProfile,
) -> Result<CMatrix> {
    assert_eq!(
        alpha_dot.len(),
        model.n_params(),
        "alpha_dot length mismatch"
    );
    assert_eq!(occ.dim(), model.dim(), "occupation dimension mismatch");
    let h = model.hamiltonian(alpha)?;
    let (energies, vectors) = eig_sorted(&h)?;
    let dh: Vec<CMatrix> = (0..model.n_params())
        .map(|i| model.dh(alpha, i))
        .collect::<Result<_>>()?;
    let dim = model.dim();
    let mut delta = CMatrix::zeros(dim, dim);
    for m in 0..dim {
        for n in 0..dim {
            if m == n {
                continue;
            }
            // A^i_mn = -i <m|del_i H|n> / (E_n - E_m)
            let mut a_dot = Complex64::new(0.0, 0.0);
            for i in 0..model.n_params() {
                a_dot += Complex64::new(0.0, -1.0)
                    * dh_element(&dh[i], &vectors, m, n)
                    * (alpha_dot[i] / (energies[n] - energies[m]));
            }
            let denom = Complex64::new(energies[m] - energies[n], -1.0 / model.tau(m, n));
            delta[(m, n)] = a_dot * ((occ.rho(m) - occ.rho(n)) / denom);
        }
    }
    Ok(delta)
}

/// Dissipation metric
/// Lambda_ij = 2 sum_{m<n} (rho_n - rho_m)
///             Im{ A^i_mn A^j_nm / (1 + i / (Delta_mn tau_mn)) },
/// Delta_mn = E_m - E_n. The averaged dissipation is avg[Lambda_ij adot^i adot^j].
pub fn lambda_metric(
    model: &MultibandModel,
    alpha: &[f64],
    occ: &OccupationProfile,
) -> Result<DMatrix<f64>> {
    assert_eq!(occ.dim(), model.dim(), "occupation dimension mismatch");
    let h = model.hamiltonian(alpha)?;
    let (energies, vectors) = eig_sorted(&h)?;
    let np = model.n_params();
    let dh: Vec<CMatrix> = (0..np).map(|i| model.dh(alpha, i)).collect::<Result<_>>()?;
    let mut lambda = DMatrix::zeros(np, np);
    for m in 0..model.dim() {
        for n in (m + 1)..model.dim() {
            // Positive adjacent gap; the sign convention here is pinned by
            // the two-level reduction Lambda^sym = +gamma G.
            let gap = energies[n] - energies[m];
            let weight = 2.0 * (occ.rho(n) - occ.rho(m));
            if weight == 0.0 {
                continue;
            }
            let lorentz = Complex64::new(1.0, 1.0 / (gap * model.tau(m, n)));
            for i in 0..np {
                for j in 0..np {
                    let prod = dh_element(&dh[i], &vectors, m, n)
                        * dh_element(&dh[j], &vectors, n, m)
                        / (gap * gap);
                    lambda[(i, j)] += weight * (prod / lorentz).im;
                }
            }
        }
    }
    Ok(lambda)
}

/// Symmetric part of a square matrix.
pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Antisymmetric part of a square matrix.
pub fn antisymmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Pauli-basis 2x2 Hamiltonian d . sigma as a dense complex matrix.
pub fn pauli_hamiltonian(d: crate::vec3::Vec3) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(d.z, 0.0),
            Complex64::new(d.x, -d.y),
            Complex64::new(d.x, d.y),
            Complex64::new(-d.z, 0.0),
        ],
    )
}

/// Spin-1 Hamiltonian d . S with the standard spin-1 matrices.
pub fn spin1_hamiltonian(d: crate::vec3::Vec3) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = |re: f64, im: f64| Complex64::new(re, im);
    CMatrix::from_row_slice(
        3,
        3,
        &[
            z(d.z, 0.0),
            z(s * d.x, -s * d.y),
            z(0.0, 0.0),
            z(s * d.x, s * d.y),
            z(0.0, 0.0),
            z(s * d.x, -s * d.y),
            z(0.0, 0.0),
            z(s * d.x, s * d.y),
            z(-d.z, 0.0),
        ],
    )
}
