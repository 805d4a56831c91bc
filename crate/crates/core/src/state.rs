use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Monitored lower bound on state eigenvalues.
pub const POSITIVITY_MONITOR: f64 = -1e-7;
/// Eigenvalues below this abort the computation.
pub const POSITIVITY_ABORT: f64 = -1e-4;

/// Density matrix ρ_α^β in the system eigenbasis, stamped with its time.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: CMat,
    pub time: f64,
}

impl DensityMatrix {
    pub fn new(rho: CMat, time: f64) -> Self {
        assert_eq!(rho.nrows(), rho.ncols(), "density matrix must be square");
        Self { rho, time }
    }

    pub fn from_vector(v: &CVec, n: usize, time: f64) -> Self {
        Self::new(linalg::unvectorize(v, n), time)
    }

    /// Pure state |k⟩⟨k| of the eigenbasis.
    pub fn projector(n: usize, k: usize) -> Self {
        let mut rho = CMat::zeros(n, n);
        rho[(k, k)] = linalg::ONE;
        Self::new(rho, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn into_matrix(self) -> CMat {
        self.rho
    }

    pub fn vectorize(&self) -> CVec {
        linalg::vectorize(&self.rho)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.rho).re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.rho)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Errors if any eigenvalue falls below the abort threshold.
    pub fn check_positivity(&self) -> Result<f64> {
        let min = self.min_eigenvalue();
        if min < POSITIVITY_ABORT {
            return Err(Error::Positivity { min_eigenvalue: min, limit: POSITIVITY_ABORT });
        }
        Ok(min)
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        linalg::trace_distance(&self.rho, &other.rho)
    }

    /// Tr[ρ O] for an operator in the same basis.
    pub fn expectation(&self, op: &CMat) -> f64 {
        linalg::trace_of_product(&self.rho, op).re
    }

    /// Diagonal entries (populations) as real numbers.
    pub fn populations(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn projector_is_a_valid_state() {
        let p = DensityMatrix::projector(4, 2);
        assert_eq!(p.trace(), 1.0);
        assert_eq!(p.hermiticity_defect(), 0.0);
        assert!(p.min_eigenvalue().abs() < 1e-15);
        assert_eq!(p.populations(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn positivity_abort() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(1.001);
        m[(1, 1)] = c(-0.001);
        assert!(DensityMatrix::new(m, 0.0).check_positivity().is_err());
    }
}
