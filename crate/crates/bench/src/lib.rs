//! Fixture specs shared by the benchmarks.

use polariton_core::linalg::{self, CMat};
use polariton_core::PolaritonSpec;

/// Resonant harmonic polariton with exciton driving at truncation `m_o`.
pub fn resonant(m_o: usize) -> PolaritonSpec {
    PolaritonSpec { m_o, ..PolaritonSpec::default() }
}

/// −τ·M̄ for the resonant fixture, the matrix exponentiated once per solve.
pub fn period_exponent(m_o: usize) -> CMat {
    let gen = polariton_core::assemble(&resonant(m_o)).expect("fixture assembles");
    gen.period_average().matrix * linalg::c(-std::f64::consts::TAU)
}
