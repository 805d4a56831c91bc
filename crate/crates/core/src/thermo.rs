//! Stationary energies and the thermodynamic bookkeeping: heat, work,
//! entropy production, irreversible heat and driving efficiency.
//!
//! Sign orientation: every rate is the energy flowing *into* the
//! polariton. Relaxation towards the thermal state from above therefore
//! gives Q̇ < 0, and over a stationary period Σ(Ẇ + Q̇) integrates to zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ZERO};
use crate::liouville::{drive_factors, GeneratorSet, SuperOp};
use crate::model::{EnergyOperators, Spectrum};
use crate::propagator::{PropagationResult, Solution};
use crate::state::{POSITIVITY_ABORT, POSITIVITY_MONITOR};
use crate::units;

/// Floor applied to eigenvalues before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;
/// Eigenvalues below this contribute nothing to −p ln p.
pub const ENTROPY_CUTOFF: f64 = 1e-15;
/// Below this |W̄| the efficiency is undefined.
pub const ZERO_WORK: f64 = 1e-15;
/// Default number of quadrature samples per period.
pub const PERIOD_SAMPLES: usize = 129;

/// Text describing the sign orientation, written into output metadata.
pub const SIGN_CONVENTION: &str = "rates are energy flowing into the polariton: \
Qdot = -Tr[H_S L rho], Wdot = -Tr[H_S L_d(t) rho] with drho/dt = -(D + L_X + L_P + L_d(t)) rho; \
relaxation gives Qdot < 0; Qdot_irrev = Tr[(L_X + L_P) rho (ln rho - ln rho_o)] / beta >= 0";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub e_tls: f64,
    pub e_pho: f64,
    pub e_int: f64,
    pub e_total: f64,
}

impl Energies {
    pub fn max_abs_diff(&self, other: &Energies) -> f64 {
        [
            self.e_tls - other.e_tls,
            self.e_pho - other.e_pho,
            self.e_int - other.e_int,
            self.e_total - other.e_total,
        ]
        .iter()
        .fold(0.0_f64, |m, d| m.max(d.abs()))
    }
}

/// Energies of an eigenbasis state; `ops` must already be in the eigenbasis.
pub fn energies(rho: &CMat, ops: &EnergyOperators, spectrum: &Spectrum) -> Energies {
    let tr = |op: &CMat| linalg::trace_of_product(rho, op).re;
    let e_total = spectrum.energies.iter().enumerate().map(|(k, e)| e * rho[(k, k)].re).sum();
    Energies { e_tls: tr(&ops.upper_exciton), e_pho: tr(&ops.phonon), e_int: tr(&ops.interaction), e_total }
}

/// Diagonal of `op·vec(ρ)` reshaped, i.e. the populations of L ρ.
fn diagonal_of_image(op: &SuperOp, rho_vec: &linalg::CVec) -> Vec<Complex64> {
    let n = op.dim();
    (0..n)
        .map(|a| {
            let row = op.matrix.row(a * n + a);
            row.iter().zip(rho_vec.iter()).map(|(x, y)| x * y).sum()
        })
        .collect()
}

/// −Tr[H_S (L ρ)] in the eigenbasis.
fn energy_flow(op: &SuperOp, rho_vec: &linalg::CVec, spectrum: &Spectrum) -> f64 {
    if op.is_zero() {
        return 0.0;
    }
    let diag = diagonal_of_image(op, rho_vec);
    -spectrum.energies.iter().zip(diag).map(|(e, d)| e * d.re).sum::<f64>()
}

/// (Q̇_X, Q̇_P) = −Tr[H_S L_□ ρ].
pub fn heat_rates(gen: &GeneratorSet, rho: &CMat) -> (f64, f64) {
    let v = linalg::vectorize(rho);
    (energy_flow(&gen.relax_x, &v, &gen.spectrum), energy_flow(&gen.relax_p, &v, &gen.spectrum))
}

/// Time-independent parts of the work rate: Ẇ_□(t) = f₊(t)·w₊ + f₋(t)·w₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkAmplitudes {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl WorkAmplitudes {
    pub fn at(&self, t: f64, omega_drive: f64) -> f64 {
        let (fp, fm) = drive_factors(t, omega_drive);
        (fp * self.plus + fm * self.minus).re
    }
}

fn complex_energy_flow(op: &SuperOp, rho_vec: &linalg::CVec, spectrum: &Spectrum) -> Complex64 {
    if op.is_zero() {
        return ZERO;
    }
    let diag = diagonal_of_image(op, rho_vec);
    -spectrum.energies.iter().zip(diag).map(|(e, d)| d * *e).sum::<Complex64>()
}

/// Work amplitudes for the exciton and phonon driving channels.
pub fn work_amplitudes(gen: &GeneratorSet, rho: &CMat) -> (WorkAmplitudes, WorkAmplitudes) {
    let v = linalg::vectorize(rho);
    let s = &gen.spectrum;
    (
        WorkAmplitudes {
            plus: complex_energy_flow(&gen.drive_x.plus, &v, s),
            minus: complex_energy_flow(&gen.drive_x.minus, &v, s),
        },
        WorkAmplitudes {
            plus: complex_energy_flow(&gen.drive_p.plus, &v, s),
            minus: complex_energy_flow(&gen.drive_p.minus, &v, s),
        },
    )
}

/// (Ẇ_X, Ẇ_P) = −Tr[H_S L_d□(t) ρ].
pub fn work_rates(gen: &GeneratorSet, rho: &CMat, t: f64) -> (f64, f64) {
    let (x, p) = work_amplitudes(gen, rho);
    (x.at(t, gen.omega_drive), p.at(t, gen.omega_drive))
}

/// Eigen-decomposition of a state with the positivity handling shared by
/// every logarithmic quantity: slightly negative eigenvalues are clipped
/// and the spectrum renormalized.
fn clipped_spectrum(rho: &CMat) -> Result<(Vec<f64>, CMat)> {
    let (mut p, u) = linalg::eigh(rho);
    let min = p.first().copied().unwrap_or(0.0);
    if min < POSITIVITY_ABORT {
        return Err(Error::Positivity { min_eigenvalue: min, limit: POSITIVITY_ABORT });
    }
    for x in p.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
    Ok((p, u))
}

/// Whether the smallest eigenvalue is within the monitored bound.
pub fn within_monitored_positivity(rho: &CMat) -> bool {
    linalg::eigvalsh(rho).first().copied().unwrap_or(0.0) >= POSITIVITY_MONITOR
}

/// Von Neumann entropy −Σ p ln p in nats.
pub fn entropy(rho: &CMat) -> Result<f64> {
    let (p, _) = clipped_spectrum(rho)?;
    Ok(p.iter().filter(|&&x| x >= ENTROPY_CUTOFF).map(|&x| -x * x.ln()).sum::<f64>().max(0.0))
}

/// Matrix logarithm of a state, eigenvalues floored at [`LOG_FLOOR`].
pub fn log_state(rho: &CMat) -> Result<CMat> {
    let (p, u) = clipped_spectrum(rho)?;
    let n = p.len();
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, p.iter().map(|&x| c(x.max(LOG_FLOOR).ln()))));
    Ok(linalg::matmul(&linalg::matmul(&u, &d), &u.adjoint()))
}

/// Tr[(L ρ) X]
fn pair_trace(op: &SuperOp, rho_vec: &linalg::CVec, x: &CMat) -> Complex64 {
    if op.is_zero() {
        return ZERO;
    }
    let image = linalg::unvectorize(&linalg::matvec(&op.matrix, rho_vec), op.dim());
    linalg::trace_of_product(&image, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyRates {
    pub x: f64,
    pub p: f64,
    pub dx: f64,
    pub dp: f64,
}

impl EntropyRates {
    pub fn total(&self) -> f64 {
        self.x + self.p + self.dx + self.dp
    }
}

/// Ṡ_□ = Tr[(L_□ ρ) ln ρ]; the four components sum to dS/dt.
pub fn entropy_rates(gen: &GeneratorSet, rho: &CMat, t: f64) -> Result<EntropyRates> {
    let log = log_state(rho)?;
    let v = linalg::vectorize(rho);
    let (fp, fm) = drive_factors(t, gen.omega_drive);
    let driven = |plus: &SuperOp, minus: &SuperOp| (fp * pair_trace(plus, &v, &log) + fm * pair_trace(minus, &v, &log)).re;
    Ok(EntropyRates {
        x: pair_trace(&gen.relax_x, &v, &log).re,
        p: pair_trace(&gen.relax_p, &v, &log).re,
        dx: driven(&gen.drive_x.plus, &gen.drive_x.minus),
        dp: driven(&gen.drive_p.plus, &gen.drive_p.minus),
    })
}

/// Irreversible heat rate together with its alternative evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrreversibleHeat {
    /// β⁻¹ Tr[(L_X + L_P) ρ (ln ρ − ln ρ_o)], non-negative.
    pub rate: f64,
    /// β⁻¹(Ṡ_X + Ṡ_P) − (Q̇_X + Q̇_P).
    pub from_rates: f64,
    /// The trace form taken with ln ρ_o − ln ρ, the literal opposite orientation.
    pub opposite_orientation: f64,
}

impl IrreversibleHeat {
    /// |rate − from_rates|, zero up to rounding.
    pub fn mismatch(&self) -> f64 {
        (self.rate - self.from_rates).abs()
    }

    /// Whether the literal opposite orientation disagrees in sign with the
    /// non-negative trace form.
    pub fn sign_discrepancy(&self) -> bool {
        self.rate > 0.0 && self.opposite_orientation < 0.0
    }
}

/// ln ρ_o for the thermal state at `t_env`, up to an additive constant
/// (which drops out against trace-annihilating generators).
fn log_thermal(spectrum: &Spectrum, t_env: f64) -> CMat {
    let beta = units::beta(t_env);
    let ground = spectrum.ground_energy();
    let n = spectrum.dim();
    CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        spectrum.energies.iter().map(|&e| c(-beta * (e - ground))),
    ))
}

pub fn irreversible_heat_rate(gen: &GeneratorSet, rho: &CMat, t_env: f64) -> Result<IrreversibleHeat> {
    let beta = units::beta(t_env);
    let log = log_state(rho)?;
    let relative = &log - log_thermal(&gen.spectrum, t_env);
    let v = linalg::vectorize(rho);
    let trace = |op: &SuperOp| pair_trace(op, &v, &relative).re;
    let rate = (trace(&gen.relax_x) + trace(&gen.relax_p)) / beta;
    let sx = pair_trace(&gen.relax_x, &v, &log).re;
    let sp = pair_trace(&gen.relax_p, &v, &log).re;
    let (qx, qp) = heat_rates(gen, rho);
    Ok(IrreversibleHeat { rate, from_rates: (sx + sp) / beta - (qx + qp), opposite_orientation: -rate })
}

/// Composite Simpson rule on `samples` (odd) equally spaced values over
/// `[0, span]`.
pub fn simpson(span: f64, samples: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(samples >= 3 && samples % 2 == 1, "Simpson needs an odd sample count ≥ 3");
    let h = span / (samples - 1) as f64;
    let mut acc = f(0.0) + f(span);
    for k in 1..samples - 1 {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    acc * h / 3.0
}

/// Integrals over one stationary period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodAverages {
    /// Total work per period (eV).
    pub wbar: f64,
    pub wbar_x: f64,
    pub wbar_p: f64,
    /// Irreversible heat per period (eV).
    pub qbar_irr: f64,
    /// Heat per period from each bath (eV).
    pub qbar_x: f64,
    pub qbar_p: f64,
}

impl PeriodAverages {
    /// ∮(Ẇ + Q̇) dt, zero for a stationary cycle.
    pub fn first_law_residual(&self) -> f64 {
        self.wbar + self.qbar_x + self.qbar_p
    }
}

/// Integrates the work and heat rates over one period of the stationary
/// cycle. Within the period the state is held at its whole-period value;
/// the explicit time dependence enters through f_±(t).
pub fn period_averages(
    gen: &GeneratorSet,
    stationary: &PropagationResult,
    t_env: f64,
    samples: usize,
) -> Result<PeriodAverages> {
    if !stationary.stationary {
        return Err(Error::NotStationary { residual: stationary.residual });
    }
    let rho = stationary.state.matrix();
    let period = std::f64::consts::TAU / gen.omega_drive;
    let (wx, wp) = work_amplitudes(gen, rho);
    let omega = gen.omega_drive;
    let wbar_x = simpson(period, samples, |t| wx.at(t, omega));
    let wbar_p = simpson(period, samples, |t| wp.at(t, omega));
    let irr = irreversible_heat_rate(gen, rho, t_env)?;
    let qbar_irr = simpson(period, samples, |_| irr.rate);
    let (qx, qp) = heat_rates(gen, rho);
    Ok(PeriodAverages {
        wbar: wbar_x + wbar_p,
        wbar_x,
        wbar_p,
        qbar_irr,
        qbar_x: qx * period,
        qbar_p: qp * period,
    })
}

/// Eff = (W̄ − Q̄_irr)/W̄; NaN when |W̄| is below [`ZERO_WORK`].
pub fn efficiency(wbar: f64, qbar_irr: f64) -> f64 {
    try_efficiency(wbar, qbar_irr).unwrap_or(f64::NAN)
}

pub fn try_efficiency(wbar: f64, qbar_irr: f64) -> Result<f64> {
    if !(wbar.abs() >= ZERO_WORK) {
        return Err(Error::ZeroWork { wbar });
    }
    Ok((wbar - qbar_irr) / wbar)
}

/// All stationary observables of one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoRecord {
    pub e_tls: f64,
    pub e_pho: f64,
    pub e_int: f64,
    pub e_total: f64,
    pub qdot_x: f64,
    pub qdot_p: f64,
    /// Period-averaged work rates.
    pub wdot_x: f64,
    pub wdot_p: f64,
    pub s: f64,
    /// Entropy rates; the driving components are period averages.
    pub sdot: EntropyRates,
    pub qdot_irrev: f64,
    /// Irreversible heat rate from β⁻¹(Ṡ_X + Ṡ_P) − (Q̇_X + Q̇_P).
    pub qdot_irrev_from_rates: f64,
    pub wbar: f64,
    pub qbar_irr: f64,
    pub eff: f64,
    pub first_law_residual: f64,
    /// Tr ρ of the evaluated state.
    pub trace: f64,
    pub stationary: bool,
    pub residual: f64,
    pub m_o: usize,
    pub edge_population: f64,
}

/// Evaluates every observable on a solved point. Period quantities are NaN
/// when the state is not stationary.
pub fn evaluate(solution: &Solution) -> Result<ThermoRecord> {
    evaluate_with_samples(solution, PERIOD_SAMPLES)
}

pub fn evaluate_with_samples(solution: &Solution, samples: usize) -> Result<ThermoRecord> {
    let gen = &solution.generators;
    let res = &solution.result;
    let rho = res.state.matrix();
    let t_env = solution.spec.t_env;
    let e = energies(rho, &solution.energy_ops, &gen.spectrum);
    let (qdot_x, qdot_p) = heat_rates(gen, rho);
    let s = entropy(rho)?;
    let period = std::f64::consts::TAU / gen.omega_drive;
    let rates_at = entropy_rates(gen, rho, 0.0)?;
    let (dx, dp) = {
        let log = log_state(rho)?;
        let v = linalg::vectorize(rho);
        // ∫f_± = τ, so the period mean uses A₊ + A₋
        let mean = |plus: &SuperOp, minus: &SuperOp| (pair_trace(plus, &v, &log) + pair_trace(minus, &v, &log)).re;
        (mean(&gen.drive_x.plus, &gen.drive_x.minus), mean(&gen.drive_p.plus, &gen.drive_p.minus))
    };
    let sdot = EntropyRates { x: rates_at.x, p: rates_at.p, dx, dp };
    let irr = irreversible_heat_rate(gen, rho, t_env)?;
    let (wbar, wbar_x, wbar_p, qbar_irr, first_law) = match period_averages(gen, res, t_env, samples) {
        Ok(avg) => (avg.wbar, avg.wbar_x, avg.wbar_p, avg.qbar_irr, avg.first_law_residual()),
        Err(Error::NotStationary { .. }) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        Err(other) => return Err(other),
    };
    Ok(ThermoRecord {
        e_tls: e.e_tls,
        e_pho: e.e_pho,
        e_int: e.e_int,
        e_total: e.e_total,
        qdot_x,
        qdot_p,
        wdot_x: wbar_x / period,
        wdot_p: wbar_p / period,
        s,
        sdot,
        qdot_irrev: irr.rate,
        qdot_irrev_from_rates: irr.from_rates,
        wbar,
        qbar_irr,
        eff: efficiency(wbar, qbar_irr),
        first_law_residual: first_law,
        trace: res.state.trace(),
        stationary: res.stationary,
        residual: res.residual,
        m_o: solution.spec.m_o,
        edge_population: solution.edge_population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(p: &[f64]) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(p.len(), p.iter().map(|&x| c(x))))
    }

    #[test]
    fn entropy_limits() {
        assert_eq!(entropy(&diag(&[1.0, 0.0, 0.0])).unwrap(), 0.0);
        assert!((entropy(&diag(&[0.25; 4])).unwrap() - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_level_thermal_entropy() {
        let q = (-1.0f64).exp();
        let p = [1.0 / (1.0 + q), q / (1.0 + q)];
        assert!((entropy(&diag(&p)).unwrap() - 0.5822031088882179548).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_negative_state() {
        assert!(entropy(&diag(&[1.01, -0.01])).is_err());
        // tiny negative eigenvalues are clipped
        assert!(entropy(&diag(&[1.0 + 1e-9, -1e-9])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn efficiency_values() {
        assert_eq!(efficiency(2.0, 0.0), 1.0);
        assert_eq!(efficiency(2.0, 2.0), 0.0);
        assert_eq!(efficiency(2.0, 1.0), 0.5);
        assert!(efficiency(1e-16, 0.0).is_nan());
        assert!(matches!(try_efficiency(0.0, 0.0), Err(Error::ZeroWork { .. })));
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(2.0, 5, |x| x * x * x - x);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
