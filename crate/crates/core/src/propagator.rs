//! Time evolution under the driven master equation.
//!
//! The production path uses the exponential propagator
//!
//! ```text
//! ρ(t) = exp(−[A_o·t + g₊(t)·A₊ + g₋(t)·A₋]) ρ(0)
//! ```
//!
//! whose exponent reduces to `M·nτ` at whole periods, so stationarity is
//! reached by repeated squaring of the one-period map. A fixed-step RK4
//! integrator of the underlying non-autonomous equation is kept as an
//! oracle, both for single trajectories and for the one-period map.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::linalg::{self, c, CMat, CVec};
use crate::liouville::{self, drive_factors, GeneratorSet};
use crate::model::{self, EnergyOperators, PolaritonSpec};
use crate::state::DensityMatrix;
use crate::thermo::{self, Energies};

/// Energy drift (eV) between consecutive periods below which a state is
/// declared stationary.
pub const STATIONARITY_THRESHOLD: f64 = 1e-7;

/// Local error bound per step of the direct integrator.
pub const STEP_ERROR_LIMIT: f64 = 1e-9;

/// The direct integrator estimates its local error on every this-many-th step.
const STEP_CHECK_STRIDE: usize = 16;

/// Population allowed in the highest phonon level before the truncation is
/// deemed too small.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub state: DensityMatrix,
    pub stationary: bool,
    /// Largest change of (E_TLS, E_pho, E_int, ⟨H_S⟩) over the last period, eV.
    pub residual: f64,
    /// Whole driving periods elapsed.
    pub periods: u64,
}

/// g_±(t) = ∫₀ᵗ 2cos(ω′s)e^{±iω′s} ds.
pub fn integrated_phases(t: f64, omega_drive: f64) -> (Complex64, Complex64) {
    let osc = |sign: f64| {
        let z = Complex64::new(0.0, sign * 2.0 * omega_drive * t);
        // (e^z − 1)/z · t, written to stay accurate for small z
        let ratio = if z.norm() < 1e-8 { Complex64::new(1.0, 0.0) + z * 0.5 } else { (z.exp() - 1.0) / z };
        ratio * t
    };
    (c(t) + osc(1.0), c(t) + osc(-1.0))
}

/// A_o·t + g₊(t)·A₊ + g₋(t)·A₋
pub fn exponent(gen: &GeneratorSet, t: f64) -> CMat {
    let (gp, gm) = integrated_phases(t, gen.omega_drive);
    let mut m = &gen.a_o.matrix * c(t);
    if gen.is_driven() {
        m += &gen.a_plus.matrix * gp;
        m += &gen.a_minus.matrix * gm;
    }
    m
}

/// Propagator matrix acting on vectorized states over `[0, t]`.
pub fn propagator_matrix(gen: &GeneratorSet, t: f64) -> Result<CMat> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("propagation time must be ≥ 0, got {t}")));
    }
    expm(&(-exponent(gen, t)))
}

/// Evolves `rho0` by the exponential propagator over a span `t` measured
/// from the start of a driving period.
pub fn propagate_expm(gen: &GeneratorSet, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let p = propagator_matrix(gen, t)?;
    let v = linalg::matvec(&p, &rho0.vectorize());
    Ok(DensityMatrix::from_vector(&v, gen.dim(), rho0.time + t))
}

struct DirectRhs<'a> {
    gen: &'a GeneratorSet,
    scratch: [CVec; 3],
}

impl<'a> DirectRhs<'a> {
    fn new(gen: &'a GeneratorSet) -> Self {
        let n2 = gen.dim() * gen.dim();
        Self { gen, scratch: [CVec::zeros(n2), CVec::zeros(n2), CVec::zeros(n2)] }
    }

    /// −(A_o + f₊A₊ + f₋A₋) y
    fn eval(&mut self, t: f64, y: &CVec) -> CVec {
        let gen = self.gen;
        self.scratch[0].gemv(c(-1.0), &gen.a_o.matrix, y, c(0.0));
        if !gen.is_driven() {
            return self.scratch[0].clone();
        }
        let (fp, fm) = drive_factors(t, gen.omega_drive);
        self.scratch[1].gemv(-fp, &gen.a_plus.matrix, y, c(0.0));
        self.scratch[2].gemv(-fm, &gen.a_minus.matrix, y, c(0.0));
        &self.scratch[0] + &self.scratch[1] + &self.scratch[2]
    }

    fn rk4(&mut self, t: f64, y: &CVec, h: f64) -> CVec {
        let k1 = self.eval(t, y);
        let k2 = self.eval(t + 0.5 * h, &(y + &k1 * c(0.5 * h)));
        let k3 = self.eval(t + 0.5 * h, &(y + &k2 * c(0.5 * h)));
        let k4 = self.eval(t + h, &(y + &k3 * c(h)));
        y + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0)
    }
}

/// Classic RK4 on dρ/dt = −(A_o + f₊(t)A₊ + f₋(t)A₋)ρ from the start of a
/// driving period, with `dt` rounded down so the span is covered exactly.
///
/// Every few steps the local error is estimated by step doubling; an
/// estimate above [`STEP_ERROR_LIMIT`] rejects the whole integration.
pub fn propagate_direct(gen: &GeneratorSet, rho0: &DensityMatrix, t: f64, dt: f64) -> Result<DensityMatrix> {
    let period = std::f64::consts::TAU / gen.omega_drive;
    if !(dt > 0.0 && dt <= period / 200.0 * (1.0 + 1e-12)) {
        return Err(Error::param("dt", format!("must lie in (0, τ/200] with τ = {period}, got {dt}")));
    }
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("propagation time must be ≥ 0, got {t}")));
    }
    let steps = (t / dt).ceil() as usize;
    let mut y = rho0.vectorize();
    if steps == 0 {
        return Ok(rho0.clone());
    }
    let h = t / steps as f64;
    let mut rhs = DirectRhs::new(gen);
    for k in 0..steps {
        let t0 = k as f64 * h;
        if k % STEP_CHECK_STRIDE == 0 {
            let full = rhs.rk4(t0, &y, h);
            let mid = rhs.rk4(t0, &y, 0.5 * h);
            let halves = rhs.rk4(t0 + 0.5 * h, &mid, 0.5 * h);
            let estimate = (&full - &halves).iter().map(|z| z.norm()).fold(0.0, f64::max) / 15.0;
            if estimate > STEP_ERROR_LIMIT {
                return Err(Error::StepRejected { t: rho0.time + t0, estimate, limit: STEP_ERROR_LIMIT });
            }
            y = halves;
        } else {
            y = rhs.rk4(t0, &y, h);
        }
    }
    Ok(DensityMatrix::from_vector(&y, gen.dim(), rho0.time + t))
}

/// Hermitian part of a propagated state, keeping its timestamp.
fn hermitize(state: DensityMatrix) -> DensityMatrix {
    let time = state.time;
    let m = state.into_matrix();
    let h = (&m + m.adjoint()) * c(0.5);
    DensityMatrix::new(h, time)
}

fn drift(a: &Energies, b: &Energies) -> f64 {
    a.max_abs_diff(b)
}

/// Iterates the one-period map from `rho0` by doubling jumps until the
/// energies stop changing or `t_final` is reached.
pub fn stationary_from(
    gen: &GeneratorSet,
    ops: &EnergyOperators,
    rho0: &DensityMatrix,
    t_final: f64,
) -> Result<PropagationResult> {
    let period = std::f64::consts::TAU / gen.omega_drive;
    let map = expm(&(&gen.period_average().matrix * c(-period)))?;
    iterate_period_map(gen, ops, rho0, t_final, map)
}

fn iterate_period_map(
    gen: &GeneratorSet,
    ops: &EnergyOperators,
    rho0: &DensityMatrix,
    t_final: f64,
    map: CMat,
) -> Result<PropagationResult> {
    let n = gen.dim();
    let period = std::f64::consts::TAU / gen.omega_drive;
    let n_cap = (t_final / period).floor().max(1.0) as u64;
    let energies = |v: &CVec| thermo::energies(&linalg::unvectorize(v, n), ops, &gen.spectrum);

    let mut powers = vec![map];
    let mut current = rho0.vectorize();
    let mut done: u64 = 0;
    let mut residual = f64::INFINITY;
    let mut stationary = false;
    loop {
        let k = powers.len() - 1;
        let jump = 1u64 << k;
        if done + jump > n_cap {
            break;
        }
        current = linalg::matvec(&powers[k], &current);
        done += jump;
        let next = linalg::matvec(&powers[0], &current);
        residual = drift(&energies(&current), &energies(&next));
        if residual < STATIONARITY_THRESHOLD {
            stationary = true;
            break;
        }
        let sq = linalg::matmul(&powers[k], &powers[k]);
        if !linalg::is_finite(&sq) {
            return Err(Error::NonFinite);
        }
        powers.push(sq);
    }
    if !stationary && done < n_cap {
        let remaining = n_cap - done;
        for (k, p) in powers.iter().enumerate() {
            if remaining & (1u64 << k) != 0 {
                current = linalg::matvec(p, &current);
            }
        }
        done = n_cap;
        let next = linalg::matvec(&powers[0], &current);
        residual = drift(&energies(&current), &energies(&next));
        stationary = residual < STATIONARITY_THRESHOLD;
    }
    let state = hermitize(DensityMatrix::from_vector(&current, n, rho0.time + done as f64 * period));
    if !linalg::is_finite(state.matrix()) {
        return Err(Error::NonFinite);
    }
    state.check_positivity()?;
    Ok(PropagationResult { state, stationary, residual, periods: done })
}

/// A_o + f₊(t)A₊ + f₋(t)A₋
fn generator_at(gen: &GeneratorSet, t: f64) -> CMat {
    if !gen.is_driven() {
        return gen.a_o.matrix.clone();
    }
    let (fp, fm) = drive_factors(t, gen.omega_drive);
    &gen.a_o.matrix + &gen.a_plus.matrix * fp + &gen.a_minus.matrix * fm
}

fn rk4_matrix(gen: &GeneratorSet, t: f64, y: &CMat, h: f64) -> CMat {
    let (g0, g1, g2) = (generator_at(gen, t), generator_at(gen, t + 0.5 * h), generator_at(gen, t + h));
    let rhs = |g: &CMat, y: &CMat| {
        let mut out = CMat::zeros(y.nrows(), y.ncols());
        linalg::gemm_into(c(-1.0), g, y, c(0.0), &mut out);
        out
    };
    let k1 = rhs(&g0, y);
    let k2 = rhs(&g1, &(y + &k1 * c(0.5 * h)));
    let k3 = rhs(&g1, &(y + &k2 * c(0.5 * h)));
    let k4 = rhs(&g2, &(y + &k3 * c(h)));
    y + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0)
}

/// One-period propagator integrated column by column with RK4 from the
/// identity, with the same step-doubling checks as [`propagate_direct`].
pub fn monodromy_direct(gen: &GeneratorSet, dt: f64) -> Result<CMat> {
    let period = std::f64::consts::TAU / gen.omega_drive;
    if !(dt > 0.0 && dt <= period / 200.0 * (1.0 + 1e-12)) {
        return Err(Error::param("dt", format!("must lie in (0, τ/200] with τ = {period}, got {dt}")));
    }
    let steps = (period / dt).ceil() as usize;
    let h = period / steps as f64;
    let n2 = gen.dim() * gen.dim();
    let mut y = CMat::identity(n2, n2);
    for k in 0..steps {
        let t0 = k as f64 * h;
        if k % STEP_CHECK_STRIDE == 0 {
            let full = rk4_matrix(gen, t0, &y, h);
            let mid = rk4_matrix(gen, t0, &y, 0.5 * h);
            let halves = rk4_matrix(gen, t0 + 0.5 * h, &mid, 0.5 * h);
            let estimate = linalg::max_abs(&(&full - &halves)) / 15.0;
            if estimate > STEP_ERROR_LIMIT {
                return Err(Error::StepRejected { t: t0, estimate, limit: STEP_ERROR_LIMIT });
            }
            y = halves;
        } else {
            y = rk4_matrix(gen, t0, &y, h);
        }
    }
    if !linalg::is_finite(&y) {
        return Err(Error::NonFinite);
    }
    Ok(y)
}

/// Counterpart of [`stationary_from`] whose one-period map is integrated
/// by RK4 ([`monodromy_direct`]) instead of exponentiated. A rejected step
/// size is halved up to three times before the error is passed on.
pub fn stationary_direct(
    gen: &GeneratorSet,
    ops: &EnergyOperators,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<PropagationResult> {
    let mut dt = dt;
    let mut attempt = 0;
    let map = loop {
        match monodromy_direct(gen, dt) {
            Err(Error::StepRejected { .. }) if attempt < 3 => {
                attempt += 1;
                dt *= 0.5;
            }
            other => break other?,
        }
    };
    iterate_period_map(gen, ops, rho0, t_final, map)
}

/// Default step of the direct integrator, τ/512.
pub fn default_dt(omega_drive: f64) -> f64 {
    std::f64::consts::TAU / omega_drive / 512.0
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Parameters actually solved (m_o may have grown).
    pub spec: PolaritonSpec,
    pub generators: GeneratorSet,
    /// Energy operators in the eigenbasis.
    pub energy_ops: EnergyOperators,
    pub result: PropagationResult,
    /// Population of the highest phonon level of the product basis.
    pub edge_population: f64,
}

/// Product-basis population of the top phonon level `m_o − 1`.
pub fn edge_population(state: &DensityMatrix, spectrum: &model::Spectrum) -> f64 {
    let n = spectrum.dim();
    let rho = spectrum.to_product_basis(state.matrix());
    (rho[(n - 2, n - 2)].re + rho[(n - 1, n - 1)].re).max(0.0)
}

/// Stationary state from the Gibbs state under the exponential propagator.
pub fn stationary_state(spec: &PolaritonSpec) -> Result<PropagationResult> {
    Ok(solve(spec, None)?.result)
}

/// Solves one parameter point. With `max_mo = Some(limit)` the truncation
/// grows in steps of 4 while the top phonon level carries more than
/// [`TRUNCATION_TOLERANCE`] population.
pub fn solve(spec: &PolaritonSpec, max_mo: Option<usize>) -> Result<Solution> {
    if !(spec.gamma_x + spec.gamma_p > 0.0) {
        return Err(Error::param("Gamma", "Gamma_X + Gamma_P must be > 0 for a stationary state"));
    }
    let mut spec = spec.clone();
    loop {
        let gen = liouville::assemble(&spec)?;
        let ops = EnergyOperators::new(&spec).to_eigenbasis(&gen.spectrum);
        let rho0 = model::gibbs_state(&gen.spectrum, spec.t_env);
        let result = stationary_from(&gen, &ops, &rho0, spec.t_final)?;
        let edge = edge_population(&result.state, &gen.spectrum);
        match max_mo {
            Some(limit) if edge > TRUNCATION_TOLERANCE && spec.m_o + 4 <= limit => spec.m_o += 4,
            _ => {
                return Ok(Solution { spec, generators: gen, energy_ops: ops, result, edge_population: edge });
            }
        }
    }
}
