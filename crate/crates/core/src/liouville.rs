//! Superoperators of the time-local master equation
//!
//! ```text
//! dρ/dt = −(D + L_X + L_P + f₊(t)·A₊ + f₋(t)·A₋) ρ,   f_±(t) = 2cos(ω′t)e^{±iω′t}
//! ```
//!
//! All generators act on row-major vectorized density matrices in the
//! eigenbasis of H_S and are stored with the sign used above, i.e. the
//! physical generator is the negative of what is stored here.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, I, ZERO};
use crate::model::{self, PolaritonSpec, Spectrum};
use crate::units;

/// Gaps closer than this (eV) are treated as the same Bohr frequency.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// Jump-operator matrix elements below this are dropped.
const ELEMENT_CUTOFF: f64 = 1e-14;

/// Linear map on vectorized N × N matrices; element `(α, β)` sits at `α·N + β`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOp {
    n: usize,
    pub matrix: CMat,
}

impl SuperOp {
    pub fn zeros(n: usize) -> Self {
        Self { n, matrix: CMat::zeros(n * n, n * n) }
    }

    pub fn from_matrix(n: usize, matrix: CMat) -> Self {
        assert_eq!(matrix.shape(), (n * n, n * n), "superoperator must be N² × N²");
        Self { n, matrix }
    }

    /// Dimension N of the underlying Hilbert space.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        linalg::unvectorize(&linalg::matvec(&self.matrix, &linalg::vectorize(rho)), self.n)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == ZERO)
    }

    /// `max_col |Σ_α G[(α,α), col]|`: zero for a trace-annihilating generator.
    pub fn trace_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for col in 0..n * n {
            let s: Complex64 = (0..n).map(|a| self.matrix[(a * n + a, col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }

    /// The partner map ρ ↦ (G ρ†)†.
    pub fn hermitian_partner(&self) -> SuperOp {
        let n = self.n;
        let swap = |k: usize| (k % n) * n + k / n;
        let m = CMat::from_fn(n * n, n * n, |r, col| self.matrix[(swap(r), swap(col))].conj());
        SuperOp { n, matrix: m }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    pub fn scale(&self, s: Complex64) -> SuperOp {
        SuperOp { n: self.n, matrix: &self.matrix * s }
    }

    /// Row-major `[re, im]` pairs, the debugging dump format.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        self.matrix.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
    }
}

impl Add for &SuperOp {
    type Output = SuperOp;
    fn add(self, rhs: &SuperOp) -> SuperOp {
        assert_eq!(self.n, rhs.n);
        SuperOp { n: self.n, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Mul<Complex64> for &SuperOp {
    type Output = SuperOp;
    fn mul(self, rhs: Complex64) -> SuperOp {
        self.scale(rhs)
    }
}

/// Accumulates `ρ ↦ A ρ B` terms into a superoperator matrix.
struct SuperBuilder {
    n: usize,
    m: CMat,
}

impl SuperBuilder {
    fn new(n: usize) -> Self {
        Self { n, m: CMat::zeros(n * n, n * n) }
    }

    /// += s·(A ρ B)
    fn sandwich(&mut self, s: Complex64, a: &CMat, b: &CMat) {
        let n = self.n;
        for alpha in 0..n {
            for gamma in 0..n {
                let ag = a[(alpha, gamma)] * s;
                if ag == ZERO {
                    continue;
                }
                for beta in 0..n {
                    for delta in 0..n {
                        let bd = b[(delta, beta)];
                        if bd != ZERO {
                            self.m[(alpha * n + beta, gamma * n + delta)] += ag * bd;
                        }
                    }
                }
            }
        }
    }

    /// += s·(A ρ)
    fn left(&mut self, s: Complex64, a: &CMat) {
        let n = self.n;
        for alpha in 0..n {
            for gamma in 0..n {
                let v = a[(alpha, gamma)] * s;
                if v != ZERO {
                    for beta in 0..n {
                        self.m[(alpha * n + beta, gamma * n + beta)] += v;
                    }
                }
            }
        }
    }

    /// += s·(ρ B)
    fn right(&mut self, s: Complex64, b: &CMat) {
        let n = self.n;
        for delta in 0..n {
            for beta in 0..n {
                let v = b[(delta, beta)] * s;
                if v != ZERO {
                    for alpha in 0..n {
                        self.m[(alpha * n + beta, alpha * n + delta)] += v;
                    }
                }
            }
        }
    }

    fn finish(self) -> SuperOp {
        SuperOp { n: self.n, matrix: self.m }
    }
}

/// Free evolution: diagonal entries −i(λ_α − λ_β).
pub fn free_evolution(spectrum: &Spectrum) -> SuperOp {
    let n = spectrum.dim();
    let mut op = SuperOp::zeros(n);
    for a in 0..n {
        for b in 0..n {
            op.matrix[(a * n + b, a * n + b)] = -I * (spectrum.energies[a] - spectrum.energies[b]);
        }
    }
    op
}

/// One Bohr-frequency component of a jump operator in the eigenbasis.
#[derive(Debug, Clone)]
struct Component {
    /// Energy released by the transition, λ_source − λ_target.
    gap: f64,
    /// `(target, source, amplitude)`.
    elements: Vec<(usize, usize, Complex64)>,
}

fn bohr_components(spectrum: &Spectrum, jump_eigen: &CMat) -> Vec<Component> {
    let n = spectrum.dim();
    let mut elements: Vec<(f64, usize, usize, Complex64)> = Vec::new();
    for target in 0..n {
        for source in 0..n {
            let v = jump_eigen[(target, source)];
            if v.norm() > ELEMENT_CUTOFF {
                let gap = spectrum.energies[source] - spectrum.energies[target];
                elements.push((gap, target, source, v));
            }
        }
    }
    elements.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut components: Vec<Component> = Vec::new();
    let mut last_gap = f64::NEG_INFINITY;
    for (gap, t, s, v) in elements {
        match components.last_mut() {
            Some(comp) if gap - last_gap < GAP_TOLERANCE => comp.elements.push((t, s, v)),
            _ => components.push(Component { gap, elements: vec![(t, s, v)] }),
        }
        last_gap = gap;
    }
    for comp in &mut components {
        let len = comp.elements.len() as f64;
        comp.gap = comp
            .elements
            .iter()
            .map(|&(t, s, _)| spectrum.energies[s] - spectrum.energies[t])
            .sum::<f64>()
            / len;
    }
    components
}

/// Adds `rate·(GρG† − ½{G†G, ρ})` with the physical sign; returns G†G·rate.
fn add_lindblad(builder: &mut SuperBuilder, k: &mut CMat, rate: f64, elements: &[(usize, usize, Complex64)]) {
    if rate == 0.0 {
        return;
    }
    let n = builder.n;
    for &(a, g, v1) in elements {
        for &(b, d, v2) in elements {
            builder.m[(a * n + b, g * n + d)] += c(rate) * v1 * v2.conj();
        }
    }
    for &(t1, s1, v1) in elements {
        for &(t2, s2, v2) in elements {
            if t1 == t2 {
                k[(s1, s2)] += c(rate) * v1.conj() * v2;
            }
        }
    }
}

/// Secular thermal relaxation generator for one bath.
///
/// The jump operator (product basis) is split by Bohr frequency in the
/// eigenbasis of `spectrum`; components with gaps equal within
/// [`GAP_TOLERANCE`] are merged. An energy-lowering component with gap Δ
/// relaxes at Γ(1 + n_B(Δ)) and its adjoint excites at Γ·n_B(Δ); an
/// energy-raising component takes the upward rate and its adjoint the
/// downward one. Zero-gap components carry no rate.
pub fn dissipator(spectrum: &Spectrum, jump: &CMat, gamma: f64, t_env: f64) -> Result<SuperOp> {
    if !(gamma >= 0.0) {
        return Err(Error::param("Gamma", format!("damping rate must be ≥ 0, got {gamma}")));
    }
    if !(t_env > 0.0) {
        return Err(Error::param("T_env_K", format!("temperature must be > 0, got {t_env}")));
    }
    let n = spectrum.dim();
    if gamma == 0.0 {
        return Ok(SuperOp::zeros(n));
    }
    let beta = units::beta(t_env);
    let j = spectrum.to_eigenbasis(jump);
    let mut builder = SuperBuilder::new(n);
    let mut k = CMat::zeros(n, n);
    for comp in bohr_components(spectrum, &j) {
        if comp.gap.abs() < GAP_TOLERANCE {
            continue;
        }
        let occupation = units::bose(beta, comp.gap.abs());
        let (down, up) = (gamma * (1.0 + occupation), gamma * occupation);
        let (own, partner) = if comp.gap > 0.0 { (down, up) } else { (up, down) };
        let adjoint: Vec<_> = comp.elements.iter().map(|&(t, s, v)| (s, t, v.conj())).collect();
        add_lindblad(&mut builder, &mut k, own, &comp.elements);
        add_lindblad(&mut builder, &mut k, partner, &adjoint);
    }
    builder.left(c(-0.5), &k);
    builder.right(c(-0.5), &k);
    // stored with the opposite sign of the physical generator
    let mut op = builder.finish();
    op.matrix.neg_mut();
    Ok(op)
}

/// Filtered operator F(σ)_αβ = V_αβ / (η − i(λ_α − λ_β − σω′)).
///
/// The sign of the imaginary part matches the free-evolution entries
/// −i(λ_α − λ_β): both describe coherences rotating as e^{+i(λ_α−λ_β)t}.
/// The opposite choice mixes two time orientations and drives states
/// visibly non-positive near the polariton resonances.
fn filtered(spectrum: &Spectrum, v_eigen: &CMat, sigma: f64, omega_drive: f64, eta: f64) -> CMat {
    let n = spectrum.dim();
    CMat::from_fn(n, n, |a, b| {
        let v = v_eigen[(a, b)];
        if v == ZERO {
            return ZERO;
        }
        let gap = spectrum.energies[a] - spectrum.energies[b] - sigma * omega_drive;
        v / Complex64::new(eta, -gap)
    })
}

/// `ρ ↦ [outer, F(σ)ρ − ρF(−σ)†]` with F built from `inner`, both already
/// in the eigenbasis.
fn filtered_double_commutator(
    spectrum: &Spectrum,
    outer: &CMat,
    inner: &CMat,
    sigma: f64,
    omega_drive: f64,
    eta: f64,
) -> SuperOp {
    let n = spectrum.dim();
    let f = filtered(spectrum, inner, sigma, omega_drive, eta);
    let g = filtered(spectrum, inner, -sigma, omega_drive, eta).adjoint();
    let mut builder = SuperBuilder::new(n);
    builder.left(linalg::ONE, &linalg::matmul(outer, &f));
    builder.sandwich(c(-1.0), outer, &g);
    builder.sandwich(c(-1.0), &f, outer);
    builder.right(linalg::ONE, &linalg::matmul(&g, outer));
    builder.finish()
}

fn check_driving_inputs(v: &CMat, eta: f64) -> Result<()> {
    let defect = linalg::hermiticity_defect(v);
    if defect > model::HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    if !(eta > 0.0) {
        return Err(Error::param("eta", format!("must be > 0, got {eta}")));
    }
    Ok(())
}

/// Second-order driving generators (A₊, A₋) for the Hermitian driving
/// operator `v_d` (product basis).
pub fn driving_generators(
    spectrum: &Spectrum,
    v_d: &CMat,
    omega_drive: f64,
    eta: f64,
) -> Result<(SuperOp, SuperOp)> {
    split_driving_generators(spectrum, v_d, v_d, omega_drive, eta)
}

/// Driving generators whose outer commutator uses `outer` while the
/// filtered operator is built from `inner`. With `outer = inner` this is
/// [`driving_generators`]; summing over a decomposition of `outer`
/// reproduces the joint generators.
pub fn split_driving_generators(
    spectrum: &Spectrum,
    outer: &CMat,
    inner: &CMat,
    omega_drive: f64,
    eta: f64,
) -> Result<(SuperOp, SuperOp)> {
    check_driving_inputs(outer, eta)?;
    check_driving_inputs(inner, eta)?;
    let n = spectrum.dim();
    if linalg::max_abs(outer) == 0.0 || linalg::max_abs(inner) == 0.0 {
        return Ok((SuperOp::zeros(n), SuperOp::zeros(n)));
    }
    let outer = spectrum.to_eigenbasis(outer);
    let inner = spectrum.to_eigenbasis(inner);
    let plus = filtered_double_commutator(spectrum, &outer, &inner, 1.0, omega_drive, eta);
    let minus = filtered_double_commutator(spectrum, &outer, &inner, -1.0, omega_drive, eta);
    Ok((plus, minus))
}

/// Whether driving generators were built per channel or jointly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DrivingMode {
    Additive,
    Joint,
}

/// Pair of time-independent driving generators for one channel.
#[derive(Debug, Clone)]
pub struct DrivingPair {
    pub plus: SuperOp,
    pub minus: SuperOp,
}

impl DrivingPair {
    /// L_d(t) = f₊(t)·A₊ + f₋(t)·A₋
    pub fn at(&self, t: f64, omega_drive: f64) -> SuperOp {
        let (fp, fm) = drive_factors(t, omega_drive);
        &self.plus.scale(fp) + &self.minus.scale(fm)
    }
}

/// f_±(t) = 2cos(ω′t)e^{±iω′t}.
pub fn drive_factors(t: f64, omega_drive: f64) -> (Complex64, Complex64) {
    let phase = omega_drive * t;
    let amp = 2.0 * phase.cos();
    (Complex64::from_polar(amp, phase), Complex64::from_polar(amp, -phase))
}

/// All generators of one parameter point.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub spectrum: Spectrum,
    pub omega_drive: f64,
    pub mode: DrivingMode,
    pub free: SuperOp,
    pub relax_x: SuperOp,
    pub relax_p: SuperOp,
    pub drive_x: DrivingPair,
    pub drive_p: DrivingPair,
    /// D + L_X + L_P
    pub a_o: SuperOp,
    pub a_plus: SuperOp,
    pub a_minus: SuperOp,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Full generator at time t.
    pub fn at(&self, t: f64) -> SuperOp {
        let (fp, fm) = drive_factors(t, self.omega_drive);
        let mut m = self.a_o.matrix.clone();
        m += &self.a_plus.matrix * fp;
        m += &self.a_minus.matrix * fm;
        SuperOp::from_matrix(self.dim(), m)
    }

    /// A_o + A₊ + A₋, the generator averaged over one driving period.
    pub fn period_average(&self) -> SuperOp {
        let mut m = self.a_o.matrix.clone();
        m += &self.a_plus.matrix;
        m += &self.a_minus.matrix;
        SuperOp::from_matrix(self.dim(), m)
    }

    pub fn is_driven(&self) -> bool {
        !(self.a_plus.is_zero() && self.a_minus.is_zero())
    }
}

/// Builds every generator for `spec`.
pub fn assemble(spec: &PolaritonSpec) -> Result<GeneratorSet> {
    spec.validate()?;
    let h = model::build_hamiltonian(spec)?;
    let spectrum = model::diagonalize(&h)?;
    assemble_with_spectrum(spec, spectrum)
}

pub fn assemble_with_spectrum(spec: &PolaritonSpec, spectrum: Spectrum) -> Result<GeneratorSet> {
    let n = spectrum.dim();
    let free = free_evolution(&spectrum);
    let relax_x = dissipator(&spectrum, &model::exciton_lowering(spec.m_o), spec.gamma_x, spec.t_env)?;
    let relax_p = dissipator(&spectrum, &model::phonon_lowering(spec.m_o), spec.gamma_p, spec.t_env)?;

    let (x_op, p_op) = model::driving_operators(spec.m_o);
    let vx = x_op * c(spec.a_x);
    let vp = p_op * c(spec.a_p);
    let eta = spec.eta();
    let (mode, (xp, xm), (pp, pm)) = if spec.cross_terms {
        let joint = &vx + &vp;
        (
            DrivingMode::Joint,
            split_driving_generators(&spectrum, &vx, &joint, spec.omega_drive, eta)?,
            split_driving_generators(&spectrum, &vp, &joint, spec.omega_drive, eta)?,
        )
    } else {
        (
            DrivingMode::Additive,
            driving_generators(&spectrum, &vx, spec.omega_drive, eta)?,
            driving_generators(&spectrum, &vp, spec.omega_drive, eta)?,
        )
    };
    let a_o = &(&free + &relax_x) + &relax_p;
    let a_plus = &xp + &pp;
    let a_minus = &xm + &pm;
    debug_assert_eq!(a_o.dim(), n);
    Ok(GeneratorSet {
        spectrum,
        omega_drive: spec.omega_drive,
        mode,
        free,
        relax_x,
        relax_p,
        drive_x: DrivingPair { plus: xp, minus: xm },
        drive_p: DrivingPair { plus: pp, minus: pm },
        a_o,
        a_plus,
        a_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{diagonalize, gibbs_state};
    use nalgebra::DVector;

    fn two_level(gap: f64) -> Spectrum {
        diagonalize(&CMat::from_diagonal(&DVector::from_vec(vec![c(0.0), c(gap)]))).unwrap()
    }

    fn sigma_minus() -> CMat {
        let mut j = CMat::zeros(2, 2);
        j[(0, 1)] = linalg::ONE;
        j
    }

    #[test]
    fn free_evolution_degenerate_is_zero() {
        let s = diagonalize(&CMat::identity(3, 3)).unwrap();
        assert!(free_evolution(&s).is_zero());
    }

    #[test]
    fn free_evolution_two_level_entries() {
        let d = free_evolution(&two_level(1.0));
        assert_eq!(d.matrix[(1, 1)], Complex64::new(0.0, 1.0));
        assert_eq!(d.matrix[(2, 2)], Complex64::new(0.0, -1.0));
        assert_eq!(d.matrix[(0, 0)], ZERO);
        assert_eq!(d.matrix[(3, 3)], ZERO);
    }

    #[test]
    fn zero_rate_dissipator_vanishes() {
        assert!(dissipator(&two_level(1.0), &sigma_minus(), 0.0, 300.0).unwrap().is_zero());
        assert!(dissipator(&two_level(1.0), &sigma_minus(), -0.1, 300.0).is_err());
    }

    #[test]
    fn two_level_detailed_balance() {
        // Null space of the 2×2 population block against the closed-form Gibbs ratio.
        let s = two_level(1.0);
        let l = dissipator(&s, &sigma_minus(), 0.3, 300.0).unwrap();
        let down = l.matrix[(0, 3)].re.abs();
        let up = l.matrix[(3, 0)].re.abs();
        let excited = up / (up + down);
        let n_b = units::bose(units::beta(300.0), 1.0);
        assert!((excited - n_b / (1.0 + 2.0 * n_b)).abs() < 1e-30);
        let gibbs = gibbs_state(&s, 300.0);
        assert!(linalg::max_abs(&l.apply(gibbs.matrix())) < 1e-10);
        assert!(l.trace_defect() < 1e-15);
    }

    #[test]
    fn drive_factor_values() {
        let (p, m) = drive_factors(0.0, 1.0);
        assert_eq!(p, c(2.0));
        assert_eq!(m, c(2.0));
        let (p, _) = drive_factors(std::f64::consts::FRAC_PI_4, 1.0);
        assert!((p - Complex64::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_drive_gives_zero_generators() {
        let s = two_level(1.0);
        let (p, m) = driving_generators(&s, &CMat::zeros(2, 2), 1.0, 0.3).unwrap();
        assert!(p.is_zero() && m.is_zero());
    }

    #[test]
    fn driving_rejects_non_hermitian() {
        let s = two_level(1.0);
        assert!(matches!(
            driving_generators(&s, &sigma_minus(), 1.0, 0.3),
            Err(Error::NotHermitian { .. })
        ));
    }
}
