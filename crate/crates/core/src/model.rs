//! Truncated exciton–phonon Hilbert space, the anharmonic Jaynes–Cummings
//! Hamiltonian, its spectrum, the driving operators, and the thermal
//! reference state.
//!
//! Basis states `|i, m⟩` (exciton level `i ∈ {1, 2}`, phonon mode `m`) are
//! enumerated phonon-major with the exciton index fastest: flat index
//! `2·m + (i − 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ONE, ZERO};
use crate::state::DensityMatrix;
use crate::units;

/// Default propagation horizon, 8.27 ps expressed in eV⁻¹.
pub const DEFAULT_HORIZON_PS: f64 = 8.27;

/// Maximum tolerated `‖H − H†‖_max` before diagonalization refuses.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    /// Exciton level, 1 or 2.
    pub level: u8,
    /// Phonon mode index.
    pub mode: usize,
}

impl BasisState {
    pub fn new(level: u8, mode: usize) -> Self {
        debug_assert!(level == 1 || level == 2);
        Self { level, mode }
    }

    pub fn index(self) -> usize {
        2 * self.mode + (self.level as usize - 1)
    }

    pub fn from_index(index: usize) -> Self {
        Self { level: (index % 2) as u8 + 1, mode: index / 2 }
    }
}

/// All physical and numerical parameters of one simulation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonSpec {
    pub eps1: f64,
    pub eps2: f64,
    pub omega: f64,
    pub chi: f64,
    pub coupling: Complex64,
    pub omega_drive: f64,
    pub a_x: f64,
    pub a_p: f64,
    pub gamma_x: f64,
    pub gamma_p: f64,
    pub t_env: f64,
    pub m_o: usize,
    /// Propagation horizon in eV⁻¹.
    pub t_final: f64,
    /// Driving-generator linewidth; `None` means (Γ_X + Γ_P)/2.
    pub eta: Option<f64>,
    /// Subtract ωχ/4 from every phonon level so that `m = 0` sits at zero.
    pub zero_point_shift: bool,
    /// Build the driving generators from A_X·X̂ + A_P·P̂ jointly.
    pub cross_terms: bool,
}

impl Default for PolaritonSpec {
    /// The harmonic, resonant configuration with exciton-only driving used
    /// as the baseline throughout the figure presets.
    fn default() -> Self {
        Self {
            eps1: 0.0,
            eps2: 1.0,
            omega: 1.0,
            chi: 0.0,
            coupling: c(2.0),
            omega_drive: 1.0,
            a_x: 0.1,
            a_p: 0.0,
            gamma_x: 0.2,
            gamma_p: 0.4,
            t_env: 300.0,
            m_o: 8,
            t_final: units::ps_to_inv_ev(DEFAULT_HORIZON_PS),
            eta: None,
            zero_point_shift: false,
            cross_terms: false,
        }
    }
}

impl PolaritonSpec {
    pub fn dim(&self) -> usize {
        2 * self.m_o
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(0.5 * (self.gamma_x + self.gamma_p))
    }

    pub fn beta(&self) -> f64 {
        units::beta(self.t_env)
    }

    /// Driving period τ = 2π/ω′.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega_drive
    }

    pub fn with_coupling(mut self, v: f64) -> Self {
        self.coupling = c(v);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("omega", self.omega),
            ("chi", self.chi),
            ("V", self.coupling.re),
            ("V", self.coupling.im),
            ("omega_drive", self.omega_drive),
            ("A_X", self.a_x),
            ("A_P", self.a_p),
            ("Gamma_X", self.gamma_x),
            ("Gamma_P", self.gamma_p),
            ("T_env_K", self.t_env),
            ("horizon", self.t_final),
        ];
        for (key, value) in finite {
            if !value.is_finite() {
                return Err(Error::param(key, "must be finite"));
            }
        }
        let positive = [
            ("omega", self.omega),
            ("omega_drive", self.omega_drive),
            ("T_env_K", self.t_env),
            ("horizon", self.t_final),
        ];
        for (key, value) in positive {
            if value <= 0.0 {
                return Err(Error::param(key, format!("must be > 0, got {value}")));
            }
        }
        let non_negative = [
            ("A_X", self.a_x),
            ("A_P", self.a_p),
            ("Gamma_X", self.gamma_x),
            ("Gamma_P", self.gamma_p),
        ];
        for (key, value) in non_negative {
            if value < 0.0 {
                return Err(Error::param(key, format!("must be ≥ 0, got {value}")));
            }
        }
        if self.m_o < 2 {
            return Err(Error::param("m_o", format!("must be ≥ 2, got {}", self.m_o)));
        }
        let eta = self.eta();
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("must be > 0, got {eta}")));
        }
        Ok(())
    }
}

/// ⟨m|H_pho|m⟩ = ωm + ωχ(m + ½)² for m = 0 … m_o − 1.
pub fn phonon_diagonal(omega: f64, chi: f64, m_o: usize) -> Vec<f64> {
    (0..m_o)
        .map(|m| {
            let m = m as f64;
            omega * m + omega * chi * (m + 0.5) * (m + 0.5)
        })
        .collect()
}

fn phonon_levels(spec: &PolaritonSpec) -> Vec<f64> {
    let shift = if spec.zero_point_shift { 0.25 * spec.omega * spec.chi } else { 0.0 };
    phonon_diagonal(spec.omega, spec.chi, spec.m_o).into_iter().map(|e| e - shift).collect()
}

/// System Hamiltonian in the flat product basis.
pub fn build_hamiltonian(spec: &PolaritonSpec) -> Result<CMat> {
    if spec.m_o < 2 {
        return Err(Error::param("m_o", "interaction needs at least two phonon modes"));
    }
    let n = spec.dim();
    let pho = phonon_levels(spec);
    let mut h = CMat::zeros(n, n);
    for m in 0..spec.m_o {
        h[(BasisState::new(1, m).index(), BasisState::new(1, m).index())] = c(spec.eps1 + pho[m]);
        h[(BasisState::new(2, m).index(), BasisState::new(2, m).index())] = c(spec.eps2 + pho[m]);
    }
    // V d₂†d₁a : |1, m+1⟩ → |2, m⟩
    for m in 0..spec.m_o - 1 {
        let upper = BasisState::new(2, m).index();
        let lower = BasisState::new(1, m + 1).index();
        h[(upper, lower)] = spec.coupling;
        h[(lower, upper)] = spec.coupling.conj();
    }
    Ok(h)
}

/// Closed-form doublet energies (λ₋, λ₊) of the block {|2,m⟩, |1,m+1⟩}.
///
/// The χ-dependent terms carry the signs implied by the phonon levels of
/// [`phonon_diagonal`]; with the opposite signs the formula disagrees with
/// direct diagonalization at any χ ≠ 0.
pub fn analytic_eigenvalues(spec: &PolaritonSpec, m: usize) -> (f64, f64) {
    let (w, chi) = (spec.omega, spec.chi);
    let mf = m as f64;
    let shift = if spec.zero_point_shift { 0.25 * w * chi } else { 0.0 };
    let detuning = 0.5 * (spec.eps2 - spec.eps1 - w) - w * chi * (1.0 + mf);
    let delta = (spec.coupling.norm_sqr() + detuning * detuning).sqrt();
    let centre = 0.5 * (spec.eps2 + spec.eps1) + w * (0.5 + mf) + w * chi * (1.25 + mf * (mf + 2.0))
        - shift;
    (centre - delta, centre + delta)
}

/// Branch of a hybrid doublet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Lower,
    Upper,
}

/// Eigenvalues and eigenvectors of a Hermitian matrix with basis bookkeeping.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending eigenvalues λ_α.
    pub energies: Vec<f64>,
    /// Columns are eigenvectors expressed in the product basis.
    pub vectors: CMat,
    /// `(branch, m)` for members of a two-state {|2,m⟩, |1,m+1⟩} block.
    pub branches: Vec<Option<(Branch, usize)>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Transforms a product-basis operator into the eigenbasis.
    pub fn to_eigenbasis(&self, op: &CMat) -> CMat {
        linalg::conjugate_by(&self.vectors, op)
    }

    /// Transforms an eigenbasis operator back to the product basis.
    pub fn to_product_basis(&self, op: &CMat) -> CMat {
        linalg::matmul(&self.vectors, &linalg::matmul(op, &self.vectors.adjoint()))
    }

    pub fn diagonal_matrix(&self) -> CMat {
        CMat::from_fn(self.dim(), self.dim(), |i, j| if i == j { c(self.energies[i]) } else { ZERO })
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.first().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition.
///
/// The matrix is split into the connected components of its sparsity graph
/// and each block is diagonalized on its own, so eigenvectors never mix
/// states from different invariant blocks even at exact degeneracies.
/// Order is ascending in energy; exact ties go to the eigenvector whose
/// largest-magnitude component has the lower index. Each eigenvector is
/// phased so that this component is real and positive.
pub fn diagonalize(h: &CMat) -> Result<Spectrum> {
    let defect = linalg::hermiticity_defect(h);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let n = h.nrows();
    let blocks = connected_blocks(h);
    let mut pairs: Vec<(f64, usize, Vec<Complex64>)> = Vec::with_capacity(n);
    for block in &blocks {
        let sub = CMat::from_fn(block.len(), block.len(), |i, j| h[(block[i], block[j])]);
        let (vals, vecs) = linalg::eigh(&sub);
        for (k, &val) in vals.iter().enumerate() {
            let mut full = vec![ZERO; n];
            for (local, &global) in block.iter().enumerate() {
                full[global] = vecs[(local, k)];
            }
            let lead = leading_component(&full);
            let phase = full[lead].conj() / full[lead].norm();
            for z in &mut full {
                *z *= phase;
            }
            pairs.push((val, lead, full));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let energies: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let vectors = CMat::from_fn(n, n, |i, k| pairs[k].2[i]);
    let branches = label_branches(&pairs, n);
    Ok(Spectrum { energies, vectors, branches })
}

fn leading_component(v: &[Complex64]) -> usize {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    best
}

fn connected_blocks(h: &CMat) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut block = vec![start];
        seen[start] = true;
        let mut cursor = 0;
        while cursor < block.len() {
            let i = block[cursor];
            for j in 0..n {
                if !seen[j] && (h[(i, j)] != ZERO || h[(j, i)] != ZERO) {
                    seen[j] = true;
                    block.push(j);
                }
            }
            cursor += 1;
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

fn label_branches(pairs: &[(f64, usize, Vec<Complex64>)], n: usize) -> Vec<Option<(Branch, usize)>> {
    let support = |v: &[Complex64]| -> Vec<usize> {
        (0..n).filter(|&i| v[i].norm() > 1e-12).collect::<Vec<_>>()
    };
    let doublet_of = |s: &[usize]| -> Option<usize> {
        match s {
            [a, b] => {
                let (x, y) = (BasisState::from_index(*a), BasisState::from_index(*b));
                (x.level == 2 && y.level == 1 && y.mode == x.mode + 1).then_some(x.mode)
            }
            _ => None,
        }
    };
    let mut labels = vec![None; pairs.len()];
    let mut first_seen: Vec<Option<usize>> = vec![None; n];
    for (k, p) in pairs.iter().enumerate() {
        if let Some(m) = doublet_of(&support(&p.2)) {
            labels[k] = Some(if first_seen[m].is_none() {
                first_seen[m] = Some(k);
                (Branch::Lower, m)
            } else {
                (Branch::Upper, m)
            });
        }
    }
    labels
}

/// Exciton-flip X̂ and phonon-ladder P̂ in the product basis.
pub fn driving_operators(m_o: usize) -> (CMat, CMat) {
    let n = 2 * m_o;
    let mut x = CMat::zeros(n, n);
    let mut p = CMat::zeros(n, n);
    for m in 0..m_o {
        let (a, b) = (BasisState::new(1, m).index(), BasisState::new(2, m).index());
        x[(a, b)] = ONE;
        x[(b, a)] = ONE;
    }
    for level in [1u8, 2] {
        for m in 0..m_o.saturating_sub(1) {
            let (a, b) = (BasisState::new(level, m).index(), BasisState::new(level, m + 1).index());
            p[(a, b)] = ONE;
            p[(b, a)] = ONE;
        }
    }
    (x, p)
}

/// d₁†d₂ = Σ_m |1,m⟩⟨2,m|, the exciton relaxation operator.
pub fn exciton_lowering(m_o: usize) -> CMat {
    let mut j = CMat::zeros(2 * m_o, 2 * m_o);
    for m in 0..m_o {
        j[(BasisState::new(1, m).index(), BasisState::new(2, m).index())] = ONE;
    }
    j
}

/// a = Σ_{i,m} |i,m⟩⟨i,m+1|, the truncated phonon lowering operator.
pub fn phonon_lowering(m_o: usize) -> CMat {
    let mut j = CMat::zeros(2 * m_o, 2 * m_o);
    for level in [1u8, 2] {
        for m in 0..m_o - 1 {
            j[(BasisState::new(level, m).index(), BasisState::new(level, m + 1).index())] = ONE;
        }
    }
    j
}

/// Product-basis operators whose expectations make up ⟨H_S⟩.
#[derive(Debug, Clone)]
pub struct EnergyOperators {
    /// ε₁ d₁†d₁
    pub lower_exciton: CMat,
    /// ε₂ d₂†d₂
    pub upper_exciton: CMat,
    /// H_pho(ω, χ)
    pub phonon: CMat,
    /// V d₂†d₁a + V* a†d₁†d₂
    pub interaction: CMat,
}

impl EnergyOperators {
    pub fn new(spec: &PolaritonSpec) -> Self {
        let n = spec.dim();
        let pho = phonon_levels(spec);
        let mut lower_exciton = CMat::zeros(n, n);
        let mut upper_exciton = CMat::zeros(n, n);
        let mut phonon = CMat::zeros(n, n);
        for m in 0..spec.m_o {
            let (one, two) = (BasisState::new(1, m).index(), BasisState::new(2, m).index());
            lower_exciton[(one, one)] = c(spec.eps1);
            upper_exciton[(two, two)] = c(spec.eps2);
            phonon[(one, one)] = c(pho[m]);
            phonon[(two, two)] = c(pho[m]);
        }
        let mut interaction = CMat::zeros(n, n);
        for m in 0..spec.m_o - 1 {
            let upper = BasisState::new(2, m).index();
            let lower = BasisState::new(1, m + 1).index();
            interaction[(upper, lower)] = spec.coupling;
            interaction[(lower, upper)] = spec.coupling.conj();
        }
        Self { lower_exciton, upper_exciton, phonon, interaction }
    }

    pub fn to_eigenbasis(&self, spectrum: &Spectrum) -> Self {
        Self {
            lower_exciton: spectrum.to_eigenbasis(&self.lower_exciton),
            upper_exciton: spectrum.to_eigenbasis(&self.upper_exciton),
            phonon: spectrum.to_eigenbasis(&self.phonon),
            interaction: spectrum.to_eigenbasis(&self.interaction),
        }
    }
}

/// Thermal state exp(−β H)/Z, diagonal in the eigenbasis.
pub fn gibbs_state(spectrum: &Spectrum, t_env: f64) -> DensityMatrix {
    let beta = units::beta(t_env);
    let ground = spectrum.ground_energy();
    let weights: Vec<f64> = spectrum.energies.iter().map(|&e| (-beta * (e - ground)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let n = spectrum.dim();
    let mut rho = CMat::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        rho[(k, k)] = c(w / z);
    }
    DensityMatrix::new(rho, 0.0)
}
