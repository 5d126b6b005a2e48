//! Exact dynamics of a Λ atom coupled to two quantized modes.
//!
//! The excitation numbers `N_a = a†a − S^{11} + 1` and `N_b = b†b − S^{22} + 1`
//! are conserved, so the interaction Hamiltonian is block diagonal over
//! subspaces `H^(N_a, N_b)` spanned by `|i; N_a − μ_i, N_b − ν_i⟩` with
//! `μ = (0, 1, 1)` and `ν = (1, 0, 1)`. Each block has dimension 3, or 1 on
//! the edges where some members would need a negative photon number.
//!
//! Everything here lives in the interaction picture: the free evolution
//! `exp(−i H_0 t)` commutes with the interaction and is dropped.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use statrs::function::factorial::ln_factorial;

use crate::eigen::{self, HermitianEigen};
use crate::error::{invalid, Error, Result};
use crate::levels::Level;

pub const MU: [u32; 3] = [0, 1, 1];
pub const NU: [u32; 3] = [1, 0, 1];

/// Default Poisson tail weight discarded per mode.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Tolerance on `Σ|c_i|² = 1`.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-12;

/// Full experiment configuration.
///
/// Detunings are `Δ_a = ω_31 − ω_a` and `Δ_b = ω_32 − ω_b`. Field coherent
/// states carry zero phase; any relative phase sits in the atomic amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub g_a: f64,
    pub g_b: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub nbar_a: f64,
    pub nbar_b: f64,
    /// Initial atomic amplitudes `c_1, c_2, c_3`.
    pub c: [C64; 3],
    pub epsilon: f64,
}

impl SystemParams {
    /// Resonant, equal-coupling configuration.
    pub fn resonant(g: f64, nbar_a: f64, nbar_b: f64, c: [C64; 3]) -> Self {
        SystemParams {
            g_a: g,
            g_b: g,
            delta_a: 0.0,
            delta_b: 0.0,
            nbar_a,
            nbar_b,
            c,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// Atom in a single level.
    pub fn ground(level: Level) -> [C64; 3] {
        let mut c = [C64::new(0.0, 0.0); 3];
        c[level.index()] = C64::new(1.0, 0.0);
        c
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |field: &'static str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, "must be finite"))
            }
        };
        finite("g_a", self.g_a)?;
        finite("g_b", self.g_b)?;
        finite("delta_a", self.delta_a)?;
        finite("delta_b", self.delta_b)?;
        finite("nbar_a", self.nbar_a)?;
        finite("nbar_b", self.nbar_b)?;
        if self.g_a < 0.0 {
            return Err(invalid("g_a", "must be non-negative"));
        }
        if self.g_b < 0.0 {
            return Err(invalid("g_b", "must be non-negative"));
        }
        if self.nbar_a < 0.0 {
            return Err(invalid("nbar_a", "must be non-negative"));
        }
        if self.nbar_b < 0.0 {
            return Err(invalid("nbar_b", "must be non-negative"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must lie in (0, 1)"));
        }
        let norm: f64 = self.c.iter().map(|z| z.norm_sqr()).sum();
        if !((norm - 1.0).abs() <= AMPLITUDE_NORM_TOL) {
            return Err(invalid("c", format!("squared amplitudes sum to {norm}, not 1")));
        }
        Ok(())
    }

    fn diagonal(&self, level: Level) -> f64 {
        match level {
            Level::One => -self.delta_a,
            Level::Two => -self.delta_b,
            Level::Three => 0.0,
        }
    }
}

/// Conserved excitation pair `(N_a, N_b)`; ordered lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubspaceIndex {
    pub n_a: u32,
    pub n_b: u32,
}

impl SubspaceIndex {
    pub fn new(n_a: u32, n_b: u32) -> Self {
        SubspaceIndex { n_a, n_b }
    }
}

/// Atom-field product state `|level; n_a, n_b⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisMember {
    pub level: Level,
    pub n_a: u32,
    pub n_b: u32,
}

impl BasisMember {
    /// Excitation pair this member belongs to.
    pub fn subspace(&self) -> SubspaceIndex {
        let i = self.level.index();
        SubspaceIndex::new(self.n_a + MU[i], self.n_b + NU[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    pub index: SubspaceIndex,
    /// Surviving members, ordered by atomic level.
    pub members: Vec<BasisMember>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Position of the member with the given atomic level, if it survived.
    pub fn position(&self, level: Level) -> Option<usize> {
        self.members.iter().position(|m| m.level == level)
    }
}

/// Members `|i; N_a − μ_i, N_b − ν_i⟩` with non-negative photon numbers.
pub fn subspace_basis(index: SubspaceIndex) -> SubspaceBasis {
    let members = Level::ALL
        .iter()
        .filter_map(|&level| {
            let i = level.index();
            Some(BasisMember {
                level,
                n_a: index.n_a.checked_sub(MU[i])?,
                n_b: index.n_b.checked_sub(NU[i])?,
            })
        })
        .collect();
    SubspaceBasis { index, members }
}

/// A dense operator restricted to one invariant subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    pub index: SubspaceIndex,
    pub matrix: DMatrix<C64>,
}

impl BlockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Max-entry distance of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let g = self.matrix.adjoint() * &self.matrix;
        let id = DMatrix::<C64>::identity(n, n);
        (g - id).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }
}

/// Interaction Hamiltonian restricted to one subspace, in level order:
///
/// ```text
/// ⎡ −Δ_a      0         g_a√N_a ⎤
/// ⎢  0       −Δ_b       g_b√N_b ⎥
/// ⎣ g_a√N_a   g_b√N_b   0       ⎦
/// ```
///
/// Edge subspaces keep only the rows and columns of surviving members.
pub fn block_hamiltonian(params: &SystemParams, basis: &SubspaceBasis) -> Result<BlockOperator> {
    if basis.is_empty() {
        return Err(Error::EmptySubspace {
            n_a: basis.index.n_a,
            n_b: basis.index.n_b,
        });
    }
    let ga = params.g_a * f64::from(basis.index.n_a).sqrt();
    let gb = params.g_b * f64::from(basis.index.n_b).sqrt();
    let coupling = |x: Level, y: Level| match (x, y) {
        (Level::One, Level::Three) | (Level::Three, Level::One) => ga,
        (Level::Two, Level::Three) | (Level::Three, Level::Two) => gb,
        _ => 0.0,
    };
    let n = basis.dim();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let (x, y) = (basis.members[i].level, basis.members[j].level);
        let v = if i == j { params.diagonal(x) } else { coupling(x, y) };
        C64::new(v, 0.0)
    });
    Ok(BlockOperator {
        index: basis.index,
        matrix,
    })
}

/// Spectral form of one block's evolution, reusable for any time.
#[derive(Clone, Debug)]
pub struct BlockPropagator {
    pub index: SubspaceIndex,
    pub eigen: HermitianEigen,
}

impl BlockPropagator {
    pub fn new(h: &BlockOperator) -> Result<Self> {
        Ok(BlockPropagator {
            index: h.index,
            eigen: eigen::eigh(&h.matrix)?,
        })
    }

    /// `U(t) = V e^{−iΛt} V†`.
    pub fn evolution(&self, t: f64) -> BlockOperator {
        BlockOperator {
            index: self.index,
            matrix: self.eigen.map(|lam| C64::from_polar(1.0, -lam * t)),
        }
    }

    /// `U(t) v` without forming `U`.
    pub fn apply(&self, t: f64, v: &[C64]) -> Vec<C64> {
        let vecs = &self.eigen.vectors;
        let n = self.eigen.dim();
        let coeffs: Vec<C64> = (0..n)
            .map(|k| {
                let proj: C64 = (0..n).map(|i| vecs[(i, k)].conj() * v[i]).sum();
                proj * C64::from_polar(1.0, -self.eigen.values[k] * t)
            })
            .collect();
        (0..n)
            .map(|i| (0..n).map(|k| vecs[(i, k)] * coeffs[k]).sum())
            .collect()
    }
}

/// `exp(−i H t)` for one block.
pub fn block_evolution(h: &BlockOperator, t: f64) -> Result<BlockOperator> {
    Ok(BlockPropagator::new(h)?.evolution(t))
}

/// Coherent-state amplitude `Q_n = √(e^{−n̄} n̄ⁿ / n!)`, evaluated in log space.
pub fn poisson_weight(nbar: f64, n: u64) -> Result<f64> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(invalid("nbar", "must be finite and non-negative"));
    }
    Ok(q_weight(nbar, n))
}

fn q_weight(nbar: f64, n: u64) -> f64 {
    if nbar == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let log_p = -nbar + n as f64 * nbar.ln() - ln_factorial(n);
    (0.5 * log_p).exp()
}

/// Smallest `N` with `Σ_{n ≤ N} Q_n² ≥ 1 − ε`.
pub fn truncation_cutoff(nbar: f64, epsilon: f64) -> Result<u64> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(invalid("nbar", "must be finite and non-negative"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", "must lie in (0, 1)"));
    }
    let target = 1.0 - epsilon;
    let mut total = 0.0;
    let mut n = 0u64;
    loop {
        total += q_weight(nbar, n).powi(2);
        if total >= target {
            return Ok(n);
        }
        // past the mode the remaining terms fall off geometrically; rounding
        // can leave `total` a few ulps short of an extreme target
        if n as f64 > nbar && q_weight(nbar, n) == 0.0 {
            return Ok(n);
        }
        n += 1;
    }
}

/// Global wavefunction: amplitude vectors per subspace, in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub time: f64,
    amplitudes: BTreeMap<SubspaceIndex, Vec<C64>>,
}

impl SystemState {
    /// Wraps per-subspace amplitudes, checking each vector against its basis.
    pub fn from_amplitudes(time: f64, amplitudes: BTreeMap<SubspaceIndex, Vec<C64>>) -> Result<Self> {
        for (idx, v) in &amplitudes {
            let dim = subspace_basis(*idx).dim();
            if dim == 0 {
                return Err(Error::EmptySubspace { n_a: idx.n_a, n_b: idx.n_b });
            }
            if v.len() != dim {
                return Err(invalid("amplitudes", format!("subspace {idx:?} needs {dim} entries, got {}", v.len())));
            }
        }
        Ok(SystemState { time, amplitudes })
    }

    pub fn amplitudes(&self) -> &BTreeMap<SubspaceIndex, Vec<C64>> {
        &self.amplitudes
    }

    pub fn subspace(&self, index: SubspaceIndex) -> Option<&[C64]> {
        self.amplitudes.get(&index).map(Vec::as_slice)
    }

    /// Amplitude of one product state (zero if its subspace is unpopulated).
    pub fn amplitude(&self, member: BasisMember) -> C64 {
        let idx = member.subspace();
        self.amplitudes
            .get(&idx)
            .and_then(|v| subspace_basis(idx).position(member.level).map(|p| v[p]))
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes
            .values()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn subspace_weights(&self) -> BTreeMap<SubspaceIndex, f64> {
        self.amplitudes
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|z| z.norm_sqr()).sum()))
            .collect()
    }

    pub fn level_populations(&self) -> [f64; 3] {
        let mut pops = [0.0; 3];
        for (idx, v) in &self.amplitudes {
            for (m, z) in subspace_basis(*idx).members.iter().zip(v) {
                pops[m.level.index()] += z.norm_sqr();
            }
        }
        pops
    }
}

/// Photon-number cutoffs per mode from the Poisson tail threshold.
pub fn photon_cutoffs(params: &SystemParams) -> Result<(u64, u64)> {
    Ok((
        truncation_cutoff(params.nbar_a, params.epsilon)?,
        truncation_cutoff(params.nbar_b, params.epsilon)?,
    ))
}

/// Product of the atomic superposition and the two-mode coherent state,
/// truncated at the Poisson cutoffs and renormalized.
pub fn initial_state(params: &SystemParams) -> Result<SystemState> {
    params.validate()?;
    let (cut_a, cut_b) = photon_cutoffs(params)?;
    initial_state_with_cutoffs(params, cut_a, cut_b)
}

/// As [`initial_state`] with explicit maximum photon numbers per mode.
pub fn initial_state_with_cutoffs(params: &SystemParams, cut_a: u64, cut_b: u64) -> Result<SystemState> {
    params.validate()?;
    let qa: Vec<f64> = (0..=cut_a).map(|n| q_weight(params.nbar_a, n)).collect();
    let qb: Vec<f64> = (0..=cut_b).map(|n| q_weight(params.nbar_b, n)).collect();
    let q = |table: &[f64], n: u32| table.get(n as usize).copied().unwrap_or(0.0);

    let max_a = u32::try_from(cut_a + 1).map_err(|_| invalid("nbar_a", "cutoff too large"))?;
    let max_b = u32::try_from(cut_b + 1).map_err(|_| invalid("nbar_b", "cutoff too large"))?;
    let mut amplitudes = BTreeMap::new();
    for n_a in 0..=max_a {
        for n_b in 0..=max_b {
            let basis = subspace_basis(SubspaceIndex::new(n_a, n_b));
            let v: Vec<C64> = basis
                .members
                .iter()
                .map(|m| params.c[m.level.index()] * q(&qa, m.n_a) * q(&qb, m.n_b))
                .collect();
            if v.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                amplitudes.insert(basis.index, v);
            }
        }
    }
    let mut state = SystemState { time: 0.0, amplitudes };
    let norm = state.norm();
    if !(norm > 0.0) {
        return Err(Error::NotNormalized(norm));
    }
    for v in state.amplitudes.values_mut() {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    Ok(state)
}

fn propagate(state: &SystemState, params: &SystemParams, t: f64) -> Result<SystemState> {
    let evolved: Vec<(SubspaceIndex, Vec<C64>)> = state
        .amplitudes
        .par_iter()
        .map(|(idx, v)| {
            let h = block_hamiltonian(params, &subspace_basis(*idx))?;
            Ok((*idx, BlockPropagator::new(&h)?.apply(t, v)))
        })
        .collect::<Result<_>>()?;
    Ok(SystemState {
        time: state.time + t,
        amplitudes: evolved.into_iter().collect(),
    })
}

/// Evolves every populated subspace forward by `t ≥ 0`.
pub fn evolve(state: &SystemState, params: &SystemParams, t: f64) -> Result<SystemState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("t", "must be finite and non-negative"));
    }
    propagate(state, params, t)
}

/// Applies `U(t)† = U(−t)`, undoing [`evolve`] by the same `t`.
pub fn evolve_backward(state: &SystemState, params: &SystemParams, t: f64) -> Result<SystemState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("t", "must be finite and non-negative"));
    }
    propagate(state, params, -t)
}

pub fn level_populations(state: &SystemState) -> [f64; 3] {
    state.level_populations()
}
