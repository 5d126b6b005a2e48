//! Atom-field relative phase.
//!
//! Inside each invariant subspace the deformed ladder operators
//! `X_+^{13} = a S_+^{13}` and `X_+^{23} = b S_+^{23}` admit a polar
//! decomposition whose unitary part `E_Φ` commutes with both excitation
//! numbers. Its eigenstates are built from the subspace members exactly as the
//! bare atomic phase states are built from levels: the spectator member for
//! phase `0` and `(|upper⟩ ∓ i|partner⟩)/√2` for `±π/2`.
//!
//! On edge subspaces some members do not exist. A labeled state keeps the
//! components whose members exist and is dropped only when none do. For
//! 1↔3 in `(0, N_b)` this leaves `±i|1; 0, N_b − 1⟩/√2`, half weight each, so the
//! three projectors still resolve the identity on every block and the
//! distributions sum to one. This is the same accounting as the closed-form
//! sums with `Q_n = 0` for `n < 0`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::dynamics::{
    block_evolution, block_hamiltonian, initial_state, subspace_basis, BlockOperator, SubspaceBasis,
    SubspaceIndex, SystemParams, SystemState, DEFAULT_EPSILON,
};
use crate::eigen;
use crate::error::{Error, Result};
use crate::levels::{Level, PhaseLabel, Transition};

/// One labeled phase state expressed in the subspace basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledState {
    pub label: PhaseLabel,
    pub vector: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelPhaseEigenstates {
    pub transition: Transition,
    pub basis: SubspaceBasis,
    pub states: Vec<LabeledState>,
}

impl RelPhaseEigenstates {
    pub fn index(&self) -> SubspaceIndex {
        self.basis.index
    }

    pub fn get(&self, label: PhaseLabel) -> Option<&LabeledState> {
        self.states.iter().find(|s| s.label == label)
    }

    /// `Σ_r |Φ_r⟩⟨Φ_r|` on the block.
    pub fn projector_sum(&self) -> DMatrix<C64> {
        let n = self.basis.dim();
        let mut m = DMatrix::zeros(n, n);
        for s in &self.states {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += s.vector[i] * s.vector[j].conj();
                }
            }
        }
        m
    }

    /// `|⟨Φ_r|ψ⟩|²` for every surviving label.
    pub fn probabilities(&self, psi: &[C64]) -> Vec<(PhaseLabel, f64)> {
        self.states
            .iter()
            .map(|s| {
                let overlap: C64 = s.vector.iter().zip(psi).map(|(v, p)| v.conj() * p).sum();
                (s.label, overlap.norm_sqr())
            })
            .collect()
    }
}

/// Component of each labeled state on each atomic level.
fn level_components(transition: Transition, label: PhaseLabel) -> [C64; 3] {
    let r = transition.roles();
    let mut v = [C64::new(0.0, 0.0); 3];
    match label {
        PhaseLabel::Zero => v[r.spectator.index()] = C64::new(1.0, 0.0),
        PhaseLabel::Plus => {
            v[r.upper.index()] = C64::new(FRAC_1_SQRT_2, 0.0);
            v[r.partner.index()] = C64::new(0.0, -FRAC_1_SQRT_2);
        }
        PhaseLabel::Minus => {
            v[r.upper.index()] = C64::new(FRAC_1_SQRT_2, 0.0);
            v[r.partner.index()] = C64::new(0.0, FRAC_1_SQRT_2);
        }
    }
    v
}

/// Relative-phase eigenstates of one transition in one subspace.
///
/// For 1↔3: `Φ_0 = |2; N_a−1, N_b⟩` and
/// `Φ_± = (|3; N_a−1, N_b−1⟩ ∓ i|1; N_a, N_b−1⟩)/√2`, where the sign is fixed
/// so that `E_Φ Φ_± = e^{±iπ/2} Φ_±`.
pub fn rel_phase_eigenstates(transition: Transition, index: SubspaceIndex) -> Result<RelPhaseEigenstates> {
    let basis = subspace_basis(index);
    if basis.is_empty() {
        return Err(Error::EmptySubspace { n_a: index.n_a, n_b: index.n_b });
    }
    let states = PhaseLabel::ALL
        .iter()
        .filter_map(|&label| {
            let comps = level_components(transition, label);
            let vector: Vec<C64> = basis.members.iter().map(|m| comps[m.level.index()]).collect();
            vector
                .iter()
                .any(|z| z.norm_sqr() > 0.0)
                .then_some(LabeledState { label, vector })
        })
        .collect();
    Ok(RelPhaseEigenstates { transition, basis, states })
}

/// Marginal relative-phase distribution of one transition at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseDistribution {
    pub transition: Transition,
    pub time: f64,
    pub p0: f64,
    pub p_plus: f64,
    pub p_minus: f64,
}

impl PhaseDistribution {
    pub fn empty(transition: Transition, time: f64) -> Self {
        PhaseDistribution { transition, time, p0: 0.0, p_plus: 0.0, p_minus: 0.0 }
    }

    pub fn get(&self, label: PhaseLabel) -> f64 {
        match label {
            PhaseLabel::Zero => self.p0,
            PhaseLabel::Plus => self.p_plus,
            PhaseLabel::Minus => self.p_minus,
        }
    }

    fn get_mut(&mut self, label: PhaseLabel) -> &mut f64 {
        match label {
            PhaseLabel::Zero => &mut self.p0,
            PhaseLabel::Plus => &mut self.p_plus,
            PhaseLabel::Minus => &mut self.p_minus,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p0, self.p_plus, self.p_minus]
    }

    pub fn total(&self) -> f64 {
        self.p0 + self.p_plus + self.p_minus
    }

    /// Largest absolute difference across the three labels.
    pub fn max_diff(&self, other: &PhaseDistribution) -> f64 {
        PhaseLabel::ALL
            .iter()
            .map(|&l| (self.get(l) - other.get(l)).abs())
            .fold(0.0, f64::max)
    }
}

/// `P(N_a, N_b, Φ_r, t) = |⟨Φ_r|Ψ(t)⟩|²` by projection onto the eigenstates.
pub fn joint_distribution(state: &SystemState, transition: Transition) -> Result<BTreeMap<(SubspaceIndex, PhaseLabel), f64>> {
    let mut out = BTreeMap::new();
    for (idx, psi) in state.amplitudes() {
        let eig = rel_phase_eigenstates(transition, *idx)?;
        for (label, p) in eig.probabilities(psi) {
            out.insert((*idx, label), p);
        }
    }
    Ok(out)
}

/// `P(Φ_r, t) = Σ_{N_a, N_b} P(N_a, N_b, Φ_r, t)`, by projection.
pub fn marginal_distribution(state: &SystemState, transition: Transition) -> Result<PhaseDistribution> {
    let mut dist = PhaseDistribution::empty(transition, state.time);
    for ((_, label), p) in joint_distribution(state, transition)? {
        *dist.get_mut(label) += p;
    }
    Ok(dist)
}

/// Closed-form marginal: with `w_j = Q_{N_a−μ_j} Q_{N_b−ν_j} c_j`,
///
/// ```text
/// P(Φ_0) = Σ_N |Σ_j w_j U_{sj}|²
/// P(Φ_±) = Σ_N |Σ_j w_j (U_{uj} ± i U_{pj})|² / 2
/// ```
///
/// for spectator `s`, upper `u` and partner `p` levels. Matrix elements of
/// absent members are zero.
pub fn closed_form_marginal(params: &SystemParams, transition: Transition, t: f64) -> Result<PhaseDistribution> {
    let initial = initial_state(params)?;
    let roles = transition.roles();
    let i = C64::new(0.0, 1.0);
    let mut dist = PhaseDistribution::empty(transition, t);
    for (idx, w) in initial.amplitudes() {
        let basis = subspace_basis(*idx);
        let u = block_evolution(&block_hamiltonian(params, &basis)?, t)?;
        let row = |level: Level, j: usize| basis.position(level).map_or(C64::new(0.0, 0.0), |r| u.matrix[(r, j)]);
        let mut zero = C64::new(0.0, 0.0);
        let mut plus = C64::new(0.0, 0.0);
        let mut minus = C64::new(0.0, 0.0);
        for (j, wj) in w.iter().enumerate() {
            zero += wj * row(roles.spectator, j);
            plus += wj * (row(roles.upper, j) + i * row(roles.partner, j));
            minus += wj * (row(roles.upper, j) - i * row(roles.partner, j));
        }
        dist.p0 += zero.norm_sqr();
        dist.p_plus += plus.norm_sqr() / 2.0;
        dist.p_minus += minus.norm_sqr() / 2.0;
    }
    Ok(dist)
}

/// Block form of `E_Φ` on a three-dimensional subspace:
/// `|partner⟩⟨upper| − |upper⟩⟨partner| + |spectator⟩⟨spectator|`.
pub fn block_phase_exponential(transition: Transition, index: SubspaceIndex) -> Result<BlockOperator> {
    let basis = three_dim_basis(index)?;
    let r = transition.roles();
    let pos = |l: Level| basis.position(l).expect("dim-3 basis holds every level");
    let mut m = DMatrix::zeros(3, 3);
    m[(pos(r.partner), pos(r.upper))] = C64::new(1.0, 0.0);
    m[(pos(r.upper), pos(r.partner))] = C64::new(-1.0, 0.0);
    m[(pos(r.spectator), pos(r.spectator))] = C64::new(1.0, 0.0);
    Ok(BlockOperator { index, matrix: m })
}

fn three_dim_basis(index: SubspaceIndex) -> Result<SubspaceBasis> {
    let basis = subspace_basis(index);
    match basis.dim() {
        3 => Ok(basis),
        0 => Err(Error::EmptySubspace { n_a: index.n_a, n_b: index.n_b }),
        _ => Err(Error::DegenerateSubspace { n_a: index.n_a, n_b: index.n_b }),
    }
}

/// Block matrix of `X_-` for a dipole transition: `X_-^{13} = a† S_-^{13}`
/// has the single element `√N_a` from level 3 to level 1, and likewise
/// `X_-^{23} = b† S_-^{23}` with `√N_b`.
fn block_lowering(transition: Transition, basis: &SubspaceBasis) -> Result<DMatrix<C64>> {
    let (lower, n) = match transition {
        Transition::OneThree => (Level::One, basis.index.n_a),
        Transition::TwoThree => (Level::Two, basis.index.n_b),
        Transition::OneTwo => return Err(Error::UnsupportedTransition("12")),
    };
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    if let (Some(to), Some(from)) = (basis.position(lower), basis.position(Level::Three)) {
        m[(to, from)] = C64::new(f64::from(n).sqrt(), 0.0);
    }
    Ok(m)
}

/// Residual of `X_- = √(X_- X_+) E_Φ` on one three-dimensional subspace,
/// maximized over the 1↔3 and 2↔3 transitions.
pub fn verify_deformed_polar(index: SubspaceIndex) -> Result<f64> {
    let basis = three_dim_basis(index)?;
    let mut worst = 0.0_f64;
    for t in [Transition::OneThree, Transition::TwoThree] {
        let lower = block_lowering(t, &basis)?;
        let raise = lower.adjoint();
        let modulus = eigen::eigh(&(&lower * &raise))?.map_real(|x| x.max(0.0).sqrt());
        let e = block_phase_exponential(t, index)?;
        let diff = &lower - modulus * &e.matrix;
        worst = diff.iter().fold(worst, |a, z| a.max(z.norm()));
    }
    Ok(worst)
}

/// Deformed su(3) operators on the truncated space
/// `atom ⊗ Fock_a ⊗ Fock_b` with at most `cutoff` photons per mode.
///
/// Basis index is `level·(c+1)² + n_a·(c+1) + n_b`. `Y_+^{12} = a b† S_+^{12}`
/// is chosen so that `[X_+^{13}, X_-^{23}] = −Y_+^{12}` mirrors the undeformed
/// relation `[S_+^{13}, S_-^{23}] = −S_+^{12}`.
#[derive(Clone, Debug)]
pub struct DeformedGenerators {
    pub cutoff: u32,
    pub x13_plus: DMatrix<f64>,
    pub x13_minus: DMatrix<f64>,
    pub x23_plus: DMatrix<f64>,
    pub x23_minus: DMatrix<f64>,
    pub y12_plus: DMatrix<f64>,
    pub y12_minus: DMatrix<f64>,
    pub n_a: DMatrix<f64>,
    pub n_b: DMatrix<f64>,
    /// `S^{ii}` embedded in the product space.
    pub populations: [DMatrix<f64>; 3],
}

impl DeformedGenerators {
    pub fn new(cutoff: u32) -> Result<Self> {
        if cutoff < 2 {
            return Err(crate::error::invalid("cutoff", "must be at least 2"));
        }
        let f = cutoff as usize + 1;
        let id_f = DMatrix::<f64>::identity(f, f);
        let ann = DMatrix::from_fn(f, f, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
        let atom = |from: usize, to: usize| DMatrix::from_fn(3, 3, |i, j| if i == to && j == from { 1.0 } else { 0.0 });
        let embed = |s: &DMatrix<f64>, fa: &DMatrix<f64>, fb: &DMatrix<f64>| s.kronecker(fa).kronecker(fb);

        let a = embed(&DMatrix::identity(3, 3), &ann, &id_f);
        let b = embed(&DMatrix::identity(3, 3), &id_f, &ann);
        let s = |from: usize, to: usize| embed(&atom(from, to), &id_f, &id_f);
        let id = DMatrix::<f64>::identity(3 * f * f, 3 * f * f);

        let x13_plus = &a * s(0, 2);
        let x23_plus = &b * s(1, 2);
        let y12_plus = &a * b.transpose() * s(0, 1);
        let n_a = a.transpose() * &a - s(0, 0) + &id;
        let n_b = b.transpose() * &b - s(1, 1) + &id;
        Ok(DeformedGenerators {
            cutoff,
            x13_minus: x13_plus.transpose(),
            x23_minus: x23_plus.transpose(),
            y12_minus: y12_plus.transpose(),
            x13_plus,
            x23_plus,
            y12_plus,
            n_a,
            n_b,
            populations: [s(0, 0), s(1, 1), s(2, 2)],
        })
    }

    pub fn dim(&self) -> usize {
        self.n_a.nrows()
    }

    fn decode(&self, k: usize) -> (usize, u32, u32) {
        let f = self.cutoff as usize + 1;
        (k / (f * f), ((k / f) % f) as u32, (k % f) as u32)
    }

    /// Whether basis state `k` lies at least one photon below the cutoff in both modes.
    pub fn is_interior(&self, k: usize) -> bool {
        let (_, na, nb) = self.decode(k);
        na < self.cutoff && nb < self.cutoff
    }

    /// Max entry of `m` over interior rows and columns.
    pub fn interior_max(&self, m: &DMatrix<f64>) -> f64 {
        let mut worst = 0.0_f64;
        for i in (0..self.dim()).filter(|&i| self.is_interior(i)) {
            for j in (0..self.dim()).filter(|&j| self.is_interior(j)) {
                worst = worst.max(m[(i, j)].abs());
            }
        }
        worst
    }

    /// `E_Φ` on the truncated space: the block form on every three-dimensional
    /// subspace that fits entirely below the cutoff, identity on all other states.
    pub fn phase_exponential(&self, transition: Transition) -> DMatrix<f64> {
        let f = self.cutoff as usize + 1;
        let n = self.dim();
        let mut e = DMatrix::<f64>::identity(n, n);
        let index_of = |level: Level, na: u32, nb: u32| level.index() * f * f + na as usize * f + nb as usize;
        for na in 1..=self.cutoff {
            for nb in 1..=self.cutoff {
                let basis = subspace_basis(SubspaceIndex::new(na, nb));
                if basis.members.iter().any(|m| m.n_a > self.cutoff || m.n_b > self.cutoff) {
                    continue;
                }
                let block = block_phase_exponential(transition, basis.index).expect("dim-3 subspace");
                let idx: Vec<usize> = basis.members.iter().map(|m| index_of(m.level, m.n_a, m.n_b)).collect();
                for (r, &gi) in idx.iter().enumerate() {
                    for (c, &gj) in idx.iter().enumerate() {
                        e[(gi, gj)] = block.matrix[(r, c)].re;
                    }
                }
            }
        }
        e
    }
}

fn commutator(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y - y * x
}

/// Individual residuals of the deformed algebra checks, keyed by a short name.
pub fn deformed_algebra_residuals(cutoff: u32) -> Result<Vec<(&'static str, f64)>> {
    let g = DeformedGenerators::new(cutoff)?;
    let n = g.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let [s11, s22, _] = &g.populations;

    let mut out = Vec::new();
    let r = commutator(&g.x13_plus, &g.x13_minus) - &g.n_a * (&id - s11 * 2.0 - s22);
    out.push(("[X13+,X13-] = Na(1-2S11-S22)", g.interior_max(&r)));
    let r = commutator(&g.x23_plus, &g.x23_minus) - &g.n_b * (&id - s22 * 2.0 - s11);
    out.push(("[X23+,X23-] = Nb(1-2S22-S11)", g.interior_max(&r)));
    let r = commutator(&g.y12_plus, &g.y12_minus) - &g.n_a * &g.n_b * (s22 - s11);
    out.push(("[Y12+,Y12-] = NaNb(S22-S11)", g.interior_max(&r)));
    let r = commutator(&g.x13_plus, &g.x23_minus) + &g.y12_plus;
    out.push(("[X13+,X23-] = -Y12+", g.interior_max(&r)));
    let r = commutator(&g.x13_plus, &g.x23_plus);
    out.push(("[X13+,X23+] = 0", g.interior_max(&r)));

    // |1; N_a, N_b − 1⟩ is annihilated by X_-^{13}
    let vac = &g.x13_minus * s11;
    out.push(("X13- |1;Na,Nb-1> = 0", vac.amax()));

    for t in [Transition::OneThree, Transition::TwoThree] {
        let e = g.phase_exponential(t);
        let unitary = &e * e.transpose() - &id;
        let ca = commutator(&e, &g.n_a);
        let cb = commutator(&e, &g.n_b);
        let name = match t {
            Transition::OneThree => "E13 unitary, [E13,Na] = [E13,Nb] = 0",
            _ => "E23 unitary, [E23,Na] = [E23,Nb] = 0",
        };
        out.push((name, unitary.amax().max(ca.amax()).max(cb.amax())));
    }
    Ok(out)
}

/// Largest residual of the deformed commutation relations, restricted to
/// states at least one photon below the truncation in each mode.
pub fn verify_deformed_algebra(cutoff: u32) -> Result<f64> {
    Ok(deformed_algebra_residuals(cutoff)?
        .into_iter()
        .map(|(_, r)| r)
        .fold(0.0, f64::max))
}

/// Initial condition for coherent population trapping.
///
/// The atom starts in `(|1⟩ + e^{iφ}|2⟩)/√2` with both modes coherent at
/// `n̄` photons, equal unit couplings and zero detunings. Semiclassically,
/// with Rabi frequencies `Ω_a e^{−iθ_a}` and `Ω_b e^{−iθ_b}`, trapping needs
/// `Ω_a = Ω_b` and `θ_a − θ_b − φ = ±π`. The field phases here are zero, so
/// `φ = ±π` (i.e. `c = (1, −1, 0)/√2`) is the trapped state.
pub fn trapping_config(phi: f64, nbar: f64) -> SystemParams {
    let h = FRAC_1_SQRT_2;
    SystemParams {
        g_a: 1.0,
        g_b: 1.0,
        delta_a: 0.0,
        delta_b: 0.0,
        nbar_a: nbar,
        nbar_b: nbar,
        c: [C64::new(h, 0.0), C64::from_polar(h, phi), C64::new(0.0, 0.0)],
        epsilon: DEFAULT_EPSILON,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::phase_eigensystem;
    use crate::dynamics::evolve;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    const H: f64 = FRAC_1_SQRT_2;

    #[test]
    fn eigenstates_one_three_in_one_one() {
        let e = rel_phase_eigenstates(Transition::OneThree, SubspaceIndex::new(1, 1)).unwrap();
        // basis order: (1;1,0), (2;0,1), (3;0,0)
        assert_eq!(e.get(PhaseLabel::Zero).unwrap().vector, vec![c(0., 0.), c(1., 0.), c(0., 0.)]);
        assert_eq!(e.get(PhaseLabel::Plus).unwrap().vector, vec![c(0., -H), c(0., 0.), c(H, 0.)]);
        assert_eq!(e.get(PhaseLabel::Minus).unwrap().vector, vec![c(0., H), c(0., 0.), c(H, 0.)]);
    }

    #[test]
    fn eigenstates_one_two_in_one_one() {
        let e = rel_phase_eigenstates(Transition::OneTwo, SubspaceIndex::new(1, 1)).unwrap();
        assert_eq!(e.get(PhaseLabel::Zero).unwrap().vector, vec![c(0., 0.), c(0., 0.), c(1., 0.)]);
        assert_eq!(e.get(PhaseLabel::Plus).unwrap().vector, vec![c(0., -H), c(H, 0.), c(0., 0.)]);
        assert_eq!(e.get(PhaseLabel::Minus).unwrap().vector, vec![c(0., H), c(H, 0.), c(0., 0.)]);
    }

    #[test]
    fn eigenstates_follow_bare_atomic_ones() {
        for t in [Transition::OneThree, Transition::TwoThree] {
            let bare = phase_eigensystem(t).unwrap();
            let e = rel_phase_eigenstates(t, SubspaceIndex::new(4, 7)).unwrap();
            for (k, l) in PhaseLabel::ALL.iter().enumerate() {
                let v = &e.get(*l).unwrap().vector;
                for (pos, m) in e.basis.members.iter().enumerate() {
                    assert_eq!(v[pos], bare.eigenvectors[k][m.level.index()]);
                }
            }
        }
    }

    #[test]
    fn edge_subspace_eigenstates() {
        // (3,0): only (2;2,0) survives
        let e = rel_phase_eigenstates(Transition::TwoThree, SubspaceIndex::new(3, 0)).unwrap();
        assert_eq!(e.basis.dim(), 1);
        assert!(e.get(PhaseLabel::Zero).is_none());
        assert_eq!(e.get(PhaseLabel::Plus).unwrap().vector, vec![c(0., -H)]);
        assert_eq!(e.get(PhaseLabel::Minus).unwrap().vector, vec![c(0., H)]);

        let e = rel_phase_eigenstates(Transition::OneThree, SubspaceIndex::new(3, 0)).unwrap();
        assert_eq!(e.states.len(), 1);
        assert_eq!(e.get(PhaseLabel::Zero).unwrap().vector, vec![c(1., 0.)]);

        let e = rel_phase_eigenstates(Transition::OneTwo, SubspaceIndex::new(0, 2)).unwrap();
        assert!(e.get(PhaseLabel::Zero).is_none());
        assert_eq!(e.states.len(), 2);

        assert!(rel_phase_eigenstates(Transition::OneThree, SubspaceIndex::new(0, 0)).is_err());
    }

    #[test]
    fn projectors_resolve_identity_and_dim3_orthonormal() {
        for t in Transition::ALL {
            for na in 0..5u32 {
                for nb in 0..5u32 {
                    let Ok(e) = rel_phase_eigenstates(t, SubspaceIndex::new(na, nb)) else {
                        assert_eq!((na, nb), (0, 0));
                        continue;
                    };
                    let n = e.basis.dim();
                    let sum = e.projector_sum();
                    let id = DMatrix::<C64>::identity(n, n);
                    assert!((sum - id).iter().all(|z| z.norm() < 1e-12), "{t} ({na},{nb})");
                    if n == 3 {
                        for a in &e.states {
                            for b in &e.states {
                                let ip: C64 = a.vector.iter().zip(&b.vector).map(|(x, y)| x.conj() * y).sum();
                                let target = if a.label == b.label { 1.0 } else { 0.0 };
                                assert!((ip - c(target, 0.0)).norm() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn block_exponential_eigen_relation() {
        for t in Transition::ALL {
            let idx = SubspaceIndex::new(3, 2);
            let e = block_phase_exponential(t, idx).unwrap();
            assert!(e.unitarity_defect() < 1e-15);
            for s in &rel_phase_eigenstates(t, idx).unwrap().states {
                let lhs = e.apply(&s.vector);
                let phase = C64::from_polar(1.0, s.label.angle());
                for (x, y) in lhs.iter().zip(&s.vector) {
                    assert!((x - phase * y).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn ladder_action() {
        let idx = SubspaceIndex::new(2, 3);
        let e = block_phase_exponential(Transition::OneThree, idx).unwrap();
        // basis: (1;2,2), (2;1,3), (3;1,2)
        assert_eq!(e.apply(&[c(0., 0.), c(0., 0.), c(1., 0.)]), vec![c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert_eq!(e.apply(&[c(0., 0.), c(1., 0.), c(0., 0.)]), vec![c(0., 0.), c(1., 0.), c(0., 0.)]);
        assert!(matches!(
            block_phase_exponential(Transition::OneThree, SubspaceIndex::new(0, 3)),
            Err(Error::DegenerateSubspace { .. })
        ));
    }

    #[test]
    fn deformed_polar() {
        assert!(verify_deformed_polar(SubspaceIndex::new(1, 1)).unwrap() < 1e-12);
        assert!(verify_deformed_polar(SubspaceIndex::new(17, 40)).unwrap() < 1e-12);
        assert!(verify_deformed_polar(SubspaceIndex::new(2, 0)).is_err());
        assert!(verify_deformed_polar(SubspaceIndex::new(0, 0)).is_err());
    }

    #[test]
    fn deformed_algebra_cutoff_four() {
        for (name, r) in deformed_algebra_residuals(4).unwrap() {
            assert!(r < 1e-12, "{name}: {r}");
        }
        assert!(verify_deformed_algebra(1).is_err());
    }

    #[test]
    fn deformed_brackets_break_at_the_edge() {
        // the restriction matters: on the full truncated space a a† is wrong at n = cutoff
        let g = DeformedGenerators::new(3).unwrap();
        let n = g.dim();
        let id = DMatrix::<f64>::identity(n, n);
        let r = commutator(&g.x13_plus, &g.x13_minus) - &g.n_a * (&id - &g.populations[0] * 2.0 - &g.populations[1]);
        assert!(r.amax() > 0.5);
        assert!(g.interior_max(&r) < 1e-12);
    }

    #[test]
    fn joint_distribution_vacuum() {
        let p = SystemParams::resonant(1.0, 0.0, 0.0, SystemParams::ground(Level::One));
        let s = initial_state(&p).unwrap();
        let j23 = joint_distribution(&s, Transition::TwoThree).unwrap();
        let nonzero: Vec<_> = j23.iter().filter(|(_, &p)| p > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(*nonzero[0].0, (SubspaceIndex::new(0, 1), PhaseLabel::Zero));
        let j13 = joint_distribution(&s, Transition::OneThree).unwrap();
        assert!(j13.iter().filter(|(_, &p)| p > 0.0).all(|((idx, _), _)| *idx == SubspaceIndex::new(0, 1)));
    }

    #[test]
    fn initial_distributions_atom_in_one() {
        let p = SystemParams::resonant(1.0, 2.0, 3.0, SystemParams::ground(Level::One));
        let s = initial_state(&p).unwrap();
        let d23 = marginal_distribution(&s, Transition::TwoThree).unwrap();
        assert!((d23.p0 - 1.0).abs() < 1e-12);
        let d13 = marginal_distribution(&s, Transition::OneThree).unwrap();
        assert_eq!(d13.p0, 0.0);
        assert!((d13.p_plus - 0.5).abs() < 1e-12 && (d13.p_minus - 0.5).abs() < 1e-12);
        // weight only on labels that contain a level-1 member
        for ((_, label), prob) in joint_distribution(&s, Transition::OneThree).unwrap() {
            if label == PhaseLabel::Zero {
                assert_eq!(prob, 0.0);
            }
        }
    }

    #[test]
    fn trapping_configs() {
        let p = trapping_config(std::f64::consts::PI, 50.0);
        assert!((p.c[0] - c(H, 0.)).norm() < 1e-15);
        assert!((p.c[1] - c(-H, 0.)).norm() < 1e-15);
        assert_eq!(p.c[2], c(0., 0.));
        assert_eq!((p.nbar_a, p.nbar_b), (50.0, 50.0));
        assert_eq!(p.g_a, p.g_b);
        assert!(p.validate().is_ok());
        let q = trapping_config(0.0, 50.0);
        assert!((q.c[1] - c(H, 0.)).norm() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn projection_matches_closed_form_and_populations(
            nbar_a in 0.0..4.0f64,
            nbar_b in 0.0..4.0f64,
            delta_a in -1.5..1.5f64,
            delta_b in -1.5..1.5f64,
            t in 0.0..30.0f64,
            theta in 0.0..1.57f64,
            phi in -3.2..3.2f64,
        ) {
            let cc = [c(theta.cos() * 0.8, 0.0), C64::from_polar(theta.sin(), phi), c(theta.cos() * 0.6, 0.0)];
            let mut p = SystemParams::resonant(1.0, nbar_a, nbar_b, cc);
            p.delta_a = delta_a;
            p.delta_b = delta_b;
            p.g_b = 1.3;
            let s = evolve(&initial_state(&p).unwrap(), &p, t).unwrap();
            let pops = s.level_populations();
            for tr in Transition::ALL {
                let proj = marginal_distribution(&s, tr).unwrap();
                let closed = closed_form_marginal(&p, tr, t).unwrap();
                prop_assert!(proj.max_diff(&closed) < 1e-10, "{tr}: {proj:?} vs {closed:?}");
                prop_assert!((proj.total() - 1.0).abs() < 1e-10);
                prop_assert!(proj.as_array().iter().all(|&x| x > -1e-12 && x < 1.0 + 1e-12));
                let spectator = tr.roles().spectator.index();
                prop_assert!((proj.p0 - pops[spectator]).abs() < 1e-10);
            }
        }
    }
}
