//! Brute-force reference on the truncated `atom ⊗ Fock_a ⊗ Fock_b` space.
//!
//! Nothing here reuses the block machinery: the basis, the coherent weights and
//! the operator matrix elements are built from scratch, and evolution uses a
//! general dense Hermitian eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::dynamics::{SystemParams, SystemState};
use crate::error::{invalid, Error, Result};

/// Largest full-space dimension the oracle accepts.
pub const MAX_DIMENSION: usize = 20_000;

/// Dense operator on the truncated product space. Basis index is
/// `level·(c_a+1)(c_b+1) + n_a·(c_b+1) + n_b` with `level` counted from 0.
#[derive(Clone, Debug)]
pub struct FullSpaceOperator {
    pub cutoff_a: u32,
    pub cutoff_b: u32,
    pub matrix: DMatrix<C64>,
}

impl FullSpaceOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn index(&self, level: usize, n_a: u32, n_b: u32) -> usize {
        full_index(self.cutoff_a, self.cutoff_b, level, n_a, n_b)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Max entry of `[self, other]`.
    pub fn commutator_norm(&self, other: &FullSpaceOperator) -> f64 {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        c.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn expectation(&self, psi: &DVector<C64>) -> f64 {
        psi.dotc(&(&self.matrix * psi)).re
    }
}

fn full_index(cutoff_a: u32, cutoff_b: u32, level: usize, n_a: u32, n_b: u32) -> usize {
    let fa = cutoff_a as usize + 1;
    let fb = cutoff_b as usize + 1;
    level * fa * fb + n_a as usize * fb + n_b as usize
}

fn check_dimension(cutoff_a: u32, cutoff_b: u32) -> Result<usize> {
    if cutoff_a < 1 || cutoff_b < 1 {
        return Err(invalid("cutoff", "both cutoffs must be at least 1"));
    }
    let dim = 3 * (cutoff_a as usize + 1) * (cutoff_b as usize + 1);
    if dim > MAX_DIMENSION {
        return Err(Error::OracleTooLarge(dim));
    }
    Ok(dim)
}

fn real(m: DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

fn annihilation(cutoff: u32) -> DMatrix<f64> {
    let f = cutoff as usize + 1;
    DMatrix::from_fn(f, f, |row, col| if col == row + 1 { (col as f64).sqrt() } else { 0.0 })
}

/// `|to⟩⟨from|` on the atom, levels counted from 0.
fn atom_ket_bra(to: usize, from: usize) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |r, c| if r == to && c == from { 1.0 } else { 0.0 })
}

struct Factors {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    id_a: DMatrix<f64>,
    id_b: DMatrix<f64>,
}

impl Factors {
    fn new(cutoff_a: u32, cutoff_b: u32) -> Self {
        let fa = cutoff_a as usize + 1;
        let fb = cutoff_b as usize + 1;
        Factors {
            a: annihilation(cutoff_a),
            b: annihilation(cutoff_b),
            id_a: DMatrix::identity(fa, fa),
            id_b: DMatrix::identity(fb, fb),
        }
    }

    fn product(&self, atom: &DMatrix<f64>, fa: &DMatrix<f64>, fb: &DMatrix<f64>) -> DMatrix<f64> {
        atom.kronecker(fa).kronecker(fb)
    }
}

/// `H = −Δ_a S¹¹ − Δ_b S²² + g_a(a S₊¹³ + a† S₋¹³) + g_b(b S₊²³ + b† S₋²³)`.
pub fn build_full_hamiltonian(params: &SystemParams, cutoff_a: u32, cutoff_b: u32) -> Result<FullSpaceOperator> {
    check_dimension(cutoff_a, cutoff_b)?;
    let f = Factors::new(cutoff_a, cutoff_b);
    let s11 = f.product(&atom_ket_bra(0, 0), &f.id_a, &f.id_b);
    let s22 = f.product(&atom_ket_bra(1, 1), &f.id_a, &f.id_b);
    // S₊¹³ = |3⟩⟨1| with the photon annihilated
    let a_s13 = f.product(&atom_ket_bra(2, 0), &f.a, &f.id_b);
    let b_s23 = f.product(&atom_ket_bra(2, 1), &f.id_a, &f.b);
    let h = s11 * (-params.delta_a)
        + s22 * (-params.delta_b)
        + (&a_s13 + a_s13.transpose()) * params.g_a
        + (&b_s23 + b_s23.transpose()) * params.g_b;
    Ok(FullSpaceOperator { cutoff_a, cutoff_b, matrix: real(h) })
}

/// `(N_a, N_b) = (a†a − S¹¹ + 1, b†b − S²² + 1)` on the truncated space.
pub fn excitation_operators(cutoff_a: u32, cutoff_b: u32) -> Result<(FullSpaceOperator, FullSpaceOperator)> {
    let dim = check_dimension(cutoff_a, cutoff_b)?;
    let f = Factors::new(cutoff_a, cutoff_b);
    let id = DMatrix::<f64>::identity(dim, dim);
    let id3 = DMatrix::<f64>::identity(3, 3);
    let na = f.product(&id3, &(f.a.transpose() * &f.a), &f.id_b) - f.product(&atom_ket_bra(0, 0), &f.id_a, &f.id_b) + &id;
    let nb = f.product(&id3, &f.id_a, &(f.b.transpose() * &f.b)) - f.product(&atom_ket_bra(1, 1), &f.id_a, &f.id_b) + &id;
    let wrap = |m| FullSpaceOperator { cutoff_a, cutoff_b, matrix: real(m) };
    Ok((wrap(na), wrap(nb)))
}

/// Dense spectral decomposition of a full-space Hamiltonian.
#[derive(Clone, Debug)]
pub struct FullPropagator {
    eigen: SymmetricEigen<C64, nalgebra::Dyn>,
}

impl FullPropagator {
    pub fn new(h: &FullSpaceOperator) -> Result<Self> {
        let dev = h.hermitian_deviation();
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        Ok(FullPropagator { eigen: SymmetricEigen::new(h.matrix.clone()) })
    }

    pub fn dimension(&self) -> usize {
        self.eigen.eigenvalues.len()
    }

    /// `e^{−iHt} ψ`.
    pub fn evolve(&self, psi: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        if psi.len() != self.dimension() {
            return Err(invalid("psi0", format!("length {} does not match dimension {}", psi.len(), self.dimension())));
        }
        let v = &self.eigen.eigenvectors;
        let mut coeffs = v.adjoint() * psi;
        for (c, lam) in coeffs.iter_mut().zip(self.eigen.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -lam * t);
        }
        Ok(v * coeffs)
    }
}

/// One-shot `e^{−iHt} ψ₀`; `ψ₀` must be normalized within 1e−10.
pub fn full_evolve(h: &FullSpaceOperator, psi0: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    FullPropagator::new(h)?.evolve(psi0, t)
}

/// `Q_n` by the recursion `Q_n = Q_{n−1} √(n̄/n)`, `Q_0 = e^{−n̄/2}`.
fn coherent_weights(nbar: f64, max_n: u32) -> Vec<f64> {
    let mut q = Vec::with_capacity(max_n as usize + 1);
    let mut cur = (-nbar / 2.0).exp();
    q.push(cur);
    for n in 1..=max_n {
        cur *= (nbar / f64::from(n)).sqrt();
        q.push(cur);
    }
    q
}

/// `Σ_j c_j |j⟩ ⊗ |α_a⟩ ⊗ |α_b⟩` with photon numbers up to `max_a`, `max_b`,
/// embedded in the space with cutoffs `cutoff_a`, `cutoff_b` and renormalized.
pub fn coherent_product_state(params: &SystemParams, cutoff_a: u32, cutoff_b: u32, max_a: u32, max_b: u32) -> Result<DVector<C64>> {
    let dim = check_dimension(cutoff_a, cutoff_b)?;
    if max_a > cutoff_a || max_b > cutoff_b {
        return Err(invalid("max photons", "must not exceed the cutoffs"));
    }
    let qa = coherent_weights(params.nbar_a, max_a);
    let qb = coherent_weights(params.nbar_b, max_b);
    let mut psi = DVector::<C64>::zeros(dim);
    for level in 0..3 {
        for n_a in 0..=max_a {
            for n_b in 0..=max_b {
                psi[full_index(cutoff_a, cutoff_b, level, n_a, n_b)] = params.c[level] * qa[n_a as usize] * qb[n_b as usize];
            }
        }
    }
    let norm = psi.norm();
    if !(norm > 0.0) {
        return Err(Error::NotNormalized(norm));
    }
    Ok(psi / C64::new(norm, 0.0))
}

/// Places every block amplitude at its full-space position.
pub fn embed(state: &SystemState, cutoff_a: u32, cutoff_b: u32) -> Result<DVector<C64>> {
    let dim = check_dimension(cutoff_a, cutoff_b)?;
    let mut psi = DVector::<C64>::zeros(dim);
    for (idx, v) in state.amplitudes() {
        let basis = crate::dynamics::subspace_basis(*idx);
        for (m, amp) in basis.members.iter().zip(v) {
            if m.n_a > cutoff_a || m.n_b > cutoff_b {
                if amp.norm() > 0.0 {
                    return Err(invalid("cutoff", format!("member {m:?} lies outside the truncated space")));
                }
                continue;
            }
            psi[full_index(cutoff_a, cutoff_b, m.level.index(), m.n_a, m.n_b)] = *amp;
        }
    }
    Ok(psi)
}

/// Result of comparing block and full-space evolution over a set of times.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub dimension: usize,
    pub hermiticity: f64,
    /// Max of `‖[H, N_a]‖` and `‖[H, N_b]‖`.
    pub commutator: f64,
    pub max_amplitude_diff: f64,
    pub max_norm_drift: f64,
    pub max_excitation_drift: f64,
}

/// Evolves the same initial condition both ways. Initial photon numbers are
/// kept below each cutoff so that every subspace they reach fits in the
/// truncated space.
pub fn compare_block_and_full(params: &SystemParams, cutoff_a: u32, cutoff_b: u32, times: &[f64]) -> Result<OracleReport> {
    let h = build_full_hamiltonian(params, cutoff_a, cutoff_b)?;
    let (na, nb) = excitation_operators(cutoff_a, cutoff_b)?;
    let prop = FullPropagator::new(&h)?;
    let psi0 = coherent_product_state(params, cutoff_a, cutoff_b, cutoff_a - 1, cutoff_b - 1)?;
    let sim = crate::simulation::Simulation::with_cutoffs(*params, u64::from(cutoff_a - 1), u64::from(cutoff_b - 1))?;
    let start_na = na.expectation(&psi0);
    let start_nb = nb.expectation(&psi0);

    let mut report = OracleReport {
        dimension: h.dimension(),
        hermiticity: h.hermitian_deviation(),
        commutator: h.commutator_norm(&na).max(h.commutator_norm(&nb)),
        max_amplitude_diff: 0.0,
        max_norm_drift: 0.0,
        max_excitation_drift: 0.0,
    };
    for &t in times {
        let full = prop.evolve(&psi0, t)?;
        let block = embed(&sim.state_at(t)?, cutoff_a, cutoff_b)?;
        let diff = (&full - &block).iter().fold(0.0, |a: f64, z| a.max(z.norm()));
        report.max_amplitude_diff = report.max_amplitude_diff.max(diff);
        report.max_norm_drift = report.max_norm_drift.max((full.norm() - 1.0).abs());
        let drift = (na.expectation(&full) - start_na).abs().max((nb.expectation(&full) - start_nb).abs());
        report.max_excitation_drift = report.max_excitation_drift.max(drift);
    }
    Ok(report)
}
