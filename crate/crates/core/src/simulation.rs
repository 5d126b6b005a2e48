//! Time-grid evaluator.
//!
//! Each populated subspace is diagonalized once. The initial amplitudes are
//! stored in the eigenbasis, so a time sample costs one phase rotation and one
//! 3×3 back-transformation per subspace. Distributions are then assembled with
//! the closed-form sums rather than by projection.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{
    block_hamiltonian, initial_state, initial_state_with_cutoffs, subspace_basis, SubspaceBasis, SystemParams,
    SystemState,
};
use crate::eigen;
use crate::error::{invalid, Result};
use crate::levels::{Level, Transition};
use crate::relphase::PhaseDistribution;

#[derive(Clone, Debug)]
struct Block {
    basis: SubspaceBasis,
    values: Vec<f64>,
    vectors: DMatrix<C64>,
    /// `V† ψ(0)`.
    coeffs: Vec<C64>,
}

impl Block {
    fn amplitudes(&self, t: f64) -> Vec<C64> {
        let n = self.values.len();
        let rotated: Vec<C64> = (0..n)
            .map(|k| self.coeffs[k] * C64::from_polar(1.0, -self.values[k] * t))
            .collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.vectors[(i, k)] * rotated[k]).sum())
            .collect()
    }
}

/// Every quantity reported at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub time: f64,
    /// In canonical order 13, 23, 12.
    pub distributions: [PhaseDistribution; 3],
    pub populations: [f64; 3],
    pub norm: f64,
}

impl Sample {
    pub fn distribution(&self, transition: Transition) -> &PhaseDistribution {
        &self.distributions[transition.slot()]
    }
}

/// Precomputed evolution of one initial condition.
#[derive(Clone, Debug)]
pub struct Simulation {
    params: SystemParams,
    initial: SystemState,
    blocks: Vec<Block>,
}

impl Simulation {
    pub fn new(params: SystemParams) -> Result<Self> {
        let initial = initial_state(&params)?;
        Self::from_state(params, initial)
    }

    /// With explicit maximum photon numbers instead of the Poisson cutoffs.
    pub fn with_cutoffs(params: SystemParams, cut_a: u64, cut_b: u64) -> Result<Self> {
        let initial = initial_state_with_cutoffs(&params, cut_a, cut_b)?;
        Self::from_state(params, initial)
    }

    fn from_state(params: SystemParams, initial: SystemState) -> Result<Self> {
        let blocks = initial
            .amplitudes()
            .par_iter()
            .map(|(idx, psi)| {
                let basis = subspace_basis(*idx);
                let h = block_hamiltonian(&params, &basis)?;
                let e = eigen::eigh(&h.matrix)?;
                let n = e.dim();
                let coeffs = (0..n)
                    .map(|k| (0..n).map(|i| e.vectors[(i, k)].conj() * psi[i]).sum())
                    .collect();
                Ok(Block { basis, values: e.values, vectors: e.vectors, coeffs })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Simulation { params, initial, blocks })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn initial_state(&self) -> &SystemState {
        &self.initial
    }

    pub fn subspace_count(&self) -> usize {
        self.blocks.len()
    }

    /// Full state at `t`, for inspection and cross-checks.
    pub fn state_at(&self, t: f64) -> Result<SystemState> {
        check_time(t)?;
        let amplitudes = self.blocks.iter().map(|b| (b.basis.index, b.amplitudes(t))).collect();
        SystemState::from_amplitudes(t, amplitudes)
    }

    /// Distributions, populations and norm at `t`. Subspaces are accumulated
    /// in ascending `(N_a, N_b)` order.
    pub fn sample(&self, t: f64) -> Result<Sample> {
        check_time(t)?;
        let mut dists = Transition::ALL.map(|tr| PhaseDistribution::empty(tr, t));
        let mut pops = [0.0; 3];
        let zero = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        for block in &self.blocks {
            let psi = block.amplitudes(t);
            let mut by_level = [zero; 3];
            for (m, a) in block.basis.members.iter().zip(&psi) {
                by_level[m.level.index()] = *a;
                pops[m.level.index()] += a.norm_sqr();
            }
            for (d, tr) in dists.iter_mut().zip(Transition::ALL) {
                let r = tr.roles();
                let amp = |l: Level| by_level[l.index()];
                d.p0 += amp(r.spectator).norm_sqr();
                d.p_plus += (amp(r.upper) + i * amp(r.partner)).norm_sqr() / 2.0;
                d.p_minus += (amp(r.upper) - i * amp(r.partner)).norm_sqr() / 2.0;
            }
        }
        let norm = pops.iter().sum::<f64>().sqrt();
        Ok(Sample { time: t, distributions: dists, populations: pops, norm })
    }

    /// Samples at every time, in input order; parallel over times.
    pub fn run(&self, times: &[f64]) -> Result<Vec<Sample>> {
        times.par_iter().map(|&t| self.sample(t)).collect()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("t", "must be finite and non-negative"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::relphase::{closed_form_marginal, marginal_distribution, trapping_config};

    fn atom1() -> [C64; 3] {
        SystemParams::ground(Level::One)
    }

    #[test]
    fn sample_matches_projection_path() {
        let mut p = SystemParams::resonant(1.0, 2.5, 1.5, [C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)]);
        p.delta_a = 0.3;
        p.g_b = 0.7;
        let sim = Simulation::new(p).unwrap();
        let s0 = initial_state(&p).unwrap();
        for &t in &[0.0, 0.37, 4.0, 19.5] {
            let sample = sim.sample(t).unwrap();
            let state = evolve(&s0, &p, t).unwrap();
            for tr in Transition::ALL {
                let proj = marginal_distribution(&state, tr).unwrap();
                assert!(sample.distribution(tr).max_diff(&proj) < 1e-10, "{tr} t={t}");
                let closed = closed_form_marginal(&p, tr, t).unwrap();
                assert!(sample.distribution(tr).max_diff(&closed) < 1e-10);
            }
            let pops = state.level_populations();
            for (a, b) in pops.iter().zip(&sample.populations) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((sample.norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn state_at_matches_evolve() {
        let p = SystemParams::resonant(1.0, 1.0, 1.0, atom1());
        let sim = Simulation::new(p).unwrap();
        let a = sim.state_at(3.3).unwrap();
        let b = evolve(sim.initial_state(), &p, 3.3).unwrap();
        for (idx, v) in a.amplitudes() {
            let w = b.subspace(*idx).unwrap();
            for (x, y) in v.iter().zip(w) {
                assert!((x - y).norm() < 1e-12);
            }
        }
        assert_eq!(a.time, 3.3);
    }

    #[test]
    fn run_is_ordered_and_repeatable() {
        let p = SystemParams::resonant(1.0, 4.0, 2.0, atom1());
        let sim = Simulation::new(p).unwrap();
        let times: Vec<f64> = (0..64).map(|k| k as f64 * 0.25).collect();
        let a = sim.run(&times).unwrap();
        let b = sim.run(&times).unwrap();
        assert_eq!(a, b);
        for (s, t) in a.iter().zip(&times) {
            assert_eq!(s.time, *t);
            assert_eq!(*s, sim.sample(*t).unwrap());
        }
    }

    #[test]
    fn uncoupled_is_constant() {
        let mut p = SystemParams::resonant(0.0, 1.0, 1.0, [C64::new(0.6, 0.0), C64::new(0.0, 0.0), C64::new(0.8, 0.0)]);
        p.g_b = 0.0;
        let sim = Simulation::new(p).unwrap();
        let s0 = sim.sample(0.0).unwrap();
        let s1 = sim.sample(50.0).unwrap();
        for tr in Transition::ALL {
            assert!(s0.distribution(tr).max_diff(s1.distribution(tr)) < 1e-14);
        }
    }

    #[test]
    fn trapped_state_keeps_level_three_empty() {
        let sim = Simulation::new(trapping_config(std::f64::consts::PI, 10.0)).unwrap();
        for k in 0..40 {
            let s = sim.sample(k as f64 * 0.5).unwrap();
            assert!(s.populations[2] < 1e-9, "{}", s.populations[2]);
        }
        let control = Simulation::new(trapping_config(0.0, 10.0)).unwrap();
        let max = (0..40).map(|k| control.sample(k as f64 * 0.5).unwrap().populations[2]).fold(0.0, f64::max);
        assert!(max > 0.1);
    }

    #[test]
    fn rejects_negative_time() {
        let sim = Simulation::new(SystemParams::resonant(1.0, 1.0, 1.0, atom1())).unwrap();
        assert!(sim.sample(-1.0).is_err());
        assert!(sim.state_at(f64::NAN).is_err());
    }
}
