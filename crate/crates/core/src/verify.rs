//! Invariant suites run by `lambda-phase verify`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::algebra::{
    generator, noncomposition_witness, phase_eigensystem, phase_exponential, raising, lowering, verify_polar_identity,
    AtomOperator,
};
use crate::config::tau_to_time;
use crate::dynamics::{
    block_evolution, block_hamiltonian, evolve, evolve_backward, initial_state, poisson_weight, subspace_basis,
    truncation_cutoff, SubspaceIndex, SystemParams,
};
use crate::eigen;
use crate::error::{Error, Result};
use crate::levels::{Level, PhaseLabel, Transition};
use crate::oracle::compare_block_and_full;
use crate::relphase::{
    block_phase_exponential, closed_form_marginal, deformed_algebra_residuals, marginal_distribution,
    rel_phase_eigenstates, verify_deformed_polar,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Dynamics,
    RelPhase,
    Oracle,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["algebra", "dynamics", "relphase", "oracle", "all"];

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Algebra, Suite::Dynamics, Suite::RelPhase, Suite::Oracle],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Dynamics => "dynamics",
            Suite::RelPhase => "relphase",
            Suite::Oracle => "oracle",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "dynamics" => Ok(Suite::Dynamics),
            "relphase" => Ok(Suite::RelPhase),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            other => Err(Error::UnknownSuite(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    /// Passes when the value is at most the bound.
    AtMost(f64),
    /// Passes when the value exceeds the bound.
    Above(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(b) => self.value <= b,
            Bound::Above(b) => self.value > b,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let bound = match self.bound {
            Bound::AtMost(b) => format!("<= {b:.1e}"),
            Bound::Above(b) => format!("> {b}"),
        };
        write!(f, "[{status}] {:<9} {:<52} {:.3e} ({bound})", self.suite, self.name, self.value)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

struct Collector {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Collector {
    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check { suite: self.suite, name: name.into(), value, bound: Bound::AtMost(bound) });
    }

    fn above(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check { suite: self.suite, name: name.into(), value, bound: Bound::Above(bound) });
    }
}

pub fn run(suite: Suite) -> Result<Report> {
    let mut report = Report::default();
    for part in suite.parts() {
        let mut c = Collector { suite: part.name(), checks: Vec::new() };
        match part {
            Suite::Algebra => algebra_suite(&mut c)?,
            Suite::Dynamics => dynamics_suite(&mut c)?,
            Suite::RelPhase => relphase_suite(&mut c)?,
            Suite::Oracle => oracle_suite(&mut c)?,
            Suite::All => unreachable!("expanded above"),
        }
        report.checks.extend(c.checks);
    }
    Ok(report)
}

/// Largest deviation of the spectrum of a unitary normal `E` from
/// `{1, i, −i}`, read off the Hermitian parts `(E + E†)/2` and `(E − E†)/2i`.
pub fn phase_spectrum_residual(e: &DMatrix<C64>) -> Result<f64> {
    let adj = e.adjoint();
    let cos = (e + &adj) * C64::new(0.5, 0.0);
    let sin = (e - &adj) * C64::new(0.0, -0.5);
    let mut cos_vals = eigen::eigh(&cos)?.values;
    let mut sin_vals = eigen::eigh(&sin)?.values;
    cos_vals.sort_by(f64::total_cmp);
    sin_vals.sort_by(f64::total_cmp);
    let d = |got: &[f64], want: [f64; 3]| got.iter().zip(want).fold(0.0_f64, |a, (g, w)| a.max((g - w).abs()));
    let normal = (e * &adj - &adj * e).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    Ok(d(&cos_vals, [0.0, 0.0, 1.0]).max(d(&sin_vals, [-1.0, 0.0, 1.0])).max(normal))
}

fn to_dmatrix(op: &AtomOperator) -> DMatrix<C64> {
    DMatrix::from_iterator(3, 3, op.matrix().iter().copied())
}

fn algebra_suite(c: &mut Collector) -> Result<()> {
    let mut table = 0.0_f64;
    for i in 1..=3 {
        for j in 1..=3 {
            for k in 1..=3 {
                for l in 1..=3 {
                    let lhs = generator(i, j)?.commutator(&generator(k, l)?);
                    let mut rhs = AtomOperator::zero();
                    if i == l {
                        rhs = rhs + generator(k, j)?;
                    }
                    if k == j {
                        rhs = rhs - generator(i, l)?;
                    }
                    table = table.max(lhs.distance(&rhs));
                }
            }
        }
    }
    c.at_most("u(3) commutator table", table, 0.0);

    let s13p = raising(Level::One, Level::Three);
    let s23p = raising(Level::Two, Level::Three);
    let s23m = lowering(Level::Two, Level::Three);
    let s12p = raising(Level::One, Level::Two);
    c.at_most("[S13+, S23-] = -S12+", s13p.commutator(&s23m).distance(&(-s12p)), 0.0);
    c.at_most("[S13+, S23+] = 0", s13p.commutator(&s23p).distance(&AtomOperator::zero()), 0.0);

    for t in [Transition::OneThree, Transition::TwoThree] {
        c.at_most(format!("polar identity {t}"), verify_polar_identity(t)?, 1e-14);
        let e = phase_exponential(t)?;
        c.at_most(format!("E{t} unitarity"), e.unitarity_defect(), 1e-15);
        c.at_most(format!("E{t} spectrum {{1, i, -i}}"), phase_spectrum_residual(&to_dmatrix(&e))?, 1e-12);
        let sys = phase_eigensystem(t)?;
        let mut eig = 0.0_f64;
        let mut ortho = 0.0_f64;
        for (a, la) in PhaseLabel::ALL.iter().enumerate() {
            let v = sys.vector(*la);
            let want = v * C64::from_polar(1.0, sys.eigenvalues[a]);
            eig = eig.max((e.apply(v) - want).camax());
            for lb in PhaseLabel::ALL {
                let ip = v.dotc(sys.vector(lb));
                let target = if *la == lb { 1.0 } else { 0.0 };
                ortho = ortho.max((ip - C64::new(target, 0.0)).norm());
            }
        }
        let labels = sys.eigenvalues;
        let exact = [0.0, FRAC_PI_2, -FRAC_PI_2];
        let label_err = labels.iter().zip(exact).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        c.at_most(format!("eigenvalues of phi{t} are 0, +pi/2, -pi/2"), label_err, 0.0);
        c.at_most(format!("E{t} v = exp(i phi) v"), eig, 1e-12);
        c.at_most(format!("eigenvectors of E{t} orthonormal"), ortho, 1e-12);
    }
    c.above("E13 E23^dagger differs from E12 form", noncomposition_witness(), 0.5);
    Ok(())
}

fn dynamics_suite(c: &mut Collector) -> Result<()> {
    let tail = (0..=truncation_cutoff(50.0, 1e-10)?)
        .map(|n| poisson_weight(50.0, n).map(|q| q * q))
        .sum::<Result<f64>>()?;
    c.at_most("Poisson weights up to cutoff sum to 1 - eps", (1.0 - tail).max(0.0), 1e-10);

    let mut p = SystemParams::resonant(1.0, 50.0, 50.0, SystemParams::ground(Level::One));
    let t_max = tau_to_time(3.0, p.g_a, p.nbar_a);
    let mut unitarity = 0.0_f64;
    let mut group = 0.0_f64;
    for &(na, nb) in &[(1, 1), (3, 0), (0, 4), (20, 35), (50, 50), (90, 101)] {
        let h = block_hamiltonian(&p, &subspace_basis(SubspaceIndex::new(na, nb)))?;
        let u = block_evolution(&h, t_max)?;
        unitarity = unitarity.max(u.unitarity_defect());
        let (t1, t2) = (0.37 * t_max, 0.41 * t_max);
        let prod = block_evolution(&h, t1)?.matrix * block_evolution(&h, t2)?.matrix;
        let whole = block_evolution(&h, t1 + t2)?.matrix;
        group = group.max((prod - whole).iter().fold(0.0, |a: f64, z| a.max(z.norm())));
    }
    c.at_most("block unitarity at tau = 3, nbar = 50", unitarity, 1e-12);
    c.at_most("group property U(t1)U(t2) = U(t1+t2)", group, 1e-10);

    p.delta_a = 0.3;
    p.g_b = 0.8;
    let s0 = initial_state(&p)?;
    let mut norm = (s0.norm() - 1.0).abs();
    let mut weights = 0.0_f64;
    let mut reversal = 0.0_f64;
    let w0 = s0.subspace_weights();
    for k in 1..=4 {
        let t = t_max * k as f64 / 4.0;
        let s = evolve(&s0, &p, t)?;
        norm = norm.max((s.norm() - 1.0).abs());
        for (idx, w) in s.subspace_weights() {
            weights = weights.max((w - w0[&idx]).abs());
        }
        let back = evolve_backward(&s, &p, t)?;
        for (idx, v) in back.amplitudes() {
            let orig = s0.subspace(*idx).expect("same subspaces");
            for (x, y) in v.iter().zip(orig) {
                reversal = reversal.max((x - y).norm());
            }
        }
    }
    c.at_most("global norm conservation", norm, 1e-10);
    c.at_most("subspace weights conserved", weights, 1e-12);
    c.at_most("time reversal", reversal, 1e-10);
    Ok(())
}

fn relphase_suite(c: &mut Collector) -> Result<()> {
    for (name, r) in deformed_algebra_residuals(4)? {
        c.at_most(format!("deformed {name}"), r, 1e-12);
    }
    let mut polar = 0.0_f64;
    let mut spectrum = 0.0_f64;
    for &(na, nb) in &[(1, 1), (2, 5), (17, 3), (50, 50)] {
        let idx = SubspaceIndex::new(na, nb);
        polar = polar.max(verify_deformed_polar(idx)?);
        for t in Transition::ALL {
            spectrum = spectrum.max(phase_spectrum_residual(&block_phase_exponential(t, idx)?.matrix)?);
        }
    }
    c.at_most("deformed polar identity", polar, 1e-12);
    c.at_most("relative-phase spectrum {1, i, -i}", spectrum, 1e-12);

    let mut complete = 0.0_f64;
    for t in Transition::ALL {
        for na in 0..6 {
            for nb in 0..6 {
                if na == 0 && nb == 0 {
                    continue;
                }
                let e = rel_phase_eigenstates(t, SubspaceIndex::new(na, nb))?;
                let n = e.basis.dim();
                let dev = e.projector_sum() - DMatrix::<C64>::identity(n, n);
                complete = complete.max(dev.iter().fold(0.0, |a: f64, z| a.max(z.norm())));
            }
        }
    }
    c.at_most("eigenstate completeness per block", complete, 1e-12);

    let mut p = SystemParams::resonant(1.0, 6.0, 3.0, [C64::new(0.6, 0.0), C64::new(0.0, 0.64), C64::new(0.48, 0.0)]);
    p.delta_b = -0.4;
    p.g_b = 1.2;
    let s0 = initial_state(&p)?;
    let mut closed = 0.0_f64;
    let mut sums = 0.0_f64;
    let mut pops = 0.0_f64;
    for k in 0..8 {
        let t = PI * k as f64;
        let s = evolve(&s0, &p, t)?;
        let levels = s.level_populations();
        for tr in Transition::ALL {
            let proj = marginal_distribution(&s, tr)?;
            closed = closed.max(proj.max_diff(&closed_form_marginal(&p, tr, t)?));
            sums = sums.max((proj.total() - 1.0).abs());
            pops = pops.max((proj.p0 - levels[tr.roles().spectator.index()]).abs());
        }
    }
    c.at_most("projection = closed form", closed, 1e-10);
    c.at_most("completeness of marginals", sums, 1e-10);
    c.at_most("P(Phi0) = spectator population", pops, 1e-10);
    Ok(())
}

fn oracle_suite(c: &mut Collector) -> Result<()> {
    let p = SystemParams::resonant(1.0, 1.0, 1.0, SystemParams::ground(Level::One));
    let times: Vec<f64> = (0..50).map(|k| tau_to_time(2.0 * k as f64 / 49.0, p.g_a, p.nbar_a)).collect();
    let r = compare_block_and_full(&p, 8, 8, &times)?;
    c.at_most("full Hamiltonian Hermitian", r.hermiticity, 1e-14);
    c.at_most("[H, N_a] = [H, N_b] = 0", r.commutator, 1e-12);
    c.at_most("block vs full amplitudes", r.max_amplitude_diff, 1e-8);
    c.at_most("full-space norm drift", r.max_norm_drift, 1e-10);
    c.at_most("<N_a>, <N_b> drift", r.max_excitation_drift, 1e-8);
    Ok(())
}
