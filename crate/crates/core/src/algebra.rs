//! The nine u(3) generators of a bare three-level atom and the phase operators
//! obtained by polar decomposition of the dipole ladder operators.
//!
//! Generators follow `S^{ij} = |j⟩⟨i|`, so `S^{ij}` moves the atom from level
//! `i` to level `j`. Raising operators are `S_+^{ij} = S^{ij}` for `j > i` and
//! lowering operators `S_-^{ij} = S^{ji}`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::levels::{Level, PhaseLabel, Transition};

/// Density-matrix validation tolerance.
pub const RHO_TOL: f64 = 1e-12;

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A 3×3 operator on the atomic levels, rows and columns indexed by level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomOperator(pub Matrix3<C64>);

impl AtomOperator {
    pub fn zero() -> Self {
        AtomOperator(Matrix3::zeros())
    }

    pub fn identity() -> Self {
        AtomOperator(Matrix3::identity())
    }

    /// `|to⟩⟨from|`
    pub fn ket_bra(to: Level, from: Level) -> Self {
        let mut m = Matrix3::zeros();
        m[(to.index(), from.index())] = ONE;
        AtomOperator(m)
    }

    pub fn matrix(&self) -> &Matrix3<C64> {
        &self.0
    }

    pub fn entry(&self, row: Level, col: Level) -> C64 {
        self.0[(row.index(), col.index())]
    }

    pub fn adjoint(&self) -> Self {
        AtomOperator(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        AtomOperator(self.0 * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &Vector3<C64>) -> Vector3<C64> {
        self.0 * v
    }

    /// Max-entry distance.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Max-entry distance of `A A†` and `A† A` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let id = AtomOperator::identity();
        let aad = AtomOperator(self.0 * self.0.adjoint());
        let ada = AtomOperator(self.0.adjoint() * self.0);
        aad.distance(&id).max(ada.distance(&id))
    }

    fn to_dmatrix(self) -> DMatrix<C64> {
        DMatrix::from_fn(3, 3, |i, j| self.0[(i, j)])
    }
}

impl Add for AtomOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        AtomOperator(self.0 + rhs.0)
    }
}

impl Sub for AtomOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        AtomOperator(self.0 - rhs.0)
    }
}

impl Neg for AtomOperator {
    type Output = Self;
    fn neg(self) -> Self {
        AtomOperator(-self.0)
    }
}

impl Mul for AtomOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        AtomOperator(self.0 * rhs.0)
    }
}

/// `S^{ij} = |j⟩⟨i|` for level numbers `i, j ∈ {1, 2, 3}`.
pub fn generator(i: usize, j: usize) -> Result<AtomOperator> {
    let from = Level::from_number(i)?;
    let to = Level::from_number(j)?;
    Ok(AtomOperator::ket_bra(to, from))
}

fn gen(from: Level, to: Level) -> AtomOperator {
    AtomOperator::ket_bra(to, from)
}

/// `S_+^{ij}` for `i < j`: the upward transition `i → j`.
pub fn raising(lower: Level, upper: Level) -> AtomOperator {
    debug_assert!(lower < upper);
    gen(lower, upper)
}

/// `S_-^{ij} = (S_+^{ij})†` for `i < j`.
pub fn lowering(lower: Level, upper: Level) -> AtomOperator {
    debug_assert!(lower < upper);
    gen(upper, lower)
}

/// Inversion `S_z^{i3} = (S^{33} − S^{ii})/2` for the dipole transitions.
pub fn inversion(transition: Transition) -> Result<AtomOperator> {
    let lower = match transition {
        Transition::OneThree => Level::One,
        Transition::TwoThree => Level::Two,
        Transition::OneTwo => return Err(Error::UnsupportedTransition("12")),
    };
    Ok((gen(Level::Three, Level::Three) - gen(lower, lower)).scale(C64::new(0.5, 0.0)))
}

fn dipole(transition: Transition) -> Result<crate::levels::Roles> {
    match transition {
        Transition::OneTwo => Err(Error::UnsupportedTransition("12")),
        t => Ok(t.roles()),
    }
}

/// The unitary phase exponential `E_φ` of a dipole transition, with the
/// convention `e^{iφ₀'} = −1`:
/// `E^{13} = |1⟩⟨3| − |3⟩⟨1| + |2⟩⟨2|` and `E^{23} = |2⟩⟨3| − |3⟩⟨2| + |1⟩⟨1|`.
pub fn phase_exponential(transition: Transition) -> Result<AtomOperator> {
    let r = dipole(transition)?;
    Ok(phase_exponential_from_roles(r))
}

pub(crate) fn phase_exponential_from_roles(r: crate::levels::Roles) -> AtomOperator {
    AtomOperator::ket_bra(r.partner, r.upper) - AtomOperator::ket_bra(r.upper, r.partner)
        + AtomOperator::ket_bra(r.spectator, r.spectator)
}

/// Eigenvalues (`0, +π/2, −π/2`, in that order) and eigenvectors of a phase operator.
#[derive(Clone, Debug)]
pub struct PhaseEigensystem {
    pub transition: Transition,
    pub eigenvalues: [f64; 3],
    pub eigenvectors: [Vector3<C64>; 3],
}

impl PhaseEigensystem {
    pub fn vector(&self, label: PhaseLabel) -> &Vector3<C64> {
        &self.eigenvectors[label as usize]
    }
}

/// Phase eigenstates in the bare atom: the spectator level for `0` and
/// `(|3⟩ ∓ i|lower⟩)/√2` for `±π/2`.
pub fn phase_eigensystem(transition: Transition) -> Result<PhaseEigensystem> {
    let r = dipole(transition)?;
    Ok(eigensystem_from_roles(transition, r))
}

pub(crate) fn eigensystem_from_roles(transition: Transition, r: crate::levels::Roles) -> PhaseEigensystem {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let basis = |l: Level| {
        let mut v = Vector3::zeros();
        v[l.index()] = ONE;
        v
    };
    let zero = basis(r.spectator);
    let plus = (basis(r.upper) - basis(r.partner) * I) * h;
    let minus = (basis(r.upper) + basis(r.partner) * I) * h;
    PhaseEigensystem {
        transition,
        eigenvalues: PhaseLabel::ALL.map(PhaseLabel::angle),
        eigenvectors: [zero, plus, minus],
    }
}

/// The Hermitian phase operator `φ̂ = Σ_r φ_r |φ_r⟩⟨φ_r|`.
pub fn phase_operator(transition: Transition) -> Result<AtomOperator> {
    let sys = phase_eigensystem(transition)?;
    let mut m = Matrix3::zeros();
    for (v, &phi) in sys.eigenvectors.iter().zip(&sys.eigenvalues) {
        m += v * v.adjoint() * C64::new(phi, 0.0);
    }
    Ok(AtomOperator(m))
}

/// Max-entry residual of `S_- − √(S_- S_+) E_φ`.
///
/// `S_- S_+` is the projector onto the lower level, so its square root is
/// taken entrywise on the diagonal and is exact.
pub fn verify_polar_identity(transition: Transition) -> Result<f64> {
    let r = dipole(transition)?;
    let lower = r.partner;
    let minus = lowering(lower, Level::Three);
    let plus = raising(lower, Level::Three);
    let modulus_sq = minus * plus;
    let mut root = Matrix3::zeros();
    let mut off_diag = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let z = modulus_sq.0[(i, j)];
            if i == j {
                root[(i, i)] = C64::new(z.re.max(0.0).sqrt(), 0.0);
            } else {
                off_diag = off_diag.max(z.norm());
            }
        }
    }
    let e = phase_exponential(transition)?;
    Ok((minus - AtomOperator(root) * e).0.iter().fold(off_diag, |acc, z| acc.max(z.norm())))
}

/// A validated atomic density matrix.
#[derive(Clone, Copy, Debug)]
pub struct AtomicDensityMatrix(Matrix3<C64>);

impl AtomicDensityMatrix {
    pub fn new(m: Matrix3<C64>) -> Result<Self> {
        let herm = (m - m.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if herm > RHO_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > RHO_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = eigen::eigh(&AtomOperator(sym).to_dmatrix())
            .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
        if eig.values[0] < -RHO_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {}",
                eig.values[0]
            )));
        }
        Ok(AtomicDensityMatrix(m))
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(psi: [C64; 3]) -> Result<Self> {
        let v = Vector3::from(psi);
        Self::new(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Matrix3<C64> {
        &self.0
    }
}

/// `P(φ_r) = Tr[ρ |φ_r⟩⟨φ_r|]` in the order `0, +π/2, −π/2`.
pub fn phase_probabilities(transition: Transition, rho: &AtomicDensityMatrix) -> Result<[f64; 3]> {
    let sys = phase_eigensystem(transition)?;
    Ok(sys.eigenvectors.map(|v| (v.adjoint() * rho.0 * v)[(0, 0)].re))
}

/// Mean of `F(φ̂)`: `Σ_r F(φ_r) P(φ_r)`.
pub fn phase_function_mean(
    f: impl Fn(f64) -> f64,
    transition: Transition,
    rho: &AtomicDensityMatrix,
) -> Result<f64> {
    let p = phase_probabilities(transition, rho)?;
    Ok(PhaseLabel::ALL.iter().zip(p).map(|(l, p)| f(l.angle()) * p).sum())
}

/// `|1⟩⟨2| − |2⟩⟨1| + |3⟩⟨3|`: the form a 1↔2 phase exponential would take
/// under the same convention.
pub fn one_two_exponential_form() -> AtomOperator {
    phase_exponential_from_roles(Transition::OneTwo.roles())
}

/// Max-entry distance between `E^{13} (E^{23})†` and the 1↔2 exponential form.
///
/// Phases of separate transitions do not compose: the product is a signed
/// cyclic permutation with a vanishing `(3,3)` entry, so it differs from any
/// operator of that form by at least one in some entry.
pub fn noncomposition_witness() -> f64 {
    let e13 = phase_exponential(Transition::OneThree).expect("13 is a dipole transition");
    let e23 = phase_exponential(Transition::TwoThree).expect("23 is a dipole transition");
    (e13 * e23.adjoint()).distance(&one_two_exponential_form())
}
