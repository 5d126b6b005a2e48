//! Eigendecomposition of small dense Hermitian matrices.
//!
//! Three-dimensional blocks use the trigonometric solution of the
//! characteristic cubic with eigenvectors from row cross products. When two
//! eigenvalues are closer than [`DEGENERACY_REL_GAP`] (relative to the
//! spectral scale) the closed form loses accuracy and the cyclic complex
//! Jacobi method is used instead. Other sizes go straight to Jacobi.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative eigenvalue separation below which the closed form is abandoned.
pub const DEGENERACY_REL_GAP: f64 = 1e-9;

/// Inputs whose anti-Hermitian part exceeds this (relative) are rejected.
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        self.map(|x| C64::new(f(x), 0.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        let out = &scaled * self.vectors.adjoint();
        debug_assert_eq!(out.nrows(), n);
        out
    }
}

/// Largest entry of `|M - M†|`, relative to `max(1, max|M|)`.
pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let scale = m.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn eigh(m: &DMatrix<C64>) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotHermitian(f64::INFINITY));
    }
    let dev = hermitian_deviation(m);
    if !(dev <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian(dev));
    }
    match m.nrows() {
        0 => Ok(HermitianEigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        }),
        1 => Ok(HermitianEigen {
            values: vec![m[(0, 0)].re],
            vectors: DMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
        }),
        3 => match closed_form_3x3(m) {
            Some(e) => Ok(e),
            None => jacobi(m),
        },
        _ => jacobi(m),
    }
}

fn cross(u: [C64; 3], w: [C64; 3]) -> [C64; 3] {
    [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ]
}

fn norm3(v: &[C64; 3]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn null_vector(m: &DMatrix<C64>, lam: f64) -> Option<[C64; 3]> {
    let row = |i: usize| {
        let mut r = [m[(i, 0)], m[(i, 1)], m[(i, 2)]];
        r[i] -= lam;
        r
    };
    let (r0, r1, r2) = (row(0), row(1), row(2));
    let best = [cross(r0, r1), cross(r0, r2), cross(r1, r2)]
        .into_iter()
        .max_by(|a, b| norm3(a).total_cmp(&norm3(b)))?;
    let n = norm3(&best);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(best.map(|z| z / n))
}

fn closed_form_3x3(m: &DMatrix<C64>) -> Option<HermitianEigen> {
    let (a, b, c) = (m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re);
    let (d, e, f) = (m[(0, 1)], m[(0, 2)], m[(1, 2)]);
    let off = d.norm_sqr() + e.norm_sqr() + f.norm_sqr();
    if off == 0.0 {
        return Some(sorted(vec![a, b, c], DMatrix::identity(3, 3)));
    }

    let q = (a + b + c) / 3.0;
    let p = (((a - q).powi(2) + (b - q).powi(2) + (c - q).powi(2) + 2.0 * off) / 6.0).sqrt();
    let (a1, b1, c1) = ((a - q) / p, (b - q) / p, (c - q) / p);
    let (d1, e1, f1) = (d / p, e / p, f / p);
    let det = a1 * b1 * c1 + 2.0 * (d1 * f1 * e1.conj()).re
        - a1 * f1.norm_sqr()
        - b1 * e1.norm_sqr()
        - c1 * d1.norm_sqr();
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;

    let scale = hi.abs().max(lo.abs()).max(mid.abs());
    if (hi - mid).min(mid - lo) <= DEGENERACY_REL_GAP * scale {
        return None;
    }

    let v_hi = null_vector(m, hi)?;
    let mut v_lo = null_vector(m, lo)?;
    let overlap: C64 = (0..3).map(|k| v_hi[k].conj() * v_lo[k]).sum();
    for k in 0..3 {
        v_lo[k] -= overlap * v_hi[k];
    }
    let n = norm3(&v_lo);
    v_lo = v_lo.map(|z| z / n);
    let mut v_mid = cross(v_hi, v_lo).map(|z| z.conj());
    let n = norm3(&v_mid);
    v_mid = v_mid.map(|z| z / n);

    let vectors = DMatrix::from_fn(3, 3, |i, j| [v_lo, v_mid, v_hi][j][i]);
    let eig = HermitianEigen {
        values: vec![lo, mid, hi],
        vectors,
    };
    // Reject (and fall back) if the cross products were poorly conditioned.
    let resid = residual(m, &eig);
    if resid > 1e-13 * scale.max(1.0) {
        return None;
    }
    Some(eig)
}

/// Max entry of `|M V - V Λ|` plus max entry of `|V†V - I|`.
pub fn residual(m: &DMatrix<C64>, eig: &HermitianEigen) -> f64 {
    let n = eig.dim();
    let mv = m * &eig.vectors;
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            worst = worst.max((mv[(i, j)] - eig.vectors[(i, j)] * eig.values[j]).norm());
        }
    }
    let gram = eig.vectors.adjoint() * &eig.vectors;
    let mut ortho = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((gram[(i, j)] - target).norm());
        }
    }
    worst + ortho
}

fn sorted(values: Vec<f64>, vectors: DMatrix<C64>) -> HermitianEigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let n = values.len();
    HermitianEigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]),
    }
}

/// Cyclic Jacobi with complex plane rotations.
pub fn jacobi(m: &DMatrix<C64>) -> Result<HermitianEigen> {
    let n = m.nrows();
    let mut a = m.clone();
    // Symmetrize so rounding in the input cannot stall convergence.
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            let values = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok(sorted(values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let h = apq.norm();
                if h == 0.0 {
                    continue;
                }
                let phase = C64::from_polar(1.0, -apq.arg());
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * h);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut rot = DMatrix::<C64>::identity(n, n);
                rot[(p, p)] = C64::new(c, 0.0);
                rot[(p, q)] = C64::new(s, 0.0);
                rot[(q, p)] = -phase * s;
                rot[(q, q)] = phase * c;
                a = rot.adjoint() * &a * &rot;
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                v = &v * &rot;
            }
        }
    }
    Err(Error::EigenFailure)
}
