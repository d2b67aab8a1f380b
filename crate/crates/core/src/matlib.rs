//! Fixed-size 3×3 complex matrix kernel.
//!
//! Everything in the crate is three-dimensional, so this module carries its
//! own small dense type instead of a general linear-algebra backend. Hermitian
//! eigenvalues use the trigonometric solution of the characteristic cubic with
//! a cyclic Jacobi fallback near degenerate spectra; singular values come from
//! the eigenvalues of `M†M`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum entrywise deviation `|M - M†|` tolerated for Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Relative closeness to a repeated root at which the closed-form cubic hands
/// over to Jacobi iteration.
const DEGENERACY_TOL: f64 = 1e-14;

const JACOBI_MAX_SWEEPS: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 3×3 complex matrix, stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMat3 {
    entries: [[Complex64; 3]; 3],
}

/// The Schatten orders the kernel supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchattenOrder {
    /// Trace norm, the sum of singular values.
    One,
    /// Frobenius norm.
    Two,
    /// Operator norm, the largest singular value.
    Infinity,
}

impl ComplexMat3 {
    /// Builds a matrix, rejecting NaN or infinite entries.
    pub fn new(entries: [[Complex64; 3]; 3]) -> Result<Self> {
        for (i, row) in entries.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds a matrix with real entries.
    pub fn from_real(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(rows.map(|row| row.map(|x| Complex64::new(x, 0.0))))
    }

    pub fn zero() -> Self {
        Self { entries: [[ZERO; 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::diagonal([1.0, 1.0, 1.0])
    }

    /// Real diagonal matrix.
    pub fn diagonal(d: [f64; 3]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.entries[i][i] = Complex64::new(x, 0.0);
        }
        m
    }

    /// The rank-one matrix `|u⟩⟨v|`.
    pub fn outer(u: [Complex64; 3], v: [Complex64; 3]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = u[i] * v[j].conj();
            }
        }
        m
    }

    pub fn entries(&self) -> &[[Complex64; 3]; 3] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { entries: self.entries.map(|row| row.map(&f)) }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.entries[i][j] = f(self.entries[i][j], other.entries[i][j]);
            }
        }
        out
    }

    /// Standard matrix product `self · rhs`.
    pub fn multiply(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.entries[i][j] = self.entries[i][0] * rhs.entries[0][j]
                    + self.entries[i][1] * rhs.entries[1][j]
                    + self.entries[i][2] * rhs.entries[2][j];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.entries[i][j] = self.entries[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1] + self.entries[2][2]
    }

    /// Largest entry modulus.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs_entry()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Largest entry modulus of `M - M†`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `(M + M†) / 2`.
    pub fn symmetrized(&self) -> Self {
        (*self + self.adjoint()).scale_real(0.5)
    }

    /// Eigenvalues of a Hermitian matrix in descending order.
    ///
    /// The input is symmetrized before solving; it is rejected if it deviates
    /// from Hermitian by more than [`HERMITIAN_TOL`].
    pub fn hermitian_eigenvalues(&self) -> Result<[f64; 3]> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(self.symmetrized().eigenvalues_of_hermitian())
    }

    /// Eigenvalues of a Hermitian matrix by cyclic Jacobi iteration alone.
    ///
    /// Slower than [`hermitian_eigenvalues`](Self::hermitian_eigenvalues) but
    /// algebraically independent of the cubic formula.
    pub fn hermitian_eigenvalues_jacobi(&self) -> Result<[f64; 3]> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(jacobi_eigenvalues(self.symmetrized()))
    }

    /// Solver entry for matrices already known to be Hermitian up to rounding.
    pub(crate) fn eigenvalues_of_hermitian(&self) -> [f64; 3] {
        closed_form_eigenvalues(self).unwrap_or_else(|| jacobi_eigenvalues(*self))
    }

    /// Singular values in descending order, as square roots of the
    /// eigenvalues of `M†M` (negative rounding residue clamped to zero).
    pub fn singular_values(&self) -> [f64; 3] {
        let gram = self.adjoint().multiply(self).symmetrized();
        gram.eigenvalues_of_hermitian().map(|x| x.max(0.0).sqrt())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn schatten_norm(&self, order: SchattenOrder) -> f64 {
        match order {
            SchattenOrder::One => self.singular_values().iter().sum(),
            SchattenOrder::Two => self.frobenius_norm(),
            SchattenOrder::Infinity => self.singular_values()[0],
        }
    }
}

fn closed_form_eigenvalues(h: &ComplexMat3) -> Option<[f64; 3]> {
    let e = &h.entries;
    let q = (e[0][0].re + e[1][1].re + e[2][2].re) / 3.0;
    let d = [e[0][0].re - q, e[1][1].re - q, e[2][2].re - q];
    let off = e[0][1].norm_sqr() + e[0][2].norm_sqr() + e[1][2].norm_sqr();
    let p = ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + 2.0 * off) / 6.0).sqrt();

    let scale = h.max_abs_entry();
    if p <= DEGENERACY_TOL * scale || p == 0.0 {
        return None;
    }

    // det((H - qI) / p) for Hermitian H; the result is real.
    let b = [d[0] / p, d[1] / p, d[2] / p];
    let b01 = e[0][1] / p;
    let b02 = e[0][2] / p;
    let b12 = e[1][2] / p;
    let det = b[0] * b[1] * b[2] + 2.0 * (b01 * b12 * b02.conj()).re
        - b[0] * b12.norm_sqr()
        - b[1] * b02.norm_sqr()
        - b[2] * b01.norm_sqr();
    let r = (det / 2.0).clamp(-1.0, 1.0);
    if 1.0 - r.abs() < DEGENERACY_TOL {
        return None;
    }

    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    Some(sorted_descending([largest, middle, smallest]))
}

fn jacobi_eigenvalues(mut a: ComplexMat3) -> [f64; 3] {
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return [0.0; 3];
    }
    let threshold = scale * f64::EPSILON * 1e-3;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = a.entries[0][1].norm() + a.entries[0][2].norm() + a.entries[1][2].norm();
        if off <= threshold {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let beta = a.entries[p][q];
            let magnitude = beta.norm();
            if magnitude <= threshold / 3.0 {
                continue;
            }
            let phase = beta / magnitude;
            let alpha = a.entries[p][p].re;
            let gamma = a.entries[q][q].re;
            let theta = (gamma - alpha) / (2.0 * magnitude);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            // g = diag(1, conj(phase)) on the pivot pair followed by the rotation.
            let mut d = ComplexMat3::identity();
            d.entries[q][q] = phase.conj();
            let mut rot = ComplexMat3::identity();
            rot.entries[p][p] = Complex64::new(c, 0.0);
            rot.entries[p][q] = Complex64::new(s, 0.0);
            rot.entries[q][p] = Complex64::new(-s, 0.0);
            rot.entries[q][q] = Complex64::new(c, 0.0);
            let g = d.multiply(&rot);

            a = g.adjoint().multiply(&a).multiply(&g).symmetrized();
            a.entries[p][q] = ZERO;
            a.entries[q][p] = ZERO;
        }
    }
    sorted_descending([a.entries[0][0].re, a.entries[1][1].re, a.entries[2][2].re])
}

fn sorted_descending(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

impl Index<(usize, usize)> for ComplexMat3 {
    type Output = Complex64;

    fn index(&self, (row, col): (usize, usize)) -> &Complex64 {
        &self.entries[row][col]
    }
}

impl Add for ComplexMat3 {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.zip(&rhs, |x, y| x + y)
    }
}

impl Sub for ComplexMat3 {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self.zip(&rhs, |x, y| x - y)
    }
}

impl Neg for ComplexMat3 {
    type Output = Self;

    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

impl Mul for ComplexMat3 {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.multiply(&rhs)
    }
}

impl Mul<f64> for ComplexMat3 {
    type Output = Self;

    fn mul(self, rhs: f64) -> Self {
        self.scale_real(rhs)
    }
}

impl Default for ComplexMat3 {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for ComplexMat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

pub(crate) fn unit(i: usize) -> [Complex64; 3] {
    let mut v = [ZERO; 3];
    v[i] = ONE;
    v
}
