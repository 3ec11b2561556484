//! Complex-amplitude representation of multimode coherent states and the
//! linear maps acting on them.
//!
//! A product of coherent states `|α_1>|α_2>...|α_M>` is fully described by
//! its amplitude vector, and any passive network of beamsplitters and phase
//! shifters maps it to another product coherent state whose amplitude
//! vector is `L · α` for a complex matrix `L`. Everything here works on that
//! parameterization; no Fock-space vectors are ever built.
//!
//! Amplitudes are dimensionless quadrature units. Measurement noise scales
//! are carried separately by [`crate::transceiver::NoiseModel`].

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Tolerance on `max |L L^H - I|` for a matrix to count as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// A single-mode coherent amplitude `α = |α| e^{iθ}`. Never NaN or infinite.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexAmp(Complex64);

impl ComplexAmp {
    pub const ZERO: ComplexAmp = ComplexAmp(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::try_from(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(re, 0.0)
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        Self::try_from(Complex64::from_polar(magnitude, phase))
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Mean photon number `|α|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    /// Phase in `(-π, π]`.
    pub fn arg(&self) -> f64 {
        self.0.arg()
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

impl TryFrom<Complex64> for ComplexAmp {
    type Error = Error;

    fn try_from(z: Complex64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(ComplexAmp(z))
        } else {
            Err(Error::NonFinite)
        }
    }
}

impl From<ComplexAmp> for Complex64 {
    fn from(a: ComplexAmp) -> Self {
        a.0
    }
}

impl fmt::Display for ComplexAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.0.re, self.0.im)
    }
}

/// Amplitudes of an `M`-mode pulse group, one per frequency mode.
/// The length is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeWord {
    amps: Vec<ComplexAmp>,
}

impl CodeWord {
    pub fn new(amps: Vec<ComplexAmp>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("codeword needs at least one mode"));
        }
        Ok(CodeWord { amps })
    }

    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        let amps = values
            .iter()
            .map(|&z| ComplexAmp::try_from(z))
            .collect::<Result<Vec<_>>>()?;
        Self::new(amps)
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexAmp> {
        self.amps.iter()
    }

    /// Euclidean norm of the amplitude vector (square root of total mean photon number).
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_iterator(self.len(), self.amps.iter().map(|a| a.value()))
    }
}

impl Index<usize> for CodeWord {
    type Output = ComplexAmp;

    fn index(&self, i: usize) -> &ComplexAmp {
        &self.amps[i]
    }
}

/// Square complex matrix acting on amplitude vectors, `α_out = L α_in`.
///
/// General entries `r_jk e^{iθ_jk}` are allowed; only unitary matrices can be
/// inverted by [`inverse_unitary`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    entries: DMatrix<Complex64>,
}

impl SymplecticMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SymplecticMatrix { entries })
    }

    /// Build from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `max |(L L^H - I)_jk|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let product = &self.entries * self.entries.adjoint();
        let residual = product - DMatrix::<Complex64>::identity(n, n);
        residual.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARY_TOL
    }
}

/// Overlap `<a|b> = exp(-|a|²/2 - |b|²/2 + a* b)` of two coherent states.
pub fn coherent_inner_product(a: ComplexAmp, b: ComplexAmp) -> Complex64 {
    let (a, b) = (a.value(), b.value());
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}

/// Matrix-vector product `L · cw`.
pub fn apply_symplectic(l: &SymplecticMatrix, cw: &CodeWord) -> Result<CodeWord> {
    if l.dim() != cw.len() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            got: cw.len(),
        });
    }
    let out = &l.entries * cw.to_vector();
    CodeWord::from_complex(out.as_slice())
}

/// `diag(e^{iθ_1}, ..., e^{iθ_M})`.
pub fn diagonal_phase_matrix(phases: &[f64]) -> Result<SymplecticMatrix> {
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite);
    }
    let diag = DVector::from_iterator(phases.len(), phases.iter().map(|&p| Complex64::from_polar(1.0, p)));
    SymplecticMatrix::new(DMatrix::from_diagonal(&diag))
}

/// Conjugate transpose of a unitary matrix.
pub fn inverse_unitary(l: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    let defect = l.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    SymplecticMatrix::new(l.entries.adjoint())
}
