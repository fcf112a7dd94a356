//! Dense complex matrix carrier and vector helpers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

/// Column vector of complex amplitudes.
pub type StateVector = DVector<C64>;

/// Default cap on the number of entries a Kronecker product may allocate.
pub const DEFAULT_MAX_KRON_ENTRIES: u128 = 100_000_000;

/// Dense complex matrix with finite entries.
///
/// Storage is an `nalgebra::DMatrix` (column-major); the row-major
/// constructors and accessors convert at the boundary.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::try_from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
        let flat: Vec<C64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), ncols, &flat)
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn try_from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// Wraps an already-computed matrix. Used internally for results of
    /// arithmetic on validated operands.
    pub(crate) fn from_dmatrix_unchecked(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[StateVector]) -> Result<Self> {
        if cols.is_empty() {
            return Ok(Self::zeros(0, 0));
        }
        let n = cols[0].len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("columns have unequal length".into()));
        }
        Self::try_from_dmatrix(DMatrix::from_columns(cols))
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        Self(a * b.adjoint())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius inner product `tr(A† B)`.
    pub fn frobenius_inner(&self, other: &Self) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.0 * v
    }

    pub fn column(&self, j: usize) -> StateVector {
        self.0.column(j).into_owned()
    }

    pub fn column_vectors(&self) -> Vec<StateVector> {
        (0..self.cols()).map(|j| self.column(j)).collect()
    }

    /// `‖A − A†‖_F`
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, k: usize) -> Result<Self> {
        self.require_square("pow")?;
        let mut out = Self::identity(self.rows());
        for _ in 0..k {
            out = &out * self;
        }
        Ok(out)
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Column-stacking vectorization.
    pub fn vec(&self) -> StateVector {
        StateVector::from_column_slice(self.0.as_slice())
    }

    /// Inverse of [`vec`](Self::vec) for a `rows x cols` target.
    pub fn unvec(v: &StateVector, rows: usize, cols: usize) -> Result<Self> {
        if v.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "vector of length {} cannot be reshaped to {rows}x{cols}",
                v.len()
            )));
        }
        Ok(Self(DMatrix::from_column_slice(rows, cols, v.as_slice())))
    }

    pub(crate) fn require_square(&self, op: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{op} requires a square matrix, got {}x{}",
                self.rows(),
                self.cols()
            )))
        }
    }

    pub(crate) fn require_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{op}: shapes {:?} and {:?} differ",
                self.shape(),
                other.shape()
            )))
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?} [", self.shape())?;
        for i in 0..self.rows() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
        impl $trait<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

/// Serialized as an array of rows, each entry a `[re, im]` pair.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.0[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Kronecker product with the default size guard.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_limit(a, b, DEFAULT_MAX_KRON_ENTRIES)
}

pub fn kron_with_limit(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    max_entries: u128,
) -> Result<ComplexMatrix> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let entries = (ar * br) as u128 * (ac * bc) as u128;
    if entries > max_entries {
        return Err(Error::SizeLimit {
            entries,
            max: max_entries,
        });
    }
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a.0[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b.0[(k, l)];
                }
            }
        }
    }
    Ok(ComplexMatrix(out))
}

/// `⟨a, b⟩`, antilinear in the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> C64 {
    a.dotc(b)
}

/// `⟨v, X v⟩`
pub fn quadratic_form(x: &ComplexMatrix, v: &StateVector) -> C64 {
    v.dotc(&x.apply(v))
}

pub fn state_from_pairs(pairs: &[[f64; 2]]) -> StateVector {
    StateVector::from_iterator(pairs.len(), pairs.iter().map(|&[re, im]| C64::new(re, im)))
}

pub fn state_to_pairs(v: &StateVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Standard basis vector `e_k` of length `n`.
pub fn basis_vector(n: usize, k: usize) -> StateVector {
    let mut v = StateVector::zeros(n);
    v[k] = C64::new(1.0, 0.0);
    v
}
