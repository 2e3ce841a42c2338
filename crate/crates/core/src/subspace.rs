//! Canonically represented subspaces of an ambient coordinate space, with the
//! lattice operations the filtration machinery is built on.
//!
//! A subspace is stored by the unique basis whose transpose is the reduced
//! row echelon form of any generating set. Two `Subspace` values are equal as
//! Rust values exactly when they are equal as subspaces, so filtration
//! comparisons reduce to `==`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace<T> {
    ambient_dim: usize,
    /// `ambient_dim x dim` matrix; columns are the canonical basis.
    basis: Matrix<T>,
}

impl<T: Scalar> Subspace<T> {
    /// The span of the columns of `generators`.
    pub fn span(generators: &Matrix<T>) -> Self {
        let ambient_dim = generators.rows();
        let (echelon, pivots) = generators.transpose().rref();
        let basis = Matrix::from_fn(ambient_dim, pivots.len(), |r, c| echelon[(c, r)].clone());
        Subspace { ambient_dim, basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::identity(ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Canonical basis, columns.
    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn contains_vector(&self, v: &[T]) -> bool {
        self.basis.solve(&Matrix::column(v.to_vec())).is_some()
    }

    pub fn contains(&self, other: &Subspace<T>) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.basis.solve(&other.basis).is_some()
    }

    fn check_ambient(&self, other: &Subspace<T>, context: &'static str) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::AmbientMismatch {
                context,
                left: self.ambient_dim,
                right: other.ambient_dim,
            });
        }
        Ok(())
    }

    /// Sum of subspaces.
    pub fn join(&self, other: &Subspace<T>) -> Result<Subspace<T>> {
        self.check_ambient(other, "join")?;
        Ok(Subspace::span(&self.basis.hstack(&other.basis)))
    }

    /// Intersection, via the kernel of the stacked system
    /// `[B_self | B_other] (x, -y)^T = 0`.
    pub fn meet(&self, other: &Subspace<T>) -> Result<Subspace<T>> {
        self.check_ambient(other, "meet")?;
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.ambient_dim));
        }
        let stacked = self.basis.hstack(&other.basis);
        let ker = kernel(&stacked);
        // first block of each kernel vector gives coefficients on our basis
        let top = ker.basis().block(0, 0, self.dim(), ker.dim());
        Ok(Subspace::span(&(&self.basis * &top)))
    }

    /// Orthogonal complement `{ v : u^T G v = 0 for all u in self }` under the
    /// bilinear form with Gram matrix `G`.
    pub fn perp(&self, gram: &Matrix<T>) -> Result<Subspace<T>> {
        if gram.rows() != self.ambient_dim || gram.cols() != self.ambient_dim {
            return Err(Error::ShapeMismatch {
                context: "perp",
                left: (self.ambient_dim, self.ambient_dim),
                right: (gram.rows(), gram.cols()),
            });
        }
        if gram.rank() != self.ambient_dim {
            return Err(Error::SingularForm);
        }
        Ok(kernel(&(&self.basis.transpose() * gram)))
    }

    /// Image of this subspace under a linear map.
    pub fn map_through(&self, map: &Matrix<T>) -> Result<Subspace<T>> {
        Ok(Subspace::span(&map.checked_mul(&self.basis)?))
    }

    /// Extends `self` by those canonical basis columns of `extra` that grow
    /// the span, returning the independent new columns in order.
    fn extension_columns(&self, extra: &Matrix<T>) -> Matrix<T> {
        let mut acc = self.basis.clone();
        let mut added = Matrix::zeros(self.ambient_dim, 0);
        let mut rank = self.dim();
        for c in 0..extra.cols() {
            let col = Matrix::column(extra.column_vec(c));
            let candidate = acc.hstack(&col);
            if candidate.rank() > rank {
                rank += 1;
                acc = candidate;
                added = added.hstack(&col);
            }
        }
        added
    }

    /// Quotient data for `self / sub`.
    ///
    /// `projection` is a `q x ambient` matrix computing quotient coordinates
    /// of vectors of `self`; `section` is an `ambient x q` matrix whose
    /// columns lift the chosen quotient basis back into `self`. They satisfy
    /// `projection * section = identity` and `projection * sub = 0`.
    pub fn quotient_map(&self, sub: &Subspace<T>) -> Result<QuotientMap<T>> {
        self.check_ambient(sub, "quotient")?;
        if !self.contains(sub) {
            return Err(Error::NotIncluded);
        }
        let section = sub.extension_columns(self.basis());
        let q = section.cols();
        let partial = sub.basis().hstack(&section);
        let completion = Subspace::span(&partial).extension_columns(&Matrix::identity(self.ambient_dim));
        let full = partial.hstack(&completion);
        debug_assert!(full.is_square());
        let inverse = full.inverse().expect("columns chosen independent");
        let projection = inverse.block(sub.dim(), 0, q, self.ambient_dim);
        Ok(QuotientMap { projection, section })
    }
}

/// Chosen coordinates for a quotient `V / U`, valid on vectors of `V`.
#[derive(Clone, Debug)]
pub struct QuotientMap<T> {
    pub projection: Matrix<T>,
    pub section: Matrix<T>,
}

impl<T: Scalar> QuotientMap<T> {
    pub fn dim(&self) -> usize {
        self.section.cols()
    }
}

/// Kernel `{ v : Mv = 0 }` in canonical form.
pub fn kernel<T: Scalar>(m: &Matrix<T>) -> Subspace<T> {
    let (echelon, pivots) = m.rref();
    let mut free = Vec::new();
    let mut pivot_iter = pivots.iter().peekable();
    for c in 0..m.cols() {
        if pivot_iter.peek() == Some(&&c) {
            pivot_iter.next();
        } else {
            free.push(c);
        }
    }
    let mut generators = Matrix::zeros(m.cols(), free.len());
    for (k, &f) in free.iter().enumerate() {
        generators[(f, k)] = T::one();
        for (row, &p) in pivots.iter().enumerate() {
            generators[(p, k)] = -echelon[(row, f)].clone();
        }
    }
    Subspace::span(&generators)
}

/// Column space of `M` in canonical form.
pub fn image<T: Scalar>(m: &Matrix<T>) -> Subspace<T> {
    Subspace::span(m)
}
