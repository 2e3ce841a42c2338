//! Weil operator data and polarization positivity checks.
//!
//! The Weil operator is supplied as rational square blocks `C_l` on each
//! degree, subject to `C_l^2 = (-1)^l` and commutation with the package
//! operators. Positivity of a polarization is then the exact statement that
//! `sign * G(x, Cy)` is symmetric positive definite, decided by `signature`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graded::{CheckOutcome, GradedSpace};
use crate::inertia::signature;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::Subspace;

#[derive(Clone, Debug)]
pub struct WeilOperator<T> {
    pub space: GradedSpace,
    pub blocks: BTreeMap<usize, Matrix<T>>,
}

impl<T: Scalar> WeilOperator<T> {
    pub fn new(space: GradedSpace, blocks: BTreeMap<usize, Matrix<T>>) -> Result<Self> {
        for l in space.degrees() {
            let d = space.dim(l);
            if d == 0 {
                continue;
            }
            let block = blocks
                .get(&l)
                .ok_or_else(|| Error::InvalidPackage(format!("missing Weil block at degree {l}")))?;
            if (block.rows(), block.cols()) != (d, d) {
                return Err(Error::ShapeMismatch {
                    context: "Weil block",
                    left: (d, d),
                    right: (block.rows(), block.cols()),
                });
            }
        }
        Ok(WeilOperator { space, blocks })
    }

    /// Identity blocks: every class of pure type (p, p).
    pub fn identity(space: GradedSpace) -> Self {
        let blocks = space
            .degrees()
            .filter(|&l| space.dim(l) > 0)
            .map(|l| (l, Matrix::identity(space.dim(l))))
            .collect();
        WeilOperator { space, blocks }
    }

    pub fn block(&self, l: usize) -> Matrix<T> {
        self.blocks
            .get(&l)
            .cloned()
            .unwrap_or_else(|| Matrix::identity(self.space.dim(l)))
    }

    pub fn total(&self) -> Matrix<T> {
        let dim = self.space.total_dim();
        let mut m = Matrix::zeros(dim, dim);
        for l in self.space.degrees() {
            if self.space.dim(l) == 0 {
                continue;
            }
            m.set_block(self.space.offset(l), self.space.offset(l), &self.block(l));
        }
        m
    }

    /// `C_l^2 = (-1)^l` on every degree, plus commutation with the listed
    /// operators (which are then automatically filtration-compatible).
    pub fn check(&self, operators: &[(&str, Matrix<T>)]) -> CheckOutcome {
        for l in self.space.degrees() {
            if self.space.dim(l) == 0 {
                continue;
            }
            let block = self.block(l);
            let square = &block * &block;
            let expected = if l % 2 == 0 {
                Matrix::identity(self.space.dim(l))
            } else {
                -&Matrix::identity(self.space.dim(l))
            };
            if square != expected {
                return CheckOutcome::Fail {
                    witness: format!("C_{l}^2 != (-1)^{l} id"),
                };
            }
        }
        let total = self.total();
        for (name, op) in operators {
            let delta = &(&total * op) - &(op * &total);
            if !delta.is_zero() {
                return CheckOutcome::Fail {
                    witness: format!("C does not commute with {name}"),
                };
            }
        }
        CheckOutcome::Pass
    }
}

/// Restricts an endomorphism to an invariant subspace given by `basis`
/// columns, producing the matrix in that basis. Fails if the subspace is
/// not invariant.
pub fn restrict_endomorphism<T: Scalar>(
    op: &Matrix<T>,
    subspace: &Subspace<T>,
) -> Result<Matrix<T>> {
    let mapped = op.checked_mul(subspace.basis())?;
    subspace
        .basis()
        .solve(&mapped)
        .ok_or(Error::NotWeilStable)
}

/// Verifies that `expected_sign * G(x, C y)` is symmetric and positive
/// definite, where `G` and `C` are given on the same coordinates (already
/// restricted to the subspace under test).
pub fn polarization_check<T: Scalar>(
    gram: &Matrix<T>,
    weil: &Matrix<T>,
    expected_sign: i64,
) -> Result<CheckOutcome> {
    let sign = if expected_sign >= 0 { T::one() } else { -T::one() };
    let twisted = gram.checked_mul(weil)?.scale(&sign);
    for r in 0..twisted.rows() {
        for c in r + 1..twisted.cols() {
            if twisted[(r, c)] != twisted[(c, r)] {
                return Ok(CheckOutcome::Fail {
                    witness: format!(
                        "sign * G(x, Cy) is not symmetric at ({r}, {c}): {} vs {}",
                        twisted[(r, c)],
                        twisted[(c, r)]
                    ),
                });
            }
        }
    }
    let inertia = signature(&twisted)?;
    if inertia.is_positive_definite() {
        Ok(CheckOutcome::Pass)
    } else {
        Ok(CheckOutcome::Fail {
            witness: format!(
                "sign * G(x, Cy) has inertia (+{}, -{}, 0:{})",
                inertia.positive, inertia.negative, inertia.zero
            ),
        })
    }
}
