//! Single-operator Lefschetz machinery on a weight filtration: graded pieces
//! with explicit section bases, the Lefschetz decomposition of each graded
//! piece, the induced forms `S^N_i`, and the self-duality check.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::graded::CheckOutcome;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::{kernel, Subspace};
use crate::weight::WeightFiltration;

/// A graded piece `Gr_i = W_i / W_{i-1}` with chosen coordinates.
/// `section` lifts the quotient basis into `W_i`; `projection` computes
/// quotient coordinates of vectors of `W_i`.
#[derive(Clone, Debug)]
pub struct GradedPiece<T> {
    pub index: i64,
    pub section: Matrix<T>,
    pub projection: Matrix<T>,
}

impl<T: Scalar> GradedPiece<T> {
    pub fn dim(&self) -> usize {
        self.section.cols()
    }
}

/// All graded pieces of a filtration, indexed by weight.
pub fn graded_pieces<T: Scalar>(f: &Filtration<T>) -> Result<BTreeMap<i64, GradedPiece<T>>> {
    let mut out = BTreeMap::new();
    for i in f.support() {
        let q = f.step(i).quotient_map(&f.step(i - 1))?;
        if q.dim() > 0 {
            out.insert(
                i,
                GradedPiece {
                    index: i,
                    section: q.section,
                    projection: q.projection,
                },
            );
        }
    }
    Ok(out)
}

fn piece_or_empty<T: Scalar>(
    pieces: &BTreeMap<i64, GradedPiece<T>>,
    ambient: usize,
    i: i64,
) -> GradedPiece<T> {
    pieces.get(&i).cloned().unwrap_or(GradedPiece {
        index: i,
        section: Matrix::zeros(ambient, 0),
        projection: Matrix::zeros(0, ambient),
    })
}

/// The Lefschetz decomposition `Gr_i = (+)_{l} N^{l-i} P^{-(2l-i)}`.
#[derive(Clone, Debug)]
pub struct LefschetzDecomposition<T> {
    /// Primitive subspaces `P^{-i} = Ker N^{i+1}` inside `Gr_i`, `i >= 0`,
    /// in graded coordinates.
    pub primitives: BTreeMap<i64, Subspace<T>>,
    /// For each weight `i`, the list of summands `(power t, home index s,
    /// subspace of Gr_i in graded coordinates)` where the summand is
    /// `N^t P^{-s}` with `s = i + 2t`.
    pub summands: BTreeMap<i64, Vec<(usize, i64, Subspace<T>)>>,
}

pub struct LefschetzEngine<T> {
    pub weight: WeightFiltration<T>,
    pub pieces: BTreeMap<i64, GradedPiece<T>>,
}

impl<T: Scalar> LefschetzEngine<T> {
    pub fn new(weight: WeightFiltration<T>) -> Result<Self> {
        let pieces = graded_pieces(&weight.filtration)?;
        Ok(LefschetzEngine { weight, pieces })
    }

    pub fn ambient_dim(&self) -> usize {
        self.weight.filtration.ambient_dim()
    }

    pub fn piece(&self, i: i64) -> GradedPiece<T> {
        piece_or_empty(&self.pieces, self.ambient_dim(), i)
    }

    /// The induced map `N^t : Gr_i -> Gr_{i-2t}` in graded coordinates.
    pub fn induced_power(&self, i: i64, t: usize) -> Matrix<T> {
        let source = self.piece(i);
        let target = self.piece(i - 2 * t as i64);
        let power = self.weight.operator.pow(t);
        &(&target.projection * &power) * &source.section
    }

    /// Lefschetz decomposition of every graded piece; verifies directness.
    pub fn lefschetz_decomposition(&self) -> Result<LefschetzDecomposition<T>> {
        let mut primitives = BTreeMap::new();
        let lo = self.pieces.keys().next().copied().unwrap_or(0);
        let hi = self.pieces.keys().next_back().copied().unwrap_or(0);
        for i in 0..=hi.max(0) {
            let piece = self.piece(i);
            if piece.dim() == 0 {
                continue;
            }
            let power_map = self.induced_power(i, i as usize + 1);
            let primitive = kernel(&power_map);
            if !primitive.is_zero() {
                primitives.insert(i, primitive);
            }
        }
        let mut summands: BTreeMap<i64, Vec<(usize, i64, Subspace<T>)>> = BTreeMap::new();
        for i in lo..=hi {
            let piece = self.piece(i);
            if piece.dim() == 0 {
                continue;
            }
            let mut list = Vec::new();
            let mut total = 0;
            let mut stacked = Matrix::zeros(piece.dim(), 0);
            for (&s, primitive) in &primitives {
                // N^t P^{-s} lands in Gr_i when s - 2t = i, and is zero once
                // the power exceeds the string length, i.e. unless |i| <= s
                if (s - i) % 2 != 0 || s < i.abs() {
                    continue;
                }
                let t = ((s - i) / 2) as usize;
                let map = self.induced_power(s, t);
                let image = primitive.map_through(&map)?;
                if image.dim() != primitive.dim() {
                    return Err(Error::InvalidInput(format!(
                        "N^{t} is not injective on P^{} inside Gr_{i}",
                        -s
                    )));
                }
                total += image.dim();
                stacked = stacked.hstack(image.basis());
                list.push((t, s, image));
            }
            if total != piece.dim() || stacked.rank() != total {
                return Err(Error::InvalidInput(format!(
                    "Lefschetz decomposition of Gr_{i} is not direct ({total} vs {})",
                    piece.dim()
                )));
            }
            summands.insert(i, list);
        }
        Ok(LefschetzDecomposition { primitives, summands })
    }

    /// Gram matrix of the induced form `S^N_i` on `Gr_i` in the section
    /// basis. For `i >= 0` this is `S(a, N^i b)` on representatives; for
    /// `i < 0` it is transported through the isomorphism
    /// `N^{|i|} : Gr_{|i|} -> Gr_i`, which the convention makes an isometry.
    pub fn induced_form(&self, gram: &Matrix<T>, i: i64) -> Result<Matrix<T>> {
        let piece = self.piece(i);
        if i >= 0 {
            let power = self.weight.operator.pow(i as usize);
            let rep = &power * &piece.section;
            Ok(&(&piece.section.transpose() * gram) * &rep)
        } else {
            let m = (-i) as usize;
            let transport = self.induced_power(-i, m);
            let inverse = transport.inverse().ok_or_else(|| {
                Error::InvalidInput(format!("induced N^{m} on Gr_{} is singular", -i))
            })?;
            let positive = self.induced_form(gram, -i)?;
            Ok(&(&inverse.transpose() * &positive) * &inverse)
        }
    }

    /// `(W_i)^perp = W_{-i-1}` for all `i`, using canonical subspace
    /// equality. Requires `S` nondegenerate.
    pub fn selfduality_check(&self, gram: &Matrix<T>) -> Result<CheckOutcome> {
        let f = &self.weight.filtration;
        for i in f.support() {
            let perp = f.step(i).perp(gram)?;
            let dual = f.step(-i - 1);
            if perp != dual {
                return Ok(CheckOutcome::Fail {
                    witness: format!(
                        "(W_{i})^perp has dimension {} but W_{} has dimension {}",
                        perp.dim(),
                        -i - 1,
                        dual.dim()
                    ),
                });
            }
        }
        Ok(CheckOutcome::Pass)
    }

    /// Checks that the Lefschetz decomposition is `S^N_i`-orthogonal on
    /// every graded piece.
    pub fn orthogonality_check(
        &self,
        gram: &Matrix<T>,
        decomposition: &LefschetzDecomposition<T>,
    ) -> Result<CheckOutcome> {
        for (&i, list) in &decomposition.summands {
            let form = self.induced_form(gram, i)?;
            for (a, (_, sa, ua)) in list.iter().enumerate() {
                for (b, (_, sb, ub)) in list.iter().enumerate() {
                    if a == b {
                        continue;
                    }
                    let cross = &(&ua.basis().transpose() * &form) * ub.basis();
                    if !cross.is_zero() {
                        return Ok(CheckOutcome::Fail {
                            witness: format!(
                                "summands from P^{} and P^{} pair nontrivially on Gr_{i}",
                                -sa, -sb
                            ),
                        });
                    }
                }
            }
        }
        Ok(CheckOutcome::Pass)
    }
}
