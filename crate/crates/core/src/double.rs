//! Two commuting nilpotent operators: relative weight filtrations, the
//! double Lefschetz decomposition and the forms `S^{MN}_{ij}`.
//!
//! For commuting nilpotent infinitesimal automorphisms `M`, `N` of `(H, S)`,
//! the standing hypothesis is that the shifted filtration `W^M[j]` induces on
//! every graded piece `Gr^N_j` exactly the weight filtration of the operator
//! that `M` induces there. `DoubleSystem::new` verifies this and then carries
//! coordinates for every double graded piece
//! `D(i, j) = Gr^M_{j+i} Gr^N_j`, chosen so that section representatives lie
//! in `W^M_{j+i} meet W^N_j` — the representatives the form definitions need.
//!
//! Forms at negative indices are obtained by transporting the nonnegative
//! case through the graded isomorphisms `M^i` and `N^j`, which the
//! convention turns into isometries.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::graded::CheckOutcome;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::{kernel, Subspace};
use crate::weight::{weight_filtration, WeightFiltration};

#[derive(Clone, Debug)]
pub struct DoublePiece<T> {
    /// Relative index `i`; the piece is `Gr^M_{j+i} Gr^N_j`.
    pub rel_index: i64,
    /// N-weight `j`.
    pub n_index: i64,
    /// Ambient representatives, columns in `W^M_{j+i} meet W^N_j`.
    pub section: Matrix<T>,
    /// Coordinates map, `dim x ambient`; kills the lower filtration steps.
    pub projection: Matrix<T>,
}

impl<T: Scalar> DoublePiece<T> {
    pub fn dim(&self) -> usize {
        self.section.cols()
    }
}

pub struct DoubleSystem<T> {
    pub m_op: Matrix<T>,
    pub n_op: Matrix<T>,
    pub gram: Matrix<T>,
    pub wm: WeightFiltration<T>,
    pub wn: WeightFiltration<T>,
    pieces: BTreeMap<(i64, i64), DoublePiece<T>>,
}

/// Verifies the relative weight hypothesis for `(M, N)`: on every `Gr^N_j`
/// the filtration induced by `W^M[j]` is the weight filtration of the
/// induced nilpotent operator. Also checks `M W^N_j` stays in `W^N_j`.
pub fn relative_weight_check<T: Scalar>(
    m_op: &Matrix<T>,
    n_op: &Matrix<T>,
) -> Result<CheckOutcome> {
    let wm = weight_filtration(m_op)?;
    let wn = weight_filtration(n_op)?;
    relative_weight_outcome(m_op, &wm, &wn)
}

fn relative_weight_outcome<T: Scalar>(
    m_op: &Matrix<T>,
    wm: &WeightFiltration<T>,
    wn: &WeightFiltration<T>,
) -> Result<CheckOutcome> {
    let fm = &wm.filtration;
    let fn_ = &wn.filtration;
    for j in fn_.support() {
        let step = fn_.step(j);
        let mapped = step.map_through(m_op)?;
        if !step.contains(&mapped) {
            return Ok(CheckOutcome::Fail {
                witness: format!("M does not preserve W^N_{j}"),
            });
        }
        if fn_.graded_dim(j) == 0 {
            continue;
        }
        let q = step.quotient_map(&fn_.step(j - 1))?;
        let induced = &(&q.projection * m_op) * &q.section;
        let induced_weights = match weight_filtration(&induced) {
            Ok(w) => w,
            Err(Error::NotNilpotent) => {
                return Ok(CheckOutcome::Fail {
                    witness: format!("M induces a non-nilpotent operator on Gr^N_{j}"),
                })
            }
            Err(e) => return Err(e),
        };
        let dim_j = q.dim();
        let mut steps = Vec::new();
        for p in fm.support() {
            let meet = fm.step(p).meet(&step)?;
            steps.push(Subspace::span(
                &q.projection.checked_mul(meet.basis())?,
            ));
        }
        let restricted = Filtration::new(dim_j, fm.lo() - 1, steps)?;
        if !restricted
            .shift(j)
            .same_filtration(&induced_weights.filtration)
        {
            return Ok(CheckOutcome::Fail {
                witness: format!(
                    "W^M[{j}] restricted to Gr^N_{j} is not the weight filtration of the induced operator"
                ),
            });
        }
    }
    Ok(CheckOutcome::Pass)
}

impl<T: Scalar> DoubleSystem<T> {
    /// Builds the system; fails with `Error::RelativeWeight` if the standing
    /// hypothesis does not hold.
    pub fn new(m_op: Matrix<T>, n_op: Matrix<T>, gram: Matrix<T>) -> Result<Self> {
        let wm = weight_filtration(&m_op)?;
        let wn = weight_filtration(&n_op)?;
        match relative_weight_outcome(&m_op, &wm, &wn)? {
            CheckOutcome::Pass => {}
            CheckOutcome::Fail { witness } => {
                return Err(Error::InvalidPackage(witness));
            }
        }
        let mut pieces = BTreeMap::new();
        let fm = &wm.filtration;
        let fn_ = &wn.filtration;
        for j in fn_.support() {
            if fn_.graded_dim(j) == 0 {
                continue;
            }
            for p in fm.support() {
                let ambient_cut = fm.step(p).meet(&fn_.step(j))?;
                let lower = fm
                    .step(p - 1)
                    .meet(&fn_.step(j))?
                    .join(&fm.step(p).meet(&fn_.step(j - 1))?)?;
                if ambient_cut.dim() == lower.dim() {
                    continue;
                }
                let q = ambient_cut.quotient_map(&lower)?;
                pieces.insert(
                    (p - j, j),
                    DoublePiece {
                        rel_index: p - j,
                        n_index: j,
                        section: q.section,
                        projection: q.projection,
                    },
                );
            }
        }
        Ok(DoubleSystem {
            m_op,
            n_op,
            gram,
            wm,
            wn,
            pieces,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.m_op.rows()
    }

    pub fn piece_keys(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.pieces.keys().copied()
    }

    pub fn piece(&self, i: i64, j: i64) -> DoublePiece<T> {
        self.pieces.get(&(i, j)).cloned().unwrap_or(DoublePiece {
            rel_index: i,
            n_index: j,
            section: Matrix::zeros(self.ambient_dim(), 0),
            projection: Matrix::zeros(0, self.ambient_dim()),
        })
    }

    pub fn piece_dim(&self, i: i64, j: i64) -> usize {
        self.pieces.get(&(i, j)).map_or(0, DoublePiece::dim)
    }

    /// Induced `M^a N^b : D(i, j) -> D(i - 2a, j - 2b)` in piece coordinates.
    pub fn induced_map(&self, i: i64, j: i64, a: usize, b: usize) -> Matrix<T> {
        let source = self.piece(i, j);
        let target = self.piece(i - 2 * a as i64, j - 2 * b as i64);
        let op = &self.m_op.pow(a) * &self.n_op.pow(b);
        &(&target.projection * &op) * &source.section
    }

    /// Biprimitive `P^{-j}_{-i} = Ker M^{i+1} meet Ker N^{j+1}` inside
    /// `D(i, j)`, for `i, j >= 0`; zero otherwise.
    pub fn biprimitive(&self, i: i64, j: i64) -> Result<Subspace<T>> {
        let d = self.piece_dim(i, j);
        if i < 0 || j < 0 {
            return Ok(Subspace::zero(d));
        }
        let ker_m = kernel(&self.induced_map(i, j, i as usize + 1, 0));
        let ker_n = kernel(&self.induced_map(i, j, 0, j as usize + 1));
        ker_m.meet(&ker_n)
    }

    /// All nonzero biprimitives with their dimensions.
    pub fn biprimitive_table(&self) -> Result<BTreeMap<(i64, i64), Subspace<T>>> {
        let mut out = BTreeMap::new();
        for (i, j) in self.piece_keys().collect::<Vec<_>>() {
            if i < 0 || j < 0 {
                continue;
            }
            let p = self.biprimitive(i, j)?;
            if !p.is_zero() {
                out.insert((i, j), p);
            }
        }
        Ok(out)
    }

    /// The summands `M^a N^b P^{-(j+2b)}_{-(i+2a)}` of `D(i, j)`, with the
    /// originating biprimitive indices. Verifies directness.
    pub fn summands(
        &self,
        biprimitives: &BTreeMap<(i64, i64), Subspace<T>>,
        i: i64,
        j: i64,
    ) -> Result<Vec<DoubleSummand<T>>> {
        let piece = self.piece(i, j);
        let mut list = Vec::new();
        let mut total = 0;
        let mut stacked = Matrix::zeros(piece.dim(), 0);
        for (&(bi, bj), prim) in biprimitives {
            // M^a N^b P^{-bj}_{-bi} lands at (bi - 2a, bj - 2b) and is zero
            // once a power exceeds its string length, i.e. unless |i| <= bi
            // and |j| <= bj
            if bi < i.abs() || bj < j.abs() || (bi - i) % 2 != 0 || (bj - j) % 2 != 0 {
                continue;
            }
            let a = ((bi - i) / 2) as usize;
            let b = ((bj - j) / 2) as usize;
            let map = self.induced_map(bi, bj, a, b);
            let image = prim.map_through(&map)?;
            if image.dim() != prim.dim() {
                return Err(Error::InvalidPackage(format!(
                    "M^{a} N^{b} fails to be injective on P^{}_{} into D({i}, {j})",
                    -bj, -bi
                )));
            }
            if image.is_zero() {
                continue;
            }
            total += image.dim();
            stacked = stacked.hstack(image.basis());
            list.push(DoubleSummand {
                m_power: a,
                n_power: b,
                prim_rel: bi,
                prim_n: bj,
                subspace: image,
            });
        }
        if total != piece.dim() || stacked.rank() != total {
            return Err(Error::InvalidPackage(format!(
                "double Lefschetz decomposition of D({i}, {j}) is not direct ({total} vs {})",
                piece.dim()
            )));
        }
        Ok(list)
    }

    /// Gram matrix of `S^{MN}_{ij}` on `D(i, j)` in the section basis.
    pub fn double_form(&self, i: i64, j: i64) -> Result<Matrix<T>> {
        if j < 0 {
            let transport = self.induced_map(i, -j, 0, (-j) as usize);
            let inverse = transport.inverse().ok_or_else(|| {
                Error::InvalidPackage(format!("induced N^{} on D({i}, {}) is singular", -j, -j))
            })?;
            let positive = self.double_form(i, -j)?;
            return Ok(&(&inverse.transpose() * &positive) * &inverse);
        }
        if i < 0 {
            let transport = self.induced_map(-i, j, (-i) as usize, 0);
            let inverse = transport.inverse().ok_or_else(|| {
                Error::InvalidPackage(format!("induced M^{} on D({}, {j}) is singular", -i, -i))
            })?;
            let positive = self.double_form(-i, j)?;
            return Ok(&(&inverse.transpose() * &positive) * &inverse);
        }
        let piece = self.piece(i, j);
        let op = &self.m_op.pow(i as usize) * &self.n_op.pow(j as usize);
        Ok(&(&piece.section.transpose() * &self.gram) * &(&op * &piece.section))
    }

    /// Checks that the double decomposition of every piece is orthogonal
    /// under `S^{MN}_{ij}` and that each form is nondegenerate.
    pub fn orthogonality_check(
        &self,
        biprimitives: &BTreeMap<(i64, i64), Subspace<T>>,
    ) -> Result<CheckOutcome> {
        for (i, j) in self.piece_keys().collect::<Vec<_>>() {
            let form = self.double_form(i, j)?;
            if form.rank() != self.piece_dim(i, j) {
                return Ok(CheckOutcome::Fail {
                    witness: format!("S^MN_({i},{j}) is degenerate"),
                });
            }
            let summands = self.summands(biprimitives, i, j)?;
            for (x, sx) in summands.iter().enumerate() {
                for sy in summands.iter().skip(x + 1) {
                    let cross =
                        &(&sx.subspace.basis().transpose() * &form) * sy.subspace.basis();
                    if !cross.is_zero() {
                        return Ok(CheckOutcome::Fail {
                            witness: format!(
                                "summands from P^{}_{} and P^{}_{} pair nontrivially on D({i},{j})",
                                -sx.prim_n, -sx.prim_rel, -sy.prim_n, -sy.prim_rel
                            ),
                        });
                    }
                }
            }
        }
        Ok(CheckOutcome::Pass)
    }

    /// Verifies the graded isomorphisms `M^i : D(i, j) ~ D(-i, j)`, visiting
    /// both signs of every occupied piece so one-sided pieces are caught.
    pub fn morwf_check(&self) -> CheckOutcome {
        for (i, j) in self.pieces.keys().copied() {
            let k = i.abs();
            let map = self.induced_map(k, j, k as usize, 0);
            let square = map.rows() == map.cols();
            if !square || map.rank() != map.rows() {
                return CheckOutcome::Fail {
                    witness: format!(
                        "M^{k}: D({k},{j}) -> D({},{j}) is not an isomorphism",
                        -k
                    ),
                };
            }
        }
        CheckOutcome::Pass
    }
}

#[derive(Clone, Debug)]
pub struct DoubleSummand<T> {
    pub m_power: usize,
    pub n_power: usize,
    /// Relative index of the originating biprimitive (`i'` in `P^{-j'}_{-i'}`).
    pub prim_rel: i64,
    /// N-index of the originating biprimitive (`j'`).
    pub prim_n: i64,
    pub subspace: Subspace<T>,
}

impl<T: Scalar> DoubleSummand<T> {
    /// Sign making `S^{MN}_{ij}` a polarization of this summand, relative to
    /// the Weil operator: `(-1)^{n - i' - j'}` on the biprimitive itself,
    /// with one extra flip for each single step of `M` or `N` until the
    /// transported convention takes over past the middle of the string.
    pub fn polarization_sign(&self, half_dim: i64) -> i64 {
        let a = self.m_power as i64;
        let b = self.n_power as i64;
        let exponent = half_dim - self.prim_rel - self.prim_n
            + a.min(self.prim_rel - a)
            + b.min(self.prim_n - b);
        if exponent.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }
}
