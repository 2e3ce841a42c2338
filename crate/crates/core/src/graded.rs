//! Graded vector spaces `H = (+)_{l=0}^{2n} H^l`, degree-shift operators,
//! Poincare pairing blocks and the twisted form built from them.
//!
//! The flattening convention is fixed once here: degree blocks are laid out
//! in ascending degree, `H^l` occupying coordinates
//! `offsets[l] .. offsets[l] + dims[l]`. Every other module computes through
//! this bijection.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::Subspace;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedSpace {
    n: usize,
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl GradedSpace {
    /// Builds from the per-degree dimensions; `dims.len()` must be `2n + 1`.
    pub fn new(n: usize, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != 2 * n + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} degree entries for n = {n}, got {}",
                2 * n + 1,
                dims.len()
            )));
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        Ok(GradedSpace { n, dims, offsets })
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn top_degree(&self) -> usize {
        2 * self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.dims.get(degree).copied().unwrap_or(0)
    }

    pub fn offset(&self, degree: usize) -> usize {
        self.offsets[degree]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> {
        0..=self.top_degree()
    }

    /// Inclusion `H^l -> H` of the degree block into the total space.
    pub fn inclusion<T: Scalar>(&self, degree: usize) -> Matrix<T> {
        let mut m = Matrix::zeros(self.total_dim(), self.dim(degree));
        for k in 0..self.dim(degree) {
            m[(self.offsets[degree] + k, k)] = T::one();
        }
        m
    }

    /// Coordinate projection `H -> H^l`.
    pub fn projection<T: Scalar>(&self, degree: usize) -> Matrix<T> {
        self.inclusion::<T>(degree).transpose()
    }

    /// The degree block as a subspace of the total space.
    pub fn degree_subspace<T: Scalar>(&self, degree: usize) -> Subspace<T> {
        Subspace::span(&self.inclusion::<T>(degree))
    }

    /// Degree of each flat coordinate.
    pub fn coordinate_degrees(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total_dim());
        for l in self.degrees() {
            out.extend(std::iter::repeat_n(l, self.dim(l)));
        }
        out
    }
}

/// A degree-homogeneous operator given by per-degree blocks
/// `H^l -> H^{l+shift}`; absent blocks are zero.
#[derive(Clone, Debug)]
pub struct GradedOperator<T> {
    pub space: GradedSpace,
    pub shift: i64,
    pub blocks: BTreeMap<usize, Matrix<T>>,
}

impl<T: Scalar> GradedOperator<T> {
    pub fn new(
        space: GradedSpace,
        shift: i64,
        blocks: BTreeMap<usize, Matrix<T>>,
    ) -> Result<Self> {
        for (&l, block) in &blocks {
            let target = l as i64 + shift;
            if target < 0 || target > space.top_degree() as i64 {
                if !block.is_zero() {
                    return Err(Error::InvalidInput(format!(
                        "block at degree {l} maps outside the graded range and is nonzero"
                    )));
                }
                continue;
            }
            let expected = (space.dim(target as usize), space.dim(l));
            if (block.rows(), block.cols()) != expected {
                return Err(Error::ShapeMismatch {
                    context: "graded operator block",
                    left: expected,
                    right: (block.rows(), block.cols()),
                });
            }
        }
        Ok(GradedOperator { space, shift, blocks })
    }

    pub fn zero(space: GradedSpace, shift: i64) -> Self {
        GradedOperator {
            space,
            shift,
            blocks: BTreeMap::new(),
        }
    }

    pub fn block(&self, degree: usize) -> Matrix<T> {
        let target = degree as i64 + self.shift;
        if target < 0 || target > self.space.top_degree() as i64 {
            return Matrix::zeros(0, self.space.dim(degree));
        }
        self.blocks.get(&degree).cloned().unwrap_or_else(|| {
            Matrix::zeros(self.space.dim(target as usize), self.space.dim(degree))
        })
    }

    /// Assembles the operator on the flattened total space.
    pub fn total(&self) -> Matrix<T> {
        let dim = self.space.total_dim();
        let mut m = Matrix::zeros(dim, dim);
        for l in self.space.degrees() {
            let target = l as i64 + self.shift;
            if target < 0 || target > self.space.top_degree() as i64 {
                continue;
            }
            let block = self.block(l);
            m.set_block(self.space.offset(target as usize), self.space.offset(l), &block);
        }
        m
    }
}

/// Per-degree blocks `phi_l : H^l x H^{2n-l} -> k` of the Poincare pairing.
///
/// Only blocks for `l <= n` are supplied; the rest are forced by the graded
/// symmetry of the wedge product, `phi_{2n-l} = (-1)^{l(2n-l)} phi_l^T`.
#[derive(Clone, Debug)]
pub struct PoincarePairing<T> {
    pub space: GradedSpace,
    blocks: BTreeMap<usize, Matrix<T>>,
}

impl<T: Scalar> PoincarePairing<T> {
    pub fn from_lower_blocks(
        space: GradedSpace,
        lower: BTreeMap<usize, Matrix<T>>,
    ) -> Result<Self> {
        let n = space.half_dim();
        let top = space.top_degree();
        let mut blocks = BTreeMap::new();
        for l in 0..=n {
            let dual = top - l;
            let expected = (space.dim(l), space.dim(dual));
            if expected.0 == 0 && expected.1 == 0 {
                continue;
            }
            if space.dim(l) != space.dim(dual) {
                return Err(Error::InvalidPackage(format!(
                    "Poincare duality needs dim H^{l} = dim H^{}, got {} vs {}",
                    dual,
                    space.dim(l),
                    space.dim(dual)
                )));
            }
            let block = lower
                .get(&l)
                .cloned()
                .ok_or_else(|| Error::InvalidPackage(format!("missing pairing block at degree {l}")))?;
            if (block.rows(), block.cols()) != expected {
                return Err(Error::ShapeMismatch {
                    context: "pairing block",
                    left: expected,
                    right: (block.rows(), block.cols()),
                });
            }
            if block.rank() != block.rows() {
                return Err(Error::SingularPairing(l));
            }
            blocks.insert(l, block);
        }
        for (&l, extra) in &lower {
            if l > n && !extra.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "pairing block at degree {l} > n must be left implicit"
                )));
            }
        }
        // derive the upper blocks; the middle one (l = n) must be consistent
        let derived: Vec<(usize, Matrix<T>)> = blocks
            .iter()
            .filter(|(&l, _)| l <= top - l)
            .map(|(&l, block)| {
                let sign = if (l * (top - l)).is_multiple_of(2) { T::one() } else { -T::one() };
                (top - l, block.transpose().scale(&sign))
            })
            .collect();
        for (l, block) in derived {
            match blocks.get(&l) {
                Some(existing) => {
                    if existing != &block {
                        return Err(Error::InvalidPackage(format!(
                            "pairing block at middle degree {l} breaks graded symmetry"
                        )));
                    }
                }
                None => {
                    blocks.insert(l, block);
                }
            }
        }
        Ok(PoincarePairing { space, blocks })
    }

    pub fn block(&self, l: usize) -> Matrix<T> {
        self.blocks
            .get(&l)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.space.dim(l), self.space.dim(self.space.top_degree() - l)))
    }
}

/// The twisted Poincare form `S` on the total space: for `x` in `H^l` and
/// `y` in `H^{2n-l}`, `S(x, y) = (-1)^{l(l-1)/2} phi_l(x, y)`; other blocks
/// vanish. `S` is `(-1)^n`-symmetric.
#[derive(Clone, Debug)]
pub struct TwistedForm<T> {
    pub space: GradedSpace,
    pub gram: Matrix<T>,
}

pub fn twisted_form<T: Scalar>(pairing: &PoincarePairing<T>) -> Result<TwistedForm<T>> {
    let space = pairing.space.clone();
    let dim = space.total_dim();
    let top = space.top_degree();
    let mut gram = Matrix::zeros(dim, dim);
    for l in space.degrees() {
        let block = pairing.block(l);
        if block.is_empty() {
            continue;
        }
        let sign = if (l * l.saturating_sub(1) / 2) % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        gram.set_block(space.offset(l), space.offset(top - l), &block.scale(&sign));
    }
    let form = TwistedForm { space, gram };
    let expected = form.gram.transpose().scale(&form.symmetry_sign());
    if expected != form.gram {
        return Err(Error::InvalidPackage(
            "twisted form is not (-1)^n-symmetric; pairing blocks are inconsistent".into(),
        ));
    }
    if form.gram.rank() != dim {
        return Err(Error::SingularForm);
    }
    Ok(form)
}

impl<T: Scalar> TwistedForm<T> {
    pub fn symmetry_sign(&self) -> T {
        if self.space.half_dim().is_multiple_of(2) {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Evaluates `S(x, y)` on flat coordinates.
    pub fn eval(&self, x: &[T], y: &[T]) -> T {
        let gy = self.gram.apply(y);
        x.iter()
            .zip(gy.iter())
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }
}

/// Result of a single verification: either clean or carrying a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail { witness: String },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

/// Verifies `S(Na, b) + S(a, Nb) = 0` as the matrix identity
/// `N^T G + G N = 0`, reporting the first violating basis pair.
pub fn check_infinitesimal_automorphism<T: Scalar>(
    form: &TwistedForm<T>,
    operator: &Matrix<T>,
) -> CheckOutcome {
    let lhs = &(&operator.transpose() * &form.gram) + &(&form.gram * operator);
    if lhs.is_zero() {
        return CheckOutcome::Pass;
    }
    for r in 0..lhs.rows() {
        for c in 0..lhs.cols() {
            if !lhs[(r, c)].is_zero() {
                return CheckOutcome::Fail {
                    witness: format!(
                        "S(N e{r}, e{c}) + S(e{r}, N e{c}) = {} != 0",
                        lhs[(r, c)]
                    ),
                };
            }
        }
    }
    unreachable!("nonzero matrix has a nonzero entry");
}

/// Verifies `MN = NM`, reporting the first violating entry.
pub fn commutator_check<T: Scalar>(m: &Matrix<T>, n: &Matrix<T>) -> CheckOutcome {
    let delta = &(m * n) - &(n * m);
    if delta.is_zero() {
        return CheckOutcome::Pass;
    }
    for r in 0..delta.rows() {
        for c in 0..delta.cols() {
            if !delta[(r, c)].is_zero() {
                return CheckOutcome::Fail {
                    witness: format!("(MN - NM)[{r}][{c}] = {}", delta[(r, c)]),
                };
            }
        }
    }
    unreachable!();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Zero;

    type M = Matrix<Rational>;

    fn p2_space() -> GradedSpace {
        GradedSpace::new(2, vec![1, 0, 1, 0, 1]).unwrap()
    }

    fn p2_pairing() -> PoincarePairing<Rational> {
        let mut lower = BTreeMap::new();
        lower.insert(0, M::identity(1));
        lower.insert(2, M::identity(1));
        PoincarePairing::from_lower_blocks(p2_space(), lower).unwrap()
    }

    fn p2_hyperplane() -> GradedOperator<Rational> {
        let mut blocks = BTreeMap::new();
        blocks.insert(0, M::identity(1));
        blocks.insert(2, M::identity(1));
        GradedOperator::new(p2_space(), 2, blocks).unwrap()
    }

    #[test]
    fn twisted_form_p2() {
        let s = twisted_form(&p2_pairing()).unwrap();
        // anti-diagonal (1, -1, 1) reading degrees 0, 2, 4
        let expected = M::from_int_rows(&[&[0, 0, 1], &[0, -1, 0], &[1, 0, 0]]);
        assert_eq!(s.gram, expected);
        assert_eq!(s.gram.transpose(), s.gram);
    }

    #[test]
    fn twisted_form_point() {
        let space = GradedSpace::new(0, vec![1]).unwrap();
        let mut lower = BTreeMap::new();
        lower.insert(0, M::identity(1));
        let pairing = PoincarePairing::from_lower_blocks(space, lower).unwrap();
        assert_eq!(twisted_form(&pairing).unwrap().gram, M::identity(1));
    }

    #[test]
    fn twisted_form_blowup_middle_block() {
        let space = GradedSpace::new(2, vec![1, 0, 2, 0, 1]).unwrap();
        let mut lower = BTreeMap::new();
        lower.insert(0, M::identity(1));
        lower.insert(2, M::from_int_rows(&[&[1, 0], &[0, -1]]));
        let pairing = PoincarePairing::from_lower_blocks(space, lower).unwrap();
        let s = twisted_form(&pairing).unwrap();
        let middle = s.gram.block(1, 1, 2, 2);
        assert_eq!(middle, M::from_int_rows(&[&[-1, 0], &[0, 1]]));
    }

    #[test]
    fn degenerate_pairing_rejected() {
        let mut lower = BTreeMap::new();
        lower.insert(0, M::identity(1));
        lower.insert(2, M::zeros(1, 1));
        assert_eq!(
            PoincarePairing::from_lower_blocks(p2_space(), lower).unwrap_err(),
            Error::SingularPairing(2)
        );
    }

    #[test]
    fn eta_is_infinitesimal_automorphism_on_p2() {
        let s = twisted_form(&p2_pairing()).unwrap();
        let eta = p2_hyperplane().total();
        assert!(check_infinitesimal_automorphism(&s, &eta).passed());
        assert!(check_infinitesimal_automorphism(&s, &Matrix::zeros(3, 3)).passed());
    }

    #[test]
    fn corrupted_sign_fails_with_witness() {
        let s = twisted_form(&p2_pairing()).unwrap();
        let mut corrupted = s.clone();
        // flip the middle block sign: breaks the automorphism identity
        corrupted.gram[(1, 1)] = Rational::from_int(1);
        let eta = p2_hyperplane().total();
        match check_infinitesimal_automorphism(&corrupted, &eta) {
            CheckOutcome::Fail { witness } => assert!(witness.contains("!= 0")),
            CheckOutcome::Pass => panic!("corruption must be detected"),
        }
    }

    #[test]
    fn commutators() {
        let j = M::from_int_rows(&[&[0, 1], &[0, 0]]);
        assert!(commutator_check(&j, &j).passed());
        let other = M::from_int_rows(&[&[0, 0], &[1, 0]]);
        assert!(!commutator_check(&j, &other).passed());
    }

    #[test]
    fn total_matrix_degree_homogeneity() {
        let eta = p2_hyperplane();
        let total = eta.total();
        let space = p2_space();
        // image of a degree-l coordinate lies in the degree l+2 block
        let degrees = space.coordinate_degrees();
        for c in 0..total.cols() {
            for r in 0..total.rows() {
                if !total[(r, c)].is_zero() {
                    assert_eq!(degrees[r], degrees[c] + 2);
                }
            }
        }
    }
}
