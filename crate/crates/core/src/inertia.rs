//! Exact inertia of a symmetric bilinear form.
//!
//! Signature is computed by simultaneous row/column elimination. A zero
//! diagonal with a nonzero off-diagonal entry `G[i][j]` is handled by the
//! change of basis `e_i -> e_i + e_j`, which produces the diagonal entry
//! `2 G[i][j]` (nonzero in characteristic zero); the count of positive,
//! negative and zero pivots is invariant under congruence by Sylvester's law.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// `(positive, negative, zero)` counts of a symmetric matrix.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn is_positive_definite(&self) -> bool {
        self.negative == 0 && self.zero == 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.positive == 0 && self.zero == 0
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.zero == 0
    }
}

pub fn check_symmetric<T: Scalar>(g: &Matrix<T>) -> Result<()> {
    if !g.is_square() {
        return Err(Error::ShapeMismatch {
            context: "inertia",
            left: (g.rows(), g.rows()),
            right: (g.rows(), g.cols()),
        });
    }
    for r in 0..g.rows() {
        for c in r + 1..g.cols() {
            if g[(r, c)] != g[(c, r)] {
                return Err(Error::NotSymmetric(r, c));
            }
        }
    }
    Ok(())
}

pub fn signature<T: Scalar>(g: &Matrix<T>) -> Result<Inertia> {
    check_symmetric(g)?;
    let mut m = g.clone();
    let size = m.rows();
    let mut inertia = Inertia {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    let mut start = 0;
    while start < size {
        // prefer a nonzero diagonal pivot
        if let Some(p) = (start..size).find(|&i| !m[(i, i)].is_zero()) {
            swap_symmetric(&mut m, start, p);
            let pivot = m[(start, start)].clone();
            if pivot.is_positive() {
                inertia.positive += 1;
            } else {
                inertia.negative += 1;
            }
            for i in start + 1..size {
                if m[(i, start)].is_zero() {
                    continue;
                }
                let factor = m[(i, start)].clone() / pivot.clone();
                for j in start..size {
                    let delta = factor.clone() * m[(start, j)].clone();
                    m[(i, j)] = m[(i, j)].clone() - delta;
                }
                for j in start..size {
                    let delta = factor.clone() * m[(j, start)].clone();
                    m[(j, i)] = m[(j, i)].clone() - delta;
                }
            }
            start += 1;
            continue;
        }
        // all diagonal entries vanish; look for a hyperbolic pair
        let mut off = None;
        'search: for i in start..size {
            for j in i + 1..size {
                if !m[(i, j)].is_zero() {
                    off = Some((i, j));
                    break 'search;
                }
            }
        }
        match off {
            Some((i, j)) => {
                // e_i -> e_i + e_j turns the (i,i) entry into 2 G[i][j]
                for c in start..size {
                    let add = m[(j, c)].clone();
                    m[(i, c)] = m[(i, c)].clone() + add;
                }
                for r in start..size {
                    let add = m[(r, j)].clone();
                    m[(r, i)] = m[(r, i)].clone() + add;
                }
            }
            None => {
                // remaining block is identically zero
                inertia.zero += size - start;
                break;
            }
        }
    }
    Ok(inertia)
}

fn swap_symmetric<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize) {
    if a == b {
        return;
    }
    let size = m.rows();
    for c in 0..size {
        let t = m[(a, c)].clone();
        m[(a, c)] = m[(b, c)].clone();
        m[(b, c)] = t;
    }
    for r in 0..size {
        let t = m[(r, a)].clone();
        m[(r, a)] = m[(r, b)].clone();
        m[(r, b)] = t;
    }
}
