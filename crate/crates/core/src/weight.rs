//! The weight filtration of a nilpotent operator.
//!
//! Two independent constructions are provided. `weight_filtration` evaluates
//! the convolution formula
//!
//! ```text
//! W_k = sum over i+j=k of  Ker N^{i+1}  intersect  Im N^{-j}
//! ```
//!
//! with the conventions `N^m = identity` for `m <= 0` (so `Im N^{-j}` is the
//! whole space when `j >= 0`) and `Ker N^{i+1} = 0` when `i + 1 <= 0`.
//! `jordan_weight_oracle` builds an explicit Jordan basis instead, assigns
//! the vector `N^t v` of a length-`s` chain the weight `s - 1 - 2t`, and
//! filters by weight. The filtration is unique, so the two must agree
//! exactly; the acceptance suite drives that comparison over randomized
//! inputs.

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::{image, kernel, Subspace};

#[derive(Clone, Debug)]
pub struct WeightFiltration<T> {
    pub operator: Matrix<T>,
    pub filtration: Filtration<T>,
}

/// Smallest `k` with `N^k = 0`, or an error if none exists up to the
/// dimension bound.
pub fn nilpotency_index<T: Scalar>(n: &Matrix<T>) -> Result<usize> {
    if !n.is_square() {
        return Err(Error::ShapeMismatch {
            context: "nilpotency",
            left: (n.rows(), n.rows()),
            right: (n.rows(), n.cols()),
        });
    }
    let dim = n.rows();
    let mut power = Matrix::identity(dim);
    for k in 0..=dim {
        if power.is_zero() {
            return Ok(k);
        }
        power = &power * n;
    }
    Err(Error::NotNilpotent)
}

/// Weight filtration by the convolution formula.
pub fn weight_filtration<T: Scalar>(n: &Matrix<T>) -> Result<WeightFiltration<T>> {
    let nu = nilpotency_index(n)? as i64;
    let dim = n.rows();
    // all weights live in [-(nu-1), nu-1]
    let top = (nu - 1).max(0);

    let mut powers = Vec::with_capacity(nu as usize + 2);
    powers.push(Matrix::identity(dim));
    for _ in 0..=nu {
        let next = powers.last().unwrap() * n;
        powers.push(next);
    }
    let power = |m: i64| -> &Matrix<T> {
        // N^m = identity for m <= 0; exponents are clamped at nu where N^m = 0
        &powers[m.clamp(0, nu + 1) as usize]
    };

    let kernels: Vec<Subspace<T>> = (0..=nu).map(|i| kernel(power(i + 1))).collect();
    let images: Vec<Subspace<T>> = (0..=nu).map(|m| image(power(m))).collect();

    let mut steps = Vec::new();
    for k in -top..=top {
        let mut acc = Subspace::zero(dim);
        for i in 0..=nu {
            let j = k - i;
            let im = if j >= 0 {
                Subspace::full(dim)
            } else if -j > nu {
                Subspace::zero(dim)
            } else {
                images[(-j) as usize].clone()
            };
            let term = kernels[i as usize].meet(&im)?;
            acc = acc.join(&term)?;
        }
        steps.push(acc);
    }
    let filtration = Filtration::new(dim, -top, steps)?.trimmed();
    Ok(WeightFiltration {
        operator: n.clone(),
        filtration,
    })
}

/// Weight filtration through an explicit Jordan basis; see the module docs.
pub fn jordan_weight_oracle<T: Scalar>(n: &Matrix<T>) -> Result<WeightFiltration<T>> {
    let nu = nilpotency_index(n)?;
    let dim = n.rows();

    let mut powers = vec![Matrix::identity(dim)];
    for _ in 0..=nu {
        let next = powers.last().unwrap() * n;
        powers.push(next);
    }
    let ker: Vec<Subspace<T>> = (0..=nu).map(|k| kernel(&powers[k])).collect();

    // chain tops of length s, chosen from Ker N^s modulo
    // Ker N^{s-1} + (elements of longer chains lying at kernel level s)
    let mut chains: Vec<Vec<Vec<T>>> = Vec::new();
    for s in (1..=nu).rev() {
        let mut gens = ker[s - 1].basis().clone();
        for chain in &chains {
            // a length-t chain [v, Nv, ...] meets kernel level s at N^{t-s} v
            gens = gens.hstack(&Matrix::column(chain[chain.len() - s].clone()));
        }
        let mut span = Subspace::span(&gens);
        let candidates = ker[s].basis();
        let mut tops: Vec<Vec<T>> = Vec::new();
        for c in 0..candidates.cols() {
            let v = candidates.column_vec(c);
            if !span.contains_vector(&v) {
                span = span.join(&Subspace::span(&Matrix::column(v.clone())))?;
                tops.push(v);
            }
        }
        for top in tops {
            let mut chain = Vec::with_capacity(s);
            let mut current = top;
            for _ in 0..s {
                chain.push(current.clone());
                current = n.apply(&current);
            }
            debug_assert!(current.iter().all(|x| x.is_zero()));
            chains.push(chain);
        }
    }

    // weight of the t-th vector in a length-s chain is s - 1 - 2t
    let top_weight = (nu as i64 - 1).max(0);
    let mut steps = Vec::new();
    for k in -top_weight..=top_weight {
        let mut cols = Matrix::zeros(dim, 0);
        for chain in &chains {
            let s = chain.len() as i64;
            for (t, v) in chain.iter().enumerate() {
                if s - 1 - 2 * (t as i64) <= k {
                    cols = cols.hstack(&Matrix::column(v.clone()));
                }
            }
        }
        steps.push(Subspace::span(&cols));
    }
    let filtration = Filtration::new(dim, -top_weight, steps)?.trimmed();
    Ok(WeightFiltration {
        operator: n.clone(),
        filtration,
    })
}

impl<T: Scalar> WeightFiltration<T> {
    /// Checks the two defining properties: `N W_i` is contained in `W_{i-2}`,
    /// and the induced `N^i : Gr_i -> Gr_{-i}` is an isomorphism for `i >= 0`.
    pub fn verify(&self) -> Result<()> {
        let f = &self.filtration;
        for i in f.support() {
            let mapped = f.step(i).map_through(&self.operator)?;
            if !f.step(i - 2).contains(&mapped) {
                return Err(Error::InvalidInput(format!(
                    "N W_{i} is not contained in W_{}",
                    i - 2
                )));
            }
        }
        for i in 0..=f.hi().max(0) {
            let (rows, cols, iso) = self.graded_power_map(i)?;
            if rows != cols || !iso {
                return Err(Error::InvalidInput(format!(
                    "induced N^{i}: Gr_{i} -> Gr_{} is not an isomorphism",
                    -i
                )));
            }
        }
        Ok(())
    }

    /// Shape and invertibility of the induced `N^i : Gr_i -> Gr_{-i}`.
    fn graded_power_map(&self, i: i64) -> Result<(usize, usize, bool)> {
        let f = &self.filtration;
        let source = f.step(i).quotient_map(&f.step(i - 1))?;
        let target = f.step(-i).quotient_map(&f.step(-i - 1))?;
        let power = self.operator.pow(i as usize);
        let induced = &(&target.projection * &power) * &source.section;
        let square = induced.rows() == induced.cols();
        let iso = square && induced.rank() == induced.rows();
        Ok((target.dim(), source.dim(), iso))
    }

    pub fn graded_dims(&self) -> Vec<(i64, usize)> {
        let f = &self.filtration;
        f.support()
            .map(|i| (i, f.graded_dim(i)))
            .filter(|&(_, d)| d > 0)
            .collect()
    }
}
