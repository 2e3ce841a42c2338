//! Increasing filtrations by subspaces, indexed by a window of integers.
//!
//! A `Filtration` stores steps for indices `lo..=hi` and extends implicitly:
//! the zero subspace below `lo` and the top stored step above `hi`. Weight
//! filtrations are exhaustive (top step is the full space); induced chains on
//! graded pieces reuse the same type.

use crate::error::{Error, Result};
use crate::subspace::Subspace;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Filtration<T> {
    ambient_dim: usize,
    lo: i64,
    steps: Vec<Subspace<T>>,
}

impl<T: Scalar> Filtration<T> {
    /// Builds from explicit steps for `lo..=hi`; steps must be increasing.
    pub fn new(ambient_dim: usize, lo: i64, steps: Vec<Subspace<T>>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidInput("filtration needs at least one step".into()));
        }
        for s in &steps {
            if s.ambient_dim() != ambient_dim {
                return Err(Error::AmbientMismatch {
                    context: "filtration step",
                    left: ambient_dim,
                    right: s.ambient_dim(),
                });
            }
        }
        for w in steps.windows(2) {
            if !w[1].contains(&w[0]) {
                return Err(Error::InvalidInput("filtration steps are not increasing".into()));
            }
        }
        Ok(Filtration { ambient_dim, lo, steps })
    }

    /// The filtration that jumps from zero to the full space at index 0.
    pub fn trivial(ambient_dim: usize) -> Self {
        Filtration {
            ambient_dim,
            lo: 0,
            steps: vec![Subspace::full(ambient_dim)],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.steps.len() as i64 - 1
    }

    /// Step at index `i`, with the implicit extension on both sides.
    pub fn step(&self, i: i64) -> Subspace<T> {
        if i < self.lo {
            Subspace::zero(self.ambient_dim)
        } else if i > self.hi() {
            self.steps.last().expect("nonempty").clone()
        } else {
            self.steps[(i - self.lo) as usize].clone()
        }
    }

    pub fn top(&self) -> &Subspace<T> {
        self.steps.last().expect("nonempty")
    }

    /// Whether the top step is the whole ambient space.
    pub fn is_exhaustive(&self) -> bool {
        self.top().is_full()
    }

    /// Shifted filtration `W[j]` with `W[j]_i = W_{j+i}`.
    pub fn shift(&self, j: i64) -> Self {
        Filtration {
            ambient_dim: self.ambient_dim,
            lo: self.lo - j,
            steps: self.steps.clone(),
        }
    }

    /// Drops redundant constant steps at both ends (keeping at least one).
    pub fn trimmed(&self) -> Self {
        let mut lo_idx = 0;
        while lo_idx + 1 < self.steps.len() && self.steps[lo_idx].is_zero() {
            lo_idx += 1;
        }
        // keep the first index at which the step is nonzero, plus the last
        // zero step below it is implicit
        let mut hi_idx = self.steps.len() - 1;
        while hi_idx > lo_idx && self.steps[hi_idx - 1] == self.steps[hi_idx] {
            hi_idx -= 1;
        }
        Filtration {
            ambient_dim: self.ambient_dim,
            lo: self.lo + lo_idx as i64,
            steps: self.steps[lo_idx..=hi_idx].to_vec(),
        }
    }

    /// Indices worth inspecting: one below the window through one above.
    pub fn support(&self) -> std::ops::RangeInclusive<i64> {
        self.lo - 1..=self.hi() + 1
    }

    /// Exact equality as filtrations (comparing steps over the union range).
    pub fn same_filtration(&self, other: &Filtration<T>) -> bool {
        if self.ambient_dim != other.ambient_dim {
            return false;
        }
        let lo = self.lo.min(other.lo) - 1;
        let hi = self.hi().max(other.hi()) + 1;
        (lo..=hi).all(|i| self.step(i) == other.step(i))
    }

    /// Dimension of the graded piece at index `i`.
    pub fn graded_dim(&self, i: i64) -> usize {
        self.step(i).dim() - self.step(i - 1).dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn clamping_and_shift() {
        let f: Filtration<Rational> = Filtration::new(
            2,
            0,
            vec![Subspace::zero(2), Subspace::full(2)],
        )
        .unwrap();
        assert!(f.step(-5).is_zero());
        assert!(f.step(10).is_full());
        assert_eq!(f.graded_dim(1), 2);
        assert_eq!(f.graded_dim(0), 0);

        let shifted = f.shift(1);
        assert!(shifted.step(0).is_full());
        assert!(!f.same_filtration(&shifted));
        assert!(f.same_filtration(&f.trimmed()));
    }

    #[test]
    fn rejects_non_increasing() {
        let bad: Result<Filtration<Rational>> =
            Filtration::new(2, 0, vec![Subspace::full(2), Subspace::zero(2)]);
        assert!(bad.is_err());
    }
}
