//! 2×2 block operators on ℓ²(ℕ) ⊕ ℓ²(ℕ).

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::StructuredOperator;
use crate::error::Result;

/// Which copy of ℓ²(ℕ) a basis column lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Half {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockOperator {
    pub upper_left: StructuredOperator,
    pub upper_right: StructuredOperator,
    pub lower_left: StructuredOperator,
    pub lower_right: StructuredOperator,
}

impl BlockOperator {
    pub fn new(
        upper_left: StructuredOperator,
        upper_right: StructuredOperator,
        lower_left: StructuredOperator,
        lower_right: StructuredOperator,
    ) -> Self {
        BlockOperator { upper_left, upper_right, lower_left, lower_right }
    }

    pub fn zero() -> Self {
        BlockOperator::diag(StructuredOperator::zero(), StructuredOperator::zero())
    }

    pub fn identity() -> Self {
        BlockOperator::diag(StructuredOperator::identity(), StructuredOperator::identity())
    }

    pub fn diag(upper: StructuredOperator, lower: StructuredOperator) -> Self {
        BlockOperator {
            upper_left: upper,
            upper_right: StructuredOperator::zero(),
            lower_left: StructuredOperator::zero(),
            lower_right: lower,
        }
    }

    /// `[[0, 1], [1, 0]]`.
    pub fn swap() -> Self {
        BlockOperator {
            upper_left: StructuredOperator::zero(),
            upper_right: StructuredOperator::identity(),
            lower_left: StructuredOperator::identity(),
            lower_right: StructuredOperator::zero(),
        }
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.upper_right.is_zero() && self.lower_left.is_zero()
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        Ok(BlockOperator {
            upper_left: self
                .upper_left
                .mul(&rhs.upper_left)?
                .add(&self.upper_right.mul(&rhs.lower_left)?)?,
            upper_right: self
                .upper_left
                .mul(&rhs.upper_right)?
                .add(&self.upper_right.mul(&rhs.lower_right)?)?,
            lower_left: self
                .lower_left
                .mul(&rhs.upper_left)?
                .add(&self.lower_right.mul(&rhs.lower_left)?)?,
            lower_right: self
                .lower_left
                .mul(&rhs.upper_right)?
                .add(&self.lower_right.mul(&rhs.lower_right)?)?,
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        Ok(BlockOperator {
            upper_left: self.upper_left.add(&rhs.upper_left)?,
            upper_right: self.upper_right.add(&rhs.upper_right)?,
            lower_left: self.lower_left.add(&rhs.lower_left)?,
            lower_right: self.lower_right.add(&rhs.lower_right)?,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        BlockOperator {
            upper_left: self.upper_left.scale(c),
            upper_right: self.upper_right.scale(c),
            lower_left: self.lower_left.scale(c),
            lower_right: self.lower_right.scale(c),
        }
    }

    pub fn adjoint(&self) -> Self {
        BlockOperator {
            upper_left: self.upper_left.adjoint(),
            upper_right: self.lower_left.adjoint(),
            lower_left: self.upper_right.adjoint(),
            lower_right: self.lower_right.adjoint(),
        }
    }

    /// Column for basis vector `e_i` of the given half, as the pair of
    /// (upper rows, lower rows).
    pub fn apply(&self, half: Half, i: u64) -> (BTreeMap<u64, Complex64>, BTreeMap<u64, Complex64>) {
        match half {
            Half::Upper => (self.upper_left.apply(i), self.lower_left.apply(i)),
            Half::Lower => (self.upper_right.apply(i), self.lower_right.apply(i)),
        }
    }

    pub fn support_bound(&self) -> u64 {
        self.upper_left
            .support_bound()
            .max(self.upper_right.support_bound())
            .max(self.lower_left.support_bound())
            .max(self.lower_right.support_bound())
    }

    /// Window wide enough that no structure of `self` hides beyond it.
    pub fn suggested_window(&self, base: u64) -> u64 {
        (base + 2 * self.support_bound()).min(8192)
    }

    /// `max_{i ≤ k, both halves} ‖(self − other) e_i‖₂` with exact columns.
    pub fn window_residual(&self, other: &Self, k: u64) -> f64 {
        let mut worst = 0.0f64;
        for half in [Half::Upper, Half::Lower] {
            for i in 1..=k {
                let (mut up, mut lo) = self.apply(half, i);
                let (oup, olo) = other.apply(half, i);
                for (row, w) in oup {
                    *up.entry(row).or_default() -= w;
                }
                for (row, w) in olo {
                    *lo.entry(row).or_default() -= w;
                }
                let sq: f64 = up.values().chain(lo.values()).map(|w| w.norm_sqr()).sum();
                worst = worst.max(sq.sqrt());
            }
        }
        worst
    }

    pub fn window_eq(&self, other: &Self, k: u64, tol: f64) -> bool {
        self.window_residual(other, k) <= tol
    }

    /// `max(‖U*U − 1‖, ‖UU* − 1‖)` over the window's columns.
    pub fn unitarity_residual(&self, k: u64) -> Result<f64> {
        let adj = self.adjoint();
        let id = BlockOperator::identity();
        let r1 = adj.mul(self)?.window_residual(&id, k);
        let r2 = self.mul(&adj)?.window_residual(&id, k);
        Ok(r1.max(r2))
    }

    pub fn is_unitary_window(&self, k: u64, tol: f64) -> bool {
        match self.unitarity_residual(k) {
            Ok(r) => r <= tol,
            Err(_) => false,
        }
    }

    pub fn hermiticity_residual(&self, k: u64) -> f64 {
        self.window_residual(&self.adjoint(), k)
    }
}
