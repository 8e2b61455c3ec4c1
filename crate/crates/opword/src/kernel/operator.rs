//! Operators on ℓ²(ℕ) stored as a finite sparse block plus weighted affine tails.
//!
//! An operator here is the sum of a sparse complex matrix (column-major, finitely
//! many entries) and finitely many tail terms `w · Σ_{i ∈ dom f} e_{f(i)} ⟨e_i, ·⟩`.
//! Index bookkeeping is exact; only the complex weights are floating point.
//! The class is closed under sum, product, scalar multiple, and adjoint.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::affine::AffineInjection;
use super::progression::Progression;
use crate::error::{Error, Result};

/// Weights at or below this magnitude are treated as accumulated rounding junk.
pub const DROP_EPS: f64 = 1e-14;

/// Caps on representation size; hitting one means the expression left the
/// intended class (products of generators and finite-rank perturbations).
const MAX_TAILS: usize = 4096;
const MAX_DENSE: usize = 1 << 22;

/// One weighted affine tail: column `i` holds `weight` at row `map(i)`, for
/// every `i` in the map's domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailTerm {
    pub weight: Complex64,
    pub map: AffineInjection,
}

/// Sparse block + tail terms. The operator is the sum of both parts; the
/// sparse block may correct finitely many columns inside tail territory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct StructuredOperator {
    /// column -> row -> weight
    dense: BTreeMap<u64, BTreeMap<u64, Complex64>>,
    tails: Vec<TailTerm>,
}

impl StructuredOperator {
    pub fn zero() -> Self {
        StructuredOperator::default()
    }

    /// `c · 1`, as a single identity-map tail over all indices.
    pub fn scalar(c: Complex64) -> Self {
        if c.norm() <= DROP_EPS {
            return StructuredOperator::zero();
        }
        StructuredOperator::from_tail(c, AffineInjection::identity_on(Progression::full()).unwrap())
    }

    pub fn identity() -> Self {
        StructuredOperator::scalar(Complex64::new(1.0, 0.0))
    }

    /// `e_i -> e_{i+k}`.
    pub fn shift_pow(k: u64) -> Self {
        let map = AffineInjection::new(Progression::full(), 1, k as i64, 1).unwrap();
        StructuredOperator::from_tail(Complex64::new(1.0, 0.0), map)
    }

    /// `e_i -> e_{i-k}` for `i > k`, zero below.
    pub fn shift_adj_pow(k: u64) -> Self {
        let map = AffineInjection::new(Progression::tail(k + 1), 1, -(k as i64), 1).unwrap();
        StructuredOperator::from_tail(Complex64::new(1.0, 0.0), map)
    }

    pub fn shift() -> Self {
        StructuredOperator::shift_pow(1)
    }

    /// `e_i -> e_{2i}`.
    pub fn dyadic() -> Self {
        let map = AffineInjection::new(Progression::full(), 2, 0, 1).unwrap();
        StructuredOperator::from_tail(Complex64::new(1.0, 0.0), map)
    }

    pub fn from_tail(weight: Complex64, map: AffineInjection) -> Self {
        let mut op = StructuredOperator { dense: BTreeMap::new(), tails: vec![TailTerm { weight, map }] };
        op.canonicalize();
        op
    }

    /// `weight` times the identity map restricted to `domain` (a diagonal
    /// projection multiple when the weight is real).
    pub fn tail_on(domain: Progression, weight: Complex64) -> Self {
        match AffineInjection::identity_on(domain) {
            Ok(map) => StructuredOperator::from_tail(weight, map),
            Err(_) => StructuredOperator::zero(),
        }
    }

    /// `weight · Σ_{i ≥ start} e_i ⟨e_i, ·⟩`.
    pub fn tail_identity(start: u64, weight: Complex64) -> Self {
        StructuredOperator::tail_on(Progression::tail(start), weight)
    }

    pub fn from_entries<I: IntoIterator<Item = (u64, u64, Complex64)>>(entries: I) -> Self {
        let mut dense: BTreeMap<u64, BTreeMap<u64, Complex64>> = BTreeMap::new();
        for (row, col, w) in entries {
            assert!(row >= 1 && col >= 1, "indices start at 1");
            *dense.entry(col).or_default().entry(row).or_default() += w;
        }
        let mut op = StructuredOperator { dense, tails: Vec::new() };
        op.canonicalize();
        op
    }

    /// Rank-one projection onto the span of `e_i`.
    pub fn basis_projection(i: u64) -> Self {
        StructuredOperator::from_entries([(i, i, Complex64::new(1.0, 0.0))])
    }

    pub fn tails(&self) -> &[TailTerm] {
        &self.tails
    }

    pub fn dense_entries(&self) -> impl Iterator<Item = (u64, u64, Complex64)> + '_ {
        self.dense
            .iter()
            .flat_map(|(&col, rows)| rows.iter().map(move |(&row, &w)| (row, col, w)))
    }

    pub fn is_zero(&self) -> bool {
        self.dense.is_empty() && self.tails.is_empty()
    }

    /// Exact column `A · e_i` as row -> weight.
    pub fn apply(&self, i: u64) -> BTreeMap<u64, Complex64> {
        let mut col = self.dense.get(&i).cloned().unwrap_or_default();
        for t in &self.tails {
            if let Some(row) = t.map.apply(i) {
                *col.entry(row).or_default() += t.weight;
            }
        }
        col.retain(|_, w| w.norm() > DROP_EPS);
        col
    }

    /// All structure (sparse entries, tail starts and their first hops) lives
    /// at indices ≤ this bound; beyond it every column follows its tails.
    pub fn support_bound(&self) -> u64 {
        let mut bound = 0;
        for (&col, rows) in &self.dense {
            bound = bound.max(col);
            if let Some((&row, _)) = rows.iter().next_back() {
                bound = bound.max(row);
            }
        }
        for t in &self.tails {
            if let Progression::Seq { start, .. } = t.map.domain() {
                bound = bound.max(start).max(t.map.apply_unchecked(start));
            }
        }
        bound
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let mut dense = self.dense.clone();
        for (&col, rows) in &rhs.dense {
            let out = dense.entry(col).or_default();
            for (&row, &w) in rows {
                *out.entry(row).or_default() += w;
            }
        }
        let mut tails = self.tails.clone();
        tails.extend_from_slice(&rhs.tails);
        let mut op = StructuredOperator { dense, tails };
        op.canonicalize();
        op.check_size()?;
        Ok(op)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut op = self.clone();
        for rows in op.dense.values_mut() {
            for w in rows.values_mut() {
                *w *= c;
            }
        }
        for t in &mut op.tails {
            t.weight *= c;
        }
        op.canonicalize();
        op
    }

    pub fn adjoint(&self) -> Self {
        let mut dense: BTreeMap<u64, BTreeMap<u64, Complex64>> = BTreeMap::new();
        for (&col, rows) in &self.dense {
            for (&row, &w) in rows {
                dense.entry(row).or_default().insert(col, w.conj());
            }
        }
        let tails = self
            .tails
            .iter()
            .map(|t| TailTerm { weight: t.weight.conj(), map: t.map.invert() })
            .collect();
        let mut op = StructuredOperator { dense, tails };
        op.canonicalize();
        op
    }

    /// `self ∘ rhs`, exact within the class.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        let mut dense: BTreeMap<u64, BTreeMap<u64, Complex64>> = BTreeMap::new();
        // Sparse columns of rhs feed through all of self.
        for (&col, rows) in &rhs.dense {
            let out = dense.entry(col).or_default();
            for (&k, &w) in rows {
                for (row, v) in self.apply(k) {
                    *out.entry(row).or_default() += w * v;
                }
            }
        }
        let mut tails = Vec::new();
        for u in &rhs.tails {
            // Tail-through-tail stays a tail.
            for t in &self.tails {
                if let Some(map) = t.map.compose(&u.map)? {
                    tails.push(TailTerm { weight: t.weight * u.weight, map });
                }
            }
            // Tail columns landing on sparse columns of self pick up sparse
            // corrections at the preimage index.
            let inv = u.map.invert();
            for (&c, rows) in &self.dense {
                if let Some(i) = inv.apply(c) {
                    let out = dense.entry(i).or_default();
                    for (&row, &w) in rows {
                        *out.entry(row).or_default() += u.weight * w;
                    }
                }
            }
        }
        let mut op = StructuredOperator { dense, tails };
        op.canonicalize();
        op.check_size()?;
        Ok(op)
    }

    /// Merge tails sharing a map, drop junk weights, sort deterministically.
    fn canonicalize(&mut self) {
        if !self.tails.is_empty() {
            let mut merged: BTreeMap<AffineInjection, Complex64> = BTreeMap::new();
            for t in &self.tails {
                *merged.entry(t.map).or_default() += t.weight;
            }
            self.tails = merged
                .into_iter()
                .filter(|(_, w)| w.norm() > DROP_EPS)
                .map(|(map, weight)| TailTerm { weight, map })
                .collect();
            self.tails.sort_by_key(|t| {
                let (a, b, d) = t.map.coefficients();
                (a, d, b, t.map.domain())
            });
        }
        self.dense.retain(|_, rows| {
            rows.retain(|_, w| w.norm() > DROP_EPS);
            !rows.is_empty()
        });
    }

    fn check_size(&self) -> Result<()> {
        if self.tails.len() > MAX_TAILS {
            return Err(Error::ClassOverflow(format!("{} tail terms", self.tails.len())));
        }
        let entries: usize = self.dense.values().map(|r| r.len()).sum();
        if entries > MAX_DENSE {
            return Err(Error::ClassOverflow(format!("{entries} sparse entries")));
        }
        Ok(())
    }

    /// `max_{i ≤ k} ‖(self − other) e_i‖₂`, with exact columns on both sides.
    pub fn window_residual(&self, other: &Self, k: u64) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=k {
            let mut col = self.apply(i);
            for (row, w) in other.apply(i) {
                *col.entry(row).or_default() -= w;
            }
            let sq: f64 = col.values().map(|w| w.norm_sqr()).sum();
            worst = worst.max(sq.sqrt());
        }
        worst
    }

    pub fn window_eq(&self, other: &Self, k: u64, tol: f64) -> bool {
        self.window_residual(other, k) <= tol
    }

    /// `max(‖A*A − 1‖, ‖AA* − 1‖)` over the window's columns.
    pub fn unitarity_residual(&self, k: u64) -> Result<f64> {
        let adj = self.adjoint();
        let id = StructuredOperator::identity();
        let r1 = adj.mul(self)?.window_residual(&id, k);
        let r2 = self.mul(&adj)?.window_residual(&id, k);
        Ok(r1.max(r2))
    }

    pub fn hermiticity_residual(&self, k: u64) -> f64 {
        self.window_residual(&self.adjoint(), k)
    }
}

#[derive(Serialize, Deserialize)]
struct TailRepr {
    re: f64,
    im: f64,
    a: u64,
    b: i64,
    d: u64,
    start: u64,
    #[serde(rename = "mod")]
    modulus: u64,
    res: u64,
}

/// Wire form: `cutoff` is the largest index below every tail domain, `dense`
/// rows are `[row, col, re, im]`, tails carry the map `i -> (a·i + b)/d` on
/// `{i ≥ start, i ≡ res (mod)}`.
#[derive(Serialize, Deserialize)]
pub struct OperatorRepr {
    cutoff: u64,
    dense: Vec<(u64, u64, f64, f64)>,
    tails: Vec<TailRepr>,
}

impl From<StructuredOperator> for OperatorRepr {
    fn from(op: StructuredOperator) -> Self {
        let cutoff = op
            .tails
            .iter()
            .filter_map(|t| match t.map.domain() {
                Progression::Seq { start, .. } => Some(start - 1),
                Progression::Empty => None,
            })
            .min()
            .unwrap_or(0);
        let dense = op.dense_entries().map(|(r, c, w)| (r, c, w.re, w.im)).collect();
        let tails = op
            .tails
            .iter()
            .map(|t| {
                let (a, b, d) = t.map.coefficients();
                let (start, modulus, residue) = match t.map.domain() {
                    Progression::Seq { start, modulus, residue } => (start, modulus, residue),
                    Progression::Empty => unreachable!("canonical tails have nonempty domains"),
                };
                TailRepr { re: t.weight.re, im: t.weight.im, a, b, d, start, modulus, res: residue }
            })
            .collect();
        OperatorRepr { cutoff, dense, tails }
    }
}

impl TryFrom<OperatorRepr> for StructuredOperator {
    type Error = Error;

    fn try_from(repr: OperatorRepr) -> Result<Self> {
        let mut tails = Vec::with_capacity(repr.tails.len());
        for t in &repr.tails {
            let domain = Progression::new(t.start, t.modulus);
            if let Progression::Seq { residue, .. } = domain {
                if residue != t.res {
                    return Err(Error::InvalidInput(format!(
                        "tail residue {} does not match start {} mod {}",
                        t.res, t.start, t.modulus
                    )));
                }
            }
            if t.start <= repr.cutoff {
                return Err(Error::InvalidInput(format!(
                    "tail starting at {} crosses cutoff {}",
                    t.start, repr.cutoff
                )));
            }
            let map = AffineInjection::new(domain, t.a, t.b, t.d)?;
            tails.push(TailTerm { weight: Complex64::new(t.re, t.im), map });
        }
        let mut dense: BTreeMap<u64, BTreeMap<u64, Complex64>> = BTreeMap::new();
        for &(row, col, re, im) in &repr.dense {
            if row < 1 || col < 1 {
                return Err(Error::InvalidInput(format!("entry at ({row}, {col}): indices start at 1")));
            }
            *dense.entry(col).or_default().entry(row).or_default() += Complex64::new(re, im);
        }
        let mut op = StructuredOperator { dense, tails };
        op.canonicalize();
        op.check_size()?;
        Ok(op)
    }
}
