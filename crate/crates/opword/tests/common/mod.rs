//! Shared oracles for the integration suites. Everything here recomputes
//! results through plain dense linear algebra so the structured library is
//! checked against an independent path: a cyclic Jacobi eigensolver for
//! Hermitian matrices, and a truncated-matrix evaluator that tracks which
//! columns and rows of the truncation are exact.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opword::kernel::StructuredOperator;

pub fn seeded_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&salt.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let radius = (-2.0 * uniform(rng).ln()).sqrt();
    let angle = std::f64::consts::TAU * uniform(rng);
    (radius * angle.cos(), radius * angle.sin())
}

/// Random Hermitian matrix with entries of modest size.
pub fn seeded_hermitian(seed: u64, n: usize) -> DMatrix<Complex64> {
    let mut rng = seeded_rng(seed, 0xa5);
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let (re, im) = gaussian_pair(&mut rng);
            g[(r, c)] = Complex64::new(re, im);
        }
    }
    (&g + g.adjoint()).scale(0.5)
}

/// Cyclic Jacobi eigensolver for Hermitian matrices. Each sweep visits all
/// off-diagonal pairs, peels the phase of the pivot entry, and applies the
/// real rotation that zeroes it. Returns eigenvalues ascending with matching
/// eigenvector columns.
pub fn jacobi_hermitian_eig(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let pivot = a[(p, q)];
                if pivot.norm() <= 1e-18 * scale {
                    continue;
                }
                let phase = pivot / pivot.norm();
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let theta = 0.5 * (2.0 * pivot.norm()).atan2(alpha - beta);
                let (c, s) = (theta.cos(), theta.sin());
                // Plane rotation J: columns p, q of any X update as
                // Xp' = c Xp + s conj(phase) Xq, Xq' = -s phase Xp + c Xq.
                let jp = |xp: Complex64, xq: Complex64| xp * c + xq * phase.conj() * s;
                let jq = |xp: Complex64, xq: Complex64| xq * c - xp * phase * s;
                for r in 0..n {
                    let (xp, xq) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = jp(xp, xq);
                    a[(r, q)] = jq(xp, xq);
                }
                for col in 0..n {
                    let (xp, xq) = (a[(p, col)], a[(q, col)]);
                    a[(p, col)] = jp(xp.conj(), xq.conj()).conj();
                    a[(q, col)] = jq(xp.conj(), xq.conj()).conj();
                }
                for r in 0..n {
                    let (xp, xq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = jp(xp, xq);
                    v[(r, q)] = jq(xp, xq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    (values, vectors)
}

/// `f` applied to a Hermitian matrix through the Jacobi eigensolver.
pub fn jacobi_func(m: &DMatrix<Complex64>, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
    let n = m.nrows();
    let (values, vectors) = jacobi_hermitian_eig(m);
    let mut diag = DMatrix::<Complex64>::zeros(n, n);
    for (i, &lambda) in values.iter().enumerate() {
        diag[(i, i)] = f(lambda);
    }
    &vectors * diag * vectors.adjoint()
}

/// A `k x k` truncation of an operator together with how much of it is
/// honest: columns `1..=col_valid` of the truncation equal the operator's
/// true columns (nothing was clipped), and symmetrically for rows. Both
/// bounds shrink under composition exactly as clipping can propagate.
pub struct DenseOracle {
    pub m: DMatrix<Complex64>,
    pub col_valid: usize,
    pub row_valid: usize,
}

const ORACLE_TINY: f64 = 1e-14;

impl DenseOracle {
    fn k(&self) -> usize {
        self.m.nrows()
    }

    pub fn identity(k: usize) -> Self {
        DenseOracle { m: DMatrix::identity(k, k), col_valid: k, row_valid: k }
    }

    pub fn scalar(k: usize, c: Complex64) -> Self {
        DenseOracle { m: DMatrix::<Complex64>::identity(k, k).map(|z| z * c), col_valid: k, row_valid: k }
    }

    pub fn shift(k: usize) -> Self {
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k - 1 {
            m[(i + 1, i)] = Complex64::ONE;
        }
        // Column k maps out of the window.
        DenseOracle { m, col_valid: k - 1, row_valid: k }
    }

    pub fn dyadic(k: usize) -> Self {
        let mut m = DMatrix::zeros(k, k);
        for i in 1..=k / 2 {
            m[(2 * i - 1, i - 1)] = Complex64::ONE;
        }
        DenseOracle { m, col_valid: k / 2, row_valid: k }
    }

    pub fn head_projection(k: usize) -> Self {
        let mut m = DMatrix::zeros(k, k);
        m[(0, 0)] = Complex64::ONE;
        DenseOracle { m, col_valid: k, row_valid: k }
    }

    pub fn adjoint(&self) -> Self {
        DenseOracle { m: self.m.adjoint(), col_valid: self.row_valid, row_valid: self.col_valid }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        DenseOracle { m: self.m.map(|z| z * c), col_valid: self.col_valid, row_valid: self.row_valid }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        DenseOracle {
            m: &self.m + &rhs.m,
            col_valid: self.col_valid.min(rhs.col_valid),
            row_valid: self.row_valid.min(rhs.row_valid),
        }
    }

    /// `self * rhs`. A product column is honest while the factor column is
    /// honest and its support stays inside the left factor's honest columns.
    pub fn mul(&self, rhs: &Self) -> Self {
        let k = self.k();
        let mut col_valid = 0;
        'cols: for j in 0..rhs.col_valid {
            for i in 0..k {
                if rhs.m[(i, j)].norm() > ORACLE_TINY && i >= self.col_valid {
                    break 'cols;
                }
            }
            col_valid = j + 1;
        }
        let mut row_valid = 0;
        'rows: for i in 0..self.row_valid {
            for j in 0..k {
                if self.m[(i, j)].norm() > ORACLE_TINY && j >= rhs.row_valid {
                    break 'rows;
                }
            }
            row_valid = i + 1;
        }
        DenseOracle { m: &self.m * &rhs.m, col_valid, row_valid }
    }
}

/// Random expression over the shift algebra, built twice: once in the
/// structured ring and once on dense truncations. The two stay in lockstep
/// by construction, so any disagreement on honest columns is a library bug.
pub fn random_expression(seed: u64, k: usize) -> (StructuredOperator, DenseOracle) {
    let mut rng = seeded_rng(seed, 0xe7);
    let depth = 1 + (rng.next_u64() % 5) as u32;
    build_node(&mut rng, depth, k)
}

fn build_atom(rng: &mut ChaCha8Rng, k: usize) -> (StructuredOperator, DenseOracle) {
    match rng.next_u64() % 5 {
        0 => (StructuredOperator::shift(), DenseOracle::shift(k)),
        1 => (StructuredOperator::dyadic(), DenseOracle::dyadic(k)),
        2 => (StructuredOperator::identity(), DenseOracle::identity(k)),
        3 => (
            StructuredOperator::basis_projection(1),
            DenseOracle::head_projection(k),
        ),
        _ => {
            let angle = std::f64::consts::TAU * uniform(rng);
            let c = Complex64::new(angle.cos(), angle.sin());
            (StructuredOperator::scalar(c), DenseOracle::scalar(k, c))
        }
    }
}

fn build_node(rng: &mut ChaCha8Rng, depth: u32, k: usize) -> (StructuredOperator, DenseOracle) {
    if depth == 0 {
        return build_atom(rng, k);
    }
    match rng.next_u64() % 10 {
        0 | 1 => build_atom(rng, k),
        2..=4 => {
            let (a, oa) = build_node(rng, depth - 1, k);
            let (b, ob) = build_node(rng, depth - 1, k);
            (a.mul(&b).expect("product stays representable"), oa.mul(&ob))
        }
        5 | 6 => {
            let (a, oa) = build_node(rng, depth - 1, k);
            let (b, ob) = build_node(rng, depth - 1, k);
            (a.add(&b).expect("sum stays representable"), oa.add(&ob))
        }
        7 | 8 => {
            let (a, oa) = build_node(rng, depth - 1, k);
            (a.adjoint(), oa.adjoint())
        }
        _ => {
            let (a, oa) = build_node(rng, depth - 1, k);
            let angle = std::f64::consts::TAU * uniform(rng);
            let c = Complex64::new(angle.cos(), angle.sin());
            (a.scale(c), oa.scale(c))
        }
    }
}

/// Worst disagreement between the structured operator and the truncation,
/// over the oracle's honest columns and honest rows. Also returns how many
/// lines were actually compared.
pub fn oracle_disagreement(op: &StructuredOperator, oracle: &DenseOracle) -> (f64, usize) {
    let k = oracle.k();
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for j in 1..=oracle.col_valid {
        compared += 1;
        let column = op.apply(j as u64);
        for (&idx, &w) in &column {
            assert!(idx as usize <= k, "honest column {j} leaked to index {idx}");
            worst = worst.max((w - oracle.m[(idx as usize - 1, j - 1)]).norm());
        }
        for i in 1..=k {
            if !column.contains_key(&(i as u64)) {
                worst = worst.max(oracle.m[(i - 1, j - 1)].norm());
            }
        }
    }
    let adj = op.adjoint();
    for i in 1..=oracle.row_valid {
        compared += 1;
        let row = adj.apply(i as u64);
        for (&idx, &w) in &row {
            assert!(idx as usize <= k, "honest row {i} leaked to index {idx}");
            worst = worst.max((w.conj() - oracle.m[(i - 1, idx as usize - 1)]).norm());
        }
        for j in 1..=k {
            if !row.contains_key(&(j as u64)) {
                worst = worst.max(oracle.m[(i - 1, j - 1)].norm());
            }
        }
    }
    (worst, compared)
}
