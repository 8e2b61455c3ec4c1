//! Self-adjoint operators that are a finite Hermitian block plus a real
//! scalar tail, together with their eigendecompositions and functional
//! calculus. Everything downstream that needs spectra funnels through here.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::StructuredOperator;

/// Hermiticity tolerance when admitting an operator into the class.
pub const HERM_EPS: f64 = 1e-12;
/// Band around 1 treated as the eigenvalue-1 eigenspace.
pub const EIGEN_ONE_EPS: f64 = 1e-9;
/// Eigenvalues at most this are treated as kernel when inverting.
pub const KERNEL_EPS: f64 = 1e-10;
/// Allowed overshoot outside [0, 1] before clamping fails.
pub const CLAMP_EPS: f64 = 1e-10;
/// Tolerance for recognizing 0/1 spectra of projections.
pub const PROJ_EPS: f64 = 1e-6;

/// Operator of the form `B ⊕ λ·1`: an n×n Hermitian block on indices
/// `1..=n` and the scalar `λ` on every index beyond.
#[derive(Clone, Debug)]
pub struct FiniteScalarSelfAdjoint {
    block: DMatrix<Complex64>,
    tail_scalar: f64,
}

impl FiniteScalarSelfAdjoint {
    /// Admits `block ⊕ tail·1` after verifying the block is Hermitian.
    pub fn from_parts(block: DMatrix<Complex64>, tail_scalar: f64) -> Result<Self> {
        if block.nrows() != block.ncols() {
            return Err(Error::NotHermitian(format!(
                "block is {}x{}",
                block.nrows(),
                block.ncols()
            )));
        }
        let herm = max_modulus(&(&block - block.adjoint()));
        if herm > HERM_EPS {
            return Err(Error::NotHermitian(format!(
                "block asymmetry {herm:.3e} exceeds {HERM_EPS:.0e}"
            )));
        }
        let block = (&block + block.adjoint()).scale(0.5);
        Ok(Self { block, tail_scalar })
    }

    /// Recognizes an operator of this shape. The only tails allowed are
    /// identity maps on full tails `{i : i > start}`; their combined weight
    /// beyond the dense support is the scalar, and any prefix of a tail that
    /// overlaps the dense square is absorbed into the block.
    pub fn detect(op: &StructuredOperator) -> Result<Self> {
        let mut tail_weight = Complex64::ZERO;
        for term in op.tails() {
            let (a, b, d) = term.map.coefficients();
            let full = term.map.domain().modulus() == Some(1);
            if !(a == 1 && b == 0 && d == 1 && full) {
                return Err(Error::UnsupportedClass {
                    stage: "spectral-detect",
                    detail: format!("non-scalar tail {:?}", term.map),
                });
            }
            tail_weight += term.weight;
        }
        if tail_weight.im.abs() > HERM_EPS {
            return Err(Error::NotHermitian(format!(
                "tail weight {tail_weight} is not real"
            )));
        }
        let n = op.support_bound();
        let mut block = DMatrix::<Complex64>::zeros(n as usize, n as usize);
        for j in 1..=n {
            for (i, w) in op.apply(j) {
                if i > n {
                    return Err(Error::UnsupportedClass {
                        stage: "spectral-detect",
                        detail: format!("entry ({i}, {j}) escapes the dense square of side {n}"),
                    });
                }
                block[((i - 1) as usize, (j - 1) as usize)] = w;
            }
        }
        Self::from_parts(block, tail_weight.re)
    }

    pub fn dim(&self) -> usize {
        self.block.nrows()
    }

    pub fn tail_scalar(&self) -> f64 {
        self.tail_scalar
    }

    pub fn block(&self) -> &DMatrix<Complex64> {
        &self.block
    }

    pub fn to_operator(&self) -> StructuredOperator {
        let mut out = from_matrix(&self.block);
        if self.tail_scalar != 0.0 {
            out = out
                .add(&StructuredOperator::tail_identity(
                    self.dim() as u64 + 1,
                    Complex64::new(self.tail_scalar, 0.0),
                ))
                .expect("scalar tail never overflows");
        }
        out
    }

    /// Full eigendecomposition, deterministically ordered: eigenvalues
    /// ascending, ties kept in solver order, each eigenvector's largest
    /// component rotated to the positive real axis.
    pub fn eig(&self) -> SpectralData {
        let n = self.dim();
        if n == 0 {
            return SpectralData {
                eigenvalues: Vec::new(),
                eigenvectors: DMatrix::zeros(0, 0),
                tail_scalar: self.tail_scalar,
            };
        }
        let decomp = self.block.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            decomp.eigenvalues[a]
                .partial_cmp(&decomp.eigenvalues[b])
                .expect("eigenvalues of a Hermitian block are finite")
        });
        let mut eigenvalues = Vec::with_capacity(n);
        let mut eigenvectors = DMatrix::<Complex64>::zeros(n, n);
        for (slot, &src) in order.iter().enumerate() {
            eigenvalues.push(decomp.eigenvalues[src]);
            let mut col = decomp.eigenvectors.column(src).clone_owned();
            let pivot = (0..n).max_by(|&a, &b| {
                col[a]
                    .norm()
                    .partial_cmp(&col[b].norm())
                    .expect("finite amplitudes")
                    .then(b.cmp(&a))
            });
            if let Some(p) = pivot {
                let amp = col[p];
                if amp.norm() > 0.0 {
                    col *= amp.conj() / amp.norm();
                }
            }
            eigenvectors.set_column(slot, &col);
        }
        SpectralData {
            eigenvalues,
            eigenvectors,
            tail_scalar: self.tail_scalar,
        }
    }
}

/// Eigendecomposition of a [`FiniteScalarSelfAdjoint`]: `V Λ V* ⊕ λ·1`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
    pub tail_scalar: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V* ⊕ f(λ)·1` as a structured operator.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> StructuredOperator {
        let n = self.dim();
        let mut block = DMatrix::<Complex64>::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let col = self.eigenvectors.column(k);
            let w = f(lambda);
            if w.norm() == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    block[(i, j)] += w * col[i] * col[j].conj();
                }
            }
        }
        let mut out = from_matrix(&block);
        let tail = f(self.tail_scalar);
        if tail.norm() > 0.0 {
            out = out
                .add(&StructuredOperator::tail_identity(n as u64 + 1, tail))
                .expect("scalar tail never overflows");
        }
        out
    }

    /// Spectral projection onto the eigenvalues selected by `pred`.
    pub fn projection_where(&self, pred: impl Fn(f64) -> bool) -> StructuredOperator {
        self.map(|x| {
            if pred(x) {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
    }

    /// The reflection `1 - 2·proj` over the eigenvalues selected by `pred`.
    pub fn reflection_where(&self, pred: impl Fn(f64) -> bool) -> StructuredOperator {
        self.map(|x| {
            if pred(x) {
                -Complex64::ONE
            } else {
                Complex64::ONE
            }
        })
    }

    /// Maximum deviation of `V Λ V* ⊕ λ` from the admitted operator.
    pub fn reconstruction_residual(&self, source: &FiniteScalarSelfAdjoint) -> f64 {
        let op = self.map(|x| Complex64::new(x, 0.0));
        op.window_residual(&source.to_operator(), source.dim() as u64 + 4)
    }
}

/// The functions of the calculus. All act on spectra expected in [0, 1];
/// values straying beyond by more than [`CLAMP_EPS`] are rejected, closer
/// ones are clamped onto the interval first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalcFn {
    Arccos,
    Cos,
    Sqrt,
    ExpIArccos,
    ExpNegIArccos,
}

impl CalcFn {
    fn name(self) -> &'static str {
        match self {
            CalcFn::Arccos => "arccos",
            CalcFn::Cos => "cos",
            CalcFn::Sqrt => "sqrt",
            CalcFn::ExpIArccos => "exp(+i arccos)",
            CalcFn::ExpNegIArccos => "exp(-i arccos)",
        }
    }

    fn needs_unit_interval(self) -> bool {
        !matches!(self, CalcFn::Cos)
    }

    fn eval(self, x: f64) -> Complex64 {
        match self {
            CalcFn::Arccos => Complex64::new(x.acos(), 0.0),
            CalcFn::Cos => Complex64::new(x.cos(), 0.0),
            CalcFn::Sqrt => Complex64::new(x.sqrt(), 0.0),
            CalcFn::ExpIArccos => Complex64::new(0.0, x.acos()).exp(),
            CalcFn::ExpNegIArccos => Complex64::new(0.0, -x.acos()).exp(),
        }
    }
}

/// Applies `f` through the eigendecomposition of `t`.
pub fn func_calc(t: &FiniteScalarSelfAdjoint, f: CalcFn) -> Result<StructuredOperator> {
    let spec = t.eig();
    let clamp = |x: f64| -> Result<f64> {
        if !f.needs_unit_interval() {
            return Ok(x);
        }
        if !(-CLAMP_EPS..=1.0 + CLAMP_EPS).contains(&x) {
            return Err(Error::DomainViolation(format!(
                "{} applied to spectral value {x:.12e} outside [0, 1]",
                f.name()
            )));
        }
        Ok(x.clamp(0.0, 1.0))
    };
    let mut clamped = Vec::with_capacity(spec.dim());
    for &x in &spec.eigenvalues {
        clamped.push(clamp(x)?);
    }
    let tail = clamp(spec.tail_scalar)?;
    let spec = SpectralData {
        eigenvalues: clamped,
        eigenvectors: spec.eigenvectors,
        tail_scalar: tail,
    };
    Ok(spec.map(|x| f.eval(x)))
}

/// Polar decomposition `T = u·|T|` with `u` a partial isometry supported on
/// the closure of the range of `|T|`. Requires `T*T` to land in the class.
pub fn polar_decompose(t: &StructuredOperator) -> Result<(StructuredOperator, FiniteScalarSelfAdjoint)> {
    let gram = t.adjoint().mul(t)?;
    let gram = FiniteScalarSelfAdjoint::detect(&gram)?;
    let spec = gram.eig();
    for &x in &spec.eigenvalues {
        if x < -CLAMP_EPS {
            return Err(Error::DomainViolation(format!(
                "gram spectrum dips to {x:.3e}"
            )));
        }
    }
    let n = spec.dim();
    let mut abs_block = DMatrix::<Complex64>::zeros(n, n);
    for (k, &x) in spec.eigenvalues.iter().enumerate() {
        let col = spec.eigenvectors.column(k);
        let w = x.max(0.0).sqrt();
        for i in 0..n {
            for j in 0..n {
                abs_block[(i, j)] += w * col[i] * col[j].conj();
            }
        }
    }
    let abs = FiniteScalarSelfAdjoint::from_parts(abs_block, spec.tail_scalar.max(0.0).sqrt())?;
    let inv_abs = spec.map(|x| {
        if x > KERNEL_EPS {
            Complex64::new(1.0 / x.max(0.0).sqrt(), 0.0)
        } else {
            Complex64::ZERO
        }
    });
    let u = t.mul(&inv_abs)?;
    Ok((u, abs))
}

/// Dense block at indices `1..=n` as a structured operator.
pub fn from_matrix(m: &DMatrix<Complex64>) -> StructuredOperator {
    StructuredOperator::from_entries((0..m.nrows()).flat_map(|i| {
        (0..m.ncols()).map(move |j| (i as u64 + 1, j as u64 + 1, m[(i, j)]))
    }))
}

fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
