//! Staged factorization of in-class block unitaries into generator words.
//!
//! The pipeline peels a block unitary into a triangular factor, a
//! self-adjoint middle, and diagonal twists, then expresses the middle
//! through two reflection letters around a spectral rotation. Every stage
//! records the residuals of the identities it relies on, so a failed
//! factorization is attributable to a specific seam.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    triangular, word_for_reflection, word_for_triangular, GeneratorId, Letter, Word,
};
use crate::kernel::{BlockOperator, StructuredOperator};
use crate::spectral::{
    ascending_match, coordinate_form, extend_partial_isometry, polar_decompose, ExtendMode,
    FiniteScalarSelfAdjoint, CLAMP_EPS, EIGEN_ONE_EPS, KERNEL_EPS,
};

/// Residual below which an input is taken verbatim as a known letter.
const FAST_PATH_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct FactorizeOpts {
    /// Base verification window; widened by the operator's own support.
    pub window: u64,
    /// Acceptance tolerance for the input and the reconstruction.
    pub tol: f64,
    /// Expected ceiling for the per-stage identity residuals.
    pub stage_tol: f64,
}

impl Default for FactorizeOpts {
    fn default() -> Self {
        FactorizeOpts { window: 64, tol: 1e-8, stage_tol: 1e-9 }
    }
}

/// What one pipeline stage measured, in execution order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    /// Named residuals of the identities this stage relies on.
    pub residuals: Vec<(String, f64)>,
    /// Decisions taken and structural observations.
    pub flags: Vec<String>,
    /// Letters emitted by the time the stage closed.
    pub word_len_after: usize,
}

impl StageRecord {
    fn new(name: &str) -> Self {
        StageRecord {
            name: name.into(),
            residuals: Vec::new(),
            flags: Vec::new(),
            word_len_after: 0,
        }
    }

    fn residual(&mut self, name: &str, value: f64) {
        self.residuals.push((name.into(), value));
    }

    fn flag(&mut self, note: impl Into<String>) {
        self.flags.push(note.into());
    }
}

/// Full account of one factorization run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub stages: Vec<StageRecord>,
    /// The adjoint was factored and the word inverted.
    pub flipped: bool,
    /// The halves were exchanged for the inner factorization.
    pub swapped: bool,
    pub word_len: usize,
    pub word_len_core: usize,
    pub final_residual: f64,
}

impl PipelineTrace {
    /// Largest residual recorded across all stages.
    pub fn max_stage_residual(&self) -> f64 {
        self.stages
            .iter()
            .flat_map(|s| s.residuals.iter().map(|(_, r)| *r))
            .fold(0.0, f64::max)
    }
}

/// Kernel dimension of an in-class operator, measured against the whole
/// space: either finitely many directions vanish or all but finitely many.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KernelDim {
    Finite(usize),
    Cofinite(usize),
}

impl KernelDim {
    fn describe(self) -> String {
        match self {
            KernelDim::Finite(n) => format!("finite {n}"),
            KernelDim::Cofinite(d) => format!("cofinite, complement {d}"),
        }
    }

    /// Strictly larger as a dimension; cofinite kernels compare by how
    /// little they leave out.
    fn exceeds(self, other: Self) -> bool {
        match (self, other) {
            (KernelDim::Finite(a), KernelDim::Finite(b)) => a > b,
            (KernelDim::Finite(_), KernelDim::Cofinite(_)) => false,
            (KernelDim::Cofinite(_), KernelDim::Finite(_)) => true,
            (KernelDim::Cofinite(a), KernelDim::Cofinite(b)) => a < b,
        }
    }
}

fn kernel_dim(op: &StructuredOperator) -> Result<KernelDim> {
    let gram = op.adjoint().mul(op)?;
    let fssa =
        FiniteScalarSelfAdjoint::detect(&gram).map_err(|e| restage(e, "adjoint_flip"))?;
    let spec = fssa.eig();
    let zeros = spec.eigenvalues.iter().filter(|&&x| x <= KERNEL_EPS).count();
    if spec.tail_scalar <= KERNEL_EPS {
        Ok(KernelDim::Cofinite(spec.eigenvalues.len() - zeros))
    } else {
        Ok(KernelDim::Finite(zeros))
    }
}

fn restage(e: Error, stage: &'static str) -> Error {
    match e {
        Error::UnsupportedClass { detail, .. } => Error::UnsupportedClass { stage, detail },
        Error::NotUnitary { residual, .. } => Error::NotUnitary { stage, residual },
        Error::DimensionObstruction { detail, .. } => {
            Error::DimensionObstruction { stage, detail }
        }
        other => other,
    }
}

/// Factors a block unitary into a word over the generating set.
///
/// The returned word reproduces the input within `opts.tol` on the
/// verification window; the trace carries per-stage residuals and the
/// measured reconstruction error. Inputs failing the entry unitarity check
/// are rejected, and inputs outside the supported operator class surface as
/// [`Error::UnsupportedClass`] naming the stage that gave up.
pub fn factorize(input: &BlockOperator, opts: &FactorizeOpts) -> Result<(Word, PipelineTrace)> {
    let window = input.suggested_window(opts.window);
    let mut stages = Vec::new();
    let mut entry = StageRecord::new("unitarity_check");
    let entry_residual = input.unitarity_residual(window)?;
    entry.residual("input unitarity", entry_residual);
    stages.push(entry);
    if entry_residual > opts.tol {
        return Err(Error::NotUnitary { stage: "unitarity_check", residual: entry_residual });
    }

    let mut flipped = false;
    let mut swapped = false;
    let (letters, note) = match fast_path(input, opts) {
        Some((letters, note)) => (letters, Some(note)),
        None => (
            run(input, opts, true, &mut stages, &mut flipped, &mut swapped)?,
            None,
        ),
    };
    let word = Word::new(letters).coalesced()?;
    let final_residual = word.evaluate()?.window_residual(input, window);

    let mut assemble = StageRecord::new("assemble");
    assemble.residual("reconstruction", final_residual);
    if let Some(note) = note {
        assemble.flag(note);
    }
    assemble.word_len_after = word.len();
    stages.push(assemble);

    let trace = PipelineTrace {
        stages,
        flipped,
        swapped,
        word_len: word.len(),
        word_len_core: word.core_len(),
        final_residual,
    };
    Ok((word, trace))
}

/// Recognizes inputs that already are single letters.
fn fast_path(input: &BlockOperator, opts: &FactorizeOpts) -> Option<(Vec<Letter>, String)> {
    let window = input.suggested_window(opts.window);
    if input.window_residual(&BlockOperator::identity(), window) <= FAST_PATH_EPS {
        return Some((Vec::new(), "identity input".into()));
    }
    for id in GeneratorId::ALL {
        for inverse in [false, true] {
            let letter = Letter::Gen { id, inverse };
            let op = letter.evaluate();
            let joint = window.max(op.suggested_window(opts.window));
            if input.window_residual(&op, joint) <= FAST_PATH_EPS {
                let note = format!(
                    "single generator {}{}",
                    id.index(),
                    if inverse { ", inverted" } else { "" }
                );
                return Some((vec![letter], note));
            }
        }
    }
    if input.is_block_diagonal() {
        let letter =
            Letter::diag(input.upper_left.clone(), input.lower_right.clone()).ok()?;
        return Some((vec![letter], "block diagonal input".into()));
    }
    None
}

/// The staged pipeline proper; emits letters for a unitary already past the
/// entry check. Set `allow_swap` on the first pass only.
fn run(
    input: &BlockOperator,
    opts: &FactorizeOpts,
    allow_swap: bool,
    stages: &mut Vec<StageRecord>,
    flipped: &mut bool,
    swapped: &mut bool,
) -> Result<Vec<Letter>> {
    // Factor whichever of the input or its adjoint has the smaller corner
    // kernel, so the triangular peel always has room to extend.
    let mut rec = StageRecord::new("adjoint_flip");
    let ker = kernel_dim(&input.upper_left)?;
    rec.flag(format!("corner kernel {}", ker.describe()));
    let flip = if ker == KernelDim::Finite(0) {
        false
    } else {
        let coker = kernel_dim(&input.upper_left.adjoint())?;
        rec.flag(format!("corner cokernel {}", coker.describe()));
        if matches!((ker, coker), (KernelDim::Cofinite(_), KernelDim::Cofinite(_))) {
            rec.flag("cofinite comparison");
        }
        ker.exceeds(coker)
    };
    if flip {
        rec.flag("factoring the adjoint");
        stages.push(rec);
        *flipped = true;
        let inner = run(&input.adjoint(), opts, allow_swap, stages, flipped, swapped)?;
        return Ok(Word::new(inner).adjoint().letters);
    }
    stages.push(rec);

    // Peel a triangular letter so the corner becomes positive: the corner's
    // polar isometry, extended to a full isometry, is the peel.
    let mut rec = StageRecord::new("positivize");
    let (partial, abs) =
        polar_decompose(&input.upper_left).map_err(|e| restage(e, "positivize"))?;
    let iso = extend_partial_isometry(&partial, ExtendMode::ToIsometry, None)
        .map_err(|e| restage(e, "positivize"))?;
    let peeled = triangular(&iso)?.adjoint().mul(input)?;
    let positive = abs.to_operator();
    let spec = abs.eig();
    let window = peeled.suggested_window(opts.window);
    rec.residual(
        "positive corner agreement",
        peeled.upper_left.window_residual(&positive, window),
    );
    rec.residual(
        "positive corner hermiticity",
        peeled.upper_left.hermiticity_residual(window),
    );
    let m1_letters = word_for_triangular(&iso)?.letters;
    stages.push(rec);

    // Both off-corner blocks factor through sqrt(1 - corner^2); the same
    // spectral band that defines the fixed space truncates the inverse.
    let mut rec = StageRecord::new("isometry_factors");
    let band = |x: f64| x >= 1.0 - EIGEN_ONE_EPS;
    let half_inv = spec.map(|x| {
        if band(x) {
            Complex64::ZERO
        } else {
            Complex64::new(1.0 / (1.0 - x * x).sqrt(), 0.0)
        }
    });
    let half = spec.map(|x| {
        if band(x) {
            Complex64::ZERO
        } else {
            Complex64::new((1.0 - x * x).sqrt(), 0.0)
        }
    });
    let col = peeled.lower_left.mul(&half_inv)?;
    let row = peeled.upper_right.adjoint().mul(&half_inv)?;
    rec.residual(
        "column seam",
        peeled.lower_left.window_residual(&col.mul(&half)?, window),
    );
    rec.residual(
        "row seam",
        peeled.upper_right.window_residual(&half.mul(&row.adjoint())?, window),
    );
    let fixed = spec.projection_where(band);
    let moving = StructuredOperator::identity().sub(&fixed)?;
    rec.residual(
        "column initial space",
        col.adjoint().mul(&col)?.window_residual(&moving, window),
    );
    rec.residual(
        "row initial space",
        row.adjoint().mul(&row)?.window_residual(&moving, window),
    );
    stages.push(rec);

    // A diagonal twist makes the peeled unitary self-adjoint. The twist is
    // the row-column exchange extended by the corner's own deficiency map.
    let mut rec = StageRecord::new("symmetrize");
    let deficiency = peeled
        .lower_right
        .add(&col.mul(&positive)?.mul(&row.adjoint())?)?;
    let twist = extend_partial_isometry(
        &row.mul(&col.adjoint())?,
        ExtendMode::ToUnitary,
        Some(&deficiency.adjoint()),
    )
    .map_err(|e| restage(e, "symmetrize"))?;
    let symmetric = peeled.mul(&BlockOperator::diag(
        StructuredOperator::identity(),
        twist.clone(),
    ))?;
    rec.residual("twist unitarity", twist.unitarity_residual(window)?);
    rec.residual("symmetric form hermiticity", symmetric.hermiticity_residual(window));
    stages.push(rec);

    // Put the corner's fixed space and the column factor's range defect in
    // coordinate form; the bridge between them is built index by index.
    let mut rec = StageRecord::new("normalize_projections");
    let defect = StructuredOperator::identity().sub(&col.mul(&col.adjoint())?)?;
    let (frame_upper, fixed_set) =
        coordinate_form(&fixed).map_err(|e| restage(e, "normalize_projections"))?;
    let (frame_lower, defect_set) =
        coordinate_form(&defect).map_err(|e| restage(e, "normalize_projections"))?;
    rec.residual(
        "fixed space conjugation",
        frame_upper
            .mul(&fixed)?
            .mul(&frame_upper.adjoint())?
            .window_residual(&fixed_set.projection(), window),
    );
    rec.residual(
        "defect conjugation",
        frame_lower
            .mul(&defect)?
            .mul(&frame_lower.adjoint())?
            .window_residual(&defect_set.projection(), window),
    );
    rec.flag(format!("fixed space {}", describe_set_size(fixed_set.len())));
    rec.flag(format!("range defect {}", describe_set_size(defect_set.len())));
    stages.push(rec);

    // Fill the column factor's dead directions with a bridge onto the
    // defect. When the defect is too small the halves are exchanged and the
    // pipeline reruns once on the swapped middle.
    let mut rec = StageRecord::new("extend_isometry");
    let obstructed = match (fixed_set.len(), defect_set.len()) {
        (None, Some(_)) => true,
        (Some(need), Some(room)) => need > room,
        _ => false,
    };
    if obstructed {
        if !allow_swap {
            return Err(Error::DimensionObstruction {
                stage: "extend_isometry",
                detail: format!(
                    "fixed space {} exceeds range defect {} after swap",
                    describe_set_size(fixed_set.len()),
                    describe_set_size(defect_set.len()),
                ),
            });
        }
        rec.flag("exchanging halves");
        stages.push(rec);
        *swapped = true;
        let swap = BlockOperator::swap();
        let exchanged = swap.mul(&symmetric)?.mul(&swap)?;
        let inner = run(&exchanged, opts, false, stages, flipped, swapped)?;
        let mut letters = m1_letters;
        letters.push(Letter::gen(GeneratorId::Swap));
        letters.extend(inner);
        letters.push(Letter::gen(GeneratorId::Swap));
        letters.push(Letter::Diag {
            upper: StructuredOperator::identity(),
            lower: twist.adjoint(),
        });
        return Ok(letters);
    }
    let bridge = ascending_match(&fixed_set, &defect_set)
        .map_err(|e| restage(e, "extend_isometry"))?;
    let tilted_col = frame_lower.mul(&col)?.mul(&frame_upper.adjoint())?;
    let extended = tilted_col.add(&bridge)?;
    rec.residual(
        "extension isometry",
        extended
            .adjoint()
            .mul(&extended)?
            .window_residual(&StructuredOperator::identity(), window),
    );
    let landing = bridge.mul(&bridge.adjoint())?;
    rec.residual(
        "landing inside defect",
        defect_set
            .projection()
            .mul(&landing)?
            .window_residual(&landing, window),
    );
    stages.push(rec);

    // Spectral rotation: the positive corner is the cosine of a self-adjoint
    // angle, and the two unit-circle exponentials of that angle drive the
    // reflection sandwich. The fixed-space band snaps to angle zero so the
    // bridge directions stay silent in the sine.
    let mut rec = StageRecord::new("functional_calculus");
    let tilted = frame_upper.mul(&positive)?.mul(&frame_upper.adjoint())?;
    let tilted_fssa = FiniteScalarSelfAdjoint::detect(&tilted)
        .map_err(|e| restage(e, "functional_calculus"))?;
    let tilted_spec = tilted_fssa.eig();
    for x in tilted_spec.eigenvalues.iter().copied().chain([tilted_spec.tail_scalar]) {
        if !(-CLAMP_EPS..=1.0 + CLAMP_EPS).contains(&x) {
            return Err(Error::DomainViolation(format!(
                "corner spectrum reaches {x:.6e}, outside the unit interval"
            )));
        }
    }
    let rot_pos = tilted_spec.map(|x| {
        if band(x) {
            Complex64::ONE
        } else {
            Complex64::new(0.0, x.clamp(0.0, 1.0).acos()).exp()
        }
    });
    let rot_neg = rot_pos.adjoint();
    let sine = tilted_spec.map(|x| {
        if band(x) {
            Complex64::ZERO
        } else {
            Complex64::new((1.0 - x * x).sqrt(), 0.0)
        }
    });
    rec.residual("rotation unitarity", rot_pos.unitarity_residual(window)?);
    rec.residual(
        "rotation pair product",
        rot_pos
            .mul(&rot_neg)?
            .window_residual(&StructuredOperator::identity(), window),
    );
    let halved = Complex64::new(0.5, 0.0);
    rec.residual(
        "cosine split",
        rot_pos
            .add(&rot_neg)?
            .scale(halved)
            .window_residual(&tilted, window),
    );
    rec.residual(
        "sine kernel alignment",
        sine.mul(&fixed_set.projection())?
            .window_residual(&StructuredOperator::zero(), window),
    );
    let cap = StructuredOperator::identity().sub(&extended.mul(&extended.adjoint())?)?;
    let mirrored = extended.mul(&rot_neg)?.mul(&extended.adjoint())?.sub(&cap)?;
    rec.residual("mirror unitarity", mirrored.unitarity_residual(window)?);
    stages.push(rec);

    let refl = word_for_reflection(&extended)?;
    let neg_i = StructuredOperator::scalar(Complex64::new(0.0, -1.0));
    let sign_flip = StructuredOperator::identity()
        .sub(&landing.scale(Complex64::new(2.0, 0.0)))?;
    let mut letters = m1_letters;
    letters.push(Letter::Diag {
        upper: frame_upper.adjoint(),
        lower: frame_lower.adjoint(),
    });
    letters.push(Letter::Diag {
        upper: StructuredOperator::identity(),
        lower: neg_i.clone(),
    });
    letters.extend(refl.letters.clone());
    letters.push(Letter::Diag { upper: rot_pos, lower: mirrored });
    letters.extend(refl.letters);
    letters.push(Letter::Diag { upper: StructuredOperator::identity(), lower: neg_i });
    letters.push(Letter::Diag { upper: StructuredOperator::identity(), lower: sign_flip });
    letters.push(Letter::Diag { upper: frame_upper, lower: frame_lower });
    letters.push(Letter::Diag {
        upper: StructuredOperator::identity(),
        lower: twist.adjoint(),
    });
    Ok(letters)
}

fn describe_set_size(len: Option<usize>) -> String {
    match len {
        Some(n) => format!("finite {n}"),
        None => "infinite".into(),
    }
}

/// Evaluates a word on exactly `window` columns against a target, failing
/// when the residual exceeds `tol`.
pub fn verify_word(
    word: &Word,
    target: &BlockOperator,
    window: u64,
    tol: f64,
) -> Result<f64> {
    let residual = word.evaluate()?.window_residual(target, window);
    if residual > tol {
        return Err(Error::NotUnitary { stage: "verify_word", residual });
    }
    Ok(residual)
}

/// Whether `a b a* b*` reproduces `t` on the window.
pub fn commutator_verify(
    t: &BlockOperator,
    a: &BlockOperator,
    b: &BlockOperator,
    window: u64,
    tol: f64,
) -> Result<bool> {
    let commutator = a.mul(b)?.mul(&a.adjoint())?.mul(&b.adjoint())?;
    Ok(commutator.window_eq(t, window, tol))
}
