//! The eight generating block unitaries and words over them.
//!
//! A word is a finite product of generator letters (a generator or its
//! inverse) and block-diagonal letters with unitary payloads. The lemma
//! constructions here express shift powers inside the triangular and
//! reflection families as short words, and [`standardize_isometry`] reduces
//! an arbitrary in-class isometry to one of three canonical shapes so that
//! those lemma words apply after diagonal conjugation.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{BlockOperator, Progression, StructuredOperator};
use crate::spectral::{as_coordinate_projection, ascending_match, coordinate_form, IndexSet};

/// Window used when validating letter payloads and standardized factors.
pub const LETTER_CHECK_WINDOW: u64 = 64;
/// Unitarity tolerance for diagonal letter payloads.
pub const LETTER_CHECK_TOL: f64 = 1e-10;
/// Tolerance for isometry checks on standardization inputs.
pub const STANDARDIZE_EPS: f64 = 1e-8;

/// `[[u, 1-uu*], [0, u*]]`: unitary exactly when `u` is an isometry.
pub fn triangular(u: &StructuredOperator) -> Result<BlockOperator> {
    let defect = StructuredOperator::identity().sub(&u.mul(&u.adjoint())?)?;
    Ok(BlockOperator::new(
        u.clone(),
        defect,
        StructuredOperator::zero(),
        u.adjoint(),
    ))
}

/// `[[1/√2, u*/√2], [u/√2, 1 - (1 + 1/√2)uu*]]`: a self-adjoint block
/// involution for any isometry `u`.
pub fn reflection(u: &StructuredOperator) -> Result<BlockOperator> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let range = u.mul(&u.adjoint())?;
    let corner = StructuredOperator::identity().sub(&range.scale(Complex64::new(1.0 + FRAC_1_SQRT_2, 0.0)))?;
    Ok(BlockOperator::new(
        StructuredOperator::scalar(h),
        u.adjoint().scale(h),
        u.scale(h),
        corner,
    ))
}

/// The generating set, in serialization order 1 through 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorId {
    TriangularShift,
    TriangularDyadic,
    ReflectionOne,
    ReflectionShift,
    ReflectionDyadic,
    ReflectionShift2,
    ReflectionDyadic2,
    Swap,
}

impl GeneratorId {
    pub const ALL: [GeneratorId; 8] = [
        GeneratorId::TriangularShift,
        GeneratorId::TriangularDyadic,
        GeneratorId::ReflectionOne,
        GeneratorId::ReflectionShift,
        GeneratorId::ReflectionDyadic,
        GeneratorId::ReflectionShift2,
        GeneratorId::ReflectionDyadic2,
        GeneratorId::Swap,
    ];

    /// Serialization index, 1-based.
    pub fn index(self) -> u8 {
        Self::ALL.iter().position(|&g| g == self).unwrap() as u8 + 1
    }

    pub fn from_index(i: u8) -> Option<Self> {
        (1..=8).contains(&i).then(|| Self::ALL[i as usize - 1])
    }

    pub fn build(self) -> BlockOperator {
        let op = match self {
            GeneratorId::TriangularShift => triangular(&StructuredOperator::shift()),
            GeneratorId::TriangularDyadic => triangular(&StructuredOperator::dyadic()),
            GeneratorId::ReflectionOne => reflection(&StructuredOperator::identity()),
            GeneratorId::ReflectionShift => reflection(&StructuredOperator::shift()),
            GeneratorId::ReflectionDyadic => reflection(&StructuredOperator::dyadic()),
            GeneratorId::ReflectionShift2 => reflection(&StructuredOperator::shift_pow(2)),
            GeneratorId::ReflectionDyadic2 => {
                let squared = StructuredOperator::dyadic()
                    .mul(&StructuredOperator::dyadic())
                    .expect("dyadic composition stays in class");
                reflection(&squared)
            }
            GeneratorId::Swap => return BlockOperator::swap(),
        };
        op.expect("generator payloads stay in class")
    }
}

/// One factor of a word: a generator (possibly inverted) or a block-diagonal
/// unitary. Serialized as `{"gen": n, "inv": b}` or `{"diag": [upper, lower]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "LetterRepr", into = "LetterRepr")]
pub enum Letter {
    Gen {
        id: GeneratorId,
        inverse: bool,
    },
    Diag {
        upper: StructuredOperator,
        lower: StructuredOperator,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LetterRepr {
    Gen {
        gen: u8,
        #[serde(default)]
        inv: bool,
    },
    Diag {
        diag: [StructuredOperator; 2],
    },
}

impl TryFrom<LetterRepr> for Letter {
    type Error = Error;

    fn try_from(repr: LetterRepr) -> Result<Self> {
        match repr {
            LetterRepr::Gen { gen, inv } => {
                let id = GeneratorId::from_index(gen).ok_or_else(|| {
                    Error::InvalidInput(format!("generator index {gen} outside 1..=8"))
                })?;
                Ok(Letter::Gen { id, inverse: inv })
            }
            LetterRepr::Diag { diag } => {
                let [upper, lower] = diag;
                Letter::diag(upper, lower)
            }
        }
    }
}

impl From<Letter> for LetterRepr {
    fn from(letter: Letter) -> Self {
        match letter {
            Letter::Gen { id, inverse } => LetterRepr::Gen { gen: id.index(), inv: inverse },
            Letter::Diag { upper, lower } => LetterRepr::Diag { diag: [upper, lower] },
        }
    }
}

impl Letter {
    pub fn gen(id: GeneratorId) -> Self {
        Letter::Gen { id, inverse: false }
    }

    pub fn gen_inv(id: GeneratorId) -> Self {
        Letter::Gen { id, inverse: true }
    }

    /// Validating constructor for diagonal letters; both payloads must be
    /// unitary to [`LETTER_CHECK_TOL`] on [`LETTER_CHECK_WINDOW`] columns.
    pub fn diag(upper: StructuredOperator, lower: StructuredOperator) -> Result<Self> {
        for (side, op) in [("upper", &upper), ("lower", &lower)] {
            let r = op.unitarity_residual(LETTER_CHECK_WINDOW)?;
            if r > LETTER_CHECK_TOL {
                return Err(Error::InvalidInput(format!(
                    "{side} diagonal payload fails unitarity with residual {r:.3e}"
                )));
            }
        }
        Ok(Letter::Diag { upper, lower })
    }

    pub fn is_gen(&self) -> bool {
        matches!(self, Letter::Gen { .. })
    }

    pub fn evaluate(&self) -> BlockOperator {
        match self {
            Letter::Gen { id, inverse: false } => id.build(),
            Letter::Gen { id, inverse: true } => id.build().adjoint(),
            Letter::Diag { upper, lower } => BlockOperator::diag(upper.clone(), lower.clone()),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Letter::Gen { id, inverse } => Letter::Gen { id: *id, inverse: !inverse },
            Letter::Diag { upper, lower } => Letter::Diag {
                upper: upper.adjoint(),
                lower: lower.adjoint(),
            },
        }
    }
}

/// A finite product of letters, leftmost factor first.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letters that are generators, i.e. the length not counting diagonal
    /// conjugators.
    pub fn core_len(&self) -> usize {
        self.letters.iter().filter(|l| l.is_gen()).count()
    }

    /// Multiplies the letters out, left to right.
    pub fn evaluate(&self) -> Result<BlockOperator> {
        let mut acc = BlockOperator::identity();
        for letter in &self.letters {
            acc = acc.mul(&letter.evaluate())?;
        }
        Ok(acc)
    }

    /// The word for the adjoint product: letters reversed, each inverted.
    pub fn adjoint(&self) -> Self {
        Word::new(self.letters.iter().rev().map(Letter::adjoint).collect())
    }

    /// Merges runs of adjacent diagonal letters into single letters. Diagonal
    /// letters are kept even when they multiply to the identity, so word
    /// shapes stay stable across inputs of the same class.
    pub fn coalesced(&self) -> Result<Self> {
        let mut letters: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for letter in &self.letters {
            match (letters.last_mut(), letter) {
                (
                    Some(Letter::Diag { upper: au, lower: al }),
                    Letter::Diag { upper: bu, lower: bl },
                ) => {
                    *au = au.mul(bu)?;
                    *al = al.mul(bl)?;
                }
                _ => letters.push(letter.clone()),
            }
        }
        Ok(Word::new(letters))
    }
}

/// `e_i -> e_{k+1-i}` on the first `k` indices: self-adjoint, squares to the
/// projection on those indices.
pub fn flip_on_first(k: u64) -> StructuredOperator {
    StructuredOperator::from_entries((1..=k).map(|i| (k + 1 - i, i, Complex64::ONE)))
}

/// Rotation by the 2x2 Hadamard matrix on the plane of `e_i` and `e_j`.
pub fn hadamard_rotation(i: u64, j: u64) -> StructuredOperator {
    assert!(0 < i && i < j, "distinct indices expected");
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StructuredOperator::identity()
        .sub(&StructuredOperator::basis_projection(i))
        .and_then(|m| m.sub(&StructuredOperator::basis_projection(j)))
        .and_then(|m| {
            m.add(&StructuredOperator::from_entries([
                (i, i, h),
                (i, j, h),
                (j, i, h),
                (j, j, -h),
            ]))
        })
        .expect("plane rotation stays in class")
}

/// Word for the k-th power of the triangular shift generator, with its
/// target. The k-fold generator power already has the right diagonal; its
/// upper-right corner is the flip on the first k indices, which one diagonal
/// corrector letter turns into the defect projection. `k = 1` is the
/// generator itself.
pub fn shift_triangular_word(k: u64) -> (Word, BlockOperator) {
    assert!(k >= 1, "positive power expected");
    let mut letters = vec![Letter::gen(GeneratorId::TriangularShift); k as usize];
    if k >= 2 {
        let corrector = StructuredOperator::tail_identity(k + 1, Complex64::ONE)
            .add(&flip_on_first(k))
            .expect("corrector stays in class");
        letters.push(Letter::Diag {
            upper: StructuredOperator::identity(),
            lower: corrector,
        });
    }
    let target =
        triangular(&StructuredOperator::shift_pow(k)).expect("shift powers stay in class");
    (Word::new(letters), target)
}

/// Word for the reflection at the k-th shift power, with its target. Powers
/// 1 and 2 are generators; higher powers descend two steps at a time by
/// conjugating with the triangular shift generator and absorbing the seam
/// into a Hadamard rotation on the plane of `e_1` and `e_k`.
pub fn shift_reflection_word(k: u64) -> (Word, BlockOperator) {
    assert!(k >= 1, "positive power expected");
    let target =
        reflection(&StructuredOperator::shift_pow(k)).expect("shift powers stay in class");
    (Word::new(reflection_letters(k)), target)
}

fn reflection_letters(k: u64) -> Vec<Letter> {
    match k {
        1 => vec![Letter::gen(GeneratorId::ReflectionShift)],
        2 => vec![Letter::gen(GeneratorId::ReflectionShift2)],
        _ => {
            let mut letters = vec![
                Letter::Diag {
                    upper: StructuredOperator::identity(),
                    lower: hadamard_rotation(1, k),
                },
                Letter::gen_inv(GeneratorId::TriangularShift),
            ];
            letters.extend(reflection_letters(k - 2));
            letters.push(Letter::gen(GeneratorId::TriangularShift));
            letters
        }
    }
}

/// Residual of the seam identity behind [`shift_reflection_word`]: the
/// lower-right block produced by one descent step equals the Hadamard
/// rotation applied to the corresponding block of the target. Requires
/// `k >= 3`.
pub fn reflection_step_residual(k: u64) -> f64 {
    assert!(k >= 3, "descent starts at power 3");
    let shift = StructuredOperator::shift();
    let head = StructuredOperator::basis_projection(1);
    let up = StructuredOperator::shift_pow(k - 1);
    let inner = projection_on_first(k - 2);
    let root2 = Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let seam = head
        .add(&head.mul(&up.adjoint()).unwrap())
        .and_then(|m| m.add(&up.mul(&head).unwrap()))
        .and_then(|m| m.sub(&up.mul(&up.adjoint()).unwrap()))
        .and_then(|m| m.add(&shift.mul(&inner).unwrap().mul(&shift.adjoint()).unwrap().scale(root2)))
        .expect("seam stays in class");
    let corner = projection_on_first(k)
        .scale(root2)
        .sub(&StructuredOperator::shift_pow(k).mul(&StructuredOperator::shift_adj_pow(k)).unwrap())
        .expect("corner stays in class");
    let rotated = hadamard_rotation(1, k).mul(&seam).expect("rotation stays in class");
    rotated.window_residual(&corner, 2 * k + 16)
}

fn projection_on_first(k: u64) -> StructuredOperator {
    StructuredOperator::from_entries((1..=k).map(|i| (i, i, Complex64::ONE)))
}

/// The three defect shapes an in-class isometry can standardize to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanonicalIsometry {
    /// No defect: the input is unitary.
    Unit,
    /// Defect of finite rank k, carried by the k-th shift power.
    ShiftPower(u64),
    /// Infinite defect, carried by the dyadic spreading isometry.
    Dyadic,
}

impl CanonicalIsometry {
    pub fn operator(self) -> StructuredOperator {
        match self {
            CanonicalIsometry::Unit => StructuredOperator::identity(),
            CanonicalIsometry::ShiftPower(k) => StructuredOperator::shift_pow(k),
            CanonicalIsometry::Dyadic => StructuredOperator::dyadic(),
        }
    }

    /// Indices spanning `1 - cc*` for the canonical isometry `c`.
    fn defect_set(self) -> IndexSet {
        match self {
            CanonicalIsometry::Unit => IndexSet::empty(),
            CanonicalIsometry::ShiftPower(k) => IndexSet::from_members(1..=k),
            CanonicalIsometry::Dyadic => as_coordinate_projection(&StructuredOperator::tail_on(
                Progression::new(1, 2),
                Complex64::ONE,
            ))
            .expect("odd projection is coordinate"),
        }
    }
}

/// Factors an isometry as `u = a c` with `a` unitary and `c` canonical,
/// chosen by the dimension of `1 - uu*`. The unitary is the range
/// correction `u c*` plus an order-preserving bridge from the canonical
/// defect onto the actual one.
pub fn standardize_isometry(
    u: &StructuredOperator,
) -> Result<(StructuredOperator, CanonicalIsometry)> {
    let window = (LETTER_CHECK_WINDOW + 2 * u.support_bound()).min(8192);
    let gram = u.adjoint().mul(u)?;
    let iso_residual = gram.window_residual(&StructuredOperator::identity(), window);
    if iso_residual > STANDARDIZE_EPS {
        return Err(Error::InvalidInput(format!(
            "standardization input is not an isometry (residual {iso_residual:.3e})"
        )));
    }
    let defect = StructuredOperator::identity().sub(&u.mul(&u.adjoint())?)?;
    let (g, range) = coordinate_form(&defect).map_err(|e| match e {
        Error::UnsupportedClass { detail, .. } => Error::UnsupportedDefect(detail),
        other => other,
    })?;
    let canon = if range.is_empty() {
        CanonicalIsometry::Unit
    } else if let Some(n) = range.len() {
        CanonicalIsometry::ShiftPower(n as u64)
    } else {
        CanonicalIsometry::Dyadic
    };
    let a = match canon {
        CanonicalIsometry::Unit => u.clone(),
        _ => {
            let bridge = g
                .adjoint()
                .mul(&ascending_match(&canon.defect_set(), &range)?)?;
            u.mul(&canon.operator().adjoint())?.add(&bridge)?
        }
    };
    let residual = a.unitarity_residual(window)?;
    if residual > STANDARDIZE_EPS {
        return Err(Error::UnsupportedDefect(format!(
            "standardized factor fails unitarity with residual {residual:.3e}"
        )));
    }
    Ok((a, canon))
}

/// Word evaluating to the triangular block unitary of an isometry:
/// `diag(a, 1) * triangular(c) * diag(1, a*)` after standardization.
pub fn word_for_triangular(u: &StructuredOperator) -> Result<Word> {
    let (a, canon) = standardize_isometry(u)?;
    let mut letters = vec![Letter::Diag {
        upper: a.clone(),
        lower: StructuredOperator::identity(),
    }];
    match canon {
        CanonicalIsometry::Unit => {}
        CanonicalIsometry::ShiftPower(k) => letters.extend(shift_triangular_word(k).0.letters),
        CanonicalIsometry::Dyadic => letters.push(Letter::gen(GeneratorId::TriangularDyadic)),
    }
    letters.push(Letter::Diag {
        upper: StructuredOperator::identity(),
        lower: a.adjoint(),
    });
    Ok(Word::new(letters))
}

/// Word evaluating to the reflection block unitary of an isometry:
/// `diag(1, a) * reflection(c) * diag(1, a*)` after standardization.
pub fn word_for_reflection(u: &StructuredOperator) -> Result<Word> {
    let (a, canon) = standardize_isometry(u)?;
    let mut letters = vec![Letter::Diag {
        upper: StructuredOperator::identity(),
        lower: a.clone(),
    }];
    match canon {
        CanonicalIsometry::Unit => letters.push(Letter::gen(GeneratorId::ReflectionOne)),
        CanonicalIsometry::ShiftPower(k) => letters.extend(reflection_letters(k)),
        CanonicalIsometry::Dyadic => letters.push(Letter::gen(GeneratorId::ReflectionDyadic)),
    }
    letters.push(Letter::Diag {
        upper: StructuredOperator::identity(),
        lower: a.adjoint(),
    });
    Ok(Word::new(letters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Half;

    fn assert_close(b: &BlockOperator, target: &BlockOperator, k: u64, tol: f64) {
        let r = b.window_residual(target, k);
        assert!(r <= tol, "residual {r:.3e} exceeds {tol:.1e}");
    }

    #[test]
    fn all_generators_are_unitary() {
        for id in GeneratorId::ALL {
            let r = id.build().unitarity_residual(64).unwrap();
            assert!(r <= 1e-12, "{id:?} has unitarity residual {r:.3e}");
        }
    }

    #[test]
    fn indices_round_trip() {
        for id in GeneratorId::ALL {
            assert_eq!(GeneratorId::from_index(id.index()), Some(id));
        }
        assert_eq!(GeneratorId::from_index(0), None);
        assert_eq!(GeneratorId::from_index(9), None);
    }

    #[test]
    fn swap_exchanges_halves() {
        let swap = GeneratorId::Swap.build();
        let (upper, lower) = swap.apply(Half::Upper, 3);
        assert!(upper.is_empty());
        assert_eq!(lower[&3], Complex64::ONE);
        assert_close(&swap.mul(&swap).unwrap(), &BlockOperator::identity(), 32, 1e-15);
    }

    #[test]
    fn scalar_reflection_is_the_hadamard_involution() {
        let m = GeneratorId::ReflectionOne.build();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let expected = BlockOperator::new(
            StructuredOperator::scalar(h),
            StructuredOperator::scalar(h),
            StructuredOperator::scalar(h),
            StructuredOperator::scalar(-h),
        );
        assert_close(&m, &expected, 32, 1e-15);
        assert_close(&m.mul(&m).unwrap(), &BlockOperator::identity(), 32, 1e-15);
    }

    #[test]
    fn reflections_are_involutions() {
        for id in [
            GeneratorId::ReflectionShift,
            GeneratorId::ReflectionDyadic,
            GeneratorId::ReflectionShift2,
            GeneratorId::ReflectionDyadic2,
        ] {
            let m = id.build();
            assert_close(&m.adjoint(), &m, 48, 1e-12);
            assert_close(&m.mul(&m).unwrap(), &BlockOperator::identity(), 48, 1e-12);
        }
    }

    #[test]
    fn triangular_shift_has_rank_one_corner() {
        let m = GeneratorId::TriangularShift.build();
        let expected = BlockOperator::new(
            StructuredOperator::shift(),
            StructuredOperator::basis_projection(1),
            StructuredOperator::zero(),
            StructuredOperator::shift().adjoint(),
        );
        assert_close(&m, &expected, 48, 1e-15);
    }

    #[test]
    fn flip_squares_to_the_head_projection() {
        for k in 1..=6 {
            let a = flip_on_first(k);
            assert!(a.window_residual(&a.adjoint(), 16) <= 1e-15);
            let head = projection_on_first(k);
            assert!(a.mul(&a).unwrap().window_residual(&head, 16) <= 1e-15);
        }
    }

    #[test]
    fn triangular_power_words_hit_their_targets() {
        for k in 1..=6 {
            let (word, target) = shift_triangular_word(k);
            let expected_len = if k == 1 { 1 } else { k as usize + 1 };
            assert_eq!(word.len(), expected_len);
            assert_eq!(word.core_len(), k as usize);
            let window = target.suggested_window(96);
            assert_close(&word.evaluate().unwrap(), &target, window, 1e-12);
        }
    }

    #[test]
    fn reflection_power_words_hit_their_targets() {
        let lengths = [1, 1, 4, 4, 7, 7];
        for k in 1..=6u64 {
            let (word, target) = shift_reflection_word(k);
            assert_eq!(word.len(), lengths[k as usize - 1]);
            let window = target.suggested_window(96);
            assert_close(&word.evaluate().unwrap(), &target, window, 1e-10);
        }
    }

    #[test]
    fn reflection_descent_seam_is_exact() {
        for k in 3..=8 {
            let r = reflection_step_residual(k);
            assert!(r <= 1e-12, "seam residual {r:.3e} at power {k}");
        }
    }

    #[test]
    fn standardize_shift_power_needs_no_correction() {
        let (a, canon) = standardize_isometry(&StructuredOperator::shift_pow(3)).unwrap();
        assert_eq!(canon, CanonicalIsometry::ShiftPower(3));
        assert!(a.window_residual(&StructuredOperator::identity(), 32) <= 1e-12);
    }

    #[test]
    fn standardize_dyadic_needs_no_correction() {
        let (a, canon) = standardize_isometry(&StructuredOperator::dyadic()).unwrap();
        assert_eq!(canon, CanonicalIsometry::Dyadic);
        assert!(a.window_residual(&StructuredOperator::identity(), 64) <= 1e-12);
    }

    #[test]
    fn standardize_recovers_a_permutation_twist() {
        // u = (1 2)-transposition after the shift: e_1 -> e_1, e_i -> e_{i+1}.
        let u = StructuredOperator::from_entries([(1, 1, Complex64::ONE)])
            .add(&StructuredOperator::from_tail(
                Complex64::ONE,
                crate::kernel::AffineInjection::new(Progression::new(2, 1), 1, 1, 1).unwrap(),
            ))
            .unwrap();
        let (a, canon) = standardize_isometry(&u).unwrap();
        assert_eq!(canon, CanonicalIsometry::ShiftPower(1));
        let transposition = StructuredOperator::from_entries([
            (2, 1, Complex64::ONE),
            (1, 2, Complex64::ONE),
        ])
        .add(&StructuredOperator::tail_identity(3, Complex64::ONE))
        .unwrap();
        assert!(a.window_residual(&transposition, 48) <= 1e-12);
        let recomposed = a.mul(&canon.operator()).unwrap();
        assert!(recomposed.window_residual(&u, 48) <= 1e-12);
    }

    #[test]
    fn standardize_rejects_non_isometries() {
        let half = StructuredOperator::scalar(Complex64::new(0.5, 0.0));
        assert!(matches!(
            standardize_isometry(&half).unwrap_err(),
            Error::InvalidInput(_)
        ));
    }

    #[test]
    fn words_for_standardized_isometries_evaluate_back() {
        let twisted = StructuredOperator::from_entries([(1, 1, Complex64::I)])
            .add(&StructuredOperator::from_tail(
                Complex64::ONE,
                crate::kernel::AffineInjection::new(Progression::new(2, 1), 1, 1, 1).unwrap(),
            ))
            .unwrap();
        for u in [
            StructuredOperator::identity(),
            StructuredOperator::shift_pow(2),
            StructuredOperator::dyadic(),
            twisted,
        ] {
            let tri = word_for_triangular(&u).unwrap().evaluate().unwrap();
            let tri_target = triangular(&u).unwrap();
            assert_close(&tri, &tri_target, tri_target.suggested_window(64), 1e-10);
            let refl = word_for_reflection(&u).unwrap().evaluate().unwrap();
            let refl_target = reflection(&u).unwrap();
            assert_close(&refl, &refl_target, refl_target.suggested_window(64), 1e-10);
        }
    }

    #[test]
    fn word_adjoint_matches_operator_adjoint() {
        let word = Word::new(vec![
            Letter::gen(GeneratorId::TriangularShift),
            Letter::diag(hadamard_rotation(1, 3), StructuredOperator::identity()).unwrap(),
            Letter::gen_inv(GeneratorId::ReflectionShift),
        ]);
        let direct = word.evaluate().unwrap().adjoint();
        let reversed = word.adjoint().evaluate().unwrap();
        assert_close(&reversed, &direct, 48, 1e-12);
        let cancel = Word::new(vec![
            Letter::gen(GeneratorId::TriangularDyadic),
            Letter::gen_inv(GeneratorId::TriangularDyadic),
        ]);
        assert_close(&cancel.evaluate().unwrap(), &BlockOperator::identity(), 48, 1e-12);
    }

    #[test]
    fn coalescing_merges_diagonal_runs_only() {
        let word = Word::new(vec![
            Letter::Diag {
                upper: hadamard_rotation(1, 2),
                lower: StructuredOperator::identity(),
            },
            Letter::Diag {
                upper: StructuredOperator::identity(),
                lower: hadamard_rotation(2, 5),
            },
            Letter::gen(GeneratorId::ReflectionOne),
            Letter::Diag {
                upper: StructuredOperator::identity(),
                lower: StructuredOperator::identity(),
            },
        ]);
        let merged = word.coalesced().unwrap();
        assert_eq!(merged.len(), 3);
        assert_eq!(merged.core_len(), 1);
        let before = word.evaluate().unwrap();
        assert_close(&merged.evaluate().unwrap(), &before, 32, 1e-12);
    }

    #[test]
    fn letters_serialize_to_the_wire_shape() {
        let word = Word::new(vec![
            Letter::gen_inv(GeneratorId::ReflectionShift),
            Letter::diag(StructuredOperator::identity(), StructuredOperator::shift().mul(&StructuredOperator::shift().adjoint()).unwrap().add(&StructuredOperator::basis_projection(1)).unwrap()).unwrap(),
        ]);
        let json = serde_json::to_string(&word).unwrap();
        assert!(json.contains("\"gen\":4"), "{json}");
        assert!(json.contains("\"inv\":true"), "{json}");
        assert!(json.contains("\"diag\""), "{json}");
        let back: Word = serde_json::from_str(&json).unwrap();
        assert_close(
            &back.evaluate().unwrap(),
            &word.evaluate().unwrap(),
            48,
            1e-12,
        );
    }

    #[test]
    fn deserialization_validates_letters() {
        assert!(serde_json::from_str::<Word>(r#"[{"gen": 9}]"#).is_err());
        assert!(serde_json::from_str::<Word>(r#"[{"gen": 3}]"#).is_ok());
        let skewed = serde_json::to_string(&vec![LetterRepr::Diag {
            diag: [
                StructuredOperator::scalar(Complex64::new(0.5, 0.0)),
                StructuredOperator::identity(),
            ],
        }])
        .unwrap();
        assert!(serde_json::from_str::<Word>(&skewed).is_err());
    }
}
