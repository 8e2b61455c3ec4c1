//! Index-set bookkeeping for projections.
//!
//! A coordinate projection is one whose range is spanned by basis vectors.
//! [`coordinate_form`] conjugates a supported projection into that shape and
//! [`ascending_match`] builds the order-preserving partial isometry between
//! two such ranges, which is the raw material for isometry extensions.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{AffineInjection, Progression, StructuredOperator};

use super::fssa::{from_matrix, FiniteScalarSelfAdjoint, PROJ_EPS};

/// Tolerance for reading 0/1 entries off a coordinate projection.
const COORD_EPS: f64 = 1e-9;
/// Iteration guard for runaway enumerations.
const MATCH_CAP: usize = 1 << 20;

/// A set of basis indices: explicit members up to `bound`, then the indices
/// beyond `bound` whose residue mod `modulus` lies in `residues`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    bound: u64,
    finite: BTreeSet<u64>,
    modulus: u64,
    residues: BTreeSet<u64>,
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet { bound: 0, finite: BTreeSet::new(), modulus: 1, residues: BTreeSet::new() }
    }

    pub fn full() -> Self {
        IndexSet { bound: 0, finite: BTreeSet::new(), modulus: 1, residues: [0].into() }
    }

    pub fn from_members<I: IntoIterator<Item = u64>>(members: I) -> Self {
        let finite: BTreeSet<u64> = members.into_iter().collect();
        let bound = finite.iter().next_back().copied().unwrap_or(0);
        IndexSet { bound, finite, modulus: 1, residues: BTreeSet::new() }
    }

    pub fn contains(&self, i: u64) -> bool {
        if i == 0 {
            return false;
        }
        if i <= self.bound {
            self.finite.contains(&i)
        } else {
            self.residues.contains(&(i % self.modulus))
        }
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && self.residues.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    /// Number of members, when finite.
    pub fn len(&self) -> Option<usize> {
        self.is_finite().then_some(self.finite.len())
    }

    /// Ascending members; endless when the set is infinite.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let regular = (self.bound + 1..).filter(|i| self.residues.contains(&(i % self.modulus)));
        self.finite.iter().copied().chain(if self.is_finite() {
            // Avoid walking an empty residue filter forever.
            Box::new(std::iter::empty()) as Box<dyn Iterator<Item = u64>>
        } else {
            Box::new(regular)
        })
    }

    /// Members per `modulus`-length stretch beyond the bound.
    fn period_count(&self) -> usize {
        self.residues.len()
    }

    /// Projection onto the spanned coordinates, as dense entries below the
    /// bound plus one identity tail per residue class.
    pub fn projection(&self) -> StructuredOperator {
        let mut op = StructuredOperator::from_entries(
            self.finite.iter().map(|&i| (i, i, Complex64::ONE)),
        );
        for &r in &self.residues {
            let dom = Progression::solve(r, self.modulus, self.bound + 1);
            op = op
                .add(&StructuredOperator::tail_on(dom, Complex64::ONE))
                .expect("projection tails never overflow");
        }
        op
    }

    /// The complement within the full index set.
    pub fn complement(&self) -> Self {
        let finite = (1..=self.bound).filter(|&i| !self.finite.contains(&i)).collect();
        let residues = (0..self.modulus).filter(|r| !self.residues.contains(r)).collect();
        IndexSet { bound: self.bound, finite, modulus: self.modulus, residues }
    }
}

/// Reads an index set off an operator that already is a coordinate
/// projection; `None` when it is not.
pub fn as_coordinate_projection(p: &StructuredOperator) -> Option<IndexSet> {
    let mut modulus = 1u64;
    for t in p.tails() {
        if !t.map.is_identity() {
            return None;
        }
        let m = t.map.domain().modulus()?;
        modulus = lcm(modulus, m)?;
    }
    let bound = p.support_bound();
    let mut finite = BTreeSet::new();
    for i in 1..=bound {
        let col = p.apply(i);
        match col.len() {
            0 => {}
            1 => {
                let (&row, &w) = col.iter().next()?;
                if row != i || (w - Complex64::ONE).norm() > COORD_EPS {
                    return None;
                }
                finite.insert(i);
            }
            _ => return None,
        }
    }
    let mut residues = BTreeSet::new();
    for r in 0..modulus {
        // Beyond the bound, membership of i depends only on i mod modulus.
        let mut w = Complex64::ZERO;
        for t in p.tails() {
            if let Progression::Seq { modulus: m, residue, .. } = t.map.domain() {
                if r % m == residue {
                    w += t.weight;
                }
            }
        }
        if (w - Complex64::ONE).norm() <= COORD_EPS {
            residues.insert(r);
        } else if w.norm() > COORD_EPS {
            return None;
        }
    }
    Some(IndexSet { bound, finite, modulus, residues })
}

/// Conjugates a supported projection to coordinate form: returns a unitary
/// `g` and the index set `E` with `g p g* = proj(E)`. Coordinate inputs pass
/// through with `g = 1`; otherwise the projection must admit an
/// eigendecomposition, whose spectrum is checked to be 0/1.
pub fn coordinate_form(p: &StructuredOperator) -> Result<(StructuredOperator, IndexSet)> {
    if p.is_zero() {
        return Ok((StructuredOperator::identity(), IndexSet::empty()));
    }
    if let Some(set) = as_coordinate_projection(p) {
        return Ok((StructuredOperator::identity(), set));
    }
    let fssa = FiniteScalarSelfAdjoint::detect(p)?;
    let spec = fssa.eig();
    let check = |x: f64| -> Result<bool> {
        if (x - 1.0).abs() <= PROJ_EPS {
            Ok(true)
        } else if x.abs() <= PROJ_EPS {
            Ok(false)
        } else {
            Err(Error::UnsupportedClass {
                stage: "coordinate-form",
                detail: format!("spectral value {x:.6e} of a would-be projection is not 0/1"),
            })
        }
    };
    let n = spec.dim() as u64;
    let mut finite = BTreeSet::new();
    for (k, &x) in spec.eigenvalues.iter().enumerate() {
        if check(x)? {
            finite.insert(k as u64 + 1);
        }
    }
    let tail_in = check(spec.tail_scalar)?;
    let g = {
        let mut op = from_matrix(&spec.eigenvectors.adjoint());
        op = op
            .add(&StructuredOperator::tail_identity(n + 1, Complex64::ONE))
            .expect("unitary embedding never overflows");
        op
    };
    let set = IndexSet {
        bound: n,
        finite,
        modulus: 1,
        residues: if tail_in { [0].into() } else { BTreeSet::new() },
    };
    Ok((g, set))
}

/// Order-preserving partial isometry sending the `j`-th member of `src` to
/// the `j`-th member of `dst`: full on `proj(src)`, into `proj(dst)`, and
/// onto it unless `src` is finite. Fails when `dst` is too small.
pub fn ascending_match(src: &IndexSet, dst: &IndexSet) -> Result<StructuredOperator> {
    if src.is_finite() {
        let wanted = src.finite.len();
        let targets: Vec<u64> = dst.iter().take(wanted).collect();
        if targets.len() < wanted {
            return Err(Error::DimensionObstruction {
                stage: "ascending-match",
                detail: format!("{} source indices, only {} targets", wanted, targets.len()),
            });
        }
        return Ok(StructuredOperator::from_entries(
            src.finite.iter().zip(targets).map(|(&s, d)| (d, s, Complex64::ONE)),
        ));
    }
    if dst.is_finite() {
        return Err(Error::DimensionObstruction {
            stage: "ascending-match",
            detail: format!("infinite source, {} targets", dst.finite.len()),
        });
    }
    // Both infinite. Pair members in order until both enumerations are past
    // their irregular prefixes, then the pairing repeats with fixed strides.
    let period = lcm_usize(src.period_count(), dst.period_count());
    let src_stride = src.modulus * (period / src.period_count()) as u64;
    let dst_stride = dst.modulus * (period / dst.period_count()) as u64;
    let mut pairs = src.iter().zip(dst.iter());
    let mut dense = Vec::new();
    let mut regular = Vec::with_capacity(period);
    loop {
        if dense.len() > MATCH_CAP {
            return Err(Error::ClassOverflow("ascending match enumeration".into()));
        }
        let (s, d) = pairs.next().expect("infinite enumerations");
        if s > src.bound && d > dst.bound {
            regular.push((s, d));
            if regular.len() == period {
                break;
            }
        } else {
            debug_assert!(regular.is_empty(), "regular regime is reached simultaneously");
            dense.push((d, s, Complex64::ONE));
        }
    }
    let mut op = StructuredOperator::from_entries(dense);
    for (s, d) in regular {
        let map = AffineInjection::new(
            Progression::new(s, src_stride),
            dst_stride,
            d as i64 * src_stride as i64 - dst_stride as i64 * s as i64,
            src_stride,
        )?;
        op = op.add(&StructuredOperator::from_tail(Complex64::ONE, map))?;
    }
    Ok(op)
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    let g = gcd(a, b);
    (a / g).checked_mul(b)
}

fn lcm_usize(a: usize, b: usize) -> usize {
    lcm(a as u64, b as u64).expect("period counts are tiny") as usize
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_match(m: &StructuredOperator, src: &IndexSet, dst: &IndexSet, k: u64) {
        // m*m is the projection on src; m m* lands inside the projection on dst.
        let mm = m.adjoint().mul(m).unwrap();
        assert!(mm.window_residual(&src.projection(), k) <= 1e-12);
        let into = m.mul(&m.adjoint()).unwrap();
        let clipped = dst.projection().mul(&into).unwrap();
        assert!(into.window_residual(&clipped, k) <= 1e-12);
    }

    #[test]
    fn coordinate_detection_reads_tails_and_entries() {
        let p = StructuredOperator::basis_projection(2)
            .add(&StructuredOperator::tail_on(Progression::new(5, 2), Complex64::ONE))
            .unwrap();
        let set = as_coordinate_projection(&p).unwrap();
        let members: Vec<u64> = set.iter().take_while(|&i| i <= 13).collect();
        assert_eq!(members, vec![2, 5, 7, 9, 11, 13]);
        assert!(set.projection().window_residual(&p, 32) <= 1e-12);
    }

    #[test]
    fn coordinate_detection_rejects_off_diagonal() {
        let p = StructuredOperator::from_entries([
            (1, 1, Complex64::new(0.5, 0.0)),
            (1, 2, Complex64::new(0.5, 0.0)),
            (2, 1, Complex64::new(0.5, 0.0)),
            (2, 2, Complex64::new(0.5, 0.0)),
        ]);
        assert!(as_coordinate_projection(&p).is_none());
    }

    #[test]
    fn coordinate_form_diagonalizes_a_rotated_projection() {
        // Rank-one projection onto (e1 + e2)/sqrt(2), plus the tail beyond 2.
        let p = StructuredOperator::from_entries([
            (1, 1, Complex64::new(0.5, 0.0)),
            (1, 2, Complex64::new(0.5, 0.0)),
            (2, 1, Complex64::new(0.5, 0.0)),
            (2, 2, Complex64::new(0.5, 0.0)),
        ])
        .add(&StructuredOperator::tail_identity(3, Complex64::ONE))
        .unwrap();
        let (g, set) = coordinate_form(&p).unwrap();
        assert!(g.unitarity_residual(16).unwrap() <= 1e-12);
        let conj = g.mul(&p).unwrap().mul(&g.adjoint()).unwrap();
        assert!(conj.window_residual(&set.projection(), 16) <= 1e-12);
        assert!(!set.contains(1) && set.contains(2));
        assert!(set.contains(3) && set.contains(64));
    }

    #[test]
    fn coordinate_form_rejects_non_projections() {
        let halves = StructuredOperator::scalar(Complex64::new(0.5, 0.0));
        assert!(matches!(
            coordinate_form(&halves).unwrap_err(),
            Error::UnsupportedClass { .. }
        ));
    }

    #[test]
    fn match_finite_into_infinite() {
        let src = IndexSet::from_members([1, 4]);
        let dst = as_coordinate_projection(&StructuredOperator::tail_on(
            Progression::new(3, 3),
            Complex64::ONE,
        ))
        .unwrap();
        let m = ascending_match(&src, &dst).unwrap();
        assert_eq!(m.apply(1)[&3], Complex64::ONE);
        assert_eq!(m.apply(4)[&6], Complex64::ONE);
        check_match(&m, &src, &dst, 32);
    }

    #[test]
    fn match_rejects_deficient_target() {
        let src = IndexSet::from_members([1, 2, 3]);
        let dst = IndexSet::from_members([5, 9]);
        assert!(matches!(
            ascending_match(&src, &dst).unwrap_err(),
            Error::DimensionObstruction { .. }
        ));
        let infinite = IndexSet::full();
        assert!(ascending_match(&infinite, &dst).is_err());
    }

    #[test]
    fn match_odd_residues_onto_full_set() {
        let odds = as_coordinate_projection(&StructuredOperator::tail_on(
            Progression::new(1, 2),
            Complex64::ONE,
        ))
        .unwrap();
        let full = IndexSet::full();
        let m = ascending_match(&odds, &full).unwrap();
        // 1, 3, 5, ... map to 1, 2, 3, ...
        for j in 0..20u64 {
            assert_eq!(m.apply(2 * j + 1)[&(j + 1)], Complex64::ONE);
        }
        check_match(&m, &odds, &full, 64);
        // Onto: m m* is the full identity.
        let onto = m.mul(&m.adjoint()).unwrap();
        assert!(onto.window_residual(&StructuredOperator::identity(), 64) <= 1e-12);
    }

    #[test]
    fn match_mixed_periods_is_exact() {
        // {2, 4, 6, ...} into {1} ∪ {3, 6, 9, ...}.
        let evens = as_coordinate_projection(&StructuredOperator::tail_on(
            Progression::new(2, 2),
            Complex64::ONE,
        ))
        .unwrap();
        let dst = IndexSet {
            bound: 1,
            finite: [1].into(),
            modulus: 3,
            residues: [0].into(),
        };
        let m = ascending_match(&evens, &dst).unwrap();
        let pairs: Vec<(u64, u64)> = evens.iter().zip(dst.iter()).take(12).collect();
        for (s, d) in pairs {
            assert_eq!(m.apply(s)[&d], Complex64::ONE, "{s} -> {d}");
        }
        check_match(&m, &evens, &dst, 64);
    }

    #[test]
    fn complement_flips_membership() {
        let set = IndexSet {
            bound: 3,
            finite: [2].into(),
            modulus: 2,
            residues: [1].into(),
        };
        let comp = set.complement();
        for i in 1..=50 {
            assert_eq!(comp.contains(i), !set.contains(i), "at {i}");
        }
    }
}
