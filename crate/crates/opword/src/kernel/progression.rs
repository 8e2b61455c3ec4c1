//! Arithmetic progressions of basis indices.
//!
//! Basis indices start at 1. A progression is the set
//! `{ i >= start : i == residue (mod modulus) }` with `start` itself a member,
//! or the distinguished empty set.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Progression {
    Empty,
    Seq {
        /// Least member; `start >= 1` and `start % modulus == residue`.
        start: u64,
        /// Step between consecutive members; `modulus >= 1`.
        modulus: u64,
        /// `residue < modulus`.
        residue: u64,
    },
}

impl Progression {
    /// All indices `>= start` congruent to `start` mod `modulus`.
    pub fn new(start: u64, modulus: u64) -> Self {
        assert!(start >= 1, "indices start at 1");
        assert!(modulus >= 1, "modulus must be positive");
        Progression::Seq { start, modulus, residue: start % modulus }
    }

    /// The full index set `{1, 2, 3, ...}`.
    pub fn full() -> Self {
        Progression::new(1, 1)
    }

    /// `{start, start+1, start+2, ...}`.
    pub fn tail(start: u64) -> Self {
        Progression::new(start, 1)
    }

    /// Least member congruent to `residue` mod `modulus` that is `>= lower` and `>= 1`.
    pub fn solve(residue: u64, modulus: u64, lower: u64) -> Self {
        assert!(modulus >= 1);
        let lo = lower.max(1);
        let r = residue % modulus;
        let rem = lo % modulus;
        let start = if rem <= r { lo + (r - rem) } else { lo + modulus - (rem - r) };
        Progression::new(start, modulus)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Progression::Empty)
    }

    pub fn start(&self) -> Option<u64> {
        match *self {
            Progression::Empty => None,
            Progression::Seq { start, .. } => Some(start),
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match *self {
            Progression::Empty => None,
            Progression::Seq { modulus, .. } => Some(modulus),
        }
    }

    pub fn contains(&self, i: u64) -> bool {
        match *self {
            Progression::Empty => false,
            Progression::Seq { start, modulus, residue } => i >= start && i % modulus == residue,
        }
    }

    /// Least member `>= x`, if any.
    pub fn min_from(&self, x: u64) -> Option<u64> {
        match *self {
            Progression::Empty => None,
            Progression::Seq { start, modulus, residue } => {
                if x <= start {
                    return Some(start);
                }
                let rem = x % modulus;
                Some(if rem <= residue { x + (residue - rem) } else { x + modulus - (rem - residue) })
            }
        }
    }

    /// Members `<= n` in ascending order.
    pub fn members_up_to(&self, n: u64) -> Vec<u64> {
        match *self {
            Progression::Empty => Vec::new(),
            Progression::Seq { start, modulus, .. } => {
                let mut out = Vec::new();
                let mut i = start;
                while i <= n {
                    out.push(i);
                    i += modulus;
                }
                out
            }
        }
    }

    /// Set intersection; again a progression (or empty) by the Chinese remainder theorem.
    pub fn intersect(&self, other: &Progression) -> Progression {
        let (s1, m1, r1, s2, m2, r2) = match (*self, *other) {
            (Progression::Empty, _) | (_, Progression::Empty) => return Progression::Empty,
            (
                Progression::Seq { start: s1, modulus: m1, residue: r1 },
                Progression::Seq { start: s2, modulus: m2, residue: r2 },
            ) => (s1, m1, r1, s2, m2, r2),
        };
        let (g, _, _) = ext_gcd(m1 as i128, m2 as i128);
        let g = g as u64;
        if r1 % g != r2 % g {
            return Progression::Empty;
        }
        let lcm = (m1 / g) as u128 * m2 as u128;
        debug_assert!(lcm <= u64::MAX as u128, "modulus overflow");
        let lcm = lcm as u64;
        // r = r1 + m1*t with t == (r2-r1)/g * inv(m1/g) (mod m2/g).
        let m1g = (m1 / g) as i128;
        let m2g = (m2 / g) as i128;
        let (_, inv, _) = ext_gcd(m1g, m2g);
        let diff = (r2 as i128 - r1 as i128) / g as i128;
        let t = (diff * inv).rem_euclid(m2g);
        let r = (r1 as i128 + m1 as i128 * t).rem_euclid(lcm as i128) as u64;
        Progression::solve(r, lcm, s1.max(s2))
    }
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`, `g >= 0`.
pub(crate) fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}
