//! Strictly increasing affine index maps `i -> (a*i + b) / d` on a progression domain.
//!
//! Divisibility of `a*i + b` by `d` over the whole domain is certified at
//! construction, so `apply` never rounds. Injectivity is automatic from `a > 0`.

use serde::{Deserialize, Serialize};

use super::progression::Progression;
use crate::error::{Error, Result};

/// Indices are kept far below this bound; constructions beyond it are refused
/// rather than silently wrapping.
pub(crate) const MAX_INDEX: u64 = 1 << 44;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineInjection {
    domain: Progression,
    a: u64,
    b: i64,
    d: u64,
}

impl AffineInjection {
    /// `i -> (a*i + b) / d` on `domain`. Fails unless the map is defined
    /// (divisibility over the whole domain), lands in `{1, 2, ...}`, and the
    /// coefficients are in range. Coefficients are reduced by their gcd.
    pub fn new(domain: Progression, a: u64, b: i64, d: u64) -> Result<Self> {
        let (start, modulus) = match domain {
            Progression::Empty => {
                return Err(Error::InvalidInput("affine map needs a nonempty domain".into()))
            }
            Progression::Seq { start, modulus, .. } => (start, modulus),
        };
        if a == 0 || d == 0 {
            return Err(Error::InvalidInput("affine map needs a >= 1 and d >= 1".into()));
        }
        if a > MAX_INDEX || d > MAX_INDEX || b.unsigned_abs() > MAX_INDEX || start > MAX_INDEX {
            return Err(Error::ClassOverflow(format!("affine coefficients out of range: a={a} b={b} d={d}")));
        }
        let at_start = a as i128 * start as i128 + b as i128;
        if at_start % d as i128 != 0 || (a as i128 * modulus as i128) % d as i128 != 0 {
            return Err(Error::DomainViolation(format!(
                "(({a}*i + {b}) / {d}) is not integral over {domain:?}"
            )));
        }
        if at_start / (d as i128) < 1 {
            return Err(Error::DomainViolation(format!(
                "(({a}*i + {b}) / {d}) maps below index 1 at i={start}"
            )));
        }
        let g = gcd(gcd(a, d), b.unsigned_abs());
        Ok(AffineInjection { domain, a: a / g, b: b / g as i64, d: d / g })
    }

    /// Identity on `domain`.
    pub fn identity_on(domain: Progression) -> Result<Self> {
        AffineInjection::new(domain, 1, 0, 1)
    }

    pub fn domain(&self) -> Progression {
        self.domain
    }

    pub fn coefficients(&self) -> (u64, i64, u64) {
        (self.a, self.b, self.d)
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 && self.b == 0 && self.d == 1
    }

    /// Value at `i`, or `None` when `i` is outside the domain.
    pub fn apply(&self, i: u64) -> Option<u64> {
        if !self.domain.contains(i) {
            return None;
        }
        Some(self.apply_unchecked(i))
    }

    pub(crate) fn apply_unchecked(&self, i: u64) -> u64 {
        ((self.a as i128 * i as i128 + self.b as i128) / self.d as i128) as u64
    }

    /// Image set; a progression again since the map is affine and increasing.
    pub fn image(&self) -> Progression {
        match self.domain {
            Progression::Empty => Progression::Empty,
            Progression::Seq { start, modulus, .. } => {
                let s = self.apply_unchecked(start);
                let m = (self.a as u128 * modulus as u128 / self.d as u128) as u64;
                Progression::new(s, m.max(1))
            }
        }
    }

    /// `self` after `rhs`: `i -> self(rhs(i))` on `{i in dom rhs : rhs(i) in dom self}`.
    /// Returns `None` when that domain is empty.
    pub fn compose(&self, rhs: &AffineInjection) -> Result<Option<AffineInjection>> {
        let (f_start, f_mod, f_res) = match self.domain {
            Progression::Empty => return Ok(None),
            Progression::Seq { start, modulus, residue } => (start, modulus, residue),
        };
        // rhs(i) == f_res (mod f_mod), i.e. a2*i + b2 == f_res*d2 (mod f_mod*d2).
        let a2 = rhs.a as i128;
        let m = f_mod as i128 * rhs.d as i128;
        let c = (f_res as i128 * rhs.d as i128 - rhs.b as i128).rem_euclid(m);
        let (g, inv, _) = super::progression::ext_gcd(a2, m);
        if c % g != 0 {
            return Ok(None);
        }
        let mg = m / g;
        let i0 = ((c / g) % mg * inv.rem_euclid(mg)).rem_euclid(mg);
        // rhs(i) >= f_start, i.e. i >= ceil((f_start*d2 - b2) / a2).
        let num = f_start as i128 * rhs.d as i128 - rhs.b as i128;
        let lower = if num <= 0 { 1 } else { ((num + a2 - 1) / a2).max(1) } as u64;
        if mg as u64 > MAX_INDEX {
            return Err(Error::ClassOverflow("composed congruence modulus out of range".into()));
        }
        let congruent = Progression::solve(i0 as u64, mg as u64, lower);
        let domain = rhs.domain.intersect(&congruent);
        if domain.is_empty() {
            return Ok(None);
        }
        let a = self.a as u128 * rhs.a as u128;
        let b = self.a as i128 * rhs.b as i128 + self.b as i128 * rhs.d as i128;
        let d = self.d as u128 * rhs.d as u128;
        if a > MAX_INDEX as u128 || d > MAX_INDEX as u128 || b.unsigned_abs() > MAX_INDEX as u128 {
            return Err(Error::ClassOverflow("composed affine coefficients out of range".into()));
        }
        AffineInjection::new(domain, a as u64, b as i64, d as u64).map(Some)
    }

    /// Inverse map `j -> (d*j - b) / a`, defined on the image progression.
    pub fn invert(&self) -> AffineInjection {
        AffineInjection::new(self.image(), self.d, -self.b, self.a)
            .expect("inverse of a certified affine injection is certified")
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}
