//! The scalar p-Laplacian map `φ_p(s) = |s|^{p-2} s` and its inverse.

use crate::error::{Error, Result};

/// An exponent `p > 1` together with its conjugate `p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    p: f64,
    p_conj: f64,
}

impl ExponentPair {
    pub fn new(p: f64) -> Result<ExponentPair> {
        Ok(ExponentPair { p, p_conj: conjugate(p)? })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }

    pub fn phi(&self, s: f64) -> f64 {
        phi_unchecked(self.p, s)
    }

    pub fn phi_inverse(&self, s: f64) -> f64 {
        phi_unchecked(self.p_conj, s)
    }
}

fn check(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::validation("p_lap", format!("p-Laplacian exponent must exceed 1, got {p}")))
    }
}

/// `p/(p-1)`.
pub fn conjugate(p: f64) -> Result<f64> {
    check(p)?;
    Ok(p / (p - 1.0))
}

pub fn phi(p: f64, s: f64) -> Result<f64> {
    check(p)?;
    Ok(phi_unchecked(p, s))
}

/// `φ_p^{-1} = φ_{p'}` with `1/p + 1/p' = 1`.
pub fn phi_inverse(p: f64, s: f64) -> Result<f64> {
    Ok(phi_unchecked(conjugate(p)?, s))
}

#[inline]
pub(crate) fn phi_unchecked(p: f64, s: f64) -> f64 {
    if s == 0.0 {
        // continuous extension; |s|^{p-2} is infinite at 0 when p < 2
        0.0
    } else if p == 2.0 {
        s
    } else {
        s.abs().powf(p - 1.0).copysign(s)
    }
}
