use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyson::DysonIndex;
use crate::error::{Error, Result};

/// Source variables of a characteristic-polynomial ratio: `kappa1` enter the
/// denominator (bosonic sources), `kappa2` the numerator (fermionic ones).
///
/// The values stored are the chiral sources κ that shift Hχ. Most
/// evaluators only need κ², available through [`SourcePack::squared1`] and
/// [`SourcePack::squared2`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourcePack {
    pub kappa1: Vec<Complex64>,
    pub kappa2: Vec<Complex64>,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

impl SourcePack {
    pub fn new(kappa1: Vec<Complex64>, kappa2: Vec<Complex64>) -> Result<Self> {
        let s = Self { kappa1, kappa2 };
        s.check_bosonic()?;
        Ok(s)
    }

    /// Builds a pack from squared sources κ², taking the principal root.
    pub fn from_squared(sq1: &[Complex64], sq2: &[Complex64]) -> Result<Self> {
        for z in sq1 {
            if z.im == 0.0 && z.re >= 0.0 {
                return Err(Error::input(format!(
                    "bosonic squared source {z} lies on the spectrum"
                )));
            }
        }
        Self::new(
            sq1.iter().map(|z| z.sqrt()).collect(),
            sq2.iter().map(|z| z.sqrt()).collect(),
        )
    }

    pub fn empty() -> Self {
        Self {
            kappa1: Vec::new(),
            kappa2: Vec::new(),
        }
    }

    fn check_bosonic(&self) -> Result<()> {
        for k in &self.kappa1 {
            if k.im == 0.0 || !k.im.is_finite() || !k.re.is_finite() {
                return Err(Error::input(format!(
                    "bosonic source {k} must have a non-zero imaginary part"
                )));
            }
        }
        if self.kappa2.iter().any(|k| !k.re.is_finite() || !k.im.is_finite()) {
            return Err(Error::input("fermionic sources must be finite"));
        }
        Ok(())
    }

    pub fn k1(&self) -> usize {
        self.kappa1.len()
    }

    pub fn k2(&self) -> usize {
        self.kappa2.len()
    }

    pub fn squared1(&self) -> Vec<Complex64> {
        self.kappa1.iter().map(|k| k * k).collect()
    }

    pub fn squared2(&self) -> Vec<Complex64> {
        self.kappa2.iter().map(|k| k * k).collect()
    }

    /// Multiplicity γγ̃ with which every source enters the stacked source
    /// matrix.
    pub fn multiplicity(dyson: DysonIndex) -> usize {
        dyson.gamma() * dyson.gamma_tilde()
    }

    /// Signs of Im κ for the bosonic sources.
    pub fn l_signs(&self) -> Vec<i8> {
        self.kappa1.iter().map(|k| sign(k.im)).collect()
    }

    /// Signs of Im κ² for the bosonic sources.
    pub fn l_tilde_signs(&self) -> Vec<i8> {
        self.squared1().iter().map(|k| sign(k.im)).collect()
    }

    /// Checks γ̃k1 ≤ γ̃k2 + n, needed before any superspace evaluation.
    pub fn validate_for_superspace(&self, dyson: DysonIndex, n: usize) -> Result<()> {
        self.check_bosonic()?;
        let gt = dyson.gamma_tilde();
        if gt * self.k1() > gt * self.k2() + n {
            return Err(Error::input(format!(
                "γ̃k1 = {} exceeds γ̃k2 + n = {}",
                gt * self.k1(),
                gt * self.k2() + n
            )));
        }
        Ok(())
    }

    /// Complex-conjugated sources.
    pub fn conj(&self) -> Self {
        Self {
            kappa1: self.kappa1.iter().map(|k| k.conj()).collect(),
            kappa2: self.kappa2.iter().map(|k| k.conj()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_roundtrip() {
        let z = Complex64::new(0.5, -2.0);
        let s = SourcePack::from_squared(&[z], &[Complex64::new(0.0, 2.0)]).unwrap();
        assert!((s.squared1()[0] - z).norm() < 1e-14);
        assert_eq!(s.l_tilde_signs(), vec![-1]);
    }

    #[test]
    fn real_bosonic_source_rejected() {
        assert!(SourcePack::new(vec![Complex64::new(1.0, 0.0)], vec![]).is_err());
        assert!(SourcePack::from_squared(&[Complex64::new(2.0, 0.0)], &[]).is_err());
        // real fermionic sources are fine
        assert!(SourcePack::new(vec![], vec![Complex64::new(1.0, 0.0)]).is_ok());
    }

    #[test]
    fn superspace_constraint() {
        let s = SourcePack::from_squared(
            &[Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)],
            &[],
        )
        .unwrap();
        assert!(s.validate_for_superspace(DysonIndex::Unitary, 2).is_ok());
        assert!(s.validate_for_superspace(DysonIndex::Unitary, 1).is_err());
        assert!(s.validate_for_superspace(DysonIndex::Orthogonal, 3).is_err());
    }

    #[test]
    fn multiplicities() {
        assert_eq!(SourcePack::multiplicity(DysonIndex::Orthogonal), 2);
        assert_eq!(SourcePack::multiplicity(DysonIndex::Unitary), 1);
        assert_eq!(SourcePack::multiplicity(DysonIndex::Symplectic), 2);
    }
}
