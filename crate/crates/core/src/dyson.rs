use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry class of the random matrix, with the bookkeeping constants γ and
/// γ̃ used to stack sources and weights uniformly over all three classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum DysonIndex {
    /// β = 1, real entries.
    Orthogonal,
    /// β = 2, complex entries.
    Unitary,
    /// β = 4, quaternion entries.
    Symplectic,
}

impl DysonIndex {
    pub fn from_beta(beta: u8) -> Result<Self> {
        match beta {
            1 => Ok(Self::Orthogonal),
            2 => Ok(Self::Unitary),
            4 => Ok(Self::Symplectic),
            b => Err(Error::input(format!("Dyson index must be 1, 2 or 4, got {b}"))),
        }
    }

    pub fn beta(self) -> u8 {
        match self {
            Self::Orthogonal => 1,
            Self::Unitary => 2,
            Self::Symplectic => 4,
        }
    }

    /// Size of the number-field block: 2 for quaternions, else 1.
    pub fn gamma(self) -> usize {
        match self {
            Self::Symplectic => 2,
            _ => 1,
        }
    }

    /// 2 for real matrices, else 1.
    pub fn gamma_tilde(self) -> usize {
        match self {
            Self::Orthogonal => 2,
            _ => 1,
        }
    }

    /// Number of real parameters per matrix entry of W.
    pub fn real_dof_per_entry(self) -> usize {
        self.beta() as usize
    }
}

impl TryFrom<u8> for DysonIndex {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        Self::from_beta(b)
    }
}

impl From<DysonIndex> for u8 {
    fn from(d: DysonIndex) -> u8 {
        d.beta()
    }
}

impl std::fmt::Display for DysonIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.beta())
    }
}
