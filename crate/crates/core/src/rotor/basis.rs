use crate::error::{Error, Result};

/// `|J, K, M⟩` with M quantized along the lab Z axis (the detector normal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState {
    pub j: u32,
    pub k: i32,
    pub m: i32,
}

impl BasisState {
    pub fn new(j: u32, k: i32, m: i32) -> Result<Self> {
        let jj = j as i32;
        if k.abs() > jj || m.abs() > jj {
            return Err(Error::InvalidQuantumNumbers { j: j as i64, k: k as i64, m: m as i64 });
        }
        Ok(Self { j, k, m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// K ≡ 0; the field conserves K and the ensemble starts at K = 0.
    LinearRotor,
    SymmetricTop,
}

/// Truncated rotational basis, ordered lexicographically in (J, K, M).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    states: Vec<BasisState>,
    j_max: u32,
    mode: BasisMode,
}

impl Basis {
    pub fn linear_rotor(j_max: u32) -> Self {
        let mut states = Vec::with_capacity(((j_max + 1) * (j_max + 1)) as usize);
        for j in 0..=j_max {
            let jj = j as i32;
            for m in -jj..=jj {
                states.push(BasisState { j, k: 0, m });
            }
        }
        Self { states, j_max, mode: BasisMode::LinearRotor }
    }

    pub fn symmetric_top(j_max: u32) -> Self {
        let mut states = Vec::new();
        for j in 0..=j_max {
            let jj = j as i32;
            for k in -jj..=jj {
                for m in -jj..=jj {
                    states.push(BasisState { j, k, m });
                }
            }
        }
        Self { states, j_max, mode: BasisMode::SymmetricTop }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> BasisState {
        self.states[i]
    }

    pub fn index_of(&self, s: BasisState) -> Option<usize> {
        self.states.binary_search(&s).ok()
    }

    /// Index of `|J, 0, M⟩` in a linear-rotor basis.
    pub fn index_jm(&self, j: u32, m: i32) -> Option<usize> {
        if j > self.j_max || m.unsigned_abs() > j {
            return None;
        }
        match self.mode {
            BasisMode::LinearRotor => Some((j * j) as usize + (m + j as i32) as usize),
            BasisMode::SymmetricTop => self.index_of(BasisState { j, k: 0, m }),
        }
    }

    pub(crate) fn require_linear(&self) -> Result<()> {
        match self.mode {
            BasisMode::LinearRotor => Ok(()),
            BasisMode::SymmetricTop => Err(Error::UnsupportedBasis("symmetric-top")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_rotor_size_and_order() {
        for j_max in [0, 1, 4, 16] {
            let b = Basis::linear_rotor(j_max);
            assert_eq!(b.len(), ((j_max + 1) * (j_max + 1)) as usize);
            assert!(b.states().windows(2).all(|w| w[0] < w[1]));
            for (i, s) in b.states().iter().enumerate() {
                assert_eq!(b.index_jm(s.j, s.m), Some(i));
                assert_eq!(b.index_of(*s), Some(i));
            }
        }
    }

    #[test]
    fn symmetric_top_is_ordered() {
        let b = Basis::symmetric_top(3);
        assert_eq!(b.len(), 1 + 9 + 25 + 49);
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        assert!(b.require_linear().is_err());
    }

    #[test]
    fn quantum_number_validation() {
        assert!(BasisState::new(1, 2, 0).is_err());
        assert!(BasisState::new(1, 0, -2).is_err());
        assert!(BasisState::new(2, -2, 1).is_ok());
    }
}
