use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const EMITTER_LEVELS: usize = 3;
pub const N_EMITTERS: usize = 2;
pub const MODE_COUNT: usize = 2;

/// Emitter level. `Down` is the dark spin manifold, `Up` the bright ground
/// state and `Excited` the optically excited state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Down = 0,
    Up = 1,
    Excited = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Down, Level::Up, Level::Excited];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Tensor slots, in Kronecker order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    EmitterA,
    EmitterB,
    Cw,
    Ccw,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::EmitterA, Slot::EmitterB, Slot::Cw, Slot::Ccw];

    fn position(self) -> usize {
        match self {
            Slot::EmitterA => 0,
            Slot::EmitterB => 1,
            Slot::Cw => 2,
            Slot::Ccw => 3,
        }
    }
}

/// Composite space: emitter A ⊗ emitter B ⊗ CW mode ⊗ CCW mode, each mode
/// truncated at `n_max` photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    n_max: usize,
}

pub fn build_space(n_max: usize) -> Result<SpaceDescriptor> {
    SpaceDescriptor::new(n_max)
}

impl SpaceDescriptor {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("n_max", "photon truncation must be at least 1"));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn emitter_levels(&self) -> usize {
        EMITTER_LEVELS
    }

    pub fn n_emitters(&self) -> usize {
        N_EMITTERS
    }

    pub fn mode_count(&self) -> usize {
        MODE_COUNT
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        EMITTER_LEVELS.pow(N_EMITTERS as u32) * self.fock_dim().pow(MODE_COUNT as u32)
    }

    pub fn local_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::EmitterA | Slot::EmitterB => EMITTER_LEVELS,
            Slot::Cw | Slot::Ccw => self.fock_dim(),
        }
    }

    /// Local dimensions in Kronecker order.
    pub fn local_dims(&self) -> [usize; 4] {
        Slot::ALL.map(|s| self.local_dim(s))
    }

    /// Flat basis index of `|a, b, n_cw, n_ccw⟩`.
    pub fn index(&self, a: Level, b: Level, n_cw: usize, n_ccw: usize) -> usize {
        debug_assert!(n_cw <= self.n_max && n_ccw <= self.n_max);
        let f = self.fock_dim();
        ((a.index() * EMITTER_LEVELS + b.index()) * f + n_cw) * f + n_ccw
    }

    /// Inverse of [`SpaceDescriptor::index`]: local indices in slot order.
    pub fn decompose(&self, mut idx: usize) -> [usize; 4] {
        let dims = self.local_dims();
        let mut out = [0; 4];
        for k in (0..4).rev() {
            out[k] = idx % dims[k];
            idx /= dims[k];
        }
        out
    }

    pub(crate) fn slot_position(slot: Slot) -> usize {
        slot.position()
    }

    /// Indices of basis states in which neither emitter occupies the dark
    /// level. This subspace is invariant under every operator built here.
    pub fn bright_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                let d = self.decompose(i);
                d[0] != Level::Down.index() && d[1] != Level::Down.index()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(build_space(1).unwrap().dim(), 36);
        assert_eq!(build_space(2).unwrap().dim(), 81);
        assert!(build_space(0).is_err());
    }

    #[test]
    fn index_round_trip() {
        let s = build_space(2).unwrap();
        for i in 0..s.dim() {
            let d = s.decompose(i);
            let l = |k: usize| Level::ALL[k];
            assert_eq!(s.index(l(d[0]), l(d[1]), d[2], d[3]), i);
        }
        assert_eq!(s.bright_indices().len(), 4 * 9);
    }
}
