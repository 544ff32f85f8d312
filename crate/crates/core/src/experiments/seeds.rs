use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::dynamics::{RegimeName, Task};

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamRole {
    GroundTruth = 1,
    StandardReservoir = 2,
    HybridReservoir = 3,
    HybridExpert = 4,
    OdeExpert = 5,
}

/// Coordinates of one random stream in the experiment tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master: u64,
    pub task: Task,
    pub regime: RegimeName,
    pub realization: u32,
    pub sweep_index: u32,
    pub instantiation: u32,
    pub role: StreamRole,
}

impl StreamKey {
    /// Packs every coordinate into its own byte range of a ChaCha key, so
    /// distinct keys give distinct streams.
    pub fn seed_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        out[0..8].copy_from_slice(&self.master.to_le_bytes());
        out[8] = self.task.index();
        out[9] = self.regime.index();
        out[10..14].copy_from_slice(&self.realization.to_le_bytes());
        out[14..18].copy_from_slice(&self.sweep_index.to_le_bytes());
        out[18..22].copy_from_slice(&self.instantiation.to_le_bytes());
        out[22] = self.role as u8;
        out
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.seed_bytes())
    }
}
