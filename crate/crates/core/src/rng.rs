//! Counter-based random substreams.
//!
//! Every random draw in a simulation is taken from a ChaCha8 stream selected
//! by `(master_seed, t, worker, role)`. The seed picks the key and the other
//! three coordinates pick the 64-bit stream id, so any worker loop can run in
//! any order, on any thread, and still consume exactly the same bits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Worker index used for draws made by the parameter server.
pub const SERVER: u32 = (1 << WORKER_BITS) - 1;

const ROLE_BITS: u32 = 4;
const WORKER_BITS: u32 = 20;
const ITER_BITS: u32 = 64 - WORKER_BITS - ROLE_BITS;

/// What a substream is used for. Distinct roles never share bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Role {
    Oracle = 0,
    WorkerBasis = 1,
    WorkerDither = 2,
    ServerBasis = 3,
    ServerDither = 4,
    Setup = 5,
    MonteCarlo = 6,
}

/// Factory for independent deterministic streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substreams {
    seed: u64,
}

impl Substreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for iteration `t`, worker `worker` (or [`SERVER`]) and `role`.
    ///
    /// Panics if `t >= 2^40` or `worker >= 2^20`.
    pub fn stream(&self, t: u64, worker: u32, role: Role) -> ChaCha8Rng {
        assert!(t < (1u64 << ITER_BITS), "iteration index {t} out of range");
        assert!(worker <= SERVER, "worker index {worker} out of range");
        let id = (t << (WORKER_BITS + ROLE_BITS)) | (u64::from(worker) << ROLE_BITS) | u64::from(role as u8);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_key_same_bits() {
        let s = Substreams::new(42);
        let a: Vec<u64> = (0..8)
            .map({
                let mut r = s.stream(3, 7, Role::WorkerDither);
                move |_| r.next_u64()
            })
            .collect();
        let mut r = s.stream(3, 7, Role::WorkerDither);
        let b: Vec<u64> = (0..8).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn coordinates_select_distinct_streams() {
        let s = Substreams::new(42);
        let first = |mut r: ChaCha8Rng| r.next_u64();
        let base = first(s.stream(3, 7, Role::WorkerDither));
        assert_ne!(base, first(s.stream(4, 7, Role::WorkerDither)));
        assert_ne!(base, first(s.stream(3, 8, Role::WorkerDither)));
        assert_ne!(base, first(s.stream(3, 7, Role::WorkerBasis)));
        assert_ne!(base, first(Substreams::new(43).stream(3, 7, Role::WorkerDither)));
        assert_ne!(base, first(s.stream(3, SERVER, Role::WorkerDither)));
    }
}
