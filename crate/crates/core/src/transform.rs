//! Normalized fast Walsh–Hadamard transform and the randomized basis `H·D_ε`.
//!
//! The unnormalized Sylvester matrix is built recursively as
//!
//! ```text
//! H_0 = [1],   H_k = [ H_{k-1}   H_{k-1} ]
//!                    [ H_{k-1}  -H_{k-1} ]
//! ```
//!
//! and scaling by `1/sqrt(d)` makes it orthonormal with every entry of
//! magnitude `1/sqrt(d)`. Because the normalized matrix is symmetric and
//! orthonormal it is its own inverse, so the randomized basis
//! `H_ε = H·D_ε` is inverted by `D_ε·H`.
//!
//! Only power-of-two lengths are accepted here; padding is the codec's job.

use rand::Rng;

use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

fn check_pow2(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!("length {len} is not a power of two")));
    }
    Ok(())
}

/// Unnormalized in-place Walsh–Hadamard butterflies (natural/Sylvester order).
fn butterflies(x: &mut [f64]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// In-place `x <- (1/sqrt(d))·H_k·x`.
pub fn fwht_normalized_in_place(x: &mut [f64]) -> Result<()> {
    check_pow2(x.len())?;
    butterflies(x);
    let scale = 1.0 / (x.len() as f64).sqrt();
    for v in x.iter_mut() {
        *v *= scale;
    }
    Ok(())
}

/// Out-of-place normalized transform. Applying it twice returns the input.
pub fn fwht_normalized(x: &[f64]) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    fwht_normalized_in_place(&mut out)?;
    Ok(out)
}

/// The randomized universal sensing basis `H_ε = H·D_ε` for a power-of-two
/// dimension, stored as its sign vector `ε ∈ {-1, +1}^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedBasis {
    signs: Vec<f64>,
}

impl RandomizedBasis {
    /// Builds a basis from explicit signs. Every entry must be exactly `±1`.
    pub fn new(signs: Vec<f64>) -> Result<Self> {
        check_pow2(signs.len())?;
        if let Some(j) = signs.iter().position(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::Precondition(format!(
                "sign entry {j} is {}, expected +1 or -1",
                signs[j]
            )));
        }
        Ok(Self { signs })
    }

    /// `ε = 𝟙`, i.e. the plain normalized Hadamard basis.
    pub fn identity(dim: usize) -> Result<Self> {
        check_pow2(dim)?;
        Ok(Self { signs: vec![1.0; dim] })
    }

    /// Draws `ε` with i.i.d. uniform entries, 64 signs per `u64` taken LSB first.
    pub fn sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        check_pow2(dim)?;
        let mut signs = Vec::with_capacity(dim);
        while signs.len() < dim {
            let word = rng.next_u64();
            let take = (dim - signs.len()).min(64);
            signs.extend((0..take).map(|b| if (word >> b) & 1 == 1 { 1.0 } else { -1.0 }));
        }
        Ok(Self { signs })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension(format!(
                "vector has length {len}, basis has dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// In-place `x <- H·(ε ⊙ x)`.
    pub fn apply_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        for (v, s) in x.iter_mut().zip(&self.signs) {
            *v *= s;
        }
        fwht_normalized_in_place(x)
    }

    /// In-place `x <- ε ⊙ (Hᵀ·x)`.
    pub fn apply_inverse_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        fwht_normalized_in_place(x)?;
        for (v, s) in x.iter_mut().zip(&self.signs) {
            *v *= s;
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.apply_inverse_in_place(&mut out)?;
        Ok(out)
    }

    /// Packs `ε` into `ceil(d/8)` bytes: bit `j` is 1 iff `ε_j = +1`, LSB first.
    pub fn pack_signs(&self) -> Vec<u8> {
        let mut w = BitWriter::with_capacity_bits(self.dim());
        for &s in &self.signs {
            w.push(u32::from(s > 0.0), 1);
        }
        w.finish()
    }

    /// Inverse of [`pack_signs`](Self::pack_signs). `bytes` must hold at least `dim` bits.
    pub fn unpack_signs(bytes: &[u8], dim: usize) -> Result<Self> {
        check_pow2(dim)?;
        let mut r = BitReader::new(bytes);
        let mut signs = Vec::with_capacity(dim);
        for j in 0..dim {
            let bit = r
                .read(1)
                .ok_or_else(|| Error::format(r.byte_pos(), format!("sign bits truncated at coordinate {j}")))?;
            signs.push(if bit == 1 { 1.0 } else { -1.0 });
        }
        Ok(Self { signs })
    }
}

/// Free-function form of [`RandomizedBasis::sample`].
pub fn sample_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<RandomizedBasis> {
    RandomizedBasis::sample(dim, rng)
}
