//! Encoder/decoder pair and the byte format used between workers and server.
//!
//! Encoding zero-pads `x` to the next power of two `D`, rotates it with a
//! randomized Hadamard basis and quantizes the result:
//!
//! ```text
//! levels = (K/λ) · Q_{λ,K}(H_ε · pad(x))          (integers in {-K, ..., K})
//! decode = truncate( (λ/K) · D_ε · Hᵀ · levels )
//! ```
//!
//! Wire layout (all integers little-endian):
//!
//! ```text
//! offset  size            field
//! 0       4               magic "FOSG"
//! 4       1               version = 0x01
//! 5       4               dim (u32)
//! 9       4               padded_dim (u32, power of two)
//! 13      2               k_reps (u16)
//! 15      8               lambda (f64)
//! 23      ceil(D/8)       ε bits, bit j = 1 iff ε_j = +1
//! ...     ceil(D·w/8)     level codes (ℓ+K)/2, w = ceil(log2(K+1)) bits each
//! ```
//!
//! Both bit sections are LSB-first and zero-padded to a whole byte.

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantizer::{self, pack_levels, unpack_levels, DitherConfig, QuantizedVector};
use crate::transform::RandomizedBasis;

pub const MAGIC: &[u8; 4] = b"FOSG";
pub const VERSION: u8 = 0x01;
/// Size of the fixed header in bytes.
pub const HEADER_LEN: usize = 23;

/// Smallest power of two `>= dim`.
pub fn padded_dim(dim: usize) -> usize {
    dim.max(1).next_power_of_two()
}

/// Payload bits (sign bits plus level bits, header excluded) for one message.
pub fn payload_bits(padded_dim: usize, k_reps: u16) -> u64 {
    (u64::from(quantizer::bits_per_level(k_reps)) + 1) * padded_dim as u64
}

/// One compressed gradient as it travels over the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedGradient {
    dim: usize,
    basis: RandomizedBasis,
    levels: QuantizedVector,
}

impl EncodedGradient {
    /// Assembles a message from parts, checking that the dimensions agree.
    pub fn from_parts(dim: usize, basis: RandomizedBasis, levels: QuantizedVector) -> Result<Self> {
        if dim == 0 || padded_dim(dim) != basis.dim() || levels.dim() != basis.dim() {
            return Err(Error::Dimension(format!(
                "dim {dim}, basis dimension {}, {} levels",
                basis.dim(),
                levels.dim()
            )));
        }
        Ok(Self { dim, basis, levels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn padded_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn config(&self) -> DitherConfig {
        self.levels.config()
    }

    pub fn basis(&self) -> &RandomizedBasis {
        &self.basis
    }

    pub fn levels(&self) -> &QuantizedVector {
        &self.levels
    }

    /// Communication cost in bits, header excluded.
    pub fn payload_bits(&self) -> u64 {
        payload_bits(self.padded_dim(), self.config().k_reps())
    }
}

/// `(K/λ)·Q_{λ,K}(H_ε·pad(x))` together with `ε`.
pub fn encode<R: Rng + ?Sized>(
    x: &[f64],
    basis: &RandomizedBasis,
    config: DitherConfig,
    rng: &mut R,
) -> Result<EncodedGradient> {
    if x.is_empty() || padded_dim(x.len()) != basis.dim() {
        return Err(Error::Dimension(format!(
            "input of length {} needs a basis of dimension {}, got {}",
            x.len(),
            padded_dim(x.len()),
            basis.dim()
        )));
    }
    let mut rotated = vec![0.0; basis.dim()];
    rotated[..x.len()].copy_from_slice(x);
    basis.apply_in_place(&mut rotated)?;
    let levels = quantizer::quantize(&rotated, config, rng);
    Ok(EncodedGradient {
        dim: x.len(),
        basis: basis.clone(),
        levels,
    })
}

/// `(λ/K)·H_ε⁻¹·levels`, truncated to the original dimension.
pub fn decode(enc: &EncodedGradient) -> Vec<f64> {
    let mut out = enc.levels.dequantize();
    enc.basis
        .apply_inverse_in_place(&mut out)
        .expect("levels and basis share a dimension");
    out.truncate(enc.dim);
    out
}

/// The `(λ, K)`-transform `Z = decode ∘ encode` without going through bytes.
pub fn z_transform<R: Rng + ?Sized>(
    x: &[f64],
    basis: &RandomizedBasis,
    config: DitherConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(decode(&encode(x, basis, config, rng)?))
}

pub fn serialize(enc: &EncodedGradient) -> Vec<u8> {
    let signs = enc.basis.pack_signs();
    let levels = pack_levels(&enc.levels);
    let mut out = Vec::with_capacity(HEADER_LEN + signs.len() + levels.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(enc.dim as u32).to_le_bytes());
    out.extend_from_slice(&(enc.padded_dim() as u32).to_le_bytes());
    out.extend_from_slice(&enc.config().k_reps().to_le_bytes());
    out.extend_from_slice(&enc.config().lambda().to_le_bytes());
    out.extend_from_slice(&signs);
    out.extend_from_slice(&levels);
    out
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize, what: &str) -> Result<&'a [u8]> {
    let end = *pos + n;
    if end > bytes.len() {
        return Err(Error::format(
            bytes.len(),
            format!("truncated {what}: need {n} bytes at offset {pos}", pos = *pos),
        ));
    }
    let s = &bytes[*pos..end];
    *pos = end;
    Ok(s)
}

pub fn deserialize(bytes: &[u8]) -> Result<EncodedGradient> {
    let mut pos = 0;
    if take(bytes, &mut pos, 4, "magic")? != MAGIC {
        return Err(Error::format(0, "bad magic, expected \"FOSG\""));
    }
    let version = take(bytes, &mut pos, 1, "version")?[0];
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version:#04x}")));
    }
    let field = |b: &[u8]| -> [u8; 8] {
        let mut a = [0u8; 8];
        a[..b.len()].copy_from_slice(b);
        a
    };
    let dim = u64::from_le_bytes(field(take(bytes, &mut pos, 4, "dim")?)) as usize;
    let padded = u64::from_le_bytes(field(take(bytes, &mut pos, 4, "padded_dim")?)) as usize;
    let k_reps = u64::from_le_bytes(field(take(bytes, &mut pos, 2, "k_reps")?)) as u16;
    let lambda = f64::from_le_bytes(field(take(bytes, &mut pos, 8, "lambda")?));

    if dim == 0 {
        return Err(Error::format(5, "dim must be positive"));
    }
    if padded != padded_dim(dim) {
        return Err(Error::format(
            9,
            format!("padded_dim {padded} is not the next power of two above dim {dim}"),
        ));
    }
    let config = DitherConfig::new(lambda, k_reps).map_err(|e| Error::format(13, e.to_string()))?;

    let sign_len = padded.div_ceil(8);
    let sign_start = pos;
    let sign_bytes = take(bytes, &mut pos, sign_len, "sign bits")?;
    let basis = RandomizedBasis::unpack_signs(sign_bytes, padded).map_err(|e| shift(e, sign_start))?;
    check_padding(sign_bytes, padded, sign_start)?;

    let level_len = (padded * config.bits_per_level() as usize).div_ceil(8);
    let level_start = pos;
    let level_bytes = take(bytes, &mut pos, level_len, "level bits")?;
    let levels = unpack_levels(level_bytes, padded, config).map_err(|e| shift(e, level_start))?;
    check_padding(level_bytes, padded * config.bits_per_level() as usize, level_start)?;

    if pos != bytes.len() {
        return Err(Error::format(pos, format!("{} trailing bytes", bytes.len() - pos)));
    }
    Ok(EncodedGradient { dim, basis, levels })
}

/// The bits after the first `used` in `section` must be zero.
fn check_padding(section: &[u8], used: usize, offset: usize) -> Result<()> {
    let tail = used % 8;
    match section.last() {
        Some(&last) if tail != 0 && last >> tail != 0 => {
            Err(Error::format(offset + section.len() - 1, "nonzero padding bits"))
        }
        _ => Ok(()),
    }
}

fn shift(e: Error, offset: usize) -> Error {
    match e {
        Error::Format { position, reason } => Error::Format {
            position: position + offset,
            reason,
        },
        other => other,
    }
}
