//! K-averaged dithered one-bit quantizer.
//!
//! For amplitude `λ` and `K` repetitions the quantizer maps `x ∈ R^d` to
//!
//! ```text
//! Q(x) = (λ/K) · Σ_{i=1..K} sign(x + τ_i),    τ_i ~ U([-λ, λ]^d) i.i.d.
//! ```
//!
//! Only the integer sums `Σ sign(x_j + τ_ij) ∈ {-K, -K+2, ..., K}` are kept;
//! the real output is `(λ/K)·levels`. `sign(0)` is taken to be `+1`.

use rand::Rng;

use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

/// Dithering amplitude `λ` and number of averaged dithers `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DitherConfig {
    lambda: f64,
    k_reps: u16,
}

impl DitherConfig {
    pub fn new(lambda: f64, k_reps: u16) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Precondition(format!(
                "dithering amplitude must be finite and positive, got {lambda}"
            )));
        }
        if k_reps == 0 {
            return Err(Error::Precondition("K must be at least 1".into()));
        }
        Ok(Self { lambda, k_reps })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k_reps(&self) -> u16 {
        self.k_reps
    }

    /// Width of one packed level, `ceil(log2(K+1))`.
    pub fn bits_per_level(&self) -> u32 {
        bits_per_level(self.k_reps)
    }
}

/// `ceil(log2(k+1))` for `k >= 1`.
pub fn bits_per_level(k_reps: u16) -> u32 {
    // k+1 <= 2^w  <=>  k < 2^w  <=>  w >= bit length of k
    u16::BITS - k_reps.leading_zeros()
}

/// Integer image `(K/λ)·Q(x)` of the quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedVector {
    levels: Vec<i32>,
    config: DitherConfig,
}

impl QuantizedVector {
    /// Checks `|ℓ| <= K` and `ℓ ≡ K (mod 2)` for every level.
    pub fn new(levels: Vec<i32>, config: DitherConfig) -> Result<Self> {
        let k = i32::from(config.k_reps);
        if let Some(j) = levels.iter().position(|&l| l.abs() > k || (l + k).rem_euclid(2) != 0) {
            return Err(Error::Precondition(format!(
                "level {} at coordinate {j} is not in {{-K, -K+2, ..., K}} for K = {k}",
                levels[j]
            )));
        }
        Ok(Self { levels, config })
    }

    pub fn levels(&self) -> &[i32] {
        &self.levels
    }

    pub fn config(&self) -> DitherConfig {
        self.config
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// `(λ/K)·levels`.
    pub fn dequantize(&self) -> Vec<f64> {
        let scale = self.config.lambda / f64::from(self.config.k_reps);
        self.levels.iter().map(|&l| scale * f64::from(l)).collect()
    }
}

/// Quantizes `x` with `K` fresh dithers drawn from `rng`.
///
/// The stream is consumed repetition by repetition, coordinate by coordinate,
/// one `f64` per dither entry, so the same stream state gives the same levels.
pub fn quantize<R: Rng + ?Sized>(x: &[f64], config: DitherConfig, rng: &mut R) -> QuantizedVector {
    let lambda = config.lambda;
    let mut levels = vec![0i32; x.len()];
    for _ in 0..config.k_reps {
        for (level, &xj) in levels.iter_mut().zip(x) {
            let tau = lambda * (2.0 * rng.gen::<f64>() - 1.0);
            *level += if xj + tau >= 0.0 { 1 } else { -1 };
        }
    }
    QuantizedVector { levels, config }
}

/// `E[Q(x)]`: `x` clamped componentwise to `[-λ, λ]`. Does not depend on `K`.
pub fn expected_quantizer_output(x: &[f64], lambda: f64) -> Vec<f64> {
    x.iter().map(|v| v.clamp(-lambda, lambda)).collect()
}

/// Bias `x - E[Q(x)]`, i.e. soft-thresholding of `x` at `λ`.
pub fn soft_threshold(x: &[f64], lambda: f64) -> Vec<f64> {
    x.iter().map(|&v| v.signum() * (v.abs() - lambda).max(0.0)).collect()
}

/// `E||Q(x) - x||² = (λ²d - ||x||²)/K`, valid only for `||x||_∞ <= λ`.
pub fn quantizer_mse(x: &[f64], config: DitherConfig) -> Result<f64> {
    let lambda = config.lambda;
    if let Some(j) = x.iter().position(|v| v.abs() > lambda) {
        return Err(Error::Precondition(format!(
            "coordinate {j} = {} lies outside [-λ, λ] with λ = {lambda}",
            x[j]
        )));
    }
    let sq: f64 = x.iter().map(|v| v * v).sum();
    Ok((lambda * lambda * x.len() as f64 - sq) / f64::from(config.k_reps))
}

/// `E<u, Q_λ(y)>² = <u,y>² + ||u||²λ² - Σ u_i² y_i²` for one-bit `Q_λ` and `||y||_∞ <= λ`.
pub fn scalar_product_second_moment(u: &[f64], y: &[f64], lambda: f64) -> f64 {
    let dot: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
    let u_sq: f64 = u.iter().map(|a| a * a).sum();
    let cross: f64 = u.iter().zip(y).map(|(a, b)| a * a * b * b).sum();
    dot * dot + u_sq * lambda * lambda - cross
}

/// `E||A·Q_λ(x) - A·x||² = ||A||_F² λ² - Σ_ij A_ij² x_j²` for one-bit `Q_λ` and `||x||_∞ <= λ`.
///
/// `rows` holds the rows of `A`.
pub fn matrix_quantization_variance(rows: &[Vec<f64>], x: &[f64], lambda: f64) -> f64 {
    rows.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .map(|(a, v)| a * a * (lambda * lambda - v * v))
                .sum::<f64>()
        })
        .sum()
}

/// Packs levels as codes `u = (ℓ+K)/2`, `ceil(log2(K+1))` bits each, LSB first.
pub fn pack_levels(q: &QuantizedVector) -> Vec<u8> {
    let k = i32::from(q.config.k_reps);
    let width = q.config.bits_per_level();
    let mut w = BitWriter::with_capacity_bits(q.dim() * width as usize);
    for &l in &q.levels {
        w.push(((l + k) / 2) as u32, width);
    }
    w.finish()
}

/// Inverse of [`pack_levels`]. Fails on truncated input or a code above `K`.
pub fn unpack_levels(bytes: &[u8], dim: usize, config: DitherConfig) -> Result<QuantizedVector> {
    let k = u32::from(config.k_reps);
    let width = config.bits_per_level();
    let mut r = BitReader::new(bytes);
    let mut levels = Vec::with_capacity(dim);
    for j in 0..dim {
        let pos = r.byte_pos();
        let code = r
            .read(width)
            .ok_or_else(|| Error::format(pos, format!("level bits truncated at coordinate {j}")))?;
        if code > k {
            return Err(Error::format(
                pos,
                format!("level code {code} at coordinate {j} exceeds K = {k}"),
            ));
        }
        levels.push(2 * code as i32 - k as i32);
    }
    Ok(QuantizedVector { levels, config })
}
