//! Unbiasedness and variance of the dithered quantizer.

use fosgd::quantizer::{quantize, quantizer_mse, DitherConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fosgd::Result<()> {
    let x = [0.3, -1.2, 0.0, 1.9];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in [1u16, 4, 16] {
        let config = DitherConfig::new(2.0, k)?;
        let trials = 100_000;
        let mut mean = [0.0; 4];
        let mut mse = 0.0;
        for _ in 0..trials {
            let q = quantize(&x, config, &mut rng).dequantize();
            for (m, v) in mean.iter_mut().zip(&q) {
                *m += v / trials as f64;
            }
            mse += q.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / trials as f64;
        }
        println!(
            "K={k:2} ({} bits/coord) mean {:?} mse {mse:.4} formula {:.4}",
            config.bits_per_level(),
            mean.map(|m| (m * 1e3).round() / 1e3),
            quantizer_mse(&x, config)?
        );
    }
    Ok(())
}
