//! Encoding a gradient to bytes and back.

use fosgd::codec::{decode, deserialize, encode, padded_dim, serialize, HEADER_LEN};
use fosgd::quantizer::DitherConfig;
use fosgd::transform::sample_basis;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fosgd::Result<()> {
    let g: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis = sample_basis(padded_dim(g.len()), &mut rng)?;
    // large enough that no rotated coordinate is clipped
    let lambda = 4.0;

    let enc = encode(&g, &basis, DitherConfig::new(lambda, 1)?, &mut rng)?;
    let bytes = serialize(&enc);
    println!(
        "{} coordinates -> {} bytes ({} header + {} payload bits)",
        g.len(),
        bytes.len(),
        HEADER_LEN,
        enc.payload_bits()
    );

    let back = decode(&deserialize(&bytes)?);
    let err: f64 = back.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    println!("one-shot reconstruction error {err:.3}");
    Ok(())
}
