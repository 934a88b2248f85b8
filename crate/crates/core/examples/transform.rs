//! Flattening a sparse vector with a randomized Hadamard basis.

use fosgd::transform::sample_basis;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fosgd::Result<()> {
    let d = 1024;
    let mut x = vec![0.0; d];
    x[3] = 1.0;
    x[700] = -1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let basis = sample_basis(d, &mut rng)?;
    let y = basis.apply(&x)?;
    let back = basis.apply_inverse(&y)?;

    let linf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("||x||_inf = {:.4}, ||H x||_inf = {:.4}", linf(&x), linf(&y));
    println!(
        "sqrt(2 ln d / d) * ||x||_2 = {:.4}",
        (2.0 * (d as f64).ln() / d as f64).sqrt() * 2f64.sqrt()
    );
    println!("inverse error {err:.2e}");
    Ok(())
}
