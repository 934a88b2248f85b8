//! Objectives and stochastic gradient oracles.
//!
//! An oracle returns unbiased samples of `∇f(x)` with a norm bound `B` that is
//! certified only inside a trust region `‖x‖₂ ≤ R`. Samples are never clipped;
//! the simulator aborts if an iterate leaves the region.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A differentiable objective on `R^d`.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// A global minimizer, when known.
    fn minimizer(&self) -> Option<&[f64]> {
        None
    }

    /// The minimum value, when known.
    fn min_value(&self) -> Option<f64> {
        self.minimizer().map(|x| self.value(x))
    }

    /// Upper bound on `‖∇f(x)‖₂` over `‖x‖₂ ≤ radius`.
    fn gradient_norm_bound(&self, radius: f64) -> f64;
}

/// Objectives whose partial derivatives can be computed one at a time.
pub trait SeparableObjective: Objective {
    fn partial(&self, x: &[f64], j: usize) -> f64;

    /// Upper bound on `|∂f/∂x_j|` over `‖x‖₂ ≤ radius`, all `j`.
    fn partial_bound(&self, radius: f64) -> f64;
}

/// Unbiased stochastic gradients `g(ξ, x)` of an objective.
pub trait GradientOracle: Send + Sync {
    fn objective(&self) -> &dyn Objective;

    fn dim(&self) -> usize {
        self.objective().dim()
    }

    fn sample(&self, x: &[f64], rng: &mut dyn RngCore) -> Vec<f64>;

    /// The certified bound `B` on `‖g(ξ, x)‖₂` for `‖x‖₂ ≤ trust_radius()`.
    fn norm_bound(&self) -> f64;

    fn trust_radius(&self) -> f64;

    /// True when every sample has at most one nonzero coordinate.
    fn is_one_sparse(&self) -> bool {
        false
    }
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension(format!("expected length {expected}, got {got}")));
    }
    Ok(())
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Config(format!("trust radius must be positive, got {radius}")));
    }
    Ok(())
}

/// `f(x) = (1/m)‖y − Ax‖²` with its minimizer cached.
#[derive(Debug, Clone)]
pub struct LeastSquaresProblem {
    design: DMatrix<f64>,
    targets: DVector<f64>,
    minimizer: Vec<f64>,
    min_value: f64,
    max_row_norm: f64,
    max_abs_target: f64,
}

impl LeastSquaresProblem {
    /// Builds the problem and solves for `x*` by SVD, checking `∇f(x*) ≈ 0`.
    pub fn new(design: DMatrix<f64>, targets: DVector<f64>) -> Result<Self> {
        let (m, d) = design.shape();
        if m == 0 || d == 0 {
            return Err(Error::Dimension("empty design matrix".into()));
        }
        check_dim(m, targets.len())?;
        if design.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("design and targets must be finite".into()));
        }
        let svd = design.clone().svd(true, true);
        let xs = svd
            .solve(&targets, 1e-12 * svd.singular_values.max())
            .map_err(|e| Error::Precondition(e.to_string()))?;
        let max_row_norm = design.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        let max_abs_target = targets.amax();
        let mut p = Self {
            design,
            targets,
            minimizer: xs.iter().copied().collect(),
            min_value: 0.0,
            max_row_norm,
            max_abs_target,
        };
        p.min_value = p.value(&p.minimizer);

        let g = norm(&p.gradient(&p.minimizer));
        let scale = 2.0 / m as f64 * (p.design.transpose() * &p.targets).norm().max(f64::MIN_POSITIVE);
        if g > 1e-8 * scale.max(1.0) {
            return Err(Error::Precondition(format!(
                "least-squares solve did not reach a stationary point (gradient norm {g:e})"
            )));
        }
        Ok(p)
    }

    /// Builds from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>], targets: &[f64]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("rows have different lengths".into()));
        }
        let design = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new(design, DVector::from_column_slice(targets))
    }

    /// Gaussian design with i.i.d. `N(0, 1)` entries, a planted
    /// `x₀ ~ N(0, I/d)` and targets `y = A x₀ + noise · N(0, 1)`.
    pub fn synthetic(m: usize, d: usize, noise: f64, seed: u64) -> Result<Self> {
        if m < d || d == 0 {
            return Err(Error::Config(format!(
                "synthetic problem needs m >= d >= 1, got m={m}, d={d}"
            )));
        }
        if !(noise.is_finite() && noise >= 0.0) {
            return Err(Error::Config(format!("noise must be nonnegative, got {noise}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let design = DMatrix::from_fn(m, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let scale = 1.0 / (d as f64).sqrt();
        let planted = DVector::from_fn(d, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        let mut targets = &design * planted;
        for y in targets.iter_mut() {
            *y += noise * rng.sample::<f64, _>(StandardNormal);
        }
        Self::new(design, targets)
    }

    /// Reads whitespace-separated rows from `matrix` and one target per line
    /// (or whitespace-separated) from `targets`.
    pub fn load_text(matrix: impl AsRef<Path>, targets: impl AsRef<Path>) -> Result<Self> {
        let rows = read_rows(matrix.as_ref())?;
        let ys: Vec<f64> = read_rows(targets.as_ref())?.into_iter().flatten().collect();
        Self::from_rows(&rows, &ys)
    }

    pub fn rows(&self) -> usize {
        self.design.nrows()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn max_row_norm(&self) -> f64 {
        self.max_row_norm
    }

    pub fn max_abs_target(&self) -> f64 {
        self.max_abs_target
    }

    /// `2(⟨a_i, x⟩ − y_i) a_i`, the gradient of the `i`-th summand.
    pub fn row_gradient(&self, x: &[f64], i: usize, out: &mut [f64]) {
        let row = self.design.row(i);
        let r: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.targets[i];
        for (o, a) in out.iter_mut().zip(row.iter()) {
            *o += 2.0 * r * a;
        }
    }
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Config(format!("{}:{}: not a number: {tok:?}", path.display(), n + 1)))
                })
                .collect()
        })
        .collect()
}

impl Objective for LeastSquaresProblem {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = &self.design * DVector::from_column_slice(x) - &self.targets;
        r.norm_squared() / self.rows() as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = &self.design * DVector::from_column_slice(x) - &self.targets;
        let g = self.design.tr_mul(&r) * (2.0 / self.rows() as f64);
        g.iter().copied().collect()
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.minimizer)
    }

    fn min_value(&self) -> Option<f64> {
        Some(self.min_value)
    }

    fn gradient_norm_bound(&self, radius: f64) -> f64 {
        2.0 * self.max_row_norm * (self.max_abs_target + self.max_row_norm * radius)
    }
}

/// Minibatch oracle `(1/m′)Σ 2(⟨a_ξ, x⟩ − y_ξ)a_ξ`, indices drawn with replacement.
#[derive(Debug, Clone)]
pub struct LeastSquaresOracle {
    problem: LeastSquaresProblem,
    batch: usize,
    radius: f64,
    bound: f64,
}

impl LeastSquaresOracle {
    /// `B = 2·max‖a_i‖·(max|y_i| + max‖a_i‖·R)`.
    pub fn new(problem: LeastSquaresProblem, batch: usize, radius: f64) -> Result<Self> {
        if batch == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        check_radius(radius)?;
        let bound = problem.gradient_norm_bound(radius);
        Ok(Self {
            problem,
            batch,
            radius,
            bound,
        })
    }

    pub fn problem(&self) -> &LeastSquaresProblem {
        &self.problem
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    /// The sample for a fixed index tuple.
    pub fn sample_indices(&self, x: &[f64], indices: &[usize]) -> Vec<f64> {
        let mut g = vec![0.0; self.problem.dim()];
        for &i in indices {
            self.problem.row_gradient(x, i, &mut g);
        }
        let inv = 1.0 / indices.len() as f64;
        g.iter_mut().for_each(|v| *v *= inv);
        g
    }
}

impl GradientOracle for LeastSquaresOracle {
    fn objective(&self) -> &dyn Objective {
        &self.problem
    }

    fn sample(&self, x: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let m = self.problem.rows();
        let idx: Vec<usize> = (0..self.batch).map(|_| rng.gen_range(0..m)).collect();
        self.sample_indices(x, &idx)
    }

    fn norm_bound(&self) -> f64 {
        self.bound
    }

    fn trust_radius(&self) -> f64 {
        self.radius
    }
}

/// `d · ∂f/∂x_j(x) · e_j` with `j` uniform on `[d]`.
pub struct OneSparseOracle<F> {
    objective: F,
    radius: f64,
}

impl<F: SeparableObjective> OneSparseOracle<F> {
    pub fn new(objective: F, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self { objective, radius })
    }

    pub fn inner(&self) -> &F {
        &self.objective
    }

    /// The sample for coordinate `j`.
    pub fn sample_coordinate(&self, x: &[f64], j: usize) -> Vec<f64> {
        let d = self.objective.dim();
        let mut g = vec![0.0; d];
        g[j] = d as f64 * self.objective.partial(x, j);
        g
    }
}

impl<F: SeparableObjective> GradientOracle for OneSparseOracle<F> {
    fn objective(&self) -> &dyn Objective {
        &self.objective
    }

    fn sample(&self, x: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let j = rng.gen_range(0..self.objective.dim());
        self.sample_coordinate(x, j)
    }

    fn norm_bound(&self) -> f64 {
        self.objective.dim() as f64 * self.objective.partial_bound(self.radius)
    }

    fn trust_radius(&self) -> f64 {
        self.radius
    }

    fn is_one_sparse(&self) -> bool {
        true
    }
}

/// Returns `∇f(x)` itself (`σ = 0`).
pub struct ExactGradientOracle<F> {
    objective: F,
    radius: f64,
}

impl<F: Objective> ExactGradientOracle<F> {
    pub fn new(objective: F, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self { objective, radius })
    }

    pub fn inner(&self) -> &F {
        &self.objective
    }
}

impl<F: Objective> GradientOracle for ExactGradientOracle<F> {
    fn objective(&self) -> &dyn Objective {
        &self.objective
    }

    fn sample(&self, x: &[f64], _rng: &mut dyn RngCore) -> Vec<f64> {
        self.objective.gradient(x)
    }

    fn norm_bound(&self) -> f64 {
        self.objective.gradient_norm_bound(self.radius)
    }

    fn trust_radius(&self) -> f64 {
        self.radius
    }
}

/// `f(x) = ‖x − c‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedQuadratic {
    center: Vec<f64>,
}

impl ShiftedQuadratic {
    pub fn new(center: Vec<f64>) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Dimension("center must be nonempty".into()));
        }
        Ok(Self { center })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

impl Objective for ShiftedQuadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, c)| 2.0 * (a - c)).collect()
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.center)
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn gradient_norm_bound(&self, radius: f64) -> f64 {
        2.0 * (radius + norm(&self.center))
    }
}

impl SeparableObjective for ShiftedQuadratic {
    fn partial(&self, x: &[f64], j: usize) -> f64 {
        2.0 * (x[j] - self.center[j])
    }

    fn partial_bound(&self, radius: f64) -> f64 {
        let c = self.center.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        2.0 * (radius + c)
    }
}

/// `f(x) = ‖x‖²/2 + Σ_j cos(x_j)`. Smooth with `L = 2`, minimized at 0 with `f* = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCosine {
    dim: usize,
    origin: Vec<f64>,
}

impl QuadraticCosine {
    pub const SMOOTHNESS: f64 = 2.0;

    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            origin: vec![0.0; dim],
        })
    }
}

impl Objective for QuadraticCosine {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| 0.5 * v * v + v.cos()).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v - v.sin()).collect()
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.origin)
    }

    fn min_value(&self) -> Option<f64> {
        Some(self.dim as f64)
    }

    // |t − sin t| ≤ |t|
    fn gradient_norm_bound(&self, radius: f64) -> f64 {
        radius
    }
}

impl SeparableObjective for QuadraticCosine {
    fn partial(&self, x: &[f64], j: usize) -> f64 {
        x[j] - x[j].sin()
    }

    fn partial_bound(&self, radius: f64) -> f64 {
        radius
    }
}

/// `f(x) = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantObjective {
    dim: usize,
    level: f64,
}

impl ConstantObjective {
    pub fn new(dim: usize, level: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        Ok(Self { dim, level })
    }
}

impl Objective for ConstantObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _x: &[f64]) -> f64 {
        self.level
    }

    fn gradient(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn min_value(&self) -> Option<f64> {
        Some(self.level)
    }

    fn gradient_norm_bound(&self, _radius: f64) -> f64 {
        0.0
    }
}

impl SeparableObjective for ConstantObjective {
    fn partial(&self, _x: &[f64], _j: usize) -> f64 {
        0.0
    }

    fn partial_bound(&self, _radius: f64) -> f64 {
        0.0
    }
}

/// One sample from `oracle` at `x`, checked against the dimension.
pub fn sample_gradient(oracle: &dyn GradientOracle, x: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
    check_dim(oracle.dim(), x.len())?;
    Ok(oracle.sample(x, rng))
}

/// One 1-sparse sample `d · ∂f/∂x_j · e_j`.
pub fn sample_one_sparse<F: SeparableObjective + ?Sized>(
    objective: &F,
    x: &[f64],
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    let d = objective.dim();
    check_dim(d, x.len())?;
    let j = rng.gen_range(0..d);
    let mut g = vec![0.0; d];
    g[j] = d as f64 * objective.partial(x, j);
    Ok(g)
}

/// `E‖g(ξ, x) − ∇f(x)‖²` estimated at `x` from `samples` draws.
pub fn empirical_variance(oracle: &dyn GradientOracle, x: &[f64], samples: usize, rng: &mut dyn RngCore) -> f64 {
    let grad = oracle.objective().gradient(x);
    let mut acc = 0.0;
    for _ in 0..samples {
        let g = oracle.sample(x, rng);
        acc += g.iter().zip(&grad).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    acc / samples as f64
}

/// A point uniform in the ball `‖x‖₂ ≤ radius`.
pub fn random_point_in_ball(dim: usize, radius: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = norm(&x).max(f64::MIN_POSITIVE);
    let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    x.iter_mut().for_each(|v| *v *= r / n);
    x
}

/// Largest empirical variance over `points` random points of the trust region.
pub fn trust_region_variance(oracle: &dyn GradientOracle, points: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..points)
        .map(|_| {
            let x = random_point_in_ball(oracle.dim(), oracle.trust_radius(), &mut rng);
            empirical_variance(oracle, &x, samples, &mut rng)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference(f: &dyn Objective, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|j| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[j] += h;
                m[j] -= h;
                (f.value(&p) - f.value(&m)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn identity_design_example() {
        let p = LeastSquaresProblem::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 0.0]).unwrap();
        assert!((p.value(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(p.gradient(&[1.0, 1.0]), vec![1.0, 1.0]);
        assert!(p.gradient(p.minimizer().unwrap()).iter().all(|g| g.abs() < 1e-8));
    }

    #[test]
    fn least_squares_gradient_matches_finite_differences() {
        let p = LeastSquaresProblem::synthetic(5, 3, 0.3, 11).unwrap();
        let x = [0.4, -1.2, 0.7];
        for (a, e) in p.gradient(&x).iter().zip(finite_difference(&p, &x)) {
            assert!((a - e).abs() < 1e-5, "{a} vs {e}");
        }
        let g = p.gradient(p.minimizer().unwrap());
        assert!(norm(&g) < 1e-8);
        assert!(p.value(&x) >= p.min_value().unwrap());
    }

    #[test]
    fn minibatch_enumeration_is_unbiased() {
        let p = LeastSquaresProblem::from_rows(
            &[vec![1.0, 2.0], vec![-0.5, 0.3], vec![0.9, -1.1], vec![0.2, 0.4]],
            &[0.3, -0.2, 1.0, 0.5],
        )
        .unwrap();
        let x = [0.25, -0.75];
        let full = p.gradient(&x);
        for batch in 1..=2 {
            let o = LeastSquaresOracle::new(p.clone(), batch, 1.0).unwrap();
            let m = p.rows();
            let mut mean = [0.0; 2];
            let tuples = m.pow(batch as u32);
            for code in 0..tuples {
                let idx: Vec<usize> = (0..batch).map(|k| (code / m.pow(k as u32)) % m).collect();
                let g = o.sample_indices(&x, &idx);
                mean[0] += g[0] / tuples as f64;
                mean[1] += g[1] / tuples as f64;
            }
            for (a, e) in mean.iter().zip(&full) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn minibatch_variance_shrinks_with_batch() {
        let p = LeastSquaresProblem::synthetic(3, 2, 0.5, 5).unwrap();
        let x = [1.0, -1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let one = LeastSquaresOracle::new(p.clone(), 1, 2.0).unwrap();
        let all = LeastSquaresOracle::new(p, 3, 2.0).unwrap();
        let v1 = empirical_variance(&one, &x, 100_000, &mut rng);
        let v3 = empirical_variance(&all, &x, 100_000, &mut rng);
        let ratio = v3 / v1;
        assert!((ratio * 3.0 - 1.0).abs() < 0.15, "ratio {ratio}");
    }

    #[test]
    fn oracle_sampling_is_deterministic() {
        let p = LeastSquaresProblem::synthetic(20, 4, 0.1, 1).unwrap();
        let o = LeastSquaresOracle::new(p, 3, 1.0).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        let a = o.sample(&x, &mut ChaCha8Rng::seed_from_u64(3));
        let b = o.sample(&x, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn one_sparse_example() {
        let f = ShiftedQuadratic::new(vec![1.0, 1.0]).unwrap();
        let o = OneSparseOracle::new(f, 1.0).unwrap();
        assert_eq!(o.sample_coordinate(&[0.0, 0.0], 0), vec![-4.0, 0.0]);
        assert_eq!(o.sample_coordinate(&[0.0, 0.0], 1), vec![0.0, -4.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let g = o.sample(&[0.3, -0.2], &mut rng);
            assert!(g.iter().filter(|v| **v != 0.0).count() <= 1);
            let z = o.sample(&[1.0, 1.0], &mut rng);
            assert!(z.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn one_sparse_enumeration_is_unbiased() {
        let f = QuadraticCosine::new(4).unwrap();
        let o = OneSparseOracle::new(f.clone(), 3.0).unwrap();
        let x = [0.5, -1.5, 2.0, 0.1];
        let mut mean = [0.0; 4];
        for j in 0..4 {
            for (m, g) in mean.iter_mut().zip(o.sample_coordinate(&x, j)) {
                *m += g / 4.0;
            }
        }
        for (a, e) in mean.iter().zip(f.gradient(&x)) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn test_functions_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fs: Vec<Box<dyn Objective>> = vec![
            Box::new(ShiftedQuadratic::new(vec![-1.0, 0.5, 2.0]).unwrap()),
            Box::new(QuadraticCosine::new(3).unwrap()),
            Box::new(ConstantObjective::new(3, 7.0).unwrap()),
        ];
        for f in &fs {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for (a, e) in f.gradient(&x).iter().zip(finite_difference(f.as_ref(), &x)) {
                assert!((a - e).abs() < 1e-5);
            }
        }
        let q = QuadraticCosine::new(5).unwrap();
        assert_eq!(q.min_value(), Some(5.0));
        assert!(q.gradient(&[0.0; 5]).iter().all(|g| *g == 0.0));
    }

    #[test]
    fn norm_bounds_are_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = LeastSquaresProblem::synthetic(50, 8, 0.2, 2).unwrap();
        let oracles: Vec<Box<dyn GradientOracle>> = vec![
            Box::new(LeastSquaresOracle::new(p, 2, 1.5).unwrap()),
            Box::new(OneSparseOracle::new(ShiftedQuadratic::new(vec![-1.0; 8]).unwrap(), 3.0).unwrap()),
            Box::new(ExactGradientOracle::new(QuadraticCosine::new(8).unwrap(), 4.0).unwrap()),
        ];
        for o in &oracles {
            for _ in 0..100 {
                let x = random_point_in_ball(8, o.trust_radius(), &mut rng);
                assert!(norm(&x) <= o.trust_radius());
                for _ in 0..100 {
                    assert!(norm(&o.sample(&x, &mut rng)) <= o.norm_bound());
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(LeastSquaresProblem::from_rows(&[vec![1.0, 2.0], vec![1.0]], &[0.0, 0.0]).is_err());
        assert!(LeastSquaresProblem::from_rows(&[vec![1.0]], &[0.0, 1.0]).is_err());
        assert!(LeastSquaresProblem::synthetic(2, 4, 0.0, 0).is_err());
        let p = LeastSquaresProblem::synthetic(4, 2, 0.0, 0).unwrap();
        assert!(LeastSquaresOracle::new(p.clone(), 0, 1.0).is_err());
        assert!(LeastSquaresOracle::new(p, 1, -1.0).is_err());
        let o = ExactGradientOracle::new(QuadraticCosine::new(3).unwrap(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_gradient(&o, &[0.0; 2], &mut rng),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn loads_text_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let y = dir.path().join("y.txt");
        std::fs::write(&a, "1 0\n0 1\n1 1\n").unwrap();
        std::fs::write(&y, "1\n2\n3\n").unwrap();
        let p = LeastSquaresProblem::load_text(&a, &y).unwrap();
        let xs = p.minimizer().unwrap();
        assert!((xs[0] - 1.0).abs() < 1e-10 && (xs[1] - 2.0).abs() < 1e-10);

        std::fs::write(&y, "1\nx\n3\n").unwrap();
        assert!(matches!(LeastSquaresProblem::load_text(&a, &y), Err(Error::Config(_))));
        assert!(matches!(
            LeastSquaresProblem::load_text(dir.path().join("missing"), &y),
            Err(Error::Io { .. })
        ));
    }
}
