//! Monte Carlo checks of the free-Poisson law of `X_e²` for a single edge.
//!
//! The edge is modelled by `X = [[0, G], [Gᵀ, 0]] / √(a+b)` with `G` an
//! `a × b` standard Gaussian block, `a = round(N·μ_w)`, `b = round(N·μ_v)`.
//! The spectrum of `X²` is that of `W = GGᵀ/(a+b)` taken twice, plus `b − a`
//! exact zeros, so each trial diagonalizes only the `a × a` matrix `W`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::{ChaCha12Rng, ChaCha20Rng, ChaCha8Rng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest block dimension accepted.
pub const MIN_DIMENSION: usize = 8;

/// Eigenvalues below this multiple of the mean eigenvalue count as zero.
pub const DEFAULT_RELATIVE_CUTOFF: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RmtError {
    #[error("weights must satisfy μ_v ≥ μ_w > 0, got μ_v = {mu_v}, μ_w = {mu_w}")]
    BadWeights { mu_v: f64, mu_w: f64 },
    #[error("rounded block is {rows} × {cols}, both sides must be at least {MIN_DIMENSION}")]
    Degenerate { rows: usize, cols: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("unknown random generator `{0}`")]
    UnknownGenerator(String),
}

/// Named, portable, seedable generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RngAlgorithm {
    #[default]
    ChaCha20,
    ChaCha12,
    ChaCha8,
}

impl std::str::FromStr for RngAlgorithm {
    type Err = RmtError;

    fn from_str(s: &str) -> Result<Self, RmtError> {
        match s.to_ascii_lowercase().as_str() {
            "chacha20" => Ok(RngAlgorithm::ChaCha20),
            "chacha12" => Ok(RngAlgorithm::ChaCha12),
            "chacha8" => Ok(RngAlgorithm::ChaCha8),
            _ => Err(RmtError::UnknownGenerator(s.to_string())),
        }
    }
}

impl RngAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            RngAlgorithm::ChaCha20 => "chacha20",
            RngAlgorithm::ChaCha12 => "chacha12",
            RngAlgorithm::ChaCha8 => "chacha8",
        }
    }

    /// `rows × cols` standard Gaussians, filled column by column from the
    /// stream `stream` of the generator seeded with `seed`.
    pub fn gaussian_matrix(self, seed: u64, stream: u64, rows: usize, cols: usize) -> DMatrix<f64> {
        fn fill<R: Rng>(mut rng: R, rows: usize, cols: usize) -> DMatrix<f64> {
            DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
        }
        match self {
            RngAlgorithm::ChaCha20 => {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                fill(rng, rows, cols)
            }
            RngAlgorithm::ChaCha12 => {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                fill(rng, rows, cols)
            }
            RngAlgorithm::ChaCha8 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                fill(rng, rows, cols)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeModel {
    pub mu_v: f64,
    pub mu_w: f64,
    /// Scale `N`; the block is `round(N·μ_w) × round(N·μ_v)`.
    pub n: f64,
    pub trials: usize,
    pub seed: u64,
    pub rng: RngAlgorithm,
    pub relative_cutoff: f64,
}

impl EdgeModel {
    pub fn new(mu_v: f64, mu_w: f64, n: f64, trials: usize, seed: u64) -> Self {
        EdgeModel { mu_v, mu_w, n, trials, seed, rng: RngAlgorithm::default(), relative_cutoff: DEFAULT_RELATIVE_CUTOFF }
    }

    /// `(a, b)`: rows and columns of the Gaussian block.
    pub fn dimensions(&self) -> Result<(usize, usize), RmtError> {
        if !(self.mu_w > 0.0 && self.mu_v >= self.mu_w && self.mu_v.is_finite()) {
            return Err(RmtError::BadWeights { mu_v: self.mu_v, mu_w: self.mu_w });
        }
        let rows = (self.n * self.mu_w).round().max(0.0) as usize;
        let cols = (self.n * self.mu_v).round().max(0.0) as usize;
        if rows < MIN_DIMENSION || cols < MIN_DIMENSION {
            return Err(RmtError::Degenerate { rows, cols });
        }
        if self.trials == 0 {
            return Err(RmtError::NoTrials);
        }
        Ok((rows, cols))
    }

    /// `(μ_v − μ_w)/(μ_v + μ_w)`.
    pub fn atom_formula(&self) -> f64 {
        (self.mu_v - self.mu_w) / (self.mu_v + self.mu_w)
    }
}

/// What one trial measured.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub zero_fraction: f64,
    /// Mean of `λ^k`, `k = 1..=4`, over eigenvalues above the cutoff.
    pub moments: [f64; 4],
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub atom_formula: f64,
    pub atom_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean empirical moments of the nonzero spectrum.
    pub moments: [f64; 4],
    /// Limiting moments of the nonzero part of the law, for comparison.
    pub moments_limit: [f64; 4],
    pub rows: usize,
    pub cols: usize,
    pub trials: usize,
    pub seed: u64,
    pub rng: RngAlgorithm,
    pub min_eigenvalue: f64,
}

fn gram(model: &EdgeModel, trial: usize, rows: usize, cols: usize) -> DMatrix<f64> {
    let g = model.rng.gaussian_matrix(model.seed, trial as u64, rows, cols);
    let scale = 1.0 / (rows + cols) as f64;
    (&g * g.transpose()) * scale
}

/// Full spectrum of `X²` for one trial, ascending, via the `a × a` Gram
/// matrix and the exact zeros.
pub fn spectrum_via_gram(model: &EdgeModel, trial: usize) -> Result<Vec<f64>, RmtError> {
    let (rows, cols) = model.dimensions()?;
    let w = gram(model, trial, rows, cols);
    let mut out = vec![0.0; cols - rows];
    for l in w.symmetric_eigenvalues().iter() {
        out.push(*l);
        out.push(*l);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Full spectrum of `X²` for one trial, ascending, by forming `X` and
/// diagonalizing `X²`. Cubic in `a + b`; meant for small sizes.
pub fn spectrum_direct(model: &EdgeModel, trial: usize) -> Result<Vec<f64>, RmtError> {
    let (rows, cols) = model.dimensions()?;
    let g = model.rng.gaussian_matrix(model.seed, trial as u64, rows, cols);
    let n = rows + cols;
    let scale = 1.0 / (n as f64).sqrt();
    let mut x = DMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            x[(i, rows + j)] = g[(i, j)] * scale;
            x[(rows + j, i)] = g[(i, j)] * scale;
        }
    }
    let x2 = &x * &x;
    let mut out: Vec<f64> = x2.symmetric_eigenvalues().iter().copied().collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn run_trial(model: &EdgeModel, trial: usize, rows: usize, cols: usize) -> TrialOutcome {
    let w = gram(model, trial, rows, cols);
    let total = (rows + cols) as f64;
    let mean_eigenvalue = 2.0 * w.trace() / total;
    let cutoff = model.relative_cutoff * mean_eigenvalue;
    let eigenvalues = w.symmetric_eigenvalues();
    let mut below = 0usize;
    let mut sums = [0.0f64; 4];
    let mut kept = 0usize;
    let mut min_eigenvalue = if cols > rows { 0.0 } else { f64::INFINITY };
    for &l in eigenvalues.iter() {
        min_eigenvalue = min_eigenvalue.min(l);
        if l < cutoff {
            below += 1;
        } else {
            kept += 1;
            let mut p = 1.0;
            for s in &mut sums {
                p *= l;
                *s += p;
            }
        }
    }
    let zero_fraction = ((cols - rows) + 2 * below) as f64 / total;
    let moments = if kept == 0 { [0.0; 4] } else { sums.map(|s| s / kept as f64) };
    TrialOutcome { zero_fraction, moments, min_eigenvalue }
}

/// `Σ_k N(n, k) c^{k−1}` scaled by `(b/(a+b))^n` with `c = a/b`: the
/// limiting `n`-th moment of the nonzero spectrum of `X²`.
pub fn nonzero_moment_limit(rows: usize, cols: usize, n: u32) -> f64 {
    let c = rows as f64 / cols as f64;
    let scale = (cols as f64 / (rows + cols) as f64).powi(n as i32);
    let narayana = |n: u32, k: u32| binomial(n, k) * binomial(n, k - 1) / n as f64;
    scale * (1..=n).map(|k| narayana(n, k) * c.powi(k as i32 - 1)).sum::<f64>()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Runs the trials in parallel; results are reduced in trial order, so the
/// report depends only on the model.
pub fn simulate_edge(model: &EdgeModel) -> Result<EdgeReport, RmtError> {
    let (rows, cols) = model.dimensions()?;
    let outcomes: Vec<TrialOutcome> =
        (0..model.trials).into_par_iter().map(|t| run_trial(model, t, rows, cols)).collect();
    let t = outcomes.len() as f64;
    let mean = outcomes.iter().map(|o| o.zero_fraction).sum::<f64>() / t;
    let sd = if outcomes.len() > 1 {
        (outcomes.iter().map(|o| (o.zero_fraction - mean).powi(2)).sum::<f64>() / (t - 1.0)).sqrt()
    } else {
        0.0
    };
    let half = 1.96 * sd / t.sqrt();
    let mut moments = [0.0; 4];
    for o in &outcomes {
        for (m, x) in moments.iter_mut().zip(o.moments) {
            *m += x / t;
        }
    }
    let moments_limit = [1, 2, 3, 4].map(|n| nonzero_moment_limit(rows, cols, n));
    let min_eigenvalue = outcomes.iter().map(|o| o.min_eigenvalue).fold(f64::INFINITY, f64::min);
    Ok(EdgeReport {
        atom_formula: model.atom_formula(),
        atom_estimate: mean,
        ci_low: mean - half,
        ci_high: mean + half,
        moments,
        moments_limit,
        rows,
        cols,
        trials: model.trials,
        seed: model.seed,
        rng: model.rng,
        min_eigenvalue,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemicircleReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Mean `m₂, m₄, m₆` over trials.
    pub moments: [f64; 3],
    pub targets: [f64; 3],
    pub deviations: [f64; 3],
    /// Standard error of each mean; zero for a single trial.
    pub standard_errors: [f64; 3],
}

/// Even moments of `H = (A + Aᵀ)/√(2N)` for a Gaussian `A`, which approach
/// the Catalan numbers 1, 2, 5.
pub fn simulate_semicircular(n: usize, trials: usize, seed: u64, rng: RngAlgorithm) -> SemicircleReport {
    let n = n.max(1);
    let trials = trials.max(1);
    let samples: Vec<[f64; 3]> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = rng.gaussian_matrix(seed, t as u64, n, n);
            let h = (&a + a.transpose()) * (1.0 / (2.0 * n as f64).sqrt());
            let h2 = &h * &h;
            let h3 = &h2 * &h;
            let nf = n as f64;
            [h.norm_squared() / nf, h2.norm_squared() / nf, h3.norm_squared() / nf]
        })
        .collect();
    let tf = trials as f64;
    let mut moments = [0.0; 3];
    for s in &samples {
        for (m, x) in moments.iter_mut().zip(s) {
            *m += x / tf;
        }
    }
    let mut standard_errors = [0.0; 3];
    if trials > 1 {
        for (i, se) in standard_errors.iter_mut().enumerate() {
            let var = samples.iter().map(|s| (s[i] - moments[i]).powi(2)).sum::<f64>() / (tf - 1.0);
            *se = (var / tf).sqrt();
        }
    }
    let targets = [1.0, 2.0, 5.0];
    let deviations = [0, 1, 2].map(|i| moments[i] - targets[i]);
    SemicircleReport { n, trials, seed, moments, targets, deviations, standard_errors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_round_and_validate() {
        let m = EdgeModel::new(2.0, 1.0, 100.0, 3, 1);
        assert_eq!(m.dimensions().unwrap(), (100, 200));
        assert!(matches!(EdgeModel::new(1.0, 2.0, 100.0, 3, 1).dimensions(), Err(RmtError::BadWeights { .. })));
        assert!(matches!(EdgeModel::new(2.0, 1.0, 4.0, 3, 1).dimensions(), Err(RmtError::Degenerate { .. })));
        assert!(matches!(EdgeModel::new(2.0, 1.0, 100.0, 0, 1).dimensions(), Err(RmtError::NoTrials)));
    }

    #[test]
    fn gram_spectrum_matches_direct_spectrum() {
        let m = EdgeModel::new(3.0, 1.0, 10.0, 1, 7);
        let a = spectrum_via_gram(&m, 0).unwrap();
        let b = spectrum_direct(&m, 0).unwrap();
        assert_eq!(a.len(), b.len());
        let scale = b.last().copied().unwrap_or(1.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
        let cutoff = 1e-6 * b.iter().sum::<f64>() / b.len() as f64;
        let zeros = b.iter().filter(|&&l| l < cutoff).count();
        assert_eq!(zeros, 20);
    }

    #[test]
    fn atom_estimate_small_case() {
        let r = simulate_edge(&EdgeModel::new(3.0, 1.0, 40.0, 4, 3)).unwrap();
        assert!((r.atom_estimate - 0.5).abs() < 0.02);
        assert!(r.ci_low <= r.atom_estimate && r.atom_estimate <= r.ci_high);
        let even = simulate_edge(&EdgeModel::new(1.0, 1.0, 60.0, 4, 3)).unwrap();
        assert!(even.atom_estimate < 0.05);
    }

    #[test]
    fn spectrum_is_nonnegative() {
        let r = simulate_edge(&EdgeModel::new(2.0, 1.0, 50.0, 3, 11)).unwrap();
        assert!(r.min_eigenvalue >= -150.0 * f64::EPSILON);
    }

    #[test]
    fn seeded_runs_repeat_exactly() {
        let m = EdgeModel::new(2.0, 1.0, 30.0, 5, 42);
        let a = serde_json::to_string(&simulate_edge(&m).unwrap()).unwrap();
        let b = serde_json::to_string(&simulate_edge(&m).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = EdgeModel { seed: 43, ..m };
        assert_ne!(a, serde_json::to_string(&simulate_edge(&other).unwrap()).unwrap());
    }

    #[test]
    fn moment_limit_small_values() {
        // a = b: the nonzero law is free Poisson of rate 1 scaled by 1/2
        assert!((nonzero_moment_limit(10, 10, 1) - 0.5).abs() < 1e-15);
        assert!((nonzero_moment_limit(10, 10, 2) - 0.5).abs() < 1e-15);
        // a/b = 1/2: first moment b/(a+b) = 2/3
        assert!((nonzero_moment_limit(10, 20, 1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn semicircle_small_n_still_reports() {
        let r = simulate_semicircular(8, 3, 1, RngAlgorithm::ChaCha20);
        assert_eq!(r.n, 8);
        assert!(r.moments.iter().all(|m| m.is_finite()));
        let again = simulate_semicircular(8, 3, 1, RngAlgorithm::ChaCha20);
        assert_eq!(r, again);
    }

    #[test]
    fn generator_names() {
        assert_eq!("ChaCha8".parse::<RngAlgorithm>().unwrap(), RngAlgorithm::ChaCha8);
        assert!("mt19937".parse::<RngAlgorithm>().is_err());
    }
}
