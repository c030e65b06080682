use std::io::Write;

use rayon::prelude::*;
use statrs::function::beta::beta_reg;

use crate::mra_model::{circular_shift, generate_1d};
use crate::rng::derive_seed;
use crate::synchronization::{synchronize, SyncMethod};
use crate::{Error, Result};

/// Sample Pearson correlation `sum (a - a_bar)(b - b_bar) / sqrt(sum (a - a_bar)^2 sum (b - b_bar)^2)`.
pub fn pearson_coefficient(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), actual: b.len() });
    }
    if a.len() < 3 {
        return Err(Error::Config(format!("correlation needs at least 3 samples, got {}", a.len())));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Numerical("correlation of a zero-variance sample".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of `t = r sqrt((n - 2) / (1 - r^2))` under Student's t with
/// `n - 2` degrees of freedom: `I_{nu / (nu + t^2)}(nu / 2, 1 / 2)`.
pub fn pearson_pvalue(r: f64, n: usize) -> Result<f64> {
    if n <= 2 {
        return Err(Error::Config(format!("p-value needs n > 2, got {n}")));
    }
    let r2 = r * r;
    if r2 >= 1.0 {
        return Ok(0.0);
    }
    let nu = (n - 2) as f64;
    // nu / (nu + t^2) with t^2 = nu r^2 / (1 - r^2) simplifies to 1 - r^2.
    Ok(beta_reg(0.5 * nu, 0.5, 1.0 - r2).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DependencyMode {
    /// Shifted signal `R_s x` against the noise.
    BeforeSync,
    /// Aligned signal against aligned noise after estimating shifts with the method.
    AfterSync(SyncMethod),
}

impl std::fmt::Display for DependencyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DependencyMode::BeforeSync => f.write_str("before-sync"),
            DependencyMode::AfterSync(m) => write!(f, "after-{m}"),
        }
    }
}

/// Correlations between every signal entry `i` and noise entry `j`, per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PearsonReport {
    pub signal_len: usize,
    pub sigma: f64,
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub mode: DependencyMode,
    /// `coefficients[t][i * L + j]`.
    pub coefficients: Vec<Vec<f64>>,
    pub p_values: Vec<Vec<f64>>,
    /// Fraction of all `(trial, i, j)` triples with `p < alpha`.
    pub fraction_significant: f64,
    /// Pairs where one side had zero variance (counted as `r = 0`, `p = 1`).
    pub degenerate_pairs: usize,
}

impl PearsonReport {
    /// Mean significant fraction of each trial.
    pub fn per_trial_fraction(&self) -> Vec<f64> {
        self.p_values
            .iter()
            .map(|ps| ps.iter().filter(|p| **p < self.alpha).count() as f64 / ps.len() as f64)
            .collect()
    }

    /// CSV `trial,i,j,r,p`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "trial,i,j,r,p")?;
        let l = self.signal_len;
        for (t, (rs, ps)) in self.coefficients.iter().zip(&self.p_values).enumerate() {
            for (idx, (r, p)) in rs.iter().zip(ps).enumerate() {
                writeln!(w, "{t},{},{},{r:e},{p:e}", idx / l, idx % l)?;
            }
        }
        Ok(())
    }
}

/// Columns `[n][i]` of a list of length-`L` rows.
fn columns(rows: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    (0..len).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
}

/// Per trial: draw `x ~ N(0, I_L)` and `n` shifted noisy copies, optionally estimate
/// shifts and align, then correlate every signal entry with every noise entry
/// across observations. All `L^2` pairs of every trial are pooled.
pub fn dependency_experiment(
    signal_len: usize,
    sigma: f64,
    n: usize,
    trials: usize,
    mode: DependencyMode,
    alpha: f64,
    seed: u64,
) -> Result<PearsonReport> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("significance level {alpha} outside (0, 1)")));
    }
    let per_trial: Vec<(Vec<f64>, Vec<f64>, usize)> = (0..trials)
        .map(|t| -> Result<_> {
            let trial_seed = derive_seed(seed, t as u64);
            let data = generate_1d::<f64>(signal_len, n, sigma, trial_seed)?;
            let clean: Vec<Vec<f64>> = data.shifts.iter().map(|&s| circular_shift(&data.truth, s as i64)).collect();
            let noise: Vec<Vec<f64>> = data
                .signals
                .iter()
                .zip(&clean)
                .map(|(y, c)| y.iter().zip(c).map(|(a, b)| a - b).collect())
                .collect();
            let (sig, eps) = match mode {
                DependencyMode::BeforeSync => (clean, noise),
                DependencyMode::AfterSync(method) => {
                    let sync = synchronize(&data.signals, method, signal_len, derive_seed(trial_seed, 1))?;
                    let back = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
                        rows.iter()
                            .zip(&sync.rotation_indices)
                            .map(|(r, &s)| circular_shift(r, -(s as i64)))
                            .collect()
                    };
                    (back(&clean), back(&noise))
                }
            };
            let sc = columns(&sig, signal_len);
            let ec = columns(&eps, signal_len);
            let pairs: Vec<(f64, f64, bool)> = (0..signal_len * signal_len)
                .into_par_iter()
                .map(|idx| match pearson_coefficient(&sc[idx / signal_len], &ec[idx % signal_len]) {
                    Ok(r) => (r, pearson_pvalue(r, n).unwrap_or(1.0), false),
                    Err(_) => (0.0, 1.0, true),
                })
                .collect();
            let degenerate = pairs.iter().filter(|p| p.2).count();
            Ok((pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect(), degenerate))
        })
        .collect::<Result<_>>()?;

    let total = (trials * signal_len * signal_len) as f64;
    let significant = per_trial.iter().flat_map(|t| t.1.iter()).filter(|p| **p < alpha).count() as f64;
    let degenerate_pairs = per_trial.iter().map(|t| t.2).sum();
    let (coefficients, p_values) = per_trial.into_iter().map(|(r, p, _)| (r, p)).unzip();
    Ok(PearsonReport {
        signal_len,
        sigma,
        n,
        trials,
        alpha,
        mode,
        coefficients,
        p_values,
        fraction_significant: significant / total,
        degenerate_pairs,
    })
}
