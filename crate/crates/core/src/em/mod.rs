//! MAP expectation-maximization over grid rotations, for standard EM and for
//! Synch-EM (synchronize, then EM over a narrow rotation window with a KL prior).
//!
//! Model. Observation `v_j` is `R_l a + e_j` with `R_l a = a o exp(-i k 2 pi l / L)`
//! and complex Gaussian noise of per-entry variance `sigma^2`, so the likelihood
//! exponent is `-||R_l a - v_j||^2 / sigma^2`. Norms here run over the stored
//! (`k >= 0`) entries. The optional signal prior is `a ~ CN(0, diag(Gamma))`.
//! The rotation PMF `rho` lives on the centered window of `BW` grid offsets and
//! may be tied to a reference `rho_bar` through `-gamma KL(rho_bar, rho)`.
//!
//! The objective reported by [`evaluate_objective`] is the marginal log-posterior
//!
//! ```text
//! sum_j log sum_l rho[l] exp(-||R_l a - v_j||^2 / sigma^2) - sum_m |a_m|^2 / Gamma_m - gamma KL(rho_bar, rho)
//! ```
//!
//! which drops `-N M log(pi sigma^2)` and the normalizer of the signal prior.

mod config;

use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;

use crate::dist_learning::kl_divergence;
use crate::rng::stream_rng;
use crate::rotation::{PhaseTable, RotationDistribution};
use crate::steerable_basis::SteerableCoeffs;
use crate::synchronization::{self, Alignable, PpmOptions, SyncResult};
use crate::{Error, Real, Result};

pub use config::{exponential_decay_prior, exponential_decay_prior_with, EmConfig};

/// Rows per block of the fixed-order M-step reduction.
const REDUCTION_CHUNK: usize = 64;

/// Posterior rotation weights `w[j][b]` for window bins `b = 0..BW`
/// (grid offset `window_offset + b`), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights<T> {
    pub rows: usize,
    pub bandwidth: usize,
    pub window_offset: i64,
    pub values: Vec<T>,
    /// `log sum_l rho[l] exp(-||R_l a - v_j||^2 / sigma^2)` per observation.
    pub log_evidence: Vec<f64>,
}

impl<T: Real> Weights<T> {
    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.bandwidth..(j + 1) * self.bandwidth]
    }

    /// `W[b] = sum_j w[j][b]`, summed in row order.
    pub fn column_sums(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.bandwidth];
        for j in 0..self.rows {
            for (s, w) in sums.iter_mut().zip(self.row(j)) {
                *s += *w;
            }
        }
        sums
    }
}

/// Iterate of an EM run.
#[derive(Debug, Clone)]
pub struct EmState<T> {
    pub coeffs: SteerableCoeffs<T>,
    pub distribution: RotationDistribution<T>,
    pub iteration: usize,
    pub objective_trace: Vec<f64>,
    pub weights: Option<Weights<T>>,
    pub wall_time: Duration,
}

impl<T: Real> EmState<T> {
    pub fn new(coeffs: SteerableCoeffs<T>, distribution: RotationDistribution<T>) -> Self {
        Self { coeffs, distribution, iteration: 0, objective_trace: Vec::new(), weights: None, wall_time: Duration::ZERO }
    }
}

#[derive(Debug, Clone)]
pub struct EmReport<T> {
    pub coeffs: SteerableCoeffs<T>,
    pub distribution: RotationDistribution<T>,
    /// Completed E/M pairs.
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the initial point and after every iteration (`iterations + 1` entries).
    pub objective_trace: Vec<f64>,
    /// `min_l ||a_{t+1} - R_l a_t||^2` after each iteration.
    pub coeff_changes: Vec<f64>,
    /// Seconds since the start of the run at the end of each iteration.
    pub elapsed: Vec<f64>,
    /// EM time plus, for Synch-EM, synchronization time.
    pub wall_time: Duration,
    pub sync_time: Option<Duration>,
    pub sync: Option<SyncResult>,
}

impl<T: Real> EmReport<T> {
    /// Mean wall time of one E/M pair.
    pub fn time_per_iteration(&self) -> Option<f64> {
        (self.iterations > 0).then(|| self.elapsed[self.iterations - 1] / self.iterations as f64)
    }

    /// CSV with header `iteration,objective,coeff_change,elapsed`; row 0 is the
    /// initial point and has an empty change.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iteration,objective,coeff_change,elapsed")?;
        for (t, obj) in self.objective_trace.iter().enumerate() {
            if t == 0 {
                writeln!(w, "0,{obj:e},,0")?;
            } else {
                writeln!(w, "{t},{obj:e},{:e},{:.6}", self.coeff_changes[t - 1], self.elapsed[t - 1])?;
            }
        }
        Ok(())
    }
}

/// Starting point of [`run_em`].
#[derive(Debug, Clone)]
pub struct EmInit<T> {
    pub coeffs: SteerableCoeffs<T>,
    pub distribution: RotationDistribution<T>,
}

fn check_sigma<T: Real>(sigma: T) -> Result<()> {
    if sigma > T::zero() && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("EM needs a positive noise level, got {sigma}")))
    }
}

fn check_observations<T: Real>(obs: &[SteerableCoeffs<T>], coeffs: &SteerableCoeffs<T>) -> Result<()> {
    if obs.is_empty() {
        return Err(Error::Config("EM needs at least one observation".into()));
    }
    if obs.iter().any(|o| !o.same_index(coeffs)) {
        return Err(Error::IndexMismatch);
    }
    Ok(())
}

/// Per-angular-frequency sums `c_k = sum_{m : k_m = k} conj(x_m) y_m`.
fn per_frequency<T: Real>(x: &SteerableCoeffs<T>, y: &SteerableCoeffs<T>) -> Vec<Complex<T>> {
    let mut c = vec![Complex::new(T::zero(), T::zero()); x.index().max_angular() as usize + 1];
    for ((a, b), &k) in x.values().iter().zip(y.values()).zip(x.angular_index()) {
        c[k as usize] += a.conj() * *b;
    }
    c
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// E-step. `w[j][b]` is proportional to `rho[b] exp(-||R_{l_b} a - v_j||^2 / sigma^2)`,
/// evaluated in the log domain with the row maximum subtracted. The data term
/// uses `Re <R_l a, v> = Re sum_k c_k exp(i k 2 pi l / L)`, so one row costs
/// `O(M + BW K)` for largest angular frequency `K`.
pub fn e_step<T: Real>(
    coeffs: &SteerableCoeffs<T>,
    distribution: &RotationDistribution<T>,
    observations: &[SteerableCoeffs<T>],
    sigma: T,
    config: &EmConfig<T>,
) -> Result<Weights<T>> {
    check_sigma(sigma)?;
    check_observations(observations, coeffs)?;
    let rho = config.on_window(distribution)?;
    let table = PhaseTable::<T>::new(config.grid_size);
    let offset = rho.window_offset();
    let bw = rho.len();
    let inv_var = 1.0 / (sigma.as_f64() * sigma.as_f64());
    let log_rho: Vec<f64> = rho.pmf().iter().map(|p| p.as_f64().ln()).collect();
    let a_norm = coeffs.norm_sqr().as_f64();

    let rows: Vec<(Vec<T>, f64)> = observations
        .par_iter()
        .map(|v| {
            let c = per_frequency(coeffs, v);
            let mut logits = vec![f64::NEG_INFINITY; bw];
            for (b, logit) in logits.iter_mut().enumerate() {
                if log_rho[b] == f64::NEG_INFINITY {
                    continue;
                }
                let l = offset + b as i64;
                let mut s = T::zero();
                for (k, ck) in c.iter().enumerate() {
                    let p = table.phase(k as u32, l);
                    s += ck.re * p.re - ck.im * p.im;
                }
                *logit = log_rho[b] + 2.0 * s.as_f64() * inv_var;
            }
            let lse = log_sum_exp(&logits);
            let w = logits.iter().map(|x| T::of((x - lse).exp())).collect();
            (w, lse - (a_norm + v.norm_sqr().as_f64()) * inv_var)
        })
        .collect();

    let mut values = Vec::with_capacity(observations.len() * bw);
    let mut log_evidence = Vec::with_capacity(observations.len());
    for (w, e) in rows {
        if !e.is_finite() {
            return Err(Error::Numerical("E-step row has no finite weight".into()));
        }
        values.extend(w);
        log_evidence.push(e);
    }
    Ok(Weights { rows: observations.len(), bandwidth: bw, window_offset: offset, values, log_evidence })
}

/// Sum of per-row vectors in fixed blocks, so the result does not depend on scheduling.
fn ordered_sum<T: Real, F>(rows: usize, len: usize, f: F) -> Vec<Complex<T>>
where
    F: Fn(usize, &mut [Complex<T>]) + Sync,
{
    let zero = Complex::new(T::zero(), T::zero());
    let blocks: Vec<Vec<Complex<T>>> = (0..rows.div_ceil(REDUCTION_CHUNK))
        .into_par_iter()
        .map(|blk| {
            let mut acc = vec![zero; len];
            for j in blk * REDUCTION_CHUNK..((blk + 1) * REDUCTION_CHUNK).min(rows) {
                f(j, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![zero; len];
    for b in blocks {
        for (t, x) in total.iter_mut().zip(b) {
            *t += x;
        }
    }
    total
}

/// M-step for the coefficients:
/// `a_m = sum_j sum_l w[j][l] exp(i k_m 2 pi l / L) v_{j,m} / (N + sigma^2 / Gamma_m)`.
pub fn m_step_coeffs<T: Real>(
    weights: &Weights<T>,
    observations: &[SteerableCoeffs<T>],
    sigma: T,
    config: &EmConfig<T>,
) -> Result<SteerableCoeffs<T>> {
    check_sigma(sigma)?;
    let first = observations.first().ok_or_else(|| Error::Config("EM needs at least one observation".into()))?;
    check_observations(observations, first)?;
    if weights.rows != observations.len() {
        return Err(Error::Dimension { expected: observations.len(), actual: weights.rows });
    }
    let m = first.len();
    let prior = config.signal_prior_for(first.index())?;
    let table = PhaseTable::<T>::new(config.grid_size);
    let kmax = first.index().max_angular() as usize;
    let ks = first.angular_index();
    let sums = ordered_sum(observations.len(), m, |j, acc| {
        let row = weights.row(j);
        let mut d = vec![Complex::new(T::zero(), T::zero()); kmax + 1];
        for (b, w) in row.iter().enumerate() {
            if *w == T::zero() {
                continue;
            }
            let l = weights.window_offset + b as i64;
            for (k, dk) in d.iter_mut().enumerate() {
                *dk += table.phase(k as u32, l) * *w;
            }
        }
        for ((a, v), &k) in acc.iter_mut().zip(observations[j].values()).zip(ks) {
            *a += d[k as usize] * *v;
        }
    });
    let n = T::of_usize(observations.len());
    let var = sigma * sigma;
    let values = sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let denom = match &prior {
                Some(g) => n + var / g[i],
                None => n,
            };
            s / denom
        })
        .collect();
    Ok(first.with_values(values))
}

/// M-step for the rotation PMF: `rho[l] = (W[l] + gamma rho_bar[l]) / (N + gamma)`
/// over the window; with `gamma = 0` this is `W / N`.
pub fn m_step_distribution<T: Real>(weights: &Weights<T>, config: &EmConfig<T>) -> Result<RotationDistribution<T>> {
    if weights.bandwidth != config.bandwidth {
        return Err(Error::WindowMismatch);
    }
    let mut totals = weights.column_sums();
    if config.gamma > T::zero() {
        let prior = config.prior_on_window()?.ok_or_else(|| {
            Error::Config("a positive gamma needs a rotation prior".into())
        })?;
        for (t, p) in totals.iter_mut().zip(prior.pmf()) {
            *t += config.gamma * *p;
        }
    }
    RotationDistribution::from_weights(config.grid_size, weights.window_offset, totals)
}

fn log_signal_prior<T: Real>(coeffs: &SteerableCoeffs<T>, config: &EmConfig<T>) -> Result<f64> {
    Ok(match config.signal_prior_for(coeffs.index())? {
        Some(g) => -coeffs.values().iter().zip(g.iter()).map(|(a, g)| a.norm_sqr().as_f64() / g.as_f64()).sum::<f64>(),
        None => 0.0,
    })
}

fn log_rotation_prior<T: Real>(rho: &RotationDistribution<T>, config: &EmConfig<T>) -> Result<f64> {
    if config.gamma == T::zero() {
        return Ok(0.0);
    }
    let prior = config.prior_on_window()?.ok_or_else(|| Error::Config("a positive gamma needs a rotation prior".into()))?;
    Ok(-config.gamma.as_f64() * kl_divergence(&prior, rho)?)
}

fn objective_from<T: Real>(
    weights: &Weights<T>,
    coeffs: &SteerableCoeffs<T>,
    rho: &RotationDistribution<T>,
    config: &EmConfig<T>,
) -> Result<f64> {
    let data: f64 = weights.log_evidence.iter().sum();
    Ok(data + log_signal_prior(coeffs, config)? + log_rotation_prior(&config.on_window(rho)?, config)?)
}

/// Marginal log-posterior of `(coeffs, distribution)`; see the module docs for the
/// dropped constants.
pub fn evaluate_objective<T: Real>(
    coeffs: &SteerableCoeffs<T>,
    distribution: &RotationDistribution<T>,
    observations: &[SteerableCoeffs<T>],
    sigma: T,
    config: &EmConfig<T>,
) -> Result<f64> {
    let w = e_step(coeffs, distribution, observations, sigma, config)?;
    objective_from(&w, coeffs, distribution, config)
}

/// `min_l ||next - R_l prev||^2` over all `L` grid rotations.
pub fn rotation_invariant_change<T: Real>(next: &SteerableCoeffs<T>, prev: &SteerableCoeffs<T>, grid_size: usize) -> f64 {
    let table = PhaseTable::<T>::new(grid_size);
    let l = prev.relative_offset(next, &table);
    next.distance_sqr(&prev.rotated_grid(l as i64, &table)).as_f64()
}

/// Iterates E and M steps from `init` until the rotation-invariant coefficient
/// change drops below `tol` or `T` iterations have run.
pub fn run_em<T: Real>(
    observations: &[SteerableCoeffs<T>],
    sigma: T,
    config: &EmConfig<T>,
    init: EmInit<T>,
) -> Result<EmReport<T>> {
    config.validate()?;
    check_sigma(sigma)?;
    check_observations(observations, &init.coeffs)?;
    let start = Instant::now();
    let mut state = EmState::new(init.coeffs, config.on_window(&init.distribution)?);
    let mut changes = Vec::new();
    let mut elapsed = Vec::new();
    let mut converged = false;

    let mut weights = e_step(&state.coeffs, &state.distribution, observations, sigma, config)?;
    state.objective_trace.push(objective_from(&weights, &state.coeffs, &state.distribution, config)?);
    while state.iteration < config.max_iters {
        let coeffs = m_step_coeffs(&weights, observations, sigma, config)?;
        let distribution = m_step_distribution(&weights, config)?;
        let change = rotation_invariant_change(&coeffs, &state.coeffs, config.grid_size);
        state.coeffs = coeffs;
        state.distribution = distribution;
        state.iteration += 1;
        weights = e_step(&state.coeffs, &state.distribution, observations, sigma, config)?;
        state.objective_trace.push(objective_from(&weights, &state.coeffs, &state.distribution, config)?);
        changes.push(change);
        elapsed.push(start.elapsed().as_secs_f64());
        if change < config.tol.as_f64() {
            converged = true;
            break;
        }
    }
    state.weights = Some(weights);
    state.wall_time = start.elapsed();

    Ok(EmReport {
        coeffs: state.coeffs,
        distribution: state.distribution,
        iterations: state.iteration,
        converged,
        objective_trace: state.objective_trace,
        coeff_changes: changes,
        elapsed,
        wall_time: state.wall_time,
        sync_time: None,
        sync: None,
    })
}

/// Standard-EM start: the mean of the raw observations plus a seeded complex
/// Gaussian perturbation of norm `0.1 ||mean||`, and a uniform PMF on the window.
/// `k = 0` entries are perturbed in their real part only.
pub fn standard_init<T: Real>(observations: &[SteerableCoeffs<T>], config: &EmConfig<T>, seed: u64) -> Result<EmInit<T>> {
    let mean = synchronization::mean_coeffs(observations)?;
    let mut rng = stream_rng(seed, 0);
    let dir: Vec<Complex<f64>> = mean
        .angular_index()
        .iter()
        .map(|&k| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex::new(re, if k == 0 { 0.0 } else { im })
        })
        .collect();
    let dir_norm = dir.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut target = 0.1 * mean.norm_sqr().as_f64().sqrt();
    if target == 0.0 {
        let energy: f64 = observations.iter().map(|o| o.norm_sqr().as_f64()).sum::<f64>() / observations.len() as f64;
        target = 0.1 * energy.sqrt();
    }
    let scale = if dir_norm > 0.0 { target / dir_norm } else { 0.0 };
    let values = mean
        .values()
        .iter()
        .zip(&dir)
        .map(|(a, d)| *a + Complex::new(T::of(d.re * scale), T::of(d.im * scale)))
        .collect();
    Ok(EmInit {
        coeffs: mean.with_values(values),
        distribution: RotationDistribution::uniform_window(config.grid_size, config.bandwidth),
    })
}

/// Synch-EM: Synchronize-and-Match on the first `partition` observations, align
/// every observation, start from the aligned mean with `rho_0 = rho_bar`, then
/// run EM on the centered `BW` window with the `gamma`-weighted prior update.
///
/// `learned_prior` is the distribution of the synchronization error
/// `theta_hat - theta` (as produced by prior learning). An aligned observation is
/// the truth rotated by the negated error, so the EM window uses its reflection;
/// this reflected, window-restricted PMF replaces `config.rotation_prior`.
/// Reported wall time includes synchronization.
pub fn run_synch_em<T: Real>(
    observations: &[SteerableCoeffs<T>],
    sigma: T,
    config: &EmConfig<T>,
    learned_prior: &RotationDistribution<T>,
    partition: usize,
    seed: u64,
) -> Result<EmReport<T>> {
    if learned_prior.grid_size() != config.grid_size {
        return Err(Error::WindowMismatch);
    }
    let start = Instant::now();
    let sync = synchronization::synchronize_and_match(
        observations,
        partition,
        config.grid_size,
        PpmOptions::default(),
        seed,
    )?;
    let aligned = synchronization::align(observations, &sync)?;
    let a0 = synchronization::mean_coeffs(&aligned)?;
    let sync_time = start.elapsed();

    let rho_bar = learned_prior.reflected();
    let mut em_config = config.clone();
    em_config.rotation_prior = Some(rho_bar.clone());
    let rho0 = em_config.on_window(&rho_bar)?;
    let mut report = run_em(&aligned, sigma, &em_config, EmInit { coeffs: a0, distribution: rho0 })?;
    report.elapsed.iter_mut().for_each(|e| *e += sync_time.as_secs_f64());
    report.wall_time += sync_time;
    report.sync_time = Some(sync_time);
    report.sync = Some(sync);
    Ok(report)
}
