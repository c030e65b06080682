//! Monte-Carlo learning of the rotation-error distribution left by a
//! synchronization method, the KL prior built on it, and window selection.
//!
//! The error of observation `i` is `theta_hat_i - theta_i - theta_c`, where the
//! global offset `theta_c` is the grid rotation that best maps the aligned
//! average back onto the truth. Errors are histogrammed on centered signed bins
//! `-floor(L/2) .. ceil(L/2) - 1` and averaged over repetitions.

mod io;

use rayon::prelude::*;

use crate::mra_model::{best_rotation_2d, generate_2d, synthetic_truth, SyntheticImageSpec};
use crate::rng::derive_seed;
use crate::rotation::{centered, centered_window_offset, RotationDistribution};
use crate::steerable_basis::{FourierBesselBasis, SteerableCoeffs};
use crate::synchronization::{align_and_average, synchronize, SyncMethod};
use crate::{Error, Real, Result};

pub use io::{read_prior_csv, write_prior_csv};

/// Lower clamp applied to `q` in [`kl_divergence`].
pub const KL_FLOOR: f64 = 1e-12;

/// Draws the ground truth of each repetition.
pub trait TruthSource<T>: Sync {
    fn draw(&self, repetition: usize) -> Result<SteerableCoeffs<T>>;
    /// Recorded with the learned prior so a prior is never reused for a different image model.
    fn tag(&self) -> String;
}

/// Seeded synthetic blob images projected onto a basis; repetition `r` uses
/// seed `derive_seed(spec.seed, r)`.
pub struct SyntheticSource<'a> {
    pub basis: &'a FourierBesselBasis,
    pub spec: SyntheticImageSpec,
}

impl<T: Real> TruthSource<T> for SyntheticSource<'_> {
    fn draw(&self, repetition: usize) -> Result<SteerableCoeffs<T>> {
        let spec = SyntheticImageSpec { seed: derive_seed(self.spec.seed, repetition as u64), ..self.spec.clone() };
        synthetic_truth(self.basis, &spec).map(|(c, _)| c)
    }

    fn tag(&self) -> String {
        let s = &self.spec;
        format!(
            "synthetic(grid={},c={},M={},blobs={},width={}..{},amplitude={}..{},center={},norm={},seed={})",
            self.basis.grid_size(),
            self.basis.disk_radius(),
            self.basis.len(),
            s.blobs,
            s.width_range.0,
            s.width_range.1,
            s.amplitude_range.0,
            s.amplitude_range.1,
            s.center_radius,
            s.norm_for(self.basis.grid_size()),
            s.seed
        )
    }
}

/// The same truth in every repetition.
pub struct FixedTruth<T>(pub SteerableCoeffs<T>);

impl<T: Real> TruthSource<T> for FixedTruth<T> {
    fn draw(&self, _repetition: usize) -> Result<SteerableCoeffs<T>> {
        Ok(self.0.clone())
    }

    fn tag(&self) -> String {
        format!("fixed(M={})", self.0.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningConfig {
    pub sigma: f64,
    /// Observations per repetition.
    pub n: usize,
    pub grid_size: usize,
    pub method: SyncMethod,
    pub repetitions: usize,
    pub seed: u64,
}

/// Learned distribution of `theta_hat - theta - theta_c` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedPrior<T> {
    /// Full-grid PMF on the centered window.
    pub pmf: RotationDistribution<T>,
    pub sigma: f64,
    pub n_per_trial: usize,
    pub repetitions: usize,
    pub method: String,
    pub source: String,
    pub seed: u64,
}

impl<T: Real> LearnedPrior<T> {
    pub fn grid_size(&self) -> usize {
        self.pmf.grid_size()
    }
}

/// Centered error histogram of one synchronized dataset, normalized to a PMF.
pub fn error_histogram<T: Real>(
    estimates: &[usize],
    truth_rotations: &[usize],
    global_offset: usize,
    grid_size: usize,
) -> Vec<f64> {
    let offset = centered_window_offset(grid_size);
    let mut hist = vec![0.0; grid_size];
    for (&est, &t) in estimates.iter().zip(truth_rotations) {
        let d = centered(est as i64 - t as i64 - global_offset as i64, grid_size);
        hist[(d - offset) as usize] += 1.0;
    }
    let n = estimates.len().max(1) as f64;
    hist.iter_mut().for_each(|h| *h /= n);
    hist
}

/// Algorithm: per repetition draw a truth, generate `n` uniformly rotated noisy
/// observations, synchronize, find `theta_c` by a full grid scan, histogram the
/// centered errors; then average the histograms in repetition order.
pub fn learn_distribution<T: Real, S: TruthSource<T>>(source: &S, config: &LearningConfig) -> Result<LearnedPrior<T>> {
    if config.repetitions == 0 {
        return Err(Error::Config("prior learning needs at least one repetition".into()));
    }
    let l = config.grid_size;
    let uniform = RotationDistribution::<T>::uniform(l);
    let hists: Vec<Vec<f64>> = (0..config.repetitions)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let truth = source.draw(r)?;
            let rep_seed = derive_seed(config.seed, r as u64);
            let data = generate_2d(&truth, config.n, T::of(config.sigma), l, &uniform, rep_seed)?;
            let sync = synchronize(&data.observations, config.method, l, derive_seed(rep_seed, 1))?;
            let avg = align_and_average(&data.observations, &sync)?;
            let (theta_c, _) = best_rotation_2d(&avg, &truth, l)?;
            Ok(error_histogram::<T>(&sync.rotation_indices, &data.rotations, theta_c, l))
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0; l];
    for h in &hists {
        for (a, v) in acc.iter_mut().zip(h) {
            *a += v;
        }
    }
    let weights = acc.into_iter().map(|a| T::of(a / config.repetitions as f64)).collect();
    Ok(LearnedPrior {
        pmf: RotationDistribution::from_weights(l, centered_window_offset(l), weights)?,
        sigma: config.sigma,
        n_per_trial: config.n,
        repetitions: config.repetitions,
        method: config.method.to_string(),
        source: source.tag(),
        seed: config.seed,
    })
}

/// `sum_l p[l] log(p[l] / max(q[l], 1e-12))` with `0 log 0 = 0`.
pub fn kl_divergence<T: Real>(p: &RotationDistribution<T>, q: &RotationDistribution<T>) -> Result<f64> {
    if !p.same_window(q) {
        return Err(Error::WindowMismatch);
    }
    Ok(p.pmf()
        .iter()
        .zip(q.pmf())
        .filter(|(a, _)| **a > T::zero())
        .map(|(a, b)| {
            let a = a.as_f64();
            a * (a / b.as_f64().max(KL_FLOOR)).ln()
        })
        .sum())
}

/// `-gamma KL(rho_bar, rho)`, i.e. the log prior of `rho` up to the additive
/// constant `gamma H(rho_bar)`. The prior is first restricted to `rho`'s window.
pub fn log_prior<T: Real>(rho: &RotationDistribution<T>, prior: &LearnedPrior<T>, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let p = if prior.pmf.same_window(rho) { prior.pmf.clone() } else { prior.pmf.restricted(rho.window_offset(), rho.len())? };
    Ok(-gamma * kl_divergence(&p, rho)?)
}

/// Smallest even `BW` whose centered window holds at least `mass_threshold` of
/// the prior's mass (capped at `L`).
pub fn select_bandwidth<T: Real>(prior: &LearnedPrior<T>, mass_threshold: f64) -> Result<usize> {
    if !(mass_threshold > 0.0 && mass_threshold < 1.0) {
        return Err(Error::Config(format!("mass threshold {mass_threshold} outside (0, 1)")));
    }
    let l = prior.grid_size();
    let mut bw = 2;
    while bw < l {
        if prior.pmf.centered_mass(bw).as_f64() >= mass_threshold - 1e-12 {
            return Ok(bw);
        }
        bw += 2;
    }
    Ok(l)
}

#[cfg(test)]
mod tests;
