//! Synthetic multi-reference alignment data, SNR and rotation-invariant errors.
//!
//! 2-D observations live in coefficient space, `v_i = a o exp(-i k theta_i) + e_i`,
//! with `theta_i` on the grid `2 pi l / L` and complex Gaussian noise of total
//! variance `sigma^2` per entry (`sigma^2 / 2` in each of re and im).
//! 1-D observations are `y_i = shift(x, s_i) + e_i` with real `N(0, sigma^2)` noise.

mod io;
mod synthetic;

use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::rng::stream_rng;
use crate::rotation::{PhaseTable, RotationDistribution};
use crate::steerable_basis::{Image, SteerableCoeffs};
use crate::{Error, Real, Result};

pub use io::{
    read_dataset_1d, read_dataset_2d, write_dataset_1d, write_dataset_1d_csv, write_dataset_2d,
    write_dataset_2d_csv, MAGIC_1D, MAGIC_2D,
};
pub use synthetic::{make_synthetic_image, synthetic_truth, SyntheticImageSpec};

/// Number of rotations the full-scale experiments draw from.
pub const DEFAULT_GRID_SIZE: usize = 360;

/// Stream reserved for drawing the 1-D ground truth.
const TRUTH_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset2D<T> {
    pub observations: Vec<SteerableCoeffs<T>>,
    pub truth: SteerableCoeffs<T>,
    /// Grid index `l` of each observation's rotation `2 pi l / L`.
    pub rotations: Vec<usize>,
    pub noise_sigma: T,
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset1D<T> {
    pub signals: Vec<Vec<T>>,
    pub truth: Vec<T>,
    pub shifts: Vec<usize>,
    pub noise_sigma: T,
}

impl<T: Real> Dataset1D<T> {
    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn signal_len(&self) -> usize {
        self.truth.len()
    }
}

impl<T: Real> Dataset2D<T> {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Noise realization of observation `i` (observation minus rotated truth).
    pub fn noise(&self, i: usize) -> SteerableCoeffs<T> {
        let table = PhaseTable::new(self.grid_size);
        let clean = self.truth.rotated_grid(self.rotations[i] as i64, &table);
        let values =
            self.observations[i].values().iter().zip(clean.values()).map(|(v, c)| *v - *c).collect();
        clean.with_values(values)
    }
}

fn normal<T: Real, R: rand::Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::of(z)
}

/// Draws `n` rotated noisy copies of `truth`. Observation `i` uses random stream `i`
/// of `seed`, so the result is independent of thread count.
pub fn generate_2d<T: Real>(
    truth: &SteerableCoeffs<T>,
    n: usize,
    sigma: T,
    grid_size: usize,
    rotations: &RotationDistribution<T>,
    seed: u64,
) -> Result<Dataset2D<T>> {
    if n == 0 {
        return Err(Error::Config("need at least one observation".into()));
    }
    if !(sigma >= T::zero()) {
        return Err(Error::Config(format!("noise level {sigma} is negative")));
    }
    if rotations.grid_size() != grid_size {
        return Err(Error::Distribution(format!(
            "distribution is on a grid of {}, data on {grid_size}",
            rotations.grid_size()
        )));
    }
    RotationDistribution::new(grid_size, rotations.window_offset(), rotations.pmf().to_vec())?;
    let table = PhaseTable::new(grid_size);
    let component_sigma = sigma / T::of(2.0).sqrt();
    let draws: Vec<(usize, SteerableCoeffs<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let l = rotations.sample(&mut rng);
            let mut v = truth.rotated_grid(l as i64, &table);
            for z in v.values_mut() {
                let re = normal::<T, _>(&mut rng) * component_sigma;
                let im = normal::<T, _>(&mut rng) * component_sigma;
                *z += Complex::new(re, im);
            }
            (l, v)
        })
        .collect();
    let (rotations, observations) = draws.into_iter().unzip();
    Ok(Dataset2D { observations, truth: truth.clone(), rotations, noise_sigma: sigma, grid_size })
}

/// `out[n] = x[(n - s) mod L]`.
pub fn circular_shift<T: Copy>(x: &[T], shift: i64) -> Vec<T> {
    let len = x.len() as i64;
    (0..len).map(|n| x[(n - shift).rem_euclid(len) as usize]).collect()
}

/// `x ~ N(0, I_L)`, uniform shifts, `y_i = shift(x, s_i) + N(0, sigma^2 I)`.
pub fn generate_1d<T: Real>(length: usize, n: usize, sigma: T, seed: u64) -> Result<Dataset1D<T>> {
    if length < 2 {
        return Err(Error::Config(format!("signal length {length} is below 2")));
    }
    let mut rng = stream_rng(seed, TRUTH_STREAM);
    let truth: Vec<T> = (0..length).map(|_| normal::<T, _>(&mut rng)).collect();
    generate_1d_from(&truth, n, sigma, seed)
}

/// As [`generate_1d`] with a given ground truth.
pub fn generate_1d_from<T: Real>(truth: &[T], n: usize, sigma: T, seed: u64) -> Result<Dataset1D<T>> {
    let length = truth.len();
    if length < 2 {
        return Err(Error::Config(format!("signal length {length} is below 2")));
    }
    if !(sigma >= T::zero()) {
        return Err(Error::Config(format!("noise level {sigma} is negative")));
    }
    let draws: Vec<(usize, Vec<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            use rand::Rng as _;
            let mut rng = stream_rng(seed, i as u64);
            let s = rng.random_range(0..length);
            let mut y = circular_shift(truth, s as i64);
            for v in &mut y {
                *v += sigma * normal::<T, _>(&mut rng);
            }
            (s, y)
        })
        .collect();
    let (shifts, signals) = draws.into_iter().unzip();
    Ok(Dataset1D { signals, truth: truth.to_vec(), shifts, noise_sigma: sigma })
}

/// `||I||_F^2 / (L_px^2 sigma^2)`; infinite for `sigma = 0`.
pub fn snr<T: Real>(image: &Image<T>, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return f64::INFINITY;
    }
    let n = image.size() as f64;
    image.frobenius_norm_sqr().as_f64() / (n * n * sigma * sigma)
}

/// Noise level giving `image` the requested SNR.
pub fn sigma_for_snr<T: Real>(image: &Image<T>, snr: f64) -> f64 {
    let n = image.size() as f64;
    (image.frobenius_norm_sqr().as_f64() / (n * n * snr)).sqrt()
}

/// Grid rotation `l` minimizing `||rotate(estimate, 2 pi l / L) - truth||`, and that
/// minimum relative to `||truth||` (full real-image norms).
pub fn best_rotation_2d<T: Real>(
    estimate: &SteerableCoeffs<T>,
    truth: &SteerableCoeffs<T>,
    grid_size: usize,
) -> Result<(usize, T)> {
    if !estimate.same_index(truth) {
        return Err(Error::IndexMismatch);
    }
    let norm = truth.full_norm_sqr();
    if norm <= T::zero() {
        return Err(Error::Config("relative error against a zero truth".into()));
    }
    let table = PhaseTable::new(grid_size);
    let mut best = (0, T::infinity());
    for l in 0..grid_size {
        let d = estimate.rotated_grid(l as i64, &table).full_distance_sqr(truth);
        if d < best.1 {
            best = (l, d);
        }
    }
    Ok((best.0, (best.1 / norm).sqrt()))
}

pub fn relative_error_2d<T: Real>(
    estimate: &SteerableCoeffs<T>,
    truth: &SteerableCoeffs<T>,
    grid_size: usize,
) -> Result<T> {
    best_rotation_2d(estimate, truth, grid_size).map(|(_, e)| e)
}

/// `min_s ||shift(estimate, s) - truth|| / ||truth||`.
pub fn relative_error_1d<T: Real>(estimate: &[T], truth: &[T]) -> Result<T> {
    if estimate.len() != truth.len() {
        return Err(Error::Dimension { expected: truth.len(), actual: estimate.len() });
    }
    let norm: T = truth.iter().map(|t| *t * *t).sum();
    if norm <= T::zero() {
        return Err(Error::Config("relative error against a zero truth".into()));
    }
    let len = truth.len();
    let best = (0..len)
        .map(|s| {
            (0..len)
                .map(|n| {
                    let d = estimate[(n + len - s) % len] - truth[n];
                    d * d
                })
                .sum::<T>()
        })
        .fold(T::infinity(), T::min);
    Ok((best / norm).sqrt())
}

#[cfg(test)]
mod tests;
