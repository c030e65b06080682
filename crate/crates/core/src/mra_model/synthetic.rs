use rand::Rng;

use crate::rng::stream_rng;
use crate::steerable_basis::{pixel_polar, FourierBesselBasis, Image, SteerableCoeffs};
use crate::{Real, Result};

/// Seeded sum of Gaussian blobs confined to the image disk; a stand-in for
/// particle projection images.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticImageSpec {
    pub blobs: usize,
    /// Blob standard deviation range, as a fraction of the disk radius.
    pub width_range: (f64, f64),
    pub amplitude_range: (f64, f64),
    /// Blob centers are drawn within this fraction of the disk radius.
    pub center_radius: f64,
    /// Frobenius norm of the final image. `None` uses the grid size, i.e. a unit
    /// root-mean-square pixel, so that SNR = 1 / sigma^2.
    pub target_norm: Option<f64>,
    pub seed: u64,
}

impl Default for SyntheticImageSpec {
    fn default() -> Self {
        Self {
            blobs: 12,
            width_range: (0.05, 0.10),
            amplitude_range: (0.4, 1.0),
            center_radius: 0.8,
            target_norm: None,
            seed: 0,
        }
    }
}

impl SyntheticImageSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn norm_for(&self, grid_size: usize) -> f64 {
        self.target_norm.unwrap_or(grid_size as f64)
    }
}

/// Renders `spec` on a `grid_size` square; pixels outside radius `(grid_size - 1) / 2`
/// are exactly zero.
pub fn make_synthetic_image<T: Real>(spec: &SyntheticImageSpec, grid_size: usize) -> Image<T> {
    let radius = (grid_size as f64 - 1.0) / 2.0;
    let mut rng = stream_rng(spec.seed, 0);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..spec.blobs)
        .map(|_| {
            let rho = spec.center_radius * radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let width = radius * rng.random_range(spec.width_range.0..=spec.width_range.1);
            let amp = rng.random_range(spec.amplitude_range.0..=spec.amplitude_range.1);
            (rho * phi.cos(), rho * phi.sin(), width, amp)
        })
        .collect();

    let mut pixels = vec![0.0f64; grid_size * grid_size];
    for row in 0..grid_size {
        for col in 0..grid_size {
            let (r, theta) = pixel_polar(grid_size, row, col);
            if r > radius + 1e-9 {
                continue;
            }
            let (x, y) = (r * theta.cos(), r * theta.sin());
            pixels[row * grid_size + col] = blobs
                .iter()
                .map(|&(cx, cy, w, a)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp())
                .sum();
        }
    }
    let norm = pixels.iter().map(|p| p * p).sum::<f64>().sqrt();
    let scale = if norm > 0.0 { spec.norm_for(grid_size) / norm } else { 0.0 };
    let pixels = pixels.into_iter().map(|p| T::of(p * scale)).collect();
    Image::from_pixels(grid_size, pixels).expect("square image")
}

/// Ground-truth coefficients for a synthetic image: the image is projected onto
/// `basis` and rescaled so the in-span image has `spec.target_norm`. Returns the
/// coefficients and that in-span image.
pub fn synthetic_truth<T: Real>(
    basis: &FourierBesselBasis,
    spec: &SyntheticImageSpec,
) -> Result<(SteerableCoeffs<T>, Image<T>)> {
    let image: Image<f64> = make_synthetic_image(spec, basis.grid_size());
    let coeffs = basis.expand(&image)?;
    let norm = coeffs.full_norm_sqr().sqrt();
    let coeffs = if norm > 0.0 { coeffs.scaled(spec.norm_for(basis.grid_size()) / norm) } else { coeffs };
    let in_span = basis.reconstruct(&coeffs)?;
    Ok((coeffs.cast(), Image::from_pixels(in_span.size(), in_span.pixels().iter().map(|p| T::of(*p)).collect())?))
}
