//! Fourier-Bessel expansion of images on a disk, rotation in coefficient space,
//! and steerable PCA compression.

mod basis;
pub mod bessel;
mod cache;
mod coeffs;
mod image;
mod spca;

pub use basis::{build_basis, expand, pixel_polar, reconstruct, BandLimit, FourierBesselBasis};
pub use cache::{read_basis, write_basis, BASIS_MAGIC};
pub use coeffs::{rotate_coeffs, CoeffIndex, SteerableCoeffs};
pub use image::Image;
pub use spca::{spca_expand, spca_train, SpcaBasis};
