use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use super::bessel::{bessel_j_orders, BesselZeros};
use super::coeffs::{CoeffIndex, SteerableCoeffs};
use super::image::Image;
use crate::{Error, Real, Result};

type C64 = Complex<f64>;

/// Which `(k, q)` pairs enter the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandLimit {
    /// `R_{k,q} <= pi c`, the sampling limit of a unit-spaced pixel grid.
    Sampling,
    /// `R_{k,q} <= pi c * fraction`.
    Fraction(f64),
    /// `R_{k,q} <= limit`.
    MaxRoot(f64),
}

impl BandLimit {
    fn root_limit(self, disk_radius: f64) -> f64 {
        match self {
            BandLimit::Sampling => std::f64::consts::PI * disk_radius,
            BandLimit::Fraction(f) => std::f64::consts::PI * disk_radius * f,
            BandLimit::MaxRoot(x) => x,
        }
    }
}

/// Fourier-Bessel functions `N_{k,q} J_k(R_{k,q} r / c) e^{i k theta}` sampled at the
/// pixel centers inside the disk of radius `c`, then orthonormalized on the pixel grid.
///
/// Orthonormalization is the symmetric (Loewdin) map `A (A^H A)^{-1/2}` over the
/// full `k` and `-k` column set. It commutes with quarter-turn rotations and with
/// conjugation, so quarter-turn steerability and real-image symmetry are exact,
/// and white pixel noise stays white in coefficient space.
#[derive(Debug, Clone)]
pub struct FourierBesselBasis {
    grid_size: usize,
    disk_radius: f64,
    index: Arc<CoeffIndex>,
    bessel_roots: Vec<f64>,
    normalizers: Vec<f64>,
    pixels: Vec<usize>,
    sample_matrix: DMatrix<C64>,
    pseudo_inverse: DMatrix<C64>,
}

/// Polar coordinates of pixel `(row, col)` about the grid center, y axis pointing up.
pub fn pixel_polar(grid_size: usize, row: usize, col: usize) -> (f64, f64) {
    let center = (grid_size as f64 - 1.0) / 2.0;
    let x = col as f64 - center;
    let y = center - row as f64;
    (x.hypot(y), y.atan2(x))
}

fn disk_pixels(grid_size: usize, disk_radius: f64) -> Vec<usize> {
    let mut pixels = Vec::new();
    for row in 0..grid_size {
        for col in 0..grid_size {
            let (r, _) = pixel_polar(grid_size, row, col);
            if r <= disk_radius + 1e-9 {
                pixels.push(row * grid_size + col);
            }
        }
    }
    pixels
}

/// Raw (continuously normalized) samples; rows are `pixels`, columns the `k >= 0` labels.
fn raw_samples(
    grid_size: usize,
    disk_radius: f64,
    pixels: &[usize],
    index: &CoeffIndex,
    roots: &[f64],
    normalizers: &[f64],
) -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(pixels.len(), index.len());
    for (row, &p) in pixels.iter().enumerate() {
        let (r, theta) = pixel_polar(grid_size, p / grid_size, p % grid_size);
        for j in 0..index.len() {
            let k = index.angular()[j] as usize;
            let radial = bessel_j_orders(k, roots[j] * r / disk_radius)[k] * normalizers[j];
            a[(row, j)] = C64::from_polar(radial, k as f64 * theta);
        }
    }
    a
}

impl FourierBesselBasis {
    pub fn build(grid_size: usize, disk_radius: f64, band_limit: BandLimit) -> Result<Self> {
        if grid_size < 3 {
            return Err(Error::Config(format!("grid size {grid_size} is below 3")));
        }
        let max_radius = (grid_size as f64 - 1.0) / 2.0;
        if !(disk_radius > 0.0 && disk_radius <= max_radius + 1e-12) {
            return Err(Error::Config(format!(
                "disk radius {disk_radius} outside (0, {max_radius}]"
            )));
        }
        let limit = band_limit.root_limit(disk_radius);

        let mut zeros = BesselZeros::new();
        let (mut ks, mut qs, mut roots, mut normalizers) = (vec![], vec![], vec![], vec![]);
        for k in 0.. {
            let row = zeros.zeros_below(k, limit)?;
            if row.is_empty() {
                break;
            }
            for (qi, root) in row.into_iter().enumerate() {
                let jk1 = bessel_j_orders(k + 1, root)[k + 1];
                ks.push(k as u32);
                qs.push(qi as u32 + 1);
                roots.push(root);
                normalizers.push(1.0 / (disk_radius * std::f64::consts::PI.sqrt() * jk1.abs()));
            }
        }
        if ks.is_empty() {
            return Err(Error::Config(format!("band limit {limit} admits no basis functions")));
        }
        let index = Arc::new(CoeffIndex::new(ks, qs)?);
        let pixels = disk_pixels(grid_size, disk_radius);
        let raw = raw_samples(grid_size, disk_radius, &pixels, &index, &roots, &normalizers);
        let sample_matrix = orthonormalize(&raw, &index)?;
        let pseudo_inverse = sample_matrix.adjoint();
        Ok(Self {
            grid_size,
            disk_radius,
            index,
            bessel_roots: roots,
            normalizers,
            pixels,
            sample_matrix,
            pseudo_inverse,
        })
    }

    /// Reassembles a basis from stored parts (the cache file).
    pub(crate) fn from_parts(
        grid_size: usize,
        disk_radius: f64,
        index: CoeffIndex,
        bessel_roots: Vec<f64>,
        normalizers: Vec<f64>,
        pixels: Vec<usize>,
        sample_matrix: DMatrix<C64>,
    ) -> Result<Self> {
        let m = index.len();
        if bessel_roots.len() != m || normalizers.len() != m || sample_matrix.ncols() != m {
            return Err(Error::Format("basis column count mismatch".into()));
        }
        if sample_matrix.nrows() != pixels.len() {
            return Err(Error::Format("basis row count mismatch".into()));
        }
        if pixels.iter().any(|&p| p >= grid_size * grid_size) {
            return Err(Error::Format("pixel index outside grid".into()));
        }
        let pseudo_inverse = sample_matrix.adjoint();
        Ok(Self {
            grid_size,
            disk_radius,
            index: Arc::new(index),
            bessel_roots,
            normalizers,
            pixels,
            sample_matrix,
            pseudo_inverse,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn disk_radius(&self) -> f64 {
        self.disk_radius
    }

    pub fn index(&self) -> &Arc<CoeffIndex> {
        &self.index
    }

    /// Number of stored (`k >= 0`) columns.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn angular_index(&self) -> &[u32] {
        self.index.angular()
    }

    pub fn radial_index(&self) -> &[u32] {
        self.index.radial()
    }

    pub fn bessel_roots(&self) -> &[f64] {
        &self.bessel_roots
    }

    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }

    /// Linear indices of the in-disk pixels, in row order of the sample matrix.
    pub fn pixels(&self) -> &[usize] {
        &self.pixels
    }

    pub fn sample_matrix(&self) -> &DMatrix<C64> {
        &self.sample_matrix
    }

    pub fn pseudo_inverse(&self) -> &DMatrix<C64> {
        &self.pseudo_inverse
    }

    /// Samples before orthonormalization (continuous normalization only).
    pub fn raw_samples(&self) -> DMatrix<C64> {
        raw_samples(
            self.grid_size,
            self.disk_radius,
            &self.pixels,
            &self.index,
            &self.bessel_roots,
            &self.normalizers,
        )
    }

    /// Full column set `[k >= 0 | conj(k > 0)]`.
    pub fn full_sample_matrix(&self) -> DMatrix<C64> {
        full_columns(&self.sample_matrix, &self.index)
    }

    /// Least-squares coefficients of `image` (the `k >= 0` half).
    pub fn expand<T: Real>(&self, image: &Image<T>) -> Result<SteerableCoeffs<T>> {
        if image.size() != self.grid_size {
            return Err(Error::Dimension { expected: self.grid_size, actual: image.size() });
        }
        let data = DVector::<C64>::from_iterator(
            self.pixels.len(),
            self.pixels.iter().map(|&p| C64::new(image.pixels()[p].as_f64(), 0.0)),
        );
        let alpha = &self.pseudo_inverse * data;
        let values = alpha.iter().map(|z| Complex::new(T::of(z.re), T::of(z.im))).collect();
        SteerableCoeffs::new(values, Arc::clone(&self.index))
    }

    /// Real image `sum_{k=0} a psi + 2 Re sum_{k>0} a psi`; zero outside the disk.
    pub fn reconstruct<T: Real>(&self, coeffs: &SteerableCoeffs<T>) -> Result<Image<T>> {
        let columns: Vec<usize> = if Arc::ptr_eq(coeffs.index(), &self.index)
            || **coeffs.index() == *self.index
        {
            (0..self.len()).collect()
        } else {
            coeffs
                .angular_index()
                .iter()
                .zip(coeffs.radial_index())
                .map(|(&k, &q)| self.index.position(k, q).ok_or(Error::UnknownColumn { k, q }))
                .collect::<Result<_>>()?
        };
        let mut image = Image::zeros(self.grid_size);
        for (row, &p) in self.pixels.iter().enumerate() {
            let mut acc = 0.0;
            for (v, (&col, &k)) in coeffs.values().iter().zip(columns.iter().zip(coeffs.angular_index())) {
                let z = C64::new(v.re.as_f64(), v.im.as_f64()) * self.sample_matrix[(row, col)];
                acc += if k == 0 { z.re } else { 2.0 * z.re };
            }
            image.pixels_mut()[p] = T::of(acc);
        }
        Ok(image)
    }
}

fn full_columns(half: &DMatrix<C64>, index: &CoeffIndex) -> DMatrix<C64> {
    let positive: Vec<usize> = (0..index.len()).filter(|&j| index.angular()[j] > 0).collect();
    let mut full = DMatrix::<C64>::zeros(half.nrows(), half.ncols() + positive.len());
    full.columns_mut(0, half.ncols()).copy_from(half);
    for (n, &j) in positive.iter().enumerate() {
        let col = half.column(j).map(|z| z.conj());
        full.set_column(half.ncols() + n, &col);
    }
    full
}

fn orthonormalize(raw: &DMatrix<C64>, index: &CoeffIndex) -> Result<DMatrix<C64>> {
    let full = full_columns(raw, index);
    let gram = full.adjoint() * &full;
    let eig = SymmetricEigen::new(gram);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 1e-10 * max) {
        return Err(Error::Numerical(format!(
            "sampled basis is rank deficient (Gram eigenvalues in [{min:e}, {max:e}])"
        )));
    }
    let inv_sqrt = eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0));
    let v = &eig.eigenvectors;
    let transform = v * DMatrix::from_diagonal(&inv_sqrt) * v.adjoint();
    let ortho = full * transform;
    Ok(ortho.columns(0, raw.ncols()).into_owned())
}

/// See [`FourierBesselBasis::build`].
pub fn build_basis(grid_size: usize, disk_radius: f64, band_limit: BandLimit) -> Result<FourierBesselBasis> {
    FourierBesselBasis::build(grid_size, disk_radius, band_limit)
}

pub fn expand<T: Real>(image: &Image<T>, basis: &FourierBesselBasis) -> Result<SteerableCoeffs<T>> {
    basis.expand(image)
}

pub fn reconstruct<T: Real>(coeffs: &SteerableCoeffs<T>, basis: &FourierBesselBasis) -> Result<Image<T>> {
    basis.reconstruct(coeffs)
}
