use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use super::coeffs::{CoeffIndex, SteerableCoeffs};
use crate::{Error, Real, Result};

type C64 = Complex<f64>;

#[derive(Debug, Clone)]
struct SpcaBlock {
    angular: u32,
    /// Positions of this block's entries in the source coefficient vector.
    source: Vec<usize>,
    /// Retained principal components as columns (orthonormal).
    components: DMatrix<C64>,
    eigenvalues: Vec<f64>,
}

/// Steerable PCA: an independent PCA for every angular frequency block.
///
/// Each block is projected onto its own principal subspace, so rotation (a
/// per-block scalar phase) commutes with the projection.
#[derive(Debug, Clone)]
pub struct SpcaBasis {
    source_index: Arc<CoeffIndex>,
    output_index: Arc<CoeffIndex>,
    blocks: Vec<SpcaBlock>,
    mean: Vec<C64>,
    noise_variance: f64,
}

impl SpcaBasis {
    /// Trains on `observations` whose per-entry noise variance is `noise_variance`.
    ///
    /// Blocks are decomposed through their uncentered second moment. A component
    /// survives when its eigenvalue exceeds the Marchenko-Pastur edge
    /// `noise_variance * (1 + sqrt(d / N))^2` of its block of dimension `d`.
    pub fn train<T: Real>(observations: &[SteerableCoeffs<T>], noise_variance: f64) -> Result<Self> {
        let n = observations.len();
        if n < 2 {
            return Err(Error::Config(format!("steerable PCA needs at least 2 observations, got {n}")));
        }
        if !(noise_variance >= 0.0) {
            return Err(Error::Config("noise variance must be non-negative".into()));
        }
        let source_index = Arc::clone(observations[0].index());
        if observations.iter().any(|o| !o.same_index(&observations[0])) {
            return Err(Error::IndexMismatch);
        }

        let mut mean = vec![C64::new(0.0, 0.0); source_index.len()];
        for o in observations {
            for (m, v) in mean.iter_mut().zip(o.values()) {
                *m += C64::new(v.re.as_f64(), v.im.as_f64());
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }

        let mut moments = Vec::new();
        let mut global_max: f64 = 0.0;
        for k in 0..=source_index.max_angular() {
            let source: Vec<usize> = (0..source_index.len()).filter(|&j| source_index.angular()[j] == k).collect();
            if source.is_empty() {
                continue;
            }
            let d = source.len();
            let mut cov = DMatrix::<C64>::zeros(d, d);
            for o in observations {
                let x: Vec<C64> = source
                    .iter()
                    .map(|&j| C64::new(o.values()[j].re.as_f64(), o.values()[j].im.as_f64()))
                    .collect();
                for r in 0..d {
                    for c in 0..d {
                        cov[(r, c)] += x[r] * x[c].conj();
                    }
                }
            }
            cov /= C64::new(n as f64, 0.0);
            let eig = SymmetricEigen::new(cov);
            global_max = global_max.max(eig.eigenvalues.max());
            moments.push((k, source, eig));
        }

        let floor = 1e-10 * global_max;
        let mut blocks = Vec::new();
        let (mut out_k, mut out_q) = (Vec::new(), Vec::new());
        for (k, source, eig) in moments {
            let d = source.len();
            let edge = noise_variance * (1.0 + (d as f64 / n as f64).sqrt()).powi(2);
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let kept: Vec<usize> =
                order.into_iter().filter(|&i| eig.eigenvalues[i] > edge && eig.eigenvalues[i] > floor).collect();
            if kept.is_empty() {
                continue;
            }
            let mut components = DMatrix::<C64>::zeros(d, kept.len());
            for (c, &i) in kept.iter().enumerate() {
                components.set_column(c, &eig.eigenvectors.column(i));
            }
            for c in 0..kept.len() {
                out_k.push(k);
                out_q.push(c as u32 + 1);
            }
            blocks.push(SpcaBlock {
                angular: k,
                source,
                components,
                eigenvalues: kept.iter().map(|&i| eig.eigenvalues[i]).collect(),
            });
        }
        Ok(Self {
            source_index,
            output_index: Arc::new(CoeffIndex::new(out_k, out_q)?),
            blocks,
            mean,
            noise_variance,
        })
    }

    /// Labels of the compressed coefficients: `(k, component number from 1)`.
    pub fn output_index(&self) -> &Arc<CoeffIndex> {
        &self.output_index
    }

    pub fn source_index(&self) -> &Arc<CoeffIndex> {
        &self.source_index
    }

    /// Total retained dimension `M`.
    pub fn len(&self) -> usize {
        self.output_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output_index.is_empty()
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn mean(&self) -> &[C64] {
        &self.mean
    }

    /// Retained count for angular frequency `k`.
    pub fn retained(&self, k: u32) -> usize {
        self.blocks.iter().find(|b| b.angular == k).map_or(0, |b| b.components.ncols())
    }

    /// Retained principal components of block `k` (columns).
    pub fn components(&self, k: u32) -> Option<&DMatrix<C64>> {
        self.blocks.iter().find(|b| b.angular == k).map(|b| &b.components)
    }

    pub fn eigenvalues(&self, k: u32) -> Option<&[f64]> {
        self.blocks.iter().find(|b| b.angular == k).map(|b| b.eigenvalues.as_slice())
    }

    /// Coordinates of `coeffs` in the retained components.
    pub fn expand<T: Real>(&self, coeffs: &SteerableCoeffs<T>) -> Result<SteerableCoeffs<T>> {
        if !(Arc::ptr_eq(coeffs.index(), &self.source_index) || **coeffs.index() == *self.source_index) {
            return Err(Error::IndexMismatch);
        }
        let mut values = Vec::with_capacity(self.len());
        for block in &self.blocks {
            for c in 0..block.components.ncols() {
                let mut acc = C64::new(0.0, 0.0);
                for (r, &j) in block.source.iter().enumerate() {
                    let v = coeffs.values()[j];
                    acc += block.components[(r, c)].conj() * C64::new(v.re.as_f64(), v.im.as_f64());
                }
                values.push(Complex::new(T::of(acc.re), T::of(acc.im)));
            }
        }
        SteerableCoeffs::new(values, Arc::clone(&self.output_index))
    }

    /// Maps compressed coordinates back to the source basis.
    pub fn lift<T: Real>(&self, reduced: &SteerableCoeffs<T>) -> Result<SteerableCoeffs<T>> {
        if !(Arc::ptr_eq(reduced.index(), &self.output_index) || **reduced.index() == *self.output_index) {
            return Err(Error::IndexMismatch);
        }
        let mut values = vec![C64::new(0.0, 0.0); self.source_index.len()];
        let mut pos = 0;
        for block in &self.blocks {
            for c in 0..block.components.ncols() {
                let v = reduced.values()[pos];
                let v = C64::new(v.re.as_f64(), v.im.as_f64());
                for (r, &j) in block.source.iter().enumerate() {
                    values[j] += block.components[(r, c)] * v;
                }
                pos += 1;
            }
        }
        let values = values.into_iter().map(|z| Complex::new(T::of(z.re), T::of(z.im))).collect();
        SteerableCoeffs::new(values, Arc::clone(&self.source_index))
    }
}

pub fn spca_train<T: Real>(observations: &[SteerableCoeffs<T>], noise_variance: f64) -> Result<SpcaBasis> {
    SpcaBasis::train(observations, noise_variance)
}

pub fn spca_expand<T: Real>(coeffs: &SteerableCoeffs<T>, spca: &SpcaBasis) -> Result<SteerableCoeffs<T>> {
    spca.expand(coeffs)
}
