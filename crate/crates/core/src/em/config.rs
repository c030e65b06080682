use std::sync::Arc;

use crate::rotation::{centered_window_offset, RotationDistribution};
use crate::steerable_basis::CoeffIndex;
use crate::{Error, Real, Result};

/// Inputs of an EM run. Field names follow the configuration keys
/// `L`, `BW`, `gamma`, `tol`, `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig<T> {
    /// `L`: rotation grid size.
    pub grid_size: usize,
    /// `BW`: width of the centered rotation window searched by the E-step.
    pub bandwidth: usize,
    /// Weight of the KL prior tying `rho` to `rotation_prior`.
    pub gamma: T,
    /// Diagonal of the signal-prior covariance, one entry per stored coefficient.
    pub signal_prior: Option<Vec<T>>,
    /// Stop when `min_l ||a_{t+1} - R_l a_t||^2 < tol`.
    pub tol: T,
    /// `T`: maximum number of E/M pairs.
    pub max_iters: usize,
    /// `rho_bar`, in EM coordinates (offset `l` means observation = truth rotated by `l`).
    pub rotation_prior: Option<RotationDistribution<T>>,
}

impl<T: Real> EmConfig<T> {
    /// Full-grid search, no priors, `tol = 1e-5`, `T = 1000`.
    pub fn standard(grid_size: usize) -> Self {
        Self {
            grid_size,
            bandwidth: grid_size,
            gamma: T::zero(),
            signal_prior: None,
            tol: T::of(1e-5),
            max_iters: 1000,
            rotation_prior: None,
        }
    }

    /// `BW` window with KL weight `gamma` (the prior itself is attached by
    /// [`run_synch_em`](super::run_synch_em) or [`with_rotation_prior`](Self::with_rotation_prior)).
    pub fn synch(grid_size: usize, bandwidth: usize, gamma: T) -> Self {
        Self { bandwidth, gamma, ..Self::standard(grid_size) }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_signal_prior(mut self, diag: Vec<T>) -> Self {
        self.signal_prior = Some(diag);
        self
    }

    pub fn with_rotation_prior(mut self, prior: RotationDistribution<T>) -> Self {
        self.rotation_prior = Some(prior);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size == 0 {
            return Err(Error::Config("L must be positive".into()));
        }
        if self.bandwidth == 0 || self.bandwidth > self.grid_size {
            return Err(Error::Config(format!("BW = {} outside [1, L = {}]", self.bandwidth, self.grid_size)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::Config(format!("tol = {} must be positive", self.tol)));
        }
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return Err(Error::Config(format!("gamma = {} must be finite and non-negative", self.gamma)));
        }
        if self.gamma > T::zero() && self.rotation_prior.is_none() {
            return Err(Error::Config("a positive gamma needs a rotation prior".into()));
        }
        if let Some(g) = &self.signal_prior {
            if g.iter().any(|v| !(*v > T::zero())) {
                return Err(Error::Config("signal prior variances must be positive".into()));
            }
        }
        if let Some(p) = &self.rotation_prior {
            if p.grid_size() != self.grid_size {
                return Err(Error::WindowMismatch);
            }
        }
        Ok(())
    }

    pub fn window_offset(&self) -> i64 {
        centered_window_offset(self.bandwidth)
    }

    /// `dist` re-expressed on the centered `BW` window (mass outside is dropped and
    /// the rest renormalized).
    pub fn on_window(&self, dist: &RotationDistribution<T>) -> Result<RotationDistribution<T>> {
        if dist.grid_size() != self.grid_size {
            return Err(Error::WindowMismatch);
        }
        let offset = self.window_offset();
        if dist.window_offset() == offset && dist.len() == self.bandwidth {
            return Ok(dist.clone());
        }
        dist.restricted(offset, self.bandwidth)
    }

    /// The rotation prior on the EM window, if any.
    pub fn prior_on_window(&self) -> Result<Option<RotationDistribution<T>>> {
        self.rotation_prior.as_ref().map(|p| self.on_window(p)).transpose()
    }

    pub(crate) fn signal_prior_for(&self, index: &Arc<CoeffIndex>) -> Result<Option<&[T]>> {
        match &self.signal_prior {
            Some(g) if g.len() != index.len() => Err(Error::Dimension { expected: index.len(), actual: g.len() }),
            Some(g) => Ok(Some(g.as_slice())),
            None => Ok(None),
        }
    }
}

/// `Gamma_m = (4 exp(-k_m / 8))^2`.
pub fn exponential_decay_prior<T: Real>(index: &CoeffIndex) -> Vec<T> {
    exponential_decay_prior_with(index, 4.0, 8.0)
}

/// `Gamma_m = (scale exp(-k_m / decay))^2`.
pub fn exponential_decay_prior_with<T: Real>(index: &CoeffIndex, scale: f64, decay: f64) -> Vec<T> {
    index.angular().iter().map(|&k| T::of((scale * (-(k as f64) / decay).exp()).powi(2))).collect()
}
