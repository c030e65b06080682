//! Experiment configuration: a TOML file whose keys can each be overridden by
//! a command-line flag of the same name.
//!
//! Units: noise levels are standard deviations, SNR is a plain energy ratio
//! (`inf` for noiseless data), rotations and bandwidths count grid steps of
//! `2 pi / L`, and all times are seconds.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use synchem::synchronization::SyncMethod;

use crate::error::{CliError, Category};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Model {
    #[serde(rename = "1d")]
    #[value(name = "1d")]
    OneD,
    #[serde(rename = "2d")]
    #[value(name = "2d")]
    TwoD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    StandardEm,
    SynchEm,
    SyncOnly,
    TemplateMatching,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::StandardEm => "standard-em",
            Method::SynchEm => "synch-em",
            Method::SyncOnly => "sync-only",
            Method::TemplateMatching => "template-matching",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PriorMethod {
    TemplateMatching,
    Ppm,
    SynchronizeAndMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Signal-to-noise ratios; one experiment point each.
    pub snr: Vec<f64>,
    /// Fixed noise level; replaces the SNR-derived one when set.
    pub sigma: Option<f64>,
    /// Observations per dataset.
    pub n: usize,
    /// Rotation grid size.
    #[serde(rename = "L")]
    pub grid_size: usize,
    /// EM search window after synchronization, in grid steps.
    #[serde(rename = "BW")]
    pub bandwidth: usize,
    pub gamma: f64,
    /// Synchronize-and-Match partition size.
    #[serde(rename = "P")]
    pub partition: usize,
    pub tol: f64,
    /// EM iteration cap.
    #[serde(rename = "T")]
    pub max_iters: usize,
    /// Use the Gaussian signal prior `(prior_scale exp(-k / prior_decay))^2`.
    pub signal_prior: bool,
    pub prior_scale: f64,
    pub prior_decay: f64,
    pub trials: usize,
    pub seed: u64,
    /// Output directory; relative paths are resolved against `SYNCHEM_OUTPUT_ROOT` when set.
    pub output: PathBuf,
    /// 2-D images are `image_size` pixels square.
    pub image_size: usize,
    /// Fourier-Bessel band limit on the Bessel roots.
    pub max_root: f64,
    /// 1-D signal length.
    pub signal_len: usize,
    pub methods: Vec<Method>,
    /// Learned prior files: one for all SNRs or one per SNR.
    pub prior: Vec<PathBuf>,
    /// Learn missing priors on the fly instead of failing.
    pub learn_prior: bool,
    pub prior_method: PriorMethod,
    /// Observations per prior-learning repetition.
    pub prior_n: usize,
    pub repetitions: usize,
    pub alpha: f64,
    /// Monte-Carlo draws of the empirical shift PMF.
    pub samples: usize,
    /// Signal lengths of the PMF approximation-error study.
    pub lengths: Vec<usize>,
    pub realizations: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::TwoD,
            snr: vec![1.0 / 16.0],
            sigma: None,
            n: 1000,
            grid_size: 360,
            bandwidth: 36,
            gamma: 100.0,
            partition: 100,
            tol: 1e-5,
            max_iters: 1000,
            signal_prior: true,
            prior_scale: 4.0,
            prior_decay: 8.0,
            trials: 10,
            seed: 0,
            output: PathBuf::from("results"),
            image_size: 65,
            max_root: 20.0,
            signal_len: 21,
            methods: vec![Method::StandardEm, Method::SynchEm, Method::SyncOnly],
            prior: Vec::new(),
            learn_prior: false,
            prior_method: PriorMethod::SynchronizeAndMatch,
            prior_n: 500,
            repetitions: 10,
            alpha: 0.05,
            samples: 100_000,
            lengths: vec![11, 21, 31, 41],
            realizations: 5,
        }
    }
}

/// Command-line overrides; every flag carries the name of its config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long, value_delimiter = ',')]
    pub snr: Option<Vec<f64>>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "L")]
    pub grid_size: Option<usize>,
    #[arg(long = "BW")]
    pub bandwidth: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "P")]
    pub partition: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "T")]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub signal_prior: Option<bool>,
    #[arg(long)]
    pub prior_scale: Option<f64>,
    #[arg(long)]
    pub prior_decay: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub image_size: Option<usize>,
    #[arg(long)]
    pub max_root: Option<f64>,
    #[arg(long)]
    pub signal_len: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long, value_delimiter = ',')]
    pub prior: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub learn_prior: Option<bool>,
    #[arg(long)]
    pub prior_method: Option<PriorMethod>,
    #[arg(long)]
    pub prior_n: Option<usize>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
    #[arg(long)]
    pub realizations: Option<usize>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident; $($field:ident),*) => {
        $(if let Some(v) = $ov.$field.clone() { $cfg.$field = v; })*
    };
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::new(Category::Config, format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(Category::Io, format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// File (if any) then flags.
    pub fn resolve(ov: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &ov.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if ov.sigma.is_some() {
            cfg.sigma = ov.sigma;
        }
        apply!(cfg, ov; model, snr, n, grid_size, bandwidth, gamma, partition, tol, max_iters,
            signal_prior, prior_scale, prior_decay, trials, seed, output, image_size, max_root,
            signal_len, methods, prior, learn_prior, prior_method, prior_n, repetitions, alpha,
            samples, lengths, realizations);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::new(Category::Config, msg));
        if self.snr.is_empty() {
            return bad("snr list is empty".into());
        }
        if self.snr.iter().any(|s| !(*s > 0.0)) {
            return bad(format!("snr values must be positive, got {:?}", self.snr));
        }
        if let Some(s) = self.sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("sigma {s} is not a finite non-negative number"));
            }
        }
        if self.n == 0 || self.trials == 0 {
            return bad("n and trials must be positive".into());
        }
        if self.grid_size < 2 {
            return bad(format!("L = {} is below 2", self.grid_size));
        }
        // BW <= L is checked by the EM configuration, which only Synch-EM builds.
        if self.bandwidth == 0 {
            return bad("BW must be positive".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma = {} must be finite and non-negative", self.gamma));
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol = {} is negative", self.tol));
        }
        if self.methods.is_empty() {
            return bad("methods list is empty".into());
        }
        for p in &self.prior {
            if !p.exists() {
                return bad(format!("prior file {} does not exist", p.display()));
            }
        }
        if !self.prior.is_empty() && self.prior.len() != 1 && self.prior.len() != self.snr.len() {
            return bad(format!("{} prior files for {} SNR values", self.prior.len(), self.snr.len()));
        }
        Ok(())
    }

    /// Noise level of SNR point `i`, given the squared norm per pixel (or sample) of the clean signal.
    pub fn sigma_at(&self, i: usize, energy_per_entry: f64) -> f64 {
        self.sigma.unwrap_or_else(|| (energy_per_entry / self.snr[i]).sqrt())
    }

    pub fn prior_sync_method(&self) -> SyncMethod {
        match self.prior_method {
            PriorMethod::TemplateMatching => SyncMethod::TemplateMatching,
            PriorMethod::Ppm => SyncMethod::Ppm,
            PriorMethod::SynchronizeAndMatch => SyncMethod::SynchronizeAndMatch { partition: self.partition },
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(crate::OUTPUT_ROOT_ENV) {
            Some(root) if self.output.is_relative() => PathBuf::from(root).join(&self.output),
            _ => self.output.clone(),
        }
    }
}

/// Label used in file names for SNR point `i`.
pub fn snr_label(cfg: &ExperimentConfig, i: usize) -> String {
    match cfg.sigma {
        Some(s) => format!("sigma{s}"),
        None => format!("snr{}", cfg.snr[i]),
    }
}
