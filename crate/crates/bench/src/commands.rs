use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use synchem::analysis::{self, DependencyMode, PmfSource, ShiftPmf};
use synchem::dist_learning::{self, LearningConfig, SyntheticSource};
use synchem::em::{self, exponential_decay_prior_with};
use synchem::EmConfig;
use synchem::mra_model::{self, SyntheticImageSpec};
use synchem::rng::{derive_seed, stream_rng};
use synchem::rotation::RotationDistribution;
use synchem::steerable_basis::{build_basis, read_basis, write_basis, BandLimit, FourierBesselBasis};
use synchem::synchronization::{self, PpmOptions, SyncMethod};
use synchem::{Coeffs, Dataset1D, Dataset2D, Image, LearnedPrior};

use crate::config::{snr_label, ExperimentConfig, Method, Model};
use crate::error::{Category, CliError};
use crate::manifest::{self, RunManifest, TrialRecord};
use crate::plot::{self, Panel, Series};

/// Stream of the 1-D ground truth.
const TRUTH_1D: u64 = 0x5452_5554;
/// Stream of the shift-PMF test signal.
const PMF_SIGNAL: u64 = 0x504d_46;

fn cli_err(category: Category, msg: impl Into<String>) -> anyhow::Error {
    CliError::new(category, msg).into()
}

/// Output bookkeeping shared by every command.
pub struct Session {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    command: &'static str,
    started: f64,
    outputs: Vec<PathBuf>,
    seeds: Vec<(String, u64)>,
}

impl Session {
    pub fn new(command: &'static str, cfg: ExperimentConfig) -> anyhow::Result<Self> {
        let out = cfg.output_dir();
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let seeds = vec![("seed".to_string(), cfg.seed)];
        Ok(Self { cfg, out, command, started: manifest::unix_time(), outputs: Vec::new(), seeds })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn create(&mut self, name: &str) -> anyhow::Result<BufWriter<File>> {
        let p = self.path(name);
        Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
    }

    pub fn finish(self, trials: &[TrialRecord]) -> anyhow::Result<Vec<PathBuf>> {
        let m = RunManifest {
            command: self.command,
            code_version: env!("CARGO_PKG_VERSION"),
            started_at: self.started,
            finished_at: manifest::unix_time(),
            config: &self.cfg,
            seeds: self.seeds,
            trials,
            outputs: self.outputs.clone(),
        };
        manifest::append(&self.out, &m)?;
        for p in &self.outputs {
            println!("{}", p.display());
        }
        Ok(self.outputs)
    }
}

/// Basis, ground truth and its in-span image for the 2-D model.
pub struct Problem2D {
    pub basis: FourierBesselBasis,
    pub truth: Coeffs,
    pub image: Image,
}

impl Problem2D {
    /// Squared image norm per pixel; the SNR numerator.
    fn energy(&self) -> f64 {
        let n = self.image.size() as f64;
        self.image.frobenius_norm_sqr() / (n * n)
    }
}

/// Builds the basis, reusing a cached copy in the output directory.
pub fn load_basis(cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<FourierBesselBasis> {
    let radius = (cfg.image_size as f64 - 1.0) / 2.0;
    let cache = dir.join(format!("basis_{}_r{}.fbb", cfg.image_size, cfg.max_root));
    if let Ok(f) = File::open(&cache) {
        if let Ok(b) = read_basis(BufReader::new(f)) {
            if b.grid_size() == cfg.image_size {
                return Ok(b);
            }
        }
    }
    let basis = build_basis(cfg.image_size, radius, BandLimit::MaxRoot(cfg.max_root))?;
    write_basis(&basis, BufWriter::new(File::create(&cache)?))?;
    Ok(basis)
}

pub fn problem_2d(cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<Problem2D> {
    let basis = load_basis(cfg, dir)?;
    let (truth, image) = mra_model::synthetic_truth(&basis, &SyntheticImageSpec::with_seed(cfg.seed))?;
    Ok(Problem2D { basis, truth, image })
}

fn truth_1d(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut rng = stream_rng(cfg.seed, TRUTH_1D);
    (0..cfg.signal_len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Seed of the dataset at SNR point `i`, trial `t`.
pub fn dataset_seed(cfg: &ExperimentConfig, i: usize, t: usize) -> u64 {
    derive_seed(derive_seed(cfg.seed, i as u64 + 1), t as u64)
}

fn dataset_2d(cfg: &ExperimentConfig, p: &Problem2D, i: usize, t: usize) -> synchem::Result<Dataset2D> {
    let sigma = cfg.sigma_at(i, p.energy());
    let uniform = RotationDistribution::uniform(cfg.grid_size);
    mra_model::generate_2d(&p.truth, cfg.n, sigma, cfg.grid_size, &uniform, dataset_seed(cfg, i, t))
}

fn dataset_1d(cfg: &ExperimentConfig, truth: &[f64], i: usize, t: usize) -> synchem::Result<Dataset1D> {
    let energy = truth.iter().map(|x| x * x).sum::<f64>() / truth.len() as f64;
    mra_model::generate_1d_from(truth, cfg.n, cfg.sigma_at(i, energy), dataset_seed(cfg, i, t))
}

// generate

pub fn generate(mut s: Session, csv: bool) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = s.cfg.clone();
    match cfg.model {
        Model::TwoD => {
            let p = problem_2d(&cfg, &s.out)?;
            for i in 0..cfg.snr.len() {
                for t in 0..cfg.trials {
                    let data = dataset_2d(&cfg, &p, i, t)?;
                    let stem = format!("dataset_{}_trial{t}", snr_label(&cfg, i));
                    mra_model::write_dataset_2d(&data, s.create(&format!("{stem}.mra2"))?)?;
                    if csv {
                        mra_model::write_dataset_2d_csv(&data, s.create(&format!("{stem}.csv"))?)?;
                    }
                    s.seeds.push((stem, dataset_seed(&cfg, i, t)));
                }
            }
        }
        Model::OneD => {
            let truth = truth_1d(&cfg);
            for i in 0..cfg.snr.len() {
                for t in 0..cfg.trials {
                    let data = dataset_1d(&cfg, &truth, i, t)?;
                    let stem = format!("dataset_{}_trial{t}", snr_label(&cfg, i));
                    mra_model::write_dataset_1d(&data, s.create(&format!("{stem}.mra1"))?)?;
                    if csv {
                        mra_model::write_dataset_1d_csv(&data, s.create(&format!("{stem}.csv"))?)?;
                    }
                    s.seeds.push((stem, dataset_seed(&cfg, i, t)));
                }
            }
        }
    }
    s.finish(&[])
}

// learn-prior

fn learning_seed(cfg: &ExperimentConfig, i: usize) -> u64 {
    derive_seed(cfg.seed, 1000 + i as u64)
}

fn learn_prior_at(cfg: &ExperimentConfig, p: &Problem2D, i: usize) -> anyhow::Result<LearnedPrior> {
    let source = SyntheticSource { basis: &p.basis, spec: SyntheticImageSpec::with_seed(derive_seed(cfg.seed, 999)) };
    let lc = LearningConfig {
        sigma: cfg.sigma_at(i, p.energy()),
        n: cfg.prior_n,
        grid_size: cfg.grid_size,
        method: cfg.prior_sync_method(),
        repetitions: cfg.repetitions,
        seed: learning_seed(cfg, i),
    };
    Ok(dist_learning::learn_distribution(&source, &lc)?)
}

fn write_prior(s: &mut Session, prior: &LearnedPrior, i: usize) -> anyhow::Result<()> {
    let name = format!("prior_{}.csv", snr_label(&s.cfg, i));
    dist_learning::write_prior_csv(prior, s.create(&name)?)?;
    s.seeds.push((name, prior.seed));
    Ok(())
}

pub fn learn_prior(mut s: Session) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = s.cfg.clone();
    if cfg.model != Model::TwoD {
        return Err(cli_err(Category::Config, "prior learning is defined for the 2-D model only"));
    }
    let p = problem_2d(&cfg, &s.out)?;
    for i in 0..cfg.snr.len() {
        let prior = learn_prior_at(&cfg, &p, i)?;
        eprintln!(
            "{}: mass within BW={} is {:.4}",
            snr_label(&cfg, i),
            cfg.bandwidth,
            prior.pmf.centered_mass(cfg.bandwidth)
        );
        write_prior(&mut s, &prior, i)?;
    }
    s.finish(&[])
}

// run and sweep

fn read_prior(path: &Path, grid_size: usize) -> anyhow::Result<LearnedPrior> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let prior: LearnedPrior = dist_learning::read_prior_csv(BufReader::new(f))
        .with_context(|| format!("reading prior {}", path.display()))?;
    if prior.grid_size() != grid_size {
        return Err(cli_err(
            Category::Data,
            format!("prior {} is on a grid of {}, experiment uses L = {grid_size}", path.display(), prior.grid_size()),
        ));
    }
    Ok(prior)
}

/// Rotation prior per SNR point for Synch-EM: from files, learned on demand, or
/// uniform when `gamma = 0`.
fn synch_priors(s: &mut Session, p: &Problem2D) -> anyhow::Result<Vec<RotationDistribution<f64>>> {
    let cfg = s.cfg.clone();
    (0..cfg.snr.len())
        .map(|i| {
            if !cfg.prior.is_empty() {
                let path = &cfg.prior[if cfg.prior.len() == 1 { 0 } else { i }];
                Ok(read_prior(path, cfg.grid_size)?.pmf)
            } else if cfg.learn_prior {
                let prior = learn_prior_at(&cfg, p, i)?;
                write_prior(s, &prior, i)?;
                Ok(prior.pmf)
            } else if cfg.gamma > 0.0 {
                Err(cli_err(
                    Category::Config,
                    "method synch-em with gamma > 0 needs a learned prior: set `prior` or `learn_prior = true`",
                ))
            } else {
                Ok(RotationDistribution::uniform(cfg.grid_size))
            }
        })
        .collect()
}

fn em_config(cfg: &ExperimentConfig, truth: &Coeffs, standard: bool) -> EmConfig {
    let base = if standard {
        EmConfig::standard(cfg.grid_size)
    } else {
        EmConfig::synch(cfg.grid_size, cfg.bandwidth, cfg.gamma)
    };
    let c = base.with_tol(cfg.tol).with_max_iters(cfg.max_iters);
    if cfg.signal_prior {
        c.with_signal_prior(exponential_decay_prior_with(truth.index(), cfg.prior_scale, cfg.prior_decay))
    } else {
        c
    }
}

fn millis(secs: f64) -> f64 {
    (secs * 1000.0).round() / 1000.0
}

struct Outcome {
    relative_error: f64,
    iterations: usize,
    converged: bool,
    wall: f64,
    sync: Option<f64>,
}

fn run_method_2d(
    cfg: &ExperimentConfig,
    p: &Problem2D,
    data: &Dataset2D,
    method: Method,
    prior: Option<&RotationDistribution<f64>>,
    seed: u64,
) -> anyhow::Result<Outcome> {
    let obs = &data.observations;
    let l = cfg.grid_size;
    let err = |est: &Coeffs| mra_model::relative_error_2d(est, &p.truth, l);
    let start = Instant::now();
    Ok(match method {
        Method::StandardEm => {
            let ec = em_config(cfg, &p.truth, true);
            let init = em::standard_init(obs, &ec, derive_seed(seed, 3))?;
            let r = em::run_em(obs, data.noise_sigma, &ec, init)?;
            Outcome {
                relative_error: err(&r.coeffs)?,
                iterations: r.iterations,
                converged: r.converged,
                wall: r.wall_time.as_secs_f64(),
                sync: None,
            }
        }
        Method::SynchEm => {
            let ec = em_config(cfg, &p.truth, false);
            let prior = prior.ok_or_else(|| cli_err(Category::Internal, "synch-em prior not resolved"))?;
            let r = em::run_synch_em(obs, data.noise_sigma, &ec, prior, cfg.partition, derive_seed(seed, 2))?;
            Outcome {
                relative_error: err(&r.coeffs)?,
                iterations: r.iterations,
                converged: r.converged,
                wall: r.wall_time.as_secs_f64(),
                sync: r.sync_time.map(|d| d.as_secs_f64()),
            }
        }
        Method::SyncOnly | Method::TemplateMatching => {
            let sync = if method == Method::SyncOnly {
                synchronization::synchronize_and_match(obs, cfg.partition, l, PpmOptions::default(), derive_seed(seed, 2))?
            } else {
                synchronization::template_match(obs, &obs[0], l)
            };
            let avg = synchronization::align_and_average(obs, &sync)?;
            let wall = start.elapsed().as_secs_f64();
            Outcome {
                relative_error: err(&avg)?,
                iterations: sync.iterations,
                converged: sync.converged,
                wall,
                sync: Some(wall),
            }
        }
    })
}

fn run_method_1d(cfg: &ExperimentConfig, data: &Dataset1D, method: Method, seed: u64) -> anyhow::Result<Outcome> {
    let len = data.signal_len();
    let start = Instant::now();
    let sync = match method {
        Method::SyncOnly => synchronization::synchronize(
            &data.signals,
            SyncMethod::SynchronizeAndMatch { partition: cfg.partition },
            len,
            derive_seed(seed, 2),
        )?,
        Method::TemplateMatching => synchronization::synchronize(&data.signals, SyncMethod::TemplateMatching, len, 0)?,
        Method::StandardEm | Method::SynchEm => {
            return Err(cli_err(
                Category::Config,
                format!("method {} runs on the 2-D model only", method.tag()),
            ))
        }
    };
    let avg = synchronization::align_and_average_1d(&data.signals, &sync)?;
    let wall = start.elapsed().as_secs_f64();
    Ok(Outcome {
        relative_error: mra_model::relative_error_1d(&avg, &data.truth)?,
        iterations: sync.iterations,
        converged: sync.converged,
        wall,
        sync: Some(wall),
    })
}

/// Runs every method on every (SNR, trial) dataset. Cells run in parallel; the
/// methods of a cell share its dataset.
pub fn trial_grid(s: &mut Session, methods: &[Method]) -> anyhow::Result<Vec<TrialRecord>> {
    let cfg = s.cfg.clone();
    if cfg.model == Model::OneD {
        if let Some(m) = methods.iter().find(|m| matches!(m, Method::StandardEm | Method::SynchEm)) {
            return Err(cli_err(Category::Config, format!("method {} runs on the 2-D model only", m.tag())));
        }
    }
    let cells: Vec<(usize, usize)> =
        (0..cfg.snr.len()).flat_map(|i| (0..cfg.trials).map(move |t| (i, t))).collect();
    let record = |m: Method, i: usize, t: usize, sigma: f64, energy: f64, o: Outcome| TrialRecord {
        method: m.tag().to_string(),
        snr: if cfg.sigma.is_some() { energy / (sigma * sigma) } else { cfg.snr[i] },
        sigma,
        trial: t,
        seed: dataset_seed(&cfg, i, t),
        relative_error: o.relative_error,
        iterations: o.iterations,
        converged: o.converged,
        wall_time_s: millis(o.wall),
        sync_time_s: o.sync.map(millis),
    };
    let per_cell: Vec<Vec<TrialRecord>> = match cfg.model {
        Model::TwoD => {
            let p = problem_2d(&cfg, &s.out)?;
            let priors =
                if methods.contains(&Method::SynchEm) { Some(synch_priors(s, &p)?) } else { None };
            cells
                .par_iter()
                .map(|&(i, t)| -> anyhow::Result<Vec<TrialRecord>> {
                    let data = dataset_2d(&cfg, &p, i, t)?;
                    let seed = dataset_seed(&cfg, i, t);
                    methods
                        .iter()
                        .map(|&m| {
                            let prior = priors.as_ref().map(|v| &v[i]);
                            let o = run_method_2d(&cfg, &p, &data, m, prior, seed)?;
                            Ok(record(m, i, t, data.noise_sigma, p.energy(), o))
                        })
                        .collect()
                })
                .collect::<anyhow::Result<_>>()?
        }
        Model::OneD => {
            let truth = truth_1d(&cfg);
            let energy = truth.iter().map(|x| x * x).sum::<f64>() / truth.len() as f64;
            cells
                .par_iter()
                .map(|&(i, t)| -> anyhow::Result<Vec<TrialRecord>> {
                    let data = dataset_1d(&cfg, &truth, i, t)?;
                    let seed = dataset_seed(&cfg, i, t);
                    methods
                        .iter()
                        .map(|&m| Ok(record(m, i, t, data.noise_sigma, energy, run_method_1d(&cfg, &data, m, seed)?)))
                        .collect()
                })
                .collect::<anyhow::Result<_>>()?
        }
    };
    for &(i, t) in &cells {
        s.seeds.push((format!("dataset_{}_trial{t}", snr_label(&cfg, i)), dataset_seed(&cfg, i, t)));
    }
    // Order: SNR point, method as listed, trial.
    let mut rows = Vec::with_capacity(per_cell.len() * methods.len());
    for i in 0..cfg.snr.len() {
        for m in 0..methods.len() {
            for t in 0..cfg.trials {
                rows.push(per_cell[i * cfg.trials + t][m].clone());
            }
        }
    }
    Ok(rows)
}

fn write_trials(w: impl std::io::Write, rows: &[TrialRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(mut s: Session, method: Method) -> anyhow::Result<Vec<PathBuf>> {
    let rows = trial_grid(&mut s, &[method])?;
    let name = format!("run_{}.csv", method.tag());
    write_trials(s.create(&name)?, &rows)?;
    s.finish(&rows)
}

/// Mean and spread of one (SNR, method) point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr: f64,
    pub sigma: f64,
    pub method: String,
    pub trials: usize,
    pub mean_relative_error: f64,
    pub std_relative_error: f64,
    pub mean_iterations: f64,
    pub std_iterations: f64,
    pub mean_wall_time_s: f64,
    pub std_wall_time_s: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// One point per consecutive block of `trials` rows (the order [`trial_grid`] emits).
pub fn aggregate(rows: &[TrialRecord], trials: usize) -> Vec<SweepPoint> {
    rows.chunks(trials.max(1))
        .map(|group| {
            let head = &group[0];
            let col = |f: fn(&TrialRecord) -> f64| mean_std(&group.iter().map(f).collect::<Vec<_>>());
            let (me, se) = col(|r| r.relative_error);
            let (mi, si) = col(|r| r.iterations as f64);
            let (mw, sw) = col(|r| r.wall_time_s);
            SweepPoint {
                snr: head.snr,
                sigma: head.sigma,
                method: head.method.clone(),
                trials: group.len(),
                mean_relative_error: me,
                std_relative_error: se,
                mean_iterations: mi,
                std_iterations: si,
                mean_wall_time_s: mw,
                std_wall_time_s: sw,
            }
        })
        .collect()
}

/// Three panels (relative error, iterations, wall time) against SNR, read from a summary CSV.
pub fn sweep_svg(summary: &Path) -> anyhow::Result<String> {
    let mut rdr = csv::Reader::from_path(summary)?;
    let points: Vec<SweepPoint> = rdr.deserialize().collect::<Result<_, _>>()?;
    let mut methods: Vec<String> = Vec::new();
    for p in &points {
        if !methods.contains(&p.method) {
            methods.push(p.method.clone());
        }
    }
    let x = |p: &SweepPoint| if p.snr.is_finite() { p.snr } else { 1.0 / (p.sigma * p.sigma) };
    let panel = |title: &str, log_y: bool, f: fn(&SweepPoint) -> f64| Panel {
        title: title.to_string(),
        x_label: "SNR".to_string(),
        log_x: true,
        log_y,
        series: methods
            .iter()
            .map(|m| Series {
                name: m.clone(),
                points: points.iter().filter(|p| &p.method == m).map(|p| (x(p), f(p))).collect(),
            })
            .collect(),
    };
    Ok(plot::render(&[
        panel("relative error", true, |p| p.mean_relative_error),
        panel("iterations", false, |p| p.mean_iterations),
        panel("wall time [s]", true, |p| p.mean_wall_time_s),
    ]))
}

pub fn sweep(mut s: Session, plot: bool) -> anyhow::Result<Vec<PathBuf>> {
    let methods = s.cfg.methods.clone();
    let rows = trial_grid(&mut s, &methods)?;
    write_trials(s.create("sweep_trials.csv")?, &rows)?;
    let summary = s.path("sweep_summary.csv");
    {
        let mut w = csv::Writer::from_path(&summary)?;
        for p in aggregate(&rows, s.cfg.trials) {
            w.serialize(p)?;
        }
        w.flush()?;
    }
    if plot {
        let svg = sweep_svg(&summary)?;
        std::fs::write(s.path("sweep.svg"), svg)?;
    }
    s.finish(&rows)
}

// analyze

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Study {
    Pearson,
    ShiftPmf,
}

#[derive(Debug, Serialize)]
struct PearsonRow<'a> {
    mode: &'a str,
    signal_len: usize,
    sigma: f64,
    n: usize,
    trials: usize,
    alpha: f64,
    fraction_significant: f64,
    degenerate_pairs: usize,
}

fn mode_tag(mode: DependencyMode) -> String {
    match mode {
        DependencyMode::BeforeSync => "before-sync".into(),
        DependencyMode::AfterSync(m) => format!("after-{}", m.tag()),
    }
}

fn pearson_study(s: &mut Session) -> anyhow::Result<()> {
    let cfg = s.cfg.clone();
    let modes = [
        DependencyMode::BeforeSync,
        DependencyMode::AfterSync(SyncMethod::Ppm),
        DependencyMode::AfterSync(SyncMethod::SynchronizeAndMatch { partition: cfg.partition }),
    ];
    let summary_path = s.path("pearson_summary.csv");
    let mut summary = csv::Writer::from_path(&summary_path)?;
    for i in 0..cfg.snr.len() {
        let sigma = cfg.sigma_at(i, 1.0);
        let seed = derive_seed(cfg.seed, i as u64 + 1);
        s.seeds.push((format!("pearson_{}", snr_label(&cfg, i)), seed));
        for mode in modes {
            let report = analysis::dependency_experiment(cfg.signal_len, sigma, cfg.n, cfg.trials, mode, cfg.alpha, seed)?;
            let tag = mode_tag(mode);
            report.write_csv(s.create(&format!("pearson_{}_{tag}.csv", snr_label(&cfg, i)))?)?;
            eprintln!("{} {tag}: fraction significant {:.4}", snr_label(&cfg, i), report.fraction_significant);
            summary.serialize(PearsonRow {
                mode: &tag,
                signal_len: cfg.signal_len,
                sigma,
                n: cfg.n,
                trials: cfg.trials,
                alpha: cfg.alpha,
                fraction_significant: report.fraction_significant,
                degenerate_pairs: report.degenerate_pairs,
            })?;
        }
    }
    summary.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct PmfRow {
    signal_len: usize,
    sigma: f64,
    samples: usize,
    max_abs_diff: f64,
    max_std_error: f64,
    total_variation: f64,
    mse: f64,
}

fn pmf_study(s: &mut Session, plot: bool) -> anyhow::Result<()> {
    let cfg = s.cfg.clone();
    let mut rng = stream_rng(cfg.seed, PMF_SIGNAL);
    let x: Vec<f64> = (0..cfg.signal_len).map(|_| StandardNormal.sample(&mut rng)).collect();
    let summary_path = s.path("shift_pmf_summary.csv");
    let mut summary = csv::Writer::from_path(&summary_path)?;
    let mut panels = Vec::new();
    for i in 0..cfg.snr.len() {
        let sigma = cfg.sigma_at(i, 1.0);
        let label = snr_label(&cfg, i);
        let seed = derive_seed(cfg.seed, i as u64 + 1);
        s.seeds.push((format!("shift_pmf_{label}"), seed));
        let empirical = analysis::shift_pmf_empirical(&x, sigma, cfg.samples, seed)?;
        let analytic = if sigma == 0.0 {
            // The sigma -> 0 limit: all mass on the zero shift.
            let mut pmf = vec![0.0; x.len()];
            pmf[0] = 1.0;
            ShiftPmf { pmf, source: PmfSource::Analytic, sigma, signal: x.clone() }
        } else {
            analysis::shift_pmf_analytic(&x, sigma)?
        };
        analysis::write_pmf_csv(&[&analytic, &empirical], s.create(&format!("shift_pmf_{label}.csv"))?)?;
        let se = empirical.standard_errors().unwrap_or_default();
        summary.serialize(PmfRow {
            signal_len: x.len(),
            sigma,
            samples: cfg.samples,
            max_abs_diff: analytic.max_abs_diff(&empirical),
            max_std_error: se.iter().copied().fold(0.0, f64::max),
            total_variation: analytic.total_variation(&empirical),
            mse: analytic.mse(&empirical),
        })?;
        let series = |name: &str, p: &ShiftPmf| Series {
            name: name.to_string(),
            points: p.pmf.iter().enumerate().map(|(m, v)| (m as f64, *v)).collect(),
        };
        panels.push(Panel {
            title: format!("shift PMF, {label}"),
            x_label: "shift".into(),
            log_x: false,
            log_y: false,
            series: vec![series("analytic", &analytic), series("empirical", &empirical)],
        });
        if sigma > 0.0 && !cfg.lengths.is_empty() {
            let rows = analysis::pmf_approximation_error(&cfg.lengths, sigma, cfg.realizations, cfg.samples, seed)?;
            analysis::write_pmf_error_csv(&rows, s.create(&format!("pmf_error_{label}.csv"))?)?;
            panels.push(Panel {
                title: format!("approximation MSE, {label}"),
                x_label: "L".into(),
                log_x: false,
                log_y: true,
                series: vec![Series { name: "mse".into(), points: rows.iter().map(|&(l, e)| (l as f64, e)).collect() }],
            });
        }
    }
    summary.flush()?;
    if plot {
        std::fs::write(s.path("shift_pmf.svg"), plot::render(&panels))?;
    }
    Ok(())
}

pub fn analyze(mut s: Session, study: Study, plot: bool) -> anyhow::Result<Vec<PathBuf>> {
    match study {
        Study::Pearson => pearson_study(&mut s)?,
        Study::ShiftPmf => pmf_study(&mut s, plot)?,
    }
    s.finish(&[])
}
