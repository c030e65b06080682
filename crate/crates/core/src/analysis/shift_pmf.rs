use std::io::Write;

use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use statrs::function::erf::erfc;

use super::quadrature::integrate_adaptive;
use crate::rng::{derive_seed, stream_rng};
use crate::synchronization::Alignable;
use crate::rotation::PhaseTable;
use crate::{Error, Result};

/// Absolute quadrature tolerance per bin.
const BIN_TOL: f64 = 1e-10;
/// Half-width of the integration range in units of `sigma_c`.
const SPAN: f64 = 10.0;
/// Monte-Carlo draws per random stream.
const DRAWS_PER_STREAM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfSource {
    Analytic,
    Empirical { samples: usize, seed: u64 },
}

impl PmfSource {
    pub fn tag(&self) -> &'static str {
        match self {
            PmfSource::Analytic => "analytic",
            PmfSource::Empirical { .. } => "empirical",
        }
    }
}

/// Distribution of `argmax_l R_xy[l]` for `y = x + N(0, sigma^2 I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPmf {
    pub pmf: Vec<f64>,
    pub source: PmfSource,
    pub sigma: f64,
    pub signal: Vec<f64>,
}

impl ShiftPmf {
    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Per-bin binomial standard error `sqrt(p (1 - p) / samples)`; `None` for analytic PMFs.
    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        match self.source {
            PmfSource::Empirical { samples, .. } => {
                Some(self.pmf.iter().map(|p| (p * (1.0 - p) / samples as f64).sqrt()).collect())
            }
            PmfSource::Analytic => None,
        }
    }

    pub fn max_abs_diff(&self, other: &ShiftPmf) -> f64 {
        self.pmf.iter().zip(&other.pmf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &ShiftPmf) -> f64 {
        0.5 * self.pmf.iter().zip(&other.pmf).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn mse(&self, other: &ShiftPmf) -> f64 {
        self.pmf.iter().zip(&other.pmf).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / self.pmf.len() as f64
    }
}

/// `R_xx[l] = sum_n x[n] x[(n + l) mod L]`.
pub fn autocorrelation(x: &[f64]) -> Vec<f64> {
    let len = x.len();
    (0..len).map(|l| (0..len).map(|n| x[n] * x[(n + l) % len]).sum()).collect()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Approximate PMF treating the correlations `R_xy[l]` as independent
/// `N(R_xx[l], sigma_c^2)` with `sigma_c = sigma ||x||`:
/// `p[m] = int phi_m(u) prod_{l != m} Phi_l(u) du` over `R_xx[m] +- 10 sigma_c`,
/// then renormalized.
pub fn shift_pmf_analytic(x: &[f64], sigma: f64) -> Result<ShiftPmf> {
    let len = x.len();
    if len < 3 {
        return Err(Error::Config(format!("signal length {len} is below 3")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("analytic PMF needs sigma > 0, got {sigma}")));
    }
    let rxx = autocorrelation(x);
    let sc = sigma * rxx[0].sqrt();
    if sc == 0.0 {
        return Err(Error::Config("analytic PMF of a zero signal".into()));
    }
    let raw: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|m| {
            let density = |u: f64| {
                let z = (u - rxx[m]) / sc;
                let mut v = (-0.5 * z * z).exp() / (sc * (2.0 * std::f64::consts::PI).sqrt());
                for (l, r) in rxx.iter().enumerate() {
                    if l != m {
                        v *= normal_cdf((u - r) / sc);
                    }
                }
                v
            };
            integrate_adaptive(density, rxx[m] - SPAN * sc, rxx[m] + SPAN * sc, BIN_TOL)
        })
        .collect::<Result<_>>()?;
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("analytic PMF has no mass".into()));
    }
    Ok(ShiftPmf { pmf: raw.iter().map(|p| p / total).collect(), source: PmfSource::Analytic, sigma, signal: x.to_vec() })
}

/// Histogram of the template-matching estimate over `samples` draws of `y = x + e`.
pub fn shift_pmf_empirical(x: &[f64], sigma: f64, samples: usize, seed: u64) -> Result<ShiftPmf> {
    let len = x.len();
    if len < 2 || samples == 0 {
        return Err(Error::Config("empirical PMF needs a signal and at least one sample".into()));
    }
    let table = PhaseTable::<f64>::new(len);
    let reference = x.to_vec();
    let streams = samples.div_ceil(DRAWS_PER_STREAM);
    let counts: Vec<Vec<usize>> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s as u64);
            let mut counts = vec![0usize; len];
            let draws = DRAWS_PER_STREAM.min(samples - s * DRAWS_PER_STREAM);
            let mut y = vec![0.0; len];
            for _ in 0..draws {
                for (yi, xi) in y.iter_mut().zip(x) {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    *yi = xi + sigma * e;
                }
                counts[reference.relative_offset(&y, &table)] += 1;
            }
            counts
        })
        .collect();
    let mut total = vec![0usize; len];
    for c in counts {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    Ok(ShiftPmf {
        pmf: total.iter().map(|&c| c as f64 / samples as f64).collect(),
        source: PmfSource::Empirical { samples, seed },
        sigma,
        signal: x.to_vec(),
    })
}

/// For each `L`, mean over `realizations` signals `x ~ N(0, I_L)` of the MSE (over
/// shifts) between the analytic and empirical PMFs. Returns `(L, mse)` pairs.
pub fn pmf_approximation_error(
    lengths: &[usize],
    sigma: f64,
    realizations: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if realizations == 0 {
        return Err(Error::Config("need at least one realization".into()));
    }
    lengths
        .iter()
        .map(|&len| {
            let mut total = 0.0;
            for r in 0..realizations {
                let rseed = derive_seed(derive_seed(seed, len as u64), r as u64);
                let mut rng = stream_rng(rseed, u64::MAX);
                let x: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
                let a = shift_pmf_analytic(&x, sigma)?;
                let e = shift_pmf_empirical(&x, sigma, samples, rseed)?;
                total += a.mse(&e);
            }
            Ok((len, total / realizations as f64))
        })
        .collect()
}

/// Long-format CSV `source,shift,probability,std_error`.
pub fn write_pmf_csv<W: Write>(pmfs: &[&ShiftPmf], mut w: W) -> Result<()> {
    writeln!(w, "source,shift,probability,std_error")?;
    for pmf in pmfs {
        let se = pmf.standard_errors();
        for (m, p) in pmf.pmf.iter().enumerate() {
            match &se {
                Some(se) => writeln!(w, "{},{m},{p:e},{:e}", pmf.source.tag(), se[m])?,
                None => writeln!(w, "{},{m},{p:e},", pmf.source.tag())?,
            }
        }
    }
    Ok(())
}

/// CSV `L,mse`.
pub fn write_pmf_error_csv<W: Write>(rows: &[(usize, f64)], mut w: W) -> Result<()> {
    writeln!(w, "L,mse")?;
    for (l, e) in rows {
        writeln!(w, "{l},{e:e}")?;
    }
    Ok(())
}
