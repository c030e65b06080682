//! Rotation estimation: pairwise relative rotations, the projected power method
//! (PPM), template matching, aligned averaging and Synchronize-and-Match.
//!
//! Conventions. `relative_offset(a, b)` is the grid offset `d` for which `b` is
//! best explained as `a` rotated by `d`, so for noiseless observations
//! `d = theta_b - theta_a`. The phase matrix stores `H_ij = exp(-i 2 pi d_ij / L)`,
//! which for noiseless data is `z z^*` with `z_i = exp(i theta_i)`. Estimated
//! rotations are therefore defined up to one global offset, and aligning
//! observation `i` means rotating it by `-theta_hat_i`.

mod alignable;

use std::io::Write;

use num_complex::Complex;
use num_traits::{Float, One, Zero};
use rayon::prelude::*;

use crate::rng::stream_rng;
use crate::rotation::PhaseTable;
use crate::steerable_basis::SteerableCoeffs;
use crate::{Error, Real, Result};

pub use alignable::Alignable;

/// Default partition size of Synchronize-and-Match.
pub const DEFAULT_PARTITION: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncMethod {
    /// Every observation against the first one.
    TemplateMatching,
    /// PPM over all pairs.
    Ppm,
    /// PPM on the first `partition` observations, nearest-neighbor transfer to the rest.
    SynchronizeAndMatch { partition: usize },
}

impl SyncMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            SyncMethod::TemplateMatching => "template-matching",
            SyncMethod::Ppm => "ppm",
            SyncMethod::SynchronizeAndMatch { .. } => "synchronize-and-match",
        }
    }
}

impl std::fmt::Display for SyncMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SyncMethod::SynchronizeAndMatch { partition } => write!(f, "{}(P={partition})", self.tag()),
            _ => f.write_str(self.tag()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncResult {
    /// Estimated grid rotation of every observation, in `[0, L)`.
    pub rotation_indices: Vec<usize>,
    pub grid_size: usize,
    pub method: SyncMethod,
    /// PPM iterations (0 for template matching).
    pub iterations: usize,
    /// False when PPM stopped at `max_iters`; the last iterate is still returned.
    pub converged: bool,
    /// `Re z^* H z` after every PPM iterate, starting from the random start.
    pub objective_trace: Vec<f64>,
    /// Synchronize-and-Match: index in the synchronized subset whose rotation
    /// each observation inherited.
    pub neighbors: Option<Vec<usize>>,
}

/// Hermitian matrix of pairwise phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwisePhaseMatrix<T> {
    n: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> PairwisePhaseMatrix<T> {
    /// From explicit relative offsets `d[i][j]` on a grid of `grid_size`.
    pub fn from_offsets(offsets: &[Vec<i64>], grid_size: usize) -> Result<Self> {
        let n = offsets.len();
        let table = PhaseTable::<T>::new(grid_size);
        let mut entries = vec![Complex::new(T::one(), T::zero()); n * n];
        for i in 0..n {
            if offsets[i].len() != n {
                return Err(Error::Dimension { expected: n, actual: offsets[i].len() });
            }
            for j in 0..n {
                if i != j {
                    entries[i * n + j] = table.phase(1, offsets[i][j]).conj();
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.entries[i * self.n + j]
    }

    fn row(&self, i: usize) -> &[Complex<T>] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `H z`.
    pub fn apply(&self, z: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .into_par_iter()
            .map(|i| self.row(i).iter().zip(z).fold(Complex::new(T::zero(), T::zero()), |acc, (h, v)| acc + *h * *v))
            .collect()
    }

    /// `Re z^* H z`.
    pub fn quadratic_form(&self, z: &[Complex<T>]) -> f64 {
        quadratic(z, &self.apply(z))
    }
}

fn quadratic<T: Real>(z: &[Complex<T>], hz: &[Complex<T>]) -> f64 {
    z.iter().zip(hz).map(|(a, b)| (a.conj() * *b).re.as_f64()).sum()
}

/// Grid offset maximizing `Re sum_{k,q} exp(i k theta) v_j conj(v_i)`, i.e. minimizing
/// `sum |v_i - exp(i k theta) v_j|^2`. Ties resolve to the smallest index.
pub fn relative_rotation<T: Real>(v_i: &SteerableCoeffs<T>, v_j: &SteerableCoeffs<T>, grid_size: usize) -> usize {
    v_i.relative_offset(v_j, &PhaseTable::new(grid_size))
}

/// All `N (N - 1) / 2` relative rotations; `O(N^2 (M + L K))` with `K` the largest
/// angular frequency.
pub fn build_pairwise_matrix<S: Alignable>(observations: &[S], grid_size: usize) -> Result<PairwisePhaseMatrix<S::Scalar>> {
    let n = observations.len();
    if n < 2 {
        return Err(Error::Config(format!("synchronization needs at least 2 observations, got {n}")));
    }
    let table = PhaseTable::<S::Scalar>::new(grid_size);
    let upper: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| ((i + 1)..n).map(|j| observations[i].relative_offset(&observations[j], &table)).collect())
        .collect();
    let mut entries = vec![Complex::new(S::Scalar::one(), S::Scalar::zero()); n * n];
    for (i, row) in upper.iter().enumerate() {
        for (dj, &d) in row.iter().enumerate() {
            let j = i + 1 + dj;
            let h = table.phase(1, d as i64).conj();
            entries[i * n + j] = h;
            entries[j * n + i] = h.conj();
        }
    }
    Ok(PairwisePhaseMatrix { n, entries })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpmOptions {
    pub max_iters: usize,
    /// Stop once `||z_{t+1} - z_t|| < tol`.
    pub tol: f64,
}

impl Default for PpmOptions {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-10 }
    }
}

fn phase_of<T: Real>(y: Complex<T>, fallback: Complex<T>) -> Complex<T> {
    let r = y.norm();
    if r > T::zero() && r.is_finite() {
        y / r
    } else {
        fallback
    }
}

/// Grid index nearest to `arg z` (half-way cases round up), in `[0, L)`.
pub fn quantize_phase<T: Real>(z: Complex<T>, grid_size: usize) -> usize {
    let angle = z.im.as_f64().atan2(z.re.as_f64());
    let x = angle * grid_size as f64 / (2.0 * std::f64::consts::PI);
    ((x + 0.5).floor() as i64).rem_euclid(grid_size as i64) as usize
}

/// Projected power method `z <- phase(H z)` from a seeded random unit-modulus start.
///
/// `Re z^* H z` cannot decrease when `H` is positive semidefinite; for
/// measured (indefinite) `H` a step that would lower it is retried as
/// `phase((H + c I) z)` with growing `c`, which never changes the fixed points.
pub fn ppm_solve<T: Real>(h: &PairwisePhaseMatrix<T>, grid_size: usize, options: PpmOptions, seed: u64) -> SyncResult {
    use rand::Rng as _;
    let n = h.len();
    let mut rng = stream_rng(seed, 0);
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|_| {
            let a = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            Complex::new(T::of(a.cos()), T::of(a.sin()))
        })
        .collect();
    let mut hz = h.apply(&z);
    let mut f = quadratic(&z, &hz);
    let mut trace = vec![f];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iters {
        iterations += 1;
        let mut shift = 0.0;
        let (next, next_hz, next_f) = loop {
            let c = T::of(shift);
            let cand: Vec<Complex<T>> =
                z.iter().zip(&hz).map(|(zi, yi)| phase_of(*yi + *zi * c, *zi)).collect();
            let cand_hz = h.apply(&cand);
            let cand_f = quadratic(&cand, &cand_hz);
            if cand_f >= f || shift > 4.0 * n as f64 {
                break (cand, cand_hz, cand_f);
            }
            shift = if shift == 0.0 { n as f64 / 64.0 } else { 2.0 * shift };
        };
        if next_f < f {
            // Rounding-level stall even with the largest shift: keep the current iterate.
            converged = true;
            break;
        }
        let step: f64 = next.iter().zip(&z).map(|(a, b)| (*a - *b).norm_sqr().as_f64()).sum::<f64>().sqrt();
        z = next;
        hz = next_hz;
        f = next_f;
        trace.push(f);
        if step < options.tol {
            converged = true;
            break;
        }
    }

    SyncResult {
        rotation_indices: z.iter().map(|zi| quantize_phase(*zi, grid_size)).collect(),
        grid_size,
        method: SyncMethod::Ppm,
        iterations,
        converged,
        objective_trace: trace,
        neighbors: None,
    }
}

/// Pairwise matrix plus PPM over all observations.
pub fn ppm_synchronize<S: Alignable>(observations: &[S], grid_size: usize, options: PpmOptions, seed: u64) -> Result<SyncResult> {
    let h = build_pairwise_matrix(observations, grid_size)?;
    Ok(ppm_solve(&h, grid_size, options, seed))
}

/// Rotation of every observation relative to `reference`; `O(N (M + L K))`.
pub fn template_match<S: Alignable>(observations: &[S], reference: &S, grid_size: usize) -> SyncResult {
    let table = PhaseTable::<S::Scalar>::new(grid_size);
    let rotation_indices = observations.par_iter().map(|o| reference.relative_offset(o, &table)).collect();
    SyncResult {
        rotation_indices,
        grid_size,
        method: SyncMethod::TemplateMatching,
        iterations: 0,
        converged: true,
        objective_trace: Vec::new(),
        neighbors: None,
    }
}

/// Per-signal argmax of the circular cross-correlation
/// `R[l] = sum_n reference[n] y[(n + l) mod L]`; ties resolve to the smallest shift.
pub fn template_match_1d<T: Real>(signals: &[Vec<T>], reference: &[T]) -> Vec<usize> {
    let table = PhaseTable::<T>::new(reference.len());
    let reference = reference.to_vec();
    signals.par_iter().map(|y| reference.relative_offset(y, &table)).collect()
}

/// Observations rotated back by their estimates.
pub fn align<S: Alignable>(observations: &[S], sync: &SyncResult) -> Result<Vec<S>> {
    if observations.len() != sync.rotation_indices.len() {
        return Err(Error::Dimension { expected: observations.len(), actual: sync.rotation_indices.len() });
    }
    let table = PhaseTable::<S::Scalar>::new(sync.grid_size);
    Ok(observations
        .par_iter()
        .zip(&sync.rotation_indices)
        .map(|(o, &l)| o.rotated_by(-(l as i64), &table))
        .collect())
}

/// `a_hat = (1/N) sum_i exp(i k theta_hat_i) o v_i`.
pub fn align_and_average<T: Real>(observations: &[SteerableCoeffs<T>], sync: &SyncResult) -> Result<SteerableCoeffs<T>> {
    let aligned = align(observations, sync)?;
    mean_coeffs(&aligned)
}

/// 1-D counterpart of [`align_and_average`].
pub fn align_and_average_1d<T: Real>(signals: &[Vec<T>], sync: &SyncResult) -> Result<Vec<T>> {
    let aligned = align(signals, sync)?;
    let len = aligned.first().map_or(0, Vec::len);
    let mut acc = vec![T::zero(); len];
    for y in &aligned {
        for (a, v) in acc.iter_mut().zip(y) {
            *a += *v;
        }
    }
    let n = T::of_usize(aligned.len().max(1));
    Ok(acc.into_iter().map(|a| a / n).collect())
}

/// Entrywise mean, summed in observation order.
pub fn mean_coeffs<T: Real>(items: &[SteerableCoeffs<T>]) -> Result<SteerableCoeffs<T>> {
    let first = items.first().ok_or_else(|| Error::Config("cannot average zero observations".into()))?;
    let mut acc = vec![Complex::new(T::zero(), T::zero()); first.len()];
    for item in items {
        if !item.same_index(first) {
            return Err(Error::IndexMismatch);
        }
        for (a, v) in acc.iter_mut().zip(item.values()) {
            *a += *v;
        }
    }
    let n = T::of_usize(items.len());
    Ok(first.with_values(acc.into_iter().map(|a| a / n).collect()))
}

fn nearest<S: Alignable>(target: &S, pool: &[S], exclude: Option<usize>) -> usize {
    let mut best = (usize::MAX, S::Scalar::infinity());
    for (n, cand) in pool.iter().enumerate() {
        if Some(n) == exclude {
            continue;
        }
        let d = target.distance_sqr(cand);
        if d < best.1 || best.0 == usize::MAX {
            best = (n, d);
        }
    }
    best.0
}

/// PPM on the first `partition` observations, then every observation takes the
/// rotation of its nearest (squared Euclidean) neighbor in that subset; members
/// of the subset exclude themselves. `O(P^2 (M + L K) + N P M)`.
pub fn synchronize_and_match<S: Alignable>(
    observations: &[S],
    partition: usize,
    grid_size: usize,
    options: PpmOptions,
    seed: u64,
) -> Result<SyncResult> {
    let n = observations.len();
    if partition < 2 || partition > n {
        return Err(Error::Config(format!("partition size {partition} outside [2, {n}]")));
    }
    let subset = &observations[..partition];
    let ppm = ppm_synchronize(subset, grid_size, options, seed)?;
    let neighbors: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| nearest(&observations[i], subset, (i < partition).then_some(i)))
        .collect();
    Ok(SyncResult {
        rotation_indices: neighbors.iter().map(|&m| ppm.rotation_indices[m]).collect(),
        grid_size,
        method: SyncMethod::SynchronizeAndMatch { partition },
        iterations: ppm.iterations,
        converged: ppm.converged,
        objective_trace: ppm.objective_trace,
        neighbors: Some(neighbors),
    })
}

/// Dispatches on `method`; template matching uses the first observation as reference.
pub fn synchronize<S: Alignable>(observations: &[S], method: SyncMethod, grid_size: usize, seed: u64) -> Result<SyncResult> {
    match method {
        SyncMethod::TemplateMatching => {
            let reference = observations.first().ok_or_else(|| Error::Config("no observations".into()))?;
            Ok(template_match(observations, reference, grid_size))
        }
        SyncMethod::Ppm => ppm_synchronize(observations, grid_size, PpmOptions::default(), seed),
        SyncMethod::SynchronizeAndMatch { partition } => {
            synchronize_and_match(observations, partition, grid_size, PpmOptions::default(), seed)
        }
    }
}

/// CSV with header `index,rotation_index,method`.
pub fn write_sync_csv<W: Write>(result: &SyncResult, mut w: W) -> Result<()> {
    writeln!(w, "index,rotation_index,method")?;
    for (i, l) in result.rotation_indices.iter().enumerate() {
        writeln!(w, "{i},{l},{}", result.method.tag())?;
    }
    Ok(())
}
