//! The rotation grid `{2 pi l / L}` and probability mass functions over windows of it.

use num_complex::Complex;
use rand::Rng;

use crate::{Error, Real, Result};

/// `exp(i 2 pi m / L)` for `m = 0..L`, so grid phases are looked up instead of
/// recomputed (and grid rotations compose exactly).
#[derive(Debug, Clone)]
pub struct PhaseTable<T> {
    table: Vec<Complex<T>>,
}

impl<T: Real> PhaseTable<T> {
    pub fn new(grid_size: usize) -> Self {
        assert!(grid_size > 0, "rotation grid must be non-empty");
        let table = (0..grid_size)
            .map(|m| {
                let angle = 2.0 * std::f64::consts::PI * m as f64 / grid_size as f64;
                Complex::new(T::of(angle.cos()), T::of(angle.sin()))
            })
            .collect();
        Self { table }
    }

    pub fn grid_size(&self) -> usize {
        self.table.len()
    }

    /// `exp(i 2 pi k l / L)`.
    #[inline]
    pub fn phase(&self, k: u32, l: i64) -> Complex<T> {
        let n = self.table.len() as i64;
        self.table[((k as i64 % n) * l.rem_euclid(n)).rem_euclid(n) as usize]
    }
}

/// Grid angle in radians for index `l`.
pub fn grid_angle(l: i64, grid_size: usize) -> f64 {
    2.0 * std::f64::consts::PI * l as f64 / grid_size as f64
}

/// Signed representative of a grid index in `[-floor(L/2), ceil(L/2) - 1]`.
pub fn centered(index: i64, grid_size: usize) -> i64 {
    let n = grid_size as i64;
    let r = index.rem_euclid(n);
    if r >= n - n / 2 {
        r - n
    } else {
        r
    }
}

/// First offset of the centered window of width `bw`.
pub fn centered_window_offset(bw: usize) -> i64 {
    -((bw / 2) as i64)
}

/// A PMF over the contiguous window of grid offsets
/// `window_offset, window_offset + 1, ..., window_offset + len - 1` (mod `L`).
#[derive(Debug, Clone, PartialEq)]
pub struct RotationDistribution<T> {
    grid_size: usize,
    window_offset: i64,
    pmf: Vec<T>,
}

impl<T: Real> RotationDistribution<T> {
    /// Validates an already-normalized PMF.
    pub fn new(grid_size: usize, window_offset: i64, pmf: Vec<T>) -> Result<Self> {
        Self::check_shape(grid_size, &pmf)?;
        let mut sum = 0.0;
        for p in &pmf {
            let p = p.as_f64();
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Distribution(format!("entry {p} is not a probability")));
            }
            sum += p;
        }
        let tol = 1e-12_f64.max(100.0 * T::epsilon().as_f64() * pmf.len() as f64);
        if (sum - 1.0).abs() > tol {
            return Err(Error::Distribution(format!("mass sums to {sum}")));
        }
        Ok(Self { grid_size, window_offset, pmf })
    }

    /// Normalizes non-negative weights into a PMF.
    pub fn from_weights(grid_size: usize, window_offset: i64, weights: Vec<T>) -> Result<Self> {
        Self::check_shape(grid_size, &weights)?;
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::Distribution("weights must be finite and non-negative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if total <= T::zero() {
            return Err(Error::Distribution("weights have no mass".into()));
        }
        let pmf = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { grid_size, window_offset, pmf })
    }

    fn check_shape(grid_size: usize, pmf: &[T]) -> Result<()> {
        if grid_size == 0 {
            return Err(Error::Distribution("empty rotation grid".into()));
        }
        if pmf.is_empty() || pmf.len() > grid_size {
            return Err(Error::Distribution(format!(
                "window of {} bins on a grid of {grid_size}",
                pmf.len()
            )));
        }
        Ok(())
    }

    /// Uniform over the whole grid, stored on the centered window.
    pub fn uniform(grid_size: usize) -> Self {
        Self::uniform_window(grid_size, grid_size)
    }

    /// Uniform over the centered window of width `bw`.
    pub fn uniform_window(grid_size: usize, bw: usize) -> Self {
        assert!(bw >= 1 && bw <= grid_size);
        let p = T::one() / T::of_usize(bw);
        Self { grid_size, window_offset: centered_window_offset(bw), pmf: vec![p; bw] }
    }

    /// Point mass at offset 0 stored on the centered window of width `bw`.
    pub fn delta(grid_size: usize, bw: usize) -> Self {
        assert!(bw >= 1 && bw <= grid_size);
        let offset = centered_window_offset(bw);
        let mut pmf = vec![T::zero(); bw];
        pmf[(-offset) as usize] = T::one();
        Self { grid_size, window_offset: offset, pmf }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn window_offset(&self) -> i64 {
        self.window_offset
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    /// Offsets covered by the window, in storage order.
    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.pmf.len() as i64).map(move |i| self.window_offset + i)
    }

    pub fn same_window(&self, other: &Self) -> bool {
        self.grid_size == other.grid_size
            && self.window_offset == other.window_offset
            && self.pmf.len() == other.pmf.len()
    }

    /// Probability of grid offset `l` (any integer, reduced mod `L`); zero outside the window.
    pub fn prob(&self, l: i64) -> T {
        let n = self.grid_size as i64;
        let i = (l - self.window_offset).rem_euclid(n) as usize;
        self.pmf.get(i).copied().unwrap_or_else(T::zero)
    }

    /// Re-expresses the PMF on another window, renormalizing whatever mass falls inside it.
    pub fn restricted(&self, window_offset: i64, len: usize) -> Result<Self> {
        let weights = (0..len as i64).map(|i| self.prob(window_offset + i)).collect();
        Self::from_weights(self.grid_size, window_offset, weights)
    }

    /// Distribution of `-l` when `l` follows `self`.
    pub fn reflected(&self) -> Self {
        let len = self.pmf.len() as i64;
        let window_offset = -(self.window_offset + len - 1);
        let pmf = self.pmf.iter().rev().copied().collect();
        Self { grid_size: self.grid_size, window_offset, pmf }
    }

    /// Mass on the centered window of width `bw`.
    pub fn centered_mass(&self, bw: usize) -> T {
        let start = centered_window_offset(bw);
        (0..bw as i64).map(|i| self.prob(start + i)).sum()
    }

    /// Mass on offsets `-radius..=radius`.
    pub fn mass_within(&self, radius: usize) -> T {
        let r = radius as i64;
        (-r..=r).map(|l| self.prob(l)).sum()
    }

    /// Draws a grid index in `[0, L)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, p) in self.pmf.iter().enumerate() {
            let p = p.as_f64();
            if p > 0.0 {
                last = i;
            }
            acc += p;
            if u < acc {
                return (self.window_offset + i as i64).rem_euclid(self.grid_size as i64) as usize;
            }
        }
        (self.window_offset + last as i64).rem_euclid(self.grid_size as i64) as usize
    }

    pub fn cast<U: Real>(&self) -> RotationDistribution<U> {
        RotationDistribution {
            grid_size: self.grid_size,
            window_offset: self.window_offset,
            pmf: self.pmf.iter().map(|p| U::of(p.as_f64())).collect(),
        }
    }
}
