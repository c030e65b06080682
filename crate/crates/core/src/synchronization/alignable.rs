use num_complex::Complex;

use crate::rotation::PhaseTable;
use crate::steerable_basis::SteerableCoeffs;
use crate::Real;

/// Something a cyclic rotation group acts on.
pub trait Alignable: Sized + Send + Sync {
    type Scalar: Real;

    /// Grid offset `d` for which `other` best matches `self` rotated by `d`.
    fn relative_offset(&self, other: &Self, table: &PhaseTable<Self::Scalar>) -> usize;

    /// Squared Euclidean distance of the raw representations.
    fn distance_sqr(&self, other: &Self) -> Self::Scalar;

    /// `self` rotated by grid offset `l`.
    fn rotated_by(&self, l: i64, table: &PhaseTable<Self::Scalar>) -> Self;
}

impl<T: Real> Alignable for SteerableCoeffs<T> {
    type Scalar = T;

    fn relative_offset(&self, other: &Self, table: &PhaseTable<T>) -> usize {
        // Re sum_j e^{i k_j theta} other_j conj(self_j), grouped by k.
        let kmax = self.index().max_angular() as usize;
        let mut per_k = vec![Complex::new(T::zero(), T::zero()); kmax + 1];
        for ((a, b), &k) in self.values().iter().zip(other.values()).zip(self.angular_index()) {
            per_k[k as usize] += *b * a.conj();
        }
        let mut best = (0, T::neg_infinity());
        for l in 0..table.grid_size() {
            let mut s = T::zero();
            for (k, c) in per_k.iter().enumerate() {
                let p = table.phase(k as u32, l as i64);
                s += p.re * c.re - p.im * c.im;
            }
            if s > best.1 {
                best = (l, s);
            }
        }
        best.0
    }

    fn distance_sqr(&self, other: &Self) -> T {
        SteerableCoeffs::distance_sqr(self, other)
    }

    fn rotated_by(&self, l: i64, table: &PhaseTable<T>) -> Self {
        self.rotated_grid(l, table)
    }
}

/// Real signals under cyclic shifts; the grid size is the signal length.
impl<T: Real> Alignable for Vec<T> {
    type Scalar = T;

    fn relative_offset(&self, other: &Self, table: &PhaseTable<T>) -> usize {
        let len = self.len();
        debug_assert_eq!(table.grid_size(), len);
        let mut best = (0, T::neg_infinity());
        for l in 0..len {
            let mut r = T::zero();
            for n in 0..len {
                let m = if n + l >= len { n + l - len } else { n + l };
                r += self[n] * other[m];
            }
            if r > best.1 {
                best = (l, r);
            }
        }
        best.0
    }

    fn distance_sqr(&self, other: &Self) -> T {
        self.iter().zip(other).map(|(a, b)| (*a - *b) * (*a - *b)).sum()
    }

    fn rotated_by(&self, l: i64, _table: &PhaseTable<T>) -> Self {
        crate::mra_model::circular_shift(self, l)
    }
}
