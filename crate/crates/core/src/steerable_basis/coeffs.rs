use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex;

use crate::rotation::PhaseTable;
use crate::{Error, Real, Result};

/// Angular/radial labels `(k, q)` of a coefficient vector. Only `k >= 0` is
/// stored; the `-k` coefficients of a real image are the conjugates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffIndex {
    angular: Vec<u32>,
    radial: Vec<u32>,
    max_angular: u32,
}

impl CoeffIndex {
    pub fn new(angular: Vec<u32>, radial: Vec<u32>) -> Result<Self> {
        if angular.len() != radial.len() {
            return Err(Error::Dimension { expected: angular.len(), actual: radial.len() });
        }
        let mut seen = HashMap::with_capacity(angular.len());
        for (j, (&k, &q)) in angular.iter().zip(&radial).enumerate() {
            if seen.insert((k, q), j).is_some() {
                return Err(Error::Config(format!("duplicate coefficient label (k={k}, q={q})")));
            }
        }
        let max_angular = angular.iter().copied().max().unwrap_or(0);
        Ok(Self { angular, radial, max_angular })
    }

    pub fn len(&self) -> usize {
        self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angular.is_empty()
    }

    pub fn angular(&self) -> &[u32] {
        &self.angular
    }

    pub fn radial(&self) -> &[u32] {
        &self.radial
    }

    pub fn max_angular(&self) -> u32 {
        self.max_angular
    }

    /// Weight of entry `j` in the full (`k` and `-k`) representation: 1 for `k = 0`, else 2.
    #[inline]
    pub fn multiplicity(&self, j: usize) -> u32 {
        if self.angular[j] == 0 {
            1
        } else {
            2
        }
    }

    pub fn position(&self, k: u32, q: u32) -> Option<usize> {
        self.angular.iter().zip(&self.radial).position(|(&a, &r)| a == k && r == q)
    }
}

/// Coefficients of one image (or observation) in a steerable basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerableCoeffs<T> {
    values: Vec<Complex<T>>,
    index: Arc<CoeffIndex>,
}

impl<T: Real> SteerableCoeffs<T> {
    pub fn new(values: Vec<Complex<T>>, index: Arc<CoeffIndex>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(Error::Dimension { expected: index.len(), actual: values.len() });
        }
        Ok(Self { values, index })
    }

    pub fn zeros(index: Arc<CoeffIndex>) -> Self {
        Self { values: vec![Complex::new(T::zero(), T::zero()); index.len()], index }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn index(&self) -> &Arc<CoeffIndex> {
        &self.index
    }

    pub fn angular_index(&self) -> &[u32] {
        self.index.angular()
    }

    pub fn radial_index(&self) -> &[u32] {
        self.index.radial()
    }

    pub fn same_index(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.index, &other.index) || *self.index == *other.index
    }

    /// Copy with the same labels and new values.
    pub fn with_values(&self, values: Vec<Complex<T>>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self { values, index: Arc::clone(&self.index) }
    }

    /// Plain `sum |v_j|^2` over the stored entries.
    pub fn norm_sqr(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Squared norm of the full real-image representation (`k > 0` entries counted twice),
    /// which equals the pixel-domain Frobenius norm for an orthonormal basis.
    pub fn full_norm_sqr(&self) -> T {
        self.values
            .iter()
            .zip(self.index.angular())
            .map(|(v, &k)| if k == 0 { v.norm_sqr() } else { v.norm_sqr() + v.norm_sqr() })
            .sum()
    }

    /// Rotation by an arbitrary angle: entry `j` is multiplied by `exp(-i k_j angle)`.
    pub fn rotated(&self, angle: f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.index.angular())
            .map(|(v, &k)| {
                let phi = -(k as f64) * angle;
                *v * Complex::new(T::of(phi.cos()), T::of(phi.sin()))
            })
            .collect();
        self.with_values(values)
    }

    /// Rotation by grid angle `2 pi l / L` using exact table phases.
    pub fn rotated_grid(&self, l: i64, table: &PhaseTable<T>) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.index.angular())
            .map(|(v, &k)| *v * table.phase(k, l).conj())
            .collect();
        self.with_values(values)
    }

    /// `sum_j |self_j - other_j|^2`.
    pub fn distance_sqr(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(a, b)| (*a - *b).norm_sqr()).sum()
    }

    pub fn full_distance_sqr(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.index.angular())
            .map(|((a, b), &k)| {
                let d = (*a - *b).norm_sqr();
                if k == 0 {
                    d
                } else {
                    d + d
                }
            })
            .sum()
    }

    pub fn scaled(&self, s: T) -> Self {
        self.with_values(self.values.iter().map(|v| *v * s).collect())
    }

    pub fn cast<U: Real>(&self) -> SteerableCoeffs<U> {
        SteerableCoeffs {
            values: self
                .values
                .iter()
                .map(|v| Complex::new(U::of(v.re.as_f64()), U::of(v.im.as_f64())))
                .collect(),
            index: Arc::clone(&self.index),
        }
    }
}

/// `coeffs` rotated by `angle` radians.
pub fn rotate_coeffs<T: Real>(coeffs: &SteerableCoeffs<T>, angle: f64) -> SteerableCoeffs<T> {
    coeffs.rotated(angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn index(ks: &[u32]) -> Arc<CoeffIndex> {
        let qs = (0..ks.len() as u32).collect();
        Arc::new(CoeffIndex::new(ks.to_vec(), qs).unwrap())
    }

    #[test]
    fn rotation_by_pi_alternates_sign() {
        let c = SteerableCoeffs::new(vec![Complex::new(1.0, 0.0); 3], index(&[0, 1, 2])).unwrap();
        let r = rotate_coeffs(&c, PI);
        let expect = [1.0, -1.0, 1.0];
        for (v, e) in r.values().iter().zip(expect) {
            assert!((v - Complex::new(e, 0.0)).norm() < 1e-15);
        }
        assert_eq!(rotate_coeffs(&c, 0.0), c);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(CoeffIndex::new(vec![0, 1, 1], vec![1, 1, 1]).is_err());
        assert!(CoeffIndex::new(vec![0, 1], vec![1]).is_err());
    }

    #[test]
    fn grid_rotation_matches_continuous() {
        let idx = index(&[0, 1, 3, 7]);
        let c = SteerableCoeffs::new(
            vec![
                Complex::new(0.3, 0.0),
                Complex::new(-1.0, 0.2),
                Complex::new(0.5, 0.5),
                Complex::new(0.1, -2.0),
            ],
            idx,
        )
        .unwrap();
        let table = PhaseTable::new(36);
        let a = c.rotated_grid(-5, &table);
        let b = c.rotated(2.0 * PI * -5.0 / 36.0);
        assert!(a.distance_sqr(&b) < 1e-28);
    }

    proptest! {
        #[test]
        fn rotation_group_inverse(angle in -10.0f64..10.0, vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 6)) {
            let c = SteerableCoeffs::new(
                vals.into_iter().map(|(a, b)| Complex::new(a, b)).collect(),
                index(&[0, 1, 2, 3, 5, 8]),
            ).unwrap();
            let back = c.rotated(angle).rotated(-angle);
            prop_assert!(back.distance_sqr(&c).sqrt() < 1e-12);
            prop_assert!((c.rotated(angle).full_norm_sqr() - c.full_norm_sqr()).abs() < 1e-10);
        }
    }
}
