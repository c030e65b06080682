use crate::{Error, Real, Result};

/// Square pixel image, row-major. Row 0 is the top edge; the rotation center is
/// pixel `((size - 1) / 2, (size - 1) / 2)` in continuous coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    size: usize,
    pixels: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn zeros(size: usize) -> Self {
        Self { size, pixels: vec![T::zero(); size * size] }
    }

    pub fn from_pixels(size: usize, pixels: Vec<T>) -> Result<Self> {
        if pixels.len() != size * size {
            return Err(Error::Dimension { expected: size * size, actual: pixels.len() });
        }
        Ok(Self { size, pixels })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [T] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.pixels[row * self.size + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.pixels[row * self.size + col] = value;
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.pixels.iter().map(|p| *p * *p).sum()
    }

    /// Counter-clockwise rotation by `turns` quarter turns; exact on the pixel grid.
    pub fn rotated_quarter_turns(&self, turns: i32) -> Self {
        let n = self.size;
        let mut out = self.clone();
        for _ in 0..turns.rem_euclid(4) {
            let src = out.clone();
            for r in 0..n {
                for c in 0..n {
                    out.set(r, c, src.get(c, n - 1 - r));
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { size: self.size, pixels: self.pixels.iter().map(|p| *p * s).collect() }
    }
}
