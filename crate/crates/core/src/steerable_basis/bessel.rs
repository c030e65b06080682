//! Integer-order Bessel functions of the first kind and their positive zeros.

use crate::{Error, Result};

/// `J_0(x), ..., J_{n_max}(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 sum_k J_{2k} = 1`.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = n_max.max(ax.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    m += m % 2;

    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order <= n_max {
            out[order] = cur;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_orders(n, x)[n]
}

const ROOT_TOL: f64 = 1e-12;

/// Lazily extended table of positive zeros `j_{k,q}` (`q` from 1).
///
/// Zeros of `J_0` come from a sign scan; higher orders use interlacing,
/// `j_{k-1,q} < j_{k,q} < j_{k-1,q+1}`, so each zero is bisected inside a
/// bracket known to hold exactly one root.
#[derive(Debug, Default, Clone)]
pub struct BesselZeros {
    rows: Vec<Vec<f64>>,
}

impl BesselZeros {
    pub fn new() -> Self {
        Self::default()
    }

    /// `j_{k,q}` for `q >= 1`.
    pub fn zero(&mut self, k: usize, q: usize) -> Result<f64> {
        assert!(q >= 1, "zeros are numbered from 1");
        while self.rows.len() <= k {
            self.rows.push(Vec::new());
        }
        while self.rows[k].len() < q {
            let next_q = self.rows[k].len() + 1;
            let root = if k == 0 {
                self.next_zero_order0(next_q)?
            } else {
                let lo = self.zero(k - 1, next_q)?;
                let hi = self.zero(k - 1, next_q + 1)?;
                bisect(k, lo, hi).ok_or(Error::BesselRoot { k, q: next_q })?
            };
            self.rows[k].push(root);
        }
        Ok(self.rows[k][q - 1])
    }

    /// All zeros of `J_k` not exceeding `limit`.
    pub fn zeros_below(&mut self, k: usize, limit: f64) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        let mut q = 1;
        loop {
            let z = self.zero(k, q)?;
            if z > limit {
                return Ok(out);
            }
            out.push(z);
            q += 1;
        }
    }

    fn next_zero_order0(&self, q: usize) -> Result<f64> {
        // Consecutive zeros of J_0 are more than 2.4 apart.
        const STEP: f64 = 0.5;
        let mut a = self.rows[0].last().map_or(STEP, |z| z + STEP);
        let mut fa = bessel_j(0, a);
        for _ in 0..10_000 {
            let b = a + STEP;
            let fb = bessel_j(0, b);
            if fa == 0.0 {
                return Ok(a);
            }
            if fa.signum() != fb.signum() {
                return bisect(0, a, b).ok_or(Error::BesselRoot { k: 0, q });
            }
            a = b;
            fa = fb;
        }
        Err(Error::BesselRoot { k: 0, q })
    }
}

fn bisect(order: usize, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = bessel_j(order, lo);
    let fhi = bessel_j(order, hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = bessel_j(order, mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scipy.special.jv / jn_zeros.
    #[test]
    fn matches_reference_values() {
        let cases = [
            (0, 1.0, 0.7651976865579666),
            (1, 2.5, 0.4970941024642741),
            (5, 10.0, -0.2340615281867936),
            (12, 3.0, 2.275725448320573e-07),
            (0, 50.0, 0.0558123276692518),
            (20, 60.5, 0.1031102349719739),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 1e-13 * want.abs().max(1.0), "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn negative_argument_parity() {
        let pos = bessel_j_orders(4, 2.0);
        let neg = bessel_j_orders(4, -2.0);
        for n in 0..=4 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((neg[n] - sign * pos[n]).abs() < 1e-15);
        }
    }

    #[test]
    fn zeros_match_reference() {
        let mut z = BesselZeros::new();
        let cases = [
            (0, 1, 2.404825557695773),
            (0, 2, 5.520078110286311),
            (1, 1, 3.8317059702075125),
            (5, 3, 15.700174079711671),
            (10, 2, 18.433463666966583),
        ];
        for (k, q, want) in cases {
            let got = z.zero(k, q).unwrap();
            assert!((got - want).abs() < 1e-10, "j_({k},{q}) = {got}, want {want}");
            assert!(bessel_j(k, got).abs() < 1e-11);
        }
    }

    #[test]
    fn zeros_interlace() {
        let mut z = BesselZeros::new();
        for k in 1..8 {
            for q in 1..6 {
                let a = z.zero(k - 1, q).unwrap();
                let b = z.zero(k, q).unwrap();
                let c = z.zero(k - 1, q + 1).unwrap();
                assert!(a < b && b < c);
            }
        }
    }
}
