use std::sync::Arc;

use num_complex::Complex;
use rand::Rng as _;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::*;
use crate::steerable_basis::CoeffIndex;

fn random_truth(seed: u64) -> SteerableCoeffs<f64> {
    let ks = vec![0, 0, 1, 1, 2, 3, 5];
    let qs = vec![1, 2, 1, 2, 1, 1, 1];
    let index = Arc::new(CoeffIndex::new(ks.clone(), qs).unwrap());
    let mut rng = stream_rng(seed, 7);
    let values = ks
        .iter()
        .map(|&k| {
            let re = rng.random_range(-1.0..1.0);
            let im = if k == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
            Complex::new(re, im)
        })
        .collect();
    SteerableCoeffs::new(values, index).unwrap()
}

#[test]
fn noiseless_observations_are_grid_rotations() {
    let truth = random_truth(1);
    let dist = RotationDistribution::uniform(36);
    for seed in 0..5 {
        let data = generate_2d(&truth, 40, 0.0, 36, &dist, seed).unwrap();
        let table = PhaseTable::new(36);
        for (v, &l) in data.observations.iter().zip(&data.rotations) {
            assert!(l < 36);
            assert!(v.distance_sqr(&truth.rotated_grid(l as i64, &table)) < 1e-28);
            assert!(relative_error_2d(v, &truth, 36).unwrap() < 1e-12);
        }
    }
}

#[test]
fn generation_is_deterministic() {
    let truth = random_truth(2);
    let dist = RotationDistribution::uniform(12);
    let a = generate_2d(&truth, 50, 0.7, 12, &dist, 99).unwrap();
    let b = generate_2d(&truth, 50, 0.7, 12, &dist, 99).unwrap();
    assert_eq!(a, b);
    let c = generate_2d(&truth, 50, 0.7, 12, &dist, 100).unwrap();
    assert_ne!(a.observations, c.observations);
}

#[test]
fn uniform_rotations_pass_chi_square() {
    let truth = random_truth(3);
    let l = DEFAULT_GRID_SIZE;
    let n = 5000;
    let data = generate_2d(&truth, n, 1.0, l, &RotationDistribution::uniform(l), 2024).unwrap();
    let mut counts = vec![0usize; l];
    for &r in &data.rotations {
        counts[r] += 1;
    }
    let expected = n as f64 / l as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((l - 1) as f64).unwrap().inverse_cdf(0.95);
    assert!(stat < critical, "chi2 {stat} >= {critical}");
}

#[test]
fn complex_noise_has_total_variance_sigma_squared() {
    let truth = random_truth(4);
    let sigma = 1.7;
    let data = generate_2d(&truth, 20_000, sigma, 36, &RotationDistribution::uniform(36), 5).unwrap();
    let (mut re, mut im, mut count) = (0.0, 0.0, 0usize);
    for i in 0..data.len() {
        for e in data.noise(i).values() {
            re += e.re * e.re;
            im += e.im * e.im;
            count += 1;
        }
    }
    assert!(count >= 100_000);
    let total = (re + im) / count as f64;
    assert!((total / (sigma * sigma) - 1.0).abs() < 0.05);
    assert!((re / im - 1.0).abs() < 0.05);
}

#[test]
fn signals_have_unit_variance_entries() {
    let mut energy = 0.0;
    for seed in 0..100 {
        let d = generate_1d::<f64>(21, 1, 0.0, seed).unwrap();
        energy += d.truth.iter().map(|x| x * x).sum::<f64>();
    }
    assert!((energy / 100.0 / 21.0 - 1.0).abs() < 0.1);
}

#[test]
fn noiseless_signals_are_cyclic_shifts() {
    let d = generate_1d::<f64>(21, 30, 0.0, 8).unwrap();
    for (y, &s) in d.signals.iter().zip(&d.shifts) {
        assert!(s < 21);
        assert_eq!(*y, circular_shift(&d.truth, s as i64));
    }
    assert!(generate_1d::<f64>(1, 3, 1.0, 0).is_err());
}

#[test]
fn circular_shift_convention() {
    let x = [1, 2, 3, 4, 5];
    assert_eq!(circular_shift(&x, 1), vec![5, 1, 2, 3, 4]);
    assert_eq!(circular_shift(&x, -1), vec![2, 3, 4, 5, 1]);
    assert_eq!(circular_shift(&x, 5), x.to_vec());
}

#[test]
fn snr_definition() {
    let img = Image::from_pixels(4, vec![1.0; 16]).unwrap();
    assert!((snr(&img, 1.0) - 1.0).abs() < 1e-15);
    assert!((snr(&img, 2.0) - 0.25).abs() < 1e-15);
    assert!(snr(&img, 0.0).is_infinite());
    assert!((snr(&img, sigma_for_snr(&img, 0.1)) - 0.1).abs() < 1e-12);
}

#[test]
fn relative_error_2d_examples() {
    let truth = random_truth(5);
    let rotated = truth.rotated(2.0 * std::f64::consts::PI * 7.0 / 36.0);
    assert!(relative_error_2d(&rotated, &truth, 36).unwrap() < 1e-12);
    let zero = SteerableCoeffs::zeros(Arc::clone(truth.index()));
    assert!((relative_error_2d(&zero, &truth, 36).unwrap() - 1.0).abs() < 1e-15);
    assert!(relative_error_2d(&truth, &zero, 36).is_err());
}

#[test]
fn relative_error_2d_orthogonal_perturbation() {
    // Gram-Schmidt a perturbation against every grid rotation of the truth, in the
    // real inner product of the full representation. Then for every rotation
    // ||R truth + delta - truth||^2 = ||R truth - truth||^2 + ||delta||^2, minimized at R = I.
    let l = 8;
    let truth = random_truth(6);
    let table = PhaseTable::new(l);
    let full = |c: &SteerableCoeffs<f64>| -> Vec<f64> {
        c.values()
            .iter()
            .zip(c.angular_index())
            .flat_map(|(v, &k)| {
                let w = if k == 0 { 1.0 } else { 2f64.sqrt() };
                [w * v.re, w * v.im]
            })
            .collect()
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in 0..l {
        let mut u = full(&truth.rotated_grid(r as i64, &table));
        for b in &basis {
            let d: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            basis.push(u.into_iter().map(|x| x / n).collect());
        }
    }
    let mut rng = stream_rng(6, 1);
    let mut delta = full(&random_truth(60));
    delta.iter_mut().for_each(|x| *x += rng.random_range(-0.1..0.1));
    for b in &basis {
        let d: f64 = delta.iter().zip(b).map(|(x, y)| x * y).sum();
        delta.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
    // Imaginary part of k = 0 entries must stay zero to remain a real image.
    let scale = 0.05 / delta.iter().map(|x| x * x).sum::<f64>().sqrt();
    let values: Vec<Complex<f64>> = truth
        .values()
        .iter()
        .zip(truth.angular_index())
        .enumerate()
        .map(|(j, (v, &k))| {
            let w = if k == 0 { 1.0 } else { 2f64.sqrt() };
            *v + Complex::new(delta[2 * j], delta[2 * j + 1]) * (scale / w)
        })
        .collect();
    let estimate = truth.with_values(values);
    let delta_norm = estimate.full_distance_sqr(&truth).sqrt();
    let expect = delta_norm / truth.full_norm_sqr().sqrt();
    let got = relative_error_2d(&estimate, &truth, l).unwrap();
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
}

#[test]
fn relative_error_1d_examples() {
    let d = generate_1d::<f64>(13, 1, 0.0, 3).unwrap();
    let x = &d.truth;
    assert!(relative_error_1d(&circular_shift(x, 3), x).unwrap() < 1e-15);
    assert!((relative_error_1d(&vec![0.0; 13], x).unwrap() - 1.0).abs() < 1e-15);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let brute = (0..13)
        .map(|s| {
            let y = circular_shift(&neg, s);
            y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / norm
        })
        .fold(f64::INFINITY, f64::min);
    assert!((relative_error_1d(&neg, x).unwrap() - brute).abs() < 1e-14);
}

#[test]
fn synthetic_images() {
    let spec = SyntheticImageSpec { blobs: 0, ..SyntheticImageSpec::with_seed(1) };
    let zero: Image<f64> = make_synthetic_image(&spec, 33);
    assert!(zero.pixels().iter().all(|p| *p == 0.0));

    let spec = SyntheticImageSpec { blobs: 5, ..SyntheticImageSpec::with_seed(4) };
    let a: Image<f64> = make_synthetic_image(&spec, 33);
    let b: Image<f64> = make_synthetic_image(&spec, 33);
    assert_eq!(a, b);
    assert!((a.frobenius_norm_sqr().sqrt() - 33.0).abs() < 1e-12);
    let unit: Image<f64> = make_synthetic_image(&SyntheticImageSpec { target_norm: Some(1.0), ..spec.clone() }, 33);
    assert!((unit.frobenius_norm_sqr().sqrt() - 1.0).abs() < 1e-12);
    let c = 16.0;
    for row in 0..33 {
        for col in 0..33 {
            let (r, _) = crate::steerable_basis::pixel_polar(33, row, col);
            if r > c + 1e-9 {
                assert_eq!(a.get(row, col), 0.0);
            }
        }
    }
}

#[test]
fn containers_round_trip_bit_exact() {
    let truth = random_truth(9);
    let data = generate_2d(&truth, 17, 0.3, 36, &RotationDistribution::uniform(36), 1).unwrap();
    let mut buf = Vec::new();
    write_dataset_2d(&data, &mut buf).unwrap();
    assert_eq!(&buf[..4], MAGIC_2D);
    let back: Dataset2D<f64> = read_dataset_2d(buf.as_slice()).unwrap();
    assert_eq!(back, data);
    assert!(read_dataset_2d::<_, f64>(&buf[..buf.len() - 3]).is_err());

    let d1 = generate_1d::<f64>(21, 9, 2.0, 4).unwrap();
    let mut buf = Vec::new();
    write_dataset_1d(&d1, &mut buf).unwrap();
    assert_eq!(&buf[..4], MAGIC_1D);
    let back: Dataset1D<f64> = read_dataset_1d(buf.as_slice()).unwrap();
    assert_eq!(back, d1);

    let mut csv = Vec::new();
    write_dataset_2d_csv(&data, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("kind,index,rotation,k,q,re,im\n"));
    assert_eq!(text.lines().count(), 1 + (17 + 1) * truth.len());
}
