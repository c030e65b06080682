use std::sync::Arc;

use num_complex::Complex;
use rand::Rng as _;

use super::*;
use crate::rng::stream_rng;
use crate::rotation::PhaseTable;
use crate::steerable_basis::CoeffIndex;

fn truth(seed: u64) -> SteerableCoeffs<f64> {
    let ks = vec![0u32, 1, 1, 2, 3, 5];
    let qs = (0..ks.len() as u32).collect();
    let index = Arc::new(CoeffIndex::new(ks.clone(), qs).unwrap());
    let mut rng = stream_rng(seed, 2);
    let values = ks
        .iter()
        .map(|&k| Complex::new(rng.random_range(-1.0..1.0), if k == 0 { 0.0 } else { rng.random_range(-1.0..1.0) }))
        .collect();
    SteerableCoeffs::new(values, index).unwrap()
}

fn config(sigma: f64, n: usize, l: usize, method: SyncMethod, reps: usize, seed: u64) -> LearningConfig {
    LearningConfig { sigma, n, grid_size: l, method, repetitions: reps, seed }
}

#[test]
fn noiseless_prior_is_delta() {
    let src = FixedTruth(truth(1));
    for method in [SyncMethod::TemplateMatching, SyncMethod::Ppm] {
        let p: LearnedPrior<f64> = learn_distribution(&src, &config(0.0, 40, 36, method, 3, 1)).unwrap();
        assert_eq!(p.pmf.prob(0), 1.0, "{method}");
    }
    let sm = SyncMethod::SynchronizeAndMatch { partition: 100 };
    let p: LearnedPrior<f64> = learn_distribution(&src, &config(0.0, 200, 8, sm, 2, 2)).unwrap();
    assert!((p.pmf.prob(0) - 1.0).abs() < 1e-12);
}

#[test]
fn pure_noise_prior_is_near_uniform() {
    let l = 36;
    for seed in 0..3 {
        let src = FixedTruth(truth(seed).scaled(1e-3));
        let p: LearnedPrior<f64> =
            learn_distribution(&src, &config(1.0, 50, l, SyncMethod::TemplateMatching, 10, seed)).unwrap();
        let max = p.pmf.pmf().iter().copied().fold(0.0, f64::max);
        assert!(max <= 3.0 / l as f64, "max bin {max}");
        assert!((p.pmf.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn learned_prior_is_gauge_invariant() {
    let t = truth(4);
    let rotated = t.rotated_grid(11, &PhaseTable::new(24));
    let cfg = config(0.9, 120, 24, SyncMethod::Ppm, 16, 4);
    let a: LearnedPrior<f64> = learn_distribution(&FixedTruth(t), &cfg).unwrap();
    let b: LearnedPrior<f64> = learn_distribution(&FixedTruth(rotated), &cfg).unwrap();
    for r in [0, 1, 3] {
        let (x, y) = (a.pmf.mass_within(r), b.pmf.mass_within(r));
        assert!((x - y).abs() < 0.05, "radius {r}: {x} vs {y}");
    }
}

#[test]
fn error_histogram_centers_offsets() {
    let h = error_histogram::<f64>(&[5, 6, 4, 0], &[0, 0, 0, 1], 5, 10);
    // errors: 0, 1, -1, -6 -> centered 0, 1, -1, 4
    let offset = crate::rotation::centered_window_offset(10);
    assert_eq!(h[(0 - offset) as usize], 0.25);
    assert_eq!(h[(1 - offset) as usize], 0.25);
    assert_eq!(h[(-1 - offset) as usize], 0.25);
    assert_eq!(h[(4 - offset) as usize], 0.25);
}

#[test]
fn kl_examples() {
    let p = RotationDistribution::<f64>::from_weights(6, -3, vec![1.0, 2.0, 3.0, 4.0, 0.0, 5.0]).unwrap();
    assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    let delta = RotationDistribution::<f64>::delta(36, 36);
    let uni = RotationDistribution::<f64>::uniform(36);
    assert!((kl_divergence(&delta, &uni).unwrap() - 36f64.ln()).abs() < 1e-12);
    assert!(kl_divergence(&delta, &RotationDistribution::uniform_window(36, 4)).is_err());

    let q = RotationDistribution::<f64>::from_weights(6, -3, vec![2.0, 1.0, 1.0, 1.0, 3.0, 0.5]).unwrap();
    // Re-sum in sorted order with compensated summation as an independent check.
    let mut terms: Vec<f64> = p
        .pmf()
        .iter()
        .zip(q.pmf())
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a.ln() - b.ln()))
        .collect();
    terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let y = t - c;
        let u = s + y;
        c = (u - s) - y;
        s = u;
    }
    assert!((kl_divergence(&p, &q).unwrap() - s).abs() < 1e-14);

    let zero = RotationDistribution::new(2, 0, vec![1.0, 0.0]).unwrap();
    let full = RotationDistribution::new(2, 0, vec![0.5, 0.5]).unwrap();
    assert!((kl_divergence(&full, &zero).unwrap() - (0.5 * 0.5f64.ln() + 0.5 * (0.5 / 1e-12f64).ln())).abs() < 1e-9);
}

fn prior_from(pmf: RotationDistribution<f64>) -> LearnedPrior<f64> {
    LearnedPrior { pmf, sigma: 1.0, n_per_trial: 10, repetitions: 1, method: "ppm".into(), source: "test".into(), seed: 0 }
}

#[test]
fn log_prior_examples() {
    let bar = RotationDistribution::from_weights(8, -4, vec![1.0, 2.0, 5.0, 9.0, 5.0, 2.0, 1.0, 1.0]).unwrap();
    let prior = prior_from(bar.clone());
    assert_eq!(log_prior(&bar, &prior, 10.0).unwrap(), 0.0);
    let uni = RotationDistribution::uniform(8);
    assert_eq!(log_prior(&uni, &prior, 0.0).unwrap(), 0.0);
    let mut last = 0.0;
    for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mix: Vec<f64> = bar.pmf().iter().zip(uni.pmf()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let rho = RotationDistribution::from_weights(8, -4, mix).unwrap();
        let v = log_prior(&rho, &prior, 10.0).unwrap();
        assert!(v < last);
        last = v;
    }
}

#[test]
fn bandwidth_selection() {
    let delta = prior_from(RotationDistribution::delta(36, 36));
    assert_eq!(select_bandwidth(&delta, 0.99).unwrap(), 2);
    let uni = prior_from(RotationDistribution::uniform(36));
    assert_eq!(select_bandwidth(&uni, 0.99).unwrap(), 36);
    assert_eq!(select_bandwidth(&uni, 0.5).unwrap(), 18);
    let odd = prior_from(RotationDistribution::uniform(35));
    assert_eq!(select_bandwidth(&odd, 0.99).unwrap(), 35);
    assert!(select_bandwidth(&uni, 1.0).is_err());
}

#[test]
fn prior_csv_round_trip() {
    let p: LearnedPrior<f64> =
        learn_distribution(&FixedTruth(truth(5)), &config(0.8, 60, 12, SyncMethod::Ppm, 2, 5)).unwrap();
    let mut buf = Vec::new();
    write_prior_csv(&p, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.contains("\noffset,probability\n"));
    let back: LearnedPrior<f64> = read_prior_csv(buf.as_slice()).unwrap();
    assert_eq!(back.method, p.method);
    assert_eq!(back.source, p.source);
    assert_eq!(back.pmf.window_offset(), p.pmf.window_offset());
    for (a, b) in back.pmf.pmf().iter().zip(p.pmf.pmf()) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!(read_prior_csv::<_, f64>("offset,probability\n0,1\n".as_bytes()).is_err());
}
