//! Acceptance criteria, one line per criterion. Run with a criterion name
//! (e.g. `AC5`) as an argument to run a subset.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use synchem::analysis::{self, DependencyMode};
use synchem::dist_learning::{learn_distribution, LearningConfig, SyntheticSource};
use synchem::em::{self, e_step, m_step_coeffs, m_step_distribution, EmConfig, EmInit};
use synchem::mra_model::{self, generate_2d, relative_error_2d, sigma_for_snr, SyntheticImageSpec};
use synchem::rotation::{PhaseTable, RotationDistribution};
use synchem::steerable_basis::{build_basis, BandLimit, CoeffIndex, FourierBesselBasis, SteerableCoeffs};
use synchem::synchronization::{self, PpmOptions, SyncMethod};
use synchem::{Coeffs, Image, LearnedPrior};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Shared fixtures.

/// Full-scale image model: 129 pixels, M = 95.
fn basis_129() -> &'static FourierBesselBasis {
    static B: OnceLock<FourierBesselBasis> = OnceLock::new();
    B.get_or_init(|| build_basis(129, 64.0, BandLimit::MaxRoot(28.0)).unwrap())
}

/// Mid-size model: 65 pixels, M = 49.
fn basis_65() -> &'static FourierBesselBasis {
    static B: OnceLock<FourierBesselBasis> = OnceLock::new();
    B.get_or_init(|| build_basis(65, 32.0, BandLimit::MaxRoot(20.0)).unwrap())
}

fn truth(basis: &FourierBesselBasis, seed: u64) -> (Coeffs, Image) {
    mra_model::synthetic_truth(basis, &SyntheticImageSpec::with_seed(seed)).unwrap()
}

/// Learned priors at the full-scale model, keyed by SNR.
fn learned_prior(snr: f64, n: usize) -> LearnedPrior {
    let basis = basis_129();
    let (_, image) = truth(basis, 1);
    let source = SyntheticSource { basis, spec: SyntheticImageSpec::with_seed(900) };
    let config = LearningConfig {
        sigma: sigma_for_snr(&image, snr),
        n,
        grid_size: 360,
        method: SyncMethod::SynchronizeAndMatch { partition: 100 },
        repetitions: 10,
        seed: 77,
    };
    learn_distribution(&source, &config).unwrap()
}

// AC1

fn ac1() -> Outcome {
    let start = Instant::now();
    let basis = basis_65();
    let (a, _) = truth(basis, 3);
    let l = 36;
    let uniform = RotationDistribution::uniform(l);
    let data = generate_2d(&a, 100, 0.0, l, &uniform, 11).unwrap();
    let tm = synchronization::template_match(&data.observations, &data.observations[0], l);
    let ppm = synchronization::ppm_synchronize(&data.observations, l, PpmOptions::default(), 5).unwrap();
    let e_tm = relative_error_2d(&synchronization::align_and_average(&data.observations, &tm).unwrap(), &a, l).unwrap();
    let e_ppm = relative_error_2d(&synchronization::align_and_average(&data.observations, &ppm).unwrap(), &a, l).unwrap();

    // Every 4th grid angle, so each observation has same-rotation neighbors in the subset.
    let mut pmf = vec![0.0; l];
    for i in (0..l).step_by(4) {
        pmf[i] = 1.0;
    }
    let sparse = RotationDistribution::from_weights(l, 0, pmf).unwrap();
    let dup = generate_2d(&a, 100, 0.0, l, &sparse, 12).unwrap();
    let sm = synchronization::synchronize_and_match(&dup.observations, 50, l, PpmOptions::default(), 5).unwrap();
    let neighbors = sm.neighbors.as_ref().unwrap();
    let precondition = (0..100).all(|i| dup.rotations[neighbors[i]] == dup.rotations[i]);
    let e_sm = relative_error_2d(&synchronization::align_and_average(&dup.observations, &sm).unwrap(), &a, l).unwrap();
    let secs = start.elapsed().as_secs_f64();
    check(
        e_tm <= 1e-10 && e_ppm <= 1e-10 && e_sm <= 1e-10 && precondition && secs < 10.0,
        format!("TM {e_tm:.1e}, PPM {e_ppm:.1e}, S&M {e_sm:.1e} (neighbor rotations match: {precondition}), {secs:.1}s"),
    )
}

// AC2

fn ac2() -> Outcome {
    let basis = basis_65();
    let l = 36;
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    let mut iters = 0;
    for seed in 0..20u64 {
        let (a, image) = truth(basis, 100 + seed);
        let sigma = sigma_for_snr(&image, 0.1);
        let data = generate_2d(&a, 200, sigma, l, &RotationDistribution::uniform(l), seed).unwrap();
        let prior: Vec<f64> = (0..l).map(|i| (-0.5 * (synchem::rotation::centered(i as i64, l) as f64 / 4.0).powi(2)).exp()).collect();
        let rho_bar = RotationDistribution::from_weights(l, 0, prior).unwrap();
        for gamma in [0.0, 100.0] {
            let config = EmConfig::synch(l, l, gamma)
                .with_rotation_prior(rho_bar.clone())
                .with_signal_prior(em::exponential_decay_prior(a.index()))
                .with_tol(1e-8)
                .with_max_iters(300);
            let init = em::standard_init(&data.observations, &config, seed).unwrap();
            let r = em::run_em(&data.observations, sigma, &config, init).unwrap();
            for w in r.objective_trace.windows(2) {
                worst = worst.min(w[1] - w[0]);
            }
            runs += 1;
            iters += r.iterations;
        }
    }
    check(worst >= -1e-8, format!("{runs} runs, {iters} iterations, smallest step {worst:.2e}"))
}

// AC3

/// `log sum_l rho_l exp(-||v - R_l a||^2 / sigma^2)` for every observation, as a matrix of log terms.
fn log_terms(a: &Coeffs, obs: &[Coeffs], sigma: f64, l: usize) -> Vec<Vec<f64>> {
    let table = PhaseTable::new(l);
    let rotated: Vec<Coeffs> = (0..l).map(|s| a.rotated_grid(s as i64, &table)).collect();
    obs.iter().map(|v| rotated.iter().map(|r| -r.distance_sqr(v) / (sigma * sigma)).collect()).collect()
}

/// Posterior maximized over rho for fixed `a` (a concave problem, solved by fixed-point iteration).
fn profiled_posterior(a: &Coeffs, obs: &[Coeffs], sigma: f64, l: usize, gamma: f64, rho_bar: &[f64], gam: &[f64]) -> f64 {
    let t = log_terms(a, obs, sigma, l);
    let mut rho = vec![1.0 / l as f64; l];
    let objective = |rho: &[f64]| -> f64 {
        let data: f64 = t
            .iter()
            .map(|row| {
                let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + row.iter().zip(rho).map(|(x, p)| p * (x - m).exp()).sum::<f64>().ln()
            })
            .sum();
        let kl: f64 = rho_bar.iter().zip(rho).filter(|(q, _)| **q > 0.0).map(|(q, p)| q * (q / p).ln()).sum();
        data - gamma * kl
    };
    for _ in 0..20_000 {
        let mut acc = vec![0.0; l];
        for row in &t {
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = row.iter().zip(&rho).map(|(x, p)| p * (x - m).exp()).collect();
            let s: f64 = w.iter().sum();
            for (a, x) in acc.iter_mut().zip(&w) {
                *a += x / s;
            }
        }
        let total = obs.len() as f64 + gamma;
        let next: Vec<f64> = acc.iter().zip(rho_bar).map(|(w, q)| (w + gamma * q) / total).collect();
        let change: f64 = next.iter().zip(&rho).map(|(x, y)| (x - y).abs()).sum();
        rho = next;
        if change < 1e-15 {
            break;
        }
    }
    let prior: f64 = a.values().iter().zip(gam).map(|(x, g)| x.norm_sqr() / g).sum();
    objective(&rho) - prior
}

fn ac3() -> Outcome {
    let l = 4;
    let index = Arc::new(CoeffIndex::new(vec![0, 1], vec![1, 1]).unwrap());
    let gam = vec![2.0, 1.5];
    let rho_bar = vec![0.4, 0.3, 0.1, 0.2];
    let gamma = 3.0;
    let sigma = 0.6;
    let mut details = Vec::new();
    let mut ok = true;
    for inst in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + inst);
        let a_true = SteerableCoeffs::new(
            vec![Complex::new(rng.random_range(0.5..1.5), 0.0), Complex::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))],
            index.clone(),
        )
        .unwrap();
        let table = PhaseTable::new(l);
        // k = 0 noise is real, so the maximizer has a real k = 0 entry and the search is 3-D.
        let obs: Vec<Coeffs> = (0..5)
            .map(|_| {
                let s = rng.random_range(0..l) as i64;
                let mut v = a_true.rotated_grid(s, &table);
                let n0: f64 = StandardNormal.sample(&mut rng);
                let (n1, n2): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                v.values_mut()[0] += Complex::new(n0 * sigma / 2f64.sqrt(), 0.0);
                v.values_mut()[1] += Complex::new(n1, n2) * (sigma / 2f64.sqrt());
                v
            })
            .collect();

        // Coarse-to-fine dense grid over (Re a0, Re a1, Im a1).
        let f = |x: [f64; 3]| {
            let a = SteerableCoeffs::new(vec![Complex::new(x[0], 0.0), Complex::new(x[1], x[2])], index.clone()).unwrap();
            profiled_posterior(&a, &obs, sigma, l, gamma, &rho_bar, &gam)
        };
        let mut center = [0.0; 3];
        let mut half = 3.0;
        let mut best = (f64::NEG_INFINITY, center);
        let points = 21;
        for level in 0..9 {
            let n = if level == 0 { 41 } else { points };
            let step = 2.0 * half / (n - 1) as f64;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let x = [
                            center[0] - half + i as f64 * step,
                            center[1] - half + j as f64 * step,
                            center[2] - half + k as f64 * step,
                        ];
                        let v = f(x);
                        if v > best.0 {
                            best = (v, x);
                        }
                    }
                }
            }
            center = best.1;
            half = 2.0 * step;
        }
        let grid = SteerableCoeffs::new(vec![Complex::new(center[0], 0.0), Complex::new(center[1], center[2])], index.clone()).unwrap();

        let config = EmConfig::standard(l)
            .with_signal_prior(gam.clone())
            .with_rotation_prior(RotationDistribution::new(l, 0, rho_bar.clone()).unwrap())
            .with_tol(1e-26)
            .with_max_iters(200_000);
        let config = EmConfig { gamma, ..config };
        // EM is a local method: restart from the mean and from every observation, keep the best fixed point.
        let starts = std::iter::once(synchronization::mean_coeffs(&obs).unwrap()).chain(obs.iter().cloned());
        let r = starts
            .map(|c| em::run_em(&obs, sigma, &config, EmInit { coeffs: c, distribution: RotationDistribution::uniform(l) }).unwrap())
            .max_by(|x, y| x.objective_trace.last().unwrap().total_cmp(y.objective_trace.last().unwrap()))
            .unwrap();
        // The prior on rho pins the gauge, so no rotation is minimized over.
        let rel = (r.coeffs.distance_sqr(&grid) / grid.norm_sqr()).sqrt();
        ok &= rel <= 1e-3;
        details.push(format!("{rel:.1e}"));
    }
    check(ok, format!("relative coefficient gaps {}", details.join(", ")))
}

// AC4

/// Maximizer by Newton's method on central finite differences.
fn fd_newton<F: Fn(&[f64]) -> f64>(f: F, x0: Vec<f64>, h: f64, steps: usize) -> Vec<f64> {
    let n = x0.len();
    let mut x = x0;
    for _ in 0..steps {
        let mut g = nalgebra::DVector::<f64>::zeros(n);
        let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
        let fx = f(&x);
        for i in 0..n {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += h;
            m[i] -= h;
            let (fp, fm) = (f(&p), f(&m));
            g[i] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * fx + fm) / (h * h);
            for j in 0..i {
                let mut pp = x.clone();
                let mut pm = x.clone();
                let mut mp = x.clone();
                let mut mm = x.clone();
                pp[i] += h;
                pp[j] += h;
                pm[i] += h;
                pm[j] -= h;
                mp[i] -= h;
                mp[j] += h;
                mm[i] -= h;
                mm[j] -= h;
                let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let step = hess.lu().solve(&(-g)).expect("non-singular Hessian");
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            if f(&cand) >= fx - 1e-12 || t < 1e-6 {
                x = cand;
                break;
            }
            t *= 0.5;
        }
    }
    x
}

fn ac4() -> Outcome {
    let l = 6;
    let bw = 4;
    let index = Arc::new(CoeffIndex::new(vec![0, 1, 1, 2], vec![1, 1, 2, 1]).unwrap());
    let mut worst_a: f64 = 0.0;
    let mut worst_rho: f64 = 0.0;
    for inst in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + inst);
        let mut cplx = || Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let a = SteerableCoeffs::new((0..4).map(|_| cplx()).collect(), index.clone()).unwrap();
        let obs: Vec<Coeffs> = (0..5).map(|_| SteerableCoeffs::new((0..4).map(|_| cplx()).collect(), index.clone()).unwrap()).collect();
        let gam: Vec<f64> = (0..4).map(|_| rng.random_range(0.3..3.0)).collect();
        let bar: Vec<f64> = (0..l).map(|_| rng.random_range(0.05..1.0)).collect();
        let bar = RotationDistribution::from_weights(l, 0, bar).unwrap();
        let gamma = rng.random_range(0.0..20.0);
        let sigma = rng.random_range(0.4..1.5);
        let config = EmConfig::synch(l, bw, gamma).with_signal_prior(gam.clone()).with_rotation_prior(bar.clone());
        let rho = RotationDistribution::from_weights(l, config.window_offset(), (0..bw).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
        let w = e_step(&a, &rho, &obs, sigma, &config).unwrap();

        // Q as a function of the coefficients (real and imaginary parts interleaved).
        let table = PhaseTable::new(l);
        let q_a = |x: &[f64]| -> f64 {
            let c = SteerableCoeffs::new((0..4).map(|m| Complex::new(x[2 * m], x[2 * m + 1])).collect(), index.clone()).unwrap();
            let mut q = 0.0;
            for (j, v) in obs.iter().enumerate() {
                for b in 0..bw {
                    let s = w.window_offset + b as i64;
                    q -= w.row(j)[b] * c.rotated_grid(s, &table).distance_sqr(v) / (sigma * sigma);
                }
            }
            q - c.values().iter().zip(&gam).map(|(z, g)| z.norm_sqr() / g).sum::<f64>()
        };
        let xa = fd_newton(q_a, vec![0.0; 8], 1e-3, 3);
        let m = m_step_coeffs(&w, &obs, sigma, &config).unwrap();
        for (i, z) in m.values().iter().enumerate() {
            worst_a = worst_a.max((z.re - xa[2 * i]).abs()).max((z.im - xa[2 * i + 1]).abs());
        }

        // Q as a function of rho on the window, rho = softmax(0, theta).
        let bar_w: Vec<f64> = {
            let v: Vec<f64> = (0..bw as i64).map(|b| bar.prob(w.window_offset + b)).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|p| p / s).collect()
        };
        let sums: Vec<f64> = (0..bw).map(|b| (0..w.rows).map(|j| w.row(j)[b]).sum()).collect();
        let softmax = |t: &[f64]| -> Vec<f64> {
            let e: Vec<f64> = std::iter::once(0.0).chain(t.iter().copied()).map(f64::exp).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|x| x / s).collect()
        };
        let q_rho = |t: &[f64]| -> f64 {
            let p = softmax(t);
            p.iter().zip(&sums).zip(&bar_w).map(|((p, s), q)| (s + gamma * q) * p.ln()).sum()
        };
        let t = fd_newton(q_rho, vec![0.0; bw - 1], 1e-4, 40);
        let p = softmax(&t);
        let d = m_step_distribution(&w, &config).unwrap();
        for (x, y) in d.pmf().iter().zip(&p) {
            worst_rho = worst_rho.max((x - y).abs());
        }
    }
    check(
        worst_a <= 1e-6 && worst_rho <= 1e-6,
        format!("max deviation: coefficients {worst_a:.1e}, distribution {worst_rho:.1e}"),
    )
}

// AC5

fn ac5() -> Outcome {
    let start = Instant::now();
    let run = |mode| analysis::dependency_experiment(21, 2.0, 1000, 20, mode, 0.05, 2024).unwrap().fraction_significant;
    let before = run(DependencyMode::BeforeSync);
    let ppm = run(DependencyMode::AfterSync(SyncMethod::Ppm));
    let sm = run(DependencyMode::AfterSync(SyncMethod::SynchronizeAndMatch { partition: 100 }));
    let secs = start.elapsed().as_secs_f64();
    check(
        (0.03..=0.07).contains(&before) && ppm >= 0.15 && before < sm && sm < ppm && secs < 300.0,
        format!("before {before:.3} (reference 0.048), PPM {ppm:.3} (0.205), S&M {sm:.3} (0.102), {secs:.0}s"),
    )
}

// AC6

fn ac6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let analytic = analysis::shift_pmf_analytic(&x, 3.0).unwrap();
    let empirical = analysis::shift_pmf_empirical(&x, 3.0, 100_000, 61).unwrap();
    let se = empirical.standard_errors().unwrap();
    let (mut worst_ratio, mut worst_bin) = (0.0f64, 0);
    for (m, ((a, e), s)) in analytic.pmf.iter().zip(&empirical.pmf).zip(&se).enumerate() {
        let ratio = (a - e).abs() / s.max(1e-12);
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_bin = m;
        }
    }
    let pointwise = worst_ratio <= 3.0;
    // Diagnostic: the formula treats the correlation lags as independent. Sampling that
    // model directly separates approximation error from implementation error.
    let len = x.len();
    let auto: Vec<f64> = (0..len).map(|l| (0..len).map(|n| x[n] * x[(n + l) % len]).sum()).collect();
    let sc = 3.0 * x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut counts = vec![0usize; len];
    for _ in 0..100_000 {
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
        for (l, r) in auto.iter().enumerate() {
            let g: f64 = StandardNormal.sample(&mut rng);
            if r + sc * g > best {
                best = r + sc * g;
                arg = l;
            }
        }
        counts[arg] += 1;
    }
    let independent = counts
        .iter()
        .zip(&analytic.pmf)
        .map(|(c, a)| {
            let p = *c as f64 / 1e5;
            (p - a).abs() / (p * (1.0 - p) / 1e5).sqrt().max(1e-12)
        })
        .fold(0.0f64, f64::max);
    let mse = analysis::pmf_approximation_error(&[11, 21, 31, 41], 3.0, 40, 100_000, 66).unwrap();
    let trend = mse.windows(2).all(|w| w[1].1 <= w[0].1);
    let secs = start.elapsed().as_secs_f64();
    let mse_text: Vec<String> = mse.iter().map(|(l, e)| format!("L={l}:{e:.2e}")).collect();
    check(
        pointwise && trend && secs < 600.0,
        format!(
            "max |analytic - empirical| / SE = {worst_ratio:.1} at shift {worst_bin} (max abs {:.4}; vs independent-lag sampling {independent:.1} SE); MSE {}; {secs:.0}s",
            analytic.max_abs_diff(&empirical),
            mse_text.join(" ")
        ),
    )
}

// AC7

fn ac7() -> Outcome {
    let low = learned_prior(0.01, 500);
    let high = learned_prior(0.1, 500);
    let window = low.pmf.centered_mass(36);
    let (near_high, near_low) = (high.pmf.mass_within(5), low.pmf.mass_within(5));
    check(
        window >= 0.99 && near_high > near_low,
        format!("SNR 1/100: mass in 36-bin window {window:.4}; mass within +-5 bins: SNR 1/10 {near_high:.3}, SNR 1/100 {near_low:.3}"),
    )
}

// AC8

fn ac8() -> Outcome {
    let start = Instant::now();
    let basis = basis_129();
    let (a, image) = truth(basis, 1);
    let l = 360;
    let snr = 1.0 / 16.0;
    let sigma = sigma_for_snr(&image, snr);
    let prior = learned_prior(snr, 500);
    let data = generate_2d(&a, 2000, sigma, l, &RotationDistribution::uniform(l), 8).unwrap();

    let std_cfg = EmConfig::standard(l);
    let init = em::standard_init(&data.observations, &std_cfg, 8).unwrap();
    let standard = em::run_em(&data.observations, sigma, &std_cfg, init).unwrap();
    let synch_cfg = EmConfig::synch(l, 36, 100.0);
    let synch = em::run_synch_em(&data.observations, sigma, &synch_cfg, &prior.pmf, 100, 8).unwrap();

    let (t_std, t_syn) = (standard.wall_time.as_secs_f64(), synch.wall_time.as_secs_f64());
    let e_std = relative_error_2d(&standard.coeffs, &a, l).unwrap();
    let e_syn = relative_error_2d(&synch.coeffs, &a, l).unwrap();
    let secs = start.elapsed().as_secs_f64();
    check(
        t_syn <= t_std / 5.0 && e_syn <= 1.1 * e_std && secs < 1800.0,
        format!(
            "M={} standard EM {t_std:.1}s/{} it err {e_std:.4}; Synch-EM {t_syn:.2}s/{} it err {e_syn:.4}; speedup {:.1}x; {secs:.0}s total",
            a.len(),
            standard.iterations,
            synch.iterations,
            t_std / t_syn
        ),
    )
}

// AC9

fn ac9() -> Outcome {
    let basis = basis_129();
    let (a, image) = truth(basis, 1);
    let l = 360;
    let sigma = sigma_for_snr(&image, 1.0 / 16.0);
    let data = generate_2d(&a, 1000, sigma, l, &RotationDistribution::uniform(l), 9).unwrap();
    let bws = [9usize, 18, 36, 72, 180, 360];
    let mut times = Vec::new();
    for &bw in &bws {
        let cfg = EmConfig::synch(l, bw, 0.0).with_tol(f64::MIN_POSITIVE).with_max_iters(8);
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let init = EmInit { coeffs: a.clone(), distribution: RotationDistribution::uniform_window(l, bw) };
            let r = em::run_em(&data.observations, sigma, &cfg, init).unwrap();
            best = best.min(r.time_per_iteration().unwrap());
        }
        times.push(best);
    }
    let xs: Vec<f64> = bws.iter().map(|&b| b as f64).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, times.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&times).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = times.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    let text: Vec<String> = bws.iter().zip(&times).map(|(b, t)| format!("{b}:{:.1}ms", t * 1e3)).collect();
    check(r2 > 0.95, format!("R^2 = {r2:.4}; per-iteration {}", text.join(" ")))
}

// AC10

fn ac10() -> Outcome {
    let basis = basis_129();
    let (a, image) = truth(basis, 1);
    let l = 360;
    let snr = 1.0 / 30.0;
    let sigma = sigma_for_snr(&image, snr);
    let prior = learned_prior(snr, 500);
    let mut fewer = 0;
    let (mut err0, mut err100) = (0.0, 0.0);
    let mut its = Vec::new();
    for seed in 0..10u64 {
        let data = generate_2d(&a, 2000, sigma, l, &RotationDistribution::uniform(l), 1000 + seed).unwrap();
        let run = |gamma: f64| {
            let cfg = EmConfig::synch(l, 36, gamma);
            em::run_synch_em(&data.observations, sigma, &cfg, &prior.pmf, 100, seed).unwrap()
        };
        let (r0, r100) = (run(0.0), run(100.0));
        if r100.iterations <= r0.iterations {
            fewer += 1;
        }
        err0 += relative_error_2d(&r0.coeffs, &a, l).unwrap() / 10.0;
        err100 += relative_error_2d(&r100.coeffs, &a, l).unwrap() / 10.0;
        its.push(format!("{}/{}", r100.iterations, r0.iterations));
    }
    check(
        fewer >= 7 && err100 <= 1.05 * err0,
        format!(
            "gamma=100 needs no more iterations on {fewer}/10 seeds (gamma100/gamma0: {}); mean error {err100:.4} vs {err0:.4}",
            its.join(" ")
        ),
    )
}

// AC11

fn ac11() -> Outcome {
    let basis = basis_65();
    let (a, image) = truth(basis, 4);
    let l = 36;
    let n = 120;
    let sigma = sigma_for_snr(&image, 0.5);
    let data = generate_2d(&a, n, sigma, l, &RotationDistribution::uniform(l), 21).unwrap();
    let prior: Vec<f64> = (0..l).map(|i| 1.0 + (i % 5) as f64).collect();
    let prior = RotationDistribution::from_weights(l, 0, prior).unwrap();
    let cfg = EmConfig::synch(l, l, 0.0).with_max_iters(200);

    let synch = em::run_synch_em(&data.observations, sigma, &cfg, &prior, n, 3).unwrap();
    let sync = synchronization::synchronize_and_match(&data.observations, n, l, PpmOptions::default(), 3).unwrap();
    let aligned = synchronization::align(&data.observations, &sync).unwrap();
    let init = EmInit { coeffs: synchronization::mean_coeffs(&aligned).unwrap(), distribution: prior.reflected() };
    let mut plain_cfg = cfg.clone();
    plain_cfg.rotation_prior = Some(prior.reflected());
    let plain = em::run_em(&aligned, sigma, &plain_cfg, init).unwrap();
    let identical = synch.coeffs == plain.coeffs
        && synch.distribution == plain.distribution
        && synch.iterations == plain.iterations
        && synch.objective_trace == plain.objective_trace;

    // Gauge: rotate every observation by the same grid angle.
    let table = PhaseTable::new(l);
    let g = 7;
    let rotated: Vec<Coeffs> = data.observations.iter().map(|v| v.rotated_grid(g, &table)).collect();
    let std_cfg = EmConfig::standard(l).with_max_iters(200);
    let init0 = em::standard_init(&data.observations, &std_cfg, 5).unwrap();
    let base = em::run_em(&data.observations, sigma, &std_cfg, init0.clone()).unwrap();
    let init_g = EmInit { coeffs: init0.coeffs.rotated_grid(g, &table), distribution: init0.distribution };
    let moved = em::run_em(&rotated, sigma, &std_cfg, init_g).unwrap();
    let gauge_em = moved.coeffs.distance_sqr(&base.coeffs.rotated_grid(g, &table)).sqrt() / base.coeffs.norm_sqr().sqrt();
    let synch_cfg = EmConfig::synch(l, 12, 10.0);
    let s0 = em::run_synch_em(&data.observations, sigma, &synch_cfg, &prior, 60, 9).unwrap();
    let s1 = em::run_synch_em(&rotated, sigma, &synch_cfg, &prior, 60, 9).unwrap();
    let gauge_synch = relative_error_2d(&s1.coeffs, &s0.coeffs, l).unwrap();
    check(
        identical && gauge_em <= 1e-9 && gauge_synch <= 1e-9,
        format!("reduction identical: {identical}; gauge gap EM {gauge_em:.1e}, Synch-EM {gauge_synch:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("AC1", "noiseless correctness", ac1),
        ("AC2", "EM ascent", ac2),
        ("AC3", "MAP oracle equivalence", ac3),
        ("AC4", "M-step oracle", ac4),
        ("AC5", "Pearson reproduction", ac5),
        ("AC6", "shift-PMF approximation", ac6),
        ("AC7", "prior-learning concentration", ac7),
        ("AC8", "acceleration", ac8),
        ("AC9", "per-iteration linear scaling", ac9),
        ("AC10", "gamma effect", ac10),
        ("AC11", "reductions and gauges", ac11),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, title, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|x| x == name) {
            continue;
        }
        let start = Instant::now();
        let (status, detail) = match std::panic::catch_unwind(f) {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{name} {status} {title}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
