use chaotic_cavity::algebra::to_f64;
use chaotic_cavity::conductance::conductance_prefix;
use chaotic_cavity::jointcsn::shot_noise_mean_closed;
use chaotic_cavity::montecarlo::*;
use chaotic_cavity::wigner::wigner_prefix;
use chaotic_cavity::{DelayParams, TransportParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const COUNT: usize = 100_000;

fn within(est: &CumulantEstimate, exact: f64, nse: f64) -> bool {
    (est.value - exact).abs() < nse * est.std_error
}

// The gate: both non-rejection constructions reproduce exact mean and variance.
#[test]
fn sampler_gate() {
    let p = DelayParams::default_for(1, 20);
    let k = estimate_cumulants(&sample_delay_times(&p, COUNT, 1).unwrap(), 2).unwrap();
    assert!(within(&k[0], 1.0, 4.0), "{k:?}");
    assert!(within(&k[1], 2.0 / 189.0, 4.0), "{k:?}");

    let t = TransportParams::simple(1, (-1, 2), (0, 1), 5);
    let exact = conductance_prefix(&t, 3).unwrap();
    let s = sample_jacobi_spectrum(&t, COUNT, 2).unwrap();
    let k = estimate_cumulants(&s.g, 2).unwrap();
    assert!(within(&k[0], to_f64(exact.kappa(1)), 4.0), "{k:?}");
    assert!(within(&k[1], to_f64(exact.kappa(2)), 4.0), "{k:?}");
}

#[test]
fn determinism() {
    let p = DelayParams::default_for(2, 6);
    let a = sample_delay_times(&p, 10_000, 42).unwrap();
    let b = sample_delay_times(&p, 10_000, 42).unwrap();
    assert_eq!(a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(a.count, a.values.len());
    let c = sample_delay_times(&p, 10_000, 43).unwrap();
    assert_ne!(a.values, c.values);
    // A shorter batch is a prefix of a longer one.
    let d = sample_delay_times(&p, 5_000, 42).unwrap();
    assert_eq!(d.values[..], a.values[..5_000]);
    let t = TransportParams::simple(4, (0, 1), (2, 1), 3);
    assert_eq!(sample_jacobi_spectrum(&t, 1000, 9).unwrap(), sample_jacobi_spectrum(&t, 1000, 9).unwrap());
}

#[test]
fn delay_times_match_exact_cumulants() {
    let p = DelayParams::default_for(1, 20);
    let k = estimate_cumulants(&sample_delay_times(&p, COUNT, 7).unwrap(), 3).unwrap();
    let exact = wigner_prefix(&p, 3).unwrap().values;
    for (e, x) in k.iter().zip(&exact) {
        assert!(within(e, to_f64(x), 4.0), "{e:?} vs {x}");
    }
    let p = DelayParams::default_for(2, 10);
    let k = estimate_cumulants(&sample_delay_times(&p, COUNT, 8).unwrap(), 3).unwrap();
    assert!(within(&k[2], 96.0 / (11.0 * 12.0 * 18.0 * 16.0), 4.0), "{k:?}");
    let p = DelayParams::default_for(4, 5);
    let k = estimate_cumulants(&sample_delay_times(&p, COUNT, 9).unwrap(), 3).unwrap();
    let exact = wigner_prefix(&p, 3).unwrap().values;
    for (e, x) in k.iter().zip(&exact) {
        assert!(within(e, to_f64(x), 4.0), "{e:?} vs {x}");
    }
}

#[test]
fn spectrum_examples() {
    let s = sample_jacobi_spectrum(&TransportParams::simple(2, (0, 1), (0, 1), 1), COUNT, 3).unwrap();
    let k = estimate_cumulants(&s.g, 2).unwrap();
    assert!(within(&k[0], 0.5, 4.0));
    assert!(within(&k[1], 1.0 / 12.0, 4.0));

    let t = TransportParams::simple(2, (0, 1), (0, 1), 5);
    let s = sample_jacobi_spectrum(&t, COUNT, 4).unwrap();
    let k = estimate_cumulants(&s.p, 1).unwrap();
    assert!(within(&k[0], 125.0 / 198.0, 4.0), "{k:?}");
    assert_eq!(to_f64(&shot_noise_mean_closed(&t).unwrap()), 125.0 / 198.0);
}

#[test]
fn rejection_and_tridiagonal_agree() {
    for (beta, n) in [(1u32, 3u64), (4, 2), (2, 4)] {
        let t = TransportParams::simple(beta, (1, 2), (1, 1), n);
        let exact = conductance_prefix(&t, 3).unwrap();
        for s in [sample_jacobi_spectrum(&t, 50_000, 5).unwrap(), sample_jacobi_tridiagonal(&t, 50_000, 6).unwrap()] {
            let k = estimate_cumulants(&s.g, 3).unwrap();
            for l in 1..=3 {
                assert!(within(&k[l - 1], to_f64(exact.kappa(l)), 4.5), "beta {beta} n {n} l {l}: {:?}", k[l - 1]);
            }
        }
    }
}

#[test]
fn k_statistics() {
    let k = estimate_cumulants_of(&[2.5; 50], 5).unwrap();
    assert_eq!(k[0].value, 2.5);
    for e in &k[1..] {
        assert!(e.value.abs() < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<f64> = (0..COUNT).map(|_| StandardNormal.sample(&mut rng)).collect();
    let k = estimate_cumulants_of(&xs, 4).unwrap();
    assert!(within(&k[1], 1.0, 4.0), "{k:?}");
    assert!(within(&k[2], 0.0, 4.0), "{k:?}");
    assert!(within(&k[3], 0.0, 4.0), "{k:?}");
    // Exponential(1): kappa_l = (l-1)!.
    let ys: Vec<f64> = xs.chunks(2).map(|c| 0.5 * (c[0] * c[0] + c[1] * c[1])).collect();
    let k = estimate_cumulants_of(&ys, 3).unwrap();
    for (l, exact) in [(1, 1.0), (2, 1.0), (3, 2.0)] {
        assert!(within(&k[l - 1], exact, 4.0), "{l}: {:?}", k[l - 1]);
    }
}

#[test]
fn estimator_errors() {
    assert_eq!(estimate_cumulants_of(&[1.0, 2.0, 3.0], 3).unwrap_err().token(), "insufficient-samples");
    assert_eq!(estimate_cumulants_of(&[1.0; 20], 6).unwrap_err().token(), "invalid-order");
    assert_eq!(sample_delay_times(&DelayParams::default_for(1, 4), 0, 1).unwrap_err().token(), "invalid-count");
    assert_eq!(sample_jacobi_spectrum(&TransportParams::simple(1, (0, 1), (0, 1), 2), 0, 1).unwrap_err().token(), "invalid-count");
    assert_eq!(edgeworth_density(&[0.0, 0.0, 0.0, 0.0, 0.0], &[0.0]).unwrap_err().token(), "invalid-variance");
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[test]
fn edgeworth_gaussian_limit() {
    let grid: Vec<f64> = (-40..=40).map(|i| i as f64 / 10.0).collect();
    let e = edgeworth_density(&[0.0, 1.0, 0.0, 0.0, 0.0], &grid).unwrap();
    for (x, v) in grid.iter().zip(&e) {
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((v - phi).abs() < 1e-15);
    }
}

#[test]
fn edgeworth_for_delay_times() {
    let p = DelayParams::default_for(1, 20);
    let k: Vec<f64> = wigner_prefix(&p, 5).unwrap().values.iter().map(to_f64).collect();
    let k: [f64; 5] = k.try_into().unwrap();
    let sd = k[1].sqrt();
    let grid: Vec<f64> = (0..=200_000).map(|i| k[0] - 20.0 * sd + 40.0 * sd * i as f64 / 200_000.0).collect();
    let e = edgeworth_density(&k, &grid).unwrap();
    assert!((trapezoid(&grid, &e) - 1.0).abs() < 1e-6);
    for (x, v) in grid.iter().zip(&e) {
        if (x - k[0]).abs() <= 3.0 * sd {
            assert!(*v >= 0.0, "negative at {x}");
        }
    }
    let mc = sample_delay_times(&p, COUNT, 2024).unwrap();
    let h = histogram_comparison(&mc.values, &k, k[0] - 4.0 * sd, k[0] + 5.0 * sd, 40).unwrap();
    assert!(h.sup_edgeworth < h.sup_gaussian, "{} vs {}", h.sup_edgeworth, h.sup_gaussian);
    assert_eq!(h.centers.len(), 40);
    assert_eq!(h.edges.len(), 41);
}
