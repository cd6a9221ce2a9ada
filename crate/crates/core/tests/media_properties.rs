use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tpb_core::media::{
    eval_phase, sample_free_flight, sample_phase, time_of_flight, transmittance, FreeFlight, Medium, PhaseFunction,
};
use tpb_core::SPEED_OF_LIGHT;

fn hg(g: f64) -> PhaseFunction {
    PhaseFunction::henyey_greenstein(g).unwrap()
}

// 2π ∫ p(μ) dμ by composite Gauss-Legendre (5 points per panel)
fn sphere_integral(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683,
        0.538_469_310_105_683,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let h = 2.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = -1.0 + (p as f64 + 0.5) * h;
        for k in 0..5 {
            total += W[k] * f(mid + 0.5 * h * X[k]) * 0.5 * h;
        }
    }
    2.0 * PI * total
}

#[test]
fn phase_integrates_to_one() {
    for g in [-0.95, -0.5, 0.0, 1e-9, 0.3, 0.7, 0.95] {
        let p = hg(g);
        let total = sphere_integral(|mu| p.eval_unchecked(mu), 4000);
        assert!((total - 1.0).abs() < 1e-6, "g = {g}: {total}");
    }
    assert!((sphere_integral(|mu| PhaseFunction::Isotropic.eval_unchecked(mu), 10) - 1.0).abs() < 1e-12);
}

#[test]
fn phase_mean_cosine_is_g() {
    for g in [-0.6, 0.0, 0.4, 0.85] {
        let p = hg(g);
        let mean = sphere_integral(|mu| mu * p.eval_unchecked(mu), 4000);
        assert!((mean - g).abs() < 1e-6, "g = {g}: {mean}");
    }
}

// Pearson chi-square of sampled cosines against the exact bin probabilities
fn chi_square(g: f64, samples: usize, bins: usize) -> (f64, usize) {
    let p = hg(g);
    let mut rng = ChaCha8Rng::seed_from_u64(17 + (g * 100.0) as u64);
    let mut counts = vec![0usize; bins];
    for _ in 0..samples {
        let s = sample_phase(&p, &mut rng);
        assert!((s.pdf - p.eval_unchecked(s.cos_theta)).abs() <= 1e-12 * s.pdf.max(1.0));
        let b = (((s.cos_theta + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mut stat = 0.0;
    for (b, &c) in counts.iter().enumerate() {
        let lo = -1.0 + 2.0 * b as f64 / bins as f64;
        let hi = lo + 2.0 / bins as f64;
        // closed-form cdf of the HG cosine
        let cdf = |mu: f64| {
            if g.abs() < 1e-6 {
                (mu + 1.0) / 2.0
            } else {
                (1.0 - g * g) / (2.0 * g) * (1.0 / (1.0 + g * g - 2.0 * g * mu).sqrt() - 1.0 / (1.0 + g))
            }
        };
        let expected = (cdf(hi) - cdf(lo)) * samples as f64;
        stat += (c as f64 - expected).powi(2) / expected;
    }
    (stat, bins - 1)
}

#[test]
fn phase_sampling_matches_density() {
    for g in [-0.7, 0.0, 0.3, 0.9] {
        let (stat, dof) = chi_square(g, 200_000, 40);
        // 99.9% quantile of chi-square with 39 degrees of freedom is about 72.1
        assert!(stat < 72.1, "g = {g}: chi2 = {stat} with {dof} dof");
    }
}

#[test]
fn free_flight_mean_is_mean_free_path() {
    let m = Medium::new(0.3, 0.9, PhaseFunction::Isotropic, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    let mut sum = 0.0;
    for _ in 0..n {
        match sample_free_flight(&m, &mut rng) {
            FreeFlight::Interaction { distance, pdf } => {
                assert!((pdf - 1.2 * (-1.2 * distance).exp()).abs() < 1e-12);
                sum += distance;
            }
            FreeFlight::NoInteraction => panic!("participating medium"),
        }
    }
    let mean = sum / n as f64;
    // standard error of the mean is (1/σt)/sqrt(n)
    assert!((mean - 1.0 / 1.2).abs() < 4.0 * (1.0 / 1.2) / (n as f64).sqrt());
    assert_eq!(
        sample_free_flight(&Medium::vacuum(), &mut rng),
        FreeFlight::NoInteraction
    );
}

#[test]
fn rejects_out_of_domain_inputs() {
    let m = Medium::new(0.1, 0.1, PhaseFunction::Isotropic, 1.0).unwrap();
    assert!(transmittance(&m, -1.0).is_err());
    assert!(transmittance(&m, f64::NAN).is_err());
    assert!(time_of_flight(0.9, 1.0).is_err());
    assert!(eval_phase(&hg(0.2), 1.5).is_err());
    assert!(PhaseFunction::henyey_greenstein(1.0).is_err());
    assert!(Medium::new(-0.1, 0.1, PhaseFunction::Isotropic, 1.0).is_err());
    assert_eq!(transmittance(&m, 0.0).unwrap(), 1.0);
}

proptest! {
    #[test]
    fn transmittance_is_multiplicative(sa in 0.0..3.0f64, ss in 0.0..3.0f64, a in 0.0..20.0f64, b in 0.0..20.0f64) {
        let m = Medium::new(sa, ss, PhaseFunction::Isotropic, 1.0).unwrap();
        let joint = transmittance(&m, a + b).unwrap();
        let split = transmittance(&m, a).unwrap() * transmittance(&m, b).unwrap();
        prop_assert!((joint - split).abs() <= 1e-12 * joint.max(1e-300) + 1e-300);
        prop_assert!((0.0..=1.0).contains(&joint));
        prop_assert!(transmittance(&m, a + b).unwrap() <= transmittance(&m, a).unwrap());
    }

    #[test]
    fn time_of_flight_is_additive_and_slow(eta in 1.0..3.0f64, a in 0.0..100.0f64, b in 0.0..100.0f64) {
        let joint = time_of_flight(eta, a + b).unwrap();
        let split = time_of_flight(eta, a).unwrap() + time_of_flight(eta, b).unwrap();
        prop_assert!((joint - split).abs() <= 1e-15 * joint.max(1e-30));
        prop_assert!(joint >= (a + b) / SPEED_OF_LIGHT * (1.0 - 1e-15));
    }

    #[test]
    fn phase_is_positive_and_reciprocal(g in -0.99..0.99f64, mu in -1.0..1.0f64) {
        let p = hg(g);
        let v = eval_phase(&p, mu).unwrap();
        prop_assert!(v > 0.0 && v.is_finite());
        // flipping both directions leaves the angle and the value unchanged
        let flipped = eval_phase(&hg(-g), -mu).unwrap();
        prop_assert!((v - flipped).abs() <= 1e-12 * v);
    }
}
