use std::path::Path;

use proptest::prelude::*;

use tpb_core::integrator::{registry, RenderOptions, Silent};
use tpb_core::photon::{trace_photons, WalkConfig};
use tpb_core::reference::{first_arrival_along, render_reference, ReferenceConfig};
use tpb_core::scene::{parse_scene, serialize_scene, Scene};
use tpb_core::{Vec3, SPEED_OF_LIGHT};

fn scene(text: &str) -> Scene {
    Scene::from_description(&parse_scene(text).unwrap(), Path::new(".")).unwrap()
}

fn global_medium(sigma_a: f64, sigma_s: f64) -> Scene {
    scene(&format!(
        "camera {{\n position 0 0 -3\n look_at 0 0 0\n resolution 4 4\n}}\n\
         medium {{\n sigma_a {sigma_a}\n sigma_s {sigma_s}\n g 0.5\n shape global\n}}\n\
         light {{\n position 0 0 0\n power 1 1 1\n}}\n"
    ))
}

#[test]
fn analog_walks_store_one_over_one_minus_albedo_beams() {
    for (sa, ss) in [(0.5, 0.5), (0.2, 0.8), (0.9, 0.1)] {
        let s = global_medium(sa, ss);
        let albedo = ss / (sa + ss);
        let cfg = WalkConfig {
            max_vertices: 100_000,
            rr_start: 1,
            photons: 40_000,
        };
        let (beams, stats) = trace_photons(&s, &cfg, 5, 1, 0.01);
        assert_eq!(stats.walks, 40_000);
        assert_eq!(beams.len() as u64, stats.beams);
        let mean = stats.beams as f64 / stats.walks as f64;
        let expected = 1.0 / (1.0 - albedo);
        // beams per walk are geometric: variance albedo / (1 - albedo)^2
        let sigma = (albedo / (1.0 - albedo).powi(2) / stats.walks as f64).sqrt();
        assert!(
            (mean - expected).abs() < 4.0 * sigma,
            "albedo {albedo}: {mean} vs {expected}"
        );
        // analog walks never reweight
        let flux0 = beams[0].flux;
        assert!(beams.iter().all(|b| b.flux == flux0));
    }
}

#[test]
fn weighted_walks_carry_the_same_expected_flux() {
    let s = global_medium(0.3, 0.7);
    let sum_flux = |rr_start| {
        let cfg = WalkConfig {
            max_vertices: 100_000,
            rr_start,
            photons: 40_000,
        };
        let (beams, _) = trace_photons(&s, &cfg, 9, 1, 0.01);
        beams.iter().map(|b| b.flux[0]).sum::<f64>()
    };
    let analog = sum_flux(1);
    let weighted = sum_flux(6);
    assert!(((analog - weighted) / analog).abs() < 0.03, "{analog} vs {weighted}");
}

#[test]
fn beams_start_where_the_previous_one_scattered() {
    let s = global_medium(0.1, 0.9);
    let cfg = WalkConfig {
        max_vertices: 6,
        rr_start: 100,
        photons: 200,
    };
    let (beams, _) = trace_photons(&s, &cfg, 2, 3, 0.01);
    for b in &beams {
        let clock = b.start_time * SPEED_OF_LIGHT;
        // the path so far is at least the straight distance from the light
        assert!(clock >= b.origin.length() * (1.0 - 1e-12));
    }
    assert!(beams.iter().any(|b| b.start_time == 0.0));
}

#[test]
fn photon_tracing_is_pool_independent() {
    let s = global_medium(0.2, 0.6);
    let cfg = WalkConfig {
        max_vertices: 8,
        rr_start: 3,
        photons: 3000,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| trace_photons(&s, &cfg, 77, 4, 0.02))
    };
    let (a, sa) = run(1);
    let (b, sb) = run(3);
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    let (c, _) = trace_photons(&s, &cfg, 78, 4, 0.02);
    assert_ne!(a, c);
}

// minimise a convex function on [a, b]
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b)).min(f(a)).min(f(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The earliest arrival over a camera ray's medium segment, found numerically.
    #[test]
    fn first_arrival_matches_a_direct_search(
        lx in -0.8..0.8f64, ly in -0.8..0.8f64, lz in -0.8..0.8f64,
        dx in -0.25..0.25f64, dy in -0.25..0.25f64, eta in 1.0..1.6f64,
    ) {
        let s = scene(&format!(
            "camera {{\n position 0 0 -3\n look_at 0 0 0\n resolution 1 1\n}}\n\
             medium {{\n sigma_s 0.3\n eta {eta}\n shape box -1 -1 -1 1 1 1\n}}\n\
             light {{\n position {lx} {ly} {lz}\n power 1 1 1\n}}\n"
        ));
        let light = Vec3::new(lx, ly, lz);
        let cam = Vec3::new(0.0, 0.0, -3.0);
        let dir = Vec3::new(dx, dy, 1.0).normalized();
        // entry and exit with the unit cube
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for (o, v) in [(cam.x, dir.x), (cam.y, dir.y), (cam.z, dir.z)] {
            let (a, b) = ((-1.0 - o) / v, (1.0 - o) / v);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        prop_assume!(lo < hi);
        let warped = |s: f64| (lo + eta * (s + (cam + dir * (lo + s) - light).length())) / SPEED_OF_LIGHT;
        let unwarped = |s: f64| eta * (cam + dir * (lo + s) - light).length() / SPEED_OF_LIGHT;
        let want_w = golden_section(warped, 0.0, hi - lo);
        let want_u = golden_section(unwarped, 0.0, hi - lo);
        let got_w = first_arrival_along(&s, dir, false).unwrap();
        let got_u = first_arrival_along(&s, dir, true).unwrap();
        prop_assert!((got_w - want_w).abs() < 1e-16, "{} vs {}", got_w, want_w);
        prop_assert!((got_u - want_u).abs() < 1e-16, "{} vs {}", got_u, want_u);
    }

    #[test]
    fn scene_text_round_trips(
        sa in 0.0..5.0f64, ss in 0.0..5.0f64, g in -0.9..0.9f64, eta in 1.0..2.0f64,
        px in -10.0..10.0f64, fov in 1.0..170.0f64, w in 1u32..2000, h in 1u32..2000,
        bins in 1usize..4096, t0 in 0.0..5.0f64, span in 0.001..100.0f64,
        photons in 1u64..1_000_000, seed in any::<u64>(), unwarp in any::<bool>(),
        radius in prop::option::of(1e-4..1.0f64),
    ) {
        let text = format!(
            "camera {{\n position {px} 0.5 -3\n look_at 0 0 0\n fov {fov}\n resolution {w} {h}\n}}\n\
             film {{\n t_min {t0}\n t_max {}\n bins {bins}\n}}\n\
             medium {{\n sigma_a {sa}\n sigma_s {ss}\n g {g}\n eta {eta}\n shape sphere 0 0 0 1.5\n}}\n\
             surface {{\n shape box -3 -3 -3 -2 -2 -2\n material dielectric 1.5\n}}\n\
             surface {{\n shape plane 0 -2 0 0 1 0\n material diffuse 0.5 0.5 0.5\n}}\n\
             light {{\n position 0.1 0.2 0.3\n power 1 2 3\n emission heaviside\n}}\n\
             integrator {{\n mode beams2d\n photons {photons}\n seed {seed}\n unwarp {unwarp}\n radius {}\n}}\n",
            t0 + span,
            radius.map_or("auto".to_string(), |r| r.to_string()),
        );
        let parsed = parse_scene(&text).unwrap();
        let again = parse_scene(&serialize_scene(&parsed)).unwrap();
        prop_assert_eq!(parsed, again);
    }
}

#[test]
fn negative_coefficients_name_the_field() {
    let err = parse_scene(
        "camera {\n position 0 0 -3\n look_at 0 0 0\n}\nmedium {\n sigma_s -1\n shape global\n}\nlight {\n position 0 0 0\n}\n",
    )
    .unwrap_err();
    assert!(err.to_string().contains("sigma_s"), "{err}");
    assert!(err.0.iter().any(|e| e.line == 6));
}

#[test]
fn minimal_scene_parses() {
    let d = parse_scene(
        "camera {\n position 0 0 -3\n look_at 0 0 0\n}\nmedium {\n sigma_s 0.5\n shape global\n}\nlight {\n position 0 0 0\n}\n",
    )
    .unwrap();
    assert_eq!(d.media.len(), 1);
    assert_eq!(d.lights.len(), 1);
}

/// Beams and the path tracer estimate the same single-scattering image.
#[test]
fn beams_and_reference_agree_on_total_energy() {
    let s = scene(
        "camera {\n position 0 0 -3\n look_at 0 0 0\n fov 40\n resolution 8 8\n}\n\
         film {\n t_min 0\n t_max 40\n bins 32\n}\n\
         medium {\n sigma_a 0.1\n sigma_s 0.5\n g 0.3\n eta 1.2\n shape box -1 -1 -1 1 1 1\n}\n\
         light {\n position 0.2 -0.1 0.3\n power 1 1 1\n}\n\
         integrator {\n max_vertices 3\n max_bounces 2\n photons 20000\n iterations 24\n seed 4\n}\n",
    );
    let mut opts = RenderOptions::from_scene(&s);
    let beams = registry()
        .create("beams1d")
        .unwrap()
        .render(&s, &opts, &mut Silent)
        .unwrap();
    opts.mode = "beams2d".into();
    let beams2d = registry()
        .create("beams2d")
        .unwrap()
        .render(&s, &opts, &mut Silent)
        .unwrap();
    let (reference, stats) = render_reference(
        &s,
        &ReferenceConfig {
            spp: 4096,
            max_bounces: 2,
            seed: 4,
            unwarp: false,
            pixels: None,
        },
    );
    assert_eq!(stats.dropped, 0);
    let r = reference.total()[0] + reference.overflow[0];
    for (name, film) in [("beams1d", &beams), ("beams2d", &beams2d)] {
        let b = film.total()[0] + film.overflow[0];
        assert!(((b - r) / r).abs() < 0.03, "{name}: {b} vs reference {r}");
    }
}

/// Unwarping removes the camera leg, so the signal moves earlier.
#[test]
fn unwarped_response_is_earlier() {
    let s = scene(
        "camera {\n position 0 0 -3\n look_at 0 0 0\n fov 30\n resolution 4 4\n}\n\
         film {\n t_min 0\n t_max 30\n bins 60\n}\n\
         medium {\n sigma_a 0.1\n sigma_s 0.5\n shape box -1 -1 -1 1 1 1\n}\n\
         light {\n position 0 0 0\n power 1 1 1\n}\n\
         integrator {\n max_vertices 2\n max_bounces 1\n photons 5000\n iterations 4\n}\n",
    );
    let mean_time = |film: &tpb_core::film::TransientFilm| {
        let (mut num, mut den) = (0.0, 0.0);
        for p in 0..film.pixel_count() {
            for b in 0..film.bins() {
                let v = film.get(p, b)[0];
                num += v * (b as f64 + 0.5);
                den += v;
            }
        }
        num / den * film.bin_width()
    };
    for mode in ["beams1d", "reference"] {
        let mut opts = RenderOptions::from_scene(&s);
        opts.mode = mode.into();
        opts.spp = 256;
        let warped = registry().create(mode).unwrap().render(&s, &opts, &mut Silent).unwrap();
        opts.unwarp = true;
        let unwarped = registry().create(mode).unwrap().render(&s, &opts, &mut Silent).unwrap();
        let shift = mean_time(&warped) - mean_time(&unwarped);
        // the camera sits 2 m from the medium and the medium is 2 m deep
        assert!(
            shift > 2.0 / SPEED_OF_LIGHT && shift < 4.5 / SPEED_OF_LIGHT,
            "{mode}: {shift}"
        );
    }
}
