use proptest::prelude::*;

use tpb_core::beam_map::{intersect_beam, BeamMap, RayQuery};
use tpb_core::estimators::{estimate_beam_1d, estimate_beam_2d, one_minus_exp_over_x, SERIES_THRESHOLD};
use tpb_core::kernels::Epanechnikov;
use tpb_core::media::{Medium, PhaseFunction};
use tpb_core::photon::PhotonBeam;
use tpb_core::{Spectrum, Vec3, SPEED_OF_LIGHT};

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

fn medium() -> Medium {
    Medium::new(0.2, 0.7, PhaseFunction::henyey_greenstein(0.4).unwrap(), 1.33).unwrap()
}

fn beam(origin: Vec3, direction: Vec3, length: f64, radius: f64) -> PhotonBeam {
    PhotonBeam {
        origin,
        direction: direction.normalized(),
        length,
        flux: Spectrum([1.0, 0.5, 0.25]),
        start_time: 1.5e-9,
        radius,
        region: 0,
        eta: 1.33,
    }
}

fn query(origin: Vec3, direction: Vec3, length: f64) -> RayQuery {
    RayQuery {
        origin,
        direction: direction.normalized(),
        length,
        start_time: 2e-9,
        eta: 1.33,
    }
}

// distance from point p to the beam's axis segment
fn distance_to_axis(b: &PhotonBeam, p: Vec3) -> (f64, f64) {
    let s = (p - b.origin).dot(b.direction);
    let foot = b.origin + b.direction * s;
    ((p - foot).length(), s)
}

fn arb_vec(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| v(x, y, z))
}

fn arb_dir() -> impl Strategy<Value = Vec3> {
    arb_vec(1.0)
        .prop_filter("non-zero", |d| d.length() > 0.1)
        .prop_map(|d| d.normalized())
}

fn arb_beam() -> impl Strategy<Value = PhotonBeam> {
    (arb_vec(1.0), arb_dir(), 0.05..2.5f64, 0.01..0.3f64).prop_map(|(o, d, l, r)| beam(o, d, l, r))
}

fn arb_query() -> impl Strategy<Value = RayQuery> {
    (arb_vec(2.0), arb_dir(), 0.5..5.0f64).prop_map(|(o, d, l)| query(o, d, l))
}

// a ray aimed at a point within the blur radius of the beam
fn arb_hitting_pair() -> impl Strategy<Value = (PhotonBeam, RayQuery)> {
    (arb_beam(), arb_dir(), 0.05..0.95f64, arb_vec(1.0), 0.1..2.0f64).prop_map(|(b, d, along, jitter, back)| {
        let sideways = jitter - b.direction * jitter.dot(b.direction);
        let target = b.origin + b.direction * (along * b.length) + sideways * (0.5 * b.radius);
        (b, query(target - d * back, d, back + 1.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bvh_matches_brute_force(beams in prop::collection::vec(arb_beam(), 1..120), queries in prop::collection::vec(arb_query(), 1..6)) {
        let map = BeamMap::build(beams);
        for q in &queries {
            prop_assert_eq!(map.intersect_ray(q), map.intersect_ray_brute_force(q));
        }
    }

    #[test]
    fn chord_lies_inside_the_blur_cylinder((b, q) in arb_hitting_pair()) {
        if let Some(i) = intersect_beam(&q, &b, 0) {
            prop_assert!(i.s_r_minus < i.s_r_plus);
            prop_assert!(i.s_r_minus >= 0.0 && i.s_r_plus <= q.length + 1e-12);
            for k in 0..=16 {
                let s = i.s_r_minus + (i.s_r_plus - i.s_r_minus) * (k as f64 / 16.0);
                let (d, sb) = distance_to_axis(&b, q.origin + q.direction * s);
                prop_assert!(d <= b.radius * (1.0 + 1e-9) + 1e-12);
                prop_assert!(sb >= -1e-9 && sb <= b.length + 1e-9);
            }
            prop_assert!(i.t_minus <= i.t_center && i.t_center <= i.t_plus);
        }
    }

    #[test]
    fn misses_stay_outside(b in arb_beam(), q in arb_query()) {
        if intersect_beam(&q, &b, 0).is_none() {
            for k in 0..=64 {
                let s = q.length * k as f64 / 64.0;
                let (d, sb) = distance_to_axis(&b, q.origin + q.direction * s);
                prop_assert!(!(d < b.radius * (1.0 - 1e-9) && sb > 1e-9 && sb < b.length - 1e-9));
            }
        }
    }

    /// Arrival time at a chord end is the beam time plus the ray time at that point.
    #[test]
    fn arrival_times_add_along_both_legs((b, q) in arb_hitting_pair()) {
        let i = intersect_beam(&q, &b, 0);
        prop_assert!(i.is_some());
        if let Some(i) = i {
            for s in [i.s_r_minus, i.s_r_plus] {
                let (_, sb) = distance_to_axis(&b, q.origin + q.direction * s);
                let beam_time = b.start_time + b.eta * sb.clamp(0.0, b.length) / SPEED_OF_LIGHT;
                let ray_time = q.start_time + q.eta * s / SPEED_OF_LIGHT;
                let t = beam_time + ray_time;
                prop_assert!((t - i.t_minus).abs() < 1e-18 || (t - i.t_plus).abs() < 1e-18);
            }
        }
    }

    /// Exact 2D estimate against midpoint quadrature of the in-scattering integral.
    #[test]
    fn estimate_2d_matches_quadrature((b, q) in arb_hitting_pair()) {
        let m = medium();
        let i = intersect_beam(&q, &b, 0);
        prop_assert!(i.is_some());
        if let Some(i) = i {
            let e = estimate_beam_2d(&i, &b, &m).unwrap();
            let phase = m.phase.eval_unchecked(b.direction.dot(-q.direction));
            let n = 4000;
            let h = (i.s_r_plus - i.s_r_minus) / n as f64;
            let mut integral = 0.0;
            for k in 0..n {
                let s = i.s_r_minus + (k as f64 + 0.5) * h;
                let (_, sb) = distance_to_axis(&b, q.origin + q.direction * s);
                integral += (-m.sigma_t() * (s + sb)).exp() * h;
            }
            let expected = integral * phase * m.sigma_s() / (std::f64::consts::PI * b.radius * b.radius);
            for c in 0..3 {
                let want = expected * b.flux[c];
                prop_assert!((e.value[c] - want).abs() <= 1e-6 * want + 1e-300, "{} vs {}", e.value[c], want);
            }
        }
    }

    #[test]
    fn series_branch_is_continuous(x in -1e-6..1e-6f64) {
        let exact = if x == 0.0 { 1.0 } else { -(-x).exp_m1() / x };
        prop_assert!((one_minus_exp_over_x(x) - exact).abs() < 1e-12);
    }
}

#[test]
fn series_threshold_is_seamless() {
    for x in [SERIES_THRESHOLD, -SERIES_THRESHOLD] {
        let below = one_minus_exp_over_x(x * (1.0 - 1e-9));
        let above = one_minus_exp_over_x(x * (1.0 + 1e-9));
        assert!((below - above).abs() < 1e-14, "{below} {above}");
    }
    assert_eq!(one_minus_exp_over_x(0.0), 1.0);
    assert!((one_minus_exp_over_x(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
}

// Offset the ray sideways by h, perpendicular to both ray and beam, and
// integrate the estimate over h. A thin beam of unit flux seen by a ray at
// angle θ gives the value phase·σs·T/sinθ for either blur.
fn swept(radius: f64, blur2d: bool) -> (f64, f64) {
    let m = medium();
    let b = beam(v(-1.0, 0.0, 0.0), v(1.0, 0.0, 0.0), 2.0, radius);
    let dir = v(0.6, 0.0, 0.8).normalized();
    let side = b.direction.cross(dir).normalized();
    // ray passes through the beam point at s_b = 1 (x = 0) after 1.5 m
    let base = v(0.0, 0.0, 0.0) - dir * 1.5;
    let n = 2000;
    let mut total = 0.0;
    for k in 0..n {
        let h = -radius + (k as f64 + 0.5) * 2.0 * radius / n as f64;
        let q = RayQuery {
            origin: base + side * h,
            direction: dir,
            length: 3.0,
            start_time: 0.0,
            eta: 1.33,
        };
        let Some(i) = intersect_beam(&q, &b, 0) else { continue };
        let value = if blur2d {
            estimate_beam_2d(&i, &b, &m).unwrap().value[0]
        } else {
            match estimate_beam_1d(&i, &b, &m, &Epanechnikov, 1e-9) {
                Some(s) => s.value[0],
                None => 0.0,
            }
        };
        total += value * 2.0 * radius / n as f64;
    }
    let cos = b.direction.dot(-dir);
    let sin = (1.0 - cos * cos).sqrt();
    let thin = m.phase.eval_unchecked(cos) * m.sigma_s() * (-m.sigma_t() * (1.5 + 1.0)).exp() / sin;
    (total, thin)
}

#[test]
fn both_blurs_converge_to_the_thin_beam_limit() {
    let mut last = (f64::INFINITY, f64::INFINITY);
    for radius in [0.2, 0.05, 0.0125, 0.003] {
        let (one, thin) = swept(radius, false);
        let (two, _) = swept(radius, true);
        let err = (((one - thin) / thin).abs(), ((two - thin) / thin).abs());
        assert!(
            err.0 <= last.0 * 1.01 + 1e-6 && err.1 <= last.1 * 1.01 + 1e-6,
            "radius {radius}: {err:?}"
        );
        last = err;
    }
    assert!(last.0 < 2e-3 && last.1 < 2e-3, "{last:?}");
}

#[test]
fn estimate_1d_skips_degenerate_and_off_segment_pairs() {
    let m = medium();
    let b = beam(v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0), 1.0, 0.1);
    // parallel, inside the cylinder
    let q = query(v(0.05, 0.0, -1.0), v(0.0, 0.0, 1.0), 3.0);
    let i = intersect_beam(&q, &b, 0).unwrap();
    assert!(i.degenerate);
    assert!(estimate_beam_1d(&i, &b, &m, &Epanechnikov, 1e-9).is_none());
    // closest approach beyond the beam end but the cylinder is still clipped by the end plane
    let q = query(v(-1.0, 0.0, 1.02), v(1.0, 0.0, -0.5), 3.0);
    if let Some(i) = intersect_beam(&q, &b, 0) {
        if !i.closest_in_segments {
            assert!(estimate_beam_1d(&i, &b, &m, &Epanechnikov, 1e-9).is_none());
        }
    }
}
