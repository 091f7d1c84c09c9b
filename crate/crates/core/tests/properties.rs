//! Randomized invariants across the public API.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use cbmkit_core::exponents::{power_mean, Exponent};
use cbmkit_core::geometry::{gauge, minkowski_sum, radial_sum, ConvexBody, ConvexShape, CoStar, DirectionGrid, FourierStar, StarBody, StarShape};
use cbmkit_core::measures::{check_homogeneity, AngularWeight, DisintegratedMeasure, SetMeasure};
use cbmkit_core::onedim::{boundary_1d, equality_shape_1d, iso_1d, ocbm_1d, phi_inv, phi_tail, IntervalUnion, RadialLaw};
use cbmkit_core::oracle::{voxel_minkowski, voxelize_convex, voxelize_star, DensityTable, Lattice};
use cbmkit_core::sobolev::{coarea_integral, sobolev_constants, total_gradient_mass, weak_norms, QuasiNormProfile, RadialFunction, RadialProfile};
use cbmkit_core::verifiers::{check_cbm, equality_diagnostics, EqualityOptions, SumPath};
use proptest::prelude::*;

fn grid() -> Arc<DirectionGrid> {
    static G: OnceLock<Arc<DirectionGrid>> = OnceLock::new();
    G.get_or_init(|| Arc::new(DirectionGrid::new(2, 1024).unwrap())).clone()
}

fn grid3() -> Arc<DirectionGrid> {
    static G: OnceLock<Arc<DirectionGrid>> = OnceLock::new();
    G.get_or_init(|| Arc::new(DirectionGrid::new(3, 2048).unwrap())).clone()
}

fn homogeneous(g: &Arc<DirectionGrid>, w0: &AngularWeight, p: f64) -> DisintegratedMeasure {
    DisintegratedMeasure::homogeneous(w0, Exponent::new(p).unwrap(), g.clone()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}

/// Discs with the origin inside, boxes around it and polygons inscribed in ellipses.
fn convex_shape() -> impl Strategy<Value = ConvexShape> {
    let disc = (0.3f64..2.5, 0.0f64..0.7, 0.0f64..2.0 * PI)
        .prop_map(|(r, d, a)| ConvexShape::ball(2, [d * r * a.cos(), d * r * a.sin(), 0.0], r).unwrap());
    let boxed = (-2.0f64..-0.2, -2.0f64..-0.2, 0.2f64..2.0, 0.2f64..2.0)
        .prop_map(|(x0, y0, x1, y1)| ConvexShape::boxed(&[x0, y0], &[x1, y1]).unwrap());
    // k equally spaced angles with jitter keep every angular gap below pi
    let polygon = (3usize..9, 0.4f64..2.5, 0.4f64..2.5, 0.0f64..PI, prop::collection::vec(-0.2f64..0.2, 8)).prop_map(
        |(k, a, b, phi, jitter)| {
            let (s, c) = phi.sin_cos();
            let v: Vec<[f64; 2]> = (0..k)
                .map(|i| {
                    let t = 2.0 * PI * (i as f64 + jitter[i]) / k as f64;
                    let (x, y) = (a * t.cos(), b * t.sin());
                    [c * x - s * y, s * x + c * y]
                })
                .collect();
            ConvexShape::polygon(&v).unwrap()
        },
    );
    prop_oneof![disc, boxed, polygon]
}

fn fourier_star() -> impl Strategy<Value = FourierStar> {
    (0.5f64..2.5, prop::collection::vec(-1.0f64..1.0, 8), 0.0f64..0.45).prop_map(|(a0, raw, amp)| {
        let total: f64 = raw.iter().map(|c| c.abs()).sum::<f64>().max(1e-12);
        let s = amp * a0 / total;
        FourierStar::new(a0, raw[..4].iter().map(|c| c * s).collect(), raw[4..].iter().map(|c| c * s).collect(), false).unwrap()
    })
}

fn star_body() -> impl Strategy<Value = StarBody> {
    prop_oneof![
        convex_shape().prop_map(|s| StarBody::from_convex(grid(), s).unwrap()),
        fourier_star().prop_map(|f| StarBody::from_shape(grid(), StarShape::Fourier(f)).unwrap()),
    ]
}

fn law() -> impl Strategy<Value = RadialLaw> {
    prop_oneof![
        (1.2f64..4.0).prop_map(|a| RadialLaw::power(a).unwrap()),
        (0.5f64..2.0).prop_map(|c| RadialLaw::power_exp().with_scale(c).unwrap()),
    ]
}

/// Finite-mass unions in `[0, inf)`, optionally ending in a half-line.
fn finite_union() -> impl Strategy<Value = IntervalUnion> {
    (0.05f64..3.0, prop::collection::vec((0.05f64..2.0, 0.05f64..2.0), 0..4), any::<bool>()).prop_map(|(first, gaps, tail)| {
        let mut x = first;
        let mut parts = Vec::new();
        for (gap, len) in gaps {
            parts.push((x + gap, x + gap + len));
            x += gap + len;
        }
        if tail || parts.is_empty() {
            parts.push((x + first, f64::INFINITY));
        }
        IntervalUnion::new(parts).unwrap()
    })
}

fn ramp_family() -> impl Strategy<Value = RadialFunction> {
    (0.3f64..2.0, 0.1f64..2.0, 0.2f64..3.0, prop::option::of((0.1f64..1.5, 0.0f64..2.0))).prop_map(|(a, w, top, extra)| {
        let mut knots = vec![0.0, a, a + w];
        let mut values = vec![0.0, 0.0, top];
        if let Some((w2, v2)) = extra {
            knots.push(a + w + w2);
            values.push(v2);
        }
        let k = ConvexBody::from_shape(grid(), ConvexShape::disc(1.0).unwrap()).unwrap();
        RadialFunction::new(k, RadialProfile::new(knots, values).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn power_mean_settles_at_zero(a in 1e-2f64..1e2, b in 1e-2f64..1e2, lambda in 0.01f64..0.99) {
        let g = power_mean(a, b, lambda, Exponent::Zero);
        for sign in [1.0, -1.0] {
            let mut prev = f64::INFINITY;
            for k in 1..=9 {
                let d = (power_mean(a, b, lambda, Exponent::new(sign * 10f64.powi(-k)).unwrap()) - g).abs();
                prop_assert!(d <= prev, "k={k}: {d} > {prev}");
                prev = d;
            }
            prop_assert!(prev <= 1e-8 * g);
        }
    }

    #[test]
    fn support_functions_add(a in convex_shape(), b in convex_shape(), lambda in 0.0f64..=1.0) {
        let g = grid();
        let (ka, kb) = (ConvexBody::from_shape(g.clone(), a).unwrap(), ConvexBody::from_shape(g.clone(), b).unwrap());
        let s = minkowski_sum(&ka, &kb, lambda).unwrap();
        for i in 0..g.len() {
            let expect = lambda * ka.support()[i] + (1.0 - lambda) * kb.support()[i];
            prop_assert!((s.support()[i] - expect).abs() <= 1e-12 * expect.abs().max(1.0), "direction {i}");
        }
    }

    #[test]
    fn boundary_points_have_unit_gauge(a in star_body()) {
        let g = grid();
        for i in (0..g.len()).step_by(7) {
            let u = g.direction(i);
            let x = [a.rho()[i] * u[0], a.rho()[i] * u[1], 0.0];
            prop_assert!((gauge(&a, &x) - 1.0).abs() <= 1e-9, "direction {i}: {}", gauge(&a, &x));
        }
    }

    #[test]
    fn homogeneity_of_homogeneous_measures(p in -0.49f64..-0.02, t in 0.5f64..3.0, a in star_body()) {
        let mu = homogeneous(&grid(), &AngularWeight::constant(1.0), p);
        let q = mu.homogeneity().unwrap();
        prop_assert!(check_homogeneity(&mu, q, 8, 1e-9).unwrap().pass);
        let c = CoStar::from_star(&a);
        let (m, mt) = (mu.costar_mass(&c).unwrap(), mu.costar_mass(&c.scaled(t).unwrap()).unwrap());
        prop_assert!(rel(mt, t.powf(1.0 / q) * m) <= 1e-9, "{mt} vs {}", t.powf(1.0 / q) * m);
    }

    #[test]
    fn total_mass_is_infinite(p in prop_oneof![-0.49f64..-0.02, 0.05f64..4.0], a in star_body(), quadrant in any::<bool>()) {
        let w0 = if quadrant { AngularWeight::quadrant() } else { AngularWeight::constant(1.0) };
        let mu = homogeneous(&grid(), &w0, p);
        let total = mu.star_mass(&a).unwrap() + mu.costar_mass(&CoStar::from_star(&a)).unwrap();
        prop_assert_eq!(total, f64::INFINITY);
    }

    #[test]
    fn lebesgue_masses_add_up_inside_a_ball(a in star_body(), quadrant in any::<bool>()) {
        let g = grid();
        // samples only, so both sides use the same quadrature
        let a = StarBody::from_samples(g.clone(), a.rho().to_vec()).unwrap();
        let w0 = if quadrant { AngularWeight::quadrant() } else { AngularWeight::constant(1.0) };
        let mu = DisintegratedMeasure::homogeneous(&w0, Exponent::PosInf, g.clone()).unwrap();
        let r = a.max_radius() * 1.5;
        let ball = StarBody::from_convex(g.clone(), ConvexShape::disc(r).unwrap()).unwrap();
        let shell: f64 = (0..g.len()).map(|i| mu.eta()[i] * mu.law().interval_mass(a.rho()[i], r)).sum();
        let whole = mu.star_mass(&ball).unwrap();
        prop_assert!(rel(mu.star_mass(&a).unwrap() + shell, whole) <= 1e-9);
    }

    #[test]
    fn cbm_slack_is_monotone_in_q(a in star_body(), b in star_body(), lambda in 0.05f64..0.95, q1 in -1.0f64..-0.05, q2 in -1.0f64..-0.05) {
        let mu = homogeneous(&grid(), &AngularWeight::constant(1.0), -1.0 / 3.0);
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let r_lo = check_cbm(&mu, &a, &b, lambda, lo, &SumPath::Auto).unwrap();
        let r_hi = check_cbm(&mu, &a, &b, lambda, hi, &SumPath::Auto).unwrap();
        prop_assert_eq!(r_lo.lhs, r_hi.lhs);
        // a smaller exponent gives a smaller power mean, hence a tighter bound
        prop_assert!(r_lo.slack <= r_hi.slack, "{} > {}", r_lo.slack, r_hi.slack);
        prop_assert!(r_lo.pass && r_hi.pass);
    }

    #[test]
    fn homothets_have_zero_residual(a in star_body(), t in 0.2f64..5.0, f in fourier_star()) {
        let mu = homogeneous(&grid(), &AngularWeight::constant(1.0), -1.0 / 3.0);
        let d = equality_diagnostics(&a.scaled(t).unwrap(), &a, mu.eta(), &EqualityOptions::default()).unwrap();
        prop_assert!(d.homothety_residual <= 1e-12 && d.homothetic, "{d:?}");
        let b = StarBody::from_shape(grid(), StarShape::Fourier(f)).unwrap();
        let d = equality_diagnostics(&b, &a, mu.eta(), &EqualityOptions::default()).unwrap();
        let ratio: Vec<f64> = b.rho().iter().zip(a.rho()).map(|(x, y)| x / y).collect();
        let spread = ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / ratio.iter().cloned().fold(f64::INFINITY, f64::min);
        // a residual of zero means proportional radial functions
        prop_assert_eq!(d.homothety_residual == 0.0, spread == 1.0);
    }

    #[test]
    fn level_norms_are_ordered_and_linear(f in ramp_family(), c in 0.1f64..10.0) {
        let mu = homogeneous(&grid(), &AngularWeight::constant(1.0), -1.0 / 3.0);
        let prof = QuasiNormProfile::Power { alpha: 0.5 };
        let n = weak_norms(&f, &mu, &prof, Some(0.3)).unwrap();
        prop_assert!(n.l_phi_1 >= n.l_phi_inf, "{n:?}");
        let fc = RadialFunction::new(f.gauge.clone(), f.profile.scaled(c));
        let m = weak_norms(&fc, &mu, &prof, Some(0.3)).unwrap();
        for (x, y) in [(n.l_phi_1, m.l_phi_1), (n.l_phi_inf, m.l_phi_inf), (n.l_1, m.l_1), (n.l_inf, m.l_inf), (n.l_beta.unwrap(), m.l_beta.unwrap())] {
            prop_assert!(rel(y, c * x) <= 1e-12, "{x} {y}");
        }
        prop_assert!(rel(total_gradient_mass(&fc, &mu).unwrap(), c * total_gradient_mass(&f, &mu).unwrap()) <= 1e-12);
    }

    #[test]
    fn coarea_chain(f in ramp_family(), p in -0.49f64..-0.02) {
        let mu = homogeneous(&grid(), &AngularWeight::constant(1.0), p);
        let (_, alpha, c1, _) = sobolev_constants(&mu, &f.gauge).unwrap();
        let grad = total_gradient_mass(&f, &mu).unwrap();
        let co = coarea_integral(&f, &mu).unwrap();
        let l1 = weak_norms(&f, &mu, &QuasiNormProfile::Power { alpha }, None).unwrap().l_phi_1;
        prop_assert!(grad >= co * (1.0 - 1e-9), "{grad} < {co}");
        prop_assert!(co >= c1 * l1 * (1.0 - 1e-9), "{co} < {}", c1 * l1);
    }

    #[test]
    fn lebesgue_exponent_dominates_lorentz_below_one(a in 0.3f64..2.0, w in 0.1f64..2.0, alpha in 0.2f64..0.9) {
        let mu = homogeneous(&grid(), &AngularWeight::constant(1.0), -1.0 / 3.0);
        let k = ConvexBody::from_shape(grid(), ConvexShape::disc(1.0).unwrap()).unwrap();
        let f = RadialFunction::new(k, RadialProfile::ramp(a, a + w).unwrap());
        let n = weak_norms(&f, &mu, &QuasiNormProfile::Power { alpha }, Some(alpha)).unwrap();
        prop_assert!(n.l_beta.unwrap() >= n.l_phi_1 * (1.0 - 1e-9), "{n:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn tail_inverse_round_trips(l in law(), x in -3.0f64..3.0) {
        let t = 10f64.powf(x);
        // e^{1/t} - 1 leaves the double range below t = 1/709
        prop_assume!(phi_tail(&l, t).is_finite());
        let back = phi_inv(&l, phi_tail(&l, t)).unwrap();
        prop_assert!(rel(back, t) <= 1e-10, "{t} -> {back}");
    }

    #[test]
    fn isoperimetric_profile_bounds_unions(l in law(), c in finite_union(), b in 0.1f64..3.0) {
        let r = iso_1d(&l, &c, b).unwrap();
        prop_assert!(r.pass, "{r:?}");
        let shape = equality_shape_1d(&l, &c, b).unwrap();
        prop_assert!(shape.consistent, "{shape:?}");
    }

    #[test]
    fn one_sided_inequality_on_unions(l in law(), c in finite_union(), first in 0.05f64..3.0, b in 0.1f64..3.0, t in 0.0f64..5.0) {
        // A starts at the origin so its complement has finite mass
        let a = IntervalUnion::interval(0.0, first).unwrap().union(&c);
        prop_assert!(ocbm_1d(&l, &a, b, t).unwrap().with_tolerance(1e-10).pass);
        let single = ocbm_1d(&l, &IntervalUnion::interval(0.0, first).unwrap(), b, t).unwrap();
        prop_assert!(single.slack.abs() <= 1e-10 * single.rhs.max(1e-12), "{single:?}");
    }

    #[test]
    fn one_dimensional_boundary_is_linear_in_b(l in law(), c in finite_union(), b in 0.1f64..3.0, k in 1i32..6) {
        let s = 2f64.powi(k);
        prop_assert_eq!(boundary_1d(&l, &c, s * b), s * boundary_1d(&l, &c, b));
    }
}

fn lattice() -> Lattice {
    Lattice::new(2, 3.0, 1.0 / 32.0).unwrap()
}

fn small_convex() -> impl Strategy<Value = ConvexShape> {
    convex_shape().prop_map(|s| {
        let ext = ConvexBody::from_shape(grid(), s.clone()).unwrap().as_star().unwrap().max_radius();
        if ext > 1.2 {
            s.scaled(1.2 / ext).unwrap()
        } else {
            s
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn voxel_sums_commute_and_are_monotone(a in small_convex(), b in small_convex(), grow in 1.0f64..1.2) {
        let g = grid();
        let l = lattice();
        let va = voxelize_convex(l, &ConvexBody::from_shape(g.clone(), a.clone()).unwrap()).unwrap();
        let vb = voxelize_convex(l, &ConvexBody::from_shape(g.clone(), b).unwrap()).unwrap();
        let big = voxelize_convex(l, &ConvexBody::from_shape(g.clone(), a.scaled(grow).unwrap()).unwrap()).unwrap();
        prop_assert!(va.is_subset(&big).unwrap());
        let ab = voxel_minkowski(&va, &vb).unwrap();
        prop_assert_eq!(&ab, &voxel_minkowski(&vb, &va).unwrap());
        prop_assert!(ab.is_subset(&voxel_minkowski(&big, &vb).unwrap()).unwrap());
    }

    #[test]
    fn minkowski_sum_contains_radial_sum(a in star_body(), b in star_body()) {
        let g = grid();
        let l = lattice();
        let (a, b) = (a.scaled(0.6 / a.max_radius()).unwrap(), b.scaled(0.6 / b.max_radius()).unwrap());
        let sum = voxel_minkowski(&voxelize_star(l, &a).unwrap(), &voxelize_star(l, &b).unwrap()).unwrap();
        let radial = radial_sum(&a, &b).unwrap();
        // shrink by one cell diagonal so rasterization cannot be blamed
        let slack = l.h() * 2f64.sqrt() * 2.0;
        let inner = StarBody::from_samples(g.clone(), radial.rho().iter().map(|r| (r - slack).max(0.0)).collect()).unwrap();
        prop_assert!(voxelize_star(l, &inner).unwrap().is_subset(&sum).unwrap());
    }
}

#[test]
fn three_dimensional_costar_scaling() {
    let mu = homogeneous(&grid3(), &AngularWeight::constant(1.0), -0.25);
    let q = mu.homogeneity().unwrap();
    let a = StarBody::from_convex(grid3(), ConvexShape::boxed(&[-1.0, -0.5, -0.3], &[0.7, 1.0, 2.0]).unwrap()).unwrap();
    let c = CoStar::from_star(&a);
    for t in [0.5, 2.0, 3.0] {
        let (m, mt) = (mu.costar_mass(&c).unwrap(), mu.costar_mass(&c.scaled(t).unwrap()).unwrap());
        assert!(rel(mt, t.powf(1.0 / q) * m) <= 1e-9);
    }
}

/// Mean absolute area error over a fixed family of off-center discs.
fn mean_disc_error(h: f64) -> f64 {
    let g = grid();
    let l = Lattice::new(2, 2.0, h).unwrap();
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    let table = DensityTable::new(&leb, l, 0).unwrap();
    let mut total = 0.0;
    let n = 96;
    for k in 0..n {
        let r = 0.7 + 0.9 * k as f64 / n as f64;
        let frac = |x: f64| x - x.floor();
        let c = [0.2 * frac(0.618 * k as f64) - 0.1, 0.2 * frac(0.414 * k as f64) - 0.1, 0.0];
        let disc = ConvexShape::ball(2, c, r).unwrap();
        let set = voxelize_convex(l, &ConvexBody::from_shape(g.clone(), disc.clone()).unwrap()).unwrap();
        total += (table.mass(&set).unwrap().value - disc.volume()).abs() / (2.0 * PI * r);
    }
    total / n as f64
}

#[test]
fn disc_areas_converge_at_first_order() {
    let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let errs: Vec<f64> = hs.iter().map(|&h| mean_disc_error(h)).collect();
    let slope = (errs[0].ln() - errs[3].ln()) / (hs[0].ln() - hs[3].ln());
    for w in errs.windows(2) {
        assert!(w[1] <= 0.5 * w[0], "halving h did not halve the error: {errs:?}");
    }
    assert!(slope >= 1.0, "empirical order {slope}: {errs:?}");
}
