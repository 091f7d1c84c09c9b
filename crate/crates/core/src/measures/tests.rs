use super::*;
use crate::exponents::Exponent;
use crate::geometry::{ConvexShape, FourierStar};
use crate::onedim::RadialLaw;
use alloc::vec;
use core::f64::consts::{E, PI};

fn grid() -> Arc<DirectionGrid> {
    Arc::new(DirectionGrid::new(2, 1024).unwrap())
}

fn inverse_cube(g: &Arc<DirectionGrid>) -> DisintegratedMeasure {
    DisintegratedMeasure::homogeneous(&AngularWeight::constant(1.0), Exponent::new(-1.0 / 3.0).unwrap(), g.clone()).unwrap()
}

fn disc(g: &Arc<DirectionGrid>, r: f64) -> StarBody {
    StarBody::from_convex(g.clone(), ConvexShape::disc(r).unwrap()).unwrap()
}

fn unit_k(g: &Arc<DirectionGrid>) -> ConvexBody {
    ConvexBody::from_shape(g.clone(), ConvexShape::disc(1.0).unwrap()).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn costar_masses_follow_two_pi_over_t() {
    let g = grid();
    let mu = inverse_cube(&g);
    for t in [0.5, 1.0, 2.0, 4.0] {
        let m = mu.costar_mass(&CoStar::from_star(&disc(&g, t))).unwrap();
        assert!(close(m, 2.0 * PI / t, 1e-12), "{t}: {m}");
    }
    assert_eq!(mu.star_mass(&disc(&g, 1.0)).unwrap(), f64::INFINITY);
}

#[test]
fn lebesgue_star_masses() {
    let g = grid();
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    assert!(close(leb.star_mass(&disc(&g, 2.0)).unwrap(), 4.0 * PI, 1e-12));
    let f = FourierStar::new(2.0, vec![1.0], vec![], false).unwrap();
    let a = StarBody::from_shape(g.clone(), StarShape::Fourier(f)).unwrap();
    assert!(close(leb.star_mass(&a).unwrap(), 4.5 * PI, 1e-12));
    let quad = DisintegratedMeasure::homogeneous(&AngularWeight::quadrant(), Exponent::PosInf, g.clone()).unwrap();
    assert!(close(quad.star_mass(&disc(&g, 1.0)).unwrap(), PI / 4.0, 1e-12));
}

#[test]
fn sampled_lebesgue_star_uses_quadrature() {
    let g = grid();
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    let a = StarBody::from_fn(g.clone(), |u| 2.0 + u[0]).unwrap();
    assert!(close(leb.star_mass(&a).unwrap(), 4.5 * PI, 1e-10));
}

#[test]
fn warped_costar_masses() {
    let g = grid();
    let b = disc(&g, 1.0);
    let m = DisintegratedMeasure::warped(&AngularWeight::constant(1.0), &b, RadialLaw::power(2.0).unwrap()).unwrap();
    let c = CoStar::from_star(&b);
    assert!(close(m.costar_mass(&c).unwrap(), 2.0 * PI, 1e-12));
    let e5 = DisintegratedMeasure::warped(&AngularWeight::constant(1.0), &b, RadialLaw::power_exp()).unwrap();
    assert!(close(e5.costar_mass(&c).unwrap(), 2.0 * PI * (E - 1.0), 1e-12));
}

#[test]
fn costar_of_fourier_inner() {
    let g = grid();
    let mu = inverse_cube(&g);
    let f = FourierStar::new(2.0, vec![1.0], vec![], false).unwrap();
    let c = CoStar::from_star(&StarBody::from_shape(g.clone(), StarShape::Fourier(f)).unwrap());
    assert!(close(mu.costar_mass(&c).unwrap(), 2.0 * PI / 3f64.sqrt(), 1e-10));
}

#[test]
fn single_atom() {
    let g = grid();
    let mut eta = vec![0.0; g.len()];
    eta[5] = 0.7;
    let mu = DisintegratedMeasure::from_parts(g.clone(), eta, RadialLaw::power(2.0).unwrap(), vec![1.0; g.len()], Some(-1.0)).unwrap();
    let m = mu.costar_mass(&CoStar::from_star(&disc(&g, 1.0))).unwrap();
    assert!(close(m, 0.7, 1e-15));
    let mask: Vec<bool> = (0..g.len()).map(|i| i == 5).collect();
    assert!(close(mu.eta_from_slab(&mask).unwrap(), 0.7, 1e-12));
}

#[test]
fn boundary_of_homothets() {
    let g = grid();
    let mu = inverse_cube(&g);
    let k = unit_k(&g);
    for (t, want) in [(1.0, 2.0 * PI), (2.0, PI / 2.0)] {
        let c = CoStar::from_star(&disc(&g, t));
        let e = boundary_measure(&mu, Region::CoStar(&c), &k, Side::Inner, BoundaryMode::Auto).unwrap();
        assert_eq!(e.mode, "exact");
        assert!(close(e.value, want, 1e-12), "{t}: {e:?}");
        // the star-boundary integral sees the same set
        let s = boundary_measure(&mu, Region::CoStar(&c), &k, Side::Inner, BoundaryMode::Star).unwrap();
        assert!(close(s.value, want, 1e-10), "{s:?}");
    }
}

#[test]
fn lebesgue_square_boundary() {
    let g = grid();
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    let sq = ConvexBody::from_shape(g.clone(), ConvexShape::boxed(&[-0.5, -0.5], &[0.5, 0.5]).unwrap()).unwrap();
    let k = ConvexBody::from_shape(g.clone(), ConvexShape::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap()).unwrap();
    // the square is a homothet of K, so Auto takes the exact path
    let e = boundary_measure(&leb, Region::Convex(&sq), &k, Side::Outer, BoundaryMode::Auto).unwrap();
    assert!(close(e.value, 4.0, 1e-12), "{e:?}");
    let p = boundary_measure(&leb, Region::Convex(&sq), &k, Side::Outer, BoundaryMode::Polygon).unwrap();
    assert!(close(p.value, 4.0, 1e-12), "{p:?}");
    // [0,1]^2 does not contain the origin in its interior
    let v = polygon_boundary(&leb, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], &k, true);
    assert!(close(v, 4.0, 1e-12));
}

#[test]
fn lebesgue_disc_perimeter_by_star_integral() {
    let g = grid();
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    let sq = StarBody::from_convex(g.clone(), ConvexShape::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap()).unwrap();
    let k = unit_k(&g);
    let e = boundary_measure(&leb, Region::Star(&sq), &k, Side::Outer, BoundaryMode::Polygon).unwrap();
    assert!(close(e.value, 8.0, 1e-12));
    let f = FourierStar::new(2.0, vec![0.3], vec![0.2], false).unwrap();
    let a = StarBody::from_shape(g.clone(), StarShape::Fourier(f.clone())).unwrap();
    let e = boundary_measure(&leb, Region::Star(&a), &k, Side::Outer, BoundaryMode::Star).unwrap();
    // arc length of the curve, by direct quadrature
    let len = integrate(
        |t| {
            let (r, dr) = f.eval(t);
            (r * r + dr * dr).sqrt()
        },
        0.0,
        core::f64::consts::TAU,
        1e-13,
        1e-13,
    );
    assert!(close(e.value, len.value, 1e-8), "{} vs {}", e.value, len.value);
}

#[test]
fn homogeneity_defects() {
    let g = grid();
    let mu = inverse_cube(&g);
    let r = check_homogeneity(&mu, -1.0, 8, 1e-9).unwrap();
    assert!(r.pass && r.relative_gap() < 1e-9, "{r:?}");
    let c = CoStar::from_star(&disc(&g, 1.0));
    let lhs = mu.costar_mass(&c.scaled(3.0).unwrap()).unwrap().powf(-1.0);
    assert!(close(lhs, 3.0 / (2.0 * PI), 1e-12));
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    let r = check_homogeneity(&leb, 0.5, 8, 1e-9).unwrap();
    assert!(r.pass, "{r:?}");
    let other = DisintegratedMeasure::homogeneous(&AngularWeight::constant(1.0), Exponent::new(-0.2).unwrap(), g.clone()).unwrap();
    let mix = MixtureMeasure::new(vec![(1.0, mu), (1.0, other)]).unwrap();
    assert_eq!(mix.homogeneity(), None);
    let r = check_homogeneity(&mix, -1.0, 4, 1e-9).unwrap();
    assert!(!r.pass && r.relative_gap() > 0.1, "{r:?}");
}

#[test]
fn slabs_recover_eta() {
    let g = grid();
    let all = vec![true; g.len()];
    let mu = inverse_cube(&g);
    assert!(close(mu.slab_mass(&all, 1.0, 2.0).unwrap(), PI, 1e-12));
    assert!(close(mu.eta_from_slab(&all).unwrap(), 2.0 * PI, 1e-12));
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    assert!(close(leb.slab_mass(&all, 1.0, 2.0).unwrap(), 3.0 * PI, 1e-12));
    assert!(close(leb.eta_from_slab(&all).unwrap(), leb.eta_total(), 1e-9));
    assert!(eta_from_slab_mass(0.0, 1.0).is_err());
}

#[test]
fn rotation_and_mixture() {
    let g = grid();
    let quad = DisintegratedMeasure::homogeneous(&AngularWeight::quadrant(), Exponent::new(-1.0 / 3.0).unwrap(), g.clone()).unwrap();
    let c = CoStar::from_star(&disc(&g, 1.0));
    let base = quad.costar_mass(&c).unwrap();
    assert!(close(base, PI / 2.0, 1e-12));
    let steps = g.rotation_steps(PI / 2.0).unwrap();
    let r = quad.rotated(steps).unwrap();
    let both = DisintegratedMeasure::mix(&[(1.0, &quad), (1.0, &r)]).unwrap();
    assert!(close(both.costar_mass(&c).unwrap(), PI, 1e-12));
    // on a box the rotated copy sees the other side
    let bx = StarBody::from_convex(g.clone(), ConvexShape::boxed(&[-1.0, -2.0], &[1.0, 2.0]).unwrap()).unwrap();
    let cb = CoStar::from_star(&bx);
    let a = quad.costar_mass(&cb).unwrap();
    let b = r.costar_mass(&cb).unwrap();
    assert!(close(a, b, 1e-9), "{a} {b}");
}

#[test]
fn linear_images_preserve_mass_of_preimages() {
    let g = grid();
    let mu = inverse_cube(&g);
    let t = [[2.0, 0.5], [0.0, 1.0]];
    let img = mu.linear_image(t).unwrap();
    let k = ConvexShape::boxed(&[-1.0, -0.5], &[1.0, 0.5]).unwrap();
    let tk = k.linear_image(&t).unwrap();
    let c = CoStar::from_star(&StarBody::from_convex(img.grid().clone(), tk).unwrap());
    let want = mu.costar_mass(&CoStar::from_star(&StarBody::from_convex(g.clone(), k).unwrap())).unwrap();
    assert!(close(img.costar_mass(&c).unwrap(), want, 1e-9));
    let x = [0.7, -0.4, 0.0];
    let tx = [2.0 * 0.7 + 0.5 * -0.4, -0.4, 0.0];
    assert!(close(img.density(&tx), mu.density(&x) / 2.0, 1e-12));
}

#[test]
fn density_matches_power_law() {
    let g = grid();
    let mu = inverse_cube(&g);
    let x = [0.3, -0.4, 0.0];
    assert!(close(mu.density(&x), 0.5f64.powi(-3), 1e-9));
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    assert!(close(leb.density(&x), 1.0, 1e-12));
}

#[test]
fn voxel_boundary_mode_matches_exact() {
    let g = grid();
    let leb = DisintegratedMeasure::lebesgue(g.clone()).unwrap();
    let k = unit_k(&g);
    let a = disc(&g, 1.0);
    let s = OracleSettings::default();
    let e = boundary_measure(&leb, Region::Star(&a), &k, Side::Outer, BoundaryMode::Voxel(s)).unwrap();
    assert!(e.mode.starts_with("voxel"));
    assert!(close(e.value, 2.0 * PI, 0.02), "{e:?}");
}
