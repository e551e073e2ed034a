//! Acceptance suite: one test per criterion, each printing a pass line
//! with the observed worst residual. Tolerances are pinned in the
//! assertions.

use cknet::backlund::{self, BacklundParams};
use cknet::cklax::{self, CircularQuadData};
use cknet::explicit;
use cknet::knet;
use cknet::lattice::{CknetLaxField, QuadNet};
use cknet::validate::{self, Direction};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const D1: f64 = 0.4;
const D2: f64 = 0.3;
// Gentler decay rate for whole-window curvature evaluation: the transform
// tails collapse onto the axis like sech(chi), and quads inside the
// collapse are too thin for the determinant-ratio curvature to mean
// anything numerically. sin(delta1) controls the collapse rate.
const GD1: f64 = 0.15;
const GALPHA: f64 = 1.2;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn every_quad<F: FnMut(usize, usize)>(net: &QuadNet, mut f: F) {
    let (kk, ll) = net.dims();
    for l in 0..ll - 1 {
        for k in 0..kk - 1 {
            f(k, l);
        }
    }
}

/// The five named generators on a given window at a given t (where the
/// parameter applies).
fn generator_suite(dims: (usize, usize), t: f64) -> Vec<(&'static str, QuadNet)> {
    vec![
        (
            "dini",
            explicit::dini(dims, GALPHA, std::f64::consts::FRAC_PI_2, GD1, D2, t).unwrap(),
        ),
        (
            "pseudosphere-family",
            explicit::pseudosphere_family(dims, std::f64::consts::FRAC_PI_2, GD1, D2, t).unwrap(),
        ),
        (
            "breather",
            explicit::breather(dims, 0.7, GD1, std::f64::consts::PI / 10.0, t).unwrap(),
        ),
        ("kuen", explicit::kuen(dims, GD1, D2, t).unwrap()),
        (
            "tractrix-pseudosphere",
            explicit::tractrix_pseudosphere(dims, 0.2, 24).unwrap(),
        ),
    ]
}

#[test]
fn criterion_01_constant_curvature_all_generators() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &t in &[-0.5, 0.0, 0.5] {
        for (name, net) in generator_suite((20, 20), t) {
            every_quad(&net, |k, l| {
                let kv = validate::gauss_curvature(&net, k, l).unwrap();
                let defect = (kv + 1.0).abs();
                assert!(
                    defect < 1e-8,
                    "{name} at t={t}: |K+1| = {defect:.3e} at ({k},{l})"
                );
                worst = worst.max(defect);
            });
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("acceptance 01 constant curvature: PASS (max |K+1| = {worst:.2e}, {elapsed:?})");
}

#[test]
fn criterion_02_circularity_only_at_unit_spectral_parameter() {
    let mut worst = 0.0f64;
    for (name, net) in generator_suite((20, 20), 0.0) {
        every_quad(&net, |k, l| {
            let im = validate::circularity(&net, k, l).unwrap();
            assert!(im < 1e-9, "{name}: cross-ratio imag {im:.3e} at ({k},{l})");
            worst = worst.max(im);
        });
    }
    let dini = explicit::dini((20, 20), GALPHA, std::f64::consts::FRAC_PI_2, GD1, D2, 0.5).unwrap();
    let mut max_off = 0.0f64;
    every_quad(&dini, |k, l| {
        max_off = max_off.max(validate::circularity(&dini, k, l).unwrap());
    });
    assert!(
        max_off > 1e-3,
        "dini at t=0.5 should be noncircular, got {max_off:.3e}"
    );
    println!(
        "acceptance 02 circularity at lambda=1 only: PASS (t=0 max {worst:.2e}, t=0.5 max {max_off:.2e})"
    );
}

#[test]
fn criterion_03_edge_constraint_all_generators() {
    let mut worst = 0.0f64;
    for &t in &[-0.5, 0.0, 0.5] {
        for (name, net) in generator_suite((20, 20), t) {
            let res = validate::edge_constraint_residuals(&net).unwrap();
            assert!(
                res.max < 1e-9,
                "{name} at t={t}: edge residual {:.3e}",
                res.max
            );
            worst = worst.max(res.max);
        }
    }
    println!("acceptance 03 edge constraint: PASS (max residual {worst:.2e})");
}

#[test]
fn criterion_04_backlund_metric_relations() {
    let mut rng = rng(4);
    let field = CknetLaxField::straight_line((8, 8), D1, D2);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let alpha = rng.gen_range(0.15..std::f64::consts::PI - 0.15);
        let t = rng.gen_range(-0.8..0.8);
        let (frame, base) = cklax::integrate(&field, t).unwrap();
        let bt = backlund::evolve(&field, BacklundParams::new(alpha, 1.1, t).unwrap()).unwrap();
        let net = backlund::immerse(&frame, &base, &field, &bt).unwrap();
        let expected = alpha.sin() / (t.cosh() - alpha.cos() * t.sinh());
        for l in 0..8 {
            for k in 0..8 {
                let d = (net.f(k, l) - base.f(k, l)).norm();
                let dot = net.n(k, l).dot(base.n(k, l));
                let e1 = (d - expected).abs();
                let e2 = (d * d + dot * dot - 1.0).abs();
                assert!(e1 < 1e-9, "distance defect {e1:.3e} (alpha={alpha}, t={t})");
                assert!(
                    e2 < 1e-9,
                    "sum relation defect {e2:.3e} (alpha={alpha}, t={t})"
                );
                worst = worst.max(e1).max(e2);
            }
        }
    }
    println!("acceptance 04 backlund metric relations: PASS (max defect {worst:.2e})");
}

#[test]
fn criterion_05_closed_forms_match_frame_pipeline() {
    let dims = (12, 12);
    let t = 0.3;
    let field = CknetLaxField::straight_line(dims, GD1, D2);
    let mut worst = 0.0f64;

    let mut check = |name: &str, closed: &QuadNet, pipeline: &QuadNet| {
        let (motion, residual) = validate::congruence(closed, pipeline).unwrap();
        let nres = validate::normal_residual(closed, pipeline, &motion);
        assert!(residual < 1e-8, "{name}: position residual {residual:.3e}");
        assert!(nres < 1e-8, "{name}: normal residual {nres:.3e}");
        worst = worst.max(residual).max(nres);
    };

    let (frame, base) = cklax::integrate(&field, t).unwrap();
    let bt = backlund::evolve(
        &field,
        BacklundParams::new(GALPHA, std::f64::consts::FRAC_PI_2, t).unwrap(),
    )
    .unwrap();
    let dini_pipeline = backlund::immerse(&frame, &base, &field, &bt).unwrap();
    let dini_closed =
        explicit::dini(dims, GALPHA, std::f64::consts::FRAC_PI_2, GD1, D2, t).unwrap();
    check("dini", &dini_closed, &dini_pipeline);

    let bt = backlund::evolve(
        &field,
        BacklundParams::new(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, t).unwrap(),
    )
    .unwrap();
    let pseudo_pipeline = backlund::immerse(&frame, &base, &field, &bt).unwrap();
    let pseudo_closed =
        explicit::pseudosphere_family(dims, std::f64::consts::FRAC_PI_2, GD1, D2, t).unwrap();
    check("pseudosphere-family", &pseudo_closed, &pseudo_pipeline);

    let (breather_pipeline, _) = backlund::double(&field, C64::new(0.7, 0.0), t).unwrap();
    let breather_closed = explicit::breather(dims, 0.7, GD1, D2, t).unwrap();
    check("breather", &breather_closed, &breather_pipeline);

    let (kuen_pipeline, _) = backlund::double(&field, C64::ZERO, t).unwrap();
    let kuen_closed = explicit::kuen(dims, GD1, D2, t).unwrap();
    check("kuen", &kuen_closed, &kuen_pipeline);

    println!("acceptance 05 closed form vs frame pipeline: PASS (max residual {worst:.2e})");
}

#[test]
fn criterion_06_transform_recursion_closed_form() {
    let mut rng = rng(6);
    let field = CknetLaxField::straight_line((15, 15), D1, D2);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        // stay away from the closed-form poles at sin(alpha + d2) = 0
        let alpha = loop {
            let a: f64 = rng.gen_range(-2.6..2.6);
            if a.abs() > 0.25 {
                break a;
            }
        };
        let theta = loop {
            let th = rng.gen_range(-std::f64::consts::PI + 0.2..std::f64::consts::PI - 0.2);
            if th.abs() > 0.1 {
                break th;
            }
        };
        let bt = backlund::evolve(&field, BacklundParams::new(alpha, theta, 0.0).unwrap()).unwrap();
        // closed form through the signed exponential of chi
        let r1 = (alpha.sin() + D1.sin()) / (alpha.sin() - D1.sin());
        let r2 = (alpha - D2).sin() / (alpha + D2).sin();
        for l in 0..15i32 {
            for k in 0..15i32 {
                let e = (theta / 2.0).tan() * r1.powi(k) * r2.powi(-l);
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                let expect =
                    (C64::new(-1.0, 0.0) + C64::new(2.0, 0.0) / (C64::new(1.0, -e))) * sign;
                let got = bt.s_at(k as usize, l as usize);
                let diff = (got - expect).norm();
                assert!(
                    diff < 1e-10,
                    "recursion vs closed form {diff:.3e} (alpha={alpha}, theta={theta})"
                );
                worst = worst.max(diff);
            }
        }
    }
    println!("acceptance 06 recursion closed form: PASS (max diff {worst:.2e})");
}

#[test]
fn criterion_07_evolution_compatibility_residual() {
    let mut rng = rng(7);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 1000 {
        let phase = |r: &mut ChaCha8Rng| C64::from_polar(1.0, r.gen_range(-3.1..3.1));
        let (s, s1, s2, l, m) = (
            phase(&mut rng),
            phase(&mut rng),
            phase(&mut rng),
            phase(&mut rng),
            phase(&mut rng),
        );
        let d1 = C64::new(rng.gen_range(0.2..1.2), 0.0);
        let d2 = C64::new(rng.gen_range(0.2..1.2), 0.0);
        let Ok((l2, m1, s12)) = cklax::evolve_quad(s, s1, s2, l, m, d1, d2) else {
            continue;
        };
        count += 1;
        for lam in [0.5f64, 1.0, 2.0] {
            let res = cklax::compatibility_residual(s, s1, s2, l, m, l2, m1, s12, d1, d2, lam.ln())
                .unwrap();
            assert!(res < 1e-9, "residual {res:.3e} at lambda {lam}");
            worst = worst.max(res);
        }
    }
    println!("acceptance 07 compatibility residual (1000 quads): PASS (max {worst:.2e})");
}

#[test]
fn criterion_08_factorization_into_knet_matrices() {
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let delta = rng.gen_range(0.2..1.3);
        let t = rng.gen_range(-0.7..0.7);
        let (h, h1, h12) = (
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        // cK transition with s = H, l = H1, s1 = H12 against V1 U with
        // delta_u = -delta_v = delta
        let lhs = cklax::lax_l(
            C64::from_polar(1.0, h),
            C64::from_polar(1.0, h12),
            C64::from_polar(1.0, h1),
            C64::new(delta, 0.0),
            t,
        )
        .unwrap()
        .m;
        let v1 = knet::lax_v(h1, h12, -delta, t).unwrap().m;
        let u = knet::lax_u(h, h1, delta, t).unwrap().m;
        let diff = (lhs - (v1 * u)).max_abs();
        assert!(diff < 1e-10, "factorization residual {diff:.3e}");
        worst = worst.max(diff);
    }
    println!("acceptance 08 transition factorization: PASS (max residual {worst:.2e})");
}

#[test]
fn criterion_09_quad_reconstruction_round_trip() {
    // a genuine circular K = -1 net: the transform of the line at t = 0
    let field = CknetLaxField::straight_line((11, 11), GD1, D2);
    let params = BacklundParams::new(GALPHA, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
    let (frame, base) = cklax::integrate(&field, 0.0).unwrap();
    let bt = backlund::evolve(&field, params).unwrap();
    let net = backlund::immerse(&frame, &base, &field, &bt).unwrap();

    let mut worst = 0.0f64;
    let mut count = 0;
    for l in 0..10 {
        for k in 0..10 {
            count += 1;
            let data = CircularQuadData::from_quad(
                net.f(k, l),
                net.f(k + 1, l),
                net.f(k + 1, l + 1),
                net.f(k, l + 1),
                net.n(k, l),
            )
            .unwrap();
            // half with the generating phase, half with a fixed arbitrary one
            let s_init = if (k + l) % 2 == 0 {
                bt.s_at(k, l)
            } else {
                C64::from_polar(1.0, 0.77)
            };
            let fit = cklax::fit_quad(&data, s_init).unwrap();
            // recovered angles match the generating parameter lines (the
            // fit lands on the principal branch, which here is the
            // generating one)
            assert!((fit.delta1.re - GD1).abs() < 1e-9 && fit.delta1.im.abs() < 1e-12);
            assert!((fit.delta2.re - D2).abs() < 1e-9 && fit.delta2.im.abs() < 1e-12);
            // the predicted fourth vertex and transported normals match
            worst = worst.max(fit.f12.max_diff(net.f(k + 1, l + 1)));
            worst = worst.max(fit.n1.max_diff(net.n(k + 1, l)));
            worst = worst.max(fit.n2.max_diff(net.n(k, l + 1)));
            worst = worst.max(fit.n12.max_diff(net.n(k + 1, l + 1)));
            // re-integrating the recovered data reproduces the quad rigidly
            let (_, rebuilt) = cklax::integrate(&fit.to_field().unwrap(), 0.0).unwrap();
            let target = QuadNet::from_fields(
                (2, 2),
                vec![
                    net.f(k, l),
                    net.f(k + 1, l),
                    net.f(k, l + 1),
                    net.f(k + 1, l + 1),
                ],
                vec![
                    net.n(k, l),
                    net.n(k + 1, l),
                    net.n(k, l + 1),
                    net.n(k + 1, l + 1),
                ],
            )
            .unwrap();
            let (motion, residual) = validate::congruence(&rebuilt, &target).unwrap();
            let nres = validate::normal_residual(&rebuilt, &target, &motion);
            assert!(
                residual < 1e-8 && nres < 1e-8,
                "reconstruction at ({k},{l}): f {residual:.3e}, n {nres:.3e}"
            );
            worst = worst.max(residual).max(nres);
        }
    }
    assert_eq!(count, 100);
    println!("acceptance 09 quad reconstruction (100 quads): PASS (max residual {worst:.2e})");
}

#[test]
fn criterion_10_kuen_planar_polygons() {
    let net = explicit::kuen((20, 20), GD1, D2, 0.0).unwrap();
    let mut worst = 0.0f64;
    for l in 0..20 {
        let p = validate::polygon_planarity(&net, Direction::First, l).unwrap();
        assert!(p < 1e-8, "polygon l={l} planarity {p:.3e}");
        worst = worst.max(p);
    }
    println!("acceptance 10 kuen planar polygons: PASS (max residual {worst:.2e})");
}

#[test]
fn criterion_11_breather_closure() {
    let d2 = std::f64::consts::PI / 10.0;
    let q = 3.0 / 5.0;
    let mu = -((1.0 / d2.tan()) * (d2 * q).tan()).asin();
    let period = explicit::breather_closure_period(d2, mu, 1000).expect("closure period");
    assert_eq!(period, 50);
    let rows = period as usize + 5;
    let net = explicit::breather((6, rows), mu, D1, d2, 0.0).unwrap();
    let mut worst = 0.0f64;
    for l in 0..rows - period as usize {
        for k in 0..6 {
            let diff = net.f(k, l).max_diff(net.f(k, l + period as usize));
            assert!(diff < 1e-8, "closure defect {diff:.3e} at ({k},{l})");
            worst = worst.max(diff);
        }
    }
    println!("acceptance 11 breather closure (P = {period}): PASS (max defect {worst:.2e})");
}

#[test]
fn criterion_12_knet_curvature_formula() {
    let mut rng = rng(12);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let du = rng.gen_range(0.3..1.3);
        let dv = rng.gen_range(0.3..1.3);
        let t = rng.gen_range(-0.8..0.8);
        let (h, h1, h2) = (
            rng.gen_range(-0.7..0.7),
            rng.gen_range(-0.7..0.7),
            rng.gen_range(-0.7..0.7),
        );
        let field =
            cknet::lattice::KnetField::from_cauchy(&[h, h1], &[h, h2], vec![du], vec![dv]).unwrap();
        let (_, net) = knet::integrate(&field, t).unwrap();
        let geometric = validate::gauss_curvature(&net, 0, 0).unwrap();
        let closed = knet::quad_curvature(du, dv, t).unwrap();
        let diff = (geometric - closed).abs();
        assert!(
            diff < 1e-8,
            "curvature mismatch {diff:.3e} (du={du}, dv={dv}, t={t})"
        );
        worst = worst.max(diff);
    }
    println!("acceptance 12 knet curvature formula: PASS (max mismatch {worst:.2e})");
}

#[test]
fn criterion_13_sym_derivative_finite_difference() {
    // a nontrivial compatible field on a 10x10 window
    let phases: Vec<f64> = (0..10).map(|i| 0.3 * ((i * i + 1) as f64).sin()).collect();
    let s_row0: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, p)).collect();
    let s_col0: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, -p)).collect();
    let s_col0 = {
        let mut c = s_col0;
        c[0] = s_row0[0];
        c
    };
    let l_row0: Vec<C64> = (0..9)
        .map(|i| C64::from_polar(1.0, 0.2 * i as f64))
        .collect();
    let m_col0: Vec<C64> = (0..9)
        .map(|i| C64::from_polar(1.0, -0.15 * i as f64))
        .collect();
    let field = CknetLaxField::from_cauchy(
        &s_row0,
        &s_col0,
        &l_row0,
        &m_col0,
        vec![C64::new(0.5, 0.0); 9],
        vec![C64::new(0.7, 0.0); 9],
    )
    .unwrap();
    let t0 = 0.2;
    let eps = 1e-6;
    let (frame, _) = cklax::integrate(&field, t0).unwrap();
    let (hi, _) = cklax::integrate(&field, t0 + eps).unwrap();
    let (lo, _) = cklax::integrate(&field, t0 - eps).unwrap();
    let mut worst = 0.0f64;
    for i in 0..frame.phi.len() {
        let fd = (hi.phi[i] - lo.phi[i]).scale(C64::new(1.0 / (2.0 * eps), 0.0));
        let scale = frame.phi_dot[i].max_abs().max(1.0);
        let rel = (fd - frame.phi_dot[i]).max_abs() / scale;
        assert!(
            rel < 1e-7,
            "relative derivative error {rel:.3e} at index {i}"
        );
        worst = worst.max(rel);
    }
    println!("acceptance 13 sym derivative vs finite difference: PASS (max rel {worst:.2e})");
}

#[test]
fn criterion_14_bianchi_permutability() {
    let field = CknetLaxField::straight_line((8, 8), D1, D2);
    let hat = BacklundParams::new(std::f64::consts::FRAC_PI_3, 0.9, 0.0).unwrap();
    let tilde = BacklundParams::new(-std::f64::consts::FRAC_PI_2, 1.3, 0.0).unwrap();
    let report = backlund::bianchi_check(&field, hat, tilde).unwrap();
    assert!(
        report.residual < 1e-8,
        "common fourth net residual {:.3e} at theta {:.6}",
        report.residual,
        report.theta_fourth
    );
    println!(
        "acceptance 14 bianchi permutability: PASS (residual {:.2e} at theta {:.6})",
        report.residual, report.theta_fourth
    );
}

#[test]
fn order_swap_invariance_supplement() {
    // supplements criterion 14: swapping the roles of the two transforms
    // locates the same fourth net
    let field = CknetLaxField::straight_line((6, 6), D1, D2);
    let hat = BacklundParams::new(std::f64::consts::FRAC_PI_3, 0.9, 0.0).unwrap();
    let tilde = BacklundParams::new(-std::f64::consts::FRAC_PI_2, 1.3, 0.0).unwrap();
    let a = backlund::bianchi_check(&field, hat, tilde).unwrap();
    let b = backlund::bianchi_check(&field, tilde, hat).unwrap();
    assert!(a.residual < 1e-8 && b.residual < 1e-8);
    assert!(
        (a.theta_fourth - b.theta_fourth).abs() < 1e-6,
        "fourth-net phases differ: {} vs {}",
        a.theta_fourth,
        b.theta_fourth
    );
    // equal angles and phases: the two composites coincide identically,
    // so the mismatch vanishes for every candidate phase
    let same = backlund::bianchi_check(&field, hat, hat).unwrap();
    assert!(same.residual < 1e-12);
}
