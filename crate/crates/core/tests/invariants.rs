use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

use strata_chern::geometry::{
    concurrence, concurrence_from_nz, eta_from_sandwich, eta_value, filtered_qgt, qgt,
};
use strata_chern::mesh::{build_mesh, chern_number, plaquette_curvature};
use strata_chern::model::{
    analytic_chern, d_derivatives, d_vector, dirac_point_k, k_from_fractional, nn_vectors,
    nnn_vectors, valence_state, BlochState, ModelParams,
};
use strata_chern::multi::{
    coherence_matrix, embed_state, hecke_pairing, levi_type, probe_block, sector_response_multi,
    unitary_invariance_check,
};
use strata_chern::witness::{sector_responses, weight_alpha};
use strata_chern::{rng, Cplx};

fn gapped_params() -> impl Strategy<Value = ModelParams<f64>> {
    (0.5f64..1.5, 0.1f64..0.5, -PI..PI, -3.0f64..3.0).prop_filter_map(
        "near a wall",
        |(t1, t2, phi, m)| {
            let p = ModelParams::new(t1, t2, phi, m);
            let w = 3.0 * 3f64.sqrt() * t2 * phi.sin();
            ((m - w).abs() > 0.2 && (m + w).abs() > 0.2).then_some(p)
        },
    )
}

fn momentum() -> impl Strategy<Value = [f64; 2]> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| k_from_fractional(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn valence_spinor_identities(p in gapped_params(), k in momentum()) {
        let d = d_vector(k, &p);
        let s = valence_state(&d).unwrap();
        let [nx, ny, nz] = d.unit();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-14);
        prop_assert!((s.va.norm_sqr() - (1.0 - nz) / 2.0).abs() <= 1e-13);
        prop_assert!((s.vb.norm_sqr() - (1.0 + nz) / 2.0).abs() <= 1e-13);
        prop_assert!((s.va * s.vb.conj() - Cplx::new(-nx / 2.0, ny / 2.0)).norm() <= 1e-13);
    }

    #[test]
    fn valence_state_is_lower_eigenvector(p in gapped_params(), k in momentum()) {
        let d = d_vector(k, &p);
        let s = valence_state(&d).unwrap();
        // (d . sigma) u = -|d| u with sigma acting on (A, B)
        let hx = Cplx::new(d.dx, -d.dy);
        let top = s.va * d.dz + hx * s.vb;
        let bottom = hx.conj() * s.va - s.vb * d.dz;
        let e = d.norm();
        prop_assert!((top + s.va * e).norm() <= 1e-12 * e.max(1.0));
        prop_assert!((bottom + s.vb * e).norm() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn weights_are_complementary(p in gapped_params(), k in momentum(), theta in -PI..PI) {
        let s = valence_state(&d_vector(k, &p)).unwrap();
        let (a, s_exp) = weight_alpha(&s, theta);
        let (b, _) = weight_alpha(&s, theta + PI);
        prop_assert!((a + b - 1.0).abs() <= 1e-14);
        prop_assert!((-1.0..=1.0).contains(&s_exp));
        let eta = eta_value(&s, theta);
        prop_assert!((eta - (2.0 * a - 1.0)).abs() <= 1e-13);
        prop_assert!((eta + s_exp).abs() <= 1e-13);
        prop_assert!((eta - eta_from_sandwich(&s, theta)).abs() <= 1e-13);
        prop_assert!(eta.abs() <= concurrence(&s) + 1e-14);
        prop_assert!((concurrence(&s) - concurrence_from_nz(s.nz())).abs() <= 1e-13);
    }

    #[test]
    fn metric_determinant(p in gapped_params(), k in momentum()) {
        let q = qgt(k, &p).unwrap();
        let det = q.det_g();
        let want = q.fxy * q.fxy / 4.0;
        if det > 1e-20 {
            prop_assert!((det - want).abs() <= 1e-10 * det, "{} {}", det, want);
        }
    }

    #[test]
    fn filtered_tensor_two_paths(p in gapped_params(), k in momentum(), theta in -PI..PI, a in 0.0..(2.0 * PI)) {
        let s = filtered_qgt(k, &p, theta, [a.cos(), a.sin()]).unwrap();
        prop_assert!(s.proportionality_error() <= 1e-10);
        prop_assert!(s.fqs.abs() <= s.c * s.fq + 1e-12 * (1.0 + s.fq));
    }

    #[test]
    fn hecke_additive(a in prop::collection::vec(-5i64..6, 0..6), b in prop::collection::vec(-5i64..6, 0..6),
                      c in prop::collection::vec(-5i64..6, 0..6), d in prop::collection::vec(-5i64..6, 0..6)) {
        let ac: Vec<i64> = a.iter().chain(&c).copied().collect();
        let bd: Vec<i64> = b.iter().chain(&d).copied().collect();
        prop_assert_eq!(hecke_pairing(&ac, &bd), hecke_pairing(&a, &b) + hecke_pairing(&c, &d));
    }

    #[test]
    fn levi_components_sum(seed in any::<u64>(), m in 1usize..5, n in 1usize..5, theta in -PI..PI) {
        let mut r = rng::stream(seed, 0);
        let x = rng::unit_vector::<f64, _>(&mut r, m);
        let y = rng::unit_vector::<f64, _>(&mut r, n);
        let t = levi_type(&probe_block(&x, &y, theta)).unwrap();
        prop_assert_eq!((t.r_plus, t.r_minus), (1, 1));
        prop_assert_eq!(t.total(), m + n);
    }

    #[test]
    fn negativity_factorization(p in gapped_params(), k in momentum(), seed in any::<u64>()) {
        let s = valence_state(&d_vector(k, &p)).unwrap();
        let mut r = rng::stream(seed, 1);
        let x = rng::unit_vector::<f64, _>(&mut r, 3);
        let y = rng::unit_vector::<f64, _>(&mut r, 2);
        let e = embed_state(&s, &x, &y).unwrap();
        prop_assert!((e.norm_sqr() - 1.0).abs() <= 1e-14);
        prop_assert!((e.negativity_factor() - concurrence(&s) / 2.0).abs() <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn plaquettes_gauge_invariant(seed in any::<u64>()) {
        let p = ModelParams::<f64>::default().with_mass(0.5);
        let mesh = build_mesh(&p, 12, 12).unwrap();
        let mut r = rng::stream(seed, 0);
        let phases: Vec<f64> = (0..mesh.states().len()).map(|_| r.random::<f64>() * 2.0 * PI).collect();
        let f0 = plaquette_curvature(&mesh).unwrap();
        let f1 = plaquette_curvature(&mesh.rephased(&phases)).unwrap();
        for (a, b) in f0.values().iter().zip(f1.values()) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn fhs_total_is_integer(p in gapped_params(), n in 12usize..20) {
        let f = plaquette_curvature(&build_mesh(&p, n, n).unwrap()).unwrap();
        let total = f.total_over_2pi();
        prop_assert!((total - total.round()).abs() <= 1e-12);
    }

    #[test]
    fn opposite_phases_sum_to_mu(mass in -2.5f64..2.5, theta in -PI..PI) {
        prop_assume!((mass.abs() - 3f64.sqrt()).abs() > 0.1);
        let mesh = build_mesh(&ModelParams::default().with_mass(mass), 12, 12).unwrap();
        let f = plaquette_curvature(&mesh).unwrap();
        let a = sector_responses(&mesh, &f, theta).unwrap();
        let b = sector_responses(&mesh, &f, theta + PI).unwrap();
        prop_assert!((a.nu_minus + b.nu_minus - a.mu as f64).abs() <= 1e-12);
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let p = ModelParams::new(1.0, 1.0 / 3.0, 0.9, 0.4);
    let h = 1e-5;
    for i in 0..100 {
        let mut r = rng::stream(2024, i);
        let (f1, f2) = rng::uniform_fractional::<f64, _>(&mut r);
        let k = k_from_fractional(f1, f2);
        let grad = d_derivatives(k, &p);
        for a in 0..2 {
            let mut kp = k;
            let mut km = k;
            kp[a] += h;
            km[a] -= h;
            let (dp, dm) = (d_vector(kp, &p), d_vector(km, &p));
            let fd = [
                (dp.d0 - dm.d0) / (2.0 * h),
                (dp.dx - dm.dx) / (2.0 * h),
                (dp.dy - dm.dy) / (2.0 * h),
                (dp.dz - dm.dz) / (2.0 * h),
            ];
            let an = grad.along(a);
            let exact = [an.d0, an.dx, an.dy, an.dz];
            for c in 0..4 {
                assert!(
                    (fd[c] - exact[c]).abs() <= 1e-8,
                    "k={k:?} a={a} c={c}: {} vs {}",
                    fd[c],
                    exact[c]
                );
            }
        }
    }
}

#[test]
fn dirac_point_conventions() {
    let k = dirac_point_k::<f64>();
    let sum = nn_vectors::<f64>()
        .iter()
        .fold(Cplx::new(0.0, 0.0), |acc, d| {
            acc + Cplx::from_polar(1.0, k[0] * d[0] + k[1] * d[1])
        });
    assert!(sum.norm() <= 1e-13);
    let s: f64 = nnn_vectors::<f64>()
        .iter()
        .map(|b| (k[0] * b[0] + k[1] * b[1]).sin())
        .sum();
    assert!((s - 3.0 * 3f64.sqrt() / 2.0).abs() <= 1e-13, "{s}");
}

#[test]
fn chern_constant_within_chambers() {
    let p = ModelParams::<f64>::default();
    let wall = 3f64.sqrt();
    for (range, want) in [((-3.0, -wall), 0), ((-wall, wall), -1), ((wall, 3.0), 0)] {
        for j in 1..10 {
            let m = range.0 + (range.1 - range.0) * j as f64 / 10.0;
            assert_eq!(analytic_chern(&p.with_mass(m)).unwrap(), want, "M={m}");
        }
    }
}

#[test]
fn chern_mesh_independent() {
    for mass in [-2.0, 0.0, 0.5, 2.5] {
        let p = ModelParams::default().with_mass(mass);
        let cs: Vec<i32> = [12, 24, 48]
            .iter()
            .map(|&n| {
                chern_number(&plaquette_curvature(&build_mesh(&p, n, n).unwrap()).unwrap()).unwrap()
            })
            .collect();
        assert!(cs.iter().all(|&c| c == cs[0]), "{cs:?}");
    }
}

#[test]
fn eta_matches_alpha_on_mesh() {
    let p = ModelParams::<f64>::default().with_mass(0.5);
    let mesh = build_mesh(&p, 48, 48).unwrap();
    for theta in [0.0, 1.0, -2.5] {
        for s in mesh.states() {
            let (alpha, s_exp) = weight_alpha(s, theta);
            let eta = eta_value(s, theta);
            assert!((eta - (2.0 * alpha - 1.0)).abs() <= 1e-13);
            assert!((eta + s_exp).abs() <= 1e-13);
        }
    }
}

#[test]
fn saturation_at_aligned_equator_point() {
    let p = ModelParams::<f64>::new(1.0, 0.0, 0.0, 0.0);
    let k = [1.9, -0.35];
    let s = valence_state(&d_vector(k, &p)).unwrap();
    assert_eq!(s.nz(), 0.0);
    let theta = -strata_chern::scalar::arg(s.coherence);
    let sample = filtered_qgt(k, &p, theta, [0.0, 1.0]).unwrap();
    assert!((sample.eta - 1.0).abs() <= 1e-14);
    assert!((sample.fqs - sample.fq).abs() <= 1e-12);
}

#[test]
fn unitary_invariance_random_trials() {
    let p = ModelParams::<f64>::default().with_mass(0.5);
    let mesh = build_mesh(&p, 24, 24).unwrap();
    let f = plaquette_curvature(&mesh).unwrap();
    let mut r = rng::stream(77, 0);
    let x0 = rng::unit_vector::<f64, _>(&mut r, 2);
    let y0 = rng::unit_vector::<f64, _>(&mut r, 2);
    let jf = coherence_matrix(&mesh, &f, &x0, &y0).unwrap();
    for t in 0..100 {
        let mut r = rng::stream(77, t + 1);
        let ua = rng::unitary::<f64, _>(&mut r, 2);
        let ub = rng::unitary::<f64, _>(&mut r, 2);
        let x = rng::unit_vector::<f64, _>(&mut r, 2);
        let y = rng::unit_vector::<f64, _>(&mut r, 2);
        assert!(unitary_invariance_check(&jf, &x, &y, &ua, &ub).unwrap() <= 1e-12);
    }
}

#[test]
fn multi_scan_is_sinusoid() {
    let p = ModelParams::<f64>::default().with_mass(0.5);
    let mesh = build_mesh(&p, 24, 24).unwrap();
    let f = plaquette_curvature(&mesh).unwrap();
    let mut r = rng::stream(8, 0);
    let x = rng::unit_vector::<f64, _>(&mut r, 2);
    let y = rng::unit_vector::<f64, _>(&mut r, 2);
    let jf = coherence_matrix(&mesh, &f, &x, &y).unwrap();
    let amp = 2.0 * jf.probe(&x, &y).unwrap().norm();
    let peak = (0..720)
        .map(|j| {
            sector_response_multi(&jf, -1, &x, &y, -PI + j as f64 * PI / 360.0)
                .unwrap()
                .1
                .abs()
        })
        .fold(0.0, f64::max);
    assert!((peak - amp).abs() <= 1e-4 * amp.max(1e-12));
}

#[test]
fn pole_state_gauge() {
    let north = BlochState::<f64>::from_unit_vector([0.0, 0.0, 1.0]);
    assert_eq!(
        (north.va, north.vb),
        (Cplx::new(0.0, 0.0), Cplx::new(-1.0, 0.0))
    );
    let south = BlochState::<f64>::from_unit_vector([0.0, 0.0, -1.0]);
    assert_eq!((south.va, south.vb.norm()), (Cplx::new(1.0, 0.0), 0.0));
}
