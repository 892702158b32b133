use super::*;
use crate::linalg::{max_abs_diff, sub};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(n: usize) -> Manifold {
    Manifold::sphere(n).unwrap()
}

fn random_point(m: &Manifold, rng: &mut ChaCha8Rng) -> Point<f64> {
    let v: Vec<f64> = (0..m.ambient_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    if m.is_sphere() {
        m.point_from_ambient(v).unwrap()
    } else {
        m.point(v.into_iter().map(|c| c.abs()).collect()).unwrap()
    }
}

fn random_tangent(m: &Manifold, x: &Point<f64>, rng: &mut ChaCha8Rng) -> TangentVector<f64> {
    let v: Vec<f64> = (0..m.ambient_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    m.tangent_project(x, &v).unwrap()
}

fn random_vec(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_linear(d: usize, rng: &mut ChaCha8Rng) -> SectionSpec<f64> {
    SectionSpec::LinearAmbient {
        matrix: SquareMatrix::from_row_major(d, random_vec(d * d, rng)).unwrap(),
        offset: random_vec(d, rng),
    }
}

/// Every built-in family that lives on `Sⁿ`.
fn sphere_families(n: usize, rng: &mut ChaCha8Rng) -> Vec<SectionSpec<f64>> {
    let d = n + 1;
    let mut out = vec![
        SectionSpec::conformal(random_vec(d, rng)),
        random_linear(d, rng),
        SectionSpec::scaled_by(SectionSpec::conformal(random_vec(d, rng)), 0.7),
        SectionSpec::Rescaled {
            base: Box::new(SectionSpec::conformal(random_vec(d, rng))),
            factor: ScalarFieldSpec::AxisLinear { a: random_vec(d, rng) },
        },
        SectionSpec::Zero,
    ];
    if n % 2 == 1 {
        out.push(SectionSpec::Hopf);
        out.push(SectionSpec::scaled_by(SectionSpec::Hopf, 0.5));
        out.push(SectionSpec::Rescaled {
            base: Box::new(SectionSpec::Hopf),
            factor: ScalarFieldSpec::AxisLinear { a: random_vec(d, rng) },
        });
    }
    out
}

fn tangent_at(m: &Manifold, x: &Point<f64>, v: Vec<f64>) -> TangentVector<f64> {
    m.tangent(x, v).unwrap()
}

#[test]
fn eval_examples() {
    let m = sphere(2);
    let s = SectionSpec::conformal(vec![1.0, 0.0, 0.0]);
    let x = m.point(vec![0.0, 0.0, 1.0]).unwrap();
    assert_eq!(s.eval(&m, &x).unwrap().vec, vec![1.0, 0.0, 0.0]);
    let x = m.point(vec![1.0, 0.0, 0.0]).unwrap();
    assert_eq!(s.eval(&m, &x).unwrap().vec, vec![0.0, 0.0, 0.0]);

    let m = sphere(3);
    let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(SectionSpec::Hopf.eval(&m, &x).unwrap().vec, vec![0.0, 1.0, 0.0, 0.0]);
}

#[test]
fn eval_errors() {
    let s2 = sphere(2);
    let x = s2.point(vec![0.0, 0.0, 1.0]).unwrap();
    assert!(matches!(SectionSpec::<f64>::Hopf.eval(&s2, &x), Err(Error::IncompatibleSection { .. })));
    assert!(matches!(SectionSpec::conformal(vec![0.0; 3]).eval(&s2, &x), Err(Error::ZeroAxis)));
    assert!(matches!(
        SectionSpec::conformal(vec![1.0, 0.0]).eval(&s2, &x),
        Err(Error::DimensionMismatch { .. })
    ));
    let t = Manifold::torus(2).unwrap();
    let y = t.point(vec![0.1, 0.2]).unwrap();
    assert!(SectionSpec::conformal(vec![1.0, 0.0]).eval(&t, &y).is_err());
    assert!(SectionSpec::ConstantTorus { c: vec![1.0, 2.0] }.eval(&s2, &x).is_err());
    assert!(SectionSpec::ConstantTorus { c: vec![1.0, 2.0] }.eval(&t, &y).is_ok());
}

#[test]
fn covariant_derivative_examples() {
    let m = sphere(2);
    let s = SectionSpec::conformal(vec![0.0, 0.0, 1.0]);
    let x = m.point(vec![0.0, 0.0, 1.0]).unwrap();
    let d = s.covariant_derivative(&m, &x, &tangent_at(&m, &x, vec![1.0, 0.0, 0.0])).unwrap();
    assert_eq!(d.vec, vec![-1.0, 0.0, 0.0]);

    let m = sphere(3);
    let x = m.point(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let d = SectionSpec::Hopf.covariant_derivative(&m, &x, &tangent_at(&m, &x, vec![0.0, 0.0, 1.0, 0.0])).unwrap();
    assert_eq!(d.vec, vec![0.0, 0.0, 0.0, 1.0]);
    let d = SectionSpec::Hopf.covariant_derivative(&m, &x, &tangent_at(&m, &x, vec![0.0, 1.0, 0.0, 0.0])).unwrap();
    assert!(d.vec.iter().all(|&v| v == 0.0));
}

#[test]
fn covariant_derivative_rejects_normal_direction() {
    let m = sphere(2);
    let x = m.point(vec![0.0, 0.0, 1.0]).unwrap();
    let bad = TangentVector { at: x.clone(), vec: vec![0.0, 0.0, 1.0] };
    assert!(matches!(
        SectionSpec::conformal(vec![1.0, 0.0, 0.0]).covariant_derivative(&m, &x, &bad),
        Err(Error::NotTangent { .. })
    ));
}

#[test]
fn fd_oracle_agrees_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for n in [2usize, 3, 5] {
        let m = sphere(n);
        let fams = sphere_families(n, &mut rng);
        for _ in 0..1000 / 3 / fams.len() + 1 {
            for s in &fams {
                let x = random_point(&m, &mut rng);
                let dir = random_tangent(&m, &x, &mut rng);
                let exact = s.covariant_derivative(&m, &x, &dir).unwrap();
                let fd = covariant_derivative_fd(s, &m, &x, &dir, 1e-5).unwrap();
                assert!(max_abs_diff(&exact.vec, &fd.vec) < 1e-7, "{s} at {:?}", x.coords());
                let rich = covariant_derivative_fd_richardson(s, &m, &x, &dir, 1e-5).unwrap();
                assert!(max_abs_diff(&exact.vec, &rich.vec) < 1e-6, "{s}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 1000);
}

#[test]
fn fd_oracle_trivial_cases() {
    let m = sphere(3);
    let x = m.point_from_ambient(vec![0.2, -0.4, 0.1, 0.5]).unwrap();
    let dir = m.tangent_project(&x, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let z = covariant_derivative_fd(&SectionSpec::Zero, &m, &x, &dir, 1e-5).unwrap();
    assert!(z.vec.iter().all(|&v| v == 0.0));
    assert!(covariant_derivative_fd(&SectionSpec::Zero, &m, &x, &dir, 0.0).is_err());
    assert!(covariant_derivative_fd(&SectionSpec::Zero, &m, &x, &dir, -1e-3).is_err());

    let t = Manifold::torus(2).unwrap();
    let y = t.point(vec![0.95, 0.3]).unwrap();
    let c = SectionSpec::ConstantTorus { c: vec![0.3, -2.0] };
    let d = covariant_derivative_fd(&c, &t, &y, &t.tangent(&y, vec![1.0, 1.0]).unwrap(), 1e-5).unwrap();
    assert!(d.vec.iter().all(|v: &f64| v.abs() < 1e-12));
}

#[test]
fn tangency_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [2usize, 3, 4, 5] {
        let m = sphere(n);
        let fams = sphere_families(n, &mut rng);
        for _ in 0..10_000 / 4 / fams.len() + 1 {
            let x = random_point(&m, &mut rng);
            for s in &fams {
                let v = s.value_raw(&m, x.coords());
                assert!(dot(&v, x.coords()).abs() < 1e-10, "{s}");
                let jet = s.first_jet_raw(&m, x.coords());
                assert!(dot(&jet.grad_f, x.coords()).abs() < 1e-10);
                for d in &jet.covariant_derivatives {
                    assert!(dot(d, x.coords()).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn jet_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [2usize, 3, 6] {
        let m = sphere(n);
        let axis = random_vec(n + 1, &mut rng);
        let c2 = norm_sq(&axis);
        let s = SectionSpec::conformal(axis.clone());
        for _ in 0..50 {
            let x = random_point(&m, &mut rng);
            let jet = s.jet(&m, &x).unwrap();
            let lambda = dot(&axis, x.coords());
            assert_eq!(jet.kind, JetKind::Analytic);
            assert!(max_abs_diff(&jet.rough_laplacian, jet.value()) < 1e-15);
            assert!((2.0 * jet.f() - (c2 - lambda * lambda)).abs() < 1e-13);
            assert!(max_abs_diff(jet.grad_f(), &scale(-lambda, jet.value())) < 1e-13);
            assert!((jet.laplacian_f - (c2 - (n as f64 + 1.0) * lambda * lambda)).abs() < 1e-13);
            assert!((jet.grad_sigma_sq() - n as f64 * lambda * lambda).abs() < 1e-13);
        }
    }
    // λ = 0 gives F = c²/2
    let m = sphere(2);
    let s = SectionSpec::conformal(vec![0.0, 0.0, 2.0]);
    let jet = s.jet(&m, &m.point(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(jet.f(), 2.0);
}

#[test]
fn hopf_gradient_norm_is_twice_on_s3() {
    let m = sphere(3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let x = random_point(&m, &mut rng);
        let jet = SectionSpec::Hopf.jet(&m, &x).unwrap();
        assert!((jet.grad_sigma_sq() - 2.0).abs() < 1e-13);
        assert!((jet.f() - 0.5).abs() < 1e-15);
        assert!(norm(jet.grad_f()) < 1e-14);
        assert_eq!(jet.laplacian_f, 0.0);
        // the same sum with FD derivatives
        let fd: f64 = m
            .orthonormal_frame(&x)
            .iter()
            .map(|e| norm_sq(&covariant_derivative_fd(&SectionSpec::Hopf, &m, &x, e, 1e-5).unwrap().vec))
            .sum();
        assert!((fd - 2.0).abs() < 1e-8);
    }
    let m7 = sphere(7);
    let jet = SectionSpec::Hopf.jet(&m7, &random_point(&m7, &mut rng)).unwrap();
    assert!((jet.grad_sigma_sq() - 6.0).abs() < 1e-13);
    assert!(max_abs_diff(&jet.rough_laplacian, &scale(6.0, jet.value())) < 1e-14);
}

#[test]
fn linear_ambient_jet_is_semi_analytic() {
    let m = sphere(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = random_linear(4, &mut rng);
    let x = random_point(&m, &mut rng);
    assert_eq!(s.jet(&m, &x).unwrap().kind, JetKind::SemiAnalytic);
    // Hopf written as a linear-ambient field has the analytic Hopf jet
    let (a, b) = SectionSpec::<f64>::Hopf.as_linear_ambient(&m).unwrap();
    let lin = SectionSpec::LinearAmbient { matrix: a, offset: b };
    let jl = lin.jet(&m, &x).unwrap();
    let jh = SectionSpec::Hopf.jet(&m, &x).unwrap();
    assert!(max_abs_diff(&jl.rough_laplacian, &jh.rough_laplacian) < 1e-7);
    assert!((jl.laplacian_f - jh.laplacian_f).abs() < 1e-14);
}

#[test]
fn rough_laplacian_fd_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [2usize, 3, 5] {
        let m = sphere(n);
        let fams = sphere_families(n, &mut rng);
        for _ in 0..20 {
            let x = random_point(&m, &mut rng);
            for s in fams.iter().filter(|s| s.is_analytic()) {
                let exact = s.jet(&m, &x).unwrap().rough_laplacian;
                let fd = rough_laplacian_fd(s, &m, &x, 1e-3).unwrap();
                assert!(max_abs_diff(&exact, &fd.vec) < 1e-5, "{s}: {exact:?} vs {:?}", fd.vec);
            }
        }
    }
    let z = rough_laplacian_fd(&SectionSpec::Zero, &sphere(2), &sphere(2).point(vec![0.0, 0.0, 1.0]).unwrap(), 1e-3).unwrap();
    assert!(z.vec.iter().all(|&v| v == 0.0));
    assert!(rough_laplacian_fd(&SectionSpec::Zero, &sphere(2), &sphere(2).point(vec![0.0, 0.0, 1.0]).unwrap(), 0.0).is_err());
}

#[test]
fn hopf_rough_laplacian_on_higher_spheres() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for mm in 1..=3usize {
        let m = sphere(2 * mm + 1);
        let x = random_point(&m, &mut rng);
        let fd = rough_laplacian_fd(&SectionSpec::Hopf, &m, &x, 1e-3).unwrap();
        let expect = scale(2.0 * mm as f64, &hopf_j(x.coords()));
        assert!(max_abs_diff(&fd.vec, &expect) < 1e-5);
    }
}

#[test]
fn laplacian_f_matches_scalar_fd() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [2usize, 3, 4, 5] {
        let m = sphere(n);
        let fams = sphere_families(n, &mut rng);
        for _ in 0..20 {
            let x = random_point(&m, &mut rng);
            for s in &fams {
                let exact = s.laplacian_f_raw(&m, x.coords());
                let f = |y: &[f64]| norm_sq(&s.value_raw(&m, y)) / 2.0;
                let coarse = m.laplacian_fd(x.coords(), f, 2e-3).unwrap();
                let fine = m.laplacian_fd(x.coords(), f, 1e-3).unwrap();
                let fd = (4.0 * fine - coarse) / 3.0;
                assert!((exact - fd).abs() < 1e-6 * (1.0 + exact.abs()), "{s}: {exact} vs {fd}");
                let grad = m.gradient_fd(x.coords(), |y| norm_sq(&s.value_raw(&m, y)) / 2.0, 1e-5).unwrap();
                assert!(max_abs_diff(&grad, &s.grad_f_raw(&m, x.coords())) < 1e-8, "{s}");
            }
        }
    }
}

#[test]
fn laplacian_of_length_identity() {
    // ⟨∇*∇σ, σ⟩ = |∇σ|² + ΔF
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [2usize, 3, 5] {
        let m = sphere(n);
        let fams = sphere_families(n, &mut rng);
        for _ in 0..1000 / fams.len() / 3 + 1 {
            let x = random_point(&m, &mut rng);
            for s in &fams {
                let jet = s.jet(&m, &x).unwrap();
                let lhs = dot(&jet.rough_laplacian, jet.value());
                let rhs = jet.grad_sigma_sq() + jet.laplacian_f;
                let tol = if jet.kind == JetKind::Analytic { 1e-8 } else { 1e-5 };
                assert!((lhs - rhs).abs() < tol, "{s}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn codifferential_identity() {
    // -Σᵢ ∇_{Eᵢ}(⟨∇F,Eᵢ⟩σ) = (ΔF)σ - ∇_{∇F}σ
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for n in [2usize, 3, 5] {
        let m = sphere(n);
        let fams = sphere_families(n, &mut rng);
        for _ in 0..30 {
            let x = random_point(&m, &mut rng);
            for s in &fams {
                let jet = s.jet(&m, &x).unwrap();
                let lhs = codifferential_phi_fd(s, &m, &x, &FdOptions::default()).unwrap();
                let rhs = sub(&scale(jet.laplacian_f, jet.value()), &jet.derivative_along_grad_f);
                assert!(max_abs_diff(&lhs.vec, &rhs) < 1e-5, "{s}");
            }
        }
    }
}

#[test]
fn sup_norm_examples() {
    let m = sphere(3);
    let q = QuadratureSet::<f64>::new(m, crate::geometry::QuadratureScheme::MonteCarlo, 100_000, 1).unwrap();
    assert!((sup_norm(&SectionSpec::Hopf, &m, &q).unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(sup_norm(&SectionSpec::Zero, &m, &q).unwrap(), 0.0);
    let c = 0.8;
    let s = SectionSpec::conformal(vec![0.0, c, 0.0, 0.0]);
    let sup = sup_norm(&s, &m, &q).unwrap();
    assert!(sup <= c && c - sup < 1e-3, "{sup}");
    let m2 = sphere(2);
    let q2 = QuadratureSet::<f64>::new(m2, crate::geometry::QuadratureScheme::MonteCarlo, 100_000, 1).unwrap();
    let sup = sup_norm(&SectionSpec::conformal(vec![c, 0.0, 0.0]), &m2, &q2).unwrap();
    assert!(sup <= c && c - sup < 1e-3);
}

#[test]
fn text_form_round_trips() {
    for text in [
        "zero",
        "hopf",
        "conformal:a=1,0,0,0",
        "conformal:a=0.5773502691896258,0,0,0,0,0",
        "constant:c=0.5,-1",
        "linear:A=0,-1,1,0;b=0.25,0",
        "scaled:hopf:k=0.5",
        "scaled:hopf:lambda=1,0,0,0",
        "scaled:conformal:a=0,0,1:k=2",
        "scaled:scaled:hopf:k=2:k=0.5",
    ] {
        let s: SectionSpec<f64> = text.parse().unwrap();
        assert_eq!(s.to_string(), text);
    }
    let s: SectionSpec<f64> = " conformal:a= 1, 0 ,0 ".parse().unwrap();
    assert_eq!(s.to_string(), "conformal:a=1,0,0");
    for bad in ["", "hopff", "conformal:b=1", "conformal:a=1,x", "linear:A=1,2,3;b=1,2", "scaled:hopf", "scaled:hopf:m=1"] {
        assert!(bad.parse::<SectionSpec<f64>>().is_err(), "{bad}");
    }
    let f: SectionSpec<f32> = "scaled:hopf:k=0.1".parse().unwrap();
    assert_eq!(f.to_string(), "scaled:hopf:k=0.1");
}

#[test]
fn add_scaled_stays_in_families() {
    let m = sphere(3);
    let a = SectionSpec::conformal(vec![1.0, 0.0, 0.0, 0.0]);
    let b = SectionSpec::conformal(vec![0.0, 1.0, 0.0, 0.0]);
    assert_eq!(a.add_scaled(0.5, &b, &m).unwrap(), SectionSpec::conformal(vec![1.0, 0.5, 0.0, 0.0]));
    assert!(matches!(a.add_scaled(0.5, &SectionSpec::Hopf, &m).unwrap(), SectionSpec::LinearAmbient { .. }));
    let f = SectionSpec::Rescaled {
        base: Box::new(SectionSpec::Hopf),
        factor: ScalarFieldSpec::AxisLinear { a: vec![1.0, 0.0, 0.0, 0.0] },
    };
    assert!(f.add_scaled(0.5, &a, &m).is_none());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let x = random_point(&m, &mut rng);
        let sum = a.add_scaled(-0.3, &SectionSpec::Hopf, &m).unwrap();
        let expect = add(&a.value_raw(&m, x.coords()), &scale(-0.3, &hopf_j(x.coords())));
        assert!(max_abs_diff(&sum.value_raw(&m, x.coords()), &expect) < 1e-15);
    }
}

fn arb_point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, d).prop_filter("nonzero", |v| norm(v) > 1e-3).prop_map(|v| {
        let r = norm(&v);
        v.into_iter().map(|c| c / r).collect()
    })
}

proptest! {
    #[test]
    fn derivative_is_additive_in_direction(
        x in arb_point(4),
        u in proptest::collection::vec(-1.0f64..1.0, 4),
        v in proptest::collection::vec(-1.0f64..1.0, 4),
        entries in proptest::collection::vec(-1.0f64..1.0, 16),
        b in proptest::collection::vec(-1.0f64..1.0, 4),
    ) {
        let m = sphere(3);
        let u = m.project_raw(&x, &u);
        let v = m.project_raw(&x, &v);
        let s = SectionSpec::LinearAmbient { matrix: SquareMatrix::from_row_major(4, entries).unwrap(), offset: b };
        for s in [s, SectionSpec::Hopf, SectionSpec::conformal(vec![0.3, 0.1, -0.2, 0.9])] {
            let sum = s.derivative_raw(&m, &x, &add(&u, &v));
            let parts = add(&s.derivative_raw(&m, &x, &u), &s.derivative_raw(&m, &x, &v));
            prop_assert!(max_abs_diff(&sum, &parts) < 1e-12);
        }
    }

    #[test]
    fn derivative_is_linear_in_linear_ambient_specs(
        x in arb_point(4),
        u in proptest::collection::vec(-1.0f64..1.0, 4),
        e1 in proptest::collection::vec(-1.0f64..1.0, 16),
        e2 in proptest::collection::vec(-1.0f64..1.0, 16),
        b1 in proptest::collection::vec(-1.0f64..1.0, 4),
        b2 in proptest::collection::vec(-1.0f64..1.0, 4),
        t in -2.0f64..2.0,
    ) {
        let m = sphere(3);
        let u = m.project_raw(&x, &u);
        let s1 = SectionSpec::LinearAmbient { matrix: SquareMatrix::from_row_major(4, e1).unwrap(), offset: b1 };
        let s2 = SectionSpec::LinearAmbient { matrix: SquareMatrix::from_row_major(4, e2).unwrap(), offset: b2 };
        let sum = s1.add_scaled(t, &s2, &m).unwrap();
        let expect = add(&s1.derivative_raw(&m, &x, &u), &scale(t, &s2.derivative_raw(&m, &x, &u)));
        prop_assert!(max_abs_diff(&sum.derivative_raw(&m, &x, &u), &expect) < 1e-12);
    }
}
