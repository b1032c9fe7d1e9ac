use pepqc::estimators::{
    estimate, fd_gradient, fd_hessian, gd_gradient, gd_hessian, ps_gradient, ps_hessian, random_coefficients,
    sinc_factor, CircuitOracle, FunctionOracle,
};
use pepqc::{
    Budget, Circuit, CircuitSpec, Component, ComponentRequest, EstimatorSpec, Observable, ParamIndex, ParamVector,
    RngStream, Topology,
};
use rand::Rng;

fn random_circuit(n: usize, rng: &mut impl Rng) -> Circuit {
    CircuitSpec {
        n,
        layers: rng.random_range(1..4),
        reps: rng.random_range(1..3),
        topology: if rng.random_bool(0.5) { Topology::Chain } else { Topology::Ring },
        encoding: None,
    }
    .build()
    .unwrap()
}

fn random_index(c: &Circuit, rng: &mut impl Rng) -> ParamIndex {
    let layout = c.layout();
    let l = rng.random_range(1..=layout.len());
    ParamIndex::new(rng.random_range(1..=layout[l - 1]), l)
}

fn random_observable(n: usize, rng: &mut impl Rng) -> Observable {
    loop {
        let s: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect();
        if let Ok(o) = Observable::single(s.parse().unwrap()) {
            return o;
        }
    }
}

fn f_at(oracle: &CircuitOracle<'_>, theta: &ParamVector) -> f64 {
    oracle.exact(theta).unwrap()
}

#[test]
fn translation_identity() {
    let mut rng = RngStream::new(1).rng();
    let root = RngStream::new(2);
    for k in 0..30 {
        let n = [2, 3, 4][k % 3];
        let c = random_circuit(n, &mut rng);
        let obs = random_observable(n, &mut rng);
        let theta = c.random_params_with(&mut rng);
        let idx = random_index(&c, &mut rng);
        let t0: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let oracle = CircuitOracle::new(&c, theta.clone(), vec![], &obs).unwrap();
        let f = f_at(&oracle, &theta);
        let g = ps_gradient(&oracle, &ComponentRequest::gradient(idx), Budget::Exact, &root).unwrap();
        let h = ps_hessian(&oracle, &ComponentRequest::diag(idx), Budget::Exact, &root).unwrap();
        let lhs = f_at(&oracle, &pepqc::ansatz::shifted(&theta, idx, t0).unwrap());
        let rhs = f + t0.sin() * g + (1.0 - t0.cos()) * h;
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }
}

#[test]
fn ps_matches_central_differences() {
    let mut rng = RngStream::new(3).rng();
    let root = RngStream::new(4);
    for k in 0..15 {
        let n = 2 + k % 3;
        let c = random_circuit(n, &mut rng);
        let obs = random_observable(n, &mut rng);
        let theta = c.random_params_with(&mut rng);
        let a = random_index(&c, &mut rng);
        let b = random_index(&c, &mut rng);
        let oracle = CircuitOracle::new(&c, theta.clone(), vec![], &obs).unwrap();
        let at = |shifts: &[(ParamIndex, f64)]| {
            let mut t = theta.clone();
            for &(i, d) in shifts {
                t = pepqc::ansatz::shifted(&t, i, d).unwrap();
            }
            f_at(&oracle, &t)
        };
        let h = 1e-5;
        let cd = (at(&[(a, h)]) - at(&[(a, -h)])) / (2.0 * h);
        let ps = ps_gradient(&oracle, &ComponentRequest::gradient(a), Budget::Exact, &root).unwrap();
        assert!((cd - ps).abs() < 1e-7, "gradient {cd} vs {ps}");

        let h = 1e-4;
        let req = if a == b { ComponentRequest::diag(a) } else { ComponentRequest::offdiag(a, b) };
        let cd = (at(&[(a, h), (b, h)]) - at(&[(a, h), (b, -h)]) - at(&[(a, -h), (b, h)]) + at(&[(a, -h), (b, -h)]))
            / (4.0 * h * h);
        let ps = ps_hessian(&oracle, &req, Budget::Exact, &root).unwrap();
        assert!((cd - ps).abs() < 1e-5, "hessian {cd} vs {ps}");
    }
}

#[test]
fn exact_fd_and_gd_are_attenuated_ps() {
    let mut rng = RngStream::new(5).rng();
    let root = RngStream::new(6);
    let c = random_circuit(3, &mut rng);
    let obs = random_observable(3, &mut rng);
    let theta = c.random_params_with(&mut rng);
    let a = random_index(&c, &mut rng);
    let b = loop {
        let b = random_index(&c, &mut rng);
        if b != a {
            break b;
        }
    };
    let oracle = CircuitOracle::new(&c, theta, vec![], &obs).unwrap();
    let g = ps_gradient(&oracle, &ComponentRequest::gradient(a), Budget::Exact, &root).unwrap();
    let hd = ps_hessian(&oracle, &ComponentRequest::diag(a), Budget::Exact, &root).unwrap();
    let ho = ps_hessian(&oracle, &ComponentRequest::offdiag(a, b), Budget::Exact, &root).unwrap();
    for eps in [0.1, 0.5, 1.0, 2.0, std::f64::consts::PI] {
        let fd = fd_gradient(&oracle, &ComponentRequest::gradient(a), eps, Budget::Exact, &root).unwrap();
        assert!((fd - sinc_factor(Component::Gradient, eps, &[1.0]) * g).abs() < 1e-10);
        let fd = fd_hessian(&oracle, &ComponentRequest::diag(a), eps, Budget::Exact, &root).unwrap();
        assert!((fd - sinc_factor(Component::DiagHessian, eps, &[1.0]) * hd).abs() < 1e-10);
        for j in 1..=3 {
            let cv = random_coefficients(j, &mut rng);
            let v = gd_gradient(&oracle, &ComponentRequest::gradient(a), eps, &cv, Budget::Exact, &root).unwrap();
            assert!((v - sinc_factor(Component::Gradient, eps, &cv) * g).abs() < 1e-9);
            let v = gd_hessian(&oracle, &ComponentRequest::diag(a), eps, &cv, Budget::Exact, &root).unwrap();
            assert!((v - sinc_factor(Component::DiagHessian, eps, &cv) * hd).abs() < 1e-9);
            let v = gd_hessian(&oracle, &ComponentRequest::offdiag(a, b), eps, &cv, Budget::Exact, &root).unwrap();
            assert!((v - sinc_factor(Component::OffdiagHessian, eps, &cv) * ho).abs() < 1e-9);
        }
    }
}

#[test]
fn sampled_estimates_are_reproducible() {
    let c = CircuitSpec {
        n: 4,
        layers: 2,
        reps: 2,
        topology: Topology::Chain,
        encoding: None,
    }
    .build()
    .unwrap();
    let obs = Observable::new(vec![(0.7, "ZZII".parse().unwrap()), (-0.3, "IXYI".parse().unwrap())]).unwrap();
    let oracle = CircuitOracle::new(&c, c.random_params(8), vec![], &obs).unwrap();
    let spec = EstimatorSpec::gd(Component::DiagHessian, 0.3, vec![0.8, 0.2]);
    let req = ComponentRequest::diag(ParamIndex::new(5, 2));
    let run = |seed| estimate(&spec, &oracle, &req, Budget::Shots(1000), &RngStream::new(seed)).unwrap();
    assert_eq!(run(1).to_bits(), run(1).to_bits());
    assert_ne!(run(1), run(2));
}

#[test]
fn shot_audit_counts_per_term_copies() {
    let c = CircuitSpec {
        n: 3,
        layers: 2,
        reps: 1,
        topology: Topology::Ring,
        encoding: None,
    }
    .build()
    .unwrap();
    let obs = Observable::new(vec![(1.0, "ZII".parse().unwrap()), (0.5, "XXI".parse().unwrap())]).unwrap();
    let oracle = CircuitOracle::new(&c, c.random_params(2), vec![], &obs).unwrap();
    let req = ComponentRequest::offdiag(ParamIndex::new(1, 1), ParamIndex::new(4, 2));
    for (spec, evals) in [
        (EstimatorSpec::ps(Component::OffdiagHessian), 4u64),
        (EstimatorSpec::gd(Component::OffdiagHessian, 0.4, vec![0.5, 0.3, 0.2]), 12),
    ] {
        oracle.reset_copies();
        estimate(&spec, &oracle, &req, Budget::Shots(1001), &RngStream::new(0)).unwrap();
        assert_eq!(oracle.copies_used(), evals * (1001 / evals));
    }
}
