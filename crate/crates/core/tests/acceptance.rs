use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pepqc::analytics::{
    eps_opt_approx, minimize_over_eps, mse_fd_opt_approx, mse_ps, n_star_fd_approx, n_star_gd_lower,
    n_star_numeric,
};
use pepqc::ansatz::shifted;
use pepqc::bench::config::{EpsPolicy, RequestConfig};
use pepqc::bench::{
    argmin_order, load_hamiltonian, min_eigenvalue, run_empirical_mse, run_function_mse, verify_haar,
    ExperimentConfig, HaarConfig, MseRecord,
};
use pepqc::estimators::{
    fd_gradient, fd_hessian, gd_gradient, gd_hessian, ps_gradient, ps_hessian, random_coefficients, sinc_factor,
    CircuitOracle, FunctionOracle,
};
use pepqc::{
    Budget, Circuit, CircuitSpec, Component, ComponentRequest, Family, Observable, ParamIndex,
    ParamVector, RngStream, Topology,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_circuit(n: usize, rng: &mut impl Rng) -> Circuit {
    CircuitSpec {
        n,
        layers: rng.random_range(1..5),
        reps: rng.random_range(1..4),
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

fn distinct_index(c: &Circuit, a: ParamIndex, rng: &mut impl Rng) -> ParamIndex {
    loop {
        let b = random_index(c, rng);
        if b != a {
            return b;
        }
    }
}

fn random_observable(n: usize, rng: &mut impl Rng) -> Observable {
    loop {
        let s: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect();
        if let Ok(o) = Observable::single(s.parse().unwrap()) {
            return o;
        }
    }
}

fn two_design_circuit() -> CircuitSpec {
    CircuitSpec {
        n: 4,
        layers: 5,
        reps: 4,
        topology: Topology::Chain,
        encoding: None,
    }
}

fn translation_identity() -> Outcome {
    let mut rng = RngStream::new(101).rng();
    let root = RngStream::new(102);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = [2, 4, 6][k % 3];
        let c = random_circuit(n, &mut rng);
        let obs = random_observable(n, &mut rng);
        let theta = c.random_params_with(&mut rng);
        let idx = random_index(&c, &mut rng);
        let t0: f64 = rng.random_range(-PI..PI);
        let o = CircuitOracle::new(&c, theta.clone(), vec![], &obs).unwrap();
        let f = o.exact(&theta).unwrap();
        let g = ps_gradient(&o, &ComponentRequest::gradient(idx), Budget::Exact, &root).unwrap();
        let h = ps_hessian(&o, &ComponentRequest::diag(idx), Budget::Exact, &root).unwrap();
        let lhs = o.exact(&shifted(&theta, idx, t0).unwrap()).unwrap();
        worst = worst.max((lhs - f - t0.sin() * g - (1.0 - t0.cos()) * h).abs());
    }
    outcome(worst < 1e-9, format!("max |lhs-rhs| = {worst:.3e} over 100 circuits (bound 1e-9)"))
}

fn ps_exactness() -> Outcome {
    let mut rng = RngStream::new(201).rng();
    let root = RngStream::new(202);
    let (mut wg, mut wh) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let n = 2 + k % 3;
        let c = random_circuit(n, &mut rng);
        let obs = random_observable(n, &mut rng);
        let theta = c.random_params_with(&mut rng);
        let o = CircuitOracle::new(&c, theta.clone(), vec![], &obs).unwrap();
        let at = |shifts: &[(ParamIndex, f64)]| {
            let mut t: ParamVector = theta.clone();
            for &(i, d) in shifts {
                t = shifted(&t, i, d).unwrap();
            }
            o.exact(&t).unwrap()
        };
        let a = random_index(&c, &mut rng);
        match k % 3 {
            0 => {
                let h = 1e-5;
                let cd = (at(&[(a, h)]) - at(&[(a, -h)])) / (2.0 * h);
                let ps = ps_gradient(&o, &ComponentRequest::gradient(a), Budget::Exact, &root).unwrap();
                wg = wg.max((cd - ps).abs());
            }
            kind => {
                let b = if kind == 1 { a } else { distinct_index(&c, a, &mut rng) };
                let h = 1e-4;
                let cd = (at(&[(a, h), (b, h)]) - at(&[(a, h), (b, -h)]) - at(&[(a, -h), (b, h)])
                    + at(&[(a, -h), (b, -h)]))
                    / (4.0 * h * h);
                let req = if kind == 1 { ComponentRequest::diag(a) } else { ComponentRequest::offdiag(a, b) };
                let ps = ps_hessian(&o, &req, Budget::Exact, &root).unwrap();
                wh = wh.max((cd - ps).abs());
            }
        }
    }
    outcome(
        wg < 1e-7 && wh < 1e-5,
        format!("max gradient dev {wg:.3e} (bound 1e-7), max Hessian dev {wh:.3e} (bound 1e-5) over 50 components"),
    )
}

fn sinc_attenuation() -> Outcome {
    let mut rng = RngStream::new(301).rng();
    let root = RngStream::new(302);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(2..5);
        let c = random_circuit(n, &mut rng);
        let obs = random_observable(n, &mut rng);
        let theta = c.random_params_with(&mut rng);
        let a = random_index(&c, &mut rng);
        let b = distinct_index(&c, a, &mut rng);
        let o = CircuitOracle::new(&c, theta, vec![], &obs).unwrap();
        let (rg, rd, ro) = (ComponentRequest::gradient(a), ComponentRequest::diag(a), ComponentRequest::offdiag(a, b));
        let g = ps_gradient(&o, &rg, Budget::Exact, &root).unwrap();
        let hd = ps_hessian(&o, &rd, Budget::Exact, &root).unwrap();
        let ho = ps_hessian(&o, &ro, Budget::Exact, &root).unwrap();
        for eps in [0.1, 0.5, 1.0, 2.0, PI] {
            let fd = [
                (fd_gradient(&o, &rg, eps, Budget::Exact, &root).unwrap(), Component::Gradient, g),
                (fd_hessian(&o, &rd, eps, Budget::Exact, &root).unwrap(), Component::DiagHessian, hd),
                (fd_hessian(&o, &ro, eps, Budget::Exact, &root).unwrap(), Component::OffdiagHessian, ho),
            ];
            for (v, comp, exact) in fd {
                worst = worst.max((v - sinc_factor(comp, eps, &[1.0]) * exact).abs());
            }
            for j in 1..=3 {
                let cv = random_coefficients(j, &mut rng);
                let gd = [
                    (gd_gradient(&o, &rg, eps, &cv, Budget::Exact, &root).unwrap(), Component::Gradient, g),
                    (gd_hessian(&o, &rd, eps, &cv, Budget::Exact, &root).unwrap(), Component::DiagHessian, hd),
                    (gd_hessian(&o, &ro, eps, &cv, Budget::Exact, &root).unwrap(), Component::OffdiagHessian, ho),
                ];
                for (v, comp, exact) in gd {
                    worst = worst.max((v - sinc_factor(comp, eps, &cv) * exact).abs());
                }
            }
        }
    }
    outcome(worst < 1e-9, format!("max |FD/GD - sinc*PS| = {worst:.3e} (bound 1e-9)"))
}

fn function_mse_law() -> Outcome {
    let obs = Observable::single("ZIII".parse().unwrap()).unwrap();
    let r = run_function_mse(&two_design_circuit(), &obs, 100, 500, 200, 401).unwrap();
    let target = 16.0 / (100.0 * 17.0);
    let rel = (r.empirical_mse - target) / target;
    outcome(
        rel.abs() < 0.10,
        format!(
            "empirical {:.5e} +- {:.1e} vs {target:.5e} (rel dev {:+.2}%, bound 10%)",
            r.empirical_mse,
            r.std_error,
            100.0 * rel
        ),
    )
}

fn two_design_averages() -> Outcome {
    let mut cfg = HaarConfig::default_four_qubit();
    cfg.seed = 501;
    let report = verify_haar(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for e in &report.entries {
        pass &= e.relative_deviation.abs() < 0.15;
        parts.push(format!(
            "{} {:.5}+-{:.1e} vs {:.6} ({:+.1}%)",
            e.quantity,
            e.estimate,
            e.std_error,
            e.target,
            100.0 * e.relative_deviation
        ));
    }
    outcome(pass, format!("{} draws: {} (bound 15%)", report.draws, parts.join("; ")))
}

fn within_sigma(records: &[MseRecord], k: f64) -> (usize, usize, f64) {
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for r in records {
        let a = r.analytic_mse.unwrap();
        let z = (r.empirical_mse - a).abs() / r.std_error;
        worst = worst.max(z);
        if z <= k {
            ok += 1;
        }
    }
    (ok, records.len(), worst)
}

fn fd_gd_formulas() -> Outcome {
    let mut cfg = ExperimentConfig::preset("two-design").unwrap();
    cfg.estimators.families = vec![Family::FD, Family::GD];
    cfg.estimators.orders = vec![2];
    cfg.estimators.epsilon = vec![EpsPolicy::Fixed { value: 0.5 }, EpsPolicy::OptimalNumeric];
    cfg.n_t = vec![200, 2000];
    cfg.num_circuits = 50;
    cfg.num_trials = 200;
    cfg.seed = 601;
    let obs = cfg.observable.load(None).unwrap();
    let records = run_empirical_mse(&cfg, &obs).unwrap();
    let (ok, total, worst) = within_sigma(&records, 3.0);
    let bad: Vec<String> = records
        .iter()
        .filter(|r| (r.empirical_mse - r.analytic_mse.unwrap()).abs() > 3.0 * r.std_error)
        .map(|r| format!("{} {} N_T={} eps={:.3}", r.estimator, r.component, r.n_t, r.epsilon.unwrap()))
        .collect();
    outcome(
        ok == total,
        format!("{ok}/{total} settings within 3 se (worst {worst:.2} se){}", if bad.is_empty() {
            String::new()
        } else {
            format!("; outside: {}", bad.join(", "))
        }),
    )
}

fn ps_mse() -> Outcome {
    let mut cfg = ExperimentConfig::preset("two-design").unwrap();
    cfg.requests = vec![
        RequestConfig {
            component: Component::Gradient,
            first: ParamIndex::new(20, 3),
            second: None,
        },
        RequestConfig {
            component: Component::DiagHessian,
            first: ParamIndex::new(20, 3),
            second: None,
        },
    ];
    cfg.estimators.families = vec![Family::PS];
    cfg.n_t = vec![100];
    cfg.num_circuits = 200;
    cfg.num_trials = 200;
    cfg.seed = 701;
    let obs = cfg.observable.load(None).unwrap();
    let r = run_empirical_mse(&cfg, &obs).unwrap();
    let (g, h) = (&r[0], &r[1]);
    let zg = (g.empirical_mse - mse_ps(Component::Gradient, 16, 100.0).unwrap()) / g.std_error;
    let zh = (h.empirical_mse - mse_ps(Component::DiagHessian, 16, 100.0).unwrap()) / h.std_error;
    let ratio = h.empirical_mse / g.empirical_mse;
    let rel = ratio / 1.125 - 1.0;
    outcome(
        zg.abs() <= 3.0 && zh.abs() <= 3.0 && rel.abs() < 0.10,
        format!(
            "gradient {:.5e} ({zg:+.2} se), diag {:.5e} ({zh:+.2} se), ratio {ratio:.4} vs 1.125 ({:+.2}%)",
            g.empirical_mse,
            h.empirical_mse,
            100.0 * rel
        ),
    )
}

fn optimal_eps_consistency() -> Outcome {
    let (mut we, mut wm) = (0.0f64, 0.0f64);
    for n in [2u32, 4, 6, 8] {
        let d = 1u64 << n;
        let n_t = 1e4 * d as f64;
        for c in Component::ALL {
            let opt = minimize_over_eps(c, d, n_t, 1).unwrap();
            we = we.max((opt.eps / eps_opt_approx(c, d, n_t).unwrap() - 1.0).abs());
            wm = wm.max((opt.mse / mse_fd_opt_approx(c, d, n_t).unwrap() - 1.0).abs());
        }
    }
    outcome(
        we < 0.05 && wm < 0.05,
        format!("max rel dev eps {:.2}%, MSE {:.2}% (bound 5%)", 100.0 * we, 100.0 * wm),
    )
}

fn crossover_nstar() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut min_margin = f64::INFINITY;
    for c in Component::ALL {
        for j in 1..=3usize {
            let mut numeric = Vec::new();
            for n in 2..=10u32 {
                let d = 1u64 << n;
                let approx = if j == 1 { n_star_fd_approx(c, d).unwrap() } else { n_star_gd_lower(c, d, j).unwrap() };
                match n_star_numeric(c, d, j) {
                    Ok(v) => {
                        min_margin = min_margin.min(v / approx);
                        if v < approx {
                            pass = false;
                            notes.push(format!("{c} J={j} n={n}: {v:.4e} < {approx:.4e}"));
                        }
                        numeric.push((n, Some(v)));
                    }
                    Err(_) => numeric.push((n, None)),
                }
            }
            let missing: Vec<u32> = numeric.iter().filter(|(_, v)| v.is_none()).map(|(n, _)| *n).collect();
            if !missing.is_empty() {
                notes.push(format!("{c} J={j}: no crossing below 1e12 at n={missing:?}"));
            }
            for w in numeric.windows(2) {
                if let ((n0, Some(a)), (_, Some(b))) = (w[0], w[1]) {
                    if n0 >= 8 {
                        let r = b / a;
                        if !(1.7..=2.3).contains(&r) {
                            pass = false;
                            notes.push(format!("{c} J={j} ratio n={n0}->{}: {r:.3}", n0 + 1));
                        }
                    }
                }
            }
        }
    }
    let r8 = n_star_numeric(Component::Gradient, 512, 1).unwrap() / n_star_numeric(Component::Gradient, 256, 1).unwrap();
    outcome(
        pass,
        format!(
            "min numeric/approx {min_margin:.3}; gradient J=1 ratio n=8->9 {r8:.3}{}",
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }
        ),
    )
}

fn optimal_order_argmin() -> Outcome {
    let ns = [2usize, 4, 6, 8, 10, 12];
    let orders: Vec<usize> = (1..=8).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for c in Component::ALL {
        let got = argmin_order(c, &ns, &orders, 2000.0, 2.0 * PI).unwrap();
        let want: Vec<Option<usize>> = match c {
            Component::DiagHessian => vec![Some(3), Some(3), Some(3), None, None, None],
            _ => vec![Some(2), Some(2), Some(2), Some(1), Some(1), Some(1)],
        };
        let ok = got.iter().zip(&want).all(|(g, w)| w.is_none_or(|w| w == *g));
        pass &= ok;
        parts.push(format!("{c} argmin J at n={ns:?}: {got:?}{}", if ok { "" } else { " (mismatch)" }));
    }
    outcome(pass, parts.join("; "))
}

fn water_hamiltonian() -> Outcome {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/water.ham");
    let h = load_hamiltonian(&path).unwrap();
    let rows: [(usize, f64, &str); 5] = [
        (1, -0.180625859, "IIIIIIZI"),
        (7, 0.227570968, "ZIIIIIII"),
        (37, -0.028682446, "IIIIYYXX"),
        (73, 0.043763244, "YZZZYIII"),
        (96, 0.0145648, "XZZZZYYX"),
    ];
    let mut rows_ok = true;
    for (k, coef, s) in rows {
        let (hk, p) = &h.terms()[k - 1];
        rows_ok &= hk.to_bits() == coef.to_bits() && p.to_string() == s;
    }
    let start = Instant::now();
    let e = min_eigenvalue(&h);
    let t = start.elapsed();
    let frozen = -1.8334407896187626;
    let ok = h.len() == 96 && rows_ok && t < Duration::from_secs(5) && (e - frozen).abs() < 1e-9;
    outcome(
        ok,
        format!(
            "{} terms, spot rows {}, min eigenvalue {e:.16} (frozen {frozen}, dev {:.1e}) in {:.3}s",
            h.len(),
            if rows_ok { "exact" } else { "MISMATCH" },
            (e - frozen).abs(),
            t.as_secs_f64()
        ),
    )
}

fn fd_ps_boundary(records: &[MseRecord], c: Component) -> Option<f64> {
    let pick = |label: &str| -> Vec<(f64, f64)> {
        records
            .iter()
            .filter(|r| r.component == c && r.estimator == label)
            .map(|r| ((r.n_t as f64).ln(), r.empirical_mse))
            .collect()
    };
    let fd = pick("FD");
    let ps = pick("PS");
    let diff: Vec<(f64, f64)> = fd.iter().zip(&ps).map(|(a, b)| (a.0, a.1.ln() - b.1.ln())).collect();
    diff.windows(2).find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0).map(|w| {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        (x0 + (x1 - x0) * (-y0) / (y1 - y0)).exp()
    })
}

fn water_desk_run() -> Outcome {
    let mut cfg = ExperimentConfig::preset("water-eigensolver").unwrap();
    cfg.num_circuits = 20;
    cfg.num_trials = 50;
    cfg.seed = 1201;
    let obs = cfg.observable.load(None).unwrap();
    let records = run_empirical_mse(&cfg, &obs).unwrap();
    let (ok, total, worst) = within_sigma(&records, 3.0);
    let frac = ok as f64 / total as f64;
    let mut pass = frac >= 0.8;
    let mut parts = vec![format!("{ok}/{total} grid points within 3 se ({:.0}%, worst {worst:.2} se)", 100.0 * frac)];
    for c in Component::ALL {
        let theory = n_star_numeric(c, 256, 1).unwrap();
        match fd_ps_boundary(&records, c) {
            Some(b) => {
                let r = b / theory;
                let ok = (1.0 / 3.0..=3.0).contains(&r);
                pass &= ok;
                parts.push(format!("{c} FD/PS boundary {b:.0} vs N* {theory:.0} (x{r:.2})"));
            }
            None => {
                pass = false;
                parts.push(format!("{c} FD/PS boundary not found (N* {theory:.0})"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Option<u64>, Check); 12] = [
        (1, "translation identity", Some(10), translation_identity),
        (2, "PS exactness", Some(30), ps_exactness),
        (3, "sinc attenuation", None, sinc_attenuation),
        (4, "function MSE law", Some(120), function_mse_law),
        (5, "two-design averages", Some(300), two_design_averages),
        (6, "FD/GD MSE formulas", Some(600), fd_gd_formulas),
        (7, "PS MSE", None, ps_mse),
        (8, "optimal step consistency", Some(60), optimal_eps_consistency),
        (9, "crossover copy number", Some(60), crossover_nstar),
        (10, "optimal GD order", Some(60), optimal_order_argmin),
        (11, "water Hamiltonian", None, water_hamiltonian),
        (12, "desk-scale eigensolver run", None, water_desk_run),
    ];
    let mut failures = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let out = check();
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l as f64);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = limit.map(|l| format!(", limit {l}s")).unwrap_or_default();
        println!(
            "{} criterion {id:>2} {name}: {} [{secs:.2}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
