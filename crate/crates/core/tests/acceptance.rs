//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sislab::fourier::{classify_decay_all, omegas};
use sislab::generation::{analytic_limit_audit, AuditOutcome};
use sislab::shift::{minimal_invariant_subspace, BlockShiftOperator, DVector};
use sislab::{
    basic_limit, check_zero_conditions, construct_schedule, four_families_demo, h_lambda_basis,
    lagrange_bound, nabla_power, verify_generation, DecayKind, DecaySequence, ExponentialSpace,
    HBasisOptions, Interval, LaurentPolynomial, Mask, MaskSchedule, SampledFunction,
    ShiftableFunction, Subspace,
};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hat_schedule() -> MaskSchedule {
    MaskSchedule::stationary(Mask::from_real(&[0.5, 1.0, 0.5], -1).unwrap())
}

fn quadratic_schedule() -> MaskSchedule {
    MaskSchedule::stationary(Mask::from_real(&[0.25, 0.75, 0.75, 0.25], 0).unwrap())
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn hat_exactness() -> Outcome {
    let phi = basic_limit(&hat_schedule(), 10).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (t, v) in phi.points() {
        worst = worst.max((v - c((1.0 - t.abs()).max(0.0), 0.0)).norm());
    }
    // the window stops short of the zeros at ±1
    for k in -1024..=1024i64 {
        let t = k as f64 / 1024.0;
        worst = worst.max((phi.at(k) - c((1.0 - t.abs()).max(0.0), 0.0)).norm());
    }
    ensure(worst <= 1e-12, format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:e} over 2049 dyadic points in [-1, 1]"))
}

fn partition_of_unity() -> Outcome {
    let mut report = Vec::new();
    for (name, s) in [("hat", hat_schedule()), ("quadratic", quadratic_schedule())] {
        let r = 10;
        let phi = basic_limit(&s, r).map_err(|e| e.to_string())?;
        let unit = 1i64 << r;
        let mut worst = 0.0f64;
        for k in 0..unit {
            let sum: Complex64 = (-8..=8).map(|l| phi.at(k - l * unit)).sum();
            worst = worst.max((sum - 1.0).norm());
        }
        ensure(worst <= 1e-9, format!("{name}: deviation {worst:e}"))?;
        report.push(format!("{name} {worst:e}"));
    }
    Ok(format!("max deviation: {}", report.join(", ")))
}

fn poisson_consistency() -> Outcome {
    let exp_space = ExponentialSpace::new(vec![(c(1.0, 0.0), 0)]).map_err(|e| e.to_string())?;
    let exp_sched = construct_schedule(&exp_space, 1).map_err(|e| e.to_string())?;
    let cases = [
        ("hat, lambda=0, d=1", hat_schedule(), c(0.0, 0.0), 1),
        ("exponential, lambda=1, d=0", exp_sched, c(1.0, 0.0), 0),
    ];
    let mut report = Vec::new();
    for (name, s, lambda, d) in cases {
        let b = h_lambda_basis(&s, lambda, d, Interval::new(-1.0, 1.0), 6, HBasisOptions::default())
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(b.consistency <= 1e-8, format!("{name}: {:e}", b.consistency))?;
        report.push(format!("{name}: {:e}", b.consistency));
    }
    Ok(report.join("; "))
}

fn decay_characterization() -> Outcome {
    let hat = hat_schedule();
    let seqs = sislab::fourier::decay_sequences(&hat, c(0.0, 0.0), 1, 32, None)
        .map_err(|e| e.to_string())?;
    let v0 = sislab::classify_decay(&seqs[0]).map_err(|e| e.to_string())?;
    let v1 = sislab::classify_decay(&seqs[1]).map_err(|e| e.to_string())?;
    let want0 = DecayKind::FinitelySupported {
        support: [0].into_iter().collect(),
    };
    let want1 = DecayKind::FinitelySupported {
        support: Default::default(),
    };
    ensure(v0.kind == want0, format!("order 0: {:?}", v0.kind))?;
    ensure(v1.kind == want1, format!("order 1: {:?}", v1.kind))?;

    let mut fitted = Vec::new();
    for q in [0.3f64, 0.5, 0.8] {
        for scale in [1.0, 7.5] {
            let entries = (-32..=32i32)
                .map(|l| c(scale * q.powi(l.abs()), 0.0))
                .collect();
            let seq = DecaySequence::from_entries(c(0.0, 0.0), 0, entries, 0.0)
                .map_err(|e| e.to_string())?;
            let v = classify_decay_all(&[seq]).map_err(|e| e.to_string())?;
            match v.kind {
                DecayKind::ExponentialDecay { q: got, .. } if (got - q).abs() <= 0.02 => {
                    if scale == 1.0 {
                        fitted.push(format!("{q}->{got:.4}"));
                    }
                }
                other => return Err(format!("q = {q}, C = {scale}: {other:?}")),
            }
        }
    }
    Ok(format!("hat supports {{0}} and {{}}; synthetic q {}", fitted.join(", ")))
}

/// `π(t) = c0 + Σ_{m ≤ 3} a_m cos 2πmt + b_m sin 2πmt` with `|π| ≥ 1`.
fn random_periodic(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let degree = rng.gen_range(0..=3usize);
    let ab: Vec<(f64, f64)> = (0..degree)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let c0 = 1.0 + ab.iter().map(|(a, b)| a.abs() + b.abs()).sum::<f64>();
    move |t| {
        c0 + ab
            .iter()
            .enumerate()
            .map(|(m, (a, b))| {
                let w = 2.0 * PI * (m + 1) as f64 * t;
                a * w.cos() + b * w.sin()
            })
            .sum::<f64>()
    }
}

fn annihilation() -> Outcome {
    let lambdas = [c(0.0, 0.0), c(0.7, 0.0), c(-0.7, 0.0), c(0.3, 2.0), c(0.3, -2.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(20240501);
    let trials = 100;
    let mut passed = 0;
    let (mut worst_kill, mut weakest_survivor) = (0.0f64, f64::INFINITY);
    let mut failures = Vec::new();
    for trial in 0..trials {
        let lambda = lambdas[trial % lambdas.len()];
        let deg = rng.gen_range(0..=4usize);
        let mut p: Vec<f64> = (0..deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lead = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        p.push(lead);
        let pi = random_periodic(&mut rng);
        let n = deg + 1;
        let f = ShiftableFunction::new(SampledFunction::sample(4, 0.0, n as f64 + 1.0, |t| {
            let pt = p.iter().rev().fold(0.0, |acc, a| acc * t + a);
            (lambda * t).exp() * pi(t) * pt
        }));
        // size of the result against f on the points where the result lives
        let relative = |g: ShiftableFunction| {
            let g = g.samples();
            let base = f.samples().values[..g.len()]
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            g.max_abs() / base
        };
        let kill = nabla_power(lambda, n, &f).map(relative);
        let survive = nabla_power(lambda, n - 1, &f).map(relative);
        match (kill, survive) {
            (Ok(k), Ok(s)) => {
                worst_kill = worst_kill.max(k);
                weakest_survivor = weakest_survivor.min(s);
                if k <= 1e-9 && s > 1e-3 {
                    passed += 1;
                } else {
                    failures.push(format!("trial {trial}: kill {k:e}, survivor {s:e}"));
                }
            }
            (k, s) => failures.push(format!("trial {trial}: {k:?} {s:?}")),
        }
    }
    ensure(
        passed == trials,
        format!("{passed}/{trials}; {}", failures.join("; ")),
    )?;
    Ok(format!(
        "{passed}/{trials}; worst annihilated {worst_kill:e}, weakest survivor {weakest_survivor:e}"
    ))
}

/// Spectrum with `dim ≤ 3`, `|Re λ| ≤ 1`, `|Im λ| ≤ 2`, points at least 0.5 apart.
fn random_spectrum(rng: &mut ChaCha8Rng) -> Vec<(Complex64, u32)> {
    let dim = rng.gen_range(1..=3u32);
    let mut mults = Vec::new();
    let mut left = dim;
    while left > 0 {
        let m = rng.gen_range(1..=left);
        mults.push(m);
        left -= m;
    }
    let mut points: Vec<Complex64> = Vec::new();
    while points.len() < mults.len() {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0));
        if points.iter().all(|p| (p - z).norm() >= 0.5) {
            points.push(z);
        }
    }
    points.into_iter().zip(mults).map(|(z, m)| (z, m - 1)).collect()
}

fn zero_conditions_and_generation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let window = Interval::new(-2.0, 2.0);
    let (mut worst_zero, mut worst_fit, mut weakest_control) = (0.0f64, 0.0f64, f64::INFINITY);
    for trial in 0..20 {
        let spectrum = random_spectrum(&mut rng);
        let u = ExponentialSpace::new(spectrum.clone()).map_err(|e| e.to_string())?;
        let s = construct_schedule(&u, 3).map_err(|e| format!("trial {trial}: {e}"))?;
        for &(lambda, k) in &spectrum {
            let t = check_zero_conditions(&s, lambda, k, 1..=8, 1e-10, 0)
                .map_err(|e| e.to_string())?;
            let z = t.rows.iter().map(|r| r.zero_residual).fold(0.0, f64::max);
            worst_zero = worst_zero.max(z);
            ensure(t.all_satisfied(), format!("trial {trial}: zero residual {z:e}"))?;
        }
        let rep = verify_generation(&s, &u, 8, window, 1e-5).map_err(|e| e.to_string())?;
        worst_fit = worst_fit.max(rep.residual);
        ensure(
            rep.verdict,
            format!("trial {trial} {spectrum:?}: residual {:e}", rep.residual),
        )?;

        let drop = rng.gen_range(0..spectrum.len());
        let reduced = u.without_one_factor(drop).map_err(|e| e.to_string())?;
        let control = if reduced.dim() == 0 {
            MaskSchedule::stationary(Mask::from_real(&[2.0], 0).unwrap())
        } else {
            construct_schedule(&reduced, 3).map_err(|e| e.to_string())?
        };
        let rep = verify_generation(&control, &u, 8, window, 1e-2).map_err(|e| e.to_string())?;
        weakest_control = weakest_control.min(rep.residual);
        ensure(
            rep.residual > 1e-2,
            format!("trial {trial} control {spectrum:?}: residual {:e}", rep.residual),
        )?;
    }
    Ok(format!(
        "20/20; zero residual <= {worst_zero:e}, fit residual <= {worst_fit:e}, controls >= {weakest_control:e}"
    ))
}

fn stationary_audit() -> Outcome {
    let grid = [
        c(0.0, 0.0),
        c(0.5, 0.0),
        c(-0.5, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
        c(0.0, 1.0),
        c(0.0, -1.0),
        c(1.0, 1.0),
    ];
    for (name, s) in [("hat", hat_schedule()), ("quadratic", quadratic_schedule())] {
        let rep = analytic_limit_audit(&s, &grid, 1, 32, None).map_err(|e| e.to_string())?;
        for e in &rep.entries {
            if let AuditOutcome::Inconclusive(msg) = &e.outcome {
                return Err(format!("{name}, lambda = {}: {msg}", e.lambda));
            }
        }
        let supported = rep.supported_lambdas();
        ensure(
            supported == vec![c(0.0, 0.0)],
            format!("{name}: non-empty support at {supported:?}"),
        )?;
        let zero = rep.entries[0].finite_support().cloned().unwrap_or_default();
        ensure(zero.len() == 1, format!("{name}: support {zero:?} at 0"))?;
    }

    let ws = omegas(&hat_schedule(), c(0.0, 0.0), 1, 32, None).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..=64 {
        let t = -1.0 + i as f64 / 32.0;
        worst = worst.max((ws[0].eval(t) - 1.0).norm());
        worst = worst.max(ws[1].eval(t).norm());
    }
    ensure(worst <= 1e-8, format!("omega deviation {worst:e}"))?;
    Ok(format!("support only at 0 for hat and quadratic; omega deviation {worst:e}"))
}

fn invariant_subspaces() -> Outcome {
    let demo = four_families_demo(42).map_err(|e| e.to_string())?;
    for f in &demo.families {
        ensure(f.verified, format!("family {} not invariant", f.label))?;
    }
    ensure(
        demo.random_non_invariant * 10 >= demo.random_trials * 9,
        format!(
            "only {}/{} random planes non-invariant",
            demo.random_non_invariant, demo.random_trials
        ),
    )?;

    let op = BlockShiftOperator::build(1);
    let m = minimal_invariant_subspace(&op, &DVector::from_vec(vec![0.0, 1.0, 0.0]))
        .map_err(|e| e.to_string())?;
    let n1 = Subspace::from_vectors(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])
        .map_err(|e| e.to_string())?;
    let same = m.dim() == 2
        && n1.vectors().iter().all(|v| m.contains(&DVector::from_vec(v.clone())))
        && m.vectors().iter().all(|v| n1.contains(&DVector::from_vec(v.clone())));
    ensure(same, format!("minimal subspace {:?}", m.vectors()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    for d in 0..=6usize {
        let op = BlockShiftOperator::build(d);
        for _ in 0..200 {
            let k = rng.gen_range(0..=d);
            let p: Vec<i64> = (0..=k).map(|_| rng.gen_range(-20..=20)).collect();
            // p(t + 1) by Horner in exact integers: q <- q(t) * (t + 1) + a
            let mut q = vec![0i64; k + 1];
            for &a in p.iter().rev() {
                let mut next = vec![0i64; k + 1];
                for (i, &qi) in q.iter().enumerate() {
                    next[i] += qi;
                    if i + 1 <= k {
                        next[i + 1] += qi;
                    }
                }
                next[0] += a;
                q = next;
            }
            let off = BlockShiftOperator::block_offset(k);
            let mut v = vec![0.0; op.dim()];
            for (i, &a) in p.iter().enumerate() {
                v[off + k - i] = a as f64;
            }
            let got = op.apply(&DVector::from_vec(v)).map_err(|e| e.to_string())?;
            for (i, &qi) in q.iter().enumerate() {
                ensure(
                    got[off + k - i] == qi as f64,
                    format!("d = {d}, p = {p:?}: coefficient {i} is {} not {qi}", got[off + k - i]),
                )?;
            }
            checked += 1;
        }
    }
    Ok(format!(
        "4 families invariant, {}/{} random planes not, minimal((0,1,0)) = N(1), {checked} shifts exact",
        demo.random_non_invariant, demo.random_trials
    ))
}

fn lagrange_estimate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = Vec::new();
    let mut literal_violations = 0;
    let mut tightest = 0.0f64;
    for trial in 0..1000 {
        let n = rng.gen_range(0..=8usize);
        let coeffs = (0..=n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let p = LaurentPolynomial::new(coeffs, 0);
        let cell = 1.0 / (n + 1) as f64;
        let points: Vec<f64> = (0..=n)
            .map(|i| (i as f64 + rng.gen_range(0.05..0.95)) * cell)
            .collect();
        let b = lagrange_bound(&p, &points).map_err(|e| format!("trial {trial}: {e}"))?;
        if b.rhs > 0.0 {
            tightest = tightest.max(b.lhs / b.rhs);
        }
        if !b.holds {
            violations.push(format!("trial {trial}: {} > {}", b.lhs, b.rhs));
        }
        if !b.literal_holds {
            literal_violations += 1;
        }
    }
    ensure(violations.is_empty(), violations.join("; "))?;
    Ok(format!(
        "1000 instances, 0 violations, max lhs/rhs {tightest:.4}; \
         non-periodic gap would fail {literal_violations}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("hat exactness", hat_exactness),
        ("partition of unity", partition_of_unity),
        ("Poisson consistency", poisson_consistency),
        ("decay characterization", decay_characterization),
        ("annihilation laws", annihilation),
        ("zero conditions and generation", zero_conditions_and_generation),
        ("stationary audit", stationary_audit),
        ("invariant subspaces", invariant_subspaces),
        ("Lagrange bound", lagrange_estimate),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
