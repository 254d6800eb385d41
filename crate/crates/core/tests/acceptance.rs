//! Acceptance criteria for the benchmark and the property suites. Prints one
//! PASS/FAIL line per criterion and exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use funnelim::funnel::{boundary_ratio_sup, check_k1, check_k2, initial_errors};
use funnelim::internal_model::{default_beta, interconnect, InternalModelRealization};
use funnelim::lti::{classify, random_sigma_mr_with, GeneratorOptions};
use funnelim::sim::montecarlo::{run_suite, MonteCarloOptions};
use funnelim::sim::presets::{
    demo_alpha, demo_controller, demo_internal_model, demo_omega, demo_plant, demo_reference, demo_scenario,
};
use funnelim::sim::{integrate, tracking_metrics};
use funnelim::{Polynomial, ReferenceSignal, Term};
use nalgebra::{Complex, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// tolerances and limits
const STRUCTURE_TOL: f64 = 1e-8;
const CLASSIFY_TIME: Duration = Duration::from_secs(1);
const TRANSFER_TOL: f64 = 1e-8;
const MARKOV_TOL: f64 = 1e-12;
const RANDOM_PAIRS: u64 = 100;
const K1_MARGIN: f64 = 12.33;
const K1_MARGIN_TOL: f64 = 0.01;
const K2_LEVEL1: f64 = 0.200;
const K2_LEVEL1_TOL: f64 = 1e-6;
const K2_LEVEL2: f64 = 0.486;
const K2_LEVEL2_TOL: f64 = 1e-3;
const EPS_SLACK: f64 = 1e-6;
const RUN_TIME: Duration = Duration::from_secs(30);
const TAIL_WITH_IM: f64 = 1e-2;
const TAIL_RATIO: f64 = 10.0;
const TAIL_WITHOUT_IM: f64 = 0.05;
const MC_SEEDS: u64 = 50;
const MC_TIME: Duration = Duration::from_secs(300);
const RK4_RATIO: (f64, f64) = (8.0, 32.0);
const ROUTH_CASES: usize = 1000;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let sys = demo_plant::<f64>();
    let rep = classify(&sys);
    let mut poles = sys.poles();
    let elapsed = start.elapsed();
    poles.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    let poles_ok = poles.len() == 3
        && poles.iter().zip([-1.0, 1.0, 3.0]).all(|(p, e)| (p - Complex::new(e, 0.0)).norm() <= STRUCTURE_TOL);
    let gamma = rep.gamma.as_ref().map(|g| g[(0, 0)]);
    let zeros_ok =
        rep.invariant_zeros.len() == 1 && (rep.invariant_zeros[0] - Complex::new(-1.0, 0.0)).norm() <= STRUCTURE_TOL;
    let pass = rep.relative_degree == Some(2)
        && gamma.is_some_and(|g| near(g, 1.0, STRUCTURE_TOL))
        && rep.gamma_positive_definite
        && zeros_ok
        && poles_ok
        && rep.in_sigma_mr
        && elapsed < CLASSIFY_TIME;
    verdict(
        pass,
        format!(
            "r = {:?}, gamma = {:?}, zeros = {:?}, poles = {:?}, in class = {}, {:.1} ms",
            rep.relative_degree,
            gamma,
            rep.invariant_zeros,
            poles,
            rep.in_sigma_mr,
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_2() -> Verdict {
    let w: f64 = demo_omega();
    let im = match demo_internal_model::<f64>() {
        Ok(im) => im,
        Err(e) => return verdict(false, format!("synthesis failed: {e}")),
    };
    let a_expected = nalgebra::DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -w * w, 0.0]);
    let a_ok = im.a_hat == a_expected;
    let b_ok = im.b_hat.as_slice() == [0.0, 0.0, 1.0];
    let c_expected = [27.0, 27.0 - w * w, 9.0];
    let c_ok = im.c_hat.iter().zip(c_expected).all(|(c, e)| near(*c, e, 1e-9 * (1.0 + e.abs())));
    let transfer = im.transfer_identity_error().unwrap_or(f64::INFINITY);
    let points = im.sample_points().map_or(0, |p| p.len());
    let flat_row = &demo_alpha::<f64>() + &Polynomial::new(vec![27.0, 27.0 - w * w, 0.0]);
    let flat_row_rejected = flat_row.coeffs() == [27.0, 27.0, 0.0, 1.0]
        && flat_row.is_hurwitz() == Ok(false)
        && InternalModelRealization::realize(&demo_alpha(), &flat_row, 1).is_err();
    let pass = a_ok && b_ok && c_ok && transfer <= TRANSFER_TOL && points == 8 && flat_row_rejected;
    verdict(
        pass,
        format!(
            "A exact = {a_ok}, b exact = {b_ok}, c = {:?}, transfer error {transfer:.2e} at {points} points, row (27, 27 - w0^2, 0) gives {flat_row}, non-Hurwitz and rejected = {flat_row_rejected}",
            im.c_hat.as_slice()
        ),
    )
}

fn criterion_3() -> Verdict {
    let ic = match demo_internal_model::<f64>().and_then(|im| interconnect(&demo_plant(), &im)) {
        Ok(ic) => ic,
        Err(e) => return verdict(false, format!("interconnection failed: {e}")),
    };
    let cab = ic.system().markov(1)[(0, 0)];
    let bench_ok = near(cab, 1.0, MARKOV_TOL) && ic.report.in_sigma_mr;

    let mut random_ok = 0;
    for seed in 0..RANDOM_PAIRS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let (m, r, q) = (rng.random_range(1..=2), rng.random_range(1..=3), rng.random_range(0..=2));
        let plant = random_sigma_mr_with::<f64>(m, r, q, seed, GeneratorOptions { orthogonal_transform: true });
        let w: f64 = rng.random_range(0.3..5.0);
        let alpha = match rng.random_range(0..3) {
            0 => Polynomial::new(vec![0.0, 1.0]),
            1 => Polynomial::new(vec![w * w, 0.0, 1.0]),
            _ => Polynomial::new(vec![0.0, w * w, 0.0, 1.0]),
        };
        let ok = default_beta(&alpha, rng.random_range(0.5..4.0))
            .and_then(|beta| InternalModelRealization::realize(&alpha, &beta, m))
            .and_then(|im| interconnect(&plant, &im))
            .map(|ic| {
                let gamma = plant.markov(r - 1);
                let gamma_ic = ic.system().markov(r - 1);
                (gamma_ic - &gamma).amax() <= 1e-9 * gamma.amax() && ic.report.in_sigma_mr
            })
            .unwrap_or(false);
        random_ok += usize::from(ok);
    }
    let pass = bench_ok && random_ok == RANDOM_PAIRS as usize;
    verdict(
        pass,
        format!(
            "benchmark C_ic A_ic B_ic = {cab:.15}, in class = {}; random pairs {random_ok}/{RANDOM_PAIRS}",
            ic.report.in_sigma_mr
        ),
    )
}

fn criterion_4() -> Verdict {
    let cfg = demo_controller::<f64>();
    let k1 = check_k1(&cfg);
    let scn = match demo_scenario::<f64>(true) {
        Ok(s) => s,
        Err(e) => return verdict(false, format!("scenario failed: {e}")),
    };
    let (sys, state0) = scn.closed_loop_plant().expect("benchmark interconnection");
    let e0 = initial_errors(&sys, &state0, &scn.reference, &cfg).expect("benchmark initial errors");
    let k2 = check_k2(&cfg, &e0);

    // independent dense-grid sup oracle for the K1 terms
    let (f1, f2) = (&cfg.funnels()[0], &cfg.funnels()[1]);
    let n = 400_000;
    let (mut rate, mut ratio) = (0.0f64, 0.0f64);
    for k in 0..=n {
        let t = 5.0 * k as f64 / n as f64;
        rate = rate.max((f1.phi_dot(t) / f1.phi(t)).abs());
        ratio = ratio.max(f1.phi(t) / f2.phi(t));
    }
    let oracle_margin = cfg.k()[0] - rate - ratio;
    let analytic_ratio = boundary_ratio_sup(f1, f2);
    let pass = k1.satisfied
        && near(k1.margins[0], K1_MARGIN, K1_MARGIN_TOL)
        && near(oracle_margin, K1_MARGIN, K1_MARGIN_TOL)
        && k2.satisfied
        && near(k2.occupancies[0], K2_LEVEL1, K2_LEVEL1_TOL)
        && near(k2.occupancies[1], K2_LEVEL2, K2_LEVEL2_TOL);
    verdict(
        pass,
        format!(
            "K1 margin {:.6} (grid oracle {:.6}, rate {:.4}, ratio {:.4}/{:.4}); K2 occupancies {:.7}, {:.5}",
            k1.margins[0], oracle_margin, rate, analytic_ratio, ratio, k2.occupancies[0], k2.occupancies[1]
        ),
    )
}

struct BenchmarkRuns {
    tails: [f64; 2],
    detail: String,
    invariant_ok: bool,
}

fn benchmark_runs() -> BenchmarkRuns {
    let mut tails = [f64::NAN; 2];
    let mut invariant_ok = true;
    let mut parts = Vec::new();
    for (slot, with_im) in [true, false].into_iter().enumerate() {
        let start = Instant::now();
        let result = demo_scenario::<f64>(with_im).and_then(|s| integrate(&s));
        let elapsed = start.elapsed();
        let label = if with_im { "with IM" } else { "without IM" };
        match result {
            Ok(trace) => {
                let m = tracking_metrics(&trace);
                let eps1 = 61.8 / 74.13;
                let ok = trace.completed()
                    && m.max_occupancy[0] <= eps1 + EPS_SLACK
                    && m.max_occupancy[1] < 1.0
                    && elapsed < RUN_TIME;
                invariant_ok &= ok;
                tails[slot] = if trace.completed() { m.tail_error } else { f64::NAN };
                parts.push(format!(
                    "{label}: completed = {}, max occupancy ({:.4}, {:.4}) vs eps1 {eps1:.4}, {:.2} s",
                    trace.completed(),
                    m.max_occupancy[0],
                    m.max_occupancy[1],
                    elapsed.as_secs_f64()
                ));
            }
            Err(e) => {
                invariant_ok = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    BenchmarkRuns { tails, detail: parts.join("; "), invariant_ok }
}

fn criterion_5(runs: &BenchmarkRuns) -> Verdict {
    verdict(runs.invariant_ok, runs.detail.clone())
}

fn criterion_6(runs: &BenchmarkRuns) -> Verdict {
    let [with, without] = runs.tails;
    let ratio = without / with;
    let pass = with <= TAIL_WITH_IM && ratio >= TAIL_RATIO && without >= TAIL_WITHOUT_IM;
    verdict(pass, format!("tail error with IM {with:.3e}, without IM {without:.3e}, ratio {ratio:.1}"))
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let outcomes = run_suite::<f64>(0..MC_SEEDS, &MonteCarloOptions::default());
    let elapsed = start.elapsed();
    let mut held = 0;
    let mut converged = 0;
    let mut failures = Vec::new();
    for (seed, outcome) in &outcomes {
        match outcome {
            Ok(o)
                if !o.metrics.partial
                    && o.epsilon.iter().zip(&o.metrics.max_occupancy).all(|(e, occ)| *occ <= e + EPS_SLACK) =>
            {
                held += 1;
                converged += usize::from(o.metrics.converged(1e-2));
            }
            Ok(o) => failures.push(format!("seed {seed}: {:?} vs {:?}", o.metrics.max_occupancy, o.epsilon)),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let pass = held == MC_SEEDS as usize && elapsed < MC_TIME;
    let mut detail = format!(
        "{held}/{MC_SEEDS} scenarios keep phi_i|e_i| <= eps_i + {EPS_SLACK:e}, {converged}/{MC_SEEDS} with tail < 1e-2, {:.1} s",
        elapsed.as_secs_f64()
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join(", ")));
    }
    verdict(pass, detail)
}

fn rk4_ratio(with_im: bool) -> Option<f64> {
    let finals: Option<Vec<DVector<f64>>> = [4e-4, 2e-4, 1e-4]
        .iter()
        .map(|&h| {
            let scn = demo_scenario::<f64>(with_im).ok()?.with_horizon(0.5, h).ok()?;
            let trace = integrate(&scn).ok()?;
            let last = trace.samples.last()?;
            Some(DVector::from_iterator(last.x.len() + last.z.len(), last.x.iter().chain(last.z.iter()).copied()))
        })
        .collect();
    let f = finals?;
    Some((&f[0] - &f[1]).norm() / (&f[1] - &f[2]).norm())
}

fn routh_agreement() -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut agree) = (0, 0);
    while checked < ROUTH_CASES {
        let real: Vec<f64> = (0..rng.random_range(0..4)).map(|_| rng.random_range(-3.0..3.0)).collect();
        let pairs: Vec<(f64, f64)> =
            (0..rng.random_range(0..3)).map(|_| (rng.random_range(-3.0..3.0), rng.random_range(0.1..3.0))).collect();
        if real.is_empty() && pairs.is_empty() {
            continue;
        }
        let mut p = Polynomial::from_real_roots(&real);
        for (re, im) in pairs {
            p = &p * &Polynomial::new(vec![re * re + im * im, -2.0 * re, 1.0]);
        }
        let Ok(roots) = p.roots() else { continue };
        let abscissa = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if abscissa.abs() < 1e-6 * (1.0 + p.max_abs_coeff()) {
            continue;
        }
        checked += 1;
        agree += usize::from(p.is_hurwitz() == Ok(abscissa < 0.0));
    }
    (agree, checked)
}

fn fd_worst() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut signals = vec![demo_reference::<f64>()];
    for _ in 0..20 {
        let w = rng.random_range(0.5..15.0);
        let terms = vec![
            Term::constant(rng.random_range(-2.0..2.0)),
            Term::poly(rng.random_range(-1.0..1.0), rng.random_range(1..4)),
            Term::sin(rng.random_range(-2.0..2.0), w, rng.random_range(0.0..6.0)),
            Term::cos(rng.random_range(-2.0..2.0), w * 0.7, 0.0),
            Term::exp(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ];
        signals.push(ReferenceSignal::new(vec![terms], Polynomial::one()).expect("non-empty"));
    }
    let mut worst = 0.0f64;
    for s in &signals {
        for k in 0..50 {
            let t = 0.04 * k as f64 + 0.013;
            let (ahead, behind, here) = (s.evaluate(t + FD_STEP, 3), s.evaluate(t - FD_STEP, 3), s.evaluate(t, 3));
            for j in 1..=3 {
                let fd = (ahead[(0, j - 1)] - behind[(0, j - 1)]) / (2.0 * FD_STEP);
                let rel = (fd - here[(0, j)]).abs() / (1.0 + here[(0, j)].abs());
                worst = worst.max(rel);
            }
        }
    }
    worst
}

fn criterion_8() -> Verdict {
    let ratios = [rk4_ratio(true), rk4_ratio(false)];
    let rk4_ok = ratios.iter().all(|r| r.is_some_and(|r| (RK4_RATIO.0..=RK4_RATIO.1).contains(&r)));
    let (agree, checked) = routh_agreement();
    let fd = fd_worst();
    let pass = rk4_ok && agree == checked && fd <= FD_TOL;
    verdict(
        pass,
        format!(
            "RK4 ratios {:?}; Routh agrees on {agree}/{checked}; worst finite-difference mismatch {fd:.2e}",
            ratios.map(|r| r.map(|v| (v * 100.0).round() / 100.0))
        ),
    )
}

fn main() {
    let runs = benchmark_runs();
    let results = [
        ("structure of the benchmark plant", criterion_1()),
        ("internal-model synthesis", criterion_2()),
        ("interconnection high-frequency gain", criterion_3()),
        ("design conditions K1/K2", criterion_4()),
        ("funnel invariance on the benchmark", criterion_5(&runs)),
        ("asymptotic tracking contrast", criterion_6(&runs)),
        ("Monte Carlo cascade bounds", criterion_7()),
        ("numerics", criterion_8()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {tag}: {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
