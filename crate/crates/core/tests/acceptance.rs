//! Acceptance criteria 1-7. Each criterion prints one PASS/FAIL line with its
//! measured figures; the process exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shock_copulas::config::ExampleSpec;
use shock_copulas::copulas::{joint_rmm_hsigma, rmm2, Family};
use shock_copulas::distfn::DistributionFn;
use shock_copulas::example;
use shock_copulas::genfn::{extend_chi, extend_phi, to_rmm};
use shock_copulas::imprecise::{build_bounds, rmm_envelope, rmm_vertex_scan, theorems};
use shock_copulas::verify::suites::{composed_joint, example_model, montecarlo_points};
use shock_copulas::verify::{check_copula, monte_carlo_joint_many, random, DiscreteModelOracle};

const FAMILIES: [Family; 3] = [Family::Marshall, Family::MaxMin, Family::Rmm];
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn rng(salt: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(salt);
    r
}

fn worst(errs: impl IntoIterator<Item = f64>) -> f64 {
    errs.into_iter().fold(0.0, |a, e| if e.is_nan() { f64::INFINITY } else { a.max(e) })
}

fn example_generators() -> (shock_copulas::genfn::Generator, shock_copulas::genfn::Generator) {
    let e1 = DistributionFn::exponential(1.0).unwrap();
    let z = DistributionFn::dirac(1.0).unwrap();
    (
        to_rmm(&extend_phi(&e1, &z)).unwrap(),
        to_rmm(&extend_chi(&e1, &z)).unwrap(),
    )
}

fn c1_example_reproduction() -> Outcome {
    const TOL: f64 = 1e-12;
    let (f, g) = example_generators();
    let em1 = (-1.0f64).exp();
    // u = 0 is the generator's fixed point f(0) = g(0) = 0, so the closed
    // forms are compared on (0, 1]
    let us: Vec<f64> = (1..=1000).map(|k| k as f64 / 1000.0).collect();
    let ef = worst(us.iter().map(|&u| (f.eval(u) - (1.0 - em1 - u).max(0.0)).abs()));
    let eg = worst(us.iter().map(|&u| (g.eval(u) - (em1 - u).max(0.0)).abs()));

    let (a, b) = (1.0 - em1, em1);
    let three_case = |u: f64, w: f64| {
        if u > a || w > b {
            u * w
        } else if b * u + a * w <= a * b {
            0.0
        } else {
            b * u + a * w - a * b
        }
    };
    let mut ec = 0.0f64;
    for i in 0..=100 {
        for j in 0..=100 {
            let (u, w) = (i as f64 / 100.0, j as f64 / 100.0);
            ec = ec.max((rmm2(&f, &g, u, w) - three_case(u, w)).abs());
        }
    }
    Outcome {
        pass: ef <= TOL && eg <= TOL && ec <= TOL,
        detail: format!("max|f err|={ef:.2e} max|g err|={eg:.2e} max|C err| on 101^2={ec:.2e} (tol {TOL:e})"),
    }
}

fn c2_bound_ordering() -> Outcome {
    let spec = ExampleSpec {
        lambda_box: [1.0, 2.0],
        mu_box: [1.0, 2.0],
        ..ExampleSpec::default()
    };
    let model = example::model_spec(&spec).unwrap().build().unwrap();
    let bf = build_bounds(&model).unwrap();
    let (fl, gl) = (bf.lower_gen.get(0), bf.lower_gen.get(1));
    let (fu, gu) = (bf.upper_gen.get(0), bf.upper_gen.get(1));
    let (mut violations, mut strict, mut worst) = (0usize, 0usize, 0.0f64);
    for i in 0..=100 {
        for j in 0..=100 {
            let (u, w) = (i as f64 / 100.0, j as f64 / 100.0);
            let (lo, hi) = (rmm2(fl, gl, u, w), rmm2(fu, gu, u, w));
            if lo < hi {
                violations += 1;
                worst = worst.max(hi - lo);
            }
            if lo > hi && (1..100).contains(&i) && (1..100).contains(&j) {
                strict += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0 && strict >= 1,
        detail: format!("violations={violations} (worst {worst:.2e}) strict interior points={strict} of 10201"),
    }
}

fn c3_oracle_equivalence() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut pass = true;
    let mut parts = Vec::new();
    for (fi, family) in FAMILIES.into_iter().enumerate() {
        let mut r = rng(30 + fi as u64);
        let (mut models, mut points, mut err) = (0usize, 0usize, 0.0f64);
        for k in 0..100 {
            let n = 2 + k % 3;
            let m = random::discrete_model(&mut r, family, n, 5).unwrap();
            let oracle = DiscreteModelOracle::new(&m).unwrap();
            for _ in 0..50 {
                let x = random::mixed_point(&mut r, n);
                let exact = oracle.exact_joint(&x, family == Family::Rmm).unwrap();
                let formula = composed_joint(&m, &x).unwrap();
                err = err.max((exact - formula).abs());
                points += 1;
            }
            models += 1;
        }
        pass &= err <= TOL;
        parts.push(format!("{family}: {models} models {points} points max err {err:.2e}"));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn c4_copula_axioms() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut pass = true;
    let mut parts = Vec::new();
    for (fi, family) in FAMILIES.into_iter().enumerate() {
        let mut r = rng(40 + fi as u64);
        let (mut margin, mut min_vol, mut failed) = (0.0f64, f64::INFINITY, 0usize);
        for k in 0..50 {
            let n = 2 + k % 2;
            let gv = random::generator_vector(&mut r, family, n).unwrap();
            let rep = check_copula(|u| gv.eval(u), n, 21, TOL);
            margin = margin.max(rep.margin_error).max(rep.grounded_error);
            min_vol = min_vol.min(rep.min_cell_volume);
            if !rep.pass {
                failed += 1;
            }
        }
        pass &= failed == 0 && margin <= TOL && min_vol >= -TOL;
        parts.push(format!(
            "{family}: 50 vectors, failed={failed} max margin err {margin:.2e} min cell volume {min_vol:.2e}"
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

/// Items that must be exercised for each family.
fn required_items(family: Family) -> &'static [&'static str] {
    match family {
        Family::Marshall => &[
            "marshall.copula_sandwich",
            "marshall.defining_relations",
            "marshall.joint_sandwich",
            "marshall.joint_bounds",
            "marshall.star_identity",
        ],
        Family::MaxMin => &[
            "maxmin.dagger_identity",
            "maxmin.joint_sandwich",
            "maxmin.joint_bounds",
            "maxmin.bivariate_mixed_sandwich",
        ],
        Family::Rmm => &[
            "rmm.defining_relations",
            "rmm.star_products",
            "rmm.joint_sandwich",
            "rmm.joint_bounds",
            "rmm.bivariate_reversed_copula_order",
        ],
    }
}

fn c5_theorem_suites() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut pass = true;
    let mut parts = Vec::new();
    for (fi, family) in FAMILIES.into_iter().enumerate() {
        let mut r = rng(50 + fi as u64);
        // item -> (comparisons, failures, instances where it failed)
        let mut tally: BTreeMap<&'static str, (usize, usize, usize)> = BTreeMap::new();
        for k in 0..20 {
            let n = 2 + k % 2;
            let m = random::pbox_model(&mut r, family, n).unwrap();
            let members = random::interior_members(&mut r, &m, 6).unwrap();
            let points: Vec<Vec<f64>> = (0..1000).map(|_| random::mixed_point(&mut r, n)).collect();
            let xs: Vec<f64> = (0..1000).map(|_| random::mixed_point(&mut r, 1)[0]).collect();
            for item in theorems::check(&m, &members, &points, &xs, TOL).unwrap() {
                let e = tally.entry(item.item).or_default();
                e.0 += item.comparisons;
                e.1 += item.failures;
                e.2 += usize::from(!item.holds);
            }
        }
        let failing: Vec<String> = tally
            .iter()
            .filter(|(_, t)| t.1 > 0)
            .map(|(k, t)| format!("{k} ({} failures in {} instances)", t.1, t.2))
            .collect();
        let missing: Vec<&str> = required_items(family)
            .iter()
            .copied()
            .filter(|k| tally.get(k).is_none_or(|t| t.0 == 0))
            .collect();
        pass &= failing.is_empty() && missing.is_empty();
        let comparisons: usize = tally.values().map(|t| t.0).sum();
        parts.push(format!(
            "{family}: 20 instances {} items {comparisons} comparisons failing={failing:?} unexercised={missing:?}",
            tally.len()
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn c6_envelope_identity() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut r = rng(60);
    let (mut inf_bad, mut sup_bad, mut total) = (0usize, 0usize, 0usize);
    let (mut inf_err, mut sup_err) = (0.0f64, 0.0f64);
    let mut witness: Option<(Vec<f64>, f64, f64)> = None;
    for n in 3..=5 {
        for _ in 0..10 {
            let m = random::pbox_model(&mut r, Family::Rmm, n).unwrap();
            let bf = build_bounds(&m).unwrap();
            for _ in 0..100 {
                let u = random::unit_point(&mut r, n);
                let (lo, hi) = rmm_envelope(&bf, &u).unwrap();
                let (vmin, vmax) = rmm_vertex_scan(&bf, &u).unwrap();
                total += 1;
                let (di, ds) = ((lo - vmin).abs(), (hi - vmax).abs());
                if di > TOL {
                    inf_bad += 1;
                }
                if ds > TOL {
                    sup_bad += 1;
                    if ds > sup_err {
                        witness = Some((u.clone(), hi, vmax));
                    }
                }
                inf_err = inf_err.max(di);
                sup_err = sup_err.max(ds);
            }
        }
    }
    let mut detail = format!(
        "{total} points (n=3,4,5): inf mismatches={inf_bad} (max {inf_err:.2e}), sup mismatches={sup_bad} (max {sup_err:.2e})"
    );
    if let Some((u, reduced, full)) = witness {
        detail.push_str(&format!("; worst sup at u={u:?}: reduced set {reduced:.6} vs all vertices {full:.6}"));
    }
    Outcome {
        pass: inf_bad == 0 && sup_bad == 0,
        detail,
    }
}

fn c7_monte_carlo() -> Outcome {
    const N: u64 = 1_000_000;
    const MC_SEED: u64 = 7;
    let m = example_model().unwrap();
    let points = montecarlo_points();
    let est = monte_carlo_joint_many(&m, &points, N, MC_SEED, true).unwrap();
    let again = monte_carlo_joint_many(&m, &points, N, MC_SEED, true).unwrap();
    // U = max(X, 1), W = min(Y, 1) with unit-rate X, Y: P(U <= x, W > y)
    let closed = |x: f64, y: f64| {
        if x >= 1.0 && y < 1.0 {
            -(-x).exp_m1() * (-y).exp()
        } else {
            0.0
        }
    };
    let (mut outside, mut formula_err, mut worst_z, mut max_stderr) = (0usize, 0.0f64, 0.0f64, 0.0f64);
    for (x, e) in points.iter().zip(&est) {
        let exact = joint_rmm_hsigma(&m, x).unwrap();
        formula_err = formula_err.max((exact - closed(x[0], x[1])).abs());
        let dev = (e.estimate - exact).abs();
        max_stderr = max_stderr.max(e.stderr);
        if dev > 4.0 * e.stderr {
            outside += 1;
        }
        if e.stderr > 0.0 {
            worst_z = worst_z.max(dev / e.stderr);
        }
    }
    let identical = est
        .iter()
        .zip(&again)
        .all(|(a, b)| a.estimate.to_bits() == b.estimate.to_bits() && a.stderr.to_bits() == b.stderr.to_bits());
    Outcome {
        pass: outside == 0 && identical && formula_err <= 1e-12,
        detail: format!(
            "N={N} seed={MC_SEED}: {} points, outside 4 stderr={outside}, worst |dev|/stderr={worst_z:.2}, max stderr={max_stderr:.2e}, formula vs closed form {formula_err:.2e}, bit-identical rerun={identical}",
            points.len()
        ),
    }
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "worked example reproduction",
            budget: Duration::from_secs(1),
            run: c1_example_reproduction,
        },
        Criterion {
            id: 2,
            name: "bound copula ordering",
            budget: Duration::from_secs(1),
            run: c2_bound_ordering,
        },
        Criterion {
            id: 3,
            name: "oracle equivalence",
            budget: Duration::from_secs(60),
            run: c3_oracle_equivalence,
        },
        Criterion {
            id: 4,
            name: "copula axioms",
            budget: Duration::from_secs(60),
            run: c4_copula_axioms,
        },
        Criterion {
            id: 5,
            name: "bound theorem suites",
            budget: Duration::from_secs(120),
            run: c5_theorem_suites,
        },
        Criterion {
            id: 6,
            name: "envelope reduced vertex set",
            budget: Duration::from_secs(30),
            run: c6_envelope_identity,
        },
        Criterion {
            id: 7,
            name: "Monte Carlo consistency",
            budget: Duration::from_secs(30),
            run: c7_monte_carlo,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(c.run).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| e.downcast_ref::<&str>().copied())
                    .unwrap_or("?")
            ),
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} [{:.3}s of {}s{}] {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            outcome.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
