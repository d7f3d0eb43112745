//! Verification suites with JSON reports.
//!
//! Each suite is a list of checks; a check records how many instances it
//! covered and up to [`MAX_REPORTED`] failures with the model, the point and
//! the two disagreeing values. Diagnostics that are reported without being
//! asserted carry `asserted: false` and never fail a suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::random;
use super::{check_copula, check_quasicopula, monte_carlo_joint_many, rectangle_volume, DiscreteModelOracle};
use crate::copulas::{joint_marshall_h, joint_maxmin_h, joint_rmm_hsigma, rmm2, Family};
use crate::distfn::DistributionFn;
use crate::error::Result;
use crate::genfn::{validate, Generator};
use crate::imprecise::{build_bounds, maxmin_vertex_diagnostic, rmm_envelope, rmm_vertex_scan, theorems, PBox, ShockModel};

pub const MAX_REPORTED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Axioms,
    Oracles,
    Theorems,
    Montecarlo,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub model: String,
    pub point: Vec<f64>,
    pub expected: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub instances: usize,
    pub comparisons: usize,
    pub asserted: bool,
    pub failure_count: usize,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    fn new(check: impl Into<String>, asserted: bool) -> Self {
        CheckReport {
            check: check.into(),
            instances: 0,
            comparisons: 0,
            asserted,
            failure_count: 0,
            failures: Vec::new(),
            note: None,
        }
    }

    fn fail(&mut self, model: impl FnOnce() -> String, point: &[f64], expected: f64, actual: f64) {
        self.failure_count += 1;
        if self.failures.len() < MAX_REPORTED {
            self.failures.push(Failure {
                model: model(),
                point: point.to_vec(),
                expected,
                actual,
            });
        }
    }

    /// `|actual - expected| <= tol`
    fn close(&mut self, model: impl FnOnce() -> String, point: &[f64], expected: f64, actual: f64, tol: f64) {
        self.comparisons += 1;
        if (actual - expected).abs() > tol || actual.is_nan() || expected.is_nan() {
            self.fail(model, point, expected, actual);
        }
    }

    pub fn passed(&self) -> bool {
        !self.asserted || self.failure_count == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

/// Instance counts; [`SuiteOptions::full`] matches the documented acceptance
/// sizes, [`SuiteOptions::quick`] is for smoke runs.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub oracle_models: usize,
    pub oracle_points: usize,
    pub axiom_vectors: usize,
    pub theorem_models: usize,
    pub theorem_points: usize,
    pub envelope_points: usize,
    pub mc_samples: u64,
}

impl SuiteOptions {
    pub fn full(seed: u64) -> Self {
        SuiteOptions {
            seed,
            oracle_models: 100,
            oracle_points: 50,
            axiom_vectors: 50,
            theorem_models: 20,
            theorem_points: 1000,
            envelope_points: 1000,
            mc_samples: 1_000_000,
        }
    }

    pub fn quick(seed: u64) -> Self {
        SuiteOptions {
            seed,
            oracle_models: 10,
            oracle_points: 10,
            axiom_vectors: 4,
            theorem_models: 3,
            theorem_points: 60,
            envelope_points: 100,
            mc_samples: 100_000,
        }
    }
}

const FAMILIES: [Family; 3] = [Family::Marshall, Family::MaxMin, Family::Rmm];

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(salt);
    rng
}

pub fn describe_model(m: &ShockModel) -> String {
    let comps: Vec<String> = m
        .endogenous()
        .iter()
        .map(|b| {
            if b.is_precise() {
                b.lower().to_string()
            } else {
                format!("[{}, {}]", b.lower(), b.upper())
            }
        })
        .collect();
    format!(
        "{} p={} X=({}) Z={}",
        m.family(),
        m.partition(),
        comps.join("; "),
        m.exogenous()
    )
}

/// Composed joint value `C(G_1(x_1), ..., G_n(x_n))` of a precise model.
pub fn composed_joint(m: &ShockModel, x: &[f64]) -> Result<f64> {
    match m.family() {
        Family::Marshall => joint_marshall_h(m, x),
        Family::MaxMin => joint_maxmin_h(m, x),
        Family::Rmm => joint_rmm_hsigma(m, x),
    }
}

/// Composed copula formulas against exact enumeration on random discrete models.
pub fn oracles(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (fi, family) in FAMILIES.into_iter().enumerate() {
        let mut rng = rng_for(opts.seed, 100 + fi as u64);
        let mut check = CheckReport::new(format!("oracle_{family}"), true);
        let mut mass = CheckReport::new(format!("oracle_total_mass_{family}"), true);
        for k in 0..opts.oracle_models {
            let n = 2 + k % 3;
            let m = random::discrete_model(&mut rng, family, n, 5)?;
            let oracle = DiscreteModelOracle::new(&m)?;
            mass.close(|| describe_model(&m), &[], 1.0, oracle.total_mass(), 1e-12);
            let reflected = family == Family::Rmm;
            for _ in 0..opts.oracle_points {
                let x = random::lattice_point(&mut rng, n);
                let exact = oracle.exact_joint(&x, reflected)?;
                let formula = composed_joint(&m, &x)?;
                check.close(|| describe_model(&m), &x, exact, formula, 1e-12);
            }
            check.instances += 1;
            mass.instances += 1;
        }
        checks.push(check);
        checks.push(mass);
    }
    Ok(finish(Suite::Oracles, opts.seed, checks))
}

/// Generator conditions, copula axioms on grids, random rectangle volumes and
/// quasi-copula properties of the RMM envelope.
pub fn axioms(opts: &SuiteOptions, extra: &[Generator]) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut conditions = CheckReport::new("generator_conditions", true);
    let mut rng = rng_for(opts.seed, 200);
    let mut gens: Vec<(String, Generator)> = extra.iter().map(|g| (g.describe(), g.clone())).collect();
    for family in FAMILIES {
        for _ in 0..opts.axiom_vectors.min(10) {
            let gv = random::generator_vector(&mut rng, family, 3)?;
            gens.extend(gv.generators().iter().map(|g| (g.describe(), g.clone())));
        }
    }
    for (name, g) in &gens {
        let report = validate(g, 513);
        conditions.instances += 1;
        conditions.comparisons += report.points_checked;
        for v in &report.violations {
            let at = v.witness.last().copied().unwrap_or(f64::NAN);
            conditions.fail(|| format!("{name}: {} {}", v.condition, v.detail), &v.witness, at, g.eval(at));
        }
    }
    checks.push(conditions);

    for (fi, family) in FAMILIES.into_iter().enumerate() {
        let mut rng = rng_for(opts.seed, 210 + fi as u64);
        let mut check = CheckReport::new(format!("copula_axioms_{family}"), true);
        for k in 0..opts.axiom_vectors {
            let n = 2 + k % 2;
            let gv = random::generator_vector(&mut rng, family, n)?;
            let r = check_copula(|u: &[f64]| gv.eval(u), n, 21, 1e-12);
            check.instances += 1;
            check.comparisons += 21usize.pow(n as u32);
            if !r.pass {
                let cell: Vec<f64> = r.min_cell.as_ref().map(|c| c.bounds.iter().map(|b| b.0).collect()).unwrap_or_default();
                check.fail(
                    || format!("{family} n={n} margin_error={} grounded_error={}", r.margin_error, r.grounded_error),
                    &cell,
                    0.0,
                    r.min_cell_volume,
                );
            }
        }
        checks.push(check);
    }

    let mut rects = CheckReport::new("rmm2_random_rectangles", true);
    let mut rng = rng_for(opts.seed, 220);
    for _ in 0..opts.axiom_vectors {
        let gv = random::truncated_rmm(&mut rng, 2, 1)?;
        let (f, g) = (gv.get(0), gv.get(1));
        rects.instances += 1;
        for _ in 0..200 {
            let mut a = random::unit_point(&mut rng, 2);
            let mut b = random::unit_point(&mut rng, 2);
            for d in 0..2 {
                if a[d] > b[d] {
                    std::mem::swap(&mut a[d], &mut b[d]);
                }
            }
            let vol = rectangle_volume(2, |u: &[f64]| rmm2(f, g, u[0], u[1]), &[(a[0], b[0]), (a[1], b[1])])?;
            rects.comparisons += 1;
            if vol < -1e-12 {
                rects.fail(|| gv.generators().iter().map(Generator::describe).collect::<Vec<_>>().join(", "), &[a[0], b[0], a[1], b[1]], 0.0, vol);
            }
        }
    }
    checks.push(rects);

    // envelopes must be quasi-copulas; any negative cell is reported, not asserted
    let mut quasi = CheckReport::new("rmm_envelope_quasicopula", true);
    let mut increasing = CheckReport::new("rmm_envelope_n_increasing", false);
    let mut rng = rng_for(opts.seed, 230);
    for _ in 0..opts.axiom_vectors.min(10) {
        let m = random::pbox_model(&mut rng, Family::Rmm, 3)?;
        let bf = build_bounds(&m)?;
        for (side, pick) in [("inf", 0usize), ("sup", 1usize)] {
            let f = |u: &[f64]| {
                let (lo, hi) = rmm_envelope(&bf, u).expect("rmm bounds");
                if pick == 0 {
                    lo
                } else {
                    hi
                }
            };
            let q = check_quasicopula(f, 3, 11, 1e-12);
            quasi.instances += 1;
            quasi.comparisons += 11usize.pow(3);
            if !q.pass {
                quasi.fail(
                    || format!("{side} of {}", describe_model(&m)),
                    &[],
                    0.0,
                    q.margin_error.max(q.grounded_error).max(q.monotone_violation).max(q.lipschitz_excess),
                );
            }
            increasing.instances += 1;
            increasing.comparisons += 10usize.pow(3);
            if q.min_cell_volume < -1e-12 {
                let corner: Vec<f64> = q
                    .min_cell
                    .as_ref()
                    .map(|c| c.bounds.iter().flat_map(|b| [b.0, b.1]).collect())
                    .unwrap_or_default();
                increasing.fail(|| format!("{side} of {}", describe_model(&m)), &corner, 0.0, q.min_cell_volume);
            }
        }
    }
    increasing.note = Some("failures here are counterexample rectangles to n-increasingness of the envelope".into());
    checks.push(quasi);
    checks.push(increasing);
    Ok(finish(Suite::Axioms, opts.seed, checks))
}

/// Theorem items on random p-box models, the envelope reduction and the
/// maxmin vertex diagnostic.
pub fn theorem_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut by_item: Vec<CheckReport> = Vec::new();
    for (fi, family) in FAMILIES.into_iter().enumerate() {
        let mut rng = rng_for(opts.seed, 300 + fi as u64);
        for k in 0..opts.theorem_models {
            let n = 2 + k % 2;
            let m = random::pbox_model(&mut rng, family, n)?;
            let members = random::interior_members(&mut rng, &m, 6)?;
            let points: Vec<Vec<f64>> = (0..opts.theorem_points).map(|_| random::mixed_point(&mut rng, n)).collect();
            let xs: Vec<f64> = (0..opts.theorem_points).map(|_| random::mixed_point(&mut rng, 1)[0]).collect();
            for item in theorems::check(&m, &members, &points, &xs, 1e-10)? {
                let pos = match by_item.iter().position(|c| c.check == item.item) {
                    Some(p) => p,
                    None => {
                        by_item.push(CheckReport::new(item.item, true));
                        by_item.len() - 1
                    }
                };
                let c = &mut by_item[pos];
                c.instances += 1;
                c.comparisons += item.comparisons;
                if let Some(w) = &item.worst {
                    c.failure_count += item.failures - 1;
                    c.fail(|| describe_model(&m), &w.point, w.expected, w.actual);
                }
            }
        }
    }
    let mut checks = by_item;
    checks.extend(envelope_checks(opts)?);

    let mut diag = CheckReport::new("maxmin_vertex_diagnostic", false);
    let mut rng = rng_for(opts.seed, 320);
    for _ in 0..opts.theorem_models.min(5) {
        let m = random::pbox_model(&mut rng, Family::MaxMin, 3)?;
        let bf = build_bounds(&m)?;
        let members = random::interior_members(&mut rng, &m, 8)?
            .iter()
            .map(ShockModel::generators)
            .collect::<Result<Vec<_>>>()?;
        diag.instances += 1;
        for _ in 0..50 {
            let u = random::unit_point(&mut rng, 3);
            let d = maxmin_vertex_diagnostic(&bf, &members, &u)?;
            diag.comparisons += 1;
            if !d.attained_at_vertices {
                let (e, a) = if d.sampled_min < d.vertex_min {
                    (d.vertex_min, d.sampled_min)
                } else {
                    (d.vertex_max, d.sampled_max)
                };
                diag.fail(|| describe_model(&m), &u, e, a);
            }
        }
    }
    diag.note = Some("failures are points where an interior member leaves the vertex range".into());
    checks.push(diag);
    Ok(finish(Suite::Theorems, opts.seed, checks))
}

/// Reduced-set RMM envelope against the full vertex scan, `n` in 3..=5.
pub fn envelope_checks(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut inf = CheckReport::new("rmm_envelope_inf_reduction", true);
    let mut sup = CheckReport::new("rmm_envelope_sup_reduction", true);
    let mut rng = rng_for(opts.seed, 310);
    for n in 3..=5 {
        let per_model = opts.envelope_points / 10;
        for _ in 0..10 {
            let m = random::pbox_model(&mut rng, Family::Rmm, n)?;
            let bf = build_bounds(&m)?;
            inf.instances += 1;
            sup.instances += 1;
            for _ in 0..per_model.max(1) {
                let u = random::unit_point(&mut rng, n);
                let (lo, hi) = rmm_envelope(&bf, &u)?;
                let (vmin, vmax) = rmm_vertex_scan(&bf, &u)?;
                inf.close(|| describe_model(&m), &u, vmin, lo, 1e-12);
                sup.close(|| describe_model(&m), &u, vmax, hi, 1e-12);
            }
        }
    }
    Ok(vec![inf, sup])
}

/// The worked example's precise model: unit-rate exponential shocks and an
/// exogenous shock fixed at 1, one max-type and one min-type component.
pub fn example_model() -> Result<ShockModel> {
    let e = DistributionFn::exponential(1.0)?;
    ShockModel::new(
        Family::Rmm,
        1,
        vec![PBox::precise(e.clone()), PBox::precise(e)],
        DistributionFn::dirac(1.0)?,
    )
}

/// Twenty test points of the worked example, all with positive probability
/// and away from the exogenous atom.
pub fn montecarlo_points() -> Vec<Vec<f64>> {
    let xs = [1.2, 1.5, 2.0, 2.5, 3.0];
    let ys = [0.1, 0.3, 0.5, 0.9];
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![x, y])).collect()
}

/// Simulation of the worked example against the composed RMM formula, plus a
/// bit-identical rerun.
pub fn montecarlo(opts: &SuiteOptions) -> Result<SuiteReport> {
    let m = example_model()?;
    let points = montecarlo_points();
    let est = monte_carlo_joint_many(&m, &points, opts.mc_samples, opts.seed, true)?;
    let mut check = CheckReport::new("montecarlo_rmm_example", true);
    check.instances = 1;
    for (x, e) in points.iter().zip(&est) {
        let exact = joint_rmm_hsigma(&m, x)?;
        check.close(|| describe_model(&m), x, exact, e.estimate, 4.0 * e.stderr);
    }
    let mut rerun = CheckReport::new("montecarlo_reproducible", true);
    rerun.instances = 1;
    let again = monte_carlo_joint_many(&m, &points, opts.mc_samples, opts.seed, true)?;
    for ((x, a), b) in points.iter().zip(&est).zip(&again) {
        rerun.close(|| describe_model(&m), x, a.estimate, b.estimate, 0.0);
    }
    Ok(finish(Suite::Montecarlo, opts.seed, vec![check, rerun]))
}

fn finish(suite: Suite, seed: u64, checks: Vec<CheckReport>) -> SuiteReport {
    SuiteReport {
        suite,
        seed,
        pass: checks.iter().all(CheckReport::passed),
        checks,
    }
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run(suite: Suite, opts: &SuiteOptions, extra: &[Generator]) -> Result<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::Axioms => vec![axioms(opts, extra)?],
        Suite::Oracles => vec![oracles(opts)?],
        Suite::Theorems => vec![theorem_suite(opts)?],
        Suite::Montecarlo => vec![montecarlo(opts)?],
        Suite::All => vec![axioms(opts, extra)?, oracles(opts)?, theorem_suite(opts)?, montecarlo(opts)?],
    })
}
