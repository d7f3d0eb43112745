//! The exponential worked example: one max-type and one min-type component
//! with exponential shocks and an exogenous shock at a fixed time.
//!
//! [`run`] rebuilds every object of the example from the shock laws, compares
//! each against its closed form, and writes six fixture files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{DistSpec, ExampleSpec, ModelSpec, PBoxSpec};
use crate::copulas::{rmm2, Family};
use crate::distfn::{lifetime_max, lifetime_min, DistributionFn};
use crate::error::Result;
use crate::genfn::{extend_chi, extend_phi, to_rmm, Generator};
use crate::imprecise::build_bounds;
use crate::surface::{unit_axes, BoundLevel, GridSurface, SurfaceMeta};

pub const TOLERANCE: f64 = 1e-12;

pub const FILES: [&str; 6] = [
    "report.json",
    "lifetimes.csv",
    "generators.csv",
    "rmm_precise.csv",
    "rmm_bounds_lower.csv",
    "rmm_bounds_upper.csv",
];

#[derive(Debug, Clone, Serialize)]
pub struct ExampleCheck {
    pub name: &'static str,
    pub points: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub worst_point: Vec<f64>,
    pub expected: f64,
    pub actual: f64,
    pub pass: bool,
}

struct Worst {
    name: &'static str,
    points: usize,
    err: f64,
    at: Vec<f64>,
    expected: f64,
    actual: f64,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Worst {
            name,
            points: 0,
            err: 0.0,
            at: Vec::new(),
            expected: f64::NAN,
            actual: f64::NAN,
        }
    }

    fn see(&mut self, at: &[f64], expected: f64, actual: f64) {
        self.points += 1;
        let e = (expected - actual).abs();
        if e > self.err || e.is_nan() || self.at.is_empty() {
            self.err = if e.is_nan() { f64::INFINITY } else { e.max(self.err) };
            self.at = at.to_vec();
            self.expected = expected;
            self.actual = actual;
        }
    }

    fn done(self) -> ExampleCheck {
        ExampleCheck {
            name: self.name,
            points: self.points,
            max_error: self.err,
            tolerance: TOLERANCE,
            worst_point: self.at,
            expected: self.expected,
            actual: self.actual,
            pass: self.err <= TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingCheck {
    pub points: usize,
    pub violations: usize,
    pub strict_points: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub spec: ExampleSpec,
    pub model_hash: String,
    pub checks: Vec<ExampleCheck>,
    pub bound_ordering: OrderingCheck,
    pub files: Vec<PathBuf>,
    pub pass: bool,
}

impl ExampleReport {
    /// Only the failing parts, for error output.
    pub fn failures(&self) -> serde_json::Value {
        let checks: Vec<&ExampleCheck> = self.checks.iter().filter(|c| !c.pass).collect();
        let mut v = serde_json::json!({ "failed_checks": checks });
        if !self.bound_ordering.pass {
            v["bound_ordering"] = serde_json::to_value(&self.bound_ordering).unwrap_or_default();
        }
        v
    }
}

fn truncated(c: f64, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (c - u).max(0.0)
    }
}

/// Three-case closed form of the precise RMM copula, with `a = F_X(t)` and
/// `b = 1 - F_Y(t)`.
pub fn rmm_closed_form(a: f64, b: f64, u: f64, w: f64) -> f64 {
    let s = b * u + a * w;
    if u > a || w > b {
        u * w
    } else if s <= a * b {
        0.0
    } else {
        s - a * b
    }
}

fn exp(rate: f64) -> Result<DistSpec> {
    DistributionFn::exponential(rate)?;
    Ok(DistSpec::Exponential { rate })
}

/// Imprecise model of the example as a config spec.
pub fn model_spec(spec: &ExampleSpec) -> Result<ModelSpec> {
    Ok(ModelSpec {
        family: Family::Rmm,
        n: Some(2),
        p: Some(1),
        endogenous: vec![
            PBoxSpec::Bounds {
                lower: exp(spec.lambda_box[0])?,
                upper: exp(spec.lambda_box[1])?,
            },
            PBoxSpec::Bounds {
                lower: exp(spec.mu_box[0])?,
                upper: exp(spec.mu_box[1])?,
            },
        ],
        exogenous: DistSpec::Dirac {
            location: spec.shock_time,
        },
    })
}

fn gen_check(name: &'static str, g: &Generator, c: f64) -> ExampleCheck {
    let mut w = Worst::new(name);
    for k in 0..=1000 {
        let u = k as f64 / 1000.0;
        w.see(&[u], truncated(c, u), g.eval(u));
    }
    w.done()
}

/// Rebuilds and checks the example; writes fixtures into `out_dir` when given.
pub fn run(spec: &ExampleSpec, out_dir: Option<&Path>) -> Result<ExampleReport> {
    let t = spec.shock_time;
    let fx = DistributionFn::exponential(spec.lambda)?;
    let fy = DistributionFn::exponential(spec.mu)?;
    let fz = DistributionFn::dirac(t)?;
    let fu = lifetime_max(&fx, &fz);
    let fw = lifetime_min(&fy, &fz);
    let f = to_rmm(&extend_phi(&fx, &fz))?;
    let g = to_rmm(&extend_chi(&fy, &fz))?;
    let a = -(-spec.lambda * t).exp_m1();
    let b = (-spec.mu * t).exp();

    let mut checks = vec![gen_check("f", &f, a), gen_check("g", &g, b)];

    let xs: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
    let mut lu = Worst::new("lifetime_max");
    let mut lw = Worst::new("lifetime_min");
    for &x in &xs {
        let step = if x >= t { 1.0 } else { 0.0 };
        lu.see(&[x], fx.value(x) * step, fu.value(x));
        lw.see(&[x], if x >= t { 1.0 } else { fy.value(x) }, fw.value(x));
    }
    checks.push(lu.done());
    checks.push(lw.done());

    let axes = unit_axes(2, spec.grid);
    let mut cf = Worst::new("rmm_closed_form");
    for &u in &axes[0] {
        for &w in &axes[1] {
            cf.see(&[u, w], rmm_closed_form(a, b, u, w), rmm2(&f, &g, u, w));
        }
    }
    checks.push(cf.done());

    let model_spec = model_spec(spec)?;
    let hash = model_spec.hash();
    let model = model_spec.build()?;
    let bf = build_bounds(&model)?;
    let (l1, l2) = (spec.lambda_box[0], spec.lambda_box[1]);
    let (m1, m2) = (spec.mu_box[0], spec.mu_box[1]);
    checks.push(gen_check("f_lower", bf.lower_gen.get(0), -(-l1 * t).exp_m1()));
    checks.push(gen_check("f_upper", bf.upper_gen.get(0), -(-l2 * t).exp_m1()));
    checks.push(gen_check("g_lower", bf.lower_gen.get(1), (-m2 * t).exp()));
    checks.push(gen_check("g_upper", bf.upper_gen.get(1), (-m1 * t).exp()));

    let meta = |bound| SurfaceMeta {
        model_hash: hash.clone(),
        family: Family::Rmm,
        bound,
    };
    let (fl, gl) = (bf.lower_gen.get(0).clone(), bf.lower_gen.get(1).clone());
    let (fh, gh) = (bf.upper_gen.get(0).clone(), bf.upper_gen.get(1).clone());
    let lower = GridSurface::evaluate(axes.clone(), meta(BoundLevel::Lower), |p| rmm2(&fl, &gl, p[0], p[1]))?;
    let upper = GridSurface::evaluate(axes.clone(), meta(BoundLevel::Upper), |p| rmm2(&fh, &gh, p[0], p[1]))?;
    let violations = lower.values.iter().zip(&upper.values).filter(|(l, h)| l < h).count();
    let strict_points = lower.values.iter().zip(&upper.values).filter(|(l, h)| l > h).count();
    let bound_ordering = OrderingCheck {
        points: lower.len(),
        violations,
        strict_points,
        pass: violations == 0 && strict_points > 0,
    };

    let mut files = Vec::new();
    let pass = checks.iter().all(|c| c.pass) && bound_ordering.pass;
    let mut report = ExampleReport {
        spec: spec.clone(),
        model_hash: hash.clone(),
        checks,
        bound_ordering,
        files: Vec::new(),
        pass,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let path = |name: &str| dir.join(name);

        let mut w = csv::Writer::from_path(path(FILES[1]))?;
        w.write_record(["x", "F_X", "F_Y", "F_Z", "F_U", "F_W"])?;
        for &x in &xs {
            let row = [x, fx.value(x), fy.value(x), fz.value(x), fu.value(x), fw.value(x)];
            w.write_record(row.iter().map(f64::to_string))?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(path(FILES[2]))?;
        w.write_record(["u", "f", "g", "f_lower", "f_upper", "g_lower", "g_upper"])?;
        for &u in &axes[0] {
            let row = [u, f.eval(u), g.eval(u), fl.eval(u), fh.eval(u), gl.eval(u), gh.eval(u)];
            w.write_record(row.iter().map(f64::to_string))?;
        }
        w.flush()?;

        let precise_spec = ModelSpec {
            endogenous: vec![
                PBoxSpec::Precise(exp(spec.lambda)?),
                PBoxSpec::Precise(exp(spec.mu)?),
            ],
            ..model_spec.clone()
        };
        let precise = GridSurface::evaluate(
            axes,
            SurfaceMeta {
                model_hash: precise_spec.hash(),
                family: Family::Rmm,
                bound: BoundLevel::Precise,
            },
            |p| rmm2(&f, &g, p[0], p[1]),
        )?;
        precise.write_to(&path(FILES[3]))?;
        lower.write_to(&path(FILES[4]))?;
        upper.write_to(&path(FILES[5]))?;

        files = FILES.iter().map(|n| path(n)).collect();
        report.files = files.clone();
        std::fs::write(path(FILES[0]), serde_json::to_string_pretty(&report)?)?;
    }
    report.files = files;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_example_passes() {
        let r = run(&ExampleSpec::default(), None).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(r.bound_ordering.pass, "{:?}", r.bound_ordering);
    }

    #[test]
    fn perturbed_rate_moves_threshold() {
        let spec = ExampleSpec {
            lambda: 1.7,
            grid: 21,
            ..ExampleSpec::default()
        };
        let r = run(&spec, None).unwrap();
        assert!(r.pass);
        let f = r.checks.iter().find(|c| c.name == "f").unwrap();
        assert!(f.max_error <= TOLERANCE);
    }

    #[test]
    fn swapped_box_is_rejected() {
        let spec = ExampleSpec {
            lambda_box: [2.0, 1.0],
            ..ExampleSpec::default()
        };
        assert!(matches!(run(&spec, None), Err(crate::Error::PBoxOrder { .. })));
    }

    #[test]
    fn writes_six_files() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExampleSpec {
            grid: 11,
            ..ExampleSpec::default()
        };
        let r = run(&spec, Some(dir.path())).unwrap();
        assert!(r.pass);
        assert_eq!(r.files.len(), 6);
        for f in &r.files {
            assert!(f.exists(), "{}", f.display());
        }
    }
}
