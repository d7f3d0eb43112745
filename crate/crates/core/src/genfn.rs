//! Copula generating functions.
//!
//! A [`Generator`] is a map `[0,1] -> [0,1]` tagged with the role it plays:
//! `Phi`/`Psi` for max-type components, `Chi` for min-type components and
//! `RmmF`/`RmmG` for the reflected forms. Generators are built either from a
//! pair of shock distributions through the order-preserving extension, from a
//! named closed form, or from a user table.

use std::fmt;

use serde::Serialize;

use crate::distfn::{lifetime_max, lifetime_min, DistributionFn};
use crate::error::{Error, Result};

/// Absolute tolerance used by [`validate`].
pub const VALIDATION_TOL: f64 = 1e-12;

/// Grid size for tabulating closures.
pub const TABLE_POINTS: usize = 2049;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Phi,
    Psi,
    Chi,
    RmmF,
    RmmG,
}

impl GeneratorKind {
    pub fn is_max_type(self) -> bool {
        matches!(self, GeneratorKind::Phi | GeneratorKind::Psi)
    }

    pub fn is_rmm(self) -> bool {
        matches!(self, GeneratorKind::RmmF | GeneratorKind::RmmG)
    }

    /// Value required at `u = 1`.
    pub fn value_at_one(self) -> f64 {
        if self.is_rmm() {
            0.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeneratorKind::Phi => "phi",
            GeneratorKind::Psi => "psi",
            GeneratorKind::Chi => "chi",
            GeneratorKind::RmmF => "rmm_f",
            GeneratorKind::RmmG => "rmm_g",
        };
        f.write_str(s)
    }
}

/// Value in `[0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

/// Named parametric generator shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `u`
    Identity,
    /// `0`
    Zero,
    /// `max(u, c)` on `(0,1]`, zero at 0.
    Floor { c: f64 },
    /// `min(v, c)` on `[0,1)`, one at 1.
    Cap { c: f64 },
    /// `scale * max(c - u, 0)` on `(0,1]`, zero at 0.
    TruncatedLinear { c: f64, scale: f64 },
}

impl ClosedForm {
    fn eval(self, u: f64) -> f64 {
        match self {
            ClosedForm::Identity => u,
            ClosedForm::Zero => 0.0,
            ClosedForm::Floor { c } => {
                if u <= 0.0 {
                    0.0
                } else {
                    u.max(c)
                }
            }
            ClosedForm::Cap { c } => {
                if u >= 1.0 {
                    1.0
                } else {
                    u.min(c)
                }
            }
            ClosedForm::TruncatedLinear { c, scale } => {
                if u <= 0.0 {
                    0.0
                } else {
                    scale * (c - u).max(0.0)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Evaluator {
    Extended {
        component: DistributionFn,
        shock: DistributionFn,
        lifetime: DistributionFn,
    },
    Tabulated {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    ClosedForm(ClosedForm),
    /// `phi(x) - x` or `1 - x - chi(1 - x)` depending on the inner kind.
    Rewritten(Box<Generator>),
}

#[derive(Debug, Clone)]
pub struct Generator {
    kind: GeneratorKind,
    evaluator: Evaluator,
}

/// Max-type extension of `F_X` against the shock `F_Z`.
pub fn extend_phi(fx: &DistributionFn, fz: &DistributionFn) -> Generator {
    extend_max(GeneratorKind::Phi, fx, fz)
}

/// Same construction as [`extend_phi`], tagged for the second max-type margin.
pub fn extend_psi(fy: &DistributionFn, fz: &DistributionFn) -> Generator {
    extend_max(GeneratorKind::Psi, fy, fz)
}

fn extend_max(kind: GeneratorKind, comp: &DistributionFn, fz: &DistributionFn) -> Generator {
    Generator {
        kind,
        evaluator: Evaluator::Extended {
            component: comp.clone(),
            shock: fz.clone(),
            lifetime: lifetime_max(comp, fz),
        },
    }
}

/// Min-type extension of `F_Y` against the shock `F_Z`.
pub fn extend_chi(fy: &DistributionFn, fz: &DistributionFn) -> Generator {
    Generator {
        kind: GeneratorKind::Chi,
        evaluator: Evaluator::Extended {
            component: fy.clone(),
            shock: fz.clone(),
            lifetime: lifetime_min(fy, fz),
        },
    }
}

/// Reflected generator: `phi -> f(x) = phi(x) - x`, `chi -> g(x) = 1 - x - chi(1 - x)`.
pub fn to_rmm(gen: &Generator) -> Result<Generator> {
    let kind = match gen.kind {
        GeneratorKind::Phi => GeneratorKind::RmmF,
        GeneratorKind::Chi => GeneratorKind::RmmG,
        other => {
            return Err(Error::KindMismatch {
                expected: "phi or chi",
                found: other,
            })
        }
    };
    let evaluator = match gen.evaluator {
        Evaluator::ClosedForm(ClosedForm::Identity) => Evaluator::ClosedForm(ClosedForm::Zero),
        Evaluator::ClosedForm(ClosedForm::Floor { c }) => {
            Evaluator::ClosedForm(ClosedForm::TruncatedLinear { c, scale: 1.0 })
        }
        Evaluator::ClosedForm(ClosedForm::Cap { c }) => Evaluator::ClosedForm(ClosedForm::TruncatedLinear {
            c: 1.0 - c,
            scale: 1.0,
        }),
        _ => Evaluator::Rewritten(Box::new(gen.clone())),
    };
    Ok(Generator { kind, evaluator })
}

/// Tail-aware limits used by the extension: at `x0 = -inf` the point value is
/// the left tail limit, at `x0 = +inf` the right one.
fn extension_limits(f: &DistributionFn, x0: f64) -> (f64, f64, f64) {
    if x0.is_finite() {
        let l = f.limits(x0);
        (l.left, l.value, l.right)
    } else {
        let (neg, pos) = f.tail_limits();
        if x0 < 0.0 {
            (0.0, neg, neg)
        } else {
            (pos, pos, 1.0)
        }
    }
}

impl Generator {
    pub fn closed_form(kind: GeneratorKind, form: ClosedForm) -> Result<Self> {
        let ok = match form {
            ClosedForm::Identity => !kind.is_rmm(),
            ClosedForm::Zero => kind.is_rmm(),
            ClosedForm::Floor { c } => kind.is_max_type() && (0.0..=1.0).contains(&c),
            ClosedForm::Cap { c } => kind == GeneratorKind::Chi && (0.0..=1.0).contains(&c),
            ClosedForm::TruncatedLinear { c, scale } => {
                kind.is_rmm() && (0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&scale)
            }
        };
        if !ok {
            return Err(Error::InvalidGenerator(format!("{form:?} is not a valid {kind} generator")));
        }
        Ok(Generator {
            kind,
            evaluator: Evaluator::ClosedForm(form),
        })
    }

    /// `u -> scale * max(c - u, 0)` reflected generator.
    pub fn truncated_linear(kind: GeneratorKind, c: f64, scale: f64) -> Result<Self> {
        Self::closed_form(kind, ClosedForm::TruncatedLinear { c, scale })
    }

    pub fn identity(kind: GeneratorKind) -> Result<Self> {
        Self::closed_form(kind, ClosedForm::Identity)
    }

    /// Piecewise-linear generator through `(u, value)` pairs covering `[0, 1]`.
    ///
    /// Structural conditions are not enforced here; use [`validate`].
    pub fn tabulated(kind: GeneratorKind, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGenerator("table needs at least two points".into()));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
            return Err(Error::InvalidGenerator("table must start at 0 and end at 1".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGenerator("table abscissae must increase strictly".into()));
        }
        if ys.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return Err(Error::InvalidGenerator("table values must lie in [0,1]".into()));
        }
        Ok(Generator {
            kind,
            evaluator: Evaluator::Tabulated { xs, ys },
        })
    }

    /// Tabulates `f` on a uniform grid of [`TABLE_POINTS`] points.
    pub fn tabulate(kind: GeneratorKind, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = TABLE_POINTS - 1;
        let pts = (0..=n)
            .map(|k| {
                let u = k as f64 / n as f64;
                (u, f(u))
            })
            .collect();
        Self::tabulated(kind, pts)
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    /// Shock distributions for generators built by extension (looking through a rewrite).
    pub fn source(&self) -> Option<(&DistributionFn, &DistributionFn)> {
        match &self.evaluator {
            Evaluator::Extended {
                component, shock, ..
            } => Some((component, shock)),
            Evaluator::Rewritten(inner) => inner.source(),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.evaluator {
            Evaluator::Extended {
                component, shock, ..
            } => format!("{}[extended {component} | {shock}]", self.kind),
            Evaluator::Tabulated { xs, .. } => format!("{}[table {} points]", self.kind, xs.len()),
            Evaluator::ClosedForm(form) => format!("{}[{form:?}]", self.kind),
            Evaluator::Rewritten(inner) => format!("{}[rewrite of {}]", self.kind, inner.describe()),
        }
    }

    /// Evaluates at `u`, clamped to `[0, 1]`.
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.evaluator {
            Evaluator::ClosedForm(form) => form.eval(u),
            Evaluator::Tabulated { xs, ys } => interpolate(xs, ys, u),
            Evaluator::Rewritten(inner) => match inner.kind {
                GeneratorKind::Chi => (1.0 - u - inner.eval(1.0 - u)).max(0.0),
                _ => (inner.eval(u) - u).max(0.0),
            },
            Evaluator::Extended {
                component,
                shock,
                lifetime,
            } => {
                if u <= 0.0 {
                    return 0.0;
                }
                if u >= 1.0 {
                    return 1.0;
                }
                let x0 = lifetime.locate_first(u);
                self.extended_at(component, shock, x0, u)
            }
        }
    }

    fn extended_at(&self, comp: &DistributionFn, shock: &DistributionFn, x0: f64, u: f64) -> f64 {
        let (mut c_left, _, mut c_right) = extension_limits(comp, x0);
        if x0.is_finite() {
            // the true anchor lies within one float of x0; on a steep segment
            // that float step moves the component by more than rounding
            c_left = c_left.min(comp.value(x0.next_down()));
            c_right = c_right.max(comp.value(x0.next_up()));
        }
        let (_, z, _) = extension_limits(shock, x0);
        if self.kind == GeneratorKind::Chi {
            if z >= 1.0 {
                c_left
            } else {
                ((u - z) / (1.0 - z)).clamp(c_left, c_right)
            }
        } else if z <= 0.0 {
            c_right
        } else {
            (u / z).clamp(c_left, c_right)
        }
    }

    /// Difference between the extension evaluated with the smallest and the
    /// largest admissible anchor point. Zero for closed forms and tables.
    pub fn x0_choice_discrepancy(&self, u: f64) -> f64 {
        match &self.evaluator {
            Evaluator::Extended {
                component,
                shock,
                lifetime,
            } if u > 0.0 && u < 1.0 => {
                let first = self.extended_at(component, shock, lifetime.locate_first(u), u);
                let last = self.extended_at(component, shock, lifetime.locate_last(u), u);
                (first - last).abs()
            }
            Evaluator::Rewritten(inner) => match inner.kind {
                GeneratorKind::Chi => inner.x0_choice_discrepancy(1.0 - u),
                _ => inner.x0_choice_discrepancy(u),
            },
            _ => 0.0,
        }
    }

    /// `gen(u) / u` with the right limit (or `+inf`) at zero.
    pub fn star(&self, u: f64) -> ExtendedReal {
        if u > 0.0 {
            return ExtendedReal::Finite(self.eval(u) / u);
        }
        match &self.evaluator {
            Evaluator::ClosedForm(form) => match *form {
                ClosedForm::Identity => ExtendedReal::Finite(1.0),
                ClosedForm::Zero => ExtendedReal::Finite(0.0),
                ClosedForm::Floor { c } if c > 0.0 => ExtendedReal::Infinite,
                ClosedForm::Floor { .. } => ExtendedReal::Finite(1.0),
                ClosedForm::Cap { c } => ExtendedReal::Finite(if c > 0.0 { 1.0 } else { 0.0 }),
                ClosedForm::TruncatedLinear { c, scale } => {
                    if c > 0.0 && scale > 0.0 {
                        ExtendedReal::Infinite
                    } else {
                        ExtendedReal::Finite(0.0)
                    }
                }
            },
            _ => self.numeric_star_at_zero(),
        }
    }

    fn numeric_star_at_zero(&self) -> ExtendedReal {
        let ratios: Vec<f64> = [30, 40, 50]
            .iter()
            .map(|&k| {
                let u = (-(k as f64)).exp2();
                self.eval(u) / u
            })
            .collect();
        let (a, b) = (ratios[1], ratios[2]);
        if b > 1e9 {
            return ExtendedReal::Infinite;
        }
        if (a - b).abs() <= 1e-6 * (1.0 + b.abs()) {
            ExtendedReal::Finite(b)
        } else {
            ExtendedReal::Infinite
        }
    }

    /// Three-case auxiliary function of a min-type generator.
    pub fn substar_chi(&self, v: f64) -> Result<ExtendedReal> {
        if self.kind != GeneratorKind::Chi {
            return Err(Error::KindMismatch {
                expected: "chi",
                found: self.kind,
            });
        }
        if v >= 1.0 {
            return Ok(ExtendedReal::Finite(1.0));
        }
        let c = self.eval(v);
        if v != c {
            Ok(ExtendedReal::Finite((1.0 - c) / (v - c)))
        } else {
            Ok(ExtendedReal::Infinite)
        }
    }

    /// `u / phi(u)` for max-type generators, `(u - chi(u)) / (1 - chi(u))` for min-type.
    pub fn dagger(&self, u: f64) -> Result<f64> {
        match self.kind {
            GeneratorKind::Phi | GeneratorKind::Psi => {
                if !(u > 0.0 && u <= 1.0) {
                    return Err(Error::Domain {
                        what: "max-type dagger",
                        at: u,
                    });
                }
                Ok(u / self.eval(u))
            }
            GeneratorKind::Chi => {
                let c = self.eval(u);
                if !(0.0..1.0).contains(&u) || c >= 1.0 {
                    return Err(Error::Domain {
                        what: "min-type dagger",
                        at: u,
                    });
                }
                Ok((u - c) / (1.0 - c))
            }
            other => Err(Error::KindMismatch {
                expected: "phi, psi or chi",
                found: other,
            }),
        }
    }

    /// Sample abscissae where the generator may change shape: table knots and
    /// the lifetime's jump images for extended generators.
    pub fn feature_points(&self) -> Vec<f64> {
        match &self.evaluator {
            Evaluator::Tabulated { xs, .. } => xs.clone(),
            Evaluator::ClosedForm(form) => match *form {
                ClosedForm::Floor { c } | ClosedForm::Cap { c } | ClosedForm::TruncatedLinear { c, .. } => vec![c],
                _ => vec![],
            },
            Evaluator::Extended {
                component,
                shock,
                lifetime,
            } => {
                let mut pts = Vec::new();
                for &b in lifetime.breakpoints() {
                    let l = lifetime.limits(b);
                    pts.extend([l.left, l.value, l.right]);
                    let (cl, _, cr) = extension_limits(component, b);
                    let (_, z, _) = extension_limits(shock, b);
                    if self.kind == GeneratorKind::Chi {
                        pts.extend([cl + z - cl * z, cr + z - cr * z]);
                    } else {
                        pts.extend([cl * z, cr * z]);
                    }
                }
                let (neg, pos) = lifetime.tail_limits();
                pts.extend([neg, pos]);
                pts.retain(|p| (0.0..=1.0).contains(p));
                pts
            }
            Evaluator::Rewritten(inner) => {
                let pts = inner.feature_points();
                if inner.kind == GeneratorKind::Chi {
                    pts.into_iter().map(|p| 1.0 - p).collect()
                } else {
                    pts
                }
            }
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], u: f64) -> f64 {
    let k = xs.partition_point(|&x| x <= u);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[k - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (u - x0) / (x1 - x0);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Violation {
    pub condition: &'static str,
    pub witness: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub kind: GeneratorKind,
    pub points_checked: usize,
    pub violations: Vec<Violation>,
    pub diagnostics: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Checks the structural conditions for the generator's kind on a uniform
/// grid of `samples` points plus its feature points.
///
/// Ratio conditions are checked through their reciprocal or through the
/// ratio itself with a tolerance relative to its magnitude.
pub fn validate(gen: &Generator, samples: usize) -> ValidationReport {
    let samples = samples.max(2);
    let mut grid: Vec<f64> = (0..samples)
        .map(|k| k as f64 / (samples - 1) as f64)
        .chain(gen.feature_points())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let vals: Vec<f64> = grid.iter().map(|&u| gen.eval(u)).collect();
    let tol = VALIDATION_TOL;
    let mut violations = Vec::new();
    let mut push = |condition: &'static str, witness: Vec<f64>, detail: String| {
        // one witness per condition keeps reports readable
        if !violations.iter().any(|v: &Violation| v.condition == condition) {
            violations.push(Violation {
                condition,
                witness,
                detail,
            });
        }
    };

    let kind = gen.kind();
    let (endpoint, increasing, ratio) = match kind {
        GeneratorKind::Phi | GeneratorKind::Psi => ("P2", "P1", "P3"),
        GeneratorKind::Chi => ("F1", "F2", "F3"),
        GeneratorKind::RmmF | GeneratorKind::RmmG => ("G1", "G2", "G3"),
    };

    for (&u, &v) in grid.iter().zip(&vals) {
        if !(-tol..=1.0 + tol).contains(&v) {
            push(increasing, vec![u], format!("value {v} outside [0,1]"));
        }
    }
    let v0 = gen.eval(0.0);
    let v1 = gen.eval(1.0);
    if v0.abs() > tol {
        push(endpoint, vec![0.0], format!("value at 0 is {v0}"));
    }
    if (v1 - kind.value_at_one()).abs() > tol {
        push(endpoint, vec![1.0], format!("value at 1 is {v1}, expected {}", kind.value_at_one()));
    }

    for k in 1..grid.len() {
        let (ua, ub) = (grid[k - 1], grid[k]);
        let (va, vb) = (vals[k - 1], vals[k]);
        match kind {
            GeneratorKind::Phi | GeneratorKind::Psi | GeneratorKind::Chi => {
                if vb < va - tol {
                    push(increasing, vec![ua, ub], format!("decrease {va} -> {vb}"));
                }
            }
            GeneratorKind::RmmF | GeneratorKind::RmmG => {
                if vb + ub < va + ua - tol {
                    push(increasing, vec![ua, ub], format!("f(u)+u decreases {} -> {}", va + ua, vb + ub));
                }
            }
        }
    }

    match kind {
        GeneratorKind::Phi | GeneratorKind::Psi => {
            // phi* decreasing with values >= 1  <=>  u/phi(u) increasing in (0,1]
            let mut prev: Option<(f64, f64)> = None;
            for (&u, &v) in grid.iter().zip(&vals) {
                if u <= 0.0 {
                    continue;
                }
                if v < u - tol {
                    push(ratio, vec![u], format!("phi(u)={v} < u, ratio below 1"));
                }
                let d = if v > 0.0 { u / v } else { f64::INFINITY };
                if let Some((pu, pd)) = prev {
                    if d < pd - tol {
                        push(ratio, vec![pu, u], format!("u/phi(u) decreases {pd} -> {d}"));
                    }
                }
                prev = Some((u, d));
            }
        }
        GeneratorKind::Chi => {
            // chi_* decreasing with values >= 1  <=>  (v-chi)/(1-chi) increasing on [0,1)
            let mut prev: Option<(f64, f64)> = None;
            for (&u, &c) in grid.iter().zip(&vals) {
                if u >= 1.0 {
                    continue;
                }
                if c > u + tol {
                    push(ratio, vec![u], format!("chi(v)={c} > v, ratio below 1"));
                }
                if c >= 1.0 {
                    // within rounding of v = 1 the value may round up to 1
                    if 1.0 - u > tol {
                        push(ratio, vec![u], "chi reaches 1 before v=1".into());
                    }
                    continue;
                }
                // cross-multiplied so that 1 - chi near 0 does not amplify rounding
                if let Some((pu, pc)) = prev {
                    if (pu - pc) * (1.0 - c) > (u - c) * (1.0 - pc) + tol {
                        let (pd, d) = ((pu - pc) / (1.0 - pc), (u - c) / (1.0 - c));
                        push(ratio, vec![pu, u], format!("(v-chi)/(1-chi) decreases {pd} -> {d}"));
                    }
                }
                prev = Some((u, c));
            }
        }
        GeneratorKind::RmmF | GeneratorKind::RmmG => {
            // f(u)/u nonincreasing, cross-multiplied: a value error near u = 0
            // must not turn into an O(1) ratio error
            let mut prev: Option<(f64, f64)> = None;
            for (&u, &v) in grid.iter().zip(&vals) {
                if u <= 0.0 {
                    continue;
                }
                if let Some((pu, pv)) = prev {
                    if v * pu > pv * u + tol * u {
                        push(ratio, vec![pu, u], format!("f*(u) increases {} -> {}", pv / pu, v / u));
                    }
                }
                prev = Some((u, v));
            }
        }
    }

    let mut diagnostics = Vec::new();
    let mut worst = (0.0, 0.0);
    for &u in &grid {
        let d = gen.x0_choice_discrepancy(u);
        if d > worst.1 {
            worst = (u, d);
        }
    }
    if worst.1 > tol {
        diagnostics.push(format!(
            "anchor choice changes the value at u={} by {:e}",
            worst.0, worst.1
        ));
    }
    if let Some(jump) = continuity_gap(gen) {
        diagnostics.push(jump);
    }

    ValidationReport {
        kind,
        points_checked: grid.len(),
        violations,
        diagnostics,
    }
}

/// Largest one-sided jump at the feature points inside `(0, 1]`, reported
/// when it exceeds 1e-6.
fn continuity_gap(gen: &Generator) -> Option<String> {
    let eps = 1e-9;
    let mut worst = (0.0, 0.0);
    for u in gen.feature_points() {
        if u <= eps || u >= 1.0 - eps {
            continue;
        }
        let v = gen.eval(u);
        let gap = (gen.eval(u - eps) - v).abs().max((gen.eval(u + eps) - v).abs());
        if gap > worst.1 {
            worst = (u, gap);
        }
    }
    (worst.1 > 1e-6).then(|| format!("possible discontinuity near u={} (jump {:e})", worst.0, worst.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> DistributionFn {
        DistributionFn::exponential(rate).unwrap()
    }

    fn dirac(x: f64) -> DistributionFn {
        DistributionFn::dirac(x).unwrap()
    }

    const C: f64 = 0.632_120_558_828_557_7; // 1 - e^-1

    #[test]
    fn phi_from_exponential_and_fixed_shock() {
        let phi = extend_phi(&exp(1.0), &dirac(1.0));
        assert_eq!(phi.eval(0.0), 0.0);
        assert_eq!(phi.eval(1.0), 1.0);
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            let expect = u.max(C);
            assert!((phi.eval(u) - expect).abs() < 1e-12, "u={u}");
        }
        let f = to_rmm(&phi).unwrap();
        assert_eq!(f.kind(), GeneratorKind::RmmF);
        assert_eq!(f.eval(0.0), 0.0);
        for k in 1..=1000 {
            let u = k as f64 / 1000.0;
            assert!((f.eval(u) - (C - u).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_from_exponential_and_fixed_shock() {
        let chi = extend_chi(&exp(1.0), &dirac(1.0));
        for k in 1..1000 {
            let v = k as f64 / 1000.0;
            assert!((chi.eval(v) - v.min(C)).abs() < 1e-12, "v={v}");
        }
        let g = to_rmm(&chi).unwrap();
        let e1 = (-1.0f64).exp();
        assert_eq!(g.eval(0.0), 0.0);
        for k in 1..=1000 {
            let w = k as f64 / 1000.0;
            assert!((g.eval(w) - (e1 - w).max(0.0)).abs() < 1e-12, "w={w}");
        }
    }

    #[test]
    fn psi_matches_phi_construction() {
        let psi = extend_psi(&exp(1.0), &dirac(1.0));
        assert_eq!(psi.kind(), GeneratorKind::Psi);
        for k in 1..100 {
            let v = k as f64 / 100.0;
            assert!((psi.eval(v) - v.max(C)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_binding_shock_gives_identity() {
        let always = dirac(f64::NEG_INFINITY);
        let never = dirac(f64::INFINITY);
        let phi = extend_phi(&exp(2.0), &always);
        let chi = extend_chi(&exp(2.0), &never);
        let psi = extend_psi(&exp(0.5), &DistributionFn::uniform(-3.0, -3.0).unwrap());
        for k in 0..=200 {
            let u = k as f64 / 200.0;
            assert!((phi.eval(u) - u).abs() < 1e-12);
            assert!((chi.eval(u) - u).abs() < 1e-12);
            assert!((psi.eval(u) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_rewrites() {
        let id = Generator::identity(GeneratorKind::Phi).unwrap();
        let f = to_rmm(&id).unwrap();
        assert!((0..=10).all(|k| f.eval(k as f64 / 10.0) == 0.0));
        let floor = Generator::closed_form(GeneratorKind::Phi, ClosedForm::Floor { c: C }).unwrap();
        let f = to_rmm(&floor).unwrap();
        assert!((f.eval(0.2) - (C - 0.2)).abs() < 1e-15);
        let cap = Generator::closed_form(GeneratorKind::Chi, ClosedForm::Cap { c: C }).unwrap();
        let g = to_rmm(&cap).unwrap();
        assert!((g.eval(0.1) - (1.0 - C - 0.1)).abs() < 1e-15);
        assert!(to_rmm(&f).is_err());
        let psi = Generator::identity(GeneratorKind::Psi).unwrap();
        assert!(matches!(to_rmm(&psi), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn star_substar_dagger() {
        let f = Generator::truncated_linear(GeneratorKind::RmmF, C, 1.0).unwrap();
        assert_eq!(f.star(1.0), ExtendedReal::Finite(0.0));
        assert_eq!(f.star(0.0), ExtendedReal::Infinite);
        let chi = Generator::identity(GeneratorKind::Chi).unwrap();
        assert_eq!(chi.substar_chi(0.3).unwrap(), ExtendedReal::Infinite);
        assert_eq!(chi.substar_chi(1.0).unwrap(), ExtendedReal::Finite(1.0));
        let phi = Generator::closed_form(GeneratorKind::Phi, ClosedForm::Floor { c: 0.4 }).unwrap();
        assert!(phi.dagger(0.0).is_err());
        assert!((phi.dagger(0.2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(phi.dagger(0.7).unwrap(), 1.0);
        // increasing on a grid
        let d: Vec<f64> = (1..=100).map(|k| phi.dagger(k as f64 / 100.0).unwrap()).collect();
        assert!(d.windows(2).all(|w| w[1] >= w[0]));
        assert!(chi.dagger(1.0).is_err());
        assert!(f.dagger(0.5).is_err());
        assert!(phi.substar_chi(0.5).is_err());
    }

    #[test]
    fn numeric_star_at_zero() {
        let phi = extend_phi(&exp(1.0), &dirac(1.0));
        assert_eq!(phi.star(0.0), ExtendedReal::Infinite);
        let id = extend_phi(&exp(1.0), &dirac(f64::NEG_INFINITY));
        match id.star(0.0) {
            ExtendedReal::Finite(v) => assert!((v - 1.0).abs() < 1e-6),
            ExtendedReal::Infinite => panic!("identity star should be finite"),
        }
    }

    #[test]
    fn validate_accepts_and_rejects() {
        let f = Generator::truncated_linear(GeneratorKind::RmmF, C, 1.0).unwrap();
        assert!(validate(&f, 1001).passed());

        let sq = Generator::tabulate(GeneratorKind::RmmF, |u| u * u).unwrap();
        let rep = validate(&sq, 101);
        assert!(rep.violated("G1"));

        let bump = Generator::tabulate(GeneratorKind::RmmF, |u| u * (1.0 - u)).unwrap();
        let rep = validate(&bump, 101);
        assert!(!rep.violated("G1"));
        assert!(!rep.violated("G3"));

        let phi_sq = Generator::tabulate(GeneratorKind::Phi, |u| u * u).unwrap();
        let rep = validate(&phi_sq, 101);
        assert!(rep.violated("P3"));

        let bad_chi = Generator::tabulated(GeneratorKind::Chi, vec![(0.0, 0.0), (0.5, 0.6), (1.0, 1.0)]).unwrap();
        assert!(validate(&bad_chi, 101).violated("F3"));
    }

    #[test]
    fn extended_generators_validate() {
        let z = dirac(1.0);
        for gen in [
            extend_phi(&exp(1.0), &z),
            extend_chi(&exp(1.0), &z),
            to_rmm(&extend_phi(&exp(2.0), &z)).unwrap(),
            to_rmm(&extend_chi(&exp(0.5), &exp(1.0))).unwrap(),
            extend_phi(&DistributionFn::uniform(0.0, 2.0).unwrap(), &exp(1.0)),
        ] {
            let rep = validate(&gen, 257);
            assert!(rep.passed(), "{}: {:?}", gen.describe(), rep.violations);
        }
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        assert!(Generator::tabulated(GeneratorKind::Phi, vec![(0.0, 0.0)]).is_err());
        assert!(Generator::tabulated(GeneratorKind::Phi, vec![(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(Generator::tabulated(GeneratorKind::Phi, vec![(0.0, 0.0), (1.0, 1.5)]).is_err());
    }
}
