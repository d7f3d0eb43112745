//! Univariate distribution functions in the finitely additive sense.
//!
//! A [`DistributionFn`] is only required to be monotone increasing. Jumps are
//! kept explicit: every representation reports its left limit, point value and
//! right limit at any argument, so formulas that consume `F(x-)` and `F(x+)`
//! never have to estimate a limit numerically.
//!
//! Arguments are `f64` extended reals. `-inf` and `+inf` act as sentinels with
//! `value(-inf) = 0` and `value(+inf) = 1` for every representation; the
//! one-sided limits at the infinities report the true tail behaviour, which
//! may differ from 0 and 1 (e.g. a Dirac step placed at `+inf`).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};


const MASS_TOL: f64 = 1e-12;
const MAX_BRACKET_STEPS: usize = 2100;

/// Left limit, point value and right limit at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub left: f64,
    pub value: f64,
    pub right: f64,
}

impl Limits {
    fn constant(c: f64) -> Self {
        Limits {
            left: c,
            value: c,
            right: c,
        }
    }

    fn map2(self, other: Limits, f: impl Fn(f64, f64) -> f64) -> Limits {
        Limits {
            left: f(self.left, other.left),
            value: f(self.value, other.value),
            right: f(self.right, other.right),
        }
    }
}

/// A breakpoint of a piecewise-linear distribution function with a possible jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub x: f64,
    pub left: f64,
    pub point: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Exponential {
        rate: f64,
    },
    Dirac {
        location: f64,
    },
    Uniform {
        lower: f64,
        upper: f64,
    },
    Discrete {
        locations: Vec<f64>,
        masses: Vec<f64>,
        cumulative: Vec<f64>,
    },
    PiecewiseLinear {
        knots: Vec<Knot>,
    },
    Product(DistributionFn, DistributionFn),
    SurvivalComplementProduct(DistributionFn, DistributionFn),
    Mixture {
        weight: f64,
        first: DistributionFn,
        second: DistributionFn,
    },
    Clipped {
        inner: DistributionFn,
        lower: DistributionFn,
        upper: DistributionFn,
    },
}

/// Monotone map from the extended reals to `[0, 1]`.
///
/// Cheap to clone; composites share their operands.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFn {
    repr: Arc<Repr>,
    breakpoints: Arc<[f64]>,
}

impl DistributionFn {
    fn from_repr(repr: Repr) -> Self {
        let mut bps: Vec<f64> = match &repr {
            Repr::Exponential { .. } => vec![0.0],
            Repr::Dirac { location } => {
                if location.is_finite() {
                    vec![*location]
                } else {
                    vec![]
                }
            }
            Repr::Uniform { lower, upper } => vec![*lower, *upper],
            Repr::Discrete { locations, .. } => locations.clone(),
            Repr::PiecewiseLinear { knots } => knots.iter().map(|k| k.x).collect(),
            Repr::Product(a, b) | Repr::SurvivalComplementProduct(a, b) => {
                a.breakpoints.iter().chain(b.breakpoints.iter()).copied().collect()
            }
            Repr::Mixture { first, second, .. } => first
                .breakpoints
                .iter()
                .chain(second.breakpoints.iter())
                .copied()
                .collect(),
            Repr::Clipped {
                inner,
                lower,
                upper,
            } => inner
                .breakpoints
                .iter()
                .chain(lower.breakpoints.iter())
                .chain(upper.breakpoints.iter())
                .copied()
                .collect(),
        };
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        DistributionFn {
            repr: Arc::new(repr),
            breakpoints: bps.into(),
        }
    }

    /// `1 - exp(-rate * x)` for `x >= 0`, zero below.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "exponential rate must be positive and finite, got {rate}"
            )));
        }
        Ok(Self::from_repr(Repr::Exponential { rate }))
    }

    /// Unit step at `location`, with value 1 at the location itself.
    ///
    /// `location` may be `-inf` (the function is 1 on every real) or `+inf`
    /// (the function is 0 on every real).
    pub fn dirac(location: f64) -> Result<Self> {
        if location.is_nan() {
            return Err(Error::InvalidDistribution("dirac location is NaN".into()));
        }
        Ok(Self::from_repr(Repr::Dirac { location }))
    }

    /// Uniform on `[lower, upper]`; `lower == upper` degenerates to a step.
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::InvalidDistribution(format!(
                "uniform needs finite lower <= upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self::from_repr(Repr::Uniform { lower, upper }))
    }

    /// Finitely supported distribution. Points are sorted and duplicate
    /// locations merged; masses must be positive and sum to 1 within 1e-12.
    pub fn discrete(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
        if pts.is_empty() {
            return Err(Error::InvalidDistribution("discrete support is empty".into()));
        }
        for &(x, m) in &pts {
            if !x.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "discrete location must be finite, got {x}"
                )));
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "discrete mass must be positive, got {m} at {x}"
                )));
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locations: Vec<f64> = Vec::with_capacity(pts.len());
        let mut masses: Vec<f64> = Vec::with_capacity(pts.len());
        for (x, m) in pts {
            if locations.last() == Some(&x) {
                *masses.last_mut().unwrap() += m;
            } else {
                locations.push(x);
                masses.push(m);
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "discrete masses sum to {total}, expected 1"
            )));
        }
        let mut cumulative: Vec<f64> = masses
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(f64::min(*acc, 1.0))
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self::from_repr(Repr::Discrete {
            locations,
            masses,
            cumulative,
        }))
    }

    /// Piecewise-linear function through the given knots, constant outside them.
    ///
    /// Each knot may carry a jump: `left <= point <= right`, and the point value
    /// is free inside that range since right-continuity is not assumed.
    pub fn piecewise_linear(knots: Vec<Knot>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidDistribution("piecewise-linear needs at least one knot".into()));
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        for (i, k) in knots.iter().enumerate() {
            if !k.x.is_finite() {
                return Err(Error::InvalidDistribution(format!("knot {i} has non-finite x")));
            }
            if !(in_unit(k.left) && in_unit(k.point) && in_unit(k.right)) {
                return Err(Error::InvalidDistribution(format!("knot {i} has values outside [0,1]")));
            }
            if !(k.left <= k.point && k.point <= k.right) {
                return Err(Error::InvalidDistribution(format!(
                    "knot {i} violates left <= point <= right"
                )));
            }
            if i > 0 {
                let prev = &knots[i - 1];
                if prev.x >= k.x {
                    return Err(Error::InvalidDistribution("knot x values must increase strictly".into()));
                }
                if prev.right > k.left {
                    return Err(Error::InvalidDistribution(format!(
                        "knots {} and {i} are not monotone",
                        i - 1
                    )));
                }
            }
        }
        Ok(Self::from_repr(Repr::PiecewiseLinear { knots }))
    }

    /// Pointwise product `a * b`; the distribution of `max(A, B)` for independent `A`, `B`.
    pub fn product(a: &DistributionFn, b: &DistributionFn) -> Self {
        Self::from_repr(Repr::Product(a.clone(), b.clone()))
    }

    /// `1 - (1 - a)(1 - b)`; the distribution of `min(A, B)` for independent `A`, `B`.
    pub fn survival_complement_product(a: &DistributionFn, b: &DistributionFn) -> Self {
        Self::from_repr(Repr::SurvivalComplementProduct(a.clone(), b.clone()))
    }

    /// Convex combination `weight * a + (1 - weight) * b`.
    ///
    /// Two discrete operands produce a discrete result.
    pub fn mixture(weight: f64, a: &DistributionFn, b: &DistributionFn) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidDistribution(format!("mixture weight {weight} outside [0,1]")));
        }
        if let (Some((xa, ma)), Some((xb, mb))) = (a.discrete_support(), b.discrete_support()) {
            let pts = xa
                .iter()
                .zip(ma)
                .map(|(&x, &m)| (x, weight * m))
                .chain(xb.iter().zip(mb).map(|(&x, &m)| (x, (1.0 - weight) * m)))
                .filter(|&(_, m)| m > 0.0);
            return Self::discrete(pts);
        }
        Ok(Self::from_repr(Repr::Mixture {
            weight,
            first: a.clone(),
            second: b.clone(),
        }))
    }

    /// `max(lower, min(upper, inner))` pointwise; monotone whenever all three are.
    pub fn clipped(inner: &DistributionFn, lower: &DistributionFn, upper: &DistributionFn) -> Self {
        Self::from_repr(Repr::Clipped {
            inner: inner.clone(),
            lower: lower.clone(),
            upper: upper.clone(),
        })
    }

    /// Short name of the representation.
    pub fn kind_name(&self) -> &'static str {
        match &*self.repr {
            Repr::Exponential { .. } => "exponential",
            Repr::Dirac { .. } => "dirac",
            Repr::Uniform { .. } => "uniform",
            Repr::Discrete { .. } => "discrete",
            Repr::PiecewiseLinear { .. } => "pwl",
            Repr::Product(..) => "product",
            Repr::SurvivalComplementProduct(..) => "survival_complement_product",
            Repr::Mixture { .. } => "mixture",
            Repr::Clipped { .. } => "clipped",
        }
    }

    /// Sorted finite locations where the function may jump or change analytic form.
    /// Between consecutive breakpoints the function is continuous.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Locations and masses when the representation is [`DistributionFn::discrete`].
    pub fn discrete_support(&self) -> Option<(&[f64], &[f64])> {
        match &*self.repr {
            Repr::Discrete {
                locations, masses, ..
            } => Some((locations, masses)),
            _ => None,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            0.0
        } else if x == f64::INFINITY {
            1.0
        } else {
            self.limits_finite(x).value
        }
    }

    /// `sup { F(y) : y < x }`, exact for every representation.
    pub fn left_limit(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            0.0
        } else if x == f64::INFINITY {
            self.tail_limits().1
        } else {
            self.limits_finite(x).left
        }
    }

    /// `inf { F(y) : y > x }`, exact for every representation.
    pub fn right_limit(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            self.tail_limits().0
        } else if x == f64::INFINITY {
            1.0
        } else {
            self.limits_finite(x).right
        }
    }

    /// Left limit, value and right limit in one pass.
    pub fn limits(&self, x: f64) -> Limits {
        if x.is_finite() {
            self.limits_finite(x)
        } else {
            Limits {
                left: self.left_limit(x),
                value: self.value(x),
                right: self.right_limit(x),
            }
        }
    }

    /// Limits of the function as `x -> -inf` and `x -> +inf`.
    pub fn tail_limits(&self) -> (f64, f64) {
        match &*self.repr {
            Repr::Exponential { .. } | Repr::Uniform { .. } | Repr::Discrete { .. } => (0.0, 1.0),
            Repr::Dirac { location } => {
                let neg = if *location == f64::NEG_INFINITY { 1.0 } else { 0.0 };
                let pos = if *location == f64::INFINITY { 0.0 } else { 1.0 };
                (neg, pos)
            }
            Repr::PiecewiseLinear { knots } => (knots[0].left, knots[knots.len() - 1].right),
            Repr::Product(a, b) => {
                let (an, ap) = a.tail_limits();
                let (bn, bp) = b.tail_limits();
                (an * bn, ap * bp)
            }
            Repr::SurvivalComplementProduct(a, b) => {
                let (an, ap) = a.tail_limits();
                let (bn, bp) = b.tail_limits();
                (scp(an, bn), scp(ap, bp))
            }
            Repr::Mixture {
                weight,
                first,
                second,
            } => {
                let (an, ap) = first.tail_limits();
                let (bn, bp) = second.tail_limits();
                (mix(*weight, an, bn), mix(*weight, ap, bp))
            }
            Repr::Clipped {
                inner,
                lower,
                upper,
            } => {
                let (i_n, i_p) = inner.tail_limits();
                let (l_n, l_p) = lower.tail_limits();
                let (u_n, u_p) = upper.tail_limits();
                (clip(i_n, l_n, u_n), clip(i_p, l_p, u_p))
            }
        }
    }

    fn limits_finite(&self, x: f64) -> Limits {
        match &*self.repr {
            Repr::Exponential { rate } => Limits::constant(exp_cdf(*rate, x)),
            Repr::Dirac { location } => step_limits(*location, x),
            Repr::Uniform { lower, upper } => {
                if lower == upper {
                    step_limits(*lower, x)
                } else {
                    Limits::constant(((x - lower) / (upper - lower)).clamp(0.0, 1.0))
                }
            }
            Repr::Discrete {
                locations,
                cumulative,
                ..
            } => {
                let at_or_below = locations.partition_point(|&l| l <= x);
                let below = locations.partition_point(|&l| l < x);
                let cum = |k: usize| if k == 0 { 0.0 } else { cumulative[k - 1] };
                Limits {
                    left: cum(below),
                    value: cum(at_or_below),
                    right: cum(at_or_below),
                }
            }
            Repr::PiecewiseLinear { knots } => pwl_limits(knots, x),
            Repr::Product(a, b) => a.limits_finite(x).map2(b.limits_finite(x), |p, q| p * q),
            Repr::SurvivalComplementProduct(a, b) => a.limits_finite(x).map2(b.limits_finite(x), scp),
            Repr::Mixture {
                weight,
                first,
                second,
            } => {
                let w = *weight;
                first
                    .limits_finite(x)
                    .map2(second.limits_finite(x), |p, q| mix(w, p, q))
            }
            Repr::Clipped {
                inner,
                lower,
                upper,
            } => {
                let lo = lower.limits_finite(x);
                let hi = upper.limits_finite(x);
                let inn = inner.limits_finite(x);
                Limits {
                    left: clip(inn.left, lo.left, hi.left),
                    value: clip(inn.value, lo.value, hi.value),
                    right: clip(inn.right, lo.right, hi.right),
                }
            }
        }
    }

    /// Survival view `x -> 1 - F(x)`.
    pub fn survival(&self) -> SurvivalView {
        SurvivalView { base: self.clone() }
    }

    /// Generalized inverse `inf { x : F(x) >= p }` for inverse-transform sampling.
    ///
    /// Available for the parametric and discrete representations only.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let p = p.clamp(0.0, 1.0);
        match &*self.repr {
            Repr::Exponential { rate } => Ok(if p <= 0.0 { 0.0 } else { -(-p).ln_1p() / rate }),
            Repr::Dirac { location } => Ok(*location),
            Repr::Uniform { lower, upper } => Ok(lower + p * (upper - lower)),
            Repr::Discrete {
                locations,
                cumulative,
                ..
            } => {
                let k = cumulative.partition_point(|&c| c < p).min(locations.len() - 1);
                Ok(locations[k])
            }
            _ => Err(Error::UnsupportedSampling(self.kind_name())),
        }
    }

    /// The smallest extended real `x0` with `F(x0-) <= u <= F(x0+)`.
    ///
    /// Breakpoints are searched exactly; inside a continuous segment a closed
    /// form is used when the representation admits one, otherwise bisection
    /// until the bracket holds two adjacent floats.
    pub fn locate_first(&self, u: f64) -> f64 {
        let bps = &*self.breakpoints;
        let k = bps.partition_point(|&b| self.right_limit(b) < u);
        let (neg, pos) = self.tail_limits();
        if k == 0 && neg >= u {
            return f64::NEG_INFINITY;
        }
        let lo = if k == 0 { f64::NEG_INFINITY } else { bps[k - 1] };
        let hi = if k == bps.len() {
            if pos < u {
                return f64::INFINITY;
            }
            f64::INFINITY
        } else {
            let b = bps[k];
            if self.left_limit(b) < u {
                return b;
            }
            b
        };
        if let Some(x) = self.solve_on(lo, hi, u) {
            return x.clamp(lo, hi);
        }
        self.bisect(lo, hi, |v| v >= u, true)
    }

    /// The largest extended real `x0` with `F(x0-) <= u <= F(x0+)`.
    pub fn locate_last(&self, u: f64) -> f64 {
        let bps = &*self.breakpoints;
        let k = bps.partition_point(|&b| self.left_limit(b) <= u);
        let (neg, pos) = self.tail_limits();
        let lo = if k == 0 {
            if neg > u {
                return f64::NEG_INFINITY;
            }
            f64::NEG_INFINITY
        } else {
            let b = bps[k - 1];
            if self.right_limit(b) > u {
                return b;
            }
            b
        };
        if k == bps.len() && pos <= u {
            return f64::INFINITY;
        }
        let hi = if k == bps.len() { f64::INFINITY } else { bps[k] };
        if let Some(x) = self.solve_on(lo, hi, u) {
            if self.constant_on(lo, hi).is_none() {
                return x.clamp(lo, hi);
            }
        }
        self.bisect(lo, hi, |v| v > u, false)
    }

    /// Bisection on a continuous segment for the boundary of `{x : pred(F(x))}`,
    /// which is an up-set. Returns the first point satisfying `pred` when
    /// `want_upper` is set, otherwise the last point failing it.
    fn bisect(&self, lo: f64, hi: f64, pred: impl Fn(f64) -> bool, want_upper: bool) -> f64 {
        let mut a = lo;
        let mut b = hi;
        if a == f64::NEG_INFINITY {
            let mut step = 1.0;
            a = if b.is_finite() { b - step } else { -step };
            let mut steps = 0;
            while pred(self.value(a)) {
                step *= 2.0;
                a -= step;
                steps += 1;
                if steps > MAX_BRACKET_STEPS || !a.is_finite() {
                    return f64::NEG_INFINITY;
                }
            }
        }
        if b == f64::INFINITY {
            let mut step = 1.0;
            b = a + step;
            let mut steps = 0;
            while !pred(self.value(b)) {
                step *= 2.0;
                b += step;
                steps += 1;
                if steps > MAX_BRACKET_STEPS || !b.is_finite() {
                    return f64::INFINITY;
                }
            }
        }
        loop {
            let mid = a + (b - a) / 2.0;
            if mid <= a || mid >= b {
                break;
            }
            if pred(self.value(mid)) {
                b = mid;
            } else {
                a = mid;
            }
        }
        if want_upper {
            b
        } else {
            a
        }
    }

    /// Constant value on the open gap `(lo, hi)` between breakpoints, if any.
    fn constant_on(&self, lo: f64, hi: f64) -> Option<f64> {
        let mid = interior_point(lo, hi);
        match &*self.repr {
            Repr::Exponential { .. } => (hi <= 0.0).then_some(0.0),
            Repr::Dirac { .. } | Repr::Discrete { .. } => Some(self.value(mid)),
            Repr::Uniform { lower, upper } => {
                if lower == upper || hi <= *lower || lo >= *upper {
                    Some(self.value(mid))
                } else {
                    None
                }
            }
            Repr::PiecewiseLinear { knots } => {
                let k = knots.partition_point(|kn| kn.x < mid);
                if k == 0 {
                    Some(knots[0].left)
                } else if k == knots.len() {
                    Some(knots[k - 1].right)
                } else {
                    let r = knots[k - 1].right;
                    (r == knots[k].left).then_some(r)
                }
            }
            Repr::Product(a, b) => match (a.constant_on(lo, hi), b.constant_on(lo, hi)) {
                (Some(p), Some(q)) => Some(p * q),
                (Some(z), None) | (None, Some(z)) if z == 0.0 => Some(0.0),
                _ => None,
            },
            Repr::SurvivalComplementProduct(a, b) => {
                match (a.constant_on(lo, hi), b.constant_on(lo, hi)) {
                    (Some(p), Some(q)) => Some(scp(p, q)),
                    (Some(o), None) | (None, Some(o)) if o == 1.0 => Some(1.0),
                    _ => None,
                }
            }
            Repr::Mixture {
                weight,
                first,
                second,
            } => match (first.constant_on(lo, hi), second.constant_on(lo, hi)) {
                (Some(p), Some(q)) => Some(mix(*weight, p, q)),
                _ => None,
            },
            Repr::Clipped {
                inner,
                lower,
                upper,
            } => match (
                inner.constant_on(lo, hi),
                lower.constant_on(lo, hi),
                upper.constant_on(lo, hi),
            ) {
                (Some(i), Some(l), Some(h)) => Some(clip(i, l, h)),
                (_, Some(l), Some(h)) if l >= h => Some(l),
                _ => None,
            },
        }
    }

    /// Closed-form `inf { x in (lo, hi) : F(x) >= u }` on a continuous gap, when available.
    fn solve_on(&self, lo: f64, hi: f64, u: f64) -> Option<f64> {
        let mid = interior_point(lo, hi);
        match &*self.repr {
            Repr::Exponential { rate } => (lo >= 0.0).then(|| -(-u).ln_1p() / rate),
            Repr::Uniform { lower, upper } => {
                (lower < upper && lo >= *lower && hi <= *upper).then(|| lower + u * (upper - lower))
            }
            Repr::PiecewiseLinear { knots } => {
                let k = knots.partition_point(|kn| kn.x < mid);
                if k == 0 || k == knots.len() {
                    return None;
                }
                let (a, b) = (&knots[k - 1], &knots[k]);
                (b.left > a.right).then(|| a.x + (u - a.right) / (b.left - a.right) * (b.x - a.x))
            }
            Repr::Dirac { .. } | Repr::Discrete { .. } | Repr::Clipped { .. } => None,
            Repr::Product(a, b) => match (a.constant_on(lo, hi), b.constant_on(lo, hi)) {
                (Some(c), None) if c > 0.0 => b.solve_on(lo, hi, u / c),
                (None, Some(c)) if c > 0.0 => a.solve_on(lo, hi, u / c),
                _ => None,
            },
            Repr::SurvivalComplementProduct(a, b) => {
                match (a.constant_on(lo, hi), b.constant_on(lo, hi)) {
                    (Some(c), None) if c < 1.0 => b.solve_on(lo, hi, 1.0 - (1.0 - u) / (1.0 - c)),
                    (None, Some(c)) if c < 1.0 => a.solve_on(lo, hi, 1.0 - (1.0 - u) / (1.0 - c)),
                    _ => None,
                }
            }
            Repr::Mixture {
                weight,
                first,
                second,
            } => {
                let w = *weight;
                match (first.constant_on(lo, hi), second.constant_on(lo, hi)) {
                    (Some(c), None) if w < 1.0 => second.solve_on(lo, hi, (u - w * c) / (1.0 - w)),
                    (None, Some(c)) if w > 0.0 => first.solve_on(lo, hi, (u - (1.0 - w) * c) / w),
                    _ => None,
                }
            }
        }
    }
}

impl fmt::Display for DistributionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.repr {
            Repr::Exponential { rate } => write!(f, "exponential({rate})"),
            Repr::Dirac { location } => write!(f, "dirac({location})"),
            Repr::Uniform { lower, upper } => write!(f, "uniform({lower}, {upper})"),
            Repr::Discrete {
                locations, masses, ..
            } => {
                write!(f, "discrete[")?;
                for (i, (x, m)) in locations.iter().zip(masses).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({x}, {m})")?;
                }
                write!(f, "]")
            }
            Repr::PiecewiseLinear { knots } => write!(f, "pwl({} knots)", knots.len()),
            Repr::Product(a, b) => write!(f, "({a})*({b})"),
            Repr::SurvivalComplementProduct(a, b) => write!(f, "1-(1-{a})(1-{b})"),
            Repr::Mixture {
                weight,
                first,
                second,
            } => write!(f, "{weight}*{first} + {}*{second}", 1.0 - weight),
            Repr::Clipped {
                inner,
                lower,
                upper,
            } => write!(f, "clip({inner}; {lower}, {upper})"),
        }
    }
}

/// Survival function `1 - F` of a distribution function; monotone decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalView {
    base: DistributionFn,
}

impl SurvivalView {
    pub fn value(&self, x: f64) -> f64 {
        1.0 - self.base.value(x)
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        1.0 - self.base.left_limit(x)
    }

    pub fn right_limit(&self, x: f64) -> f64 {
        1.0 - self.base.right_limit(x)
    }

    pub fn base(&self) -> &DistributionFn {
        &self.base
    }

    /// Applying the survival view again gives back the distribution function.
    pub fn survival(&self) -> DistributionFn {
        self.base.clone()
    }
}

/// Distribution of `U = max(X, Z)` for independent `X`, `Z`: `F_U = F_X F_Z`.
pub fn lifetime_max(fx: &DistributionFn, fz: &DistributionFn) -> DistributionFn {
    DistributionFn::product(fx, fz)
}

/// Distribution of `W = min(Y, Z)` for independent `Y`, `Z`: survival is `(1-F_Y)(1-F_Z)`.
pub fn lifetime_min(fy: &DistributionFn, fz: &DistributionFn) -> DistributionFn {
    DistributionFn::survival_complement_product(fy, fz)
}

fn exp_cdf(rate: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-rate * x).exp_m1()
    }
}

fn step_limits(location: f64, x: f64) -> Limits {
    Limits {
        left: if x > location { 1.0 } else { 0.0 },
        value: if x >= location { 1.0 } else { 0.0 },
        right: if x >= location { 1.0 } else { 0.0 },
    }
}

fn pwl_limits(knots: &[Knot], x: f64) -> Limits {
    let k = knots.partition_point(|kn| kn.x < x);
    if k < knots.len() && knots[k].x == x {
        let kn = &knots[k];
        return Limits {
            left: kn.left,
            value: kn.point,
            right: kn.right,
        };
    }
    if k == 0 {
        return Limits::constant(knots[0].left);
    }
    if k == knots.len() {
        return Limits::constant(knots[k - 1].right);
    }
    let (a, b) = (&knots[k - 1], &knots[k]);
    let t = (x - a.x) / (b.x - a.x);
    Limits::constant(a.right + t * (b.left - a.right))
}

fn scp(a: f64, b: f64) -> f64 {
    1.0 - (1.0 - a) * (1.0 - b)
}

fn mix(w: f64, a: f64, b: f64) -> f64 {
    w * a + (1.0 - w) * b
}

fn clip(inner: f64, lower: f64, upper: f64) -> f64 {
    lower.max(upper.min(inner))
}

fn interior_point(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => lo + (hi - lo) / 2.0,
        (false, true) => hi - 1.0,
        (true, false) => lo + 1.0,
        (false, false) => 0.0,
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::verify::random;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn any_dist(rng: &mut ChaCha8Rng, depth: u32) -> DistributionFn {
        let pick = if depth == 0 { rng.gen_range(0..5) } else { rng.gen_range(0..9) };
        pick_dist(rng, depth, pick)
    }

    fn pick_dist(rng: &mut ChaCha8Rng, depth: u32, pick: u32) -> DistributionFn {
        match pick {
            0 => DistributionFn::exponential(rng.gen_range(0.2..3.0)).unwrap(),
            1 => DistributionFn::dirac(rng.gen_range(-1.0..4.0)).unwrap(),
            2 => {
                let a = rng.gen_range(-1.0..2.0);
                DistributionFn::uniform(a, a + rng.gen_range(0.1..3.0)).unwrap()
            }
            3 => random::discrete(rng, 6),
            4 => random::monotone_pwl(rng).unwrap(),
            5 => DistributionFn::product(&any_dist(rng, depth - 1), &any_dist(rng, depth - 1)),
            6 => DistributionFn::survival_complement_product(&any_dist(rng, depth - 1), &any_dist(rng, depth - 1)),
            7 => DistributionFn::mixture(rng.gen(), &any_dist(rng, depth - 1), &any_dist(rng, depth - 1)).unwrap(),
            _ => {
                let (a, b) = (any_dist(rng, depth - 1), any_dist(rng, depth - 1));
                let lo = DistributionFn::product(&a, &b);
                let hi = DistributionFn::survival_complement_product(&a, &b);
                DistributionFn::clipped(&any_dist(rng, depth - 1), &lo, &hi)
            }
        }
    }

    fn probes(rng: &mut ChaCha8Rng, d: &DistributionFn) -> Vec<f64> {
        let mut xs: Vec<f64> = (0..40).map(|_| rng.gen_range(-2.0..7.0)).collect();
        xs.extend(d.breakpoints().iter().filter(|b| b.is_finite()));
        xs.sort_by(f64::total_cmp);
        xs
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn limits_are_ordered_and_monotone(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = any_dist(&mut rng, 2);
            let xs = probes(&mut rng, &d);
            let mut prev = 0.0f64;
            for &x in &xs {
                let l = d.limits(x);
                prop_assert!(0.0 <= l.left && l.left <= l.value + 1e-15 && l.value <= 1.0);
                prop_assert!((l.value - l.right).abs() <= 1e-15, "not right-continuous at {x}: {l:?}");
                prop_assert!(l.left >= prev - 1e-15, "decrease before {x}");
                prev = l.right;
            }
            let (lo, hi) = d.tail_limits();
            prop_assert!(lo <= hi);
        }

        #[test]
        fn survival_view_is_an_involution(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = any_dist(&mut rng, 1);
            let s = d.survival();
            let back = s.survival();
            for x in probes(&mut rng, &d) {
                prop_assert!((s.value(x) - (1.0 - d.value(x))).abs() <= 1e-15);
                prop_assert!((s.left_limit(x) - (1.0 - d.left_limit(x))).abs() <= 1e-15);
                prop_assert!((back.value(x) - d.value(x)).abs() <= 1e-15);
            }
        }

        #[test]
        fn lifetimes_match_atom_enumeration(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::discrete(&mut rng, 5);
            let z = random::discrete(&mut rng, 5);
            let (ax, am) = a.discrete_support().unwrap();
            let (zx, zm) = z.discrete_support().unwrap();
            let fu = lifetime_max(&a, &z);
            let fw = lifetime_min(&a, &z);
            for k in -1..=17 {
                let x = k as f64 * 0.25;
                let (mut pmax, mut pmin) = (0.0, 0.0);
                for (xa, ma) in ax.iter().zip(am) {
                    for (xz, mz) in zx.iter().zip(zm) {
                        if xa.max(*xz) <= x {
                            pmax += ma * mz;
                        }
                        if xa.min(*xz) <= x {
                            pmin += ma * mz;
                        }
                    }
                }
                prop_assert!((fu.value(x) - pmax).abs() <= 1e-12);
                prop_assert!((fw.value(x) - pmin).abs() <= 1e-12);
            }
        }

        #[test]
        fn quantile_inverts_at_continuity_points(seed in any::<u64>(), p in 0.001f64..0.999) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // piecewise-linear laws have no sampler
            let pick = rng.gen_range(0..4);
            let d = pick_dist(&mut rng, 0, pick);
            let q = d.quantile(p).unwrap();
            prop_assert!(d.value(q) >= p - 1e-12);
            prop_assert!(d.left_limit(q) <= p + 1e-12);
        }
    }
}
