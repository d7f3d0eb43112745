//! Imprecise shock models: p-box inputs, bound generators, bound copulas and
//! bound joint distributions.
//!
//! Every endogenous shock carries a [`PBox`]; a precise shock is a box with
//! equal bounds. The exogenous shock is always precise. [`build_bounds`]
//! turns a model into the lower and upper lifetime distributions and the
//! lower and upper generator vectors. For reflected components the generator
//! order is reversed relative to the distribution order: the lower reflected
//! generator comes from the upper distribution bound.

use serde::Serialize;

use crate::copulas::{
    maxmin2, maxmin_sum, marshall_product, rmm_from_values, rmm_product, Family, GeneratorVector, MAX_DIM,
};
use crate::distfn::{lifetime_max, lifetime_min, DistributionFn};
use crate::error::{Error, Result};
use crate::genfn::{extend_chi, extend_phi, to_rmm, Generator};

const ORDER_TOL: f64 = 1e-15;

/// Pointwise-ordered pair of distribution functions.
#[derive(Debug, Clone, PartialEq)]
pub struct PBox {
    lower: DistributionFn,
    upper: DistributionFn,
}

impl PBox {
    /// Checks `lower <= upper` at both bounds' breakpoints, the midpoints
    /// between them, just beside each breakpoint and on a log-spaced grid.
    pub fn new(lower: DistributionFn, upper: DistributionFn) -> Result<Self> {
        let mut bps: Vec<f64> = lower
            .breakpoints()
            .iter()
            .chain(upper.breakpoints())
            .copied()
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let mut probes: Vec<f64> = bps.clone();
        probes.extend(bps.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        for &b in &bps {
            let h = 1e-9 * (1.0 + b.abs());
            probes.extend([b - h, b + h]);
        }
        for k in 0..=48 {
            let t = 10f64.powf(-3.0 + 6.0 * k as f64 / 48.0);
            probes.extend([t, -t]);
        }
        probes.push(0.0);
        for x in probes {
            let (lo, hi) = (lower.limits(x), upper.limits(x));
            for (a, b) in [(lo.left, hi.left), (lo.value, hi.value), (lo.right, hi.right)] {
                if a > b + ORDER_TOL {
                    return Err(Error::PBoxOrder {
                        at: x,
                        lower: a,
                        upper: b,
                    });
                }
            }
        }
        Ok(PBox { lower, upper })
    }

    pub fn precise(f: DistributionFn) -> Self {
        PBox {
            lower: f.clone(),
            upper: f,
        }
    }

    pub fn lower(&self) -> &DistributionFn {
        &self.lower
    }

    pub fn upper(&self) -> &DistributionFn {
        &self.upper
    }

    pub fn is_precise(&self) -> bool {
        self.lower == self.upper
    }

    /// `theta * lower + (1 - theta) * upper`.
    pub fn interpolate(&self, theta: f64) -> Result<DistributionFn> {
        if self.is_precise() {
            return Ok(self.lower.clone());
        }
        DistributionFn::mixture(theta, &self.lower, &self.upper)
    }

    /// `inner` clipped into the box.
    pub fn clip(&self, inner: &DistributionFn) -> DistributionFn {
        if self.is_precise() {
            return self.lower.clone();
        }
        DistributionFn::clipped(inner, &self.lower, &self.upper)
    }

    pub fn contains(&self, f: &DistributionFn, probes: &[f64]) -> bool {
        probes.iter().all(|&x| {
            let v = f.value(x);
            self.lower.value(x) <= v + ORDER_TOL && v <= self.upper.value(x) + ORDER_TOL
        })
    }
}

/// Bounds of a factorizing bivariate p-box at `(x, y)`.
pub fn factorized_pbox(px: &PBox, py: &PBox, x: f64, y: f64) -> (f64, f64) {
    (
        px.lower.value(x) * py.lower.value(y),
        px.upper.value(x) * py.upper.value(y),
    )
}

/// Shock model with `n` endogenous shocks and one precise exogenous shock.
///
/// Components `0..partition` are max-type, the rest min-type.
#[derive(Debug, Clone)]
pub struct ShockModel {
    family: Family,
    partition: usize,
    endogenous: Vec<PBox>,
    exogenous: DistributionFn,
}

impl ShockModel {
    pub fn new(family: Family, partition: usize, endogenous: Vec<PBox>, exogenous: DistributionFn) -> Result<Self> {
        let n = endogenous.len();
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidModel(format!("need 2 <= n <= {MAX_DIM}, got {n}")));
        }
        let ok = match family {
            Family::Marshall => partition == n,
            Family::MaxMin | Family::Rmm => (1..n).contains(&partition),
        };
        if !ok {
            return Err(Error::InvalidModel(format!(
                "partition p={partition} invalid for {family} with n={n}"
            )));
        }
        Ok(ShockModel {
            family,
            partition,
            endogenous,
            exogenous,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn partition(&self) -> usize {
        self.partition
    }

    pub fn dim(&self) -> usize {
        self.endogenous.len()
    }

    pub fn endogenous(&self) -> &[PBox] {
        &self.endogenous
    }

    pub fn exogenous(&self) -> &DistributionFn {
        &self.exogenous
    }

    pub fn is_precise(&self) -> bool {
        self.endogenous.iter().all(PBox::is_precise)
    }

    pub fn is_max_type(&self, i: usize) -> bool {
        i < self.partition
    }

    pub fn precise_components(&self) -> Result<Vec<DistributionFn>> {
        self.endogenous
            .iter()
            .enumerate()
            .map(|(i, b)| {
                if b.is_precise() {
                    Ok(b.lower.clone())
                } else {
                    Err(Error::ImpreciseModel(i))
                }
            })
            .collect()
    }

    /// Same structure with precise components.
    pub fn with_components(&self, comps: Vec<DistributionFn>) -> Result<Self> {
        if comps.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: comps.len(),
            });
        }
        Self::new(
            self.family,
            self.partition,
            comps.into_iter().map(PBox::precise).collect(),
            self.exogenous.clone(),
        )
    }

    /// Precise member with component `i` equal to `thetas[i] * lower + (1 - thetas[i]) * upper`.
    pub fn member(&self, thetas: &[f64]) -> Result<Self> {
        if thetas.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: thetas.len(),
            });
        }
        let comps = self
            .endogenous
            .iter()
            .zip(thetas)
            .map(|(b, &t)| b.interpolate(t))
            .collect::<Result<Vec<_>>>()?;
        self.with_components(comps)
    }

    /// Precise member with each component's `inner` clipped into its box.
    pub fn clipped_member(&self, inners: &[DistributionFn]) -> Result<Self> {
        if inners.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: inners.len(),
            });
        }
        let comps = self.endogenous.iter().zip(inners).map(|(b, f)| b.clip(f)).collect();
        self.with_components(comps)
    }

    /// Lifetime distributions of a precise model.
    pub fn lifetimes(&self) -> Result<Vec<DistributionFn>> {
        Ok(lifetimes_of(self.partition, &self.precise_components()?, &self.exogenous))
    }

    /// Canonical generators of a precise model.
    pub fn generators(&self) -> Result<GeneratorVector> {
        generators_of(self.family, self.partition, &self.precise_components()?, &self.exogenous)
    }
}

fn lifetimes_of(p: usize, comps: &[DistributionFn], fz: &DistributionFn) -> Vec<DistributionFn> {
    comps
        .iter()
        .enumerate()
        .map(|(i, f)| if i < p { lifetime_max(f, fz) } else { lifetime_min(f, fz) })
        .collect()
}

fn generator_for(family: Family, max_type: bool, f: &DistributionFn, fz: &DistributionFn) -> Result<Generator> {
    let base = if max_type { extend_phi(f, fz) } else { extend_chi(f, fz) };
    match family {
        Family::Rmm => to_rmm(&base),
        _ => Ok(base),
    }
}

fn generators_of(family: Family, p: usize, comps: &[DistributionFn], fz: &DistributionFn) -> Result<GeneratorVector> {
    let gens = comps
        .iter()
        .enumerate()
        .map(|(i, f)| generator_for(family, i < p, f, fz))
        .collect::<Result<Vec<_>>>()?;
    GeneratorVector::new(family, p, gens)
}

/// Lower and upper lifetime distributions and generator vectors of a model.
#[derive(Debug, Clone)]
pub struct BoundFamily {
    pub family: Family,
    pub partition: usize,
    pub lower_g: Vec<DistributionFn>,
    pub upper_g: Vec<DistributionFn>,
    pub lower_gen: GeneratorVector,
    pub upper_gen: GeneratorVector,
}

impl BoundFamily {
    pub fn dim(&self) -> usize {
        self.lower_g.len()
    }

    /// Lifetime arguments for the lower joint bound: lower distributions for
    /// max-type components; for reflected families, survival of the upper
    /// distribution for min-type components.
    pub fn lower_args(&self, x: &[f64]) -> Vec<f64> {
        self.args(x, true)
    }

    pub fn upper_args(&self, x: &[f64]) -> Vec<f64> {
        self.args(x, false)
    }

    fn args(&self, x: &[f64], lower: bool) -> Vec<f64> {
        let p = self.partition;
        x.iter()
            .enumerate()
            .map(|(i, &xi)| {
                if self.family == Family::Rmm && i >= p {
                    let g = if lower { &self.upper_g[i] } else { &self.lower_g[i] };
                    1.0 - g.value(xi)
                } else {
                    let g = if lower { &self.lower_g[i] } else { &self.upper_g[i] };
                    g.value(xi)
                }
            })
            .collect()
    }
}

/// Bound distributions and canonical bound generators.
pub fn build_bounds(model: &ShockModel) -> Result<BoundFamily> {
    let p = model.partition;
    let fz = &model.exogenous;
    let lowers: Vec<DistributionFn> = model.endogenous.iter().map(|b| b.lower.clone()).collect();
    let uppers: Vec<DistributionFn> = model.endogenous.iter().map(|b| b.upper.clone()).collect();
    let (lower_gen, upper_gen) = match model.family {
        Family::Marshall | Family::MaxMin => (
            generators_of(model.family, p, &lowers, fz)?,
            generators_of(model.family, p, &uppers, fz)?,
        ),
        Family::Rmm => {
            let pick = |i: usize, for_lower: bool| -> Result<Generator> {
                // reflected min-type generators reverse the order
                let use_lower = if i < p { for_lower } else { !for_lower };
                let f = if use_lower { &lowers[i] } else { &uppers[i] };
                generator_for(Family::Rmm, i < p, f, fz)
            };
            let n = model.dim();
            let lo = (0..n).map(|i| pick(i, true)).collect::<Result<Vec<_>>>()?;
            let hi = (0..n).map(|i| pick(i, false)).collect::<Result<Vec<_>>>()?;
            (GeneratorVector::new(Family::Rmm, p, lo)?, GeneratorVector::new(Family::Rmm, p, hi)?)
        }
    };
    Ok(BoundFamily {
        family: model.family,
        partition: p,
        lower_g: lifetimes_of(p, &lowers, fz),
        upper_g: lifetimes_of(p, &uppers, fz),
        lower_gen,
        upper_gen,
    })
}

fn expect(bf_family: Family, family: Family) -> Result<()> {
    if bf_family != family {
        return Err(Error::FamilyMismatch {
            expected: family,
            found: bf_family,
        });
    }
    Ok(())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Marshall copulas of the lower and upper generator vectors at `u`.
pub fn marshall_bound_copulas(bf: &BoundFamily, u: &[f64]) -> Result<(f64, f64)> {
    expect(bf.family, Family::Marshall)?;
    check_len(bf.dim(), u.len())?;
    Ok((bf.lower_gen.eval(u), bf.upper_gen.eval(u)))
}

/// Maxmin copulas of the lower and upper generator vectors at `u`.
pub fn maxmin_bound_copulas(bf: &BoundFamily, u: &[f64]) -> Result<(f64, f64)> {
    expect(bf.family, Family::MaxMin)?;
    check_len(bf.dim(), u.len())?;
    Ok((bf.lower_gen.eval(u), bf.upper_gen.eval(u)))
}

/// Bivariate copula-level bounds with mixed generators: lower max-type with
/// upper min-type, and upper max-type with lower min-type.
pub fn maxmin2_mixed_bounds(bf: &BoundFamily, u: f64, v: f64) -> Result<(f64, f64)> {
    expect(bf.family, Family::MaxMin)?;
    check_len(2, bf.dim())?;
    let lo = maxmin2(bf.lower_gen.get(0), bf.upper_gen.get(1), u, v);
    let hi = maxmin2(bf.upper_gen.get(0), bf.lower_gen.get(1), u, v);
    Ok((lo, hi))
}

fn bound_model(model: &ShockModel, family: Family, x: &[f64]) -> Result<BoundFamily> {
    if model.family != family {
        return Err(Error::FamilyMismatch {
            expected: family,
            found: model.family,
        });
    }
    check_len(model.dim(), x.len())?;
    build_bounds(model)
}

/// Joint bounds composed as bound copula of bound lifetimes.
pub fn marshall_h_bounds(model: &ShockModel, x: &[f64]) -> Result<(f64, f64)> {
    let bf = bound_model(model, Family::Marshall, x)?;
    Ok(composed_bounds(&bf, x))
}

pub fn maxmin_h_bounds(model: &ShockModel, x: &[f64]) -> Result<(f64, f64)> {
    let bf = bound_model(model, Family::MaxMin, x)?;
    Ok(composed_bounds(&bf, x))
}

/// Lower and upper `P(U_T <= x_T, U_S > x_S)`.
pub fn rmm_h_bounds(model: &ShockModel, x: &[f64]) -> Result<(f64, f64)> {
    let bf = bound_model(model, Family::Rmm, x)?;
    Ok(composed_bounds(&bf, x))
}

/// Composed joint bounds for an already built bound family.
pub fn composed_bounds(bf: &BoundFamily, x: &[f64]) -> (f64, f64) {
    (bf.lower_gen.eval(&bf.lower_args(x)), bf.upper_gen.eval(&bf.upper_args(x)))
}

/// Joint bounds from the shock distributions directly, without generators.
pub fn direct_h_bounds(model: &ShockModel, x: &[f64]) -> Result<(f64, f64)> {
    check_len(model.dim(), x.len())?;
    let p = model.partition;
    let fz = &model.exogenous;
    let lowers: Vec<DistributionFn> = model.endogenous.iter().map(|b| b.lower.clone()).collect();
    let uppers: Vec<DistributionFn> = model.endogenous.iter().map(|b| b.upper.clone()).collect();
    Ok(match model.family {
        Family::Marshall => (marshall_product(&lowers, fz, x), marshall_product(&uppers, fz, x)),
        Family::MaxMin => (maxmin_sum(&lowers, fz, p, x), maxmin_sum(&uppers, fz, p, x)),
        Family::Rmm => {
            // survival factors of min-type components take the opposite bound
            let mixed = |lower: bool| -> Vec<DistributionFn> {
                (0..model.dim())
                    .map(|i| {
                        let take_lower = if i < p { lower } else { !lower };
                        if take_lower {
                            lowers[i].clone()
                        } else {
                            uppers[i].clone()
                        }
                    })
                    .collect()
            };
            (rmm_product(&mixed(true), fz, p, x), rmm_product(&mixed(false), fz, p, x))
        }
    })
}

fn vertex_values(bf: &BoundFamily, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let lo = bf.lower_gen.generators().iter().zip(u).map(|(g, &x)| g.eval(x)).collect();
    let hi = bf.upper_gen.generators().iter().zip(u).map(|(g, &x)| g.eval(x)).collect();
    (lo, hi)
}

/// Lower and upper RMM envelope at `u` over the reduced vertex sets: for the
/// infimum, one max-type and one min-type coordinate at the upper generator
/// and the rest at the lower; dually for the supremum.
pub fn rmm_envelope(bf: &BoundFamily, u: &[f64]) -> Result<(f64, f64)> {
    expect(bf.family, Family::Rmm)?;
    check_len(bf.dim(), u.len())?;
    let p = bf.partition;
    let n = u.len();
    let (lo, hi) = vertex_values(bf, u);
    let mut inf = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    let mut fv = vec![0.0; n];
    for i in 0..p {
        for j in p..n {
            for l in 0..n {
                fv[l] = if l == i || l == j { hi[l] } else { lo[l] };
            }
            inf = inf.min(rmm_from_values(p, u, &fv));
            for l in 0..n {
                fv[l] = if l == i || l == j { lo[l] } else { hi[l] };
            }
            sup = sup.max(rmm_from_values(p, u, &fv));
        }
    }
    Ok((inf, sup))
}

/// Minimum and maximum of the RMM copula over all `2^n` choices of lower or
/// upper generator per coordinate.
pub fn rmm_vertex_scan(bf: &BoundFamily, u: &[f64]) -> Result<(f64, f64)> {
    expect(bf.family, Family::Rmm)?;
    check_len(bf.dim(), u.len())?;
    let (lo, hi) = vertex_values(bf, u);
    let n = u.len();
    let mut fv = vec![0.0; n];
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        for l in 0..n {
            fv[l] = if mask & (1 << l) != 0 { hi[l] } else { lo[l] };
        }
        let c = rmm_from_values(bf.partition, u, &fv);
        min = min.min(c);
        max = max.max(c);
    }
    Ok((min, max))
}

/// Whether sampled interior maxmin copulas stay inside the range spanned by
/// the vertex generator vectors at one point.
#[derive(Debug, Clone, Serialize)]
pub struct VertexDiagnostic {
    pub point: Vec<f64>,
    pub vertex_min: f64,
    pub vertex_max: f64,
    pub sampled_min: f64,
    pub sampled_max: f64,
    pub attained_at_vertices: bool,
}

/// Scans the `2^n` vertex generator vectors of a maxmin model and compares
/// with copulas of interior members.
pub fn maxmin_vertex_diagnostic(
    bf: &BoundFamily,
    members: &[GeneratorVector],
    u: &[f64],
) -> Result<VertexDiagnostic> {
    expect(bf.family, Family::MaxMin)?;
    check_len(bf.dim(), u.len())?;
    let n = u.len();
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let gens = (0..n)
            .map(|l| {
                if mask & (1 << l) != 0 {
                    bf.upper_gen.get(l).clone()
                } else {
                    bf.lower_gen.get(l).clone()
                }
            })
            .collect();
        let c = GeneratorVector::new(Family::MaxMin, bf.partition, gens)?.eval(u);
        vmin = vmin.min(c);
        vmax = vmax.max(c);
    }
    let mut smin = f64::INFINITY;
    let mut smax = f64::NEG_INFINITY;
    for m in members {
        let c = m.eval(u);
        smin = smin.min(c);
        smax = smax.max(c);
    }
    let tol = 1e-12;
    Ok(VertexDiagnostic {
        point: u.to_vec(),
        vertex_min: vmin,
        vertex_max: vmax,
        sampled_min: smin,
        sampled_max: smax,
        attained_at_vertices: members.is_empty() || (smin >= vmin - tol && smax <= vmax + tol),
    })
}

pub mod theorems {
    //! Theorem items as checkable predicates over sampled points.
    //!
    //! Each function evaluates one family's properties for an imprecise model,
    //! a set of precise interior members, sample points in the lifetime domain
    //! (`points`, one coordinate per component) and scalar abscissae
    //! (`xs`) for the per-component identities.

    use serde::Serialize;

    use super::*;
    use crate::copulas::{joint_marshall_h, joint_maxmin_h, joint_rmm_hsigma_direct, rmm2};

    /// Smallest `1 - u` at which a min-type dagger value is compared.
    pub const DAGGER_MARGIN: f64 = 1e-5;

    /// Smallest argument at which `gen(u) / u` is compared. Generator values
    /// carry roughly 1e-14 absolute error from the lifetime inversion, which
    /// the division amplifies past the tolerance for smaller `u`.
    pub const STAR_MARGIN: f64 = 1e-3;

    #[derive(Debug, Clone, Serialize)]
    pub struct Witness {
        pub point: Vec<f64>,
        pub expected: f64,
        pub actual: f64,
    }

    #[derive(Debug, Clone, Serialize)]
    pub struct ItemCheck {
        pub item: &'static str,
        pub holds: bool,
        pub comparisons: usize,
        pub failures: usize,
        pub worst: Option<Witness>,
    }

    struct Tally {
        item: &'static str,
        tol: f64,
        comparisons: usize,
        failures: usize,
        worst: Option<(f64, Witness)>,
    }

    impl Tally {
        fn new(item: &'static str, tol: f64) -> Self {
            Tally {
                item,
                tol,
                comparisons: 0,
                failures: 0,
                worst: None,
            }
        }

        fn record(&mut self, excess: f64, point: &[f64], expected: f64, actual: f64) {
            self.comparisons += 1;
            if excess > self.tol || excess.is_nan() {
                self.failures += 1;
                let bigger = self.worst.as_ref().is_none_or(|(e, _)| excess > *e || excess.is_nan());
                if bigger {
                    self.worst = Some((
                        excess,
                        Witness {
                            point: point.to_vec(),
                            expected,
                            actual,
                        },
                    ));
                }
            }
        }

        /// `lhs <= rhs`
        fn le(&mut self, lhs: f64, rhs: f64, point: &[f64]) {
            self.record(lhs - rhs, point, rhs, lhs);
        }

        fn eq(&mut self, actual: f64, expected: f64, point: &[f64]) {
            self.record((actual - expected).abs(), point, expected, actual);
        }

        fn done(self) -> ItemCheck {
            ItemCheck {
                item: self.item,
                holds: self.failures == 0,
                comparisons: self.comparisons,
                failures: self.failures,
                worst: self.worst.map(|(_, w)| w),
            }
        }
    }

    fn unit_grid(k: usize) -> Vec<f64> {
        (0..=k).map(|i| i as f64 / k as f64).collect()
    }

    fn generators_ordered(item: &'static str, bf: &BoundFamily, tol: f64) -> ItemCheck {
        let mut t = Tally::new(item, tol);
        for (lo, hi) in bf.lower_gen.generators().iter().zip(bf.upper_gen.generators()) {
            for u in unit_grid(512) {
                t.le(lo.eval(u), hi.eval(u), &[u]);
            }
        }
        t.done()
    }

    fn copula_points(bf: &BoundFamily, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        // lifetime points mapped through the lower bounds, plus their upper images
        points
            .iter()
            .flat_map(|x| [bf.lower_args(x), bf.upper_args(x)])
            .collect()
    }

    fn copula_sandwich(
        item: &'static str,
        lower: &GeneratorVector,
        upper: &GeneratorVector,
        members: &[GeneratorVector],
        us: &[Vec<f64>],
        tol: f64,
    ) -> ItemCheck {
        let mut t = Tally::new(item, tol);
        for u in us {
            let (lo, hi) = (lower.eval(u), upper.eval(u));
            for m in members {
                let c = m.eval(u);
                t.le(lo, c, u);
                t.le(c, hi, u);
            }
        }
        t.done()
    }

    struct Member {
        comps: Vec<DistributionFn>,
        lifetimes: Vec<DistributionFn>,
        gens: GeneratorVector,
        model: ShockModel,
    }

    fn prepare(members: &[ShockModel]) -> Result<Vec<Member>> {
        members
            .iter()
            .map(|m| {
                Ok(Member {
                    comps: m.precise_components()?,
                    lifetimes: m.lifetimes()?,
                    gens: m.generators()?,
                    model: m.clone(),
                })
            })
            .collect()
    }

    fn member_args(m: &Member, family: Family, p: usize, x: &[f64]) -> Vec<f64> {
        m.lifetimes
            .iter()
            .zip(x)
            .enumerate()
            .map(|(i, (g, &xi))| {
                if family == Family::Rmm && i >= p {
                    1.0 - g.value(xi)
                } else {
                    g.value(xi)
                }
            })
            .collect()
    }

    /// Sandwich of composed joint values and agreement of composed bounds with
    /// the direct product formulas.
    #[allow(clippy::too_many_arguments)]
    fn joint_items(
        model: &ShockModel,
        bf: &BoundFamily,
        members: &[Member],
        points: &[Vec<f64>],
        tol: f64,
        sandwich_item: &'static str,
        bound_item: &'static str,
        composition_item: &'static str,
    ) -> Result<Vec<ItemCheck>> {
        let mut sandwich = Tally::new(sandwich_item, tol);
        let mut bounds = Tally::new(bound_item, tol);
        let mut comp = Tally::new(composition_item, tol);
        for x in points {
            let (lo, hi) = composed_bounds(bf, x);
            let (dlo, dhi) = direct_h_bounds(model, x)?;
            bounds.eq(lo, dlo, x);
            bounds.eq(hi, dhi, x);
            for m in members {
                let composed = m.gens.eval(&member_args(m, bf.family, bf.partition, x));
                let direct = match bf.family {
                    Family::Marshall => joint_marshall_h(&m.model, x)?,
                    Family::MaxMin => joint_maxmin_h(&m.model, x)?,
                    Family::Rmm => joint_rmm_hsigma_direct(&m.model, x)?,
                };
                comp.eq(composed, direct, x);
                sandwich.le(lo, composed, x);
                sandwich.le(composed, hi, x);
            }
        }
        Ok(vec![sandwich.done(), bounds.done(), comp.done()])
    }

    /// Lifetime ordering of bounds and members.
    fn lifetime_order(item: &'static str, bf: &BoundFamily, members: &[Member], xs: &[f64], tol: f64) -> ItemCheck {
        let mut t = Tally::new(item, tol);
        for &x in xs {
            for i in 0..bf.dim() {
                let (lo, hi) = (bf.lower_g[i].value(x), bf.upper_g[i].value(x));
                t.le(lo, hi, &[x]);
                for m in members {
                    let g = m.lifetimes[i].value(x);
                    t.le(lo, g, &[x]);
                    t.le(g, hi, &[x]);
                }
            }
        }
        t.done()
    }

    /// Marshall items: generator order, copula sandwich, defining relations,
    /// joint sandwich, joint bound formulas, star identity.
    pub fn marshall(
        model: &ShockModel,
        members: &[ShockModel],
        points: &[Vec<f64>],
        xs: &[f64],
        tol: f64,
    ) -> Result<Vec<ItemCheck>> {
        let bf = build_bounds(model)?;
        expect(bf.family, Family::Marshall)?;
        let mem = prepare(members)?;
        let gens: Vec<GeneratorVector> = mem.iter().map(|m| m.gens.clone()).collect();
        let mut out = vec![generators_ordered("marshall.generator_order", &bf, tol)];
        out.push(copula_sandwich(
            "marshall.copula_sandwich",
            &bf.lower_gen,
            &bf.upper_gen,
            &gens,
            &copula_points(&bf, points),
            tol,
        ));
        out.push(defining_max(&bf, &mem, model, xs, tol, "marshall.defining_relations"));
        out.extend(joint_items(
            model,
            &bf,
            &mem,
            points,
            tol,
            "marshall.joint_sandwich",
            "marshall.joint_bounds",
            "marshall.joint_composition",
        )?);
        // lower and upper star values at the lifetime images all equal 1/F_Z
        let mut star = Tally::new("marshall.star_identity", tol);
        let fz = model.exogenous();
        for &x in xs {
            let mut vals = Vec::new();
            for i in 0..bf.dim() {
                for (g, gen) in [(&bf.lower_g[i], bf.lower_gen.get(i)), (&bf.upper_g[i], bf.upper_gen.get(i))] {
                    let u = g.value(x);
                    if u >= STAR_MARGIN {
                        if let Some(s) = gen.star(u).finite() {
                            vals.push(s);
                        }
                    }
                }
            }
            let z = fz.value(x);
            for &v in &vals {
                star.eq(v * z, 1.0, &[x]);
                star.eq(v, vals[0], &[x]);
            }
        }
        out.push(star.done());
        Ok(out)
    }

    fn defining_max(
        bf: &BoundFamily,
        mem: &[Member],
        model: &ShockModel,
        xs: &[f64],
        tol: f64,
        item: &'static str,
    ) -> ItemCheck {
        let mut t = Tally::new(item, tol);
        for &x in xs {
            for i in 0..bf.dim() {
                let b = &model.endogenous()[i];
                let max_type = bf.family == Family::Marshall || i < bf.partition;
                let cases = [
                    (&bf.lower_g[i], bf.lower_gen.get(i), b.lower()),
                    (&bf.upper_g[i], bf.upper_gen.get(i), b.upper()),
                ];
                for (g, gen, f) in cases {
                    let u = g.value(x);
                    if (max_type && u > 0.0) || (!max_type && u < 1.0) {
                        t.eq(gen.eval(u), f.value(x), &[x]);
                    }
                }
                for m in mem {
                    let u = m.lifetimes[i].value(x);
                    if (max_type && u > 0.0) || (!max_type && u < 1.0) {
                        t.eq(m.gens.get(i).eval(u), m.comps[i].value(x), &[x]);
                    }
                }
            }
        }
        t.done()
    }

    /// Maxmin items: generator order, lifetime order, defining relations,
    /// dagger identity, joint composition, joint sandwich, joint bound
    /// formulas and, for two components, the mixed copula sandwich.
    pub fn maxmin(
        model: &ShockModel,
        members: &[ShockModel],
        points: &[Vec<f64>],
        xs: &[f64],
        tol: f64,
    ) -> Result<Vec<ItemCheck>> {
        let bf = build_bounds(model)?;
        expect(bf.family, Family::MaxMin)?;
        let mem = prepare(members)?;
        let mut out = vec![
            generators_ordered("maxmin.generator_order", &bf, tol),
            lifetime_order("maxmin.lifetime_order", &bf, &mem, xs, tol),
            defining_max(&bf, &mem, model, xs, tol, "maxmin.defining_relations"),
        ];
        let mut dag = Tally::new("maxmin.dagger_identity", tol);
        let fz = model.exogenous();
        for &x in xs {
            let z = fz.value(x);
            for i in 0..bf.dim() {
                let mut cases = vec![
                    (bf.lower_g[i].value(x), bf.lower_gen.get(i)),
                    (bf.upper_g[i].value(x), bf.upper_gen.get(i)),
                ];
                for m in &mem {
                    cases.push((m.lifetimes[i].value(x), m.gens.get(i)));
                }
                let max_type = i < bf.partition;
                for (u, gen) in cases {
                    // the min-type quotient loses all precision as u -> 1
                    if !max_type && 1.0 - u < DAGGER_MARGIN {
                        continue;
                    }
                    if let Ok(d) = gen.dagger(u) {
                        dag.eq(d, z, &[x]);
                    }
                }
            }
        }
        out.push(dag.done());
        out.extend(joint_items(
            model,
            &bf,
            &mem,
            points,
            tol,
            "maxmin.joint_sandwich",
            "maxmin.joint_bounds",
            "maxmin.joint_composition",
        )?);
        if bf.dim() == 2 {
            let mut mixed = Tally::new("maxmin.bivariate_mixed_sandwich", tol);
            for u in copula_points(&bf, points) {
                let (lo, hi) = maxmin2_mixed_bounds(&bf, u[0], u[1])?;
                for m in &mem {
                    let c = maxmin2(m.gens.get(0), m.gens.get(1), u[0], u[1]);
                    mixed.le(lo, c, &u);
                    mixed.le(c, hi, &u);
                }
            }
            out.push(mixed.done());
        }
        Ok(out)
    }

    /// RMM items: generator order, survival order, defining relations, star
    /// products, joint composition, joint sandwich, joint bound formulas and,
    /// for two components, the reversed copula order.
    pub fn rmm(
        model: &ShockModel,
        members: &[ShockModel],
        points: &[Vec<f64>],
        xs: &[f64],
        tol: f64,
    ) -> Result<Vec<ItemCheck>> {
        let bf = build_bounds(model)?;
        expect(bf.family, Family::Rmm)?;
        let mem = prepare(members)?;
        let p = bf.partition;
        let n = bf.dim();
        let mut out = vec![
            generators_ordered("rmm.generator_order", &bf, tol),
            lifetime_order("rmm.lifetime_order", &bf, &mem, xs, tol),
        ];

        let mut def = Tally::new("rmm.defining_relations", tol);
        let mut star = Tally::new("rmm.star_products", tol);
        for &x in xs {
            for i in 0..n {
                let b = &model.endogenous()[i];
                if i < p {
                    for (g, gen, f) in [
                        (&bf.lower_g[i], bf.lower_gen.get(i), b.lower()),
                        (&bf.upper_g[i], bf.upper_gen.get(i), b.upper()),
                    ] {
                        let u = g.value(x);
                        if u > 0.0 {
                            def.eq(gen.eval(u), f.value(x) - u, &[x]);
                        }
                    }
                } else {
                    // lower reflected generator pairs with the upper distribution
                    for (g, gen, f) in [
                        (&bf.upper_g[i], bf.lower_gen.get(i), b.upper()),
                        (&bf.lower_g[i], bf.upper_gen.get(i), b.lower()),
                    ] {
                        let s = 1.0 - g.value(x);
                        if s > 0.0 {
                            def.eq(gen.eval(s), (1.0 - f.value(x)) - s, &[x]);
                        }
                    }
                }
            }
            for i in 0..p {
                let heads = [
                    (bf.lower_g[i].value(x), bf.lower_gen.get(i)),
                    (bf.upper_g[i].value(x), bf.upper_gen.get(i)),
                ];
                for j in p..n {
                    let tails = [
                        (1.0 - bf.lower_g[j].value(x), bf.upper_gen.get(j)),
                        (1.0 - bf.upper_g[j].value(x), bf.lower_gen.get(j)),
                    ];
                    for &(u, fi) in &heads {
                        for &(w, fj) in &tails {
                            if u >= STAR_MARGIN && w >= STAR_MARGIN {
                                if let (Some(a), Some(b)) = (fi.star(u).finite(), fj.star(w).finite()) {
                                    star.eq(a * b, 1.0, &[x]);
                                }
                            }
                        }
                    }
                }
            }
        }
        out.push(def.done());
        out.push(star.done());
        out.extend(joint_items(
            model,
            &bf,
            &mem,
            points,
            tol,
            "rmm.joint_sandwich",
            "rmm.joint_bounds",
            "rmm.joint_composition",
        )?);
        if n == 2 {
            let mut rev = Tally::new("rmm.bivariate_reversed_copula_order", tol);
            let (fl, gl) = (bf.lower_gen.get(0), bf.lower_gen.get(1));
            let (fu, gu) = (bf.upper_gen.get(0), bf.upper_gen.get(1));
            for u in copula_points(&bf, points) {
                let hi = rmm2(fl, gl, u[0], u[1]);
                let lo = rmm2(fu, gu, u[0], u[1]);
                rev.le(lo, hi, &u);
                for m in &mem {
                    let c = rmm2(m.gens.get(0), m.gens.get(1), u[0], u[1]);
                    rev.le(lo, c, &u);
                    rev.le(c, hi, &u);
                }
            }
            out.push(rev.done());
        }
        Ok(out)
    }

    /// Dispatches on the model's family.
    pub fn check(
        model: &ShockModel,
        members: &[ShockModel],
        points: &[Vec<f64>],
        xs: &[f64],
        tol: f64,
    ) -> Result<Vec<ItemCheck>> {
        match model.family() {
            Family::Marshall => marshall(model, members, points, xs, tol),
            Family::MaxMin => maxmin(model, members, points, xs, tol),
            Family::Rmm => rmm(model, members, points, xs, tol),
        }
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::verify::{check_quasicopula, random};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FAMILIES: [Family; 3] = [Family::Marshall, Family::MaxMin, Family::Rmm];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bound_items_hold_on_random_boxes(seed in any::<u64>(), fi in 0usize..3, n in 2usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::pbox_model(&mut rng, FAMILIES[fi], n).unwrap();
            let members = random::interior_members(&mut rng, &m, 3).unwrap();
            let points: Vec<Vec<f64>> = (0..40).map(|_| random::mixed_point(&mut rng, n)).collect();
            let xs: Vec<f64> = (0..40).map(|_| random::mixed_point(&mut rng, 1)[0]).collect();
            for item in theorems::check(&m, &members, &points, &xs, 1e-10).unwrap() {
                prop_assert!(item.holds, "{item:?}");
            }
        }

        #[test]
        fn envelopes_are_quasicopulas(seed in any::<u64>(), n in 2usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::pbox_model(&mut rng, Family::Rmm, n).unwrap();
            let bf = build_bounds(&m).unwrap();
            let inf = |u: &[f64]| rmm_vertex_scan(&bf, u).unwrap().0;
            let sup = |u: &[f64]| rmm_vertex_scan(&bf, u).unwrap().1;
            let (ri, rs) = (check_quasicopula(inf, n, 9, 1e-12), check_quasicopula(sup, n, 9, 1e-12));
            prop_assert!(ri.pass, "{ri:?}");
            prop_assert!(rs.pass, "{rs:?}");
        }

        #[test]
        fn precise_boxes_collapse_the_bounds(seed in any::<u64>(), fi in 0usize..3, n in 2usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::pbox_model(&mut rng, FAMILIES[fi], n).unwrap();
            let member = m.member(&vec![0.5; n]).unwrap();
            let bf = build_bounds(&member).unwrap();
            let gv = member.generators().unwrap();
            for _ in 0..50 {
                let x = random::mixed_point(&mut rng, n);
                let (lo, hi) = direct_h_bounds(&member, &x).unwrap();
                prop_assert_eq!(lo, hi);
                let u = random::unit_point(&mut rng, n);
                prop_assert_eq!(bf.lower_gen.eval(&u), gv.eval(&u));
                prop_assert_eq!(bf.upper_gen.eval(&u), gv.eval(&u));
            }
        }
    }
}
