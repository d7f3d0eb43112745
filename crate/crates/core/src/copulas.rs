//! Precise shock-model copulas and the joint distributions they reproduce.
//!
//! Three families are covered. Marshall copulas describe all-max lifetimes,
//! maxmin copulas mix max-type components (indices `0..p`) with min-type
//! components (`p..n`), and reflected maxmin (RMM) copulas are the maxmin
//! family with the min-type coordinates reflected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distfn::DistributionFn;
use crate::error::{Error, Result};
use crate::genfn::{Generator, GeneratorKind};
use crate::imprecise::ShockModel;

/// Largest dimension accepted by the n-variate formulas.
pub const MAX_DIM: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Marshall,
    #[serde(alias = "max_min")]
    MaxMin,
    Rmm,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Marshall => "marshall",
            Family::MaxMin => "maxmin",
            Family::Rmm => "rmm",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "marshall" => Ok(Family::Marshall),
            "maxmin" | "max_min" => Ok(Family::MaxMin),
            "rmm" => Ok(Family::Rmm),
            other => Err(Error::Config(format!("unknown family {other:?}"))),
        }
    }
}

/// Generators for an n-variate copula together with the max/min split.
#[derive(Debug, Clone)]
pub struct GeneratorVector {
    generators: Vec<Generator>,
    partition: usize,
    family: Family,
}

impl GeneratorVector {
    pub fn new(family: Family, partition: usize, generators: Vec<Generator>) -> Result<Self> {
        let n = generators.len();
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidModel(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if partition > n {
            return Err(Error::InvalidModel(format!("partition {partition} exceeds dimension {n}")));
        }
        match family {
            Family::Marshall if partition != n => {
                return Err(Error::InvalidModel("marshall vectors are all max-type".into()))
            }
            Family::Rmm if partition == 0 || partition == n => {
                return Err(Error::InvalidModel(format!(
                    "rmm needs 1 <= p <= n-1, got p={partition}, n={n}"
                )))
            }
            _ => {}
        }
        for (i, g) in generators.iter().enumerate() {
            let ok = match family {
                Family::Marshall => g.kind().is_max_type(),
                Family::MaxMin => {
                    if i < partition {
                        g.kind().is_max_type()
                    } else {
                        g.kind() == GeneratorKind::Chi
                    }
                }
                Family::Rmm => {
                    if i < partition {
                        g.kind() == GeneratorKind::RmmF
                    } else {
                        g.kind() == GeneratorKind::RmmG
                    }
                }
            };
            if !ok {
                let expected = match (family, i < partition) {
                    (Family::Marshall, _) | (Family::MaxMin, true) => "phi or psi",
                    (Family::MaxMin, false) => "chi",
                    (Family::Rmm, true) => "rmm_f",
                    (Family::Rmm, false) => "rmm_g",
                };
                return Err(Error::KindMismatch {
                    expected,
                    found: g.kind(),
                });
            }
        }
        Ok(GeneratorVector {
            generators,
            partition,
            family,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn partition(&self) -> usize {
        self.partition
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn get(&self, i: usize) -> &Generator {
        &self.generators[i]
    }

    /// Copula of this family evaluated at `u`.
    ///
    /// # Panics
    /// If `u.len()` differs from the dimension.
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self.family {
            Family::Marshall => marshall_n(self, u),
            Family::MaxMin => maxmin_n(self, u),
            Family::Rmm => rmm_n(self, u),
        }
    }

    /// Vector with component `i` replaced.
    pub fn with_component(&self, i: usize, gen: Generator) -> Result<Self> {
        let mut gens = self.generators.clone();
        gens[i] = gen;
        Self::new(self.family, self.partition, gens)
    }
}

fn check_dim(gv: &GeneratorVector, u: &[f64]) {
    assert_eq!(
        gv.dim(),
        u.len(),
        "point of dimension {} passed to a {}-variate copula",
        u.len(),
        gv.dim()
    );
}

/// Bivariate Marshall copula.
pub fn marshall2(phi: &Generator, psi: &Generator, u: f64, v: f64) -> f64 {
    if u * v <= 0.0 {
        return 0.0;
    }
    u * v * (phi.eval(u) / u).min(psi.eval(v) / v)
}

/// n-variate Marshall copula: product of the generator values times the
/// smallest `u_i / phi_i(u_i)`.
pub fn marshall_n(gv: &GeneratorVector, u: &[f64]) -> f64 {
    check_dim(gv, u);
    let mut prod = 1.0;
    let mut ratio = f64::INFINITY;
    for (g, &ui) in gv.generators.iter().zip(u) {
        let p = g.eval(ui);
        if p <= 0.0 {
            return 0.0;
        }
        prod *= p;
        ratio = ratio.min(ui / p);
    }
    prod * ratio
}

/// Bivariate maxmin copula.
pub fn maxmin2(phi: &Generator, chi: &Generator, u: f64, v: f64) -> f64 {
    let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
    u * v + (u * (1.0 - v)).min((phi.eval(u) - u) * (v - chi.eval(v)))
}

/// Dagger value with the boundary conventions `0` at `u = 0` for max-type
/// and `1` at `u = 1` for min-type components.
fn dagger_or_limit(g: &Generator, u: f64) -> f64 {
    if g.kind().is_max_type() {
        if u <= 0.0 {
            0.0
        } else {
            u / g.eval(u)
        }
    } else {
        let c = g.eval(u);
        if u >= 1.0 || c >= 1.0 {
            1.0
        } else {
            (u - c) / (1.0 - c)
        }
    }
}

/// n-variate maxmin copula as a sum over subsets of the min-type indices.
///
/// Empty minima are 1 and empty maxima are 0.
pub fn maxmin_n(gv: &GeneratorVector, u: &[f64]) -> f64 {
    check_dim(gv, u);
    let p = gv.partition;
    let n = gv.dim();
    let head: f64 = gv.generators[..p].iter().zip(u).map(|(g, &x)| g.eval(x)).product();
    if head <= 0.0 {
        return 0.0;
    }
    let dag: Vec<f64> = gv
        .generators
        .iter()
        .zip(u)
        .map(|(g, &x)| dagger_or_limit(g, x))
        .collect();
    let chi: Vec<f64> = (p..n).map(|j| gv.generators[j].eval(u[j])).collect();
    let min_t = dag[..p].iter().copied().fold(1.0, f64::min);
    let s = n - p;
    let mut total = 0.0;
    for mask in 0u32..(1u32 << s) {
        let mut lo = min_t;
        let mut hi = 0.0f64;
        let mut weight = 1.0;
        for (k, &c) in chi.iter().enumerate() {
            let j = p + k;
            if mask & (1 << k) != 0 {
                lo = lo.min(dag[j]);
            } else {
                hi = hi.max(dag[j]);
                weight *= c;
            }
        }
        if lo > hi && weight > 0.0 {
            total += weight * (lo - hi);
        }
    }
    (head * total).clamp(0.0, 1.0)
}

/// Bivariate RMM copula `max(0, xy - f(x) g(y))`.
pub fn rmm2(f: &Generator, g: &Generator, x: f64, y: f64) -> f64 {
    (x * y - f.eval(x) * g.eval(y)).max(0.0)
}

/// n-variate RMM copula: minimum over max/min index pairs.
pub fn rmm_n(gv: &GeneratorVector, u: &[f64]) -> f64 {
    check_dim(gv, u);
    let fv: Vec<f64> = gv.generators.iter().zip(u).map(|(g, &x)| g.eval(x)).collect();
    rmm_from_values(gv.partition, u, &fv)
}

/// RMM formula from precomputed generator values.
pub(crate) fn rmm_from_values(p: usize, u: &[f64], fv: &[f64]) -> f64 {
    let n = u.len();
    let lifted: Vec<f64> = u.iter().zip(fv).map(|(a, b)| a + b).collect();
    let mut best = f64::INFINITY;
    for i in 0..p {
        for j in p..n {
            let mut term = u[i] * u[j] - fv[i] * fv[j];
            for (l, &lv) in lifted.iter().enumerate() {
                if l != i && l != j {
                    term *= lv;
                }
            }
            best = best.min(term);
        }
    }
    best.max(0.0)
}

fn check_point(model: &ShockModel, x: &[f64]) -> Result<()> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x.len(),
        });
    }
    Ok(())
}

fn expect_family(model: &ShockModel, family: Family) -> Result<()> {
    if model.family() != family {
        return Err(Error::FamilyMismatch {
            expected: family,
            found: model.family(),
        });
    }
    Ok(())
}

/// `P(U_1 <= x_1, ..., U_n <= x_n)` for the all-max lifetimes of a precise model.
pub fn joint_marshall_h(model: &ShockModel, x: &[f64]) -> Result<f64> {
    expect_family(model, Family::Marshall)?;
    check_point(model, x)?;
    let comps = model.precise_components()?;
    Ok(marshall_product(&comps, model.exogenous(), x))
}

pub(crate) fn marshall_product(comps: &[DistributionFn], fz: &DistributionFn, x: &[f64]) -> f64 {
    let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
    comps.iter().zip(x).map(|(f, &xi)| f.value(xi)).product::<f64>() * fz.value(min_x)
}

/// `P(U_1 <= x_1, ..., U_n <= x_n)` for a precise max/min model, summed over
/// subsets of the min-type indices.
pub fn joint_maxmin_h(model: &ShockModel, x: &[f64]) -> Result<f64> {
    expect_family(model, Family::MaxMin)?;
    check_point(model, x)?;
    let comps = model.precise_components()?;
    Ok(maxmin_sum(&comps, model.exogenous(), model.partition(), x))
}

pub(crate) fn maxmin_sum(comps: &[DistributionFn], fz: &DistributionFn, p: usize, x: &[f64]) -> f64 {
    let n = x.len();
    let fv: Vec<f64> = comps.iter().zip(x).map(|(f, &xi)| f.value(xi)).collect();
    let head: f64 = fv[..p].iter().product();
    if head <= 0.0 {
        return 0.0;
    }
    let min_t = x[..p].iter().copied().fold(f64::INFINITY, f64::min);
    let s = n - p;
    let mut total = 0.0;
    for mask in 0u32..(1u32 << s) {
        let mut lo = min_t;
        let mut hi = f64::NEG_INFINITY;
        let mut weight = 1.0;
        for k in 0..s {
            let j = p + k;
            if mask & (1 << k) != 0 {
                lo = lo.min(x[j]);
            } else {
                hi = hi.max(x[j]);
                weight *= fv[j];
            }
        }
        let gap = fz.value(lo) - fz.value(hi);
        if gap > 0.0 {
            total += weight * gap;
        }
    }
    head * total
}

/// `P(U_i <= x_i for max-type i, U_j > x_j for min-type j)`, evaluated as the
/// RMM copula at the lifetime distribution and survival values.
pub fn joint_rmm_hsigma(model: &ShockModel, x: &[f64]) -> Result<f64> {
    expect_family(model, Family::Rmm)?;
    check_point(model, x)?;
    let gv = model.generators()?;
    let lifetimes = model.lifetimes()?;
    let p = model.partition();
    let args: Vec<f64> = lifetimes
        .iter()
        .zip(x)
        .enumerate()
        .map(|(i, (g, &xi))| if i < p { g.value(xi) } else { 1.0 - g.value(xi) })
        .collect();
    Ok(rmm_n(&gv, &args))
}

/// Product form of [`joint_rmm_hsigma`] computed from the shock distributions.
pub fn joint_rmm_hsigma_direct(model: &ShockModel, x: &[f64]) -> Result<f64> {
    expect_family(model, Family::Rmm)?;
    check_point(model, x)?;
    let comps = model.precise_components()?;
    Ok(rmm_product(&comps, model.exogenous(), model.partition(), x))
}

pub(crate) fn rmm_product(comps: &[DistributionFn], fz: &DistributionFn, p: usize, x: &[f64]) -> f64 {
    let min_t = x[..p].iter().copied().fold(f64::INFINITY, f64::min);
    let max_s = x[p..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gap = fz.value(min_t) - fz.value(max_s);
    if gap <= 0.0 {
        return 0.0;
    }
    let mut prod = gap;
    for (i, (f, &xi)) in comps.iter().zip(x).enumerate() {
        prod *= if i < p { f.value(xi) } else { 1.0 - f.value(xi) };
    }
    prod
}
