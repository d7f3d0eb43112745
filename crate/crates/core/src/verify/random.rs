//! Random instances for property suites.
//!
//! Discrete supports are drawn from a half-integer lattice so that ties
//! between shocks, and evaluation points sitting exactly on atoms, occur
//! often.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::copulas::{Family, GeneratorVector};
use crate::distfn::{DistributionFn, Knot};
use crate::error::Result;
use crate::genfn::{Generator, GeneratorKind};
use crate::imprecise::{PBox, ShockModel};

const LATTICE_STEP: f64 = 0.5;
const LATTICE_SIZE: usize = 9;

fn lattice() -> Vec<f64> {
    (0..LATTICE_SIZE).map(|k| k as f64 * LATTICE_STEP).collect()
}

fn masses<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|m| m / total).collect()
}

/// Discrete law with 1 to `max_points` atoms on the lattice `{0, 0.5, ..., 4}`.
pub fn discrete<R: Rng>(rng: &mut R, max_points: usize) -> DistributionFn {
    let k = rng.gen_range(1..=max_points.min(LATTICE_SIZE));
    let locs: Vec<f64> = lattice().choose_multiple(rng, k).copied().collect();
    let ms = masses(rng, k);
    DistributionFn::discrete(locs.into_iter().zip(ms)).expect("lattice support is valid")
}

/// A partition index valid for the family.
pub fn partition<R: Rng>(rng: &mut R, family: Family, n: usize) -> usize {
    match family {
        Family::Marshall => n,
        _ => rng.gen_range(1..n),
    }
}

/// Precise all-discrete model.
pub fn discrete_model<R: Rng>(rng: &mut R, family: Family, n: usize, max_points: usize) -> Result<ShockModel> {
    let p = partition(rng, family, n);
    let comps = (0..n).map(|_| PBox::precise(discrete(rng, max_points))).collect();
    ShockModel::new(family, p, comps, discrete(rng, max_points))
}

/// Evaluation point with coordinates on the lattice `{-0.25, 0, 0.25, ..., 4.25}`.
pub fn lattice_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1..=17) as f64 * 0.25).collect()
}

/// Point in the lifetime domain: half the coordinates continuous on
/// `[-0.5, 5]`, half on the lattice.
pub fn mixed_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                rng.gen_range(-0.5..5.0)
            } else {
                rng.gen_range(-1..=17) as f64 * 0.25
            }
        })
        .collect()
}

pub fn unit_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

/// Truncated-linear RMM generators `s * max(c - u, 0)` with `c` in `(0,1)`
/// and `s` in `(0,1]`.
pub fn truncated_rmm<R: Rng>(rng: &mut R, n: usize, p: usize) -> Result<GeneratorVector> {
    let gens = (0..n)
        .map(|i| {
            let kind = if i < p { GeneratorKind::RmmF } else { GeneratorKind::RmmG };
            let c = rng.gen_range(0.01..0.99);
            let s = 1.0 - rng.gen::<f64>();
            Generator::truncated_linear(kind, c, s)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneratorVector::new(Family::Rmm, p, gens)
}

/// Valid generator vector: truncated-linear for RMM, canonical extensions of
/// a random discrete model otherwise.
pub fn generator_vector<R: Rng>(rng: &mut R, family: Family, n: usize) -> Result<GeneratorVector> {
    match family {
        Family::Rmm => {
            let p = partition(rng, family, n);
            truncated_rmm(rng, n, p)
        }
        _ => discrete_model(rng, family, n, 5)?.generators(),
    }
}

/// Random p-box: exponential rate interval, shifted uniform pair or shifted
/// discrete pair.
pub fn pbox<R: Rng>(rng: &mut R) -> Result<PBox> {
    match rng.gen_range(0..3) {
        0 => {
            let a = rng.gen_range(0.3..2.0);
            let b = a * rng.gen_range(1.05..2.5);
            PBox::new(DistributionFn::exponential(a)?, DistributionFn::exponential(b)?)
        }
        1 => {
            let lo = rng.gen_range(-0.5..1.5);
            let w = rng.gen_range(0.5..3.0);
            let shift = rng.gen_range(0.1..1.0);
            PBox::new(
                DistributionFn::uniform(lo + shift, lo + shift + w)?,
                DistributionFn::uniform(lo, lo + w)?,
            )
        }
        _ => {
            let upper = discrete(rng, 4);
            let (xs, ms) = upper.discrete_support().expect("discrete");
            let shift = LATTICE_STEP * rng.gen_range(1..=2) as f64;
            let lower = DistributionFn::discrete(xs.iter().map(|x| x + shift).zip(ms.iter().copied()))?;
            PBox::new(lower, upper)
        }
    }
}

/// Precise exogenous law of one of the supported shapes.
pub fn exogenous<R: Rng>(rng: &mut R) -> Result<DistributionFn> {
    match rng.gen_range(0..4) {
        0 => DistributionFn::exponential(rng.gen_range(0.3..2.0)),
        1 => DistributionFn::dirac(rng.gen_range(0.2..2.5)),
        2 => {
            let a = rng.gen_range(-0.5..1.5);
            DistributionFn::uniform(a, a + rng.gen_range(0.5..3.0))
        }
        _ => Ok(discrete(rng, 4)),
    }
}

pub fn pbox_model<R: Rng>(rng: &mut R, family: Family, n: usize) -> Result<ShockModel> {
    let p = partition(rng, family, n);
    let boxes = (0..n).map(|_| pbox(rng)).collect::<Result<Vec<_>>>()?;
    ShockModel::new(family, p, boxes, exogenous(rng)?)
}

/// Random increasing piecewise-linear distribution on `[-1, 6]`.
pub fn monotone_pwl<R: Rng>(rng: &mut R) -> Result<DistributionFn> {
    let k = rng.gen_range(3..8);
    let mut xs: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..6.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut ys: Vec<f64> = (0..xs.len()).map(|_| rng.gen::<f64>()).collect();
    ys.sort_by(f64::total_cmp);
    ys[0] = 0.0;
    *ys.last_mut().unwrap() = 1.0;
    let knots = xs
        .into_iter()
        .zip(ys)
        .map(|(x, y)| Knot {
            x,
            left: y,
            point: y,
            right: y,
        })
        .collect();
    DistributionFn::piecewise_linear(knots)
}

/// Precise members of an imprecise model: convex combinations of the bounds
/// with weights in `{0.1, ..., 0.9}` and random monotone shapes clipped into
/// each box, alternating.
pub fn interior_members<R: Rng>(rng: &mut R, model: &ShockModel, count: usize) -> Result<Vec<ShockModel>> {
    let n = model.dim();
    (0..count)
        .map(|k| {
            if k % 2 == 0 {
                let thetas: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=9) as f64 / 10.0).collect();
                model.member(&thetas)
            } else {
                let inners = (0..n).map(|_| monotone_pwl(rng)).collect::<Result<Vec<_>>>()?;
                model.clipped_member(&inners)
            }
        })
        .collect()
}
