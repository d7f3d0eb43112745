//! Independent oracles and property checkers.
//!
//! Nothing here goes through generating functions: the discrete oracle
//! enumerates the joint support of the shocks, the Monte Carlo estimator
//! simulates them, and the rectangle checks only evaluate the function under
//! test at grid corners.

pub mod random;
pub mod suites;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::copulas::Family;
use crate::distfn::DistributionFn;
use crate::error::{Error, Result};
use crate::imprecise::ShockModel;

/// Inclusion-exclusion mass of `c` over the box `[low_i, high_i]`.
#[derive(Debug, Clone, Serialize)]
pub struct RectangleReport {
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
    pub volume: f64,
    pub pass: bool,
}

/// Signed sum over the `2^n` corners of the box, each corner weighted by
/// `(-1)^(number of low coordinates)`.
pub fn rectangle_volume(n: usize, c: impl Fn(&[f64]) -> f64, bounds: &[(f64, f64)]) -> Result<f64> {
    if bounds.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bounds.len(),
        });
    }
    let mut corner = vec![0.0; n];
    let mut vol = 0.0;
    for mask in 0u32..(1 << n) {
        let mut lows = 0;
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if mask & (1 << i) != 0 {
                corner[i] = hi;
            } else {
                corner[i] = lo;
                lows += 1;
            }
        }
        let v = c(&corner);
        vol += if lows % 2 == 0 { v } else { -v };
    }
    Ok(vol)
}

pub fn rectangle_report(n: usize, c: impl Fn(&[f64]) -> f64, bounds: &[(f64, f64)], tol: f64) -> Result<RectangleReport> {
    let volume = rectangle_volume(n, c, bounds)?;
    Ok(RectangleReport {
        bounds: bounds.to_vec(),
        volume,
        pass: volume >= -tol,
    })
}

/// Worst-case figures from a grid scan; `pass` applies the tolerance to the
/// checks relevant for the requested class.
#[derive(Debug, Clone, Serialize)]
pub struct CopulaReport {
    pub dim: usize,
    pub grid_size: usize,
    pub margin_error: f64,
    pub grounded_error: f64,
    pub min_cell_volume: f64,
    pub min_cell: Option<RectangleReport>,
    pub monotone_violation: f64,
    pub lipschitz_excess: f64,
    pub pass: bool,
}

struct Grid {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl Grid {
    fn scan(n: usize, k: usize, c: &(impl Fn(&[f64]) -> f64 + Sync)) -> Self {
        let total = k.pow(n as u32);
        let values = (0..total)
            .into_par_iter()
            .map(|idx| c(&Self::point_of(n, k, idx)))
            .collect();
        Grid { n, k, values }
    }

    fn t(k: usize, i: usize) -> f64 {
        i as f64 / (k - 1) as f64
    }

    /// Last coordinate varies fastest.
    fn index_of(&self, ix: &[usize]) -> usize {
        ix.iter().fold(0, |acc, &i| acc * self.k + i)
    }

    fn multi(n: usize, k: usize, mut idx: usize) -> Vec<usize> {
        let mut ix = vec![0; n];
        for d in (0..n).rev() {
            ix[d] = idx % k;
            idx /= k;
        }
        ix
    }

    fn point_of(n: usize, k: usize, idx: usize) -> Vec<f64> {
        Self::multi(n, k, idx).into_iter().map(|i| Self::t(k, i)).collect()
    }

    fn margins(&self) -> (f64, f64) {
        let mut margin: f64 = 0.0;
        let mut grounded: f64 = 0.0;
        for (idx, &v) in self.values.iter().enumerate() {
            let ix = Self::multi(self.n, self.k, idx);
            if ix.contains(&0) {
                grounded = grounded.max(v.abs());
            }
            let not_one: Vec<usize> = (0..self.n).filter(|&d| ix[d] != self.k - 1).collect();
            match not_one.as_slice() {
                [] => margin = margin.max((v - 1.0).abs()),
                [d] => margin = margin.max((v - Self::t(self.k, ix[*d])).abs()),
                _ => {}
            }
        }
        (margin, grounded)
    }

    fn min_cell(&self) -> (f64, Vec<usize>) {
        let cells = (self.k - 1).pow(self.n as u32);
        let mut best = (f64::INFINITY, vec![0; self.n]);
        let mut ix = vec![0; self.n];
        for cell in 0..cells {
            let base = Self::multi(self.n, self.k - 1, cell);
            let mut vol = 0.0;
            for mask in 0u32..(1 << self.n) {
                let mut lows = 0;
                for d in 0..self.n {
                    if mask & (1 << d) != 0 {
                        ix[d] = base[d] + 1;
                    } else {
                        ix[d] = base[d];
                        lows += 1;
                    }
                }
                let v = self.values[self.index_of(&ix)];
                vol += if lows % 2 == 0 { v } else { -v };
            }
            if vol < best.0 {
                best = (vol, base);
            }
        }
        best
    }

    /// Largest decrease and largest excess over the step along any axis.
    fn monotone_lipschitz(&self) -> (f64, f64) {
        let h = 1.0 / (self.k - 1) as f64;
        let mut mono: f64 = 0.0;
        let mut lip: f64 = 0.0;
        for (idx, &v) in self.values.iter().enumerate() {
            let ix = Self::multi(self.n, self.k, idx);
            for d in 0..self.n {
                if ix[d] + 1 < self.k {
                    let mut jx = ix.clone();
                    jx[d] += 1;
                    let diff = self.values[self.index_of(&jx)] - v;
                    mono = mono.max(-diff);
                    lip = lip.max(diff - h);
                }
            }
        }
        (mono, lip)
    }
}

fn grid_report(n: usize, grid_size: usize, c: &(impl Fn(&[f64]) -> f64 + Sync), tol: f64, copula: bool) -> CopulaReport {
    let k = grid_size.max(2);
    let grid = Grid::scan(n, k, c);
    let (margin_error, grounded_error) = grid.margins();
    let (mono, lip) = grid.monotone_lipschitz();
    let (min_vol, base) = grid.min_cell();
    let h = 1.0 / (k - 1) as f64;
    let min_cell = Some(RectangleReport {
        bounds: base.iter().map(|&i| (i as f64 * h, (i + 1) as f64 * h)).collect(),
        volume: min_vol,
        pass: min_vol >= -tol,
    });
    let common = margin_error <= tol && grounded_error <= tol;
    let pass = if copula {
        common && min_vol >= -tol
    } else {
        common && mono <= tol && lip <= tol
    };
    CopulaReport {
        dim: n,
        grid_size: k,
        margin_error,
        grounded_error,
        min_cell_volume: min_vol,
        min_cell,
        monotone_violation: mono,
        lipschitz_excess: lip,
        pass,
    }
}

/// Margins, groundedness and non-negative volume of every grid cell on a
/// `grid_size^n` grid over the unit cube.
pub fn check_copula(c: impl Fn(&[f64]) -> f64 + Sync, n: usize, grid_size: usize, tol: f64) -> CopulaReport {
    grid_report(n, grid_size, &c, tol, true)
}

/// Margins, groundedness, monotonicity and the 1-Lipschitz property per
/// coordinate; cell volumes are reported but not required.
pub fn check_quasicopula(c: impl Fn(&[f64]) -> f64 + Sync, n: usize, grid_size: usize, tol: f64) -> CopulaReport {
    grid_report(n, grid_size, &c, tol, false)
}

/// Largest number of support points per shock the oracle accepts.
pub const ORACLE_MAX_POINTS: usize = 8;
/// Largest number of endogenous shocks the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 6;

/// Exact joint law of the lifetimes of a precise all-discrete shock model.
#[derive(Debug, Clone)]
pub struct DiscreteModelOracle {
    family: Family,
    partition: usize,
    /// Lifetime vectors with their probabilities, one per support combination.
    atoms: Vec<(Vec<f64>, f64)>,
}

impl DiscreteModelOracle {
    pub fn new(model: &ShockModel) -> Result<Self> {
        let n = model.dim();
        if n > ORACLE_MAX_DIM {
            return Err(Error::SupportLimit(format!("{n} shocks, at most {ORACLE_MAX_DIM}")));
        }
        let comps = model.precise_components()?;
        let support = |f: &DistributionFn| -> Result<(Vec<f64>, Vec<f64>)> {
            let (xs, ms) = f
                .discrete_support()
                .ok_or_else(|| Error::SupportLimit(format!("{} is not discrete", f.kind_name())))?;
            if xs.len() > ORACLE_MAX_POINTS {
                return Err(Error::SupportLimit(format!(
                    "{} support points, at most {ORACLE_MAX_POINTS}",
                    xs.len()
                )));
            }
            Ok((xs.to_vec(), ms.to_vec()))
        };
        let shocks = comps.iter().map(support).collect::<Result<Vec<_>>>()?;
        let z = support(model.exogenous())?;
        let p = match model.family() {
            Family::Marshall => n,
            _ => model.partition(),
        };

        let mut atoms = Vec::new();
        let mut ix = vec![0usize; n];
        for (zi, &zv) in z.0.iter().enumerate() {
            ix.iter_mut().for_each(|i| *i = 0);
            loop {
                let mut prob = z.1[zi];
                let mut life = Vec::with_capacity(n);
                for d in 0..n {
                    let x = shocks[d].0[ix[d]];
                    prob *= shocks[d].1[ix[d]];
                    life.push(if d < p { x.max(zv) } else { x.min(zv) });
                }
                atoms.push((life, prob));
                // odometer over the component supports
                let mut d = 0;
                while d < n {
                    ix[d] += 1;
                    if ix[d] < shocks[d].0.len() {
                        break;
                    }
                    ix[d] = 0;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
        }
        let oracle = DiscreteModelOracle {
            family: model.family(),
            partition: p,
            atoms,
        };
        let mass = oracle.total_mass();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("enumerated mass {mass} differs from 1")));
        }
        Ok(oracle)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }

    pub fn atoms(&self) -> usize {
        self.atoms.len()
    }

    /// `P(U_i <= x_i, i < p; U_j <= x_j, j >= p)`, or with `U_j > x_j` for the
    /// min-type coordinates when `reflected_tail` is set.
    pub fn exact_joint(&self, x: &[f64], reflected_tail: bool) -> Result<f64> {
        let n = self.atoms.first().map_or(0, |a| a.0.len());
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        let p = self.partition;
        Ok(self
            .atoms
            .iter()
            .filter(|(u, _)| {
                u.iter().zip(x).enumerate().all(|(d, (&ud, &xd))| {
                    if d >= p && reflected_tail {
                        ud > xd
                    } else {
                        ud <= xd
                    }
                })
            })
            .map(|(_, prob)| prob)
            .sum())
    }
}

/// Simulated probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    fn from_count(hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        McEstimate {
            estimate: p,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }
}

const MC_CHUNK: u64 = 1 << 16;

/// Monte Carlo estimate of the joint probability at `x`.
///
/// Component `i` draws from ChaCha8 stream `i` and the exogenous shock from
/// stream `n`, all keyed by `seed`; sample `k` consumes words `2k, 2k+1` of
/// each stream, so the result does not depend on how the index range is
/// split across threads.
pub fn monte_carlo_joint(
    model: &ShockModel,
    x: &[f64],
    samples: u64,
    seed: u64,
    reflected_tail: bool,
) -> Result<McEstimate> {
    Ok(monte_carlo_joint_many(model, &[x.to_vec()], samples, seed, reflected_tail)?[0])
}

/// Same as [`monte_carlo_joint`] for several points on one shared sample.
pub fn monte_carlo_joint_many(
    model: &ShockModel,
    points: &[Vec<f64>],
    samples: u64,
    seed: u64,
    reflected_tail: bool,
) -> Result<Vec<McEstimate>> {
    let n = model.dim();
    for x in points {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
    }
    if samples == 0 {
        return Err(Error::InvalidModel("Monte Carlo needs at least one sample".into()));
    }
    let mut dists = model.precise_components()?;
    dists.push(model.exogenous().clone());
    for d in &dists {
        d.quantile(0.5)?;
    }
    let p = match model.family() {
        Family::Marshall => n,
        _ => model.partition(),
    };
    let reflected = reflected_tail && model.family() != Family::Marshall;

    let chunks: Vec<u64> = (0..samples.div_ceil(MC_CHUNK)).collect();
    let counts: Vec<Vec<u64>> = chunks
        .par_iter()
        .map(|&c| -> Result<Vec<u64>> {
            let start = c * MC_CHUNK;
            let len = MC_CHUNK.min(samples - start);
            let mut rngs: Vec<ChaCha8Rng> = (0..=n)
                .map(|s| {
                    let mut r = ChaCha8Rng::seed_from_u64(seed);
                    r.set_stream(s as u64);
                    r.set_word_pos(2 * start as u128);
                    r
                })
                .collect();
            let mut hits = vec![0u64; points.len()];
            let mut life = vec![0.0; n];
            for _ in 0..len {
                let z = dists[n].quantile(rngs[n].sample(Open01))?;
                for d in 0..n {
                    let xd = dists[d].quantile(rngs[d].sample(Open01))?;
                    life[d] = if d < p { xd.max(z) } else { xd.min(z) };
                }
                for (h, x) in hits.iter_mut().zip(points) {
                    let inside = life.iter().zip(x).enumerate().all(|(d, (&u, &xd))| {
                        if d >= p && reflected {
                            u > xd
                        } else {
                            u <= xd
                        }
                    });
                    *h += inside as u64;
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    let totals = counts.iter().fold(vec![0u64; points.len()], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    });
    Ok(totals.into_iter().map(|h| McEstimate::from_count(h, samples)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copulas::{joint_maxmin_h, joint_rmm_hsigma_direct};
    use crate::imprecise::PBox;

    fn product(u: &[f64]) -> f64 {
        u.iter().product()
    }

    fn min_copula(u: &[f64]) -> f64 {
        u.iter().copied().fold(1.0, f64::min)
    }

    #[test]
    fn volumes_of_basic_copulas() {
        let v = rectangle_volume(2, product, &[(0.2, 0.5), (0.3, 0.6)]).unwrap();
        assert!((v - 0.09).abs() < 1e-15);
        assert_eq!(rectangle_volume(2, min_copula, &[(0.0, 1.0), (0.0, 1.0)]).unwrap(), 1.0);
        assert!(rectangle_volume(3, product, &[(0.0, 1.0)]).is_err());
        let v3 = rectangle_volume(3, product, &[(0.1, 0.2), (0.0, 0.5), (0.5, 1.0)]).unwrap();
        assert!((v3 - 0.1 * 0.5 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn product_is_a_copula_and_quasicopula() {
        assert!(check_copula(product, 2, 11, 1e-12).pass);
        assert!(check_quasicopula(product, 3, 6, 1e-12).pass);
        assert!(check_copula(min_copula, 3, 6, 1e-12).pass);
    }

    #[test]
    fn lower_frechet_bound_fails_in_three_dimensions() {
        // max(u1+...+un-(n-1), 0) is a quasi-copula, 2-increasing only for n=2
        let w = |u: &[f64]| (u.iter().sum::<f64>() - (u.len() - 1) as f64).max(0.0);
        let r = check_copula(w, 3, 11, 1e-12);
        assert!(!r.pass);
        assert!(r.min_cell_volume < -0.05);
        assert!(check_quasicopula(w, 3, 11, 1e-12).pass);
        assert!(check_copula(w, 2, 11, 1e-12).pass);
    }

    #[test]
    fn margin_violation_detected() {
        let bad = |u: &[f64]| 0.9 * u[0] * u[1];
        let r = check_copula(bad, 2, 11, 1e-12);
        assert!(!r.pass && r.margin_error > 0.05);
    }

    fn discrete(pts: &[(f64, f64)]) -> DistributionFn {
        DistributionFn::discrete(pts.iter().copied()).unwrap()
    }

    #[test]
    fn one_point_supports_give_indicators() {
        let m = ShockModel::new(
            Family::MaxMin,
            1,
            vec![PBox::precise(discrete(&[(1.0, 1.0)])), PBox::precise(discrete(&[(3.0, 1.0)]))],
            discrete(&[(2.0, 1.0)]),
        )
        .unwrap();
        let o = DiscreteModelOracle::new(&m).unwrap();
        assert_eq!(o.total_mass(), 1.0);
        // U = max(1,2) = 2, W = min(3,2) = 2
        assert_eq!(o.exact_joint(&[2.0, 2.0], false).unwrap(), 1.0);
        assert_eq!(o.exact_joint(&[1.9, 2.0], false).unwrap(), 0.0);
        assert_eq!(o.exact_joint(&[2.0, 1.5], true).unwrap(), 1.0);
        assert_eq!(o.exact_joint(&[2.0, 2.0], true).unwrap(), 0.0);
    }

    #[test]
    fn oracle_agrees_with_joint_formulas() {
        let m = ShockModel::new(
            Family::MaxMin,
            1,
            vec![
                PBox::precise(discrete(&[(0.0, 0.2), (1.0, 0.5), (2.0, 0.3)])),
                PBox::precise(discrete(&[(0.5, 0.6), (1.0, 0.4)])),
                PBox::precise(discrete(&[(1.0, 0.3), (3.0, 0.7)])),
            ],
            discrete(&[(0.5, 0.5), (1.5, 0.5)]),
        )
        .unwrap();
        let o = DiscreteModelOracle::new(&m).unwrap();
        let rmm = ShockModel::new(Family::Rmm, 1, m.endogenous().to_vec(), m.exogenous().clone()).unwrap();
        for x in [[1.0, 0.5, 1.0], [1.5, 1.0, 0.5], [2.0, 0.0, 3.0], [0.5, 1.5, 1.5]] {
            let e = o.exact_joint(&x, false).unwrap();
            assert!((e - joint_maxmin_h(&m, &x).unwrap()).abs() < 1e-12);
            let r = o.exact_joint(&x, true).unwrap();
            assert!((r - joint_rmm_hsigma_direct(&rmm, &x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_limits() {
        let big = discrete(&(0..9).map(|k| (k as f64, 1.0 / 9.0)).collect::<Vec<_>>());
        let m = ShockModel::new(Family::Marshall, 2, vec![PBox::precise(big.clone()); 2], big).unwrap();
        assert!(matches!(DiscreteModelOracle::new(&m), Err(Error::SupportLimit(_))));
        let e = DistributionFn::exponential(1.0).unwrap();
        let m = ShockModel::new(Family::Marshall, 2, vec![PBox::precise(e.clone()); 2], e).unwrap();
        assert!(DiscreteModelOracle::new(&m).is_err());
    }

    fn example_model() -> ShockModel {
        let e = DistributionFn::exponential(1.0).unwrap();
        ShockModel::new(
            Family::Rmm,
            1,
            vec![PBox::precise(e.clone()), PBox::precise(e)],
            DistributionFn::dirac(1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn monte_carlo_is_reproducible_and_chunk_independent() {
        let m = example_model();
        let a = monte_carlo_joint(&m, &[1.5, 0.5], 200_000, 7, true).unwrap();
        let b = monte_carlo_joint(&m, &[1.5, 0.5], 200_000, 7, true).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_joint(&m, &[1.5, 0.5], 200_000, 8, true).unwrap();
        assert_ne!(a.estimate, c.estimate);
        let exact = (1.0 - (-1.5f64).exp()) * (-0.5f64).exp();
        assert!((a.estimate - exact).abs() < 4.0 * a.stderr);
        let one = monte_carlo_joint(&m, &[1.5, 0.5], 1, 3, true).unwrap();
        assert!(one.estimate == 0.0 || one.estimate == 1.0);
    }

    #[test]
    fn monte_carlo_independence_model() {
        // Z sits below every shock, so max-type lifetimes are the shocks themselves
        let e = DistributionFn::exponential(1.0).unwrap();
        let m = ShockModel::new(
            Family::Marshall,
            2,
            vec![PBox::precise(e.clone()), PBox::precise(e.clone())],
            DistributionFn::dirac(-1.0).unwrap(),
        )
        .unwrap();
        let r = monte_carlo_joint(&m, &[0.7, 1.2], 100_000, 11, false).unwrap();
        let exact = e.value(0.7) * e.value(1.2);
        assert!((r.estimate - exact).abs() < 4.0 * r.stderr);
    }

    #[test]
    fn monte_carlo_rejects_tabulated_shapes() {
        let k = crate::distfn::Knot {
            x: 0.0,
            left: 0.0,
            point: 0.0,
            right: 0.0,
        };
        let k2 = crate::distfn::Knot {
            x: 1.0,
            left: 1.0,
            point: 1.0,
            right: 1.0,
        };
        let pwl = DistributionFn::piecewise_linear(vec![k, k2]).unwrap();
        let m = ShockModel::new(Family::Marshall, 2, vec![PBox::precise(pwl.clone()); 2], pwl).unwrap();
        assert!(matches!(
            monte_carlo_joint(&m, &[0.5, 0.5], 10, 1, false),
            Err(Error::UnsupportedSampling(_))
        ));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FAMILIES: [Family; 3] = [Family::Marshall, Family::MaxMin, Family::Rmm];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn monte_carlo_is_reproducible(seed in any::<u64>(), fi in 0usize..3, samples in 1u64..150_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::discrete_model(&mut rng, FAMILIES[fi], 3, 4).unwrap();
            let points: Vec<Vec<f64>> = (0..3).map(|_| random::lattice_point(&mut rng, 3)).collect();
            let many = monte_carlo_joint_many(&m, &points, samples, seed, true).unwrap();
            prop_assert_eq!(&many, &monte_carlo_joint_many(&m, &points, samples, seed, true).unwrap());
            for (x, est) in points.iter().zip(&many) {
                prop_assert_eq!(*est, monte_carlo_joint(&m, x, samples, seed, true).unwrap());
                prop_assert!((0.0..=1.0).contains(&est.estimate));
            }
        }

        #[test]
        fn oracle_mass_is_one(seed in any::<u64>(), fi in 0usize..3, n in 2usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::discrete_model(&mut rng, FAMILIES[fi], n, 5).unwrap();
            let o = DiscreteModelOracle::new(&m).unwrap();
            prop_assert!((o.total_mass() - 1.0).abs() <= 1e-12);
            let far = vec![10.0; n];
            prop_assert!((o.exact_joint(&far, false).unwrap() - 1.0).abs() <= 1e-12);
        }
    }
}
