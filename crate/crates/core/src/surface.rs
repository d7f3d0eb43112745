//! Copula and bound surfaces on rectangular grids, with CSV and JSON export.
//!
//! CSV layout: header `u1,...,un,value`, one row per grid point, last axis
//! varying fastest. Numbers use Rust's shortest round-trip formatting, so a
//! surface read back compares bit-for-bit.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copulas::Family;
use crate::error::{Error, Result};
use crate::imprecise::{build_bounds, rmm_envelope, ShockModel};

/// Largest number of grid points a surface may hold.
pub const MAX_POINTS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum BoundLevel {
    Lower,
    Upper,
    Precise,
    EnvelopeInf,
    EnvelopeSup,
}

impl fmt::Display for BoundLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundLevel::Lower => "lower",
            BoundLevel::Upper => "upper",
            BoundLevel::Precise => "precise",
            BoundLevel::EnvelopeInf => "envelope_inf",
            BoundLevel::EnvelopeSup => "envelope_sup",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeta {
    pub model_hash: String,
    pub family: Family,
    pub bound: BoundLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSurface {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub metadata: SurfaceMeta,
}

/// `n` copies of `{0, 1/(k-1), ..., 1}`.
pub fn unit_axes(n: usize, k: usize) -> Vec<Vec<f64>> {
    let k = k.max(2);
    let axis: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
    vec![axis; n]
}

impl GridSurface {
    pub fn evaluate(axes: Vec<Vec<f64>>, metadata: SurfaceMeta, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
        match total {
            Some(t) if t <= MAX_POINTS => {}
            _ => return Err(Error::Config(format!("grid exceeds {MAX_POINTS} points"))),
        }
        let total = total.unwrap_or(0);
        let mut surface = GridSurface {
            axes,
            values: Vec::new(),
            metadata,
        };
        surface.values = (0..total).into_par_iter().map(|i| f(&surface.point(i))).collect();
        Ok(surface)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of the `idx`-th point in row-major order.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.axes.len()];
        for d in (0..self.axes.len()).rev() {
            let len = self.axes[d].len();
            p[d] = self.axes[d][idx % len];
            idx /= len;
        }
        p
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim()).map(|i| format!("u{i}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        let mut row = Vec::with_capacity(self.dim() + 1);
        for (i, v) in self.values.iter().enumerate() {
            row.clear();
            row.extend(self.point(i).iter().map(f64::to_string));
            row.push(v.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes JSON when the path ends in `.json`, CSV otherwise.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::to_writer(file, self)?;
            Ok(())
        } else {
            self.write_csv(file)
        }
    }
}

/// Rows of a surface CSV: points and values.
pub fn read_csv(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let n = r.headers()?.len().saturating_sub(1);
    let mut points = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let nums = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("bad number {s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: nums.len(),
            });
        }
        values.push(nums[n]);
        points.push(nums[..n].to_vec());
    }
    Ok((points, values))
}

pub type Evaluator = Box<dyn Fn(&[f64]) -> f64 + Sync + Send>;

/// Pointwise evaluator for one bound level of a model.
pub fn level_evaluator(model: &ShockModel, level: BoundLevel) -> Result<Evaluator> {
    let family = model.family();
    let invalid = || Error::InvalidBound {
        bound: level.to_string(),
        family,
    };
    Ok(match level {
        BoundLevel::Precise => {
            let gv = model.generators()?;
            Box::new(move |u| gv.eval(u))
        }
        BoundLevel::Lower | BoundLevel::Upper => {
            let bf = build_bounds(model)?;
            let gv = if level == BoundLevel::Lower { bf.lower_gen } else { bf.upper_gen };
            Box::new(move |u| gv.eval(u))
        }
        BoundLevel::EnvelopeInf | BoundLevel::EnvelopeSup => {
            if family != Family::Rmm {
                return Err(invalid());
            }
            let bf = build_bounds(model)?;
            let inf = level == BoundLevel::EnvelopeInf;
            Box::new(move |u| {
                let (lo, hi) = rmm_envelope(&bf, u).expect("dimension checked by the grid");
                if inf {
                    lo
                } else {
                    hi
                }
            })
        }
    })
}

/// Copula-level surface of `model` at `level` on a `grid^n` unit grid.
pub fn surface_for(model: &ShockModel, level: BoundLevel, grid: usize, model_hash: &str) -> Result<GridSurface> {
    let f = level_evaluator(model, level)?;
    GridSurface::evaluate(
        unit_axes(model.dim(), grid),
        SurfaceMeta {
            model_hash: model_hash.to_string(),
            family: model.family(),
            bound: level,
        },
        f,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfn::DistributionFn;
    use crate::imprecise::PBox;

    fn model() -> ShockModel {
        let e = |r| DistributionFn::exponential(r).unwrap();
        ShockModel::new(
            Family::Rmm,
            1,
            vec![PBox::new(e(1.0), e(2.0)).unwrap(), PBox::new(e(1.0), e(2.0)).unwrap()],
            DistributionFn::dirac(1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_grid_has_copula_corners() {
        let s = surface_for(&model(), BoundLevel::Lower, 2, "x").unwrap();
        assert_eq!(s.values, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(s.point(2), vec![1.0, 0.0]);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let m = model();
        let s = surface_for(&m, BoundLevel::EnvelopeSup, 17, "x").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        s.write_to(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("u1,u2,value\n"));
        let (points, values) = read_csv(&path).unwrap();
        assert_eq!(points.len(), 17 * 17);
        let f = level_evaluator(&m, BoundLevel::EnvelopeSup).unwrap();
        for (p, v) in points.iter().zip(&values) {
            assert_eq!(f(p).to_bits(), v.to_bits());
        }
    }

    #[test]
    fn invalid_levels() {
        let m = model();
        assert!(matches!(
            surface_for(&m, BoundLevel::Precise, 3, "x"),
            Err(Error::ImpreciseModel(0))
        ));
        let mm = ShockModel::new(Family::MaxMin, 1, m.endogenous().to_vec(), m.exogenous().clone()).unwrap();
        assert!(matches!(
            surface_for(&mm, BoundLevel::EnvelopeInf, 3, "x"),
            Err(Error::InvalidBound { .. })
        ));
        assert!(GridSurface::evaluate(unit_axes(6, 1000), SurfaceMeta {
            model_hash: String::new(),
            family: Family::Rmm,
            bound: BoundLevel::Lower
        }, |_| 0.0)
        .is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::verify::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn surfaces_are_deterministic_and_round_trip(seed in any::<u64>(), n in 2usize..=3, grid in 2usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::pbox_model(&mut rng, crate::copulas::Family::Rmm, n).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
            for level in [BoundLevel::Lower, BoundLevel::EnvelopeSup] {
                surface_for(&m, level, grid, "h").unwrap().write_to(&a).unwrap();
                let again = surface_for(&m, level, grid, "h").unwrap();
                again.write_to(&b).unwrap();
                prop_assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
                let (points, values) = read_csv(&a).unwrap();
                prop_assert_eq!(points.len(), grid.pow(n as u32));
                for (i, v) in values.iter().enumerate() {
                    prop_assert_eq!(v.to_bits(), again.values[i].to_bits());
                    prop_assert_eq!(&points[i], &again.point(i));
                }
            }
        }
    }
}
