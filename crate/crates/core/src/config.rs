//! JSON configuration: distribution, p-box, model and generator specs.
//!
//! ```json
//! {"family": "rmm", "n": 2, "p": 1,
//!  "endogenous": [{"lower": {"kind": "exponential", "rate": 1.0},
//!                  "upper": {"kind": "exponential", "rate": 2.0}},
//!                 {"kind": "exponential", "rate": 1.0}],
//!  "exogenous": {"kind": "dirac", "location": 1.0}}
//! ```
//!
//! A bare distribution in `endogenous` is a precise component.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::copulas::Family;
use crate::distfn::{DistributionFn, Knot};
use crate::error::{Error, Result};
use crate::genfn::{extend_chi, extend_phi, extend_psi, to_rmm, ClosedForm, Generator, GeneratorKind};
use crate::imprecise::{PBox, ShockModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Exponential { rate: f64 },
    Dirac { location: f64 },
    Discrete { points: Vec<[f64; 2]> },
    Uniform { a: f64, b: f64 },
    /// Knots as `[x, left, point, right]`.
    Pwl { breakpoints: Vec<[f64; 4]> },
}

impl DistSpec {
    pub fn build(&self) -> Result<DistributionFn> {
        match self {
            DistSpec::Exponential { rate } => DistributionFn::exponential(*rate),
            DistSpec::Dirac { location } => DistributionFn::dirac(*location),
            DistSpec::Discrete { points } => DistributionFn::discrete(points.iter().map(|p| (p[0], p[1]))),
            DistSpec::Uniform { a, b } => DistributionFn::uniform(*a, *b),
            DistSpec::Pwl { breakpoints } => DistributionFn::piecewise_linear(
                breakpoints
                    .iter()
                    .map(|k| Knot {
                        x: k[0],
                        left: k[1],
                        point: k[2],
                        right: k[3],
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PBoxSpec {
    Bounds { lower: DistSpec, upper: DistSpec },
    Precise(DistSpec),
}

impl PBoxSpec {
    pub fn build(&self) -> Result<PBox> {
        match self {
            PBoxSpec::Bounds { lower, upper } => PBox::new(lower.build()?, upper.build()?),
            PBoxSpec::Precise(d) => Ok(PBox::precise(d.build()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of max-type components; defaults to `n` for Marshall models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub endogenous: Vec<PBoxSpec>,
    pub exogenous: DistSpec,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ShockModel> {
        let n = self.endogenous.len();
        if let Some(declared) = self.n {
            if declared != n {
                return Err(Error::Config(format!("n = {declared} but {n} endogenous shocks given")));
            }
        }
        let p = match (self.family, self.p) {
            (Family::Marshall, None) => n,
            (_, Some(p)) => p,
            (f, None) => return Err(Error::Config(format!("{f} model needs a partition index p"))),
        };
        let boxes = self.endogenous.iter().map(PBoxSpec::build).collect::<Result<Vec<_>>>()?;
        ShockModel::new(self.family, p, boxes, self.exogenous.build()?)
    }

    /// Same shocks viewed under another family. Switching to Marshall makes
    /// every component max-type.
    pub fn with_family(&self, family: Family) -> ModelSpec {
        let mut spec = self.clone();
        if family != self.family {
            spec.family = family;
            if family == Family::Marshall {
                spec.p = Some(self.endogenous.len());
            }
        }
        spec
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("model spec serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(&digest[..8])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FormName {
    Identity,
    Zero,
    Floor,
    Cap,
    TruncatedLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockPair {
    pub x: DistSpec,
    pub z: DistSpec,
}

/// One of a named closed form, canonical extension from shocks, or a table of
/// `[u, value]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FormName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_shocks: Option<ShockPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Generator> {
        let sources = [self.form.is_some(), self.from_shocks.is_some(), self.table.is_some()];
        if sources.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::Config(
                "generator needs exactly one of form, from_shocks or table".into(),
            ));
        }
        if let Some(form) = self.form {
            let need_c = || self.c.ok_or_else(|| Error::Config(format!("form {form:?} needs c")));
            let cf = match form {
                FormName::Identity => ClosedForm::Identity,
                FormName::Zero => ClosedForm::Zero,
                FormName::Floor => ClosedForm::Floor { c: need_c()? },
                FormName::Cap => ClosedForm::Cap { c: need_c()? },
                FormName::TruncatedLinear => ClosedForm::TruncatedLinear {
                    c: need_c()?,
                    scale: self.scale.unwrap_or(1.0),
                },
            };
            return Generator::closed_form(self.kind, cf);
        }
        if let Some(pair) = &self.from_shocks {
            let (x, z) = (pair.x.build()?, pair.z.build()?);
            return match self.kind {
                GeneratorKind::Phi => Ok(extend_phi(&x, &z)),
                GeneratorKind::Psi => Ok(extend_psi(&x, &z)),
                GeneratorKind::Chi => Ok(extend_chi(&x, &z)),
                GeneratorKind::RmmF => to_rmm(&extend_phi(&x, &z)),
                GeneratorKind::RmmG => to_rmm(&extend_chi(&x, &z)),
            };
        }
        let table = self.table.as_ref().expect("checked above");
        Generator::tabulated(self.kind, table.iter().map(|p| (p[0], p[1])).collect())
    }
}

/// Parameters of the worked exponential example: precise rates and the rate
/// intervals `[low, high]` of the two p-boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExampleSpec {
    pub lambda: f64,
    pub mu: f64,
    pub lambda_box: [f64; 2],
    pub mu_box: [f64; 2],
    pub shock_time: f64,
    pub grid: usize,
}

impl Default for ExampleSpec {
    fn default() -> Self {
        ExampleSpec {
            lambda: 1.0,
            mu: 1.0,
            lambda_box: [1.0, 2.0],
            mu_box: [1.0, 2.0],
            shock_time: 1.0,
            grid: 101,
        }
    }
}

/// Contents of a config file.
#[derive(Debug, Clone)]
pub enum Config {
    Model(ModelSpec),
    Generators(Vec<GeneratorSpec>),
    Example(ExampleSpec),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    generators: Vec<GeneratorSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExampleFile {
    example: ExampleSpec,
}

impl Config {
    /// Dispatches on the top-level keys: `generators`, `example` or a model.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let has = |k: &str| value.get(k).is_some();
        if has("generators") {
            let f: GeneratorFile = serde_json::from_value(value)?;
            Ok(Config::Generators(f.generators))
        } else if has("example") {
            let f: ExampleFile = serde_json::from_value(value)?;
            Ok(Config::Example(f.example))
        } else {
            Ok(Config::Model(serde_json::from_value(value)?))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            other => other,
        })
    }
}
