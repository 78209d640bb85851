//! Experiment configuration, read from JSON or TOML.

use std::path::Path;

use dtfe_core::estimators::{Bandwidth, Correction};
use dtfe_core::geometry::{Dim, Point, Window};
use dtfe_core::pointprocess::IntensityModel;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionSpec {
    Ghost,
    None,
}

impl From<CorrectionSpec> for Correction {
    fn from(c: CorrectionSpec) -> Self {
        match c {
            CorrectionSpec::Ghost => Correction::GhostBoundary,
            CorrectionSpec::None => Correction::None,
        }
    }
}

/// Window as lower and upper corners; one coordinate each on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl WindowSpec {
    pub fn centered(dim: Dim, half_width: f64) -> Self {
        WindowSpec {
            lo: vec![-half_width; dim.get()],
            hi: vec![half_width; dim.get()],
        }
    }

    pub fn resolve(&self) -> Result<Window, Error> {
        let bad = |msg: &str| Error::Config {
            field: "process.window".into(),
            message: msg.into(),
        };
        match (self.lo.as_slice(), self.hi.as_slice()) {
            ([a], [b]) => Window::interval(*a, *b).map_err(|e| bad(&e.to_string())),
            ([a, c], [b, d]) => {
                Window::rectangle((*a, *b), (*c, *d)).map_err(|e| bad(&e.to_string()))
            }
            _ => Err(bad("lo and hi must both have 1 or 2 coordinates")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum IntensitySpec {
    Constant {
        rate: f64,
    },
    /// `a + b x`, line only.
    Affine1d {
        a: f64,
        b: f64,
    },
}

impl IntensitySpec {
    pub fn model(&self) -> IntensityModel {
        match *self {
            IntensitySpec::Constant { rate } => IntensityModel::Constant { rate },
            IntensitySpec::Affine1d { a, b } => IntensityModel::Affine1d { a, b },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub window: WindowSpec,
    pub intensity: IntensitySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EstimatorSpec {
    Dtfe { correction: CorrectionSpec },
    Bd { bandwidth: f64 },
    Kernelk { bandwidth: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub process: ProcessSpec,
    pub estimator: EstimatorSpec,
    /// Evaluation points `x0`, each with one coordinate per dimension.
    pub points: Vec<Vec<f64>>,
    pub replicates: u64,
    pub seed: u64,
}

/// A validated [`ExperimentSpec`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub window: Window,
    pub intensity: IntensityModel,
    pub points: Vec<Point>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<Resolved, Error> {
        let window = self.process.window.resolve()?;
        let intensity = self.process.intensity.model();
        if matches!(self.process.intensity, IntensitySpec::Affine1d { .. })
            && window.dim() == Dim::Two
        {
            return Err(config_err(
                "process.intensity",
                "affine intensity is only defined on the line",
            ));
        }
        intensity
            .validate(&window)
            .map_err(|e| config_err("process.intensity", &e.to_string()))?;
        if self.replicates < 2 {
            return Err(config_err("replicates", "need at least 2 replicates"));
        }
        match self.estimator {
            EstimatorSpec::Bd { bandwidth } | EstimatorSpec::Kernelk { bandwidth } => {
                Bandwidth::new(bandwidth)
                    .map_err(|e| config_err("estimator.bandwidth", &e.to_string()))?;
            }
            EstimatorSpec::Dtfe { .. } => {}
        }
        if self.points.is_empty() {
            return Err(config_err("points", "need at least one evaluation point"));
        }
        let mut points = Vec::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            let x = match (window.dim(), p.as_slice()) {
                (Dim::One, [x]) => [*x, 0.0],
                (Dim::Two, [x, y]) => [*x, *y],
                _ => {
                    return Err(config_err(
                        &format!("points[{i}]"),
                        "wrong number of coordinates",
                    ))
                }
            };
            if !window.contains(x) {
                return Err(config_err(&format!("points[{i}]"), "outside the window"));
            }
            points.push(x);
        }
        Ok(Resolved {
            window,
            intensity,
            points,
        })
    }

    /// Reads JSON, or TOML when the extension is `.toml`.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| {
                let location = e
                    .span()
                    .map(|s| {
                        let line = text[..s.start].matches('\n').count() + 1;
                        format!("line {line}")
                    })
                    .unwrap_or_else(|| "document".into());
                Error::Config {
                    field: location,
                    message: e.message().to_string(),
                }
            })
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config {
                field: format!("line {} column {}", e.line(), e.column()),
                message: e.to_string(),
            })
        }
    }
}

fn config_err(field: &str, message: &str) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            process: ProcessSpec {
                window: WindowSpec::centered(Dim::One, 5.0),
                intensity: IntensitySpec::Constant { rate: 20.0 },
            },
            estimator: EstimatorSpec::Dtfe {
                correction: CorrectionSpec::Ghost,
            },
            points: vec![vec![0.0], vec![5.0]],
            replicates: 10,
            seed: 1,
        }
    }

    #[test]
    fn round_trips() {
        let s = spec();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentSpec>(&json).unwrap(), s);
        let t = toml::to_string(&s).unwrap();
        assert_eq!(toml::from_str::<ExperimentSpec>(&t).unwrap(), s);
    }

    #[test]
    fn validation_names_the_field() {
        let mut s = spec();
        s.points.push(vec![6.0]);
        match s.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "points[2]"),
            other => panic!("{other:?}"),
        }
        let mut s = spec();
        s.replicates = 1;
        assert!(matches!(s.validate(), Err(Error::Config { field, .. }) if field == "replicates"));
        let mut s = spec();
        s.process.intensity = IntensitySpec::Affine1d { a: 1.0, b: 1.0 };
        assert!(s.validate().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = r#"{"process":{"window":{"lo":[0],"hi":[1]},"intensity":{"kind":"constant","rate":1}},
            "estimator":{"kind":"dtfe","correction":"ghost"},"points":[[0.5]],"replicates":2,"seed":0,"extra":1}"#;
        assert!(serde_json::from_str::<ExperimentSpec>(bad).is_err());
    }
}
