//! Run configuration: one flat JSON document, every field optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::weights::{custom_family, gegenbauer_block2, gegenbauer_family, jacobi_family, WeightError, WeightFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `jacobi`, `gegenbauer`, `gegenbauer_block`, `scalar` or `custom`.
    pub family: String,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    /// Integer for `jacobi`, integer or half-integer for `gegenbauer`.
    pub ell: f64,
    pub nu: f64,
    /// `coeffs[d][i][j]`: coefficient of `x^d` in `H(x)`, for `custom`.
    pub coeffs: Vec<Vec<Vec<f64>>>,
    pub nmax: usize,
    /// Quadrature nodes; `None` means `MVOP_QUAD_NODES` or the default count.
    pub nodes: Option<usize>,
    pub inner_n: Vec<usize>,
    pub inner_points: usize,
    pub inner_range: f64,
    pub inner_band: [f64; 2],
    pub outer_n: Vec<usize>,
    /// Sample points `[re, im]`.
    pub outer_z: Vec<[f64; 2]>,
    pub outer_order: usize,
    pub outer_band: [f64; 2],
    pub endpoint_n: Vec<usize>,
    /// Endpoint samples sit at `x = cos(endpoint_theta / n)`.
    pub endpoint_theta: f64,
    pub mh_n: Vec<usize>,
    pub mh_theta: Vec<f64>,
    pub figure_n: usize,
    pub figure_points: usize,
    pub figure_range: f64,
    pub recurrence_tol: f64,
    pub out: String,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: "jacobi".into(),
            alpha: 1.0,
            beta: 2.0,
            k: 1.0,
            ell: 1.0,
            nu: 0.5,
            coeffs: Vec::new(),
            nmax: 120,
            nodes: None,
            inner_n: vec![10, 20, 40, 80],
            inner_points: 41,
            inner_range: 0.8,
            inner_band: [0.7, 1.4],
            outer_n: vec![10, 20, 40, 80],
            outer_z: vec![[2.0, 0.0], [1.5, 0.5]],
            outer_order: 1,
            outer_band: [1.6, 2.6],
            endpoint_n: vec![20, 40, 80],
            endpoint_theta: 2.0,
            mh_n: vec![50, 100, 200],
            mh_theta: vec![1.0, 2.0, 5.0],
            figure_n: 20,
            figure_points: 401,
            figure_range: 0.9,
            recurrence_tol: 1e-9,
            out: "out".into(),
            format: Format::Csv,
        }
    }
}

/// Command-line overrides applied on top of the file (or the defaults).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub family: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<f64>,
    pub nu: Option<f64>,
    pub ell: Option<f64>,
    pub nmax: Option<usize>,
    pub nodes: Option<usize>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &o.$f { self.$f = v.clone(); })*};
        }
        set!(family, alpha, beta, k, nu, ell, nmax, out, format);
        if o.nodes.is_some() {
            self.nodes = o.nodes;
        }
    }

    /// Builds the configured weight family; construction errors keep their weight-level cause.
    pub fn build_family(&self) -> Result<WeightFamily, FamilyBuildError> {
        let ell_int = |what: &str, twice: bool| -> Result<usize, FamilyBuildError> {
            let v = if twice { 2.0 * self.ell } else { self.ell };
            if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 {
                Ok(v as usize)
            } else {
                Err(FamilyBuildError::Config(format!("ell = {} is not a valid {what}", self.ell)))
            }
        };
        let fam = match self.family.as_str() {
            "jacobi" => jacobi_family(self.alpha, self.beta, self.k, ell_int("non-negative integer", false)?),
            "gegenbauer" => gegenbauer_family(self.nu, ell_int("non-negative (half-)integer", true)?),
            "gegenbauer_block" => gegenbauer_block2(self.nu),
            "scalar" => custom_family(self.alpha, self.beta, &[vec![vec![1.0]]]),
            "custom" => {
                if self.coeffs.is_empty() {
                    return Err(FamilyBuildError::Config("family custom needs coeffs".into()));
                }
                custom_family(self.alpha, self.beta, &self.coeffs)
            }
            other => {
                return Err(FamilyBuildError::Config(format!(
                    "unknown family {other:?} (expected jacobi, gegenbauer, gegenbauer_block, scalar or custom)"
                )))
            }
        };
        fam.map_err(FamilyBuildError::Weight)
    }

    pub fn family_or_config_error(&self) -> Result<WeightFamily, HarnessError> {
        self.build_family().map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FamilyBuildError {
    #[error("{0}")]
    Config(String),
    #[error("family: {0}")]
    Weight(WeightError),
}
