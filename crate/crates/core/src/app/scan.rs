use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{format_number, Settings};
use crate::engine::with_workers;
use crate::error::{DiscordError, Result};
use crate::spin_models::{
    dicke_discord_converged, lmg_ground_aniso, lmg_ground_isotropic, uniaxial_ground, DickeParams,
    LmgParams, UniaxialParams,
};
use crate::symmetric::{dh_symmetric, SymmetricResult, SymmetricState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    LmgIso,
    LmgAniso,
    Uniaxial,
    Dicke,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::LmgIso, Model::LmgAniso, Model::Uniaxial, Model::Dicke];

    pub fn name(self) -> &'static str {
        match self {
            Model::LmgIso => "lmg-iso",
            Model::LmgAniso => "lmg-aniso",
            Model::Uniaxial => "uniaxial",
            Model::Dicke => "dicke",
        }
    }

    /// Parameters that may be swept for this model.
    pub fn sweepable(self) -> &'static [&'static str] {
        match self {
            Model::LmgIso => &["h_z", "lambda"],
            Model::LmgAniso => &["h_z", "lambda", "gamma"],
            Model::Uniaxial => &["h_x", "h_z"],
            Model::Dicke => &["lambda", "omega", "omega0"],
        }
    }

    /// Default sweep: parameter name, start, stop, points.
    pub fn default_sweep(self) -> (&'static str, f64, f64, usize) {
        match self {
            Model::LmgIso => ("h_z", 0.04, 2.0, 50),
            Model::LmgAniso => ("h_z", 0.04, 2.0, 50),
            Model::Uniaxial => ("h_x", -0.5, 0.5, 41),
            Model::Dicke => ("lambda", 0.0, 1.0, 40),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = DiscordError;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| DiscordError::Usage(format!("unknown model {s:?}")))
    }
}

/// Fixed model parameters; the swept one is overwritten per row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub h_z: f64,
    pub h_x: f64,
    pub omega: f64,
    pub omega0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n: 20,
            lambda: 1.0,
            gamma: 0.5,
            h_z: 0.5,
            h_x: 0.0,
            omega: 1.0,
            omega0: 1.0,
        }
    }
}

impl ModelParams {
    fn with(mut self, name: &str, value: f64) -> Self {
        match name {
            "lambda" => self.lambda = value,
            "gamma" => self.gamma = value,
            "h_z" => self.h_z = value,
            "h_x" => self.h_x = value,
            "omega" => self.omega = value,
            "omega0" => self.omega0 = value,
            _ => unreachable!("sweep parameter validated"),
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub model: Model,
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub fixed: ModelParams,
}

impl ScanSpec {
    /// The model's default sweep with default fixed parameters.
    pub fn for_model(model: Model) -> Self {
        let (param, start, stop, points) = model.default_sweep();
        Self {
            model,
            param: param.to_string(),
            start,
            stop,
            points,
            fixed: ModelParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.model.sweepable().contains(&self.param.as_str()) {
            return Err(DiscordError::Usage(format!(
                "model {} sweeps one of {:?}, not {:?}",
                self.model,
                self.model.sweepable(),
                self.param
            )));
        }
        if self.points < 2 {
            return Err(DiscordError::Usage("a scan needs at least 2 points".into()));
        }
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(DiscordError::Usage(format!(
                "scan range needs start < stop, got {} and {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub param: f64,
    pub dh: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    /// Model-specific figures such as the Fock cutoff used or the
    /// mean-field residual.
    pub diagnostics: Vec<(String, f64)>,
    pub error: Option<String>,
}

fn evaluated(param: f64, r: &SymmetricResult, diagnostics: Vec<(String, f64)>) -> ScanRow {
    ScanRow {
        param,
        dh: Some(r.value),
        theta: Some(r.sigma.theta),
        phi: Some(r.sigma.phi),
        diagnostics,
        error: None,
    }
}

fn scan_point(spec: &ScanSpec, value: f64, settings: &Settings) -> Result<ScanRow> {
    let p = spec.fixed.with(&spec.param, value);
    let scan = &settings.symmetric;
    match spec.model {
        Model::LmgIso | Model::LmgAniso => {
            let params = LmgParams {
                n: p.n,
                lambda: p.lambda,
                gamma: if spec.model == Model::LmgIso { 1.0 } else { p.gamma },
                h_z: p.h_z,
            };
            params.validate()?;
            let state = if spec.model == Model::LmgIso {
                lmg_ground_isotropic(&params)?
            } else {
                lmg_ground_aniso(&params)?
            };
            let r = dh_symmetric(&SymmetricState::Pure(state), scan)?;
            Ok(evaluated(value, &r, vec![]))
        }
        Model::Uniaxial => {
            let g = uniaxial_ground(&UniaxialParams {
                n: p.n,
                h_x: p.h_x,
                h_z: p.h_z,
            })?;
            let c = &g.candidates[g.chosen];
            let r = dh_symmetric(&SymmetricState::Pure(g.state), scan)?;
            Ok(evaluated(
                value,
                &r,
                vec![
                    ("stationary_points".into(), g.candidates.len() as f64),
                    ("residual".into(), c.residual),
                    ("sin_half_angle".into(), c.sin_half_angle),
                ],
            ))
        }
        Model::Dicke => {
            let d = dicke_discord_converged(
                &DickeParams {
                    n: p.n,
                    omega: p.omega,
                    omega0: p.omega0,
                    lambda: p.lambda,
                    fock_cutoff: settings.dicke.fock_cutoff,
                },
                scan,
                settings.dicke.max_fock_cutoff,
            )?;
            Ok(evaluated(
                value,
                &d.result,
                vec![
                    ("fock_cutoff".into(), d.cutoff as f64),
                    ("cutoff_delta".into(), d.cutoff_delta),
                    ("energy".into(), d.energy),
                ],
            ))
        }
    }
}

/// One row per grid point, in grid order. Model errors are recorded in the
/// row rather than aborting the scan.
pub fn run_scan(spec: &ScanSpec, settings: &Settings) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    settings.validate()?;
    let grid = spec.grid();
    with_workers(settings.optimizer.workers, || {
        grid.par_iter()
            .map(|&v| {
                scan_point(spec, v, settings).unwrap_or_else(|e| ScanRow {
                    param: v,
                    dh: None,
                    theta: None,
                    phi: None,
                    diagnostics: vec![],
                    error: Some(e.to_string()),
                })
            })
            .collect()
    })
}

fn csv_cell(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Columns `param,dh,theta,phi`, plus `error` when any row failed.
pub fn render_csv(rows: &[ScanRow]) -> String {
    let with_error = rows.iter().any(|r| r.error.is_some());
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec!["param", "dh", "theta", "phi"];
    if with_error {
        header.push("error");
    }
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![format_number(r.param), csv_cell(r.dh), csv_cell(r.theta), csv_cell(r.phi)];
        if with_error {
            rec.push(r.error.clone().unwrap_or_default());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}
