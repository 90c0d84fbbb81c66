//! Scenario configuration (strict JSON), the built-in catalog, and the glue
//! that turns a config into a section, an initial state and a trajectory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::atlas::{BundleAtlas, ChartId};
use crate::error::{Error, Result};
use crate::expr::{hamiltonian_signature, herglotz_signature, lagrangian_signature, parse};
use crate::integrate::{integrate, IntegratorOptions, Method, Trajectory};
use crate::legendre::Region;
use crate::output::{write_trajectory, Format};
use crate::section::{ScalarSection, SectionKind};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleKind {
    Trivial,
    Moebius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub kind: BundleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl BundleSpec {
    pub fn atlas(&self) -> Result<BundleAtlas> {
        match (self.kind, self.dim) {
            (BundleKind::Trivial, Some(n)) if n > 0 => Ok(BundleAtlas::trivial(n)),
            (BundleKind::Trivial, _) => Err(Error::config("bundle.dim", "trivial bundles need dim >= 1")),
            (BundleKind::Moebius, None | Some(1)) => Ok(BundleAtlas::moebius()),
            (BundleKind::Moebius, Some(_)) => Err(Error::config("bundle.dim", "the Moebius bundle has dim 1")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Hamiltonian,
    Lagrangian,
    Herglotz,
}

impl Side {
    pub fn kind(self) -> SectionKind {
        match self {
            Side::Hamiltonian => SectionKind::Hamiltonian,
            Side::Lagrangian => SectionKind::Lagrangian,
            Side::Herglotz => SectionKind::Herglotz,
        }
    }

    fn name(self) -> &'static str {
        self.kind().name()
    }
}

/// Either a built-in section name or a DSL expression, with named scalar
/// parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub chart: ChartId,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xd: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: MethodName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec { method: MethodName::Rk45, step: None, abs_tol: None, rel_tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { path: PathBuf::from("trajectory.csv"), format: Format::Csv }
    }
}

/// A complete simulation scenario. The section lives under the key named by
/// `side`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bundle: BundleSpec,
    pub side: Side,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herglotz: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub duration: f64,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Maps a serde_json error to a config error naming the offending field when
/// serde reports one.
pub(crate) fn json_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let field = ["unknown field `", "missing field `", "unknown variant `"]
        .iter()
        .find_map(|prefix| msg.strip_prefix(prefix).and_then(|rest| rest.split('`').next()))
        .unwrap_or("config")
        .to_string();
    Error::Config { field, message: msg }
}

fn param(spec: &SectionSpec, name: &str, default: f64) -> f64 {
    spec.params.get(name).copied().unwrap_or(default)
}

fn check_params(spec: &SectionSpec, field: &str, allowed: &[&str]) -> Result<()> {
    match spec.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::config(format!("{field}.params.{k}"), format!("expected one of {allowed:?}"))),
        None => Ok(()),
    }
}

/// Builds the section described by `spec` for `side` on `atlas`.
pub fn build_section(atlas: Arc<BundleAtlas>, side: Side, spec: &SectionSpec) -> Result<ScalarSection> {
    let field = side.name();
    match (&spec.builtin, &spec.expr) {
        (Some(_), Some(_)) | (None, None) => {
            Err(Error::config(field, "give exactly one of `builtin` or `expr`"))
        }
        (Some(name), None) => builtin_section(atlas, side, name, spec),
        (None, Some(src)) => {
            if atlas.kind() != crate::atlas::AtlasKind::Trivial {
                return Err(Error::config(format!("{field}.expr"), "expressions need the trivial bundle"));
            }
            let n = atlas.dim();
            let sig = match side {
                Side::Hamiltonian => hamiltonian_signature(n),
                Side::Lagrangian => lagrangian_signature(n),
                Side::Herglotz => herglotz_signature(n),
            };
            let sig: Vec<&str> = sig.iter().map(String::as_str).collect();
            let names: Vec<&str> = spec.params.keys().map(String::as_str).collect();
            let expr = parse(src, &sig, &names).map_err(|e| Error::config(format!("{field}.expr"), e.to_string()))?;
            ScalarSection::from_expr(side.kind(), atlas, expr, spec.params.values().copied().collect())
        }
    }
}

fn builtin_section(atlas: Arc<BundleAtlas>, side: Side, name: &str, spec: &SectionSpec) -> Result<ScalarSection> {
    let field = format!("{}.builtin", side.name());
    let trivial = atlas.kind() == crate::atlas::AtlasKind::Trivial;
    let mismatch = |what: &str| Err(Error::config(field.clone(), format!("`{name}` {what}")));
    match name {
        "quadratic-riemannian" => {
            check_params(spec, &field, &["g"])?;
            if !trivial {
                return mismatch("needs the trivial bundle");
            }
            let g = param(spec, "g", 1.0);
            if !(g > 0.0) {
                return Err(Error::config(format!("{field}.params.g"), "must be positive"));
            }
            let metric = DMatrix::identity(atlas.dim(), atlas.dim()) * g;
            match side {
                Side::Lagrangian => Ok(ScalarSection::quadratic_lagrangian(atlas, metric)),
                Side::Hamiltonian => ScalarSection::quadratic_hamiltonian(atlas, &metric),
                Side::Herglotz => mismatch("has no herglotz form"),
            }
        }
        "damped-free" | "damped-herglotz" => {
            check_params(spec, &field, &["m", "lambda"])?;
            if !trivial {
                return mismatch("needs the trivial bundle");
            }
            let (m, lambda) = (param(spec, "m", 1.0), param(spec, "lambda", 0.5));
            if !(m > 0.0) {
                return Err(Error::config(format!("{field}.params.m"), "must be positive"));
            }
            match (name, side) {
                ("damped-free", Side::Hamiltonian) => Ok(ScalarSection::damped_hamiltonian(atlas, m, lambda)),
                ("damped-herglotz", Side::Herglotz) => Ok(ScalarSection::damped_herglotz(atlas, m, lambda)),
                _ => mismatch(&format!("is not a {} section", side.name())),
            }
        }
        "moebius-hyperregular" => {
            check_params(spec, &field, &[])?;
            match side {
                Side::Lagrangian => ScalarSection::moebius_lagrangian(atlas),
                Side::Hamiltonian => ScalarSection::moebius_hamiltonian(atlas),
                Side::Herglotz => mismatch("has no herglotz form"),
            }
            .map_err(|_| Error::config("bundle.kind", format!("`{name}` needs the moebius bundle")))
        }
        _ => Err(Error::config(field, format!("unknown built-in `{name}`, see list-scenarios"))),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(json_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::config("duration", "must be a positive finite number"));
        }
        let present = [
            (Side::Hamiltonian, self.hamiltonian.is_some()),
            (Side::Lagrangian, self.lagrangian.is_some()),
            (Side::Herglotz, self.herglotz.is_some()),
        ];
        for (side, there) in present {
            if there != (side == self.side) {
                let msg = if there { "does not match `side`" } else { "missing section for `side`" };
                return Err(Error::config(side.name(), msg));
            }
        }
        match self.integrator.method {
            MethodName::Rk4 => match self.integrator.step {
                Some(h) if h > 0.0 && h.is_finite() => {}
                _ => return Err(Error::config("integrator.step", "rk4 needs a positive step")),
            },
            MethodName::Rk45 => {
                for (name, tol) in [("integrator.abs_tol", self.integrator.abs_tol), ("integrator.rel_tol", self.integrator.rel_tol)] {
                    if matches!(tol, Some(v) if !(v > 0.0) || !v.is_finite()) {
                        return Err(Error::config(name, "must be a positive number"));
                    }
                }
            }
        }
        self.bundle.atlas()?;
        Ok(())
    }

    pub fn section_spec(&self) -> &SectionSpec {
        match self.side {
            Side::Hamiltonian => self.hamiltonian.as_ref(),
            Side::Lagrangian => self.lagrangian.as_ref(),
            Side::Herglotz => self.herglotz.as_ref(),
        }
        .expect("validated config carries its section")
    }

    pub fn section(&self) -> Result<ScalarSection> {
        build_section(Arc::new(self.bundle.atlas()?), self.side, self.section_spec())
    }

    /// The initial flat state, taken from the config or from the built-in's
    /// defaults.
    pub fn initial_state(&self) -> Result<(ChartId, Vec<f64>)> {
        let n = self.bundle.atlas()?.dim();
        let init = match &self.initial {
            Some(i) => i.clone(),
            None => self
                .section_spec()
                .builtin
                .as_deref()
                .and_then(|name| builtin_scenarios().into_iter().find(|b| b.name == name))
                .and_then(|b| b.config.initial)
                .filter(|i| i.x.len() == n)
                .ok_or_else(|| Error::config("initial", "required for this section"))?,
        };
        let vec_len = |name: &str, v: &Option<Vec<f64>>| -> Result<Vec<f64>> {
            match v {
                Some(v) if v.len() == n => Ok(v.clone()),
                Some(_) => Err(Error::config(format!("initial.{name}"), format!("expected {n} components"))),
                None => Err(Error::config(format!("initial.{name}"), "missing")),
            }
        };
        let forbid = |name: &str, there: bool| -> Result<()> {
            if there {
                Err(Error::config(format!("initial.{name}"), format!("not a {} coordinate", self.side.name())))
            } else {
                Ok(())
            }
        };
        if init.x.len() != n {
            return Err(Error::config("initial.x", format!("expected {n} components")));
        }
        let (a, b) = match self.side {
            Side::Hamiltonian => {
                forbid("xd", init.xd.is_some())?;
                forbid("t", init.t.is_some())?;
                (vec_len("p", &init.p)?, init.z.ok_or_else(|| Error::config("initial.z", "missing"))?)
            }
            Side::Lagrangian => {
                forbid("p", init.p.is_some())?;
                forbid("z", init.z.is_some())?;
                (vec_len("xd", &init.xd)?, init.t.ok_or_else(|| Error::config("initial.t", "missing"))?)
            }
            Side::Herglotz => {
                forbid("p", init.p.is_some())?;
                forbid("t", init.t.is_some())?;
                (vec_len("xd", &init.xd)?, init.z.ok_or_else(|| Error::config("initial.z", "missing"))?)
            }
        };
        let state = [init.x, a, vec![b]].concat();
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("initial", "components must be finite"));
        }
        Ok((init.chart, state))
    }

    pub fn integrator_options(&self) -> IntegratorOptions {
        let spec = &self.integrator;
        let method = match spec.method {
            MethodName::Rk4 => Method::Rk4 { step: spec.step.unwrap_or(0.01) },
            MethodName::Rk45 => Method::Rk45 {
                abs_tol: spec.abs_tol.unwrap_or(DEFAULT_TOLERANCE),
                rel_tol: spec.rel_tol.unwrap_or(DEFAULT_TOLERANCE),
            },
        };
        IntegratorOptions::new(method, self.duration)
    }

    pub fn integrate(&self) -> Result<Trajectory> {
        let section = self.section()?;
        let (chart, state) = self.initial_state()?;
        if section.atlas().chart(chart).is_err() {
            return Err(Error::config("initial.chart", format!("no chart {chart}")));
        }
        integrate(&section, chart, &state, &self.integrator_options())
    }
}

/// Loads `path`, integrates, and writes the trajectory. Returns the
/// trajectory and the data file written.
pub fn run_scenario(path: &Path, out: Option<&Path>, format: Option<Format>) -> Result<(Trajectory, PathBuf)> {
    let cfg = ScenarioConfig::from_path(path)?;
    let traj = cfg.integrate()?;
    let format = format.unwrap_or(cfg.output.format);
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| match cfg.output.path.is_relative() {
        true => path.parent().unwrap_or(Path::new(".")).join(&cfg.output.path),
        false => cfg.output.path.clone(),
    });
    write_trajectory(&traj, &target, format)?;
    Ok((traj, target))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinScenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: ScenarioConfig,
}

fn builtin_config(bundle: BundleSpec, side: Side, name: &str, params: &[(&str, f64)], initial: InitialSpec, duration: f64) -> ScenarioConfig {
    let spec = SectionSpec {
        builtin: Some(name.to_string()),
        expr: None,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    };
    let mut cfg = ScenarioConfig {
        bundle,
        side,
        hamiltonian: None,
        lagrangian: None,
        herglotz: None,
        initial: Some(initial),
        integrator: IntegratorSpec::default(),
        duration,
        output: OutputSpec { path: PathBuf::from(format!("{name}.csv")), format: Format::Csv },
    };
    match side {
        Side::Hamiltonian => cfg.hamiltonian = Some(spec),
        Side::Lagrangian => cfg.lagrangian = Some(spec),
        Side::Herglotz => cfg.herglotz = Some(spec),
    }
    cfg
}

/// The built-in catalog with ready-to-run default configs.
pub fn builtin_scenarios() -> Vec<BuiltinScenario> {
    let trivial = BundleSpec { kind: BundleKind::Trivial, dim: Some(1) };
    vec![
        BuiltinScenario {
            name: "quadratic-riemannian",
            summary: "l = (g|v|^2 + t^2)/2 on the trivial bundle; param g (default 1); start x=0, xd=1, t=0.5",
            config: builtin_config(
                trivial.clone(),
                Side::Lagrangian,
                "quadratic-riemannian",
                &[("g", 1.0)],
                InitialSpec { chart: ChartId(0), x: vec![0.0], xd: Some(vec![1.0]), t: Some(0.5), ..Default::default() },
                2.0,
            ),
        },
        BuiltinScenario {
            name: "damped-free",
            summary: "h = |p|^2/(2m) + lambda z; params m=1, lambda=0.5; start x=0, p=1, z=0",
            config: builtin_config(
                trivial.clone(),
                Side::Hamiltonian,
                "damped-free",
                &[("m", 1.0), ("lambda", 0.5)],
                InitialSpec { chart: ChartId(0), x: vec![0.0], p: Some(vec![1.0]), z: Some(0.0), ..Default::default() },
                10.0,
            ),
        },
        BuiltinScenario {
            name: "damped-herglotz",
            summary: "herglotz l = m|v|^2/2 - lambda z; params m=1, lambda=0.5; start x=0, xd=1, z=0",
            config: builtin_config(
                trivial,
                Side::Herglotz,
                "damped-herglotz",
                &[("m", 1.0), ("lambda", 0.5)],
                InitialSpec { chart: ChartId(0), x: vec![0.0], xd: Some(vec![1.0]), z: Some(0.0), ..Default::default() },
                10.0,
            ),
        },
        BuiltinScenario {
            name: "moebius-hyperregular",
            summary: "l = cos x (xd^2 - t^2)/2 + sin x t xd on the Moebius bundle; start chart 0, x=1, xd=1, t=0",
            config: builtin_config(
                BundleSpec { kind: BundleKind::Moebius, dim: None },
                Side::Lagrangian,
                "moebius-hyperregular",
                &[],
                InitialSpec { chart: ChartId(0), x: vec![1.0], xd: Some(vec![1.0]), t: Some(0.0), ..Default::default() },
                3.0,
            ),
        },
    ]
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|b| b.name == name).map(|b| b.config)
}

/// Just a bundle and a section, e.g. for foreign callers that evaluate
/// sections without integrating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    pub bundle: BundleSpec,
    pub side: Side,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herglotz: Option<SectionSpec>,
}

pub fn section_from_json(text: &str) -> Result<ScalarSection> {
    let cfg: SectionConfig = serde_json::from_str(text).map_err(json_error)?;
    let spec = match cfg.side {
        Side::Hamiltonian => cfg.hamiltonian.as_ref(),
        Side::Lagrangian => cfg.lagrangian.as_ref(),
        Side::Herglotz => cfg.herglotz.as_ref(),
    }
    .ok_or_else(|| Error::config(cfg.side.name(), "missing section for `side`"))?;
    build_section(Arc::new(cfg.bundle.atlas()?), cfg.side, spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    #[serde(default)]
    pub chart: ChartId,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub path: PathBuf,
    #[serde(default = "default_table_points")]
    pub points: usize,
}

fn default_table_points() -> usize {
    5
}

fn default_samples() -> usize {
    crate::legendre::DEFAULT_PROBE_SAMPLES
}

/// Input of the `legendre` subcommand: a section, a region over its
/// arguments, and an optional grid tabulation of the transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegendreConfig {
    pub bundle: BundleSpec,
    pub side: Side,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<SectionSpec>,
    pub region: RegionSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSpec>,
}

impl LegendreConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let cfg: LegendreConfig = serde_json::from_str(&text).map_err(json_error)?;
        Ok(cfg)
    }

    pub fn section(&self) -> Result<ScalarSection> {
        let spec = match self.side {
            Side::Hamiltonian => self.hamiltonian.as_ref(),
            Side::Lagrangian => self.lagrangian.as_ref(),
            Side::Herglotz => return Err(Error::config("side", "legendre works on hamiltonian or lagrangian sections")),
        }
        .ok_or_else(|| Error::config(self.side.name(), "missing section for `side`"))?;
        let section = build_section(Arc::new(self.bundle.atlas()?), self.side, spec)?;
        let want = 2 * section.dim() + 1;
        if self.region.lo.len() != want || self.region.hi.len() != want {
            return Err(Error::config("region", format!("bounds need {want} components")));
        }
        Ok(section)
    }

    pub fn region(&self) -> Result<Region> {
        Region::new(self.region.chart, self.region.lo.clone(), self.region.hi.clone())
            .map_err(|e| Error::config("region", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAMPED: &str = r#"{
        "bundle": {"kind": "trivial", "dim": 1},
        "side": "hamiltonian",
        "hamiltonian": {"builtin": "damped-free", "params": {"m": 1, "lambda": 0.5}},
        "initial": {"x": [0], "p": [1], "z": 0},
        "integrator": {"method": "rk45", "abs_tol": 1e-9, "rel_tol": 1e-9},
        "duration": 1,
        "output": {"path": "out.csv", "format": "csv"}
    }"#;

    #[test]
    fn parses_and_runs() {
        let cfg = ScenarioConfig::from_json(DAMPED).unwrap();
        let t = cfg.integrate().unwrap();
        assert!((t.last().state[1] - (-0.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn negative_duration_names_the_field() {
        let text = DAMPED.replace("\"duration\": 1", "\"duration\": -1");
        match ScenarioConfig::from_json(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "duration"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = DAMPED.replace("\"duration\"", "\"durration\": 2, \"duration\"");
        match ScenarioConfig::from_json(&text) {
            Err(Error::Config { field, message }) => {
                assert_eq!(field, "durration");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn section_must_match_side() {
        let text = DAMPED.replace("\"side\": \"hamiltonian\"", "\"side\": \"lagrangian\"");
        assert!(matches!(ScenarioConfig::from_json(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn expressions_need_the_trivial_bundle() {
        let spec = SectionSpec { expr: Some("xd1^2/2".into()), ..Default::default() };
        let r = build_section(Arc::new(BundleAtlas::moebius()), Side::Lagrangian, &spec);
        assert!(matches!(r, Err(Error::Config { .. })));
    }

    #[test]
    fn expression_with_params() {
        let spec = SectionSpec {
            expr: Some("p1^2/(2*m) + k*z".into()),
            params: [("m".to_string(), 2.0), ("k".to_string(), 0.25)].into(),
            ..Default::default()
        };
        let h = build_section(Arc::new(BundleAtlas::trivial(1)), Side::Hamiltonian, &spec).unwrap();
        assert_eq!(h.value(ChartId(0), &[0.0, 2.0, 4.0]).unwrap(), 2.0);
    }

    #[test]
    fn catalog_defaults_run() {
        let all = builtin_scenarios();
        assert_eq!(all.len(), 4);
        for b in all {
            let text = serde_json::to_string(&b.config).unwrap();
            let cfg = ScenarioConfig::from_json(&text).unwrap();
            assert_eq!(cfg, b.config);
            cfg.integrate().unwrap_or_else(|e| panic!("{}: {e}", b.name));
        }
    }

    #[test]
    fn wrong_initial_coordinates() {
        let text = DAMPED.replace("\"p\": [1]", "\"xd\": [1]");
        let cfg = ScenarioConfig::from_json(&text).unwrap();
        assert!(matches!(cfg.initial_state(), Err(Error::Config { field, .. }) if field == "initial.xd"));
    }
}
