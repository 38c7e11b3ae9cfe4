//! Unit definitions and clamp scenarios.
//!
//! Both are TOML documents. The prototypes ship inside the crate and can
//! be named directly (`prototype_small`, `prototype_large`,
//! `ideal_small`, `clamp_paper`); anything else is read as a path.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::clamp::ClampScenario;
use crate::error::{Error, Result};
use crate::io::CurveSpec;
use crate::magnetic_spring::MagneticSpringPair;
use crate::unit_sim::UnitConfig;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Weight in newtons of a mass given in grams.
pub fn grams_to_newtons(grams: f64) -> f64 {
    grams * STANDARD_GRAVITY / 1000.0
}

const BUILTIN: &[(&str, &str)] = &[
    (
        "prototype_small",
        include_str!("../fixtures/prototype_small.toml"),
    ),
    (
        "prototype_large",
        include_str!("../fixtures/prototype_large.toml"),
    ),
    ("ideal_small", include_str!("../fixtures/ideal_small.toml")),
    ("clamp_paper", include_str!("../fixtures/clamp_paper.cfg")),
];

/// Names accepted in place of a fixture path.
pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

/// Text of a built-in fixture, also accepting its file name.
pub fn builtin(name: &str) -> Option<&'static str> {
    let stem = name
        .strip_suffix(".toml")
        .or_else(|| name.strip_suffix(".cfg"))
        .unwrap_or(name);
    BUILTIN.iter().find(|(n, _)| *n == stem).map(|(_, t)| *t)
}

/// Fixture text, its label for messages, and the directory relative paths
/// resolve against. An existing file wins over a built-in of the same name.
fn source(name: &str) -> Result<(String, PathBuf, Option<PathBuf>)> {
    let path = Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return Ok((
            text,
            path.to_path_buf(),
            path.parent().map(Path::to_path_buf),
        ));
    }
    let file_name = path.file_name().and_then(|f| f.to_str()).unwrap_or(name);
    if let Some(text) = builtin(file_name) {
        return Ok((text.to_string(), PathBuf::from(file_name), None));
    }
    Err(Error::io(
        path,
        std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!(
                "no such file or built-in fixture (built-ins: {})",
                builtin_names().collect::<Vec<_>>().join(", ")
            ),
        ),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitFile {
    name: Option<String>,
    stroke_mm: f64,
    unit_mass_g: f64,
    rod_mass_g: f64,
    #[serde(default)]
    jig_mass_g: f64,
    #[serde(default)]
    hook_slack_mm: f64,
    attraction: CurveSpec,
    repulsion: CurveSpec,
}

/// A loaded unit definition.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitFixture {
    pub name: String,
    pub config: UnitConfig<f64>,
}

impl UnitFixture {
    pub fn pair(&self) -> &MagneticSpringPair<f64> {
        &self.config.pair
    }
}

pub fn parse_unit(text: &str, label: &Path, base: Option<&Path>) -> Result<UnitFixture> {
    let f: UnitFile = toml::from_str(text).map_err(|e| Error::parse(label, e.message()))?;
    let attraction = f.attraction.resolve(label, base, None)?;
    let repulsion = f.repulsion.resolve(label, base, Some(&attraction))?;
    let pair = MagneticSpringPair::new(
        attraction,
        repulsion,
        f.stroke_mm,
        grams_to_newtons(f.rod_mass_g),
        grams_to_newtons(f.unit_mass_g),
    )?;
    let config = UnitConfig::from_pair(pair, grams_to_newtons(f.jig_mass_g))?
        .with_hook_slack(f.hook_slack_mm)?;
    let name = f.name.unwrap_or_else(|| {
        label
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("unit")
            .to_string()
    });
    Ok(UnitFixture { name, config })
}

/// Loads a unit by built-in name or path.
pub fn load_unit(name: &str) -> Result<UnitFixture> {
    let (text, label, base) = source(name)?;
    parse_unit(&text, &label, base.as_deref())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ScenarioFile {
    unit: String,
    bias_N: f64,
    control_force_N: f64,
    net_without_N: f64,
    net_with_N: f64,
    interference_mm: f64,
}

pub fn parse_scenario(text: &str, label: &Path, base: Option<&Path>) -> Result<ClampScenario<f64>> {
    let f: ScenarioFile = toml::from_str(text).map_err(|e| Error::parse(label, e.message()))?;
    let unit_ref = match base.map(|b| b.join(&f.unit)) {
        Some(p) if p.is_file() => p.to_string_lossy().into_owned(),
        _ => f.unit.clone(),
    };
    let unit = load_unit(&unit_ref)?;
    ClampScenario::new(
        unit.config,
        f.bias_N,
        f.control_force_N,
        f.net_without_N,
        f.net_with_N,
        f.interference_mm,
    )
}

/// Loads a clamp scenario by built-in name or path.
pub fn load_scenario(name: &str) -> Result<ClampScenario<f64>> {
    let (text, label, base) = source(name)?;
    parse_scenario(&text, &label, base.as_deref())
}
