//! Problem instances and their flat `key = value` configuration format.
//!
//! One assignment per line, `#` starts a comment, keys are fixed. Angles are
//! radians, the noise uncertainty is given in dB (converted to linear
//! internally), lengths are in wavelength units. `Scenario::to_config_string`
//! round-trips through `Scenario::parse` to an identical value.

use crate::geometry::{AngleConvention, ArraySpec, GeometryError, GridSize};
use crate::metrics::{MetricsError, NoiseModel};
use crate::optimizer::{DpgdSettings, DEFAULT_ORACLE_BUDGET};
use crate::sweep::{Method, SolveOptions, SweepAxis};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { key: String, line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn geometry_key(err: &GeometryError) -> &'static str {
    match err {
        GeometryError::InvalidAntennaCount => "n_antennas",
        GeometryError::InvalidWavelength(_) => "wavelength",
        GeometryError::InvalidMinSpacing(_) => "d_min",
        GeometryError::InvalidScaleFactor(_) => "l0",
        _ => "grid_sizes",
    }
}

/// Parsed `key = value` pairs with line numbers, consumed key by key.
struct KeyMap {
    entries: HashMap<String, (String, usize)>,
}

impl KeyMap {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if entries.insert(key.clone(), (value, line)).is_some() {
                return Err(ConfigError::DuplicateKey { key, line });
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(v, _)| v)
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::MissingKey {
            key: key.to_string(),
        })
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some((key, (_, line))) = self
            .entries
            .into_iter()
            .min_by_key(|(_, (_, line))| *line)
        {
            return Err(ConfigError::UnknownKey { key, line });
        }
        Ok(())
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64, ConfigError> {
    raw.parse::<f64>()
        .map_err(|_| invalid(key, format!("`{raw}` is not a number")))
}

fn parse_usize(key: &str, raw: &str) -> Result<usize, ConfigError> {
    raw.parse::<usize>()
        .map_err(|_| invalid(key, format!("`{raw}` is not a non-negative integer")))
}

fn parse_u64(key: &str, raw: &str) -> Result<u64, ConfigError> {
    raw.parse::<u64>()
        .map_err(|_| invalid(key, format!("`{raw}` is not a non-negative integer")))
}

fn parse_finite(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let v = parse_f64(key, raw)?;
    if !v.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(v)
}

fn parse_grid_sizes(key: &str, raw: &str, n: usize) -> Result<Vec<GridSize>, ConfigError> {
    let tokens: Vec<&str> = raw.split(',').map(str::trim).collect();
    let parse_one = |tok: &str| -> Result<GridSize, ConfigError> {
        if tok.eq_ignore_ascii_case("continuous") {
            Ok(GridSize::Continuous)
        } else {
            let k = parse_usize(key, tok)?;
            if k == 0 {
                return Err(invalid(key, "grid sizes must be at least 1"));
            }
            Ok(GridSize::Points(k))
        }
    };
    if tokens.len() == 1 {
        return Ok(vec![parse_one(tokens[0])?; n]);
    }
    if tokens.len() != n {
        return Err(invalid(
            key,
            format!("expected 1 or {n} entries, got {}", tokens.len()),
        ));
    }
    tokens.iter().map(|t| parse_one(t)).collect()
}

fn parse_convention(key: &str, raw: &str) -> Result<AngleConvention, ConfigError> {
    match raw.to_ascii_lowercase().as_str() {
        "difference" => Ok(AngleConvention::Difference),
        "sum" => Ok(AngleConvention::Sum),
        other => Err(invalid(key, format!("`{other}` is not `difference` or `sum`"))),
    }
}

/// Full problem instance: array, steering angles, noise model, rate and the
/// solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub array: ArraySpec,
    pub theta_b: f64,
    pub theta_w: f64,
    pub noise: NoiseModel,
    pub rate: f64,
    pub dpgd: DpgdSettings,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = KeyMap::parse(text)?;
        let scenario = Self::from_map(&mut map)?;
        map.finish()?;
        Ok(scenario)
    }

    fn from_map(map: &mut KeyMap) -> Result<Self, ConfigError> {
        let n = parse_usize("n_antennas", &map.require("n_antennas")?)?;
        if n == 0 {
            return Err(invalid("n_antennas", "must be at least 1"));
        }
        let wavelength = match map.take("wavelength") {
            Some(raw) => parse_finite("wavelength", &raw)?,
            None => 1.0,
        };
        let d_min = match map.take("d_min") {
            Some(raw) => parse_finite("d_min", &raw)?,
            None => wavelength / 2.0,
        };
        let l0 = parse_finite("l0", &map.require("l0")?)?;
        let grid_sizes = parse_grid_sizes("grid_sizes", &map.require("grid_sizes")?, n)?;
        let array = ArraySpec::new(n, wavelength, d_min, l0, grid_sizes)
            .map_err(|e| invalid(geometry_key(&e), e.to_string()))?;

        let theta_b = parse_finite("theta_b", &map.require("theta_b")?)?;
        let theta_w = parse_finite("theta_w", &map.require("theta_w")?)?;
        let rho_db = parse_finite("rho_db", &map.require("rho_db")?)?;
        let sigma0_sq = match map.take("sigma0_sq") {
            Some(raw) => parse_finite("sigma0_sq", &raw)?,
            None => 1.0,
        };
        let noise = NoiseModel::from_db(sigma0_sq, rho_db).map_err(|e| match e {
            MetricsError::InvalidNoisePower(_) => invalid("sigma0_sq", e.to_string()),
            _ => invalid("rho_db", e.to_string()),
        })?;

        let rate = parse_finite("rate", &map.require("rate")?)?;
        if rate <= 0.0 {
            return Err(invalid("rate", "must be positive"));
        }

        let defaults = DpgdSettings::default();
        let step_size = match map.take("step_size") {
            Some(raw) => parse_finite("step_size", &raw)?,
            None => defaults.step_size,
        };
        if step_size <= 0.0 {
            return Err(invalid("step_size", "must be positive"));
        }
        let tolerance = match map.take("tolerance") {
            Some(raw) => parse_finite("tolerance", &raw)?,
            None => defaults.tolerance,
        };
        if tolerance <= 0.0 {
            return Err(invalid("tolerance", "must be positive"));
        }
        let max_iterations = match map.take("max_iterations") {
            Some(raw) => parse_usize("max_iterations", &raw)?,
            None => defaults.max_iterations,
        };
        if max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        let angle_convention = match map.take("angle_convention") {
            Some(raw) => parse_convention("angle_convention", &raw)?,
            None => defaults.angle_convention,
        };

        Ok(Scenario {
            array,
            theta_b,
            theta_w,
            noise,
            rate,
            dpgd: DpgdSettings {
                step_size,
                tolerance,
                max_iterations,
                angle_convention,
            },
        })
    }

    /// Canonical configuration text; `parse` of the output reproduces `self`
    /// exactly.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let spec = &self.array;
        let _ = writeln!(out, "n_antennas = {}", spec.n_antennas());
        let _ = writeln!(out, "wavelength = {}", spec.wavelength());
        let _ = writeln!(out, "d_min = {}", spec.d_min());
        let _ = writeln!(out, "l0 = {}", spec.l0());
        let grids = spec.grid_sizes();
        let uniform = grids.iter().all(|g| *g == grids[0]);
        if uniform {
            let _ = writeln!(out, "grid_sizes = {}", grids[0]);
        } else {
            let rendered: Vec<String> = grids.iter().map(|g| g.to_string()).collect();
            let _ = writeln!(out, "grid_sizes = {}", rendered.join(","));
        }
        let _ = writeln!(out, "theta_b = {}", self.theta_b);
        let _ = writeln!(out, "theta_w = {}", self.theta_w);
        let _ = writeln!(out, "rho_db = {}", self.noise.rho_db());
        let _ = writeln!(out, "sigma0_sq = {}", self.noise.sigma0_sq());
        let _ = writeln!(out, "rate = {}", self.rate);
        let _ = writeln!(out, "step_size = {}", self.dpgd.step_size);
        let _ = writeln!(out, "tolerance = {}", self.dpgd.tolerance);
        let _ = writeln!(out, "max_iterations = {}", self.dpgd.max_iterations);
        let _ = writeln!(out, "angle_convention = {}", self.dpgd.angle_convention);
        out
    }
}

/// A sweep: a base scenario, one axis with its values, and the methods to
/// evaluate at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub base: Scenario,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub options: SolveOptions,
}

impl SweepPlan {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = KeyMap::parse(text)?;
        let base = Scenario::from_map(&mut map)?;

        let axis = match map.require("axis")?.to_ascii_lowercase().as_str() {
            "theta_w" => SweepAxis::ThetaW,
            "n" => SweepAxis::N,
            "rate" => SweepAxis::Rate,
            "rho_db" => SweepAxis::RhoDb,
            "l0" => SweepAxis::L0,
            "k" => SweepAxis::K,
            other => {
                return Err(invalid(
                    "axis",
                    format!("`{other}` is not one of theta_w, n, rate, rho_db, l0, k"),
                ))
            }
        };

        let raw_values = map.require("values")?;
        let mut values = Vec::new();
        for tok in raw_values.split(',').map(str::trim) {
            if tok.eq_ignore_ascii_case("continuous") || tok.eq_ignore_ascii_case("inf") {
                values.push(f64::INFINITY);
            } else {
                values.push(parse_f64("values", tok)?);
            }
        }
        if values.is_empty() {
            return Err(invalid("values", "must not be empty"));
        }
        let increasing = values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = values.windows(2).all(|w| w[0] > w[1]);
        if values.len() > 1 && !increasing && !decreasing {
            return Err(invalid("values", "must be strictly monotone"));
        }

        let mut methods = Vec::new();
        for tok in map.require("methods")?.split(',').map(str::trim) {
            methods.push(match tok.to_ascii_lowercase().as_str() {
                "ma_dpgd" => Method::MaDpgd,
                "ma_oracle" => Method::MaOracle,
                "fpa" => Method::Fpa,
                other => {
                    return Err(invalid(
                        "methods",
                        format!("`{other}` is not one of ma_dpgd, ma_oracle, fpa"),
                    ))
                }
            });
        }

        let defaults = SolveOptions::default();
        let starts = match map.take("starts") {
            Some(raw) => {
                let s = parse_usize("starts", &raw)?;
                if s == 0 {
                    return Err(invalid("starts", "must be at least 1"));
                }
                s
            }
            None => defaults.starts,
        };
        let seed = match map.take("seed") {
            Some(raw) => parse_u64("seed", &raw)?,
            None => defaults.seed,
        };
        let oracle_budget = match map.take("oracle_budget") {
            Some(raw) => parse_u64("oracle_budget", &raw)?,
            None => DEFAULT_ORACLE_BUDGET,
        };

        map.finish()?;
        Ok(SweepPlan {
            base,
            axis,
            values,
            methods,
            options: SolveOptions {
                starts,
                seed,
                max_iterations: None,
                oracle_budget,
            },
        })
    }
}
