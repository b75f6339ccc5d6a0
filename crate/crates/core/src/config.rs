//! Flat `key = value` configuration files.
//!
//! `#` starts a comment, blank lines are ignored, and every key must be
//! consumed by whoever reads the file: leftovers are reported as errors with
//! their line number.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::str::FromStr;

use crate::error::{Result, ZkError};
use crate::io::TraceColumn;
use crate::solver::SimulationConfig;

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

/// Parsed key/value pairs plus a record of which keys were read.
#[derive(Debug, Default)]
pub struct Params {
    entries: Vec<Entry>,
    used: RefCell<BTreeSet<String>>,
}

fn config_err<T>(line: usize, reason: impl Into<String>) -> Result<T> {
    Err(ZkError::Config {
        line,
        reason: reason.into(),
    })
}

impl Params {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return config_err(line, format!("expected `key = value`, got `{body}`"));
            };
            let (key, value) = (k.trim(), v.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return config_err(line, format!("malformed key `{key}`"));
            }
            if value.is_empty() {
                return config_err(line, format!("key `{key}` has no value"));
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return config_err(line, format!("duplicate key `{key}` (first set on line {})", prev.line));
            }
            entries.push(Entry {
                line,
                key: key.to_string(),
                value: value.to_string(),
            });
        }
        Ok(Self {
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    /// Adds or replaces a value, as command-line flags do.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => self.entries.push(Entry {
                line: 0,
                key: key.to_string(),
                value,
            }),
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.entries.iter().find(|e| e.key == key) else {
            return Ok(None);
        };
        self.used.borrow_mut().insert(key.to_string());
        e.value
            .parse()
            .map(Some)
            .map_err(|err| ZkError::Config {
                line: e.line,
                reason: format!("bad value `{}` for `{key}`: {err}", e.value),
            })
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.get::<String>(key)? else {
            return Ok(default);
        };
        let line = self.line_of(key);
        raw.split(',')
            .map(|p| {
                p.trim().parse().map_err(|err: T::Err| ZkError::Config {
                    line,
                    reason: format!("bad list item `{}` for `{key}`: {err}", p.trim()),
                })
            })
            .collect()
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.iter().find(|e| e.key == key).map_or(0, |e| e.line)
    }

    /// Fails on the first key nobody read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|e| !used.contains(&e.key)) {
            Some(e) => config_err(e.line, format!("unknown key `{}`", e.key)),
            None => Ok(()),
        }
    }
}

/// `<nx>x<ny>`.
pub fn parse_grid_size(s: &str) -> Result<(usize, usize)> {
    let bad = || ZkError::InvalidInput(format!("grid `{s}` is not of the form <nx>x<ny>"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Reads the simulation keys into `cfg`, leaving other keys for the caller.
pub fn apply_simulation(p: &Params, cfg: &mut SimulationConfig) -> Result<()> {
    if let Some(g) = p.get::<String>("grid")? {
        let (nx, ny) = parse_grid_size(&g).map_err(|e| ZkError::Config {
            line: p.line_of("grid"),
            reason: e.to_string(),
        })?;
        cfg.nx = nx;
        cfg.ny = ny;
    }
    if let Some(l) = p.get::<f64>("box")? {
        cfg.half_length_x = l;
        cfg.half_length_y = l;
    }
    cfg.nx = p.get_or("nx", cfg.nx)?;
    cfg.ny = p.get_or("ny", cfg.ny)?;
    cfg.half_length_x = p.get_or("half_length_x", cfg.half_length_x)?;
    cfg.half_length_y = p.get_or("half_length_y", cfg.half_length_y)?;
    cfg.t_final = p.get_or("t_final", cfg.t_final)?;
    if let Some(dt) = p.get::<f64>("dt")? {
        cfg.dt = Some(dt);
    }
    cfg.substeps = p.get_or("substeps", cfg.substeps)?;
    cfg.snapshots = p.get_or("snapshots", cfg.snapshots)?;
    cfg.scheme = p.get_or("scheme", cfg.scheme)?;
    cfg.form = p.get_or("form", cfg.form)?;
    cfg.dealias = p.get_or("dealias", cfg.dealias)?;
    cfg.nonlinear = p.get_or("nonlinear", cfg.nonlinear)?;
    cfg.tolerance = p.get_or("tolerance", cfg.tolerance)?;
    cfg.max_iterations = p.get_or("max_iterations", cfg.max_iterations)?;
    cfg.weight_s = p.get_or("weight_s", cfg.weight_s)?;
    cfg.weight_n = p.get_or("weight_n", cfg.weight_n)?;
    cfg.validate()
}

/// Gaussian initial datum `amplitude · e^{-|x-c|²/2σ²}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InitialData {
    pub amplitude: f64,
    pub sigma: f64,
    pub centre: (f64, f64),
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            amplitude: 0.5,
            sigma: 1.0,
            centre: (0.0, 0.0),
        }
    }
}

/// Everything `simulate` and `propagate` need.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub sim: SimulationConfig,
    pub initial: InitialData,
    pub trace: Vec<TraceColumn>,
}

impl RunConfig {
    pub fn from_params(p: &Params) -> Result<Self> {
        let mut sim = SimulationConfig::default();
        apply_simulation(p, &mut sim)?;
        let d = InitialData::default();
        let initial = InitialData {
            amplitude: p.get_or("amplitude", d.amplitude)?,
            sigma: p.get_or("sigma", d.sigma)?,
            centre: (p.get_or("centre_x", d.centre.0)?, p.get_or("centre_y", d.centre.1)?),
        };
        if !(initial.sigma > 0.0) {
            return config_err(p.line_of("sigma"), "sigma must be positive");
        }
        let trace = p.get_list("trace", vec![TraceColumn::Sobolev(1.0)])?;
        p.finish()?;
        Ok(Self { sim, initial, trace })
    }
}

impl FromStr for RunConfig {
    type Err = ZkError;
    fn from_str(text: &str) -> Result<Self> {
        Self::from_params(&Params::parse(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::SymbolKind;

    #[test]
    fn parses_comments_and_values() {
        let text = "# run\nnx = 64  # inline\nny=32\n\nform = symmetrized\nbox = 12.5\ntrace = hs:2, poly:1\n";
        let r: RunConfig = text.parse().unwrap();
        assert_eq!((r.sim.nx, r.sim.ny), (64, 32));
        assert_eq!(r.sim.form, SymbolKind::Symmetrized);
        assert_eq!(r.sim.half_length_y, 12.5);
        assert_eq!(r.trace.len(), 2);
    }

    #[test]
    fn errors_carry_lines() {
        let unknown = "nx = 64\nbogus = 1\n".parse::<RunConfig>();
        assert!(matches!(unknown, Err(ZkError::Config { line: 2, .. })), "{unknown:?}");
        assert!(matches!(Params::parse("a = 1\nnonsense"), Err(ZkError::Config { line: 2, .. })));
        assert!(matches!(Params::parse("a = 1\na = 2"), Err(ZkError::Config { line: 2, .. })));
        assert!(matches!("nx = many".parse::<RunConfig>(), Err(ZkError::Config { line: 1, .. })));
    }

    #[test]
    fn overrides_and_grid_sizes() {
        let mut p = Params::parse("grid = 32x64").unwrap();
        p.set("t_final", "0.5");
        let r = RunConfig::from_params(&p).unwrap();
        assert_eq!((r.sim.nx, r.sim.ny, r.sim.t_final), (32, 64, 0.5));
        assert!(parse_grid_size("64by64").is_err());
    }
}
