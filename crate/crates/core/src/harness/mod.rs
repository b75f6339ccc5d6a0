//! Named verification experiments and their reports.
//!
//! Each experiment measures both sides of one estimate, fits the unknown
//! constant, and records pass/fail purely from the checks stored in the
//! report, so a saved report can be re-judged without rerunning anything.

mod dispersive;
mod inequality;
mod nonlinear;
mod spectral;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{parse_grid_size, Params};
use crate::error::{Result, ZkError};
use crate::fit::ConstantFit;
use crate::grid::Grid2D;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 1;

pub const EXPERIMENTS: [&str; 16] = [
    "unitarity",
    "decay",
    "strichartz",
    "local_smoothing",
    "maximal",
    "weighted_growth",
    "interpolation",
    "leibniz",
    "stein_bound",
    "stein_products",
    "norm_equivalence",
    "partition_unity",
    "symmetrization_equiv",
    "picard_contraction",
    "conservation",
    "persistence_audit",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    AtMost,
    Above,
}

impl Relation {
    pub fn holds(self, measured: f64, limit: f64) -> bool {
        match self {
            Relation::Below => measured < limit,
            Relation::AtMost => measured <= limit,
            Relation::Above => measured > limit,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::AtMost => "<=",
            Relation::Above => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when the measurement was not finite; such a check fails.
    pub measured: Option<f64>,
    pub relation: Relation,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, limit: f64) -> Self {
        let measured = measured.is_finite().then_some(measured);
        let passed = measured.is_some_and(|m| relation.holds(m, limit));
        Self {
            name: name.into(),
            measured,
            relation,
            limit,
            passed,
        }
    }

    fn consistent(&self) -> bool {
        self.passed == self.measured.is_some_and(|m| self.relation.holds(m, self.limit))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub name: String,
    pub fit: ConstantFit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub grid: Option<(usize, usize)>,
    pub half_lengths: Option<(f64, f64)>,
    /// Time window the measurements cover.
    pub window: Option<(f64, f64)>,
    pub seed: u64,
    /// Every parameter the experiment resolved, defaults included.
    pub parameters: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub constants: Vec<FittedConstant>,
    pub series: Vec<Series>,
    pub scalars: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub environment: Environment,
    pub wall_time_s: f64,
}

impl EstimateReport {
    fn new(name: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: name.to_string(),
            passed: false,
            checks: Vec::new(),
            constants: Vec::new(),
            series: Vec::new(),
            scalars: BTreeMap::new(),
            notes: Vec::new(),
            environment: Environment::default(),
            wall_time_s: 0.0,
        }
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, measured: f64, relation: Relation, limit: f64) {
        self.checks.push(Check::new(name, measured, relation, limit));
    }

    pub(crate) fn constant(&mut self, name: impl Into<String>, fit: ConstantFit) {
        self.constants.push(FittedConstant { name: name.into(), fit });
    }

    pub(crate) fn series(&mut self, name: impl Into<String>, x: Vec<f64>, y: Vec<f64>) {
        self.series.push(Series { name: name.into(), x, y });
    }

    /// Non-finite values are stored as notes, since JSON has no encoding for them.
    pub(crate) fn scalar(&mut self, name: impl Into<String>, v: f64) {
        let name = name.into();
        if v.is_finite() {
            self.scalars.insert(name, v);
        } else {
            self.notes.push(format!("{name} = {v}"));
        }
    }

    pub(crate) fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// The pass verdict as a function of the stored checks alone.
    pub fn verdict(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a report, refusing other schema versions and reports whose
    /// verdict disagrees with their own checks.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let version = raw.get("schema_version").and_then(|v| v.as_u64());
        match version {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(ZkError::InvalidInput(format!(
                    "report schema version {v} is not supported (this build reads version {SCHEMA_VERSION})"
                )))
            }
            None => return Err(ZkError::InvalidInput("report has no schema_version field".into())),
        }
        let report: Self = serde_json::from_value(raw)?;
        if report.checks.iter().any(|c| !c.consistent()) || report.passed != report.verdict() {
            return Err(ZkError::InvalidInput(format!(
                "report `{}` has a pass flag inconsistent with its checks",
                report.experiment
            )));
        }
        Ok(report)
    }

    /// One line per check.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let m = c.measured.map_or("non-finite".to_string(), |m| format!("{m:.4e}"));
                format!(
                    "{} {}: {} {} {:e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    m,
                    c.relation.symbol(),
                    c.limit
                )
            })
            .collect()
    }
}

/// Fixed-width table over several reports.
pub fn summary_table(reports: &[EstimateReport]) -> String {
    let mut out = format!("{:<22} {:<6} {:>7} {:>9}\n", "experiment", "result", "checks", "wall [s]");
    for r in reports {
        let ok = r.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!(
            "{:<22} {:<6} {:>3}/{:<3} {:>9.2}\n",
            r.experiment,
            if r.passed { "pass" } else { "FAIL" },
            ok,
            r.checks.len(),
            r.wall_time_s
        ));
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} experiments passed\n", reports.len()));
    out
}

#[derive(Debug, Default)]
pub struct ExperimentSpec {
    pub name: String,
    pub params: Params,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: Params::default(),
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_params(name: &str, params: Params, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            params,
            seed,
        }
    }
}

/// Parameter access that remembers the resolved values for the report.
pub(crate) struct Ctx<'a> {
    params: &'a Params,
    pub seed: u64,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Ctx<'_> {
    pub fn get<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let v = self.params.get_or(key, default)?;
        self.resolved.borrow_mut().insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn list<T: FromStr + Display>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let v = self.params.get_list(key, default)?;
        let text = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        self.resolved.borrow_mut().insert(key.to_string(), text);
        Ok(v)
    }

    /// `grid = <nx>x<ny>` and `box = <L>`.
    pub fn grid(&self, n: usize, half_length: f64) -> Result<Grid2D> {
        let (nx, ny) = match self.params.get::<String>("grid")? {
            Some(s) => parse_grid_size(&s)?,
            None => (n, n),
        };
        let l = self.params.get_or("box", half_length)?;
        self.resolved.borrow_mut().insert("grid".into(), format!("{nx}x{ny}"));
        self.resolved.borrow_mut().insert("box".into(), l.to_string());
        Grid2D::new(nx, ny, l, l)
    }

    /// Rejects parameters the experiment did not read.
    pub fn finish(&self) -> Result<()> {
        self.params.finish()
    }
}

/// Runs one named experiment. Deterministic in `(name, params, seed)`
/// apart from `wall_time_s`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<EstimateReport> {
    let name = spec.name.as_str();
    if !EXPERIMENTS.contains(&name) {
        return Err(ZkError::UnknownExperiment(spec.name.clone()));
    }
    let ctx = Ctx {
        params: &spec.params,
        seed: spec.params.get_or("seed", spec.seed)?,
        resolved: RefCell::new(BTreeMap::new()),
    };
    let mut rep = EstimateReport::new(name);
    let start = Instant::now();
    match name {
        "unitarity" => spectral::unitarity(&ctx, &mut rep),
        "partition_unity" => spectral::partition_unity(&ctx, &mut rep),
        "decay" => spectral::decay(&ctx, &mut rep),
        "local_smoothing" => dispersive::local_smoothing(&ctx, &mut rep),
        "strichartz" => dispersive::strichartz(&ctx, &mut rep),
        "maximal" => dispersive::maximal(&ctx, &mut rep),
        "weighted_growth" => dispersive::weighted_growth(&ctx, &mut rep),
        "interpolation" => inequality::interpolation(&ctx, &mut rep),
        "leibniz" => inequality::leibniz(&ctx, &mut rep),
        "stein_bound" => inequality::stein_bound(&ctx, &mut rep),
        "stein_products" => inequality::stein_products(&ctx, &mut rep),
        "norm_equivalence" => inequality::norm_equivalence(&ctx, &mut rep),
        "symmetrization_equiv" => nonlinear::symmetrization_equiv(&ctx, &mut rep),
        "picard_contraction" => nonlinear::picard_contraction(&ctx, &mut rep),
        "conservation" => nonlinear::conservation(&ctx, &mut rep),
        "persistence_audit" => nonlinear::persistence_audit(&ctx, &mut rep),
        _ => unreachable!("checked against EXPERIMENTS"),
    }
    .map_err(|e| match e {
        ZkError::InvalidInput(m) => ZkError::InvalidInput(format!("{name}: {m}")),
        other => other,
    })?;
    rep.wall_time_s = start.elapsed().as_secs_f64();
    rep.environment.seed = ctx.seed;
    rep.environment.parameters = ctx.resolved.into_inner();
    rep.passed = rep.verdict();
    Ok(rep)
}

/// Relative spread `max/min - 1` over fitted constants.
pub(crate) fn spread(values: &[f64]) -> f64 {
    crate::fit::relative_spread(values)
}

/// Nodes `0, T/n, ..., T`.
pub(crate) fn uniform(t_final: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_final * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_and_keys_are_rejected() {
        assert!(matches!(
            run_experiment(&ExperimentSpec::new("bogus")),
            Err(ZkError::UnknownExperiment(_))
        ));
        let p = Params::parse("K = 3\nwhatever = 1").unwrap();
        let spec = ExperimentSpec::with_params("partition_unity", p, 1);
        assert!(matches!(run_experiment(&spec), Err(ZkError::Config { line: 2, .. })));
    }

    #[test]
    fn reports_roundtrip_and_refuse_other_schemas() {
        let rep = run_experiment(&ExperimentSpec::new("partition_unity")).unwrap();
        assert!(rep.passed);
        let json = rep.to_json().unwrap();
        assert_eq!(EstimateReport::from_json(&json).unwrap(), rep);
        let old = json.replacen("\"schema_version\": 1", "\"schema_version\": 0", 1);
        assert!(EstimateReport::from_json(&old).is_err());
        let forged = json.replacen("\"passed\": true", "\"passed\": false", 1);
        assert!(EstimateReport::from_json(&forged).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let run = || {
            let mut r = run_experiment(&ExperimentSpec::new("partition_unity")).unwrap();
            r.wall_time_s = 0.0;
            r.to_json().unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn check_predicates() {
        assert!(Check::new("a", 1.0, Relation::Below, 2.0).passed);
        assert!(!Check::new("a", f64::NAN, Relation::Below, 2.0).passed);
        assert!(Check::new("a", 2.0, Relation::AtMost, 2.0).passed);
        assert!(!Check::new("a", 2.0, Relation::Above, 2.0).passed);
    }
}
