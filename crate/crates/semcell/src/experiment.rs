//! Sweep harness: runs the proposed algorithm and the benchmarks across
//! seeds and one optional parameter sweep, emitting CSV plus a JSON
//! metadata sidecar.
//!
//! Every (sweep value, seed) cell regenerates its scenario from
//! `base seed + replicate index`, runs each requested algorithm end to end
//! (including its own table construction, so wall times are comparable),
//! and validates every assignment. Cells are independent and run on the
//! worker pool; rows are sorted before emission so output never depends on
//! scheduling.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::alloc::RbAllocator;
use crate::baselines::{run_baseline, run_proposed, BaselineKind};
use crate::model::{validate_assignment, Assignment};
use crate::scenario::{generate, GenConfig};
use crate::utility::UtilityKind;
use crate::{par, Error, Result};

/// Current experiment spec schema.
pub const EXPERIMENT_SCHEMA_VERSION: u32 = 1;

/// Algorithms the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Prop,
    Tc,
    Fsc,
    Arb,
    Nua,
    Fan,
}

impl Algorithm {
    pub fn all() -> [Algorithm; 6] {
        [
            Algorithm::Prop,
            Algorithm::Tc,
            Algorithm::Fsc,
            Algorithm::Arb,
            Algorithm::Nua,
            Algorithm::Fan,
        ]
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Prop => "Prop",
            Algorithm::Tc => "TC",
            Algorithm::Fsc => "FSC",
            Algorithm::Arb => "ARB",
            Algorithm::Nua => "NUA",
            Algorithm::Fan => "FAN",
        }
    }

    fn order(self) -> usize {
        Algorithm::all().iter().position(|&a| a == self).unwrap()
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "prop" => Ok(Algorithm::Prop),
            "tc" => Ok(Algorithm::Tc),
            "fsc" => Ok(Algorithm::Fsc),
            "arb" => Ok(Algorithm::Arb),
            "nua" => Ok(Algorithm::Nua),
            "fan" => Ok(Algorithm::Fan),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm '{other}'"
            ))),
        }
    }
}

/// Which generator knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    None,
    NumBs,
    NumWd,
    MaxDelay,
    EnergyBudget,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::NumBs => "num_bs",
            SweepAxis::NumWd => "num_wd",
            SweepAxis::MaxDelay => "max_delay",
            SweepAxis::EnergyBudget => "energy_budget",
        }
    }

    fn apply(self, cfg: &mut GenConfig, value: f64) -> Result<()> {
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidParameter(format!(
                    "sweep value {v} is not a positive integer"
                )))
            }
        };
        match self {
            SweepAxis::None => {}
            SweepAxis::NumBs => cfg.num_bs = as_count(value)?,
            SweepAxis::NumWd => cfg.num_wd = as_count(value)?,
            SweepAxis::MaxDelay => {
                if value <= 0.0 {
                    return Err(Error::InvalidParameter("delay must be positive".into()));
                }
                cfg.max_delay_s = value;
            }
            SweepAxis::EnergyBudget => {
                if value <= 0.0 {
                    return Err(Error::InvalidParameter("energy budget must be positive".into()));
                }
                cfg.energy_budget_j = value;
            }
        }
        Ok(())
    }
}

/// A complete, reproducible experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    pub base: GenConfig,
    pub utility: UtilityKind,
    pub algorithms: Vec<Algorithm>,
    /// Number of repeated runs; replicate `i` uses seed `base.seed + i`.
    pub seeds: u32,
    /// Allocation solver override; `None` picks per utility kind.
    pub allocator: Option<RbAllocator>,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            schema_version: EXPERIMENT_SCHEMA_VERSION,
            base: GenConfig::default(),
            utility: UtilityKind::ConcaveAccuracy,
            algorithms: Algorithm::all().to_vec(),
            seeds: 10,
            allocator: None,
            sweep_axis: SweepAxis::None,
            sweep_values: Vec::new(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != EXPERIMENT_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: EXPERIMENT_SCHEMA_VERSION,
            });
        }
        if self.seeds < 1 {
            return Err(Error::InvalidParameter("need at least one seed".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms requested".into()));
        }
        if self.sweep_axis != SweepAxis::None && self.sweep_values.is_empty() {
            return Err(Error::InvalidParameter("sweep axis without values".into()));
        }
        self.base.validate()?;
        for &v in &self.sweep_values {
            let mut probe = self.base.clone();
            self.sweep_axis.apply(&mut probe, v)?;
            probe.validate()?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let found = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::InvalidParameter("missing schema_version".into()))?
            as u32;
        if found != EXPERIMENT_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found,
                expected: EXPERIMENT_SCHEMA_VERSION,
            });
        }
        let spec: ExperimentSpec = serde_json::from_value(value)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Row scope: one BS, the scenario total, or a failed run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Bs(usize),
    Total,
    Error,
}

impl Scope {
    fn label(&self) -> String {
        match self {
            Scope::Bs(m) => format!("BS{m}"),
            Scope::Total => "TOTAL".into(),
            Scope::Error => "ERROR".into(),
        }
    }

    fn order(&self) -> (usize, usize) {
        match self {
            Scope::Bs(m) => (0, *m),
            Scope::Total => (1, 0),
            Scope::Error => (2, 0),
        }
    }
}

/// One measurement row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_value: Option<f64>,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub scope: Scope,
    /// Achieved utility; absent on error rows.
    pub utility: Option<f64>,
    pub wall_ms: f64,
}

/// Mean over seeds of one (sweep value, algorithm, scope) group.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub sweep_value: Option<f64>,
    pub algorithm: Algorithm,
    pub scope: Scope,
    pub mean_utility: f64,
    pub mean_wall_ms: f64,
}

/// All rows of one experiment, sorted, plus seed-averaged aggregates.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub axis: SweepAxis,
    pub rows: Vec<Row>,
    pub aggregates: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.scope == Scope::Error).count()
    }

    /// Mean TOTAL utility of one algorithm at one sweep value.
    pub fn mean_total(&self, algorithm: Algorithm, sweep_value: Option<f64>) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| {
                a.algorithm == algorithm && a.scope == Scope::Total && a.sweep_value == sweep_value
            })
            .map(|a| a.mean_utility)
    }
}

fn run_one(alg: Algorithm, s: &crate::scenario::Scenario, spec: &ExperimentSpec) -> Assignment {
    match alg {
        Algorithm::Prop => run_proposed(s, spec.utility, spec.allocator).assignment,
        Algorithm::Tc => run_baseline(BaselineKind::Tc, s, spec.utility, spec.allocator),
        Algorithm::Fsc => run_baseline(BaselineKind::Fsc, s, spec.utility, spec.allocator),
        Algorithm::Arb => run_baseline(BaselineKind::Arb, s, spec.utility, spec.allocator),
        Algorithm::Nua => run_baseline(BaselineKind::Nua, s, spec.utility, spec.allocator),
        Algorithm::Fan => run_baseline(BaselineKind::Fan, s, spec.utility, spec.allocator),
    }
}

/// Executes the experiment. Failures (generation errors, constraint
/// violations) become `ERROR` rows; the sweep itself never aborts.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;

    let sweep_points: Vec<Option<f64>> = if spec.sweep_axis == SweepAxis::None {
        vec![None]
    } else {
        spec.sweep_values.iter().copied().map(Some).collect()
    };
    let mut cells = Vec::new();
    for &point in &sweep_points {
        for replicate in 0..spec.seeds {
            cells.push((point, replicate as u64));
        }
    }

    let per_cell: Vec<Vec<Row>> = par::map_collect(cells, |(point, replicate)| {
        let mut cfg = spec.base.clone();
        if let Some(v) = point {
            // validated up front; re-application cannot fail here
            spec.sweep_axis
                .apply(&mut cfg, v)
                .expect("sweep value became invalid");
        }
        cfg.seed = spec.base.seed + replicate;
        let seed = cfg.seed;

        let scenario = match generate(&cfg) {
            Ok(s) => s,
            Err(_) => {
                return spec
                    .algorithms
                    .iter()
                    .map(|&alg| Row {
                        sweep_value: point,
                        seed,
                        algorithm: alg,
                        scope: Scope::Error,
                        utility: None,
                        wall_ms: 0.0,
                    })
                    .collect();
            }
        };

        let mut rows = Vec::new();
        for &alg in &spec.algorithms {
            let t0 = Instant::now();
            let assignment = run_one(alg, &scenario, spec);
            let wall_ms = t0.elapsed().as_secs_f64() * 1e3;

            let clean = validate_assignment(&assignment, &scenario).is_clean();
            let mut total = 0.0;
            for m in 0..scenario.num_bs() {
                let bs_utility: f64 = (0..scenario.num_wd())
                    .filter(|&n| assignment.association[n] == Some(m))
                    .map(|n| assignment.schedules[n].utility)
                    .sum();
                total += bs_utility;
                rows.push(Row {
                    sweep_value: point,
                    seed,
                    algorithm: alg,
                    scope: Scope::Bs(m),
                    utility: Some(bs_utility),
                    wall_ms,
                });
            }
            rows.push(Row {
                sweep_value: point,
                seed,
                algorithm: alg,
                scope: Scope::Total,
                utility: Some(total),
                wall_ms,
            });
            if !clean {
                rows.push(Row {
                    sweep_value: point,
                    seed,
                    algorithm: alg,
                    scope: Scope::Error,
                    utility: None,
                    wall_ms,
                });
            }
        }
        rows
    });

    let mut rows: Vec<Row> = per_cell.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        let key = |r: &Row| {
            (
                r.sweep_value.map(|v| v.to_bits()).unwrap_or(0),
                r.seed,
                r.algorithm.order(),
                r.scope.order(),
            )
        };
        key(a).cmp(&key(b))
    });

    let aggregates = aggregate(&rows);
    Ok(ExperimentResult {
        axis: spec.sweep_axis,
        rows,
        aggregates,
    })
}

fn aggregate(rows: &[Row]) -> Vec<AggregateRow> {
    let mut out: Vec<AggregateRow> = Vec::new();
    for row in rows {
        if row.scope == Scope::Error {
            continue;
        }
        let utility = row.utility.expect("non-error rows carry utility");
        match out.iter_mut().find(|a| {
            a.sweep_value == row.sweep_value
                && a.algorithm == row.algorithm
                && a.scope == row.scope
        }) {
            Some(agg) => {
                agg.mean_utility += utility;
                agg.mean_wall_ms += row.wall_ms;
            }
            None => out.push(AggregateRow {
                sweep_value: row.sweep_value,
                algorithm: row.algorithm,
                scope: row.scope.clone(),
                mean_utility: utility,
                mean_wall_ms: row.wall_ms,
            }),
        }
    }
    // second pass: divide by the seed count per group
    for agg in &mut out {
        let count = rows
            .iter()
            .filter(|r| {
                r.sweep_value == agg.sweep_value
                    && r.algorithm == agg.algorithm
                    && r.scope == agg.scope
            })
            .count() as f64;
        agg.mean_utility /= count;
        agg.mean_wall_ms /= count;
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sweep_value_field(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "-".into(),
    }
}

/// Writes the result as RFC-4180-style CSV (data rows then aggregate rows)
/// and a `<path>.meta.json` sidecar echoing the spec, library version, and
/// timestamp. The CSV itself contains nothing time-dependent except the
/// wall-time column.
pub fn emit_csv(result: &ExperimentResult, spec: &ExperimentSpec, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("sweep_axis,sweep_value,seed,algorithm,scope,utility,wall_ms\n");
    let axis = result.axis.label();
    for row in &result.rows {
        let utility = row.utility.map(|u| format!("{u}")).unwrap_or_default();
        text.push_str(&format!(
            "{axis},{},{},{},{},{},{:.3}\n",
            sweep_value_field(row.sweep_value),
            row.seed,
            row.algorithm.label(),
            csv_field(&row.scope.label()),
            utility,
            row.wall_ms,
        ));
    }
    for agg in &result.aggregates {
        text.push_str(&format!(
            "{axis},{},mean,{},{},{},{:.3}\n",
            sweep_value_field(agg.sweep_value),
            agg.algorithm.label(),
            csv_field(&agg.scope.label()),
            agg.mean_utility,
            agg.mean_wall_ms,
        ));
    }
    std::fs::write(&path, text)?;

    let meta = serde_json::json!({
        "spec": spec,
        "library_version": env!("CARGO_PKG_VERSION"),
        "created_unix_ms": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0),
    });
    let meta_path = format!("{}.meta.json", path.as_ref().display());
    std::fs::write(meta_path, serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}
