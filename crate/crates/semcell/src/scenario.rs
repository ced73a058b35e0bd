//! Seeded random problem instances and their on-disk format.
//!
//! Every random quantity draws from its own deterministic ChaCha substream
//! keyed by `(seed, kind, index)`, so regenerating any entity is
//! reproducible byte-for-byte regardless of iteration order or thread
//! count. Scenario files are schema-versioned JSON.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{BaseStation, Channel, GlobalParams, WirelessDevice};
use crate::utility::{AccuracyParams, LogBase};
use crate::{Error, Result};

/// Current scenario file schema.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// A closed interval to draw uniformly from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..self.hi)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::InvalidParameter(format!(
                "range {name} = [{}, {}] is degenerate",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// How the shadowing term enters the pathloss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ShadowingMode {
    /// Per-link Gaussian in dB with `shadowing_db` standard deviation.
    #[default]
    LogNormal,
    /// Fixed `shadowing_db` offset on every link.
    ConstantOffset,
}

/// Generator configuration; defaults reproduce the standard simulation
/// setup (5 BSs, 30 WDs on a 500 m square).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub num_bs: usize,
    pub num_wd: usize,
    /// Side of the square deployment area, meters.
    pub area_m: f64,
    pub seed: u64,

    pub rb_bandwidth_hz: f64,
    pub max_delay_s: f64,
    pub noise_power_w: f64,

    /// Per-BS RB budget, drawn uniformly from these choices.
    pub rb_count_choices: Vec<usize>,
    pub interference_w: Range,

    pub max_freq_hz: Range,
    pub max_power_w: f64,
    pub energy_budget_j: f64,
    pub energy_coeff: Range,

    pub eta1: Range,
    pub eta2: Range,
    pub c_max_cycles: Range,
    pub beta1: Range,
    pub beta2: Range,
    pub beta3: Range,
    pub d_max_bits: Range,
    pub raw_data_bits: Range,
    #[serde(default)]
    pub log_base: LogBase,

    /// Fixed term of the pathloss at 1 km, dB.
    pub pathloss_fixed_db: f64,
    /// Distance slope of the pathloss per decade, dB.
    pub pathloss_per_decade_db: f64,
    pub shadowing_db: f64,
    #[serde(default)]
    pub shadowing: ShadowingMode,
    /// Links shorter than this are evaluated at this distance, meters.
    pub min_distance_m: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            num_bs: 5,
            num_wd: 30,
            area_m: 500.0,
            seed: 0,
            rb_bandwidth_hz: 2e5,
            max_delay_s: 1e-2,
            noise_power_w: 1e-13,
            rb_count_choices: vec![25, 50, 75, 100],
            interference_w: Range::new(1e-13, 1e-12),
            max_freq_hz: Range::new(1e9, 3e9),
            max_power_w: 0.2,
            energy_budget_j: 2e-3,
            energy_coeff: Range::new(1e-28, 1e-27),
            eta1: Range::new(0.05, 0.08),
            eta2: Range::new(0.9, 0.95),
            c_max_cycles: Range::new(5e6, 1e7),
            beta1: Range::new(-0.75, -0.6),
            beta2: Range::new(10.0, 20.0),
            beta3: Range::new(0.9, 0.95),
            d_max_bits: Range::new(1.5e5, 2.5e5),
            raw_data_bits: Range::new(4e5, 8e5),
            log_base: LogBase::Natural,
            pathloss_fixed_db: 128.1,
            pathloss_per_decade_db: 37.6,
            shadowing_db: 6.0,
            shadowing: ShadowingMode::LogNormal,
            min_distance_m: 1.0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_bs < 1 || self.num_wd < 1 {
            return Err(Error::InvalidParameter(
                "need at least one BS and one WD".into(),
            ));
        }
        if self.area_m <= 0.0 || self.min_distance_m <= 0.0 {
            return Err(Error::InvalidParameter("area and distance floor must be positive".into()));
        }
        if self.rb_count_choices.is_empty() || self.rb_count_choices.iter().any(|&k| k < 1) {
            return Err(Error::InvalidParameter("RB choices must be nonempty positive".into()));
        }
        if self.rb_bandwidth_hz <= 0.0
            || self.max_delay_s <= 0.0
            || self.noise_power_w <= 0.0
            || self.max_power_w <= 0.0
            || self.energy_budget_j <= 0.0
            || self.shadowing_db < 0.0
        {
            return Err(Error::InvalidParameter("scalar parameters out of range".into()));
        }
        for (range, name) in [
            (&self.interference_w, "interference_w"),
            (&self.max_freq_hz, "max_freq_hz"),
            (&self.energy_coeff, "energy_coeff"),
            (&self.eta1, "eta1"),
            (&self.eta2, "eta2"),
            (&self.c_max_cycles, "c_max_cycles"),
            (&self.beta1, "beta1"),
            (&self.beta2, "beta2"),
            (&self.beta3, "beta3"),
            (&self.d_max_bits, "d_max_bits"),
            (&self.raw_data_bits, "raw_data_bits"),
        ] {
            range.validate(name)?;
        }
        Ok(())
    }
}

/// An immutable problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub globals: GlobalParams,
    pub bss: Vec<BaseStation>,
    pub wds: Vec<WirelessDevice>,
    pub channel: Channel,
    pub seed: u64,
    /// Echo of the generator configuration this instance came from, if any.
    pub provenance: Option<GenConfig>,
}

impl Scenario {
    pub fn num_bs(&self) -> usize {
        self.bss.len()
    }

    pub fn num_wd(&self) -> usize {
        self.wds.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.globals.validate()?;
        for bs in &self.bss {
            bs.validate()?;
        }
        for wd in &self.wds {
            wd.validate()?;
        }
        self.channel.validate()?;
        if self.channel.num_wd() != self.wds.len() || self.channel.num_bs() != self.bss.len() {
            return Err(Error::InvalidParameter(
                "channel matrix does not match entity counts".into(),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = ScenarioFile {
            schema_version: SCENARIO_SCHEMA_VERSION,
            scenario: self.clone(),
        };
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let found = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::InvalidParameter("missing schema_version".into()))?
            as u32;
        if found != SCENARIO_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found,
                expected: SCENARIO_SCHEMA_VERSION,
            });
        }
        let file: ScenarioFile = serde_json::from_value(value)?;
        file.scenario.validate()?;
        Ok(file.scenario)
    }
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    schema_version: u32,
    scenario: Scenario,
}

/// Substream identifiers; each (kind, index) pair owns one RNG stream.
#[derive(Clone, Copy)]
enum StreamKind {
    BaseStation = 1,
    Device = 2,
    Link = 3,
}

fn stream(seed: u64, kind: StreamKind, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(kind as u64).to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Pathloss in dB at `dist_m` meters: fixed term plus per-decade slope of
/// the distance in kilometers.
fn pathloss_db(cfg: &GenConfig, dist_m: f64) -> f64 {
    let dist_km = dist_m.max(cfg.min_distance_m) / 1000.0;
    cfg.pathloss_fixed_db + cfg.pathloss_per_decade_db * dist_km.log10()
}

/// Builds a scenario from the configuration. Pure in `cfg` (including the
/// seed): equal configurations produce identical scenarios.
pub fn generate(cfg: &GenConfig) -> Result<Scenario> {
    cfg.validate()?;

    let globals = GlobalParams {
        rb_bandwidth_hz: cfg.rb_bandwidth_hz,
        max_delay_s: cfg.max_delay_s,
        noise_power_w: cfg.noise_power_w,
    };

    let bss: Vec<BaseStation> = (0..cfg.num_bs)
        .map(|m| {
            let mut rng = stream(cfg.seed, StreamKind::BaseStation, m as u64, 0);
            let position_m = [rng.gen_range(0.0..cfg.area_m), rng.gen_range(0.0..cfg.area_m)];
            let rb_count = cfg.rb_count_choices[rng.gen_range(0..cfg.rb_count_choices.len())];
            BaseStation {
                id: m,
                position_m,
                rb_count,
                interference_w: cfg.interference_w.sample(&mut rng),
            }
        })
        .collect();

    let wds: Vec<WirelessDevice> = (0..cfg.num_wd)
        .map(|n| {
            let mut rng = stream(cfg.seed, StreamKind::Device, n as u64, 0);
            let position_m = [rng.gen_range(0.0..cfg.area_m), rng.gen_range(0.0..cfg.area_m)];
            WirelessDevice {
                id: n,
                position_m,
                max_freq_hz: cfg.max_freq_hz.sample(&mut rng),
                max_power_w: cfg.max_power_w,
                energy_budget_j: cfg.energy_budget_j,
                energy_coeff: cfg.energy_coeff.sample(&mut rng),
                app_params: AccuracyParams {
                    eta1: cfg.eta1.sample(&mut rng),
                    eta2: cfg.eta2.sample(&mut rng),
                    c_max_cycles: cfg.c_max_cycles.sample(&mut rng),
                    beta1: cfg.beta1.sample(&mut rng),
                    beta2: cfg.beta2.sample(&mut rng),
                    beta3: cfg.beta3.sample(&mut rng),
                    d_max_bits: cfg.d_max_bits.sample(&mut rng),
                    raw_data_bits: cfg.raw_data_bits.sample(&mut rng),
                    log_base: cfg.log_base,
                },
            }
        })
        .collect();

    let rows: Vec<Vec<f64>> = (0..cfg.num_wd)
        .map(|n| {
            (0..cfg.num_bs)
                .map(|m| {
                    let mut rng = stream(cfg.seed, StreamKind::Link, n as u64, m as u64);
                    let dx = wds[n].position_m[0] - bss[m].position_m[0];
                    let dy = wds[n].position_m[1] - bss[m].position_m[1];
                    let dist = (dx * dx + dy * dy).sqrt();
                    let shadow_db = match cfg.shadowing {
                        ShadowingMode::LogNormal => {
                            Normal::new(0.0, cfg.shadowing_db)
                                .map(|d| d.sample(&mut rng))
                                .unwrap_or(0.0)
                        }
                        ShadowingMode::ConstantOffset => cfg.shadowing_db,
                    };
                    let loss_db = pathloss_db(cfg, dist) + shadow_db;
                    10f64
                        .powf(-loss_db / 10.0)
                        .clamp(f64::MIN_POSITIVE, 1.0)
                })
                .collect()
        })
        .collect();
    let channel = Channel::from_rows(rows)?;

    let scenario = Scenario {
        globals,
        bss,
        wds,
        channel,
        seed: cfg.seed,
        provenance: Some(cfg.clone()),
    };
    scenario.validate()?;
    Ok(scenario)
}
