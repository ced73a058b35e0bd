//! Physical system model: network entities, the channel, and the
//! computation/transmission time and energy formulas.
//!
//! All quantities are SI: seconds, joules, watts, hertz, bits, CPU cycles.
//! Channel gains are linear power gains; dB never appears below the scenario
//! generator.

use serde::{Deserialize, Serialize};

use crate::sched::ScheduleDecision;
use crate::utility::AccuracyParams;
use crate::{Error, Result};

/// Relative slack applied to delay, energy, and power checks so that
/// boundary-tight schedules validate cleanly.
pub const CONSTRAINT_REL_TOL: f64 = 1e-9;

/// Network-wide constants shared by every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    /// Bandwidth of one resource block, Hz.
    pub rb_bandwidth_hz: f64,
    /// Completion deadline for compute plus transmit, seconds.
    pub max_delay_s: f64,
    /// Receiver noise power, watts.
    pub noise_power_w: f64,
}

impl GlobalParams {
    pub fn validate(&self) -> Result<()> {
        if self.rb_bandwidth_hz <= 0.0 || self.max_delay_s <= 0.0 || self.noise_power_w <= 0.0 {
            return Err(Error::InvalidParameter(
                "global parameters must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// A base station owning an integer budget of resource blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: usize,
    /// Position in meters within the deployment area.
    pub position_m: [f64; 2],
    /// Number of resource blocks this BS can allocate.
    pub rb_count: usize,
    /// Average inter-cell interference seen at this BS, watts.
    pub interference_w: f64,
}

impl BaseStation {
    pub fn validate(&self) -> Result<()> {
        if self.rb_count < 1 {
            return Err(Error::InvalidParameter(format!(
                "BS {} must own at least one RB",
                self.id
            )));
        }
        if self.interference_w < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "BS {} has negative interference",
                self.id
            )));
        }
        Ok(())
    }
}

/// A wireless device with compute and radio capabilities plus its
/// application's accuracy model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirelessDevice {
    pub id: usize,
    pub position_m: [f64; 2],
    /// Maximum CPU frequency, Hz.
    pub max_freq_hz: f64,
    /// Maximum transmit power, watts.
    pub max_power_w: f64,
    /// Total energy budget per task, joules.
    pub energy_budget_j: f64,
    /// CPU energy coefficient: one cycle at frequency f costs `coeff * f^2` joules.
    pub energy_coeff: f64,
    /// Accuracy curve parameters of this device's application.
    pub app_params: AccuracyParams,
}

impl WirelessDevice {
    pub fn validate(&self) -> Result<()> {
        if self.max_freq_hz <= 0.0
            || self.max_power_w <= 0.0
            || self.energy_budget_j <= 0.0
            || self.energy_coeff <= 0.0
        {
            return Err(Error::InvalidParameter(format!(
                "WD {} bounds must be strictly positive",
                self.id
            )));
        }
        self.app_params.validate()
    }
}

/// Linear power gains for every (WD, BS) link, row-major by WD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    num_wd: usize,
    num_bs: usize,
    gains: Vec<f64>,
}

impl Channel {
    /// Builds a channel matrix from per-WD rows of per-BS gains.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_wd = rows.len();
        let num_bs = rows.first().map_or(0, Vec::len);
        let mut gains = Vec::with_capacity(num_wd * num_bs);
        for row in &rows {
            if row.len() != num_bs {
                return Err(Error::InvalidParameter("ragged channel matrix".into()));
            }
            gains.extend_from_slice(row);
        }
        let ch = Self {
            num_wd,
            num_bs,
            gains,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gains.len() != self.num_wd * self.num_bs {
            return Err(Error::InvalidParameter("channel matrix size mismatch".into()));
        }
        for (i, &g) in self.gains.iter().enumerate() {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "channel gain {} at flat index {} outside (0, 1]",
                    g, i
                )));
            }
        }
        Ok(())
    }

    /// Linear power gain of the link from WD `wd` to BS `bs`.
    pub fn gain(&self, wd: usize, bs: usize) -> f64 {
        self.gains[wd * self.num_bs + bs]
    }

    pub fn num_wd(&self) -> usize {
        self.num_wd
    }

    pub fn num_bs(&self) -> usize {
        self.num_bs
    }
}

/// Time to process `c` cycles at frequency `f`.
///
/// Zero workload takes zero time at any frequency; nonzero workload at zero
/// frequency is rejected.
pub fn compute_time(c: f64, f: f64) -> Result<f64> {
    if c < 0.0 || f < 0.0 {
        return Err(Error::InvalidParameter(
            "workload and frequency must be nonnegative".into(),
        ));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    if f == 0.0 {
        return Err(Error::Domain(
            "nonzero workload at zero frequency".into(),
        ));
    }
    Ok(c / f)
}

/// Energy to process `c` cycles at frequency `f`: `c * gamma * f^2`.
pub fn compute_energy(c: f64, gamma: f64, f: f64) -> f64 {
    c * gamma * f * f
}

/// Uplink rate over `z` resource blocks in bits per second.
///
/// Shannon capacity per RB scaled by the RB count; structured as
/// `z * per_rb_rate` so the rate is exactly linear in `z`.
pub fn link_rate(z: usize, params: &GlobalParams, p: f64, h: f64, interference: f64) -> f64 {
    if z == 0 {
        return 0.0;
    }
    let snr = p * h / (params.noise_power_w + interference);
    z as f64 * (params.rb_bandwidth_hz * (1.0 + snr).log2())
}

/// Time to push `d` bits at `rate` bits per second.
pub fn transmit_time(d: f64, rate: f64) -> Result<f64> {
    if d < 0.0 || rate < 0.0 {
        return Err(Error::InvalidParameter(
            "data volume and rate must be nonnegative".into(),
        ));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    if rate == 0.0 {
        return Err(Error::Infeasible("nonzero data at zero rate".into()));
    }
    Ok(d / rate)
}

/// Radio energy spent transmitting at power `p` for `t` seconds.
pub fn transmit_energy(p: f64, t: f64) -> f64 {
    p * t
}

/// A complete solution: association, allocation, per-WD schedules, and the
/// achieved total utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `association[n]` is the BS serving WD `n`, or `None`.
    pub association: Vec<Option<usize>>,
    /// `allocation[n]` is the RB count granted to WD `n` on its BS.
    pub allocation: Vec<usize>,
    /// Realized per-WD decisions; zeroed for inactive WDs.
    pub schedules: Vec<ScheduleDecision>,
    pub total_utility: f64,
}

impl Assignment {
    /// An empty solution over `num_wd` devices: nobody associated, utility 0.
    pub fn empty(num_wd: usize) -> Self {
        Self {
            association: vec![None; num_wd],
            allocation: vec![0; num_wd],
            schedules: vec![ScheduleDecision::zero(); num_wd],
            total_utility: 0.0,
        }
    }
}

/// One constraint violation found by [`validate_assignment`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RbOverBudget { bs: usize, allocated: usize, budget: usize },
    DelayExceeded { wd: usize, total_s: f64, limit_s: f64 },
    EnergyExceeded { wd: usize, total_j: f64, limit_j: f64 },
    FrequencyOutOfRange { wd: usize, freq_hz: f64, limit_hz: f64 },
    PowerOutOfRange { wd: usize, power_w: f64, limit_w: f64 },
    /// Unassociated WD holds RBs, transmits, or reports utility.
    InactiveWdActivity { wd: usize, detail: String },
    /// Nonzero data volume with no usable rate (no RBs or no power).
    MissingRate { wd: usize, data_bits: f64 },
    /// Nonzero workload with zero CPU frequency.
    ComputeWithoutFrequency { wd: usize, c_cycles: f64 },
    TotalUtilityMismatch { stated: f64, recomputed: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RbOverBudget { bs, allocated, budget } => {
                write!(f, "BS {bs}: {allocated} RBs allocated, budget {budget}")
            }
            Violation::DelayExceeded { wd, total_s, limit_s } => {
                write!(f, "WD {wd}: completion time {total_s:.6e}s exceeds {limit_s:.6e}s")
            }
            Violation::EnergyExceeded { wd, total_j, limit_j } => {
                write!(f, "WD {wd}: energy {total_j:.6e}J exceeds {limit_j:.6e}J")
            }
            Violation::FrequencyOutOfRange { wd, freq_hz, limit_hz } => {
                write!(f, "WD {wd}: frequency {freq_hz:.6e}Hz outside [0, {limit_hz:.6e}]")
            }
            Violation::PowerOutOfRange { wd, power_w, limit_w } => {
                write!(f, "WD {wd}: power {power_w:.6e}W outside [0, {limit_w:.6e}]")
            }
            Violation::InactiveWdActivity { wd, detail } => {
                write!(f, "WD {wd}: unassociated but {detail}")
            }
            Violation::MissingRate { wd, data_bits } => {
                write!(f, "WD {wd}: {data_bits:.3e} bits scheduled with zero rate")
            }
            Violation::ComputeWithoutFrequency { wd, c_cycles } => {
                write!(f, "WD {wd}: {c_cycles:.3e} cycles scheduled at zero frequency")
            }
            Violation::TotalUtilityMismatch { stated, recomputed } => {
                write!(f, "total utility {stated:.12e} != recomputed {recomputed:.12e}")
            }
        }
    }
}

/// Outcome of checking an [`Assignment`] against every constraint.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_clean() {
            write!(f, "no violations")
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  {v}")?;
            }
            Ok(())
        }
    }
}

/// Checks association uniqueness, RB budgets, delay, energy, frequency, and
/// power bounds for every WD and BS, plus utility bookkeeping.
///
/// Reports violations with magnitudes instead of failing fast.
pub fn validate_assignment(a: &Assignment, s: &crate::scenario::Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let num_wd = s.wds.len();
    let num_bs = s.bss.len();

    let mut rb_used = vec![0usize; num_bs];
    let mut utility_sum = 0.0;

    for n in 0..num_wd {
        let wd = &s.wds[n];
        let sched = &a.schedules[n];
        utility_sum += sched.utility;

        match a.association[n] {
            None => {
                if a.allocation[n] != 0 {
                    report.violations.push(Violation::InactiveWdActivity {
                        wd: n,
                        detail: format!("holds {} RBs", a.allocation[n]),
                    });
                }
                if sched.data_bits != 0.0 || sched.utility != 0.0 {
                    report.violations.push(Violation::InactiveWdActivity {
                        wd: n,
                        detail: format!(
                            "schedules {} bits with utility {}",
                            sched.data_bits, sched.utility
                        ),
                    });
                }
            }
            Some(m) => {
                let z = a.allocation[n];
                rb_used[m] += z;

                if sched.freq_hz < 0.0 || sched.freq_hz > wd.max_freq_hz * (1.0 + CONSTRAINT_REL_TOL)
                {
                    report.violations.push(Violation::FrequencyOutOfRange {
                        wd: n,
                        freq_hz: sched.freq_hz,
                        limit_hz: wd.max_freq_hz,
                    });
                }
                if sched.power_w < 0.0 || sched.power_w > wd.max_power_w * (1.0 + CONSTRAINT_REL_TOL)
                {
                    report.violations.push(Violation::PowerOutOfRange {
                        wd: n,
                        power_w: sched.power_w,
                        limit_w: wd.max_power_w,
                    });
                }

                let t_comp = match compute_time(sched.c_cycles, sched.freq_hz) {
                    Ok(t) => t,
                    Err(_) => {
                        report.violations.push(Violation::ComputeWithoutFrequency {
                            wd: n,
                            c_cycles: sched.c_cycles,
                        });
                        continue;
                    }
                };
                let rate = link_rate(
                    z,
                    &s.globals,
                    sched.power_w,
                    s.channel.gain(n, m),
                    s.bss[m].interference_w,
                );
                let t_tx = match transmit_time(sched.data_bits, rate) {
                    Ok(t) => t,
                    Err(_) => {
                        report.violations.push(Violation::MissingRate {
                            wd: n,
                            data_bits: sched.data_bits,
                        });
                        continue;
                    }
                };

                let total_t = t_comp + t_tx;
                if total_t > s.globals.max_delay_s * (1.0 + CONSTRAINT_REL_TOL) {
                    report.violations.push(Violation::DelayExceeded {
                        wd: n,
                        total_s: total_t,
                        limit_s: s.globals.max_delay_s,
                    });
                }

                let total_e = compute_energy(sched.c_cycles, wd.energy_coeff, sched.freq_hz)
                    + transmit_energy(sched.power_w, t_tx);
                if total_e > wd.energy_budget_j * (1.0 + CONSTRAINT_REL_TOL) {
                    report.violations.push(Violation::EnergyExceeded {
                        wd: n,
                        total_j: total_e,
                        limit_j: wd.energy_budget_j,
                    });
                }
            }
        }
    }

    for m in 0..num_bs {
        if rb_used[m] > s.bss[m].rb_count {
            report.violations.push(Violation::RbOverBudget {
                bs: m,
                allocated: rb_used[m],
                budget: s.bss[m].rb_count,
            });
        }
    }

    let scale = utility_sum.abs().max(1.0);
    if (a.total_utility - utility_sum).abs() > 1e-9 * scale {
        report.violations.push(Violation::TotalUtilityMismatch {
            stated: a.total_utility,
            recomputed: utility_sum,
        });
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compute_time_direct() {
        assert_eq!(compute_time(5e6, 1e9).unwrap(), 5e-3);
        assert_eq!(compute_time(0.0, 1e9).unwrap(), 0.0);
        // workload of the largest model at 1 GHz exactly fills a 10 ms deadline
        assert_eq!(compute_time(1e7, 1e9).unwrap(), 1e-2);
    }

    #[test]
    fn compute_time_rejects_zero_frequency() {
        assert!(compute_time(1.0, 0.0).is_err());
        assert_eq!(compute_time(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn compute_energy_direct() {
        assert!((compute_energy(1e6, 1e-27, 1e9) - 1e-3).abs() < 1e-18);
        assert_eq!(compute_energy(0.0, 1e-27, 1e9), 0.0);
        // 2 MCycles at 1e-27 J s^2/cycle^3 and 1 GHz consume a 2 mJ budget
        assert!((compute_energy(2e6, 1e-27, 1e9) - 2e-3).abs() < 1e-18);
    }

    #[test]
    fn link_rate_examples() {
        let params = GlobalParams {
            rb_bandwidth_hz: 2e5,
            max_delay_s: 1e-2,
            noise_power_w: 1e-13,
        };
        // SNR exactly 1 -> log2(2) = 1 per Hz
        let r = link_rate(1, &params, 1e-13, 1.0, 0.0);
        assert!((r - 2e5).abs() < 1e-6);
        assert_eq!(link_rate(0, &params, 1.0, 1.0, 0.0), 0.0);
        // SNR 3 over two RBs
        let r = link_rate(2, &params, 3e-13, 1.0, 0.0);
        assert!((r - 8e5).abs() < 1e-6);
    }

    #[test]
    fn transmit_time_examples() {
        assert_eq!(transmit_time(8e3, 8e5).unwrap(), 1e-2);
        assert_eq!(transmit_time(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(transmit_time(1e5, 2e7).unwrap(), 5e-3);
        assert!(transmit_time(1.0, 0.0).is_err());
    }

    #[test]
    fn transmit_energy_examples() {
        assert!((transmit_energy(0.2, 1e-2) - 2e-3).abs() < 1e-18);
        assert_eq!(transmit_energy(0.0, 5.0), 0.0);
        assert!((transmit_energy(0.1, 5e-3) - 5e-4).abs() < 1e-18);
    }

    proptest! {
        // doubling the workload doubles the time at fixed frequency
        #[test]
        fn compute_time_homogeneous(c in 1.0f64..1e9, f in 1e6f64..1e10) {
            let t1 = compute_time(c, f).unwrap();
            let t2 = compute_time(2.0 * c, f).unwrap();
            prop_assert!((t2 - 2.0 * t1).abs() <= 1e-12 * t2.abs());
        }

        // the RB count is an exact prefactor of the rate
        #[test]
        fn link_rate_linear_in_z(
            z in 1usize..200,
            p in 1e-6f64..1.0,
            h in 1e-14f64..1.0,
            i_w in 0.0f64..1e-11,
        ) {
            let params = GlobalParams {
                rb_bandwidth_hz: 2e5,
                max_delay_s: 1e-2,
                noise_power_w: 1e-13,
            };
            let r1 = link_rate(1, &params, p, h, i_w);
            let rz = link_rate(z, &params, p, h, i_w);
            prop_assert_eq!(rz, z as f64 * r1);
        }

        #[test]
        fn transmit_time_homogeneous(d in 1.0f64..1e9, rate in 1.0f64..1e12) {
            let t1 = transmit_time(d, rate).unwrap();
            let t2 = transmit_time(2.0 * d, rate).unwrap();
            prop_assert!((t2 - 2.0 * t1).abs() <= 1e-12 * t2.abs());
        }
    }
}
