//! Per-WD scheduling: for a device on a given link with `z` resource
//! blocks, choose the compute workload `c`, CPU frequency `f`, transmit
//! power `P`, and data volume `d` maximizing utility under the delay and
//! energy budgets.
//!
//! At any optimum with unsaturated data volume, both budgets bind: leftover
//! energy could always buy transmit power, and leftover time could buy a
//! lower (cheaper) frequency whose energy savings buy power again. Binding
//! both reduces the search to one dimension per stage — an inner search over
//! `f` for the maximum deliverable volume at fixed `c`, and an outer search
//! over `c` for utility. Neither objective has a usable closed form, so both
//! stages run a 64-point grid seed followed by golden-section refinement.
//!
//! The maximum volume factorizes as `d_max(c, z) = z * g(c)` with `g`
//! independent of `z`, so one `g`-profile per (WD, BS) pair serves every RB
//! count when building utility tables.

use serde::{Deserialize, Serialize};

use crate::model::{compute_energy, GlobalParams, WirelessDevice};
use crate::numopt::{bisect_true_boundary, linear_grid, log_grid, refine_best_on_grid};
use crate::scenario::Scenario;
use crate::utility::{self, UtilityKind};
use crate::{Error, Result};

/// Grid density for both the `f` and `c` searches.
const GRID_POINTS: usize = 64;
/// Relative tolerance of golden-section refinement.
const SEARCH_REL_TOL: f64 = 1e-8;
/// Relative slack tolerated on the power cap before a point is declared
/// outside the feasible region.
const POWER_REL_TOL: f64 = 1e-9;

/// One device's realized decision for a given (BS, RB count) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDecision {
    /// Compute workload, cycles.
    pub c_cycles: f64,
    /// CPU frequency, Hz (0 when nothing is computed).
    pub freq_hz: f64,
    /// Transmit power, watts.
    pub power_w: f64,
    /// Transmitted volume, bits.
    pub data_bits: f64,
    pub utility: f64,
}

impl ScheduleDecision {
    /// The do-nothing decision: no compute, no transmission, utility 0.
    pub fn zero() -> Self {
        Self {
            c_cycles: 0.0,
            freq_hz: 0.0,
            power_w: 0.0,
            data_bits: 0.0,
            utility: 0.0,
        }
    }
}

/// Feasible CPU-frequency range for a fixed workload; empty when the
/// workload cannot meet the budgets at any frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqInterval {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl FreqInterval {
    pub const EMPTY: Self = Self {
        lo_hz: f64::INFINITY,
        hi_hz: f64::NEG_INFINITY,
    };

    pub fn is_empty(&self) -> bool {
        !(self.lo_hz <= self.hi_hz)
    }
}

/// Per-RB deliverable volume at some workload, together with the frequency
/// achieving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbYield {
    /// Maximum deliverable bits per allocated RB.
    pub bits_per_rb: f64,
    /// CPU frequency attaining that volume.
    pub freq_hz: f64,
}

/// Everything the scheduler needs about one (WD, BS) link.
#[derive(Debug, Clone, Copy)]
pub struct LinkCtx<'a> {
    pub wd: &'a WirelessDevice,
    pub globals: &'a GlobalParams,
    /// Linear channel power gain of this link.
    pub gain: f64,
    /// Interference at the serving BS, watts.
    pub interference_w: f64,
}

impl<'a> LinkCtx<'a> {
    pub fn new(wd: &'a WirelessDevice, globals: &'a GlobalParams, gain: f64, interference_w: f64) -> Self {
        Self {
            wd,
            globals,
            gain,
            interference_w,
        }
    }

    /// Link context for WD `n` served by BS `m` in a scenario.
    pub fn for_pair(s: &'a Scenario, n: usize, m: usize) -> Self {
        Self {
            wd: &s.wds[n],
            globals: &s.globals,
            gain: s.channel.gain(n, m),
            interference_w: s.bss[m].interference_w,
        }
    }

    fn noise_plus_interference(&self) -> f64 {
        self.globals.noise_power_w + self.interference_w
    }

    /// The transmit power that exhausts both budgets simultaneously:
    /// all energy left after computing goes into the radio for the whole
    /// remaining window, `P = (E_max - c*gamma*f^2) / (T_max - c/f)`.
    pub fn tight_power(&self, c: f64, f: f64) -> Result<f64> {
        if c < 0.0 || f < 0.0 {
            return Err(Error::InvalidParameter(
                "workload and frequency must be nonnegative".into(),
            ));
        }
        let window = self.transmit_window(c, f).ok_or_else(|| {
            Error::Infeasible(format!("computing {c} cycles at {f} Hz leaves no transmit window"))
        })?;
        let e_tx = self.wd.energy_budget_j - compute_energy(c, self.wd.energy_coeff, f);
        if e_tx < -self.wd.energy_budget_j * 1e-12 {
            return Err(Error::Infeasible(format!(
                "computing {c} cycles at {f} Hz exceeds the energy budget"
            )));
        }
        Ok(e_tx.max(0.0) / window)
    }

    /// Seconds left for transmission after computing, `None` when the
    /// deadline is consumed.
    fn transmit_window(&self, c: f64, f: f64) -> Option<f64> {
        let t_comp = if c == 0.0 {
            0.0
        } else if f > 0.0 {
            c / f
        } else {
            return None;
        };
        let window = self.globals.max_delay_s - t_comp;
        (window > 0.0).then_some(window)
    }

    /// Frequencies at which workload `c` fits the deadline, the energy
    /// budget, and the power cap (via the budget-tight power).
    pub fn feasible_freq_interval(&self, c: f64) -> FreqInterval {
        let t_max = self.globals.max_delay_s;
        let f_max = self.wd.max_freq_hz;
        let p_cap = self.wd.max_power_w * (1.0 + POWER_REL_TOL);

        if c <= 0.0 {
            // frequency is irrelevant without compute; only the tight power
            // must respect the cap
            return if self.wd.energy_budget_j / t_max <= p_cap {
                FreqInterval {
                    lo_hz: 0.0,
                    hi_hz: f_max,
                }
            } else {
                FreqInterval::EMPTY
            };
        }

        let f_deadline = c / t_max;
        let f_energy = (self.wd.energy_budget_j / (c * self.wd.energy_coeff)).sqrt();
        let hi = f_max.min(f_energy);
        if hi <= f_deadline {
            return FreqInterval::EMPTY;
        }

        // tight power decreases in f: its numerator shrinks while the window
        // grows, so the cap binds only at the low end
        let p_at = |f: f64| self.tight_power(c, f).unwrap_or(f64::INFINITY);
        if p_at(hi) > p_cap {
            return FreqInterval::EMPTY;
        }
        let lo_open = f_deadline * (1.0 + 1e-12);
        let lo = if p_at(lo_open) <= p_cap {
            lo_open
        } else {
            // crossing point of tight power through the cap
            let below_cap_from =
                bisect_true_boundary(lo_open, hi, 1e-13, |f| p_at(f) > p_cap);
            below_cap_from.max(lo_open).min(hi)
        };
        FreqInterval { lo_hz: lo, hi_hz: hi }
    }

    /// Guarded per-RB deliverable volume at `(c, f)`; `None` outside the
    /// feasible region.
    fn d_per_rb(&self, c: f64, f: f64) -> Option<f64> {
        if c < 0.0 || f < 0.0 || f > self.wd.max_freq_hz * (1.0 + 1e-12) {
            return None;
        }
        let window = self.transmit_window(c, f)?;
        let mut e_tx = self.wd.energy_budget_j - compute_energy(c, self.wd.energy_coeff, f);
        if e_tx < 0.0 {
            if e_tx < -self.wd.energy_budget_j * 1e-12 {
                return None;
            }
            e_tx = 0.0;
        }
        let p = e_tx / window;
        if p > self.wd.max_power_w * (1.0 + POWER_REL_TOL) {
            return None;
        }
        let snr = p * self.gain / self.noise_plus_interference();
        Some(window * self.globals.rb_bandwidth_hz * (1.0 + snr).log2())
    }

    /// Maximum data volume deliverable with `z` RBs when computing `c`
    /// cycles at frequency `f`, with the budget-tight power. Exactly linear
    /// in `z`.
    pub fn d_given_f(&self, c: f64, f: f64, z: usize) -> Result<f64> {
        if z == 0 {
            return Ok(0.0);
        }
        self.d_per_rb(c, f)
            .map(|per| z as f64 * per)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "({c} cycles, {f} Hz) lies outside the feasible frequency region"
                ))
            })
    }

    /// Maximum deliverable bits per RB at workload `c`, maximized over the
    /// feasible frequencies, and the frequency attaining it.
    pub fn g_of_c(&self, c: f64) -> Result<RbYield> {
        let interval = self.feasible_freq_interval(c);
        if interval.is_empty() {
            return Err(Error::Infeasible(format!(
                "no feasible frequency for workload {c}"
            )));
        }
        if c <= 0.0 {
            // volume is frequency-independent without compute
            let per = self
                .d_per_rb(0.0, 0.0)
                .expect("nonempty interval at c = 0 implies a feasible tight power");
            return Ok(RbYield {
                bits_per_rb: per,
                freq_hz: 0.0,
            });
        }
        let score = |f: f64| self.d_per_rb(c, f).unwrap_or(f64::NEG_INFINITY);
        let pts = linear_grid(interval.lo_hz, interval.hi_hz, GRID_POINTS);
        let scores: Vec<f64> = pts.iter().map(|&f| score(f)).collect();
        let (f_star, per) = refine_best_on_grid(&pts, &scores, false, SEARCH_REL_TOL, score)
            .ok_or_else(|| {
                Error::Infeasible(format!("every frequency probe failed at workload {c}"))
            })?;
        Ok(RbYield {
            bits_per_rb: per.max(0.0),
            freq_hz: f_star,
        })
    }

    /// Largest workload the budgets admit, capped at the application's
    /// model size. `None` when not even a token workload fits.
    fn c_search_ceiling(&self) -> Option<f64> {
        let c_max = self.wd.app_params.c_max_cycles;
        if !self.feasible_freq_interval(c_max).is_empty() {
            return Some(c_max);
        }
        // feasibility over c need not be one-sided (tiny workloads can
        // force the tight power over the cap), so scan for the largest
        // feasible grid point before refining the boundary
        let pts = log_grid(c_max * 1e-9, c_max, GRID_POINTS);
        let feasible = |c: f64| !self.feasible_freq_interval(c).is_empty();
        let last = pts.iter().rposition(|&c| feasible(c))?;
        let hi = pts[(last + 1).min(pts.len() - 1)];
        Some(bisect_true_boundary(pts[last], hi, SEARCH_REL_TOL, feasible))
    }

    /// Best decision for `z` allocated RBs under the given utility kind.
    ///
    /// Returns the zero decision when `z = 0` or no workload is feasible.
    /// When the deliverable volume exceeds the model output size, the volume
    /// caps there and the transmit power backs off to the smallest level
    /// that still delivers it within the window.
    pub fn optimal_schedule(&self, z: usize, kind: UtilityKind) -> ScheduleDecision {
        if z == 0 {
            return ScheduleDecision::zero();
        }
        let Some(profile) = self.yield_profile() else {
            return ScheduleDecision::zero();
        };
        match self.best_workload(z, &profile, None) {
            Some(pick) => self.decision_at(&pick, z, kind),
            None => ScheduleDecision::zero(),
        }
    }

    /// Utility table `u*(0..=k_max)` with the realizing decisions.
    ///
    /// The per-RB yield profile is computed once and shared across all `z`
    /// (it does not depend on `z`), and each row seeds the next row's search
    /// with its optimum, which keeps the table non-decreasing.
    pub fn utility_table(&self, k_max: usize, kind: UtilityKind) -> DecisionTable {
        let mut decisions = vec![ScheduleDecision::zero(); k_max + 1];
        let Some(profile) = self.yield_profile() else {
            return DecisionTable { decisions };
        };
        let mut prev: Option<WorkloadPick> = None;
        for z in 1..=k_max {
            let pick = self.best_workload(z, &profile, prev.as_ref());
            match pick {
                Some(p) => {
                    let mut dec = self.decision_at(&p, z, kind);
                    // more spectrum can always replay the previous decision,
                    // so a lower score only ever signals refinement jitter
                    if dec.utility < decisions[z - 1].utility {
                        dec = decisions[z - 1];
                    }
                    decisions[z] = dec;
                    prev = Some(p);
                }
                None => {
                    decisions[z] = decisions[z - 1];
                }
            }
        }
        DecisionTable { decisions }
    }

    /// Precomputes the workload grid and its per-RB yields.
    fn yield_profile(&self) -> Option<YieldProfile> {
        let c_ub = self.c_search_ceiling()?;
        let c_lo = c_ub * 1e-6;
        let points = log_grid(c_lo, c_ub, GRID_POINTS);
        let yields: Vec<Option<RbYield>> = points.iter().map(|&c| self.g_of_c(c).ok()).collect();
        if yields.iter().all(Option::is_none) {
            return None;
        }
        Some(YieldProfile { points, yields })
    }

    /// Accuracy attainable at workload `c` with `z` RBs, maximizing over
    /// frequency; `None` when `c` is infeasible.
    fn accuracy_at(&self, c: f64, z: usize) -> Option<(f64, RbYield)> {
        let y = self.g_of_c(c).ok()?;
        let acc = self.accuracy_of_yield(c, &y, z)?;
        Some((acc, y))
    }

    fn accuracy_of_yield(&self, c: f64, y: &RbYield, z: usize) -> Option<f64> {
        let p = &self.wd.app_params;
        let d = (z as f64 * y.bits_per_rb).min(p.d_max_bits);
        utility::accuracy(c, d, p).ok()
    }

    /// Grid + golden-section search for the workload maximizing accuracy at
    /// `z` RBs. Both utility kinds share this search: the reciprocal kind is
    /// a strictly increasing transform of accuracy, so the argmax is
    /// identical by construction.
    fn best_workload(
        &self,
        z: usize,
        profile: &YieldProfile,
        carry: Option<&WorkloadPick>,
    ) -> Option<WorkloadPick> {
        let scores: Vec<f64> = profile
            .points
            .iter()
            .zip(&profile.yields)
            .map(|(&c, y)| match y {
                Some(y) => self
                    .accuracy_of_yield(c, y, z)
                    .unwrap_or(f64::NEG_INFINITY),
                None => f64::NEG_INFINITY,
            })
            .collect();
        let objective = |c: f64| match self.accuracy_at(c, z) {
            Some((acc, _)) => acc,
            None => f64::NEG_INFINITY,
        };
        let refined = refine_best_on_grid(&profile.points, &scores, true, SEARCH_REL_TOL, objective);

        let mut best: Option<WorkloadPick> = None;
        if let Some((c, acc)) = refined {
            if acc > f64::NEG_INFINITY {
                // re-derive the yield at the winning workload
                if let Some((acc, y)) = self.accuracy_at(c, z) {
                    best = Some(WorkloadPick { c, rb_yield: y, accuracy: acc });
                }
            }
        }
        if let Some(prev) = carry {
            // the previous row's optimum re-scored with one more RB; its
            // yield is workload-only, so it carries over unchanged
            if let Some(acc) = self.accuracy_of_yield(prev.c, &prev.rb_yield, z) {
                if best.as_ref().map_or(true, |b| acc > b.accuracy) {
                    best = Some(WorkloadPick {
                        c: prev.c,
                        rb_yield: prev.rb_yield,
                        accuracy: acc,
                    });
                }
            }
        }
        best
    }

    /// Materializes a full decision from a chosen workload.
    fn decision_at(&self, pick: &WorkloadPick, z: usize, kind: UtilityKind) -> ScheduleDecision {
        let p = &self.wd.app_params;
        let c = pick.c;
        let f = pick.rb_yield.freq_hz;
        let raw_d = z as f64 * pick.rb_yield.bits_per_rb;
        if raw_d <= 0.0 {
            return ScheduleDecision::zero();
        }
        let window = self
            .transmit_window(c, f)
            .expect("a positive yield implies a positive window");

        let (d, power) = if raw_d >= p.d_max_bits {
            // cap at the full model output and back the power off to the
            // smallest level delivering it in the window
            let spectrum_s = z as f64 * self.globals.rb_bandwidth_hz * window;
            let needed_snr = (p.d_max_bits / spectrum_s).exp2() - 1.0;
            let power = needed_snr * self.noise_plus_interference() / self.gain;
            (p.d_max_bits, power)
        } else {
            let power = self
                .tight_power(c, f)
                .expect("feasible yield implies a valid tight power");
            (raw_d, power)
        };
        let power = power.min(self.wd.max_power_w).max(0.0);
        let utility = utility::utility(c, d, p, kind)
            .expect("workload and volume are inside the fit domain");
        if utility <= 0.0 {
            return ScheduleDecision::zero();
        }
        ScheduleDecision {
            c_cycles: c,
            freq_hz: f,
            power_w: power,
            data_bits: d,
            utility,
        }
    }

    /// Smallest power transmitting `d` bits over `z` RBs within the window
    /// left by computing `c` cycles at `f`, if it fits all caps.
    ///
    /// This is the feasibility primitive for fixed-scheme baselines.
    pub fn power_for_volume(&self, c: f64, f: f64, z: usize, d: f64) -> Result<f64> {
        if d <= 0.0 {
            return Ok(0.0);
        }
        if z == 0 {
            return Err(Error::Infeasible("no spectrum for a nonzero volume".into()));
        }
        let window = self
            .transmit_window(c, f)
            .ok_or_else(|| Error::Infeasible("deadline consumed by computation".into()))?;
        let e_comp = compute_energy(c, self.wd.energy_coeff, f);
        let e_left = self.wd.energy_budget_j - e_comp;
        if e_left < 0.0 {
            return Err(Error::Infeasible("energy consumed by computation".into()));
        }
        let spectrum_s = z as f64 * self.globals.rb_bandwidth_hz * window;
        let needed_snr = (d / spectrum_s).exp2() - 1.0;
        let power = needed_snr * self.noise_plus_interference() / self.gain;
        if power > self.wd.max_power_w * (1.0 + POWER_REL_TOL) {
            return Err(Error::Infeasible("power cap exceeded".into()));
        }
        // transmitting for the whole window at this power must fit the budget
        if power * window > e_left * (1.0 + 1e-9) {
            return Err(Error::Infeasible("energy budget exceeded".into()));
        }
        Ok(power.min(self.wd.max_power_w))
    }
}

/// A source of per-(WD, BS) utility tables. The proposed pipeline uses the
/// adaptive scheduler; fixed-scheme baselines substitute their own tables
/// and inherit the allocation and association stages unchanged.
pub trait ScheduleModel: Sync {
    fn decision_table(&self, link: &LinkCtx<'_>, k_max: usize, kind: UtilityKind) -> DecisionTable;
}

/// The adaptive scheduler: full per-WD workload/frequency/power/volume
/// optimization.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveSchedule;

impl ScheduleModel for AdaptiveSchedule {
    fn decision_table(&self, link: &LinkCtx<'_>, k_max: usize, kind: UtilityKind) -> DecisionTable {
        link.utility_table(k_max, kind)
    }
}

/// A workload choice with its per-RB yield and achieved accuracy.
#[derive(Debug, Clone, Copy)]
struct WorkloadPick {
    c: f64,
    rb_yield: RbYield,
    accuracy: f64,
}

/// Cached workload grid with per-RB yields, shared across RB counts.
struct YieldProfile {
    points: Vec<f64>,
    yields: Vec<Option<RbYield>>,
}

/// Utility table of one (WD, BS) pair with the decisions that realize it.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTable {
    /// Indexed by RB count; entry 0 is the zero decision.
    pub decisions: Vec<ScheduleDecision>,
}

impl DecisionTable {
    pub fn k_max(&self) -> usize {
        self.decisions.len() - 1
    }

    pub fn utility(&self, z: usize) -> f64 {
        self.decisions[z].utility
    }

    /// The utility column, in RB-count order.
    pub fn utilities(&self) -> Vec<f64> {
        self.decisions.iter().map(|d| d.utility).collect()
    }
}

/// Reference golden-section stationarity check used by tests: relative
/// centered difference of the yield at `f`, or `None` where undefined.
#[cfg(test)]
pub(crate) fn yield_slope(ctx: &LinkCtx<'_>, c: f64, f: f64) -> Option<f64> {
    let h = f * 1e-6;
    let up = ctx.d_per_rb(c, f + h)?;
    let down = ctx.d_per_rb(c, f - h)?;
    let here = ctx.d_per_rb(c, f)?;
    Some((up - down) / (2.0 * h) * f / here.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GlobalParams;
    use crate::utility::{AccuracyParams, LogBase};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table_globals() -> GlobalParams {
        GlobalParams {
            rb_bandwidth_hz: 2e5,
            max_delay_s: 1e-2,
            noise_power_w: 1e-13,
        }
    }

    fn table_wd(seed: u64) -> WirelessDevice {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        WirelessDevice {
            id: 0,
            position_m: [0.0, 0.0],
            max_freq_hz: rng.gen_range(1e9..3e9),
            max_power_w: 0.2,
            energy_budget_j: 2e-3,
            energy_coeff: rng.gen_range(1e-28..1e-27),
            app_params: AccuracyParams {
                eta1: rng.gen_range(0.05..0.08),
                eta2: rng.gen_range(0.9..0.95),
                c_max_cycles: rng.gen_range(5e6..1e7),
                beta1: rng.gen_range(-0.75..-0.6),
                beta2: rng.gen_range(10.0..20.0),
                beta3: rng.gen_range(0.9..0.95),
                d_max_bits: rng.gen_range(1.5e5..2.5e5),
                raw_data_bits: rng.gen_range(4e5..8e5),
                log_base: LogBase::Natural,
            },
        }
    }

    fn ctx<'a>(wd: &'a WirelessDevice, globals: &'a GlobalParams, gain: f64) -> LinkCtx<'a> {
        LinkCtx::new(wd, globals, gain, 5e-13)
    }

    #[test]
    fn tight_power_boundaries() {
        let globals = table_globals();
        let wd = table_wd(1);
        let link = ctx(&wd, &globals, 1e-9);
        // all budget to transmission
        let p = link.tight_power(0.0, 0.0).unwrap();
        assert!((p - wd.energy_budget_j / globals.max_delay_s).abs() < 1e-12);
        // compute consumes the whole budget: c * gamma * f^2 = E_max
        let mut wd2 = table_wd(2);
        wd2.energy_coeff = 1e-27;
        wd2.energy_budget_j = 2e-3;
        let link2 = ctx(&wd2, &globals, 1e-9);
        let p = link2.tight_power(2e6, 1e9).unwrap();
        assert!(p.abs() < 1e-9, "expected zero power, got {p}");
    }

    #[test]
    fn freq_interval_empty_when_compute_misses_deadline() {
        let globals = table_globals();
        let wd = table_wd(3);
        let link = ctx(&wd, &globals, 1e-9);
        let c = wd.max_freq_hz * globals.max_delay_s * 1.01;
        assert!(link.feasible_freq_interval(c).is_empty());
    }

    #[test]
    fn freq_interval_full_at_zero_workload_with_tight_budget() {
        let globals = table_globals();
        let wd = table_wd(4);
        let link = ctx(&wd, &globals, 1e-9);
        // E_max / T_max = 0.2 W exactly matches the power cap
        let iv = link.feasible_freq_interval(0.0);
        assert!(!iv.is_empty());
        assert_eq!(iv.lo_hz, 0.0);
        assert_eq!(iv.hi_hz, wd.max_freq_hz);
    }

    #[test]
    fn freq_interval_matches_dense_scan() {
        let globals = table_globals();
        for seed in [5u64, 6, 7] {
            let wd = table_wd(seed);
            let link = ctx(&wd, &globals, 1e-10);
            let c = wd.app_params.c_max_cycles / 2.0;
            let iv = link.feasible_freq_interval(c);

            // independent scan of the three constraints over frequency
            let n = 100_000;
            let mut scan_lo = f64::INFINITY;
            let mut scan_hi = f64::NEG_INFINITY;
            for i in 1..=n {
                let f = wd.max_freq_hz * i as f64 / n as f64;
                let t_comp = c / f;
                if t_comp >= globals.max_delay_s {
                    continue;
                }
                let e_comp = compute_energy(c, wd.energy_coeff, f);
                if e_comp > wd.energy_budget_j {
                    continue;
                }
                let p = (wd.energy_budget_j - e_comp) / (globals.max_delay_s - t_comp);
                if p > wd.max_power_w * (1.0 + 1e-9) {
                    continue;
                }
                scan_lo = scan_lo.min(f);
                scan_hi = scan_hi.max(f);
            }
            let step = wd.max_freq_hz / n as f64;
            if iv.is_empty() {
                assert!(scan_lo.is_infinite(), "scan found feasible points, interval empty");
            } else {
                assert!((iv.lo_hz - scan_lo).abs() <= step + 1e-6 * scan_lo);
                assert!((iv.hi_hz - scan_hi).abs() <= step + 1e-6 * scan_hi);
            }
        }
    }

    #[test]
    fn d_given_f_z_prefactor_is_exact() {
        let globals = table_globals();
        let wd = table_wd(8);
        let link = ctx(&wd, &globals, 1e-10);
        let c = wd.app_params.c_max_cycles / 3.0;
        let iv = link.feasible_freq_interval(c);
        assert!(!iv.is_empty());
        let f = 0.5 * (iv.lo_hz + iv.hi_hz);
        let d1 = link.d_given_f(c, f, 1).unwrap();
        let d2 = link.d_given_f(c, f, 2).unwrap();
        let d7 = link.d_given_f(c, f, 7).unwrap();
        assert_eq!(d2, 2.0 * d1);
        assert_eq!(d7, 7.0 * d1);
        assert_eq!(link.d_given_f(c, f, 0).unwrap(), 0.0);
    }

    #[test]
    fn d_given_f_zero_when_compute_drains_energy() {
        let globals = table_globals();
        let mut wd = table_wd(9);
        wd.energy_coeff = 1e-27;
        wd.energy_budget_j = 2e-3;
        wd.max_freq_hz = 2e9;
        let link = ctx(&wd, &globals, 1e-9);
        // c * gamma * f^2 = E_max at f = 1 GHz
        let d = link.d_given_f(2e6, 1e9, 3).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn g_vanishes_as_compute_fills_deadline() {
        let globals = table_globals();
        let mut wd = table_wd(10);
        // keep the energy constraint loose so the deadline dominates
        wd.energy_coeff = 1e-29;
        let link = ctx(&wd, &globals, 1e-9);
        let c = wd.max_freq_hz * globals.max_delay_s * 0.999999;
        if let Ok(y) = link.g_of_c(c) {
            assert!(y.bits_per_rb < 50.0, "yield should collapse, got {}", y.bits_per_rb);
        }
    }

    #[test]
    fn g_matches_grid_scan() {
        let globals = table_globals();
        for seed in [11u64, 12, 13, 14] {
            let wd = table_wd(seed);
            let link = ctx(&wd, &globals, 1e-10);
            let c = wd.app_params.c_max_cycles / 2.0;
            let iv = link.feasible_freq_interval(c);
            assert!(!iv.is_empty());
            let y = link.g_of_c(c).unwrap();

            let mut scan_best = f64::NEG_INFINITY;
            for i in 0..10_000 {
                let f = iv.lo_hz + (iv.hi_hz - iv.lo_hz) * i as f64 / 9_999.0;
                if let Some(d) = link.d_per_rb(c, f) {
                    scan_best = scan_best.max(d);
                }
            }
            assert!(
                y.bits_per_rb >= scan_best * (1.0 - 1e-6),
                "optimizer {} below scan {}",
                y.bits_per_rb,
                scan_best
            );
        }
    }

    #[test]
    fn g_argmax_is_stationary_or_at_boundary() {
        let globals = table_globals();
        for seed in [15u64, 16, 17] {
            let wd = table_wd(seed);
            let link = ctx(&wd, &globals, 1e-10);
            let c = wd.app_params.c_max_cycles / 2.0;
            let iv = link.feasible_freq_interval(c);
            let y = link.g_of_c(c).unwrap();
            let at_edge = (y.freq_hz - iv.lo_hz).abs() <= 1e-5 * iv.lo_hz.max(1.0)
                || (iv.hi_hz - y.freq_hz).abs() <= 1e-5 * iv.hi_hz;
            if !at_edge {
                let slope = yield_slope(&link, c, y.freq_hz).unwrap();
                assert!(
                    slope.abs() < 1e-5,
                    "seed {seed}: interior argmax with relative slope {slope}"
                );
            }
        }
    }

    #[test]
    fn schedule_zero_rbs_is_zero() {
        let globals = table_globals();
        let wd = table_wd(18);
        let link = ctx(&wd, &globals, 1e-10);
        let dec = link.optimal_schedule(0, UtilityKind::ConcaveAccuracy);
        assert_eq!(dec, ScheduleDecision::zero());
    }

    /// Exhaustive 500x500 (c, f) reference solver used to pin the optimizer.
    fn grid_oracle(link: &LinkCtx<'_>, z: usize, kind: UtilityKind) -> f64 {
        let p = &link.wd.app_params;
        let mut best = 0.0f64;
        let n = 500;
        for i in 1..=n {
            let c = p.c_max_cycles * i as f64 / n as f64;
            for j in 1..=n {
                let f = link.wd.max_freq_hz * j as f64 / n as f64;
                if let Some(per) = link.d_per_rb(c, f) {
                    let d = (z as f64 * per).min(p.d_max_bits);
                    if let Ok(u) = utility::utility(c, d, p, kind) {
                        best = best.max(u);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn schedule_beats_grid_oracle() {
        let globals = table_globals();
        let wd = table_wd(19);
        let link = ctx(&wd, &globals, 3e-11);
        for z in [1usize, 3] {
            let dec = link.optimal_schedule(z, UtilityKind::ConcaveAccuracy);
            let oracle = grid_oracle(&link, z, UtilityKind::ConcaveAccuracy);
            assert!(
                dec.utility >= oracle * (1.0 - 1e-4),
                "z={z}: optimizer {} vs grid {}",
                dec.utility,
                oracle
            );
        }
    }

    #[test]
    fn schedule_saturates_both_budgets_when_unsaturated_volume() {
        let globals = table_globals();
        for seed in [20u64, 21, 22, 23] {
            let wd = table_wd(seed);
            let link = ctx(&wd, &globals, 2e-11);
            let dec = link.optimal_schedule(2, UtilityKind::ConcaveAccuracy);
            if dec.utility == 0.0 || dec.data_bits >= wd.app_params.d_max_bits * (1.0 - 1e-9) {
                continue;
            }
            let t_comp = dec.c_cycles / dec.freq_hz;
            let rate = crate::model::link_rate(2, &globals, dec.power_w, link.gain, link.interference_w);
            let t_tx = dec.data_bits / rate;
            let e = compute_energy(dec.c_cycles, wd.energy_coeff, dec.freq_hz)
                + dec.power_w * t_tx;
            assert!(
                ((t_comp + t_tx) - globals.max_delay_s).abs() <= 1e-6 * globals.max_delay_s,
                "seed {seed}: slack deadline"
            );
            assert!(
                (e - wd.energy_budget_j).abs() <= 1e-6 * wd.energy_budget_j,
                "seed {seed}: slack energy, used {e}"
            );
        }
    }

    #[test]
    fn utility_table_shape_and_monotonicity() {
        let globals = table_globals();
        let wd = table_wd(24);
        let link = ctx(&wd, &globals, 1e-10);

        let trivial = link.utility_table(0, UtilityKind::ConcaveAccuracy);
        assert_eq!(trivial.utilities(), vec![0.0]);

        let table = link.utility_table(40, UtilityKind::ConcaveAccuracy);
        let u = table.utilities();
        assert_eq!(u[0], 0.0);
        for z in 1..u.len() {
            assert!(u[z] >= u[z - 1], "table dips at z={z}: {} < {}", u[z], u[z - 1]);
        }
    }

    #[test]
    fn utility_table_concave_for_accuracy_kind() {
        let globals = table_globals();
        for seed in [25u64, 26, 27] {
            let wd = table_wd(seed);
            let link = ctx(&wd, &globals, 1e-10);
            let u = link.utility_table(30, UtilityKind::ConcaveAccuracy).utilities();
            let tol = 1e-6 * u[u.len() - 1].max(1e-12);
            for z in 1..u.len() - 1 {
                let second = u[z + 1] - 2.0 * u[z] + u[z - 1];
                assert!(
                    second <= tol,
                    "seed {seed}: convex kink at z={z}: {second} > {tol}"
                );
            }
        }
    }

    #[test]
    fn argmax_workload_agrees_across_kinds() {
        let globals = table_globals();
        let wd = table_wd(28);
        let link = ctx(&wd, &globals, 1e-10);
        let a = link.optimal_schedule(4, UtilityKind::ConcaveAccuracy);
        let b = link.optimal_schedule(4, UtilityKind::GeneralReciprocal);
        // both kinds maximize the same accuracy objective
        assert_eq!(a.c_cycles, b.c_cycles);
        assert_eq!(a.data_bits, b.data_bits);
        assert!(b.utility >= a.utility);
    }

    #[test]
    fn optimal_compute_grows_with_spectrum() {
        let globals = table_globals();
        let wd = table_wd(29);
        let link = ctx(&wd, &globals, 1e-10);
        let table = link.utility_table(25, UtilityKind::ConcaveAccuracy);
        let mut prev_c = 0.0;
        for z in 1..=25 {
            let c = table.decisions[z].c_cycles;
            if table.decisions[z].utility == 0.0 {
                continue;
            }
            assert!(
                c >= prev_c * (1.0 - 1e-3),
                "optimal workload shrank at z={z}: {c} < {prev_c}"
            );
            prev_c = prev_c.max(c);
        }
    }
}
