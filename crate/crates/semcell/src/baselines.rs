//! The five comparison algorithms. Each swaps exactly one stage of the
//! proposed pipeline (FAN swaps all three):
//!
//! | algorithm | scheduling      | allocation | association |
//! |-----------|-----------------|------------|-------------|
//! | TC        | raw data, c = 0 | proposed   | proposed    |
//! | FSC       | fixed (c, d)    | proposed   | proposed    |
//! | ARB       | proposed        | even split | proposed    |
//! | NUA       | proposed        | proposed   | nearest BS  |
//! | FAN       | fixed (c, d)    | even split | nearest BS  |
//!
//! The fixed-scheme algorithms produce step-shaped utility tables (a scheme
//! either fits into `z` RBs or it does not), which are not concave, so their
//! allocation stage always runs the exact dynamic program.

use serde::{Deserialize, Serialize};

use crate::alloc::RbAllocator;
use crate::assoc::{assignment_for, associate, AssociationOutcome, TableSet};
use crate::model::Assignment;
use crate::scenario::Scenario;
use crate::sched::{DecisionTable, LinkCtx, ScheduleDecision, ScheduleModel};
use crate::utility::{self, AccuracyParams, UtilityKind};

/// The five benchmark algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    Tc,
    Fsc,
    Arb,
    Nua,
    Fan,
}

/// Scheduling for traditional communication: the device does not process;
/// the raw data either fits the link or the WD sits out. On success the BS
/// runs the largest model, so the accuracy is the application's `eta2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TcSchedule;

/// One row of the TC step table.
pub fn tc_schedule(link: &LinkCtx<'_>, z: usize, kind: UtilityKind) -> ScheduleDecision {
    TcSchedule.decision_table(link, z, kind).decisions[z]
}

impl ScheduleModel for TcSchedule {
    fn decision_table(&self, link: &LinkCtx<'_>, k_max: usize, kind: UtilityKind) -> DecisionTable {
        let mut decisions = vec![ScheduleDecision::zero(); k_max + 1];
        let p = link.wd.app_params.clone();
        let Ok(rb_yield) = link.g_of_c(0.0) else {
            return DecisionTable { decisions };
        };
        let Ok(utility) = kind.transform(p.eta2) else {
            return DecisionTable { decisions };
        };
        for (z, slot) in decisions.iter_mut().enumerate().skip(1) {
            let capacity = z as f64 * rb_yield.bits_per_rb;
            if capacity < p.raw_data_bits * (1.0 - 1e-12) {
                continue; // raw data does not fit; boundary counts as success
            }
            let Ok(power) = link.power_for_volume(0.0, 0.0, z, p.raw_data_bits) else {
                continue;
            };
            *slot = ScheduleDecision {
                c_cycles: 0.0,
                freq_hz: 0.0,
                power_w: power,
                data_bits: p.raw_data_bits,
                utility,
            };
        }
        DecisionTable { decisions }
    }
}

/// Where the fixed semantic scheme takes its compute workload from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FscWorkload {
    /// Workload numerically equal to half the output size (cycles = bits/2).
    #[default]
    HalfOutputBits,
    /// Half the largest model's workload.
    HalfModelCycles,
}

/// Fixed semantic communication: every WD runs the same scheme regardless
/// of its resources, transmitting half the model output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FscSchedule {
    pub workload: FscWorkload,
}

impl FscSchedule {
    fn scheme(&self, p: &AccuracyParams) -> (f64, f64) {
        let c = match self.workload {
            FscWorkload::HalfOutputBits => p.d_max_bits / 2.0,
            FscWorkload::HalfModelCycles => p.c_max_cycles / 2.0,
        };
        (c, p.d_max_bits / 2.0)
    }
}

/// One row of the FSC step table.
pub fn fsc_schedule(
    link: &LinkCtx<'_>,
    z: usize,
    kind: UtilityKind,
    scheme: FscSchedule,
) -> ScheduleDecision {
    scheme.decision_table(link, z, kind).decisions[z]
}

impl ScheduleModel for FscSchedule {
    fn decision_table(&self, link: &LinkCtx<'_>, k_max: usize, kind: UtilityKind) -> DecisionTable {
        let mut decisions = vec![ScheduleDecision::zero(); k_max + 1];
        let p = link.wd.app_params.clone();
        let (c_fix, d_fix) = self.scheme(&p);
        let Ok(rb_yield) = link.g_of_c(c_fix) else {
            return DecisionTable { decisions };
        };
        let Ok(utility) = utility::utility(c_fix, d_fix, &p, kind) else {
            return DecisionTable { decisions };
        };
        for (z, slot) in decisions.iter_mut().enumerate().skip(1) {
            let capacity = z as f64 * rb_yield.bits_per_rb;
            if capacity < d_fix * (1.0 - 1e-12) {
                continue;
            }
            let Ok(power) = link.power_for_volume(c_fix, rb_yield.freq_hz, z, d_fix) else {
                continue;
            };
            *slot = ScheduleDecision {
                c_cycles: c_fix,
                freq_hz: rb_yield.freq_hz,
                power_w: power,
                data_bits: d_fix,
                utility,
            };
        }
        DecisionTable { decisions }
    }
}

/// Nearest-BS association by Euclidean distance, lowest BS id on ties.
pub fn nua_assoc(s: &Scenario) -> Vec<Option<usize>> {
    s.wds
        .iter()
        .map(|wd| {
            let mut best = 0usize;
            let mut best_d2 = f64::INFINITY;
            for bs in &s.bss {
                let dx = wd.position_m[0] - bs.position_m[0];
                let dy = wd.position_m[1] - bs.position_m[1];
                let d2 = dx * dx + dy * dy;
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = bs.id;
                }
            }
            Some(best)
        })
        .collect()
}

/// Runs the full proposed pipeline: adaptive scheduling tables, the chosen
/// allocator (defaulting per utility kind), and detachment association.
pub fn run_proposed(
    s: &Scenario,
    kind: UtilityKind,
    allocator: Option<RbAllocator>,
) -> AssociationOutcome {
    let tables = TableSet::build(s, kind);
    let allocator = allocator.unwrap_or_else(|| RbAllocator::default_for(kind));
    associate(s, &tables, allocator)
}

/// Runs one benchmark end to end on a scenario.
///
/// `allocator` selects the solver for stages that use the proposed
/// allocation; fixed-scheme tables always use the dynamic program, and even
/// split is forced where the benchmark demands it.
pub fn run_baseline(
    kind: BaselineKind,
    s: &Scenario,
    utility_kind: UtilityKind,
    allocator: Option<RbAllocator>,
) -> Assignment {
    let proposed_alloc = allocator.unwrap_or_else(|| RbAllocator::default_for(utility_kind));
    match kind {
        BaselineKind::Tc => {
            let tables = TableSet::build_with(s, utility_kind, &TcSchedule);
            associate(s, &tables, RbAllocator::Dp).assignment
        }
        BaselineKind::Fsc => {
            let tables = TableSet::build_with(s, utility_kind, &FscSchedule::default());
            associate(s, &tables, RbAllocator::Dp).assignment
        }
        BaselineKind::Arb => {
            let tables = TableSet::build(s, utility_kind);
            associate(s, &tables, RbAllocator::Even).assignment
        }
        BaselineKind::Nua => {
            let tables = TableSet::build(s, utility_kind);
            assignment_for(s, &tables, &nua_assoc(s), proposed_alloc)
        }
        BaselineKind::Fan => {
            let tables = TableSet::build_with(s, utility_kind, &FscSchedule::default());
            assignment_for(s, &tables, &nua_assoc(s), RbAllocator::Even)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_assignment;
    use crate::scenario::{generate, GenConfig};

    fn scenario(seed: u64) -> Scenario {
        generate(&GenConfig {
            num_bs: 3,
            num_wd: 8,
            seed,
            rb_count_choices: vec![10, 15, 20],
            ..GenConfig::default()
        })
        .unwrap()
    }

    fn strong_link_ctx(s: &Scenario) -> (usize, usize) {
        // pick the (wd, bs) pair with the best gain so schemes can succeed
        let mut best = (0, 0);
        let mut best_g = 0.0;
        for n in 0..s.num_wd() {
            for m in 0..s.num_bs() {
                if s.channel.gain(n, m) > best_g {
                    best_g = s.channel.gain(n, m);
                    best = (n, m);
                }
            }
        }
        best
    }

    #[test]
    fn tc_is_two_valued_and_thresholded() {
        let s = scenario(21);
        let (n, m) = strong_link_ctx(&s);
        let link = LinkCtx::for_pair(&s, n, m);
        let eta2 = s.wds[n].app_params.eta2;

        assert_eq!(
            tc_schedule(&link, 0, UtilityKind::ConcaveAccuracy),
            ScheduleDecision::zero()
        );
        let table = TcSchedule.decision_table(&link, 120, UtilityKind::ConcaveAccuracy);
        let mut seen_success = false;
        for z in 0..=120 {
            let u = table.decisions[z].utility;
            assert!(u == 0.0 || (u - eta2).abs() < 1e-15, "TC utility {u} not two-valued");
            if u > 0.0 {
                seen_success = true;
                assert_eq!(table.decisions[z].c_cycles, 0.0);
                assert_eq!(table.decisions[z].data_bits, s.wds[n].app_params.raw_data_bits);
            } else {
                assert!(!seen_success, "TC success must be monotone in z");
            }
        }
    }

    #[test]
    fn tc_success_matches_capacity_threshold() {
        let s = scenario(22);
        let (n, m) = strong_link_ctx(&s);
        let link = LinkCtx::for_pair(&s, n, m);
        let g0 = link.g_of_c(0.0).unwrap();
        let d_raw = s.wds[n].app_params.raw_data_bits;
        let table = TcSchedule.decision_table(&link, 120, UtilityKind::ConcaveAccuracy);
        for z in 1..=120 {
            let fits = z as f64 * g0.bits_per_rb >= d_raw * (1.0 - 1e-12);
            assert_eq!(table.decisions[z].utility > 0.0, fits, "z = {z}");
        }
    }

    #[test]
    fn fsc_utility_is_z_independent_beyond_feasibility() {
        let s = scenario(23);
        let (n, m) = strong_link_ctx(&s);
        let link = LinkCtx::for_pair(&s, n, m);
        let p = &s.wds[n].app_params;
        let expected = utility::utility(
            p.d_max_bits / 2.0,
            p.d_max_bits / 2.0,
            p,
            UtilityKind::ConcaveAccuracy,
        )
        .unwrap();

        let table =
            FscSchedule::default().decision_table(&link, 60, UtilityKind::ConcaveAccuracy);
        let mut threshold = None;
        for z in 1..=60 {
            let u = table.decisions[z].utility;
            if u > 0.0 {
                assert!((u - expected).abs() < 1e-15);
                if threshold.is_none() {
                    threshold = Some(z);
                }
            } else {
                assert!(threshold.is_none(), "feasibility must flip once, at z={z}");
            }
        }
    }

    #[test]
    fn even_split_matches_optimal_when_alone() {
        let s = generate(&GenConfig {
            num_bs: 3,
            num_wd: 3,
            seed: 24,
            rb_count_choices: vec![12],
            ..GenConfig::default()
        })
        .unwrap();
        let kind = UtilityKind::ConcaveAccuracy;
        let tables = TableSet::build(&s, kind);
        // one WD per BS: the even share is the full budget, as is the optimum
        let assoc: Vec<Option<usize>> = (0..3).map(Some).collect();
        let even = assignment_for(&s, &tables, &assoc, RbAllocator::Even);
        let opt = assignment_for(&s, &tables, &assoc, RbAllocator::Dp);
        assert_eq!(even.total_utility, opt.total_utility);
        assert_eq!(even.allocation, opt.allocation);
    }

    #[test]
    fn nearest_association_is_nearest() {
        let s = scenario(25);
        let assoc = nua_assoc(&s);
        for (n, wd) in s.wds.iter().enumerate() {
            let picked = assoc[n].unwrap();
            let d2 = |m: usize| {
                let dx = wd.position_m[0] - s.bss[m].position_m[0];
                let dy = wd.position_m[1] - s.bss[m].position_m[1];
                dx * dx + dy * dy
            };
            for m in 0..s.num_bs() {
                assert!(d2(picked) <= d2(m) + 1e-9);
            }
        }
    }

    #[test]
    fn all_baselines_validate_clean() {
        let s = scenario(26);
        for kind in [UtilityKind::ConcaveAccuracy, UtilityKind::GeneralReciprocal] {
            for b in [
                BaselineKind::Tc,
                BaselineKind::Fsc,
                BaselineKind::Arb,
                BaselineKind::Nua,
                BaselineKind::Fan,
            ] {
                let a = run_baseline(b, &s, kind, None);
                let report = validate_assignment(&a, &s);
                assert!(report.is_clean(), "{b:?}/{kind:?}: {report}");
            }
        }
    }
}
