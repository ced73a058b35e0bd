//! User association: start from the relaxation where every WD is associated
//! with every BS, then detach one WD per step until each WD has exactly one
//! serving BS.
//!
//! Detaching WD `n` from BS `m` frees its RBs for redistribution, so the
//! utility lost is the WD's own contribution minus what the others recover.
//! Re-solving the allocation per candidate would be exact but quadratic in
//! practice; instead the recovered part is estimated by one reference
//! marginal gain, `delta_m ~= u*_n(z) - gain * z`. WDs whose estimates
//! single out one BS clearly (large max-over-sum ratio) are committed first,
//! since their best BS is least likely to change as the sets shrink.

use crate::alloc::{AllocationResult, RbAllocator, UtilityTable};
use crate::model::Assignment;
use crate::par;
use crate::scenario::Scenario;
use crate::sched::{AdaptiveSchedule, DecisionTable, LinkCtx, ScheduleModel};
use crate::utility::UtilityKind;

/// All per-(WD, BS) decision tables of a scenario under one utility kind,
/// sized to each BS's RB budget.
pub struct TableSet {
    num_bs: usize,
    decisions: Vec<DecisionTable>,
    utilities: Vec<UtilityTable>,
}

impl TableSet {
    /// Builds every (WD, BS) table with the adaptive scheduler, in parallel
    /// when the `parallel` feature is enabled.
    pub fn build(s: &Scenario, kind: UtilityKind) -> Self {
        Self::build_with(s, kind, &AdaptiveSchedule)
    }

    /// Sequential twin of [`TableSet::build`]; produces identical tables.
    pub fn build_sequential(s: &Scenario, kind: UtilityKind) -> Self {
        Self::assemble(
            s,
            par::map_collect_seq(Self::pairs(s), |(n, m)| {
                AdaptiveSchedule.decision_table(&LinkCtx::for_pair(s, n, m), s.bss[m].rb_count, kind)
            }),
        )
    }

    /// Builds tables under an alternative scheduling model.
    pub fn build_with<M: ScheduleModel>(s: &Scenario, kind: UtilityKind, model: &M) -> Self {
        Self::assemble(
            s,
            par::map_collect(Self::pairs(s), |(n, m)| {
                model.decision_table(&LinkCtx::for_pair(s, n, m), s.bss[m].rb_count, kind)
            }),
        )
    }

    fn pairs(s: &Scenario) -> Vec<(usize, usize)> {
        let mut pairs = Vec::with_capacity(s.num_wd() * s.num_bs());
        for n in 0..s.num_wd() {
            for m in 0..s.num_bs() {
                pairs.push((n, m));
            }
        }
        pairs
    }

    fn assemble(s: &Scenario, decisions: Vec<DecisionTable>) -> Self {
        let utilities = decisions
            .iter()
            .map(|t| UtilityTable::new(t.utilities()))
            .collect();
        Self {
            num_bs: s.num_bs(),
            decisions,
            utilities,
        }
    }

    pub fn decisions(&self, n: usize, m: usize) -> &DecisionTable {
        &self.decisions[n * self.num_bs + m]
    }

    pub fn utility(&self, n: usize, m: usize) -> &UtilityTable {
        &self.utilities[n * self.num_bs + m]
    }
}

/// Estimated utility loss at BS `m` if member `n` detaches: the WD's own
/// utility minus a reference marginal gain times the RBs it frees.
///
/// The reference is the co-member with the largest current allocation
/// (lowest index on ties); with no co-members nothing is recovered and the
/// loss is the full contribution. Clamped at zero: a detachment cannot
/// profit the BS it leaves.
pub fn estimate_delta(
    n: usize,
    m: usize,
    members: &[usize],
    alloc: &AllocationResult,
    tables: &TableSet,
) -> f64 {
    let pos = members
        .iter()
        .position(|&x| x == n)
        .expect("delta of a non-member");
    let z_n = alloc.rb_counts[pos];
    let own = tables.utility(n, m).get(z_n);

    let mut reference: Option<(usize, usize)> = None;
    for (j, &other) in members.iter().enumerate() {
        if other == n {
            continue;
        }
        let zj = alloc.rb_counts[j];
        if reference.map_or(true, |(_, best_z)| zj > best_z) {
            reference = Some((j, zj));
        }
    }

    let delta = match reference {
        None => own,
        Some((j, zj)) => {
            let table = tables.utility(members[j], m);
            let gain = if zj + 1 <= table.k_max() {
                table.get(zj + 1) - table.get(zj)
            } else {
                0.0
            };
            own - gain * z_n as f64
        }
    };
    delta.max(0.0)
}

/// Ratio of the largest detachment loss to their sum; close to 1 means one
/// BS dominates, `1/M` means indifference (also the all-zero fallback).
pub fn kurtosis(deltas: &[f64]) -> f64 {
    let sum: f64 = deltas.iter().sum();
    if sum > 0.0 {
        let max = deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max / sum
    } else {
        1.0 / deltas.len() as f64
    }
}

/// Association output plus the diagnostics the relaxation provides for free.
#[derive(Debug, Clone)]
pub struct AssociationOutcome {
    pub assignment: Assignment,
    /// Relaxed total with every WD associated everywhere; an upper bound on
    /// any feasible total.
    pub upper_bound: f64,
    /// Relaxed total at the start of each detachment step, then the final
    /// constrained total.
    pub step_totals: Vec<f64>,
}

/// Runs the detachment heuristic over prebuilt tables.
///
/// Each step re-solves every BS's allocation, estimates per-BS losses for
/// the still-pending WDs, and commits the WD with the sharpest preference
/// to its best BS. Ties fall to the lowest WD / BS index. Infeasible WDs
/// end up associated wherever their (all-zero) estimates point, carrying
/// zero RBs and zero utility.
pub fn associate(s: &Scenario, tables: &TableSet, allocator: RbAllocator) -> AssociationOutcome {
    let num_wd = s.num_wd();
    let num_bs = s.num_bs();
    let mut decided: Vec<Option<usize>> = vec![None; num_wd];
    let mut pending: Vec<bool> = vec![true; num_wd];
    let mut upper_bound = 0.0;
    let mut step_totals = Vec::with_capacity(num_wd + 1);

    for step in 0..num_wd {
        let members: Vec<Vec<usize>> = (0..num_bs)
            .map(|m| {
                (0..num_wd)
                    .filter(|&n| pending[n] || decided[n] == Some(m))
                    .collect()
            })
            .collect();
        let allocs = solve_all_bs(s, tables, &members, allocator);

        let relaxed_total: f64 = allocs.iter().map(|a| a.total_utility).sum();
        if step == 0 {
            upper_bound = relaxed_total;
        }
        step_totals.push(relaxed_total);

        // sharpest pending WD wins this step
        let mut winner: Option<(f64, usize, Vec<f64>)> = None;
        for n in (0..num_wd).filter(|&n| pending[n]) {
            let deltas: Vec<f64> = (0..num_bs)
                .map(|m| estimate_delta(n, m, &members[m], &allocs[m], tables))
                .collect();
            let kappa = kurtosis(&deltas);
            if winner.as_ref().map_or(true, |(best, _, _)| kappa > *best) {
                winner = Some((kappa, n, deltas));
            }
        }
        let (_, n_pick, deltas) = winner.expect("a pending WD exists for every step");
        let mut m_pick = 0;
        for m in 1..num_bs {
            if deltas[m] > deltas[m_pick] {
                m_pick = m;
            }
        }
        decided[n_pick] = Some(m_pick);
        pending[n_pick] = false;
    }

    let assignment = assignment_for(s, tables, &decided, allocator);
    step_totals.push(assignment.total_utility);
    AssociationOutcome {
        assignment,
        upper_bound,
        step_totals,
    }
}

/// Solves the RB allocation of every BS for the given member lists.
fn solve_all_bs(
    s: &Scenario,
    tables: &TableSet,
    members: &[Vec<usize>],
    allocator: RbAllocator,
) -> Vec<AllocationResult> {
    par::map_collect((0..s.num_bs()).collect(), |m| {
        let member_tables: Vec<&UtilityTable> =
            members[m].iter().map(|&n| tables.utility(n, m)).collect();
        allocator.run(&member_tables, s.bss[m].rb_count)
    })
}

/// Completes a fixed association into a full assignment: allocates each
/// BS's RBs among its members and attaches the realizing decisions.
pub fn assignment_for(
    s: &Scenario,
    tables: &TableSet,
    association: &[Option<usize>],
    allocator: RbAllocator,
) -> Assignment {
    let num_wd = s.num_wd();
    let num_bs = s.num_bs();
    let members: Vec<Vec<usize>> = (0..num_bs)
        .map(|m| {
            (0..num_wd)
                .filter(|&n| association[n] == Some(m))
                .collect()
        })
        .collect();
    let allocs = solve_all_bs(s, tables, &members, allocator);

    let mut assignment = Assignment::empty(num_wd);
    assignment.association = association.to_vec();
    for m in 0..num_bs {
        for (pos, &n) in members[m].iter().enumerate() {
            let z = allocs[m].rb_counts[pos];
            assignment.allocation[n] = z;
            assignment.schedules[n] = tables.decisions(n, m).decisions[z];
        }
    }
    assignment.total_utility = assignment.schedules.iter().map(|d| d.utility).sum();
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc::dp_alloc;
    use crate::model::validate_assignment;
    use crate::scenario::{generate, GenConfig};

    fn small_scenario(num_bs: usize, num_wd: usize, seed: u64) -> Scenario {
        generate(&GenConfig {
            num_bs,
            num_wd,
            seed,
            rb_count_choices: vec![4, 6, 8],
            ..GenConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn kurtosis_examples() {
        assert_eq!(kurtosis(&[2.0, 2.0, 2.0, 2.0]), 0.25);
        assert_eq!(kurtosis(&[5.0, 0.0, 0.0]), 1.0);
        assert!((kurtosis(&[3.0, 1.0, 1.0]) - 0.6).abs() < 1e-15);
        assert_eq!(kurtosis(&[0.0, 0.0]), 0.5);
    }

    #[test]
    fn delta_zero_rbs_is_zero() {
        let s = small_scenario(2, 3, 11);
        let tables = TableSet::build(&s, UtilityKind::ConcaveAccuracy);
        let members = vec![0usize, 1, 2];
        let alloc = AllocationResult {
            rb_counts: vec![0, 3, 1],
            total_utility: 0.0,
        };
        assert_eq!(estimate_delta(0, 0, &members, &alloc, &tables), 0.0);
    }

    #[test]
    fn delta_sole_member_keeps_everything() {
        let s = small_scenario(2, 2, 12);
        let tables = TableSet::build(&s, UtilityKind::ConcaveAccuracy);
        let members = vec![1usize];
        let k = s.bss[0].rb_count;
        let alloc = AllocationResult {
            rb_counts: vec![k],
            total_utility: tables.utility(1, 0).get(k),
        };
        let d = estimate_delta(1, 0, &members, &alloc, &tables);
        assert_eq!(d, tables.utility(1, 0).get(k));
    }

    #[test]
    fn single_bs_degenerates_to_plain_allocation() {
        let s = small_scenario(1, 4, 13);
        let tables = TableSet::build(&s, UtilityKind::ConcaveAccuracy);
        let out = associate(&s, &tables, RbAllocator::Dp);

        assert!(out.assignment.association.iter().all(|a| *a == Some(0)));
        let member_tables: Vec<&UtilityTable> =
            (0..4).map(|n| tables.utility(n, 0)).collect();
        let direct = dp_alloc(&member_tables, s.bss[0].rb_count);
        assert_eq!(out.assignment.total_utility, direct.total_utility);
    }

    #[test]
    fn lone_wd_joins_the_stronger_channel() {
        // two BSs with equal budgets; WD 0 must join the better link
        let mut s = small_scenario(2, 1, 14);
        s.bss[0].rb_count = 6;
        s.bss[1].rb_count = 6;
        s.bss[0].interference_w = 5e-13;
        s.bss[1].interference_w = 5e-13;
        let tables = TableSet::build(&s, UtilityKind::ConcaveAccuracy);
        let out = associate(&s, &tables, RbAllocator::Dp);
        let u0 = tables.utility(0, 0).get(6);
        let u1 = tables.utility(0, 1).get(6);
        let expect = if u0 >= u1 { 0 } else { 1 };
        assert_eq!(out.assignment.association[0], Some(expect));
    }

    #[test]
    fn association_is_deterministic_and_valid() {
        let s = small_scenario(3, 8, 15);
        for kind in [UtilityKind::ConcaveAccuracy, UtilityKind::GeneralReciprocal] {
            let tables = TableSet::build(&s, kind);
            let allocator = RbAllocator::default_for(kind);
            let a = associate(&s, &tables, allocator);
            let b = associate(&s, &tables, allocator);
            assert_eq!(a.assignment, b.assignment);
            let report = validate_assignment(&a.assignment, &s);
            assert!(report.is_clean(), "{report}");
        }
    }

    #[test]
    fn step_totals_never_exceed_upper_bound() {
        let s = small_scenario(3, 10, 16);
        let tables = TableSet::build(&s, UtilityKind::ConcaveAccuracy);
        let out = associate(&s, &tables, RbAllocator::Greedy);
        for (i, &t) in out.step_totals.iter().enumerate() {
            assert!(
                t <= out.upper_bound * (1.0 + 1e-12),
                "step {i} total {t} above bound {}",
                out.upper_bound
            );
        }
    }

    #[test]
    fn sequential_build_matches_parallel() {
        let s = small_scenario(2, 4, 17);
        let par = TableSet::build(&s, UtilityKind::ConcaveAccuracy);
        let seq = TableSet::build_sequential(&s, UtilityKind::ConcaveAccuracy);
        for n in 0..s.num_wd() {
            for m in 0..s.num_bs() {
                assert_eq!(par.decisions(n, m), seq.decisions(n, m));
            }
        }
    }
}
