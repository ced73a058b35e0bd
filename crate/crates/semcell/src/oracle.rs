//! Exhaustive reference solver for tiny instances.
//!
//! Enumerates every association (including leaving a WD out) and every
//! integer RB split per BS; each WD's inner problem is solved on a dense
//! workload/frequency grid with golden-section polish. The per-point
//! physics is written out independently of the production scheduler — the
//! transmit power caps at the device limit instead of assuming both budgets
//! bind — so the two solvers only agree if both are right.

use crate::model::{compute_energy, Assignment};
use crate::numopt::{golden_max, linear_grid, log_grid, refine_best_on_grid};
use crate::scenario::Scenario;
use crate::sched::{LinkCtx, ScheduleDecision};
use crate::utility::{self, UtilityKind};
use crate::{par, Error, Result};

/// Enumeration limits and grid resolution of the exact solver.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub c_grid_points: usize,
    pub f_grid_points: usize,
    pub max_bs: usize,
    pub max_wd: usize,
    pub max_rb: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            c_grid_points: 64,
            f_grid_points: 64,
            max_bs: 3,
            max_wd: 4,
            max_rb: 6,
        }
    }
}

/// Certified solution of a tiny instance.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub assignment: Assignment,
    /// Grid-optimal total utility.
    pub value: f64,
}

/// Per-RB volume the physics admits at `(c, f)`: full transmit window,
/// power at the smaller of the budget-exhausting level and the cap.
fn phys_per_rb(link: &LinkCtx<'_>, c: f64, f: f64) -> Option<f64> {
    let t_comp = if c == 0.0 {
        0.0
    } else if f > 0.0 {
        c / f
    } else {
        return None;
    };
    if f < 0.0 || f > link.wd.max_freq_hz {
        return None;
    }
    let window = link.globals.max_delay_s - t_comp;
    if window <= 0.0 {
        return None;
    }
    let e_tx = link.wd.energy_budget_j - compute_energy(c, link.wd.energy_coeff, f);
    if e_tx < 0.0 {
        return None;
    }
    let p = (e_tx / window).min(link.wd.max_power_w);
    let snr = p * link.gain / (link.globals.noise_power_w + link.interference_w);
    Some(window * link.globals.rb_bandwidth_hz * (1.0 + snr).log2())
}

fn phys_utility(link: &LinkCtx<'_>, c: f64, f: f64, z: usize, kind: UtilityKind) -> f64 {
    let p = &link.wd.app_params;
    match phys_per_rb(link, c, f) {
        Some(per) => {
            let d = (z as f64 * per).min(p.d_max_bits);
            utility::utility(c, d, p, kind).unwrap_or(f64::NEG_INFINITY)
        }
        None => f64::NEG_INFINITY,
    }
}

/// Best utility over frequencies at a fixed workload: grid plus golden.
fn best_over_f(link: &LinkCtx<'_>, c: f64, z: usize, kind: UtilityKind, cfg: &OracleConfig) -> (f64, f64) {
    let f_lo = if c == 0.0 {
        return (0.0, phys_utility(link, 0.0, 0.0, z, kind));
    } else {
        c / link.globals.max_delay_s
    };
    let e = link.wd.energy_budget_j;
    let f_energy = (e / (c * link.wd.energy_coeff)).sqrt();
    let f_hi = link.wd.max_freq_hz.min(f_energy);
    if f_hi <= f_lo {
        return (0.0, f64::NEG_INFINITY);
    }
    let score = |f: f64| phys_utility(link, c, f, z, kind);
    let pts = linear_grid(f_lo * (1.0 + 1e-12), f_hi, cfg.f_grid_points);
    let scores: Vec<f64> = pts.iter().map(|&f| score(f)).collect();
    match refine_best_on_grid(&pts, &scores, false, 1e-9, score) {
        Some((f, u)) => (f, u),
        None => (0.0, f64::NEG_INFINITY),
    }
}

/// Grid-optimal decision for one (WD, BS, RB count) triple.
fn best_for_z(link: &LinkCtx<'_>, z: usize, kind: UtilityKind, cfg: &OracleConfig) -> ScheduleDecision {
    if z == 0 {
        return ScheduleDecision::zero();
    }
    let c_max = link.wd.app_params.c_max_cycles;
    let c_pts = log_grid(c_max * 1e-6, c_max, cfg.c_grid_points);
    let value_at = |c: f64| best_over_f(link, c, z, kind, cfg).1;
    let scores: Vec<f64> = c_pts.iter().map(|&c| value_at(c)).collect();

    let mut best_c = None;
    for (i, &s) in scores.iter().enumerate() {
        if s > f64::NEG_INFINITY && best_c.map_or(true, |j: usize| s > scores[j]) {
            best_c = Some(i);
        }
    }
    // zero compute (raw relay) is also admissible
    let zero_c_value = phys_utility(link, 0.0, 0.0, z, kind);
    let Some(i) = best_c else {
        return if zero_c_value > 0.0 {
            decision_at(link, 0.0, 0.0, z, kind)
        } else {
            ScheduleDecision::zero()
        };
    };

    let lo = c_pts[i.saturating_sub(1)].ln();
    let hi = c_pts[(i + 1).min(c_pts.len() - 1)].ln();
    let (lc, polished) = golden_max(lo, hi, 1e-9, |t| value_at(t.exp()));
    let (c_star, u_star) = if polished > scores[i] {
        (lc.exp(), polished)
    } else {
        (c_pts[i], scores[i])
    };
    if zero_c_value >= u_star {
        return decision_at(link, 0.0, 0.0, z, kind);
    }
    let (f_star, _) = best_over_f(link, c_star, z, kind, cfg);
    decision_at(link, c_star, f_star, z, kind)
}

/// Materializes the decision at `(c, f)` with capped power and volume.
fn decision_at(link: &LinkCtx<'_>, c: f64, f: f64, z: usize, kind: UtilityKind) -> ScheduleDecision {
    let p = &link.wd.app_params;
    let Some(per) = phys_per_rb(link, c, f) else {
        return ScheduleDecision::zero();
    };
    let t_comp = if c == 0.0 { 0.0 } else { c / f };
    let window = link.globals.max_delay_s - t_comp;
    let e_tx = link.wd.energy_budget_j - compute_energy(c, link.wd.energy_coeff, f);
    let power = (e_tx / window).min(link.wd.max_power_w).max(0.0);
    let d = (z as f64 * per).min(p.d_max_bits);
    let utility = utility::utility(c, d, p, kind).unwrap_or(0.0);
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

/// Best split of `k` RBs over `members` given their utility-by-z rows;
/// exhaustive over all integer compositions.
fn best_composition(rows: &[&[f64]], k: usize) -> (f64, Vec<usize>) {
    fn rec(
        rows: &[&[f64]],
        j: usize,
        left: usize,
        acc: f64,
        current: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        if j == rows.len() {
            if acc > best.0 {
                *best = (acc, current.clone());
            }
            return;
        }
        for z in 0..=left.min(rows[j].len() - 1) {
            current.push(z);
            rec(rows, j + 1, left - z, acc + rows[j][z], current, best);
            current.pop();
        }
    }
    let mut best = (f64::NEG_INFINITY, vec![0; rows.len()]);
    let mut current = Vec::with_capacity(rows.len());
    rec(rows, 0, k, 0.0, &mut current, &mut best);
    best
}

/// Exact solve by full enumeration. Rejects instances beyond the
/// configured limits; the association space alone is `(M+1)^N`.
pub fn exact_solve(s: &Scenario, kind: UtilityKind, cfg: &OracleConfig) -> Result<OracleSolution> {
    let num_bs = s.num_bs();
    let num_wd = s.num_wd();
    if num_bs > cfg.max_bs || num_wd > cfg.max_wd {
        return Err(Error::TooLarge(format!(
            "{num_bs} BSs x {num_wd} WDs exceeds {}x{}",
            cfg.max_bs, cfg.max_wd
        )));
    }
    if let Some(bs) = s.bss.iter().find(|b| b.rb_count > cfg.max_rb) {
        return Err(Error::TooLarge(format!(
            "BS {} owns {} RBs, limit {}",
            bs.id, bs.rb_count, cfg.max_rb
        )));
    }

    // grid-solve every (WD, BS, z) triple up front
    let tables: Vec<Vec<ScheduleDecision>> = par::map_collect(
        (0..num_wd * num_bs).collect(),
        |idx| {
            let (n, m) = (idx / num_bs, idx % num_bs);
            let link = LinkCtx::for_pair(s, n, m);
            (0..=s.bss[m].rb_count)
                .map(|z| best_for_z(&link, z, kind, cfg))
                .collect()
        },
    );
    let utility_rows: Vec<Vec<f64>> = tables
        .iter()
        .map(|row| row.iter().map(|d| d.utility).collect())
        .collect();

    let combos = (num_bs + 1).pow(num_wd as u32);
    let evaluated: Vec<(f64, Vec<Vec<usize>>)> = par::map_collect(
        (0..combos).collect(),
        |combo| {
            // digit n in base M+1: 0 = unassociated, m+1 = BS m
            let mut digits = vec![0usize; num_wd];
            let mut rest = combo;
            for d in digits.iter_mut() {
                *d = rest % (num_bs + 1);
                rest /= num_bs + 1;
            }
            let mut total = 0.0;
            let mut splits: Vec<Vec<usize>> = Vec::with_capacity(num_bs);
            for m in 0..num_bs {
                let members: Vec<usize> =
                    (0..num_wd).filter(|&n| digits[n] == m + 1).collect();
                if members.is_empty() {
                    splits.push(Vec::new());
                    continue;
                }
                let rows: Vec<&[f64]> = members
                    .iter()
                    .map(|&n| utility_rows[n * num_bs + m].as_slice())
                    .collect();
                let (value, counts) = best_composition(&rows, s.bss[m].rb_count);
                total += value;
                splits.push(counts);
            }
            (total, splits)
        },
    );

    let mut best_combo = 0usize;
    for (i, (total, _)) in evaluated.iter().enumerate() {
        if *total > evaluated[best_combo].0 {
            best_combo = i;
        }
    }

    // reconstruct the winning assignment
    let (_, splits) = &evaluated[best_combo];
    let mut digits = vec![0usize; num_wd];
    let mut rest = best_combo;
    for d in digits.iter_mut() {
        *d = rest % (num_bs + 1);
        rest /= num_bs + 1;
    }
    let mut assignment = Assignment::empty(num_wd);
    for m in 0..num_bs {
        let members: Vec<usize> = (0..num_wd).filter(|&n| digits[n] == m + 1).collect();
        for (pos, &n) in members.iter().enumerate() {
            let z = splits[m][pos];
            assignment.association[n] = Some(m);
            assignment.allocation[n] = z;
            assignment.schedules[n] = tables[n * num_bs + m][z];
        }
    }
    assignment.total_utility = assignment.schedules.iter().map(|d| d.utility).sum();
    let value = assignment.total_utility;
    Ok(OracleSolution { assignment, value })
}

/// Exact utility loss at one BS if the member at `member_idx` detaches:
/// its own contribution minus what the survivors recover when the freed
/// RBs are re-allocated optimally.
pub fn exact_delta(
    member_idx: usize,
    tables: &[&crate::alloc::UtilityTable],
    current: &crate::alloc::AllocationResult,
    k: usize,
) -> f64 {
    let own = tables[member_idx].get(current.rb_counts[member_idx]);
    let survivors: Vec<&crate::alloc::UtilityTable> = tables
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != member_idx)
        .map(|(_, t)| *t)
        .collect();
    if survivors.is_empty() {
        return own;
    }
    let realloc = crate::alloc::dp_alloc(&survivors, k);
    let survivors_now: f64 = current
        .rb_counts
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != member_idx)
        .map(|(j, &z)| tables[j].get(z))
        .sum();
    own - (realloc.total_utility - survivors_now)
}
