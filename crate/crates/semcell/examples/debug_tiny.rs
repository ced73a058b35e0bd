//! Scratch inspection of one tiny instance: heuristic vs oracle, step by
//! step. Run: cargo run --release -p semcell --example debug_tiny -- <seed>

use semcell::alloc::RbAllocator;
use semcell::assoc::{associate, estimate_delta, kurtosis, TableSet};
use semcell::baselines::run_proposed;
use semcell::oracle::{exact_solve, OracleConfig};
use semcell::scenario::{generate, GenConfig};
use semcell::utility::UtilityKind;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let cfg = GenConfig {
        num_bs: 2,
        num_wd: 3,
        rb_count_choices: vec![2, 3, 4],
        seed,
        ..GenConfig::default()
    };
    let s = generate(&cfg).unwrap();
    let kind = UtilityKind::ConcaveAccuracy;

    println!("K = {:?}", s.bss.iter().map(|b| b.rb_count).collect::<Vec<_>>());
    let tables = TableSet::build(&s, kind);
    for n in 0..3 {
        for m in 0..2 {
            println!(
                "u*({n},{m}) = {:?}  gain={:.3e}",
                tables
                    .utility(n, m)
                    .values()
                    .iter()
                    .map(|u| (u * 1e4).round() / 1e4)
                    .collect::<Vec<_>>(),
                s.channel.gain(n, m)
            );
        }
    }

    // replay the association by hand to see each step's estimates
    let mut decided: Vec<Option<usize>> = vec![None; 3];
    let mut pending = [true; 3];
    for step in 0..3 {
        let members: Vec<Vec<usize>> = (0..2)
            .map(|m| {
                (0..3)
                    .filter(|&n| pending[n] || decided[n] == Some(m))
                    .collect()
            })
            .collect();
        let allocs: Vec<_> = (0..2)
            .map(|m| {
                let t: Vec<_> = members[m].iter().map(|&n| tables.utility(n, m)).collect();
                RbAllocator::Greedy.run(&t, s.bss[m].rb_count)
            })
            .collect();
        println!("step {step}: members {members:?}");
        for m in 0..2 {
            println!("  BS{m} alloc {:?} total {:.4}", allocs[m].rb_counts, allocs[m].total_utility);
        }
        for n in (0..3).filter(|&n| pending[n]) {
            let deltas: Vec<f64> = (0..2)
                .map(|m| estimate_delta(n, m, &members[m], &allocs[m], &tables))
                .collect();
            println!(
                "  WD{n}: deltas {:?} kappa {:.4}",
                deltas.iter().map(|d| (d * 1e4).round() / 1e4).collect::<Vec<_>>(),
                kurtosis(&deltas)
            );
        }
        // mirror the real selection
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for n in (0..3).filter(|&n| pending[n]) {
            let deltas: Vec<f64> = (0..2)
                .map(|m| estimate_delta(n, m, &members[m], &allocs[m], &tables))
                .collect();
            let k = kurtosis(&deltas);
            if best.as_ref().map_or(true, |(bk, _, _)| k > *bk) {
                best = Some((k, n, deltas));
            }
        }
        let (_, n_pick, deltas) = best.unwrap();
        let mut m_pick = 0;
        for m in 1..2 {
            if deltas[m] > deltas[m_pick] {
                m_pick = m;
            }
        }
        println!("  -> detach WD{n_pick} to BS{m_pick}");
        decided[n_pick] = Some(m_pick);
        pending[n_pick] = false;
    }

    let out = associate(&s, &tables, RbAllocator::Greedy);
    println!(
        "heuristic: assoc {:?} alloc {:?} total {:.6}",
        out.assignment.association, out.assignment.allocation, out.assignment.total_utility
    );
    let heur2 = run_proposed(&s, kind, None);
    assert_eq!(heur2.assignment.total_utility, out.assignment.total_utility);

    let sol = exact_solve(&s, kind, &OracleConfig::default()).unwrap();
    println!(
        "oracle:    assoc {:?} alloc {:?} total {:.6}",
        sol.assignment.association, sol.assignment.allocation, sol.value
    );
}
