use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use semcell::alloc::RbAllocator;
use semcell::baselines::run_proposed;
use semcell::experiment::{self, Algorithm, ExperimentSpec, SweepAxis};
use semcell::model::validate_assignment;
use semcell::oracle::{exact_solve, OracleConfig};
use semcell::scenario::{generate, GenConfig, Scenario};
use semcell::utility::{validate_assumptions, GridSpec, UtilityKind};

#[derive(Parser)]
#[command(
    name = "semcell",
    version,
    about = "Multi-cell simulator for adaptive semantic communication: \
             scenario generation, solvers, benchmarks, and sweep experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file
    Gen {
        /// Number of base stations
        #[arg(long, default_value_t = 5)]
        bs: usize,
        /// Number of wireless devices
        #[arg(long, default_value_t = 30)]
        wd: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side of the square area in meters
        #[arg(long, default_value_t = 500.0)]
        area: f64,
        /// Start from this generator config JSON instead of the defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output scenario path
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one scenario with one algorithm and print a summary
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        /// prop | tc | fsc | arb | nua | fan
        #[arg(long, default_value = "prop")]
        algorithm: String,
        /// concave | general
        #[arg(long, default_value = "concave")]
        utility: String,
        /// greedy | dp | even (defaults per utility kind)
        #[arg(long)]
        allocator: Option<String>,
        /// Also write the full assignment as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment spec and write a CSV table
    Experiment {
        /// Experiment spec JSON; omit to use a preset
        #[arg(long, conflicts_with = "preset")]
        spec: Option<PathBuf>,
        /// baselines | bs-sweep | wd-sweep | delay-sweep | energy-sweep
        #[arg(long)]
        preset: Option<String>,
        /// Utility kind for presets
        #[arg(long, default_value = "concave")]
        utility: String,
        /// Base seed for presets
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Exit nonzero if any run produced an error row
        #[arg(long)]
        strict: bool,
    },
    /// Compare the three-stage solver against exhaustive enumeration on
    /// tiny instances
    OracleCheck {
        #[arg(long, default_value_t = 20)]
        instances: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "concave")]
        utility: String,
        /// Minimum acceptable heuristic/oracle utility ratio
        #[arg(long, default_value_t = 0.95)]
        min_ratio: f64,
    },
    /// Check the utility-surface assumptions on every WD of a scenario
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "concave")]
        utility: String,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Gen {
            bs,
            wd,
            seed,
            area,
            config,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<GenConfig>(&text)?
                }
                None => GenConfig::default(),
            };
            cfg.num_bs = bs;
            cfg.num_wd = wd;
            cfg.seed = seed;
            cfg.area_m = area;
            let scenario = generate(&cfg)?;
            scenario.save(&out)?;
            println!(
                "wrote scenario: {} BSs, {} WDs, seed {} -> {}",
                bs,
                wd,
                seed,
                out.display()
            );
            Ok(())
        }

        Command::Solve {
            scenario,
            algorithm,
            utility,
            allocator,
            out,
        } => {
            let s = Scenario::load(&scenario)?;
            let kind: UtilityKind = utility.parse()?;
            let allocator = allocator.map(|a| a.parse::<RbAllocator>()).transpose()?;
            let algorithm: Algorithm = algorithm.parse()?;

            let t0 = Instant::now();
            let assignment = match algorithm {
                Algorithm::Prop => {
                    let outcome = run_proposed(&s, kind, allocator);
                    println!("upper bound (all-associated relaxation): {:.6}", outcome.upper_bound);
                    outcome.assignment
                }
                other => {
                    let baseline = match other {
                        Algorithm::Tc => semcell::baselines::BaselineKind::Tc,
                        Algorithm::Fsc => semcell::baselines::BaselineKind::Fsc,
                        Algorithm::Arb => semcell::baselines::BaselineKind::Arb,
                        Algorithm::Nua => semcell::baselines::BaselineKind::Nua,
                        Algorithm::Fan => semcell::baselines::BaselineKind::Fan,
                        Algorithm::Prop => unreachable!(),
                    };
                    semcell::baselines::run_baseline(baseline, &s, kind, allocator)
                }
            };
            let wall = t0.elapsed();

            for m in 0..s.num_bs() {
                let members: Vec<usize> = (0..s.num_wd())
                    .filter(|&n| assignment.association[n] == Some(m))
                    .collect();
                let bs_utility: f64 = members
                    .iter()
                    .map(|&n| assignment.schedules[n].utility)
                    .sum();
                let rbs: usize = members.iter().map(|&n| assignment.allocation[n]).sum();
                println!(
                    "BS{m}: {:2} WDs, {:3}/{:3} RBs, utility {:.6}",
                    members.len(),
                    rbs,
                    s.bss[m].rb_count,
                    bs_utility
                );
            }
            println!(
                "{} total utility: {:.6} ({} WDs active, {:.1} ms)",
                algorithm.label(),
                assignment.total_utility,
                assignment.schedules.iter().filter(|d| d.utility > 0.0).count(),
                wall.as_secs_f64() * 1e3
            );

            let report = validate_assignment(&assignment, &s);
            println!("validation: {report}");
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&assignment)?)?;
                println!("assignment written to {}", path.display());
            }
            if !report.is_clean() {
                bail!("assignment violates constraints");
            }
            Ok(())
        }

        Command::Experiment {
            spec,
            preset,
            utility,
            seed,
            out,
            strict,
        } => {
            let spec = match (spec, preset) {
                (Some(path), None) => ExperimentSpec::load(&path)?,
                (None, preset) => {
                    let kind: UtilityKind = utility.parse()?;
                    preset_spec(preset.as_deref().unwrap_or("baselines"), kind, seed)?
                }
                (Some(_), Some(_)) => unreachable!("clap forbids both"),
            };
            let result = experiment::run(&spec)?;
            experiment::emit_csv(&result, &spec, &out)?;
            let errors = result.error_count();
            println!(
                "{} data rows + {} aggregate rows -> {} ({} error rows)",
                result.rows.len(),
                result.aggregates.len(),
                out.display(),
                errors
            );
            if strict && errors > 0 {
                bail!("{errors} error rows under --strict");
            }
            Ok(())
        }

        Command::OracleCheck {
            instances,
            seed,
            utility,
            min_ratio,
        } => {
            let kind: UtilityKind = utility.parse()?;
            let mut worst: f64 = f64::INFINITY;
            let mut failures = 0u64;
            for i in 0..instances {
                let cfg = GenConfig {
                    num_bs: 2,
                    num_wd: 3,
                    rb_count_choices: vec![2, 3, 4],
                    seed: seed + i,
                    ..GenConfig::default()
                };
                let s = generate(&cfg)?;
                let sol = exact_solve(&s, kind, &OracleConfig::default())?;
                let heuristic = run_proposed(&s, kind, None).assignment.total_utility;
                let ratio = if sol.value > 1e-12 {
                    heuristic / sol.value
                } else {
                    1.0
                };
                worst = worst.min(ratio);
                let ok = ratio >= min_ratio;
                if !ok {
                    failures += 1;
                }
                println!(
                    "instance {:2} (seed {:3}): heuristic {:.6} / oracle {:.6} = {:.4} {}",
                    i,
                    seed + i,
                    heuristic,
                    sol.value,
                    ratio,
                    if ok { "ok" } else { "FAIL" }
                );
            }
            println!("worst ratio {worst:.4} over {instances} instances (threshold {min_ratio})");
            if failures > 0 {
                bail!("{failures} instances below ratio {min_ratio}");
            }
            Ok(())
        }

        Command::Validate { scenario, utility } => {
            let s = Scenario::load(&scenario)?;
            let kind: UtilityKind = utility.parse()?;
            let mut pass = [0usize; 3];
            for wd in &s.wds {
                let p = &wd.app_params;
                let grid = GridSpec::over(p, p.d_max_bits / 2.0);
                let report = validate_assumptions(p, kind, &grid)?;
                let checks = [
                    &report.monotone_concave,
                    &report.comp_gain_grows_with_data,
                    &report.data_gain_decay,
                ];
                for (i, c) in checks.iter().enumerate() {
                    if c.passed {
                        pass[i] += 1;
                    }
                }
                let flags: String = checks
                    .iter()
                    .map(|c| if c.passed { '.' } else { 'x' })
                    .collect();
                let worst = checks
                    .iter()
                    .map(|c| c.worst_violation)
                    .fold(0.0f64, f64::max);
                println!("WD {:3} [{}] worst violation {:.3e}", wd.id, flags, worst);
            }
            let n = s.num_wd();
            println!(
                "monotone+concave: {}/{n}, compute-gain growth: {}/{n}, data-gain decay: {}/{n}",
                pass[0], pass[1], pass[2]
            );
            Ok(())
        }
    }
}

/// Ready-made experiment shapes mirroring the standard evaluation plots.
fn preset_spec(name: &str, kind: UtilityKind, seed: u64) -> anyhow::Result<ExperimentSpec> {
    let mut spec = ExperimentSpec {
        utility: kind,
        ..ExperimentSpec::default()
    };
    spec.base.seed = seed;
    match name {
        "baselines" => {}
        "bs-sweep" => {
            spec.sweep_axis = SweepAxis::NumBs;
            spec.sweep_values = (3..=8).map(|m| m as f64).collect();
        }
        "wd-sweep" => {
            spec.sweep_axis = SweepAxis::NumWd;
            spec.sweep_values = vec![10.0, 20.0, 30.0, 40.0, 50.0];
        }
        "delay-sweep" => {
            spec.sweep_axis = SweepAxis::MaxDelay;
            spec.sweep_values = vec![5e-3, 10e-3, 15e-3, 20e-3];
        }
        "energy-sweep" => {
            spec.sweep_axis = SweepAxis::EnergyBudget;
            spec.sweep_values = vec![1e-3, 2e-3, 3e-3, 4e-3];
        }
        other => bail!("unknown preset '{other}'"),
    }
    Ok(spec)
}
