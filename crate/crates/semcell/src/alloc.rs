//! Per-BS resource-block allocation: split `k` RBs among the associated
//! WDs to maximize the sum of their utility tables.
//!
//! Two solvers cover the two utility regimes. The greedy pass hands out one
//! RB at a time to the largest marginal gain, which is optimal exactly when
//! every table is concave. The dynamic program is exact for arbitrary
//! tables at the cost of an extra factor of `k`. An even split (the ARB
//! baseline) lives here too so the association stage can treat all three
//! uniformly.

use crate::{Error, Result};

/// Utility of one WD as a function of its allocated RB count.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    values: Vec<f64>,
}

impl UtilityTable {
    /// Wraps `values[z] = u*(z)`; must be non-empty.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "a utility table needs at least u*(0)");
        Self { values }
    }

    pub fn get(&self, z: usize) -> f64 {
        self.values[z]
    }

    /// Largest RB count the table covers.
    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Gain from granting one more RB on top of `z`.
pub fn marginal_gain(table: &UtilityTable, z: usize) -> Result<f64> {
    if z + 1 > table.k_max() {
        return Err(Error::Domain(format!(
            "marginal gain at z={z} needs table entry {} of {}",
            z + 1,
            table.k_max()
        )));
    }
    Ok(table.get(z + 1) - table.get(z))
}

/// RB counts per WD (table order) and the utility they add up to.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub rb_counts: Vec<usize>,
    pub total_utility: f64,
}

impl AllocationResult {
    fn from_counts(tables: &[&UtilityTable], rb_counts: Vec<usize>) -> Self {
        let total_utility = tables
            .iter()
            .zip(&rb_counts)
            .map(|(t, &z)| t.get(z))
            .sum();
        Self {
            rb_counts,
            total_utility,
        }
    }

    pub fn rb_used(&self) -> usize {
        self.rb_counts.iter().sum()
    }
}

/// Which allocation solver the association stage should call per BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RbAllocator {
    Greedy,
    Dp,
    /// Even split; the ARB/FAN baseline rule.
    Even,
}

impl RbAllocator {
    /// Greedy is optimal (and cheaper) for the concave kind; anything else
    /// needs the exact dynamic program.
    pub fn default_for(kind: crate::utility::UtilityKind) -> Self {
        match kind {
            crate::utility::UtilityKind::ConcaveAccuracy => RbAllocator::Greedy,
            crate::utility::UtilityKind::GeneralReciprocal => RbAllocator::Dp,
        }
    }

    pub fn run(self, tables: &[&UtilityTable], k: usize) -> AllocationResult {
        match self {
            RbAllocator::Greedy => greedy_alloc(tables, k),
            RbAllocator::Dp => dp_alloc(tables, k),
            RbAllocator::Even => arb_alloc(tables, k),
        }
    }
}

impl std::str::FromStr for RbAllocator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(RbAllocator::Greedy),
            "dp" => Ok(RbAllocator::Dp),
            "even" => Ok(RbAllocator::Even),
            other => Err(Error::InvalidParameter(format!(
                "unknown allocator '{other}' (expected greedy|dp|even)"
            ))),
        }
    }
}

/// Greedy allocation: all `k` RBs are handed out one at a time to the WD
/// with the highest marginal gain; ties and zero gains go to the lowest
/// index. Optimal when every table is concave.
///
/// Only the winner's marginal is recomputed between rounds, so the whole
/// pass is O(|tables| * k).
pub fn greedy_alloc(tables: &[&UtilityTable], k: usize) -> AllocationResult {
    let n = tables.len();
    let mut counts = vec![0usize; n];
    if n == 0 {
        return AllocationResult {
            rb_counts: counts,
            total_utility: 0.0,
        };
    }
    let gain = |i: usize, z: usize| -> f64 {
        if z + 1 <= tables[i].k_max() {
            tables[i].get(z + 1) - tables[i].get(z)
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut gains: Vec<f64> = (0..n).map(|i| gain(i, 0)).collect();

    for _ in 0..k {
        let mut best = 0usize;
        for i in 1..n {
            if gains[i] > gains[best] {
                best = i;
            }
        }
        if gains[best] == f64::NEG_INFINITY {
            break; // every table saturated its coverage
        }
        counts[best] += 1;
        gains[best] = gain(best, counts[best]);
    }
    AllocationResult::from_counts(tables, counts)
}

/// Exact allocation by dynamic programming over (budget, WD prefix),
/// correct for arbitrary tables. O(|tables| * k^2).
pub fn dp_alloc(tables: &[&UtilityTable], k: usize) -> AllocationResult {
    let n = tables.len();
    if n == 0 {
        return AllocationResult {
            rb_counts: Vec::new(),
            total_utility: 0.0,
        };
    }
    let cols = k + 1;
    // value[j][b]: best total for the first j WDs with budget b (row 0 is
    // the empty prefix); choice[(j-1)][b]: RBs granted to WD j-1 there.
    // Ties go to the larger grant, so a lone WD with a non-decreasing
    // table still takes the whole budget.
    let mut value = vec![0.0f64; (n + 1) * cols];
    let mut choice = vec![0usize; n * cols];

    for j in 0..n {
        let t = tables[j];
        for b in 0..cols {
            let mut best_v = f64::NEG_INFINITY;
            let mut best_z = 0usize;
            for z in 0..=b.min(t.k_max()) {
                let v = value[j * cols + (b - z)] + t.get(z);
                if v >= best_v {
                    best_v = v;
                    best_z = z;
                }
            }
            value[(j + 1) * cols + b] = best_v;
            choice[j * cols + b] = best_z;
        }
    }

    let mut counts = vec![0usize; n];
    let mut budget = k;
    for j in (0..n).rev() {
        let z = choice[j * cols + budget];
        counts[j] = z;
        budget -= z;
    }
    AllocationResult::from_counts(tables, counts)
}

/// Even split: everyone gets `floor(k / n)` RBs and the remainder goes one
/// each to the lowest indices.
pub fn arb_alloc(tables: &[&UtilityTable], k: usize) -> AllocationResult {
    let n = tables.len();
    if n == 0 {
        return AllocationResult {
            rb_counts: Vec::new(),
            total_utility: 0.0,
        };
    }
    let share = k / n;
    let leftover = k % n;
    let counts: Vec<usize> = (0..n)
        .map(|i| {
            let z = share + usize::from(i < leftover);
            z.min(tables[i].k_max())
        })
        .collect();
    AllocationResult::from_counts(tables, counts)
}
