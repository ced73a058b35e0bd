//! Accuracy curve fits and the utility functions built on them, plus
//! samplers that check the structural assumptions the greedy RB allocator
//! relies on.
//!
//! Accuracy factorizes as `A = A_c(c) * A_d(d) / beta3`: a logarithmic fit in
//! the compute workload times a saturating fit in the transmitted volume,
//! normalized so that transmitting everything recovers `A_c`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Base of the logarithm in the compute-accuracy fit. The base only rescales
/// `eta1`; natural log is the default convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
    Base10,
}

impl LogBase {
    fn ln_of_base(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Base2 => std::f64::consts::LN_2,
            LogBase::Base10 => std::f64::consts::LN_10,
        }
    }
}

/// Per-application accuracy model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyParams {
    /// Slope of the compute-accuracy fit.
    pub eta1: f64,
    /// Accuracy of the largest model (at `c = c_max_cycles`).
    pub eta2: f64,
    /// Compute workload of the largest model, cycles.
    pub c_max_cycles: f64,
    /// Magnitude (negative) of the truncation penalty at `d = 0`.
    pub beta1: f64,
    /// Exponent controlling how fast the truncation penalty decays.
    pub beta2: f64,
    /// Accuracy retained when all model outputs are transmitted.
    pub beta3: f64,
    /// Full output size of the model, bits.
    pub d_max_bits: f64,
    /// Raw (unprocessed) data size, bits; only the traditional-communication
    /// baseline transmits this.
    pub raw_data_bits: f64,
    #[serde(default)]
    pub log_base: LogBase,
}

impl AccuracyParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eta1 > 0.0
            && self.eta2 > 0.0
            && self.eta2 <= 1.0
            && self.beta1 < 0.0
            && self.beta2 > 0.0
            && self.beta3 > 0.0
            && self.beta3 <= 1.0
            && self.beta1 + self.beta3 >= 0.0
            && self.c_max_cycles > 0.0
            && self.d_max_bits > 0.0
            && self.raw_data_bits > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "accuracy parameters out of range: {self:?}"
            )))
        }
    }
}

/// Which transform of the accuracy serves as the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UtilityKind {
    /// Utility is the accuracy itself.
    ConcaveAccuracy,
    /// Utility is `1 / (1 - accuracy)`; grows without bound as accuracy
    /// approaches one and is not concave.
    GeneralReciprocal,
}

impl UtilityKind {
    /// Applies the kind's transform to an accuracy value in `[0, 1)`.
    pub fn transform(self, accuracy: f64) -> Result<f64> {
        match self {
            UtilityKind::ConcaveAccuracy => Ok(accuracy),
            UtilityKind::GeneralReciprocal => {
                if accuracy >= 1.0 {
                    Err(Error::Domain(format!(
                        "reciprocal utility undefined at accuracy {accuracy}"
                    )))
                } else {
                    Ok(1.0 / (1.0 - accuracy))
                }
            }
        }
    }
}

impl std::str::FromStr for UtilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "concave" => Ok(UtilityKind::ConcaveAccuracy),
            "general" => Ok(UtilityKind::GeneralReciprocal),
            other => Err(Error::InvalidParameter(format!(
                "unknown utility kind '{other}' (expected concave|general)"
            ))),
        }
    }
}

/// Accuracy attainable with compute workload `c`, before any transmission
/// loss: `max(0, eta1 * log(c / c_max) + eta2)`.
///
/// Workloads above `c_max_cycles` are clamped; `c <= 0` is rejected.
pub fn accuracy_comp(c: f64, p: &AccuracyParams) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::Domain(format!("compute workload {c} must be positive")));
    }
    let c = c.min(p.c_max_cycles);
    let log_c = (c / p.c_max_cycles).ln() / p.log_base.ln_of_base();
    Ok((p.eta1 * log_c + p.eta2).max(0.0))
}

/// Accuracy retained after transmitting `d` of the `d_max_bits` outputs:
/// `beta1 * (1 - d/d_max)^beta2 + beta3`.
pub fn accuracy_comm(d: f64, p: &AccuracyParams) -> Result<f64> {
    if !(0.0..=p.d_max_bits).contains(&d) {
        return Err(Error::Domain(format!(
            "data volume {d} outside [0, {}]",
            p.d_max_bits
        )));
    }
    Ok(p.beta1 * (1.0 - d / p.d_max_bits).powf(p.beta2) + p.beta3)
}

/// End-to-end accuracy at the receiver: `A_c * A_d / beta3`.
///
/// Defined as 0 when nothing is transmitted; `c` and `d` are clamped to
/// their fit domains.
pub fn accuracy(c: f64, d: f64, p: &AccuracyParams) -> Result<f64> {
    if d <= 0.0 {
        return Ok(0.0);
    }
    let a_c = accuracy_comp(c, p)?;
    let a_d = accuracy_comm(d.min(p.d_max_bits), p)?;
    Ok(a_c * a_d / p.beta3)
}

/// Utility of a workload pair under the chosen kind.
///
/// `d = 0` yields exactly 0 for both kinds: an untransmitted result has no
/// value at the receiver, even though the communication fit extrapolates to
/// a positive accuracy there.
pub fn utility(c: f64, d: f64, p: &AccuracyParams, kind: UtilityKind) -> Result<f64> {
    if d <= 0.0 {
        return Ok(0.0);
    }
    kind.transform(accuracy(c, d, p)?)
}

/// Sampling grid for [`validate_assumptions`].
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub c_lo: f64,
    pub c_hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub c_points: usize,
    pub d_points: usize,
    /// Violations smaller than this (relative to the utility scale on the
    /// grid) are attributed to floating-point noise.
    pub tol: f64,
}

impl GridSpec {
    /// A 50x50 grid over the region the allocator actually visits:
    /// `(0, c_max] x [d_lo, d_max]`.
    pub fn over(p: &AccuracyParams, d_lo: f64) -> Self {
        Self {
            c_lo: p.c_max_cycles * 1e-3,
            c_hi: p.c_max_cycles,
            d_lo,
            d_hi: p.d_max_bits,
            c_points: 50,
            d_points: 50,
            tol: 1e-9,
        }
    }
}

/// Verdict for one sampled assumption.
#[derive(Debug, Clone, Copy)]
pub struct AssumptionCheck {
    pub passed: bool,
    /// Worst violation found, 0 when the assumption held everywhere.
    pub worst_violation: f64,
    /// `(c, d)` location of the worst violation.
    pub worst_at: Option<(f64, f64)>,
}

impl AssumptionCheck {
    fn clean() -> Self {
        Self {
            passed: true,
            worst_violation: 0.0,
            worst_at: None,
        }
    }

    fn record(&mut self, violation: f64, at: (f64, f64), tol: f64) {
        if violation > self.worst_violation {
            self.worst_violation = violation;
            self.worst_at = Some(at);
        }
        if violation > tol {
            self.passed = false;
        }
    }
}

/// Sampled report on the three structural assumptions behind greedy RB
/// allocation.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// Utility non-decreasing in both arguments and jointly concave.
    pub monotone_concave: AssumptionCheck,
    /// The compute marginal does not shrink when more data gets through.
    pub comp_gain_grows_with_data: AssumptionCheck,
    /// The data marginal decays at least like `1/d`: scaling `d` by `alpha`
    /// divides the marginal by at least `alpha`.
    pub data_gain_decay: AssumptionCheck,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.monotone_concave.passed
            && self.comp_gain_grows_with_data.passed
            && self.data_gain_decay.passed
    }
}

/// Samples the utility surface and reports, per assumption, whether it held
/// on the grid along with the worst violation and its location.
///
/// This reports rather than asserts: the decay assumption only holds
/// approximately for realistic fits.
pub fn validate_assumptions(
    p: &AccuracyParams,
    kind: UtilityKind,
    grid: &GridSpec,
) -> Result<AssumptionReport> {
    let nc = grid.c_points.max(3);
    let nd = grid.d_points.max(3);
    let hc = (grid.c_hi - grid.c_lo) / (nc - 1) as f64;
    let hd = (grid.d_hi - grid.d_lo) / (nd - 1) as f64;
    if hc <= 0.0 || hd <= 0.0 {
        return Err(Error::InvalidParameter("degenerate assumption grid".into()));
    }

    let c_at = |i: usize| grid.c_lo + hc * i as f64;
    let d_at = |j: usize| grid.d_lo + hd * j as f64;

    let mut values = vec![0.0f64; nc * nd];
    let mut scale = 0.0f64;
    for i in 0..nc {
        for j in 0..nd {
            let u = utility(c_at(i), d_at(j), p, kind)?;
            values[i * nd + j] = u;
            scale = scale.max(u.abs());
        }
    }
    let u = |i: usize, j: usize| values[i * nd + j];
    let tol = grid.tol * scale.max(1.0);

    let mut a1 = AssumptionCheck::clean();
    let mut a2 = AssumptionCheck::clean();
    let mut a3 = AssumptionCheck::clean();

    for i in 0..nc {
        for j in 0..nd {
            let at = (c_at(i), d_at(j));
            // monotonicity in each argument
            if i + 1 < nc {
                a1.record(u(i, j) - u(i + 1, j), at, tol);
            }
            if j + 1 < nd {
                a1.record(u(i, j) - u(i, j + 1), at, tol);
            }
            // joint concavity via the finite-difference Hessian; the raw
            // second differences are the Hessian congruence-scaled by the
            // grid steps, which preserves definiteness and keeps everything
            // in utility units
            if i >= 1 && i + 1 < nc && j >= 1 && j + 1 < nd {
                let dcc = u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j);
                let ddd = u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1);
                let dcd = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1)
                    + u(i - 1, j - 1))
                    / 4.0;
                a1.record(dcc, at, tol);
                a1.record(ddd, at, tol);
                let det_excess = dcd * dcd - dcc * ddd;
                if det_excess > 0.0 {
                    a1.record(det_excess.sqrt(), at, tol);
                }
            }
            // cross-difference: marginal of c must not shrink as d grows
            if i + 1 < nc && j + 1 < nd {
                let gain_low_d = u(i + 1, j) - u(i, j);
                let gain_high_d = u(i + 1, j + 1) - u(i, j + 1);
                a2.record(gain_low_d - gain_high_d, at, tol);
            }
        }
    }

    // decay of the data marginal under scaling of d
    for &alpha in &[1.5, 2.0, 4.0] {
        for i in 0..nc {
            for j in 1..nd {
                let d = d_at(j);
                let da = alpha * d;
                if da + hd > grid.d_hi {
                    continue;
                }
                let c = c_at(i);
                let slope = |x: f64| -> Result<f64> {
                    Ok((utility(c, x + hd, p, kind)? - utility(c, x - hd, p, kind)?)
                        / (2.0 * hd))
                };
                let here = slope(d)?;
                let scaled = slope(da)?;
                a3.record((scaled - here / alpha) * hd, (c, d), tol);
            }
        }
    }

    Ok(AssumptionReport {
        monotone_concave: a1,
        comp_gain_grows_with_data: a2,
        data_gain_decay: a3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_params() -> AccuracyParams {
        AccuracyParams {
            eta1: 0.065,
            eta2: 0.925,
            c_max_cycles: 7.5e6,
            beta1: -0.7,
            beta2: 10.0,
            beta3: 0.92,
            d_max_bits: 2e5,
            raw_data_bits: 6e5,
            log_base: LogBase::Natural,
        }
    }

    #[test]
    fn accuracy_comp_at_full_model() {
        let p = table_params();
        assert_eq!(accuracy_comp(p.c_max_cycles, &p).unwrap(), p.eta2);
    }

    #[test]
    fn accuracy_comp_root_of_fit() {
        let p = table_params();
        let c_root = p.c_max_cycles * (-p.eta2 / p.eta1).exp();
        let a = accuracy_comp(c_root, &p).unwrap();
        assert!(a.abs() < 1e-12, "expected 0 at the fit root, got {a}");
    }

    #[test]
    fn accuracy_comp_half_model() {
        let p = table_params();
        let a = accuracy_comp(p.c_max_cycles / 2.0, &p).unwrap();
        let expected = 0.925 - 0.065 * std::f64::consts::LN_2;
        assert!((a - expected).abs() < 1e-15);
        assert!((a - 0.8799454332636036).abs() < 1e-12);
    }

    #[test]
    fn accuracy_comp_rejects_nonpositive() {
        let p = table_params();
        assert!(accuracy_comp(0.0, &p).is_err());
        assert!(accuracy_comp(-1.0, &p).is_err());
    }

    #[test]
    fn accuracy_comm_endpoints() {
        let p = table_params();
        assert_eq!(accuracy_comm(p.d_max_bits, &p).unwrap(), p.beta3);
        assert_eq!(accuracy_comm(0.0, &p).unwrap(), p.beta1 + p.beta3);
        assert!(accuracy_comm(p.d_max_bits * 1.01, &p).is_err());
        assert!(accuracy_comm(-1.0, &p).is_err());
    }

    #[test]
    fn accuracy_comm_half_output() {
        let p = table_params();
        let a = accuracy_comm(p.d_max_bits / 2.0, &p).unwrap();
        // -0.7 * 2^-10 + 0.92
        assert!((a - 0.91931640625).abs() < 1e-15);
    }

    #[test]
    fn utility_full_workloads() {
        let p = table_params();
        let u = utility(p.c_max_cycles, p.d_max_bits, &p, UtilityKind::ConcaveAccuracy).unwrap();
        assert!((u - p.eta2).abs() < 1e-15);

        let ug =
            utility(p.c_max_cycles, p.d_max_bits, &p, UtilityKind::GeneralReciprocal).unwrap();
        assert!((ug - 1.0 / (1.0 - 0.925)).abs() < 1e-12);
        assert!((ug - 13.333333333333334).abs() < 1e-12);
    }

    #[test]
    fn utility_zero_data_is_zero() {
        let p = table_params();
        for kind in [UtilityKind::ConcaveAccuracy, UtilityKind::GeneralReciprocal] {
            assert_eq!(utility(1e6, 0.0, &p, kind).unwrap(), 0.0);
            assert_eq!(utility(p.c_max_cycles, 0.0, &p, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn assumptions_hold_for_concave_kind_in_upper_region() {
        let p = table_params();
        let grid = GridSpec::over(&p, p.d_max_bits / 2.0);
        let report = validate_assumptions(&p, UtilityKind::ConcaveAccuracy, &grid).unwrap();
        assert!(
            report.monotone_concave.passed,
            "concavity violated by {} at {:?}",
            report.monotone_concave.worst_violation, report.monotone_concave.worst_at
        );
        assert!(report.comp_gain_grows_with_data.passed);
    }

    #[test]
    fn reciprocal_kind_fails_concavity() {
        let p = table_params();
        let grid = GridSpec::over(&p, p.d_max_bits / 2.0);
        let report = validate_assumptions(&p, UtilityKind::GeneralReciprocal, &grid).unwrap();
        assert!(!report.monotone_concave.passed);
    }

    #[test]
    fn flat_surface_degenerate_passes() {
        let mut p = table_params();
        p.eta1 = 1e-12;
        p.beta1 = -1e-12;
        let grid = GridSpec::over(&p, p.d_max_bits / 2.0);
        let report = validate_assumptions(&p, UtilityKind::ConcaveAccuracy, &grid).unwrap();
        assert!(report.all_passed(), "flat surface should pass: {report:?}");
    }

    proptest! {
        // utility never decreases in either workload, for both kinds
        #[test]
        fn utility_monotone(
            c1 in 1e3f64..7.5e6,
            c2 in 1e3f64..7.5e6,
            d1 in 1.0f64..2e5,
            d2 in 1.0f64..2e5,
            general in proptest::bool::ANY,
        ) {
            let p = table_params();
            let kind = if general {
                UtilityKind::GeneralReciprocal
            } else {
                UtilityKind::ConcaveAccuracy
            };
            let (c_lo, c_hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            let (d_lo, d_hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let u_lo = utility(c_lo, d_lo, &p, kind).unwrap();
            let u_hi = utility(c_hi, d_hi, &p, kind).unwrap();
            prop_assert!(u_hi >= u_lo - 1e-12);
        }

        // accuracy stays strictly below 1 whenever eta2 < 1
        #[test]
        fn accuracy_below_one(c in 1.0f64..7.5e6, d in 0.0f64..2e5) {
            let p = table_params();
            let a = accuracy(c, d, &p).unwrap();
            prop_assert!(a < 1.0);
            prop_assert!(a >= 0.0);
        }
    }
}
