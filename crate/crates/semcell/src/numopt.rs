//! One-dimensional maximization: coarse grid seeding followed by
//! golden-section refinement. Grid seeding guards against objectives with
//! several local maxima; the refinement assumes nothing beyond continuity
//! and always returns the best point actually evaluated.

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_ITERS: usize = 200;

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns the best `(x, f(x))` seen across all probes, which for a
/// non-unimodal objective is a local answer near the better slope.
pub(crate) fn golden_max(
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    f: impl Fn(f64) -> f64,
) -> (f64, f64) {
    debug_assert!(lo <= hi);
    let mut best = (lo, f(lo));
    let consider = |best: &mut (f64, f64), x: f64, fx: f64| {
        if fx > best.1 {
            *best = (x, fx);
        }
    };
    consider(&mut best, hi, f(hi));

    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    consider(&mut best, a, fa);
    consider(&mut best, b, fb);

    for _ in 0..MAX_GOLDEN_ITERS {
        let span = hi - lo;
        if span <= rel_tol * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
            consider(&mut best, a, fa);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
            consider(&mut best, b, fb);
        }
    }
    best
}

/// `n` points spanning `[lo, hi]` inclusive, uniformly spaced.
pub(crate) fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// `n` points spanning `[lo, hi]` inclusive, uniform in log space.
/// Requires `0 < lo <= hi`.
pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut pts: Vec<f64> = (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    // pin the endpoints exactly
    pts[0] = lo;
    pts[n - 1] = hi;
    pts
}

/// Maximizes `f` over precomputed grid `points`, then golden-refines inside
/// the bracket around the best grid point. `log_space` refines in log
/// coordinates, which suits grids spanning several decades.
///
/// Returns `None` when every probe scored `-inf` (nothing feasible).
pub(crate) fn refine_best_on_grid(
    points: &[f64],
    scores: &[f64],
    log_space: bool,
    rel_tol: f64,
    f: impl Fn(f64) -> f64,
) -> Option<(f64, f64)> {
    let mut best_i = None;
    for (i, &s) in scores.iter().enumerate() {
        if s > f64::NEG_INFINITY && best_i.map_or(true, |j: usize| s > scores[j]) {
            best_i = Some(i);
        }
    }
    let i = best_i?;
    let lo = points[i.saturating_sub(1)];
    let hi = points[(i + 1).min(points.len() - 1)];
    let mut best = (points[i], scores[i]);

    let (x, fx) = if log_space && lo > 0.0 {
        let (lx, lfx) = golden_max(lo.ln(), hi.ln(), rel_tol, |t| f(t.exp()));
        (lx.exp(), lfx)
    } else {
        golden_max(lo, hi, rel_tol, &f)
    };
    if fx > best.1 {
        best = (x, fx);
    }
    Some(best)
}

/// Locates the boundary of a predicate that holds at `lo` and fails at `hi`,
/// returning the largest argument (within `rel_tol`) where it still holds.
pub(crate) fn bisect_true_boundary(
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    pred: impl Fn(f64) -> bool,
) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
