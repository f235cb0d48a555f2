//! Bracketing root search on a bounded window.
//!
//! The window is scanned on a fixed grid. Every sign change is refined by
//! bisection and a short Newton polish. Grid cells where `|f|` has a local
//! minimum without a sign change are searched for a critical point of `f`;
//! a tangential root there is reported once (fold), and a pair of close
//! roots is split around it.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanWindow {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for ScanWindow {
    fn default() -> Self {
        Self {
            lo: -1.5,
            hi: 1.5,
            step: 1e-3,
        }
    }
}

impl ScanWindow {
    /// Same grid spacing, twice the half-width around the same centre.
    pub fn widened(&self) -> Self {
        let centre = 0.5 * (self.lo + self.hi);
        let half = self.hi - self.lo;
        Self {
            lo: centre - half,
            hi: centre + half,
            step: self.step,
        }
    }

    fn nodes(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).ceil() as usize;
        (0..=n)
            .map(|k| (self.lo + k as f64 * self.step).min(self.hi))
            .collect()
    }
}

/// Absolute tolerance on `|f|` for accepting a tangential root.
pub const FOLD_TOLERANCE: f64 = 1e-12;

const BISECTION_TOL: f64 = 1e-14;
const NEWTON_STEPS: usize = 5;
const MERGE_TOL: f64 = 1e-9;

/// All roots of `f` on the window, ascending. `df` is the derivative.
pub fn find_roots(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    window: &ScanWindow,
) -> Vec<f64> {
    let xs = window.nodes();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();

    for k in 0..xs.len() - 1 {
        let (a, b) = (xs[k], xs[k + 1]);
        let (fa, fb) = (fs[k], fs[k + 1]);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(refine(&f, &df, a, b, fa));
        }
    }
    if let Some(&last) = fs.last() {
        if last == 0.0 {
            roots.push(window.hi);
        }
    }

    // Local minima of |f| between same-sign neighbours may hide a tangency
    // or two roots closer than the grid spacing.
    for k in 1..xs.len() - 1 {
        let (fl, fm, fr) = (fs[k - 1], fs[k], fs[k + 1]);
        if fl == 0.0 || fm == 0.0 || fr == 0.0 {
            continue;
        }
        if fl.signum() != fm.signum() || fm.signum() != fr.signum() {
            continue;
        }
        if !(fm.abs() <= fl.abs() && fm.abs() <= fr.abs()) {
            continue;
        }
        let (dl, dr) = (df(xs[k - 1]), df(xs[k + 1]));
        if dl.signum() == dr.signum() {
            continue;
        }
        let xc = refine(&df, &|_: f64| f64::NAN, xs[k - 1], xs[k + 1], dl);
        let fc = f(xc);
        if fc.abs() <= FOLD_TOLERANCE {
            roots.push(xc);
        } else if fc.signum() != fm.signum() {
            roots.push(refine(&f, &df, xs[k - 1], xc, fl));
            roots.push(refine(&f, &df, xc, xs[k + 1], fc));
        }
    }

    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < MERGE_TOL);
    roots
}

/// Bisection on a sign-changing bracket followed by guarded Newton steps.
/// A NaN derivative disables the polish.
pub fn refine(f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let lo_sign = fa.signum();
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..NEWTON_STEPS {
        let d = df(x);
        if !d.is_finite() || d == 0.0 || fx == 0.0 {
            break;
        }
        let candidate = x - fx / d;
        if !(candidate >= a && candidate <= b) {
            break;
        }
        let fc = f(candidate);
        if fc.abs() >= fx.abs() {
            break;
        }
        x = candidate;
        fx = fc;
    }
    x
}
