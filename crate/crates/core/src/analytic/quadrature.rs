//! Adaptive Simpson quadrature.

use crate::error::{domain, Error, Result};

/// Default absolute tolerance for probability integrals.
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_DEPTH: u32 = 48;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Returns the estimate and whether every panel met its tolerance.
fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, rel: f64, depth: u32) -> (f64, bool) {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    // Below the noise floor of f no amount of bisection helps.
    let floor = rel * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol.max(floor) {
        return (left + right + delta / 15.0, true);
    }
    if depth == 0 || !(m > p.a && m < p.b) {
        return (left + right, false);
    }
    let (l, lok) = refine(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, tol / 2.0, rel, depth - 1);
    let (r, rok) = refine(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, tol / 2.0, rel, depth - 1);
    (l + r, lok && rok)
}

/// `integral_a^b f` by adaptive Simpson. Each bisection halves the local
/// tolerance, so the error budget is shared in proportion to panel width.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    quadrature_rel(f, a, b, tol, ROUNDING)
}

const ROUNDING: f64 = 4.0 * f64::EPSILON;

/// Like [`quadrature`] for an integrand whose values carry relative noise
/// of about `rel`; panels are accepted once their error estimate drops
/// below that noise.
pub fn quadrature_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, rel: f64) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!("quadrature limits must satisfy a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, b, fa, fm, fb);
    let (v, ok) = refine(&f, Panel { a, b, fa, fm, fb, whole }, tol, rel.max(ROUNDING), MAX_DEPTH);
    if ok {
        Ok(v)
    } else {
        Err(Error::NonConvergence { estimate: v })
    }
}

/// Like [`quadrature`], but first splits `[a, b]` at the given interior
/// points so that narrow features of the integrand are not stepped over.
/// The tolerance is divided among the pieces by width.
pub fn quadrature_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    quadrature_split_rel(f, a, b, breaks, tol, ROUNDING)
}

/// [`quadrature_split`] with the noise floor of [`quadrature_rel`].
pub fn quadrature_split_rel<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
    rel: f64,
) -> Result<f64> {
    if !(a < b) {
        return Err(domain(format!("quadrature limits must satisfy a < b, got [{a}, {b}]")));
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b && x.is_finite()).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    let mut failed = false;
    for w in pts.windows(2) {
        let piece_tol = tol * (w[1] - w[0]) / (b - a);
        if !(w[1] > w[0]) || piece_tol <= 0.0 {
            continue;
        }
        match quadrature_rel(&f, w[0], w[1], piece_tol, rel) {
            Ok(v) => total += v,
            Err(Error::NonConvergence { estimate }) => {
                total += estimate;
                failed = true;
            }
            Err(e) => return Err(e),
        }
    }
    if failed {
        Err(Error::NonConvergence { estimate: total })
    } else {
        Ok(total)
    }
}
