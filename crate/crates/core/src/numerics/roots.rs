use crate::error::{SolveError, SolveResult};

/// A sign-changing interval `[lo, hi]` with `f(lo) > 0 >= f(hi)` or the reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

const MAX_ITER: usize = 400;

/// Bisection that runs until the interval can no longer be split or its width
/// drops below `xtol`. Returns the endpoint on the same side as `f(hi)`.
pub fn bisect<F>(f: F, bracket: Bracket, xtol: f64) -> SolveResult<f64>
where
    F: Fn(f64) -> f64,
{
    let Bracket {
        mut lo,
        mut hi,
        f_lo,
        f_hi,
    } = bracket;
    if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        return Err(SolveError::NoConvergence(format!(
            "bisection needs a sign change on [{lo}, {hi}]"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let lo_positive = f_lo > 0.0;
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) || (hi - lo).abs() <= xtol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Brent's method (inverse quadratic interpolation with bisection safeguard).
///
/// Terminates when the bracket is narrower than `xtol * |x|` (relative, so
/// tiny roots keep their significant digits) or the function value is
/// exactly zero.
pub fn brent<F>(f: F, bracket: Bracket, xtol: f64) -> SolveResult<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SolveError::NoConvergence(format!(
            "brent needs a sign change on [{a}, {b}]"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol * b.abs() + f64::MIN_POSITIVE;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(SolveError::NoConvergence(format!(
        "brent exceeded {MAX_ITER} iterations"
    )))
}

/// Outcome of [`expand_upper_bracket`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expansion {
    /// First crossing from positive to non-positive.
    Found(Bracket),
    /// The function never turned positive on the walk.
    NeverPositive,
    /// The function was still positive at `limit`.
    Unbounded,
}

/// Walks the points `0, start, 2*start, 4*start, ...` up to `limit` and
/// returns the first interval on which `f` goes from positive to non-positive.
pub fn expand_upper_bracket<F>(f: F, start: f64, limit: f64) -> Expansion
where
    F: Fn(f64) -> f64,
{
    let mut last_positive: Option<(f64, f64)> = None;
    let mut x = 0.0;
    loop {
        let fx = f(x);
        if fx > 0.0 {
            last_positive = Some((x, fx));
        } else if let Some((xp, fp)) = last_positive {
            return Expansion::Found(Bracket {
                lo: xp,
                hi: x,
                f_lo: fp,
                f_hi: fx,
            });
        }
        x = if x == 0.0 { start } else { 2.0 * x };
        if x > limit {
            break;
        }
    }
    if last_positive.is_some() {
        Expansion::Unbounded
    } else {
        Expansion::NeverPositive
    }
}
