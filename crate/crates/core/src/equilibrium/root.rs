//! Bracketed scalar root finding for the aggregate fixed point.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SCAN_DOUBLINGS: i32 = 120;

/// Evaluates `f` on the geometric grid `lo·2^k` up to `hi` and returns every
/// subinterval whose endpoints straddle a sign change. Grid points where `f`
/// is exactly zero come back as degenerate brackets `(x, x)`.
pub(crate) fn scan_sign_changes<T, F>(f: &F, lo: T, hi: T) -> Result<Vec<(T, T)>>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let two = T::lit(2.0);
    let mut points = Vec::with_capacity(SCAN_DOUBLINGS as usize + 1);
    let mut x = lo;
    while x < hi && points.len() < SCAN_DOUBLINGS as usize {
        points.push(x);
        x = x * two;
    }
    points.push(hi);

    let values = points.iter().map(|&p| f(p)).collect::<Result<Vec<_>>>()?;
    let mut brackets = Vec::new();
    for k in 0..points.len() {
        if values[k] == T::zero() {
            brackets.push((points[k], points[k]));
        } else if k + 1 < points.len() && values[k] * values[k + 1] < T::zero() {
            brackets.push((points[k], points[k + 1]));
        }
    }
    Ok(brackets)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RootOutcome<T> {
    pub root: T,
    pub iterations: usize,
    pub bracket: (T, T),
}

/// Brent's method: inverse quadratic / secant steps guarded by bisection.
/// Stops once the bracket is within `rel_tol` of the root (relative).
pub(crate) fn brent<T, F>(
    f: &F,
    bracket: (T, T),
    rel_tol: T,
    max_iters: usize,
) -> Result<RootOutcome<T>>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let (mut a, mut b) = bracket;
    if a == b {
        return Ok(RootOutcome {
            root: a,
            iterations: 0,
            bracket,
        });
    }
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(RootOutcome {
            root: a,
            iterations: 0,
            bracket,
        });
    }
    if fb == T::zero() {
        return Ok(RootOutcome {
            root: b,
            iterations: 0,
            bracket,
        });
    }
    if fa * fb > T::zero() {
        return Err(Error::NoBracket {
            lo: a.as_f64(),
            hi: b.as_f64(),
        });
    }

    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let half = T::lit(0.5);
    let eps = T::epsilon();

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=max_iters {
        if fb * fc > T::zero() {
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

        let tol = two * eps * b.abs() + half * rel_tol * b.abs();
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Ok(RootOutcome {
                root: b,
                iterations: iter,
                bracket: (lo, hi),
            });
        }

        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (three * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b = if d.abs() > tol {
            b + d
        } else if m > T::zero() {
            b + tol
        } else {
            b - tol
        };
        fb = f(b)?;
    }

    Err(Error::NoConvergence {
        iterations: max_iters,
        residual: fb.as_f64(),
    })
}
