//! One-dimensional search primitives.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn checked(x: f64, v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::Numeric(format!("objective is NaN at {x}")))
    } else {
        Ok(v)
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns the best point seen.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)> {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = checked(x1, f(x1))?;
    let mut f2 = checked(x2, f(x2))?;
    let mut iterations = 0;
    while (b - a) > x_tol && iterations < 400 {
        iterations += 1;
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = checked(x1, f(x1))?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = checked(x2, f(x2))?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Result of a half-line maximization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineMax {
    pub x: f64,
    pub value: f64,
    /// The maximum sits on the cap and the objective was still increasing.
    pub at_cap: bool,
}

fn tolerance(x: f64) -> f64 {
    1e-13 * x.abs() + 1e-15
}

/// Maximizes a concave (possibly `-∞`-valued) `f` over `[0, cap]`, starting at `x0`.
///
/// The bracket is grown geometrically from `x0`. When the left end of the
/// bracket is `0` and `f(0) = -∞`, the final search runs in `log x` so that
/// maxima approaching the boundary (`x ~ 2^{-k}`) are resolved relatively.
pub fn maximize_half_line<F: FnMut(f64) -> f64>(mut f: F, x0: f64, cap: f64) -> Result<LineMax> {
    let mut eval = |x: f64| checked(x, f(x));
    let x0 = x0.clamp(0.0, cap);
    let mut b = x0;
    let mut fb = eval(b)?;
    let mut h = if x0 > 0.0 { 0.1 * x0 } else { 1e-3_f64.min(cap) };

    let mut c = (b + h).min(cap);
    let mut fc = eval(c)?;
    let mut a;
    let mut fa;
    if fc > fb {
        loop {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            if b >= cap {
                return Ok(LineMax { x: b, value: fb, at_cap: true });
            }
            h *= 2.0;
            c = (b + h).min(cap);
            fc = eval(c)?;
            if fc <= fb {
                break;
            }
        }
    } else {
        a = (b - h).max(0.0);
        fa = eval(a)?;
        while fa > fb && a > 0.0 {
            c = b;
            fc = fb;
            b = a;
            fb = fa;
            h *= 2.0;
            a = (b - h).max(0.0);
            fa = eval(a)?;
        }
    }
    let _ = fc;

    let mut best = if a == 0.0 && fa == f64::NEG_INFINITY {
        let lo = (c * 2f64.powi(-64)).max(f64::MIN_POSITIVE);
        let (t, v) = golden_max(|t| f_exp(&mut eval, t), lo.ln(), c.ln(), 1e-13)?;
        (t.exp(), v)
    } else {
        golden_max(|x| eval(x).unwrap_or(f64::NAN), a, c, tolerance(b))?
    };
    if fb > best.1 {
        best = (b, fb);
    }
    if x0 > 0.0 {
        // concave objectives may still peak at the boundary when started inside an infeasible plateau
        let f0 = eval(0.0)?;
        if f0 > best.1 {
            best = (0.0, f0);
        }
    }
    Ok(LineMax { x: best.0, value: best.1, at_cap: false })
}

fn f_exp<F: FnMut(f64) -> Result<f64>>(eval: &mut F, t: f64) -> f64 {
    eval(t.exp()).unwrap_or(f64::NAN)
}

/// Dense grid over the open interval `(lo, hi)` with `cells` cells, then
/// golden-section refinement between the neighbours of the best grid point.
/// Ties on the grid go to the smallest index.
pub fn grid_then_refine<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, cells: usize, x_tol: f64) -> Result<(f64, f64)> {
    assert!(cells >= 2 && hi > lo);
    let step = (hi - lo) / cells as f64;
    let mut best_i = 1;
    let mut best_v = f64::NEG_INFINITY;
    for i in 1..cells {
        let x = lo + step * i as f64;
        let v = checked(x, f(x))?;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let x_best = lo + step * best_i as f64;
    if best_v == f64::NEG_INFINITY {
        return Ok((x_best, best_v));
    }
    let a = lo + step * (best_i - 1) as f64;
    let b = lo + step * (best_i + 1) as f64;
    let (x, v) = golden_max(&mut f, a.max(lo), b.min(hi), x_tol)?;
    Ok(if v > best_v { (x, v) } else { (x_best, best_v) })
}
