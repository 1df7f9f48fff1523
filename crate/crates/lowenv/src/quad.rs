//! Adaptive Gauss–Kronrod quadrature (G7/K15 pair with interval bisection).
//!
//! Used for expectation oracles and envelope-norm estimates; independent of
//! the Monte Carlo sampling path.

/// 15-point Kronrod nodes on [-1, 1] (non-negative half; symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// 7-point Gauss weights matching every other Kronrod node.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive integral of `f` over `[a, b]` to the given absolute tolerance.
/// Returns `(value, error_estimate)`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> (f64, f64) {
    // Explicit work stack; deterministic left-to-right accumulation.
    let mut stack = vec![(a, b, abs_tol.max(1e-15), 0usize)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (value, err) = gk15(f, lo, hi);
        if err <= tol || depth >= 50 {
            total += value;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * tol, depth + 1));
            stack.push((lo, mid, 0.5 * tol, depth + 1));
        }
    }
    (total, err_total)
}

/// Integral over the whole real line by expanding symmetric windows around
/// `center` until the increment falls below the tolerance. Returns
/// `(value, settled)`; `settled == false` flags a failure of the tails to
/// decay within the expansion budget.
pub fn integrate_real_line(
    f: &dyn Fn(f64) -> f64,
    center: f64,
    initial_half_width: f64,
    abs_tol: f64,
) -> (f64, bool) {
    let mut half = initial_half_width.max(1.0);
    let (mut value, _) = integrate(f, center - half, center + half, abs_tol);
    for _ in 0..24 {
        let grown = half * 2.0;
        let (left, _) = integrate(f, center - grown, center - half, abs_tol);
        let (right, _) = integrate(f, center + half, center + grown, abs_tol);
        let increment = left + right;
        value += increment;
        half = grown;
        if increment.abs() < abs_tol {
            return (value, true);
        }
    }
    (value, false)
}
