//! Adaptive numeric integration used to cross-check exact kernel moments.
//!
//! The integrands all decay like e^{−x/2} once x exceeds the boundary
//! length, so the improper integrals are truncated at x = 200 + 10·b: the
//! discarded tail is below x^{2k+1}·4e^{−(x−b)/2} integrated past that point,
//! i.e. smaller than ~1e−30 for every moment this crate checks, far below
//! the quadrature tolerance. The finite integral is then refined by adaptive
//! Simpson subdivision until the local error estimate drops under 1e−12
//! relative to the integral's magnitude.

use crate::kernel::h_num;

const REL_TOL: f64 = 1e-12;

/// Adaptive Simpson integration of `f` over [a, b] with the given absolute
/// tolerance. The interval is pre-split into 64 equal panels before
/// adapting so that integrands whose mass sits far from the endpoints
/// (e.g. a bump near 0 on a long truncation interval) cannot be missed by
/// the first coarse Simpson estimate.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: u32 = 64;
    let h = (b - a) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    let mut total = 0.0;
    let mut x0 = a;
    let mut f0 = f(a);
    for k in 0..PANELS {
        let x1 = if k + 1 == PANELS { b } else { a + (k + 1) as f64 * h };
        let xm = 0.5 * (x0 + x1);
        let (fm, f1) = (f(xm), f(x1));
        let whole = simpson(x0, x1, f0, f1, fm);
        total += adapt(f, x0, xm, x1, f0, fm, f1, whole, panel_tol, 30);
        x0 = x1;
        f0 = f1;
    }
    total
}

fn simpson(a: f64, b: f64, fa: f64, fb: f64, fmid: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fmid + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    c: f64,
    b: f64,
    fa: f64,
    fc: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let (fd, fe) = (f(d), f(e));
    let left = simpson(a, c, fa, fc, fd);
    let right = simpson(c, b, fc, fb, fe);
    let delta = left + right - whole;
    // Below the cancellation noise of the summands, further splitting can
    // only chase rounding error; without this floor a tolerance tighter
    // than the values' machine precision recurses to the full depth
    // everywhere (exponentially many panels).
    let noise = 8.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(noise) {
        left + right + delta / 15.0
    } else {
        adapt(f, a, d, c, fa, fd, fc, left, 0.5 * tol, depth - 1)
            + adapt(f, c, e, b, fc, fe, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrate with the tolerance scaled to the integral's own magnitude,
/// estimated by a fixed 256-panel composite Simpson probe (cheap, and
/// accurate to far better than the factor needed for tolerance scaling).
fn integrate_scaled(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const PROBE_PANELS: u32 = 256;
    let h = (b - a) / PROBE_PANELS as f64;
    let mut rough = 0.0;
    for k in 0..PROBE_PANELS {
        let x0 = a + k as f64 * h;
        let x1 = x0 + h;
        rough += simpson(x0, x1, f(x0), f(x1), f(0.5 * (x0 + x1)));
    }
    integrate(f, a, b, rel_tol * rough.abs().max(f64::MIN_POSITIVE.sqrt()))
}

/// Upper truncation point for kernel integrals with boundary length `b`.
fn cutoff(b: f64) -> f64 {
    200.0 + 10.0 * b
}

/// Numeric ∫₀^∞ x^{2k+1} H(x, b) dx — the quadrature side of the moment
/// polynomial check.
pub fn f_kernel_quadrature(k: u32, b: f64) -> f64 {
    let f = move |x: f64| x.powi(2 * k as i32 + 1) * h_num(x, b);
    integrate_scaled(&f, 0.0, cutoff(b), REL_TOL)
}

/// Numeric ∫₀^∞ x^{2i−1}/(1 + e^x) dx for i ≥ 1.
pub fn fermi_moment_quadrature(i: u32) -> f64 {
    assert!(i >= 1);
    let f = move |x: f64| x.powi(2 * i as i32 - 1) / (1.0 + x.exp());
    integrate_scaled(&f, 0.0, cutoff(0.0), REL_TOL)
}

/// Numeric double moment ∫₀^∞∫₀^∞ x^{2i+1} y^{2j+1} H(x + y, b) dx dy,
/// evaluated as nested 1-D integrals. Cross-checks the exact reduction
/// double_reduce(i,j)·F_{2(i+j)+3}(b).
pub fn double_kernel_quadrature(i: u32, j: u32, b: f64) -> f64 {
    let r = cutoff(b);
    let outer = move |y: f64| {
        let inner = move |x: f64| x.powi(2 * i as i32 + 1) * h_num(x + y, b);
        y.powi(2 * j as i32 + 1) * integrate_scaled(&inner, 0.0, r, 1e-11)
    };
    integrate_scaled(&outer, 0.0, r, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_trig_integrals() {
        let sq = |x: f64| x * x;
        assert!((integrate(&sq, 0.0, 1.0, 1e-14) - 1.0 / 3.0).abs() < 1e-13);
        let s = |x: f64| x.sin();
        assert!((integrate(&s, 0.0, std::f64::consts::PI, 1e-13) - 2.0).abs() < 1e-11);
    }

    #[test]
    fn exponential_tail_integral() {
        // ∫₀^∞ e^{-x/2} dx = 2, truncated.
        let f = |x: f64| (-x / 2.0).exp();
        let got = integrate_scaled(&f, 0.0, cutoff(0.0), 1e-13);
        assert!((got - 2.0).abs() < 1e-11, "{got}");
    }

    #[test]
    fn double_quadrature_separable_sanity() {
        // With H replaced by the separable e^{-(x+y)} analogue the integral
        // factors; here just check the real double integral is finite,
        // positive, and symmetric in (i, j).
        let v01 = double_kernel_quadrature(0, 1, 1.0);
        let v10 = double_kernel_quadrature(1, 0, 1.0);
        assert!(v01.is_finite() && v01 > 0.0);
        let rel = ((v01 - v10) / v01).abs();
        assert!(rel < 1e-6, "{v01} vs {v10}");
    }
}
