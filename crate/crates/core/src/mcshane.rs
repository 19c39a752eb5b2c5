//! Numeric verification of the McShane identity on the once-punctured
//! torus, plus the sid/mid gap-width functions of the bordered identity.
//!
//! A once-punctured hyperbolic torus is parametrized by a trace triple
//! (x, y, z) on the Markoff variety x² + y² + z² = xyz (we use the chart
//! with all traces ≥ 3). Simple closed geodesics correspond to rational
//! slopes; walking the Farey triangulation's dual tree with the Vieta move
//! (x, y, z) ↦ (x, y, xy − z) enumerates each slope exactly once, with
//! length ℓ = 2·arccosh(trace/2). The McShane identity states
//! Σ 2/(1 + e^ℓ) = 1 over all simple closed geodesics;
//! [`verify_torus_identity`] checks that the partial sums climb
//! monotonically to 1.
//!
//! The gap functions [`sid`] and [`mid`] measure boundary-interval widths
//! in the bordered generalization; their b₁-derivatives reproduce the
//! integration kernel `H` of [`crate::kernel`], which is what the volume
//! recursion actually consumes. This module is double-precision
//! throughout — it validates geometry numerically and feeds nothing back
//! into the exact pipeline.

use std::fmt;

/// Gap width contributed by a simple geodesic together with one other
/// boundary circle: log of a cosh ratio.
pub fn sid(b1: f64, bi: f64, l: f64) -> f64 {
    let num = (l / 2.0).cosh() + ((b1 + bi) / 2.0).cosh();
    let den = (l / 2.0).cosh() + ((b1 - bi) / 2.0).cosh();
    (num / den).ln()
}

/// Gap width contributed by a pair of simple geodesics spectacling the
/// distinguished boundary: 2·log of an exp ratio; depends on the pair
/// only through ℓ₁ + ℓ₂.
pub fn mid(b1: f64, l1: f64, l2: f64) -> f64 {
    let s = ((l1 + l2) / 2.0).exp();
    2.0 * (((b1 / 2.0).exp() + s) / ((-b1 / 2.0).exp() + s)).ln()
}

/// Width of each of the two inner sub-intervals of a pair gap: ½·mid.
pub fn half_mid_equals_innergap(b1: f64, l1: f64, l2: f64) -> f64 {
    0.5 * mid(b1, l1, l2)
}

/// Hyperbolic length of a geodesic with the given trace: 2·arccosh(t/2).
pub fn trace_to_length(t: f64) -> f64 {
    2.0 * (t / 2.0).acosh()
}

/// Errors from trace-triple validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TorusPointError {
    #[error("trace {0} is outside the chart (all traces must be >= 3)")]
    TraceTooSmall(f64),
    #[error("Markoff relation violated: relative residual {residual:e} exceeds 1e-12")]
    MarkoffViolated { residual: f64 },
}

/// A marked once-punctured hyperbolic torus, given by the traces of three
/// simple closed geodesics of pairwise-intersecting slopes (0/1, 1/0, 1/1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    x: f64,
    y: f64,
    z: f64,
}

const MARKOFF_TOL: f64 = 1e-12;

impl TorusPoint {
    /// Validates the chart condition (traces ≥ 3) and the Markoff relation
    /// x² + y² + z² = xyz to relative tolerance 1e−12.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, TorusPointError> {
        for t in [x, y, z] {
            if !(t >= 3.0) {
                return Err(TorusPointError::TraceTooSmall(t));
            }
        }
        let residual = (x * x + y * y + z * z - x * y * z).abs() / (x * y * z).max(1.0);
        if residual > MARKOFF_TOL {
            return Err(TorusPointError::MarkoffViolated { residual });
        }
        Ok(TorusPoint { x, y, z })
    }

    /// The square punctured torus (3,3,3), uniformized by the modular group.
    pub fn modular() -> Self {
        TorusPoint { x: 3.0, y: 3.0, z: 3.0 }
    }

    /// The one-parameter family (t, t, (t² + √(t⁴ − 8t²))/2) of tori with
    /// two equal traces, t ≥ 3; t = 3 recovers (3,3,6).
    pub fn symmetric_family(t: f64) -> Result<Self, TorusPointError> {
        if !(t >= 3.0) {
            return Err(TorusPointError::TraceTooSmall(t));
        }
        let z = (t * t + (t * t * t * t - 8.0 * t * t).sqrt()) / 2.0;
        TorusPoint::new(t, t, z)
    }

    pub fn traces(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.z)
    }
}

/// The three triples adjacent to the root triangle: each fixes two root
/// slopes and flips the third, so the last entry is the one new trace.
fn branch_triples(p: &TorusPoint) -> [(f64, f64, f64); 3] {
    let (x, y, z) = p.traces();
    [
        (x, y, x * y - z),
        (x, z, x * z - y),
        (y, z, y * z - x),
    ]
}

/// The two continuations of a triple (a, b, c) whose newest trace is c,
/// never backtracking across the (a, b) edge.
fn children(a: f64, b: f64, c: f64) -> [(f64, f64, f64); 2] {
    [(a, c, a * c - b), (b, c, b * c - a)]
}

/// Lengths of all simple closed geodesics whose slope lies at depth ≤
/// `depth` of the Farey tree: 3 root slopes plus 3·(2^depth − 1) others,
/// each slope exactly once (tori can carry repeated trace values, so no
/// dedup by length is performed). Traces square with each generation, so
/// keep `depth` modest (≲ 10) to stay within floating-point range; the
/// identity verifier uses a pruned traversal instead.
pub fn enumerate_torus_geodesics(p: &TorusPoint, depth: u32) -> Vec<f64> {
    let (x, y, z) = p.traces();
    let mut lengths = vec![trace_to_length(x), trace_to_length(y), trace_to_length(z)];
    fn collect(a: f64, b: f64, c: f64, level: u32, depth: u32, out: &mut Vec<f64>) {
        if level > depth {
            return;
        }
        out.push(trace_to_length(c));
        for (a2, b2, c2) in children(a, b, c) {
            collect(a2, b2, c2, level + 1, depth, out);
        }
    }
    for (a, b, c) in branch_triples(p) {
        collect(a, b, c, 1, depth, &mut lengths);
    }
    lengths
}

/// Convergence report for the torus identity Σ 2/(1 + e^ℓ) = 1.
#[derive(Debug, Clone)]
pub struct TorusIdentityReport {
    /// Cumulative sums S_d over geodesics of tree depth ≤ d, d = 0..=depth.
    pub partial_sums: Vec<f64>,
    /// Rigorous upper bound on the total mass of threshold-pruned subtrees.
    pub pruned_bound: f64,
    /// Tolerance the gap is judged against.
    pub tol: f64,
}

impl TorusIdentityReport {
    pub fn last_sum(&self) -> f64 {
        *self.partial_sums.last().expect("at least depth 0 is always summed")
    }

    /// Remaining gap 1 − S at the deepest level.
    pub fn gap(&self) -> f64 {
        1.0 - self.last_sum()
    }

    /// Non-convergence flag: some partial sum exceeded 1 + tol, which can
    /// only come from an enumeration bug (every true term is positive and
    /// the full series sums to exactly 1).
    pub fn exceeded(&self) -> bool {
        self.partial_sums.iter().any(|s| *s > 1.0 + self.tol)
    }

    pub fn passed(&self) -> bool {
        !self.exceeded() && self.gap() < self.tol
    }
}

impl fmt::Display for TorusIdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (d, s) in self.partial_sums.iter().enumerate() {
            writeln!(f, "depth {d:>3}: S = {s:.15}  (1 - S = {:.3e})", 1.0 - s)?;
        }
        writeln!(f, "pruned-tail bound: {:.3e}", self.pruned_bound)?;
        write!(
            f,
            "{}",
            if self.passed() {
                "PASS"
            } else if self.exceeded() {
                "FAIL (partial sum exceeded 1: enumeration bug)"
            } else {
                "FAIL (gap above tolerance)"
            }
        )
    }
}

/// One term 2/(1 + e^ℓ) of the identity, computed from the trace via
/// e^{ℓ/2} = t/2 + √(t²/4 − 1).
fn gap_term(t: f64) -> f64 {
    let u = t / 2.0 + (t * t / 4.0 - 1.0).max(0.0).sqrt();
    2.0 / (1.0 + u * u)
}

/// Traces above this are pruned: within such a subtree every new trace at
/// least doubles, so the subtree's identity mass is O(1/trace²) — recorded
/// in `pruned_bound`, and far below f64 resolution at this threshold.
const PRUNE_THRESHOLD: f64 = 1e100;

/// Sum the identity over geodesics of tree depth ≤ `depth` and report the
/// per-depth partial sums, the remaining gap, and a bound on the pruned
/// mass. Depth-truncated terms (beyond `depth`) are simply not summed;
/// that is exactly the gap the report measures.
pub fn verify_torus_identity(p: &TorusPoint, depth: u32, tol: f64) -> TorusIdentityReport {
    let (x, y, z) = p.traces();
    let mut per_level = vec![0.0f64; depth as usize + 1];
    let mut pruned = 0.0f64;
    per_level[0] = gap_term(x) + gap_term(y) + gap_term(z);

    fn walk(a: f64, b: f64, c: f64, level: u32, per_level: &mut [f64], pruned: &mut f64) {
        if level as usize >= per_level.len() {
            return;
        }
        if c > PRUNE_THRESHOLD {
            // Node term plus everything below it: terms decay at least
            // geometrically once traces are this large (2/(1+e^ℓ) ≤ 8/t²,
            // children ≥ 2t), giving a subtree total ≤ 16/c².
            *pruned += 16.0 / (c * c);
            return;
        }
        per_level[level as usize] += gap_term(c);
        for (a2, b2, c2) in children(a, b, c) {
            walk(a2, b2, c2, level + 1, per_level, pruned);
        }
    }
    if depth >= 1 {
        for (a, b, c) in branch_triples(p) {
            walk(a, b, c, 1, &mut per_level, &mut pruned);
        }
    }

    let mut partial_sums = Vec::with_capacity(per_level.len());
    let mut acc = 0.0f64;
    for s in per_level {
        acc += s;
        partial_sums.push(acc);
    }
    TorusIdentityReport { partial_sums, pruned_bound: pruned, tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::h_num;

    const GRID: [f64; 3] = [0.5, 1.0, 2.0];
    const STEP: f64 = 1e-5;
    const DERIV_TOL: f64 = 1e-7;

    fn central<F: Fn(f64) -> f64>(f: F, at: f64) -> f64 {
        (f(at + STEP) - f(at - STEP)) / (2.0 * STEP)
    }

    #[test]
    fn mid_derivative_is_kernel() {
        for b1 in GRID {
            for l1 in GRID {
                for l2 in GRID {
                    let d = central(|b| mid(b, l1, l2), b1);
                    assert!(
                        (d - h_num(l1 + l2, b1)).abs() <= DERIV_TOL,
                        "d mid/db1 at ({b1},{l1},{l2})"
                    );
                }
            }
        }
    }

    #[test]
    fn sid_plus_mid_derivative_is_symmetrized_kernel() {
        for b1 in GRID {
            for bi in GRID {
                for x in GRID {
                    let d = central(|b| sid(b, bi, x) + mid(b, bi, x), b1);
                    let expect = 0.5 * (h_num(x, b1 + bi) + h_num(x, b1 - bi));
                    assert!(
                        (d - expect).abs() <= DERIV_TOL,
                        "gap-sum derivative at ({b1},{bi},{x}): {d} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn sid_limits() {
        // Monotone decay to 0 as the geodesic length grows.
        assert!(sid(1.0, 1.0, 5.0) > sid(1.0, 1.0, 20.0));
        assert!(sid(1.0, 1.0, 20.0) > sid(1.0, 1.0, 40.0));
        assert!(sid(1.0, 1.0, 40.0) < 1e-8);
        assert!(sid(1.0, 1.0, 40.0) > 0.0);
        // Vanishes identically when the second boundary shrinks away.
        for (b1, l) in [(0.5, 0.25), (1.0, 1.0), (2.0, 7.0)] {
            assert_eq!(sid(b1, 0.0, l), 0.0);
        }
        // l → 0 limit agrees with the direct cosh formula.
        for b1 in GRID {
            for bi in GRID {
                let limit = ((1.0 + ((b1 + bi) / 2.0).cosh())
                    / (1.0 + ((b1 - bi) / 2.0).cosh()))
                .ln();
                assert!((sid(b1, bi, 1e-9) - limit).abs() < 1e-12);
                assert_eq!(sid(b1, bi, 0.0), limit);
            }
        }
    }

    #[test]
    fn mid_properties() {
        assert_eq!(mid(0.0, 1.0, 2.0), 0.0);
        for b1 in GRID {
            for l1 in GRID {
                for l2 in GRID {
                    assert!(mid(b1, l1, l2) > 0.0);
                    assert_eq!(mid(b1, l1, l2), mid(b1, l2, l1));
                    // Depends only on l1 + l2.
                    let t = 0.3;
                    let other = mid(b1, l1 + l2 - t, t);
                    assert!((mid(b1, l1, l2) - other).abs() < 1e-12);
                    assert_eq!(
                        half_mid_equals_innergap(b1, l1, l2),
                        0.5 * mid(b1, l1, l2)
                    );
                }
            }
        }
    }

    #[test]
    fn torus_point_validation() {
        assert!(TorusPoint::new(3.0, 3.0, 3.0).is_ok());
        assert!(TorusPoint::new(3.0, 3.0, 6.0).is_ok());
        assert!(matches!(
            TorusPoint::new(2.9, 3.0, 3.1),
            Err(TorusPointError::TraceTooSmall(_))
        ));
        assert!(matches!(
            TorusPoint::new(f64::NAN, 3.0, 3.0),
            Err(TorusPointError::TraceTooSmall(_))
        ));
        assert!(matches!(
            TorusPoint::new(3.0, 3.0, 5.0),
            Err(TorusPointError::MarkoffViolated { .. })
        ));
        // The symmetric family solves the relation exactly.
        let p = TorusPoint::symmetric_family(3.5).unwrap();
        let (_, _, z) = p.traces();
        assert!((z - 9.732717422415453).abs() < 1e-9);
        let p = TorusPoint::symmetric_family(4.0).unwrap();
        let (_, _, z) = p.traces();
        assert!((z - (8.0 + 4.0 * 2.0f64.sqrt())).abs() < 1e-12);
        assert!(matches!(
            TorusPoint::symmetric_family(2.0),
            Err(TorusPointError::TraceTooSmall(_))
        ));
    }

    #[test]
    fn modular_torus_root_geodesics() {
        let lengths = enumerate_torus_geodesics(&TorusPoint::modular(), 0);
        assert_eq!(lengths.len(), 3);
        for l in lengths {
            assert!((l - 1.9248473002384139).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_count_matches_tree_size() {
        let p = TorusPoint::symmetric_family(3.5).unwrap();
        for d in 0..=6u32 {
            let lengths = enumerate_torus_geodesics(&p, d);
            assert_eq!(lengths.len() as u32, 3 + 3 * ((1 << d) - 1));
            for l in lengths {
                assert!(l.is_finite() && l > 0.0);
            }
        }
    }

    #[test]
    fn enumerated_triples_stay_on_markoff_variety() {
        let tori = [
            TorusPoint::modular(),
            TorusPoint::symmetric_family(3.5).unwrap(),
            TorusPoint::symmetric_family(4.0).unwrap(),
        ];
        fn check(a: f64, b: f64, c: f64, level: u32) {
            let residual =
                (a * a + b * b + c * c - a * b * c).abs() / (a * b * c).abs().max(1.0);
            assert!(residual < 1e-9, "triple ({a},{b},{c}) off the variety");
            if level < 6 {
                for (a2, b2, c2) in children(a, b, c) {
                    check(a2, b2, c2, level + 1);
                }
            }
        }
        for p in tori {
            for (a, b, c) in branch_triples(&p) {
                check(a, b, c, 1);
            }
        }
    }

    #[test]
    fn identity_partial_sums_at_depth_zero() {
        let r = verify_torus_identity(&TorusPoint::modular(), 0, 1e-6);
        assert_eq!(r.partial_sums.len(), 1);
        assert!((r.partial_sums[0] - 0.7639320225002103).abs() < 1e-9);
        assert!(!r.passed()); // gap ≈ 0.236 at depth 0
        assert!(!r.exceeded());
    }

    #[test]
    fn identity_converges_on_three_tori() {
        let tori = [
            TorusPoint::modular(),
            TorusPoint::symmetric_family(3.5).unwrap(),
            TorusPoint::symmetric_family(4.0).unwrap(),
        ];
        for p in tori {
            let r = verify_torus_identity(&p, 25, 1e-6);
            assert!(r.passed(), "{p:?}: gap {}", r.gap());
            assert!(!r.exceeded());
            for w in r.partial_sums.windows(2) {
                assert!(w[1] >= w[0], "partial sums must be nondecreasing");
            }
            // Exact partial sums are strictly below 1; in f64 the deepest
            // sums sit within ~1e-15 of 1, so allow summation roundoff.
            for s in &r.partial_sums {
                assert!(*s < 1.0 + 1e-12, "partial sum {s} above 1 beyond roundoff");
            }
            assert!(r.pruned_bound < 1e-150);
        }
    }

    #[test]
    fn report_display_lists_depths() {
        let r = verify_torus_identity(&TorusPoint::modular(), 3, 1e-6);
        let text = r.to_string();
        assert!(text.contains("depth   0"));
        assert!(text.contains("depth   3"));
        assert!(text.contains("FAIL"));
    }
}
