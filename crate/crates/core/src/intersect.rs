//! ψ-class intersection numbers and their recursion identities.
//!
//! Top-degree coefficients of volume polynomials encode intersection
//! numbers: for |a| = 3g−3+n the coefficient C of b₁^{2a₁}⋯bₙ^{2aₙ} in
//! V_{g,n} satisfies ⟨τ_{a₁}⋯τ_{aₙ}⟩_g = C·2^{|a|}·a₁!⋯aₙ!
//! ([`tau_bracket`]); sub-top coefficients encode mixed ψ–ω numbers with
//! the symplectic form's π² powers attached ([`mixed_number`]).
//!
//! The checkers verify, exactly and exhaustively per signature, the
//! classical constraints these numbers must satisfy: the string and dilaton
//! equations, the double-factorial KdV-type recursion on brackets
//! ([`check_kdv`]), and the equivalent single-factorial recursion on raw
//! volume coefficients ([`check_coeff_recursion`]). Both of the latter are
//! implemented independently as displayed, so a defect in either normalization
//! would surface as a disagreement.

use num::{BigInt, One, Zero};

use crate::exactalg::{factorial, rat, GradedPoly, Monomial, Rational, Slot};
use crate::recursion::{is_stable, RecursionCache, RecursionError};
use crate::CheckReport;

/// Errors from intersection-number extraction.
#[derive(Debug, thiserror::Error)]
pub enum IntersectError {
    #[error("signature (g,n) = ({0},{1}) is not stable")]
    Unstable(u32, u32),
    #[error("psi-exponent total {total} exceeds dimension {dim} of the (g,n)=({g},{n}) moduli space")]
    DegreeTooHigh { g: u32, n: u32, total: u32, dim: u32 },
    #[error("inadmissible exponent vector: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Recursion(#[from] RecursionError),
}

fn dimension(g: u32, n: u32) -> u32 {
    3 * g + n - 3
}

/// The unique genus for which ⟨τ_{a₁}⋯τ_{aₙ}⟩ can be nonzero:
/// g = (|a| − n + 3)/3, provided that is a non-negative integer.
pub fn infer_genus(a: &[u32]) -> Option<u32> {
    let total: i64 = a.iter().map(|x| *x as i64).sum();
    let t = total - a.len() as i64 + 3;
    (t >= 0 && t % 3 == 0).then_some((t / 3) as u32)
}

fn pure_monomial(a: &[u32]) -> Monomial {
    let mut m = Monomial::one();
    for (i, e) in a.iter().enumerate() {
        m = m.times_var(Slot::B(i as u32 + 1), *e);
    }
    m
}

/// 2^{|a|} · a₁!⋯aₙ! as a rational.
fn dictionary_factor(a: &[u32]) -> Rational {
    let total: u32 = a.iter().sum();
    let mut f = BigInt::from(2).pow(total);
    for e in a {
        f *= factorial(*e as u64);
    }
    Rational::from_integer(f)
}

/// ⟨τ_{a₁}⋯τ_{aₙ}⟩ at explicit genus g: zero when (g,n) is unstable or
/// |a| ≠ 3g−3+n, otherwise read off the top-degree volume coefficient.
pub fn tau_bracket_g(
    g: u32,
    a: &[u32],
    cache: &RecursionCache,
) -> Result<Rational, RecursionError> {
    let n = a.len() as u32;
    if !is_stable(g, n) || a.iter().sum::<u32>() != dimension(g, n) {
        return Ok(Rational::zero());
    }
    let vol = cache.volume(g, n)?;
    Ok(vol.poly().coeff(&pure_monomial(a)) * dictionary_factor(a))
}

/// ⟨τ_{a₁}⋯τ_{aₙ}⟩ with the genus inferred from (|a|, n); zero when no
/// genus is admissible.
pub fn tau_bracket(a: &[u32], cache: &RecursionCache) -> Result<Rational, RecursionError> {
    match infer_genus(a) {
        Some(g) => tau_bracket_g(g, a, cache),
        None => Ok(Rational::zero()),
    }
}

/// The mixed number ∫ ψ₁^{a₁}⋯ψₙ^{aₙ} ω^{3g−3+n−|a|} as a rational multiple
/// of π^{2(3g−3+n−|a|)} (the ω-powers carry their π² factors): reads the
/// b^{2a}-coefficient of V_{g,n} and multiplies by 2^{|a|}·a!·(3g−3+n−|a|)!.
pub fn mixed_number(
    g: u32,
    a: &[u32],
    cache: &RecursionCache,
) -> Result<GradedPoly, IntersectError> {
    let n = a.len() as u32;
    if !is_stable(g, n) {
        return Err(IntersectError::Unstable(g, n));
    }
    let dim = dimension(g, n);
    let total: u32 = a.iter().sum();
    if total > dim {
        return Err(IntersectError::DegreeTooHigh { g, n, total, dim });
    }
    let omega = dim - total;
    let vol = cache.volume(g, n)?;
    let c = vol.poly().coeff(&pure_monomial(a).times_pi2(omega));
    let factor = dictionary_factor(a) * Rational::from_integer(factorial(omega as u64));
    Ok(GradedPoly::monomial(Monomial::pi2(omega), c * factor))
}

/// All non-negative integer vectors of length `parts` summing to `total`.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(idx: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if idx + 1 == cur.len() {
            cur[idx] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[idx] = v;
            rec(idx + 1, left - v, cur, out);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// All ordered two-block partitions (I₁, I₂) of the positions of `values`,
/// returned as the value lists of each block.
fn ordered_partitions(values: &[u32]) -> Vec<(Vec<u32>, Vec<u32>)> {
    let m = values.len();
    (0u64..1 << m)
        .map(|mask| {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (i, v) in values.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    left.push(*v);
                } else {
                    right.push(*v);
                }
            }
            (left, right)
        })
        .collect()
}

/// Odd double factorial k!! = k(k−2)⋯1 for odd k, with (−1)!! = 1.
fn double_factorial_odd(k: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut v = k;
    while v >= 2 {
        acc *= v;
        v -= 2;
    }
    acc
}

fn string_at(g: u32, n: u32, cache: &RecursionCache) -> Result<CheckReport, RecursionError> {
    let mut report = CheckReport::new("string");
    if !is_stable(g, n) || n < 2 || !is_stable(g, n - 1) {
        return Ok(report);
    }
    for rest in compositions(dimension(g, n), n as usize - 1) {
        let mut full = vec![0u32];
        full.extend(&rest);
        let lhs = tau_bracket_g(g, &full, cache)?;
        let mut rhs = Rational::zero();
        for i in 0..rest.len() {
            if rest[i] >= 1 {
                let mut dec = rest.clone();
                dec[i] -= 1;
                rhs += tau_bracket_g(g, &dec, cache)?;
            }
        }
        if lhs == rhs {
            report.record_pass();
        } else {
            report.record_fail(format!("g={g} a={full:?}: lhs {lhs} vs rhs {rhs}"));
        }
    }
    Ok(report)
}

/// String equation ⟨τ₀ τ_{a₂}⋯⟩_g = Σ_{aᵢ≥1} ⟨⋯τ_{aᵢ−1}⋯⟩_g, checked for
/// every admissible exponent vector at genus g with n ≤ n_max insertions.
pub fn check_string(
    g: u32,
    n_max: u32,
    cache: &RecursionCache,
) -> Result<CheckReport, RecursionError> {
    let mut report = CheckReport::new("string");
    for n in 1..=n_max {
        report.absorb(string_at(g, n, cache)?);
    }
    Ok(report)
}

fn dilaton_at(g: u32, n: u32, cache: &RecursionCache) -> Result<CheckReport, RecursionError> {
    let mut report = CheckReport::new("dilaton");
    if !is_stable(g, n) || n < 2 || !is_stable(g, n - 1) || dimension(g, n) == 0 {
        return Ok(report);
    }
    let factor = rat(2 * g as i64 - 2 + n as i64 - 1);
    for rest in compositions(dimension(g, n) - 1, n as usize - 1) {
        let mut full = vec![1u32];
        full.extend(&rest);
        let lhs = tau_bracket_g(g, &full, cache)?;
        let rhs = &factor * tau_bracket_g(g, &rest, cache)?;
        if lhs == rhs {
            report.record_pass();
        } else {
            report.record_fail(format!("g={g} a={full:?}: lhs {lhs} vs rhs {rhs}"));
        }
    }
    Ok(report)
}

/// Dilaton equation ⟨τ₁ τ_{a₂}⋯⟩_g = (2g−2+(n−1))·⟨τ_{a₂}⋯⟩_g, checked for
/// every admissible exponent vector at genus g with n ≤ n_max insertions.
pub fn check_dilaton(
    g: u32,
    n_max: u32,
    cache: &RecursionCache,
) -> Result<CheckReport, RecursionError> {
    let mut report = CheckReport::new("dilaton");
    for n in 1..=n_max {
        report.absorb(dilaton_at(g, n, cache)?);
    }
    Ok(report)
}

/// Evaluate one instance of the double-factorial bracket recursion; `None`
/// means both sides agree exactly.
fn kdv_instance(
    g: u32,
    a: &[u32],
    cache: &RecursionCache,
) -> Result<Option<String>, RecursionError> {
    let n = a.len();
    let a1 = a[0];
    let lhs = tau_bracket_g(g, a, cache)?;
    let df = double_factorial_odd;
    let mut rhs = Rational::zero();
    // Pair line: merge a₁ with one other insertion.
    for j in 1..n {
        let factor = Rational::new(
            df(2 * (a1 + a[j]) as i64 - 1),
            df(2 * a1 as i64 + 1) * df(2 * a[j] as i64 - 1),
        );
        let mut merged = vec![a1 + a[j] - 1];
        merged.extend(a[1..].iter().enumerate().filter(|(i, _)| i + 1 != j).map(|(_, v)| *v));
        rhs += factor * tau_bracket_g(g, &merged, cache)?;
    }
    // Handle and splitting lines share the (j,k) split of a₁ − 2 and its
    // weight; both are empty for a₁ ∈ {0, 1}.
    if a1 >= 2 {
        let rest = &a[1..];
        let partitions = ordered_partitions(rest);
        for j in 0..=a1 - 2 {
            let k = a1 - 2 - j;
            let factor = Rational::new(
                df(2 * j as i64 + 1) * df(2 * k as i64 + 1),
                BigInt::from(2) * df(2 * a1 as i64 + 1),
            );
            if g >= 1 {
                let mut v = vec![j, k];
                v.extend(rest);
                rhs += &factor * tau_bracket_g(g - 1, &v, cache)?;
            }
            for (left, right) in &partitions {
                for g1 in 0..=g {
                    let mut v1 = vec![j];
                    v1.extend(left);
                    let b1 = tau_bracket_g(g1, &v1, cache)?;
                    if b1.is_zero() {
                        continue;
                    }
                    let mut v2 = vec![k];
                    v2.extend(right);
                    let b2 = tau_bracket_g(g - g1, &v2, cache)?;
                    rhs += &factor * b1 * b2;
                }
            }
        }
    }
    Ok((lhs != rhs).then(|| format!("g={g} a={a:?}: lhs {lhs} vs rhs {rhs}")))
}

/// Check the double-factorial bracket recursion for one exponent vector
/// (a₁ ≥ 1, |a| = 3g−3+n required).
pub fn check_kdv(g: u32, a: &[u32], cache: &RecursionCache) -> Result<CheckReport, IntersectError> {
    if a.is_empty() || a[0] == 0 {
        return Err(IntersectError::Inadmissible(format!(
            "first exponent must be >= 1, got {a:?}"
        )));
    }
    let n = a.len() as u32;
    if !is_stable(g, n) || a.iter().sum::<u32>() != dimension(g, n) {
        return Err(IntersectError::Inadmissible(format!(
            "|a| must equal 3g-3+n for a nonzero bracket, got g={g}, a={a:?}"
        )));
    }
    let mut report = CheckReport::new("kdv");
    match kdv_instance(g, a, cache)? {
        None => report.record_pass(),
        Some(detail) => report.record_fail(detail),
    }
    Ok(report)
}

/// Run the bracket recursion over every admissible vector at (g,n) with
/// a₁ ≥ 1. The lone seed bracket ⟨τ₁⟩₁, which the recursion cannot produce
/// (its right side has no terms), is skipped.
pub fn check_kdv_all(
    g: u32,
    n: u32,
    cache: &RecursionCache,
) -> Result<CheckReport, RecursionError> {
    let mut report = CheckReport::new("kdv");
    if !is_stable(g, n) {
        return Ok(report);
    }
    for a in compositions(dimension(g, n), n as usize) {
        if a[0] == 0 || ((g, n) == (1, 1) && a == [1]) {
            continue;
        }
        match kdv_instance(g, &a, cache)? {
            None => report.record_pass(),
            Some(detail) => report.record_fail(detail),
        }
    }
    Ok(report)
}

/// Top-degree volume coefficient C_g(a): the coefficient of Π bᵢ^{2aᵢ} in
/// V_{g,n} when |a| = 3g−3+n, else 0.
fn c_top(g: u32, a: &[u32], cache: &RecursionCache) -> Result<Rational, RecursionError> {
    let n = a.len() as u32;
    if !is_stable(g, n) || a.iter().sum::<u32>() != dimension(g, n) {
        return Ok(Rational::zero());
    }
    let vol = cache.volume(g, n)?;
    Ok(vol.poly().coeff(&pure_monomial(a)))
}

/// Check the single-factorial recursion on raw top-degree coefficients,
/// (2a₁+1)·C_g(a) = pair sum + split-weight·(handle + splitting sums),
/// for every top exponent vector at (g,n). The two seed signatures (0,3)
/// and (1,1), where the underlying volume recursion does not apply, are
/// reported as vacuous.
pub fn check_coeff_recursion(
    g: u32,
    n: u32,
    cache: &RecursionCache,
) -> Result<CheckReport, RecursionError> {
    let mut report = CheckReport::new("coeff-recursion");
    if !is_stable(g, n) || (g, n) == (0, 3) || (g, n) == (1, 1) {
        return Ok(report);
    }
    let fact = |k: u64| Rational::from_integer(factorial(k));
    for a in compositions(dimension(g, n), n as usize) {
        let a1 = a[0];
        let lhs = rat(2 * a1 as i64 + 1) * c_top(g, &a, cache)?;
        let mut rhs = Rational::zero();
        for j in 1..n as usize {
            if a1 == 0 && a[j] == 0 {
                continue; // merged exponent would be −1: term dropped
            }
            let factor = fact(2 * (a1 + a[j]) as u64 - 1)
                / (fact(2 * a1 as u64) * fact(2 * a[j] as u64));
            let mut merged = vec![a1 + a[j] - 1];
            merged.extend(a[1..].iter().enumerate().filter(|(i, _)| i + 1 != j).map(|(_, v)| *v));
            rhs += factor * c_top(g, &merged, cache)?;
        }
        if a1 >= 2 {
            let rest = &a[1..];
            let partitions = ordered_partitions(rest);
            for j in 0..=a1 - 2 {
                let k = a1 - 2 - j;
                let factor = fact(2 * j as u64 + 1) * fact(2 * k as u64 + 1)
                    / (rat(2) * fact(2 * a1 as u64));
                if g >= 1 {
                    let mut v = vec![j, k];
                    v.extend(rest);
                    rhs += &factor * c_top(g - 1, &v, cache)?;
                }
                for (left, right) in &partitions {
                    for g1 in 0..=g {
                        let mut v1 = vec![j];
                        v1.extend(left);
                        let b1 = c_top(g1, &v1, cache)?;
                        if b1.is_zero() {
                            continue;
                        }
                        let mut v2 = vec![k];
                        v2.extend(right);
                        rhs += &factor * b1 * c_top(g - g1, &v2, cache)?;
                    }
                }
            }
        }
        if lhs == rhs {
            report.record_pass();
        } else {
            report.record_fail(format!("(g,n)=({g},{n}) a={a:?}: lhs {lhs} vs rhs {rhs}"));
        }
    }
    Ok(report)
}

/// Run all four identity families exhaustively over every stable (g,n)
/// with complexity 2g−2+n ≤ `max_complexity`; returns one aggregated report
/// per family (string, dilaton, kdv, coeff-recursion).
pub fn check_virasoro_suite(
    max_complexity: u32,
    cache: &RecursionCache,
) -> Result<Vec<CheckReport>, RecursionError> {
    let mut string = CheckReport::new("string");
    let mut dilaton = CheckReport::new("dilaton");
    let mut kdv = CheckReport::new("kdv");
    let mut coeff = CheckReport::new("coeff-recursion");
    for g in 0..=(max_complexity + 1) / 2 {
        let n_lo = if g == 0 { 3 } else { 1 };
        let n_hi = (max_complexity + 2).saturating_sub(2 * g);
        for n in n_lo..=n_hi {
            string.absorb(string_at(g, n, cache)?);
            dilaton.absorb(dilaton_at(g, n, cache)?);
            kdv.absorb(check_kdv_all(g, n, cache)?);
            coeff.absorb(check_coeff_recursion(g, n, cache)?);
        }
    }
    Ok(vec![string, dilaton, kdv, coeff])
}
