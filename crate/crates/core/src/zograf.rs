//! Independent cusped-volume recursions used as an oracle.
//!
//! Genus-0 and genus-1 Weil-Petersson volumes at zero boundary length
//! satisfy closed recursions in n alone, with normalizations
//!
//! * V_{0,n}(0) = (2π²)^{n−3}/(n−3)! · v_{0,n},
//! * V_{1,n}(0) = (2π²)^{n}/n!     · v_{1,n},
//!
//! where the v's are positive rationals given by [`zograf_v0`] and
//! [`zograf_v1`]. Because these recursions share nothing with the
//! boundary-length recursion beyond the base normalization, exact agreement
//! of the two pipelines ([`crosscheck`]) exercises the whole volume engine.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use num::{BigInt, Zero};

use crate::exactalg::{binomial, factorial, rat, GradedPoly, Monomial, Rational, Slot};
use crate::recursion::{RecursionCache, RecursionError};
use crate::CheckReport;

/// The genus-0 normalized volume v_{0,n} (n ≥ 3), memoized:
/// v_{0,3} = 1 and
/// v_{0,n} = ½ Σ_{k=1}^{n−3} k(n−k−2)/(n−1) · C(n−4,k−1) C(n,k+1) · v_{0,k+2} v_{0,n−k}.
pub fn zograf_v0(n: u32) -> Rational {
    assert!(n >= 3, "genus-0 volumes start at n = 3");
    static MEMO: OnceLock<Mutex<BTreeMap<u32, Rational>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(BTreeMap::from([(3, rat(1))])));
    if let Some(v) = memo.lock().expect("memo poisoned").get(&n) {
        return v.clone();
    }
    // Recurse with the lock released; entries are deterministic, so a racing
    // duplicate insert is harmless.
    let n_i = n as i64;
    let mut sum = Rational::zero();
    for k in 1..=n - 3 {
        let k_i = k as i64;
        let ratio = Rational::new(
            BigInt::from(k_i * (n_i - k_i - 2)) * binomial(n_i - 4, k_i - 1) * binomial(n_i, k_i + 1),
            BigInt::from(n_i - 1),
        );
        sum += ratio * zograf_v0(k + 2) * zograf_v0(n - k);
    }
    let v = sum / rat(2);
    memo.lock().expect("memo poisoned").insert(n, v.clone());
    v
}

/// The genus-1 normalized volume v_{1,n} (n ≥ 1), memoized:
/// v_{1,n} = n/24 · v_{0,n+2} + Σ_{k=1}^{n−1} (n−k) C(n−1,k) C(n,k−1) · v_{1,k} v_{0,n−k+2}.
pub fn zograf_v1(n: u32) -> Rational {
    assert!(n >= 1, "genus-1 volumes start at n = 1");
    static MEMO: OnceLock<Mutex<BTreeMap<u32, Rational>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = memo.lock().expect("memo poisoned").get(&n) {
        return v.clone();
    }
    let n_i = n as i64;
    let mut v = Rational::new(BigInt::from(n_i), BigInt::from(24)) * zograf_v0(n + 2);
    for k in 1..n {
        let k_i = k as i64;
        let factor = Rational::from_integer(
            BigInt::from(n_i - k_i) * binomial(n_i - 1, k_i) * binomial(n_i, k_i - 1),
        );
        v += factor * zograf_v1(k) * zograf_v0(n - k + 2);
    }
    memo.lock().expect("memo poisoned").insert(n, v.clone());
    v
}

/// V_{0,n}(0,…,0) = (2π²)^{n−3}/(n−3)! · v_{0,n} as an exact π-polynomial.
pub fn genus0_cusp_volume(n: u32) -> GradedPoly {
    assert!(n >= 3);
    let k = n - 3;
    let coeff = Rational::new(BigInt::from(2).pow(k), factorial(k as u64)) * zograf_v0(n);
    GradedPoly::monomial(Monomial::pi2(k), coeff)
}

/// V_{1,n}(0,…,0) = (2π²)^n/n! · v_{1,n} as an exact π-polynomial.
pub fn genus1_cusp_volume(n: u32) -> GradedPoly {
    assert!(n >= 1);
    let coeff = Rational::new(BigInt::from(2).pow(n), factorial(n as u64)) * zograf_v1(n);
    GradedPoly::monomial(Monomial::pi2(n), coeff)
}

/// Compare cusped volumes from the boundary-length recursion against the
/// closed recursions: genus 0 for 4 ≤ n ≤ `max_n0` and genus 1 for
/// 1 ≤ n ≤ `max_n1`. (The shared seed n = 3 in genus 0 is definitional and
/// not counted as a comparison.) All comparisons are exact, π symbolic.
pub fn crosscheck(
    max_n0: u32,
    max_n1: u32,
    cache: &RecursionCache,
) -> Result<CheckReport, RecursionError> {
    let mut report = CheckReport::new("zograf");
    let mut compare = |g: u32, n: u32, expected: GradedPoly| -> Result<(), RecursionError> {
        let vol = cache.volume(g, n)?;
        let zeros: BTreeMap<Slot, Rational> =
            (1..=n).map(|i| (Slot::B(i), Rational::zero())).collect();
        let got = vol.poly().substitute(&zeros)?;
        if got == expected {
            report.record_pass();
        } else {
            report.record_fail(format!(
                "V_{{{g},{n}}}(0) mismatch: engine {got}, closed recursion {expected}"
            ));
        }
        Ok(())
    };
    for n in 4..=max_n0 {
        compare(0, n, genus0_cusp_volume(n))?;
    }
    for n in 1..=max_n1 {
        compare(1, n, genus1_cusp_volume(n))?;
    }
    Ok(report)
}
