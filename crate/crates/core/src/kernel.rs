//! The integration kernel of the volume recursion and its exact moments.
//!
//! The recursion integrates boundary lengths against
//! H(s, t) = 1/(1 + e^{(s+t)/2}) + 1/(1 + e^{(s−t)/2}),
//! and all integrals that occur reduce to the odd moments
//! F_{2k+1}(b) = ∫₀^∞ x^{2k+1} H(x, b) dx,
//! which are even polynomials in b with coefficients in ℚ[π²]
//! ([`f_poly`]). Two derived quantities feed the recursion directly:
//! [`even_shift_expand`] (the two-boundary expansion
//! F(b_A + b_B) + F(b_A − b_B)) and [`double_reduce`] (the beta-integral
//! factor that collapses a double moment into a single one).
//!
//! Everything here is exact; [`h_num`] is the one numeric function, kept for
//! quadrature cross-checks of the closed forms.

use std::sync::{Mutex, OnceLock};

use num::{One, Zero};

use crate::exactalg::{binomial, factorial, rat, GradedPoly, Monomial, Rational, Slot};

/// ζ(2i) as a rational multiple of π^{2i}: returns r with ζ(2i) = r·π^{2i}.
///
/// Seeds r₀ = −1/2 (the analytic-continuation value ζ(0), which enters the
/// moment polynomials) and r₁ = 1/6; higher values follow from the
/// self-convolution recursion ζ(2i) = 2/(2i+1) · Σ_{j=1}^{i−1} ζ(2j)ζ(2i−2j),
/// memoized. The Bernoulli-number closed form is used only as an independent
/// oracle in tests.
pub fn zeta_even(i: u32) -> Rational {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        Mutex::new(vec![
            Rational::new((-1).into(), 2.into()),
            Rational::new(1.into(), 6.into()),
        ])
    });
    let mut vals = cache.lock().expect("zeta cache poisoned");
    while vals.len() <= i as usize {
        let m = vals.len() as u32; // computing r_m, m >= 2
        let mut sum = Rational::zero();
        for j in 1..m {
            sum += &vals[j as usize] * &vals[(m - j) as usize];
        }
        let r = rat(2) / rat(2 * m as i64 + 1) * sum;
        vals.push(r);
    }
    vals[i as usize].clone()
}

/// The kernel moment F_{2k+1} as an even polynomial in the auxiliary
/// variable [`Slot::X`]:
///
/// F_{2k+1}(b) = (2k+1)! · Σ_{i=0}^{k+1} ζ(2i)(2^{2i+1} − 4) · b^{2k+2−2i}/(2k+2−2i)!
///
/// Homogeneous of weight k+1 with leading coefficient 1/(2k+2). Memoized.
pub fn f_poly(k: u32) -> GradedPoly {
    static CACHE: OnceLock<Mutex<Vec<GradedPoly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut vals = cache.lock().expect("f_poly cache poisoned");
    while vals.len() <= k as usize {
        let k = vals.len() as u32;
        let mut p = GradedPoly::zero();
        let lead = Rational::from_integer(factorial(2 * k as u64 + 1));
        for i in 0..=k + 1 {
            let pow2 = Rational::from_integer(num::BigInt::from(2).pow(2 * i + 1) - 4);
            let denom = Rational::from_integer(factorial((2 * k + 2 - 2 * i) as u64));
            let coeff = &lead * zeta_even(i) * pow2 / denom;
            // b^{2k+2−2i} is the squared variable to power k+1−i.
            p.add_term(Monomial::pi2(i).times_var(Slot::X, k + 1 - i), coeff);
        }
        vals.push(p);
    }
    vals[k as usize].clone()
}

/// Numeric kernel H(s, t) = 1/(1 + e^{(s+t)/2}) + 1/(1 + e^{(s−t)/2}).
pub fn h_num(s: f64, t: f64) -> f64 {
    1.0 / (1.0 + ((s + t) / 2.0).exp()) + 1.0 / (1.0 + ((s - t) / 2.0).exp())
}

/// The odd moment of the Fermi-type weight without boundary:
/// ∫₀^∞ x^{2i−1}/(1 + e^x) dx = ζ(2i)·(2i−1)!·(1 − 2^{1−2i}),
/// returned as the exact monomial r·π^{2i}. Requires i ≥ 1.
pub fn odd_moment(i: u32) -> GradedPoly {
    assert!(i >= 1, "odd_moment needs a positive moment index");
    let zeta = zeta_even(i);
    let fact = Rational::from_integer(factorial(2 * i as u64 - 1));
    let two_pow = Rational::new(num::BigInt::one(), num::BigInt::from(2).pow(2 * i - 1));
    let coeff = zeta * fact * (rat(1) - two_pow);
    GradedPoly::monomial(Monomial::pi2(i), coeff)
}

/// The two-boundary kernel expansion F_{2k+1}(b_A + b_B) + F_{2k+1}(b_A − b_B),
/// which is even in each of b_A and b_B separately: each term r·u^{2j}·π^{2c}
/// of [`f_poly`]`(k)` contributes r·π^{2c}·2·Σ_p C(2j, 2p)·b_A^{2p}·b_B^{2j−2p}.
///
/// For k = 0 this is b_A² + b_B² + 4π²/3.
pub fn even_shift_expand(k: u32, a: Slot, b: Slot) -> GradedPoly {
    debug_assert!(a != b, "expansion needs two distinct slots");
    let mut out = GradedPoly::zero();
    for (m, r) in f_poly(k).terms() {
        let j = m.exp_of(Slot::X) as i64;
        let base = Monomial::pi2(m.pi2_exp());
        for p in 0..=j {
            let c = r * rat(2) * Rational::from_integer(binomial(2 * j, 2 * p));
            out.add_term(
                base.times_var(a, p as u32).times_var(b, (j - p) as u32),
                c,
            );
        }
    }
    out
}

/// The exact reduction factor for double moments:
/// ∫∫_{x+y≤1} x^{2i+1} y^{2j+1} collapses against a single moment with
/// weight (2i+1)!(2j+1)!/(2i+2j+3)!. double_reduce(0,0) = 1/6,
/// double_reduce(0,1) = 1/20.
pub fn double_reduce(i: u32, j: u32) -> Rational {
    let num = factorial(2 * i as u64 + 1) * factorial(2 * j as u64 + 1);
    let den = factorial(2 * (i + j) as u64 + 3);
    Rational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::ratio;
    use num::ToPrimitive;
    use std::collections::BTreeMap;

    /// Independent oracle: Bernoulli numbers from the defining recurrence
    /// B_m = −1/(m+1) · Σ_{j<m} C(m+1, j) B_j, then
    /// ζ(2i) = (−1)^{i+1} B_{2i} (2π)^{2i} / (2·(2i)!).
    fn zeta_even_via_bernoulli(i: u32) -> Rational {
        let m = 2 * i as usize;
        let mut bern: Vec<Rational> = vec![rat(1)];
        for k in 1..=m {
            let mut sum = Rational::zero();
            for (j, b) in bern.iter().enumerate() {
                sum += Rational::from_integer(binomial(k as i64 + 1, j as i64)) * b;
            }
            bern.push(-sum / rat(k as i64 + 1));
        }
        let sign = if i % 2 == 0 { rat(-1) } else { rat(1) };
        let two_pow = Rational::from_integer(num::BigInt::from(2).pow(2 * i));
        sign * &bern[m] * two_pow / (rat(2) * Rational::from_integer(factorial(2 * i as u64)))
    }

    #[test]
    fn zeta_matches_known_values_and_bernoulli_oracle() {
        assert_eq!(zeta_even(0), ratio(-1, 2));
        assert_eq!(zeta_even(1), ratio(1, 6));
        assert_eq!(zeta_even(2), ratio(1, 90));
        assert_eq!(zeta_even(3), ratio(1, 945));
        for i in 1..=10 {
            assert_eq!(zeta_even(i), zeta_even_via_bernoulli(i), "zeta(2*{i})");
        }
    }

    #[test]
    fn f_poly_small_cases_exact() {
        // F_1(b) = b²/2 + 2π²/3
        let mut want = GradedPoly::zero();
        want.add_term(Monomial::var(Slot::X, 1), ratio(1, 2));
        want.add_term(Monomial::pi2(1), ratio(2, 3));
        assert_eq!(f_poly(0), want);

        // F_3(b) = b⁴/4 + 2π²b² + 28π⁴/15
        let mut want = GradedPoly::zero();
        want.add_term(Monomial::var(Slot::X, 2), ratio(1, 4));
        want.add_term(Monomial::pi2(1).times_var(Slot::X, 1), rat(2));
        want.add_term(Monomial::pi2(2), ratio(28, 15));
        assert_eq!(f_poly(1), want);
    }

    #[test]
    fn f_poly_shape() {
        for k in 0..=8 {
            let f = f_poly(k);
            assert_eq!(f.uniform_weight(), Some(k + 1), "weight of F_{}", 2 * k + 1);
            assert_eq!(f.max_exp(Slot::X), k + 1);
            assert_eq!(
                f.coeff(&Monomial::var(Slot::X, k + 1)),
                Rational::new(1.into(), (2 * k as i64 + 2).into()),
                "leading coefficient of F_{}",
                2 * k + 1
            );
        }
    }

    #[test]
    fn odd_moment_values() {
        assert_eq!(odd_moment(1), GradedPoly::monomial(Monomial::pi2(1), ratio(1, 12)));
        assert_eq!(odd_moment(2), GradedPoly::monomial(Monomial::pi2(2), ratio(7, 120)));
    }

    #[test]
    fn double_reduce_values() {
        assert_eq!(double_reduce(0, 0), ratio(1, 6));
        assert_eq!(double_reduce(0, 1), ratio(1, 20));
        assert_eq!(double_reduce(1, 0), ratio(1, 20));
        assert_eq!(double_reduce(1, 1), ratio(1, 140));
        // Symmetry.
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(double_reduce(i, j), double_reduce(j, i));
            }
        }
    }

    #[test]
    fn even_shift_expand_base_case_and_symmetry() {
        let a = Slot::B(1);
        let b = Slot::B(5);
        // k = 0: b_A² + b_B² + 4π²/3.
        let mut want = GradedPoly::zero();
        want.add_term(Monomial::var(a, 1), rat(1));
        want.add_term(Monomial::var(b, 1), rat(1));
        want.add_term(Monomial::pi2(1), ratio(4, 3));
        assert_eq!(even_shift_expand(0, a, b), want);

        // Symmetric under swapping the two slots.
        for k in 0..=4 {
            let swap: BTreeMap<Slot, Slot> = [(a, b), (b, a)].into();
            let p = even_shift_expand(k, a, b);
            assert_eq!(p.relabel(&swap).unwrap(), p);
            assert_eq!(p.uniform_weight(), Some(k + 1));
        }
    }

    #[test]
    fn even_shift_expand_matches_shifted_f_at_rational_points() {
        // Exact check (π symbolic): substituting (s, t) into the expansion
        // equals F(s+t) + F(s−t) as polynomials in π².
        let a = Slot::B(1);
        let b = Slot::B(2);
        let points = [(rat(1), rat(2)), (rat(3), rat(5)), (ratio(1, 2), rat(7))];
        for k in 0..=5 {
            let expansion = even_shift_expand(k, a, b);
            let f = f_poly(k);
            for (s, t) in &points {
                let lhs = expansion
                    .substitute(&[(a, s.clone()), (b, t.clone())].into())
                    .unwrap();
                let plus = f.substitute(&[(Slot::X, s + t)].into()).unwrap();
                let minus = f.substitute(&[(Slot::X, s - t)].into()).unwrap();
                assert_eq!(lhs, &plus + &minus, "k={k}, point ({s},{t})");
            }
        }
    }

    #[test]
    fn h_num_sanity() {
        assert!((h_num(0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((h_num(3.0, 0.0) - 2.0 / (1.0 + (1.5f64).exp())).abs() < 1e-15);
        // Decreasing in s for fixed t.
        assert!(h_num(1.0, 2.0) > h_num(2.0, 2.0));
        // H(s,t) + H(s,-t) is H with t replaced by -t unchanged (even in t).
        assert!((h_num(1.5, 0.7) - h_num(1.5, -0.7)).abs() < 1e-15);
    }

    #[test]
    fn f_poly_matches_quadrature() {
        // Small instance of the quadrature cross-check (the full sweep is in
        // the acceptance suite): ∫₀^∞ x^{2k+1} H(x,b) dx vs the closed form.
        for k in 0..=2u32 {
            for bval in [0.5, 1.0, 2.0] {
                let numeric = crate::quadrature::f_kernel_quadrature(k, bval);
                let exact = f_poly(k)
                    .evaluate_f64(&[(Slot::X, crate::exactalg::Rational::from_float(bval).unwrap())].into(), 30);
                let rel = ((numeric - exact) / exact).abs();
                assert!(rel < 1e-8, "k={k} b={bval}: {numeric} vs {exact} rel {rel}");
            }
        }
    }

    #[test]
    fn odd_moment_matches_quadrature() {
        for i in 1..=3u32 {
            let numeric = crate::quadrature::fermi_moment_quadrature(i);
            let exact = odd_moment(i)
                .evaluate(&BTreeMap::new(), 30)
                .unwrap()
                .to_f64()
                .unwrap();
            let rel = ((numeric - exact) / exact).abs();
            assert!(rel < 1e-8, "moment {i}: {numeric} vs {exact}");
        }
    }
}
