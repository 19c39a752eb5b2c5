//! Exact scalar and polynomial arithmetic.
//!
//! Everything the volume engine manipulates is a [`GradedPoly`]: a sparse
//! polynomial with arbitrary-precision rational coefficients in the formal
//! variable π² and in *squared* boundary variables. Storing only squared
//! powers bakes in the evenness of volume polynomials, so odd powers cannot
//! even be represented; the one place an odd power conceptually appears
//! (the 2b₁V(b) being differentiated/integrated in the recursion) is handled
//! by the combined termwise rule [`GradedPoly::halve_integrate`].
//!
//! π is symbolic throughout. It becomes a number only inside
//! [`GradedPoly::evaluate`], which substitutes a rational approximation of π
//! ([`pi_rational`]) at a caller-chosen precision.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num::traits::Pow;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational scalar: always in lowest terms with a
/// positive denominator, and every operation is exact.
pub type Rational = BigRational;

/// `n` as a [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` as a [`Rational`] (reduced, sign normalized).
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact factorial.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient with the convention that out-of-range values
/// (`k < 0` or `k > n`) are 0, which keeps edge terms of the cross-check
/// recursions well defined.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n || n < 0 {
        return BigInt::zero();
    }
    let k = k.min(n - k) as u64;
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n as u64 - i) / (i + 1);
    }
    acc
}

/// A rational approximation of π accurate to within 10^−digits.
///
/// Machin's formula π = 16·arctan(1/5) − 4·arctan(1/239) with exact rational
/// partial sums; the arctan series alternate, so each truncation error is
/// below the first omitted term. Results are memoized per digit count.
pub fn pi_rational(digits: u32) -> Rational {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Rational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().expect("pi cache poisoned");
    if let Some(v) = guard.get(&digits) {
        return v.clone();
    }
    // Truncate each series once terms drop below 10^-(digits+3); the combined
    // error is then < 20·10^-(digits+3) < 10^-digits.
    let bound = Rational::new(BigInt::one(), BigInt::from(10u32).pow(digits + 3));
    let arctan_inv = |x: i64| -> Rational {
        let xx = BigInt::from(x * x);
        let mut power = BigInt::from(x); // x^(2k+1)
        let mut sum = Rational::zero();
        let mut k = 0u32;
        loop {
            let term = Rational::new(BigInt::one(), BigInt::from(2 * k + 1) * &power);
            if term < bound {
                break;
            }
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power *= &xx;
            k += 1;
        }
        sum
    };
    let pi = rat(16) * arctan_inv(5) - rat(4) * arctan_inv(239);
    guard.insert(digits, pi.clone());
    pi
}

/// A variable slot of a [`GradedPoly`].
///
/// Numbered slots are boundary components; `X` and `Y` are the auxiliary
/// cuff-length variables that appear mid-recursion and never survive into a
/// finished volume polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    /// Boundary slot `i` (1-based); exponent `e` stands for b_i^{2e}.
    B(u32),
    /// Auxiliary integration variable x.
    X,
    /// Auxiliary integration variable y.
    Y,
}

impl Slot {
    /// Boundary index if this is a numbered slot.
    pub fn index(self) -> Option<u32> {
        match self {
            Slot::B(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::B(i) => write!(f, "b{i}"),
            Slot::X => write!(f, "x"),
            Slot::Y => write!(f, "y"),
        }
    }
}

/// Errors from polynomial slot manipulation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("incomplete relabeling: slot {0} has no image")]
    IncompleteRelabel(String),
    #[error("relabeling is not injective: two slots map to {0}")]
    NonInjectiveRelabel(String),
    #[error("no value provided for slot {0}")]
    MissingValue(String),
    #[error("invalid serialized polynomial: {0}")]
    BadRepr(String),
}

/// A power product π^{2k} · Π b_v^{2e_v}, stored as the exponent of π² plus a
/// map from slot to the exponent of the *squared* variable. Zero exponents
/// are never stored, so equal monomials have identical representations.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pi2_exp: u32,
    var_exps: BTreeMap<Slot, u32>,
}

impl Monomial {
    /// The empty product (the constant monomial 1).
    pub fn one() -> Self {
        Monomial::default()
    }

    /// π^{2k}.
    pub fn pi2(k: u32) -> Self {
        Monomial { pi2_exp: k, var_exps: BTreeMap::new() }
    }

    /// b_v^{2e} (the constant monomial when `e == 0`).
    pub fn var(slot: Slot, e: u32) -> Self {
        let mut m = Monomial::one();
        m.set_exp(slot, e);
        m
    }

    /// This monomial times b_v^{2e}.
    pub fn times_var(&self, slot: Slot, e: u32) -> Self {
        let mut m = self.clone();
        m.set_exp(slot, m.exp_of(slot) + e);
        m
    }

    /// This monomial times π^{2k}.
    pub fn times_pi2(&self, k: u32) -> Self {
        let mut m = self.clone();
        m.pi2_exp += k;
        m
    }

    fn set_exp(&mut self, slot: Slot, e: u32) {
        if e == 0 {
            self.var_exps.remove(&slot);
        } else {
            self.var_exps.insert(slot, e);
        }
    }

    /// Exponent of π².
    pub fn pi2_exp(&self) -> u32 {
        self.pi2_exp
    }

    /// Exponent of the squared variable in `slot` (0 if absent).
    pub fn exp_of(&self, slot: Slot) -> u32 {
        self.var_exps.get(&slot).copied().unwrap_or(0)
    }

    /// The slots that occur with nonzero exponent, in order.
    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.var_exps.keys().copied()
    }

    /// (slot, exponent) pairs in canonical order.
    pub fn var_exps(&self) -> impl Iterator<Item = (Slot, u32)> + '_ {
        self.var_exps.iter().map(|(s, e)| (*s, *e))
    }

    /// Grading weight: pi2_exp + Σ var exponents (π² and each squared
    /// variable both count 1).
    pub fn weight(&self) -> u32 {
        self.pi2_exp + self.var_exps.values().sum::<u32>()
    }

    /// Product of two monomials (exponents add).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.pi2_exp += other.pi2_exp;
        for (s, e) in &other.var_exps {
            out.set_exp(*s, out.exp_of(*s) + e);
        }
        out
    }

    /// Split off one slot: returns its exponent and the monomial without it.
    pub fn split_slot(&self, slot: Slot) -> (u32, Monomial) {
        let mut rest = self.clone();
        let e = rest.exp_of(slot);
        rest.set_exp(slot, 0);
        (e, rest)
    }

    /// Apply a slot map; colliding images have their exponents added.
    fn map_slots(&self, f: impl Fn(Slot) -> Slot) -> Monomial {
        let mut out = Monomial::pi2(self.pi2_exp);
        for (s, e) in &self.var_exps {
            let t = f(*s);
            out.set_exp(t, out.exp_of(t) + e);
        }
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.pi2_exp > 0 {
            parts.push(format!("pi^{}", 2 * self.pi2_exp));
        }
        for (s, e) in &self.var_exps {
            parts.push(format!("{s}^{}", 2 * e));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Sparse polynomial in π² and squared slot variables with [`Rational`]
/// coefficients, kept in canonical form: no zero coefficients, terms ordered
/// by [`Monomial`]'s (pi2_exp, sorted slot/exponent pairs) ordering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl GradedPoly {
    pub fn zero() -> Self {
        GradedPoly::default()
    }

    pub fn one() -> Self {
        GradedPoly::constant(Rational::one())
    }

    /// The constant polynomial `c`.
    pub fn constant(c: Rational) -> Self {
        GradedPoly::monomial(Monomial::one(), c)
    }

    /// The single-term polynomial `c·m` (zero if `c` is zero).
    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = GradedPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Coefficient of `m` (zero if absent).
    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Add `c·m` in place, merging like terms and dropping zeros.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Exact scalar multiple.
    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return GradedPoly::zero();
        }
        GradedPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Multiply every term by the monomial `m`.
    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        GradedPoly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.mul(m), c.clone()))
                .collect(),
        }
    }

    /// Rename slots by an injective map covering every slot that occurs.
    pub fn relabel(&self, mapping: &BTreeMap<Slot, Slot>) -> Result<Self, ExactError> {
        let mut seen = BTreeMap::new();
        for m in self.terms.keys() {
            for s in m.slots() {
                let img = mapping
                    .get(&s)
                    .ok_or_else(|| ExactError::IncompleteRelabel(s.to_string()))?;
                if let Some(prev) = seen.insert(*img, s) {
                    if prev != s {
                        return Err(ExactError::NonInjectiveRelabel(img.to_string()));
                    }
                }
            }
        }
        self.substitute_slots(mapping)
    }

    /// Like [`GradedPoly::relabel`] but the map need not be injective:
    /// slots with the same image are identified (their exponents add).
    pub fn substitute_slots(&self, mapping: &BTreeMap<Slot, Slot>) -> Result<Self, ExactError> {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            for s in m.slots() {
                if !mapping.contains_key(&s) {
                    return Err(ExactError::IncompleteRelabel(s.to_string()));
                }
            }
            out.add_term(m.map_slots(|s| mapping[&s]), c.clone());
        }
        Ok(out)
    }

    /// The combined "integrate in `slot` from 0, then divide by twice the
    /// variable" step that turns an assembled derivative ∂[2bV]/∂b back into
    /// V: termwise c·b^{2m}·M ↦ c/(2(2m+1))·b^{2m}·M. The integration
    /// constant is fixed by 2bV vanishing at b = 0, which is forced for a
    /// polynomial V.
    pub fn halve_integrate(&self, slot: Slot) -> Self {
        GradedPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let e = m.exp_of(slot);
                    (m.clone(), c / rat(2 * (2 * e as i64 + 1)))
                })
                .collect(),
        }
    }

    /// Exact substitution of boundary-length values for every slot; the
    /// result is a polynomial in π² alone. A length of 0 models a cusp.
    pub fn substitute(&self, values: &BTreeMap<Slot, Rational>) -> Result<Self, ExactError> {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            for (s, e) in m.var_exps() {
                let v = values
                    .get(&s)
                    .ok_or_else(|| ExactError::MissingValue(s.to_string()))?;
                coeff *= v.pow(2 * e as i32);
            }
            out.add_term(Monomial::pi2(m.pi2_exp()), coeff);
        }
        Ok(out)
    }

    /// Numeric evaluation: substitute the given slot values exactly, then
    /// replace π by [`pi_rational`]`(pi_digits)`. The only error in the
    /// returned rational is the error of the π approximant.
    pub fn evaluate(
        &self,
        values: &BTreeMap<Slot, Rational>,
        pi_digits: u32,
    ) -> Result<Rational, ExactError> {
        let collapsed = self.substitute(values)?;
        let pi = pi_rational(pi_digits);
        let pi2 = &pi * &pi;
        let mut acc = Rational::zero();
        for (m, c) in collapsed.terms() {
            acc += c * pi2.clone().pow(m.pi2_exp() as i32);
        }
        Ok(acc)
    }

    /// [`GradedPoly::evaluate`] rounded to f64.
    pub fn evaluate_f64(&self, values: &BTreeMap<Slot, Rational>, pi_digits: u32) -> f64 {
        self.evaluate(values, pi_digits)
            .expect("evaluation with missing slot value")
            .to_f64()
            .expect("rational out of f64 range")
    }

    /// Largest exponent of `slot` occurring (0 for a polynomial without it).
    pub fn max_exp(&self, slot: Slot) -> u32 {
        self.terms.keys().map(|m| m.exp_of(slot)).max().unwrap_or(0)
    }

    /// The coefficient of b_slot^{2e} as a polynomial in the other variables.
    pub fn extract_slot_power(&self, slot: Slot, e: u32) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let (got, rest) = m.split_slot(slot);
            if got == e {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// If every term has the same weight, that weight (`None` for mixed
    /// weights; `Some(0)` for the zero polynomial).
    pub fn uniform_weight(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| m.weight());
        let first = match it.next() {
            None => return Some(0),
            Some(w) => w,
        };
        it.all(|w| w == first).then_some(first)
    }

    /// Serialize terms in canonical order.
    pub fn to_term_reprs(&self) -> Vec<TermRepr> {
        self.terms
            .iter()
            .map(|(m, c)| TermRepr {
                pi2: m.pi2_exp(),
                vars: m.var_exps().map(|(s, e)| (slot_key(s), e)).collect(),
                coeff: c.to_string(),
            })
            .collect()
    }

    /// Rebuild from serialized terms, validating canonical-form invariants.
    pub fn from_term_reprs(reprs: &[TermRepr]) -> Result<Self, ExactError> {
        let mut out = GradedPoly::zero();
        for t in reprs {
            let mut m = Monomial::pi2(t.pi2);
            for (key, e) in &t.vars {
                let slot = parse_slot_key(key)?;
                if *e == 0 {
                    return Err(ExactError::BadRepr(format!("zero exponent for slot {key}")));
                }
                if m.exp_of(slot) != 0 {
                    return Err(ExactError::BadRepr(format!("duplicate slot {key}")));
                }
                m.set_exp(slot, *e);
            }
            let coeff = Rational::from_str(&t.coeff)
                .map_err(|e| ExactError::BadRepr(format!("bad coefficient {:?}: {e}", t.coeff)))?;
            if coeff.is_zero() {
                return Err(ExactError::BadRepr("zero coefficient term".into()));
            }
            if !out.coeff(&m).is_zero() {
                return Err(ExactError::BadRepr(format!("duplicate monomial {m}")));
            }
            out.add_term(m, coeff);
        }
        Ok(out)
    }
}

fn slot_key(s: Slot) -> String {
    match s {
        Slot::B(i) => i.to_string(),
        Slot::X => "x".into(),
        Slot::Y => "y".into(),
    }
}

fn parse_slot_key(key: &str) -> Result<Slot, ExactError> {
    match key {
        "x" => Ok(Slot::X),
        "y" => Ok(Slot::Y),
        _ => key
            .parse::<u32>()
            .ok()
            .filter(|i| *i >= 1)
            .map(Slot::B)
            .ok_or_else(|| ExactError::BadRepr(format!("bad slot key {key:?}"))),
    }
}

impl fmt::Display for GradedPoly {
    /// Plain-text rendering: terms sorted by decreasing π power, then by
    /// monomial order; e.g. `2*pi^2 + 1/2*b1^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|(a, _), (b, _)| {
            b.pi2_exp().cmp(&a.pi2_exp()).then_with(|| a.cmp(b))
        });
        for (idx, (m, c)) in items.into_iter().enumerate() {
            let mag = c.abs();
            if idx == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if *m == Monomial::one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl std::ops::Neg for &GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        GradedPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

/// Serialized form of one polynomial term: exponent of π², map from slot key
/// ("1", "2", …, or "x"/"y" for auxiliary variables) to squared-variable
/// exponent, and the coefficient as a fraction string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRepr {
    pub pi2: u32,
    #[serde(default)]
    pub vars: BTreeMap<String, u32>,
    pub coeff: String,
}

/// Serialized volume polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeRepr {
    pub g: u32,
    pub n: u32,
    pub terms: Vec<TermRepr>,
}

/// Errors constructing a [`VolumePoly`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VolumeError {
    #[error("unstable signature (g,n) = ({0},{1})")]
    Unstable(u32, u32),
    #[error("slot {0} out of range for n = {1} boundary components")]
    BadSlot(String, u32),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Which volume-polynomial invariant a check found violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantKind {
    Homogeneity,
    Positivity,
    Symmetry,
}

/// A violated invariant together with an offending term or permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantViolation {
    pub kind: InvariantKind,
    pub detail: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

/// A Weil-Petersson volume polynomial V_{g,n}(b₁,…,bₙ): a [`GradedPoly`]
/// over the numbered slots 1..=n tagged with its surface signature.
///
/// The associated invariants — homogeneity of weight 3g−3+n, strictly
/// positive coefficients, and full symmetry in the n slots — are *checked*,
/// not enforced at construction, so that deliberately broken values can be
/// exercised in tests; see [`VolumePoly::check_invariants`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumePoly {
    g: u32,
    n: u32,
    poly: GradedPoly,
}

impl VolumePoly {
    /// Wrap a polynomial as V_{g,n}. Requires a stable signature
    /// (2g−2+n > 0) and slots within 1..=n.
    pub fn new(g: u32, n: u32, poly: GradedPoly) -> Result<Self, VolumeError> {
        if n == 0 || 2 * g + n <= 2 {
            return Err(VolumeError::Unstable(g, n));
        }
        for m in poly.terms.keys() {
            for s in m.slots() {
                match s.index() {
                    Some(i) if 1 <= i && i <= n => {}
                    _ => return Err(VolumeError::BadSlot(s.to_string(), n)),
                }
            }
        }
        Ok(VolumePoly { g, n, poly })
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn poly(&self) -> &GradedPoly {
        &self.poly
    }

    /// Complex dimension 3g−3+n of the underlying moduli space; every
    /// monomial must have exactly this weight.
    pub fn dimension(&self) -> u32 {
        3 * self.g + self.n - 3
    }

    /// Verify homogeneity, strict positivity, and slot-permutation symmetry.
    /// For n ≤ 8 all n! permutations are tried; beyond that the
    /// transpositions (1 i), which generate the symmetric group, suffice.
    /// Returns one violation per failed invariant (empty means pass).
    pub fn check_invariants(&self) -> Vec<InvariantViolation> {
        let mut out = Vec::new();
        self.check_homogeneity(&mut out);
        self.check_positivity(&mut out);
        let perms: Vec<Vec<u32>> = if self.n <= 8 {
            all_permutations(self.n)
        } else {
            transpositions_with_first(self.n)
        };
        self.check_symmetry(&perms, &mut out);
        out
    }

    /// Cheaper engine-side validation run after every fresh computation:
    /// homogeneity, positivity, and symmetry under the generating
    /// transpositions (1 i) only.
    pub fn check_invariants_quick(&self) -> Vec<InvariantViolation> {
        let mut out = Vec::new();
        self.check_homogeneity(&mut out);
        self.check_positivity(&mut out);
        self.check_symmetry(&transpositions_with_first(self.n), &mut out);
        out
    }

    fn check_homogeneity(&self, out: &mut Vec<InvariantViolation>) {
        let want = self.dimension();
        if let Some(m) = self.poly.terms.keys().find(|m| m.weight() != want) {
            out.push(InvariantViolation {
                kind: InvariantKind::Homogeneity,
                detail: format!("term {m} has weight {}, expected {want}", m.weight()),
            });
        }
    }

    fn check_positivity(&self, out: &mut Vec<InvariantViolation>) {
        if let Some((m, c)) = self.poly.terms.iter().find(|(_, c)| !c.is_positive()) {
            out.push(InvariantViolation {
                kind: InvariantKind::Positivity,
                detail: format!("term {m} has non-positive coefficient {c}"),
            });
        }
        if self.poly.is_zero() {
            out.push(InvariantViolation {
                kind: InvariantKind::Positivity,
                detail: "volume polynomial is identically zero".into(),
            });
        }
    }

    /// `perms[p]` lists the image of slot i at position i−1.
    fn check_symmetry(&self, perms: &[Vec<u32>], out: &mut Vec<InvariantViolation>) {
        for perm in perms {
            if perm.iter().enumerate().all(|(i, v)| *v == i as u32 + 1) {
                continue;
            }
            for (m, c) in &self.poly.terms {
                let image = m.map_slots(|s| match s {
                    Slot::B(i) => Slot::B(perm[(i - 1) as usize]),
                    other => other,
                });
                if self.poly.coeff(&image) != *c {
                    out.push(InvariantViolation {
                        kind: InvariantKind::Symmetry,
                        detail: format!(
                            "term {m} (coefficient {c}) breaks symmetry under slot map {perm:?}"
                        ),
                    });
                    return;
                }
            }
        }
    }

    pub fn to_repr(&self) -> VolumeRepr {
        VolumeRepr {
            g: self.g,
            n: self.n,
            terms: self.poly.to_term_reprs(),
        }
    }

    /// Rebuild from the serialized form (structural checks only; callers that
    /// load untrusted data should also run [`VolumePoly::check_invariants`]).
    pub fn from_repr(repr: &VolumeRepr) -> Result<Self, VolumeError> {
        let poly = GradedPoly::from_term_reprs(&repr.terms)?;
        VolumePoly::new(repr.g, repr.n, poly)
    }
}

impl fmt::Display for VolumePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

/// All permutations of (1..=n) in a deterministic order.
pub fn all_permutations(n: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, rest: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (1..=n).collect(), &mut out);
    out
}

/// The transpositions (1 i) for i = 2..=n, as full permutation vectors.
/// Together with the identity they generate the symmetric group.
pub fn transpositions_with_first(n: u32) -> Vec<Vec<u32>> {
    (2..=n)
        .map(|i| {
            (1..=n)
                .map(|j| if j == 1 { i } else if j == i { 1 } else { j })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(i: u32) -> Slot {
        Slot::B(i)
    }

    /// Termwise ∂(2b·)/∂b on an even polynomial: c·b^{2m} ↦ 2c(2m+1)·b^{2m}.
    /// Test-only inverse of halve_integrate.
    fn derivative_of_doubled(p: &GradedPoly, slot: Slot) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (m, c) in p.terms() {
            let e = m.exp_of(slot);
            out.add_term(m.clone(), c * rat(2 * (2 * e as i64 + 1)));
        }
        out
    }

    fn v11() -> GradedPoly {
        // π²/12 + b₁²/48
        let mut p = GradedPoly::zero();
        p.add_term(Monomial::pi2(1), ratio(1, 12));
        p.add_term(Monomial::var(b(1), 1), ratio(1, 48));
        p
    }

    #[test]
    fn add_cancels_and_merges() {
        let pi2 = GradedPoly::monomial(Monomial::pi2(1), rat(1));
        assert!((&pi2 + &-&pi2).is_zero());

        let half_b1 = GradedPoly::monomial(Monomial::var(b(1), 1), ratio(1, 2));
        let sum = &half_b1 + &half_b1;
        assert_eq!(sum, GradedPoly::monomial(Monomial::var(b(1), 1), rat(1)));

        let two_terms = &GradedPoly::monomial(Monomial::pi2(1), ratio(1, 12))
            + &GradedPoly::monomial(Monomial::var(b(1), 1), ratio(1, 48));
        assert_eq!(two_terms, v11());
        assert_eq!(two_terms.num_terms(), 2);
    }

    #[test]
    fn mul_examples() {
        let p = v11();
        assert_eq!(&p * &GradedPoly::one(), p);

        let b1 = GradedPoly::monomial(Monomial::var(b(1), 1), rat(1));
        let b2 = GradedPoly::monomial(Monomial::var(b(2), 1), rat(1));
        let prod = &b1 * &b2;
        assert_eq!(
            prod,
            GradedPoly::monomial(Monomial::var(b(1), 1).times_var(b(2), 1), rat(1))
        );

        // V_{1,1}(x)·V_{1,1}(y): the x²y² coefficient is 1/48·1/48 = 1/2304.
        let vx = v11().relabel(&[(b(1), Slot::X)].into()).unwrap();
        let vy = v11().relabel(&[(b(1), Slot::Y)].into()).unwrap();
        let prod = &vx * &vy;
        let xy = Monomial::var(Slot::X, 1).times_var(Slot::Y, 1);
        assert_eq!(prod.coeff(&xy), ratio(1, 2304));
    }

    #[test]
    fn relabel_examples() {
        let b1sq = GradedPoly::monomial(Monomial::var(b(1), 1), rat(1));
        let renamed = b1sq.relabel(&[(b(1), b(2))].into()).unwrap();
        assert_eq!(renamed, GradedPoly::monomial(Monomial::var(b(2), 1), rat(1)));

        // A constant needs no slot images.
        let pi2 = GradedPoly::monomial(Monomial::pi2(1), rat(1));
        assert_eq!(pi2.relabel(&BTreeMap::new()).unwrap(), pi2);

        // Missing image is an error.
        let err = b1sq.relabel(&BTreeMap::new()).unwrap_err();
        assert_eq!(err, ExactError::IncompleteRelabel("b1".into()));

        // Non-injective maps are rejected by relabel but allowed by
        // substitute_slots, which identifies the variables.
        let p = &b1sq + &GradedPoly::monomial(Monomial::var(b(2), 1), rat(1));
        let map: BTreeMap<_, _> = [(b(1), Slot::X), (b(2), Slot::X)].into();
        assert!(matches!(
            p.relabel(&map),
            Err(ExactError::NonInjectiveRelabel(_))
        ));
        let fused = p.substitute_slots(&map).unwrap();
        assert_eq!(fused, GradedPoly::monomial(Monomial::var(Slot::X, 1), rat(2)));
    }

    #[test]
    fn halve_integrate_examples() {
        assert_eq!(
            GradedPoly::one().halve_integrate(b(1)),
            GradedPoly::constant(ratio(1, 2))
        );

        // 3b₁² + b₂² + b₃² + b₄² + 4π² ↦ ½(b₁²+b₂²+b₃²+b₄²) + 2π²
        let mut p = GradedPoly::zero();
        p.add_term(Monomial::var(b(1), 1), rat(3));
        for i in 2..=4 {
            p.add_term(Monomial::var(b(i), 1), rat(1));
        }
        p.add_term(Monomial::pi2(1), rat(4));
        let v = p.halve_integrate(b(1));
        let mut want = GradedPoly::zero();
        for i in 1..=4 {
            want.add_term(Monomial::var(b(i), 1), ratio(1, 2));
        }
        want.add_term(Monomial::pi2(1), rat(2));
        assert_eq!(v, want);

        let quartic = GradedPoly::monomial(Monomial::var(b(1), 2), rat(1));
        assert_eq!(
            quartic.halve_integrate(b(1)),
            GradedPoly::monomial(Monomial::var(b(1), 2), ratio(1, 10))
        );
    }

    #[test]
    fn evaluate_examples() {
        // V_{1,1} at b=0 is π²/12 ≈ 0.822467.
        let v = v11().evaluate_f64(&[(b(1), rat(0))].into(), 30);
        assert!((v - std::f64::consts::PI.powi(2) / 12.0).abs() < 1e-12);

        assert_eq!(
            GradedPoly::one().evaluate(&BTreeMap::new(), 10).unwrap(),
            rat(1)
        );

        // V_{0,4} at b⃗ = (1,1,1,1): 2π² + 2 ≈ 21.7392.
        let mut v04 = GradedPoly::zero();
        v04.add_term(Monomial::pi2(1), rat(2));
        for i in 1..=4 {
            v04.add_term(Monomial::var(b(i), 1), ratio(1, 2));
        }
        let values: BTreeMap<_, _> = (1..=4).map(|i| (b(i), rat(1))).collect();
        let got = v04.evaluate_f64(&values, 30);
        assert!((got - (2.0 * std::f64::consts::PI.powi(2) + 2.0)).abs() < 1e-12);

        // Missing value is an error.
        assert!(matches!(
            v11().evaluate(&BTreeMap::new(), 10),
            Err(ExactError::MissingValue(_))
        ));
    }

    #[test]
    fn pi_rational_precision() {
        let p30 = pi_rational(30);
        assert!((p30.to_f64().unwrap() - std::f64::consts::PI).abs() < 1e-15);
        let p40 = pi_rational(40);
        let p60 = pi_rational(60);
        let diff = (&p40 - &p60).abs();
        let bound = Rational::new(BigInt::one(), BigInt::from(10u32).pow(39u32));
        assert!(diff < bound);
    }

    #[test]
    fn factorial_and_binomial() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(7), BigInt::from(5040));
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 0), BigInt::one());
        assert_eq!(binomial(5, 7), BigInt::zero());
        assert_eq!(binomial(5, -1), BigInt::zero());
    }

    #[test]
    fn volume_invariants_pass_for_base_cases() {
        let v03 = VolumePoly::new(0, 3, GradedPoly::one()).unwrap();
        assert_eq!(v03.dimension(), 0);
        assert!(v03.check_invariants().is_empty());

        let v11 = VolumePoly::new(1, 1, v11()).unwrap();
        assert!(v11.check_invariants().is_empty());
    }

    #[test]
    fn volume_invariants_catch_violations() {
        // Negated term fails positivity.
        let mut p = v11();
        p.add_term(Monomial::var(b(1), 1), ratio(-1, 24)); // 1/48 - 1/24 < 0
        let bad = VolumePoly::new(1, 1, p).unwrap();
        assert!(bad
            .check_invariants()
            .iter()
            .any(|v| v.kind == InvariantKind::Positivity));

        // Asymmetric polynomial fails symmetry.
        let mut p = GradedPoly::zero();
        p.add_term(Monomial::var(b(1), 1), rat(1));
        p.add_term(Monomial::pi2(1), rat(1));
        let bad = VolumePoly::new(0, 4, p).unwrap();
        assert!(bad
            .check_invariants()
            .iter()
            .any(|v| v.kind == InvariantKind::Symmetry));

        // Wrong weight fails homogeneity.
        let p = GradedPoly::monomial(Monomial::pi2(3), rat(1));
        let bad = VolumePoly::new(0, 4, p).unwrap();
        assert!(bad
            .check_invariants()
            .iter()
            .any(|v| v.kind == InvariantKind::Homogeneity));

        // Unstable signatures are rejected outright.
        assert!(matches!(
            VolumePoly::new(0, 2, GradedPoly::one()),
            Err(VolumeError::Unstable(0, 2))
        ));
        assert!(matches!(
            VolumePoly::new(1, 1, GradedPoly::monomial(Monomial::var(b(3), 1), rat(1))),
            Err(VolumeError::BadSlot(..))
        ));
    }

    #[test]
    fn serialization_roundtrip_and_schema() {
        let v = VolumePoly::new(1, 1, v11()).unwrap();
        let repr = v.to_repr();
        let json = serde_json::to_string(&repr).unwrap();
        assert_eq!(
            json,
            r#"{"g":1,"n":1,"terms":[{"pi2":0,"vars":{"1":1},"coeff":"1/48"},{"pi2":1,"vars":{},"coeff":"1/12"}]}"#
        );
        let back = VolumePoly::from_repr(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, v);

        // Corrupt inputs are rejected.
        for bad in [
            r#"{"g":1,"n":1,"terms":[{"pi2":0,"vars":{"1":1},"coeff":"0"}]}"#,
            r#"{"g":1,"n":1,"terms":[{"pi2":0,"vars":{"1":0},"coeff":"1"}]}"#,
            r#"{"g":1,"n":1,"terms":[{"pi2":0,"vars":{"7":1},"coeff":"1"}]}"#,
            r#"{"g":1,"n":1,"terms":[{"pi2":0,"vars":{"zzz":1},"coeff":"1"}]}"#,
        ] {
            let repr: VolumeRepr = serde_json::from_str(bad).unwrap();
            assert!(VolumePoly::from_repr(&repr).is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(v11().to_string(), "1/12*pi^2 + 1/48*b1^2");
        assert_eq!(GradedPoly::zero().to_string(), "0");
        assert_eq!(GradedPoly::one().to_string(), "1");
        let neg = -&v11();
        assert_eq!(neg.to_string(), "-1/12*pi^2 - 1/48*b1^2");
    }

    // Random small polynomials over slots b1..b3 with π-power ≤ 2.
    fn arb_poly() -> impl Strategy<Value = GradedPoly> {
        proptest::collection::vec(
            (0u32..3, 0u32..3, 0u32..3, 0u32..2, -9i64..10),
            0..6,
        )
        .prop_map(|terms| {
            let mut p = GradedPoly::zero();
            for (e1, e2, e3, k, c) in terms {
                let m = Monomial::pi2(k)
                    .times_var(Slot::B(1), e1)
                    .times_var(Slot::B(2), e2)
                    .times_var(Slot::B(3), e3);
                p.add_term(m, rat(c));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
            prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
            prop_assert_eq!(&p + &GradedPoly::zero(), p.clone());
            prop_assert_eq!(&p * &GradedPoly::one(), p.clone());
            prop_assert!((&p - &p).is_zero());
        }

        #[test]
        fn relabel_is_a_group_action(p in arb_poly()) {
            // σ = (1 2 3) cycle, τ = (1 2) transposition, as slot maps.
            let sigma: BTreeMap<_, _> =
                [(Slot::B(1), Slot::B(2)), (Slot::B(2), Slot::B(3)), (Slot::B(3), Slot::B(1))].into();
            let tau: BTreeMap<_, _> =
                [(Slot::B(1), Slot::B(2)), (Slot::B(2), Slot::B(1)), (Slot::B(3), Slot::B(3))].into();
            let composed: BTreeMap<_, _> =
                sigma.iter().map(|(s, t)| (*s, tau[t])).collect();
            let step = p.relabel(&sigma).unwrap().relabel(&tau).unwrap();
            let direct = p.relabel(&composed).unwrap();
            prop_assert_eq!(step, direct);
        }

        #[test]
        fn halve_integrate_inverts_doubled_derivative(p in arb_poly()) {
            let slot = Slot::B(1);
            let roundtrip = derivative_of_doubled(&p.halve_integrate(slot), slot);
            prop_assert_eq!(roundtrip, p);
        }

        #[test]
        fn evaluate_is_a_ring_homomorphism(p in arb_poly(), q in arb_poly()) {
            // With a fixed rational π approximant, evaluation is exactly
            // multiplicative — not just up to tolerance.
            let values: BTreeMap<_, _> =
                [(Slot::B(1), ratio(1, 2)), (Slot::B(2), rat(2)), (Slot::B(3), ratio(3, 7))].into();
            let lhs = (&p * &q).evaluate(&values, 20).unwrap();
            let rhs = p.evaluate(&values, 20).unwrap() * q.evaluate(&values, 20).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn serialization_roundtrips(p in arb_poly()) {
            let reprs = p.to_term_reprs();
            let back = GradedPoly::from_term_reprs(&reprs).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
