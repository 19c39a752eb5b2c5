//! Growth constants for simple closed geodesics.
//!
//! For a topological type γ of simple closed curve on a surface of
//! signature (g,n), the number of mapping-class-group translates of γ of
//! hyperbolic length ≤ L grows like c(γ)·L^{6g−6+2n}. The leading constant
//! is obtained by integrating the Weil–Petersson volume of the level set
//! {ℓ_γ = x}: cutting along γ either drops the genus by one and adds two
//! boundary circles (non-separating), or splits the surface into two
//! stable pieces that share the curve as a boundary (separating). In both
//! cases the level-set volume is a polynomial x·p(x,b) with p even, and
//! the count polynomial is P(L) = ∫₀^L x·p(x,b) dx.
//!
//! Values here are the raw leading constants of P; the normalizations by
//! symmetry factors and by the total volume are left to the caller, and
//! the `symmetric` flag records when the two separated pieces are
//! interchangeable.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use crate::exactalg::{rat, GradedPoly, Monomial, Slot};
use crate::recursion::{RecursionCache, RecursionError};

/// Errors from curve-class validation or the volume engine.
#[derive(Debug, thiserror::Error)]
pub enum GrowthError {
    #[error("ambient signature ({0},{1}) must satisfy 2g-2+n > 0")]
    InvalidAmbient(u32, u32),
    #[error("a non-separating curve needs ambient genus >= 1")]
    NeedsGenus,
    #[error("invalid separating description: {0}")]
    BadSplit(String),
    #[error(transparent)]
    Recursion(#[from] RecursionError),
}

/// Topological type of a simple closed curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveKind {
    /// Cutting leaves one connected surface of genus g−1 with two new
    /// boundary circles.
    NonSeparating,
    /// Cutting splits off a piece of genus `g1` carrying the ambient
    /// boundary labels in `set1`; the complementary piece is implied.
    Separating { g1: u32, set1: BTreeSet<u32> },
}

/// A simple closed curve class on an ambient surface of signature (g,n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveClass {
    g: u32,
    n: u32,
    kind: CurveKind,
}

impl CurveClass {
    /// Non-separating class on a surface of signature (g,n); needs g ≥ 1.
    pub fn non_separating(g: u32, n: u32) -> Result<Self, GrowthError> {
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(GrowthError::InvalidAmbient(g, n));
        }
        if g == 0 {
            return Err(GrowthError::NeedsGenus);
        }
        Ok(CurveClass { g, n, kind: CurveKind::NonSeparating })
    }

    /// Separating class splitting (g,n) into (g1, set1 + curve) and its
    /// complement; both pieces must be stable once the curve is attached.
    pub fn separating(
        g: u32,
        n: u32,
        g1: u32,
        set1: BTreeSet<u32>,
    ) -> Result<Self, GrowthError> {
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(GrowthError::InvalidAmbient(g, n));
        }
        if g1 > g {
            return Err(GrowthError::BadSplit(format!(
                "piece genus {g1} exceeds ambient genus {g}"
            )));
        }
        if let Some(bad) = set1.iter().find(|&&i| i < 1 || i > n) {
            return Err(GrowthError::BadSplit(format!(
                "boundary label {bad} outside 1..={n}"
            )));
        }
        let (k1, k2) = (set1.len() as u32, n - set1.len() as u32);
        let g2 = g - g1;
        if 2 * g1 + k1 < 2 {
            return Err(GrowthError::BadSplit(format!(
                "piece (g={g1}, boundaries={}) is unstable",
                k1 + 1
            )));
        }
        if 2 * g2 + k2 < 2 {
            return Err(GrowthError::BadSplit(format!(
                "complementary piece (g={g2}, boundaries={}) is unstable",
                k2 + 1
            )));
        }
        Ok(CurveClass { g, n, kind: CurveKind::Separating { g1, set1 } })
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    fn dimension(&self) -> u32 {
        3 * self.g + self.n - 3
    }

    /// Whether the cut pieces are interchangeable (the class has an extra
    /// factor-2 symmetry): always for non-separating curves, and for
    /// separating curves exactly when the two pieces have equal signature,
    /// which with distinct boundary labels requires n = 0 and g1 = g2.
    pub fn symmetric(&self) -> bool {
        match &self.kind {
            CurveKind::NonSeparating => true,
            CurveKind::Separating { g1, set1 } => {
                self.n == 0 && set1.is_empty() && 2 * g1 == self.g
            }
        }
    }
}

/// Growth data for one curve class.
#[derive(Debug, Clone)]
pub struct GrowthResult {
    /// Even part p(x, b) of the level-set volume x·p.
    pub level_poly: GradedPoly,
    /// Count polynomial P(L) = ∫₀^L x·p(x, b) dx, expressed in the slot x.
    pub count_poly: GradedPoly,
    /// Degree 6g−6+2n of the count polynomial in L.
    pub exponent: u32,
    /// Leading coefficient of the pure-L part of P.
    pub c_gamma: GradedPoly,
    /// Whether the cut pieces are interchangeable.
    pub symmetric: bool,
}

/// Even part p(x,b) of the volume of the level set {ℓ_γ = x}: the volume
/// polynomial of the cut surface with the curve's two boundary slots set
/// to x (fused for a non-separating cut, one per piece for a separating
/// one) and the surviving ambient labels kept.
pub fn level_set_volume(
    class: &CurveClass,
    cache: &RecursionCache,
) -> Result<GradedPoly, GrowthError> {
    let (g, n) = (class.g, class.n);
    match &class.kind {
        CurveKind::NonSeparating => {
            let vol = cache.volume(g - 1, n + 2)?;
            let mut map = BTreeMap::new();
            map.insert(Slot::B(1), Slot::X);
            map.insert(Slot::B(2), Slot::X);
            for j in 3..=n + 2 {
                map.insert(Slot::B(j), Slot::B(j - 2));
            }
            Ok(vol.poly().substitute_slots(&map).map_err(RecursionError::from)?)
        }
        CurveKind::Separating { g1, set1 } => {
            let set2: BTreeSet<u32> = (1..=n).filter(|i| !set1.contains(i)).collect();
            let mut product = GradedPoly::one();
            for (gk, setk) in [(*g1, set1), (g - g1, &set2)] {
                let vol = cache.volume(gk, setk.len() as u32 + 1)?;
                let mut map = BTreeMap::new();
                map.insert(Slot::B(1), Slot::X);
                for (idx, label) in setk.iter().enumerate() {
                    map.insert(Slot::B(idx as u32 + 2), Slot::B(*label));
                }
                let piece = vol.poly().relabel(&map).map_err(RecursionError::from)?;
                product = &product * &piece;
            }
            Ok(product)
        }
    }
}

/// Leading growth constant c(γ): the coefficient of the pure L^{6g−6+2n}
/// term of the count polynomial.
pub fn c_gamma(class: &CurveClass, cache: &RecursionCache) -> Result<GradedPoly, GrowthError> {
    Ok(growth(class, cache)?.c_gamma)
}

/// Full growth data: level-set volume, count polynomial, degree, leading
/// constant, and the piece-interchange symmetry flag.
pub fn growth(class: &CurveClass, cache: &RecursionCache) -> Result<GrowthResult, GrowthError> {
    let level_poly = level_set_volume(class, cache)?;
    let mut count_poly = GradedPoly::zero();
    for (m, c) in level_poly.terms() {
        let (e, rest) = m.split_slot(Slot::X);
        count_poly.add_term(rest.times_var(Slot::X, e + 1), c / rat(2 * e as i64 + 2));
    }
    let dim = class.dimension();
    let lead = count_poly.coeff(&Monomial::var(Slot::X, dim));
    debug_assert!(!lead.is_zero());
    Ok(GrowthResult {
        level_poly,
        count_poly,
        exponent: 2 * dim,
        c_gamma: GradedPoly::constant(lead),
        symmetric: class.symmetric(),
    })
}
