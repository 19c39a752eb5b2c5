//! The boundary-length recursion that generates volume polynomials.
//!
//! For a stable surface signature (g, n) beyond the two seeds
//! V_{0,3} = 1 and V_{1,1} = π²/12 + b₁²/48, the derivative
//! ∂[2b₁·V_{g,n}]/∂b₁ is assembled from three families of contributions,
//! each an exact polynomial built from lower-complexity volumes and the
//! kernel moments of [`crate::kernel`]:
//!
//! * one **pair term** per other boundary i ([`RecursionCache::a_term`]):
//!   the cuff variable of V_{g,n−1} integrated against the kernel shifted by
//!   b_i, via [`even_shift_expand`];
//! * one **handle term** ([`RecursionCache::b_term`]): the two cuff
//!   variables of V_{g−1,n+1} collapsed by [`double_reduce`] into a single
//!   moment polynomial in b₁;
//! * one **splitting term** per ordered stable splitting
//!   ([`RecursionCache::c_term`]): the same double-moment collapse applied
//!   to a product of two smaller volumes.
//!
//! [`GradedPoly::halve_integrate`] then recovers V_{g,n} itself. Every
//! freshly computed polynomial is validated (homogeneity, positivity,
//! generator symmetry) before it is cached.
//!
//! [`RecursionCache`] memoizes volumes per signature behind an RwLock, so a
//! single cache can serve concurrent lookups; it also counts fresh
//! computations (for cache-effectiveness reporting) and round-trips to a
//! versioned JSON file with atomic replacement on save.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::exactalg::{
    ratio, ExactError, GradedPoly, Monomial, Rational, Slot, VolumeError, VolumePoly, VolumeRepr,
};
use crate::kernel::{double_reduce, even_shift_expand, f_poly};

/// Cache file schema version this build reads and writes.
pub const CACHE_FORMAT_VERSION: u32 = 1;

/// Errors from the volume recursion.
#[derive(Debug, thiserror::Error)]
pub enum RecursionError {
    #[error("signature (g,n) = ({0},{1}) is not stable")]
    Unstable(u32, u32),
    #[error("(g,n) = ({0},{1}) is a seed volume; the recursion does not apply")]
    BaseCase(u32, u32),
    #[error("boundary index {index} out of range 2..={n}")]
    InvalidBoundary { index: u32, n: u32 },
    #[error("expected {expected} boundary lengths, got {got}")]
    WrongLengthCount { expected: u32, got: usize },
    #[error("internal engine error: {0}")]
    Internal(String),
}

impl From<ExactError> for RecursionError {
    fn from(e: ExactError) -> Self {
        RecursionError::Internal(e.to_string())
    }
}

impl From<VolumeError> for RecursionError {
    fn from(e: VolumeError) -> Self {
        RecursionError::Internal(e.to_string())
    }
}

/// Errors loading or saving a volume cache file.
#[derive(Debug, thiserror::Error)]
pub enum CacheIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cache file is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cache file has format version {0}, expected {CACHE_FORMAT_VERSION}")]
    BadVersion(u32),
    #[error("bad cache entry {key}: {detail}")]
    BadEntry { key: String, detail: String },
    #[error("cache entry {key} fails volume invariants: {detail}")]
    Invariant { key: String, detail: String },
}

/// Is (g, n) a stable surface signature (2g − 2 + n > 0 with n ≥ 1)?
pub fn is_stable(g: u32, n: u32) -> bool {
    n >= 1 && 2 * g + n > 2
}

fn is_base_case(g: u32, n: u32) -> bool {
    (g, n) == (0, 3) || (g, n) == (1, 1)
}

/// One ordered splitting of (g, {2..n}) into two stable pieces. The first
/// piece takes genus `g1` and the marked boundaries `set1` (a sorted subset
/// of 2..=n), the second the rest; both satisfy 2gₖ + |setₖ| ≥ 2. Ordered
/// means a pair of distinct pieces occurs in both orders; the symmetric
/// splitting (same genus, both sets empty) occurs once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableSplitting {
    pub g1: u32,
    pub set1: Vec<u32>,
    pub g2: u32,
    pub set2: Vec<u32>,
}

/// All ordered stable splittings for the (g, n) recursion step, sorted by
/// (g1, set1).
pub fn stable_splittings(g: u32, n: u32) -> Vec<StableSplitting> {
    let marks: Vec<u32> = (2..=n).collect();
    let m = marks.len() as u32;
    let mut out = Vec::new();
    for g1 in 0..=g {
        let g2 = g - g1;
        for mask in 0u64..(1u64 << m) {
            let set1: Vec<u32> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| marks[b as usize]).collect();
            let set2: Vec<u32> = (0..m).filter(|b| mask >> b & 1 == 0).map(|b| marks[b as usize]).collect();
            if 2 * g1 + set1.len() as u32 >= 2 && 2 * g2 + set2.len() as u32 >= 2 {
                out.push(StableSplitting { g1, set1, g2, set2 });
            }
        }
    }
    out.sort_by(|a, b| (a.g1, &a.set1).cmp(&(b.g1, &b.set1)));
    out
}

/// Memoizing volume store: computes polynomials on demand, shares them as
/// [`Arc`]s, counts fresh computations, and persists to JSON.
#[derive(Debug, Default)]
pub struct RecursionCache {
    volumes: RwLock<HashMap<(u32, u32), Arc<VolumePoly>>>,
    computed: AtomicU64,
}

#[derive(Serialize, Deserialize)]
struct CacheRepr {
    format_version: u32,
    volumes: BTreeMap<String, VolumeRepr>,
}

impl RecursionCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of volume polynomials computed fresh (rather than served from
    /// pre-loaded entries) over this cache's lifetime.
    pub fn computed_count(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    /// Number of signatures currently stored.
    pub fn entry_count(&self) -> usize {
        self.volumes.read().expect("cache lock poisoned").len()
    }

    /// Stored signatures, sorted.
    pub fn signatures(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<_> = self
            .volumes
            .read()
            .expect("cache lock poisoned")
            .keys()
            .copied()
            .collect();
        v.sort_unstable();
        v
    }

    fn lookup(&self, g: u32, n: u32) -> Option<Arc<VolumePoly>> {
        self.volumes
            .read()
            .expect("cache lock poisoned")
            .get(&(g, n))
            .cloned()
    }

    fn store(&self, g: u32, n: u32, v: VolumePoly) -> Arc<VolumePoly> {
        let mut w = self.volumes.write().expect("cache lock poisoned");
        // A concurrent computation may have won the race; results are
        // deterministic, so keep whichever is present.
        w.entry((g, n)).or_insert_with(|| Arc::new(v)).clone()
    }

    /// The volume polynomial V_{g,n}, computed (and memoized) on demand.
    pub fn volume(&self, g: u32, n: u32) -> Result<Arc<VolumePoly>, RecursionError> {
        if !is_stable(g, n) {
            return Err(RecursionError::Unstable(g, n));
        }
        if let Some(v) = self.lookup(g, n) {
            return Ok(v);
        }
        let poly = if (g, n) == (0, 3) {
            GradedPoly::one()
        } else if (g, n) == (1, 1) {
            let mut p = GradedPoly::zero();
            p.add_term(Monomial::pi2(1), ratio(1, 12));
            p.add_term(Monomial::var(Slot::B(1), 1), ratio(1, 48));
            p
        } else {
            self.boundary_derivative(g, n)?.halve_integrate(Slot::B(1))
        };
        let vol = VolumePoly::new(g, n, poly)?;
        let violations = vol.check_invariants_quick();
        if let Some(v) = violations.first() {
            return Err(RecursionError::Internal(format!(
                "computed V_{{{g},{n}}} fails invariants: {v}"
            )));
        }
        self.computed.fetch_add(1, Ordering::Relaxed);
        Ok(self.store(g, n, vol))
    }

    /// Exact evaluation V_{g,n}(lengths) with π substituted to `pi_digits`
    /// decimal digits; `lengths` must supply all n boundary lengths.
    pub fn volume_at(
        &self,
        g: u32,
        n: u32,
        lengths: &[Rational],
        pi_digits: u32,
    ) -> Result<Rational, RecursionError> {
        if lengths.len() != n as usize {
            return Err(RecursionError::WrongLengthCount { expected: n, got: lengths.len() });
        }
        let vol = self.volume(g, n)?;
        let values: BTreeMap<Slot, Rational> = lengths
            .iter()
            .enumerate()
            .map(|(i, l)| (Slot::B(i as u32 + 1), l.clone()))
            .collect();
        Ok(vol.poly().evaluate(&values, pi_digits)?)
    }

    /// The assembled derivative ∂[2b₁·V_{g,n}]/∂b₁ (pair + handle +
    /// splitting terms). Errors on seed signatures, where the assembly does
    /// not apply.
    pub fn boundary_derivative(&self, g: u32, n: u32) -> Result<GradedPoly, RecursionError> {
        if !is_stable(g, n) {
            return Err(RecursionError::Unstable(g, n));
        }
        if is_base_case(g, n) {
            return Err(RecursionError::BaseCase(g, n));
        }
        let mut p = GradedPoly::zero();
        for i in 2..=n {
            p = &p + &self.a_term(g, n, i)?;
        }
        p = &p + &self.b_term(g, n)?;
        for s in stable_splittings(g, n) {
            p = &p + &self.c_term(g, n, &s)?;
        }
        Ok(p)
    }

    /// Pair term for boundary i ∈ 2..=n: each cuff monomial c·x^{2m}·M of
    /// V_{g,n−1}(x, b_{2..n}∖b_i) contributes c·M·even_shift_expand(m, 1, i).
    pub fn a_term(&self, g: u32, n: u32, i: u32) -> Result<GradedPoly, RecursionError> {
        if i < 2 || i > n {
            return Err(RecursionError::InvalidBoundary { index: i, n });
        }
        let child = self.volume(g, n - 1)?;
        // Slot 1 of the child becomes the cuff x; its remaining slots take
        // the surviving boundary labels {2..n} \ {i} in increasing order.
        let mut map: BTreeMap<Slot, Slot> = BTreeMap::new();
        map.insert(Slot::B(1), Slot::X);
        for (k, label) in (2..=n).filter(|j| *j != i).enumerate() {
            map.insert(Slot::B(k as u32 + 2), Slot::B(label));
        }
        let relabeled = child.poly().relabel(&map)?;
        let mut out = GradedPoly::zero();
        for (m, c) in relabeled.terms() {
            let (cuff_exp, rest) = m.split_slot(Slot::X);
            let expansion = even_shift_expand(cuff_exp, Slot::B(1), Slot::B(i));
            out = &out + &expansion.mul_monomial(&rest).scale(c);
        }
        Ok(out)
    }

    /// Handle term: the double cuff moment of V_{g−1,n+1}(x, y, b_{2..n}).
    /// Zero when g = 0 or the child signature is unstable (only (1,1)).
    pub fn b_term(&self, g: u32, n: u32) -> Result<GradedPoly, RecursionError> {
        if g == 0 || !is_stable(g - 1, n + 1) {
            return Ok(GradedPoly::zero());
        }
        let child = self.volume(g - 1, n + 1)?;
        let mut map: BTreeMap<Slot, Slot> = BTreeMap::new();
        map.insert(Slot::B(1), Slot::X);
        map.insert(Slot::B(2), Slot::Y);
        for j in 3..=n + 1 {
            map.insert(Slot::B(j), Slot::B(j - 1));
        }
        let relabeled = child.poly().relabel(&map)?;
        apply_double_moment(&relabeled)
    }

    /// Splitting term for one ordered stable splitting: the double cuff
    /// moment of V_{g1,|set1|+1}(x, b_{set1}) · V_{g2,|set2|+1}(y, b_{set2}).
    pub fn c_term(
        &self,
        g: u32,
        n: u32,
        s: &StableSplitting,
    ) -> Result<GradedPoly, RecursionError> {
        debug_assert_eq!(s.g1 + s.g2, g);
        debug_assert_eq!(s.set1.len() + s.set2.len(), n as usize - 1);
        let piece = |gk: u32, set: &[u32], cuff: Slot| -> Result<GradedPoly, RecursionError> {
            let vol = self.volume(gk, set.len() as u32 + 1)?;
            let mut map: BTreeMap<Slot, Slot> = BTreeMap::new();
            map.insert(Slot::B(1), cuff);
            for (k, label) in set.iter().enumerate() {
                map.insert(Slot::B(k as u32 + 2), Slot::B(*label));
            }
            Ok(vol.poly().relabel(&map)?)
        };
        let left = piece(s.g1, &s.set1, Slot::X)?;
        let right = piece(s.g2, &s.set2, Slot::Y)?;
        apply_double_moment(&(&left * &right))
    }

    /// Serialize every stored volume to a JSON string (stable key order).
    pub fn to_json(&self) -> String {
        let guard = self.volumes.read().expect("cache lock poisoned");
        let repr = CacheRepr {
            format_version: CACHE_FORMAT_VERSION,
            volumes: guard
                .iter()
                .map(|((g, n), v)| (format!("{g},{n}"), v.to_repr()))
                .collect(),
        };
        serde_json::to_string(&repr).expect("cache serialization cannot fail")
    }

    /// Write the cache to `path` atomically: the JSON is written to a
    /// temporary file in the same directory and renamed into place, so a
    /// crash mid-save can never leave a truncated cache file.
    pub fn save(&self, path: &Path) -> Result<(), CacheIoError> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        let mut tmp = match dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                tempfile::NamedTempFile::new_in(d)?
            }
            None => tempfile::NamedTempFile::new_in(".")?,
        };
        tmp.write_all(self.to_json().as_bytes())?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| CacheIoError::Io(e.error))?;
        Ok(())
    }

    /// Load a cache file, validating the schema version and every entry
    /// (structure and full volume invariants).
    pub fn load(path: &Path) -> Result<Self, CacheIoError> {
        let data = std::fs::read_to_string(path)?;
        Self::from_json(&data)
    }

    /// Parse a serialized cache, validating every entry.
    pub fn from_json(data: &str) -> Result<Self, CacheIoError> {
        let repr: CacheRepr = serde_json::from_str(data)?;
        if repr.format_version != CACHE_FORMAT_VERSION {
            return Err(CacheIoError::BadVersion(repr.format_version));
        }
        let cache = RecursionCache::new();
        for (key, vrepr) in &repr.volumes {
            let parsed: Option<(u32, u32)> = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
            let (g, n) = parsed.ok_or_else(|| CacheIoError::BadEntry {
                key: key.clone(),
                detail: "key is not of the form \"g,n\"".into(),
            })?;
            if (vrepr.g, vrepr.n) != (g, n) {
                return Err(CacheIoError::BadEntry {
                    key: key.clone(),
                    detail: format!("entry labeled ({},{}) under key ({g},{n})", vrepr.g, vrepr.n),
                });
            }
            let vol = VolumePoly::from_repr(vrepr).map_err(|e| CacheIoError::BadEntry {
                key: key.clone(),
                detail: e.to_string(),
            })?;
            if let Some(v) = vol.check_invariants().first() {
                return Err(CacheIoError::Invariant {
                    key: key.clone(),
                    detail: v.to_string(),
                });
            }
            cache.store(g, n, vol);
        }
        Ok(cache)
    }
}

/// Collapse the two cuff variables of a polynomial: each monomial
/// c·x^{2i}·y^{2j}·M becomes c·double_reduce(i,j)·M·F_{2(i+j)+3}(b₁).
fn apply_double_moment(q: &GradedPoly) -> Result<GradedPoly, RecursionError> {
    let to_b1: BTreeMap<Slot, Slot> = [(Slot::X, Slot::B(1))].into();
    let mut out = GradedPoly::zero();
    for (m, c) in q.terms() {
        let (i, rest) = m.split_slot(Slot::X);
        let (j, rest) = rest.split_slot(Slot::Y);
        let moment = f_poly(i + j + 1).relabel(&to_b1)?;
        let factor = c * double_reduce(i, j);
        out = &out + &moment.mul_monomial(&rest).scale(&factor);
    }
    Ok(out)
}
