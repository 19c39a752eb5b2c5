//! Exact Weil-Petersson volume polynomials and their consistency checks.
//!
//! The centerpiece is [`recursion::RecursionCache`], which computes the
//! volume polynomials V_{g,n}(b₁,…,bₙ) of moduli spaces of bordered
//! hyperbolic surfaces by the boundary-length recursion, entirely in exact
//! rational arithmetic with π kept symbolic. Around it:
//!
//! * [`exactalg`] — sparse polynomials over ℚ in π² and squared boundary
//!   lengths, plus serialization and the volume invariants
//!   (homogeneity, positivity, symmetry);
//! * [`kernel`] / [`quadrature`] — the recursion's integration kernel, its
//!   exact moment polynomials, and a numeric oracle for them;
//! * [`intersect`] — ψ-class intersection numbers read off top-degree
//!   coefficients, with string/dilaton/KdV-type identity checks;
//! * [`zograf`] — independent genus-0/genus-1 cusped-volume recursions used
//!   as a cross-check oracle;
//! * [`growth`] — level-set volumes and leading growth constants c(γ) for
//!   simple closed curve counting;
//! * [`mcshane`] — the gap functions behind the recursion and a numeric
//!   verification of the cusped-torus McShane identity.

use std::fmt;

pub mod exactalg;
pub mod growth;
pub mod intersect;
pub mod kernel;
pub mod mcshane;
pub mod quadrature;
pub mod recursion;
pub mod zograf;

pub use exactalg::{
    GradedPoly, InvariantKind, InvariantViolation, Monomial, Rational, Slot, TermRepr, VolumeError,
    VolumePoly, VolumeRepr,
};
pub use recursion::{RecursionCache, RecursionError, StableSplitting};

/// Outcome of a batch identity check: how many instances ran and a
/// description of each failure (empty means pass).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub total: u64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), total: 0, failures: Vec::new() }
    }

    /// Record one passed instance.
    pub fn record_pass(&mut self) {
        self.total += 1;
    }

    /// Record one failed instance with a description.
    pub fn record_fail(&mut self, detail: impl Into<String>) {
        self.total += 1;
        self.failures.push(detail.into());
    }

    /// Fold another report's counts into this one (keeps this name).
    pub fn absorb(&mut self, other: CheckReport) {
        self.total += other.total;
        self.failures.extend(other.failures);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "{}: PASS ({} identities)", self.name, self.total)
        } else {
            writeln!(
                f,
                "{}: FAIL ({} of {} identities)",
                self.name,
                self.failures.len(),
                self.total
            )?;
            for fail in &self.failures {
                writeln!(f, "  {fail}")?;
            }
            Ok(())
        }
    }
}
