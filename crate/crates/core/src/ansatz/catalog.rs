//! The four built-in ansätze and their reduced equations.

use serde::Serialize;

use super::{AnsatzSpec, Case, Invariants, ReducedEquation};
use crate::expr::{Builtin, Exclusion, Expr, OpaqueImpls, SamplingBox};
use crate::minkowski::{project, Direction, Frame};

/// Name of the arbitrary function slot in entry 3.
pub const PHI_SLOT: &str = "Phi";

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub number: usize,
    pub spec: AnsatzSpec,
    pub reduced: ReducedEquation,
    pub expected: Case,
}

/// JSON-friendly summary of an entry.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogSummary {
    pub number: usize,
    pub y: Expr,
    pub z: Expr,
    pub reduced: ReducedEquation,
    pub expected: Case,
}

impl CatalogEntry {
    pub fn summary(&self) -> CatalogSummary {
        CatalogSummary {
            number: self.number,
            y: self.spec.y.clone(),
            z: self.spec.z.clone(),
            reduced: self.reduced.clone(),
            expected: self.expected.clone(),
        }
    }
}

fn norm_of(parts: &[Expr]) -> Expr {
    Expr::sum(parts.iter().map(|p| p.clone().powi(2))).sqrt()
}

fn reduced(r: &str, q: &str, s: &str, box_y: &str, box_z: &str) -> ReducedEquation {
    let coeffs = Invariants::parse(r, q, s, box_y, box_z).expect("catalog coefficients parse");
    ReducedEquation::new(coeffs, ReducedEquation::generic_rhs()).expect("catalog coefficients use y, z")
}

/// Entry `number` (1..=4) in `frame`, with `phi` backing the arbitrary
/// function of entry 3. Returns `None` for an unknown number.
pub fn catalog_entry(number: usize, frame: &Frame, phi: Builtin) -> Option<CatalogEntry> {
    let [ax, bx, cx, dx] = Direction::ALL.map(|k| project(frame, k));
    let domain = SamplingBox::spacetime();
    let (y, z, opaque, domain, reduced, expected) = match number {
        1 => (ax, dx, OpaqueImpls::new(), domain, reduced("1", "0", "-1", "0", "0"), Case::Hyperbolic),
        2 => {
            let z = norm_of(&[bx, cx, dx]);
            let domain = domain.excluding(Exclusion::tube(z.clone()));
            (ax, z, OpaqueImpls::new(), domain, reduced("1", "0", "-1", "0", "-2/z"), Case::Hyperbolic)
        }
        3 => {
            let y = bx + Expr::opaque(PHI_SLOT, ax + dx);
            let mut opaque = OpaqueImpls::new();
            opaque.insert(PHI_SLOT.to_string(), phi.into_impl());
            (y, cx, opaque, domain, reduced("-1", "0", "-1", "0", "0"), Case::Elliptic)
        }
        4 => {
            let y = norm_of(&[bx, cx]);
            let domain = domain.excluding(Exclusion::tube(y.clone()));
            (y, ax + dx, OpaqueImpls::new(), domain, reduced("-1", "0", "0", "-1/y", "0"), Case::Parabolic { lambda: -1 })
        }
        _ => return None,
    };
    let spec = AnsatzSpec::with_parts(y, z, opaque, domain).expect("catalog specs are valid");
    Some(CatalogEntry { number, spec, reduced, expected })
}

/// All four entries in `frame`.
pub fn catalog_in(frame: &Frame, phi: Builtin) -> Vec<CatalogEntry> {
    (1..=4).filter_map(|n| catalog_entry(n, frame, phi)).collect()
}

/// All four entries in the canonical frame with `Phi(t) = t²`.
pub fn catalog() -> Vec<CatalogEntry> {
    catalog_in(&Frame::canonical(), Builtin::Square)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{compute_invariants, verify_reduction};
    use crate::expr::ZeroTest;

    #[test]
    fn canonical_entries_print_as_expected() {
        let c = catalog();
        assert_eq!(c.len(), 4);
        assert_eq!(c[0].spec.y.to_string(), "x0");
        assert_eq!(c[0].spec.z.to_string(), "-x3");
        assert_eq!(c[1].spec.z.to_string(), "sqrt(x1^2 + x2^2 + x3^2)");
        assert_eq!(c[2].spec.y.to_string(), "-x1 + Phi(x0 - x3)");
        assert_eq!(c[3].spec.z.to_string(), "x0 - x3");
        assert!(catalog_entry(5, &Frame::canonical(), Builtin::Square).is_none());
    }

    #[test]
    fn every_entry_verifies_for_every_phi() {
        for phi in Builtin::ALL {
            for e in catalog_in(&Frame::canonical(), phi) {
                let rr = compute_invariants(&e.spec).unwrap();
                let rep = verify_reduction(&e.spec, &rr.raw, &e.reduced, ZeroTest::default()).unwrap();
                assert!(rep.passed(), "entry {} with {phi:?}: {rep:?}", e.number);
            }
        }
    }
}
