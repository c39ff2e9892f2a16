//! Reduction of `□u = F(u)` by the ansatz `u = φ(y, z)`.
//!
//! Substituting the ansatz produces
//!
//! ```text
//! r φ_yy + 2q φ_yz + s φ_zz + R φ_y + S φ_z = F(φ)
//! ```
//!
//! with `r = y_μ y_μ`, `q = y_μ z_μ`, `s = z_μ z_μ`, `R = □y`, `S = □z`. The
//! reduction closes only when these five quantities are functions of
//! `(y, z)` alone. This module computes them, checks claimed closed forms,
//! tests functional dependence and classifies the resulting equation.

mod catalog;
mod classify;
mod level_set;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{is_zero, EvalError, Expr, OpaqueFn, OpaqueImpls, SamplingBox, Verdict, ZeroTest, COORDS};
use crate::minkowski::METRIC;

pub use catalog::{catalog, catalog_entry, catalog_in, CatalogEntry, CatalogSummary, PHI_SLOT};
pub use classify::{classify_case, ClassifyConfig, Case, CaseKind, Cell, RegionMap};
pub use level_set::{depends_only_on_yz, Dependence, LevelSetTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnsatzError {
    #[error("variable `{var}` is not allowed in {place}")]
    ForeignVariable { var: String, place: &'static str },
    #[error("opaque function `{0}` has no implementation")]
    MissingOpaque(String),
    #[error("invalid sampling domain: {0}")]
    BadDomain(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn check_vars(e: &Expr, allowed: &[&str], place: &'static str) -> Result<(), AnsatzError> {
    match e.free_vars().into_iter().find(|v| !allowed.contains(&v.as_str())) {
        Some(var) => Err(AnsatzError::ForeignVariable { var, place }),
        None => Ok(()),
    }
}

/// A candidate pair of new variables `y(x)`, `z(x)`.
#[derive(Clone, Debug)]
pub struct AnsatzSpec {
    pub y: Expr,
    pub z: Expr,
    pub opaque: OpaqueImpls,
    pub domain: SamplingBox,
}

impl AnsatzSpec {
    /// A spec on the default box `[-2, 2]^4`.
    pub fn new(y: Expr, z: Expr) -> Result<Self, AnsatzError> {
        AnsatzSpec::with_parts(y, z, OpaqueImpls::new(), SamplingBox::spacetime())
    }

    pub fn with_parts(
        y: Expr,
        z: Expr,
        opaque: OpaqueImpls,
        domain: SamplingBox,
    ) -> Result<Self, AnsatzError> {
        let spec = AnsatzSpec { y, z, opaque, domain };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_opaque(mut self, name: &str, imp: std::sync::Arc<dyn OpaqueFn>) -> Self {
        self.opaque.insert(name.to_string(), imp);
        self
    }

    pub fn with_domain(mut self, domain: SamplingBox) -> Result<Self, AnsatzError> {
        self.domain = domain;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), AnsatzError> {
        check_vars(&self.y, &COORDS, "y")?;
        check_vars(&self.z, &COORDS, "z")?;
        for name in self.y.opaque_names().into_iter().chain(self.z.opaque_names()) {
            if !self.opaque.contains_key(&name) {
                return Err(AnsatzError::MissingOpaque(name));
            }
        }
        if self.domain.vars.iter().map(String::as_str).ne(COORDS) {
            return Err(AnsatzError::BadDomain(format!(
                "expected variables x0..x3, found {:?}",
                self.domain.vars
            )));
        }
        if !self.domain.has_volume() {
            return Err(AnsatzError::BadDomain("box has zero volume".into()));
        }
        Ok(())
    }

    /// Substitutes `y -> y(x)`, `z -> z(x)` into an expression in `(y, z)`.
    pub fn pull_back(&self, e: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert("y".to_string(), self.y.clone());
        map.insert("z".to_string(), self.z.clone());
        e.substitute(&map)
    }
}

/// The five reduction invariants `r, q, s, R = □y, S = □z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub r: Expr,
    pub q: Expr,
    pub s: Expr,
    #[serde(rename = "R")]
    pub box_y: Expr,
    #[serde(rename = "S")]
    pub box_z: Expr,
}

impl Invariants {
    pub const NAMES: [&'static str; 5] = ["r", "q", "s", "R", "S"];

    pub fn new(r: Expr, q: Expr, s: Expr, box_y: Expr, box_z: Expr) -> Self {
        Invariants { r, q, s, box_y, box_z }
    }

    pub fn parse(r: &str, q: &str, s: &str, box_y: &str, box_z: &str) -> Result<Self, crate::expr::ParseError> {
        use crate::expr::parse;
        Ok(Invariants::new(parse(r)?, parse(q)?, parse(s)?, parse(box_y)?, parse(box_z)?))
    }

    pub fn named(&self) -> [(&'static str, &Expr); 5] {
        [("r", &self.r), ("q", &self.q), ("s", &self.s), ("R", &self.box_y), ("S", &self.box_z)]
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Invariants {
        Invariants::new(f(&self.r), f(&self.q), f(&self.s), f(&self.box_y), f(&self.box_z))
    }
}

impl fmt::Display for Invariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, e) in self.named() {
            writeln!(f, "{name} = {e}")?;
        }
        Ok(())
    }
}

/// The reduced two-dimensional equation: coefficients in `(y, z)` and a
/// right-hand side in `phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedEquation {
    #[serde(flatten)]
    pub coeffs: Invariants,
    #[serde(rename = "F")]
    pub rhs: Expr,
}

impl ReducedEquation {
    pub fn new(coeffs: Invariants, rhs: Expr) -> Result<Self, AnsatzError> {
        let eq = ReducedEquation { coeffs, rhs };
        eq.validate()?;
        Ok(eq)
    }

    pub fn validate(&self) -> Result<(), AnsatzError> {
        for (_, e) in self.coeffs.named() {
            check_vars(e, &["y", "z"], "a reduced coefficient")?;
        }
        check_vars(&self.rhs, &["phi"], "the right-hand side F")
    }

    pub fn with_rhs(&self, rhs: Expr) -> Result<Self, AnsatzError> {
        ReducedEquation::new(self.coeffs.clone(), rhs)
    }

    /// The placeholder right-hand side `F(phi)`.
    pub fn generic_rhs() -> Expr {
        Expr::opaque("F", Expr::var("phi"))
    }
}

/// Result of [`compute_invariants`], optionally enriched by verification and
/// classification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionResult {
    /// Invariants as expressions in x0..x3.
    pub raw: Invariants,
    /// Verified closed forms in `(y, z)`.
    pub reduced: Option<Invariants>,
    pub case: Option<Case>,
}

fn minkowski_square(a: &[Expr], b: &[Expr]) -> Expr {
    Expr::sum((0..4).map(|m| {
        let t = a[m].clone() * b[m].clone();
        if METRIC[m] < 0.0 {
            -t
        } else {
            t
        }
    }))
}

/// d'Alembertian `∂²/∂x0² − ∂²/∂x1² − ∂²/∂x2² − ∂²/∂x3²` of an expression.
pub fn dalembertian(e: &Expr) -> Expr {
    let grad: Vec<Expr> = COORDS.iter().map(|x| e.diff(x)).collect();
    dalembertian_of_grad(&grad)
}

fn dalembertian_of_grad(grad: &[Expr]) -> Expr {
    Expr::sum(COORDS.iter().enumerate().map(|(m, x)| {
        let d = grad[m].diff(x);
        if METRIC[m] < 0.0 {
            -d
        } else {
            d
        }
    }))
}

/// Computes `r, q, s, R, S` symbolically in x-space.
pub fn compute_invariants(spec: &AnsatzSpec) -> Result<ReductionResult, AnsatzError> {
    spec.validate()?;
    let gy: Vec<Expr> = COORDS.iter().map(|x| spec.y.diff(x)).collect();
    let gz: Vec<Expr> = COORDS.iter().map(|x| spec.z.diff(x)).collect();
    let raw = Invariants {
        r: minkowski_square(&gy, &gy),
        q: minkowski_square(&gy, &gz),
        s: minkowski_square(&gz, &gz),
        box_y: dalembertian_of_grad(&gy),
        box_z: dalembertian_of_grad(&gz),
    };
    Ok(ReductionResult { raw, reduced: None, case: None })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub name: &'static str,
    pub claimed: Expr,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Per-coefficient outcome of [`verify_reduction`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CoefficientCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict.is_zero())
    }

    pub fn undecided(&self) -> bool {
        self.checks.iter().any(|c| c.verdict.is_undecided())
    }

    pub fn get(&self, name: &str) -> Option<&CoefficientCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks that each raw invariant equals the claimed coefficient composed
/// with `(y(x), z(x))` throughout the spec's domain.
pub fn verify_reduction(
    spec: &AnsatzSpec,
    raw: &Invariants,
    claimed: &ReducedEquation,
    cfg: ZeroTest,
) -> Result<VerificationReport, AnsatzError> {
    claimed.validate()?;
    let mut checks = Vec::with_capacity(5);
    for ((name, raw_e), (_, claim)) in raw.named().into_iter().zip(claimed.coeffs.named()) {
        let diff = raw_e.clone() - spec.pull_back(claim);
        let verdict = is_zero(&diff, &spec.domain, &spec.opaque, cfg)?;
        checks.push(CoefficientCheck { name, claimed: claim.clone(), verdict });
    }
    Ok(VerificationReport { checks })
}
