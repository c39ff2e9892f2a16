//! Necessary compatibility conditions for the canonical systems.
//!
//! Each canonical system pairs `v` with a partner (`vs` for the elliptic
//! system, where `vs` stands for the conjugate of `v`, otherwise `w`). The
//! checks are one-sided: a passing report only says the necessary condition
//! holds, never that the system is compatible.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{is_zero, EvalError, Exclusion, Expr, OpaqueImpls, SamplingBox, Verdict, ZeroTest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
    FirstOrder,
}

impl SystemKind {
    /// Variables the system's expressions may use.
    pub fn variables(self) -> [&'static str; 2] {
        match self {
            SystemKind::Elliptic => ["v", "vs"],
            _ => ["v", "w"],
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Elliptic => "elliptic",
            SystemKind::Hyperbolic => "hyperbolic",
            SystemKind::Parabolic => "parabolic",
            SystemKind::FirstOrder => "first_order",
        })
    }
}

fn default_n() -> u32 {
    3
}

/// A user-supplied canonical system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSystem {
    pub kind: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<i8>,
    #[serde(rename = "V")]
    pub v: Expr,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Expr>,
    /// Number of spatial coordinates.
    #[serde(default = "default_n")]
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompatError {
    #[error("expected a {expected} system, found {found}")]
    WrongKind { expected: SystemKind, found: SystemKind },
    #[error("variable `{var}` is not allowed in {place} of a {kind} system")]
    ForeignVariable { var: String, place: &'static str, kind: SystemKind },
    #[error("a {kind} system needs `{field}`")]
    MissingField { field: &'static str, kind: SystemKind },
    #[error("`{0}` is not allowed for a {1} system")]
    ExtraField(&'static str, SystemKind),
    #[error("lambda must be 1 or -1, got {0}")]
    BadLambda(i8),
    #[error("n must be at least 1")]
    BadN,
    #[error("opaque functions are not supported in {0}")]
    Opaque(&'static str),
    #[error("seed {0} vanishes identically")]
    SeedVanishes(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CanonicalSystem {
    pub fn new(kind: SystemKind, v: Expr) -> Self {
        CanonicalSystem { kind, h: None, lambda: None, v, w: None, n: 3 }
    }

    pub fn with_h(mut self, h: Expr) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_w(mut self, w: Expr) -> Self {
        self.w = Some(w);
        self
    }

    pub fn with_lambda(mut self, lambda: i8) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<(), CompatError> {
        let kind = self.kind;
        if self.n < 1 {
            return Err(CompatError::BadN);
        }
        let need = |field, present: bool| {
            if present {
                Ok(())
            } else {
                Err(CompatError::MissingField { field, kind })
            }
        };
        match kind {
            SystemKind::Elliptic => {
                need("h", self.h.is_some())?;
                if self.w.is_some() {
                    return Err(CompatError::ExtraField("W", kind));
                }
            }
            SystemKind::Hyperbolic => {
                need("h", self.h.is_some())?;
                need("W", self.w.is_some())?;
            }
            SystemKind::Parabolic => {
                need("lambda", self.lambda.is_some())?;
                need("W", self.w.is_some())?;
            }
            SystemKind::FirstOrder => need("W", self.w.is_some())?,
        }
        if let Some(l) = self.lambda {
            if kind != SystemKind::Parabolic {
                return Err(CompatError::ExtraField("lambda", kind));
            }
            if l != 1 && l != -1 {
                return Err(CompatError::BadLambda(l));
            }
        }
        let parts = [("h", self.h.as_ref()), ("V", Some(&self.v)), ("W", self.w.as_ref())];
        for (place, e) in parts {
            if let Some(e) = e {
                self.check_expr(e, place)?;
            }
        }
        Ok(())
    }

    fn check_expr(&self, e: &Expr, place: &'static str) -> Result<(), CompatError> {
        let allowed = self.kind.variables();
        if let Some(var) = e.free_vars().into_iter().find(|v| !allowed.contains(&v.as_str())) {
            return Err(CompatError::ForeignVariable { var, place, kind: self.kind });
        }
        if !e.opaque_names().is_empty() {
            return Err(CompatError::Opaque(place));
        }
        Ok(())
    }
}

/// `f ↦ h·∂f/∂var`, applied `times` times.
pub fn apply_h_operator(h: &Expr, var: &str, f: &Expr, times: u32) -> Expr {
    let mut g = f.canon();
    for _ in 0..times {
        g = h.clone() * g.diff(var);
    }
    g
}

/// `scale·∂Φ/∂var / Φ`. Fails when `Φ` is the literal zero.
pub fn construct_v(scale: &Expr, phi: &Expr, var: &str) -> Result<Expr, CompatError> {
    if phi.canon().is_literal_zero() {
        return Err(CompatError::SeedVanishes("Phi"));
    }
    Ok(scale.clone() * phi.diff(var) / phi.canon())
}

/// The chain `f, (h∂)f, …, (h∂)^{n+1} f` and the zero test of its last
/// entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NilpotencyCertificate {
    pub h: Expr,
    pub var: String,
    pub seed: Expr,
    pub chain: Vec<Expr>,
    pub verdict: Verdict,
}

impl NilpotencyCertificate {
    pub fn holds(&self) -> bool {
        self.verdict.is_zero()
    }
}

/// Builds and tests the nilpotency chain of length `n + 2`.
pub fn check_nilpotent(
    h: &Expr,
    var: &str,
    seed: &Expr,
    n: u32,
    domain: &SamplingBox,
    cfg: ZeroTest,
) -> Result<NilpotencyCertificate, CompatError> {
    let mut chain = Vec::with_capacity(n as usize + 2);
    chain.push(seed.canon());
    for _ in 0..=n {
        let next = apply_h_operator(h, var, chain.last().unwrap(), 1);
        chain.push(next);
    }
    let verdict = is_zero(chain.last().unwrap(), domain, &OpaqueImpls::new(), cfg)?;
    Ok(NilpotencyCertificate { h: h.clone(), var: var.to_string(), seed: seed.canon(), chain, verdict })
}

/// One checked condition of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<NilpotencyCertificate>,
}

impl Condition {
    fn plain(name: String, verdict: Verdict) -> Self {
        Condition { name, verdict, certificate: None }
    }

    fn nilpotency(name: String, cert: NilpotencyCertificate) -> Self {
        Condition { name, verdict: cert.verdict.clone(), certificate: Some(cert) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "necessary condition satisfied")]
    NecessaryConditionSatisfied,
    #[serde(rename = "necessary condition violated")]
    NecessaryConditionViolated,
    #[serde(rename = "undecided")]
    Undecided,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::NecessaryConditionSatisfied => "necessary condition satisfied",
            Status::NecessaryConditionViolated => "necessary condition violated",
            Status::Undecided => "undecided",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatReport {
    pub theorem: &'static str,
    pub kind: SystemKind,
    pub n: u32,
    pub status: Status,
    pub conditions: Vec<Condition>,
    /// Tubes removed from the sampling box around zeros of `h`, `Φ`, `Ψ`.
    pub excluded: Vec<Exclusion>,
}

impl CompatReport {
    fn new(
        theorem: &'static str,
        sys: &CanonicalSystem,
        conditions: Vec<Condition>,
        excluded: Vec<Exclusion>,
    ) -> Self {
        let status = if conditions.iter().any(|c| c.verdict.is_nonzero()) {
            Status::NecessaryConditionViolated
        } else if conditions.iter().all(|c| c.verdict.is_zero()) {
            Status::NecessaryConditionSatisfied
        } else {
            Status::Undecided
        };
        CompatReport { theorem, kind: sys.kind, n: sys.n, status, conditions, excluded }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::NecessaryConditionSatisfied
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Sampling settings for the compatibility checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatConfig {
    pub test: ZeroTest,
    /// The pair variables are sampled from `[-half_width, half_width]^2`.
    pub half_width: f64,
}

impl Default for CompatConfig {
    fn default() -> Self {
        CompatConfig { test: ZeroTest::default(), half_width: 2.0 }
    }
}

fn expect_kind(sys: &CanonicalSystem, kind: SystemKind) -> Result<(), CompatError> {
    sys.validate()?;
    if sys.kind != kind {
        return Err(CompatError::WrongKind { expected: kind, found: sys.kind });
    }
    Ok(())
}

/// Builds the sampling box and rejects seeds that vanish identically.
fn domain_for(
    sys: &CanonicalSystem,
    seeds: &[(&'static str, &Expr)],
    cfg: &CompatConfig,
) -> Result<SamplingBox, CompatError> {
    let vars = sys.kind.variables();
    let mut dom = SamplingBox::cube(&vars, -cfg.half_width, cfg.half_width);
    let plain = dom.clone();
    for (name, seed) in seeds {
        sys.check_expr(seed, name)?;
        if is_zero(seed, &plain, &OpaqueImpls::new(), cfg.test)?.is_zero() {
            return Err(CompatError::SeedVanishes(name));
        }
    }
    let tubes = seeds.iter().map(|(_, e)| (*e).clone()).chain(sys.h.clone());
    for e in tubes {
        let e = e.canon();
        if e.as_number().is_none() && !dom.exclude.iter().any(|x| x.expr == e) {
            dom = dom.excluding(Exclusion::tube(e));
        }
    }
    Ok(dom)
}

fn form_check(
    v: &Expr,
    scale: &Expr,
    seed: &Expr,
    var: &str,
    dom: &SamplingBox,
    cfg: ZeroTest,
) -> Result<Verdict, CompatError> {
    let residual = v.clone() * seed.clone() - scale.clone() * seed.diff(var);
    Ok(is_zero(&residual, dom, &OpaqueImpls::new(), cfg)?)
}

/// Elliptic system: `V·Φ = h ∂_vs Φ` and `(h ∂_vs)^{n+1} Φ ≡ 0`.
pub fn check_theorem1(
    sys: &CanonicalSystem,
    phi: &Expr,
    cfg: &CompatConfig,
) -> Result<CompatReport, CompatError> {
    expect_kind(sys, SystemKind::Elliptic)?;
    let h = sys.h.as_ref().unwrap();
    let dom = domain_for(sys, &[("Phi", phi)], cfg)?;
    let n = sys.n;
    let conditions = vec![
        Condition::plain("V = h*d_vs(Phi)/Phi".into(), form_check(&sys.v, h, phi, "vs", &dom, cfg.test)?),
        Condition::nilpotency(
            format!("(h*d_vs)^{} Phi = 0", n + 1),
            check_nilpotent(h, "vs", phi, n, &dom, cfg.test)?,
        ),
    ];
    Ok(CompatReport::new("theorem 1", sys, conditions, dom.exclude))
}

/// Hyperbolic system: `V·Φ = h ∂_w Φ`, `W·Ψ = h ∂_v Ψ`,
/// `(h ∂_v)^{n+1} Ψ ≡ 0` and `(h ∂_w)^{n+1} Φ ≡ 0`.
pub fn check_theorem2(
    sys: &CanonicalSystem,
    phi: &Expr,
    psi: &Expr,
    cfg: &CompatConfig,
) -> Result<CompatReport, CompatError> {
    expect_kind(sys, SystemKind::Hyperbolic)?;
    let h = sys.h.as_ref().unwrap();
    let w = sys.w.as_ref().unwrap();
    let dom = domain_for(sys, &[("Phi", phi), ("Psi", psi)], cfg)?;
    let n = sys.n;
    let conditions = vec![
        Condition::plain("V = h*d_w(Phi)/Phi".into(), form_check(&sys.v, h, phi, "w", &dom, cfg.test)?),
        Condition::plain("W = h*d_v(Psi)/Psi".into(), form_check(w, h, psi, "v", &dom, cfg.test)?),
        Condition::nilpotency(
            format!("(h*d_v)^{} Psi = 0", n + 1),
            check_nilpotent(h, "v", psi, n, &dom, cfg.test)?,
        ),
        Condition::nilpotency(
            format!("(h*d_w)^{} Phi = 0", n + 1),
            check_nilpotent(h, "w", phi, n, &dom, cfg.test)?,
        ),
    ];
    Ok(CompatReport::new("theorem 2", sys, conditions, dom.exclude))
}

/// Parabolic system: `V·Φ = λ ∂_v Φ`, `∂_v^{n+1} Φ ≡ 0` and `W ≡ 0`.
pub fn check_theorem3(
    sys: &CanonicalSystem,
    phi: &Expr,
    cfg: &CompatConfig,
) -> Result<CompatReport, CompatError> {
    expect_kind(sys, SystemKind::Parabolic)?;
    let lambda = Expr::int(sys.lambda.unwrap() as i64);
    let w = sys.w.as_ref().unwrap();
    let dom = domain_for(sys, &[("Phi", phi)], cfg)?;
    let n = sys.n;
    let conditions = vec![
        Condition::plain("V = lambda*d_v(Phi)/Phi".into(), form_check(&sys.v, &lambda, phi, "v", &dom, cfg.test)?),
        Condition::nilpotency(
            format!("d_v^{} Phi = 0", n + 1),
            check_nilpotent(&Expr::one(), "v", phi, n, &dom, cfg.test)?,
        ),
        Condition::plain("W = 0".into(), is_zero(w, &dom, &OpaqueImpls::new(), cfg.test)?),
    ];
    Ok(CompatReport::new("theorem 3", sys, conditions, dom.exclude))
}

/// First-order system: `V ≡ 0` and `W ≡ 0`.
pub fn check_first_order(sys: &CanonicalSystem, cfg: &CompatConfig) -> Result<CompatReport, CompatError> {
    expect_kind(sys, SystemKind::FirstOrder)?;
    let dom = domain_for(sys, &[], cfg)?;
    let none = OpaqueImpls::new();
    let conditions = vec![
        Condition::plain("V = 0".into(), is_zero(&sys.v, &dom, &none, cfg.test)?),
        Condition::plain("W = 0".into(), is_zero(sys.w.as_ref().unwrap(), &dom, &none, cfg.test)?),
    ];
    Ok(CompatReport::new("first-order condition", sys, conditions, dom.exclude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn h_operator_examples() {
        assert_eq!(apply_h_operator(&Expr::one(), "v", &p("v^2"), 3), Expr::zero());
        assert_eq!(apply_h_operator(&Expr::one(), "v", &p("v^3"), 3), Expr::int(6));
        for k in 0..5 {
            assert_eq!(apply_h_operator(&p("v"), "v", &p("v"), k), p("v"));
        }
    }

    #[test]
    fn theorem1_examples() {
        let cfg = CompatConfig::default();
        let sys = CanonicalSystem::new(SystemKind::Elliptic, p("1/vs")).with_h(Expr::one());
        let rep = check_theorem1(&sys, &p("vs"), &cfg).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let cert = rep.conditions[1].certificate.as_ref().unwrap();
        assert_eq!(cert.chain.len(), 5);

        let sys = CanonicalSystem::new(SystemKind::Elliptic, Expr::zero()).with_h(p("v*vs + 3"));
        assert!(check_theorem1(&sys, &Expr::one(), &cfg).unwrap().passed());

        let sys = CanonicalSystem::new(SystemKind::Elliptic, Expr::one()).with_h(Expr::one());
        let rep = check_theorem1(&sys, &p("exp(vs)"), &cfg).unwrap();
        assert_eq!(rep.status, Status::NecessaryConditionViolated);
        assert!(rep.conditions[0].verdict.is_zero());
        assert!(rep.conditions[1].verdict.is_nonzero());
    }

    #[test]
    fn theorem2_examples() {
        let cfg = CompatConfig::default();
        let sys = CanonicalSystem::new(SystemKind::Hyperbolic, p("2/w")).with_h(Expr::one()).with_w(p("1/v"));
        assert!(check_theorem2(&sys, &p("w^2"), &p("v"), &cfg).unwrap().passed());

        let sys = CanonicalSystem::new(SystemKind::Hyperbolic, Expr::zero()).with_h(Expr::one()).with_w(Expr::zero());
        assert!(check_theorem2(&sys, &Expr::one(), &Expr::one(), &cfg).unwrap().passed());

        let sys = CanonicalSystem::new(SystemKind::Hyperbolic, p("v"))
            .with_h(p("v*w"))
            .with_w(p("w"))
            .with_n(1);
        let rep = check_theorem2(&sys, &p("w"), &p("v"), &cfg).unwrap();
        let psi_chain = rep.conditions[2].certificate.as_ref().unwrap();
        assert_eq!(*psi_chain.chain.last().unwrap(), p("v*w^2"));
        assert!(!rep.passed());
    }

    #[test]
    fn theorem3_examples() {
        let cfg = CompatConfig::default();
        let sys = CanonicalSystem::new(SystemKind::Parabolic, p("-(3*v^2 + w)/(v^3 + w*v)"))
            .with_lambda(-1)
            .with_w(Expr::zero());
        let rep = check_theorem3(&sys, &p("v^3 + w*v"), &cfg).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.excluded.len(), 1);

        let sys = CanonicalSystem::new(SystemKind::Parabolic, Expr::zero()).with_lambda(1).with_w(p("v"));
        let rep = check_theorem3(&sys, &Expr::one(), &cfg).unwrap();
        assert!(!rep.passed());
        assert!(rep.get("W = 0").unwrap().verdict.is_nonzero());
    }

    #[test]
    fn first_order_examples() {
        let cfg = CompatConfig::default();
        let ok = CanonicalSystem::new(SystemKind::FirstOrder, Expr::zero()).with_w(Expr::zero());
        assert!(check_first_order(&ok, &cfg).unwrap().passed());
        let bad = CanonicalSystem::new(SystemKind::FirstOrder, p("v")).with_w(Expr::zero());
        assert!(!check_first_order(&bad, &cfg).unwrap().passed());
        let trig = CanonicalSystem::new(SystemKind::FirstOrder, p("sin(v)^2 + cos(v)^2 - 1")).with_w(Expr::zero());
        assert!(check_first_order(&trig, &cfg).unwrap().passed());
    }

    #[test]
    fn construct_v_examples() {
        let v = construct_v(&Expr::one(), &p("vs"), "vs").unwrap();
        assert_eq!(v, p("1/vs"));
        let dom = SamplingBox::cube(&["v", "w"], -2.0, 2.0);
        let v = construct_v(&Expr::one(), &p("exp(3/2*v)"), "v").unwrap();
        let diff = v - Expr::rational(3, 2);
        assert!(is_zero(&diff, &dom, &OpaqueImpls::new(), ZeroTest::default()).unwrap().is_zero());
        assert_eq!(construct_v(&p("v"), &Expr::one(), "v").unwrap(), Expr::zero());
        assert!(construct_v(&Expr::one(), &Expr::zero(), "v").is_err());
    }

    #[test]
    fn structural_errors() {
        let cfg = CompatConfig::default();
        let sys = CanonicalSystem::new(SystemKind::Elliptic, p("w")).with_h(Expr::one());
        assert!(matches!(check_theorem1(&sys, &Expr::one(), &cfg), Err(CompatError::ForeignVariable { .. })));
        let sys = CanonicalSystem::new(SystemKind::Elliptic, Expr::zero()).with_h(Expr::one());
        assert!(matches!(check_theorem1(&sys, &Expr::zero(), &cfg), Err(CompatError::SeedVanishes(_))));
        assert!(matches!(check_theorem1(&sys, &p("v - v"), &cfg), Err(CompatError::SeedVanishes(_))));
        let par = CanonicalSystem::new(SystemKind::Parabolic, Expr::zero()).with_w(Expr::zero());
        assert!(matches!(par.validate(), Err(CompatError::MissingField { field: "lambda", .. })));
        assert!(matches!(par.with_lambda(2).validate(), Err(CompatError::BadLambda(2))));
        let wrong = CanonicalSystem::new(SystemKind::FirstOrder, Expr::zero()).with_w(Expr::zero());
        assert!(matches!(check_theorem1(&wrong, &Expr::one(), &cfg), Err(CompatError::WrongKind { .. })));
    }

    #[test]
    fn system_json_shape() {
        let text = r#"{"kind":"parabolic","lambda":-1,"V":"0","W":"v","n":2}"#;
        let sys: CanonicalSystem = serde_json::from_str(text).unwrap();
        assert_eq!(sys.kind, SystemKind::Parabolic);
        assert_eq!(sys.w, Some(p("v")));
        assert_eq!(sys.n, 2);
        let back = serde_json::to_string(&sys).unwrap();
        assert_eq!(back, text);
        let defaulted: CanonicalSystem = serde_json::from_str(r#"{"kind":"elliptic","h":"1","V":"0"}"#).unwrap();
        assert_eq!(defaulted.n, 3);
    }
}
