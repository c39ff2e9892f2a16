//! Probabilistic identity testing.
//!
//! An expression is declared identically zero when it evaluates to (relative)
//! zero at every point of a seeded random sample. Points that hit a domain
//! error or fall inside an excluded tube are rejected and resampled.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{eval, eval_scaled, EvalError, OpaqueImpls};
use super::Expr;

/// Default absolute/relative tolerance of the zero test.
pub const DEFAULT_ATOL: f64 = 1e-10;
/// Default half-width of tubes excluded around singular sets.
pub const DEFAULT_TUBE: f64 = 1e-3;

/// Points with `|expr| < radius` are excluded from sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub expr: Expr,
    pub radius: f64,
}

impl Exclusion {
    pub fn tube(expr: Expr) -> Self {
        Exclusion { expr, radius: DEFAULT_TUBE }
    }
}

/// Axis-aligned sampling box over named variables, minus excluded tubes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub vars: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    #[serde(default)]
    pub exclude: Vec<Exclusion>,
}

impl SamplingBox {
    pub fn new(vars: &[&str], min: &[f64], max: &[f64]) -> Self {
        assert_eq!(vars.len(), min.len());
        assert_eq!(vars.len(), max.len());
        SamplingBox {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            min: min.to_vec(),
            max: max.to_vec(),
            exclude: Vec::new(),
        }
    }

    /// `[lo, hi]` in every listed variable.
    pub fn cube(vars: &[&str], lo: f64, hi: f64) -> Self {
        let n = vars.len();
        SamplingBox::new(vars, &vec![lo; n], &vec![hi; n])
    }

    /// The default coordinate box `[-2, 2]^4`.
    pub fn spacetime() -> Self {
        SamplingBox::cube(&super::COORDS, -2.0, 2.0)
    }

    pub fn excluding(mut self, e: Exclusion) -> Self {
        self.exclude.push(e);
        self
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn has_volume(&self) -> bool {
        self.min.iter().zip(&self.max).all(|(a, b)| b > a)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.min.iter().zip(&self.max).map(|(a, b)| rng.gen_range(*a..*b)).collect()
    }

    pub fn bind(&self, point: &[f64]) -> BTreeMap<String, f64> {
        self.vars.iter().cloned().zip(point.iter().copied()).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.iter().zip(self.min.iter().zip(&self.max)).all(|(x, (a, b))| x >= a && x <= b)
    }

    /// Whether `point` lies in one of the excluded tubes. Points where an
    /// exclusion expression cannot be evaluated count as excluded.
    pub fn is_excluded(&self, point: &[f64], impls: &OpaqueImpls) -> bool {
        if self.exclude.is_empty() {
            return false;
        }
        let b = self.bind(point);
        self.exclude.iter().any(|ex| match eval(&ex.expr, &b, impls) {
            Ok(v) => v.abs() < ex.radius,
            Err(_) => true,
        })
    }

    pub fn admits(&self, point: &[f64], impls: &OpaqueImpls) -> bool {
        self.contains(point) && !self.is_excluded(point, impls)
    }
}

/// Settings of one zero test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTest {
    pub trials: usize,
    pub seed: u64,
    pub atol: f64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest { trials: 200, seed: 0x5eed, atol: DEFAULT_ATOL }
    }
}

impl ZeroTest {
    pub fn with_seed(self, seed: u64) -> Self {
        ZeroTest { seed, ..self }
    }

    pub fn with_trials(self, trials: usize) -> Self {
        ZeroTest { trials, ..self }
    }
}

/// Outcome of a zero test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Zero { samples: usize },
    NonZero { witness: BTreeMap<String, f64>, value: f64 },
    Undecided { accepted: usize, rejected: usize, reason: String },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero { .. })
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, Verdict::NonZero { .. })
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Verdict::Undecided { .. })
    }
}

enum Sample {
    Rejected,
    Small,
    Large(f64),
}

/// Decides whether `e` vanishes identically on `domain`.
///
/// A sample counts as zero when `|e| <= atol * max(1, s)` where `s` is the
/// largest magnitude of any subterm at that point. Errors are returned only
/// for structural problems (a free variable the box does not cover, a
/// missing opaque implementation); domain errors reject the sample.
pub fn is_zero(
    e: &Expr,
    domain: &SamplingBox,
    impls: &OpaqueImpls,
    cfg: ZeroTest,
) -> Result<Verdict, EvalError> {
    assert!(cfg.trials >= 1, "zero test needs at least one trial");
    assert!(domain.has_volume(), "sampling box must have positive volume");
    if let Some(v) = e.free_vars().into_iter().find(|v| !domain.vars.contains(v)) {
        return Err(EvalError::UnboundVariable(v));
    }
    if let Some(name) = e.opaque_names().into_iter().find(|n| !impls.contains_key(n)) {
        return Err(EvalError::MissingOpaque(name));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_attempts = cfg.trials.saturating_mul(10);
    let (mut accepted, mut attempts) = (0usize, 0usize);
    while accepted < cfg.trials && attempts < max_attempts {
        let batch = (cfg.trials - accepted).min(max_attempts - attempts);
        let points: Vec<Vec<f64>> = (0..batch).map(|_| domain.sample(&mut rng)).collect();
        attempts += batch;
        let results: Vec<Sample> = points
            .par_iter()
            .map(|p| {
                if domain.is_excluded(p, impls) {
                    return Sample::Rejected;
                }
                match eval_scaled(e, &domain.bind(p), impls) {
                    Ok((v, scale)) if v.abs() <= cfg.atol * scale.max(1.0) => Sample::Small,
                    Ok((v, _)) => Sample::Large(v),
                    Err(_) => Sample::Rejected,
                }
            })
            .collect();
        for (p, r) in points.iter().zip(results) {
            match r {
                Sample::Rejected => {}
                Sample::Small => accepted += 1,
                Sample::Large(value) => {
                    return Ok(Verdict::NonZero { witness: domain.bind(p), value });
                }
            }
        }
    }
    if accepted < cfg.trials {
        return Ok(Verdict::Undecided {
            accepted,
            rejected: attempts - accepted,
            reason: "more than 90% of sample points hit domain errors or exclusions".into(),
        });
    }
    Ok(Verdict::Zero { samples: accepted })
}
