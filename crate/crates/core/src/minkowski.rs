//! Four-vectors with the (+, −, −, −) metric, parameter frames and proper
//! Lorentz transformations.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{Expr, COORDS};

/// Diagonal of the Minkowski metric.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Frame tolerance for analytically exact inputs.
pub const EXACT_FRAME_TOL: f64 = 1e-12;
/// Frame tolerance for user-supplied numeric frames.
pub const NUMERIC_FRAME_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const fn new(v0: f64, v1: f64, v2: f64, v3: f64) -> Self {
        FourVector([v0, v1, v2, v3])
    }

    /// The `k`-th coordinate unit vector.
    pub fn unit(k: usize) -> Self {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        FourVector(v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn euclid_norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn euclid_dot(&self, o: &FourVector) -> f64 {
        self.0.iter().zip(&o.0).map(|(a, b)| a * b).sum()
    }
}

impl std::ops::Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl std::ops::Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl std::ops::Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Minkowski inner product `u0 v0 − u1 v1 − u2 v2 − u3 v3`.
pub fn mdot(u: &FourVector, v: &FourVector) -> f64 {
    (0..4).map(|i| METRIC[i] * u.0[i] * v.0[i]).sum()
}

/// Which of the four frame vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    A,
    B,
    C,
    D,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::A, Direction::B, Direction::C, Direction::D];

    fn label(self) -> &'static str {
        match self {
            Direction::A => "a",
            Direction::B => "b",
            Direction::C => "c",
            Direction::D => "d",
        }
    }

    /// Required Minkowski square: `a` is timelike, the others spacelike.
    fn norm(self) -> f64 {
        if self == Direction::A {
            1.0
        } else {
            -1.0
        }
    }
}

/// Four mutually orthogonal parameter vectors with `a·a = 1` and
/// `b·b = c·c = d·d = −1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub a: FourVector,
    pub b: FourVector,
    pub c: FourVector,
    pub d: FourVector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameViolation {
    pub condition: String,
    pub magnitude: f64,
}

/// Violated frame conditions; empty means the frame is valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FrameReport {
    pub violations: Vec<FrameViolation>,
}

impl FrameReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition.contains(condition))
    }
}

impl fmt::Display for FrameReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "frame valid");
        }
        for v in &self.violations {
            writeln!(f, "{} (off by {:.3e})", v.condition, v.magnitude)?;
        }
        Ok(())
    }
}

impl Frame {
    /// `a = e0, b = e1, c = e2, d = e3`.
    pub fn canonical() -> Self {
        Frame {
            a: FourVector::unit(0),
            b: FourVector::unit(1),
            c: FourVector::unit(2),
            d: FourVector::unit(3),
        }
    }

    pub fn get(&self, which: Direction) -> FourVector {
        match which {
            Direction::A => self.a,
            Direction::B => self.b,
            Direction::C => self.c,
            Direction::D => self.d,
        }
    }

    /// Checks the four normalizations and six orthogonality conditions;
    /// parallel pairs are additionally reported as duplicate directions.
    pub fn validate(&self, tol: f64) -> FrameReport {
        let mut violations = Vec::new();
        for k in Direction::ALL {
            let v = self.get(k);
            if !v.is_finite() {
                violations.push(FrameViolation {
                    condition: format!("{} has non-finite components", k.label()),
                    magnitude: f64::INFINITY,
                });
                continue;
            }
            let off = (mdot(&v, &v) - k.norm()).abs();
            if !(off <= tol) {
                violations.push(FrameViolation {
                    condition: format!("{0}{0} != {1}", k.label(), k.norm()),
                    magnitude: off,
                });
            }
        }
        for (i, p) in Direction::ALL.iter().enumerate() {
            for q in &Direction::ALL[i + 1..] {
                let (u, v) = (self.get(*p), self.get(*q));
                let off = mdot(&u, &v).abs();
                if !(off <= tol) {
                    violations.push(FrameViolation {
                        condition: format!("{}{} != 0", p.label(), q.label()),
                        magnitude: off,
                    });
                }
                let (nu, nv) = (u.euclid_norm_sq(), v.euclid_norm_sq());
                let e = u.euclid_dot(&v);
                let wedge = nu * nv - e * e;
                if nu > 0.0 && nv > 0.0 && wedge <= tol * nu * nv {
                    violations.push(FrameViolation {
                        condition: format!("duplicate direction: {} parallel to {}", p.label(), q.label()),
                        magnitude: wedge.max(0.0).sqrt(),
                    });
                }
            }
        }
        FrameReport { violations }
    }

    pub fn transformed(&self, l: &LorentzTransform) -> Frame {
        Frame { a: l.apply(&self.a), b: l.apply(&self.b), c: l.apply(&self.c), d: l.apply(&self.d) }
    }

    /// A valid frame obtained from the canonical one by a random rotation
    /// followed by a boost of rapidity at most `max_rapidity`.
    pub fn random_valid<R: Rng>(rng: &mut R, max_rapidity: f64) -> Frame {
        Frame::canonical().transformed(&LorentzTransform::random(rng, max_rapidity))
    }
}

/// Free-function spelling of [`Frame::validate`].
pub fn validate_frame(frame: &Frame, tol: f64) -> FrameReport {
    frame.validate(tol)
}

/// The contraction `p·x = p0 x0 − p1 x1 − p2 x2 − p3 x3` of a frame vector
/// with the coordinates, as an expression.
pub fn project(frame: &Frame, which: Direction) -> Expr {
    contract(&frame.get(which))
}

pub fn contract(p: &FourVector) -> Expr {
    Expr::sum((0..4).filter(|&i| p.0[i] != 0.0).map(|i| {
        Expr::float(METRIC[i] * p.0[i]) * Expr::var(COORDS[i])
    }))
}

/// A 4×4 matrix acting on contravariant components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzTransform(pub [[f64; 4]; 4]);

impl LorentzTransform {
    pub fn identity() -> Self {
        LorentzTransform(std::array::from_fn(|i| std::array::from_fn(|j| (i == j) as u8 as f64)))
    }

    /// Pure boost with the given rapidity along a (normalized) spatial direction.
    pub fn boost(rapidity: f64, direction: [f64; 3]) -> Self {
        let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        let n = direction.map(|c| c / norm);
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        let mut m = [[0.0; 4]; 4];
        m[0][0] = ch;
        for i in 0..3 {
            m[0][i + 1] = sh * n[i];
            m[i + 1][0] = sh * n[i];
            for j in 0..3 {
                m[i + 1][j + 1] = (i == j) as u8 as f64 + (ch - 1.0) * n[i] * n[j];
            }
        }
        LorentzTransform(m)
    }

    /// Spatial rotation by `angle` about `axis` (Rodrigues formula).
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
        let k = axis.map(|c| c / norm);
        let (s, c) = angle.sin_cos();
        let cross = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
        let mut m = LorentzTransform::identity().0;
        for i in 0..3 {
            for j in 0..3 {
                m[i + 1][j + 1] = c * ((i == j) as u8 as f64) + s * cross[i][j] + (1.0 - c) * k[i] * k[j];
            }
        }
        LorentzTransform(m)
    }

    pub fn random<R: Rng>(rng: &mut R, max_rapidity: f64) -> Self {
        let unit = |rng: &mut R| loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n2: f64 = v.iter().map(|c| c * c).sum();
            if n2 > 1e-4 && n2 <= 1.0 {
                return v;
            }
        };
        let axis = unit(rng);
        let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let dir = unit(rng);
        let eta = rng.gen_range(-max_rapidity..=max_rapidity);
        LorentzTransform::boost(eta, dir).compose(&LorentzTransform::rotation(axis, angle))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LorentzTransform) -> Self {
        LorentzTransform(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum())
        }))
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| (0..4).map(|k| self.0[i][k] * v.0[k]).sum()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn metric_signs() {
        let (e0, e3) = (FourVector::unit(0), FourVector::unit(3));
        assert_eq!(mdot(&e0, &e0), 1.0);
        assert_eq!(mdot(&e3, &e3), -1.0);
        assert_eq!(mdot(&e0, &e3), 0.0);
    }

    #[test]
    fn canonical_frame_is_valid() {
        assert!(Frame::canonical().validate(EXACT_FRAME_TOL).is_valid());
    }

    #[test]
    fn repeated_vector_is_reported() {
        let mut f = Frame::canonical();
        f.d = FourVector::new(0.0, 0.0, 1.0, 0.0);
        let r = f.validate(EXACT_FRAME_TOL);
        assert!(r.mentions("cd != 0"), "{r}");
        assert!(r.mentions("duplicate direction: c parallel to d"), "{r}");
    }

    #[test]
    fn boosted_frame_is_valid() {
        let (ch, sh) = (1f64.cosh(), 1f64.sinh());
        let f = Frame {
            a: FourVector::new(ch, sh, 0.0, 0.0),
            b: FourVector::new(sh, ch, 0.0, 0.0),
            c: FourVector::unit(2),
            d: FourVector::unit(3),
        };
        assert!(f.validate(EXACT_FRAME_TOL).is_valid(), "{}", f.validate(EXACT_FRAME_TOL));
        // contraction a·x = cosh(1) x0 − sinh(1) x1
        let ax = project(&f, Direction::A);
        let expected = Expr::float(ch) * Expr::var("x0") - Expr::float(sh) * Expr::var("x1");
        assert_eq!(ax, expected);
    }

    #[test]
    fn canonical_projections() {
        let f = Frame::canonical();
        assert_eq!(project(&f, Direction::A), parse("x0").unwrap());
        assert_eq!(project(&f, Direction::D), parse("-x3").unwrap());
        assert_eq!(project(&f, Direction::D).to_string(), "-x3");
    }

    #[test]
    fn random_transforms_preserve_the_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let l = LorentzTransform::random(&mut rng, 1.5);
            for i in 0..4 {
                for j in 0..4 {
                    let (u, v) = (FourVector::unit(i), FourVector::unit(j));
                    let lhs = mdot(&l.apply(&u), &l.apply(&v));
                    assert!((lhs - mdot(&u, &v)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn frame_json_shape() {
        let s = serde_json::to_string(&Frame::canonical()).unwrap();
        assert_eq!(
            s,
            r#"{"a":[1.0,0.0,0.0,0.0],"b":[0.0,1.0,0.0,0.0],"c":[0.0,0.0,1.0,0.0],"d":[0.0,0.0,0.0,1.0]}"#
        );
        let back: Frame = serde_json::from_str(&s).unwrap();
        assert_eq!(back, Frame::canonical());
    }
}
