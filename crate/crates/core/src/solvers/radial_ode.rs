//! `−φ'' − φ'/y = F(φ)`, integrated as a first-order system with RK4.
//!
//! Starting at the axis `y = 0` requires `φ'(0) = 0`; the first step then
//! uses the regular expansion `φ = φ0 + c2 y² + c4 y⁴` with
//! `c2 = −F(φ0)/4` and `c4 = F'(φ0) F(φ0)/64`.

use ndarray::Array2;

use super::{step_count, GridSolution, Rhs, SolverError, SolverMeta};
use crate::expr::EvalError;

pub struct RadialOdeProblem {
    pub rhs: Rhs,
    pub y0: f64,
    pub phi0: f64,
    pub dphi0: f64,
    /// May lie on either side of `y0`, but the interval must not contain
    /// the axis except as its starting point.
    pub y_end: f64,
    pub h: f64,
    /// Allowed disagreement between the series start and the integrator.
    pub start_tol: f64,
}

impl RadialOdeProblem {
    pub fn new(rhs: Rhs, y0: f64, phi0: f64, dphi0: f64, y_end: f64, h: f64) -> Self {
        RadialOdeProblem { rhs, y0, phi0, dphi0, y_end, h, start_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialSolution {
    pub y: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub meta: SolverMeta,
}

impl RadialSolution {
    /// Repeats the profile along `z ∈ [z0, z1]`, ordering `y` ascending.
    pub fn to_grid(&self, z_range: (f64, f64), nz: usize) -> GridSolution {
        let ascending = self.y.len() < 2 || self.y[1] > self.y[0];
        let order: Vec<usize> = if ascending {
            (0..self.y.len()).collect()
        } else {
            (0..self.y.len()).rev().collect()
        };
        let nz = nz.max(2);
        let hz = (z_range.1 - z_range.0) / (nz - 1) as f64;
        let values = Array2::from_shape_fn((order.len(), nz), |(i, _)| self.phi[order[i]]);
        let hy = if self.y.len() > 1 { (self.y[1] - self.y[0]).abs() } else { 1.0 };
        GridSolution::new(self.y[order[0]], z_range.0, hy, hz, values, self.meta.clone())
    }
}

fn accel(rhs: &Rhs, y: f64, phi: f64, p: f64) -> Result<f64, EvalError> {
    Ok(-rhs.value(phi, y, 0.0)? - p / y)
}

fn rk4(rhs: &Rhs, y: f64, h: f64, phi: f64, p: f64) -> Result<(f64, f64), EvalError> {
    let k1 = (p, accel(rhs, y, phi, p)?);
    let k2 = (p + 0.5 * h * k1.1, accel(rhs, y + 0.5 * h, phi + 0.5 * h * k1.0, p + 0.5 * h * k1.1)?);
    let k3 = (p + 0.5 * h * k2.1, accel(rhs, y + 0.5 * h, phi + 0.5 * h * k2.0, p + 0.5 * h * k2.1)?);
    let k4 = (p + h * k3.1, accel(rhs, y + h, phi + h * k3.0, p + h * k3.1)?);
    Ok((
        phi + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        p + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    ))
}

pub fn solve_radial_ode(pr: &RadialOdeProblem) -> Result<RadialSolution, SolverError> {
    if pr.rhs.expr.free_vars().contains("z") {
        return Err(SolverError::ForeignVariable("z".into()));
    }
    let (y0, y1) = (pr.y0, pr.y_end);
    if y0 != 0.0 && (y0 * y1 <= 0.0) {
        return Err(SolverError::Setup(format!("interval [{y0}, {y1}] reaches the axis y = 0")));
    }
    let n = step_count((y1 - y0).abs(), pr.h)?;
    let h = (y1 - y0) / n as f64;
    let mut ys = Vec::with_capacity(n + 1);
    let mut phi = Vec::with_capacity(n + 1);
    let mut dphi = Vec::with_capacity(n + 1);
    ys.push(y0);
    phi.push(pr.phi0);
    dphi.push(pr.dphi0);
    let mut start = 0;
    if y0 == 0.0 {
        if pr.dphi0 != 0.0 {
            return Err(SolverError::Setup("a start on the axis needs phi'(0) = 0".into()));
        }
        if !pr.rhs.is_autonomous() {
            return Err(SolverError::Setup("a start on the axis needs F independent of y".into()));
        }
        let f0 = pr.rhs.value(pr.phi0, 0.0, 0.0)?;
        let c2 = -f0 / 4.0;
        let c4 = pr.rhs.derivative(pr.phi0, 0.0, 0.0)? * f0 / 64.0;
        let series = |t: f64| (pr.phi0 + c2 * t * t + c4 * t.powi(4), 2.0 * c2 * t + 4.0 * c4 * t.powi(3));
        let (half_phi, half_p) = series(0.5 * h);
        let (via_rk, _) = rk4(&pr.rhs, 0.5 * h, 0.5 * h, half_phi, half_p)?;
        let (direct, dp) = series(h);
        let disagreement = (via_rk - direct).abs();
        if !(disagreement <= pr.start_tol * direct.abs().max(1.0)) {
            return Err(SolverError::StartStep { disagreement });
        }
        ys.push(h);
        phi.push(direct);
        dphi.push(dp);
        start = 1;
    }
    for k in start..n {
        let y = y0 + k as f64 * h;
        let (f, p) = rk4(&pr.rhs, y, h, phi[k], dphi[k])?;
        if !(f.is_finite() && p.is_finite()) {
            return Err(SolverError::BlowUp { last_stable: k });
        }
        ys.push(y0 + (k + 1) as f64 * h);
        phi.push(f);
        dphi.push(p);
    }
    let meta = SolverMeta { scheme: "rk4".into(), cfl: None, iterations: Some(n), residual_history: Vec::new() };
    Ok(RadialSolution { y: ys, phi, dphi, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn rhs(s: &str) -> Rhs {
        Rhs::new(&parse(s).unwrap()).unwrap()
    }

    /// J0 from its power series.
    fn j0(y: f64) -> f64 {
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        let q = -(y * y) / 4.0;
        for k in 1..80 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn homogeneous_log_solution() {
        let sol = solve_radial_ode(&RadialOdeProblem::new(rhs("0"), 1.0, 2.0, 3.0, 10.0, 0.01)).unwrap();
        for (y, v) in sol.y.iter().zip(&sol.phi) {
            assert!((v - (2.0 + 3.0 * y.ln())).abs() < 1e-8);
        }
    }

    #[test]
    fn bessel_from_the_axis() {
        let sol = solve_radial_ode(&RadialOdeProblem::new(rhs("phi"), 0.0, 1.0, 0.0, 10.0, 0.01)).unwrap();
        let err = sol.y.iter().zip(&sol.phi).map(|(y, v)| (v - j0(*y)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn constant_and_negative_direction() {
        let sol = solve_radial_ode(&RadialOdeProblem::new(rhs("0"), 2.0, 5.0, 0.0, 4.0, 0.1)).unwrap();
        assert!(sol.phi.iter().all(|v| *v == 5.0));
        let back = solve_radial_ode(&RadialOdeProblem::new(rhs("0"), -1.0, 0.0, 1.0, -3.0, 0.01)).unwrap();
        let last = back.y.len() - 1;
        assert!((back.y[last] + 3.0).abs() < 1e-12);
        assert!((back.phi[last] + 3f64.ln()).abs() < 1e-8);
        let grid = back.to_grid((0.0, 1.0), 3);
        assert_eq!(grid.y0, -3.0);
        assert!((grid.values[(0, 2)] + 3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn start_problems_are_reported() {
        assert!(solve_radial_ode(&RadialOdeProblem::new(rhs("0"), -1.0, 0.0, 0.0, 1.0, 0.1)).is_err());
        assert!(solve_radial_ode(&RadialOdeProblem::new(rhs("0"), 0.0, 0.0, 1.0, 1.0, 0.1)).is_err());
        let coarse = RadialOdeProblem::new(rhs("exp(phi)"), 0.0, 0.0, 0.0, 4.0, 1.0);
        assert!(matches!(solve_radial_ode(&coarse), Err(SolverError::StartStep { .. })));
    }
}
