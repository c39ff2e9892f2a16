//! Pointwise Newton–Gauss–Seidel for `−φ_yy − φ_zz = F(φ, y, z)` on a
//! rectangle with Dirichlet data.

use ndarray::Array2;

use super::{step_count, Field, GridSolution, Rhs, SolverError, SolverMeta};

pub struct EllipticProblem {
    pub rhs: Rhs,
    pub y_range: (f64, f64),
    pub z_range: (f64, f64),
    pub hy: f64,
    pub hz: f64,
    pub boundary: Field,
    /// Stop when the largest update of a sweep falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub omega: f64,
}

impl EllipticProblem {
    pub fn new(rhs: Rhs, y_range: (f64, f64), z_range: (f64, f64), h: f64, boundary: Field) -> Self {
        EllipticProblem {
            rhs,
            y_range,
            z_range,
            hy: h,
            hz: h,
            boundary,
            tol: 1e-10,
            max_iter: 20_000,
            omega: 1.0,
        }
    }

    /// The classical optimal SOR factor for the Laplacian on this grid.
    pub fn optimal_omega(&self) -> f64 {
        let ny = ((self.y_range.1 - self.y_range.0) / self.hy).round().max(2.0);
        let nz = ((self.z_range.1 - self.z_range.0) / self.hz).round().max(2.0);
        let rho = 0.5 * ((std::f64::consts::PI / ny).cos() + (std::f64::consts::PI / nz).cos());
        2.0 / (1.0 + (1.0 - rho * rho).sqrt())
    }
}

pub fn solve_elliptic(p: &EllipticProblem) -> Result<GridSolution, SolverError> {
    if !(p.omega > 0.0 && p.omega < 2.0) {
        return Err(SolverError::Setup(format!("omega must lie in (0, 2), got {}", p.omega)));
    }
    let cy = step_count(p.y_range.1 - p.y_range.0, p.hy)?;
    let cz = step_count(p.z_range.1 - p.z_range.0, p.hz)?;
    let hy = (p.y_range.1 - p.y_range.0) / cy as f64;
    let hz = (p.z_range.1 - p.z_range.0) / cz as f64;
    let (ny, nz) = (cy + 1, cz + 1);
    let ys: Vec<f64> = (0..ny).map(|i| p.y_range.0 + i as f64 * hy).collect();
    let zs: Vec<f64> = (0..nz).map(|j| p.z_range.0 + j as f64 * hz).collect();
    let mut phi = Array2::<f64>::zeros((ny, nz));
    for i in 0..ny {
        for j in 0..nz {
            if i == 0 || j == 0 || i == ny - 1 || j == nz - 1 {
                phi[(i, j)] = (p.boundary)(ys[i], zs[j]);
            }
        }
    }
    if !phi.iter().all(|v| v.is_finite()) {
        return Err(SolverError::Setup("boundary data is not finite".into()));
    }
    let (ay, az) = (1.0 / (hy * hy), 1.0 / (hz * hz));
    let diag = 2.0 * (ay + az);
    let mut history = Vec::new();
    for iter in 1..=p.max_iter {
        let mut max_update = 0.0f64;
        let mut max_residual = 0.0f64;
        for i in 1..ny - 1 {
            for j in 1..nz - 1 {
                let c = phi[(i, j)];
                let nb = ay * (phi[(i - 1, j)] + phi[(i + 1, j)]) + az * (phi[(i, j - 1)] + phi[(i, j + 1)]);
                let g = diag * c - nb - p.rhs.value(c, ys[i], zs[j])?;
                let dg = diag - p.rhs.derivative(c, ys[i], zs[j])?;
                if !(dg.abs() > 1e-300) {
                    return Err(SolverError::Setup(format!("singular Newton step at y = {}, z = {}", ys[i], zs[j])));
                }
                let delta = -p.omega * g / dg;
                phi[(i, j)] = c + delta;
                max_update = max_update.max(delta.abs());
                max_residual = max_residual.max(g.abs());
            }
        }
        history.push(max_residual);
        if !max_update.is_finite() {
            return Err(SolverError::BlowUp { last_stable: iter - 1 });
        }
        if max_update < p.tol {
            let meta = SolverMeta {
                scheme: "newton-gauss-seidel".into(),
                cfl: None,
                iterations: Some(iter),
                residual_history: history,
            };
            return Ok(GridSolution::new(ys[0], zs[0], hy, hz, phi, meta));
        }
        if iter == p.max_iter {
            return Err(SolverError::NotConverged { iterations: iter, last_update: max_update, residual_history: history });
        }
    }
    unreachable!("loop returns on its last iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::sync::Arc;

    fn rhs(s: &str) -> Rhs {
        Rhs::new(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn harmonic_boundary_is_reproduced() {
        let g: Field = Arc::new(|y, z| y * y - z * z);
        let mut p = EllipticProblem::new(rhs("0"), (-1.0, 1.0), (-1.0, 1.0), 1.0 / 16.0, g.clone());
        p.omega = p.optimal_omega();
        let sol = solve_elliptic(&p).unwrap();
        assert!(sol.max_error(|y, z| g(y, z)) < 1e-6);
    }

    #[test]
    fn nonlinear_manufactured_solution() {
        // φ* = sin y sin z, F = 2 φ* + φ³ − φ*³ has φ* as a solution
        let exact: Field = Arc::new(|y: f64, z: f64| y.sin() * z.sin());
        let f = rhs("2*sin(y)*sin(z) + phi^3 - (sin(y)*sin(z))^3");
        let mut p = EllipticProblem::new(f, (0.0, 1.0), (0.0, 1.0), 1.0 / 64.0, exact.clone());
        p.omega = p.optimal_omega();
        let sol = solve_elliptic(&p).unwrap();
        assert!(sol.max_error(|y, z| exact(y, z)) < 1e-4);
        assert!(sol.meta.residual_history.len() == sol.meta.iterations.unwrap());
    }

    #[test]
    fn zero_problem_is_zero() {
        let p = EllipticProblem::new(rhs("0"), (0.0, 1.0), (0.0, 2.0), 0.1, Arc::new(|_, _| 0.0));
        let sol = solve_elliptic(&p).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
        assert_eq!(sol.values.dim(), (11, 21));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut p = EllipticProblem::new(rhs("1"), (0.0, 1.0), (0.0, 1.0), 0.05, Arc::new(|_, _| 0.0));
        p.max_iter = 3;
        match solve_elliptic(&p) {
            Err(SolverError::NotConverged { iterations, residual_history, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(residual_history.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
