//! Independent initial-value oracle for the mass-dependent Schrodinger ODE
//!
//!   psi'' - (d ln m/dx) psi' + (2 m / hbar^2) (E - V) psi = 0,
//!
//! integrated as a first-order system with classical RK4, sub-stepped ten
//! times finer than the grid. Coefficients are known only at grid points;
//! sub-step values come from 4-point cubic interpolation. The oracle
//! shares nothing with the quadrature-based constructions except the
//! (m, V) samples and the initial data, which is what makes the
//! agreement check meaningful.

use super::{DerivOrder, GridError, Samples};

const SUBSTEPS: usize = 10;
const OVERFLOW_LIMIT: f64 = 1e300;

/// Result of the RK4 integration. On divergence, `psi` is masked from the
/// first bad grid point onward and `diverged_at` names the last index that
/// still holds a finite value.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub psi: Samples,
    pub diverged_at: Option<usize>,
}

impl OdeSolution {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Cubic (4-point Lagrange) interpolation of uniformly sampled
/// coefficients at an arbitrary abscissa.
fn interp_cubic(values: &[f64], x_min: f64, h: f64, t: f64) -> f64 {
    let n = values.len();
    let pos = (t - x_min) / h;
    let i = pos.floor() as isize;
    let k0 = (i - 1).clamp(0, n as isize - 4) as usize;
    let s = pos - k0 as f64;
    let w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    let w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    let w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    let w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    w0 * values[k0] + w1 * values[k0 + 1] + w2 * values[k0 + 2] + w3 * values[k0 + 3]
}

/// Integrate the ODE from the left grid edge given Cauchy data
/// (psi0, dpsi0) at x_min. `m` must be strictly positive everywhere.
pub fn ode_oracle(
    m: &Samples,
    v: &Samples,
    energy: f64,
    hbar: f64,
    psi0: f64,
    dpsi0: f64,
) -> Result<OdeSolution, GridError> {
    assert_eq!(m.grid(), v.grid(), "m and V must share a grid");
    m.require_fully_valid()?;
    v.require_fully_valid()?;
    for (i, &mv) in m.values().iter().enumerate() {
        if mv <= 0.0 {
            return Err(GridError::NonPositiveMass {
                x: m.grid().x(i),
                value: mv,
            });
        }
    }
    let grid = m.grid();
    let n = grid.len();
    let h = grid.spacing();
    // b = d ln m/dx from the samples alone (4th-order stencils), so the
    // oracle never sees the symbolic machinery
    let log_m = m.map(f64::ln);
    let b = log_m.derivative_fd(DerivOrder::First)?;
    // q = (2 m / hbar^2)(E - V)
    let pref = 2.0 / (hbar * hbar);
    let q = m.zip_with(v, |mv, vv| pref * mv * (energy - vv));

    let x_min = grid.x_min();
    let b_vals = b.values();
    let q_vals = q.values();
    let rhs = |t: f64, psi: f64, dpsi: f64| -> (f64, f64) {
        let bt = interp_cubic(b_vals, x_min, h, t);
        let qt = interp_cubic(q_vals, x_min, h, t);
        (dpsi, bt * dpsi - qt * psi)
    };

    let dt = h / SUBSTEPS as f64;
    let mut psi = psi0;
    let mut dpsi = dpsi0;
    let mut out = Samples::constant(grid, 0.0);
    out.values[0] = psi;
    let mut diverged_at = None;
    'outer: for cell in 0..n - 1 {
        let x_cell = grid.x(cell);
        for j in 0..SUBSTEPS {
            let t = x_cell + j as f64 * dt;
            let (k1p, k1d) = rhs(t, psi, dpsi);
            let (k2p, k2d) = rhs(t + dt / 2.0, psi + dt / 2.0 * k1p, dpsi + dt / 2.0 * k1d);
            let (k3p, k3d) = rhs(t + dt / 2.0, psi + dt / 2.0 * k2p, dpsi + dt / 2.0 * k2d);
            let (k4p, k4d) = rhs(t + dt, psi + dt * k3p, dpsi + dt * k3d);
            psi += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            dpsi += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            if !psi.is_finite() || !dpsi.is_finite() || psi.abs() > OVERFLOW_LIMIT {
                diverged_at = Some(cell);
                for k in cell + 1..n {
                    out.invalidate(k);
                }
                break 'outer;
            }
        }
        out.values[cell + 1] = psi;
    }
    Ok(OdeSolution {
        psi: out,
        diverged_at,
    })
}
