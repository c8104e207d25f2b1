//! The unified construction engine shared by the solution families.
//!
//! Every quadrature-based family fits one template. Pin a particular
//! solution of the Riccati equation of the form
//!
//! ```text
//! u_p = k b(x) + w(x),        b = d ln m/dx, k in {0, 1/2, 1}
//! ```
//!
//! force the coefficient a(x) (hence V) from the consistency identity
//! `a = u_p' - b u_p + u_p^2`, and solve the remaining Bernoulli equation
//! `v' = (b - 2 u_p) v - v^2` by quadrature:
//!
//! ```text
//! v = e^R / (C + int e^R),    R = int (b - 2 u_p)
//! psi = psi0 e^{int u_p} [ C + int e^R ]
//! ```
//!
//! The `k b` part of every exponent integrates exactly to `k ln(m/m0)`, so
//! only `int w` is done numerically. The bracket `W = C + int e^R` is
//! monotone, so it has at most one zero; `u = u_p + v` gets a masked guard
//! band there while `psi`, which merely vanishes at the zero, stays valid.

use crate::grid::{DerivOrder, Samples};
use crate::pdm::{PhysicalSetup, PoleInfo, RiccatiCoefficients, PSI_POLE_THRESHOLD};

use super::BuildError;

/// Half-width, in grid steps, of the mask around a Bernoulli-denominator
/// zero. At distance d = G h from a pole of u the finite-difference
/// residual picks up an error of order (h/d)^4 relative to the retained
/// near-pole magnitude u^2 ~ 1/d^2, so G = 80 pins that contribution near
/// 1e-7 independent of h. One window is at most 2*80 + 2 points, under 5%
/// of a 4001-point production grid.
pub(crate) const POLE_GUARD_STEPS: usize = 80;

/// Inputs to one engine run. All samples share one grid and are fully
/// valid unless stated otherwise.
pub(crate) struct EngineInput<'a> {
    pub m: &'a Samples,
    /// d ln m/dx.
    pub b: &'a Samples,
    /// Symbolic db/dx when available; finite differences otherwise.
    /// Ignored when `k == 0`.
    pub b_prime: Option<&'a Samples>,
    pub k: f64,
    pub w: &'a Samples,
    /// Symbolic dw/dx when available.
    pub w_prime: Option<&'a Samples>,
    /// The Bernoulli constant (one of the two free constants; psi0 is the
    /// other).
    pub bernoulli_c: f64,
    pub psi0: f64,
    pub setup: PhysicalSetup,
}

pub(crate) struct EngineOutput {
    pub coeffs: RiccatiCoefficients,
    pub v_pot: Samples,
    pub u: Samples,
    pub psi: Samples,
    pub dpsi0: f64,
    pub pole: Option<PoleInfo>,
}

pub(crate) fn run(input: EngineInput<'_>) -> Result<EngineOutput, BuildError> {
    let grid = input.m.grid();
    let n = grid.len();
    let e = input.setup.energy;
    let hbar2 = input.setup.hbar * input.setup.hbar;

    // u_p = k b + w and its derivative
    let u_p = input.b.zip_with(input.w, |bv, wv| input.k * bv + wv);
    let w_prime = match input.w_prime {
        Some(d) => d.clone(),
        None => input.w.derivative_fd_masked(DerivOrder::First),
    };
    let du_p = if input.k == 0.0 {
        w_prime
    } else {
        let b_prime = match input.b_prime {
            Some(d) => d.clone(),
            None => input.b.derivative_fd_masked(DerivOrder::First),
        };
        b_prime.zip_with(&w_prime, |bp, wp| input.k * bp + wp)
    };

    // consistency: a = u_p' - b u_p + u_p^2, V = E + hbar^2 a / (2m)
    let a = {
        let mut a = Samples::constant(grid, 0.0);
        for i in 0..n {
            if du_p.is_valid(i) && u_p.is_valid(i) && input.b.is_valid(i) {
                let up = u_p.value(i);
                a.set_value(i, du_p.value(i) - input.b.value(i) * up + up * up);
            } else {
                a.invalidate(i);
            }
        }
        a
    };
    let v_pot = a.zip_with(input.m, |av, mv| e + hbar2 * av / (2.0 * mv));

    // exponents: int u_p = k ln(m/m0) + K, rate = b - 2 u_p
    let big_k = input.w.cumulative_integral(0)?;
    let m0 = input.m.value(0);
    let mut prefactor = Samples::constant(grid, 0.0); // e^{int u_p}
    let mut exp_r = Samples::constant(grid, 0.0); // e^{int (b - 2 u_p)}
    for i in 0..n {
        let mfrac = input.m.value(i) / m0;
        let pf = mfrac.powf(input.k) * big_k.value(i).exp();
        let er = mfrac.powf(1.0 - 2.0 * input.k) * (-2.0 * big_k.value(i)).exp();
        if !pf.is_finite() || !er.is_finite() {
            return Err(BuildError::Overflow {
                what: format!("exponent blow-up at x = {}", grid.x(i)),
            });
        }
        prefactor.set_value(i, pf);
        exp_r.set_value(i, er);
    }

    let w_int = exp_r.cumulative_integral(0)?;
    let w_total = w_int.map(|v| input.bernoulli_c + v);

    // psi in product form; a zero of W is a zero of psi, not a failure
    let psi = prefactor.zip_with(&w_total, |pf, wv| input.psi0 * pf * wv);
    for (i, v) in psi.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(BuildError::Overflow {
                what: format!("psi overflow at x = {}", grid.x(i)),
            });
        }
    }

    let (u, pole) = attach_bernoulli(&u_p, &exp_r, &w_total);
    // psi'(x_min) = psi0 (u_p W + e^R) at the anchor, where the prefactor
    // is exactly 1
    let dpsi0 = input.psi0 * (u_p.value(0) * w_total.value(0) + exp_r.value(0));

    Ok(EngineOutput {
        coeffs: RiccatiCoefficients {
            a,
            b: input.b.clone(),
        },
        v_pot,
        u,
        psi,
        dpsi0,
        pole,
    })
}

/// u = u_p + e^R / W with the pole window around any zero of W masked.
///
/// W is monotone (its derivative e^R is positive), so there is at most
/// one zero. The trigger is the sign change itself, not an amplitude
/// threshold: W can legitimately span many orders of magnitude when the
/// Bernoulli rate grows, and a max-relative cutoff would swallow a wide
/// band. [`PSI_POLE_THRESHOLD`] scaled by the local slope catches the
/// grazing case where W touches zero without a strict sign flip.
pub(crate) fn attach_bernoulli(
    u_p: &Samples,
    exp_r: &Samples,
    w_total: &Samples,
) -> (Samples, Option<PoleInfo>) {
    let grid = u_p.grid();
    let n = grid.len();
    let h = grid.spacing();
    let mut kill = vec![false; n];
    let mut hit_lo = usize::MAX;
    let mut hit_hi = 0usize;
    let mut mark = |i: usize| {
        hit_lo = hit_lo.min(i);
        hit_hi = hit_hi.max(i);
    };
    for i in 0..n {
        // local zero scale: one step of the monotone ramp
        if w_total.value(i).abs() < PSI_POLE_THRESHOLD * exp_r.value(i) * h {
            mark(i);
        }
        if i + 1 < n && w_total.value(i) * w_total.value(i + 1) < 0.0 {
            mark(i);
            mark(i + 1);
        }
    }
    let pole = if hit_lo != usize::MAX {
        let lo = hit_lo.saturating_sub(POLE_GUARD_STEPS);
        let hi = (hit_hi + POLE_GUARD_STEPS).min(n - 1);
        for k in kill.iter_mut().take(hi + 1).skip(lo) {
            *k = true;
        }
        Some(PoleInfo {
            index_lo: lo,
            index_hi: hi,
            x_lo: grid.x(lo),
            x_hi: grid.x(hi),
        })
    } else {
        None
    };
    let mut u = Samples::constant(grid, 0.0);
    for (i, killed) in kill.iter().enumerate() {
        if *killed || !u_p.is_valid(i) {
            u.invalidate(i);
        } else {
            u.set_value(i, u_p.value(i) + exp_r.value(i) / w_total.value(i));
        }
    }
    (u, pole)
}
