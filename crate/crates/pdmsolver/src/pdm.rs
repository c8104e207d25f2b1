//! Core machinery of the position-dependent-mass problem: the
//! kinetic-ordering effective potential, the Riccati coefficient map, the
//! log-derivative (Cole-Hopf) transform in both directions, and the two
//! residual functionals that adjudicate every downstream claim.
//!
//! Conventions, used everywhere:
//!
//! ```text
//! Schrodinger:  psi'' - b(x) psi' + (2m/hbar^2)(E - V) psi = 0
//! Riccati:      u' = a(x) + b(x) u + c u^2,   c = -1
//!               a = 2m(V - E)/hbar^2,  b = d ln m/dx,  u = psi'/psi
//! ```
//!
//! Residuals are relative L-infinity norms over valid points; the
//! theorems claim pointwise exactness and the max norm exposes localized
//! sign errors that an L2 average would wash out.

use crate::expr::{Expr, Params};
use crate::families::FamilySpec;
use crate::grid::{sample, DerivOrder, Grid, GridError, Samples};

/// The Riccati quadratic coefficient is fixed to -1 by the Cole-Hopf step.
pub const RICCATI_C: f64 = -1.0;

/// Relative |psi| threshold below which the log-derivative is masked.
/// Keeps u finite while discarding well under 1% of points in practice.
pub const PSI_POLE_THRESHOLD: f64 = 1e-8;

/// Extra points masked on each side of a psi sign change before dividing.
const LOGDERIV_GUARD_STEPS: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdmError {
    #[error("mass must be strictly positive on the grid (m({x}) = {value})")]
    NonPositiveMass { x: f64, value: f64 },
    #[error("hbar must be positive (got {0})")]
    HbarNotPositive(f64),
    #[error("no valid points to take a norm over")]
    NoValidPoints,
    #[error("fewer than half of the points are valid ({valid} of {total})")]
    TooFewValidPoints { valid: usize, total: usize },
    #[error("psi0 must be nonzero")]
    ZeroPsi0,
    #[error("exponent overflow while reconstructing psi ({what})")]
    Overflow { what: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
}

/// Physical constants of a run: hbar (natural units by default) and the
/// energy E. All formulas keep hbar explicit so SI-style runs work.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhysicalSetup {
    pub hbar: f64,
    pub energy: f64,
}

impl PhysicalSetup {
    pub fn new(hbar: f64, energy: f64) -> Result<PhysicalSetup, PdmError> {
        if !hbar.is_finite() || !energy.is_finite() || hbar <= 0.0 {
            return Err(PdmError::HbarNotPositive(hbar));
        }
        Ok(PhysicalSetup { hbar, energy })
    }

    /// Natural units, hbar = 1.
    pub fn natural(energy: f64) -> PhysicalSetup {
        PhysicalSetup { hbar: 1.0, energy }
    }
}

/// Kinetic-operator ordering ambiguity parameters. The third parameter is
/// implied by the constraint alpha + beta + gamma = -1, so the constraint
/// holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl OrderingParams {
    pub fn new(alpha: f64, gamma: f64) -> OrderingParams {
        OrderingParams { alpha, gamma }
    }

    /// The implied von Roos beta, -1 - alpha - gamma. (Unrelated to the
    /// Case 1 constant, which is named `beta_c` to avoid the collision.)
    pub fn beta_vr(&self) -> f64 {
        -1.0 - self.alpha - self.gamma
    }
}

/// True iff the ordering kills the effective potential identically:
/// 1 - alpha - gamma = 0 and alpha*gamma + alpha + gamma - 1 = 0, i.e.
/// exactly (alpha, gamma) in {(0, 1), (1, 0)}.
pub fn ordering_vanishes(ord: OrderingParams) -> bool {
    let first = 1.0 - ord.alpha - ord.gamma;
    let second = ord.alpha * ord.gamma + ord.alpha + ord.gamma - 1.0;
    first == 0.0 && second == 0.0
}

/// The mass-derivative effective potential generated by the ordering
/// choice:
///
/// ```text
/// U_k = hbar^2/(4 m^3) [ (1 - alpha - gamma) (m/2) m''
///                        + (alpha gamma + alpha + gamma - 1) (m')^2 ]
/// ```
///
/// computed with symbolic m' and m''.
pub fn effective_potential_uk(
    m: &Expr,
    ord: OrderingParams,
    hbar: f64,
    grid: Grid,
    params: &Params,
) -> Result<Samples, PdmError> {
    let m_s = sample_positive_mass(m, grid, params)?;
    let m1 = sample(&m.differentiate(1), grid, params)?;
    let m2 = sample(&m.differentiate(2), grid, params)?;
    let c1 = 1.0 - ord.alpha - ord.gamma;
    let c2 = ord.alpha * ord.gamma + ord.alpha + ord.gamma - 1.0;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let mv = m_s.value(i);
        let term = c1 * (mv / 2.0) * m2.value(i) + c2 * m1.value(i) * m1.value(i);
        values.push(hbar * hbar / (4.0 * mv.powi(3)) * term);
    }
    Ok(Samples::new(grid, values))
}

/// Riccati coefficients a(x), b(x) for a symbolic mass and sampled
/// potential; c is identically [`RICCATI_C`].
#[derive(Debug, Clone)]
pub struct RiccatiCoefficients {
    pub a: Samples,
    pub b: Samples,
}

impl RiccatiCoefficients {
    pub fn c(&self) -> f64 {
        RICCATI_C
    }
}

/// Sample a mass profile and reject non-positive values anywhere.
pub(crate) fn sample_positive_mass(
    m: &Expr,
    grid: Grid,
    params: &Params,
) -> Result<Samples, PdmError> {
    let s = sample(m, grid, params)?;
    for i in 0..s.len() {
        if s.is_valid(i) && s.value(i) <= 0.0 {
            return Err(PdmError::NonPositiveMass {
                x: grid.x(i),
                value: s.value(i),
            });
        }
    }
    if !s.is_fully_valid() {
        // a mass with domain holes is as unusable as a negative one
        let i = (0..s.len()).find(|&i| !s.is_valid(i)).unwrap();
        return Err(PdmError::NonPositiveMass {
            x: grid.x(i),
            value: f64::NAN,
        });
    }
    Ok(s)
}

/// Symbolic d ln m / dx as an expression (m'/m, simplified).
pub(crate) fn log_derivative_expr(m: &Expr) -> Expr {
    m.differentiate(1).div(m.clone()).simplify()
}

/// Extract a = 2m(V - E)/hbar^2 and b = d ln m/dx (symbolically) on the
/// potential's grid.
pub fn riccati_coefficients(
    m: &Expr,
    v: &Samples,
    setup: PhysicalSetup,
    params: &Params,
) -> Result<RiccatiCoefficients, PdmError> {
    let grid = v.grid();
    let m_s = sample_positive_mass(m, grid, params)?;
    let b = sample(&log_derivative_expr(m), grid, params)?;
    let pref = 2.0 / (setup.hbar * setup.hbar);
    let a = m_s.zip_with(v, |mv, vv| pref * mv * (vv - setup.energy));
    Ok(RiccatiCoefficients { a, b })
}

/// psi = psi0 exp(int_{x_min}^x u), the forward Cole-Hopf map. Fails on
/// exponent overflow rather than returning infinities.
pub fn wavefunction_from_logderivative(u: &Samples, psi0: f64) -> Result<Samples, PdmError> {
    if psi0 == 0.0 {
        return Err(PdmError::ZeroPsi0);
    }
    let integral = u.cumulative_integral(0)?;
    let limit = 700.0; // exp(710) overflows f64
    if integral.max_abs() > limit {
        return Err(PdmError::Overflow {
            what: format!("max |int u| = {:.3}", integral.max_abs()),
        });
    }
    Ok(integral.map(|f| psi0 * f.exp()))
}

/// u = psi'/psi, the inverse Cole-Hopf map. Points where |psi| falls
/// below [`PSI_POLE_THRESHOLD`] relative to max |psi|, and a small guard
/// band around each sign change, are masked invalid; fails when fewer
/// than half of the points survive.
pub fn logderivative(psi: &Samples) -> Result<Samples, PdmError> {
    let n = psi.len();
    if psi.max_abs() == 0.0 {
        return Err(PdmError::TooFewValidPoints { valid: 0, total: n });
    }
    let dpsi = psi.derivative_fd_masked(DerivOrder::First);
    let floor = PSI_POLE_THRESHOLD * psi.max_abs();
    let mut kill: Vec<bool> = (0..n)
        .map(|i| {
            !psi.is_valid(i)
                || !dpsi.is_valid(i)
                || psi.value(i) == 0.0
                || psi.value(i).abs() < floor
        })
        .collect();
    for i in 0..n - 1 {
        if psi.is_valid(i)
            && psi.is_valid(i + 1)
            && psi.value(i) != 0.0
            && psi.value(i).signum() != psi.value(i + 1).signum()
        {
            let lo = i.saturating_sub(LOGDERIV_GUARD_STEPS);
            let hi = (i + 1 + LOGDERIV_GUARD_STEPS).min(n - 1);
            for k in kill.iter_mut().take(hi + 1).skip(lo) {
                *k = true;
            }
        }
    }
    let mut u = Samples::constant(psi.grid(), 0.0);
    let mut valid = 0usize;
    for (i, killed) in kill.iter().enumerate() {
        if *killed {
            u.invalidate(i);
        } else {
            u.set_value(i, dpsi.value(i) / psi.value(i));
            valid += 1;
        }
    }
    if valid * 2 < n {
        return Err(PdmError::TooFewValidPoints { valid, total: n });
    }
    Ok(u)
}

/// Relative L-infinity residual of u' = a + b u - u^2, with u'
/// approximated by mask-aware finite differences and the norm taken over
/// points valid in every operand. Normalized by max(1, ||a||, ||u||^2) so
/// exact particular solutions score at discretization level regardless of
/// coefficient size.
pub fn riccati_residual(u: &Samples, rc: &RiccatiCoefficients) -> Result<f64, PdmError> {
    let du = u.derivative_fd_masked(DerivOrder::First);
    riccati_residual_with_derivative(u, &du, rc)
}

/// Same residual with a caller-supplied derivative (closed forms use this
/// to stay at rounding level instead of stencil level).
pub fn riccati_residual_with_derivative(
    u: &Samples,
    du: &Samples,
    rc: &RiccatiCoefficients,
) -> Result<f64, PdmError> {
    let mut worst = 0.0f64;
    let mut max_a = 0.0f64;
    let mut max_u = 0.0f64;
    let mut seen = false;
    for i in 0..u.len() {
        if !(u.is_valid(i) && du.is_valid(i) && rc.a.is_valid(i) && rc.b.is_valid(i)) {
            continue;
        }
        seen = true;
        let uu = u.value(i);
        let res = du.value(i) - rc.a.value(i) - rc.b.value(i) * uu + uu * uu;
        worst = worst.max(res.abs());
        max_a = max_a.max(rc.a.value(i).abs());
        max_u = max_u.max(uu.abs());
    }
    if !seen {
        return Err(PdmError::NoValidPoints);
    }
    Ok(worst / 1.0f64.max(max_a).max(max_u * max_u))
}

/// Pole bookkeeping from the Bernoulli quadrature: the denominator
/// C + int e^{int rate} crossed zero inside this index window.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PoleInfo {
    pub index_lo: usize,
    pub index_hi: usize,
    pub x_lo: f64,
    pub x_hi: f64,
}

/// Optional closed forms carried by families that have them (Case 3);
/// residuals then use symbolic derivatives and land at rounding level.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub psi: Expr,
    pub u: Expr,
    pub params: Params,
}

/// The assembled solution: mass, potential, log-derivative and
/// wavefunction on one grid, plus the Cauchy data the oracle needs and
/// provenance for reports.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub family: FamilySpec,
    pub m: Samples,
    pub v: Samples,
    pub u: Samples,
    pub psi: Samples,
    pub setup: PhysicalSetup,
    pub coeffs: RiccatiCoefficients,
    pub psi0: f64,
    /// Analytic psi'(x_min); seeds the RK4 oracle.
    pub dpsi0: f64,
    pub closed_form: Option<ClosedForm>,
    pub pole: Option<PoleInfo>,
    pub notes: Vec<String>,
}

impl SolutionBundle {
    pub fn grid(&self) -> Grid {
        self.m.grid()
    }

    /// Fraction of grid points masked in the log-derivative.
    pub fn masked_fraction(&self) -> f64 {
        self.u.invalid_count() as f64 / self.u.len() as f64
    }

    /// Riccati residual of the bundle's u against its own coefficients,
    /// using the symbolic derivative when a closed form is available.
    pub fn riccati_residual(&self) -> Result<f64, PdmError> {
        if let Some(cf) = &self.closed_form {
            let du = sample(&cf.u.differentiate(1), self.grid(), &cf.params)?;
            riccati_residual_with_derivative(&self.u, &du, &self.coeffs)
        } else {
            riccati_residual(&self.u, &self.coeffs)
        }
    }

    /// Schrodinger residual of the bundle's psi.
    pub fn schrodinger_residual(&self) -> Result<f64, PdmError> {
        schrodinger_residual(self)
    }
}

/// Relative L-infinity residual of
/// psi'' - b psi' + (2m/hbar^2)(E - V) psi, normalized by
/// ||(2m/hbar^2)(E - V) psi|| + ||psi''|| so the metric is scale-free in
/// psi. Derivatives are symbolic when the bundle carries a closed form,
/// finite differences otherwise.
pub fn schrodinger_residual(bundle: &SolutionBundle) -> Result<f64, PdmError> {
    let (dpsi, d2psi) = match &bundle.closed_form {
        Some(cf) => {
            let d1 = sample(&cf.psi.differentiate(1), bundle.grid(), &cf.params)?;
            let d2 = sample(&cf.psi.differentiate(2), bundle.grid(), &cf.params)?;
            (d1, d2)
        }
        None => (
            bundle.psi.derivative_fd_masked(DerivOrder::First),
            bundle.psi.derivative_fd_masked(DerivOrder::Second),
        ),
    };
    schrodinger_residual_parts(
        &bundle.psi,
        &dpsi,
        &d2psi,
        &bundle.m,
        &bundle.v,
        &bundle.coeffs.b,
        bundle.setup,
    )
}

/// Residual for an arbitrary candidate psi against given (m, V, b); used
/// by the printed-formula cross-checks.
pub(crate) fn schrodinger_residual_samples(
    psi: &Samples,
    m: &Samples,
    v: &Samples,
    b: &Samples,
    setup: PhysicalSetup,
) -> Result<f64, PdmError> {
    let dpsi = psi.derivative_fd_masked(DerivOrder::First);
    let d2psi = psi.derivative_fd_masked(DerivOrder::Second);
    schrodinger_residual_parts(psi, &dpsi, &d2psi, m, v, b, setup)
}

fn schrodinger_residual_parts(
    psi: &Samples,
    dpsi: &Samples,
    d2psi: &Samples,
    m: &Samples,
    v: &Samples,
    b: &Samples,
    setup: PhysicalSetup,
) -> Result<f64, PdmError> {
    let pref = 2.0 / (setup.hbar * setup.hbar);
    let mut worst = 0.0f64;
    let mut max_qpsi = 0.0f64;
    let mut max_d2 = 0.0f64;
    let mut seen = false;
    for i in 0..psi.len() {
        let ok = psi.is_valid(i)
            && dpsi.is_valid(i)
            && d2psi.is_valid(i)
            && m.is_valid(i)
            && v.is_valid(i)
            && b.is_valid(i);
        if !ok {
            continue;
        }
        seen = true;
        let q = pref * m.value(i) * (setup.energy - v.value(i));
        let res = d2psi.value(i) - b.value(i) * dpsi.value(i) + q * psi.value(i);
        worst = worst.max(res.abs());
        max_qpsi = max_qpsi.max((q * psi.value(i)).abs());
        max_d2 = max_d2.max(d2psi.value(i).abs());
    }
    if !seen {
        return Err(PdmError::NoValidPoints);
    }
    // curvature-scale floor: when both qpsi and psi'' vanish identically
    // (V = E with linear psi), the leading terms are pure stencil noise
    // and the ratio would be noise/noise; a function of size ||psi||
    // varying over the domain has curvature ~ ||psi||/L^2, which keeps
    // the metric scale-free in psi and meaningful in the degenerate case
    let length = psi.grid().x_max() - psi.grid().x_min();
    let floor = psi.max_abs() / (length * length);
    Ok(worst / (max_qpsi + max_d2).max(floor).max(f64::MIN_POSITIVE))
}
