//! The solution families of the position-dependent-mass Schrodinger
//! equation, built on one unified engine.
//!
//! Each family pins a particular Riccati solution `u_p` and a consistency
//! condition tying the potential to the mass (or, for the last family,
//! the mass to the potential). The normative construction is always the
//! engine in [`engine`]: force `a` from `u_p` through the consistency
//! identity, then add the Bernoulli quadrature for the general solution.
//! The family with printed closed forms (the hyperbolic Case 3 pair)
//! skips the quadrature entirely and carries its closed forms for
//! symbolic residuals.
//!
//! Integration anchors: every indefinite integral is taken from `x_min`;
//! the integration constants (`c1`, `v0`, `c`, `c5`, `c6`) absorb any
//! other choice of lower limit.

mod catalog;
mod engine;

pub use catalog::{find as catalog_find, CatalogMass, CATALOG};

use crate::expr::{num, var, Expr, Params};
use crate::grid::{sample, DerivOrder, Grid, GridError, Samples};
use crate::pdm::{
    log_derivative_expr, sample_positive_mass, ClosedForm, PdmError, PhysicalSetup, PoleInfo,
    RiccatiCoefficients, SolutionBundle,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("family `{family}` requires a mass expression")]
    MassRequired { family: &'static str },
    #[error("family `theorem7` constructs its own mass; do not pass one")]
    MassNotUsed,
    #[error("family `{family}` precondition violated: {what}")]
    Precondition { family: &'static str, what: String },
    #[error("{what} crosses zero on the grid between x = {x_lo} and x = {x_hi}")]
    ZeroCrossing { what: String, x_lo: f64, x_hi: f64 },
    #[error("overflow while building the solution: {what}")]
    Overflow { what: String },
    #[error(transparent)]
    Pdm(#[from] PdmError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
}

/// Sign choice where a family comes in a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

/// Tagged choice of solution family with its constants. Expressions for
/// the generating function f(x) (and the pinned potential of the
/// constructed-mass family) ride along, so a spec is self-contained up to
/// the late-bound parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Constant particular solution u_p = beta_c; condition
    /// a + beta_c b - beta_c^2 = 0.
    Case1 { beta_c: f64, c1: f64 },
    /// a = a0^2 m^2 (so V = E + a0^2 hbar^2 m/2); psi is a cosh of the
    /// mass quadrature.
    Case2 { a0: f64, f0: f64 },
    /// b^2 - 2b' + 4a = delta; closed-form pair
    /// psi = psi0 e^{+-sqrt(delta) x/2} sqrt(m).
    Case3 { delta: f64, branch: Branch },
    /// u_p = b/2 +- sqrt(f)/2 for a nonnegative generating function f.
    Theorem4 { f: Expr, branch: Branch, v0: f64 },
    /// Theorem 4 with f = 0: psi = psi0 sqrt(m) (v0 + x - x_min).
    Case4a { v0: f64 },
    /// Theorem 4 with f = b^2 (signed root): u_p = b,
    /// psi = psi0 m [v0 + int dx/m].
    Case4b { v0: f64 },
    /// u_p = (b -+ g)/2 with g = sqrt(f + b^2).
    Theorem5 { f: Expr, branch: Branch, c: f64 },
    /// u_p = -f/2 with the mass given; condition
    /// a = f(2b + f)/4 - f'/2.
    Theorem6 { f: Expr, c: f64 },
    /// u_p = -f/2 with the mass constructed from a pinned potential by
    /// nested quadrature.
    Theorem7 { f: Expr, v: Expr, c5: f64, c6: f64 },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Case1 { .. } => "case1",
            FamilySpec::Case2 { .. } => "case2",
            FamilySpec::Case3 { .. } => "case3",
            FamilySpec::Theorem4 { .. } => "theorem4",
            FamilySpec::Case4a { .. } => "case4a",
            FamilySpec::Case4b { .. } => "case4b",
            FamilySpec::Theorem5 { .. } => "theorem5",
            FamilySpec::Theorem6 { .. } => "theorem6",
            FamilySpec::Theorem7 { .. } => "theorem7",
        }
    }

    /// Whether `build` needs a mass expression for this family.
    pub fn requires_mass(&self) -> bool {
        !matches!(self, FamilySpec::Theorem7 { .. })
    }
}

/// Mass-derived quantities shared by all mass-first families.
struct MassParts {
    m: Samples,
    b_expr: Expr,
    b: Samples,
    b_prime: Samples,
}

fn prepare_mass(m: &Expr, grid: Grid, params: &Params) -> Result<MassParts, BuildError> {
    let m_s = sample_positive_mass(m, grid, params)?;
    let b_expr = log_derivative_expr(m);
    let b = sample(&b_expr, grid, params)?;
    let b_prime = sample(&b_expr.differentiate(1), grid, params)?;
    if !b.is_fully_valid() || !b_prime.is_fully_valid() {
        return Err(BuildError::Precondition {
            family: "mass",
            what: "d ln m/dx must be defined on the whole grid".into(),
        });
    }
    Ok(MassParts {
        m: m_s,
        b_expr,
        b,
        b_prime,
    })
}

/// The coefficient a(x) forced by requiring `u_p` to solve the Riccati
/// equation: a = u_p' - b u_p + u_p^2 (u_p' by finite differences here;
/// the engine substitutes symbolic derivatives when it has them). The
/// potential follows as V = E + hbar^2 a/(2m).
pub fn consistency_from_particular(u_p: &Samples, b: &Samples) -> Samples {
    let du = u_p.derivative_fd_masked(DerivOrder::First);
    let mut a = Samples::constant(u_p.grid(), 0.0);
    for i in 0..u_p.len() {
        if du.is_valid(i) && u_p.is_valid(i) && b.is_valid(i) {
            let up = u_p.value(i);
            a.set_value(i, du.value(i) - b.value(i) * up + up * up);
        } else {
            a.invalidate(i);
        }
    }
    a
}

/// General Riccati solution from a particular one by the Bernoulli
/// quadrature: u = u_p + e^R/(C + int e^R) with R = int (b - 2 u_p).
/// A zero of the denominator is reported and its neighborhood masked.
#[derive(Debug, Clone)]
pub struct BernoulliSolution {
    pub u: Samples,
    pub pole: Option<PoleInfo>,
}

pub fn bernoulli_general(
    u_p: &Samples,
    b: &Samples,
    c: f64,
) -> Result<BernoulliSolution, BuildError> {
    let rate = b.zip_with(u_p, |bv, up| bv - 2.0 * up);
    let r = rate.cumulative_integral(0)?;
    if r.max_abs() > 700.0 {
        return Err(BuildError::Overflow {
            what: format!("max |int (b - 2 u_p)| = {:.3}", r.max_abs()),
        });
    }
    let exp_r = r.map(f64::exp);
    let w_int = exp_r.cumulative_integral(0)?;
    let w_total = w_int.map(|v| c + v);
    let (u, pole) = engine::attach_bernoulli(u_p, &exp_r, &w_total);
    Ok(BernoulliSolution { u, pole })
}

fn bundle_from_engine(
    family: FamilySpec,
    m: Samples,
    setup: PhysicalSetup,
    psi0: f64,
    out: engine::EngineOutput,
    notes: Vec<String>,
) -> SolutionBundle {
    SolutionBundle {
        family,
        m,
        v: out.v_pot,
        u: out.u,
        psi: out.psi,
        setup,
        coeffs: out.coeffs,
        psi0,
        dpsi0: out.dpsi0,
        closed_form: None,
        pole: out.pole,
        notes,
    }
}

// ---------------------------------------------------------------------
// Case 1: u_p = beta_c
// ---------------------------------------------------------------------

/// V = E + (beta hbar^2 / 2m)(beta - d ln m/dx), the potential forced by
/// the constant particular solution.
pub fn case1_potential_from_mass(
    m: &Expr,
    beta_c: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<Samples, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let hbar2 = setup.hbar * setup.hbar;
    Ok(parts.m.zip_with(&parts.b, |mv, bv| {
        setup.energy + beta_c * hbar2 / (2.0 * mv) * (beta_c - bv)
    }))
}

/// The inverse map: m = e^{beta (x - x_min)} / [m2 + (2/(beta hbar^2))
/// int e^{beta (phi - x_min)} (V - E) dphi]. Fails if the denominator
/// crosses zero; `m2` fixes the mass at the anchor, m(x_min) = 1/m2.
pub fn case1_mass_from_potential(
    v: &Expr,
    beta_c: f64,
    m2: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<Samples, BuildError> {
    if beta_c == 0.0 {
        return Err(BuildError::Precondition {
            family: "case1",
            what: "mass-from-potential needs beta_c != 0".into(),
        });
    }
    let v_s = sample(v, grid, params)?;
    if !v_s.is_fully_valid() {
        return Err(BuildError::Precondition {
            family: "case1",
            what: "potential must be defined on the whole grid".into(),
        });
    }
    let x0 = grid.x_min();
    let ebx = Samples::from_fn(grid, |x| (beta_c * (x - x0)).exp());
    let integrand = ebx.zip_with(&v_s, |e, vv| e * (vv - setup.energy));
    let integral = integrand.cumulative_integral(0)?;
    let denom = integral.map(|iv| m2 + 2.0 / (beta_c * setup.hbar * setup.hbar) * iv);
    for i in 0..grid.len() - 1 {
        if denom.value(i) == 0.0 || denom.value(i) * denom.value(i + 1) < 0.0 {
            return Err(BuildError::ZeroCrossing {
                what: "case1 mass denominator".into(),
                x_lo: grid.x(i),
                x_hi: grid.x(i + 1),
            });
        }
    }
    Ok(ebx.zip_with(&denom, |e, d| e / d))
}

/// psi = psi0 e^{beta (x - x_min)} [c1 + int m e^{-2 beta (phi - x_min)}],
/// one cumulative quadrature over given mass samples.
pub fn case1_wavefunction(
    m: &Samples,
    beta_c: f64,
    c1: f64,
    psi0: f64,
) -> Result<Samples, BuildError> {
    let grid = m.grid();
    let x0 = grid.x_min();
    let damp = Samples::from_fn(grid, |x| (-2.0 * beta_c * (x - x0)).exp());
    let integrand = m.zip_with(&damp, |mv, dv| mv * dv);
    let integral = integrand.cumulative_integral(0)?;
    let psi = Samples::from_fn(grid, |x| (beta_c * (x - x0)).exp())
        .zip_with(&integral, |grow, iv| psi0 * grow * (c1 + iv));
    for (i, v) in psi.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(BuildError::Overflow {
                what: format!("psi overflow at x = {}", grid.x(i)),
            });
        }
    }
    Ok(psi)
}

fn case1_solve(
    m: &Expr,
    beta_c: f64,
    c1: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let w = Samples::constant(grid, beta_c);
    let w_prime = Samples::constant(grid, 0.0);
    let out = engine::run(engine::EngineInput {
        m: &parts.m,
        b: &parts.b,
        b_prime: Some(&parts.b_prime),
        k: 0.0,
        w: &w,
        w_prime: Some(&w_prime),
        bernoulli_c: c1,
        psi0,
        setup,
    })?;
    Ok(bundle_from_engine(
        FamilySpec::Case1 { beta_c, c1 },
        parts.m,
        setup,
        psi0,
        out,
        vec![],
    ))
}

// ---------------------------------------------------------------------
// Case 2: a = a0^2 m^2
// ---------------------------------------------------------------------

/// Potential and wavefunction of the cosh family:
/// V = E + a0^2 hbar^2 m / 2 and psi = psi0 cosh(a0 int m + f0).
pub fn case2_wavefunction(
    m: &Expr,
    a0: f64,
    f0: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<(Samples, Samples), BuildError> {
    if a0 == 0.0 {
        return Err(BuildError::Precondition {
            family: "case2",
            what: "a0 must be nonzero".into(),
        });
    }
    let m_s = sample_positive_mass(m, grid, params)?;
    let hbar2 = setup.hbar * setup.hbar;
    let v = m_s.map(|mv| setup.energy + a0 * a0 * hbar2 * mv / 2.0);
    let theta = m_s.cumulative_integral(0)?.map(|iv| a0 * iv + f0);
    let psi = theta.map(|t| psi0 * t.cosh());
    for (i, vv) in psi.values().iter().enumerate() {
        if !vv.is_finite() {
            return Err(BuildError::Overflow {
                what: format!("psi overflow at x = {}", grid.x(i)),
            });
        }
    }
    Ok((v, psi))
}

fn case2_solve(
    m: &Expr,
    a0: f64,
    f0: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let (v, psi) = case2_wavefunction(m, a0, f0, psi0, setup, grid, params)?;
    let a = parts.m.map(|mv| a0 * a0 * mv * mv);
    let theta = parts.m.cumulative_integral(0)?.map(|iv| a0 * iv + f0);
    let u = parts.m.zip_with(&theta, |mv, t| a0 * mv * t.tanh());
    let dpsi0 = psi0 * a0 * parts.m.value(0) * f0.sinh();
    Ok(SolutionBundle {
        family: FamilySpec::Case2 { a0, f0 },
        coeffs: RiccatiCoefficients { a, b: parts.b },
        m: parts.m,
        v,
        u,
        psi,
        setup,
        psi0,
        dpsi0,
        closed_form: None,
        pole: None,
        notes: vec![],
    })
}

// ---------------------------------------------------------------------
// Case 3: b^2 - 2b' + 4a = delta (closed form)
// ---------------------------------------------------------------------

/// V = E + hbar^2/(8m) [delta + 2 (ln m)'' - ((ln m)')^2], from symbolic
/// derivatives of the mass.
pub fn case3_potential_from_mass(
    m: &Expr,
    delta: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<Samples, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let hbar2 = setup.hbar * setup.hbar;
    let mut v = Samples::constant(grid, 0.0);
    for i in 0..grid.len() {
        let bv = parts.b.value(i);
        let bp = parts.b_prime.value(i);
        v.set_value(
            i,
            setup.energy + hbar2 / (8.0 * parts.m.value(i)) * (delta + 2.0 * bp - bv * bv),
        );
    }
    Ok(v)
}

/// The closed-form branch psi = psi0 e^{+-sqrt(delta)(x - x_min)/2}
/// sqrt(m/m(x_min)); no quadrature at all.
pub fn case3_wavefunction(
    m: &Expr,
    delta: f64,
    branch: Branch,
    psi0: f64,
    grid: Grid,
    params: &Params,
) -> Result<Samples, BuildError> {
    let (psi_expr, _) = case3_closed_forms(m, delta, branch, psi0, grid, params)?;
    Ok(sample(&psi_expr, grid, params)?)
}

/// Closed-form psi and u as expressions, shared by the solver and the
/// symbolic residual path.
fn case3_closed_forms(
    m: &Expr,
    delta: f64,
    branch: Branch,
    psi0: f64,
    grid: Grid,
    params: &Params,
) -> Result<(Expr, Expr), BuildError> {
    if delta < 0.0 {
        return Err(BuildError::Precondition {
            family: "case3",
            what: format!(
                "delta must be nonnegative (got {delta}); oscillatory solutions are out of scope"
            ),
        });
    }
    let m0 = m.eval(grid.x_min(), params)?;
    let rate = branch.sign() * delta.sqrt() / 2.0;
    // psi = psi0 exp(rate (x - x_min)) sqrt(m/m0)
    let psi_expr = num(psi0)
        .mul(num(rate).mul(var().sub(num(grid.x_min()))).exp())
        .mul(m.clone().div(num(m0)).sqrt())
        .simplify();
    // u = b/2 + rate
    let u_expr = num(0.5)
        .mul(log_derivative_expr(m))
        .add(num(rate))
        .simplify();
    Ok((psi_expr, u_expr))
}

/// Residuals of the two equivalent mass-side forms of the Case 3
/// condition: the second-order ODE in m and, after the m M^2 = 1
/// transform, the ODE in M = m^{-1/2}. Both vanish together exactly when
/// (m, V) satisfy the family condition.
pub fn case3_mass_ode_residual(
    m: &Expr,
    v: &Samples,
    delta: f64,
    setup: PhysicalSetup,
    params: &Params,
) -> Result<(f64, f64), BuildError> {
    let grid = v.grid();
    let m_s = sample_positive_mass(m, grid, params)?;
    let hbar2 = setup.hbar * setup.hbar;
    let m2 = sample(&m.differentiate(2), grid, params)?;
    let b = sample(&log_derivative_expr(m), grid, params)?;
    // (2/m) m'' - 3 ((ln m)')^2 - (8m/hbar^2)(V - E) + delta
    let mut worst_m = 0.0f64;
    let mut scale_m = 1.0f64;
    for i in 0..grid.len() {
        if !(m2.is_valid(i) && b.is_valid(i) && v.is_valid(i)) {
            continue;
        }
        let t1 = 2.0 / m_s.value(i) * m2.value(i);
        let t2 = 3.0 * b.value(i) * b.value(i);
        let t3 = 8.0 * m_s.value(i) / hbar2 * (v.value(i) - setup.energy);
        worst_m = worst_m.max((t1 - t2 - t3 + delta).abs());
        scale_m = scale_m
            .max(t1.abs())
            .max(t2.abs())
            .max(t3.abs())
            .max(delta.abs());
    }
    // M'' - (delta/4) M + (2/hbar^2)(V - E)/M with M = m^{-1/2}
    let big_m_expr = m.clone().pow(num(-0.5)).simplify();
    let big_m = sample(&big_m_expr, grid, params)?;
    let big_m2 = sample(&big_m_expr.differentiate(2), grid, params)?;
    let mut worst_big = 0.0f64;
    let mut scale_big = 1.0f64;
    for i in 0..grid.len() {
        if !(big_m.is_valid(i) && big_m2.is_valid(i) && v.is_valid(i)) {
            continue;
        }
        let t1 = big_m2.value(i);
        let t2 = delta / 4.0 * big_m.value(i);
        let t3 = 2.0 / hbar2 * (v.value(i) - setup.energy) / big_m.value(i);
        worst_big = worst_big.max((t1 - t2 + t3).abs());
        scale_big = scale_big.max(t1.abs()).max(t2.abs()).max(t3.abs());
    }
    Ok((worst_m / scale_m, worst_big / scale_big))
}

fn case3_solve(
    m: &Expr,
    delta: f64,
    branch: Branch,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let v = case3_potential_from_mass(m, delta, setup, grid, params)?;
    let (psi_expr, u_expr) = case3_closed_forms(m, delta, branch, psi0, grid, params)?;
    let psi = sample(&psi_expr, grid, params)?;
    let u = sample(&u_expr, grid, params)?;
    let pref = 2.0 / (setup.hbar * setup.hbar);
    let a = parts
        .m
        .zip_with(&v, |mv, vv| pref * mv * (vv - setup.energy));
    let dpsi0 = u.value(0) * psi.value(0);
    let mut notes = vec![];
    if delta == 0.0 {
        notes.push("delta = 0: plus and minus branches coincide (psi = psi0 sqrt(m))".to_string());
    }
    Ok(SolutionBundle {
        family: FamilySpec::Case3 { delta, branch },
        coeffs: RiccatiCoefficients { a, b: parts.b },
        m: parts.m,
        v,
        u,
        psi,
        setup,
        psi0,
        dpsi0,
        closed_form: Some(ClosedForm {
            psi: psi_expr,
            u: u_expr,
            params: params.clone(),
        }),
        pole: None,
        notes,
    })
}

// ---------------------------------------------------------------------
// Theorem 4 family: u_p = b/2 +- sqrt(f)/2
// ---------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn theorem4_solve(
    m: &Expr,
    f: &Expr,
    branch: Branch,
    v0: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let f_s = sample(f, grid, params)?;
    for i in 0..grid.len() {
        if f_s.is_valid(i) && f_s.value(i) < 0.0 {
            return Err(BuildError::Precondition {
                family: "theorem4",
                what: format!(
                    "f must be nonnegative on the grid (f({}) = {})",
                    grid.x(i),
                    f_s.value(i)
                ),
            });
        }
    }
    let w_expr = num(branch.sign() / 2.0).mul(f.clone().sqrt()).simplify();
    let w = sample(&w_expr, grid, params)?;
    let w_prime = sample(&w_expr.differentiate(1), grid, params)?;
    let out = engine::run(engine::EngineInput {
        m: &parts.m,
        b: &parts.b,
        b_prime: Some(&parts.b_prime),
        k: 0.5,
        w: &w,
        w_prime: Some(&w_prime),
        bernoulli_c: v0,
        psi0,
        setup,
    })?;
    Ok(bundle_from_engine(
        FamilySpec::Theorem4 {
            f: f.clone(),
            branch,
            v0,
        },
        parts.m,
        setup,
        psi0,
        out,
        vec![],
    ))
}

/// Theorem 4 with f identically zero: psi = psi0 sqrt(m) (v0 + x - x_min)
/// under the condition (4m/hbar^2)(V - E) = (ln m)'' - ((ln m)')^2 / 2.
pub fn case4a_solve(
    m: &Expr,
    v0: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let mut bundle = theorem4_solve(m, &num(0.0), Branch::Plus, v0, psi0, setup, grid, params)?;
    bundle.family = FamilySpec::Case4a { v0 };
    Ok(bundle)
}

/// Theorem 4 with f = b^2 and the signed root sqrt(b^2) -> b, so u_p = b:
/// condition (2m/hbar^2)(V - E) = (ln m)'' and psi = psi0 m [v0 + int
/// dx/m].
pub fn case4b_solve(
    m: &Expr,
    v0: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let w = Samples::constant(grid, 0.0);
    let w_prime = Samples::constant(grid, 0.0);
    let out = engine::run(engine::EngineInput {
        m: &parts.m,
        b: &parts.b,
        b_prime: Some(&parts.b_prime),
        k: 1.0,
        w: &w,
        w_prime: Some(&w_prime),
        bernoulli_c: v0,
        psi0,
        setup,
    })?;
    Ok(bundle_from_engine(
        FamilySpec::Case4b { v0 },
        parts.m,
        setup,
        psi0,
        out,
        vec![],
    ))
}

// ---------------------------------------------------------------------
// Theorem 5 family: u_p = (b -+ g)/2, g = sqrt(f + b^2)
// ---------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn theorem5_solve(
    m: &Expr,
    f: &Expr,
    branch: Branch,
    c: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let radicand_expr = f
        .clone()
        .add(parts.b_expr.clone().pow(num(2.0)))
        .simplify();
    let radicand = sample(&radicand_expr, grid, params)?;
    for i in 0..grid.len() {
        if radicand.is_valid(i) && radicand.value(i) < 0.0 {
            return Err(BuildError::Precondition {
                family: "theorem5",
                what: format!(
                    "f + (d ln m/dx)^2 must be nonnegative on the grid (radicand({}) = {})",
                    grid.x(i),
                    radicand.value(i)
                ),
            });
        }
    }
    let w_expr = num(branch.sign() / 2.0)
        .mul(radicand_expr.sqrt())
        .simplify();
    let w = sample(&w_expr, grid, params)?;
    let w_prime = sample(&w_expr.differentiate(1), grid, params)?;
    let out = engine::run(engine::EngineInput {
        m: &parts.m,
        b: &parts.b,
        b_prime: Some(&parts.b_prime),
        k: 0.5,
        w: &w,
        w_prime: Some(&w_prime),
        bernoulli_c: c,
        psi0,
        setup,
    })?;
    Ok(bundle_from_engine(
        FamilySpec::Theorem5 {
            f: f.clone(),
            branch,
            c,
        },
        parts.m,
        setup,
        psi0,
        out,
        vec![],
    ))
}

// ---------------------------------------------------------------------
// Theorem 6 family: u_p = -f/2, mass given
// ---------------------------------------------------------------------

pub fn theorem6_solve(
    m: &Expr,
    f: &Expr,
    c: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = prepare_mass(m, grid, params)?;
    let w_expr = num(-0.5).mul(f.clone()).simplify();
    let w = sample(&w_expr, grid, params)?;
    let w_prime = sample(&w_expr.differentiate(1), grid, params)?;
    let out = engine::run(engine::EngineInput {
        m: &parts.m,
        b: &parts.b,
        b_prime: None, // k = 0, not needed
        k: 0.0,
        w: &w,
        w_prime: Some(&w_prime),
        bernoulli_c: c,
        psi0,
        setup,
    })?;
    Ok(bundle_from_engine(
        FamilySpec::Theorem6 { f: f.clone(), c },
        parts.m,
        setup,
        psi0,
        out,
        vec![],
    ))
}

// ---------------------------------------------------------------------
// Theorem 7 family: u_p = -f/2, mass constructed from a pinned V
// ---------------------------------------------------------------------

/// Intermediates of the Theorem 7 mass construction, shared with the
/// printed-formula cross-check.
pub(crate) struct Theorem7Parts {
    pub m: Samples,
    pub b: Samples,
    /// e^{-F/2} with F = int f.
    pub damp: Samples,
    /// D = c5 - (4/hbar^2) int f (V - E) e^{-F/2}.
    pub denom: Samples,
    pub f_s: Samples,
    pub f_prime: Samples,
    pub v_user: Samples,
}

pub(crate) fn theorem7_mass(
    f: &Expr,
    v: &Expr,
    c5: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<Theorem7Parts, BuildError> {
    let f_s = sample(f, grid, params)?;
    if !f_s.is_fully_valid() {
        return Err(BuildError::Precondition {
            family: "theorem7",
            what: "f must be defined on the whole grid".into(),
        });
    }
    for i in 0..grid.len() {
        if f_s.value(i) == 0.0 {
            return Err(BuildError::Precondition {
                family: "theorem7",
                what: format!("f must be nonvanishing on the grid (f({}) = 0)", grid.x(i)),
            });
        }
        if i + 1 < grid.len() && f_s.value(i) * f_s.value(i + 1) < 0.0 {
            return Err(BuildError::ZeroCrossing {
                what: "theorem7 generating function f".into(),
                x_lo: grid.x(i),
                x_hi: grid.x(i + 1),
            });
        }
    }
    let f_prime = sample(&f.differentiate(1), grid, params)?;
    let v_user = sample(v, grid, params)?;
    if !v_user.is_fully_valid() || !f_prime.is_fully_valid() {
        return Err(BuildError::Precondition {
            family: "theorem7",
            what: "V and f' must be defined on the whole grid".into(),
        });
    }
    let big_f = f_s.cumulative_integral(0)?;
    if big_f.max_abs() > 1400.0 {
        return Err(BuildError::Overflow {
            what: "int f too large for e^(-int f/2)".into(),
        });
    }
    let damp = big_f.map(|fv| (-fv / 2.0).exp());
    let scale = 4.0 / (setup.hbar * setup.hbar);
    let integrand = f_s
        .zip_with(&v_user, |fv, vv| fv * (vv - setup.energy))
        .zip_with(&damp, |p, d| p * d);
    let denom = integrand.cumulative_integral(0)?.map(|iv| c5 - scale * iv);
    for i in 0..grid.len() - 1 {
        if denom.value(i) == 0.0 || denom.value(i) * denom.value(i + 1) < 0.0 {
            return Err(BuildError::ZeroCrossing {
                what: "theorem7 denominator D = c5 - (4/hbar^2) int f (V - E) e^(-int f/2)"
                    .into(),
                x_lo: grid.x(i),
                x_hi: grid.x(i + 1),
            });
        }
    }
    let m = f_s
        .zip_with(&damp, |fv, dv| fv * dv)
        .zip_with(&denom, |p, d| p / d);
    for i in 0..grid.len() {
        if m.value(i) <= 0.0 {
            return Err(BuildError::Precondition {
                family: "theorem7",
                what: format!(
                    "constructed mass must be positive (m({}) = {}); flip the signs of f and c5 together",
                    grid.x(i),
                    m.value(i)
                ),
            });
        }
    }
    // b = d ln m/dx of the constructed mass, assembled from the pieces
    // (ln f)' - f/2 - (ln D)', with D' known in closed form
    let mut b = Samples::constant(grid, 0.0);
    for i in 0..grid.len() {
        let fv = f_s.value(i);
        let third = scale * fv * (v_user.value(i) - setup.energy) * damp.value(i) / denom.value(i);
        b.set_value(i, f_prime.value(i) / fv - fv / 2.0 + third);
    }
    Ok(Theorem7Parts {
        m,
        b,
        damp,
        denom,
        f_s,
        f_prime,
        v_user,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn theorem7_solve(
    f: &Expr,
    v: &Expr,
    c5: f64,
    c6: f64,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    params: &Params,
) -> Result<SolutionBundle, BuildError> {
    let parts = theorem7_mass(f, v, c5, setup, grid, params)?;
    let w = parts.f_s.scale(-0.5);
    let w_prime = parts.f_prime.scale(-0.5);
    let out = engine::run(engine::EngineInput {
        m: &parts.m,
        b: &parts.b,
        b_prime: None, // k = 0
        k: 0.0,
        w: &w,
        w_prime: Some(&w_prime),
        bernoulli_c: c6,
        psi0,
        setup,
    })?;
    Ok(bundle_from_engine(
        FamilySpec::Theorem7 {
            f: f.clone(),
            v: v.clone(),
            c5,
            c6,
        },
        parts.m,
        setup,
        psi0,
        out,
        vec![],
    ))
}

// ---------------------------------------------------------------------
// Dispatcher
// ---------------------------------------------------------------------

/// Build the full solution bundle for a family spec. Mass-first families
/// take the mass expression; the constructed-mass family takes none (its
/// potential and generating function live in the `FamilySpec`).
///
/// ```
/// use pdmsolver::expr::{parse, Params};
/// use pdmsolver::families::{build, Branch, FamilySpec};
/// use pdmsolver::grid::Grid;
/// use pdmsolver::pdm::PhysicalSetup;
///
/// let mass = parse("m0*sech(w*x)^2").unwrap();
/// let params: Params = [("m0".to_string(), 1.0), ("w".to_string(), 1.2)].into();
/// let grid = Grid::new(-4.0, 4.0, 2001).unwrap();
/// let spec = FamilySpec::Case3 { delta: 1.0, branch: Branch::Plus };
/// let bundle = build(&spec, Some(&mass), &params, 1.0, PhysicalSetup::natural(1.0), grid).unwrap();
/// assert!(bundle.riccati_residual().unwrap() < 1e-10);
/// ```
pub fn build(
    spec: &FamilySpec,
    mass: Option<&Expr>,
    params: &Params,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
) -> Result<SolutionBundle, BuildError> {
    let need_mass = || -> Result<&Expr, BuildError> {
        mass.ok_or(BuildError::MassRequired {
            family: spec.name(),
        })
    };
    match spec {
        FamilySpec::Case1 { beta_c, c1 } => {
            case1_solve(need_mass()?, *beta_c, *c1, psi0, setup, grid, params)
        }
        FamilySpec::Case2 { a0, f0 } => {
            case2_solve(need_mass()?, *a0, *f0, psi0, setup, grid, params)
        }
        FamilySpec::Case3 { delta, branch } => {
            case3_solve(need_mass()?, *delta, *branch, psi0, setup, grid, params)
        }
        FamilySpec::Theorem4 { f, branch, v0 } => {
            theorem4_solve(need_mass()?, f, *branch, *v0, psi0, setup, grid, params)
        }
        FamilySpec::Case4a { v0 } => case4a_solve(need_mass()?, *v0, psi0, setup, grid, params),
        FamilySpec::Case4b { v0 } => case4b_solve(need_mass()?, *v0, psi0, setup, grid, params),
        FamilySpec::Theorem5 { f, branch, c } => {
            theorem5_solve(need_mass()?, f, *branch, *c, psi0, setup, grid, params)
        }
        FamilySpec::Theorem6 { f, c } => {
            theorem6_solve(need_mass()?, f, *c, psi0, setup, grid, params)
        }
        FamilySpec::Theorem7 { f, v, c5, c6 } => {
            if mass.is_some() {
                return Err(BuildError::MassNotUsed);
            }
            theorem7_solve(f, v, *c5, *c6, psi0, setup, grid, params)
        }
    }
}
