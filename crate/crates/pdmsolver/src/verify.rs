//! End-to-end adjudication of constructed solutions: the residual suite,
//! the independent Runge-Kutta oracle comparison, verbatim cross-checks
//! of the printed closed forms where they disagree with the engine, the
//! energy-dependent norm, and parameter sweeps.

use crate::expr::{Expr, Params};
use crate::families::{self, build, BuildError, FamilySpec};
use crate::grid::{ode_oracle, Grid, Samples};
use crate::pdm::{
    log_derivative_expr, sample_positive_mass, schrodinger_residual_samples, PdmError,
    PhysicalSetup, SolutionBundle,
};

/// A report is valid only if the log-derivative mask stays below this
/// fraction of the grid.
pub const MASKED_FRACTION_LIMIT: f64 = 0.05;

/// Residual/oracle thresholds for a pass verdict.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub riccati: f64,
    pub schrodinger: f64,
    pub oracle: f64,
}

impl Tolerances {
    /// Quadrature-backed families.
    pub const DEFAULT: Tolerances = Tolerances {
        riccati: 1e-6,
        schrodinger: 1e-5,
        oracle: 1e-5,
    };

    /// The closed-form family carries no quadrature error and is held to
    /// tighter residuals.
    pub const CASE3: Tolerances = Tolerances {
        riccati: 1e-10,
        schrodinger: 1e-9,
        oracle: 1e-5,
    };

    pub fn for_family(spec: &FamilySpec) -> Tolerances {
        match spec {
            FamilySpec::Case3 { .. } => Tolerances::CASE3,
            _ => Tolerances::DEFAULT,
        }
    }
}

/// Machine-checked verdict for one bundle.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VerificationReport {
    pub family: String,
    pub riccati_residual: f64,
    pub schrodinger_residual: f64,
    /// Max |psi_oracle - psi| / max |psi| over points both sides hold.
    pub oracle_max_rel_dev: f64,
    pub oracle_diverged: bool,
    pub masked_fraction: f64,
    /// Schrodinger residual of the verbatim printed wavefunction, where
    /// one exists and differs from the engine (recorded, never gating).
    pub printed_formula_residual: Option<f64>,
    pub pass: bool,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl VerificationReport {
    fn failed(label: &str, tolerances: Tolerances, error: String) -> VerificationReport {
        VerificationReport {
            family: label.to_string(),
            riccati_residual: f64::NAN,
            schrodinger_residual: f64::NAN,
            oracle_max_rel_dev: f64::NAN,
            oracle_diverged: false,
            masked_fraction: f64::NAN,
            printed_formula_residual: None,
            pass: false,
            tolerances,
            notes: vec![],
            error: Some(error),
        }
    }
}

/// Compute both residuals and the RK4 oracle deviation for a bundle and
/// apply the pass criteria. The oracle is seeded only with the analytic
/// Cauchy data at x_min, so its agreement is genuine cross-validation.
pub fn verify_bundle(
    bundle: &SolutionBundle,
    tolerances: Tolerances,
) -> Result<VerificationReport, PdmError> {
    let riccati = bundle.riccati_residual()?;
    let schrodinger = bundle.schrodinger_residual()?;
    let sol = ode_oracle(
        &bundle.m,
        &bundle.v,
        bundle.setup.energy,
        bundle.setup.hbar,
        bundle.psi.value(0),
        bundle.dpsi0,
    )?;
    let scale = bundle.psi.max_abs().max(f64::MIN_POSITIVE);
    let mut dev = 0.0f64;
    for i in 0..bundle.psi.len() {
        if bundle.psi.is_valid(i) && sol.psi.is_valid(i) {
            dev = dev.max((sol.psi.value(i) - bundle.psi.value(i)).abs() / scale);
        }
    }
    let masked_fraction = bundle.masked_fraction();
    let pass = !sol.diverged()
        && riccati <= tolerances.riccati
        && schrodinger <= tolerances.schrodinger
        && dev <= tolerances.oracle
        && masked_fraction < MASKED_FRACTION_LIMIT;
    Ok(VerificationReport {
        family: bundle.family.name().to_string(),
        riccati_residual: riccati,
        schrodinger_residual: schrodinger,
        oracle_max_rel_dev: dev,
        oracle_diverged: sol.diverged(),
        masked_fraction,
        printed_formula_residual: None,
        pass,
        tolerances,
        notes: bundle.notes.clone(),
        error: None,
    })
}

/// Evaluate the verbatim printed wavefunction of the three families whose
/// displayed forms disagree with the Bernoulli-engine derivation, and
/// return its Schrodinger residual against the engine's (m, V). A large
/// value here is data for the record, not a failure.
pub fn printed_formula_crosscheck(
    spec: &FamilySpec,
    mass: Option<&Expr>,
    params: &Params,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
) -> Result<f64, BuildError> {
    let bundle = build(spec, mass, params, psi0, setup, grid)?;
    let psi_printed = printed_wavefunction(spec, mass, params, psi0, setup, grid)?;
    Ok(schrodinger_residual_samples(
        &psi_printed,
        &bundle.m,
        &bundle.v,
        &bundle.coeffs.b,
        bundle.setup,
    )?)
}

fn printed_wavefunction(
    spec: &FamilySpec,
    mass: Option<&Expr>,
    params: &Params,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
) -> Result<Samples, BuildError> {
    match spec {
        FamilySpec::Theorem5 { f, branch, c } => {
            let m_expr = mass.ok_or(BuildError::MassRequired { family: "theorem5" })?;
            let m = sample_positive_mass(m_expr, grid, params)?;
            let b = crate::grid::sample(&log_derivative_expr(m_expr), grid, params)?;
            let f_s = crate::grid::sample(f, grid, params)?;
            // g = sqrt(f + b^2); printed form uses e^{-int g} inside the
            // bracket for both branches and the full (not halved) outer
            // exponent
            let g = f_s.zip_with(&b, |fv, bv| (fv + bv * bv).sqrt());
            let big_g = g.cumulative_integral(0)?;
            let inner = big_g.map(|v| (-v).exp());
            let bracket = inner.cumulative_integral(0)?.map(|v| c + v);
            // the displayed -+ subscript: Minus carries the upper sign
            let outer_sign = match branch {
                crate::families::Branch::Minus => -1.0,
                crate::families::Branch::Plus => 1.0,
            };
            let outer = big_g.map(|v| (outer_sign * v).exp());
            let m0 = m.value(0);
            let psi = m
                .zip_with(&bracket, |mv, br| (mv / m0).sqrt() * br)
                .zip_with(&outer, |p, o| psi0 * p * o);
            Ok(psi)
        }
        FamilySpec::Theorem6 { f, c } => {
            let m_expr = mass.ok_or(BuildError::MassRequired { family: "theorem6" })?;
            let m = sample_positive_mass(m_expr, grid, params)?;
            let b = crate::grid::sample(&log_derivative_expr(m_expr), grid, params)?;
            let f_s = crate::grid::sample(f, grid, params)?;
            // q = sqrt(b^2 + f (2b + f)), i.e. |b + f| printed as a root
            let q = f_s.zip_with(&b, |fv, bv| (bv * bv + fv * (2.0 * bv + fv)).sqrt());
            let big_q = q.cumulative_integral(0)?;
            let inner = big_q.map(f64::exp);
            let bracket = inner.cumulative_integral(0)?.map(|v| c + v);
            let outer = big_q.map(|v| (-v / 2.0).exp());
            let m0 = m.value(0);
            let psi = m
                .zip_with(&bracket, |mv, br| (mv / m0).sqrt() * br)
                .zip_with(&outer, |p, o| psi0 * p * o);
            Ok(psi)
        }
        FamilySpec::Theorem7 { f, v, c5, c6 } => {
            let parts = families::theorem7_mass(f, v, *c5, setup, grid, params)?;
            // the printed b lacks the factor f in its third term relative
            // to d ln m/dx of the constructed mass
            let scale = 4.0 / (setup.hbar * setup.hbar);
            let mut b_printed = Samples::constant(grid, 0.0);
            for i in 0..grid.len() {
                let third = scale * (parts.v_user.value(i) - setup.energy) * parts.damp.value(i)
                    / parts.denom.value(i);
                b_printed.set_value(
                    i,
                    parts.f_prime.value(i) / parts.f_s.value(i) - parts.f_s.value(i) / 2.0 + third,
                );
            }
            let rate = b_printed.zip_with(&parts.f_s, |bv, fv| bv + fv);
            let r = rate.cumulative_integral(0)?;
            if r.max_abs() > 700.0 {
                return Err(BuildError::Overflow {
                    what: "printed theorem7 exponent".into(),
                });
            }
            let exp_r = r.map(f64::exp);
            let bracket = exp_r.cumulative_integral(0)?.map(|v| c6 + v);
            let half_f = parts.f_s.cumulative_integral(0)?.map(|v| (-v / 2.0).exp());
            Ok(half_f.zip_with(&bracket, |h, br| psi0 * h * br))
        }
        other => Err(BuildError::Precondition {
            family: other.name(),
            what: "printed-formula cross-check applies to theorems 5-7 only".into(),
        }),
    }
}

/// The norm N = int psi [1 - dV/dE] psi dx of the energy-dependent
/// formalism, adapted to one dimension. dV/dE is a central difference in
/// E: the family is rebuilt at E +- deltaE with every other input fixed.
pub fn energy_dependent_norm(
    spec: &FamilySpec,
    mass: Option<&Expr>,
    params: &Params,
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
    delta_e: Option<f64>,
) -> Result<f64, BuildError> {
    let delta = delta_e.unwrap_or(1e-4 * setup.energy.abs().max(1.0));
    let bundle = build(spec, mass, params, psi0, setup, grid)?;
    let plus = build(
        spec,
        mass,
        params,
        psi0,
        PhysicalSetup {
            energy: setup.energy + delta,
            ..setup
        },
        grid,
    )?;
    let minus = build(
        spec,
        mass,
        params,
        psi0,
        PhysicalSetup {
            energy: setup.energy - delta,
            ..setup
        },
        grid,
    )?;
    let dvde = plus.v.zip_with(&minus.v, |a, b| (a - b) / (2.0 * delta));
    let integrand = bundle
        .psi
        .zip_with(&dvde, |p, d| p * p * (1.0 - d));
    Ok(integrand.integral()?)
}

/// One row of a sweep: a family instance over one mass profile.
#[derive(Debug, Clone)]
pub struct SweepInstance {
    pub label: String,
    pub spec: FamilySpec,
    pub mass: Option<Expr>,
    pub params: Params,
}

/// Build and verify every instance. Individual failures are recorded per
/// row (with the error message in the report) and never abort the sweep;
/// reports come back in input order.
pub fn sweep(
    instances: &[SweepInstance],
    psi0: f64,
    setup: PhysicalSetup,
    grid: Grid,
) -> Vec<VerificationReport> {
    instances
        .iter()
        .map(|inst| {
            let tolerances = Tolerances::for_family(&inst.spec);
            let outcome = build(&inst.spec, inst.mass.as_ref(), &inst.params, psi0, setup, grid)
                .map_err(|e| e.to_string())
                .and_then(|bundle| {
                    verify_bundle(&bundle, tolerances).map_err(|e| e.to_string())
                });
            let mut report = match outcome {
                Ok(report) => report,
                Err(error) => VerificationReport::failed(inst.spec.name(), tolerances, error),
            };
            report.family = format!("{} [{}]", report.family, inst.label);
            report
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{num, parse};
    use crate::families::Branch;

    fn params(bindings: &[(&str, f64)]) -> Params {
        bindings
            .iter()
            .map(|(n, v)| (n.to_string(), *v))
            .collect()
    }

    fn grid4001() -> Grid {
        Grid::new(-4.0, 4.0, 4001).unwrap()
    }

    fn setup() -> PhysicalSetup {
        PhysicalSetup::natural(1.0)
    }

    #[test]
    fn case3_bundle_passes_tight_tolerances() {
        let bundle = build(
            &FamilySpec::Case3 {
                delta: 1.0,
                branch: Branch::Plus,
            },
            Some(&parse("sech(x)^2").unwrap()),
            &Params::new(),
            1.0,
            setup(),
            grid4001(),
        )
        .unwrap();
        let report = verify_bundle(&bundle, Tolerances::CASE3).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.riccati_residual <= 1e-10);
        assert!(report.schrodinger_residual <= 1e-9);
        assert!(report.oracle_max_rel_dev <= 1e-5);
    }

    #[test]
    fn perturbed_potential_fails_verification() {
        let mut bundle = build(
            &FamilySpec::Case3 {
                delta: 1.0,
                branch: Branch::Plus,
            },
            Some(&parse("sech(x)^2").unwrap()),
            &Params::new(),
            1.0,
            setup(),
            grid4001(),
        )
        .unwrap();
        bundle.v = bundle.v.map(|v| v + 0.05);
        let report = verify_bundle(&bundle, Tolerances::CASE3).unwrap();
        assert!(!report.pass);
        assert!(report.schrodinger_residual > 1e-3);
    }

    #[test]
    fn constant_mass_sinh_solution_agrees_with_oracle() {
        // case1 with m = 1, beta = 1, c1 = 0 anchored at 0 is sinh(x)
        let grid = Grid::new(0.0, 4.0, 2001).unwrap();
        let bundle = build(
            &FamilySpec::Case1 {
                beta_c: 1.0,
                c1: 0.0,
            },
            Some(&parse("1").unwrap()),
            &Params::new(),
            1.0,
            setup(),
            grid,
        )
        .unwrap();
        let report = verify_bundle(&bundle, Tolerances::DEFAULT).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.oracle_max_rel_dev <= 1e-7, "{report:?}");
    }

    #[test]
    fn printed_theorem5_coincides_when_g_vanishes() {
        // constant mass and f = 0: every g-exponent is 1 and the printed
        // and engine forms are the same function
        let spec = FamilySpec::Theorem5 {
            f: num(0.0),
            branch: Branch::Minus,
            c: 1.0,
        };
        // psi is exactly linear here, so the metric runs in its
        // pure-rounding regime; a moderate grid keeps the 1/h^2 stencil
        // amplification of rounding noise below the 1e-8 target
        let grid = Grid::new(-4.0, 4.0, 501).unwrap();
        let r = printed_formula_crosscheck(
            &spec,
            Some(&parse("1").unwrap()),
            &Params::new(),
            1.0,
            setup(),
            grid,
        )
        .unwrap();
        assert!(r <= 1e-8, "printed residual {r}");
    }

    #[test]
    fn printed_theorem5_disagrees_for_exponential_mass() {
        // the adjudication run: engine residual passes, the printed form
        // (missing the 1/2 in the outer exponent, fixed inner sign) does
        // not solve the equation
        let lam = 0.6;
        let spec = FamilySpec::Theorem5 {
            f: num(3.0 * lam * lam),
            branch: Branch::Minus,
            c: 1.0,
        };
        let m = parse("exp(lambda*x)").unwrap();
        let p = params(&[("lambda", lam)]);
        let st = setup();
        let engine = build(&spec, Some(&m), &p, 1.0, st, grid4001()).unwrap();
        let engine_res = engine.schrodinger_residual().unwrap();
        let printed = printed_formula_crosscheck(&spec, Some(&m), &p, 1.0, st, grid4001()).unwrap();
        assert!(engine_res <= 1e-5, "engine residual {engine_res}");
        assert!(
            printed > 1e-3,
            "printed form unexpectedly solves the equation: {printed}"
        );
        assert!(
            printed > 100.0 * engine_res,
            "printed {printed} vs engine {engine_res}"
        );
    }

    #[test]
    fn printed_theorem6_coincides_when_rate_is_positive() {
        // m = e^{lam x}, f = 0: b + f = lam > 0, so the printed root
        // sqrt((b+f)^2) loses no sign and the forms agree up to constants
        let spec = FamilySpec::Theorem6 {
            f: num(0.0),
            c: 1.0,
        };
        let r = printed_formula_crosscheck(
            &spec,
            Some(&parse("exp(lambda*x)").unwrap()),
            &params(&[("lambda", 0.5)]),
            1.0,
            setup(),
            grid4001(),
        )
        .unwrap();
        assert!(r <= 1e-8, "printed residual {r}");
    }

    #[test]
    fn printed_theorem6_breaks_when_rate_changes_sign() {
        // sech^2 mass with f = tanh: b + f changes sign, the printed
        // unsigned root kinks and the verbatim form stops solving
        let spec = FamilySpec::Theorem6 {
            f: parse("tanh(x)").unwrap(),
            c: 1.0,
        };
        let m = parse("sech(x)^2").unwrap();
        let st = setup();
        let engine = build(&spec, Some(&m), &Params::new(), 1.0, st, grid4001()).unwrap();
        let engine_res = engine.schrodinger_residual().unwrap();
        let printed =
            printed_formula_crosscheck(&spec, Some(&m), &Params::new(), 1.0, st, grid4001())
                .unwrap();
        assert!(engine_res <= 1e-5);
        assert!(printed > 1e-3, "printed residual {printed}");
    }

    #[test]
    fn printed_theorem7_residual_is_recorded() {
        let spec = FamilySpec::Theorem7 {
            f: parse("1 + 0.5*sech(x)").unwrap(),
            v: parse("1 + 0.5*sech(x)^2").unwrap(),
            c5: 8.0,
            c6: 1.0,
        };
        let st = setup();
        let engine = build(&spec, None, &Params::new(), 1.0, st, grid4001()).unwrap();
        let engine_res = engine.schrodinger_residual().unwrap();
        let printed =
            printed_formula_crosscheck(&spec, None, &Params::new(), 1.0, st, grid4001()).unwrap();
        assert!(engine_res <= 1e-5);
        assert!(printed.is_finite());
        // the printed b is missing a factor f; with this f it differs
        assert!(printed > 1e-3, "printed residual {printed}");
    }

    #[test]
    fn crosscheck_rejects_other_families() {
        let err = printed_formula_crosscheck(
            &FamilySpec::Case1 {
                beta_c: 1.0,
                c1: 0.0,
            },
            Some(&parse("1").unwrap()),
            &Params::new(),
            1.0,
            setup(),
            grid4001(),
        )
        .unwrap_err();
        assert!(matches!(err, BuildError::Precondition { .. }));
    }

    #[test]
    fn norm_vanishes_for_additive_energy_families() {
        // V = E + g(x) gives dV/dE = 1 and N = 0
        let st = setup();
        let grid = grid4001();
        let m = parse("m0*sech(w*x)^2").unwrap();
        let p = params(&[("m0", 1.0), ("w", 1.2)]);
        let psi_norm = |spec: &FamilySpec, mass: Option<&Expr>| {
            let bundle = build(spec, mass, &p, 1.0, st, grid).unwrap();
            bundle.psi.map(|v| v * v).integral().unwrap()
        };
        let cases: Vec<FamilySpec> = vec![
            FamilySpec::Case1 {
                beta_c: 0.5,
                c1: 1.0,
            },
            FamilySpec::Case2 { a0: 1.0, f0: 0.0 },
            FamilySpec::Case3 {
                delta: 1.0,
                branch: Branch::Plus,
            },
            FamilySpec::Theorem4 {
                f: parse("1 + 0.5*sin(x)").unwrap(),
                branch: Branch::Plus,
                v0: 1.0,
            },
            FamilySpec::Theorem5 {
                f: parse("1 + 0.25*cos(x)").unwrap(),
                branch: Branch::Minus,
                c: 1.0,
            },
            FamilySpec::Theorem6 {
                f: parse("tanh(x)").unwrap(),
                c: 1.0,
            },
        ];
        for spec in &cases {
            let n = energy_dependent_norm(spec, Some(&m), &p, 1.0, st, grid, None).unwrap();
            let scale = psi_norm(spec, Some(&m));
            assert!(
                n.abs() <= 1e-8 * scale,
                "{}: N = {n}, int psi^2 = {scale}",
                spec.name()
            );
        }
    }

    #[test]
    fn norm_equals_psi_square_for_pinned_potential() {
        // theorem7 with f = 1 keeps the user potential exactly, so dV/dE
        // vanishes and N = int psi^2
        let st = setup();
        let grid = grid4001();
        let spec = FamilySpec::Theorem7 {
            f: num(1.0),
            v: parse("1 + 0.5*sech(x)^2").unwrap(),
            c5: 8.0,
            c6: 1.0,
        };
        let bundle = build(&spec, None, &Params::new(), 1.0, st, grid).unwrap();
        let psi_sq = bundle.psi.map(|v| v * v).integral().unwrap();
        let n = energy_dependent_norm(&spec, None, &Params::new(), 1.0, st, grid, None).unwrap();
        assert!(n > 0.0);
        assert!(
            (n - psi_sq).abs() <= 1e-8 * psi_sq,
            "N = {n}, int psi^2 = {psi_sq}"
        );
    }

    #[test]
    fn norm_central_difference_is_stable_under_delta_halving() {
        let st = setup();
        let grid = Grid::new(-4.0, 4.0, 2001).unwrap();
        let m = parse("sech(x)^2").unwrap();
        let spec = FamilySpec::Case1 {
            beta_c: 0.5,
            c1: 1.0,
        };
        let n1 =
            energy_dependent_norm(&spec, Some(&m), &Params::new(), 1.0, st, grid, Some(1e-3))
                .unwrap();
        let n2 =
            energy_dependent_norm(&spec, Some(&m), &Params::new(), 1.0, st, grid, Some(5e-4))
                .unwrap();
        // V is affine in E for this family, so the difference is pure
        // rounding, measured against the scale int psi^2
        let bundle = build(&spec, Some(&m), &Params::new(), 1.0, st, grid).unwrap();
        let scale = bundle.psi.map(|v| v * v).integral().unwrap();
        assert!((n1 - n2).abs() <= 1e-8 * scale, "{n1} vs {n2}, scale {scale}");
    }

    #[test]
    fn sweep_beta_grid_times_catalog() {
        let st = setup();
        let grid = Grid::new(-4.0, 4.0, 2001).unwrap();
        let mut instances = vec![];
        for beta in [0.25, 0.5, 1.0] {
            for entry in crate::families::CATALOG {
                instances.push(SweepInstance {
                    label: format!("beta={beta} mass={}", entry.name),
                    spec: FamilySpec::Case1 {
                        beta_c: beta,
                        c1: 1.0,
                    },
                    mass: Some(entry.expr()),
                    params: entry.default_params(),
                });
            }
        }
        let reports = sweep(&instances, 1.0, st, grid);
        assert_eq!(reports.len(), 15);
        for report in &reports {
            assert!(report.pass, "{:?}", report);
        }
    }

    #[test]
    fn sweep_records_failures_without_aborting() {
        let st = setup();
        let grid = Grid::new(-4.0, 4.0, 2001).unwrap();
        let instances = vec![
            SweepInstance {
                label: "bad".into(),
                spec: FamilySpec::Case3 {
                    delta: -1.0,
                    branch: Branch::Plus,
                },
                mass: Some(parse("1").unwrap()),
                params: Params::new(),
            },
            SweepInstance {
                label: "good".into(),
                spec: FamilySpec::Case3 {
                    delta: 1.0,
                    branch: Branch::Plus,
                },
                mass: Some(parse("sech(x)^2").unwrap()),
                params: Params::new(),
            },
        ];
        let reports = sweep(&instances, 1.0, st, grid);
        assert_eq!(reports.len(), 2);
        assert!(!reports[0].pass);
        assert!(reports[0].error.is_some());
        assert!(reports[1].pass);
        assert!(reports[1].error.is_none());
        assert!(sweep(&[], 1.0, st, grid).is_empty());
    }

    #[test]
    fn sweep_notes_delta_zero_degeneracy() {
        let st = setup();
        let grid = Grid::new(-4.0, 4.0, 2001).unwrap();
        let instances: Vec<SweepInstance> = [0.0, 1.0, 4.0]
            .iter()
            .map(|&delta| SweepInstance {
                label: format!("delta={delta}"),
                spec: FamilySpec::Case3 {
                    delta,
                    branch: Branch::Plus,
                },
                mass: Some(parse("sech(x)^2").unwrap()),
                params: Params::new(),
            })
            .collect();
        let reports = sweep(&instances, 1.0, st, grid);
        assert!(reports.iter().all(|r| r.pass));
        assert!(!reports[0].notes.is_empty(), "delta = 0 must carry a note");
        assert!(reports[1].notes.is_empty());
    }
}
