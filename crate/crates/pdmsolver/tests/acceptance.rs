//! Acceptance suite. Each test covers one numbered criterion, prints one
//! PASS/FAIL line (visible with `cargo test --test acceptance --
//! --nocapture`) and asserts the stated tolerances.
//!
//! The production configuration throughout: grid [-4, 4] with n = 4001,
//! hbar = 1, E = 1, psi0 = 1.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use pdmsolver::expr::{num, parse, Expr, Params};
use pdmsolver::families::{
    build, case1_mass_from_potential, case1_potential_from_mass, Branch, FamilySpec, CATALOG,
};
use pdmsolver::grid::{sample, Grid, Samples};
use pdmsolver::pdm::PhysicalSetup;
use pdmsolver::verify::{
    energy_dependent_norm, printed_formula_crosscheck, verify_bundle, Tolerances,
};

fn production_grid() -> Grid {
    Grid::new(-4.0, 4.0, 4001).unwrap()
}

fn setup() -> PhysicalSetup {
    PhysicalSetup::natural(1.0)
}

fn check(criterion: &str, pass: bool, details: String) {
    println!(
        "acceptance criterion {criterion}: {} - {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {details}");
}

struct SuiteRow {
    label: String,
    case3: bool,
    riccati: f64,
    schrodinger: f64,
    oracle_dev: f64,
    oracle_diverged: bool,
    masked: f64,
    elapsed: Duration,
}

/// The residual-suite instances: every construction over every catalog
/// mass (the constructed-mass family over its three generating
/// functions), built and verified once and shared across criteria 1-2.
fn residual_suite() -> &'static Vec<SuiteRow> {
    static SUITE: OnceLock<Vec<SuiteRow>> = OnceLock::new();
    SUITE.get_or_init(|| {
        let grid = production_grid();
        let st = setup();
        let f4 = parse("1 + 0.5*sin(x)").unwrap();
        let f5 = parse("1 + 0.25*cos(x)").unwrap();
        let f6 = parse("tanh(x)").unwrap();
        let mass_specs: Vec<(&str, FamilySpec)> = vec![
            (
                "case1 beta=0.5",
                FamilySpec::Case1 {
                    beta_c: 0.5,
                    c1: 1.0,
                },
            ),
            ("case2 a0=1", FamilySpec::Case2 { a0: 1.0, f0: 0.0 }),
            (
                "case3+ delta=1",
                FamilySpec::Case3 {
                    delta: 1.0,
                    branch: Branch::Plus,
                },
            ),
            (
                "case3- delta=1",
                FamilySpec::Case3 {
                    delta: 1.0,
                    branch: Branch::Minus,
                },
            ),
            (
                "theorem4+",
                FamilySpec::Theorem4 {
                    f: f4.clone(),
                    branch: Branch::Plus,
                    v0: 1.0,
                },
            ),
            (
                "theorem4-",
                FamilySpec::Theorem4 {
                    f: f4.clone(),
                    branch: Branch::Minus,
                    v0: 1.0,
                },
            ),
            ("case4a", FamilySpec::Case4a { v0: 1.0 }),
            ("case4b", FamilySpec::Case4b { v0: 1.0 }),
            (
                "theorem5+",
                FamilySpec::Theorem5 {
                    f: f5.clone(),
                    branch: Branch::Plus,
                    c: 1.0,
                },
            ),
            (
                "theorem5-",
                FamilySpec::Theorem5 {
                    f: f5.clone(),
                    branch: Branch::Minus,
                    c: 1.0,
                },
            ),
            (
                "theorem6",
                FamilySpec::Theorem6 {
                    f: f6.clone(),
                    c: 1.0,
                },
            ),
        ];

        let mut rows = Vec::new();
        for entry in CATALOG {
            let mass = entry.expr();
            let params = entry.default_params();
            for (label, spec) in &mass_specs {
                rows.push(run_instance(
                    format!("{label} @{}", entry.name),
                    spec,
                    Some(&mass),
                    &params,
                    st,
                    grid,
                ));
            }
        }
        // the constructed-mass family over three generating functions
        let v_pinned = parse("1 + 0.5*sech(x)^2").unwrap();
        for f_text in ["1", "2", "1 + 0.5*sech(x)"] {
            let spec = FamilySpec::Theorem7 {
                f: parse(f_text).unwrap(),
                v: v_pinned.clone(),
                c5: 8.0,
                c6: 1.0,
            };
            rows.push(run_instance(
                format!("theorem7 f={f_text}"),
                &spec,
                None,
                &Params::new(),
                st,
                grid,
            ));
        }
        rows
    })
}

fn run_instance(
    label: String,
    spec: &FamilySpec,
    mass: Option<&Expr>,
    params: &Params,
    st: PhysicalSetup,
    grid: Grid,
) -> SuiteRow {
    let started = Instant::now();
    let bundle = build(spec, mass, params, 1.0, st, grid)
        .unwrap_or_else(|e| panic!("{label}: build failed: {e}"));
    let report = verify_bundle(&bundle, Tolerances::for_family(spec))
        .unwrap_or_else(|e| panic!("{label}: verification errored: {e}"));
    let elapsed = started.elapsed();
    SuiteRow {
        label,
        case3: matches!(spec, FamilySpec::Case3 { .. }),
        riccati: report.riccati_residual,
        schrodinger: report.schrodinger_residual,
        oracle_dev: report.oracle_max_rel_dev,
        oracle_diverged: report.oracle_diverged,
        masked: report.masked_fraction,
        elapsed,
    }
}

#[test]
fn criterion_1_residual_suite() {
    let rows = residual_suite();
    let mut worst_r: (f64, &str) = (0.0, "");
    let mut worst_s: (f64, &str) = (0.0, "");
    let mut worst_t = Duration::ZERO;
    for row in rows {
        let (tol_r, tol_s) = if row.case3 {
            (1e-10, 1e-9)
        } else {
            (1e-6, 1e-5)
        };
        assert!(
            row.riccati <= tol_r,
            "{}: riccati residual {} > {tol_r}",
            row.label,
            row.riccati
        );
        assert!(
            row.schrodinger <= tol_s,
            "{}: schrodinger residual {} > {tol_s}",
            row.label,
            row.schrodinger
        );
        assert!(
            row.elapsed <= Duration::from_secs(1),
            "{}: took {:?}",
            row.label,
            row.elapsed
        );
        assert!(
            row.masked < 0.05,
            "{}: masked fraction {}",
            row.label,
            row.masked
        );
        if !row.case3 && row.riccati > worst_r.0 {
            worst_r = (row.riccati, &row.label);
        }
        if !row.case3 && row.schrodinger > worst_s.0 {
            worst_s = (row.schrodinger, &row.label);
        }
        worst_t = worst_t.max(row.elapsed);
    }
    check(
        "1 [residual suite]",
        true,
        format!(
            "{} instances; worst riccati {:.2e} ({}), worst schrodinger {:.2e} ({}), slowest {:?}",
            rows.len(),
            worst_r.0,
            worst_r.1,
            worst_s.0,
            worst_s.1,
            worst_t
        ),
    );
}

#[test]
fn criterion_2_oracle_cross_validation() {
    let rows = residual_suite();
    let mut worst: (f64, &str) = (0.0, "");
    for row in rows {
        assert!(!row.oracle_diverged, "{}: oracle diverged", row.label);
        assert!(
            row.oracle_dev <= 1e-5,
            "{}: oracle deviation {}",
            row.label,
            row.oracle_dev
        );
        if row.oracle_dev > worst.0 {
            worst = (row.oracle_dev, &row.label);
        }
    }
    check(
        "2 [oracle cross-validation]",
        true,
        format!("worst relative deviation {:.2e} ({})", worst.0, worst.1),
    );
}

#[test]
fn criterion_3_worked_example() {
    // m = m0 sech^2(w x) with (m0, w, beta) = (1, 1.2, 0.5): the built
    // potential matches the displayed closed form pointwise, and the
    // quadrature wavefunction passes the residual suite (criterion 1
    // covers the same instance; re-asserted here)
    let grid = production_grid();
    let st = setup();
    let params: Params = [("m0".to_string(), 1.0), ("w".to_string(), 1.2)].into();
    let mass = parse("m0*sech(w*x)^2").unwrap();
    let built = case1_potential_from_mass(&mass, 0.5, st, grid, &params).unwrap();
    let displayed = parse("E + beta*cosh(w*x)^2*(beta + 2*w*tanh(w*x))/(2*m0)").unwrap();
    let dparams: Params = [
        ("E".to_string(), 1.0),
        ("beta".to_string(), 0.5),
        ("m0".to_string(), 1.0),
        ("w".to_string(), 1.2),
    ]
    .into();
    let reference = sample(&displayed, grid, &dparams).unwrap();
    let scale = reference
        .values()
        .iter()
        .fold(1.0f64, |acc, v| acc.max((v - 1.0).abs()));
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        worst = worst.max((built.value(i) - reference.value(i)).abs());
    }
    let pointwise_ok = worst <= 1e-10 * scale;

    let row = residual_suite()
        .iter()
        .find(|r| r.label == "case1 beta=0.5 @sech2")
        .expect("suite contains the worked example");
    let residual_ok = row.riccati <= 1e-6 && row.schrodinger <= 1e-5;
    check(
        "3 [worked example]",
        pointwise_ok && residual_ok,
        format!(
            "max |V_built - V_displayed| = {:.2e} (scale {:.1}); riccati {:.2e}, schrodinger {:.2e}",
            worst, scale, row.riccati, row.schrodinger
        ),
    );
}

#[test]
fn criterion_4_reductions() {
    let grid = production_grid();
    let st = setup();
    let sech2 = parse("m0*sech(w*x)^2").unwrap();
    let sech2_params: Params = [("m0".to_string(), 1.0), ("w".to_string(), 1.2)].into();

    // (a) f = Delta with v0 -> large recovers the closed-form branch
    // log-derivatives
    let mut worst_u = 0.0f64;
    for branch in [Branch::Plus, Branch::Minus] {
        let t4 = build(
            &FamilySpec::Theorem4 {
                f: num(1.0),
                branch,
                v0: 1e12,
            },
            Some(&sech2),
            &sech2_params,
            1.0,
            st,
            grid,
        )
        .unwrap();
        let c3 = build(
            &FamilySpec::Case3 {
                delta: 1.0,
                branch,
            },
            Some(&sech2),
            &sech2_params,
            1.0,
            st,
            grid,
        )
        .unwrap();
        for i in 0..grid.len() {
            if t4.u.is_valid(i) && c3.u.is_valid(i) {
                worst_u = worst_u.max((t4.u.value(i) - c3.u.value(i)).abs());
            }
        }
    }
    let limit_ok = worst_u <= 1e-6;

    // (b) f = 0 reproduces the sqrt(m)-times-linear construction
    let gauss = parse("1 + A*exp(-x^2)").unwrap();
    let gauss_params: Params = [("A".to_string(), 1.0)].into();
    let via_t4 = build(
        &FamilySpec::Theorem4 {
            f: num(0.0),
            branch: Branch::Plus,
            v0: 1.0,
        },
        Some(&gauss),
        &gauss_params,
        1.0,
        st,
        grid,
    )
    .unwrap();
    let via_4a = build(
        &FamilySpec::Case4a { v0: 1.0 },
        Some(&gauss),
        &gauss_params,
        1.0,
        st,
        grid,
    )
    .unwrap();
    let scale_a = via_4a.psi.max_abs();
    let mut worst_a = 0.0f64;
    for i in 0..grid.len() {
        worst_a = worst_a.max((via_t4.psi.value(i) - via_4a.psi.value(i)).abs());
    }
    let a_ok = worst_a <= 1e-8 * scale_a;

    // (c) f = b^2 (signed root, b > 0) reproduces the m-times-quadrature
    // construction
    let lam = 0.5;
    let exp_mass = parse("exp(lambda*x)").unwrap();
    let exp_params: Params = [("lambda".to_string(), lam)].into();
    let via_t4b = build(
        &FamilySpec::Theorem4 {
            f: num(lam * lam),
            branch: Branch::Plus,
            v0: 1.0,
        },
        Some(&exp_mass),
        &exp_params,
        1.0,
        st,
        grid,
    )
    .unwrap();
    let via_4b = build(
        &FamilySpec::Case4b { v0: 1.0 },
        Some(&exp_mass),
        &exp_params,
        1.0,
        st,
        grid,
    )
    .unwrap();
    let scale_b = via_4b.psi.max_abs();
    let mut worst_b = 0.0f64;
    for i in 0..grid.len() {
        worst_b = worst_b.max((via_t4b.psi.value(i) - via_4b.psi.value(i)).abs());
    }
    let b_ok = worst_b <= 1e-8 * scale_b;

    check(
        "4 [reductions]",
        limit_ok && a_ok && b_ok,
        format!(
            "branch log-derivative limit dev {:.2e}; f=0 psi dev {:.2e}; f=b^2 psi dev {:.2e} (relative)",
            worst_u,
            worst_a / scale_a,
            worst_b / scale_b
        ),
    );
}

#[test]
fn criterion_5_inverse_pair() {
    let grid = production_grid();
    let st = setup();
    let mut worst = 0.0f64;
    for beta in [0.3, 1.0, 2.0] {
        for entry in CATALOG {
            let mass = entry.expr();
            let params = entry.default_params();
            // symbolic potential from the forward map, then invert
            let b_expr = mass.differentiate(1).div(mass.clone()).simplify();
            let v_expr = num(st.energy).add(
                num(beta * st.hbar * st.hbar / 2.0)
                    .mul(num(beta).sub(b_expr))
                    .div(mass.clone()),
            );
            let m0 = mass.eval(grid.x_min(), &params).unwrap();
            let recovered =
                case1_mass_from_potential(&v_expr, beta, 1.0 / m0, st, grid, &params).unwrap();
            let original = sample(&mass, grid, &params).unwrap();
            let scale = original.max_abs();
            for i in 0..grid.len() {
                worst = worst.max((recovered.value(i) - original.value(i)).abs() / scale);
            }
        }
    }
    check(
        "5 [inverse pair]",
        worst <= 1e-7,
        format!("max relative deviation {worst:.2e} over 3 betas x 5 masses"),
    );
}

#[test]
fn criterion_6_adjudication_records() {
    let grid = production_grid();
    let st = setup();
    let lam = 0.6;
    let exp_params: Params = [("lambda".to_string(), lam)].into();
    let cases: Vec<(&str, FamilySpec, Option<Expr>, Params)> = vec![
        (
            "theorem5",
            FamilySpec::Theorem5 {
                f: num(3.0 * lam * lam),
                branch: Branch::Minus,
                c: 1.0,
            },
            Some(parse("exp(lambda*x)").unwrap()),
            exp_params,
        ),
        (
            "theorem6",
            FamilySpec::Theorem6 {
                f: parse("tanh(x)").unwrap(),
                c: 1.0,
            },
            Some(parse("sech(x)^2").unwrap()),
            Params::new(),
        ),
        (
            "theorem7",
            FamilySpec::Theorem7 {
                f: parse("1 + 0.5*sech(x)").unwrap(),
                v: parse("1 + 0.5*sech(x)^2").unwrap(),
                c5: 8.0,
                c6: 1.0,
            },
            None,
            Params::new(),
        ),
    ];
    let mut details = String::new();
    for (name, spec, mass, params) in &cases {
        let bundle = build(spec, mass.as_ref(), params, 1.0, st, grid).unwrap();
        let riccati = bundle.riccati_residual().unwrap();
        let schrodinger = bundle.schrodinger_residual().unwrap();
        let printed =
            printed_formula_crosscheck(spec, mass.as_ref(), params, 1.0, st, grid).unwrap();
        assert!(
            printed.is_finite(),
            "{name}: printed residual must be recorded"
        );
        assert!(
            riccati <= 1e-6 && schrodinger <= 1e-5,
            "{name}: engine must pass regardless of the printed form \
             (riccati {riccati}, schrodinger {schrodinger})"
        );
        details.push_str(&format!(
            "{name}: engine {schrodinger:.2e} vs printed {printed:.2e}; "
        ));
    }
    check("6 [adjudication records]", true, details);
}

#[test]
fn criterion_7_numerics_quality_gates() {
    // (a) cumulative-integral empirical convergence order >= 3.5
    let err_at = |n: usize| {
        let grid = Grid::new(0.0, std::f64::consts::PI, n).unwrap();
        let s = Samples::from_fn(grid, f64::cos);
        let integral = s.cumulative_integral(0).unwrap();
        let mut worst = 0.0f64;
        for (i, x) in grid.points().enumerate() {
            worst = worst.max((integral.value(i) - x.sin()).abs());
        }
        worst
    };
    let order = (err_at(501) / err_at(1001)).log2();
    let order_ok = order >= 3.5;

    // (b) symbolic-vs-FD derivative agreement <= 1e-6 relative, for the
    // log-derivatives of every catalog mass
    let mut worst_d = 0.0f64;
    for entry in CATALOG {
        let mass = entry.expr();
        let params = entry.default_params();
        let b = mass.differentiate(1).div(mass.clone()).simplify();
        let h = 1e-3;
        for k in 0..20 {
            let x = -3.8 + 0.4 * k as f64;
            let f = |t: f64| {
                let m = mass.eval(t, &params).unwrap();
                m.ln()
            };
            let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h))
                / (12.0 * h);
            let sym = b.eval(x, &params).unwrap();
            worst_d = worst_d.max((sym - fd).abs() / (1.0 + sym.abs()));
        }
    }
    let deriv_ok = worst_d <= 1e-6;

    // (c) log-derivative round trip <= 1e-5 for a smooth nonvanishing psi
    let grid = Grid::new(-2.0, 2.0, 2001).unwrap();
    let psi = Samples::from_fn(grid, |x| (0.4 * x).cosh() * (-0.2 * x * x).exp() + 0.5);
    let u = pdmsolver::pdm::logderivative(&psi).unwrap();
    let back = pdmsolver::pdm::wavefunction_from_logderivative(&u, psi.value(0)).unwrap();
    let scale = psi.max_abs();
    let mut worst_rt = 0.0f64;
    for i in 0..grid.len() {
        worst_rt = worst_rt.max((back.value(i) - psi.value(i)).abs() / scale);
    }
    let rt_ok = worst_rt <= 1e-5;

    check(
        "7 [numerics quality gates]",
        order_ok && deriv_ok && rt_ok,
        format!(
            "quadrature order {order:.2}; derivative agreement {worst_d:.2e}; round trip {worst_rt:.2e}"
        ),
    );
}

#[test]
fn criterion_8_energy_dependent_norm() {
    let grid = production_grid();
    let st = setup();
    let sech2 = parse("m0*sech(w*x)^2").unwrap();
    let params: Params = [("m0".to_string(), 1.0), ("w".to_string(), 1.2)].into();
    let family_specs: Vec<FamilySpec> = vec![
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
    let mut worst_zero = 0.0f64;
    for spec in &family_specs {
        let bundle = build(spec, Some(&sech2), &params, 1.0, st, grid).unwrap();
        let psi_sq = bundle.psi.map(|v| v * v).integral().unwrap();
        let n = energy_dependent_norm(spec, Some(&sech2), &params, 1.0, st, grid, None).unwrap();
        worst_zero = worst_zero.max(n.abs() / psi_sq);
    }
    let zero_ok = worst_zero <= 1e-8;

    // pinned potential: f = 1 keeps the user's V, so dV/dE = 0 and
    // N = int psi^2 > 0
    let pinned = FamilySpec::Theorem7 {
        f: num(1.0),
        v: parse("1 + 0.5*sech(x)^2").unwrap(),
        c5: 8.0,
        c6: 1.0,
    };
    let bundle = build(&pinned, None, &Params::new(), 1.0, st, grid).unwrap();
    let psi_sq = bundle.psi.map(|v| v * v).integral().unwrap();
    let n = energy_dependent_norm(&pinned, None, &Params::new(), 1.0, st, grid, None).unwrap();
    let pinned_ok = n > 0.0 && (n - psi_sq).abs() <= 1e-8 * psi_sq;

    check(
        "8 [energy-dependent norm]",
        zero_ok && pinned_ok,
        format!(
            "max |N|/int psi^2 over additive-E families {worst_zero:.2e}; pinned-V N/int psi^2 = {:.12}",
            n / psi_sq
        ),
    );
}

#[test]
fn criterion_9_byte_determinism() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec![
            "solve".into(),
            "--family".into(),
            "case3".into(),
            "--mass".into(),
            "@sech2".into(),
            "--delta".into(),
            "1".into(),
            "--grid=-4:4:4001".into(),
        ],
        vec![
            "verify".into(),
            "--family".into(),
            "theorem5".into(),
            "--mass".into(),
            "@exp".into(),
            "--f".into(),
            "1 + 0.25*cos(x)".into(),
            "--branch".into(),
            "minus".into(),
            "--grid=-4:4:4001".into(),
        ],
        vec![
            "sweep".into(),
            "--family".into(),
            "case1".into(),
            "--beta-list".into(),
            "0.25,0.5".into(),
            "--mass-list".into(),
            "@constant,@sech2".into(),
            "--grid=-4:4:2001".into(),
        ],
    ];
    let artifacts = ["out0.csv", "out0.json", "out1.json", "out2.json"];
    for dir in [dir_a.path(), dir_b.path()] {
        for (k, run_args) in runs.iter().enumerate() {
            let mut argv: Vec<String> = vec!["pdmsolver".into()];
            argv.extend(run_args.iter().cloned());
            argv.push("--out".into());
            let ext = if k == 0 { "csv" } else { "json" };
            argv.push(dir.join(format!("out{k}.{ext}")).display().to_string());
            let code = pdmsolver::cli::run(argv);
            assert_eq!(code, 0, "run {k} failed");
        }
    }
    let mut compared = 0;
    for name in artifacts {
        let a = dir_a.path().join(name);
        let b = dir_b.path().join(name);
        if a.exists() {
            assert_eq!(
                std::fs::read(&a).unwrap(),
                std::fs::read(&b).unwrap(),
                "artifact {name} differs between runs"
            );
            compared += 1;
        }
    }
    assert!(compared >= 4, "expected at least 4 artifacts, saw {compared}");
    check(
        "9 [byte determinism]",
        true,
        format!("{compared} artifacts byte-identical across repeated runs"),
    );
}
