//! Command-line surface: solve | verify | invert | sweep | catalog.
//!
//! Configuration comes from flags plus an optional JSON config file
//! (flags override the file); there is no interactive mode, because the
//! intended users are scripts and test suites. Outputs are deterministic:
//! identical configs produce byte-identical CSV/JSON artifacts.
//!
//! Exit codes (stable): 0 pass, 1 verification failure, 2 config error,
//! 3 construction error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::expr::{parse, Expr, Params};
use crate::families::{
    self, build, case1_mass_from_potential, BuildError, Branch, FamilySpec, CATALOG,
};
use crate::grid::{Grid, Samples};
use crate::pdm::{PhysicalSetup, SolutionBundle};
use crate::verify::{
    energy_dependent_norm, printed_formula_crosscheck, sweep, verify_bundle, SweepInstance,
    Tolerances,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFY_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;

/// JSON artifacts carry this schema version.
const SCHEMA_VERSION: u32 = 1;

const GRID_ENV: &str = "PDM_DEFAULT_GRID";

#[derive(Parser)]
#[command(
    name = "pdmsolver",
    version,
    about = "Construct and verify exactly-solvable position-dependent-mass Schrodinger models",
    after_help = "Grid syntax: \"min:max:n\" with odd n >= 9 (use --grid=-4:4:4001 for \
                  negative bounds). The PDM_DEFAULT_GRID environment variable supplies the \
                  grid when --grid is absent."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a solution bundle and write a CSV (x,m,V,u,psi,mask) plus a
    /// JSON sidecar with constants, anchors and residuals
    Solve(RunArgs),
    /// Build, run the full verification (residuals + RK4 oracle), write a
    /// JSON report; exit 1 when verification fails
    Verify(RunArgs),
    /// Recover the mass profile from a potential via the constant-shift
    /// family inverse (requires --potential, --beta, --m2)
    Invert(RunArgs),
    /// Verify a family across parameter lists (--beta-list/--delta-list x
    /// --mass-list); failures are recorded per row, never abort the sweep
    Sweep(SweepArgs),
    /// List the built-in mass profiles (usable as --mass @name)
    Catalog(CatalogArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct RunArgs {
    /// Family: case1|case2|case3|theorem4|case4a|case4b|theorem5|theorem6|theorem7
    #[arg(long)]
    family: Option<String>,
    /// Mass profile m(x): an expression in x, or @name from the catalog
    #[arg(long)]
    mass: Option<String>,
    /// Potential V(x) (invert; pinned potential for theorem7)
    #[arg(long)]
    potential: Option<String>,
    /// Generating function f(x) for theorems 4-7
    #[arg(long)]
    f: Option<String>,
    /// Grid as "min:max:n" (n odd, >= 9)
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Planck constant (natural units by default)
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    /// Energy E (default 1)
    #[arg(long, allow_negative_numbers = true)]
    energy: Option<f64>,
    /// Case 1 constant beta
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Case 2 constant a0
    #[arg(long, allow_negative_numbers = true)]
    a0: Option<f64>,
    /// Case 2 phase f0 (default 0)
    #[arg(long, allow_negative_numbers = true)]
    f0: Option<f64>,
    /// Case 3 constant delta (>= 0)
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Branch for the paired families: plus|minus (default plus)
    #[arg(long)]
    branch: Option<String>,
    /// Integration constant v0 (theorem4/case4a/case4b; default 1)
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    /// Integration constant C (theorem5/theorem6; default 1)
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Integration constant C1 (case1; default 1)
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    /// Integration constant C5 (theorem7; default 1)
    #[arg(long, allow_negative_numbers = true)]
    c5: Option<f64>,
    /// Integration constant C6 (theorem7; default 1)
    #[arg(long, allow_negative_numbers = true)]
    c6: Option<f64>,
    /// Anchor constant m2 for invert (m(x_min) = 1/m2; default 1)
    #[arg(long, allow_negative_numbers = true)]
    m2: Option<f64>,
    /// Wavefunction scale psi0 (default 1)
    #[arg(long, allow_negative_numbers = true)]
    psi0: Option<f64>,
    /// Riccati residual tolerance override
    #[arg(long = "tol-r")]
    tol_r: Option<f64>,
    /// Schrodinger residual tolerance override
    #[arg(long = "tol-s")]
    tol_s: Option<f64>,
    /// Oracle deviation tolerance override
    #[arg(long = "tol-o")]
    tol_o: Option<f64>,
    /// Output path (CSV for solve/invert, JSON for verify/sweep)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print the JSON artifact to stdout
    #[arg(long)]
    json: bool,
    /// Bind an expression parameter, e.g. --param w=1.2 (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// JSON config file; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated beta values (case1 sweeps)
    #[arg(long = "beta-list", allow_hyphen_values = true)]
    beta_list: Option<String>,
    /// Comma-separated delta values (case3 sweeps)
    #[arg(long = "delta-list", allow_hyphen_values = true)]
    delta_list: Option<String>,
    /// Comma-separated mass entries (expressions or @names)
    #[arg(long = "mass-list")]
    mass_list: Option<String>,
}

#[derive(Args, Debug)]
struct CatalogArgs {
    /// Machine-readable listing
    #[arg(long)]
    json: bool,
}

/// File-backed half of the configuration; field names match the flags.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    family: Option<String>,
    mass: Option<String>,
    potential: Option<String>,
    f: Option<String>,
    grid: Option<String>,
    hbar: Option<f64>,
    energy: Option<f64>,
    beta: Option<f64>,
    a0: Option<f64>,
    f0: Option<f64>,
    delta: Option<f64>,
    branch: Option<String>,
    v0: Option<f64>,
    c: Option<f64>,
    c1: Option<f64>,
    c5: Option<f64>,
    c6: Option<f64>,
    m2: Option<f64>,
    psi0: Option<f64>,
    tol_r: Option<f64>,
    tol_s: Option<f64>,
    tol_o: Option<f64>,
    out: Option<PathBuf>,
    params: Option<BTreeMap<String, f64>>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Construction(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Construction(_) => EXIT_CONSTRUCTION,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Construction(m) => m,
        }
    }
}

impl From<BuildError> for CliError {
    fn from(err: BuildError) -> CliError {
        CliError::Construction(err.to_string())
    }
}

impl From<crate::pdm::PdmError> for CliError {
    fn from(err: crate::pdm::PdmError) -> CliError {
        CliError::Construction(err.to_string())
    }
}

fn config_err(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

/// Entry point for `main`: returns the process exit code.
pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

/// Testable entry point.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap handles --help/--version as "errors" with exit 0
            let code = if err.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Cmd::Solve(args) => cmd_solve(&args),
        Cmd::Verify(args) => cmd_verify(&args),
        Cmd::Invert(args) => cmd_invert(&args),
        Cmd::Sweep(args) => cmd_sweep(&args),
        Cmd::Catalog(args) => cmd_catalog(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}

// ---------------------------------------------------------------------
// configuration resolution
// ---------------------------------------------------------------------

/// Fully resolved run configuration.
struct RunConfig {
    family: Option<FamilySpec>,
    mass: Option<Expr>,
    mass_text: Option<String>,
    potential: Option<Expr>,
    params: Params,
    grid: Grid,
    setup: PhysicalSetup,
    psi0: f64,
    beta: Option<f64>,
    m2: f64,
    tol_r: Option<f64>,
    tol_s: Option<f64>,
    tol_o: Option<f64>,
    out: Option<PathBuf>,
    json_stdout: bool,
}

fn merged(args: &RunArgs) -> Result<(RunArgs, Option<BTreeMap<String, f64>>), CliError> {
    let mut merged = args.clone();
    let mut file_params = None;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let file: FileConfig = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("bad config {}: {e}", path.display())))?;
        merged.family = merged.family.or(file.family);
        merged.mass = merged.mass.or(file.mass);
        merged.potential = merged.potential.or(file.potential);
        merged.f = merged.f.or(file.f);
        merged.grid = merged.grid.or(file.grid);
        merged.hbar = merged.hbar.or(file.hbar);
        merged.energy = merged.energy.or(file.energy);
        merged.beta = merged.beta.or(file.beta);
        merged.a0 = merged.a0.or(file.a0);
        merged.f0 = merged.f0.or(file.f0);
        merged.delta = merged.delta.or(file.delta);
        merged.branch = merged.branch.or(file.branch);
        merged.v0 = merged.v0.or(file.v0);
        merged.c = merged.c.or(file.c);
        merged.c1 = merged.c1.or(file.c1);
        merged.c5 = merged.c5.or(file.c5);
        merged.c6 = merged.c6.or(file.c6);
        merged.m2 = merged.m2.or(file.m2);
        merged.psi0 = merged.psi0.or(file.psi0);
        merged.tol_r = merged.tol_r.or(file.tol_r);
        merged.tol_s = merged.tol_s.or(file.tol_s);
        merged.tol_o = merged.tol_o.or(file.tol_o);
        merged.out = merged.out.or(file.out);
        file_params = file.params;
    }
    Ok((merged, file_params))
}

fn parse_grid_token(token: &str) -> Result<Grid, CliError> {
    let trimmed = token.trim();
    let parts: Vec<&str> = trimmed.split(':').collect();
    if parts.len() != 3 {
        return Err(config_err(format!(
            "grid must be \"min:max:n\" (got `{trimmed}`)"
        )));
    }
    let x_min: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| config_err(format!("bad grid minimum `{}`", parts[0])))?;
    let x_max: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| config_err(format!("bad grid maximum `{}`", parts[1])))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| config_err(format!("bad grid point count `{}`", parts[2])))?;
    if n >= 9 && n.is_multiple_of(2) {
        return Err(config_err("grid n must be odd"));
    }
    Grid::new(x_min, x_max, n).map_err(|e| config_err(e.to_string()))
}

fn parse_expr_flag(text: &str, what: &str) -> Result<Expr, CliError> {
    parse(text).map_err(|e| config_err(format!("cannot parse {what} `{text}`: {e}")))
}

fn parse_branch(text: Option<&str>) -> Result<Branch, CliError> {
    match text {
        None | Some("plus") => Ok(Branch::Plus),
        Some("minus") => Ok(Branch::Minus),
        Some(other) => Err(config_err(format!(
            "branch must be `plus` or `minus` (got `{other}`)"
        ))),
    }
}

fn parse_param_binding(text: &str) -> Result<(String, f64), CliError> {
    let Some((name, value)) = text.split_once('=') else {
        return Err(config_err(format!(
            "--param expects NAME=VALUE (got `{text}`)"
        )));
    };
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| config_err(format!("bad parameter value in `{text}`")))?;
    Ok((name.trim().to_string(), value))
}

/// Resolve a mass flag: `@name` pulls a catalog profile (its defaults are
/// merged under the user's bindings), anything else parses as an
/// expression.
fn resolve_mass(text: &str, params: &mut Params) -> Result<(Expr, String), CliError> {
    if let Some(name) = text.strip_prefix('@') {
        let Some(entry) = families::catalog_find(name) else {
            let names: Vec<&str> = CATALOG.iter().map(|c| c.name).collect();
            return Err(config_err(format!(
                "unknown catalog mass `@{name}` (available: {})",
                names.join(", ")
            )));
        };
        for (key, value) in entry.defaults {
            params.entry(key.to_string()).or_insert(*value);
        }
        Ok((entry.expr(), entry.expression.to_string()))
    } else {
        Ok((parse_expr_flag(text, "mass expression")?, text.to_string()))
    }
}

fn resolve(args: &RunArgs, family_required: bool) -> Result<RunConfig, CliError> {
    let (merged, file_params) = merged(args)?;
    let mut params: Params = file_params.unwrap_or_default();
    for binding in &merged.params {
        let (name, value) = parse_param_binding(binding)?;
        params.insert(name, value);
    }

    let grid_token = merged
        .grid
        .clone()
        .or_else(|| std::env::var(GRID_ENV).ok())
        .ok_or_else(|| config_err(format!("missing --grid (or {GRID_ENV})")))?;
    let grid = parse_grid_token(&grid_token)?;

    let hbar = merged.hbar.unwrap_or(1.0);
    let energy = merged.energy.unwrap_or(1.0);
    let setup = PhysicalSetup::new(hbar, energy).map_err(|e| config_err(e.to_string()))?;
    let psi0 = merged.psi0.unwrap_or(1.0);
    if psi0 == 0.0 {
        return Err(config_err("psi0 must be nonzero"));
    }

    let mut mass = None;
    let mut mass_text = None;
    if let Some(text) = &merged.mass {
        let (expr, raw) = resolve_mass(text, &mut params)?;
        mass = Some(expr);
        mass_text = Some(raw);
    }
    let potential = match &merged.potential {
        Some(text) => Some(parse_expr_flag(text, "potential expression")?),
        None => None,
    };
    let f_expr = match &merged.f {
        Some(text) => Some(parse_expr_flag(text, "generating function")?),
        None => None,
    };

    let family = match &merged.family {
        Some(name) => Some(build_family_spec(name, &merged, &potential, &f_expr)?),
        None if family_required => return Err(config_err("missing --family")),
        None => None,
    };

    if let Some(spec) = &family {
        if spec.requires_mass() && mass.is_none() {
            return Err(config_err(format!(
                "family `{}` requires --mass",
                spec.name()
            )));
        }
        if !spec.requires_mass() && mass.is_some() {
            return Err(config_err(
                "family `theorem7` constructs its own mass; drop --mass",
            ));
        }
    }

    Ok(RunConfig {
        family,
        mass,
        mass_text,
        potential,
        params,
        grid,
        setup,
        psi0,
        beta: merged.beta,
        m2: merged.m2.unwrap_or(1.0),
        tol_r: merged.tol_r,
        tol_s: merged.tol_s,
        tol_o: merged.tol_o,
        out: merged.out,
        json_stdout: merged.json,
    })
}

fn build_family_spec(
    name: &str,
    args: &RunArgs,
    potential: &Option<Expr>,
    f_expr: &Option<Expr>,
) -> Result<FamilySpec, CliError> {
    let need = |flag: &str, v: Option<f64>| {
        v.ok_or_else(|| config_err(format!("family `{name}` requires --{flag}")))
    };
    let need_f = || {
        f_expr
            .clone()
            .ok_or_else(|| config_err(format!("family `{name}` requires --f")))
    };
    let branch = parse_branch(args.branch.as_deref())?;
    match name {
        "case1" => Ok(FamilySpec::Case1 {
            beta_c: need("beta", args.beta)?,
            c1: args.c1.unwrap_or(1.0),
        }),
        "case2" => Ok(FamilySpec::Case2 {
            a0: need("a0", args.a0)?,
            f0: args.f0.unwrap_or(0.0),
        }),
        "case3" => {
            let delta = need("delta", args.delta)?;
            if delta < 0.0 {
                return Err(config_err(format!(
                    "family `case3` requires --delta >= 0 (got {delta})"
                )));
            }
            Ok(FamilySpec::Case3 { delta, branch })
        }
        "theorem4" => Ok(FamilySpec::Theorem4 {
            f: need_f()?,
            branch,
            v0: args.v0.unwrap_or(1.0),
        }),
        "case4a" => Ok(FamilySpec::Case4a {
            v0: args.v0.unwrap_or(1.0),
        }),
        "case4b" => Ok(FamilySpec::Case4b {
            v0: args.v0.unwrap_or(1.0),
        }),
        "theorem5" => Ok(FamilySpec::Theorem5 {
            f: need_f()?,
            branch,
            c: args.c.unwrap_or(1.0),
        }),
        "theorem6" => Ok(FamilySpec::Theorem6 {
            f: need_f()?,
            c: args.c.unwrap_or(1.0),
        }),
        "theorem7" => Ok(FamilySpec::Theorem7 {
            f: need_f()?,
            v: potential
                .clone()
                .ok_or_else(|| config_err("family `theorem7` requires --potential"))?,
            c5: args.c5.unwrap_or(1.0),
            c6: args.c6.unwrap_or(1.0),
        }),
        other => Err(config_err(format!(
            "unknown family `{other}` (expected case1|case2|case3|theorem4|case4a|case4b|theorem5|theorem6|theorem7)"
        ))),
    }
}

fn tolerances_for(config: &RunConfig, spec: &FamilySpec) -> Tolerances {
    let mut tol = Tolerances::for_family(spec);
    if let Some(r) = config.tol_r {
        tol.riccati = r;
    }
    if let Some(s) = config.tol_s {
        tol.schrodinger = s;
    }
    if let Some(o) = config.tol_o {
        tol.oracle = o;
    }
    tol
}

// ---------------------------------------------------------------------
// artifact emission
// ---------------------------------------------------------------------

/// 17-significant-digit decimal float, fixed format for byte-stable CSVs.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn solution_csv(bundle: &SolutionBundle) -> String {
    let grid = bundle.grid();
    let mut out = String::with_capacity(grid.len() * 96);
    out.push_str("x,m,V,u,psi,mask\n");
    for (i, x) in grid.points().enumerate() {
        let ok = bundle.m.is_valid(i)
            && bundle.v.is_valid(i)
            && bundle.u.is_valid(i)
            && bundle.psi.is_valid(i);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(x),
            fmt_float(bundle.m.value(i)),
            fmt_float(bundle.v.value(i)),
            fmt_float(bundle.u.value(i)),
            fmt_float(bundle.psi.value(i)),
            u8::from(ok),
        );
    }
    out
}

fn json_line(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn grid_json(grid: Grid) -> serde_json::Value {
    serde_json::json!({
        "x_min": grid.x_min(),
        "x_max": grid.x_max(),
        "n": grid.len(),
    })
}

// ---------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------

fn cmd_solve(args: &RunArgs) -> Result<i32, CliError> {
    let config = resolve(args, true)?;
    let spec = config.family.clone().expect("family required");
    let bundle = build(
        &spec,
        config.mass.as_ref(),
        &config.params,
        config.psi0,
        config.setup,
        config.grid,
    )?;
    let riccati = bundle.riccati_residual()?;
    let schrodinger = bundle.schrodinger_residual()?;

    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("solution.csv"));
    let sidecar = sidecar_path(&out);
    let payload = serde_json::json!({
        "schema": SCHEMA_VERSION,
        "command": "solve",
        "family": spec,
        "mass": config.mass_text,
        "params": config.params,
        "grid": grid_json(config.grid),
        "setup": bundle.setup,
        "psi0": config.psi0,
        "anchor": config.grid.x_min(),
        "residuals": { "riccati": riccati, "schrodinger": schrodinger },
        "pole": bundle.pole,
        "notes": bundle.notes,
        "csv": out.file_name().map(|n| n.to_string_lossy().into_owned()),
    });
    write_text(&out, &solution_csv(&bundle))?;
    let json_text = json_line(&payload);
    write_text(&sidecar, &json_text)?;
    if config.json_stdout {
        print!("{json_text}");
    } else {
        println!(
            "wrote {} and {} (riccati {riccati:.3e}, schrodinger {schrodinger:.3e})",
            out.display(),
            sidecar.display()
        );
    }
    Ok(EXIT_PASS)
}

fn cmd_verify(args: &RunArgs) -> Result<i32, CliError> {
    let config = resolve(args, true)?;
    let spec = config.family.clone().expect("family required");
    let bundle = build(
        &spec,
        config.mass.as_ref(),
        &config.params,
        config.psi0,
        config.setup,
        config.grid,
    )?;
    let tol = tolerances_for(&config, &spec);
    let mut report = verify_bundle(&bundle, tol)?;
    if matches!(
        spec,
        FamilySpec::Theorem5 { .. } | FamilySpec::Theorem6 { .. } | FamilySpec::Theorem7 { .. }
    ) {
        let printed = printed_formula_crosscheck(
            &spec,
            config.mass.as_ref(),
            &config.params,
            config.psi0,
            config.setup,
            config.grid,
        )?;
        report.printed_formula_residual = Some(printed);
    }
    let norm = energy_dependent_norm(
        &spec,
        config.mass.as_ref(),
        &config.params,
        config.psi0,
        config.setup,
        config.grid,
        None,
    )?;

    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("report.json"));
    let payload = serde_json::json!({
        "schema": SCHEMA_VERSION,
        "command": "verify",
        "family": spec,
        "mass": config.mass_text,
        "params": config.params,
        "grid": grid_json(config.grid),
        "setup": bundle.setup,
        "psi0": config.psi0,
        "anchor": config.grid.x_min(),
        "energy_dependent_norm": norm,
        "report": report,
    });
    let json_text = json_line(&payload);
    write_text(&out, &json_text)?;
    if config.json_stdout {
        print!("{json_text}");
    } else {
        println!(
            "{}: riccati {:.3e} schrodinger {:.3e} oracle {:.3e} (report: {})",
            if report.pass { "PASS" } else { "FAIL" },
            report.riccati_residual,
            report.schrodinger_residual,
            report.oracle_max_rel_dev,
            out.display()
        );
    }
    Ok(if report.pass {
        EXIT_PASS
    } else {
        EXIT_VERIFY_FAIL
    })
}

fn cmd_invert(args: &RunArgs) -> Result<i32, CliError> {
    let config = resolve(args, false)?;
    let potential = config
        .potential
        .clone()
        .ok_or_else(|| config_err("invert requires --potential"))?;
    let beta = config
        .beta
        .ok_or_else(|| config_err("invert requires --beta"))?;
    let mass = case1_mass_from_potential(
        &potential,
        beta,
        config.m2,
        config.setup,
        config.grid,
        &config.params,
    )?;

    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("mass.csv"));
    let sidecar = sidecar_path(&out);
    let csv = mass_csv(&mass);
    let payload = serde_json::json!({
        "schema": SCHEMA_VERSION,
        "command": "invert",
        "family": "case1",
        "potential": potential.to_string(),
        "beta": beta,
        "m2": config.m2,
        "params": config.params,
        "grid": grid_json(config.grid),
        "setup": config.setup,
        "anchor": config.grid.x_min(),
        "csv": out.file_name().map(|n| n.to_string_lossy().into_owned()),
    });
    write_text(&out, &csv)?;
    let json_text = json_line(&payload);
    write_text(&sidecar, &json_text)?;
    if config.json_stdout {
        print!("{json_text}");
    } else {
        println!("wrote {} and {}", out.display(), sidecar.display());
    }
    Ok(EXIT_PASS)
}

fn mass_csv(mass: &Samples) -> String {
    let grid = mass.grid();
    let mut out = String::with_capacity(grid.len() * 48);
    out.push_str("x,m,mask\n");
    for (i, x) in grid.points().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_float(x),
            fmt_float(mass.value(i)),
            u8::from(mass.is_valid(i)),
        );
    }
    out
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("bad {what} entry `{part}`")))
        })
        .collect()
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32, CliError> {
    // the swept constants come from the list flags, not the single-value
    // flags, so resolve the shared configuration without a family
    let mut shared = args.run.clone();
    let family_name = shared
        .family
        .take()
        .ok_or_else(|| config_err("sweep requires --family"))?;
    let config = resolve(&shared, false)?;
    let branch = parse_branch(args.run.branch.as_deref())?;

    // the swept constants, by family
    let constants: Vec<(String, FamilySpec)> = match family_name.as_str() {
        "case1" => {
            let betas = parse_f64_list(
                args.beta_list
                    .as_deref()
                    .ok_or_else(|| config_err("sweep over case1 requires --beta-list"))?,
                "--beta-list",
            )?;
            betas
                .into_iter()
                .map(|beta| {
                    (
                        format!("beta={beta}"),
                        FamilySpec::Case1 {
                            beta_c: beta,
                            c1: args.run.c1.unwrap_or(1.0),
                        },
                    )
                })
                .collect()
        }
        "case3" => {
            let deltas = parse_f64_list(
                args.delta_list
                    .as_deref()
                    .ok_or_else(|| config_err("sweep over case3 requires --delta-list"))?,
                "--delta-list",
            )?;
            deltas
                .into_iter()
                .map(|delta| (format!("delta={delta}"), FamilySpec::Case3 { delta, branch }))
                .collect()
        }
        other => {
            return Err(config_err(format!(
                "sweep supports case1 (--beta-list) and case3 (--delta-list), not `{other}`"
            )))
        }
    };

    // the swept masses: --mass-list or the single --mass
    let mut masses: Vec<(String, Expr, Params)> = vec![];
    if let Some(list) = &args.mass_list {
        for token in list.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let mut params = config.params.clone();
            let (expr, _) = resolve_mass(token, &mut params)?;
            masses.push((token.to_string(), expr, params));
        }
    } else if let Some(mass) = &config.mass {
        masses.push((
            config.mass_text.clone().unwrap_or_default(),
            mass.clone(),
            config.params.clone(),
        ));
    } else {
        return Err(config_err("sweep requires --mass or --mass-list"));
    }

    let mut instances = vec![];
    for (const_label, spec) in &constants {
        for (mass_label, mass, params) in &masses {
            instances.push(SweepInstance {
                label: format!("{const_label} mass={mass_label}"),
                spec: spec.clone(),
                mass: Some(mass.clone()),
                params: params.clone(),
            });
        }
    }
    let reports = sweep(&instances, config.psi0, config.setup, config.grid);
    let passed = reports.iter().filter(|r| r.pass).count();

    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("sweep.json"));
    let payload = serde_json::json!({
        "schema": SCHEMA_VERSION,
        "command": "sweep",
        "family": family_name,
        "grid": grid_json(config.grid),
        "setup": config.setup,
        "psi0": config.psi0,
        "reports": reports,
    });
    let json_text = json_line(&payload);
    write_text(&out, &json_text)?;
    if config.json_stdout {
        print!("{json_text}");
    } else {
        println!(
            "{passed}/{} instances passed (report: {})",
            reports.len(),
            out.display()
        );
    }
    Ok(if passed == reports.len() {
        EXIT_PASS
    } else {
        EXIT_VERIFY_FAIL
    })
}

fn cmd_catalog(args: &CatalogArgs) -> Result<i32, CliError> {
    if args.json {
        let entries: Vec<serde_json::Value> = CATALOG
            .iter()
            .map(|entry| {
                let defaults: BTreeMap<&str, f64> = entry.defaults.iter().copied().collect();
                serde_json::json!({
                    "name": entry.name,
                    "expression": entry.expression,
                    "defaults": defaults,
                    "range": entry.range,
                })
            })
            .collect();
        print!(
            "{}",
            json_line(&serde_json::json!({
                "schema": SCHEMA_VERSION,
                "command": "catalog",
                "masses": entries,
            }))
        );
    } else {
        println!("built-in mass profiles (use as --mass @name):");
        for entry in CATALOG {
            let defaults = entry
                .defaults
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(", ");
            println!(
                "  @{:<9} {:<22} defaults: {:<22} valid: {}",
                entry.name, entry.expression, defaults, entry.range
            );
        }
    }
    Ok(EXIT_PASS)
}
