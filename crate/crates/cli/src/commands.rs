use std::fmt::Write as _;

use heun_core::closed_values::{a_orbit, ascending_boundary_values, descending_boundary_values, BoundaryValues};
use heun_core::expansions::{
    generate_coefficients, is_two_term, sum_expansion, sum_expansion_derivative, two_term_flags, DescendingBase,
    Direction, Expansion, ExpansionSpec,
};
use heun_core::heun::heun_residual_complex;
use heun_core::termination::{
    detect_termination_cases, finite_solution_at, q_roots, CaseKind, QRootSet, TerminationCase,
};
use heun_core::verify::{run_all, SuiteReport};
use heun_core::{HeunError, HeunParams, SeriesValue};
use log::info;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::params::ResolvedParams;
use crate::{code, exit_code_of, CaseChoice, Cli, CliError, Command, ExpansionChoice, Format, VERSION};

/// Point at which each real root's finite solution is checked.
const QROOT_CHECK_Z: f64 = 0.25;

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let tol = cli.tolerance()?;
    if cli.max_terms < 8 {
        return Err(CliError::input(format!("max-terms {} must be at least 8", cli.max_terms)));
    }
    match &cli.command {
        Command::Eval { z, expansion } => eval(cli, tol, z, *expansion),
        Command::Qroots { case, n } => qroots(cli, case.zip(*n)),
        Command::Boundary => boundary(cli),
        Command::Orbit => orbit(cli),
        Command::Verify => verify(cli),
    }
}

fn emit_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError::new(code::BAD_INPUT, e.to_string()))?;
    write_out(&format!("{s}\n"));
    Ok(())
}

/// Writes to stdout; a closed pipe is not an error worth a panic.
fn write_out(s: &str) {
    use std::io::Write;
    let mut o = std::io::stdout().lock();
    let _ = o.write_all(s.as_bytes()).and_then(|_| o.flush());
}

fn emit_csv<T: Serialize>(rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::input(e.to_string()))?;
    write_out(&String::from_utf8_lossy(&bytes));
    Ok(())
}

fn header(out: &mut String, p: &HeunParams) {
    let _ = writeln!(out, "heun {VERSION}");
    let _ = writeln!(out, "parameters: {}", ResolvedParams::from(p));
}

// ---------------------------------------------------------------- eval

#[derive(Debug, Serialize)]
struct EvalRow {
    z: f64,
    value_re: f64,
    value_im: f64,
    abs_err: f64,
    terms: usize,
    regime: &'static str,
    expansion: &'static str,
    converged: bool,
}

#[derive(Serialize)]
struct EvalReport<'a> {
    version: &'static str,
    params: ResolvedParams,
    tolerance: f64,
    results: &'a [EvalRow],
}

fn candidates(choice: ExpansionChoice) -> Vec<(&'static str, Option<DescendingBase>)> {
    let asc = ("ascending", None);
    let desc = |b: DescendingBase| -> (&'static str, Option<DescendingBase>) {
        let name = match b {
            DescendingBase::Gamma => "desc-gamma",
            DescendingBase::Alpha => "desc-alpha",
            DescendingBase::Beta => "desc-beta",
        };
        (name, Some(b))
    };
    match choice {
        ExpansionChoice::Ascending => vec![asc],
        ExpansionChoice::DescGamma => vec![desc(DescendingBase::Gamma)],
        ExpansionChoice::DescAlpha => vec![desc(DescendingBase::Alpha)],
        ExpansionChoice::DescBeta => vec![desc(DescendingBase::Beta)],
        ExpansionChoice::Auto => {
            let mut v = vec![asc];
            v.extend(DescendingBase::ALL.iter().map(|&b| desc(b)));
            v
        }
    }
}

fn eval(cli: &Cli, tol: f64, zs: &[f64], choice: ExpansionChoice) -> Result<u8, CliError> {
    let p = cli.params.resolve(false)?;
    if let Some(z) = zs.iter().find(|z| !(0.0..1.0).contains(*z)) {
        return Err(CliError::input(format!("z out of range: {z} is not in [0, 1)")));
    }
    if p.alpha * p.beta == 0.0 {
        return Err(CliError::new(
            code::POLE,
            "expansion inapplicable: alpha*beta = 0 makes every basis function constant",
        ));
    }
    let regime = if is_two_term(&p) { "two-term" } else { "three-term" };

    // Coefficients are built once per candidate, lazily.
    let cands = candidates(choice);
    let mut built: Vec<Option<Result<Expansion, HeunError>>> = vec![None; cands.len()];
    let mut rows = Vec::with_capacity(zs.len());
    let mut status = code::OK;
    for &z in zs {
        let mut chosen: Option<(usize, SeriesValue<C64>)> = None;
        let mut last_err: Option<HeunError> = None;
        for (i, (name, base)) in cands.iter().enumerate() {
            let e = built[i].get_or_insert_with(|| {
                let spec = match base {
                    None => ExpansionSpec::ascending(&p),
                    Some(b) => ExpansionSpec::descending(&p, *b),
                };
                generate_coefficients(&p, spec, cli.max_terms)
            });
            let r = match e {
                Ok(e) => sum_expansion(&p, e, z, tol),
                Err(err) => Err(err.clone()),
            };
            match r {
                Ok(v) if v.converged => {
                    chosen = Some((i, v));
                    break;
                }
                Ok(v) => {
                    info!("{name} at z = {z}: estimate {:e} above tolerance", v.abs_error_estimate);
                    if chosen.is_none() {
                        chosen = Some((i, v));
                    }
                }
                Err(err) => {
                    info!("{name} at z = {z}: {err}");
                    last_err = Some(err);
                }
            }
        }
        match chosen {
            Some((i, v)) => {
                if !v.converged {
                    status = status.max(code::NO_CONVERGENCE);
                }
                rows.push(EvalRow {
                    z,
                    value_re: v.value.re,
                    value_im: v.value.im,
                    abs_err: v.abs_error_estimate,
                    terms: v.terms_used,
                    regime,
                    expansion: cands[i].0,
                    converged: v.converged,
                });
            }
            None => {
                // Keep the other points; the row records the failure.
                let err = last_err.expect("at least one candidate");
                eprintln!("error: z = {z}: {err}");
                status = status.max(exit_code_of(&err));
                rows.push(EvalRow {
                    z,
                    value_re: f64::NAN,
                    value_im: f64::NAN,
                    abs_err: f64::INFINITY,
                    terms: 0,
                    regime,
                    expansion: "none",
                    converged: false,
                });
            }
        }
    }

    match cli.format {
        Format::Json => emit_json(&EvalReport {
            version: VERSION,
            params: (&p).into(),
            tolerance: tol,
            results: &rows,
        })?,
        Format::Csv => emit_csv(&rows)?,
        Format::Human => {
            let mut out = String::new();
            header(&mut out, &p);
            for r in &rows {
                let _ = writeln!(
                    out,
                    "z = {:<8} u = {:.15e}{:+.3e}i  err = {:.2e}  terms = {:<6} {} {}{}",
                    r.z,
                    r.value_re,
                    r.value_im,
                    r.abs_err,
                    r.terms,
                    r.regime,
                    r.expansion,
                    if r.converged { "" } else { "  NOT CONVERGED" }
                );
            }
            write_out(&out);
        }
    }
    Ok(status)
}

// ---------------------------------------------------------------- qroots

#[derive(Debug, Serialize)]
struct RootRow {
    case: &'static str,
    n: usize,
    root_re: f64,
    root_im: f64,
    residual: f64,
    relative_residual: f64,
    /// `|L u|` of the finite solution at the check point; real roots only.
    check_residual: Option<f64>,
}

#[derive(Serialize)]
struct CaseReport {
    case: &'static str,
    n: usize,
    forced: bool,
    /// Determinant coefficients in ascending powers of q.
    polynomial: Vec<f64>,
    roots: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct QrootsReport<'a> {
    version: &'static str,
    params: ResolvedParams,
    check_z: f64,
    cases: Vec<CaseReport>,
    rows: &'a [RootRow],
}

fn force_case(mut p: HeunParams, kind: CaseKind, n: usize) -> HeunParams {
    let nf = n as f64;
    match kind {
        CaseKind::Eps => p.epsilon = -nf,
        CaseKind::Alpha => p.alpha = p.gamma + p.epsilon + nf,
        CaseKind::Beta => p.beta = p.gamma + p.epsilon + nf,
    }
    p
}

fn check_residual(p: &HeunParams, case: TerminationCase, q: C64) -> Result<f64, HeunError> {
    let sol = finite_solution_at(p, case, q, Direction::Ascending)?;
    let z = QROOT_CHECK_Z;
    let s: Vec<C64> = (0..3)
        .map(|k| sum_expansion_derivative(&sol.params, &sol.expansion, z, k, 1e-14).map(|v| v.value))
        .collect::<Result<_, _>>()?;
    Ok(heun_residual_complex(&sol.params, q, s[0], s[1], s[2], z)?.norm())
}

fn qroots(cli: &Cli, forced: Option<(CaseChoice, usize)>) -> Result<u8, CliError> {
    let mut p = cli.params.resolve(true)?;
    let cases = match forced {
        Some((c, n)) => {
            let kind = match c {
                CaseChoice::Eps => CaseKind::Eps,
                CaseChoice::Alpha => CaseKind::Alpha,
                CaseChoice::Beta => CaseKind::Beta,
            };
            p = force_case(p, kind, n);
            p.check()?;
            vec![TerminationCase { kind, n }]
        }
        None => detect_termination_cases(&p),
    };
    if cases.is_empty() {
        return Err(CliError::new(
            code::NO_TERMINATION,
            "no termination case: none of epsilon, epsilon+gamma-alpha, epsilon+gamma-beta is a non-positive integer",
        ));
    }

    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &case in &cases {
        let set: QRootSet = q_roots(&p, case)?;
        for (i, &q) in set.roots.iter().enumerate() {
            let check = if q.im == 0.0 { Some(check_residual(&p, case, q)?) } else { None };
            rows.push(RootRow {
                case: case.kind.name(),
                n: case.n,
                root_re: q.re,
                root_im: q.im,
                residual: set.residuals[i],
                relative_residual: set.relative_residuals[i],
                check_residual: check,
            });
        }
        reports.push(CaseReport {
            case: case.kind.name(),
            n: case.n,
            forced: forced.is_some(),
            polynomial: set.coefficients.clone(),
            roots: set.roots.iter().map(|r| (r.re, r.im)).collect(),
        });
    }

    match cli.format {
        Format::Json => emit_json(&QrootsReport {
            version: VERSION,
            params: (&p).into(),
            check_z: QROOT_CHECK_Z,
            cases: reports,
            rows: &rows,
        })?,
        Format::Csv => emit_csv(&rows)?,
        Format::Human => {
            let mut out = String::new();
            header(&mut out, &p);
            for c in &reports {
                let _ = writeln!(
                    out,
                    "case {} N = {}{}: {} root(s)",
                    c.case,
                    c.n,
                    if c.forced { " (forced)" } else { "" },
                    c.roots.len()
                );
                for r in rows.iter().filter(|r| r.case == c.case) {
                    let check = match r.check_residual {
                        Some(x) => format!("  |L u|(z={QROOT_CHECK_Z}) = {x:.2e}"),
                        None => String::new(),
                    };
                    let _ = writeln!(
                        out,
                        "  q = {:.15e}{:+.15e}i  |D(q)| = {:.2e}{check}",
                        r.root_re, r.root_im, r.residual
                    );
                }
            }
            write_out(&out);
        }
    }
    Ok(code::OK)
}

// ---------------------------------------------------------------- boundary

#[derive(Debug, Serialize)]
struct BoundaryRow {
    family: String,
    gamma0: Option<f64>,
    u_at_0: f64,
    du_at_0: f64,
    u_at_1: Option<f64>,
    tag_u_at_0: String,
    tag_du_at_0: String,
    tag_u_at_1: String,
}

impl BoundaryRow {
    fn new(family: String, b: BoundaryValues) -> Self {
        Self {
            family,
            gamma0: b.gamma0,
            u_at_0: b.u_at_0,
            du_at_0: b.du_at_0,
            u_at_1: b.u_at_1,
            tag_u_at_0: format!("{:?}", b.method_tags.u_at_0),
            tag_du_at_0: format!("{:?}", b.method_tags.du_at_0),
            tag_u_at_1: format!("{:?}", b.method_tags.u_at_1),
        }
    }
}

#[derive(Serialize)]
struct BoundaryReport<'a> {
    version: &'static str,
    params: ResolvedParams,
    rows: &'a [BoundaryRow],
}

fn boundary(cli: &Cli) -> Result<u8, CliError> {
    let p = cli.params.resolve(false)?;
    let f = two_term_flags(&p);
    if !f.all() {
        let mark = |ok: bool, yes: &str, no: &str| if ok { yes.to_string() } else { no.to_string() };
        return Err(CliError::new(
            code::NOT_TWO_TERM,
            format!(
                "not in the two-term regime: {}; {}; {}",
                mark(f.a_is_half, "a = 1/2", "a ≠ 1/2"),
                mark(f.gamma_plus_delta_is_two, "γ + δ = 2", "γ + δ ≠ 2"),
                mark(f.q_matches, "q = aαβ + a(1−δ)ε", "q ≠ aαβ + a(1−δ)ε"),
            ),
        ));
    }
    let mut rows = vec![BoundaryRow::new("ascending".into(), ascending_boundary_values(&p)?)];
    let mut seen: Vec<f64> = Vec::new();
    for b in DescendingBase::ALL {
        let g0 = b.value(&p);
        if seen.contains(&g0) {
            continue;
        }
        seen.push(g0);
        rows.push(BoundaryRow::new(format!("desc-{}", b.name()), descending_boundary_values(&p, g0)?));
    }

    match cli.format {
        Format::Json => emit_json(&BoundaryReport {
            version: VERSION,
            params: (&p).into(),
            rows: &rows,
        })?,
        Format::Csv => emit_csv(&rows)?,
        Format::Human => {
            let mut out = String::new();
            header(&mut out, &p);
            let _ = writeln!(out, "{:<12} {:>10} {:>22} {:>22} {:>22}", "family", "gamma0", "u(0)", "u'(0)", "u(1)");
            for r in &rows {
                let g0 = r.gamma0.map_or("-".to_string(), |g| g.to_string());
                let u1 = match r.u_at_1 {
                    Some(0.0) => "0 (exact)".to_string(),
                    Some(v) => format!("{v:.15e}"),
                    None => "unavailable".to_string(),
                };
                let _ = writeln!(
                    out,
                    "{:<12} {:>10} {:>22.15e} {:>22.15e} {:>22}  [{}]",
                    r.family, g0, r.u_at_0, r.du_at_0, u1, r.tag_u_at_1
                );
            }
            write_out(&out);
        }
    }
    Ok(code::OK)
}

// ---------------------------------------------------------------- orbit

#[derive(Serialize)]
struct OrbitRow {
    a: f64,
}

fn orbit(cli: &Cli) -> Result<u8, CliError> {
    let a1 = cli.params.resolve_a()?;
    let o = a_orbit(a1).map_err(|e| CliError::input(e.to_string()))?;
    match cli.format {
        Format::Json => emit_json(&serde_json::json!({ "version": VERSION, "a1": a1, "orbit": o }))?,
        Format::Csv => emit_csv(&o.iter().map(|&a| OrbitRow { a }).collect::<Vec<_>>())?,
        Format::Human => {
            let list: Vec<String> = o.iter().map(|x| x.to_string()).collect();
            write_out(&format!("heun {VERSION}\norbit of a1 = {a1}: {{{}}}\n", list.join(", ")));
        }
    }
    Ok(code::OK)
}

// ---------------------------------------------------------------- verify

#[derive(Serialize)]
struct VerifyReport<'a> {
    version: &'static str,
    seed: u64,
    suites: &'a [SuiteReport],
}

fn verify(cli: &Cli) -> Result<u8, CliError> {
    let reports = run_all(cli.seed, cli.tol);
    match cli.format {
        Format::Json => emit_json(&VerifyReport {
            version: VERSION,
            seed: cli.seed,
            suites: &reports,
        })?,
        Format::Csv => emit_csv(&reports)?,
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "heun {VERSION}, seed {}", cli.seed);
            for r in &reports {
                let _ = writeln!(
                    out,
                    "{:<4} {:<17} {:>4} passed, {:>3} failed, worst {:.2e} (tol {:.0e})",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.cases - r.failures,
                    r.failures,
                    r.worst,
                    r.tolerance
                );
            }
            write_out(&out);
        }
    }
    Ok(if reports.iter().all(|r| r.passed()) { code::OK } else { code::VERIFY_FAILED })
}
