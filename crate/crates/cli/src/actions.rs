//! The `solve`, `eigen`, `realize` and `verify` pipelines.

use serde_json::{json, Value};
use weyl_bvp::elliptic::EllipticTriple;
use weyl_bvp::json::{ComplexJson, MatrixJson};
use weyl_bvp::linalg::{self, Vector, C64};
use weyl_bvp::opfunc::negative_squares;
use weyl_bvp::solver::{
    direct_solve_parts, eigen_correspondence, homogeneous_scan, krein_resolve, linearize, membership,
    solvability_probe, Linearization,
};
use weyl_bvp::{realize, BoundaryTriple, Error, MatrixFunction, OperatorFunction, RealizeOptions, Realization, Window};

use crate::config::{RhsJson, RunConfig};
use crate::output::{Artifacts, Table};
use crate::CliError;

/// Result of one action: the JSON report plus whether every check passed.
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

fn cj(z: C64) -> ComplexJson {
    ComplexJson(z)
}

struct Checks(Vec<Value>, bool);

impl Checks {
    fn new() -> Self {
        Checks(vec![], true)
    }

    fn add(&mut self, name: &str, value: f64, tol: f64) {
        let pass = value <= tol;
        self.1 &= pass;
        self.0.push(json!({ "name": name, "value": value, "tol": tol, "pass": pass }));
    }

    fn flag(&mut self, name: &str, pass: bool, detail: Value) {
        self.1 &= pass;
        self.0.push(json!({ "name": name, "pass": pass, "detail": detail }));
    }
}

struct Setup {
    et: EllipticTriple,
    tau: OperatorFunction,
}

fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    let et = cfg.problem()?.build_triple()?;
    let tau = cfg.tau()?.build(Some(et.discretization().n_boundary()))?;
    Ok(Setup { et, tau })
}

fn problem_summary(et: &EllipticTriple) -> Value {
    let de = et.discretization();
    json!({
        "dim": de.dim(),
        "n_interior": de.n_interior(),
        "n_boundary": de.n_boundary(),
        "weight": de.weight(),
        "eta": et.eta(),
    })
}

fn tau_kind(tau: &OperatorFunction) -> &'static str {
    match tau {
        OperatorFunction::Constant(_) => "constant",
        OperatorFunction::Rational(_) => "rational",
        OperatorFunction::Representation(_) => "representation",
    }
}

fn realize_opts(cfg: &RunConfig) -> Result<RealizeOptions, CliError> {
    Ok(RealizeOptions {
        window: cfg.samples.unwrap_or_default(),
        seed: cfg.seed("the realization")?,
        ..Default::default()
    })
}

/// The linearization, realizing τ only when the explicit rational form does not apply.
fn linearization(cfg: &RunConfig, s: &Setup) -> Result<(Linearization, Option<Realization>), CliError> {
    match linearize(&s.et, &s.tau, None) {
        Ok(lin) => Ok((lin, None)),
        Err(Error::InvalidInput(_)) => {
            let r = realize(&s.tau, &realize_opts(cfg)?)?;
            Ok((linearize(&s.et, &s.tau, Some(&r.triple))?, Some(r)))
        }
        Err(e) => Err(e.into()),
    }
}

/// Refuses when no fixed nonreal probe has `(M + τ)^{-1}` bounded: without
/// such a point the linearization is not defined.
fn require_solvable(s: &Setup) -> Result<(), CliError> {
    let probes: Vec<C64> = (0..10).map(|k| C64::new(0.0, 2f64.powi(k - 2))).collect();
    let mut last = None;
    for &l in &probes {
        match membership(&s.et, &s.tau, l) {
            Ok(m) if m.in_u => return Ok(()),
            Ok(m) => last = Some(m),
            Err(Error::OutsideU { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let (lambda, sigma_min) = last.map(|m| (m.lambda, m.sigma_min)).unwrap_or((probes[0], 0.0));
    Err(Error::OutsideU { lambda, sigma_min }.into())
}

fn rhs(cfg: &RunConfig, et: &EllipticTriple) -> Result<Vector, CliError> {
    let de = et.discretization();
    let n = de.n_interior();
    match cfg.rhs.clone().unwrap_or(RhsJson::Random) {
        RhsJson::Random => Ok(linalg::random_vector(&mut linalg::rng(cfg.seed("the random right-hand side")?), n)),
        RhsJson::Expression { expr } => {
            let f = weyl_bvp::Coefficient::Expr(expr).sampler(de.dim())?;
            Ok(Vector::from_iterator(n, de.interior_nodes().iter().map(|p| C64::new(f(p[0], p[1]), 0.0))))
        }
        RhsJson::File { path } => {
            let path = cfg.base.join(path);
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let vals: Vec<ComplexJson> = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if vals.len() != n {
                return Err(CliError::Config(format!("{}: {} values, expected {n}", path.display(), vals.len())));
            }
            Ok(Vector::from_iterator(n, vals.into_iter().map(|z| z.0)))
        }
    }
}

fn node_table(et: &EllipticTriple, values: &Vector) -> Table {
    let de = et.discretization();
    let mut header: Vec<&str> = if de.dim() == 1 { vec!["x"] } else { vec!["x", "y"] };
    header.extend(["re", "im"]);
    let rows = de
        .interior_nodes()
        .iter()
        .zip(values.iter())
        .map(|(p, z)| {
            let mut row = p[..de.dim()].to_vec();
            row.extend([z.re, z.im]);
            row
        })
        .collect();
    Table::new(&header, rows)
}

pub fn solve(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let lambda = cfg.lambda.ok_or_else(|| CliError::Config("solve needs \"lambda\"".into()))?.0;
    let g = rhs(cfg, &s.et)?;
    let m = membership(&s.et, &s.tau, lambda)?;
    if !m.in_u {
        return Err(Error::OutsideU { lambda, sigma_min: m.sigma_min }.into());
    }
    let k = krein_resolve(&s.et, &s.tau, lambda, &g)?;
    let d = direct_solve_parts(&s.et, &s.tau, lambda, &g)?;
    let agreement = (&k.f - &d.f).norm() / d.f.norm().max(f64::MIN_POSITIVE);
    out.table("solution.csv", node_table(&s.et, &k.f));
    Ok(Outcome {
        report: json!({
            "action": "solve",
            "problem": problem_summary(&s.et),
            "tau": tau_kind(&s.tau),
            "lambda": cj(lambda),
            "in_U": m.in_u,
            "sigma_min": m.sigma_min,
            "residuals": {
                "pde": k.pde_residual,
                "bc": k.bc_residual,
                "krein_vs_direct": agreement,
            },
            "norm_f": k.f.norm(),
        }),
        passed: true,
    })
}

pub fn eigen(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let window = cfg.window()?;
    require_solvable(&s)?;
    let (lin, _) = linearization(cfg, &s)?;
    let scan = homogeneous_scan(&s.et, &s.tau, window, cfg.grid.unwrap_or(400));
    let corr = eigen_correspondence(&lin, &s.et, &s.tau, window, &scan.roots, cfg.tol())?;
    out.table(
        "eigenvalues.csv",
        Table::new(
            &["re", "im", "sigma_min"],
            corr.checks.iter().map(|c| vec![c.lambda.re, c.lambda.im, c.sigma_min]).collect(),
        ),
    );
    out.table(
        "scan.csv",
        Table::new(&["lambda", "sigma_min"], scan.samples.iter().map(|p| vec![p.lambda, p.sigma_min]).collect()),
    );
    let eigenvalues: Vec<Value> = corr
        .checks
        .iter()
        .map(|c| {
            json!({
                "lambda": cj(c.lambda),
                "sigma_min": c.sigma_min,
                "pde_residual": c.pde_residual,
                "bc_residual": c.bc_residual,
                "root_distance": c.root_distance,
            })
        })
        .collect();
    let passed = corr.passed();
    Ok(Outcome {
        report: json!({
            "action": "eigen",
            "problem": problem_summary(&s.et),
            "tau": tau_kind(&s.tau),
            "window": window,
            "linearization": {
                "n_state": lin.n_state(),
                "hilbert": lin.is_hilbert(),
                "w_symmetry_residual": lin.w_symmetry_residual(),
            },
            "eigenvalues": eigenvalues,
            "roots": scan.roots,
            "excluded": scan.excluded,
            "unmatched_roots": corr.unmatched_roots,
            "failures": corr.failures(),
            "tol": corr.tol,
            "correspondence": passed,
        }),
        passed,
    })
}

fn triple_json(t: &BoundaryTriple) -> Value {
    json!({
        "state_gram": MatrixJson::from(t.state().gram()),
        "basis": MatrixJson::from(t.basis()),
        "g0": MatrixJson::from(t.g0()),
        "g1": MatrixJson::from(t.g1()),
    })
}

/// Green identity, identity suite and `M = τ` on the sample window.
fn realization_checks(checks: &mut Checks, tau: &OperatorFunction, r: &Realization, opts: &RealizeOptions) -> Result<(), CliError> {
    let pts = opts.window.sample(opts.seed ^ 0x5eed, 10);
    checks.add("realization green identity", r.triple.green_residual(), 1e-10);
    checks.add("realization identities", r.triple.verify_identities(&pts)?.max(), 1e-9);
    let mut fidelity: f64 = 0.0;
    for &l in &pts {
        let a = tau.eval(l)?;
        fidelity = fidelity.max((r.triple.weyl(l)? - &a).norm() / a.norm().max(f64::MIN_POSITIVE));
    }
    checks.add("weyl function equals tau", fidelity, 1e-9);
    Ok(())
}

fn realization_json(r: &Realization) -> Value {
    json!({
        "path": r.path.name(),
        "strict_kernel_dim": r.strict_kernel_dim,
        "minimal": r.minimal.map(|m| m.0),
        "vartheta": r.vartheta.map(cj),
        "state_dim": r.triple.state().dim(),
        "signature": r.triple.state().signature(),
    })
}

pub fn realize_action(cfg: &RunConfig, _out: &mut Artifacts) -> Result<Outcome, CliError> {
    let g = match &cfg.problem {
        Some(p) => Some(p.build()?.n_boundary()),
        None => None,
    };
    let tau = cfg.tau()?.build(g)?;
    let opts = realize_opts(cfg)?;
    let r = realize(&tau, &opts)?;
    let mut checks = Checks::new();
    realization_checks(&mut checks, &tau, &r, &opts)?;
    Ok(Outcome {
        report: json!({
            "action": "realize",
            "tau": tau_kind(&tau),
            "realization": realization_json(&r),
            "triple": triple_json(&r.triple),
            "checks": checks.0,
        }),
        passed: checks.1,
    })
}

pub fn verify(cfg: &RunConfig, _out: &mut Artifacts) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let seed = cfg.seed("verify")?;
    let mut checks = Checks::new();
    let pts = Window::default().sample(seed, 10);
    checks.add("elliptic green identity", s.et.triple().green_residual(), 1e-10);
    checks.add("elliptic identities", s.et.triple().verify_identities(&pts)?.max(), 1e-9);

    require_solvable(&s)?;
    let (lin, realization) = linearization(cfg, &s)?;
    if let Some(r) = &realization {
        realization_checks(&mut checks, &s.tau, r, &realize_opts(cfg)?)?;
    }
    checks.add("W-symmetry of the linearization", lin.w_symmetry_residual(), 1e-10);
    let nevanlinna = !matches!(s.tau, OperatorFunction::Representation(_));
    if nevanlinna && lin.is_hilbert() {
        match lin.symmetrized_max_imag() {
            Some(v) => checks.add("real spectrum of the symmetrized linearization", v, 1e-9),
            None => checks.flag("real spectrum of the symmetrized linearization", false, json!("Gram not positive")),
        }
    }

    let mut rng = linalg::rng(seed);
    let n_i = s.et.discretization().n_interior();
    let mut worst: f64 = 0.0;
    for l in (Window { re: [-50.0, 50.0], im: [0.1, 5.0] }).sample(seed ^ 1, 20) {
        let g = linalg::random_vector(&mut rng, n_i);
        let d = direct_solve_parts(&s.et, &s.tau, l, &g)?.f;
        let k = krein_resolve(&s.et, &s.tau, l, &g)?.f;
        let c = lin.compressed_resolvent(l, &g)?;
        let rel = |a: &Vector, b: &Vector| (a - b).norm() / b.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(rel(&k, &d)).max(rel(&c, &d)).max(rel(&c, &k));
    }
    checks.add("solver equivalence", worst, 1e-10);

    if nevanlinna {
        let probes = (Window { re: [-60.0, 60.0], im: [1e-3, 10.0] }).sample(seed ^ 2, 60);
        let res = solvability_probe(&s.et, &s.tau, &probes)?;
        let outside: Vec<ComplexJson> = res.iter().filter(|m| !m.in_u).map(|m| cj(m.lambda)).collect();
        checks.flag("nonreal probes lie in U", outside.is_empty(), json!({ "probes": res.len(), "outside": outside }));
        let upper: Vec<C64> = pts.iter().filter(|z| z.im > 0.0).take(5).cloned().collect();
        let kappa = negative_squares(&s.tau, &upper)?;
        checks.flag("no negative squares", kappa == 0, json!(kappa));
    }

    if cfg.window.is_some() {
        let window = cfg.window()?;
        let scan = homogeneous_scan(&s.et, &s.tau, window, cfg.grid.unwrap_or(400));
        let corr = eigen_correspondence(&lin, &s.et, &s.tau, window, &scan.roots, cfg.tol())?;
        checks.flag(
            "eigenvalue correspondence",
            corr.passed(),
            json!({ "eigenvalues": corr.checks.len(), "roots": scan.roots.len(), "failures": corr.failures() }),
        );
    }

    Ok(Outcome {
        report: json!({
            "action": "verify",
            "problem": problem_summary(&s.et),
            "tau": tau_kind(&s.tau),
            "realization": realization.as_ref().map(realization_json),
            "checks": checks.0,
            "passed": checks.1,
        }),
        passed: checks.1,
    })
}
