//! Implementations of the subcommands.  Every numeric value printed or
//! written goes through `fmt12`, and every run that produces files also
//! produces a `manifest.json`.

use std::path::{Path, PathBuf};

use modlim::report::{
    asymptotics_csv, density_csv, eta_csv, fmt12, line_chart, lsc_csv, sweep_csv, AsymptoticsRow,
    ChartSpec, Series,
};
use modlim::{
    asymptotic_modulus, boundary_to_json, check_beurling, epsilon_sweep, eta_sweep,
    extremal_density, liouville_mass_halfplane, lsc_approximation, modulus_vertical, quad_modulus,
    rasterize, sandwich_check, solve_modulus, vertical_family, BeurlingProbes, BoundaryFunction,
    DiscreteError, HalfPlaneTriple, ModulusEstimate, ProfileKind, SandwichConfig, SolveOptions,
};

use crate::config::{load_config, load_domain, parse_quad, read_file, sha256_hex, OutputWriter};
use crate::error::CliError;

fn kind_name(kind: ProfileKind) -> &'static str {
    match kind {
        ProfileKind::Step => "step",
        ProfileKind::PiecewiseLinear => "piecewise_linear",
        ProfileKind::SampledContinuous => "sampled",
    }
}

// ---------------------------------------------------------------------------
// domain validate
// ---------------------------------------------------------------------------

pub fn domain_validate(path: &Path) -> Result<(), CliError> {
    let text = read_file(path)?;
    let f = modlim::boundary_from_json(&text)?;
    let kind = f.kind();
    // Semantic validation (positivity, lower semicontinuity) happens here.
    let d = modlim::build_graph_domain(f)?;
    let iv = d.interval();
    println!("kind: {}", kind_name(kind));
    println!("interval: [{}, {}]", fmt12(iv.lo()), fmt12(iv.hi()));
    println!("area: {}", fmt12(d.area()));
    println!("min height: {}", fmt12(d.min_height()));
    println!("lsc: valid");
    Ok(())
}

// ---------------------------------------------------------------------------
// modulus
// ---------------------------------------------------------------------------

pub struct ModulusParams {
    pub mode: crate::Mode,
    pub args: Vec<String>,
    pub quad: Option<Vec<String>>,
    pub h: f64,
    pub tol: f64,
    pub eta: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub verify: bool,
    pub dump_density: bool,
    pub out: PathBuf,
}

pub fn modulus(p: &ModulusParams) -> Result<(), CliError> {
    match p.mode {
        crate::Mode::AnalyticQuad => modulus_analytic(p),
        crate::Mode::Vertical => modulus_vertical_cmd(p),
        crate::Mode::Discrete => modulus_discrete(p),
    }
}

fn one_path(args: &[String]) -> Result<&Path, CliError> {
    match args {
        [p] => Ok(Path::new(p)),
        _ => Err(CliError::Usage(format!(
            "this mode takes exactly one positional argument (the domain file), got {}",
            args.len()
        ))),
    }
}

fn modulus_analytic(p: &ModulusParams) -> Result<(), CliError> {
    let ws: Vec<f64> = p
        .args
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{s:?} is not a number")))
        })
        .collect::<Result<_, _>>()?;
    let [w1, w2, w3] = ws[..] else {
        return Err(CliError::Usage(format!(
            "analytic-quad takes exactly three boundary points w1 w2 w3, got {}",
            ws.len()
        )));
    };
    let t = HalfPlaneTriple::new(w1, w2, w3)?;
    let m = quad_modulus(&t);
    let mass = liouville_mass_halfplane(&t);
    let est = asymptotic_modulus(mass);
    println!("mode: analytic-quad");
    println!("triple: ({}, {}, {})", fmt12(w1), fmt12(w2), fmt12(w3));
    println!("modulus: {}", fmt12(m));
    println!("cross-ratio mass: {}", fmt12(mass));
    println!("two-term estimate: {}", fmt12(est));
    println!("defect: {}", fmt12(m - est));
    Ok(())
}

fn modulus_vertical_cmd(p: &ModulusParams) -> Result<(), CliError> {
    let d = load_domain(one_path(&p.args)?)?;
    let q = parse_quad(&d, &p.quad)?;
    let fam = vertical_family(&d, &q);
    let m = modulus_vertical(&fam)?;
    println!("mode: vertical");
    println!("modulus: {}", fmt12(m));
    if p.verify {
        let rho = extremal_density(&fam)?;
        println!("extremal density energy: {}", fmt12(rho.energy()?));
        let probes = BeurlingProbes {
            seed: p.seed,
            ..Default::default()
        };
        let rep = check_beurling(&rho, &fam, &probes);
        println!(
            "verification: unit-length max deviation {}; min pairing {} over {} probes",
            fmt12(rep.unit_length_max_dev),
            fmt12(rep.min_pairing),
            rep.probes_run
        );
        if rep.passed {
            println!("extremality: verified");
        } else {
            println!("extremality: FAILED");
            return Err(CliError::Solver(
                "the extremality criterion failed for the canonical density".into(),
            ));
        }
    }
    Ok(())
}

fn print_estimate(est: &ModulusEstimate, h: f64, nodes: usize, converged: bool) {
    println!("mode: discrete");
    println!("h: {}", fmt12(h));
    println!("nodes: {nodes}");
    println!("value: {}", fmt12(est.value));
    println!("lower bound: {}", fmt12(est.lower_bound));
    println!("gap: {}", fmt12(est.gap));
    println!("iterations: {}", est.iterations);
    println!("converged: {converged}");
}

fn modulus_discrete(p: &ModulusParams) -> Result<(), CliError> {
    let path = one_path(&p.args)?;
    let d = load_domain(path)?;
    let q = parse_quad(&d, &p.quad)?;
    let dd = rasterize(&d, p.h, &q)?;
    let opts = SolveOptions {
        tol: p.tol,
        max_iter: p.max_iter,
        eta: p.eta,
        seed: p.seed,
    };
    let (est, converged) = match solve_modulus(&dd, &opts) {
        Ok(est) => (est, true),
        // The partial certificate is still a valid primal/dual pair; print
        // and dump it before reporting the failure.
        Err(DiscreteError::IterationLimit(est)) => (*est, false),
        Err(e) => return Err(e.into()),
    };
    print_estimate(&est, dd.h(), dd.n_nodes(), converged);
    if p.dump_density {
        let mut out = OutputWriter::new(&p.out)?;
        out.write("density.csv", &density_csv(&dd, est.density.as_slice()))?;
        let param_record = format!(
            "modulus --mode discrete {} --h {} --tol {} --eta {:?} --max-iter {} --seed {}",
            path.display(),
            fmt12(p.h),
            fmt12(p.tol),
            p.eta,
            p.max_iter,
            p.seed
        );
        out.finish("modulus", p.seed, &sha256_hex(param_record.as_bytes()))?;
    }
    if !converged {
        return Err(CliError::Solver(format!(
            "iteration limit reached with duality gap {} (partial certificate printed)",
            fmt12(est.gap)
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep eps / sweep eta
// ---------------------------------------------------------------------------

fn require_list(list: &Option<Vec<f64>>, what: &str) -> Result<Vec<f64>, CliError> {
    list.clone()
        .ok_or_else(|| CliError::Usage(format!("config needs {what}")))
}

/// Print a summary block to stdout and return it for summary.txt.
fn emit(lines: Vec<String>) -> String {
    let mut s = String::new();
    for l in lines {
        println!("{l}");
        s.push_str(&l);
        s.push('\n');
    }
    s
}

pub fn sweep_eps(config_path: &Path, out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let loaded = load_config(config_path)?;
    let d = loaded.domain()?;
    let q = parse_quad(&d, &loaded.config.quad)?;
    let eps_list = require_list(&loaded.config.eps_list, "eps_list")?;
    let cfg = loaded.sweep_config();
    let bound = loaded.config.rel_error_bound.unwrap_or(0.02);
    if !(bound.is_finite() && bound > 0.0) {
        return Err(CliError::Usage(format!(
            "rel_error_bound must be finite and positive, got {bound}"
        )));
    }

    let rep = epsilon_sweep(&d, &q, &eps_list, &cfg)?;

    let mut out = OutputWriter::new(out_dir)?;
    out.write("sweep_eps.csv", &sweep_csv(&rep))?;
    let points: Vec<(f64, f64)> = rep.rows.iter().map(|r| (r.eps, r.eps_times_modulus)).collect();
    let chart = line_chart(
        &ChartSpec {
            title: "Scaled modulus under vertical compression",
            x_label: "eps",
            y_label: "eps x modulus",
            log_x: true,
            target: Some(rep.target),
        },
        &[Series {
            name: "eps x modulus",
            points: &points,
        }],
    );
    out.write("sweep_eps.svg", &chart)?;

    let within = rep.relative_error <= bound;
    let summary = emit(vec![
        "command: sweep eps".into(),
        format!("rows: {}", rep.rows.len()),
        format!("target (vertical modulus): {}", fmt12(rep.target)),
        format!("extrapolated limit: {}", fmt12(rep.extrapolated_limit)),
        format!("relative error: {}", fmt12(rep.relative_error)),
        match rep.observed_rate {
            Some(r) => format!("observed rate: {}", fmt12(r)),
            None => "observed rate: n/a".into(),
        },
        format!("monotone tail: {}", rep.monotone_tail),
        format!("relative error bound: {}", fmt12(bound)),
        format!("verdict: {}", if within { "within bound" } else { "BOUND EXCEEDED" }),
    ]);
    out.write("summary.txt", &summary)?;
    out.finish("sweep eps", seed, &loaded.config_hash)?;

    if !within {
        return Err(CliError::Solver(format!(
            "relative error {} exceeds the configured bound {}",
            fmt12(rep.relative_error),
            fmt12(bound)
        )));
    }
    Ok(())
}

pub fn sweep_eta(config_path: &Path, out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let loaded = load_config(config_path)?;
    let d = loaded.domain()?;
    let q = parse_quad(&d, &loaded.config.quad)?;
    let eta_list = require_list(&loaded.config.eta_list, "eta_list")?;
    let h = loaded
        .config
        .h
        .ok_or_else(|| CliError::Usage("config needs h (cell size for restricted solves)".into()))?;
    let cfg = loaded.sweep_config();

    let rep = eta_sweep(&d, &q, &eta_list, h, &cfg)?;

    let mut out = OutputWriter::new(out_dir)?;
    out.write("sweep_eta.csv", &eta_csv(&rep))?;
    let points: Vec<(f64, f64)> = rep.rows.iter().map(|r| (r.eta, r.restricted_modulus)).collect();
    let chart = line_chart(
        &ChartSpec {
            title: "Modulus of the width-restricted family",
            x_label: "eta",
            y_label: "restricted modulus",
            log_x: true,
            target: None,
        },
        &[Series {
            name: "restricted modulus",
            points: &points,
        }],
    );
    out.write("sweep_eta.svg", &chart)?;

    let summary = emit(vec![
        "command: sweep eta".into(),
        format!("rows: {}", rep.rows.len()),
        format!("h: {}", fmt12(h)),
        format!("limit estimate: {}", fmt12(rep.limit_estimate)),
        format!("nondecreasing in eta: {}", rep.monotone),
    ]);
    out.write("summary.txt", &summary)?;
    out.finish("sweep eta", seed, &loaded.config_hash)?;

    if !rep.monotone {
        return Err(CliError::Solver(
            "restricted moduli are not nondecreasing in eta within the gap tolerances".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sandwich
// ---------------------------------------------------------------------------

pub fn sandwich(config_path: &Path, out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let loaded = load_config(config_path)?;
    let d = loaded.domain()?;
    let q = parse_quad(&d, &loaded.config.quad)?;
    let cfg = SandwichConfig {
        eps_list: require_list(&loaded.config.eps_list, "eps_list")?,
        eta_list: require_list(&loaded.config.eta_list, "eta_list")?,
        h_eta: loaded
            .config
            .h
            .ok_or_else(|| CliError::Usage("config needs h (cell size for restricted solves)".into()))?,
        sweep: loaded.sweep_config(),
    };

    let v = sandwich_check(&d, &q, &cfg)?;

    let mut out = OutputWriter::new(out_dir)?;
    out.write("sandwich_eps.csv", &sweep_csv(&v.eps_report))?;
    out.write("sandwich_eta.csv", &eta_csv(&v.eta_report))?;
    let points: Vec<(f64, f64)> = v
        .eps_report
        .rows
        .iter()
        .map(|r| (r.eps, r.eps_times_modulus))
        .collect();
    let chart = line_chart(
        &ChartSpec {
            title: "Compression sweep against the vertical modulus",
            x_label: "eps",
            y_label: "eps x modulus",
            log_x: true,
            target: Some(v.target),
        },
        &[Series {
            name: "eps x modulus",
            points: &points,
        }],
    );
    out.write("sandwich.svg", &chart)?;

    let ok = v.holds() && v.eta_report.monotone;
    let summary = emit(vec![
        "command: sandwich".into(),
        format!("target (vertical modulus): {}", fmt12(v.target)),
        format!("compression limit: {}", fmt12(v.eps_limit)),
        format!("restriction limit: {}", fmt12(v.eta_limit)),
        format!("tolerance budget: {}", fmt12(v.tol_chain)),
        format!(
            "first inequality (target <= compression limit): {}",
            if v.first_holds { "holds" } else { "VIOLATED" }
        ),
        format!(
            "second inequality (compression <= restriction limit): {}",
            if v.second_holds { "holds" } else { "VIOLATED" }
        ),
        format!("eta rows nondecreasing: {}", v.eta_report.monotone),
        format!("verdict: {}", if ok { "sandwich holds" } else { "SANDWICH VIOLATED" }),
    ]);
    out.write("summary.txt", &summary)?;
    out.finish("sandwich", seed, &loaded.config_hash)?;

    if !ok {
        return Err(CliError::Solver(
            "the sandwich inequalities do not hold within the tolerance budget".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// asymptotics
// ---------------------------------------------------------------------------

/// Triples `(0, w2, 1)` enter the asymptotic regime at this w2; the defect
/// assertions below apply only to rows at or past it.
const ASYMPTOTIC_W2: f64 = 0.9;

pub fn asymptotics(w2_list: &[f64], out_dir: Option<&Path>, seed: u64) -> Result<(), CliError> {
    if w2_list.is_empty() {
        return Err(CliError::Usage("w2 list must be nonempty".into()));
    }
    for pair in w2_list.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(CliError::Usage(format!(
                "w2 list must be strictly increasing (got {} then {})",
                pair[0], pair[1]
            )));
        }
    }
    let mut rows = Vec::new();
    for &w2 in w2_list {
        if !(0.0 < w2 && w2 < 1.0) {
            return Err(CliError::Usage(format!("w2 = {w2} is outside (0, 1)")));
        }
        let t = HalfPlaneTriple::new(0.0, w2, 1.0)?;
        let m = quad_modulus(&t);
        let est = asymptotic_modulus(liouville_mass_halfplane(&t));
        rows.push(AsymptoticsRow {
            w2,
            modulus: m,
            liouville_estimate: est,
            defect: m - est,
        });
    }

    let mut lines = vec![
        "command: asymptotics".into(),
        format!(
            "{:<16} {:<18} {:<18} {}",
            "w2", "modulus", "two-term estimate", "defect"
        ),
    ];
    for r in &rows {
        lines.push(format!(
            "{:<16} {:<18} {:<18} {}",
            fmt12(r.w2),
            fmt12(r.modulus),
            fmt12(r.liouville_estimate),
            fmt12(r.defect)
        ));
    }

    // Defect-decay assertions over the asymptotic rows only.
    let asym: Vec<&AsymptoticsRow> = rows.iter().filter(|r| r.w2 >= ASYMPTOTIC_W2).collect();
    let mut violation = None;
    for pair in asym.windows(2) {
        if !(pair[1].defect.abs() < pair[0].defect.abs()) {
            violation = Some(format!(
                "|defect| does not decrease from w2 = {} to w2 = {}",
                pair[0].w2, pair[1].w2
            ));
        }
    }
    if let (None, Some(last)) = (&violation, asym.last()) {
        if !(last.defect.abs() < 0.01) {
            violation = Some(format!(
                "final |defect| {} at w2 = {} is not below 0.01",
                fmt12(last.defect.abs()),
                last.w2
            ));
        }
    }
    lines.push(format!(
        "asymptotic rows (w2 >= {ASYMPTOTIC_W2}): {}",
        asym.len()
    ));
    lines.push(match &violation {
        None => "defect decay: verified".into(),
        Some(v) => format!("defect decay: VIOLATED ({v})"),
    });

    let summary = emit(lines);
    if let Some(dir) = out_dir {
        let mut out = OutputWriter::new(dir)?;
        out.write("asymptotics.csv", &asymptotics_csv(&rows))?;
        out.write("summary.txt", &summary)?;
        let record = format!(
            "asymptotics --w2 {}",
            w2_list.iter().map(|v| fmt12(*v)).collect::<Vec<_>>().join(",")
        );
        out.finish("asymptotics", seed, &sha256_hex(record.as_bytes()))?;
    }
    if let Some(v) = violation {
        return Err(CliError::Solver(v));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// lsc-approx
// ---------------------------------------------------------------------------

pub fn lsc_approx(
    path: &Path,
    n_list: &[f64],
    out_dir: Option<&Path>,
    seed: u64,
) -> Result<(), CliError> {
    let text = read_file(path)?;
    let f: BoundaryFunction = modlim::boundary_from_json(&text)?;
    let (approximants, rep) = lsc_approximation(&f, n_list)?;

    let mut lines = vec![
        "command: lsc-approx".into(),
        format!("target integral: {}", fmt12(rep.target)),
        format!("sample points: {}", rep.samples),
        format!("monotone below profile: {}", rep.monotone_pointwise),
        format!("errors decreasing: {}", rep.diffs_decreasing),
        format!("{:<16} {:<18} {}", "n", "integral", "|integral - target|"),
    ];
    for r in &rep.rows {
        lines.push(format!(
            "{:<16} {:<18} {}",
            fmt12(r.n),
            fmt12(r.integral),
            fmt12(r.abs_diff)
        ));
    }
    let summary = emit(lines);

    if let Some(dir) = out_dir {
        let mut out = OutputWriter::new(dir)?;
        out.write("lsc.csv", &lsc_csv(&rep))?;
        for (i, g) in approximants.iter().enumerate() {
            out.write(&format!("approximant_{}.json", i + 1), &boundary_to_json(g))?;
        }
        out.write("summary.txt", &summary)?;
        let record = format!(
            "lsc-approx {} --n {}",
            path.display(),
            n_list.iter().map(|v| fmt12(*v)).collect::<Vec<_>>().join(",")
        );
        out.finish("lsc-approx", seed, &sha256_hex(record.as_bytes()))?;
    }
    Ok(())
}
