use std::path::Path;
use std::process::ExitCode;

use serde_json::{json, Value};

use d2alf::algebra::{Mat2, C64};
use d2alf::connection::{curvature_closed_form, curvature_coeffs, parallel_transport_path, End, XiPair};
use d2alf::duy::{gauge_invariants, solve_duy};
use d2alf::equivariant::groups::{frobenius_check, FiniteSubgroup, GroupKind};
use d2alf::equivariant::{flat_orbifold_spectrum, EquivariantSpectralProblem};
use d2alf::grid::{make_grid, GridRef};
use d2alf::moduli::{chart_csv_header, chart_solution, harmonic_frame, metric_pullback_chart, moment_residual};
use d2alf::nahm::stability::classify_sublines;
use d2alf::nahm::{complex_nahm_family, degree, find_sublines, ComplexNahm, Family, RealNahm, Special};
use d2alf::periods::{sphere_periods, SphereKind};
use d2alf::rg::{rg_c, subline_signs};
use d2alf::verify::{run_criterion, VerifyOptions, CRITERIA};

use crate::config::{ConfigError, RunConfig};
use crate::{FamilyArgs, FamilyName, SpecialName, SphereName};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] d2alf::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("path file: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(d2alf::Error::NoConvergence {
                residual, iterations, ..
            }) => {
                eprintln!("diagnostics: {iterations} iterations, final residual {residual:.3e}");
                3
            }
            CliError::Core(d2alf::Error::NonConvergedPoints(_)) => 3,
            _ => 2,
        }
    }
}

type Out = Result<ExitCode, CliError>;

fn parse_list(s: &str, len: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == len => Ok(v),
        _ => Err(CliError::Usage(format!(
            "{what}: expected {len} comma-separated numbers, got `{s}`"
        ))),
    }
}

fn parse_c(s: &str, what: &str) -> Result<C64, CliError> {
    let v = parse_list(s, 2, what)?;
    Ok(C64::new(v[0], v[1]))
}

fn parse_v3(s: &str, what: &str) -> Result<[f64; 3], CliError> {
    let v = parse_list(s, 3, what)?;
    Ok([v[0], v[1], v[2]])
}

fn grid_json(g: &GridRef) -> Value {
    json!({"N": g.n, "L": g.l})
}

fn envelope(command: &str, cfg: &RunConfig, grid: Value, result: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.echo(),
        "grid": grid,
        "result": result,
    })
}

fn write_target(target: &str, text: &str) -> Result<(), CliError> {
    if target.is_empty() {
        print!("{text}");
    } else {
        std::fs::write(target, text)?;
    }
    Ok(())
}

fn emit(cfg: &RunConfig, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("JSON values always serialize") + "\n";
    write_target(&cfg.output, &text)
}

struct FamilyPoint {
    b: ComplexNahm,
    xi0: [f64; 3],
    xi_l: [f64; 3],
    family: Family,
}

impl FamilyPoint {
    fn xi_r(&self) -> (f64, f64) {
        (self.xi0[0], self.xi_l[0])
    }
}

fn family_point(f: &FamilyArgs, g: &GridRef) -> Result<FamilyPoint, CliError> {
    let xi0 = parse_v3(&f.xi0, "--xi0")?;
    let xi_l = parse_v3(&f.xil, "--xil")?;
    let c = || parse_c(&f.c, "--c");
    let special = || -> Result<Special, CliError> {
        Ok(match f.special {
            SpecialName::Diagonal => Special::Diagonal,
            SpecialName::Upper => Special::Upper,
            SpecialName::Lower => Special::Lower {
                c: parse_c(&f.lower_c, "--lower-c")?,
            },
        })
    };
    let family = match f.family {
        FamilyName::I => Family::I {
            alpha0: parse_c(&f.alpha0, "--alpha0")?,
            beta_x: parse_c(&f.beta_x, "--beta-x")?,
        },
        FamilyName::Ii => Family::II { c: c()? },
        FamilyName::Iii => Family::III { c: c()? },
        FamilyName::Iv => Family::IV { c: c()? },
        FamilyName::V => Family::V { c: c()? },
        FamilyName::Vi => Family::VI(special()?),
        FamilyName::Vii => Family::VII(special()?),
    };
    let b = complex_nahm_family(family, C64::new(xi0[1], xi0[2]), C64::new(xi_l[1], xi_l[2]), g)?;
    Ok(FamilyPoint { b, xi0, xi_l, family })
}

fn family_i_params(p: &FamilyPoint) -> Result<(C64, C64), CliError> {
    match p.family {
        Family::I { alpha0, beta_x } => Ok((alpha0, beta_x)),
        _ => Err(CliError::Usage("this command needs --family i".into())),
    }
}

fn point_json(p: &FamilyPoint) -> Value {
    json!({"family": p.family.label(), "xi0": p.xi0, "xiL": p.xi_l})
}

pub fn solve(cfg: &RunConfig, f: &FamilyArgs) -> Out {
    let g = make_grid(cfg.l, cfg.n)?;
    let p = family_point(f, &g)?;
    let r = solve_duy(&p.b, p.xi_r(), &cfg.duy())?;
    let mut result = r.to_json();
    result["input"] = point_json(&p);
    result["nahm_residual"] = json!(r.a.nahm_residual());
    result["moment_residual"] = json!(moment_residual(&r.a));
    emit(cfg, &envelope("solve", cfg, grid_json(&g), result))?;
    Ok(ExitCode::SUCCESS)
}

pub fn classify(cfg: &RunConfig, f: &FamilyArgs) -> Out {
    let g = make_grid(cfg.l, cfg.n)?;
    let p = family_point(f, &g)?;
    let subs = find_sublines(&p.b);
    let (x0, xl) = p.xi_r();
    let stab = classify_sublines(&subs, p.xi_r());
    let sublines: Vec<Value> = subs
        .iter()
        .map(|s| {
            let (a, b) = s.endpoint_signs;
            json!({"endpoint_signs": format!("{}{}", a.symbol(), b.symbol()), "degree": degree(s, x0, xl)})
        })
        .collect();
    let result =
        json!({"input": point_json(&p), "stability": stab.label(), "polystable": stab.is_polystable(), "sublines": sublines});
    emit(cfg, &envelope("classify", cfg, grid_json(&g), result))?;
    Ok(ExitCode::SUCCESS)
}

fn config_comment(cfg: &RunConfig, g: &GridRef) -> String {
    let mut s = format!("# d2alf {}\n# grid N={} L={}\n", env!("CARGO_PKG_VERSION"), g.n, g.l);
    for (k, v) in cfg.echo().as_object().expect("echo is an object") {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s
}

pub fn metric(cfg: &RunConfig, f: &FamilyArgs, chart: bool) -> Out {
    let g = make_grid(cfg.l, cfg.n)?;
    let p = family_point(f, &g)?;
    let (alpha0, beta_x) = family_i_params(&p)?;
    if !chart {
        let (a, residual) = chart_solution(&g, alpha0, beta_x, p.xi0, p.xi_l, &cfg.duy())?;
        let frame = harmonic_frame(&a)?;
        let mut result = frame.to_json();
        result["input"] = point_json(&p);
        result["residual"] = json!(residual);
        result["harmonic_defects"] = json!(frame.harmonic_defects());
        emit(cfg, &envelope("metric", cfg, grid_json(&g), result))?;
        return Ok(ExitCode::SUCCESS);
    }
    let grid2 = |re: &crate::config::Range, im: &crate::config::Range| -> Vec<C64> {
        re.samples()
            .iter()
            .flat_map(|&x| im.samples().into_iter().map(move |y| C64::new(x, y)))
            .collect()
    };
    let alphas = grid2(&cfg.chart_re_alpha0, &cfg.chart_im_alpha0);
    let betas = grid2(&cfg.chart_re_beta_x, &cfg.chart_im_beta_x);
    let pts = metric_pullback_chart(&g, &alphas, &betas, p.xi0, p.xi_l, &cfg.duy());
    let mut csv = config_comment(cfg, &g);
    csv.push_str(&chart_csv_header());
    csv.push('\n');
    for pt in &pts {
        csv.push_str(&pt.csv_row());
        csv.push('\n');
    }
    write_target(&cfg.csv_output, &csv)?;
    let failures: Vec<Value> = pts
        .iter()
        .filter_map(|pt| {
            pt.status
                .as_ref()
                .err()
                .map(|e| json!({"alpha0": [pt.alpha0.re, pt.alpha0.im], "beta_x": [pt.beta_x.re, pt.beta_x.im], "error": e}))
        })
        .collect();
    for f in &failures {
        eprintln!("chart point failed: {f}");
    }
    if !cfg.csv_output.is_empty() || !cfg.output.is_empty() {
        let result = json!({"points": pts.len(), "failed": failures, "xi0": p.xi0, "xiL": p.xi_l, "csv": cfg.csv_output});
        emit(cfg, &envelope("metric", cfg, grid_json(&g), result))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn read_path(path: &Path) -> Result<Vec<XiPair>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match v {
            Ok(v) if v.len() == 6 => out.push(([v[0], v[1], v[2]], [v[3], v[4], v[5]])),
            _ => return Err(CliError::Usage(format!("path row {}: expected six numbers", row + 1))),
        }
    }
    if out.len() < 2 {
        return Err(CliError::Usage("path needs at least two rows".into()));
    }
    Ok(out)
}

/// `Σ_i ∫Tr(A^iA^i)`.
fn unitary_invariant(a: &RealNahm) -> f64 {
    (1..4).map(|i| a.a[i].integrate_trace_product(&a.a[i]).re).sum()
}

fn invariants_json(a: &RealNahm) -> Value {
    let (h, tb) = gauge_invariants(a);
    json!({"H": [h.re, h.im], "tr_beta2": [tb.re, tb.im], "unitary": unitary_invariant(a)})
}

pub fn transport(cfg: &RunConfig, f: &FamilyArgs, path: &Path) -> Out {
    let g = make_grid(cfg.l, cfg.n)?;
    let path = read_path(path)?;
    let mut fa = f.clone();
    let fmt = |x: [f64; 3]| format!("{},{},{}", x[0], x[1], x[2]);
    fa.xi0 = fmt(path[0].0);
    fa.xil = fmt(path[0].1);
    let p = family_point(&fa, &g)?;
    let (alpha0, beta_x) = family_i_params(&p)?;
    let (start, _) = chart_solution(&g, alpha0, beta_x, p.xi0, p.xi_l, &cfg.duy())?;
    let r = parallel_transport_path(&start, &path, &cfg.transport())?;
    let last = path[path.len() - 1];
    let closed = last == path[0];
    let holonomy = if closed {
        let (h0, t0) = gauge_invariants(&start);
        let (h1, t1) = gauge_invariants(&r.a);
        json!({
            "H_drift": (h1 - h0).norm(),
            "tr_beta2_drift": (t1 - t0).norm(),
            "unitary_drift": (unitary_invariant(&r.a) - unitary_invariant(&start)).abs(),
        })
    } else {
        Value::Null
    };
    let result = json!({
        "input": point_json(&p),
        "path_points": path.len(),
        "steps": r.steps,
        "max_residual": r.max_residual,
        "end_xi": [last.0, last.1],
        "end_nahm_residual": r.a.nahm_residual(),
        "start_invariants": invariants_json(&start),
        "end_invariants": invariants_json(&r.a),
        "closed": closed,
        "holonomy": holonomy,
    });
    emit(cfg, &envelope("transport", cfg, grid_json(&g), result))?;
    Ok(ExitCode::SUCCESS)
}

pub fn curvature(cfg: &RunConfig, c: f64, l: f64) -> Out {
    let g = make_grid(l, cfg.n)?;
    let z = Mat2::zero();
    let a = RealNahm::constant(&g, [z, Mat2::sigma_x() * C64::new(0.0, c), z, z], [0.0; 3], [0.0; 3]);
    let k = curvature_coeffs(&a, (2, End::End), (3, End::End))?;
    let want = curvature_closed_form(c, l);
    let mid = g.n / 2;
    // iσ_x·K has su(2) coefficient (-K, 0, 0) in the first component.
    let got = -k[0][mid][0];
    let mut err: f64 = 0.0;
    for (comp, field) in k.iter().enumerate() {
        for x in field {
            let t = if comp == 0 { [-want, 0.0, 0.0] } else { [0.0; 3] };
            err = err.max((0..3).map(|q| (x[q] - t[q]).powi(2)).sum::<f64>().sqrt());
        }
    }
    let result = json!({
        "c": c,
        "L": l,
        "components": [2, 3],
        "ends": ["L", "L"],
        "closed_form": want,
        "discretized": got,
        "relative_difference": err / want.abs(),
    });
    emit(cfg, &envelope("curvature", cfg, grid_json(&g), result))?;
    Ok(ExitCode::SUCCESS)
}

pub fn periods(cfg: &RunConfig, xi0: &str, xil: &str, sphere: SphereName, form: Option<usize>) -> Out {
    let xi = (parse_v3(xi0, "--xi0")?, parse_v3(xil, "--xil")?);
    let kind = match sphere {
        SphereName::Difference => SphereKind::Difference,
        SphereName::Sum => SphereKind::Sum,
    };
    let form = match form {
        None => None,
        Some(k @ 1..=3) => Some(k - 1),
        Some(k) => return Err(CliError::Usage(format!("--form {k}: expected 1, 2 or 3"))),
    };
    let opts = cfg.periods();
    let r = sphere_periods(&xi, kind, &opts)?;
    let grid = json!({"N": opts.n, "L": opts.l, "triangles": r.mesh});
    emit(cfg, &envelope("periods", cfg, grid, r.to_json(form)))?;
    if r.failed_points > 0 {
        eprintln!("error: {}", d2alf::Error::NonConvergedPoints(r.failed_points));
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn rg(cfg: &RunConfig, f: &FamilyArgs) -> Out {
    let g = make_grid(cfg.l, cfg.n)?;
    let p = family_point(f, &g)?;
    let k = rg_c(&p.b, p.xi_r())?;
    let mut result = k.to_json();
    result["input"] = point_json(&p);
    result["subline_signs"] = json!(subline_signs(&p.b)
        .iter()
        .map(|(a, b)| format!("{}{}", a.symbol(), b.symbol()))
        .collect::<Vec<_>>());
    emit(cfg, &envelope("rg", cfg, grid_json(&g), result))?;
    Ok(ExitCode::SUCCESS)
}

pub fn orbifold_check(cfg: &RunConfig, a: f64, phi: &str, circumference: f64, gauge_seed: Option<u64>) -> Out {
    let phi = parse_v3(phi, "--phi")?;
    let mut prob = EquivariantSpectralProblem::new(cfg.orbifold_k, a, phi, circumference);
    if let Some(s) = gauge_seed {
        prob = prob.with_gauge(s);
    }
    let r = flat_orbifold_spectrum(&prob)?;
    let mut result = r.to_json();
    result["q"] = json!(prob.q());
    emit(
        cfg,
        &envelope(
            "orbifold-check",
            cfg,
            json!({"K": cfg.orbifold_k, "circumference": circumference}),
            result,
        ),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn fi(cfg: &RunConfig, group: &str) -> Out {
    let g = FiniteSubgroup::new(GroupKind::parse(group)?)?;
    let mut result = g.to_json();
    result["mckay_rank"] = json!(g.kind.mckay_rank());
    result["frobenius"] = json!(frobenius_check(&g, &g)?);
    emit(cfg, &envelope("fi", cfg, Value::Null, result))?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(cfg: &RunConfig, quick: bool, only: &[usize]) -> Out {
    let ids: Vec<usize> = if only.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        only.to_vec()
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let opts = VerifyOptions { quick, seed: cfg.seed };
    let mut reports = Vec::new();
    for id in ids {
        let r = run_criterion(id, &opts);
        println!("{}", r.line());
        reports.push(r);
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed} of {} criteria passed", reports.len());
    if !cfg.output.is_empty() {
        let result = json!({"quick": quick, "criteria": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()});
        emit(cfg, &envelope("verify", cfg, Value::Null, result))?;
    }
    Ok(if passed == reports.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
