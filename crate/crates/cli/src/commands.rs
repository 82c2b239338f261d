use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use lava_core::lasso::{DesignMatrix, SolverOptions};
use lava_core::regression::{
    bound_components, df_sure_baseline, df_sure_lava, fit_estimator, restricted_eigenvalue_surrogate,
    score_quantile_with, DfSure, RE_MAX_P,
};
use lava_core::sim::{run_experiment, Scenario, SimConfig, Tuning};
use lava_core::tuning::{estimate_noise_variance, tune_cv, tune_sure, write_surface_csv, NoiseOptions};
use lava_core::{EstimatorKind, Penalty, PenaltyGrid, PenaltyPair, RidgeProjection};
use nalgebra::DVector;

use crate::args::{BoundsArgs, FitArgs, RiskCurveArgs, SimulateArgs, TuneArgs, TuneMethodArg};
use crate::data::{read_dataset, read_vector, Dataset};
use crate::error::{CliError, CliResult};
use crate::meta::Metadata;

/// Level of the simulated score quantile behind the default λ₁.
const DEFAULT_ALPHA: f64 = 0.05;
/// Multiplier on the score quantile for the default λ₁.
const DEFAULT_C: f64 = 1.1;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let f = File::create(path).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn scales_line(d: &DesignMatrix) -> String {
    d.column_scales().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

/// Noise variance from the flag, else the iterated lasso estimate.
fn noise_variance(given: Option<f64>, d: &DesignMatrix, y: &DVector<f64>) -> CliResult<(f64, &'static str)> {
    match given {
        Some(s2) if s2 > 0.0 && s2.is_finite() => Ok((s2, "given")),
        Some(s2) => Err(CliError::input(format!("--sigma2 must be positive, got {s2}"))),
        None => Ok((estimate_noise_variance(d, y, &NoiseOptions::default())?.sigma2, "estimated")),
    }
}

fn needs_lambda1(kind: EstimatorKind) -> bool {
    !matches!(kind, EstimatorKind::Ridge | EstimatorKind::Ml)
}

fn needs_lambda2(kind: EstimatorKind) -> bool {
    matches!(kind, EstimatorKind::Lava | EstimatorKind::PostLava | EstimatorKind::Ridge | EstimatorKind::ElasticNet)
}

/// Penalties as the estimator reads them: unused axes become their limit.
fn effective_pair(kind: EstimatorKind, l1: Penalty, l2: Penalty) -> CliResult<PenaltyPair> {
    let pair = match kind {
        EstimatorKind::Lasso | EstimatorKind::PostLasso => PenaltyPair::new(l1, Penalty::Infinite),
        EstimatorKind::Ridge => PenaltyPair::new(Penalty::Infinite, l2),
        EstimatorKind::Ml => PenaltyPair::new(Penalty::Infinite, Penalty::Finite(0.0)),
        _ => PenaltyPair::new(l1, l2),
    };
    Ok(pair?)
}

fn degrees_of_freedom(
    kind: EstimatorKind,
    fit: &lava_core::LavaRegressionFit,
    d: &DesignMatrix,
    y: &DVector<f64>,
    s2: f64,
) -> Option<DfSure> {
    match kind {
        EstimatorKind::Lava => df_sure_lava(fit, d, y, s2).ok(),
        EstimatorKind::Lasso | EstimatorKind::Ridge | EstimatorKind::ElasticNet | EstimatorKind::Ml => {
            df_sure_baseline(kind, fit, d, y, s2).ok()
        }
        // Refits have no closed-form degrees of freedom.
        EstimatorKind::PostLava | EstimatorKind::PostLasso => None,
    }
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let data = read_dataset(&args.data.data)?;
    let d = data.design(!args.data.no_normalize)?;
    let kind = args.estimator;
    let mut meta = Metadata::new("fit");
    meta.push("data", args.data.data.display());
    meta.push("response", &data.names[0]);
    meta.push("estimator", kind);
    meta.push("n", data.n());
    meta.push("p", data.p());
    meta.push("normalize", !args.data.no_normalize);

    let l2 = match (args.lambda2, needs_lambda2(kind)) {
        (Some(l), _) => l,
        (None, true) => return Err(CliError::input(format!("{kind} needs --lambda2"))),
        (None, false) => Penalty::Infinite,
    };
    let mut sigma2 = args.sigma2;
    let l1 = match (args.lambda1, needs_lambda1(kind)) {
        (Some(l), _) => l,
        (None, false) => Penalty::Infinite,
        (None, true) => {
            // Default: c times the simulated score quantile at the noise level.
            let (s2, source) = noise_variance(args.sigma2, &d, &data.y)?;
            meta.push("sigma2_source", source);
            sigma2 = Some(s2);
            let proj = RidgeProjection::new(&d, l2)?;
            let q = score_quantile_with(&proj, s2.sqrt(), DEFAULT_ALPHA, args.quantile_reps, args.seed)?;
            meta.push("lambda1_rule", format!("{DEFAULT_C} * score quantile at alpha {DEFAULT_ALPHA}"));
            meta.push("quantile_reps", args.quantile_reps);
            meta.push("seed", args.seed);
            Penalty::Finite(DEFAULT_C * q)
        }
    };
    let pair = effective_pair(kind, l1, l2)?;
    let opts = SolverOptions { tol: args.tol, max_iter: args.max_iter, ..SolverOptions::default() };
    meta.push("lambda1", pair.lambda1);
    meta.push("lambda2", pair.lambda2);
    meta.push("tol", opts.tol);
    meta.push("max_iter", opts.max_iter);

    let fit = fit_estimator(kind, &d, &data.y, pair, &opts)?;
    fit.write_coefficients(&d, create(&args.out)?)?;
    if let Some(path) = &args.fitted {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["row", "fitted", "residual"])?;
        for i in 0..data.n() {
            w.write_record([i.to_string(), fit.fitted[i].to_string(), fit.residual[i].to_string()])?;
        }
        w.flush()?;
    }

    let mut summary = Metadata::default();
    summary.push("objective", fit.objective);
    summary.push("active_set_size", fit.active_set.len());
    summary.push("iterations", fit.iterations);
    summary.push("kkt_residual", fit.kkt_residual);
    let df = degrees_of_freedom(kind, &fit, &d, &data.y, sigma2.unwrap_or(1.0));
    summary.push("df", df.map_or("n/a".to_string(), |v| v.df.to_string()));
    if let Some(s2) = sigma2 {
        summary.push("sigma2", s2);
        summary.push("sure", df.map_or("n/a".to_string(), |v| v.sure.to_string()));
    }
    summary.push("column_scales", scales_line(&d));
    meta.push_block(&summary.render());
    meta.push("out", args.out.display());
    meta.write_next_to(&args.out)?;
    print!("{}", summary.render());
    Ok(())
}

pub fn tune(args: &TuneArgs) -> CliResult<()> {
    let data = read_dataset(&args.data.data)?;
    let d = data.design(!args.data.no_normalize)?;
    let kind = args.estimator;
    let mut meta = Metadata::new("tune");
    meta.push("data", args.data.data.display());
    meta.push("response", &data.names[0]);
    meta.push("estimator", kind);
    meta.push("method", args.method);
    meta.push("n", data.n());
    meta.push("p", data.p());
    meta.push("normalize", !args.data.no_normalize);

    let (s2, source) = noise_variance(args.sigma2, &d, &data.y)?;
    meta.push("sigma2", s2);
    meta.push("sigma2_source", source);
    let fallback = PenaltyGrid::default_for(s2.sqrt(), data.n(), data.p())?;
    let grid = match &args.grid_spec {
        Some(spec) => PenaltyGrid::parse_spec(spec, &fallback)?,
        None => fallback,
    };
    meta.push("grid_spec", args.grid_spec.as_deref().unwrap_or("default"));
    meta.push("grid_size", format!("{}x{}", grid.lambda1().len(), grid.lambda2().len()));
    let result = match args.method {
        TuneMethodArg::Sure => tune_sure(kind, &d, &data.y, &grid, s2)?,
        TuneMethodArg::Cv => {
            meta.push("folds", args.folds);
            meta.push("seed", args.seed);
            tune_cv(kind, &d, &data.y, &grid, args.folds, args.seed)?
        }
    };
    write_surface_csv(result.method, &result.surface, create(&args.out)?)?;
    if let Some(path) = &args.coef {
        result.fit.write_coefficients(&d, create(path)?)?;
    }
    let mut summary = Metadata::default();
    summary.push("chosen_lambda1", result.chosen.lambda1);
    summary.push("chosen_lambda2", result.chosen.lambda2);
    summary.push("criterion", result.criterion);
    summary.push("failed_points", result.failures);
    summary.push("active_set_size", result.fit.active_set.len());
    summary.push("column_scales", scales_line(&d));
    meta.push_block(&summary.render());
    meta.push("out", args.out.display());
    meta.write_next_to(&args.out)?;
    print!("{}", summary.render());
    Ok(())
}

pub fn risk_curve(args: &RiskCurveArgs) -> CliResult<()> {
    let mut cfg = SimConfig::for_scenario(Scenario::Sequence);
    for part in args.model_spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) =
            part.split_once('=').ok_or_else(|| CliError::input(format!("model spec entry {part:?} lacks '='")))?;
        match k.trim() {
            "p" | "sigma" | "c" | "grid_lambda1" | "grid_lambda2" => cfg.set(k, v)?,
            other => {
                return Err(CliError::input(format!(
                    "unknown model spec key {other:?}; use p, sigma, c, grid_lambda1, grid_lambda2"
                )))
            }
        }
    }
    cfg.tuning = match args.penalty_policy.as_str() {
        "oracle" => Tuning::Oracle,
        "plugin" | "plug-in" => Tuning::PlugIn,
        other => return Err(CliError::input(format!("--penalty-policy must be oracle or plugin, got {other:?}"))),
    };
    if let Some(q) = &args.q_grid {
        cfg.set("q_grid", q)?;
    }
    if let Some(e) = &args.estimators {
        cfg.set("estimators", e)?;
    }
    cfg.validate()?;
    let result = run_experiment(&cfg)?;
    result.write_csv(create(&args.out)?)?;
    let mut meta = Metadata::new("risk-curve");
    meta.push_block(&cfg.metadata());
    meta.push("out", args.out.display());
    meta.write_next_to(&args.out)?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            SimConfig::parse(&text)?
        }
        None => SimConfig::default(),
    };
    for kv in &args.set {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| CliError::input(format!("--set expects key=value, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    fs::create_dir_all(&args.out_dir)?;
    let out = args.out_dir.join("results.csv");
    let result = run_experiment(&cfg)?;
    result.write_csv(create(&out)?)?;
    let mut meta = Metadata::new("simulate");
    meta.push_block(&cfg.metadata());
    meta.push("out", out.display());
    let meta_path = meta.write_next_to(&out)?;
    let failures: usize = result.rows.iter().map(|r| r.failures).sum();
    println!(
        "wrote {} rows to {} ({} failed replications); metadata in {}",
        result.rows.len(),
        out.display(),
        failures,
        meta_path.display()
    );
    Ok(())
}

fn parse_support(s: &str, p: usize) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let j: usize = part.parse().map_err(|_| CliError::input(format!("--support: bad index {part:?}")))?;
        if j >= p {
            return Err(CliError::input(format!("--support: index {j} out of range for p = {p}")));
        }
        out.push(j);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn bounds(args: &BoundsArgs) -> CliResult<()> {
    let data: Dataset = read_dataset(&args.data.data)?;
    let d = data.design(!args.data.no_normalize)?;
    let p = data.p();
    let beta0 = match &args.beta0 {
        Some(path) => read_vector(path, p)?,
        None => DVector::zeros(p),
    };
    let (sigma_u, source) = match args.sigma_u {
        Some(s) => (s, "given"),
        None => {
            let (s2, src) = noise_variance(None, &d, &data.y)?;
            (s2.sqrt(), src)
        }
    };
    let mut report = bound_components(&d, args.lambda2, &beta0, sigma_u, args.alpha, args.eps)?;
    let proj = RidgeProjection::new(&d, Penalty::Finite(args.lambda2))?;
    let quantile = score_quantile_with(&proj, sigma_u, args.alpha, args.reps, args.seed)?;
    report.lambda1_quantile = Some(quantile);
    let lambda1 = args.c * quantile;

    let mut rows: Vec<(&str, String)> = vec![
        ("lambda2", report.lambda2.to_string()),
        ("sigma_u", sigma_u.to_string()),
        ("sigma_u_source", source.to_string()),
        ("alpha", args.alpha.to_string()),
        ("eps", args.eps.to_string()),
        ("lambda1_quantile", quantile.to_string()),
        ("lambda1", lambda1.to_string()),
        ("lambda_bar", report.lambda_bar.to_string()),
        ("lambda_bar_unscaled", report.lambda_bar_unscaled.to_string()),
        ("bar_v", report.bar_v.to_string()),
        ("b2", report.b2.to_string()),
        ("b3", report.b3.to_string()),
        ("b4", report.b4.to_string()),
        ("norm_k", report.norm_k.to_string()),
    ];
    if let Some(s) = &args.support {
        let support = parse_support(s, p)?;
        if p <= RE_MAX_P {
            let kappa_sq = restricted_eigenvalue_surrogate(&d, args.lambda2, &support, args.c)?;
            let b1 = report.b1_upper(lambda1, support.len(), kappa_sq);
            rows.push(("re_surrogate", kappa_sq.to_string()));
            rows.push(("b1_upper", b1.to_string()));
            rows.push(("bound_total", report.total(b1).to_string()));
        } else {
            rows.push(("re_surrogate", format!("n/a (p > {RE_MAX_P})")));
        }
    }

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["quantity", "value"])?;
    for (k, v) in &rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    if let Some(path) = &args.out {
        let mut meta = Metadata::new("bounds");
        meta.push("data", args.data.data.display());
        meta.push("normalize", !args.data.no_normalize);
        meta.push("beta0", args.beta0.as_ref().map_or("zero".to_string(), |b: &PathBuf| b.display().to_string()));
        meta.push("reps", args.reps);
        meta.push("seed", args.seed);
        meta.push("c", args.c);
        meta.push("support", args.support.as_deref().unwrap_or("none"));
        meta.push("out", path.display());
        meta.write_next_to(path)?;
    }
    Ok(())
}
