use serde::Serialize;
use serde_json::{json, Value};
use triosc::audit::{euler_fit_batch, modal_sweep, rotation_audit, spectrum_sweep};
use triosc::dynamics::{gamma_at, integrate_direct, integrate_naive_decoupled};
use triosc::euler::{
    adjoint_action, compose_printed, compose_standard, euler_fit, fit_succeeded, rbar_printed,
    FitConfig,
};
use triosc::linalg3::{jacobi_eigen, SymMat3, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use triosc::mij::{mij_audit, mij_compare_with, mij_zero_constraint_probe, CONFIRM_FACTOR};
use triosc::modal::{compare_eigenvalue_sets, modal_transform, robust_orthonormal_diagonalizer};
use triosc::spectrum::{eigenvalues_printed, eigenvalues_robust};
use triosc::EulerAngles;

use crate::config::{parse_angles, parse_matrix, SystemConfig};
use crate::output::{num, Table};
use crate::{Cli, Command, Failure, ModeArg, Outcome, UsageError};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// serde tag of a unit enum as a CSV cell.
fn tag<T: Serialize>(v: &T) -> String {
    match to_value(v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn samples(cli: &Cli, default: usize) -> Result<usize, UsageError> {
    match cli.samples {
        Some(0) => Err(UsageError::new("--samples must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

fn tol(cli: &Cli, default: f64) -> Result<f64, UsageError> {
    match cli.tol {
        Some(t) if !(t > 0.0) || !t.is_finite() => {
            Err(UsageError::new("--tol must be positive and finite"))
        }
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

/// `--matrix` if given, else Γ(t0) of `--config`, else `None`.
fn matrix(cli: &Cli, literal: &Option<String>) -> Result<Option<SymMat3>, Failure> {
    if let Some(text) = literal {
        return Ok(Some(parse_matrix(text)?));
    }
    match &cli.config {
        Some(path) => {
            let sys = SystemConfig::load(path)?.profiles()?;
            sys.validate()?;
            Ok(Some(gamma_at(&sys, sys.t0)?))
        }
        None => Ok(None),
    }
}

fn require_matrix(cli: &Cli, literal: &Option<String>) -> Result<SymMat3, Failure> {
    matrix(cli, literal)?.ok_or_else(|| UsageError::new("--matrix or --config is required").into())
}

fn flag(b: bool) -> String {
    b.to_string()
}

pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Eig { matrix } => eig(cli, require_matrix(cli, matrix)?),
        Command::VerifyRotation { angles } => verify_rotation(cli, parse_angles(angles)?),
        Command::VerifyMij { matrix: m, angles } => {
            let probe = angles.as_deref().map(parse_angles).transpose()?;
            match matrix(cli, m)? {
                Some(g) => {
                    verify_mij_single(cli, g, probe.unwrap_or(EulerAngles::new(0.3, 0.4, 0.5)))
                }
                None if probe.is_some() => {
                    Err(UsageError::new("--angles needs --matrix or --config").into())
                }
                None => verify_mij_batch(cli),
            }
        }
        Command::EulerFit {
            matrix: m,
            starts,
            no_oracle_seed,
            range,
        } => {
            let config = FitConfig {
                random_starts: *starts,
                seed: cli.seed,
                oracle_seed: !no_oracle_seed,
                ..FitConfig::default()
            };
            if !(*range > 0.0) || !range.is_finite() {
                return Err(UsageError::new("--range must be positive").into());
            }
            match matrix(cli, m)? {
                Some(g) => euler_fit_single(cli, g, &config),
                None => euler_fit_many(cli, &config, *range),
            }
        }
        Command::Modal { matrix } => modal(require_matrix(cli, matrix)?),
        Command::Simulate { compare_decoupling } => simulate(cli, *compare_decoupling),
        Command::Report => report(cli),
    }
}

fn eig(cli: &Cli, g: SymMat3) -> Result<Outcome, Failure> {
    let jacobi = jacobi_eigen(&g, tol(cli, JACOBI_TOL)?, JACOBI_MAX_SWEEPS)?;
    let dev = |v: &[f64; 3]| [0, 1, 2].map(|i| (v[i] - jacobi.eigenvalues[i]).abs());
    let mut table = Table::new(&["source", "index", "value", "abs_dev_vs_jacobi"]);
    let mut result = serde_json::Map::new();
    result.insert("matrix".into(), to_value(&g.to_mat()));
    result.insert("jacobi".into(), to_value(&jacobi));

    let mut sources = Vec::new();
    if cli.mode != ModeArg::Robust {
        sources.push(("printed", eigenvalues_printed(&g)));
    }
    if cli.mode != ModeArg::Printed {
        sources.push(("robust", eigenvalues_robust(&g)));
    }
    for (name, s) in &sources {
        let d = dev(&s.omega_sq);
        result.insert(
            (*name).into(),
            json!({ "spectrum": s, "abs_dev_vs_jacobi": d }),
        );
        for i in 0..3 {
            table.push(vec![
                name.to_string(),
                (i + 1).to_string(),
                num(s.omega_sq[i]),
                num(d[i]),
            ]);
        }
    }
    if let [(_, p), (_, r)] = sources.as_slice() {
        let abs_dev = [0, 1, 2].map(|i| (p.omega_sq[i] - r.omega_sq[i]).abs());
        result.insert(
            "printed_vs_robust".into(),
            json!({
                "abs_dev": abs_dev,
                "delta_difference": p.delta - r.delta,
            }),
        );
    }
    for i in 0..3 {
        table.push(vec![
            "jacobi".into(),
            (i + 1).to_string(),
            num(jacobi.eigenvalues[i]),
            num(0.0),
        ]);
    }
    Ok(Outcome {
        result: Some(Value::Object(result)),
        table,
        error: None,
    })
}

fn verify_rotation(cli: &Cli, probe: EulerAngles) -> Result<Outcome, Failure> {
    let n = samples(cli, 10_000)?;
    let threshold = tol(cli, 1e-12)?;
    let a = rotation_audit(n, cli.seed, probe);
    let checks = json!({
        "generator_algebra": a.generator.commutator_residual.max(a.generator.hermiticity_residual) <= 1e-15,
        "adjoint_orthogonal": a.adjoint_max_gram <= threshold && a.adjoint_max_det <= threshold,
        "printed_deviation_nonzero": a.printed_gram_at_probe > 0.0,
        "standard_orthogonal": a.standard_gram_at_probe <= 1e-14 && a.standard_det_at_probe <= 1e-14,
    });
    let table = Table::metrics(&[
        ("commutator_residual", num(a.generator.commutator_residual)),
        ("spot_check_residual", num(a.generator.spot_check_residual)),
        (
            "hermiticity_residual",
            num(a.generator.hermiticity_residual),
        ),
        ("adjoint_max_gram", num(a.adjoint_max_gram)),
        ("adjoint_max_det", num(a.adjoint_max_det)),
        ("standard_max_gram", num(a.standard_max_gram)),
        ("adjoint_vs_rbar", num(a.adjoint_vs_rbar)),
        ("printed_gram_at_probe", num(a.printed_gram_at_probe)),
        ("printed_det_at_probe", num(a.printed_det_at_probe)),
        ("standard_gram_at_probe", num(a.standard_gram_at_probe)),
        ("standard_det_at_probe", num(a.standard_det_at_probe)),
    ]);
    let result = json!({
        "audit": a,
        "matrices_at_probe": {
            "compose_standard": compose_standard(&probe),
            "compose_printed": compose_printed(&probe),
            "rbar_printed": rbar_printed(&probe),
            "adjoint_action": adjoint_action(&probe),
        },
        "checks": checks,
    });
    Ok(Outcome {
        result: Some(result),
        table,
        error: None,
    })
}

fn verify_mij_single(cli: &Cli, g: SymMat3, a: EulerAngles) -> Result<Outcome, Failure> {
    let factor = tol(cli, CONFIRM_FACTOR)?;
    let r = mij_compare_with(&g, &a, factor);
    let probe = mij_zero_constraint_probe(
        &g,
        &FitConfig {
            seed: cli.seed,
            ..FitConfig::default()
        },
    );
    let mut table = Table::new(&[
        "row",
        "col",
        "printed",
        "rt_g_r",
        "r_g_rt",
        "dev_rt_g_r",
        "confirmed",
    ]);
    for i in 0..3 {
        for j in 0..3 {
            table.push(vec![
                (i + 1).to_string(),
                (j + 1).to_string(),
                num(r.printed[i][j]),
                num(r.product_rt_g_r[i][j]),
                num(r.product_r_g_rt[i][j]),
                num(r.dev_rt_g_r[i][j]),
                flag(r.confirmed[i][j]),
            ]);
        }
    }
    Ok(Outcome {
        result: Some(json!({ "angles": a, "compare": r, "zero_constraint_probe": probe })),
        table,
        error: None,
    })
}

fn verify_mij_batch(cli: &Cli) -> Result<Outcome, Failure> {
    let n = samples(cli, 10_000)?;
    let audit = mij_audit(n, cli.seed, tol(cli, CONFIRM_FACTOR)?);
    let mut table = Table::new(&[
        "row",
        "col",
        "status",
        "matches",
        "max_rel_dev",
        "max_abs_dev",
        "max_rel_dev_rt_g_r",
        "max_rel_dev_r_g_rt",
        "confirmed_samples",
    ]);
    for (i, row) in audit.table.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            table.push(vec![
                (i + 1).to_string(),
                (j + 1).to_string(),
                tag(&v.status),
                tag(&v.matches),
                num(v.max_rel_dev),
                num(v.max_abs_dev),
                num(v.max_rel_dev_rt_g_r),
                num(v.max_rel_dev_r_g_rt),
                v.confirmed_samples.to_string(),
            ]);
        }
    }
    Ok(Outcome {
        result: Some(to_value(&audit)),
        table,
        error: None,
    })
}

fn euler_fit_single(cli: &Cli, g: SymMat3, config: &FitConfig) -> Result<Outcome, Failure> {
    let factor = tol(cli, 1e-8)?;
    let fit = euler_fit(&g, config);
    let ok = fit_succeeded(&g, &fit, factor);
    let jacobi = jacobi_eigen(&g, JACOBI_TOL, JACOBI_MAX_SWEEPS)?;
    let table = Table::metrics(&[
        ("phi", num(fit.angles.phi)),
        ("theta", num(fit.angles.theta)),
        ("psi", num(fit.angles.psi)),
        ("off_norm", num(fit.off_norm)),
        ("diagonal_1", num(fit.diagonal[0])),
        ("diagonal_2", num(fit.diagonal[1])),
        ("diagonal_3", num(fit.diagonal[2])),
        ("best_start", fit.best_start.to_string()),
        ("starts_used", fit.starts_used.to_string()),
        ("succeeded", flag(ok)),
    ]);
    Ok(Outcome {
        result: Some(json!({
            "matrix": g.to_mat(),
            "fit": fit,
            "factor": factor,
            "succeeded": ok,
            "jacobi_eigenvalues": jacobi.eigenvalues,
        })),
        table,
        error: None,
    })
}

fn euler_fit_many(cli: &Cli, config: &FitConfig, range: f64) -> Result<Outcome, Failure> {
    let n = samples(cli, 1000)?;
    let factor = tol(cli, 1e-8)?;
    let b = euler_fit_batch(n, cli.seed, range, factor, config);
    let table = Table::metrics(&[
        ("samples", b.samples.to_string()),
        ("successes", b.successes.to_string()),
        ("success_rate", num(b.success_rate)),
        ("seeded_wins", b.seeded_wins.to_string()),
        ("retry_wins", b.retry_wins.to_string()),
        ("max_rel_off_norm", num(b.max_rel_off_norm)),
    ]);
    Ok(Outcome {
        result: Some(json!({ "range": range, "config": config, "batch": b })),
        table,
        error: None,
    })
}

fn modal(g: SymMat3) -> Result<Outcome, Failure> {
    let diagonalizer = robust_orthonormal_diagonalizer(&g)?;
    let report = modal_transform(&g)?;
    let sets = compare_eigenvalue_sets(&g)?;
    let b = &report.basis;
    let mut table = Table::new(&[
        "vector",
        "c1",
        "c2",
        "c3",
        "lambda",
        "eig_residual",
        "norm_residual_printed",
        "norm_residual_alt",
    ]);
    let rows = [
        ("v", b.v, b.lambda0),
        ("v_plus", b.v_plus, b.lambda_plus),
        ("v_minus", b.v_minus, b.lambda_minus),
    ];
    for (k, (name, v, lam)) in rows.into_iter().enumerate() {
        table.push(vec![
            name.into(),
            num(v[0]),
            num(v[1]),
            num(v[2]),
            num(lam),
            num(b.eig_residuals[k]),
            num(b.norm_residuals[k]),
            num(b.norm_residuals_alt[k]),
        ]);
    }
    Ok(Outcome {
        result: Some(json!({
            "matrix": g.to_mat(),
            "transform": report,
            "eigenvalue_sets": sets,
            "robust_diagonalizer": diagonalizer,
        })),
        table,
        error: None,
    })
}

fn simulate(cli: &Cli, compare: bool) -> Result<Outcome, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| UsageError::new("simulate needs --config"))?;
    let cfg = SystemConfig::load(path)?;
    let sys = cfg.profiles()?;
    let (x0, p0) = cfg.initial_state();

    let mut header = vec!["t", "x1", "x2", "x3", "p1", "p2", "p3", "energy"];
    if compare {
        header.push("D");
    }
    let mut table = Table::new(&header);

    let (direct, naive) = if compare {
        let c = integrate_naive_decoupled(&sys, x0, p0)?;
        (c.direct.clone(), Some(c))
    } else {
        (integrate_direct(&sys, x0, p0)?, None)
    };
    for (k, s) in direct.states.iter().enumerate() {
        let mut row = vec![
            s.t, s.x[0], s.x[1], s.x[2], s.p[0], s.p[1], s.p[2], s.energy,
        ]
        .into_iter()
        .map(num)
        .collect::<Vec<_>>();
        if let Some(c) = &naive {
            row.push(c.discrepancy.get(k).map_or_else(String::new, |d| num(*d)));
        }
        table.push(row);
    }

    let error = naive.as_ref().and_then(|c| c.stopped.clone());
    let result = match &naive {
        Some(c) => json!({
            "system": cfg,
            "steps": direct.steps,
            "h": direct.h,
            "direct": direct,
            "naive": c.naive,
            "discrepancy": c.discrepancy,
            "max_discrepancy": c.max_discrepancy,
            "min_overlap": c.min_overlap,
        }),
        None => json!({
            "system": cfg,
            "steps": direct.steps,
            "h": direct.h,
            "direct": direct,
        }),
    };
    Ok(Outcome {
        result: Some(result),
        table,
        error,
    })
}

fn report(cli: &Cli) -> Result<Outcome, Failure> {
    let n = samples(cli, 1000)?;
    let seed = cli.seed;
    let spectrum = spectrum_sweep(n, seed, 1e3, 1e-10);
    let fit = euler_fit_batch(
        n,
        seed,
        1e3,
        1e-8,
        &FitConfig {
            seed,
            ..FitConfig::default()
        },
    );
    let rotation = rotation_audit(n, seed, EulerAngles::new(0.3, 0.4, 0.5));
    let mij = mij_audit(n, seed, CONFIRM_FACTOR);
    let modal_orth = modal_sweep(n, seed, 1e3, 1e-6);
    let example = SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0);
    let example_sets = compare_eigenvalue_sets(&example)?;

    let m33 = mij.table[2][2].status;
    let checks = [
        ("spectrum_oracle", spectrum.passed()),
        ("trace_identities", spectrum.traces_hold()),
        ("euler_fit_rate", fit.success_rate >= 0.99),
        (
            "mij_m33_confirmed",
            m33 == triosc::mij::EntryStatus::Confirmed,
        ),
        ("modal_example", example_sets.modal_vs_jacobi <= 1e-10),
        (
            "modal_orthogonality",
            modal_orth.build_errors == 0 && modal_orth.max_orthogonality_dev <= 1e-12,
        ),
        (
            "rotation_algebra",
            rotation.generator.commutator_residual <= 1e-15
                && rotation.adjoint_max_gram <= 1e-12
                && rotation.printed_gram_at_probe > 0.0
                && rotation.standard_gram_at_probe <= 1e-14,
        ),
    ];
    let mut items: Vec<(&str, String)> = vec![
        ("samples", n.to_string()),
        (
            "spectrum_max_rel_robust_vs_jacobi",
            num(spectrum.max_rel_robust_vs_jacobi),
        ),
        (
            "spectrum_max_rel_trace_printed",
            num(spectrum.max_rel_trace_printed),
        ),
        ("euler_fit_success_rate", num(fit.success_rate)),
        (
            "modal_max_orthogonality_dev",
            num(modal_orth.max_orthogonality_dev),
        ),
        ("printed_gram_at_probe", num(rotation.printed_gram_at_probe)),
    ];
    items.extend(checks.iter().map(|(k, v)| (*k, flag(*v))));
    let table = Table::metrics(&items);

    let checks: serde_json::Map<String, Value> = checks
        .iter()
        .map(|(k, v)| (k.to_string(), Value::Bool(*v)))
        .collect();
    Ok(Outcome {
        result: Some(json!({
            "spectrum": spectrum,
            "euler_fit": fit,
            "rotation": rotation,
            "mij": mij,
            "modal_orthogonality": modal_orth,
            "modal_example": example_sets,
            "checks": checks,
        })),
        table,
        error: None,
    })
}
