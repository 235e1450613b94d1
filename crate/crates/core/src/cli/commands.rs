use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::base_dynamics::{anosov_close, shadow_segment, SymbolicPoint};
use crate::certify::{
    certify_invertibility, periodic_exponent_scan, singularity_contradiction, weakest_window, CertificateInput,
    CertifyError, Rejection, Verdict,
};
use crate::cocycle::{exterior_generator, linalg, MatrixGenerator};
use crate::livsic::{
    check_periodic_obstruction, default_obstruction_tol, inverse_holder_bound, solve_coboundary_with,
    verify_coboundary, LivsicError, SolveOptions, TransferTable,
};
use crate::lyapunov::{estimate_spectrum, growth_constant, periodic_spectrum, sum_exponents, LyapunovError, SumTarget};
use crate::serde_ext::Ext;

use super::{CliError, Command, ExperimentConfig, Outcome, EXIT_INCONCLUSIVE, EXIT_NEGATIVE, EXIT_OK};

const TABLE_FILE: &str = "transfer_table.json";
/// Verification tolerance for `livsic-verify` when `params.tol` is absent.
const VERIFY_TOL: f64 = 1e-8;

pub(crate) fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let g = cfg.generator()?;
    match command {
        Command::Spectrum => spectrum(cfg, &g),
        Command::PeriodicScan => scan(cfg, &g),
        Command::Certify => certify(cfg, &g),
        Command::GrowthBound => growth(cfg, &g),
        Command::Shadow => shadow(cfg, &g),
        Command::LivsicCheck => livsic_check(cfg, &g),
        Command::LivsicSolve => livsic_solve(cfg, &g),
        Command::LivsicVerify => livsic_verify(cfg, &g),
        Command::Contradiction => contradiction(cfg, &g),
    }
}

fn ok(result: Value) -> Outcome {
    Outcome {
        exit_code: EXIT_OK,
        status: "ok",
        result,
        csv: None,
        files: Vec::new(),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

/// `{:?}` keeps full precision and prints infinities as `inf` / `-inf`.
fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}

fn spectrum(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let mu = cfg.measure()?.expect("validated");
    let seed = p.seed.expect("validated");
    let target = match p.exterior {
        Some(i) => exterior_generator(g, i)?,
        None => g.clone(),
    };
    let spec = estimate_spectrum(&target, &mu, p.steps, seed)?;
    let sum = sum_exponents(&target, SumTarget::Measure(&mu))?;
    let mut result = json!({
        "spectrum": spec,
        "groups": spec.groups(),
        "sum_exponents": Ext(sum),
        "exterior": p.exterior,
    });
    let mut csv = None;
    if let Some(steps) = p.sweep.as_ref().and_then(|s| s.steps.as_ref()) {
        let d = target.dim();
        let mut text = String::from("steps,seed");
        for i in 1..=d {
            text.push_str(&format!(",value_{i}"));
        }
        for i in 1..=d {
            text.push_str(&format!(",se_{i}"));
        }
        text.push('\n');
        let mut rows = Vec::new();
        for &n in steps {
            let s = estimate_spectrum(&target, &mu, n, seed)?;
            let se = s.standard_error().map(<[f64]>::to_vec).unwrap_or_else(|| vec![f64::NAN; d]);
            let cells: Vec<String> = s.values().iter().chain(&se).map(|&x| cell(x)).collect();
            text.push_str(&format!("{n},{seed},{}\n", cells.join(",")));
            rows.push(s);
        }
        result["sweep"] = to_value(&rows);
        csv = Some(text);
    }
    Ok(Outcome { csv, ..ok(result) })
}

#[derive(Serialize)]
struct OrbitRow {
    orbit: crate::base_dynamics::PeriodicOrbit,
    period: usize,
    sum: Ext,
    spectrum: crate::lyapunov::LyapunovSpectrum,
}

fn scan(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let scan = periodic_exponent_scan(g, cfg.params.max_period)?;
    let rows = scan
        .records
        .iter()
        .map(|r| {
            Ok(OrbitRow {
                orbit: r.orbit.clone(),
                period: r.period,
                sum: Ext(r.sum),
                spectrum: periodic_spectrum(g, &r.orbit)?,
            })
        })
        .collect::<Result<Vec<_>, LyapunovError>>()?;
    Ok(ok(json!({
        "max_period": scan.max_period,
        "orbits": rows.len(),
        "min": Ext(scan.min),
        "max": Ext(scan.max),
        "records": rows,
    })))
}

fn input(cfg: &ExperimentConfig, g: &MatrixGenerator, rho: f64, tau: f64) -> CertificateInput {
    CertificateInput::for_generator(g, rho, tau, cfg.params.max_period).with_c(cfg.params.c)
}

fn verdict_label(v: &Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::Rejected(Rejection::Bound { .. }) => "rejected_bound",
        Verdict::Rejected(Rejection::Lower { .. }) => "rejected_lower",
        Verdict::Rejected(Rejection::Upper { .. }) => "rejected_upper",
    }
}

fn certify(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let (rho, tau) = (p.rho.expect("validated"), p.tau.expect("validated"));
    let cert = certify_invertibility(g, &input(cfg, g, rho, tau))?;
    let certified = cert.verdict.is_certified();
    let mut result = to_value(&cert);
    let mut csv = None;
    if let Some(sw) = &p.sweep {
        let rhos = sw.rho.clone().unwrap_or_else(|| vec![rho]);
        let taus = sw.tau.clone().unwrap_or_else(|| vec![tau]);
        let mut text = String::from("rho,tau,bound_lhs,bound_rhs,bound_ok,verdict,singular_windows\n");
        let mut rows = Vec::new();
        for &r in &rhos {
            for &t in &taus {
                let c = certify_invertibility(g, &input(cfg, g, r, t))?;
                let label = verdict_label(&c.verdict);
                text.push_str(&format!(
                    "{},{},{},{},{},{label},{}\n",
                    cell(r),
                    cell(t),
                    cell(c.bound_lhs),
                    cell(c.bound_rhs),
                    c.bound_ok,
                    c.ground_truth.singular_windows.len()
                ));
                rows.push(json!({"rho": r, "tau": t, "bound_ok": c.bound_ok, "verdict": label}));
            }
        }
        result["sweep"] = Value::Array(rows);
        csv = Some(text);
    }
    Ok(Outcome {
        exit_code: if certified { EXIT_OK } else { EXIT_NEGATIVE },
        status: if certified { "certified" } else { "rejected" },
        csv,
        ..ok(result)
    })
}

fn growth(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let (rho, eps) = (p.rho.expect("validated"), p.eps.expect("validated"));
    let main = match growth_constant(g, rho, eps, p.n_max) {
        Ok(b) => b,
        Err(LyapunovError::NotFound(n)) => {
            return Ok(Outcome {
                exit_code: EXIT_INCONCLUSIVE,
                status: "inconclusive",
                ..ok(json!({"rho": rho, "eps": eps, "n_max": n, "reason": "no uniform N within n_max"}))
            });
        }
        Err(e) => return Err(e.into()),
    };
    let mut result = to_value(&main);
    let mut csv = None;
    if let Some(list) = p.sweep.as_ref().and_then(|s| s.eps.as_ref()) {
        let mut text = String::from("eps,n,log_c_eps\n");
        let mut rows = Vec::new();
        for &e in list {
            match growth_constant(g, rho, e, p.n_max) {
                Ok(b) => {
                    text.push_str(&format!("{},{},{}\n", cell(e), b.n, cell(b.log_c_eps)));
                    rows.push(json!({"eps": e, "n": b.n, "log_c_eps": b.log_c_eps}));
                }
                Err(LyapunovError::NotFound(_)) => {
                    text.push_str(&format!("{},,\n", cell(e)));
                    rows.push(json!({"eps": e, "n": null, "log_c_eps": null}));
                }
                Err(err) => return Err(err.into()),
            }
        }
        result["sweep"] = Value::Array(rows);
        csv = Some(text);
    }
    Ok(Outcome { csv, ..ok(result) })
}

fn shadow(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let sft = g.sft();
    let x = match &p.point {
        Some(x) => {
            x.validate(sft)?;
            x.clone()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.expect("validated"));
            SymbolicPoint::random(sft, &mut rng, 2 * p.n + 2)
        }
    };
    let sh = shadow_segment(sft, &x, p.n, p.centered)?;
    let check = sh.check_bound(&x);
    let segment = x.window(0, p.n.max(1));
    let closing = if sft.allows(segment.last().unwrap(), segment.first().unwrap()) {
        Some(anosov_close(sft, &segment, true)?)
    } else {
        None
    };
    let holds = check.holds;
    Ok(Outcome {
        exit_code: if holds { EXIT_OK } else { EXIT_NEGATIVE },
        status: if holds { "ok" } else { "bound_violated" },
        ..ok(json!({"point": x, "shadow": sh, "check": check, "closing": closing}))
    })
}

fn livsic_check(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let tol = p.tol.unwrap_or_else(|| default_obstruction_tol(g));
    let report = check_periodic_obstruction(g, p.max_period, tol)?;
    let holder = match inverse_holder_bound(g) {
        Ok(h) => Some(h),
        Err(LivsicError::SingularWindow(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let passed = report.passed;
    Ok(Outcome {
        exit_code: if passed { EXIT_OK } else { EXIT_NEGATIVE },
        status: if passed { "passed" } else { "obstructed" },
        ..ok(json!({"obstruction": report, "inverse_holder": holder}))
    })
}

fn livsic_solve(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let depth = p.depth.unwrap_or(g.window_len());
    let gauge = match &p.gauge {
        Some(v) => Some(linalg::from_row_major(g.dim(), v).ok_or_else(|| {
            CliError::Schema(vec![format!("params.gauge: expected {} entries", g.dim() * g.dim())])
        })?),
        None => None,
    };
    let opts = SolveOptions {
        depth,
        orbit_budget: p.orbit_budget,
        gauge,
        obstruction_period: Some(p.max_period),
        tol: p.tol,
    };
    let table = match solve_coboundary_with(g, &opts) {
        Ok(t) => t,
        Err(LivsicError::ObstructionFailed { orbit, defect }) => {
            return Ok(Outcome {
                exit_code: EXIT_NEGATIVE,
                status: "obstructed",
                ..ok(json!({"orbit": orbit, "defect": Ext(defect)}))
            });
        }
        Err(LivsicError::CoverageIncomplete { missing, first }) => {
            return Ok(Outcome {
                exit_code: EXIT_INCONCLUSIVE,
                status: "inconclusive",
                ..ok(json!({"missing_cylinders": missing, "first_missing": first, "orbit_budget": p.orbit_budget}))
            });
        }
        Err(e) => return Err(e.into()),
    };
    let check = verify_coboundary(g, &table, p.samples, p.seed.unwrap_or(0))?;
    let text = table.to_json();
    let embedded: Value = serde_json::from_str(&text).expect("table JSON parses");
    Ok(Outcome {
        files: vec![(TABLE_FILE.to_string(), text + "\n")],
        ..ok(json!({
            "table_file": TABLE_FILE,
            "depth": table.depth(),
            "cylinders": table.entries().len(),
            "oscillation": table.oscillation(),
            "steps": table.steps(),
            "verify": check,
            "table": embedded,
        }))
    })
}

fn livsic_verify(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let path = cfg.table_path().expect("validated");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let table = TransferTable::from_json(&text)?;
    let check = match verify_coboundary(g, &table, p.samples, p.seed.unwrap_or(0)) {
        Ok(c) => c,
        Err(LivsicError::CoverageIncomplete { missing, first }) => {
            return Ok(Outcome {
                exit_code: EXIT_NEGATIVE,
                status: "incomplete_table",
                ..ok(json!({"missing_cylinders": missing, "first_missing": first}))
            });
        }
        Err(e) => return Err(e.into()),
    };
    let tol = p.tol.unwrap_or(VERIFY_TOL);
    let passed = check.defect <= tol;
    Ok(Outcome {
        exit_code: if passed { EXIT_OK } else { EXIT_NEGATIVE },
        status: if passed { "verified" } else { "defect_above_tol" },
        ..ok(json!({"tol": tol, "check": check}))
    })
}

fn contradiction(cfg: &ExperimentConfig, g: &MatrixGenerator) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let (rho, tau) = (p.rho.expect("validated"), p.tau.expect("validated"));
    let w = p.window.clone().unwrap_or_else(|| weakest_window(g));
    match singularity_contradiction(g, &w, p.n_max, &input(cfg, g, rho, tau), p.growth_n_max) {
        Ok(report) => Ok(ok(to_value(&report))),
        Err(CertifyError::HypothesisUnavailable(reason)) => Ok(Outcome {
            exit_code: EXIT_INCONCLUSIVE,
            status: "inconclusive",
            ..ok(json!({"window": w, "reason": reason}))
        }),
        Err(e) => Err(e.into()),
    }
}
