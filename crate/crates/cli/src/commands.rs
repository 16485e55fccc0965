use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use weakrp::afriat::{self, StrictParams};
use weakrp::axioms::{check, Axiom};
use weakrp::counterfactual::{in_wdemand, milp_feasible, wdemand_box, CounterfactualQuery, MilpOptions, Slot};
use weakrp::maximin::LocalUtilityFamily;
use weakrp::quasilinear::{self, QlPreference};
use weakrp::recover::{membership, BoundSet, RecoverOptions};
use weakrp::{selfcheck, Dataset, Error};

use crate::report::{self, envelope, error_value, is_cap, is_violation, value, Caps, Interpretation, Meta, Tolerances};
use crate::{exit, AxiomArg, Command, NumberSystem, QlOp, RunConfig, SetArg};

/// What the process prints and returns.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub text: Option<String>,
    pub diagnostic: Option<String>,
}

/// A command's result before formatting.
#[derive(Debug, Default)]
struct Report {
    result: Value,
    csv: Option<String>,
    /// Emit CSV unless `--json` was given.
    prefer_csv: bool,
    violation: bool,
    undecided: bool,
    failed: bool,
    diagnostic: Option<String>,
}

impl Report {
    fn json(result: Value) -> Self {
        Self {
            result,
            ..Self::default()
        }
    }
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Test { .. } => "test",
        Command::Numbers { .. } => "numbers",
        Command::Prefer { .. } => "prefer",
        Command::Bounds { .. } => "bounds",
        Command::Counterfactual { .. } => "counterfactual",
        Command::Quasilinear { .. } => "quasilinear",
        Command::Selfcheck { .. } => "selfcheck",
    }
}

fn input(c: &Command) -> Option<&Path> {
    match c {
        Command::Test { input, .. }
        | Command::Numbers { input, .. }
        | Command::Prefer { input, .. }
        | Command::Bounds { input, .. }
        | Command::Counterfactual { input, .. }
        | Command::Quasilinear { input, .. } => Some(input),
        Command::Selfcheck { .. } => None,
    }
}

pub fn meta(cfg: &RunConfig) -> Meta {
    Meta {
        tool: "weakrp",
        version: env!("CARGO_PKG_VERSION"),
        command: name(&cfg.command),
        input: input(&cfg.command).map(|p| p.display().to_string()),
        indices: "1-based",
        tolerances: Tolerances {
            tol: cfg.common.tol,
            milp_eps: MilpOptions::default().eps,
        },
        caps: Caps {
            max_patterns: cfg.common.max_patterns,
            max_nodes: cfg.common.max_nodes,
        },
        seed: cfg.common.seed,
        interpretation: Interpretation::default(),
    }
}

fn usage(message: impl Into<String>) -> Outcome {
    Outcome {
        code: exit::USAGE,
        text: None,
        diagnostic: Some(format!("usage error: {}", message.into())),
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let c = &cfg.common;
    if !(c.tol.is_finite() && c.tol >= 0.0) {
        return usage(format!("--tol must be a nonnegative number, got {}", c.tol));
    }
    let meta = meta(cfg);
    let result = input(&cfg.command)
        .map(|p| Dataset::from_csv_path(p).map(Some))
        .unwrap_or(Ok(None))
        .and_then(|d| dispatch(cfg, d));
    let r = match result {
        Ok(r) => r,
        Err(e) if is_cap(&e) => {
            let body = envelope(&meta, json!({ "decided": false, "error": error_value(&e) }));
            return Outcome {
                code: exit::CAP,
                text: Some(pretty(&body)),
                diagnostic: Some(format!("undecided: {}", report::message(&e))),
            };
        }
        Err(e @ (Error::InvalidInput(_) | Error::Csv { .. } | Error::Normalization { .. })) => {
            return usage(report::message(&e));
        }
        Err(e) => {
            return Outcome {
                code: exit::SOFTWARE,
                text: None,
                diagnostic: Some(format!("error: {}", report::message(&e))),
            };
        }
    };
    let as_csv = c.csv || (r.prefer_csv && !c.json);
    let text = if as_csv {
        match r.csv {
            Some(t) => t,
            None => return usage(format!("CSV output is not available for `{}`", meta.command)),
        }
    } else {
        pretty(&envelope(&meta, r.result))
    };
    let code = if r.undecided {
        exit::CAP
    } else if r.failed {
        exit::FAILED
    } else if r.violation && c.strict_exit {
        exit::VIOLATION
    } else {
        exit::OK
    };
    Outcome {
        code,
        text: Some(text),
        diagnostic: r.diagnostic,
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn check_len(what: &str, v: &[f64], d: &Dataset) -> Result<(), Error> {
    if v.len() == d.goods() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has {} entries, the data have {} goods",
            v.len(),
            d.goods()
        )))
    }
}

/// An axiom violation reported as a decided outcome.
fn violated(e: Error) -> Result<Report, Error> {
    if is_violation(&e) {
        Ok(Report {
            result: json!({ "certified": false, "violation": error_value(&e) }),
            violation: true,
            ..Report::default()
        })
    } else {
        Err(e)
    }
}

fn dispatch(cfg: &RunConfig, d: Option<Dataset>) -> Result<Report, Error> {
    let tol = cfg.common.tol;
    let d = d.as_ref();
    match &cfg.command {
        Command::Test { axiom, .. } => Ok(test(d.unwrap(), *axiom, tol)),
        Command::Numbers { system, epsilon, .. } => numbers(d.unwrap(), *system, *epsilon, tol).or_else(violated),
        Command::Prefer { x, y, strict, .. } => prefer(d.unwrap(), x, y, *strict, tol).or_else(violated),
        Command::Bounds {
            x, y, set, axiom, grid, ..
        } => {
            let d = d.unwrap();
            let axiom = match axiom.axioms().as_slice() {
                [a @ (Axiom::Warp | Axiom::Wgarp | Axiom::Sarp | Axiom::Garp)] => *a,
                _ => return Err(Error::InvalidInput("--axiom must be one of warp, wgarp, sarp, garp".into())),
            };
            let opts = RecoverOptions {
                axiom,
                tol,
                max_patterns: cfg.common.max_patterns,
            };
            match (grid, y) {
                (Some(n), _) => bounds_grid(d, x, *set, *n, &opts).or_else(violated),
                (None, Some(y)) => {
                    let set = set.ok_or_else(|| Error::InvalidInput("--set is required without --grid".into()))?;
                    bounds(d, x, y, set, &opts).or_else(violated)
                }
                (None, None) => Err(Error::InvalidInput("--y or --grid is required".into())),
            }
        }
        Command::Counterfactual {
            price,
            bundle,
            wealth,
            box_resolution,
            ..
        } => counterfactual(
            d.unwrap(),
            price,
            bundle.as_deref(),
            *wealth,
            *box_resolution,
            tol,
            cfg.common.max_nodes,
        ),
        Command::Quasilinear { op, z, x, y, .. } => {
            quasilinear(d.unwrap(), *op, z.as_deref(), x.as_deref(), y.as_deref(), tol).or_else(violated)
        }
        Command::Selfcheck { criterion } => Ok(run_selfcheck(*criterion, cfg.common.seed)),
    }
}

fn csv_text(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

fn matrix_csv(prefix: &str, m: &[Vec<f64>]) -> String {
    let n = m.len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|s| format!("{prefix}{s}")));
    let rows = m.iter().enumerate().map(|(t, row)| {
        let mut r = vec![(t + 1).to_string()];
        r.extend(row.iter().map(|v| v.to_string()));
        r
    });
    csv_text(&header, rows)
}

fn columns_csv(columns: &[(&str, &[f64])]) -> String {
    let n = columns.first().map_or(0, |c| c.1.len());
    let mut header = vec!["t".to_string()];
    header.extend(columns.iter().map(|c| c.0.to_string()));
    let rows = (0..n).map(|t| {
        let mut r = vec![(t + 1).to_string()];
        r.extend(columns.iter().map(|c| c.1[t].to_string()));
        r
    });
    csv_text(&header, rows)
}

fn test(d: &Dataset, axiom: AxiomArg, tol: f64) -> Report {
    let reports: Vec<_> = axiom.axioms().into_iter().map(|a| check(d, a, tol)).collect();
    let rows = reports.iter().map(|r| {
        let witness = match value(&r.witness) {
            Value::Object(m) => m
                .values()
                .flat_map(|v| v.as_array().cloned().unwrap_or_default())
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            _ => String::new(),
        };
        vec![r.axiom.code().to_string(), r.holds.to_string(), witness, r.slack.to_string()]
    });
    let header = ["axiom", "holds", "witness", "slack"].map(String::from);
    Report {
        csv: Some(csv_text(&header, rows)),
        violation: reports.iter().any(|r| !r.holds),
        ..Report::json(value(&reports))
    }
}

fn numbers(d: &Dataset, system: NumberSystem, epsilon: Option<f64>, tol: f64) -> Result<Report, Error> {
    Ok(match system {
        NumberSystem::Afriat | NumberSystem::Strict => {
            let n = if system == NumberSystem::Strict {
                let mut params = StrictParams::default_for(d);
                if let Some(eps) = epsilon {
                    if !(eps.is_finite() && eps > 0.0) {
                        return Err(Error::InvalidInput(format!("--epsilon must be positive, got {eps}")));
                    }
                    params.eps = eps;
                }
                afriat::strict_afriat_numbers(d, params, tol)?
            } else {
                afriat::afriat_numbers(d, tol)?
            };
            let verified = if n.strict.is_some() { n.verify_strict(d, tol) } else { n.verify(d, tol) };
            Report {
                csv: Some(columns_csv(&[("u", &n.u), ("lambda", &n.lambda)])),
                ..Report::json(json!({
                    "system": if n.strict.is_some() { "strict" } else { "afriat" },
                    "certified": true,
                    "verified": verified,
                    "u": n.u,
                    "lambda": n.lambda,
                    "strict": n.strict,
                    "residuals": n.residuals(d),
                }))
            }
        }
        NumberSystem::Varian => {
            let u = afriat::varian_numbers(d, tol)?;
            Report {
                csv: Some(columns_csv(&[("u", &u)])),
                ..Report::json(json!({ "system": "varian", "certified": true, "u": u }))
            }
        }
        NumberSystem::Pairwise => {
            let n = afriat::pairwise_numbers(d, tol)?;
            Report {
                csv: Some(matrix_csv("r", &n.r)),
                ..Report::json(json!({
                    "system": "pairwise",
                    "certified": true,
                    "verified": n.verify(d, tol),
                    "r": n.r,
                    "lambda": n.lambda,
                    "residuals": n.residuals(d),
                }))
            }
        }
        NumberSystem::W => {
            let n = afriat::w_numbers(d, tol)?;
            Report {
                csv: Some(matrix_csv("w", &n.w)),
                ..Report::json(json!({
                    "system": "w",
                    "certified": true,
                    "verified": n.verify(d, tol),
                    "w": n.w,
                }))
            }
        }
    })
}

fn prefer(d: &Dataset, x: &[f64], y: &[f64], strict: bool, tol: f64) -> Result<Report, Error> {
    check_len("--x", x, d)?;
    check_len("--y", y, d)?;
    if d.is_empty() {
        return Err(Error::InvalidInput("the preference needs at least one observation".into()));
    }
    let f = if strict {
        LocalUtilityFamily::build_strict(d, StrictParams::default_for(d), tol)?
    } else {
        LocalUtilityFamily::build(d, tol)?
    };
    let p = f.eval(x, y)?;
    Ok(Report::json(json!({
        "x": x,
        "y": y,
        "strict": strict,
        "preference": value(&p),
    })))
}

fn set_of(s: SetArg) -> BoundSet {
    match s {
        SetArg::Rp => BoundSet::Rp,
        SetArg::Nrw => BoundSet::Nrw,
        SetArg::Rpw => BoundSet::RpW,
        SetArg::Nrww => BoundSet::NrwW,
    }
}

fn bounds(d: &Dataset, x: &[f64], y: &[f64], set: SetArg, opts: &RecoverOptions) -> Result<Report, Error> {
    check_len("--x", x, d)?;
    check_len("--y", y, d)?;
    let m = membership(d, set_of(set), y, x, opts)?;
    Ok(Report::json(json!({ "decided": true, "membership": value(&m) })))
}

const GRID_POINTS_CAP: usize = 1_000_000;

fn bounds_grid(d: &Dataset, x: &[f64], set: Option<SetArg>, n: usize, opts: &RecoverOptions) -> Result<Report, Error> {
    check_len("--x", x, d)?;
    let l = d.goods();
    if n == 0 {
        return Err(Error::InvalidInput("--grid needs at least 1 point per axis".into()));
    }
    let total = n
        .checked_pow(l as u32)
        .filter(|t| *t <= GRID_POINTS_CAP)
        .ok_or_else(|| Error::InvalidInput(format!("--grid {n} over {l} goods exceeds {GRID_POINTS_CAP} points")))?;
    let sets: Vec<SetArg> = match set {
        Some(s) => vec![s],
        None => vec![SetArg::Rp, SetArg::Nrw, SetArg::Rpw, SetArg::Nrww],
    };
    let hi = 1.25 * d.bundles().iter().flatten().chain(x).fold(0.0_f64, |m, v| m.max(*v)).max(1e-12);
    // Axis points hi/n, 2hi/n, ..., hi; the zero bundle is not a valid candidate.
    let step = hi / n as f64;
    let point = |mut k: usize| -> Vec<f64> {
        (0..l)
            .map(|_| {
                let i = k % n;
                k /= n;
                (i + 1) as f64 * step
            })
            .collect()
    };
    let rows: Vec<(Vec<f64>, Vec<Option<bool>>)> = (0..total)
        .into_par_iter()
        .map(|k| {
            let y = point(k);
            let flags = sets
                .iter()
                .map(|s| match membership(d, set_of(*s), &y, x, opts) {
                    Ok(m) => Ok(Some(m.member)),
                    Err(e) if is_cap(&e) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok((y, flags))
        })
        .collect::<Result<_, Error>>()?;
    let names: Vec<&str> = sets
        .iter()
        .map(|s| match s {
            SetArg::Rp => "rp",
            SetArg::Nrw => "nrw",
            SetArg::Rpw => "rpw",
            SetArg::Nrww => "nrww",
        })
        .collect();
    let mut header: Vec<String> = (1..=l).map(|k| format!("y{k}")).collect();
    header.extend(names.iter().map(|s| s.to_string()));
    let csv_rows = rows.iter().map(|(y, flags)| {
        let mut r: Vec<String> = y.iter().map(|v| v.to_string()).collect();
        r.extend(flags.iter().map(|f| match f {
            Some(true) => "1".into(),
            Some(false) => "0".into(),
            None => String::new(),
        }));
        r
    });
    let undecided = rows.iter().flat_map(|r| &r.1).filter(|f| f.is_none()).count();
    let counts: serde_json::Map<String, Value> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.to_string(), json!(rows.iter().filter(|r| r.1[i] == Some(true)).count())))
        .collect();
    Ok(Report {
        csv: Some(csv_text(&header, csv_rows)),
        prefer_csv: true,
        undecided: undecided > 0,
        diagnostic: (undecided > 0).then(|| format!("undecided: {undecided} grid memberships exceeded the pattern cap")),
        ..Report::json(json!({
            "x": x,
            "points": total,
            "upper": hi,
            "members": counts,
            "undecided": undecided,
        }))
    })
}

fn counterfactual(
    d: &Dataset,
    price: &[f64],
    bundle: Option<&[f64]>,
    wealth: Option<f64>,
    resolution: Option<usize>,
    tol: f64,
    max_nodes: u64,
) -> Result<Report, Error> {
    check_len("--price", price, d)?;
    if let Some(b) = bundle {
        check_len("--bundle", b, d)?;
    }
    let cost = bundle.map(|b| price.iter().zip(b).map(|(p, x)| p * x).sum::<f64>());
    let w = wealth.or(cost).unwrap_or(1.0);
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidInput(format!("wealth must be positive, got {w}")));
    }
    let p_new: Vec<f64> = price.iter().map(|p| p / w).collect();
    let mut result = json!({ "price": price, "wealth": w, "normalized_price": p_new });
    let mut base_wgarp = true;
    if let Some(b) = bundle {
        let m = in_wdemand(d, &p_new, b, tol)?;
        base_wgarp = m.base_wgarp;
        let q = CounterfactualQuery {
            base: d.clone(),
            slots: vec![Slot::at_price(price, [b.to_vec()])],
        };
        let opts = MilpOptions {
            tol,
            max_nodes,
            ..MilpOptions::default()
        };
        let milp = milp_feasible(&q, &opts)?;
        result["membership"] = value(&m);
        result["binary_system"] = value(&milp);
    }
    let resolution = resolution.or(bundle.is_none().then_some(10));
    if let Some(n) = resolution {
        let b = wdemand_box(d, &p_new, n, tol)?;
        result["box"] = value(&b);
    }
    Ok(Report {
        violation: !base_wgarp || !check(d, Axiom::Wgarp, tol).holds,
        ..Report::json(result)
    })
}

fn quasilinear(
    d: &Dataset,
    op: QlOp,
    z: Option<&[f64]>,
    x: Option<&[f64]>,
    y: Option<&[f64]>,
    tol: f64,
) -> Result<Report, Error> {
    let need = |v: Option<&[f64]>, flag: &str| -> Result<Vec<f64>, Error> {
        let v = v.ok_or_else(|| Error::InvalidInput(format!("{flag} is required for this operation")))?;
        check_len(flag, v, d)?;
        Ok(v.to_vec())
    };
    Ok(match op {
        QlOp::Numbers => {
            let n = quasilinear::quasilinear_numbers(d, tol)?;
            Report {
                csv: Some(columns_csv(&[("u", &n.u)])),
                ..Report::json(json!({
                    "certified": true,
                    "verified": n.verify(d, tol),
                    "u": n.u,
                    "residuals": n.residuals(d),
                }))
            }
        }
        QlOp::Utility => {
            let z = need(z, "--z")?;
            let n = quasilinear::quasilinear_numbers(d, tol)?;
            let v = quasilinear::quasilinear_utility(d, &n, &z);
            Report::json(json!({ "certified": true, "z": z, "value": v, "u": n.u }))
        }
        QlOp::Prefer => {
            let x = need(x, "--x")?;
            let y = need(y, "--y")?;
            if d.is_empty() {
                return Err(Error::InvalidInput("the preference needs at least one observation".into()));
            }
            let f = QlPreference::build(d, tol)?;
            let v = f.eval(&x, &y)?;
            Report::json(json!({
                "certified": true,
                "x": x,
                "y": y,
                "r": f.numbers().r,
                "preference": value(&v),
            }))
        }
        QlOp::Theoremd => {
            let r = quasilinear::check_theorem_d_feasibility(d)?;
            Report {
                violation: !r.feasible,
                ..Report::json(value(&r))
            }
        }
    })
}

fn run_selfcheck(criterion: Option<u8>, seed: u64) -> Report {
    let results = match criterion {
        Some(id) => vec![selfcheck::run(id, seed)],
        None => selfcheck::run_all(seed),
    };
    let lines: Vec<String> = results.iter().map(|r| r.to_string()).collect();
    let header = ["id", "name", "passed", "seconds", "detail"].map(String::from);
    let rows = results.iter().map(|r| {
        vec![
            r.id.to_string(),
            r.name.to_string(),
            r.passed.to_string(),
            format!("{:.3}", r.seconds),
            r.detail.clone(),
        ]
    });
    Report {
        csv: Some(csv_text(&header, rows)),
        failed: results.iter().any(|r| !r.passed),
        diagnostic: Some(lines.join("\n")),
        ..Report::json(json!({ "seed": seed, "criteria": value(&results) }))
    }
}
