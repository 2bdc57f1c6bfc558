use std::io::Write;

use rand::Rng;
use roughjump::stochgen::{gen_wealth, stream_rng, Substream};
use roughjump::sweep::{run_sweep, write_csv, Model, SweepConfig};
use roughjump::{
    control, controlled_from_function, default_schedule, gen_compound_poisson, gen_fbm, gen_mixed, ito_verify,
    log_wealth, parse_function, proof_term_diagnostics, reduced_lift, rrs_integrate, IntegrateOptions, RegulatedPath,
    VERSION,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::settings::{Format, Settings, SimModel};
use crate::CliError;

/// Pairs checked by `lift-check` come from every row when the grid has at
/// most this many points, from a random subset of rows otherwise.
const ALL_ROWS_MAX: usize = 128;
const SAMPLED_ROWS: usize = 16;

fn emit(settings: &Settings, bytes: &[u8]) -> Result<(), CliError> {
    match &settings.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Serializes `report` and stamps it with schema, version and the effective config.
fn emit_report<R: Serialize>(settings: &Settings, command: &str, report: &R) -> Result<(), CliError> {
    if settings.format() == Format::Csv {
        return Err(CliError::Precondition(format!("{command} only writes json")));
    }
    let mut value = serde_json::to_value(report).map_err(|e| CliError::Parse(e.to_string()))?;
    stamp(&mut value, settings, command)?;
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Parse(e.to_string()))?;
    text.push('\n');
    emit(settings, text.as_bytes())
}

fn stamp(value: &mut Value, settings: &Settings, command: &str) -> Result<(), CliError> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Precondition("report is not an object".into()))?;
    obj.insert("schema".into(), json!(1));
    obj.insert("version".into(), json!(VERSION));
    obj.insert("command".into(), json!(command));
    obj.insert(
        "config".into(),
        serde_json::to_value(settings).map_err(|e| CliError::Parse(e.to_string()))?,
    );
    Ok(())
}

fn load_path(settings: &Settings) -> Result<RegulatedPath<f64>, CliError> {
    let path = settings.require_path()?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(RegulatedPath::from_json_str(&text)?)
}

pub fn pvar(settings: &Settings) -> Result<(), CliError> {
    let x = load_path(settings)?;
    let p = settings.require_p()?;
    let w = x.p_variation_witness(p)?;
    if settings.format() == Format::Csv {
        let mut buf = String::from("index,t,side\n");
        for pt in &w.points {
            let side = serde_json::to_value(pt.side).map_err(|e| CliError::Parse(e.to_string()))?;
            buf.push_str(&format!("{},{},{}\n", pt.index, pt.t, side.as_str().unwrap_or_default()));
        }
        return emit(settings, buf.as_bytes());
    }
    emit_report(
        settings,
        "pvar",
        &json!({ "p": p, "value": w.value, "p_sum": w.p_sum, "witness": w.points }),
    )
}

#[derive(Serialize)]
struct ChenSummary {
    triples: usize,
    failures: usize,
    max_defect_ratio: f64,
}

#[derive(Serialize)]
struct BoundSummary {
    pairs: usize,
    failures: usize,
    /// Largest `||X^k|| / bound_k`; at most 1 when every bound holds.
    max_ratio: f64,
    rows: Vec<usize>,
}

pub fn lift_check(settings: &Settings) -> Result<(), CliError> {
    let x = load_path(settings)?;
    let p = settings.require_p()?;
    let lift = reduced_lift(&x, p)?;
    let mut rng = stream_rng(settings.seed(), 0, Substream::Fbm, 0);
    let triples = settings.triples.unwrap_or(1000);
    let mut chen = ChenSummary {
        triples,
        failures: 0,
        max_defect_ratio: 0.0,
    };
    for _ in 0..triples {
        let mut v = [0usize; 3];
        for e in v.iter_mut() {
            *e = rng.random_range(0..x.len());
        }
        v.sort_unstable();
        let rep = lift.chen_check(v[0], v[1], v[2])?;
        chen.failures += usize::from(!rep.passed);
        for (d, t) in rep.defects.iter().zip(&rep.tolerances) {
            chen.max_defect_ratio = chen.max_defect_ratio.max(d / t);
        }
    }
    let c = control(&x, p)?;
    let rows: Vec<usize> = if x.len() <= ALL_ROWS_MAX {
        (0..x.len()).collect()
    } else {
        let mut r: Vec<usize> = (0..SAMPLED_ROWS).map(|_| rng.random_range(0..x.len())).collect();
        r.sort_unstable();
        r.dedup();
        r
    };
    let mut bound = BoundSummary {
        pairs: 0,
        failures: 0,
        max_ratio: 0.0,
        rows: rows.clone(),
    };
    for &s in &rows {
        let row = c.row(s)?;
        let slack = 1.0 + 1e-12;
        for (k, &ctrl) in row.iter().enumerate() {
            let v = x.increment(s, s + k)?;
            let norm = v.norm();
            let mut fact = 1.0;
            let mut ok = true;
            for level in 1..=lift.n() {
                fact *= level as f64;
                let b = ctrl.powf(level as f64 / p) / fact;
                let actual = norm.powi(level as i32) / fact;
                if b > 0.0 {
                    bound.max_ratio = bound.max_ratio.max(actual / b);
                }
                ok &= actual <= b * slack;
            }
            bound.pairs += 1;
            bound.failures += usize::from(!ok);
        }
    }
    let passed = chen.failures == 0 && bound.failures == 0;
    emit_report(
        settings,
        "lift-check",
        &json!({ "p": p, "n": lift.n(), "grid_len": x.len(), "chen": chen, "level_bound": bound, "passed": passed }),
    )
}

pub fn integrate(settings: &Settings) -> Result<(), CliError> {
    let x = load_path(settings)?;
    let p = settings.require_p()?;
    let f = parse_function::<f64>(settings.require_function()?, x.dim())?;
    let lift = reduced_lift(&x, p)?;
    let y = controlled_from_function(f.as_ref(), &lift)?;
    let report = rrs_integrate(&y, &lift, settings.tol(), &default_schedule(&x), &IntegrateOptions::default())?;
    emit_report(settings, "integrate", &report)
}

pub fn ito(settings: &Settings) -> Result<(), CliError> {
    let x = load_path(settings)?;
    let p = settings.require_p()?;
    let f = parse_function::<f64>(settings.require_function()?, x.dim())?;
    let report = ito_verify(f.as_ref(), &x, p, settings.tol())?;
    let mut value = serde_json::to_value(&report).map_err(|e| CliError::Parse(e.to_string()))?;
    if settings.proof_terms == Some(true) {
        let terms = proof_term_diagnostics(f.as_ref(), &x, p, &default_schedule(&x))?;
        value["proof_terms"] = serde_json::to_value(terms).map_err(|e| CliError::Parse(e.to_string()))?;
    }
    emit_report(settings, "ito", &value)
}

pub fn logwealth(settings: &Settings) -> Result<(), CliError> {
    let w = load_path(settings)?;
    let p = settings.require_p()?;
    let report = log_wealth(&w, p, settings.tol())?;
    emit_report(settings, "logwealth", &report)
}

fn path_csv(x: &RegulatedPath<f64>) -> String {
    let d = x.dim();
    let mut header = vec!["t".to_string()];
    for side in ["left", "at", "right"] {
        header.extend((0..d).map(|c| format!("{side}_{c}")));
    }
    let mut buf = header.join(",");
    buf.push('\n');
    for i in 0..x.len() {
        let mut row = vec![x.time(i).to_string()];
        for v in [x.left(i), x.at(i), x.right(i)] {
            row.extend(v.iter().map(f64::to_string));
        }
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    buf
}

pub fn simulate(settings: &Settings) -> Result<(), CliError> {
    let cfg = settings.generator.build(settings.seed(), 256);
    let model = settings.model.unwrap_or(SimModel::Fbm);
    let path = match model {
        SimModel::Fbm => gen_fbm(&cfg)?,
        SimModel::CompoundPoisson => gen_compound_poisson(&cfg)?.path,
        SimModel::Mixed => gen_mixed(&cfg)?.path,
        SimModel::Wealth => {
            let strategy = vec![settings.pi.unwrap_or(1.0); cfg.n + 1];
            gen_wealth(&cfg, &strategy, settings.w0.unwrap_or(1.0))?.path
        }
    };
    if settings.format() == Format::Csv {
        return emit(settings, path_csv(&path).as_bytes());
    }
    let mut value: Value = serde_json::from_str(&path.to_json_string()?).map_err(|e| CliError::Parse(e.to_string()))?;
    stamp(&mut value, settings, "simulate")?;
    value["generator"] = serde_json::to_value(&cfg).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut text = serde_json::to_string(&value).map_err(|e| CliError::Parse(e.to_string()))?;
    text.push('\n');
    emit(settings, text.as_bytes())
}

pub fn sweep(settings: &Settings) -> Result<(), CliError> {
    let model = match settings.model.unwrap_or(SimModel::Mixed) {
        SimModel::Fbm => Model::Fbm,
        SimModel::CompoundPoisson => Model::CompoundPoisson,
        SimModel::Mixed => Model::Mixed,
        SimModel::Wealth => return Err(CliError::Precondition("sweep does not support the wealth model".into())),
    };
    let ps = match (&settings.ps, settings.p) {
        (Some(ps), _) => ps.clone(),
        (None, Some(p)) => vec![p],
        (None, None) => return Err(CliError::Precondition("missing --ps".into())),
    };
    let cfg = SweepConfig {
        model,
        generator: settings.generator.build(settings.seed(), 0),
        seeds: settings.seeds.clone().unwrap_or_else(|| vec![settings.seed()]),
        ns: settings.ns.clone().unwrap_or_else(|| vec![256]),
        ps,
        function: settings.require_function()?.to_string(),
        tol: settings.tol(),
        workers: settings.workers.unwrap_or(0),
    };
    let rows = run_sweep(&cfg)?;
    match settings.format() {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(settings, &buf)
        }
        Format::Json => {
            let mut value = json!({ "rows": rows, "sweep": cfg });
            stamp(&mut value, settings, "sweep")?;
            let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Parse(e.to_string()))?;
            text.push('\n');
            emit(settings, text.as_bytes())
        }
    }
}
