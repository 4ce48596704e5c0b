use chshlab_core::analysis::quantum_targets;
use chshlab_core::classical::{chsh_deterministic_extreme, pair_key, Extreme, PAIR_OUTCOMES};
use chshlab_core::montecarlo::run_chsh_experiment;
use chshlab_core::numfmt::{fmt17, json_number};
use chshlab_core::quantum::correlators_quantum;
use chshlab_core::{
    correlation_quantum, discrepancy, marginal_match_feasibility, optimize_chsh, Angle,
    DirectionConfig, FeasibilityStatus, Model, OutcomeSign, SettingPair, SignPattern,
};
use serde_json::{Map, Value};

use crate::report::Report;
use crate::CliError;

fn obj(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(
        entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

fn degrees_json(c: &DirectionConfig) -> Value {
    obj(vec![
        ("a", json_number(c.a.degrees())),
        ("a_prime", json_number(c.a_prime.degrees())),
        ("b", json_number(c.b.degrees())),
        ("b_prime", json_number(c.b_prime.degrees())),
    ])
}

fn per_setting(f: impl Fn(SettingPair) -> Value) -> Value {
    Value::Object(
        SettingPair::ALL
            .iter()
            .map(|&s| (s.label().to_string(), f(s)))
            .collect(),
    )
}

pub fn chsh_quantum_report(c: &DirectionConfig) -> Report {
    let e = correlators_quantum(c);
    Report::Tree(obj(vec![
        ("command", Value::from("chsh")),
        ("model", Value::from("quantum")),
        ("config", c.to_json_value()),
        ("config_degrees", degrees_json(c)),
        ("correlators", per_setting(|s| json_number(e.get(s)))),
        ("sign_pattern", Value::from(SignPattern::CHSH.key())),
        ("value", json_number(e.chsh())),
    ]))
}

pub fn chsh_classical_report() -> Report {
    let keys = |qs: Vec<chshlab_core::OutcomeQuadruple>| {
        Value::Array(qs.into_iter().map(|q| Value::from(q.key())).collect())
    };
    let (max, maxers) = chsh_deterministic_extreme(Extreme::Max);
    let (min, minners) = chsh_deterministic_extreme(Extreme::Min);
    Report::Tree(obj(vec![
        ("command", Value::from("chsh")),
        ("model", Value::from("classical-max")),
        ("sign_pattern", Value::from(SignPattern::CHSH.key())),
        ("value", json_number(max)),
        ("maximizers", keys(maxers)),
        ("minimum", json_number(min)),
        ("minimizers", keys(minners)),
    ]))
}

/// Returns the report and whether the targets were feasible.
pub fn certify_report(c: &DirectionConfig) -> Result<(Report, bool), CliError> {
    let targets = quantum_targets(c);
    let result = marginal_match_feasibility(&targets).map_err(CliError::from_core)?;
    let target_json = per_setting(|s| {
        let t = targets[s.index()];
        Value::Object(
            PAIR_OUTCOMES
                .iter()
                .map(|&(x, y)| (pair_key(x, y), json_number(t.prob(x, y))))
                .collect(),
        )
    });
    let feasible = result.status == FeasibilityStatus::Feasible;
    let report = obj(vec![
        ("command", Value::from("certify")),
        ("config", c.to_json_value()),
        ("targets", target_json),
        ("chsh_quantum", json_number(correlators_quantum(c).chsh())),
        ("result", result.to_json_value()),
    ]);
    Ok((Report::Tree(report), feasible))
}

pub fn simulate_report(
    c: &DirectionConfig,
    model: Model,
    trials: u64,
    seed: u64,
) -> Result<Report, CliError> {
    let exp = run_chsh_experiment(c, model, trials, seed).map_err(CliError::from_core)?;
    let settings = Value::Object(
        exp.settings
            .iter()
            .map(|r| {
                let entry = obj(vec![
                    ("seed", Value::from(r.seed)),
                    ("counts", r.counts.to_json_value()["counts"].clone()),
                    ("correlator", r.correlator.to_json_value()),
                ]);
                (r.setting.label().to_string(), entry)
            })
            .collect(),
    );
    Ok(Report::Tree(obj(vec![
        ("command", Value::from("simulate")),
        ("model", Value::from(model.name())),
        ("config", c.to_json_value()),
        ("seed", Value::from(seed)),
        ("n_per_setting", Value::from(trials)),
        ("sign_pattern", Value::from(SignPattern::CHSH.key())),
        ("settings", settings),
        ("chsh", exp.chsh.to_json_value()),
    ])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    A,
    APrime,
    B,
    BPrime,
    /// Moves `a` so that `a - b` takes each grid value.
    ThetaAb,
}

pub struct SweepSpec {
    pub param: SweepParam,
    pub from: Angle,
    pub to: Angle,
    pub steps: usize,
    /// Keep `a' = a` and `b' = b` at every grid point.
    pub track: bool,
}

pub fn sweep_report(base: &DirectionConfig, sweep: &SweepSpec) -> Result<Report, CliError> {
    if sweep.steps < 2 {
        return Err(CliError::Usage(format!(
            "--steps must be at least 2, got {}",
            sweep.steps
        )));
    }
    if !sweep.from.is_finite() || !sweep.to.is_finite() {
        return Err(CliError::Usage("sweep range must be finite".into()));
    }
    let header: Vec<String> = ["angle", "quantum_pp", "cascade_pp", "delta", "correlator"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let (lo, hi) = (sweep.from.radians(), sweep.to.radians());
    let mut rows = Vec::with_capacity(sweep.steps);
    let mut json_rows = Vec::with_capacity(sweep.steps);
    for i in 0..sweep.steps {
        let x = if i + 1 == sweep.steps {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (sweep.steps - 1) as f64
        };
        let x = Angle::from_radians(x);
        let mut c = *base;
        match sweep.param {
            SweepParam::A => c.a = x,
            SweepParam::APrime => c.a_prime = x,
            SweepParam::B => c.b = x,
            SweepParam::BPrime => c.b_prime = x,
            SweepParam::ThetaAb => c.a = c.b + x,
        }
        if sweep.track {
            c.a_prime = c.a;
            c.b_prime = c.b;
        }
        let d = discrepancy(&c, OutcomeSign::Plus, OutcomeSign::Plus);
        let values = [
            x.radians(),
            d.quantum_p,
            d.cascade_p,
            d.delta,
            correlation_quantum(c.a - c.b),
        ];
        rows.push(values.iter().map(|&v| fmt17(v)).collect());
        json_rows.push(Value::Object(
            header
                .iter()
                .zip(values)
                .map(|(k, v)| (k.clone(), json_number(v)))
                .collect(),
        ));
    }
    Ok(Report::Table {
        header,
        rows,
        json: Value::Array(json_rows),
    })
}

pub fn optimize_report(grid_steps: usize, refine_iters: usize) -> Result<Report, CliError> {
    let r = optimize_chsh(grid_steps, refine_iters).map_err(CliError::from_core)?;
    Ok(Report::Tree(obj(vec![
        ("command", Value::from("optimize")),
        ("grid_steps", Value::from(grid_steps)),
        ("refine_iters", Value::from(refine_iters)),
        ("config", r.config.to_json_value()),
        ("config_degrees", degrees_json(&r.config)),
        ("value", json_number(r.value)),
    ])))
}
