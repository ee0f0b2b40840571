use std::fmt;
use std::fs;

use dbr_core::experiment::{
    append_marker, write_rows, write_savings_csv, EnvKey, EnvironmentSweep,
};
use dbr_core::{
    run_environment, savings_deltas, Method, PlanningParameters, ReplicationCache,
    SimEvaluator,
};

use crate::config::{ConfigError, RunConfig};

pub enum Failure {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn runtime(e: impl fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn prepare_dir(cfg: &RunConfig) -> Result<(), Failure> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join("effective_config.toml");
    fs::write(&path, cfg.to_toml()).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn simulate(cfg: &RunConfig, c: u32, s: u32, trace: bool) -> Result<(), Failure> {
    let model = cfg.model()?;
    let params = PlanningParameters::new(c, s).map_err(ConfigError::from)?;
    let env = cfg.environments()?[0];
    let x = &cfg.experiment;
    if !(x.horizon >= 0.0 && x.warmup >= 0.0 && x.warmup <= x.horizon) {
        return Err(ConfigError(format!("need 0 <= warmup <= horizon, got {} and {}", x.warmup, x.horizon)).into());
    }
    let seed = x.master_seed;
    let result = if trace {
        prepare_dir(cfg)?;
        let (result, trace) = model
            .run_replication_traced(&env, params, seed, x.horizon, x.warmup)
            .map_err(runtime)?;
        write_rows(&cfg.output_dir.join("events.csv"), &trace.events, false).map_err(runtime)?;
        write_rows(&cfg.output_dir.join("schedule.csv"), &trace.schedule, false).map_err(runtime)?;
        result
    } else {
        model
            .run_replication(&env, params, seed, x.horizon, x.warmup)
            .map_err(runtime)?
    };
    let rates = &cfg.rates;
    println!("environment {env}  C={c} S={s}  seed {seed}  horizon {}  warmup {}", x.horizon, x.warmup);
    println!("avg_wip             {:.6}", result.avg_wip);
    println!("avg_fgi             {:.6}", result.avg_fgi);
    println!("avg_backorder       {:.6}", result.avg_backorder);
    println!("wip_cost            {:.6}", rates.wip_rate * result.avg_wip);
    println!("fgi_cost            {:.6}", rates.fgi_rate * result.avg_fgi);
    println!("backorder_cost      {:.6}", rates.tardiness_rate * result.avg_backorder);
    println!("overall_cost_per_tu {:.6}", result.overall_cost_per_tu);
    println!(
        "orders              {} arrived, {} completed, {} delivered, {} in system",
        result.orders_arrived, result.orders_completed, result.orders_delivered, result.orders_in_system
    );
    println!("w4_utilization      {:.6}", result.bottleneck_utilization);
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let model = cfg.model()?;
    let mut methods = cfg.methods()?;
    // Full factorial first so the budget-managed runs can replay its replications.
    methods.sort_by_key(|m| !m.is_full_factorial());
    let plans = methods
        .into_iter()
        .map(|m| cfg.plan(m))
        .collect::<Result<Vec<_>, _>>()?;
    prepare_dir(cfg)?;
    let dir = &cfg.output_dir;
    let results = dir.join("results.csv");
    let summary = dir.join("summary.csv");
    let progress = dir.join("progress.txt");
    for stale in [&results, &summary, &progress, &dir.join("savings.csv")] {
        if stale.exists() {
            fs::remove_file(stale).map_err(|e| runtime(format!("cannot remove {}: {e}", stale.display())))?;
        }
    }

    let mode = cfg.experiment.mode.into();
    let sim = SimEvaluator::for_plan(model, &plans[0]);
    let mut cache: Option<ReplicationCache> = None;
    let mut ff_totals = Vec::new();
    let mut sbm_totals = Vec::new();
    for plan in &plans {
        let mut records = Vec::new();
        let mut method_total = 0;
        for v in 0..plan.environments.len() as u32 {
            let env = plan.environments[v as usize];
            let outcome = match (&cache, &plan.method) {
                (Some(c), Method::Sbm { .. }) => run_environment(plan, v, c, mode),
                _ => run_environment(plan, v, &sim, mode),
            };
            let sweep = match outcome {
                Ok(sweep) => sweep,
                Err(e) => {
                    let _ = append_marker(&progress, &format!("interrupted {} {env}: {e}", plan.method));
                    return Err(runtime(e));
                }
            };
            write_rows(&results, &sweep.replications, true).map_err(runtime)?;
            write_rows(&summary, &sweep.iterations, true).map_err(runtime)?;
            append_marker(
                &progress,
                &format!("complete {} {env} {} replications", plan.method, sweep.total_replications),
            )
            .map_err(runtime)?;
            report(cfg, &sweep);
            method_total += sweep.total_replications;
            let key = EnvKey::from(&env);
            match plan.method {
                Method::FullFactorial => ff_totals.push((key, sweep.total_replications)),
                Method::Sbm { ref name, .. } => sbm_totals.push((name.clone(), key, sweep.total_replications)),
            }
            if plan.method.is_full_factorial() {
                records.extend(sweep.replications);
            }
        }
        if cfg.verbosity >= 1 {
            println!("{}: {method_total} replications in total", plan.method);
        }
        if plan.method.is_full_factorial() {
            cache = Some(ReplicationCache::from_records(&records));
        }
    }

    if !ff_totals.is_empty() && !sbm_totals.is_empty() {
        let report = savings_deltas(&ff_totals, &sbm_totals).map_err(runtime)?;
        write_savings_csv(&dir.join("savings.csv"), &report).map_err(runtime)?;
    }
    append_marker(&progress, "done").map_err(runtime)?;
    Ok(())
}

fn report(cfg: &RunConfig, sweep: &EnvironmentSweep) {
    if cfg.verbosity >= 2 {
        eprintln!("finished {} {}", sweep.method, sweep.env);
    }
    if cfg.verbosity == 0 {
        return;
    }
    match sweep.optimum() {
        Ok(o) => println!(
            "{} {}  C*={} S*={} cost {:.4}  replications {}",
            sweep.method, sweep.env, o.c, o.s, o.mean_cost, sweep.total_replications
        ),
        Err(e) => println!("{} {}  {e}  replications {}", sweep.method, sweep.env, sweep.total_replications),
    }
}
