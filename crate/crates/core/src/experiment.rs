//! Parameter sweeps over the (CCR-Buffer, Shipping-Buffer) grid, either full
//! factorial or budget managed, plus optimum selection, replication-savings
//! metrics and CSV persistence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Environment, PlanningParameters, Time};
use crate::sbm::{finish_iteration, should_skip, BudgetState, SbmPreset, SbmSettings};
use crate::sim::{ShopModel, SimulationResult};

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    FullFactorial,
    Sbm { name: String, settings: SbmSettings },
}

impl Method {
    pub fn preset(p: SbmPreset) -> Self {
        Method::Sbm {
            name: p.to_string(),
            settings: p.settings(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Method::FullFactorial => "FF",
            Method::Sbm { name, .. } => name,
        }
    }

    pub fn is_full_factorial(&self) -> bool {
        matches!(self, Method::FullFactorial)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FF" | "FULLFACTORIAL" | "NO/SBM" => Ok(Method::FullFactorial),
            other => Ok(Method::preset(other.parse()?)),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecutionMode {
    /// Iterations and replications strictly sequential.
    #[default]
    Reproducible,
    /// Full factorial replications in parallel; budget-managed sweeps parallel
    /// across environments only. Results are identical to reproducible mode.
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub environments: Vec<Environment>,
    /// Inclusive CCR-Buffer range.
    pub c_range: (u32, u32),
    /// Inclusive Shipping-Buffer range.
    pub s_range: (u32, u32),
    pub replications: u32,
    pub method: Method,
    pub master_seed: u64,
    pub seed_scheme: SeedScheme,
    pub horizon: Time,
    pub warmup: Time,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.environments.is_empty() {
            return Err(Error::param("plan has no environments"));
        }
        let (c0, c1) = self.c_range;
        let (s0, s1) = self.s_range;
        if c0 == 0 || s0 == 0 || c0 > c1 || s0 > s1 {
            return Err(Error::param(format!(
                "invalid buffer ranges C {c0}..={c1}, S {s0}..={s1}"
            )));
        }
        if self.replications == 0 {
            return Err(Error::param("replications must be positive"));
        }
        if !(self.horizon > 0.0) || !(self.warmup >= 0.0) || self.warmup > self.horizon {
            return Err(Error::param("need 0 <= warmup <= horizon and horizon > 0"));
        }
        if let Method::Sbm { settings, .. } = &self.method {
            settings.validate()?;
        }
        Ok(())
    }

    pub fn with_method(&self, method: Method) -> Self {
        ExperimentPlan {
            method,
            ..self.clone()
        }
    }

    /// Grid in canonical order: ascending C, then ascending S.
    pub fn grid(&self) -> Vec<PlanningParameters> {
        let (c0, c1) = self.c_range;
        let (s0, s1) = self.s_range;
        (c0..=c1)
            .flat_map(|c| {
                (s0..=s1).map(move |s| PlanningParameters {
                    ccr_buffer: c,
                    shipping_buffer: s,
                })
            })
            .collect()
    }

    pub fn potential_replications(&self) -> u64 {
        self.grid().len() as u64 * self.replications as u64
    }
}

/// Seed of replication `replication` (1-based) of iteration `iteration`
/// (1-based, canonical grid order) in environment `env_index`.
///
/// A SplitMix64 chain over the coordinates; every method sees the same seed
/// for the same coordinate.
pub fn replication_seed(master_seed: u64, env_index: u32, iteration: u32, replication: u32) -> u64 {
    let mut h = splitmix64(master_seed);
    for part in [env_index as u64, iteration as u64, replication as u64] {
        h = splitmix64(h ^ part);
    }
    h
}

/// How replication seeds vary over the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedScheme {
    /// Replication `r` uses the same seed in every iteration of an
    /// environment (common random numbers across parameter combinations).
    Common,
    /// Every (environment, iteration, replication) has its own seed.
    #[default]
    Independent,
}

impl SeedScheme {
    pub fn seed(self, master_seed: u64, env_index: u32, iteration: u32, replication: u32) -> u64 {
        match self {
            SeedScheme::Common => replication_seed(master_seed, env_index, 0, replication),
            SeedScheme::Independent => replication_seed(master_seed, env_index, iteration, replication),
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Position of one replication in the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub env_index: u32,
    pub iteration: u32,
    pub replication: u32,
}

/// Measurements of one replication that the sweep keeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReplicationMetrics {
    pub cost_per_tu: f64,
    pub avg_wip: f64,
    pub avg_fgi: f64,
    pub avg_backorder: f64,
}

impl From<&SimulationResult> for ReplicationMetrics {
    fn from(r: &SimulationResult) -> Self {
        ReplicationMetrics {
            cost_per_tu: r.overall_cost_per_tu,
            avg_wip: r.avg_wip,
            avg_fgi: r.avg_fgi,
            avg_backorder: r.avg_backorder,
        }
    }
}

pub trait ReplicationEvaluator: Sync {
    fn evaluate(
        &self,
        coord: Coordinate,
        env: &Environment,
        params: PlanningParameters,
        seed: u64,
    ) -> Result<ReplicationMetrics>;
}

/// Runs the shop simulation for every replication.
#[derive(Clone, Debug)]
pub struct SimEvaluator {
    pub model: ShopModel,
    pub horizon: Time,
    pub warmup: Time,
}

impl SimEvaluator {
    pub fn for_plan(model: ShopModel, plan: &ExperimentPlan) -> Self {
        SimEvaluator {
            model,
            horizon: plan.horizon,
            warmup: plan.warmup,
        }
    }
}

impl ReplicationEvaluator for SimEvaluator {
    fn evaluate(
        &self,
        _coord: Coordinate,
        env: &Environment,
        params: PlanningParameters,
        seed: u64,
    ) -> Result<ReplicationMetrics> {
        let r = self
            .model
            .run_replication(env, params, seed, self.horizon, self.warmup)?;
        Ok(ReplicationMetrics::from(&r))
    }
}

/// Replays replications already evaluated by a full factorial sweep. Seeds
/// are shared across methods, so a replayed replication is bit-identical to
/// re-simulating it.
#[derive(Clone, Debug, Default)]
pub struct ReplicationCache {
    entries: HashMap<Coordinate, (u64, ReplicationMetrics)>,
}

impl ReplicationCache {
    pub fn from_records(records: &[ReplicationRecord]) -> Self {
        let entries = records
            .iter()
            .map(|r| {
                (
                    Coordinate {
                        env_index: r.env_index,
                        iteration: r.iteration,
                        replication: r.replication_index,
                    },
                    (r.seed, r.metrics()),
                )
            })
            .collect();
        ReplicationCache { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl ReplicationEvaluator for ReplicationCache {
    fn evaluate(
        &self,
        coord: Coordinate,
        _env: &Environment,
        _params: PlanningParameters,
        seed: u64,
    ) -> Result<ReplicationMetrics> {
        match self.entries.get(&coord) {
            Some(&(cached_seed, m)) if cached_seed == seed => Ok(m),
            Some(_) => Err(Error::State(format!("seed mismatch in cache at {coord:?}"))),
            None => Err(Error::State(format!("no cached replication at {coord:?}"))),
        }
    }
}

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationRecord {
    #[serde(skip)]
    pub env_index: u32,
    pub env_shop_load: f64,
    pub env_cv_ppt: f64,
    pub method: String,
    #[serde(rename = "C")]
    pub c: u32,
    #[serde(rename = "S")]
    pub s: u32,
    #[serde(skip)]
    pub iteration: u32,
    pub replication_index: u32,
    pub seed: u64,
    pub cost_per_tu: f64,
    pub avg_wip: f64,
    pub avg_fgi: f64,
    pub avg_backorder: f64,
    /// Replication after which the iteration was skipped; 0 when it ran in full.
    pub skipped_after: u32,
}

impl ReplicationRecord {
    fn metrics(&self) -> ReplicationMetrics {
        ReplicationMetrics {
            cost_per_tu: self.cost_per_tu,
            avg_wip: self.avg_wip,
            avg_fgi: self.avg_fgi,
            avg_backorder: self.avg_backorder,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationResult {
    #[serde(skip)]
    pub env_index: u32,
    pub env_shop_load: f64,
    pub env_cv_ppt: f64,
    pub method: String,
    #[serde(rename = "C")]
    pub c: u32,
    #[serde(rename = "S")]
    pub s: u32,
    pub iteration: u32,
    #[serde(skip)]
    pub costs: Vec<f64>,
    pub mean_cost: f64,
    pub replications_used: u32,
    pub skipped: bool,
}

impl IterationResult {
    pub fn params(&self) -> PlanningParameters {
        PlanningParameters {
            ccr_buffer: self.c,
            shipping_buffer: self.s,
        }
    }
}

/// Sweep of one method over one environment.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentSweep {
    pub env_index: u32,
    pub env: Environment,
    pub method: String,
    pub iterations: Vec<IterationResult>,
    pub replications: Vec<ReplicationRecord>,
    pub total_replications: u64,
}

impl EnvironmentSweep {
    pub fn optimum(&self) -> Result<Optimum> {
        find_optimum(&self.iterations)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub method: String,
    pub environments: Vec<EnvironmentSweep>,
}

impl SweepResult {
    pub fn total_replications(&self) -> u64 {
        self.environments.iter().map(|e| e.total_replications).sum()
    }
}

/// Runs `plan.method` over every environment of the plan.
pub fn run_sweep<E: ReplicationEvaluator>(
    plan: &ExperimentPlan,
    evaluator: &E,
    mode: ExecutionMode,
) -> Result<SweepResult> {
    plan.validate()?;
    let indices: Vec<u32> = (0..plan.environments.len() as u32).collect();
    let environments = match mode {
        ExecutionMode::Reproducible => indices
            .iter()
            .map(|&v| run_environment(plan, v, evaluator, mode))
            .collect::<Result<Vec<_>>>()?,
        ExecutionMode::Parallel => indices
            .par_iter()
            .map(|&v| run_environment(plan, v, evaluator, mode))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SweepResult {
        method: plan.method.name().to_string(),
        environments,
    })
}

/// Runs `plan.method` over the grid of a single environment.
pub fn run_environment<E: ReplicationEvaluator>(
    plan: &ExperimentPlan,
    env_index: u32,
    evaluator: &E,
    mode: ExecutionMode,
) -> Result<EnvironmentSweep> {
    plan.validate()?;
    let env = *plan
        .environments
        .get(env_index as usize)
        .ok_or_else(|| Error::param(format!("no environment with index {env_index}")))?;
    let grid = plan.grid();
    let blocks: Vec<(IterationResult, Vec<ReplicationRecord>)> = match (&plan.method, mode) {
        (Method::FullFactorial, ExecutionMode::Parallel) => grid
            .par_iter()
            .enumerate()
            .map(|(j, &params)| run_iteration(plan, env_index, &env, j as u32 + 1, params, None, evaluator))
            .collect::<Result<Vec<_>>>()?,
        (Method::FullFactorial, ExecutionMode::Reproducible) => grid
            .iter()
            .enumerate()
            .map(|(j, &params)| run_iteration(plan, env_index, &env, j as u32 + 1, params, None, evaluator))
            .collect::<Result<Vec<_>>>()?,
        (Method::Sbm { settings, .. }, _) => {
            let mut state = BudgetState::new(settings);
            let mut out = Vec::with_capacity(grid.len());
            for (j, &params) in grid.iter().enumerate() {
                let block = run_iteration(
                    plan,
                    env_index,
                    &env,
                    j as u32 + 1,
                    params,
                    Some((&mut state, settings)),
                    evaluator,
                )?;
                out.push(block);
            }
            out
        }
    };
    let mut iterations = Vec::with_capacity(blocks.len());
    let mut replications = Vec::with_capacity(blocks.len() * plan.replications as usize);
    for (it, reps) in blocks {
        iterations.push(it);
        replications.extend(reps);
    }
    let total_replications = iterations.iter().map(|i| i.replications_used as u64).sum();
    Ok(EnvironmentSweep {
        env_index,
        env,
        method: plan.method.name().to_string(),
        iterations,
        replications,
        total_replications,
    })
}

fn run_iteration<E: ReplicationEvaluator>(
    plan: &ExperimentPlan,
    env_index: u32,
    env: &Environment,
    iteration: u32,
    params: PlanningParameters,
    mut budget: Option<(&mut BudgetState, &SbmSettings)>,
    evaluator: &E,
) -> Result<(IterationResult, Vec<ReplicationRecord>)> {
    let method = plan.method.name().to_string();
    let mut records = Vec::with_capacity(plan.replications as usize);
    let mut sum = 0.0;
    let mut skipped_after = 0;
    for r in 1..=plan.replications {
        let coord = Coordinate {
            env_index,
            iteration,
            replication: r,
        };
        let seed = plan.seed_scheme.seed(plan.master_seed, env_index, iteration, r);
        let m = evaluator.evaluate(coord, env, params, seed).map_err(|e| {
            Error::State(format!(
                "env {env} C={} S={} replication {r}: {e}",
                params.ccr_buffer, params.shipping_buffer
            ))
        })?;
        sum += m.cost_per_tu;
        records.push(ReplicationRecord {
            env_index,
            env_shop_load: env.shop_load,
            env_cv_ppt: env.cv_ppt,
            method: method.clone(),
            c: params.ccr_buffer,
            s: params.shipping_buffer,
            iteration,
            replication_index: r,
            seed,
            cost_per_tu: m.cost_per_tu,
            avg_wip: m.avg_wip,
            avg_fgi: m.avg_fgi,
            avg_backorder: m.avg_backorder,
            skipped_after: 0,
        });
        if let Some((state, settings)) = budget.as_mut() {
            state.replications_used += 1;
            let running = sum / r as f64;
            if r < plan.replications && should_skip(state, settings, iteration, r, running) {
                skipped_after = r;
                break;
            }
        }
    }
    let used = records.len() as u32;
    let mean_cost = sum / used as f64;
    if let Some((state, settings)) = budget {
        finish_iteration(state, settings, mean_cost);
    }
    if skipped_after > 0 {
        for rec in &mut records {
            rec.skipped_after = skipped_after;
        }
    }
    let result = IterationResult {
        env_index,
        env_shop_load: env.shop_load,
        env_cv_ppt: env.cv_ppt,
        method,
        c: params.ccr_buffer,
        s: params.shipping_buffer,
        iteration,
        costs: records.iter().map(|r| r.cost_per_tu).collect(),
        mean_cost,
        replications_used: used,
        skipped: skipped_after > 0,
    };
    Ok((result, records))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub c: u32,
    pub s: u32,
    pub mean_cost: f64,
}

/// Cheapest fully evaluated iteration; ties go to the smaller (C, S).
pub fn find_optimum(iterations: &[IterationResult]) -> Result<Optimum> {
    iterations
        .iter()
        .filter(|it| !it.skipped)
        .min_by(|a, b| {
            a.mean_cost
                .total_cmp(&b.mean_cost)
                .then((a.c, a.s).cmp(&(b.c, b.s)))
        })
        .map(|it| Optimum {
            c: it.c,
            s: it.s,
            mean_cost: it.mean_cost,
        })
        .ok_or(Error::EmptyResult)
}

/// Relative change in replications against full factorial.
pub fn delta1(ff_total: u64, sbm_total: u64) -> f64 {
    (sbm_total as f64 - ff_total as f64) / ff_total as f64
}

/// Environment key for the savings tables: (shop load, CV PPT).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EnvKey {
    pub shop_load: f64,
    pub cv_ppt: f64,
}

impl From<&Environment> for EnvKey {
    fn from(e: &Environment) -> Self {
        EnvKey {
            shop_load: e.shop_load,
            cv_ppt: e.cv_ppt,
        }
    }
}

fn key_bits(k: &EnvKey) -> (u64, u64) {
    (k.shop_load.to_bits(), k.cv_ppt.to_bits())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SavingsReport {
    pub settings: Vec<String>,
    /// Full factorial replications per environment.
    pub ff: Vec<(EnvKey, u64)>,
    /// (setting, environment, SBM replications, Δ1).
    pub delta1: Vec<(String, EnvKey, u64, f64)>,
    /// Mean Δ1 over the settings, per environment.
    pub delta2: Vec<(EnvKey, f64)>,
    /// Mean Δ1 over the CV levels, per setting and shop load.
    pub delta3: Vec<(String, f64, f64)>,
}

impl SavingsReport {
    pub fn delta1_for(&self, setting: &str, env: EnvKey) -> Option<f64> {
        self.delta1
            .iter()
            .find(|(s, k, _, _)| s == setting && key_bits(k) == key_bits(&env))
            .map(|d| d.3)
    }

    pub fn delta2_for(&self, env: EnvKey) -> Option<f64> {
        self.delta2
            .iter()
            .find(|(k, _)| key_bits(k) == key_bits(&env))
            .map(|d| d.1)
    }

    pub fn delta3_for(&self, setting: &str, shop_load: f64) -> Option<f64> {
        self.delta3
            .iter()
            .find(|(s, l, _)| s == setting && l.to_bits() == shop_load.to_bits())
            .map(|d| d.2)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Builds the Δ1/Δ2/Δ3 tables from replication totals.
///
/// `ff_totals` holds full factorial totals per environment; `sbm_totals`
/// holds (setting, environment, total). Settings keep their first-seen order.
pub fn savings_deltas(ff_totals: &[(EnvKey, u64)], sbm_totals: &[(String, EnvKey, u64)]) -> Result<SavingsReport> {
    let mut settings: Vec<String> = Vec::new();
    let mut d1_rows = Vec::with_capacity(sbm_totals.len());
    for (setting, env, total) in sbm_totals {
        let ff = ff_totals
            .iter()
            .find(|(k, _)| key_bits(k) == key_bits(env))
            .map(|f| f.1)
            .ok_or_else(|| Error::param(format!("no full factorial total for {env:?}")))?;
        if ff == 0 {
            return Err(Error::param("full factorial total must be positive"));
        }
        if !settings.contains(setting) {
            settings.push(setting.clone());
        }
        d1_rows.push((setting.clone(), *env, *total, delta1(ff, *total)));
    }

    let mut by_env: BTreeMap<(u64, u64), (EnvKey, Vec<f64>)> = BTreeMap::new();
    let mut by_setting_load: BTreeMap<(usize, u64), (f64, Vec<f64>)> = BTreeMap::new();
    for (setting, env, _, d) in &d1_rows {
        by_env
            .entry(key_bits(env))
            .or_insert_with(|| (*env, Vec::new()))
            .1
            .push(*d);
        let si = settings.iter().position(|s| s == setting).expect("setting recorded");
        by_setting_load
            .entry((si, env.shop_load.to_bits()))
            .or_insert_with(|| (env.shop_load, Vec::new()))
            .1
            .push(*d);
    }
    let mut delta2: Vec<(EnvKey, f64)> = by_env.into_values().map(|(k, ds)| (k, mean(&ds))).collect();
    delta2.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite keys"));
    let mut delta3: Vec<(String, f64, f64)> = by_setting_load
        .into_iter()
        .map(|((si, _), (load, ds))| (settings[si].clone(), load, mean(&ds)))
        .collect();
    delta3.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| {
        let ia = settings.iter().position(|s| *s == a.0);
        let ib = settings.iter().position(|s| *s == b.0);
        ia.cmp(&ib)
    }));
    let mut ff = ff_totals.to_vec();
    ff.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite keys"));
    Ok(SavingsReport {
        settings,
        ff,
        delta1: d1_rows,
        delta2,
        delta3,
    })
}

fn csv_err(coordinate: &str) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        coordinate: coordinate.to_string(),
        source,
    }
}

fn io_err(coordinate: &str) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        coordinate: coordinate.to_string(),
        source,
    }
}

/// Writes rows with a header, or appends without one when `append` is set
/// and the file already exists.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T], append: bool) -> Result<()> {
    let where_ = path.display().to_string();
    let exists = path.exists();
    let file = std::fs::OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(io_err(&where_))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(!(append && exists))
        .from_writer(file);
    for row in rows {
        w.serialize(row).map_err(csv_err(&where_))?;
    }
    w.flush().map_err(io_err(&where_))?;
    Ok(())
}

/// Table-style savings report: one row per environment with each setting's
/// replications and Δ1 plus Δ2, then one `avg_delta3` row per shop load.
pub fn write_savings_csv(path: &Path, report: &SavingsReport) -> Result<()> {
    let where_ = path.display().to_string();
    let file = File::create(path).map_err(io_err(&where_))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["shop_load".to_string(), "cv_ppt".to_string(), "ff_replications".to_string()];
    for s in &report.settings {
        header.push(format!("{s}_replications"));
        header.push(format!("{s}_delta1"));
    }
    header.push("avg_delta2".to_string());
    w.write_record(&header).map_err(csv_err(&where_))?;

    let mut loads: Vec<f64> = Vec::new();
    for (env, ff) in &report.ff {
        if !loads.iter().any(|l| l.to_bits() == env.shop_load.to_bits()) {
            loads.push(env.shop_load);
        }
        let mut row = vec![env.shop_load.to_string(), env.cv_ppt.to_string(), ff.to_string()];
        for s in &report.settings {
            match report.delta1.iter().find(|(n, k, _, _)| n == s && key_bits(k) == key_bits(env)) {
                Some((_, _, total, d)) => {
                    row.push(total.to_string());
                    row.push(format!("{d:.4}"));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        row.push(report.delta2_for(*env).map(|d| format!("{d:.4}")).unwrap_or_default());
        w.write_record(&row).map_err(csv_err(&where_))?;
    }
    for load in loads {
        let mut row = vec![load.to_string(), "avg_delta3".to_string(), String::new()];
        for s in &report.settings {
            row.push(String::new());
            row.push(report.delta3_for(s, load).map(|d| format!("{d:.4}")).unwrap_or_default());
        }
        row.push(String::new());
        w.write_record(&row).map_err(csv_err(&where_))?;
    }
    w.flush().map_err(io_err(&where_))?;
    Ok(())
}

/// Appends a line to a plain-text progress file.
pub fn append_marker(path: &Path, line: &str) -> Result<()> {
    let where_ = path.display().to_string();
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(&where_))?;
    writeln!(f, "{line}").map_err(io_err(&where_))
}
