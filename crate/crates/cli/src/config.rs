//! Run configuration: a TOML file whose every field is optional.
//!
//! ```toml
//! output_dir = "out"
//! verbosity = 1
//!
//! [experiment]
//! environments = ["0.85:0.3", "0.95:0.9"]   # default: all nine
//! c_range = [1, 12]
//! s_range = [1, 24]
//! replications = 20
//! methods = ["FF", "S4"]
//! master_seed = 1
//! seed_scheme = "independent"               # or "common"
//! horizon = 8760.0
//! warmup = 760.0
//! mode = "reproducible"                     # or "parallel"
//!
//! [sbm.tight]                               # extra method named "tight"
//! lb = 0.01
//! ub = 0.1
//!
//! [rates]
//! wip_rate = 0.5
//!
//! [model]
//! due_date_exp_mean = 16.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dbr_core::experiment::ExperimentPlan;
use dbr_core::model::RNG_ALGORITHM;
use dbr_core::{
    CostRates, Environment, ExecutionMode, Method, ModelConstants, SbmSettings, SeedScheme, ShopModel,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<dbr_core::Error> for ConfigError {
    fn from(e: dbr_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

/// `shop_load:cv_ppt`, e.g. `0.9:0.6`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EnvSpec {
    pub shop_load: f64,
    pub cv_ppt: f64,
}

impl FromStr for EnvSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (l, c) = s
            .split_once(':')
            .ok_or_else(|| format!("environment `{s}` is not shop_load:cv"))?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("environment `{s}`: {e}"));
        Ok(EnvSpec { shop_load: num(l)?, cv_ppt: num(c)? })
    }
}

impl TryFrom<String> for EnvSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<EnvSpec> for String {
    fn from(e: EnvSpec) -> String {
        format!("{}:{}", e.shop_load, e.cv_ppt)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Reproducible,
    Parallel,
}

impl From<Mode> for ExecutionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Reproducible => ExecutionMode::Reproducible,
            Mode::Parallel => ExecutionMode::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub environments: Vec<EnvSpec>,
    pub c_range: [u32; 2],
    pub s_range: [u32; 2],
    pub replications: u32,
    pub methods: Vec<String>,
    pub master_seed: u64,
    pub seed_scheme: SeedScheme,
    pub horizon: f64,
    pub warmup: f64,
    pub mode: Mode,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let mut environments = Vec::new();
        for shop_load in [0.85, 0.90, 0.95] {
            for cv_ppt in [0.3, 0.6, 0.9] {
                environments.push(EnvSpec { shop_load, cv_ppt });
            }
        }
        ExperimentSection {
            environments,
            c_range: [1, 12],
            s_range: [1, 24],
            replications: 20,
            methods: ["FF", "S1", "S2", "S3", "S4"].map(String::from).to_vec(),
            master_seed: 1,
            seed_scheme: SeedScheme::default(),
            horizon: 8760.0,
            warmup: 760.0,
            mode: Mode::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// 0 silent, 1 optimum per environment, 2 also progress on stderr.
    pub verbosity: u8,
    pub experiment: ExperimentSection,
    /// Named SBM settings usable in `methods`, besides the presets S1-S4.
    pub sbm: BTreeMap<String, SbmSettings>,
    pub rates: CostRates,
    pub model: ModelConstants,
    /// Echoed for provenance; replaced by the built-in generator on load.
    pub rng_algorithm: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("out"),
            verbosity: 1,
            experiment: ExperimentSection::default(),
            sbm: BTreeMap::new(),
            rates: CostRates::default(),
            model: ModelConstants::default(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?
            }
        };
        cfg.rng_algorithm = RNG_ALGORITHM.to_string();
        Ok(cfg)
    }

    pub fn model(&self) -> Result<ShopModel, ConfigError> {
        Ok(ShopModel::new(self.model.clone(), self.rates)?)
    }

    pub fn environments(&self) -> Result<Vec<Environment>, ConfigError> {
        if self.experiment.environments.is_empty() {
            return Err(ConfigError("no environments selected".into()));
        }
        self.experiment
            .environments
            .iter()
            .map(|e| Environment::new(e.shop_load, e.cv_ppt, &self.model).map_err(ConfigError::from))
            .collect()
    }

    pub fn methods(&self) -> Result<Vec<Method>, ConfigError> {
        if self.experiment.methods.is_empty() {
            return Err(ConfigError("no methods selected".into()));
        }
        let mut out: Vec<Method> = Vec::new();
        for name in &self.experiment.methods {
            let method = match self.sbm.get(name) {
                Some(settings) => {
                    settings.validate()?;
                    Method::Sbm { name: name.clone(), settings: *settings }
                }
                None => name.parse::<Method>()?,
            };
            if out.iter().any(|m| m.name() == method.name()) {
                return Err(ConfigError(format!("method `{name}` listed twice")));
            }
            out.push(method);
        }
        Ok(out)
    }

    /// Plan for one method over every configured environment.
    pub fn plan(&self, method: Method) -> Result<ExperimentPlan, ConfigError> {
        let x = &self.experiment;
        let plan = ExperimentPlan {
            environments: self.environments()?,
            c_range: (x.c_range[0], x.c_range[1]),
            s_range: (x.s_range[0], x.s_range[1]),
            replications: x.replications,
            method,
            master_seed: x.master_seed,
            seed_scheme: x.seed_scheme,
            horizon: x.horizon,
            warmup: x.warmup,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
