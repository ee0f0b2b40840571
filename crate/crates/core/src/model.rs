//! Domain types shared by the scheduler, the shop simulation and the
//! experiment runner, plus the stochastic primitives they draw from.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulated time in hours.
pub type Time = f64;

pub type OrderId = u32;

/// Bounds on the per-unit processing means at the last two stations.
pub const DOWNSTREAM_MEAN_RANGE: (f64, f64) = (0.60, 0.75);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProductId {
    P1,
    P2,
    P3,
}

impl ProductId {
    pub const ALL: [ProductId; 3] = [ProductId::P1, ProductId::P2, ProductId::P3];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ProductId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index() + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    C1,
    C2,
}

impl Component {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// A finished product together with its per-unit plan times at W4 and W5.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Product {
    pub id: ProductId,
    pub component: Component,
    pub w4_mean: Time,
    pub w5_mean: Time,
}

impl Product {
    pub fn new(id: ProductId, component: Component, w4_mean: Time, w5_mean: Time) -> Result<Self> {
        let (lo, hi) = DOWNSTREAM_MEAN_RANGE;
        for (name, v) in [("w4_mean", w4_mean), ("w5_mean", w5_mean)] {
            if !(lo..=hi).contains(&v) {
                return Err(Error::param(format!(
                    "{name} of {id} is {v}, outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(Product {
            id,
            component,
            w4_mean,
            w5_mean,
        })
    }
}

/// When a scheduled order's material goes to W1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleaseRule {
    /// At the moment the order is scheduled.
    AtScheduling,
    /// `C` before its current planned bottleneck start, but never before it is scheduled.
    Rope,
}

/// Structural constants of the shop. Defaults reproduce the base model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConstants {
    /// Per-unit mean processing time at W1-W3.
    pub upstream_mean: Time,
    /// Per-unit mean processing time at W4, indexed by component.
    pub component_w4_means: [Time; 2],
    /// Per-unit mean processing time at W5, indexed by product.
    pub product_w5_means: [Time; 3],
    /// Component each product is built from.
    pub product_components: [Component; 3],
    /// Products customers choose from, uniformly.
    pub product_mix: Vec<ProductId>,
    /// Lot sizes customers choose from, uniformly.
    pub lot_sizes: Vec<u32>,
    pub interarrival_cv: f64,
    /// Processing-time CV at every station except W4.
    pub non_bottleneck_cv: f64,
    /// Deterministic part of the customer-required lead time.
    pub due_date_fixed: Time,
    /// Mean of the exponential part of the customer-required lead time; 0 disables it.
    pub due_date_exp_mean: Time,
    pub release_rule: ReleaseRule,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            upstream_mean: 0.65,
            component_w4_means: [0.70, 0.75],
            product_w5_means: [0.60, 0.65, 0.70],
            product_components: [Component::C1, Component::C1, Component::C2],
            product_mix: ProductId::ALL.to_vec(),
            lot_sizes: vec![1, 2],
            interarrival_cv: 0.3,
            non_bottleneck_cv: 0.3,
            due_date_fixed: 6.0,
            due_date_exp_mean: 16.0,
            release_rule: ReleaseRule::AtScheduling,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.upstream_mean > 0.0) {
            return Err(Error::param("upstream_mean must be positive"));
        }
        for id in ProductId::ALL {
            self.product(id)?;
        }
        if self.product_mix.is_empty() {
            return Err(Error::param("product_mix must not be empty"));
        }
        if self.lot_sizes.is_empty() || self.lot_sizes.iter().any(|l| !(1..=2).contains(l)) {
            return Err(Error::param("lot_sizes must be a non-empty subset of {1, 2}"));
        }
        if !(self.interarrival_cv >= 0.0) || !(self.non_bottleneck_cv >= 0.0) {
            return Err(Error::param("coefficients of variation must be non-negative"));
        }
        if !(self.due_date_fixed >= 0.0) || !(self.due_date_exp_mean >= 0.0) {
            return Err(Error::param("due-date parameters must be non-negative"));
        }
        Ok(())
    }

    pub fn product(&self, id: ProductId) -> Result<Product> {
        let component = self.product_components[id.index()];
        Product::new(
            id,
            component,
            self.component_w4_means[component.index()],
            self.product_w5_means[id.index()],
        )
    }

    /// Expected per-unit bottleneck plan time over the product mix.
    pub fn mean_bottleneck_unit_time(&self) -> Time {
        let sum: f64 = self
            .product_mix
            .iter()
            .map(|p| self.component_w4_means[self.product_components[p.index()].index()])
            .sum();
        sum / self.product_mix.len() as f64
    }

    pub fn mean_lot_size(&self) -> f64 {
        self.lot_sizes.iter().map(|&l| l as f64).sum::<f64>() / self.lot_sizes.len() as f64
    }
}

/// One production system environment: planned bottleneck load and bottleneck CV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub shop_load: f64,
    pub cv_ppt: f64,
    pub mean_interarrival: Time,
}

impl Environment {
    pub fn new(shop_load: f64, cv_ppt: f64, constants: &ModelConstants) -> Result<Self> {
        if !(cv_ppt >= 0.0) {
            return Err(Error::param(format!("cv_ppt must be non-negative, got {cv_ppt}")));
        }
        let mean_interarrival = derive_interarrival(
            shop_load,
            constants.mean_bottleneck_unit_time(),
            constants.mean_lot_size(),
        )?;
        Ok(Environment {
            shop_load,
            cv_ppt,
            mean_interarrival,
        })
    }

    /// The nine environments of the full study, load-major.
    pub fn grid(constants: &ModelConstants) -> Result<Vec<Environment>> {
        let mut envs = Vec::with_capacity(9);
        for load in [0.85, 0.90, 0.95] {
            for cv in [0.3, 0.6, 0.9] {
                envs.push(Environment::new(load, cv, constants)?);
            }
        }
        Ok(envs)
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.shop_load, self.cv_ppt)
    }
}

/// CCR-Buffer and Shipping-Buffer, both in whole time units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanningParameters {
    pub ccr_buffer: u32,
    pub shipping_buffer: u32,
}

impl PlanningParameters {
    pub fn new(ccr_buffer: u32, shipping_buffer: u32) -> Result<Self> {
        if ccr_buffer == 0 || shipping_buffer == 0 {
            return Err(Error::param("buffers must be positive integers"));
        }
        Ok(PlanningParameters {
            ccr_buffer,
            shipping_buffer,
        })
    }

    /// Width S + C of the scheduling window.
    pub fn window(&self) -> Time {
        (self.ccr_buffer + self.shipping_buffer) as Time
    }
}

impl FromStr for PlanningParameters {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (c, s) = s
            .split_once(',')
            .ok_or_else(|| Error::param(format!("expected `C,S`, got `{s}`")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|e| Error::param(format!("bad buffer `{v}`: {e}")))
        };
        PlanningParameters::new(parse(c)?, parse(s)?)
    }
}

/// Generator identity, echoed into configs and result files.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), one stream id per substream";

/// Independent random substreams for one replication.
///
/// Every substream is a ChaCha8 generator keyed by the replication seed and
/// selected by its own stream id (0 inter-arrival, 1 product, 2 lot size,
/// 3 due date, 4..=8 stations W1..W5), so draws on one substream never shift
/// another.
#[derive(Clone, Debug)]
pub struct RngStreams {
    pub interarrival: ChaCha8Rng,
    pub product: ChaCha8Rng,
    pub lot_size: ChaCha8Rng,
    pub due_date: ChaCha8Rng,
    pub stations: [ChaCha8Rng; 5],
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        RngStreams {
            interarrival: stream(0),
            product: stream(1),
            lot_size: stream(2),
            due_date: stream(3),
            stations: [stream(4), stream(5), stream(6), stream(7), stream(8)],
        }
    }
}

/// Lognormal distribution parameterized by its own mean and coefficient of variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogNormalSampler {
    mean: f64,
    mu: f64,
    sigma: f64,
}

impl LogNormalSampler {
    pub fn new(mean: f64, cv: f64) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::param(format!("lognormal mean must be positive, got {mean}")));
        }
        if !(cv >= 0.0) || !cv.is_finite() {
            return Err(Error::param(format!("lognormal cv must be non-negative, got {cv}")));
        }
        let var = (1.0 + cv * cv).ln();
        Ok(LogNormalSampler {
            mean,
            mu: mean.ln() - var / 2.0,
            sigma: var.sqrt(),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Expectation implied by (mu, sigma).
    pub fn analytic_mean(&self) -> f64 {
        (self.mu + self.sigma * self.sigma / 2.0).exp()
    }

    /// Coefficient of variation implied by sigma.
    pub fn analytic_cv(&self) -> f64 {
        (self.sigma * self.sigma).exp_m1().sqrt()
    }

    /// Draws one sample. A zero CV returns the mean without consuming randomness.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return self.mean;
        }
        let z: f64 = StandardNormal.sample(rng);
        (self.mu + self.sigma * z).exp()
    }
}

pub fn lognormal_draw<R: Rng + ?Sized>(mean: f64, cv: f64, rng: &mut R) -> Result<f64> {
    Ok(LogNormalSampler::new(mean, cv)?.sample(rng))
}

/// Mean customer inter-arrival time that loads the bottleneck to `shop_load`.
pub fn derive_interarrival(shop_load: f64, mean_bottleneck_time: Time, lot_mean: f64) -> Result<Time> {
    // A load of exactly 1 is accepted as the saturation boundary.
    if !(shop_load > 0.0 && shop_load <= 1.0) {
        return Err(Error::param(format!("shop_load must lie in (0, 1], got {shop_load}")));
    }
    if !(mean_bottleneck_time > 0.0) || !(lot_mean > 0.0) {
        return Err(Error::param("bottleneck time and lot mean must be positive"));
    }
    Ok(lot_mean * mean_bottleneck_time / shop_load)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductionOrder {
    pub id: OrderId,
    pub product: Product,
    pub lot_size: u32,
    pub arrival_time: Time,
    pub due_date: Time,
    /// Lot-size scaled plan time at the bottleneck.
    pub plan_process_time: Time,
    pub released: bool,
    /// Current planned bottleneck start, used for ECD dispatching.
    pub constraint_date: Option<Time>,
    pub completion_time: Option<Time>,
}

impl ProductionOrder {
    pub fn units(&self) -> f64 {
        self.lot_size as f64
    }
}

/// Draws customer orders; one production order per customer order.
#[derive(Clone, Debug)]
pub struct OrderGenerator {
    products: Vec<Product>,
    lot_sizes: Vec<u32>,
    due_fixed: Time,
    due_exp: Option<Exp<f64>>,
}

impl OrderGenerator {
    pub fn new(constants: &ModelConstants) -> Result<Self> {
        constants.validate()?;
        let products = constants
            .product_mix
            .iter()
            .map(|&id| constants.product(id))
            .collect::<Result<Vec<_>>>()?;
        let due_exp = if constants.due_date_exp_mean > 0.0 {
            Some(
                Exp::new(1.0 / constants.due_date_exp_mean)
                    .map_err(|e| Error::param(format!("due-date exponential: {e}")))?,
            )
        } else {
            None
        };
        Ok(OrderGenerator {
            products,
            lot_sizes: constants.lot_sizes.clone(),
            due_fixed: constants.due_date_fixed,
            due_exp,
        })
    }

    pub fn generate(&self, id: OrderId, t: Time, streams: &mut RngStreams) -> ProductionOrder {
        let product = pick(&self.products, &mut streams.product);
        let lot_size = pick(&self.lot_sizes, &mut streams.lot_size);
        let offset = match &self.due_exp {
            Some(exp) => self.due_fixed + exp.sample(&mut streams.due_date),
            None => self.due_fixed,
        };
        ProductionOrder {
            id,
            product,
            lot_size,
            arrival_time: t,
            due_date: t + offset,
            plan_process_time: lot_size as f64 * product.w4_mean,
            released: false,
            constraint_date: None,
            completion_time: None,
        }
    }
}

fn pick<T: Copy, R: Rng>(items: &[T], rng: &mut R) -> T {
    if items.len() == 1 {
        items[0]
    } else {
        items[rng.random_range(0..items.len())]
    }
}
