//! Event-driven simulation of the five-station DBR flow shop.
//!
//! Customer orders arrive with lognormal inter-arrival times and wait in an
//! order pool until they enter the scheduling window. Released orders flow
//! W1 -> W5; W1-W4 dispatch by earliest constraint date (the current planned
//! bottleneck start), W5 by earliest due date. W4 only ever works on the head
//! of the bottleneck plan and never before that entry's earliest start.
//! Finished lots wait in FGI until their due date; tardy lots ship at once.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use serde::Serialize;

use crate::cost::{overall_cost, CostRates, LevelIntegrator};
use crate::error::{Error, Result};
use crate::model::{
    Environment, LogNormalSampler, ModelConstants, ReleaseRule, OrderGenerator, OrderId, PlanningParameters,
    ProductId, ProductionOrder, RngStreams, Time,
};
use crate::scheduler::{in_window, BottleneckSchedule, ScheduleRevision};

pub const STATIONS: usize = 5;
pub const BOTTLENECK: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Discipline {
    /// Earliest constraint date.
    Ecd,
    /// Earliest due date.
    Edd,
}

/// A single-server station with its waiting line.
#[derive(Clone, Debug)]
pub struct Workstation {
    pub index: usize,
    pub discipline: Discipline,
    pub queue: Vec<OrderId>,
    pub in_service: Option<OrderId>,
    pub busy_until: Option<Time>,
    samplers: [LogNormalSampler; 3],
    busy_since: Time,
    busy_time: Time,
}

impl Workstation {
    pub fn new(index: usize, constants: &ModelConstants, env: &Environment) -> Result<Self> {
        let cv = if index == BOTTLENECK {
            env.cv_ppt
        } else {
            constants.non_bottleneck_cv
        };
        let mut samplers = [LogNormalSampler::new(1.0, 0.0)?; 3];
        for id in ProductId::ALL {
            samplers[id.index()] = LogNormalSampler::new(unit_mean(constants, index, id), cv)?;
        }
        Ok(Workstation {
            index,
            discipline: if index == STATIONS - 1 {
                Discipline::Edd
            } else {
                Discipline::Ecd
            },
            queue: Vec::new(),
            in_service: None,
            busy_until: None,
            samplers,
            busy_since: 0.0,
            busy_time: 0.0,
        })
    }

    pub fn name(&self) -> &'static str {
        STATION_NAMES[self.index]
    }

    pub fn is_bottleneck(&self) -> bool {
        self.index == BOTTLENECK
    }

    pub fn is_idle(&self) -> bool {
        self.in_service.is_none()
    }

    /// Service time of a whole lot: lot size times one unit-time draw.
    pub fn process_time(&self, order: &ProductionOrder, streams: &mut RngStreams) -> Time {
        let unit = self.samplers[order.product.id.index()].sample(&mut streams.stations[self.index]);
        order.lot_size as f64 * unit
    }
}

const STATION_NAMES: [&str; STATIONS] = ["W1", "W2", "W3", "W4", "W5"];

fn unit_mean(constants: &ModelConstants, station: usize, product: ProductId) -> Time {
    match station {
        0..=2 => constants.upstream_mean,
        BOTTLENECK => {
            constants.component_w4_means[constants.product_components[product.index()].index()]
        }
        _ => constants.product_w5_means[product.index()],
    }
}

/// Picks the next order for an idle station: minimum constraint date on
/// W1-W4, minimum due date on W5, ties by id.
pub fn dispatch(station: &Workstation, orders: &[ProductionOrder]) -> Option<OrderId> {
    let key = |id: OrderId| {
        let o = &orders[id as usize];
        match station.discipline {
            Discipline::Ecd => o.constraint_date.unwrap_or(f64::INFINITY),
            Discipline::Edd => o.due_date,
        }
    };
    station
        .queue
        .iter()
        .copied()
        .min_by(|&x, &y| key(x).total_cmp(&key(y)).then(x.cmp(&y)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Delivery {
    /// Early: the lot waits in FGI for this long.
    Hold { residency: Time },
    /// On time or late: ships at completion, late by `tardiness`.
    Immediate { tardiness: Time },
}

pub fn deliver_or_hold(completion_time: Time, due_date: Time) -> Delivery {
    if completion_time < due_date {
        Delivery::Hold {
            residency: due_date - completion_time,
        }
    } else {
        Delivery::Immediate {
            tardiness: completion_time - due_date,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ProcessingComplete { station: u8, order: OrderId },
    /// W4 re-checks its head once the head's earliest start is reached.
    BottleneckWake,
    /// The next scheduled order may be due for release to W1.
    ReleaseDue,
    CustomerArrival,
    DeliveryDue { order: OrderId },
}

impl EventKind {
    fn priority(&self) -> u8 {
        match self {
            EventKind::ProcessingComplete { .. } => 0,
            EventKind::BottleneckWake => 1,
            EventKind::ReleaseDue => 2,
            EventKind::CustomerArrival => 3,
            EventKind::DeliveryDue { .. } => 4,
        }
    }
}

/// Calendar entry; dequeued by (time, kind priority, sequence number).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationClockEvent {
    pub time: Time,
    pub kind: EventKind,
    pub seq: u64,
}

impl Eq for SimulationClockEvent {}

impl Ord for SimulationClockEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.kind.priority().cmp(&self.kind.priority()))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for SimulationClockEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationResult {
    pub seed: u64,
    pub avg_wip: f64,
    pub avg_fgi: f64,
    pub avg_backorder: f64,
    pub overall_cost_per_tu: f64,
    pub orders_arrived: u64,
    pub orders_completed: u64,
    pub orders_delivered: u64,
    pub orders_in_system: u64,
    /// W4 busy fraction over the whole horizon, warm-up included.
    pub bottleneck_utilization: f64,
    pub events_processed: u64,
}

/// One row of the per-replication event trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventTraceRow {
    pub time: Time,
    pub event: &'static str,
    pub station: &'static str,
    pub order: Option<OrderId>,
}

/// Per-order lifecycle, kept when tracing.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OrderRecord {
    pub id: OrderId,
    pub lot_size: u32,
    pub arrival: Time,
    pub due_date: Time,
    pub scheduled: Option<Time>,
    pub release: Option<Time>,
    pub earliest_bottleneck_start: Option<Time>,
    pub bottleneck_start: Option<Time>,
    pub bottleneck_end: Option<Time>,
    pub completion: Option<Time>,
    pub delivery: Option<Time>,
    /// Start/end per station, W1..W5.
    pub station_spans: Vec<(Time, Time)>,
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub events: Vec<EventTraceRow>,
    pub schedule: Vec<ScheduleRevision>,
    pub orders: Vec<OrderRecord>,
    /// Integrals over the measurement window: WIP, FGI, backorder.
    pub integrals: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Pool,
    /// In the bottleneck plan, material not yet released.
    Scheduled,
    Queued(usize),
    InService(usize),
    Fgi,
    Delivered,
}

/// Everything fixed across replications: model constants and cost rates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShopModel {
    pub constants: ModelConstants,
    pub rates: CostRates,
}

impl ShopModel {
    pub fn new(constants: ModelConstants, rates: CostRates) -> Result<Self> {
        constants.validate()?;
        rates.validate()?;
        Ok(ShopModel { constants, rates })
    }

    pub fn run_replication(
        &self,
        env: &Environment,
        params: PlanningParameters,
        seed: u64,
        horizon: Time,
        warmup: Time,
    ) -> Result<SimulationResult> {
        let mut sim = Simulation::new(self, env, params, seed, horizon, warmup, false)?;
        sim.run()?;
        sim.finish()
    }

    pub fn run_replication_traced(
        &self,
        env: &Environment,
        params: PlanningParameters,
        seed: u64,
        horizon: Time,
        warmup: Time,
    ) -> Result<(SimulationResult, Trace)> {
        let mut sim = Simulation::new(self, env, params, seed, horizon, warmup, true)?;
        sim.run()?;
        let result = sim.finish()?;
        let mut trace = sim.trace.take().unwrap_or_default();
        trace.schedule = sim.schedule.take_trace();
        trace.integrals = [sim.wip.integral(), sim.fgi.integral(), sim.backorder.integral()];
        Ok((result, trace))
    }
}

struct Simulation<'m> {
    model: &'m ShopModel,
    params: PlanningParameters,
    seed: u64,
    horizon: Time,
    now: Time,
    streams: RngStreams,
    generator: OrderGenerator,
    interarrival: LogNormalSampler,
    calendar: BinaryHeap<SimulationClockEvent>,
    next_seq: u64,
    orders: Vec<ProductionOrder>,
    stages: Vec<Stage>,
    backordered: Vec<bool>,
    /// Unreleased orders keyed by (due-date bits, id); due dates are non-negative.
    pool: BTreeSet<(u64, OrderId)>,
    schedule: BottleneckSchedule,
    stations: Vec<Workstation>,
    wake_pending: bool,
    /// Scheduled orders awaiting release, in plan order, with their earliest start.
    awaiting: VecDeque<(OrderId, Time)>,
    release_wake: Option<Time>,
    wip: LevelIntegrator,
    fgi: LevelIntegrator,
    backorder: LevelIntegrator,
    completed: u64,
    delivered: u64,
    events: u64,
    trace: Option<Trace>,
}

impl<'m> Simulation<'m> {
    fn new(
        model: &'m ShopModel,
        env: &Environment,
        params: PlanningParameters,
        seed: u64,
        horizon: Time,
        warmup: Time,
        traced: bool,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::param(format!("horizon must be positive, got {horizon}")));
        }
        if !(warmup >= 0.0) || warmup > horizon {
            return Err(Error::param(format!(
                "warm-up {warmup} must lie in [0, horizon = {horizon}]"
            )));
        }
        let stations = (0..STATIONS)
            .map(|k| Workstation::new(k, &model.constants, env))
            .collect::<Result<Vec<_>>>()?;
        let mut schedule = BottleneckSchedule::new();
        if traced {
            schedule = schedule.with_trace();
        }
        Ok(Simulation {
            model,
            params,
            seed,
            horizon,
            now: 0.0,
            streams: RngStreams::new(seed),
            generator: OrderGenerator::new(&model.constants)?,
            interarrival: LogNormalSampler::new(env.mean_interarrival, model.constants.interarrival_cv)?,
            calendar: BinaryHeap::new(),
            next_seq: 0,
            orders: Vec::new(),
            stages: Vec::new(),
            backordered: Vec::new(),
            pool: BTreeSet::new(),
            schedule,
            stations,
            wake_pending: false,
            awaiting: VecDeque::new(),
            release_wake: None,
            wip: LevelIntegrator::new(warmup),
            fgi: LevelIntegrator::new(warmup),
            backorder: LevelIntegrator::new(warmup),
            completed: 0,
            delivered: 0,
            events: 0,
            trace: traced.then(Trace::default),
        })
    }

    fn push(&mut self, time: Time, kind: EventKind) {
        if time > self.horizon {
            return;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.calendar.push(SimulationClockEvent { time, kind, seq });
    }

    fn log(&mut self, event: &'static str, station: Option<usize>, order: Option<OrderId>) {
        if let Some(trace) = self.trace.as_mut() {
            trace.events.push(EventTraceRow {
                time: self.now,
                event,
                station: station.map_or("", |k| STATION_NAMES[k]),
                order,
            });
        }
    }

    fn record(&mut self, id: OrderId) -> Option<&mut OrderRecord> {
        self.trace.as_mut().map(|t| &mut t.orders[id as usize])
    }

    fn run(&mut self) -> Result<()> {
        let first = self.interarrival.sample(&mut self.streams.interarrival);
        self.push(first, EventKind::CustomerArrival);
        while let Some(ev) = self.calendar.pop() {
            debug_assert!(ev.time >= self.now);
            self.now = ev.time;
            self.events += 1;
            match ev.kind {
                EventKind::CustomerArrival => self.on_arrival()?,
                EventKind::ProcessingComplete { station, order } => {
                    self.on_complete(station as usize, order)?
                }
                EventKind::BottleneckWake => {
                    self.wake_pending = false;
                    self.try_start(BOTTLENECK)?;
                }
                EventKind::ReleaseDue => {
                    self.release_wake = None;
                    self.release_material()?;
                }
                EventKind::DeliveryDue { order } => self.on_due(order)?,
            }
        }
        Ok(())
    }

    fn on_arrival(&mut self) -> Result<()> {
        let t = self.now;
        let id = self.orders.len() as OrderId;
        let order = self.generator.generate(id, t, &mut self.streams);
        let due = order.due_date;
        self.pool.insert((due.to_bits(), id));
        self.orders.push(order);
        self.stages.push(Stage::Pool);
        self.backordered.push(false);
        if let Some(trace) = self.trace.as_mut() {
            trace.orders.push(OrderRecord {
                id,
                lot_size: self.orders[id as usize].lot_size,
                arrival: t,
                due_date: due,
                station_spans: vec![(f64::NAN, f64::NAN); STATIONS],
                ..OrderRecord::default()
            });
        }
        self.log("arrival", None, Some(id));
        self.push(due, EventKind::DeliveryDue { order: id });
        let gap = self.interarrival.sample(&mut self.streams.interarrival);
        self.push(t + gap, EventKind::CustomerArrival);
        self.release_window()
    }

    /// Schedules every pooled order inside the scheduling window, EDD first.
    fn release_window(&mut self) -> Result<()> {
        let t = self.now;
        let window = self.params.window();
        let ccr = self.params.ccr_buffer as Time;
        while let Some(&(bits, id)) = self.pool.first() {
            if !in_window(f64::from_bits(bits), window, t) {
                break;
            }
            self.pool.pop_first();
            let p = self.orders[id as usize].plan_process_time;
            let entry = self.schedule.append(id, p, t, ccr)?;
            let order = &mut self.orders[id as usize];
            order.released = true;
            order.constraint_date = Some(entry.s);
            self.stages[id as usize] = Stage::Scheduled;
            self.awaiting.push_back((id, entry.a));
            if let Some(rec) = self.record(id) {
                rec.scheduled = Some(t);
                rec.earliest_bottleneck_start = Some(entry.a);
            }
            self.log("schedule", None, Some(id));
        }
        self.release_material()
    }

    /// Sends scheduled orders to W1 according to the release rule.
    fn release_material(&mut self) -> Result<()> {
        let t = self.now;
        let ccr = self.params.ccr_buffer as Time;
        while let Some(&(id, a)) = self.awaiting.front() {
            let due_at = match self.model.constants.release_rule {
                ReleaseRule::AtScheduling => t,
                ReleaseRule::Rope => {
                    let s = self.orders[id as usize].constraint_date.expect("scheduled order has a plan");
                    // s == a means no drum backlog: release on scheduling.
                    if s <= a { t } else { s - ccr }
                }
            };
            if due_at > t {
                if self.release_wake.is_none_or(|w| due_at < w) {
                    self.release_wake = Some(due_at);
                    self.push(due_at, EventKind::ReleaseDue);
                }
                break;
            }
            self.awaiting.pop_front();
            let units = self.orders[id as usize].units();
            self.wip.record(t, units)?;
            if let Some(rec) = self.record(id) {
                rec.release = Some(t);
            }
            self.log("release", None, Some(id));
            self.enqueue(0, id)?;
        }
        Ok(())
    }

    fn enqueue(&mut self, k: usize, id: OrderId) -> Result<()> {
        self.stages[id as usize] = Stage::Queued(k);
        self.stations[k].queue.push(id);
        self.try_start(k)
    }

    fn try_start(&mut self, k: usize) -> Result<()> {
        if !self.stations[k].is_idle() {
            return Ok(());
        }
        let next = if k == BOTTLENECK {
            // The drum: only the plan head may run, and not before its earliest start.
            match self.schedule.head() {
                Some(head) if self.stages[head.order_id as usize] == Stage::Queued(k) => {
                    // The plan keeps s >= a, so this also honours the earliest start.
                    let not_before = head.s;
                    if self.now >= not_before {
                        Some(head.order_id)
                    } else {
                        if !self.wake_pending {
                            self.wake_pending = true;
                            self.push(not_before, EventKind::BottleneckWake);
                        }
                        None
                    }
                }
                _ => None,
            }
        } else {
            dispatch(&self.stations[k], &self.orders)
        };
        if let Some(id) = next {
            self.start(k, id);
        }
        Ok(())
    }

    fn start(&mut self, k: usize, id: OrderId) {
        let t = self.now;
        let station = &mut self.stations[k];
        let pos = station.queue.iter().position(|&q| q == id).expect("dispatched order is queued");
        station.queue.swap_remove(pos);
        let service = station.process_time(&self.orders[id as usize], &mut self.streams);
        let station = &mut self.stations[k];
        station.in_service = Some(id);
        station.busy_until = Some(t + service);
        station.busy_since = t;
        self.stages[id as usize] = Stage::InService(k);
        if let Some(rec) = self.record(id) {
            rec.station_spans[k].0 = t;
            if k == BOTTLENECK {
                rec.bottleneck_start = Some(t);
            }
        }
        self.log("start", Some(k), Some(id));
        self.push(
            t + service,
            EventKind::ProcessingComplete {
                station: k as u8,
                order: id,
            },
        );
    }

    fn on_complete(&mut self, k: usize, id: OrderId) -> Result<()> {
        let t = self.now;
        let station = &mut self.stations[k];
        station.in_service = None;
        station.busy_until = None;
        station.busy_time += t - station.busy_since;
        if let Some(rec) = self.record(id) {
            rec.station_spans[k].1 = t;
            if k == BOTTLENECK {
                rec.bottleneck_end = Some(t);
            }
        }
        self.log("complete", Some(k), Some(id));

        if k == BOTTLENECK {
            self.schedule.on_bottleneck_completion(t)?;
            for entry in self.schedule.entries() {
                self.orders[entry.order_id as usize].constraint_date = Some(entry.s);
            }
            self.release_material()?;
        }
        if k + 1 < STATIONS {
            self.enqueue(k + 1, id)?;
        } else {
            self.finish_order(id)?;
        }
        if k == BOTTLENECK {
            self.release_window()?;
        }
        self.try_start(k)
    }

    fn finish_order(&mut self, id: OrderId) -> Result<()> {
        let t = self.now;
        let order = &mut self.orders[id as usize];
        order.completion_time = Some(t);
        let units = order.units();
        let due = order.due_date;
        self.completed += 1;
        self.wip.record(t, -units)?;
        if let Some(rec) = self.record(id) {
            rec.completion = Some(t);
        }
        match deliver_or_hold(t, due) {
            Delivery::Hold { .. } => {
                self.stages[id as usize] = Stage::Fgi;
                self.fgi.record(t, units)?;
                self.log("to_fgi", None, Some(id));
            }
            Delivery::Immediate { .. } => {
                if self.backordered[id as usize] {
                    self.backorder.record(t, -units)?;
                }
                self.deliver(id);
            }
        }
        Ok(())
    }

    fn deliver(&mut self, id: OrderId) {
        self.stages[id as usize] = Stage::Delivered;
        self.delivered += 1;
        let t = self.now;
        if let Some(rec) = self.record(id) {
            rec.delivery = Some(t);
        }
        self.log("deliver", None, Some(id));
    }

    fn on_due(&mut self, id: OrderId) -> Result<()> {
        let t = self.now;
        let units = self.orders[id as usize].units();
        match self.stages[id as usize] {
            Stage::Fgi => {
                self.fgi.record(t, -units)?;
                self.deliver(id);
            }
            Stage::Delivered => {}
            Stage::Pool | Stage::Scheduled | Stage::Queued(_) | Stage::InService(_) => {
                self.backordered[id as usize] = true;
                self.backorder.record(t, units)?;
                self.log("backorder", None, Some(id));
            }
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<SimulationResult> {
        let h = self.horizon;
        self.wip.advance(h)?;
        self.fgi.advance(h)?;
        self.backorder.advance(h)?;
        let w4 = &self.stations[BOTTLENECK];
        let mut busy = w4.busy_time;
        if w4.in_service.is_some() {
            busy += h - w4.busy_since;
        }
        let avg_wip = self.wip.average(h);
        let avg_fgi = self.fgi.average(h);
        let avg_backorder = self.backorder.average(h);
        let arrived = self.orders.len() as u64;
        Ok(SimulationResult {
            seed: self.seed,
            avg_wip,
            avg_fgi,
            avg_backorder,
            overall_cost_per_tu: overall_cost(avg_wip, avg_fgi, avg_backorder, &self.model.rates)?,
            orders_arrived: arrived,
            orders_completed: self.completed,
            orders_delivered: self.delivered,
            orders_in_system: arrived - self.delivered,
            bottleneck_utilization: busy / h,
            events_processed: self.events,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Component;

    fn model() -> ShopModel {
        ShopModel::default()
    }

    fn env(load: f64, cv: f64) -> Environment {
        Environment::new(load, cv, &ModelConstants::default()).unwrap()
    }

    fn order(id: OrderId, constraint: Option<Time>, due: Time) -> ProductionOrder {
        let product = ModelConstants::default().product(ProductId::P1).unwrap();
        ProductionOrder {
            id,
            product,
            lot_size: 1,
            arrival_time: 0.0,
            due_date: due,
            plan_process_time: product.w4_mean,
            released: true,
            constraint_date: constraint,
            completion_time: None,
        }
    }

    #[test]
    fn ecd_dispatch_picks_earliest_constraint_date() {
        let orders = vec![order(0, Some(12.0), 50.0), order(1, Some(9.0), 40.0)];
        let mut w2 = Workstation::new(1, &ModelConstants::default(), &env(0.9, 0.3)).unwrap();
        w2.queue = vec![0, 1];
        assert_eq!(dispatch(&w2, &orders), Some(1));
    }

    #[test]
    fn edd_dispatch_breaks_ties_by_id() {
        let orders = vec![order(0, None, 30.0), order(1, None, 30.0)];
        let mut w5 = Workstation::new(4, &ModelConstants::default(), &env(0.9, 0.3)).unwrap();
        assert_eq!(w5.discipline, Discipline::Edd);
        w5.queue = vec![1, 0];
        assert_eq!(dispatch(&w5, &orders), Some(0));
        w5.queue.clear();
        assert_eq!(dispatch(&w5, &orders), None);
    }

    #[test]
    fn degenerate_process_times() {
        let mut constants = ModelConstants::default();
        constants.non_bottleneck_cv = 0.0;
        let e = env(0.9, 0.0);
        let mut streams = RngStreams::new(1);
        let w1 = Workstation::new(0, &constants, &e).unwrap();
        let mut o = order(0, None, 0.0);
        o.lot_size = 2;
        assert!((w1.process_time(&o, &mut streams) - 1.30).abs() < 1e-12);

        let w4 = Workstation::new(3, &constants, &e).unwrap();
        assert!(w4.is_bottleneck());
        let p3 = constants.product(ProductId::P3).unwrap();
        assert_eq!(p3.component, Component::C2);
        let o = ProductionOrder {
            product: p3,
            ..order(0, None, 0.0)
        };
        assert_eq!(w4.process_time(&o, &mut streams), 0.75);
    }

    #[test]
    fn bottleneck_cv_matches_environment() {
        let w4 = Workstation::new(3, &ModelConstants::default(), &env(0.9, 0.9)).unwrap();
        let o = order(0, None, 0.0);
        let mut streams = RngStreams::new(5);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| w4.process_time(&o, &mut streams)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let cv = var.sqrt() / mean;
        assert!((0.89..=0.91).contains(&cv), "cv {cv}");
    }

    #[test]
    fn delivery_examples() {
        assert_eq!(deliver_or_hold(50.0, 60.0), Delivery::Hold { residency: 10.0 });
        assert_eq!(deliver_or_hold(60.0, 60.0), Delivery::Immediate { tardiness: 0.0 });
        assert_eq!(deliver_or_hold(65.0, 60.0), Delivery::Immediate { tardiness: 5.0 });
    }

    #[test]
    fn event_priority_order() {
        let mut heap = BinaryHeap::new();
        let at = |time, kind, seq| SimulationClockEvent { time, kind, seq };
        heap.push(at(1.0, EventKind::DeliveryDue { order: 0 }, 0));
        heap.push(at(1.0, EventKind::CustomerArrival, 1));
        heap.push(at(1.0, EventKind::ProcessingComplete { station: 0, order: 0 }, 2));
        heap.push(at(0.5, EventKind::DeliveryDue { order: 1 }, 3));
        heap.push(at(1.0, EventKind::CustomerArrival, 4));
        let order: Vec<_> = std::iter::from_fn(|| heap.pop()).map(|e| e.seq).collect();
        assert_eq!(order, vec![3, 2, 1, 4, 0]);
    }

    #[test]
    fn empty_measurement_window() {
        let params = PlanningParameters::new(6, 8).unwrap();
        let r = model().run_replication(&env(0.9, 0.3), params, 3, 200.0, 200.0).unwrap();
        assert_eq!((r.avg_wip, r.avg_fgi, r.avg_backorder), (0.0, 0.0, 0.0));
        assert_eq!(r.overall_cost_per_tu, 0.0);
        assert!(r.orders_arrived > 0);
    }

    #[test]
    fn invalid_horizon() {
        let params = PlanningParameters::new(6, 8).unwrap();
        let e = env(0.9, 0.3);
        assert!(matches!(
            model().run_replication(&e, params, 3, 0.0, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(model().run_replication(&e, params, 3, 10.0, 20.0).is_err());
    }

    #[test]
    fn replication_is_deterministic() {
        let params = PlanningParameters::new(5, 9).unwrap();
        let e = env(0.95, 0.6);
        let a = model().run_replication(&e, params, 77, 1500.0, 150.0).unwrap();
        let b = model().run_replication(&e, params, 77, 1500.0, 150.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.overall_cost_per_tu.to_bits(), b.overall_cost_per_tu.to_bits());
        let c = model().run_replication(&e, params, 78, 1500.0, 150.0).unwrap();
        assert_ne!(a.overall_cost_per_tu, c.overall_cost_per_tu);
    }

    #[test]
    fn traced_run_matches_untraced() {
        let params = PlanningParameters::new(4, 6).unwrap();
        let e = env(0.85, 0.9);
        let plain = model().run_replication(&e, params, 11, 800.0, 100.0).unwrap();
        let (traced, trace) = model().run_replication_traced(&e, params, 11, 800.0, 100.0).unwrap();
        assert_eq!(plain, traced);
        assert_eq!(trace.orders.len() as u64, traced.orders_arrived);
        assert!(!trace.schedule.is_empty());
    }
}
