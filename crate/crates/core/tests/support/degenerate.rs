//! Fully deterministic shop worked out by hand.
//!
//! One product (P1), lot size 1, every CV zero, due date = arrival + 6.
//! Unit times are dyadic (W1-W3 0.5, W4 0.75, W5 0.625) so every event time
//! below is exact in binary. At shop load 0.75 customers arrive every 1.0 TU,
//! the first at t = 1, so order i arrives at i + 1 and is due at i + 7.
//!
//! With S + C = 3 the window of order i opens at i + 4, which is the arrival
//! instant of order i + 3; the order is released then and clears W1-W3 at
//! i + 5.5. What happens at W4 depends on the earliest start a = i + 4 + C:
//!
//! * C = 1, S = 2: a = i + 5 < i + 5.5, so W4 starts on material arrival,
//!   [i + 5.5, i + 6.25]; W5 ends i + 6.875; 0.125 in FGI until i + 7.
//! * C = 2, S = 1: a = i + 6, so W4 waits for the plan, [i + 6, i + 6.75];
//!   W5 ends i + 7.375, 0.375 late, shipped at once.
//!
//! Over [0, 14] (no warm-up), clipping the orders still in progress:
//!
//! | C, S | WIP                        | FGI         | backorder   |
//! |------|----------------------------|-------------|-------------|
//! | 1, 2 | 8 x 2.875 + 2 + 1 = 26     | 8 x 0.125   | 0           |
//! | 2, 1 | 7 x 3.375 + 3 + 2 + 1      | 0           | 7 x 0.375   |

#![allow(dead_code)]

use dbr_core::model::{Component, ModelConstants, ProductId};
use dbr_core::sim::{Trace, STATIONS};
use dbr_core::{Environment, PlanningParameters, ShopModel, SimulationResult};

pub fn degenerate_model() -> ShopModel {
    let constants = ModelConstants {
        upstream_mean: 0.5,
        component_w4_means: [0.75, 0.75],
        product_w5_means: [0.625, 0.65, 0.70],
        product_components: [Component::C1, Component::C1, Component::C2],
        product_mix: vec![ProductId::P1],
        lot_sizes: vec![1],
        interarrival_cv: 0.0,
        non_bottleneck_cv: 0.0,
        due_date_fixed: 6.0,
        due_date_exp_mean: 0.0,
        ..ModelConstants::default()
    };
    ShopModel::new(constants, Default::default()).unwrap()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HandOrder {
    pub id: u32,
    pub arrival: f64,
    pub due: f64,
    pub release: f64,
    /// (start, end) at W1..W5, unclipped.
    pub spans: [(f64, f64); 5],
    pub delivery: f64,
}

/// The first ten orders and the [WIP, FGI, backorder] integrals over [0, 14].
pub fn hand_trace(c: u32, s: u32) -> (Vec<HandOrder>, [f64; 3]) {
    let orders = (0..10)
        .map(|i| {
            let i = i as f64;
            let w4 = match (c, s) {
                (1, 2) => (i + 5.5, i + 6.25),
                (2, 1) => (i + 6.0, i + 6.75),
                _ => panic!("no hand trace for C={c} S={s}"),
            };
            let w5 = (w4.1, w4.1 + 0.625);
            HandOrder {
                id: i as u32,
                arrival: i + 1.0,
                due: i + 7.0,
                release: i + 4.0,
                spans: [(i + 4.0, i + 4.5), (i + 4.5, i + 5.0), (i + 5.0, i + 5.5), w4, w5],
                delivery: w5.1.max(i + 7.0),
            }
        })
        .collect();
    let integrals = match (c, s) {
        (1, 2) => [8.0 * 2.875 + 2.0 + 1.0, 8.0 * 0.125, 0.0],
        _ => [7.0 * 3.375 + 3.0 + 2.0 + 1.0, 0.0, 7.0 * 0.375],
    };
    (orders, integrals)
}

pub const HORIZON: f64 = 14.0;

pub fn run(c: u32, s: u32, horizon: f64) -> (SimulationResult, Trace) {
    let model = degenerate_model();
    let env = Environment::new(0.75, 0.0, &model.constants).unwrap();
    let params = PlanningParameters::new(c, s).unwrap();
    model.run_replication_traced(&env, params, 1, horizon, 0.0).unwrap()
}

/// Compares the simulated trace with the hand table, exactly.
pub fn compare_with_hand(c: u32, s: u32) -> Result<(), String> {
    let (expected, integrals) = hand_trace(c, s);
    let (result, trace) = run(c, s, HORIZON);
    // Events after the horizon never happen.
    let seen = |t: f64| (t <= HORIZON).then_some(t);
    let observed = |t: f64| (!t.is_nan()).then_some(t);
    let check = |ok: bool, what: String| if ok { Ok(()) } else { Err(what) };
    for (want, got) in expected.iter().zip(&trace.orders) {
        let id = want.id;
        check(got.arrival == want.arrival, format!("order {id} arrival {}", got.arrival))?;
        check(got.due_date == want.due, format!("order {id} due {}", got.due_date))?;
        check(got.release == Some(want.release), format!("order {id} release {:?}", got.release))?;
        for k in 0..STATIONS {
            let (ws, we) = want.spans[k];
            let (gs, ge) = got.station_spans[k];
            let end = if seen(ws).is_some() { seen(we) } else { None };
            check(
                observed(gs) == seen(ws) && observed(ge) == end,
                format!("order {id} W{}: got {:?}, want ({ws}, {we})", k + 1, (gs, ge)),
            )?;
        }
        check(got.completion == seen(want.spans[4].1), format!("order {id} completion {:?}", got.completion))?;
        check(got.delivery == seen(want.delivery), format!("order {id} delivery {:?}", got.delivery))?;
    }
    check(expected.len() == 10 && trace.orders.len() >= 10, "fewer than ten orders".into())?;
    check(trace.integrals == integrals, format!("integrals {:?}, want {integrals:?}", trace.integrals))?;
    let avg = [result.avg_wip, result.avg_fgi, result.avg_backorder];
    check(
        avg == integrals.map(|x| x / HORIZON),
        format!("averages {avg:?}"),
    )?;
    let [wip, fgi, bo] = integrals.map(|x| x / HORIZON);
    let cost = 0.5 * wip + fgi + 19.0 * bo;
    check(result.overall_cost_per_tu == cost, format!("cost {} want {cost}", result.overall_cost_per_tu))
}
