//! From-scratch bottleneck plan used to cross-check the incremental scheduler.
//!
//! Every quantity is recomputed from its definition on each event: the
//! predecessor end by scanning the whole plan, each cumulative gap by summing
//! all gaps up to that entry.

#![allow(dead_code)]

use dbr_core::model::{OrderId, Time};
use dbr_core::scheduler::BottleneckSchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub id: OrderId,
    pub a: Time,
    pub s: Time,
    pub e: Time,
    pub p: Time,
}

#[derive(Clone, Debug, Default)]
pub struct NaivePlan {
    pub rows: Vec<Row>,
    pub e0: Option<Time>,
}

impl NaivePlan {
    pub fn append(&mut self, id: OrderId, p: Time, t: Time, c: Time) {
        let a = t + c;
        let prev = if self.rows.is_empty() { self.e0 } else { Some(self.rows[self.rows.len() - 1].e) };
        let s = match prev {
            None => a,
            Some(e) if e > a => e,
            Some(_) => a,
        };
        self.rows.push(Row { id, a, s, e: s + p, p });
    }

    fn gap_sum(&self, upto: usize, start: Time) -> Time {
        let mut g = 0.0;
        for k in 0..=upto {
            let before = if k == 0 { start } else { self.rows[k - 1].e };
            g += self.rows[k].s - before;
        }
        g
    }

    pub fn complete(&mut self, actual_end: Time) -> Row {
        let head = self.rows.remove(0);
        let de = actual_end - head.e;
        if de > 0.0 {
            let gaps: Vec<Time> = (0..self.rows.len()).map(|i| self.gap_sum(i, head.e)).collect();
            let mut before = head.e + de;
            for (row, g) in self.rows.iter_mut().zip(gaps) {
                let shift = if de > g { de - g } else { 0.0 };
                row.s = if row.s + shift < before { before } else { row.s + shift };
                row.e = row.s + row.p;
                before = row.e;
            }
        } else if de < 0.0 {
            for i in 0..self.rows.len() {
                let before = if i == 0 { actual_end } else { self.rows[i - 1].e };
                let row = self.rows[i];
                let candidate = [row.s + de, row.a, before].into_iter().fold(f64::MIN, f64::max);
                let s = if candidate < row.s { candidate } else { row.s };
                self.rows[i].s = s;
                self.rows[i].e = s + row.p;
            }
        }
        self.e0 = Some(actual_end);
        head
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    /// (due date, plan processing time) per order.
    pub orders: Vec<(Time, Time)>,
    pub ccr: Time,
    pub window: Time,
    pub seed: u64,
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(1..=20);
    let orders = (0..n)
        .map(|_| (rng.random_range(0.0..40.0), rng.random_range(0.3..2.5)))
        .collect();
    let ccr = rng.random_range(1..=8) as Time;
    Instance {
        orders,
        ccr,
        window: ccr + rng.random_range(1..=16) as Time,
        seed: rng.random(),
    }
}

/// Final (s, e) per order from both implementations, in completion order.
pub struct Outcome {
    pub incremental: Vec<(OrderId, Time, Time)>,
    pub naive: Vec<(OrderId, Time, Time)>,
    pub events: usize,
}

/// Drives both plans through the same randomized sequence of window checks
/// and bottleneck completions (deviations in both directions, including
/// exact hits) and records the plan of every order as it completes.
pub fn replay(inst: &Instance) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
    let mut fast = BottleneckSchedule::new();
    let mut slow = NaivePlan::default();
    let mut released = vec![false; inst.orders.len()];
    let mut out = Outcome { incremental: Vec::new(), naive: Vec::new(), events: 0 };
    let mut t: Time = 0.0;
    while out.incremental.len() < inst.orders.len() {
        out.events += 1;
        // Window check: EDD over the unreleased orders whose window has opened.
        let mut due: Vec<(Time, OrderId)> = inst
            .orders
            .iter()
            .enumerate()
            .filter(|(i, (d, _))| !released[*i] && d - inst.window <= t)
            .map(|(i, (d, _))| (*d, i as OrderId))
            .collect();
        due.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (_, id) in due {
            released[id as usize] = true;
            let p = inst.orders[id as usize].1;
            fast.append(id, p, t, inst.ccr).expect("fresh order");
            slow.append(id, p, t, inst.ccr);
        }

        if fast.is_empty() || rng.random_bool(0.3) {
            t += rng.random_range(0.0..3.0);
            continue;
        }
        let head = *fast.head().unwrap();
        let actual = match rng.random_range(0..4) {
            0 => head.e,
            1 => head.e + rng.random_range(0.0..4.0),
            _ => head.e - rng.random_range(0.0..head.p),
        };
        let actual = actual.max(t);
        t = actual;
        let done = fast.on_bottleneck_completion(actual).expect("non-empty plan");
        let row = slow.complete(actual);
        out.incremental.push((done.entry.order_id, done.entry.s, done.entry.e));
        out.naive.push((row.id, row.s, row.e));
    }
    out
}

/// Random single rescheduling steps on random consistent plans, checking
/// non-overlap, s >= a, direction of every shift and gap absorption.
/// Returns the number of steps or the first violation.
pub fn invariant_steps(steps: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; 3];
    for step in 0..steps {
        let mut plan = BottleneckSchedule::new();
        let e0: Time = rng.random_range(0.0..50.0);
        plan.set_last_completed_plan_end(Some(e0));
        let mut prev = e0;
        for id in 0..rng.random_range(1..=20u32) {
            let p = rng.random_range(0.1..3.0);
            // C = 1: open a gap, or make the predecessor bind.
            let t = if rng.random_bool(0.3) {
                prev + rng.random_range(0.0..3.0) - 1.0
            } else {
                prev - rng.random_range(0.0..4.0) - 1.0
            };
            prev = plan.append(id, p, t, 1.0).map_err(|e| e.to_string())?.e;
        }
        let before: Vec<_> = plan.entries().iter().copied().collect();
        let head = before[0];
        let actual = match rng.random_range(0..3) {
            0 => head.e,
            1 => head.e + rng.random_range(0.0..6.0),
            _ => (head.e - rng.random_range(0.0..3.0)).max(head.s),
        };
        let done = plan.on_bottleneck_completion(actual).map_err(|e| e.to_string())?;
        counts[match done.delta_e.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Less) => 0,
            Some(std::cmp::Ordering::Equal) => 1,
            _ => 2,
        }] += 1;
        let after: Vec<_> = plan.entries().iter().copied().collect();
        let fail = |what: &str| Err(format!("step {step}: {what}; before {before:?} after {after:?}"));
        let mut prev_end = actual;
        for (old, new) in before[1..].iter().zip(&after) {
            if new.s < new.a {
                return fail("start before earliest start");
            }
            if new.s < prev_end {
                return fail("overlap");
            }
            if new.e != new.s + new.p || new.a != old.a || new.order_id != old.order_id {
                return fail("entry corrupted");
            }
            if done.delta_e < 0.0 && new.s > old.s {
                return fail("forward reschedule moved an order later");
            }
            if done.delta_e > 0.0 && new.s < old.s {
                return fail("backward reschedule moved an order earlier");
            }
            prev_end = new.e;
        }
        if before.len() > 1 && done.delta_e >= 0.0 && done.delta_e <= before[1].s - head.e
            && before[1..].iter().zip(&after).any(|(o, n)| o.s != n.s) {
                return fail("delay within the first gap changed the plan");
            }
    }
    if counts.contains(&0) {
        return Err(format!("degenerate step mix {counts:?}"));
    }
    Ok(steps)
}
