//! Forward-scheduled Drum-Buffer-Rope planning of the bottleneck.
//!
//! Orders whose due date minus the combined buffers `S + C` has been reached
//! enter the scheduling window and are released in due-date order. Each
//! released order gets an earliest bottleneck start `a = t + C` and is
//! appended behind the current plan: `s = max(e_prev, a)`, `e = s + p`.
//! After every bottleneck completion the deviation between actual and planned
//! end is pushed through the remaining plan: early completions pull orders
//! forward (never before `a`), late completions push them back, with idle
//! gaps in the plan absorbing the delay first.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{OrderId, PlanningParameters, ProductionOrder, Time};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub order_id: OrderId,
    /// Earliest plan start at the bottleneck.
    pub a: Time,
    /// Plan start.
    pub s: Time,
    /// Plan end, always `s + p`.
    pub e: Time,
    /// Plan processing time.
    pub p: Time,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RevisionKind {
    Append,
    Complete,
    Forward,
    Backward,
}

/// One row of the optional schedule trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleRevision {
    pub event_time: Time,
    pub event_type: RevisionKind,
    pub order_id: OrderId,
    pub a: Time,
    pub s: Time,
    pub e: Time,
}

/// Outcome of popping the head of the plan after it finished at the bottleneck.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Completion {
    pub entry: ScheduleEntry,
    /// Actual minus planned end; negative when early.
    pub delta_e: f64,
}

/// Returns the unreleased orders inside the scheduling window at `t`,
/// sorted by due date and then by id.
pub fn scheduling_window(
    orders: &[ProductionOrder],
    t: Time,
    params: &PlanningParameters,
    released: &HashSet<OrderId>,
) -> Vec<OrderId> {
    let window = params.window();
    let mut due: Vec<(Time, OrderId)> = orders
        .iter()
        .filter(|o| in_window(o.due_date, window, t) && !released.contains(&o.id))
        .map(|o| (o.due_date, o.id))
        .collect();
    due.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    due.into_iter().map(|(_, id)| id).collect()
}

/// Window predicate `d - (S + C) <= t`, shared by every caller so the float
/// evaluation is identical everywhere.
#[inline]
pub fn in_window(due_date: Time, window: Time, t: Time) -> bool {
    due_date - window <= t
}

#[derive(Clone, Debug, Default)]
pub struct BottleneckSchedule {
    entries: VecDeque<ScheduleEntry>,
    last_completed_plan_end: Option<Time>,
    released: HashSet<OrderId>,
    trace: Option<Vec<ScheduleRevision>>,
}

impl BottleneckSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn entries(&self) -> &VecDeque<ScheduleEntry> {
        &self.entries
    }

    pub fn head(&self) -> Option<&ScheduleEntry> {
        self.entries.front()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn released(&self) -> &HashSet<OrderId> {
        &self.released
    }

    pub fn is_released(&self, id: OrderId) -> bool {
        self.released.contains(&id)
    }

    pub fn last_completed_plan_end(&self) -> Option<Time> {
        self.last_completed_plan_end
    }

    pub fn set_last_completed_plan_end(&mut self, e0: Option<Time>) {
        self.last_completed_plan_end = e0;
    }

    pub fn trace(&self) -> Option<&[ScheduleRevision]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Vec<ScheduleRevision> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Releases `order_id` into the plan at time `t` with CCR-Buffer `ccr`.
    pub fn append(&mut self, order_id: OrderId, p: Time, t: Time, ccr: Time) -> Result<ScheduleEntry> {
        if !self.released.insert(order_id) {
            return Err(Error::State(format!("order {order_id} is already scheduled")));
        }
        let a = t + ccr;
        let prev_end = self
            .entries
            .back()
            .map(|e| e.e)
            .or(self.last_completed_plan_end);
        let s = match prev_end {
            Some(e_prev) => e_prev.max(a),
            None => a,
        };
        let entry = ScheduleEntry {
            order_id,
            a,
            s,
            e: s + p,
            p,
        };
        self.entries.push_back(entry);
        if let Some(trace) = self.trace.as_mut() {
            trace.push(revision(t, RevisionKind::Append, &entry));
        }
        Ok(entry)
    }

    /// Cumulative idle gaps `G_i` in front of every entry, measured from the
    /// last completed plan end (or from the first entry's own start when
    /// nothing has completed yet).
    pub fn cumulative_gaps(&self) -> Vec<Time> {
        let mut prev = match (self.last_completed_plan_end, self.entries.front()) {
            (Some(e0), _) => e0,
            (None, Some(first)) => first.s,
            (None, None) => return Vec::new(),
        };
        let mut total = 0.0;
        self.entries
            .iter()
            .map(|entry| {
                total += entry.s - prev;
                prev = entry.e;
                total
            })
            .collect()
    }

    /// Pops the head after it finished at `actual_end` and propagates the
    /// deviation through the remaining plan.
    pub fn on_bottleneck_completion(&mut self, actual_end: Time) -> Result<Completion> {
        let head = self
            .entries
            .pop_front()
            .ok_or_else(|| Error::State("bottleneck completion with an empty schedule".into()))?;
        let delta_e = actual_end - head.e;
        let kind = if delta_e < 0.0 {
            // Early: the bottleneck is free from the actual end onwards.
            self.last_completed_plan_end = Some(actual_end);
            self.reschedule_forward(delta_e)?;
            RevisionKind::Forward
        } else if delta_e > 0.0 {
            // Late: gaps are those of the plan the completed order belonged to.
            self.last_completed_plan_end = Some(head.e);
            self.reschedule_backward(delta_e)?;
            self.last_completed_plan_end = Some(actual_end);
            RevisionKind::Backward
        } else {
            self.last_completed_plan_end = Some(actual_end);
            RevisionKind::Complete
        };
        if let Some(trace) = self.trace.as_mut() {
            trace.push(revision(actual_end, RevisionKind::Complete, &head));
            if kind != RevisionKind::Complete {
                trace.extend(self.entries.iter().map(|e| revision(actual_end, kind, e)));
            }
        }
        Ok(Completion { entry: head, delta_e })
    }

    /// Pulls every entry earlier by `|delta_e|`, but never before its
    /// earliest start nor into its predecessor (or the last completed end).
    pub fn reschedule_forward(&mut self, delta_e: f64) -> Result<()> {
        if !(delta_e < 0.0) {
            return Err(Error::Contract(format!(
                "forward rescheduling needs a negative deviation, got {delta_e}"
            )));
        }
        let mut prev_end = self.last_completed_plan_end;
        for entry in self.entries.iter_mut() {
            let mut s = (entry.s + delta_e).max(entry.a);
            if let Some(floor) = prev_end {
                s = s.max(floor);
            }
            // Never later than the current plan.
            entry.s = s.min(entry.s);
            entry.e = entry.s + entry.p;
            prev_end = Some(entry.e);
        }
        Ok(())
    }

    /// Pushes entries back by `delta_e`, with the cumulative gap in front of
    /// each entry absorbing as much of the delay as it can.
    pub fn reschedule_backward(&mut self, delta_e: f64) -> Result<()> {
        if !(delta_e > 0.0) {
            return Err(Error::Contract(format!(
                "backward rescheduling needs a positive deviation, got {delta_e}"
            )));
        }
        let gaps = self.cumulative_gaps();
        // Exactly, e0 + delta_e bounds the first start and the shift never
        // closes more than the gap; the floor only absorbs rounding.
        let mut floor = self.last_completed_plan_end.map_or(f64::MIN, |e0| e0 + delta_e);
        for (entry, g) in self.entries.iter_mut().zip(gaps) {
            let shift = (delta_e - g).max(0.0);
            entry.s = (entry.s + shift).max(floor);
            entry.e = entry.s + entry.p;
            floor = entry.e;
        }
        Ok(())
    }
}

fn revision(t: Time, kind: RevisionKind, e: &ScheduleEntry) -> ScheduleRevision {
    ScheduleRevision {
        event_time: t,
        event_type: kind,
        order_id: e.order_id,
        a: e.a,
        s: e.s,
        e: e.e,
    }
}
