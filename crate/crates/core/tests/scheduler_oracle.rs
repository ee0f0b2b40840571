mod support;

use dbr_core::scheduler::{BottleneckSchedule, ScheduleEntry};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracle::{invariant_steps, random_instance, replay};

#[test]
fn incremental_plan_matches_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..1000 {
        let inst = random_instance(&mut rng);
        let out = replay(&inst);
        assert_eq!(out.incremental, out.naive, "instance {k}: {inst:?}");
    }
}

#[test]
fn rescheduling_invariants_on_random_steps() {
    assert_eq!(invariant_steps(10_000, 7), Ok(10_000));
}

fn plan_strategy() -> impl Strategy<Value = (f64, Vec<(f64, f64, f64)>)> {
    // (e0, [(gap before entry, slack of a below s, p)])
    (
        0.0f64..50.0,
        prop::collection::vec((0.0f64..3.0, 0.0f64..4.0, 0.1f64..3.0), 1..20),
    )
}

fn build(e0: f64, rows: &[(f64, f64, f64)]) -> BottleneckSchedule {
    let mut sched = BottleneckSchedule::new();
    sched.set_last_completed_plan_end(Some(e0));
    let mut prev = e0;
    for (i, &(gap, slack, p)) in rows.iter().enumerate() {
        // With C = 1 the earliest start is t + 1: either open a gap or sit below the predecessor.
        let t = if gap > 0.0 { prev + gap - 1.0 } else { prev - slack - 1.0 };
        prev = sched.append(i as u32, p, t, 1.0).unwrap().e;
    }
    sched
}

fn check_plan(sched: &BottleneckSchedule) -> Result<(), TestCaseError> {
    let mut prev = sched.last_completed_plan_end();
    for e in sched.entries() {
        prop_assert!(e.s >= e.a, "s {} < a {}", e.s, e.a);
        if let Some(p) = prev {
            prop_assert!(e.s >= p, "overlap: s {} < previous end {}", e.s, p);
        }
        prop_assert_eq!(e.e, e.s + e.p);
        prev = Some(e.e);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn rescheduling_step_invariants(
        (e0, rows) in plan_strategy(),
        dev in -3.0f64..6.0,
    ) {
        let mut sched = build(e0, &rows);
        check_plan(&sched)?;
        let before: Vec<ScheduleEntry> = sched.entries().iter().copied().collect();
        let head = before[0];
        // Completion can never precede the head's start.
        let actual = (head.e + dev).max(head.s);
        let done = sched.on_bottleneck_completion(actual).unwrap();
        prop_assert_eq!(done.entry, head);
        check_plan(&sched)?;
        prop_assert!(sched.entries().front().is_none_or(|e| e.s >= actual));
        let after: Vec<ScheduleEntry> = sched.entries().iter().copied().collect();
        prop_assert_eq!(after.len(), before.len() - 1);
        for (old, new) in before[1..].iter().zip(&after) {
            prop_assert_eq!(old.order_id, new.order_id);
            prop_assert_eq!(old.a, new.a);
            if done.delta_e < 0.0 {
                prop_assert!(new.s <= old.s);
            } else {
                prop_assert!(new.s >= old.s);
            }
        }
        // Gap absorption: a delay no larger than the gap ahead of the next order changes nothing.
        if before.len() > 1 && done.delta_e >= 0.0 && done.delta_e <= before[1].s - head.e {
            for (old, new) in before[1..].iter().zip(&after) {
                prop_assert_eq!(old.s, new.s);
            }
        }
    }
}
