"""Inject the three fault shapes and diff the traces.

Step-indicated faults divert the control flow onto an alternative path,
event-indicated faults fire an alarm context event, and data-indicated
faults push a sensor reading far outside its normal range. Every injected
trace ends in a single failure event placed a couple of steps after the
error, so there is something to predict.
"""

from efp import default_fault_plan, default_spec, generate, inject_faults
from efp.events import EventKind, Outcome
from efp.synthesis import DATA_FAULT, EVENT_FAULT, STEP_FAULT

spec = default_spec(seed=7)
clean = generate(spec, 10)


def describe(trace, around, radius=3):
    lines = []
    lo = max(0, around - radius)
    for i, event in enumerate(trace.events[lo:around + radius + 1], start=lo):
        marker = " <-- error" if i == trace.error_index else ""
        kind = event.event_type.kind.value
        payload = f" {event.payload}" if event.payload else ""
        lines.append(f"    [{i:02d}] {event.event_type.name:<20} "
                     f"({kind}){payload}{marker}")
    return "\n".join(lines)


for fault_type in (STEP_FAULT, EVENT_FAULT, DATA_FAULT):
    plan = default_fault_plan(spec, rate=1.0, fault_types=(fault_type,))
    [injected] = inject_faults(clean[:1], plan, seed=3)
    print(f"\n=== {fault_type}-indicated fault ===")
    print(f"label: {injected.outcome_label.value}, "
          f"error at event {injected.error_index}, "
          f"{len(injected.events)} events (clean trace had "
          f"{len(clean[0].events)})")
    print(describe(injected, injected.error_index))
    failure_at = next(i for i, e in enumerate(injected.events)
                      if e.event_type.kind is EventKind.FAILURE)
    steps_between = sum(
        1 for e in injected.events[injected.error_index + 1:failure_at]
        if e.is_intrinsic
    )
    print(f"  failure event at [{failure_at:02d}], "
          f"{steps_between} steps after the error")

# realized rate tracks the requested rate
plan = default_fault_plan(spec, rate=0.5)
big = inject_faults(generate(spec, 2000), plan, seed=11)
failed = sum(1 for t in big if t.outcome_label is Outcome.FAIL)
print(f"\nrate 0.5 over 2000 instances -> {failed} failed "
      f"({failed / 2000:.3f} realized)")
