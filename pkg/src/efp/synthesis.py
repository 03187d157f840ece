"""Synthetic multi-partner collaboration generator and fault injector.

A collaboration spec describes an ordered backbone of tasks distributed
over partners: plain tasks emit one intrinsic event, interactions emit a
consistent pair of events (one per side, same message payload), and
context sources probabilistically attach sensor readings to steps. The
bundled default spec models a six-partner supply chain with 48 tasks, 15
of which are interactions.

Fault injection rewrites a configurable fraction of generated traces with
one of three fault shapes: a diverted step sequence, an inserted alarm
event, or a shifted payload value. Every injected trace ends in a single
failure event placed at least two steps after the error manifests, so
early-warning behavior is measurable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DisconnectedSpec, PlanMismatch, SpecFormatError
from .events import (
    Event,
    EventCatalog,
    EventKind,
    EventTrace,
    EventType,
    FieldKind,
    Outcome,
    Visibility,
)

BASE_TIMESTAMP = 1_609_459_200_000  # 2021-01-01T00:00:00Z
INSTANCE_SPACING_MS = 3_600_000

STEP_FAULT = "step"
EVENT_FAULT = "event"
DATA_FAULT = "data"
FAULT_TYPES = (STEP_FAULT, EVENT_FAULT, DATA_FAULT)


@dataclass(frozen=True)
class Dist:
    """Payload value distribution.

    Kinds: ``uniform:a,b`` and ``normal:mu,sigma`` (numeric), ``choice``
    over string options and ``tag`` (per-instance identifier) for
    categorical fields, and ``minus_uniform:ref,a,b`` for a numeric value
    constrained below an earlier field (value = ref - U(a, b)).
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    options: tuple[str, ...] = ()
    ref: str = ""

    @property
    def field_kind(self) -> FieldKind:
        if self.kind in ("choice", "tag"):
            return FieldKind.CATEGORICAL
        return FieldKind.NUMERIC

    def draw(self, rng, instance_index: int, earlier: dict):
        if self.kind == "uniform":
            return float(rng.uniform(self.a, self.b))
        if self.kind == "normal":
            return float(rng.normal(self.a, self.b))
        if self.kind == "choice":
            return str(self.options[rng.integers(0, len(self.options))])
        if self.kind == "tag":
            return f"{self.ref}-{instance_index:05d}"
        if self.kind == "minus_uniform":
            base = earlier.get(self.ref)
            if base is None:
                raise SpecFormatError(f"field reference {self.ref!r} undefined")
            return float(base) - float(rng.uniform(self.a, self.b))
        raise SpecFormatError(f"unknown distribution kind {self.kind!r}")

    def render(self) -> str:
        if self.kind == "uniform":
            return f"uniform:{self.a:g},{self.b:g}"
        if self.kind == "normal":
            return f"normal:{self.a:g},{self.b:g}"
        if self.kind == "choice":
            return "choice:" + "|".join(self.options)
        if self.kind == "tag":
            return f"tag:{self.ref}"
        return f"minus_uniform:{self.ref},{self.a:g},{self.b:g}"

    @classmethod
    def parse(cls, text: str) -> "Dist":
        kind, _, rest = text.partition(":")
        if kind in ("uniform", "normal"):
            a, b = rest.split(",")
            return cls(kind, float(a), float(b))
        if kind == "choice":
            return cls(kind, options=tuple(rest.split("|")))
        if kind == "tag":
            return cls(kind, ref=rest)
        if kind == "minus_uniform":
            ref, a, b = rest.split(",")
            return cls(kind, float(a), float(b), ref=ref)
        raise SpecFormatError(f"unknown distribution {text!r}")


@dataclass(frozen=True)
class Task:
    """One backbone element: a plain partner task or an interaction."""

    name: str
    partner: str
    counterparty: str | None = None
    visibility: Visibility = Visibility.PRIVATE
    fields: tuple[tuple[str, Dist], ...] = ()

    @property
    def is_interaction(self) -> bool:
        return self.counterparty is not None


@dataclass(frozen=True)
class ContextSource:
    """Sensor-style source firing after the steps it is attached to."""

    name: str
    partner: str
    visibility: Visibility
    field_name: str
    mu: float
    sigma: float
    fire_prob: float
    attach: tuple[str, ...]


@dataclass(frozen=True)
class CollaborationSpec:
    name: str
    partners: tuple[str, ...]
    tasks: tuple[Task, ...]
    context_sources: tuple[ContextSource, ...] = ()
    seed: int = 0

    def __post_init__(self):
        names = [t.name for t in self.tasks]
        if len(names) != len(set(names)):
            raise SpecFormatError("task names must be unique")
        for task in self.tasks:
            if task.partner not in self.partners:
                raise SpecFormatError(f"unknown partner {task.partner!r}")
            if task.is_interaction:
                if task.counterparty not in self.partners:
                    raise SpecFormatError(
                        f"unknown counterparty {task.counterparty!r}"
                    )
                if task.counterparty == task.partner:
                    raise SpecFormatError(
                        f"interaction {task.name!r} must involve two partners"
                    )
        task_names = set(names)
        for source in self.context_sources:
            missing = set(source.attach) - task_names
            if missing:
                raise SpecFormatError(
                    f"context source {source.name!r} attaches to unknown "
                    f"tasks {sorted(missing)}"
                )

    @property
    def interactions(self) -> tuple[Task, ...]:
        return tuple(t for t in self.tasks if t.is_interaction)

    def catalog(self) -> EventCatalog:
        """Catalog of the clean event types (no fault-plan types)."""
        intrinsic = [EventType(EventKind.FAILURE, "failure")]
        for task in self.tasks:
            schema = tuple((f, d.field_kind) for f, d in task.fields)
            intrinsic.append(EventType(EventKind.STEP, task.name, schema))
        context = tuple(
            EventType(
                EventKind.CONTEXT, s.name, ((s.field_name, FieldKind.NUMERIC),)
            )
            for s in self.context_sources
        )
        return EventCatalog(intrinsic=tuple(intrinsic), context=context)

    def ground_truth_edges(self) -> frozenset[tuple[str, str]]:
        """Directly-follows pairs a clean generated trace can exhibit.

        Interactions emit two same-named events, hence the self-pairs.
        """
        edges = set()
        prev = None
        for task in self.tasks:
            if prev is not None:
                edges.add((prev, task.name))
            if task.is_interaction:
                edges.add((task.name, task.name))
            prev = task.name
        return frozenset(edges)


def generate(spec: CollaborationSpec, n_instances: int) -> list[EventTrace]:
    """Simulate ``n_instances`` clean runs of the collaboration.

    Each instance draws from its own seed stream (derived from the spec
    seed and the instance index), so generation is deterministic and
    order-independent. All traces are labeled as orderly ended.
    """
    if not spec.tasks:
        raise DisconnectedSpec("spec has no tasks")
    if n_instances < 1:
        raise ValueError("n_instances must be at least 1")
    catalog = spec.catalog()
    types = {t.name: catalog.lookup(t.name) for t in spec.tasks}
    ctx_types = {s.name: catalog.lookup(s.name) for s in spec.context_sources}
    attachments: dict[str, list[ContextSource]] = {}
    for source in spec.context_sources:
        for step in source.attach:
            attachments.setdefault(step, []).append(source)

    traces = []
    for i in range(n_instances):
        rng = np.random.default_rng([spec.seed, i])
        instance_id = f"case-{i:05d}"
        ts = BASE_TIMESTAMP + i * INSTANCE_SPACING_MS
        fields: dict[str, object] = {}
        events = []

        def emit(event_type, partner, visibility, payload=()):
            nonlocal ts
            ts += int(rng.integers(1_000, 30_000))
            events.append(
                Event(
                    event_type=event_type,
                    timestamp=ts,
                    global_instance_id=instance_id,
                    partner_id=partner,
                    visibility=visibility,
                    payload=tuple(payload),
                )
            )

        for task in spec.tasks:
            if task.is_interaction:
                payload = []
                for fname, dist in task.fields:
                    value = fields.get(fname)
                    if value is None:
                        value = dist.draw(rng, i, fields)
                        fields[fname] = value
                    payload.append(value)
                emit(types[task.name], task.partner, Visibility.INTERACTION, payload)
                emit(
                    types[task.name],
                    task.counterparty,
                    Visibility.INTERACTION,
                    payload,
                )
            else:
                payload = []
                for fname, dist in task.fields:
                    value = dist.draw(rng, i, fields)
                    fields[fname] = value
                    payload.append(value)
                emit(types[task.name], task.partner, task.visibility, payload)
            for source in attachments.get(task.name, ()):
                if rng.random() < source.fire_prob:
                    reading = float(rng.normal(source.mu, source.sigma))
                    emit(
                        ctx_types[source.name],
                        source.partner,
                        source.visibility,
                        (reading,),
                    )
        traces.append(
            EventTrace(instance_id, tuple(events), outcome_label=Outcome.END)
        )
    return traces


# -- fault plans ------------------------------------------------------------


@dataclass(frozen=True)
class StepFaultShape:
    """Divert the successor of one step onto an alternative path."""

    divert_after: str
    alt_path: tuple[str, ...]
    partner: str


@dataclass(frozen=True)
class EventFaultShape:
    """Fire an alarm context event at the error step."""

    error_step: str
    alarm_name: str
    alarm_field: str
    alarm_mu: float
    alarm_sigma: float
    partner: str
    visibility: Visibility
    steps_to_failure: int


@dataclass(frozen=True)
class DataFaultShape:
    """Shift an existing context reading beyond its normal range."""

    target_context: str
    at_step: str
    field_name: str
    mu: float
    sigma: float
    shift_sigmas: float
    partner: str
    visibility: Visibility
    steps_to_failure: int

    @property
    def shifted_value(self) -> float:
        return self.mu + self.shift_sigmas * self.sigma


@dataclass(frozen=True)
class FaultPlan:
    """Injection rate, fault-type mix, and the concrete manifestations."""

    rate: float
    type_weights: tuple[tuple[str, float], ...]
    step_fault: StepFaultShape | None = None
    event_fault: EventFaultShape | None = None
    data_fault: DataFaultShape | None = None

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must lie in [0, 1]")
        total = sum(w for _, w in self.type_weights)
        if abs(total - 1.0) > 1e-9:
            raise ValueError("type weights must sum to 1")
        for fault_type, weight in self.type_weights:
            if weight > 0 and self._shape(fault_type) is None:
                raise ValueError(f"no manifestation for fault type {fault_type!r}")

    def _shape(self, fault_type: str):
        return {
            STEP_FAULT: self.step_fault,
            EVENT_FAULT: self.event_fault,
            DATA_FAULT: self.data_fault,
        }[fault_type]


FAILURE_TYPE = EventType(EventKind.FAILURE, "failure")


def inject_faults(
    traces: list[EventTrace], plan: FaultPlan, seed: int = 0
) -> list[EventTrace]:
    """Independently select traces with probability ``plan.rate`` and apply
    one fault each.

    Selected traces are truncated at the failure point, terminated with a
    single failure event, relabeled as failed, and annotated with the
    index of the first event manifesting the error. Unselected traces are
    returned untouched.
    """
    names = [t for t, _ in plan.type_weights]
    weights = np.array([w for _, w in plan.type_weights])
    out = []
    for i, trace in enumerate(traces):
        rng = np.random.default_rng([seed, i, 0x5EED])
        if plan.rate <= 0.0 or rng.random() >= plan.rate:
            out.append(trace)
            continue
        fault_type = names[rng.choice(len(names), p=weights)]
        out.append(_apply_fault(trace, plan, fault_type, rng))
    return out


def _apply_fault(trace, plan, fault_type, rng) -> EventTrace:
    if fault_type == STEP_FAULT:
        return _apply_step_fault(trace, plan.step_fault, rng)
    if fault_type == EVENT_FAULT:
        return _apply_event_fault(trace, plan.event_fault, rng)
    return _apply_data_fault(trace, plan.data_fault, rng)


def _find_state(trace, state: str) -> int:
    for i, event in enumerate(trace.events):
        if event.is_intrinsic and event.state == state:
            return i
    raise PlanMismatch(f"step {state!r} absent from trace {trace.instance_id!r}")


def _failure_event(trace, after_ts: int, partner: str) -> Event:
    return Event(
        event_type=FAILURE_TYPE,
        timestamp=after_ts + 5_000,
        global_instance_id=trace.instance_id,
        partner_id=partner,
        visibility=Visibility.PUBLIC,
    )


def _finish(trace, events, error_index) -> EventTrace:
    return replace(
        trace,
        events=tuple(events),
        outcome_label=Outcome.FAIL,
        error_index=error_index,
    )


def _apply_step_fault(trace, shape: StepFaultShape, rng) -> EventTrace:
    cut = _find_state(trace, shape.divert_after)
    events = list(trace.events[: cut + 1])
    error_index = len(events)
    ts = events[-1].timestamp
    for name in shape.alt_path:
        ts += int(rng.integers(1_000, 30_000))
        events.append(
            Event(
                event_type=EventType(EventKind.STEP, name),
                timestamp=ts,
                global_instance_id=trace.instance_id,
                partner_id=shape.partner,
                visibility=Visibility.PRIVATE,
            )
        )
    events.append(_failure_event(trace, ts, shape.partner))
    return _finish(trace, events, error_index)


def _keep_until(trace, start: int, intrinsic_count: int) -> list[Event]:
    """Events from ``start`` up to and including the n-th intrinsic event
    after it (context events in between are kept)."""
    kept = []
    remaining = intrinsic_count
    for event in trace.events[start:]:
        if remaining == 0:
            break
        kept.append(event)
        if event.is_intrinsic:
            remaining -= 1
    if remaining > 0:
        raise PlanMismatch(
            f"trace {trace.instance_id!r} too short for the failure point"
        )
    return kept


def _apply_event_fault(trace, shape: EventFaultShape, rng) -> EventTrace:
    at = _find_state(trace, shape.error_step)
    events = list(trace.events[: at + 1])
    alarm_type = EventType(
        EventKind.CONTEXT,
        shape.alarm_name,
        ((shape.alarm_field, FieldKind.NUMERIC),),
    )
    ts = events[-1].timestamp + int(rng.integers(500, 5_000))
    events.append(
        Event(
            event_type=alarm_type,
            timestamp=ts,
            global_instance_id=trace.instance_id,
            partner_id=shape.partner,
            visibility=shape.visibility,
            payload=(float(rng.normal(shape.alarm_mu, shape.alarm_sigma)),),
        )
    )
    error_index = len(events) - 1
    tail = _keep_until(trace, at + 1, shape.steps_to_failure)
    shifted = ts - trace.events[at].timestamp
    for event in tail:
        events.append(replace(event, timestamp=event.timestamp + shifted))
    events.append(_failure_event(trace, events[-1].timestamp, shape.partner))
    return _finish(trace, events, error_index)


def _apply_data_fault(trace, shape: DataFaultShape, rng) -> EventTrace:
    at = _find_state(trace, shape.at_step)
    target = None
    for i in range(at + 1, len(trace.events)):
        event = trace.events[i]
        if event.event_type.name == shape.target_context:
            target = i
            break
        if event.is_intrinsic:
            break  # the reading belongs right after the step
    events = list(trace.events)
    if target is not None:
        events[target] = replace(events[target], payload=(shape.shifted_value,))
    else:
        reading_type = EventType(
            EventKind.CONTEXT,
            shape.target_context,
            ((shape.field_name, FieldKind.NUMERIC),),
        )
        insert_ts = events[at].timestamp + int(rng.integers(500, 2_000))
        events.insert(
            at + 1,
            Event(
                event_type=reading_type,
                timestamp=min(insert_ts, events[at + 1].timestamp)
                if at + 1 < len(events)
                else insert_ts,
                global_instance_id=trace.instance_id,
                partner_id=shape.partner,
                visibility=shape.visibility,
                payload=(shape.shifted_value,),
            ),
        )
        target = at + 1
    error_index = target
    kept = events[: target + 1] + _keep_until(
        replace(trace, events=tuple(events)), target + 1, shape.steps_to_failure
    )
    kept.append(_failure_event(trace, kept[-1].timestamp, shape.partner))
    return _finish(trace, kept, error_index)


# -- bundled specs ------------------------------------------------------------


def minimal_spec(seed: int = 0) -> CollaborationSpec:
    """Two partners, three steps each, one interaction; handy for tests."""
    return CollaborationSpec(
        name="minimal",
        partners=("shop", "courier"),
        tasks=(
            Task("take_order", "shop"),
            Task("pack_parcel", "shop"),
            Task("request_pickup", "shop", counterparty="courier",
                 fields=(("parcel_id", Dist("tag", ref="parcel")),)),
            Task("drive_route", "courier"),
            Task("deliver_parcel", "courier"),
            Task("confirm_receipt", "shop", visibility=Visibility.PUBLIC),
        ),
        seed=seed,
    )


def default_spec(seed: int = 0) -> CollaborationSpec:
    """Six-partner supply-chain collaboration: 48 tasks, 15 interactions.

    The backbone is a fixed global sequence; run-to-run variety comes from
    payload draws and probabilistic context readings. Fault plans divert
    or disturb the first half of the chain so that evaluation points on
    clean traces fall after the decision point.
    """
    pub = Visibility.PUBLIC
    order_id = ("order_id", Dist("tag", ref="ord"))
    tasks = (
        Task("forecast_demand", "bulk_buyer"),
        Task("approve_budget", "bulk_buyer"),
        Task("prepare_order", "bulk_buyer", visibility=pub),
        Task("place_order", "bulk_buyer", counterparty="middleman", fields=(
            order_id,
            ("quantity", Dist("uniform", 10, 100)),
            ("deadline", Dist("uniform", 30, 60)),
        )),
        Task("register_order", "middleman"),
        Task("check_catalog", "middleman", visibility=pub),
        Task("request_quote_a", "middleman", counterparty="supplier_a",
             fields=(order_id,)),
        Task("estimate_costs_a", "supplier_a"),
        Task("submit_quote_a", "supplier_a", counterparty="middleman",
             fields=(("quote_a", Dist("uniform", 100, 500)),)),
        Task("request_quote_b", "middleman", counterparty="supplier_b",
             fields=(order_id,)),
        Task("estimate_costs_b", "supplier_b"),
        Task("submit_quote_b", "supplier_b", counterparty="middleman",
             fields=(("quote_b", Dist("uniform", 100, 500)),)),
        Task("compare_quotes", "middleman"),
        Task("select_supplier", "middleman"),
        Task("forward_order", "middleman", counterparty="manufacturer",
             fields=(order_id, ("quantity", Dist("uniform", 10, 100)))),
        Task("plan_production", "manufacturer"),
        Task("reserve_capacity", "manufacturer"),
        Task("order_materials_a", "manufacturer", counterparty="supplier_a",
             fields=(("batch_a", Dist("choice", options=("steel", "alloy", "composite"))),)),
        Task("pick_materials_a", "supplier_a"),
        Task("pack_materials_a", "supplier_a"),
        Task("ship_materials_a", "supplier_a", counterparty="manufacturer",
             fields=(("batch_a", Dist("choice", options=("steel", "alloy", "composite"))),)),
        Task("order_materials_b", "manufacturer", counterparty="supplier_b",
             fields=(("batch_b", Dist("choice", options=("foam", "resin"))),)),
        Task("pick_materials_b", "supplier_b"),
        Task("pack_materials_b", "supplier_b"),
        Task("ship_materials_b", "supplier_b", counterparty="manufacturer",
             fields=(("batch_b", Dist("choice", options=("foam", "resin"))),)),
        Task("inspect_materials", "manufacturer", visibility=pub),
        Task("calibrate_line", "manufacturer"),
        Task("assemble_product", "manufacturer"),
        Task("test_product", "manufacturer"),
        Task("package_product", "manufacturer", visibility=pub),
        Task("book_transport", "manufacturer", counterparty="carrier", fields=(
            order_id,
            ("weight", Dist("uniform", 200, 2000)),
        )),
        Task("plan_route", "carrier"),
        Task("allocate_truck", "carrier"),
        Task("load_cargo", "carrier", visibility=pub),
        Task("confirm_pickup", "carrier", counterparty="middleman",
             fields=(order_id,)),
        Task("transport_leg_1", "carrier"),
        Task("refuel_truck", "carrier"),
        Task("customs_clearance", "carrier", visibility=pub),
        Task("transport_leg_2", "carrier"),
        Task("announce_delivery", "carrier", counterparty="bulk_buyer", fields=(
            order_id,
            ("delivery_date", Dist("minus_uniform", 1, 10, ref="deadline")),
        )),
        Task("unload_cargo", "carrier", visibility=pub),
        Task("hand_over_goods", "carrier", counterparty="bulk_buyer",
             fields=(order_id,)),
        Task("inspect_goods", "bulk_buyer"),
        Task("stock_goods", "bulk_buyer"),
        Task("send_invoice", "middleman", counterparty="bulk_buyer", fields=(
            order_id,
            ("amount", Dist("uniform", 1000, 9000)),
        )),
        Task("update_ledger", "middleman"),
        Task("settle_invoice", "bulk_buyer", visibility=pub),
        Task("close_order", "bulk_buyer"),
    )
    sources = (
        ContextSource("temperature", "carrier", pub, "reading",
                      mu=18.0, sigma=2.5, fire_prob=0.7,
                      attach=("transport_leg_1", "transport_leg_2")),
        ContextSource("traffic_delay", "carrier", pub, "minutes",
                      mu=10.0, sigma=3.0, fire_prob=0.5,
                      attach=("plan_route",)),
        ContextSource("machine_load", "manufacturer", Visibility.PRIVATE, "load",
                      mu=0.6, sigma=0.1, fire_prob=0.5,
                      attach=("assemble_product", "test_product")),
        ContextSource("warehouse_humidity", "supplier_a", Visibility.PRIVATE,
                      "humidity", mu=45.0, sigma=5.0, fire_prob=0.5,
                      attach=("pack_materials_a",)),
    )
    return CollaborationSpec(
        name="supply_chain",
        partners=("bulk_buyer", "middleman", "supplier_a", "supplier_b",
                  "manufacturer", "carrier"),
        tasks=tasks,
        context_sources=sources,
        seed=seed,
    )


def default_fault_plan(
    spec: CollaborationSpec,
    rate: float,
    fault_types: tuple[str, ...] = FAULT_TYPES,
) -> FaultPlan:
    """Equal-weight plan over the requested fault types with manifestations
    matched to the bundled specs."""
    if spec.name == "minimal":
        step = StepFaultShape(
            divert_after="pack_parcel",
            alt_path=("repack_parcel", "relabel_parcel"),
            partner="shop",
        )
        event = EventFaultShape(
            error_step="drive_route", alarm_name="breakdown_alarm",
            alarm_field="severity", alarm_mu=5.0, alarm_sigma=1.0,
            partner="courier", visibility=Visibility.PUBLIC,
            steps_to_failure=1,
        )
        data = None
        if DATA_FAULT in fault_types:
            raise ValueError("minimal spec has no context source for data faults")
    else:
        temperature = next(
            s for s in spec.context_sources if s.name == "temperature"
        )
        step = StepFaultShape(
            divert_after="select_supplier",
            alt_path=("escalate_order", "manual_sourcing", "emergency_purchase"),
            partner="middleman",
        )
        event = EventFaultShape(
            error_step="load_cargo", alarm_name="temperature_alarm",
            alarm_field="excess", alarm_mu=8.0, alarm_sigma=1.0,
            partner="carrier", visibility=Visibility.PUBLIC,
            steps_to_failure=2,
        )
        data = DataFaultShape(
            target_context="temperature", at_step="transport_leg_1",
            field_name=temperature.field_name, mu=temperature.mu,
            sigma=temperature.sigma, shift_sigmas=6.0,
            partner="carrier", visibility=temperature.visibility,
            steps_to_failure=2,
        )
    weight = 1.0 / len(fault_types)
    return FaultPlan(
        rate=rate,
        type_weights=tuple((t, weight) for t in fault_types),
        step_fault=step,
        event_fault=event,
        data_fault=data,
    )


# -- spec file format ----------------------------------------------------------


def write_spec(spec: CollaborationSpec) -> str:
    """Render a spec in the line-oriented text format (round-trips with
    :func:`read_spec`)."""
    lines = [f"name {spec.name}", f"seed {spec.seed}"]
    for partner in spec.partners:
        lines.append(f"partner {partner}")
    for task in spec.tasks:
        fields = " ".join(f"{f}={d.render()}" for f, d in task.fields)
        if task.is_interaction:
            head = f"interaction {task.name} {task.partner} {task.counterparty}"
        else:
            head = f"task {task.name} {task.partner} {task.visibility.value}"
        lines.append(f"{head} {fields}".rstrip())
    for s in spec.context_sources:
        lines.append(
            f"context {s.name} {s.partner} {s.visibility.value} "
            f"{s.field_name}=normal:{s.mu:g},{s.sigma:g} fire={s.fire_prob:g} "
            f"attach={','.join(s.attach)}"
        )
    return "\n".join(lines) + "\n"


def read_spec(text: str) -> CollaborationSpec:
    name = "unnamed"
    seed = 0
    partners: list[str] = []
    tasks: list[Task] = []
    sources: list[ContextSource] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "name":
                name = parts[1]
            elif kind == "seed":
                seed = int(parts[1])
            elif kind == "partner":
                partners.append(parts[1])
            elif kind == "task":
                fields = tuple(_parse_field(p) for p in parts[4:])
                tasks.append(Task(parts[1], parts[2],
                                  visibility=Visibility(parts[3]),
                                  fields=fields))
            elif kind == "interaction":
                fields = tuple(_parse_field(p) for p in parts[4:])
                tasks.append(Task(parts[1], parts[2], counterparty=parts[3],
                                  fields=fields))
            elif kind == "context":
                fname, dist = _parse_field(parts[4])
                if dist.kind != "normal":
                    raise SpecFormatError("context sources use normal:mu,sigma")
                opts = dict(p.split("=", 1) for p in parts[5:])
                sources.append(ContextSource(
                    parts[1], parts[2], Visibility(parts[3]), fname,
                    mu=dist.a, sigma=dist.b,
                    fire_prob=float(opts.get("fire", "1")),
                    attach=tuple(opts["attach"].split(",")),
                ))
            else:
                raise SpecFormatError(f"unknown directive {kind!r}")
        except (IndexError, ValueError, KeyError) as exc:
            raise SpecFormatError(f"spec line {lineno}: {raw!r} ({exc})") from exc
    return CollaborationSpec(
        name=name,
        partners=tuple(partners),
        tasks=tuple(tasks),
        context_sources=tuple(sources),
        seed=seed,
    )


def _parse_field(text: str) -> tuple[str, Dist]:
    fname, _, dist = text.partition("=")
    if not dist:
        raise SpecFormatError(f"field {text!r} lacks a distribution")
    return fname, Dist.parse(dist)
