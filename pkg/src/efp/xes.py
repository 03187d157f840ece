"""XES-subset reading and writing, plus the catalog file format.

The supported subset is deliberately small so that the round trip
``read_xes(write_xes(traces))`` is the identity: per event we emit
``concept:name``, ``lifecycle:transition``, ``time:timestamp``,
``org:resource``, ``efp:instance``, ``efp:visibility`` and ``efp:kind``;
per trace ``concept:name``, ``efp:outcome`` and ``efp:error-index``.
Any other event attribute is treated as a payload field. Output is
deterministic: UTF-8, fixed attribute order, ISO-8601 millisecond
timestamps in UTC.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import datetime, timezone
from xml.etree import ElementTree
from xml.sax.saxutils import quoteattr

from .errors import ParseError, SchemaError
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

_RESERVED_EVENT_KEYS = {
    "concept:name",
    "lifecycle:transition",
    "time:timestamp",
    "org:resource",
    "efp:instance",
    "efp:visibility",
    "efp:kind",
}


@dataclass(frozen=True)
class ParsedLog:
    """Result of reading an XES stream.

    ``catalog`` is the supplied catalog or, when none was given, the one
    inferred from the log. ``empty_dropped`` counts traces discarded for
    containing zero events.
    """

    traces: tuple[EventTrace, ...]
    catalog: EventCatalog
    empty_dropped: int = 0

    def __iter__(self):
        return iter(self.traces)

    def __len__(self):
        return len(self.traces)


def _format_ts(ms: int) -> str:
    dt = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    return dt.isoformat(timespec="milliseconds")


def _parse_ts(text: str) -> int:
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ParseError(f"bad timestamp {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return round(dt.timestamp() * 1000)


def write_xes(traces: list[EventTrace]) -> bytes:
    """Serialize traces to the canonical XES subset.

    Output bytes are a pure function of the input: traces in given order,
    attributes in fixed order, payload fields in schema order.
    """
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write('<log xes.version="1.0">\n')
    for trace in traces:
        out.write("  <trace>\n")
        _attr(out, 4, "string", "concept:name", trace.instance_id)
        if trace.outcome_label is not None:
            _attr(out, 4, "string", "efp:outcome", trace.outcome_label.value)
        if trace.error_index is not None:
            _attr(out, 4, "int", "efp:error-index", str(trace.error_index))
        for event in trace.events:
            et = event.event_type
            out.write("    <event>\n")
            _attr(out, 6, "string", "concept:name", et.name)
            _attr(out, 6, "string", "lifecycle:transition", "complete")
            _attr(out, 6, "date", "time:timestamp", _format_ts(event.timestamp))
            _attr(out, 6, "string", "org:resource", event.partner_id)
            _attr(out, 6, "string", "efp:instance", event.global_instance_id)
            _attr(out, 6, "string", "efp:visibility", event.visibility.value)
            _attr(out, 6, "string", "efp:kind", et.kind.value)
            for (fname, fkind), value in zip(et.data_schema, event.payload):
                if fkind is FieldKind.NUMERIC:
                    _attr(out, 6, "float", fname, repr(float(value)))
                else:
                    _attr(out, 6, "string", fname, str(value))
            out.write("    </event>\n")
        out.write("  </trace>\n")
    out.write("</log>\n")
    return out.getvalue().encode("utf-8")


def _attr(out, indent: int, tag: str, key: str, value: str) -> None:
    out.write(
        f'{" " * indent}<{tag} key={quoteattr(key)} value={quoteattr(value)}/>\n'
    )


def read_xes(source, catalog: EventCatalog | None = None) -> ParsedLog:
    """Parse an XES byte stream into traces.

    When ``catalog`` is given, every event must match one of its types and
    carry a payload conforming to the type's schema (``SchemaError``
    otherwise). Without a catalog, one is inferred: type kinds come from
    ``efp:kind`` (defaulting to ``step``), payload schemas from the first
    occurrence of each type. Traces with zero events are dropped and
    counted in ``empty_dropped``.
    """
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        root = ElementTree.parse(source).getroot()
    except ElementTree.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc

    raw_traces = []
    for trace_el in root.iter("trace"):
        meta = _attributes(trace_el)
        raw_events = [
            _raw_event(event_el) for event_el in trace_el.iter("event")
        ]
        raw_traces.append((meta, raw_events))

    if catalog is None:
        catalog = _infer_catalog(raw_traces)

    traces = []
    dropped = 0
    for meta, raw_events in raw_traces:
        if not raw_events:
            dropped += 1
            continue
        instance_id = meta.get("concept:name") or raw_events[0][0].get(
            "efp:instance", "unknown"
        )
        events = tuple(
            _build_event(attrs, instance_id, catalog) for attrs in raw_events
        )
        outcome = meta.get("efp:outcome")
        error_index = meta.get("efp:error-index")
        traces.append(
            EventTrace(
                instance_id=instance_id,
                events=events,
                outcome_label=Outcome(outcome) if outcome else None,
                error_index=int(error_index) if error_index is not None else None,
            )
        )
    return ParsedLog(tuple(traces), catalog, dropped)


def _attributes(element) -> dict[str, str]:
    attrs = {}
    for child in element:
        if child.tag in ("string", "date", "int", "float", "boolean"):
            key = child.get("key")
            if key is not None:
                attrs[key] = child.get("value", "")
    return attrs


def _raw_event(event_el) -> tuple[dict[str, str], dict[str, str]]:
    attrs = {}
    kinds = {}
    for child in event_el:
        key = child.get("key")
        if key is None:
            continue
        attrs[key] = child.get("value", "")
        kinds[key] = child.tag
    if "concept:name" not in attrs:
        raise ParseError("event lacks concept:name")
    return attrs, kinds


def _payload_keys(attrs: dict[str, str]) -> list[str]:
    return [k for k in attrs if k not in _RESERVED_EVENT_KEYS]


def _infer_catalog(raw_traces) -> EventCatalog:
    steps: dict[str, EventType] = {}
    contexts: dict[str, EventType] = {}
    fail: EventType | None = None
    for _, raw_events in raw_traces:
        for attrs, tag_kinds in raw_events:
            name = attrs["concept:name"]
            if name in steps or name in contexts or (fail and fail.name == name):
                continue
            kind = EventKind(attrs.get("efp:kind", "step"))
            schema = tuple(
                (
                    key,
                    FieldKind.NUMERIC
                    if tag_kinds.get(key) in ("float", "int")
                    else FieldKind.CATEGORICAL,
                )
                for key in _payload_keys(attrs)
            )
            et = EventType(kind, name, schema)
            if kind is EventKind.FAILURE:
                fail = et
            elif kind is EventKind.CONTEXT:
                contexts[name] = et
            else:
                steps[name] = et
    intrinsic = ((fail,) if fail else ()) + tuple(steps.values())
    return EventCatalog(intrinsic=intrinsic, context=tuple(contexts.values()))


def _build_event(raw, instance_id: str, catalog: EventCatalog) -> Event:
    attrs, _ = raw
    name = attrs["concept:name"]
    et = catalog.lookup(name)
    if et is None:
        raise SchemaError(f"event type {name!r} not in catalog")
    payload = []
    for fname, fkind in et.data_schema:
        if fname not in attrs:
            raise SchemaError(f"event {name!r} lacks payload field {fname!r}")
        value = attrs[fname]
        payload.append(float(value) if fkind is FieldKind.NUMERIC else value)
    extra = set(_payload_keys(attrs)) - {f for f, _ in et.data_schema}
    if extra:
        raise SchemaError(f"event {name!r} carries unknown fields {sorted(extra)}")
    if "time:timestamp" not in attrs:
        raise ParseError(f"event {name!r} lacks time:timestamp")
    return Event(
        event_type=et,
        timestamp=_parse_ts(attrs["time:timestamp"]),
        global_instance_id=attrs.get("efp:instance", instance_id),
        partner_id=attrs.get("org:resource", ""),
        visibility=Visibility(attrs.get("efp:visibility", "private")),
        payload=tuple(payload),
    )


def write_catalog(catalog: EventCatalog) -> str:
    """Render a catalog in the line-oriented text format:
    ``kind name field:kind,field:kind,...``."""
    lines = []
    for et in catalog.all_types:
        schema = ",".join(f"{f}:{k.value}" for f, k in et.data_schema)
        lines.append(f"{et.kind.value} {et.name} {schema}".rstrip())
    return "\n".join(lines) + "\n"


def read_catalog(text: str) -> EventCatalog:
    intrinsic = []
    context = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"catalog line {lineno}: expected 'kind name [schema]'")
        kind = EventKind(parts[0])
        schema = []
        if len(parts) == 3:
            for item in parts[2].split(","):
                fname, _, fkind = item.partition(":")
                schema.append((fname, FieldKind(fkind)))
        et = EventType(kind, parts[1], tuple(schema))
        (context if kind is EventKind.CONTEXT else intrinsic).append(et)
    return EventCatalog(intrinsic=tuple(intrinsic), context=tuple(context))
