"""In-process event bus with one queue per process execution and one
failure-prediction component per live instance.

The bus is a deterministic stand-in for a message broker: publishers
append to per-instance bounded queues, subscribers observe each event
exactly once in publish order, and prediction events land on a shared
outgoing queue. Publishing is thread-safe; each instance's events are
dispatched strictly sequentially.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass

from .errors import DuplicateInstance
from .events import Event, EventKind, EventTrace, Outcome
from .model import ProcessModel
from .predictors import Classifier
from .traversal import (
    OutcomePath,
    TraversalLimits,
    failure_probability,
    traverse,
)

DEFAULT_QUEUE_CAPACITY = 65536
TOP_PATHS = 5


@dataclass(frozen=True)
class PredictionEvent:
    """Outgoing prediction for one instance after one observed event."""

    instance_id: str
    at_event_index: int
    p_fail: float
    lower: float
    upper: float
    top_paths: tuple[OutcomePath, ...]
    timestamp: int

    def line(self) -> str:
        return (
            f"{self.instance_id}\t{self.at_event_index}\t{self.p_fail:.4f}"
            f"\t{self.lower:.4f}\t{self.upper:.4f}"
        )


@dataclass(frozen=True)
class ErrorEvent:
    """Published instead of a prediction when the classifier raised."""

    instance_id: str
    at_event_index: int
    message: str


class EfpInstance:
    """Failure predictor bound to one process execution.

    Appends every observed event to the running trace, emits one
    prediction per event once an intrinsic event exists, and closes the
    instance (training the classifier on the completed labeled trace)
    when a final step or a failure arrives.
    """

    def __init__(self, bus, instance_id, classifier, model, limits):
        self.bus = bus
        self.instance_id = instance_id
        self.classifier = classifier
        self.model = model
        self.limits = limits
        self.events: list[Event] = []
        self.closed = False
        self.label: Outcome | None = None

    @property
    def trace(self) -> EventTrace:
        return EventTrace(
            self.instance_id, tuple(self.events), outcome_label=self.label
        )

    def on_event(self, event: Event) -> PredictionEvent | None:
        if self.closed:
            return None
        self.events.append(event)
        index = len(self.events) - 1

        prediction = None
        if any(e.is_intrinsic for e in self.events):
            try:
                result = traverse(
                    self.trace, self.classifier, self.model, self.limits
                )
            except Exception as exc:  # classifier failures keep the instance alive
                self.bus.error_queue.append(
                    ErrorEvent(self.instance_id, index, str(exc))
                )
            else:
                estimate = failure_probability(result)
                prediction = PredictionEvent(
                    instance_id=self.instance_id,
                    at_event_index=index,
                    p_fail=estimate.p_fail,
                    lower=estimate.lower,
                    upper=estimate.upper,
                    top_paths=result.paths[:TOP_PATHS],
                    timestamp=event.timestamp,
                )
                self.bus.prediction_queue.append(prediction)

        if event.event_type.kind is EventKind.FAILURE:
            self._close(Outcome.FAIL)
        elif event.is_intrinsic and event.state in self.model.final_states:
            self._close(Outcome.END)
        return prediction

    def _close(self, label: Outcome) -> None:
        self.closed = True
        self.label = label
        self.classifier.train_online(self.trace)


class Bus:
    """Queues, subscribers, and the outgoing prediction stream."""

    def __init__(self, capacity: int = DEFAULT_QUEUE_CAPACITY):
        self.capacity = capacity
        self.queues: dict[str, deque] = {}
        self.subscribers: dict[str, list] = {}
        self.instances: dict[str, EfpInstance] = {}
        self.prediction_queue: list[PredictionEvent] = []
        self.error_queue: list[ErrorEvent] = []
        self._lock = threading.Lock()
        self._not_full = threading.Condition(self._lock)
        self._dispatching: set[str] = set()

    def queue_for(self, instance_id: str) -> deque:
        with self._lock:
            return self._queue_locked(instance_id)

    def _queue_locked(self, instance_id: str) -> deque:
        queue = self.queues.get(instance_id)
        if queue is None:
            queue = deque()
            self.queues[instance_id] = queue
            self.subscribers[instance_id] = []
        return queue

    def subscribe(self, instance_id: str, handler) -> None:
        with self._lock:
            self._queue_locked(instance_id)
            self.subscribers[instance_id].append(handler)
            self._drain_locked(instance_id)

    def start_instance(
        self,
        instance_id: str,
        classifier: Classifier,
        model: ProcessModel,
        limits: TraversalLimits = TraversalLimits(),
    ) -> EfpInstance:
        """Allocate the instance queue and attach a fresh EFP component."""
        with self._lock:
            if instance_id in self.instances:
                raise DuplicateInstance(f"instance {instance_id!r} already live")
            instance = EfpInstance(self, instance_id, classifier, model, limits)
            self.instances[instance_id] = instance
            self._queue_locked(instance_id)
            self.subscribers[instance_id].append(instance.on_event)
        return instance

    def publish(self, event: Event) -> None:
        """Append an event to its instance queue and dispatch it.

        Queues are created on first publish. Dispatch happens inline while
        holding the per-queue dispatch flag, so subscribers of one queue
        always observe events sequentially and exactly once, even with
        concurrent publishers.
        """
        instance_id = event.global_instance_id
        with self._not_full:
            queue = self._queue_locked(instance_id)
            while len(queue) >= self.capacity:
                self._not_full.wait()
            queue.append(event)
            self._drain_locked(instance_id)

    def _drain_locked(self, instance_id: str) -> None:
        if instance_id in self._dispatching:
            return
        if not self.subscribers[instance_id]:
            return  # retain events until a consumer attaches
        self._dispatching.add(instance_id)
        queue = self.queues[instance_id]
        try:
            while queue:
                item = queue.popleft()
                self._not_full.notify_all()
                handlers = list(self.subscribers[instance_id])
                self._lock.release()
                try:
                    for handler in handlers:
                        handler(item)
                finally:
                    self._lock.acquire()
        finally:
            self._dispatching.discard(instance_id)


def replay(
    traces: list[EventTrace],
    classifier: Classifier,
    model: ProcessModel,
    limits: TraversalLimits = TraversalLimits(),
    bus: Bus | None = None,
) -> list[PredictionEvent]:
    """Feed recorded traces through the bus event by event.

    Instances are started in trace order; the classifier is trained online
    as instances close, so later traces benefit from earlier ones. Returns
    the full prediction stream.
    """
    bus = bus or Bus()
    for trace in traces:
        bus.start_instance(trace.instance_id, classifier, model, limits)
        for event in trace.events:
            bus.publish(event)
    return list(bus.prediction_queue)
