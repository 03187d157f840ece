import threading

import numpy as np
import pytest

from efp.errors import DuplicateInstance
from efp.events import FAIL_STATE, Event, Outcome
from efp.model import mine_model
from efp.predictors import FrequencyModel
from efp.runtime import Bus, replay
from efp.traversal import TraversalLimits

from conftest import StubClassifier, make_catalog, make_trace


def _event(catalog, name, ts, instance, payload=()):
    return Event(catalog.lookup(name), ts, instance, "p0", payload=payload)


@pytest.fixture
def chain_setup(order_catalog):
    """A -> B -> C -> E model plus a stub that always continues."""
    traces = [
        make_trace(order_catalog, ["A", "B", "C", "E"], instance_id=f"t{i}",
                   label=Outcome.END)
        for i in range(3)
    ]
    model = mine_model(traces)
    stub = StubClassifier(order_catalog, {
        ("A",): {"B": 0.95, FAIL_STATE: 0.05},
        ("A", "B"): {"C": 0.95, FAIL_STATE: 0.05},
        ("A", "B", "C"): {"E": 0.95, FAIL_STATE: 0.05},
    })
    return model, stub


def test_start_instance_allocates_queue(order_catalog, chain_setup):
    model, stub = chain_setup
    bus = Bus()
    bus.start_instance("i1", stub, model)
    assert len(bus.queues) == 1
    with pytest.raises(DuplicateInstance):
        bus.start_instance("i1", stub, model)


def test_fifo_delivery(order_catalog):
    bus = Bus()
    seen = []
    bus.subscribe("i1", seen.append)
    for i in range(3):
        bus.publish(_event(order_catalog, "A", 1_000 * i, "i1"))
    assert [e.timestamp for e in seen] == [0, 1_000, 2_000]


def test_publish_before_subscribe_retains_events(order_catalog):
    bus = Bus()
    bus.publish(_event(order_catalog, "A", 0, "ghost"))
    assert "ghost" in bus.queues  # auto-allocated
    seen = []
    bus.subscribe("ghost", seen.append)
    assert len(seen) == 1  # delivered once the consumer attached


def test_queue_isolation(order_catalog, chain_setup):
    model, stub = chain_setup
    bus = Bus()
    a = bus.start_instance("ia", stub, model)
    b = bus.start_instance("ib", stub, model)
    bus.publish(_event(order_catalog, "A", 0, "ia"))
    bus.publish(_event(order_catalog, "A", 0, "ib"))
    bus.publish(_event(order_catalog, "B", 1, "ia"))
    assert [e.state for e in a.events] == ["A", "B"]
    assert [e.state for e in b.events] == ["A"]


def test_concurrent_producers_preserve_per_producer_order(order_catalog):
    bus = Bus()
    received = {}
    for p in range(4):
        received[f"i{p}"] = []
        bus.subscribe(f"i{p}", received[f"i{p}"].append)

    def produce(p):
        for i in range(250):
            bus.publish(_event(order_catalog, "A", i, f"i{p}"))

    threads = [threading.Thread(target=produce, args=(p,)) for p in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sum(len(v) for v in received.values()) == 1000
    for p in range(4):
        assert [e.timestamp for e in received[f"i{p}"]] == list(range(250))


def test_context_before_intrinsic_yields_no_prediction(order_catalog,
                                                       chain_setup):
    model, stub = chain_setup
    bus = Bus()
    instance = bus.start_instance("i1", stub, model)
    out = instance.on_event(
        Event(order_catalog.lookup("temp"), 0, "i1", "p0", payload=(1.0,))
    )
    assert out is None
    assert bus.prediction_queue == []


def test_one_prediction_per_event_after_first_intrinsic(order_catalog,
                                                        chain_setup):
    model, stub = chain_setup
    bus = Bus()
    bus.start_instance("i1", stub, model)
    names = ["A", "temp", "B", "C", "E"]
    for i, name in enumerate(names):
        payload = (1.0,) if name == "temp" else ()
        bus.publish(_event(order_catalog, name, 1_000 * i, "i1", payload))
    assert len(bus.prediction_queue) == 5
    assert [p.at_event_index for p in bus.prediction_queue] == [0, 1, 2, 3, 4]


def test_close_trains_exactly_once_with_full_trace(order_catalog, chain_setup):
    model, _ = chain_setup

    class Recorder(StubClassifier):
        def __init__(self, catalog):
            super().__init__(catalog, {})
            self.trained = []

        def train_online(self, trace):
            self.trained.append(trace)

    recorder = Recorder(order_catalog)
    bus = Bus()
    bus.start_instance("i1", recorder, model)
    for i, name in enumerate(["A", "B", "C", "E"]):
        bus.publish(_event(order_catalog, name, 1_000 * i, "i1"))
    assert len(recorder.trained) == 1
    trained = recorder.trained[0]
    assert trained.outcome_label is Outcome.END
    assert [e.state for e in trained.events] == ["A", "B", "C", "E"]


def test_failure_event_closes_with_fail_label(order_catalog, chain_setup):
    model, _ = chain_setup

    class Recorder(StubClassifier):
        def __init__(self, catalog):
            super().__init__(catalog, {})
            self.trained = []

        def train_online(self, trace):
            self.trained.append(trace)

    recorder = Recorder(order_catalog)
    bus = Bus()
    instance = bus.start_instance("i1", recorder, model)
    for i, name in enumerate(["A", "B", "failure"]):
        bus.publish(_event(order_catalog, name, 1_000 * i, "i1"))
    assert instance.closed
    assert recorder.trained[0].outcome_label is Outcome.FAIL
    # prediction at the failure event reports certainty
    assert bus.prediction_queue[-1].p_fail == 1.0


def test_classifier_failure_publishes_error_and_keeps_instance(order_catalog,
                                                               chain_setup):
    model, _ = chain_setup

    class Exploding(StubClassifier):
        def start(self, trace):
            raise RuntimeError("boom")

        def train_online(self, trace):
            pass

    bus = Bus()
    instance = bus.start_instance("i1", Exploding(order_catalog, {}), model)
    bus.publish(_event(order_catalog, "A", 0, "i1"))
    assert len(bus.error_queue) == 1
    assert not instance.closed
    bus.publish(_event(order_catalog, "B", 1, "i1"))
    assert len(bus.error_queue) == 2


def test_backpressure_blocks_publisher_until_drained(order_catalog):
    import time

    bus = Bus(capacity=3)
    for i in range(3):
        bus.publish(_event(order_catalog, "A", i, "i1"))
    unblocked = threading.Event()

    def publish_fourth():
        bus.publish(_event(order_catalog, "A", 3, "i1"))
        unblocked.set()

    t = threading.Thread(target=publish_fourth, daemon=True)
    t.start()
    time.sleep(0.05)
    assert not unblocked.is_set()  # queue full, publisher blocked
    seen = []
    bus.subscribe("i1", seen.append)  # drains the queue
    t.join(timeout=2)
    assert unblocked.is_set()
    assert len(seen) == 4


def test_replay_emits_monotone_stream(order_catalog):
    corpus = [
        make_trace(order_catalog, ["A", "B", "C", "E"], instance_id=f"t{i}",
                   label=Outcome.END)
        for i in range(30)
    ]
    model = mine_model(corpus)
    classifier = FrequencyModel(order_catalog, alpha=0.1)
    classifier.train(corpus)
    stream = replay(
        [make_trace(order_catalog, ["A", "B", "C", "E"], instance_id="probe")],
        classifier, model, TraversalLimits(),
    )
    assert len(stream) == 4
    assert all(p.p_fail <= 0.5 for p in stream)
    line = stream[0].line()
    assert line.count("\t") == 4
    assert line.startswith("probe\t0\t")
