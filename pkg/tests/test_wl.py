"""Colour refinement: steps, termination, traces."""
import json

from wlmpnn.cases import builtin_graph, sample_graph
from wlmpnn.graphs import Partition, partition_of, partition_refines
from wlmpnn.wl import wl_partitions, wl_run, wl_step


def brute_force_step(g, class_of):
    """Independent oracle: string-signature refinement."""
    signatures = []
    for v in range(1, g.n + 1):
        neighbour = ",".join(str(class_of[u - 1]) for u in sorted(g.neighbors(v), key=lambda u: class_of[u - 1]))
        signatures.append(f"{class_of[v - 1]}|{neighbour}")
    ids: dict[str, int] = {}
    out = []
    for s in signatures:
        ids.setdefault(s, len(ids))
        out.append(ids[s])
    return tuple(out)


def test_wl_step_fig1_round1():
    g = builtin_graph("fig1")
    initial = partition_of(g.initial_labelling())
    assert initial.classes() == [[1, 2], [3, 6], [4, 5]]
    step1 = wl_step(g, initial)
    assert step1.classes() == [[1, 2], [3], [4, 5], [6]]
    assert step1.class_of == brute_force_step(g, initial.class_of)


def test_wl_step_splits_v4_v5_at_round_two():
    g = builtin_graph("fig1")
    parts = wl_partitions(g, 2)
    assert parts[1].class_of[3] == parts[1].class_of[4]
    assert parts[2].class_of[3] != parts[2].class_of[4]


def test_wl_step_fixpoint_on_discrete_partition():
    g = builtin_graph("fig1")
    discrete = Partition(tuple(range(g.n)))
    assert wl_step(g, discrete) == discrete


def test_wl_run_stabilizes_immediately_on_distinct_labels():
    trace = wl_run(builtin_graph("g2"))
    assert trace.stabilized_at == 1
    assert [p.num_classes for p in trace.rounds] == [2, 2]


def test_wl_run_g1_separates_v1_v4_at_round1():
    g = builtin_graph("g1")
    trace = wl_run(g)
    part = trace.rounds[1]
    assert part.class_of[0] != part.class_of[3]


def test_wl_run_respects_max_rounds():
    g = builtin_graph("fig1")
    trace = wl_run(g, max_rounds=1)
    assert len(trace.rounds) == 2
    assert trace.stabilized_at is None


def test_wl_termination_within_n_on_seeded_graphs():
    for seed in range(100):
        import random

        n = random.Random(seed).randint(2, 12)
        g = sample_graph(n, 0.4, seed + 10_000)
        trace = wl_run(g)
        assert trace.stabilized_at is not None and trace.stabilized_at <= g.n


def test_monotone_refinement():
    for seed in range(30):
        g = sample_graph(6, 0.5, seed)
        trace = wl_run(g)
        for t in range(1, len(trace.rounds)):
            assert partition_refines(trace.rounds[t], trace.rounds[t - 1])
            assert trace.rounds[t].num_classes >= trace.rounds[t - 1].num_classes


def test_wl_partitions_extends_past_stabilization():
    g = builtin_graph("g2")
    parts = wl_partitions(g, 5)
    assert len(parts) == 6
    assert all(p == parts[1] for p in parts[1:])


def test_trace_json_shape():
    trace = wl_run(builtin_graph("fig1"))
    payload = json.loads(trace.to_json_text())
    assert payload["stabilized_at"] == 3
    assert payload["rounds"][0] == [0, 0, 1, 2, 2, 1]
    assert payload["rounds"][-1] == payload["rounds"][-2]
