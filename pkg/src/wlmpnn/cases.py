"""Built-in case graphs, the counterexample harness and seeded samplers.

The case graphs are the four concrete instances the distinguishing-power
separations are proved on; ``verify_counterexample`` mechanically re-checks
each claim three ways: a symbolic pre-weight row comparison (independent of
weights, bias and activation), seeded random weight trials through the
execution engine, and the refinement side of the claim.

Samplers use ``random.Random`` (MT19937) so every report is reproducible
from (case id, trials, seed) alone.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from .compare import ShiftSpec, compare_traces
from .graphs import LabelledGraph, make_graph
from .linalg import Row, identity, row_add, row_mat, row_scale
from .mpnn import (
    BuiltinLayer,
    LayerParams,
    MpnnSpec,
    run_mpnn,
    wrap_comb_aggr,
    _resolve_degree_family,
)
from .surd import ONE, ZERO, ExactScalar, activate
from .wl import wl_partitions

CASE_IDS = ("fig1-gcn", "g1-dgnn12", "g2-dgnn34", "g3-dgnn5", "fig1-dgnn6")

_E1 = (1, 0, 0)
_E2 = (0, 1, 0)
_E3 = (0, 0, 1)


def builtin_graph(graph_id: str) -> LabelledGraph:
    """The four case graphs by id: fig1, g1, g2, g3."""
    if graph_id == "fig1":
        return make_graph(
            6,
            [(1, 3), (2, 3), (3, 4), (4, 5), (5, 6)],
            [_E1, _E1, _E2, _E3, _E3, _E2],
        )
    if graph_id == "g1":
        return make_graph(4, [(1, 2), (1, 3), (4, 2), (4, 3)], [_E1, _E2, _E2, _E3])
    if graph_id == "g2":
        return make_graph(2, [(1, 2)], [(1, 0), (0, 1)])
    if graph_id == "g3":
        return make_graph(
            10,
            [(1, 2), (1, 3), (1, 4), (1, 5), (6, 7), (6, 8), (6, 9), (6, 10)],
            [_E1, _E2, _E2, _E3, _E3, _E2, _E1, _E1, _E3, _E3],
        )
    raise ValueError(f"unknown builtin graph {graph_id!r} (expected fig1, g1, g2 or g3)")


def pre_weight_matrix(g: LabelledGraph, family: str, params: LayerParams) -> tuple[Row, ...]:
    """The symbolic matrix a single-weight degree-aware layer multiplies by W.

    Computed directly from the closed form diag(g) (A + pI) diag(h) L (plus
    L itself when the family ties the self weight to W), not through the
    message-passing engine, so it doubles as an independent cross-check of
    the engine in the trials.
    """
    w1, w2, _, p, g_fn, h_fn, _ = _resolve_degree_family(family, params)
    if w1 is not None and w1 is not w2:
        raise ValueError(f"{family} has an independent self weight; no single pre-weight matrix")
    scaled = [row_scale(g.label_of(v), h_fn.value(g.degree(v))) for v in range(1, g.n + 1)]
    rows = []
    for v in range(1, g.n + 1):
        acc = row_scale(scaled[v - 1], p)
        for u in g.neighbors(v):
            acc = row_add(acc, scaled[u - 1])
        row = row_scale(acc, g_fn.value(g.degree(v)))
        if w1 is not None:
            row = row_add(row, g.label_of(v))
        rows.append(row)
    return tuple(rows)


@dataclass(frozen=True)
class CaseSpec:
    case_id: str
    trials: int = 100
    seed: int = 1


@dataclass(frozen=True)
class CaseReport:
    case_id: str
    trials: int
    seed: int
    architectures: tuple[str, ...]
    claimed_pair: tuple[int, int]
    kind: str  # "forced-merge" or "forced-split"
    structural_ok: bool
    expected_rows_ok: bool
    trial_merges: int
    trial_separations: int
    wl_round: int
    wl_verdict_ok: bool
    extra: tuple[tuple[str, bool], ...] = ()

    @property
    def passed(self) -> bool:
        # forced-merge claims are universal (no weight draw may split the
        # pair); forced-split claims are existential, witnessed by the
        # identity-weight structural check, so trials only corroborate.
        trials_ok = self.trial_separations == 0 if self.kind == "forced-merge" else True
        return (
            self.structural_ok
            and self.expected_rows_ok
            and trials_ok
            and self.wl_verdict_ok
            and all(ok for _, ok in self.extra)
        )

    def to_json(self) -> dict:
        return {
            "case": self.case_id,
            "trials": self.trials,
            "seed": self.seed,
            "architectures": list(self.architectures),
            "claimed_pair": list(self.claimed_pair),
            "kind": self.kind,
            "structural_ok": self.structural_ok,
            "expected_rows_ok": self.expected_rows_ok,
            "trial_merges": self.trial_merges,
            "trial_separations": self.trial_separations,
            "wl_round": self.wl_round,
            "wl_verdict_ok": self.wl_verdict_ok,
            "extra_checks": {name: ok for name, ok in self.extra},
            "passed": self.passed,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


class CaseVerificationError(RuntimeError):
    """A case claim failed mechanical verification."""

    def __init__(self, report: CaseReport):
        super().__init__(f"case {report.case_id} failed verification:\n{report.to_json_text()}")
        self.report = report


_HALF = ExactScalar(Fraction(1, 2))

# case id -> (graph id, architecture layer builders, pair, kind, expected shared row or None)
_CASE_TABLE: dict[str, dict] = {
    "g1-dgnn12": {
        "graph": "g1",
        "families": (("dgnn1", {}), ("dgnn2", {})),
        "pair": (1, 4),
        "kind": "forced-merge",
        "wl_round": 1,
    },
    "g2-dgnn34": {
        "graph": "g2",
        "families": (("dgnn3", {}), ("dgnn4", {})),
        "pair": (1, 2),
        "kind": "forced-merge",
        "wl_round": 1,
    },
    "g3-dgnn5": {
        "graph": "g3",
        "families": (("dgnn5", {}),),
        "pair": (1, 6),
        "kind": "forced-merge",
        "wl_round": 1,
    },
    "fig1-gcn": {
        "graph": "fig1",
        "families": (("gcn-kipf", {}),),
        "pair": (4, 5),
        "kind": "forced-split",
        "wl_round": 1,
    },
    "fig1-dgnn6": {
        "graph": "fig1",
        "families": (("dgnn6", {"r": _HALF, "p": _HALF}),),
        "pair": (4, 5),
        "kind": "forced-split",
        "wl_round": 1,
    },
}


def _expected_shared_row(case_id: str, family: str, params: LayerParams, g: LabelledGraph) -> Row:
    """The claimed common pre-weight row of the forced pair, from the closed form."""
    _, _, _, p, g_fn, h_fn, _ = _resolve_degree_family(family, params)
    if case_id == "g1-dgnn12":
        # both endpoints see two degree-2 neighbours of the middle label
        value = g_fn.value(2) * h_fn.value(2) * 2
        return (ZERO, value, ZERO)
    if case_id == "g2-dgnn34":
        value = g_fn.value(1) * h_fn.value(1)
        return (value, value)
    if case_id == "g3-dgnn5":
        return (ONE, ONE, ONE)
    raise ValueError(case_id)


def _sample_matrix(rng: random.Random, rows: int, cols: int, span: int, dens: tuple[int, ...]):
    return tuple(
        tuple(ExactScalar(Fraction(rng.randint(-span, span), rng.choice(dens))) for _ in range(cols))
        for _ in range(rows)
    )


def _sample_row(rng: random.Random, cols: int, span: int, dens: tuple[int, ...]) -> Row:
    return tuple(ExactScalar(Fraction(rng.randint(-span, span), rng.choice(dens))) for _ in range(cols))


def verify_counterexample(case: CaseSpec, raise_on_failure: bool = True) -> CaseReport:
    """Re-check a case claim symbolically, by seeded trials, and against refinement.

    forced-merge cases assert the pair's pre-weight rows are identical (so no
    weight, bias or activation can split them) while refinement splits the
    pair at the stated round; forced-split cases assert the identity-weight
    layer splits a pair refinement still merges.
    """
    if case.case_id not in _CASE_TABLE:
        raise ValueError(f"unknown case {case.case_id!r} (known: {', '.join(CASE_IDS)})")
    table = _CASE_TABLE[case.case_id]
    g = builtin_graph(table["graph"])
    v, w = table["pair"]
    kind = table["kind"]
    rng = random.Random(case.seed)
    structural_ok = True
    expected_rows_ok = True
    merges = 0
    separations = 0
    families = []
    for family, extra_params in table["families"]:
        families.append(family)
        base = LayerParams(w2=identity(g.label_dim), sigma="relu", **extra_params)
        pre = pre_weight_matrix(g, family, base)
        rows_equal = pre[v - 1] == pre[w - 1]
        if kind == "forced-merge":
            structural_ok &= rows_equal
            expected = _expected_shared_row(case.case_id, family, base, g)
            expected_rows_ok &= pre[v - 1] == expected and pre[w - 1] == expected
        else:
            structural_ok &= not rows_equal
        for _ in range(case.trials):
            cols = rng.randint(1, 3)
            weight = _sample_matrix(rng, g.label_dim, cols, span=5, dens=(1, 2, 3))
            sigma = rng.choice(["relu", "sign"])
            kwargs = dict(extra_params)
            if family not in ("gcn-kipf",):
                kwargs["bias"] = _sample_row(rng, cols, span=5, dens=(1, 2, 3))
            layer = BuiltinLayer(family, LayerParams(w2=weight, sigma=sigma, **kwargs))
            trace = run_mpnn(g, MpnnSpec(f_mode="degree", layers=(layer,)))
            if trace.labellings[1].row_of(v) == trace.labellings[1].row_of(w):
                merges += 1
            else:
                separations += 1
    wl_round = table["wl_round"]
    wl_part = wl_partitions(g, wl_round)[wl_round]
    pair_merged_by_wl = wl_part.class_of[v - 1] == wl_part.class_of[w - 1]
    wl_ok = not pair_merged_by_wl if kind == "forced-merge" else pair_merged_by_wl
    extra: list[tuple[str, bool]] = []
    if case.case_id == "fig1-gcn":
        spec = named_spec("gcn", g.label_dim, rounds=3)
        trace = run_mpnn(g, spec)
        wl = wl_partitions(g, 4)

        class _Wrap:
            def __init__(self, parts):
                self.partitions = parts

        same_round = compare_traces(trace, _Wrap(wl[:4]), ShiftSpec("identity"))
        one_ahead = compare_traces(trace, _Wrap(wl), ShiftSpec("plus_one"))
        extra.append(("same_round_relation_fails", not same_round.verdict.holds))
        extra.append(
            (
                "same_round_witness_is_round1_pair",
                same_round.verdict.first_violation == (1, v, w),
            )
        )
        extra.append(("one_step_ahead_relation_holds", one_ahead.verdict.holds))
    report = CaseReport(
        case_id=case.case_id,
        trials=case.trials,
        seed=case.seed,
        architectures=tuple(families),
        claimed_pair=(v, w),
        kind=kind,
        structural_ok=structural_ok,
        expected_rows_ok=expected_rows_ok,
        trial_merges=merges,
        trial_separations=separations,
        wl_round=wl_round,
        wl_verdict_ok=wl_ok,
        extra=tuple(extra),
    )
    if raise_on_failure and not report.passed:
        raise CaseVerificationError(report)
    return report


# -- seeded samplers -----------------------------------------------------------


def _fraction_draw(rng: random.Random) -> Fraction:
    return Fraction(rng.getrandbits(53), 1 << 53)


def _connected(n: int, edges: list[tuple[int, int]]) -> bool:
    adjacency: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    seen = {1}
    stack = [1]
    while stack:
        for u in adjacency[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == n


def sample_graph(
    n: int,
    edge_prob: Fraction | float,
    seed: int,
    alphabet: int = 3,
    require_connected: bool = False,
    max_attempts: int = 1000,
) -> LabelledGraph:
    """Seeded Erdos-Renyi draw with one-hot labels over a small alphabet.

    Resamples until no vertex is isolated (and, optionally, the graph is
    connected); fails after max_attempts.
    """
    if n < 2:
        raise ValueError("need at least two vertices")
    threshold = Fraction(edge_prob)
    rng = random.Random(seed)
    for _ in range(max_attempts):
        edges = [
            (u, v)
            for u in range(1, n + 1)
            for v in range(u + 1, n + 1)
            if _fraction_draw(rng) < threshold
        ]
        touched = {x for e in edges for x in e}
        if len(touched) != n:
            continue
        if require_connected and not _connected(n, edges):
            continue
        labels = []
        for _ in range(n):
            cls = rng.randrange(alphabet)
            labels.append(tuple(1 if j == cls else 0 for j in range(alphabet)))
        return make_graph(n, edges, labels)
    raise RuntimeError(f"no admissible graph found in {max_attempts} attempts")


def _weights(rng: random.Random, rows: int, cols: int):
    # property-suite weight scale: numerators in [-3, 3], denominators in {1, 2}
    return _sample_matrix(rng, rows, cols, span=3, dens=(1, 2))


def sample_anonymous_spec(rng: random.Random, s0: int) -> MpnnSpec:
    """Random anonymous network: gnn / gnn-minus / comb-aggr, up to 4 rounds."""
    family = rng.choice(["gnn", "gnn-minus", "comb-aggr"])
    rounds = rng.randint(1, 4)
    sigma = rng.choice(["relu", "sign"])
    if family == "comb-aggr":
        inner = rng.randint(1, 3)
        h_matrix = _weights(rng, s0, inner)
        g_matrix = _weights(rng, inner, inner)
        self_matrix = _weights(rng, s0, s0)
        mix = _weights(rng, inner, s0)
        bias = _sample_row(rng, s0, span=3, dens=(1, 2))

        def aggr_h(y):
            return row_mat(y, h_matrix)

        def aggr_g(m):
            return row_mat(m, g_matrix)

        def comb(x, y):
            pre = row_add(row_add(row_mat(x, self_matrix), row_mat(y, mix)), bias)
            return tuple(activate(value, sigma) for value in pre)

        return wrap_comb_aggr(comb, aggr_h, aggr_g, rounds)
    layers = []
    width = s0
    for _ in range(rounds):
        out = rng.randint(1, 3)
        if family == "gnn":
            params = LayerParams(
                w1=_weights(rng, width, out),
                w2=_weights(rng, width, out),
                bias=_sample_row(rng, out, span=3, dens=(1, 2)),
                sigma=sigma,
            )
        else:
            params = LayerParams(
                w2=_weights(rng, width, out),
                p=ExactScalar(Fraction(rng.randint(0, 4), 4)),
                q=ExactScalar(Fraction(rng.randint(0, 4), 4)),
                sigma=sigma,
            )
        layers.append(BuiltinLayer(family, params))
        width = out
    return MpnnSpec(f_mode="zero", layers=tuple(layers))


def sample_degree_spec(rng: random.Random, s0: int) -> MpnnSpec:
    """Random degree-aware network from the normalized-adjacency families."""
    family = rng.choice(["gcn-kipf", "dgnn1", "dgnn2", "dgnn3", "dgnn4", "dgnn5", "dgnn6"])
    rounds = rng.randint(1, 4)
    sigma = rng.choice(["relu", "sign"])
    layers = []
    width = s0
    for _ in range(rounds):
        out = rng.randint(1, 3)
        kwargs: dict = {"w2": _weights(rng, width, out), "sigma": sigma}
        if family == "dgnn6":
            kwargs["r"] = ExactScalar(Fraction(rng.randint(1, 4), 4))
            kwargs["p"] = ExactScalar(Fraction(rng.randint(0, 4), 4))
        if family != "gcn-kipf":
            kwargs["bias"] = _sample_row(rng, out, span=3, dens=(1, 2))
        layers.append(BuiltinLayer(family, LayerParams(**kwargs)))
        width = out
    return MpnnSpec(f_mode="degree", layers=tuple(layers))


def named_spec(name: str, s0: int, rounds: int, sigma: str = "relu") -> MpnnSpec:
    """Identity-weight network for a family name (CLI shorthand)."""
    eye = identity(s0)
    layers = []
    for _ in range(rounds):
        if name == "gcn":
            layers.append(BuiltinLayer("gcn-kipf", LayerParams(w2=eye, sigma=sigma)))
        elif name in ("dgnn1", "dgnn2", "dgnn3", "dgnn4", "dgnn5"):
            layers.append(BuiltinLayer(name, LayerParams(w2=eye, sigma=sigma)))
        elif name == "dgnn6":
            layers.append(
                BuiltinLayer("dgnn6", LayerParams(w2=eye, r=_HALF, p=_HALF, sigma=sigma))
            )
        elif name == "gnn":
            layers.append(BuiltinLayer("gnn", LayerParams(w1=eye, w2=eye, sigma=sigma)))
        elif name == "gnn-minus":
            layers.append(
                BuiltinLayer("gnn-minus", LayerParams(w2=eye, p=_HALF, q=_HALF, sigma=sigma))
            )
        else:
            raise ValueError(f"unknown network name {name!r}")
    f_mode = "zero" if name in ("gnn", "gnn-minus") else "degree"
    return MpnnSpec(f_mode=f_mode, layers=tuple(layers))
