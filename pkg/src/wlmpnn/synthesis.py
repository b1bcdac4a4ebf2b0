"""Constructive weight synthesis simulating colour refinement per round.

Two targets are supported on a fixed input graph:

* ``gnn-minus``: layers sigma((A + pI) L W - q J) with one weight matrix per
  round, any 0 < p < 1, and a per-round threshold q from the separation
  construction.  Every round provably reproduces the refinement partition.

* ``dgnn6``: layers sigma(diag(g) (A + pI) diag(h) L W + B) for positive
  degree-determined g and h.  The trade-off parameter p is chosen above the
  graph- and g-dependent bound m_p so that the g scaling can never merge
  distinct neighbourhood counts.

Each round builds a right inverse of the current unique label rows, forms
the neighbourhood count labelling through (A + pI), separates its unique
rows with a provably non-singular activated matrix, and verifies the result
against the refinement reference.  Verification is mandatory: a failed
round raises SynthesisError with a dump instead of emitting a certificate.

The degree-normalized target needs repairs beyond the plain route, all
staying inside the architecture's weight/bias freedom and all re-verified:

* When a label class spans degrees with different h values, the h-scaled
  unique rows are linearly dependent (two parallel rows), so no right
  inverse exists; the round then works directly on the pre-weight matrix.
* A network whose pre-weight rows distinguish vertices that refinement
  merges can often still match the reference by projecting the difference
  directions of reference-equal pairs to zero (a kernel factor folded into
  W); entries can turn negative after projection, which a constant shift
  absorbed by the bias row makes positive again.
* When that projection would also collapse reference-distinct rows, clamped
  threshold columns are added instead: a single extra weight column w and
  bias beta produce sigma(row . w + beta), which can send every member of a
  torn reference class into the same clamp band while keeping some other
  pair apart; a constant pad column (zero weights, bias 1) keeps the class
  rows linearly independent.

When no repair realizes the reference partition (the class values can be
nested so that every threshold tearing one pair also tears an equal pair),
the round keeps its finer labelling: the refinement bound still holds and
is enforced, and the certificate records the equivalence verdict as false.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .graphs import (
    LabelledGraph,
    Labelling,
    Partition,
    one_hot_labelling,
    partition_of,
    partition_refines,
    partition_refines_violation,
)
from .linalg import (
    Matrix,
    Row,
    as_matrix,
    determinant,
    matrix_to_text,
    mat_mul,
    nullspace_basis,
    outer,
    rank,
    right_inverse,
    row_add,
    row_mat,
    row_scale,
    rows_linearly_independent,
    unique_rows,
)
from .mpnn import BuiltinLayer, DegreeFn, LayerParams, MpnnSpec
from .surd import ONE, ZERO, ExactScalar, activate
from .wl import wl_partitions


class SynthesisError(RuntimeError):
    """A verification step that the theory guarantees has failed."""

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}


@dataclass(frozen=True)
class SeparationResult:
    """Witness that sigma(C X - q J) has non-singular unique rows."""

    x_matrix: Matrix
    q: ExactScalar
    permutation: tuple[int, ...]
    base: ExactScalar
    z: Row
    x_row: Row


def _check_separation_preconditions(c: Sequence[Row]) -> None:
    if not c:
        raise ValueError("separation needs at least one row")
    seen = set()
    for row in c:
        if row in seen:
            raise ValueError("separation rows must be pairwise distinct")
        seen.add(row)
        if all(v.is_zero for v in row):
            raise ValueError("separation rows must not be entirely zero")
        for v in row:
            if v.sign() < 0:
                raise ValueError("separation rows must be non-negative")


def _activated(c: Sequence[Row], x_matrix: Matrix, q: ExactScalar, sigma: str) -> Matrix:
    return tuple(
        tuple(activate(v - q, sigma) for v in row_mat(row, x_matrix)) for row in c
    )


def _separation(c: Sequence[Row], sigma: str) -> SeparationResult:
    _check_separation_preconditions(c)
    m = len(c)
    width = len(c[0])
    top = c[0][0]
    for row in c:
        for v in row:
            if v > top:
                top = v
    base = top + ONE
    attempts = m * m * width + 8
    while True:
        powers = [ONE]
        for _ in range(width - 1):
            powers.append(powers[-1] * base)
        z = tuple(powers)
        mixed = [sum((row[i] * z[i] for i in range(width)), start=ZERO) for row in c]
        if len({v for v in mixed}) == m:
            break
        base = base + ONE
        attempts -= 1
        if attempts <= 0:  # pragma: no cover - distinct rows guarantee termination
            raise AssertionError("base escalation failed to separate distinct rows")
    order = tuple(sorted(range(m), key=lambda i: mixed[i], reverse=True))
    descending = [mixed[i] for i in order]
    x_row = tuple(v.invert() for v in descending)
    if m == 1:
        below_one = ZERO
    else:
        below_one = descending[1] * x_row[0]  # x_row[0] = 1/descending[0]
        for j in range(1, m - 1):
            ratio = descending[j + 1] * x_row[j]
            if ratio > below_one:
                below_one = ratio
    threshold = below_one if sigma == "relu" else (below_one + ONE) * ExactScalar(Fraction(1, 2))
    x_matrix = outer(z, x_row)
    activated = _activated(c, x_matrix, threshold, sigma)
    if determinant(activated).is_zero:  # pragma: no cover - construction guarantees
        raise AssertionError("separation produced a singular activated matrix")
    return SeparationResult(
        x_matrix=x_matrix,
        q=threshold,
        permutation=order,
        base=base,
        z=z,
        x_row=x_row,
    )


def relu_separation(c: Sequence[Row]) -> SeparationResult:
    """Separation for the ReLU activation; q is the greatest below-1 ratio."""
    return _separation(as_matrix(c), "relu")


def sign_separation(c: Sequence[Row]) -> SeparationResult:
    """Separation for the sign activation; the threshold is the midpoint
    between the greatest below-1 ratio and 1, forcing a strict +-1 pattern."""
    return _separation(as_matrix(c), "sign")


# -- the p lower bound for degree-normalized synthesis -------------------------

_MP_CACHE: dict = {}


def compute_mp(g: LabelledGraph, g_fn: DegreeFn) -> ExactScalar:
    """Largest forbidden trade-off value for the degree scaling g on this graph.

    Enumerates, over ratios alpha of distinct g values and i, j in {0..n},
    the values alpha*j - i, (i - alpha*j)/alpha and (alpha*j - i)/(1 - alpha)
    that land in [0, 1), and returns their maximum (0 when none exist, e.g.
    on regular graphs).  All comparisons are exact.
    """
    degrees = tuple(sorted(set(g.degrees())))
    values = {}
    for d in degrees:
        value = g_fn.value(d)
        if value.sign() <= 0:
            raise ValueError(f"g must be positive on present degrees; g({d}) = {value}")
        values[d] = value
    key = (g.n, degrees, tuple(values[d].to_text() for d in degrees))
    if key in _MP_CACHE:
        return _MP_CACHE[key]
    ratios: dict[ExactScalar, None] = {}
    for a in degrees:
        for b in degrees:
            if values[a] != values[b]:
                ratios[values[b] * values[a].invert()] = None
    best = ZERO
    n = g.n
    for alpha in ratios:
        inv_alpha = alpha.invert()
        inv_one_minus = (ONE - alpha).invert()
        for j in range(n + 1):
            alpha_j = alpha * j
            for i in range(n + 1):
                head = alpha_j - i
                for candidate in (head, (ExactScalar(i) - alpha_j) * inv_alpha, head * inv_one_minus):
                    if candidate.sign() >= 0 and (candidate - ONE).sign() < 0 and candidate > best:
                        best = candidate
    _MP_CACHE[key] = best
    return best


# -- certificates ----------------------------------------------------------------


@dataclass(frozen=True)
class RoundSynthesis:
    weight: Matrix
    bias: Row
    q: ExactScalar
    shift: ExactScalar
    route: str
    repair: str  # none | projection | clamp
    equivalent_to_wl: bool
    refines_wl: bool
    row_independent: bool
    wl_class_count: int

    @property
    def projected(self) -> bool:
        return self.repair != "none"

    def to_json(self) -> dict:
        return {
            "W": matrix_to_text(self.weight),
            "bias": [v.to_text() for v in self.bias],
            "q": self.q.to_text(),
            "shift": self.shift.to_text(),
            "route": self.route,
            "repair": self.repair,
            "equivalent_to_wl": self.equivalent_to_wl,
            "refines_wl": self.refines_wl,
            "row_independent": self.row_independent,
            "wl_class_count": self.wl_class_count,
        }


@dataclass(frozen=True)
class SynthesisCertificate:
    target: str
    sigma: str
    p: ExactScalar
    uniform_q: bool
    reencoded: bool
    n: int
    rounds: tuple[RoundSynthesis, ...]
    g_fn: DegreeFn | None = None
    h_fn: DegreeFn | None = None
    m_p: ExactScalar | None = None

    @property
    def all_equivalent(self) -> bool:
        return all(r.equivalent_to_wl for r in self.rounds)

    @property
    def all_refine(self) -> bool:
        return all(r.refines_wl for r in self.rounds)

    @property
    def all_row_independent(self) -> bool:
        return all(r.row_independent for r in self.rounds)

    def to_spec(self) -> MpnnSpec:
        """The synthesized network itself, replayable through run_mpnn."""
        if self.target == "gnn-minus":
            layers = tuple(
                BuiltinLayer(
                    "gnn-minus",
                    LayerParams(w2=r.weight, p=self.p, q=r.q, sigma=self.sigma),
                )
                for r in self.rounds
            )
            return MpnnSpec(f_mode="zero", layers=layers)
        layers = tuple(
            BuiltinLayer(
                "general-dgnn",
                LayerParams(
                    w2=r.weight,
                    bias=r.bias,
                    p=self.p,
                    sigma=self.sigma,
                    g_fn=self.g_fn,
                    h_fn=self.h_fn,
                ),
            )
            for r in self.rounds
        )
        return MpnnSpec(f_mode="degree", layers=layers)

    def to_json(self) -> dict:
        out = {
            "target": self.target,
            "sigma": self.sigma,
            "p": self.p.to_text(),
            "uniform_q": self.uniform_q,
            "reencoded": self.reencoded,
            "n": self.n,
            "rounds": [r.to_json() for r in self.rounds],
            "all_equivalent_to_wl": self.all_equivalent,
            "all_refine_wl": self.all_refine,
            "all_row_independent": self.all_row_independent,
        }
        if self.g_fn is not None:
            out["g"] = self.g_fn.descriptor()
            out["h"] = self.h_fn.descriptor()
        if self.m_p is not None:
            out["m_p"] = self.m_p.to_text()
        return out

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# -- shared helpers ----------------------------------------------------------------


def _prepared_initial(g: LabelledGraph) -> tuple[Labelling, bool]:
    labelling = g.initial_labelling()
    uniq, _ = unique_rows(labelling.rows)
    if rows_linearly_independent(uniq):
        return labelling, False
    return one_hot_labelling(partition_of(labelling)), True


def _propagate(g: LabelledGraph, rows: Sequence[Row], p: ExactScalar) -> list[Row]:
    """Row v of (A + pI) @ rows: p * rows[v] + sum of neighbour rows."""
    out = []
    for v in range(1, g.n + 1):
        acc = row_scale(rows[v - 1], p)
        for u in g.neighbors(v):
            acc = row_add(acc, rows[u - 1])
        out.append(acc)
    return out


def _uniform_q(n: int) -> ExactScalar:
    return ExactScalar(1 - Fraction(1, (n + 1) ** (n + 1)))


def _check_q(q: ExactScalar) -> None:
    if q.sign() < 0 or (q - ONE).sign() >= 0:
        raise SynthesisError(f"threshold q = {q} outside [0, 1)")


def _dump(g: LabelledGraph, round_index: int, reason: str, **extra) -> dict:
    from .graphs import format_graph

    payload = {"round": round_index, "reason": reason, "graph": format_graph(g)}
    payload.update(extra)
    return payload


def _separated_block(rows: list[Row], sigma: str, q_override: ExactScalar | None):
    """Shift-to-positive + separation over a row block.

    Returns (weight columns in row space, bias entries, per-row output
    values, q, shift).  The shift is folded into the bias through the
    all-ones image of the mixing column 1_w X = (sum z) x.
    """
    uniq, _ = unique_rows(rows)
    minimum = min(v for row in uniq for v in row)
    zero_row = any(all(v.is_zero for v in row) for row in uniq)
    if minimum.sign() < 0:
        shift = ONE - minimum
    elif zero_row:
        shift = ONE
    else:
        shift = ZERO
    c_rows = uniq if shift.is_zero else [tuple(v + shift for v in row) for row in uniq]
    sep = _separation(tuple(c_rows), sigma)
    q = sep.q if q_override is None else q_override
    _check_q(q)
    if q_override is not None and determinant(_activated(c_rows, sep.x_matrix, q, sigma)).is_zero:
        raise SynthesisError(
            "uniform threshold breaks non-singularity on this round",
            {"q": q.to_text()},
        )
    z_total = sum(sep.z, start=ZERO)
    bias = tuple(shift * z_total * xj - q for xj in sep.x_row)
    values = [
        tuple(activate(v + b, sigma) for v, b in zip(row_mat(row, sep.x_matrix), bias))
        for row in rows
    ]
    return sep.x_matrix, bias, values, q, shift


def _find_clamp_column(
    rows: list[Row],
    wl_part: Partition,
    a: int,
    b: int,
    kernel: Matrix,
    k_cols: int,
    sigma: str,
):
    """A direction w and threshold tau with sigma(row . w - tau) constant on
    every reference class yet different for rows a and b, or None.

    Classes whose projections differ along w must fall entirely into the
    clamp band (below tau); kernel offsets shift whole classes relative to
    each other, which often lifts the target pair clear of that band.
    """
    width = len(rows[0])
    delta = tuple(x - y for x, y in zip(rows[a], rows[b]))
    candidates: list[Row] = [delta, tuple(-x for x in delta)]
    for l in range(k_cols):
        column = tuple(kernel[i][l] for i in range(width))
        for gamma in (1, 2, 4, 8, 16, 64):
            for d_sign in (1, -1):
                for k_sign in (1, -1):
                    candidates.append(
                        tuple(d_sign * d + (k_sign * gamma) * c for d, c in zip(delta, column))
                    )
    for j in range(width):
        if not (rows[a][j] - rows[b][j]).is_zero:
            unit = tuple(ONE if i == j else ZERO for i in range(width))
            candidates.append(unit)
            candidates.append(tuple(-x for x in unit))
    classes: dict[int, list[int]] = {}
    for v, cls in enumerate(wl_part.class_of):
        classes.setdefault(cls, []).append(v)
    half = ExactScalar(Fraction(1, 2))
    for direction in candidates:
        if all(x.is_zero for x in direction):
            continue
        u = [sum((row[i] * direction[i] for i in range(width)), start=ZERO) for row in rows]
        if (u[a] - u[b]).is_zero:
            continue
        # the column's behaviour changes only when tau crosses a projection
        # value, so midpoints of consecutive distinct values cover every band
        distinct = []
        for value in sorted(u):
            if not distinct or value != distinct[-1]:
                distinct.append(value)
        thresholds = [(s + t) * half for s, t in zip(distinct, distinct[1:])]
        thresholds.append(distinct[0] - ONE)
        for tau in thresholds:
            values = [activate(u[v] - tau, sigma) for v in range(len(rows))]
            if values[a] == values[b]:
                continue
            if any(
                any(values[v] != values[members[0]] for v in members[1:])
                for members in classes.values()
            ):
                continue
            return direction, tau, values
    return None


def _clamp_repair(
    rows: list[Row],
    kernel: Matrix,
    k_cols: int,
    wl_part: Partition,
    sigma: str,
):
    """Kernel columns plus clamp columns realizing the reference partition.

    Returns (base rows, [(direction, tau, output values)]) or None when some
    torn pair admits no legal threshold (nested class values) or no set of
    thresholds makes the class rows independent.

    Independence is decided on a proxy: the separated kernel block assigns
    each base class an independent row, which has the same joint rank as a
    base-class one-hot, so [one-hot | clamp values | 1] is checked exactly.
    """
    n = len(rows)
    base = [row_mat(row, kernel) for row in rows] if k_cols else [() for _ in rows]
    base_part = Partition.from_keys([tuple(r) for r in base])
    prefix = [
        tuple(ONE if j == base_part.class_of[v] else ZERO for j in range(base_part.num_classes))
        for v in range(n)
    ]
    reps = []
    seen: set[int] = set()
    for v, cls in enumerate(wl_part.class_of):
        if cls not in seen:
            seen.add(cls)
            reps.append(v)
    suffix: list[tuple[Row, ExactScalar, list[ExactScalar]]] = []

    def proxy_rows() -> list[Row]:
        return [prefix[v] + tuple(col[2][v] for col in suffix) + (ONE,) for v in range(n)]

    for _ in range(wl_part.num_classes + 6):
        proxy = proxy_rows()
        violation = partition_refines_violation(Partition.from_keys(proxy), wl_part)
        if violation is not None:
            a, b = violation
            column = _find_clamp_column(rows, wl_part, a - 1, b - 1, kernel, k_cols, sigma)
            if column is None:
                return None
            suffix.append(column)
            continue
        rep_rows = [proxy[v] for v in reps]
        current_rank = rank(rep_rows)
        if current_rank == len(reps):
            return base, suffix
        improved = False
        for i, a in enumerate(reps):
            for b in reps[i + 1 :]:
                column = _find_clamp_column(rows, wl_part, a, b, kernel, k_cols, sigma)
                if column is None:
                    continue
                trial = [rep_rows[j] + (column[2][v],) for j, v in enumerate(reps)]
                if rank(trial) > current_rank:
                    suffix.append(column)
                    improved = True
                    break
            if improved:
                break
        if not improved:
            return None
    return None


def synthesize_gnn_minus(
    g: LabelledGraph,
    rounds: int,
    sigma: str,
    p: ExactScalar | None = None,
    uniform_q: bool = False,
) -> SynthesisCertificate:
    """Per-round weights W = U X with bias -q*1 reproducing refinement exactly.

    p defaults to 1/2 and must lie strictly inside (0, 1).  Every round is
    verified for partition equivalence with the refinement reference and for
    linear independence of its unique label rows; failures raise.
    """
    if sigma not in ("relu", "sign"):
        raise ValueError(f"activation must be 'relu' or 'sign', got {sigma!r}")
    if rounds < 1:
        raise ValueError("need at least one round")
    p = ExactScalar(Fraction(1, 2)) if p is None else ExactScalar(p)
    if p.sign() <= 0 or (p - ONE).sign() >= 0:
        raise ValueError(f"p = {p} must lie strictly between 0 and 1")
    labelling, reencoded = _prepared_initial(g)
    reference = wl_partitions(g, rounds)
    synthesized: list[RoundSynthesis] = []
    rows = list(labelling.rows)
    for t in range(1, rounds + 1):
        uniq, classes = unique_rows(rows)
        try:
            u_matrix = right_inverse(rows)
        except ValueError as exc:
            raise SynthesisError(
                "unique label rows lost linear independence",
                _dump(g, t, str(exc)),
            ) from exc
        m = len(uniq)
        onehot = [tuple(ONE if j == classes[v] else ZERO for j in range(m)) for v in range(g.n)]
        counts = _propagate(g, onehot, p)
        c_rows, _ = unique_rows(counts)
        sep = _separation(tuple(c_rows), sigma)
        q = _uniform_q(g.n) if uniform_q else sep.q
        _check_q(q)
        if uniform_q and determinant(_activated(c_rows, sep.x_matrix, q, sigma)).is_zero:
            raise SynthesisError(
                "uniform threshold breaks non-singularity on this round",
                _dump(g, t, "uniform q too small", q=q.to_text()),
            )
        weight = mat_mul(u_matrix, sep.x_matrix)
        new_rows = [
            tuple(activate(v - q, sigma) for v in row_mat(row, sep.x_matrix)) for row in counts
        ]
        new_partition = Partition.from_keys(new_rows)
        equivalent = new_partition == reference[t]
        uniq_new, _ = unique_rows(new_rows)
        independent = rows_linearly_independent(uniq_new)
        if not equivalent or not independent:
            raise SynthesisError(
                f"round {t} verification failed (equivalent={equivalent}, independent={independent})",
                _dump(
                    g,
                    t,
                    "gnn-minus round does not match the refinement reference",
                    computed=[c.to_text() for row in new_rows for c in row],
                    expected_classes=list(reference[t].class_of),
                ),
            )
        width = len(c_rows)
        synthesized.append(
            RoundSynthesis(
                weight=weight,
                bias=tuple(-q for _ in range(width)),
                q=q,
                shift=ZERO,
                route="paper",
                repair="none",
                equivalent_to_wl=equivalent,
                refines_wl=True,
                row_independent=independent,
                wl_class_count=reference[t].num_classes,
            )
        )
        rows = new_rows
    return SynthesisCertificate(
        target="gnn-minus",
        sigma=sigma,
        p=p,
        uniform_q=uniform_q,
        reencoded=reencoded,
        n=g.n,
        rounds=tuple(synthesized),
    )


def synthesize_dgnn6(
    g: LabelledGraph,
    rounds: int,
    sigma: str,
    g_fn: DegreeFn | None = None,
    h_fn: DegreeFn | None = None,
    uniform_q: bool = False,
) -> SynthesisCertificate:
    """Degree-normalized synthesis with p = (m_p + 1)/2; see the module docstring.

    The refinement bound (every synthesized round refines into the reference
    partition) and row independence are enforced; the per-round equivalence
    verdict is recorded in the certificate and holds whenever every label
    class the round starts from is pure in h-degree terms, or the projection
    repair restores it.
    """
    if sigma not in ("relu", "sign"):
        raise ValueError(f"activation must be 'relu' or 'sign', got {sigma!r}")
    if rounds < 1:
        raise ValueError("need at least one round")
    g_fn = g_fn or DegreeFn.inv_sqrt_1pd()
    h_fn = h_fn or DegreeFn.inv_sqrt_1pd()
    degrees = g.degrees()
    for d in sorted(set(degrees)):
        for fn, name in ((g_fn, "g"), (h_fn, "h")):
            if fn.value(d).sign() <= 0:
                raise ValueError(f"{name}({d}) must be positive")
    m_p = compute_mp(g, g_fn)
    p = (m_p + ONE) * ExactScalar(Fraction(1, 2))
    assert m_p < p < ONE
    g_values = [g_fn.value(d) for d in degrees]
    h_values = [h_fn.value(d) for d in degrees]
    labelling, reencoded = _prepared_initial(g)
    reference = wl_partitions(g, rounds)
    synthesized: list[RoundSynthesis] = []
    rows = list(labelling.rows)
    for t in range(1, rounds + 1):
        scaled = [row_scale(rows[v], h_values[v]) for v in range(g.n)]
        uniq_scaled, scaled_class = unique_rows(scaled)
        if rows_linearly_independent(uniq_scaled):
            route = "paper"
            u_matrix = right_inverse(scaled)
            m = len(uniq_scaled)
            basis_rows = [
                tuple(ONE if j == scaled_class[v] else ZERO for j in range(m)) for v in range(g.n)
            ]
            pre = _propagate(g, basis_rows, p)
            v_map: Matrix | None = u_matrix
        else:
            route = "direct"
            pre = _propagate(g, scaled, p)
            v_map = None
        target = [row_scale(pre[v], g_values[v]) for v in range(g.n)]
        width = len(target[0])
        wl_part = reference[t]
        q_override = _uniform_q(g.n) if uniform_q else None
        diffs: list[Row] = []
        first_of_class: dict[int, int] = {}
        for v in range(g.n):
            cls = wl_part.class_of[v]
            if cls not in first_of_class:
                first_of_class[cls] = v
            else:
                rep = first_of_class[cls]
                if target[rep] != target[v]:
                    diffs.append(tuple(a - b for a, b in zip(target[rep], target[v])))
        variants: list[tuple[str, object]] = []
        if diffs:
            kernel = nullspace_basis(diffs, width)
            k_cols = len(kernel[0]) if kernel else 0
            projected_rows = [row_mat(row, kernel) for row in target] if k_cols else None
            if projected_rows is not None and partition_refines(
                Partition.from_keys(projected_rows), wl_part
            ):
                variants.append(("projection", (projected_rows, kernel)))
            else:
                repaired = _clamp_repair(target, kernel, k_cols, wl_part, sigma)
                if repaired is not None:
                    variants.append(("clamp", (kernel, k_cols, *repaired)))
        variants.append(("none", None))
        chosen = None
        for repair, payload in variants:
            try:
                if repair == "clamp":
                    kernel, k_cols, base, suffix = payload
                    if k_cols:
                        x_matrix, bias_base, base_vals, q, shift = _separated_block(
                            base, sigma, q_override
                        )
                        weight_cols = mat_mul(kernel, x_matrix)
                    else:
                        bias_base, base_vals, q, shift = (), [() for _ in target], ZERO, ZERO
                        weight_cols = tuple(() for _ in range(width))
                    lam_weight = tuple(
                        tuple(weight_cols[i])
                        + tuple(col[0][i] for col in suffix)
                        + (ZERO,)
                        for i in range(width)
                    )
                    bias = tuple(bias_base) + tuple(-col[1] for col in suffix) + (ONE,)
                    new_rows = [
                        tuple(base_vals[v])
                        + tuple(col[2][v] for col in suffix)
                        + (ONE,)
                        for v in range(g.n)
                    ]
                elif repair == "projection":
                    projected_rows, kernel = payload
                    x_matrix, bias, new_rows, q, shift = _separated_block(
                        projected_rows, sigma, q_override
                    )
                    lam_weight = mat_mul(kernel, x_matrix)
                else:
                    x_matrix, bias, new_rows, q, shift = _separated_block(
                        target, sigma, q_override
                    )
                    lam_weight = x_matrix
            except ValueError:
                continue
            new_partition = Partition.from_keys(new_rows)
            refined = partition_refines(new_partition, wl_part)
            uniq_new, _ = unique_rows(new_rows)
            independent = rows_linearly_independent(uniq_new)
            if refined and independent:
                chosen = (repair, lam_weight, bias, new_rows, q, shift, new_partition)
                break
        if chosen is None:
            raise SynthesisError(
                f"round {t}: no construction satisfied the refinement bound and independence",
                _dump(g, t, "degree-normalized round failed verification", route=route),
            )
        repair, lam_weight, bias, new_rows, q, shift, new_partition = chosen
        weight = lam_weight if v_map is None else mat_mul(v_map, lam_weight)
        synthesized.append(
            RoundSynthesis(
                weight=weight,
                bias=bias,
                q=q,
                shift=shift,
                route=route,
                repair=repair,
                equivalent_to_wl=new_partition == wl_part,
                refines_wl=True,
                row_independent=True,
                wl_class_count=wl_part.num_classes,
            )
        )
        rows = new_rows
    return SynthesisCertificate(
        target="dgnn6",
        sigma=sigma,
        p=p,
        uniform_q=uniform_q,
        reencoded=reencoded,
        n=g.n,
        rounds=tuple(synthesized),
        g_fn=g_fn,
        h_fn=h_fn,
        m_p=m_p,
    )
