"""Labelled undirected graphs, vertex labellings and the coarseness order.

Vertices are 1-based integers ``1..n``.  Graphs are simple (no self-loops)
and have no isolated vertices; both are rejected at construction time, and
no flag exists to silently drop offenders.  A labelling assigns each vertex
a row of ExactScalar; two labellings compare only through row equality, so
labellings of different widths are ordered by the same relation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .surd import ONE, ZERO, ExactScalar, parse_scalar

Label = tuple[ExactScalar, ...]


class GraphFormatError(ValueError):
    """Raised for malformed graph files or invariant violations."""


@dataclass(frozen=True)
class Labelling:
    """A per-vertex assignment of equal-width label rows."""

    rows: tuple[Label, ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("labelling must cover at least one vertex")
        width = len(self.rows[0])
        if width < 1 or any(len(r) != width for r in self.rows):
            raise ValueError("label rows must share a positive width")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.rows[0])

    def row_of(self, v: int) -> Label:
        return self.rows[v - 1]


@dataclass(frozen=True)
class Partition:
    """Dense class ids per vertex, assigned by first occurrence in vertex order."""

    class_of: tuple[int, ...]

    @staticmethod
    def from_keys(keys: Sequence) -> "Partition":
        seen: dict = {}
        out = []
        for key in keys:
            if key not in seen:
                seen[key] = len(seen)
            out.append(seen[key])
        return Partition(tuple(out))

    @property
    def n(self) -> int:
        return len(self.class_of)

    @property
    def num_classes(self) -> int:
        return max(self.class_of) + 1 if self.class_of else 0

    def classes(self) -> list[list[int]]:
        """Vertex lists (1-based) per class id."""
        out: list[list[int]] = [[] for _ in range(self.num_classes)]
        for v, c in enumerate(self.class_of, start=1):
            out[c].append(v)
        return out


@dataclass(frozen=True)
class LabelledGraph:
    """Undirected simple graph with ExactScalar vertex labels."""

    n: int
    edges: frozenset[tuple[int, int]]
    labels: tuple[Label, ...]

    def __post_init__(self):
        if self.n < 1:
            raise GraphFormatError("graph needs at least one vertex")
        if len(self.labels) != self.n:
            raise GraphFormatError(f"expected {self.n} label rows, got {len(self.labels)}")
        width = len(self.labels[0])
        if width < 1 or any(len(row) != width for row in self.labels):
            raise GraphFormatError("label rows must share a positive width")
        touched = set()
        for u, v in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphFormatError(f"edge ({u},{v}) references a vertex outside 1..{self.n}")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if u > v:
                raise GraphFormatError("edges must be stored as ordered pairs")
            touched.add(u)
            touched.add(v)
        isolated = sorted(set(range(1, self.n + 1)) - touched)
        if isolated:
            raise GraphFormatError(f"isolated vertices are not allowed: {isolated}")

    @cached_property
    def _neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[u - 1].append(v)
            out[v - 1].append(u)
        return tuple(tuple(sorted(ns)) for ns in out)

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check_vertex(v)
        return self._neighbors[v - 1]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self._neighbors[v - 1])

    def degrees(self) -> tuple[int, ...]:
        return tuple(len(self._neighbors[v]) for v in range(self.n))

    def label_of(self, v: int) -> Label:
        self._check_vertex(v)
        return self.labels[v - 1]

    @property
    def label_dim(self) -> int:
        return len(self.labels[0])

    def initial_labelling(self) -> Labelling:
        return Labelling(self.labels)

    def _check_vertex(self, v: int):
        if not (1 <= v <= self.n):
            raise GraphFormatError(f"vertex {v} out of range 1..{self.n}")


def make_graph(n: int, edges: Sequence[tuple[int, int]], labels: Sequence[Sequence]) -> LabelledGraph:
    norm_edges = set()
    for u, v in edges:
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}")
        norm_edges.add((min(u, v), max(u, v)))
    rows = tuple(
        tuple(x if isinstance(x, ExactScalar) else ExactScalar(x) for x in row) for row in labels
    )
    return LabelledGraph(n=n, edges=frozenset(norm_edges), labels=rows)


def parse_graph(text: str) -> LabelledGraph:
    """Parse the graph file format.

    ``#`` starts a comment line, ``n <count>`` appears once, each vertex has
    one ``v <id> <width>: <scalar>, <scalar>, ...`` line and each edge one
    ``e <u> <v>`` line.  Scalars use the exact_field text syntax.
    """
    n: int | None = None
    labels: dict[int, Label] = {}
    widths: set[int] = set()
    edges: list[tuple[int, int]] = []
    seen_edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind = line.split(None, 1)[0]
        if kind == "n":
            if n is not None:
                raise GraphFormatError(f"line {lineno}: duplicate n line")
            try:
                n = int(line.split()[1])
            except (IndexError, ValueError) as exc:
                raise GraphFormatError(f"line {lineno}: malformed n line") from exc
        elif kind == "v":
            head, _, tail = line.partition(":")
            parts = head.split()
            if len(parts) != 3 or not tail.strip():
                raise GraphFormatError(f"line {lineno}: malformed vertex line")
            try:
                vid, width = int(parts[1]), int(parts[2])
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: malformed vertex line") from exc
            if vid in labels:
                raise GraphFormatError(f"line {lineno}: duplicate vertex {vid}")
            try:
                row = tuple(parse_scalar(cell) for cell in tail.split(","))
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: {exc}") from exc
            if len(row) != width:
                raise GraphFormatError(
                    f"line {lineno}: vertex {vid} declares width {width} but lists {len(row)} scalars"
                )
            widths.add(width)
            labels[vid] = row
        elif kind == "e":
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(f"line {lineno}: malformed edge line")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: malformed edge line") from exc
            if u == v:
                raise GraphFormatError(f"line {lineno}: self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen_edges:
                raise GraphFormatError(f"line {lineno}: duplicate edge {key}")
            seen_edges.add(key)
            edges.append(key)
        else:
            raise GraphFormatError(f"line {lineno}: unknown directive {kind!r}")
    if n is None:
        raise GraphFormatError("missing n line")
    if len(widths) > 1:
        raise GraphFormatError(f"inconsistent label dimensions: {sorted(widths)}")
    missing = sorted(set(range(1, n + 1)) - set(labels))
    if missing:
        raise GraphFormatError(f"missing vertex lines for: {missing}")
    extra = sorted(set(labels) - set(range(1, n + 1)))
    if extra:
        raise GraphFormatError(f"vertex ids out of range 1..{n}: {extra}")
    rows = tuple(labels[v] for v in range(1, n + 1))
    return LabelledGraph(n=n, edges=frozenset(edges), labels=rows)


def format_graph(g: LabelledGraph) -> str:
    """Canonical graph file text; parse(format(g)) round-trips bit-exactly."""
    lines = [f"n {g.n}"]
    for v in range(1, g.n + 1):
        row = ", ".join(x.to_text() for x in g.label_of(v))
        lines.append(f"v {v} {g.label_dim}: {row}")
    for u, v in sorted(g.edges):
        lines.append(f"e {u} {v}")
    return "\n".join(lines) + "\n"


# -- the coarseness order ---------------------------------------------------


def partition_of(labelling: Labelling) -> Partition:
    return Partition.from_keys(labelling.rows)


def partition_refines(fine: Partition, coarse: Partition) -> bool:
    """True iff vertices equal under fine are equal under coarse."""
    if fine.n != coarse.n:
        raise ValueError(f"vertex count mismatch: {fine.n} vs {coarse.n}")
    seen: dict[int, int] = {}
    for fc, cc in zip(fine.class_of, coarse.class_of):
        if fc in seen:
            if seen[fc] != cc:
                return False
        else:
            seen[fc] = cc
    return True


def partition_refines_violation(fine: Partition, coarse: Partition) -> tuple[int, int] | None:
    """First (v, w) in lexicographic order with fine-equal but coarse-distinct rows."""
    if fine.n != coarse.n:
        raise ValueError(f"vertex count mismatch: {fine.n} vs {coarse.n}")
    first_seen: dict[int, int] = {}
    witness = None
    for v, (fc, cc) in enumerate(zip(fine.class_of, coarse.class_of), start=1):
        if fc not in first_seen:
            first_seen[fc] = v
        elif coarse.class_of[first_seen[fc] - 1] != cc:
            candidate = (first_seen[fc], v)
            if witness is None or candidate < witness:
                witness = candidate
    return witness


def refines(fine: Labelling, coarse: Labelling) -> bool:
    """True iff coarse is coarser than fine: equal rows in fine imply equal rows in coarse."""
    if fine.n != coarse.n:
        raise ValueError(f"vertex count mismatch: {fine.n} vs {coarse.n}")
    return partition_refines(partition_of(fine), partition_of(coarse))


def equivalent(a: Labelling, b: Labelling) -> bool:
    return refines(a, b) and refines(b, a)


def one_hot_labelling(partition: Partition) -> Labelling:
    """Re-encode a partition as one-hot rows (class count columns)."""
    k = partition.num_classes
    rows = tuple(
        tuple(ONE if j == c else ZERO for j in range(k)) for c in partition.class_of
    )
    return Labelling(rows)
