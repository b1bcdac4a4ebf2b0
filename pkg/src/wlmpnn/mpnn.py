"""Exact message-passing execution and the built-in network families.

A network is a declarative MpnnSpec: a round count, an f-mode (``zero``
erases degree information, ``degree`` passes endpoint degrees to every
message), and one layer per round.  Layers are either a builtin family with
exact parameters or custom message/update closures.  Execution sums each
vertex's messages over its neighbourhood and applies the update, entirely
in the surd field, and records the labelling and induced partition per
round.

Degree-aware builtins all share the closed form

    diag(g) (A + pI) diag(h) L W2 + L W1 + B

with degree-determined positive g and h; the message carries the self term
scaled by 1/d_v so that summation over the d_v neighbours reproduces it
exactly once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .graphs import Label, LabelledGraph, Labelling, Partition, partition_of
from .linalg import Matrix, Row, matrix_from_text, matrix_to_text, row_add, row_mat, row_scale
from .surd import ONE, ZERO, ExactScalar, activate, parse_scalar

MsgFn = Callable[[Label, Label, int, int], Label]
UpdFn = Callable[[Label, Label], Label]


class SpecValidationError(ValueError):
    """A network description violates its family's contract."""


class DimensionError(ValueError):
    """Matrix or label widths do not chain."""


# -- degree-determined scalar functions ---------------------------------------


@dataclass(frozen=True)
class DegreeFn:
    """A positive scalar function of the vertex degree, exact on every degree.

    Named kinds keep specs serializable; ``blend_inv_sqrt`` is
    (r + (1-r)d)**(-1/2) and requires a rational r in (0, 1] so values stay
    inside the surd field.
    """

    kind: str
    r: ExactScalar | None = None
    table: tuple[tuple[int, ExactScalar], ...] | None = None

    @staticmethod
    def one() -> "DegreeFn":
        return DegreeFn("one")

    @staticmethod
    def inv_d() -> "DegreeFn":
        return DegreeFn("inv_d")

    @staticmethod
    def inv_sqrt_d() -> "DegreeFn":
        return DegreeFn("inv_sqrt_d")

    @staticmethod
    def inv_1pd() -> "DegreeFn":
        return DegreeFn("inv_1pd")

    @staticmethod
    def inv_sqrt_1pd() -> "DegreeFn":
        return DegreeFn("inv_sqrt_1pd")

    @staticmethod
    def blend_inv_sqrt(r: ExactScalar) -> "DegreeFn":
        r = ExactScalar(r) if not isinstance(r, ExactScalar) else r
        if not r.is_rational:
            raise SpecValidationError("blend parameter r must be rational to stay in the surd field")
        if not (ZERO < r <= ONE):
            raise SpecValidationError("blend parameter r must satisfy 0 < r <= 1")
        return DegreeFn("blend_inv_sqrt", r=r)

    @staticmethod
    def from_table(values: dict[int, ExactScalar]) -> "DegreeFn":
        return DegreeFn("table", table=tuple(sorted(values.items())))

    def value(self, degree: int) -> ExactScalar:
        if degree < 1:
            raise ValueError(f"degree must be positive, got {degree}")
        if self.kind == "one":
            return ONE
        if self.kind == "inv_d":
            return ExactScalar(Fraction(1, degree))
        if self.kind == "inv_sqrt_d":
            return _inv_sqrt(Fraction(degree))
        if self.kind == "inv_1pd":
            return ExactScalar(Fraction(1, 1 + degree))
        if self.kind == "inv_sqrt_1pd":
            return _inv_sqrt(Fraction(1 + degree))
        if self.kind == "blend_inv_sqrt":
            blended = self.r.as_fraction() + (1 - self.r.as_fraction()) * degree
            return _inv_sqrt(blended)
        if self.kind == "table":
            for d, v in self.table:
                if d == degree:
                    return v
            raise ValueError(f"degree {degree} missing from tabulated function")
        raise ValueError(f"unknown DegreeFn kind {self.kind!r}")

    @property
    def is_one(self) -> bool:
        if self.kind == "one":
            return True
        if self.kind == "table":
            return all(v == ONE for _, v in self.table)
        return False

    def descriptor(self) -> str:
        if self.kind == "blend_inv_sqrt":
            return f"blend_inv_sqrt({self.r.to_text()})"
        if self.kind == "table":
            return "table(" + "; ".join(f"{d}:{v.to_text()}" for d, v in self.table) + ")"
        return self.kind


def _inv_sqrt(q: Fraction) -> ExactScalar:
    """(num/den)**(-1/2) = sqrt(num*den)/num, exact."""
    if q <= 0:
        raise ValueError(f"cannot take an inverse square root of {q}")
    return ExactScalar.sqrt(q.numerator * q.denominator, Fraction(1, q.numerator))


def degree_fn_from_name(name: str) -> DegreeFn:
    simple = {
        "one": DegreeFn.one,
        "inv_d": DegreeFn.inv_d,
        "inv_sqrt_d": DegreeFn.inv_sqrt_d,
        "inv_1pd": DegreeFn.inv_1pd,
        "inv_sqrt_1pd": DegreeFn.inv_sqrt_1pd,
    }
    if name in simple:
        return simple[name]()
    if name.startswith("blend_inv_sqrt(") and name.endswith(")"):
        return DegreeFn.blend_inv_sqrt(parse_scalar(name[len("blend_inv_sqrt(") : -1]))
    raise SpecValidationError(f"unknown degree function {name!r}")


# -- layer descriptors ---------------------------------------------------------


@dataclass(frozen=True)
class LayerParams:
    w1: Matrix | None = None
    w2: Matrix | None = None
    bias: Row | None = None
    p: ExactScalar | None = None
    q: ExactScalar | None = None
    r: ExactScalar | None = None
    sigma: str = "relu"
    g_fn: DegreeFn | None = None
    h_fn: DegreeFn | None = None


@dataclass(frozen=True)
class BuiltinLayer:
    family: str
    params: LayerParams


@dataclass(frozen=True)
class CustomLayer:
    """Closure-defined layer.  Closures may carry state (the encoded
    refinement caches the labels it injects); the engine guarantees all of a
    round's messages are computed before any update runs."""

    msg: MsgFn
    upd: UpdFn


Layer = BuiltinLayer | CustomLayer


@dataclass(frozen=True)
class MpnnSpec:
    f_mode: str
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if self.f_mode not in ("zero", "degree"):
            raise SpecValidationError(f"f_mode must be 'zero' or 'degree', got {self.f_mode!r}")
        if not self.layers:
            raise SpecValidationError("a network needs at least one round")

    @property
    def rounds(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class RunTrace:
    labellings: tuple[Labelling, ...]
    partitions: tuple[Partition, ...]

    @property
    def rounds(self) -> int:
        return len(self.labellings) - 1

    def to_json(self) -> dict:
        return {
            "rounds": [list(p.class_of) for p in self.partitions],
            "labels": [[[x.to_text() for x in row] for row in lab.rows] for lab in self.labellings],
        }


ANONYMOUS_FAMILIES = {"gnn", "gnn-minus"}
DEGREE_FAMILIES = {"gcn-kipf", "dgnn1", "dgnn2", "dgnn3", "dgnn4", "dgnn5", "dgnn6", "general-dgnn"}

_UNIT = ExactScalar(1)

_DGNN_TABLE = {
    # family: (g kind, h kind, fixed p, tie self weight to W)
    "dgnn1": ("inv_d", "one", ZERO, False),
    "dgnn2": ("inv_sqrt_d", "inv_sqrt_d", ZERO, False),
    "dgnn3": ("inv_1pd", "one", ONE, False),
    "dgnn4": ("inv_sqrt_1pd", "inv_sqrt_1pd", ONE, False),
    "dgnn5": ("inv_sqrt_d", "inv_sqrt_d", ZERO, True),
}


def _require(condition: bool, message: str):
    if not condition:
        raise SpecValidationError(message)


def _unit_interval(v: ExactScalar, name: str, strict_low=False, strict_high=False):
    low_ok = v.sign() > 0 if strict_low else v.sign() >= 0
    high = (v - ONE).sign()
    high_ok = high < 0 if strict_high else high <= 0
    _require(low_ok and high_ok, f"{name} = {v} outside the allowed unit-interval range")


def _reject_extras(family: str, params: LayerParams, *names: str):
    for name in names:
        _require(getattr(params, name) is None, f"{family} does not take the parameter {name}")


def _resolve_degree_family(family: str, params: LayerParams):
    """Normalize any degree-aware builtin into (w1, w2, bias, p, g, h, sigma)."""
    if family == "gcn-kipf":
        _require(params.w2 is not None, "gcn-kipf requires the weight matrix")
        _require(params.w1 is None and params.bias is None, "gcn-kipf fixes W1 = 0 and no bias")
        _reject_extras(family, params, "p", "q", "r", "g_fn", "h_fn")
        g = DegreeFn.inv_sqrt_1pd()
        return None, params.w2, None, ONE, g, g, params.sigma
    if family in _DGNN_TABLE:
        g_kind, h_kind, p, tie = _DGNN_TABLE[family]
        _require(params.w2 is not None, f"{family} requires the weight matrix")
        _require(params.w1 is None, f"{family} has no separate self weight")
        _reject_extras(family, params, "p", "q", "r", "g_fn", "h_fn")
        w1 = params.w2 if tie else None
        return w1, params.w2, params.bias, p, DegreeFn(g_kind), DegreeFn(h_kind), params.sigma
    if family == "dgnn6":
        _require(params.w2 is not None, "dgnn6 requires the weight matrix")
        _require(params.r is not None and params.p is not None, "dgnn6 requires parameters r and p")
        _require(params.w1 is None, "dgnn6 has no separate self weight")
        _reject_extras(family, params, "q", "g_fn", "h_fn")
        _unit_interval(params.r, "r", strict_low=True)
        _unit_interval(params.p, "p")
        g = DegreeFn.blend_inv_sqrt(params.r)
        return None, params.w2, params.bias, params.p, g, g, params.sigma
    if family == "general-dgnn":
        _require(params.w2 is not None, "general-dgnn requires the neighbour weight matrix")
        _require(params.p is not None, "general-dgnn requires the parameter p")
        _require(params.g_fn is not None and params.h_fn is not None, "general-dgnn requires g and h")
        _reject_extras(family, params, "q", "r")
        _unit_interval(params.p, "p")
        return params.w1, params.w2, params.bias, params.p, params.g_fn, params.h_fn, params.sigma
    raise SpecValidationError(f"unknown degree-aware family {family!r}")


def builtin_layer(family: str, params: LayerParams) -> tuple[MsgFn, UpdFn]:
    """Message/update pair for a builtin family; raises on missing or extra parameters."""
    sigma = params.sigma
    if sigma not in ("relu", "sign", "none"):
        raise SpecValidationError(f"unknown activation {sigma!r}")
    if family == "gnn":
        _require(params.w1 is not None and params.w2 is not None, "gnn requires W1 and W2")
        _reject_extras(family, params, "p", "q", "r", "g_fn", "h_fn")
        w1, w2, bias = params.w1, params.w2, params.bias

        def msg(x, y, fv, fu):
            return row_mat(y, w2)

        def upd(x, m):
            out = row_add(row_mat(x, w1), m)
            if bias is not None:
                out = row_add(out, bias)
            return tuple(activate(v, sigma) for v in out)

        return msg, upd
    if family == "gnn-minus":
        _require(params.w2 is not None, "gnn-minus requires the weight matrix")
        _require(params.w1 is None and params.bias is None, "gnn-minus has a single weight matrix and -q bias")
        _require(params.p is not None and params.q is not None, "gnn-minus requires p and q")
        _reject_extras(family, params, "r", "g_fn", "h_fn")
        _unit_interval(params.p, "p")
        _unit_interval(params.q, "q")
        w2, p, q = params.w2, params.p, params.q

        def msg(x, y, fv, fu):
            return row_mat(y, w2)

        def upd(x, m):
            pre = row_add(row_scale(row_mat(x, w2), p), m)
            return tuple(activate(v - q, sigma) for v in pre)

        return msg, upd
    if family in DEGREE_FAMILIES:
        w1, w2, bias, p, g_fn, h_fn, sigma = _resolve_degree_family(family, params)
        return _degree_functions(w1, w2, bias, p, g_fn, h_fn, sigma)
    raise SpecValidationError(f"unknown family {family!r}")


def _degree_functions(w1, w2, bias, p, g_fn: DegreeFn, h_fn: DegreeFn, sigma: str):
    xw2_cache: dict[Label, Row] = {}
    gh_cache: dict[int, ExactScalar] = {}
    p_is_zero = p.is_zero

    def xw2(x: Label) -> Row:
        out = xw2_cache.get(x)
        if out is None:
            out = row_mat(x, w2)
            xw2_cache[x] = out
        return out

    def msg(x, y, dv, du):
        if dv < 1 or du < 1:
            raise SpecValidationError("degree-aware family run without degree information")
        gv = g_fn.value(dv)
        neighbour = row_scale(xw2(y), gv * h_fn.value(du))
        self_part: Row | None = None
        if w1 is not None:
            self_part = row_mat(x, w1)
        if not p_is_zero:
            key = dv
            factor = gh_cache.get(key)
            if factor is None:
                factor = p * gv * h_fn.value(dv)
                gh_cache[key] = factor
            scaled = row_scale(xw2(x), factor)
            self_part = scaled if self_part is None else row_add(self_part, scaled)
        if self_part is None:
            return neighbour
        renorm = ExactScalar(Fraction(1, dv))
        return row_add(row_scale(self_part, renorm), neighbour)

    def upd(x, m):
        out = m if bias is None else row_add(m, bias)
        return tuple(activate(v, sigma) for v in out)

    return msg, upd


def _layer_functions(layer: Layer) -> tuple[MsgFn, UpdFn]:
    if isinstance(layer, BuiltinLayer):
        return builtin_layer(layer.family, layer.params)
    return layer.msg, layer.upd


def _check_builtin_dims(layer: BuiltinLayer, width: int) -> None:
    params = layer.params
    for name, m in (("W1", params.w1), ("W2", params.w2)):
        if m is not None and len(m) != width:
            raise DimensionError(
                f"{layer.family} {name} has {len(m)} rows but incoming labels have width {width}"
            )
    out_widths = {len(m[0]) for m in (params.w1, params.w2) if m is not None}
    if len(out_widths) > 1:
        raise DimensionError(f"{layer.family} weight matrices disagree on output width: {out_widths}")
    if params.bias is not None and out_widths and len(params.bias) not in out_widths:
        raise DimensionError(f"{layer.family} bias width {len(params.bias)} does not match output")


def run_mpnn(g: LabelledGraph, spec: MpnnSpec) -> RunTrace:
    """Execute the network on the graph, exactly, recording every round."""
    if spec.f_mode == "zero":
        for layer in spec.layers:
            if isinstance(layer, BuiltinLayer) and layer.family in DEGREE_FAMILIES:
                raise SpecValidationError(
                    f"family {layer.family!r} uses degree information but f_mode is 'zero'"
                )
    labelling = g.initial_labelling()
    labellings = [labelling]
    partitions = [partition_of(labelling)]
    degree_mode = spec.f_mode == "degree"
    f_values = [g.degree(v) if degree_mode else 0 for v in range(1, g.n + 1)]
    for round_index, layer in enumerate(spec.layers, start=1):
        if isinstance(layer, BuiltinLayer):
            _check_builtin_dims(layer, labelling.dim)
        msg, upd = _layer_functions(layer)
        aggregated: list[Label] = []
        msg_width: int | None = None
        for v in range(1, g.n + 1):
            x = labelling.row_of(v)
            acc: Row | None = None
            for u in g.neighbors(v):
                part = msg(x, labelling.row_of(u), f_values[v - 1], f_values[u - 1])
                if msg_width is None:
                    msg_width = len(part)
                elif len(part) != msg_width:
                    raise DimensionError(
                        f"round {round_index}: message width {len(part)} != {msg_width}"
                    )
                acc = part if acc is None else row_add(acc, part)
            aggregated.append(acc)
        new_rows: list[Label] = []
        out_width: int | None = None
        for v in range(1, g.n + 1):
            row = upd(labelling.row_of(v), aggregated[v - 1])
            if out_width is None:
                out_width = len(row)
            elif len(row) != out_width:
                raise DimensionError(f"round {round_index}: update width {len(row)} != {out_width}")
            new_rows.append(tuple(row))
        labelling = Labelling(tuple(new_rows))
        labellings.append(labelling)
        partitions.append(partition_of(labelling))
    return RunTrace(tuple(labellings), tuple(partitions))


# -- derived network constructions ---------------------------------------------


def degree_probe_spec(s0: int | None = None) -> MpnnSpec:
    """One anonymous round appending the vertex degree: constant-1 messages,
    update (x, z) -> (x, z)."""

    def msg(x, y, fv, fu):
        return (_UNIT,)

    def upd(x, m):
        return (*x, m[0])

    return MpnnSpec(f_mode="zero", layers=(CustomLayer(msg=msg, upd=upd),))


def lift_plus_one(spec: MpnnSpec) -> MpnnSpec:
    """Anonymous T+1-round network replaying a degree-aware one a round late.

    Round 1 appends degrees to the labels; round t >= 2 replays round t-1 of
    the original, reading endpoint degrees from the appended component and
    carrying it forward.  The lifted labelling at round t+1 is exactly the
    original round-t labelling extended with the vertex degree.  Anonymous
    networks are accepted too (they are degree-aware networks that ignore
    the degree arguments); their lift carries an unused degree column.
    """
    probe = degree_probe_spec().layers[0]
    lifted: list[Layer] = [probe]
    for layer in spec.layers:
        base_msg, base_upd = _layer_functions(layer)

        def make(base_msg=base_msg, base_upd=base_upd):
            def msg(x, y, fv, fu):
                return base_msg(x[:-1], y[:-1], x[-1].as_int(), y[-1].as_int())

            def upd(x, m):
                return (*base_upd(x[:-1], m), x[-1])

            return CustomLayer(msg=msg, upd=upd)

        lifted.append(make())
    return MpnnSpec(f_mode="zero", layers=tuple(lifted))


def anonymize_h_const(spec: MpnnSpec) -> MpnnSpec:
    """Rewrite a degree-aware network with h == 1 as an anonymous one.

    The message becomes (y W2, 1); the update recovers the degree from the
    aggregated count and applies the g scaling after aggregation, which
    reproduces the original labels exactly.
    """
    layers: list[Layer] = []
    for layer in spec.layers:
        if not isinstance(layer, BuiltinLayer):
            raise SpecValidationError("anonymization handles builtin degree-aware layers only")
        if layer.family not in ("dgnn1", "dgnn3", "general-dgnn"):
            if layer.family in DEGREE_FAMILIES:
                raise SpecValidationError(f"{layer.family} does not have h constantly 1")
            raise SpecValidationError(f"{layer.family} is not a degree-aware builtin")
        w1, w2, bias, p, g_fn, h_fn, sigma = _resolve_degree_family(layer.family, layer.params)
        if not h_fn.is_one:
            raise SpecValidationError("h is not constantly 1")

        def make(w1=w1, w2=w2, bias=bias, p=p, g_fn=g_fn, h_fn=h_fn, sigma=sigma):
            def msg(x, y, fv, fu):
                return (*row_mat(y, w2), _UNIT)

            def upd(x, z):
                inner, count = z[:-1], z[-1].as_int()
                gv = g_fn.value(count)
                out = row_scale(inner, gv)
                if w1 is not None:
                    out = row_add(out, row_mat(x, w1))
                if not p.is_zero:
                    out = row_add(out, row_scale(row_mat(x, w2), p * gv * h_fn.value(count)))
                if bias is not None:
                    out = row_add(out, bias)
                return tuple(activate(v, sigma) for v in out)

            return CustomLayer(msg=msg, upd=upd)

        layers.append(make())
    return MpnnSpec(f_mode="zero", layers=tuple(layers))


def wrap_comb_aggr(
    comb: Callable[[Label, Label], Label],
    aggr_h: Callable[[Label], Label],
    aggr_g: Callable[[Label], Label],
    rounds: int,
) -> MpnnSpec:
    """Combination/aggregation network: message h(y), update comb(x, g(sum))."""

    def msg(x, y, fv, fu):
        return aggr_h(y)

    def upd(x, m):
        return comb(x, aggr_g(m))

    return MpnnSpec(f_mode="zero", layers=tuple(CustomLayer(msg=msg, upd=upd) for _ in range(rounds)))


# -- serialization ---------------------------------------------------------------


def spec_to_json(spec: MpnnSpec) -> dict:
    layers = []
    for layer in spec.layers:
        if not isinstance(layer, BuiltinLayer):
            raise SpecValidationError("custom layers are not serializable")
        params = layer.params
        entry: dict = {"family": layer.family, "sigma": params.sigma}
        if layer.family in ("gnn", "general-dgnn"):
            if params.w1 is not None:
                entry["W1"] = matrix_to_text(params.w1)
            entry["W2"] = matrix_to_text(params.w2)
        else:
            entry["W"] = matrix_to_text(params.w2)
        if params.bias is not None:
            entry["bias"] = [v.to_text() for v in params.bias]
        for name, value in (("p", params.p), ("q", params.q), ("r", params.r)):
            if value is not None:
                entry[name] = value.to_text()
        if params.g_fn is not None:
            entry["g"] = params.g_fn.descriptor()
        if params.h_fn is not None:
            entry["h"] = params.h_fn.descriptor()
        layers.append(entry)
    return {"f_mode": spec.f_mode, "rounds": spec.rounds, "layers": layers}


def spec_from_json(data: dict) -> MpnnSpec:
    layers = []
    for entry in data["layers"]:
        family = entry["family"]
        kwargs: dict = {"sigma": entry.get("sigma", "relu")}
        if "W" in entry:
            kwargs["w2"] = matrix_from_text(entry["W"])
        if "W2" in entry:
            kwargs["w2"] = matrix_from_text(entry["W2"])
        if "W1" in entry:
            kwargs["w1"] = matrix_from_text(entry["W1"])
        if "bias" in entry:
            kwargs["bias"] = tuple(parse_scalar(v) for v in entry["bias"])
        for name in ("p", "q", "r"):
            if name in entry:
                kwargs[name] = parse_scalar(entry[name])
        if "g" in entry:
            kwargs["g_fn"] = degree_fn_from_name(entry["g"])
        if "h" in entry:
            kwargs["h_fn"] = degree_fn_from_name(entry["h"])
        layers.append(BuiltinLayer(family=family, params=LayerParams(**kwargs)))
    spec = MpnnSpec(f_mode=data["f_mode"], layers=tuple(layers))
    if "rounds" in data and data["rounds"] != spec.rounds:
        raise SpecValidationError(
            f"declared rounds {data['rounds']} != {spec.rounds} layers"
        )
    return spec


def spec_to_json_text(spec: MpnnSpec) -> str:
    return json.dumps(spec_to_json(spec), indent=2, sort_keys=True)
