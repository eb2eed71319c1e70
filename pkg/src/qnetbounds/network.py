"""Quantum network graphs and entanglement-based cut bounds.

A network is a directed multigraph whose edges are qubit channels used
``avg_uses`` times on average.  For a bipartition of the intermediate nodes
the crossing edges are summed with a per-edge entanglement weight:

* ``versatile``: E_R on Choi-simulable channels, E_max on the rest;
* ``e_r``, ``e_max`` or ``e_sq_ub``: one measure for every edge.

The minimum over bipartitions is found by enumeration or by max-flow.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np

from .channels import (Channel, ChannelError, ChannelMeasures, KINDS, binary_entropy,
                       closed_form_measures, custom_channel, make_channel)
from .emax import UnsupportedDims, emax_sigma_sdp

MEASURES = ("e_r", "e_max", "e_sq_ub")
POLICIES = ("versatile",) + MEASURES
EXHAUSTIVE_AUTO_LIMIT = 20
EXHAUSTIVE_MAX = 28
FLOW_CUTOFF = 1e-12


class NetworkError(ValueError):
    pass


class MissingMeasure(LookupError):
    """An edge lacks the entanglement value a bound needs."""

    def __init__(self, edge_id: int, edge: "Edge", measure: str):
        self.edge_id = edge_id
        self.measure = measure
        super().__init__(
            f"edge {edge_id} ({edge.source}->{edge.target}, {edge.channel.kind} "
            f"{edge.channel.param:g}) has no value for {measure}")


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    channel: Channel
    avg_uses: float = 1.0
    overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.avg_uses) and self.avg_uses >= 0):
            raise NetworkError(f"avg_uses must be a nonnegative real, got {self.avg_uses}")
        bad = set(self.overrides) - set(MEASURES)
        if bad:
            raise NetworkError(f"unknown override keys {sorted(bad)}")
        object.__setattr__(self, "overrides", dict(self.overrides))


@dataclass(frozen=True)
class NetworkGraph:
    nodes: tuple
    edges: tuple

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise NetworkError("node names must be unique")
        for end in ("A", "B"):
            if end not in nodes:
                raise NetworkError(f"network needs a node named {end!r}")
        for i, e in enumerate(self.edges):
            for name in (e.source, e.target):
                if name not in nodes:
                    raise NetworkError(f"edge {i} refers to unknown node {name!r}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def intermediate(self) -> tuple:
        return tuple(n for n in self.nodes if n not in ("A", "B"))


@dataclass(frozen=True)
class Cut:
    """The intermediate nodes on Alice's side; the rest go with Bob."""

    c_a: frozenset = frozenset()

    def __post_init__(self):
        c_a = frozenset(self.c_a)
        if c_a & {"A", "B"}:
            raise NetworkError("a cut may only contain intermediate nodes")
        object.__setattr__(self, "c_a", c_a)


@dataclass(frozen=True)
class ContinuityProfile:
    measure: str
    epsilon: float
    f: float
    g: float

    @classmethod
    def make(cls, measure: str, epsilon: float) -> "ContinuityProfile":
        eps = float(epsilon)
        if not 0.0 <= eps < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
        if measure == "er_versatile":
            return cls(measure, eps, 2 * binary_entropy(eps), 1 - 8 * eps)
        if measure == "emax":
            return cls(measure, eps, -2 * math.log2(1 - eps / 2), 1.0)
        raise ValueError(f"unknown continuity profile {measure!r}")


@dataclass(frozen=True)
class CutBound:
    cut: Cut
    crossing_edges: tuple
    value: float
    policy: str
    e_versatile: Optional[float] = None
    e_by_measure: Mapping[str, float] = field(default_factory=dict)
    mu: Optional[float] = None
    ebit_bound: Mapping[tuple, float] = field(default_factory=dict)

    def __post_init__(self):
        e_max = self.e_by_measure.get("e_max")
        if self.e_versatile is not None and e_max is not None and self.e_versatile > e_max + 1e-9:
            raise ValueError("versatile cut weight exceeds the E_max cut weight")


# ---------------------------------------------------------------- measures

@lru_cache(maxsize=None)
def _sdp_emax(kind: str, param: float) -> float:
    return max(emax_sigma_sdp(make_channel(kind, param)).value, 0.0)


_custom_cache: dict = {}


def _custom_emax(channel: Channel) -> Optional[float]:
    key = tuple(k.tobytes() for k in channel.kraus) + (channel.dim_in, channel.dim_out)
    if key not in _custom_cache:
        try:
            _custom_cache[key] = max(emax_sigma_sdp(channel).value, 0.0)
        except UnsupportedDims:
            _custom_cache[key] = None
    return _custom_cache[key]


def channel_measures(channel: Channel, measure: str | None = None) -> ChannelMeasures:
    """E_R, E_max and the squashed-entanglement upper bound where available.

    Closed forms are used when known; E_max otherwise comes from the PPT
    SDP, computed once per (kind, parameter rounded to 1e-12).  Passing
    ``measure`` other than ``"e_max"`` skips that SDP.
    """
    if channel.kind == "custom":
        closed = ChannelMeasures(choi_simulable=channel.choi_simulable)
    else:
        closed = closed_form_measures(*channel.key)
    if closed.e_max is not None or measure not in (None, "e_max"):
        return closed
    e_max = _custom_emax(channel) if channel.kind == "custom" else _sdp_emax(*channel.key)
    if e_max is None:
        return closed
    return ChannelMeasures(closed.e_r, e_max, closed.e_sq_ub, closed.choi_simulable,
                           dict(closed.methods, e_max="sigma_sdp"))


def edge_measure(graph: NetworkGraph, edge_id: int, measure: str) -> float:
    """One measure for one edge: override first, then closed form or SDP."""
    edge = graph.edges[edge_id]
    if measure == "versatile":
        measure = "e_r" if edge.channel.choi_simulable else "e_max"
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    if measure in edge.overrides:
        return float(edge.overrides[measure])
    value = getattr(channel_measures(edge.channel, measure), measure)
    if value is None:
        raise MissingMeasure(edge_id, edge, measure)
    return float(value)


def edge_weights(graph: NetworkGraph, policy: str = "versatile") -> np.ndarray:
    """``avg_uses * weight`` for every edge; edges never used cost nothing."""
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}, got {policy!r}")
    return np.array([0.0 if e.avg_uses == 0 else e.avg_uses * edge_measure(graph, i, policy)
                     for i, e in enumerate(graph.edges)])


# ---------------------------------------------------------------- cuts

def _alice_side(graph: NetworkGraph, cut: Cut) -> frozenset:
    unknown = cut.c_a - set(graph.intermediate)
    if unknown:
        raise NetworkError(f"cut names unknown nodes {sorted(unknown)}")
    return cut.c_a | {"A"}


def cut_edges(graph: NetworkGraph, cut: Cut) -> tuple:
    """Ids of the edges joining the two sides, in either direction."""
    side = _alice_side(graph, cut)
    return tuple(i for i, e in enumerate(graph.edges) if (e.source in side) != (e.target in side))


def cut_entanglement(graph: NetworkGraph, cut: Cut, policy: str = "versatile") -> float:
    total = 0.0
    for i in cut_edges(graph, cut):
        edge = graph.edges[i]
        if edge.avg_uses:
            total += edge.avg_uses * edge_measure(graph, i, policy)
    return total


def ebit_upper_bound(e_cut: float, profile: ContinuityProfile) -> float:
    """``(f + e_cut) / g``, or ``inf`` once ``g`` is no longer positive."""
    if profile.g <= 0:
        return math.inf
    return (profile.f + e_cut) / profile.g


def mu_from_sums(e_sq: float, e_versatile: float) -> float:
    total = e_sq + e_versatile
    if total == 0:
        return 0.0
    return (e_sq - e_versatile) / total


def mu_tilde(graph: NetworkGraph, cut: Cut) -> float:
    """Relative advantage of the versatile cut weight over the squashed one."""
    return mu_from_sums(cut_entanglement(graph, cut, "e_sq_ub"), cut_entanglement(graph, cut, "versatile"))


def mu_dephasing_family(k, x, lam):
    """``mu`` for one cut crossed by ``k`` dephasing channels and one amplitude damper.

    All channels are used once.  Broadcasts over numpy arrays.
    """
    k, x, lam = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (k, x, lam)))
    if np.any((x < 0) | (x > 1) | (lam < 0) | (lam > 1)) or np.any(k < 0):
        raise ValueError("need k >= 0 and x, lambda in [0, 1]")
    h = _h_vec
    e_r_deph = 1 - h(x / 2)
    e_sq_deph = h(np.sqrt(x / 2 * (1 - x / 2)) + 0.5)
    e_max_ad = np.log2(2 - lam)
    e_sq_ad = h(0.5 - lam / 4) - h(1 - lam / 4)
    sq = k * e_sq_deph + e_sq_ad
    vers = k * e_r_deph + e_max_ad
    total = sq + vers
    out = np.where(total > 0, (sq - vers) / np.where(total > 0, total, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def _h_vec(y):
    y = np.clip(y, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -y * np.log2(y) - (1 - y) * np.log2(1 - y)
    return np.where((y <= 0) | (y >= 1), 0.0, v)


def cut_bound(graph: NetworkGraph, cut: Cut, policy: str = "versatile",
              epsilon: float | None = None) -> CutBound:
    """Everything known about one cut; measures no edge can supply are skipped.

    The policy's own weight must be available (:class:`MissingMeasure`
    otherwise).
    """
    value = cut_entanglement(graph, cut, policy)

    def maybe(measure):
        try:
            return cut_entanglement(graph, cut, measure)
        except MissingMeasure:
            return None

    e_vers = maybe("versatile")
    by_measure = {m: v for m in MEASURES if (v := maybe(m)) is not None}
    mu = mu_from_sums(by_measure["e_sq_ub"], e_vers) if e_vers is not None and "e_sq_ub" in by_measure else None
    bounds = {}
    if epsilon is not None:
        if e_vers is not None:
            bounds[("er_versatile", epsilon)] = ebit_upper_bound(
                e_vers, ContinuityProfile.make("er_versatile", epsilon))
        if "e_max" in by_measure:
            bounds[("emax", epsilon)] = ebit_upper_bound(
                by_measure["e_max"], ContinuityProfile.make("emax", epsilon))
    return CutBound(cut, cut_edges(graph, cut), value, policy, e_vers, by_measure, mu, bounds)


def _exhaustive(graph: NetworkGraph, weights: np.ndarray) -> Cut:
    inter = graph.intermediate
    m = len(inter)
    if m > EXHAUSTIVE_MAX:
        raise TooLarge(f"exhaustive search over {m} intermediate nodes (limit {EXHAUSTIVE_MAX})")
    index = {name: i for i, name in enumerate(inter)}
    # bit i of the mask puts intermediate node i on Alice's side
    pos = {"A": -1, "B": -2}
    src = np.array([index.get(e.source, pos.get(e.source)) for e in graph.edges], dtype=np.int64)
    dst = np.array([index.get(e.target, pos.get(e.target)) for e in graph.edges], dtype=np.int64)
    best_val, best_mask = math.inf, 0
    chunk = 1 << 16
    for start in range(0, 1 << m, chunk):
        masks = np.arange(start, min(start + chunk, 1 << m), dtype=np.int64)

        def side(idx):
            bits = (masks[:, None] >> np.maximum(idx, 0)[None, :]) & 1
            return np.where(idx == -1, 1, np.where(idx == -2, 0, bits))

        crosses = side(src) != side(dst) if len(weights) else np.zeros((len(masks), 0), bool)
        values = crosses.astype(float) @ weights
        i = int(np.argmin(values))
        if values[i] < best_val - 1e-12:
            best_val, best_mask = float(values[i]), int(masks[i])
    return Cut(frozenset(inter[i] for i in range(m) if best_mask >> i & 1))


def _maxflow(graph: NetworkGraph, weights: np.ndarray) -> Cut:
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValueError("max-flow needs finite nonnegative edge weights")
    index = {name: i for i, name in enumerate(graph.nodes)}
    n = len(graph.nodes)
    cap = np.zeros((n, n))
    for e, w in zip(graph.edges, weights):
        u, v = index[e.source], index[e.target]
        if u != v:
            cap[u, v] += w
            cap[v, u] += w
    s, t = index["A"], index["B"]
    flow = np.zeros((n, n))
    while True:
        parent = [-1] * n
        parent[s] = s
        queue = deque([s])
        while queue and parent[t] < 0:
            u = queue.popleft()
            for v in range(n):
                if parent[v] < 0 and cap[u, v] - flow[u, v] > FLOW_CUTOFF:
                    parent[v] = u
                    queue.append(v)
        if parent[t] < 0:
            break
        path, v = [], t
        while v != s:
            path.append((parent[v], v))
            v = parent[v]
        push = min(cap[u, v] - flow[u, v] for u, v in path)
        for u, v in path:
            flow[u, v] += push
            flow[v, u] -= push
    # parent >= 0 now marks the residual reachable set from A
    return Cut(frozenset(name for name in graph.intermediate if parent[index[name]] >= 0))


def min_cut(graph: NetworkGraph, policy: str = "versatile", method: str = "auto",
            epsilon: float | None = None, details: bool = True) -> CutBound:
    """Bipartition minimising :func:`cut_entanglement` under ``policy``.

    With ``details=False`` only the policy's value is filled in, which
    avoids SDP evaluations of measures the optimisation does not use.
    """
    weights = edge_weights(graph, policy)
    if method == "auto":
        method = "exhaustive" if len(graph.intermediate) <= EXHAUSTIVE_AUTO_LIMIT else "maxflow"
    if method == "exhaustive":
        cut = _exhaustive(graph, weights)
    elif method == "maxflow":
        cut = _maxflow(graph, weights)
    else:
        raise ValueError(f"method must be exhaustive, maxflow or auto, got {method!r}")
    if not details:
        return CutBound(cut, cut_edges(graph, cut), cut_entanglement(graph, cut, policy), policy)
    return cut_bound(graph, cut, policy, epsilon)


def strong_converse_error(rate: float, n_uses: float, e_channel: float, c: float) -> float:
    """Lower bound on half the error once ``rate`` exceeds the entanglement ``e_channel``."""
    if not all(math.isfinite(v) for v in (rate, n_uses, e_channel, c)):
        raise ValueError("inputs must be finite")
    if n_uses <= 0 or c <= 0:
        raise ValueError("n_uses and c must be positive")
    return max(0.0, 1.0 - 2.0 ** (-(n_uses / c) * (rate - e_channel)))


# ---------------------------------------------------------------- files

_TOP_KEYS = {"epsilon", "nodes", "edges"}
_EDGE_KEYS = {"from", "to", "channel", "avg_uses", "overrides"}
_CHANNEL_KEYS = {"kind", "param", "kraus", "choi_simulable"}


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise NetworkError(f"{where} must be a JSON object")
    extra = set(obj) - allowed
    if extra:
        raise NetworkError(f"unknown keys in {where}: {sorted(extra)}")
    missing = set(required) - set(obj)
    if missing:
        raise NetworkError(f"missing keys in {where}: {sorted(missing)}")


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise NetworkError(f"{where} must be a number")
    return float(v)


def _kraus_entry(v, where):
    if isinstance(v, list) and len(v) == 2:
        return complex(_number(v[0], where), _number(v[1], where))
    return _number(v, where)


def _parse_channel(entry, where) -> Channel:
    _check_keys(entry, _CHANNEL_KEYS, {"kind"}, where)
    kind = entry["kind"]
    if kind not in KINDS:
        raise NetworkError(f"{where}: unknown channel kind {kind!r}")
    try:
        if kind == "custom":
            if "kraus" not in entry:
                raise NetworkError(f"{where}: custom channel needs 'kraus'")
            kraus = [[[_kraus_entry(v, where) for v in row] for row in k] for k in entry["kraus"]]
            return custom_channel(kraus, bool(entry.get("choi_simulable", False)))
        if "kraus" in entry or "choi_simulable" in entry:
            raise NetworkError(f"{where}: 'kraus' and 'choi_simulable' are only for custom channels")
        if "param" not in entry:
            raise NetworkError(f"{where}: missing 'param'")
        return make_channel(kind, _number(entry["param"], f"{where}.param"))
    except (ChannelError, TypeError) as exc:
        raise NetworkError(f"{where}: {exc}") from exc


def network_from_dict(data) -> tuple[NetworkGraph, float]:
    """Graph and epsilon from the decoded JSON network description."""
    _check_keys(data, _TOP_KEYS, _TOP_KEYS, "network")
    eps = _number(data["epsilon"], "epsilon")
    nodes = data["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise NetworkError("nodes must be an array of strings")
    if not isinstance(data["edges"], list):
        raise NetworkError("edges must be an array")
    edges = []
    for i, e in enumerate(data["edges"]):
        where = f"edges[{i}]"
        _check_keys(e, _EDGE_KEYS, {"from", "to", "channel", "avg_uses"}, where)
        overrides = e.get("overrides", {})
        _check_keys(overrides, set(MEASURES), (), f"{where}.overrides")
        overrides = {k: _number(v, f"{where}.overrides.{k}") for k, v in overrides.items()}
        edges.append(Edge(e["from"], e["to"], _parse_channel(e["channel"], f"{where}.channel"),
                          _number(e["avg_uses"], f"{where}.avg_uses"), overrides))
    return NetworkGraph(tuple(nodes), tuple(edges)), eps


def load_network(path) -> tuple[NetworkGraph, float]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"invalid JSON: {exc}") from exc
    return network_from_dict(data)
