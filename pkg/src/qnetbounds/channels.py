"""Qubit channels, their Choi states and closed-form entanglement data."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import BipartiteState, dagger

KINDS = ("amplitude_damping", "dephasing", "erasure", "depolarizing", "custom")
SIMULABLE = {"amplitude_damping": False, "dephasing": True, "erasure": True, "depolarizing": True}

GOLDEN_BREAK = (np.sqrt(5.0) - 1.0) / 2.0


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class Channel:
    kind: str
    param: float
    kraus: tuple
    dim_in: int
    dim_out: int
    choi_simulable: bool

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        for k in ks:
            if k.shape != (self.dim_out, self.dim_in):
                raise ChannelError(f"Kraus operator shape {k.shape} != {(self.dim_out, self.dim_in)}")
            k.setflags(write=False)
        tp = sum(dagger(k) @ k for k in ks)
        if np.max(np.abs(tp - np.eye(self.dim_in))) > 1e-10:
            raise ChannelError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ dagger(k) for k in self.kraus)

    @property
    def key(self) -> tuple:
        return (self.kind, round(float(self.param), 12))


def _check_param(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"channel parameter must lie in [0, 1], got {p}")
    return p


def make_channel(kind: str, param: float) -> Channel:
    """Channel of one of the four named qubit families.

    ``param`` is the damping, dephasing, erasure or depolarising strength;
    every family is the identity at ``param = 0``.
    """
    p = _check_param(param)
    ket = np.eye(2)
    if kind == "amplitude_damping":
        kraus = [np.diag([1.0, np.sqrt(1 - p)]), np.sqrt(p) * np.outer(ket[0], ket[1])]
        return Channel(kind, p, tuple(kraus), 2, 2, False)
    if kind == "dephasing":
        kraus = [np.sqrt(1 - p / 2) * np.eye(2), np.sqrt(p / 2) * np.diag([1.0, -1.0])]
        return Channel(kind, p, tuple(kraus), 2, 2, True)
    if kind == "depolarizing":
        kraus = [np.sqrt(1 - p) * np.eye(2)]
        kraus += [np.sqrt(p / 2) * np.outer(ket[i], ket[j]) for i in range(2) for j in range(2)]
        return Channel(kind, p, tuple(kraus), 2, 2, True)
    if kind == "erasure":
        # output space span{|0>, |1>, |e>}
        embed = np.eye(3)[:, :2]
        err = np.eye(3)[2]
        kraus = [np.sqrt(p) * np.outer(err, ket[i]) for i in range(2)]
        kraus.append(np.sqrt(1 - p) * embed)
        return Channel(kind, p, tuple(kraus), 2, 3, True)
    if kind == "custom":
        raise ChannelError("custom channels are built with custom_channel()")
    raise ChannelError(f"unknown channel kind {kind!r}")


def custom_channel(kraus, choi_simulable: bool) -> Channel:
    ks = [np.array(k, dtype=complex) for k in kraus]
    if not ks:
        raise ChannelError("custom channel needs at least one Kraus operator")
    dim_out, dim_in = ks[0].shape
    return Channel("custom", 0.0, tuple(ks), dim_in, dim_out, bool(choi_simulable))


def max_entangled(d: int) -> np.ndarray:
    psi = np.eye(d).reshape(d * d) / np.sqrt(d)
    return np.outer(psi, psi).astype(complex)


def choi(channel: Channel) -> BipartiteState:
    """Normalised Choi state ``(1 (x) N)[psi]`` with A the reference."""
    d, do = channel.dim_in, channel.dim_out
    out = np.zeros((d * do, d * do), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d))
            unit[i, j] = 1.0
            out[i * do:(i + 1) * do, j * do:(j + 1) * do] = channel.apply(unit) / d
    return BipartiteState(out, d, do, normalized=True, positive=True)


def binary_entropy(y: float) -> float:
    y = float(y)
    if not -1e-15 <= y <= 1 + 1e-15:
        raise ValueError(f"binary entropy needs y in [0, 1], got {y}")
    if y <= 0.0 or y >= 1.0:
        return 0.0
    return float(-y * np.log2(y) - (1 - y) * np.log2(1 - y))


@dataclass(frozen=True)
class ChannelMeasures:
    e_r: Optional[float] = None
    e_max: Optional[float] = None
    e_sq_ub: Optional[float] = None
    choi_simulable: bool = False
    methods: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.e_r is not None and self.e_max is not None and self.e_r > self.e_max + 1e-6:
            raise ValueError(f"E_R={self.e_r} exceeds E_max={self.e_max}")


def closed_form_measures(kind: str, param: float) -> ChannelMeasures:
    """Closed-form E_R, E_max and squashed-entanglement upper bound, where known.

    Fields with no known formula are left as ``None``.
    """
    p = _check_param(param)
    h = binary_entropy
    if kind == "dephasing":
        return ChannelMeasures(
            e_r=1 - h(p / 2),
            e_sq_ub=h(np.sqrt(p / 2 * (1 - p / 2)) + 0.5),
            choi_simulable=True,
            methods={"e_r": "closed_form", "e_sq_ub": "closed_form"})
    if kind == "amplitude_damping":
        return ChannelMeasures(
            e_max=float(np.log2(2 - p)),
            e_sq_ub=h(0.5 - p / 4) - h(1 - p / 4),
            choi_simulable=False,
            methods={"e_max": "closed_form", "e_sq_ub": "closed_form"})
    if kind == "erasure":
        return ChannelMeasures(
            e_r=1 - p, e_sq_ub=1 - p, choi_simulable=True,
            methods={"e_r": "closed_form", "e_sq_ub": "closed_form"})
    if kind == "depolarizing":
        # isotropic Choi state with singlet fraction 1 - 3p/4
        e_r = 1 - h(1 - 3 * p / 4) if p <= 2 / 3 else 0.0
        return ChannelMeasures(e_r=e_r, choi_simulable=True, methods={"e_r": "closed_form"})
    raise ChannelError(f"no closed forms for kind {kind!r}")


def ad_lower_closed(lam: float) -> float:
    """Analytic value of min over separable sigma of D_max(pi_AD || sigma)."""
    lam = _check_param(lam)
    if lam <= GOLDEN_BREAK:
        return float(np.log2(0.5 * (1 + np.sqrt(1 - lam)) ** 2))
    return float(np.log2((1 + lam) / (2 * lam)))
