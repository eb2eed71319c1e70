"""Reproduction checks run by ``qnetbounds verify`` and the acceptance tests.

Each check returns a :class:`CheckResult`; none of them raise on a failed
comparison so that a report can list every outcome.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import ad_lower_closed, closed_form_measures, make_channel, GOLDEN_BREAK
from .emax import emax_lower_sdp, emax_reduced, emax_sigma_sdp, emax_upper_marginal_sdp
from .linalg import dmax, relative_entropy
from .network import Edge, NetworkGraph, min_cut, mu_dephasing_family, strong_converse_error

GRID = tuple(round(0.05 * i, 10) for i in range(21))
CHECK_SEED = 20240531


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@lru_cache(maxsize=None)
def _sigma(kind, lam):
    return emax_sigma_sdp(make_channel(kind, lam)).value


@lru_cache(maxsize=None)
def _lower(kind, lam):
    return emax_lower_sdp(make_channel(kind, lam)).value


def _worst(pairs):
    return max(abs(a - b) for a, b in pairs)


def check_ad_sigma():
    # solved afresh (not from the cache) so the timing is honest
    start = time.perf_counter()
    err = _worst((emax_sigma_sdp(make_channel("amplitude_damping", lam)).value,
                  closed_form_measures("amplitude_damping", lam).e_max) for lam in GRID)
    elapsed = time.perf_counter() - start
    ok = err <= 1e-4 and elapsed <= 5.0
    return ok, f"max error {err:.2e}, {elapsed:.2f} s for {len(GRID)} SDPs"


def check_ad_lower():
    err = _worst((_lower("amplitude_damping", lam), ad_lower_closed(lam)) for lam in GRID)
    branches = {lam <= GOLDEN_BREAK for lam in GRID}
    return err <= 1e-4 and branches == {True, False}, f"max error {err:.2e}"


def check_ad_upper():
    err = _worst((emax_upper_marginal_sdp(make_channel("amplitude_damping", lam)).value,
                  closed_form_measures("amplitude_damping", lam).e_max) for lam in GRID)
    return err <= 1e-4, f"max error {err:.2e}"


def check_simulable_equality():
    errs = {k: _worst((_sigma(k, lam), _lower(k, lam)) for lam in GRID)
            for k in ("dephasing", "erasure", "depolarizing")}
    return max(errs.values()) <= 1e-4, ", ".join(f"{k} {v:.2e}" for k, v in errs.items())


def check_measure_ordering():
    bad = []
    for lam in GRID:
        m = closed_form_measures("dephasing", lam)
        if not m.e_r <= m.e_sq_ub <= _sigma("dephasing", lam) + 1e-4:
            bad.append(f"dephasing {lam}")
        for kind in ("erasure", "depolarizing"):
            if closed_form_measures(kind, lam).e_r > _sigma(kind, lam) + 1e-4:
                bad.append(f"{kind} {lam}")
        if lam >= 2 / 3 and _sigma("depolarizing", lam) > 1e-4:
            bad.append(f"depolarizing E_max {lam}")
    return not bad, "ordering holds on all grids" if not bad else "violations: " + ", ".join(bad)


def check_mu_tilde():
    notes = []
    if mu_dephasing_family(1, 0.0, 0.0) != 0.0:
        notes.append("mu(1,0,0) != 0")
    mid = mu_dephasing_family(1, 0.5, 1.0)
    if abs(mid - 0.305) > 1e-3:
        notes.append(f"mu(1,0.5,1)={mid:.6f}")
    if not mu_dephasing_family(1, 0.99, 0.2) < 0:
        notes.append("mu(1,0.99,0.2) not negative")
    if not mu_dephasing_family(5, 0.5, 0.9) > 0:
        notes.append("mu(5,0.5,0.9) not positive")
    x, lam = np.meshgrid(np.linspace(0, 1, 11), np.linspace(0, 1, 11), indexing="ij")
    ks = np.arange(1, 11)
    mus = np.stack([mu_dephasing_family(k, x, lam) for k in ks])
    e_sq = np.array([closed_form_measures("dephasing", v).e_sq_ub for v in x[:, 0]])
    e_r = np.array([closed_form_measures("dephasing", v).e_r for v in x[:, 0]])
    where = (e_sq >= e_r)[None, :, None]
    drops = np.diff(mus, axis=0) < -1e-12
    if np.any(drops & where):
        notes.append(f"{int(np.sum(drops & where))} decreases in k")
    return not notes, f"mu(1,0.5,1)={mid:.6f}" if not notes else "; ".join(notes)


def random_network(rng, max_inner=10, max_edges=30) -> NetworkGraph:
    kinds = ("amplitude_damping", "dephasing", "erasure", "depolarizing")
    nodes = ["A", "B"] + [f"C{i}" for i in range(rng.integers(0, max_inner + 1))]
    edges = []
    for _ in range(rng.integers(0, max_edges + 1)):
        u, v = rng.choice(len(nodes), 2, replace=False)
        channel = make_channel(kinds[rng.integers(len(kinds))], float(rng.random()))
        edges.append(Edge(nodes[u], nodes[v], channel, float(3 * rng.random())))
    return NetworkGraph(tuple(nodes), tuple(edges))


def check_min_cut_oracle():
    rng = np.random.default_rng(CHECK_SEED)
    worst = 0.0
    for _ in range(100):
        g = random_network(rng)
        a = min_cut(g, method="exhaustive", details=False).value
        b = min_cut(g, method="maxflow", details=False).value
        worst = max(worst, abs(a - b))
    return worst <= 1e-9, f"max |exhaustive - maxflow| = {worst:.2e} over 100 graphs"


def random_states(rng, count, n):
    g = rng.normal(size=(count, n, n)) + 1j * rng.normal(size=(count, n, n))
    rho = g @ np.conj(np.swapaxes(g, -1, -2))
    return rho / np.trace(rho, axis1=-2, axis2=-1).real[:, None, None]


def random_unitaries(rng, count, n):
    g = rng.normal(size=(count, n, n)) + 1j * rng.normal(size=(count, n, n))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def check_divergences():
    rng = np.random.default_rng(CHECK_SEED)
    notes = []
    for n, count in ((4, 500), (6, 500)):
        rho, sigma = random_states(rng, count, n), random_states(rng, count, n)
        d = dmax(rho, sigma)
        if np.min(d - relative_entropy(rho, sigma)) < -1e-9:
            notes.append(f"D_max < S (n={n})")
        if np.max(np.abs(dmax(rho, rho))) > 1e-10:
            notes.append(f"D_max(rho||rho) != 0 (n={n})")
        u = random_unitaries(rng, count, n)
        ud = np.conj(np.swapaxes(u, -1, -2))
        if np.max(np.abs(dmax(u @ rho @ ud, u @ sigma @ ud) - d)) > 1e-9:
            notes.append(f"unitary invariance (n={n})")
        rho2, sigma2 = random_states(rng, count, n), random_states(rng, count, n)
        p = rng.random(count)[:, None, None]
        mixed = dmax(p * rho + (1 - p) * rho2, p * sigma + (1 - p) * sigma2)
        if np.any(mixed > np.maximum(d, dmax(rho2, sigma2)) + 1e-9):
            notes.append(f"quasi-convexity (n={n})")
    return not notes, "1000 random pairs" if not notes else "; ".join(notes)


def check_reduced_search():
    errs = []
    for kind in ("amplitude_damping", "dephasing", "depolarizing"):
        for lam in (0.1, 0.5, 0.9):
            ch = make_channel(kind, lam)
            ref = (_lower(kind, lam) if ch.choi_simulable
                   else emax_upper_marginal_sdp(ch).value)
            errs.append(abs(emax_reduced(ch).value - ref))
    return max(errs) <= 1e-3, f"max error {max(errs):.2e} over 9 channels"


def check_strong_converse():
    at2 = strong_converse_error(2.0, 2, 1.0, 2)
    curve = [strong_converse_error(2.0, n, 1.0, 2) for n in range(1, 61)]
    increasing = all(b > a for a, b in zip(curve, curve[1:]))
    ok = abs(at2 - 0.5) <= 1e-12 and increasing and curve[-1] > 1 - 1e-9
    return ok, f"error(N=2)={at2:.6f}, error(N=60)={curve[-1]:.12f}"


CHECKS = (
    ("amplitude damping E_max via sigma SDP", check_ad_sigma),
    ("amplitude damping lower SDP vs analytic value", check_ad_lower),
    ("amplitude damping marginal-constrained SDP", check_ad_upper),
    ("sigma SDP equals lower SDP on Choi-simulable channels", check_simulable_equality),
    ("E_R <= E_sq upper bound <= E_max ordering", check_measure_ordering),
    ("mu tilde values, signs and monotonicity in k", check_mu_tilde),
    ("exhaustive min cut equals max-flow min cut", check_min_cut_oracle),
    ("divergence properties on random states", check_divergences),
    ("reduced search agrees with the SDP", check_reduced_search),
    ("strong converse error curve", check_strong_converse),
)


def run_check(index: int) -> CheckResult:
    name, fn = CHECKS[index]
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failed check, not an aborted report
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(f"{index + 1}. {name}", bool(passed), detail, time.perf_counter() - start)


def run_all():
    return [run_check(i) for i in range(len(CHECKS))]
