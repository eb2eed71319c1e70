"""Small dense Hermitian linear algebra and the two quantum divergences.

Everything here targets operators of dimension <= 8 (two-qubit and
qubit-qutrit states).  Arrays are plain ``numpy`` complex matrices; the
eigensolver is a cyclic Jacobi method written out here rather than a LAPACK
call so that the divergences depend on nothing but array arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
SUPPORT_TOL = 1e-10
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class DimensionError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """Jacobi iteration hit its sweep cap."""


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``m`` (or a stack of matrices) as Hermitian and return its exact Hermitian part."""
    a = np.array(m, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"Hermitian matrix must be square, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    ah = np.swapaxes(a, -1, -2).conj()
    if a.size and np.max(np.abs(a - ah)) > tol:
        raise ValueError("matrix is not Hermitian")
    return 0.5 * (a + ah)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2).conj()


@dataclass(frozen=True)
class BipartiteState:
    """A Hermitian operator on A (x) B with its local dimensions."""

    matrix: np.ndarray
    dim_a: int
    dim_b: int
    normalized: bool = False
    positive: bool = False

    def __post_init__(self):
        m = hermitian(self.matrix)
        if self.dim_a * self.dim_b != m.shape[0]:
            raise DimensionError(
                f"dims {self.dim_a}x{self.dim_b} do not match matrix size {m.shape[0]}")
        if self.normalized and abs(np.trace(m).real - 1) > 1e-10:
            raise ValueError("state flagged normalized but trace != 1")
        if self.positive and eigvalsh(m)[0] < -1e-10:
            raise ValueError("state flagged positive but has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)


def _unpack(m, dims):
    if isinstance(m, BipartiteState):
        return m.matrix, m.dims
    a = as_matrix(m)
    if dims is None:
        raise DimensionError("bipartite dims are required for a bare matrix")
    da, db = dims
    if a.shape != (da * db, da * db):
        raise DimensionError(f"dims {da}x{db} do not match matrix shape {a.shape}")
    return a, (da, db)


def kron(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the slow (left) factor."""
    a = as_matrix(a)
    b = as_matrix(b)
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def partial_trace(m, dims=None, subsystem: str = "B") -> np.ndarray:
    a, (da, db) = _unpack(m, dims)
    t = a.reshape(da, db, da, db)
    if subsystem == "B":
        return np.einsum("ijkj->ik", t)
    if subsystem == "A":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def partial_transpose(m, dims=None, subsystem: str = "B") -> np.ndarray:
    a, (da, db) = _unpack(m, dims)
    t = a.reshape(da, db, da, db)
    if subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(da * db, da * db)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # circle-method schedule: every pair appears once per sweep, pairs within
    # a round are disjoint so their rotations commute
    m = n + (n % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            p, q = idx[k], idx[m - 1 - k]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        idx = [idx[0]] + [idx[-1]] + idx[1:-1]
    return rounds


_SCHEDULES = {n: _round_robin(n) for n in range(2, 17)}


def eig_hermitian(m, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS,
                  check: bool = True):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ``w`` ascending and ``m = v @ diag(w) @ v^H``.
    Accepts a stack ``(..., n, n)``; every matrix in the stack is swept until
    its off-diagonal Frobenius norm is below ``tol`` times its own norm.
    Rotations are applied in round-robin order, so each round is a product
    of disjoint plane rotations and is done as one matrix product.
    ``check=False`` skips the Hermiticity test and uses the Hermitian part.
    """
    if check:
        a = hermitian(m)
    else:
        a = np.asarray(m, dtype=complex)
        a = 0.5 * (a + dagger(a))
    n = a.shape[-1]
    batch = a.shape[:-2]
    a = a.reshape((-1, n, n))
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    if n > 1:
        schedule = _SCHEDULES.get(n) or _round_robin(n)
        offmask = ~np.eye(n, dtype=bool)
        threshold = tol * np.linalg.norm(a, axis=(-2, -1))
        for _ in range(max_sweeps):
            off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=-1))
            if np.all(off <= threshold):
                break
            for ps, qs in schedule:
                apq = a[:, ps, qs]
                g = np.abs(apq)
                active = g > 1e-300
                if not active.any():
                    continue
                gs = np.where(active, g, 1.0)
                phase = np.where(active, apq / gs, 1.0)
                tau = (a[:, qs, qs].real - a[:, ps, ps].real) / (2.0 * gs)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
                rot[:, ps, ps] = c
                rot[:, ps, qs] = s
                rot[:, qs, ps] = -s * phase.conj()
                rot[:, qs, qs] = c * phase.conj()
                a = dagger(rot) @ a @ rot
                a[:, ps, qs] = 0.0
                a[:, qs, ps] = 0.0
                v = v @ rot
        else:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diagonal(a, axis1=-2, axis2=-1).real
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w.reshape(batch + (n,)), v.reshape(batch + (n, n))


def eigvalsh(m, check: bool = True) -> np.ndarray:
    return eig_hermitian(m, check=check)[0]


def _state_pair(rho, sigma):
    r = rho.matrix if isinstance(rho, BipartiteState) else hermitian(rho)
    s = sigma.matrix if isinstance(sigma, BipartiteState) else hermitian(sigma)
    if r.shape[-1] != s.shape[-1]:
        raise DimensionError(f"shape mismatch {r.shape} vs {s.shape}")
    r, s = np.broadcast_arrays(r, s)
    return r, s


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def dmax(rho, sigma):
    """Max-relative entropy ``D_max(rho || sigma)`` in bits.

    Computed as ``log2`` of the largest eigenvalue of
    ``sigma^{-1/2} rho sigma^{-1/2}`` with the pseudo-inverse square root on
    the support of ``sigma``; ``inf`` when ``rho`` has weight outside that
    support.  Broadcasts over leading axes.
    """
    r, s = _state_pair(rho, sigma)
    w, v = eig_hermitian(s)
    supp = w > SUPPORT_TOL
    inv_sqrt = np.where(supp, 1.0 / np.sqrt(np.where(supp, w, 1.0)), 0.0)
    rv = dagger(v) @ r @ v
    reduced = inv_sqrt[..., :, None] * rv * inv_sqrt[..., None, :]
    top = eigvalsh(reduced, check=False)[..., -1]
    kernel = (~supp).astype(float)
    leak = eigvalsh(kernel[..., :, None] * rv * kernel[..., None, :], check=False)[..., -1]
    with np.errstate(divide="ignore"):
        out = np.log2(np.maximum(top, 0.0))
    out = np.where((leak > SUPPORT_TOL) | ~supp.any(axis=-1), np.inf, out)
    return _scalar(out)


def relative_entropy(rho, sigma):
    """Umegaki relative entropy ``S(rho || sigma)`` in bits, with 0 log 0 = 0.

    ``inf`` when ``rho`` has weight outside the support of ``sigma``.
    Broadcasts over leading axes.
    """
    r, s = _state_pair(rho, sigma)
    pr = eigvalsh(r)
    keep = pr > SUPPORT_TOL
    neg_entropy = np.sum(np.where(keep, pr * np.log2(np.where(keep, pr, 1.0)), 0.0), axis=-1)
    w, v = eig_hermitian(s)
    weights = np.einsum("...ij,...ik,...kj->...j", v.conj(), r, v).real
    supp = w > SUPPORT_TOL
    cross = np.sum(np.where(supp, weights * np.log2(np.where(supp, w, 1.0)), 0.0), axis=-1)
    leak = np.sum(np.where(supp, 0.0, weights), axis=-1)
    out = np.where(leak > SUPPORT_TOL, np.inf, neg_entropy - cross)
    return _scalar(out)
