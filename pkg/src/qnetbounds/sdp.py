"""Log-barrier interior-point solver for small semidefinite programs.

Problems have the form

    minimize    c . x
    subject to  B_k(x) = F_k + sum_i x_i G_{k,i}  >= 0   (PSD, Hermitian)
                E x = f

over a real vector ``x``.  A Hermitian matrix variable is carried by its
``n**2`` real coordinates (see :func:`hermitian_basis`), so partial traces
and partial transposes of it are just more affine blocks.

The method is the textbook barrier path: for increasing ``t`` minimise
``t c.x - sum_k log det B_k(x)`` by damped Newton steps restricted to the
null space of ``E``, stopping once the duality-gap bound ``m / t`` (``m`` the
total block size) falls below tolerance.  Sizes are tiny (a few blocks of
size <= 8, a few dozen unknowns) so every Newton system is solved densely.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import dagger


class SdpError(RuntimeError):
    pass


class Infeasible(SdpError):
    """The supplied starting point is not strictly feasible."""


class NoConvergence(SdpError):
    pass


class IllConditioned(SdpError):
    """The Newton system is singular even after regularisation."""


def hermitian_basis(n: int) -> np.ndarray:
    """Real-coordinate basis of n x n Hermitian matrices, shape (n*n, n, n).

    Order: the n diagonal units, then for each i < j the symmetric pair
    ``|i><j| + |j><i|`` followed by ``i|i><j| - i|j><i|``.
    """
    basis = np.zeros((n * n, n, n), dtype=complex)
    for i in range(n):
        basis[i, i, i] = 1.0
    k = n
    for i in range(n):
        for j in range(i + 1, n):
            basis[k, i, j] = basis[k, j, i] = 1.0
            basis[k + 1, i, j] = 1j
            basis[k + 1, j, i] = -1j
            k += 2
    return basis


def pack_hermitian(y: np.ndarray) -> np.ndarray:
    n = y.shape[0]
    out = [y[i, i].real for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            out += [y[i, j].real, y[i, j].imag]
    return np.array(out)


def unpack_hermitian(x: np.ndarray, n: int) -> np.ndarray:
    return np.tensordot(np.asarray(x[: n * n], dtype=float), hermitian_basis(n), axes=1)


@dataclass(frozen=True)
class PsdBlock:
    """Affine Hermitian-valued map ``x -> offset + sum_i x_i coeffs[i]``."""

    offset: np.ndarray
    coeffs: np.ndarray
    name: str = ""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.offset + np.tensordot(x, self.coeffs, axes=1)

    @property
    def size(self) -> int:
        return self.offset.shape[0]

    @classmethod
    def from_map(cls, fn: Callable[[np.ndarray], np.ndarray], nvars: int, name: str = ""):
        """Build a block by probing an affine map on the coordinate vectors."""
        offset = np.asarray(fn(np.zeros(nvars)), dtype=complex)
        coeffs = np.stack([np.asarray(fn(e), dtype=complex) - offset for e in np.eye(nvars)])
        block = cls(0.5 * (offset + dagger(offset)), 0.5 * (coeffs + dagger(coeffs)), name)
        if max(np.abs(offset - dagger(offset)).max(), np.abs(coeffs - dagger(coeffs)).max()) > 1e-12:
            raise ValueError(f"block {name!r} is not Hermitian-valued")
        return block


@dataclass(frozen=True)
class SdpProblem:
    objective: np.ndarray
    blocks: tuple[PsdBlock, ...]
    start: np.ndarray
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    herm_dim: int = 0

    @property
    def nvars(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True)
class SdpSolution:
    optimum: float
    x: np.ndarray
    gap: float
    eq_residual: float
    min_block_eig: float
    iterations: int
    history: tuple[float, ...] = field(repr=False)
    herm_dim: int = 0

    @property
    def variable(self) -> np.ndarray:
        return unpack_hermitian(self.x, self.herm_dim)

    @property
    def aux(self) -> np.ndarray:
        return self.x[self.herm_dim ** 2:]


def _chol(m):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None


def _null_space(e: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(e)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if s.size else 1.0)))
    return vt[rank:].T


class _Barrier:
    def __init__(self, blocks: Sequence[PsdBlock]):
        self.blocks = blocks

    def factors(self, x):
        out = []
        for b in self.blocks:
            l = _chol(b(x))
            if l is None:
                return None
            out.append(l)
        return out

    def derivatives(self, x, factors):
        grad = np.zeros(x.shape[0])
        hess = np.zeros((x.shape[0], x.shape[0]))
        for b, l in zip(self.blocks, factors):
            linv = np.linalg.inv(l)
            # W_i = L^{-1} G_i L^{-H}; grad_i = -tr W_i, hess_ij = tr W_i W_j
            w = linv @ b.coeffs @ dagger(linv)
            grad -= np.einsum("iaa->i", w).real
            wf = w.reshape(w.shape[0], -1)
            hess += (wf.conj() @ wf.T).real
        return grad, hess

    def decrease(self, x, dx, step, factors):
        """log det B(x) - log det B(x + step dx), computed relative to B(x)."""
        total = 0.0
        for b, l in zip(self.blocks, factors):
            linv = np.linalg.inv(l)
            db = np.tensordot(dx, b.coeffs, axes=1)
            m = np.eye(b.size) + step * (linv @ db @ dagger(linv))
            lm = _chol(0.5 * (m + dagger(m)))
            if lm is None:
                return None
            total -= 2.0 * np.sum(np.log(np.diag(lm).real))
        return total


def solve(problem: SdpProblem, *, shrink: float = 0.25, gap_tol: float = 1e-9,
          newton_tol: float = 1e-10, armijo: float = 1e-4, max_outer: int = 200,
          max_newton: int = 200, margin: float = 1e-6) -> SdpSolution:
    """Minimise ``problem.objective . x`` by barrier path following."""
    c = np.asarray(problem.objective, dtype=float)
    x = np.asarray(problem.start, dtype=float).copy()
    blocks = problem.blocks
    for b in blocks:
        lo = np.linalg.eigvalsh(b(x))[0]
        if lo < margin:
            raise Infeasible(f"start is not strictly feasible for block {b.name!r} (min eig {lo:.3g})")
    if problem.eq_matrix is not None and len(problem.eq_matrix):
        e = np.asarray(problem.eq_matrix, dtype=float)
        f = np.asarray(problem.eq_rhs, dtype=float)
        if np.max(np.abs(e @ x - f)) > 1e-8:
            raise Infeasible("start violates the equality constraints")
        z = _null_space(e)
    else:
        e = f = None
        z = np.eye(c.shape[0])

    barrier = _Barrier(blocks)
    m_total = sum(b.size for b in blocks)
    t = 1.0
    history = []
    iterations = 0
    for _ in range(max_outer):
        for _ in range(max_newton):
            factors = barrier.factors(x)
            grad, hess = barrier.derivatives(x, factors)
            g = t * c + grad
            gz = z.T @ g
            hz = z.T @ hess @ z
            dz = _newton_direction(hz, gz)
            dx = z @ dz
            decrement = -float(g @ dx)
            iterations += 1
            if decrement / 2.0 <= newton_tol:
                break
            step = 1.0
            while True:
                dlog = barrier.decrease(x, dx, step, factors)
                if dlog is not None and t * step * (c @ dx) + dlog <= -armijo * step * decrement:
                    break
                step *= 0.5
                if step < 1e-14:
                    break
            if step < 1e-14:
                break
            x = x + step * dx
        else:
            raise NoConvergence(f"centering did not converge at t={t:.3g}")
        history.append(float(c @ x))
        if m_total / t <= gap_tol:
            break
        t /= shrink
    else:
        raise NoConvergence(f"barrier path did not reach gap {gap_tol} in {max_outer} steps")

    eq_res = float(np.max(np.abs(e @ x - f))) if e is not None else 0.0
    min_eig = min(float(np.linalg.eigvalsh(b(x))[0]) for b in blocks)
    return SdpSolution(optimum=float(c @ x), x=x, gap=m_total / t, eq_residual=eq_res,
                       min_block_eig=min_eig, iterations=iterations,
                       history=tuple(history), herm_dim=problem.herm_dim)


def _newton_direction(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    scale = max(np.max(np.abs(np.diag(h))), 1e-300)
    for reg in (0.0, 1e-14, 1e-12, 1e-10):
        l = _chol(h + reg * scale * np.eye(h.shape[0]))
        if l is not None:
            y = np.linalg.solve(l, -g)
            return np.linalg.solve(dagger(l), y)
    raise IllConditioned("Newton system is not positive definite")
