"""Max-relative entropy of entanglement of qubit channels.

Three semidefinite programs over the PPT cone (exact for 2x2 and 2x3
Choi states) and a direct search over the phase-covariant separable family
that suffices for channels commuting with z-rotations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sdp
from .channels import Channel, choi
from .linalg import partial_trace, partial_transpose

SEED = 0x9E3779B97F4A7C15
PHASE_COVARIANT = ("amplitude_damping", "dephasing", "depolarizing")
# p-norm exponents for the smoothed objective; the last stage is within
# log2(4)/p of the true max
SMOOTHING_POWERS = (8, 64, 512, 4096, 32768)


class UnsupportedDims(ValueError):
    pass


class UnsupportedKind(ValueError):
    pass


@dataclass(frozen=True)
class EmaxResult:
    value: float
    method: str
    solver_gap: float = 0.0


def _check_dims(channel: Channel):
    if channel.dim_in != 2 or channel.dim_out not in (2, 3):
        raise UnsupportedDims(
            f"PPT cone equals the separable cone only for 2x2 and 2x3, got "
            f"{channel.dim_in}x{channel.dim_out}")


def _setup(channel: Channel, extra: int):
    _check_dims(channel)
    pi = choi(channel).matrix
    dims = (channel.dim_in, channel.dim_out)
    n = pi.shape[0]
    nvars = n * n + extra
    basis = sdp.hermitian_basis(n)

    def y_of(x):
        return np.tensordot(x[: n * n], basis, axes=1)

    return pi, dims, n, nvars, y_of


def _ppt_blocks(pi, scale, dims, nvars, y_of):
    lower = sdp.PsdBlock.from_map(lambda x: y_of(x) - scale * pi, nvars, "Y - pi")
    ppt = sdp.PsdBlock.from_map(lambda x: partial_transpose(y_of(x), dims), nvars, "Y^TB")
    return [lower, ppt]


def _start_y(pi, scale, n):
    # PT eigenvalues of scale*pi are bounded below by -scale*lmax(pi)*d
    c = 2 * scale * np.linalg.eigvalsh(pi)[-1] + 1.0
    return scale * pi + c * np.eye(n)


def emax_sigma_sdp(channel: Channel) -> EmaxResult:
    """``log2`` of min ||Tr_B Y||_inf over PPT Y with Y >= d pi."""
    pi, dims, n, nvars, y_of = _setup(channel, extra=1)
    d = channel.dim_in
    blocks = _ppt_blocks(pi, d, dims, nvars, y_of)
    blocks.append(sdp.PsdBlock.from_map(
        lambda x: x[-1] * np.eye(d) - partial_trace(y_of(x), dims), nvars, "tI - Tr_B Y"))
    y0 = _start_y(pi, d, n)
    t0 = np.linalg.eigvalsh(partial_trace(y0, dims))[-1] + 1.0
    objective = np.zeros(nvars)
    objective[-1] = 1.0
    problem = sdp.SdpProblem(objective, tuple(blocks), np.append(sdp.pack_hermitian(y0), t0),
                             herm_dim=n)
    sol = sdp.solve(problem)
    return EmaxResult(float(np.log2(sol.optimum)), "sigma_sdp", sol.gap)


def emax_lower_sdp(channel: Channel) -> EmaxResult:
    """``log2`` of min Tr Y over PPT Y with Y >= pi, i.e. min_SEP D_max(pi || sigma)."""
    pi, dims, n, nvars, y_of = _setup(channel, extra=0)
    blocks = _ppt_blocks(pi, 1.0, dims, nvars, y_of)
    objective = np.zeros(nvars)
    objective[:n] = 1.0
    problem = sdp.SdpProblem(objective, tuple(blocks), sdp.pack_hermitian(_start_y(pi, 1.0, n)),
                             herm_dim=n)
    sol = sdp.solve(problem)
    return EmaxResult(float(np.log2(sol.optimum)), "lower_sdp", sol.gap)


def emax_upper_marginal_sdp(channel: Channel) -> EmaxResult:
    """As :func:`emax_lower_sdp` with the extra constraint Tr_B Y = c 1_A; value log2(d c)."""
    pi, dims, n, nvars, y_of = _setup(channel, extra=1)
    d, db = dims
    blocks = _ppt_blocks(pi, 1.0, dims, nvars, y_of)
    # Tr_B Y - c 1 = 0, one real equation per Hermitian coordinate of a d x d matrix
    basis_a = sdp.hermitian_basis(d)

    def marginal(x):
        return sdp.pack_hermitian(partial_trace(y_of(x), dims) - x[-1] * np.eye(d))

    eq = np.stack([marginal(e) for e in np.eye(nvars)], axis=1)
    assert eq.shape == (len(basis_a), nvars)
    shift = 2 * np.abs(np.linalg.eigvalsh(partial_transpose(pi, dims))[0]) + 1.0
    y0 = pi + shift * np.eye(n)
    c0 = 1.0 / d + shift * db
    objective = np.zeros(nvars)
    objective[-1] = d
    problem = sdp.SdpProblem(objective, tuple(blocks), np.append(sdp.pack_hermitian(y0), c0),
                             eq_matrix=eq, eq_rhs=np.zeros(eq.shape[0]), herm_dim=n)
    sol = sdp.solve(problem)
    return EmaxResult(float(np.log2(sol.optimum)), "upper_marginal_sdp", sol.gap)


@dataclass(frozen=True)
class PhaseCovariantSeparable:
    """Two-qubit separable state invariant under the z-rotation ``U_theta``.

    In the basis 00, 01, 10, 11 the matrix is one half of
    ``[[alpha, 0, 0, xi e^{i phi}], [0, gamma, 0, 0], [0, 0, delta, 0],
    [xi e^{-i phi}, 0, 0, beta]]``; for two qubits the PPT bound on ``xi``
    makes every such matrix separable.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    xi: float
    phi: float = 0.0

    def __post_init__(self):
        a, b, g, d, xi = self.alpha, self.beta, self.gamma, self.delta, self.xi
        if min(a, b, g, d, xi) < -1e-12:
            raise ValueError("parameters must be nonnegative")
        if abs(a + b + g + d - 2) > 1e-9:
            raise ValueError("alpha + beta + gamma + delta must equal 2")
        if xi > min(np.sqrt(max(a * b, 0)), np.sqrt(max(g * d, 0))) + 1e-12:
            raise ValueError("xi exceeds the PPT bound")

    @property
    def matrix(self) -> np.ndarray:
        m = np.diag([self.alpha, self.gamma, self.delta, self.beta]).astype(complex)
        m[0, 3] = self.xi * np.exp(1j * self.phi)
        m[3, 0] = self.xi * np.exp(-1j * self.phi)
        return m / 2


def _unit_to_params(u: np.ndarray, variant: str):
    """Map points of the unit cube onto the feasible parameter set."""
    if variant == "lower":
        alpha = 2 * u[..., 0]
        beta = (2 - alpha) * u[..., 1]
        delta = (2 - alpha - beta) * u[..., 2]
        gamma = np.maximum(2 - alpha - beta - delta, 0.0)
        xi_u, phi_u = u[..., 3], u[..., 4]
    else:
        alpha, beta = u[..., 0], u[..., 1]
        gamma, delta = 1 - alpha, 1 - beta
        xi_u, phi_u = u[..., 2], u[..., 3]
    xi = xi_u * np.sqrt(np.maximum(np.minimum(alpha * beta, gamma * delta), 0.0))
    return alpha, beta, gamma, delta, xi, 2 * np.pi * phi_u


def _unit_gaps(u: np.ndarray, variant: str, alpha, beta, gamma, delta):
    """``alpha*beta - xi**2`` and ``sqrt(alpha*beta) - xi`` without cancellation.

    Near the rank-one edge of the {00, 11} block both differences are tiny,
    and forming them by subtraction leaves only noise.
    """
    xi_u = u[..., 3] if variant == "lower" else u[..., 2]
    ab = alpha * beta
    m = np.maximum(np.minimum(ab, gamma * delta), 0.0)
    det4 = (ab - m) + m * (1 - xi_u) * (1 + xi_u)
    root_gap = (np.sqrt(ab) - np.sqrt(m)) + np.sqrt(m) * (1 - xi_u)
    return det4, root_gap


def _xform_entries(pi: np.ndarray):
    mask = np.ones((4, 4), dtype=bool)
    for i, j in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0)]:
        mask[i, j] = False
    if np.max(np.abs(pi[mask])) > 1e-12:
        raise UnsupportedKind("Choi state is not invariant under z-rotations")
    return pi[0, 0].real, pi[3, 3].real, pi[0, 3], pi[1, 1].real, pi[2, 2].real


def xform_dmax(pi: np.ndarray, alpha, beta, gamma, delta, xi, phi):
    """D_max(pi || sigma) for X-shaped ``pi`` and phase-covariant ``sigma``.

    Both operators split into the {00, 11} block and two 1x1 blocks, so
    the largest generalised eigenvalue has a closed form.  Vectorised over
    the parameter arrays.
    """
    args = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, beta, gamma, delta, xi, phi)))
    return _xform_evaluator(pi)(*args)


def _xform_evaluator(pi: np.ndarray):
    """Vectorised ``log2`` of the generalised eigenvalues' max (or p-norm)."""
    p00, p33, p03, p11, p22 = _xform_entries(pi)
    tol = 1e-10
    det_p = p00 * p33 - abs(p03) ** 2
    pi_b_zero = max(p00, p33) <= tol

    sq_p = np.sqrt(p00 * p33)
    abs_p03, arg_p03 = abs(p03), np.angle(p03)

    def evaluate(alpha, beta, gamma, delta, xi, phi, power=None, gaps=None):
        s00, s33 = alpha / 2, beta / 2
        rot = np.exp(1j * phi)
        if gaps is None:
            gaps = (alpha * beta - xi * xi, np.sqrt(alpha * beta) - xi)
        det_s = gaps[0] / 4
        # lin = p00 s33 + p33 s00 - xi Re(p03 e^{-i phi}), regrouped into
        # nonnegative pieces so that it stays accurate when it is tiny
        lin = ((np.sqrt(p00 * s33) - np.sqrt(p33 * s00)) ** 2
               + np.sqrt(alpha * beta) * (sq_p - abs_p03)
               + abs_p03 * (gaps[1] + 2 * xi * np.sin((phi - arg_p03) / 2) ** 2))
        norm2 = s00 + s33
        regular = det_s > 1e-300
        safe_det = np.where(regular, det_s, 1.0)
        root = np.sqrt(np.maximum(lin * lin - 4 * safe_det * det_p, 0.0))
        with np.errstate(over="ignore"):
            top = (lin + root) / (2 * safe_det)
        # product of the two roots is det_p / det_s
        low = np.where(lin + root > 0, 2 * det_p / np.where(lin + root > 0, lin + root, 1.0), 0.0)
        if not regular.all():
            # rank-one (or zero) block sigma_b = |s><s|: pi_b must live on span{s}
            sa = np.sqrt(np.maximum(s00, 0.0))
            sb = np.sqrt(np.maximum(s33, 0.0)) * np.conj(rot)
            along = s00 * p00 + s33 * p33 + 2 * np.real(sa * p03 * sb)
            # weight of pi_b off span{s}; equals lin on this edge
            safe_n = np.where(norm2 > tol, norm2, 1.0)
            y_rank1 = np.where(lin / safe_n > tol, np.inf, along / safe_n ** 2)
            y_rank1 = np.where(norm2 <= tol, 0.0 if pi_b_zero else np.inf, y_rank1)
            top = np.where(regular, top, y_rank1)
            low = np.where(regular, low, 0.0)
        ratios = [top, low]
        for p, s in ((p11, gamma / 2), (p22, delta / 2)):
            big = s > tol
            ratios.append(np.where(big, p / np.where(big, s, 1.0), np.inf if p > tol else 0.0))
        ratios = np.stack(ratios)
        y = np.max(ratios, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log2(y)
            if power is not None:
                scaled = ratios / np.where(y > 0, y, 1.0)
                out = out + np.log2(np.sum(scaled ** power, axis=0)) / power
        return np.where(np.isnan(out), np.inf, out)

    return evaluate


def _golden_min(fn, lo, hi, tol):
    inv_phi = (np.sqrt(5.0) - 1) / 2
    a, b = lo.copy(), hi.copy()
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while np.max(b - a) > tol:
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - inv_phi * (b - a)
        new_d = a + inv_phi * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        f_eval = fn(np.where(left, new_c, new_d))
        fc, fd = np.where(left, f_eval, fd), np.where(left, fc, f_eval)
        c, d = c_next, d_next
    x = (a + b) / 2
    return x, fn(x)


def _line_bounds(u: np.ndarray, direction: np.ndarray):
    """Step interval keeping ``u + s * direction`` inside the unit cube."""
    with np.errstate(divide="ignore", invalid="ignore"):
        to_hi = np.where(direction > 0, (1 - u) / direction, np.where(direction < 0, -u / direction, np.inf))
        to_lo = np.where(direction > 0, -u / direction, np.where(direction < 0, (1 - u) / direction, -np.inf))
    lo, hi = np.max(to_lo, axis=-1), np.min(to_hi, axis=-1)
    still = ~np.isfinite(lo) | ~np.isfinite(hi)
    return np.where(still, 0.0, lo), np.where(still, 0.0, hi)


def emax_reduced(channel: Channel, variant: str | None = None, *, starts: int = 64,
                 tol: float = 1e-8, max_sweeps: int = 50, extra_directions: int = 2,
                 stall_tol: float = 1e-10,
                 seed: int = SEED) -> EmaxResult:
    """Minimise D_max(pi || sigma) over the phase-covariant separable family.

    ``variant="lower"`` searches all such states (the lower bound, equal to
    E_max on Choi-simulable channels); ``variant="upper"`` adds the marginal
    constraint Tr_B sigma = 1/2, which gives E_max of the amplitude damping
    channel.  The default picks whichever equals E_max for the channel.

    The search runs from ``starts`` seeded points of the unit cube (mapped
    onto the feasible parameters by :func:`_unit_to_params`).  Each sweep does
    golden-section line searches along every coordinate, along a few fresh
    random directions, and along each start's net displacement over the
    previous sweep.  The last two get the iterate moving along ridges where
    pieces of the max tie and no single coordinate descends.
    """
    if channel.kind not in PHASE_COVARIANT:
        raise UnsupportedKind(f"reduced search needs a phase-covariant qubit channel, got {channel.kind!r}")
    if variant is None:
        variant = "lower" if channel.choi_simulable else "upper"
    if variant not in ("lower", "upper"):
        raise ValueError(f"variant must be 'lower' or 'upper', got {variant!r}")
    pi = choi(channel).matrix
    ndim = 5 if variant == "lower" else 4
    rng = np.random.default_rng(seed)
    u = rng.random((starts, ndim))
    evaluate = _xform_evaluator(pi)

    def objective(points, power):
        points = np.clip(points, 0.0, 1.0)
        params = _unit_to_params(points, variant)
        return evaluate(*params, power=power, gaps=_unit_gaps(points, variant, *params[:4]))

    def line_search(direction, power, step_tol):
        nonlocal u, best
        lo, hi = _line_bounds(u, direction)
        step, f_step = _golden_min(lambda st: objective(u + st[:, None] * direction, power), lo, hi, step_tol)
        better = f_step < best
        u = np.where(better[:, None], np.clip(u + step[:, None] * direction, 0.0, 1.0), u)
        best = np.where(better, f_step, best)

    for stage, power in enumerate(SMOOTHING_POWERS):
        step_tol = tol if stage >= len(SMOOTHING_POWERS) - 2 else 1e-5
        best = objective(u, power)
        stalled = 0
        for _ in range(max_sweeps):
            previous, u_before = np.min(best), u.copy()
            extra = rng.normal(size=(extra_directions, ndim))
            for direction in list(np.eye(ndim)) + list(extra / np.linalg.norm(extra, axis=1, keepdims=True)):
                line_search(direction, power, step_tol)
            moved = u - u_before
            norm = np.linalg.norm(moved, axis=1, keepdims=True)
            if np.any(norm > 0):
                line_search(np.where(norm > 0, moved / np.where(norm > 0, norm, 1.0), 0.0), power, step_tol)
            stalled = stalled + 1 if previous - np.min(best) <= stall_tol else 0
            if stalled >= 2:
                break
    best = objective(u, None)
    return EmaxResult(float(np.min(best)), "reduced", 0.0)
