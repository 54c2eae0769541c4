"""In-place Pauli-exponential kernels on batched amplitude stacks.

A stack has shape ``(batch, dim, cols)``: ``batch`` independent time steps,
``dim`` basis rows and ``cols`` columns (1 for a statevector, ``dim`` when
assembling a propagator).  Each batch entry gets its own angle, which is
how a field-dependent coefficient per time step is applied in one call.

numba is used when available; the numpy fallback gives identical results.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _exp_numpy(stack, xmask, phase, cos, sin):
    dim = stack.shape[1]
    rows = np.arange(dim) ^ xmask
    c = cos[:, None, None]
    s = sin[:, None, None]
    flipped = phase[None, :, None] * stack[:, rows, :]
    stack *= c
    stack -= 1j * s * flipped


if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=False)
    def _exp_numba(stack, xmask, phase, cos, sin):  # pragma: no cover - compiled
        nb, dim, nc = stack.shape
        for b in range(nb):
            c = cos[b]
            ms = -1j * sin[b]
            if xmask == 0:
                for k in range(dim):
                    f = c + ms * phase[k]
                    for j in range(nc):
                        stack[b, k, j] *= f
            else:
                for k in range(dim):
                    l = k ^ xmask
                    if l < k:
                        continue
                    pk = ms * phase[k]
                    pl = ms * phase[l]
                    for j in range(nc):
                        u = stack[b, k, j]
                        v = stack[b, l, j]
                        stack[b, k, j] = c * u + pk * v
                        stack[b, l, j] = c * v + pl * u


if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=False)
    def _run_numba(psi, xmasks, phases, terms, weights, coeffs, tau, n, glob):  # pragma: no cover - compiled
        dim, nc = psi.shape
        for t in range(coeffs.shape[0]):
            for _ in range(n):
                for q in range(terms.size):
                    l = terms[q]
                    a = coeffs[t, l] * weights[q] * tau
                    c = np.cos(a)
                    ms = -1j * np.sin(a)
                    xm = xmasks[l]
                    if xm == 0:
                        for k in range(dim):
                            f = c + ms * phases[l, k]
                            for j in range(nc):
                                psi[k, j] *= f
                    else:
                        for k in range(dim):
                            m = k ^ xm
                            if m < k:
                                continue
                            pk = ms * phases[l, k]
                            pm = ms * phases[l, m]
                            for j in range(nc):
                                u = psi[k, j]
                                v = psi[m, j]
                                psi[k, j] = c * u + pk * v
                                psi[m, j] = c * v + pm * u
            for k in range(dim):
                for j in range(nc):
                    psi[k, j] *= glob[t]


def run_schedule(psi: np.ndarray, xmasks: np.ndarray, phases: np.ndarray, terms: np.ndarray,
                 weights: np.ndarray, coeffs: np.ndarray, tau: float, n: int, glob: np.ndarray,
                 use_numba: bool | None = None) -> None:
    """Run a schedule ``n`` times per step on state columns ``psi`` (dim, cols), in place.

    Step ``t`` applies ``exp(-i coeffs[t, l] weights[q] tau B_l)`` for each
    schedule entry ``q`` with ``l = terms[q]``, repeated ``n`` times, then
    multiplies by the global phase ``glob[t]``.
    """
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA and psi.flags.c_contiguous:
        _run_numba(psi, xmasks, phases, terms, weights, coeffs, float(tau), int(n), glob)
        return
    stack = psi.reshape(1, *psi.shape)
    for t in range(coeffs.shape[0]):
        for _ in range(n):
            for l, w in zip(terms, weights):
                a = coeffs[t, l : l + 1] * (w * tau)
                _exp_numpy(stack, int(xmasks[l]), phases[l], np.cos(a), np.sin(a))
        psi *= glob[t]


def apply_exponentials(stack: np.ndarray, xmask: int, phase: np.ndarray, angles: np.ndarray,
                       use_numba: bool | None = None) -> None:
    """Apply ``exp(-i * angles[b] * B)`` to every ``stack[b]`` in place.

    Args:
        stack: complex array of shape (batch, dim, cols), C-contiguous.
        xmask: bit-flip mask of the Pauli string.
        phase: per-row phases so that ``(B u)[k] = phase[k] * u[k ^ xmask]``.
        angles: real array of length ``batch``.
        use_numba: force a backend; defaults to numba when installed.
    """
    angles = np.asarray(angles, dtype=float)
    cos = np.cos(angles)
    sin = np.sin(angles)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA and stack.flags.c_contiguous:
        _exp_numba(stack, int(xmask), np.ascontiguousarray(phase, dtype=complex), cos, sin)
    else:
        _exp_numpy(stack, int(xmask), phase, cos, sin)
