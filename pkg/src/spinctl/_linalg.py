"""Batched propagator utilities shared by the dynamics and optimizer modules."""

from __future__ import annotations

import numpy as np

__all__ = [
    "unitaries_from_eigensystems",
    "taylor_unitaries",
    "ordered_product",
    "prefix_products",
]

# Order of the Taylor expansion used by taylor_unitaries. At the substep
# norms used here (max |eigenvalue| * dt <= ~0.2) the order-10 remainder is
# below double-precision round-off.
_TAYLOR_ORDER = 10


def unitaries_from_eigensystems(evals: np.ndarray, evecs: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian H given as (evals, evecs)."""
    phases = np.exp(-1j * evals * dt)
    return np.matmul(evecs * phases[..., None, :], np.conjugate(np.swapaxes(evecs, -1, -2)))


def taylor_unitaries(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) by a Horner-evaluated Taylor series.

    Valid only for small steps (spectral radius * dt well below 1); callers
    keep max|eig| * dt <= ~0.2 where the truncation error is ~1e-16.
    """
    a = (-1j * dt) * h
    d = h.shape[-1]
    eye = np.broadcast_to(np.eye(d, dtype=complex), a.shape)
    u = eye + a / _TAYLOR_ORDER
    for k in range(_TAYLOR_ORDER - 1, 0, -1):
        u = eye + np.matmul(a, u) / k
    return u


def ordered_product(mats: np.ndarray) -> np.ndarray:
    """Product M[n-1] @ ... @ M[1] @ M[0] by pairwise reduction.

    Accepts shape (n, d, d) or (..., n, d, d); reduces along axis -3.
    """
    p = mats
    while p.shape[-3] > 1:
        n2 = p.shape[-3] // 2
        q = np.matmul(p[..., 1:2 * n2:2, :, :], p[..., 0:2 * n2:2, :, :])
        if p.shape[-3] % 2:
            q = np.concatenate([q, p[..., -1:, :, :]], axis=-3)
        p = q
    return p[..., 0, :, :]


def prefix_products(mats: np.ndarray) -> np.ndarray:
    """Inclusive prefix products P[k] = M[k] @ ... @ M[0], shape (n, d, d).

    Hillis-Steele doubling: O(log n) batched matmul rounds over ping-pong
    buffers.
    """
    n = mats.shape[0]
    cur = np.array(mats)
    buf = np.empty_like(cur)
    step = 1
    while step < n:
        buf[:step] = cur[:step]
        np.matmul(cur[step:], cur[:-step], out=buf[step:])
        cur, buf = buf, cur
        step *= 2
    return cur
