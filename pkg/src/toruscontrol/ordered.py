"""Path-ordered exponentials along a parameter path.

``midpoint`` (default) samples the generators once per step at the midpoint
schedule time and contracts them with the exact increment of the path;
second order. ``magnus4`` is the two-point Gauss-Legendre Magnus step,
fourth order, for checks that need tighter tolerances at modest step counts.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import InvalidInputError
from .path import ParameterPath, eval_path, time_grid

Generator = Callable[[float, np.ndarray], Sequence[np.ndarray]]

_GAUSS = np.sqrt(3.0) / 6.0
METHODS = ("midpoint", "magnus4")


def path_ordered_exp(
    path: ParameterPath,
    steps: int,
    generator: Generator,
    scale: complex = 1.0,
    drift: Optional[np.ndarray] = None,
    duration: float = 1.0,
    method: str = "midpoint",
) -> np.ndarray:
    """``T exp[scale * (int G_alpha dxi^alpha + duration * int drift dt)]``.

    ``generator(t, sigma)`` returns one matrix per parameter axis. Later steps
    multiply from the left.
    """
    if method not in METHODS:
        raise InvalidInputError(f"unknown ordering method {method!r}")
    grid = time_grid(path, steps)
    U = None

    def rate(t, side="right"):
        sigma, sigma_dot = eval_path(path, t, side)
        mats = generator(t, sigma)
        A = sum(v * M for v, M in zip(sigma_dot, mats) if v != 0.0)
        if drift is not None:
            A = A + duration * drift
        return A, mats

    pos = np.array([eval_path(path, t)[0] for t in grid]) if method == "midpoint" else None
    for j in range(len(grid) - 1):
        t0, t1 = grid[j], grid[j + 1]
        h = t1 - t0
        if method == "midpoint":
            tm = 0.5 * (t0 + t1)
            sigma_mid, _ = eval_path(path, tm)
            mats = generator(tm, sigma_mid)
            dxi = pos[j + 1] - pos[j]
            G = sum(d * M for d, M in zip(dxi, mats) if d != 0.0)
            if drift is not None:
                G = G + duration * h * drift
        else:
            A1, mats = rate(t0 + (0.5 - _GAUSS) * h)
            A2, _ = rate(t0 + (0.5 + _GAUSS) * h)
            G = 0.5 * h * (A1 + A2)
            if not np.isscalar(A1) and not np.isscalar(A2):
                # the commutator term carries one extra factor of scale
                G = G + scale * (np.sqrt(3.0) / 12.0) * h * h * (A2 @ A1 - A1 @ A2)
        if U is None:
            n = mats[0].shape[0] if len(mats) else drift.shape[0]
            dtype = np.result_type(scale, *(M.dtype for M in mats), float)
            U = np.eye(n, dtype=dtype)
        if np.isscalar(G):  # all increments vanished
            continue
        U = expm(scale * G) @ U
    return U
