"""Bessel functions of the first kind by ascending power series.

Only J0 and J1 on |z| <= 12 are needed (the dipole eigenvalue sits below
4), where the alternating series converges to machine precision in well
under 60 terms, so no special-function dependency is pulled in.
"""

from __future__ import annotations

import numpy as np

__all__ = ["j0", "j1", "j1_first_zero"]

_MAX_ARG = 12.0
_TERMS = 64


def _series(z, n: int):
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > _MAX_ARG):
        raise ValueError(f"series evaluation limited to |z| <= {_MAX_ARG}")
    q = 0.25 * z * z
    # leading term (z/2)^n / n!
    term = np.ones_like(z) if n == 0 else 0.5 * z
    total = term.copy()
    for m in range(1, _TERMS):
        term = term * (-q / (m * (m + n)))
        total += term
    return total


def j0(z):
    out = _series(z, 0)
    return float(out) if np.ndim(z) == 0 else out


def j1(z):
    out = _series(z, 1)
    return float(out) if np.ndim(z) == 0 else out


def j1_first_zero(tol: float = 1e-12) -> float:
    """First positive zero of J1 (~3.8317) by bisection on the series."""
    lo, hi = 3.0, 4.5
    flo = j1(lo)
    if not (flo > 0 and j1(hi) < 0):
        raise RuntimeError("bisection bracket invalid")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if j1(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
