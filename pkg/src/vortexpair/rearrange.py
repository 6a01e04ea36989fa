"""Discrete rearrangement classes and exact assignment steps.

On a uniform grid every cell has the same area h^2, so the discrete
rearrangement class of a field is simply the permutation orbit of its
cell values.  The class is represented by a ``MassProfile``: the sorted
multiset of values.

``maximize_linear`` is the solver's inner step: it assigns the k-th
largest profile value to the cell carrying the k-th largest potential,
which maximizes h^2 * sum(v_i * phi_i) exactly over the class.  Ties in
the potential are broken deterministically, grouping mirror pairs
adjacently (|x1| ascending, then x2 ascending, then x1 >= 0 before
x1 < 0) so that even potentials produce nearly even assignments and
repeated runs are bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CenteredGrid, Grid, ScalarField, mirror

__all__ = [
    "MassProfile",
    "profile_of",
    "assign_by_distance",
    "symmetric_decreasing",
    "maximize_linear",
    "steiner_symmetrize",
    "hardy_littlewood_check",
    "riesz_check",
]


@dataclass(frozen=True, eq=False)
class MassProfile:
    """Sorted (descending) multiset of nonnegative cell values, area h^2 each."""

    values: np.ndarray
    h: float

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if np.any(vals < 0):
            raise ValueError("profile values must be nonnegative")
        vals = np.sort(vals)[::-1].copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def kappa(self) -> float:
        """Total mass h^2 * sum(values)."""
        return float(self.h * self.h * self.values.sum())

    def padded(self, n: int) -> "MassProfile":
        """Same multiset padded with zeros (or trimmed of zeros) to length n."""
        if len(self) == n:
            return self
        if len(self) < n:
            return MassProfile(np.concatenate([self.values, np.zeros(n - len(self))]), self.h)
        if np.any(self.values[n:] > 0):
            raise ValueError("grid too small to hold all positive values")
        return MassProfile(self.values[:n], self.h)


def profile_of(f: ScalarField) -> MassProfile:
    if np.any(f.values < 0):
        raise ValueError("profile requires a nonnegative field")
    return MassProfile(f.flat(), f.h)


def _distance_order(grid: Grid, center) -> np.ndarray:
    """Cell order by distance from center, ties by smaller x2 then smaller x1."""
    X1, X2 = grid.centers()
    d2 = (X1.ravel() - center[0]) ** 2 + (X2.ravel() - center[1]) ** 2
    return np.lexsort((X1.ravel(), X2.ravel(), d2))


def assign_by_distance(p: MassProfile, grid: Grid, center) -> ScalarField:
    """Radially decreasing placement of the profile about an arbitrary center."""
    prof = p.padded(grid.ncells)
    out = np.empty(grid.ncells)
    out[_distance_order(grid, center)] = prof.values
    return ScalarField(grid, out.reshape(grid.shape), "vorticity")


def symmetric_decreasing(p: MassProfile, grid: CenteredGrid) -> ScalarField:
    """Symmetric-decreasing rearrangement about the origin of a centered grid."""
    return assign_by_distance(p, grid, (0.0, 0.0))


def potential_order(phi: ScalarField) -> np.ndarray:
    """Cell order by descending potential with the mirror-pair tie-break."""
    X1, X2 = phi.grid.centers()
    x1 = X1.ravel()
    neg_sign = (x1 < 0).astype(np.int8)  # x1 >= 0 first within a tie
    return np.lexsort((neg_sign, X2.ravel(), np.abs(x1), -phi.flat()))


def maximize_linear(p: MassProfile, phi: ScalarField) -> ScalarField:
    """Exact maximizer of h^2 sum(v * phi) over the rearrangement class of p."""
    n = phi.grid.ncells
    if len(p) != n:
        raise ValueError("profile length must equal the number of grid cells")
    out = np.empty(n)
    out[potential_order(phi)] = p.values
    return ScalarField(phi.grid, out.reshape(phi.grid.shape), "vorticity")


def steiner_symmetrize(f: ScalarField) -> ScalarField:
    """Per-row even, decreasing-in-|x1| symmetrization about the x2 axis.

    Each row's values are sorted and consecutive pairs are averaged onto
    mirror cell pairs, the cell-average of the exact one-dimensional
    symmetric-decreasing rearrangement of the row step function.  Row sums
    are preserved exactly and the output is exactly even, with centroid
    x1 = 0; the value multiset is generally not preserved (the result lies
    in the convex hull of the row's rearrangements, not the class itself).
    """
    if np.any(f.values < 0):
        raise ValueError("steiner symmetrization requires a nonnegative field")
    nx = f.grid.nx
    if nx % 2 != 0:
        raise ValueError("grid must have an even number of columns")
    s = np.sort(f.values, axis=1)[:, ::-1]
    pair = 0.5 * (s[:, 0::2] + s[:, 1::2])
    out = np.empty_like(f.values)
    out[:, nx // 2:] = pair
    out[:, :nx // 2] = pair[:, ::-1]
    return f.with_values(out)


def hardy_littlewood_check(u: ScalarField, v: ScalarField, tol: float = 1e-12) -> bool:
    """int(u v) <= int(u* v*) for the shared-grid symmetric-decreasing pair."""
    if u.grid != v.grid:
        raise ValueError("fields must share a grid")
    if np.any(u.values < 0) or np.any(v.values < 0):
        raise ValueError("rearrangement checks require nonnegative fields")
    h2 = u.h * u.h
    lhs = h2 * float(np.sum(u.values * v.values))
    # u* and v* share one distance ordering, so int(u* v*) is the sorted pairing
    us = np.sort(u.flat())
    vs = np.sort(v.flat())
    rhs = h2 * float(np.sum(us * vs))
    return lhs <= rhs + tol * max(1.0, abs(rhs))


def riesz_check(u: ScalarField, w: ScalarField, v_radial, tol: float = 1e-12) -> bool:
    """Triple-sum rearrangement inequality with a radial decreasing middle factor.

    Verifies by direct summation that

        h^4 sum_ij u_i v(|x_i - x_j|) w_j
          <= h^4 sum_ij u*_i v(|x_i - x_j|) w*_j

    where u*, w* rearrange u, w symmetrically about the grid origin and
    v_radial is a nonincreasing function of distance (so it equals its own
    rearrangement).
    """
    if u.grid != w.grid:
        raise ValueError("fields must share a grid")
    if not isinstance(u.grid, CenteredGrid):
        raise ValueError("riesz check runs on a centered grid")
    if np.any(u.values < 0) or np.any(w.values < 0):
        raise ValueError("rearrangement checks require nonnegative fields")
    grid = u.grid
    X1, X2 = grid.centers()
    x1 = X1.ravel()
    x2 = X2.ravel()
    D = np.hypot(x1[:, None] - x1[None, :], x2[:, None] - x2[None, :])
    V = np.asarray(v_radial(D), dtype=float)
    h4 = (grid.h * grid.h) ** 2

    def triple(a: ScalarField, b: ScalarField) -> float:
        return h4 * float(a.flat() @ V @ b.flat())

    us = assign_by_distance(profile_of(u), grid, (0.0, 0.0))
    ws = assign_by_distance(profile_of(w), grid, (0.0, 0.0))
    lhs = triple(u, w)
    rhs = triple(us, ws)
    return lhs <= rhs + tol * max(1.0, abs(rhs))


def asymmetry(f: ScalarField) -> float:
    """Evenness defect ||f - mirror(f)||_L1 normalized by the total mass."""
    h2 = f.h * f.h
    kappa = h2 * float(f.values.sum())
    if kappa <= 0:
        return 0.0
    return h2 * float(np.abs(f.values - mirror(f).values).sum()) / kappa
