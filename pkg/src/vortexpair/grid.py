"""Uniform square-cell grids and cell-centered scalar fields.

Two window geometries are used throughout:

* ``HalfPlaneGrid``: a truncated window of the upper half-plane,
  x1 in [-L, L], x2 in (0, H].  Cell centers never sit on the wall x2 = 0.
* ``CenteredGrid``: a square window of the full plane centered at the
  origin, used for recentred/rescaled profiles.

All integrals follow one convention, fixed artifact-wide: midpoint
quadrature with weight h^2, i.e. integral(f) = h^2 * sum(values).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

__all__ = [
    "HalfPlaneGrid",
    "CenteredGrid",
    "ScalarField",
    "CellSet",
    "integral",
    "support",
    "diameter",
    "centroid",
    "lp_norm",
    "mirror",
]


@dataclass(frozen=True)
class HalfPlaneGrid:
    """Truncated half-plane window with nx-by-ny square cells.

    Invariants: h = 2L/nx = H/ny (square cells), nx even so the grid is
    mirror-symmetric about the x2 axis, and every cell center has x2 > 0.
    """

    L: float
    H: float
    nx: int
    ny: int
    h: float = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.L <= 0 or self.H <= 0:
            raise ValueError("window dimensions must be positive")
        if self.nx <= 0 or self.ny <= 0:
            raise ValueError("cell counts must be positive")
        if self.nx % 2 != 0:
            raise ValueError("nx must be even (mirror symmetry about the x2 axis)")
        h = 2.0 * self.L / self.nx
        if abs(self.H / self.ny - h) > 1e-12 * h:
            raise ValueError("cells must be square: 2L/nx == H/ny")
        object.__setattr__(self, "h", h)

    @property
    def shape(self) -> tuple[int, int]:
        """(ny, nx): row index j runs over heights, column index i over x1."""
        return (self.ny, self.nx)

    @property
    def ncells(self) -> int:
        return self.nx * self.ny

    def x1_centers(self) -> np.ndarray:
        return -self.L + (np.arange(self.nx) + 0.5) * self.h

    def x2_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.h

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate matrices X1, X2, each of shape (ny, nx)."""
        X1, X2 = np.meshgrid(self.x1_centers(), self.x2_centers())
        return X1, X2

    def cell_index(self, x1, x2):
        """Nearest-cell flat indices for query points (vectorized).

        Returns (idx, inside) where idx is clipped to the window and the
        boolean mask flags points whose nearest cell actually exists.
        """
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        i = np.rint((x1 + self.L) / self.h - 0.5).astype(np.int64)
        j = np.rint(x2 / self.h - 0.5).astype(np.int64)
        inside = (i >= 0) & (i < self.nx) & (j >= 0) & (j < self.ny)
        i = np.clip(i, 0, self.nx - 1)
        j = np.clip(j, 0, self.ny - 1)
        return j * self.nx + i, inside


@dataclass(frozen=True)
class CenteredGrid:
    """Square plane window x1, x2 in (-R, R) with n-by-n cells, n even."""

    R: float
    n: int
    h: float = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("window half-width must be positive")
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError("n must be a positive even integer")
        object.__setattr__(self, "h", 2.0 * self.R / self.n)

    @property
    def nx(self) -> int:
        return self.n

    @property
    def ny(self) -> int:
        return self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def ncells(self) -> int:
        return self.n * self.n

    def x1_centers(self) -> np.ndarray:
        return -self.R + (np.arange(self.n) + 0.5) * self.h

    def x2_centers(self) -> np.ndarray:
        return -self.R + (np.arange(self.n) + 0.5) * self.h

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        X1, X2 = np.meshgrid(self.x1_centers(), self.x2_centers())
        return X1, X2

    def cell_index(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        i = np.rint((x1 + self.R) / self.h - 0.5).astype(np.int64)
        j = np.rint((x2 + self.R) / self.h - 0.5).astype(np.int64)
        inside = (i >= 0) & (i < self.n) & (j >= 0) & (j < self.n)
        i = np.clip(i, 0, self.n - 1)
        j = np.clip(j, 0, self.n - 1)
        return j * self.n + i, inside


Grid = HalfPlaneGrid | CenteredGrid

_KINDS = ("vorticity", "stream", "generic")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Immutable cell-centered values on a grid, shape (ny, nx) row-major.

    The flat index of cell (j, i) is j*nx + i; within a row, x1 varies
    fastest.  Vorticity-kind fields must be nonnegative everywhere.
    """

    grid: Grid
    values: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "vorticity" and np.any(vals < 0):
            raise ValueError("vorticity fields must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def h(self) -> float:
        return self.grid.h

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values, kind=None) -> "ScalarField":
        return ScalarField(self.grid, values, self.kind if kind is None else kind)


@dataclass(frozen=True, eq=False)
class CellSet:
    """Distinct flat cell indices on one grid (stored sorted)."""

    grid: Grid
    idx: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.idx, dtype=np.int64))
        if idx.size != np.asarray(self.idx).size:
            raise ValueError("cell indices must be distinct")
        if idx.size and (idx[0] < 0 or idx[-1] >= self.grid.ncells):
            raise ValueError("cell index out of range")
        idx.setflags(write=False)
        object.__setattr__(self, "idx", idx)

    def __len__(self) -> int:
        return int(self.idx.size)

    def center_coords(self) -> tuple[np.ndarray, np.ndarray]:
        X1, X2 = self.grid.centers()
        return X1.ravel()[self.idx], X2.ravel()[self.idx]


def zeros(grid: Grid, kind: str = "generic") -> ScalarField:
    return ScalarField(grid, np.zeros(grid.shape), kind)


def integral(f: ScalarField) -> float:
    return float(f.h * f.h * f.values.sum())


def mirror(f: ScalarField) -> ScalarField:
    """Reflection about the x2 axis: (x1, x2) -> (-x1, x2)."""
    return f.with_values(f.values[:, ::-1])


def support(f: ScalarField, tau: float = 0.0) -> CellSet:
    """Cells with value strictly greater than tau."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return CellSet(f.grid, np.flatnonzero(f.flat() > tau))


def diameter(s: CellSet) -> float:
    """Max pairwise distance between cell centers in the set.

    Centers-only convention: a single cell has diameter 0 and the value
    carries an O(h) bias relative to the cell-extent diameter.
    """
    if len(s) == 0:
        raise ValueError("empty support")
    x1, x2 = s.center_coords()
    # hull-free pairwise max; supports here stay small (O(eps^2/h^2) cells)
    best = 0.0
    step = 2048
    for a in range(0, x1.size, step):
        dx = x1[a:a + step, None] - x1[None, :]
        dy = x2[a:a + step, None] - x2[None, :]
        m = float(np.max(dx * dx + dy * dy))
        best = max(best, m)
    return float(np.sqrt(best))


def centroid(f: ScalarField) -> np.ndarray:
    """Mass centroid (sum c_i v_i) / (sum v_i); independent of the h^2 weight."""
    v = f.values
    if np.any(v < 0):
        raise ValueError("centroid requires a nonnegative field")
    tot = v.sum()
    if tot <= 0:
        raise ValueError("centroid of a zero-mass field")
    X1, X2 = f.grid.centers()
    return np.array([float((X1 * v).sum() / tot), float((X2 * v).sum() / tot)])


def lp_norm(f: ScalarField, p) -> float:
    """(h^2 sum |v|^p)^(1/p); max |v| for p = inf."""
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(f.values))) if f.values.size else 0.0
    p = float(p)
    if p < 1:
        raise ValueError("p must satisfy p >= 1")
    return float((f.h * f.h * np.abs(f.values) ** p).sum() ** (1.0 / p))
