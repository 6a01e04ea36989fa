"""Reference mass profiles and their concentration scaling.

Built-in profiles are radial and analytic:

* ``disk(a)``: indicator of the radius-a disk, total mass pi a^2,
* ``cone(a)``: max(0, 1 - |x|/a), total mass pi a^2 / 3.

Canonically a built-in profile sits at (0, 2a) in the half-plane window.
User profiles come from CSV files with columns x1, x2, value covering a
complete uniform cell lattice.

The concentration family is rho_eps(x) = eps^-2 rho(x/eps).  Sampling a
scaled profile always ends with an exact mass renormalization so the
discrete integral equals kappa bit-for-bit; every limit measured
downstream is stated at fixed kappa and sampling drift would contaminate
the measured constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid, HalfPlaneGrid, ScalarField
from .rearrange import MassProfile

__all__ = ["ReferenceProfile", "parse_profile", "load_profile_csv"]

_BUILTIN_RE = re.compile(r"^\s*(disk|cone)\s*\(\s*([0-9.eE+-]+)\s*\)\s*$")


@dataclass(frozen=True, eq=False)
class ReferenceProfile:
    """A nonnegative compactly supported reference profile.

    ``radial`` is the analytic value as a function of distance from the
    profile center (built-ins); CSV profiles carry a sampled field
    instead and are looked up by nearest cell.
    """

    name: str
    kappa: float
    radius: float
    radial: Callable[[np.ndarray], np.ndarray] | None = None
    field: ScalarField | None = None
    center: tuple[float, float] = (0.0, 0.0)

    @property
    def max_value(self) -> float:
        if self.radial is not None:
            return float(np.max(self.radial(np.linspace(0.0, self.radius, 4097))))
        return float(self.field.values.max())

    def sample_at(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """Profile values at arbitrary points (0 outside the support)."""
        if self.radial is not None:
            r = np.hypot(x1 - self.center[0], x2 - self.center[1])
            return np.where(r <= self.radius, self.radial(np.minimum(r, self.radius)), 0.0)
        idx, inside = self.field.grid.cell_index(x1, x2)
        return np.where(inside, self.field.flat()[idx], 0.0)

    def scaled_field(self, eps: float, grid: Grid, center=None) -> ScalarField:
        """eps^-2 rho((x - shift)/eps) sampled on a grid, mass pinned to kappa.

        With no explicit center the profile scales about the origin, so a
        built-in sitting at (0, 2a) lands at (0, 2a*eps).  Passing a center
        places the scaled blob there instead.
        """
        if not (0 < eps <= 1):
            raise ValueError("eps must lie in (0, 1]")
        X1, X2 = grid.centers()
        if center is None:
            vals = self.sample_at(X1 / eps, X2 / eps) / eps**2
        else:
            c0 = np.asarray(self.center)
            vals = self.sample_at(
                (X1 - center[0]) / eps + c0[0], (X2 - center[1]) / eps + c0[1]
            ) / eps**2
        total = grid.h**2 * vals.sum()
        if total <= 0:
            raise ValueError("scaled profile does not intersect the grid")
        return ScalarField(grid, vals * (self.kappa / total), "vorticity")

    def class_profile(self, eps: float, h: float, ncells: int) -> MassProfile:
        """Sorted multiset of rho_eps on an h-lattice, zero-padded to ncells.

        The multiset is sampled on a free-floating lattice patch covering
        the full support, so it never depends on where the blob will be
        placed inside a window (and never gets clipped by one).
        """
        if not (0 < eps <= 1):
            raise ValueError("eps must lie in (0, 1]")
        m = int(np.ceil((self.radius * eps) / h)) + 2
        pts = (np.arange(-m, m) + 0.5) * h
        X1, X2 = np.meshgrid(pts, pts)
        c0 = np.asarray(self.center)
        vals = self.sample_at(X1 / eps + c0[0], X2 / eps + c0[1]) / eps**2
        vals = vals[vals > 0]
        if vals.size == 0:
            raise ValueError("scaled profile unresolved at this spacing")
        if vals.size > ncells:
            raise ValueError("grid too small to hold all positive values")
        total = h * h * vals.sum()
        vals = vals * (self.kappa / total)
        return MassProfile(np.concatenate([vals, np.zeros(ncells - vals.size)]), h)

    def star_values(self, r: np.ndarray) -> np.ndarray:
        """Symmetric-decreasing representative as a radial function (built-ins)."""
        if self.radial is None:
            raise ValueError("analytic star profile only available for built-ins")
        return np.where(r <= self.radius, self.radial(np.minimum(r, self.radius)), 0.0)


def parse_profile(spec: str) -> ReferenceProfile:
    """Built-in spec like 'disk(1)' or 'cone(0.5)', or a path to a CSV file."""
    m = _BUILTIN_RE.match(spec)
    if not m:
        if spec.strip().lower().endswith(".csv"):
            return load_profile_csv(spec.strip())
        raise ValueError(f"unknown profile spec {spec!r}")
    kind, a = m.group(1), float(m.group(2))
    if a <= 0:
        raise ValueError("profile radius must be positive")
    if kind == "disk":
        return ReferenceProfile(
            name=f"disk({a:g})",
            kappa=np.pi * a * a,
            radius=a,
            radial=lambda r, a=a: np.ones_like(np.asarray(r, dtype=float)),
            center=(0.0, 2.0 * a),
        )
    return ReferenceProfile(
        name=f"cone({a:g})",
        kappa=np.pi * a * a / 3.0,
        radius=a,
        radial=lambda r, a=a: np.maximum(0.0, 1.0 - np.asarray(r, dtype=float) / a),
        center=(0.0, 2.0 * a),
    )


def load_profile_csv(path: str) -> ReferenceProfile:
    """Profile from CSV rows (x1, x2, value) on a half-plane cell lattice.

    The sample points must sit at cell centers of some uniform half-plane
    grid: x1 = (i + 1/2) h - L symmetric about zero, x2 = (j + 1/2) h > 0.
    This is exactly the lattice produced by the field CSV exporter.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        raise ValueError("empty profile")
    if data.shape[1] != 3:
        raise ValueError("profile CSV needs columns x1,x2,value")
    x1, x2, v = data[:, 0], data[:, 1], data[:, 2]
    if np.any(v < 0):
        raise ValueError("profile values must be nonnegative")
    if not np.any(v > 0):
        raise ValueError("empty profile")
    u1 = np.unique(x1)
    u2 = np.unique(x2)
    if u1.size < 2 or u2.size < 2:
        raise ValueError("profile CSV must cover a two-dimensional lattice")
    h = float(u1[1] - u1[0])
    if np.max(np.abs(np.diff(u1) - h)) > 1e-9 * h or np.max(np.abs(np.diff(u2) - h)) > 1e-9 * h:
        raise ValueError("profile CSV lattice must be uniform with square cells")
    if np.min(x2) <= 0:
        raise ValueError("profile samples must lie in the upper half-plane")
    if abs(u1[0] + u1[-1]) > 1e-9 * h:
        raise ValueError("profile CSV lattice must be symmetric about x1 = 0")
    nx = u1.size
    if nx % 2 != 0:
        raise ValueError("profile CSV lattice needs an even number of x1 columns")
    ny = int(round(u2[-1] / h + 0.5))
    grid = HalfPlaneGrid(L=nx * h / 2.0, H=ny * h, nx=nx, ny=ny)
    idx, inside = grid.cell_index(x1, x2)
    X1, X2 = grid.centers()
    if not np.all(inside) or np.max(np.hypot(X1.ravel()[idx] - x1, X2.ravel()[idx] - x2)) > 1e-9 * h:
        raise ValueError("profile CSV points do not sit at half-plane cell centers")
    vals = np.zeros(grid.shape)
    vals.flat[idx] = v
    field = ScalarField(grid, vals, "vorticity")
    kappa = h * h * float(v.sum())
    c1 = float((x1 * v).sum() / v.sum())
    c2 = float((x2 * v).sum() / v.sum())
    rad = float(np.max(np.hypot(x1[v > 0] - c1, x2[v > 0] - c2))) + h
    return ReferenceProfile(
        name="csv", kappa=kappa, radius=rad, field=field, center=(c1, c2)
    )
