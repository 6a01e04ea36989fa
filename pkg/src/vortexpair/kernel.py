"""Half-plane Green's function, streamfunction operator, induced velocity.

The wall-bounded kernel is built from the free-space log kernel by the
method of images:

    green(x, y) = (1/2pi) * ln(|x - ybar| / |x - y|),   ybar = (y1, -y2).

Applying it to a cell field uses midpoint quadrature plus an equal-area
disk rule for the singular self cell,

    int_disk ln(1/|y|) dy = h^2 (1/2 - ln(h / sqrt(pi))),

which is analytic and second-order accurate for the square cell.

Two evaluation modes share one contract and must agree to 1e-10 relative:

* ``direct``: chunked explicit summation (reference path),
* ``fast``: lattice convolutions of the odd-extended field with the
  free-space kernel tables, via FFT.  The odd extension places -field at
  the mirrored rows, so one convolution yields both the free and image
  terms; the (0,0) kernel offset only ever multiplies the cell itself,
  never its image (the image of a cell sits 2*x2 > 0 away).

Velocity uses the analytic kernel gradient (never finite differences of
the streamfunction); the free-space self-cell contribution vanishes by
symmetry, so the self term is the image-only part kappa_cell/(4 pi x2).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import fft as sfft

from .grid import HalfPlaneGrid, ScalarField

__all__ = ["self_cell_constant", "green", "KernelEvaluator"]

_SQRT_PI = math.sqrt(math.pi)
_TWO_PI = 2.0 * math.pi


def self_cell_constant(h: float) -> float:
    """Disk-equivalent self integral of ln(1/|y|) over one cell."""
    return h * h * (0.5 - math.log(h / _SQRT_PI))


def green(x, y) -> float | np.ndarray:
    """Wall-bounded kernel (1/2pi) ln(|x - ybar|/|x - y|), vectorized over y.

    Both points must lie strictly above the wall; coincident points are a
    kernel singularity.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x[..., 1] <= 0) or np.any(y[..., 1] <= 0):
        raise ValueError("kernel points must satisfy x2 > 0")
    d1 = x[..., 0] - y[..., 0]
    dm = x[..., 1] - y[..., 1]
    dp = x[..., 1] + y[..., 1]
    r2 = d1 * d1 + dm * dm
    if np.any(r2 == 0):
        raise ValueError("kernel singularity")
    out = 0.5 * (np.log(d1 * d1 + dp * dp) - np.log(r2)) / _TWO_PI
    return float(out) if out.ndim == 0 else out


class KernelEvaluator:
    """Streamfunction and velocity from vorticity on one half-plane grid.

    Immutable after construction; FFT kernel tables are built lazily and
    cached, so concurrent evaluations on one instance are safe once the
    first call has completed.
    """

    def __init__(self, grid: HalfPlaneGrid, mode: str = "fast"):
        if not isinstance(grid, HalfPlaneGrid):
            raise TypeError("KernelEvaluator requires a HalfPlaneGrid")
        if mode not in ("direct", "fast"):
            raise ValueError(f"unknown kernel mode {mode!r}")
        self.grid = grid
        self.mode = mode
        self.self_cell_constant = self_cell_constant(grid.h)
        self._fft_cache: dict[str, np.ndarray] = {}
        self._pad_shape: tuple[int, int] | None = None

    # -- public operations -------------------------------------------------

    def apply_G(self, f: ScalarField) -> ScalarField:
        """Streamfunction psi with psi >= 0 for nonnegative vorticity."""
        self._check_field(f)
        if self.mode == "direct":
            psi = self._psi_direct(f.values)
        else:
            psi = self._psi_fft(f.values)
        return ScalarField(self.grid, psi, "stream")

    def velocity(self, f: ScalarField) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centered (v1, v2) induced by the vorticity field."""
        self._check_field(f)
        if self.mode == "direct":
            return self._vel_direct(f.values)
        return self._vel_fft(f.values)

    def energy(self, f: ScalarField, psi: ScalarField | None = None) -> float:
        """Kinetic energy (1/2) h^2 sum(v * psi)."""
        if psi is None:
            psi = self.apply_G(f)
        h = self.grid.h
        return float(0.5 * h * h * np.sum(f.values * psi.values))

    def stream_at(self, f: ScalarField, points: np.ndarray) -> np.ndarray:
        """Streamfunction at arbitrary probe points (direct summation).

        Probes may lie outside the window; they must not coincide with a
        cell center carrying nonzero vorticity.
        """
        self._check_field(f)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        X1, X2 = self.grid.centers()
        x1 = X1.ravel()
        x2 = X2.ravel()
        v = f.flat()
        nz = v != 0
        x1, x2, v = x1[nz], x2[nz], v[nz]
        h2 = self.grid.h ** 2
        out = np.empty(pts.shape[0])
        for k, (p1, p2) in enumerate(pts):
            d1 = p1 - x1
            dm = p2 - x2
            dp = p2 + x2
            r2 = d1 * d1 + dm * dm
            if np.any(r2 == 0):
                raise ValueError("probe point coincides with a loaded cell")
            out[k] = 0.5 * np.sum(v * (np.log(d1 * d1 + dp * dp) - np.log(r2)))
        return out * h2 / _TWO_PI

    # -- internals ----------------------------------------------------------

    def _check_field(self, f: ScalarField):
        if f.grid != self.grid:
            raise ValueError("field grid does not match evaluator grid")

    def _psi_direct(self, vals: np.ndarray) -> np.ndarray:
        grid = self.grid
        X1, X2 = grid.centers()
        x1 = X1.ravel()
        x2 = X2.ravel()
        v = vals.ravel()
        n = v.size
        h2 = grid.h ** 2
        psi = np.empty(n)
        step = max(1, (1 << 22) // max(n, 1))
        for a in range(0, n, step):
            b = min(a + step, n)
            d1 = x1[a:b, None] - x1[None, :]
            dm = x2[a:b, None] - x2[None, :]
            dp = x2[a:b, None] + x2[None, :]
            r2m = d1 * d1 + dm * dm
            # free-space log with the singular diagonal masked out; the
            # image log keeps its diagonal (distance 2*x2 > 0)
            idx = np.arange(a, b)
            r2m[idx - a, idx] = 1.0
            block = 0.5 * (np.log(d1 * d1 + dp * dp) - np.log(r2m))
            psi[a:b] = block @ v
        psi *= h2 / _TWO_PI
        psi += v * (self.self_cell_constant / _TWO_PI)
        return psi.reshape(grid.shape)

    def _vel_direct(self, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grid = self.grid
        X1, X2 = grid.centers()
        x1 = X1.ravel()
        x2 = X2.ravel()
        v = vals.ravel()
        n = v.size
        h2 = grid.h ** 2
        v1 = np.empty(n)
        v2 = np.empty(n)
        step = max(1, (1 << 22) // max(n, 1))
        for a in range(0, n, step):
            b = min(a + step, n)
            d1 = x1[a:b, None] - x1[None, :]
            dm = x2[a:b, None] - x2[None, :]
            dp = x2[a:b, None] + x2[None, :]
            r2m = d1 * d1 + dm * dm
            r2p = d1 * d1 + dp * dp
            idx = np.arange(a, b)
            r2m[idx - a, idx] = 1.0  # free-space self term excluded (zero by symmetry)
            dm[idx - a, idx] = 0.0
            v1[a:b] = (dp / r2p - dm / r2m) @ v
            v2[a:b] = -(d1 / r2p - d1 / r2m) @ v
        scale = h2 / _TWO_PI
        return (v1 * scale).reshape(grid.shape), (v2 * scale).reshape(grid.shape)

    def _odd_extension(self, vals: np.ndarray) -> np.ndarray:
        ny = self.grid.ny
        W = np.empty((2 * ny, self.grid.nx))
        W[ny:, :] = vals
        W[:ny, :] = -vals[::-1, :]
        return W

    def _kernel_table(self, name: str) -> np.ndarray:
        """Offset tables over dm in [-(2ny-1), 2ny-1], di in [-(nx-1), nx-1]."""
        nx, ny, h = self.grid.nx, self.grid.ny, self.grid.h
        dm = np.arange(-(2 * ny - 1), 2 * ny)[:, None].astype(float)
        di = np.arange(-(nx - 1), nx)[None, :].astype(float)
        r2 = dm * dm + di * di
        c = r2 == 0
        r2s = np.where(c, 1.0, r2)
        if name == "G":
            K = -(h * h / _TWO_PI) * 0.5 * np.log(r2s * h * h)
            K[c] = self.self_cell_constant / _TWO_PI
        elif name == "V1":
            K = -(h / _TWO_PI) * dm / r2s
            K[c] = 0.0
        elif name == "V2":
            K = (h / _TWO_PI) * di / r2s
            K[c] = 0.0
        else:  # pragma: no cover
            raise KeyError(name)
        return K

    def _kernel_fft(self, name: str):
        if self._pad_shape is None:
            nx, ny = self.grid.nx, self.grid.ny
            full = (2 * ny + 4 * ny - 2, nx + 2 * nx - 2)
            self._pad_shape = (sfft.next_fast_len(full[0]), sfft.next_fast_len(full[1]))
        if name not in self._fft_cache:
            self._fft_cache[name] = sfft.rfft2(self._kernel_table(name), self._pad_shape)
        return self._fft_cache[name], self._pad_shape

    def _convolve_upper(self, W: np.ndarray, name: str) -> np.ndarray:
        """Upper-half rows of the full lattice convolution of W with a table."""
        khat, pad = self._kernel_fft(name)
        what = sfft.rfft2(W, pad)
        full = sfft.irfft2(what * khat, pad)
        nx, ny = self.grid.nx, self.grid.ny
        # target cell (m0, i0) of the extended lattice sits at full index
        # (m0 + 2ny - 1, i0 + nx - 1); keep the upper half m0 >= ny.
        return full[3 * ny - 1:4 * ny - 1, nx - 1:2 * nx - 1]

    def _psi_fft(self, vals: np.ndarray) -> np.ndarray:
        return self._convolve_upper(self._odd_extension(vals), "G")

    def _vel_fft(self, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        W = self._odd_extension(vals)
        return self._convolve_upper(W, "V1"), self._convolve_upper(W, "V2")
