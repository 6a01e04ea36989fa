"""Monotone ascent to a maximizer of E - q I over a rearrangement class.

The iteration is

    zeta_{k+1} = maximize_linear(profile, Phi_k),
    Phi_k      = G zeta_k - q x2,

optionally with Phi mirror-averaged (symmetric mode, the canonical even
representative) or cut off outside a ball B_{r0}(xhat) (constrained-
support mode).  Because E is a positive-semidefinite quadratic form, each
step satisfies J(zeta_{k+1}) >= J(zeta_k) up to the quadrature's PSD
defect, so the objective sequence is nondecreasing within a 1e-9 relative
slack; a genuine decrease aborts the run.

Fixed points satisfy zeta = f(G zeta - q x2) for an increasing f by
construction of the assignment step.  The finite class makes cycles
possible; assignments are hashed over a sliding window and a detected
cycle returns the best iterate seen.

Plain ascent only guarantees first-order local maximality.  On small
non-symmetric instances a deterministic 2-opt polish follows: value
swaps with exact objective deltas are applied while any strictly
improves, which in particular relocates a single-cell vortex to its
globally best cell.
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import CellSet, HalfPlaneGrid, ScalarField, support
from .kernel import KernelEvaluator
from .profiles import ReferenceProfile
from .rearrange import MassProfile, assign_by_distance, asymmetry, maximize_linear

__all__ = [
    "SolverConfig",
    "MaximizerResult",
    "SolverError",
    "BoundaryTouchError",
    "NotConvergedError",
    "ObjectiveDecreaseError",
    "ascend",
    "auto_grid",
    "multiplier",
    "multiplier_gap",
    "monotone_fit",
    "core_energy",
]

_POLISH_AUTO_CELLS = 512


class SolverError(RuntimeError):
    pass


class BoundaryTouchError(SolverError):
    """Positive cells too close to a truncation edge; enlarge L or H."""


class NotConvergedError(SolverError):
    pass


class ObjectiveDecreaseError(SolverError):
    """A step lost objective beyond the PSD slack: kernel discretization failure."""


@dataclass
class SolverConfig:
    profile: ReferenceProfile | MassProfile
    eps: float = 1.0
    q: float = 1.0
    grid: HalfPlaneGrid | None = None
    max_iters: int = 500
    tol: float = 1e-10
    plateau: int = 3
    symmetric: bool = True
    r0: float | None = None
    init_point: tuple[float, float] | None = None
    boundary_margin: int = 2
    mode: str = "fast"
    points_per_eps: int = 8
    polish: bool | None = None  # None: auto for small non-symmetric instances
    polish_max_cells: int = 4096
    history_window: int = 8

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.q <= 0:
            raise ValueError("q must be positive")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")

    @property
    def kappa(self) -> float:
        return self.profile.kappa

    @property
    def x_hat(self) -> tuple[float, float]:
        """Placement center: (0, kappa / (4 pi q)) unless overridden."""
        if self.init_point is not None:
            return tuple(self.init_point)
        return (0.0, self.kappa / (4.0 * math.pi * self.q))


@dataclass
class MaximizerResult:
    zeta: ScalarField
    psi: ScalarField
    T_eps: float
    mu: float
    core: CellSet
    iterations: int
    converged: bool
    asymmetry: float
    monotonicity_violations: int
    eps: float
    q: float
    kappa: float
    symmetric_mode: bool = True
    cycle: bool = False
    history: list = dc_field(default_factory=list)  # (iter, objective, mu, support size)

    def assignment_potential(self) -> np.ndarray:
        """The potential the final assignment answered to, flattened."""
        _, X2 = self.zeta.grid.centers()
        phi = self.psi.values - self.q * X2
        if self.symmetric_mode:
            phi = 0.5 * (phi + phi[:, ::-1])
        return phi.ravel()


def auto_grid(profile: ReferenceProfile | MassProfile, eps: float, q: float,
              points_per_eps: int = 8) -> HalfPlaneGrid:
    """Default window: L = max(4 xhat2, 10 eps a), H ~ 4 xhat2, h = eps/ppe.

    Maximizer cores are vertically confined near xhat2 = kappa/(4 pi q),
    so a height of a few xhat2 suffices (stretched when the scaled blob
    itself is taller); the width also covers the slow lateral decay.
    Cell counts round up so the spacing stays exactly eps/ppe.
    """
    kappa = profile.kappa
    radius = getattr(profile, "radius", 1.0)
    xhat2 = kappa / (4.0 * math.pi * q)
    h = eps / points_per_eps
    Lt = max(4.0 * xhat2, 10.0 * eps * radius)
    Ht = max(4.0 * xhat2, 2.0 * eps * radius + 10.0 * h)
    nx = 2 * int(math.ceil(Lt / h))
    ny = int(math.ceil(Ht / h))
    return HalfPlaneGrid(L=nx * h / 2.0, H=ny * h, nx=nx, ny=ny)


def _class_profile(cfg: SolverConfig, grid: HalfPlaneGrid) -> MassProfile:
    if isinstance(cfg.profile, MassProfile):
        return cfg.profile.padded(grid.ncells)
    return cfg.profile.class_profile(cfg.eps, grid.h, grid.ncells)


def _boundary_clear(vals: np.ndarray, margin: int) -> bool:
    """No positive cell within `margin` cells of the x1 = +-L or x2 = H edges.

    The wall x2 = 0 is a physical boundary, not a truncation artifact, so
    support may legitimately reach the bottom rows.
    """
    if margin <= 0:
        return True
    return not (
        np.any(vals[:, :margin] > 0)
        or np.any(vals[:, -margin:] > 0)
        or np.any(vals[-margin:, :] > 0)
    )


def _assignment_hash(vals: np.ndarray) -> bytes:
    return hashlib.sha256(vals.tobytes()).digest()


class _SwapPolisher:
    """Exact-delta 2-opt over value swaps; every accepted swap raises J.

    For a value transfer d = v_i - v_j between cells i and j the quadratic
    objective changes by

        dJ = h^2 [ d (Phi_j - Phi_i) + (d^2 / 2)(K_ii + K_jj - 2 K_ij) ],

    where K is the kernel matrix with the self-cell rule on its diagonal.
    Needs the dense kernel, so it is restricted to small grids.
    """

    def __init__(self, grid: HalfPlaneGrid, evaluator: KernelEvaluator):
        self.grid = grid
        self.h2 = grid.h ** 2
        X1, X2 = grid.centers()
        self.x1 = X1.ravel()
        self.x2 = X2.ravel()
        n = grid.ncells
        K = np.empty((n, n))
        for i in range(n):
            d1 = self.x1[i] - self.x1
            dm = self.x2[i] - self.x2
            dp = self.x2[i] + self.x2
            r2 = d1 * d1 + dm * dm
            r2[i] = 1.0
            K[i] = self.h2 / (4.0 * math.pi) * (np.log(d1 * d1 + dp * dp) - np.log(r2))
        K[np.arange(n), np.arange(n)] = (
            evaluator.self_cell_constant + self.h2 * np.log(2.0 * self.x2)
        ) / (2.0 * math.pi)
        self.K = K

    def polish(self, v: np.ndarray, q: float, tol: float) -> tuple[np.ndarray, int]:
        """Greedy best-swap loop; returns the new values and the swap count."""
        v = v.copy()
        K = self.K
        n = v.size
        psi = K @ v
        phi = psi - q * self.x2
        kd = np.diag(K)
        nswaps = 0
        limit = 4 * n + 64
        while nswaps < limit:
            sup = np.flatnonzero(v > 0)
            d = v[sup, None] - v[None, :]
            quad = kd[sup, None] + kd[None, :] - 2.0 * K[sup, :]
            dj = self.h2 * (d * (phi[None, :] - phi[sup, None]) + 0.5 * d * d * quad)
            k = int(np.argmax(dj))
            if dj.flat[k] <= tol:
                break
            i = int(sup[k // n])
            j = int(k % n)
            dij = v[i] - v[j]
            v[i], v[j] = v[j], v[i]
            psi += dij * (K[:, j] - K[:, i])
            phi = psi - q * self.x2
            nswaps += 1
        return v, nswaps


def ascend(cfg: SolverConfig) -> MaximizerResult:
    """Run the rearrangement ascent to a converged maximizer."""
    grid = cfg.grid if cfg.grid is not None else auto_grid(
        cfg.profile, cfg.eps, cfg.q, cfg.points_per_eps)
    prof = _class_profile(cfg, grid)
    ev = KernelEvaluator(grid, cfg.mode)
    X1, X2 = grid.centers()
    h2 = grid.h ** 2
    q = cfg.q
    xhat = cfg.x_hat

    do_polish = cfg.polish
    if do_polish is None:
        do_polish = (not cfg.symmetric) and grid.ncells <= _POLISH_AUTO_CELLS
    if do_polish and grid.ncells > cfg.polish_max_cells:
        raise ValueError("polish requested on a grid beyond polish_max_cells")
    polisher = _SwapPolisher(grid, ev) if do_polish else None

    ball = None
    if cfg.r0 is not None:
        ball = (X1 - xhat[0]) ** 2 + (X2 - xhat[1]) ** 2 <= cfg.r0 ** 2
        if int(ball.sum()) < int(np.sum(prof.values > 0)):
            raise ValueError("support constraint ball holds fewer cells than the profile")

    zeta = assign_by_distance(prof, grid, xhat)

    history = []
    best = None  # (J, zeta, psi)
    prev_J = None
    plateau_run = 0
    seen = deque(maxlen=cfg.history_window)
    iterations = 0
    converged = False
    cycle = False

    for _outer in range(6):
        while iterations < cfg.max_iters:
            if not _boundary_clear(zeta.values, cfg.boundary_margin):
                raise BoundaryTouchError("support touches boundary")
            psi = ev.apply_G(zeta)
            J = 0.5 * h2 * float(np.sum(zeta.values * psi.values)) \
                - q * h2 * float(np.sum(X2 * zeta.values))
            phi_vals = psi.values - q * X2
            core_mask = zeta.values > 0
            mu_now = float(np.min(phi_vals[core_mask])) if core_mask.any() else 0.0
            history.append((iterations, J, mu_now, int(core_mask.sum())))

            if prev_J is not None and J < prev_J - 1e-9 * abs(prev_J):
                raise ObjectiveDecreaseError("objective decreased")
            if best is None or J > best[0]:
                best = (J, zeta, psi)

            if prev_J is not None and abs(J - prev_J) <= cfg.tol * max(abs(prev_J), 1e-300):
                plateau_run += 1
            else:
                plateau_run = 0
            if plateau_run >= cfg.plateau:
                converged = True
                break
            prev_J = J

            hsh = _assignment_hash(zeta.values)
            if hsh in seen:
                converged = True
                cycle = True
                break
            seen.append(hsh)

            phi = phi_vals
            if cfg.symmetric:
                phi = 0.5 * (phi + phi[:, ::-1])
            if ball is not None:
                # finite sentinel strictly below every admissible potential
                floor = float(phi.min()) - 1.0 - (float(phi.max()) - float(phi.min()))
                phi = np.where(ball, phi, floor)
            nxt = maximize_linear(prof, ScalarField(grid, phi))
            iterations += 1
            if np.array_equal(nxt.values, zeta.values):
                converged = True
                break
            zeta = nxt
        else:
            raise NotConvergedError("not converged")

        if polisher is None:
            break
        newvals, nswaps = polisher.polish(
            best[1].flat(), q, 1e-12 * max(1.0, abs(best[0])))
        if nswaps == 0:
            break
        zeta = ScalarField(grid, newvals.reshape(grid.shape), "vorticity")
        prev_J = None
        plateau_run = 0
        seen.clear()
        converged = False
        cycle = False
    else:
        raise NotConvergedError("polish alternation did not settle")

    J, zeta, psi = best
    if not _boundary_clear(zeta.values, cfg.boundary_margin):
        raise BoundaryTouchError("support touches boundary")

    phi_raw = (psi.values - q * X2)
    core = support(zeta, 0.0)
    mu = float(np.min(phi_raw.ravel()[core.idx]))
    result = MaximizerResult(
        zeta=zeta,
        psi=psi,
        T_eps=J,
        mu=mu,
        core=core,
        iterations=iterations,
        converged=converged,
        asymmetry=asymmetry(zeta),
        monotonicity_violations=0,
        eps=cfg.eps,
        q=q,
        kappa=prof.kappa,
        symmetric_mode=cfg.symmetric,
        cycle=cycle,
        history=history,
    )
    result.monotonicity_violations = monotone_fit(result)
    return result


def multiplier(r: MaximizerResult) -> float:
    """Threshold potential: min over core cells of (psi - q x2)."""
    if len(r.core) == 0:
        raise ValueError("empty core")
    _, X2 = r.zeta.grid.centers()
    phi = (r.psi.values - r.q * X2).ravel()
    return float(np.min(phi[r.core.idx]))


def multiplier_gap(r: MaximizerResult) -> float:
    """Largest excess of (psi - q x2) over mu outside the core (0 if none)."""
    _, X2 = r.zeta.grid.centers()
    phi = (r.psi.values - r.q * X2).ravel()
    mask = np.ones(phi.size, dtype=bool)
    mask[r.core.idx] = False
    if not mask.any():
        return 0.0
    return max(0.0, float(np.max(phi[mask]) - r.mu))


def _monotone_violations(v: np.ndarray, phi: np.ndarray) -> int:
    """Cells breaking 'value nondecreasing in potential' across strict levels."""
    order = np.lexsort((v, phi))
    pv = phi[order]
    vv = v[order]
    starts = np.flatnonzero(np.concatenate([[True], pv[1:] > pv[:-1]]))
    group_max = np.maximum.reduceat(vv, starts)
    prefix = np.maximum.accumulate(group_max)
    prev_max = np.concatenate([[-np.inf], prefix[:-1]])
    gid = np.cumsum(np.concatenate([[True], pv[1:] > pv[:-1]])) - 1
    return int(np.sum(vv < prev_max[gid]))


def monotone_fit(r: MaximizerResult) -> int:
    """Count cells whose value decreases along the assignment potential.

    Zero at any assignment fixed point by construction of the inner step.
    """
    return _monotone_violations(r.zeta.flat(), r.assignment_potential())


def core_energy(r: MaximizerResult) -> float:
    """h^2 sum zeta (psi - q x2 - mu); nonnegative by the definition of mu."""
    _, X2 = r.zeta.grid.centers()
    h2 = r.zeta.grid.h ** 2
    return float(h2 * np.sum(r.zeta.values * (r.psi.values - r.q * X2 - r.mu)))
