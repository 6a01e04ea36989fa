import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from vortexpair.grid import HalfPlaneGrid, ScalarField, centroid, support
from vortexpair.kernel import KernelEvaluator, self_cell_constant
from vortexpair.profiles import parse_profile
from vortexpair.rearrange import MassProfile, profile_of
from vortexpair.solver import (
    BoundaryTouchError,
    NotConvergedError,
    SolverConfig,
    ascend,
    auto_grid,
    core_energy,
    monotone_fit,
    multiplier,
    multiplier_gap,
)


def kernel_matrix(grid):
    X1, X2 = grid.centers()
    x1, x2 = X1.ravel(), X2.ravel()
    n = x1.size
    h2 = grid.h**2
    K = np.empty((n, n))
    for i in range(n):
        d1 = x1[i] - x1
        dm = x2[i] - x2
        dp = x2[i] + x2
        r2 = d1 * d1 + dm * dm
        r2[i] = 1.0
        K[i] = h2 / (4 * math.pi) * (np.log(d1 * d1 + dp * dp) - np.log(r2))
    K[np.arange(n), np.arange(n)] = (
        self_cell_constant(grid.h) + h2 * np.log(2 * x2)) / (2 * math.pi)
    return K, x2


def brute_force_max(values, grid, q):
    K, x2 = kernel_matrix(grid)
    h2 = grid.h**2
    best = -np.inf
    for perm in set(itertools.permutations(values)):
        v = np.array(perm)
        best = max(best, 0.5 * h2 * v @ K @ v - q * h2 * float(np.sum(x2 * v)))
    return best


def test_single_cell_exhaustive_placement():
    # one positive cell: objective = self-energy - q x2 mass; the ascent
    # (with swap polish) must land on the best of all <= 200 placements
    for q, mass in ((2.0, 1.0), (0.2, 1.0), (1.0, 6.0)):
        g = HalfPlaneGrid(L=1.0, H=1.0, nx=20, ny=10)
        n = g.ncells
        vals = np.zeros(n)
        vals[0] = mass / g.h**2
        cfg = SolverConfig(profile=MassProfile(vals, g.h), eps=1.0, q=q, grid=g,
                           symmetric=False, boundary_margin=0, polish=True)
        res = ascend(cfg)
        K, x2 = kernel_matrix(g)
        h2 = g.h**2
        v = vals[0]
        placements = 0.5 * h2 * v * v * np.diag(K) - q * h2 * x2 * v
        assert res.T_eps == pytest.approx(float(placements.max()), rel=1e-12)
        # the winning cell is on the x1-degenerate optimal row
        X1, X2 = g.centers()
        win = support(res.zeta).idx[0]
        assert X2.ravel()[win] == pytest.approx(
            X2.ravel()[int(placements.argmax())], rel=1e-12)


def test_tiny_instances_match_brute_force():
    rng = np.random.default_rng(1234)
    cases = 0
    while cases < 50:
        nx = int(rng.choice([2, 4]))
        ny = int(rng.choice([1, 2])) if nx == 4 else int(rng.choice([2, 4]))
        n = nx * ny
        if n > 10:
            continue
        h = float(rng.uniform(0.05, 0.3))
        grid = HalfPlaneGrid(L=nx * h / 2, H=ny * h, nx=nx, ny=ny)
        ndistinct = int(rng.integers(1, 4))
        levels = np.sort(rng.uniform(0.2, 3.0, ndistinct))[::-1]
        counts = rng.multinomial(n, np.ones(ndistinct + 1) / (ndistinct + 1))
        vals = np.concatenate(
            [np.full(c, l) for c, l in zip(counts[:-1], levels)] + [np.zeros(counts[-1])])
        if vals[vals > 0].size == 0:
            vals[0] = levels[0]
        q = float(rng.uniform(0.3, 3.0))
        cfg = SolverConfig(profile=MassProfile(vals, h), eps=1.0, q=q, grid=grid,
                           symmetric=False, boundary_margin=0, polish=True)
        res = ascend(cfg)
        bf = brute_force_max(vals, grid, q)
        assert res.T_eps >= bf - 1e-10 * max(1.0, abs(bf))
        cases += 1


def disk_result(eps=0.1, **kw):
    return ascend(SolverConfig(profile=parse_profile("disk(1)"), eps=eps, q=1.0, **kw))


def test_disk_solve_centroid_and_class():
    res = disk_result(eps=0.05)
    c = centroid(res.zeta)
    # limiting position (0, kappa/(4 pi q)) = (0, 0.25)
    assert math.hypot(c[0], c[1] - 0.25) <= 0.025
    assert res.converged
    # class invariance: the result profile is exactly the input class
    prof = parse_profile("disk(1)").class_profile(0.05, res.zeta.grid.h,
                                                  res.zeta.grid.ncells)
    assert np.array_equal(profile_of(res.zeta).values, prof.values)
    assert res.mu >= 0


def test_multiplier_and_gap():
    res = disk_result(eps=0.1)
    assert multiplier(res) == pytest.approx(res.mu, rel=1e-15)
    # every non-core cell sits at or below mu within 1e-8 relative
    assert multiplier_gap(res) <= 1e-8 * abs(res.mu)


def test_multiplier_single_cell():
    g = HalfPlaneGrid(L=0.5, H=1.0, nx=10, ny=10)
    vals = np.zeros(g.ncells)
    vals[0] = 3.0
    cfg = SolverConfig(profile=MassProfile(vals, g.h), eps=1.0, q=0.5, grid=g,
                       symmetric=False, boundary_margin=0, polish=True)
    res = ascend(cfg)
    X1, X2 = g.centers()
    idx = support(res.zeta).idx[0]
    phi = res.psi.values.ravel()[idx] - 0.5 * X2.ravel()[idx]
    assert res.mu == pytest.approx(phi, rel=1e-14)
    assert core_energy(res) == pytest.approx(0.0, abs=1e-15)


def test_monotone_fit_fixed_point_and_shuffle():
    res = disk_result(eps=0.1)
    assert monotone_fit(res) == 0
    assert res.monotonicity_violations == 0
    rng = np.random.default_rng(0)
    shuffled = replace(
        res, zeta=ScalarField(res.zeta.grid,
                              rng.permutation(res.zeta.flat()).reshape(res.zeta.grid.shape),
                              "vorticity"))
    assert monotone_fit(shuffled) > 0


def test_monotone_fit_after_one_step():
    # one assignment step from a rough start is monotone w.r.t. its own phi
    g = HalfPlaneGrid(L=1.0, H=1.0, nx=32, ny=16)
    rng = np.random.default_rng(5)
    vals = np.zeros(g.ncells)
    vals[: g.ncells // 4] = rng.random(g.ncells // 4)
    cfg = SolverConfig(profile=MassProfile(vals, g.h), eps=1.0, q=1.0, grid=g,
                       symmetric=False, boundary_margin=0, polish=False,
                       max_iters=500)
    res = ascend(cfg)
    assert res.monotonicity_violations == 0


def test_core_energy_nonnegative():
    for eps in (0.2, 0.1):
        res = disk_result(eps=eps)
        assert core_energy(res) >= 0


def test_ascent_monotone_objective_history():
    rng = np.random.default_rng(7)
    g = HalfPlaneGrid(L=1.0, H=1.0, nx=64, ny=32)
    worst = 0.0
    for _ in range(3):
        nsup = int(rng.integers(20, 400))
        vals = np.zeros(g.ncells)
        vals[:nsup] = rng.uniform(0.1, 5.0, nsup)
        cfg = SolverConfig(
            profile=MassProfile(vals, g.h), eps=1.0, q=float(rng.uniform(0.3, 3.0)),
            grid=g, symmetric=False, boundary_margin=0, polish=False,
            init_point=(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.2, 0.7))))
        res = ascend(cfg)
        J = [h[1] for h in res.history]
        for a, b in zip(J, J[1:]):
            worst = max(worst, (a - b) / max(abs(a), 1e-300))
    assert worst <= 1e-9


def test_constrained_mode_matches_unconstrained():
    free = disk_result(eps=0.1)
    fenced = disk_result(eps=0.1, r0=0.2)  # core radius ~0.1 fits well inside
    assert np.array_equal(free.zeta.values, fenced.zeta.values)
    assert fenced.T_eps == pytest.approx(free.T_eps, rel=1e-14)


def test_constrained_mode_too_small_ball():
    with pytest.raises(ValueError, match="fewer cells"):
        disk_result(eps=0.1, r0=0.02)


def test_boundary_touch_error():
    g = HalfPlaneGrid(L=0.1, H=0.8, nx=8, ny=32)
    with pytest.raises(BoundaryTouchError, match="support touches boundary"):
        ascend(SolverConfig(profile=parse_profile("disk(1)"), eps=0.1, q=1.0, grid=g))


def test_not_converged_error():
    with pytest.raises(NotConvergedError):
        disk_result(eps=0.1, max_iters=0)


def test_translation_degeneracy():
    res = disk_result(eps=0.1)
    g = res.zeta.grid
    shifted = ScalarField(g, np.roll(res.zeta.values, 3, axis=1), "vorticity")
    ev = KernelEvaluator(g, "fast")
    _, X2 = g.centers()
    h2 = g.h**2
    J = ev.energy(shifted) - 1.0 * h2 * float(np.sum(X2 * shifted.values))
    assert J == pytest.approx(res.T_eps, rel=1e-11)


def test_auto_grid_defaults():
    prof = parse_profile("disk(1)")
    g = auto_grid(prof, 0.1, 1.0)
    assert g.h == pytest.approx(0.1 / 8, rel=1e-15)
    assert g.L >= max(4 * 0.25, 10 * 0.1 * 1.0) - 1e-12
    assert g.H >= 4 * 0.25 - 1e-12
    assert g.nx % 2 == 0
