import numpy as np
import pytest

from vortexpair.grid import (
    CellSet,
    CenteredGrid,
    HalfPlaneGrid,
    ScalarField,
    centroid,
    diameter,
    integral,
    lp_norm,
    mirror,
    support,
)


def grid_2x1():
    return HalfPlaneGrid(L=1.0, H=0.5, nx=4, ny=1)


def test_grid_invariants():
    g = HalfPlaneGrid(L=1.0, H=1.0, nx=32, ny=16)
    assert g.h == 2 * g.L / g.nx == g.H / g.ny
    assert np.all(g.x2_centers() > 0)
    # mirror symmetry of the x1 lattice
    assert np.allclose(g.x1_centers(), -g.x1_centers()[::-1])


def test_grid_validation():
    with pytest.raises(ValueError):
        HalfPlaneGrid(L=1.0, H=1.0, nx=31, ny=16)  # odd nx
    with pytest.raises(ValueError):
        HalfPlaneGrid(L=1.0, H=1.0, nx=32, ny=10)  # non-square cells
    with pytest.raises(ValueError):
        CenteredGrid(R=1.0, n=5)


def test_field_validation():
    g = grid_2x1()
    with pytest.raises(ValueError):
        ScalarField(g, np.full(g.shape, np.nan))
    with pytest.raises(ValueError):
        ScalarField(g, -np.ones(g.shape), "vorticity")
    f = ScalarField(g, np.ones(g.shape))
    with pytest.raises(ValueError):
        f.values[0, 0] = 2.0  # immutable


def test_support_examples():
    g = HalfPlaneGrid(L=1.0, H=1.0, nx=2, ny=1)
    zero = ScalarField(g, np.zeros(g.shape))
    assert len(support(zero)) == 0
    one = ScalarField(g, np.array([[0.0, 5.0]]))
    assert list(support(one).idx) == [1]
    pair = ScalarField(g, np.array([[0.1, 0.9]]))
    assert list(support(pair, tau=0.5).idx) == [1]


def test_diameter_examples():
    g = HalfPlaneGrid(L=1.0, H=1.0, nx=4, ny=2)
    assert diameter(CellSet(g, [0])) == 0.0
    # cells 0 and 2 are 2h = 1.0 apart
    assert diameter(CellSet(g, [0, 2])) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError, match="empty support"):
        diameter(CellSet(g, []))


def test_diameter_block_brute_force():
    # 3x3 block with h=0.1: oracle = max pairwise distance over all pairs
    g = HalfPlaneGrid(L=0.5, H=1.0, nx=10, ny=10)
    assert g.h == pytest.approx(0.1)
    idx = [j * g.nx + i for j in range(3) for i in range(3)]
    s = CellSet(g, idx)
    X1, X2 = g.centers()
    x1, x2 = X1.ravel()[s.idx], X2.ravel()[s.idx]
    brute = max(
        np.hypot(x1[a] - x1[b], x2[a] - x2[b])
        for a in range(9) for b in range(9)
    )
    assert brute == pytest.approx(2 * np.sqrt(2) * 0.1, rel=1e-12)
    assert diameter(s) == pytest.approx(brute, rel=1e-12)


def test_diameter_mirror_invariance():
    rng = np.random.default_rng(3)
    g = HalfPlaneGrid(L=1.0, H=0.5, nx=16, ny=4)
    idx = rng.choice(g.ncells, size=10, replace=False)
    f = np.zeros(g.ncells)
    f[idx] = 1.0
    fm = ScalarField(g, f.reshape(g.shape), "vorticity")
    assert diameter(support(fm)) == pytest.approx(
        diameter(support(mirror(fm))), rel=1e-12)


def test_centroid_examples():
    g = HalfPlaneGrid(L=1.0, H=1.0, nx=4, ny=2)
    X1, X2 = g.centers()
    one = np.zeros(g.shape)
    one[1, 2] = 3.0
    c = centroid(ScalarField(g, one))
    assert c[0] == X1[1, 2] and c[1] == X2[1, 2]
    two = np.zeros(g.shape)
    two[0, 0] = 2.0
    two[1, 3] = 2.0
    c2 = centroid(ScalarField(g, two))
    assert c2 == pytest.approx([(X1[0, 0] + X1[1, 3]) / 2, (X2[0, 0] + X2[1, 3]) / 2])
    with pytest.raises(ValueError):
        centroid(ScalarField(g, np.zeros(g.shape)))


def test_centroid_even_field():
    g = HalfPlaneGrid(L=1.0, H=0.5, nx=16, ny=4)
    rng = np.random.default_rng(0)
    half = rng.random((g.ny, g.nx // 2))
    vals = np.concatenate([half[:, ::-1], half], axis=1)
    c = centroid(ScalarField(g, vals))
    assert abs(c[0]) < 1e-12


def test_lp_norm_examples():
    g = HalfPlaneGrid(L=0.5, H=0.2, nx=10, ny=2)
    vals = np.zeros(g.shape)
    vals.flat[:3] = 1.0
    f = ScalarField(g, vals)
    assert lp_norm(f, 1) == pytest.approx(3 * g.h**2, rel=1e-12)
    vals2 = np.zeros(g.shape)
    vals2.flat[0], vals2.flat[1] = 1.0, 3.0
    assert lp_norm(ScalarField(g, vals2), np.inf) == 3.0
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_lp_norm_holder_and_direct_sum():
    rng = np.random.default_rng(5)
    g = HalfPlaneGrid(L=0.5, H=0.2, nx=10, ny=2)
    vals = np.where(rng.random(g.shape) < 0.4, rng.random(g.shape), 0.0)
    f = ScalarField(g, vals)
    # independent summation oracle
    direct = (g.h**2 * sum(abs(float(v)) ** 2 for v in vals.ravel())) ** 0.5
    assert lp_norm(f, 2) == pytest.approx(direct, rel=1e-12)
    # Holder: ||f||_1 <= |supp|^(1-1/p) ||f||_p
    for p in (2.0, 4.0):
        area = len(support(f)) * g.h**2
        assert lp_norm(f, 1) <= area ** (1 - 1 / p) * lp_norm(f, p) + 1e-12


def test_lp_norm_permutation_invariance():
    rng = np.random.default_rng(11)
    g = HalfPlaneGrid(L=0.5, H=0.2, nx=10, ny=2)
    vals = rng.random(g.ncells)
    f1 = ScalarField(g, vals.reshape(g.shape))
    f2 = ScalarField(g, rng.permutation(vals).reshape(g.shape))
    for p in (1, 2, 3.5, np.inf):
        assert lp_norm(f1, p) == pytest.approx(lp_norm(f2, p), rel=1e-12)


def test_integral_convention():
    # midpoint quadrature: integral of 1 over the window equals its area
    g = HalfPlaneGrid(L=1.0, H=1.0, nx=8, ny=4)
    f = ScalarField(g, np.ones(g.shape))
    assert integral(f) == pytest.approx(2.0 * g.L * g.H, rel=1e-14)
