import numpy as np
import pytest

from hfss.errors import InvalidResolutionError
from hfss.mesh import (
    BallMesh,
    build_ball_mesh,
    gradient,
    integrate,
    l2_inner,
    laplacian,
    trace_nodes,
)

BALL_VOLUME = 4.0 * np.pi / 3.0


def enumerate_interior(n):
    """Brute-force oracle: off-layer cell centers strictly inside the ball."""
    h = 2.0 / n
    nodes = set()
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            for k in range(1, n - 1):
                x = -1.0 + h * (i + 0.5)
                y = -1.0 + h * (j + 0.5)
                z = -1.0 + h * (k + 0.5)
                if x * x + y * y + z * z < 1.0:
                    nodes.add((i, j, k))
    return nodes


def enumerate_band(n):
    interior = enumerate_interior(n)
    band = set()
    for (i, j, k) in interior:
        for di, dj, dk in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                           (0, 0, 1), (0, 0, -1)):
            nbr = (i + di, j + dj, k + dk)
            if nbr not in interior:
                band.add(nbr)
    return band


def test_invalid_resolution():
    for bad in (3, 5, 2, 0, -4, 7):
        with pytest.raises(InvalidResolutionError):
            build_ball_mesh(bad)


def test_interior_count_matches_enumeration_oracle():
    for n in (4, 8, 12):
        mesh = build_ball_mesh(n)
        oracle = enumerate_interior(n)
        assert mesh.n_interior == len(oracle)
        assert set(map(tuple, np.argwhere(mesh.interior))) == oracle
    # frozen value at the coarsest mesh: only the 8 centermost cells survive
    assert build_ball_mesh(4).n_interior == 8


def test_band_matches_enumeration_oracle():
    for n in (4, 8, 12):
        mesh = build_ball_mesh(n)
        oracle = enumerate_band(n)
        assert set(map(tuple, trace_nodes(mesh))) == oracle
    assert build_ball_mesh(4).n_band == 24


def test_node_count_fits_in_cube():
    mesh = build_ball_mesh(4)
    assert mesh.n_nodes <= 4**3


def test_interior_nodes_inside_ball_and_band_outside():
    mesh = build_ball_mesh(12)
    assert np.all(mesh.radius[mesh.interior] < 1.0)
    assert np.all(mesh.radius[mesh.band] >= 1.0 - 1.5 * mesh.h)
    assert not np.any(mesh.interior & mesh.band)


def test_interior_neighborhood_covered():
    mesh = build_ball_mesh(10)
    idx = np.argwhere(mesh.interior)
    for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1),
              (0, 0, -1)):
        nbr = idx + np.array(d)
        assert np.all(mesh.domain[nbr[:, 0], nbr[:, 1], nbr[:, 2]])


def test_volume_converges():
    errs = []
    for n in (16, 32, 64):
        mesh = build_ball_mesh(n)
        errs.append(abs(mesh.volume() - BALL_VOLUME) / BALL_VOLUME)
    assert errs[-1] < 0.02
    assert errs[-1] < errs[0]


def test_gradient_constant_and_linear():
    mesh = build_ball_mesh(8)
    const = np.ones((8, 8, 8, 3)) * np.array([0.3, -1.2, 2.0])
    g = gradient(const, mesh)
    assert np.all(g[mesh.interior] == 0.0)

    linear = mesh.coords.copy()  # f(x) = x, gradient is the identity
    g = gradient(linear, mesh)
    eye = np.eye(3)
    assert np.abs(g[mesh.interior] - eye).max() < 1e-12


def test_gradient_trig_second_order():
    errs = []
    for n in (12, 24):
        mesh = build_ball_mesh(n)
        x1 = mesh.coords[..., 0]
        f = np.stack([np.sin(x1), np.zeros_like(x1), np.cos(x1)], axis=-1)
        g = gradient(f, mesh)
        exact = np.stack([np.cos(x1), np.zeros_like(x1), -np.sin(x1)], axis=-1)
        err = np.abs(g[..., :, 0] - exact)
        err[~mesh.interior] = 0.0
        errs.append(err.max())
    assert errs[0] / errs[1] > 3.0


def test_laplacian_constant_quadratic_trig():
    mesh = build_ball_mesh(8)
    const = np.ones((8, 8, 8, 3))
    assert np.all(laplacian(const, mesh)[mesh.interior] == 0.0)

    quad = np.zeros((8, 8, 8, 3))
    quad[..., 0] = mesh.coords[..., 0] ** 2
    lap = laplacian(quad, mesh)
    assert np.abs(lap[mesh.interior] - np.array([2.0, 0.0, 0.0])).max() < 1e-10

    errs = []
    for n in (12, 24):
        mesh = build_ball_mesh(n)
        x1 = mesh.coords[..., 0]
        f = np.stack([np.sin(x1), np.zeros_like(x1), np.cos(x1)], axis=-1)
        err = np.abs(laplacian(f, mesh) + f)
        err[~mesh.interior] = 0.0
        errs.append(err.max())
    assert errs[0] / errs[1] > 3.0


def test_integrate_basics():
    mesh = build_ball_mesh(16)
    ones = np.ones((16, 16, 16))
    assert integrate(ones, mesh) == pytest.approx(mesh.volume(), rel=1e-14)
    assert integrate(np.zeros((16, 16, 16)), mesh) == 0.0
    # odd integrand over the symmetric node set
    assert abs(integrate(mesh.coords[..., 0], mesh)) < 1e-10


def test_integrate_linear_and_monotone():
    mesh = build_ball_mesh(8)
    rng = np.random.default_rng(3)
    f = rng.normal(size=(8, 8, 8))
    g = rng.normal(size=(8, 8, 8))
    lhs = integrate(2.0 * f + 3.0 * g, mesh)
    rhs = 2.0 * integrate(f, mesh) + 3.0 * integrate(g, mesh)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
    assert integrate(f, mesh) <= integrate(f + np.abs(g), mesh) + 1e-12


def test_l2_inner_matches_integrate():
    mesh = build_ball_mesh(8)
    rng = np.random.default_rng(5)
    f = rng.normal(size=(8, 8, 8, 3))
    g = rng.normal(size=(8, 8, 8, 3))
    direct = integrate(np.einsum("...i,...i->...", f, g), mesh)
    assert l2_inner(f, g, mesh) == pytest.approx(direct, rel=1e-12)


def test_determinism_and_hash():
    a = build_ball_mesh(12)
    b = build_ball_mesh(12)
    assert np.array_equal(a.coords, b.coords)
    assert np.array_equal(a.interior, b.interior)
    assert a.mesh_hash() == b.mesh_hash()
    assert a.mesh_hash() != build_ball_mesh(14).mesh_hash()


def test_safe_interior_shrinks():
    mesh = build_ball_mesh(12)
    s0 = mesh.interior.sum()
    s1 = mesh.safe_interior(1).sum()
    s2 = mesh.safe_interior(2).sum()
    assert s0 > s1 > s2 > 0
    assert np.all(mesh.interior[mesh.safe_interior(2)])
