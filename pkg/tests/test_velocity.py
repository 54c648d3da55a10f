import numpy as np
import pytest

from kinslip import velocity


@pytest.fixture(scope="module")
def grid16():
    return velocity.build_grid(16, 6.0, 0.01)


@pytest.fixture(scope="module")
def grid8():
    return velocity.build_grid(8, 6.0, 0.01)


def gauss_hermite_moment(poly, order=60):
    """Oracle: tensor Gauss-Hermite quadrature of poly(v) against mu."""
    x, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / np.sqrt(2 * np.pi)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    W = (w[:, None, None] * w[None, :, None] * w[None, None, :])
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    return float(np.sum(W.ravel() * poly(pts)))


def test_build_grid_basic(grid16):
    assert grid16.size == 16**3
    assert grid16.h == pytest.approx(2 * 6.0 / 16)
    assert np.all(grid16.weights == grid16.h**3)


def test_grid_rejects_bad_parameters():
    with pytest.raises(ValueError):
        velocity.build_grid(15)
    with pytest.raises(ValueError):
        velocity.build_grid(6)
    with pytest.raises(ValueError):
        velocity.build_grid(16, v_max=3.0)
    with pytest.raises(ValueError):
        velocity.build_grid(16, beta_prime=0.3)


def test_node_set_reflection_symmetric(grid16):
    # node set equals its image under v -> -v, exactly
    flipped = -grid16.nodes
    order = np.lexsort(grid16.nodes.T)
    order_f = np.lexsort(flipped.T)
    assert np.array_equal(grid16.nodes[order], flipped[order_f])


def test_reflection_index_is_involution(grid16):
    for axis in range(3):
        idx = grid16.reflection_index(axis)
        assert np.array_equal(idx[idx], np.arange(grid16.size))
        expected = grid16.nodes.copy()
        expected[:, axis] *= -1
        assert np.array_equal(grid16.nodes[idx], expected)


def test_maxwellian_at_origin_exact():
    assert velocity.maxwellian(np.zeros(3)) == 1.0 / (2 * np.pi) ** 1.5


def test_normalization_against_gauss_hermite(grid16, grid8):
    oracle = gauss_hermite_moment(lambda v: np.ones(len(v)))
    assert oracle == pytest.approx(1.0, abs=1e-12)
    got16 = velocity.moment(grid16, grid16.mu, np.ones(grid16.size))
    assert abs(got16 - 1.0) < 1e-3
    got8 = velocity.moment(grid8, grid8.mu, np.ones(grid8.size))
    assert abs(got8 - 1.0) < 1e-2


@pytest.mark.parametrize("poly,expected", [
    (lambda v: v[:, 0] ** 2 * (np.sum(v**2, 1) - 10.0), -5.0),
    (lambda v: (np.sum(v**2, 1) - 5.0) * v[:, 0] ** 2, 0.0),
    (lambda v: (np.sum(v**2, 1) - 5.0) * 0.5 * (np.sum(v**2, 1) - 3.0) * v[:, 0] ** 2, 5.0),
    (lambda v: v[:, 0] ** 2 * v[:, 1] ** 2, 1.0),
    (lambda v: v[:, 0] ** 4, 3.0),
    (lambda v: v[:, 0] ** 2 * (np.sum(v**2, 1) - 10.0) * 0.5 * (np.sum(v**2, 1) - 3.0), 0.0),
    (lambda v: v[:, 0] ** 2 * 0.5 * (np.sum(v**2, 1) - 1.0), 2.0),
])
def test_gaussian_moment_identities(grid16, poly, expected):
    # cross-check the stated values against the independent oracle first
    assert gauss_hermite_moment(poly) == pytest.approx(expected, abs=1e-10)
    got = velocity.moment(grid16, grid16.mu, poly(grid16.nodes))
    assert abs(got - expected) <= 1e-3


def test_moment_error_decreases_with_resolution():
    polys = [
        lambda v: v[:, 0] ** 2 * (np.sum(v**2, 1) - 10.0),
        lambda v: v[:, 0] ** 4,
        lambda v: v[:, 0] ** 2 * v[:, 1] ** 2,
    ]
    errs = []
    for n in (8, 12, 16):
        grid = velocity.build_grid(n, 6.0, 0.01)
        errs.append(max(
            abs(velocity.moment(grid, grid.mu, p(grid.nodes))
                - gauss_hermite_moment(p)) for p in polys))
    assert errs[0] > errs[1] > errs[2]


def test_half_flux_identity(grid16):
    n = np.array([1.0, 0.0, 0.0])
    plus = velocity.half_flux(grid16, grid16.mu, n, +1)
    assert abs(np.sqrt(2 * np.pi) * plus - 1.0) < 1e-3
    minus = velocity.half_flux(grid16, grid16.mu, n, -1)
    assert abs(plus + minus) < 1e-12  # exact oddness on the symmetric grid


def test_half_flux_splits_full_moment(grid16):
    n = np.array([1.0, 0.0, 0.0])
    f = grid16.nodes[:, 0] * grid16.mu
    diff = (velocity.half_flux(grid16, f, n, +1)
            - velocity.half_flux(grid16, f, n, -1))
    assert abs(diff - 1.0) < 1e-3  # int v1^2 mu = 1


def test_half_flux_requires_unit_normal(grid16):
    with pytest.raises(ValueError):
        velocity.half_flux(grid16, grid16.mu, np.array([2.0, 0, 0]), +1)


def test_reflection_equivariance_of_moments(grid16):
    rng = np.random.default_rng(11)
    f = rng.standard_normal(grid16.size)
    p = grid16.nodes[:, 0] ** 2 * grid16.nodes[:, 2]
    idx = grid16.reflection_index(2)
    # moment(f o R, p o R) == moment(f, p) exactly by node-set symmetry
    assert velocity.moment(grid16, f[idx], p[idx]) == pytest.approx(
        velocity.moment(grid16, f, p), rel=1e-15)
