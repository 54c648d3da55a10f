import numpy as np
import pytest

from kinslip import velocity
from kinslip.macro import (DiagnosticsTrace, MacroFields, Projector,
                           extract_macro, limit_residuals, mean_fluctuation,
                           norm_L2, project_P)


@pytest.fixture(scope="module")
def grid():
    return velocity.build_grid(12, 6.0, 0.01)


@pytest.fixture(scope="module")
def proj(grid):
    return Projector(grid)


def test_basis_elements_project_to_unit_coefficients(grid, proj):
    coeffs, _, _ = project_P(grid, grid.sqrt_mu, proj)
    assert coeffs == pytest.approx([1, 0, 0, 0, 0], abs=1e-12)
    coeffs, _, _ = project_P(grid, grid.nodes[:, 1] * grid.sqrt_mu, proj)
    assert coeffs == pytest.approx([0, 0, 1, 0, 0], abs=1e-12)
    chi_c = 0.5 * (np.sum(grid.nodes**2, 1) - 3.0) * grid.sqrt_mu
    coeffs, _, _ = project_P(grid, chi_c, proj)
    assert coeffs == pytest.approx([0, 0, 0, 0, 1], abs=1e-12)


def test_projection_idempotent_and_orthogonal(grid, proj):
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = rng.standard_normal(grid.size)
        pf = proj.apply(f)
        assert np.max(np.abs(proj.apply(pf) - pf)) < 1e-12 * np.max(np.abs(pf))
        perp = f - pf
        inner = np.sum(grid.weights * pf * perp)
        assert abs(inner) < 1e-12 * np.sum(grid.weights * f * f)


def test_norm_pythagoras(grid, proj):
    rng = np.random.default_rng(4)
    f = rng.standard_normal((3, grid.size))
    vol = np.ones(3)
    pf = (f @ proj.dual.T) @ proj.chi
    total = norm_L2(grid, f, vol) ** 2
    assert total == pytest.approx(norm_L2(grid, pf, vol) ** 2
                                  + norm_L2(grid, f - pf, vol) ** 2, rel=1e-12)


def test_mean_decomposition(grid, proj):
    rng = np.random.default_rng(5)
    f = rng.standard_normal((4, grid.size))
    vol = np.full(4, 0.5)
    mean = mean_fluctuation(grid, f, vol)
    f_ring = f - mean * grid.sqrt_mu
    assert mean_fluctuation(grid, f_ring, vol) == pytest.approx(0.0, abs=1e-12)


def test_macro_extraction_shapes(grid, proj):
    x = np.linspace(-1, 1, 8)
    f = np.outer(np.sin(x), grid.nodes[:, 1] * grid.sqrt_mu)
    mac = extract_macro(grid, x, f, proj)
    assert mac.b.shape == (8, 3)
    assert mac.b[:, 1] == pytest.approx(np.sin(x), abs=1e-12)
    assert mac.a == pytest.approx(np.zeros(8), abs=1e-12)


def test_limit_residuals_zero_for_limit_fields():
    x = np.linspace(-1, 1, 16)
    mac = MacroFields(x=x, a=0.3 - x * 0.1, b=np.zeros((16, 3)),
                      c=0.7 + x * 0.1)
    res = limit_residuals(x, mac)
    assert res["div_residual"] == pytest.approx(0.0, abs=1e-14)
    assert res["boussinesq_residual"] == pytest.approx(0.0, abs=1e-13)


def test_limit_residuals_linear_in_perturbation():
    x = np.linspace(-1, 1, 16)
    hx = x[1] - x[0]
    base = MacroFields(x=x, a=np.zeros(16), b=np.zeros((16, 3)), c=np.zeros(16))
    r0 = limit_residuals(x, base)["boussinesq_residual"]
    delta = 0.37
    pert = MacroFields(x=x, a=delta * x, b=np.zeros((16, 3)), c=np.zeros(16))
    r1 = limit_residuals(x, pert)["boussinesq_residual"]
    expected = delta * np.sqrt(hx * (len(x) - 2))
    assert r0 == 0.0
    assert r1 == pytest.approx(expected, rel=1e-12)


def test_diagnostics_trace_monotone():
    trace = DiagnosticsTrace(lam=0.0)
    rng = np.random.default_rng(6)
    e_prev, d_prev = 0.0, 0.0
    for k in range(20):
        row = trace.record(0.1 * k, {
            "L2": float(rng.random()),
            "P_L2": float(rng.random()),
            "Iperp_nu": float(rng.random()),
            "eps": 0.1, "alpha": 0.5,
        })
        assert row["energy"] >= e_prev
        assert row["dissipation"] >= d_prev
        e_prev, d_prev = row["energy"], row["dissipation"]
