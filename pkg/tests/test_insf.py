import numpy as np
import pytest

from kinslip.insf import (ChannelSolution, channel_reference,
                          channel_temperature, channel_velocity, profiles_csv)


def fd_dirichlet_velocity_oracle(sigma, phi2, H, n=4001):
    """Independent two-point BVP solve of sigma u'' = -phi2, u(+-H) = 0."""
    x = np.linspace(-H, H, n)
    h = x[1] - x[0]
    main = np.full(n, -2.0)
    A = (np.diag(main) + np.diag(np.ones(n - 1), 1)
         + np.diag(np.ones(n - 1), -1)) / h**2
    rhs = np.full(n, -phi2 / sigma)
    A[0] = 0.0
    A[0, 0] = 1.0
    rhs[0] = 0.0
    A[-1] = 0.0
    A[-1, -1] = 1.0
    rhs[-1] = 0.0
    return x, np.linalg.solve(A, rhs)


def test_dirichlet_velocity_against_fd_oracle():
    sol = channel_velocity(1.0, 1.0, 1.0, "dirichlet")
    x, u_fd = fd_dirichlet_velocity_oracle(1.0, 1.0, 1.0)
    assert np.max(np.abs(sol.velocity(x) - u_fd)) < 1e-8
    assert sol.velocity(np.array([0.0]))[0] == pytest.approx(0.5)
    assert sol.velocity(np.array([1.0, -1.0])) == pytest.approx([0.0, 0.0])


def test_navier_velocity_wall_condition_exact():
    sol = channel_velocity(1.0, 1.0, 1.0, "navier", lam=1.0)
    # at x = +H: sigma du/dn + lam u = sigma u'(H) + u(H)
    uH = sol.velocity(np.array([1.0]))[0]
    duH = (-1.0 / 1.0) * 1.0  # u' = -phi2 x / sigma
    assert 1.0 * duH + 1.0 * uH == pytest.approx(0.0, abs=1e-14)
    assert uH == pytest.approx(1.0)  # slip velocity phi2 H / lam


def test_navier_velocity_large_lambda_recovers_dirichlet():
    x = np.linspace(-1, 1, 33)
    diri = channel_velocity(1.0, 1.0, 1.0, "dirichlet").velocity(x)
    gaps = []
    for lam in (10.0, 100.0, 1000.0):
        nav = channel_velocity(1.0, 1.0, 1.0, "navier", lam=lam).velocity(x)
        gaps.append(np.max(np.abs(nav - diri)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] == pytest.approx(1.0 / 1000.0, rel=1e-9)  # phi2 H / lam


def test_perfect_slip_velocity_degenerate():
    sol = channel_velocity(1.0, 1.0, 1.0, "perfect-slip")
    assert sol.flag == "no-steady-solution"
    with pytest.raises(ValueError):
        sol.velocity(np.zeros(3))
    # no forcing: a steady (zero) profile exists
    ok = channel_velocity(1.0, 0.0, 1.0, "perfect-slip")
    assert ok.flag is None
    assert ok.velocity(np.array([0.3])) == pytest.approx([0.0])


def test_dirichlet_temperature_linear():
    sol = channel_temperature(1.0, -0.05, 0.05, 1.0, "dirichlet")
    x = np.linspace(-1, 1, 11)
    assert sol.temperature(x) == pytest.approx(0.05 * x)


def test_navier_temperature_robin_condition_exact():
    kappa, lam, delta = 0.37, 1.3, 0.05
    sol = channel_temperature(kappa, -delta, delta, 1.0, "navier", lam=lam)
    A, B = sol.temperature_coefficients()
    assert B == pytest.approx(0.0, abs=1e-15)
    assert A == pytest.approx(delta / (1.0 + 5 * kappa / (4 * lam)))
    # Robin check at x = +H: kappa A + (4/5) lam (A + B - delta) = 0
    assert kappa * A + 0.8 * lam * (A + B - delta) == pytest.approx(0.0, abs=1e-15)
    # and at x = -H with outward normal derivative -A
    assert -kappa * A + 0.8 * lam * (-A + B + delta) == pytest.approx(0.0, abs=1e-15)


def test_navier_temperature_large_lambda_recovers_dirichlet():
    slopes = [channel_temperature(0.5, -1.0, 1.0, 1.0, "navier", lam=lam)
              .temperature_coefficients()[0] for lam in (10, 100, 1000)]
    assert abs(slopes[0] - 1.0) > abs(slopes[1] - 1.0) > abs(slopes[2] - 1.0)


def test_perfect_slip_temperature_flagged():
    sol = channel_temperature(1.0, -0.2, 0.4, 1.0, "perfect-slip")
    assert sol.flag == "adiabatic-degenerate"
    A, B = sol.temperature_coefficients()
    assert A == 0.0
    assert B == pytest.approx(0.1)  # mean wall temperature convention


def test_closed_forms_satisfy_odes():
    sol = channel_reference(0.8, 0.3, 0.7, -0.1, 0.2, 1.0, "navier", lam=2.0)
    x = np.linspace(-0.9, 0.9, 201)
    h = x[1] - x[0]
    u = sol.velocity(x)
    u_xx = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    assert np.max(np.abs(0.8 * u_xx + 0.7)) < 1e-9
    th = sol.temperature(x)
    th_xx = (th[2:] - 2 * th[1:-1] + th[:-2]) / h**2
    assert np.max(np.abs(th_xx)) < 1e-10


def test_invalid_inputs():
    with pytest.raises(ValueError):
        channel_velocity(-1.0, 1.0, 1.0, "dirichlet")
    with pytest.raises(ValueError):
        channel_velocity(1.0, 1.0, 1.0, "navier")  # missing lam
    with pytest.raises(ValueError):
        channel_temperature(0.0, 0, 0, 1.0, "dirichlet")
    with pytest.raises(ValueError):
        channel_velocity(1.0, 1.0, 1.0, "weird")


def test_profiles_csv_deterministic():
    sol = channel_reference(1.0, 0.5, 0.3, -0.1, 0.1, 1.0, "dirichlet")
    assert profiles_csv(sol, 11) == profiles_csv(sol, 11)
    assert profiles_csv(sol, 11).startswith("x1,u2,theta\n")
