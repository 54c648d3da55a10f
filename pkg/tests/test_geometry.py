import numpy as np
import pytest

from kinslip.geometry import (Domain, TrajectoryState, bounce_census,
                              curvature_constant, exit_time, flight_jacobian,
                              flow, sample_census_points, specular_reflect,
                              stretch)


def test_domain_normals():
    slab = Domain("slab", 1.0)
    assert slab.normal(np.array([1.0, 0.3, -2.0])) == pytest.approx([1, 0, 0])
    assert slab.normal(np.array([-1.0, 0.0, 0.0])) == pytest.approx([-1, 0, 0])
    disk = Domain("disk", 2.0)
    p = np.array([2.0 * np.cos(0.7), 2.0 * np.sin(0.7), 5.0])
    n = disk.normal(p)
    assert np.linalg.norm(n) == pytest.approx(1.0)
    assert n == pytest.approx([np.cos(0.7), np.sin(0.7), 0.0])


def test_curvature_constant():
    assert curvature_constant(Domain("slab", 1.0)) == pytest.approx(0.0, abs=1e-12)
    for R in (1.0, 2.5):
        c = curvature_constant(Domain("disk", R))
        assert c == pytest.approx(1.0 / (2 * R), rel=1e-3)


def test_stretch_scaling():
    slab = stretch(Domain("slab", 1.0), 0.1)
    assert slab.size == pytest.approx(10.0)
    # unit normal is invariant at corresponding boundary points
    base = Domain("disk", 1.0)
    st = stretch(base, 0.05)
    x = np.array([np.cos(1.1), np.sin(1.1), 0.0])
    assert st.normal(x / 0.05) == pytest.approx(base.normal(x), abs=1e-14)
    # curvature constant scales by eps
    assert curvature_constant(st) == pytest.approx(
        0.05 * curvature_constant(base), rel=1e-3)


def test_specular_reflect_properties():
    n = np.array([1.0, 0.0, 0.0])
    assert specular_reflect(n, np.array([1.0, 2.0, 3.0])) == pytest.approx([-1, 2, 3])
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = rng.standard_normal(3)
        n /= np.linalg.norm(n)
        v = rng.standard_normal(3)
        rv = specular_reflect(n, v)
        assert specular_reflect(n, rv) == pytest.approx(v, abs=1e-14)
        assert np.linalg.norm(rv) == pytest.approx(np.linalg.norm(v), rel=1e-14)


def test_free_flight_exact():
    slab = Domain("slab", 1.0)
    st = flow(slab, TrajectoryState(t=1.0, x=np.array([0.2, 0.0, 0.0]),
                               v=np.array([0.3, 1.0, -0.5])), 0.25, eps=0.1)
    assert st.x == pytest.approx([0.2 + 0.3 * (0.25 - 1.0), -0.75, 0.375], abs=1e-14)
    assert st.v == pytest.approx([0.3, 1.0, -0.5])


def test_exit_time_slab_closed_form():
    slab = Domain("slab", 1.0)
    res = exit_time(slab, np.array([0.5, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]))
    assert res is not None
    tb, yb, vb = res
    assert tb == pytest.approx(1.5)
    assert yb == pytest.approx([-1.0, 0.0, 0.0])


def test_exit_time_disk_center():
    disk = Domain("disk", 1.0)
    for ang in (0.0, 0.9, 2.3):
        v = np.array([np.cos(ang), np.sin(ang), 0.0])
        res = exit_time(disk, np.zeros(3), v)
        assert res[0] == pytest.approx(1.0)


def test_exit_time_no_exit_sentinel():
    slab = Domain("slab", 1.0)
    res = exit_time(slab, np.zeros(3), np.array([0.0, 1.0, 0.0]), t_max=50.0)
    assert res is None


def test_flow_boundary_bisection_tolerance():
    # with a field the crossing must satisfy |xi| <= 1e-12 * size
    disk = Domain("disk", 1.0)
    phi = lambda x: np.array([0.3, -0.2, 0.0])
    st = flow(disk, TrajectoryState(t=0.0, x=np.zeros(3),
                                    v=np.array([0.8, 0.1, 0.0])),
              -5.0, eps=0.3, phi=phi)
    assert st.t > -5.0  # crossed
    assert abs(disk.xi(st.x)) <= 1e-12


def test_velocity_perturbation_bound():
    # |V(s)| - |v| = O(eps^2 ||Phi|| |t-s|), checked against a fine reference
    slab = Domain("slab", 4.0)
    phi = lambda x: np.array([0.0, np.cos(x[0]), 0.0])
    v0 = np.array([0.10, 0.2, 0.0])
    for eps in (0.1, 0.01):
        st = flow(slab, TrajectoryState(t=1.0, x=np.zeros(3), v=v0.copy()),
                  0.0, eps=eps, phi=phi)
        dv = np.linalg.norm(st.v) - np.linalg.norm(v0)
        assert abs(dv) <= 2.0 * eps**2 * 1.0


def test_exit_time_field_perturbation_order():
    # |t_b(eps) - t_b(0)| <= C eps^2 under halving (Richardson comparison)
    slab = Domain("slab", 1.0)
    phi = lambda x: np.array([1.0, 0.0, 0.0])
    x0 = np.array([0.25, 0.0, 0.0])
    v0 = np.array([-0.8, 0.3, 0.0])
    tb0 = exit_time(slab, x0, v0)[0]
    errs = []
    for eps in (0.2, 0.1, 0.05):
        tb = exit_time(slab, x0, v0, eps=eps, phi=phi)[0]
        errs.append(abs(tb - tb0))
    assert errs[0] > errs[1] > errs[2]
    rate = np.log(errs[0] / errs[2]) / np.log(4.0)
    assert rate == pytest.approx(2.0, abs=0.3)


def test_backward_forward_consistency():
    # integrating backward and then backward again with reversed velocity
    # (time reversal of the characteristic field) recovers the start
    slab = Domain("slab", 2.0)
    phi = lambda x: np.array([np.sin(x[1]), 0.2, 0.0])
    start = TrajectoryState(t=2.0, x=np.array([0.3, -0.4, 0.1]),
                            v=np.array([0.4, 0.6, -0.2]))
    mid = flow(slab, start, 0.8, eps=0.1, phi=phi)
    back2 = flow(slab, TrajectoryState(t=0.8, x=mid.x.copy(), v=-mid.v),
                 -0.4, eps=0.1, phi=phi)
    assert back2.x == pytest.approx(start.x, abs=1e-8)
    assert -back2.v == pytest.approx(start.v, abs=1e-8)


def test_flight_jacobian_free_flight():
    disk = Domain("disk", 100.0)
    det = flight_jacobian(disk, 0.01, None, t=1.0, y=np.zeros(3),
                          v=np.array([1.0, 0.2, -0.4]), s=0.9, tau=0.2)
    assert det == pytest.approx((0.2 - 0.9) ** 3, rel=1e-6)


def test_flight_jacobian_cubic_slope():
    disk = Domain("disk", 100.0)
    gaps = np.array([0.7, 0.35, 0.175])
    dets = [abs(flight_jacobian(disk, 0.01, None, t=1.0, y=np.zeros(3),
                                v=np.array([1.0, 0.2, -0.4]), s=0.9,
                                tau=0.9 - gap)) for gap in gaps]
    slope = np.polyfit(np.log(gaps), np.log(dets), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.1)


def test_flight_jacobian_field_perturbation_trend():
    disk = Domain("disk", 100.0)
    phi = lambda x: np.array([np.cos(0.01 * x[1]), np.sin(0.01 * x[0]), 0.0])
    free = (0.2 - 0.9) ** 3
    errs = []
    for eps in (0.2, 0.1, 0.05):
        det = flight_jacobian(disk, eps, phi, t=1.0, y=np.zeros(3),
                              v=np.array([1.0, 0.2, -0.4]), s=0.9, tau=0.2,
                              stretched=True)
        errs.append(abs(det - free))
    assert errs[0] > errs[1] > errs[2]


def test_bounce_census_disk_one_bounce():
    base = Domain("disk", 1.0)
    eps = 0.01
    st = stretch(base, eps)
    pts = sample_census_points(st, 300, v_cap=5.0, eta=0.1, seed=42)
    rep = bounce_census(st, eps, 10.0, pts)
    assert rep["max_bounces"] <= 1
    assert rep["lemma_margin"] is None or rep["lemma_margin"] >= 1.0


def test_bounce_census_boundary_start_zero_bounces():
    base = Domain("disk", 1.0)
    eps = 0.01
    st = stretch(base, eps)
    pts = sample_census_points(st, 300, v_cap=5.0, eta=0.1, seed=43,
                               boundary_start=True)
    rep = bounce_census(st, eps, 10.0, pts)
    assert rep["max_bounces"] == 0


def test_bounce_census_slab_interbounce_time():
    # chord time between parallel walls: (2H/eps-stretched)/|v1| >= 2
    eps = 0.2
    st = stretch(Domain("slab", 1.0), eps)
    rng = np.random.default_rng(7)
    pts = []
    while len(pts) < 100:
        v = rng.uniform(-5, 5, 3)
        if abs(v[0]) < 0.2:
            continue
        y = np.array([rng.uniform(-st.size, st.size), 0.0, 0.0])
        pts.append((y, v))
    rep = bounce_census(st, eps, 1.0, pts)
    if rep["min_interbounce"] is not None:
        assert rep["min_interbounce"] >= 2.0
