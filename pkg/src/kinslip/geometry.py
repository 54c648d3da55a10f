"""Spatial domains, backward characteristics, specular bounce tracing and the
stretched-domain diagnostics.

Two canonical geometries: the slab (channel between planes x1 = +-H, periodic
in the tangential directions) used by the PDE solver, and the disk (circular
cross-section in the (x1, x2) plane, free x3, 3-D velocities) used for the
curvature-dependent bounce census.  Both are level-set domains Omega =
{xi < 0} with |grad xi| = 1 on the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Domain:
    """Level-set domain; `size` is the slab half-width H or disk radius R."""

    kind: str  # "slab" | "disk"
    size: float

    def __post_init__(self):
        if self.kind not in ("slab", "disk"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.size <= 0:
            raise ValueError("domain size must be positive")

    def xi(self, x: np.ndarray) -> np.ndarray:
        """Level set with unit normal gradient on the boundary."""
        x = np.asarray(x, dtype=float)
        if self.kind == "slab":
            return (x[..., 0] ** 2 - self.size**2) / (2.0 * self.size)
        r2 = x[..., 0] ** 2 + x[..., 1] ** 2
        return (r2 - self.size**2) / (2.0 * self.size)

    def grad_xi(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        if self.kind == "slab":
            g[..., 0] = x[..., 0] / self.size
        else:
            g[..., 0] = x[..., 0] / self.size
            g[..., 1] = x[..., 1] / self.size
        return g

    def normal(self, x: np.ndarray) -> np.ndarray:
        """Outward unit normal n = grad xi / |grad xi| (valid near the boundary)."""
        g = self.grad_xi(x)
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
        if np.any(norm < 1e-14):
            raise ValueError("normal undefined where grad xi vanishes")
        return g / norm

    def inside(self, x: np.ndarray) -> np.ndarray:
        return self.xi(x) < 0.0

    def boundary_points(self, m: int) -> np.ndarray:
        """Deterministic boundary sample for curvature estimation."""
        if self.kind == "slab":
            ts = np.linspace(-1.0, 1.0, m)
            pts = np.zeros((2 * m, 3))
            pts[:m, 0] = self.size
            pts[:m, 1] = ts
            pts[m:, 0] = -self.size
            pts[m:, 1] = ts
            return pts
        ang = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
        return np.stack([self.size * np.cos(ang), self.size * np.sin(ang),
                         np.zeros(m)], axis=1)


def curvature_constant(domain: Domain, m: int = 256) -> float:
    """C_xi with |(x1 - x') . n(x1)| <= C_xi |x1 - x'|^2 for boundary pairs,
    measured on sampled boundary points at small separations (0 for the slab,
    1/(2R) for the disk)."""
    pts = domain.boundary_points(m)
    nrm = domain.normal(pts)
    best = 0.0
    for k in (1, 2, 3):
        d = pts - np.roll(pts, k, axis=0)
        d2 = np.sum(d * d, axis=1)
        ok = d2 > 1e-20
        ratio = np.abs(np.sum(d * nrm, axis=1))[ok] / d2[ok]
        if ratio.size:
            best = max(best, float(ratio.max()))
    return best


def stretch(domain: Domain, eps: float) -> Domain:
    """Stretched domain Omega_eps = Omega / eps (x -> y = x / eps).

    The scaled level set xi(eps y) has the same zero set and the same unit
    normal as the rescaled-parameter domain returned here.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    return Domain(kind=domain.kind, size=domain.size / eps)


def specular_reflect(n: np.ndarray, v: np.ndarray) -> np.ndarray:
    """R_x v = v - 2 (n . v) n for unit normal n."""
    n = np.asarray(n, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - 2.0 * np.dot(n, v) * n


@dataclass
class TrajectoryState:
    t: float
    x: np.ndarray
    v: np.ndarray
    bounce_log: list = field(default_factory=list)


class StepOverflow(RuntimeError):
    pass


def _rk4_step(x, v, accel, dt):
    k1x, k1v = v, accel(x)
    k2x, k2v = v + 0.5 * dt * k1v, accel(x + 0.5 * dt * k1x)
    k3x, k3v = v + 0.5 * dt * k2v, accel(x + 0.5 * dt * k2x)
    k4x, k4v = v + dt * k3v, accel(x + dt * k3x)
    xn = x + dt * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0
    vn = v + dt * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0
    return xn, vn


def flow(domain: Domain, state: TrajectoryState, s: float, eps: float,
         phi=None, stretched: bool = False, max_steps: int = 2_000_000) -> TrajectoryState:
    """Integrate the backward characteristic dx/dt = v, dv/dt = eps^p Phi(x)
    from state.t down to time s (p = 2 unstretched, p = 3 stretched).

    Stops early at a boundary crossing, resolving the crossing time by
    bisection on xi to 1e-12 relative.  Free flight (phi None) is exact.
    """
    if s > state.t:
        raise ValueError("flow integrates backward: need s <= state.t")
    scale = eps ** (3 if stretched else 2)
    if phi is None:
        accel = lambda x: np.zeros(3)
    else:
        accel = lambda x: scale * np.asarray(phi(x), dtype=float)

    x, v, t = state.x.astype(float).copy(), state.v.astype(float).copy(), state.t
    speed = max(np.linalg.norm(v), 1e-12)
    dt_mag = min(domain.size / speed / 64.0, abs(s - state.t) / 16.0 + 1e-300)
    n_steps = 0
    while t > s + 1e-15:
        dt = -min(dt_mag, t - s)
        xn, vn = _rk4_step(x, v, accel, dt)
        if domain.xi(xn) >= 0.0:
            lo, hi = 0.0, 1.0  # fraction of the step until crossing
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                xm, vm = _rk4_step(x, v, accel, dt * mid)
                if domain.xi(xm) >= 0.0:
                    hi = mid
                else:
                    lo = mid
                if abs(domain.xi(xm)) <= 1e-12 * domain.size:
                    break
            xb, vb = _rk4_step(x, v, accel, dt * hi)
            return TrajectoryState(t=t + dt * hi, x=xb, v=vb,
                                   bounce_log=list(state.bounce_log))
        x, v, t = xn, vn, t + dt
        n_steps += 1
        if n_steps > max_steps:
            raise StepOverflow("flow exceeded the step budget")
    return TrajectoryState(t=s, x=x, v=v, bounce_log=list(state.bounce_log))


_NO_EXIT = None


def _free_exit_time(domain: Domain, x: np.ndarray, v: np.ndarray) -> float | None:
    """Closed-form first backward crossing time for free flight: position
    x - v tau, smallest tau > 0 with xi = 0."""
    if domain.kind == "slab":
        H, v1, x1 = domain.size, -v[0], x[0]
        if abs(v1) < 1e-300:
            return None
        cands = [(H - x1) / v1, (-H - x1) / v1]
        cands = [c for c in cands if c > 1e-14]
        return min(cands) if cands else None
    # disk: |x_perp - v_perp tau|^2 = R^2
    a = v[0] ** 2 + v[1] ** 2
    if a < 1e-300:
        return None
    b = -2.0 * (x[0] * v[0] + x[1] * v[1])
    c = x[0] ** 2 + x[1] ** 2 - domain.size**2
    disc = b * b - 4 * a * c
    if disc < 0:
        return None
    sq = np.sqrt(disc)
    roots = [(-b - sq) / (2 * a), (-b + sq) / (2 * a)]
    roots = [r for r in roots if r > 1e-12]
    return min(roots) if roots else None


def exit_time(domain: Domain, x: np.ndarray, v: np.ndarray, eps: float = 1.0,
              phi=None, stretched: bool = False, t_max: float = 1e4):
    """Backward exit data (t_b, y_b, v_b): first time the backward
    characteristic from (x, v) leaves Omega.

    Returns None if no crossing occurs within the horizon t_max.  Free flight
    uses the exact ray intersection; with a field the crossing comes from the
    integrator's bisection.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if phi is None:
        tb = _free_exit_time(domain, x, v)
        if tb is None or tb > t_max:
            return None
        return tb, x - v * tb, v.copy()
    st = flow(domain, TrajectoryState(t=0.0, x=x, v=v), -t_max, eps, phi,
              stretched=stretched)
    if st.t <= -t_max + 1e-12 and domain.xi(st.x) < 0:
        return None
    return -st.t, st.x, st.v


def bounce_census(domain: Domain, eps: float, t0: float, samples, phi=None,
                  stretched: bool = True) -> dict:
    """Trace backward specular trajectories in the stretched domain over
    [0, t0] and report bounce statistics against the one-bounce claim.

    `samples` is an iterable of (y, v) pairs in the stretched domain.  The
    report carries max bounce count, the minimum inter-bounce time, and the
    empirical margin of the inter-bounce lower bound
    t_b >= |v.n| / (64 C_xi |v|^2) (C_xi of the stretched domain).
    """
    c_xi = curvature_constant(domain)
    max_bounces = 0
    min_interbounce = np.inf
    lemma_margin = np.inf
    n_samples = 0
    for y, v in samples:
        n_samples += 1
        x_cur = np.asarray(y, float)
        v_cur = np.asarray(v, float)
        remaining = t0
        bounces = 0
        while True:
            hit = exit_time(domain, x_cur, v_cur, eps, phi, stretched,
                            t_max=remaining + 1.0)
            if hit is None or hit[0] > remaining:
                break
            tb, yb, vb = hit
            bounces += 1
            remaining -= tb
            n = domain.normal(yb)
            v_refl = specular_reflect(n, vb)
            # next boundary encounter from this bounce, horizon-free
            nxt = exit_time(domain, yb, v_refl, eps, phi, stretched, t_max=1e7)
            if nxt is not None:
                t_next = nxt[0]
                min_interbounce = min(min_interbounce, t_next)
                if c_xi > 0:
                    bound = abs(np.dot(n, vb)) / (64.0 * c_xi *
                                                  np.dot(vb, vb))
                    lemma_margin = min(lemma_margin, t_next / bound)
            x_cur, v_cur = yb, v_refl
        max_bounces = max(max_bounces, bounces)
    return {
        "eps": eps,
        "T0": t0,
        "samples": n_samples,
        "max_bounces": int(max_bounces),
        "min_interbounce": None if np.isinf(min_interbounce) else float(min_interbounce),
        "lemma_margin": None if np.isinf(lemma_margin) else float(lemma_margin),
        "c_xi": c_xi,
    }


def census_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def sample_census_points(domain: Domain, n: int, v_cap: float, eta: float,
                         seed: int, boundary_start: bool = False):
    """Deterministic (y, v) samples for the census.

    Interior starts are uniform over the domain cross-section; boundary
    starts sit on the wall with outgoing velocities, excluding the grazing
    band |n.v| < eta (backward tracing continues from outgoing data).
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        v = rng.uniform(-v_cap, v_cap, size=3)
        if np.linalg.norm(v) > v_cap:
            continue
        if boundary_start:
            if domain.kind == "disk":
                ang = rng.uniform(0, 2 * np.pi)
                y = np.array([domain.size * np.cos(ang),
                              domain.size * np.sin(ang), 0.0])
            else:
                side = 1.0 if rng.random() < 0.5 else -1.0
                y = np.array([side * domain.size, rng.uniform(-1, 1), 0.0])
            nrm = domain.normal(y)
            if np.dot(nrm, v) < eta:
                continue
        else:
            if domain.kind == "disk":
                r = domain.size * np.sqrt(rng.random())
                ang = rng.uniform(0, 2 * np.pi)
                y = np.array([r * np.cos(ang), r * np.sin(ang), 0.0])
            else:
                y = np.array([rng.uniform(-domain.size, domain.size),
                              rng.uniform(-1, 1), 0.0])
            if np.linalg.norm(v[:2]) < 1e-6:
                continue
        out.append((y, v))
    return out


def flight_jacobian(domain: Domain, eps: float, phi, t: float, y: np.ndarray,
                    v: np.ndarray, s: float, tau: float, delta: float = 1e-5,
                    stretched: bool = True) -> float:
    """det d Y(tau; s, y_s, v') / dv' at v' = v by central differences, where
    y_s is the backward position at time s starting from (t, y, v).

    The segment between s and tau must stay bounce-free; a perturbed
    trajectory hitting the boundary raises ValueError.
    """
    if not tau < s <= t:
        raise ValueError("need tau < s <= t")
    base = flow(domain, TrajectoryState(t=t, x=np.asarray(y, float),
                                        v=np.asarray(v, float)), s, eps, phi,
                stretched=stretched)
    if base.t > s + 1e-12:
        raise ValueError("trajectory hit the boundary before reaching s")
    J = np.empty((3, 3))
    for k in range(3):
        cols = []
        for sgn in (+1.0, -1.0):
            vp = base.v.copy()
            vp[k] += sgn * delta
            st = flow(domain, TrajectoryState(t=s, x=base.x.copy(), v=vp),
                      tau, eps, phi, stretched=stretched)
            if st.t > tau + 1e-12:
                raise ValueError("perturbed trajectory hit the boundary")
            cols.append(st.x)
        J[:, k] = (cols[0] - cols[1]) / (2.0 * delta)
    return float(np.linalg.det(J))
