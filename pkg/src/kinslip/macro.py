"""Projection onto the five collision invariants, macroscopic fields, norms
and the energy/dissipation bookkeeping functionals.

The projector uses the discrete Gram matrix of the invariants instead of
assuming continuum orthonormality; that turns an O(tau_q) systematic error
into machine-precision algebra and makes idempotence exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .velocity import VelocityGrid


def invariant_basis(grid: VelocityGrid) -> np.ndarray:
    """The five collision invariants as rows: sqrt(mu), v_i sqrt(mu), (|v|^2-3)/2 sqrt(mu)."""
    v = grid.nodes
    s = grid.sqrt_mu
    chi = np.empty((5, grid.size))
    chi[0] = s
    chi[1] = v[:, 0] * s
    chi[2] = v[:, 1] * s
    chi[3] = v[:, 2] * s
    chi[4] = 0.5 * (np.sum(v * v, axis=1) - 3.0) * s
    return chi


class Projector:
    """Discrete orthogonal projection P onto span of the collision invariants."""

    def __init__(self, grid: VelocityGrid):
        self.grid = grid
        self.chi = invariant_basis(grid)
        weighted = self.chi * grid.weights
        self.gram = weighted @ self.chi.T
        self.gram_inv = np.linalg.inv(self.gram)
        # rows of `dual` give coefficients directly: c = dual @ f
        self.dual = self.gram_inv @ weighted

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        """(a, b1, b2, b3, c) such that P f = [a + b.v + c (|v|^2-3)/2] sqrt(mu)."""
        return self.dual @ np.asarray(f)

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.coefficients(f) @ self.chi

    def complement(self, f: np.ndarray) -> np.ndarray:
        return np.asarray(f) - self.apply(f)

    def split(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(coefficients, P f, (I-P) f)."""
        c = self.coefficients(f)
        pf = c @ self.chi
        return c, pf, np.asarray(f) - pf


def project_P(grid: VelocityGrid, f: np.ndarray, projector: Projector | None = None):
    """Project a velocity function onto N(L).

    Returns ``(coeffs, Pf, f_perp)``: the (a, b, c) coefficient vector, the
    reconstructed projection and the orthogonal remainder.
    """
    proj = projector if projector is not None else Projector(grid)
    return proj.split(f)


@dataclass
class MacroFields:
    """Per-spatial-cell invariant coefficients and derived residual fields."""

    x: np.ndarray
    a: np.ndarray
    b: np.ndarray  # (n_cells, 3)
    c: np.ndarray

    @property
    def rho(self) -> np.ndarray:
        return self.a

    @property
    def u(self) -> np.ndarray:
        return self.b

    @property
    def theta(self) -> np.ndarray:
        return self.c


def extract_macro(grid: VelocityGrid, mesh_x: np.ndarray, f_field: np.ndarray,
                  projector: Projector | None = None) -> MacroFields:
    """Extract (a, b, c) per spatial cell from f_field of shape (n_cells, N)."""
    proj = projector if projector is not None else Projector(grid)
    coeffs = f_field @ proj.dual.T
    return MacroFields(x=np.asarray(mesh_x), a=coeffs[:, 0], b=coeffs[:, 1:4], c=coeffs[:, 4])


def mean_fluctuation(grid: VelocityGrid, f_field: np.ndarray, volume_weights: np.ndarray) -> float:
    """<f> = (integral of f sqrt(mu) dx dv) / (integral of mu dx dv)."""
    num = float(volume_weights @ (f_field @ (grid.weights * grid.sqrt_mu)))
    den = float(np.sum(volume_weights) * np.sum(grid.weights * grid.mu))
    return num / den


def limit_residuals(mesh_x: np.ndarray, macro: MacroFields) -> dict:
    """Discrete divergence and Boussinesq residuals of a channel macro state.

    In the 1-D channel the divergence residual is ||d b1/dx||_2 and the
    Boussinesq residual is ||d(a+c)/dx||_2, both over interior cells.
    """
    x = np.asarray(mesh_x)
    hx = x[1] - x[0]

    def d_dx(q):
        return (q[2:] - q[:-2]) / (2.0 * hx)

    div_u = d_dx(macro.b[:, 0])
    bous = d_dx(macro.a + macro.c)
    return {
        "div_residual": float(np.sqrt(hx * np.sum(div_u**2))),
        "boussinesq_residual": float(np.sqrt(hx * np.sum(bous**2))),
    }


def norm_L2(grid: VelocityGrid, f_field: np.ndarray, volume_weights: np.ndarray) -> float:
    """|| f ||_2 over cells x nodes."""
    per_cell = f_field**2 @ grid.weights
    return float(np.sqrt(volume_weights @ per_cell))


def norm_nu(grid: VelocityGrid, nu: np.ndarray, f_field: np.ndarray,
            volume_weights: np.ndarray) -> float:
    """|| nu^{1/2} f ||_2."""
    per_cell = f_field**2 @ (grid.weights * nu)
    return float(np.sqrt(volume_weights @ per_cell))


def norm_w_inf(grid: VelocityGrid, f_field: np.ndarray) -> float:
    """|| w f ||_inf with w = exp(beta' |v|^2)."""
    return float(np.max(np.abs(f_field) * grid.w))


def coercivity_check(L_apply, nu: np.ndarray, grid: VelocityGrid, f: np.ndarray,
                     projector: Projector | None = None, tau_null: float = 1e-3):
    """Rayleigh quotients <f, Lf> / ||(I-P)f||^2 (nu-weighted and plain L2).

    Returns the string ``"in-null-space"`` when ||(I-P)f||_nu < tau_null.
    """
    proj = projector if projector is not None else Projector(grid)
    f = np.asarray(f)
    f_perp = proj.complement(f)
    denom_nu = float(np.sum(grid.weights * nu * f_perp**2))
    if np.sqrt(denom_nu) < tau_null:
        return "in-null-space"
    lf = L_apply(f)
    num = float(np.sum(grid.weights * f * lf))
    denom_2 = float(np.sum(grid.weights * f_perp**2))
    return {"ratio_nu": num / denom_nu, "ratio_2": num / denom_2}


@dataclass
class DiagnosticsTrace:
    """Running norm bundle plus the energy/dissipation functionals.

    ``lam`` is a diagnostic input only (default 0); the functionals are the
    running supremum / running time integrals of the weighted norms, so they
    are nondecreasing in t by construction.
    """

    lam: float = 0.0
    times: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    energy: float = 0.0
    energy_dt: float = 0.0
    dissipation: float = 0.0
    _prev_f2: float | None = None

    def record(self, t: float, norms: dict) -> dict:
        """Append one sample; `norms` must carry the instantaneous bundle."""
        gain = np.exp(2.0 * self.lam * t)
        self.energy = max(self.energy, gain * norms["L2"] ** 2)
        if "L2_dt" in norms:
            self.energy_dt = max(self.energy_dt, gain * norms["L2_dt"] ** 2)
        if self.times:
            dt = t - self.times[-1]
            eps = norms.get("eps", 1.0)
            alpha = norms.get("alpha", 0.0)
            self.dissipation += dt * gain * (
                norms.get("P_L2", 0.0) ** 2
                + norms.get("Iperp_nu", 0.0) ** 2 / eps**2
                + (alpha / eps) * norms.get("bdy_1mPgamma", 0.0) ** 2
                + (alpha / eps) * norms.get("bdy_L2", 0.0) ** 2
            )
        row = dict(norms)
        row["t"] = t
        row["energy"] = self.energy
        row["dissipation"] = self.dissipation
        self.times.append(t)
        self.rows.append(row)
        return row
