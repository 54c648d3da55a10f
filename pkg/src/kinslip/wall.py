"""Maxwell accommodation boundary condition on the channel walls.

Absolute form: F|in = (1 - alpha) F(R_x v) + alpha M^w(v) * outgoing flux.
Fluctuation form: the linearized operator P_gamma plus the wall-temperature
remainder operators Q1 (first order) and Q2 (second order).

Each face precomputes the wall Maxwellian, the half-space node split, the
exact reflection permutation and the discrete flux normalizations.  The
normalized variants make the discrete diffuse reflection conserve mass to
roundoff (the raw continuum constants conserve it only to quadrature
accuracy); the solver uses the normalized path, the raw one remains for the
operator-level identity checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .velocity import VelocityGrid, TWO_PI, half_space_masks


def local_maxwellian(v: np.ndarray, rho: float, u: np.ndarray, T: float) -> np.ndarray:
    """M_{rho,u,T}(v) = rho (2 pi T)^{-3/2} exp(-|v-u|^2 / (2T))."""
    d = np.asarray(v, dtype=float) - np.asarray(u, dtype=float)
    return rho * np.exp(-0.5 * np.sum(d * d, axis=-1) / T) / (TWO_PI * T) ** 1.5


def wall_maxwellian(grid: VelocityGrid, T_w: float) -> np.ndarray:
    """M^w = sqrt(2 pi / T_w) M_{1,0,T_w}, normalized so the incoming
    continuum flux integral equals one."""
    return np.sqrt(TWO_PI / T_w) * local_maxwellian(grid.nodes, 1.0, np.zeros(3), T_w)


@dataclass
class WallFace:
    """Precomputed boundary data for one wall face."""

    name: str
    normal: np.ndarray
    theta_w: float
    out_mask: np.ndarray = field(repr=False)
    in_mask: np.ndarray = field(repr=False)
    reflect_idx: np.ndarray = field(repr=False)
    flux_w: np.ndarray = field(repr=False)  # |n.v| * quadrature weight per node
    Mw: np.ndarray = field(repr=False)
    Mw_flux: float = 0.0       # sum_in Mw |n.v| w  (continuum value 1)
    mu_flux: float = 0.0       # sum_in mu |n.v| w  (continuum value 1/sqrt(2pi))

    @property
    def Mw_hat(self) -> np.ndarray:
        """Flux-renormalized wall Maxwellian: exact discrete conservation."""
        return self.Mw / self.Mw_flux

    @property
    def pgamma_const_hat(self) -> float:
        """Discrete replacement for sqrt(2 pi) in P_gamma."""
        return 1.0 / self.mu_flux


@dataclass
class WallModel:
    """Accommodation coefficient plus per-face precomputation."""

    grid: VelocityGrid
    alpha: float
    eps: float
    faces: dict

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    def face(self, name: str) -> WallFace:
        return self.faces[name]


def build_wall_model(grid: VelocityGrid, alpha: float, eps: float,
                     theta_w: dict | None = None) -> WallModel:
    """Wall model for the slab channel: faces 'left' (x1=-H, n=-e1) and
    'right' (x1=+H, n=+e1).  `theta_w` maps face name to the temperature
    fluctuation (T_w = 1 + eps theta_w)."""
    theta_w = theta_w or {"left": 0.0, "right": 0.0}
    faces = {}
    for name, n_vec in (("left", np.array([-1.0, 0.0, 0.0])),
                        ("right", np.array([1.0, 0.0, 0.0]))):
        out_mask, in_mask = half_space_masks(grid, n_vec)
        refl = grid.reflection_index(axis=0)
        tw = float(theta_w.get(name, 0.0))
        Mw = wall_maxwellian(grid, 1.0 + eps * tw)
        vn = grid.nodes @ n_vec
        flux_w = np.abs(vn) * grid.weights
        face = WallFace(
            name=name, normal=n_vec, theta_w=tw,
            out_mask=out_mask, in_mask=in_mask, reflect_idx=refl,
            flux_w=flux_w, Mw=Mw,
            Mw_flux=float(np.sum(Mw[in_mask] * flux_w[in_mask])),
            mu_flux=float(np.sum(grid.mu[in_mask] * flux_w[in_mask])),
        )
        faces[name] = face
    return WallModel(grid=grid, alpha=alpha, eps=eps, faces=faces)


def outgoing_flux(face: WallFace, F: np.ndarray) -> float:
    """int_{n.u>0} F [n.u] du by half-space quadrature."""
    m = face.out_mask
    return float(np.sum(np.asarray(F)[m] * face.flux_w[m]))


def apply_maxwell_bc_absolute(wall: WallModel, face_name: str, F: np.ndarray,
                              normalized: bool = False) -> np.ndarray:
    """Incoming values of the Maxwell boundary condition from a full node
    vector F (only its outgoing entries are read).

    Returns a full-length vector holding (1-alpha) F(R_x v) + alpha M^w(v)
    times the outgoing flux; entries outside the incoming set are zero.
    """
    face = wall.face(face_name)
    a = wall.alpha
    F = np.asarray(F, dtype=float)
    Mw = face.Mw_hat if normalized else face.Mw
    out = np.zeros_like(F)
    inc = face.in_mask
    out[inc] = (1.0 - a) * F[face.reflect_idx][inc] \
        + a * Mw[inc] * outgoing_flux(face, F)
    return out


def apply_P_gamma(wall: WallModel, face_name: str, f: np.ndarray,
                  normalized: bool = False) -> np.ndarray:
    """P_gamma f = sqrt(2 pi) sqrt(mu)(v) int_{n.u>0} f sqrt(mu) [n.u] du,
    broadcast over all nodes."""
    face = wall.face(face_name)
    grid = wall.grid
    c = face.pgamma_const_hat if normalized else np.sqrt(TWO_PI)
    flux = outgoing_flux(face, np.asarray(f) * grid.sqrt_mu)
    return c * grid.sqrt_mu * flux


def apply_Q1(wall: WallModel, face_name: str, f: np.ndarray, eps: float,
             normalized: bool = False) -> np.ndarray:
    """Q1(f) = eps^{-1} [ sqrt(mu)^{-1} P^w_gamma(sqrt(mu) f) - P_gamma f ]."""
    face = wall.face(face_name)
    grid = wall.grid
    Mw = face.Mw_hat if normalized else face.Mw
    flux = outgoing_flux(face, np.asarray(f) * grid.sqrt_mu)
    diffuse = Mw * flux / grid.sqrt_mu
    return (diffuse - apply_P_gamma(wall, face_name, f, normalized)) / eps


def apply_Q2(wall: WallModel, face_name: str, phi: np.ndarray, eps: float,
             normalized: bool = False) -> np.ndarray:
    """Q2(phi) = eps [ phi - sqrt(mu)^{-1} P^w_gamma(sqrt(mu) phi) ]."""
    face = wall.face(face_name)
    grid = wall.grid
    Mw = face.Mw_hat if normalized else face.Mw
    flux = outgoing_flux(face, np.asarray(phi) * grid.sqrt_mu)
    return eps * (np.asarray(phi) - Mw * flux / grid.sqrt_mu)


def expand_wall_maxwellian(wall: WallModel, face_name: str, eps: float) -> dict:
    """Residual of M^w against its first-order expansion in eps:
    M^w = sqrt(2pi) mu + eps theta_w sqrt(2pi) (|v|^2/2 - 2) mu + O(eps^2).

    Reports the max node residual scaled by <v>^4 mu (the remainder weight).
    """
    face = wall.face(face_name)
    grid = wall.grid
    tw = face.theta_w
    Mw = wall_maxwellian(grid, 1.0 + eps * tw)
    v2 = np.sum(grid.nodes**2, axis=1)
    expansion = np.sqrt(TWO_PI) * grid.mu * (1.0 + eps * tw * (0.5 * v2 - 2.0))
    weight = (1.0 + v2) ** 2 * grid.mu
    residual = float(np.max(np.abs(Mw - expansion) / weight))
    return {"residual": residual, "eps": eps, "theta_w": tw}


def theta_w_profile(kind: str, amplitude: float) -> dict:
    """Named wall-temperature profiles for the channel faces."""
    if kind == "constant":
        return {"left": amplitude, "right": amplitude}
    if kind == "opposite":
        return {"left": -amplitude, "right": amplitude}
    if kind == "zero":
        return {"left": 0.0, "right": 0.0}
    raise ValueError(f"unknown theta_w profile {kind!r}")


def extend_theta_w(mesh_x: np.ndarray, H: float, theta_w: dict) -> tuple[np.ndarray, np.ndarray]:
    """Smooth extension Theta_w across the channel (linear interpolation
    between the wall values) and rho_w = -Theta_w + mean(Theta_w)."""
    x = np.asarray(mesh_x, dtype=float)
    tl, tr = theta_w["left"], theta_w["right"]
    Theta = tl + (tr - tl) * (x + H) / (2.0 * H)
    rho = -Theta + Theta.mean()
    return Theta, rho


def build_fw(grid: VelocityGrid, mesh_x: np.ndarray, H: float,
             theta_w: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Prescribed steady profile f_w = sqrt(mu) [Theta_w (|v|^2-3)/2 + rho_w].

    Returns (f_w field of shape (n_cells, N), Theta_w, rho_w); the rho_w
    shift makes the total space-velocity integral of f_w vanish.
    """
    Theta, rho = extend_theta_w(mesh_x, H, theta_w)
    v2 = np.sum(grid.nodes**2, axis=1)
    chi_c = 0.5 * (v2 - 3.0) * grid.sqrt_mu
    fw = Theta[:, None] * chi_c[None, :] + rho[:, None] * grid.sqrt_mu[None, :]
    return fw, Theta, rho


def phi_eps_face(wall: WallModel, face_name: str, eps: float,
                 rho_w_face: float) -> np.ndarray:
    """Second-order wall expansion remainder phi_eps at a face, computed
    numerically: (M_{1+eps rho_w, 0, 1+eps theta_w} - mu - eps f_w sqrt(mu)) / (eps^2 sqrt(mu)).

    At the wall Theta_w equals theta_w, so f_w there is
    sqrt(mu) [theta_w (|v|^2-3)/2 + rho_w].
    """
    face = wall.face(face_name)
    grid = wall.grid
    tw = face.theta_w
    M = local_maxwellian(grid.nodes, 1.0 + eps * rho_w_face, np.zeros(3),
                         1.0 + eps * tw)
    v2 = np.sum(grid.nodes**2, axis=1)
    fw_face = (tw * 0.5 * (v2 - 3.0) + rho_w_face) * grid.sqrt_mu
    return (M - grid.mu - eps * fw_face * grid.sqrt_mu) / (eps**2 * grid.sqrt_mu)


def bc_mass_flux_defect(wall: WallModel, face_name: str, F: np.ndarray,
                        normalized: bool = False) -> float:
    """Relative defect between incoming and outgoing mass flux under the
    absolute Maxwell boundary condition."""
    face = wall.face(face_name)
    F_in = apply_maxwell_bc_absolute(wall, face_name, F, normalized)
    inc, m = face.in_mask, face.out_mask
    flux_in = float(np.sum(F_in[inc] * face.flux_w[inc]))
    flux_out = float(np.sum(np.asarray(F)[m] * face.flux_w[m]))
    return abs(flux_in - flux_out) / max(abs(flux_out), 1e-300)
