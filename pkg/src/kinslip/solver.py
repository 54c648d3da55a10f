"""Kinetic channel solver: steady Picard iteration and unsteady stepping in
fluctuation form, plus the semi-implicit positivity-preserving iteration in
absolute form.

Discretization: 1-D uniform cells across the channel, full 3-D velocity grid.
Transport is explicit upwind (second-order Fromm reconstruction by default;
the wall trace closure stays first-order), the external tangential field term
is explicit, and the stiff linearized collision operator is solved implicitly
per step with a cached Cholesky factorization of (I + dt/eps^2 L).  Because
the production L annihilates the discrete invariants exactly and the wall
operators use flux-normalized constants, every step conserves total mass to
roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .collision import (CollisionMatrices, GammaOperator, gamma_perp_cells,
                        pair_distance_matrix, q_gain_cells)
from .macro import Projector
from .velocity import TWO_PI, VelocityGrid
from .wall import (WallModel, apply_maxwell_bc_absolute, apply_P_gamma,
                   apply_Q1, apply_Q2, build_fw, phi_eps_face)


@dataclass(frozen=True)
class SpatialMesh:
    """Uniform cell-centered mesh on the channel cross-direction [-H, H]."""

    n_cells: int
    H: float

    def __post_init__(self):
        if self.n_cells < 16:
            raise ValueError("n_cells must be >= 16")

    @property
    def hx(self) -> float:
        return 2.0 * self.H / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return -self.H + (np.arange(self.n_cells) + 0.5) * self.hx


@dataclass
class KineticState:
    """Distribution snapshot: fluctuation f or absolute F of shape (cells, N)."""

    f: np.ndarray
    t: float
    eps: float
    mode: str  # "steady-picard" | "unsteady" | "positivity"
    residual_history: list = field(default_factory=list)
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)


def save_checkpoint(path: str, state: KineticState, grid: VelocityGrid,
                    mesh: SpatialMesh, alpha: float) -> None:
    """Binary field dump; the header records the grid parameters so a restart
    can validate compatibility.  Restarting is bit-identical because stepping
    is a deterministic function of the stored state."""
    np.savez(path,
             f=state.f, t=state.t, eps=state.eps, mode=state.mode,
             alpha=alpha, n_per_axis=grid.n_per_axis, v_max=grid.v_max,
             n_cells=mesh.n_cells, H=mesh.H)


def load_checkpoint(path: str, grid: VelocityGrid, mesh: SpatialMesh) -> KineticState:
    data = np.load(path)
    if (int(data["n_per_axis"]) != grid.n_per_axis
            or float(data["v_max"]) != grid.v_max
            or int(data["n_cells"]) != mesh.n_cells
            or float(data["H"]) != mesh.H):
        raise ValueError("checkpoint grid parameters do not match")
    return KineticState(f=data["f"], t=float(data["t"]), eps=float(data["eps"]),
                        mode=str(data["mode"]))


class ChannelKinetics:
    """Bundles the precomputed operators for one (grid, mesh, wall, eps) run."""

    def __init__(self, grid: VelocityGrid, mesh: SpatialMesh,
                 mats: CollisionMatrices, wall: WallModel,
                 gamma: GammaOperator, eps: float, phi2: float = 0.0,
                 transport_order: int = 2, cfl: float = 0.8,
                 gamma_refresh: int = 10):
        self.grid = grid
        self.mesh = mesh
        self.mats = mats
        self.wall = wall
        self.gamma = gamma
        self.proj = gamma.proj
        self.eps = float(eps)
        self.phi2 = float(phi2)
        self.order = transport_order
        self.cfl = cfl
        self.gamma_refresh = gamma_refresh

        self.v1 = grid.nodes[:, 0]
        self.pos = self.v1 > 0
        self.neg = self.v1 < 0
        self.L_hat = mats.L
        self._chol = {}
        self._quad_cache = None
        self._quad_age = 0

        theta_w = {name: wall.face(name).theta_w for name in ("left", "right")}
        self.fw, self.Theta_w, self.rho_w = build_fw(grid, mesh.x, mesh.H, theta_w)
        self.fw_coeffs = np.zeros((mesh.n_cells, 5))
        self.fw_coeffs[:, 0] = self.rho_w
        self.fw_coeffs[:, 4] = self.Theta_w
        # wall values of rho_w for the second-order remainder phi_eps
        mean_theta = float(self.Theta_w.mean())
        self.phi_eps = {
            name: phi_eps_face(wall, name, eps, -wall.face(name).theta_w + mean_theta)
            for name in ("left", "right")
        }
        self.Rs = self.build_Rs()

        # stacked Gamma cross matrices for one-dgemm evaluation
        self.M_flat = np.ascontiguousarray(
            self.gamma.M.transpose(0, 2, 1).reshape(5 * grid.size, grid.size).T)

        self.hx = mesh.hx
        self.dt_max = cfl * eps * self.hx / float(np.max(np.abs(self.v1)))
        self._loss_R = None

    # ----- building blocks -------------------------------------------------

    def dv_weighted(self, f_cells: np.ndarray) -> np.ndarray:
        """(1/sqrt(mu)) d/dv2 (sqrt(mu) f) by centered differences with zero
        padding outside the cutoff."""
        grid = self.grid
        n = grid.n_per_axis
        M = f_cells.shape[0]
        g = (f_cells * grid.sqrt_mu).reshape(M, n, n, n)
        out = np.zeros_like(g)
        out[:, :, 1:-1, :] = g[:, :, 2:, :] - g[:, :, :-2, :]
        out[:, :, 0, :] = g[:, :, 1, :]
        out[:, :, -1, :] = -g[:, :, -2, :]
        out /= 2.0 * grid.h
        return out.reshape(M, grid.size) / grid.sqrt_mu

    def bc_ghost(self, face_name: str, trace: np.ndarray,
                 r_extra: np.ndarray | None = None) -> np.ndarray:
        """Fluctuation-form ghost values: (1-a) L f + a P_gamma f + a r."""
        wall = self.wall
        a = wall.alpha
        face = wall.face(face_name)
        ghost = (1.0 - a) * trace[face.reflect_idx]
        if a > 0.0:
            ghost = ghost + a * apply_P_gamma(wall, face_name, trace, normalized=True)
            if r_extra is not None:
                ghost = ghost + a * r_extra
        return ghost

    def transport_div(self, f: np.ndarray, ghost_L: np.ndarray,
                      ghost_R: np.ndarray) -> np.ndarray:
        """d/dx of the upwind flux v1 f; ghosts supply the incoming wall trace."""
        M, N = f.shape
        fv = np.empty((M + 1, N))
        pos, neg = self.pos, self.neg
        if self.order == 1:
            fv[1:, pos] = f[:, pos]
            fv[0, pos] = ghost_L[pos]
            fv[:-1, neg] = f[:, neg]
            fv[M, neg] = ghost_R[neg]
        else:
            # Fromm reconstruction from the upwind side; wall faces stay
            # first-order (ghost trace), the first interior face uses the
            # ghost as the upstream neighbor
            fv[0, pos] = ghost_L[pos]
            fv[M, pos] = f[M - 1, pos]
            if M >= 2:
                fv[1, pos] = f[0, pos] + 0.25 * (f[1, pos] - ghost_L[pos])
            for j in range(2, M):
                fv[j, pos] = f[j - 1, pos] + 0.25 * (f[j, pos] - f[j - 2, pos])
            fv[M, neg] = ghost_R[neg]
            fv[0, neg] = f[0, neg]
            if M >= 2:
                fv[M - 1, neg] = f[M - 1, neg] + 0.25 * (f[M - 2, neg] - ghost_R[neg])
            for j in range(1, M - 1):
                fv[j, neg] = f[j, neg] + 0.25 * (f[j - 1, neg] - f[j + 1, neg])
        return self.v1 * np.diff(fv, axis=0) / self.hx

    def collision_solve(self, rhs: np.ndarray, dt: float) -> np.ndarray:
        """(I + dt/eps^2 L)^{-1} rhs per cell; exact invariant conservation
        because the invariants are exact null vectors of the production L."""
        c = dt / self.eps**2
        key = round(np.log(c) * 1e12)
        if key not in self._chol:
            if len(self._chol) > 3:
                self._chol.pop(next(iter(self._chol)))
            A = np.eye(self.grid.size) + c * self.L_hat
            self._chol[key] = cho_factor(A, lower=False, check_finite=False)
        return cho_solve(self._chol[key], rhs.T, check_finite=False).T

    def q1_boundary(self, face_name: str, trace: np.ndarray) -> np.ndarray:
        return apply_Q1(self.wall, face_name, trace, self.eps, normalized=True)

    def q2_boundary(self, face_name: str) -> np.ndarray:
        return apply_Q2(self.wall, face_name, self.phi_eps[face_name], self.eps,
                        normalized=True)

    def gamma_perp_quad(self, f_perp_cells: np.ndarray) -> np.ndarray:
        """Gamma(f_perp, f_perp) for all cells via the pruned fluctuation-form
        gain kernel; projected onto the conservative complement."""
        out = gamma_perp_cells(self.grid, f_perp_cells, self.gamma.rule)
        return out - (out @ self.proj.dual.T) @ self.proj.chi

    def gamma_source(self, f: np.ndarray, couple: np.ndarray | None,
                     quad: str = "cached") -> np.ndarray:
        """Conservative collision sources Gamma(f, f) + 2 Gamma(f, couple).

        The invariant-pair and cross terms are exact through the precomputed
        basis matrices; the perpendicular-perpendicular quadrature term is
        refreshed per `quad` policy ("exact", "cached", "skip").
        """
        proj = self.proj
        C = f @ proj.dual.T
        f_perp = f - C @ proj.chi
        total_C = C.copy()
        g_perp = f_perp
        if couple is not None:
            Cc = couple @ proj.dual.T
            total_C = C + 2.0 * Cc
            c_perp = couple - Cc @ proj.chi
            g_perp = f_perp + 2.0 * c_perp
        # Gamma(f, g) with g = f + 2 couple: pair part sum_ij C_i D_j pair[ij]
        pairs = np.einsum("mi,mj,ijk->mk", C, total_C, self.gamma.pair)
        # cross parts: sum_i C_i M_i g_perp + sum_i D_i M_i f_perp
        Yg = (g_perp @ self.M_flat).reshape(f.shape[0], 5, -1)
        Yf = (f_perp @ self.M_flat).reshape(f.shape[0], 5, -1)
        cross = np.einsum("mi,mik->mk", C, Yg) + np.einsum("mi,mik->mk", total_C, Yf)
        out = pairs + cross
        out = out - (out @ proj.dual.T) @ proj.chi
        if quad != "skip":
            if quad == "exact" or self._quad_cache is None \
                    or self._quad_age >= self.gamma_refresh:
                half_diff = 0.5 * (g_perp - f_perp)  # = couple_perp
                if np.max(np.abs(half_diff)) < 1e-13 * max(np.max(np.abs(f_perp)), 1e-300):
                    self._quad_cache = self.gamma_perp_quad(f_perp)
                else:
                    # polarization: Gamma(f_perp, g_perp) =
                    #   Gamma((f+g)/2, (f+g)/2) - Gamma((g-f)/2, (g-f)/2)
                    self._quad_cache = (self.gamma_perp_quad(0.5 * (f_perp + g_perp))
                                        - self.gamma_perp_quad(half_diff))
                self._quad_age = 0
            self._quad_age += 1
            out = out + self._quad_cache
        return out

    def build_Rs(self) -> np.ndarray:
        """Forcing field R_s = eps Phi.v sqrt(mu) - v.grad_x f_w
        - eps^2 (1/sqrt(mu)) Phi.grad_v(sqrt(mu) f_w) + Gamma(f_w, f_w)."""
        return sum(self.build_Rs_parts().values())

    def build_Rs_parts(self) -> dict:
        grid, mesh, eps = self.grid, self.mesh, self.eps
        M = mesh.n_cells
        term_force = np.tile(eps * self.phi2 * grid.nodes[:, 1] * grid.sqrt_mu,
                             (M, 1))
        # centered x-derivative of f_w (one-sided second order at the walls)
        dfw = np.empty_like(self.fw)
        dfw[1:-1] = (self.fw[2:] - self.fw[:-2]) / (2 * mesh.hx)
        dfw[0] = (-3 * self.fw[0] + 4 * self.fw[1] - self.fw[2]) / (2 * mesh.hx)
        dfw[-1] = (3 * self.fw[-1] - 4 * self.fw[-2] + self.fw[-3]) / (2 * mesh.hx)
        term_transport = -self.v1 * dfw
        term_field = -eps**2 * self.phi2 * self.dv_weighted(self.fw)
        # Gamma(f_w, f_w): f_w lies exactly in the invariant span
        gamma_fw = np.einsum("mi,mj,ijk->mk", self.fw_coeffs, self.fw_coeffs,
                             self.gamma.pair)
        gamma_fw = gamma_fw - (gamma_fw @ self.proj.dual.T) @ self.proj.chi
        return {"force": term_force, "transport": term_transport,
                "field": term_field, "gamma_fw": gamma_fw}

    # ----- fluctuation stepping --------------------------------------------

    def linear_step(self, f: np.ndarray, dt: float, source: np.ndarray,
                    r_L: np.ndarray | None, r_R: np.ndarray | None) -> np.ndarray:
        """One explicit-transport / implicit-collision step of
        eps df/dt + v1 dx f + eps^2 Phi dv f + (1/eps) L f = source."""
        ghost_L = self.bc_ghost("left", f[0], r_L)
        ghost_R = self.bc_ghost("right", f[-1], r_R)
        rhs = -self.transport_div(f, ghost_L, ghost_R)
        if self.phi2 != 0.0:
            rhs -= self.eps**2 * self.phi2 * self.dv_weighted(f)
        rhs += source
        return self.collision_solve(f + (dt / self.eps) * rhs, dt)

    def steady_residual(self, f: np.ndarray, source: np.ndarray,
                        r_L: np.ndarray | None, r_R: np.ndarray | None) -> float:
        ghost_L = self.bc_ghost("left", f[0], r_L)
        ghost_R = self.bc_ghost("right", f[-1], r_R)
        rhs = -self.transport_div(f, ghost_L, ghost_R)
        if self.phi2 != 0.0:
            rhs -= self.eps**2 * self.phi2 * self.dv_weighted(f)
        rhs += source - f @ self.L_hat.T / self.eps
        w = self.grid.weights * self.mesh.hx
        return float(np.sqrt(np.sum(rhs**2 @ w)))

    def apply_A(self, f: np.ndarray) -> np.ndarray:
        """Steady linear operator A f = v1 dx f + eps^2 field + (1/eps) L f
        with the homogeneous Maxwell boundary closure folded into transport."""
        ghost_L = self.bc_ghost("left", f[0], None)
        ghost_R = self.bc_ghost("right", f[-1], None)
        out = self.transport_div(f, ghost_L, ghost_R)
        if self.phi2 != 0.0:
            out += self.eps**2 * self.phi2 * self.dv_weighted(f)
        out += f @ self.L_hat.T / self.eps
        return out

    def rhs_b(self, source: np.ndarray, r_L, r_R) -> np.ndarray:
        """Right-hand side of A f = b: volume source minus the transport
        contribution of the boundary r-sources."""
        b = source.copy()
        a = self.wall.alpha
        if a > 0.0 and (r_L is not None or r_R is not None):
            zero = np.zeros_like(source)
            gl = a * r_L if r_L is not None else np.zeros(self.grid.size)
            gr = a * r_R if r_R is not None else np.zeros(self.grid.size)
            b -= self.transport_div(zero, gl, gr)
        return b

    def solve_inner_gmres(self, source: np.ndarray, r_L, r_R, f0: np.ndarray,
                          tol: float, maxiter: int = 40):
        """Krylov solve of the frozen-source inner problem, preconditioned by
        the implicit collision block (delta I + (1/eps) L)^{-1}.

        Returns (f, residual, converged); the zero-mass gauge is restored on
        the result (the operator has the uniform-Maxwellian null direction).
        """
        from scipy.sparse.linalg import LinearOperator, gmres

        M_cells, N = source.shape
        shape = (M_cells * N, M_cells * N)
        delta = float(np.max(np.abs(self.v1))) / self.hx
        key = ("gmres", round(np.log(max(delta, 1e-300)) * 1e9))
        if key not in self._chol:
            if len(self._chol) > 3:
                self._chol.pop(next(iter(self._chol)))
            A_pre = delta * np.eye(N) + self.L_hat / self.eps
            self._chol[key] = cho_factor(A_pre, lower=False, check_finite=False)

        def mv(x):
            return self.apply_A(x.reshape(M_cells, N)).ravel()

        def pc(x):
            return cho_solve(self._chol[key], x.reshape(M_cells, N).T,
                             check_finite=False).T.ravel()

        b = self.rhs_b(source, r_L, r_R)
        op = LinearOperator(shape, matvec=mv)
        pre = LinearOperator(shape, matvec=pc)
        w = self.grid.weights * self.mesh.hx
        scale = max(float(np.sqrt(np.sum(b**2 @ w))), 1e-300)
        sol, info = gmres(op, b.ravel(), x0=f0.ravel(), M=pre,
                          rtol=tol, atol=tol * scale, restart=100,
                          maxiter=min(maxiter, 15))
        f = sol.reshape(M_cells, N)
        # restore the zero-mass gauge along the exact null direction
        mass = self.total_mass_fluctuation(f)
        vol = 2.0 * self.mesh.H * float(np.sum(self.grid.weights * self.grid.mu))
        f -= (mass / vol) * self.grid.sqrt_mu
        res = float(np.sqrt(np.sum((b - self.apply_A(f)) ** 2 @ w)))
        return f, res, bool(info == 0) and res <= 10 * tol * scale

    def march_linear(self, source: np.ndarray, r_L, r_R, f0: np.ndarray,
                     tol: float, max_steps: int, check_every: int = 200):
        """Pseudo-time march of the frozen-source linear problem to steady
        state; returns (f, residual, converged)."""
        f = f0.copy()
        dt = self.dt_max
        w = self.grid.weights * self.mesh.hx
        scale = float(np.sqrt(np.sum(source**2 @ w)))
        for r in (r_L, r_R):  # boundary sources also drive the problem
            if r is not None:
                scale += self.wall.alpha / self.eps * float(
                    np.sqrt(np.sum(r**2 * self.grid.weights)))
        scale = max(scale, 1e-300)
        res = self.steady_residual(f, source, r_L, r_R)
        best = res
        stalled = 0
        for step in range(max_steps):
            f = self.linear_step(f, dt, source, r_L, r_R)
            if (step + 1) % check_every == 0:
                res = self.steady_residual(f, source, r_L, r_R)
                if res <= tol * scale or res <= 1e-15:
                    return f, res, True
                if res < best * 0.999:
                    best = res
                    stalled = 0
                else:
                    stalled += 1
                    if stalled >= 20:
                        return f, res, False  # no decay: degenerate problem
        return f, self.steady_residual(f, source, r_L, r_R), False

    def solve_steady(self, tol_picard: float = 1e-8, k_max: int = 200,
                     tol_inner: float = 1e-8, max_inner_steps: int = 400_000,
                     f_init: np.ndarray | None = None,
                     inner_solver: str = "gmres",
                     verbose: bool = False) -> KineticState:
        """Outer Picard loop with frozen collision/boundary sources.

        Sources per iteration: Gamma(f^k, f^k) + 2 Gamma(f^k, f_w) + R_s in
        the volume and eps(Q1 f^k + Q2 phi_eps) on the walls.  Each inner
        linear problem is solved either by preconditioned GMRES (default) or
        by pseudo-time marching with the unsteady stepper
        (inner_solver="march"); GMRES falls back to marching on stagnation.
        """
        M = self.mesh.n_cells
        f = np.zeros((M, self.grid.size)) if f_init is None else f_init.copy()
        state = KineticState(f=f, t=0.0, eps=self.eps, mode="steady-picard")
        norm_w = self.grid.weights * self.mesh.hx
        for k in range(k_max):
            src = self.gamma_source(f, self.fw, quad="exact") + self.Rs
            r_L = self.eps * (self.q1_boundary("left", f[0]) + self.q2_boundary("left"))
            r_R = self.eps * (self.q1_boundary("right", f[-1]) + self.q2_boundary("right"))
            if inner_solver == "gmres":
                f_new, res, ok = self.solve_inner_gmres(src, r_L, r_R, f, tol_inner)
                if not ok:
                    f_new, res, ok = self.march_linear(src, r_L, r_R, f_new,
                                                       tol_inner, max_inner_steps)
            else:
                f_new, res, ok = self.march_linear(src, r_L, r_R, f, tol_inner,
                                                   max_inner_steps)
            delta = float(np.sqrt(np.sum((f_new - f) ** 2 @ norm_w)))
            state.residual_history.append({"picard_iter": k, "inner_residual": res,
                                           "delta": delta, "inner_converged": ok})
            if verbose:
                print(f"picard {k}: delta={delta:.3e} inner_res={res:.3e} ok={ok}")
            f = f_new
            if not ok:
                state.f = f
                state.converged = False
                state.diagnostics["failure"] = "inner march stalled (no steady state?)"
                return state
            if delta <= tol_picard:
                state.f = f
                state.converged = True
                state.diagnostics["picard_iterations"] = k + 1
                return state
        state.f = f
        state.converged = False
        state.diagnostics["failure"] = f"no Picard convergence in {k_max} iterations"
        return state

    def step_unsteady(self, state: KineticState, dt: float,
                      f_couple: np.ndarray | None = None) -> KineticState:
        """One step of the perturbation equation
        eps df/dt + v.grad f + eps^2 field + (1/eps) L f
            = Gamma(f, f) + 2 Gamma(f, f_s + f_w),
        with the Maxwell boundary condition and r = eps Q1(f).

        `f_couple` is f_s + f_w (defaults to f_w alone).
        """
        if dt > self.dt_max * (1 + 1e-12):
            raise ValueError(f"dt={dt} violates the transport CFL bound {self.dt_max}")
        couple = self.fw if f_couple is None else f_couple
        src = self.gamma_source(state.f, couple, quad="cached")
        r_L = self.eps * self.q1_boundary("left", state.f[0])
        r_R = self.eps * self.q1_boundary("right", state.f[-1])
        f_new = self.linear_step(state.f, dt, src, r_L, r_R)
        return KineticState(f=f_new, t=state.t + dt, eps=self.eps,
                            mode="unsteady",
                            residual_history=state.residual_history,
                            converged=True, diagnostics=state.diagnostics)

    # ----- absolute-mode positivity iteration -------------------------------

    def step_positivity_absolute(self, state: KineticState, dt: float) -> KineticState:
        """Semi-implicit positivity-preserving step for the absolute density:
        the gain Q_+(F,F), the incoming upwind fluxes and the Maxwell wall
        re-emission are nonnegative, and the collision frequency sits in the
        denominator, so F stays nonnegative whenever the transport CFL holds.
        """
        if dt > self.dt_max * (1 + 1e-12):
            raise ValueError(f"dt={dt} violates the transport CFL bound {self.dt_max}")
        grid, eps = self.grid, self.eps
        F = state.f
        if np.any(F < 0):
            raise ValueError("positivity step requires nonnegative input")
        gain = q_gain_cells(grid, F, self.gamma.rule)
        if self._loss_R is None:
            self._loss_R = pair_distance_matrix(grid) * grid.weights
        nu_F = TWO_PI * F @ self._loss_R.T
        ghost_L = apply_maxwell_bc_absolute(self.wall, "left", F[0], normalized=True)
        ghost_R = apply_maxwell_bc_absolute(self.wall, "right", F[-1], normalized=True)
        # first-order upwind flux, fully explicit: the CFL bound keeps the
        # outflow part of the numerator nonnegative
        inflow = np.zeros_like(F)
        inflow[1:, self.pos] = F[:-1, self.pos]
        inflow[0, self.pos] = ghost_L[self.pos]
        inflow[:-1, self.neg] = F[1:, self.neg]
        inflow[-1, self.neg] = ghost_R[self.neg]
        a_out = np.abs(self.v1) / self.hx
        numer = (eps / dt - a_out) * F + a_out * inflow + gain / eps
        denom = (eps / dt) + nu_F / eps
        F_new = numer / denom
        if float(F_new.min()) < -1e-14:
            raise RuntimeError("positivity scheme produced a negative value")
        return KineticState(f=F_new, t=state.t + dt, eps=eps, mode="positivity",
                            residual_history=state.residual_history,
                            converged=True, diagnostics=state.diagnostics)

    # ----- bookkeeping ------------------------------------------------------

    def total_mass_fluctuation(self, f: np.ndarray) -> float:
        """Integral of f sqrt(mu) over cells x velocity."""
        return float(self.mesh.hx * np.sum(f @ (self.grid.weights * self.grid.sqrt_mu)))

    def total_mass_absolute(self, F: np.ndarray) -> float:
        return float(self.mesh.hx * np.sum(F @ self.grid.weights))


def build_Rs(solver: ChannelKinetics, parts: bool = False):
    """Forcing field of the steady problem (see ChannelKinetics.build_Rs)."""
    return solver.build_Rs_parts() if parts else solver.build_Rs()
