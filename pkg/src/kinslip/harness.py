"""Run orchestration: configuration, the diffusive-limit epsilon sweep, the
invariant verification battery, and result serialization.

Everything here is deterministic: sampling uses seeded generators from the
config, and repeated runs with the same config produce byte-identical CSV and
JSON artifacts.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, asdict, fields

import numpy as np

from . import collision, geometry, insf, macro, solver, velocity, wall

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    # velocity grid
    n_per_axis: int = 12
    v_max: float = 6.0
    beta_prime: float = 0.01
    # omega rule
    n_polar: int = 4
    n_azimuth: int = 8
    # geometry / mesh
    H: float = 1.0
    disk_R: float = 1.0
    n_cells: int = 16
    # physics
    phi2: float = 0.1
    theta_w_profile: str = "opposite"
    theta_w_amplitude: float = 0.05
    # sweep
    eps_list: tuple = (0.1, 0.05, 0.025)
    alpha_rule: str = "fixed"  # fixed | proportional | zero
    alpha: float = 1.0
    lam: float = 1.0
    # solver
    cfl: float = 0.8
    transport_order: int = 2
    tol_picard: float = 1e-8
    tol_inner: float = 1e-8
    k_max: int = 200
    tau_mass: float = 1e-8
    gamma_refresh: int = 10
    max_inner_steps: int = 400_000
    # census
    census_eps: float = 0.01
    census_T0: float = 10.0
    census_samples: int = 1000
    census_v_cap: float = 5.0
    census_eta: float = 0.1
    census_seed: int = 1234
    # io
    out_dir: str = "out"
    cache_collision: bool = True
    workers: int = 1

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
            raise ValueError("eps list must be strictly decreasing")
        self.eps_list = eps
        for e in eps:
            a = self.alpha_for(e)
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"alpha rule gives {a} outside [0, 1] at eps={e}")

    def alpha_for(self, eps: float) -> float:
        if self.alpha_rule == "fixed":
            return self.alpha
        if self.alpha_rule == "proportional":
            return float(np.sqrt(2.0 * np.pi) * self.lam * eps)
        if self.alpha_rule == "zero":
            return 0.0
        raise ValueError(f"unknown alpha rule {self.alpha_rule!r}")

    def theta_w(self) -> dict:
        return wall.theta_w_profile(self.theta_w_profile, self.theta_w_amplitude)


_SECTIONS = {
    "grid": ("n_per_axis", "v_max", "beta_prime"),
    "collision": ("n_polar", "n_azimuth", "cache_collision"),
    "geometry": ("H", "disk_R"),
    "mesh": ("n_cells",),
    "physics": ("phi2", "theta_w_profile", "theta_w_amplitude"),
    "sweep": ("eps_list", "alpha_rule", "alpha", "lam"),
    "solver": ("cfl", "transport_order", "tol_picard", "tol_inner", "k_max",
               "tau_mass", "gamma_refresh", "max_inner_steps"),
    "census": ("census_eps", "census_T0", "census_samples", "census_v_cap",
               "census_eta", "census_seed"),
    "output": ("out_dir", "workers"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name == "eps_list":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    if name in ("theta_w_profile", "alpha_rule", "out_dir"):
        return raw
    if name == "cache_collision":
        return raw.lower() in ("1", "true", "yes", "on")
    if name in ("n_per_axis", "n_polar", "n_azimuth", "n_cells", "k_max",
                "transport_order", "gamma_refresh", "max_inner_steps",
                "census_samples", "census_seed", "workers"):
        return int(raw)
    return float(raw)


def load_config(path: str | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Config from an INI-style file plus `key=value` override strings."""
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ValueError(f"config file {path!r} not found")
        known = {name for names in _SECTIONS.values() for name in names}
        for section in parser.sections():
            for key, raw in parser.items(section):
                if key not in known:
                    raise ValueError(f"unknown config key {key!r} in [{section}]")
                values[key] = _coerce(key, raw)
    for ov in overrides or []:
        if "=" not in ov:
            raise ValueError(f"override {ov!r} is not key=value")
        key, raw = ov.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return RunConfig(**values)


# --------------------------------------------------------------------------
# shared builders


class Workspace:
    """Lazy construction of the grid / collision operators for one config."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._grid = None
        self._mats = None
        self._gamma = None
        self._proj = None

    @property
    def grid(self):
        if self._grid is None:
            self._grid = velocity.build_grid(self.cfg.n_per_axis, self.cfg.v_max,
                                             self.cfg.beta_prime)
        return self._grid

    @property
    def rule(self):
        return collision.SphereRule(self.cfg.n_polar, self.cfg.n_azimuth)

    @property
    def proj(self):
        if self._proj is None:
            self._proj = macro.Projector(self.grid)
        return self._proj

    @property
    def mats(self):
        if self._mats is None:
            cache = None
            if self.cfg.cache_collision:
                os.makedirs(self.cfg.out_dir, exist_ok=True)
                cache = os.path.join(
                    self.cfg.out_dir,
                    f"collision_{self.cfg.n_per_axis}_{self.cfg.v_max:g}_"
                    f"{self.rule.n_nodes}.npz")
            self._mats = collision.build_matrices(self.grid, self.rule,
                                                  cache_path=cache)
        return self._mats

    @property
    def gamma(self):
        if self._gamma is None:
            self._gamma = collision.GammaOperator(self.grid, self.rule, self.proj)
        return self._gamma

    def make_solver(self, eps: float, alpha: float) -> solver.ChannelKinetics:
        mesh = solver.SpatialMesh(n_cells=self.cfg.n_cells, H=self.cfg.H)
        wm = wall.build_wall_model(self.grid, alpha, eps, self.cfg.theta_w())
        return solver.ChannelKinetics(
            self.grid, mesh, self.mats, wm, self.gamma, eps,
            phi2=self.cfg.phi2, transport_order=self.cfg.transport_order,
            cfl=self.cfg.cfl, gamma_refresh=self.cfg.gamma_refresh)


# --------------------------------------------------------------------------
# boundary observables


def _wall_extrapolate(x: np.ndarray, q: np.ndarray, x_wall: float):
    """Quadratic extrapolation of cell values to the wall: (value, d/dx)."""
    xs, qs = x[:3], q[:3]
    if x_wall > 0:
        xs, qs = x[-3:], q[-3:]
    coef = np.polyfit(xs - x_wall, qs, 2)
    return float(coef[2]), float(coef[1])


def extract_boundary_observables(mesh: solver.SpatialMesh, mac: macro.MacroFields,
                                 sigma: float, kappa: float, lam: float,
                                 theta_w: dict) -> dict:
    """Wall-extrapolated tangential velocity and temperature with their slip
    and Robin defects (outward-normal derivatives by one-sided differences)."""
    out = {}
    for name, x_wall, sgn in (("left", -mesh.H, -1.0), ("right", mesh.H, 1.0)):
        b2, db2 = _wall_extrapolate(mesh.x, mac.b[:, 1], x_wall)
        c, dc = _wall_extrapolate(mesh.x, mac.c, x_wall)
        dn_b2 = sgn * db2
        dn_c = sgn * dc
        tw = theta_w[name]
        out[name] = {
            "b2_wall": b2,
            "c_wall": c,
            "temp_jump": c - tw,
            "slip_defect": sigma * dn_b2 + lam * b2,
            "robin_defect": kappa * dn_c + 0.8 * lam * (c - tw),
        }
    return out


# --------------------------------------------------------------------------
# sweep


def _profile_csv(path: str, x: np.ndarray, mac: macro.MacroFields) -> None:
    with open(path, "w") as fh:
        fh.write("x1,a,b1,b2,b3,c\n")
        for i in range(len(x)):
            fh.write(f"{x[i]:.17g},{mac.a[i]:.17g},{mac.b[i, 0]:.17g},"
                     f"{mac.b[i, 1]:.17g},{mac.b[i, 2]:.17g},{mac.c[i]:.17g}\n")


def _loglog_slope(eps: list, vals: list) -> float | None:
    pairs = [(e, v) for e, v in zip(eps, vals) if v is not None and v > 0]
    if len(pairs) < 2:
        return None
    le = np.log([p[0] for p in pairs])
    lv = np.log([p[1] for p in pairs])
    return float(np.polyfit(le, lv, 1)[0])


def run_sweep(cfg: RunConfig, ws: Workspace | None = None) -> dict:
    """Steady solves across the eps list under the configured accommodation
    rule, compared against the matching channel reference solution.

    Per-eps profile CSVs and a versioned summary JSON land in cfg.out_dir.
    Solver failures are recorded in the report and the sweep continues.
    """
    ws = ws or Workspace(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    coeffs = collision.transport_coefficients(ws.mats, ws.proj)
    theta_w = cfg.theta_w()
    regime = {"fixed": "dirichlet", "proportional": "navier",
              "zero": "perfect-slip"}[cfg.alpha_rule]
    lam_eff = cfg.lam if regime == "navier" else (np.inf if regime == "dirichlet" else 0.0)

    rows = []
    f_prev = None
    for eps in cfg.eps_list:
        alpha = cfg.alpha_for(eps)
        sk = ws.make_solver(eps, alpha)
        state = sk.solve_steady(tol_picard=cfg.tol_picard, k_max=cfg.k_max,
                                tol_inner=cfg.tol_inner,
                                max_inner_steps=cfg.max_inner_steps,
                                f_init=f_prev)
        row = {"eps": eps, "alpha": alpha, "converged": state.converged}
        if not state.converged:
            row["failure"] = state.diagnostics.get("failure", "unknown")
            rows.append(row)
            continue
        f_prev = state.f
        mesh = sk.mesh
        g_field = sk.fw + state.f
        mac = macro.extract_macro(ws.grid, mesh.x, g_field, ws.proj)
        obs = extract_boundary_observables(mesh, mac, coeffs.sigma, coeffs.kappa,
                                           cfg.lam, theta_w)
        res = macro.limit_residuals(mesh.x, mac)
        vol_w = np.full(mesh.n_cells, mesh.hx)
        perp_nu = macro.norm_nu(ws.grid, ws.mats.nu,
                                state.f - (state.f @ ws.proj.dual.T) @ ws.proj.chi,
                                vol_w)
        row.update({
            "picard_iterations": state.diagnostics.get("picard_iterations"),
            "b2_wall_abs": 0.5 * (abs(obs["left"]["b2_wall"])
                                  + abs(obs["right"]["b2_wall"])),
            "temp_jump_abs": 0.5 * (abs(obs["left"]["temp_jump"])
                                    + abs(obs["right"]["temp_jump"])),
            "slip_defect_abs": 0.5 * (abs(obs["left"]["slip_defect"])
                                      + abs(obs["right"]["slip_defect"])),
            "robin_defect_abs": 0.5 * (abs(obs["left"]["robin_defect"])
                                       + abs(obs["right"]["robin_defect"])),
            "boussinesq_residual": res["boussinesq_residual"],
            "div_residual": res["div_residual"],
            "perp_nu_over_eps": perp_nu / eps,
            "observables": obs,
        })
        if regime in ("dirichlet", "navier"):
            ref = insf.channel_reference(coeffs.sigma, coeffs.kappa, cfg.phi2,
                                         theta_w["left"], theta_w["right"],
                                         mesh.H, regime,
                                         cfg.lam if regime == "navier" else None)
            margin = max(3.0 * eps, 2.0 * mesh.hx)
            interior = np.abs(mesh.x) <= mesh.H - margin
            u_ref = ref.velocity(mesh.x)
            t_ref = ref.temperature(mesh.x)
            du = mac.b[interior, 1] - u_ref[interior]
            dth = mac.c[interior] - t_ref[interior]
            row["profile_error_u"] = float(
                np.sqrt(np.sum(du**2) / max(np.sum(u_ref[interior] ** 2), 1e-300)))
            row["profile_error_theta"] = float(
                np.sqrt(np.sum(dth**2) / max(np.sum(t_ref[interior] ** 2), 1e-300)))
        _profile_csv(os.path.join(cfg.out_dir, f"profile_eps{eps:g}.csv"),
                     mesh.x, mac)
        rows.append(row)

    eps_ok = [r["eps"] for r in rows if r.get("converged")]
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in asdict(cfg).items()},
        "transport_coefficients": {"sigma": coeffs.sigma, "kappa": coeffs.kappa},
        "regime": regime,
        "lambda": None if lam_eff in (np.inf,) else lam_eff,
        "rows": rows,
        "slopes": {
            key: _loglog_slope(eps_ok, [r.get(key) for r in rows if r.get("converged")])
            for key in ("b2_wall_abs", "temp_jump_abs", "slip_defect_abs",
                        "robin_defect_abs", "boussinesq_residual",
                        "perp_nu_over_eps")
        },
        "tolerances": collision.DEFAULT_TOLERANCES,
    }
    with open(os.path.join(cfg.out_dir, "sweep_summary.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


# --------------------------------------------------------------------------
# census and coefficients entry points


def run_census(cfg: RunConfig) -> dict:
    """Bounce census on the stretched disk: interior starts for the one-bounce
    claim and boundary starts for the zero-bounce claim."""
    base = geometry.Domain("disk", cfg.disk_R)
    stretched = geometry.stretch(base, cfg.census_eps)
    interior = geometry.sample_census_points(
        stretched, cfg.census_samples, cfg.census_v_cap, cfg.census_eta,
        cfg.census_seed, boundary_start=False)
    boundary = geometry.sample_census_points(
        stretched, cfg.census_samples, cfg.census_v_cap, cfg.census_eta,
        cfg.census_seed + 1, boundary_start=True)
    rep_int = geometry.bounce_census(stretched, cfg.census_eps, cfg.census_T0,
                                     interior)
    rep_bdy = geometry.bounce_census(stretched, cfg.census_eps, cfg.census_T0,
                                     boundary)
    report = {"interior": rep_int, "boundary_start": rep_bdy,
              "eta": cfg.census_eta, "v_cap": cfg.census_v_cap,
              "seed": cfg.census_seed}
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "census.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def run_coeffs(cfg: RunConfig, ws: Workspace | None = None) -> dict:
    ws = ws or Workspace(cfg)
    coeffs = collision.transport_coefficients(ws.mats, ws.proj)
    out = {"sigma": coeffs.sigma, "kappa": coeffs.kappa,
           "n_per_axis": cfg.n_per_axis, "v_max": cfg.v_max,
           "omega_nodes": ws.rule.n_nodes,
           "nu_bounds": ws.mats.nu_bounds(),
           "raw_asymmetry": ws.mats.raw_asymmetry,
           "raw_null_defect": ws.mats.raw_null_defect}
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "coefficients.json"), "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


# --------------------------------------------------------------------------
# verification battery


def run_verify(cfg: RunConfig, break_reflection: bool = False) -> tuple[dict, bool]:
    """Execute the cross-module invariant suite; returns (ledger, all_passed).

    `break_reflection` corrupts the wall reflection map before the boundary
    checks (fault-injection hook used by the tests to prove the suite can
    localize a failure).
    """
    ws = Workspace(cfg)
    grid = ws.grid
    tau_q = velocity.tau_q_for(cfg.n_per_axis)
    tol = collision.DEFAULT_TOLERANCES
    ledger = {}

    def record(name, passed, value, tolerance):
        ledger[name] = {"passed": bool(passed), "value": value, "tol": tolerance}

    # velocity-space identities
    v = grid.nodes
    mu = grid.mu
    v2 = np.sum(v * v, axis=1)
    checks = [
        (velocity.moment(grid, mu, v[:, 0] ** 2 * (v2 - 10.0)), -5.0),
        (velocity.moment(grid, mu, (v2 - 5.0) * v[:, 0] ** 2), 0.0),
        (velocity.moment(grid, mu, (v2 - 5.0) * 0.5 * (v2 - 3.0) * v[:, 0] ** 2), 5.0),
        (velocity.moment(grid, mu, v[:, 0] ** 2 * v[:, 1] ** 2), 1.0),
        (velocity.moment(grid, mu, v[:, 0] ** 4), 3.0),
        (velocity.moment(grid, mu, np.ones(grid.size)), 1.0),
    ]
    err = max(abs(got - want) for got, want in checks)
    record("gaussian_moments", err <= tau_q, err, tau_q)

    flux = velocity.half_flux(grid, mu, np.array([1.0, 0, 0]), +1)
    err = abs(np.sqrt(2 * np.pi) * flux - 1.0)
    err2 = abs(flux + velocity.half_flux(grid, mu, np.array([1.0, 0, 0]), -1))
    record("half_flux_identity", err <= tau_q and err2 <= tau_q,
           max(err, err2), tau_q)

    record("maxwellian_point",
           velocity.maxwellian(np.zeros(3)) == 1.0 / (2 * np.pi) ** 1.5, 0.0, 0.0)

    refl = grid.reflection_index(0)
    sym = np.max(np.abs(grid.nodes[refl] - grid.nodes * np.array([-1, 1, 1])))
    record("grid_symmetry", sym == 0.0, float(sym), 0.0)

    # collision operator
    mats = ws.mats
    proj = ws.proj
    chi = proj.chi
    null = float(np.max(np.abs(mats.apply_L_cells(chi)))) / float(np.max(mats.nu))
    record("L_null_space",
           null <= tol["tau_null"] and mats.raw_null_defect <= collision.MAX_RAW_NULL_DEFECT,
           {"production": null, "raw": mats.raw_null_defect}, tol["tau_null"])

    ksym = float(np.max(np.abs(mats.K - mats.K.T))) / float(np.max(np.abs(mats.K)))
    record("K_symmetry", ksym <= tol["tau_K"]
           and mats.raw_asymmetry <= collision.MAX_RAW_ASYMMETRY,
           {"production": ksym, "raw": mats.raw_asymmetry}, tol["tau_K"])

    c1, c2 = mats.nu_bounds()
    record("nu_bounds", 0 < c1 <= c2, {"c1": c1, "c2": c2}, None)

    rng = np.random.default_rng(2024)
    worst = np.inf
    ok = True
    for _ in range(200):
        f = rng.standard_normal(grid.size)
        f_perp = proj.complement(f)
        if np.sqrt(np.sum(grid.weights * mats.nu * f_perp**2)) < tol["tau_null"]:
            continue
        quad = float(np.sum(grid.weights * f * mats.apply_L(f)))
        worst = min(worst, quad)
        ok = ok and quad > 0
    record("L_semi_positivity", ok, worst, 0.0)

    # Q conservation on Maxwellian-class random data
    q_mom = 0.0
    basis = [np.ones(grid.size), v[:, 0], v[:, 1], v[:, 2], v2]
    for trial in range(5):
        F = mu * (1.0 + 0.5 * rng.random(grid.size))
        QF = collision.q_full(grid, F, F, ws.rule)
        scale = float(np.sum(grid.weights * collision.collision_frequency(grid, F) * F))
        q_mom = max(q_mom, max(abs(velocity.moment(grid, QF, p)) / scale
                               for p in basis))
    record("Q_conservation", q_mom <= tol["tau_Q"], q_mom, tol["tau_Q"])

    Qmu = collision.q_full(grid, mu, mu, ws.rule)
    scale = float(np.max(mats.nu * mu))
    qeq = float(np.max(np.abs(Qmu))) / scale
    record("Q_equilibrium", qeq <= tol["tau_Q"], qeq, tol["tau_Q"])

    # boundary condition battery
    eps0 = 0.1
    wm = wall.build_wall_model(grid, 0.3, eps0, cfg.theta_w())
    if break_reflection:
        for face in wm.faces.values():
            face.reflect_idx = np.roll(face.reflect_idx, 1)
    worst = 0.0
    for a in (0.0, 0.3, 1.0):
        wma = wall.build_wall_model(grid, a, eps0, cfg.theta_w())
        if break_reflection:
            for face in wma.faces.values():
                face.reflect_idx = np.roll(face.reflect_idx, 1)
        for trial in range(4):
            F = mu * (1.0 + 0.5 * rng.random(grid.size))
            worst = max(worst, wall.bc_mass_flux_defect(wma, "right", F))
    record("bc_flux_conservation", worst <= tau_q, worst, tau_q)

    f_out = grid.sqrt_mu * (1.0 + 0.3 * rng.random(grid.size))
    pg = wall.apply_P_gamma(wm, "right", f_out)
    pg2 = wall.apply_P_gamma(wm, "right", pg)
    idem = float(np.max(np.abs(pg2 - pg))) / max(float(np.max(np.abs(pg))), 1e-300)
    record("pgamma_idempotent", idem <= tau_q, idem, tau_q)

    face = wm.face("right")
    q1 = wall.apply_Q1(wm, "right", f_out, eps0)
    nullity = abs(float(np.sum((grid.sqrt_mu * q1 * face.flux_w)[face.in_mask])))
    record("q1_flux_nullity", nullity <= tau_q, nullity, tau_q)

    mean_theta = 0.0
    phi_e = wall.phi_eps_face(wm, "right", eps0,
                              -wm.face("right").theta_w + mean_theta)
    q2v = wall.apply_Q2(wm, "right", phi_e, eps0)
    nullity2 = abs(float(np.sum((grid.sqrt_mu * q2v * face.flux_w)[face.in_mask])))
    record("q2_flux_nullity", nullity2 <= tau_q, nullity2, tau_q)

    eps_seq = (0.2, 0.1, 0.05)
    resids = []
    for e in eps_seq:
        wme = wall.build_wall_model(grid, 1.0, e, {"left": 0.1, "right": 0.1})
        resids.append(wall.expand_wall_maxwellian(wme, "right", e)["residual"])
    slope = float(np.polyfit(np.log(eps_seq), np.log(resids), 1)[0])
    record("mw_expansion_order", abs(slope - 2.0) <= 0.2, slope, "2 +- 0.2")

    # trajectory battery (reduced sample count; the acceptance suite runs 10^3)
    base = geometry.Domain("disk", cfg.disk_R)
    st = geometry.stretch(base, cfg.census_eps)
    pts = geometry.sample_census_points(st, 200, cfg.census_v_cap,
                                        cfg.census_eta, cfg.census_seed)
    rep = geometry.bounce_census(st, cfg.census_eps, cfg.census_T0, pts)
    bpts = geometry.sample_census_points(st, 200, cfg.census_v_cap,
                                         cfg.census_eta, cfg.census_seed + 1,
                                         boundary_start=True)
    rep_b = geometry.bounce_census(st, cfg.census_eps, cfg.census_T0, bpts)
    ok = (rep["max_bounces"] <= 1
          and (rep["lemma_margin"] is None or rep["lemma_margin"] >= 1.0)
          and rep_b["max_bounces"] == 0)
    record("bounce_census", ok,
           {"interior_max_bounces": rep["max_bounces"],
            "lemma_margin": rep["lemma_margin"],
            "boundary_max_bounces": rep_b["max_bounces"]}, None)

    det = geometry.flight_jacobian(st, cfg.census_eps, None, t=1.0,
                                   y=np.zeros(3), v=np.array([1.0, 0.3, 0.2]),
                                   s=0.8, tau=0.3)
    jerr = abs(det - (0.3 - 0.8) ** 3) / abs(0.3 - 0.8) ** 3
    record("flight_jacobian", jerr <= 1e-6, jerr, 1e-6)

    f = rng.standard_normal(grid.size)
    pf = proj.apply(f)
    ppf = proj.apply(pf)
    ierr = float(np.max(np.abs(ppf - pf))) / max(float(np.max(np.abs(pf))), 1e-300)
    record("projection_idempotent", ierr <= 1e-12, ierr, 1e-12)

    # short solver runs
    mesh = solver.SpatialMesh(n_cells=cfg.n_cells, H=cfg.H)
    wm1 = wall.build_wall_model(grid, 0.5, eps0, cfg.theta_w())
    sk = solver.ChannelKinetics(grid, mesh, mats, wm1, ws.gamma, eps0,
                                phi2=cfg.phi2, transport_order=cfg.transport_order,
                                cfl=cfg.cfl, gamma_refresh=cfg.gamma_refresh)
    F0 = np.tile(mu, (mesh.n_cells, 1)) * (1.0 + 0.5 * rng.random((mesh.n_cells, grid.size)))
    st_pos = solver.KineticState(f=F0, t=0.0, eps=eps0, mode="positivity")
    minF = np.inf
    for _ in range(20):
        st_pos = sk.step_positivity_absolute(st_pos, 0.9 * sk.dt_max)
        minF = min(minF, float(st_pos.f.min()))
    record("positivity_preservation", minF >= 0.0, minF, 0.0)

    f0 = 0.01 * rng.standard_normal((mesh.n_cells, grid.size))
    st_f = solver.KineticState(f=f0, t=0.0, eps=eps0, mode="unsteady")
    m0 = sk.total_mass_fluctuation(st_f.f)
    drift = 0.0
    for _ in range(50):
        prev = sk.total_mass_fluctuation(st_f.f)
        st_f = sk.step_unsteady(st_f, 0.9 * sk.dt_max)
        drift = max(drift, abs(sk.total_mass_fluctuation(st_f.f) - prev))
    record("mass_conservation", drift <= cfg.tau_mass, drift, cfg.tau_mass)

    all_ok = all(entry["passed"] for entry in ledger.values())
    return ledger, all_ok
