"""Command-line interface.

Subcommands: verify, steady, unsteady, sweep, census, coeffs.  Configuration
comes from an INI file (--config) with --set key=value overrides; artifacts
land in --out (overrides the configured output directory).  Exit codes:
0 success, 1 check or solver failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness, macro, solver


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kinslip",
                                description="Discrete-velocity kinetic channel "
                                            "solver and diffusive-limit harness")
    p.add_argument("--config", help="INI config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value (repeatable)")
    p.add_argument("--out", help="output directory (overrides config)")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", help="run the invariant verification battery")
    st = sub.add_parser("steady", help="solve one steady case")
    st.add_argument("--eps", type=float, default=0.1)
    un = sub.add_parser("unsteady", help="march the perturbation equation")
    un.add_argument("--eps", type=float, default=0.1)
    un.add_argument("--steps", type=int, default=200)
    sub.add_parser("sweep", help="epsilon sweep against the channel reference")
    sub.add_parser("census", help="stretched-domain bounce census")
    sub.add_parser("coeffs", help="transport coefficients from the L brackets")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = harness.load_config(args.config, args.set)
        if args.out:
            cfg.out_dir = args.out
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "verify":
        ledger, ok = harness.run_verify(cfg)
        os.makedirs(cfg.out_dir, exist_ok=True)
        path = os.path.join(cfg.out_dir, "verify_ledger.json")
        with open(path, "w") as fh:
            json.dump(ledger, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        for name, entry in ledger.items():
            print(f"{'PASS' if entry['passed'] else 'FAIL'}  {name}")
        if not ok:
            failed = [n for n, e in ledger.items() if not e["passed"]]
            print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
            return 1
        return 0

    if args.command == "coeffs":
        out = harness.run_coeffs(cfg)
        print(json.dumps(out, indent=2, sort_keys=True))
        return 0

    if args.command == "census":
        report = harness.run_census(cfg)
        print(json.dumps(report, indent=2, sort_keys=True))
        inier = report["interior"]
        ok = inier["max_bounces"] <= 1 and report["boundary_start"]["max_bounces"] == 0
        return 0 if ok else 1

    if args.command == "sweep":
        report = harness.run_sweep(cfg)
        ok = all(r.get("converged") for r in report["rows"]) or \
            cfg.alpha_rule == "zero"
        print(f"sweep written to {cfg.out_dir}/sweep_summary.json")
        return 0 if ok else 1

    ws = harness.Workspace(cfg)
    if args.command == "steady":
        sk = ws.make_solver(args.eps, cfg.alpha_for(args.eps))
        state = sk.solve_steady(tol_picard=cfg.tol_picard, k_max=cfg.k_max,
                                tol_inner=cfg.tol_inner,
                                max_inner_steps=cfg.max_inner_steps)
        os.makedirs(cfg.out_dir, exist_ok=True)
        mac = macro.extract_macro(ws.grid, sk.mesh.x, sk.fw + state.f, ws.proj)
        harness._profile_csv(os.path.join(cfg.out_dir, "steady_profile.csv"),
                             sk.mesh.x, mac)
        print(json.dumps({"converged": state.converged,
                          "diagnostics": state.diagnostics}, sort_keys=True))
        return 0 if state.converged else 1

    if args.command == "unsteady":
        sk = ws.make_solver(args.eps, cfg.alpha_for(args.eps))
        state = solver.KineticState(
            f=np.zeros((sk.mesh.n_cells, ws.grid.size)), t=0.0,
            eps=args.eps, mode="unsteady")
        trace = macro.DiagnosticsTrace()
        vol_w = np.full(sk.mesh.n_cells, sk.mesh.hx)
        os.makedirs(cfg.out_dir, exist_ok=True)
        rows = []
        dt = 0.9 * sk.dt_max
        for step in range(args.steps):
            state = sk.step_unsteady(state, dt)
            f_perp = state.f - (state.f @ ws.proj.dual.T) @ ws.proj.chi
            rows.append(trace.record(state.t, {
                "L2": macro.norm_L2(ws.grid, state.f, vol_w),
                "P_L2": macro.norm_L2(ws.grid, state.f - f_perp, vol_w),
                "Iperp_nu": macro.norm_nu(ws.grid, ws.mats.nu, f_perp, vol_w),
                "w_inf": macro.norm_w_inf(ws.grid, state.f),
                "mass": sk.total_mass_fluctuation(state.f),
                "eps": args.eps, "alpha": sk.wall.alpha,
            }))
        with open(os.path.join(cfg.out_dir, "unsteady_trace.csv"), "w") as fh:
            keys = sorted(rows[0].keys())
            fh.write(",".join(keys) + "\n")
            for row in rows:
                fh.write(",".join(f"{row[k]:.17g}" for k in keys) + "\n")
        print(f"unsteady trace written ({args.steps} steps)")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
