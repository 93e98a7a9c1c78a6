"""Command-line surface: sampling, verification, simulation, figure data.

Subcommands: list, sample, verify, ode-check, simulate, velocity, chain,
figures.  Grids and reports are deterministic: CSV cells use fixed
17-significant-digit scientific notation and repeated invocations produce
byte-identical files.  All outputs are written atomically (temp + rename)
and every run that writes files also writes a manifest listing them.

Wire formats: sampled grids are CSV with header ``x,t,u,defined`` (masked
cells carry ``nan`` and flag 0); checkpoint profiles are ``x,u``.  JSON
reports carry ``schema: 1``; equation objects serialize as
``{"variant": <EquationSpec class name>, "params": {<field>: <value>}}``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import FAMILIES, CatalogError, build_family, chain_constant, family_info, phi_chain
from .elliptic import MODULUS_INV_SQRT2, complete_elliptic_K
from .equations import spec_to_json
from .simulate import SimConfig, compare_exact, integrate
from .verify import (
    Grid2D,
    clean_chain_samples,
    ode_residual,
    pde_residual,
    proposition_suite,
)

SCHEMA = 1


def _fmt(v: float) -> str:
    return "%.17e" % v


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, payload: dict, outputs: list[Path]) -> None:
    payload = {"schema": SCHEMA, **payload}
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    outputs.append(path)


def _write_manifest(base: Path, command: str, parameters: dict, outputs: list[Path]) -> None:
    manifest = {
        "schema": SCHEMA,
        "command": command,
        "parameters": parameters,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": sorted(str(p) for p in outputs),
    }
    _atomic_write(base, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _grid_csv(x, t, u, defined) -> str:
    lines = ["x,t,u,defined"]
    X, T = np.broadcast_arrays(x, t)
    for xi, ti, ui, di in zip(X.ravel(), T.ravel(), u.ravel(), defined.ravel()):
        uval = _fmt(ui) if di else "nan"
        lines.append(f"{_fmt(xi)},{_fmt(ti)},{uval},{int(di)}")
    return "\n".join(lines) + "\n"


def _profile_csv(x, u) -> str:
    lines = ["x,u"]
    for xi, ui in zip(x, u):
        lines.append(f"{_fmt(xi)},{_fmt(ui)}")
    return "\n".join(lines) + "\n"


def _gnuplot_script(csv_path: Path, title: str) -> str:
    return (
        "set datafile separator ','\n"
        f"set title '{title}'\n"
        "set xlabel 'x'\nset ylabel 't'\nset zlabel 'u'\n"
        f"splot '{csv_path.name}' every ::1 using 1:2:3 with points pt 7 ps 0.3 notitle\n"
    )


def _parse_params(raw: str | None) -> dict:
    if not raw:
        return {}
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SystemExit(f"--params must be a JSON object: {exc}")
    if not isinstance(obj, dict):
        raise SystemExit("--params must be a JSON object")
    return obj


def _parse_grid(raw: str, sampler) -> Grid2D:
    if raw:
        parts = raw.split(",")
        if len(parts) != 6:
            raise SystemExit("--grid expects x0,x1,nx,t0,t1,nt")
        x0, x1, t0, t1 = float(parts[0]), float(parts[1]), float(parts[3]), float(parts[4])
        return Grid2D(x0, x1, int(parts[2]), t0, t1, int(parts[5]))
    if sampler.suggested_window is None:
        raise SystemExit("this family has no default window; pass --grid")
    x0, x1, t0, t1 = sampler.suggested_window
    nx, nt = sampler.suggested_resolution
    return Grid2D(x0, x1, nx, t0, t1, nt)


def _build(args) -> tuple:
    try:
        sampler = build_family(args.family, _parse_params(args.params))
    except (CatalogError, KeyError) as exc:
        raise SystemExit(f"cannot build family {args.family!r}: {exc}; "
                         f"valid families: {', '.join(sorted(FAMILIES))}")
    return sampler


def cmd_list(args) -> int:
    print(json.dumps({"schema": SCHEMA, "families": family_info()}, indent=2, sort_keys=True))
    return 0


def cmd_sample(args) -> int:
    sampler = _build(args)
    grid = _parse_grid(args.grid, sampler)
    X, T = np.meshgrid(grid.x, grid.t, indexing="ij")
    u, defined = sampler.sample(X, T)
    frac = float(defined.mean())
    if frac < 1.0:
        print(f"warning: defined fraction {frac:.4f} (masked region in the window)",
              file=sys.stderr)
    outputs: list[Path] = []
    out = Path(args.out)
    _atomic_write(out, _grid_csv(X, T, u, defined))
    outputs.append(out)
    if args.gnuplot:
        gp = out.with_suffix(".gp")
        _atomic_write(gp, _gnuplot_script(out, f"{args.family} {sampler.params}"))
        outputs.append(gp)
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "sample",
                    {"family": args.family, "params": sampler.params,
                     "grid": args.grid, "defined_fraction": frac}, outputs)
    print(f"wrote {out} ({u.size} samples, defined fraction {frac:.4f})")
    return 0


def cmd_verify(args) -> int:
    sampler = _build(args)
    grid = _parse_grid(args.grid, sampler)
    report = pde_residual(sampler, sampler.equation, grid, args.order)
    payload = {
        "family": args.family,
        "params": sampler.params,
        "equation": spec_to_json(sampler.equation),
        "residual_clean_expected": sampler.residual_clean,
        "grid": [grid.x_min, grid.x_max, grid.n_x, grid.t_min, grid.t_max, grid.n_t],
        "report": report.to_json(),
    }
    outputs: list[Path] = []
    if args.out:
        _write_json(Path(args.out), payload, outputs)
        _write_manifest(Path(args.out).with_suffix(".manifest.json"), "verify",
                        {"family": args.family, "params": sampler.params}, outputs)
    order = f"{report.order_estimate:.2f}" if report.order_estimate is not None else "n/a"
    print(f"{args.family}: max residual {report.max_abs:.3e}, l2 {report.l2:.3e}, "
          f"order {order}, defined {report.defined_fraction:.3f}")
    if not sampler.residual_clean:
        print("note: this variant is cataloged as failing verification "
              "(see its domain note)")
    ok = (report.order_estimate or 0.0) >= args.order - 0.5 and report.max_abs <= args.tol
    print("verdict:", "converges" if ok else "DOES NOT CONVERGE")
    return 0 if ok == sampler.residual_clean else 1


def cmd_ode_check(args) -> int:
    state = phi_chain(args.chain_index)
    y = clean_chain_samples(args.chain_index, args.samples)
    rep = ode_residual(state, y)
    print(f"chain element {args.chain_index}: C_estimate {rep.c_estimate:+.9f} "
          f"(expected {chain_constant(args.chain_index):+.9f}), "
          f"first-integral std {rep.first_integral_std:.2e}, "
          f"second-order residual {rep.second_order_max:.2e} on {rep.n_valid} samples")
    rows = proposition_suite(max_index=args.chain_index)
    for r in rows:
        print(f"  [{'pass' if r.passed else 'FAIL'}] index {r.index}: {r.proposition} "
              f"(max deviation {r.max_deviation:.2e})")
    payload = {
        "chain_index": args.chain_index,
        "ode_residual": rep.to_json(),
        "propositions": [r.to_json() for r in rows],
    }
    if args.out:
        outputs: list[Path] = []
        _write_json(Path(args.out), payload, outputs)
        _write_manifest(Path(args.out).with_suffix(".manifest.json"), "ode-check",
                        {"chain_index": args.chain_index}, outputs)
    return 0 if all(r.passed for r in rows) else 1


def cmd_simulate(args) -> int:
    sampler = _build(args)
    w = args.window.split(",")
    if len(w) != 3:
        raise SystemExit("--window expects x0,x1,nx")
    tspan = args.time.split(",")
    if len(tspan) != 2:
        raise SystemExit("--time expects t0,t1")
    cfg = SimConfig(float(w[0]), float(w[1]), int(w[2]), float(tspan[0]), float(tspan[1]),
                    safety=args.safety, space_order=args.space_order,
                    n_checkpoints=args.checkpoints)
    hist = integrate(sampler.equation, sampler, cfg)
    rep = compare_exact(hist, sampler, level=args.level,
                        registration=args.registration)
    outputs: list[Path] = []
    prefix = Path(args.out)
    for i, (t, u) in enumerate(zip(hist.times, hist.fields)):
        p = prefix.parent / f"{prefix.name}_ck{i}.csv"
        _atomic_write(p, _profile_csv(hist.x, u))
        outputs.append(p)
    report_path = prefix.parent / f"{prefix.name}_report.json"
    _write_json(report_path, {
        "family": args.family,
        "params": sampler.params,
        "config": {"x_min": cfg.x_min, "x_max": cfg.x_max, "n_x": cfg.n_x,
                   "t0": cfg.t0, "t1": cfg.t1, "safety": cfg.safety,
                   "space_order": cfg.space_order},
        "steps": hist.steps_taken,
        "report": rep.to_json(),
    }, outputs)
    _write_manifest(prefix.parent / f"{prefix.name}_manifest.json", "simulate",
                    {"family": args.family, "params": sampler.params}, outputs)
    print(f"simulated {hist.steps_taken} steps; max checkpoint error "
          f"{max(rep.max_abs_errors):.3e}; wrote {len(outputs)} files under {prefix}")
    return 0


def _velocity_setup(sampler, h: float):
    """Simulation window, duration and level for a front-speed measurement."""
    v = sampler.predicted_velocity
    if v is None:
        raise SystemExit("this family carries no predicted velocity")
    duration = min(3.0, max(0.5, 1.8 / max(abs(v), 0.6)))
    if sampler.family_id == "bell":
        x0 = max(0.0, v * duration) + 0.7
        return SimConfig(x0, x0 + 8.0, int(8.0 / h) + 1, 0.0, duration,
                         n_checkpoints=9), None, True
    # locate the mid-level crossing of the initial profile near the origin
    probe = np.linspace(-30.0, 30.0, 4001)
    u0, ok = sampler.sample(probe, 0.0)
    lo, hi = u0[ok][0], u0[ok][-1]
    level = 0.5 * (lo + hi)
    idx = np.where(np.sign(u0 - level)[:-1] * np.sign(u0 - level)[1:] < 0)[0]
    x_front = float(probe[idx[0]]) if idx.size else 0.0
    x0 = x_front - 7.0 - max(0.0, -v) * duration - 2.0
    x1 = x_front + 7.0 + max(0.0, v) * duration + 2.0
    return SimConfig(x0, x1, int((x1 - x0) / h) + 1, 0.0, duration,
                     n_checkpoints=9), float(level), False


def cmd_velocity(args) -> int:
    sampler = _build(args)
    cfg, level, registration = _velocity_setup(sampler, args.h)
    if args.level is not None:
        level = args.level
    hist = integrate(sampler.equation, sampler, cfg)
    rep = compare_exact(hist, sampler, level=level, registration=registration)
    predicted = sampler.predicted_velocity
    measured = rep.measured_velocity
    rel = abs(measured - predicted) / max(abs(predicted), 1e-30)
    print("family            predicted      measured       rel.err   r2")
    print(f"{args.family:16s} {predicted:+.6f}  {measured:+.6f}  {rel:8.2e}  "
          f"{rep.velocity_fit_r2:.6f}")
    if args.out:
        outputs: list[Path] = []
        _write_json(Path(args.out), {
            "family": args.family,
            "params": sampler.params,
            "predicted_velocity": predicted,
            "measured_velocity": measured,
            "relative_error": rel,
            "r2": rep.velocity_fit_r2,
            "method": rep.velocity_method,
        }, outputs)
        _write_manifest(Path(args.out).with_suffix(".manifest.json"), "velocity",
                        {"family": args.family, "params": sampler.params}, outputs)
    return 0 if rel <= 0.01 else 1


def cmd_chain(args) -> int:
    K = complete_elliptic_K(MODULUS_INV_SQRT2)
    y = np.linspace(1e-4, 2 * K - 1e-4, 200001)
    rows = []
    # poles of element n are the base sn = 0 points plus every zero of the
    # elements below it (each division by phi promotes zeros to poles)
    singular = [0.0, float(round(2 * K, 6))]
    print("index  C_n             zeros (one period)                 singular points")
    for n in range(args.depth + 1):
        phi, _, ok = phi_chain(n).eval(y)
        moderate = ok & (np.abs(phi) < 1e3)
        prod = np.where(moderate[:-1] & moderate[1:], phi[:-1] * phi[1:], 1.0)
        zeros = [float(round(y[i], 6)) for i in np.where(prod < 0)[0]]
        rows.append({"index": n, "c_n": chain_constant(n), "zeros": zeros,
                     "singular": sorted(singular)})
        print(f"{n:5d}  {chain_constant(n):+12.6f}   {str(zeros):34s} {sorted(singular)}")
        singular = sorted(set(singular) | set(zeros))
    if args.out:
        outputs: list[Path] = []
        _write_json(Path(args.out), {"depth": args.depth, "elements": rows}, outputs)
        _write_manifest(Path(args.out).with_suffix(".manifest.json"), "chain",
                        {"depth": args.depth}, outputs)
    return 0


# figure id -> (family, params, window x0,x1,t0,t1, grid nx,nt, caption)
FIGURES: dict[int, dict] = {
    1: {"family": "chain", "params": {"kind": "direct", "index": 0},
        "window": (-3.0, 3.0, 0.005, 200.0), "grid": (181, 201),
        "caption": "chain solution, index 0, long-time window"},
    2: {"family": "chain", "params": {"kind": "direct", "index": 1},
        "window": (-3.0, 3.0, 0.005, 200.0), "grid": (181, 201),
        "caption": "chain solution, index 1, long-time window"},
    3: {"family": "chain", "params": {"kind": "inverse", "index": 1},
        "window": (-3.0, 3.0, 0.005, 200.0), "grid": (181, 201),
        "caption": "inverse chain solution, index 1"},
    4: {"family": "chain", "params": {"kind": "focusing", "index": 0},
        "window": (-3.0, 3.0, 0.005, 200.0), "grid": (181, 201),
        "caption": "focusing-equation chain solution, index 0"},
    5: {"family": "chain", "params": {"kind": "focusing", "index": 2},
        "window": (-3.0, 3.0, 0.005, 200.0), "grid": (181, 201),
        "caption": "focusing-equation chain solution, index 2"},
    6: {"family": "fisher-weierstrass", "params": {"C": 1e2, "k_shift": 0.0},
        "window": (0.0, 10.0, -6.0, -2.0), "grid": (161, 129),
        "caption": "Weierstrass-family Fisher solution, C = 10^2"},
    7: {"family": "fisher-weierstrass", "params": {"C": 1e4, "k_shift": 0.0},
        "window": (0.0, 10.0, -6.0, -2.0), "grid": (161, 129),
        "caption": "Weierstrass-family Fisher solution, C = 10^4"},
    8: {"family": "fisher-weierstrass", "params": {"C": 1e6, "k_shift": 0.0},
        "window": (0.0, 10.0, -6.0, -2.0), "grid": (161, 129),
        "caption": "Weierstrass-family Fisher solution, C = 10^6"},
}


def figure_data(fig_id: int):
    """(sampler, X, T, u, defined, spec) for one registered figure."""
    if fig_id not in FIGURES:
        raise SystemExit(f"unknown figure id {fig_id}; valid: {sorted(FIGURES)}")
    spec = FIGURES[fig_id]
    sampler = build_family(spec["family"], spec["params"])
    x0, x1, t0, t1 = spec["window"]
    nx, nt = spec["grid"]
    X, T = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(t0, t1, nt), indexing="ij")
    u, defined = sampler.sample(X, T)
    return sampler, X, T, u, defined, spec


def figure_gate(fig_id: int) -> dict:
    """Finiteness/defined-fraction of the plot data plus a residual probe
    of the family on its clean verification window."""
    sampler, X, T, u, defined, spec = figure_data(fig_id)
    frac = float(defined.mean())
    finite = bool(np.all(np.isfinite(u[defined])))
    x0, x1, t0, t1 = sampler.suggested_window
    nx, nt = sampler.suggested_resolution
    probe = pde_residual(sampler, sampler.equation, Grid2D(x0, x1, nx, t0, t1, nt), 4)
    return {
        "figure": fig_id,
        "defined_fraction": frac,
        "finite": finite,
        "residual_order": probe.order_estimate,
        "residual_max": probe.max_abs,
    }


def cmd_figures(args) -> int:
    ids = [int(s) for s in args.id.split(",")] if args.id else sorted(FIGURES)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    all_ok = True
    for fig_id in ids:
        sampler, X, T, u, defined, spec = figure_data(fig_id)
        gate = figure_gate(fig_id)
        csv_path = outdir / f"figure{fig_id}.csv"
        _atomic_write(csv_path, _grid_csv(X, T, u, defined))
        outputs.append(csv_path)
        _write_json(outdir / f"figure{fig_id}.json",
                    {"caption": spec["caption"], **gate}, outputs)
        if args.gnuplot:
            gp = outdir / f"figure{fig_id}.gp"
            _atomic_write(gp, _gnuplot_script(csv_path, spec["caption"]))
            outputs.append(gp)
        ok = (gate["defined_fraction"] >= 0.9 and gate["finite"]
              and (gate["residual_order"] or 0.0) >= 3.5)
        all_ok &= ok
        print(f"figure {fig_id}: defined {gate['defined_fraction']:.4f}, "
              f"finite {gate['finite']}, residual order "
              f"{gate['residual_order']:.2f}, {'ok' if ok else 'GATE FAILED'}")
    _write_manifest(outdir / "figures_manifest.json", "figures",
                    {"ids": ids}, outputs)
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdwaves",
        description="Exact reaction-diffusion solution families with residual "
                    "verification and front-velocity measurement",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="enumerate solution families (JSON)")

    p = sub.add_parser("sample", help="sample a family onto a grid (CSV)")
    p.add_argument("--family", required=True)
    p.add_argument("--params", default=None, help="JSON object of family parameters")
    p.add_argument("--grid", default=None, help="x0,x1,nx,t0,t1,nt")
    p.add_argument("--out", required=True)
    p.add_argument("--gnuplot", action="store_true")

    p = sub.add_parser("verify", help="PDE residual with convergence order")
    p.add_argument("--family", required=True)
    p.add_argument("--params", default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--order", type=int, default=4, choices=(2, 4))
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None)

    p = sub.add_parser("ode-check", help="chain-element checks and the assertion suite")
    p.add_argument("--chain-index", type=int, default=3)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="method-of-lines run against the exact profile")
    p.add_argument("--family", required=True)
    p.add_argument("--params", default=None)
    p.add_argument("--window", required=True, help="x0,x1,nx")
    p.add_argument("--time", required=True, help="t0,t1")
    p.add_argument("--checkpoints", type=int, default=9)
    p.add_argument("--safety", type=float, default=0.9)
    p.add_argument("--space-order", type=int, default=4, choices=(2, 4))
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--registration", action="store_true")
    p.add_argument("--out", required=True, help="output prefix")

    p = sub.add_parser("velocity", help="measured vs predicted front velocity")
    p.add_argument("--family", required=True)
    p.add_argument("--params", default=None)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--out", default=None)

    p = sub.add_parser("chain", help="first-integral constants and pole inventory")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--out", default=None)

    p = sub.add_parser("figures", help="plot data for the catalog showcase figures")
    p.add_argument("--id", default=None, help="comma-separated figure ids (default all)")
    p.add_argument("--outdir", default="figures")
    p.add_argument("--gnuplot", action="store_true")
    return parser


_COMMANDS = {
    "list": cmd_list,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "ode-check": cmd_ode_check,
    "simulate": cmd_simulate,
    "velocity": cmd_velocity,
    "chain": cmd_chain,
    "figures": cmd_figures,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
