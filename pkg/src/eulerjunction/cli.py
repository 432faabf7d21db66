"""Command line entry point: ``eulerjunction <command> [options]``.

Commands write CSV (17 significant digits, ``\\n`` line endings) or JSON.
Every flag can also be set through an ``EJ_`` environment variable, e.g.
``EJ_KIND=L`` or ``EJ_GAMMA=1.4``; explicit flags win.

Exit codes: 0 success, 2 input or solver error, 3 perturbative guard hit.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .asymptotics import chi_closed, extract_interaction_series
from .coupling import CouplingKind, PiecewiseSection, SmoothSection, det_criterion
from .errors import AmplitudeOverflow, EulerJunctionError
from .junction import JUNCTION_TOL, chain_propagate, solve_junction_riemann, stationary_profile
from .thermo import GAMMA_DEFAULT, GasLaw, GasState, conserved_from_primitive, primitives, state_from_theta
from .waves import RIEMANN_TOL, solve_riemann

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_GUARD = 3


@dataclass(frozen=True)
class RunConfig:
    kind: CouplingKind = CouplingKind.SMOOTH
    gamma: float = GAMMA_DEFAULT
    rho_bar: float = 1.0
    e_bar: float = 1.0
    tol: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not (self.rho_bar > 0.0 and self.e_bar > 0.0):
            raise ValueError("reference scales must be positive")
        if self.tol is not None and not self.tol > 0.0:
            raise ValueError("tolerance must be positive")

    @property
    def law(self):
        return GasLaw(self.gamma)


def fmt(x):
    if x is None:
        return ""
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def parse_triplet(text, name):
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise ValueError(f"{name}: expected three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise ValueError(f"{name}: expected three comma-separated numbers, got {text!r}")
    return vals


def state_from_triplet(text, name, law):
    rho, v, e = parse_triplet(text, name)
    return conserved_from_primitive(rho, v, e, law)


def state_json(u: GasState, law):
    pr = primitives(u, law)
    return {"rho": u.rho, "v": pr.v, "e": pr.e, "p": pr.p, "theta": pr.theta}


# ---------------------------------------------------------------- commands


def cmd_chi_scan(cfg: RunConfig, theta_min, theta_max, samples, out, with_oracle=False):
    if not 0.0 < theta_min < theta_max < 1.0:
        raise ValueError("need 0 < theta-min < theta-max < 1")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rows = []
    for t in np.linspace(theta_min, theta_max, samples):
        t = float(t)
        try:
            chi = chi_closed(cfg.kind, t)
            fitted = resid = None
            if with_oracle:
                ser = extract_interaction_series(cfg.kind, t, cfg.law, cfg.rho_bar, cfg.e_bar)
                fitted, resid = ser.chi, ser.fit_residual_pair
            rows.append([fmt(t), fmt(chi), fmt(fitted), fmt(resid), ""])
        except EulerJunctionError as exc:
            rows.append([fmt(t), "", "", "", type(exc).__name__])
    write_csv(out, ["theta", "chi_closed", "chi_fitted", "fit_residual", "diagnostic"], rows)
    return EXIT_OK


def _growth_exponent(traj):
    """Least-squares slope of ``ln |sigma3|`` against the pair index."""
    traj = np.abs(np.asarray(traj, dtype=float))
    if traj.size < 2 or np.any(traj == 0.0):
        return math.nan
    k = np.arange(traj.size)
    return float(np.polyfit(k, np.log(traj), 1)[0])


def cmd_blowup(cfg: RunConfig, theta, sigma0, h, n_pairs, out, summary=None):
    if abs(h) > 0.2:
        raise ValueError("|h| must not exceed 0.2")
    if n_pairs < 1:
        raise ValueError("need at least one junction pair")
    u = state_from_theta(theta, cfg.law, cfg.rho_bar, cfg.e_bar)
    kw = {} if cfg.tol is None else {"tol": cfg.tol}
    code = EXIT_OK
    error = None
    try:
        res = chain_propagate(cfg.kind, u, sigma0 * cfg.rho_bar, 1.0, h, n_pairs, cfg.law, **kw)
        traj, ratios = res.trajectory, res.ratios
    except AmplitudeOverflow as exc:
        traj, ratios = exc.trajectory, exc.ratios
        code = EXIT_GUARD
        error = str(exc)
    try:
        predicted = 1.0 + chi_closed(cfg.kind, theta) * h * h
    except EulerJunctionError:
        predicted = math.nan
    if abs(cfg.gamma - GAMMA_DEFAULT) > 1e-14:
        predicted = math.nan
    rows = [[str(0), fmt(traj[0]), "", ""]]
    for i, r in enumerate(ratios, start=1):
        rows.append([str(i), fmt(traj[i]), fmt(r), fmt(predicted)])
    write_csv(out, ["pair_index", "sigma3", "ratio", "predicted_ratio"], rows)
    exponent = _growth_exponent(traj)
    info = {
        "kind": str(cfg.kind),
        "theta": theta,
        "h": h,
        "n_pairs": n_pairs,
        "pairs_completed": len(ratios),
        "growth_exponent": exponent,
        "predicted_exponent": math.log(predicted) if predicted > 0 else None,
        "cumulative_factor": float(traj[-1] / traj[0]) if traj[0] != 0 else None,
        "note": "only the outgoing 3-wave is followed from pair to pair; 1- and 2-waves are dropped",
        "overflow": error,
    }
    info = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in info.items()}
    if summary is None and out not in (None, "-"):
        summary = os.path.splitext(out)[0] + ".json"
    if summary is not None:
        emit_json(info, summary)
    return code


def cmd_junction_report(cfg: RunConfig, a_minus, a_plus, left, right, out=None):
    law = cfg.law
    uL = state_from_triplet(left, "left", law)
    uR = state_from_triplet(right, "right", law)
    fan = solve_junction_riemann(cfg.kind, a_minus, a_plus, uL, uR, law, tol=cfg.tol or JUNCTION_TOL)
    det = det_criterion(cfg.kind, a_minus, uL, law)
    report = {
        "kind": str(cfg.kind),
        "sigma": list(fan.sigma),
        "traces": {"left": state_json(fan.traceL, law), "right": state_json(fan.traceR, law)},
        "residual": fan.residual,
        "iterations": fan.iterations,
        "det_numeric": det.numeric,
        "det_analytic": det.analytic,
        "det_r": det.det_r,
        "det_relative_gap": det.relative_gap,
    }
    emit_json(report, out)
    return EXIT_OK


def cmd_riemann(cfg: RunConfig, left, right, out=None):
    law = cfg.law
    uL = state_from_triplet(left, "left", law)
    uR = state_from_triplet(right, "right", law)
    fan = solve_riemann(uL, uR, law, tol=cfg.tol or RIEMANN_TOL)
    report = {
        "sigma": list(fan.sigma),
        "star_left": state_json(fan.uStarL, law),
        "star_right": state_json(fan.uStarR, law),
        "residual": fan.residual,
        "iterations": fan.iterations,
    }
    emit_json(report, out)
    return EXIT_OK


def cmd_stationary(cfg: RunConfig, theta, a_start, a_end, pieces, shape, out, allow_large=False):
    if pieces < 1:
        raise ValueError("need at least one piece")
    law = cfg.law
    u0 = state_from_theta(theta, law, cfg.rho_bar, cfg.e_bar)
    smooth = SmoothSection(a_start, a_end, 1.0, shape)
    prof = PiecewiseSection.sample(smooth, pieces)
    res = stationary_profile(cfg.kind, prof, u0, law, allow_large=allow_large)
    rows = []
    for j, (a, u) in enumerate(zip(prof.sections, res.states)):
        pr = primitives(u, law)
        resid = "" if j == 0 else fmt(res.residuals[j - 1])
        rows.append([str(j), fmt(a), fmt(u.rho), fmt(u.q), fmt(u.E), fmt(pr.theta), resid])
    rows.append(["tv", fmt(prof.total_variation), fmt(res.tv), "", "", "", ""])
    write_csv(out, ["index", "a", "rho", "q", "E", "theta", "residual"], rows)
    return EXIT_OK


# ---------------------------------------------------------------- parsing


def _env(name, default):
    return os.environ.get("EJ_" + name.upper().replace("-", "_"), default)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kind", default=_env("kind", "S"), help="coupling condition: S, P, L or p")
    common.add_argument("--gamma", type=float, default=float(_env("gamma", GAMMA_DEFAULT)))
    common.add_argument("--rho-bar", type=float, default=float(_env("rho_bar", 1.0)))
    common.add_argument("--e-bar", type=float, default=float(_env("e_bar", 1.0)))
    tol = _env("tol", None)
    common.add_argument("--tol", type=float, default=float(tol) if tol is not None else None)
    common.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    common.add_argument("--out", default=_env("out", "-"), help="output file, '-' for standard output")

    parser = argparse.ArgumentParser(prog="eulerjunction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chi-scan", parents=[common], help="amplification coefficient over theta")
    p.add_argument("--theta-min", type=float, default=0.02)
    p.add_argument("--theta-max", type=float, default=0.98)
    p.add_argument("--samples", type=int, default=49)
    p.add_argument("--with-oracle", action="store_true", default=_env("with_oracle", "") not in ("", "0"))

    p = sub.add_parser("blowup", parents=[common], help="wave strength through repeated junction pairs")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--sigma0", type=float, default=1e-4, help="incoming strength in units of rho-bar")
    p.add_argument("--h", type=float, default=0.05, help="relative section increment")
    p.add_argument("--pairs", type=int, default=40)
    p.add_argument("--summary", default=None, help="summary JSON path (default: next to --out)")

    p = sub.add_parser("junction", parents=[common], help="Riemann problem at a junction")
    p.add_argument("--a-minus", type=float, required=True)
    p.add_argument("--a-plus", type=float, required=True)
    p.add_argument("--left", required=True, help="rho,v,e")
    p.add_argument("--right", required=True, help="rho,v,e")

    p = sub.add_parser("stationary", parents=[common], help="piecewise constant stationary solution")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--a-start", type=float, default=1.0)
    p.add_argument("--a-end", type=float, default=1.1)
    p.add_argument("--pieces", type=int, default=16)
    p.add_argument("--shape", choices=["linear", "cubic"], default="linear")
    p.add_argument("--allow-large", action="store_true")

    p = sub.add_parser("riemann", parents=[common], help="classical Riemann problem")
    p.add_argument("--left", required=True, help="rho,v,e")
    p.add_argument("--right", required=True, help="rho,v,e")
    return parser


def _config(args):
    return RunConfig(CouplingKind.parse(args.kind), args.gamma, args.rho_bar, args.e_bar, args.tol, args.seed)


def run(args):
    cfg = _config(args)
    if args.command == "chi-scan":
        return cmd_chi_scan(cfg, args.theta_min, args.theta_max, args.samples, args.out, args.with_oracle)
    if args.command == "blowup":
        return cmd_blowup(cfg, args.theta, args.sigma0, args.h, args.pairs, args.out, args.summary)
    if args.command == "junction":
        return cmd_junction_report(cfg, args.a_minus, args.a_plus, args.left, args.right, args.out)
    if args.command == "stationary":
        return cmd_stationary(
            cfg, args.theta, args.a_start, args.a_end, args.pieces, args.shape, args.out, args.allow_large
        )
    return cmd_riemann(cfg, args.left, args.right, args.out)


def _error_object(exc):
    obj = {"error": type(exc).__name__, "message": str(exc)}
    field = getattr(exc, "quantity", None)
    if field is not None:
        obj["field"] = field
    return obj


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return run(args)
    except AmplitudeOverflow as exc:
        emit_json(_error_object(exc), None)
        return EXIT_GUARD
    except (EulerJunctionError, ValueError, OSError) as exc:
        obj = _error_object(exc)
        if "field" not in obj and isinstance(exc, ValueError) and ":" in str(exc):
            obj["field"] = str(exc).split(":", 1)[0]
        emit_json(obj, None)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
