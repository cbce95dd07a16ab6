"""Command line front end: ``carnot <subcommand> FILE [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure. CSV goes to
stdout (or --out); summary lines start with ``#``.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import census as cen
from . import coarea, topology
from .core import genericity_scan, omega_matrix, skew_spectrum
from .endpoint import EndPoint, ExponentialControl, endpoint_ode, exponential_trajectory_control, \
    shoot, solve_multistart, trajectory
from .errors import CarnotError, NotCommuting, NumericalError, ValidationError
from .io import csv_text, fmt, read_forms, read_structure


@dataclass(frozen=True)
class RunConfig:
    tol_integer: float = 1e-9
    tol_endpoint: float = 1e-7
    grid: int = 1024
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if self.tol_integer <= 0 or self.tol_endpoint <= 0:
            raise ValidationError("tolerances must be positive")
        if self.grid < 256:
            raise ValidationError("grid must be >= 256")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")


def _reals(text: str | None, name: str) -> np.ndarray:
    if text is None:
        raise ValidationError(f"--{name} is required")
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise ValidationError(f"--{name} expects comma-separated reals, got {text!r}") from None


def _need(x, name):
    if x is None:
        raise ValidationError(f"--{name} is required")
    return x


class Output:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.parts: list = []

    def csv(self, header, rows):
        self.parts.append(csv_text(header, rows))

    def note(self, key, value):
        self.parts.append(f"# {key},{fmt(value)}\n")

    def flush(self):
        text = "".join(self.parts)
        if self.cfg.output_path:
            with open(self.cfg.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


# --- subcommands ---------------------------------------------------------

def cmd_validate(args, cfg, out):
    W = read_structure(args.file)
    rep = genericity_scan(W, seed=cfg.seed)
    out.csv(["key", "value"], [("d", W.d), ("l", W.l), ("min_gap", rep.min_gap),
                               ("min_alpha", rep.min_alpha),
                               ("integer_collisions", len(rep.integer_collisions)),
                               ("verdict", rep.verdict)])


def cmd_spectrum(args, cfg, out):
    W = read_structure(args.file)
    om = _reals(args.omega, "omega")
    sp = skew_spectrum(omega_matrix(W, om))
    head = ["plane", "alpha"] + [f"x_{k + 1}" for k in range(W.d)] + [f"y_{k + 1}" for k in range(W.d)]
    out.csv(head, [(i + 1, a, *X, *Y) for i, (a, (X, Y)) in enumerate(zip(sp.alphas, sp.frames))])
    out.note("kernel_dim", sp.kernel_dim)


def cmd_census(args, cfg, out):
    W = read_structure(args.file)
    p = _reals(args.p, "p")
    s = float(_need(args.s, "s"))
    rep = cen.census(W, p, s, cfg.grid, cfg.tol_integer)
    head = [f"omega_{k + 1}" for k in range(W.l)] + ["nu", "energy", "index", "resonances",
                                                        "betti_of_torus"]
    rows = [(*m.omega, m.nu, m.energy, m.index,
             ";".join(f"{i + 1}:{n}" for i, n in m.resonances), m.betti) for m in rep.manifolds]
    out.csv(head, rows)
    mb = cen.morse_bott_polynomial(rep)
    out.note("morse_bott", str(mb))
    out.note("morse_bott_at_1", mb(1))
    out.note("cone_constant", rep.cone_constant)


def cmd_betti(args, cfg, out):
    W = read_structure(args.file)
    p = _reals(args.p, "p")
    s = float(_need(args.s, "s"))
    prof = topology.index_profile_analytic(W, p, s, cfg.grid)
    bt = topology.betti_from_profile(prof)
    out.csv(["j", "b_j"], sorted(bt.betti.items()))
    out.note("total", bt.total)
    out.note("total_via_maxima", topology.total_betti_via_maxima(prof))


def cmd_tau(args, cfg, out):
    W = read_structure(args.file)
    p = _reals(args.p, "p")
    t = coarea.tau_numeric(W, p, max(cfg.grid, 512))
    curves = coarea.LambdaCurves(W, p)
    rows = curves.dump()
    m = rows.shape[1] - 2
    out.csv(["theta"] + [f"lambda_{k + 1}" for k in range(m)] + ["integrand"], rows)
    out.note("tau_numeric", t)
    try:
        out.note("tau_commuting", coarea.tau_commuting(W, p))
    except NotCommuting:
        pass


def cmd_shoot(args, cfg, out):
    W = read_structure(args.file)
    e = ExponentialControl(_reals(args.omega, "omega"), _reals(args.u0, "u0"))
    ep = shoot(W, e, check_tol=cfg.tol_endpoint)
    ode = endpoint_ode(W, exponential_trajectory_control(e, W))
    t, x, y = trajectory(W, exponential_trajectory_control(e, W), steps=1024)
    head = ["t"] + [f"x_{k + 1}" for k in range(W.d)] + [f"y_{k + 1}" for k in range(W.l)]
    out.csv(head, np.column_stack([t, x, y])[::16].tolist() + [[t[-1], *x[-1], *y[-1]]])
    out.note("endpoint", " ".join(fmt(v) for v in ep.vector()))
    out.note("ode_discrepancy", ep.distance(ode))


def cmd_solve(args, cfg, out):
    W = read_structure(args.file)
    p = _reals(args.p, "p")
    if p.shape[0] != W.l:
        raise ValidationError(f"--p needs {W.l} components")
    target = EndPoint(np.zeros(W.d), p)
    rng = np.random.default_rng(cfg.seed)
    # seeds on the census multipliers when available, else random
    inits = []
    if W.l in (1, 2) and args.s is not None:
        for m in cen.census(W, p, float(args.s), cfg.grid, cfg.tol_integer).manifolds:
            inits.append(ExponentialControl(m.omega, m.u0 + 1e-3 * rng.standard_normal(W.d)))
    while len(inits) < args.starts:
        inits.append(ExponentialControl(rng.standard_normal(W.l), rng.standard_normal(W.d)))
    sols = solve_multistart(W, target, inits, tol=min(cfg.tol_endpoint, 1e-9))
    head = [f"omega_{k + 1}" for k in range(W.l)] + [f"u0_{k + 1}" for k in range(W.d)] + \
           ["energy", "residual"]
    rows = []
    for e in sols:
        res = shoot(W, e, check_tol=cfg.tol_endpoint).distance(target)
        rows.append((*e.omega, *e.u0, np.pi * float(e.u0 @ e.u0), res))
    rows.sort(key=lambda r: r[-2])
    out.csv(head, rows)


def cmd_quadric(args, cfg, out):
    q1, q2 = read_forms(args.file)
    prof = topology.index_profile_finite(q1, q2, cfg.grid)
    bt = topology.betti_from_profile(prof)
    out.csv(["j", "b_j"], sorted(bt.betti.items()))
    out.note("total", bt.total)
    out.note("breakpoints", len(prof.breakpoints))
    if bt.flags:
        out.note("flags", ";".join(bt.flags))


COMMANDS = {"validate": cmd_validate, "spectrum": cmd_spectrum, "census": cmd_census,
            "betti": cmd_betti, "tau": cmd_tau, "shoot": cmd_shoot, "solve": cmd_solve,
            "quadric": cmd_quadric}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carnot", description="Geodesics and path-space topology "
                                 "for step-two Carnot groups")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("file", help="structure file (forms file for 'quadric')")
    ap.add_argument("--p", help="vertical target, comma-separated")
    ap.add_argument("--omega", help="covector, comma-separated")
    ap.add_argument("--u0", help="initial control, comma-separated")
    ap.add_argument("--s", type=float, help="energy bound")
    ap.add_argument("--smax", type=float, help="largest energy bound for sweeps")
    ap.add_argument("--grid", type=int, default=1024)
    ap.add_argument("--tol-integer", type=float, default=1e-9)
    ap.add_argument("--tol-endpoint", type=float, default=1e-7)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--starts", type=int, default=8, help="random starts for 'solve'")
    ap.add_argument("--out", help="write output here instead of stdout")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.s is None and args.smax is not None:
            args.s = args.smax
        cfg = RunConfig(args.tol_integer, args.tol_endpoint, args.grid, args.seed, args.out)
        out = Output(cfg)
        COMMANDS[args.command](args, cfg, out)
        out.flush()
        return 0
    except (NumericalError, np.linalg.LinAlgError) as exc:  # LinAlgError is a ValueError
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:  # ValidationError included
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CarnotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
