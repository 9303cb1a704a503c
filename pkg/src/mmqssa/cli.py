"""Command line entry point.

    mmqssa qualifiers --k0 2500 --eT 10 --k1 1 --k2 500 --km1 500
    mmqssa sweep-beta --budget 10000000 --out sweep.csv
    mmqssa simulate --config setA.json --network reduced --t-end 5
    mmqssa ode --config setA.json --kind sqssa --t-end 10
    mmqssa lna --config setA.json
    mmqssa project --config setA.json --tfpv pi1 --at 1000 500

Options come from ``--config`` (a JSON object; parameters either at the top
level or under ``"params"``) and are overridden by flags. Exit status: 0 on
success, 2 on usage errors, 3 on domain errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

from . import deterministic as det
from . import fenichel, lna, ssa
from .errors import DomainError, MMQSSAError
from .model import Parameters, Thresholds, classify_regime, derive, fixed_point
from .sweep import DEFAULT_BETAS, sweep_beta, sweep_csv

EXIT_USAGE = 2
EXIT_DOMAIN = 3

_PARAM_FLAGS = ("k0", "eT", "k1", "k2", "km1", "omega")


class UsageError(MMQSSAError):
    pass


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with parameters and options")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--quick", action="store_true", default=None, help="CI-sized budgets")
    for name in _PARAM_FLAGS:
        common.add_argument(f"--{name}", type=float)

    parser = argparse.ArgumentParser(prog="mmqssa", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qualifiers", parents=[common], help="dimensionless qualifiers and regime")
    for name in ("eps_ss", "alpha", "beta", "lambda"):
        p.add_argument(f"--th-{name.replace('_', '-')}", dest=f"th_{name}", type=float)

    p = sub.add_parser("sweep-beta", parents=[common], help="full vs reduced SSA over beta")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--budget", type=int, help="SSA events per network per point")
    p.add_argument("--workers", type=int)
    p.add_argument("--replicas", type=int, help="use the replica estimator with this many replicas")

    p = sub.add_parser("simulate", parents=[common], help="one SSA run or stationary moments")
    p.add_argument("--network", choices=["full", "reduced"])
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--max-events", dest="max_events", type=int)
    p.add_argument("--initial", type=int, nargs=2, metavar=("N_S", "N_C"))
    p.add_argument("--grid-dt", dest="grid_dt", type=float, help="sample on a regular grid")
    p.add_argument("--moments", action="store_true", default=None, help="emit MomentEstimate JSON")
    p.add_argument("--budget", type=int)
    p.add_argument("--replicas", type=int)

    p = sub.add_parser("ode", parents=[common], help="fixed-step RK4 integration")
    p.add_argument("--kind", choices=[k.value for k in det.VectorFieldKind])
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--s0", type=float)
    p.add_argument("--c0", type=float)
    p.add_argument("--with-p", dest="with_p", action="store_true", default=None)

    sub.add_parser("lna", parents=[common], help="closed-form and Lyapunov LNA variances")

    p = sub.add_parser("project", parents=[common], help="oblique projector on a critical manifold")
    p.add_argument("--tfpv", choices=[t.value for t in fenichel.TFPV])
    p.add_argument("--at", type=float, nargs="+", help="manifold coordinates (s, or c for reverse_closed)")
    p.add_argument("--delta", type=float)
    return parser


def _load_options(args: argparse.Namespace) -> dict[str, Any]:
    opts: dict[str, Any] = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        params = data.pop("params", None)
        if params is not None:
            if not isinstance(params, dict):
                raise UsageError("'params' must be a JSON object")
            data.update(params)
        opts.update(data)
    for key, value in vars(args).items():
        if key not in ("config", "command") and value is not None:
            opts[key] = value
    return opts


def _params(opts: dict[str, Any]) -> Parameters:
    if "omega" not in opts:
        opts = {**opts, "omega": 1.0}
    present = {k: opts[k] for k in _PARAM_FLAGS if k in opts}
    missing = [k for k in _PARAM_FLAGS if k not in present]
    if missing:
        raise UsageError(f"missing parameters: {', '.join(missing)}")
    return Parameters.from_dict(present)


def _emit(text: str, opts: dict[str, Any]) -> None:
    out = opts.get("out")
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_qualifiers(opts: dict[str, Any]) -> None:
    params = _params(opts)
    th = {k: opts[f"th_{k}"] for k in ("eps_ss", "alpha", "beta") if f"th_{k}" in opts}
    if "th_lambda" in opts:
        th["lam"] = opts["th_lambda"]
    th.update({("lam" if k == "lambda" else k): v for k, v in opts.get("thresholds", {}).items()})
    fixed_point(params)  # alpha >= 1 is a domain error here
    report = classify_regime(params, Thresholds(**th))
    d = derive(params)
    body = {
        "params": params.to_dict(),
        **report.to_dict(),
        "eps": d.eps,
        "K_M": d.K_M,
        "K_S": d.K_S,
        "v": d.v,
        "t_C": d.t_C,
        "t_S": d.t_S,
    }
    _emit(_dumps(body), opts)


def cmd_sweep_beta(opts: dict[str, Any]) -> None:
    quick = bool(opts.get("quick"))
    points = sweep_beta(
        opts.get("betas", DEFAULT_BETAS),
        budget=int(opts.get("budget", 10**6 if quick else 10**7)),
        seed=int(opts.get("seed", 0)),
        workers=int(opts.get("workers", 1)),
        replicas=opts.get("replicas"),
    )
    _emit(sweep_csv(points), opts)


def cmd_simulate(opts: dict[str, Any]) -> None:
    params = _params(opts)
    build = ssa.build_reduced_network if opts.get("network", "full") == "reduced" else ssa.build_full_network
    net = build(params)
    seed = int(opts.get("seed", 0))
    if opts.get("moments"):
        if opts.get("replicas"):
            est = ssa.ensemble_moments(net, int(opts["replicas"]), seed)
        else:
            budget = int(opts.get("budget", 10**6 if opts.get("quick") else 10**7))
            est = ssa.stationary_moments(net, budget, seed)
        _emit(_dumps(est.to_dict()), opts)
        return
    if "initial" in opts:
        n_s, n_c = opts["initial"]
        initial = ssa.CountState(n_s, n_c if net.label == "full" else 0, 0, net.E_T)
    elif derive(params).alpha < 1:
        initial = net.fixed_point_state()
    else:
        initial = ssa.CountState(0, 0, 0, net.E_T)
    if "t_end" not in opts:
        raise UsageError("simulate needs --t-end (or --moments)")
    traj = ssa.simulate(net, initial, float(opts["t_end"]), seed, max_events=opts.get("max_events"))
    grid = None
    if "grid_dt" in opts:
        n = int(math.floor(traj.t_end / opts["grid_dt"] + 1e-9))
        grid = [i * opts["grid_dt"] for i in range(n + 1)]
    _emit(traj.to_csv(grid=grid), opts)


def cmd_ode(opts: dict[str, Any]) -> None:
    params = _params(opts)
    kind = det.VectorFieldKind(opts.get("kind", "full_mass_action"))
    step = float(opts.get("step", derive(params).t_C / 10))
    if "t_end" not in opts:
        raise UsageError("ode needs --t-end")
    initial = det.State2(float(opts.get("s0", 0.0)), float(opts.get("c0", 0.0)))
    traj = det.integrate(kind, initial, float(opts["t_end"]), step, params)
    _emit(traj.to_csv(with_product=bool(opts.get("with_p"))), opts)


def cmd_lna(opts: dict[str, Any]) -> None:
    _emit(_dumps(lna.lna_result(_params(opts)).to_dict()), opts)


def cmd_project(opts: dict[str, Any]) -> None:
    params = _params(opts)
    fact = fenichel.factorization_for(opts.get("tfpv", "pi1"), params, delta=opts.get("delta"))
    coords = opts.get("at")
    if not coords:
        raise UsageError("project needs --at")
    rows = []
    for x in coords:
        z = fact.chart(float(x))
        data = fenichel.projector_at(fact, z)
        eig = data.nontrivial_eigenvalues
        rows.append(
            {
                "point": z.tolist(),
                "pi": data.pi_matrix.tolist(),
                "dfp": data.dfp.tolist(),
                "dfp_eigenvalues": [[float(e.real), float(e.imag)] for e in eig],
                "attracting": data.attracting,
                "reduced_field": (data.pi_matrix @ fact.G_eval(z)).tolist(),
            }
        )
    _emit(_dumps({"tfpv": fact.tfpv.value, "params": params.to_dict(), "points": rows}), opts)


_COMMANDS = {
    "qualifiers": cmd_qualifiers,
    "sweep-beta": cmd_sweep_beta,
    "simulate": cmd_simulate,
    "ode": cmd_ode,
    "lna": cmd_lna,
    "project": cmd_project,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _load_options(args)
        _COMMANDS[args.command](opts)
    except DomainError as exc:
        print(f"mmqssa {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (MMQSSAError, ValueError, TypeError) as exc:
        print(f"mmqssa {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
