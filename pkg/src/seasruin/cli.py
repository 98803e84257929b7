"""Command-line front end: model files in, CSV/JSON tables out."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .boundary import build_system, probe_conjecture, solve_boundary
from .distributions import from_spec, to_spec
from .errors import ParseError, SeasruinError, ValidationError
from .genfun import XiFunction
from .model import RiskModel, net_profit_margin
from .montecarlo import RNG_ID, SimConfig, estimate_survival, trajectory
from .roots import characteristic_roots
from .survival import classify_regime, finite_survival, ultimate_survival
from ._kernels import BACKEND

__all__ = ["parse_model", "emit_model", "run", "main"]

MODEL_FIELDS = {"kappa", "seasons", "name", "description"}


def parse_model(text: str) -> RiskModel:
    """Parse a UTF-8 JSON model file into a validated RiskModel."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("model file must be a JSON object")
    unknown = set(doc) - MODEL_FIELDS
    if unknown:
        raise ValidationError(f"unknown model fields: {sorted(unknown)}")
    if "kappa" not in doc or "seasons" not in doc:
        raise ValidationError("model file needs 'kappa' and 'seasons'")
    kappa = doc["kappa"]
    if not isinstance(kappa, int) or isinstance(kappa, bool):
        raise ValidationError("'kappa' must be an integer")
    if not isinstance(doc["seasons"], list) or not doc["seasons"]:
        raise ValidationError("'seasons' must be a non-empty array")
    seasons = []
    for idx, spec in enumerate(doc["seasons"]):
        try:
            seasons.append(from_spec(spec))
        except ValidationError as exc:
            raise ValidationError(f"seasons[{idx}]: {exc}") from exc
    return RiskModel(kappa=kappa, seasons=tuple(seasons))


def emit_model(model: RiskModel, name: str | None = None) -> str:
    doc = {"kappa": model.kappa, "seasons": [to_spec(d) for d in model.seasons]}
    if name:
        doc["name"] = name
    return json.dumps(doc, indent=2)


def _load_model(path: str) -> RiskModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_model(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc


def _fmt(value, digits):
    return f"{value:.{digits}g}"


def _emit_table(out, header, rows, fmt, digits):
    if fmt == "json":
        body = [
            {h: (v if isinstance(v, (str, int)) else float(v)) for h, v in zip(header, row)}
            for row in rows
        ]
        out.write(json.dumps(body, indent=2) + "\n")
        return
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(
            ",".join(v if isinstance(v, str) else _fmt(v, digits) for v in row) + "\n"
        )


# -- subcommands ---------------------------------------------------------------

def _cmd_check(args, out):
    model = _load_model(args.model)
    regime = classify_regime(model)
    es = model.cycle_mean()
    digits = args.precision
    out.write(
        f"{regime.value}, E S_N={_fmt(es, digits)}, "
        f"κN={model.period_degree}, margin={_fmt(net_profit_margin(model), digits)}\n"
    )
    return 0


def _cmd_roots(args, out):
    model = _load_model(args.model)
    rootset = characteristic_roots(model)
    rows = []
    for r in rootset.roots:
        flags = ";".join(
            name for name, on in (("origin", r.at_origin), ("unit-band", r.on_unit_band)) if on
        )
        rows.append((r.value.real, r.value.imag, r.multiplicity, r.residual or 0.0, flags))
    _emit_table(out, ["re", "im", "multiplicity", "residual", "flags"], rows,
                args.format, args.precision)
    return 0


def _cmd_boundary(args, out):
    model = _load_model(args.model)
    rootset = characteristic_roots(model)
    system = build_system(model, rootset)
    masses = solve_boundary(model, rootset)
    rows = [
        (j + 1, i, masses.m[j, i])
        for j in range(model.n_seasons)
        for i in range(model.kappa)
    ]
    _emit_table(out, ["season", "i", "mass"], rows, args.format, args.precision)
    # residual diagnostics on stderr so stdout stays machine-readable
    sol = np.array([masses.m[j - 1, i] for j, i in system.column_map])
    residuals = system.matrix @ sol - system.rhs
    for tag, res in zip(system.row_tags, residuals):
        print(f"# {tag}: residual {abs(res):.3e}", file=sys.stderr)
    return 0


def _cmd_survive(args, out):
    model = _load_model(args.model)
    if args.horizon is None:
        table = ultimate_survival(model, args.u_max)
        rows = [(u, table[u]) for u in range(args.u_max + 1)]
        _emit_table(out, ["u", "phi"], rows, args.format, args.precision)
        return 0
    finite = finite_survival(model, args.u_max, args.horizon)
    header = ["T"] + [f"u={u}" for u in range(args.u_max + 1)]
    rows = [
        [str(t)] + [finite.at(u, t) for u in range(args.u_max + 1)]
        for t in range(1, args.horizon + 1)
    ]
    ultimate = ultimate_survival(model, args.u_max)
    rows.append(["inf"] + [ultimate[u] for u in range(args.u_max + 1)])
    _emit_table(out, header, rows, args.format, args.precision)
    return 0


def _cmd_genfun(args, out):
    model = _load_model(args.model)
    xi = XiFunction(model)
    if args.eval is not None:
        try:
            re, im = (float(p) for p in args.eval.split(","))
        except ValueError as exc:
            raise ValidationError("--eval expects RE,IM") from exc
        val = xi.eval(complex(re, im))
        _emit_table(out, ["s_re", "s_im", "xi_re", "xi_im"],
                    [(re, im, val.real, val.imag)], args.format, args.precision)
    else:
        coeffs = xi.series(args.series)
        rows = [(n, c) for n, c in enumerate(coeffs)]
        _emit_table(out, ["n", "phi_n_plus_1"], rows, args.format, args.precision)
    return 0


def _cmd_simulate(args, out):
    model = _load_model(args.model)
    horizon = args.horizon if args.horizon is not None else 100 * model.n_seasons
    cfg = SimConfig(paths=args.paths, horizon=horizon, seed=args.seed, u=args.u)
    est = estimate_survival(model, cfg)
    out.write(json.dumps({
        "p_hat": est.p_hat,
        "half_width_95": est.half_width_95,
        "paths": est.paths,
        "horizon": horizon,
        "u": args.u,
        "seed": args.seed,
        "rng": RNG_ID,
        "backend": BACKEND,
    }, indent=2) + "\n")
    return 0


def _cmd_trajectory(args, out):
    model = _load_model(args.model)
    path = trajectory(model, args.u, args.n, args.seed)
    rows = [(int(n), int(claim), wealth) for n, claim, wealth in path]
    _emit_table(out, ["n", "claim", "wealth"], rows, args.format, args.precision)
    return 0


def _cmd_probe(args, out):
    report = probe_conjecture(args.kappa_max, args.n_max, args.trials, args.seed)
    out.write(json.dumps(report, indent=2) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seasruin",
        description="Survival probabilities for the N-seasonal discrete-time risk model",
    )
    parser.add_argument("--version", action="version", version=f"seasruin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", required=True, help="path to a JSON model file")
        p.add_argument("--precision", type=int, default=6,
                       help="significant digits in numeric output")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("check", help="regime, E S_N, kappa*N and margin")
    common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("roots", help="characteristic roots in the unit disk")
    common(p)
    p.set_defaults(func=_cmd_roots)

    p = sub.add_parser("boundary", help="boundary masses m_i^(j)")
    common(p)
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("survive", help="ultimate or finite-time survival table")
    common(p)
    p.add_argument("--u-max", type=int, required=True)
    p.add_argument("--horizon", type=int, default=None,
                   help="finite horizon in periods; omit for ultimate time")
    p.set_defaults(func=_cmd_survive)

    p = sub.add_parser("genfun", help="evaluate Xi(s) or extract its series")
    common(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--eval", metavar="RE,IM", default=None,
                      help="evaluate at RE+IM*i (write --eval=RE,IM when RE < 0)")
    mode.add_argument("--series", type=int, default=None, metavar="N")
    p.set_defaults(func=_cmd_genfun)

    p = sub.add_parser("simulate", help="Monte Carlo survival estimate")
    common(p)
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--horizon", type=int, default=None,
                   help="periods to simulate (default 100*N)")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("trajectory", help="dump one simulated path")
    common(p)
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--n", type=int, default=20, help="periods to simulate")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_trajectory)

    p = sub.add_parser("probe-conjecture", help="randomized non-singularity probe")
    common(p, model=False)
    p.add_argument("--kappa-max", type=int, default=3)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_probe)
    return parser


def run(argv, out=None) -> int:
    """Dispatch a command line; returns the exit code (0 ok, 1 domain, 2 usage)."""
    out = out if out is not None else sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args, out)
    except SeasruinError as exc:
        print(f"seasruin: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
