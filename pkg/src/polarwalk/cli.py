"""``polarwalk`` command line.

Every flag mirrors a key of the JSON run configuration; flags given on the
command line override values read from ``--config``.

Exit codes: 0 success, 2 configuration error, 3 numerical check failed,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .harness import (
    ConfigError,
    RunConfig,
    ToleranceError,
    run_convergence,
    run_evolve,
    run_geometry_verify,
    run_landau_check,
    run_momentum_audit,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3
EXIT_IO = 4


def _int_list(text: str):
    return [int(x) for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--n-theta", dest="n_theta", type=int)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--n-r", dest="n_r", type=int)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--tau", choices=["eps", "2eps"])
    p.add_argument("--potential-time", dest="potential_time", choices=["pre", "post"])
    p.add_argument("--no-plot", dest="plot", action="store_const", const=False)
    p.add_argument("-v", "--verbose", action="store_true")


def _add_walk(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mass", type=float)
    p.add_argument("--boundary", choices=["periodic", "absorbing-zero"])
    p.add_argument("--steps", type=int)
    p.add_argument("--potential", dest="potential_preset",
                   choices=["none", "uniform-b", "angular-ripple"])
    p.add_argument("--potential-table", dest="potential_table", help="CSV j,h,A_t,A_r,A_theta")
    p.add_argument("--beta", type=float, help="Bq for the uniform-b preset")
    p.add_argument("--initial", dest="initial_kind",
                   choices=["random", "mode-packet", "landau", "dump"])
    p.add_argument("--initial-dump", dest="initial_dump")
    p.add_argument("--seed", type=int)


def _add_landau(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", dest="landau_n", type=int)
    p.add_argument("--alpha", dest="landau_alpha", type=int)
    p.add_argument("--bq", dest="landau_beta", type=float)
    p.add_argument("--landau-mass", dest="landau_mass", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarwalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run the walk and dump fields plus an audit CSV")
    _add_common(p)
    _add_walk(p)
    _add_landau(p)
    p.add_argument("--dump-every", dest="dump_every", type=int)

    p = sub.add_parser("momentum-audit", help="track norm, <J> and integer-mode energy")
    _add_common(p)
    _add_walk(p)
    _add_landau(p)
    p.add_argument("--j-tolerance", dest="j_tolerance", type=float)

    p = sub.add_parser("convergence", help="one-step Landau error over an eps sweep")
    _add_common(p)
    _add_landau(p)
    p.add_argument("--n-theta-list", dest="n_theta_list", type=_int_list)

    p = sub.add_parser("landau-check", help="eigenstate diagnostics on one grid")
    _add_common(p)
    _add_landau(p)
    p.add_argument("--check-steps", dest="check_steps", type=int,
                   help="steps for the integer-mode check (default 50)")

    p = sub.add_parser("geometry-verify", help="connection coefficients of the polar metric")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--config")
    p.add_argument("--inject-typo", action="store_true",
                   help="negative control: use g_thth = -r^3")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


_CLI_ONLY = {"config", "command", "verbose", "inject_typo", "potential_preset", "potential_table",
             "beta", "initial_kind", "initial_dump", "seed", "landau_n", "landau_alpha",
             "landau_beta", "landau_mass", "check_steps"}

# sensible per-command defaults applied before the config file
_COMMAND_DEFAULTS = {
    "convergence": {"r_max": 45.0, "n_r": None},
    "landau-check": {"n_theta": 256, "r_max": 45.0, "n_r": None},
}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = dict(_COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
        data.update(loaded)
    ns = vars(args)
    for key, value in ns.items():
        if key not in _CLI_ONLY and value is not None:
            data[key] = value

    if ns.get("potential_preset") or ns.get("potential_table") or ns.get("beta") is not None:
        pot = dict(data.get("potential", {}))
        if ns.get("potential_preset"):
            pot = {"preset": ns["potential_preset"]}
        if ns.get("potential_table"):
            pot = {"table": ns["potential_table"]}
        if ns.get("beta") is not None:
            pot["beta"] = ns["beta"]
        data["potential"] = pot
    if ns.get("initial_kind") or ns.get("initial_dump") or ns.get("seed") is not None:
        init = dict(data.get("initial", {"kind": "random"}))
        if ns.get("initial_kind"):
            init = {"kind": ns["initial_kind"]}
        if ns.get("initial_dump"):
            init.update(kind="dump", path=ns["initial_dump"])
        if ns.get("seed") is not None:
            init["seed"] = ns["seed"]
        data["initial"] = init
    landau_keys = {"landau_n": "n", "landau_alpha": "alpha", "landau_beta": "beta",
                   "landau_mass": "mass"}
    if any(ns.get(k) is not None for k in landau_keys):
        lan = dict(data.get("landau", RunConfig().landau))
        for flag, key in landau_keys.items():
            if ns.get(flag) is not None:
                lan[key] = ns[flag]
        data["landau"] = lan
    return RunConfig.from_dict(data)


def _dispatch(args, cfg: RunConfig) -> dict:
    if args.command == "evolve":
        return run_evolve(cfg)
    if args.command == "momentum-audit":
        return run_momentum_audit(cfg)
    if args.command == "convergence":
        return run_convergence(cfg)
    if args.command == "landau-check":
        return run_landau_check(cfg, steps=args.check_steps)
    return run_geometry_verify(cfg, inject_typo=args.inject_typo)


def _fail(kind: str, code: int, message: str, report: dict | None = None) -> int:
    payload = {"error": kind, "exit_code": code, "message": message}
    if report:
        payload["report"] = report
    print(json.dumps(payload, sort_keys=True, default=str), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        report = _dispatch(args, cfg)
    except ConfigError as exc:
        return _fail("config", EXIT_CONFIG, str(exc))
    except ToleranceError as exc:
        return _fail("tolerance", EXIT_TOLERANCE, str(exc), exc.report)
    except OSError as exc:
        return _fail("io", EXIT_IO, str(exc))
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
