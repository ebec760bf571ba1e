"""Command-line client for the optimization service.

By default every subcommand talks to an in-process instance of the service
(no server needed, fully deterministic); pass --server URL to target a
running instance instead. Experiment outputs are written client-side from the
service's JSON payloads, so a remote server needs no shared filesystem.

Subcommands: single, ablation, tsp, continuous, serve.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import sys
import warnings
from pathlib import Path

from .errors import YoptError
from .harness import (
    ingest_external_csv,
    summary_csv,
    write_experiment_outputs,
    write_single_output,
)
from .record import canonical_json


class CliError(YoptError):
    pass


class ServiceClient:
    """Thin HTTP client; in-process ASGI when no server URL is given."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def _check(self, response) -> dict:
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except Exception:
                detail = response.text
            raise CliError(f"service error ({response.status_code}): {detail}")
        return response.json()

    def get(self, path: str, params: dict | None = None) -> dict:
        return self._check(self._client.get(path, params=params))

    def post(self, path: str, payload: dict) -> dict:
        return self._check(self._client.post(path, json=payload))


# ---------------------------------------------------------------------------
# experiment config files (flat key=value sections)

def _coerce(value: str):
    try:
        return ast.literal_eval(value)
    except (ValueError, SyntaxError):
        return value


def load_config_file(path: str | Path) -> dict:
    """Parse an experiment spec file.

    [experiment] holds the scalar settings (budget, runs, seed, seeds, n,
    delay, parallel, out); [overrides] holds hybrid-optimizer overrides;
    [variant:NAME] sections hold per-variant overrides.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise CliError(f"config file not found: {path}")
    out: dict = {"experiment": {}, "overrides": {}, "variants": {}}
    for section in parser.sections():
        items = {k: _coerce(v) for k, v in parser.items(section)}
        if section == "experiment":
            out["experiment"] = items
        elif section == "overrides":
            out["overrides"] = items
        elif section.startswith("variant:"):
            out["variants"][section.split(":", 1)[1]] = items
        else:
            raise CliError(f"unknown config section [{section}]")
    return out


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise CliError(f"bad seed list: {text!r}") from None


def _merged(args, config: dict, key: str, default):
    """CLI flag wins, then config file, then default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config.get("experiment", {}):
        return config["experiment"][key]
    return default


def _seed_list(args, config: dict, default_runs: int, default_seeds=None) -> list[int]:
    seeds = getattr(args, "seeds", None)
    if seeds is not None:
        return _parse_seeds(seeds)
    cfg_seeds = config.get("experiment", {}).get("seeds")
    if cfg_seeds is not None:
        if isinstance(cfg_seeds, (int, float)):
            return [int(cfg_seeds)]
        if isinstance(cfg_seeds, tuple):
            return [int(s) for s in cfg_seeds]
        return _parse_seeds(str(cfg_seeds))
    if default_seeds is not None and getattr(args, "runs", None) is None and getattr(args, "seed", None) is None:
        return list(default_seeds)
    runs = int(_merged(args, config, "runs", default_runs))
    base = int(_merged(args, config, "seed", 0))
    return list(range(base, base + runs))


# ---------------------------------------------------------------------------
# subcommands

def cmd_single(args) -> int:
    client = ServiceClient(args.server)
    payload = {
        "problem": args.problem,
        "algorithm": args.algo,
        "seed": args.seed if args.seed is not None else 0,
        "budget": args.budget if args.budget is not None else 150,
        "delay": args.delay if args.delay is not None else 0.0,
        "overrides": load_config_file(args.config)["overrides"] if args.config else {},
    }
    if args.problem == "tsp":
        payload["tsp_n"] = args.n
    response = client.post("/run", payload)
    record = response["record"]
    printable = dict(record)
    if not args.timing:
        printable.pop("wall_time_ms", None)
    print(canonical_json(printable, indent=2))
    if args.out:
        where = write_single_output(
            record, args.problem, args.algo, payload["seed"], args.out
        )
        print(f"wrote {where}", file=sys.stderr)
    return 0


def _finish_experiment(result: dict, out) -> int:
    print(summary_csv(result), end="")
    if out:
        where = write_experiment_outputs(result, out)
        print(f"wrote {where}", file=sys.stderr)
    return 0


def cmd_ablation(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    client = ServiceClient(args.server)
    payload = {
        "budget": int(_merged(args, config, "budget", 150)),
        "seeds": _seed_list(args, config, default_runs=30),
        "delay": float(_merged(args, config, "delay", 0.0)),
        "parallel": int(_merged(args, config, "parallel", 1)),
        "overrides": config.get("overrides", {}),
        "variant_overrides": config.get("variants", {}),
    }
    weights = config.get("experiment", {}).get("weights")
    if weights:
        payload["weights"] = list(weights)
    result = client.post("/experiments/ablation", payload)
    return _finish_experiment(result, _merged(args, config, "out", None))


def cmd_tsp(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    client = ServiceClient(args.server)
    payload = {
        "n": int(_merged(args, config, "n", 50)),
        "seeds": _seed_list(args, config, default_runs=3, default_seeds=(42, 101, 202)),
        "budget": int(_merged(args, config, "budget", 2000)),
        "delay": float(_merged(args, config, "delay", 0.0)),
        "parallel": int(_merged(args, config, "parallel", 1)),
        "overrides": config.get("overrides", {}),
        "variant_overrides": config.get("variants", {}),
    }
    result = client.post("/experiments/tsp", payload)
    return _finish_experiment(result, _merged(args, config, "out", None))


def cmd_continuous(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    client = ServiceClient(args.server)
    external_rows = []
    external_path = args.external or config.get("experiment", {}).get("external")
    if external_path:
        for name, rows in ingest_external_csv(external_path).items():
            external_rows += [
                {"algorithm": name, "seed": seed, "final_best": value} for seed, value in rows
            ]
    payload = {
        "budget": int(_merged(args, config, "budget", 150)),
        "seeds": _seed_list(args, config, default_runs=30),
        "delay": float(_merged(args, config, "delay", 0.0)),
        "parallel": int(_merged(args, config, "parallel", 1)),
        "overrides": config.get("overrides", {}),
        "variant_overrides": config.get("variants", {}),
        "external": external_rows,
    }
    result = client.post("/experiments/continuous", payload)
    return _finish_experiment(result, _merged(args, config, "out", None))


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed")
    common.add_argument("--budget", type=int, default=None, help="evaluation budget per run")
    common.add_argument("--runs", type=int, default=None, help="runs per variant")
    common.add_argument("--seeds", type=str, default=None, help="comma-separated explicit seed list")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--delay", type=float, default=None, help="artificial seconds per evaluation")
    common.add_argument("--parallel", type=int, default=None, help="concurrent runs")
    common.add_argument("--config", type=str, default=None, help="experiment spec file")
    common.add_argument("--server", type=str, default=None, help="service URL (default: in-process)")

    p = sub.add_parser("single", parents=[common], help="one optimizer run, prints the run record JSON")
    p.add_argument("--problem", required=True, choices=["composite5d", "rosenbrock5d", "tsp"])
    p.add_argument("--algo", default="yo", choices=["yo", "sa", "ga", "two_opt", "random", "apso"])
    p.add_argument("--n", type=int, default=50, help="tsp city count")
    p.add_argument("--timing", action="store_true", help="include wall_time_ms in stdout JSON")
    p.set_defaults(fn=cmd_single)

    p = sub.add_parser("ablation", parents=[common], help="component-ablation study on composite5d")
    p.set_defaults(fn=cmd_ablation)

    p = sub.add_parser("tsp", parents=[common], help="TSP suite: hybrid optimizer vs baselines")
    p.add_argument("--n", type=int, default=None, help="city count")
    p.set_defaults(fn=cmd_tsp)

    p = sub.add_parser("continuous", parents=[common], help="rosenbrock5d comparison")
    p.add_argument("--external", type=str, default=None, help="CSV of external results (algorithm,seed,final_best)")
    p.set_defaults(fn=cmd_continuous)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except YoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
