"""Command-line front end. Each subcommand is a thin client of the HTTP
service: by default the FastAPI app is driven in-process, and --server
points the same requests at a remote instance.

Exit codes: 0 success, 2 usage or invalid parameters, 3 numeric invalidity
(series blow-up with no fallback method), 4 partial failure (too many
regression samples failed). Every successful run writes a run_manifest.json
listing its outputs; the manifest is written last, so its presence marks a
completed run. CSV floats use 17 significant digits (round-trip exact), LF
line endings, UTF-8.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .equiv import DEFAULT_SEED

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4

FIT_FAILURE_BUDGET = 0.01


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(
    out_dir: Path, command: str, params: dict, seed: int, outputs: list[Path], t0: float
) -> None:
    manifest = {
        "command": command,
        "params": {k: v for k, v in params.items() if v is not None},
        "seed": seed,
        "outputs": [str(p) for p in outputs],
        "wall_time_ms": int(round((time.monotonic() - t0) * 1000)),
    }
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _post(client, path: str, payload: dict):
    """POST and return the parsed body, or print the error and return None."""
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail")
        except ValueError:
            detail = resp.text
        print(f"error: {detail}", file=sys.stderr)
        return None
    return resp.json()


def _default_seed() -> int:
    env = os.environ.get("FRACOSC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(EXIT_USAGE)
    return DEFAULT_SEED


def cmd_impulse(args, client) -> int:
    t0 = time.monotonic()
    payload = {
        "omega_n": args.omega_n,
        "zeta": args.zeta,
        "beta": args.beta,
        "t_end": args.t_end,
        "n": args.n,
        "method": args.method,
        "naive": args.naive,
    }
    body = _post(client, "/impulse", payload)
    if body is None:
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t = body["t"]
    outputs = []
    for method, sig in body["methods"].items():
        path = out / f"impulse_{method}.csv"
        _write_csv(path, ["t", "x", "valid"], zip(t, sig["x"], sig["valid"]))
        outputs.append(path)
    if body["residual"] is not None:
        path = out / "impulse_residual.csv"
        _write_csv(path, ["t", "residual"], zip(t, body["residual"]))
        outputs.append(path)
    if args.method == "series":
        sig = body["methods"]["series"]
        if not all(sig["valid"]):
            print(
                f"error: series evaluation loses validity near "
                f"t = {body['valid_until']:.4g} s (no fallback method requested)",
                file=sys.stderr,
            )
            return EXIT_NUMERIC
    _write_manifest(out, "impulse", payload, _default_seed(), outputs, t0)
    return EXIT_OK


def cmd_frf(args, client) -> int:
    t0 = time.monotonic()
    payload = {
        "omega_n": args.omega_n,
        "zeta": args.zeta,
        "beta": args.beta,
        "g_max": args.g_max,
        "n": args.n,
    }
    body = _post(client, "/frf", payload)
    if body is None:
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    path = out / "frf.csv"
    _write_csv(
        path,
        ["g", "mag_exact", "mag_approx"],
        zip(body["g"], body["mag_exact"], body["mag_approx"]),
    )
    outputs.append(path)
    for which in ("exact", "approx"):
        path = out / f"frf_{which}.csv"
        _write_csv(
            path,
            ["g", "mag", "phase"],
            zip(body["g"], body[f"mag_{which}"], body[f"phase_{which}"]),
        )
        outputs.append(path)
    _write_manifest(out, "frf", payload, _default_seed(), outputs, t0)
    return EXIT_OK


def cmd_fit(args, client) -> int:
    t0 = time.monotonic()
    seed = args.seed if args.seed is not None else _default_seed()
    payload = {
        "target": args.target,
        "samples": args.samples,
        "seed": seed,
        "jobs": args.jobs,
    }
    body = _post(client, "/fit", payload)
    if body is None:
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    path = out / f"fit_{args.target}.csv"
    _write_csv(
        path,
        ["a0", "a1", "a0_lo", "a0_hi", "a1_lo", "a1_hi", "rmse", "n"],
        [
            (
                body["a0"],
                body["a1"],
                body["ci95_a0"][0],
                body["ci95_a0"][1],
                body["ci95_a1"][0],
                body["ci95_a1"][1],
                body["rmse"],
                body["n_samples"],
            )
        ],
    )
    outputs.append(path)
    path = out / "scatter.csv"
    _write_csv(path, ["beta", "y"], zip(body["scatter_beta"], body["scatter_y"]))
    outputs.append(path)
    print(
        f"a0 = {body['a0']:.4f} [{body['ci95_a0'][0]:.4f}, {body['ci95_a0'][1]:.4f}], "
        f"a1 = {body['a1']:.4f} [{body['ci95_a1'][0]:.4f}, {body['ci95_a1'][1]:.4f}], "
        f"rmse = {body['rmse']:.3e}, failed = {body['n_failed']}/{args.samples}"
    )
    if body["n_failed"] > FIT_FAILURE_BUDGET * args.samples:
        print(
            f"error: {body['n_failed']} of {args.samples} samples failed "
            f"(budget {FIT_FAILURE_BUDGET:.0%})",
            file=sys.stderr,
        )
        return EXIT_PARTIAL
    _write_manifest(out, "fit", payload, seed, outputs, t0)
    return EXIT_OK


def cmd_respond(args, client) -> int:
    t0 = time.monotonic()
    if args.case is not None:
        payload = {"case": args.case, "t_end": args.t_end, "n": args.n}
    else:
        from .response import parse_scenario
        from .specfun import DomainError

        try:
            p, h, grid = parse_scenario(args.scenario)
        except (FileNotFoundError, DomainError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        payload = {
            "scenario": {
                "omega_n": p.omega_n,
                "zeta": p.zeta,
                "beta": p.beta,
                "t_end": grid.t_end,
                "n": grid.n,
                "excitation": {
                    "kind": h.kind,
                    "amplitude": h.amplitude,
                    "frequency": h.frequency,
                },
            }
        }
    body = _post(client, "/respond", payload)
    if body is None:
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series = body["series"]
    approx_ = body["approx"]
    fdm_ = body["fdm"]
    if not (any(series["valid"]) or any(approx_["valid"])):
        print("error: no method valid on the horizon", file=sys.stderr)
        return EXIT_NUMERIC
    rows = []
    for i, t in enumerate(body["t"]):
        ok = series["valid"][i]
        rows.append(
            (
                t,
                series["x"][i],
                approx_["x"][i],
                fdm_["x"][i] if fdm_ is not None else None,
                series["x"][i] - approx_["x"][i] if ok else None,
                ok,
            )
        )
    path = out / "report.csv"
    _write_csv(path, ["t", "series", "approx", "fdm", "residual", "valid"], rows)
    print(
        f"case {body['case_id']}: series valid until t = {body['valid_until']:.4g} s, "
        f"residual_max = {body['residual_max']}, residual_rel = {body['residual_rel']}"
    )
    _write_manifest(out, "respond", payload, _default_seed(), [path], t0)
    return EXIT_OK


def cmd_serve(args, _client) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_params(sp) -> None:
    sp.add_argument("--omega-n", dest="omega_n", type=float, required=True)
    sp.add_argument("--zeta", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracosc",
        description="Impulse and forced response of a fractionally damped oscillator.",
    )
    parser.add_argument(
        "--server", default=None, help="base URL of a running service (default: in-process)"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("impulse", help="impulse response by one or all methods")
    _add_params(sp)
    sp.add_argument("--t-end", dest="t_end", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument(
        "--method", choices=["series", "approx", "fdm", "all"], default="series"
    )
    sp.add_argument("--naive", action="store_true", help="naive series summation")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_impulse)

    sp = sub.add_parser("frf", help="frequency response magnitude curves")
    _add_params(sp)
    sp.add_argument("--g-max", dest="g_max", type=float, default=3.0)
    sp.add_argument("--n", type=int, default=601)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_frf)

    sp = sub.add_parser("fit", help="refit the power-law regression constants")
    sp.add_argument("--target", choices=["omega-d", "zeta-eq"], required=True)
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("respond", help="forced-response comparison report")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--case", choices=["1", "2", "3", "4", "yuan"])
    group.add_argument("--scenario", help="key=value scenario file")
    sp.add_argument("--t-end", dest="t_end", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_respond)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "serve":
        return cmd_serve(args, None)
    client = _client(args.server)
    try:
        return args.func(args, client)
    finally:
        client.close()


def entry() -> None:
    sys.exit(main())
