"""Command-line front end: a thin client over the service layer.

Subcommands:
  compute     apply an operator to a CSV-sampled function
  verify      run an identity-verification suite, emit a JSON report
  dist-apply  evaluate a distribution descriptor's action on a bump probe
  serve       start the HTTP service

By default requests are handled in-process (no server needed); `--server URL`
sends the same request models to a running service instead.

Exit codes: 0 success / all cases pass; 1 a verification case failed;
2 usage error; 3 input parse failure; 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import InputError, NonConvergenceError, UsageError, WeakfracError
from .grid import read_csv, write_csv, Grid, GridFunction, GridKind, Interval
from .service.models import ComputeRequest, Series, VerifyRequest
from .suites import suite_names

EXIT_OK = 0
EXIT_CASE_FAILED = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERICS = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakfrac", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--server", metavar="URL", default=None,
                        help="send the request to a running service instead of computing in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compute", help="apply an operator to a CSV input")
    comp.add_argument("--op", required=True,
                      choices=["integral", "rl-deriv", "caputo-deriv", "fourier-deriv",
                               "weak-deriv", "decompose"])
    comp.add_argument("--dir", dest="direction", choices=["left", "right"], default="left")
    comp.add_argument("--alpha", type=float, default=None)
    comp.add_argument("--sigma", type=float, default=None)
    comp.add_argument("--window", type=float, default=None,
                      help="truncation half-width X when the data samples a whole-line "
                           "function; the discarded-tail bound is reported")
    comp.add_argument("--input", required=True, help="CSV file with header x,value")
    comp.add_argument("--output", default="-", help="output CSV path (default: stdout)")

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("--suite", required=True, choices=suite_names())
    ver.add_argument("--alpha", type=float, default=0.5)
    ver.add_argument("--n", type=int, default=None, help="resolution override")
    ver.add_argument("--tol", type=float, default=None, help="tolerance override")
    ver.add_argument("--m", type=int, default=None,
                     help="expansion-depth override (product suite)")
    ver.add_argument("--json", dest="json_out", default=None, metavar="PATH",
                     help="write the JSON report here (default: stdout summary only)")

    dap = sub.add_parser("dist-apply",
                         help="evaluate a distribution descriptor on a bump probe")
    dap.add_argument("--descriptor", required=True,
                     help="JSON file path or inline JSON, e.g. "
                          '\'{"kind":"delta","x0":0.0}\' or '
                          '\'{"kind":"derived","dir":"left","alpha":0.5,"of":{...}}\'')
    dap.add_argument("--probe-center", type=float, required=True)
    dap.add_argument("--probe-radius", type=float, required=True)
    dap.add_argument("--probe-amplitude", type=float, default=1.0)

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return parser


def _read_series(path: str) -> Series:
    gf = read_csv(path)
    return Series(x=[float(v) for v in gf.grid.nodes], value=[float(v) for v in gf.values])


def _write_series(series: Series, path: str) -> None:
    import numpy as np

    nodes = np.asarray(series.x)
    gf = GridFunction(
        Grid(Interval(float(nodes[0]), float(nodes[-1])), nodes, GridKind.EXPLICIT),
        np.asarray(series.value),
        allow_nan=True,
    )
    if path == "-":
        write_csv(gf, sys.stdout)
    else:
        write_csv(gf, path)


def _remote_post(server: str, path: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", {})
        except Exception:
            detail = {}
        code = detail.get("code", "usage")
        message = detail.get("message", resp.text)
        if code == "input":
            raise InputError(message)
        if code == "non-convergence":
            raise NonConvergenceError(message)
        raise UsageError(message)
    return resp.json()


def _cmd_compute(args) -> int:
    series = _read_series(args.input)
    req = ComputeRequest(op=args.op, direction=args.direction, alpha=args.alpha,
                         sigma=args.sigma, window=args.window, series=series)
    if args.server:
        data = _remote_post(args.server, "/compute", req.model_dump())
        out = Series(**data["series"])
        notes = data.get("warnings", [])
    else:
        from .service.handlers import run_compute

        resp = run_compute(req)
        out, notes = resp.series, resp.warnings
    _write_series(out, args.output)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    req = VerifyRequest(suite=args.suite, alpha=args.alpha, n=args.n, tol=args.tol,
                        m=args.m)
    if args.server:
        data = _remote_post(args.server, "/verify", req.model_dump())
        from .service.models import ReportModel

        report = ReportModel.model_validate(data)
    else:
        from .service.handlers import run_verify

        report = run_verify(req)
    payload = report.model_dump(by_alias=True)
    text = json.dumps(payload, indent=2)
    if args.json_out:
        if args.json_out == "-":
            print(text)
        else:
            with open(args.json_out, "w", newline="\n") as handle:
                handle.write(text + "\n")
    for case in report.cases:
        status = "PASS" if case.passed else "FAIL"
        order = f" order={case.measured_order:.2f}" if case.measured_order is not None else ""
        print(f"[{status}] {report.suite}/{case.name}: residual={case.residual:.3e} "
              f"tol={case.tolerance:.3e}{order}")
    return EXIT_OK if report.passed else EXIT_CASE_FAILED


def _cmd_dist_apply(args) -> int:
    import os

    from .service.models import DistApplyRequest, ProbeModel

    raw = args.descriptor
    base_dir = "."
    if os.path.exists(raw):
        base_dir = os.path.dirname(os.path.abspath(raw)) or "."
        with open(raw) as handle:
            payload = json.load(handle)
    else:
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError:
            raise InputError(f"descriptor is neither a file nor valid JSON: {raw!r}")
    req = DistApplyRequest(
        descriptor=payload,
        probe=ProbeModel(center=args.probe_center, radius=args.probe_radius,
                         amplitude=args.probe_amplitude),
    )
    if args.server:
        data = _remote_post(args.server, "/dist-apply", req.model_dump())
        action = data["action"]
    else:
        from .service.handlers import run_dist_apply

        action = run_dist_apply(req, base_dir=base_dir).action
    print(json.dumps({"action": action}))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags already
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "compute":
            return _cmd_compute(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "dist-apply":
            return _cmd_dist_apply(args)
        if args.command == "serve":
            return _cmd_serve(args)
        raise UsageError(f"unknown command {args.command!r}")
    except NonConvergenceError as exc:
        print(f"error (numerics): {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except InputError as exc:
        print(f"error (input): {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error (input): {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, WeakfracError) as exc:
        print(f"error (usage): {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:  # pydantic validation surfaces here
        print(f"error (usage): {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
