"""Thin command-line client for the saliency service.

By default the CLI talks to the FastAPI app in-process through an ASGI
transport, so no server needs to be running; ``--server URL`` points it at
a remote instance instead.  Exit codes: 0 success, 1 configuration error,
2 I/O error, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_SELFTEST = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    from fastapi.testclient import TestClient  # deferred: keeps --help fast

    from .service import app

    return TestClient(app, base_url="http://hcasal.local")


def _read_file(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO)


def _write_file(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO)


def _check(resp: httpx.Response) -> httpx.Response:
    if resp.status_code == 400:
        raise CliError(f"service rejected input: {resp.text}", EXIT_IO)
    if resp.status_code >= 400:
        raise CliError(f"service error ({resp.status_code}): {resp.text}", EXIT_CONFIG)
    return resp


def _parse_features(spec: str):
    """``a.hcaf:0.5,b.hcaf:0.5`` -> (paths, weights); weights must sum to 1."""
    paths, weights = [], []
    for item in spec.split(","):
        if ":" not in item:
            raise CliError(f"feature spec {item!r} needs path:weight", EXIT_CONFIG)
        path, _, wt = item.rpartition(":")
        try:
            weights.append(float(wt))
        except ValueError:
            raise CliError(f"bad feature weight {wt!r}", EXIT_CONFIG)
        paths.append(path)
    if abs(sum(weights) - 1.0) > 1e-9:
        raise CliError(f"feature weights must sum to 1, got {sum(weights)}", EXIT_CONFIG)
    return paths, weights


def _config_fields(args) -> dict:
    return {
        "scales": args.scales,
        "ts": str(args.ts),
        "tc": str(args.tc),
        "lambda": str(getattr(args, "lambda")),
        "sigma2": str(args.sigma2),
        "compactness": str(args.compactness),
    }


def _echo_config(args, extra: dict) -> None:
    fields = {**extra}
    if hasattr(args, "scales"):
        fields.update(_config_fields(args))
    fields["threads"] = os.environ.get("HCA_THREADS", "1")
    resolved = " ".join(f"{k}={v}" for k, v in sorted(fields.items()))
    print(f"config: {resolved}", file=sys.stderr)


def _add_pipeline_flags(sub, with_sca=True):
    sub.add_argument("-o", "--out", required=True, help="output PNG path")
    sub.add_argument("--tc", type=int, default=3, help="fusion iterations (default 3)")
    sub.add_argument("--lambda", type=float, default=0.05,
                     help="log-odds step per agreeing neighbor (default 0.05)")
    if with_sca:
        sub.add_argument("--scales", default="120,160,200",
                         help="superpixel counts per scale (default 120,160,200)")
        sub.add_argument("--ts", type=int, default=20,
                         help="propagation iterations (default 20)")
        sub.add_argument("--sigma2", type=float, default=0.1,
                         help="feature similarity bandwidth (default 0.1)")
        sub.add_argument("--compactness", type=float, default=10.0,
                         help="superpixel compactness (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hca", description="Cellular-automata saliency detection client"
    )
    parser.add_argument("--server", default=None,
                        help="remote service URL (default: in-process)")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="detect saliency from scratch")
    run.add_argument("image", help="input PNG or JPEG")
    run.add_argument("--features", default=None,
                     help="HCAF layers as path:weight[,path:weight...]; weights sum to 1")
    _add_pipeline_flags(run)

    opt = subs.add_parser("optimize", help="refine an external saliency map")
    opt.add_argument("image", help="input PNG or JPEG")
    opt.add_argument("prior", help="grayscale PNG saliency map to refine")
    _add_pipeline_flags(opt)

    fuse = subs.add_parser("fuse", help="fuse two or more saliency maps")
    fuse.add_argument("maps", nargs="+", help="grayscale PNG maps")
    _add_pipeline_flags(fuse, with_sca=False)

    ev = subs.add_parser("eval", help="score a map against ground truth")
    ev.add_argument("map", help="saliency map PNG")
    ev.add_argument("gt", help="binary ground-truth PNG")
    ev.add_argument("-o", "--out", default=None, help="write the PR curve CSV here")

    subs.add_parser("selftest", help="run the built-in oracle suite")
    return parser


def _cmd_run(args, client) -> int:
    files = [("image", (os.path.basename(args.image), _read_file(args.image)))]
    data = _config_fields(args)
    extra = {"image": args.image, "out": args.out}
    if args.features:
        paths, weights = _parse_features(args.features)
        for p in paths:
            files.append(("features", (os.path.basename(p), _read_file(p))))
        data["feature_weights"] = ",".join(str(w) for w in weights)
        extra["features"] = args.features
    _echo_config(args, extra)
    resp = _check(client.post("/v1/run", files=files, data=data))
    _write_file(args.out, resp.content)
    return EXIT_OK


def _cmd_optimize(args, client) -> int:
    _echo_config(args, {"image": args.image, "prior": args.prior, "out": args.out})
    files = [
        ("image", (os.path.basename(args.image), _read_file(args.image))),
        ("prior", (os.path.basename(args.prior), _read_file(args.prior))),
    ]
    resp = _check(client.post("/v1/optimize", files=files, data=_config_fields(args)))
    _write_file(args.out, resp.content)
    return EXIT_OK


def _cmd_fuse(args, client) -> int:
    if len(args.maps) < 2:
        raise CliError("fuse needs at least 2 maps", EXIT_CONFIG)
    _echo_config(args, {"maps": ",".join(args.maps), "out": args.out,
                        "tc": args.tc, "lambda": getattr(args, "lambda")})
    files = [("maps", (os.path.basename(p), _read_file(p))) for p in args.maps]
    data = {"tc": str(args.tc), "lambda": str(getattr(args, "lambda"))}
    resp = _check(client.post("/v1/fuse", files=files, data=data))
    _write_file(args.out, resp.content)
    return EXIT_OK


def _cmd_eval(args, client) -> int:
    _echo_config(args, {"map": args.map, "gt": args.gt})
    files = [
        ("saliency", (os.path.basename(args.map), _read_file(args.map))),
        ("gt", (os.path.basename(args.gt), _read_file(args.gt))),
    ]
    resp = _check(client.post("/v1/eval", files=files))
    body = resp.json()
    if args.out:
        _write_file(args.out, body["csv"].encode())
    print(f"mae={body['mae']:.6f} adaptive_f={body['adaptive_f']:.6f}")
    return EXIT_OK


def _cmd_selftest(args, client) -> int:
    _echo_config(args, {})
    perturb = os.environ.get("HCA_SELFTEST_PERTURB", "")
    resp = _check(client.post("/v1/selftest", data={"perturb": perturb}))
    body = resp.json()
    for check in body["checks"]:
        status = "ok" if check["passed"] else "FAIL"
        print(f"{check['name']}: {status}" + (f" ({check['detail']})" if check["detail"] else ""))
    if not body["passed"]:
        first = next(c for c in body["checks"] if not c["passed"])
        print(f"selftest failed: {first['detail'] or first['name']}", file=sys.stderr)
        return EXIT_SELFTEST
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "optimize": _cmd_optimize,
    "fuse": _cmd_fuse,
    "eval": _cmd_eval,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _client(args.server) as client:
            return _COMMANDS[args.command](args, client)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
