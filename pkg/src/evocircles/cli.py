"""Command-line client for the detection service.

By default every command talks to an in-process instance of the service
over an ASGI transport, so no server needs to be running; pass --server
to target a remote instance instead. All commands are deterministic under
a fixed seed; in that mode the elapsed-time fields of JSON and CSV output
are written as 0.0 so repeated invocations are byte-identical.

Exit codes: 0 success, 1 no circle detected, 2 I/O or usage error,
3 insufficient edges, 4 generation/placement error, 5 bad benchmark suite.
"""

from __future__ import annotations

import argparse
import base64
import json
import math
import sys
from pathlib import Path

import httpx

from . import __version__, netpbm
from .config import load_config_file
from .errors import ConfigError, NetpbmError
from .evaluation import BenchReport, BenchRow
from .geometry import Circle
from .svg import render_overlay

EXIT_OK = 0
EXIT_NO_CIRCLE = 1
EXIT_IO = 2
EXIT_INSUFFICIENT_EDGES = 3
EXIT_GENERATION = 4
EXIT_BAD_SUITE = 5

_ERROR_CODE_EXITS = {
    "insufficient_edges": EXIT_INSUFFICIENT_EDGES,
    "placement_error": EXIT_GENERATION,
    "bad_input": EXIT_IO,
    "config_error": EXIT_IO,
}


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


class _InProcessTransport(httpx.BaseTransport):
    """Drive the ASGI app synchronously, one event loop per request."""

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app, raise_app_exceptions=False)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def call():
            response = await self._asgi.handle_async_request(request)
            await response.aread()
            return response

        response = asyncio.run(call())
        return httpx.Response(
            status_code=response.status_code,
            headers=response.headers,
            content=response.content,
            request=request,
        )


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    from .service.app import create_app

    return httpx.Client(
        transport=_InProcessTransport(create_app()),
        base_url="http://evocircles.internal",
        timeout=600.0,
    )


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliError(f"service unreachable: {exc}", EXIT_IO) from None
    if response.status_code >= 400:
        detail = None
        try:
            detail = response.json().get("detail")
        except Exception:
            pass
        if isinstance(detail, dict) and "code" in detail:
            code = detail["code"]
            raise CliError(detail.get("message", code), _ERROR_CODE_EXITS.get(code, EXIT_IO))
        raise CliError(f"service error {response.status_code}: {detail}", EXIT_IO)
    return response.json()


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None


def _write_bytes(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None


def _collect_overrides(args) -> dict:
    """Merge --config file keys with explicit flags (flags win)."""
    overrides: dict = {}
    if getattr(args, "config", None):
        try:
            overrides.update(load_config_file(args.config))
        except (OSError, ConfigError) as exc:
            raise CliError(str(exc), EXIT_IO) from None
    for key, flag in (
        ("generations", "generations"),
        ("window", "window"),
        ("min_radius", "min_radius"),
        ("completeness_threshold", "threshold"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _overrides_to_model(overrides: dict) -> dict:
    """Reshape a flat key=value mapping into the service's config model."""
    allowed = {
        "f": float, "cr": float, "pop_size": int, "max_generations": int,
        "h": float, "transform_cap": int, "penalty_cost": float,
        "target_objective": float, "window": int, "min_radius": float,
        "completeness_threshold": float, "mask_tolerance": float,
    }
    out = {}
    for key, value in overrides.items():
        name = "max_generations" if key == "generations" else key
        if name in ("seed", "max_circles"):
            continue
        if name not in allowed:
            raise CliError(f"unknown configuration key: {key}", EXIT_IO)
        if name == "target_objective" and str(value).lower() == "none":
            out[name] = None  # an explicit null disables early stopping
            continue
        try:
            out[name] = allowed[name](value)
        except (TypeError, ValueError):
            raise CliError(f"bad value for {key}: {value!r}", EXIT_IO) from None
    return out


# ---------------------------------------------------------------- commands


def cmd_edges(args) -> int:
    data = _read_bytes(args.input)
    payload = {
        "image_b64": _b64(data),
        "canny": {
            "gaussian_sigma": args.sigma,
            "low_threshold": args.low,
            "high_threshold": args.high,
        },
    }
    with make_client(args.server) as client:
        result = _post(client, "/edges", payload)
    _write_bytes(args.output, base64.b64decode(result["edge_map_b64"]))
    print(result["num_points"])
    return EXIT_OK


def _input_to_edge_map_b64(args, client: httpx.Client) -> str:
    """Normalize any input file to a base64 PBM edge map."""
    data = _read_bytes(args.input)
    magic = data[:2]
    if magic in netpbm.BITMAP_MAGICS or (args.assume_edges and magic in netpbm.GRAY_MAGICS):
        try:
            from .edges import edge_map_from_bytes

            edge_map = edge_map_from_bytes(data)
        except NetpbmError as exc:
            raise CliError(str(exc), EXIT_IO) from None
        return _b64(netpbm.encode_bitmap(edge_map.mask))
    result = _post(client, "/edges", {"image_b64": _b64(data)})
    return result["edge_map_b64"]


def cmd_detect(args) -> int:
    overrides = _collect_overrides(args)
    seed = args.seed
    if seed is None and "seed" in overrides:
        seed = int(overrides["seed"])
    circles = args.circles
    if circles is None:
        circles = int(overrides.get("max_circles", 1))

    with make_client(args.server) as client:
        edge_map_b64 = _input_to_edge_map_b64(args, client)
        payload = {
            "edge_map_b64": edge_map_b64,
            "circles": circles,
            "approximate": args.approximate,
            "seed": seed,
            "config": _overrides_to_model(overrides),
        }
        result = _post(client, "/detect", payload)

    seeded = seed is not None
    detections = result["detections"]
    doc = {
        "input": args.input,
        "seed": result["seed"],
        "config": result["config"],
        "detections": [
            {
                "x0": d["x0"],
                "y0": d["y0"],
                "r": d["r"],
                "objective": d["objective"],
                "hit_ratio": d["hit_ratio"],
                "generations": d["generations"],
                "elapsed_s": 0.0 if seeded else d["elapsed_s"],
            }
            for d in detections
        ],
    }
    if args.json:
        _write_text(args.json, json.dumps(doc, indent=2) + "\n")
    if args.svg:
        from .edges import edge_map_from_bytes

        edge_map = edge_map_from_bytes(base64.b64decode(edge_map_b64))
        found = [Circle(d["x0"], d["y0"], d["r"]) for d in detections]
        _write_text(args.svg, render_overlay(edge_map, found))

    print(f"seed: {result['seed']}")
    for idx, d in enumerate(doc["detections"], 1):
        print(
            f"circle {idx}: x0={d['x0']:.2f} y0={d['y0']:.2f} r={d['r']:.2f} "
            f"objective={d['objective']:.4f} hit_ratio={d['hit_ratio']:.4f}"
        )
    if not detections:
        print("no circle detected", file=sys.stderr)
        return EXIT_NO_CIRCLE
    return EXIT_OK


def _parse_circles_spec(spec: str) -> dict:
    """Either a count, or explicit 'x,y,r' triplets separated by ';'."""
    try:
        return {"count": int(spec)}
    except ValueError:
        pass
    circles = []
    for part in spec.split(";"):
        fields = part.split(",")
        if len(fields) != 3:
            raise CliError(f"bad circle spec {part!r}, expected x,y,r", EXIT_IO)
        try:
            x0, y0, r = (float(v) for v in fields)
        except ValueError:
            raise CliError(f"bad circle spec {part!r}", EXIT_IO) from None
        circles.append({"x0": x0, "y0": y0, "r": r})
    return {"circles": circles}


def cmd_synth(args) -> int:
    payload = {
        "width": args.width,
        "height": args.height,
        "noise": args.noise,
        "seed": args.seed,
        **_parse_circles_spec(args.circles),
    }
    with make_client(args.server) as client:
        result = _post(client, "/synthesize", payload)
    prefix = Path(args.out)
    _write_bytes(str(prefix.with_suffix(".pgm")), base64.b64decode(result["image_b64"]))
    _write_bytes(str(prefix.with_suffix(".pbm")), base64.b64decode(result["edge_map_b64"]))
    truth_doc = {
        "width": args.width,
        "height": args.height,
        "seed": result["seed"],
        "noise": args.noise,
        "circles": result["truth"],
    }
    _write_text(str(prefix.with_suffix(".json")), json.dumps(truth_doc, indent=2) + "\n")
    print(f"seed: {result['seed']}")
    print(f"edge points: {result['num_points']}")
    return EXIT_OK


def _load_seeds(path: str) -> list[int]:
    seeds = []
    for raw in _read_bytes(path).decode().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            try:
                seeds.append(int(line))
            except ValueError:
                raise CliError(f"bad seed line {raw!r}", EXIT_IO) from None
    return seeds


def _scan_suite(suite_dir: str) -> list[dict]:
    root = Path(suite_dir)
    if not root.is_dir():
        raise CliError(f"suite directory not found: {suite_dir}", EXIT_BAD_SUITE)
    cases = []
    for pbm in sorted(root.glob("*.pbm")):
        truth_path = pbm.with_suffix(".json")
        if not truth_path.exists():
            continue
        try:
            truth = json.loads(truth_path.read_text())
            circles = truth["circles"]
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"bad ground truth {truth_path}: {exc}", EXIT_BAD_SUITE) from None
        cases.append({
            "name": pbm.stem,
            "edge_map_b64": _b64(pbm.read_bytes()),
            "truth": circles,
        })
    if not cases:
        raise CliError(f"no (.pbm, .json) fixture pairs in {suite_dir}", EXIT_BAD_SUITE)
    return cases


def cmd_bench(args) -> int:
    overrides = _collect_overrides(args)
    cases = _scan_suite(args.suite)
    seeds = _load_seeds(args.seeds) if args.seeds else None
    if seeds is not None and len(seeds) < args.runs:
        raise CliError(f"seed file has {len(seeds)} seeds, need {args.runs}", EXIT_IO)
    payload = {
        "cases": cases,
        "runs": args.runs,
        "seeds": seeds[: args.runs] if seeds else None,
        "config": _overrides_to_model(overrides),
    }
    with make_client(args.server) as client:
        result = _post(client, "/benchmark", payload)

    rows = [
        BenchRow(
            image=r["image"],
            runs=r["runs"],
            mean_time_s=r["mean_time_s"],
            std_time_s=r["std_time_s"],
            success_rate_pct=r["success_rate_pct"],
            mean_es=math.nan if r["mean_es"] is None else r["mean_es"],
            std_es=math.nan if r["std_es"] is None else r["std_es"],
        )
        for r in result["rows"]
    ]
    report = BenchReport(tuple(rows))
    if seeds is not None:
        report = report.strip_timing()
    _write_text(args.csv, report.to_csv())
    if args.json:
        _write_text(args.json, report.to_json())
    print(f"seeds: {' '.join(str(s) for s in result['seeds'])}")
    print(report.to_csv(), end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("evocircles.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evocircles",
        description="Detect circular shapes in edge maps with a discrete "
        "differential evolution search.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server(p):
        p.add_argument("--server", help="base URL of a running service "
                       "(default: run the service in-process)")

    p = sub.add_parser("edges", help="extract an edge map from a grayscale image")
    p.add_argument("input", help="PGM or PNG image")
    p.add_argument("-o", "--output", required=True, help="output PBM edge map")
    p.add_argument("--sigma", type=float, default=1.4, help="Gaussian sigma (default 1.4)")
    p.add_argument("--low", type=float, default=0.1, help="low threshold fraction (default 0.1)")
    p.add_argument("--high", type=float, default=0.3, help="high threshold fraction (default 0.3)")
    add_server(p)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("detect", help="detect circles in an image or edge map")
    p.add_argument("input", help="PBM edge map, or PGM/PNG image (run through "
                   "the edge detector first)")
    p.add_argument("--circles", type=int, default=None, help="maximum circles to find (default 1)")
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed; also zeroes elapsed_s in the JSON output "
                   "so repeated runs are byte-identical")
    p.add_argument("--generations", type=int, default=None, help="generation limit (default 100)")
    p.add_argument("--window", type=int, default=None, help="odd test-window size (default 5)")
    p.add_argument("--min-radius", dest="min_radius", type=float, default=None,
                   help="smallest admissible radius (default 3)")
    p.add_argument("--threshold", type=float, default=None,
                   help="completeness threshold in [0,1] (default 0.7)")
    p.add_argument("--approximate", action="store_true",
                   help="keep every found circle (shape approximation mode)")
    p.add_argument("--assume-edges", action="store_true",
                   help="treat a PGM input as a thresholded edge map")
    p.add_argument("--json", help="write the result document to this path")
    p.add_argument("--svg", help="write an SVG overlay to this path")
    p.add_argument("--config", help="key=value config file overriding defaults")
    add_server(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="generate a synthetic scene with ground truth")
    p.add_argument("--width", type=int, default=200)
    p.add_argument("--height", type=int, default=200)
    p.add_argument("--circles", required=True,
                   help="a count (random placement) or 'x,y,r;x,y,r' triplets")
    p.add_argument("--noise", type=float, default=0.0,
                   help="salt-and-pepper density in [0,1) (default 0)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output prefix (.pgm/.pbm/.json)")
    add_server(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="benchmark detection over a fixture suite")
    p.add_argument("--suite", required=True,
                   help="directory of <name>.pbm edge maps with <name>.json truth")
    p.add_argument("--runs", type=int, default=1, help="runs per image (default 1)")
    p.add_argument("--seeds", help="file with one seed per line; also zeroes the "
                   "time columns so repeated runs are byte-identical")
    p.add_argument("--csv", required=True, help="output CSV path")
    p.add_argument("--json", help="optional JSON report path")
    p.add_argument("--config", help="key=value config file overriding defaults")
    add_server(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
