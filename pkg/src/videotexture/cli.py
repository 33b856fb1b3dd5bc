"""Command-line interface.

The CLI is a thin client of the HTTP service: by default it mounts the
FastAPI app in-process, and with --server it talks to a remote instance, so
batch runs and a shared long-running service behave identically. Exit codes
are 0 on success and one distinct nonzero code per error class.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import httpx

from . import __version__
from .errors import ConfigError, exit_code_for
from .pipeline import CACHE_ENV_VAR, PipelineConfig

logger = logging.getLogger(__name__)

# fields whose CLI flags map straight onto PipelineConfig
_CONFIG_FIELDS = set(PipelineConfig.model_fields)


def _parse_k(value: str):
    if value == "auto":
        return None
    try:
        return int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--k must be an integer or 'auto', got {value!r}") from exc


def _add_common_options(p: argparse.ArgumentParser) -> None:
    # argparse defaults are suppressed so a config file can fill anything the
    # user did not pass explicitly; the effective defaults live on PipelineConfig
    p.add_argument("--config", metavar="FILE", default=None,
                   help="JSON config file; explicit flags override its values")
    p.add_argument("-i", "--input", dest="input_path", default=argparse.SUPPRESS,
                   help="input clip: directory of *.png stills or a .gif file")
    p.add_argument("-o", "--output", dest="output_path", default=argparse.SUPPRESS,
                   help="output directory for artifacts (default: out)")
    p.add_argument("--input-kind", dest="input_kind", choices=["auto", "stills", "animation"],
                   default=argparse.SUPPRESS, help="force input interpretation (default: auto)")
    p.add_argument("--delay-ms", dest="delay_ms", type=int, default=argparse.SUPPRESS,
                   help="frame delay for stills input (default: 100)")
    p.add_argument("--metric", choices=["ssd", "chebyshev", "wavelet"],
                   default=argparse.SUPPRESS, help="frame distance metric (default: ssd)")
    p.add_argument("--taps", type=int, choices=[0, 2, 4], default=argparse.SUPPRESS,
                   help="dynamics filter width, 0 disables filtering (default: 4)")
    p.add_argument("--sigma-multiple", dest="sigma_multiple", type=float,
                   default=argparse.SUPPRESS,
                   help="multiple of the mean nonzero distance used as sigma (default: 0.05)")
    p.add_argument("--normalize", action="store_true", default=argparse.SUPPRESS,
                   help="stretch intensity percentiles before analysis (default: off)")
    p.add_argument("--pct-low", dest="pct_low", type=float, default=argparse.SUPPRESS,
                   help="low intensity percentile (default: 0.01)")
    p.add_argument("--pct-high", dest="pct_high", type=float, default=argparse.SUPPRESS,
                   help="high intensity percentile (default: 0.99)")
    p.add_argument("--k", type=_parse_k, default=argparse.SUPPRESS,
                   help="cluster count for the wavelet metric, or 'auto' (default: auto)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="seed for clustering and sampling (default: 0)")
    p.add_argument("--server", default=None, metavar="URL",
                   help="talk to a remote service instead of running in-process")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def _add_synthesis_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["loop", "random", "cluster"], default=argparse.SUPPRESS,
                   help="synthesis mode (default: loop)")
    p.add_argument("--length", type=int, default=argparse.SUPPRESS,
                   help="output frame count for random/cluster modes (default: 120)")
    p.add_argument("--min-loop", dest="min_loop", type=int, default=argparse.SUPPRESS,
                   help="minimum loop length in frames (default: max(8, n/10))")
    p.add_argument("--prune", dest="prune_frac", type=float, default=argparse.SUPPRESS,
                   help="fraction of leading/trailing frames discarded before "
                        "loop search (default: 0.05)")
    p.add_argument("--transition", choices=["cut", "crossfade", "interpolate"],
                   default=argparse.SUPPRESS, help="cut smoothing mode (default: crossfade)")
    p.add_argument("--steps", type=int, default=argparse.SUPPRESS,
                   help="blend frames inserted per cut (default: 4)")
    p.add_argument("--play-once", dest="loop_forever", action="store_false",
                   default=argparse.SUPPRESS,
                   help="write a single-play GIF instead of an infinite loop")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="videotexture",
        description="Analyze a short clip and synthesize a seamless looping GIF.",
        epilog=f"The analysis cache directory can be overridden with ${CACHE_ENV_VAR}.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser(
        "analyze", help="compute distance/probability matrices and emit heatmaps + summary"
    )
    _add_common_options(p_analyze)

    p_synth = sub.add_parser("synthesize", help="synthesize a texture GIF from the analysis")
    _add_common_options(p_synth)
    _add_synthesis_options(p_synth)

    p_vis = sub.add_parser("visualize", help="re-render heatmaps from cached matrices")
    _add_common_options(p_vis)
    p_vis.add_argument("--scale", type=int, default=1, help="integer pixel upscale (default: 1)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    """Merge config file values with explicitly passed flags (flags win)."""
    values = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file does not exist: {path}")
        try:
            values.update(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    for field in _CONFIG_FIELDS:
        if hasattr(args, field):
            values[field] = getattr(args, field)
    if "input_path" not in values:
        raise ConfigError("an input clip is required (-i/--input or config file)")
    try:
        return PipelineConfig(**values)
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def _open_client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process client against the same app the `serve` command exposes
    from fastapi.testclient import TestClient

    from .server import app

    return TestClient(app, raise_server_exceptions=False)


def _call(server: str | None, endpoint: str, payload: dict) -> int:
    try:
        with _open_client(server) as client:
            response = client.post(endpoint, json=payload)
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return 1

    try:
        body = response.json()
    except ValueError:
        print(f"error: service returned non-JSON response ({response.status_code})",
              file=sys.stderr)
        return 1

    if response.status_code == 200:
        print(json.dumps(body, indent=2, sort_keys=True))
        return 0
    if "error" in body:
        print(f"error [{body['error']}]: {body['message']}", file=sys.stderr)
        return int(body.get("exit_code") or exit_code_for(body["error"]))
    # request rejected by model validation before reaching the pipeline
    print(f"error: invalid request: {json.dumps(body)}", file=sys.stderr)
    return ConfigError.exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "serve":
        import uvicorn

        from .server import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"error [ConfigError]: {exc}", file=sys.stderr)
        return exc.exit_code

    payload = config.model_dump()
    if args.command == "visualize":
        payload["scale"] = args.scale
    return _call(args.server, f"/{args.command}", payload)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
