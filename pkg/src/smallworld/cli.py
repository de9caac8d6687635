"""Command-line client for the smallworld service.

The CLI is a thin HTTP client: it loads the experiment config, sends one
request to the service, and writes the returned artifacts under --out.
By default it drives an in-process instance of the service (no server
needed); pass --server to talk to a remote deployment instead. Artifacts
are only written after a fully successful response, so a failed run never
leaves partial outputs.

Errors are reported as a JSON object on stderr and a nonzero exit code:
2 for invalid configs or inputs, 1 for anything else.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

# Stages behind each subcommand; dependencies are resolved server-side.
_SUBCOMMAND_STAGES = {
    "generate": ["world"],
    "sample": ["sample"],
    "idi": ["idi"],
    "simulate": ["simulate"],
    "scale": ["scaling"],
    "compare": ["policies"],
}


class CliError(Exception):
    def __init__(self, payload: dict, exit_code: int = 1):
        super().__init__(payload.get("error", {}).get("message", "request failed"))
        self.payload = payload
        self.exit_code = exit_code


class ServiceClient:
    """Speaks the service's HTTP API, in-process by default."""

    def __init__(self, server: str | None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        if self.server is not None:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                response = client.post(path, json=payload)
                return self._unwrap(response)
        return asyncio.run(self._post_in_process(path, payload))

    async def _post_in_process(self, path: str, payload: dict) -> dict:
        from .service import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://smallworld.internal", timeout=None
        ) as client:
            response = await client.post(path, json=payload)
            return self._unwrap(response)

    @staticmethod
    def _unwrap(response: httpx.Response) -> dict:
        if response.status_code == 200:
            return response.json()
        try:
            body = response.json()
        except ValueError:
            body = {"detail": response.text}
        if "error" in body:
            raise CliError(body, exit_code=2)
        if response.status_code == 422:
            raise CliError(
                {"error": {"type": "invalid_config", "message": "config failed validation",
                           "detail": body.get("detail")}},
                exit_code=2,
            )
        raise CliError(
            {"error": {"type": "http_error", "status": response.status_code, "detail": body}}
        )


def _load_config(path: str, seed_override: int | None) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliError(
            {"error": {"type": "invalid_config", "message": f"config file not found: {path}"}},
            exit_code=2,
        )
    except json.JSONDecodeError as exc:
        raise CliError(
            {"error": {"type": "invalid_config", "message": f"config is not valid JSON: {exc}"}},
            exit_code=2,
        )
    if seed_override is not None:
        raw["seed"] = seed_override
    return raw


def _write_artifacts(artifacts: list[dict], out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for artifact in artifacts:
        target = out / artifact["path"]
        target.write_text(artifact["text"], encoding="utf-8")
        print(f"wrote {target}")


def _print_idi_lines(artifacts: list[dict]) -> None:
    # one CSV row per (world, window): tag, window bounds, then the report fields
    horizon = ""
    for artifact in artifacts:
        if artifact["path"].endswith("world_meta.json"):
            horizon = json.loads(artifact["text"])["horizon"]
    for artifact in artifacts:
        name = artifact["path"]
        if not (name.startswith("idi") and name.endswith(".json")):
            continue
        tag = name[: -len(".json")]
        report = json.loads(artifact["text"])
        print(
            f"{tag},0,{horizon},{report['idi']!r},{report['avg_c']!r},{report['sum_c']},"
            f"{report['m']},{report['n_cell']},{report['rho1']!r},{report['rho2']!r},"
            f"{report['conn']!r}"
        )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="smallworld",
        description="grid SEIR simulation with small-world scale-up",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=None, help="override the config root seed")
        p.add_argument("--server", default=None, help="service URL (default: in-process)")

    for name, helptext in [
        ("generate", "synthesize the configured world"),
        ("sample", "draw the configured small-world samples"),
        ("idi", "compute crowd-flow metrics (prints one CSV row per world)"),
        ("simulate", "run the full-world epidemic simulation"),
        ("scale", "build per-fraction scaling reports"),
        ("compare", "compare the configured policies against no restriction"),
        ("validate", "run the full-vs-sampled scaling validation"),
    ]:
        add_common(sub.add_parser(name, help=helptext))

    discretize_parser = sub.add_parser("discretize", help="grid raw GPS points into a world")
    add_common(discretize_parser)
    discretize_parser.add_argument("--points", required=True, help="raw points CSV")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    args = parser.parse_args(argv)

    try:
        return _dispatch(args)
    except CliError as exc:
        print(json.dumps(exc.payload, sort_keys=True), file=sys.stderr)
        return exc.exit_code
    except httpx.HTTPError as exc:
        print(
            json.dumps({"error": {"type": "connection", "message": str(exc)}}, sort_keys=True),
            file=sys.stderr,
        )
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    client = ServiceClient(args.server)

    if args.command == "validate":
        config = _load_config(args.config, args.seed)
        body = client.post("/pipeline/validate", {"config": config})
        _write_artifacts(body["artifacts"], args.out)
        return 0

    if args.command == "discretize":
        from . import io as _io

        config = _load_config(args.config, args.seed)
        try:
            points = _io.read_points_csv(args.points)
        except (OSError, ValueError) as exc:
            raise CliError(
                {"error": {"type": "invalid_input", "message": str(exc)}}, exit_code=2
            )
        world_cfg = config.get("world", {})
        payload = {
            "points": [list(p) for p in points],
            "grid": world_cfg.get("grid"),
            "frames": world_cfg.get("frames"),
        }
        body = client.post("/world/discretize", payload)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        meta, csv_text = _render_world_payload(body)
        (out / "world_meta.json").write_text(meta, encoding="utf-8")
        (out / "world_trajectories.csv").write_text(csv_text, encoding="utf-8")
        print(f"wrote {out / 'world_meta.json'}")
        print(f"wrote {out / 'world_trajectories.csv'}")
        return 0

    config = _load_config(args.config, args.seed)
    body = client.post(
        "/pipeline/run", {"config": config, "stages": _SUBCOMMAND_STAGES[args.command]}
    )
    _write_artifacts(body["artifacts"], args.out)
    if args.command == "idi":
        _print_idi_lines(body["artifacts"])
    return 0


def _render_world_payload(payload: dict) -> tuple[str, str]:
    from . import io as _io
    from .service.schemas import WorldPayload

    world = WorldPayload.model_validate(payload).to_core()
    return _io.render_world_meta(world), _io.render_trajectories_csv(world)


if __name__ == "__main__":
    sys.exit(main())
