"""Command-line client for the simulation service.

``run`` always talks HTTP to the service API: against ``--server URL`` (or
``ISAC_SERVER``) when given, otherwise against an in-process instance of the
app, so no standing server is needed for local work.  ``serve`` starts the
service itself.
"""

from __future__ import annotations

import asyncio
import tempfile
from pathlib import Path

import click
import httpx
from pydantic import ValidationError

from .harness.config import ExperimentConfig, load_config, preset
from .service.app import create_app

_POLL_SECONDS = 0.5


def _build_config(config_path: str | None, preset_name: str | None) -> ExperimentConfig:
    if (config_path is None) == (preset_name is None):
        raise click.UsageError("pass exactly one of --config or --preset")
    try:
        if preset_name is not None:
            return preset(preset_name)
        return load_config(config_path)
    except (ValidationError, ValueError) as err:
        raise click.ClickException(f"invalid config: {err}")


def _apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    changes = {k: v for k, v in overrides.items() if v is not None}
    if not changes:
        return config
    return config.model_copy(update=changes)


async def _request_plan(client: httpx.AsyncClient, config: ExperimentConfig) -> dict:
    resp = await client.post("/validate", json=config.model_dump(mode="json"))
    resp.raise_for_status()
    return resp.json()


async def _run_remote(client: httpx.AsyncClient, config: ExperimentConfig, out_dir: Path) -> dict:
    resp = await client.post("/runs", json=config.model_dump(mode="json"))
    resp.raise_for_status()
    status = resp.json()
    run_id = status["run_id"]
    while status["state"] in ("queued", "running"):
        await asyncio.sleep(_POLL_SECONDS)
        resp = await client.get(f"/runs/{run_id}")
        resp.raise_for_status()
        status = resp.json()
    if status["state"] != "done":
        raise click.ClickException(f"run {run_id} failed: {status.get('error')}")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in status["artifacts"]:
        resp = await client.get(f"/runs/{run_id}/artifacts/{name}")
        resp.raise_for_status()
        (out_dir / name).write_bytes(resp.content)
    return status


def _print_plan(plan: dict) -> None:
    click.echo(f"sweep plan: {len(plan['sweep_points'])} point(s), {plan['total_trials']} total trials")
    for p in plan["sweep_points"]:
        click.echo(
            f"  sweep {p['sweep_id']}: S={p['sense_count']} C={p['comm_count']} "
            f"M={p['antennas']} D={p['devices']} ({p['configurations']} configurations/trial)"
        )


def _print_summary(status: dict) -> None:
    summary = status.get("summary") or []
    click.echo(f"run {status['run_id']} done")
    for a in summary:
        rate = a["sum_rate_bps_mean"]
        rate_txt = f"{rate:.6g}" if rate is not None else "inf"
        click.echo(
            f"  sweep {a['sweep_id']}: S={a['sense_count']} C={a['comm_count']} "
            f"M={a['antennas']} D={a['devices']} trials={a['trials']} "
            f"fused_precision={a['fused_precision_mean']:.4f}+-{a['fused_precision_sem']:.4f} "
            f"sum_rate_bps={rate_txt}"
        )


@click.group()
def main() -> None:
    """Distributed stripe ISAC simulator."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="YAML/JSON experiment config.")
@click.option("--preset", "preset_name", type=click.Choice(["desk", "paper"]), help="Built-in configuration.")
@click.option("--workers", type=click.IntRange(min=1), envvar="ISAC_WORKERS", default=None, help="Parallel trial workers.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), envvar="ISAC_SEED", default=None, help="Master seed override.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Directory for downloaded artifacts.")
@click.option("--dry-run", is_flag=True, help="Validate and print the sweep plan; write nothing.")
@click.option("--dump-scenes", is_flag=True, help="Also emit per-trial scene images.")
@click.option("--fixed-scene", is_flag=True, help="Freeze target positions across trials.")
@click.option("--server", envvar="ISAC_SERVER", default=None, help="Remote service URL; default runs in-process.")
def run(config_path, preset_name, workers, seed, out_dir, dry_run, dump_scenes, fixed_scene, server) -> None:
    """Execute an experiment and fetch its artifacts."""
    config = _build_config(config_path, preset_name)
    config = _apply_overrides(
        config,
        seed=seed,
        workers=workers,
        dump_scenes=True if dump_scenes else None,
        fixed_scene=True if fixed_scene else None,
    )
    out = Path(out_dir or config.output_dir or "isac-out")

    async def _go() -> None:
        if server is not None:
            async with httpx.AsyncClient(base_url=server.rstrip("/"), timeout=None) as client:
                await _dispatch(client)
            return
        with tempfile.TemporaryDirectory(prefix="isacsim-") as scratch:
            transport = httpx.ASGITransport(app=create_app(data_dir=scratch))
            async with httpx.AsyncClient(transport=transport, base_url="http://isacsim.local", timeout=None) as client:
                await _dispatch(client)

    async def _dispatch(client: httpx.AsyncClient) -> None:
        if dry_run:
            _print_plan(await _request_plan(client, config))
            return
        status = await _run_remote(client, config, out)
        _print_summary(status)
        click.echo(f"artifacts written to {out}")

    try:
        asyncio.run(_go())
    except httpx.HTTPStatusError as err:
        detail = err.response.text
        raise click.ClickException(f"service error {err.response.status_code}: {detail}")
    except httpx.HTTPError as err:
        raise click.ClickException(f"cannot reach service: {err}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--data-dir", envvar="ISAC_DATA_DIR", default=None, help="Where run artifacts are stored.")
def serve(host, port, data_dir) -> None:
    """Start the simulation service."""
    import uvicorn

    uvicorn.run(create_app(data_dir=data_dir), host=host, port=port)


if __name__ == "__main__":
    main()
