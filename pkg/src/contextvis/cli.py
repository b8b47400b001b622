"""Operational CLI: ``serve`` runs the service in-process; ``import``,
``generate`` and ``export`` are thin HTTP clients against a running server."""
from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path
from typing import Optional

import click
import httpx

from .config import load_config
from .errors import ContextVisError

DEFAULT_API_URL = "http://127.0.0.1:8000"


def _api_url(explicit: Optional[str]) -> str:
    return (explicit or os.environ.get("CONTEXTVIS_API_URL") or DEFAULT_API_URL).rstrip("/")


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _check(resp: httpx.Response) -> dict:
    if resp.status_code >= 400:
        try:
            body = resp.json()
            _fail(f"{body.get('error', resp.status_code)}: {body.get('detail', '')}")
        except ValueError:
            _fail(f"HTTP {resp.status_code}")
    return resp.json()


@click.group()
def main():
    """Contextual vocabulary learning content service."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
def serve(config_path: Optional[Path]):
    """Run the HTTP service."""
    from .api import serve as run_server

    try:
        run_server(load_config(config_path))
    except ContextVisError as exc:
        _fail(exc.detail)


@main.command("import")
@click.option("--file", "file_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--api-url", default=None)
def import_units(file_path: Path, api_url: Optional[str]):
    """Import a unit-collection JSON document."""
    document = json.loads(file_path.read_text(encoding="utf-8"))
    body = _check(httpx.post(f"{_api_url(api_url)}/units/import", json=document, timeout=30.0))
    for unit_id in body["ids"]:
        click.echo(unit_id)


@main.command()
@click.option("--unit", "unit_id", required=True)
@click.option("--theme", default="")
@click.option("--seed", type=int, default=None)
@click.option("--wait", is_flag=True, default=False)
@click.option("--api-url", default=None)
@click.option("--poll-interval", type=float, default=0.2, show_default=True)
def generate(unit_id: str, theme: str, seed: Optional[int], wait: bool, api_url: Optional[str], poll_interval: float):
    """Submit material-set generation for a unit; optionally wait for it."""
    base = _api_url(api_url)
    payload: dict = {"unit_id": unit_id, "theme": theme}
    if seed is not None:
        payload["seed"] = seed
    body = _check(httpx.post(f"{base}/material-sets", json=payload, timeout=30.0))
    click.echo(f"job_id: {body['job_id']}")
    click.echo(f"material_set_id: {body['material_set_id']}")
    if not wait:
        return
    while True:
        job = _check(httpx.get(f"{base}/jobs/{body['job_id']}", timeout=30.0))
        if job["state"] in ("Succeeded", "Failed"):
            click.echo(f"state: {job['state']} (attempts: {job['attempts']})")
            if job["state"] == "Failed":
                _fail(job.get("error") or "generation failed")
            return
        time.sleep(poll_interval)


@main.command()
@click.option("--set", "set_id", required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--api-url", default=None)
def export(set_id: str, out_path: Path, api_url: Optional[str]):
    """Download a Ready material set's export bundle to a zip file."""
    resp = httpx.get(f"{_api_url(api_url)}/material-sets/{set_id}/export", timeout=60.0)
    if resp.status_code >= 400:
        _check(resp)
    out_path.write_bytes(resp.content)
    click.echo(f"wrote {out_path} ({len(resp.content)} bytes)")


if __name__ == "__main__":
    main()
