from __future__ import annotations

import json
import socket
import threading
import time
import zipfile

import httpx
import pytest
import uvicorn
from click.testing import CliRunner

from conftest import unit_document
from contextvis.api import create_app
from contextvis.cli import main
from contextvis.config import ApiConfig


@pytest.fixture(scope="module")
def live_server(tmp_path_factory):
    """Real uvicorn server on an ephemeral port, shared across CLI tests."""
    data_dir = tmp_path_factory.mktemp("server-data")
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.bind(("127.0.0.1", 0))
    sock.listen(128)
    port = sock.getsockname()[1]
    app = create_app(ApiConfig(data_dir=data_dir, listen_address=f"127.0.0.1:{port}"))
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    thread = threading.Thread(target=server.run, kwargs={"sockets": [sock]}, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 10
    while time.monotonic() < deadline:
        try:
            httpx.get(f"{base}/units", timeout=1.0)
            break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        raise RuntimeError("server did not come up")
    yield base
    server.should_exit = True
    thread.join(timeout=10)


def test_cli_import_generate_export(tmp_path, live_server):
    runner = CliRunner()

    doc_path = tmp_path / "units.json"
    doc_path.write_text(json.dumps(unit_document()))
    result = runner.invoke(main, ["import", "--file", str(doc_path), "--api-url", live_server])
    assert result.exit_code == 0, result.output
    unit_id = result.output.strip().splitlines()[-1]

    result = runner.invoke(
        main,
        ["generate", "--unit", unit_id, "--theme", "school trip", "--seed", "1", "--wait", "--api-url", live_server],
    )
    assert result.exit_code == 0, result.output
    assert "state: Succeeded" in result.output
    set_id = next(l.split(": ")[1] for l in result.output.splitlines() if l.startswith("material_set_id"))

    out_zip = tmp_path / "bundle.zip"
    result = runner.invoke(main, ["export", "--set", set_id, "--out", str(out_zip), "--api-url", live_server])
    assert result.exit_code == 0, result.output
    names = zipfile.ZipFile(out_zip).namelist()
    assert "manifest.json" in names and "script.txt" in names


def test_cli_generate_unknown_unit(live_server):
    runner = CliRunner()
    result = runner.invoke(main, ["generate", "--unit", "ghost", "--api-url", live_server])
    assert result.exit_code == 1
    assert "unknown_unit" in result.output


def test_cli_export_unknown_set(tmp_path, live_server):
    runner = CliRunner()
    result = runner.invoke(main, ["export", "--set", "ghost", "--out", str(tmp_path / "x.zip"), "--api-url", live_server])
    assert result.exit_code == 1
    assert "unknown_material_set" in result.output


def test_cli_env_api_url(monkeypatch, live_server):
    monkeypatch.setenv("CONTEXTVIS_API_URL", live_server)
    runner = CliRunner()
    result = runner.invoke(main, ["generate", "--unit", "ghost"])
    assert "unknown_unit" in result.output
