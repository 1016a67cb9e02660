from __future__ import annotations

import json
import threading

import pytest
from fastapi.testclient import TestClient

import toyworld
from polyroute.cli import main
from polyroute.config import load_config
from polyroute.errors import ConfigParse
from polyroute.service import create_app
from prompt_cases import CONTEXTS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_ask_prints_answer_json(toy, capsys):
    q = toyworld.QUESTIONS[1]
    code, out, _ = run(capsys, "ask", "--config", str(toy.config), "--question", q.question)
    assert code == 0
    doc = json.loads(out)
    assert doc["selected"] == {"route": "SQL", "kb": "toy_concerts"}
    assert doc["status"] == "ok" and doc["evidence_text"] == "n\n2"


def test_ask_missing_config(tmp_path, capsys):
    code, out, err = run(capsys, "ask", "--config", str(tmp_path / "nope.json"), "--question", "q")
    assert code == 1 and out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == "error"


def test_ask_all_failing_is_exit_2(toy, capsys):
    script = [{"tag": "selection", "match": "any", "key": "",
               "response": '{"decisions": [{"route_type": "SQL", "kb_id": "toy_concerts"}]}'},
              {"tag": "formulation.sql", "match": "any", "key": "", "response": "SELECT nope FROM nowhere"}]
    toy.script.write_text(json.dumps({"entries": script}))
    code, out, _ = run(capsys, "ask", "--config", str(toy.config), "--question", "q")
    assert code == 2 and json.loads(out)["status"] == "no_evidence"


def test_ask_writes_trace_file(toy, capsys):
    cfg = json.loads(toy.config.read_text())
    cfg["trace"] = "trace.jsonl"
    toy.config.write_text(json.dumps(cfg))
    run(capsys, "ask", "--config", str(toy.config), "--question", toyworld.QUESTIONS[0].question)
    lines = (toy.root / "trace.jsonl").read_text().splitlines()
    assert len(lines) == 1 and json.loads(lines[0])["candidates"]


def test_eval_writes_report(toy, tmp_path, capsys):
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "eval", "--config", str(toy.config), "--dataset", str(toy.dataset),
                       "--mode", "omni", "--report", str(report), "--csv", str(tmp_path / "r.csv"))
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["macro"] == {"source_selection": 100.0, "retrieval": 100.0, "judge": 100.0}
    assert "source_selection" in out and "100.00" in out
    assert (tmp_path / "r.csv").read_text().startswith("question_id,")


def test_eval_unknown_gold_kb_is_excluded(toy, tmp_path, capsys, caplog):
    with toy.dataset.open("a") as fh:
        fh.write(json.dumps({"question_id": "q9", "question": "x", "paradigm": "SQL", "gold_kb": "ghost",
                             "gold_query": "SELECT 1"}) + "\n")
    report = tmp_path / "report.json"
    code, _, _ = run(capsys, "eval", "--config", str(toy.config), "--dataset", str(toy.dataset),
                     "--mode", "omni", "--report", str(report))
    assert code == 0
    assert json.loads(report.read_text())["excluded"] == ["q9"]
    assert "ghost" in caplog.text


def test_eval_invalid_mode(toy, tmp_path, capsys):
    code, _, err = run(capsys, "eval", "--config", str(toy.config), "--dataset", str(toy.dataset),
                       "--mode", "telepathy", "--report", str(tmp_path / "r.json"))
    assert code == 1 and "usage" in err


def test_validate_query(capsys):
    code, out, _ = run(capsys, "validate-query", "--kind", "sql", "--context", str(CONTEXTS / "concert_singer.txt"),
                       "--query", "SELECT * FROM artists")
    assert code == 0
    assert json.loads(out) == {"kind": "SQL", "grounded": False, "unknown_identifiers": ["artists"], "parse_notes": []}


def test_config_validation(toy):
    cfg = json.loads(toy.config.read_text())
    cfg["k"] = 0
    toy.config.write_text(json.dumps(cfg))
    with pytest.raises(ConfigParse):
        load_config(toy.config)


@pytest.fixture
def client(toy):
    return TestClient(create_app(load_config(toy.config)))


def test_service_endpoints(client):
    assert client.get("/healthz").text == "ok"
    assert [s["kb_id"] for s in client.get("/catalog").json()] == [
        "toy_health", "toy_concerts", "toy_wikidata", "toy_movies"]
    r = client.post("/ask", json={"question": toyworld.QUESTIONS[3].question})
    assert r.status_code == 200 and r.json()["selected"]["kb"] == "toy_movies"


def test_service_rejects_bad_bodies(client):
    assert client.post("/ask", content=b"").status_code == 400
    assert client.post("/ask", json={"k": 2}).status_code == 400
    assert client.post("/ask", json={"question": "x", "mode": "nope"}).status_code == 400


def test_service_draining(client):
    client.app.state.service.draining.set()
    assert client.post("/ask", json={"question": "q"}).status_code == 503
    assert client.get("/healthz").status_code == 200


def test_service_concurrent_requests_keep_traces_apart(client):
    results = {}

    def ask(q):
        results[q.question_id] = client.post("/ask", json={"question": q.question}).json()

    threads = [threading.Thread(target=ask, args=(q,)) for q in toyworld.QUESTIONS for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for q in toyworld.QUESTIONS:
        assert results[q.question_id]["selected"]["kb"] == q.kb_id


def test_serve_subprocess_shuts_down_on_sigterm(toy):
    import signal
    import socket
    import subprocess
    import sys
    import time

    import httpx

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    proc = subprocess.Popen([sys.executable, "-m", "polyroute.cli", "serve", "--config", str(toy.config),
                             "--addr", f"127.0.0.1:{port}"], stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        deadline = time.monotonic() + 20
        while True:
            try:
                assert httpx.get(f"http://127.0.0.1:{port}/healthz").text == "ok"
                break
            except httpx.TransportError:
                assert proc.poll() is None and time.monotonic() < deadline, proc.stderr.read()
                time.sleep(0.1)
        proc.send_signal(signal.SIGTERM)
        assert proc.wait(timeout=30) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
