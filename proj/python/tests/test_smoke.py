import json
import math
import urllib.request

import pacman_lab
import pytest

def test_plan_on_the_line_world():
    domain = pacman_lab.domain_text("line")
    result = pacman_lab.plan(domain, "Loc=1", "Loc=3", maxstamp=16, seed=0)
    assert result is not None
    assert result["actions"] == 2
    assert result["plan"].count("moveright") == 2
    assert pacman_lab.plan(domain, "Loc=1", "Loc=1")["actions"] == 0


def test_parse_errors_raise():
    with pytest.raises(Exception):
        pacman_lab.plan("fluent Loc : 1..", "Loc=1", "Loc=2")


def test_environment_and_rewards():
    env = pacman_lab.Environment("fourrooms")
    assert env.action_names == ["up", "down", "left", "right"]
    assert env.default_maxstamp == 96
    s = env.reset()
    assert env.label(s) == "5,2"
    nxt, reward, terminal = env.step(s, 0)
    assert reward == -1.0 and not terminal
    assert len(env.states()) <= env.num_states


def test_policy_gradient_matches_softmax():
    pi = pacman_lab.PolicyTable(1, 3)
    pi.set_preference(0, 1, math.log(2.0))
    probs = pi.action_probs(0)
    assert probs == pytest.approx([0.25, 0.5, 0.25])
    grad = pi.grad_log_policy(0, 1)
    assert grad == pytest.approx([-0.25, 0.5, -0.25])
    assert sum(grad) == pytest.approx(0.0, abs=1e-15)


def test_experiment_is_reproducible():
    config = "env = line\nalgorithm = pacman\nruns = 2\nmaxepisode = 20\n"
    a = pacman_lab.run_experiment(config)
    b = pacman_lab.run_experiment(config)
    assert a["returns"] == b["returns"]
    assert len(a["mean"]) == 20
    with pytest.raises(ValueError):
        pacman_lab.run_experiment("bogus = 1\n")


def test_scenario_text_names_the_intent():
    assert "misleading" in pacman_lab.scenario_text("taxi", "misleading", "ideal")


def _request(method, url, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url, data=data, method=method, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, json.loads(resp.read() or b"null")
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read() or b"null")


def test_trainer_service_over_http():
    server = pacman_lab.TrainerServer()
    port = server.start("127.0.0.1", 0)
    base = f"http://127.0.0.1:{port}/v1"
    try:
        config = "env = line\nalgorithm = pacman\nmaxepisode = 3\n"
        status, created = _request("POST", f"{base}/sessions", {"config": config, "feedback": "none", "pacing": "step"})
        assert status == 201
        sid = created["session"]
        status, _ = _request("POST", f"{base}/sessions/{sid}/control", {"command": "step"})
        assert status == 200
        status, events = _request("GET", f"{base}/sessions/{sid}/events?since=0&wait_ms=2000")
        assert status == 200
        seqs = [e["seq"] for e in events["events"]]
        assert seqs == list(range(1, len(seqs) + 1))
        assert all(e["v"] == 1 for e in events["events"])
        status, _ = _request("GET", f"{base}/sessions/nope/snapshot")
        assert status == 404
        status, _ = _request("DELETE", f"{base}/sessions/{sid}")
        assert status == 200
    finally:
        server.stop()
